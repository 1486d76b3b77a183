//! Frobenius-norm projections onto the marginal affine set, the
//! fixed-spectrum orbit and the PSD cone, and the marginal consistency test.

use std::collections::BTreeMap;

use num_complex::Complex64;

pub use crate::tensorcore::Spectrum;
use crate::tensorcore::{
    embed, kron, trace_down, CMatrix, HermitianMatrix, KeepSet, SubsystemSplit, SystemDims,
};
use crate::{Error, Result};

/// Default tolerance for [`check_consistency`] before projecting.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-8;

/// A prescribed reduced state on the subsystems in `keep`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalConstraint {
    keep: KeepSet,
    target: HermitianMatrix,
}

impl MarginalConstraint {
    pub fn new(keep: KeepSet, target: impl Into<HermitianMatrix>) -> Self {
        Self {
            keep,
            target: target.into(),
        }
    }

    pub fn keep(&self) -> &KeepSet {
        &self.keep
    }

    pub fn target(&self) -> &HermitianMatrix {
        &self.target
    }
}

/// A collection of marginal constraints on one tensor product space.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    dims: SystemDims,
    constraints: Vec<MarginalConstraint>,
    splits: Vec<SubsystemSplit>,
}

impl ConstraintSet {
    /// Validates keep-sets (nonempty, in range, distinct) and target orders.
    pub fn new(dims: SystemDims, constraints: Vec<MarginalConstraint>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &constraints {
            if c.keep.is_empty() {
                return Err(Error::EmptyKeepSet);
            }
            c.keep.check(&dims)?;
            if !seen.insert(c.keep.clone()) {
                return Err(Error::InvalidKeepSet(format!(
                    "duplicate keep-set {}",
                    c.keep
                )));
            }
            let expected = dims.subsystem_total(&c.keep);
            if c.target.order() != expected {
                return Err(Error::DimensionMismatch {
                    context: "marginal target order vs kept dimension",
                    expected,
                    found: c.target.order(),
                });
            }
        }
        let splits = constraints
            .iter()
            .map(|c| SubsystemSplit::new(&dims, &c.keep))
            .collect();
        Ok(Self {
            dims,
            constraints,
            splits,
        })
    }

    /// The two single-party constraints of a bipartite problem.
    pub fn bipartite(rho1: &HermitianMatrix, rho2: &HermitianMatrix) -> Result<Self> {
        let dims = SystemDims::new(vec![rho1.order(), rho2.order()])?;
        Self::new(
            dims,
            vec![
                MarginalConstraint::new(KeepSet::new([0]), rho1.clone()),
                MarginalConstraint::new(KeepSet::new([1]), rho2.clone()),
            ],
        )
    }

    /// Constraints reproducing the marginals of `state` on each keep-set.
    pub fn from_state(
        state: &HermitianMatrix,
        dims: &SystemDims,
        keeps: &[KeepSet],
    ) -> Result<Self> {
        let constraints = keeps
            .iter()
            .map(|k| {
                crate::tensorcore::partial_trace(state, dims, k)
                    .map(|m| MarginalConstraint::new(k.clone(), m))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims.clone(), constraints)
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn constraints(&self) -> &[MarginalConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub(crate) fn splits(&self) -> &[SubsystemSplit] {
        &self.splits
    }

    fn check_order(&self, x: &HermitianMatrix) -> Result<()> {
        if x.order() != self.dims.total() {
            return Err(Error::DimensionMismatch {
                context: "matrix order vs constraint dims",
                expected: self.dims.total(),
                found: x.order(),
            });
        }
        Ok(())
    }

    /// Marginals of `x` on each constrained keep-set, in constraint order.
    pub fn marginals(&self, x: &HermitianMatrix) -> Result<Vec<HermitianMatrix>> {
        self.check_order(x)?;
        Ok(self
            .splits
            .iter()
            .map(|s| HermitianMatrix::symmetrized(s.trace_out(x.as_matrix())))
            .collect())
    }

    /// `Σ_i ‖tr_{J_i^c}(x) − ρ_{J_i}‖_F`, the solvers' residual.
    pub fn residual(&self, x: &HermitianMatrix) -> Result<f64> {
        self.check_order(x)?;
        Ok(self
            .splits
            .iter()
            .zip(&self.constraints)
            .map(|(s, c)| frobenius(&(s.trace_out(x.as_matrix()) - c.target.as_matrix())))
            .sum())
    }

    /// Largest single-constraint Frobenius violation.
    pub fn max_violation(&self, x: &HermitianMatrix) -> Result<f64> {
        self.check_order(x)?;
        Ok(self
            .splits
            .iter()
            .zip(&self.constraints)
            .map(|(s, c)| frobenius(&(s.trace_out(x.as_matrix()) - c.target.as_matrix())))
            .fold(0.0, f64::max))
    }

    /// Target reduced state on `inner`, traced down from the first constraint
    /// whose keep-set contains it. The empty set yields the unit trace.
    fn derived_marginal(&self, inner: &KeepSet) -> Option<CMatrix> {
        if inner.is_empty() {
            return Some(CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
        }
        let c = self.constraints.iter().find(|c| inner.is_subset(&c.keep))?;
        Some(reduce_target(c, inner, &self.dims))
    }
}

fn reduce_target(c: &MarginalConstraint, inner: &KeepSet, dims: &SystemDims) -> CMatrix {
    let local = dims.restrict(&c.keep).expect("validated keep-set");
    let rel = inner.positions_within(&c.keep).expect("inner is a subset");
    trace_down(c.target.as_matrix(), &local, &rel).expect("validated target order")
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Outcome of [`check_consistency`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// Forced reduced state on each nonempty intersection of keep-sets.
    pub derived_marginals: BTreeMap<KeepSet, HermitianMatrix>,
    pub max_discrepancy: f64,
}

/// Distinct intersections of nonempty subfamilies of `keeps`, with the
/// inclusion–exclusion coefficient `Σ (−1)^{|S|}` accumulated per intersection.
fn intersection_terms(keeps: &[&KeepSet]) -> BTreeMap<KeepSet, i64> {
    assert!(
        keeps.len() < 24,
        "too many constraints for subset enumeration"
    );
    let mut terms = BTreeMap::new();
    for mask in 1u32..(1 << keeps.len()) {
        let mut members = keeps
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0);
        let first = (*members.next().expect("mask is nonzero").1).clone();
        let inter = members.fold(first, |acc, (_, k)| acc.intersection(k));
        let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
        *terms.entry(inter).or_insert(0) += sign;
    }
    terms
}

/// Checks that every target has unit trace and that all targets agree on
/// every intersection of their keep-sets.
pub fn check_consistency(cs: &ConstraintSet, tol: f64) -> ConsistencyReport {
    let mut max_discrepancy = cs
        .constraints
        .iter()
        .map(|c| (c.target.trace() - 1.0).abs())
        .fold(0.0, f64::max);
    let keeps: Vec<&KeepSet> = cs.constraints.iter().map(|c| &c.keep).collect();
    let mut derived_marginals = BTreeMap::new();
    for inner in intersection_terms(&keeps).into_keys() {
        if inner.is_empty() {
            continue;
        }
        let reductions: Vec<CMatrix> = cs
            .constraints
            .iter()
            .filter(|c| inner.is_subset(&c.keep))
            .map(|c| reduce_target(c, &inner, &cs.dims))
            .collect();
        for (i, a) in reductions.iter().enumerate() {
            for b in &reductions[i + 1..] {
                max_discrepancy = max_discrepancy.max(frobenius(&(a - b)));
            }
        }
        derived_marginals.insert(inner, HermitianMatrix::symmetrized(reductions[0].clone()));
    }
    ConsistencyReport {
        consistent: max_discrepancy <= tol,
        derived_marginals,
        max_discrepancy,
    }
}

struct AffineTerm {
    split: SubsystemSplit,
    target: CMatrix,
    coefficient: f64,
}

/// Precomputed Frobenius projection onto the affine set of matrices whose
/// marginals match a consistent [`ConstraintSet`].
///
/// Applies `Z + Σ_S (−1)^{|S|} M_{∩S}(Z, ρ_{∩S})` with terms merged by
/// intersection; the empty intersection contributes the trace correction.
pub struct AffineProjector {
    dims: SystemDims,
    terms: Vec<AffineTerm>,
}

impl AffineProjector {
    pub fn new(cs: &ConstraintSet) -> Result<Self> {
        Self::with_tolerance(cs, DEFAULT_CONSISTENCY_TOL)
    }

    pub fn with_tolerance(cs: &ConstraintSet, tol: f64) -> Result<Self> {
        let report = check_consistency(cs, tol);
        if !report.consistent {
            return Err(Error::InconsistentConstraints {
                max_discrepancy: report.max_discrepancy,
            });
        }
        let keeps: Vec<&KeepSet> = cs.constraints.iter().map(|c| &c.keep).collect();
        let terms = intersection_terms(&keeps)
            .into_iter()
            .filter(|(_, coef)| *coef != 0)
            .map(|(inner, coef)| {
                let split = SubsystemSplit::new(&cs.dims, &inner);
                let target = cs
                    .derived_marginal(&inner)
                    .expect("intersection of constraint keep-sets");
                let coefficient = coef as f64 / split.traced_dim() as f64;
                AffineTerm {
                    split,
                    target,
                    coefficient,
                }
            })
            .collect();
        Ok(Self {
            dims: cs.dims.clone(),
            terms,
        })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn apply(&self, z: &HermitianMatrix) -> Result<HermitianMatrix> {
        if z.order() != self.dims.total() {
            return Err(Error::DimensionMismatch {
                context: "matrix order vs constraint dims",
                expected: self.dims.total(),
                found: z.order(),
            });
        }
        let mut out = z.as_matrix().clone();
        for term in &self.terms {
            let defect = term.split.trace_out(z.as_matrix()) - &term.target;
            term.split.add_lifted(&mut out, &defect, term.coefficient);
        }
        Ok(HermitianMatrix::symmetrized(out))
    }
}

/// Nearest point of the bipartite affine set with marginals `rho1` (first
/// factor) and `rho2` (second factor), by the closed-form correction
/// `P − I/n₁ ⊗ (tr₁P − ρ₂) − (tr₂P − ρ₁) ⊗ I/n₂ + (tr P − 1)/(n₁n₂) · I`.
pub fn project_bipartite_affine(
    p: &HermitianMatrix,
    rho1: impl AsRef<HermitianMatrix>,
    rho2: impl AsRef<HermitianMatrix>,
) -> Result<HermitianMatrix> {
    let (rho1, rho2) = (rho1.as_ref(), rho2.as_ref());
    let (n1, n2) = (rho1.order(), rho2.order());
    let dims = SystemDims::new(vec![n1, n2])?;
    if p.order() != dims.total() {
        return Err(Error::DimensionMismatch {
            context: "bipartite matrix order vs n1*n2",
            expected: dims.total(),
            found: p.order(),
        });
    }
    let m = p.as_matrix();
    let tr1 = trace_down(m, &dims, &KeepSet::new([1]))?;
    let tr2 = trace_down(m, &dims, &KeepSet::new([0]))?;
    let i1 = CMatrix::identity(n1, n1).unscale(n1 as f64);
    let i2 = CMatrix::identity(n2, n2).unscale(n2 as f64);
    let global = (p.trace() - 1.0) / dims.total() as f64;
    let x = m - kron(&i1, &(tr1 - rho2.as_matrix())) - kron(&(tr2 - rho1.as_matrix()), &i2)
        + CMatrix::identity(dims.total(), dims.total()).scale(global);
    Ok(HermitianMatrix::symmetrized(x))
}

/// Nearest matrix with eigenvalues `c`: `U diag(c) U*` where `U` diagonalizes `p`
/// with eigenvalues in descending order.
pub fn project_spectrum(p: &HermitianMatrix, c: &Spectrum) -> Result<HermitianMatrix> {
    if c.len() != p.order() {
        return Err(Error::DimensionMismatch {
            context: "spectrum length vs matrix order",
            expected: p.order(),
            found: c.len(),
        });
    }
    Ok(p.eig()?.reconstruct_with(c.values()))
}

/// Nearest PSD matrix: negative eigenvalues clipped to zero.
pub fn project_psd(z: &HermitianMatrix) -> Result<HermitianMatrix> {
    z.map_spectrum(|v| v.max(0.0))
}

/// `M_J(Z, σ) = P_J^T (I/n_{J^c} ⊗ (tr_{J^c}Z − σ)) P_J`; subtracting it from
/// `Z` gives the nearest matrix whose `J`-marginal is `σ`.
pub fn marginal_correction(
    z: &HermitianMatrix,
    sigma: &HermitianMatrix,
    dims: &SystemDims,
    keep: &KeepSet,
) -> Result<HermitianMatrix> {
    let reduced = trace_down(z.as_matrix(), dims, keep)?;
    if sigma.order() != reduced.nrows() {
        return Err(Error::DimensionMismatch {
            context: "marginal target order vs kept dimension",
            expected: reduced.nrows(),
            found: sigma.order(),
        });
    }
    Ok(HermitianMatrix::symmetrized(embed(
        &(reduced - sigma.as_matrix()),
        dims,
        keep,
    )?))
}

/// Nearest matrix (Frobenius) satisfying every constraint of `cs`.
pub fn project_marginals(z: &HermitianMatrix, cs: &ConstraintSet) -> Result<HermitianMatrix> {
    AffineProjector::new(cs)?.apply(z)
}
