//! Parsing of `--marginal`, `--keep` and `--dims` and assembly of constraint sets.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use qmarg_core::{
    ConstraintSet, DensityMatrix, HermitianMatrix, KeepSet, MarginalConstraint, SystemDims,
};

use crate::io::read_hermitian;

/// Comma-separated positive integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexList(pub Vec<usize>);

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let values: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|&x| x > 0) => Ok(v),
        _ => Err(format!("`{s}` is not a list of positive integers")),
    }
}

pub fn parse_keep(s: &str) -> Result<IndexList, String> {
    parse_list(s).map(IndexList)
}

pub fn parse_dims(s: &str) -> Result<IndexList, String> {
    parse_list(s).map(IndexList)
}

/// One-based kept subsystems and the file holding their target state.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalArg {
    pub keep: Vec<usize>,
    pub path: PathBuf,
}

pub fn parse_marginal(s: &str) -> Result<MarginalArg, String> {
    let (keep, path) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not of the form <keep>:<file>"))?;
    if path.is_empty() {
        return Err(format!("`{s}` names no file"));
    }
    Ok(MarginalArg {
        keep: parse_list(keep)?,
        path: PathBuf::from(path),
    })
}

pub struct Loaded {
    pub keep: KeepSet,
    pub file_dims: SystemDims,
    pub target: HermitianMatrix,
}

pub fn load(marginals: &[MarginalArg]) -> Result<Vec<Loaded>> {
    marginals
        .iter()
        .map(|m| {
            let keep = KeepSet::from_one_based(&m.keep)?;
            let (file_dims, target) = read_hermitian(&m.path)?;
            Ok(Loaded {
                keep,
                file_dims,
                target,
            })
        })
        .collect()
}

/// Subsystem dimensions implied by marginal files whose own dims list one
/// entry per kept subsystem.
fn infer_dims(loaded: &[Loaded]) -> Result<SystemDims> {
    let mut known: BTreeMap<usize, usize> = BTreeMap::new();
    let mut count = 0;
    for l in loaded {
        count = count.max(l.keep.iter().max().map_or(0, |i| i + 1));
        if l.file_dims.num_subsystems() != l.keep.len() {
            continue;
        }
        for (&i, &d) in l.keep.indices().iter().zip(l.file_dims.dims()) {
            if let Some(&prev) = known.get(&i) {
                if prev != d {
                    bail!("subsystem {} has dimension {prev} and {d}", i + 1);
                }
            }
            known.insert(i, d);
        }
    }
    let dims: Option<Vec<usize>> = (0..count).map(|i| known.get(&i).copied()).collect();
    match dims {
        Some(d) => Ok(SystemDims::new(d)?),
        None => bail!("cannot infer every subsystem dimension; pass --dims"),
    }
}

pub fn constraint_set(
    marginals: &[MarginalArg],
    dims: Option<&IndexList>,
) -> Result<ConstraintSet> {
    let loaded = load(marginals)?;
    let dims = match dims {
        Some(d) => SystemDims::new(d.0.clone())?,
        None => infer_dims(&loaded)?,
    };
    let constraints = loaded
        .into_iter()
        .map(|l| MarginalConstraint::new(l.keep, l.target))
        .collect();
    ConstraintSet::new(dims, constraints).context("invalid marginal constraints")
}

/// The two single-subsystem states of a bipartite problem, in order.
pub fn bipartite_pair(marginals: &[MarginalArg]) -> Result<(DensityMatrix, DensityMatrix)> {
    let loaded = load(marginals)?;
    let pick = |index: usize| -> Result<DensityMatrix> {
        let found: Vec<&Loaded> = loaded
            .iter()
            .filter(|l| l.keep.indices() == [index])
            .collect();
        match found.as_slice() {
            [l] => DensityMatrix::single(l.target.clone())
                .with_context(|| format!("marginal {} is not a state", index + 1)),
            _ => bail!(
                "constructions need exactly one marginal for subsystem {}",
                index + 1
            ),
        }
    };
    if loaded.len() != 2 {
        bail!("constructions take the marginals `1:<file>` and `2:<file>`");
    }
    Ok((pick(0)?, pick(1)?))
}
