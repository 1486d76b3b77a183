use crate::{Error, Result};

const MATCH_TOL: f64 = 1e-12;
const RADICAND_TOL: f64 = 1e-12;

/// Vector `d` with `diag(a) − d dᵀ` having eigenvalues `b`, for interlaced
/// `a₁ ≥ b₁ ≥ a₂ ≥ ⋯ ≥ a_k ≥ b_k ≥ 0`.
///
/// Values shared by `a` and `b` are deflated first (their `d` entries are 0);
/// the rest uses `d_i² = Π_j (b_j − a_i) / (−Π_{j≠i} (a_j − a_i))`.
pub fn rank_one_downdate(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "downdate spectra lengths",
            expected: a.len(),
            found: b.len(),
        });
    }
    check_interlacing(a, b)?;

    let mut free_a = Vec::new();
    let mut free_b = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if (a[i] - b[j]).abs() <= MATCH_TOL {
            i += 1;
            j += 1;
        } else if a[i] > b[j] {
            free_a.push(i);
            i += 1;
        } else {
            free_b.push(j);
            j += 1;
        }
    }
    free_a.extend(i..a.len());
    free_b.extend(j..b.len());
    debug_assert_eq!(free_a.len(), free_b.len());

    let mut d = vec![0.0; a.len()];
    for &fi in &free_a {
        let ai = a[fi];
        let num: f64 = free_b.iter().map(|&fj| b[fj] - ai).product();
        let den: f64 = -free_a
            .iter()
            .filter(|&&o| o != fi)
            .map(|&o| a[o] - ai)
            .product::<f64>();
        let radicand = num / den;
        if radicand < -RADICAND_TOL || !radicand.is_finite() {
            return Err(Error::InterlacingViolated {
                position: fi + 1,
                detail: format!("negative radicand {radicand:e} at a = {ai}"),
            });
        }
        d[fi] = radicand.max(0.0).sqrt();
    }
    Ok(d)
}

fn check_interlacing(a: &[f64], b: &[f64]) -> Result<()> {
    let fail =
        |position: usize, detail: String| Err(Error::InterlacingViolated { position, detail });
    for k in 0..a.len() {
        if a[k] + MATCH_TOL < b[k] {
            return fail(
                k + 1,
                format!("a[{}] = {} < b[{}] = {}", k + 1, a[k], k + 1, b[k]),
            );
        }
        if let Some(&next) = a.get(k + 1) {
            if b[k] + MATCH_TOL < next {
                return fail(
                    k + 1,
                    format!("b[{}] = {} < a[{}] = {}", k + 1, b[k], k + 2, next),
                );
            }
        }
    }
    if let Some(&last) = b.last() {
        if last < -MATCH_TOL {
            return fail(b.len(), format!("b[{}] = {last} is negative", b.len()));
        }
    }
    Ok(())
}
