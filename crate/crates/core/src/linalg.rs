//! Small dense linear solves for the optimization oracles.

use nalgebra::{DMatrix, DVector};

/// Condition numbers above this are reported instead of trusted.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFailure {
    Singular,
    IllConditioned(f64),
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `m · x = rhs` by LU with partial pivoting, rejecting exactly or
/// numerically singular matrices and those whose 1-norm condition number
/// exceeds [`MAX_CONDITION`].
pub fn solve(m: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>, SolveFailure> {
    let dim = m.nrows();
    let scale = m.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return Err(SolveFailure::Singular);
    }
    let norm = norm1(&m);
    let lu = m.lu();
    let u = lu.u();
    let min_pivot = (0..dim).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-14 * scale * dim as f64 {
        return Err(SolveFailure::Singular);
    }
    let inverse = lu.try_inverse().ok_or(SolveFailure::Singular)?;
    let cond = norm * norm1(&inverse);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(SolveFailure::IllConditioned(cond));
    }
    let x = &inverse * DVector::from_column_slice(rhs);
    // One step of iterative refinement against the original system.
    let residual = DVector::from_column_slice(rhs) - lu_reconstruct(&lu, &x);
    let x = x + &inverse * residual;
    Ok(x.iter().copied().collect())
}

fn lu_reconstruct(
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    x: &DVector<f64>,
) -> DVector<f64> {
    let (p, l, u) = lu.clone().unpack();
    let mut y = l * (u * x);
    p.inv_permute_rows(&mut y);
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let x = solve(m, &[7.0, 9.0]).unwrap();
        assert!((x[0] - 5.0 / 3.0).abs() < 1e-14);
        assert!((x[1] - 11.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_singular_and_ill_conditioned() {
        let ones = DMatrix::from_element(3, 3, 1.0);
        assert_eq!(solve(ones, &[1.0, 1.0, 1.0]), Err(SolveFailure::Singular));
        let zero = DMatrix::zeros(2, 2);
        assert_eq!(solve(zero, &[0.0, 0.0]), Err(SolveFailure::Singular));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-13]);
        assert!(matches!(solve(m, &[1.0, 1.0]), Err(SolveFailure::IllConditioned(_))));
    }
}
