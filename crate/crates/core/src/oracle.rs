//! Numerical weighted-least-squares oracles.
//!
//! These assemble the normal equations by visiting every coalition and
//! solving them as a dense linear system. They never use the size-indexed
//! mass identities of [`crate::solver`], so they serve as ground truth for
//! the closed forms.

use nalgebra::DMatrix;

use crate::error::{AfaError, Result};
use crate::game::{grand_gap, CoalitionGame};
use crate::kernels::{weight_of, SymmetricKernel};
use crate::linalg::{solve, SolveFailure};
use crate::solver::{Attribution, SolverDiagnostics};

/// Gram matrix `M_ij = Σ_{S∋i,j} π(S)` and right-hand side
/// `r_j = Σ_{S∋j} π(S)(v(S) − v(∅))`, assembled coalition by coalition.
pub(crate) fn normal_equations(
    game: &CoalitionGame,
    weight: impl Fn(crate::game::Coalition) -> f64,
) -> (DMatrix<f64>, Vec<f64>) {
    let n = game.n();
    let base = game.empty_value();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut r = vec![0.0; n];
    for s in game.coalitions().skip(1) {
        let w = weight(s);
        if w == 0.0 {
            continue;
        }
        let target = game.value(s) - base;
        let members: Vec<usize> = s.members().collect();
        for &i in &members {
            r[i] += w * target;
            for &j in &members {
                m[(i, j)] += w;
            }
        }
    }
    (m, r)
}

/// Solves the equality-constrained problem through its KKT system. The
/// constraint row is scaled to the magnitude of the Gram matrix so that
/// tiny or huge kernels do not inflate the condition number.
pub(crate) fn solve_kkt(
    m: &DMatrix<f64>,
    r: &[f64],
    total: f64,
) -> std::result::Result<(Vec<f64>, f64), SolveFailure> {
    let n = m.nrows();
    let diag_max = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let c = if diag_max > 0.0 { diag_max } else { 1.0 };
    let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
    kkt.view_mut((0, 0), (n, n)).copy_from(m);
    for i in 0..n {
        kkt[(i, n)] = c;
        kkt[(n, i)] = c;
    }
    let mut rhs = r.to_vec();
    rhs.push(c * total);
    let x = solve(kkt, &rhs)?;
    // Stationarity reads 2(Mφ − r) = λ·1, and the solve returned μ with c·μ = −λ/2.
    let lambda = -2.0 * c * x[n];
    Ok((x[..n].to_vec(), lambda))
}

fn check_dims(game: &CoalitionGame, k: &SymmetricKernel) -> Result<()> {
    if k.n() != game.n() {
        return Err(AfaError::DimensionMismatch {
            expected: game.n(),
            found: k.n(),
        });
    }
    Ok(())
}

fn diagnostics(m: &DMatrix<f64>, phi: &[f64], lambda: Option<f64>) -> SolverDiagnostics {
    let n = m.nrows();
    SolverDiagnostics {
        t: phi.iter().sum(),
        a: m[(0, 0)],
        b: if n > 1 { m[(0, 1)] } else { 0.0 },
        lambda,
    }
}

pub fn wls_oracle_constrained(
    game: &CoalitionGame,
    k: &SymmetricKernel,
) -> Result<(Attribution, SolverDiagnostics)> {
    check_dims(game, k)?;
    let (m, r) = normal_equations(game, |s| weight_of(k, s).unwrap_or(0.0));
    let (phi, lambda) = solve_kkt(&m, &r, grand_gap(game)).map_err(|e| match e {
        SolveFailure::Singular => AfaError::AllZeroInterior,
        SolveFailure::IllConditioned(c) => {
            AfaError::NumericalFailure(format!("KKT system condition estimate {c:.3e}"))
        }
    })?;
    let diag = diagnostics(&m, &phi, Some(lambda));
    let label = format!("oracle-constrained:{}", k.label());
    Ok((Attribution::new(game, phi, label), diag))
}

pub fn wls_oracle_unconstrained(
    game: &CoalitionGame,
    k: &SymmetricKernel,
) -> Result<(Attribution, SolverDiagnostics)> {
    check_dims(game, k)?;
    let (m, r) = normal_equations(game, |s| weight_of(k, s).unwrap_or(0.0));
    let phi = solve(m.clone(), &r).map_err(|e| match e {
        SolveFailure::Singular => AfaError::SingularSystem,
        SolveFailure::IllConditioned(c) => {
            AfaError::NumericalFailure(format!("normal equations condition estimate {c:.3e}"))
        }
    })?;
    let diag = diagnostics(&m, &phi, None);
    let label = format!("oracle-unconstrained:{}", k.label());
    Ok((Attribution::new(game, phi, label), diag))
}

/// Weighted squared residual of a surrogate `φ` against the game.
pub fn objective(game: &CoalitionGame, k: &SymmetricKernel, phi: &[f64]) -> f64 {
    let base = game.empty_value();
    game.coalitions()
        .skip(1)
        .map(|s| {
            let fit: f64 = s.members().map(|j| phi[j]).sum();
            let resid = fit - (game.value(s) - base);
            resid * resid * weight_of(k, s).unwrap_or(0.0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{additive_game, make_game};
    use crate::kernels::*;
    use crate::solver::max_abs_diff;

    fn g2() -> CoalitionGame {
        make_game(2, vec![0., 1., 3., 6.]).unwrap()
    }

    fn g3() -> CoalitionGame {
        make_game(3, vec![0., 0., 0., 1., 0., 1., 0., 1.]).unwrap()
    }

    #[test]
    fn constrained_examples() {
        let (att, diag) = wls_oracle_constrained(&g3(), &uniform_kernel(3).unwrap()).unwrap();
        assert!(max_abs_diff(&att.phi, &[2. / 3., 1. / 6., 1. / 6.]) < 1e-12, "{:?}", att.phi);
        assert!(diag.lambda.is_some());

        let gadd = additive_game(10.0, &[1., 2., 3.]).unwrap();
        let (att, diag) = wls_oracle_constrained(&gadd, &concave_kernel(3).unwrap()).unwrap();
        assert!(max_abs_diff(&att.phi, &[1., 2., 3.]) < 1e-12);
        // An exact fit leaves no pressure on the constraint.
        assert!(diag.lambda.unwrap().abs() < 1e-12);

        let (att, _) = wls_oracle_constrained(&g2(), &es_kernel(2).unwrap()).unwrap();
        assert!(max_abs_diff(&att.phi, &[2., 4.]) < 1e-12);
    }

    #[test]
    fn constrained_degenerate() {
        let k = SymmetricKernel::from_weights(3, &[0., 0., 1.], "grand-only").unwrap();
        assert_eq!(wls_oracle_constrained(&g3(), &k).unwrap_err(), AfaError::AllZeroInterior);
    }

    #[test]
    fn unconstrained_examples() {
        let (att, diag) = wls_oracle_unconstrained(&g2(), &uniform_kernel(2).unwrap()).unwrap();
        assert!(max_abs_diff(&att.phi, &[5. / 3., 11. / 3.]) < 1e-12);
        assert_eq!((diag.a, diag.b), (2.0, 1.0));

        let gadd = additive_game(10.0, &[1., 2., 3.]).unwrap();
        let k = simplified_exp_kernel(3).unwrap();
        let (att, _) = wls_oracle_unconstrained(&gadd, &k).unwrap();
        assert!(max_abs_diff(&att.phi, &[1., 2., 3.]) < 1e-12);
        assert!(objective(&gadd, &k, &att.phi) < 1e-20);

        let k = SymmetricKernel::from_weights(3, &[0., 0., 1.], "grand-only").unwrap();
        assert_eq!(wls_oracle_unconstrained(&g3(), &k).unwrap_err(), AfaError::SingularSystem);
    }

    #[test]
    fn oracle_minimizes_objective() {
        let k = linear_kernel(3).unwrap();
        let g = g3();
        let (att, _) = wls_oracle_constrained(&g, &k).unwrap();
        let best = objective(&g, &k, &att.phi);
        // Any efficient perturbation must not improve the objective.
        for d in [[1e-3, -1e-3, 0.0], [0.0, 2e-3, -2e-3], [-1e-3, -1e-3, 2e-3]] {
            let moved: Vec<f64> = att.phi.iter().zip(d).map(|(p, e)| p + e).collect();
            assert!(objective(&g, &k, &moved) > best);
        }
    }
}
