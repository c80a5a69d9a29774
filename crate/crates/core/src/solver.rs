//! Closed-form minimizers of the kernel-weighted local least-squares problem
//!
//! ```text
//!     min_φ  Σ_S π(|S|) · (Σ_{i∈S} φ_i − (v(S) − v(∅)))²
//! ```
//!
//! with and without the efficiency constraint `Σ φ_i = v(N) − v(∅)`.
//!
//! For a symmetric kernel the first-order conditions reduce to
//! `(A − B)·φ_j + B·Σφ = r_j`, where `A` is the total weight of coalitions
//! containing one fixed feature and `B` the total weight of coalitions
//! containing a fixed pair. Pairwise differences `φ_i − φ_j` are therefore
//! `(r_i − r_j) / (A − B)`, and the level is fixed either by the constraint
//! or by the summed conditions. The printed closed forms assume a kernel with
//! `A − B = 1`; every built-in kernel except the original Kernel SHAP
//! weights satisfies that, and dividing by `A − B` makes the result
//! invariant under kernel rescaling.

use serde::{Deserialize, Serialize};

use crate::error::{AfaError, Result};
use crate::game::{grand_gap, CoalitionGame};
use crate::kernels::{binomial, SymmetricKernel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub n: usize,
    pub phi: Vec<f64>,
    pub method: String,
    /// `Σ φ_j − (v(N) − v(∅))`.
    pub efficiency_gap: f64,
}

impl Attribution {
    pub fn new(game: &CoalitionGame, phi: Vec<f64>, method: impl Into<String>) -> Self {
        let efficiency_gap = phi.iter().sum::<f64>() - grand_gap(game);
        Attribution {
            n: phi.len(),
            phi,
            method: method.into(),
            efficiency_gap,
        }
    }

    pub fn total(&self) -> f64 {
        self.phi.iter().sum()
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Attribution) -> f64 {
        max_abs_diff(&self.phi, &other.phi)
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "attribution lengths differ");
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    /// Level `Σ φ_j` chosen by the unconstrained problem.
    pub t: f64,
    /// `Σ_{S∋j} π(S)`.
    pub a: f64,
    /// `Σ_{S∋i,j} π(S)` for `i ≠ j`.
    pub b: f64,
    /// Multiplier of the efficiency constraint, when an oracle produced it.
    pub lambda: Option<f64>,
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

/// `A − B = Σ_{s=1}^{n−1} C(n−2, s−1)·w[s]`, summed directly so that a
/// large grand-coalition weight does not cancel catastrophically.
pub fn interior_mass(k: &SymmetricKernel) -> f64 {
    let n = k.n();
    if n < 2 {
        return 0.0;
    }
    (1..n).map(|s| binomial(n - 2, s - 1) * k.weight(s)).sum()
}

/// `A = Σ_{s=1}^{n} C(n−1, s−1)·w[s]`.
pub fn single_mass(k: &SymmetricKernel) -> f64 {
    let n = k.n();
    (1..=n).map(|s| binomial(n - 1, s - 1) * k.weight(s)).sum()
}

/// `B = Σ_{s=2}^{n} C(n−2, s−2)·w[s]`.
pub fn pair_mass(k: &SymmetricKernel) -> f64 {
    let n = k.n();
    (2..=n).map(|s| binomial(n - 2, s - 2) * k.weight(s)).sum()
}

/// `p_j = Σ_{S∋j, S≠N} π(S)·v(S)`, accumulated in ascending mask order.
fn kernel_sums(game: &CoalitionGame, k: &SymmetricKernel) -> Vec<f64> {
    let n = game.n();
    let full = game.full();
    let mut p = vec![0.0; n];
    for s in game.coalitions().skip(1) {
        if s == full {
            break;
        }
        let w = k.weight(s.size());
        if w == 0.0 {
            continue;
        }
        let wv = w * game.value(s);
        for j in s.members() {
            p[j] += wv;
        }
    }
    p
}

fn level_shift(p: &[f64], mass: f64, total: f64) -> Vec<f64> {
    let n = p.len() as f64;
    let scaled: Vec<f64> = p.iter().map(|x| x / mass).collect();
    let shift = (total - scaled.iter().sum::<f64>()) / n;
    scaled.into_iter().map(|x| x + shift).collect()
}

/// Efficient attribution generated by a symmetric kernel.
pub fn solve_constrained(game: &CoalitionGame, k: &SymmetricKernel) -> Result<Attribution> {
    check_dims(game, k)?;
    let label = format!("constrained:{}", k.label());
    let gap = grand_gap(game);
    if game.n() == 1 {
        return Ok(Attribution::new(game, vec![gap], label));
    }
    let mass = interior_mass(k);
    if !(mass > 0.0) {
        return Err(AfaError::AllZeroInterior);
    }
    let phi = level_shift(&kernel_sums(game, k), mass, gap);
    Ok(Attribution::new(game, phi, label))
}

/// Minimizer without the efficiency constraint. Unique iff `A − B > 0`.
pub fn solve_unconstrained(
    game: &CoalitionGame,
    k: &SymmetricKernel,
) -> Result<(Attribution, SolverDiagnostics)> {
    check_dims(game, k)?;
    let n = game.n();
    if n < 2 {
        return Err(AfaError::NOutOfRange { n, min: 2, max: crate::game::MAX_FEATURES });
    }
    let mass = interior_mass(k);
    if !(mass > 0.0) {
        return Err(AfaError::SingularSystem);
    }
    let a = single_mass(k);
    let b = pair_mass(k);
    let base = game.empty_value();
    let numerator: f64 = game
        .coalitions()
        .skip(1)
        .map(|s| s.size() as f64 * k.weight(s.size()) * (game.value(s) - base))
        .sum();
    let t = numerator / (a + (n as f64 - 1.0) * b);
    let phi = level_shift(&kernel_sums(game, k), mass, t);
    let label = format!("unconstrained:{}", k.label());
    Ok((
        Attribution::new(game, phi, label),
        SolverDiagnostics {
            t,
            a,
            b,
            lambda: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{additive_game, make_game};
    use crate::kernels::*;

    fn g2() -> CoalitionGame {
        make_game(2, vec![0., 1., 3., 6.]).unwrap()
    }

    fn g3() -> CoalitionGame {
        make_game(3, vec![0., 0., 0., 1., 0., 1., 0., 1.]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        max_abs_diff(a, b) <= tol
    }

    #[test]
    fn constrained_examples() {
        let shap = solve_constrained(&g3(), &shap_kernel(3).unwrap()).unwrap();
        assert!(close(&shap.phi, &[2. / 3., 1. / 6., 1. / 6.], 1e-12), "{:?}", shap.phi);
        assert!(shap.efficiency_gap.abs() < 1e-12);

        let es = solve_constrained(&g3(), &es_kernel(3).unwrap()).unwrap();
        assert!(close(&es.phi, &[1. / 3.; 3], 1e-12));

        let gadd = additive_game(10.0, &[1., 2., 3.]).unwrap();
        let lin = solve_constrained(&gadd, &linear_kernel(3).unwrap()).unwrap();
        assert!(close(&lin.phi, &[1., 2., 3.], 1e-12));

        let fesp = solve_constrained(&g3(), &fesp_kernel(3, 0.5).unwrap()).unwrap();
        assert!(close(&fesp.phi, &[2. / 3., 1. / 6., 1. / 6.], 1e-12));
    }

    #[test]
    fn constrained_n1_uses_gap_only() {
        let g = make_game(1, vec![2.0, 5.0]).unwrap();
        let k = SymmetricKernel::from_weights(1, &[0.0], "none").unwrap();
        assert_eq!(solve_constrained(&g, &k).unwrap().phi, vec![3.0]);
    }

    #[test]
    fn constrained_errors() {
        let k = SymmetricKernel::from_weights(3, &[0., 0., 1.], "grand-only").unwrap();
        assert_eq!(solve_constrained(&g3(), &k).unwrap_err(), AfaError::AllZeroInterior);
        assert!(matches!(
            solve_constrained(&g3(), &shap_kernel(4).unwrap()),
            Err(AfaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unconstrained_g2() {
        let k = uniform_kernel(2).unwrap();
        let (att, diag) = solve_unconstrained(&g2(), &k).unwrap();
        assert!(close(&att.phi, &[5. / 3., 11. / 3.], 1e-12), "{:?}", att.phi);
        assert!((att.total() - 16. / 3.).abs() < 1e-12);
        assert!((att.efficiency_gap - (16. / 3. - 6.)).abs() < 1e-12);
        assert_eq!((diag.a, diag.b), (2.0, 1.0));
        assert!((diag.t - 16. / 3.).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_singular() {
        let k = SymmetricKernel::from_weights(3, &[0., 0., 1.], "grand-only").unwrap();
        assert_eq!(solve_unconstrained(&g3(), &k).unwrap_err(), AfaError::SingularSystem);
    }

    #[test]
    fn large_grand_weight_approaches_constraint() {
        let u = uniform_kernel(3).unwrap();
        let heavy = u.with_grand_weight(1e6).unwrap();
        let (att, _) = solve_unconstrained(&g3(), &heavy).unwrap();
        let con = solve_constrained(&g3(), &u).unwrap();
        assert!(att.max_abs_diff(&con) <= 1e-4);
    }

    #[test]
    fn diagnostics_masses() {
        for n in 2..8 {
            for k in builtin_kernels(n).unwrap() {
                let (a, b) = (single_mass(&k), pair_mass(&k));
                assert!(a >= b && b >= 0.0);
                assert!((a - b - interior_mass(&k)).abs() <= 1e-12 * a.max(1.0));
            }
        }
    }

    #[test]
    fn builtin_kernels_except_original_shap_have_unit_interior_mass() {
        for n in 2..=12 {
            for k in builtin_kernels(n).unwrap() {
                let m = interior_mass(&k);
                if k.name() == "shap-orig" {
                    assert!((m - (n as f64 - 1.0) / n as f64).abs() < 1e-12);
                } else {
                    assert!((m - 1.0).abs() < 1e-12, "{} n={n}: {m}", k.label());
                }
            }
        }
    }
}
