//! Kernel-free implementations of the named attributions.

use crate::error::{AfaError, Result};
use crate::game::{grand_gap, Coalition, CoalitionGame};
use crate::linalg::SolveFailure;
use crate::oracle::{normal_equations, solve_kkt};
use crate::solver::Attribution;

/// Largest `n` accepted by [`shapley_permutation_oracle`].
pub const MAX_PERMUTATION_N: usize = 9;

/// Shapley value by the subset formula with per-size factorial weights.
pub fn shapley(game: &CoalitionGame) -> Attribution {
    let n = game.n();
    // |S|!(n−|S|−1)!/n! for |S| = 0..n−1
    let weights: Vec<f64> = (0..n)
        .map(|s| {
            let mut w = 1.0 / n as f64;
            for i in 1..=s {
                w *= i as f64 / (n - i) as f64;
            }
            w
        })
        .collect();
    let mut phi = vec![0.0; n];
    for s in game.coalitions() {
        let vs = game.value(s);
        for (j, slot) in phi.iter_mut().enumerate() {
            if !s.contains(j) {
                *slot += weights[s.size()] * (game.value(s.with(j)) - vs);
            }
        }
    }
    Attribution::new(game, phi, "shapley")
}

/// Shapley value by averaging marginal contributions over all `n!` orderings.
pub fn shapley_permutation_oracle(game: &CoalitionGame) -> Result<Attribution> {
    let n = game.n();
    if n > MAX_PERMUTATION_N {
        return Err(AfaError::NTooLargeForPermutations(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut totals = vec![0.0; n];
    let mut count = 0u64;
    let mut visit = |order: &[usize]| {
        let mut s = Coalition::EMPTY;
        let mut prev = game.value(s);
        for &j in order {
            s = s.with(j);
            let cur = game.value(s);
            totals[j] += cur - prev;
            prev = cur;
        }
        count += 1;
    };
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; n];
    visit(&order);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            visit(&order);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let phi = totals.into_iter().map(|t| t / count as f64).collect();
    Ok(Attribution::new(game, phi, "shapley-permutation"))
}

/// Equal surplus: standalone value plus an equal share of what remains.
pub fn es(game: &CoalitionGame) -> Attribution {
    let n = game.n();
    let singles: Vec<f64> = (0..n).map(|j| game.value(Coalition::EMPTY.with(j))).collect();
    let share = (grand_gap(game) - singles.iter().sum::<f64>()) / n as f64;
    let phi = singles.into_iter().map(|v| v + share).collect();
    Attribution::new(game, phi, "es")
}

/// The FESP expression `w(v({j}) − v(∅)) + (1 − w)(v(∅) − v(N∖{j}))`,
/// evaluated as written. It is not efficient in general.
pub fn fesp_raw(game: &CoalitionGame, w: f64) -> Result<Attribution> {
    if !(w > 0.0 && w < 1.0) {
        return Err(AfaError::WeightOutOfRange(w));
    }
    let base = game.empty_value();
    let full = game.full();
    let phi = (0..game.n())
        .map(|j| {
            let single = game.value(Coalition::EMPTY.with(j));
            let rest = game.value(full.without(j));
            w * (single - base) + (1.0 - w) * (base - rest)
        })
        .collect();
    Ok(Attribution::new(game, phi, format!("fesp-raw:{w}")))
}

/// Efficient `φ` minimizing the unweighted squared excess over all nonempty
/// coalitions.
pub fn ls_prenucleolus_oracle(game: &CoalitionGame) -> Result<Attribution> {
    let (m, r) = normal_equations(game, |_| 1.0);
    let (phi, _) = solve_kkt(&m, &r, grand_gap(game)).map_err(|e| match e {
        SolveFailure::Singular => AfaError::NumericalFailure("singular KKT system".into()),
        SolveFailure::IllConditioned(c) => {
            AfaError::NumericalFailure(format!("KKT system condition estimate {c:.3e}"))
        }
    })?;
    Ok(Attribution::new(game, phi, "lsprenucleolus"))
}

/// Attribution read off a linear model: `β_j (x_j − E[X_j])`. The efficiency
/// gap is taken against the linear game the model induces.
pub fn linear_model_attribution(
    beta0: f64,
    beta: &[f64],
    means: &[f64],
    instance: &[f64],
) -> Result<Attribution> {
    let n = beta.len();
    for len in [means.len(), instance.len()] {
        if len != n {
            return Err(AfaError::DimensionMismatch { expected: n, found: len });
        }
    }
    let phi: Vec<f64> = (0..n).map(|j| beta[j] * (instance[j] - means[j])).collect();
    let at = |x: &[f64]| beta0 + beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
    let gap = at(instance) - at(means);
    let efficiency_gap = phi.iter().sum::<f64>() - gap;
    Ok(Attribution {
        n,
        phi,
        method: "lm".into(),
        efficiency_gap,
    })
}
