//! Seeded invariant suites over random games and random models.
//!
//! Every check records a deviation already divided by the game's scale
//! `max(1, max_S |v(S)|)`, so it can be compared directly with a relative
//! tolerance constant.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AfaError, Result};
use crate::game::{additive_game, grand_gap, is_additive, make_game, marginal_to_grand, Coalition, CoalitionGame};
use crate::kernels::{builtin_kernels, fesp_kernel, scale_kernel, shap_kernel, shap_kernel_original, es_kernel, uniform_kernel, weight_of, SymmetricKernel};
use crate::model::{estimate_value_function, feature_means, predict, Dataset, InstanceRef, InteractionTerm, PredictionModel};
use crate::oracle::{wls_oracle_constrained, wls_oracle_unconstrained};
use crate::reference::{es, fesp_raw, linear_model_attribution, ls_prenucleolus_oracle, shapley, shapley_permutation_oracle};
use crate::solver::{max_abs_diff, solve_constrained, solve_unconstrained};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const MAX_VERIFY_N: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random games per feature count.
    pub trials: usize,
    pub n_max: usize,
    /// Relative tolerance constant for the closed-form comparisons.
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            trials: 100,
            n_max: 6,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(AfaError::Validation("trials must be at least 1".into()));
        }
        if !(2..=MAX_VERIFY_N).contains(&self.n_max) {
            return Err(AfaError::NOutOfRange { n: self.n_max, min: 2, max: MAX_VERIFY_N });
        }
        if !(self.tolerance > 0.0) {
            return Err(AfaError::Validation("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub id: &'static str,
    pub description: &'static str,
    pub tolerance: f64,
    pub checks: usize,
    pub failures: usize,
    pub worst: f64,
    /// First failing case, for diagnosis.
    pub first_failure: Option<String>,
}

impl InvariantResult {
    fn new(id: &'static str, description: &'static str, tolerance: f64) -> Self {
        InvariantResult {
            id,
            description,
            tolerance,
            checks: 0,
            failures: 0,
            worst: 0.0,
            first_failure: None,
        }
    }

    fn record(&mut self, deviation: f64, context: impl FnOnce() -> String) {
        self.checks += 1;
        if deviation.is_nan() || deviation > self.tolerance {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("{} (deviation {deviation:.3e})", context()));
            }
        }
        if deviation.is_nan() {
            self.worst = f64::NAN;
        } else if deviation > self.worst {
            self.worst = deviation;
        }
    }

    fn require(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { f64::INFINITY }, context);
    }

    fn fail(&mut self, err: AfaError, context: impl FnOnce() -> String) {
        self.record(f64::INFINITY, || format!("{}: {err}", context()));
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    /// No game in the corpus met the invariant's preconditions.
    pub fn skipped(&self) -> bool {
        self.checks == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub results: Vec<InvariantResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.failures == 0)
    }

    pub fn get(&self, id: &str) -> Option<&InvariantResult> {
        self.results.iter().find(|r| r.id == id)
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "verify seed={} trials={} n-max={} tolerance={:e}\n",
            c.seed, c.trials, c.n_max, c.tolerance
        );
        for r in &self.results {
            let _ = writeln!(
                out,
                "[{}] {:<4} {:<58} checks={:<6} failures={:<4} worst={:.3e} tol={:.0e}",
                if r.skipped() {
                    "SKIP"
                } else if r.passed() {
                    "PASS"
                } else {
                    "FAIL"
                },
                r.id,
                r.description,
                r.checks,
                r.failures,
                r.worst,
                r.tolerance
            );
            if let Some(f) = &r.first_failure {
                let _ = writeln!(out, "       first failure: {f}");
            }
        }
        let passed = self.results.iter().filter(|r| r.passed()).count();
        let skipped = self.results.iter().filter(|r| r.skipped()).count();
        let _ = write!(out, "summary: {passed}/{} invariants passed", self.results.len() - skipped);
        if skipped > 0 {
            let _ = write!(out, ", {skipped} skipped (no applicable games)");
        }
        out.push('\n');
        out
    }
}

/// Game with values i.i.d. uniform on `[-1, 1]`, including `v(∅)`.
pub fn random_game(rng: &mut impl Rng, n: usize) -> CoalitionGame {
    let values = (0..1usize << n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    make_game(n, values).expect("random table has the right length")
}

/// Makes features `i` and `j` (0-based) interchangeable by averaging each
/// value with the value of the coalition with `i` and `j` swapped.
pub fn symmetrize(game: &CoalitionGame, i: usize, j: usize) -> CoalitionGame {
    let swap = |s: Coalition| {
        let (hi, hj) = (s.contains(i), s.contains(j));
        let mut t = s.without(i).without(j);
        if hi {
            t = t.with(j);
        }
        if hj {
            t = t.with(i);
        }
        t
    };
    let values = game
        .coalitions()
        .map(|s| 0.5 * (game.value(s) + game.value(swap(s))))
        .collect();
    make_game(game.n(), values).expect("same shape")
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_background(rng: &mut impl Rng, n: usize) -> Dataset {
    let t = rng.gen_range(1..=64);
    let rows = (0..t)
        .map(|_| (0..n).map(|_| rng.gen_range(-3.0..=3.0)).collect())
        .collect();
    Dataset::new(rows, None).expect("random rows are rectangular")
}

fn random_instance(rng: &mut impl Rng, ds: &Dataset) -> InstanceRef {
    if rng.gen_bool(0.5) {
        InstanceRef::Row(rng.gen_range(0..ds.t()))
    } else {
        InstanceRef::Values((0..ds.n()).map(|_| rng.gen_range(-3.0..=3.0)).collect())
    }
}

pub fn random_linear_model(rng: &mut impl Rng, n: usize) -> PredictionModel {
    PredictionModel::Linear {
        beta0: rng.gen_range(-2.0..=2.0),
        beta: (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect(),
    }
}

pub fn random_additive_model(rng: &mut impl Rng, n: usize) -> PredictionModel {
    PredictionModel::Additive {
        terms: (0..n)
            .map(|_| {
                let degree = rng.gen_range(0..=3);
                (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect()
            })
            .collect(),
    }
}

/// Kernel with the grand-coalition weight replaced.
fn with_grand(k: &SymmetricKernel, w: f64) -> SymmetricKernel {
    k.with_grand_weight(w).expect("finite non-negative weight")
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut results = Vec::new();
    results.extend(solver_invariants(cfg));
    results.extend(reference_invariants(cfg));
    results.extend(model_invariants(cfg));
    Ok(VerifyReport { config: cfg.clone(), results })
}

fn games(cfg: &VerifyConfig, stream: u64) -> impl Iterator<Item = CoalitionGame> + '_ {
    let mut rng = rng_for(cfg.seed, stream);
    (2..=cfg.n_max).flat_map(move |n| {
        (0..cfg.trials)
            .map(|_| random_game(&mut rng, n))
            .collect::<Vec<_>>()
    })
}

pub fn solver_invariants(cfg: &VerifyConfig) -> Vec<InvariantResult> {
    let tol = cfg.tolerance;
    let mut s1 = InvariantResult::new("S1", "closed forms match KKT / normal-equation oracles", tol);
    let mut s2 = InvariantResult::new("S2", "constrained attributions are efficient", 1e-9);
    let mut s3 = InvariantResult::new("S3", "constrained result ignores the grand-coalition weight", tol);
    let mut s4 = InvariantResult::new("S4", "results invariant under kernel scaling", tol);
    let mut s5 = InvariantResult::new("S5", "interchangeable features get equal shares", tol);
    let mut s6 = InvariantResult::new("S6", "additive games: every kernel gives v(N)-v(N\\{j})", tol);
    let mut s7 = InvariantResult::new("S7", "pairwise differences match the coalition sums", tol);
    let mut s8 = InvariantResult::new("S8", "n<=3: shap = uniform; n=2: all kernels coincide", tol);
    let mut s9 = InvariantResult::new("S9", "heavy grand weight drives unconstrained to constrained", 1e-3);

    let mut rng = rng_for(cfg.seed, 100);
    for game in games(cfg, 1) {
        let n = game.n();
        let scale = game.scale();
        let kernels = builtin_kernels(n).expect("n within range");
        let mut first: Option<Vec<f64>> = None;
        for k in &kernels {
            let ctx = || format!("n={n} kernel={}", k.label());
            let con = match solve_constrained(&game, k) {
                Ok(a) => a,
                Err(e) => {
                    s1.fail(e, ctx);
                    continue;
                }
            };
            match wls_oracle_constrained(&game, k) {
                Ok((o, _)) => s1.record(con.max_abs_diff(&o) / scale, ctx),
                Err(e) => s1.fail(e, ctx),
            }
            match (solve_unconstrained(&game, k), wls_oracle_unconstrained(&game, k)) {
                (Ok((u, _)), Ok((o, _))) => s1.record(u.max_abs_diff(&o) / scale, ctx),
                (Err(e), _) | (_, Err(e)) => s1.fail(e, ctx),
            }

            s2.record(con.efficiency_gap.abs() / scale.max(grand_gap(&game).abs()), ctx);

            for w in [0.0, 1.0, 1e6] {
                match solve_constrained(&game, &with_grand(k, w)) {
                    Ok(a) => s3.record(a.max_abs_diff(&con) / scale, ctx),
                    Err(e) => s3.fail(e, ctx),
                }
            }

            let unc = solve_unconstrained(&game, k).map(|p| p.0);
            for c in [1e-6, 3.0, 1e6] {
                let scaled = scale_kernel(k, c).expect("positive scale");
                match solve_constrained(&game, &scaled) {
                    Ok(a) => s4.record(a.max_abs_diff(&con) / scale, ctx),
                    Err(e) => s4.fail(e, ctx),
                }
                match (unc.as_ref(), solve_unconstrained(&game, &scaled).as_ref()) {
                    (Ok(u), Ok((a, _))) => s4.record(a.max_abs_diff(u) / scale, ctx),
                    (Err(e), _) | (_, Err(e)) => s4.fail(e.clone(), ctx),
                }
            }

            // φ_i − φ_j against Σ_{S⊆N∖{i,j}} [π(S∪i)v(S∪i) − π(S∪j)v(S∪j)],
            // normalized by the weight of coalitions holding i but not j.
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut diff = 0.0;
                    let mut mass = 0.0;
                    for s in game.coalitions() {
                        if s.contains(i) || s.contains(j) {
                            continue;
                        }
                        let (si, sj) = (s.with(i), s.with(j));
                        let (wi, wj) = (weight_of(k, si).unwrap(), weight_of(k, sj).unwrap());
                        diff += wi * game.value(si) - wj * game.value(sj);
                        mass += wi;
                    }
                    let dev = (con.phi[i] - con.phi[j] - diff / mass).abs();
                    s7.record(dev / scale, || format!("{} i={} j={}", ctx(), i + 1, j + 1));
                }
            }

            if n == 2 {
                match &first {
                    None => first = Some(con.phi.clone()),
                    Some(f) => s8.record(max_abs_diff(f, &con.phi) / scale, ctx),
                }
            }

            if k.weights()[1..n].iter().any(|&w| w > 0.0) {
                let mut prev = f64::INFINITY;
                for e in [2, 4, 6] {
                    let heavy = with_grand(k, 10f64.powi(e));
                    let d = match solve_unconstrained(&game, &heavy) {
                        Ok((u, _)) => u.max_abs_diff(&con) / scale.max(grand_gap(&game).abs()),
                        Err(_) => f64::INFINITY,
                    };
                    let monotone = d <= prev || d < 1e-13;
                    s9.require(monotone, || format!("{} not decreasing at 10^{e}", ctx()));
                    prev = d;
                    if e == 6 {
                        s9.record(d, ctx);
                    }
                }
            }
        }

        if n <= 3 {
            let a = solve_constrained(&game, &shap_kernel(n).unwrap());
            let b = solve_constrained(&game, &uniform_kernel(n).unwrap());
            match (a, b) {
                (Ok(a), Ok(b)) => s8.record(a.max_abs_diff(&b) / scale, || format!("n={n}")),
                (Err(e), _) | (_, Err(e)) => s8.fail(e, || format!("n={n}")),
            }
        }

        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n - 1));
        let j = if j >= i { j + 1 } else { j };
        let sym = symmetrize(&game, i, j);
        for k in &kernels {
            match solve_constrained(&sym, k) {
                Ok(a) => s5.record((a.phi[i] - a.phi[j]).abs() / sym.scale(), || {
                    format!("n={n} kernel={} i={} j={}", k.label(), i + 1, j + 1)
                }),
                Err(e) => s5.fail(e, || k.label()),
            }
        }

        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let add = additive_game(rng.gen_range(-1.0..=1.0), &a).unwrap();
        let target: Vec<f64> = (1..=n).map(|j| marginal_to_grand(&add, j).unwrap()).collect();
        for k in &kernels {
            match solve_constrained(&add, k) {
                Ok(att) => s6.record(max_abs_diff(&att.phi, &target) / add.scale(), || {
                    format!("n={n} kernel={}", k.label())
                }),
                Err(e) => s6.fail(e, || k.label()),
            }
        }
    }
    vec![s1, s2, s3, s4, s5, s6, s7, s8, s9]
}

pub fn reference_invariants(cfg: &VerifyConfig) -> Vec<InvariantResult> {
    let tol = cfg.tolerance;
    let mut r1 = InvariantResult::new("R1", "shap kernels reproduce the Shapley value", tol);
    let mut r2 = InvariantResult::new("R2", "Shapley subset formula = permutation average", 1e-10);
    let mut r3 = InvariantResult::new("R3", "es kernel reproduces equal surplus", tol);
    let mut r4 = InvariantResult::new("R4", "fesp kernel = printed FESP + efficiency shift", tol);
    let mut r5 = InvariantResult::new("R5", "uniform kernel reproduces the LS prenucleolus", tol);
    let mut r6 = InvariantResult::new("R6", "n<=3: Shapley = LS prenucleolus", tol);

    for game in games(cfg, 2) {
        let n = game.n();
        let scale = game.scale();
        let ctx = || format!("n={n}");
        let sh = shapley(&game);
        for k in [shap_kernel(n).unwrap(), shap_kernel_original(n).unwrap()] {
            match solve_constrained(&game, &k) {
                Ok(a) => r1.record(a.max_abs_diff(&sh) / scale, || format!("n={n} {}", k.label())),
                Err(e) => r1.fail(e, ctx),
            }
        }
        if n <= 7 {
            match shapley_permutation_oracle(&game) {
                Ok(p) => r2.record(p.max_abs_diff(&sh) / scale, ctx),
                Err(e) => r2.fail(e, ctx),
            }
        }
        match solve_constrained(&game, &es_kernel(n).unwrap()) {
            Ok(a) => r3.record(a.max_abs_diff(&es(&game)) / scale, ctx),
            Err(e) => r3.fail(e, ctx),
        }
        if (3..=7).contains(&n) {
            for w in [0.2, 0.5, 0.8] {
                let wctx = || format!("n={n} w={w}");
                let raw = fesp_raw(&game, w).expect("w inside (0,1)");
                match solve_constrained(&game, &fesp_kernel(n, w).unwrap()) {
                    Ok(kern) => {
                        let shift: Vec<f64> =
                            kern.phi.iter().zip(&raw.phi).map(|(a, b)| a - b).collect();
                        let hi = shift.iter().cloned().fold(f64::MIN, f64::max);
                        let lo = shift.iter().cloned().fold(f64::MAX, f64::min);
                        r4.record((hi - lo) / scale, wctx);
                        let expected = (grand_gap(&game) - raw.total()) / n as f64;
                        r4.record((shift[0] - expected).abs() / scale, wctx);
                    }
                    Err(e) => r4.fail(e, wctx),
                }
            }
        }
        let pre = ls_prenucleolus_oracle(&game);
        match (pre.as_ref(), solve_constrained(&game, &uniform_kernel(n).unwrap()).as_ref()) {
            (Ok(p), Ok(u)) => r5.record(u.max_abs_diff(p) / scale, ctx),
            (Err(e), _) | (_, Err(e)) => r5.fail(e.clone(), ctx),
        }
        if n <= 3 {
            match &pre {
                Ok(p) => r6.record(sh.max_abs_diff(p) / scale, ctx),
                Err(e) => r6.fail(e.clone(), ctx),
            }
        }
    }
    vec![r1, r2, r3, r4, r5, r6]
}

pub fn model_invariants(cfg: &VerifyConfig) -> Vec<InvariantResult> {
    let mut m1 = InvariantResult::new("M1", "v(N) = f(x) and v(empty) = mean background prediction", 0.0);
    let mut m2 = InvariantResult::new("M2", "additive models yield additive games", 1e-9);
    let mut m3 = InvariantResult::new("M3", "linear models: v(S)-v(empty) = sum beta_j (x_j - mean_j)", 1e-9);
    let mut m4 = InvariantResult::new("M4", "linear models: every kernel = beta_j (x_j - mean_j)", 1e-9);
    let mut m5 = InvariantResult::new("M5", "interaction models yield non-additive games", 0.0);

    let mut rng = rng_for(cfg.seed, 3);
    for n in 2..=cfg.n_max.min(MAX_VERIFY_N) {
        for _ in 0..cfg.trials {
            let ctx = || format!("n={n}");
            let linear = rng.gen_bool(0.5);
            let model = if linear {
                random_linear_model(&mut rng, n)
            } else {
                random_additive_model(&mut rng, n)
            };
            let bg = random_background(&mut rng, n);
            let inst = random_instance(&mut rng, &bg);
            let x = inst.resolve(&bg).expect("instance drawn from the dataset");
            let game = match estimate_value_function(&model, &bg, &inst) {
                Ok(g) => g,
                Err(e) => {
                    m1.fail(e, ctx);
                    continue;
                }
            };
            let scale = game.scale();

            let fx = predict(&model, &x).unwrap();
            let mut sum = 0.0;
            for row in bg.rows() {
                sum += predict(&model, row).unwrap();
            }
            let mean = sum / bg.t() as f64;
            m1.require(game.grand_value().to_bits() == fx.to_bits(), || format!("{} v(N)", ctx()));
            m1.require(game.empty_value().to_bits() == mean.to_bits(), || format!("{} v(empty)", ctx()));

            let cert = is_additive(&game, 1e-9 * scale);
            m2.record(cert.max_residual / scale, ctx);

            if let PredictionModel::Linear { beta0, beta } = &model {
                let means = feature_means(&bg);
                let contrib: Vec<f64> = (0..n).map(|j| beta[j] * (x[j] - means[j])).collect();
                for s in game.coalitions() {
                    let expected: f64 = s.members().map(|j| contrib[j]).sum();
                    let dev = (game.value(s) - game.empty_value() - expected).abs();
                    m3.record(dev / scale, || format!("{} mask={:#b}", ctx(), s.mask()));
                }
                let lm = linear_model_attribution(*beta0, beta, &means, &x).unwrap();
                for k in builtin_kernels(n).unwrap() {
                    match solve_constrained(&game, &k) {
                        Ok(a) => m4.record(a.max_abs_diff(&lm) / scale, || {
                            format!("{} kernel={}", ctx(), k.label())
                        }),
                        Err(e) => m4.fail(e, ctx),
                    }
                }
            }
        }
    }

    let model = PredictionModel::Interaction {
        beta0: 0.0,
        beta: vec![0.0, 0.0],
        gamma: vec![InteractionTerm { j: 1, k: 2, gamma: 1.0 }],
    };
    let bg = Dataset::new(vec![vec![0.0, 0.0], vec![2.0, 2.0]], None).unwrap();
    match estimate_value_function(&model, &bg, &InstanceRef::Values(vec![1.0, 3.0])) {
        Ok(g) => m5.require(!is_additive(&g, 1e-9 * g.scale()).additive, || "x1*x2 game".into()),
        Err(e) => m5.fail(e, || "x1*x2 game".into()),
    }
    vec![m1, m2, m3, m4, m5]
}
