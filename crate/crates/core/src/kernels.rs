//! Symmetric coalition kernels.
//!
//! A symmetric kernel weighs a coalition by its size only, so it is stored as
//! a table `w[0..=n]`. `w[0]` is always zero: the empty coalition contributes
//! nothing to the local least-squares objective. The built-in constructors
//! store the printed constants verbatim; since scaling a kernel does not move
//! the minimizer, no normalization is imposed on them.

use std::fmt;
use std::str::FromStr;

use crate::error::{AfaError, Result};
use crate::game::{full_mask, Coalition, MAX_FEATURES};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricKernel {
    n: usize,
    w: Vec<f64>,
    name: String,
    params: Vec<f64>,
    scale: f64,
}

/// `C(n, k)` as a float. Exact for every `n` the crate supports.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_FEATURES {
        return Err(AfaError::NOutOfRange {
            n,
            min,
            max: MAX_FEATURES,
        });
    }
    Ok(())
}

impl SymmetricKernel {
    /// Wraps a size-indexed weight table `w[1..=n]` (passed without the
    /// leading `w[0]`), checking only that every weight is finite and
    /// non-negative. Kernels built this way may have no interior mass; the
    /// solvers report that as a degenerate or singular problem.
    pub fn from_weights(n: usize, weights: &[f64], name: impl Into<String>) -> Result<Self> {
        check_n(n, 1)?;
        if weights.len() != n {
            return Err(AfaError::DimensionMismatch {
                expected: n,
                found: weights.len(),
            });
        }
        for (i, &weight) in weights.iter().enumerate() {
            if !weight.is_finite() || weight < 0.0 {
                return Err(AfaError::NegativeWeight { size: i + 1, weight });
            }
        }
        let mut w = Vec::with_capacity(n + 1);
        w.push(0.0);
        w.extend_from_slice(weights);
        Ok(SymmetricKernel {
            n,
            w,
            name: name.into(),
            params: Vec::new(),
            scale: 1.0,
        })
    }

    fn built(n: usize, name: &str, params: Vec<f64>, f: impl Fn(usize) -> f64) -> Self {
        let mut w = vec![0.0; n + 1];
        for (s, slot) in w.iter_mut().enumerate().skip(1) {
            *slot = f(s);
        }
        SymmetricKernel {
            n,
            w,
            name: name.to_string(),
            params,
            scale: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Full table `w[0..=n]`.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Weight for coalitions of size `s`.
    pub fn weight(&self, s: usize) -> f64 {
        self.w[s]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Cumulative factor applied through [`scale_kernel`].
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Label including parameters and any scale annotation, e.g. `fesp:0.3`.
    pub fn label(&self) -> String {
        let mut out = self.name.clone();
        if !self.params.is_empty() {
            let p: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
            out.push(':');
            out.push_str(&p.join(","));
        }
        if self.scale != 1.0 {
            out.push_str(&format!("*{}", self.scale));
        }
        out
    }

    pub fn has_interior_mass(&self) -> bool {
        self.w[1..self.n].iter().any(|&w| w > 0.0)
    }

    /// Copy with the grand-coalition weight `w[n]` replaced.
    pub fn with_grand_weight(&self, value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(AfaError::NegativeWeight {
                size: self.n,
                weight: value,
            });
        }
        let mut k = self.clone();
        k.w[k.n] = value;
        Ok(k)
    }

    /// Display-only view dividing every weight by `Σ_{s=1}^{n-1} C(n,s)·w[s]`.
    /// Returns the raw weights when that mass is zero.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let mass: f64 = (1..self.n)
            .map(|s| binomial(self.n, s) * self.w[s])
            .sum();
        if mass > 0.0 {
            self.w.iter().map(|w| w / mass).collect()
        } else {
            self.w.clone()
        }
    }
}

/// Kernel under which the constrained solution is the Shapley value.
pub fn shap_kernel(n: usize) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    Ok(SymmetricKernel::built(n, "shap", vec![], |s| {
        if s == n {
            0.0
        } else {
            n as f64 / (binomial(n, s) * s as f64 * (n - s) as f64)
        }
    }))
}

/// The classic Kernel SHAP weights, `(n-1)/n` times [`shap_kernel`].
pub fn shap_kernel_original(n: usize) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    Ok(SymmetricKernel::built(n, "shap-orig", vec![], |s| {
        if s == n {
            0.0
        } else {
            (n - 1) as f64 / (binomial(n, s) * s as f64 * (n - s) as f64)
        }
    }))
}

/// Weight only on singletons; generates the equal-surplus attribution.
pub fn es_kernel(n: usize) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    Ok(SymmetricKernel::built(n, "es", vec![], |s| {
        if s == 1 {
            1.0
        } else {
            0.0
        }
    }))
}

/// Two-band kernel: `w_tau` on singletons, `1 - w_tau` on sizes `n-1` and `n`.
pub fn fesp_kernel(n: usize, w_tau: f64) -> Result<SymmetricKernel> {
    if !(w_tau > 0.0 && w_tau < 1.0) {
        return Err(AfaError::WeightOutOfRange(w_tau));
    }
    if n == 2 {
        return Err(AfaError::DegenerateBand(n));
    }
    check_n(n, 3)?;
    Ok(SymmetricKernel::built(n, "fesp", vec![w_tau], |s| {
        if s == 1 {
            w_tau
        } else if s + 1 >= n {
            1.0 - w_tau
        } else {
            0.0
        }
    }))
}

/// Flat kernel `1 / 2^(n-2)`; generates the least-squares prenucleolus.
pub fn uniform_kernel(n: usize) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    let w = 0.5_f64.powi(n as i32 - 2);
    Ok(SymmetricKernel::built(n, "uniform", vec![], |_| w))
}

/// Triangular kernel `|S| / (n · 2^(n-3))`.
pub fn linear_kernel(n: usize) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    let denom = n as f64 * 2.0_f64.powi(n as i32 - 3);
    Ok(SymmetricKernel::built(n, "linear", vec![], |s| s as f64 / denom))
}

/// LIME exponential kernel over the binary distance `sqrt(n - |S|)`, rescaled
/// to `r^(|S|-1) / (r+1)^(n-2)` with `r = e^(1/σ²)`.
pub fn exp_kernel(n: usize, sigma: f64) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(AfaError::WidthOutOfRange(sigma));
    }
    let r = (1.0 / (sigma * sigma)).exp();
    let top = r.powi(n as i32 - 1);
    let denom = (r + 1.0).powi(n as i32 - 2);
    if !r.is_finite() || !top.is_finite() || !denom.is_finite() {
        return Err(AfaError::Overflow { n, sigma });
    }
    Ok(SymmetricKernel::built(n, "exp", vec![sigma], |s| {
        r.powi(s as i32 - 1) / denom
    }))
}

/// The width at which the exponential kernel doubles per added feature.
pub fn doubling_sigma() -> f64 {
    (1.0 / std::f64::consts::LN_2).sqrt()
}

/// [`exp_kernel`] at `σ = sqrt(1/ln 2)`, written with exact powers of two and three.
pub fn simplified_exp_kernel(n: usize) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    let denom = 3.0_f64.powi(n as i32 - 2);
    Ok(SymmetricKernel::built(n, "exp", vec![], |s| {
        2.0_f64.powi(s as i32 - 1) / denom
    }))
}

/// Concave kernel `|S|(2n-|S|) / ((3n²-n+2) · 2^(n-4))`.
pub fn concave_kernel(n: usize) -> Result<SymmetricKernel> {
    check_n(n, 2)?;
    let nf = n as f64;
    let denom = (3.0 * nf * nf - nf + 2.0) * 2.0_f64.powi(n as i32 - 4);
    Ok(SymmetricKernel::built(n, "concave", vec![], |s| {
        let sf = s as f64;
        sf * (2.0 * nf - sf) / denom
    }))
}

pub fn scale_kernel(k: &SymmetricKernel, c: f64) -> Result<SymmetricKernel> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(AfaError::NonPositiveScale(c));
    }
    let mut out = k.clone();
    for w in out.w.iter_mut() {
        *w *= c;
    }
    out.scale *= c;
    Ok(out)
}

pub fn weight_of(k: &SymmetricKernel, s: Coalition) -> Result<f64> {
    if s.mask() & !full_mask(k.n) != 0 {
        return Err(AfaError::MaskOutOfRange { mask: s.mask(), n: k.n });
    }
    Ok(k.w[s.size()])
}

/// User-supplied weights `w[1..=n]`; at least one size below `n` must carry
/// positive weight.
pub fn custom_kernel(n: usize, weights: &[f64]) -> Result<SymmetricKernel> {
    let k = SymmetricKernel::from_weights(n, weights, "custom")?;
    if !k.has_interior_mass() {
        return Err(AfaError::AllZeroInterior);
    }
    Ok(SymmetricKernel {
        params: weights.to_vec(),
        ..k
    })
}

/// Parsed kernel selector, resolved against a feature count with [`KernelSpec::build`].
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Shap,
    ShapOriginal,
    Es,
    Fesp(f64),
    Uniform,
    Linear,
    Exp(Option<f64>),
    Concave,
    Custom(Vec<f64>),
}

impl KernelSpec {
    pub fn build(&self, n: usize) -> Result<SymmetricKernel> {
        match self {
            KernelSpec::Shap => shap_kernel(n),
            KernelSpec::ShapOriginal => shap_kernel_original(n),
            KernelSpec::Es => es_kernel(n),
            KernelSpec::Fesp(w) => fesp_kernel(n, *w),
            KernelSpec::Uniform => uniform_kernel(n),
            KernelSpec::Linear => linear_kernel(n),
            KernelSpec::Exp(None) => simplified_exp_kernel(n),
            KernelSpec::Exp(Some(sigma)) => exp_kernel(n, *sigma),
            KernelSpec::Concave => concave_kernel(n),
            KernelSpec::Custom(w) => custom_kernel(n, w),
        }
    }
}

fn parse_real(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| AfaError::Validation(format!("invalid {what} '{s}'")))
}

impl FromStr for KernelSpec {
    type Err = AfaError;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let spec = match (head, arg) {
            ("shap", None) => KernelSpec::Shap,
            ("shap-orig", None) => KernelSpec::ShapOriginal,
            ("es", None) => KernelSpec::Es,
            ("fesp", Some(a)) => KernelSpec::Fesp(parse_real(a, "fesp weight")?),
            ("uniform", None) => KernelSpec::Uniform,
            ("linear", None) => KernelSpec::Linear,
            ("exp", None) => KernelSpec::Exp(None),
            ("exp", Some(a)) => KernelSpec::Exp(Some(parse_real(a, "exp width")?)),
            ("concave", None) => KernelSpec::Concave,
            ("custom", Some(a)) => KernelSpec::Custom(
                a.split(',')
                    .map(|x| parse_real(x, "custom weight"))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(AfaError::Validation(format!("unknown kernel spec '{s}'"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Shap => write!(f, "shap"),
            KernelSpec::ShapOriginal => write!(f, "shap-orig"),
            KernelSpec::Es => write!(f, "es"),
            KernelSpec::Fesp(w) => write!(f, "fesp:{w}"),
            KernelSpec::Uniform => write!(f, "uniform"),
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Exp(None) => write!(f, "exp"),
            KernelSpec::Exp(Some(s)) => write!(f, "exp:{s}"),
            KernelSpec::Concave => write!(f, "concave"),
            KernelSpec::Custom(w) => {
                let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, "custom:{}", parts.join(","))
            }
        }
    }
}

/// Every built-in kernel valid for `n`, in a fixed order. The FESP kernel is
/// included at `w_tau = 0.3` when `n >= 3`; the exponential kernel appears both
/// in simplified form and at `σ = 1.5`.
pub fn builtin_kernels(n: usize) -> Result<Vec<SymmetricKernel>> {
    let mut out = vec![
        shap_kernel(n)?,
        shap_kernel_original(n)?,
        es_kernel(n)?,
        uniform_kernel(n)?,
        linear_kernel(n)?,
        simplified_exp_kernel(n)?,
        exp_kernel(n, 1.5)?,
        concave_kernel(n)?,
    ];
    if n >= 3 {
        out.insert(3, fesp_kernel(n, 0.3)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(actual: &[f64], expected: &[f64], tol: f64) {
        assert_eq!(actual.len(), expected.len(), "{actual:?} vs {expected:?}");
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).abs() <= tol, "{actual:?} vs {expected:?}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(20, 10), 184756.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn shap_tables() {
        let k = shap_kernel(4).unwrap();
        assert_close(&k.weights()[1..4], &[1. / 3., 1. / 6., 1. / 3.], 1e-15);
        assert_eq!(k.weight(4), 0.0);
        assert_eq!(k.weight(0), 0.0);
        let k3 = shap_kernel(3).unwrap();
        assert_close(&k3.weights()[1..3], &[0.5, 0.5], 1e-15);
        assert_eq!(shap_kernel(1).unwrap_err(), AfaError::NOutOfRange { n: 1, min: 2, max: 20 });

        let o = shap_kernel_original(4).unwrap();
        assert_close(&o.weights()[1..4], &[0.25, 0.125, 0.25], 1e-15);
        assert_close(&shap_kernel_original(2).unwrap().weights()[1..2], &[0.5], 1e-15);
    }

    #[test]
    fn shap_is_rescaled_original() {
        for n in 2..=12 {
            let scaled = scale_kernel(&shap_kernel_original(n).unwrap(), n as f64 / (n - 1) as f64)
                .unwrap();
            let direct = shap_kernel(n).unwrap();
            for s in 0..=n {
                let (a, b) = (scaled.weight(s), direct.weight(s));
                assert!((a - b).abs() <= 2.0 * f64::EPSILON * b.abs(), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn es_and_fesp_tables() {
        assert_eq!(&es_kernel(3).unwrap().weights()[1..], &[1., 0., 0.]);
        assert_eq!(&es_kernel(2).unwrap().weights()[1..], &[1., 0.]);
        let es3 = es_kernel(3).unwrap();
        assert_eq!(weight_of(&es3, Coalition::from_features(&[1, 2])), Ok(0.0));

        assert_close(&fesp_kernel(5, 0.3).unwrap().weights()[1..], &[0.3, 0., 0., 0.7, 0.7], 1e-15);
        assert_eq!(&fesp_kernel(3, 0.5).unwrap().weights()[1..], &[0.5, 0.5, 0.5]);
        assert_eq!(fesp_kernel(4, 1.5).unwrap_err(), AfaError::WeightOutOfRange(1.5));
        assert_eq!(fesp_kernel(4, 0.0).unwrap_err(), AfaError::WeightOutOfRange(0.0));
        assert_eq!(fesp_kernel(2, 0.5).unwrap_err(), AfaError::DegenerateBand(2));
    }

    #[test]
    fn uniform_linear_tables() {
        assert_eq!(&uniform_kernel(4).unwrap().weights()[1..], &[0.25; 4]);
        assert_eq!(&uniform_kernel(2).unwrap().weights()[1..], &[1.0; 2]);
        let u3 = uniform_kernel(3).unwrap();
        assert_eq!(weight_of(&u3, Coalition::from_mask(0b101)), Ok(0.5));
        assert_eq!(weight_of(&u3, Coalition::EMPTY), Ok(0.0));
        assert!(matches!(
            weight_of(&u3, Coalition::from_mask(0b1000)),
            Err(AfaError::MaskOutOfRange { .. })
        ));

        assert_close(&linear_kernel(4).unwrap().weights()[1..], &[0.125, 0.25, 0.375, 0.5], 1e-15);
        assert_close(&linear_kernel(3).unwrap().weights()[1..], &[1. / 3., 2. / 3., 1.], 1e-15);
        for n in 2..10 {
            let k = linear_kernel(n).unwrap();
            assert!(k.weights()[1..].windows(2).all(|p| p[1] > p[0]));
        }
    }

    #[test]
    fn exp_tables() {
        let k = exp_kernel(4, doubling_sigma()).unwrap();
        assert_close(&k.weights()[1..], &[1. / 9., 2. / 9., 4. / 9., 8. / 9.], 1e-14);
        for p in k.weights()[1..].windows(2) {
            assert!((p[1] / p[0] - 2.0).abs() < 1e-12);
        }
        let s = simplified_exp_kernel(4).unwrap();
        assert_close(&s.weights()[1..], &[1. / 9., 2. / 9., 4. / 9., 8. / 9.], 1e-15);
        assert_eq!(&simplified_exp_kernel(2).unwrap().weights()[1..], &[1.0, 2.0]);
        assert!((simplified_exp_kernel(5).unwrap().weight(1) - 1. / 27.).abs() < 1e-16);

        // Wide kernel flattens towards the uniform shape.
        let wide = exp_kernel(4, 1e6).unwrap();
        let uni = uniform_kernel(4).unwrap();
        let ratio = uni.weight(1) / wide.weight(1);
        for s in 1..=4 {
            assert!((wide.weight(s) * ratio - uni.weight(s)).abs() <= 1e-9);
        }

        assert_eq!(exp_kernel(4, 0.0).unwrap_err(), AfaError::WidthOutOfRange(0.0));
        assert_eq!(exp_kernel(4, -1.0).unwrap_err(), AfaError::WidthOutOfRange(-1.0));
        assert!(matches!(exp_kernel(4, 0.01), Err(AfaError::Overflow { .. })));
        assert!(matches!(exp_kernel(20, 0.1), Err(AfaError::Overflow { .. })));
    }

    #[test]
    fn simplified_matches_exp_at_doubling_width() {
        for n in 2..=20 {
            let a = simplified_exp_kernel(n).unwrap();
            let b = exp_kernel(n, doubling_sigma()).unwrap();
            for s in 1..=n {
                let rel = (a.weight(s) - b.weight(s)).abs() / a.weight(s);
                assert!(rel <= 1e-12, "n={n} s={s} rel={rel}");
            }
        }
    }

    #[test]
    fn concave_table() {
        let k = concave_kernel(4).unwrap();
        assert_close(&k.weights()[1..], &[7. / 46., 12. / 46., 15. / 46., 16. / 46.], 1e-15);
        for n in 3..12 {
            let w = concave_kernel(n).unwrap().weights().to_vec();
            for s in 2..n {
                assert!(w[s + 1] - 2.0 * w[s] + w[s - 1] < 0.0);
            }
            assert!(w[1..].windows(2).all(|p| p[1] > p[0]));
        }
    }

    #[test]
    fn scaling() {
        let k = scale_kernel(&uniform_kernel(4).unwrap(), 4.0).unwrap();
        assert_eq!(&k.weights()[1..], &[1.0; 4]);
        assert_eq!(k.label(), "uniform*4");
        let s = scale_kernel(&shap_kernel_original(4).unwrap(), 4.0 / 3.0).unwrap();
        assert_close(s.weights(), shap_kernel(4).unwrap().weights(), 1e-15);
        assert_eq!(
            scale_kernel(&k, 0.0).unwrap_err(),
            AfaError::NonPositiveScale(0.0)
        );
        assert!(scale_kernel(&k, -2.0).is_err());
    }

    #[test]
    fn custom_kernels() {
        let k = custom_kernel(3, &[0.5, 0.5, 7.0]).unwrap();
        assert_eq!(k.name(), "custom");
        assert_eq!(&k.weights()[1..], &[0.5, 0.5, 7.0]);
        assert_eq!(custom_kernel(3, &[0., 0., 1.]).unwrap_err(), AfaError::AllZeroInterior);
        assert!(matches!(
            custom_kernel(3, &[-1., 1., 1.]),
            Err(AfaError::NegativeWeight { size: 1, .. })
        ));
        assert!(matches!(
            custom_kernel(3, &[1., 1.]),
            Err(AfaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn positivity_pattern() {
        for n in 2..=10 {
            for k in builtin_kernels(n).unwrap() {
                for s in 1..n {
                    let expect_zero = match k.name() {
                        "es" => s >= 2,
                        "fesp" => s >= 2 && s + 1 < n,
                        _ => false,
                    };
                    assert_eq!(k.weight(s) == 0.0, expect_zero, "{} n={n} s={s}", k.label());
                    assert!(k.weight(s) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn small_n_shap_is_proportional_to_uniform() {
        for n in [2, 3] {
            let a = shap_kernel(n).unwrap();
            let b = uniform_kernel(n).unwrap();
            let c = a.weight(1) / b.weight(1);
            for s in 1..n {
                assert!((a.weight(s) - c * b.weight(s)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spec_strings() {
        let cases = [
            ("shap", KernelSpec::Shap),
            ("shap-orig", KernelSpec::ShapOriginal),
            ("es", KernelSpec::Es),
            ("fesp:0.3", KernelSpec::Fesp(0.3)),
            ("uniform", KernelSpec::Uniform),
            ("linear", KernelSpec::Linear),
            ("exp:1.5", KernelSpec::Exp(Some(1.5))),
            ("exp", KernelSpec::Exp(None)),
            ("concave", KernelSpec::Concave),
            ("custom:0.5,0.5,7", KernelSpec::Custom(vec![0.5, 0.5, 7.0])),
        ];
        for (text, spec) in cases {
            let parsed: KernelSpec = text.parse().unwrap();
            assert_eq!(parsed, spec);
            assert_eq!(parsed.to_string().parse::<KernelSpec>().unwrap(), spec);
        }
        assert!("gauss".parse::<KernelSpec>().is_err());
        assert!("fesp".parse::<KernelSpec>().is_err());
        assert!("fesp:x".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn normalized_view() {
        let k = uniform_kernel(3).unwrap();
        let w = k.normalized_weights();
        let mass: f64 = (1..3).map(|s| binomial(3, s) * w[s]).sum();
        assert!((mass - 1.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn weight_depends_only_on_size(n in 2usize..=10, a in any::<u32>(), b in any::<u32>()) {
                let full = full_mask(n);
                let (ma, mb) = (a & full, b & full);
                for k in builtin_kernels(n).unwrap() {
                    let wa = weight_of(&k, Coalition::from_mask(ma)).unwrap();
                    let wb = weight_of(&k, Coalition::from_mask(mb)).unwrap();
                    if ma.count_ones() == mb.count_ones() {
                        prop_assert_eq!(wa.to_bits(), wb.to_bits());
                    }
                    prop_assert_eq!(wa, k.weight(Coalition::from_mask(ma).size()));
                }
            }
        }
    }
}
