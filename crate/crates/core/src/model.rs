//! Tabular prediction models, background data, and the value function
//! `v(S) = E[f(x_S, X_{N∖S})]` estimated as an empirical marginal mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AfaError, Result};
use crate::game::{make_game, Coalition, CoalitionGame, MAX_FEATURES};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    rows: Vec<Vec<f64>>,
    names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, names: Option<Vec<String>>) -> Result<Self> {
        let n = match (rows.first(), &names) {
            (Some(r), _) => r.len(),
            (None, Some(names)) => names.len(),
            (None, None) => 0,
        };
        if rows.is_empty() {
            return Err(AfaError::EmptyBackground);
        }
        if n == 0 {
            return Err(AfaError::Validation("dataset has no columns".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(AfaError::Validation(format!(
                    "row {i} has {} columns, expected {n}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(AfaError::Validation(format!("non-finite value at row {i}, column {j}")));
            }
        }
        if let Some(names) = &names {
            if names.len() != n {
                return Err(AfaError::DimensionMismatch { expected: n, found: names.len() });
            }
            for (i, a) in names.iter().enumerate() {
                if names[..i].contains(a) {
                    return Err(AfaError::Validation(format!("duplicate feature name '{a}'")));
                }
            }
        }
        Ok(Dataset { n, rows, names })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows.get(i).map(Vec::as_slice)
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }
}

/// Column means `E[X_j]` of the dataset.
pub fn feature_means(ds: &Dataset) -> Vec<f64> {
    let mut sums = vec![0.0; ds.n];
    for row in &ds.rows {
        for (s, x) in sums.iter_mut().zip(row) {
            *s += x;
        }
    }
    sums.into_iter().map(|s| s / ds.t() as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawModel {
    Linear {
        beta0: f64,
        beta: Vec<f64>,
    },
    Additive {
        terms: Vec<Vec<f64>>,
    },
    Interaction {
        beta0: f64,
        beta: Vec<f64>,
        gamma: Vec<(usize, usize, f64)>,
    },
}

/// Pairwise term `γ · x_j · x_k` with 1-based `j < k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionTerm {
    pub j: usize,
    pub k: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub enum PredictionModel {
    /// `β0 + Σ β_j x_j`
    Linear { beta0: f64, beta: Vec<f64> },
    /// `Σ_j f_j(x_j)` with `f_j(x) = Σ_k c_{j,k} x^k`
    Additive { terms: Vec<Vec<f64>> },
    /// Linear part plus `Σ γ_{jk} x_j x_k`
    Interaction {
        beta0: f64,
        beta: Vec<f64>,
        gamma: Vec<InteractionTerm>,
    },
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|x| !x.is_finite()) {
        return Err(AfaError::Validation(format!("non-finite {what}")));
    }
    Ok(())
}

impl TryFrom<RawModel> for PredictionModel {
    type Error = AfaError;

    fn try_from(raw: RawModel) -> Result<Self> {
        let model = match raw {
            RawModel::Linear { beta0, beta } => PredictionModel::Linear { beta0, beta },
            RawModel::Additive { terms } => PredictionModel::Additive { terms },
            RawModel::Interaction { beta0, beta, gamma } => PredictionModel::Interaction {
                beta0,
                beta,
                gamma: gamma
                    .into_iter()
                    .map(|(j, k, gamma)| InteractionTerm { j, k, gamma })
                    .collect(),
            },
        };
        model.validate()?;
        Ok(model)
    }
}

impl From<PredictionModel> for RawModel {
    fn from(m: PredictionModel) -> Self {
        match m {
            PredictionModel::Linear { beta0, beta } => RawModel::Linear { beta0, beta },
            PredictionModel::Additive { terms } => RawModel::Additive { terms },
            PredictionModel::Interaction { beta0, beta, gamma } => RawModel::Interaction {
                beta0,
                beta,
                gamma: gamma.into_iter().map(|t| (t.j, t.k, t.gamma)).collect(),
            },
        }
    }
}

impl PredictionModel {
    pub fn n(&self) -> usize {
        match self {
            PredictionModel::Linear { beta, .. } | PredictionModel::Interaction { beta, .. } => {
                beta.len()
            }
            PredictionModel::Additive { terms } => terms.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || n > MAX_FEATURES {
            return Err(AfaError::NOutOfRange { n, min: 1, max: MAX_FEATURES });
        }
        match self {
            PredictionModel::Linear { beta0, beta } => {
                check_finite(&[*beta0], "intercept")?;
                check_finite(beta, "coefficient")
            }
            PredictionModel::Additive { terms } => {
                terms.iter().try_for_each(|t| check_finite(t, "polynomial coefficient"))
            }
            PredictionModel::Interaction { beta0, beta, gamma } => {
                check_finite(&[*beta0], "intercept")?;
                check_finite(beta, "coefficient")?;
                for (i, t) in gamma.iter().enumerate() {
                    if !(1 <= t.j && t.j < t.k && t.k <= n) {
                        return Err(AfaError::Validation(format!(
                            "interaction ({}, {}) must satisfy 1 <= j < k <= {n}",
                            t.j, t.k
                        )));
                    }
                    if !t.gamma.is_finite() {
                        return Err(AfaError::Validation("non-finite interaction".into()));
                    }
                    if gamma[..i].iter().any(|u| (u.j, u.k) == (t.j, t.k)) {
                        return Err(AfaError::Validation(format!(
                            "duplicate interaction ({}, {})",
                            t.j, t.k
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let linear = |beta0: f64, beta: &[f64]| {
            beta0 + beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
        };
        match self {
            PredictionModel::Linear { beta0, beta } => linear(*beta0, beta),
            PredictionModel::Additive { terms } => terms
                .iter()
                .zip(x)
                .map(|(c, &v)| c.iter().rev().fold(0.0, |acc, ck| acc * v + ck))
                .sum(),
            PredictionModel::Interaction { beta0, beta, gamma } => {
                linear(*beta0, beta)
                    + gamma
                        .iter()
                        .map(|t| t.gamma * x[t.j - 1] * x[t.k - 1])
                        .sum::<f64>()
            }
        }
    }
}

pub fn predict(model: &PredictionModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.n() {
        return Err(AfaError::DimensionMismatch {
            expected: model.n(),
            found: row.len(),
        });
    }
    Ok(model.eval(row))
}

/// The instance being explained: a dataset row or an explicit vector.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceRef {
    Row(usize),
    Values(Vec<f64>),
}

impl InstanceRef {
    pub fn resolve(&self, ds: &Dataset) -> Result<Vec<f64>> {
        match self {
            InstanceRef::Row(i) => ds.row(*i).map(<[f64]>::to_vec).ok_or_else(|| {
                AfaError::Validation(format!("instance row {i} out of range (t = {})", ds.t()))
            }),
            InstanceRef::Values(x) => {
                if x.len() != ds.n() {
                    return Err(AfaError::DimensionMismatch { expected: ds.n(), found: x.len() });
                }
                check_finite(x, "instance value")?;
                Ok(x.clone())
            }
        }
    }
}

/// Builds the game `v(S) = (1/t) Σ_r f(x_S, r_{N∖S})` over every coalition.
/// `v(N)` is `f(x)` itself. Cost is `O(2^n · t · cost(f))`; coalitions are
/// evaluated in parallel but each uses the same row order, so the table is
/// independent of scheduling.
pub fn estimate_value_function(
    model: &PredictionModel,
    background: &Dataset,
    instance: &InstanceRef,
) -> Result<CoalitionGame> {
    let n = model.n();
    if background.n() != n {
        return Err(AfaError::DimensionMismatch { expected: n, found: background.n() });
    }
    if background.t() == 0 {
        return Err(AfaError::EmptyBackground);
    }
    let x = instance.resolve(background)?;
    let full = Coalition::full(n);
    let t = background.t() as f64;
    let values: Vec<f64> = (0..1u32 << n)
        .into_par_iter()
        .map(|mask| {
            let s = Coalition::from_mask(mask);
            if s == full {
                return model.eval(&x);
            }
            let mut composite = vec![0.0; n];
            let mut sum = 0.0;
            for row in background.rows() {
                for j in 0..n {
                    composite[j] = if s.contains(j) { x[j] } else { row[j] };
                }
                sum += model.eval(&composite);
            }
            sum / t
        })
        .collect();
    make_game(n, values)
}
