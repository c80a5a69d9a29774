//! Characteristic-function games over feature coalitions.
//!
//! A coalition is a bitmask: bit `j - 1` is set when feature `j` (1-based)
//! belongs to it. A game over `n` features stores one value per mask, so the
//! table has exactly `2^n` entries and entry `m` is `v(S)` for the coalition
//! encoded by `m`. The empty-coalition value is stored like any other; no
//! `v(∅) = 0` normalization is applied.

use serde::{Deserialize, Serialize};

use crate::error::{AfaError, Result};

/// Largest supported feature count. The value table has `2^n` entries.
pub const MAX_FEATURES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_mask(mask: u32) -> Self {
        Coalition(mask)
    }

    pub fn full(n: usize) -> Self {
        Coalition(full_mask(n))
    }

    /// Builds a coalition from 1-based feature indices.
    pub fn from_features(features: &[usize]) -> Self {
        Coalition(features.iter().fold(0u32, |m, &j| m | 1 << (j - 1)))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Membership test for a 0-based feature position.
    pub fn contains(self, feature: usize) -> bool {
        self.0 >> feature & 1 == 1
    }

    pub fn with(self, feature: usize) -> Self {
        Coalition(self.0 | 1 << feature)
    }

    pub fn without(self, feature: usize) -> Self {
        Coalition(self.0 & !(1 << feature))
    }

    /// 0-based positions of the members, ascending.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(j)
        })
    }
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameFile", into = "GameFile")]
pub struct CoalitionGame {
    n: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    n: usize,
    values: Vec<f64>,
}

impl TryFrom<GameFile> for CoalitionGame {
    type Error = AfaError;

    fn try_from(f: GameFile) -> Result<Self> {
        make_game(f.n, f.values)
    }
}

impl From<CoalitionGame> for GameFile {
    fn from(g: CoalitionGame) -> Self {
        GameFile {
            n: g.n,
            values: g.values,
        }
    }
}

/// Validates and wraps a value table.
pub fn make_game(n: usize, values: Vec<f64>) -> Result<CoalitionGame> {
    if !(1..=MAX_FEATURES).contains(&n) {
        return Err(AfaError::NOutOfRange {
            n,
            min: 1,
            max: MAX_FEATURES,
        });
    }
    if values.len() != 1 << n {
        return Err(AfaError::DimensionMismatch {
            expected: 1 << n,
            found: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(AfaError::NonFinite { index });
    }
    Ok(CoalitionGame { n, values })
}

impl CoalitionGame {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        make_game(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, s: Coalition) -> f64 {
        self.values[s.mask() as usize]
    }

    pub fn empty_value(&self) -> f64 {
        self.values[0]
    }

    pub fn grand_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn full(&self) -> Coalition {
        Coalition::full(self.n)
    }

    /// Every coalition in ascending mask order, `∅` first and `N` last.
    pub fn coalitions(&self) -> impl Iterator<Item = Coalition> {
        (0..1u32 << self.n).map(Coalition)
    }

    /// Largest absolute value in the table, floored at 1. Tolerances across
    /// the crate are expressed relative to this.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("game serialization is infallible")
    }
}

/// `v(N) - v(∅)`: the total an efficient attribution distributes.
pub fn grand_gap(game: &CoalitionGame) -> f64 {
    game.grand_value() - game.empty_value()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityCertificate {
    pub additive: bool,
    /// `a_j = v({j}) - v(∅)`, present only when the game is additive.
    pub a: Option<Vec<f64>>,
    pub max_residual: f64,
}

/// Default tolerance for [`is_additive`]: `1e-9 · max(1, max_S |v(S)|)`.
pub fn default_additivity_tol(game: &CoalitionGame) -> f64 {
    1e-9 * game.scale()
}

pub fn is_additive(game: &CoalitionGame, tol: f64) -> AdditivityCertificate {
    let base = game.empty_value();
    let a: Vec<f64> = (0..game.n)
        .map(|j| game.value(Coalition::EMPTY.with(j)) - base)
        .collect();
    let max_residual = game.coalitions().fold(0.0_f64, |worst, s| {
        let predicted: f64 = s.members().map(|j| a[j]).sum();
        worst.max((game.value(s) - base - predicted).abs())
    });
    let additive = max_residual <= tol;
    AdditivityCertificate {
        additive,
        a: additive.then_some(a),
        max_residual,
    }
}

/// `v(N) - v(N \ {j})` for a 1-based feature index.
pub fn marginal_to_grand(game: &CoalitionGame, j: usize) -> Result<f64> {
    if j == 0 || j > game.n {
        return Err(AfaError::IndexOutOfRange { index: j, n: game.n });
    }
    let full = game.full();
    Ok(game.value(full) - game.value(full.without(j - 1)))
}

/// Builds the additive game `v(S) = base + Σ_{j∈S} a_j`.
pub fn additive_game(base: f64, a: &[f64]) -> Result<CoalitionGame> {
    let n = a.len();
    let values = (0..1u32 << n.min(31))
        .map(|m| base + Coalition(m).members().map(|j| a[j]).sum::<f64>())
        .collect();
    make_game(n, values)
}
