//! Receiver-side decoders.
//!
//! The receiver sees `y'` and `y''` but not the transmitter's noisy copy `z'`,
//! so the phase-II code is unknown. Its likelihood is the mixture
//! `E_{z'|y'} exp((y'', x''_j(z')) - A2/2)` with `z' = y' + sigma * eta'`.
//! Because the phase-I code is orthogonal, the selection depends on `z'` only
//! through its first `M` coordinates, which are independent
//! `N(y'_j, sigma^2)` variables; every decoder here works with those.

mod exact;
mod mixture;
mod naive;

pub use exact::{EventProbability, ExactDecoder};
pub use mixture::MixtureDecoder;
pub use naive::NaiveDecoder;

use serde::{Deserialize, Serialize};

use crate::channel::NoiseStream;
use crate::error::{Error, Result};
use crate::protocol::{argmax, GroupSelection, OneSwitchScheme};

/// Numerical knobs of the posterior decoders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureConfig {
    /// `z'` samples per decode.
    pub num_samples: usize,
    /// Gauss-Legendre points per panel in the exact oracle.
    pub oracle_quadrature_points: usize,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig { num_samples: 4096, oracle_quadrature_points: 12 }
    }
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::domain("decoder needs at least one sample"));
        }
        if self.oracle_quadrature_points == 0 {
            return Err(Error::domain("oracle needs at least one quadrature point"));
        }
        Ok(())
    }
}

/// A decoding rule for the one-switch scheme.
pub trait Decoder: Send + Sync {
    /// Per-message log-likelihoods `log p(y'|j) + log p(y''|y', j)` up to a
    /// common additive constant.
    fn log_likelihoods(
        &self,
        scheme: &OneSwitchScheme,
        y1: &[f64],
        y2: &[f64],
        rng: &mut NoiseStream,
    ) -> Result<Vec<f64>>;

    /// Most likely message, smallest index on ties.
    fn decode(&self, scheme: &OneSwitchScheme, y1: &[f64], y2: &[f64], rng: &mut NoiseStream) -> Result<usize> {
        Ok(argmax(&self.log_likelihoods(scheme, y1, y2, rng)?))
    }
}

pub(crate) fn check_observations(scheme: &OneSwitchScheme, y1: &[f64], y2: &[f64]) -> Result<()> {
    let n1 = scheme.params().n1();
    for y in [y1, y2] {
        if y.len() != n1 {
            return Err(Error::DimensionMismatch { expected: n1, got: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("channel output"));
        }
    }
    Ok(())
}

/// Phase-I term `(x'_j, y') - A1/2` for every message.
pub(crate) fn phase1_terms(scheme: &OneSwitchScheme, y1: &[f64]) -> Vec<f64> {
    let a1 = scheme.params().a1();
    let s = scheme.sqrt_a1();
    y1[..scheme.m()].iter().map(|&v| s * v - 0.5 * a1).collect()
}

/// Phase-II terms `(y'', x''_j(z')) - A2/2` for a known `z' = y'`.
pub(crate) fn point_mass_terms(scheme: &OneSwitchScheme, y1: &[f64], y2: &[f64]) -> Vec<f64> {
    let sel = scheme.select(y1);
    let mut c = vec![0.0; scheme.m()];
    scheme.layout().correlations(&sel, y2, &mut c);
    let half = 0.5 * scheme.params().a2();
    c.iter_mut().for_each(|v| *v -= half);
    c
}

pub(crate) fn add_terms(mut a: Vec<f64>, b: &[f64]) -> Vec<f64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Decision from the phase-I observation alone.
pub fn decode_phase1_only(scheme: &OneSwitchScheme, y1: &[f64]) -> usize {
    argmax(&y1[..scheme.m()])
}

/// Posterior probabilities of the pair-distance events for a pair of messages:
/// `p0` both not in one group, `p2..p4` both in a group of that size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupWeights {
    pub p0: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl GroupWeights {
    /// A pair is never in a group of size one.
    pub fn p1(&self) -> f64 {
        0.0
    }

    pub fn total(&self) -> f64 {
        self.p0 + self.p2 + self.p3 + self.p4
    }

    pub fn get(&self, k: usize) -> f64 {
        match k {
            0 => self.p0,
            2 => self.p2,
            3 => self.p3,
            4 => self.p4,
            _ => 0.0,
        }
    }
}

/// Log-likelihoods together with the pair-event weights for `(anchor, other)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorReport {
    pub log_likelihoods: Vec<f64>,
    pub anchor: usize,
    pub other: usize,
    pub weights: GroupWeights,
}

/// Pair-distance class of `(a, b)` under `sel`: the group size if both are
/// selected, else 0.
pub fn pair_class(sel: &GroupSelection, a: usize, b: usize) -> usize {
    if sel.contains(a) && sel.contains(b) {
        sel.k()
    } else {
        0
    }
}

/// Estimates the pair-event weights by sampling `z' | y'` and classifying the
/// transmitter's selection for each sample. Exact when `sigma = 0`.
pub fn group_weights(
    scheme: &OneSwitchScheme,
    y1: &[f64],
    anchor: usize,
    other: usize,
    num_samples: usize,
    rng: &mut NoiseStream,
) -> Result<GroupWeights> {
    let m = scheme.m();
    if anchor >= m || other >= m || anchor == other {
        return Err(Error::domain(format!("invalid message pair ({anchor}, {other}) for M = {m}")));
    }
    if num_samples == 0 {
        return Err(Error::domain("decoder needs at least one sample"));
    }
    let sigma = scheme.params().sigma;
    let mut counts = [0u64; 5];
    let samples = if sigma == 0.0 { 1 } else { num_samples };
    let mut u = vec![0.0; m];
    for _ in 0..samples {
        for (uj, &yj) in u.iter_mut().zip(y1) {
            *uj = if sigma == 0.0 { yj } else { yj + sigma * rng.gaussian() };
        }
        counts[pair_class(&scheme.select_projections(&u), anchor, other)] += 1;
    }
    let s = samples as f64;
    Ok(GroupWeights {
        p0: counts[0] as f64 / s,
        p2: counts[2] as f64 / s,
        p3: counts[3] as f64 / s,
        p4: counts[4] as f64 / s,
    })
}

/// Log-sum-exp of `(log weight, value)` pairs.
pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}
