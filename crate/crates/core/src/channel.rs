//! Forward AWGN channel, passive noisy feedback link and seeded noise streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full experiment configuration of the one-switch scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Per-symbol power budget.
    #[serde(rename = "A")]
    pub a: f64,
    /// Feedback noise standard deviation.
    pub sigma: f64,
    /// Block length (even).
    pub n: usize,
    /// Phase-II to phase-I energy ratio.
    pub beta: f64,
    pub tau2: f64,
    pub tau3: f64,
    /// Number of messages.
    #[serde(rename = "M")]
    pub m: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams { a: 1.5, sigma: 0.1, n: 16, beta: 0.5, tau2: 0.15, tau3: 0.05, m: 4 }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.sigma, self.beta, self.tau2, self.tau3];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("channel parameters must be finite"));
        }
        if self.a <= 0.0 {
            return Err(Error::domain(format!("A must be positive, got {}", self.a)));
        }
        if self.sigma < 0.0 {
            return Err(Error::domain(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::domain(format!("block length must be even and at least 2, got {}", self.n)));
        }
        if self.beta <= 0.0 {
            return Err(Error::domain(format!("beta must be positive, got {}", self.beta)));
        }
        if self.tau2 < 0.0 || self.tau3 < 0.0 {
            return Err(Error::domain("thresholds must be non-negative"));
        }
        if self.m < 2 {
            return Err(Error::domain(format!("need at least 2 messages, got {}", self.m)));
        }
        let cap = self.n1().saturating_sub(1);
        if self.m > cap {
            return Err(Error::DimensionDeficit { needed: self.m, available: cap });
        }
        Ok(())
    }

    /// Switching moment, fixed at half the block.
    pub fn n1(&self) -> usize {
        self.n / 2
    }

    pub fn total_energy(&self) -> f64 {
        self.n as f64 * self.a
    }

    /// Phase-I codeword energy.
    pub fn a1(&self) -> f64 {
        self.total_energy() / (1.0 + self.beta)
    }

    /// Phase-II codeword energy.
    pub fn a2(&self) -> f64 {
        self.beta * self.a1()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Independent sub-streams of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substream {
    Forward = 0,
    Feedback = 1,
    Decoder = 2,
    Message = 3,
}

/// Deterministic standard Gaussian source keyed by (master seed, trial, substream).
///
/// A silent stream yields exact zeros, which models injected zero noise.
#[derive(Clone, Debug)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    trial_index: u64,
    substream: Substream,
    draws: u64,
    silent: bool,
}

impl NoiseStream {
    pub fn new(master_seed: u64, trial_index: u64, substream: Substream) -> Self {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&trial_index.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(substream as u64);
        NoiseStream { rng, master_seed, trial_index, substream, draws: 0, silent: false }
    }

    pub fn silent(master_seed: u64, trial_index: u64, substream: Substream) -> Self {
        NoiseStream { silent: true, ..Self::new(master_seed, trial_index, substream) }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trial_index(&self) -> u64 {
        self.trial_index
    }

    pub fn substream(&self) -> Substream {
        self.substream
    }

    pub fn is_silent(&self) -> bool {
        self.silent
    }

    /// Number of Gaussian values handed out so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        self.draws += 1;
        if self.silent {
            0.0
        } else {
            self.rng.sample(StandardNormal)
        }
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.gaussian();
        }
    }

    /// Uniform index in `0..m`; silent streams still draw from the generator.
    pub fn uniform_index(&mut self, m: usize) -> usize {
        self.rng.gen_range(0..m)
    }
}

/// The three noise sources consumed by one session.
#[derive(Clone, Debug)]
pub struct SessionNoise {
    pub forward: NoiseStream,
    pub feedback: NoiseStream,
    pub decoder: NoiseStream,
}

impl SessionNoise {
    pub fn seeded(master_seed: u64, trial_index: u64) -> Self {
        SessionNoise {
            forward: NoiseStream::new(master_seed, trial_index, Substream::Forward),
            feedback: NoiseStream::new(master_seed, trial_index, Substream::Feedback),
            decoder: NoiseStream::new(master_seed, trial_index, Substream::Decoder),
        }
    }

    /// Zero channel noise on both links; the decoder's sampler stays random.
    pub fn silent(master_seed: u64, trial_index: u64) -> Self {
        SessionNoise {
            forward: NoiseStream::silent(master_seed, trial_index, Substream::Forward),
            feedback: NoiseStream::silent(master_seed, trial_index, Substream::Feedback),
            decoder: NoiseStream::new(master_seed, trial_index, Substream::Decoder),
        }
    }
}

fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `y = x + xi` with unit-variance Gaussian noise.
pub fn forward(x: &[f64], noise: &mut NoiseStream) -> Result<Vec<f64>> {
    check_finite(x, "channel input")?;
    Ok(x.iter().map(|&xi| xi + noise.gaussian()).collect())
}

/// `z = y + sigma * eta`; with `sigma = 0` the output equals `y` exactly.
pub fn feedback(y: &[f64], sigma: f64, noise: &mut NoiseStream) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("feedback noise level must be non-negative, got {sigma}")));
    }
    check_finite(y, "feedback input")?;
    if sigma == 0.0 {
        return Ok(y.to_vec());
    }
    Ok(y.iter().map(|&yi| yi + sigma * noise.gaussian()).collect())
}
