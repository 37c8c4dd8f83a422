use crate::channel::NoiseStream;
use crate::error::Result;
use crate::protocol::{GroupSelection, OneSwitchScheme};

use super::{add_terms, check_observations, log_sum_exp, phase1_terms, point_mass_terms, Decoder, MixtureConfig};

/// Monte Carlo posterior decoder: averages the phase-II likelihood over
/// samples of `z' | y'`, sharing the samples across all hypotheses.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MixtureDecoder {
    config: MixtureConfig,
}

impl MixtureDecoder {
    pub fn new(config: MixtureConfig) -> Self {
        MixtureDecoder { config }
    }

    pub fn config(&self) -> &MixtureConfig {
        &self.config
    }

    /// `log mean_s exp((y'', x''_j(z'_s)) - A2/2)` for every message `j`.
    ///
    /// Samples that induce the same selection contribute identical terms, so
    /// they are counted per distinct selection before the log-sum-exp.
    pub fn mixture_terms(
        &self,
        scheme: &OneSwitchScheme,
        y1: &[f64],
        y2: &[f64],
        rng: &mut NoiseStream,
    ) -> Result<Vec<f64>> {
        self.config.validate()?;
        check_observations(scheme, y1, y2)?;
        let sigma = scheme.params().sigma;
        if sigma == 0.0 {
            return Ok(point_mass_terms(scheme, y1, y2));
        }
        let m = scheme.m();
        let mut u = vec![0.0; m];
        let mut groups: Vec<(GroupSelection, u64)> = Vec::new();
        for _ in 0..self.config.num_samples {
            for (uj, &yj) in u.iter_mut().zip(y1) {
                *uj = yj + sigma * rng.gaussian();
            }
            let sel = scheme.select_projections(&u);
            match groups.iter_mut().find(|(g, _)| *g == sel) {
                Some((_, c)) => *c += 1,
                None => groups.push((sel, 1)),
            }
        }

        let mut corr = vec![0.0; m * groups.len()];
        for (g, (sel, _)) in groups.iter().enumerate() {
            scheme.layout().correlations(sel, y2, &mut corr[g * m..(g + 1) * m]);
        }
        let offset = (self.config.num_samples as f64).ln() + 0.5 * scheme.params().a2();
        Ok((0..m)
            .map(|j| {
                let terms = groups.iter().enumerate().map(|(g, (_, c))| (*c as f64).ln() + corr[g * m + j]);
                log_sum_exp(terms) - offset
            })
            .collect())
    }
}

impl Decoder for MixtureDecoder {
    fn log_likelihoods(
        &self,
        scheme: &OneSwitchScheme,
        y1: &[f64],
        y2: &[f64],
        rng: &mut NoiseStream,
    ) -> Result<Vec<f64>> {
        let mix = self.mixture_terms(scheme, y1, y2, rng)?;
        Ok(add_terms(phase1_terms(scheme, y1), &mix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelParams, Substream};
    use crate::codebook::dot;

    fn scheme(sigma: f64, m: usize) -> OneSwitchScheme {
        OneSwitchScheme::new(ChannelParams { sigma, m, n: 16, a: 1.5, ..Default::default() }).unwrap()
    }

    #[test]
    fn noiseless_feedback_is_point_mass() {
        let s = scheme(0.0, 4);
        let y1 = [1.0, 0.2, 0.9, -0.3, 0.5, 0.0, 0.1, 0.2];
        let y2 = [0.4, -1.0, 0.3, 0.2, 0.0, 0.7, -0.2, 0.1];
        let mut rng = NoiseStream::new(0, 0, Substream::Decoder);
        let dec = MixtureDecoder::default();
        let terms = dec.mixture_terms(&s, &y1, &y2, &mut rng).unwrap();
        let code = s.layout().build(&s.select(&y1)).unwrap();
        for j in 0..4 {
            let expect = dot(&y2, code.codeword(j)) - 0.5 * s.params().a2();
            assert_eq!(terms[j], expect);
        }
        // likelihood ratio equals the phase-II correlation difference
        let ll = dec.log_likelihoods(&s, &y1, &y2, &mut rng).unwrap();
        for i in 1..4 {
            let x1 = s.phase1().codeword(i);
            let x0 = s.phase1().codeword(0);
            let diff = dot(&y1, x1) - dot(&y1, x0) + dot(&y2, code.codeword(i)) - dot(&y2, code.codeword(0));
            assert!((ll[i] - ll[0] - diff).abs() < 1e-12);
        }
    }

    #[test]
    fn two_message_noiseless_matches_minimum_distance() {
        let s = scheme(0.0, 2);
        let dec = MixtureDecoder::default();
        let mut rng = NoiseStream::new(0, 0, Substream::Decoder);
        let mut noise = NoiseStream::new(9, 0, Substream::Forward);
        for _ in 0..200 {
            let mut y1 = vec![0.0; 8];
            let mut y2 = vec![0.0; 8];
            noise.fill_gaussian(&mut y1);
            noise.fill_gaussian(&mut y2);
            let code = s.layout().build(&s.select(&y1)).unwrap();
            let dist = |j: usize| {
                let mut x: Vec<f64> = s.phase1().codeword(j).to_vec();
                x.extend_from_slice(code.codeword(j));
                let y: Vec<f64> = y1.iter().chain(&y2).copied().collect();
                crate::codebook::squared_distance(&x, &y)
            };
            let md = if dist(1) < dist(0) { 1 } else { 0 };
            assert_eq!(dec.decode(&s, &y1, &y2, &mut rng).unwrap(), md);
        }
    }

    #[test]
    fn deterministic_given_stream() {
        let s = scheme(0.5, 4);
        let dec = MixtureDecoder::default();
        let y1 = [1.0, 0.8, 0.9, -0.3, 0.5, 0.0, 0.1, 0.2];
        let y2 = [0.4, -1.0, 0.3, 0.2, 0.0, 0.7, -0.2, 0.1];
        let a = dec.log_likelihoods(&s, &y1, &y2, &mut NoiseStream::new(1, 2, Substream::Decoder)).unwrap();
        let b = dec.log_likelihoods(&s, &y1, &y2, &mut NoiseStream::new(1, 2, Substream::Decoder)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_samples_rejected() {
        let s = scheme(0.5, 4);
        let dec = MixtureDecoder::new(MixtureConfig { num_samples: 0, ..Default::default() });
        let mut rng = NoiseStream::new(0, 0, Substream::Decoder);
        assert!(dec.log_likelihoods(&s, &[0.0; 8], &[0.0; 8], &mut rng).is_err());
    }
}
