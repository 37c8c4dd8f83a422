use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::channel::NoiseStream;
use crate::error::{Error, Result};
use crate::protocol::{GroupSelection, OneSwitchScheme};
use crate::special::{normal_cdf, normal_pdf, normal_sf};

use super::{add_terms, check_observations, log_sum_exp, phase1_terms, point_mass_terms, Decoder, MixtureConfig};

/// Largest alphabet the oracle accepts; the number of ordered selections grows
/// like `M^4`.
pub const MAX_EXACT_MESSAGES: usize = 6;

/// Integration half-width around each mean, in units of sigma.
const SUPPORT: f64 = 10.0;
/// Maximum panel width of the composite rule, in units of sigma.
const PANEL: f64 = 2.0;

/// Probability of one transmitter selection given `y'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventProbability {
    pub selection: GroupSelection,
    pub probability: f64,
}

/// Deterministic oracle for the mixture likelihood.
///
/// Writing `u_j = y'_j + sigma * eta'_j`, each selection is an ordered top-k
/// event on independent Gaussians: the k-th member's value `w` is integrated
/// on the outside, the higher members through nested finite gap intervals,
/// and the unselected messages contribute closed-form normal CDFs at
/// `w - threshold`. Each one-dimensional integral uses composite
/// Gauss-Legendre panels.
#[derive(Clone, Debug)]
pub struct ExactDecoder {
    nodes: Vec<(f64, f64)>,
}

impl Default for ExactDecoder {
    fn default() -> Self {
        Self::new(MixtureConfig::default().oracle_quadrature_points).expect("default rule")
    }
}

struct Quadrature<'a> {
    nodes: &'a [(f64, f64)],
    mu: &'a [f64],
    sigma: f64,
}

impl Quadrature<'_> {
    fn pdf(&self, j: usize, x: f64) -> f64 {
        normal_pdf((x - self.mu[j]) / self.sigma) / self.sigma
    }

    fn cdf(&self, j: usize, x: f64) -> f64 {
        normal_cdf((x - self.mu[j]) / self.sigma)
    }

    fn sf(&self, j: usize, x: f64) -> f64 {
        normal_sf((x - self.mu[j]) / self.sigma)
    }

    /// Integral over `[lo, hi]` clipped to the effective support of member `j`.
    fn integrate_near(&self, j: usize, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let lo = lo.max(self.mu[j] - SUPPORT * self.sigma);
        let hi = hi.min(self.mu[j] + SUPPORT * self.sigma);
        if hi <= lo {
            return 0.0;
        }
        let panels = ((hi - lo) / (PANEL * self.sigma)).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            let half = 0.5 * h;
            total += half * self.nodes.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>();
        }
        total
    }

    fn event(&self, members: &[usize], others: &[usize], t2: f64, t3: f64) -> f64 {
        let k = members.len();
        let t_out = match k {
            2 => t2,
            3 => t3,
            _ => 0.0,
        };
        let last = members[k - 1];
        let a = members[0];
        self.integrate_near(last, f64::NEG_INFINITY, f64::INFINITY, |w| {
            let rest: f64 = others.iter().map(|&j| self.cdf(j, w - t_out)).product();
            if rest == 0.0 {
                return 0.0;
            }
            let upper = match k {
                2 => self.sf(a, w),
                3 => {
                    let b = members[1];
                    self.integrate_near(b, w, w + t2, |v| self.pdf(b, v) * self.sf(a, v))
                }
                _ => {
                    let (b, c) = (members[1], members[2]);
                    self.integrate_near(c, w, w + t3, |v3| {
                        self.pdf(c, v3) * self.integrate_near(b, v3, v3 + t2, |v2| self.pdf(b, v2) * self.sf(a, v2))
                    })
                }
            };
            self.pdf(last, w) * rest * upper
        })
    }
}

fn ordered_tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in 0..m {
            if !cur.contains(&j) {
                cur.push(j);
                rec(m, k, cur, out);
                cur.pop();
            }
        }
    }
    rec(m, k, &mut cur, &mut out);
    out
}

impl ExactDecoder {
    pub fn new(points: usize) -> Result<Self> {
        let degree = NonZeroUsize::new(points).ok_or_else(|| Error::domain("oracle needs at least one quadrature point"))?;
        Ok(ExactDecoder { nodes: GaussLegendre::new(degree).as_node_weight_pairs().to_vec() })
    }

    pub fn from_config(config: &MixtureConfig) -> Result<Self> {
        Self::new(config.oracle_quadrature_points)
    }

    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    /// Probability of every possible selection given `y'` (requires `sigma > 0`).
    pub fn event_probabilities(&self, scheme: &OneSwitchScheme, y1: &[f64]) -> Result<Vec<EventProbability>> {
        let m = scheme.m();
        if m > MAX_EXACT_MESSAGES {
            return Err(Error::domain(format!(
                "exact decoding supports at most {MAX_EXACT_MESSAGES} messages, got {m}"
            )));
        }
        let sigma = scheme.params().sigma;
        if sigma <= 0.0 {
            return Err(Error::domain("selection events are degenerate without feedback noise"));
        }
        let q = Quadrature { nodes: &self.nodes, mu: &y1[..m], sigma };
        let (t2, t3) = (scheme.t2(), scheme.t3());
        let mut out = Vec::new();
        for k in 2..=m.min(4) {
            for members in ordered_tuples(m, k) {
                let others: Vec<usize> = (0..m).filter(|j| !members.contains(j)).collect();
                let probability = q.event(&members, &others, t2, t3);
                out.push(EventProbability { selection: GroupSelection::new(&members)?, probability });
            }
        }
        Ok(out)
    }

    /// `log E_{z'|y'} exp((y'', x''_j(z')) - A2/2)` for every message `j`.
    pub fn mixture_terms(&self, scheme: &OneSwitchScheme, y1: &[f64], y2: &[f64]) -> Result<Vec<f64>> {
        check_observations(scheme, y1, y2)?;
        if scheme.m() > MAX_EXACT_MESSAGES {
            return Err(Error::domain(format!(
                "exact decoding supports at most {MAX_EXACT_MESSAGES} messages, got {}",
                scheme.m()
            )));
        }
        if scheme.params().sigma == 0.0 {
            return Ok(point_mass_terms(scheme, y1, y2));
        }
        let m = scheme.m();
        let events: Vec<_> = self
            .event_probabilities(scheme, y1)?
            .into_iter()
            .filter(|e| e.probability > 0.0)
            .collect();
        let mut corr = vec![0.0; m * events.len()];
        for (g, e) in events.iter().enumerate() {
            scheme.layout().correlations(&e.selection, y2, &mut corr[g * m..(g + 1) * m]);
        }
        let half = 0.5 * scheme.params().a2();
        Ok((0..m)
            .map(|j| {
                let terms = events.iter().enumerate().map(|(g, e)| e.probability.ln() + corr[g * m + j]);
                log_sum_exp(terms) - half
            })
            .collect())
    }
}

impl Decoder for ExactDecoder {
    fn log_likelihoods(
        &self,
        scheme: &OneSwitchScheme,
        y1: &[f64],
        y2: &[f64],
        _rng: &mut NoiseStream,
    ) -> Result<Vec<f64>> {
        let mix = self.mixture_terms(scheme, y1, y2)?;
        Ok(add_terms(phase1_terms(scheme, y1), &mix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelParams, Substream};
    use crate::decoder::MixtureDecoder;

    fn scheme(sigma: f64, m: usize) -> OneSwitchScheme {
        OneSwitchScheme::new(ChannelParams { sigma, m, n: 16, a: 1.5, ..Default::default() }).unwrap()
    }

    fn observation(seed: u64, s: &OneSwitchScheme) -> (Vec<f64>, Vec<f64>) {
        let mut rng = NoiseStream::new(seed, 0, Substream::Forward);
        let mut y1: Vec<f64> = s.phase1().codeword(0).to_vec();
        y1.iter_mut().for_each(|v| *v += rng.gaussian());
        let mut y2 = vec![0.0; 8];
        rng.fill_gaussian(&mut y2);
        (y1, y2)
    }

    #[test]
    fn tuple_counts() {
        assert_eq!(ordered_tuples(4, 2).len(), 12);
        assert_eq!(ordered_tuples(4, 4).len(), 24);
        assert_eq!(ordered_tuples(5, 3).len(), 60);
    }

    #[test]
    fn event_probabilities_sum_to_one() {
        for (m, sigma) in [(2, 0.5), (3, 0.3), (4, 0.5), (5, 1.0), (4, 0.05)] {
            let s = scheme(sigma, m);
            let (y1, _) = observation(m as u64, &s);
            let total: f64 = ExactDecoder::default()
                .event_probabilities(&s, &y1)
                .unwrap()
                .iter()
                .map(|e| e.probability)
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "M={m} sigma={sigma}: {total}");
        }
    }

    #[test]
    fn doubling_points_is_stable() {
        let s = scheme(0.5, 4);
        let coarse = ExactDecoder::new(12).unwrap();
        let fine = ExactDecoder::new(24).unwrap();
        for seed in 0..5 {
            let (y1, y2) = observation(seed, &s);
            let a = coarse.mixture_terms(&s, &y1, &y2).unwrap();
            let b = fine.mixture_terms(&s, &y1, &y2).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn symmetric_input_gives_equal_likelihoods() {
        let s = scheme(0.5, 4);
        let y1 = [0.3, 0.3, 0.3, 0.3, 0.0, 1.0, -2.0, 0.0];
        let ll = ExactDecoder::default()
            .log_likelihoods(&s, &y1, &[0.0; 8], &mut NoiseStream::new(0, 0, Substream::Decoder))
            .unwrap();
        for v in &ll {
            assert!((v - ll[0]).abs() < 1e-9);
        }
        let dec = ExactDecoder::default()
            .decode(&s, &y1, &[0.0; 8], &mut NoiseStream::new(0, 0, Substream::Decoder))
            .unwrap();
        assert_eq!(dec, 0);
    }

    #[test]
    fn close_to_sampled_mixture() {
        let s = scheme(0.5, 4);
        let mix = MixtureDecoder::new(MixtureConfig { num_samples: 100_000, ..Default::default() });
        let exact = ExactDecoder::default();
        for seed in 0..5 {
            let (y1, y2) = observation(seed, &s);
            let a = exact.mixture_terms(&s, &y1, &y2).unwrap();
            let b = mix.mixture_terms(&s, &y1, &y2, &mut NoiseStream::new(seed, 0, Substream::Decoder)).unwrap();
            for j in 1..4 {
                let ra = a[j] - a[0];
                let rb = b[j] - b[0];
                assert!((ra.exp() / rb.exp() - 1.0).abs() < 0.05, "{ra} vs {rb}");
            }
        }
    }

    #[test]
    fn rejects_large_alphabets() {
        let p = ChannelParams { sigma: 0.5, m: 7, n: 16, ..Default::default() };
        let s = OneSwitchScheme::new(p).unwrap();
        assert!(ExactDecoder::default().mixture_terms(&s, &[0.0; 8], &[0.0; 8]).is_err());
    }
}
