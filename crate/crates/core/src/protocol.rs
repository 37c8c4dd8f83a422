//! The one-switch transmission strategy and the no-feedback baseline.

use serde::{Deserialize, Serialize};

use crate::channel::{feedback, forward, ChannelParams, SessionNoise};
use crate::codebook::{build_orthogonal, squared_distance, Codebook, PhaseTwoLayout};
use crate::decoder::Decoder;
use crate::error::{Error, Result};

const UNUSED: usize = usize::MAX;

/// Messages sorted by increasing distance to an observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    pub order: Vec<usize>,
    pub distances: Vec<f64>,
}

/// The transmitter's selected group: the `k` top-ranked messages in rank order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSelection {
    k: usize,
    members: [usize; 4],
}

impl GroupSelection {
    pub fn new(members: &[usize]) -> Result<Self> {
        let k = members.len();
        if !(2..=4).contains(&k) {
            return Err(Error::domain(format!("group size must be 2, 3 or 4, got {k}")));
        }
        for (i, a) in members.iter().enumerate() {
            if members[..i].contains(a) {
                return Err(Error::domain(format!("message {a} selected twice")));
            }
        }
        let mut m = [UNUSED; 4];
        m[..k].copy_from_slice(members);
        Ok(GroupSelection { k, members: m })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.members[..self.k]
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        self.members().contains(&j)
    }

    /// Rank position of `j` inside the group.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.members().iter().position(|&x| x == j)
    }

    /// Members in ascending message order. Simplex vertex `p` goes to the
    /// `p`-th of these, so the phase-II code depends only on the selected set
    /// and not on the order of near-ties inside it.
    #[inline]
    pub fn vertex_order(&self) -> [usize; 4] {
        let mut v = self.members;
        v[..self.k].sort_unstable();
        v
    }

    /// Simplex vertex used by `j`, if selected.
    pub fn vertex(&self, j: usize) -> Option<usize> {
        self.vertex_order()[..self.k].iter().position(|&x| x == j)
    }
}

/// Sorts messages by squared distance to `obs`, ties broken by ascending index.
pub fn rank(codebook: &Codebook, obs: &[f64]) -> Result<Ranking> {
    if obs.len() != codebook.dim() {
        return Err(Error::DimensionMismatch { expected: codebook.dim(), got: obs.len() });
    }
    let d: Vec<f64> = codebook.codewords().iter().map(|c| squared_distance(c, obs)).collect();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let distances = order.iter().map(|&i| d[i]).collect();
    Ok(Ranking { order, distances })
}

/// Threshold rules on the sorted distance list.
///
/// Pair if `d3 - d2 >= 2 A1 tau2`, else triple if `d4 - d3 >= 2 A1 tau3`,
/// else the top four. With fewer than four messages the rules that need the
/// missing ranks are skipped and `k` is capped at `M`.
pub fn select_group(ranking: &Ranking, a1: f64, tau2: f64, tau3: f64) -> GroupSelection {
    let d = &ranking.distances;
    let m = d.len();
    let k = if m == 2 || d[2] - d[1] >= 2.0 * a1 * tau2 {
        2
    } else if m == 3 || d[3] - d[2] >= 2.0 * a1 * tau3 {
        3
    } else {
        4
    };
    let mut members = [UNUSED; 4];
    members[..k].copy_from_slice(&ranking.order[..k]);
    GroupSelection { k, members }
}

/// Same rules as [`select_group`] for an orthogonal phase-I code, evaluated on
/// the projections `u_j = (obs)_j`: distances differ from `-2 sqrt(A1) u_j` by a
/// common constant, so a distance gap `2 A1 tau` is a projection gap `sqrt(A1) tau`.
#[inline]
pub(crate) fn select_from_scores(u: &[f64], t2: f64, t3: f64) -> GroupSelection {
    let m = u.len();
    let mut top = [UNUSED; 4];
    let mut len = 0;
    for (j, &v) in u.iter().enumerate() {
        // strict comparison keeps the smaller index ahead on ties
        let mut pos = len;
        while pos > 0 && v > u[top[pos - 1]] {
            pos -= 1;
        }
        if pos < 4 {
            let end = len.min(3);
            let mut q = end;
            while q > pos {
                top[q] = top[q - 1];
                q -= 1;
            }
            top[pos] = j;
            len = (len + 1).min(4);
        }
    }
    let k = if m == 2 || u[top[1]] - u[top[2]] >= t2 {
        2
    } else if m == 3 || u[top[2]] - u[top[3]] >= t3 {
        3
    } else {
        4
    };
    let mut members = [UNUSED; 4];
    members[..k].copy_from_slice(&top[..k]);
    GroupSelection { k, members }
}

/// Everything observed in one session.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub true_message: usize,
    /// Full transmitted block.
    pub x: Vec<f64>,
    pub y_prime: Vec<f64>,
    /// Transmitter's noisy copy of `y_prime`; empty for the baseline.
    pub z_prime: Vec<f64>,
    /// Phase-II output; empty for the baseline.
    pub y_double_prime: Vec<f64>,
    pub selection: Option<GroupSelection>,
    pub decision: usize,
    pub correct: bool,
}

impl Transcript {
    pub fn energy(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    /// True message missing from the transmitter's group.
    pub fn coordination_failure(&self) -> bool {
        self.selection.is_some_and(|s| !s.contains(self.true_message))
    }
}

/// Prebuilt codes of the one-switch scheme for fixed parameters.
#[derive(Clone, Debug)]
pub struct OneSwitchScheme {
    params: ChannelParams,
    phase1: Codebook,
    layout: PhaseTwoLayout,
    sqrt_a1: f64,
}

impl OneSwitchScheme {
    pub fn new(params: ChannelParams) -> Result<Self> {
        params.validate()?;
        let phase1 = build_orthogonal(params.m, params.n1(), params.a1())?;
        let layout = PhaseTwoLayout::new(params.m, params.n1(), params.a2())?;
        Ok(OneSwitchScheme { params, phase1, layout, sqrt_a1: params.a1().sqrt() })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn phase1(&self) -> &Codebook {
        &self.phase1
    }

    pub fn layout(&self) -> &PhaseTwoLayout {
        &self.layout
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    /// Projection gap equivalent to the distance threshold `2 A1 tau2`.
    pub fn t2(&self) -> f64 {
        self.sqrt_a1 * self.params.tau2
    }

    pub fn t3(&self) -> f64 {
        self.sqrt_a1 * self.params.tau3
    }

    pub fn sqrt_a1(&self) -> f64 {
        self.sqrt_a1
    }

    /// Group selected from a phase-I observation (length `n1`).
    pub fn select(&self, obs: &[f64]) -> GroupSelection {
        self.select_projections(&obs[..self.params.m])
    }

    #[inline]
    pub(crate) fn select_projections(&self, u: &[f64]) -> GroupSelection {
        select_from_scores(u, self.t2(), self.t3())
    }

    /// Runs phase I, the feedback observation, the switch and phase II, then decodes.
    pub fn run_session(
        &self,
        true_message: usize,
        noise: &mut SessionNoise,
        decoder: &dyn Decoder,
    ) -> Result<Transcript> {
        let m = self.params.m;
        if true_message >= m {
            return Err(Error::domain(format!("message {true_message} out of range for M = {m}")));
        }
        let x1 = self.phase1.codeword(true_message);
        let y1 = forward(x1, &mut noise.forward)?;
        let z1 = feedback(&y1, self.params.sigma, &mut noise.feedback)?;
        let selection = self.select(&z1);
        let code2 = self.layout.build(&selection)?;
        let x2 = code2.codeword(true_message);
        let y2 = forward(x2, &mut noise.forward)?;
        let decision = decoder.decode(self, &y1, &y2, &mut noise.decoder)?;

        let mut x = Vec::with_capacity(self.params.n);
        x.extend_from_slice(x1);
        x.extend_from_slice(x2);
        Ok(Transcript {
            true_message,
            x,
            y_prime: y1,
            z_prime: z1,
            y_double_prime: y2,
            selection: Some(selection),
            decision,
            correct: decision == true_message,
        })
    }
}

/// Single-phase orthogonal code of energy `nA` over the whole block.
#[derive(Clone, Debug)]
pub struct BaselineScheme {
    params: ChannelParams,
    code: Codebook,
}

impl BaselineScheme {
    pub fn new(params: ChannelParams) -> Result<Self> {
        params.validate()?;
        let code = build_orthogonal(params.m, params.n, params.total_energy())?;
        Ok(BaselineScheme { params, code })
    }

    pub fn code(&self) -> &Codebook {
        &self.code
    }

    /// Transmits without feedback and decodes by minimum distance.
    pub fn run(&self, true_message: usize, noise: &mut SessionNoise) -> Result<Transcript> {
        let m = self.params.m;
        if true_message >= m {
            return Err(Error::domain(format!("message {true_message} out of range for M = {m}")));
        }
        let x = self.code.codeword(true_message).to_vec();
        let y = forward(&x, &mut noise.forward)?;
        // equal energies: minimum distance is maximum projection
        let decision = argmax(&y[..m]);
        Ok(Transcript {
            true_message,
            x,
            y_prime: y,
            z_prime: Vec::new(),
            y_double_prime: Vec::new(),
            selection: None,
            decision,
            correct: decision == true_message,
        })
    }
}

/// Convenience wrapper building the baseline code for a single session.
pub fn run_baseline(true_message: usize, params: &ChannelParams, noise: &mut SessionNoise) -> Result<Transcript> {
    BaselineScheme::new(*params)?.run(true_message, noise)
}

/// Index of the largest value, smallest index on ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{MixtureConfig, MixtureDecoder};

    fn ranking(d: &[f64]) -> Ranking {
        Ranking { order: (0..d.len()).collect(), distances: d.to_vec() }
    }

    #[test]
    fn rank_exact_codeword_first() {
        let c = build_orthogonal(4, 6, 2.0).unwrap();
        let r = rank(&c, c.codeword(2)).unwrap();
        assert_eq!(r.order[0], 2);
        assert_eq!(r.distances[0], 0.0);
    }

    #[test]
    fn rank_zero_obs_ties_by_index() {
        let c = build_orthogonal(5, 5, 3.0).unwrap();
        let r = rank(&c, &[0.0; 5]).unwrap();
        assert_eq!(r.order, vec![0, 1, 2, 3, 4]);
        assert!(r.distances.iter().all(|&d| (d - 3.0).abs() < 1e-12));
        assert!(matches!(rank(&c, &[0.0; 4]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn selection_rules() {
        // 2 A1 tau = 5 with A1 = 10, tau = 0.25
        let s = select_group(&ranking(&[0.0, 1.0, 10.0, 11.0]), 10.0, 0.25, 0.25);
        assert_eq!((s.k(), s.members()), (2, &[0, 1][..]));
        let s = select_group(&ranking(&[0.0, 1.0, 2.0, 9.0]), 10.0, 0.25, 0.25);
        assert_eq!(s.k(), 3);
        let s = select_group(&ranking(&[0.0, 1.0, 2.0, 3.0]), 10.0, 0.25, 0.25);
        assert_eq!(s.k(), 4);
        // boundary uses >=
        let s = select_group(&ranking(&[0.0, 1.0, 6.0, 7.0]), 10.0, 0.25, 0.25);
        assert_eq!(s.k(), 2);
    }

    #[test]
    fn small_alphabets_cap_k() {
        assert_eq!(select_group(&ranking(&[0.0, 0.1]), 1.0, 5.0, 5.0).k(), 2);
        assert_eq!(select_group(&ranking(&[0.0, 0.1, 0.2]), 1.0, 5.0, 5.0).k(), 3);
        assert_eq!(select_group(&ranking(&[0.0, 0.1, 20.0]), 1.0, 5.0, 5.0).k(), 2);
        assert_eq!(select_from_scores(&[0.3, 0.1], 9.0, 9.0).members(), &[0, 1]);
        assert_eq!(select_from_scores(&[0.1, 0.2, 0.3], 9.0, 9.0).members(), &[2, 1, 0]);
    }

    #[test]
    fn score_selection_matches_distance_selection() {
        let c = build_orthogonal(6, 8, 4.0).unwrap();
        let obs = [0.3, 1.9, 1.7, -0.2, 1.6, 0.0, 5.0, -3.0];
        for (t2, t3) in [(0.05, 0.05), (0.3, 0.05), (0.01, 0.4), (2.0, 2.0)] {
            let a = select_group(&rank(&c, &obs).unwrap(), 4.0, t2, t3);
            let b = select_from_scores(&obs[..6], 2.0 * t2, 2.0 * t3);
            assert_eq!(a, b);
        }
        // ties resolved toward the smaller index
        assert_eq!(select_from_scores(&[1.0, 1.0, 1.0, 1.0, 1.0], 0.1, 0.1).members(), &[0, 1, 2, 3]);
    }

    #[test]
    fn noiseless_session_decodes_correctly() {
        let params = ChannelParams { sigma: 0.0, m: 5, n: 16, a: 1.5, ..Default::default() };
        let scheme = OneSwitchScheme::new(params).unwrap();
        let dec = MixtureDecoder::new(MixtureConfig::default());
        for msg in 0..5 {
            let mut noise = SessionNoise::silent(1, msg as u64);
            let t = scheme.run_session(msg, &mut noise, &dec).unwrap();
            assert!(t.correct);
            assert_eq!(t.selection.unwrap().members()[0], msg);
            assert!((t.energy() - 24.0).abs() < 1e-9 * 24.0);
        }
    }

    #[test]
    fn baseline_noiseless() {
        let params = ChannelParams { m: 2, n: 16, a: 1.0, ..Default::default() };
        let mut noise = SessionNoise::silent(0, 0);
        let t = run_baseline(1, &params, &mut noise).unwrap();
        assert!(t.correct);
        assert!((t.energy() - 16.0).abs() < 1e-12);
    }
}
