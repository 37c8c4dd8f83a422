//! Orthogonal and simplex code families, and the composite code used after the
//! switching moment.
//!
//! Phase-II block layout (0-based slots within the block of length `n1`):
//!
//! ```text
//!   slot 0..3     reserved for the selected group (k-simplex in slots 0..k-1)
//!   slot 3..n1    orthogonal code for the remaining M-k messages
//! ```
//!
//! Remaining messages take rest slots in ascending message-index order.

use crate::error::{Error, Result};
use crate::protocol::GroupSelection;

/// Number of phase-II slots reserved for the selected group.
pub const GROUP_SLOTS: usize = 3;

const REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeKind {
    Orthogonal,
    Simplex,
    Composite,
}

/// A set of equal-energy real codewords.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    codewords: Vec<Vec<f64>>,
    dim: usize,
    energy: f64,
    kind: CodeKind,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Squared norm shared by every codeword.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn codeword(&self, i: usize) -> &[f64] {
        &self.codewords[i]
    }

    pub fn codewords(&self) -> &[Vec<f64>] {
        &self.codewords
    }

    pub fn inner(&self, i: usize, j: usize) -> f64 {
        dot(&self.codewords[i], &self.codewords[j])
    }

    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        squared_distance(&self.codewords[i], &self.codewords[j])
    }

    /// Checks the geometric invariants implied by `kind`.
    pub fn validate(&self) -> Result<()> {
        let e = self.energy;
        for (i, c) in self.codewords.iter().enumerate() {
            if c.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: c.len() });
            }
            let norm = dot(c, c);
            if (norm - e).abs() > REL_TOL * e.max(f64::MIN_POSITIVE) {
                return Err(Error::domain(format!(
                    "codeword {i} has squared norm {norm}, expected {e}"
                )));
            }
        }
        let k = self.len();
        match self.kind {
            CodeKind::Orthogonal => self.check_pairwise(|_, _| 0.0),
            CodeKind::Simplex if k >= 2 => {
                let target = -e / (k as f64 - 1.0);
                self.check_pairwise(|_, _| target)?;
                let tol = REL_TOL * e.sqrt();
                for d in 0..self.dim {
                    let s: f64 = self.codewords.iter().map(|c| c[d]).sum();
                    if s.abs() > tol {
                        return Err(Error::domain(format!(
                            "simplex codewords do not sum to zero (coordinate {d}: {s})"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn check_pairwise(&self, expected: impl Fn(usize, usize) -> f64) -> Result<()> {
        let tol = REL_TOL * self.energy;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let ip = self.inner(i, j);
                if (ip - expected(i, j)).abs() > tol {
                    return Err(Error::domain(format!(
                        "codewords {i},{j}: inner product {ip}, expected {}",
                        expected(i, j)
                    )));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_energy(energy: f64) -> Result<()> {
    if !energy.is_finite() || energy <= 0.0 {
        return Err(Error::domain(format!("energy must be positive and finite, got {energy}")));
    }
    Ok(())
}

/// `m` mutually orthogonal codewords of squared norm `energy`: the scaled
/// standard basis vectors `sqrt(energy) * e_i`, `i < m`.
pub fn build_orthogonal(m: usize, dim: usize, energy: f64) -> Result<Codebook> {
    check_energy(energy)?;
    if m > dim {
        return Err(Error::DimensionDeficit { needed: m, available: dim });
    }
    let amp = energy.sqrt();
    let codewords = (0..m)
        .map(|i| {
            let mut c = vec![0.0; dim];
            c[i] = amp;
            c
        })
        .collect();
    Ok(Codebook { codewords, dim, energy, kind: CodeKind::Orthogonal })
}

/// The regular k-simplex in `k - 1` dimensions with squared norm `energy`.
///
/// Codeword `i` is the centered basis vector `e_i - 1/k` expressed in the
/// Helmert basis of the hyperplane orthogonal to the all-ones vector, then
/// rescaled, so the construction is deterministic.
pub fn build_simplex(k: usize, energy: f64) -> Result<Codebook> {
    if !(2..=4).contains(&k) {
        return Err(Error::domain(format!("simplex size must be 2, 3 or 4, got {k}")));
    }
    check_energy(energy)?;
    let dim = k - 1;
    // |e_i - 1/k|^2 = (k-1)/k
    let scale = (energy * k as f64 / (k as f64 - 1.0)).sqrt();
    let codewords = (0..k)
        .map(|i| {
            (1..=dim)
                .map(|j| {
                    let jf = j as f64;
                    let norm = (jf * (jf + 1.0)).sqrt();
                    let h = match i.cmp(&j) {
                        std::cmp::Ordering::Less => 1.0,
                        std::cmp::Ordering::Equal => -jf,
                        std::cmp::Ordering::Greater => 0.0,
                    };
                    scale * h / norm
                })
                .collect()
        })
        .collect();
    Ok(Codebook { codewords, dim, energy, kind: CodeKind::Simplex })
}

/// The phase-II code induced by a group selection.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTwoCode {
    selection: GroupSelection,
    group_code: Codebook,
    rest_code: Codebook,
    rest_members: Vec<usize>,
    code: Codebook,
}

impl PhaseTwoCode {
    pub fn selection(&self) -> &GroupSelection {
        &self.selection
    }

    pub fn group_code(&self) -> &Codebook {
        &self.group_code
    }

    /// Orthogonal code of the unselected messages, in rest-member order.
    pub fn rest_code(&self) -> &Codebook {
        &self.rest_code
    }

    pub fn rest_members(&self) -> &[usize] {
        &self.rest_members
    }

    /// Full M-codeword composite code of length `n1`, indexed by message.
    pub fn code(&self) -> &Codebook {
        &self.code
    }

    pub fn codeword(&self, message: usize) -> &[f64] {
        self.code.codeword(message)
    }

    pub fn total_length(&self) -> usize {
        self.code.dim()
    }
}

fn check_phase2_capacity(m: usize, k: usize, n1: usize) -> Result<()> {
    if n1 < GROUP_SLOTS {
        return Err(Error::DimensionDeficit { needed: GROUP_SLOTS, available: n1 });
    }
    if m < k {
        return Err(Error::domain(format!("selection of {k} messages out of only {m}")));
    }
    if m - k > n1 - GROUP_SLOTS {
        return Err(Error::DimensionDeficit { needed: m - k, available: n1 - GROUP_SLOTS });
    }
    Ok(())
}

/// Builds the composite phase-II code for `selection`.
pub fn build_phase2(selection: &GroupSelection, m: usize, n1: usize, a2: f64) -> Result<PhaseTwoCode> {
    let k = selection.k();
    check_phase2_capacity(m, k, n1)?;
    if let Some(&bad) = selection.members().iter().find(|&&j| j >= m) {
        return Err(Error::domain(format!("selected message {bad} out of range for M = {m}")));
    }
    let group_code = build_simplex(k, a2)?;
    let rest_members: Vec<usize> = (0..m).filter(|&j| !selection.contains(j)).collect();
    let rest_code = if rest_members.is_empty() {
        Codebook { codewords: Vec::new(), dim: n1 - GROUP_SLOTS, energy: a2, kind: CodeKind::Orthogonal }
    } else {
        build_orthogonal(rest_members.len(), n1 - GROUP_SLOTS, a2)?
    };

    let mut codewords = vec![vec![0.0; n1]; m];
    for (p, &j) in selection.vertex_order()[..k].iter().enumerate() {
        codewords[j][..k - 1].copy_from_slice(group_code.codeword(p));
    }
    for (r, &j) in rest_members.iter().enumerate() {
        codewords[j][GROUP_SLOTS..].copy_from_slice(rest_code.codeword(r));
    }
    let code = Codebook { codewords, dim: n1, energy: a2, kind: CodeKind::Composite };
    Ok(PhaseTwoCode { selection: *selection, group_code, rest_code, rest_members, code })
}

/// Precomputed phase-II geometry for fast evaluation of `(y'', x''_j)` for all
/// messages without materializing the composite code.
#[derive(Clone, Debug)]
pub struct PhaseTwoLayout {
    m: usize,
    n1: usize,
    a2: f64,
    simplices: [Codebook; 3],
}

impl PhaseTwoLayout {
    pub fn new(m: usize, n1: usize, a2: f64) -> Result<Self> {
        check_phase2_capacity(m, 2.min(m), n1)?;
        let simplices = [build_simplex(2, a2)?, build_simplex(3, a2)?, build_simplex(4, a2)?];
        Ok(PhaseTwoLayout { m, n1, a2, simplices })
    }

    pub fn simplex(&self, k: usize) -> &Codebook {
        &self.simplices[k - 2]
    }

    pub fn build(&self, selection: &GroupSelection) -> Result<PhaseTwoCode> {
        build_phase2(selection, self.m, self.n1, self.a2)
    }

    /// Writes `(y2, x''_j)` for every message `j` into `out`.
    pub fn correlations(&self, selection: &GroupSelection, y2: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.m);
        debug_assert_eq!(y2.len(), self.n1);
        let amp = self.a2.sqrt();
        let mut slot = GROUP_SLOTS;
        for (j, o) in out.iter_mut().enumerate() {
            if !selection.contains(j) {
                *o = amp * y2[slot];
                slot += 1;
            }
        }
        let k = selection.k();
        let simplex = self.simplex(k);
        for (p, &j) in selection.vertex_order()[..k].iter().enumerate() {
            out[j] = dot(&y2[..k - 1], simplex.codeword(p));
        }
    }
}
