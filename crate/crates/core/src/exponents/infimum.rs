//! Numeric minimization of `||z||^2` over the constraint sets that appear in the
//! exponent analysis.
//!
//! Two-dimensional sets all have the form `{x >= h(y)}` with `h` convex, so
//! the grid search is followed by an exact one-dimensional polish along the
//! boundary `x = max(h(y), 0)`. Every reported value is the objective at a
//! feasible point, hence an upper bound on the true infimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounding box half-width of the coarse pass.
const BOX: f64 = 10.0;
/// Points per axis in each grid pass.
const GRID_POINTS: usize = 401;
/// Number of box halvings after the coarse pass.
const REFINEMENTS: usize = 6;

/// Which two-dimensional program of the `k = 0` case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    S2,
    S3,
}

/// Minimum and a minimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Infimum {
    pub value: f64,
    pub x: f64,
    pub y: f64,
}

/// The set `{(x, y): x - eps (y + a)^2 >= b}`; `eps = inf` pins `y = -a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSet {
    pub eps: f64,
    pub a: f64,
    pub b: f64,
}

impl ReducedSet {
    pub fn for_branch(branch: Branch, beta: f64, tau: f64, sigma2: f64) -> Self {
        match branch {
            Branch::S2 => {
                let r = (2.0 * (3.0 + 4.0 * beta)).sqrt();
                ReducedSet {
                    eps: 1.0 / (sigma2 * r),
                    a: (tau - sigma2) / 2f64.sqrt(),
                    b: (2.0 / (3.0 + 4.0 * beta)).sqrt() * (1.0 + beta + (2.0 * tau - sigma2) / 4.0),
                }
            }
            Branch::S3 => {
                let g = 2.0 + 3.0 * beta;
                ReducedSet {
                    eps: (3.0 / (2.0 * g)).sqrt() / sigma2,
                    a: (2.0 * tau - sigma2) / 6f64.sqrt(),
                    b: (6.0 * (1.0 + beta) + 4.0 * tau - sigma2) / (2.0 * (6.0 * g).sqrt()),
                }
            }
        }
    }

    /// `b^2 + a^2 - a^2 / (2 b eps)`; `None` when `b <= 0`, where it is not a
    /// valid bound.
    pub fn closed_form_bound(&self) -> Option<f64> {
        if self.b <= 0.0 {
            return None;
        }
        let drop = if self.eps.is_infinite() { 0.0 } else { self.a * self.a / (2.0 * self.b * self.eps) };
        Some(self.b * self.b + self.a * self.a - drop)
    }

    fn boundary(&self, y: f64) -> f64 {
        self.b + self.eps * (y + self.a).powi(2)
    }
}

/// Minimizes `x^2 + y^2` over `{x >= h(y)}` for convex `h` (`+inf` marks
/// infeasible `y`): coarse grid, box halvings, then golden-section along the
/// boundary.
pub fn minimize_epigraph(h: impl Fn(f64) -> f64) -> Result<Infimum> {
    let phi = |y: f64| {
        let x = h(y).max(0.0);
        x * x + y * y
    };
    let mut best: Option<Infimum> = None;
    let (mut cx, mut cy, mut half) = (0.0, 0.0, BOX);
    for _ in 0..=REFINEMENTS {
        let step = 2.0 * half / (GRID_POINTS - 1) as f64;
        for iy in 0..GRID_POINTS {
            let y = cy - half + iy as f64 * step;
            let hy = h(y);
            if hy.is_nan() {
                continue;
            }
            for ix in 0..GRID_POINTS {
                let x = cx - half + ix as f64 * step;
                if x >= hy {
                    let v = x * x + y * y;
                    if best.is_none_or(|b| v < b.value) {
                        best = Some(Infimum { value: v, x, y });
                    }
                }
            }
        }
        let b = best.ok_or_else(|| Error::domain("constraint set has no point in the search box"))?;
        cx = b.x;
        cy = b.y;
        half *= 0.5;
    }
    let mut best = best.expect("checked above");

    // phi is convex; widen the bracket while the minimizer sits on its edge
    let mut lo = best.y - 4.0 * half;
    let mut hi = best.y + 4.0 * half;
    for _ in 0..20 {
        let y = golden_section(&phi, lo, hi);
        let v = phi(y);
        if v < best.value {
            best = Infimum { value: v, x: h(y).max(0.0), y };
        }
        let w = hi - lo;
        if (y - lo).abs() < 1e-6 * w {
            lo -= w;
        } else if (hi - y).abs() < 1e-6 * w {
            hi += w;
        } else {
            break;
        }
    }
    Ok(best)
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Infimum of `x^2 + y^2` over a reduced set.
pub fn infimum_reduced(set: &ReducedSet) -> Result<Infimum> {
    if set.eps.is_infinite() {
        let x = set.b.max(0.0);
        return Ok(Infimum { value: x * x + set.a * set.a, x, y: -set.a });
    }
    if !(set.eps >= 0.0) {
        return Err(Error::domain(format!("curvature must be non-negative, got {}", set.eps)));
    }
    minimize_epigraph(|y| set.boundary(y))
}

/// Boundary `x = h(y)` of the original (unreduced) branch set, including the
/// positive part; `sigma2 = 0` turns the quadratic barrier into `y <= -c`.
fn branch_boundary(branch: Branch, beta: f64, tau: f64, sigma2: f64) -> impl Fn(f64) -> f64 {
    move |y: f64| {
        let (lead, slope, c, curv, rhs) = match branch {
            Branch::S2 => (
                (3.0 + 4.0 * beta).sqrt(),
                1.0,
                tau / 2f64.sqrt(),
                1.0 / 2f64.sqrt(),
                (1.0 + beta) * 2f64.sqrt(),
            ),
            Branch::S3 => (
                (2.0 * (2.0 + 3.0 * beta)).sqrt(),
                2f64.sqrt(),
                (2.0f64 / 3.0).sqrt() * tau,
                3f64.sqrt(),
                3f64.sqrt() * (1.0 + beta),
            ),
        };
        let p = (y + c).max(0.0);
        let barrier = if sigma2 == 0.0 {
            if p > 0.0 {
                return f64::INFINITY;
            }
            0.0
        } else {
            curv * p * p / sigma2
        };
        (rhs - slope * y + barrier) / lead
    }
}

/// Numeric infimum of `x^2 + y^2` over the original set of `branch`.
pub fn infimum_2d(branch: Branch, beta: f64, tau: f64, sigma2: f64) -> Result<Infimum> {
    check_exponent_inputs(beta, tau, sigma2)?;
    minimize_epigraph(branch_boundary(branch, beta, tau, sigma2))
}

fn check_exponent_inputs(beta: f64, tau: f64, sigma2: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("threshold must be non-negative, got {tau}")));
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::domain(format!("sigma2 must be non-negative, got {sigma2}")));
    }
    Ok(())
}

/// The `k = 4` program: minimize `||z||^2`, `z` in R^5, subject to
///
/// ```text
///   sqrt(1 + 8b/3) z2 - z1                  >= 1 + 4b/3
///   sqrt(1 + s2) z3 - z1 - sqrt(s2) z5      >= 1 - tau2
///   sqrt(1 + s2) (z4 - z3)                  >= -tau3
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K4Program {
    pub beta: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub sigma2: f64,
}

/// Values reported for the `k = 4` program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K4Solution {
    /// Grid+refine on the exactly reduced 2-D problem.
    pub value: f64,
    pub z: [f64; 5],
    /// Independent active-set enumeration of the 5-D problem.
    pub cross_check: f64,
    /// Minimum with all three constraints forced to equality.
    pub equality_forced: f64,
}

impl K4Program {
    fn rows(&self) -> [([f64; 5], f64); 3] {
        let k1 = (1.0 + 8.0 * self.beta / 3.0).sqrt();
        let s = (1.0 + self.sigma2).sqrt();
        let sig = self.sigma2.sqrt();
        [
            ([-1.0, k1, 0.0, 0.0, 0.0], 1.0 + 4.0 * self.beta / 3.0),
            ([-1.0, 0.0, s, 0.0, -sig], 1.0 - self.tau2),
            ([0.0, 0.0, -s, s, 0.0], -self.tau3),
        ]
    }

    pub fn is_feasible(&self, z: &[f64; 5], tol: f64) -> bool {
        self.rows().iter().all(|(a, b)| dot5(a, z) >= b - tol)
    }

    fn validate(&self) -> Result<()> {
        check_exponent_inputs(self.beta, self.tau2, self.sigma2)?;
        if !(self.tau3 >= 0.0) || !self.tau3.is_finite() {
            return Err(Error::domain(format!("tau3 must be non-negative, got {}", self.tau3)));
        }
        Ok(())
    }

    /// Optimal `z` for fixed `(z1, z3)`: the remaining coordinates enter one
    /// constraint each and are set to the smallest magnitude that satisfies it.
    fn complete(&self, z1: f64, z3: f64) -> Option<[f64; 5]> {
        let k1 = (1.0 + 8.0 * self.beta / 3.0).sqrt();
        let s = (1.0 + self.sigma2).sqrt();
        let sig = self.sigma2.sqrt();
        let z2 = ((1.0 + 4.0 * self.beta / 3.0 + z1) / k1).max(0.0);
        let z4 = (z3 - self.tau3 / s).max(0.0);
        let r = s * z3 - z1 - (1.0 - self.tau2);
        let z5 = if r >= 0.0 {
            0.0
        } else if sig > 0.0 {
            r / sig
        } else {
            return None;
        };
        Some([z1, z2, z3, z4, z5])
    }

    fn reduced_objective(&self, z1: f64, z3: f64) -> f64 {
        self.complete(z1, z3).map_or(f64::INFINITY, |z| dot5(&z, &z))
    }

    /// Stationary points of each quadratic piece of the reduced objective.
    fn piece_candidates(&self) -> Vec<(f64, f64)> {
        let k1sq = 1.0 + 8.0 * self.beta / 3.0;
        let c1 = 1.0 + 4.0 * self.beta / 3.0;
        let s = (1.0 + self.sigma2).sqrt();
        let d = 1.0 - self.tau2;
        let t3 = self.tau3 / s;
        let mut out = Vec::new();
        for mask in 0..8u32 {
            let a1 = f64::from(mask & 1);
            let a4 = f64::from((mask >> 1) & 1);
            let a5 = (mask >> 2) & 1 == 1;
            if a5 && self.sigma2 == 0.0 {
                // hard constraint s z3 - z1 = d: one free variable z3
                let h = 1.0 + a1 / k1sq * s * s + s * s + a4;
                let g = a1 / k1sq * s * (c1 - d) - s * d - a4 * t3;
                let z3 = -g / h;
                out.push((s * z3 - d, z3));
                continue;
            }
            let w = if a5 { 1.0 / self.sigma2 } else { 0.0 };
            let h11 = 1.0 + a1 / k1sq + w;
            let h13 = -w * s;
            let h33 = 1.0 + a4 + w * s * s;
            let r1 = -a1 * c1 / k1sq - w * d;
            let r3 = a4 * t3 + w * s * d;
            let det = h11 * h33 - h13 * h13;
            if det.abs() > 0.0 {
                out.push(((r1 * h33 - h13 * r3) / det, (h11 * r3 - h13 * r1) / det));
            }
        }
        out
    }

    /// Primary route: grid+refine over `(z1, z3)` followed by the exact
    /// piecewise-quadratic polish.
    pub fn minimize_reduced(&self) -> Result<(f64, [f64; 5])> {
        self.validate()?;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let (mut c1, mut c3, mut half) = (0.0, 0.0, BOX);
        for _ in 0..=REFINEMENTS {
            let step = 2.0 * half / (GRID_POINTS - 1) as f64;
            for i in 0..GRID_POINTS {
                let z1 = c1 - half + i as f64 * step;
                for j in 0..GRID_POINTS {
                    let z3 = c3 - half + j as f64 * step;
                    let v = self.reduced_objective(z1, z3);
                    if v < best.0 {
                        best = (v, z1, z3);
                    }
                }
            }
            if !best.0.is_finite() {
                return Err(Error::domain("k=4 program has no feasible point in the search box"));
            }
            c1 = best.1;
            c3 = best.2;
            half *= 0.5;
        }
        for (z1, z3) in self.piece_candidates() {
            let v = self.reduced_objective(z1, z3);
            if v < best.0 {
                best = (v, z1, z3);
            }
        }
        let z = self.complete(best.1, best.2).expect("finite objective implies feasible completion");
        Ok((best.0, z))
    }

    /// Cross-check: min-norm point of every face of the polyhedron, kept if
    /// feasible.
    pub fn minimize_active_set(&self) -> Result<f64> {
        self.validate()?;
        let rows = self.rows();
        let mut best = f64::INFINITY;
        for mask in 0..8u32 {
            let active: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            let z = if active.is_empty() {
                [0.0; 5]
            } else {
                let n = active.len();
                let mut g = vec![vec![0.0; n]; n];
                let mut rhs = vec![0.0; n];
                for (p, &i) in active.iter().enumerate() {
                    rhs[p] = rows[i].1;
                    for (q, &j) in active.iter().enumerate() {
                        g[p][q] = dot5(&rows[i].0, &rows[j].0);
                    }
                }
                let Some(lambda) = solve_small(g, rhs) else { continue };
                let mut z = [0.0; 5];
                for (p, &i) in active.iter().enumerate() {
                    for (zc, ac) in z.iter_mut().zip(&rows[i].0) {
                        *zc += lambda[p] * ac;
                    }
                }
                z
            };
            if self.is_feasible(&z, 1e-12) {
                best = best.min(dot5(&z, &z));
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::domain("k=4 program: no feasible face found"))
        }
    }

    /// `||z||^2` with all three constraints at equality, as a function of
    /// `(z1, y3)` where `y3 = sqrt(1 + s2) z3`.
    pub fn equality_objective(&self, z1: f64, y3: f64) -> f64 {
        let k1 = (1.0 + 8.0 * self.beta / 3.0).sqrt();
        let s = (1.0 + self.sigma2).sqrt();
        let z2 = (1.0 + 4.0 * self.beta / 3.0 + z1) / k1;
        let z3 = y3 / s;
        let z4 = z3 - self.tau3 / s;
        let z5 = (y3 - z1 - (1.0 - self.tau2)) / self.sigma2.sqrt();
        z1 * z1 + z2 * z2 + z3 * z3 + z4 * z4 + z5 * z5
    }

    /// Exact minimum of the equality-forced objective (a convex quadratic).
    pub fn minimize_equality_forced(&self) -> f64 {
        let p = 3.0 * (3.0 + 8.0 * self.beta);
        let c0 = 3.0 + 4.0 * self.beta;
        let d = 1.0 - self.tau2;
        let s = 1.0 + self.sigma2;
        let t = self.sigma2;
        let q = |z1: f64, y: f64, pen: f64| {
            z1 * z1 + (3.0 * z1 + c0).powi(2) / p + (y * y + (y - self.tau3).powi(2)) / s + pen
        };
        if t == 0.0 {
            let z1 = (-6.0 * c0 / p - 4.0 * d + 2.0 * self.tau3) / (6.0 + 18.0 / p);
            return q(z1, z1 + d, 0.0);
        }
        let h11 = 2.0 + 18.0 / p + 2.0 / t;
        let h12 = -2.0 / t;
        let h22 = 4.0 / s + 2.0 / t;
        let r1 = -6.0 * c0 / p - 2.0 * d / t;
        let r2 = 2.0 * self.tau3 / s + 2.0 * d / t;
        let det = h11 * h22 - h12 * h12;
        let z1 = (r1 * h22 - h12 * r2) / det;
        let y = (h11 * r2 - h12 * r1) / det;
        q(z1, y, (y - z1 - d).powi(2) / t)
    }

    pub fn solve(&self) -> Result<K4Solution> {
        let (value, z) = self.minimize_reduced()?;
        Ok(K4Solution {
            value,
            z,
            cross_check: self.minimize_active_set()?,
            equality_forced: self.minimize_equality_forced(),
        })
    }
}

/// `(1 - tau2)^2 + (3 tau2 + 4 beta)^2 / (3 (3 + 8 beta))`: the reference
/// small-noise value of the `k = 4` program.
pub fn k4_small_noise_closed_form(beta: f64, tau2: f64) -> f64 {
    (1.0 - tau2).powi(2) + (3.0 * tau2 + 4.0 * beta).powi(2) / (3.0 * (3.0 + 8.0 * beta))
}

/// Reference closed form for the minimum of the equality-forced `k = 4` objective.
pub fn k4_reference_minimum(beta: f64, tau2: f64, tau3: f64, sigma2: f64) -> f64 {
    let q = (3.0 * tau2 + 4.0 * beta) / (3.0 + 8.0 * beta);
    let num = (1.0 - tau2 - q - tau3 / (1.0 + 3.0 * sigma2)).powi(2);
    let den = 1.0 + 3.0 / (3.0 + 8.0 * beta) + 1.0 / sigma2 + (1.0 + sigma2) / (sigma2 * (1.0 + 3.0 * sigma2));
    k4_small_noise_closed_form(beta, tau2) + sigma2 * tau3 * tau3 / ((1.0 + sigma2) * (1.0 + 3.0 * sigma2)) - num / den
}

/// Convenience wrapper around [`K4Program::solve`].
pub fn infimum_5d_k4(beta: f64, tau2: f64, tau3: f64, sigma2: f64) -> Result<K4Solution> {
    K4Program { beta, tau2, tau3, sigma2 }.solve()
}

fn dot5(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting for tiny dense systems.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
