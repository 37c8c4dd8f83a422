//! Closed-form error-exponent bounds of the one-switch scheme and numeric
//! checks of the constrained programs behind them.
//!
//! Case coefficients are in units of `A1` (per-block phase-I energy); the
//! overall exponent is also reported per channel use.

pub mod infimum;
pub mod tail;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use infimum::{
    infimum_2d, infimum_5d_k4, infimum_reduced, k4_reference_minimum, k4_small_noise_closed_form, Branch, Infimum,
    K4Program, K4Solution, ReducedSet,
};
pub use tail::{gaussian_tail_numeric, joint_tail_bound, tail_bound};

/// `E(A) = A/4`, zero-rate exponent without feedback.
pub fn exponent_no_feedback(a: f64) -> f64 {
    a / 4.0
}

/// `F(A, 0) = A/2`, zero-rate exponent with noiseless feedback.
pub fn exponent_noiseless_feedback(a: f64) -> f64 {
    a / 2.0
}

/// Lower bound `A (1 - sigma^2) / 3` on the one-switch exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBound {
    pub value: f64,
    /// Set when `sigma^2 > 1`, where the bound carries no information.
    pub vacuous: bool,
}

pub fn exponent_theorem(a: f64, sigma2: f64) -> TheoremBound {
    if sigma2 > 1.0 {
        TheoremBound { value: 0.0, vacuous: true }
    } else {
        TheoremBound { value: a * (1.0 - sigma2) / 3.0, vacuous: false }
    }
}

pub fn tau2_window() -> (f64, f64) {
    (((5.0f64 / 3.0).sqrt() - 1.0) / 2.0, (15.0 - 105f64.sqrt()) / 30.0)
}

pub fn tau3_lower() -> f64 {
    ((7.0f64 / 6.0).sqrt() - 1.0) / 2.0
}

/// Parameters of the exponent analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub beta: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub sigma2: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

/// Independent window checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowFlags {
    pub tau2: bool,
    pub tau3: bool,
    pub sigma2: bool,
    pub beta: bool,
}

impl WindowFlags {
    pub fn all(&self) -> bool {
        self.tau2 && self.tau3 && self.sigma2 && self.beta
    }
}

impl ExponentParams {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.beta, self.tau2, self.tau3, self.sigma2, self.a];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("exponent parameters must be finite"));
        }
        if self.beta <= 0.0 || self.a <= 0.0 {
            return Err(Error::domain("beta and A must be positive"));
        }
        if self.tau2 < 0.0 || self.tau3 < 0.0 || self.sigma2 < 0.0 {
            return Err(Error::domain("thresholds and sigma2 must be non-negative"));
        }
        Ok(())
    }

    pub fn windows(&self) -> WindowFlags {
        let (lo2, hi2) = tau2_window();
        WindowFlags {
            tau2: (lo2..=hi2).contains(&self.tau2),
            tau3: self.tau3 >= tau3_lower() && self.tau3 <= 1.0 - self.tau2,
            sigma2: self.sigma2 <= 1.0,
            beta: self.beta <= 0.5,
        }
    }
}

/// Coefficient of the pair case: `(1 + 2 beta) / 4`.
pub fn case_k2(beta: f64) -> f64 {
    (1.0 + 2.0 * beta) / 4.0
}

/// Finite-`A1` forms of the pair case before the prefactor is dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteCorrections {
    /// `exp(-[A1 + 2 A2 - ln 3]_+^2 / (4 (A1 + 2 A2)))`
    pub k2_tail: f64,
    /// `sqrt(3) exp(-A1 (1 + 2 beta) / 4)`
    pub k2_prefactor_form: f64,
    pub k2_prefactor: f64,
    /// Threshold shift in the generic case split.
    pub log_shift: f64,
}

pub fn finite_corrections(a1: f64, beta: f64) -> FiniteCorrections {
    let e = a1 * (1.0 + 2.0 * beta);
    let num = (e - 3f64.ln()).max(0.0);
    FiniteCorrections {
        k2_tail: (-num * num / (4.0 * e)).exp(),
        k2_prefactor_form: 3f64.sqrt() * (-e / 4.0).exp(),
        k2_prefactor: 3f64.sqrt(),
        log_shift: 4f64.ln(),
    }
}

/// The `k = 0` case: combined coefficient and its three branches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseK0 {
    pub combined: f64,
    pub s2: f64,
    pub s3: f64,
    /// Holds for any `sigma`, hence no `(1 - sigma^2)` factor.
    pub s4: f64,
}

pub fn case_k0(beta: f64, tau2: f64, tau3: f64, sigma2: f64) -> CaseK0 {
    let m = ((1.0 + 2.0 * tau2).powi(2) / (3.0 + 4.0 * beta))
        .min((1.0 + 2.0 * tau3).powi(2) / (2.0 + 3.0 * beta))
        .min(1.0 / 3.0);
    let f = 1.0 - sigma2;
    CaseK0 {
        combined: (1.0 + beta) / 4.0 * (1.0 + m) * f,
        s2: (1.0 + beta) * (1.0 + beta + tau2 + tau2 * tau2) / (3.0 + 4.0 * beta) * f,
        s3: (1.0 + beta) * f * (2.0 + 3.0 * beta + (1.0 + 2.0 * tau3).powi(2)) / (4.0 * (2.0 + 3.0 * beta)),
        s4: 2.0 * (1.0 + beta).powi(2) / (5.0 + 8.0 * beta),
    }
}

/// The `k = 3` case: full coefficient and the floor `(1 + beta) / 3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseK3 {
    pub full: f64,
    pub floor: f64,
}

pub fn case_k3(beta: f64, tau2: f64, sigma2: f64) -> CaseK3 {
    let u = 1.0 - tau2;
    CaseK3 {
        full: 0.25 * ((2.0 + 3.0 * beta) / 2.0 + (u + u * u) / (1.0 + sigma2)),
        floor: (1.0 + beta) / 3.0,
    }
}

/// `f4(beta, tau2) = (3 + 4b)(3 + 4b - 6 tau2 + 6 tau2^2) / (6 (3 + 8b))`.
pub fn f4(beta: f64, tau2: f64) -> f64 {
    let c = 3.0 + 4.0 * beta;
    c * (c - 6.0 * tau2 + 6.0 * tau2 * tau2) / (6.0 * (3.0 + 8.0 * beta))
}

/// Coefficient of the four-message case: `f4 (1 - sigma^2)`.
pub fn case_k4(beta: f64, tau2: f64, sigma2: f64) -> f64 {
    f4(beta, tau2) * (1.0 - sigma2)
}

/// Numeric check of one two-dimensional branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCheck {
    /// Infimum over the original set.
    pub numeric: f64,
    /// Infimum over the reduced set.
    pub reduced_numeric: f64,
    /// `B^2 + a^2 - a^2/(2 B eps)`; `None` when `B <= 0`.
    pub closed_form: Option<f64>,
    /// Twice the branch coefficient.
    pub simplified: f64,
}

impl BranchCheck {
    pub fn dominates(&self, slack: f64) -> bool {
        let closed_ok = self.closed_form.is_some_and(|c| self.numeric >= c - slack && c >= self.simplified - slack);
        closed_ok && self.numeric >= self.simplified - slack
    }

    pub fn gap(&self) -> Option<f64> {
        self.closed_form.map(|c| self.numeric - c)
    }
}

/// Numeric check of the four-message program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K4Check {
    pub solution: K4Solution,
    /// `2 f4 (1 - sigma^2)`.
    pub bound: f64,
    pub reference_minimum: f64,
    pub small_noise_closed_form: f64,
}

impl K4Check {
    pub fn dominates(&self, slack: f64) -> bool {
        self.solution.value >= self.bound - slack
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericChecks {
    pub s2: BranchCheck,
    pub s3: BranchCheck,
    pub k4: K4Check,
}

/// All closed-form coefficients for one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub params: ExponentParams,
    pub windows: WindowFlags,
    pub e_k2: f64,
    pub e_k0: f64,
    pub e_s2: f64,
    pub e_s3: f64,
    pub e_s4: f64,
    pub e_k3: f64,
    pub e_k3_floor: f64,
    pub e_k4: f64,
    /// `(1 - sigma^2) min{(1+b)/3, (1+2b)/4, f4}` in units of `A1`.
    pub overall: f64,
    /// Smallest of the four case coefficients.
    pub case_minimum: f64,
    /// Overall exponent per channel use: `A/(1+b)` times `overall`.
    pub overall_per_n: f64,
    pub theorem: TheoremBound,
    /// Finite-block diagnostics, filled in when a block length is known.
    pub corrections: Option<FiniteCorrections>,
    pub numeric: Option<NumericChecks>,
}

/// Closed-form assembly. Window violations are reported, not fatal.
pub fn overall(params: &ExponentParams) -> Result<ExponentReport> {
    params.validate()?;
    let ExponentParams { beta, tau2, tau3, sigma2, a } = *params;
    let k0 = case_k0(beta, tau2, tau3, sigma2);
    let k3 = case_k3(beta, tau2, sigma2);
    let e_k2 = case_k2(beta);
    let e_k4 = case_k4(beta, tau2, sigma2);
    let overall = (1.0 - sigma2) * ((1.0 + beta) / 3.0).min(case_k2(beta)).min(f4(beta, tau2));
    Ok(ExponentReport {
        params: *params,
        windows: params.windows(),
        e_k2,
        e_k0: k0.combined,
        e_s2: k0.s2,
        e_s3: k0.s3,
        e_s4: k0.s4,
        e_k3: k3.full,
        e_k3_floor: k3.floor,
        e_k4,
        overall,
        case_minimum: e_k2.min(k0.combined).min(k3.full).min(e_k4),
        overall_per_n: a / (1.0 + beta) * overall,
        theorem: exponent_theorem(a, sigma2),
        corrections: None,
        numeric: None,
    })
}

/// Closed forms plus the numeric infima of the three programs.
pub fn verify(params: &ExponentParams) -> Result<ExponentReport> {
    let mut report = overall(params)?;
    let ExponentParams { beta, tau2, tau3, sigma2, .. } = *params;
    let branch = |b: Branch, tau: f64, simplified: f64| -> Result<BranchCheck> {
        let set = ReducedSet::for_branch(b, beta, tau, sigma2);
        Ok(BranchCheck {
            numeric: infimum_2d(b, beta, tau, sigma2)?.value,
            reduced_numeric: infimum_reduced(&set)?.value,
            closed_form: set.closed_form_bound(),
            simplified,
        })
    };
    let s2 = branch(Branch::S2, tau2, 2.0 * report.e_s2)?;
    let s3 = branch(Branch::S3, tau3, 2.0 * report.e_s3)?;
    let k4 = K4Check {
        solution: infimum_5d_k4(beta, tau2, tau3, sigma2)?,
        bound: 2.0 * report.e_k4,
        reference_minimum: k4_reference_minimum(beta, tau2, tau3, sigma2),
        small_noise_closed_form: k4_small_noise_closed_form(beta, tau2),
    };
    report.numeric = Some(NumericChecks { s2, s3, k4 });
    Ok(report)
}
