use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channel::ChannelParams;
use crate::decoder::MixtureConfig;
use crate::error::{Error, Result};

/// Transmission/decoding strategy of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One-switch scheme with the posterior mixture decoder.
    FeedbackOneSwitch,
    /// Orthogonal code over the whole block, no feedback.
    BaselineNoFeedback,
    /// One-switch scheme decoded as if the feedback were noiseless.
    NaiveFeedback,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::FeedbackOneSwitch => "feedback_one_switch",
            Scheme::BaselineNoFeedback => "baseline_no_feedback",
            Scheme::NaiveFeedback => "naive_feedback",
        }
    }

    pub fn uses_feedback(&self) -> bool {
        !matches!(self, Scheme::BaselineNoFeedback)
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feedback_one_switch" => Ok(Scheme::FeedbackOneSwitch),
            "baseline_no_feedback" => Ok(Scheme::BaselineNoFeedback),
            "naive_feedback" => Ok(Scheme::NaiveFeedback),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

/// One Monte Carlo experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ChannelParams,
    pub scheme: Scheme,
    pub trials: u64,
    pub seed: u64,
    pub decoder: MixtureConfig,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ChannelParams::default(),
            scheme: Scheme::FeedbackOneSwitch,
            trials: 10_000,
            seed: 0,
            decoder: MixtureConfig::default(),
            output: None,
        }
    }
}

/// Flat on-disk form; keys mirror the `RunConfig` fields.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(rename = "decoder.samples", skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(rename = "decoder.oracle_points", skip_serializing_if = "Option::is_none")]
    oracle_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.decoder.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses a flat JSON object. Missing keys take their defaults; `sigma`
    /// and `sigma2` are alternative spellings of the feedback noise level.
    pub fn from_json_value(value: Value) -> Result<Self> {
        let flat: FlatConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = RunConfig::default();
        let p = &mut cfg.params;
        if let Some(v) = flat.scheme {
            cfg.scheme = v;
        }
        if let Some(v) = flat.n {
            p.n = v;
        }
        if let Some(v) = flat.m {
            p.m = v;
        }
        if let Some(v) = flat.a {
            p.a = v;
        }
        match (flat.sigma, flat.sigma2) {
            (Some(s), Some(s2)) if (s * s - s2).abs() > 1e-12 * s2.max(1.0) => {
                return Err(Error::Config(format!("sigma = {s} and sigma2 = {s2} disagree")));
            }
            (Some(s), _) => p.sigma = s,
            (None, Some(s2)) => {
                if !(s2 >= 0.0) {
                    return Err(Error::Config(format!("sigma2 must be non-negative, got {s2}")));
                }
                p.sigma = s2.sqrt();
            }
            (None, None) => {}
        }
        if let Some(v) = flat.beta {
            p.beta = v;
        }
        if let Some(v) = flat.tau2 {
            p.tau2 = v;
        }
        if let Some(v) = flat.tau3 {
            p.tau3 = v;
        }
        if let Some(v) = flat.trials {
            cfg.trials = v;
        }
        if let Some(v) = flat.seed {
            cfg.seed = v;
        }
        if let Some(v) = flat.samples {
            cfg.decoder.num_samples = v;
        }
        if let Some(v) = flat.oracle_points {
            cfg.decoder.oracle_quadrature_points = v;
        }
        cfg.output = flat.output;
        cfg.validate().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_json_value(value)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Flat JSON object with every key present.
    pub fn to_json_value(&self) -> Value {
        let p = &self.params;
        let flat = FlatConfig {
            scheme: Some(self.scheme),
            n: Some(p.n),
            m: Some(p.m),
            a: Some(p.a),
            sigma: Some(p.sigma),
            sigma2: None,
            beta: Some(p.beta),
            tau2: Some(p.tau2),
            tau3: Some(p.tau3),
            trials: Some(self.trials),
            seed: Some(self.seed),
            samples: Some(self.decoder.num_samples),
            oracle_points: Some(self.decoder.oracle_quadrature_points),
            output: self.output.clone(),
        };
        serde_json::to_value(flat).expect("flat config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json_value())?)?;
        Ok(())
    }
}

/// Overrides `base` keys with `overrides`, both flat JSON objects.
pub(crate) fn merge_flat(base: &Map<String, Value>, overrides: &[(String, Value)]) -> Map<String, Value> {
    let mut out = base.clone();
    for (k, v) in overrides {
        if k == "sigma2" {
            out.remove("sigma");
        } else if k == "sigma" {
            out.remove("sigma2");
        }
        out.insert(k.clone(), v.clone());
    }
    out
}
