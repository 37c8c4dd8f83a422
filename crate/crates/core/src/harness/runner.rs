use std::time::Instant;

use rayon::prelude::*;

use crate::channel::{NoiseStream, SessionNoise, Substream};
use crate::decoder::{Decoder, MixtureDecoder, NaiveDecoder};
use crate::error::Result;
use crate::protocol::{BaselineScheme, OneSwitchScheme, Transcript};

use super::config::{RunConfig, Scheme};
use super::stats::{clopper_pearson, ResultRow, RunStats};

enum Engine {
    OneSwitch(OneSwitchScheme, Box<dyn Decoder>),
    Baseline(BaselineScheme),
}

/// Prebuilt codes and decoder for a run configuration.
pub struct Simulator {
    config: RunConfig,
    engine: Engine,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    errors: u64,
    per_message_trials: Vec<u64>,
    per_message_errors: Vec<u64>,
    selection_counts: [u64; 3],
    coordination_failures: u64,
}

impl Tally {
    fn new(m: usize) -> Self {
        Tally { per_message_trials: vec![0; m], per_message_errors: vec![0; m], ..Default::default() }
    }

    fn add(&mut self, t: &Transcript) {
        self.per_message_trials[t.true_message] += 1;
        if !t.correct {
            self.errors += 1;
            self.per_message_errors[t.true_message] += 1;
        }
        if let Some(sel) = t.selection {
            self.selection_counts[sel.k() - 2] += 1;
            if !sel.contains(t.true_message) {
                self.coordination_failures += 1;
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.errors += other.errors;
        for (a, b) in self.per_message_trials.iter_mut().zip(other.per_message_trials) {
            *a += b;
        }
        for (a, b) in self.per_message_errors.iter_mut().zip(other.per_message_errors) {
            *a += b;
        }
        for (a, b) in self.selection_counts.iter_mut().zip(other.selection_counts) {
            *a += b;
        }
        self.coordination_failures += other.coordination_failures;
        self
    }
}

impl Simulator {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let engine = match config.scheme {
            Scheme::BaselineNoFeedback => Engine::Baseline(BaselineScheme::new(config.params)?),
            Scheme::FeedbackOneSwitch => Engine::OneSwitch(
                OneSwitchScheme::new(config.params)?,
                Box::new(MixtureDecoder::new(config.decoder)),
            ),
            Scheme::NaiveFeedback => Engine::OneSwitch(OneSwitchScheme::new(config.params)?, Box::new(NaiveDecoder)),
        };
        Ok(Simulator { config, engine })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// The feedback scheme, if this run uses one.
    pub fn scheme(&self) -> Option<&OneSwitchScheme> {
        match &self.engine {
            Engine::OneSwitch(s, _) => Some(s),
            Engine::Baseline(_) => None,
        }
    }

    /// Uniformly random true message of a trial, from its own sub-stream.
    pub fn message_for(&self, trial: u64) -> usize {
        NoiseStream::new(self.config.seed, trial, Substream::Message).uniform_index(self.config.params.m)
    }

    /// Runs one trial with caller-provided noise.
    pub fn session_with(&self, true_message: usize, noise: &mut SessionNoise) -> Result<Transcript> {
        match &self.engine {
            Engine::OneSwitch(s, d) => s.run_session(true_message, noise, d.as_ref()),
            Engine::Baseline(b) => b.run(true_message, noise),
        }
    }

    /// Runs trial `trial` of the configured seed schedule.
    pub fn session(&self, trial: u64) -> Result<Transcript> {
        let mut noise = SessionNoise::seeded(self.config.seed, trial);
        self.session_with(self.message_for(trial), &mut noise)
    }

    /// All trials with seeded noise.
    pub fn run(&self) -> Result<RunStats> {
        let seed = self.config.seed;
        self.run_with_noise(|trial| SessionNoise::seeded(seed, trial))
    }

    /// All trials with noise produced by `make_noise(trial)`.
    pub fn run_with_noise(&self, make_noise: impl Fn(u64) -> SessionNoise + Sync) -> Result<RunStats> {
        let start = Instant::now();
        let m = self.config.params.m;
        let tally = (0..self.config.trials)
            .into_par_iter()
            .try_fold(
                || Tally::new(m),
                |mut acc, trial| {
                    let mut noise = make_noise(trial);
                    let t = self.session_with(self.message_for(trial), &mut noise)?;
                    acc.add(&t);
                    Ok::<_, crate::error::Error>(acc)
                },
            )
            .try_reduce(|| Tally::new(m), |a, b| Ok(a.merge(b)))?;
        self.finish(tally, start.elapsed().as_secs_f64())
    }

    fn finish(&self, tally: Tally, wall_clock_secs: f64) -> Result<RunStats> {
        let cfg = &self.config;
        let p = &cfg.params;
        let trials = cfg.trials;
        let (ci_low, ci_high) = clopper_pearson(tally.errors, trials, 0.95)?;
        let p_hat = tally.errors as f64 / trials as f64;
        let freq = |c: u64| c as f64 / trials as f64;
        let row = ResultRow {
            scheme: cfg.scheme,
            n: p.n,
            m: p.m,
            a: p.a,
            sigma2: p.sigma2(),
            beta: p.beta,
            tau2: p.tau2,
            tau3: p.tau3,
            seed: cfg.seed,
            trials,
            errors: tally.errors,
            p_hat,
            ci_low,
            ci_high,
            exponent_hat: (tally.errors > 0).then(|| -p_hat.ln() / p.n as f64),
            k2_freq: freq(tally.selection_counts[0]),
            k3_freq: freq(tally.selection_counts[1]),
            k4_freq: freq(tally.selection_counts[2]),
            coord_fail_freq: freq(tally.coordination_failures),
        };
        Ok(RunStats {
            row,
            per_message_trials: tally.per_message_trials,
            per_message_errors: tally.per_message_errors,
            selection_counts: tally.selection_counts,
            coordination_failures: tally.coordination_failures,
            wall_clock_secs,
        })
    }
}

/// Executes every trial of `config`; deterministic given the seed.
pub fn run_trials(config: &RunConfig) -> Result<RunStats> {
    Simulator::new(config.clone())?.run()
}
