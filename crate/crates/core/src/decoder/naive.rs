use crate::channel::NoiseStream;
use crate::error::Result;
use crate::protocol::OneSwitchScheme;

use super::{add_terms, check_observations, phase1_terms, point_mass_terms, Decoder};

/// Treats the feedback as noiseless: rebuilds the phase-II code from the
/// receiver's own ranking of `y'` and decodes by minimum distance on the
/// concatenated code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NaiveDecoder;

impl Decoder for NaiveDecoder {
    fn log_likelihoods(
        &self,
        scheme: &OneSwitchScheme,
        y1: &[f64],
        y2: &[f64],
        _rng: &mut NoiseStream,
    ) -> Result<Vec<f64>> {
        check_observations(scheme, y1, y2)?;
        Ok(add_terms(phase1_terms(scheme, y1), &point_mass_terms(scheme, y1, y2)))
    }
}
