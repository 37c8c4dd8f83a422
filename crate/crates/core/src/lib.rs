//! Zero-rate transmission over an AWGN channel with passive noisy feedback.
//!
//! The crate implements a one-switch adaptive scheme: the first half of the
//! block carries an orthogonal code, the transmitter then ranks the messages
//! from its noisy copy of the channel output and spends the second half on a
//! small simplex code for the most likely candidates. Around that it provides
//! the receiver's posterior decoders, closed-form and numeric error-exponent
//! bounds, and a Monte Carlo harness.

// `!(x >= 0.0)` guards are written that way so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codebook;
pub mod decoder;
pub mod error;
pub mod exponents;
pub mod harness;
pub mod protocol;
pub(crate) mod special;

pub use channel::{ChannelParams, NoiseStream, SessionNoise, Substream};
pub use codebook::{build_orthogonal, build_phase2, build_simplex, CodeKind, Codebook, PhaseTwoCode};
pub use decoder::{Decoder, ExactDecoder, MixtureConfig, MixtureDecoder, NaiveDecoder};
pub use error::{Error, Result};
pub use exponents::{ExponentParams, ExponentReport};
pub use harness::{RunConfig, RunStats, Scheme};
pub use protocol::{GroupSelection, OneSwitchScheme, Ranking, Transcript};
