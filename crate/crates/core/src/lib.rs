//! Orthogonal delay-Doppler division multiplexing (ODDM) simulation.
//!
//! Conventions shared by every module are documented in [`params`].

pub mod channel;
pub mod config;
pub mod ddmatrix;
pub mod detector;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod modem;
pub mod params;
pub mod pulse;
pub mod qam;

pub use channel::{DdChannel, DdPath, NoiseSpec};
pub use config::Config;
pub use ddmatrix::DdChannelMatrix;
pub use error::{Error, Result};
pub use modem::{DdFrame, Waveform};
pub use params::{GridParams, ResolutionReport};
pub use pulse::{ProtoPulse, PulseTrain};
pub use qam::QamConstellation;
