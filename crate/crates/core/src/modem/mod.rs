//! ODDM modem and the OTFS comparison baseline.

pub mod frame;
pub mod oddm;
pub mod otfs;

pub use frame::{DdFrame, Waveform};
pub use oddm::{
    demod_span, demodulate, digital_sequence, frame_span, modulate, modulate_filtered, reference,
};
pub use otfs::{dump_gain, isfft, otfs_demodulate, otfs_digital_sequence, otfs_modulate};
