//! Prototype pulse design, the DD-plane pulse train and its ambiguity function.

pub mod ambiguity;
pub mod srrc;
pub mod train;

pub use ambiguity::{
    ambiguity, ambiguity_at, orthogonality_audit, AuditEntry, AuditReport, Region,
};
pub use srrc::{design_srrc, design_srrc_truncated, srrc_value, ProtoPulse, PulseDesign};
pub use train::{build_train, PulseTrain};
