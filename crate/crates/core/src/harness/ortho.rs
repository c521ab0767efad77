//! Orthogonality audit of the receive pulse train over the DD grid.

use std::path::Path;

use crate::config::Config;
use crate::error::Result;
use crate::harness::{write_csv, ExperimentKind, Outcome, Setup};
use crate::pulse::{orthogonality_audit, AuditReport};

/// Exact-region tolerance on `|A(mT/M, n/(NT))|`.
pub const EXACT_TOL: f64 = 1e-6;
/// Tolerance on `|A(0, 0) - 1|`.
pub const ORIGIN_TOL: f64 = 1e-10;

/// Writes `ortho.csv` (`m,n,re,im,abs,region`) and passes when the origin is
/// one, the exact region is below [`EXACT_TOL`] and the wrap region below
/// `cfg.wrap_tol`.
pub fn run_ortho(cfg: &Config, out: &Path) -> Result<(AuditReport, Outcome)> {
    let setup = Setup::new(cfg)?;
    let rep = orthogonality_audit(&setup.u, &setup.params)?;
    let file = write_csv(
        out,
        "ortho.csv",
        "m,n,re,im,abs,region",
        rep.entries.iter().map(|e| {
            format!(
                "{},{},{:e},{:e},{:e},{}",
                e.m,
                e.n,
                e.value.re,
                e.value.im,
                e.value.norm(),
                e.region.as_str()
            )
        }),
    )?;
    let origin_err = (rep.origin - 1.0).norm();
    let passed =
        origin_err <= ORIGIN_TOL && rep.exact_max <= EXACT_TOL && rep.wrap_max <= cfg.wrap_tol;
    let mut o = Outcome::new(ExperimentKind::Ortho, passed);
    o.metric("origin_error", format!("{origin_err:e}"));
    o.metric("exact_max", format!("{:e}", rep.exact_max));
    o.metric("wrap_max", format!("{:e}", rep.wrap_max));
    if let Some(w) = rep.worst.first() {
        o.metric(
            "worst",
            format!("m={} n={} |A|={:e}", w.m, w.n, w.value.norm()),
        );
    }
    o.files.push(file);
    Ok((rep, o))
}
