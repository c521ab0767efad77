//! Compares the waveform pipeline against the DD-domain matrix model.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::apply;
use crate::config::Config;
use crate::ddmatrix::{build, DENSE_LIMIT};
use crate::dsp::max_abs_diff;
use crate::error::Result;
use crate::harness::{
    derive_seed, draw_channel, load_fixed_channel, write_csv, ExperimentKind, Outcome, Setup,
};
use crate::modem::{demodulate, modulate, DdFrame};

/// Tolerance between the dense export, the CSR view and the block matvec.
pub const VIEW_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MatrixCheckReport {
    /// Worst pipeline error per trial.
    pub trial_err: Vec<f64>,
    /// Worst pipeline error per `(m, n)` over all trials, row-major.
    pub cell_err: Vec<f64>,
    /// Worst disagreement between matrix views; `None` above the dense cap.
    pub view_err: Option<f64>,
}

impl MatrixCheckReport {
    pub fn max_err(&self) -> f64 {
        self.trial_err.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs `cfg.trials` noiseless channel draws and passes when
/// `max |Y_pipeline - H x| ≤ cfg.matrix_tol`. The residue comes from the
/// Doppler-wrap terms and falls roughly as `1/M²`. Writes `matrix_check.csv`
/// (`m,n,err`) and `matrix_trials.csv` (`trial,err`).
pub fn run_matrix_check(cfg: &Config, out: &Path) -> Result<(MatrixCheckReport, Outcome)> {
    let setup = Setup::new(cfg)?;
    let p = &setup.params;
    let fixed = load_fixed_channel(cfg)?;
    let dim = p.grid_len();
    let per_trial: Vec<(Vec<f64>, Option<f64>)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0x3a7, t]));
            let ch = draw_channel(cfg, p, fixed.as_ref(), &mut rng)?;
            let (frame, _) = DdFrame::random_qam(p, &setup.qam, &mut rng);
            let x = modulate(&frame, &setup.ucp, p)?;
            let y = demodulate(&apply(&x, &ch, p, None)?, &setup.u, p)?;
            let h = build(&ch, p)?;
            let hx = h.matvec(frame.as_slice())?;
            let err: Vec<f64> = y
                .as_slice()
                .iter()
                .zip(&hx)
                .map(|(a, b)| (a - b).norm())
                .collect();
            let view = if dim <= DENSE_LIMIT {
                let dense = h.to_dense()?;
                let dx = &dense * nalgebra::DVector::from_column_slice(frame.as_slice());
                let sx = h.sparse_rows().matvec(frame.as_slice());
                Some(max_abs_diff(dx.as_slice(), &hx).max(max_abs_diff(&sx, &hx)))
            } else {
                None
            };
            Ok((err, view))
        })
        .collect::<Result<_>>()?;

    let mut cell_err = vec![0.0f64; dim];
    let mut trial_err = Vec::with_capacity(per_trial.len());
    let mut view_err: Option<f64> = None;
    for (err, view) in &per_trial {
        for (c, e) in cell_err.iter_mut().zip(err) {
            *c = c.max(*e);
        }
        trial_err.push(err.iter().copied().fold(0.0, f64::max));
        if let Some(v) = view {
            view_err = Some(view_err.unwrap_or(0.0).max(*v));
        }
    }
    let rep = MatrixCheckReport {
        trial_err,
        cell_err,
        view_err,
    };

    let n = p.n;
    let f1 = write_csv(
        out,
        "matrix_check.csv",
        "m,n,err",
        rep.cell_err
            .iter()
            .enumerate()
            .map(|(i, e)| format!("{},{},{:e}", i / n, i % n, e)),
    )?;
    let f2 = write_csv(
        out,
        "matrix_trials.csv",
        "trial,err",
        rep.trial_err
            .iter()
            .enumerate()
            .map(|(t, e)| format!("{t},{e:e}")),
    )?;
    let passed = rep.max_err() <= cfg.matrix_tol && rep.view_err.is_none_or(|v| v <= VIEW_TOL);
    let mut o = Outcome::new(ExperimentKind::MatrixCheck, passed);
    o.metric("trials", cfg.trials);
    o.metric("max_err", format!("{:e}", rep.max_err()));
    o.metric(
        "view_err",
        rep.view_err
            .map_or("skipped".to_string(), |v| format!("{v:e}")),
    );
    o.files.extend([f1, f2]);
    Ok((rep, o))
}
