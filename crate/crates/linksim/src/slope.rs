//! Least-squares DoF estimates from rate-vs-SNR sweeps.

use std::io::Write;

use misodof_core::topology::CsitTopology;
use rayon::prelude::*;

use crate::channel::{draw_channels_with, inner, zf_direction};
use crate::sim::{db_to_linear, log2_snr, trial_rng, MessageId, SimResult, MIN_TRIALS};
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the regression residuals.
    pub stderr: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<Slope, SimError> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(SimError::InsufficientPoints(n.min(y.len())));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::InsufficientPoints(1));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(Slope {
        slope,
        intercept,
        stderr: (ssr / (nf - 2.0) / sxx).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    pub per_message: Vec<(MessageId, Slope)>,
    pub aggregate: Slope,
}

impl SlopeReport {
    pub fn message(&self, m: MessageId) -> Option<Slope> {
        self.per_message.iter().find(|(id, _)| *id == m).map(|(_, s)| *s)
    }
}

/// Slopes of mean rate against `log2 P`.
pub fn estimate_slope(result: &SimResult) -> Result<SlopeReport, SimError> {
    let x: Vec<f64> = result.snr_db.iter().map(|&d| log2_snr(d)).collect();
    let per_message = result
        .messages
        .iter()
        .enumerate()
        .map(|(m, &id)| {
            let y: Vec<f64> = result.mean_rate.iter().map(|row| row[m]).collect();
            fit_slope(&x, &y).map(|s| (id, s))
        })
        .collect::<Result<_, _>>()?;
    Ok(SlopeReport {
        per_message,
        aggregate: fit_slope(&x, &result.sum_rate)?,
    })
}

/// Mean residual leakage `|h_kj^H p|^2` of a unit precoder zero-forced on the
/// estimate of link `(rx, tx)`, at every SNR of the sweep.
pub fn measure_leakage(
    t: &CsitTopology,
    rx: usize,
    tx: usize,
    sweep_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, SimError> {
    if trials < MIN_TRIALS {
        return Err(SimError::TooFewTrials {
            got: trials,
            min: MIN_TRIALS,
        });
    }
    if rx == tx || rx >= t.k() || tx >= t.k() || t.quality(rx, tx).is_none() {
        return Err(SimError::NoSuchLink { rx, tx });
    }
    sweep_db
        .iter()
        .enumerate()
        .map(|(pi, &db)| {
            let snr = db_to_linear(db);
            let samples: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|n| {
                    let draw = draw_channels_with(t, snr, &mut trial_rng(seed, pi, n));
                    let p = zf_direction(&[draw.estimate(rx, tx).clone()], draw.estimate(tx, tx))?;
                    Ok(inner(&draw.channel(rx, tx), &p).norm_sqr())
                })
                .collect::<Result<_, SimError>>()?;
            Ok(samples.iter().sum::<f64>() / trials as f64)
        })
        .collect()
}

/// Slope of `log2` mean leakage against `log2 P`; close to `-a_kj`.
pub fn leakage_slope(
    t: &CsitTopology,
    rx: usize,
    tx: usize,
    sweep_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Slope, SimError> {
    let leak = measure_leakage(t, rx, tx, sweep_db, trials, seed)?;
    let x: Vec<f64> = sweep_db.iter().map(|&d| log2_snr(d)).collect();
    let y: Vec<f64> = leak.iter().map(|v| v.log2()).collect();
    fit_slope(&x, &y)
}

/// Columns `P_dB, user, message, mean_rate, stderr`; users are 1-based and
/// the per-SNR sum appears as user `all`, message `sum`.
pub fn write_sim_csv<W: Write>(w: W, result: &SimResult) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["P_dB", "user", "message", "mean_rate", "stderr"])?;
    for (pi, db) in result.snr_db.iter().enumerate() {
        for (m, id) in result.messages.iter().enumerate() {
            wr.write_record([
                db.to_string(),
                (id.user + 1).to_string(),
                id.to_string(),
                format!("{:.6}", result.mean_rate[pi][m]),
                format!("{:.6}", result.stderr[pi][m]),
            ])?;
        }
        wr.write_record([
            db.to_string(),
            "all".into(),
            "sum".into(),
            format!("{:.6}", result.sum_rate[pi]),
            format!("{:.6}", result.sum_stderr[pi]),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
