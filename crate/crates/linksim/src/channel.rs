//! Channel draws with scaled CSIT error and zero-forcing directions.

use misodof_core::topology::CsitTopology;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::SimError;

pub type CVec = Vec<Complex64>;

/// One realization of every link. Transmitters have `K` antennas. Vectors are
/// indexed `[rx][tx]`; absent links are all-zero with no quality.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub k: usize,
    pub snr: f64,
    pub estimates: Vec<Vec<CVec>>,
    pub errors: Vec<Vec<CVec>>,
    pub quality: Vec<Vec<Option<f64>>>,
}

impl ChannelDraw {
    /// True channel `h = h_hat + h_err`.
    pub fn channel(&self, rx: usize, tx: usize) -> CVec {
        self.estimates[rx][tx]
            .iter()
            .zip(&self.errors[rx][tx])
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn estimate(&self, rx: usize, tx: usize) -> &CVec {
        &self.estimates[rx][tx]
    }
}

fn cn(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

fn cn_vec(rng: &mut impl Rng, n: usize, variance: f64) -> CVec {
    (0..n).map(|_| cn(rng, variance)).collect()
}

/// Draws estimates `CN(0, I)` and errors with per-entry variance `P^-a_kj`.
/// Direct links are known perfectly.
pub fn draw_channels_with(t: &CsitTopology, snr: f64, rng: &mut impl Rng) -> ChannelDraw {
    let k = t.k();
    let mut estimates = vec![vec![Vec::new(); k]; k];
    let mut errors = vec![vec![Vec::new(); k]; k];
    let mut quality = vec![vec![None; k]; k];
    for rx in 0..k {
        for tx in 0..k {
            if !t.connected(rx, tx) {
                estimates[rx][tx] = vec![Complex64::new(0.0, 0.0); k];
                errors[rx][tx] = vec![Complex64::new(0.0, 0.0); k];
                continue;
            }
            estimates[rx][tx] = cn_vec(rng, k, 1.0);
            match t.quality(rx, tx) {
                Some(a) => {
                    let a = a.to_f64();
                    quality[rx][tx] = Some(a);
                    errors[rx][tx] = cn_vec(rng, k, snr.powf(-a));
                }
                None => errors[rx][tx] = vec![Complex64::new(0.0, 0.0); k],
            }
        }
    }
    ChannelDraw {
        k,
        snr,
        estimates,
        errors,
        quality,
    }
}

/// Deterministic draw for `seed`.
pub fn draw_channels(t: &CsitTopology, snr: f64, seed: u64) -> Result<ChannelDraw, SimError> {
    if !(snr > 1.0) {
        return Err(SimError::InvalidSnr(snr));
    }
    Ok(draw_channels_with(t, snr, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

const RANK_TOL: f64 = 1e-9;

/// Unit vector orthogonal to every vector in `null`, obtained by projecting
/// `reference` onto their orthogonal complement (modified Gram-Schmidt with
/// one reorthogonalization pass).
pub fn zf_direction(null: &[CVec], reference: &[Complex64]) -> Result<CVec, SimError> {
    let n = reference.len();
    if null.len() >= n {
        return Err(SimError::DegenerateNullSpace(format!(
            "{} vectors to null with {n} antennas",
            null.len()
        )));
    }
    let mut basis: Vec<CVec> = Vec::with_capacity(null.len());
    for v in null {
        if v.len() != n {
            return Err(SimError::DegenerateNullSpace(format!(
                "vector of length {} with {n} antennas",
                v.len()
            )));
        }
        let scale = norm(v);
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let len = norm(&w);
        if scale == 0.0 || len <= RANK_TOL * scale {
            return Err(SimError::DegenerateNullSpace(
                "vectors to null are linearly dependent".into(),
            ));
        }
        basis.push(w.into_iter().map(|x| x / len).collect());
    }
    let scale = norm(reference);
    let mut p = reference.to_vec();
    for _ in 0..2 {
        for q in &basis {
            let c = inner(q, &p);
            p.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    let len = norm(&p);
    if scale == 0.0 || len <= RANK_TOL * scale {
        return Err(SimError::DegenerateNullSpace(
            "reference direction lies in the nulled span".into(),
        ));
    }
    Ok(p.into_iter().map(|x| x / len).collect())
}
