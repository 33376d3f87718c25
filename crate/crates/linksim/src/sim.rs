//! Plan execution over random channels: per-message powers from the plan's
//! exponent intervals, ZF precoders on the estimates, top-down SIC.

use std::fmt;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use misodof_core::optimizer::Groupcast;
use misodof_core::packing::max_packing;
use misodof_core::plan::{build_trs_plan, private_dof, PlanKind, TrsPlan};
use misodof_core::topology::{effective_zfbf_topology, CsitTopology};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{draw_channels_with, inner, norm, zf_direction, CVec, ChannelDraw};
use crate::SimError;
use num_complex::Complex64;

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MessageId {
    /// Transmitter (0-based).
    pub user: usize,
    /// `None` for the private message, else the common layer index.
    pub layer: Option<usize>,
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            None => write!(f, "private"),
            Some(i) => write!(f, "layer{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub messages: Vec<MessageId>,
    /// `[snr][message]`, bits per channel use.
    pub mean_rate: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub sum_rate: Vec<f64>,
    pub sum_stderr: Vec<f64>,
    /// Layer indices matching the columns of `layer_sinr_db`.
    pub layers: Vec<usize>,
    /// Mean over trials of the bottleneck user's SINR per layer, in dB.
    pub layer_sinr_db: Vec<Vec<f64>>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn log2_snr(db: f64) -> f64 {
    db / 10.0 * std::f64::consts::LOG2_10
}

/// Stream sent by one transmitter.
#[derive(Debug, Clone)]
struct Stream {
    tx: usize,
    layer: Option<usize>,
    /// Exponent interval `[lo, hi]`; private streams use `[0, r]` with power `P^r`.
    lo: f64,
    hi: f64,
    /// Users that must not see this stream.
    zf_toward: Vec<usize>,
    /// Users that decode it; the precoder aims at their estimates.
    group: Vec<usize>,
}

struct Setup {
    k: usize,
    conn: Vec<Vec<bool>>,
    streams: Vec<Stream>,
    /// Per layer, top first.
    layers: Vec<LayerSetup>,
    private_users: Vec<usize>,
    active: Vec<usize>,
    messages: Vec<MessageId>,
}

struct LayerSetup {
    index: usize,
    /// `T_k` per user id.
    decode: Vec<Vec<usize>>,
    /// Transmitters sending in this layer.
    sending: Vec<usize>,
}

fn check_plan(t: &CsitTopology, plan: &TrsPlan) -> Result<(), SimError> {
    let mismatch = |why: String| Err(SimError::PlanTopologyMismatch(why));
    if plan.k != t.k() || plan.r.len() != t.k() {
        return mismatch(format!("plan is for K={}, topology has K={}", plan.k, t.k()));
    }
    if plan.active.iter().any(|k| k >= t.k()) {
        return mismatch("active user out of range".into());
    }
    if plan.kind == PlanKind::Trs {
        let eff = if t.is_fully_connected() {
            t.clone()
        } else {
            effective_zfbf_topology(t)
        };
        let rebuilt =
            build_trs_plan(&eff, &plan.active, &plan.r).map_err(|e| SimError::PlanTopologyMismatch(e.to_string()))?;
        if rebuilt.layers != plan.layers {
            return mismatch("layer structure does not follow from the topology qualities".into());
        }
    }
    Ok(())
}

fn setup(t: &CsitTopology, plan: &TrsPlan, mode: Groupcast) -> Result<Setup, SimError> {
    check_plan(t, plan)?;
    let eff = if t.is_fully_connected() {
        t.clone()
    } else {
        effective_zfbf_topology(t)
    };
    let s = &plan.active;
    let members: Vec<usize> = s.members().to_vec();
    let dp = private_dof(&eff, s, &plan.r);
    let mut streams = Vec::new();
    let mut messages = Vec::new();
    let mut private_users = Vec::new();
    for &j in &members {
        if dp[j].is_positive() {
            let zf_toward = members
                .iter()
                .copied()
                .filter(|&k| k != j && t.connected(k, j))
                .collect();
            streams.push(Stream {
                tx: j,
                layer: None,
                lo: 0.0,
                hi: plan.r.get(j).to_f64(),
                zf_toward,
                group: vec![j],
            });
            private_users.push(j);
        }
        messages.push(MessageId { user: j, layer: None });
    }
    let mut layers = Vec::new();
    for layer in plan.layers.iter().rev() {
        // orthogonal groupcasting sends only a maximum integer packing
        let enabled: Vec<bool> = match mode {
            Groupcast::Maximal => vec![true; members.len()],
            Groupcast::Orthogonal => {
                let h = layer
                    .hypergraph()
                    .map_err(|e| SimError::PlanTopologyMismatch(e.to_string()))?;
                let chosen = max_packing(&h).map_err(|e| SimError::PlanTopologyMismatch(e.to_string()))?;
                (0..members.len()).map(|p| chosen.contains(&p)).collect()
            }
        };
        let mut sending = Vec::new();
        for (p, &j) in members.iter().enumerate() {
            let (lo, hi) = plan.message_interval(j, layer.index).expect("active user");
            if enabled[p] && hi > lo {
                let group = layer.groups[p].clone();
                let zf_toward = members
                    .iter()
                    .copied()
                    .filter(|&k| k != j && !group.contains(&k) && t.connected(k, j))
                    .collect();
                streams.push(Stream {
                    tx: j,
                    layer: Some(layer.index),
                    lo: lo.to_f64(),
                    hi: hi.to_f64(),
                    zf_toward,
                    group,
                });
                sending.push(j);
            }
            messages.push(MessageId {
                user: j,
                layer: Some(layer.index),
            });
        }
        let mut decode = vec![Vec::new(); t.k()];
        for (p, &k) in members.iter().enumerate() {
            decode[k] = layer.decode_sets[p].clone();
        }
        layers.push(LayerSetup {
            index: layer.index,
            decode,
            sending,
        });
    }
    messages.sort();
    let conn = (0..t.k())
        .map(|u| (0..t.k()).map(|j| t.connected(u, j)).collect())
        .collect();
    Ok(Setup {
        k: t.k(),
        conn,
        streams,
        layers,
        private_users,
        active: members,
        messages,
    })
}

/// Precoder aimed at the sum of the group's normalized estimates, projected
/// onto the null space of the users it must avoid.
fn precoder(s: &Stream, draw: &ChannelDraw) -> Result<CVec, SimError> {
    let null: Vec<CVec> = s.zf_toward.iter().map(|&u| draw.estimate(u, s.tx).clone()).collect();
    let n = draw.k;
    let mut reference = vec![Complex64::new(0.0, 0.0); n];
    for &u in &s.group {
        let h = draw.estimate(u, s.tx);
        let len = norm(h);
        if len > 0.0 {
            reference.iter_mut().zip(h).for_each(|(r, x)| *r += x / len);
        }
    }
    zf_direction(&null, &reference).or_else(|_| zf_direction(&null, draw.estimate(s.tx, s.tx)))
}

/// Largest total rate with `sum_{j in T_k} R_j <= C_k` for every user.
fn layer_rates(sending: &[usize], rows: &[(Vec<usize>, f64)], k: usize) -> Vec<f64> {
    let mut rates = vec![0.0; k];
    if sending.is_empty() {
        return rates;
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = sending.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for (set, cap) in rows {
        let terms: Vec<_> = sending
            .iter()
            .zip(&vars)
            .filter(|(j, _)| set.contains(j))
            .map(|(_, &v)| (v, 1.0))
            .collect();
        if !terms.is_empty() {
            lp.add_constraint(terms.as_slice(), ComparisonOp::Le, *cap);
        }
    }
    let sol = lp.solve().expect("bounded: every sender decodes itself");
    for (&j, v) in sending.iter().zip(&vars) {
        rates[j] = sol[*v].max(0.0);
    }
    rates
}

/// Rates of one channel draw: per message, plus each layer's bottleneck SINR.
fn trial(setup: &Setup, draw: &ChannelDraw) -> Result<(Vec<f64>, Vec<f64>), SimError> {
    let snr = draw.snr;
    let k = setup.k;
    let mut tx_streams: Vec<(f64, CVec)> = Vec::with_capacity(setup.streams.len());
    for s in &setup.streams {
        let power = if s.layer.is_none() {
            snr.powf(s.hi)
        } else {
            snr.powf(s.hi) - snr.powf(s.lo)
        };
        tx_streams.push((power, precoder(s, draw)?));
    }
    // received power of every stream at every user
    let mut rx = vec![vec![0.0; setup.streams.len()]; k];
    for &u in &setup.active {
        let channels: Vec<Option<CVec>> = (0..k).map(|j| setup.conn[u][j].then(|| draw.channel(u, j))).collect();
        for (i, (s, (power, p))) in setup.streams.iter().zip(&tx_streams).enumerate() {
            if let Some(h) = &channels[s.tx] {
                rx[u][i] = power * inner(h, p).norm_sqr();
            }
        }
    }
    let mut rates = vec![0.0; setup.messages.len()];
    let msg_index = |m: MessageId| setup.messages.binary_search(&m).expect("known message");
    let mut sinr_out = Vec::with_capacity(setup.layers.len());
    let mut decoded = vec![vec![false; setup.streams.len()]; k];
    for layer in &setup.layers {
        let is_desired = |u: usize, s: &Stream| s.layer == Some(layer.index) && layer.decode[u].contains(&s.tx);
        let mut rows = Vec::new();
        let mut worst_sinr = f64::INFINITY;
        for &u in &setup.active {
            if !layer.sending.iter().any(|j| layer.decode[u].contains(j)) {
                continue;
            }
            let mut desired = 0.0;
            let mut noise = 1.0;
            for (i, s) in setup.streams.iter().enumerate() {
                if decoded[u][i] {
                    continue;
                }
                if is_desired(u, s) {
                    desired += rx[u][i];
                } else {
                    noise += rx[u][i];
                }
            }
            let sinr = desired / noise;
            worst_sinr = worst_sinr.min(sinr);
            rows.push((layer.decode[u].clone(), (1.0 + sinr).log2()));
        }
        for &u in &setup.active {
            for (i, s) in setup.streams.iter().enumerate() {
                if is_desired(u, s) {
                    decoded[u][i] = true;
                }
            }
        }
        let r = layer_rates(&layer.sending, &rows, k);
        for &j in &layer.sending {
            rates[msg_index(MessageId {
                user: j,
                layer: Some(layer.index),
            })] = r[j];
        }
        sinr_out.push(if worst_sinr.is_finite() {
            10.0 * worst_sinr.max(f64::MIN_POSITIVE).log10()
        } else {
            f64::NAN
        });
    }
    for &u in &setup.private_users {
        let mut desired = 0.0;
        let mut noise = 1.0;
        for (i, s) in setup.streams.iter().enumerate() {
            if decoded[u][i] {
                continue;
            }
            if s.layer.is_none() && s.tx == u {
                desired += rx[u][i];
            } else {
                noise += rx[u][i];
            }
        }
        rates[msg_index(MessageId { user: u, layer: None })] = (1.0 + desired / noise).log2();
    }
    Ok((rates, sinr_out))
}

/// Per-trial generator: the stream id encodes the SNR index and the trial,
/// so results do not depend on scheduling.
pub fn trial_rng(seed: u64, snr_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 40) | trial as u64);
    rng
}

fn mean_stderr(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = xs.clone().sum::<f64>() / nf;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Runs `trials` independent draws at every SNR of the sweep (in dB).
pub fn simulate_rates(
    t: &CsitTopology,
    plan: &TrsPlan,
    mode: Groupcast,
    sweep_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SimResult, SimError> {
    if trials < MIN_TRIALS {
        return Err(SimError::TooFewTrials {
            got: trials,
            min: MIN_TRIALS,
        });
    }
    if let Some(&bad) = sweep_db.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
        return Err(SimError::InvalidSnr(bad));
    }
    let setup = setup(t, plan, mode)?;
    let mut result = SimResult {
        snr_db: sweep_db.to_vec(),
        trials,
        messages: setup.messages.clone(),
        mean_rate: Vec::new(),
        stderr: Vec::new(),
        sum_rate: Vec::new(),
        sum_stderr: Vec::new(),
        layers: setup.layers.iter().map(|l| l.index).collect(),
        layer_sinr_db: Vec::new(),
    };
    for (pi, &db) in sweep_db.iter().enumerate() {
        let snr = db_to_linear(db);
        let runs: Vec<(Vec<f64>, Vec<f64>)> = (0..trials)
            .into_par_iter()
            .map(|n| {
                let draw = draw_channels_with(t, snr, &mut trial_rng(seed, pi, n));
                trial(&setup, &draw)
            })
            .collect::<Result<_, _>>()?;
        let (means, errs): (Vec<f64>, Vec<f64>) = (0..setup.messages.len())
            .map(|m| mean_stderr(runs.iter().map(|r| r.0[m]), trials))
            .unzip();
        let (sm, se) = mean_stderr(runs.iter().map(|r| r.0.iter().sum::<f64>()), trials);
        let sinr = (0..setup.layers.len())
            .map(|l| runs.iter().map(|r| r.1[l]).sum::<f64>() / trials as f64)
            .collect();
        result.mean_rate.push(means);
        result.stderr.push(errs);
        result.sum_rate.push(sm);
        result.sum_stderr.push(se);
        result.layer_sinr_db.push(sinr);
    }
    Ok(result)
}
