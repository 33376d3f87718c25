//! Topological rate-splitting plans: power layers cut at the CSIT quality
//! values above `r0`, per-layer decode sets and group sets, and the layer
//! DoF constraint systems.

use std::fmt;

use crate::packing::{Hypergraph, PackingError};
use crate::rational::Rational;
use crate::topology::{ActiveSet, CsitTopology, PowerPolicy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("NotFullyConnectedOverS: users of {0} are not mutually connected")]
    NotFullyConnectedOverS(ActiveSet),
    #[error("PolicyLength: policy has {got} entries, expected K={expected}")]
    PolicyLength { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanKind {
    /// Layered groupcasting.
    Trs,
    /// One common layer decoded by every active user.
    RateSplitting,
    /// Private messages only.
    ZeroForcing,
}

/// One common power layer. Per-user vectors are indexed by position in the
/// active set; their contents are user ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    /// Layer number `i`, starting at 2 (layer 1 is the private layer).
    pub index: usize,
    pub lower: Rational,
    pub upper: Rational,
    /// `T_k^i`: transmitters whose layer message user `k` decodes.
    pub decode_sets: Vec<Vec<usize>>,
    /// `R_k^i`: users that decode transmitter `k`'s layer message.
    pub groups: Vec<Vec<usize>>,
    /// `m_kj = 1` iff user `k` decodes transmitter `j`'s message.
    pub matrix: Vec<Vec<bool>>,
}

impl Layer {
    pub fn width(&self) -> Rational {
        self.upper - self.lower
    }

    pub fn hypergraph(&self) -> Result<Hypergraph, PackingError> {
        Hypergraph::from_matrix(&self.matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrsPlan {
    pub kind: PlanKind,
    pub k: usize,
    pub active: ActiveSet,
    pub r: PowerPolicy,
    pub r0: Rational,
    /// `a_pi(1) < ... < a_pi(L)` followed by 1.
    pub thresholds: Vec<Rational>,
    pub layers: Vec<Layer>,
}

impl TrsPlan {
    /// Number of distinct quality thresholds `L`.
    pub fn num_thresholds(&self) -> usize {
        self.thresholds.len().saturating_sub(1)
    }

    /// Power exponent interval of transmitter `k`'s message in layer
    /// `index`. The bottom layer starts at the transmitter's own `r_k`.
    pub fn message_interval(&self, k: usize, index: usize) -> Option<(Rational, Rational)> {
        let layer = self.layers.iter().find(|l| l.index == index)?;
        if !self.active.contains(k) {
            return None;
        }
        let lo = if index == 2 { self.r.get(k) } else { layer.lower };
        Some((lo, layer.upper))
    }
}

fn layer_for(t: &CsitTopology, s: &ActiveSet, index: usize, lower: Rational, upper: Rational) -> Layer {
    let below = |rx: usize, tx: usize| rx == tx || t.quality(rx, tx).is_some_and(|a| a < upper);
    let members = s.members();
    let matrix: Vec<Vec<bool>> = members
        .iter()
        .map(|&k| members.iter().map(|&j| below(k, j)).collect())
        .collect();
    let decode_sets = members
        .iter()
        .map(|&k| members.iter().copied().filter(|&j| below(k, j)).collect())
        .collect();
    let groups = members
        .iter()
        .map(|&j| members.iter().copied().filter(|&k| below(k, j)).collect())
        .collect();
    Layer {
        index,
        lower,
        upper,
        decode_sets,
        groups,
        matrix,
    }
}

/// Decode matrix over `s` for a layer whose upper edge is `upper`.
pub fn decode_matrix(t: &CsitTopology, s: &ActiveSet, upper: Rational) -> Vec<Vec<bool>> {
    layer_for(t, s, 0, Rational::ZERO, upper).matrix
}

fn check(t: &CsitTopology, s: &ActiveSet, r: &PowerPolicy) -> Result<(), PlanError> {
    if !t.fully_connected_over(s) {
        return Err(PlanError::NotFullyConnectedOverS(s.clone()));
    }
    if r.len() != t.k() {
        return Err(PlanError::PolicyLength {
            got: r.len(),
            expected: t.k(),
        });
    }
    Ok(())
}

/// Builds the TRS plan. Qualities equal to 1 never become thresholds, since
/// the top layer already ends at 1.
pub fn build_trs_plan(t: &CsitTopology, s: &ActiveSet, r: &PowerPolicy) -> Result<TrsPlan, PlanError> {
    check(t, s, r)?;
    let r0 = r.max_over(s);
    let mut thresholds: Vec<Rational> = s
        .iter()
        .flat_map(|k| s.iter().filter(move |&j| j != k).map(move |j| (k, j)))
        .map(|(k, j)| t.a(k, j))
        .filter(|&a| a > r0 && a < Rational::ONE)
        .collect();
    thresholds.sort();
    thresholds.dedup();
    thresholds.push(Rational::ONE);
    let mut layers = Vec::with_capacity(thresholds.len());
    let mut lower = r0;
    for (i, &upper) in thresholds.iter().enumerate() {
        layers.push(layer_for(t, s, i + 2, lower, upper));
        lower = upper;
    }
    Ok(TrsPlan {
        kind: PlanKind::Trs,
        k: t.k(),
        active: s.clone(),
        r: r.clone(),
        r0,
        thresholds,
        layers,
    })
}

/// Single multicast layer over `[r0, 1]`.
pub fn rate_splitting_plan(t: &CsitTopology, s: &ActiveSet, r: &PowerPolicy) -> Result<TrsPlan, PlanError> {
    check(t, s, r)?;
    let r0 = r.max_over(s);
    let n = s.len();
    let members = s.members().to_vec();
    let layer = Layer {
        index: 2,
        lower: r0,
        upper: Rational::ONE,
        decode_sets: vec![members.clone(); n],
        groups: vec![members; n],
        matrix: vec![vec![true; n]; n],
    };
    Ok(TrsPlan {
        kind: PlanKind::RateSplitting,
        k: t.k(),
        active: s.clone(),
        r: r.clone(),
        r0,
        thresholds: vec![Rational::ONE],
        layers: vec![layer],
    })
}

/// Private messages only.
pub fn zero_forcing_plan(t: &CsitTopology, s: &ActiveSet, r: &PowerPolicy) -> Result<TrsPlan, PlanError> {
    check(t, s, r)?;
    Ok(TrsPlan {
        kind: PlanKind::ZeroForcing,
        k: t.k(),
        active: s.clone(),
        r: r.clone(),
        r0: r.max_over(s),
        thresholds: vec![],
        layers: vec![],
    })
}

/// `d_k = (r_k - max_{j in S\k} (r_j - a_kj)^+)^+` for `k` in `S`, else 0.
/// An absent link behaves like quality 1.
pub fn private_dof(t: &CsitTopology, s: &ActiveSet, r: &PowerPolicy) -> Vec<Rational> {
    let mut d = vec![Rational::ZERO; t.k()];
    for k in s.iter() {
        let worst = s
            .iter()
            .filter(|&j| j != k)
            .map(|j| (r.get(j) - t.quality(k, j).unwrap_or(Rational::ONE)).pos())
            .max()
            .unwrap_or(Rational::ZERO);
        d[k] = (r.get(k) - worst).pos();
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsVariant {
    /// Layer-2 rows use `a_pi(1) - r0`.
    InnerBound,
    /// Layer-2 row of user k uses `a_pi(1) - max{r_k, max_j r_j - a_kj}`.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerRow {
    pub user: usize,
    /// Transmitters whose layer DoF appear in the row sum.
    pub messages: Vec<usize>,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSystem {
    pub index: usize,
    pub rows: Vec<LayerRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerConstraintSystem {
    /// Upper bounds on private DoF, one per user.
    pub private: Vec<Rational>,
    pub layers: Vec<LayerSystem>,
}

impl LayerConstraintSystem {
    /// Checks per-layer message DoF `d[layer][user]` (full-length vectors).
    pub fn admits(&self, layer_dof: &[Vec<Rational>]) -> bool {
        self.layers.iter().zip(layer_dof).all(|(sys, d)| {
            d.iter().all(|x| !x.is_negative())
                && sys
                    .rows
                    .iter()
                    .all(|row| row.messages.iter().map(|&j| d[j]).sum::<Rational>() <= row.rhs)
        })
    }
}

pub fn trs_constraint_systems(t: &CsitTopology, plan: &TrsPlan, variant: RhsVariant) -> LayerConstraintSystem {
    let s = &plan.active;
    let private = private_dof(t, s, &plan.r);
    let layers = plan
        .layers
        .iter()
        .map(|layer| {
            let rows = s
                .iter()
                .enumerate()
                .map(|(pos, k)| {
                    let rhs = if layer.index == 2 && variant == RhsVariant::Exact {
                        let floor = s
                            .iter()
                            .filter(|&j| j != k)
                            .map(|j| plan.r.get(j) - t.quality(k, j).unwrap_or(Rational::ONE))
                            .fold(plan.r.get(k), Rational::max);
                        layer.upper - floor
                    } else {
                        layer.width()
                    };
                    LayerRow {
                        user: k,
                        messages: layer.decode_sets[pos].clone(),
                        rhs,
                    }
                })
                .collect();
            LayerSystem {
                index: layer.index,
                rows,
            }
        })
        .collect();
    LayerConstraintSystem { private, layers }
}

/// `(layer width, M^i)` for every common layer; weights sum to `1 - r0`.
pub fn weighted_decomposition(plan: &TrsPlan) -> Vec<(Rational, Vec<Vec<bool>>)> {
    plan.layers.iter().map(|l| (l.width(), l.matrix.clone())).collect()
}

fn user_list(v: &[usize]) -> String {
    let s: Vec<String> = v.iter().map(|u| (u + 1).to_string()).collect();
    format!("{{{}}}", s.join(","))
}

impl fmt::Display for TrsPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind: {:?}", self.kind)?;
        writeln!(f, "S: {}", self.active)?;
        writeln!(f, "r: {}", self.r)?;
        writeln!(f, "r0: {}", self.r0)?;
        let th: Vec<String> = self.thresholds.iter().map(|x| x.to_string()).collect();
        writeln!(f, "thresholds: [{}]", th.join(", "))?;
        for k in self.active.iter() {
            writeln!(f, "layer 1 user {}: private exponent {}", k + 1, self.r.get(k))?;
        }
        for layer in &self.layers {
            writeln!(
                f,
                "layer {}: [{}, {}] width {}",
                layer.index,
                layer.lower,
                layer.upper,
                layer.width()
            )?;
            for (pos, k) in self.active.iter().enumerate() {
                let (lo, hi) = self.message_interval(k, layer.index).expect("active user");
                let row: String = layer.matrix[pos].iter().map(|&b| if b { '1' } else { '0' }).collect();
                writeln!(
                    f,
                    "  user {}: power [{}, {}] T={} R={} M={}",
                    k + 1,
                    lo,
                    hi,
                    user_list(&layer.decode_sets[pos]),
                    user_list(&layer.groups[pos]),
                    row
                )?;
            }
        }
        Ok(())
    }
}
