//! Sum-DoF maximization for ZFBF, RS and TRS, closed forms for cyclic
//! topologies, and scheme comparison reports.
//!
//! ZFBF and RS maximize the region LP over every private user set `U`.
//! For TRS, the common-layer contribution is piecewise linear in
//! `r0 = max_k r_k` with breakpoints at the quality values of `S`, and the
//! best private sum for a given `r0` is an LP over the RS-type system with
//! `d_c = 1 - r0`. Each (S, U, interval) is therefore one exact LP in
//! `(d, r0)`; the maximizing `r` is recovered with the potential test and
//! re-evaluated through the plan.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::lp::{solve_max, LinearProgram, LpStatus};
use crate::packing::{fractional_packing_number, packing_number, Hypergraph, PackingError};
use crate::plan::{build_trs_plan, decode_matrix, private_dof, PlanError};
use crate::rational::Rational;
use crate::region::{build_region, potential_test, Feasibility, LinearRegion, RegionError, SupportBounds};
use crate::topology::{classify_realistic, effective_zfbf_topology, ActiveSet, CsitTopology, PowerPolicy};

pub const DEFAULT_MAX_USERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizerError {
    #[error("SizeBound: K={k} exceeds the subset enumeration bound {bound}")]
    SizeBound { k: usize, bound: usize },
    #[error("NotFullyConnected: RS regions are not defined for partially connected networks")]
    NotFullyConnected,
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("InvalidOrder: a={a} > b={b}")]
    InvalidOrder { a: Rational, b: Rational },
    #[error("ClosedFormMismatch: {name}: closed form {closed_form}, computed {computed}")]
    ClosedFormMismatch {
        name: String,
        closed_form: Rational,
        computed: Rational,
    },
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Packing(#[from] PackingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Zfbf,
    Rs,
    TrsOrth,
    TrsMax,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Zfbf, Scheme::Rs, Scheme::TrsOrth, Scheme::TrsMax];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Zfbf => "zfbf",
            Scheme::Rs => "rs",
            Scheme::TrsOrth => "trs-orth",
            Scheme::TrsMax => "trs-max",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How each common layer is shared among its messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Groupcast {
    /// Integer packing: each layer message gets all or nothing.
    Orthogonal,
    /// Fractional packing.
    Maximal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    /// Extra exponent breakpoints in `[0, 1]`. The search is exact without
    /// them; they only subdivide the `r0` intervals.
    pub extra_exponents: Vec<Rational>,
    /// Largest `K` for which subsets are enumerated.
    pub max_users: usize,
    pub zfbf: bool,
    pub rs: bool,
    pub trs_orth: bool,
    pub trs_max: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            extra_exponents: Vec::new(),
            max_users: DEFAULT_MAX_USERS,
            zfbf: true,
            rs: true,
            trs_orth: true,
            trs_max: true,
        }
    }
}

impl SweepConfig {
    fn check(&self, k: usize) -> Result<(), OptimizerError> {
        if let Some(x) = self
            .extra_exponents
            .iter()
            .find(|x| x.is_negative() || **x > Rational::ONE)
        {
            return Err(OptimizerError::InvalidConfig(format!("exponent {x} outside [0, 1]")));
        }
        if k > self.max_users || k > 20 {
            return Err(OptimizerError::SizeBound {
                k,
                bound: self.max_users.min(20),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerContribution {
    pub index: usize,
    pub weight: Rational,
    /// Packing (or fractional packing) number of the layer hypergraph.
    pub packing: Rational,
    pub contribution: Rational,
}

/// Best value of one scheme with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub value: Rational,
    /// Active users `S`.
    pub active: ActiveSet,
    /// Users carrying private DoF in the maximizing LP, if any.
    pub private_users: Option<ActiveSet>,
    pub r: PowerPolicy,
    /// Private DoF per user.
    pub private: Vec<Rational>,
    /// Total common DoF.
    pub common: Rational,
    pub layers: Vec<LayerContribution>,
}

/// Plan-level evaluation of a TRS configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrsEvaluation {
    pub private: Vec<Rational>,
    pub layers: Vec<LayerContribution>,
    pub total: Rational,
}

fn layer_packing(h: &Hypergraph, mode: Groupcast) -> Result<Rational, PackingError> {
    match mode {
        Groupcast::Orthogonal => Ok(Rational::from(packing_number(h)?)),
        Groupcast::Maximal => fractional_packing_number(h),
    }
}

/// Sum DoF of TRS with active set `s` and policy `r`: private DoF plus, per
/// layer, width times the packing value of its hypergraph.
pub fn trs_sum_dof_at(
    t: &CsitTopology,
    s: &ActiveSet,
    r: &PowerPolicy,
    mode: Groupcast,
) -> Result<TrsEvaluation, OptimizerError> {
    let plan = build_trs_plan(t, s, r)?;
    let private = private_dof(t, s, r);
    let mut layers = Vec::with_capacity(plan.layers.len());
    for layer in &plan.layers {
        let packing = layer_packing(&layer.hypergraph()?, mode)?;
        let weight = layer.width();
        layers.push(LayerContribution {
            index: layer.index,
            weight,
            packing,
            contribution: weight * packing,
        });
    }
    let total = private.iter().sum::<Rational>() + layers.iter().map(|l| l.contribution).sum::<Rational>();
    Ok(TrsEvaluation { private, layers, total })
}

/// Sum DoF of RS with active set `s` and policy `r`: private DoF plus the
/// multicast width `1 - r0`.
pub fn rs_sum_dof_at(t: &CsitTopology, s: &ActiveSet, r: &PowerPolicy) -> Rational {
    private_dof(t, s, r).iter().sum::<Rational>() + Rational::ONE - r.max_over(s)
}

fn all_masks(k: usize) -> Vec<u64> {
    (1u64..(1 << k)).collect()
}

/// Deterministic preference: larger value, then smaller `S`, then smaller `U`
/// (lexicographic on member lists), then smaller tag.
#[derive(Debug, Clone)]
struct Candidate {
    value: Rational,
    s: ActiveSet,
    u: Option<ActiveSet>,
    tag: usize,
    point: Vec<Rational>,
    r0: Rational,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    use std::cmp::Ordering::*;
    match a.value.cmp(&b.value) {
        Greater => a,
        Less => b,
        Equal => {
            let ka = (&a.s, &a.u, a.tag);
            let kb = (&b.s, &b.u, b.tag);
            if kb < ka {
                b
            } else {
                a
            }
        }
    }
}

fn best_of(cands: Vec<Candidate>) -> Option<Candidate> {
    cands.into_iter().reduce(better)
}

fn lp_max(lp: &LinearProgram) -> Result<(Rational, Vec<Rational>), OptimizerError> {
    let sol = solve_max(lp);
    match sol.status {
        LpStatus::Optimal => Ok((sol.value, sol.point)),
        s => Err(OptimizerError::Region(RegionError::Lp(s))),
    }
}

fn region_lp(region: &LinearRegion) -> LinearProgram {
    region
        .to_lp(&vec![Rational::ONE; region.vars.len()])
        .expect("weights match")
}

fn policy_from(t: &CsitTopology, u: &ActiveSet, d: &[Rational], hub_return: Rational) -> PowerPolicy {
    let mut private = vec![Rational::ZERO; t.k()];
    for (i, k) in u.iter().enumerate() {
        private[k] = d[i];
    }
    match potential_test(t, u, &private, hub_return) {
        Feasibility::Feasible { r } => r,
        Feasibility::Infeasible { circuit, .. } => {
            panic!("LP optimum failed the potential test, circuit {circuit:?}")
        }
    }
}

fn analysis_topology(t: &CsitTopology) -> CsitTopology {
    if t.is_fully_connected() {
        t.clone()
    } else {
        effective_zfbf_topology(t)
    }
}

/// ZFBF with power control. Partially connected inputs are analyzed on
/// their effective fully connected topology.
pub fn sum_dof_zfbf(t: &CsitTopology, cfg: &SweepConfig) -> Result<SchemeOutcome, OptimizerError> {
    cfg.check(t.k())?;
    let te = analysis_topology(t);
    let bounds = SupportBounds::new(&te)?;
    let cands = all_masks(te.k())
        .into_par_iter()
        .map(|m| {
            let u = ActiveSet::from_mask(m);
            let (value, point) = lp_max(&region_lp(&build_region(&bounds, &u, false)))?;
            Ok(Candidate {
                value,
                s: u.clone(),
                u: Some(u),
                tag: 0,
                point,
                r0: Rational::ZERO,
            })
        })
        .collect::<Result<Vec<_>, OptimizerError>>()?;
    let best = best_of(cands).expect("K >= 2");
    let u = best.u.clone().expect("private set");
    let r = policy_from(&te, &u, &best.point, Rational::ONE);
    let private = private_dof(&te, &u, &r);
    debug_assert_eq!(private.iter().sum::<Rational>(), best.value);
    Ok(SchemeOutcome {
        scheme: Scheme::Zfbf,
        value: best.value,
        active: u.clone(),
        private_users: Some(u),
        r,
        private,
        common: Rational::ZERO,
        layers: vec![],
    })
}

/// Rate-splitting with common-message multicasting (fully connected only).
pub fn sum_dof_rs(t: &CsitTopology, cfg: &SweepConfig) -> Result<SchemeOutcome, OptimizerError> {
    cfg.check(t.k())?;
    if !t.is_fully_connected() {
        return Err(OptimizerError::NotFullyConnected);
    }
    let bounds = SupportBounds::new(t)?;
    let k = t.k();
    let cands = all_masks(k)
        .into_par_iter()
        .map(|m| {
            let u = ActiveSet::from_mask(m);
            let (value, point) = lp_max(&region_lp(&build_region(&bounds, &u, true)))?;
            Ok(Candidate {
                value,
                s: ActiveSet::full(k),
                u: Some(u),
                tag: 0,
                point,
                r0: Rational::ZERO,
            })
        })
        .collect::<Result<Vec<_>, OptimizerError>>()?;
    let best = best_of(cands).expect("K >= 2");
    let u = best.u.clone().expect("private set");
    let common = *best.point.last().expect("common variable");
    let r = policy_from(t, &u, &best.point, Rational::ONE - common);
    let s = ActiveSet::full(k);
    let private = private_dof(t, &s, &r);
    let width = Rational::ONE - r.max_over(&s);
    debug_assert_eq!(private.iter().sum::<Rational>() + width, best.value);
    Ok(SchemeOutcome {
        scheme: Scheme::Rs,
        value: best.value,
        active: s,
        private_users: Some(u),
        r,
        private,
        common: width,
        layers: vec![LayerContribution {
            index: 2,
            weight: width,
            packing: Rational::ONE,
            contribution: width,
        }],
    })
}

/// Per-S search for TRS; returns the best candidate for this active set.
fn trs_best_for_set(
    te: &CsitTopology,
    bounds: &SupportBounds,
    s: &ActiveSet,
    extras: &[Rational],
    mode: Groupcast,
) -> Result<Candidate, OptimizerError> {
    let mut bps: Vec<Rational> = vec![Rational::ZERO, Rational::ONE];
    for k in s.iter() {
        for j in s.iter() {
            if j != k {
                bps.push(te.a(k, j));
            }
        }
    }
    bps.extend_from_slice(extras);
    bps.sort();
    bps.dedup();
    let n = bps.len();
    // pack[i]: packing value of the layer piece just below bps[i].
    let mut pack = vec![Rational::ZERO; n];
    for i in 1..n {
        pack[i] = layer_packing(&Hypergraph::from_matrix(&decode_matrix(te, s, bps[i]))?, mode)?;
    }
    // tail[i]: common contribution of [bps[i], 1].
    let mut tail = vec![Rational::ZERO; n];
    for i in (0..n - 1).rev() {
        tail[i] = tail[i + 1] + pack[i + 1] * (bps[i + 1] - bps[i]);
    }
    // No private DoF: r = 0 on S.
    let mut best = Candidate {
        value: tail[0],
        s: s.clone(),
        u: None,
        tag: 0,
        point: vec![],
        r0: Rational::ZERO,
    };
    let mut sub = s.mask();
    while sub != 0 {
        let u = ActiveSet::from_mask(sub);
        let region = build_region(bounds, &u, true);
        let nu = u.len();
        let common = nu;
        for i in 0..n - 1 {
            let (lo, hi) = (bps[i], bps[i + 1]);
            let mut obj = vec![Rational::ONE; nu + 1];
            obj[nu] = -pack[i + 1];
            let mut lp = LinearProgram::new(obj).expect("nonempty");
            for row in &region.rows {
                if row.coeffs[common].is_zero() {
                    lp.add_le(row.coeffs.clone(), row.rhs).expect("width");
                } else if row.coeffs[..common].iter().any(|c| !c.is_zero()) {
                    let mut c = row.coeffs.clone();
                    c[common] = -Rational::ONE;
                    lp.add_le(c, row.rhs - Rational::ONE + lo).expect("width");
                }
            }
            let mut cap = vec![Rational::ZERO; nu + 1];
            cap[nu] = Rational::ONE;
            lp.add_le(cap, hi - lo).expect("width");
            let (v, point) = lp_max(&lp)?;
            let value = v + tail[i + 1] + pack[i + 1] * (hi - lo);
            let r0 = lo + point[nu];
            let cand = Candidate {
                value,
                s: s.clone(),
                u: Some(u.clone()),
                tag: i,
                point,
                r0,
            };
            best = better(best, cand);
        }
        sub = (sub - 1) & s.mask();
    }
    Ok(best)
}

/// TRS with orthogonal or maximal groupcasting.
pub fn sum_dof_trs(t: &CsitTopology, cfg: &SweepConfig, mode: Groupcast) -> Result<SchemeOutcome, OptimizerError> {
    cfg.check(t.k())?;
    let te = analysis_topology(t);
    let bounds = SupportBounds::new(&te)?;
    let cands = all_masks(te.k())
        .into_par_iter()
        .map(|m| trs_best_for_set(&te, &bounds, &ActiveSet::from_mask(m), &cfg.extra_exponents, mode))
        .collect::<Result<Vec<_>, OptimizerError>>()?;
    let best = best_of(cands).expect("K >= 2");
    let s = best.s.clone();
    let r = match &best.u {
        None => PowerPolicy::zeros(te.k()),
        Some(u) => policy_from(&te, u, &best.point, best.r0),
    };
    let eval = trs_sum_dof_at(&te, &s, &r, mode)?;
    debug_assert_eq!(eval.total, best.value, "witness re-evaluation");
    Ok(SchemeOutcome {
        scheme: match mode {
            Groupcast::Orthogonal => Scheme::TrsOrth,
            Groupcast::Maximal => Scheme::TrsMax,
        },
        value: eval.total,
        active: s,
        private_users: best.u,
        r,
        common: eval.layers.iter().map(|l| l.contribution).sum(),
        private: eval.private,
        layers: eval.layers,
    })
}

fn check_cyclic_params(k: usize, a: Rational, b: Rational) -> Result<(), OptimizerError> {
    if a > b {
        return Err(OptimizerError::InvalidOrder { a, b });
    }
    if a.is_negative() || b > Rational::ONE || k < 3 {
        return Err(OptimizerError::InvalidConfig(format!(
            "need K >= 3 and 0 <= a <= b <= 1, got K={k}, a={a}, b={b}"
        )));
    }
    Ok(())
}

/// ZFBF sum DoF of the cyclic topology with power control, in closed form.
///
/// This is achievable but not always optimal: for odd `K` and
/// `a < 1/2 < 3a` the exact LP can be higher (e.g. `K=3, a=2/5` gives `6/5`
/// against `1`), so [`compare_schemes`] checks it as a lower bound.
pub fn cyclic_zfbf_closed_form(k: usize, a: Rational, b: Rational) -> Result<Rational, OptimizerError> {
    check_cyclic_params(k, a, b)?;
    let half = Rational::new(1, 2);
    let h = Rational::from(k / 2);
    Ok(if a >= half {
        Rational::from(k) * a
    } else if k.is_multiple_of(2) {
        h
    } else if Rational::ONE - b <= a {
        h - Rational::ONE + a + b
    } else {
        h
    })
}

/// `b + 3a > (6/K) floor(K/2) - 2`.
pub fn trs_advantage_condition(k: usize, a: Rational, b: Rational) -> bool {
    let rhs = Rational::new(6 * (k / 2) as i128, k as i128) - Rational::from_int(2);
    b + a + a + a > rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    /// Computed value must be at least the closed form.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormCheck {
    pub name: String,
    pub relation: Relation,
    pub closed_form: Rational,
    pub computed: Rational,
}

impl ClosedFormCheck {
    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Equal => self.closed_form == self.computed,
            Relation::AtLeast => self.computed >= self.closed_form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonReport {
    pub zfbf: Option<SchemeOutcome>,
    /// `None` for partially connected networks or when disabled.
    pub rs: Option<SchemeOutcome>,
    pub trs_orth: Option<SchemeOutcome>,
    pub trs_max: Option<SchemeOutcome>,
    pub checks: Vec<ClosedFormCheck>,
}

impl ComparisonReport {
    pub fn outcomes(&self) -> impl Iterator<Item = &SchemeOutcome> {
        [&self.zfbf, &self.rs, &self.trs_orth, &self.trs_max]
            .into_iter()
            .flatten()
    }

    pub fn value(&self, s: Scheme) -> Option<Rational> {
        self.outcomes().find(|o| o.scheme == s).map(|o| o.value)
    }

    /// TRS (maximal) strictly beats the given scheme.
    pub fn trs_advantage_over(&self, s: Scheme) -> Option<bool> {
        Some(self.value(Scheme::TrsMax)? > self.value(s)?)
    }
}

pub fn compare_schemes(t: &CsitTopology, cfg: &SweepConfig) -> Result<ComparisonReport, OptimizerError> {
    cfg.check(t.k())?;
    let zfbf = cfg.zfbf.then(|| sum_dof_zfbf(t, cfg)).transpose()?;
    let rs = (cfg.rs && t.is_fully_connected())
        .then(|| sum_dof_rs(t, cfg))
        .transpose()?;
    let trs_orth = cfg
        .trs_orth
        .then(|| sum_dof_trs(t, cfg, Groupcast::Orthogonal))
        .transpose()?;
    let trs_max = cfg
        .trs_max
        .then(|| sum_dof_trs(t, cfg, Groupcast::Maximal))
        .transpose()?;
    let mut checks = Vec::new();
    if let Some(class) = classify_realistic(t) {
        if let Some(o) = &trs_max {
            checks.push(ClosedFormCheck {
                name: "three-transmitter TRS (private power a)".into(),
                relation: Relation::AtLeast,
                closed_form: crate::packing::realistic_sum_dof(t)?,
                computed: o.value,
            });
        }
        let cyclic_forward = class.forward.iter().all(|&f| f) || class.a == class.b;
        if let (Some(o), true) = (&zfbf, cyclic_forward) {
            checks.push(ClosedFormCheck {
                name: "cyclic ZFBF".into(),
                relation: Relation::AtLeast,
                closed_form: cyclic_zfbf_closed_form(class.k, class.a, class.b)?,
                computed: o.value,
            });
        }
    }
    if let Some(c) = checks.iter().find(|c| !c.holds()) {
        return Err(OptimizerError::ClosedFormMismatch {
            name: c.name.clone(),
            closed_form: c.closed_form,
            computed: c.computed,
        });
    }
    Ok(ComparisonReport {
        zfbf,
        rs,
        trs_orth,
        trs_max,
        checks,
    })
}

fn users_field(s: &ActiveSet) -> String {
    s.iter().map(|u| (u + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn layers_field(layers: &[LayerContribution]) -> String {
    layers
        .iter()
        .map(|l| format!("{}:{}x{}", l.index, l.weight, l.packing))
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV with columns `scheme, value_num, value_den, S, r, layers`. Users are
/// space separated and 1-based; layers are `index:weight x packing` joined
/// by `;`.
pub fn write_outcomes_csv<'a, W: Write>(
    w: W,
    outcomes: impl IntoIterator<Item = &'a SchemeOutcome>,
) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["scheme", "value_num", "value_den", "S", "r", "layers"])?;
    for o in outcomes {
        let r: Vec<String> = o.r.as_slice().iter().map(|x| x.to_string()).collect();
        wr.write_record([
            o.scheme.name().to_string(),
            o.value.numer().to_string(),
            o.value.denom().to_string(),
            users_field(&o.active),
            r.join(" "),
            layers_field(&o.layers),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
