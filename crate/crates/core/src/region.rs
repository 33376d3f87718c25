//! Achievable DoF polytopes of ZFBF with power control and of RS with
//! common-message multicasting, plus the potential-function feasibility test.
//!
//! A cyclic sequence `(i_1, ..., i_m)` contributes the inequality
//! `sum_l d_{i_l} <= sum_l a_{i_{l-1} i_l}` (indices cyclic) and, for the
//! common part, `d_c + sum_l d_{i_l} <= 1 + sum_{l>=2} a_{i_{l-1} i_l}`.
//! The second family depends on where the sequence is cut, so every rotation
//! is a separate constraint. Only the tightest right-hand side per support
//! is kept; it is found by a Hamiltonian path/cycle DP over subsets, which
//! yields the same polytope as listing every sequence.

use std::fmt;

use crate::lp::{solve_max, LinearProgram, LpStatus};
use crate::rational::Rational;
use crate::topology::{ActiveSet, CsitTopology, PowerPolicy};

/// Largest user count for which subset-indexed tables are built.
pub const MAX_REGION_USERS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error("NotFullyConnected: RS/ZFBF regions need a fully connected topology over the active users")]
    NotFullyConnected,
    #[error("NotASubset: U={u} is not contained in S={s}")]
    NotASubset { u: ActiveSet, s: ActiveSet },
    #[error("WeightLength: got {got} weights for {expected} variables")]
    WeightLength { got: usize, expected: usize },
    #[error("TupleLength: got {got} private entries, expected K={expected}")]
    TupleLength { got: usize, expected: usize },
    #[error("TooManyUsers: K={0} exceeds {MAX_REGION_USERS}")]
    TooManyUsers(usize),
    #[error("LpStatus: region LP ended {0:?}")]
    Lp(LpStatus),
}

/// Ordered distinct users, smallest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicSequence(Vec<usize>);

impl CyclicSequence {
    pub fn users(&self) -> &[usize] {
        &self.0
    }

    /// `sum_l a_{i_{l-1} i_l}` around the cycle.
    pub fn cycle_weight(&self, t: &CsitTopology) -> Rational {
        let m = self.0.len();
        (0..m).map(|l| t.a(self.0[(l + m - 1) % m], self.0[l])).sum()
    }
}

impl fmt::Display for CyclicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.0.iter().map(|u| (u + 1).to_string()).collect();
        write!(f, "({})", v.join(","))
    }
}

fn permutations(items: &[usize], out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>, used: &mut Vec<bool>) {
    if prefix.len() == items.len() {
        out.push(prefix.clone());
        return;
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            prefix.push(items[i]);
            permutations(items, out, prefix, used);
            prefix.pop();
            used[i] = false;
        }
    }
}

/// Every cyclic sequence over subsets of `u` with at least two users, in
/// canonical rotation. Ordered by subset size, then lexicographically.
pub fn cyclic_sequences(u: &ActiveSet) -> Vec<CyclicSequence> {
    let members = u.members();
    let n = members.len();
    let mut out = Vec::new();
    for mask in 1u64..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let sub: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| members[i]).collect();
        let mut perms = Vec::new();
        permutations(&sub[1..], &mut perms, &mut Vec::new(), &mut vec![false; sub.len() - 1]);
        for p in perms {
            let mut seq = vec![sub[0]];
            seq.extend(p);
            out.push(CyclicSequence(seq));
        }
    }
    out.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then_with(|| x.cmp(y)));
    out
}

/// Tightest right-hand sides per user subset, indexed by bit mask over all
/// `K` users: minimum cycle weight and minimum open-path weight.
#[derive(Debug, Clone)]
pub struct SupportBounds {
    k: usize,
    cycle: Vec<Option<Rational>>,
    path: Vec<Option<Rational>>,
}

impl SupportBounds {
    pub fn new(t: &CsitTopology) -> Result<Self, RegionError> {
        if !t.is_fully_connected() {
            return Err(RegionError::NotFullyConnected);
        }
        let k = t.k();
        if k > MAX_REGION_USERS {
            return Err(RegionError::TooManyUsers(k));
        }
        let size = 1usize << k;
        let mut path = vec![None; size];
        let mut cycle = vec![None; size];
        // best[mask][v]: cheapest sequence covering mask and ending at v.
        let mut best: Vec<Vec<Option<Rational>>> = vec![vec![None; k]; size];
        for v in 0..k {
            best[1 << v][v] = Some(Rational::ZERO);
        }
        for mask in 1..size {
            for v in 0..k {
                let Some(w) = best[mask][v] else { continue };
                for x in 0..k {
                    if mask >> x & 1 == 1 {
                        continue;
                    }
                    let cand = w + t.a(v, x);
                    let slot = &mut best[mask | 1 << x][x];
                    if slot.is_none_or(|s| cand < s) {
                        *slot = Some(cand);
                    }
                }
            }
            path[mask] = best[mask].iter().flatten().min().copied();
        }
        // Cycles: anchor at the smallest member of each mask.
        for s in 0..k {
            let mut anchored: Vec<Vec<Option<Rational>>> = vec![vec![None; k]; size];
            anchored[1 << s][s] = Some(Rational::ZERO);
            for mask in (1usize << s..size).filter(|m| m & ((1 << s) - 1) == 0 && m >> s & 1 == 1) {
                for v in 0..k {
                    let Some(w) = anchored[mask][v] else { continue };
                    if v != s {
                        let closed = w + t.a(v, s);
                        if cycle[mask].is_none_or(|c| closed < c) {
                            cycle[mask] = Some(closed);
                        }
                    }
                    for x in (s + 1)..k {
                        if mask >> x & 1 == 1 {
                            continue;
                        }
                        let cand = w + t.a(v, x);
                        let slot = &mut anchored[mask | 1 << x][x];
                        if slot.is_none_or(|c| cand < c) {
                            *slot = Some(cand);
                        }
                    }
                }
            }
        }
        Ok(SupportBounds { k, cycle, path })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Minimum `sum a` over cyclic sequences with exactly this support.
    pub fn cycle_min(&self, mask: u64) -> Option<Rational> {
        self.cycle[mask as usize]
    }

    /// Minimum `sum_{l>=2} a_{i_{l-1} i_l}` over orderings of this support.
    pub fn path_min(&self, mask: u64) -> Option<Rational> {
        self.path[mask as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionVar {
    Private(usize),
    Common,
}

impl fmt::Display for RegionVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionVar::Private(k) => write!(f, "d_p_{}", k + 1),
            RegionVar::Common => write!(f, "d_c"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

/// `rows` are `<=` inequalities; every variable is also nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRegion {
    pub users: ActiveSet,
    pub vars: Vec<RegionVar>,
    pub rows: Vec<Inequality>,
}

impl LinearRegion {
    pub fn var_index(&self, v: RegionVar) -> Option<usize> {
        self.vars.iter().position(|&x| x == v)
    }

    pub fn has_common(&self) -> bool {
        self.var_index(RegionVar::Common).is_some()
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        point.len() == self.vars.len()
            && point.iter().all(|x| !x.is_negative())
            && self
                .rows
                .iter()
                .all(|row| crate::lp::dot(&row.coeffs, point) <= row.rhs)
    }

    pub fn to_lp(&self, weights: &[Rational]) -> Result<LinearProgram, RegionError> {
        if weights.len() != self.vars.len() {
            return Err(RegionError::WeightLength {
                got: weights.len(),
                expected: self.vars.len(),
            });
        }
        let mut lp = LinearProgram::new(weights.to_vec()).expect("region has variables");
        for row in &self.rows {
            lp.add_le(row.coeffs.clone(), row.rhs).expect("row width matches");
        }
        Ok(lp)
    }

    /// Point in this region's variable order from a full-length tuple.
    pub fn point_of(&self, d: &DofTuple) -> Vec<Rational> {
        self.vars
            .iter()
            .map(|v| match v {
                RegionVar::Private(k) => d.private[*k],
                RegionVar::Common => d.common,
            })
            .collect()
    }
}

impl fmt::Display for LinearRegion {
    /// One inequality per line; nonnegativity is listed first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        writeln!(f, "{} >= 0", names.join(", "))?;
        for row in &self.rows {
            let mut first = true;
            for (c, v) in row.coeffs.iter().zip(&self.vars) {
                if c.is_zero() {
                    continue;
                }
                let sign = if c.is_negative() { "-" } else { "+" };
                let mag = c.abs();
                let term = if mag == Rational::ONE {
                    v.to_string()
                } else {
                    format!("{mag}*{v}")
                };
                if first {
                    let lead = if c.is_negative() { "-" } else { "" };
                    write!(f, "{lead}{term}")?;
                    first = false;
                } else {
                    write!(f, " {sign} {term}")?;
                }
            }
            if first {
                write!(f, "0")?;
            }
            writeln!(f, " <= {}", row.rhs)?;
        }
        Ok(())
    }
}

/// Nonempty submasks of `mask`, ordered by size then lexicographically by
/// member list.
fn ordered_submasks(mask: u64) -> Vec<u64> {
    let mut subs = Vec::new();
    let mut s = mask;
    while s != 0 {
        subs.push(s);
        s = (s - 1) & mask;
    }
    subs.sort_by_key(|&m| {
        let members: Vec<u32> = (0..64).filter(|i| m >> i & 1 == 1).collect();
        (m.count_ones(), members)
    });
    subs
}

pub(crate) fn build_region(bounds: &SupportBounds, u: &ActiveSet, with_common: bool) -> LinearRegion {
    let mut vars: Vec<RegionVar> = u.iter().map(RegionVar::Private).collect();
    if with_common {
        vars.push(RegionVar::Common);
    }
    let n = vars.len();
    let one = Rational::ONE;
    let unit = |idx: &[usize]| {
        let mut c = vec![Rational::ZERO; n];
        for &i in idx {
            c[i] = one;
        }
        c
    };
    let pos = |mask: u64| -> Vec<usize> {
        u.iter()
            .enumerate()
            .filter(|(_, k)| mask >> k & 1 == 1)
            .map(|(i, _)| i)
            .collect()
    };
    let mut rows = Vec::new();
    for i in 0..n {
        rows.push(Inequality {
            coeffs: unit(&[i]),
            rhs: one,
        });
    }
    let subs = ordered_submasks(u.mask());
    for &m in subs.iter().filter(|m| m.count_ones() >= 2) {
        let rhs = bounds.cycle_min(m).expect("cycle bound for multi-user support");
        rows.push(Inequality {
            coeffs: unit(&pos(m)),
            rhs,
        });
    }
    if with_common {
        let c = n - 1;
        for &m in &subs {
            let mut idx = pos(m);
            idx.push(c);
            let rhs = one + bounds.path_min(m).expect("path bound for support");
            rows.push(Inequality {
                coeffs: unit(&idx),
                rhs,
            });
        }
    }
    LinearRegion {
        users: u.clone(),
        vars,
        rows,
    }
}

/// RS region for private users `u` with aggregate common DoF `d_c`.
pub fn rs_region(t: &CsitTopology, u: &ActiveSet) -> Result<LinearRegion, RegionError> {
    Ok(build_region(&SupportBounds::new(t)?, u, true))
}

/// ZFBF region: the RS system without `d_c` and its rows.
pub fn zfbf_region(t: &CsitTopology, u: &ActiveSet) -> Result<LinearRegion, RegionError> {
    Ok(build_region(&SupportBounds::new(t)?, u, false))
}

/// Exact maximum of `weights . d` over the region, with a maximizing vertex.
pub fn maximize(region: &LinearRegion, weights: &[Rational]) -> Result<(Rational, Vec<Rational>), RegionError> {
    let sol = solve_max(&region.to_lp(weights)?);
    match sol.status {
        LpStatus::Optimal => Ok((sol.value, sol.point)),
        s => Err(RegionError::Lp(s)),
    }
}

pub fn max_weighted_sum(region: &LinearRegion, weights: &[Rational]) -> Result<Rational, RegionError> {
    maximize(region, weights).map(|(v, _)| v)
}

/// Private DoF for every user (zero outside the private set) plus the
/// aggregate common DoF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofTuple {
    pub private: Vec<Rational>,
    pub common: Rational,
}

impl DofTuple {
    /// Inverse of [`LinearRegion::point_of`].
    pub fn from_point(k: usize, region: &LinearRegion, point: &[Rational]) -> Self {
        let mut d = DofTuple {
            private: vec![Rational::ZERO; k],
            common: Rational::ZERO,
        };
        for (v, x) in region.vars.iter().zip(point) {
            match v {
                RegionVar::Private(j) => d.private[*j] = *x,
                RegionVar::Common => d.common = *x,
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    Hub,
    User(usize),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Hub => write!(f, "v0"),
            Vertex::User(k) => write!(f, "v{}", k + 1),
        }
    }
}

/// Complete digraph on the hub `v0` and one vertex per private user, with
/// `l(v_j, v_k) = a_kj - d_k`, `l(v_k, v0) = hub_return`, `l(v0, v_k) = -d_k`.
/// For the RS region `hub_return = 1 - d_c`.
#[derive(Debug, Clone)]
pub struct PotentialGraph {
    pub vertices: Vec<Vertex>,
    /// `(from, to, length)` as indices into `vertices`.
    pub arcs: Vec<(usize, usize, Rational)>,
}

impl PotentialGraph {
    pub fn new(t: &CsitTopology, u: &ActiveSet, private: &[Rational], hub_return: Rational) -> Self {
        let mut vertices = vec![Vertex::Hub];
        vertices.extend(u.iter().map(Vertex::User));
        let mut arcs = Vec::new();
        for (i, k) in u.iter().enumerate() {
            arcs.push((0, i + 1, -private[k]));
            arcs.push((i + 1, 0, hub_return));
            for (l, j) in u.iter().enumerate() {
                if j != k {
                    arcs.push((l + 1, i + 1, t.a(k, j) - private[k]));
                }
            }
        }
        PotentialGraph { vertices, arcs }
    }

    pub fn circuit_length(&self, circuit: &[Vertex]) -> Rational {
        let idx = |v: &Vertex| self.vertices.iter().position(|x| x == v).expect("vertex in graph");
        let n = circuit.len();
        (0..n)
            .map(|i| {
                let (a, b) = (idx(&circuit[i]), idx(&circuit[(i + 1) % n]));
                self.arcs
                    .iter()
                    .find(|&&(x, y, _)| x == a && y == b)
                    .expect("arc exists")
                    .2
            })
            .sum()
    }

    /// Shortest distances from the hub, or a negative circuit.
    pub fn bellman_ford(&self) -> Result<Vec<Rational>, Vec<Vertex>> {
        let n = self.vertices.len();
        let mut dist: Vec<Option<Rational>> = vec![None; n];
        let mut pred = vec![usize::MAX; n];
        dist[0] = Some(Rational::ZERO);
        for _ in 1..n {
            let mut changed = false;
            for &(a, b, w) in &self.arcs {
                if let Some(da) = dist[a] {
                    if dist[b].is_none_or(|db| da + w < db) {
                        dist[b] = Some(da + w);
                        pred[b] = a;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for &(a, b, w) in &self.arcs {
            if let (Some(da), Some(db)) = (dist[a], dist[b]) {
                if da + w < db {
                    pred[b] = a;
                    let mut v = b;
                    for _ in 0..n {
                        v = pred[v];
                    }
                    let mut cycle = vec![v];
                    let mut x = pred[v];
                    while x != v {
                        cycle.push(x);
                        x = pred[x];
                    }
                    cycle.reverse();
                    return Err(cycle.into_iter().map(|i| self.vertices[i]).collect());
                }
            }
        }
        Ok(dist
            .into_iter()
            .map(|d| d.expect("complete graph is reachable"))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// Power policy with `r_k = f(v_k)` for private users and 0 elsewhere.
    Feasible { r: PowerPolicy },
    /// Negative circuit, listed as `c_0 -> c_1 -> ... -> c_0`.
    Infeasible { circuit: Vec<Vertex>, length: Rational },
}

/// Potential test for the tuple `d` against the RS conditions with private
/// users `u` inside active set `s`.
pub fn potential_feasibility(
    t: &CsitTopology,
    s: &ActiveSet,
    u: &ActiveSet,
    d: &DofTuple,
) -> Result<Feasibility, RegionError> {
    if !u.is_subset_of(s) {
        return Err(RegionError::NotASubset {
            u: u.clone(),
            s: s.clone(),
        });
    }
    if !t.fully_connected_over(s) {
        return Err(RegionError::NotFullyConnected);
    }
    if d.private.len() != t.k() {
        return Err(RegionError::TupleLength {
            got: d.private.len(),
            expected: t.k(),
        });
    }
    Ok(potential_test(t, u, &d.private, Rational::ONE - d.common))
}

pub(crate) fn potential_test(
    t: &CsitTopology,
    u: &ActiveSet,
    private: &[Rational],
    hub_return: Rational,
) -> Feasibility {
    let g = PotentialGraph::new(t, u, private, hub_return);
    match g.bellman_ford() {
        Ok(dist) => {
            let mut r = vec![Rational::ZERO; t.k()];
            for (i, k) in u.iter().enumerate() {
                r[k] = -dist[i + 1];
            }
            let r = PowerPolicy::new(r).expect("potentials stay below the hub return length");
            Feasibility::Feasible { r }
        }
        Err(circuit) => {
            let length = g.circuit_length(&circuit);
            Feasibility::Infeasible { circuit, length }
        }
    }
}

/// The region inequality certified violated by a negative circuit, written
/// over the variables of `rs_region(t, u)`.
pub fn circuit_inequality(t: &CsitTopology, region: &LinearRegion, circuit: &[Vertex]) -> Inequality {
    let n = circuit.len();
    let mut coeffs = vec![Rational::ZERO; region.vars.len()];
    let mut rhs = Rational::ZERO;
    let hub = circuit.iter().position(|v| *v == Vertex::Hub);
    // Rotate so a hub circuit starts at the hub.
    let order: Vec<Vertex> = match hub {
        Some(h) => (0..n).map(|i| circuit[(h + i) % n]).collect(),
        None => circuit.to_vec(),
    };
    for i in 0..n {
        let (from, to) = (order[i], order[(i + 1) % n]);
        match (from, to) {
            (Vertex::User(j), Vertex::User(k)) => rhs += t.a(k, j),
            (Vertex::Hub, _) | (_, Vertex::Hub) => {}
        }
        if let Vertex::User(k) = to {
            coeffs[region.var_index(RegionVar::Private(k)).expect("user in region")] += Rational::ONE;
        }
    }
    if hub.is_some() {
        coeffs[region.var_index(RegionVar::Common).expect("common variable")] += Rational::ONE;
        rhs += Rational::ONE;
    }
    Inequality { coeffs, rhs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn hierarchical(a: Rational, b: Rational) -> CsitTopology {
        CsitTopology::fully_connected(3, |k, j| if k == 0 || j == 0 { b } else { a }).unwrap()
    }

    fn set(k: usize, m: &[usize]) -> ActiveSet {
        ActiveSet::new(k, m.iter().map(|x| x - 1)).unwrap()
    }

    #[test]
    fn sequences_of_three() {
        let s: Vec<String> = cyclic_sequences(&set(3, &[1, 2, 3]))
            .iter()
            .map(|c| c.to_string())
            .collect();
        assert_eq!(s, ["(1,2)", "(1,3)", "(2,3)", "(1,2,3)", "(1,3,2)"]);
        assert_eq!(cyclic_sequences(&set(2, &[1, 2])).len(), 1);
        assert_eq!(cyclic_sequences(&set(4, &[1, 2, 3, 4])).len(), 20);
        assert!(cyclic_sequences(&set(3, &[2])).is_empty());
    }

    #[test]
    fn hierarchical_full_region_rows() {
        let (a, b) = (q(1, 5), q(4, 5));
        let r = rs_region(&hierarchical(a, b), &set(3, &[1, 2, 3])).unwrap();
        let text = r.to_string();
        assert!(text.contains(&format!("d_p_1 + d_p_2 + d_p_3 <= {}", b + b + a)));
        assert!(text.contains(&format!("d_p_1 + d_p_2 + d_p_3 + d_c <= {}", Rational::ONE + b + a)));
    }

    #[test]
    fn hierarchical_pair_region_rows() {
        let (a, b) = (q(1, 5), q(4, 5));
        let r = rs_region(&hierarchical(a, b), &set(3, &[2, 3])).unwrap();
        let text = r.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            [
                "d_p_2, d_p_3, d_c >= 0",
                "d_p_2 <= 1/1",
                "d_p_3 <= 1/1",
                "d_c <= 1/1",
                "d_p_2 + d_p_3 <= 2/5",
                "d_p_2 + d_c <= 1/1",
                "d_p_3 + d_c <= 1/1",
                "d_p_2 + d_p_3 + d_c <= 6/5",
            ]
        );
    }

    #[test]
    fn single_user_region() {
        let r = rs_region(&hierarchical(q(1, 5), q(4, 5)), &set(3, &[2])).unwrap();
        assert_eq!(r.rows.len(), 3);
        let z = zfbf_region(&hierarchical(q(1, 5), q(4, 5)), &set(3, &[2])).unwrap();
        assert_eq!(z.rows.len(), 1);
        assert_eq!(z.vars, vec![RegionVar::Private(1)]);
    }

    #[test]
    fn weighted_sums() {
        let t = hierarchical(q(1, 5), q(4, 5));
        let u = set(3, &[1, 2, 3]);
        // Over U={1,2,3} alone the optimum is 1+2a; 1+b needs U={1,2}.
        assert_eq!(
            max_weighted_sum(&rs_region(&t, &u).unwrap(), &[Rational::ONE; 4]).unwrap(),
            q(7, 5)
        );
        assert_eq!(
            max_weighted_sum(&rs_region(&t, &set(3, &[1, 2])).unwrap(), &[Rational::ONE; 3]).unwrap(),
            q(9, 5)
        );
        assert_eq!(
            max_weighted_sum(&rs_region(&t, &u).unwrap(), &[Rational::ZERO; 4]).unwrap(),
            Rational::ZERO
        );
        let t2 = hierarchical(q(2, 5), q(1, 2));
        assert_eq!(
            max_weighted_sum(&zfbf_region(&t2, &u).unwrap(), &[Rational::ONE; 3]).unwrap(),
            q(7, 5)
        );
        let cyc = crate::topology::make_cyclic_topology(3, q(1, 5), q(4, 5)).unwrap();
        // max{a+b, 3a}: 3a over all three users, a+b over a pair.
        assert_eq!(
            max_weighted_sum(&zfbf_region(&cyc, &u).unwrap(), &[Rational::ONE; 3]).unwrap(),
            q(3, 5)
        );
        assert_eq!(
            max_weighted_sum(&zfbf_region(&cyc, &set(3, &[1, 2])).unwrap(), &[Rational::ONE; 2]).unwrap(),
            Rational::ONE
        );
        assert!(max_weighted_sum(&zfbf_region(&cyc, &u).unwrap(), &[Rational::ONE; 2]).is_err());
    }

    #[test]
    fn refuses_partial_topology() {
        let t = crate::topology::make_cyclic_topology(4, q(1, 5), q(4, 5)).unwrap();
        assert_eq!(
            rs_region(&t, &set(4, &[1])).unwrap_err(),
            RegionError::NotFullyConnected
        );
    }

    #[test]
    fn bounds_match_enumeration() {
        let t = CsitTopology::fully_connected(5, |k, j| q(((3 * k + 7 * j) % 11) as i128, 10)).unwrap();
        let b = SupportBounds::new(&t).unwrap();
        for c in cyclic_sequences(&ActiveSet::full(5)) {
            let m = c.users().iter().fold(0u64, |m, &i| m | 1 << i);
            assert!(b.cycle_min(m).unwrap() <= c.cycle_weight(&t));
        }
        // Equality for at least one sequence per support.
        for m in 1u64..32 {
            if m.count_ones() < 2 {
                continue;
            }
            let best = cyclic_sequences(&ActiveSet::from_mask(m))
                .iter()
                .filter(|c| c.users().len() == m.count_ones() as usize)
                .map(|c| c.cycle_weight(&t))
                .min()
                .unwrap();
            assert_eq!(b.cycle_min(m), Some(best));
        }
    }

    #[test]
    fn potential_recovers_uniform_policy() {
        let (a, b) = (q(1, 5), q(4, 5));
        let t = hierarchical(a, b);
        let k3 = ActiveSet::full(3);
        let d = DofTuple {
            private: vec![a; 3],
            common: Rational::ONE - a,
        };
        match potential_feasibility(&t, &k3, &k3, &d).unwrap() {
            Feasibility::Feasible { r } => assert_eq!(r.as_slice(), &[a, a, a]),
            other => panic!("expected feasible, got {other:?}"),
        }
        let zero = DofTuple {
            private: vec![Rational::ZERO; 3],
            common: Rational::ZERO,
        };
        assert!(matches!(
            potential_feasibility(&t, &k3, &k3, &zero).unwrap(),
            Feasibility::Feasible { .. }
        ));
    }

    #[test]
    fn potential_finds_negative_circuit() {
        let (a, b) = (q(1, 5), q(4, 5));
        let t = hierarchical(a, b);
        let u = set(3, &[1, 2]);
        let d = DofTuple {
            private: vec![Rational::ONE, Rational::ONE, Rational::ZERO],
            common: Rational::ZERO,
        };
        let region = rs_region(&t, &u).unwrap();
        match potential_feasibility(&t, &ActiveSet::full(3), &u, &d).unwrap() {
            Feasibility::Infeasible { circuit, length } => {
                assert!(length.is_negative());
                let row = circuit_inequality(&t, &region, &circuit);
                assert!(crate::lp::dot(&row.coeffs, &region.point_of(&d)) > row.rhs);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        let g = PotentialGraph::new(&t, &u, &d.private, Rational::ONE);
        assert_eq!(g.circuit_length(&[Vertex::User(0), Vertex::User(1)]), b + b - q(2, 1));
    }
}
