//! Hypergraph packing: integer, t-fold and fractional packing numbers, the
//! chain structure of layer-2 graphs in the three-transmitter class, and the
//! resulting closed-form sum DoF.

use crate::lp::{solve_max, LinearProgram, LpError, LpStatus};
use crate::rational::Rational;
use crate::topology::{classify_realistic, CsitTopology, RealisticClass};

/// Vertex limit for the exhaustive integer searches.
pub const MAX_PACKING_VERTICES: usize = 20;
/// Search-node budget for [`t_fold_packing_number`].
pub const T_FOLD_NODE_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PackingError {
    #[error("TooLarge: {0}")]
    TooLarge(String),
    #[error("InvalidHypergraph: {0}")]
    Invalid(String),
    #[error("NotRealisticClass: {0}")]
    NotRealisticClass(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LpStatus: packing LP ended {0:?}")]
    LpStatus(LpStatus),
}

/// Vertices `0..n`; each hyperedge is a sorted, nonempty vertex list.
/// Repeated hyperedges are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self, PackingError> {
        if n == 0 {
            return Err(PackingError::Invalid("no vertices".into()));
        }
        let mut covered = vec![false; n];
        let mut norm = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(PackingError::Invalid("empty hyperedge".into()));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(PackingError::Invalid(format!("vertex {v} out of range")));
            }
            for &v in &e {
                covered[v] = true;
            }
            norm.push(e);
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(PackingError::Invalid(format!("vertex {v} is in no hyperedge")));
        }
        Ok(Hypergraph { n, edges: norm })
    }

    /// One hyperedge per row: the columns holding a 1.
    pub fn from_matrix(m: &[Vec<bool>]) -> Result<Self, PackingError> {
        let n = m.first().map_or(0, Vec::len);
        if m.iter().any(|row| row.len() != n) {
            return Err(PackingError::Invalid("ragged matrix".into()));
        }
        Hypergraph::new(n, m.iter().map(|row| (0..n).filter(|&j| row[j]).collect()).collect())
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// `max 1.d` s.t. one `<= 1` row per hyperedge, `d >= 0`.
    pub fn packing_lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(vec![Rational::ONE; self.n]).expect("nonempty");
        for e in &self.edges {
            let mut row = vec![Rational::ZERO; self.n];
            for &v in e {
                row[v] = Rational::ONE;
            }
            lp.add_le(row, Rational::ONE).expect("width");
        }
        lp
    }

    fn conflicts(&self) -> Vec<u32> {
        let mut c = vec![0u32; self.n];
        for e in &self.edges {
            let mask = e.iter().fold(0u32, |m, &v| m | 1 << v);
            for &v in e {
                c[v] |= mask & !(1 << v);
            }
        }
        c
    }

    fn check_size(&self) -> Result<(), PackingError> {
        if self.n > MAX_PACKING_VERTICES {
            return Err(PackingError::TooLarge(format!(
                "{} vertices, limit {MAX_PACKING_VERTICES}",
                self.n
            )));
        }
        Ok(())
    }
}

fn best_independent(cand: u32, chosen: u32, conflicts: &[u32], best: &mut u32) {
    if (chosen | cand).count_ones() <= best.count_ones() {
        return;
    }
    if cand == 0 {
        *best = chosen;
        return;
    }
    let v = cand.trailing_zeros() as usize;
    let bit = 1u32 << v;
    best_independent(cand & !bit & !conflicts[v], chosen | bit, conflicts, best);
    best_independent(cand & !bit, chosen, conflicts, best);
}

/// A largest packing: vertices no two of which share a hyperedge.
pub fn max_packing(h: &Hypergraph) -> Result<Vec<usize>, PackingError> {
    h.check_size()?;
    let conflicts = h.conflicts();
    let all = if h.n == 32 { u32::MAX } else { (1u32 << h.n) - 1 };
    let mut best = 0u32;
    best_independent(all, 0, &conflicts, &mut best);
    Ok((0..h.n).filter(|&v| best >> v & 1 == 1).collect())
}

pub fn packing_number(h: &Hypergraph) -> Result<usize, PackingError> {
    max_packing(h).map(|p| p.len())
}

/// Optimal value and a vertex optimizer of the packing LP.
pub fn fractional_packing(h: &Hypergraph) -> Result<(Rational, Vec<Rational>), PackingError> {
    let sol = solve_max(&h.packing_lp());
    match sol.status {
        LpStatus::Optimal => Ok((sol.value, sol.point)),
        s => Err(PackingError::LpStatus(s)),
    }
}

pub fn fractional_packing_number(h: &Hypergraph) -> Result<Rational, PackingError> {
    fractional_packing(h).map(|(v, _)| v)
}

struct TFold<'a> {
    h: &'a Hypergraph,
    incident: Vec<Vec<usize>>,
    remaining: Vec<u64>,
    best: u64,
    target: u64,
    nodes: u64,
}

impl TFold<'_> {
    fn cap(&self, v: usize) -> u64 {
        self.incident[v].iter().map(|&e| self.remaining[e]).min().unwrap_or(0)
    }

    fn search(&mut self, v: usize, total: u64) -> Result<(), PackingError> {
        self.nodes += 1;
        if self.nodes > T_FOLD_NODE_BUDGET {
            return Err(PackingError::TooLarge(format!(
                "t-fold search exceeded {T_FOLD_NODE_BUDGET} nodes"
            )));
        }
        if self.best >= self.target {
            return Ok(());
        }
        if v == self.h.n {
            self.best = self.best.max(total);
            return Ok(());
        }
        let bound: u64 = total + (v..self.h.n).map(|w| self.cap(w)).sum::<u64>();
        if bound <= self.best {
            return Ok(());
        }
        for x in (0..=self.cap(v)).rev() {
            for &e in &self.incident[v] {
                self.remaining[e] -= x;
            }
            let r = self.search(v + 1, total + x);
            for &e in &self.incident[v] {
                self.remaining[e] += x;
            }
            r?;
        }
        Ok(())
    }
}

/// Largest `sum d` over nonnegative integers with every hyperedge sum at
/// most `t`. Branch and bound, stopped early at `floor(t * p_f)`.
pub fn t_fold_packing_number(h: &Hypergraph, t: u64) -> Result<u64, PackingError> {
    h.check_size()?;
    if t == 0 {
        return Err(PackingError::Invalid("t must be positive".into()));
    }
    let pf = fractional_packing_number(h)?;
    let target = (pf * Rational::from_int(t as i128)).floor().numer() as u64;
    let mut incident = vec![Vec::new(); h.n];
    for (i, e) in h.edges.iter().enumerate() {
        for &v in e {
            incident[v].push(i);
        }
    }
    let mut s = TFold {
        h,
        incident,
        remaining: vec![t; h.edges.len()],
        best: 0,
        target,
        nodes: 0,
    };
    s.search(0, 0)?;
    Ok(s.best)
}

/// Exact rank over the rationals.
pub fn row_rank(m: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][c];
        for i in 0..a.len() {
            if i != rank && !a[i][c].is_zero() {
                let f = a[i][c] / pivot;
                for j in c..cols {
                    let sub = f * a[rank][j];
                    a[i][j] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecomposition {
    /// Vertex sequences in path order; a circuit is a single closed sequence.
    pub chains: Vec<Vec<usize>>,
    pub is_circuit: bool,
    /// Number of chains with an odd vertex count (0 for a circuit).
    pub epsilon: usize,
    /// Rank of the input matrix, for reference.
    pub row_rank: usize,
}

/// Splits the layer-2 graph of the three-transmitter class into chains.
///
/// Each row must hold its diagonal plus one cyclic neighbor. Components are
/// found on the deduplicated edge set; a component with as many edges as
/// vertices is the full circuit. Rank is reported but not used to classify,
/// because an even circuit is rank deficient.
pub fn chain_decomposition(m2: &[Vec<bool>]) -> Result<ChainDecomposition, PackingError> {
    let k = m2.len();
    if k < 3 || m2.iter().any(|row| row.len() != k) {
        return Err(PackingError::NotRealisticClass(
            "need a square matrix with K >= 3".into(),
        ));
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, row) in m2.iter().enumerate() {
        let ones: Vec<usize> = (0..k).filter(|&j| row[j]).collect();
        let neighbor = ones.iter().copied().find(|&j| j != i);
        let ok = ones.len() == 2 && row[i] && neighbor.is_some_and(|j| j == (i + 1) % k || j == (i + k - 1) % k);
        if !ok {
            return Err(PackingError::NotRealisticClass(format!(
                "row {} must hold the diagonal and one cyclic neighbor",
                i + 1
            )));
        }
        let j = neighbor.expect("checked");
        edges.push((i.min(j), i.max(j)));
    }
    edges.sort_unstable();
    edges.dedup();
    let mut adj = vec![Vec::new(); k];
    for &(x, y) in &edges {
        adj[x].push(y);
        adj[y].push(x);
    }
    let rank = row_rank(
        &m2.iter()
            .map(|row| {
                row.iter()
                    .map(|&b| if b { Rational::ONE } else { Rational::ZERO })
                    .collect()
            })
            .collect::<Vec<_>>(),
    );
    if edges.len() == k && adj.iter().all(|a| a.len() == 2) {
        let mut cycle = vec![0];
        let mut prev = 0;
        let mut cur = adj[0][0].min(adj[0][1]);
        while cur != 0 {
            cycle.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        return Ok(ChainDecomposition {
            chains: vec![cycle],
            is_circuit: true,
            epsilon: 0,
            row_rank: rank,
        });
    }
    // Otherwise every component is a path.
    let mut seen = vec![false; k];
    let mut chains = Vec::new();
    for start in 0..k {
        if seen[start] || adj[start].len() > 1 {
            continue;
        }
        let mut chain = vec![start];
        seen[start] = true;
        let mut cur = start;
        while let Some(&next) = adj[cur].iter().find(|&&n| !seen[n]) {
            seen[next] = true;
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    chains.sort_by_key(|c| *c.iter().min().expect("nonempty chain"));
    let epsilon = chains.iter().filter(|c| c.len() % 2 == 1).count();
    Ok(ChainDecomposition {
        chains,
        is_circuit: false,
        epsilon,
        row_rank: rank,
    })
}

/// Layer-2 matrix of the class: user k decodes its own message and the one
/// from the neighbor whose link has quality `a`.
pub fn realistic_layer2_matrix(c: &RealisticClass) -> Vec<Vec<bool>> {
    let k = c.k;
    (0..k)
        .map(|i| {
            let j = if c.forward[i] { (i + 1) % k } else { (i + k - 1) % k };
            (0..k).map(|x| x == i || x == j).collect()
        })
        .collect()
}

/// Hyperedges `{k-1, k, k+1}` for every user.
pub fn three_neighbor_hypergraph(k: usize) -> Result<Hypergraph, PackingError> {
    Hypergraph::new(k, (0..k).map(|i| vec![(i + k - 1) % k, i, (i + 1) % k]).collect())
}

fn require_class(t: &CsitTopology) -> Result<RealisticClass, PackingError> {
    classify_realistic(t).ok_or_else(|| {
        PackingError::NotRealisticClass(
            "each user must hear exactly its two cyclic neighbors with qualities {a, b}".into(),
        )
    })
}

/// Closed-form TRS sum DoF of the three-transmitter class:
/// `K/3 + (K/6) b + (K/2) a + ((b - a)/2) eps`.
pub fn realistic_sum_dof(t: &CsitTopology) -> Result<Rational, PackingError> {
    let c = require_class(t)?;
    let eps = if c.a == c.b {
        0
    } else {
        chain_decomposition(&realistic_layer2_matrix(&c))?.epsilon
    };
    Ok(realistic_sum_dof_from(c.k, c.a, c.b, eps))
}

pub fn realistic_sum_dof_from(k: usize, a: Rational, b: Rational, epsilon: usize) -> Rational {
    let kr = Rational::from(k);
    kr / Rational::from_int(3)
        + kr * b / Rational::from_int(6)
        + kr * a / Rational::from_int(2)
        + (b - a) * Rational::from(epsilon) / Rational::from_int(2)
}

/// The same quantity assembled from LP packing values:
/// `K a + (b - a) p_f(layer 2) + (1 - b) p_f(three-neighbor)`.
pub fn realistic_sum_dof_lp(t: &CsitTopology) -> Result<Rational, PackingError> {
    let c = require_class(t)?;
    let l2 = fractional_packing_number(&Hypergraph::from_matrix(&realistic_layer2_matrix(&c))?)?;
    let l3 = fractional_packing_number(&three_neighbor_hypergraph(c.k)?)?;
    Ok(Rational::from(c.k) * c.a + (c.b - c.a) * l2 + (Rational::ONE - c.b) * l3)
}
