//! Network topology: connectivity bits, CSIT qualities, active sets and
//! power policies.
//!
//! Indices are 0-based in this API and 1-based in the text format and in
//! error messages. Neighbor arithmetic for cyclic layouts is modulo `K`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("TooFewUsers: K={0}, need K >= 2")]
    TooFewUsers(usize),
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("MissingDiagonal at ({0},{0})")]
    MissingDiagonal(usize),
    #[error("QualityOutOfRange at ({rx},{tx}): {value}")]
    QualityOutOfRange { rx: usize, tx: usize, value: Rational },
    #[error("QualityOnAbsentLink at ({rx},{tx})")]
    QualityOnAbsentLink { rx: usize, tx: usize },
    #[error("QualityOnDiagonal at ({0},{0})")]
    QualityOnDiagonal(usize),
    #[error("MissingQuality at ({rx},{tx})")]
    MissingQuality { rx: usize, tx: usize },
    #[error("DuplicateQuality at ({rx},{tx})")]
    DuplicateQuality { rx: usize, tx: usize },
    #[error("IndexOutOfRange at ({rx},{tx})")]
    IndexOutOfRange { rx: usize, tx: usize },
    #[error("InvalidOrder: a={a} > b={b}")]
    InvalidOrder { a: Rational, b: Rational },
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("Parse: {0}")]
    Parse(String),
}

/// A validated topology. `quality(k, j)` is the CSIT quality of the link
/// from transmitter `j` to receiver `k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CsitTopology {
    k: usize,
    conn: Vec<bool>,
    quality: Vec<Option<Rational>>,
}

/// Unvalidated input for [`validate_topology`], 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyCandidate {
    pub k: usize,
    pub connectivity: Vec<Vec<bool>>,
    /// `(rx, tx, a_rx_tx)`.
    pub qualities: Vec<(usize, usize, Rational)>,
}

pub fn validate_topology(raw: TopologyCandidate) -> Result<CsitTopology, TopologyError> {
    let k = raw.k;
    if k < 2 {
        return Err(TopologyError::TooFewUsers(k));
    }
    if raw.connectivity.len() != k || raw.connectivity.iter().any(|row| row.len() != k) {
        return Err(TopologyError::ShapeMismatch(format!(
            "connectivity must be {k} rows of {k} bits"
        )));
    }
    let mut conn = vec![false; k * k];
    for (rx, row) in raw.connectivity.iter().enumerate() {
        for (tx, &bit) in row.iter().enumerate() {
            conn[rx * k + tx] = bit;
        }
    }
    for u in 0..k {
        if !conn[u * k + u] {
            return Err(TopologyError::MissingDiagonal(u + 1));
        }
    }
    let mut quality = vec![None; k * k];
    for &(rx, tx, value) in &raw.qualities {
        if rx >= k || tx >= k {
            return Err(TopologyError::IndexOutOfRange { rx: rx + 1, tx: tx + 1 });
        }
        if rx == tx {
            return Err(TopologyError::QualityOnDiagonal(rx + 1));
        }
        if value.is_negative() || value > Rational::ONE {
            return Err(TopologyError::QualityOutOfRange {
                rx: rx + 1,
                tx: tx + 1,
                value,
            });
        }
        if !conn[rx * k + tx] {
            return Err(TopologyError::QualityOnAbsentLink { rx: rx + 1, tx: tx + 1 });
        }
        if quality[rx * k + tx].replace(value).is_some() {
            return Err(TopologyError::DuplicateQuality { rx: rx + 1, tx: tx + 1 });
        }
    }
    for rx in 0..k {
        for tx in 0..k {
            if rx != tx && conn[rx * k + tx] && quality[rx * k + tx].is_none() {
                return Err(TopologyError::MissingQuality { rx: rx + 1, tx: tx + 1 });
            }
        }
    }
    Ok(CsitTopology { k, conn, quality })
}

impl CsitTopology {
    /// Fully connected topology with `a_kj = f(k, j)` for `k != j`.
    pub fn fully_connected(k: usize, f: impl Fn(usize, usize) -> Rational) -> Result<Self, TopologyError> {
        let mut qualities = Vec::new();
        for rx in 0..k {
            for tx in 0..k {
                if rx != tx {
                    qualities.push((rx, tx, f(rx, tx)));
                }
            }
        }
        validate_topology(TopologyCandidate {
            k,
            connectivity: vec![vec![true; k]; k],
            qualities,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn connected(&self, rx: usize, tx: usize) -> bool {
        self.conn[rx * self.k + tx]
    }

    pub fn quality(&self, rx: usize, tx: usize) -> Option<Rational> {
        self.quality[rx * self.k + tx]
    }

    /// Quality of a link known to be present; panics otherwise.
    pub fn a(&self, rx: usize, tx: usize) -> Rational {
        self.quality(rx, tx)
            .unwrap_or_else(|| panic!("no quality on link ({},{})", rx + 1, tx + 1))
    }

    pub fn is_fully_connected(&self) -> bool {
        self.conn.iter().all(|&c| c)
    }

    /// True when every pair of distinct users in `s` is mutually connected.
    pub fn fully_connected_over(&self, s: &ActiveSet) -> bool {
        s.iter().all(|k| s.iter().all(|j| self.connected(k, j)))
    }

    /// Present interference links as `(rx, tx, a)`, row-major.
    pub fn interference_links(&self) -> impl Iterator<Item = (usize, usize, Rational)> + '_ {
        (0..self.k).flat_map(move |rx| (0..self.k).filter_map(move |tx| self.quality(rx, tx).map(|a| (rx, tx, a))))
    }

    /// Sorted distinct quality values.
    pub fn distinct_qualities(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.interference_links().map(|(_, _, a)| a).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn to_candidate(&self) -> TopologyCandidate {
        TopologyCandidate {
            k: self.k,
            connectivity: (0..self.k)
                .map(|rx| (0..self.k).map(|tx| self.connected(rx, tx)).collect())
                .collect(),
            qualities: self.interference_links().collect(),
        }
    }
}

impl fmt::Debug for CsitTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CsitTopology K={}", self.k)?;
        for rx in 0..self.k {
            let row: Vec<String> = (0..self.k)
                .map(|tx| match (rx == tx, self.quality(rx, tx)) {
                    (true, _) => "*".to_string(),
                    (false, Some(a)) => a.to_string(),
                    (false, None) => "-".to_string(),
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

fn check_params(k: usize, a: Rational, b: Rational) -> Result<(), TopologyError> {
    if k < 3 {
        return Err(TopologyError::InvalidParameter(format!("K={k}, need K >= 3")));
    }
    if a.is_negative() || b > Rational::ONE {
        return Err(TopologyError::InvalidParameter(format!(
            "need 0 <= a <= b <= 1, got a={a}, b={b}"
        )));
    }
    if a > b {
        return Err(TopologyError::InvalidOrder { a, b });
    }
    Ok(())
}

/// Three-transmitter topology where user `k` hears `k-1`, `k`, `k+1`.
/// `forward[k]` selects which neighbor carries the weaker quality `a`:
/// `true` gives `a_{k,k+1} = a, a_{k,k-1} = b`, `false` the reverse.
pub fn make_realistic_topology(
    k: usize,
    a: Rational,
    b: Rational,
    forward: &[bool],
) -> Result<CsitTopology, TopologyError> {
    check_params(k, a, b)?;
    if forward.len() != k {
        return Err(TopologyError::ShapeMismatch(format!(
            "orientation has {} entries, expected {k}",
            forward.len()
        )));
    }
    let mut connectivity = vec![vec![false; k]; k];
    let mut qualities = Vec::with_capacity(2 * k);
    for rx in 0..k {
        let next = (rx + 1) % k;
        let prev = (rx + k - 1) % k;
        connectivity[rx][rx] = true;
        connectivity[rx][next] = true;
        connectivity[rx][prev] = true;
        let (qn, qp) = if forward[rx] { (a, b) } else { (b, a) };
        qualities.push((rx, next, qn));
        qualities.push((rx, prev, qp));
    }
    validate_topology(TopologyCandidate {
        k,
        connectivity,
        qualities,
    })
}

/// Cyclic layout: `a_{k,k+1} = a`, `a_{k,k-1} = b`, other links absent.
pub fn make_cyclic_topology(k: usize, a: Rational, b: Rational) -> Result<CsitTopology, TopologyError> {
    make_realistic_topology(k, a, b, &vec![true; k])
}

/// Fully connected copy where each absent interference link gets quality 1.
pub fn effective_zfbf_topology(t: &CsitTopology) -> CsitTopology {
    let k = t.k;
    let mut quality = t.quality.clone();
    for rx in 0..k {
        for tx in 0..k {
            if rx != tx && !t.connected(rx, tx) {
                quality[rx * k + tx] = Some(Rational::ONE);
            }
        }
    }
    CsitTopology {
        k,
        conn: vec![true; k * k],
        quality,
    }
}

/// Parameters of a topology from the three-transmitter `{a, b}` class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealisticClass {
    pub k: usize,
    pub a: Rational,
    pub b: Rational,
    /// Same convention as [`make_realistic_topology`].
    pub forward: Vec<bool>,
}

impl RealisticClass {
    pub fn is_cyclic(&self) -> bool {
        self.a == self.b || self.forward.iter().all(|&f| f) || self.forward.iter().all(|&f| !f)
    }
}

/// Recognizes the three-transmitter class: each user hears exactly its two
/// cyclic neighbors, one with quality `a` and one with `b`, the same `a <= b`
/// for every user. Returns `None` otherwise.
pub fn classify_realistic(t: &CsitTopology) -> Option<RealisticClass> {
    let k = t.k;
    if k < 3 {
        return None;
    }
    let mut ab: Option<(Rational, Rational)> = None;
    let mut forward = Vec::with_capacity(k);
    for rx in 0..k {
        let next = (rx + 1) % k;
        let prev = (rx + k - 1) % k;
        for tx in 0..k {
            let expect = tx == rx || tx == next || tx == prev;
            if t.connected(rx, tx) != expect {
                return None;
            }
        }
        let (qn, qp) = (t.a(rx, next), t.a(rx, prev));
        let (lo, hi) = if qn <= qp { (qn, qp) } else { (qp, qn) };
        match ab {
            None => ab = Some((lo, hi)),
            Some(x) if x != (lo, hi) => return None,
            _ => {}
        }
        forward.push(qn <= qp);
    }
    let (a, b) = ab?;
    Some(RealisticClass { k, a, b, forward })
}

/// Nonempty subset of users, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActiveSet {
    members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActiveSetError {
    #[error("EmptyActiveSet")]
    Empty,
    #[error("UserOutOfRange: user {user} with K={k}")]
    OutOfRange { user: usize, k: usize },
}

impl ActiveSet {
    pub fn new(k: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, ActiveSetError> {
        let mut m: Vec<usize> = members.into_iter().collect();
        m.sort_unstable();
        m.dedup();
        if m.is_empty() {
            return Err(ActiveSetError::Empty);
        }
        if let Some(&u) = m.iter().find(|&&u| u >= k) {
            return Err(ActiveSetError::OutOfRange { user: u + 1, k });
        }
        Ok(ActiveSet { members: m })
    }

    pub fn full(k: usize) -> Self {
        ActiveSet {
            members: (0..k).collect(),
        }
    }

    /// Panics on an empty mask.
    pub fn from_mask(mask: u64) -> Self {
        assert!(mask != 0, "empty active set");
        ActiveSet {
            members: (0..64).filter(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn mask(&self) -> u64 {
        self.members.iter().fold(0, |m, &i| m | 1 << i)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.members.binary_search(&u).is_ok()
    }

    pub fn position(&self, u: usize) -> Option<usize> {
        self.members.binary_search(&u).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn is_subset_of(&self, other: &ActiveSet) -> bool {
        self.mask() & !other.mask() == 0
    }
}

impl fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.members.iter().map(|u| (u + 1).to_string()).collect();
        write!(f, "{{{}}}", v.join(","))
    }
}

impl fmt::Debug for ActiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Private power exponents, one per transmitter. Inactive users carry 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowerPolicy {
    r: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("PowerAboveOne: r_{user} = {value}")]
pub struct PowerPolicyError {
    pub user: usize,
    pub value: Rational,
}

impl PowerPolicy {
    pub fn new(r: Vec<Rational>) -> Result<Self, PowerPolicyError> {
        if let Some((i, &v)) = r.iter().enumerate().find(|(_, v)| **v > Rational::ONE) {
            return Err(PowerPolicyError { user: i + 1, value: v });
        }
        Ok(PowerPolicy { r })
    }

    pub fn zeros(k: usize) -> Self {
        PowerPolicy {
            r: vec![Rational::ZERO; k],
        }
    }

    pub fn uniform(k: usize, s: &ActiveSet, value: Rational) -> Result<Self, PowerPolicyError> {
        PowerPolicy::new(
            (0..k)
                .map(|u| if s.contains(u) { value } else { Rational::ZERO })
                .collect(),
        )
    }

    pub fn get(&self, k: usize) -> Rational {
        self.r[k]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `max_{k in S} r_k`.
    pub fn max_over(&self, s: &ActiveSet) -> Rational {
        s.iter().map(|k| self.r[k]).max().expect("nonempty active set")
    }
}

impl fmt::Display for PowerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.r.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", v.join(", "))
    }
}

impl fmt::Debug for PowerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Text format.

#[derive(Serialize, Deserialize)]
struct TopologyDoc {
    #[serde(rename = "K")]
    k: usize,
    connectivity: Vec<String>,
    #[serde(default)]
    qualities: Vec<QualityRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QualityRecord {
    rx: usize,
    tx: usize,
    num: i64,
    den: i64,
}

/// Parses the TOML topology document and validates it.
pub fn parse_topology(text: &str) -> Result<CsitTopology, TopologyError> {
    let doc: TopologyDoc = toml::from_str(text).map_err(|e| TopologyError::Parse(e.to_string()))?;
    let connectivity = doc
        .connectivity
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(TopologyError::Parse(format!(
                        "connectivity row {} has non-bit character {c:?}",
                        i + 1
                    ))),
                })
                .collect::<Result<Vec<bool>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut qualities = Vec::with_capacity(doc.qualities.len());
    for qr in &doc.qualities {
        if qr.rx == 0 || qr.tx == 0 {
            return Err(TopologyError::IndexOutOfRange { rx: qr.rx, tx: qr.tx });
        }
        if qr.den == 0 {
            return Err(TopologyError::Parse(format!(
                "zero denominator at ({},{})",
                qr.rx, qr.tx
            )));
        }
        qualities.push((qr.rx - 1, qr.tx - 1, Rational::new(qr.num as i128, qr.den as i128)));
    }
    validate_topology(TopologyCandidate {
        k: doc.k,
        connectivity,
        qualities,
    })
}

/// Inverse of [`parse_topology`]; qualities listed row-major.
pub fn topology_to_toml(t: &CsitTopology) -> String {
    let doc = TopologyDoc {
        k: t.k,
        connectivity: (0..t.k)
            .map(|rx| (0..t.k).map(|tx| if t.connected(rx, tx) { '1' } else { '0' }).collect())
            .collect(),
        qualities: t
            .interference_links()
            .map(|(rx, tx, a)| QualityRecord {
                rx: rx + 1,
                tx: tx + 1,
                num: a.numer() as i64,
                den: a.denom() as i64,
            })
            .collect(),
    };
    toml::to_string(&doc).expect("topology serializes")
}
