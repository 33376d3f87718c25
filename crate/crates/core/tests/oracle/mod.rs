//! Independent oracles shared by the integration tests. Nothing here calls
//! the region builder, the simplex solver or the support DP.
#![allow(dead_code)]

use misodof_core::region::cyclic_sequences;
use misodof_core::topology::{ActiveSet, CsitTopology, PowerPolicy};
use misodof_core::{q, Rational};

pub type Row = (Vec<Rational>, Rational);

/// RS (or ZFBF) inequalities over `(d_p for u in order, [d_c])`, built by
/// listing every cyclic sequence and every rotation of it.
pub fn enumerated_rows(t: &CsitTopology, u: &ActiveSet, with_common: bool) -> Vec<Row> {
    let n = u.len() + usize::from(with_common);
    let pos = |k: usize| u.position(k).unwrap();
    let mut rows = Vec::new();
    for i in 0..n {
        let mut c = vec![Rational::ZERO; n];
        c[i] = Rational::ONE;
        rows.push((c, Rational::ONE));
    }
    let seqs = cyclic_sequences(u);
    for s in &seqs {
        let mut c = vec![Rational::ZERO; n];
        for &k in s.users() {
            c[pos(k)] = Rational::ONE;
        }
        let m = s.users().len();
        let w: Rational = (0..m).map(|l| t.a(s.users()[(l + m - 1) % m], s.users()[l])).sum();
        rows.push((c, w));
    }
    if with_common {
        let mut paths: Vec<Vec<usize>> = u.iter().map(|k| vec![k]).collect();
        for s in &seqs {
            let m = s.users().len();
            for start in 0..m {
                paths.push((0..m).map(|l| s.users()[(start + l) % m]).collect());
            }
        }
        for p in paths {
            let mut c = vec![Rational::ZERO; n];
            for &k in &p {
                c[pos(k)] = Rational::ONE;
            }
            c[n - 1] = Rational::ONE;
            let w: Rational = (1..p.len()).map(|l| t.a(p[l - 1], p[l])).sum();
            rows.push((c, Rational::ONE + w));
        }
    }
    rows
}

pub fn member(rows: &[Row], x: &[Rational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && rows
            .iter()
            .all(|(c, b)| c.iter().zip(x).map(|(a, v)| *a * *v).sum::<Rational>() <= *b)
}

/// Unique solution of a square system, if any.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, m: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == m {
        f(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, m, i + 1, cur, f);
        cur.pop();
    }
}

/// All vertices of `{x >= 0, rows}` in `n` variables by basis enumeration.
pub fn vertices(rows: &[Row], n: usize) -> Vec<Vec<Rational>> {
    let mut all: Vec<Row> = (0..n)
        .map(|i| {
            let mut c = vec![Rational::ZERO; n];
            c[i] = -Rational::ONE;
            (c, Rational::ZERO)
        })
        .collect();
    all.extend(rows.iter().cloned());
    let mut out: Vec<Vec<Rational>> = Vec::new();
    combinations(all.len(), n, 0, &mut Vec::new(), &mut |idx| {
        let a = idx.iter().map(|&i| all[i].0.clone()).collect();
        let b = idx.iter().map(|&i| all[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if member(rows, &x) && !out.contains(&x) {
                out.push(x);
            }
        }
    });
    out
}

/// Maximum of `sum x` over the vertices.
pub fn vertex_max(rows: &[Row], n: usize) -> Rational {
    vertices(rows, n).iter().map(|x| x.iter().copied().sum()).max().unwrap()
}

/// Every policy on the grid `{0, 1/den, ..., 1}` over the members of `s`.
pub fn grid_policies(k: usize, s: &ActiveSet, den: i128) -> Vec<PowerPolicy> {
    let members = s.members();
    let steps = (den + 1) as usize;
    let total = steps.pow(members.len() as u32);
    (0..total)
        .map(|mut idx| {
            let mut r = vec![Rational::ZERO; k];
            for &m in members {
                r[m] = q((idx % steps) as i128, den);
                idx /= steps;
            }
            PowerPolicy::new(r).unwrap()
        })
        .collect()
}

/// Largest number of vertices (with multiplicity) such that every edge
/// holds at most `t` of them, by trying every multiplicity vector.
pub fn brute_t_fold(n: usize, edges: &[Vec<usize>], t: u64) -> u64 {
    let steps = t + 1;
    let mut best = 0;
    for mut idx in 0..steps.pow(n as u32) {
        let mut x = vec![0u64; n];
        for v in x.iter_mut() {
            *v = idx % steps;
            idx /= steps;
        }
        if edges.iter().all(|e| e.iter().map(|&v| x[v]).sum::<u64>() <= t) {
            best = best.max(x.iter().sum());
        }
    }
    best
}

/// `sum_{m=2}^{n} C(n,m) (m-1)!`.
pub fn sequence_count(n: u64) -> u64 {
    let fact = |m: u64| (1..=m).product::<u64>();
    (2..=n).map(|m| fact(n) / (fact(m) * fact(n - m)) * fact(m - 1)).sum()
}
