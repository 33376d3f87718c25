//! Exact rational linear programming.
//!
//! Dictionary simplex (basic variables written as affine functions of the
//! nonbasic ones) with Bland's rule. Phase I adds one auxiliary variable
//! when the origin is infeasible. Free variables are split as `x+ - x-`.

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("EmptyProgram: at least one variable is required")]
    Empty,
    #[error("DimensionMismatch: row has {got} coefficients, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("MalformedPacking: {0}")]
    MalformedPacking(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when optimal; zero otherwise.
    pub value: Rational,
    pub point: Vec<Rational>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// `max c.x` subject to rows `A x <= b`; variables nonnegative unless freed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    rows: Vec<(Vec<Rational>, Rational)>,
    nonneg: Vec<bool>,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Result<Self, LpError> {
        if objective.is_empty() {
            return Err(LpError::Empty);
        }
        let n = objective.len();
        Ok(LinearProgram {
            objective,
            rows: Vec::new(),
            nonneg: vec![true; n],
        })
    }

    pub fn add_le(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> Result<(), LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::DimensionMismatch {
                got: coeffs.len(),
                expected: self.objective.len(),
            });
        }
        self.rows.push((coeffs, rhs));
        Ok(())
    }

    pub fn set_free(&mut self, var: usize) {
        self.nonneg[var] = false;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn rows(&self) -> &[(Vec<Rational>, Rational)] {
        &self.rows
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    /// Exact feasibility check of a point.
    pub fn satisfies(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(&self.nonneg).all(|(v, &nn)| !nn || !v.is_negative())
            && self.rows.iter().all(|(a, b)| dot(a, x) <= *b)
    }
}

pub(crate) fn dot(a: &[Rational], x: &[Rational]) -> Rational {
    a.iter()
        .zip(x)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, v)| *c * *v)
        .sum()
}

struct Dictionary {
    beta: Vec<Rational>,
    alpha: Vec<Vec<Rational>>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    cost: Vec<Rational>,
    z0: Rational,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Dictionary {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.alpha[r][c];
        let inv = Rational::ONE / piv;
        // Rewrite row r for the entering variable.
        let ncols = self.nonbasic.len();
        let mut row = std::mem::take(&mut self.alpha[r]);
        let beta_r = -self.beta[r] * inv;
        for (j, v) in row.iter_mut().enumerate() {
            if j == c {
                *v = inv;
            } else if !v.is_zero() {
                *v = -*v * inv;
            }
        }
        for i in 0..self.beta.len() {
            if i == r {
                continue;
            }
            let f = self.alpha[i][c];
            if f.is_zero() {
                continue;
            }
            self.beta[i] += f * beta_r;
            let ai = &mut self.alpha[i];
            for j in 0..ncols {
                if j == c {
                    ai[j] = f * row[c];
                } else if !row[j].is_zero() {
                    ai[j] += f * row[j];
                }
            }
        }
        let f = self.cost[c];
        if !f.is_zero() {
            self.z0 += f * beta_r;
            for j in 0..ncols {
                if j == c {
                    self.cost[j] = f * row[c];
                } else if !row[j].is_zero() {
                    self.cost[j] += f * row[j];
                }
            }
        }
        self.beta[r] = beta_r;
        self.alpha[r] = row;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[c]);
    }

    /// Bland's rule: smallest-index improving variable enters, ties on the
    /// ratio test go to the smallest-index basic variable.
    fn run(&mut self) -> Outcome {
        loop {
            let entering = (0..self.nonbasic.len())
                .filter(|&j| self.cost[j].is_positive())
                .min_by_key(|&j| self.nonbasic[j]);
            let Some(c) = entering else { return Outcome::Optimal };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.beta.len() {
                let a = self.alpha[i][c];
                if !a.is_negative() {
                    continue;
                }
                let ratio = self.beta[i] / -a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basic[i] < self.basic[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return Outcome::Unbounded,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn remove_column(&mut self, c: usize) {
        for row in &mut self.alpha {
            row.remove(c);
        }
        self.cost.remove(c);
        self.nonbasic.remove(c);
    }

    fn value_of(&self, var: usize) -> Rational {
        self.basic
            .iter()
            .position(|&b| b == var)
            .map_or(Rational::ZERO, |i| self.beta[i])
    }
}

/// Solves `lp` exactly. An optimal result carries a vertex optimizer.
pub fn solve_max(lp: &LinearProgram) -> LpSolution {
    let n = lp.num_vars();
    let m = lp.rows.len();
    // Column layout after splitting free variables.
    let mut cols: Vec<(usize, bool)> = Vec::new();
    for v in 0..n {
        cols.push((v, true));
        if !lp.nonneg[v] {
            cols.push((v, false));
        }
    }
    let np = cols.len();
    let signed = |coef: Rational, positive: bool| if positive { coef } else { -coef };
    let mut d = Dictionary {
        beta: lp.rows.iter().map(|(_, b)| *b).collect(),
        alpha: lp
            .rows
            .iter()
            .map(|(a, _)| cols.iter().map(|&(v, p)| -signed(a[v], p)).collect())
            .collect(),
        basic: (np..np + m).collect(),
        nonbasic: (0..np).collect(),
        cost: vec![Rational::ZERO; np],
        z0: Rational::ZERO,
    };

    let most_negative = (0..m)
        .filter(|&i| d.beta[i].is_negative())
        .min_by(|&i, &j| d.beta[i].cmp(&d.beta[j]).then(d.basic[i].cmp(&d.basic[j])));
    if let Some(r) = most_negative {
        let aux = np + m;
        for row in &mut d.alpha {
            row.push(Rational::ONE);
        }
        d.nonbasic.push(aux);
        d.cost = vec![Rational::ZERO; np + 1];
        d.cost[np] = -Rational::ONE;
        d.pivot(r, np);
        d.run();
        if d.z0.is_negative() {
            return LpSolution {
                status: LpStatus::Infeasible,
                value: Rational::ZERO,
                point: vec![Rational::ZERO; n],
            };
        }
        if let Some(r) = d.basic.iter().position(|&b| b == aux) {
            let c = (0..d.nonbasic.len())
                .filter(|&j| !d.alpha[r][j].is_zero())
                .min_by_key(|&j| d.nonbasic[j]);
            match c {
                Some(c) => d.pivot(r, c),
                None => {
                    d.beta.remove(r);
                    d.alpha.remove(r);
                    d.basic.remove(r);
                }
            }
        }
        let c = d
            .nonbasic
            .iter()
            .position(|&v| v == aux)
            .expect("aux variable is nonbasic");
        d.remove_column(c);
    }

    // Phase II objective in terms of the current nonbasic variables.
    let ncols = d.nonbasic.len();
    d.cost = vec![Rational::ZERO; ncols];
    d.z0 = Rational::ZERO;
    for (j, &var) in d.nonbasic.iter().enumerate() {
        if var < np {
            let (v, p) = cols[var];
            d.cost[j] += signed(lp.objective[v], p);
        }
    }
    for i in 0..d.basic.len() {
        let var = d.basic[i];
        if var >= np {
            continue;
        }
        let (v, p) = cols[var];
        let cv = signed(lp.objective[v], p);
        if cv.is_zero() {
            continue;
        }
        d.z0 += cv * d.beta[i];
        for j in 0..ncols {
            if !d.alpha[i][j].is_zero() {
                let add = cv * d.alpha[i][j];
                d.cost[j] += add;
            }
        }
    }

    let status = match d.run() {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Unbounded => LpStatus::Unbounded,
    };
    let mut point = vec![Rational::ZERO; n];
    if status == LpStatus::Optimal {
        for (var, &(v, p)) in cols.iter().enumerate() {
            point[v] += signed(d.value_of(var), p);
        }
    }
    let value = if status == LpStatus::Optimal {
        d.z0
    } else {
        Rational::ZERO
    };
    LpSolution { status, value, point }
}

/// For a packing LP `max 1.d, A d <= 1, d >= 0` (with `A >= 0`), solves the
/// covering dual `min 1.y, A^T y >= 1, y >= 0`. The returned point is `y`.
pub fn solve_dual(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    if lp.objective.iter().any(|c| *c != Rational::ONE) {
        return Err(LpError::MalformedPacking("objective must be all ones".into()));
    }
    if lp.nonneg.iter().any(|nn| !nn) {
        return Err(LpError::MalformedPacking("all variables must be nonnegative".into()));
    }
    for (i, (a, b)) in lp.rows.iter().enumerate() {
        if *b != Rational::ONE {
            return Err(LpError::MalformedPacking(format!(
                "row {} has rhs {b}, expected 1",
                i + 1
            )));
        }
        if a.iter().any(|c| c.is_negative()) {
            return Err(LpError::MalformedPacking(format!(
                "row {} has a negative coefficient",
                i + 1
            )));
        }
    }
    let m = lp.rows.len();
    if m == 0 {
        // No constraints: the primal is unbounded and the dual has no variables.
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: Rational::ZERO,
            point: vec![],
        });
    }
    let mut dual = LinearProgram::new(vec![-Rational::ONE; m])?;
    for j in 0..n {
        dual.add_le(lp.rows.iter().map(|(a, _)| -a[j]).collect(), -Rational::ONE)?;
    }
    let sol = solve_max(&dual);
    Ok(LpSolution {
        status: sol.status,
        value: -sol.value,
        point: sol.point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn r(n: i128) -> Rational {
        Rational::from_int(n)
    }

    fn packing(n: usize, edges: &[&[usize]]) -> LinearProgram {
        let mut lp = LinearProgram::new(vec![r(1); n]).unwrap();
        for e in edges {
            let mut row = vec![r(0); n];
            for &v in *e {
                row[v] = r(1);
            }
            lp.add_le(row, r(1)).unwrap();
        }
        lp
    }

    #[test]
    fn single_box() {
        let mut lp = LinearProgram::new(vec![r(1)]).unwrap();
        lp.add_le(vec![r(1)], r(1)).unwrap();
        let s = solve_max(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value, r(1));
        assert_eq!(s.point, vec![r(1)]);
    }

    #[test]
    fn triangle_packing() {
        let lp = packing(3, &[&[0, 1], &[1, 2], &[2, 0]]);
        let s = solve_max(&lp);
        assert_eq!(s.value, q(3, 2));
        assert!(lp.satisfies(&s.point));
        assert_eq!(solve_dual(&lp).unwrap().value, q(3, 2));
    }

    #[test]
    fn vertex_at_integer_point() {
        let lp = packing(3, &[&[0], &[1, 2]]);
        let s = solve_max(&lp);
        assert_eq!(s.value, r(2));
        assert!(s.point == vec![r(1), r(1), r(0)] || s.point == vec![r(1), r(0), r(1)]);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(solve_dual(&packing(4, &[&[0], &[1], &[2], &[3]])).unwrap().value, r(4));
        assert_eq!(
            solve_dual(&packing(4, &[&[0, 1], &[1, 2], &[2, 3]])).unwrap().value,
            r(2)
        );
        let mut bad = packing(2, &[&[0, 1]]);
        bad.add_le(vec![r(1), r(0)], r(2)).unwrap();
        assert!(matches!(solve_dual(&bad), Err(LpError::MalformedPacking(_))));
    }

    #[test]
    fn unbounded_and_infeasible() {
        let mut lp = LinearProgram::new(vec![r(1), r(0)]).unwrap();
        lp.add_le(vec![r(0), r(1)], r(1)).unwrap();
        assert_eq!(solve_max(&lp).status, LpStatus::Unbounded);

        let mut lp = LinearProgram::new(vec![r(1)]).unwrap();
        lp.add_le(vec![r(1)], r(1)).unwrap();
        lp.add_le(vec![r(-1)], r(-2)).unwrap();
        assert_eq!(solve_max(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn phase_one_lower_bound() {
        // max -x - y s.t. x + y >= 3/2, x <= 1, y <= 1.
        let mut lp = LinearProgram::new(vec![r(-1), r(-1)]).unwrap();
        lp.add_le(vec![r(-1), r(-1)], q(-3, 2)).unwrap();
        lp.add_le(vec![r(1), r(0)], r(1)).unwrap();
        lp.add_le(vec![r(0), r(1)], r(1)).unwrap();
        let s = solve_max(&lp);
        assert_eq!(s.value, q(-3, 2));
        assert!(lp.satisfies(&s.point));
    }

    #[test]
    fn free_variable() {
        // max -x s.t. -x <= 2 with x free: optimum at x = -2.
        let mut lp = LinearProgram::new(vec![r(-1)]).unwrap();
        lp.add_le(vec![r(-1)], r(2)).unwrap();
        lp.set_free(0);
        let s = solve_max(&lp);
        assert_eq!(s.value, r(2));
        assert_eq!(s.point, vec![r(-2)]);
    }

    #[test]
    fn degenerate_cycling_instance() {
        // Beale's example, cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(vec![q(3, 4), r(-150), q(1, 50), r(-6)]).unwrap();
        lp.add_le(vec![q(1, 4), r(-60), q(-1, 25), r(9)], r(0)).unwrap();
        lp.add_le(vec![q(1, 2), r(-90), q(-1, 50), r(3)], r(0)).unwrap();
        lp.add_le(vec![r(0), r(0), r(1), r(0)], r(1)).unwrap();
        let s = solve_max(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value, q(1, 20));
    }

    #[test]
    fn rejects_bad_width() {
        let mut lp = LinearProgram::new(vec![r(1)]).unwrap();
        assert!(lp.add_le(vec![r(1), r(1)], r(1)).is_err());
        assert!(LinearProgram::new(vec![]).is_err());
    }
}
