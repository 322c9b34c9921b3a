//! Dense two-phase simplex with Bland's rule over an arbitrary ordered field.
//!
//! Problem sizes here are tiny (at most a handful of variables and a few dozen
//! rows), so the tableau is dense and every variable is split into a positive
//! and a negative part.

use std::cmp::Ordering;

use super::field::OrderedField;
use super::linalg::rank;
use super::Rational;

/// `coeffs · x = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equality<F = Rational> {
    pub coeffs: Vec<F>,
    pub rhs: F,
}

/// `coeffs · x <= rhs`, or `<` when `strict`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality<F = Rational> {
    pub coeffs: Vec<F>,
    pub rhs: F,
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem<F = Rational> {
    n: usize,
    pub equalities: Vec<Equality<F>>,
    pub inequalities: Vec<Inequality<F>>,
}

impl<F: OrderedField> LinearSystem<F> {
    pub fn new(n: usize) -> Self {
        LinearSystem { n, equalities: Vec::new(), inequalities: Vec::new() }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn has_strict(&self) -> bool {
        self.inequalities.iter().any(|r| r.strict)
    }

    pub fn push_eq(&mut self, coeffs: Vec<F>, rhs: F) -> &mut Self {
        assert_eq!(coeffs.len(), self.n, "row arity mismatch");
        self.equalities.push(Equality { coeffs, rhs });
        self
    }

    pub fn push_le(&mut self, coeffs: Vec<F>, rhs: F) -> &mut Self {
        self.push_ineq(coeffs, rhs, false)
    }

    pub fn push_lt(&mut self, coeffs: Vec<F>, rhs: F) -> &mut Self {
        self.push_ineq(coeffs, rhs, true)
    }

    pub fn push_ge(&mut self, coeffs: Vec<F>, rhs: F) -> &mut Self {
        let neg = coeffs.iter().map(F::negated).collect();
        self.push_ineq(neg, rhs.negated(), false)
    }

    pub fn push_gt(&mut self, coeffs: Vec<F>, rhs: F) -> &mut Self {
        let neg = coeffs.iter().map(F::negated).collect();
        self.push_ineq(neg, rhs.negated(), true)
    }

    pub fn push_ineq(&mut self, coeffs: Vec<F>, rhs: F, strict: bool) -> &mut Self {
        assert_eq!(coeffs.len(), self.n, "row arity mismatch");
        self.inequalities.push(Inequality { coeffs, rhs, strict });
        self
    }

    /// `lo <= x_i <= hi` for every coordinate.
    pub fn push_box(&mut self, lo: &F, hi: &F, strict: bool) -> &mut Self {
        for i in 0..self.n {
            let mut e = vec![F::zero_value(); self.n];
            e[i] = F::one_value();
            self.push_ineq(e.clone(), hi.clone(), strict);
            let neg = e.iter().map(F::negated).collect();
            self.push_ineq(neg, lo.negated(), strict);
        }
        self
    }

    pub fn extend(&mut self, other: &LinearSystem<F>) -> &mut Self {
        assert_eq!(self.n, other.n);
        self.equalities.extend(other.equalities.iter().cloned());
        self.inequalities.extend(other.inequalities.iter().cloned());
        self
    }

    pub fn is_satisfied_by(&self, x: &[F]) -> bool {
        let dot = |c: &[F]| c.iter().zip(x).fold(F::zero_value(), |acc, (a, b)| acc.plus(&a.times(b)));
        self.equalities.iter().all(|e| dot(&e.coeffs).minus(&e.rhs).is_zero_value())
            && self.inequalities.iter().all(|r| {
                let s = dot(&r.coeffs).minus(&r.rhs).sign();
                if r.strict {
                    s == Ordering::Less
                } else {
                    s != Ordering::Greater
                }
            })
    }

    pub fn map<G: OrderedField>(&self, f: impl Fn(&F) -> G) -> LinearSystem<G> {
        LinearSystem {
            n: self.n,
            equalities: self
                .equalities
                .iter()
                .map(|e| Equality { coeffs: e.coeffs.iter().map(&f).collect(), rhs: f(&e.rhs) })
                .collect(),
            inequalities: self
                .inequalities
                .iter()
                .map(|r| Inequality {
                    coeffs: r.coeffs.iter().map(&f).collect(),
                    rhs: f(&r.rhs),
                    strict: r.strict,
                })
                .collect(),
        }
    }

    /// Same system with every coordinate index `j` renamed to `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> LinearSystem<F> {
        assert_eq!(perm.len(), self.n);
        let re = |c: &[F]| {
            let mut out = vec![F::zero_value(); self.n];
            for (j, v) in c.iter().enumerate() {
                out[perm[j]] = v.clone();
            }
            out
        };
        LinearSystem {
            n: self.n,
            equalities: self
                .equalities
                .iter()
                .map(|e| Equality { coeffs: re(&e.coeffs), rhs: e.rhs.clone() })
                .collect(),
            inequalities: self
                .inequalities
                .iter()
                .map(|r| Inequality { coeffs: re(&r.coeffs), rhs: r.rhs.clone(), strict: r.strict })
                .collect(),
        }
    }

    /// Adds one trailing variable with zero coefficient everywhere.
    fn widened(&self) -> LinearSystem<F> {
        self.map(|x| x.clone()).with_arity(self.n + 1)
    }

    fn with_arity(mut self, n: usize) -> LinearSystem<F> {
        for e in &mut self.equalities {
            e.coeffs.resize(n, F::zero_value());
        }
        for r in &mut self.inequalities {
            r.coeffs.resize(n, F::zero_value());
        }
        self.n = n;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility<F = Rational> {
    Feasible(Vec<F>),
    Infeasible,
}

impl<F> Feasibility<F> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(self) -> Option<Vec<F>> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<F = Rational> {
    Optimum { value: F, witness: Vec<F> },
    Unbounded,
    Infeasible,
}

impl<F> LpOutcome<F> {
    pub fn value(&self) -> Option<&F> {
        match self {
            LpOutcome::Optimum { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Decides feasibility exactly. Strict rows are honoured: the witness satisfies
/// them strictly.
pub fn lp_feasible<F: OrderedField>(sys: &LinearSystem<F>) -> Feasibility<F> {
    if !sys.has_strict() {
        return match solve(sys, None) {
            LpOutcome::Optimum { witness, .. } => Feasibility::Feasible(witness),
            _ => Feasibility::Infeasible,
        };
    }
    // Maximise a common margin t on every strict row, capped at 1.
    let n = sys.arity();
    let mut wide = sys.widened();
    for r in &mut wide.inequalities {
        if r.strict {
            r.coeffs[n] = F::one_value();
            r.strict = false;
        }
    }
    let mut cap = vec![F::zero_value(); n + 1];
    cap[n] = F::one_value();
    wide.push_le(cap, F::one_value());
    let mut obj = vec![F::zero_value(); n + 1];
    obj[n] = F::one_value().negated();
    match solve(&wide, Some(&obj)) {
        LpOutcome::Optimum { value, mut witness } if value.is_neg() => {
            witness.truncate(n);
            debug_assert!(!F::EXACT || sys.is_satisfied_by(&witness));
            Feasibility::Feasible(witness)
        }
        _ => Feasibility::Infeasible,
    }
}

/// Minimises `objective · x`. Strict rows are relaxed to non-strict ones.
pub fn lp_minimize<F: OrderedField>(objective: &[F], sys: &LinearSystem<F>) -> LpOutcome<F> {
    assert_eq!(objective.len(), sys.arity());
    solve(sys, Some(objective))
}

pub fn lp_maximize<F: OrderedField>(objective: &[F], sys: &LinearSystem<F>) -> LpOutcome<F> {
    let neg: Vec<F> = objective.iter().map(F::negated).collect();
    match solve(sys, Some(&neg)) {
        LpOutcome::Optimum { value, witness } => LpOutcome::Optimum { value: value.negated(), witness },
        other => other,
    }
}

/// Which signs `coeffs · x + constant` can take on the solution set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SignSet {
    pub negative: bool,
    pub zero: bool,
    pub positive: bool,
}

impl SignSet {
    pub fn is_empty(&self) -> bool {
        !(self.negative || self.zero || self.positive)
    }

    /// The expression is forced to a single sign.
    pub fn forced(&self) -> Option<Ordering> {
        match (self.negative, self.zero, self.positive) {
            (true, false, false) => Some(Ordering::Less),
            (false, true, false) => Some(Ordering::Equal),
            (false, false, true) => Some(Ordering::Greater),
            _ => None,
        }
    }
}

pub fn decide_sign<F: OrderedField>(sys: &LinearSystem<F>, coeffs: &[F], constant: &F) -> SignSet {
    let neg_const = constant.negated();
    let mut s = sys.clone();
    s.push_lt(coeffs.to_vec(), neg_const.clone());
    let negative = lp_feasible(&s).is_feasible();
    let mut s = sys.clone();
    s.push_eq(coeffs.to_vec(), neg_const.clone());
    let zero = lp_feasible(&s).is_feasible();
    let mut s = sys.clone();
    s.push_gt(coeffs.to_vec(), neg_const);
    let positive = lp_feasible(&s).is_feasible();
    SignSet { negative, zero, positive }
}

/// Dimension of the affine hull of the solution set, `-1` when empty.
pub fn affine_dim<F: OrderedField>(sys: &LinearSystem<F>) -> i64 {
    if !lp_feasible(sys).is_feasible() {
        return -1;
    }
    let n = sys.arity();
    let mut relaxed = sys.clone();
    for r in &mut relaxed.inequalities {
        r.strict = false;
    }
    let mut rows: Vec<Vec<F>> = relaxed.equalities.iter().map(|e| e.coeffs.clone()).collect();
    // Strict rows of a nonempty set are never implicit equalities.
    let candidates: Vec<usize> =
        (0..sys.inequalities.len()).filter(|&i| !sys.inequalities[i].strict).collect();
    if !candidates.is_empty() {
        let mut probe = relaxed.clone();
        for &i in &candidates {
            probe.inequalities[i].strict = true;
        }
        if !lp_feasible(&probe).is_feasible() {
            for &i in &candidates {
                let r = &relaxed.inequalities[i];
                if let LpOutcome::Optimum { value, .. } = lp_minimize(&r.coeffs, &relaxed) {
                    if value.compare(&r.rhs) == Ordering::Equal {
                        rows.push(r.coeffs.clone());
                    }
                }
            }
        }
    }
    n as i64 - rank(&rows) as i64
}

enum Run {
    Optimal,
    Unbounded,
}

struct Tableau<F> {
    a: Vec<Vec<F>>,
    b: Vec<F>,
    basis: Vec<usize>,
    ncols: usize,
    banned: Vec<bool>,
}

impl<F: OrderedField> Tableau<F> {
    fn pivot(&mut self, r: usize, c: usize, d: &mut [F], z: &mut F) {
        let p = self.a[r][c].clone();
        if p != F::one_value() {
            for x in self.a[r].iter_mut() {
                if !x.is_zero_value() {
                    *x = x.over(&p);
                }
            }
            self.b[r] = self.b[r].over(&p);
        }
        let nz: Vec<usize> = (0..self.ncols).filter(|&j| !self.a[r][j].is_zero_value()).collect();
        let (pivot_row, pivot_rhs) = (self.a[r].clone(), self.b[r].clone());
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero_value() {
                continue;
            }
            let f = self.a[i][c].clone();
            for &j in &nz {
                self.a[i][j] = self.a[i][j].minus(&f.times(&pivot_row[j]));
            }
            if !pivot_rhs.is_zero_value() {
                self.b[i] = self.b[i].minus(&f.times(&pivot_rhs));
            }
        }
        if !d[c].is_zero_value() {
            let f = d[c].clone();
            for &j in &nz {
                d[j] = d[j].minus(&f.times(&pivot_row[j]));
            }
            *z = z.plus(&f.times(&pivot_rhs));
        }
        self.basis[r] = c;
    }

    fn run(&mut self, d: &mut [F], z: &mut F) -> Run {
        loop {
            let Some(c) = (0..self.ncols).find(|&j| !self.banned[j] && d[j].is_neg()) else {
                return Run::Optimal;
            };
            let mut best: Option<(usize, F)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_pos() {
                    continue;
                }
                let ratio = self.b[i].over(&self.a[i][c]);
                let better = match &best {
                    None => true,
                    Some((bi, br)) => match ratio.compare(br) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[*bi],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Run::Unbounded;
            };
            self.pivot(r, c, d, z);
        }
    }

    fn reduced_costs(&self, cost: &[F]) -> (Vec<F>, F) {
        let mut d = cost.to_vec();
        let mut z = F::zero_value();
        for (i, &bc) in self.basis.iter().enumerate() {
            let cb = &cost[bc];
            if cb.is_zero_value() {
                continue;
            }
            for j in 0..self.ncols {
                if !self.a[i][j].is_zero_value() {
                    d[j] = d[j].minus(&cb.times(&self.a[i][j]));
                }
            }
            z = z.plus(&cb.times(&self.b[i]));
        }
        (d, z)
    }
}

fn solve<F: OrderedField>(sys: &LinearSystem<F>, objective: Option<&[F]>) -> LpOutcome<F> {
    let n = sys.arity();
    let n_struct = 2 * n;
    let n_slack = sys.inequalities.len();
    let m = sys.equalities.len() + n_slack;

    let mut rows: Vec<Vec<F>> = Vec::with_capacity(m);
    let mut rhs: Vec<F> = Vec::with_capacity(m);
    let mut basis: Vec<Option<usize>> = Vec::with_capacity(m);
    let width = n_struct + n_slack;
    let split = |c: &[F], row: &mut Vec<F>| {
        for (j, v) in c.iter().enumerate() {
            row[2 * j] = v.clone();
            row[2 * j + 1] = v.negated();
        }
    };
    for e in &sys.equalities {
        let mut row = vec![F::zero_value(); width];
        split(&e.coeffs, &mut row);
        let mut b = e.rhs.clone();
        if b.is_neg() {
            row.iter_mut().for_each(|x| *x = x.negated());
            b = b.negated();
        }
        rows.push(row);
        rhs.push(b);
        basis.push(None);
    }
    for (k, r) in sys.inequalities.iter().enumerate() {
        let mut row = vec![F::zero_value(); width];
        split(&r.coeffs, &mut row);
        row[n_struct + k] = F::one_value();
        let mut b = r.rhs.clone();
        if b.is_neg() {
            row.iter_mut().for_each(|x| *x = x.negated());
            b = b.negated();
            basis.push(None);
        } else {
            basis.push(Some(n_struct + k));
        }
        rows.push(row);
        rhs.push(b);
    }

    let n_art = basis.iter().filter(|b| b.is_none()).count();
    let ncols = width + n_art;
    let mut next_art = width;
    let mut final_basis = Vec::with_capacity(m);
    for (row, b) in rows.iter_mut().zip(&basis) {
        row.resize(ncols, F::zero_value());
        match b {
            Some(c) => final_basis.push(*c),
            None => {
                row[next_art] = F::one_value();
                final_basis.push(next_art);
                next_art += 1;
            }
        }
    }
    let mut t = Tableau { a: rows, b: rhs, basis: final_basis, ncols, banned: vec![false; ncols] };

    if n_art > 0 {
        let mut cost = vec![F::zero_value(); ncols];
        for c in cost.iter_mut().skip(width) {
            *c = F::one_value();
        }
        let (mut d, mut z) = t.reduced_costs(&cost);
        // Phase one is bounded below by zero.
        let _ = t.run(&mut d, &mut z);
        if !z.is_zero_value() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] >= width {
                match (0..width).find(|&j| !t.a[i][j].is_zero_value()) {
                    Some(j) => {
                        let mut dummy_d = vec![F::zero_value(); ncols];
                        let mut dummy_z = F::zero_value();
                        t.pivot(i, j, &mut dummy_d, &mut dummy_z);
                        i += 1;
                    }
                    None => {
                        t.a.remove(i);
                        t.b.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for j in width..ncols {
            t.banned[j] = true;
        }
    }

    let value;
    match objective {
        None => value = F::zero_value(),
        Some(obj) => {
            assert_eq!(obj.len(), n);
            let mut cost = vec![F::zero_value(); ncols];
            split(obj, &mut cost);
            let (mut d, mut z) = t.reduced_costs(&cost);
            if let Run::Unbounded = t.run(&mut d, &mut z) {
                return LpOutcome::Unbounded;
            }
            value = z;
        }
    }

    let mut col_value = vec![F::zero_value(); ncols];
    for (i, &c) in t.basis.iter().enumerate() {
        col_value[c] = t.b[i].clone();
    }
    let witness = (0..n).map(|j| col_value[2 * j].minus(&col_value[2 * j + 1])).collect();
    LpOutcome::Optimum { value, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{int, rat, rvec};

    fn descending_simplex() -> LinearSystem {
        // 1 >= a1 >= ... >= a5 >= 0, sum = 3
        let mut s = LinearSystem::new(5);
        s.push_eq(rvec(&[1, 1, 1, 1, 1]), int(3));
        s.push_le(rvec(&[1, 0, 0, 0, 0]), int(1));
        for i in 0..4 {
            let mut c = vec![int(0); 5];
            c[i] = int(-1);
            c[i + 1] = int(1);
            s.push_le(c, int(0));
        }
        s.push_ge(rvec(&[0, 0, 0, 0, 1]), int(0));
        s
    }

    #[test]
    fn unit_interval_is_feasible() {
        let mut s = LinearSystem::new(1);
        s.push_ge(rvec(&[1]), int(0)).push_le(rvec(&[1]), int(1));
        assert_eq!(lp_feasible(&s), Feasibility::Feasible(vec![int(0)]));
    }

    #[test]
    fn contradictory_bounds() {
        let mut s = LinearSystem::new(1);
        s.push_ge(rvec(&[1]), int(1)).push_le(rvec(&[1]), int(0));
        assert_eq!(lp_feasible(&s), Feasibility::Infeasible);
    }

    #[test]
    fn ordered_simplex_feasible_at_uniform_point() {
        let s = descending_simplex();
        let w = lp_feasible(&s).witness().unwrap();
        assert!(s.is_satisfied_by(&w));
        assert!(s.is_satisfied_by(&[rat(3, 5), rat(3, 5), rat(3, 5), rat(3, 5), rat(3, 5)]));
    }

    #[test]
    fn coordinate_minima_over_ordered_simplex() {
        let s = descending_simplex();
        let mins: Vec<Rational> = (0..5)
            .map(|i| {
                let mut c = vec![int(0); 5];
                c[i] = int(1);
                lp_minimize(&c, &s).value().unwrap().clone()
            })
            .collect();
        assert_eq!(mins, vec![rat(3, 5), rat(1, 2), rat(1, 3), int(0), int(0)]);
    }

    #[test]
    fn strict_rows_are_strict() {
        // 0 < x < 1, x <= 0 is infeasible; 0 <= x <= 1, x < 1 has witness < 1
        let mut s = LinearSystem::new(1);
        s.push_gt(rvec(&[1]), int(0)).push_le(rvec(&[1]), int(0));
        assert!(!lp_feasible(&s).is_feasible());
        let mut s = LinearSystem::new(1);
        s.push_ge(rvec(&[1]), int(1)).push_lt(rvec(&[1]), int(2));
        let w = lp_feasible(&s).witness().unwrap();
        assert!(w[0] >= int(1) && w[0] < int(2));
    }

    #[test]
    fn unbounded_detected() {
        let mut s = LinearSystem::new(2);
        s.push_ge(rvec(&[1, 0]), int(0));
        assert_eq!(lp_minimize(&rvec(&[-1, 0]), &s), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut s = LinearSystem::new(2);
        s.push_eq(rvec(&[1, 1]), int(1)).push_eq(rvec(&[2, 2]), int(2));
        s.push_ge(rvec(&[1, 0]), int(0)).push_ge(rvec(&[0, 1]), int(0));
        let out = lp_maximize(&rvec(&[1, 0]), &s);
        assert_eq!(out.value(), Some(&int(1)));
    }

    #[test]
    fn affine_dims() {
        assert_eq!(affine_dim(&descending_simplex()), 4);
        let mut s = LinearSystem::new(2);
        s.push_ge(rvec(&[1, 0]), int(0)).push_le(rvec(&[1, 0]), int(0));
        s.push_le(rvec(&[0, 1]), int(3));
        assert_eq!(affine_dim(&s), 1);
        s.push_ge(rvec(&[0, 1]), int(4));
        assert_eq!(affine_dim(&s), -1);
    }

    #[test]
    fn sign_sets() {
        let mut s = LinearSystem::new(1);
        s.push_ge(rvec(&[1]), int(0)).push_le(rvec(&[1]), int(1));
        let ss = decide_sign(&s, &rvec(&[1]), &int(0));
        assert_eq!(ss, SignSet { negative: false, zero: true, positive: true });
        let ss = decide_sign(&s, &rvec(&[1]), &int(1));
        assert_eq!(ss.forced(), Some(Ordering::Greater));
    }
}
