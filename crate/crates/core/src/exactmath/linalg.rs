//! Exact Gaussian elimination over any field.

use super::field::OrderedField;

/// Reduces `rows` in place to reduced row echelon form and returns the pivot
/// columns. Zero rows are dropped.
fn rref<F: OrderedField>(rows: &mut Vec<Vec<F>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero_value()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = F::one_value().over(&rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = x.times(&inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero_value() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero_value() {
                    *x = x.minus(&f.times(p));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank<F: OrderedField>(rows: &[Vec<F>]) -> usize {
    let Some(n) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut m = rows.to_vec();
    rref(&mut m, n).len()
}

/// A basis of `{x : rows · x = 0}` for vectors of length `n`.
pub fn nullspace<F: OrderedField>(rows: &[Vec<F>], n: usize) -> Vec<Vec<F>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![F::zero_value(); n];
            x[f] = F::one_value();
            for (row, &pc) in m.iter().zip(&pivots) {
                x[pc] = row[f].negated();
            }
            x
        })
        .collect()
}

/// Solution set of `rows · x = rhs` as a point plus directions.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSolution<F> {
    pub point: Vec<F>,
    pub directions: Vec<Vec<F>>,
}

pub fn solve_affine<F: OrderedField>(rows: &[Vec<F>], rhs: &[F], n: usize) -> Option<AffineSolution<F>> {
    assert_eq!(rows.len(), rhs.len());
    let mut aug: Vec<Vec<F>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug, n + 1);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut point = vec![F::zero_value(); n];
    for (row, &pc) in aug.iter().zip(&pivots) {
        point[pc] = row[n].clone();
    }
    Some(AffineSolution { point, directions: nullspace(rows, n) })
}

/// Whether `target` is a linear combination of `basis`.
pub fn span_member<F: OrderedField>(target: &[F], basis: &[Vec<F>]) -> bool {
    // Solve B^T y = target.
    let k = basis.len();
    let rows: Vec<Vec<F>> =
        (0..target.len()).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    solve_affine(&rows, target, k).is_some()
}
