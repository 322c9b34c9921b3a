//! Backtracking search for tilings by one angle case.
//!
//! A node is a tiling graph together with the linear system `Q` on the edge
//! lengths. Nodes are normalised (completion rules, forced merges), tested
//! against the known families and the closure certificate, and then split
//! either on an undecided run pair or on the tiles that fit at one vertex.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hasher;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::Instant;

use fnv::FnvHasher;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{
    alg_cos, alg_sin, common_denominator, nullspace, OrderedField, primitive_integer_vector, decide_sign, int, lp_feasible, lp_maximize, lp_minimize,
    parse_rational,    solve_affine, span_member, trig_bounds, AlgebraicReal, LinearSystem, LpOutcome, Rational,
};
use crate::goodsets::golden_table;
use crate::tiling::{
    base_lengths, edge_between, Attachment, LengthForm, RunPair, Side, Snapshot, TilingGraph,
};
use crate::vectypes::{angle_system, central_open_point, compat, polytope, Permutation5, VecType, VecTypeSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("no case with index {0}")]
    UnknownCase(usize),
    #[error("case {0} has an empty open angle polytope")]
    EmptyCase(usize),
}

/// Direction of edge `k` (between corners `k+1` and `k+2`, 0-based) in units
/// of pi, with the first edge along the positive x axis.
pub fn turning(alpha: &[Rational]) -> [Rational; 5] {
    assert_eq!(alpha.len(), 5);
    let mut acc = Rational::zero();
    std::array::from_fn(|k| {
        if k > 0 {
            acc += &alpha[k];
        }
        int(k as i64) - &acc
    })
}

/// `turning` as affine forms in `alpha`: coefficients and constant.
fn turning_forms() -> [(Vec<Rational>, Rational); 5] {
    std::array::from_fn(|k| {
        let c = (0..5).map(|j| if j >= 1 && j <= k { int(-1) } else { int(0) }).collect();
        (c, int(k as i64))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyKind {
    Known,
    Special,
    Degenerate,
}

/// `coeffs · alpha = rhs`, angles in units of pi.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngleEquation {
    pub coeffs: [i64; 5],
    pub rhs: i64,
}

/// A pentagon family: angle equations and length equations `c · ℓ = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilyCondition {
    pub type_id: u8,
    /// Index of the angle case the family was recorded against.
    pub case_index: usize,
    pub kind: FamilyKind,
    pub angle_equations: Vec<AngleEquation>,
    pub length_equations: Vec<LengthForm>,
}

type Row = (u8, usize, FamilyKind, &'static [(&'static str, i64)], &'static [LengthForm]);

const ANGLES_11: &[(&str, i64)] = &[("00120", 2), ("01011", 2), ("12000", 2)];

const FAMILY_ROWS: &[Row] = {
    use FamilyKind::*;
    &[
        (1, 1, Known, &[("11100", 2)], &[]),
        (2, 2, Known, &[("11010", 2)], &[[0, 0, 1, 0, -1]]),
        (3, 31, Known, &[("00003", 2), ("00012", 2), ("01002", 2)], &[[0, 0, 1, -1, 1], [1, -1, 0, 0, 0]]),
        (4, 6, Known, &[("11010", 2), ("00002", 1)], &[[0, 0, 0, 1, -1], [0, 1, -1, 0, 0]]),
        (5, 4, Known, &[("00003", 2), ("11010", 2)], &[[0, 0, 0, 1, -1], [0, 1, -1, 0, 0]]),
        (6, 13, Known, &[("00012", 2), ("10110", 2)], &[[0, 0, 1, -1, 0], [0, 0, 0, 1, -1], [1, -1, 0, 0, 0]]),
        (7, 17, Known, &[("00012", 2), ("10200", 2)], &[[1, 0, -1, 0, 0], [0, 0, 1, -1, 0], [0, 0, 0, 1, -1]]),
        (8, 14, Known, &[("00012", 2), ("02100", 2)], &[[1, -1, 0, 0, 0], [0, 1, -1, 0, 0], [0, 0, 1, -1, 0]]),
        (9, 15, Known, &[("00012", 2), ("20100", 2)], &[[1, -1, 0, 0, 0], [0, 1, -1, 0, 0], [0, 0, 1, -1, 0]]),
        (10, 69, Known, &[("00210", 2), ("01101", 2), ("12000", 2)], &[[1, 0, 1, -1, 0], [0, 0, 0, 1, -1]]),
        (11, 67, Known, ANGLES_11, &[[1, -1, 0, 0, 0], [0, 1, -1, 0, -2]]),
        (12, 67, Known, ANGLES_11, &[[1, -1, 1, 0, 0], [0, 1, 0, 0, -2]]),
        (13, 63, Known, &[("01020", 2), ("11010", 2), ("00002", 1)], &[[1, -2, 0, 0, 0], [0, 1, -1, 0, 0]]),
        (14, 67, Known, ANGLES_11, &[[1, -1, 0, 0, 0], [0, 1, -2, 0, 0], [0, 0, 1, 0, -1]]),
        (
            15,
            303,
            Known,
            &[("00120", 2), ("02001", 2), ("20010", 2), ("00002", 1)],
            &[[0, 1, 0, -1, 0], [0, 0, 0, 1, -1], [0, -2, 1, 0, 0]],
        ),
        (16, 72, Special, &[("01101", 2), ("02010", 2), ("10200", 2)], &[[2, 0, 0, -1, 0], [0, 0, 0, 1, -1], [1, 0, -1, 0, 0]]),
        (
            17,
            25,
            Special,
            &[("00102", 2), ("02010", 2)],
            &[[1, -1, 0, 0, 0], [0, 1, -1, 0, 0], [0, 0, 1, -1, 0], [0, 0, 0, 1, -1]],
        ),
        (18, 73, Special, &[("00012", 2), ("00102", 2), ("01011", 2)], &[[0, 0, 0, 1, -1], [1, -1, 0, 0, 0]]),
        (19, 23, Special, &[("00102", 2), ("01020", 2)], &[[1, -1, 0, 0, 0], [0, 1, -1, 0, 0], [0, 0, 1, -1, 0]]),
        (20, 2, Degenerate, &[("11010", 2)], &[[1, 0, -1, -1, 0], [0, 1, 0, 0, -1]]),
        (21, 12, Degenerate, &[("00012", 2), ("21000", 2)], &[[1, -1, 0, 0, 0], [0, 0, 1, -1, 0]]),
        (22, 27, Degenerate, &[("00102", 2), ("10020", 2)], &[[1, -1, 0, 0, 0], [0, 1, -1, 0, 0], [0, 0, 1, 0, -1]]),
        (23, 64, Degenerate, &[("02010", 2), ("11010", 2), ("00002", 1)], &[[1, 0, -2, 0, 0], [0, 0, 1, -1, 0]]),
        (24, 69, Degenerate, &[("00210", 2), ("01101", 2), ("12000", 2)], &[[-1, 0, -1, 2, 0], [-1, 0, -1, 0, 2]]),
    ]
};

/// The 24 family conditions in their recorded orientation.
pub fn family_table() -> Vec<FamilyCondition> {
    FAMILY_ROWS
        .iter()
        .map(|&(type_id, case_index, kind, angles, lengths)| FamilyCondition {
            type_id,
            case_index,
            kind,
            angle_equations: angles
                .iter()
                .map(|&(digits, rhs)| {
                    let v: VecType = digits.parse().expect("table digits are well formed");
                    AngleEquation { coeffs: v.0.map(i64::from), rhs }
                })
                .collect(),
            length_equations: lengths.to_vec(),
        })
        .collect()
}

/// A pentagon in one of the fifteen known families, in the family's recorded
/// labelling, with perimeter 1. Angles are in units of pi.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyWitness {
    pub type_id: u8,
    /// The exact angles, for families with a member whose angles are rational.
    pub exact_alpha: Option<Vec<Rational>>,
    pub alpha: [f64; 5],
    /// Approximate in every case; the exact lengths are usually irrational.
    pub lengths: [f64; 5],
}

enum WitnessAngles {
    Exact([&'static str; 5]),
    Approx([f64; 5]),
}

const WITNESS_ROWS: &[(u8, WitnessAngles, [f64; 5])] = {
    use WitnessAngles::*;
    &[
        (1, Exact(["2/3", "2/3", "2/3", "2/3", "1/3"]), [0.1428571428571429, 0.1428571428571429, 0.1428571428571429, 0.2857142857142857, 0.2857142857142857]),
        (2, Exact(["3/5", "3/5", "3/5", "4/5", "2/5"]), [0.2165423646591006, 0.10827118232955013, 0.2834576353408994, 0.10827118232955046, 0.2834576353408994]),
        (3, Exact(["1/2", "2/3", "1/2", "2/3", "2/3"]), [0.2320508075688773, 0.2320508075688773, 0.1339745962155614, 0.2679491924311227, 0.1339745962155614]),
        (4, Exact(["2/3", "2/3", "1/2", "2/3", "1/2"]), [0.15470053837925157, 0.21132486540518725, 0.21132486540518725, 0.21132486540518725, 0.21132486540518725]),
        (5, Exact(["2/3", "2/3", "1/3", "2/3", "2/3"]), [0.1428571428571429, 0.2857142857142857, 0.2857142857142857, 0.1428571428571429, 0.1428571428571429]),
        (6, Exact(["2/3", "1/3", "2/3", "2/3", "2/3"]), [0.2857142857142857, 0.2857142857142857, 0.1428571428571429, 0.1428571428571429, 0.1428571428571429]),
        (
            7,
            Approx([0.5, 0.5520659025541164, 0.75, 0.39586819489176719, 0.8020659025541164]),
            [0.19946032730046227, 0.20215869079815093, 0.19946032730046227, 0.19946032730046227, 0.19946032730046227],
        ),
        (
            8,
            Approx([0.45, 0.71761238705898995, 0.56477522588202009, 0.53522477411797989, 0.73238761294101006]),
            [0.1991646828228202, 0.1991646828228202, 0.1991646828228202, 0.1991646828228202, 0.2033412687087192],
        ),
        (
            9,
            Approx([0.58, 0.41941284739016474, 0.84, 0.32117430521967044, 0.83941284739016478]),
            [0.21046834121829736, 0.21046834121829736, 0.21046834121829736, 0.21046834121829736, 0.15812663512681055],
        ),
        (10, Exact(["1/2", "3/4", "3/4", "1/2", "1/2"]), [0.13487607169490895, 0.1907435698305462, 0.13487607169490895, 0.2697521433898179, 0.2697521433898179]),
        (11, Exact(["2/3", "2/3", "1/3", "5/6", "1/2"]), [0.24697223733163276, 0.24697223733163276, 0.12348611866581638, 0.3208263473380101, 0.06174305933290819]),
        (12, Exact(["2/3", "2/3", "1/3", "5/6", "1/2"]), [0.14854314511050556, 0.29708629022101113, 0.14854314511050556, 0.25728427444747215, 0.14854314511050556]),
        (13, Exact(["2/3", "2/3", "1/2", "2/3", "1/2"]), [0.30940107675850304, 0.15470053837925157, 0.15470053837925157, 0.32457351945705826, 0.05662432702593556]),
        (
            14,
            Approx([0.6148704029055951, 0.69256479854720245, 0.3851295970944049, 0.80743520145279755, 0.5]),
            [0.23005163353663145, 0.23005163353663145, 0.11502581676831572, 0.30984509939010566, 0.11502581676831572],
        ),
        (15, Exact(["7/12", "3/4", "1/3", "5/6", "1/2"]), [0.2786920074753231, 0.14426159850493536, 0.2885231970098707, 0.14426159850493536, 0.14426159850493536]),
    ]
};

/// One stored member of each known family.
pub fn family_witnesses() -> Vec<FamilyWitness> {
    WITNESS_ROWS
        .iter()
        .map(|(type_id, angles, lengths)| {
            let (exact_alpha, alpha) = match angles {
                WitnessAngles::Exact(a) => {
                    let exact: Vec<Rational> = a.iter().map(|s| parse_rational(s).expect("table fractions parse")).collect();
                    let approx = std::array::from_fn(|i| exact[i].to_f64().unwrap_or(f64::NAN));
                    (Some(exact), approx)
                }
                WitnessAngles::Approx(a) => (None, *a),
            };
            FamilyWitness { type_id: *type_id, exact_alpha, alpha, lengths: *lengths }
        })
        .collect()
}

/// The permutation of edge labels induced by relabelling corners by `p`:
/// edge `j` between corners `j` and `j+1` goes to the edge between their
/// images.
pub fn edge_permutation(p: &Permutation5) -> Permutation5 {
    let im = p.images();
    let e = std::array::from_fn(|j| edge_between(im[j] as u8 + 1, im[(j + 1) % 5] as u8 + 1) as usize - 1);
    Permutation5::new(e).expect("a dihedral map permutes the edges")
}

impl FamilyCondition {
    /// The same family with corners relabelled by the dihedral map `p`.
    pub fn image(&self, p: &Permutation5) -> FamilyCondition {
        let edges = edge_permutation(p);
        let rel = |c: &[i64; 5], q: &Permutation5| -> [i64; 5] { q.apply(c).try_into().unwrap() };
        FamilyCondition {
            angle_equations: self
                .angle_equations
                .iter()
                .map(|e| AngleEquation { coeffs: rel(&e.coeffs, p), rhs: e.rhs })
                .collect(),
            length_equations: self.length_equations.iter().map(|c| rel(c, &edges)).collect(),
            ..self.clone()
        }
    }

    pub fn angle_system(&self) -> LinearSystem {
        let mut s = LinearSystem::new(5);
        for e in &self.angle_equations {
            s.push_eq(e.coeffs.iter().map(|&c| int(c)).collect(), int(e.rhs));
        }
        s
    }

    /// Every angle equation holds on all of `P_X`.
    pub fn angles_implied_by(&self, x: &VecTypeSet) -> bool {
        polytope(x, false).implies(&self.angle_system())
    }

    /// Every length equation is implied by `q`.
    pub fn lengths_implied_by(&self, q: &LinearSystem) -> bool {
        self.length_equations.iter().all(|c| implied_zero(q, c))
    }

    /// Residuals of the angle and length equations at a point.
    pub fn residuals(&self, alpha: &[Rational], lengths: &[Rational]) -> Vec<Rational> {
        let dot = |c: &[i64; 5], v: &[Rational]| c.iter().zip(v).fold(Rational::zero(), |a, (&k, x)| a + int(k) * x);
        let mut out: Vec<Rational> =
            self.angle_equations.iter().map(|e| dot(&e.coeffs, alpha) - int(e.rhs)).collect();
        out.extend(self.length_equations.iter().map(|c| dot(c, lengths)));
        out
    }
}

fn form(c: &LengthForm) -> Vec<Rational> {
    c.iter().map(|&k| int(k)).collect()
}

/// Sign information for `c · ℓ` on the solutions of `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormSign {
    /// `q` has no solutions.
    Empty,
    Zero,
    Positive,
    Negative,
    /// More than one sign is possible.
    Open,
}

/// When every inequality of `q` is strict, the affine hull of its (nonempty)
/// solution set is cut out by its equalities alone.
fn equalities_span(q: &LinearSystem, c: &[Rational]) -> bool {
    let rows: Vec<Vec<Rational>> = q
        .equalities
        .iter()
        .map(|e| e.coeffs.iter().cloned().chain(std::iter::once(e.rhs.clone())).collect())
        .collect();
    let target: Vec<Rational> = c.iter().cloned().chain(std::iter::once(Rational::zero())).collect();
    span_member(&target, &rows)
}

fn all_strict(q: &LinearSystem) -> bool {
    q.inequalities.iter().all(|r| r.strict)
}

/// `c · ℓ = 0` on every solution of `q`.
pub fn implied_zero(q: &LinearSystem, c: &LengthForm) -> bool {
    let cf = form(c);
    if c.iter().all(|&k| k == 0) {
        return true;
    }
    if all_strict(q) && lp_feasible(q).is_feasible() {
        return equalities_span(q, &cf);
    }
    let s = decide_sign(q, &cf, &Rational::zero());
    !s.negative && !s.positive
}

pub fn form_sign(q: &LinearSystem, c: &LengthForm) -> FormSign {
    if all_strict(q) && !lp_feasible(q).is_feasible() {
        return FormSign::Empty;
    }
    sign_on_feasible(q, c)
}

/// [`form_sign`] for a system already known to be feasible.
fn sign_on_feasible(q: &LinearSystem, c: &LengthForm) -> FormSign {
    let cf = form(c);
    if !all_strict(q) {
        let s = decide_sign(q, &cf, &Rational::zero());
        return match (s.negative, s.zero, s.positive) {
            (false, false, false) => FormSign::Empty,
            (false, true, false) => FormSign::Zero,
            (false, false, true) => FormSign::Positive,
            (true, false, false) => FormSign::Negative,
            _ => FormSign::Open,
        };
    }
    if c.iter().all(|&k| k == 0) || equalities_span(q, &cf) {
        return FormSign::Zero;
    }
    // The solution set is relatively open in its affine hull and the form is
    // not identically zero there, so it takes every value strictly between
    // its extremes over the closure, and a constant value only when it is
    // constant on the hull.
    let bound = |max: bool| {
        let out = if max { lp_maximize(&cf, q) } else { lp_minimize(&cf, q) };
        match out {
            LpOutcome::Optimum { value, .. } => Some(value),
            LpOutcome::Unbounded => None,
            LpOutcome::Infeasible => unreachable!("the system is feasible"),
        }
    };
    if bound(false).is_some_and(|m| !m.is_negative()) {
        return FormSign::Positive;
    }
    if bound(true).is_some_and(|m| !m.is_positive()) {
        return FormSign::Negative;
    }
    FormSign::Open
}

/// Result of the closure test for a set of angle values and length system.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// A convex pentagon with these angles and lengths exists.
    Feasible { alpha: Vec<Rational>, lengths: Vec<AlgebraicReal> },
    /// No pentagon satisfies the angle case and `Q`.
    InfeasibleCertified,
    /// Neither could be shown within the budget.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateOptions {
    pub max_depth: u32,
    pub max_boxes: usize,
    pub max_candidates: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions { max_depth: 12, max_boxes: 4096, max_candidates: 8 }
    }
}

/// Closure equations `ℓ·cos = 0` and `ℓ·sin = 0` for one angle vector.
#[derive(Clone, Debug)]
struct ClosureRows {
    cos: Vec<AlgebraicReal>,
    sin: Vec<AlgebraicReal>,
}

impl ClosureRows {
    fn new(alpha: &[Rational]) -> Option<ClosureRows> {
        let s = turning(alpha);
        let den = common_denominator(&s).to_u64()?;
        let mut cos = Vec::with_capacity(5);
        let mut sin = Vec::with_capacity(5);
        for sk in &s {
            let p = (sk * Rational::from_integer(BigInt::from(den))).to_integer().to_i64()?;
            cos.push(alg_cos(2 * p, 2 * den));
            sin.push(alg_sin(p, den));
        }
        Some(ClosureRows { cos, sin })
    }

    /// Lengths meeting `q` that close the pentagon. With only strict rows the
    /// feasible lengths form an open cone cut by equations, so the equations
    /// are solved first and the strict rows become a small system on the
    /// remaining free directions.
    fn solve(&self, q: &LinearSystem) -> Option<Vec<AlgebraicReal>> {
        if !all_strict(q) {
            return self.solve_direct(q);
        }
        let zero = AlgebraicReal::rational(Rational::zero());
        let (directions, rows) = self.reduce(q)?;
        let positive_point = |rows: &[&Vec<AlgebraicReal>]| {
            let mut sys = LinearSystem::new(directions.len());
            for row in rows {
                sys.push_lt(row.iter().map(|v| v.negated()).collect(), zero.clone());
            }
            lp_feasible(&sys).witness()
        };
        let t = match guess_positive_point(&rows) {
            Some(t) => t,
            None => {
                // A few rows that look contradictory already settle it.
                if let Some(support) = guess_contradiction(&rows) {
                    let few: Vec<&Vec<AlgebraicReal>> = support.iter().map(|&i| &rows[i]).collect();
                    positive_point(&few)?;
                }
                positive_point(&rows.iter().collect::<Vec<_>>())?
            }
        };
        let x = directions.iter().zip(&t).fold(vec![zero.clone(); 6], |acc, (d, tk)| {
            acc.iter().zip(d).map(|(a, v)| a.plus(&v.times(tk))).collect()
        });
        let tau = x[5].clone();
        Some(x[..5].iter().map(|v| v.over(&tau)).collect())
    }

    /// Free directions of the equations in homogeneous coordinates `(ℓ, τ)`,
    /// and every strict row (with `τ > 0`) written on them as `row · t > 0`.
    #[allow(clippy::type_complexity)]
    fn reduce(&self, q: &LinearSystem) -> Option<(Vec<Vec<AlgebraicReal>>, Vec<Vec<AlgebraicReal>>)> {
        let hom = |c: &[Rational], rhs: &Rational| {
            let mut row = c.to_vec();
            row.push(-rhs.clone());
            row
        };
        let eqs: Vec<Vec<Rational>> = q.equalities.iter().map(|e| hom(&e.coeffs, &e.rhs)).collect();
        let mut strict: Vec<Vec<Rational>> =
            q.inequalities.iter().map(|r| hom(&r.coeffs, &r.rhs).iter().map(|v| -v).collect()).collect();
        strict.push((0..6).map(|k| int(i64::from(k == 5))).collect());
        let basis: Vec<Vec<Rational>> = if eqs.is_empty() {
            (0..6).map(|k| (0..6).map(|j| int(i64::from(j == k))).collect()).collect()
        } else {
            nullspace(&eqs, 6)
        };
        let zero = AlgebraicReal::rational(Rational::zero());
        let closure: Vec<Vec<AlgebraicReal>> = [&self.cos, &self.sin]
            .iter()
            .map(|row| {
                basis
                    .iter()
                    .map(|b| row.iter().zip(b).fold(zero.clone(), |acc, (r, c)| acc.plus(&r.times(&AlgebraicReal::rational(c.clone())))))
                    .collect()
            })
            .collect();
        let free = nullspace(&closure, basis.len());
        if free.is_empty() {
            return None;
        }
        let directions: Vec<Vec<AlgebraicReal>> = free
            .iter()
            .map(|t| {
                (0..6)
                    .map(|k| {
                        basis.iter().zip(t).fold(zero.clone(), |acc, (b, tj)| {
                            acc.plus(&AlgebraicReal::rational(b[k].clone()).times(tj))
                        })
                    })
                    .collect()
            })
            .collect();
        let rows = strict
            .iter()
            .map(|row| {
                directions
                    .iter()
                    .map(|d| row.iter().zip(d).fold(zero.clone(), |acc, (r, v)| acc.plus(&AlgebraicReal::rational(r.clone()).times(v))))
                    .collect()
            })
            .collect();
        Some((directions, rows))
    }

    fn solve_direct(&self, q: &LinearSystem) -> Option<Vec<AlgebraicReal>> {
        let mut sys = q.map(|r| AlgebraicReal::rational(r.clone()));
        let zero = AlgebraicReal::rational(Rational::zero());
        sys.push_eq(self.cos.clone(), zero.clone());
        sys.push_eq(self.sin.clone(), zero);
        lp_feasible(&sys).witness()
    }
}

/// A rational `t` with `row · t > 0` for every row, found in double
/// precision and then checked exactly. `None` says nothing either way.
fn guess_positive_point(rows: &[Vec<AlgebraicReal>]) -> Option<Vec<AlgebraicReal>> {
    let k = rows.first()?.len();
    let mut sys = LinearSystem::new(k);
    for row in rows {
        sys.push_lt(row.iter().map(|v| Approx(-v.rough_f64())).collect(), Approx(0.0));
    }
    let t: Vec<AlgebraicReal> = lp_feasible(&sys)
        .witness()?
        .iter()
        .map(|v| Rational::from_float(v.0).map(AlgebraicReal::rational))
        .collect::<Option<_>>()?;
    let zero = AlgebraicReal::rational(Rational::zero());
    rows.iter()
        .all(|row| row.iter().zip(&t).fold(zero.clone(), |acc, (r, v)| acc.plus(&r.times(v))).is_pos())
        .then_some(t)
}

/// Rows that seem to admit `Σ y_i row_i = 0` with `y >= 0` not all zero,
/// judged in double precision.
fn guess_contradiction(rows: &[Vec<AlgebraicReal>]) -> Option<Vec<usize>> {
    let k = rows.first()?.len();
    let r = rows.len();
    let mut sys = LinearSystem::new(r);
    for j in 0..k {
        sys.push_eq(rows.iter().map(|row| Approx(row[j].rough_f64())).collect(), Approx(0.0));
    }
    sys.push_eq(vec![Approx(1.0); r], Approx(1.0));
    for i in 0..r {
        let mut c = vec![Approx(0.0); r];
        c[i] = Approx(-1.0);
        sys.push_le(c, Approx(0.0));
    }
    let y = lp_feasible(&sys).witness()?;
    let support: Vec<usize> = (0..r).filter(|&i| y[i].0 > 1e-9).collect();
    (!support.is_empty() && support.len() < r).then_some(support)
}

/// Doubles with a tolerance, only for guesses that are checked exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Approx(f64);

const APPROX_TOL: f64 = 1e-11;

impl OrderedField for Approx {
    const EXACT: bool = false;

    fn zero_value() -> Self {
        Approx(0.0)
    }
    fn one_value() -> Self {
        Approx(1.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Approx(r.to_f64().unwrap_or(f64::NAN))
    }
    fn is_zero_value(&self) -> bool {
        self.0.abs() <= APPROX_TOL
    }
    fn sign(&self) -> std::cmp::Ordering {
        if self.0 > APPROX_TOL {
            std::cmp::Ordering::Greater
        } else if self.0 < -APPROX_TOL {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Equal
        }
    }
    fn plus(&self, rhs: &Self) -> Self {
        Approx(self.0 + rhs.0)
    }
    fn minus(&self, rhs: &Self) -> Self {
        Approx(self.0 - rhs.0)
    }
    fn times(&self, rhs: &Self) -> Self {
        Approx(self.0 * rhs.0)
    }
    fn over(&self, rhs: &Self) -> Self {
        Approx(self.0 / rhs.0)
    }
    fn negated(&self) -> Self {
        Approx(-self.0)
    }
}

/// Lengths satisfying `q` that close the pentagon with angles `alpha`,
/// found by an exact LP over the cyclotomic field holding the directions.
pub fn closure_lengths(alpha: &[Rational], q: &LinearSystem) -> Option<Vec<AlgebraicReal>> {
    ClosureRows::new(alpha)?.solve(q)
}

/// Precomputed data for one angle case.
#[derive(Clone, Debug)]
pub struct CaseContext {
    pub index: usize,
    pub x: VecTypeSet,
    pub dim: i64,
    closed: LinearSystem,
    open: LinearSystem,
    candidates: Vec<Vec<Rational>>,
    closures: Vec<ClosureRows>,
    families: Vec<FamilyCondition>,
}

impl CaseContext {
    /// The case with `X = Compat(B_i)` for the shipped basis `B_i`.
    pub fn for_case(index: usize) -> Result<CaseContext, SearchError> {
        let entry = golden_table().into_iter().find(|e| e.index == index).ok_or(SearchError::UnknownCase(index))?;
        let x = compat(&entry.basis_set()).map_err(|_| SearchError::EmptyCase(index))?;
        CaseContext::new(index, x)
    }

    pub fn new(index: usize, x: VecTypeSet) -> Result<CaseContext, SearchError> {
        let poly = polytope(&x, false);
        let open = poly.open();
        if !lp_feasible(&open).is_feasible() {
            return Err(SearchError::EmptyCase(index));
        }
        let dim = poly.dim();
        let mut candidates = Vec::new();
        let mut closures = Vec::new();
        for alpha in candidate_angles(&x, dim) {
            if let Some(rows) = ClosureRows::new(&alpha) {
                candidates.push(alpha);
                closures.push(rows);
            }
        }
        let families = applicable_families(&x, &candidates[0]);
        Ok(CaseContext { index, x, dim, closed: poly.base, open, candidates, closures, families })
    }

    /// Family images whose angle equations hold throughout the case.
    pub fn families(&self) -> &[FamilyCondition] {
        &self.families
    }

    /// Rational angle vectors tried first by the certificate.
    pub fn candidates(&self) -> &[Vec<Rational>] {
        &self.candidates
    }

    pub fn detect(&self, q: &LinearSystem) -> Option<&FamilyCondition> {
        self.families.iter().find(|f| f.lengths_implied_by(q))
    }

    pub fn certificate(&self, q: &LinearSystem, opts: &CertificateOptions) -> Certificate {
        if !lp_feasible(q).is_feasible() {
            return Certificate::InfeasibleCertified;
        }
        if self.dim == 0 {
            return match self.closures[0].solve(q) {
                Some(lengths) => Certificate::Feasible { alpha: self.candidates[0].clone(), lengths },
                None => Certificate::InfeasibleCertified,
            };
        }
        for (alpha, rows) in self.candidates.iter().zip(&self.closures).take(opts.max_candidates) {
            if let Some(lengths) = rows.solve(q) {
                return Certificate::Feasible { alpha: alpha.clone(), lengths };
            }
        }
        if self.cover_all(q, opts) {
            Certificate::InfeasibleCertified
        } else {
            Certificate::Unknown
        }
    }

    fn cover_all(&self, q: &LinearSystem, opts: &CertificateOptions) -> bool {
        let lo = vec![int(0); 5];
        let hi = vec![int(1); 5];
        let mut boxes = 0;
        self.cover(q, lo, hi, 0, opts, &mut boxes)
    }

    /// Shows that no angle vector in the box closes a pentagon with lengths
    /// in `q`, bisecting where the relaxation is too weak.
    fn cover(
        &self,
        q: &LinearSystem,
        lo: Vec<Rational>,
        hi: Vec<Rational>,
        depth: u32,
        opts: &CertificateOptions,
        boxes: &mut usize,
    ) -> bool {
        *boxes += 1;
        if *boxes > opts.max_boxes {
            return false;
        }
        let mut open = self.open.clone();
        let mut closed = self.closed.clone();
        for i in 0..5 {
            let mut e = vec![int(0); 5];
            e[i] = int(1);
            open.push_le(e.clone(), hi[i].clone()).push_ge(e.clone(), lo[i].clone());
            closed.push_le(e.clone(), hi[i].clone()).push_ge(e, lo[i].clone());
        }
        if !lp_feasible(&open).is_feasible() {
            return true;
        }
        let range = |c: &[Rational]| match (lp_minimize(c, &closed), lp_maximize(c, &closed)) {
            (LpOutcome::Optimum { value: a, .. }, LpOutcome::Optimum { value: b, .. }) => (a, b),
            _ => unreachable!("the box is bounded and nonempty"),
        };
        let mut relaxed = q.clone();
        let (mut sin_lo, mut sin_hi, mut cos_lo, mut cos_hi) = (vec![], vec![], vec![], vec![]);
        for (c, k) in turning_forms() {
            let (a, b) = range(&c);
            let (s, co) = trig_bounds(&(a + &k), &(b + &k));
            sin_lo.push(s.lo().clone());
            sin_hi.push(s.hi().clone());
            cos_lo.push(co.lo().clone());
            cos_hi.push(co.hi().clone());
        }
        relaxed.push_ge(sin_hi, int(0)).push_le(sin_lo, int(0));
        relaxed.push_ge(cos_hi, int(0)).push_le(cos_lo, int(0));
        if !lp_feasible(&relaxed).is_feasible() {
            return true;
        }
        if depth >= opts.max_depth {
            return false;
        }
        let bounds: Vec<(Rational, Rational)> = (0..5)
            .map(|i| {
                let mut e = vec![int(0); 5];
                e[i] = int(1);
                range(&e)
            })
            .collect();
        let (i, width) = bounds
            .iter()
            .enumerate()
            .map(|(i, (a, b))| (i, b - a))
            .max_by(|p, q| p.1.cmp(&q.1).then(q.0.cmp(&p.0)))
            .unwrap();
        if width.is_zero() {
            return false;
        }
        let mid = (&bounds[i].0 + &bounds[i].1) / int(2);
        let lo: Vec<Rational> = bounds.iter().map(|b| b.0.clone()).collect();
        let hi: Vec<Rational> = bounds.iter().map(|b| b.1.clone()).collect();
        let mut left_hi = hi.clone();
        left_hi[i] = mid.clone();
        let mut right_lo = lo.clone();
        right_lo[i] = mid;
        self.cover(q, lo, left_hi, depth + 1, opts, boxes) && self.cover(q, right_lo, hi, depth + 1, opts, boxes)
    }
}

/// The table rows under every dihedral relabelling that fits the case,
/// without repeats.
fn applicable_families(x: &VecTypeSet, point: &[Rational]) -> Vec<FamilyCondition> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in family_table() {
        for p in Permutation5::dihedral() {
            let f = row.image(&p);
            let mut key_lengths = f.length_equations.clone();
            key_lengths.sort();
            let holds_at_point = f.residuals(point, &[]).iter().all(|r| r.is_zero());
            if !holds_at_point || seen.contains(&(f.type_id, key_lengths.clone())) || !f.angles_implied_by(x) {
                continue;
            }
            seen.insert((f.type_id, key_lengths));
            out.push(f);
        }
    }
    out
}

const CANDIDATE_DENOMINATORS: [i64; 19] = [2, 3, 4, 5, 6, 8, 9, 10, 12, 15, 16, 18, 20, 24, 30, 36, 40, 48, 60];

/// Points of the open polytope with small denominators. For a zero
/// dimensional case this is the single point.
fn candidate_angles(x: &VecTypeSet, dim: i64) -> Vec<Vec<Rational>> {
    let Some(center) = central_open_point(x, false) else { return vec![] };
    if dim == 0 {
        return vec![center];
    }
    let sys = angle_system(x, false);
    let mut open = sys.clone();
    open.push_box(&int(0), &int(1), true);
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for d in CANDIDATE_DENOMINATORS {
        let mut rows: Vec<Vec<Rational>> = sys.equalities.iter().map(|e| e.coeffs.clone()).collect();
        let mut rhs: Vec<Rational> = sys.equalities.iter().map(|e| e.rhs.clone()).collect();
        let dr = int(d);
        for (i, ci) in center.iter().enumerate() {
            let mut e = vec![int(0); 5];
            e[i] = int(1);
            if !span_member(&e, &rows) {
                rows.push(e);
                rhs.push((ci * &dr).round() / &dr);
            }
        }
        if let Some(sol) = solve_affine(&rows, &rhs, 5) {
            if open.is_satisfied_by(&sol.point) && !out.contains(&sol.point) {
                out.push(sol.point);
            }
        }
    }
    if common_denominator(&center) <= BigInt::from(120) && !out.contains(&center) {
        out.push(center);
    }
    out
}

/// Family detection on a bare angle case, without precomputation.
pub fn detect_family(x: &VecTypeSet, q: &LinearSystem) -> Option<FamilyCondition> {
    let point = central_open_point(x, false)?;
    applicable_families(x, &point).into_iter().find(|f| f.lengths_implied_by(q))
}

/// Certificate for a bare angle case.
pub fn feasibility_certificate(x: &VecTypeSet, q: &LinearSystem) -> Certificate {
    match CaseContext::new(0, x.clone()) {
        Ok(ctx) => ctx.certificate(q, &CertificateOptions::default()),
        Err(_) => Certificate::InfeasibleCertified,
    }
}

/// The children of an undecided run pair: merged with `d = 0`, `d > 0` and
/// `d < 0`. A decided pair yields its single consistent child, and children
/// whose system is empty or whose merge is illegal are dropped.
pub fn branch_run(g: &TilingGraph, q: &LinearSystem, pair: &RunPair) -> Vec<(TilingGraph, LinearSystem)> {
    let merged = |q: LinearSystem| {
        let mut g2 = g.clone();
        g2.merge_occurrences(pair.a, pair.b).ok().map(|_| (g2, q))
    };
    let d = form(&pair.d);
    match form_sign(q, &pair.d) {
        FormSign::Empty => vec![],
        FormSign::Zero => merged(q.clone()).into_iter().collect(),
        FormSign::Positive | FormSign::Negative => vec![(g.clone(), q.clone())],
        FormSign::Open => {
            let mut out = Vec::new();
            let mut eq = q.clone();
            eq.push_eq(d.clone(), int(0));
            out.extend(merged(eq));
            let mut gt = q.clone();
            gt.push_gt(d.clone(), int(0));
            out.push((g.clone(), gt));
            let mut lt = q.clone();
            lt.push_lt(d, int(0));
            out.push((g.clone(), lt));
            out
        }
    }
}

/// Forward attachments at `w` that leave a legal graph.
fn forward_attachments(g: &TilingGraph, w: usize, x: &VecTypeSet) -> Vec<Attachment> {
    g.attachments_on(w, x, &[Side::Forward])
}

/// The non-complete vertex with the fewest admissible tiles, ties to the
/// smallest id, together with those tiles.
fn branch_vertex(g: &TilingGraph, x: &VecTypeSet) -> Option<(usize, Vec<Attachment>)> {
    let mut best: Option<(usize, Vec<Attachment>)> = None;
    for v in g.non_complete_vertices() {
        let atts = forward_attachments(g, v, x);
        if best.as_ref().map_or(true, |b| atts.len() < b.1.len()) {
            let dead = atts.is_empty();
            best = Some((v, atts));
            // Nothing beats a dead end, and ids only grow from here.
            if dead {
                break;
            }
        }
    }
    best
}

pub fn select_branch_vertex(g: &TilingGraph, x: &VecTypeSet) -> Option<usize> {
    branch_vertex(g, x).map(|b| b.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Nodes with this many tiles are not extended further.
    pub max_tiles: usize,
    pub max_nodes: u64,
    pub time_limit_ms: Option<u64>,
    /// Search with tile caps 2, 3, ... up to `max_tiles`, stopping at the
    /// first cap the tree closes under. Families near the root then show up
    /// before the search sinks into one deep subtree.
    #[serde(default = "default_deepening")]
    pub deepening: bool,
    /// In a positive dimensional case every new length system gets the
    /// quick certificate, and every `cert_period`-th node runs the full one
    /// on its system.
    pub cert_period: u64,
    pub quick_certificate: CertificateOptions,
    pub full_certificate: CertificateOptions,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tiles: 50,
            max_nodes: 1_000_000,
            time_limit_ms: None,
            deepening: true,
            cert_period: 8,
            quick_certificate: CertificateOptions { max_depth: 3, max_boxes: 6, max_candidates: 1 },
            full_certificate: CertificateOptions { max_depth: 12, max_boxes: 64, max_candidates: 4 },
        }
    }
}

fn default_deepening() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Outcome {
    /// Every branch died.
    NoTiling,
    /// Every branch died or reached one of the listed families.
    PrunedIntoFamilies { families: BTreeSet<u8> },
    /// Some branch hit a limit.
    Inconclusive { limit: String, families: BTreeSet<u8> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub max_depth: usize,
    pub max_tiles_seen: usize,
    pub run_branches: u64,
    pub attachment_branches: u64,
    pub forced_merges: u64,
    pub invariant_prunes: u64,
    pub infeasible_prunes: u64,
    pub certificate_prunes: u64,
    pub family_prunes: u64,
    pub dead_ends: u64,
    pub certificates: u64,
    /// Distinct length systems met.
    pub length_systems: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub case_index: usize,
    pub outcome: Outcome,
    pub stats: SearchStats,
    /// Hash of the sequence of search events, stable across runs.
    pub trace_hash: String,
    /// Snapshot of the first node that hit a limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_snapshot: Option<String>,
}

struct Node {
    g: TilingGraph,
    q: LinearSystem,
    /// Interned identity of `q`.
    qid: usize,
}

enum Prune {
    Invariant,
    Infeasible,
}

/// What is known about one length system. Every node carrying the same
/// system shares it.
#[derive(Default)]
struct QFacts {
    feasible: Option<bool>,
    family: Option<Option<u8>>,
    /// 0: no certificate yet, 1: the quick one ran, 2: the full one ran.
    cert_level: u8,
    infeasible: bool,
    signs: HashMap<LengthForm, FormSign>,
}

/// Order-independent key of a system: every row scaled to a primitive
/// integer vector, then sorted.
fn q_key(q: &LinearSystem) -> String {
    let row = |c: &[Rational], rhs: &Rational, tag: &str| {
        let mut v = c.to_vec();
        v.push(rhs.clone());
        let ints = primitive_integer_vector(&v);
        let mut out = String::from(tag);
        for k in ints {
            out.push(' ');
            out.push_str(&k.to_string());
        }
        out
    };
    let mut rows: Vec<String> = q.equalities.iter().map(|e| row(&e.coeffs, &e.rhs, "=")).collect();
    rows.extend(q.inequalities.iter().map(|r| row(&r.coeffs, &r.rhs, if r.strict { "<" } else { "<=" })));
    rows.sort();
    rows.dedup();
    rows.join(";")
}

struct Searcher<'a> {
    ctx: &'a CaseContext,
    limits: &'a Limits,
    /// Tile cap of the current round.
    cap: usize,
    stats: SearchStats,
    families: BTreeSet<u8>,
    limit: Option<String>,
    limit_snapshot: Option<String>,
    aborted: bool,
    q_index: HashMap<String, usize>,
    q_facts: Vec<QFacts>,
    hasher: FnvHasher,
    start: Instant,
}

impl<'a> Searcher<'a> {
    fn event(&mut self, code: u64, a: u64, b: u64) {
        self.hasher.write_u64(code);
        self.hasher.write_u64(a);
        self.hasher.write_u64(b);
    }

    fn intern(&mut self, q: &LinearSystem) -> usize {
        let next = self.q_facts.len();
        let id = *self.q_index.entry(q_key(q)).or_insert(next);
        if id == next {
            self.q_facts.push(QFacts::default());
        }
        id
    }

    fn feasible(&mut self, node: &Node) -> bool {
        let f = &mut self.q_facts[node.qid];
        *f.feasible.get_or_insert_with(|| lp_feasible(&node.q).is_feasible())
    }

    fn sign(&mut self, node: &Node, d: &LengthForm) -> FormSign {
        let f = &mut self.q_facts[node.qid];
        *f.signs.entry(*d).or_insert_with(|| sign_on_feasible(&node.q, d))
    }

    fn family(&mut self, node: &Node) -> Option<u8> {
        let ctx = self.ctx;
        let f = &mut self.q_facts[node.qid];
        *f.family.get_or_insert_with(|| ctx.detect(&node.q).map(|f| f.type_id))
    }

    /// Runs the quick certificate on a new system, and the full one on every
    /// `cert_period`-th node. Returns whether the system is certified empty.
    fn certified_infeasible(&mut self, node: &Node) -> bool {
        let full_due = self.stats.nodes % self.limits.cert_period.max(1) == 0;
        let level = self.q_facts[node.qid].cert_level;
        let (want, opts) = match () {
            _ if self.ctx.dim == 0 || (full_due && level < 2) => (2, &self.limits.full_certificate),
            _ if level < 1 => (1, &self.limits.quick_certificate),
            _ => return self.q_facts[node.qid].infeasible,
        };
        if level >= want {
            return self.q_facts[node.qid].infeasible;
        }
        self.stats.certificates += 1;
        let infeasible = self.ctx.certificate(&node.q, opts) == Certificate::InfeasibleCertified;
        let f = &mut self.q_facts[node.qid];
        f.cert_level = want;
        f.infeasible = infeasible;
        infeasible
    }

    fn hit_limit(&mut self, name: &str, node: &Node) {
        if self.limit.is_none() {
            self.limit = Some(name.to_string());
            self.limit_snapshot =
                Some(Snapshot { case: self.ctx.index, graph: node.g.clone(), lengths: node.q.clone() }.encode());
        }
    }

    /// Applies the completion rules and every forced merge until nothing
    /// changes. Returns an undecided pair, if any.
    fn normalize(&mut self, node: &mut Node) -> Result<Option<RunPair>, Prune> {
        let x = &self.ctx.x;
        loop {
            if !self.feasible(node) {
                return Err(Prune::Infeasible);
            }
            node.g.complete_vertices(x).map_err(|_| Prune::Invariant)?;
            node.g.check_invariants(x).map_err(|_| Prune::Invariant)?;
            let mut pending = None;
            let mut changed = false;
            'runs: for run in node.g.find_runs() {
                for pair in run.pairs(&node.g) {
                    let same = node.g.half(pair.a).origin == node.g.half(pair.b).origin;
                    match self.sign(node, &pair.d) {
                        FormSign::Empty => return Err(Prune::Infeasible),
                        FormSign::Zero if same => {}
                        FormSign::Zero => {
                            node.g.merge_occurrences(pair.a, pair.b).map_err(|_| Prune::Invariant)?;
                            self.stats.forced_merges += 1;
                            changed = true;
                            break 'runs;
                        }
                        FormSign::Positive | FormSign::Negative if same => return Err(Prune::Infeasible),
                        FormSign::Positive | FormSign::Negative => {}
                        FormSign::Open if same => {
                            node.q.push_eq(form(&pair.d), int(0));
                            node.qid = self.intern(&node.q);
                            changed = true;
                            break 'runs;
                        }
                        FormSign::Open => {
                            if pending.is_none() {
                                pending = Some(pair);
                            }
                        }
                    }
                }
            }
            if !changed {
                return Ok(pending);
            }
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.stats.nodes >= self.limits.max_nodes {
            self.limit = Some("max_nodes".into());
            return true;
        }
        if let Some(ms) = self.limits.time_limit_ms {
            if self.start.elapsed().as_millis() as u64 >= ms {
                self.limit = Some("time".into());
                return true;
            }
        }
        false
    }

    fn explore(&mut self, mut node: Node, depth: usize) {
        if self.aborted {
            return;
        }
        if self.out_of_budget() {
            self.aborted = true;
            return;
        }
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let pending = match self.normalize(&mut node) {
            Ok(p) => p,
            Err(Prune::Invariant) => {
                self.stats.invariant_prunes += 1;
                self.event(1, depth as u64, 0);
                return;
            }
            Err(Prune::Infeasible) => {
                self.stats.infeasible_prunes += 1;
                self.event(2, depth as u64, 0);
                return;
            }
        };
        debug_assert!(node.g.check_invariants(&self.ctx.x).is_ok());
        let tiles = node.g.tile_count();
        self.stats.max_tiles_seen = self.stats.max_tiles_seen.max(tiles);
        self.event(3, tiles as u64, node.g.vertex_count() as u64);

        if self.certified_infeasible(&node) {
            self.stats.certificate_prunes += 1;
            self.event(5, depth as u64, 0);
            return;
        }

        if let Some(t) = self.family(&node) {
            self.families.insert(t);
            self.stats.family_prunes += 1;
            self.event(4, t as u64, depth as u64);
            return;
        }
        if let Some(pair) = pending {
            let children = branch_run(&node.g, &node.q, &pair);
            self.stats.run_branches += 1;
            self.event(6, children.len() as u64, pair.a as u64);
            for (g, q) in children {
                let qid = self.intern(&q);
                self.explore(Node { g, q, qid }, depth + 1);
                if self.aborted {
                    return;
                }
            }
            return;
        }

        if tiles >= self.cap {
            self.hit_limit("max_tiles", &node);
            self.event(7, depth as u64, 0);
            return;
        }
        match branch_vertex(&node.g, &self.ctx.x) {
            Some((w, atts)) if !atts.is_empty() => {
                self.stats.attachment_branches += 1;
                self.event(8, w as u64, atts.len() as u64);
                for a in atts {
                    let mut g = node.g.clone();
                    g.add_face(&a).expect("admissible attachments apply");
                    self.explore(Node { g, q: node.q.clone(), qid: node.qid }, depth + 1);
                    if self.aborted {
                        return;
                    }
                }
            }
            _ => {
                self.stats.dead_ends += 1;
                self.event(9, depth as u64, 0);
            }
        }
    }
}

const SEARCH_STACK: usize = 256 << 20;

fn run_search(ctx: &CaseContext, limits: &Limits) -> CaseVerdict {
    let mut s = Searcher {
        ctx,
        limits,
        cap: limits.max_tiles,
        stats: SearchStats::default(),
        families: BTreeSet::new(),
        limit: None,
        limit_snapshot: None,
        aborted: false,
        q_index: HashMap::new(),
        q_facts: Vec::new(),
        hasher: FnvHasher::default(),
        start: Instant::now(),
    };
    let q = base_lengths();
    let qid = s.intern(&q);
    let caps = if limits.deepening { 2.min(limits.max_tiles)..=limits.max_tiles } else { limits.max_tiles..=limits.max_tiles };
    for cap in caps {
        s.cap = cap;
        s.limit = None;
        s.limit_snapshot = None;
        s.explore(Node { g: TilingGraph::initial(), q: q.clone(), qid }, 0);
        if s.aborted || s.limit.as_deref() != Some("max_tiles") {
            break;
        }
    }
    s.stats.elapsed_ms = s.start.elapsed().as_millis() as u64;
    s.stats.length_systems = s.q_facts.len() as u64;
    let outcome = match (s.limit, s.families.is_empty()) {
        (Some(limit), _) => Outcome::Inconclusive { limit, families: s.families },
        (None, true) => Outcome::NoTiling,
        (None, false) => Outcome::PrunedIntoFamilies { families: s.families },
    };
    CaseVerdict {
        case_index: ctx.index,
        outcome,
        stats: s.stats,
        trace_hash: format!("{:016x}", s.hasher.finish()),
        limit_snapshot: s.limit_snapshot,
    }
}

/// Searches one case on a thread with a deep stack.
pub fn search_with_context(ctx: &CaseContext, limits: &Limits) -> CaseVerdict {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(SEARCH_STACK)
            .spawn_scoped(scope, || run_search(ctx, limits))
            .expect("spawn search thread")
            .join()
            .expect("search thread panicked")
    })
}

pub fn search_case(index: usize, limits: &Limits) -> Result<CaseVerdict, SearchError> {
    Ok(search_with_context(&CaseContext::for_case(index)?, limits))
}

/// Searches the given cases on `threads` workers. Results come back in the
/// order of `cases`.
pub fn search_cases(cases: &[usize], limits: &Limits, threads: usize) -> Vec<Result<CaseVerdict, SearchError>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<CaseVerdict, SearchError>>>> = Mutex::new((0..cases.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1) {
            std::thread::Builder::new()
                .stack_size(SEARCH_STACK)
                .spawn_scoped(scope, || loop {
                    let i = next.fetch_add(1, AtomicOrdering::Relaxed);
                    if i >= cases.len() {
                        break;
                    }
                    let r = CaseContext::for_case(cases[i]).map(|ctx| run_search(&ctx, limits));
                    results.lock().unwrap()[i] = Some(r);
                })
                .expect("spawn search worker");
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every case ran")).collect()
}

/// Every case of the shipped table.
pub fn search_all(limits: &Limits, threads: usize) -> Vec<Result<CaseVerdict, SearchError>> {
    let cases: Vec<usize> = golden_table().iter().map(|e| e.index).collect();
    search_cases(&cases, limits, threads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;

    #[test]
    fn regular_pentagon_turns_evenly() {
        let alpha = vec![rat(3, 5); 5];
        let s = turning(&alpha);
        for (k, sk) in s.iter().enumerate() {
            assert_eq!(*sk, rat(2 * k as i64, 5));
        }
        let mut q = base_lengths();
        for i in 0..4 {
            let mut c = vec![int(0); 5];
            c[i] = int(1);
            c[i + 1] = int(-1);
            q.push_eq(c, int(0));
        }
        let l = closure_lengths(&alpha, &q).expect("the regular pentagon closes");
        assert!(l.iter().all(|x| x.as_rational() == Some(rat(1, 5))));
    }

    #[test]
    fn edge_permutation_follows_corners() {
        for p in Permutation5::dihedral() {
            let e = edge_permutation(&p);
            let im = p.images();
            for j in 0..5 {
                let (a, b) = (im[j] as u8 + 1, im[(j + 1) % 5] as u8 + 1);
                assert_eq!(e.images()[j] as u8 + 1, edge_between(a, b));
            }
        }
    }

    #[test]
    fn form_sign_uses_equalities() {
        let mut q = base_lengths();
        q.push_eq(vec![int(1), int(-1), int(0), int(0), int(0)], int(0));
        assert_eq!(form_sign(&q, &[2, -2, 0, 0, 0]), FormSign::Zero);
        assert_eq!(form_sign(&q, &[1, 0, 0, 0, 0]), FormSign::Positive);
        assert_eq!(form_sign(&q, &[1, 0, -1, 0, 0]), FormSign::Open);
        assert!(implied_zero(&q, &[0, 0, 0, 0, 0]));
    }

    fn sum_rows(rows: &[AlgebraicReal], l: &[AlgebraicReal]) -> AlgebraicReal {
        rows.iter().zip(l).fold(AlgebraicReal::rational(Rational::zero()), |acc, (r, x)| acc.plus(&r.times(x)))
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]

        // The reduced solve must agree with the plain algebraic LP.
        #[test]
        fn reduced_closure_solve_matches_direct(
            w in 0usize..11,
            forms in proptest::collection::vec((proptest::array::uniform5(-2i64..=2), proptest::bool::ANY), 0..4),
        ) {
            let witnesses: Vec<FamilyWitness> = family_witnesses().into_iter().filter(|w| w.exact_alpha.is_some()).collect();
            let wit = &witnesses[w];
            let alpha = wit.exact_alpha.clone().unwrap();
            let rows = ClosureRows::new(&alpha).unwrap();
            let mut q = base_lengths();
            for (c, gt) in &forms {
                let c: Vec<Rational> = c.iter().map(|&k| int(k)).collect();
                if *gt { q.push_gt(c, int(0)); } else { q.push_lt(c, int(0)); }
            }
            let fast = rows.solve(&q);
            let slow = rows.solve_direct(&q);
            proptest::prop_assert_eq!(fast.is_some(), slow.is_some());
            if let Some(l) = fast {
                let alg = q.map(|r| AlgebraicReal::rational(r.clone()));
                proptest::prop_assert!(alg.is_satisfied_by(&l));
                proptest::prop_assert!(sum_rows(&rows.cos, &l).is_zero_value());
                proptest::prop_assert!(sum_rows(&rows.sin, &l).is_zero_value());
            }
        }
    }
}
