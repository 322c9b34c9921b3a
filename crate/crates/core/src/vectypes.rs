//! Vector types of tiling vertices, sets of them, the dihedral action on
//! corner indices, the Compat closure, goodness and the angle polytopes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{
    affine_dim, int, lp_feasible, lp_maximize, lp_minimize, primitive_integer_vector, solve_affine,
    LinearSystem, LpOutcome, Rational,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VecTypeError {
    #[error("malformed vector type {0:?}: expected five decimal digits")]
    Malformed(String),
    #[error("vector type {0:?} has a coordinate above 9 and has no digit-string form")]
    NotDigitEncodable([u32; 5]),
    #[error("the open angle polytope is empty, Compat is not finite")]
    InfiniteSet,
    #[error("the angle polytope is empty")]
    EmptyPolytope,
}

/// Counts of each corner index at a vertex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VecType(pub [u32; 5]);

impl VecType {
    pub const ZERO: VecType = VecType([0; 5]);

    pub fn unit(corner: usize) -> VecType {
        let mut c = [0; 5];
        c[corner] = 1;
        VecType(c)
    }

    pub fn counts(&self) -> &[u32; 5] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, k: u32) -> VecType {
        VecType(self.0.map(|c| c * k))
    }

    pub fn plus(&self, other: &VecType) -> VecType {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(other.0) {
            *x += y;
        }
        VecType(c)
    }

    /// Coordinate-wise `self <= other`.
    pub fn dominated_by(&self, other: &VecType) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.0.iter().map(|&c| int(c as i64)).collect()
    }

    /// `self · alpha`.
    pub fn dot(&self, alpha: &[Rational]) -> Rational {
        self.0.iter().zip(alpha).fold(Rational::zero(), |acc, (&c, a)| acc + a * int(c as i64))
    }

    pub fn to_digits(&self) -> Result<String, VecTypeError> {
        if self.0.iter().any(|&c| c > 9) {
            return Err(VecTypeError::NotDigitEncodable(self.0));
        }
        Ok(self.0.iter().map(|c| char::from(b'0' + *c as u8)).collect())
    }
}

impl FromStr for VecType {
    type Err = VecTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        if b.len() != 5 || !b.iter().all(u8::is_ascii_digit) {
            return Err(VecTypeError::Malformed(s.to_string()));
        }
        let mut c = [0; 5];
        for (x, d) in c.iter_mut().zip(b) {
            *x = (d - b'0') as u32;
        }
        Ok(VecType(c))
    }
}

impl fmt::Display for VecType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_digits() {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "{:?}", self.0),
        }
    }
}

impl fmt::Debug for VecType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The vector type doubled for half vertices.
pub fn corrected(v: VecType, is_half: bool) -> VecType {
    if is_half {
        v.scaled(2)
    } else {
        v
    }
}

/// Sorted set of vector types without duplicates.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VecTypeSet(Vec<VecType>);

impl VecTypeSet {
    pub fn new(members: impl IntoIterator<Item = VecType>) -> Self {
        let mut v: Vec<VecType> = members.into_iter().collect();
        v.sort();
        v.dedup();
        VecTypeSet(v)
    }

    pub fn members(&self) -> &[VecType] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, VecType> {
        self.0.iter()
    }

    pub fn contains(&self, v: &VecType) -> bool {
        self.0.binary_search(v).is_ok()
    }

    pub fn with(&self, v: VecType) -> VecTypeSet {
        let mut out = self.clone();
        if let Err(pos) = out.0.binary_search(&v) {
            out.0.insert(pos, v);
        }
        out
    }

    pub fn union(&self, other: &VecTypeSet) -> VecTypeSet {
        VecTypeSet::new(self.0.iter().chain(&other.0).copied())
    }

    pub fn is_subset(&self, other: &VecTypeSet) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    pub fn intersects(&self, other: &VecTypeSet) -> bool {
        self.0.iter().any(|v| other.contains(v))
    }

    /// Space-separated digit strings, or an error if a member is not
    /// digit-encodable.
    pub fn to_digits(&self) -> Result<String, VecTypeError> {
        let parts: Result<Vec<String>, _> = self.0.iter().map(VecType::to_digits).collect();
        Ok(parts?.join(" "))
    }
}

impl FromStr for VecTypeSet {
    type Err = VecTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let members: Result<Vec<VecType>, _> = s.split_whitespace().map(str::parse).collect();
        Ok(VecTypeSet::new(members?))
    }
}

impl fmt::Display for VecTypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for VecTypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromIterator<VecType> for VecTypeSet {
    fn from_iter<I: IntoIterator<Item = VecType>>(iter: I) -> Self {
        VecTypeSet::new(iter)
    }
}

/// Permutation of the five corner indices, acting by `p(v)_i = v_{p(i)}`.
/// Stored 0-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Permutation5 {
    images: [usize; 5],
}

impl Permutation5 {
    pub const IDENTITY: Permutation5 = Permutation5 { images: [0, 1, 2, 3, 4] };
    /// The cycle (12345).
    pub const ROTATION: Permutation5 = Permutation5 { images: [1, 2, 3, 4, 0] };
    /// (3)(24)(15).
    pub const MIRROR: Permutation5 = Permutation5 { images: [4, 3, 2, 1, 0] };

    pub fn new(images: [usize; 5]) -> Option<Self> {
        let mut seen = [false; 5];
        for &i in &images {
            if i >= 5 || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Permutation5 { images })
    }

    pub fn images(&self) -> [usize; 5] {
        self.images
    }

    /// `self.then(q)` applies `self` first, then `q`.
    pub fn then(&self, q: &Permutation5) -> Permutation5 {
        // q(p(v))_i = p(v)_{q(i)} = v_{p(q(i))}
        Permutation5 { images: q.images.map(|i| self.images[i]) }
    }

    pub fn inverse(&self) -> Permutation5 {
        let mut inv = [0; 5];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation5 { images: inv }
    }

    pub fn apply<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.images.iter().map(|&j| v[j].clone()).collect()
    }

    pub fn apply_type(&self, v: &VecType) -> VecType {
        VecType(self.images.map(|j| v.0[j]))
    }

    /// The ten symmetries of the pentagon's corner cycle, rotations first.
    pub fn dihedral() -> [Permutation5; 10] {
        let mut out = [Permutation5::IDENTITY; 10];
        for k in 1..5 {
            out[k] = out[k - 1].then(&Permutation5::ROTATION);
        }
        for k in 0..5 {
            out[5 + k] = out[k].then(&Permutation5::MIRROR);
        }
        out
    }

    /// All 120 permutations in lexicographic order of their images.
    pub fn all() -> Vec<Permutation5> {
        let mut out = Vec::with_capacity(120);
        fn rec(prefix: &mut Vec<usize>, out: &mut Vec<Permutation5>) {
            if prefix.len() == 5 {
                out.push(Permutation5 { images: [prefix[0], prefix[1], prefix[2], prefix[3], prefix[4]] });
                return;
            }
            for i in 0..5 {
                if !prefix.contains(&i) {
                    prefix.push(i);
                    rec(prefix, out);
                    prefix.pop();
                }
            }
        }
        rec(&mut Vec::new(), &mut out);
        out
    }
}

pub fn apply_perm(p: &Permutation5, x: &VecTypeSet) -> VecTypeSet {
    x.iter().map(|v| p.apply_type(v)).collect()
}

/// Least dihedral image, together with a permutation reaching it.
pub fn canonical_with_perm(x: &VecTypeSet) -> (VecTypeSet, Permutation5) {
    Permutation5::dihedral()
        .into_iter()
        .map(|p| (apply_perm(&p, x), p))
        .min()
        .expect("group is nonempty")
}

pub fn canonical_form(x: &VecTypeSet) -> VecTypeSet {
    canonical_with_perm(x).0
}

/// Linear constraints on the angles `alpha` (in units of pi).
#[derive(Clone, Debug, PartialEq)]
pub struct AnglePolytope {
    pub base: LinearSystem,
}

impl AnglePolytope {
    /// The same constraints with `0 < alpha_i < 1`.
    pub fn open(&self) -> LinearSystem {
        let mut s = self.base.clone();
        s.push_box(&int(0), &int(1), true);
        s
    }

    pub fn dim(&self) -> i64 {
        affine_dim(&self.base)
    }

    pub fn open_point(&self) -> Option<Vec<Rational>> {
        lp_feasible(&self.open()).witness()
    }

    /// Every point of `self` satisfies `other`'s equalities and inequalities.
    pub fn implies(&self, other: &LinearSystem) -> bool {
        if !lp_feasible(&self.base).is_feasible() {
            return true;
        }
        let bound = |c: &[Rational], max: bool| match max {
            true => lp_maximize(c, &self.base),
            false => lp_minimize(c, &self.base),
        };
        other.equalities.iter().all(|e| {
            matches!(bound(&e.coeffs, true), LpOutcome::Optimum { value, .. } if value == e.rhs)
                && matches!(bound(&e.coeffs, false), LpOutcome::Optimum { value, .. } if value == e.rhs)
        }) && other.inequalities.iter().all(|r| match bound(&r.coeffs, true) {
            LpOutcome::Optimum { value, .. } => value < r.rhs || (!r.strict && value == r.rhs),
            _ => false,
        })
    }
}

pub fn angle_system(x: &VecTypeSet, ordered: bool) -> LinearSystem {
    let mut s = LinearSystem::new(5);
    s.push_eq(vec![int(1); 5], int(3));
    s.push_box(&int(0), &int(1), false);
    for v in x.iter() {
        s.push_eq(v.to_rationals(), int(2));
    }
    if ordered {
        for i in 0..4 {
            let mut c = vec![int(0); 5];
            c[i] = int(-1);
            c[i + 1] = int(1);
            s.push_le(c, int(0));
        }
    }
    s
}

pub fn polytope(x: &VecTypeSet, ordered: bool) -> AnglePolytope {
    AnglePolytope { base: angle_system(x, ordered) }
}

/// No direction `u` with zero sum puts all of `x` weakly on one side without
/// being orthogonal to all of it.
pub fn is_good(x: &VecTypeSet) -> bool {
    if x.is_empty() {
        return true;
    }
    let mut s = LinearSystem::new(5);
    s.push_eq(vec![int(1); 5], int(0));
    s.push_box(&int(-1), &int(1), false);
    let mut total = vec![int(0); 5];
    for v in x.iter() {
        let c = v.to_rationals();
        for (t, ci) in total.iter_mut().zip(&c) {
            *t += ci;
        }
        s.push_ge(c, int(0));
    }
    match lp_maximize(&total, &s) {
        LpOutcome::Optimum { value, .. } => value.is_zero(),
        _ => unreachable!("u = 0 is feasible and the box bounds the objective"),
    }
}

/// Coordinate-wise minima over the ordered polytope.
pub fn min_vector(x: &VecTypeSet) -> Result<Vec<Rational>, VecTypeError> {
    let sys = angle_system(x, true);
    (0..5)
        .map(|i| {
            let mut c = vec![int(0); 5];
            c[i] = int(1);
            match lp_minimize(&c, &sys) {
                LpOutcome::Optimum { value, .. } => Ok(value),
                _ => Err(VecTypeError::EmptyPolytope),
            }
        })
        .collect()
}

/// Point of `P_X ∩ ]0,1[^5` as far from the cube's faces as possible.
pub fn central_open_point(x: &VecTypeSet, ordered: bool) -> Option<Vec<Rational>> {
    let base = angle_system(x, ordered);
    let mut s = LinearSystem::new(6);
    for e in &base.equalities {
        let mut c = e.coeffs.clone();
        c.push(int(0));
        s.push_eq(c, e.rhs.clone());
    }
    for r in &base.inequalities {
        let mut c = r.coeffs.clone();
        c.push(int(0));
        s.push_le(c, r.rhs.clone());
    }
    // t <= alpha_i <= 1 - t, t <= 1
    for i in 0..5 {
        let mut c = vec![int(0); 6];
        c[i] = int(-1);
        c[5] = int(1);
        s.push_le(c.clone(), int(0));
        c[i] = int(1);
        s.push_le(c, int(1));
    }
    let mut obj = vec![int(0); 6];
    obj[5] = int(1);
    match lp_maximize(&obj, &s) {
        LpOutcome::Optimum { value, mut witness } if value.is_positive() => {
            witness.truncate(5);
            Some(witness)
        }
        _ => None,
    }
}

/// All `w` in `N^5` whose augmented vector `(w, 2)` lies in the span of
/// `(1,1,1,1,1,3)` and the augmented members of `x`.
pub fn compat(x: &VecTypeSet) -> Result<VecTypeSet, VecTypeError> {
    let alpha = central_open_point(x, false).ok_or(VecTypeError::InfiniteSet)?;
    Ok(compat_from_point(x, &alpha))
}

/// [`compat`] given a point of the open polytope.
pub fn compat_from_point(x: &VecTypeSet, alpha: &[Rational]) -> VecTypeSet {
    // (w, 2) is in the span iff w·a = 2 on the whole affine hull
    // {sum = 3, v·a = 2}: w·alpha = 2 and w·d = 0 for its directions d.
    let mut rows = vec![vec![int(1); 5]];
    let mut rhs = vec![int(3)];
    for v in x.iter() {
        rows.push(v.to_rationals());
        rhs.push(int(2));
    }
    let hull = solve_affine(&rows, &rhs, 5).expect("open point lies on the hull");
    let dirs: Vec<Vec<BigInt>> = hull.directions.iter().map(|d| primitive_integer_vector(d)).collect();

    let den = crate::exactmath::common_denominator(alpha);
    let a: Vec<BigInt> = alpha.iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect();
    let target = &den * 2;
    let mut out = Vec::new();
    let mut w = [0u32; 5];
    enumerate_level(&a, &target, 0, &mut w, &mut |w| {
        let ok = dirs.iter().all(|d| {
            d.iter().zip(w).fold(BigInt::zero(), |acc, (di, &wi)| acc + di * wi).is_zero()
        });
        if ok {
            out.push(VecType(*w));
        }
    });
    VecTypeSet::new(out)
}

/// Enumerates `w >= 0` with `w·a = target` for a strictly positive integer `a`.
fn enumerate_level(a: &[BigInt], remaining: &BigInt, i: usize, w: &mut [u32; 5], f: &mut impl FnMut(&[u32; 5])) {
    if i == 5 {
        if remaining.is_zero() {
            f(w);
        }
        return;
    }
    let max = Integer::div_floor(remaining, &a[i]).to_u32().expect("coordinate bound fits");
    for k in 0..=max {
        w[i] = k;
        let rest = remaining - &a[i] * k;
        if rest.is_negative() {
            break;
        }
        enumerate_level(a, &rest, i + 1, w, f);
    }
    w[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;

    fn set(s: &str) -> VecTypeSet {
        s.parse().unwrap()
    }

    #[test]
    fn codec() {
        let v: VecType = "00012".parse().unwrap();
        assert_eq!(v.0, [0, 0, 0, 1, 2]);
        assert_eq!(v.to_string(), "00012");
        assert!("0001".parse::<VecType>().is_err());
        assert!("0001a".parse::<VecType>().is_err());
        assert!(VecType([0, 0, 0, 0, 10]).to_digits().is_err());
        let x = set("11100 00012 00012");
        assert_eq!(x.to_string(), "00012 11100");
    }

    #[test]
    fn corrected_types() {
        assert_eq!(corrected(VecType([0, 0, 0, 1, 1]), true), VecType([0, 0, 0, 2, 2]));
        assert_eq!(corrected(VecType([1, 1, 1, 0, 0]), false), VecType([1, 1, 1, 0, 0]));
        assert_eq!(corrected(VecType([0, 0, 1, 0, 1]), true), VecType([0, 0, 2, 0, 2]));
    }

    #[test]
    fn permutations() {
        let x = set("00012");
        assert_eq!(apply_perm(&Permutation5::MIRROR, &x), set("21000"));
        let mut y = x.clone();
        for _ in 0..5 {
            y = apply_perm(&Permutation5::ROTATION, &y);
        }
        assert_eq!(y, x);
        assert_eq!(canonical_form(&x), x);
        let group = Permutation5::dihedral();
        let distinct: std::collections::BTreeSet<_> = group.iter().collect();
        assert_eq!(distinct.len(), 10);
        for p in &group {
            for q in &group {
                assert!(group.contains(&p.then(q)));
            }
        }
        assert_eq!(Permutation5::all().len(), 120);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let x = set("00012 01110");
        for p in Permutation5::all().iter().step_by(7) {
            for q in Permutation5::dihedral() {
                assert_eq!(apply_perm(&p.then(&q), &x), apply_perm(&q, &apply_perm(p, &x)));
            }
            assert_eq!(apply_perm(&p.inverse(), &apply_perm(p, &x)), x);
        }
    }

    #[test]
    fn goodness() {
        assert!(is_good(&VecTypeSet::default()));
        assert!(!is_good(&set("11100")));
        assert!(is_good(&set("11100 00022")));
    }

    #[test]
    fn compat_examples() {
        assert_eq!(compat(&VecTypeSet::default()).unwrap(), VecTypeSet::default());
        assert_eq!(compat(&set("11100")).unwrap(), set("11100 00022"));
        // alpha_5 = 1 is forced: no open point
        assert_eq!(compat(&set("00002")), Err(VecTypeError::InfiniteSet));
    }

    #[test]
    fn min_vector_of_empty_set() {
        let m = min_vector(&VecTypeSet::default()).unwrap();
        assert_eq!(m, vec![rat(3, 5), rat(1, 2), rat(1, 3), int(0), int(0)]);
    }

    #[test]
    fn polytope_equals_polytope_of_compat() {
        let x = set("00012 01110");
        let c = compat(&x).unwrap();
        assert!(x.is_subset(&c));
        assert!(polytope(&x, false).implies(&angle_system(&c, false)));
        assert!(polytope(&c, false).implies(&angle_system(&x, false)));
    }

    #[test]
    fn uniform_point_in_ordered_polytope() {
        let p = polytope(&VecTypeSet::default(), true);
        assert!(p.open_point().is_some());
        assert_eq!(p.dim(), 4);
    }
}
