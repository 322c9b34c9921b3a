//! Exact arithmetic in the real cyclotomic field `Q(2cos(pi/N))`.
//!
//! An element is a rational polynomial in `x = 2cos(pi/N)` of degree below the
//! degree of the minimal polynomial of `x`. Zero testing is syntactic; the sign
//! of a nonzero element comes from interval evaluation at a certified
//! enclosure of `x`, refined until it excludes zero.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, ToPrimitive, Zero};

use super::field::OrderedField;
use super::interval::RationalInterval;
use super::trig::sin_cos_enclosure;
use super::{format_rational, int, Rational};

type Poly = Vec<Rational>;

fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Poly {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` must be nonzero.
fn poly_divrem(a: &[Rational], b: &[Rational]) -> (Poly, Poly) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[k + i] -= &f * c;
        }
        q[k] = f;
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

/// Integer coefficients of the cyclotomic polynomial `Phi_n`, low degree first.
fn cyclotomic(n: u64) -> Vec<i64> {
    fn rec(n: u64, memo: &mut HashMap<u64, Vec<i64>>) -> Vec<i64> {
        if let Some(p) = memo.get(&n) {
            return p.clone();
        }
        // x^n - 1 divided by Phi_d for every proper divisor d.
        let mut num = vec![0i64; n as usize + 1];
        num[0] = -1;
        num[n as usize] = 1;
        for d in (1..n).filter(|d| n % d == 0) {
            let den = rec(d, memo);
            let mut q = vec![0i64; num.len() - den.len() + 1];
            let mut r = num.clone();
            for k in (0..q.len()).rev() {
                let c = r[k + den.len() - 1];
                q[k] = c;
                if c != 0 {
                    for (i, dc) in den.iter().enumerate() {
                        r[k + i] -= c * dc;
                    }
                }
            }
            debug_assert!(r.iter().all(|&c| c == 0));
            num = q;
        }
        memo.insert(n, num.clone());
        num
    }
    rec(n, &mut HashMap::new())
}

/// The field `Q(2cos(pi/N))` together with the minimal polynomial of its
/// generator.
pub struct CosField {
    n: u64,
    min_poly: Poly,
    generator: RationalInterval,
    generator_f64: f64,
}

impl fmt::Debug for CosField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CosField({})", self.n)
    }
}

const START_BITS: u32 = 96;

impl CosField {
    /// Shared instance for index `n`.
    pub fn get(n: u64) -> Arc<CosField> {
        assert!(n >= 1, "field index must be positive");
        static FIELDS: OnceLock<Mutex<HashMap<u64, Arc<CosField>>>> = OnceLock::new();
        let mut map = FIELDS.get_or_init(Default::default).lock().unwrap();
        map.entry(n).or_insert_with(|| Arc::new(CosField::build(n))).clone()
    }

    fn build(n: u64) -> CosField {
        let min_poly = if n == 1 {
            vec![int(2), int(1)]
        } else {
            // Phi_{2n} is palindromic of degree 2k; z^-k Phi(z) rewritten in
            // x = z + 1/z using z^j + z^-j = C_j(x).
            let phi = cyclotomic(2 * n);
            let k = (phi.len() - 1) / 2;
            let mut chebyshev: Vec<Poly> = vec![vec![int(2)], vec![int(0), int(1)]];
            for j in 2..=k {
                let next = poly_sub(&poly_mul(&[int(0), int(1)], &chebyshev[j - 1]), &chebyshev[j - 2]);
                chebyshev.push(next);
            }
            let mut psi = vec![Rational::from_integer(phi[k].into())];
            for j in 1..=k {
                let c = Rational::from_integer(phi[k + j].into());
                let term: Poly = chebyshev[j].iter().map(|t| t * &c).collect();
                psi = poly_sub(&psi, &term.iter().map(|t| -t).collect::<Vec<_>>());
            }
            psi
        };
        let (_, c) = sin_cos_enclosure(&Rational::new(1.into(), n.into()), START_BITS);
        let generator = c.scale(&int(2));
        let generator_f64 = generator.lo().to_f64().expect("generator is finite");
        CosField { n, min_poly, generator, generator_f64 }
    }

    pub fn index(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    /// Monic minimal polynomial of `2cos(pi/N)`, low degree first.
    pub fn min_poly(&self) -> &[Rational] {
        &self.min_poly
    }

    fn reduce(&self, p: &[Rational]) -> Poly {
        poly_divrem(p, &self.min_poly).1
    }

    fn generator_enclosure(&self, bits: u32) -> RationalInterval {
        if bits <= START_BITS {
            return self.generator.clone();
        }
        let (_, c) = sin_cos_enclosure(&Rational::new(1.into(), self.n.into()), bits);
        c.scale(&int(2))
    }
}

/// Element of `Q(2cos(pi/N))`. Rational constants carry no field so that
/// `zero()` and `one()` mix freely with elements of any field.
#[derive(Clone)]
pub struct AlgebraicReal {
    field: Option<Arc<CosField>>,
    coeffs: Poly,
}

impl AlgebraicReal {
    pub fn rational(r: Rational) -> Self {
        let mut coeffs = vec![r];
        trim(&mut coeffs);
        AlgebraicReal { field: None, coeffs }
    }

    /// The generator `2cos(pi/N)`.
    pub fn generator(n: u64) -> Self {
        let f = CosField::get(n);
        let coeffs = f.reduce(&[int(0), int(1)]);
        AlgebraicReal { field: Some(f), coeffs }
    }

    pub fn field_index(&self) -> Option<u64> {
        if self.coeffs.len() <= 1 {
            return None;
        }
        self.field.as_ref().map(|f| f.n)
    }

    /// Coefficients in powers of `2cos(pi/N)`, low degree first, trailing zeros
    /// trimmed.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    fn join(&self, other: &Self) -> Option<Arc<CosField>> {
        match (&self.field, &other.field) {
            (Some(a), Some(b)) => {
                if a.n != b.n {
                    // Constants embed everywhere; anything else is a caller bug.
                    if self.coeffs.len() <= 1 {
                        return Some(b.clone());
                    }
                    if other.coeffs.len() <= 1 {
                        return Some(a.clone());
                    }
                    panic!("mixing elements of fields {} and {}", a.n, b.n);
                }
                Some(a.clone())
            }
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    /// Enclosure of the value of width at most `2^-bits`.
    pub fn enclosure(&self, bits: u32) -> RationalInterval {
        let Some(f) = self.field.as_ref().filter(|_| self.coeffs.len() > 1) else {
            return RationalInterval::point(self.as_rational().unwrap());
        };
        let target = Rational::new(1.into(), num_bigint::BigInt::one() << bits);
        let mut b = START_BITS.max(bits + 8);
        loop {
            let iv = self.horner(&f.generator_enclosure(b), b + 8);
            if iv.width() <= target {
                return iv;
            }
            b *= 2;
        }
    }

    fn horner(&self, x: &RationalInterval, bits: u32) -> RationalInterval {
        let mut acc = RationalInterval::point(Rational::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&RationalInterval::point(c.clone())).round_out(bits);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(f) = self.field.as_ref().filter(|_| self.coeffs.len() > 1) {
            if let Some((v, bound)) = self.float_eval(f) {
                if bound <= 1e-12 * v.abs() {
                    return v;
                }
            }
        }
        let iv = self.enclosure(60);
        super::to_f64(&((iv.lo() + iv.hi()) / int(2)))
    }

    /// A plain double precision evaluation, without the accuracy promise of
    /// `to_f64`. Good enough for starting guesses.
    pub fn rough_f64(&self) -> f64 {
        match self.field.as_ref().filter(|_| self.coeffs.len() > 1).and_then(|f| self.float_eval(f)) {
            Some((v, _)) => v,
            None => self.to_f64(),
        }
    }

    pub fn inverse(&self) -> Self {
        assert!(!self.coeffs.is_empty(), "division by zero");
        let Some(f) = self.field.as_ref().filter(|_| self.coeffs.len() > 1) else {
            return AlgebraicReal { field: None, coeffs: vec![self.coeffs[0].recip()] };
        };
        // Extended Euclid: s * self + t * psi = 1.
        let (mut r0, mut r1) = (f.min_poly.clone(), self.coeffs.clone());
        let (mut s0, mut s1): (Poly, Poly) = (Vec::new(), vec![int(1)]);
        while r1.len() > 1 {
            let (q, r) = poly_divrem(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        assert!(r1.len() == 1, "element not invertible; minimal polynomial is reducible");
        let inv = r1[0].recip();
        let coeffs = f.reduce(&s1.iter().map(|c| c * &inv).collect::<Vec<_>>());
        AlgebraicReal { field: Some(f.clone()), coeffs }
    }

    /// Sign from a double precision Horner evaluation when it clears a
    /// rigorous bound on the accumulated rounding error.
    /// Double precision value with a rigorous bound on its error.
    fn float_eval(&self, f: &CosField) -> Option<(f64, f64)> {
        let x = f.generator_f64;
        let mut v = 0.0f64;
        let mut mag = 0.0f64;
        for c in self.coeffs.iter().rev() {
            let cf = c.to_f64()?;
            if !cf.is_finite() || (cf == 0.0) != c.is_zero() || (cf != 0.0 && cf.abs() < 1e-290) {
                return None;
            }
            v = v * x + cf;
            mag = mag * x.abs().max(1.0) + cf.abs();
        }
        // Horner rounding, coefficient and generator conversion, with slack.
        let bound = (8 * self.coeffs.len() + 32) as f64 * f64::EPSILON * mag * 4.0;
        (v.is_finite() && bound.is_finite()).then_some((v, bound))
    }

    fn float_sign(&self, f: &CosField) -> Option<Ordering> {
        let (v, bound) = self.float_eval(f)?;
        if v.abs() <= bound {
            return None;
        }
        Some(if v > 0.0 { Ordering::Greater } else { Ordering::Less })
    }

    fn sign_of(&self) -> Ordering {
        if self.coeffs.is_empty() {
            return Ordering::Equal;
        }
        let Some(f) = self.field.as_ref().filter(|_| self.coeffs.len() > 1) else {
            return self.coeffs[0].cmp(&Rational::zero());
        };
        if let Some(s) = self.float_sign(f) {
            return s;
        }
        let mut bits = START_BITS;
        loop {
            let iv = self.horner(&f.generator_enclosure(bits), bits + 16);
            if iv.is_positive() {
                return Ordering::Greater;
            }
            if iv.is_negative() {
                return Ordering::Less;
            }
            assert!(bits < 1 << 16, "sign refinement did not converge");
            bits *= 2;
        }
    }
}

impl PartialEq for AlgebraicReal {
    fn eq(&self, other: &Self) -> bool {
        if self.coeffs != other.coeffs {
            return false;
        }
        self.coeffs.len() <= 1 || self.field.as_ref().map(|f| f.n) == other.field.as_ref().map(|f| f.n)
    }
}

impl fmt::Debug for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", format_rational(&r));
        }
        let n = self.field.as_ref().unwrap().n;
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format_rational(c),
                1 => format!("{}*x", format_rational(c)),
                _ => format!("{}*x^{i}", format_rational(c)),
            })
            .collect();
        write!(f, "({}) with x = 2cos(pi/{n})", terms.join(" + "))
    }
}

impl Add for &AlgebraicReal {
    type Output = AlgebraicReal;
    fn add(self, rhs: &AlgebraicReal) -> AlgebraicReal {
        let field = self.join(rhs);
        let neg: Poly = rhs.coeffs.iter().map(|c| -c).collect();
        AlgebraicReal { field, coeffs: poly_sub(&self.coeffs, &neg) }
    }
}

impl Sub for &AlgebraicReal {
    type Output = AlgebraicReal;
    fn sub(self, rhs: &AlgebraicReal) -> AlgebraicReal {
        let field = self.join(rhs);
        AlgebraicReal { field, coeffs: poly_sub(&self.coeffs, &rhs.coeffs) }
    }
}

impl Mul for &AlgebraicReal {
    type Output = AlgebraicReal;
    fn mul(self, rhs: &AlgebraicReal) -> AlgebraicReal {
        let field = self.join(rhs);
        let prod = poly_mul(&self.coeffs, &rhs.coeffs);
        let coeffs = match &field {
            Some(f) if prod.len() > f.degree() => f.reduce(&prod),
            _ => prod,
        };
        AlgebraicReal { field, coeffs }
    }
}

impl Neg for &AlgebraicReal {
    type Output = AlgebraicReal;
    fn neg(self) -> AlgebraicReal {
        AlgebraicReal { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl OrderedField for AlgebraicReal {
    fn zero_value() -> Self {
        AlgebraicReal { field: None, coeffs: Vec::new() }
    }
    fn one_value() -> Self {
        AlgebraicReal::rational(Rational::one())
    }
    fn from_rational(r: &Rational) -> Self {
        AlgebraicReal::rational(r.clone())
    }
    fn is_zero_value(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn sign(&self) -> Ordering {
        self.sign_of()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn over(&self, rhs: &Self) -> Self {
        if let Some(r) = rhs.as_rational() {
            assert!(!Zero::is_zero(&r), "division by zero");
            let inv = r.recip();
            return AlgebraicReal {
                field: self.field.clone(),
                coeffs: self.coeffs.iter().map(|c| c * &inv).collect(),
            };
        }
        self * &rhs.inverse()
    }
    fn negated(&self) -> Self {
        -self
    }
}

/// `cos(p*pi/n)` in the field of index `n`.
pub fn alg_cos(p: i64, n: u64) -> AlgebraicReal {
    let f = CosField::get(n);
    let period = 2 * n as i64;
    let j = p.rem_euclid(period) as usize;
    // C_j(x) = 2cos(j*pi/n), reduced at every step.
    let x: Poly = vec![int(0), int(1)];
    let (mut prev, mut cur): (Poly, Poly) = (vec![int(2)], f.reduce(&x));
    if j == 0 {
        cur = prev.clone();
    } else {
        for _ in 1..j {
            let next = f.reduce(&poly_sub(&poly_mul(&x, &cur), &prev));
            prev = std::mem::replace(&mut cur, next);
        }
    }
    let half = Rational::new(1.into(), 2.into());
    let mut coeffs: Poly = cur.iter().map(|c| c * &half).collect();
    trim(&mut coeffs);
    AlgebraicReal { field: Some(f), coeffs }
}

/// `sin(p*pi/n)`, which lives in the field of index `2n`.
pub fn alg_sin(p: i64, n: u64) -> AlgebraicReal {
    alg_cos(n as i64 - 2 * p, 2 * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rat, rvec};

    #[test]
    fn minimal_polynomials() {
        // 2cos(pi/5) is the golden ratio: x^2 - x - 1.
        assert_eq!(CosField::get(5).min_poly(), rvec(&[-1, -1, 1]).as_slice());
        assert_eq!(CosField::get(3).min_poly(), rvec(&[-1, 1]).as_slice());
        assert_eq!(CosField::get(4).min_poly(), rvec(&[-2, 0, 1]).as_slice());
        assert_eq!(CosField::get(1).min_poly(), rvec(&[2, 1]).as_slice());
        assert_eq!(CosField::get(12).degree(), 4);
    }

    #[test]
    fn known_values() {
        assert_eq!(alg_cos(0, 7).as_rational(), Some(int(1)));
        assert_eq!(alg_cos(7, 7).as_rational(), Some(int(-1)));
        assert_eq!(alg_cos(1, 3).as_rational(), Some(rat(1, 2)));
        assert_eq!(alg_sin(1, 6).as_rational(), Some(rat(1, 2)));
        assert_eq!(alg_sin(1, 2).as_rational(), Some(int(1)));
        let c = alg_cos(1, 4);
        assert_eq!((&c * &c).as_rational(), Some(rat(1, 2)));
        assert_eq!(c.sign(), Ordering::Greater);
        assert_eq!(alg_cos(3, 4).sign(), Ordering::Less);
    }

    #[test]
    fn inverse_and_division() {
        let x = AlgebraicReal::generator(7);
        let y = &x + &AlgebraicReal::rational(int(3));
        let inv = y.inverse();
        assert_eq!((&y * &inv).as_rational(), Some(int(1)));
        assert_eq!(x.over(&x).as_rational(), Some(int(1)));
    }

    #[test]
    fn fifth_roots_close() {
        let mut re = AlgebraicReal::zero_value();
        let mut im = AlgebraicReal::zero_value();
        for k in 0..5 {
            re = &re + &alg_cos(4 * k, 10);
            im = &im + &alg_sin(2 * k, 5);
        }
        assert!(re.is_zero_value() && im.is_zero_value());
    }

    #[test]
    fn enclosure_matches_float() {
        let c = alg_cos(2, 9);
        let v = (2.0 * std::f64::consts::PI / 9.0).cos();
        assert!((c.to_f64() - v).abs() < 1e-12);
        let iv = c.enclosure(40);
        assert!(iv.width() <= Rational::new(1.into(), num_bigint::BigInt::one() << 40));
    }
}
