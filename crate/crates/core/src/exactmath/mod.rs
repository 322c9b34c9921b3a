//! Exact arithmetic kernel: rationals, a small dense simplex that runs over any
//! ordered field, linear algebra, certified trigonometric enclosures and the
//! real cyclotomic fields `Q(cos(pi/N))`.

mod algebraic;
mod field;
mod interval;
mod linalg;
mod lp;
mod trig;

pub use algebraic::{alg_cos, alg_sin, AlgebraicReal, CosField};
pub use field::OrderedField;
pub use interval::RationalInterval;
pub use linalg::{nullspace, rank, solve_affine, span_member, AffineSolution};
pub use lp::{
    affine_dim, decide_sign, lp_feasible, lp_maximize, lp_minimize, Equality, Feasibility,
    Inequality, LinearSystem, LpOutcome, SignSet,
};
pub use trig::{pi_enclosure, sin_cos_enclosure, trig_bounds, DEFAULT_TRIG_BITS};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator by `num-rational`.
pub type Rational = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rvec(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| int(x)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Least common multiple of the denominators.
pub fn common_denominator(xs: &[Rational]) -> BigInt {
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Scales a rational vector to a primitive integer vector pointing the same way.
/// The zero vector maps to itself.
pub fn primitive_integer_vector(xs: &[Rational]) -> Vec<BigInt> {
    let den = common_denominator(xs);
    let ints: Vec<BigInt> = xs.iter().map(|x| (x * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p.trim().parse().ok()?, q))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    // Plenty for rendering; decisions never go through this.
    let scale = BigInt::from(1u64 << 53);
    let n = (r * Rational::from_integer(scale.clone())).round().to_integer();
    let neg = n.is_negative();
    let mag: f64 = n.abs().to_string().parse().unwrap_or(f64::INFINITY);
    let v = mag / (1u64 << 53) as f64;
    if neg {
        -v
    } else {
        v
    }
}
