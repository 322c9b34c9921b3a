//! Certified enclosures of sin and cos at rational multiples of pi.
//!
//! Everything is rational: pi is bracketed by a fixed 50 digit enclosure, the
//! argument is reduced to `[0, pi/4]` by exact symmetries, and the Taylor
//! series there is alternating with decreasing terms, so the first omitted term
//! bounds the error.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::interval::RationalInterval;
use super::{parse_rational, rat, Rational};

pub const DEFAULT_TRIG_BITS: u32 = 30;

const PI_DIGITS: &str = "314159265358979323846264338327950288419716939937510";

pub fn pi_enclosure() -> &'static RationalInterval {
    static PI: OnceLock<RationalInterval> = OnceLock::new();
    PI.get_or_init(|| {
        let den = BigInt::from(10).pow((PI_DIGITS.len() - 1) as u32);
        let num: BigInt = PI_DIGITS.parse().unwrap();
        let lo = Rational::new(num.clone(), den.clone());
        let hi = Rational::new(num + 1, den);
        RationalInterval::new(lo, hi)
    })
}

/// `sin` and `cos` at the point `x` in `[0, 1]` (radians) by Taylor series.
fn taylor_point(x: &Rational, bits: u32) -> (RationalInterval, RationalInterval) {
    let eps = Rational::new(BigInt::one(), BigInt::one() << (bits + 4));
    let x2 = x * x;
    // sin: x - x^3/3! + ...; cos: 1 - x^2/2! + ...
    let series = |first: Rational, start: u64| {
        let mut term = first;
        let mut sum = Rational::zero();
        let mut k = start;
        loop {
            if term.abs() < eps {
                let err = term.abs();
                return RationalInterval::new(&sum - &err, &sum + &err);
            }
            sum += &term;
            term = -(&term * &x2) / Rational::from_integer(BigInt::from((k + 1) * (k + 2)));
            k += 2;
        }
    };
    (series(x.clone(), 1), series(Rational::one(), 0))
}

fn clamp_unit(iv: RationalInterval) -> RationalInterval {
    let one = Rational::one();
    let lo = iv.lo().clone().max(-&one);
    let hi = iv.hi().clone().min(one);
    RationalInterval::new(lo, hi)
}

/// Enclosures of `sin(a*pi)` and `cos(a*pi)`, each of width about `2^-bits`.
pub fn sin_cos_enclosure(a: &Rational, bits: u32) -> (RationalInterval, RationalInterval) {
    let two = Rational::from_integer(BigInt::from(2));
    let mut r = a - (a / &two).floor() * &two;
    let mut sin_sign = Rational::one();
    let mut cos_sign = Rational::one();
    if r >= Rational::one() {
        r -= Rational::one();
        sin_sign = -sin_sign;
        cos_sign = -cos_sign;
    }
    let half = rat(1, 2);
    if r > half {
        r = Rational::one() - r;
        cos_sign = -cos_sign;
    }
    let swap = r > rat(1, 4);
    if swap {
        r = &half - r;
    }
    let (s, c) = if r.is_zero() {
        (RationalInterval::point(Rational::zero()), RationalInterval::point(Rational::one()))
    } else {
        let x = pi_enclosure().scale(&r).round_out(bits + 12);
        let (s_lo, c_hi) = taylor_point(x.lo(), bits);
        let (s_hi, c_lo) = taylor_point(x.hi(), bits);
        // Both monotone on [0, pi/4]: sin increasing, cos decreasing.
        let s = RationalInterval::new(s_lo.lo().clone(), s_hi.hi().clone()).round_out(bits);
        let c = RationalInterval::new(c_lo.lo().clone(), c_hi.hi().clone()).round_out(bits);
        (clamp_unit(s), clamp_unit(c))
    };
    let (s, c) = if swap { (c, s) } else { (s, c) };
    (s.scale(&sin_sign), c.scale(&cos_sign))
}

/// Whether `t + 2k` lies in `[lo, hi]` for some integer `k`.
fn hits(t: &Rational, lo: &Rational, hi: &Rational) -> bool {
    let two = BigInt::from(2);
    let d = lo - t;
    let k = Integer::div_ceil(d.numer(), &(d.denom() * &two));
    let candidate = t + Rational::from_integer(k * two);
    &candidate <= hi
}

/// Enclosures of `sin` and `cos` over every angle in `[lo*pi, hi*pi]`.
pub fn trig_bounds(lo: &Rational, hi: &Rational) -> (RationalInterval, RationalInterval) {
    trig_bounds_bits(lo, hi, DEFAULT_TRIG_BITS)
}

pub fn trig_bounds_bits(lo: &Rational, hi: &Rational, bits: u32) -> (RationalInterval, RationalInterval) {
    assert!(lo <= hi, "reversed angle range");
    let (s_lo, c_lo) = sin_cos_enclosure(lo, bits);
    if lo == hi {
        return (s_lo, c_lo);
    }
    let (s_hi, c_hi) = sin_cos_enclosure(hi, bits);
    let mut s = s_lo.hull(&s_hi);
    let mut c = c_lo.hull(&c_hi);
    let one = RationalInterval::point(Rational::one());
    let minus_one = RationalInterval::point(-Rational::one());
    let crit = |t: &str| parse_rational(t).unwrap();
    if hits(&crit("1/2"), lo, hi) {
        s = s.hull(&one);
    }
    if hits(&crit("3/2"), lo, hi) {
        s = s.hull(&minus_one);
    }
    if hits(&crit("0"), lo, hi) {
        c = c.hull(&one);
    }
    if hits(&crit("1"), lo, hi) {
        c = c.hull(&minus_one);
    }
    (s, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::int;

    fn tiny() -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << 20)
    }

    #[test]
    fn pi_is_bracketed() {
        let p = pi_enclosure();
        assert!(p.lo() < p.hi());
        assert!(p.contains(&rat(314159265358979, 100000000000000)) == false);
        assert!(*p.lo() > rat(314159265358979, 100000000000000));
        assert!(*p.hi() < rat(314159265358980, 100000000000000));
    }

    #[test]
    fn sixth_of_pi() {
        let (s, _) = trig_bounds(&int(0), &rat(1, 6));
        assert!(s.contains(&int(0)) && s.contains(&rat(1, 2)));
        assert!(s.lo().abs() <= tiny());
        assert!((s.hi() - rat(1, 2)).abs() <= tiny());
    }

    #[test]
    fn exact_points() {
        let (_, c) = trig_bounds(&rat(1, 3), &rat(1, 3));
        assert!(c.contains(&rat(1, 2)) && c.width() <= tiny());
        let (s, _) = trig_bounds(&rat(1, 2), &rat(1, 2));
        assert!(s.contains(&int(1)) && s.width() <= tiny());
        let (s, c) = sin_cos_enclosure(&int(-7), 20);
        assert_eq!((s.lo().clone(), c.lo().clone()), (int(0), int(-1)));
    }

    #[test]
    fn critical_points_inside() {
        let (s, c) = trig_bounds(&rat(1, 3), &rat(5, 3));
        assert_eq!(s.hi(), &int(1));
        assert_eq!(s.lo(), &int(-1));
        assert_eq!(c.lo(), &int(-1));
        assert!(*c.hi() < int(1));
        let (_, c) = trig_bounds(&rat(-1, 10), &rat(1, 10));
        assert_eq!(c.hi(), &int(1));
    }

    #[test]
    fn enclosures_shrink() {
        let (wide, _) = trig_bounds(&rat(1, 10), &rat(3, 10));
        let (narrow, _) = trig_bounds(&rat(1, 10), &rat(2, 10));
        assert!(narrow.width() < wide.width());
    }
}
