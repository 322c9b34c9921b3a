use std::cmp::Ordering;
use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use super::Rational;

/// The operations the simplex and the elimination routines need. Implemented by
/// [`Rational`] and by the algebraic reals of a cyclotomic cosine field.
pub trait OrderedField: Clone + Debug + PartialEq {
    /// False for approximate stand-ins, whose witnesses may miss a row by a
    /// rounding error.
    const EXACT: bool = true;

    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero_value(&self) -> bool;
    /// Sign relative to zero.
    fn sign(&self) -> Ordering;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    /// Panics on division by zero.
    fn over(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;

    fn is_pos(&self) -> bool {
        self.sign() == Ordering::Greater
    }
    fn is_neg(&self) -> bool {
        self.sign() == Ordering::Less
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.minus(other).sign()
    }
}

impl OrderedField for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sign(&self) -> Ordering {
        if Signed::is_positive(self) {
            Ordering::Greater
        } else if Signed::is_negative(self) {
            Ordering::Less
        } else {
            Ordering::Equal
        }
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
        self / rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}
