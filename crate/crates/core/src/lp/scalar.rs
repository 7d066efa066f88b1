//! Exact field arithmetic used by the simplex tableau.
//!
//! Small-integer rationals are tried first; any overflow aborts the solve so
//! it can be repeated with arbitrary precision. Both paths perform the same
//! pivots, so they produce identical results.

use crate::rational::Rational;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

/// Marker error: the fixed-width path overflowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow;

pub trait Scalar: Clone + PartialEq + PartialOrd + Send + Sync + 'static {
    fn nil() -> Self;
    fn unit() -> Self;
    fn is_nil(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn add(&self, o: &Self) -> Result<Self, Overflow>;
    fn sub(&self, o: &Self) -> Result<Self, Overflow>;
    fn mul(&self, o: &Self) -> Result<Self, Overflow>;
    fn div(&self, o: &Self) -> Result<Self, Overflow>;
    fn neg(&self) -> Result<Self, Overflow>;
    fn from_rational(r: &Rational) -> Result<Self, Overflow>;
    fn to_rational(&self) -> Rational;
}

pub type Small = Ratio<i64>;

impl Scalar for Small {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_neg(&self) -> bool {
        *self.numer() < 0
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(o).ok_or(Overflow)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(o).ok_or(Overflow)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(o).ok_or(Overflow)
    }
    fn div(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_div(o).ok_or(Overflow)
    }
    fn neg(&self) -> Result<Self, Overflow> {
        let n = self.numer().checked_neg().ok_or(Overflow)?;
        Ok(Ratio::new_raw(n, *self.denom()))
    }
    fn from_rational(r: &Rational) -> Result<Self, Overflow> {
        let n = r.numer().to_i64().ok_or(Overflow)?;
        let d = r.denom().to_i64().ok_or(Overflow)?;
        Ok(Ratio::new(n, d))
    }
    fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Scalar for Rational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_neg(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn div(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self / o)
    }
    fn neg(&self) -> Result<Self, Overflow> {
        Ok(-self)
    }
    fn from_rational(r: &Rational) -> Result<Self, Overflow> {
        Ok(r.clone())
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn small_path_reports_overflow() {
        let big = Small::from_integer(i64::MAX);
        assert_eq!(big.add(&Small::unit()), Err(Overflow));
        assert!(Small::from_rational(&(ratio(i64::MAX, 1) * ratio(4, 1))).is_err());
    }

    #[test]
    fn round_trip() {
        let r = ratio(-241, 128);
        assert_eq!(Small::from_rational(&r).unwrap().to_rational(), r);
    }
}
