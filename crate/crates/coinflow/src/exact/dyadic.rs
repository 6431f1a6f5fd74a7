//! Exact dyadic rationals and half-open dyadic intervals.
//!
//! A [`Dyadic`] is a number `mant · 2^exp` with an arbitrary-precision
//! mantissa; all sums, differences, and products are exact. Division and
//! transcendental functions live in the enclosure layer ([`crate::exact::real`]),
//! which rounds outward onto dyadics.
//!
//! A [`DyadicInterval`] is the half-open interval `[lo/2^depth, hi/2^depth)`
//! refined one bit at a time; it is the state of the Han–Hoshi sampler, the
//! inversion sampler's uniform envelope, and the randomness extractor.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for the few inexact operations (division, rounding to a
/// fixed number of fractional bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    /// Round toward −∞ (safe lower bound).
    Floor,
    /// Round toward +∞ (safe upper bound).
    Ceil,
}

/// An exact dyadic rational `mant · 2^exp`.
///
/// The representation is canonical: `mant` is odd (or zero, with `exp = 0`),
/// so structural equality coincides with numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    /// Build `mant · 2^exp`, normalizing to the canonical form.
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    /// The value 0.
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    /// The value 1.
    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    /// An integer value.
    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    /// An arbitrary-precision integer value.
    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }

    /// Exact conversion from a finite `f64` (every finite double is dyadic).
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "dyadic conversion needs a finite value, got {v}");
        if v == 0.0 {
            return Dyadic::zero();
        }
        let bits = v.to_bits();
        let biased = ((bits >> 52) & 0x7FF) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074) // subnormal: 0.f52 × 2^{-1022}
        } else {
            (frac | (1u64 << 52), biased - 1075) // 1.f52 × 2^{biased-1023}
        };
        let sign = if v.is_sign_negative() { -1 } else { 1 };
        Dyadic::new(BigInt::from(sign) * BigInt::from(mant), exp)
    }

    /// The value `2^{-k}`.
    pub fn one_half_pow(k: u32) -> Self {
        Dyadic { mant: BigInt::one(), exp: -(k as i64) }
    }

    /// The value `2^k` for signed `k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    /// Mantissa (odd or zero); together with [`Dyadic::exponent`] this is the
    /// exact value `mant · 2^exp`.
    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    /// Binary exponent of the canonical form.
    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// True if the value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// True if the value is strictly negative.
    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// True if the value is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.mant.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Absolute value.
    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Exact negation.
    pub fn neg(&self) -> Self {
        Dyadic { mant: -self.mant.clone(), exp: self.exp }
    }

    /// Exact sum.
    pub fn add(&self, other: &Dyadic) -> Self {
        if self.mant.is_zero() {
            return other.clone();
        }
        if other.mant.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << shift_usize(self.exp - e);
        let b = &other.mant << shift_usize(other.exp - e);
        Dyadic::new(a + b, e)
    }

    /// Exact difference.
    pub fn sub(&self, other: &Dyadic) -> Self {
        self.add(&other.neg())
    }

    /// Exact product.
    pub fn mul(&self, other: &Dyadic) -> Self {
        if self.mant.is_zero() || other.mant.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// Exact product with an integer.
    pub fn mul_int(&self, k: i64) -> Self {
        Dyadic::new(&self.mant * BigInt::from(k), self.exp)
    }

    /// `self / other` rounded in direction `dir` to a multiple of
    /// `2^{-frac_bits}` (`other` must be nonzero).
    pub fn div_round(&self, other: &Dyadic, frac_bits: u32, dir: Round) -> Self {
        assert!(!other.mant.is_zero(), "division by zero dyadic");
        // self/other = (ma/mb) * 2^(ea-eb); want q*2^-w with q = dir(ma*2^(ea-eb+w)/mb).
        let s = self.exp - other.exp + frac_bits as i64;
        let mut num = self.mant.clone();
        let mut den = other.mant.clone();
        if s >= 0 {
            num <<= shift_usize(s);
        } else {
            den <<= shift_usize(-s);
        }
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let q = match dir {
            Round::Floor => num.div_floor(&den),
            Round::Ceil => num.div_ceil(&den),
        };
        Dyadic::new(q, -(frac_bits as i64))
    }

    /// Round to a multiple of `2^{-frac_bits}` in direction `dir`.
    pub fn round_to(&self, frac_bits: u32, dir: Round) -> Self {
        if self.exp >= -(frac_bits as i64) {
            return self.clone(); // already representable
        }
        let shift = shift_usize(-(frac_bits as i64) - self.exp);
        let den = BigInt::one() << shift;
        let q = match dir {
            Round::Floor => self.mant.div_floor(&den),
            Round::Ceil => self.mant.div_ceil(&den),
        };
        Dyadic::new(q, -(frac_bits as i64))
    }

    /// Largest integer ≤ self.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << shift_usize(self.exp)
        } else {
            let den = BigInt::one() << shift_usize(-self.exp);
            self.mant.div_floor(&den)
        }
    }

    /// `floor(self · 2^k)` as an integer.
    pub fn floor_mul_pow2(&self, k: i64) -> BigInt {
        self.mul_pow2(k).floor()
    }

    /// Largest `c` with `2^c ≤ self` (requires `self > 0`).
    pub fn floor_log2(&self) -> i64 {
        assert!(self.is_positive(), "floor_log2 of non-positive dyadic");
        self.mant.bits() as i64 - 1 + self.exp
    }

    /// Smallest `c` with `self ≤ 2^c` (requires `self > 0`).
    pub fn ceil_log2(&self) -> i64 {
        assert!(self.is_positive(), "ceil_log2 of non-positive dyadic");
        if self.mant.is_one() {
            self.exp
        } else {
            self.mant.bits() as i64 + self.exp
        }
    }

    /// Best-effort conversion to `f64` (reporting only; rounds to nearest,
    /// overflows to ±∞, underflows to 0).
    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        // Keep at most 64 significant bits so BigInt→f64 stays in range,
        // folding the discarded scale into the exponent.
        let (m, extra) = if bits > 64 {
            let sh = bits - 64;
            (&self.mant >> sh as usize, sh as i64)
        } else {
            (self.mant.clone(), 0)
        };
        let mf = m.to_f64().unwrap_or(if self.mant.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        let e = self.exp + extra;
        let e_clamped = e.clamp(-2000, 2000) as i32;
        mf * 2f64.powi(e_clamped)
    }
}

fn shift_usize(s: i64) -> usize {
    assert!(
        (0..=(1 << 31)).contains(&s),
        "dyadic shift amount out of range: {s}"
    );
    s as usize
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mant.sign(), other.mant.sign()) {
            (a, b) if a != b => a.cmp(&b),
            (num_bigint::Sign::NoSign, _) => Ordering::Equal,
            _ => {
                let e = self.exp.min(other.exp);
                let a = &self.mant << shift_usize(self.exp - e);
                let b = &other.mant << shift_usize(other.exp - e);
                a.cmp(&b)
            }
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

impl fmt::Display for Dyadic {
    /// Exact rendering: an integer when `exp ≥ 0`, otherwise `m/2^k`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp >= 0 {
            write!(f, "{}", &self.mant << shift_usize(self.exp))
        } else {
            write!(f, "{}/2^{}", self.mant, -self.exp)
        }
    }
}

/// Half-open interval `[lo/2^depth, hi/2^depth)` with exact integer endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicInterval {
    lo: BigInt,
    hi: BigInt,
    depth: u32,
}

impl DyadicInterval {
    /// The unit interval `[0, 1)` at depth 0.
    pub fn unit() -> Self {
        DyadicInterval {
            lo: BigInt::zero(),
            hi: BigInt::one(),
            depth: 0,
        }
    }

    /// Build `[lo/2^depth, hi/2^depth)`; requires `0 ≤ lo < hi ≤ 2^depth`.
    pub fn new(lo: BigInt, hi: BigInt, depth: u32) -> Self {
        assert!(!lo.is_negative() && lo < hi, "invalid dyadic interval");
        assert!(hi <= (BigInt::one() << depth as usize), "interval exceeds [0,1)");
        DyadicInterval { lo, hi, depth }
    }

    /// Refine by one bit: the left half for `b = 0`, the right half for
    /// `b = 1`. Depth increases by one and the width exactly halves.
    pub fn refine(&self, b: u8) -> Self {
        debug_assert!(b <= 1);
        let lo2 = &self.lo << 1usize;
        let hi2 = &self.hi << 1usize;
        // The midpoint numerator at depth+1 is lo+hi (the width is even
        // after doubling, so the split is exact).
        let mid = &self.lo + &self.hi;
        if b == 0 {
            DyadicInterval { lo: lo2, hi: mid, depth: self.depth + 1 }
        } else {
            DyadicInterval { lo: mid, hi: hi2, depth: self.depth + 1 }
        }
    }

    /// Refine in place (hot-loop variant of [`DyadicInterval::refine`]).
    pub fn refine_mut(&mut self, b: u8) {
        *self = self.refine(b);
    }

    /// Lower endpoint numerator.
    pub fn lo_numerator(&self) -> &BigInt {
        &self.lo
    }

    /// Upper endpoint numerator.
    pub fn hi_numerator(&self) -> &BigInt {
        &self.hi
    }

    /// Refinement depth `t` (the interval is `[lo/2^t, hi/2^t)`).
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Lower endpoint as an exact dyadic.
    pub fn lo_dyadic(&self) -> Dyadic {
        Dyadic::new(self.lo.clone(), -(self.depth as i64))
    }

    /// Upper endpoint as an exact dyadic.
    pub fn hi_dyadic(&self) -> Dyadic {
        Dyadic::new(self.hi.clone(), -(self.depth as i64))
    }

    /// Exact width `(hi − lo)/2^depth`.
    pub fn width(&self) -> Dyadic {
        Dyadic::new(&self.hi - &self.lo, -(self.depth as i64))
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}/2^{}, {}/2^{})", self.lo, self.depth, self.hi, self.depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn canonical_form_and_equality() {
        assert_eq!(dy(4, -3), dy(1, -1)); // 4/8 = 1/2
        assert_eq!(dy(0, 7), Dyadic::zero());
        assert_eq!(Dyadic::one_half_pow(3), dy(1, -3));
        assert_eq!(Dyadic::pow2(2), dy(4, 0));
    }

    #[test]
    fn f64_round_trips_exactly() {
        for v in [0.0, 1.0, -1.0, 0.5, -3.75, 1.5e300, 2f64.powi(-1074), 0.1] {
            let d = Dyadic::from_f64(v);
            assert_eq!(d.to_f64(), v, "round trip of {v}");
        }
        assert_eq!(Dyadic::from_f64(6.0), dy(3, 1));
        assert_eq!(Dyadic::from_f64(-0.0), Dyadic::zero());
    }

    #[test]
    fn exact_arithmetic() {
        let half = dy(1, -1);
        let quarter = dy(1, -2);
        assert_eq!(half.add(&quarter), dy(3, -2));
        assert_eq!(half.sub(&quarter), quarter);
        assert_eq!(half.mul(&quarter), dy(1, -3));
        assert_eq!(half.mul_int(6), dy(3, 0));
        assert_eq!(quarter.mul_pow2(2), Dyadic::one());
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(dy(1, -1) < dy(3, -2));
        assert!(dy(-1, 0) < dy(1, -20));
        assert!(dy(5, -3) > dy(1, -1));
        assert_eq!(dy(1, 3), dy(8, 0));
    }

    #[test]
    fn directed_division_brackets_the_quotient() {
        let a = Dyadic::one();
        let b = dy(3, 0);
        let lo = a.div_round(&b, 10, Round::Floor);
        let hi = a.div_round(&b, 10, Round::Ceil);
        assert!(lo < hi);
        assert!(lo.mul_int(3) <= Dyadic::one());
        assert!(hi.mul_int(3) >= Dyadic::one());
        assert_eq!(hi.sub(&lo), Dyadic::one_half_pow(10));
        // Negative numerator still brackets correctly.
        let neg = dy(-1, 0);
        let nlo = neg.div_round(&b, 10, Round::Floor);
        let nhi = neg.div_round(&b, 10, Round::Ceil);
        assert!(nlo.mul_int(3) <= neg && neg <= nhi.mul_int(3));
    }

    #[test]
    fn floor_and_logs() {
        assert_eq!(dy(7, -2).floor(), BigInt::from(1)); // 1.75
        assert_eq!(dy(-7, -2).floor(), BigInt::from(-2));
        assert_eq!(dy(3, -2).floor_log2(), -1); // 0.75 in [1/2, 1)
        assert_eq!(dy(3, -2).ceil_log2(), 0);
        assert_eq!(dy(1, 4).ceil_log2(), 4);
        assert_eq!(dy(1, 4).floor_log2(), 4);
    }

    #[test]
    fn f64_conversion_is_sane() {
        assert_eq!(dy(3, -2).to_f64(), 0.75);
        assert_eq!(dy(-1, -1).to_f64(), -0.5);
        let tiny = Dyadic::one_half_pow(3000);
        assert_eq!(tiny.to_f64(), 0.0);
    }

    #[test]
    fn display_is_exact() {
        assert_eq!(dy(3, -3).to_string(), "3/2^3");
        assert_eq!(dy(6, 0).to_string(), "6");
        assert_eq!(dy(1, 3).to_string(), "8");
    }

    #[test]
    fn interval_refinement_hand_traces() {
        // [0,1) with 0 -> [0,1/2)
        let u = DyadicInterval::unit();
        let left = u.refine(0);
        assert_eq!(left.lo_dyadic(), Dyadic::zero());
        assert_eq!(left.hi_dyadic(), Dyadic::one_half_pow(1));
        // [0,1/2) with 1 -> [1/4,1/2)
        let r = left.refine(1);
        assert_eq!(r.lo_dyadic(), Dyadic::one_half_pow(2));
        assert_eq!(r.hi_dyadic(), Dyadic::one_half_pow(1));
        // [0,1) with 0,1,1 -> [3/8,1/2)
        let mut i = DyadicInterval::unit();
        for b in [0, 1, 1] {
            i.refine_mut(b);
        }
        assert_eq!(i.lo_dyadic(), Dyadic::new(BigInt::from(3), -3));
        assert_eq!(i.hi_dyadic(), Dyadic::one_half_pow(1));
        assert_eq!(i.width(), Dyadic::one_half_pow(3));
    }

    #[test]
    fn refinement_chain_matches_binary_prefix() {
        // lo after bits b1..bt is exactly 0.b1..bt, width exactly 2^-t.
        let bits = [1u8, 0, 1, 1, 0, 1];
        let mut i = DyadicInterval::unit();
        let mut acc = Dyadic::zero();
        for (t, &b) in bits.iter().enumerate() {
            i.refine_mut(b);
            if b == 1 {
                acc = acc.add(&Dyadic::one_half_pow(t as u32 + 1));
            }
        }
        assert_eq!(i.lo_dyadic(), acc);
        assert_eq!(i.width(), Dyadic::one_half_pow(bits.len() as u32));
    }
}
