//! Computable-real enclosures: outward-rounded interval arithmetic on dyadics.
//!
//! A [`RealEnclosure`] is a closed interval `[lo, hi]` of exact dyadics known
//! to contain a real value. A [`Real`] is a handle to a computable real: a
//! function from a precision `k` to an enclosure of width at most `2^{-k}`,
//! memoized so that repeated queries refine a single nested chain. Enclosures
//! from one handle at increasing precision always intersect; an empty
//! intersection means a handle broke the nesting contract and is reported as
//! a panic rather than silently producing wrong digits.
//!
//! The kernels at the bottom (exp, ln, sqrt, sin, cos, π, ln 2) evaluate by
//! fixed-point series with directed rounding, so every bound they return is a
//! proven bound — there is no floating point anywhere in the value path.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use super::dyadic::{Dyadic, DyadicInterval, Round};

/// Error raised when a comparison or digit query cannot be decided within its
/// refinement budget (the two values are equal, or an oracle is mis-modeled).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("enclosure refinement budget of {budget} bits exceeded without a decision")]
pub struct RefineBudgetExceeded {
    /// The precision budget, in bits, that was exhausted.
    pub budget: u32,
}

/// A closed interval `[lo, hi]` of exact dyadics containing a real value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealEnclosure {
    lo: Dyadic,
    hi: Dyadic,
}

impl RealEnclosure {
    /// Build an enclosure; requires `lo ≤ hi`.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "inverted enclosure: {lo} > {hi}");
        RealEnclosure { lo, hi }
    }

    /// The degenerate enclosure `[d, d]` of an exactly-known value.
    pub fn point(d: Dyadic) -> Self {
        RealEnclosure { lo: d.clone(), hi: d }
    }

    /// Lower bound.
    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    /// Upper bound.
    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    /// Exact width `hi − lo`.
    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    /// Exact midpoint `(lo + hi)/2`.
    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_pow2(-1)
    }

    /// Exact endpoint sum of two enclosures.
    pub fn add(&self, other: &RealEnclosure) -> Self {
        RealEnclosure::new(self.lo.add(&other.lo), self.hi.add(&other.hi))
    }

    /// Exact endpoint difference.
    pub fn sub(&self, other: &RealEnclosure) -> Self {
        RealEnclosure::new(self.lo.sub(&other.hi), self.hi.sub(&other.lo))
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        RealEnclosure::new(self.hi.neg(), self.lo.neg())
    }

    /// Interval product (exact corner products).
    pub fn mul(&self, other: &RealEnclosure) -> Self {
        let c1 = self.lo.mul(&other.lo);
        let c2 = self.lo.mul(&other.hi);
        let c3 = self.hi.mul(&other.lo);
        let c4 = self.hi.mul(&other.hi);
        let lo = c1.clone().min(c2.clone()).min(c3.clone()).min(c4.clone());
        let hi = c1.max(c2).max(c3).max(c4);
        RealEnclosure::new(lo, hi)
    }

    /// Exact scaling by a dyadic.
    pub fn mul_dyadic(&self, d: &Dyadic) -> Self {
        if d.is_negative() {
            RealEnclosure::new(self.hi.mul(d), self.lo.mul(d))
        } else {
            RealEnclosure::new(self.lo.mul(d), self.hi.mul(d))
        }
    }

    /// Exact scaling by an integer.
    pub fn mul_int(&self, k: i64) -> Self {
        self.mul_dyadic(&Dyadic::from_int(k))
    }

    /// Exact translation by a dyadic.
    pub fn add_dyadic(&self, d: &Dyadic) -> Self {
        RealEnclosure::new(self.lo.add(d), self.hi.add(d))
    }

    /// Intersection, if nonempty.
    pub fn intersect(&self, other: &RealEnclosure) -> Option<Self> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo <= hi {
            Some(RealEnclosure { lo, hi })
        } else {
            None
        }
    }

    /// Whether the dyadic `d` lies in `[lo, hi]`.
    pub fn contains_dyadic(&self, d: &Dyadic) -> bool {
        self.lo <= *d && *d <= self.hi
    }
}

impl fmt::Display for RealEnclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Tri-state answer for half-open cell membership tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriState {
    /// Provably `interval ⊆ [cell_lo, cell_hi)`.
    Inside,
    /// Provably `interval ∩ [cell_lo, cell_hi) = ∅`.
    Outside,
    /// Not decidable at the given enclosure precision; refine and retry.
    Undecided,
}

/// Decide whether the half-open dyadic interval lies inside, outside, or
/// undecidably relative to the half-open cell `[cell_lo, cell_hi)` whose
/// endpoints are known only by enclosure.
///
/// The answer is monotone under refinement: once `Inside` or `Outside` is
/// proven at some precision it stays proven at every finer precision, because
/// finer enclosures are nested.
pub fn interval_inside(
    interval: &DyadicInterval,
    cell_lo: &RealEnclosure,
    cell_hi: &RealEnclosure,
) -> TriState {
    let a = interval.lo_dyadic();
    let b = interval.hi_dyadic();
    // Inside: cell_lo ≤ a and b ≤ cell_hi, proven from the safe sides.
    if *cell_lo.hi() <= a && b <= *cell_hi.lo() {
        return TriState::Inside;
    }
    // Outside: b ≤ cell_lo (interval entirely below the cell) or
    // cell_hi ≤ a (entirely above), again proven from the safe sides.
    if b <= *cell_lo.lo() || *cell_hi.hi() <= a {
        return TriState::Outside;
    }
    TriState::Undecided
}

type ComputeFn = dyn Fn(u32) -> RealEnclosure + Send + Sync;

struct RealInner {
    compute: Box<ComputeFn>,
    cache: Mutex<Option<RealEnclosure>>,
}

/// A computable real: precision in, enclosure out, with memoized nesting.
///
/// Cloning is cheap (shared handle). All operations build new handles lazily;
/// nothing is evaluated until [`Real::enclose`] is called.
#[derive(Clone)]
pub struct Real {
    inner: Arc<RealInner>,
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner.cache.lock().unwrap().as_ref() {
            Some(e) => write!(f, "Real(≈{})", e),
            None => write!(f, "Real(unevaluated)"),
        }
    }
}

impl Real {
    /// Wrap a precision-to-enclosure function.
    ///
    /// Contract: `f(k)` returns an enclosure of width at most `2^{-k}`, and
    /// enclosures for different `k` all contain the same value. Violations are
    /// detected (empty intersections panic; widths are asserted).
    pub fn from_fn(f: impl Fn(u32) -> RealEnclosure + Send + Sync + 'static) -> Self {
        Real {
            inner: Arc::new(RealInner {
                compute: Box::new(f),
                cache: Mutex::new(None),
            }),
        }
    }

    /// An exactly-known dyadic value.
    pub fn constant(d: Dyadic) -> Self {
        Real::from_fn(move |_| RealEnclosure::point(d.clone()))
    }

    /// The exact rational `num/den` (`den ≠ 0`).
    pub fn from_ratio(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "rational with zero denominator");
        let n = Dyadic::from_bigint(num);
        let d = Dyadic::from_bigint(den);
        Real::from_fn(move |k| {
            RealEnclosure::new(
                n.div_round(&d, k + 1, Round::Floor),
                n.div_round(&d, k + 1, Round::Ceil),
            )
        })
    }

    /// Enclosure of width at most `2^{-k}` (memoized, nested).
    pub fn enclose(&self, k: u32) -> RealEnclosure {
        let target = Dyadic::one_half_pow(k);
        if let Some(best) = self.inner.cache.lock().unwrap().as_ref() {
            if best.width() <= target {
                return best.clone();
            }
        }
        let fresh = (self.inner.compute)(k);
        assert!(
            fresh.width() <= target,
            "computable-real handle returned width {} > 2^-{k}",
            fresh.width()
        );
        let mut slot = self.inner.cache.lock().unwrap();
        let merged = match slot.as_ref() {
            Some(best) => best.intersect(&fresh).unwrap_or_else(|| {
                panic!(
                    "computable-real handle broke the nesting contract: \
                     {best} and {fresh} are disjoint"
                )
            }),
            None => fresh,
        };
        *slot = Some(merged.clone());
        merged
    }

    /// Convenience: midpoint of the enclosure at precision `k`, as `f64`.
    pub fn to_f64(&self, k: u32) -> f64 {
        self.enclose(k).midpoint().to_f64()
    }

    /// Sum.
    pub fn add(&self, other: &Real) -> Real {
        let (a, b) = (self.clone(), other.clone());
        Real::from_fn(move |k| a.enclose(k + 2).add(&b.enclose(k + 2)))
    }

    /// Difference.
    pub fn sub(&self, other: &Real) -> Real {
        let (a, b) = (self.clone(), other.clone());
        Real::from_fn(move |k| a.enclose(k + 2).sub(&b.enclose(k + 2)))
    }

    /// Negation.
    pub fn neg(&self) -> Real {
        let a = self.clone();
        Real::from_fn(move |k| a.enclose(k).neg())
    }

    /// Translation by an exact dyadic.
    pub fn add_dyadic(&self, d: &Dyadic) -> Real {
        let (a, d) = (self.clone(), d.clone());
        Real::from_fn(move |k| a.enclose(k).add_dyadic(&d))
    }

    /// Scaling by an exact dyadic.
    pub fn mul_dyadic(&self, d: &Dyadic) -> Real {
        let (a, d) = (self.clone(), d.clone());
        Real::from_fn(move |k| {
            refine_to_width(k, |q| a.enclose(q).mul_dyadic(&d))
        })
    }

    /// Product.
    pub fn mul(&self, other: &Real) -> Real {
        let (a, b) = (self.clone(), other.clone());
        Real::from_fn(move |k| {
            refine_to_width(k, |q| a.enclose(q).mul(&b.enclose(q)))
        })
    }

    /// Quotient; the divisor must be provably nonzero (refined until its
    /// enclosure separates from 0, panicking after a large fixed budget,
    /// which indicates a modeling error).
    pub fn div(&self, other: &Real) -> Real {
        let (a, b) = (self.clone(), other.clone());
        Real::from_fn(move |k| {
            let positive = divisor_sign(&b);
            refine_to_width(k, |q| {
                let num = a.enclose(q);
                let den = b.enclose(q);
                if positive {
                    div_enclosure_positive(&num, &den, q)
                } else {
                    div_enclosure_positive(&num.neg(), &den.neg(), q)
                }
            })
        })
    }

    /// `e^x`.
    pub fn exp(&self) -> Real {
        let a = self.clone();
        Real::from_fn(move |k| {
            refine_to_width(k, |q| {
                let e = a.enclose(q);
                let lo = exp_point(e.lo(), q);
                let hi = exp_point(e.hi(), q);
                RealEnclosure::new(lo.lo().clone(), hi.hi().clone())
            })
        })
    }

    /// Natural logarithm; the value must be provably positive.
    pub fn ln(&self) -> Real {
        let a = self.clone();
        Real::from_fn(move |k| {
            let mut q = k + 2;
            for _ in 0..64 {
                let e = a.enclose(q);
                if e.lo().is_positive() {
                    break;
                }
                q = q.saturating_mul(2) + 8;
                assert!(q < 1 << 22, "ln argument not separated from zero");
            }
            refine_to_width(k, |q| {
                let e = a.enclose(q);
                assert!(
                    e.lo().is_positive(),
                    "ln argument not separated from zero at precision {q}"
                );
                let lo = ln_point(e.lo(), q);
                let hi = ln_point(e.hi(), q);
                RealEnclosure::new(lo.lo().clone(), hi.hi().clone())
            })
        })
    }

    /// Base-2 logarithm (`ln x / ln 2`).
    pub fn log2(&self) -> Real {
        self.ln().div(&ln2_real())
    }

    /// Square root; the value must be nonnegative (enclosures may dip below
    /// zero, in which case the lower argument is clamped to 0).
    pub fn sqrt(&self) -> Real {
        let a = self.clone();
        Real::from_fn(move |k| {
            refine_to_width(k, |q| {
                let e = a.enclose(q);
                assert!(
                    !e.hi().is_negative(),
                    "sqrt of a provably negative value"
                );
                let lo_arg = if e.lo().is_negative() { Dyadic::zero() } else { e.lo().clone() };
                let lo = sqrt_point(&lo_arg, q);
                let hi = sqrt_point(e.hi(), q);
                RealEnclosure::new(lo.lo().clone(), hi.hi().clone())
            })
        })
    }

    /// Sine (arguments within `|x| ≤ 16`; all internal uses keep `|x| < 2π+1`).
    pub fn sin(&self) -> Real {
        let a = self.clone();
        Real::from_fn(move |k| {
            refine_to_width(k, |q| {
                let e = a.enclose(q);
                // Evaluate at the midpoint and pad by the half-width
                // (|sin'| ≤ 1, so the padding is a valid Lipschitz bound).
                let mid = e.midpoint();
                let hw = e.width().mul_pow2(-1);
                let base = sin_point(&mid, q);
                RealEnclosure::new(base.lo().sub(&hw), base.hi().add(&hw))
            })
        })
    }

    /// Cosine (same argument range as [`Real::sin`]).
    pub fn cos(&self) -> Real {
        let a = self.clone();
        Real::from_fn(move |k| {
            refine_to_width(k, |q| {
                let e = a.enclose(q);
                let mid = e.midpoint();
                let hw = e.width().mul_pow2(-1);
                let base = cos_point(&mid, q);
                RealEnclosure::new(base.lo().sub(&hw), base.hi().add(&hw))
            })
        })
    }

    /// Compare against an exact dyadic by refining until separated.
    ///
    /// Returns `Less`/`Greater` once proven. If the enclosure still straddles
    /// `c` at the budget precision, returns an error — with a correct model
    /// this only happens when the value *equals* `c`, i.e. a dyadic boundary
    /// that should have been represented exactly.
    pub fn compare_dyadic(
        &self,
        c: &Dyadic,
        budget_bits: u32,
    ) -> Result<Ordering, RefineBudgetExceeded> {
        let mut k = 8u32;
        loop {
            let e = self.enclose(k);
            if e.hi() < c {
                return Ok(Ordering::Less);
            }
            if e.lo() > c {
                return Ok(Ordering::Greater);
            }
            if k >= budget_bits {
                return Err(RefineBudgetExceeded { budget: budget_bits });
            }
            k = (k * 2).min(budget_bits);
        }
    }
}

/// Refine a precision-indexed enclosure family until its width is ≤ `2^{-k}`.
fn refine_to_width(k: u32, f: impl Fn(u32) -> RealEnclosure) -> RealEnclosure {
    let target = Dyadic::one_half_pow(k);
    let mut q = k + 4;
    let mut last_width: Option<Dyadic> = None;
    for _ in 0..64 {
        let e = f(q);
        let w = e.width();
        if w <= target {
            return e;
        }
        // Excess bits = how far the width overshoots 2^-k; widen by that
        // plus slack. Guard against non-shrinking families.
        let excess = (w.ceil_log2() + k as i64).max(1);
        if let Some(prev) = &last_width {
            assert!(
                w < *prev || q < 1 << 20,
                "enclosure family stopped shrinking at width {w}"
            );
        }
        last_width = Some(w);
        q = q + excess as u32 + 8;
    }
    panic!("enclosure did not reach width 2^-{k} after 64 refinements");
}

/// Determine the divisor's sign (true = positive), refining as needed.
fn divisor_sign(b: &Real) -> bool {
    let mut k = 8u32;
    loop {
        let e = b.enclose(k);
        if e.lo().is_positive() {
            return true;
        }
        if e.hi().is_negative() {
            return false;
        }
        assert!(k < 1 << 20, "divisor not separated from zero");
        k *= 2;
    }
}

/// Quotient enclosure for a strictly positive divisor.
fn div_enclosure_positive(num: &RealEnclosure, den: &RealEnclosure, w: u32) -> RealEnclosure {
    debug_assert!(den.lo().is_positive());
    let lo_den = if num.lo().is_negative() { den.lo() } else { den.hi() };
    let hi_den = if num.hi().is_negative() { den.hi() } else { den.lo() };
    RealEnclosure::new(
        num.lo().div_round(lo_den, w, Round::Floor),
        num.hi().div_round(hi_den, w, Round::Ceil),
    )
}

// ---------------------------------------------------------------------------
// Fixed-point series kernels with directed rounding.
//
// Values are BigInt fixed-point integers n meaning n·2^{-w}. Every operation
// rounds lower bounds down and upper bounds up, so [lo, hi] always brackets
// the exact quantity; truncation tails are padded by proven constants.
// ---------------------------------------------------------------------------

fn fixed_floor(x: &Dyadic, w: u32) -> BigInt {
    x.floor_mul_pow2(w as i64)
}

fn fixed_is_exact(x: &Dyadic, w: u32) -> bool {
    x.is_zero() || x.exponent() + w as i64 >= 0
}

fn from_fixed(n: BigInt, w: u32) -> Dyadic {
    Dyadic::new(n, -(w as i64))
}

/// Enclosure of `e^x` of width ≤ `2^{-k}`; supports `|x| ≤ 4096`.
pub(crate) fn exp_point(x: &Dyadic, k: u32) -> RealEnclosure {
    let a = x.abs();
    assert!(
        a <= Dyadic::from_int(4096),
        "exp argument out of supported range: {x}"
    );
    let quarter = Dyadic::new(BigInt::one(), -2);
    let k_sq: u32 = if a.is_zero() || a <= quarter {
        0
    } else {
        (a.ceil_log2() + 2).max(0) as u32
    };
    let mag_bits: u32 = if x.is_positive() {
        (a.to_f64() * 1.4427).ceil() as u32 + 2
    } else {
        2
    };
    let mut w = k + 2 * k_sq + mag_bits + 48;
    for _ in 0..40 {
        if let Some(enc) = exp_attempt(x, &a, k_sq, w, k) {
            return enc;
        }
        w = w * 2 + 64;
    }
    panic!("exp enclosure did not converge at width 2^-{k}");
}

fn exp_attempt(x: &Dyadic, a: &Dyadic, k_sq: u32, w: u32, k_target: u32) -> Option<RealEnclosure> {
    let s = BigInt::one() << w as usize;
    let r = a.mul_pow2(-(k_sq as i64)); // |r| ≤ 1/4
    let r_lo = fixed_floor(&r, w);
    let r_hi = if fixed_is_exact(&r, w) { r_lo.clone() } else { &r_lo + 1 };

    let mut term_lo = s.clone();
    let mut term_hi = s.clone();
    let mut sum_lo = s.clone();
    let mut sum_hi = s.clone();
    let mut n: u64 = 1;
    loop {
        term_lo = (&term_lo * &r_lo).div_floor(&s).div_floor(&BigInt::from(n));
        term_hi = Integer::div_ceil(&(&term_hi * &r_hi), &s);
        term_hi = Integer::div_ceil(&term_hi, &BigInt::from(n));
        sum_lo += &term_lo;
        sum_hi += &term_hi;
        // Ratio of consecutive terms ≤ 1/4 (plus rounding), so once the upper
        // bracket is ≤ 8 ulp the true tail is ≤ 8·(1/3) ulp < 3 ulp.
        if term_hi <= BigInt::from(8) {
            break;
        }
        n += 1;
        assert!(n < 100_000, "exp series failed to terminate");
    }
    sum_hi += BigInt::from(32); // truncation tail + rounding pad

    for _ in 0..k_sq {
        sum_lo = (&sum_lo * &sum_lo).div_floor(&s);
        sum_hi = Integer::div_ceil(&(&sum_hi * &sum_hi), &s);
    }

    let (lo_i, hi_i) = if x.is_negative() {
        let s2 = &s * &s;
        if sum_lo.is_zero() {
            return None;
        }
        (s2.div_floor(&sum_hi), Integer::div_ceil(&s2, &sum_lo))
    } else {
        (sum_lo, sum_hi)
    };
    let enc = RealEnclosure::new(from_fixed(lo_i, w), from_fixed(hi_i, w));
    if enc.width() <= Dyadic::one_half_pow(k_target) {
        Some(enc)
    } else {
        None
    }
}

/// Enclosure of `ln x` of width ≤ `2^{-k}` for `x > 0`.
pub(crate) fn ln_point(x: &Dyadic, k: u32) -> RealEnclosure {
    assert!(x.is_positive(), "ln of non-positive value: {x}");
    // x = m·2^n with m in [1, 2): ln x = n·ln2 + 2·atanh((m−1)/(m+1)).
    let n = x.floor_log2();
    let m = x.mul_pow2(-n);
    let n_bits = 64 - n.unsigned_abs().leading_zeros();
    let mut w = k + n_bits + 24;
    for _ in 0..40 {
        if let Some(enc) = ln_attempt(&m, n, w, k) {
            return enc;
        }
        w = w * 2 + 64;
    }
    panic!("ln enclosure did not converge at width 2^-{k}");
}

fn ln_attempt(m: &Dyadic, n: i64, w: u32, k_target: u32) -> Option<RealEnclosure> {
    let one = Dyadic::one();
    let num = m.sub(&one);
    let den = m.add(&one);
    // t ∈ [0, 1/3); the atanh series gains ≥ 3 bits per term.
    let t_lo = fixed_floor(&num.div_round(&den, w, Round::Floor), w);
    let t_hi = fixed_floor(&num.div_round(&den, w, Round::Ceil), w);
    let lnm = atanh_series(&t_lo, &t_hi, w).mul_pow2_enclosure(1);

    let ln2 = ln2_enclosure(w);
    let total = ln2.mul_int(n).add(&lnm);
    if total.width() <= Dyadic::one_half_pow(k_target) {
        Some(total)
    } else {
        None
    }
}

/// Interval atanh(t) for fixed-point `t ∈ [0, 1/2)` brackets `[t_lo, t_hi]`.
fn atanh_series(t_lo: &BigInt, t_hi: &BigInt, w: u32) -> FixedEnclosure {
    let s = BigInt::one() << w as usize;
    let mut u_lo = t_lo.clone();
    let mut u_hi = t_hi.clone();
    let mut sum_lo = u_lo.clone();
    let mut sum_hi = u_hi.clone();
    let mut j: u64 = 1;
    loop {
        u_lo = (&u_lo * t_lo).div_floor(&s);
        u_lo = (&u_lo * t_lo).div_floor(&s);
        u_hi = Integer::div_ceil(&(&u_hi * t_hi), &s);
        u_hi = Integer::div_ceil(&(&u_hi * t_hi), &s);
        let d = BigInt::from(2 * j + 1);
        sum_lo += u_lo.div_floor(&d);
        sum_hi += Integer::div_ceil(&u_hi, &d);
        if u_hi <= BigInt::from(8) {
            break;
        }
        j += 1;
        assert!(j < 100_000, "atanh series failed to terminate");
    }
    sum_hi += BigInt::from(32); // tail (ratio ≤ 1/4) + rounding pad
    FixedEnclosure { lo: sum_lo, hi: sum_hi, w }
}

/// Fixed-point interval helper for kernel-internal sums.
struct FixedEnclosure {
    lo: BigInt,
    hi: BigInt,
    w: u32,
}

impl FixedEnclosure {
    fn to_real(&self) -> RealEnclosure {
        RealEnclosure::new(from_fixed(self.lo.clone(), self.w), from_fixed(self.hi.clone(), self.w))
    }

    fn mul_pow2_enclosure(&self, sh: i64) -> RealEnclosure {
        let e = self.to_real();
        RealEnclosure::new(e.lo().mul_pow2(sh), e.hi().mul_pow2(sh))
    }
}

/// Enclosure of `√x` of width ≤ `2^{-k}` for `x ≥ 0`.
pub(crate) fn sqrt_point(x: &Dyadic, k: u32) -> RealEnclosure {
    assert!(!x.is_negative(), "sqrt of negative value: {x}");
    if x.is_zero() {
        return RealEnclosure::point(Dyadic::zero());
    }
    let w = k + 2;
    // floor(√(x·4^w)) ≤ √x·2^w; ceil on the ceiling of the radicand bounds above.
    let lo_rad = x.floor_mul_pow2(2 * w as i64);
    let hi_rad = if fixed_is_exact(x, 2 * w) { lo_rad.clone() } else { &lo_rad + 1 };
    let lo = lo_rad.sqrt();
    let hi = hi_rad.sqrt() + 1;
    RealEnclosure::new(from_fixed(lo, w), from_fixed(hi, w))
}

/// Enclosure of `sin x` of width ≤ `2^{-k}` for `|x| ≤ 16`.
pub(crate) fn sin_point(x: &Dyadic, k: u32) -> RealEnclosure {
    trig_point(x, k, true)
}

/// Enclosure of `cos x` of width ≤ `2^{-k}` for `|x| ≤ 16`.
pub(crate) fn cos_point(x: &Dyadic, k: u32) -> RealEnclosure {
    trig_point(x, k, false)
}

fn trig_point(x: &Dyadic, k: u32, is_sin: bool) -> RealEnclosure {
    let a = x.abs();
    assert!(
        a <= Dyadic::from_int(16),
        "trig argument out of supported range: {x}"
    );
    // Terms peak near |x|^9/9! < 2^13 for |x| ≤ 16; 32 headroom bits cover it.
    let mut w = k + 48;
    loop {
        let enc = trig_attempt(&a, w, is_sin);
        if enc.width() <= Dyadic::one_half_pow(k) {
            // sin is odd, cos is even.
            if is_sin && x.is_negative() {
                return enc.neg();
            }
            return enc;
        }
        w = w * 2 + 64;
        assert!(w < 1 << 22, "trig enclosure did not converge");
    }
}

fn trig_attempt(a: &Dyadic, w: u32, is_sin: bool) -> RealEnclosure {
    let s = BigInt::one() << w as usize;
    let m_lo = fixed_floor(a, w);
    let m_hi = if fixed_is_exact(a, w) { m_lo.clone() } else { &m_lo + 1 };

    // Term magnitudes: sin: a, a³/3!, a⁵/5!, …  cos: 1, a²/2!, a⁴/4!, …
    let (mut u_lo, mut u_hi) = if is_sin {
        (m_lo.clone(), m_hi.clone())
    } else {
        (s.clone(), s.clone())
    };
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    let mut positive = true;
    let mut j: u64 = 0;
    loop {
        if positive {
            sum_lo += &u_lo;
            sum_hi += &u_hi;
        } else {
            sum_lo -= &u_hi;
            sum_hi -= &u_lo;
        }
        j += 1;
        let d = if is_sin {
            BigInt::from((2 * j) * (2 * j + 1))
        } else {
            BigInt::from((2 * j - 1) * (2 * j))
        };
        u_lo = (&u_lo * &m_lo).div_floor(&s);
        u_lo = ((&u_lo * &m_lo).div_floor(&s)).div_floor(&d);
        u_hi = Integer::div_ceil(&(&u_hi * &m_hi), &s);
        u_hi = Integer::div_ceil(&Integer::div_ceil(&(&u_hi * &m_hi), &s), &d);
        positive = !positive;
        // Once past j=12 the term ratio a²/((2j)(2j+1)) is ≤ 1/2 for a ≤ 16,
        // so a ≤ 8-ulp bracket bounds the tail by 16 ulp.
        if j >= 12 && u_hi <= BigInt::from(8) {
            break;
        }
        assert!(j < 100_000, "trig series failed to terminate");
    }
    sum_lo -= BigInt::from(32);
    sum_hi += BigInt::from(32);
    // Clamp to [−1, 1].
    if sum_lo < -&s {
        sum_lo = -&s;
    }
    if sum_hi > s {
        sum_hi = s.clone();
    }
    RealEnclosure::new(from_fixed(sum_lo, w), from_fixed(sum_hi, w))
}

static PI_CACHE: Mutex<Option<RealEnclosure>> = Mutex::new(None);
static LN2_CACHE: Mutex<Option<RealEnclosure>> = Mutex::new(None);

/// Enclosure of π of width ≤ `2^{-k}` (Machin's formula, cached).
pub fn pi_enclosure(k: u32) -> RealEnclosure {
    if let Some(c) = PI_CACHE.lock().unwrap().as_ref() {
        if c.width() <= Dyadic::one_half_pow(k) {
            return c.clone();
        }
    }
    let w = k + 24;
    // π = 16·atan(1/5) − 4·atan(1/239).
    let a5 = atan_inv_fixed(5, w);
    let a239 = atan_inv_fixed(239, w);
    let pi = a5.to_real().mul_int(16).sub(&a239.to_real().mul_int(4));
    assert!(pi.width() <= Dyadic::one_half_pow(k));
    let mut slot = PI_CACHE.lock().unwrap();
    let merged = match slot.as_ref() {
        Some(best) => best.intersect(&pi).expect("pi enclosures must nest"),
        None => pi,
    };
    *slot = Some(merged.clone());
    merged
}

/// Enclosure of ln 2 of width ≤ `2^{-k}` (2·atanh(1/3), cached).
pub fn ln2_enclosure(k: u32) -> RealEnclosure {
    if let Some(c) = LN2_CACHE.lock().unwrap().as_ref() {
        if c.width() <= Dyadic::one_half_pow(k) {
            return c.clone();
        }
    }
    let w = k + 24;
    let s = BigInt::one() << w as usize;
    let three = BigInt::from(3);
    let t_lo = s.div_floor(&three);
    let t_hi = Integer::div_ceil(&s, &three);
    let ln2 = atanh_series(&t_lo, &t_hi, w).mul_pow2_enclosure(1);
    assert!(ln2.width() <= Dyadic::one_half_pow(k));
    let mut slot = LN2_CACHE.lock().unwrap();
    let merged = match slot.as_ref() {
        Some(best) => best.intersect(&ln2).expect("ln2 enclosures must nest"),
        None => ln2,
    };
    *slot = Some(merged.clone());
    merged
}

/// Interval atan(1/q) in fixed point (alternating series, directed rounding).
fn atan_inv_fixed(q: u64, w: u32) -> FixedEnclosure {
    let s = BigInt::one() << w as usize;
    let q2 = BigInt::from(q * q);
    let mut pow = BigInt::from(q); // q^{2j+1}
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    let mut positive = true;
    let mut j: u64 = 0;
    loop {
        let d = &pow * BigInt::from(2 * j + 1);
        let t_lo = s.div_floor(&d);
        let t_hi = Integer::div_ceil(&s, &d);
        if positive {
            sum_lo += &t_lo;
            sum_hi += &t_hi;
        } else {
            sum_lo -= &t_hi;
            sum_hi -= &t_lo;
        }
        if t_hi <= BigInt::from(8) {
            break;
        }
        pow *= &q2;
        positive = !positive;
        j += 1;
        assert!(j < 100_000, "atan series failed to terminate");
    }
    // Alternating series with sharply decreasing terms: tail ≤ first omitted
    // term ≤ 8 ulp (plus rounding pad).
    sum_lo -= BigInt::from(32);
    sum_hi += BigInt::from(32);
    FixedEnclosure { lo: sum_lo, hi: sum_hi, w }
}

static PI_REAL: OnceLock<Real> = OnceLock::new();
static LN2_REAL: OnceLock<Real> = OnceLock::new();

/// π as a shared computable-real handle.
pub fn pi_real() -> Real {
    PI_REAL.get_or_init(|| Real::from_fn(pi_enclosure)).clone()
}

/// ln 2 as a shared computable-real handle.
pub fn ln2_real() -> Real {
    LN2_REAL.get_or_init(|| Real::from_fn(ln2_enclosure)).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_contains(e: &RealEnclosure, val: f64, k: u32) {
        let lo = e.lo().to_f64();
        let hi = e.hi().to_f64();
        assert!(
            lo - 1e-13 <= val && val <= hi + 1e-13,
            "value {val} outside enclosure [{lo}, {hi}]"
        );
        assert!(
            e.width() <= Dyadic::one_half_pow(k),
            "width {} exceeds 2^-{k}",
            e.width()
        );
    }

    #[test]
    fn exp_kernel_brackets_known_values() {
        assert_contains(&exp_point(&Dyadic::one(), 60), std::f64::consts::E, 60);
        assert_contains(&exp_point(&Dyadic::from_int(-1), 60), 1.0 / std::f64::consts::E, 60);
        assert_contains(
            &exp_point(&Dyadic::new(BigInt::from(-1), -1), 60),
            0.606_530_659_712_633_4,
            60,
        );
        assert_contains(&exp_point(&Dyadic::zero(), 60), 1.0, 60);
        // Large negative argument (normal-tail scale).
        let e = exp_point(&Dyadic::new(BigInt::from(-81), -1), 80);
        assert!(e.hi().to_f64() < 3e-18 && !e.lo().is_negative());
    }

    #[test]
    fn ln_kernel_brackets_known_values() {
        assert_contains(&ln_point(&Dyadic::from_int(2), 60), std::f64::consts::LN_2, 60);
        assert_contains(&ln_point(&Dyadic::one(), 60), 0.0, 60);
        assert_contains(&ln_point(&Dyadic::from_int(10), 60), std::f64::consts::LN_10, 60);
        assert_contains(
            &ln_point(&Dyadic::new(BigInt::from(3), -2), 60),
            (0.75f64).ln(),
            60,
        );
    }

    #[test]
    fn sqrt_kernel_brackets_known_values() {
        assert_contains(&sqrt_point(&Dyadic::from_int(2), 60), std::f64::consts::SQRT_2, 60);
        assert_contains(&sqrt_point(&Dyadic::from_int(9), 60), 3.0, 60);
        assert_contains(&sqrt_point(&Dyadic::zero(), 60), 0.0, 60);
    }

    #[test]
    fn trig_kernels_bracket_known_values() {
        assert_contains(&sin_point(&Dyadic::one(), 60), 1f64.sin(), 60);
        assert_contains(&cos_point(&Dyadic::one(), 60), 1f64.cos(), 60);
        assert_contains(&sin_point(&Dyadic::from_int(6), 60), 6f64.sin(), 60);
        assert_contains(&cos_point(&Dyadic::from_int(6), 60), 6f64.cos(), 60);
        assert_contains(&sin_point(&Dyadic::from_int(-1), 60), (-1f64).sin(), 60);
        assert_contains(&sin_point(&Dyadic::zero(), 60), 0.0, 60);
        assert_contains(&cos_point(&Dyadic::zero(), 60), 1.0, 60);
    }

    #[test]
    fn pi_and_ln2_enclosures() {
        assert_contains(&pi_enclosure(80), std::f64::consts::PI, 80);
        assert_contains(&ln2_enclosure(80), std::f64::consts::LN_2, 80);
    }

    #[test]
    fn real_handles_compose_and_nest() {
        // 1 − e^{−1/2} = 0.3934693402873666
        let half = Dyadic::new(BigInt::from(-1), -1);
        let v = Real::constant(Dyadic::one()).sub(&Real::constant(half).exp());
        let coarse = v.enclose(10);
        let fine = v.enclose(40);
        assert_contains(&coarse, 0.393_469_340_287_366_6, 10);
        assert_contains(&fine, 0.393_469_340_287_366_6, 40);
        // Nesting: the fine enclosure lies inside the coarse one.
        assert!(coarse.lo() <= fine.lo() && fine.hi() <= coarse.hi());
    }

    #[test]
    fn real_rational_and_division() {
        let third = Real::from_ratio(BigInt::from(1), BigInt::from(3));
        assert_contains(&third.enclose(50), 1.0 / 3.0, 50);
        let x = Real::constant(Dyadic::from_int(2)).div(&Real::constant(Dyadic::from_int(3)));
        assert_contains(&x.enclose(50), 2.0 / 3.0, 50);
        // log2(e) = 1/ln2 = 1.4426950408889634
        let log2e = Real::constant(Dyadic::one()).div(&ln2_real());
        assert_contains(&log2e.enclose(60), std::f64::consts::LOG2_E, 60);
    }

    #[test]
    fn real_log2_sqrt_composition() {
        // log2(sqrt(2)) = 1/2 exactly.
        let v = Real::constant(Dyadic::from_int(2)).sqrt().log2();
        let e = v.enclose(40);
        assert!(e.contains_dyadic(&Dyadic::one_half_pow(1)));
        assert_contains(&e, 0.5, 40);
    }

    #[test]
    fn compare_dyadic_decides_and_reports_budget() {
        let third = Real::from_ratio(BigInt::from(1), BigInt::from(3));
        assert_eq!(
            third.compare_dyadic(&Dyadic::one_half_pow(1), 256),
            Ok(Ordering::Less)
        );
        assert_eq!(
            third.compare_dyadic(&Dyadic::one_half_pow(2), 256),
            Ok(Ordering::Greater)
        );
        // Equal values can never separate: budget error.
        let half = Real::constant(Dyadic::one_half_pow(1));
        assert!(half.compare_dyadic(&Dyadic::one_half_pow(1), 64).is_err());
    }

    #[test]
    fn interval_inside_spec_cases() {
        // [0,1/16) vs cell [0, 2/32): inside.
        let mut i = DyadicInterval::unit();
        for _ in 0..4 {
            i.refine_mut(0);
        }
        let cell_lo = RealEnclosure::point(Dyadic::zero());
        let cell_hi = RealEnclosure::point(Dyadic::new(BigInt::from(2), -5));
        assert_eq!(interval_inside(&i, &cell_lo, &cell_hi), TriState::Inside);

        // [0,1) vs cell [0,1): inside (equal intervals).
        let u = DyadicInterval::unit();
        let one = RealEnclosure::point(Dyadic::one());
        assert_eq!(interval_inside(&u, &cell_lo, &one), TriState::Inside);

        // [1/2,3/4) vs cell [0, 1−e^{-1}): undecided at coarse precision and
        // never inside (3/4 > 0.6321…), but also never provably outside.
        let mut j = DyadicInterval::unit();
        j.refine_mut(1);
        j.refine_mut(0);
        let q = Real::constant(Dyadic::one()).sub(&Real::constant(Dyadic::from_int(-1)).exp());
        let coarse = q.enclose(2);
        assert_eq!(
            interval_inside(&j, &cell_lo, &coarse),
            TriState::Undecided
        );
        let fine = q.enclose(40);
        assert_ne!(interval_inside(&j, &cell_lo, &fine), TriState::Inside);
        // Refinement proves "not inside": the cell's upper endpoint is
        // strictly below the interval's upper endpoint.
        assert!(fine.hi() < &j.hi_dyadic());
    }

    #[test]
    #[should_panic(expected = "nesting contract")]
    fn broken_nesting_is_detected() {
        // A bogus handle that returns disjoint enclosures at different k.
        let bad = Real::from_fn(|k| {
            if k <= 8 {
                RealEnclosure::new(Dyadic::zero(), Dyadic::one_half_pow(k))
            } else {
                RealEnclosure::new(Dyadic::from_int(5), Dyadic::from_int(5))
            }
        });
        let _ = bad.enclose(4);
        let _ = bad.enclose(30);
    }
}
