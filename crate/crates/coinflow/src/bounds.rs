//! Information-theoretic bounds on the bit cost of ε-accurate sampling.
//!
//! For a target density `f` on `ℝ^d` and accuracy ε in a norm `‖·‖_p`, any
//! sampler that outputs a value within ε of a variate distributed by `f`
//! must consume, on average, at least
//!
//! ```text
//! 𝓔(f) + d·log2(1/ε) − log2 V_{d,p}
//! ```
//!
//! bits, where `𝓔(f)` is the differential entropy of `f` in bits and
//! `V_{d,p}` is the volume of the unit `ℓ_p` ball. Conversely, partitioning
//! space into cells of diameter ≤ 2ε and sampling the cell law exactly costs
//! at most the cell-law entropy plus the sampler's additive constant, which
//! pins the optimal cost into an interval of width independent of ε.
//!
//! This module provides both sides:
//!
//! * [`unit_ball_volume`] — `V_{d,p}`, exactly (enclosure-backed) for
//!   `p ∈ {1, 2, ∞}` and via a log-gamma evaluation with generous padding
//!   for other `p`;
//! * [`diff_entropy_bits`] — a small catalog of differential entropies as
//!   computable reals;
//! * [`exponential_partition_entropy_bits`] — the exact entropy of the
//!   width-`h` cell law of the unit exponential, whose gap over
//!   `𝓔 + log2(1/h)` is nonnegative and shrinks as `h → 0`;
//! * [`lower_bound_bits`], [`partition_upper_bound`], [`bound_gap`] — the
//!   assembled two-sided bounds.
//!
//! The certified quantities (volumes for exact norms, catalog entropies,
//! partition entropies) are enclosure-backed; the assembled bound formulas
//! combine their midpoints in `f64`, whose rounding is far below every
//! tolerance used by the benchmark harness.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::exact::dyadic::Dyadic;
use crate::exact::real::{ln2_real, pi_real, Real, RealEnclosure};
use crate::extract::SamplerAlg;

/// Which norm the accuracy ε is measured in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// The `ℓ^p` norm for finite `p ≥ 1`.
    P(f64),
    /// The `ℓ^∞` (max) norm.
    Infinity,
}

/// Volume of the unit `ℓ_p` ball in `ℝ^d`,
/// `V_{d,p} = (2Γ(1/p + 1))^d / Γ(d/p + 1)`.
///
/// Exact (up to the stated enclosure width) for `p ∈ {1, 2, ∞}`:
/// `V_{d,∞} = 2^d`, `V_{d,1} = 2^d/d!`, and `V_{d,2}` is a rational multiple
/// of `π^{⌊d/2⌋}`. Other `p` are evaluated with a double-precision
/// log-gamma and padded by a relative `10^{-9}`, which dominates its error.
pub fn unit_ball_volume(d: u32, norm: Norm) -> RealEnclosure {
    assert!(d >= 1, "dimension must be at least 1");
    const K: u32 = 80;
    match norm {
        Norm::Infinity => RealEnclosure::point(Dyadic::pow2(i64::from(d))),
        Norm::P(p) => {
            assert!(p >= 1.0 && p.is_finite(), "need 1 ≤ p < ∞, got {p}");
            if p == 1.0 {
                Real::from_ratio(BigInt::one() << d, factorial(d)).enclose(K)
            } else if p == 2.0 {
                euclidean_ball_volume(d).enclose(K)
            } else {
                let lg = statrs::function::gamma::ln_gamma;
                let ln_v = f64::from(d) * (std::f64::consts::LN_2 + lg(1.0 / p + 1.0))
                    - lg(f64::from(d) / p + 1.0);
                let v = ln_v.exp();
                let pad = v * 1e-9 + f64::MIN_POSITIVE;
                RealEnclosure::new(
                    Dyadic::from_f64((v - pad).max(0.0)),
                    Dyadic::from_f64(v + pad),
                )
            }
        }
    }
}

fn factorial(d: u32) -> BigInt {
    (1..=u64::from(d)).fold(BigInt::one(), |acc, i| acc * i)
}

/// `V_{d,2}` as a computable real: `π^m/m!` for `d = 2m`,
/// `π^m·2^{m+1}/(2m+1)!!` for `d = 2m+1`.
fn euclidean_ball_volume(d: u32) -> Real {
    let m = d / 2;
    let rational = if d % 2 == 0 {
        Real::from_ratio(BigInt::one(), factorial(m))
    } else {
        let double_fact = (0..=u64::from(m)).fold(BigInt::one(), |acc, i| acc * (2 * i + 1));
        Real::from_ratio(BigInt::one() << (m + 1), double_fact)
    };
    (0..m).fold(rational, |acc, _| acc.mul(&pi_real()))
}

/// `log2` of a positive dyadic, in `f64`, stable for exponents far outside
/// the double range.
pub(crate) fn log2_dyadic(x: &Dyadic) -> f64 {
    assert!(x.is_positive(), "log2 needs a positive value");
    let bits = x.mantissa().bits() as i64;
    let shift = (bits - 53).max(0);
    let top = (x.mantissa() >> shift as usize)
        .to_f64()
        .expect("53-bit mantissa fits f64");
    top.log2() + (shift + x.exponent()) as f64
}

/// `log2` of an enclosure's midpoint, in `f64`.
fn log2_enclosure(v: &RealEnclosure) -> f64 {
    log2_dyadic(&v.midpoint())
}

/// Lower bound, in bits, on the expected cost of sampling any density with
/// differential entropy `diff_entropy_bits` (in bits) on `ℝ^d` to accuracy
/// `eps` in `norm`: `𝓔 + d·log2(1/ε) − log2 V_{d,p}`.
pub fn lower_bound_bits(diff_entropy_bits: f64, d: u32, eps: &Dyadic, norm: Norm) -> f64 {
    assert!(eps.is_positive(), "ε must be positive");
    diff_entropy_bits + f64::from(d) * (-log2_dyadic(eps)) - log2_enclosure(&unit_ball_volume(d, norm))
}

/// The additive constant by which a sampler's expected bit cost can exceed
/// the entropy of the law it draws from: 2 for Knuth–Yao, 3 for Han–Hoshi.
pub fn sampler_overhead(alg: SamplerAlg) -> f64 {
    match alg {
        SamplerAlg::KnuthYao => 2.0,
        SamplerAlg::HanHoshi => 3.0,
    }
}

/// Width of the two-sided bound interval: [`partition_upper_bound`] minus
/// [`lower_bound_bits`]. Independent of ε and of the target density:
/// `C_alg − d + (d/p)·log2 d + log2 V_{d,p}` (the middle term vanishes for
/// `ℓ^∞`). For intervals (`d = 1`) with the Knuth–Yao sampler the gap is
/// exactly 2 bits in every norm.
pub fn bound_gap(d: u32, norm: Norm, alg: SamplerAlg) -> f64 {
    let covering = match norm {
        Norm::Infinity => 0.0,
        Norm::P(p) => f64::from(d) / p * f64::from(d).log2(),
    };
    sampler_overhead(alg) - f64::from(d) + covering + log2_enclosure(&unit_ball_volume(d, norm))
}

/// Upper bound, in bits, achieved by partitioning into cells of `ℓ_p`
/// diameter ≤ 2ε (cubes of side `2ε/d^{1/p}`, or side 2ε for `ℓ^∞`) and
/// sampling the cell law exactly with `alg`.
pub fn partition_upper_bound(
    diff_entropy_bits: f64,
    d: u32,
    eps: &Dyadic,
    norm: Norm,
    alg: SamplerAlg,
) -> f64 {
    lower_bound_bits(diff_entropy_bits, d, eps, norm) + bound_gap(d, norm, alg)
}

/// Laws with catalogued differential entropies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogLaw {
    /// Uniform on `[0, 1]`: entropy 0.
    Uniform,
    /// Unit exponential: entropy `log2 e`.
    Exponential,
    /// Unit exponential conditioned on `[0, 1]`:
    /// `log2(e−1) − log2(e)/(e−1)`.
    TruncatedExponential,
    /// The density `x·e^{−x²/2}` on `[0, ∞)` (the radius of a standard
    /// normal pair): `(1 + γ/2)·log2 e − 1/2`.
    Maxwell,
    /// Standard normal: `log2 √(2πe)`.
    StdNormal,
}

/// The Euler–Mascheroni constant γ, embedded as a 100-bit dyadic constant.
///
/// Enclosures built on this handle are exact for the embedded constant; its
/// distance to γ is below `2^{-100}`, which is negligible at every tolerance
/// used in this crate.
pub fn euler_gamma() -> Real {
    static GAMMA: OnceLock<Real> = OnceLock::new();
    GAMMA
        .get_or_init(|| {
            let mant = BigInt::parse_bytes(b"731707784073564657402559854608", 10)
                .expect("literal parses");
            Real::constant(Dyadic::new(mant, -100))
        })
        .clone()
}

/// Differential entropy of a catalog law, in bits, as a computable real.
pub fn diff_entropy_bits(law: CatalogLaw) -> Real {
    let one = || Real::constant(Dyadic::one());
    match law {
        CatalogLaw::Uniform => Real::constant(Dyadic::zero()),
        CatalogLaw::Exponential => one().div(&ln2_real()),
        CatalogLaw::TruncatedExponential => {
            // [ln(e−1) − 1/(e−1)] / ln 2
            let em1 = one().exp().add_dyadic(&Dyadic::from_int(-1));
            em1.ln().sub(&one().div(&em1)).div(&ln2_real())
        }
        CatalogLaw::Maxwell => {
            // (1 + γ/2)/ln 2 − 1/2
            let half = Dyadic::one_half_pow(1);
            euler_gamma()
                .mul_dyadic(&half)
                .add_dyadic(&Dyadic::one())
                .div(&ln2_real())
                .add_dyadic(&half.neg())
        }
        CatalogLaw::StdNormal => {
            // (ln 2 + ln π + 1) / (2 ln 2)
            ln2_real()
                .add(&pi_real().ln())
                .add_dyadic(&Dyadic::one())
                .div(&ln2_real().mul_dyadic(&Dyadic::from_int(2)))
        }
    }
}

/// Differential entropy of the law scaled by `a > 0` (the density
/// `f(x/a)/a`): `𝓔 + log2 a`.
pub fn scale_entropy_bits(base: &Real, a: &Dyadic) -> Real {
    assert!(a.is_positive(), "scale must be positive");
    base.add(&Real::constant(a.clone()).log2())
}

/// Entropy, in bits, of the cell law `P(cell i) = e^{−ih}(1 − e^{−h})` of
/// the unit exponential partitioned into width-`h` cells `[ih, (i+1)h)`.
///
/// Closed form: `−log2(1 − e^{−h}) + log2(e)·h·e^{−h}/(1 − e^{−h})`. The
/// excess over the density bound `𝓔 + log2(1/h) = log2(e) + log2(1/h)` is
/// nonnegative for every `h` and decreases to 0 as `h → 0`.
pub fn exponential_partition_entropy_bits(h: &Dyadic) -> Real {
    assert!(h.is_positive(), "cell width must be positive");
    let x = Real::constant(h.neg()).exp(); // e^{-h}
    let one_minus = Real::constant(Dyadic::one()).sub(&x);
    let nats = one_minus.ln().neg().add(&x.div(&one_minus).mul_dyadic(h));
    nats.div(&ln2_real())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::real::pi_enclosure;

    const LOG2_E: f64 = std::f64::consts::LOG2_E;

    fn mid_f64(e: &RealEnclosure) -> f64 {
        e.midpoint().to_f64()
    }

    #[test]
    fn volumes_match_known_values() {
        for d in 1..=6u32 {
            let v = unit_ball_volume(d, Norm::Infinity);
            assert_eq!(v.lo(), v.hi());
            assert_eq!(v.lo(), &Dyadic::pow2(i64::from(d)));
        }
        // d = 1 gives the interval [−1, 1] in every norm.
        for norm in [Norm::P(1.0), Norm::P(2.0), Norm::P(1.7), Norm::Infinity] {
            let v = mid_f64(&unit_ball_volume(1, norm));
            assert!((v - 2.0).abs() < 1e-9, "V(1, {norm:?}) = {v}");
        }
        // Euclidean balls: V_{2,2} = π, V_{3,2} = 4π/3.
        let v22 = unit_ball_volume(2, Norm::P(2.0));
        let pi = pi_enclosure(70);
        assert!((mid_f64(&v22) - mid_f64(&pi)).abs() < 1e-15);
        assert!(v22.width().to_f64() < 1e-20);
        let v32 = mid_f64(&unit_ball_volume(3, Norm::P(2.0)));
        assert!((v32 - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        // Cross-slice: V_{3,1} = 2³/3! = 4/3.
        let v31 = mid_f64(&unit_ball_volume(3, Norm::P(1.0)));
        assert!((v31 - 4.0 / 3.0).abs() < 1e-12);
        // The log-gamma path agrees with the exact path as p → 2.
        let general = mid_f64(&unit_ball_volume(4, Norm::P(2.0 + 1e-9)));
        let exact = mid_f64(&unit_ball_volume(4, Norm::P(2.0)));
        assert!((general - exact).abs() / exact < 1e-6);
    }

    #[test]
    fn euclidean_volumes_satisfy_the_dimension_recursion() {
        // V_d = V_{d−2} · 2π/d.
        for d in 3..=8u32 {
            let vd = mid_f64(&unit_ball_volume(d, Norm::P(2.0)));
            let vd2 = mid_f64(&unit_ball_volume(d - 2, Norm::P(2.0)));
            let ratio = vd / vd2;
            let expect = 2.0 * std::f64::consts::PI / f64::from(d);
            assert!((ratio - expect).abs() < 1e-12, "d = {d}");
        }
    }

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        assert!(n % 2 == 0);
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + h * i as f64;
            s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn neg_f_log2_f(f: f64) -> f64 {
        if f <= 0.0 {
            0.0
        } else {
            -f * f.log2()
        }
    }

    #[test]
    fn catalog_matches_quadrature() {
        assert_eq!(diff_entropy_bits(CatalogLaw::Uniform).to_f64(40), 0.0);

        let cases: Vec<(CatalogLaw, Box<dyn Fn(f64) -> f64>, f64, f64, usize)> = vec![
            (
                CatalogLaw::Exponential,
                Box::new(|x: f64| (-x).exp()),
                0.0,
                60.0,
                60_000,
            ),
            (
                CatalogLaw::TruncatedExponential,
                Box::new(|x: f64| (-x).exp() / (1.0 - (-1.0f64).exp())),
                0.0,
                1.0,
                20_000,
            ),
            (
                CatalogLaw::Maxwell,
                Box::new(|x: f64| x * (-x * x / 2.0).exp()),
                0.0,
                14.0,
                70_000,
            ),
            (
                CatalogLaw::StdNormal,
                Box::new(|x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()),
                -12.0,
                12.0,
                60_000,
            ),
        ];
        for (law, density, a, b, n) in cases {
            let numeric = simpson(&|x| neg_f_log2_f(density(x)), a, b, n);
            let exact = diff_entropy_bits(law).to_f64(60);
            assert!(
                (numeric - exact).abs() < 1e-6,
                "{law:?}: quadrature {numeric} vs catalog {exact}"
            );
        }
        // Spot values.
        let exp = diff_entropy_bits(CatalogLaw::Exponential).to_f64(60);
        assert!((exp - LOG2_E).abs() < 1e-12);
        let norm = diff_entropy_bits(CatalogLaw::StdNormal).to_f64(60);
        assert!((norm - 2.047095585180641).abs() < 1e-12);
        let maxw = diff_entropy_bits(CatalogLaw::Maxwell).to_f64(60);
        assert!((maxw - 1.3590685).abs() < 1e-6);
        let trunc = diff_entropy_bits(CatalogLaw::TruncatedExponential).to_f64(60);
        assert!((trunc + 0.0586482256532711).abs() < 1e-12);
    }

    #[test]
    fn scaling_shifts_entropy_by_log2_of_the_scale() {
        let base = diff_entropy_bits(CatalogLaw::Exponential);
        let scaled = scale_entropy_bits(&base, &Dyadic::from_int(4));
        assert!((scaled.to_f64(50) - (LOG2_E + 2.0)).abs() < 1e-10);
        let shrunk = scale_entropy_bits(&base, &Dyadic::one_half_pow(3));
        assert!((shrunk.to_f64(50) - (LOG2_E - 3.0)).abs() < 1e-10);
    }

    #[test]
    fn partition_entropy_closed_form_matches_direct_sum() {
        let h = Dyadic::new(BigInt::from(1), -4); // 1/16
        let closed = exponential_partition_entropy_bits(&h).to_f64(60);
        let hf: f64 = 1.0 / 16.0;
        let q = (-hf).exp();
        let mut direct = 0.0;
        let mut p = 1.0 - q;
        while p > 1e-30 {
            direct += neg_f_log2_f(p);
            p *= q;
        }
        assert!((closed - direct).abs() < 1e-10, "{closed} vs {direct}");
    }

    #[test]
    fn partition_entropy_dominates_the_density_bound_and_converges() {
        // H_h ≥ 𝓔 + log2(1/h), with the excess shrinking monotonically.
        let mut last_gap = f64::INFINITY;
        for k in 4..=12u32 {
            let h = Dyadic::one_half_pow(k);
            let hh = exponential_partition_entropy_bits(&h).to_f64(60);
            let gap = hh - (LOG2_E + f64::from(k));
            assert!(gap > -1e-12, "k = {k}: gap {gap}");
            assert!(gap < last_gap, "k = {k}: gap {gap} vs previous {last_gap}");
            last_gap = gap;
        }
        assert!(last_gap < 1e-6);
    }

    #[test]
    fn assembled_bounds_and_gap() {
        // Intervals with Knuth–Yao: the two-sided window is exactly 2 bits.
        for norm in [Norm::P(1.0), Norm::P(2.0), Norm::Infinity] {
            let gap = bound_gap(1, norm, SamplerAlg::KnuthYao);
            assert!((gap - 2.0).abs() < 1e-9, "{norm:?}: {gap}");
            let gap_hh = bound_gap(1, norm, SamplerAlg::HanHoshi);
            assert!((gap_hh - 3.0).abs() < 1e-9);
        }
        // Exponential at ε = 2^{-12}: lower = log2 e + 12 − 1.
        let eps = Dyadic::one_half_pow(12);
        let lower = lower_bound_bits(LOG2_E, 1, &eps, Norm::P(2.0));
        assert!((lower - (LOG2_E + 11.0)).abs() < 1e-9);
        let upper = partition_upper_bound(LOG2_E, 1, &eps, Norm::P(2.0), SamplerAlg::KnuthYao);
        assert!((upper - (LOG2_E + 13.0)).abs() < 1e-9);
        // log2(1/ε) handles exponents far beyond f64 range.
        let tiny = Dyadic::one_half_pow(5000);
        let lb = lower_bound_bits(0.0, 1, &tiny, Norm::Infinity);
        assert!((lb - 4999.0).abs() < 1e-6);
    }
}
