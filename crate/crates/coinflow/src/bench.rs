//! Reproducible measurement harness: the typed engine behind the `coinflow`
//! command line.
//!
//! The harness turns the library's samplers and extractors into seeded
//! experiments with machine-checkable outcomes:
//!
//! * [`LawSpec`] and [`MethodSpec`] name a target law and a sampling
//!   strategy, with the string parsers the CLI uses;
//! * [`run_bench`] measures the mean fresh-bit cost over seeded trials and
//!   compares it against the reference [`cost_band`] for that law/method
//!   pair;
//! * [`run_samples`] draws individual values — optionally replaying a fixed
//!   bit tape — for inspection;
//! * [`run_extract_test`] pipes a sampler's exit leaves through the joint
//!   extractor and applies monobit and runs tests to the recovered bits;
//! * [`run_batch_bench`] measures the recycling pipeline's fresh-bit rate
//!   against the law's Shannon entropy;
//! * [`run_bounds_row`] tabulates the information-theoretic cost bounds.
//!
//! # Determinism
//!
//! Trial `i` draws its bits from `SeededSource::from_seed(split_seed(seed, i))`,
//! trials are reduced in index order, and every report field except the
//! wall-clock `seconds` column is a pure function of the request — so
//! repeated runs are byte-identical there, regardless of thread count.
//!
//! # Bands
//!
//! [`cost_band`] combines proven components (the information lower bound
//! `d·log2(1/ε) + 𝓔 − log2 V`, the Knuth–Yao `+2` / Han–Hoshi `+3` discrete
//! overheads, exact per-digit Bernoulli costs) with small calibrated slack
//! constants for the stopping overshoot of interval inversion. A `pass`
//! verdict means the observed mean lies inside the band widened by three
//! standard errors.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    self, bound_gap, diff_entropy_bits, exponential_partition_entropy_bits, lower_bound_bits,
    unit_ball_volume, CatalogLaw, Norm,
};
use crate::continuous::{
    exp_sample, invert_eps, maxwell_sample, normal_pair, partition_sample_1d,
    truncated_exp_sample, uniform_sample, ExpRoute, QuantileOracle,
};
use crate::discrete::{entropy_discrete, hh_sample, ky_sample, DiscreteDistribution};
use crate::exact::Dyadic;
use crate::extract::{batch_generate, extract_stream, extractor_output_tests, SamplerAlg};
use crate::source::{split_seed, BitSource, ReplaySource, SeededSource};

/// Depth cap handed to the extraction model builders by the harness. Dyadic
/// laws with atoms no finer than `2^{-64}` build; anything else is reported
/// as a configuration error.
pub const EXTRACT_DEPTH_CAP: u32 = 64;

// ---------------------------------------------------------------------------
// String parsers shared with the CLI
// ---------------------------------------------------------------------------

/// Parse an accuracy parameter.
///
/// Accepted forms, all denoting an exact dyadic value:
///
/// * `a/2^k` — e.g. `1/2^12`, `3/2^5`;
/// * `a/b` with `b` a power of two — e.g. `1/16`;
/// * a decimal — e.g. `0.25`; converted via the nearest `f64`, which is a
///   dyadic rational and exact from then on;
/// * a plain integer — e.g. `1`.
///
/// The value must be strictly positive.
pub fn parse_eps(text: &str) -> Result<Dyadic, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty accuracy value".into());
    }
    let value = if let Some((num, den)) = s.split_once('/') {
        let a: u64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in `{s}`"))?;
        let den = den.trim();
        let k: u32 = if let Some(pow) = den.strip_prefix("2^") {
            pow.parse().map_err(|_| format!("bad exponent in `{s}`"))?
        } else {
            let b: u64 = den.parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if b == 0 || !b.is_power_of_two() {
                return Err(format!(
                    "denominator of `{s}` must be a power of two (use a/2^k or a/b with b = 2^k)"
                ));
            }
            b.trailing_zeros()
        };
        Dyadic::new(a.into(), -i64::from(k))
    } else if s.contains('.') || s.contains('e') || s.contains('E') {
        let v: f64 = s.parse().map_err(|_| format!("bad decimal `{s}`"))?;
        if !v.is_finite() {
            return Err(format!("`{s}` is not a finite value"));
        }
        Dyadic::from_f64(v)
    } else {
        let a: u64 = s.parse().map_err(|_| format!("bad accuracy `{s}`"))?;
        Dyadic::new(a.into(), 0)
    };
    if value.is_positive() {
        Ok(value)
    } else {
        Err(format!("accuracy must be strictly positive, got `{s}`"))
    }
}

/// Canonical display for an accuracy column: `m/2^k` with odd `m` (or an
/// integer when the value has no fractional part).
pub fn eps_display(eps: &Dyadic) -> String {
    eps.to_string()
}

/// Parse a seed: hexadecimal with a `0x` prefix, or decimal.
pub fn parse_seed(text: &str) -> Result<u64, String> {
    let s = text.trim();
    let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        s.parse()
    };
    parsed.map_err(|_| format!("bad seed `{s}` (decimal or 0x-prefixed hex)"))
}

/// Parse a comma-separated list of positive integers (e.g. `--n 100,1000`).
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let n: u64 = part
            .trim()
            .parse()
            .map_err(|_| format!("bad count `{}`", part.trim()))?;
        if n == 0 {
            return Err("counts must be at least 1".into());
        }
        out.push(n);
    }
    if out.is_empty() {
        return Err("empty count list".into());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Laws
// ---------------------------------------------------------------------------

/// A target law the harness can drive.
#[derive(Debug, Clone)]
pub enum LawSpec {
    /// Uniform on `[0,1)`, sampled to accuracy ε.
    Uniform,
    /// Unit exponential, sampled to accuracy ε by one of four routes.
    Exponential,
    /// Unit exponential conditioned on `[0,1)`, sampled to accuracy ε.
    TruncatedExponential,
    /// Box–Müller radius law (density `x·e^{-x²/2}`), sampled to accuracy ε.
    Maxwell,
    /// A pair of independent standard normals, each to accuracy ε.
    NormalPair,
    /// A discrete law, sampled exactly.
    Discrete {
        /// Display name used in report columns (comma-free).
        name: String,
        /// The law itself.
        dist: DiscreteDistribution,
    },
}

#[derive(Debug, serde::Deserialize)]
struct JsonLaw {
    atoms: Vec<(u64, u64)>,
}

fn parse_atoms(list: &str, what: &str) -> Result<Vec<(u64, u64)>, String> {
    let mut atoms = Vec::new();
    for part in list.split(',') {
        let part = part.trim();
        let (num, den) = part
            .split_once('/')
            .ok_or_else(|| format!("bad {what} atom `{part}` (expected a/b)"))?;
        let a: u64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in atom `{part}`"))?;
        let b: u64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in atom `{part}`"))?;
        atoms.push((a, b));
    }
    Ok(atoms)
}

impl LawSpec {
    /// Parse a law specification:
    ///
    /// * a name — `uniform`, `exponential`, `truncated-exponential`,
    ///   `maxwell`, `normal-pair`, `geometric-1-over-e`;
    /// * `dyadic:a/b,c/d,…` — a finite law whose atoms must all have
    ///   power-of-two denominators (eligible for extraction);
    /// * `discrete:a/b,c/d,…` — a finite law with arbitrary rational atoms;
    /// * a path ending in `.json` — a file `{"atoms": [[num, den], …]}`.
    pub fn parse(text: &str) -> Result<LawSpec, String> {
        let s = text.trim();
        match s {
            "uniform" => return Ok(LawSpec::Uniform),
            "exponential" | "exp" => return Ok(LawSpec::Exponential),
            "truncated-exponential" | "truncated-exp" => {
                return Ok(LawSpec::TruncatedExponential)
            }
            "maxwell" => return Ok(LawSpec::Maxwell),
            "normal-pair" | "normal" => return Ok(LawSpec::NormalPair),
            "geometric-1-over-e" | "geometric" => {
                return Ok(LawSpec::Discrete {
                    name: "geometric-1-over-e".into(),
                    dist: DiscreteDistribution::geometric_one_over_e(),
                })
            }
            _ => {}
        }
        if let Some(list) = s.strip_prefix("dyadic:") {
            let atoms = parse_atoms(list, "dyadic")?;
            for &(_, b) in &atoms {
                if b == 0 || !b.is_power_of_two() {
                    return Err(format!(
                        "`dyadic:` atoms need power-of-two denominators, got /{b} \
                         (use `discrete:` for general rationals)"
                    ));
                }
            }
            let dist = DiscreteDistribution::from_rationals(&atoms).map_err(|e| e.to_string())?;
            return Ok(LawSpec::Discrete {
                name: format!("dyadic:{}", list.trim().replace(',', "+")),
                dist,
            });
        }
        if let Some(list) = s.strip_prefix("discrete:") {
            let atoms = parse_atoms(list, "discrete")?;
            let dist = DiscreteDistribution::from_rationals(&atoms).map_err(|e| e.to_string())?;
            return Ok(LawSpec::Discrete {
                name: format!("discrete:{}", list.trim().replace(',', "+")),
                dist,
            });
        }
        if s.ends_with(".json") {
            let body = std::fs::read_to_string(s).map_err(|e| format!("reading `{s}`: {e}"))?;
            let law: JsonLaw =
                serde_json::from_str(&body).map_err(|e| format!("parsing `{s}`: {e}"))?;
            let dist =
                DiscreteDistribution::from_rationals(&law.atoms).map_err(|e| e.to_string())?;
            let stem = std::path::Path::new(s)
                .file_stem()
                .map(|o| o.to_string_lossy().into_owned())
                .unwrap_or_else(|| s.to_owned());
            return Ok(LawSpec::Discrete {
                name: stem.replace(',', "+"),
                dist,
            });
        }
        Err(format!(
            "unknown law `{s}`; try uniform, exponential, truncated-exponential, maxwell, \
             normal-pair, geometric-1-over-e, dyadic:a/b,…, discrete:a/b,…, or a .json file"
        ))
    }

    /// Display name used in report columns.
    pub fn name(&self) -> &str {
        match self {
            LawSpec::Uniform => "uniform",
            LawSpec::Exponential => "exponential",
            LawSpec::TruncatedExponential => "truncated-exponential",
            LawSpec::Maxwell => "maxwell",
            LawSpec::NormalPair => "normal-pair",
            LawSpec::Discrete { name, .. } => name,
        }
    }

    /// The discrete law, if this spec names one.
    pub fn discrete(&self) -> Option<&DiscreteDistribution> {
        match self {
            LawSpec::Discrete { dist, .. } => Some(dist),
            _ => None,
        }
    }

    /// Whether this law takes an ε-accuracy parameter (continuous laws do;
    /// discrete laws are sampled exactly).
    pub fn needs_eps(&self) -> bool {
        !matches!(self, LawSpec::Discrete { .. })
    }

    /// Output dimension column: `"1"` or `"2"` for continuous laws, `"-"`
    /// for discrete ones.
    pub fn dimension_column(&self) -> &'static str {
        match self {
            LawSpec::NormalPair => "2",
            LawSpec::Discrete { .. } => "-",
            _ => "1",
        }
    }

    /// Accuracy-norm column: `"inf"` (per-coordinate absolute error) for
    /// continuous laws, `"-"` for discrete ones.
    pub fn norm_column(&self) -> &'static str {
        match self {
            LawSpec::Discrete { .. } => "-",
            _ => "inf",
        }
    }
}

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

/// A sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    /// Interval inversion of the quantile function.
    Inversion,
    /// Exponential only: geometric integer part + inversion of the
    /// fractional part.
    SplitInversion,
    /// Digit convolution: one Bernoulli per output digit (plus a geometric
    /// integer part for the unbounded exponential).
    Convolution,
    /// Exponential only: geometric integer part + one Knuth–Yao walk over
    /// the joint law of all fractional digits.
    ConvolutionKy,
    /// Exponential only: Han–Hoshi over the ε-cell partition of the line.
    Partition,
    /// Normal pair only: polar radius/angle synthesis.
    Pair,
    /// Discrete only: Knuth–Yao DDG-tree walk.
    Ky,
    /// Discrete only: Han–Hoshi interval refinement.
    Hh,
}

impl MethodSpec {
    /// Parse a method name as used on the command line.
    pub fn parse(text: &str) -> Result<MethodSpec, String> {
        match text.trim() {
            "inversion" => Ok(MethodSpec::Inversion),
            "split-inversion" => Ok(MethodSpec::SplitInversion),
            "convolution" => Ok(MethodSpec::Convolution),
            "convolution-ky" => Ok(MethodSpec::ConvolutionKy),
            "partition" => Ok(MethodSpec::Partition),
            "pair" => Ok(MethodSpec::Pair),
            "ky" => Ok(MethodSpec::Ky),
            "hh" => Ok(MethodSpec::Hh),
            other => Err(format!(
                "unknown method `{other}`; known: inversion, split-inversion, convolution, \
                 convolution-ky, partition, pair, ky, hh"
            )),
        }
    }

    /// The command-line name.
    pub fn as_str(self) -> &'static str {
        match self {
            MethodSpec::Inversion => "inversion",
            MethodSpec::SplitInversion => "split-inversion",
            MethodSpec::Convolution => "convolution",
            MethodSpec::ConvolutionKy => "convolution-ky",
            MethodSpec::Partition => "partition",
            MethodSpec::Pair => "pair",
            MethodSpec::Ky => "ky",
            MethodSpec::Hh => "hh",
        }
    }
}

/// The methods that apply to a law, in benchmark order.
pub fn methods_for(law: &LawSpec) -> &'static [MethodSpec] {
    match law {
        LawSpec::Uniform | LawSpec::Maxwell => &[MethodSpec::Inversion],
        LawSpec::Exponential => &[
            MethodSpec::Inversion,
            MethodSpec::SplitInversion,
            MethodSpec::Convolution,
            MethodSpec::ConvolutionKy,
            MethodSpec::Partition,
        ],
        LawSpec::TruncatedExponential => &[MethodSpec::Inversion, MethodSpec::Convolution],
        LawSpec::NormalPair => &[MethodSpec::Pair],
        LawSpec::Discrete { .. } => &[MethodSpec::Ky, MethodSpec::Hh],
    }
}

fn ensure_applicable(law: &LawSpec, method: MethodSpec) -> Result<(), String> {
    if methods_for(law).contains(&method) {
        Ok(())
    } else {
        let known: Vec<&str> = methods_for(law).iter().map(|m| m.as_str()).collect();
        Err(format!(
            "method `{}` does not apply to law `{}` (applicable: {})",
            method.as_str(),
            law.name(),
            known.join(", ")
        ))
    }
}

/// Parse a sampler algorithm name (`ky` or `hh`).
pub fn parse_alg(text: &str) -> Result<SamplerAlg, String> {
    match text.trim() {
        "ky" | "knuth-yao" => Ok(SamplerAlg::KnuthYao),
        "hh" | "han-hoshi" => Ok(SamplerAlg::HanHoshi),
        other => Err(format!("unknown algorithm `{other}`; known: ky, hh")),
    }
}

/// The command-line name of a sampler algorithm.
pub fn alg_name(alg: SamplerAlg) -> &'static str {
    match alg {
        SamplerAlg::KnuthYao => "ky",
        SamplerAlg::HanHoshi => "hh",
    }
}

// ---------------------------------------------------------------------------
// One trial
// ---------------------------------------------------------------------------

/// The outcome of a single draw.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    /// Exact rendering of the output (dyadic `m/2^k`, or the 1-based symbol
    /// index for discrete laws; `a|b` for pairs).
    pub display: String,
    /// `f64` approximations of the output coordinates.
    pub approx: Vec<f64>,
    /// Bits consumed from the source.
    pub bits: u64,
}

/// Run one draw of `law` via `method`, reading bits from `src`.
pub fn run_trial<S: BitSource>(
    law: &LawSpec,
    method: MethodSpec,
    eps: Option<&Dyadic>,
    src: &mut S,
) -> Result<TrialOutput, String> {
    ensure_applicable(law, method)?;
    let need_eps = || -> Result<&Dyadic, String> {
        eps.ok_or_else(|| format!("law `{}` needs an --eps accuracy", law.name()))
    };
    let from_sample = |s: crate::continuous::EpsilonSample| TrialOutput {
        display: s.y.to_string(),
        approx: vec![s.y.to_f64()],
        bits: s.bits_used,
    };
    match law {
        LawSpec::Uniform => {
            let s = uniform_sample(need_eps()?, src).map_err(|e| e.to_string())?;
            Ok(from_sample(s))
        }
        LawSpec::Exponential => {
            let eps = need_eps()?;
            match method {
                MethodSpec::Partition => {
                    let s = partition_sample_1d(&QuantileOracle::exponential(), eps, src)
                        .map_err(|e| e.to_string())?;
                    Ok(TrialOutput {
                        display: s.center.to_string(),
                        approx: vec![s.center.to_f64()],
                        bits: s.bits_used,
                    })
                }
                _ => {
                    let route = match method {
                        MethodSpec::Inversion => ExpRoute::Inversion,
                        MethodSpec::SplitInversion => ExpRoute::SplitInversion,
                        MethodSpec::Convolution => ExpRoute::ConvolutionRaw,
                        MethodSpec::ConvolutionKy => ExpRoute::ConvolutionJointKy,
                        _ => unreachable!("checked by ensure_applicable"),
                    };
                    let s = exp_sample(eps, src, route).map_err(|e| e.to_string())?;
                    Ok(from_sample(s))
                }
            }
        }
        LawSpec::TruncatedExponential => {
            let eps = need_eps()?;
            let s = match method {
                MethodSpec::Inversion => {
                    invert_eps(&QuantileOracle::truncated_exponential(), eps, src)
                }
                MethodSpec::Convolution => truncated_exp_sample(eps, src),
                _ => unreachable!("checked by ensure_applicable"),
            }
            .map_err(|e| e.to_string())?;
            Ok(from_sample(s))
        }
        LawSpec::Maxwell => {
            let s = maxwell_sample(need_eps()?, src).map_err(|e| e.to_string())?;
            Ok(from_sample(s))
        }
        LawSpec::NormalPair => {
            let (a, b) = normal_pair(need_eps()?, src).map_err(|e| e.to_string())?;
            Ok(TrialOutput {
                display: format!("{}|{}", a.y, b.y),
                approx: vec![a.y.to_f64(), b.y.to_f64()],
                bits: a.bits_used,
            })
        }
        LawSpec::Discrete { dist, .. } => {
            let out = match method {
                MethodSpec::Ky => ky_sample(dist, src),
                MethodSpec::Hh => hh_sample(dist, src),
                _ => unreachable!("checked by ensure_applicable"),
            }
            .map_err(|e| e.to_string())?;
            Ok(TrialOutput {
                display: out.value.to_string(),
                approx: vec![out.value as f64],
                bits: out.bits_used,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Reference cost bands
// ---------------------------------------------------------------------------

/// A reference interval for the mean fresh-bit cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBand {
    /// Lower edge (information-theoretic, valid for every ε-accurate
    /// sampler of the law).
    pub lower: f64,
    /// Upper edge (per-method: proven components plus calibrated slack for
    /// inversion stopping overshoot).
    pub upper: f64,
}

/// Exact deterministic bit cost of the uniform sampler:
/// `min{t : 2^{-t} ≤ 2ε}`.
pub fn uniform_deterministic_cost(eps: &Dyadic) -> u64 {
    assert!(eps.is_positive(), "ε must be positive");
    let two_eps = eps.mul_pow2(1);
    (-two_eps.floor_log2()).max(0) as u64
}

fn trunc_exp_entropy() -> f64 {
    diff_entropy_bits(CatalogLaw::TruncatedExponential).to_f64(50)
}

fn maxwell_entropy() -> f64 {
    diff_entropy_bits(CatalogLaw::Maxwell).to_f64(50)
}

fn normal_entropy() -> f64 {
    diff_entropy_bits(CatalogLaw::StdNormal).to_f64(50)
}

fn geometric_entropy() -> f64 {
    entropy_discrete(&DiscreteDistribution::geometric_one_over_e()).to_f64(50)
}

/// Number of fractional digits the convolution routes resolve:
/// `max(0, ⌈log2(1/ε)⌉)`.
fn convolution_digits(eps: &Dyadic) -> f64 {
    (-eps.floor_log2()).max(0) as f64
}

/// The reference band for the mean fresh-bit cost of `method` on `law` at
/// accuracy `eps` (ignored by discrete laws).
///
/// Lower edges are theorems: `log2(1/ε) + 𝓔 − 1` per coordinate for
/// ε-accurate continuous samplers, and the Shannon entropy `H` for exact
/// discrete samplers. Upper edges combine proven terms — Knuth–Yao `H + 2`,
/// Han–Hoshi `H + 3`, exactly two bits per convolution digit, partition-cell
/// entropy — with a small calibrated constant where the method's stopping
/// rule overshoots (interval inversion, angle-grid sizing).
pub fn cost_band(
    law: &LawSpec,
    method: MethodSpec,
    eps: Option<&Dyadic>,
) -> Result<CostBand, String> {
    const LOG2_E: f64 = std::f64::consts::LOG2_E;
    ensure_applicable(law, method)?;
    if let LawSpec::Discrete { dist, .. } = law {
        let h = entropy_discrete(dist).to_f64(50);
        let overhead = match method {
            MethodSpec::Ky => 2.0,
            MethodSpec::Hh => 3.0,
            _ => unreachable!("checked by ensure_applicable"),
        };
        return Ok(CostBand {
            lower: h,
            upper: h + overhead,
        });
    }
    let eps = eps.ok_or_else(|| format!("law `{}` needs an --eps accuracy", law.name()))?;
    if !eps.is_positive() {
        return Err("accuracy must be strictly positive".into());
    }
    let k = -bounds::log2_dyadic(eps);
    let kd = convolution_digits(eps);
    let band = match (law, method) {
        (LawSpec::Uniform, MethodSpec::Inversion) => {
            let t = uniform_deterministic_cost(eps) as f64;
            CostBand { lower: t, upper: t }
        }
        (LawSpec::Exponential, m) => {
            let lower = k + LOG2_E - 1.0;
            let upper = match m {
                MethodSpec::Inversion => k + LOG2_E + 0.25,
                MethodSpec::SplitInversion => {
                    k + trunc_exp_entropy() + 0.25 + geometric_entropy() + 3.0
                }
                MethodSpec::Convolution => 2.0 * kd + geometric_entropy() + 3.0,
                MethodSpec::ConvolutionKy => {
                    kd + trunc_exp_entropy() + 2.0 + geometric_entropy() + 3.0
                }
                MethodSpec::Partition => {
                    exponential_partition_entropy_bits(&eps.mul_pow2(1)).to_f64(50) + 3.0
                }
                _ => unreachable!("checked by ensure_applicable"),
            };
            CostBand { lower, upper }
        }
        (LawSpec::TruncatedExponential, m) => {
            let e = trunc_exp_entropy();
            let upper = match m {
                MethodSpec::Inversion => k + e + 0.25,
                MethodSpec::Convolution => 2.0 * kd + 0.5,
                _ => unreachable!("checked by ensure_applicable"),
            };
            CostBand {
                lower: k + e - 1.0,
                upper,
            }
        }
        (LawSpec::Maxwell, MethodSpec::Inversion) => {
            let e = maxwell_entropy();
            CostBand {
                // Information bound; the sampler's own budget is
                // ε/2-accurate inversion after a piece Bernoulli, hence the
                // `k + 1` term plus the split and overshoot slack.
                lower: k + e - 1.0,
                upper: k + 1.0 + e + 2.5,
            }
        }
        (LawSpec::NormalPair, MethodSpec::Pair) => {
            // Lower: two ε-accurate coordinates, the information bound adds.
            // Upper: the polar synthesis reads a Maxwell radius at ε/2 (its
            // band applies at k+1) plus an adaptive angle cell of
            // ⌈log2(2π(R+ε/2)·(64/63)/ε)⌉ bits, bounded via E[R] = √(π/2)
            // and one bit of ceiling slack.
            let radius_upper = (k + 1.0) + 1.0 + maxwell_entropy() + 2.5;
            let angle_upper = k + 2.0 + (64.0 * std::f64::consts::PI / 63.0).log2() + 0.6;
            CostBand {
                lower: 2.0 * k + 2.0 * normal_entropy() - 2.0,
                upper: radius_upper + angle_upper,
            }
        }
        _ => unreachable!("checked by ensure_applicable"),
    };
    Ok(band)
}

// ---------------------------------------------------------------------------
// bench: mean cost vs band
// ---------------------------------------------------------------------------

/// One row of the `bench` report.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    /// Law name.
    pub law: String,
    /// Method name.
    pub method: String,
    /// Output dimension (`"-"` for discrete laws).
    pub d: String,
    /// Accuracy norm (`"-"` for discrete laws).
    pub p: String,
    /// Accuracy (`"-"` for discrete laws).
    pub eps: String,
    /// Number of seeded trials.
    pub trials: u64,
    /// Mean bits per draw.
    #[serde(rename = "mean_T")]
    pub mean_t: f64,
    /// Sample standard deviation of bits per draw.
    #[serde(rename = "std_T")]
    pub std_t: f64,
    /// Reference band, lower edge.
    pub lower: f64,
    /// Reference band, upper edge.
    pub upper: f64,
    /// Whether the mean lies inside the band widened by three standard
    /// errors.
    pub pass: bool,
    /// Wall-clock time for this row.
    pub seconds: f64,
}

/// CSV header for [`BenchRow`] reports.
pub const BENCH_CSV_HEADER: &str = "law,method,d,p,eps,trials,mean_T,std_T,lower,upper,pass,seconds";

/// Measure the mean fresh-bit cost of `method` on `law` over `trials`
/// seeded draws and judge it against [`cost_band`].
///
/// Trial `i` uses an independent source seeded with `split_seed(seed, i)`;
/// the reduction is in trial order, so everything except `seconds` is
/// reproducible bit-for-bit.
pub fn run_bench(
    law: &LawSpec,
    method: MethodSpec,
    eps: Option<&Dyadic>,
    trials: u64,
    seed: u64,
) -> Result<BenchRow, String> {
    if trials == 0 {
        return Err("need at least one trial".into());
    }
    let started = Instant::now();
    let band = cost_band(law, method, eps)?;
    let costs: Result<Vec<f64>, String> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut src = SeededSource::from_seed(split_seed(seed, i));
            run_trial(law, method, eps, &mut src).map(|t| t.bits as f64)
        })
        .collect();
    let costs = costs?;
    let n = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let var = if costs.len() > 1 {
        costs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    let stderr3 = 3.0 * std / n.sqrt();
    let pass = band.lower - stderr3 <= mean && mean <= band.upper + stderr3;
    Ok(BenchRow {
        law: law.name().to_owned(),
        method: method.as_str().to_owned(),
        d: law.dimension_column().to_owned(),
        p: law.norm_column().to_owned(),
        eps: if law.needs_eps() {
            eps_display(eps.expect("checked by cost_band"))
        } else {
            "-".to_owned()
        },
        trials,
        mean_t: mean,
        std_t: std,
        lower: band.lower,
        upper: band.upper,
        pass,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Render bench rows as CSV (header + one line per row).
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{:.3}",
            r.law, r.method, r.d, r.p, r.eps, r.trials, r.mean_t, r.std_t, r.lower, r.upper,
            r.pass, r.seconds
        )
        .expect("writing to a String cannot fail");
    }
    out
}

// ---------------------------------------------------------------------------
// sample: individual draws
// ---------------------------------------------------------------------------

/// One drawn value, for the `sample` report.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    /// Trial index (0-based).
    pub trial: u64,
    /// Exact output (dyadic `m/2^k`, symbol index, or `a|b` pair).
    pub output: String,
    /// `f64` approximation(s), `|`-joined for pairs.
    pub approx: String,
    /// Bits consumed.
    pub bits: u64,
}

/// CSV header for [`SampleRecord`] reports.
pub const SAMPLE_CSV_HEADER: &str = "trial,output,approx,bits";

/// Draw `trials` values of `law` via `method`.
///
/// With `tape: Some(text)` every trial reads sequentially from the one
/// replayed bit tape (deterministic replay; exhausting the tape is an
/// error). Otherwise trial `i` uses a fresh source seeded with
/// `split_seed(seed, i)`.
pub fn run_samples(
    law: &LawSpec,
    method: MethodSpec,
    eps: Option<&Dyadic>,
    trials: u64,
    seed: u64,
    tape: Option<&str>,
) -> Result<Vec<SampleRecord>, String> {
    let mut records = Vec::with_capacity(trials as usize);
    let mut replay: Option<ReplaySource> = match tape {
        Some(text) => Some(ReplaySource::from_tape_str(text).map_err(|e| e.to_string())?),
        None => None,
    };
    for i in 0..trials {
        let out = match replay.as_mut() {
            Some(src) => run_trial(law, method, eps, src)?,
            None => {
                let mut src = SeededSource::from_seed(split_seed(seed, i));
                run_trial(law, method, eps, &mut src)?
            }
        };
        let approx = out
            .approx
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join("|");
        records.push(SampleRecord {
            trial: i,
            output: out.display,
            approx,
            bits: out.bits,
        });
    }
    Ok(records)
}

/// Render sample records as CSV.
pub fn samples_csv(rows: &[SampleRecord]) -> String {
    let mut out = String::from(SAMPLE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{}", r.trial, r.output, r.approx, r.bits)
            .expect("writing to a String cannot fail");
    }
    out
}

// ---------------------------------------------------------------------------
// extract-test: joint extraction + output randomness tests
// ---------------------------------------------------------------------------

/// Report of the `extract-test` command: run a sampler `samples` times,
/// recover bits through the joint extractor, and test them.
#[derive(Debug, Clone, Serialize)]
pub struct ExtractTestReport {
    /// Law name.
    pub law: String,
    /// Sampler algorithm (`ky` or `hh`).
    pub alg: String,
    /// Number of draws.
    pub samples: u64,
    /// Bits consumed from the seeded source.
    pub source_bits: u64,
    /// Bits recovered by the extractor.
    pub output_bits: u64,
    /// Recovered bits per draw (`R_n / n`, converging to the mean cost
    /// `E[T]`).
    pub bits_per_sample: f64,
    /// Ones among the recovered bits.
    pub ones: u64,
    /// Monobit z-score of the recovered bits.
    pub monobit_z: f64,
    /// Number of runs in the recovered bits.
    pub runs: u64,
    /// Wald–Wolfowitz runs-test z-score.
    pub runs_z: f64,
    /// Whether both z-scores are below 4 in absolute value.
    pub pass: bool,
}

/// CSV header for [`ExtractTestReport`].
pub const EXTRACT_CSV_HEADER: &str =
    "law,alg,samples,source_bits,output_bits,bits_per_sample,ones,monobit_z,runs,runs_z,pass";

/// Run the joint-extraction randomness test on a dyadic discrete law.
pub fn run_extract_test(
    law: &LawSpec,
    alg: SamplerAlg,
    samples: u64,
    seed: u64,
) -> Result<ExtractTestReport, String> {
    let dist = law
        .discrete()
        .ok_or_else(|| format!("law `{}` is not discrete; extraction needs a dyadic discrete law", law.name()))?;
    let mut src = SeededSource::from_seed(seed);
    let bits = extract_stream(dist, alg, samples as usize, &mut src, EXTRACT_DEPTH_CAP)
        .map_err(|e| e.to_string())?;
    let source_bits = src.consumed();
    let report = extractor_output_tests(&bits).map_err(|e| e.to_string())?;
    let pass = report.monobit_z.abs() < 4.0 && report.runs_z.abs() < 4.0;
    Ok(ExtractTestReport {
        law: law.name().to_owned(),
        alg: alg_name(alg).to_owned(),
        samples,
        source_bits,
        output_bits: bits.len() as u64,
        bits_per_sample: bits.len() as f64 / samples as f64,
        ones: report.ones,
        monobit_z: report.monobit_z,
        runs: report.runs,
        runs_z: report.runs_z,
        pass,
    })
}

/// Render an extract-test report as CSV.
pub fn extract_csv(r: &ExtractTestReport) -> String {
    let mut out = String::from(EXTRACT_CSV_HEADER);
    out.push('\n');
    writeln!(
        out,
        "{},{},{},{},{},{:.6},{},{:.6},{},{:.6},{}",
        r.law,
        r.alg,
        r.samples,
        r.source_bits,
        r.output_bits,
        r.bits_per_sample,
        r.ones,
        r.monobit_z,
        r.runs,
        r.runs_z,
        r.pass
    )
    .expect("writing to a String cannot fail");
    out
}

// ---------------------------------------------------------------------------
// batch-bench: recycling pipeline rate
// ---------------------------------------------------------------------------

/// One row of the `batch-bench` report.
#[derive(Debug, Clone, Serialize)]
pub struct BatchRow {
    /// Law name.
    pub law: String,
    /// Sampler algorithm.
    pub alg: String,
    /// Number of draws.
    pub n: u64,
    /// Fresh bits drawn from the source (`N_n`).
    pub fresh_bits: u64,
    /// Tape digits served to the samplers (fresh + recycled).
    pub total_bits: u64,
    /// Residual bits held by the carried interval at the end.
    pub carried_bits: u64,
    /// Largest carried-bit count observed after any draw.
    pub max_carried: u64,
    /// `fresh_bits / n` — converges to the law's entropy.
    pub fresh_rate: f64,
    /// The law's Shannon entropy, for comparison.
    pub entropy_bits: f64,
    /// `|fresh_rate − entropy_bits|`; shrinks as `n` grows.
    pub gap: f64,
}

/// CSV header for [`BatchRow`] reports.
pub const BATCH_CSV_HEADER: &str =
    "law,alg,n,fresh_bits,total_bits,carried_bits,max_carried,fresh_rate,entropy_bits,gap";

/// Run the batch recycling pipeline for each `n` in `ns`.
///
/// Row `i` uses a source seeded with `split_seed(seed, i)`, so rows are
/// independent experiments.
pub fn run_batch_bench(
    law: &LawSpec,
    alg: SamplerAlg,
    ns: &[u64],
    seed: u64,
) -> Result<Vec<BatchRow>, String> {
    let dist = law
        .discrete()
        .ok_or_else(|| format!("law `{}` is not discrete; batching needs a dyadic discrete law", law.name()))?;
    let entropy = entropy_discrete(dist).to_f64(50);
    let mut rows = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let src = SeededSource::from_seed(split_seed(seed, i as u64));
        let report = batch_generate(dist, alg, n as usize, src, EXTRACT_DEPTH_CAP)
            .map_err(|e| e.to_string())?;
        let fresh_rate = report.fresh_bits as f64 / n as f64;
        rows.push(BatchRow {
            law: law.name().to_owned(),
            alg: alg_name(alg).to_owned(),
            n,
            fresh_bits: report.fresh_bits,
            total_bits: report.total_bits,
            carried_bits: report.carried_bits,
            max_carried: report.max_carried_bits,
            fresh_rate,
            entropy_bits: entropy,
            gap: (fresh_rate - entropy).abs(),
        });
    }
    Ok(rows)
}

/// Render batch rows as CSV.
pub fn batch_csv(rows: &[BatchRow]) -> String {
    let mut out = String::from(BATCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.law,
            r.alg,
            r.n,
            r.fresh_bits,
            r.total_bits,
            r.carried_bits,
            r.max_carried,
            r.fresh_rate,
            r.entropy_bits,
            r.gap
        )
        .expect("writing to a String cannot fail");
    }
    out
}

// ---------------------------------------------------------------------------
// bounds: information-theoretic cost table
// ---------------------------------------------------------------------------

/// One row of the `bounds` report.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    /// Catalog law name.
    pub law: String,
    /// Dimension.
    pub d: u32,
    /// Accuracy norm (`inf` or a number).
    pub p: String,
    /// Accuracy.
    pub eps: String,
    /// Differential entropy of the `d`-dimensional product law, in bits.
    pub entropy_bits: f64,
    /// Volume of the unit `ℓ_p` ball in dimension `d`.
    pub volume: f64,
    /// Information lower bound on the mean cost, in bits.
    pub lower: f64,
    /// Partition-sampler upper bound, in bits.
    pub upper: f64,
    /// `upper − lower` (independent of ε and of the law).
    pub gap: f64,
}

/// CSV header for [`BoundsRow`] reports.
pub const BOUNDS_CSV_HEADER: &str = "law,d,p,eps,entropy_bits,volume,lower,upper,gap";

/// Parse a catalog law name for the `bounds` command.
pub fn parse_catalog_law(text: &str) -> Result<CatalogLaw, String> {
    match text.trim() {
        "uniform" => Ok(CatalogLaw::Uniform),
        "exponential" | "exp" => Ok(CatalogLaw::Exponential),
        "truncated-exponential" | "truncated-exp" => Ok(CatalogLaw::TruncatedExponential),
        "maxwell" => Ok(CatalogLaw::Maxwell),
        "normal" | "std-normal" => Ok(CatalogLaw::StdNormal),
        other => Err(format!(
            "unknown catalog law `{other}`; known: uniform, exponential, \
             truncated-exponential, maxwell, normal"
        )),
    }
}

/// The catalog name of a law.
pub fn catalog_name(law: CatalogLaw) -> &'static str {
    match law {
        CatalogLaw::Uniform => "uniform",
        CatalogLaw::Exponential => "exponential",
        CatalogLaw::TruncatedExponential => "truncated-exponential",
        CatalogLaw::Maxwell => "maxwell",
        CatalogLaw::StdNormal => "normal",
    }
}

/// Parse an accuracy norm: `inf`/`infinity`, or a positive number `p`.
pub fn parse_norm(text: &str) -> Result<Norm, String> {
    let s = text.trim();
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(Norm::Infinity);
    }
    let p: f64 = s.parse().map_err(|_| format!("bad norm `{s}`"))?;
    if p.is_finite() && p > 0.0 {
        Ok(Norm::P(p))
    } else {
        Err(format!("norm must be positive and finite, got `{s}`"))
    }
}

/// Display form of a norm for the `p` column.
pub fn norm_display(norm: Norm) -> String {
    match norm {
        Norm::Infinity => "inf".to_owned(),
        Norm::P(p) => {
            if p.fract() == 0.0 && p.abs() < 1e15 {
                format!("{}", p as i64)
            } else {
                p.to_string()
            }
        }
    }
}

/// Evaluate the two-sided cost bounds for `d` i.i.d. coordinates of a
/// catalog law at accuracy `eps` in `norm`, with `alg` determining the
/// discrete-sampler overhead inside the upper bound.
pub fn run_bounds_row(
    law: CatalogLaw,
    d: u32,
    norm: Norm,
    eps: &Dyadic,
    alg: SamplerAlg,
) -> BoundsRow {
    let entropy = f64::from(d) * diff_entropy_bits(law).to_f64(60);
    let volume = unit_ball_volume(d, norm).midpoint().to_f64();
    let lower = lower_bound_bits(entropy, d, eps, norm);
    let gap = bound_gap(d, norm, alg);
    BoundsRow {
        law: catalog_name(law).to_owned(),
        d,
        p: norm_display(norm),
        eps: eps_display(eps),
        entropy_bits: entropy,
        volume,
        lower,
        upper: lower + gap,
        gap,
    }
}

/// Render bounds rows as CSV.
pub fn bounds_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::from(BOUNDS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6e},{:.6},{:.6},{:.6}",
            r.law, r.d, r.p, r.eps, r.entropy_bits, r.volume, r.lower, r.upper, r.gap
        )
        .expect("writing to a String cannot fail");
    }
    out
}

// ---------------------------------------------------------------------------
// Kolmogorov–Smirnov distance
// ---------------------------------------------------------------------------

/// One-sample Kolmogorov–Smirnov distance between `samples` and the
/// continuous CDF `cdf`. Sorts `samples` in place.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS distance needs at least one sample");
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let c = cdf(*x);
        d = d.max(c - i as f64 / n).max((i as f64 + 1.0) / n - c);
    }
    d
}
