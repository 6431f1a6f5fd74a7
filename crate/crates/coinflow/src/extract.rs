//! Randomness extraction and bit recycling.
//!
//! An exact discrete sampler consumes fair bits until its exit condition
//! fires. Conditioned on the produced symbol, *which* exit leaf fired is
//! still random — and since every leaf at depth `t` is reached with
//! probability exactly `2^{-t}`, that residual randomness is perfectly
//! dyadic. This module turns it back into fair bits:
//!
//! * [`ConditionalModel`] enumerates the complete leaf set of a sampler on a
//!   *leaf-finite* distribution (every atom resolves within a depth cap) and
//!   organizes it into exact weight tables, both jointly over
//!   `(symbol, leaf)` pairs and conditionally per symbol.
//! * [`ExtractorState`] is a nested-interval extractor: each observed leaf
//!   narrows an exact rational subinterval of `[0, 1)`, and binary digits of
//!   the interval are emitted as soon as they are determined. The emitted
//!   stream is a prefix of the binary expansion of a uniform variate, so the
//!   bits are exactly independent and fair — no statistical approximation.
//! * [`batch_generate`] runs a sampler `n` times while *carrying* the
//!   residual randomness between draws as one exact interval, never as
//!   materialized bits. Tape digits the interval already determines are
//!   served to the next draw for free, so the amortized *fresh*-bit cost
//!   falls from `E[T]` to the entropy `H` of the target law while every
//!   output keeps exactly the right distribution. An exact integer width
//!   identity is asserted as the run goes.
//! * [`extractor_output_tests`] applies monobit and runs z-tests to an
//!   extracted stream, for end-to-end sanity checking.
//!
//! Exactness requires the leaf weights to be exact dyadics, so models can
//! only be built when the distribution resolves *completely* within the
//! depth cap (all atom probabilities are dyadic rationals, for Knuth–Yao;
//! all interval mass classified, for Han–Hoshi). Anything else fails with
//! [`ExtractError::DepthCapTooSmall`] rather than silently emitting biased
//! bits.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::discrete::{
    hh_enumerate, hh_sample, ky_sample, DiscreteDistribution, ExitLeaf, SampleError,
    SampleOutcome, HH_DEPTH_CAP, KY_DEPTH_CAP,
};
use crate::source::{BitSource, SourceError};

/// Minimum stream length accepted by [`extractor_output_tests`]; below this
/// the z-approximations are too coarse to report.
pub const MIN_TEST_BITS: u64 = 10_000;

/// [`batch_generate`] retires its carried interval once the exact
/// denominator exceeds this many bits, discarding the few dozen bits of
/// residue it holds to keep every arithmetic operation bounded.
pub const RECYCLE_FLUSH_BITS: u64 = 16_384;

/// Which exact discrete sampler to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerAlg {
    /// The Knuth–Yao tree walk ([`ky_sample`]).
    KnuthYao,
    /// The Han–Hoshi nested-interval method ([`hh_sample`]).
    HanHoshi,
}

impl SamplerAlg {
    /// Draw one sample with the selected algorithm.
    pub fn sample<S: BitSource>(
        self,
        dist: &DiscreteDistribution,
        src: &mut S,
    ) -> Result<SampleOutcome, SampleError> {
        match self {
            SamplerAlg::KnuthYao => ky_sample(dist, src),
            SamplerAlg::HanHoshi => hh_sample(dist, src),
        }
    }
}

/// Errors from model building, extraction, and batch generation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    /// The distribution does not resolve completely within the depth cap, so
    /// exact leaf weights cannot be tabulated (non-dyadic atoms never do).
    #[error(
        "distribution is not leaf-finite within depth cap {cap}; exact \
         extraction needs a law whose sampler resolves completely (dyadic \
         atom probabilities)"
    )]
    DepthCapTooSmall {
        /// The depth cap that was insufficient.
        cap: u32,
    },
    /// A fed `(value, leaf)` pair is not a leaf of the model.
    #[error("unknown exit leaf for value {value}: depth {depth}, rank {rank}")]
    InvalidLeaf {
        /// The symbol (1-based) that was fed.
        value: usize,
        /// Depth of the unknown leaf.
        depth: u32,
        /// Rank of the unknown leaf.
        rank: u128,
    },
    /// Sampling or digit evaluation failed while building or running.
    #[error(transparent)]
    Sample(#[from] SampleError),
    /// Extraction models need a finite support.
    #[error("extraction models need finite support")]
    InfiniteSupport,
    /// The output test stream is too short for the z-approximations.
    #[error("output tests need at least {min} bits, got {got}")]
    TooFewBits {
        /// Bits provided.
        got: u64,
        /// Bits required.
        min: u64,
    },
}

/// An exact weight table over exit leaves.
///
/// Entry `i` carries weight `2^{weight_exponent − depth_i}`; `cum` holds the
/// running weight sums so that entry `i` owns the integer subinterval
/// `[cum[i], cum[i+1])` of `[0, total)`. Feeding entry `i` to an
/// [`ExtractorState`] scales its interval into that slot.
///
/// Entries are kept in *tape order* — sorted by the set of input strings
/// that reach each leaf — so in a joint table the slot of a leaf is exactly
/// the dyadic interval of tapes that exit through it. That makes the joint
/// extractor invert the sampler bit-for-bit on fully-dyadic laws.
#[derive(Debug, Clone)]
pub struct LeafTable {
    /// `(value 1-based, leaf)`, in tape order.
    entries: Vec<(usize, ExitLeaf)>,
    /// Running weight sums, `entries.len() + 1` long, starting at 0.
    cum: Vec<BigInt>,
    /// Total weight = `cum.last()`.
    total: BigInt,
    /// Weights are `2^{weight_exponent − depth}`; this is the maximum depth.
    weight_exponent: u32,
    /// Entry index by `(value, leaf)`.
    index: HashMap<(usize, ExitLeaf), usize>,
}

impl LeafTable {
    /// Build from entries already in tape order (order is preserved).
    fn build(entries: Vec<(usize, ExitLeaf)>) -> LeafTable {
        assert!(!entries.is_empty(), "a leaf table cannot be empty");
        let weight_exponent = entries.iter().map(|(_, l)| l.depth).max().unwrap();
        let mut cum = Vec::with_capacity(entries.len() + 1);
        let mut index = HashMap::with_capacity(entries.len());
        let mut acc = BigInt::zero();
        cum.push(acc.clone());
        for (i, &(v, l)) in entries.iter().enumerate() {
            acc += BigInt::one() << (weight_exponent - l.depth) as usize;
            cum.push(acc.clone());
            let previous = index.insert((v, l), i);
            assert!(previous.is_none(), "duplicate leaf in table");
        }
        LeafTable {
            entries,
            total: acc,
            cum,
            weight_exponent,
            index,
        }
    }

    /// The `(value, leaf)` entries, in tape order.
    pub fn entries(&self) -> &[(usize, ExitLeaf)] {
        &self.entries
    }

    /// Number of leaves in the table.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the table is empty (never true for a built table).
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total integer weight (`2^{weight_exponent}` times the table's mass).
    pub fn total(&self) -> &BigInt {
        &self.total
    }

    /// The common weight scale: entry weights are
    /// `2^{weight_exponent − depth}`.
    pub fn weight_exponent(&self) -> u32 {
        self.weight_exponent
    }
}

/// The complete leaf model of one sampler on one leaf-finite distribution.
///
/// Holds a *joint* table over all `(symbol, leaf)` pairs — feeding it
/// extracts every bit the sampler consumed, asymptotically `E[T]` per draw —
/// and one *conditional* table per symbol — feeding those extracts only the
/// bits not spent on identifying the symbol, asymptotically `E[T] − H` per
/// draw, which is what batch recycling uses.
#[derive(Debug, Clone)]
pub struct ConditionalModel {
    alg: SamplerAlg,
    depth_cap: u32,
    joint: LeafTable,
    symbols: Vec<LeafTable>,
}

impl ConditionalModel {
    /// The sampler the model describes.
    pub fn alg(&self) -> SamplerAlg {
        self.alg
    }

    /// The depth cap the model was certified at.
    pub fn depth_cap(&self) -> u32 {
        self.depth_cap
    }

    /// The joint table over all `(symbol, leaf)` pairs.
    pub fn joint_table(&self) -> &LeafTable {
        &self.joint
    }

    /// The conditional leaf table of symbol `value` (1-based).
    pub fn symbol_table(&self, value: usize) -> &LeafTable {
        assert!(
            value >= 1 && value <= self.symbols.len(),
            "symbol {value} out of range 1..={}",
            self.symbols.len()
        );
        &self.symbols[value - 1]
    }
}

/// Enumerate the complete leaf set of `alg` on `dist` and build the exact
/// weight tables.
///
/// Fails with [`ExtractError::DepthCapTooSmall`] unless the sampler provably
/// terminates by depth `depth_cap` on *every* path: for Knuth–Yao this means
/// every atom probability is a dyadic rational with at most `depth_cap`
/// fractional bits; for Han–Hoshi, that no interval at the cap still
/// straddles a cumulative boundary. The cap is clamped to the sampler's own
/// depth limit.
pub fn build_conditional_model(
    dist: &DiscreteDistribution,
    alg: SamplerAlg,
    depth_cap: u32,
) -> Result<ConditionalModel, ExtractError> {
    let n = dist.support_size().ok_or(ExtractError::InfiniteSupport)?;
    let (cap, mut raw) = match alg {
        SamplerAlg::KnuthYao => {
            let cap = depth_cap.min(KY_DEPTH_CAP);
            if dist.is_singleton() {
                // The tree is a single root leaf; nothing to scan.
                (cap, vec![(0usize, ExitLeaf { depth: 0, rank: 0 })])
            } else {
                let mut raw = Vec::new();
                for i in 0..n {
                    let exp = dist.atom_expansion(i + 1);
                    if exp.terminated_by(cap) != Some(true) {
                        return Err(ExtractError::DepthCapTooSmall { cap });
                    }
                    let mut rank: u128 = 0;
                    for j in 1..=cap {
                        if exp.expansion_digit(j).map_err(SampleError::from)? == 1 {
                            raw.push((i, ExitLeaf { depth: j, rank }));
                            rank += 1;
                        }
                    }
                }
                (cap, raw)
            }
        }
        SamplerAlg::HanHoshi => {
            let cap = depth_cap.min(HH_DEPTH_CAP);
            let en = hh_enumerate(dist, cap, true)?;
            if en.per_level_straddlers.last().copied().unwrap_or(0) != 0 {
                return Err(ExtractError::DepthCapTooSmall { cap });
            }
            (cap, en.leaves)
        }
    };
    // Tape order. Knuth–Yao reaches shallow leaves first and, within a
    // level, leaves in ascending atom order. A Han–Hoshi leaf *is* the
    // dyadic interval `[rank·2^{-depth}, (rank+1)·2^{-depth})`, so tape
    // order is interval position.
    match alg {
        SamplerAlg::KnuthYao => raw.sort_by_key(|&(v, l)| (l.depth, v)),
        SamplerAlg::HanHoshi => {
            let dmax = raw.iter().map(|(_, l)| l.depth).max().unwrap_or(0);
            raw.sort_by_key(|&(_, l)| l.rank << (dmax - l.depth));
        }
    }
    let joint = LeafTable::build(raw.iter().map(|&(s, l)| (s + 1, l)).collect());
    // Completeness double-check: the joint leaf masses must sum to exactly 1.
    assert_eq!(
        joint.total,
        BigInt::one() << joint.weight_exponent as usize,
        "leaf masses of a certified model must sum to 1"
    );
    let symbols = (0..n)
        .map(|i| {
            LeafTable::build(
                raw.iter()
                    .filter(|&&(s, _)| s == i)
                    .map(|&(s, l)| (s + 1, l))
                    .collect(),
            )
        })
        .collect();
    Ok(ConditionalModel {
        alg,
        depth_cap: cap,
        joint,
        symbols,
    })
}

/// Nested-interval extractor over exact rational state.
///
/// The state is the half-open interval `[a/d, b/d) ⊆ [0, 1)`; each
/// [`Self::feed`] scales it into the fed leaf's slot of its table, then
/// emits every binary digit the interval already determines (most
/// significant first): digit 0 while `[a/d, b/d) ⊆ [0, ½)`, digit 1 while
/// `⊆ [½, 1)`, rescaling the interval by 2 after each. The concatenated
/// output across feeds is a prefix of the binary expansion of a single
/// uniform variate on `[0, 1)`, so the emitted bits are exactly independent
/// fair coin flips.
#[derive(Debug, Clone)]
pub struct ExtractorState {
    a: BigInt,
    b: BigInt,
    d: BigInt,
    emitted: u64,
}

impl Default for ExtractorState {
    fn default() -> Self {
        ExtractorState::new()
    }
}

impl ExtractorState {
    /// Fresh extractor with the full interval `[0, 1)`.
    pub fn new() -> Self {
        ExtractorState {
            a: BigInt::zero(),
            b: BigInt::one(),
            d: BigInt::one(),
            emitted: 0,
        }
    }

    /// Total bits emitted so far (the `R_n` counter).
    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Record that `(value, leaf)` was observed under `table` and return the
    /// binary digits this determines, most significant first.
    ///
    /// A single-entry table carries no information and emits nothing.
    pub fn feed(
        &mut self,
        table: &LeafTable,
        value: usize,
        leaf: ExitLeaf,
    ) -> Result<Vec<u8>, ExtractError> {
        let idx = *table.index.get(&(value, leaf)).ok_or(ExtractError::InvalidLeaf {
            value,
            depth: leaf.depth,
            rank: leaf.rank,
        })?;
        if table.entries.len() == 1 {
            return Ok(Vec::new());
        }
        let span = &self.b - &self.a;
        let new_a = &self.a * &table.total + &span * &table.cum[idx];
        let new_b = &self.a * &table.total + &span * &table.cum[idx + 1];
        self.a = new_a;
        self.b = new_b;
        self.d *= &table.total;
        let mut out = Vec::new();
        loop {
            let ta: BigInt = &self.a << 1;
            let tb: BigInt = &self.b << 1;
            if tb <= self.d {
                out.push(0);
                self.a = ta;
                self.b = tb;
            } else if ta >= self.d {
                out.push(1);
                self.a = ta - &self.d;
                self.b = tb - &self.d;
            } else {
                break;
            }
        }
        debug_assert!(self.a < self.b && self.b <= self.d && !self.a.is_negative());
        self.emitted += out.len() as u64;
        self.normalize();
        Ok(out)
    }

    /// Divide out common factors of two so dyadic-weight feeds keep the
    /// state small (odd weights accumulate, which is inherent to exactness).
    fn normalize(&mut self) {
        // b ≥ 1 and d ≥ 1 always hold; a may be zero.
        let mut tz = self
            .b
            .trailing_zeros()
            .unwrap_or(0)
            .min(self.d.trailing_zeros().unwrap_or(0));
        if !self.a.is_zero() {
            tz = tz.min(self.a.trailing_zeros().unwrap_or(0));
        }
        if tz > 0 {
            self.a >>= tz as usize;
            self.b >>= tz as usize;
            self.d >>= tz as usize;
        }
    }
}

/// Report of one batch run of [`batch_generate`].
#[derive(Debug, Clone)]
pub struct BatchReport {
    /// The `n` sampled symbols (1-based), in order.
    pub values: Vec<usize>,
    /// Fresh bits drawn from the underlying source (`N_n`).
    pub fresh_bits: u64,
    /// Tape digits served to the samplers, fresh plus recycled (`Σ Tᵢ`).
    pub total_bits: u64,
    /// Bits of residual randomness held by the carried interval at the end,
    /// `⌊log2(d/(b−a))⌋` — the analog of a final queue length.
    pub carried_bits: u64,
    /// Largest `carried_bits` observed after any draw.
    pub max_carried_bits: u64,
    /// How many times the carried interval was retired because its exact
    /// denominator outgrew [`RECYCLE_FLUSH_BITS`].
    pub flushes: u64,
}

/// Bit source that recycles the residual randomness of earlier draws.
///
/// The state is an exact interval `[a/d, b/d) ⊆ [0, 1)`: conditioned on
/// every symbol output so far, the *virtual tape* the next draw reads is
/// uniform on it. Three exact operations maintain that invariant:
///
/// * **serve** — while the interval lies inside one half of `[0, 1)` the
///   next tape digit is already determined; hand it to the sampler for free
///   and rescale (`x ↦ 2x` or `2x − 1`).
/// * **split** — while the interval straddles ½ the digit is undecided; draw
///   one fresh bit and keep the lower or upper exact half (doubling all
///   three integers first if the midpoint is fractional). One fresh bit
///   stores exactly one bit of width, so no randomness is wasted.
/// * **deposit** — after a draw exits, scale the interval into the slot of
///   the observed leaf in the symbol's conditional table. Given the symbol,
///   the slot is hit with probability exactly `span/total`, so the scaled
///   state stays uniform and the leaf's residual entropy is banked.
///
/// Serving digits this way — instead of materializing extractor output into
/// a queue — is what keeps batch outputs exactly distributed; see
/// [`batch_generate`].
struct RecycleSource<S> {
    a: BigInt,
    b: BigInt,
    d: BigInt,
    fresh: S,
    /// Digits served to the samplers (cumulative `Σ Tᵢ`).
    served: u64,
    /// Fresh bits drawn from `fresh` (cumulative `N_n`).
    fresh_count: u64,
    /// Exact width-identity ledger for the current interval epoch.
    prod_total: BigInt,
    prod_span: BigInt,
    epoch_served: u64,
    epoch_fresh: u64,
    deposits: u64,
    max_carried: u64,
    flushes: u64,
}

impl<S: BitSource> RecycleSource<S> {
    fn new(fresh: S) -> Self {
        RecycleSource {
            a: BigInt::zero(),
            b: BigInt::one(),
            d: BigInt::one(),
            fresh,
            served: 0,
            fresh_count: 0,
            prod_total: BigInt::one(),
            prod_span: BigInt::one(),
            epoch_served: 0,
            epoch_fresh: 0,
            deposits: 0,
            max_carried: 0,
            flushes: 0,
        }
    }

    /// Residual randomness currently stored, `⌊log2(d/(b−a))⌋` up to ±1.
    fn carried_bits(&self) -> u64 {
        self.d.bits().saturating_sub((&self.b - &self.a).bits())
    }

    /// Divide out common factors of two (see [`ExtractorState::normalize`]).
    fn normalize(&mut self) {
        let mut tz = self
            .b
            .trailing_zeros()
            .unwrap_or(0)
            .min(self.d.trailing_zeros().unwrap_or(0));
        if !self.a.is_zero() {
            tz = tz.min(self.a.trailing_zeros().unwrap_or(0));
        }
        if tz > 0 {
            self.a >>= tz as usize;
            self.b >>= tz as usize;
            self.d >>= tz as usize;
        }
    }

    /// Exact conservation: with `F` fresh bits in, `T` digits out, and slots
    /// `(spanⱼ, totalⱼ)` banked since the interval was last reset,
    /// `(b − a)·Π totalⱼ·2^F = d·Π spanⱼ·2^T` holds in exact integers.
    fn check_width_identity(&self) {
        let lhs = (&self.b - &self.a) * &self.prod_total;
        let rhs = &self.d * &self.prod_span;
        let (lhs, rhs) = if self.epoch_fresh >= self.epoch_served {
            (lhs << (self.epoch_fresh - self.epoch_served), rhs)
        } else {
            (lhs, rhs << (self.epoch_served - self.epoch_fresh))
        };
        assert_eq!(lhs, rhs, "recycling width identity violated");
    }

    /// Bank the residual entropy of one `(value, leaf)` exit.
    fn deposit(
        &mut self,
        table: &LeafTable,
        value: usize,
        leaf: ExitLeaf,
    ) -> Result<(), ExtractError> {
        let idx = *table.index.get(&(value, leaf)).ok_or(ExtractError::InvalidLeaf {
            value,
            depth: leaf.depth,
            rank: leaf.rank,
        })?;
        if table.entries.len() > 1 {
            // Prepend the slot: the state `[a/d, b/d)` is the leaf-cell
            // remainder of the finished draw, uniform on `[0, 1)` given the
            // symbol and leaf, so `x ↦ (cum_lo + x·span)/total` lands it in
            // the slot and the slots tile `[0, 1)` with the conditional
            // masses. (Refining the state *by* the slot instead — keeping
            // the interval's own macro position — does not tile: the
            // position given the outputs alone is not uniform, and the
            // overlap shows up as a measurable output bias from the third
            // draw on.)
            let slot = &table.cum[idx + 1] - &table.cum[idx];
            let new_a = &table.cum[idx] * &self.d + &self.a * &slot;
            let new_b = &table.cum[idx] * &self.d + &self.b * &slot;
            self.a = new_a;
            self.b = new_b;
            self.d *= &table.total;
            self.prod_total *= &table.total;
            self.prod_span *= slot;
            debug_assert!(self.a < self.b && self.b <= self.d && !self.a.is_negative());
            self.normalize();
        }
        self.deposits += 1;
        self.max_carried = self.max_carried.max(self.carried_bits());
        // The identity check is a full-size multiply, so once the state has
        // grown past a few KBit it runs on a sampled schedule.
        if self.d.bits() <= 2048 || self.deposits % 64 == 0 {
            self.check_width_identity();
        }
        if self.d.bits() > RECYCLE_FLUSH_BITS {
            self.check_width_identity();
            self.a = BigInt::zero();
            self.b = BigInt::one();
            self.d = BigInt::one();
            self.prod_total = BigInt::one();
            self.prod_span = BigInt::one();
            self.epoch_served = 0;
            self.epoch_fresh = 0;
            self.flushes += 1;
        }
        Ok(())
    }
}

impl<S: BitSource> BitSource for RecycleSource<S> {
    fn next_bit(&mut self) -> Result<u8, SourceError> {
        loop {
            let ta: BigInt = &self.a << 1;
            let tb: BigInt = &self.b << 1;
            if tb <= self.d {
                self.a = ta;
                self.b = tb;
                self.served += 1;
                self.epoch_served += 1;
                self.normalize();
                return Ok(0);
            }
            if ta >= self.d {
                self.a = ta - &self.d;
                self.b = tb - &self.d;
                self.served += 1;
                self.epoch_served += 1;
                self.normalize();
                return Ok(1);
            }
            // Undecided digit: refine to an exact half, chosen by one fresh
            // bit (double everything first if the midpoint is fractional).
            if (&self.a + &self.b).is_odd() {
                self.a <<= 1;
                self.b <<= 1;
                self.d <<= 1;
            }
            let mid: BigInt = (&self.a + &self.b) >> 1;
            if self.fresh.next_bit()? == 0 {
                self.b = mid;
            } else {
                self.a = mid;
            }
            self.fresh_count += 1;
            self.epoch_fresh += 1;
        }
    }

    fn consumed(&self) -> u64 {
        self.served
    }
}

/// Run `alg` on `dist` `n` times, recycling each draw's residual randomness
/// through an exact carried interval.
///
/// After a draw exits at leaf `Y` with symbol `X`, the leaf is still random
/// given `X` (reached with probability `2^{−depth}/p_X`) — worth `E[T] − H`
/// bits per draw on average. Materializing that residue into bits and
/// serving them back inside the same run would *bias* it: when the extractor
/// determines a digit is correlated with the digit's value, so a bit that
/// happens to be available early is not fair conditioned on being served
/// early. On `(1/4, 3/4)` under Knuth–Yao, for instance, the first bit the
/// conditional extractor can emit is always a 1, and a queue-first pipeline
/// would push the next draw's probability of symbol 1 from 1/4 to 5/16.
///
/// This engine therefore never turns the residue into bits. It carries one
/// exact interval — the conditional law of the next draw's virtual tape
/// given every symbol output so far — through a [`RecycleSource`]: digits
/// the interval determines are served for free, undecided digits cost one
/// fresh bit per exact halving, and each exit leaf's conditional slot is
/// banked back into the interval. Every digit served is fair conditioned on
/// the whole output history, so the `values` are exactly i.i.d. with law
/// `dist`, while the amortized fresh-bit rate `fresh_bits/n` converges to
/// the entropy `H` instead of the single-shot `E[T]`.
///
/// Exact conservation is asserted as the run goes: with `F` fresh bits in,
/// `T` digits out, and slots `(spanⱼ, totalⱼ)` banked since the interval was
/// last reset, the width identity `(b − a)·Π totalⱼ·2^F = d·Π spanⱼ·2^T`
/// must hold in exact integers. Odd slot factors cannot cancel, so the
/// denominator grows by `log2(total)` bits per deposit; once it exceeds
/// [`RECYCLE_FLUSH_BITS`] bits the interval is retired and restarted, which
/// discards only the `carried_bits` of residue it held (a vanishing cost
/// that keeps every operation bounded).
pub fn batch_generate<S: BitSource>(
    dist: &DiscreteDistribution,
    alg: SamplerAlg,
    n: usize,
    src: S,
    depth_cap: u32,
) -> Result<BatchReport, ExtractError> {
    let model = build_conditional_model(dist, alg, depth_cap)?;
    let mut rs = RecycleSource::new(src);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let outcome = alg.sample(dist, &mut rs)?;
        rs.deposit(model.symbol_table(outcome.value), outcome.value, outcome.leaf)?;
        values.push(outcome.value);
    }
    rs.check_width_identity();
    let carried = rs.carried_bits();
    Ok(BatchReport {
        values,
        fresh_bits: rs.fresh_count,
        total_bits: rs.served,
        carried_bits: carried,
        max_carried_bits: rs.max_carried.max(carried),
        flushes: rs.flushes,
    })
}

/// Sample `n` draws and extract from the *joint* `(symbol, leaf)` model,
/// returning the emitted bit stream.
///
/// Joint extraction recovers all the randomness the sampler consumed, so the
/// output length per draw approaches `E[T]`; on a dyadic law, where the
/// sampler is a bijection between bit strings and `(symbol, leaf)` pairs,
/// the output exactly reproduces the consumed input stream.
pub fn extract_stream<S: BitSource>(
    dist: &DiscreteDistribution,
    alg: SamplerAlg,
    n: usize,
    src: &mut S,
    depth_cap: u32,
) -> Result<Vec<u8>, ExtractError> {
    let model = build_conditional_model(dist, alg, depth_cap)?;
    let mut state = ExtractorState::new();
    let mut out = Vec::new();
    for _ in 0..n {
        let outcome = alg.sample(dist, src)?;
        out.extend(state.feed(model.joint_table(), outcome.value, outcome.leaf)?);
    }
    Ok(out)
}

/// Statistics of an extracted bit stream under the fair-coin hypothesis.
#[derive(Debug, Clone)]
pub struct OutputTestReport {
    /// Stream length.
    pub n: u64,
    /// Number of 1 bits.
    pub ones: u64,
    /// Monobit z-score: `(2·ones − n)/√n`, asymptotically standard normal.
    pub monobit_z: f64,
    /// Number of runs (maximal blocks of equal bits).
    pub runs: u64,
    /// Wald–Wolfowitz runs z-score, asymptotically standard normal. Reported
    /// as 0 for a constant stream (the monobit score flags that case).
    pub runs_z: f64,
}

/// Monobit and runs z-tests for an extracted stream.
///
/// Requires at least [`MIN_TEST_BITS`] bits. Under exact extraction both
/// scores are asymptotically standard normal; `|z| ≥ 4` is a one-in-sixteen-
/// thousand event per test and indicates a broken extractor.
pub fn extractor_output_tests(bits: &[u8]) -> Result<OutputTestReport, ExtractError> {
    let n = bits.len() as u64;
    if n < MIN_TEST_BITS {
        return Err(ExtractError::TooFewBits {
            got: n,
            min: MIN_TEST_BITS,
        });
    }
    let ones = bits.iter().filter(|&&b| b == 1).count() as u64;
    let nf = n as f64;
    let monobit_z = (2.0 * ones as f64 - nf) / nf.sqrt();
    let mut runs = 1u64;
    for w in bits.windows(2) {
        if w[0] != w[1] {
            runs += 1;
        }
    }
    let runs_z = if ones == 0 || ones == n {
        0.0
    } else {
        let n1 = ones as f64;
        let n0 = nf - n1;
        let mu = 2.0 * n0 * n1 / nf + 1.0;
        let var = (mu - 1.0) * (mu - 2.0) / (nf - 1.0);
        (runs as f64 - mu) / var.sqrt()
    };
    Ok(OutputTestReport {
        n,
        ones,
        monobit_z,
        runs,
        runs_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{ReplaySource, SeededSource};

    fn dist(atoms: &[(u64, u64)]) -> DiscreteDistribution {
        DiscreteDistribution::from_rationals(atoms).unwrap()
    }

    #[test]
    fn fair_coin_joint_model_and_trace() {
        let coin = DiscreteDistribution::fair_coin();
        let model = build_conditional_model(&coin, SamplerAlg::KnuthYao, 16).unwrap();
        let joint = model.joint_table();
        assert_eq!(joint.len(), 2);
        assert_eq!(joint.weight_exponent(), 1);
        assert_eq!(joint.total(), &BigInt::from(2));
        assert_eq!(
            joint.entries(),
            &[
                (1, ExitLeaf { depth: 1, rank: 0 }),
                (2, ExitLeaf { depth: 1, rank: 0 }),
            ]
        );

        // Feeding symbols (1, 2, 1) emits exactly their slot digits: 0, 1, 0.
        let mut state = ExtractorState::new();
        let mut out = Vec::new();
        for v in [1usize, 2, 1] {
            out.extend(
                state
                    .feed(joint, v, ExitLeaf { depth: 1, rank: 0 })
                    .unwrap(),
            );
        }
        assert_eq!(out, vec![0, 1, 0]);
        assert_eq!(state.emitted(), 3);
    }

    #[test]
    fn conditional_fair_coin_tables_are_degenerate() {
        let coin = DiscreteDistribution::fair_coin();
        let model = build_conditional_model(&coin, SamplerAlg::KnuthYao, 16).unwrap();
        let mut state = ExtractorState::new();
        for v in [1usize, 2, 2, 1] {
            let bits = state
                .feed(model.symbol_table(v), v, ExitLeaf { depth: 1, rank: 0 })
                .unwrap();
            assert!(bits.is_empty());
        }
        assert_eq!(state.emitted(), 0);
    }

    #[test]
    fn quarter_three_quarters_conditional_tables() {
        // Both samplers resolve (1/4, 3/4) fully by depth 2 with the same
        // conditional masses for symbol 2: a depth-1 leaf of weight 2 and a
        // depth-2 leaf of weight 1, total 3. Tape order differs: Knuth–Yao
        // reaches the shallow leaf first, Han–Hoshi's shallow leaf is the
        // right half [1/2, 1) so it comes second.
        let d = dist(&[(1, 4), (3, 4)]);
        for (alg, depths, deep_leaf_bits) in [
            (SamplerAlg::KnuthYao, vec![1, 2], vec![1u8]),
            (SamplerAlg::HanHoshi, vec![2, 1], vec![0u8]),
        ] {
            let model = build_conditional_model(&d, alg, 8).unwrap();
            assert_eq!(model.symbol_table(1).len(), 1);
            let t2 = model.symbol_table(2);
            assert_eq!(t2.len(), 2);
            assert_eq!(t2.total(), &BigInt::from(3));
            assert_eq!(t2.weight_exponent(), 2);
            let got: Vec<u32> = t2.entries().iter().map(|(_, l)| l.depth).collect();
            assert_eq!(got, depths, "{alg:?}");

            // The depth-2 leaf has conditional weight 1/3; its slot sits
            // entirely inside one half, so it determines one digit at once.
            let deep = t2.entries()[depths.iter().position(|&x| x == 2).unwrap()].1;
            let mut state = ExtractorState::new();
            assert_eq!(state.feed(t2, 2, deep).unwrap(), deep_leaf_bits, "{alg:?}");

            // The depth-1 leaf's slot (width 2/3) straddles 1/2: no digit.
            let shallow = t2.entries()[depths.iter().position(|&x| x == 1).unwrap()].1;
            let mut state = ExtractorState::new();
            assert!(state.feed(t2, 2, shallow).unwrap().is_empty(), "{alg:?}");
        }
    }

    #[test]
    fn joint_extraction_inverts_the_tape_on_dyadic_laws() {
        // On a dyadic law the sampler is a bijection between input strings
        // and (symbol, leaf) pairs, so joint extraction must reproduce the
        // consumed tape exactly — bit for bit, in order.
        let tape: Vec<u8> = {
            let mut src = SeededSource::from_seed(0xA5A5);
            (0..64).map(|_| src.next_bit().unwrap()).collect()
        };
        for alg in [SamplerAlg::KnuthYao, SamplerAlg::HanHoshi] {
            for d in [
                DiscreteDistribution::fair_coin(),
                DiscreteDistribution::uniform_four(),
                dist(&[(1, 2), (1, 4), (1, 4)]),
                dist(&[(1, 4), (3, 4)]),
                dist(&[(3, 8), (1, 4), (1, 4), (1, 8)]),
            ] {
                let mut src = ReplaySource::from_bits(tape.clone());
                let mut model_src_budget = 0usize;
                let mut out = Vec::new();
                let model = build_conditional_model(&d, alg, 32).unwrap();
                let mut state = ExtractorState::new();
                // Draw until the next sample would exhaust the tape.
                loop {
                    let before = src.consumed();
                    match alg.sample(&d, &mut src) {
                        Ok(o) => {
                            model_src_budget += (src.consumed() - before) as usize;
                            out.extend(
                                state.feed(model.joint_table(), o.value, o.leaf).unwrap(),
                            );
                        }
                        Err(SampleError::Source(_)) => break,
                        Err(e) => panic!("unexpected sampler error: {e}"),
                    }
                }
                assert_eq!(out, tape[..model_src_budget].to_vec(), "{alg:?} {d:?}");
            }
        }
    }

    #[test]
    fn batch_on_fair_coin_recycles_nothing() {
        // Conditional tables of a fair coin are single-entry, so the carried
        // interval never stores anything: every digit costs one fresh bit.
        let coin = DiscreteDistribution::fair_coin();
        let report = batch_generate(
            &coin,
            SamplerAlg::KnuthYao,
            200,
            SeededSource::from_seed(3),
            16,
        )
        .unwrap();
        assert_eq!(report.values.len(), 200);
        assert_eq!(report.fresh_bits, 200);
        assert_eq!(report.total_bits, 200);
        assert_eq!(report.carried_bits, 0);
        assert_eq!(report.max_carried_bits, 0);
        assert_eq!(report.flushes, 0);
    }

    #[test]
    fn batch_on_quarter_three_quarters_approaches_entropy() {
        // H = 0.8113; E[T] = 1.5 for both samplers. Recycling must push the
        // fresh rate well below the raw rate on a modest run.
        for alg in [SamplerAlg::KnuthYao, SamplerAlg::HanHoshi] {
            let d = dist(&[(1, 4), (3, 4)]);
            let report =
                batch_generate(&d, alg, 4000, SeededSource::from_seed(11), 8).unwrap();
            let fresh_rate = report.fresh_bits as f64 / 4000.0;
            assert!(
                (0.75..=0.95).contains(&fresh_rate),
                "{alg:?} fresh rate {fresh_rate}"
            );
            // Some digits must have been served from the carried interval.
            assert!(report.total_bits > report.fresh_bits, "{alg:?}");
            assert!(report.max_carried_bits >= report.carried_bits);
        }
    }

    #[test]
    fn batch_outputs_stay_unbiased_despite_recycling() {
        // Bias regression. An eager bit queue would serve a deterministic 1
        // after every deep (1/4, 3/4) Knuth–Yao leaf, pushing the next
        // draw's P(symbol 1) from 1/4 toward 5/16 ≈ 0.3125 — an effect of
        // roughly +0.025 on the long-run frequency, far outside 4σ below.
        for alg in [SamplerAlg::KnuthYao, SamplerAlg::HanHoshi] {
            let d = dist(&[(1, 4), (3, 4)]);
            let n = 40_000usize;
            let report =
                batch_generate(&d, alg, n, SeededSource::from_seed(0xBA7C4), 8).unwrap();
            let ones = report.values.iter().filter(|&&v| v == 1).count() as f64;
            let freq = ones / n as f64;
            let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
            assert!(
                (freq - 0.25).abs() < 4.0 * sigma,
                "{alg:?}: freq(symbol 1) = {freq}, expected 0.25 ± {}",
                4.0 * sigma
            );
        }
    }

    #[test]
    fn batch_distribution_is_exact_over_exhaustive_tapes() {
        // Stronger than any statistical check: enumerate every 12-bit tape
        // (each of probability 2^{-12}), run a 3-draw batch on it, and count
        // the exact joint frequencies. Recycling must preserve the product
        // law: P(X1 = i, X2 = j, X3 = k) = p_i · p_j · p_k exactly. Three
        // draws matter: the first deposit starts from the whole unit
        // interval, so a composition error in the deposit map only becomes
        // visible from the third draw on.
        let d = dist(&[(1, 4), (3, 4)]);
        let len = 12u32;
        for alg in [SamplerAlg::KnuthYao, SamplerAlg::HanHoshi] {
            let mut counts = [[[0u64; 2]; 2]; 2];
            for tape in 0u32..(1 << len) {
                let bits: Vec<u8> =
                    (0..len).map(|i| ((tape >> (len - 1 - i)) & 1) as u8).collect();
                let report = batch_generate(&d, alg, 3, ReplaySource::from_bits(bits), 8)
                    .unwrap_or_else(|e| panic!("{alg:?}: tape {tape:012b} failed: {e}"));
                counts[report.values[0] - 1][report.values[1] - 1]
                    [report.values[2] - 1] += 1;
            }
            let total = 1u64 << len;
            // p = (1/4, 3/4), zero-based cells: each coordinate equal to 1
            // (the 3/4 symbol) contributes a factor 3, so cell (i, j, k)
            // has mass 3^(i+j+k) / 64.
            for i in 0..2u64 {
                for j in 0..2u64 {
                    for k in 0..2u64 {
                        let threes = i + j + k;
                        let expect = total * 3u64.pow(threes as u32) / 64;
                        assert_eq!(
                            counts[i as usize][j as usize][k as usize], expect,
                            "{alg:?}: cell ({i}, {j}, {k})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_law_costs_nothing_in_batch() {
        let one = DiscreteDistribution::degenerate();
        for alg in [SamplerAlg::KnuthYao, SamplerAlg::HanHoshi] {
            let report =
                batch_generate(&one, alg, 5, SeededSource::from_seed(0), 16).unwrap();
            assert_eq!(report.values, vec![1, 1, 1, 1, 1]);
            assert_eq!(report.fresh_bits, 0);
            assert_eq!(report.total_bits, 0);
        }
    }

    #[test]
    fn non_dyadic_laws_are_rejected() {
        let third = dist(&[(1, 3), (2, 3)]);
        for alg in [SamplerAlg::KnuthYao, SamplerAlg::HanHoshi] {
            let err = build_conditional_model(&third, alg, 40).unwrap_err();
            assert!(
                matches!(err, ExtractError::DepthCapTooSmall { cap: 40 }),
                "{alg:?}: {err:?}"
            );
        }
        let geo = DiscreteDistribution::geometric_one_over_e();
        let err = build_conditional_model(&geo, SamplerAlg::KnuthYao, 20).unwrap_err();
        assert_eq!(err, ExtractError::InfiniteSupport);
    }

    #[test]
    fn a_dyadic_law_needs_enough_depth() {
        let d = dist(&[(1, 8), (7, 8)]);
        let err = build_conditional_model(&d, SamplerAlg::KnuthYao, 2).unwrap_err();
        assert_eq!(err, ExtractError::DepthCapTooSmall { cap: 2 });
        assert!(build_conditional_model(&d, SamplerAlg::KnuthYao, 3).is_ok());
    }

    #[test]
    fn unknown_leaves_are_rejected() {
        let coin = DiscreteDistribution::fair_coin();
        let model = build_conditional_model(&coin, SamplerAlg::KnuthYao, 16).unwrap();
        let mut state = ExtractorState::new();
        let err = state
            .feed(model.joint_table(), 1, ExitLeaf { depth: 5, rank: 0 })
            .unwrap_err();
        assert_eq!(
            err,
            ExtractError::InvalidLeaf {
                value: 1,
                depth: 5,
                rank: 0
            }
        );
    }

    #[test]
    fn output_tests_flag_patterned_streams_and_pass_extracted_ones() {
        // Alternating bits: perfect monobit balance, wildly too many runs.
        let alternating: Vec<u8> = (0..MIN_TEST_BITS).map(|i| (i % 2) as u8).collect();
        let r = extractor_output_tests(&alternating).unwrap();
        assert!(r.monobit_z.abs() < 1e-9);
        assert!(r.runs_z > 4.0, "runs z = {}", r.runs_z);

        // A genuinely extracted stream passes both tests.
        let mut src = SeededSource::from_seed(0xFEED);
        let bits = extract_stream(
            &DiscreteDistribution::uniform_four(),
            SamplerAlg::KnuthYao,
            6000,
            &mut src,
            16,
        )
        .unwrap();
        assert_eq!(bits.len(), 12_000);
        let r = extractor_output_tests(&bits).unwrap();
        assert!(r.monobit_z.abs() < 4.0, "monobit z = {}", r.monobit_z);
        assert!(r.runs_z.abs() < 4.0, "runs z = {}", r.runs_z);

        let err = extractor_output_tests(&alternating[..9_999]).unwrap_err();
        assert_eq!(
            err,
            ExtractError::TooFewBits {
                got: 9_999,
                min: MIN_TEST_BITS
            }
        );
    }

    #[test]
    fn constant_stream_reports_zero_runs_z() {
        let zeros = vec![0u8; MIN_TEST_BITS as usize];
        let r = extractor_output_tests(&zeros).unwrap();
        assert_eq!(r.runs, 1);
        assert_eq!(r.runs_z, 0.0);
        assert!(r.monobit_z < -4.0);
    }
}
