//! Exact discrete sampling in the random bit model.
//!
//! Two samplers, both *exact* (the returned atom has precisely the requested
//! probability, with no floating-point approximation anywhere):
//!
//! * [`ky_sample`] — the lazy Knuth–Yao tree walk. Expected bit cost lies in
//!   `[H, H+2]` where `H` is the distribution's binary entropy.
//! * [`hh_sample`] — the Han–Hoshi nested-interval method. Expected bit cost
//!   lies in `[H, H+3]`; unlike the tree walk it needs the *cumulative*
//!   probabilities, which is what makes it the natural integer-part sampler
//!   for continuous laws.
//!
//! Both report the [`ExitLeaf`] they terminated through: the leaf carries
//! `depth − log2(1/p_value)` bits of randomness beyond the sampled value, and
//! the extraction machinery in [`crate::extract`] recovers it.
//!
//! [`ky_expected_bits`] and [`hh_expected_bits`] compute certified enclosures
//! of the expected bit cost by exact level-mass summation (Knuth–Yao) or
//! exact straddler counting (Han–Hoshi), each with a proven truncation tail.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::{
    ln2_real, DigitUndecidable, Dyadic, DyadicInterval, ProbabilityExpansion, Real,
    RealEnclosure, RefineBudgetExceeded, DEFAULT_DIGIT_BUDGET,
};
use crate::source::{BitSource, SourceError};

/// Maximum Knuth–Yao walk depth. The walk reaches depth `t` with probability
/// at most the probability mass below `2^{-t+1}`, so this cap is only ever
/// hit by adversarial replay tapes; it also keeps the node offset within
/// `u128`.
pub const KY_DEPTH_CAP: u32 = 126;

/// Maximum Han–Hoshi refinement depth; keeps exit-interval numerators within
/// `u128`. The probability of a genuine walk needing this depth is below
/// `2^{-100}` for any distribution this crate accepts.
pub const HH_DEPTH_CAP: u32 = 120;

/// Refinement budget (bits) for comparisons against computable-real
/// cumulative boundaries.
const BOUNDARY_BUDGET: u32 = 8192;

/// Error building a [`DiscreteDistribution`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistributionError {
    /// No atoms were supplied.
    #[error("a distribution needs at least one atom")]
    Empty,
    /// An atom has probability zero (1-based index).
    #[error("atom {index} has probability zero; drop it from the support")]
    ZeroAtom {
        /// 1-based atom index.
        index: usize,
    },
    /// An atom has a zero denominator (1-based index).
    #[error("atom {index} has a zero denominator")]
    ZeroDenominator {
        /// 1-based atom index.
        index: usize,
    },
    /// An atom is negative (1-based index).
    #[error("atom {index} is negative")]
    NegativeAtom {
        /// 1-based atom index.
        index: usize,
    },
    /// The probabilities do not sum to exactly 1.
    #[error("atom probabilities sum to {got}, not 1")]
    MassNotOne {
        /// The exact sum that was found, as a rational string.
        got: String,
    },
}

/// Error during sampling or expected-bit computation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    /// The bit source failed (e.g. a replay tape ran out).
    #[error(transparent)]
    Source(#[from] SourceError),
    /// A probability digit could not be decided (see [`DigitUndecidable`]).
    #[error(transparent)]
    Digit(#[from] DigitUndecidable),
    /// A cumulative-boundary comparison exceeded its refinement budget.
    #[error("cumulative boundary comparison failed: {0}")]
    Boundary(#[from] RefineBudgetExceeded),
    /// The walk exceeded its depth cap (astronomically unlikely except on
    /// adversarial replay tapes).
    #[error("sampler exceeded its depth cap of {cap} bits")]
    DepthCapExceeded {
        /// The cap that was hit.
        cap: u32,
    },
}

/// Identity of the tree leaf a sampler terminated through.
///
/// The leaf fires with probability exactly `2^{-depth}`. `rank` pins the leaf
/// among the leaves of the *same symbol* in the crate's fixed leaf ordering:
/// for Knuth–Yao it is the number of earlier set digits of the symbol's
/// probability expansion; for Han–Hoshi it is the exit interval's lower
/// endpoint numerator at `depth` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExitLeaf {
    /// Depth of the leaf (= bits consumed by the walk that reached it).
    pub depth: u32,
    /// Index of the leaf in the fixed same-symbol leaf ordering.
    pub rank: u128,
}

/// Result of one exact discrete sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOutcome {
    /// Sampled atom, 1-based.
    pub value: usize,
    /// Number of bits consumed from the source.
    pub bits_used: u64,
    /// The leaf the sampler terminated through.
    pub leaf: ExitLeaf,
}

struct GeometricTables {
    /// `1 − e^{-1}`, the first atom's probability.
    coeff: Real,
    /// `p_{k+1} = (1−e^{-1})·e^{-k}` handles, grown on demand.
    atom_reals: Mutex<Vec<Real>>,
    /// Digit oracles over the same values.
    atom_exps: Mutex<Vec<ProbabilityExpansion>>,
    /// Cumulative boundaries `Q_k = 1 − e^{-k}` (index `k-1`), on demand.
    bounds: Mutex<Vec<Real>>,
}

impl GeometricTables {
    fn new() -> Self {
        let coeff = Real::constant(Dyadic::one())
            .sub(&Real::constant(Dyadic::from_int(-1)).exp());
        GeometricTables {
            coeff,
            atom_reals: Mutex::new(Vec::new()),
            atom_exps: Mutex::new(Vec::new()),
            bounds: Mutex::new(Vec::new()),
        }
    }

    /// Probability handle for atom `k0` (0-based): `(1−e^{-1})·e^{-k0}`.
    fn atom_real(&self, k0: usize) -> Real {
        let mut v = self.atom_reals.lock().unwrap();
        while v.len() <= k0 {
            let k = v.len();
            let handle = if k == 0 {
                self.coeff.clone()
            } else {
                self.coeff
                    .mul(&Real::constant(Dyadic::from_int(-(k as i64))).exp())
            };
            v.push(handle);
        }
        v[k0].clone()
    }

    fn atom_expansion(&self, k0: usize) -> ProbabilityExpansion {
        let real = self.atom_real(k0);
        let mut v = self.atom_exps.lock().unwrap();
        while v.len() <= k0 {
            let k = v.len();
            let r = if k == k0 { real.clone() } else { self.atom_real(k) };
            v.push(ProbabilityExpansion::from_real(r, DEFAULT_DIGIT_BUDGET));
        }
        v[k0].clone()
    }

    /// Cumulative boundary `Q_l = 1 − e^{-l}` for `l ≥ 1`.
    fn bound(&self, l: usize) -> Real {
        let mut v = self.bounds.lock().unwrap();
        while v.len() < l {
            let k = v.len() + 1;
            let q = Real::constant(Dyadic::one())
                .sub(&Real::constant(Dyadic::from_int(-(k as i64))).exp());
            v.push(q);
        }
        v[l - 1].clone()
    }
}

enum DistKind {
    Finite {
        atoms: Vec<ProbabilityExpansion>,
        /// Cumulative numerators `Q_i·den` for `i = 0..=n` (`Q_0 = 0`,
        /// `Q_n = 1`).
        cum_nums: Vec<BigInt>,
        den: BigInt,
        /// Per atom: depth at which its expansion terminates, or `None` if
        /// it never does (non-dyadic rational).
        term_depth: Vec<Option<u32>>,
    },
    /// Finite support with computable-real atom probabilities.
    FiniteReal {
        atoms: Vec<ProbabilityExpansion>,
        /// Cumulative boundaries `Q_1..Q_{n-1}` as balanced-tree sums,
        /// built on demand.
        cum: Mutex<Vec<Option<Real>>>,
    },
    Geometric(GeometricTables),
}

/// Balanced-tree sum of atom probabilities (keeps enclosure recursion
/// logarithmic in the number of atoms).
fn balanced_sum(atoms: &[ProbabilityExpansion]) -> Real {
    debug_assert!(!atoms.is_empty());
    if atoms.len() == 1 {
        atoms[0].as_real()
    } else {
        let mid = atoms.len() / 2;
        balanced_sum(&atoms[..mid]).add(&balanced_sum(&atoms[mid..]))
    }
}

struct DistInner {
    kind: DistKind,
    /// Knuth–Yao level cache: `levels[j-1]` lists the atoms (0-based) whose
    /// expansion digit at level `j` is 1, ascending.
    levels: Mutex<Vec<Arc<Vec<usize>>>>,
}

/// An exactly-specified discrete probability distribution.
///
/// Finite supports are given by exact rationals summing to 1; the built-in
/// countable law [`DiscreteDistribution::geometric_one_over_e`] has
/// `P(X = k) = (1 − e^{-1})·e^{-(k-1)}` for `k = 1, 2, …` — the law of
/// `1 + ⌊E⌋` for a unit exponential `E`.
///
/// Cloning shares the underlying digit and boundary caches.
#[derive(Clone)]
pub struct DiscreteDistribution {
    inner: Arc<DistInner>,
}

impl fmt::Debug for DiscreteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.kind {
            DistKind::Finite { atoms, .. } => {
                write!(f, "DiscreteDistribution(finite, {} atoms)", atoms.len())
            }
            DistKind::FiniteReal { atoms, .. } => {
                write!(f, "DiscreteDistribution(finite real-backed, {} atoms)", atoms.len())
            }
            DistKind::Geometric(_) => write!(f, "DiscreteDistribution(geometric-1-over-e)"),
        }
    }
}

impl DiscreteDistribution {
    /// Build a finite distribution from `(numerator, denominator)` pairs.
    ///
    /// Every atom must be strictly positive and the probabilities must sum to
    /// exactly 1.
    pub fn from_rationals(atoms: &[(u64, u64)]) -> Result<Self, DistributionError> {
        Self::from_big_rationals(
            atoms
                .iter()
                .map(|&(n, d)| (BigInt::from(n), BigInt::from(d)))
                .collect(),
        )
    }

    /// [`Self::from_rationals`] with arbitrary-precision entries.
    pub fn from_big_rationals(
        entries: Vec<(BigInt, BigInt)>,
    ) -> Result<Self, DistributionError> {
        if entries.is_empty() {
            return Err(DistributionError::Empty);
        }
        for (i, (n, d)) in entries.iter().enumerate() {
            if d.is_zero() {
                return Err(DistributionError::ZeroDenominator { index: i + 1 });
            }
            if n.is_negative() || d.is_negative() {
                return Err(DistributionError::NegativeAtom { index: i + 1 });
            }
            if n.is_zero() {
                return Err(DistributionError::ZeroAtom { index: i + 1 });
            }
        }
        let mut den = BigInt::one();
        for (_, d) in &entries {
            den = den.lcm(d);
        }
        let scaled: Vec<BigInt> = entries.iter().map(|(n, d)| n * (&den / d)).collect();
        let total: BigInt = scaled.iter().sum();
        if total != den {
            return Err(DistributionError::MassNotOne {
                got: format!("{total}/{den}"),
            });
        }
        let mut cum_nums = Vec::with_capacity(entries.len() + 1);
        let mut acc = BigInt::zero();
        cum_nums.push(acc.clone());
        for s in &scaled {
            acc += s;
            cum_nums.push(acc.clone());
        }
        let term_depth = scaled
            .iter()
            .map(|s| {
                let g = s.gcd(&den);
                let reduced_den = (&den / g).magnitude().clone();
                if reduced_den.count_ones() == 1 {
                    Some((reduced_den.bits() - 1) as u32)
                } else {
                    None
                }
            })
            .collect();
        let atoms = scaled
            .iter()
            .map(|s| ProbabilityExpansion::from_ratio(s.clone(), den.clone()))
            .collect();
        Ok(DiscreteDistribution {
            inner: Arc::new(DistInner {
                kind: DistKind::Finite { atoms, cum_nums, den, term_depth },
                levels: Mutex::new(Vec::new()),
            }),
        })
    }

    /// Build a finite distribution whose atom probabilities are given as
    /// digit oracles — typically real-backed values such as `e^{-1/2}/(1 +
    /// e^{-1/2})` products.
    ///
    /// The probabilities must sum to exactly 1; since real-backed values can
    /// only be enclosed, the constructor verifies this to roughly 16
    /// fractional bits and trusts the caller beyond that. No atom may be 0.
    pub fn from_probability_expansions(
        atoms: Vec<ProbabilityExpansion>,
    ) -> Result<Self, DistributionError> {
        if atoms.is_empty() {
            return Err(DistributionError::Empty);
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.is_zero() {
                return Err(DistributionError::ZeroAtom { index: i + 1 });
            }
        }
        let k = 16 + (usize::BITS - atoms.len().leading_zeros());
        let mut lo = Dyadic::zero();
        let mut hi = Dyadic::zero();
        for a in &atoms {
            let e = a.value_enclosure(k);
            lo = lo.add(e.lo());
            hi = hi.add(e.hi());
        }
        if lo > Dyadic::one() || hi < Dyadic::one() {
            return Err(DistributionError::MassNotOne {
                got: format!("[{lo}, {hi}]"),
            });
        }
        Ok(DiscreteDistribution {
            inner: Arc::new(DistInner {
                kind: DistKind::FiniteReal { atoms, cum: Mutex::new(Vec::new()) },
                levels: Mutex::new(Vec::new()),
            }),
        })
    }

    /// The built-in countable law `P(X = k) = (1 − e^{-1})·e^{-(k-1)}`,
    /// `k ≥ 1` — the distribution of `1 + ⌊E⌋` for a unit exponential `E`.
    /// Its cumulative boundaries are `Q_k = 1 − e^{-k}`.
    pub fn geometric_one_over_e() -> Self {
        DiscreteDistribution {
            inner: Arc::new(DistInner {
                kind: DistKind::Geometric(GeometricTables::new()),
                levels: Mutex::new(Vec::new()),
            }),
        }
    }

    /// The fair coin: two atoms of probability 1/2.
    pub fn fair_coin() -> Self {
        Self::from_rationals(&[(1, 2), (1, 2)]).expect("fair coin is a valid law")
    }

    /// The uniform law on four atoms.
    pub fn uniform_four() -> Self {
        Self::from_rationals(&[(1, 4); 4]).expect("uniform-4 is a valid law")
    }

    /// The degenerate single-atom law (always samples 1, costs 0 bits).
    pub fn degenerate() -> Self {
        Self::from_rationals(&[(1, 1)]).expect("the point mass is a valid law")
    }

    /// Number of atoms, or `None` for countable support.
    pub fn support_size(&self) -> Option<usize> {
        match &self.inner.kind {
            DistKind::Finite { atoms, .. } | DistKind::FiniteReal { atoms, .. } => {
                Some(atoms.len())
            }
            DistKind::Geometric(_) => None,
        }
    }

    /// Whether the distribution is the degenerate single-atom law.
    pub fn is_singleton(&self) -> bool {
        self.support_size() == Some(1)
    }

    /// Probability of atom `value` (1-based) as a computable-real handle.
    pub fn atom_real(&self, value: usize) -> Real {
        assert!(value >= 1, "atoms are 1-based");
        match &self.inner.kind {
            DistKind::Finite { atoms, .. } | DistKind::FiniteReal { atoms, .. } => {
                assert!(value <= atoms.len(), "atom {value} out of range");
                atoms[value - 1].as_real()
            }
            DistKind::Geometric(g) => g.atom_real(value - 1),
        }
    }

    /// Digit oracle for atom `value` (1-based).
    pub fn atom_expansion(&self, value: usize) -> ProbabilityExpansion {
        assert!(value >= 1, "atoms are 1-based");
        match &self.inner.kind {
            DistKind::Finite { atoms, .. } | DistKind::FiniteReal { atoms, .. } => {
                assert!(value <= atoms.len(), "atom {value} out of range");
                atoms[value - 1].clone()
            }
            DistKind::Geometric(g) => g.atom_expansion(value - 1),
        }
    }

    /// Cumulative boundary `Q_l` for a real-backed finite distribution,
    /// `1 ≤ l ≤ n-1`.
    fn real_bound(&self, l: usize) -> Real {
        let DistKind::FiniteReal { atoms, cum } = &self.inner.kind else {
            unreachable!("real_bound is only used for real-backed supports")
        };
        let mut cache = cum.lock().unwrap();
        if cache.is_empty() {
            cache.resize(atoms.len() - 1, None);
        }
        if cache[l - 1].is_none() {
            cache[l - 1] = Some(balanced_sum(&atoms[..l]));
        }
        cache[l - 1].clone().unwrap()
    }

    /// Atoms (0-based) whose expansion digit at level `j ≥ 1` is 1,
    /// ascending — the Knuth–Yao leaves of that level. Cached.
    pub(crate) fn level_atoms(&self, j: u32) -> Result<Arc<Vec<usize>>, SampleError> {
        assert!(j >= 1, "levels are 1-based");
        let mut cache = self.inner.levels.lock().unwrap();
        while cache.len() < j as usize {
            let level = cache.len() as u32 + 1;
            let list = self.build_level(level)?;
            cache.push(Arc::new(list));
        }
        Ok(cache[j as usize - 1].clone())
    }

    fn build_level(&self, j: u32) -> Result<Vec<usize>, SampleError> {
        match &self.inner.kind {
            DistKind::Finite { atoms, .. } | DistKind::FiniteReal { atoms, .. } => {
                let mut v = Vec::new();
                for (i, a) in atoms.iter().enumerate() {
                    if a.expansion_digit(j)? == 1 {
                        v.push(i);
                    }
                }
                Ok(v)
            }
            DistKind::Geometric(g) => {
                // Only atoms with p ≥ 2^{-j} can have digit j set, and the
                // probabilities decrease in k, so scan until one is provably
                // below the threshold.
                let mut v = Vec::new();
                let threshold = Dyadic::one_half_pow(j);
                let mut k0 = 0usize;
                loop {
                    let p = g.atom_real(k0);
                    match p.compare_dyadic(&threshold, BOUNDARY_BUDGET) {
                        Ok(Ordering::Less) => break,
                        Ok(_) => {
                            if g.atom_expansion(k0).expansion_digit(j)? == 1 {
                                v.push(k0);
                            }
                            k0 += 1;
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                Ok(v)
            }
        }
    }

    /// Number of set digits of atom `atom0` (0-based) strictly before level
    /// `j` — the Knuth–Yao leaf rank.
    fn ky_rank(&self, atom0: usize, j: u32) -> Result<u128, SampleError> {
        let exp = match &self.inner.kind {
            DistKind::Finite { atoms, .. } | DistKind::FiniteReal { atoms, .. } => {
                atoms[atom0].clone()
            }
            DistKind::Geometric(g) => g.atom_expansion(atom0),
        };
        let mut rank: u128 = 0;
        for jj in 1..j {
            if exp.expansion_digit(jj)? == 1 {
                rank += 1;
            }
        }
        Ok(rank)
    }

    /// Classify `interval` against the cumulative cells: `Ok((Some(l), l))`
    /// when provably `interval ⊆ [Q_{l-1}, Q_l)` (1-based cell `l`),
    /// `Ok((None, l))` when it straddles the boundary `Q_l`. `hint` is a
    /// lower bound on the answer (cells are monotone under refinement).
    fn classify(
        &self,
        interval: &DyadicInterval,
        hint: usize,
    ) -> Result<(Option<usize>, usize), SampleError> {
        let lo = interval.lo_dyadic();
        let hi = interval.hi_dyadic();
        match &self.inner.kind {
            DistKind::Finite { cum_nums, den, .. } => {
                let n = cum_nums.len() - 1;
                let mut l = hint.clamp(1, n);
                // Smallest l with Q_l > lo; exists because lo < 1 = Q_n.
                while cmp_ratio_dyadic(&cum_nums[l], den, &lo) != Ordering::Greater {
                    l += 1;
                }
                let inside = cmp_ratio_dyadic(&cum_nums[l], den, &hi) != Ordering::Less;
                Ok((inside.then_some(l), l))
            }
            DistKind::FiniteReal { atoms, .. } => {
                let n = atoms.len();
                let mut l = hint.clamp(1, n);
                if !lo.is_zero() {
                    while l < n {
                        match self.real_bound(l).compare_dyadic(&lo, BOUNDARY_BUDGET) {
                            Ok(Ordering::Greater) => break,
                            Ok(_) => l += 1,
                            Err(e) => return Err(e.into()),
                        }
                    }
                }
                // Reaching l = n proves Q_{n-1} ≤ lo, and hi ≤ 1 = Q_n always.
                let inside = if l == n {
                    true
                } else if hi == Dyadic::one() {
                    false
                } else {
                    match self.real_bound(l).compare_dyadic(&hi, BOUNDARY_BUDGET) {
                        Ok(ord) => ord == Ordering::Greater,
                        Err(e) => return Err(e.into()),
                    }
                };
                Ok((inside.then_some(l), l))
            }
            DistKind::Geometric(g) => {
                let mut l = hint.max(1);
                if !lo.is_zero() {
                    loop {
                        match g.bound(l).compare_dyadic(&lo, BOUNDARY_BUDGET) {
                            Ok(Ordering::Greater) => break,
                            Ok(_) => l += 1,
                            Err(e) => return Err(e.into()),
                        }
                    }
                }
                // hi = 1 can never sit below a boundary Q_l < 1.
                let inside = if hi == Dyadic::one() {
                    false
                } else {
                    match g.bound(l).compare_dyadic(&hi, BOUNDARY_BUDGET) {
                        Ok(ord) => ord == Ordering::Greater,
                        Err(e) => return Err(e.into()),
                    }
                };
                Ok((inside.then_some(l), l))
            }
        }
    }
}

/// Exact comparison of the rational `num/den` (`den > 0`) against a dyadic.
fn cmp_ratio_dyadic(num: &BigInt, den: &BigInt, d: &Dyadic) -> Ordering {
    let e = d.exponent();
    if e >= 0 {
        num.cmp(&((d.mantissa() << e as usize) * den))
    } else {
        ((num.clone()) << (-e) as usize).cmp(&(d.mantissa() * den))
    }
}

/// Draw one sample with the lazy Knuth–Yao tree walk.
///
/// The walk maintains the node offset `v` within the current tree level;
/// after reading bit `b` it becomes `2v + b`, and the level's leaves (atoms
/// whose probability has digit 1 at that level, ascending) occupy the lowest
/// offsets. Expected bits consumed lie in `[H, H+2]`.
pub fn ky_sample<S: BitSource>(
    dist: &DiscreteDistribution,
    src: &mut S,
) -> Result<SampleOutcome, SampleError> {
    let start = src.consumed();
    if dist.is_singleton() {
        // The tree is a single root leaf: no bits needed.
        return Ok(SampleOutcome {
            value: 1,
            bits_used: 0,
            leaf: ExitLeaf { depth: 0, rank: 0 },
        });
    }
    let mut v: u128 = 0;
    for j in 1..=KY_DEPTH_CAP {
        let b = src.next_bit()?;
        v = 2 * v + u128::from(b);
        let ones = dist.level_atoms(j)?;
        let leaves = ones.len() as u128;
        if v < leaves {
            let atom0 = ones[v as usize];
            return Ok(SampleOutcome {
                value: atom0 + 1,
                bits_used: src.consumed() - start,
                leaf: ExitLeaf {
                    depth: j,
                    rank: dist.ky_rank(atom0, j)?,
                },
            });
        }
        v -= leaves;
    }
    Err(SampleError::DepthCapExceeded { cap: KY_DEPTH_CAP })
}

/// Draw one sample with the Han–Hoshi nested-interval method.
///
/// The dyadic interval pinned down by the bits read so far is tested against
/// the cumulative cells `[Q_{i-1}, Q_i)` *before* each read (so zero-bit
/// returns are possible); once it fits inside a cell the atom is determined.
/// Expected bits consumed lie in `[H, H+3]`.
pub fn hh_sample<S: BitSource>(
    dist: &DiscreteDistribution,
    src: &mut S,
) -> Result<SampleOutcome, SampleError> {
    let start = src.consumed();
    let mut interval = DyadicInterval::unit();
    let mut hint = 1usize;
    loop {
        let (cell, new_hint) = dist.classify(&interval, hint)?;
        hint = new_hint;
        if let Some(l) = cell {
            let rank = interval
                .lo_numerator()
                .to_u128()
                .expect("interval numerators fit u128 below the depth cap");
            return Ok(SampleOutcome {
                value: l,
                bits_used: src.consumed() - start,
                leaf: ExitLeaf { depth: interval.depth(), rank },
            });
        }
        if interval.depth() >= HH_DEPTH_CAP {
            return Err(SampleError::DepthCapExceeded { cap: HH_DEPTH_CAP });
        }
        interval.refine_mut(src.next_bit()?);
    }
}

/// One level of the Han–Hoshi enumeration (see [`hh_enumerate`]).
pub(crate) struct HhEnumeration {
    /// Terminal leaves found up to the cap: `(symbol 0-based, leaf)`.
    pub leaves: Vec<(usize, ExitLeaf)>,
    /// `per_level_straddlers[t]` = number of depth-`t` intervals that still
    /// straddle a cumulative boundary; `P(T > t)` is this count times
    /// `2^{-t}`.
    pub per_level_straddlers: Vec<u64>,
}

/// Breadth-first enumeration of the Han–Hoshi refinement tree to depth
/// `cap`, classifying every interval exactly.
pub(crate) fn hh_enumerate(
    dist: &DiscreteDistribution,
    cap: u32,
    collect_leaves: bool,
) -> Result<HhEnumeration, SampleError> {
    if collect_leaves {
        assert!(cap <= HH_DEPTH_CAP, "leaf ranks require depth ≤ {HH_DEPTH_CAP}");
    }
    let mut frontier = vec![(DyadicInterval::unit(), 1usize)];
    let mut leaves = Vec::new();
    let mut per_level = Vec::with_capacity(cap as usize + 1);
    for t in 0..=cap {
        let mut next = Vec::new();
        let mut straddlers = 0u64;
        for (iv, hint) in frontier {
            let (cell, l) = dist.classify(&iv, hint)?;
            match cell {
                Some(sym) => {
                    if collect_leaves {
                        let rank = iv
                            .lo_numerator()
                            .to_u128()
                            .expect("depth cap keeps numerators in u128");
                        leaves.push((sym - 1, ExitLeaf { depth: iv.depth(), rank }));
                    }
                }
                None => {
                    straddlers += 1;
                    if t < cap {
                        next.push((iv.refine(0), l));
                        next.push((iv.refine(1), l));
                    }
                }
            }
        }
        per_level.push(straddlers);
        frontier = next;
    }
    Ok(HhEnumeration { leaves, per_level_straddlers: per_level })
}

/// Depth from which every dyadic interval contains at most one interior
/// cumulative boundary (finite supports only).
fn separation_depth(cum_nums: &[BigInt], den: &BigInt) -> u32 {
    let n = cum_nums.len() - 1;
    if n <= 2 {
        return 0;
    }
    let mut t_req = 0u32;
    for i in 1..n - 1 {
        let gap = &cum_nums[i + 1] - &cum_nums[i];
        // Need 2^t > den/gap; bits(⌊den/gap⌋) + 2 suffices.
        let t = den.div_floor(&gap).bits() as u32 + 2;
        t_req = t_req.max(t);
    }
    t_req
}

/// Certified enclosure of the expected bit cost of [`ky_sample`].
///
/// The level masses `ℓ_j·2^{-j}` are summed exactly to `depth_cap`; the tail
/// is bracketed by `(cap+1)·(residual mass)` from below and by the worst-case
/// per-atom (finite) or per-level (countable) digit tails from above.
pub fn ky_expected_bits(
    dist: &DiscreteDistribution,
    depth_cap: u32,
) -> Result<RealEnclosure, SampleError> {
    if dist.is_singleton() {
        return Ok(RealEnclosure::point(Dyadic::zero()));
    }
    let cap = depth_cap.max(1);
    let mut sum = Dyadic::zero();
    let mut mass = Dyadic::zero();
    for j in 1..=cap {
        let l = dist.level_atoms(j)?.len() as u64;
        if l > 0 {
            sum = sum.add(&Dyadic::new(BigInt::from(l * u64::from(j)), -i64::from(j)));
            mass = mass.add(&Dyadic::new(BigInt::from(l), -i64::from(j)));
        }
    }
    let residual = Dyadic::one().sub(&mass);
    debug_assert!(!residual.is_negative(), "level masses exceeded 1");
    let lower = sum.add(&residual.mul_int(i64::from(cap) + 1));
    let tail_hi = match &dist.inner.kind {
        DistKind::Finite { term_depth, .. } => {
            // Each atom still unfinished at the cap contributes at most
            // Σ_{j>cap} j·2^{-j} = (cap+2)·2^{-cap}.
            let unfinished = term_depth
                .iter()
                .filter(|d| match d {
                    Some(s) => *s > cap,
                    None => true,
                })
                .count() as u64;
            Dyadic::new(
                BigInt::from(unfinished * (u64::from(cap) + 2)),
                -i64::from(cap),
            )
        }
        DistKind::FiniteReal { atoms, .. } => {
            // Real-backed expansions never provably terminate; assume all
            // atoms still contribute digit tails.
            Dyadic::new(
                BigInt::from(atoms.len() as u64 * (u64::from(cap) + 2)),
                -i64::from(cap),
            )
        }
        DistKind::Geometric(_) => {
            // ℓ_j ≤ j + 1 for this law, so the tail is at most
            // Σ_{j>cap} j(j+1)·2^{-j} = (cap² + 5·cap + 8)·2^{-cap}.
            let c = u64::from(cap);
            Dyadic::new(BigInt::from(c * c + 5 * c + 8), -i64::from(cap))
        }
    };
    Ok(RealEnclosure::new(lower, sum.add(&tail_hi)))
}

/// Certified enclosure of the expected bit cost of [`hh_sample`].
///
/// `E[T] = Σ_t P(T > t)` with `P(T > t)` equal to the exact number of
/// depth-`t` intervals straddling a cumulative boundary times `2^{-t}`.
/// For finite supports the cap is raised until every interval can straddle
/// at most one boundary, which makes the straddler counts non-increasing and
/// bounds the tail by the last level's mass.
pub fn hh_expected_bits(
    dist: &DiscreteDistribution,
    depth_cap: u32,
) -> Result<RealEnclosure, SampleError> {
    let cap = match &dist.inner.kind {
        DistKind::Finite { cum_nums, den, .. } => {
            depth_cap.max(1).max(separation_depth(cum_nums, den))
        }
        DistKind::FiniteReal { .. } => depth_cap.max(1),
        DistKind::Geometric(_) => depth_cap.max(8),
    };
    let en = hh_enumerate(dist, cap, false)?;
    let mut sum = Dyadic::zero();
    for (t, c) in en.per_level_straddlers.iter().enumerate() {
        if *c > 0 {
            sum = sum.add(&Dyadic::new(BigInt::from(*c), -(t as i64)));
        }
    }
    let last = *en.per_level_straddlers.last().unwrap_or(&0);
    let tail_hi = if last == 0 {
        Dyadic::zero()
    } else {
        match &dist.inner.kind {
            // Beyond the separation depth each straddler has at most one
            // straddling child, so P(T>t) ≤ last·2^{-cap} for t ≥ cap.
            DistKind::Finite { .. } => Dyadic::new(BigInt::from(last), -i64::from(cap)),
            // No separation certificate for real-backed boundaries; fall
            // back on straddlers(t) ≤ n−1.
            DistKind::FiniteReal { atoms, .. } => {
                Dyadic::new(BigInt::from(atoms.len() as u64 - 1), -i64::from(cap))
            }
            // Straddler counts are at most t+1 for this law, so the tail is
            // at most Σ_{t>cap} (t+1)·2^{-t} = (cap+3)·2^{-cap}.
            DistKind::Geometric(_) => {
                Dyadic::new(BigInt::from(u64::from(cap) + 3), -i64::from(cap))
            }
        }
    };
    Ok(RealEnclosure::new(sum.clone(), sum.add(&tail_hi)))
}

/// Binary entropy `H = Σ p_i·log2(1/p_i)` as a computable real.
pub fn entropy_discrete(dist: &DiscreteDistribution) -> Real {
    fn nats_tree(atoms: &[ProbabilityExpansion]) -> Real {
        if atoms.len() == 1 {
            let p = atoms[0].as_real();
            p.mul(&p.ln()).neg()
        } else {
            let mid = atoms.len() / 2;
            nats_tree(&atoms[..mid]).add(&nats_tree(&atoms[mid..]))
        }
    }
    match &dist.inner.kind {
        DistKind::Finite { atoms, .. } | DistKind::FiniteReal { atoms, .. } => {
            let interior: Vec<ProbabilityExpansion> =
                atoms.iter().filter(|a| !a.is_one()).cloned().collect();
            if interior.is_empty() {
                // Single-atom law: entropy 0.
                return Real::constant(Dyadic::zero());
            }
            nats_tree(&interior).div(&ln2_real())
        }
        DistKind::Geometric(_) => {
            // H·ln2 = −ln(1−e^{-1}) + 1/(e−1) = 1 − ln(e−1) + 1/(e−1).
            let one = Real::constant(Dyadic::one());
            let e = one.exp();
            let em1 = e.add_dyadic(&Dyadic::from_int(-1));
            one.sub(&em1.ln())
                .add(&one.div(&em1))
                .div(&ln2_real())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::ReplaySource;

    fn dist(atoms: &[(u64, u64)]) -> DiscreteDistribution {
        DiscreteDistribution::from_rationals(atoms).unwrap()
    }

    fn run_ky(d: &DiscreteDistribution, tape: &str) -> SampleOutcome {
        let mut src = ReplaySource::from_tape_str(tape).unwrap();
        ky_sample(d, &mut src).unwrap()
    }

    fn run_hh(d: &DiscreteDistribution, tape: &str) -> SampleOutcome {
        let mut src = ReplaySource::from_tape_str(tape).unwrap();
        hh_sample(d, &mut src).unwrap()
    }

    #[test]
    fn ky_hand_traces_half_quarter_quarter() {
        let d = dist(&[(1, 2), (1, 4), (1, 4)]);
        let a = run_ky(&d, "0");
        assert_eq!((a.value, a.bits_used), (1, 1));
        assert_eq!(a.leaf, ExitLeaf { depth: 1, rank: 0 });
        let b = run_ky(&d, "10");
        assert_eq!((b.value, b.bits_used), (2, 2));
        assert_eq!(b.leaf, ExitLeaf { depth: 2, rank: 0 });
        let c = run_ky(&d, "11");
        assert_eq!((c.value, c.bits_used), (3, 2));
        assert_eq!(c.leaf, ExitLeaf { depth: 2, rank: 0 });
    }

    #[test]
    fn ky_hand_traces_quarter_three_quarters() {
        let d = dist(&[(1, 4), (3, 4)]);
        // 3/4 = 0.11 has the only level-1 digit.
        let a = run_ky(&d, "0");
        assert_eq!((a.value, a.bits_used), (2, 1));
        assert_eq!(a.leaf.rank, 0);
        let b = run_ky(&d, "10");
        assert_eq!((b.value, b.bits_used), (1, 2));
        assert_eq!(b.leaf, ExitLeaf { depth: 2, rank: 0 });
        // 3/4's second leaf: one earlier set digit → rank 1.
        let c = run_ky(&d, "11");
        assert_eq!((c.value, c.bits_used), (2, 2));
        assert_eq!(c.leaf, ExitLeaf { depth: 2, rank: 1 });
    }

    #[test]
    fn singleton_needs_no_bits() {
        let d = dist(&[(1, 1)]);
        let mut empty = ReplaySource::from_bits(vec![]);
        let a = ky_sample(&d, &mut empty).unwrap();
        assert_eq!((a.value, a.bits_used, a.leaf.depth), (1, 0, 0));
        let mut empty = ReplaySource::from_bits(vec![]);
        let b = hh_sample(&d, &mut empty).unwrap();
        assert_eq!((b.value, b.bits_used, b.leaf.depth), (1, 0, 0));
    }

    #[test]
    fn hh_hand_traces_half_quarter_quarter() {
        let d = dist(&[(1, 2), (1, 4), (1, 4)]);
        let a = run_hh(&d, "0");
        assert_eq!((a.value, a.bits_used), (1, 1));
        let b = run_hh(&d, "10");
        assert_eq!((b.value, b.bits_used), (2, 2));
        assert_eq!(b.leaf, ExitLeaf { depth: 2, rank: 2 }); // [2/4, 3/4)
        let c = run_hh(&d, "11");
        assert_eq!((c.value, c.bits_used), (3, 2));
        assert_eq!(c.leaf, ExitLeaf { depth: 2, rank: 3 }); // [3/4, 1)
    }

    #[test]
    fn hh_seven_atom_benchmark_vector_trace() {
        // Q_1 = 2/32 = (0.00010)₂: four zeros pin [0, 1/16) ⊆ [0, Q_1).
        let d = dist(&[(1, 16), (5, 32), (5, 32), (9, 32), (3, 16), (1, 32), (1, 8)]);
        let a = run_hh(&d, "0000");
        assert_eq!((a.value, a.bits_used), (1, 4));
        assert_eq!(a.leaf, ExitLeaf { depth: 4, rank: 0 });
    }

    #[test]
    fn hh_quarter_three_quarters_traces() {
        let d = dist(&[(1, 4), (3, 4)]);
        assert_eq!(run_hh(&d, "00").value, 1);
        assert_eq!(run_hh(&d, "00").bits_used, 2);
        assert_eq!(run_hh(&d, "01").value, 2);
        assert_eq!(run_hh(&d, "1").value, 2);
        assert_eq!(run_hh(&d, "1").bits_used, 1);
    }

    #[test]
    fn geometric_traces_both_samplers() {
        let d = DiscreteDistribution::geometric_one_over_e();
        // p_1 = 1 − e^{-1} = 0.63212… = (0.101…)₂.
        let a = run_ky(&d, "0");
        assert_eq!((a.value, a.bits_used), (1, 1));
        // Level-1 and level-2 digit masses leave "10…" walking to level 3.
        let b = run_ky(&d, "100");
        assert_eq!((b.value, b.bits_used), (1, 3));
        assert_eq!(b.leaf, ExitLeaf { depth: 3, rank: 1 });
        // HH: [1/2, 5/8) sits inside [0, Q_1) = [0, 0.63212…).
        let c = run_hh(&d, "100");
        assert_eq!((c.value, c.bits_used), (1, 3));
        // [11/16, 12/16) ⊆ [Q_1, Q_2) = [0.63212…, 0.86466…) → second cell.
        let e = run_hh(&d, "1011");
        assert_eq!((e.value, e.bits_used), (2, 4));
    }

    #[test]
    fn tape_exhaustion_is_reported_with_count() {
        let d = dist(&[(1, 4), (3, 4)]);
        let mut src = ReplaySource::from_tape_str("1").unwrap();
        // "1" → v=1, not a leaf at level 1 (only 3/4 has digit 1 → ℓ₁=1);
        // the walk needs another bit.
        let err = ky_sample(&d, &mut src).unwrap_err();
        assert_eq!(
            err,
            SampleError::Source(SourceError::TapeExhausted { consumed: 1 })
        );
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            DiscreteDistribution::from_rationals(&[]).unwrap_err(),
            DistributionError::Empty,
        );
        assert_eq!(
            DiscreteDistribution::from_rationals(&[(1, 2), (0, 4), (1, 2)]).unwrap_err(),
            DistributionError::ZeroAtom { index: 2 },
        );
        assert_eq!(
            DiscreteDistribution::from_rationals(&[(1, 2), (1, 4)]).unwrap_err(),
            DistributionError::MassNotOne { got: "3/4".into() },
        );
        assert_eq!(
            DiscreteDistribution::from_rationals(&[(1, 0)]).unwrap_err(),
            DistributionError::ZeroDenominator { index: 1 },
        );
    }

    #[test]
    fn ky_expected_bits_hand_values() {
        // (1/2,1/4,1/4): one leaf at level 1, two at level 2 → exactly 1.5.
        let e = ky_expected_bits(&dist(&[(1, 2), (1, 4), (1, 4)]), 16).unwrap();
        assert_eq!(e.lo(), e.hi());
        assert_eq!(*e.lo(), Dyadic::new(BigInt::from(3), -1));
        // (1/3,2/3): one leaf on every level → Σ j·2^{-j} = 2 exactly.
        let e = ky_expected_bits(&dist(&[(1, 3), (2, 3)]), 48).unwrap();
        assert!(e.lo().to_f64() <= 2.0 && 2.0 <= e.hi().to_f64());
        assert!(e.width().to_f64() < 1e-9);
        // Singleton: zero bits.
        let e = ky_expected_bits(&dist(&[(1, 1)]), 8).unwrap();
        assert_eq!(*e.hi(), Dyadic::zero());
    }

    #[test]
    fn hh_expected_bits_hand_values() {
        // (1/4,3/4): straddlers are [0,1) and [0,1/2) only → exactly 1.5.
        let e = hh_expected_bits(&dist(&[(1, 4), (3, 4)]), 16).unwrap();
        assert_eq!(e.lo(), e.hi());
        assert_eq!(*e.lo(), Dyadic::new(BigInt::from(3), -1));
        // (1/2,1/4,1/4): also exactly 1.5.
        let e = hh_expected_bits(&dist(&[(1, 2), (1, 4), (1, 4)]), 16).unwrap();
        assert_eq!(*e.lo(), Dyadic::new(BigInt::from(3), -1));
        assert_eq!(e.lo(), e.hi());
        // Singleton: terminates before any bit.
        let e = hh_expected_bits(&dist(&[(1, 1)]), 8).unwrap();
        assert_eq!(*e.hi(), Dyadic::zero());
    }

    #[test]
    fn expected_bits_sit_in_entropy_bands() {
        let cases: Vec<DiscreteDistribution> = vec![
            dist(&[(1, 2), (1, 4), (1, 4)]),
            dist(&[(1, 3), (2, 3)]),
            dist(&[(1, 16), (5, 32), (5, 32), (9, 32), (3, 16), (1, 32), (1, 8)]),
            dist(&[(1, 5), (1, 5), (1, 5), (1, 5), (1, 5)]),
        ];
        for d in &cases {
            let h = entropy_discrete(d).enclose(48);
            let ky = ky_expected_bits(d, 64).unwrap();
            let hh = hh_expected_bits(d, 64).unwrap();
            let (h_lo, h_hi) = (h.lo().to_f64(), h.hi().to_f64());
            assert!(ky.lo().to_f64() >= h_lo - 1e-9, "KY below H for {d:?}");
            assert!(ky.hi().to_f64() <= h_hi + 2.0 + 1e-9, "KY above H+2 for {d:?}");
            assert!(hh.lo().to_f64() >= h_lo - 1e-9, "HH below H for {d:?}");
            assert!(hh.hi().to_f64() <= h_hi + 3.0 + 1e-9, "HH above H+3 for {d:?}");
        }
    }

    #[test]
    fn geometric_expected_bits_and_entropy() {
        let d = DiscreteDistribution::geometric_one_over_e();
        let h = entropy_discrete(&d);
        let hv = h.to_f64(50);
        assert!((hv - 1.5013433).abs() < 1e-5, "geometric entropy ≈ {hv}");
        let ky = ky_expected_bits(&d, 48).unwrap();
        assert!(ky.lo().to_f64() >= hv - 1e-6);
        assert!(ky.hi().to_f64() <= hv + 2.0 + 1e-6);
        let hh = hh_expected_bits(&d, 48).unwrap();
        assert!(hh.lo().to_f64() >= hv - 1e-6);
        assert!(hh.hi().to_f64() <= hv + 3.0 + 1e-6);
        assert!(hh.width().to_f64() < 1e-6);
    }

    #[test]
    fn entropy_hand_values() {
        let e = entropy_discrete(&dist(&[(1, 2), (1, 2)]));
        assert!((e.to_f64(50) - 1.0).abs() < 1e-12);
        let e = entropy_discrete(&dist(&[(1, 4), (3, 4)]));
        assert!((e.to_f64(50) - 0.811_278_124_459_132_8).abs() < 1e-12);
        let e = entropy_discrete(&dist(&[(1, 4), (1, 4), (1, 4), (1, 4)]));
        assert!((e.to_f64(50) - 2.0).abs() < 1e-12);
        let e = entropy_discrete(&dist(&[(1, 1)]));
        assert_eq!(e.to_f64(20), 0.0);
    }

    #[test]
    fn hh_leaf_enumeration_matches_sampling() {
        // Every enumerated leaf, replayed as a tape, reproduces its symbol.
        let d = dist(&[(1, 2), (1, 4), (1, 4)]);
        let en = hh_enumerate(&d, 8, true).unwrap();
        assert!(!en.leaves.is_empty());
        for (sym0, leaf) in &en.leaves {
            let mut bits = Vec::new();
            let mut num = leaf.rank;
            for _ in 0..leaf.depth {
                bits.push((num & 1) as u8);
                num >>= 1;
            }
            bits.reverse();
            let mut src = ReplaySource::from_bits(bits);
            let out = hh_sample(&d, &mut src).unwrap();
            assert_eq!(out.value, sym0 + 1);
            assert_eq!(out.leaf, *leaf);
        }
        // Leaf masses per symbol reproduce the probabilities (all dyadic
        // here, so the enumeration is complete).
        let mut mass = vec![Dyadic::zero(); 3];
        for (sym0, leaf) in &en.leaves {
            mass[*sym0] = mass[*sym0].add(&Dyadic::one_half_pow(leaf.depth));
        }
        assert_eq!(mass[0], Dyadic::new(BigInt::one(), -1));
        assert_eq!(mass[1], Dyadic::new(BigInt::one(), -2));
        assert_eq!(mass[2], Dyadic::new(BigInt::one(), -2));
    }
}
