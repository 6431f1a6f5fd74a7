//! Fair-bit sources, replay tapes, and the recycling queue.
//!
//! Every sampler in this crate draws randomness exclusively through the
//! [`BitSource`] trait, one fair bit at a time, and the consumed-bit counter is
//! the cost measure everything else reports on. Three implementations cover
//! all uses:
//!
//! - [`SeededSource`]: a deterministic pseudorandom stream for benchmarks.
//! - [`ReplaySource`]: a finite recorded tape for hand-traced fixtures and
//!   exhaustive enumeration; reading past the end is an error, never silent.
//! - [`FetchBitSource`]: a queue-first wrapper — drain queued bits before
//!   touching the fresh source, with the two kinds counted separately.
//!
//! A caution on the queue: bits pushed back mid-run by an extractor are fair
//! *unconditionally* but not conditioned on when they became available, so
//! serving them to later draws of the same process biases those draws.
//! [`crate::extract::batch_generate`] therefore recycles through an exact
//! carried interval instead; use `FetchBitSource` to stuff a stream with
//! bits whose values are independent of the process that consumes them.
//!
//! # Tape file format
//!
//! A tape is a text file of `'0'` and `'1'` characters; all ASCII whitespace is
//! ignored, any other character is a parse error. The same format is used when
//! the harness dumps extracted bits, so extractor output can be replayed as a
//! source.

use std::collections::VecDeque;

use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

/// Errors produced by bit sources.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SourceError {
    /// A replay source was asked for more bits than its tape holds.
    #[error("replay tape exhausted after {consumed} bits")]
    TapeExhausted {
        /// Bits that had been served before the failing call.
        consumed: u64,
    },
}

/// Errors from parsing a tape string or file.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TapeParseError {
    /// A character other than '0', '1', or whitespace was found.
    #[error("invalid tape character {found:?} at byte offset {offset}")]
    InvalidCharacter {
        /// The offending character.
        found: char,
        /// Byte offset in the input.
        offset: usize,
    },
}

/// A source of independent fair bits with exact cost accounting.
///
/// `consumed` increases by exactly one per emitted bit and is the stopping
/// time T that every sampler reports. Implementations must be deterministic
/// functions of their construction state: the same seed or tape always yields
/// the same bit sequence.
pub trait BitSource {
    /// Draw the next bit (0 or 1).
    fn next_bit(&mut self) -> Result<u8, SourceError>;

    /// Number of bits emitted by this source so far.
    ///
    /// For the plain sources every emitted bit is a fresh bit. Composite
    /// sources count *all* bits they serve — queue hits for
    /// [`FetchBitSource`] (fresh draws are tracked separately by
    /// [`FetchBitSource::fresh_consumed`]), recycled digits for the batch
    /// engine — so that a sampler's `consumed()` delta is always its
    /// per-sample cost `T`.
    fn consumed(&self) -> u64;
}

/// Deterministic seeded bit source.
///
/// The generator is ChaCha12 (`rand_chacha::ChaCha12Rng`). The 64-bit seed is
/// expanded with `ChaCha12Rng::seed_from_u64`, and bits are taken from
/// consecutive `next_u64()` words, least significant bit first. This mapping
/// is part of the crate's compatibility contract: the same seed yields the
/// same bit stream across runs, platforms, and parallel schedules.
#[derive(Debug, Clone)]
pub struct SeededSource {
    rng: rand_chacha::ChaCha12Rng,
    word: u64,
    bits_left_in_word: u8,
    consumed: u64,
}

impl SeededSource {
    /// Create a source from a 64-bit seed.
    pub fn from_seed(seed: u64) -> Self {
        SeededSource {
            rng: rand_chacha::ChaCha12Rng::seed_from_u64(seed),
            word: 0,
            bits_left_in_word: 0,
            consumed: 0,
        }
    }
}

impl BitSource for SeededSource {
    fn next_bit(&mut self) -> Result<u8, SourceError> {
        if self.bits_left_in_word == 0 {
            self.word = self.rng.next_u64();
            self.bits_left_in_word = 64;
        }
        let bit = (self.word & 1) as u8;
        self.word >>= 1;
        self.bits_left_in_word -= 1;
        self.consumed += 1;
        Ok(bit)
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// Derive a child seed for an independent parallel trial.
///
/// `split_seed(master, i)` applies the SplitMix64 finalizer to
/// `master + (i+1)·0x9E3779B97F4A7C15` (wrapping). Child streams for distinct
/// indices are decorrelated by the finalizer's avalanche, and the mapping is a
/// pure function, so trial results are independent of scheduling order.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Replay source: emits a recorded tape bit-for-bit, then errors.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    tape: Vec<u8>,
    cursor: usize,
}

impl ReplaySource {
    /// Wrap an explicit bit vector (each element 0 or 1).
    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        ReplaySource { tape: bits, cursor: 0 }
    }

    /// Parse a tape from text ('0'/'1', whitespace ignored).
    pub fn from_tape_str(text: &str) -> Result<Self, TapeParseError> {
        Ok(ReplaySource::from_bits(parse_tape(text)?))
    }

    /// Bits remaining on the tape.
    pub fn remaining(&self) -> usize {
        self.tape.len() - self.cursor
    }

    /// Total length of the underlying tape.
    pub fn len(&self) -> usize {
        self.tape.len()
    }

    /// Whether the tape is empty.
    pub fn is_empty(&self) -> bool {
        self.tape.is_empty()
    }
}

impl BitSource for ReplaySource {
    fn next_bit(&mut self) -> Result<u8, SourceError> {
        match self.tape.get(self.cursor) {
            Some(&b) => {
                self.cursor += 1;
                Ok(b)
            }
            None => Err(SourceError::TapeExhausted {
                consumed: self.cursor as u64,
            }),
        }
    }

    fn consumed(&self) -> u64 {
        self.cursor as u64
    }
}

/// Parse tape text into bits ('0'/'1', ASCII whitespace ignored).
pub fn parse_tape(text: &str) -> Result<Vec<u8>, TapeParseError> {
    let mut bits = Vec::with_capacity(text.len());
    for (offset, ch) in text.char_indices() {
        match ch {
            '0' => bits.push(0),
            '1' => bits.push(1),
            c if c.is_ascii_whitespace() => {}
            c => return Err(TapeParseError::InvalidCharacter { found: c, offset }),
        }
    }
    Ok(bits)
}

/// Format bits as tape text (no separators), the inverse of [`parse_tape`].
pub fn format_tape(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// Unbounded FIFO queue of recycled bits.
#[derive(Debug, Clone, Default)]
pub struct RecycleQueue {
    fifo: VecDeque<u8>,
}

impl RecycleQueue {
    /// Create an empty queue.
    pub fn new() -> Self {
        RecycleQueue::default()
    }

    /// Append bits in order; popping returns them first-in first-out.
    pub fn push_recycled(&mut self, bits: &[u8]) {
        self.fifo.extend(bits.iter().copied());
    }

    /// Pop the oldest bit, if any.
    pub fn pop(&mut self) -> Option<u8> {
        self.fifo.pop_front()
    }

    /// Current queue length.
    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    /// Whether the queue is empty.
    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }
}

/// Queue-first bit source: the batch engine's `FetchBit` discipline.
///
/// A fetch drains the recycle queue before touching the fallback source;
/// `fresh_consumed` counts only fallback draws. As a [`BitSource`], its
/// `consumed()` counts *all* fetches, so a sampler handed a `FetchBitSource`
/// reports the fetch count T_j that the batch accounting identity
/// N_n = ΣT_j − R_n + Q_n is stated in.
#[derive(Debug)]
pub struct FetchBitSource<S: BitSource> {
    queue: RecycleQueue,
    fallback: S,
    fetched: u64,
    fresh_consumed: u64,
}

impl<S: BitSource> FetchBitSource<S> {
    /// Wrap a fresh source with an empty queue.
    pub fn new(fallback: S) -> Self {
        FetchBitSource {
            queue: RecycleQueue::new(),
            fallback,
            fetched: 0,
            fresh_consumed: 0,
        }
    }

    /// Fetch one bit: queue head if available, else a fresh bit.
    pub fn fetch_bit(&mut self) -> Result<u8, SourceError> {
        self.fetched += 1;
        if let Some(b) = self.queue.pop() {
            return Ok(b);
        }
        let b = self.fallback.next_bit()?;
        self.fresh_consumed += 1;
        Ok(b)
    }

    /// Push recovered bits onto the recycle queue.
    pub fn push_recycled(&mut self, bits: &[u8]) {
        self.queue.push_recycled(bits);
    }

    /// Fresh bits drawn from the fallback so far (the N_n counter).
    pub fn fresh_consumed(&self) -> u64 {
        self.fresh_consumed
    }

    /// Current queue length (the Q_n term of the accounting identity).
    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Total fetches served (queue hits plus fresh draws).
    pub fn fetched(&self) -> u64 {
        self.fetched
    }

    /// Access the wrapped fresh source.
    pub fn fallback(&self) -> &S {
        &self.fallback
    }
}

impl<S: BitSource> BitSource for FetchBitSource<S> {
    fn next_bit(&mut self) -> Result<u8, SourceError> {
        self.fetch_bit()
    }

    fn consumed(&self) -> u64 {
        self.fetched
    }
}
