//! The uniform law has zero cost wobble: an ε-accurate draw from `[0,1)`
//! costs exactly `min{t : 2^{-t} <= 2ε}` bits — deterministically.
//!
//! Interval inversion reads bits until the spanned output range fits in a
//! width-2ε window and then releases the midpoint; for the identity
//! quantile the range *is* the dyadic interval, so the stopping time never
//! varies. This is the floor every other law's sampler is measured against.
//!
//! Run with: `cargo run --example uniform_deterministic_cost`

use coinflow::continuous::uniform_sample;
use coinflow::exact::Dyadic;
use coinflow::source::{split_seed, SeededSource};

fn main() {
    println!("eps          draws  bits per draw (all equal)");
    for k in [1u32, 2, 4, 8, 12, 16, 20] {
        let eps = Dyadic::one_half_pow(k);
        let mut costs = Vec::new();
        for i in 0..64u64 {
            let mut src = SeededSource::from_seed(split_seed(u64::from(k), i));
            let s = uniform_sample(&eps, &mut src).expect("sampling succeeds");
            // Pathwise guarantee: the released midpoint is within ε of
            // every uniform value compatible with the bits read.
            assert!(s.bits_used == costs.first().copied().unwrap_or(s.bits_used));
            costs.push(s.bits_used);
        }
        let expected = u64::from(k) - 1; // min{t : 2^{-t} <= 2^{-(k-1)}}
        assert_eq!(costs[0], expected);
        println!("1/2^{k:<8} {:>5}  {}", costs.len(), costs[0]);
    }

    // ε >= 1/2 needs no bits at all: the whole of [0,1) fits the window.
    let mut src = SeededSource::from_seed(42);
    let s = uniform_sample(&Dyadic::one_half_pow(1), &mut src).expect("sampling succeeds");
    println!(
        "\neps = 1/2: {} bits, output {} (the interval midpoint)",
        s.bits_used, s.y
    );

    // The outputs themselves are exact dyadic rationals, not floats.
    let mut src = SeededSource::from_seed(7);
    let s = uniform_sample(&Dyadic::one_half_pow(6), &mut src).expect("sampling succeeds");
    println!(
        "eps = 1/2^6: output {} = {} after {} bits",
        s.y,
        s.y.to_f64(),
        s.bits_used
    );
}
