//! Four ways to sample a unit exponential to accuracy ε, with very
//! different bit budgets.
//!
//! * `Inversion` — refine a uniform seed until `−ln(1−u)` is pinned to a
//!   width-2ε window: near-optimal, about `log2(1/ε) + log2(e)` bits.
//! * `SplitInversion` — a geometric integer part (Han–Hoshi) plus an
//!   inversion of the fractional law: same leading term, useful when the
//!   fractional oracle is cheaper to evaluate.
//! * `ConvolutionRaw` — one Bernoulli per fractional digit at exactly two
//!   expected bits each: simple, but twice the leading term.
//! * `ConvolutionJointKy` — one Knuth–Yao walk over the joint law of all
//!   `k` fractional digits: buys back the wasted bit per digit, at the
//!   price of a `2^k`-atom table (guarded by a block-size cap).
//!
//! Run with: `cargo run --example exponential_routes`

use coinflow::continuous::{exp_sample, ExpRoute};
use coinflow::exact::Dyadic;
use coinflow::source::{split_seed, SeededSource};

fn main() {
    let k = 10u32;
    let eps = Dyadic::one_half_pow(k);
    let trials = 2_000u64;
    const LOG2_E: f64 = std::f64::consts::LOG2_E;

    println!("unit exponential at eps = 1/2^{k}, {trials} seeded trials each:\n");
    println!(
        "information lower bound: log2(1/eps) + log2(e) - 1 = {:.4} bits\n",
        f64::from(k) + LOG2_E - 1.0
    );

    for (route, name) in [
        (ExpRoute::Inversion, "inversion"),
        (ExpRoute::SplitInversion, "split-inversion"),
        (ExpRoute::ConvolutionRaw, "convolution (raw digits)"),
        (ExpRoute::ConvolutionJointKy, "convolution (joint Knuth-Yao)"),
    ] {
        let mut total = 0u64;
        let mut sample_sum = 0.0f64;
        for i in 0..trials {
            let mut src = SeededSource::from_seed(split_seed(0xE4, i));
            let s = exp_sample(&eps, &mut src, route).expect("sampling succeeds");
            total += s.bits_used;
            sample_sum += s.y.to_f64();
        }
        println!(
            "  {name:<30} mean cost {:>7.3} bits   sample mean {:.4} (E[X] = 1)",
            total as f64 / trials as f64,
            sample_sum / trials as f64
        );
    }

    // The joint-block route refuses absurd table sizes rather than building
    // a 2^40-atom law.
    let tiny = Dyadic::one_half_pow(40);
    let mut src = SeededSource::from_seed(1);
    let err = exp_sample(&tiny, &mut src, ExpRoute::ConvolutionJointKy).unwrap_err();
    println!("\njoint route at eps = 1/2^40: {err}");

    // Every route is exact about its promise: |X - y| <= eps pathwise, so
    // outputs of different routes driven by the same bits may differ, but
    // each is a certified ε-approximation of its own exponential variate.
    let mut src = SeededSource::from_seed(9);
    let s = exp_sample(&eps, &mut src, ExpRoute::Inversion).expect("sampling succeeds");
    println!(
        "\none inversion draw: y = {} ~ {:.6} after {} bits (eps = {})",
        s.y,
        s.y.to_f64(),
        s.bits_used,
        s.epsilon
    );
}
