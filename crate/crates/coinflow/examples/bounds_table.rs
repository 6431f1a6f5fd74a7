//! How many coin flips does an ε-accurate sample *have* to cost?
//!
//! For a density with differential entropy 𝓔 bits on ℝ^d, accuracy ε in an
//! ℓ_p norm, any sampler must spend at least
//! `𝓔 + d·log2(1/ε) − log2 V_{d,p}` expected bits, where `V_{d,p}` is the
//! unit-ball volume. Partitioning space into ε-cells and drawing the cell
//! with Han–Hoshi gets within a constant gap of that floor — the gap
//! depends only on `d`, `p`, and the discrete sampler, never on ε or the
//! density.
//!
//! Run with: `cargo run --example bounds_table`

use coinflow::bounds::{
    bound_gap, diff_entropy_bits, exponential_partition_entropy_bits, lower_bound_bits,
    unit_ball_volume, CatalogLaw, Norm,
};
use coinflow::exact::Dyadic;
use coinflow::extract::SamplerAlg;

fn main() {
    println!("unit-ball volumes V_d,p (certified enclosure midpoints):");
    println!("    d     p=1        p=2        p=inf");
    for d in 1..=6u32 {
        println!(
            "  {:>3} {:>10.5} {:>10.5} {:>10.5}",
            d,
            unit_ball_volume(d, Norm::P(1.0)).midpoint().to_f64(),
            unit_ball_volume(d, Norm::P(2.0)).midpoint().to_f64(),
            unit_ball_volume(d, Norm::Infinity).midpoint().to_f64(),
        );
    }

    println!("\ndifferential entropies (bits), evaluated from exact reals:");
    for law in [
        CatalogLaw::Uniform,
        CatalogLaw::Exponential,
        CatalogLaw::TruncatedExponential,
        CatalogLaw::Maxwell,
        CatalogLaw::StdNormal,
    ] {
        println!("  {law:?}: {:+.9}", diff_entropy_bits(law).to_f64(60));
    }

    let eps = Dyadic::one_half_pow(12);
    println!("\ntwo-sided cost bounds at eps = 1/2^12 (d = 1, max norm):");
    println!("  law                      lower      upper (KY cells)   gap");
    for law in [
        CatalogLaw::Uniform,
        CatalogLaw::Exponential,
        CatalogLaw::Maxwell,
        CatalogLaw::StdNormal,
    ] {
        let e = diff_entropy_bits(law).to_f64(60);
        let lo = lower_bound_bits(e, 1, &eps, Norm::Infinity);
        let gap = bound_gap(1, Norm::Infinity, SamplerAlg::KnuthYao);
        println!("  {law:<22?} {lo:>9.4}  {:>9.4}          {gap:.1}", lo + gap);
    }

    // In higher dimension the ℓ_2 ball shrinks, which *raises* the floor.
    println!("\nstandard normal, eps = 1/2^8, Euclidean norm:");
    for d in [1u32, 2, 4, 8] {
        let e = f64::from(d) * diff_entropy_bits(CatalogLaw::StdNormal).to_f64(60);
        let eps8 = Dyadic::one_half_pow(8);
        let lo = lower_bound_bits(e, d, &eps8, Norm::P(2.0));
        let gap = bound_gap(d, Norm::P(2.0), SamplerAlg::HanHoshi);
        println!(
            "  d = {d}: lower {lo:>9.4} bits, upper {:.4}, gap {gap:.4}",
            lo + gap
        );
    }

    // The partition upper bound is constructive: the entropy of the
    // exponential's 2ε-cell law really does approach 𝓔 + log2(1/h).
    println!("\nexponential ε-cell entropies vs the density bound:");
    for k in [3u32, 6, 9, 12] {
        let h = Dyadic::one_half_pow(k);
        let cells = exponential_partition_entropy_bits(&h).to_f64(60);
        let floor =
            diff_entropy_bits(CatalogLaw::Exponential).to_f64(60) + f64::from(k);
        println!(
            "  cell width 1/2^{k:<2}: H(cells) = {cells:.6}, 𝓔 + log2(1/h) = {floor:.6}, \
             excess {:+.2e}",
            cells - floor
        );
    }
}
