//! Fixed-point requantization and the position-contribution table.
//!
//! cargo run --example requantization

use evgraph::quant_arith::{build_pos_lut, dot_position, requant, requant_round, requant_wide, PosLut, RequantParams, WeightMatrix};

fn main() -> evgraph::Result<()> {
    // scale_x · scale_w / scale_out
    let p = RequantParams::from_scales(1.0 / 127.0, 1.0 / 127.0, 0.02)?;
    println!("multiplier {:.6e} = {} · 2^-{}", p.multiplier(), p.mantissa, p.shift);

    for acc in [-100_000, -2_540, -1, 0, 1, 2_540, 100_000] {
        println!(
            "acc {acc:>8}: wide {:>5}  saturated {:>5}  16-bit {:?}",
            requant_wide(acc, p),
            requant(acc, p),
            requant_round(acc, p).ok()
        );
    }

    // requantizing position and feature parts separately stays within 1 LSB
    let (a, b) = (12_345, -6_789);
    let split = requant_wide(a, p) + requant_wide(b, p);
    println!("\nrequant({a} + {b}) = {}, sum of parts = {split}", requant_wide(a + b, p));

    let w = WeightMatrix::new(2, 4, vec![10, -20, 30, -40, 5, 6, 7, 8], vec![127, -127, 64, 0, 1, 2, 3, 4, -5, 50, -60, 70], 1.0 / 127.0)?;
    let lut = build_pos_lut(&w, RequantParams::from_multiplier(0.05)?)?;
    println!("\nposition table at M = 0.05: {} entries of {} outputs", lut.len(), lut.out_dim());
    for delta in [[-1, -1, -1], [0, 0, 0], [1, 0, -1], [1, 1, 1]] {
        let raw: Vec<i32> = (0..4).map(|k| dot_position(delta, &w, k)).collect();
        println!("  Δ = {delta:?} (index {:>2}): raw {raw:?} -> {:?}", PosLut::index(delta), lut.get(delta));
    }
    Ok(())
}
