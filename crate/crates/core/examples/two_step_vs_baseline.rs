//! Run both synchronous dataflows on the same random temporal channels,
//! compare outputs and count module operations.
//!
//! cargo run --example two_step_vs_baseline

use evgraph::conv_dataflow::{compare_channels, ConvLayer, CycleCounter, DiffStats, LayerRunner, TemporalChannel, Variant};
use evgraph::cycle_cost::closed_form_cycles;
use evgraph::quant_arith::WeightMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZE: u32 = 16;
const IN: usize = 16;
const OUT: usize = 32;

fn random_channel(rng: &mut ChaCha8Rng, tc: u32, density: f64) -> TemporalChannel {
    let mut ch = TemporalChannel::empty(SIZE, IN, tc, 0.05);
    for cy in 0..SIZE {
        for cx in 0..SIZE {
            if rng.gen_bool(density) {
                let f: Vec<i8> = (0..IN).map(|_| rng.gen_range(0..=100)).collect();
                ch.set(cx, cy, &f);
            }
        }
    }
    ch
}

fn main() -> evgraph::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w_feat = (0..IN * OUT).map(|_| rng.gen_range(-127..=127)).collect();
    let w_pos = (0..3 * OUT).map(|_| rng.gen_range(-127..=127)).collect();
    let weights = WeightMatrix::new(IN, OUT, w_feat, w_pos, 1.0 / 127.0)?;
    let layer = ConvLayer::from_scales(weights, 0.05, 0.25, Variant::BaselineLut)?;

    let channels: Vec<TemporalChannel> = (0..8).map(|tc| random_channel(&mut rng, tc, 0.3)).collect();

    let mut base_ops = CycleCounter::occupied();
    let mut two_ops = CycleCounter::occupied();
    let base = LayerRunner::with_variant(&layer, Variant::BaselineLut).run_window(&channels, &mut base_ops)?;
    let two = LayerRunner::with_variant(&layer, Variant::TwoStep).run_window(&channels, &mut two_ops)?;

    let mut stats = DiffStats::default();
    for (a, b) in base.iter().zip(&two) {
        stats.merge(&compare_channels(a, b)?);
    }
    println!(
        "{} output elements, {} differ ({:.1}%), max |diff| = {} LSB",
        stats.element_count,
        stats.differing,
        100.0 * stats.differing_fraction(),
        stats.max_abs_diff
    );
    println!("occupied-cell operations: baseline {}, two-step {}", base_ops.ops(), two_ops.ops());

    // a full grid costs the closed-form cycle counts
    let mut full = CycleCounter::full_grid();
    LayerRunner::with_variant(&layer, Variant::TwoStep).run_window(&channels[..1], &mut full)?;
    println!(
        "full-grid two-step cycles per channel at P = 1: {} (closed form {})",
        full.cycles(1),
        closed_form_cycles(Variant::TwoStep, SIZE, OUT as u32, 1)
    );
    Ok(())
}
