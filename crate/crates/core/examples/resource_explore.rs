//! Resource estimates per variant and the per-layer variant search.
//!
//! cargo run --example resource_explore

use evgraph::conv_dataflow::Variant;
use evgraph::event_ingest::WindowConfig;
use evgraph::resource_plan::{explore, reduction_report, Budget, CostModelParams, LayerPlan};

fn main() -> evgraph::Result<()> {
    let params = CostModelParams::default();
    let window = WindowConfig::new(50_000_000, 256, 5)?;
    let layers = [LayerPlan::for_window(16, 32, &window)?, LayerPlan::for_window(16, 64, &window)?];

    for l in &layers {
        println!("layer {}→{} at size {}:", l.in_dim, l.out_dim, l.size);
        for v in Variant::ALL {
            let r = l.estimate(v, &params);
            println!("  {:<13} P = {:>2}  LUT {:>6}  DSP {:>4}  BRAM {:>4}", v.as_str(), l.lanes(v), r.lut, r.dsp, r.bram);
        }
    }
    for (l, r) in layers.iter().zip(reduction_report(&layers, &params)) {
        println!(
            "{}→{}: two-step LUT -{}%, DSP variant LUT -{}%",
            l.in_dim, l.out_dim, r.two_step_vs_baseline.lut, r.dsp_vs_baseline.lut
        );
    }

    let tight = Budget { lut: 60_000, ..Budget::ZCU104 };
    for budget in [Budget::ZCU104, tight, Budget { lut: 10_000, dsp: 100, bram: 100 }] {
        match explore(&layers, &budget, &params) {
            Ok(e) => println!(
                "budget {budget:?}: {:?}, binding {} ({:.1}%)",
                e.assignment.iter().map(Variant::as_str).collect::<Vec<_>>(),
                e.binding_resource,
                100.0 * e.utilization.lut.max(e.utilization.dsp).max(e.utilization.bram)
            ),
            Err(inf) => println!("budget {budget:?}: {inf}"),
        }
    }
    Ok(())
}
