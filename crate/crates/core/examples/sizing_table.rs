//! Parallel multiplier sizing for the reference configurations and a custom
//! one.
//!
//! cargo run --example sizing_table

use evgraph::cycle_cost::{reference_configs, sizing_csv, sizing_row, sizing_table, SizingConfig, REFERENCE_OUT_DIMS};

fn main() -> evgraph::Result<()> {
    let rows = sizing_table(&reference_configs(), &REFERENCE_OUT_DIMS, 5)?;
    println!("{:>6} {:>5} {:>8}   baseline P      two-step P     decrease %", "ms", "size", "T_cc");
    for r in &rows {
        let col = |f: &dyn Fn(&evgraph::cycle_cost::SizingCell) -> u64| {
            r.cells.iter().map(|c| format!("{:>4}", f(c))).collect::<String>()
        };
        println!(
            "{:>6} {:>5} {:>8}  {}   {}   {}{}",
            r.time_window_ms(),
            r.size,
            r.t_cc,
            col(&|c| c.p_baseline),
            col(&|c| c.p_twostep),
            col(&|c| c.decrease_pct as u64),
            if r.is_flagged() { "  (differs from published)" } else { "" }
        );
    }

    let custom = sizing_row(SizingConfig::ms(40, 64), &[32, 64], 5)?;
    println!("\n{}", sizing_csv(&[custom]));
    Ok(())
}
