//! Cycle budgets and parallel-multiplier sizing for the synchronous layers.
//!
//! A layer receives a new temporal channel every `T_CC` cycles and must
//! finish one channel in that time. The baseline needs `SIZE² · 9 · OUT`
//! cycles with its two vector-multiplication modules, the two-step method
//! `SIZE² · (OUT + 5)` with one. Parallelism grows in powers of two until the
//! schedule fits.

use serde::{Deserialize, Serialize};

use crate::conv_dataflow::{CycleCounter, Variant};
use crate::error::{Error, Result};

/// Cycles available per temporal channel: `W / (SIZE · clk)`.
pub fn t_cc(time_window_ns: u64, size: u32, clock_ns: u64) -> Result<u64> {
    let denominator = size as u64 * clock_ns;
    if denominator == 0 || time_window_ns == 0 {
        return Err(Error::Config("time window, size and clock must be positive".into()));
    }
    if !time_window_ns.is_multiple_of(denominator) {
        return Err(Error::Inexact { numerator: time_window_ns, denominator });
    }
    Ok(time_window_ns / denominator)
}

/// Baseline cycles per channel with two parallel multiplier modules.
pub fn n_cc_baseline(size: u32, out_dim: u32) -> u64 {
    (size as u64).pow(2) * 9 * out_dim as u64
}

/// Two-step cycles per channel with one multiplier module: `OUT` self-loop
/// products plus 5 buffer-read cycles per cell.
pub fn n_cc_twostep(size: u32, out_dim: u32) -> u64 {
    (size as u64).pow(2) * (out_dim as u64 + 5)
}

/// Smallest k with `needed ≤ budget · 2^k`.
fn doublings(needed: u64, budget: u64) -> u32 {
    let mut k = 0;
    while needed > budget.saturating_mul(1 << k) {
        k += 1;
    }
    k
}

/// Parallel multipliers needed to fit one channel into `budget` cycles.
pub fn size_multipliers(variant: Variant, size: u32, out_dim: u32, budget: u64) -> u64 {
    assert!(budget > 0, "cycle budget must be positive");
    match variant {
        Variant::BaselineLut | Variant::BaselineDsp => 2 << doublings(n_cc_baseline(size, out_dim), budget),
        Variant::TwoStep => 1 << doublings(n_cc_twostep(size, out_dim), budget),
    }
}

/// round_half_up((p_b − p_t) / p_b · 100).
pub fn decrease_pct(p_baseline: u64, p_twostep: u64) -> u32 {
    assert!(p_baseline >= p_twostep && p_twostep >= 1);
    ((200 * (p_baseline - p_twostep) + p_baseline) / (2 * p_baseline)) as u32
}

/// Closed-form cycles of a full-grid channel pass at `lanes` multipliers.
pub fn closed_form_cycles(variant: Variant, size: u32, out_dim: u32, lanes: u64) -> u64 {
    match variant {
        Variant::BaselineLut | Variant::BaselineDsp => (2 * n_cc_baseline(size, out_dim)).div_ceil(lanes),
        Variant::TwoStep => n_cc_twostep(size, out_dim).div_ceil(lanes),
    }
}

/// Cycles charged by an instrumented dataflow run at `lanes` multipliers.
pub fn count_cycles(run: &CycleCounter, lanes: u64) -> u64 {
    run.cycles(lanes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetCheck {
    pub cycles: u64,
    pub budget: u64,
    pub within_budget: bool,
}

pub fn check_budget(cycles: u64, budget: u64) -> BudgetCheck {
    BudgetCheck { cycles, budget, within_budget: cycles <= budget }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizingConfig {
    pub time_window_ns: u64,
    pub size: u32,
}

impl SizingConfig {
    pub const fn ms(time_window_ms: u64, size: u32) -> Self {
        Self { time_window_ns: time_window_ms * 1_000_000, size }
    }
}

/// A published multiplier-sizing row: window (ms), size, baseline and
/// two-step counts for OUT = 32, 64, 128.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceRow {
    pub config: SizingConfig,
    pub throughput: u64,
    pub p_baseline: [u64; 3],
    pub p_twostep: [u64; 3],
    pub decrease_pct: [u32; 3],
}

pub const REFERENCE_OUT_DIMS: [u32; 3] = [32, 64, 128];

const fn reference(ms: u64, size: u32, throughput: u64, pb: [u64; 3], pt: [u64; 3], dec: [u32; 3]) -> ReferenceRow {
    ReferenceRow { config: SizingConfig::ms(ms, size), throughput, p_baseline: pb, p_twostep: pt, decrease_pct: dec }
}

/// Published sizing for the 200 MHz reference design.
pub const REFERENCE_TABLE: [ReferenceRow; 7] = [
    reference(50, 32, 312_500, [2, 4, 8], [1, 1, 1], [50, 75, 88]),
    reference(50, 64, 156_250, [16, 32, 64], [1, 2, 4], [94, 94, 94]),
    reference(100, 32, 625_000, [2, 2, 4], [1, 1, 1], [50, 50, 75]),
    reference(100, 64, 312_500, [8, 16, 32], [1, 1, 2], [88, 94, 94]),
    reference(100, 128, 156_250, [64, 128, 256], [8, 16, 32], [88, 88, 88]),
    reference(30, 32, 187_500, [4, 8, 16], [1, 1, 1], [75, 88, 94]),
    reference(30, 64, 93_750, [32, 64, 128], [2, 4, 8], [94, 94, 94]),
];

pub fn reference_configs() -> Vec<SizingConfig> {
    REFERENCE_TABLE.iter().map(|r| r.config).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizingCell {
    pub out_dim: u32,
    pub p_baseline: u64,
    pub p_twostep: u64,
    pub decrease_pct: u32,
}

/// A computed cell that disagrees with the published table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub out_dim: u32,
    pub column: String,
    pub computed: u64,
    pub published: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingRow {
    pub time_window_ns: u64,
    pub size: u32,
    pub t_cc: u64,
    pub cells: Vec<SizingCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub discrepancies: Vec<Discrepancy>,
}

impl SizingRow {
    pub fn time_window_ms(&self) -> f64 {
        self.time_window_ns as f64 / 1e6
    }

    pub fn is_flagged(&self) -> bool {
        !self.discrepancies.is_empty()
    }
}

fn discrepancies(config: SizingConfig, cells: &[SizingCell]) -> Vec<Discrepancy> {
    let Some(reference) = REFERENCE_TABLE.iter().find(|r| r.config == config) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for cell in cells {
        let Some(i) = REFERENCE_OUT_DIMS.iter().position(|&d| d == cell.out_dim) else {
            continue;
        };
        let columns = [
            ("p_baseline", cell.p_baseline, reference.p_baseline[i]),
            ("p_twostep", cell.p_twostep, reference.p_twostep[i]),
            ("decrease_pct", cell.decrease_pct as u64, reference.decrease_pct[i] as u64),
        ];
        for (column, computed, published) in columns {
            if computed != published {
                out.push(Discrepancy { out_dim: cell.out_dim, column: column.into(), computed, published });
            }
        }
    }
    out
}

pub fn sizing_row(config: SizingConfig, out_dims: &[u32], clock_ns: u64) -> Result<SizingRow> {
    let budget = t_cc(config.time_window_ns, config.size, clock_ns)?;
    let cells: Vec<SizingCell> = out_dims
        .iter()
        .map(|&out_dim| {
            let p_baseline = size_multipliers(Variant::BaselineLut, config.size, out_dim, budget);
            let p_twostep = size_multipliers(Variant::TwoStep, config.size, out_dim, budget);
            SizingCell { out_dim, p_baseline, p_twostep, decrease_pct: decrease_pct(p_baseline, p_twostep) }
        })
        .collect();
    let discrepancies = if clock_ns == crate::event_ingest::DEFAULT_CLOCK_NS {
        discrepancies(config, &cells)
    } else {
        Vec::new()
    };
    Ok(SizingRow { time_window_ns: config.time_window_ns, size: config.size, t_cc: budget, cells, discrepancies })
}

pub fn sizing_table(configs: &[SizingConfig], out_dims: &[u32], clock_ns: u64) -> Result<Vec<SizingRow>> {
    configs.iter().map(|&c| sizing_row(c, out_dims, clock_ns)).collect()
}

#[derive(Debug, Serialize)]
struct CsvRecord {
    time_window_ms: String,
    size: u32,
    throughput: u64,
    out_dim: u32,
    p_baseline: u64,
    p_twostep: u64,
    decrease_pct: u32,
}

fn format_ms(ns: u64) -> String {
    if ns.is_multiple_of(1_000_000) {
        (ns / 1_000_000).to_string()
    } else {
        format!("{}", ns as f64 / 1e6)
    }
}

/// Long-format CSV, one record per (row, out_dim). Flagged cells are listed
/// in trailing `#` comment lines.
pub fn sizing_csv(rows: &[SizingRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        for cell in &row.cells {
            w.serialize(CsvRecord {
                time_window_ms: format_ms(row.time_window_ns),
                size: row.size,
                throughput: row.t_cc,
                out_dim: cell.out_dim,
                p_baseline: cell.p_baseline,
                p_twostep: cell.p_twostep,
                decrease_pct: cell.decrease_pct,
            })
            .expect("in-memory csv write");
        }
    }
    if rows.is_empty() {
        w.write_record([
            "time_window_ms", "size", "throughput", "out_dim", "p_baseline", "p_twostep", "decrease_pct",
        ])
        .expect("in-memory csv write");
    }
    let mut text = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    for row in rows {
        for d in &row.discrepancies {
            text.push_str(&format!(
                "# discrepancy: time_window_ms={} size={} out_dim={} {} computed={} published={}\n",
                format_ms(row.time_window_ns),
                row.size,
                d.out_dim,
                d.column,
                d.computed,
                d.published
            ));
        }
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const MS: u64 = 1_000_000;

    #[test]
    fn throughput_examples() {
        assert_eq!(t_cc(50 * MS, 32, 5).unwrap(), 312_500);
        assert_eq!(t_cc(100 * MS, 128, 5).unwrap(), 156_250);
        assert_eq!(t_cc(30 * MS, 64, 5).unwrap(), 93_750);
        assert!(matches!(t_cc(50 * MS, 3, 7), Err(Error::Inexact { .. })));
        assert!(t_cc(50 * MS, 0, 5).is_err());
    }

    #[test]
    fn cycle_formulas() {
        assert_eq!(n_cc_baseline(32, 32), 294_912);
        assert_eq!(n_cc_baseline(64, 32), 1_179_648);
        assert_eq!(n_cc_baseline(1, 1), 9);
        assert_eq!(n_cc_twostep(64, 64), 282_624);
        assert_eq!(n_cc_twostep(32, 128), 136_192);
        assert_eq!(n_cc_twostep(1, 1), 6);
    }

    #[test]
    fn multiplier_sizing() {
        assert_eq!(size_multipliers(Variant::BaselineLut, 64, 32, 156_250), 16);
        assert_eq!(size_multipliers(Variant::TwoStep, 64, 128, 156_250), 4);
        assert_eq!(size_multipliers(Variant::BaselineLut, 128, 128, 156_250), 256);
        assert_eq!(size_multipliers(Variant::TwoStep, 32, 32, 312_500), 1);
        assert_eq!(size_multipliers(Variant::BaselineDsp, 64, 32, 156_250), 16);
        // exactly on budget needs no doubling
        assert_eq!(size_multipliers(Variant::TwoStep, 1, 1, 6), 1);
        assert_eq!(size_multipliers(Variant::TwoStep, 1, 1, 5), 2);
    }

    #[test]
    fn decrease_rounding() {
        assert_eq!(decrease_pct(16, 1), 94);
        assert_eq!(decrease_pct(2, 1), 50);
        assert_eq!(decrease_pct(8, 1), 88);
        assert_eq!(decrease_pct(4, 4), 0);
    }

    #[test]
    fn closed_form_budget_example() {
        let cycles = closed_form_cycles(Variant::BaselineLut, 64, 32, 16);
        assert_eq!(cycles, 147_456);
        assert!(check_budget(cycles, 156_250).within_budget);
        assert_eq!(closed_form_cycles(Variant::BaselineLut, 7, 3, 2), n_cc_baseline(7, 3));
        assert_eq!(closed_form_cycles(Variant::TwoStep, 7, 3, 1), n_cc_twostep(7, 3));
    }

    #[test]
    fn empty_table() {
        assert!(sizing_table(&[], &REFERENCE_OUT_DIMS, 5).unwrap().is_empty());
        assert!(sizing_csv(&[]).starts_with("time_window_ms,size,throughput"));
    }

    #[test]
    fn custom_row_from_formulas() {
        let row = sizing_row(SizingConfig::ms(40, 64), &[32], 5).unwrap();
        assert_eq!(row.t_cc, 125_000);
        // 1 179 648 / 125 000 ≈ 9.4, so four doublings of the base pair
        let cell = row.cells[0];
        assert_eq!(cell.p_baseline, 2 * 16);
        // 4096 · 37 = 151 552 → 2
        assert_eq!(cell.p_twostep, 2);
        assert_eq!(cell.decrease_pct, 94);
        assert!(!row.is_flagged());
    }

    #[test]
    fn size_128_row_is_flagged() {
        let row = sizing_row(SizingConfig::ms(100, 128), &REFERENCE_OUT_DIMS, 5).unwrap();
        let twostep: Vec<u64> = row.cells.iter().map(|c| c.p_twostep).collect();
        assert_eq!(twostep, vec![4, 8, 16]);
        let flagged: Vec<(u32, u64, u64)> = row
            .discrepancies
            .iter()
            .filter(|d| d.column == "p_twostep")
            .map(|d| (d.out_dim, d.computed, d.published))
            .collect();
        assert_eq!(flagged, vec![(32, 4, 8), (64, 8, 16), (128, 16, 32)]);
    }

    #[test]
    fn csv_layout() {
        let rows = sizing_table(&[SizingConfig::ms(50, 32)], &[32, 64], 5).unwrap();
        let csv = sizing_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time_window_ms,size,throughput,out_dim,p_baseline,p_twostep,decrease_pct");
        assert_eq!(lines[1], "50,32,312500,32,2,1,50");
        assert_eq!(lines[2], "50,32,312500,64,4,1,75");
        assert_eq!(lines.len(), 3);
        assert_eq!(format_ms(12_500_000), "12.5");
    }
}
