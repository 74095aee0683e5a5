//! Command implementations behind the `evgraph` binary. Each returns a
//! [`Report`] or a [`CommandError`] carrying the process exit code.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{generate_weights, LoadedConfig};
use crate::cycle_cost::{reference_configs, sizing_csv, sizing_table, SizingConfig, SizingRow, REFERENCE_OUT_DIMS};
use crate::error::Error;
use crate::event_ingest::{parse_events, DEFAULT_CLOCK_NS};
use crate::pipeline::{feature_dump, summarize, Network};
use crate::resource_plan::{explore, reduction_report, LayerPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_EQUIVALENCE: i32 = 4;
pub const EXIT_INFEASIBLE: i32 = 5;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config_digest: Option<String>,
    pub tool_version: String,
    pub payload: serde_json::Value,
}

impl Report {
    fn new(command: &str, config: Option<&LoadedConfig>, payload: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            config_digest: config.map(|c| c.digest.clone()),
            tool_version: TOOL_VERSION.into(),
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports are plain JSON values") + "\n"
    }
}

#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub message: String,
    /// Emitted alongside the error when the command still produced a result.
    pub report: Option<Box<Report>>,
}

impl CommandError {
    fn config(e: impl fmt::Display) -> Self {
        Self { code: EXIT_CONFIG, message: e.to_string(), report: None }
    }

    fn data(e: impl fmt::Display) -> Self {
        Self { code: EXIT_DATA, message: e.to_string(), report: None }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CommandError {}

pub type CommandResult<T> = std::result::Result<T, CommandError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl std::str::FromStr for Format {
    type Err = CommandError;

    fn from_str(s: &str) -> CommandResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CommandError::config(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

fn load_config(path: &Path) -> CommandResult<LoadedConfig> {
    LoadedConfig::load(path).map_err(CommandError::config)
}

fn load_network(config: &LoadedConfig) -> CommandResult<Network> {
    Network::load(config).map_err(CommandError::config)
}

fn load_events(path: &Path) -> CommandResult<Vec<crate::event_ingest::Event>> {
    let text = fs::read_to_string(path).map_err(|e| CommandError::data(Error::io(path, e)))?;
    parse_events(&text).map_err(|e| CommandError::data(format!("{}: {e}", path.display())))
}

/// Runs the full pipeline and optionally writes the feature dump.
pub fn cmd_sim(config: &Path, events: &Path, out: Option<&Path>) -> CommandResult<Report> {
    let cfg = load_config(config)?;
    let net = load_network(&cfg)?;
    let events = load_events(events)?;
    let results = net.run(&events).map_err(CommandError::data)?;
    let summary = summarize(&results, cfg.config.layers.len());
    if let Some(out) = out {
        let dump = feature_dump(&net, &results);
        let text = serde_json::to_string(&dump).map_err(|e| CommandError::data(Error::json(out, e)))?;
        fs::write(out, text + "\n").map_err(|e| CommandError::data(Error::io(out, e)))?;
    }
    Ok(Report::new("sim", Some(&cfg), json!({ "summary": summary })))
}

/// Baseline vs. two-step on identical inputs, per synchronous layer.
pub fn cmd_compare(config: &Path, events: &Path) -> CommandResult<Report> {
    let cfg = load_config(config)?;
    let net = load_network(&cfg)?;
    let events = load_events(events)?;
    let stats = net.compare(&events).map_err(CommandError::data)?;
    let layers: Vec<_> = stats
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "layer": i + 1,
                "max_abs_diff": s.max_abs_diff,
                "differing": s.differing,
                "element_count": s.element_count,
                "differing_fraction": s.differing_fraction(),
            })
        })
        .collect();
    let worst = stats.iter().map(|s| s.max_abs_diff).max().unwrap_or(0);
    let report = Report::new("compare", Some(&cfg), json!({ "layers": layers, "max_abs_diff": worst }));
    if worst > 1 {
        return Err(CommandError {
            code: EXIT_EQUIVALENCE,
            message: format!("dataflows differ by {worst} LSB (bound is 1)"),
            report: Some(Box::new(report)),
        });
    }
    Ok(report)
}

fn size_rows(config: Option<&LoadedConfig>, paper_table: bool) -> CommandResult<Vec<SizingRow>> {
    if paper_table {
        return sizing_table(&reference_configs(), &REFERENCE_OUT_DIMS, DEFAULT_CLOCK_NS).map_err(CommandError::config);
    }
    let Some(cfg) = config else {
        return Err(CommandError::config("size needs --config or --paper-table"));
    };
    let c = &cfg.config;
    let configs = if c.sizing.is_empty() {
        vec![SizingConfig { time_window_ns: c.window.time_window_ns, size: c.window.pooled_size() }]
    } else {
        c.sizing.clone()
    };
    let mut out_dims: Vec<u32> = c.sync_layers().iter().map(|l| l.out_dim as u32).collect();
    if out_dims.is_empty() {
        out_dims = REFERENCE_OUT_DIMS.to_vec();
    }
    sizing_table(&configs, &out_dims, c.window.clock_ns).map_err(CommandError::config)
}

/// Multiplier sizing as CSV text or a JSON report.
pub fn cmd_size(config: Option<&Path>, paper_table: bool, format: Format) -> CommandResult<String> {
    let cfg = config.map(load_config).transpose()?;
    let rows = size_rows(cfg.as_ref(), paper_table)?;
    Ok(match format {
        Format::Csv => sizing_csv(&rows),
        Format::Json => {
            let flagged = rows.iter().filter(|r| r.is_flagged()).count();
            Report::new("size", cfg.as_ref(), json!({ "rows": rows, "flagged_rows": flagged })).to_json()
        }
    })
}

/// Variant assignment under the configured device budget.
pub fn cmd_explore(config: &Path) -> CommandResult<Report> {
    let cfg = load_config(config)?;
    let c = &cfg.config;
    let Some(budget) = c.budget else {
        return Err(CommandError::config("explore needs a `budget` in the configuration"));
    };
    let params = c.cost_model();
    let layers = c
        .sync_layers()
        .iter()
        .map(|l| LayerPlan::for_window(l.in_dim, l.out_dim, &c.window))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(CommandError::config)?;
    let reductions = reduction_report(&layers, &params);
    match explore(&layers, &budget, &params) {
        Ok(e) => Ok(Report::new(
            "explore",
            Some(&cfg),
            json!({ "layers": layers, "exploration": e, "reductions": reductions }),
        )),
        Err(inf) => Err(CommandError {
            code: EXIT_INFEASIBLE,
            message: inf.to_string(),
            report: Some(Box::new(Report::new("explore", Some(&cfg), json!({ "layers": layers, "infeasible": inf })))),
        }),
    }
}

/// Writes seeded weights for the configured layers. Defaults: the config's
/// seed and weights path.
pub fn cmd_gen_weights(config: &Path, seed: Option<u64>, out: Option<&Path>) -> CommandResult<Report> {
    let cfg = load_config(config)?;
    let seed = seed.unwrap_or(cfg.config.seed);
    let path: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.weights_path());
    let weights = generate_weights(&cfg.config, seed);
    weights.save(&path).map_err(CommandError::data)?;
    let layers: Vec<_> = weights
        .layers
        .iter()
        .map(|l| json!({ "in_dim": l.in_dim, "out_dim": l.out_dim, "scale_x": l.scale_x, "scale_out": l.scale_out }))
        .collect();
    Ok(Report::new("gen-weights", Some(&cfg), json!({ "seed": seed, "layers": layers })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert_eq!("xml".parse::<Format>().unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn paper_table_without_config() {
        let csv = cmd_size(None, true, Format::Csv).unwrap();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 7 * 3);
        assert_eq!(cmd_size(None, false, Format::Json).unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn missing_config_is_a_config_error() {
        let err = cmd_explore(Path::new("/nonexistent/evgraph.json")).unwrap_err();
        assert_eq!(err.code, EXIT_CONFIG);
    }
}
