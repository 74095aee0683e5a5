//! Load a bundled experiment configuration, run a synthetic recording
//! through every layer and compare the two synchronous dataflows.
//!
//! cargo run --release --example end_to_end

use std::path::Path;

use evgraph::config::LoadedConfig;
use evgraph::event_ingest::synthetic_events;
use evgraph::pipeline::{summarize, Network};

fn main() -> evgraph::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/experiment_16x32.json");
    let config = LoadedConfig::load(&path)?;
    let net = Network::load(&config)?;
    println!("config digest {}", &config.digest[..16]);

    let events = synthetic_events(config.config.seed, 20_000, &net.camera, 150_000_000);
    let results = net.run(&events)?;
    let summary = summarize(&results, config.config.layers.len());
    println!(
        "{} windows, {} events, {} vertices, occupied cells per layer {:?}",
        summary.windows, summary.events, summary.vertices, summary.occupied_cells
    );
    println!("synchronous module operations per layer: {:?}", summary.sync_ops);

    for (i, s) in net.compare(&events)?.iter().enumerate() {
        println!(
            "sync layer {}: {} elements, {:.2}% differ, max |diff| {}",
            i + 1,
            s.element_count,
            100.0 * s.differing_fraction(),
            s.max_abs_diff
        );
    }
    Ok(())
}
