//! Parse a small event stream, cut it into windows and place each event on
//! the normalized grid.
//!
//! cargo run --example ingest_events

use evgraph::event_ingest::{normalize_to_grid, parse_events, split_windows, synthetic_events, CameraGeometry, WindowConfig};

const STREAM: &str = "\
# t_ns,x,y,p
0,10,20,1
1500000,303,239,0
49999999,150,120,1
50000000,0,0,0
120000000,42,42,1
";

fn main() -> evgraph::Result<()> {
    let cam = CameraGeometry::new(304, 240)?;
    let window = WindowConfig::new(50_000_000, 256, 5)?;

    let events = parse_events(STREAM)?;
    for w in split_windows(&events, &window) {
        println!("window {} starts at {} ns, {} events", w.index, w.start_ns, w.events.len());
        for e in &w.events {
            let g = normalize_to_grid(e, &cam, &window, w.start_ns);
            println!("  {e:<22} -> grid ({:>3}, {:>3}, {:>3})", g.gx, g.gy, g.gt);
        }
    }

    // windows that receive no events are skipped, so indices can jump
    let synthetic = synthetic_events(7, 20_000, &cam, 500_000_000);
    let windows = split_windows(&synthetic, &window);
    println!(
        "\nsynthetic: {} events over {} windows (first index {}, last {})",
        synthetic.len(),
        windows.len(),
        windows.first().map_or(0, |w| w.index),
        windows.last().map_or(0, |w| w.index)
    );
    Ok(())
}
