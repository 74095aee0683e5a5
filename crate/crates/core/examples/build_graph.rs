//! Build the asynchronous vertex store for one window and inspect the
//! neighbourhood of a vertex.
//!
//! cargo run --example build_graph

use evgraph::event_ingest::{normalize_to_grid, split_windows, synthetic_events, CameraGeometry, WindowConfig};
use evgraph::graph_builder::{event_to_vertex, PolarityEncoding, VertexStore, ASYNC_RADIUS};

fn main() -> evgraph::Result<()> {
    let cam = CameraGeometry::new(304, 240)?;
    let window = WindowConfig::new(50_000_000, 64, 5)?;
    let encoding = PolarityEncoding::default();
    println!("polarity levels: on = {}, off = {}", encoding.level(), -encoding.level());

    let events = synthetic_events(11, 5_000, &cam, 50_000_000);
    let w = &split_windows(&events, &window)[0];

    let mut store = VertexStore::for_async(window.input_size);
    let mut dropped = 0;
    for e in &w.events {
        let pos = normalize_to_grid(e, &cam, &window, w.start_ns);
        if !store.insert_vertex(event_to_vertex(e, pos, encoding)) {
            dropped += 1;
        }
    }
    println!("{} events -> {} vertices ({dropped} landed on taken cells)", w.events.len(), store.len());

    let (busiest, neighbours) = store
        .vertices()
        .iter()
        .map(|v| (v, store.find_neighbors(v.pos)))
        .max_by_key(|(_, n)| n.len())
        .expect("window has vertices");
    println!(
        "vertex at {:?} has {} neighbours within R = {ASYNC_RADIUS}; nearest in scan order:",
        busiest.pos,
        neighbours.len()
    );
    for n in neighbours.iter().take(5) {
        println!("  {:?} feature {:?}", n.pos, n.feature);
    }
    Ok(())
}
