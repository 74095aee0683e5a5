//! End-to-end inference over an event stream: asynchronous convolution,
//! pooling into temporal channels, then the synchronous layers.

use serde::{Deserialize, Serialize};

use crate::config::{LoadedConfig, PipelineConfig, WeightsFile};
use crate::conv_dataflow::{
    async_conv, compare_channels, maxpool_relax, ChannelDump, ConvLayer, CycleCounter, DiffStats, FeatureDump,
    LayerDump, LayerRunner, TemporalChannel, Variant, WindowDump,
};
use crate::error::{Error, Result};
use crate::event_ingest::{normalize_to_grid, split_windows, CameraGeometry, Event, GridPos, Window, WindowConfig};
use crate::graph_builder::{event_to_vertex, PolarityEncoding, VertexStore};

/// Quantized layers plus the geometry they run on.
#[derive(Debug, Clone)]
pub struct Network {
    pub camera: CameraGeometry,
    pub window: WindowConfig,
    pub encoding: PolarityEncoding,
    pub async_layer: ConvLayer,
    pub sync_layers: Vec<ConvLayer>,
}

/// Output of one window. `layers[0]` holds the pooled asynchronous output,
/// `layers[i]` the output of synchronous layer `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub index: u64,
    pub start_ns: u64,
    pub events: usize,
    pub vertices: usize,
    pub layers: Vec<Vec<TemporalChannel>>,
    /// Single-module operations per synchronous layer, occupied cells only.
    pub sync_ops: Vec<u64>,
}

impl WindowResult {
    pub fn occupied_cells(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.iter().map(TemporalChannel::occupied_count).sum()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub windows: usize,
    pub events: usize,
    pub vertices: usize,
    /// Occupied pooled cells per layer, summed over windows.
    pub occupied_cells: Vec<usize>,
    pub sync_ops: Vec<u64>,
}

impl Network {
    pub fn new(config: &PipelineConfig, weights: &WeightsFile) -> Result<Self> {
        config.validate()?;
        let mut layers = weights.layers_for(config)?;
        let sync_layers = layers.split_off(1);
        let async_layer = layers.pop().expect("validated: at least one layer");
        Ok(Self {
            camera: config.camera,
            window: config.window,
            encoding: config.encoding(),
            async_layer,
            sync_layers,
        })
    }

    pub fn load(loaded: &LoadedConfig) -> Result<Self> {
        let weights = WeightsFile::load(&loaded.weights_path())?;
        Self::new(&loaded.config, &weights)
    }

    /// Same layers with every synchronous layer set to `variant`.
    pub fn with_variant(&self, variant: Variant) -> Self {
        Self {
            sync_layers: self.sync_layers.iter().map(|l| l.with_variant(variant)).collect(),
            ..self.clone()
        }
    }

    /// Rejects events outside the sensor.
    pub fn check_events(&self, events: &[Event]) -> Result<()> {
        match events.iter().find(|e| !self.camera.contains(e)) {
            Some(e) => Err(Error::OutOfSensor { x: e.x, y: e.y, width: self.camera.width, height: self.camera.height }),
            None => Ok(()),
        }
    }

    /// Builds the window's graph one event at a time and convolves each new
    /// vertex with the vertices already captured.
    pub fn async_stage(&self, window: &Window) -> Vec<(GridPos, Vec<i8>)> {
        let mut store = VertexStore::for_async(self.window.input_size);
        let mut out = Vec::new();
        for e in &window.events {
            let pos = normalize_to_grid(e, &self.camera, &self.window, window.start_ns);
            let v = event_to_vertex(e, pos, self.encoding);
            if store.contains(pos) {
                continue;
            }
            out.push((pos, async_conv(&store, &v, &self.async_layer)));
            store.insert_vertex(v);
        }
        out
    }

    pub fn pooled(&self, window: &Window) -> (usize, Vec<TemporalChannel>) {
        let features = self.async_stage(window);
        let channels = maxpool_relax(
            &features,
            self.window.input_size,
            self.async_layer.out_dim(),
            self.async_layer.scale_out,
        );
        (features.len(), channels)
    }

    pub fn run_window(&self, window: &Window) -> Result<WindowResult> {
        let (vertices, pooled) = self.pooled(window);
        let mut layers = vec![pooled];
        let mut sync_ops = Vec::with_capacity(self.sync_layers.len());
        for layer in &self.sync_layers {
            let mut counter = CycleCounter::occupied();
            let out = LayerRunner::new(layer).run_window(layers.last().expect("non-empty"), &mut counter)?;
            sync_ops.push(counter.ops());
            layers.push(out);
        }
        Ok(WindowResult { index: window.index, start_ns: window.start_ns, events: window.events.len(), vertices, layers, sync_ops })
    }

    pub fn run(&self, events: &[Event]) -> Result<Vec<WindowResult>> {
        self.check_events(events)?;
        split_windows(events, &self.window).iter().map(|w| self.run_window(w)).collect()
    }

    /// Runs the baseline and two-step dataflows of every synchronous layer
    /// on identical inputs. The configured variant's output feeds the next
    /// layer.
    pub fn compare(&self, events: &[Event]) -> Result<Vec<DiffStats>> {
        self.check_events(events)?;
        let mut stats = vec![DiffStats::default(); self.sync_layers.len()];
        for window in split_windows(events, &self.window) {
            let (_, mut input) = self.pooled(&window);
            for (layer, stat) in self.sync_layers.iter().zip(&mut stats) {
                let mut counter = CycleCounter::occupied();
                let base = LayerRunner::with_variant(layer, Variant::BaselineLut).run_window(&input, &mut counter)?;
                let two = LayerRunner::with_variant(layer, Variant::TwoStep).run_window(&input, &mut counter)?;
                for (a, b) in base.iter().zip(&two) {
                    stat.merge(&compare_channels(a, b)?);
                }
                input = if layer.variant == Variant::TwoStep { two } else { base };
            }
        }
        Ok(stats)
    }
}

pub fn summarize(results: &[WindowResult], layer_count: usize) -> RunSummary {
    let mut s = RunSummary {
        windows: results.len(),
        occupied_cells: vec![0; layer_count],
        sync_ops: vec![0; layer_count.saturating_sub(1)],
        ..RunSummary::default()
    };
    for r in results {
        s.events += r.events;
        s.vertices += r.vertices;
        for (acc, n) in s.occupied_cells.iter_mut().zip(r.occupied_cells()) {
            *acc += n;
        }
        for (acc, n) in s.sync_ops.iter_mut().zip(&r.sync_ops) {
            *acc += n;
        }
    }
    s
}

/// Serializable feature dump; channels without occupied cells are left out.
pub fn feature_dump(net: &Network, results: &[WindowResult]) -> FeatureDump {
    let windows = results
        .iter()
        .map(|r| WindowDump {
            window: r.index,
            start_ns: r.start_ns,
            layers: r
                .layers
                .iter()
                .enumerate()
                .map(|(i, channels)| LayerDump {
                    layer: i,
                    variant: if i == 0 { "async".into() } else { net.sync_layers[i - 1].variant.as_str().into() },
                    channels: channels.iter().filter(|c| c.occupied_count() > 0).map(ChannelDump::from).collect(),
                })
                .collect(),
        })
        .collect();
    FeatureDump { windows }
}
