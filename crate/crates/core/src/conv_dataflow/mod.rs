//! Functional model of the convolution stages.
//!
//! The asynchronous stage convolves each arriving vertex with its `R = 3`
//! neighbourhood, Relaxing MaxPool folds the result into temporal channels,
//! and the synchronous stage runs one of two dataflows per layer:
//!
//! - **baseline**: every candidate feature is extended with its position
//!   difference, multiplied, accumulated and requantized once;
//! - **two-step**: self-loop products are requantized once per cell into a
//!   buffer, then the requantized position contribution from a 27-entry
//!   table is added before the max.
//!
//! Both produce int8 outputs that differ by at most one LSB.

mod compare;
mod dump;
mod sync;

pub use compare::{compare_channels, DiffStats};
pub use dump::{ChannelDump, FeatureDump, LayerDump, WindowDump};
pub use sync::{
    conv_baseline, conv_baseline_traced, conv_twostep, conv_twostep_traced, BaselineLayer,
    ConvLayer, CountMode, CycleCounter, LayerRunner, SelfLoopBuffer, TwoStepLayer, READ_PORTS,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::event_ingest::GridPos;
use crate::graph_builder::{GridVertex, VertexStore};
use crate::quant_arith::{dot_extended, requant};

/// Hardware variant of a synchronous convolution module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    BaselineLut,
    BaselineDsp,
    TwoStep,
}

impl Variant {
    /// In tie-break order.
    pub const ALL: [Variant; 3] = [Variant::BaselineLut, Variant::BaselineDsp, Variant::TwoStep];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::BaselineLut => "baseline_lut",
            Variant::BaselineDsp => "baseline_dsp",
            Variant::TwoStep => "two_step",
        }
    }

    pub fn is_baseline(&self) -> bool {
        !matches!(self, Variant::TwoStep)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub in_dim: usize,
    pub out_dim: usize,
    pub size: u32,
    pub variant: Variant,
}

/// One `size × size` grid of optional feature vectors covering a slice of
/// the time window. Features are stored densely, row-major by (cy, cx).
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalChannel {
    pub size: u32,
    pub dim: usize,
    pub tc_index: u32,
    pub scale: f64,
    occupied: Vec<bool>,
    features: Vec<i8>,
}

impl TemporalChannel {
    pub fn empty(size: u32, dim: usize, tc_index: u32, scale: f64) -> Self {
        let cells = (size * size) as usize;
        Self {
            size,
            dim,
            tc_index,
            scale,
            occupied: vec![false; cells],
            features: vec![0; cells * dim],
        }
    }

    fn cell(&self, cx: u32, cy: u32) -> usize {
        (cy * self.size + cx) as usize
    }

    pub fn is_occupied(&self, cx: u32, cy: u32) -> bool {
        self.occupied[self.cell(cx, cy)]
    }

    pub fn get(&self, cx: u32, cy: u32) -> Option<&[i8]> {
        let c = self.cell(cx, cy);
        self.occupied[c].then(|| &self.features[c * self.dim..(c + 1) * self.dim])
    }

    /// Grid-bounds-checked lookup with signed coordinates.
    pub fn get_signed(&self, cx: i64, cy: i64) -> Option<&[i8]> {
        let s = self.size as i64;
        if cx < 0 || cy < 0 || cx >= s || cy >= s {
            return None;
        }
        self.get(cx as u32, cy as u32)
    }

    pub fn set(&mut self, cx: u32, cy: u32, feature: &[i8]) {
        assert_eq!(feature.len(), self.dim, "feature dimension");
        let c = self.cell(cx, cy);
        self.occupied[c] = true;
        self.features[c * self.dim..(c + 1) * self.dim].copy_from_slice(feature);
    }

    /// Elementwise max into the cell, occupying it if empty.
    pub fn merge_max(&mut self, cx: u32, cy: u32, feature: &[i8]) {
        let c = self.cell(cx, cy);
        if !self.occupied[c] {
            self.set(cx, cy, feature);
            return;
        }
        let dst = &mut self.features[c * self.dim..(c + 1) * self.dim];
        for (d, &s) in dst.iter_mut().zip(feature) {
            *d = (*d).max(s);
        }
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Occupied cells in row-major order as `(cx, cy, feature)`.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, &[i8])> + '_ {
        (0..self.size).flat_map(move |cy| {
            (0..self.size).filter_map(move |cx| self.get(cx, cy).map(|f| (cx, cy, f)))
        })
    }

    pub fn same_occupancy(&self, other: &TemporalChannel) -> bool {
        self.size == other.size && self.occupied == other.occupied
    }
}

/// The channel being convolved and its predecessor in the same window.
#[derive(Debug, Clone, Copy)]
pub struct ChannelPair<'a> {
    pub current: &'a TemporalChannel,
    pub previous: Option<&'a TemporalChannel>,
}

impl<'a> ChannelPair<'a> {
    pub fn new(current: &'a TemporalChannel, previous: Option<&'a TemporalChannel>) -> Self {
        Self { current, previous }
    }

    pub fn first(current: &'a TemporalChannel) -> Self {
        Self { current, previous: None }
    }
}

/// Which channel a candidate slot reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotSource {
    Current,
    Previous,
}

/// A neighbourhood slot of the synchronous stage: Δ = (Δx, Δy, Δt).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub delta: [i32; 3],
}

impl Slot {
    pub fn source(&self) -> SlotSource {
        if self.delta[2] == 0 {
            SlotSource::Current
        } else {
            SlotSource::Previous
        }
    }
}

const fn slot(dx: i32, dy: i32, dt: i32) -> Slot {
    Slot { delta: [dx, dy, dt] }
}

/// The 18 slots read per vertex (self, 9 in the previous channel, 8 in the
/// current one), in enumeration order.
pub const CANDIDATE_SLOTS: [Slot; 18] = [
    slot(0, 0, 0),
    slot(-1, -1, -1),
    slot(0, -1, -1),
    slot(1, -1, -1),
    slot(-1, 0, -1),
    slot(0, 0, -1),
    slot(1, 0, -1),
    slot(-1, 1, -1),
    slot(0, 1, -1),
    slot(1, 1, -1),
    slot(-1, -1, 0),
    slot(0, -1, 0),
    slot(1, -1, 0),
    slot(-1, 0, 0),
    slot(1, 0, 0),
    slot(-1, 1, 0),
    slot(0, 1, 0),
    slot(1, 1, 0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate<'a> {
    pub feature: &'a [i8],
    pub delta: [i32; 3],
}

impl<'a> ChannelPair<'a> {
    /// Feature stored at `slot` relative to cell (cx, cy), if any.
    pub fn lookup(&self, cx: u32, cy: u32, slot: Slot) -> Option<&'a [i8]> {
        let [dx, dy, _] = slot.delta;
        let channel = match slot.source() {
            SlotSource::Current => self.current,
            SlotSource::Previous => self.previous?,
        };
        channel.get_signed(cx as i64 + dx as i64, cy as i64 + dy as i64)
    }
}

/// Occupied candidates of cell (cx, cy): self first, then the previous
/// channel, then the current one, each sorted by (Δy, Δx).
pub fn enumerate_candidates<'a>(pair: &ChannelPair<'a>, cx: u32, cy: u32) -> Vec<Candidate<'a>> {
    debug_assert!(pair.current.is_occupied(cx, cy));
    CANDIDATE_SLOTS
        .iter()
        .filter_map(|&s| {
            pair.lookup(cx, cy, s)
                .map(|feature| Candidate { feature, delta: s.delta })
        })
        .collect()
}

/// Real-valued weights of the linear map φ, laid out like
/// [`WeightMatrix`](crate::quant_arith::WeightMatrix).
#[derive(Debug, Clone, PartialEq)]
pub struct FloatWeights {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w_feat: Vec<f64>,
    pub w_pos: Vec<f64>,
}

impl FloatWeights {
    pub fn dequantize(w: &crate::quant_arith::WeightMatrix) -> Self {
        Self {
            in_dim: w.in_dim,
            out_dim: w.out_dim,
            w_feat: w.w_feat.iter().map(|&q| q as f64 * w.scale_w).collect(),
            w_pos: w.w_pos.iter().map(|&q| q as f64 * w.scale_w).collect(),
        }
    }

    fn phi(&self, x: &[f64], delta: [f64; 3]) -> Vec<f64> {
        (0..self.out_dim)
            .map(|k| {
                let f: f64 = (0..self.in_dim).map(|i| x[i] * self.w_feat[i * self.out_dim + k]).sum();
                let p: f64 = (0..3).map(|d| delta[d] * self.w_pos[d * self.out_dim + k]).sum();
                f + p
            })
            .collect()
    }
}

/// Real-arithmetic PointNetConv: elementwise max of φ([x_j ; Δ_j]) over the
/// self-loop (Δ = 0) and every neighbour.
pub fn pointnet_float(x_self: &[f64], neighbors: &[(Vec<f64>, [f64; 3])], w: &FloatWeights) -> Vec<f64> {
    let mut out = w.phi(x_self, [0.0; 3]);
    for (x, delta) in neighbors {
        for (o, v) in out.iter_mut().zip(w.phi(x, *delta)) {
            *o = o.max(v);
        }
    }
    out
}

fn max_requant<'a>(
    candidates: impl Iterator<Item = (&'a [i8], [i32; 3])>,
    layer: &ConvLayer,
) -> Vec<i8> {
    let mut out = vec![i8::MIN; layer.weights.out_dim];
    for (x, delta) in candidates {
        for (k, o) in out.iter_mut().enumerate() {
            *o = (*o).max(requant(dot_extended(x, delta, &layer.weights, k), layer.requant));
        }
    }
    out
}

fn grid_delta(from: GridPos, to: GridPos) -> [i32; 3] {
    [
        to.gx as i32 - from.gx as i32,
        to.gy as i32 - from.gy as i32,
        to.gt as i32 - from.gt as i32,
    ]
}

/// Quantized convolution of a freshly inserted vertex over itself and the
/// previously captured vertices within the store's radius.
pub fn async_conv(store: &VertexStore, v: &GridVertex, layer: &ConvLayer) -> Vec<i8> {
    let neighbors = store.find_neighbors(v.pos);
    let candidates = std::iter::once((v.feature.as_slice(), [0; 3])).chain(
        neighbors
            .iter()
            .map(|u| (u.feature.as_slice(), grid_delta(v.pos, u.pos))),
    );
    max_requant(candidates, layer)
}

/// Relaxing MaxPool 4×4: vertex (gx, gy, gt) lands in cell (gx/4, gy/4) of
/// temporal channel gt/4, merging by elementwise max. Returns all
/// `input_size / 4` channels of the window in order, empty ones included.
pub fn maxpool_relax(
    vertices: &[(GridPos, Vec<i8>)],
    input_size: u32,
    dim: usize,
    scale: f64,
) -> Vec<TemporalChannel> {
    let size = input_size / 4;
    let mut channels: Vec<TemporalChannel> =
        (0..size).map(|tc| TemporalChannel::empty(size, dim, tc, scale)).collect();
    for (pos, feature) in vertices {
        channels[(pos.gt / 4) as usize].merge_max(pos.gx / 4, pos.gy / 4, feature);
    }
    channels
}

/// Nanoseconds covered by one temporal channel.
pub fn channel_span_ns(time_window_ns: u64, input_size: u32) -> u64 {
    time_window_ns / (input_size / 4) as u64
}
