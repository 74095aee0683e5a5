//! Synchronous convolution dataflows and their cycle instrumentation.

use crate::error::{Error, Result};
use crate::quant_arith::{
    build_pos_lut, dot_extended, dot_feature, requant, requant_wide, saturate_i8, PosLut,
    RequantParams, WeightMatrix,
};

use super::{ChannelPair, TemporalChannel, Variant, CANDIDATE_SLOTS};

/// Buffer reads per cycle in the two-step second phase: two dual-port
/// buffers.
pub const READ_PORTS: usize = 4;

/// Which grid cells the cycle counter charges for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Every cell, occupied or not, as the fixed-latency hardware does.
    FullGrid,
    /// Occupied cells only.
    Occupied,
}

/// Counts single-module operations issued by a dataflow: one per
/// candidate-product in the baseline, one per self-loop product or buffer
/// read cycle in the two-step method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCounter {
    mode: CountMode,
    ops: u64,
}

impl CycleCounter {
    pub fn new(mode: CountMode) -> Self {
        Self { mode, ops: 0 }
    }

    pub fn full_grid() -> Self {
        Self::new(CountMode::FullGrid)
    }

    pub fn occupied() -> Self {
        Self::new(CountMode::Occupied)
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    fn visits(&self, occupied: bool) -> bool {
        occupied || self.mode == CountMode::FullGrid
    }

    #[inline]
    fn tick(&mut self) {
        self.ops += 1;
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Cycles when the operations are spread over `lanes` parallel modules.
    pub fn cycles(&self, lanes: u64) -> u64 {
        assert!(lanes > 0, "at least one multiplier lane");
        self.ops.div_ceil(lanes)
    }
}

/// A quantized convolution layer: weights, requantization multiplier and the
/// position-contribution table.
#[derive(Debug, Clone)]
pub struct ConvLayer {
    pub weights: WeightMatrix,
    pub requant: RequantParams,
    pub lut: PosLut,
    pub variant: Variant,
    pub scale_x: f64,
    pub scale_out: f64,
}

impl ConvLayer {
    pub fn new(
        weights: WeightMatrix,
        requant: RequantParams,
        scale_x: f64,
        scale_out: f64,
        variant: Variant,
    ) -> Result<Self> {
        let lut = build_pos_lut(&weights, requant)?;
        Ok(Self { weights, requant, lut, variant, scale_x, scale_out })
    }

    /// Derives `(M, n)` from `scale_x · scale_w / scale_out`.
    pub fn from_scales(weights: WeightMatrix, scale_x: f64, scale_out: f64, variant: Variant) -> Result<Self> {
        let requant = RequantParams::from_scales(scale_x, weights.scale_w, scale_out)?;
        Self::new(weights, requant, scale_x, scale_out, variant)
    }

    pub fn in_dim(&self) -> usize {
        self.weights.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.weights.out_dim
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        Self { variant, ..self.clone() }
    }
}

fn check_channel(ch: &TemporalChannel, size: u32, layer: &ConvLayer) -> Result<()> {
    if ch.dim != layer.in_dim() {
        return Err(Error::DimensionMismatch { expected: layer.in_dim(), found: ch.dim });
    }
    if ch.size != size {
        return Err(Error::DimensionMismatch { expected: size as usize, found: ch.size as usize });
    }
    Ok(())
}

fn check_pair(pair: &ChannelPair<'_>, layer: &ConvLayer) -> Result<()> {
    check_channel(pair.current, pair.current.size, layer)?;
    if let Some(prev) = pair.previous {
        check_channel(prev, pair.current.size, layer)?;
    }
    Ok(())
}

/// Baseline dataflow: per output element, the max over candidates of the
/// requantized extended dot product.
pub fn conv_baseline_traced(
    pair: &ChannelPair<'_>,
    layer: &ConvLayer,
    counter: &mut CycleCounter,
) -> Result<TemporalChannel> {
    check_pair(pair, layer)?;
    let cur = pair.current;
    let out_dim = layer.out_dim();
    let mut out = TemporalChannel::empty(cur.size, out_dim, cur.tc_index, layer.scale_out);
    let mut acc = vec![i8::MIN; out_dim];
    for cy in 0..cur.size {
        for cx in 0..cur.size {
            let occupied = cur.is_occupied(cx, cy);
            if !counter.visits(occupied) {
                continue;
            }
            acc.fill(i8::MIN);
            for slot in CANDIDATE_SLOTS {
                let x = if occupied { pair.lookup(cx, cy, slot) } else { None };
                for (k, a) in acc.iter_mut().enumerate() {
                    counter.tick();
                    if let Some(x) = x {
                        *a = (*a).max(requant(dot_extended(x, slot.delta, &layer.weights, k), layer.requant));
                    }
                }
            }
            if occupied {
                out.set(cx, cy, &acc);
            }
        }
    }
    Ok(out)
}

pub fn conv_baseline(pair: &ChannelPair<'_>, layer: &ConvLayer) -> Result<TemporalChannel> {
    conv_baseline_traced(pair, layer, &mut CycleCounter::occupied())
}

/// Step-1 output of the two-step method: requantized self-loop products for
/// every occupied cell of one channel. Values are kept unsaturated; the
/// single saturation happens after the position contribution is added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfLoopBuffer {
    pub size: u32,
    pub out_dim: usize,
    pub tc_index: u32,
    occupied: Vec<bool>,
    values: Vec<i64>,
}

impl SelfLoopBuffer {
    pub fn compute(channel: &TemporalChannel, layer: &ConvLayer, counter: &mut CycleCounter) -> Result<Self> {
        check_channel(channel, channel.size, layer)?;
        let out_dim = layer.out_dim();
        let cells = (channel.size * channel.size) as usize;
        let mut values = vec![0i64; cells * out_dim];
        for cy in 0..channel.size {
            for cx in 0..channel.size {
                let x = channel.get(cx, cy);
                if !counter.visits(x.is_some()) {
                    continue;
                }
                let c = (cy * channel.size + cx) as usize;
                for k in 0..out_dim {
                    counter.tick();
                    if let Some(x) = x {
                        values[c * out_dim + k] = requant_wide(dot_feature(x, &layer.weights, k), layer.requant);
                    }
                }
            }
        }
        Ok(Self {
            size: channel.size,
            out_dim,
            tc_index: channel.tc_index,
            occupied: channel.occupancy().to_vec(),
            values,
        })
    }

    pub fn get(&self, cx: i64, cy: i64) -> Option<&[i64]> {
        let s = self.size as i64;
        if cx < 0 || cy < 0 || cx >= s || cy >= s {
            return None;
        }
        let c = (cy * s + cx) as usize;
        self.occupied[c].then(|| &self.values[c * self.out_dim..(c + 1) * self.out_dim])
    }
}

fn twostep_gather(
    current: &SelfLoopBuffer,
    previous: Option<&SelfLoopBuffer>,
    lut: &PosLut,
    scale_out: f64,
    counter: &mut CycleCounter,
) -> TemporalChannel {
    let size = current.size;
    let out_dim = current.out_dim;
    let mut out = TemporalChannel::empty(size, out_dim, current.tc_index, scale_out);
    let mut acc = vec![i8::MIN; out_dim];
    for cy in 0..size {
        for cx in 0..size {
            let occupied = current.get(cx as i64, cy as i64).is_some();
            if !counter.visits(occupied) {
                continue;
            }
            acc.fill(i8::MIN);
            for reads in CANDIDATE_SLOTS.chunks(READ_PORTS) {
                counter.tick();
                if !occupied {
                    continue;
                }
                for slot in reads {
                    let [dx, dy, dt] = slot.delta;
                    let buffer = if dt == 0 { Some(current) } else { previous };
                    let Some(b) = buffer.and_then(|b| b.get(cx as i64 + dx as i64, cy as i64 + dy as i64)) else {
                        continue;
                    };
                    let contribution = lut.get(slot.delta);
                    for ((a, &v), &p) in acc.iter_mut().zip(b).zip(contribution) {
                        *a = (*a).max(saturate_i8(v + p as i64));
                    }
                }
            }
            if occupied {
                out.set(cx, cy, &acc);
            }
        }
    }
    out
}

/// Streaming two-step layer. The previous channel's step-1 buffer is kept,
/// so each channel's self-loops are computed exactly once.
#[derive(Debug, Clone)]
pub struct TwoStepLayer<'l> {
    layer: &'l ConvLayer,
    previous: Option<SelfLoopBuffer>,
    step1_runs: usize,
}

impl<'l> TwoStepLayer<'l> {
    pub fn new(layer: &'l ConvLayer) -> Self {
        Self { layer, previous: None, step1_runs: 0 }
    }

    /// Loads `channel` as the previous channel without producing output or
    /// charging cycles.
    pub fn prime(&mut self, channel: &TemporalChannel) -> Result<()> {
        let buf = SelfLoopBuffer::compute(channel, self.layer, &mut CycleCounter::occupied())?;
        self.previous = Some(buf);
        Ok(())
    }

    pub fn process(&mut self, channel: &TemporalChannel, counter: &mut CycleCounter) -> Result<TemporalChannel> {
        let current = SelfLoopBuffer::compute(channel, self.layer, counter)?;
        self.step1_runs += 1;
        if let Some(prev) = &self.previous {
            if prev.size != current.size {
                return Err(Error::DimensionMismatch { expected: prev.size as usize, found: current.size as usize });
            }
        }
        let out = twostep_gather(&current, self.previous.as_ref(), &self.layer.lut, self.layer.scale_out, counter);
        self.previous = Some(current);
        Ok(out)
    }

    /// Number of step-1 passes executed by `process`.
    pub fn step1_runs(&self) -> usize {
        self.step1_runs
    }

    pub fn reset(&mut self) {
        self.previous = None;
    }
}

pub fn conv_twostep_traced(
    pair: &ChannelPair<'_>,
    layer: &ConvLayer,
    counter: &mut CycleCounter,
) -> Result<TemporalChannel> {
    check_pair(pair, layer)?;
    let mut runner = TwoStepLayer::new(layer);
    if let Some(prev) = pair.previous {
        runner.prime(prev)?;
    }
    runner.process(pair.current, counter)
}

pub fn conv_twostep(pair: &ChannelPair<'_>, layer: &ConvLayer) -> Result<TemporalChannel> {
    conv_twostep_traced(pair, layer, &mut CycleCounter::occupied())
}

/// Streaming baseline layer holding a copy of the previous input channel.
#[derive(Debug, Clone)]
pub struct BaselineLayer<'l> {
    layer: &'l ConvLayer,
    previous: Option<TemporalChannel>,
}

impl<'l> BaselineLayer<'l> {
    pub fn new(layer: &'l ConvLayer) -> Self {
        Self { layer, previous: None }
    }

    pub fn process(&mut self, channel: &TemporalChannel, counter: &mut CycleCounter) -> Result<TemporalChannel> {
        let out = conv_baseline_traced(&ChannelPair::new(channel, self.previous.as_ref()), self.layer, counter)?;
        self.previous = Some(channel.clone());
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.previous = None;
    }
}

/// A streaming layer running the dataflow chosen by a variant.
#[derive(Debug, Clone)]
pub enum LayerRunner<'l> {
    Baseline(BaselineLayer<'l>),
    TwoStep(TwoStepLayer<'l>),
}

impl<'l> LayerRunner<'l> {
    pub fn new(layer: &'l ConvLayer) -> Self {
        Self::with_variant(layer, layer.variant)
    }

    /// `BaselineLut` and `BaselineDsp` share one dataflow; they differ only
    /// in resource attribution.
    pub fn with_variant(layer: &'l ConvLayer, variant: Variant) -> Self {
        match variant {
            Variant::BaselineLut | Variant::BaselineDsp => LayerRunner::Baseline(BaselineLayer::new(layer)),
            Variant::TwoStep => LayerRunner::TwoStep(TwoStepLayer::new(layer)),
        }
    }

    pub fn process(&mut self, channel: &TemporalChannel, counter: &mut CycleCounter) -> Result<TemporalChannel> {
        match self {
            LayerRunner::Baseline(l) => l.process(channel, counter),
            LayerRunner::TwoStep(l) => l.process(channel, counter),
        }
    }

    /// Runs a whole window's channel stream from an empty previous channel.
    pub fn run_window(&mut self, channels: &[TemporalChannel], counter: &mut CycleCounter) -> Result<Vec<TemporalChannel>> {
        self.reset();
        channels.iter().map(|ch| self.process(ch, counter)).collect()
    }

    pub fn reset(&mut self) {
        match self {
            LayerRunner::Baseline(l) => l.reset(),
            LayerRunner::TwoStep(l) => l.reset(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv_dataflow::enumerate_candidates;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn layer(in_dim: usize, out_dim: usize, w_feat: Vec<i8>, w_pos: Vec<i8>, m: f64) -> ConvLayer {
        let w = WeightMatrix::new(in_dim, out_dim, w_feat, w_pos, 1.0).unwrap();
        ConvLayer::new(w, RequantParams::from_multiplier(m).unwrap(), 1.0, 1.0, Variant::BaselineLut).unwrap()
    }

    fn random_layer(rng: &mut ChaCha8Rng, in_dim: usize, out_dim: usize) -> ConvLayer {
        let w_feat = (0..in_dim * out_dim).map(|_| rng.gen()).collect();
        let w_pos = (0..3 * out_dim).map(|_| rng.gen()).collect();
        let m = rng.gen_range(1e-4..0.05);
        layer(in_dim, out_dim, w_feat, w_pos, m)
    }

    fn random_channel(rng: &mut ChaCha8Rng, size: u32, dim: usize, tc: u32, density: f64) -> TemporalChannel {
        let mut ch = TemporalChannel::empty(size, dim, tc, 1.0);
        for cy in 0..size {
            for cx in 0..size {
                if rng.gen_bool(density) {
                    let f: Vec<i8> = (0..dim).map(|_| rng.gen()).collect();
                    ch.set(cx, cy, &f);
                }
            }
        }
        ch
    }

    #[test]
    fn single_cell_zero_position_weights() {
        let l = layer(2, 2, vec![3, -1, 2, 5], vec![0; 6], 0.25);
        let mut ch = TemporalChannel::empty(4, 2, 0, 1.0);
        ch.set(1, 2, &[10, -4]);
        let out = conv_baseline(&ChannelPair::first(&ch), &l).unwrap();
        // [10·3 + -4·2, 10·-1 + -4·5] · 0.25 = [5.5, -7.5] → [6, -8]
        assert_eq!(out.get(1, 2), Some(&[6, -8][..]));
        assert_eq!(out.occupied_count(), 1);
        assert_eq!(conv_twostep(&ChannelPair::first(&ch), &l).unwrap(), out);
    }

    #[test]
    fn two_adjacent_cells_by_hand() {
        // 1 → 1, φ(x, Δ) = 2x + 3Δx + 5Δy + 7Δt, m = 1
        let l = layer(1, 1, vec![2], vec![3, 5, 7], 1.0);
        let mut ch = TemporalChannel::empty(4, 1, 1, 1.0);
        ch.set(1, 1, &[10]);
        ch.set(2, 1, &[-4]);
        let out = conv_baseline(&ChannelPair::first(&ch), &l).unwrap();
        // cell (1,1): self 20; neighbour (2,1) Δ = (1,0,0): -8 + 3 = -5 → 20
        // cell (2,1): self -8; neighbour (1,1) Δ = (-1,0,0): 20 - 3 = 17 → 17
        assert_eq!(out.get(1, 1), Some(&[20][..]));
        assert_eq!(out.get(2, 1), Some(&[17][..]));

        let mut prev = TemporalChannel::empty(4, 1, 0, 1.0);
        prev.set(2, 2, &[30]);
        let out = conv_baseline(&ChannelPair::new(&ch, Some(&prev)), &l).unwrap();
        // (1,1) sees prev (2,2) with Δ = (1,1,-1): 60 + 3 + 5 - 7 = 61
        // (2,1) sees prev (2,2) with Δ = (0,1,-1): 60 + 5 - 7 = 58
        assert_eq!(out.get(1, 1), Some(&[61][..]));
        assert_eq!(out.get(2, 1), Some(&[58][..]));
        assert_eq!(conv_twostep(&ChannelPair::new(&ch, Some(&prev)), &l).unwrap(), out);
    }

    #[test]
    fn dimension_mismatch() {
        let l = layer(2, 1, vec![1, 1], vec![0; 3], 1.0);
        let ch = TemporalChannel::empty(4, 3, 0, 1.0);
        assert!(matches!(
            conv_baseline(&ChannelPair::first(&ch), &l),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        assert!(conv_twostep(&ChannelPair::first(&ch), &l).is_err());
        let ok = TemporalChannel::empty(4, 2, 1, 1.0);
        let small = TemporalChannel::empty(2, 2, 0, 1.0);
        assert!(conv_baseline(&ChannelPair::new(&ok, Some(&small)), &l).is_err());
    }

    #[test]
    fn baseline_matches_candidate_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = random_layer(&mut rng, 3, 4);
        let prev = random_channel(&mut rng, 6, 3, 0, 0.5);
        let cur = random_channel(&mut rng, 6, 3, 1, 0.5);
        let pair = ChannelPair::new(&cur, Some(&prev));
        let out = conv_baseline(&pair, &l).unwrap();
        for (cx, cy, _) in cur.cells() {
            let expected: Vec<i8> = (0..4)
                .map(|k| {
                    enumerate_candidates(&pair, cx, cy)
                        .iter()
                        .map(|c| requant(dot_extended(c.feature, c.delta, &l.weights, k), l.requant))
                        .max()
                        .unwrap()
                })
                .collect();
            assert_eq!(out.get(cx, cy).unwrap(), expected.as_slice());
        }
    }

    #[test]
    fn dataflows_within_one_lsb_and_preserve_occupancy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let l = random_layer(&mut rng, 8, 16);
            let prev = random_channel(&mut rng, 8, 8, 0, 0.6);
            let cur = random_channel(&mut rng, 8, 8, 1, 0.6);
            let pair = ChannelPair::new(&cur, Some(&prev));
            let a = conv_baseline(&pair, &l).unwrap();
            let b = conv_twostep(&pair, &l).unwrap();
            assert!(a.same_occupancy(&cur) && b.same_occupancy(&cur));
            for ((_, _, fa), (_, _, fb)) in a.cells().zip(b.cells()) {
                for (&x, &y) in fa.iter().zip(fb) {
                    assert!((x as i32 - y as i32).abs() <= 1);
                }
            }
        }
    }

    #[test]
    fn streaming_matches_pairwise_and_runs_step1_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = random_layer(&mut rng, 4, 8).with_variant(Variant::TwoStep);
        let chans: Vec<TemporalChannel> = (0..6).map(|tc| random_channel(&mut rng, 8, 4, tc, 0.4)).collect();
        let mut two = TwoStepLayer::new(&l);
        let mut base = BaselineLayer::new(&l);
        let mut counter = CycleCounter::occupied();
        for (i, ch) in chans.iter().enumerate() {
            let prev = i.checked_sub(1).map(|j| &chans[j]);
            let pair = ChannelPair::new(ch, prev);
            assert_eq!(two.process(ch, &mut counter).unwrap(), conv_twostep(&pair, &l).unwrap());
            assert_eq!(base.process(ch, &mut counter).unwrap(), conv_baseline(&pair, &l).unwrap());
        }
        assert_eq!(two.step1_runs(), chans.len());
    }

    #[test]
    fn dsp_variant_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l = random_layer(&mut rng, 4, 4);
        let chans: Vec<TemporalChannel> = (0..4).map(|tc| random_channel(&mut rng, 8, 4, tc, 0.5)).collect();
        let mut c = CycleCounter::occupied();
        let lut_out = LayerRunner::with_variant(&l, Variant::BaselineLut).run_window(&chans, &mut c).unwrap();
        let dsp_out = LayerRunner::with_variant(&l, Variant::BaselineDsp).run_window(&chans, &mut c).unwrap();
        assert_eq!(lut_out, dsp_out);
    }

    #[test]
    fn full_grid_counts_match_closed_forms() {
        let l = layer(2, 3, vec![1; 6], vec![1; 9], 1.0);
        for size in [1u32, 3, 4] {
            let ch = TemporalChannel::empty(size, 2, 0, 1.0);
            let cells = (size * size) as u64;
            let mut c = CycleCounter::full_grid();
            conv_baseline_traced(&ChannelPair::first(&ch), &l, &mut c).unwrap();
            assert_eq!(c.cycles(2), cells * 9 * 3);
            let mut c = CycleCounter::full_grid();
            conv_twostep_traced(&ChannelPair::first(&ch), &l, &mut c).unwrap();
            assert_eq!(c.cycles(1), cells * (3 + 5));
            let mut c = CycleCounter::occupied();
            conv_twostep_traced(&ChannelPair::first(&ch), &l, &mut c).unwrap();
            assert_eq!(c.ops(), 0);
        }
    }
}
