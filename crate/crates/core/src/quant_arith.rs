//! Fixed-point arithmetic shared by every convolution dataflow.
//!
//! Features and weights are symmetric int8 (zero-point 0). Products are
//! accumulated exactly in 32 bits and brought back to int8 by a fixed-point
//! multiplier `M · 2⁻ⁿ` with `M ∈ [2³⁰, 2³¹)`, rounding half away from zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantized vector together with its dequantization step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QVector {
    pub elements: Vec<i8>,
    pub scale: f64,
}

impl QVector {
    pub fn new(elements: Vec<i8>, scale: f64) -> Self {
        Self { elements, scale }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dequantize(&self) -> Vec<f64> {
        self.elements.iter().map(|&q| q as f64 * self.scale).collect()
    }
}

pub fn saturate_i8(v: i64) -> i8 {
    v.clamp(i8::MIN as i64, i8::MAX as i64) as i8
}

/// Layer weights. `w_feat` is row-major `[in_dim][out_dim]`; `w_pos` is
/// row-major `[3][out_dim]` with rows for Δx, Δy and Δt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w_feat: Vec<i8>,
    pub w_pos: Vec<i8>,
    pub scale_w: f64,
}

impl WeightMatrix {
    pub fn new(in_dim: usize, out_dim: usize, w_feat: Vec<i8>, w_pos: Vec<i8>, scale_w: f64) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Config("weight dimensions must be at least 1".into()));
        }
        if in_dim > 1024 {
            return Err(Error::Config(format!(
                "in_dim {in_dim} exceeds 1024; the 32-bit accumulator could overflow"
            )));
        }
        if w_feat.len() != in_dim * out_dim {
            return Err(Error::DimensionMismatch { expected: in_dim * out_dim, found: w_feat.len() });
        }
        if w_pos.len() != 3 * out_dim {
            return Err(Error::DimensionMismatch { expected: 3 * out_dim, found: w_pos.len() });
        }
        if !(scale_w.is_finite() && scale_w > 0.0) {
            return Err(Error::Config(format!("scale_w must be positive, got {scale_w}")));
        }
        Ok(Self { in_dim, out_dim, w_feat, w_pos, scale_w })
    }

    pub fn feat(&self, i: usize, k: usize) -> i8 {
        self.w_feat[i * self.out_dim + k]
    }

    pub fn pos(&self, d: usize, k: usize) -> i8 {
        self.w_pos[d * self.out_dim + k]
    }
}

/// Fixed-point requantization multiplier `mantissa · 2^-shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequantParams {
    pub mantissa: u32,
    pub shift: u32,
}

const MANTISSA_MIN: u32 = 1 << 30;
const MAX_SHIFT: i32 = 62;

impl RequantParams {
    /// The unique `(M, n)` with `M ∈ [2³⁰, 2³¹)` closest to `m`.
    pub fn from_multiplier(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Multiplier(m));
        }
        // m = f · 2^e with f ∈ [0.5, 1)
        let mut e = m.log2().floor() as i32 + 1;
        let mut f = m / 2f64.powi(e);
        if f >= 1.0 {
            f /= 2.0;
            e += 1;
        } else if f < 0.5 {
            f *= 2.0;
            e -= 1;
        }
        let mut mantissa = (f * 2f64.powi(31)).round() as u64;
        let mut shift = 31 - e;
        if mantissa == 1 << 31 {
            mantissa = MANTISSA_MIN as u64;
            shift -= 1;
        }
        if !(0..=MAX_SHIFT).contains(&shift) {
            return Err(Error::Multiplier(m));
        }
        Ok(Self { mantissa: mantissa as u32, shift: shift as u32 })
    }

    /// Multiplier `scale_x · scale_w / scale_out`.
    pub fn from_scales(scale_x: f64, scale_w: f64, scale_out: f64) -> Result<Self> {
        Self::from_multiplier(scale_x * scale_w / scale_out)
    }

    pub fn multiplier(&self) -> f64 {
        self.mantissa as f64 / 2f64.powi(self.shift as i32)
    }
}

/// round_half_away(acc · M / 2ⁿ) with no saturation.
pub fn requant_wide(acc: i32, p: RequantParams) -> i64 {
    let prod = acc as i64 * p.mantissa as i64;
    if p.shift == 0 {
        return prod;
    }
    let half = 1u64 << (p.shift - 1);
    let mag = ((prod.unsigned_abs() + half) >> p.shift) as i64;
    if prod < 0 {
        -mag
    } else {
        mag
    }
}

/// Requantize a 32-bit accumulator to int8.
pub fn requant(acc: i32, p: RequantParams) -> i8 {
    saturate_i8(requant_wide(acc, p))
}

/// Same rounding as [`requant`] but kept in 16 bits instead of saturating.
pub fn requant_round(acc: i32, p: RequantParams) -> Result<i16> {
    let v = requant_wide(acc, p);
    i16::try_from(v).map_err(|_| Error::LutOverflow { value: v })
}

/// Σᵢ x[i]·w_feat[i][k]: the self-loop product without position terms.
pub fn dot_feature(x: &[i8], w: &WeightMatrix, k: usize) -> i32 {
    debug_assert_eq!(x.len(), w.in_dim);
    x.iter()
        .enumerate()
        .map(|(i, &xi)| xi as i32 * w.feat(i, k) as i32)
        .sum()
}

/// Σ_d Δ_d·w_pos[d][k].
pub fn dot_position(delta: [i32; 3], w: &WeightMatrix, k: usize) -> i32 {
    (0..3).map(|d| delta[d] * w.pos(d, k) as i32).sum()
}

/// Accumulator of the feature vector extended with the position difference.
pub fn dot_extended(x: &[i8], delta: [i32; 3], w: &WeightMatrix, k: usize) -> i32 {
    dot_feature(x, w, k) + dot_position(delta, w, k)
}

/// Requantized position contributions for every Δ ∈ {-1, 0, 1}³.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosLut {
    out_dim: usize,
    entries: Vec<i16>,
}

pub const POS_LUT_ENTRIES: usize = 27;

impl PosLut {
    pub fn index(delta: [i32; 3]) -> usize {
        debug_assert!(delta.iter().all(|d| (-1..=1).contains(d)));
        ((delta[0] + 1) * 9 + (delta[1] + 1) * 3 + (delta[2] + 1)) as usize
    }

    pub fn get(&self, delta: [i32; 3]) -> &[i16] {
        let i = Self::index(delta);
        &self.entries[i * self.out_dim..(i + 1) * self.out_dim]
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn len(&self) -> usize {
        self.entries.len() / self.out_dim
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All entries in index order (Δx slowest, Δt fastest).
    pub fn entries(&self) -> &[i16] {
        &self.entries
    }
}

pub fn build_pos_lut(w: &WeightMatrix, p: RequantParams) -> Result<PosLut> {
    let mut entries = Vec::with_capacity(POS_LUT_ENTRIES * w.out_dim);
    for dx in -1..=1 {
        for dy in -1..=1 {
            for dt in -1..=1 {
                for k in 0..w.out_dim {
                    entries.push(requant_round(dot_position([dx, dy, dt], w, k), p)?);
                }
            }
        }
    }
    Ok(PosLut { out_dim: w.out_dim, entries })
}
