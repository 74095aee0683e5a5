//! Pipeline configuration and weights documents (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conv_dataflow::{ConvLayer, Variant};
use crate::cycle_cost::SizingConfig;
use crate::error::{Error, Result};
use crate::event_ingest::{CameraGeometry, WindowConfig};
use crate::graph_builder::PolarityEncoding;
use crate::quant_arith::WeightMatrix;
use crate::resource_plan::{Budget, CostModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    #[serde(default = "default_variant")]
    pub variant: Variant,
}

fn default_variant() -> Variant {
    Variant::BaselineLut
}

/// Step of the int8 input (polarity) encoding.
pub const DEFAULT_INPUT_SCALE: f64 = 1.0 / 127.0;

fn default_input_scale() -> f64 {
    DEFAULT_INPUT_SCALE
}

/// The whole-run configuration. `layers[0]` is the asynchronous
/// convolution (its variant is ignored); the rest are synchronous layers
/// after pooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub camera: CameraGeometry,
    pub window: WindowConfig,
    pub layers: Vec<LayerSpec>,
    pub weights: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Budget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_model: Option<CostModelParams>,
    /// Extra `(time_window_ns, size)` rows for the sizing report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizing: Vec<SizingConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_input_scale")]
    pub input_scale: f64,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        CameraGeometry::new(self.camera.width, self.camera.height)?;
        self.window.validate()?;
        let Some(first) = self.layers.first() else {
            return Err(Error::Config("at least the asynchronous layer is required".into()));
        };
        if first.in_dim != 1 {
            return Err(Error::Config(format!(
                "the asynchronous layer takes the polarity feature (in_dim 1), got {}",
                first.in_dim
            )));
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[1].in_dim != pair[0].out_dim {
                return Err(Error::Config(format!(
                    "layer {} expects in_dim {} but layer {i} produces {}",
                    i + 1,
                    pair[1].in_dim,
                    pair[0].out_dim
                )));
            }
        }
        if self.layers.iter().any(|l| l.out_dim == 0) {
            return Err(Error::Config("layer dimensions must be at least 1".into()));
        }
        if !(self.input_scale.is_finite() && self.input_scale > 0.0) {
            return Err(Error::Config(format!("input_scale must be positive, got {}", self.input_scale)));
        }
        Ok(())
    }

    pub fn sync_layers(&self) -> &[LayerSpec] {
        self.layers.get(1..).unwrap_or(&[])
    }

    pub fn encoding(&self) -> PolarityEncoding {
        PolarityEncoding::new(self.input_scale)
    }

    pub fn cost_model(&self) -> CostModelParams {
        self.cost_model.unwrap_or_default()
    }
}

/// A configuration loaded from disk with its directory and content digest.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    pub base_dir: PathBuf,
    pub digest: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig = serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))?;
        config.validate()?;
        Ok(Self {
            config,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            digest: hex::encode(Sha256::digest(&bytes)),
        })
    }

    /// Resolves a path relative to the configuration file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn weights_path(&self) -> PathBuf {
        self.resolve(&self.config.weights)
    }
}

/// One layer of the weights document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `[in_dim][out_dim]`.
    pub w_feat: Vec<i8>,
    /// Row-major `[3][out_dim]`, rows Δx, Δy, Δt.
    pub w_pos: Vec<i8>,
    pub scale_x: f64,
    pub scale_w: f64,
    pub scale_out: f64,
}

impl LayerWeights {
    pub fn to_layer(&self, variant: Variant) -> Result<ConvLayer> {
        let w = WeightMatrix::new(self.in_dim, self.out_dim, self.w_feat.clone(), self.w_pos.clone(), self.scale_w)?;
        if !(self.scale_x > 0.0 && self.scale_out > 0.0) {
            return Err(Error::Config("scale_x and scale_out must be positive".into()));
        }
        ConvLayer::from_scales(w, self.scale_x, self.scale_out, variant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub layers: Vec<LayerWeights>,
}

impl WeightsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Builds the layers described by `config`, checking the shapes agree.
    pub fn layers_for(&self, config: &PipelineConfig) -> Result<Vec<ConvLayer>> {
        if self.layers.len() != config.layers.len() {
            return Err(Error::Config(format!(
                "weights describe {} layers, configuration {}",
                self.layers.len(),
                config.layers.len()
            )));
        }
        self.layers
            .iter()
            .zip(&config.layers)
            .enumerate()
            .map(|(i, (w, spec))| {
                if (w.in_dim, w.out_dim) != (spec.in_dim, spec.out_dim) {
                    return Err(Error::Config(format!(
                        "layer {i}: weights are {}→{}, configuration says {}→{}",
                        w.in_dim, w.out_dim, spec.in_dim, spec.out_dim
                    )));
                }
                let variant = if i == 0 { Variant::BaselineLut } else { spec.variant };
                w.to_layer(variant)
            })
            .collect()
    }
}

/// Target magnitude of a typical requantized output, in LSBs.
const TARGET_LEVEL: f64 = 48.0;

/// Seeded int8 weights with scales chosen so outputs use a reasonable part
/// of the int8 range. The requantization multiplier is below 1/127 for every
/// layer, so all position-table entries are far inside 16 bits.
pub fn generate_weights(config: &PipelineConfig, seed: u64) -> WeightsFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale_w = 1.0 / 127.0;
    let mut scale_x = config.input_scale;
    let layers = config
        .layers
        .iter()
        .map(|spec| {
            let w_feat = (0..spec.in_dim * spec.out_dim).map(|_| rng.gen_range(-127..=127)).collect();
            let w_pos = (0..3 * spec.out_dim).map(|_| rng.gen_range(-127..=127)).collect();
            // uniform int8 weights have a standard deviation of about 73
            let multiplier = TARGET_LEVEL / (127.0 * 73.0 * ((spec.in_dim + 3) as f64).sqrt());
            let scale_out = scale_x * scale_w / multiplier;
            let layer = LayerWeights { in_dim: spec.in_dim, out_dim: spec.out_dim, w_feat, w_pos, scale_x, scale_w, scale_out };
            scale_x = scale_out;
            layer
        })
        .collect();
    WeightsFile { layers }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(layers: &[(usize, usize)]) -> PipelineConfig {
        PipelineConfig {
            camera: CameraGeometry { width: 240, height: 180 },
            window: WindowConfig { time_window_ns: 50_000_000, input_size: 256, clock_ns: 5 },
            layers: layers
                .iter()
                .map(|&(i, o)| LayerSpec { in_dim: i, out_dim: o, variant: Variant::BaselineLut })
                .collect(),
            weights: "w.json".into(),
            budget: None,
            cost_model: None,
            sizing: Vec::new(),
            seed: 1,
            input_scale: DEFAULT_INPUT_SCALE,
        }
    }

    #[test]
    fn layer_chain_validation() {
        assert!(config(&[(1, 16), (16, 32)]).validate().is_ok());
        assert!(config(&[(4, 16)]).validate().is_err());
        assert!(config(&[(1, 16), (8, 32)]).validate().is_err());
        assert!(config(&[]).validate().is_err());
        let mut bad = config(&[(1, 16)]);
        bad.window.input_size = 100;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn generated_weights_shape_and_determinism() {
        let c = config(&[(1, 16), (16, 32)]);
        let a = generate_weights(&c, 42);
        assert_eq!(a, generate_weights(&c, 42));
        assert_ne!(a, generate_weights(&c, 43));
        assert_eq!(a.layers[1].w_feat.len(), 16 * 32);
        assert_eq!(a.layers[1].w_pos.len(), 3 * 32);
        assert_eq!(a.layers[1].scale_x, a.layers[0].scale_out);
        let layers = a.layers_for(&c).unwrap();
        for l in &layers {
            assert!(l.lut.entries().iter().all(|&e| e.abs() < 128));
        }
    }

    #[test]
    fn weights_must_match_config() {
        let c = config(&[(1, 16), (16, 32)]);
        let w = generate_weights(&config(&[(1, 16), (16, 64)]), 1);
        assert!(w.layers_for(&c).is_err());
        let w = generate_weights(&config(&[(1, 16)]), 1);
        assert!(w.layers_for(&c).is_err());
    }

    #[test]
    fn config_json_defaults() {
        let text = r#"{
            "camera": {"width": 128, "height": 128},
            "window": {"time_window_ns": 50000000, "input_size": 128},
            "layers": [{"in_dim": 1, "out_dim": 16}, {"in_dim": 16, "out_dim": 32, "variant": "two_step"}],
            "weights": "w.json"
        }"#;
        let c: PipelineConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.window.clock_ns, 5);
        assert_eq!(c.layers[1].variant, Variant::TwoStep);
        assert_eq!(c.input_scale, DEFAULT_INPUT_SCALE);
        assert!(c.validate().is_ok());
        assert!(serde_json::from_str::<PipelineConfig>(&text.replace("\"weights\"", "\"wieghts\"")).is_err());
    }
}
