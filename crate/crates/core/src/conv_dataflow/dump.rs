//! JSON feature dumps of temporal channels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::TemporalChannel;

/// One channel: occupancy as `size` strings of `0`/`1` (row cy, column cx)
/// and the int8 features of occupied cells in row-major cell order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDump {
    pub tc_index: u32,
    pub size: u32,
    pub dim: usize,
    pub scale: f64,
    pub occupancy: Vec<String>,
    pub features: Vec<i8>,
}

impl From<&TemporalChannel> for ChannelDump {
    fn from(ch: &TemporalChannel) -> Self {
        let occupancy = ch
            .occupancy()
            .chunks(ch.size as usize)
            .map(|row| row.iter().map(|&o| if o { '1' } else { '0' }).collect())
            .collect();
        let features = ch.cells().flat_map(|(_, _, f)| f.iter().copied()).collect();
        Self { tc_index: ch.tc_index, size: ch.size, dim: ch.dim, scale: ch.scale, occupancy, features }
    }
}

impl TryFrom<&ChannelDump> for TemporalChannel {
    type Error = Error;

    fn try_from(d: &ChannelDump) -> Result<Self> {
        let bad = |msg: String| Error::Comparison(format!("channel {}: {msg}", d.tc_index));
        if d.occupancy.len() != d.size as usize {
            return Err(bad(format!("{} occupancy rows for size {}", d.occupancy.len(), d.size)));
        }
        let mut ch = TemporalChannel::empty(d.size, d.dim, d.tc_index, d.scale);
        let mut feats = d.features.chunks(d.dim.max(1));
        for (cy, row) in d.occupancy.iter().enumerate() {
            if row.len() != d.size as usize {
                return Err(bad(format!("row {cy} has {} cells", row.len())));
            }
            for (cx, c) in row.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => {
                        let f = feats.next().filter(|f| f.len() == d.dim).ok_or_else(|| bad("too few features".into()))?;
                        ch.set(cx as u32, cy as u32, f);
                    }
                    other => return Err(bad(format!("invalid occupancy character `{other}`"))),
                }
            }
        }
        if feats.next().is_some() {
            return Err(bad("more features than occupied cells".into()));
        }
        Ok(ch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDump {
    pub layer: usize,
    pub variant: String,
    pub channels: Vec<ChannelDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDump {
    pub window: u64,
    pub start_ns: u64,
    pub layers: Vec<LayerDump>,
}

/// Output of a simulation run. Channels without occupied cells are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureDump {
    pub windows: Vec<WindowDump>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn dump_round_trip(size in 1u32..9, dim in 1usize..5, cells in prop::collection::vec((0u32..9, 0u32..9, any::<i8>()), 0..40)) {
            let mut ch = TemporalChannel::empty(size, dim, 3, 0.125);
            for (x, y, v) in cells {
                if x < size && y < size {
                    ch.set(x, y, &vec![v; dim]);
                }
            }
            let dump = ChannelDump::from(&ch);
            let text = serde_json::to_string(&dump).unwrap();
            let back: ChannelDump = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(TemporalChannel::try_from(&back).unwrap(), ch);
        }
    }

    #[test]
    fn malformed_dumps() {
        let mut d = ChannelDump::from(&TemporalChannel::empty(2, 1, 0, 1.0));
        d.occupancy[0] = "1x".into();
        assert!(TemporalChannel::try_from(&d).is_err());
        d.occupancy[0] = "10".into();
        assert!(TemporalChannel::try_from(&d).is_err());
        d.features = vec![4, 5];
        assert!(TemporalChannel::try_from(&d).is_err());
        d.features = vec![4];
        assert!(TemporalChannel::try_from(&d).is_ok());
    }
}
