use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::TemporalChannel;

/// Elementwise difference statistics between two channels of identical
/// occupancy, in output LSBs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffStats {
    pub max_abs_diff: u32,
    pub differing: u64,
    pub element_count: u64,
}

impl DiffStats {
    pub fn differing_fraction(&self) -> f64 {
        if self.element_count == 0 {
            0.0
        } else {
            self.differing as f64 / self.element_count as f64
        }
    }

    pub fn merge(&mut self, other: &DiffStats) {
        self.max_abs_diff = self.max_abs_diff.max(other.max_abs_diff);
        self.differing += other.differing;
        self.element_count += other.element_count;
    }
}

pub fn compare_channels(a: &TemporalChannel, b: &TemporalChannel) -> Result<DiffStats> {
    if a.dim != b.dim {
        return Err(Error::Comparison(format!("feature dimensions {} and {}", a.dim, b.dim)));
    }
    if !a.same_occupancy(b) {
        return Err(Error::Comparison(format!(
            "occupancy differs between channels {} and {}",
            a.tc_index, b.tc_index
        )));
    }
    let mut stats = DiffStats::default();
    for ((_, _, fa), (_, _, fb)) in a.cells().zip(b.cells()) {
        for (&x, &y) in fa.iter().zip(fb) {
            let d = (x as i32 - y as i32).unsigned_abs();
            stats.max_abs_diff = stats.max_abs_diff.max(d);
            stats.differing += (d != 0) as u64;
            stats.element_count += 1;
        }
    }
    Ok(stats)
}
