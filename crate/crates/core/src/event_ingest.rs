//! Event stream ingestion: text parsing, time-window slicing and grid
//! normalization.
//!
//! All scaling is done with exact integer arithmetic so the grid position of
//! an event never depends on the platform's floating-point behaviour.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One camera event. `p` is the raw polarity bit (0 = off, 1 = on).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    pub x: u32,
    pub y: u32,
    pub p: u8,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.t, self.x, self.y, self.p)
    }
}

impl FromStr for Event {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(format!("expected 4 fields `t,x,y,p`, found {}", fields.len()));
        }
        let t = fields[0]
            .parse::<u64>()
            .map_err(|e| format!("timestamp `{}`: {e}", fields[0]))?;
        let x = fields[1]
            .parse::<u32>()
            .map_err(|e| format!("x `{}`: {e}", fields[1]))?;
        let y = fields[2]
            .parse::<u32>()
            .map_err(|e| format!("y `{}`: {e}", fields[2]))?;
        let p = match fields[3] {
            "0" => 0,
            "1" => 1,
            other => return Err(format!("polarity must be 0 or 1, found `{other}`")),
        };
        Ok(Event { t, x, y, p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CameraGeometry {
    pub width: u32,
    pub height: u32,
}

impl CameraGeometry {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!(
                "camera geometry must be at least 1x1, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn contains(&self, e: &Event) -> bool {
        e.x < self.width && e.y < self.height
    }
}

/// Graph-generation window parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub time_window_ns: u64,
    pub input_size: u32,
    #[serde(default = "default_clock_ns")]
    pub clock_ns: u64,
}

/// 200 MHz.
pub const DEFAULT_CLOCK_NS: u64 = 5;

fn default_clock_ns() -> u64 {
    DEFAULT_CLOCK_NS
}

impl WindowConfig {
    pub fn new(time_window_ns: u64, input_size: u32, clock_ns: u64) -> Result<Self> {
        let w = Self { time_window_ns, input_size, clock_ns };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.input_size.is_power_of_two() || !self.input_size.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "input_size must be a power of two divisible by 4, got {}",
                self.input_size
            )));
        }
        if self.time_window_ns == 0 || self.clock_ns == 0 {
            return Err(Error::Config(
                "time_window_ns and clock_ns must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Edge length of the grid after 4×4 pooling.
    pub fn pooled_size(&self) -> u32 {
        self.input_size / 4
    }
}

/// Parses a `t,x,y,p` event stream. Blank lines and `#` comments are skipped;
/// line numbers in errors are 1-based.
pub fn parse_events(text: &str) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    let mut prev: Option<u64> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let e: Event = trimmed
            .parse()
            .map_err(|reason| Error::Parse { line, reason })?;
        if let Some(prev) = prev {
            if e.t < prev {
                return Err(Error::Ordering { line, t: e.t, prev });
            }
        }
        prev = Some(e.t);
        events.push(e);
    }
    Ok(events)
}

/// Serializes events in the same line format `parse_events` reads.
pub fn format_events(events: &[Event]) -> String {
    let mut out = String::with_capacity(events.len() * 20);
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Index of the half-open window `[t_first + k·W, t_first + (k+1)·W)` that
/// contains `e`.
pub fn window_index(e: &Event, t_first: u64, w: &WindowConfig) -> u64 {
    debug_assert!(e.t >= t_first);
    (e.t - t_first) / w.time_window_ns
}

/// floor(a·b/c) without overflow.
fn scale_floor(a: u64, b: u64, c: u64) -> u64 {
    ((a as u128 * b as u128) / c as u128) as u64
}

/// Integer grid coordinates of an event inside its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPos {
    pub gx: u32,
    pub gy: u32,
    pub gt: u32,
}

impl GridPos {
    pub const fn new(gx: u32, gy: u32, gt: u32) -> Self {
        Self { gx, gy, gt }
    }
}

pub fn normalize_to_grid(
    e: &Event,
    cam: &CameraGeometry,
    w: &WindowConfig,
    window_start: u64,
) -> GridPos {
    let n = w.input_size as u64;
    let max = n - 1;
    let gx = scale_floor(e.x as u64, n, cam.width as u64).min(max);
    let gy = scale_floor(e.y as u64, n, cam.height as u64).min(max);
    let gt = scale_floor(e.t.saturating_sub(window_start), n, w.time_window_ns).min(max);
    GridPos::new(gx as u32, gy as u32, gt as u32)
}

/// A slice of the stream covering one time window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub index: u64,
    pub start_ns: u64,
    pub events: Vec<Event>,
}

/// Groups a time-sorted stream into non-empty windows anchored at the first
/// event's timestamp. Empty windows are not emitted.
pub fn split_windows(events: &[Event], w: &WindowConfig) -> Vec<Window> {
    let Some(first) = events.first() else {
        return Vec::new();
    };
    let t_first = first.t;
    let mut windows: Vec<Window> = Vec::new();
    for e in events {
        let index = window_index(e, t_first, w);
        match windows.last_mut() {
            Some(win) if win.index == index => win.events.push(*e),
            _ => windows.push(Window {
                index,
                start_ns: t_first + index * w.time_window_ns,
                events: vec![*e],
            }),
        }
    }
    windows
}

/// Uniformly random, time-sorted events for tests and demos.
pub fn synthetic_events(seed: u64, count: usize, cam: &CameraGeometry, duration_ns: u64) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ts: Vec<u64> = (0..count).map(|_| rng.gen_range(0..duration_ns.max(1))).collect();
    ts.sort_unstable();
    ts.into_iter()
        .map(|t| Event {
            t,
            x: rng.gen_range(0..cam.width),
            y: rng.gen_range(0..cam.height),
            p: rng.gen_range(0..=1),
        })
        .collect()
}
