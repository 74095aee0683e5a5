//! Asynchronous-stage graph: one vertex per grid cell, edges to previously
//! captured vertices within an L∞ radius.

use std::collections::HashMap;

use crate::event_ingest::{Event, GridPos};

/// Neighbourhood radius of the asynchronous stage, per dimension.
pub const ASYNC_RADIUS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridVertex {
    pub pos: GridPos,
    pub feature: Vec<i8>,
}

/// Signed int8 encoding of the event polarity. `scale` is the input
/// quantization step, so +1.0 is stored as `round(1 / scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarityEncoding {
    pub scale: f64,
}

impl PolarityEncoding {
    pub fn new(scale: f64) -> Self {
        Self { scale }
    }

    pub fn level(&self) -> i8 {
        (1.0 / self.scale).round().clamp(1.0, 127.0) as i8
    }
}

impl Default for PolarityEncoding {
    fn default() -> Self {
        Self { scale: 1.0 / 127.0 }
    }
}

pub fn event_to_vertex(e: &Event, pos: GridPos, enc: PolarityEncoding) -> GridVertex {
    let q = enc.level();
    GridVertex { pos, feature: vec![if e.p == 1 { q } else { -q }] }
}

/// Occupancy bitmap over the full `size³` grid plus the vertices in insertion
/// order.
#[derive(Debug, Clone)]
pub struct VertexStore {
    size: u32,
    radius: u32,
    occupied: Vec<u64>,
    index: HashMap<u32, usize>,
    vertices: Vec<GridVertex>,
}

impl VertexStore {
    pub fn new(size: u32, radius: u32) -> Self {
        let cells = (size as usize).pow(3);
        Self {
            size,
            radius,
            occupied: vec![0; cells.div_ceil(64)],
            index: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    /// Store for the asynchronous stage (`R = 3`).
    pub fn for_async(size: u32) -> Self {
        Self::new(size, ASYNC_RADIUS)
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[GridVertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<GridVertex> {
        self.vertices
    }

    fn cell(&self, pos: GridPos) -> u32 {
        (pos.gt * self.size + pos.gy) * self.size + pos.gx
    }

    fn is_set(&self, cell: u32) -> bool {
        self.occupied[cell as usize / 64] >> (cell % 64) & 1 == 1
    }

    pub fn contains(&self, pos: GridPos) -> bool {
        self.is_set(self.cell(pos))
    }

    pub fn get(&self, pos: GridPos) -> Option<&GridVertex> {
        let cell = self.cell(pos);
        if !self.is_set(cell) {
            return None;
        }
        self.index.get(&cell).map(|&i| &self.vertices[i])
    }

    /// Stores `v` unless its cell is already taken. Later events landing in
    /// an occupied cell are dropped.
    pub fn insert_vertex(&mut self, v: GridVertex) -> bool {
        let s = self.size;
        assert!(
            v.pos.gx < s && v.pos.gy < s && v.pos.gt < s,
            "vertex {:?} outside a {s}³ grid",
            v.pos
        );
        let cell = self.cell(v.pos);
        if self.is_set(cell) {
            return false;
        }
        self.occupied[cell as usize / 64] |= 1 << (cell % 64);
        self.index.insert(cell, self.vertices.len());
        self.vertices.push(v);
        true
    }

    /// All stored vertices other than `pos` itself within the L∞ ball of
    /// radius R, ordered by (Δgt, Δgy, Δgx).
    pub fn find_neighbors(&self, pos: GridPos) -> Vec<&GridVertex> {
        let r = self.radius as i64;
        let s = self.size as i64;
        let range = |c: u32| ((c as i64 - r).max(0), (c as i64 + r).min(s - 1));
        let (t0, t1) = range(pos.gt);
        let (y0, y1) = range(pos.gy);
        let (x0, x1) = range(pos.gx);
        let mut out = Vec::new();
        for gt in t0..=t1 {
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    let p = GridPos::new(gx as u32, gy as u32, gt as u32);
                    if p == pos {
                        continue;
                    }
                    if let Some(v) = self.get(p) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(gx: u32, gy: u32, gt: u32) -> GridVertex {
        GridVertex { pos: GridPos::new(gx, gy, gt), feature: vec![1] }
    }

    fn brute_force(store: &VertexStore, q: GridPos) -> Vec<GridPos> {
        let r = store.radius() as i64;
        let mut hits: Vec<GridPos> = store
            .vertices()
            .iter()
            .map(|u| u.pos)
            .filter(|&p| {
                p != q
                    && (p.gx as i64 - q.gx as i64).abs() <= r
                    && (p.gy as i64 - q.gy as i64).abs() <= r
                    && (p.gt as i64 - q.gt as i64).abs() <= r
            })
            .collect();
        hits.sort_by_key(|p| (p.gt, p.gy, p.gx));
        hits
    }

    #[test]
    fn insertion_rules() {
        let mut s = VertexStore::for_async(16);
        assert!(s.insert_vertex(v(1, 2, 3)));
        assert!(!s.insert_vertex(GridVertex { feature: vec![-5], ..v(1, 2, 3) }));
        assert_eq!(s.get(GridPos::new(1, 2, 3)).unwrap().feature, vec![1]);
        assert!(s.insert_vertex(v(2, 2, 3)));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn radius_boundary() {
        let q = GridPos::new(10, 10, 5);
        let mut s = VertexStore::for_async(32);
        assert!(s.find_neighbors(q).is_empty());
        s.insert_vertex(v(13, 10, 5));
        assert_eq!(s.find_neighbors(q).len(), 1);

        let mut s = VertexStore::for_async(32);
        s.insert_vertex(v(14, 10, 5));
        assert!(s.find_neighbors(q).is_empty());
    }

    #[test]
    fn mixed_store_matches_scan() {
        let mut s = VertexStore::for_async(32);
        for p in [v(12, 13, 4), v(7, 7, 3), v(10, 10, 1)] {
            s.insert_vertex(p);
        }
        let q = GridPos::new(10, 10, 5);
        let got: Vec<GridPos> = s.find_neighbors(q).iter().map(|u| u.pos).collect();
        assert_eq!(got, vec![GridPos::new(7, 7, 3), GridPos::new(12, 13, 4)]);
        assert_eq!(got, brute_force(&s, q));
    }

    #[test]
    fn query_cell_is_excluded() {
        let mut s = VertexStore::for_async(8);
        s.insert_vertex(v(0, 0, 0));
        assert!(s.find_neighbors(GridPos::new(0, 0, 0)).is_empty());
    }

    #[test]
    fn polarity_levels() {
        let e1 = Event { t: 0, x: 0, y: 0, p: 1 };
        let e0 = Event { p: 0, ..e1 };
        let pos = GridPos::new(0, 0, 0);
        assert_eq!(event_to_vertex(&e1, pos, PolarityEncoding::default()).feature, vec![127]);
        assert_eq!(event_to_vertex(&e0, pos, PolarityEncoding::default()).feature, vec![-127]);
        assert_eq!(event_to_vertex(&e1, pos, PolarityEncoding::new(1.0 / 64.0)).feature, vec![64]);
    }

    proptest! {
        #[test]
        fn neighbors_equal_brute_force(
            cells in prop::collection::vec((0u32..12, 0u32..12, 0u32..12), 0..300),
            q in (0u32..12, 0u32..12, 0u32..12),
        ) {
            let mut s = VertexStore::for_async(12);
            for (x, y, t) in cells {
                s.insert_vertex(v(x, y, t));
            }
            prop_assert!(s.len() <= 12 * 12 * 12);
            let q = GridPos::new(q.0, q.1, q.2);
            let got: Vec<GridPos> = s.find_neighbors(q).iter().map(|u| u.pos).collect();
            prop_assert_eq!(got, brute_force(&s, q));
        }

        #[test]
        fn spatial_symmetry_at_equal_time(
            a in (0u32..16, 0u32..16), b in (0u32..16, 0u32..16), t in 0u32..16,
        ) {
            let pa = GridPos::new(a.0, a.1, t);
            let pb = GridPos::new(b.0, b.1, t);
            prop_assume!(pa != pb);
            let mut sa = VertexStore::for_async(16);
            sa.insert_vertex(v(pb.gx, pb.gy, t));
            let mut sb = VertexStore::for_async(16);
            sb.insert_vertex(v(pa.gx, pa.gy, t));
            prop_assert_eq!(sa.find_neighbors(pa).len(), sb.find_neighbors(pb).len());
        }
    }
}
