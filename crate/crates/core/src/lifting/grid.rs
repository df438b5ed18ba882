use crate::error::{Error, Result};
use crate::geom::{Containment, Domain, Vec2};
use serde::{Deserialize, Serialize};

/// Nodes of a rectangular lattice, masked to a domain.
///
/// Node `(i, j)` sits at `origin + h (i, j)`. A cell `(i, j)` is the square with
/// lower-left node `(i, j)`; it is *full* when its four corners are in the mask.
/// Primal edges join 4-neighbour nodes; each one is dual to the unit edge
/// between the two cells it separates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
}

/// Primal lattice edge from node `(i, j)` along `+x` (axis 0) or `+y` (axis 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub axis: u8,
}

/// Width of the unmasked frame kept around the domain's bounding box.
const PAD: usize = 2;

impl Grid {
    pub fn new(origin: Vec2, h: f64, nx: usize, ny: usize, mask: Vec<bool>) -> Result<Self> {
        if !(h > 0.0) || nx < 3 || ny < 3 || mask.len() != nx * ny {
            return Err(Error::Input(format!("bad grid: h={h}, {nx}x{ny}, mask {}", mask.len())));
        }
        let g = Self { origin, h, nx, ny, mask };
        for j in 0..ny {
            for i in 0..nx {
                if g.mask[g.idx(i, j)] && (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
                    return Err(Error::Input("mask touches the lattice frame".into()));
                }
            }
        }
        Ok(g)
    }

    /// Lattice with `n` cells across the longer side of the domain's bounding box.
    /// The mask holds the nodes strictly inside the domain.
    pub fn for_domain(domain: &Domain, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Input(format!("grid size {n} too small")));
        }
        let (lo, hi) = domain.bbox();
        let h = (hi.x - lo.x).max(hi.y - lo.y) / n as f64;
        let nx = ((hi.x - lo.x) / h).ceil() as usize + 1 + 2 * PAD;
        let ny = ((hi.y - lo.y) / h).ceil() as usize + 1 + 2 * PAD;
        let origin = lo - Vec2::new(PAD as f64 * h, PAD as f64 * h);
        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let x = origin + Vec2::new(i as f64 * h, j as f64 * h);
                mask[j * nx + i] = domain.contains(x) == Containment::Inside;
            }
        }
        let g = Self::new(origin, h, nx, ny, mask)?;
        if !g.mask_connected() {
            return Err(Error::Domain(format!(
                "mask of '{}' at {n} cells is disconnected",
                domain.name()
            )));
        }
        Ok(g)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.h, j as f64 * self.h)
    }

    pub fn node_pos(&self, k: usize) -> Vec2 {
        let (i, j) = self.ij(k);
        self.pos(i, j)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.mask.iter().all(|m| !m)
    }

    #[inline]
    pub fn in_mask(&self, i: usize, j: usize) -> bool {
        self.mask[self.idx(i, j)]
    }

    pub fn mask_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Masked 4-neighbours of node `k`.
    pub fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.ij(k);
        let cand = [
            (i + 1 < self.nx).then(|| k + 1),
            (i > 0).then(|| k - 1),
            (j + 1 < self.ny).then(|| k + self.nx),
            (j > 0).then(|| k - self.nx),
        ];
        cand.into_iter().flatten().filter(move |&m| self.mask[m])
    }

    /// Masked nodes with at least one unmasked 4-neighbour.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.ij(k);
                self.mask[k]
                    && [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
                        .iter()
                        .any(|&(a, b)| !self.in_mask(a, b))
            })
            .collect()
    }

    pub fn mask_connected(&self) -> bool {
        let Some(start) = self.mask.iter().position(|&m| m) else {
            return false;
        };
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1;
        while let Some(k) = stack.pop() {
            for m in self.neighbours(k) {
                if !seen[m] {
                    seen[m] = true;
                    count += 1;
                    stack.push(m);
                }
            }
        }
        count == self.mask_count()
    }

    /// Masked node nearest to `x`, if `x`'s nearest lattice node is masked.
    pub fn nearest_node(&self, x: Vec2) -> Option<usize> {
        let u = ((x.x - self.origin.x) / self.h).round();
        let v = ((x.y - self.origin.y) / self.h).round();
        if u < 0.0 || v < 0.0 || u >= self.nx as f64 || v >= self.ny as f64 {
            return None;
        }
        let k = self.idx(u as usize, v as usize);
        self.mask[k].then_some(k)
    }

    // Edges.

    #[inline]
    pub fn edge_id(&self, e: Edge) -> usize {
        2 * self.idx(e.i, e.j) + e.axis as usize
    }

    #[inline]
    pub fn edge_of_id(&self, id: usize) -> Edge {
        let (i, j) = self.ij(id / 2);
        Edge { i, j, axis: (id % 2) as u8 }
    }

    pub fn edge_count_bound(&self) -> usize {
        2 * self.len()
    }

    /// Node indices of an edge.
    #[inline]
    pub fn edge_nodes(&self, e: Edge) -> (usize, usize) {
        let a = self.idx(e.i, e.j);
        (a, if e.axis == 0 { a + 1 } else { a + self.nx })
    }

    /// Whether both nodes of the edge exist and are masked.
    pub fn edge_in_mask(&self, e: Edge) -> bool {
        let ok = if e.axis == 0 { e.i + 1 < self.nx } else { e.j + 1 < self.ny };
        ok && {
            let (a, b) = self.edge_nodes(e);
            self.mask[a] && self.mask[b]
        }
    }

    /// All masked edges in id order.
    pub fn mask_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.edge_count_bound())
            .map(|id| self.edge_of_id(id))
            .filter(|&e| self.edge_in_mask(e))
    }

    pub fn edge_midpoint(&self, e: Edge) -> Vec2 {
        let p = self.pos(e.i, e.j);
        let half = 0.5 * self.h;
        if e.axis == 0 {
            p + Vec2::new(half, 0.0)
        } else {
            p + Vec2::new(0.0, half)
        }
    }

    // Cells (dual vertices).

    pub fn cell_count(&self) -> usize {
        (self.nx - 1) * (self.ny - 1)
    }

    #[inline]
    pub fn cell_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx - 1) + i
    }

    #[inline]
    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        (c % (self.nx - 1), c / (self.nx - 1))
    }

    pub fn cell_center(&self, c: usize) -> Vec2 {
        let (i, j) = self.cell_ij(c);
        self.pos(i, j) + Vec2::new(0.5 * self.h, 0.5 * self.h)
    }

    /// Corner nodes of a cell in counterclockwise order from the lower left.
    #[inline]
    pub fn cell_corners(&self, c: usize) -> [usize; 4] {
        let (i, j) = self.cell_ij(c);
        let a = self.idx(i, j);
        [a, a + 1, a + 1 + self.nx, a + self.nx]
    }

    /// Sides of a cell as edges, counterclockwise from the bottom.
    pub fn cell_sides(&self, c: usize) -> [Edge; 4] {
        let (i, j) = self.cell_ij(c);
        [
            Edge { i, j, axis: 0 },
            Edge { i: i + 1, j, axis: 1 },
            Edge { i, j: j + 1, axis: 0 },
            Edge { i, j, axis: 1 },
        ]
    }

    pub fn cell_full(&self, c: usize) -> bool {
        self.cell_corners(c).iter().all(|&k| self.mask[k])
    }

    /// The two cells an edge separates. Requires the edge to be away from the frame.
    #[inline]
    pub fn edge_cells(&self, e: Edge) -> (usize, usize) {
        if e.axis == 0 {
            (self.cell_id(e.i, e.j - 1), self.cell_id(e.i, e.j))
        } else {
            (self.cell_id(e.i - 1, e.j), self.cell_id(e.i, e.j))
        }
    }

    /// Cell containing a point, if inside the lattice.
    pub fn cell_of(&self, x: Vec2) -> Option<usize> {
        let u = ((x.x - self.origin.x) / self.h).floor();
        let v = ((x.y - self.origin.y) / self.h).floor();
        if u < 0.0 || v < 0.0 || u >= (self.nx - 1) as f64 || v >= (self.ny - 1) as f64 {
            return None;
        }
        Some(self.cell_id(u as usize, v as usize))
    }
}

/// Per-node 2-vector values on a masked lattice. Values off the mask are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<Vec2>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<Vec2>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = (0..grid.len()).find(|&k| grid.mask[k] && !(values[k].x.is_finite() && values[k].y.is_finite())) {
            return Err(Error::Numeric(format!("non-finite value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(Vec2) -> Vec2) -> Self {
        let values = (0..grid.len())
            .map(|k| if grid.mask[k] { f(grid.node_pos(k)) } else { Vec2::new(0.0, 0.0) })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &Grid, v: Vec2) -> Self {
        Self::from_fn(grid, |_| v)
    }
}

/// Set of nodes (each standing for its dual pixel) inside the mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelSet {
    pub cells: Vec<bool>,
}

impl PixelSet {
    pub fn empty(grid: &Grid) -> Self {
        Self {
            cells: vec![false; grid.len()],
        }
    }

    pub fn full(grid: &Grid) -> Self {
        Self {
            cells: grid.mask.clone(),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(Vec2) -> bool) -> Self {
        Self {
            cells: (0..grid.len()).map(|k| grid.mask[k] && f(grid.node_pos(k))).collect(),
        }
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        self.cells[k]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn symmetric_difference(&self, o: &Self) -> Self {
        Self {
            cells: self.cells.iter().zip(&o.cells).map(|(a, b)| a ^ b).collect(),
        }
    }
}

/// Set of lattice edges, each carrying length `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    bits: Vec<u64>,
    n: usize,
}

impl EdgeSet {
    pub fn empty(grid: &Grid) -> Self {
        let n = grid.edge_count_bound();
        Self {
            bits: vec![0; n.div_ceil(64)],
            n,
        }
    }

    #[inline]
    pub fn contains_id(&self, id: usize) -> bool {
        self.bits[id / 64] >> (id % 64) & 1 == 1
    }

    #[inline]
    pub fn insert_id(&mut self, id: usize) {
        self.bits[id / 64] |= 1 << (id % 64);
    }

    #[inline]
    pub fn remove_id(&mut self, id: usize) {
        self.bits[id / 64] &= !(1 << (id % 64));
    }

    #[inline]
    pub fn toggle_id(&mut self, id: usize) {
        self.bits[id / 64] ^= 1 << (id % 64);
    }

    pub fn contains(&self, g: &Grid, e: Edge) -> bool {
        self.contains_id(g.edge_id(e))
    }

    pub fn insert(&mut self, g: &Grid, e: Edge) {
        self.insert_id(g.edge_id(e))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Euclidean length on the lattice: `h` per edge.
    pub fn length(&self, h: f64) -> f64 {
        h * self.count() as f64
    }

    pub fn symmetric_difference(&self, o: &Self) -> Self {
        Self {
            bits: self.bits.iter().zip(&o.bits).map(|(a, b)| a ^ b).collect(),
            n: self.n,
        }
    }

    pub fn union(&self, o: &Self) -> Self {
        Self {
            bits: self.bits.iter().zip(&o.bits).map(|(a, b)| a | b).collect(),
            n: self.n,
        }
    }

    pub fn difference(&self, o: &Self) -> Self {
        Self {
            bits: self.bits.iter().zip(&o.bits).map(|(a, b)| a & !b).collect(),
            n: self.n,
        }
    }

    pub fn is_subset(&self, o: &Self) -> bool {
        self.bits.iter().zip(&o.bits).all(|(a, b)| a & !b == 0)
    }

    /// Edge ids in increasing order.
    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut x = word;
            std::iter::from_fn(move || {
                if x == 0 {
                    return None;
                }
                let b = x.trailing_zeros() as usize;
                x &= x - 1;
                Some(64 * w + b)
            })
        })
    }

    pub fn edges<'a>(&'a self, g: &'a Grid) -> impl Iterator<Item = Edge> + 'a {
        self.ids().map(move |id| g.edge_of_id(id))
    }

    /// Edge midpoints, for plotting.
    pub fn midpoints(&self, g: &Grid) -> Vec<Vec2> {
        self.edges(g).map(|e| g.edge_midpoint(e)).collect()
    }
}
