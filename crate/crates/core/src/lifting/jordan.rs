use super::grid::{Edge, EdgeSet, Grid};
use super::lift::CutBand;
use crate::connection::{Connection, EndTag};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::Serialize;
use std::collections::BTreeMap;

/// Why a dual vertex (cell) may terminate an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ContactTag {
    BoundaryContact,
    CutContact,
    DefectCell,
}

/// Tagged cells. When several tags apply the strongest wins:
/// defect over cut over boundary.
#[derive(Clone, Debug, Default)]
pub struct Contacts {
    pub tags: BTreeMap<usize, ContactTag>,
}

impl Contacts {
    /// Non-full cells are boundary contacts; cells touched by the band are cut
    /// contacts; the given defect cells are defect cells.
    pub fn new(g: &Grid, band: Option<&CutBand>, defect_cells: &[usize]) -> Self {
        let mut tags = BTreeMap::new();
        for c in 0..g.cell_count() {
            if !g.cell_full(c) {
                tags.insert(c, ContactTag::BoundaryContact);
            }
        }
        if let Some(b) = band {
            for &c in b.touches.keys() {
                let t = tags.entry(c).or_insert(ContactTag::CutContact);
                *t = (*t).max(ContactTag::CutContact);
            }
        }
        for &c in defect_cells {
            tags.insert(c, ContactTag::DefectCell);
        }
        Self { tags }
    }

    pub fn get(&self, c: usize) -> Option<ContactTag> {
        self.tags.get(&c).copied()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Arc {
    pub edges: Vec<Edge>,
    /// Cells visited, from `start` to `end`.
    pub cells: Vec<usize>,
    pub start: (usize, ContactTag),
    pub end: (usize, ContactTag),
}

impl Arc {
    pub fn is_closed(&self) -> bool {
        self.start.0 == self.end.0
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Decomposition {
    /// Simple cycles; each lists its edges and its cells in order.
    pub loops: Vec<(Vec<Edge>, Vec<usize>)>,
    pub arcs: Vec<Arc>,
}

impl Decomposition {
    pub fn edge_count(&self) -> usize {
        self.loops.iter().map(|l| l.0.len()).sum::<usize>() + self.arcs.iter().map(|a| a.edges.len()).sum::<usize>()
    }

    /// Euclidean length of the polylines through every fourth dual-edge
    /// midpoint (half edges to the end cells of arcs). Thinning the staircase
    /// removes most of the lattice anisotropy; straight runs are measured to
    /// within a fraction of `h`.
    pub fn corrected_length(&self, g: &Grid) -> f64 {
        let mut total = 0.0;
        for (edges, _) in &self.loops {
            let mut pts: Vec<Vec2> = edges.iter().map(|&e| g.edge_midpoint(e)).collect();
            pts.push(pts[0]);
            total += thinned_length(&pts);
        }
        for a in &self.arcs {
            let mut pts = vec![g.cell_center(a.start.0)];
            pts.extend(a.edges.iter().map(|&e| g.edge_midpoint(e)));
            pts.push(g.cell_center(a.end.0));
            total += thinned_length(&pts);
        }
        total
    }
}

const THIN_STRIDE: usize = 4;

fn thinned_length(pts: &[Vec2]) -> f64 {
    let last = pts.len() - 1;
    let mut kept: Vec<Vec2> = pts.iter().step_by(THIN_STRIDE).copied().collect();
    if last % THIN_STRIDE != 0 {
        kept.push(pts[last]);
    }
    kept.windows(2).map(|w| w[0].dist(w[1])).sum()
}

struct DualGraph {
    adj: BTreeMap<usize, Vec<usize>>,
    used: BTreeMap<usize, bool>,
}

impl DualGraph {
    fn next_unused(&self, c: usize) -> Option<usize> {
        self.adj.get(&c)?.iter().copied().find(|id| !self.used[id])
    }
}

/// Splits an edge set into simple cycles and maximal simple paths between
/// contact cells on the dual lattice.
pub fn jordan_decompose(g: &Grid, edges: &EdgeSet, contacts: &Contacts) -> Result<Decomposition> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut used = BTreeMap::new();
    for id in edges.ids() {
        let (c1, c2) = g.edge_cells(g.edge_of_id(id));
        adj.entry(c1).or_default().push(id);
        adj.entry(c2).or_default().push(id);
        used.insert(id, false);
    }
    for (&c, es) in &adj {
        if es.len() % 2 == 1 && contacts.get(c).is_none() {
            let (i, j) = g.cell_ij(c);
            return Err(Error::Malformed {
                i: i as i64,
                j: j as i64,
                degree: es.len(),
            });
        }
    }
    let mut dg = DualGraph { adj, used };
    let mut out = Decomposition::default();
    let other = |id: usize, c: usize| {
        let (a, b) = g.edge_cells(g.edge_of_id(id));
        if a == c {
            b
        } else {
            a
        }
    };
    let starts: Vec<usize> = dg.adj.keys().copied().filter(|&c| contacts.get(c).is_some()).collect();
    let rest: Vec<usize> = dg.adj.keys().copied().filter(|&c| contacts.get(c).is_none()).collect();
    for (phase, roots) in [(0, &starts), (1, &rest)] {
        for &root in roots.iter() {
            while let Some(first) = dg.next_unused(root) {
                // Walk from root, excising cycles through untagged cells.
                let mut cells = vec![root];
                let mut path: Vec<usize> = Vec::new();
                let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
                pos.insert(root, 0);
                let mut next = Some(first);
                while let Some(id) = next {
                    dg.used.insert(id, true);
                    let cur = *cells.last().unwrap();
                    let c = other(id, cur);
                    path.push(id);
                    let tagged = contacts.get(c).is_some();
                    if phase == 0 && tagged {
                        cells.push(c);
                        out.arcs.push(Arc {
                            edges: path.iter().map(|&e| g.edge_of_id(e)).collect(),
                            start: (root, contacts.get(root).unwrap()),
                            end: (c, contacts.get(c).unwrap()),
                            cells,
                        });
                        break;
                    }
                    if let Some(&k) = pos.get(&c) {
                        let loop_edges: Vec<Edge> = path.drain(k..).map(|e| g.edge_of_id(e)).collect();
                        let mut loop_cells: Vec<usize> = cells.drain(k + 1..).collect();
                        for x in &loop_cells {
                            pos.remove(x);
                        }
                        loop_cells.insert(0, c);
                        out.loops.push((loop_edges, loop_cells));
                    } else {
                        pos.insert(c, cells.len());
                        cells.push(c);
                    }
                    let cur = *cells.last().unwrap();
                    next = dg.next_unused(cur);
                    if next.is_none() && !(phase == 1 && cells.len() == 1) {
                        let (i, j) = g.cell_ij(cur);
                        return Err(Error::Malformed {
                            i: i as i64,
                            j: j as i64,
                            degree: dg.adj[&cur].len(),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Arc taxonomy relative to a cut system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ArcClass {
    /// Endpoints on two distinct cut segments.
    EssentialDistinctSegments,
    /// One endpoint on the boundary, the other on a cut segment that does not reach it.
    EssentialBoundaryToInterior,
    /// (i) closed curve.
    Closed,
    /// (ii) both endpoints on the boundary.
    BoundaryToBoundary,
    /// (iii) both endpoints on the same cut segment.
    SameSegment,
    /// (iv) boundary to a cut segment that itself reaches the boundary.
    BoundaryToBoundarySegment,
}

impl ArcClass {
    pub fn is_essential(self) -> bool {
        matches!(self, Self::EssentialDistinctSegments | Self::EssentialBoundaryToInterior)
    }
}

pub fn classify_arcs(arcs: &[Arc], band: &CutBand, cuts: &Connection) -> Vec<ArcClass> {
    let reaches_boundary = |k: usize| {
        let s = &cuts.segments[k];
        matches!(s.ends.0, EndTag::Boundary(_)) || matches!(s.ends.1, EndTag::Boundary(_))
    };
    let segs = |c: usize, tag: ContactTag| -> Option<Vec<usize>> {
        match tag {
            ContactTag::BoundaryContact => None,
            _ => Some(band.touches.get(&c).cloned().unwrap_or_default()),
        }
    };
    arcs.iter()
        .map(|a| {
            if a.is_closed() {
                return ArcClass::Closed;
            }
            match (segs(a.start.0, a.start.1), segs(a.end.0, a.end.1)) {
                (None, None) => ArcClass::BoundaryToBoundary,
                (Some(x), Some(y)) => {
                    if x.iter().any(|k| y.contains(k)) {
                        ArcClass::SameSegment
                    } else {
                        ArcClass::EssentialDistinctSegments
                    }
                }
                (Some(x), None) | (None, Some(x)) => {
                    if x.iter().all(|&k| reaches_boundary(k)) {
                        ArcClass::BoundaryToBoundarySegment
                    } else {
                        ArcClass::EssentialBoundaryToInterior
                    }
                }
            }
        })
        .collect()
}
