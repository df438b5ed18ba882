use super::grid::{Grid, GridField};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Principal angle increment from `a` to `b`, in `(-pi, pi]`.
#[inline]
pub fn angle_step(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

/// Step from node `a` to node `b`. An exact half turn is ambiguous; it is
/// taken as `+pi` along increasing node index so opposite traversals cancel.
#[inline]
fn node_step(field: &GridField, a: usize, b: usize) -> f64 {
    let (x, y) = (field.values[a], field.values[b]);
    if x.cross(y) == 0.0 && x.dot(y) < 0.0 {
        if a < b {
            PI
        } else {
            -PI
        }
    } else {
        angle_step(x, y)
    }
}

/// Winding of the q-field along a closed node loop and whether the field
/// lifts continuously along it (even winding).
pub fn loop_parity(field: &GridField, nodes: &[usize]) -> Result<(i64, bool)> {
    let n = nodes.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = field.values[nodes[k]];
        let b = field.values[nodes[(k + 1) % n]];
        let s = angle_step(a, b);
        if s.abs() >= FRAC_PI_2 || a.norm2() == 0.0 || b.norm2() == 0.0 {
            return Err(Error::Resolution { step: s, at: k });
        }
        total += s;
    }
    let w = (total / (2.0 * PI)).round() as i64;
    Ok((w, w % 2 == 0))
}

/// Winding of the q-field around a full cell; `None` if the cell is not full
/// or a corner value vanishes.
pub fn cell_winding(field: &GridField, c: usize) -> Option<i64> {
    let g = &field.grid;
    let cs = g.cell_corners(c);
    if !cs.iter().all(|&k| g.mask[k] && field.values[k].norm2() > 0.0) {
        return None;
    }
    let mut total = 0.0;
    for k in 0..4 {
        total += node_step(field, cs[k], cs[(k + 1) % 4]);
    }
    Some((total / (2.0 * PI)).round() as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Singularity {
    pub center: Vec2,
    pub winding: i64,
    pub orientable: bool,
    /// The defect's cell group touches a non-full cell.
    pub touches_boundary: bool,
    /// Cells with nonzero winding in this group.
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SingularityReport {
    pub defects: Vec<Singularity>,
}

impl SingularityReport {
    pub fn non_orientable(&self) -> impl Iterator<Item = &Singularity> {
        self.defects.iter().filter(|d| !d.orientable)
    }

    pub fn total_winding(&self) -> i64 {
        self.defects.iter().map(|d| d.winding).sum()
    }

    /// One representative cell per defect: the cell containing the defect center.
    pub fn defect_cells(&self, g: &Grid) -> Vec<usize> {
        self.defects
            .iter()
            .map(|d| g.cell_of(d.center).unwrap_or(d.cells[0]))
            .collect()
    }
}

fn cell_neighbours8(g: &Grid, c: usize) -> impl Iterator<Item = usize> + '_ {
    let (i, j) = g.cell_ij(c);
    let (w, h) = (g.nx - 1, g.ny - 1);
    (-1i64..=1)
        .flat_map(move |dj| (-1i64..=1).map(move |di| (di, dj)))
        .filter(|&(di, dj)| di != 0 || dj != 0)
        .filter_map(move |(di, dj)| {
            let (a, b) = (i as i64 + di, j as i64 + dj);
            (a >= 0 && b >= 0 && a < w as i64 && b < h as i64).then(|| g.cell_id(a as usize, b as usize))
        })
}

/// Plaquette windings grouped into defects by 8-connectivity. Groups with zero
/// total winding are dropped; each reported center is the |winding|-weighted
/// mean of its cell centers.
pub fn detect_singularities(field: &GridField) -> SingularityReport {
    let g = &field.grid;
    let nc = g.cell_count();
    let wind: Vec<i64> = (0..nc).map(|c| cell_winding(field, c).unwrap_or(0)).collect();
    let mut group = vec![usize::MAX; nc];
    let mut defects = Vec::new();
    for c0 in 0..nc {
        if wind[c0] == 0 || group[c0] != usize::MAX {
            continue;
        }
        let gid = defects.len();
        let mut cells = vec![c0];
        group[c0] = gid;
        let mut k = 0;
        while k < cells.len() {
            let c = cells[k];
            k += 1;
            for m in cell_neighbours8(g, c) {
                if wind[m] != 0 && group[m] == usize::MAX {
                    group[m] = gid;
                    cells.push(m);
                }
            }
        }
        cells.sort_unstable();
        let winding: i64 = cells.iter().map(|&c| wind[c]).sum();
        let weight: f64 = cells.iter().map(|&c| wind[c].abs() as f64).sum();
        let center = cells
            .iter()
            .fold(Vec2::new(0.0, 0.0), |acc, &c| acc + g.cell_center(c) * (wind[c].abs() as f64))
            / weight;
        let touches_boundary = cells
            .iter()
            .any(|&c| cell_neighbours8(g, c).any(|m| !g.cell_full(m)));
        defects.push(Singularity {
            center,
            winding,
            orientable: winding % 2 == 0,
            touches_boundary,
            cells,
        });
    }
    defects.retain(|d| d.winding != 0);
    SingularityReport { defects }
}

/// Unit q-field `prod_j ((z - a_j)/|z - a_j|)^sign`. Zero at a node that coincides with a point.
pub fn vortex_field(grid: &Grid, points: &[Vec2], sign: i32) -> GridField {
    GridField::from_fn(grid, |x| {
        let mut z = Vec2::new(1.0, 0.0);
        for &a in points {
            let d = x - a;
            let r = d.norm();
            if r == 0.0 {
                return Vec2::new(0.0, 0.0);
            }
            let u = d / r;
            let u = if sign >= 0 { u } else { Vec2::new(u.x, -u.y) };
            z = Vec2::new(z.x * u.x - z.y * u.y, z.x * u.y + z.y * u.x);
        }
        z
    })
}
