use super::grid::{EdgeSet, Grid, PixelSet};
use super::jordan::{jordan_decompose, Contacts};
use super::lift::{essential_boundary, la_edge_set, random_pixel_set, CutBand};
use crate::connection::{solve_min_connection, Connection};
use crate::error::Result;
use crate::geom::{Domain, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Rasterization allowance in units of `h`.
pub const DEFAULT_KAPPA: f64 = 2.0;

/// Lower-bound comparison for one pixel set.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    /// `h` times the number of edges of `L_A`.
    pub lattice_length: f64,
    /// Length of `L_A` traced through dual-edge midpoints.
    pub corrected_length: f64,
    pub min_connection: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// Fixed data for auditing `length(L_A) >= L(points) - kappa h` over many sets `A`.
#[derive(Clone, Debug)]
pub struct LowerBoundAudit {
    pub grid: Grid,
    pub points: Vec<Vec2>,
    pub cuts: Connection,
    pub band: CutBand,
    pub defect_cells: Vec<usize>,
    pub kappa: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSummary {
    pub samples: usize,
    pub passed: usize,
    pub min_margin: f64,
    pub min_connection: f64,
    pub h: f64,
}

impl LowerBoundAudit {
    pub fn new(domain: &Domain, points: &[Vec2], n: usize) -> Result<Self> {
        let grid = Grid::for_domain(domain, n)?;
        let cuts = solve_min_connection(domain, points)?;
        let band = CutBand::new(&grid, &cuts);
        let defect_cells = points.iter().filter_map(|&p| grid.cell_of(p)).collect();
        Ok(Self {
            grid,
            points: points.to_vec(),
            cuts,
            band,
            defect_cells,
            kappa: DEFAULT_KAPPA,
        })
    }

    pub fn la(&self, a: &PixelSet) -> EdgeSet {
        la_edge_set(&self.grid, a, &self.band)
    }

    pub fn contacts(&self) -> Contacts {
        Contacts::new(&self.grid, None, &self.defect_cells)
    }

    pub fn check(&self, a: &PixelSet) -> Result<BoundCheck> {
        let la = self.la(a);
        let h = self.grid.h;
        let lattice_length = la.length(h);
        let corrected_length = jordan_decompose(&self.grid, &la, &self.contacts())?.corrected_length(&self.grid);
        let allowance = self.kappa * h;
        Ok(BoundCheck {
            lattice_length,
            corrected_length,
            min_connection: self.cuts.total_length,
            allowance,
            pass: lattice_length >= self.cuts.total_length - allowance,
        })
    }

    /// Checks `samples` random sets drawn from independent streams of one seed.
    pub fn run(&self, samples: usize, seed: u64) -> AuditSummary {
        let margins: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let a = random_pixel_set(&self.grid, &mut rng);
                self.la(&a).length(self.grid.h) - self.cuts.total_length + self.kappa * self.grid.h
            })
            .collect();
        AuditSummary {
            samples,
            passed: margins.iter().filter(|&&m| m >= 0.0).count(),
            min_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
            min_connection: self.cuts.total_length,
            h: self.grid.h,
        }
    }

    /// The set of far endpoints (larger coordinate) of all band edges. For an
    /// axis-aligned cut this is the lattice row beside the band, and `L_A`
    /// is the band shifted by one row plus the two end steps.
    pub fn band_shift_witness(&self) -> PixelSet {
        let mut a = PixelSet::empty(&self.grid);
        for e in self.band.edges.edges(&self.grid) {
            let (_, far) = self.grid.edge_nodes(e);
            a.cells[far] = true;
        }
        a
    }

    pub fn boundary_of(&self, a: &PixelSet) -> EdgeSet {
        essential_boundary(&self.grid, a)
    }
}
