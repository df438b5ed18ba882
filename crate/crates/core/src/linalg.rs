//! Sparse 5-point operators on masked lattices and a Jacobi-preconditioned
//! conjugate gradient solver.

use crate::lifting::Grid;

const NONE: u32 = u32::MAX;

/// Graph Laplacian restricted to a set of unknown nodes.
///
/// `deg[k]` counts every lattice neighbour that takes part in the operator,
/// including fixed (Dirichlet) ones, whose values enter only the right-hand side.
#[derive(Clone, Debug)]
pub(crate) struct Stencil {
    /// Node index of each unknown.
    pub nodes: Vec<usize>,
    /// Neighbouring unknowns, padded with `NONE`.
    pub nbr: Vec<[u32; 4]>,
    /// Neighbouring fixed nodes (node indices), padded with `usize::MAX`.
    pub fixed_nbr: Vec<[usize; 4]>,
    pub deg: Vec<f64>,
}

impl Stencil {
    /// Unknowns are the nodes with `unknown[k]`; neighbours with `fixed[k]` are
    /// Dirichlet couplings; other nodes are absent (natural boundary).
    pub fn new(g: &Grid, unknown: &[bool], fixed: &[bool]) -> Self {
        let nodes: Vec<usize> = (0..g.len()).filter(|&k| unknown[k]).collect();
        let mut slot = vec![NONE; g.len()];
        for (s, &k) in nodes.iter().enumerate() {
            slot[k] = s as u32;
        }
        let mut nbr = Vec::with_capacity(nodes.len());
        let mut fixed_nbr = Vec::with_capacity(nodes.len());
        let mut deg = Vec::with_capacity(nodes.len());
        for &k in &nodes {
            let mut a = [NONE; 4];
            let mut f = [usize::MAX; 4];
            let mut d = 0.0;
            for (t, m) in g.neighbours(k).enumerate() {
                if unknown[m] {
                    a[t] = slot[m];
                    d += 1.0;
                } else if fixed[m] {
                    f[t] = m;
                    d += 1.0;
                }
            }
            nbr.push(a);
            fixed_nbr.push(f);
            deg.push(d);
        }
        Self {
            nodes,
            nbr,
            fixed_nbr,
            deg,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `y = (c + deg) x - sum of neighbouring unknowns`, i.e. `(c - Laplacian) x` in lattice units.
    pub fn apply_shifted(&self, c: f64, x: &[f64], y: &mut [f64]) {
        for s in 0..self.len() {
            let mut acc = (c + self.deg[s]) * x[s];
            for &t in &self.nbr[s] {
                if t != NONE {
                    acc -= x[t as usize];
                }
            }
            y[s] = acc;
        }
    }

    /// Sum of fixed neighbour values for each unknown.
    pub fn fixed_sum(&self, values: &[f64]) -> Vec<f64> {
        self.fixed_nbr
            .iter()
            .map(|f| f.iter().filter(|&&m| m != usize::MAX).map(|&m| values[m]).sum())
            .collect()
    }

    /// Solves `(c - Laplacian) x = b` in place from the initial guess in `x`.
    pub fn solve_shifted(&self, c: f64, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> (usize, f64) {
        let diag: Vec<f64> = self.deg.iter().map(|d| c + d).collect();
        pcg(|v, out| self.apply_shifted(c, v, out), &diag, b, x, rel_tol, max_iter)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients. Returns the iteration count and
/// the final residual norm relative to `|b|`.
pub(crate) fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> (usize, f64) {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return (0, 0.0);
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while it < max_iter && rel > rel_tol {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        it += 1;
    }
    (it, rel)
}
