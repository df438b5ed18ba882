//! Canonical harmonic maps with prescribed vortices, the renormalized energy
//! `W`, the vortex core energy and the wall-augmented energy `W_beta`.
//!
//! All vortices carry the same q-degree `sign = +-1`. The canonical map is
//! `q* = prod_j ((z - a_j)/|z - a_j|)^sign * e^{iH}` where the phase correction
//! `H` is discrete harmonic and matches the boundary datum on the outer ring
//! of lattice nodes.

mod core;
mod energy;
mod harmonic;
mod wbeta;

pub use self::core::{core_energy, core_energy_limit, CoreLimit, CoreProfile, CORE_EPS, RADIAL_CELLS};
pub use energy::{renormalized_energy, sigma_window, WReport};
pub use harmonic::{canonical_harmonic_map, BoundaryPhase, HarmonicMap, HarmonicSolver, VortexConfig};
pub use wbeta::{minimize_w_beta, w_beta, MinimizeOptions, StartRecord, WBeta, WBetaMin};
