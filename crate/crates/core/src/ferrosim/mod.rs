//! Discrete ferronematic free energy in the q-vector / magnetization pair
//! `(q, M)`, its Euler-Lagrange residuals and a semi-implicit gradient flow,
//! plus diagnostics: the decoupled Allen-Cahn variable `u` and the `M` walls.
//!
//! Lattice conventions follow [`crate::lifting::Grid`]: nodes inside the
//! domain carry unknowns, `q` is clamped to the boundary datum on the outer
//! ring of nodes, and `M` has natural boundary rows.

mod competitor;
mod decouple;
mod energy;
mod params;
mod relax;
mod state;
mod wall;

pub use competitor::{recovery_competitor, Competitor};
pub use decouple::{decoupled_energy, g_eps, h_u, wall_transition_cost, wells, Decoupled, WallCost};
pub use energy::{el_residual, total_energy, EnergyParts, Residual};
pub use params::{kappa_eps, kappa_star, potential_f_eps, potential_grad, potential_minimizer, qmm, Params};
pub use relax::{
    max_principle_audit, perturb, relax, relax_minimize, FlowOptions, Method, FlowResult, LedgerRow, Level, MaxPrinciple,
    RelaxOutcome, Schedule,
};
pub use state::{boundary_datum, sample, BoundaryDatum, Problem, State};
pub use wall::{detect_wall, detect_wall_u, WallReport};
