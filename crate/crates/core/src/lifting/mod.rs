//! Liftings of lattice q-fields through the double cover, their jump sets,
//! and the pixel-set calculus behind the jump-length lower bound.
//!
//! A lifting is a director field `v` with `v^2 = q`. Away from cuts it is
//! obtained by continuing the half angle along lattice edges; any other
//! lifting differs from it by a deck flip on a pixel set `A`, and its jump set
//! is `boundary(A) xor band(cuts)`.

mod bound;
mod fleury;
mod grid;
mod io;
mod jordan;
mod lift;
mod winding;

pub use bound::{AuditSummary, BoundCheck, LowerBoundAudit, DEFAULT_KAPPA};
pub use fleury::{fleury_trails, Trail};
pub use grid::{Edge, EdgeSet, Grid, GridField, PixelSet};
pub use io::{edges_to_text, field_from_bytes, field_from_text, field_to_bytes, field_to_text};
pub use jordan::{classify_arcs, jordan_decompose, Arc, ArcClass, ContactTag, Contacts, Decomposition};
pub use lift::{
    construct_lifting, defect_core, essential_boundary, is_jump, jump_set, la_edge_set, lifting_from_set,
    random_pixel_set, rasterize_segment, set_from_lifting, symdiff_boundary_check, CutBand, Lifting,
};
pub use winding::{
    angle_step, cell_winding, detect_singularities, loop_parity, vortex_field, Singularity,
    SingularityReport,
};

#[cfg(test)]
mod tests;
