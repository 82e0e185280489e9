//! Elastic statistical analysis of time-evolving genus-0 surfaces.
//!
//! Surfaces sampled on a pole-offset spherical grid are compared through
//! their square-root normal fields (SRNFs), where the L2 metric matches a
//! partial elastic metric on the surfaces themselves. Deforming surfaces
//! become trajectories in that space; transported square-root velocity
//! fields, dynamic-programming time warps, straight-line geodesics, Karcher
//! means, PCA modes, and random synthesis all operate there, with numeric
//! inversion back to surfaces for visualization.

pub mod align;
pub mod diffeo;
pub mod error;
pub mod eval;
pub mod field;
pub mod geodesic;
pub mod grid;
pub mod harmonics;
pub mod inversion;
pub mod io;
pub mod par;
pub mod registration;
pub mod rotation;
pub mod srnf;
pub mod stats;
pub mod surface;
pub mod synth;
pub mod trajectory;

pub use align::{dp_align, dp_align_refined, refine_warp, DpGram};
pub use diffeo::{apply_diffeo_surface, srnf_group_action, SphereDiffeo};
pub use error::{F4dError, Result};
pub use field::{l2_distance, l2_inner, l2_norm, Field3};
pub use grid::{SphericalGrid, EPS_DEG};
pub use inversion::{invert_srnf, invert_trajectory, InversionConfig};
pub use registration::{
    make_tangent_basis_default, optimal_rotation, register_diffeo, register_pair,
    register_trajectory, registration_error, RegistrationConfig, RegistrationResult,
};
pub use rotation::Rotation3;
pub use srnf::{srnf_map, Srnf};
pub use surface::{normal_field, preshape_normalize, surface_area, Surface};
pub use trajectory::{
    trajectory_distance, tsrvf_inverse, tsrvf_map, warp_action, TimeWarp, Trajectory, Tsrvf,
};
