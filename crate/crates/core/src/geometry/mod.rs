//! Constant-curvature model spaces: distances, ball volumes, heat kernels.
//!
//! All heat kernels are for the generator `Δ/2` (Brownian-motion time).

mod heat;
mod space;
mod volume;

pub use heat::{
    chapman_kolmogorov_residual, heat_kernel, heat_kernel_at_distance, heat_mass, heat_radial_moment,
    radial_cutoff, radial_heat_density, CkResidual,
};
pub use space::{ModelSpace, Point, SpaceKind};
pub use volume::{h_kernel, model_ball_volume, unit_sphere_area, VolumeProfile};
