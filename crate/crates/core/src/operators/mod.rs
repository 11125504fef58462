//! Discrete Bochner Laplacians on weighted graphs with unitary connections.

pub mod generators;
mod laplacian;
mod mesh;
mod ops;
mod section;
pub mod spectral;

pub use laplacian::{bochner_laplacian, scalar_laplacian, BochnerLaplacian, Csr};
pub use mesh::{BundleMesh, Edge, Vertex, C64, UNITARY_TOLERANCE};
pub use ops::{
    form_limit_check, form_sum_spectrum, klmn_optimal_c1, kato_inequality_gap, quad_form, semigroup,
    semigroup_domination_gap, DominationGap, FormLimit, FormValue, SpectrumEntry, EIGEN_RESIDUAL_TOLERANCE,
};
pub use section::{fiber_split, EndoField, FiberSplit, Section, HERMITIAN_TOLERANCE};
