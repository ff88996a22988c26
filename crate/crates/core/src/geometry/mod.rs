//! Parametric blade geometry: definition, deformation, lofting and point
//! sets on the blade surfaces.

pub mod blade;
pub mod gauss;
pub mod grid;
pub mod interp;
pub mod io;
pub mod profile;
pub mod surface;

pub use blade::{
    deform_blade, BladeDefinition, DeformationParams, ParameterBox, SectionDefinition,
};
pub use grid::{
    gauss_quadrature_grid, integrate_patch, patch_area, root_points, sample_surface, tensor_rule,
    GridSpec, QuadratureGrid, SurfaceLattice, SurfaceSample,
};
pub use profile::{build_section_profile, SectionProfile, Side};
pub use surface::{loft_surface, BladeSurface};
