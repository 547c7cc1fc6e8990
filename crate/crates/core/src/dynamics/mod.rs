//! Repelling periodic points, Poincaré linearizers `L = h(· + u)`,
//! multipliers, fixed-point classification and Julia-set rasters.

mod classify;
mod julia;
mod linearizer;
mod periodic;

pub use classify::{classify_fixed_point, FixedPointClass};
pub use julia::{
    julia_render, julia_render_slice, PixelClass, Raster, CONVERGENCE_RADIUS, ESCAPE_RADIUS,
};
pub use linearizer::{
    build_linearizer, exact_multiplier, linearizer_residual, multiplier, multiplier_with_hint,
    LinearizerSpec,
};
pub use periodic::{
    default_radius, periodic_points, records_to_csv, records_to_json, PeriodicPointRecord,
    DEDUP_TOL, PERIODIC_TOL,
};
