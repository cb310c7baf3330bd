//! Newton polygon, the (N), (GP) and (R) conditions, and the indices
//! `σ₀`, `s₀`, `s₁`.

pub mod charpoly;
pub mod conditions;
pub mod grid;
pub mod indices;
pub mod polygon;
pub mod report;
pub mod svg;

pub use charpoly::{char_poly, check_gp, CharPoly, GpReport, GpVerdict, Root};
pub use conditions::{check_n, NReport};
pub use grid::{phi_bound_suite, PhiBoundReport};
pub use indices::{compute_indices, is_regular_singular, sigma0, IndexResult, IndexValue, S0Attribution, Sigma0};
pub use polygon::{build_polygon, NewtonPolygon, PolygonReport};
pub use report::{analyze, Analysis, AnalysisReport, REPORT_SCHEMA};
pub use svg::render_svg;
