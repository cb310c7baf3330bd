//! Exact truncated power series in one and two variables.

pub mod bi;
pub mod borel;
pub mod rat;
pub mod taylor;
pub mod uni;

pub use bi::BiSeries;
pub use borel::{borel_m, borel_m_log, check_nagumo, check_nagumo_higher, GevreyOrder, NagumoReport};
pub use rat::Rat;
pub use taylor::{valuation2, TaylorPoly, Valuation};
pub use uni::{Dominance, UniSeries};
