pub mod basis;
pub mod covering;
pub mod error;
pub mod grid;
pub mod harness;
pub mod interp;
pub mod maximal;
pub mod orlicz;
pub mod weights;

pub use basis::{Basis, BasisBudget, BasisSpec, Rect};
pub use error::{Error, Result};
pub use grid::{CellSet, GridBox, GridFunction, SummedTable};
pub use maximal::{Algorithm, MaximalOptions};
pub use orlicz::{NormResult, YoungSpec};

/// Crate version, echoed in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
