//! Numerical laboratory for the Dirichlet heat kernel on planar angular
//! domains (wedges), mixed boundary/vertex-weighted `L_p` norms, heat
//! convolutions driven by deterministic or white-noise forcing, and
//! grid/refinement certification of the associated kernel and operator
//! bounds.

pub mod convolution;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod lemmas;
pub mod norms;
pub mod quad;
pub mod special;
pub mod theorems;

pub use convolution::{ConvRules, TestField, TimeProfile};
pub use error::{Result, WedgeError};
pub use geometry::{Wedge, WedgePoint, WeightParams};
pub use kernel::KernelConfig;
pub use lemmas::{RefinementPlan, SupremumReport, Verdict};
pub use norms::{ScalarField, SequenceField};
pub use quad::{QuadResult, WedgeQuadRule};
pub use theorems::{RatioRow, RatioTable};
