//! Non-asymptotic local minimax lower bounds, least-favorable priors and
//! exact estimator risks for one-dimensional parametric families.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod mixtures;
pub mod models;
pub mod numerics;
pub mod priors;
pub mod sweep;

pub use bounds::{BoundMethod, BoundResult, Functional, PolyKernel};
pub use error::{Error, Result};
pub use estimators::{EstimatorSpec, RiskPoint};
pub use mixtures::{GridSpec, MixtureSpec};
pub use models::{DivergenceValue, Family};
pub use numerics::{QuadratureSpec, SearchBox};
pub use priors::{KeplerSolution, NicenessReport, NicenessViolation, Prior};
pub use sweep::{CsvRow, SweepConfig, SweepEstimator, SweepMethod, SweepMode};
