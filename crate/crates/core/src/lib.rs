//! Bivariate generalized Weibull distribution: density, moments, copula
//! dependence measures, simulation and inference.

pub mod bayes;
pub mod copula;
pub mod data;
pub mod distribution;
pub mod error;
pub mod harness;
pub mod mle;
pub mod moments;
pub mod optim;
pub mod quad;
pub mod sampling;
pub mod special;
pub mod stats;

pub use data::BivariateSample;
pub use distribution::{BgwParams, EwParams, Margin};
pub use error::{BgwError, Result};
pub use sampling::RngHandle;
pub use special::SeriesControl;
