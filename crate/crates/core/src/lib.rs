//! Goodness-of-fit tests for an affine frontier in boundary regression.
//!
//! Observations `Y_i = g(x_i) + ε_i` have errors `ε_i < 0`, so `g` is the upper boundary of
//! the response support. The crate estimates `g` by a local concave majorant, forms a
//! bias-corrected squared distance of the estimate to the affine functions, and calibrates
//! two one-sided tests of "`g` is affine": a conservative one based on a design-regularity
//! bound and one based on a Poisson-limit variance constant that is itself estimated by
//! Monte Carlo here.
//!
//! The estimator and the statistic are generic over [`Scalar`] (`f32`/`f64`); aliases for
//! the common instantiations live at the crate root.

pub mod decision;
pub mod error;
pub mod frontier;
mod hull;
pub mod poisson_mc;
pub mod report;
pub mod scalar;
pub mod series;
pub mod sims;
pub mod specfile;
pub mod statistic;
pub mod tail;

pub use decision::{run_test, CxPolicy, GofConfig, GofOutcome, TestDecision, DEFAULT_A1};
pub use error::{GofError, Result};
pub use frontier::{fit_at, fit_grid, residuals_even, FrontierFit, LineFit, Sample, Support};
pub use hull::upper_hull;
pub use poisson_mc::{estimate_a1, A1Config, A1Estimate, Integration, PlanarPointSet};
pub use scalar::Scalar;
pub use sims::{run_experiment, ErrorLaw, ExperimentReport, ExperimentSpec, GammaMode, Truth};
pub use statistic::{Affine, DesignSums, StatBreakdown};
pub use tail::{neg_hill, TailEstimate};

pub type SampleF64 = Sample<f64>;
pub type SampleF32 = Sample<f32>;
pub type FrontierFitF64 = FrontierFit<f64>;
pub type FrontierFitF32 = FrontierFit<f32>;
pub type AffineF64 = Affine<f64>;
pub type AffineF32 = Affine<f32>;
pub type StatBreakdownF64 = StatBreakdown<f64>;
pub type StatBreakdownF32 = StatBreakdown<f32>;
pub type TailEstimateF64 = TailEstimate<f64>;
pub type TailEstimateF32 = TailEstimate<f32>;
