//! A simulation and numerical-verification laboratory for the two-dimensional
//! one-component plasma: Gibbs-measure samplers (Metropolis, Ginibre,
//! Poisson), logarithmic energy functionals and electric-field identities,
//! hyperuniformity statistics, localized-translation (spin wave) flows, and
//! radial transport maps.
//!
//! The numeric kernels are generic over the scalar type through [`real::Real`]
//! (`f64` and `f32`); the aliases at the crate root fix the default `f64`
//! instantiation. The Ginibre eigensolver is `f64`-only.

pub mod energy;
pub mod sampler;
pub mod spinwave;
pub mod transport;
pub mod stats;
pub mod geom;
pub mod quad;
pub mod real;

pub use real::Real;

/// Default double-precision aliases.
pub type Point = geom::Point2<f64>;
pub type Region = geom::DomainRegion<f64>;
pub type Config = energy::PointConfiguration<f64>;
pub type Background = energy::BackgroundMeasure<f64>;
pub type Truncation = energy::TruncationVector<f64>;
