//! Simulation and estimation engine for inhomogeneous Boolean models whose
//! typical grain is lower dimensional (points, segments, polylines).
//!
//! The crate offers three independent routes to the mean density
//! `λ_Θ(x)` of the random set `Θ = ⋃ (x_i + Z_0(s_i))`:
//!
//! - [`exact`]: the integral formula `λ_Θ(x) = ∫_K ∫_{x − Z_0(s)} f dH^n Q(ds)`
//!   evaluated by line quadrature and Monte Carlo over marks;
//! - [`estimate`]: the empirical-capacity estimator built from i.i.d.
//!   simulated realizations ([`boolean`]);
//! - [`minkowski`]: the weighted Minkowski content limit
//!   `μ(S⊕r) / (b_{d−n} r^{d−n}) → ∫_S f dH^n`.
//!
//! The crate is `no_std` (with `alloc`). Parallelism is injected through the
//! [`exec::Executor`] trait; every random draw comes from a stream derived
//! with [`stream::derive_stream`], so results do not depend on scheduling.
#![cfg_attr(not(test), no_std)]
#![deny(missing_debug_implementations)]

extern crate alloc;

pub mod boolean;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod exec;
pub mod geometry;
pub mod grains;
pub mod minkowski;
pub mod poisson;
pub mod quadrature;
pub mod sausage;
pub mod stats;
pub mod stream;

mod math;

pub use boolean::{BooleanRealization, PlacedGrain};
pub use error::{Error, Result};
pub use estimate::{BandwidthSchedule, EstimateReport};
pub use exact::DensityField;
pub use geometry::{Aabb, Ball, Point, SegmentShape};
pub use grains::{Grain, LengthLaw, MarkDistribution, OrientationLaw, RegularityCertificate};
pub use poisson::{IntensityField, MarkedGermSample, Scenario};
pub use stream::{derive_seed, derive_stream, Stream};

/// Version of this crate, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
