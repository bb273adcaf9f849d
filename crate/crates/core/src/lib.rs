//! Numerical checks of sharp `L^p` constants for the Beurling transform
//! acting on angular modes, Hardy-type operators and Burkholder functions.
//!
//! * [`burkholder`]: pointwise Burkholder-type functions, the matrix/phase
//!   dictionary, rank-one convexity probes and scaling integrals.
//! * [`radial_reduction`]: angular modes, the reduced kernels, Hardy-type
//!   operators and stretch calculus.
//! * [`discrete_spectral`]: triangular discretizations, `L^p` operator-norm
//!   estimation and stretch functionals.
//! * [`planar_field`]: the transform as an FFT multiplier, heat extensions
//!   and the two-dimensional cross-checks.
//! * [`structural`]: pointwise identities for mode-ansatz fields paired
//!   with a surrogate Bellman profile.
//! * [`io`]: CSV and binary codecs for profiles and fields.

pub mod burkholder;
pub mod discrete_spectral;
pub mod error;
pub mod grid;
pub mod io;
pub mod planar_field;
pub mod quadrature;
pub mod radial_reduction;
pub mod structural;

pub use burkholder::{Exponent, PhasePoint, RankOneDirection, RealMatrix2};
pub use error::{Error, Result};
pub use grid::{GridSpec, Measure, RadialGrid, RadialProfile};
