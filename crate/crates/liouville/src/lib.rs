//! Numerical laboratory for Liouville conformal field theory fusion:
//! DOZZ structure constants through Zamolodchikov's Upsilon function,
//! Gaussian multiplicative chaos on the cylinder lattice, Bessel-path
//! representations of the renormalized fusion constants, and the quadrature
//! checks tying them together.

pub mod acceptance;
pub mod bootstrap;
pub mod dozz;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod field;
pub mod gmc;
pub mod kernels;
pub mod kpz;
pub mod lattice;
pub mod params;
pub mod paths;
pub mod quad;
pub mod stats;
pub mod upsilon;

pub use error::{Error, Result};
pub use params::{background_charge, check_seiberg, LiouvilleParams};
