//! Numerical building blocks shared by the higher-level modules.

pub mod chirp;
pub mod hermite;
pub mod nufft;
pub mod quadrature;

pub use chirp::ChirpTransform;
pub use hermite::{hermite_functions, hermite_table};
pub use nufft::nufft2d_type1;
pub use quadrature::{gauss_legendre, GaussLegendre};
