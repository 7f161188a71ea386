//! Shared numerical substrate: sphere quadrature, Gauss rules, Richardson
//! extrapolation, mollified distributions, s-line grids and real spherical
//! harmonics.

pub mod extrap;
pub mod gauss;
pub mod mollify;
pub mod sgrid;
pub mod sphere;
pub mod sphharm;

pub use extrap::{limit_extrapolate, log_limit_fit};
pub use mollify::{Mollifier, MollifierKind};
pub use sgrid::SGrid;
pub use sphere::{ConeSection, SphereQuadrature};
pub use sphharm::SphereBasis;
