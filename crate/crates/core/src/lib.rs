//! Numerical toolkit for the infrared structure of classical electrodynamics:
//! null- and spacelike-infinity asymptotes of Lorenz potentials, matching,
//! asymptotic charges, memory effects, symplectic forms, truncated Fock-space
//! checks, and the phase field of the spacelike-infinity theory.
//!
//! Conventions: metric signature (+,−,−,−), Gauss units with c = 1, ħ = 1.
//! Null directions l are points of the future light cone, canonically scaled
//! to t·l = 1 in the frame of the chosen time axis t.

pub mod asymptotics;
pub mod celestial;
pub mod currents;
pub mod error;
pub mod numerics;
pub mod staruszkiewicz;
pub mod sympquant;
pub mod triangle;
pub mod vec4;

pub use error::{Error, Result};
pub use vec4::{AntiSym, Vec4};
