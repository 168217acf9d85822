//! Circle-map dynamics of the field in a periodically pulsating 1-D cavity.
//!
//! A massless field between a stationary mirror and a mirror moving along a
//! 1-periodic world line x = a(t) is governed by the time-advance map
//! F = (Id + a) ∘ (Id − a)⁻¹ of its characteristics. This crate builds that
//! map, measures rotation numbers and phase locking across parameter space,
//! solves Moore's functional equation Σ∘F = Σ + σ for the mode-function
//! phase, and evaluates the regularized vacuum energy density
//! ⟨T00⟩ = −(1/24π)[Φ(t+x) + Φ(t−x)] together with the wave packets it
//! develops under resonance.

pub mod characteristics;
pub mod circlemap;
pub mod config;
pub mod energy;
pub mod error;
pub mod io;
pub mod jet;
pub mod locking;
pub mod moore;
pub mod numdiff;
pub mod solve;
pub mod trajectory;

pub use error::{Error, Result};
