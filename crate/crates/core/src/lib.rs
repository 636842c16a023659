//! Traffic flow on road networks with a characteristic particle method.

pub mod area_sync;
pub mod edge_field;
pub mod error;
pub mod flux;
pub mod network;
pub mod node_riemann;
pub mod sim;

pub use edge_field::{Particle, ParticleField, Side};
pub use error::{Error, Result, ValidationError};
pub use flux::{Branch, FluxFunction};
