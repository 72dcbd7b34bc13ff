//! Time-domain propagation and the tools built on it.

pub mod envelope;
pub mod propagate;
pub mod pulse;
pub mod rabi;

pub use envelope::{EnvelopeShape, EnvelopeSpec};
pub use propagate::{Integrator, PropagationOptions, PropagationResult, Propagator};
