//! Hybrid state, flow integration, jump maps and the event loop.

pub mod checks;
pub mod integrator;
pub mod jumps;
mod network;
mod sim;
mod state;
pub mod trace;

pub use integrator::integrate_flow;
pub use jumps::{sampling_jump, update_jump, SampleOutcome};
pub use network::{DelayPolicy, NetworkConfig, SamplingPolicy};
pub use sim::{RunOptions, Simulation, MU_FLOOR, MU_SAFETY};
pub use state::{HybridState, Layout};
pub use trace::{EventKind, EventRecord, NetworkCounts, Snapshot, Summary, Trace};
