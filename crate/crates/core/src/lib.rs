//! Simulation and design of event-triggered tracking control over several
//! asynchronous networks with zoomed quantizers and RR/TOD scheduling.
//!
//! A run alternates RK4 flows with sampling and arrival jumps, one network
//! at a time. See [`hybrid::Simulation`] for the event loop,
//! [`design::max_t_delta`] for the MASP/MAD search and [`config::SimConfig`]
//! for the file format.

pub mod config;
pub mod design;
pub mod error;
pub mod etm;
pub mod harness;
pub mod hybrid;
pub mod linalg;
pub mod models;
pub mod monitor;
pub mod protocols;
pub mod quantization;
pub mod scenarios;

pub use config::{Scenario, SimConfig};
pub use design::{max_t_delta, solve_phi, DesignResult, DesignRow, PhiParams, PhiTrajectory};
pub use error::{Error, Result};
pub use etm::EtmParams;
pub use hybrid::{
    EventKind, EventRecord, HybridState, Layout, NetworkConfig, RunOptions, Simulation, Summary, Trace,
};
pub use models::{CertificateSet, NetworkCertificate, SystemModel};
pub use monitor::{lyapunov_monitor, MonitorOptions, MonitorReport};
pub use protocols::{NodePartition, Protocol};
pub use quantization::QuantizerParams;
