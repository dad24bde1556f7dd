//! System models and the certificate functions used for monitoring.

mod certificates;
pub mod robot_arm;
mod zero;

use std::ops::Range;

pub use certificates::{CertificateSet, NetworkCertificate, ProtocolCertificate};
pub use robot_arm::{RobotArm, RobotArmParams};
pub use zero::{ZeroDynamics, ZeroDynamicsParams};

use crate::protocols::NodePartition;

/// Plant, reference and controller dynamics written as error dynamics.
///
/// `x` stacks tracking error, controller and reference states. `e` stacks
/// the per-network transmission errors in the order of [`partitions`],
/// each network's block in signal coordinates (held value minus true value).
///
/// [`partitions`]: SystemModel::partitions
pub trait SystemModel: Send + Sync {
    fn name(&self) -> &str;

    fn n_x(&self) -> usize;

    /// Node partition of each network's transmitted signal.
    fn partitions(&self) -> &[NodePartition];

    fn n_networks(&self) -> usize {
        self.partitions().len()
    }

    fn initial_x(&self) -> Vec<f64>;

    /// Writes `ẋ` and `ė`. `delta` holds the per-network clocks.
    fn flow(&self, delta: &[f64], x: &[f64], e: &[f64], dx: &mut [f64], de: &mut [f64]);

    /// True (unquantized, unheld) signal `z_i` of network `i`.
    fn output(&self, network: usize, delta: &[f64], x: &[f64], e: &[f64]) -> Vec<f64>;

    /// Tracking error `η` as a slice of `x`.
    fn tracking_error<'a>(&self, x: &'a [f64]) -> &'a [f64];

    /// `|η_i|`, the tracking error owned by network `i`.
    fn network_tracking_norm(&self, network: usize, x: &[f64]) -> f64;

    /// Components of `z_i` whose squares form the state cost `φ_i(z_i)`.
    fn state_components(&self, network: usize) -> Vec<usize>;

    /// Plant-level Lyapunov function `V(x)`; defaults to `|η|²`.
    fn lyapunov(&self, x: &[f64]) -> f64 {
        let eta = self.tracking_error(x);
        crate::linalg::dot(eta, eta)
    }
}

/// Ranges of each network's block inside the stacked error vector.
pub fn error_ranges(partitions: &[NodePartition]) -> Vec<Range<usize>> {
    let mut out = Vec::with_capacity(partitions.len());
    let mut acc = 0;
    for p in partitions {
        out.push(acc..acc + p.total());
        acc += p.total();
    }
    out
}

/// Ranges of each network's zoom parameters (one per node).
pub fn node_ranges(partitions: &[NodePartition]) -> Vec<Range<usize>> {
    let mut out = Vec::with_capacity(partitions.len());
    let mut acc = 0;
    for p in partitions {
        out.push(acc..acc + p.ell());
        acc += p.ell();
    }
    out
}
