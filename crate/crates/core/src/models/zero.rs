use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::models::error_ranges;
use crate::protocols::NodePartition;

/// Frozen dynamics: `ẋ = 0`, `ė = 0`. Network `i` transmits its own
/// slice of `x` directly, so `x` has one entry per transmitted component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroDynamicsParams {
    /// Node block sizes per network.
    pub node_dims: Vec<Vec<usize>>,
    /// Initial state; zero when omitted.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ZeroDynamics {
    partitions: Vec<NodePartition>,
    x0: Vec<f64>,
}

impl ZeroDynamics {
    pub fn new(params: &ZeroDynamicsParams) -> Result<Self> {
        if params.node_dims.is_empty() {
            return Err(Error::param("node_dims", "at least one network is required"));
        }
        let partitions = params
            .node_dims
            .iter()
            .map(|d| NodePartition::new(d.clone()))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = partitions.iter().map(|p| p.total()).sum();
        let x0 = params.x0.clone().unwrap_or_else(|| vec![0.0; n]);
        if x0.len() != n {
            return Err(Error::param(
                "x0",
                format!("expected {n} entries, got {}", x0.len()),
            ));
        }
        Ok(ZeroDynamics { partitions, x0 })
    }
}

impl super::SystemModel for ZeroDynamics {
    fn name(&self) -> &str {
        "zero_dynamics"
    }

    fn n_x(&self) -> usize {
        self.x0.len()
    }

    fn partitions(&self) -> &[NodePartition] {
        &self.partitions
    }

    fn initial_x(&self) -> Vec<f64> {
        self.x0.clone()
    }

    fn flow(&self, _delta: &[f64], _x: &[f64], _e: &[f64], dx: &mut [f64], de: &mut [f64]) {
        dx.fill(0.0);
        de.fill(0.0);
    }

    fn output(&self, network: usize, _delta: &[f64], x: &[f64], _e: &[f64]) -> Vec<f64> {
        x[error_ranges(&self.partitions)[network].clone()].to_vec()
    }

    fn tracking_error<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        x
    }

    fn network_tracking_norm(&self, network: usize, x: &[f64]) -> f64 {
        norm(&x[error_ranges(&self.partitions)[network].clone()])
    }

    fn state_components(&self, network: usize) -> Vec<usize> {
        (0..self.partitions[network].total()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SystemModel;

    #[test]
    fn flow_is_zero() {
        let m = ZeroDynamics::new(&ZeroDynamicsParams {
            node_dims: vec![vec![1, 2]],
            x0: Some(vec![1.0, 2.0, 3.0]),
        })
        .unwrap();
        let mut dx = vec![9.0; 3];
        let mut de = vec![9.0; 3];
        m.flow(&[0.0], &m.initial_x(), &[0.0; 3], &mut dx, &mut de);
        assert_eq!(dx, vec![0.0; 3]);
        assert_eq!(de, vec![0.0; 3]);
        assert_eq!(
            m.output(0, &[0.0], &m.initial_x(), &[0.0; 3]),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn x0_length_checked() {
        let r = ZeroDynamics::new(&ZeroDynamicsParams {
            node_dims: vec![vec![1]],
            x0: Some(vec![1.0, 2.0]),
        });
        assert!(r.is_err());
    }
}
