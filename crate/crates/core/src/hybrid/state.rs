use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::models::{error_ranges, node_ranges, SystemModel};
use crate::protocols::NodePartition;

/// Full hybrid state `(x, e, μ, m, δ, τ, κ, b)` plus the latched trigger
/// verdicts and the hybrid time `(t, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub t: f64,
    pub j: u64,
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub mu: Vec<f64>,
    pub m: Vec<f64>,
    pub delta: Vec<f64>,
    pub tau: Vec<f64>,
    pub kappa: Vec<u64>,
    pub b: Vec<bool>,
    pub triggered: Vec<bool>,
}

/// Where each network's blocks live inside the stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub partitions: Vec<NodePartition>,
    pub e: Vec<Range<usize>>,
    pub mu: Vec<Range<usize>>,
}

impl Layout {
    pub fn new(partitions: &[NodePartition]) -> Self {
        Layout {
            partitions: partitions.to_vec(),
            e: error_ranges(partitions),
            mu: node_ranges(partitions),
        }
    }

    pub fn of(model: &dyn SystemModel) -> Self {
        Layout::new(model.partitions())
    }

    pub fn networks(&self) -> usize {
        self.partitions.len()
    }

    pub fn n_e(&self) -> usize {
        self.e.last().map_or(0, |r| r.end)
    }

    pub fn n_nodes(&self) -> usize {
        self.mu.last().map_or(0, |r| r.end)
    }
}

impl HybridState {
    /// State at `(0, 0)`: zero errors and memory, clocks and counters reset,
    /// every network waiting for its first sampling.
    pub fn initial(layout: &Layout, x0: Vec<f64>, mu0: Vec<f64>) -> Self {
        let n = layout.networks();
        HybridState {
            t: 0.0,
            j: 0,
            x: x0,
            e: vec![0.0; layout.n_e()],
            mu: mu0,
            m: vec![0.0; layout.n_e()],
            delta: vec![0.0; n],
            tau: vec![0.0; n],
            kappa: vec![0; n],
            b: vec![false; n],
            triggered: vec![false; n],
        }
    }

    pub fn e_i<'a>(&'a self, layout: &Layout, i: usize) -> &'a [f64] {
        &self.e[layout.e[i].clone()]
    }

    pub fn m_i<'a>(&'a self, layout: &Layout, i: usize) -> &'a [f64] {
        &self.m[layout.e[i].clone()]
    }

    pub fn mu_i<'a>(&'a self, layout: &Layout, i: usize) -> &'a [f64] {
        &self.mu[layout.mu[i].clone()]
    }
}
