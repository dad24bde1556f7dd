//! Round-Robin and Try-Once-Discard scheduling.
//!
//! Node indices are zero-based throughout: node `l` here is node `l + 1`
//! in the usual one-based notation.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "rr", alias = "RR", alias = "round_robin")]
    RoundRobin,
    #[serde(rename = "tod", alias = "TOD", alias = "try_once_discard")]
    TryOnceDiscard,
}

impl Protocol {
    /// Bound `M` on the gradient of the protocol Lyapunov function.
    pub fn gradient_bound(self, ell: usize) -> f64 {
        match self {
            Protocol::RoundRobin => (ell as f64).sqrt(),
            Protocol::TryOnceDiscard => 1.0,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Protocol::RoundRobin => "rr",
            Protocol::TryOnceDiscard => "tod",
        }
    }
}

/// `√((ℓ−1)/ℓ)`, the per-grant contraction of both protocols.
pub fn contraction(ell: usize) -> f64 {
    let l = ell as f64;
    ((l - 1.0) / l).sqrt()
}

/// Split of one network's signal vector into node blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct NodePartition {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl NodePartition {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::param("node_dims", "a network needs at least one node"));
        }
        if dims.contains(&0) {
            return Err(Error::param("node_dims", "node blocks must be nonempty"));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for d in &dims {
            acc += d;
            offsets.push(acc);
        }
        Ok(NodePartition { dims, offsets })
    }

    pub fn ell(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total signal dimension of the network.
    pub fn total(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    pub fn range(&self, l: usize) -> Range<usize> {
        self.offsets[l]..self.offsets[l + 1]
    }

    pub fn block<'a>(&self, v: &'a [f64], l: usize) -> &'a [f64] {
        &v[self.range(l)]
    }

    pub fn blocks<'a>(&'a self, v: &'a [f64]) -> impl Iterator<Item = &'a [f64]> + 'a {
        (0..self.ell()).map(move |l| self.block(v, l))
    }

    pub fn check(&self, context: &'static str, v: &[f64]) -> Result<()> {
        if v.len() == self.total() {
            Ok(())
        } else {
            Err(Error::Dimension {
                context,
                expected: self.total(),
                got: v.len(),
            })
        }
    }
}

impl TryFrom<Vec<usize>> for NodePartition {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        NodePartition::new(dims)
    }
}

impl From<NodePartition> for Vec<usize> {
    fn from(p: NodePartition) -> Vec<usize> {
        p.dims
    }
}

/// Node granted by Round-Robin at counter `kappa`: the `l ∈ 1..=ℓ` with
/// `κ ≡ l (mod ℓ)`, returned zero-based. At `κ = 0` this is the last node.
pub fn rr_select(kappa: u64, ell: usize) -> usize {
    assert!(ell >= 1, "rr_select needs ell >= 1");
    let ell = ell as u64;
    ((kappa % ell + ell - 1) % ell) as usize
}

/// Node with the largest block norm; the smallest index wins ties.
pub fn tod_select<'a>(blocks: impl IntoIterator<Item = &'a [f64]>) -> usize {
    let mut best = 0;
    let mut best_norm = f64::NEG_INFINITY;
    for (l, b) in blocks.into_iter().enumerate() {
        let n = norm(b);
        if n > best_norm {
            best = l;
            best_norm = n;
        }
    }
    best
}

pub fn select(protocol: Protocol, kappa: u64, e: &[f64], partition: &NodePartition) -> usize {
    match protocol {
        Protocol::RoundRobin => rr_select(kappa, partition.ell()),
        Protocol::TryOnceDiscard => tod_select(partition.blocks(e)),
    }
}

/// `h = (I − Ψ) e + Ψ ε^q`: the granted block takes its quantization
/// error, every other block keeps its current error.
pub fn protocol_update(
    protocol: Protocol,
    kappa: u64,
    e: &[f64],
    eps_q: &[f64],
    partition: &NodePartition,
) -> Result<Vec<f64>> {
    partition.check("protocol_update e", e)?;
    partition.check("protocol_update eps_q", eps_q)?;
    let granted = select(protocol, kappa, e, partition);
    let mut h = e.to_vec();
    let r = partition.range(granted);
    h[r.clone()].copy_from_slice(&eps_q[r]);
    Ok(h)
}

/// Protocol Lyapunov function `W_p(κ, e)`.
///
/// TOD uses `|e|`. RR weights node blocks by how many grants remain until
/// their turn: `W_p² = Σ_p (p+1) |e_{rr_select(κ+p)}|²`.
pub fn protocol_lyapunov(protocol: Protocol, kappa: u64, e: &[f64], partition: &NodePartition) -> f64 {
    match protocol {
        Protocol::TryOnceDiscard => norm(e),
        Protocol::RoundRobin => {
            let ell = partition.ell();
            let mut acc = 0.0;
            for p in 0..ell {
                let b = partition.block(e, rr_select(kappa.wrapping_add(p as u64), ell));
                acc += (p + 1) as f64 * dot(b, b);
            }
            acc.sqrt()
        }
    }
}
