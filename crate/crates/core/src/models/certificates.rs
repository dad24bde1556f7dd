use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{add, dot, norm};
use crate::protocols::{contraction, protocol_lyapunov, NodePartition, Protocol};
use crate::quantization::{check_contraction, QuantizerParams};

/// Per-network certificate: the jump Lyapunov candidate `W_i` and the
/// state cost `φ_i(z_i)` weighed by the triggering rule.
pub trait NetworkCertificate: Send + Sync {
    fn w(&self, e: &[f64], mu: &[f64], m: &[f64], kappa: u64, b: bool) -> f64;

    fn phi_state(&self, z: &[f64]) -> f64;

    /// Contraction of `W` across a triggered sampling jump.
    fn lambda(&self) -> f64;
}

/// `W = ω W_p(κ, e + b m) + |μ̃|`, where `μ̃` is the zoom parameter that
/// will be in force after the pending arrival (`max{Ωμ, floor}` while a
/// packet is in flight, `μ` otherwise).
///
/// With this form a triggered sampling contracts `W` by
/// `λ = max{√((ℓ−1)/ℓ), ω M n + Ω}` and an arrival leaves it unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolCertificate {
    pub protocol: Protocol,
    pub partition: NodePartition,
    /// Weight `ω` of the error term.
    pub omega_w: f64,
    /// Zoom contraction per node.
    pub zoom: Vec<f64>,
    pub zoom_floor: f64,
    /// Signal components whose squares make up `φ(z)`.
    pub state_components: Vec<usize>,
    lambda: f64,
}

impl ProtocolCertificate {
    /// `omega_w = None` picks the largest weight that keeps `λ` at the
    /// protocol contraction `√((ℓ−1)/ℓ)`, or half the admissible interval
    /// when that contraction is zero or the zoom alone already exceeds it.
    pub fn new(
        protocol: Protocol,
        partition: NodePartition,
        quantizers: &[QuantizerParams],
        zoom: &[f64],
        zoom_floor: f64,
        omega_w: Option<f64>,
        state_components: Vec<usize>,
    ) -> Result<Self> {
        let ell = partition.ell();
        if quantizers.len() != ell || zoom.len() != ell {
            return Err(Error::Dimension {
                context: "certificate nodes",
                expected: ell,
                got: quantizers.len().min(zoom.len()),
            });
        }
        for &w in zoom {
            check_contraction(w)?;
        }
        if !(zoom_floor >= 0.0 && zoom_floor.is_finite()) {
            return Err(Error::param("zoom_floor", "must be finite and >= 0"));
        }
        if let Some(&k) = state_components.iter().find(|&&k| k >= partition.total()) {
            return Err(Error::param(
                "state_components",
                format!("index {k} outside signal of dimension {}", partition.total()),
            ));
        }
        let n = quantizers.iter().map(|q| q.err_bound).fold(0.0, f64::max);
        let big_omega = zoom.iter().copied().fold(0.0, f64::max);
        let m_grad = protocol.gradient_bound(ell);
        let hi = (1.0 - big_omega) / n;
        let omega_w = match omega_w {
            Some(w) => w,
            None => {
                let tight = (contraction(ell) - big_omega) / (m_grad * n);
                if tight > 0.0 && tight < hi {
                    tight
                } else {
                    0.5 * hi
                }
            }
        };
        if !(omega_w > 0.0 && omega_w < hi) {
            return Err(Error::param(
                "omega_w",
                format!("must lie in (0, {hi}), got {omega_w}"),
            ));
        }
        let lambda = contraction(ell).max(omega_w * m_grad * n + big_omega);
        Ok(ProtocolCertificate {
            protocol,
            partition,
            omega_w,
            zoom: zoom.to_vec(),
            zoom_floor,
            state_components,
            lambda,
        })
    }

    fn zoomed_norm(&self, mu: &[f64]) -> f64 {
        let s: f64 = mu
            .iter()
            .zip(&self.zoom)
            .map(|(m, w)| {
                let z = (w * m).max(self.zoom_floor);
                z * z
            })
            .sum();
        s.sqrt()
    }
}

impl NetworkCertificate for ProtocolCertificate {
    fn w(&self, e: &[f64], mu: &[f64], m: &[f64], kappa: u64, b: bool) -> f64 {
        if b {
            let em = add(e, m);
            self.omega_w * protocol_lyapunov(self.protocol, kappa, &em, &self.partition)
                + self.zoomed_norm(mu)
        } else {
            self.omega_w * protocol_lyapunov(self.protocol, kappa, e, &self.partition) + norm(mu)
        }
    }

    fn phi_state(&self, z: &[f64]) -> f64 {
        self.state_components.iter().map(|&k| z[k] * z[k]).sum()
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }
}

type StateFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Certificates for every network plus the plant-level Lyapunov function.
#[derive(Clone)]
pub struct CertificateSet {
    pub networks: Vec<Arc<dyn NetworkCertificate>>,
    v: Arc<StateFn>,
}

impl CertificateSet {
    pub fn new(networks: Vec<Arc<dyn NetworkCertificate>>, v: Arc<StateFn>) -> Self {
        CertificateSet { networks, v }
    }

    /// `V(x) = Σ_i ηᵢᵀ Pᵢ ηᵢ` over consecutive pairs of `η` with the
    /// coefficients `(p1, p2, p3)` read as `p1 a² + p2 a b + p3 b²`.
    pub fn quadratic_pairs(networks: Vec<Arc<dyn NetworkCertificate>>, coeffs: Vec<[f64; 3]>) -> Self {
        let v = move |x: &[f64]| -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let (a, b) = (x[2 * i], x[2 * i + 1]);
                    c[0] * a * a + c[1] * a * b + c[2] * b * b
                })
                .sum()
        };
        CertificateSet::new(networks, Arc::new(v))
    }

    /// `V(x) = |x_η|²` over the given components.
    pub fn squared_norm(networks: Vec<Arc<dyn NetworkCertificate>>, n: usize) -> Self {
        CertificateSet::new(networks, Arc::new(move |x: &[f64]| dot(&x[..n], &x[..n])))
    }

    pub fn v(&self, x: &[f64]) -> f64 {
        (self.v)(x)
    }
}

impl fmt::Debug for CertificateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CertificateSet")
            .field("networks", &self.networks.len())
            .finish_non_exhaustive()
    }
}
