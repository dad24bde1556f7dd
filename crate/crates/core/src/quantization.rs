//! Zoomed uniform quantizers.
//!
//! The base quantizer `q̄` is a mid-tread uniform grid. For a block of
//! dimension `d` the per-component step is `2n/√d`, so the Euclidean error
//! inside the range ball never exceeds `n` (for scalars this is the plain
//! `2n` step). Inputs outside the range ball are projected radially onto it
//! before rounding, which keeps the output set finite and makes saturation
//! detectable: `|q̄(z)| > m − n` whenever `|z| > m`.
//!
//! The zoomed quantizer is `q(μ, z) = μ · q̄(z / μ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerParams {
    /// Range `m`: the quantizer is accurate for `|z| <= m`.
    pub range: f64,
    /// Error bound `n` inside the range.
    pub err_bound: f64,
    /// Dead-zone radius `n0`; inputs with `|z| <= n0` map to zero.
    pub dead_zone: f64,
}

impl QuantizerParams {
    /// Builds params with the dead zone equal to the error bound.
    pub fn new(range: f64, err_bound: f64) -> Result<Self> {
        Self::with_dead_zone(range, err_bound, err_bound)
    }

    pub fn with_dead_zone(range: f64, err_bound: f64, dead_zone: f64) -> Result<Self> {
        let p = QuantizerParams {
            range,
            err_bound,
            dead_zone,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.err_bound.is_finite() && self.err_bound > 0.0) {
            return Err(Error::param("err_bound", "must be finite and > 0"));
        }
        if !(self.range.is_finite() && self.range > self.err_bound) {
            return Err(Error::param("range", "must be finite and exceed err_bound"));
        }
        if !(self.dead_zone > 0.0 && self.dead_zone <= self.err_bound) {
            return Err(Error::param("dead_zone", "must lie in (0, err_bound]"));
        }
        Ok(())
    }

    fn step(&self, dim: usize) -> f64 {
        2.0 * self.err_bound / (dim.max(1) as f64).sqrt()
    }
}

/// Base quantizer `q̄` applied to one node block.
pub fn base_quantize(p: &QuantizerParams, z: &[f64]) -> Vec<f64> {
    let r = norm(z);
    if r <= p.dead_zone {
        return vec![0.0; z.len()];
    }
    let step = p.step(z.len());
    let scale = if r > p.range { p.range / r } else { 1.0 };
    z.iter().map(|&zk| ((zk * scale) / step).round() * step).collect()
}

/// Zoomed quantizer `μ q̄(z/μ)`.
pub fn quantize(p: &QuantizerParams, mu: f64, z: &[f64]) -> Result<Vec<f64>> {
    check_mu(mu)?;
    let scaled: Vec<f64> = z.iter().map(|&zk| zk / mu).collect();
    Ok(base_quantize(p, &scaled).into_iter().map(|q| q * mu).collect())
}

/// Quantization error `q(μ, z) − z`.
pub fn quantization_error(p: &QuantizerParams, mu: f64, z: &[f64]) -> Result<Vec<f64>> {
    let q = quantize(p, mu, z)?;
    Ok(q.iter().zip(z).map(|(qk, zk)| qk - zk).collect())
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "mu",
            format!("zoom parameter must be finite and > 0, got {mu}"),
        ))
    }
}

/// One zoom contraction `μ⁺ = Ω μ`, componentwise.
pub fn zoom_step(mu: &[f64], omega: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != omega.len() {
        return Err(Error::Dimension {
            context: "zoom_step",
            expected: mu.len(),
            got: omega.len(),
        });
    }
    for &w in omega {
        check_contraction(w)?;
    }
    Ok(mu.iter().zip(omega).map(|(m, w)| m * w).collect())
}

pub(crate) fn check_contraction(w: f64) -> Result<()> {
    if w > 0.0 && w <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "omega",
            format!("zoom contraction must lie in (0, 1], got {w}"),
        ))
    }
}

/// `|z| <= m μ` for a single node block; the boundary counts as in range.
pub fn within_range(p: &QuantizerParams, mu: f64, z: &[f64]) -> bool {
    norm(z) <= p.range * mu
}

/// Non-saturation monitor over every node of a network.
///
/// `blocks` yields the node blocks of the sampled signal in node order.
pub fn saturation_check<'a>(
    params: &[QuantizerParams],
    mu: &[f64],
    blocks: impl IntoIterator<Item = &'a [f64]>,
) -> bool {
    blocks
        .into_iter()
        .zip(params.iter().zip(mu))
        .all(|(z, (p, &m))| within_range(p, m, z))
}
