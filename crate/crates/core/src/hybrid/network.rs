use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etm::EtmParams;
use crate::protocols::{NodePartition, Protocol};
use crate::quantization::{check_contraction, QuantizerParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingPolicy {
    /// Constant interval `h`.
    Fixed { h: f64 },
    /// Interval drawn uniformly from `[ε, T]` at every sampling.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayPolicy {
    /// Constant delay, shortened to the next sampling interval if needed.
    Fixed { value: f64 },
    /// Delay drawn uniformly from `[0, min{Δ, h}]`.
    Uniform,
}

/// Per-network constants.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// MASP `T`.
    pub masp: f64,
    /// MAD `Δ`.
    pub mad: f64,
    /// Minimal sampling interval `ε`.
    pub eps_min: f64,
    pub partition: NodePartition,
    pub protocol: Protocol,
    pub quantizers: Vec<QuantizerParams>,
    /// Zoom contraction `Ω` per node.
    pub zoom: Vec<f64>,
    /// Lower bound applied after every zoom step.
    pub zoom_floor: f64,
    pub zoom_on_trigger_only: bool,
    pub etm: EtmParams,
    pub sampling: SamplingPolicy,
    pub delay: DelayPolicy,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.masp > 0.0 && self.masp.is_finite()) {
            return Err(Error::param("masp", "must be finite and > 0"));
        }
        if !(self.mad >= 0.0 && self.mad <= self.masp) {
            return Err(Error::param("mad", "must lie in [0, masp]"));
        }
        if !(self.eps_min > 0.0 && self.eps_min < self.masp) {
            return Err(Error::param("eps_min", "must lie in (0, masp)"));
        }
        let ell = self.partition.ell();
        if self.quantizers.len() != ell {
            return Err(Error::param(
                "quantizers",
                format!("expected one per node ({ell}), got {}", self.quantizers.len()),
            ));
        }
        if self.zoom.len() != ell {
            return Err(Error::param(
                "zoom",
                format!("expected one per node ({ell}), got {}", self.zoom.len()),
            ));
        }
        for q in &self.quantizers {
            q.validate()?;
        }
        for &w in &self.zoom {
            check_contraction(w)?;
        }
        if !(self.zoom_floor >= 0.0 && self.zoom_floor.is_finite()) {
            return Err(Error::param("zoom_floor", "must be finite and >= 0"));
        }
        if let SamplingPolicy::Fixed { h } = self.sampling {
            if !(h >= self.eps_min && h <= self.masp) {
                return Err(Error::param("sampling.h", "must lie in [eps_min, masp]"));
            }
        }
        if let DelayPolicy::Fixed { value } = self.delay {
            if !(value >= 0.0 && value <= self.mad) {
                return Err(Error::param("delay.value", "must lie in [0, mad]"));
            }
            if let SamplingPolicy::Fixed { h } = self.sampling {
                if value > h {
                    return Err(Error::param(
                        "delay.value",
                        "must not exceed the sampling interval",
                    ));
                }
            }
        }
        self.etm.validate().map_err(|e| match e {
            Error::Param { name, reason } => Error::Param {
                name: format!("etm.{name}"),
                reason,
            },
            other => other,
        })
    }

    pub fn draw_interval(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.sampling {
            SamplingPolicy::Fixed { h } => h,
            SamplingPolicy::Uniform => rng.gen_range(self.eps_min..=self.masp),
        }
    }

    /// Delay for a packet whose sampling is followed by an interval `h`.
    pub fn draw_delay(&self, rng: &mut ChaCha8Rng, h: f64) -> f64 {
        let cap = self.mad.min(h);
        match self.delay {
            DelayPolicy::Fixed { value } => value.min(cap),
            DelayPolicy::Uniform => rng.gen_range(0.0..=cap),
        }
    }

    /// Absolute slack used when comparing timers against `ε`, `T` and `Δ`.
    pub fn time_tol(&self) -> f64 {
        1e-9 * self.masp.max(1.0)
    }
}
