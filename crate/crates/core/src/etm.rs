//! Decentralized event-triggered mechanism.
//!
//! At a sampling instant (`b = 0`) network `i` transmits iff
//! `Γ = γ₀ W² − ρ λ̄ φ₀(z) ≥ 0`. In the in-flight phase (`b = 1`)
//! `Γ = −γ₁ W²` and the mechanism is idle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::NetworkCertificate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtmParams {
    pub rho: f64,
    /// Contraction `λ` of the certificate at sampling jumps.
    pub lambda: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    #[serde(rename = "lbar0")]
    pub l_bar0: f64,
    /// Skip the `ρ < ρ̄` check. For exploratory runs only.
    #[serde(default)]
    pub allow_rho_override: bool,
}

impl EtmParams {
    pub fn rho_bar(&self) -> f64 {
        rho_bar(self.l_bar0, self.gamma0)
    }

    pub fn lambda_bar(&self) -> Result<f64> {
        lambda_bar(self.lambda, self.rho, self.gamma0, self.l_bar0)
    }

    /// Hard errors only; see [`EtmParams::warnings`] for soft ones.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::param("gamma0", "must be finite and > 0"));
        }
        if !(self.gamma1 > 0.0 && self.gamma1.is_finite()) {
            return Err(Error::param("gamma1", "must be finite and > 0"));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::param(
                "lambda",
                format!("must lie in [0, 1), got {}", self.lambda),
            ));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::param("rho", "must be finite and >= 0"));
        }
        if !self.l_bar0.is_finite() {
            return Err(Error::param("lbar0", "must be finite"));
        }
        let rb = self.rho_bar();
        if self.rho >= rb && !self.allow_rho_override {
            return Err(Error::param(
                "rho",
                format!("rho = {} must be below rho_bar = {rb}", self.rho),
            ));
        }
        self.lambda_bar()?;
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(lb) = self.lambda_bar() {
            if lb >= 1.0 {
                out.push(format!("lambda_bar = {lb} >= 1 lies outside the design region"));
            }
        }
        out
    }
}

/// `ρ̄ = 1` if `L̄₀ ≤ −γ₀`, else `min{1, 1/(L̄₀ + γ₀)}`.
pub fn rho_bar(l_bar0: f64, gamma0: f64) -> f64 {
    if l_bar0 <= -gamma0 {
        1.0
    } else {
        (1.0 / (l_bar0 + gamma0)).min(1.0)
    }
}

/// `L̄₀` that produces a given `ρ̄ < 1`.
pub fn l_bar0_from_rho_bar(rho_bar: f64, gamma0: f64) -> Result<f64> {
    if !(rho_bar > 0.0 && rho_bar < 1.0) {
        return Err(Error::param("rho_bar", "must lie in (0, 1) to determine lbar0"));
    }
    Ok(1.0 / rho_bar - gamma0)
}

/// `λ̄ = max{λ, ρ γ₀ / (1 − ρ L̄₀)}`.
pub fn lambda_bar(lambda: f64, rho: f64, gamma0: f64, l_bar0: f64) -> Result<f64> {
    let den = 1.0 - rho * l_bar0;
    if den <= 0.0 {
        return Err(Error::param(
            "rho",
            format!("1 - rho * lbar0 = {den} must be positive"),
        ));
    }
    Ok(lambda.max(rho * gamma0 / den))
}

/// `Γ` from precomputed `W` and `φ_b(z)`.
pub fn gamma_value(w: f64, phi_z: f64, b: bool, gamma_b: f64, rho: f64, lambda_bar: f64) -> f64 {
    if b {
        -gamma_b * w * w
    } else {
        gamma_b * w * w - rho * lambda_bar * phi_z
    }
}

/// `Γ` evaluated through a network certificate.
#[allow(clippy::too_many_arguments)]
pub fn gamma_fn(
    cert: &dyn NetworkCertificate,
    z: &[f64],
    e: &[f64],
    mu: &[f64],
    m: &[f64],
    kappa: u64,
    b: bool,
    params: &EtmParams,
    lambda_bar: f64,
) -> f64 {
    let w = cert.w(e, mu, m, kappa, b);
    let gamma_b = if b { params.gamma1 } else { params.gamma0 };
    let phi = if b { 0.0 } else { cert.phi_state(z) };
    gamma_value(w, phi, b, gamma_b, params.rho, lambda_bar)
}

/// `Υ(Γ)`: transmit iff `Γ ≥ 0`.
pub fn triggered(gamma: f64) -> bool {
    gamma >= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_bar_examples() {
        assert_eq!(rho_bar(-5.0, 2.0), 1.0);
        assert!((rho_bar(10.0, 10.0) - 0.05).abs() < 1e-15);
        assert_eq!(rho_bar(-1.0, 2.0), 1.0);
    }

    #[test]
    fn lambda_bar_examples() {
        assert_eq!(lambda_bar(0.7, 0.0, 5.0, 3.0).unwrap(), 0.7);
        let lb = lambda_bar(0.8165, 0.03, 22.9436, 0.0).unwrap();
        assert_eq!(lb, 0.8165);
        assert!((0.03_f64 * 22.9436 - 0.6883).abs() < 1e-4);
        assert_eq!(lambda_bar(0.0, 0.5, 2.0, 1.0).unwrap(), 2.0);
        assert!(lambda_bar(0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn lambda_bar_out_of_region_is_a_warning() {
        let p = EtmParams {
            rho: 0.5,
            lambda: 0.0,
            gamma0: 2.0,
            gamma1: 1.0,
            l_bar0: 1.0,
            allow_rho_override: true,
        };
        assert!(p.validate().is_ok());
        assert_eq!(p.warnings().len(), 1);
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_value(3.0, 100.0, true, 2.0, 0.3, 0.9), -18.0);
        assert_eq!(gamma_value(0.0, 5.0, false, 1.0, 0.0, 0.9), 0.0);
        assert!(triggered(gamma_value(0.0, 5.0, false, 1.0, 0.0, 0.9)));
        assert_eq!(gamma_value(1.0, 2.0, false, 1.0, 1.0, 1.0), -1.0);
    }

    #[test]
    fn trigger_boundary() {
        assert!(triggered(0.0));
        assert!(!triggered(-1e-12));
        assert!(triggered(1.0));
    }

    #[test]
    fn rho_at_or_above_bar_rejected() {
        let mut p = EtmParams {
            rho: 0.05,
            lambda: 0.8,
            gamma0: 10.0,
            gamma1: 10.0,
            l_bar0: 10.0,
            allow_rho_override: false,
        };
        assert!(p.validate().is_err());
        p.rho = 0.049;
        assert!(p.validate().is_ok());
        p.rho = 0.05;
        p.allow_rho_override = true;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn l_bar0_round_trip() {
        let l = l_bar0_from_rho_bar(0.0501, 22.9436).unwrap();
        assert!((rho_bar(l, 22.9436) - 0.0501).abs() < 1e-15);
        assert!((l + 2.984).abs() < 1e-3);
    }
}
