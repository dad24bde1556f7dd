//! Timer functions and the MASP/MAD search.
//!
//! Each network carries two scalar timer functions solving
//! `φ̇ = −2Lφ − γ((1+ϱ)φ² + 1)`, one per phase. A pair `(T, Δ)` is
//! admissible when
//!
//! * `γ₀ φ₀(τ) ≥ (1+ϱ₁) λ̄² γ₁ φ₁(0)` for `τ ∈ [0, T]`,
//! * `γ₁ φ₁(τ) ≥ (1+ϱ₀) γ₀ φ₀(τ)` for `τ ∈ [0, Δ]`,
//! * `φ₀(T) > 0` and `φ₁(T) > 0`.
//!
//! Conditions are checked on a grid of at most `T/10⁴` spacing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid points per unit horizon used by the search.
pub const CHECK_RESOLUTION: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    #[serde(rename = "L")]
    pub l: f64,
    pub gamma: f64,
    pub varrho: f64,
    pub phi0: f64,
}

impl PhiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l >= 0.0 && self.l.is_finite()) {
            return Err(Error::param("L", "must be finite and >= 0"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", "must be finite and > 0"));
        }
        if !(self.varrho >= 0.0 && self.varrho.is_finite()) {
            return Err(Error::param("varrho", "must be finite and >= 0"));
        }
        if !(self.phi0 > 0.0 && self.phi0.is_finite()) {
            return Err(Error::param("phi0", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Soft checks against the recommended initial-value window.
    pub fn warnings(&self, lambda_bar: f64) -> Vec<String> {
        let mut out = Vec::new();
        let hi = 1.0 / lambda_bar;
        if !(self.phi0 > 1.0 && self.phi0 < hi) {
            out.push(format!("phi0 = {} lies outside (1, {hi})", self.phi0));
        }
        let vr_hi = 1.0 / (lambda_bar * lambda_bar * self.phi0 * self.phi0) - 1.0;
        if !(self.varrho > 0.0 && self.varrho < vr_hi) {
            out.push(format!("varrho = {} lies outside (0, {vr_hi})", self.varrho));
        }
        out
    }

    fn rhs(&self, phi: f64) -> f64 {
        -2.0 * self.l * phi - self.gamma * ((1.0 + self.varrho) * phi * phi + 1.0)
    }
}

/// Midpoint of `(1, 1/λ̄)`.
pub fn default_phi0(lambda_bar: f64) -> f64 {
    0.5 * (1.0 + 1.0 / lambda_bar)
}

/// Uniformly sampled timer function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiTrajectory {
    pub step: f64,
    pub values: Vec<f64>,
    /// First time `φ` reaches zero, if the solve stopped there.
    pub zero_crossing: Option<f64>,
}

impl PhiTrajectory {
    /// Last sampled time.
    pub fn end(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    /// Linear interpolation; clamps to the last sample beyond the end.
    pub fn eval(&self, t: f64) -> f64 {
        let s = (t / self.step).max(0.0);
        let k = s.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let frac = s - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    /// Samples on `[0, t]` plus the interpolated endpoint.
    fn samples_until(&self, t: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let last = ((t / self.step).floor() as usize).min(self.values.len() - 1);
        (0..=last)
            .map(move |k| (k as f64 * self.step, self.values[k]))
            .chain(std::iter::once((t, self.eval(t))))
    }
}

/// RK4 solution of the timer ODE on `[0, horizon]`.
///
/// Stops at the first step where `φ` becomes negative; the crossing time is
/// located by linear interpolation inside that step.
pub fn solve_phi(p: &PhiParams, horizon: f64, step: f64) -> Result<PhiTrajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::param("step", "must be finite and > 0"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", "must be finite and > 0"));
    }
    let n = (horizon / step).ceil() as usize;
    let h = horizon / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    let mut y = p.phi0;
    values.push(y);
    let mut zero_crossing = None;
    for k in 0..n {
        let k1 = p.rhs(y);
        let k2 = p.rhs(y + 0.5 * h * k1);
        let k3 = p.rhs(y + 0.5 * h * k2);
        let k4 = p.rhs(y + h * k3);
        let next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        values.push(next);
        if next < 0.0 {
            zero_crossing = Some(h * (k as f64 + y / (y - next)));
            break;
        }
        y = next;
    }
    Ok(PhiTrajectory {
        step: h,
        values,
        zero_crossing,
    })
}

/// Constants entering the admissibility conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionParams {
    pub gamma0: f64,
    pub gamma1: f64,
    pub lambda_bar: f64,
    pub varrho0: f64,
    pub varrho1: f64,
}

fn covers(traj: &PhiTrajectory, t: f64) -> Result<()> {
    if traj.zero_crossing.is_some() || traj.end() >= t * (1.0 - 1e-12) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "timer trajectory ends at {} before required horizon {t}",
            traj.end()
        )))
    }
}

fn positive_at(traj: &PhiTrajectory, t: f64) -> bool {
    match traj.zero_crossing {
        Some(tc) if tc <= t => false,
        _ => traj.eval(t) > 0.0,
    }
}

/// Sampling-phase condition plus positivity on `[0, T]`.
pub fn check_masp(
    phi0: &PhiTrajectory,
    phi1: &PhiTrajectory,
    c: &ConditionParams,
    t_masp: f64,
) -> Result<bool> {
    covers(phi0, t_masp)?;
    covers(phi1, t_masp)?;
    if !(positive_at(phi0, t_masp) && positive_at(phi1, t_masp)) {
        return Ok(false);
    }
    let rhs = (1.0 + c.varrho1) * c.lambda_bar * c.lambda_bar * c.gamma1 * phi1.initial();
    Ok(phi0.samples_until(t_masp).all(|(_, v)| c.gamma0 * v >= rhs))
}

/// Delay-phase condition on `[0, Δ]`.
pub fn check_mad(
    phi0: &PhiTrajectory,
    phi1: &PhiTrajectory,
    c: &ConditionParams,
    delta: f64,
) -> Result<bool> {
    covers(phi0, delta)?;
    covers(phi1, delta)?;
    Ok(phi1
        .samples_until(delta)
        .all(|(t, v1)| c.gamma1 * v1 >= (1.0 + c.varrho0) * c.gamma0 * phi0.eval(t)))
}

pub fn check_conditions(
    phi0: &PhiTrajectory,
    phi1: &PhiTrajectory,
    c: &ConditionParams,
    t_masp: f64,
    delta: f64,
) -> Result<bool> {
    if delta > t_masp {
        return Ok(false);
    }
    Ok(check_masp(phi0, phi1, c, t_masp)? && check_mad(phi0, phi1, c, delta)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    #[serde(rename = "T")]
    pub t_masp: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub phi0: PhiTrajectory,
    pub phi1: PhiTrajectory,
}

/// One row of the design table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    #[serde(rename = "T")]
    pub t_masp: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub phi0_0: f64,
    pub phi1_0: f64,
}

impl DesignResult {
    pub fn row(&self) -> DesignRow {
        DesignRow {
            t_masp: self.t_masp,
            delta: self.delta,
            phi0_0: self.phi0.initial(),
            phi1_0: self.phi1.initial(),
        }
    }
}

fn trajectories(p0: &PhiParams, p1: &PhiParams, horizon: f64) -> Result<(PhiTrajectory, PhiTrajectory)> {
    let step = horizon / CHECK_RESOLUTION as f64;
    Ok((solve_phi(p0, horizon, step)?, solve_phi(p1, horizon, step)?))
}

/// Largest `T`, then largest `Δ ≤ T`, passing the conditions, both by
/// bisection to absolute tolerance `tol`.
pub fn max_t_delta(p0: &PhiParams, p1: &PhiParams, lambda_bar: f64, tol: f64) -> Result<DesignResult> {
    p0.validate()?;
    p1.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", "must be finite and > 0"));
    }
    if !(lambda_bar > 0.0 && lambda_bar.is_finite()) {
        return Err(Error::param("lambda_bar", "must be finite and > 0"));
    }
    let c = ConditionParams {
        gamma0: p0.gamma,
        gamma1: p1.gamma,
        lambda_bar,
        varrho0: p0.varrho,
        varrho1: p1.varrho,
    };
    let masp_ok = |t: f64| -> Result<bool> {
        let (f0, f1) = trajectories(p0, p1, t)?;
        check_masp(&f0, &f1, &c, t)
    };

    if !masp_ok(tol)? {
        return Err(Error::Infeasible(format!(
            "no sampling period >= tol = {tol} satisfies the conditions"
        )));
    }
    // φ̇ ≤ −γ while φ ≥ 0, so both timers reach zero before φ(0)/γ.
    let mut hi = (p0.phi0 / p0.gamma).min(p1.phi0 / p1.gamma);
    while masp_ok(hi)? {
        hi *= 2.0;
    }
    let mut lo = tol;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if masp_ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_masp = lo;

    let (phi0, phi1) = trajectories(p0, p1, t_masp)?;
    if !check_mad(&phi0, &phi1, &c, 0.0)? {
        return Err(Error::Infeasible(
            "delay condition fails already at zero delay".into(),
        ));
    }
    let delta = if check_mad(&phi0, &phi1, &c, t_masp)? {
        t_masp
    } else {
        let (mut lo, mut hi) = (0.0, t_masp);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if check_mad(&phi0, &phi1, &c, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(DesignResult {
        t_masp,
        delta,
        phi0,
        phi1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn tangent() -> PhiParams {
        PhiParams {
            l: 0.0,
            gamma: 1.0,
            varrho: 0.0,
            phi0: 1.0,
        }
    }

    #[test]
    fn tangent_oracle() {
        let tr = solve_phi(&tangent(), 0.7, 1e-4).unwrap();
        let err = (0..tr.values.len())
            .map(|k| {
                let t = k as f64 * tr.step;
                (tr.values[k] - (FRAC_PI_4 - t).tan()).abs()
            })
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "max error {err}");
    }

    #[test]
    fn tangent_crossing_at_quarter_pi() {
        let tr = solve_phi(&tangent(), 1.0, 1e-4).unwrap();
        let tc = tr.zero_crossing.unwrap();
        assert!((tc - FRAC_PI_4).abs() < 1e-6, "crossing {tc}");
    }

    #[test]
    fn small_gamma_is_exponential() {
        let p = PhiParams {
            l: 1.0,
            gamma: 1e-9,
            varrho: 0.0,
            phi0: 1.2,
        };
        let tr = solve_phi(&p, 2.0, 1e-3).unwrap();
        for (k, v) in tr.values.iter().enumerate() {
            let t = k as f64 * tr.step;
            assert!((v - 1.2 * (-2.0 * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn strictly_decreasing_while_positive() {
        let p = PhiParams {
            l: 8.886,
            gamma: 22.9436,
            varrho: 0.05,
            phi0: 1.1023,
        };
        let tr = solve_phi(&p, 0.1, 1e-5).unwrap();
        assert!(tr.values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_step() {
        assert!(solve_phi(&tangent(), 1.0, 0.0).is_err());
        assert!(solve_phi(&tangent(), 1.0, -1.0).is_err());
    }

    fn cond(varrho1: f64) -> ConditionParams {
        ConditionParams {
            gamma0: 2.0,
            gamma1: 3.0,
            lambda_bar: 0.5,
            varrho0: 0.1,
            varrho1,
        }
    }

    #[test]
    fn zero_horizon_is_a_point_check() {
        let p = tangent();
        let f0 = solve_phi(&p, 0.1, 1e-3).unwrap();
        let f1 = solve_phi(&p, 0.1, 1e-3).unwrap();
        // 2 >= (1+v1)*0.25*3 holds iff v1 <= 5/3
        assert!(check_conditions(&f0, &f1, &cond(1.6), 0.0, 0.0).unwrap());
        assert!(!check_conditions(&f0, &f1, &cond(1.7), 0.0, 0.0).unwrap());
    }

    #[test]
    fn domain_shortfall_is_an_error() {
        let f = solve_phi(&tangent(), 0.1, 1e-3).unwrap();
        assert!(check_conditions(&f, &f, &cond(0.0), 0.5, 0.0).is_err());
    }

    fn pair() -> (PhiParams, PhiParams) {
        (
            PhiParams {
                l: 2.0,
                gamma: 3.0,
                varrho: 0.05,
                phi0: 1.1,
            },
            PhiParams {
                l: 4.0,
                gamma: 5.0,
                varrho: 0.08,
                phi0: 1.1,
            },
        )
    }

    #[test]
    fn search_result_is_maximal() {
        let (p0, p1) = pair();
        let tol = 1e-6;
        let r = max_t_delta(&p0, &p1, 0.6, tol).unwrap();
        assert!(r.delta <= r.t_masp);
        let c = ConditionParams {
            gamma0: 3.0,
            gamma1: 5.0,
            lambda_bar: 0.6,
            varrho0: 0.05,
            varrho1: 0.08,
        };
        assert!(check_conditions(&r.phi0, &r.phi1, &c, r.t_masp, r.delta).unwrap());
        let t2 = r.t_masp + tol;
        let f0 = solve_phi(&p0, t2, t2 / 1e4).unwrap();
        let f1 = solve_phi(&p1, t2, t2 / 1e4).unwrap();
        assert!(!check_masp(&f0, &f1, &c, t2).unwrap());
        if r.delta < r.t_masp {
            assert!(!check_mad(&r.phi0, &r.phi1, &c, r.delta + tol).unwrap());
        }
    }

    #[test]
    fn near_unit_lambda_bar_is_infeasible() {
        let p0 = PhiParams {
            l: 1.0,
            gamma: 1.0,
            varrho: 0.5,
            phi0: 1.000001,
        };
        let p1 = PhiParams { varrho: 0.5, ..p0 };
        let r = max_t_delta(&p0, &p1, 0.999999, 1e-6);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn default_phi0_is_midpoint() {
        assert!((default_phi0(0.8) - 1.125).abs() < 1e-15);
    }

    #[test]
    fn eval_interpolates() {
        let tr = PhiTrajectory {
            step: 0.5,
            values: vec![1.0, 0.5, 0.0],
            zero_crossing: None,
        };
        assert_eq!(tr.eval(0.25), 0.75);
        assert_eq!(tr.eval(5.0), 0.0);
        assert_eq!(tr.end(), 1.0);
    }
}
