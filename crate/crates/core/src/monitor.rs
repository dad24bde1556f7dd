//! Runtime checks of the certificate inequalities along a trace.
//!
//! * at every triggered sampling `W(post) ≤ λ W(pre)`;
//! * at every arrival of a transmitted packet `W(post) ≤ W(pre)`;
//! * optionally, jumps where the hybrid Lyapunov candidate
//!   `U = V(x) + Σ_i max{γ_b φ_b(τ_i) W_i², (1−b_i) ρ_i φ_i(z_i)}` grows.

use serde::{Deserialize, Serialize};

use crate::design::PhiTrajectory;
use crate::error::{Error, Result};
use crate::etm::EtmParams;
use crate::hybrid::{EventKind, HybridState, Layout, Trace};
use crate::models::{CertificateSet, SystemModel};

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorOptions {
    /// Absolute slack on every inequality.
    pub tol: f64,
    /// Replace the certificates' `λ` (falsification probes).
    pub lambda_override: Option<Vec<f64>>,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        MonitorOptions {
            tol: 1e-9,
            lambda_override: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Sampling,
    Update,
    UIncrease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub j: u64,
    pub network: usize,
    pub kind: ViolationKind,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub checked_samplings: u64,
    pub checked_updates: u64,
    pub violations: Vec<Violation>,
    /// Jumps where `U` grew; informational.
    pub u_increases: Vec<Violation>,
}

impl MonitorReport {
    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Timer functions and ETM constants needed to evaluate `U`.
pub struct UContext<'a> {
    pub model: &'a dyn SystemModel,
    pub etm: &'a [EtmParams],
    /// `(φ_i0, φ_i1)` per network.
    pub phi: &'a [(PhiTrajectory, PhiTrajectory)],
}

fn w_at(certs: &CertificateSet, layout: &Layout, s: &HybridState, i: usize) -> f64 {
    certs.networks[i].w(
        s.e_i(layout, i),
        s.mu_i(layout, i),
        s.m_i(layout, i),
        s.kappa[i],
        s.b[i],
    )
}

fn u_value(certs: &CertificateSet, layout: &Layout, s: &HybridState, ctx: &UContext<'_>) -> f64 {
    let mut u = certs.v(&s.x);
    for i in 0..layout.networks() {
        let w = w_at(certs, layout, s, i);
        let (phi0, phi1) = &ctx.phi[i];
        let etm = &ctx.etm[i];
        let timer = if s.b[i] {
            etm.gamma1 * phi1.eval(s.tau[i])
        } else {
            etm.gamma0 * phi0.eval(s.tau[i])
        };
        let state_term = if s.b[i] {
            0.0
        } else {
            let z = ctx.model.output(i, &s.delta, &s.x, &s.e);
            etm.rho * certs.networks[i].phi_state(&z)
        };
        u += (timer * w * w).max(state_term);
    }
    u
}

pub fn lyapunov_monitor(
    trace: &Trace,
    certs: &CertificateSet,
    layout: &Layout,
    u_ctx: Option<&UContext<'_>>,
    opts: &MonitorOptions,
) -> Result<MonitorReport> {
    let mut report = MonitorReport::default();
    let mut pending_trigger = vec![false; layout.networks()];
    for r in trace.jumps() {
        let i = r.network.expect("jump records carry a network");
        let snap = r.snapshot.as_ref().ok_or(Error::MissingSnapshots)?;
        let (pre, post) = (&snap.pre, &snap.post);
        let w_pre = w_at(certs, layout, pre, i);
        let w_post = w_at(certs, layout, post, i);
        let mut check = |kind: ViolationKind, factor: f64| {
            let rhs = factor * w_pre;
            if w_post > rhs + opts.tol {
                report.violations.push(Violation {
                    t: r.t,
                    j: r.j,
                    network: i,
                    kind,
                    lhs: w_post,
                    rhs,
                });
            }
        };
        match r.kind {
            EventKind::Sample => {
                pending_trigger[i] = post.triggered[i];
                if post.triggered[i] {
                    let lambda = match &opts.lambda_override {
                        Some(l) => l[i],
                        None => certs.networks[i].lambda(),
                    };
                    check(ViolationKind::Sampling, lambda);
                    report.checked_samplings += 1;
                }
            }
            EventKind::Update => {
                if pending_trigger[i] {
                    check(ViolationKind::Update, 1.0);
                    report.checked_updates += 1;
                }
                pending_trigger[i] = false;
            }
            EventKind::FlowSample => {}
        }
        if let Some(ctx) = u_ctx {
            let (u0, u1) = (
                u_value(certs, layout, pre, ctx),
                u_value(certs, layout, post, ctx),
            );
            if u1 > u0 + opts.tol {
                report.u_increases.push(Violation {
                    t: r.t,
                    j: r.j,
                    network: i,
                    kind: ViolationKind::UIncrease,
                    lhs: u1,
                    rhs: u0,
                });
            }
        }
    }
    Ok(report)
}
