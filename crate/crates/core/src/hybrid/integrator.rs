//! Fixed-step RK4 over the continuous part `(x, e, δ, τ)`.

use crate::error::{Error, Result};
use crate::hybrid::HybridState;
use crate::linalg::all_finite;
use crate::models::SystemModel;

/// Scratch buffers for allocation-free steps.
#[derive(Debug, Clone)]
pub struct FlowWorkspace {
    n_x: usize,
    y: Vec<f64>,
    tmp: Vec<f64>,
    k: [Vec<f64>; 4],
    delta: Vec<f64>,
}

impl FlowWorkspace {
    pub fn new(n_x: usize, n_e: usize, networks: usize) -> Self {
        let n = n_x + n_e;
        FlowWorkspace {
            n_x,
            y: vec![0.0; n],
            tmp: vec![0.0; n],
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            delta: vec![0.0; networks],
        }
    }

    pub fn for_state(model: &dyn SystemModel, state: &HybridState) -> Self {
        FlowWorkspace::new(model.n_x(), state.e.len(), state.delta.len())
    }
}

fn eval(model: &dyn SystemModel, n_x: usize, delta: &[f64], y: &[f64], out: &mut [f64]) {
    let (x, e) = y.split_at(n_x);
    let (dx, de) = out.split_at_mut(n_x);
    model.flow(delta, x, e, dx, de);
}

/// One RK4 step of length `h`; clocks are advanced by the caller.
fn rk4_step(model: &dyn SystemModel, state: &HybridState, h: f64, ws: &mut FlowWorkspace) -> bool {
    let n_x = ws.n_x;
    ws.y[..n_x].copy_from_slice(&state.x);
    ws.y[n_x..].copy_from_slice(&state.e);
    let stages = [0.0, 0.5, 0.5, 1.0];
    for s in 0..4 {
        for (d, d0) in ws.delta.iter_mut().zip(&state.delta) {
            *d = d0 + stages[s] * h;
        }
        if s == 0 {
            ws.tmp.copy_from_slice(&ws.y);
        } else {
            let c = stages[s] * h;
            let (prev, _) = ws.k.split_at(s);
            let kp = &prev[s - 1];
            for ((t, y), k) in ws.tmp.iter_mut().zip(&ws.y).zip(kp) {
                *t = y + c * k;
            }
        }
        let mut out = std::mem::take(&mut ws.k[s]);
        eval(model, n_x, &ws.delta, &ws.tmp, &mut out);
        let ok = all_finite(&out);
        ws.k[s] = out;
        if !ok {
            return false;
        }
    }
    let [k1, k2, k3, k4] = &ws.k;
    for i in 0..ws.y.len() {
        ws.y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    all_finite(&ws.y)
}

/// Flows for `dt` time units with steps of at most `step`, landing exactly
/// on `t + dt`. `on_step` sees the state after every completed step.
pub fn flow_with<F>(
    state: &mut HybridState,
    model: &dyn SystemModel,
    dt: f64,
    step: f64,
    ws: &mut FlowWorkspace,
    mut on_step: F,
) -> Result<()>
where
    F: FnMut(&HybridState),
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::param("step", "must be finite and > 0"));
    }
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be finite and >= 0"));
    }
    let t_final = state.t + dt;
    let mut remaining = dt;
    while remaining > 0.0 {
        // absorb a sliver that would otherwise become a tiny extra step
        let h = if remaining <= step * (1.0 + 1e-9) {
            remaining
        } else {
            step
        };
        if !rk4_step(model, state, h, ws) {
            return Err(Error::IntegrationDiverged {
                t: state.t,
                j: state.j,
            });
        }
        let n_x = ws.n_x;
        state.x.copy_from_slice(&ws.y[..n_x]);
        state.e.copy_from_slice(&ws.y[n_x..]);
        for d in state.delta.iter_mut() {
            *d += h;
        }
        for tau in state.tau.iter_mut() {
            *tau += h;
        }
        remaining -= h;
        state.t = if remaining > 0.0 { state.t + h } else { t_final };
        on_step(state);
    }
    Ok(())
}

/// Flows for `dt` time units; `μ`, `m`, `κ` and `b` are left untouched.
pub fn integrate_flow(state: &mut HybridState, model: &dyn SystemModel, dt: f64, step: f64) -> Result<()> {
    let mut ws = FlowWorkspace::for_state(model, state);
    flow_with(state, model, dt, step, &mut ws, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::Layout;
    use crate::models::{ZeroDynamics, ZeroDynamicsParams};

    fn zero_state() -> (ZeroDynamics, HybridState) {
        let m = ZeroDynamics::new(&ZeroDynamicsParams {
            node_dims: vec![vec![1], vec![2]],
            x0: Some(vec![1.0, -2.0, 3.0]),
        })
        .unwrap();
        let layout = Layout::of(&m);
        let mut s = HybridState::initial(&layout, vec![1.0, -2.0, 3.0], vec![0.5, 0.25]);
        s.e = vec![0.1, 0.2, 0.3];
        s.m = vec![-0.1, 0.0, 0.4];
        (m, s)
    }

    #[test]
    fn zero_dynamics_only_moves_clocks() {
        let (m, mut s) = zero_state();
        let before = s.clone();
        integrate_flow(&mut s, &m, 0.5, 1e-3).unwrap();
        assert_eq!(s.x, before.x);
        assert_eq!(s.e, before.e);
        assert_eq!(s.mu, before.mu);
        assert_eq!(s.m, before.m);
        assert_eq!(s.kappa, before.kappa);
        assert_eq!(s.b, before.b);
        assert_eq!(s.t, 0.5);
        for d in &s.delta {
            assert!((d - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_final_step_lands_on_target() {
        let (m, mut s) = zero_state();
        let mut steps = 0;
        let mut ws = FlowWorkspace::for_state(&m, &s);
        flow_with(&mut s, &m, 0.0105, 1e-3, &mut ws, |_| steps += 1).unwrap();
        assert_eq!(steps, 11);
        assert_eq!(s.t, 0.0105);
    }

    #[test]
    fn zero_length_flow_is_a_no_op() {
        let (m, mut s) = zero_state();
        let before = s.clone();
        integrate_flow(&mut s, &m, 0.0, 1e-3).unwrap();
        assert_eq!(s, before);
    }
}
