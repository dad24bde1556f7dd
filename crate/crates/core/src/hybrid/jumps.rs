//! Sampling and update jump maps of one network.

use crate::error::{Error, Result};
use crate::etm::{gamma_value, triggered};
use crate::hybrid::{HybridState, Layout, NetworkConfig};
use crate::models::{NetworkCertificate, SystemModel};
use crate::protocols::{protocol_update, select};
use crate::quantization::{quantization_error, within_range};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    pub gamma: f64,
    pub triggered: bool,
    /// Some node's signal exceeded its quantizer range at this sampling.
    pub saturated: bool,
    /// Node granted access, when the sample was transmitted.
    pub granted: Option<usize>,
}

/// Sampling instant of network `i`.
///
/// Evaluates the triggering rule on the current signal; if it fires, the
/// protocol grants one node, whose quantized value will replace the held
/// one at arrival. Either way the network enters its in-flight phase.
#[allow(clippy::too_many_arguments)]
pub fn sampling_jump(
    state: &mut HybridState,
    i: usize,
    layout: &Layout,
    model: &dyn SystemModel,
    net: &NetworkConfig,
    cert: &dyn NetworkCertificate,
    lambda_bar: f64,
) -> Result<SampleOutcome> {
    let tol = net.time_tol();
    if state.b[i] {
        return Err(Error::Precondition(format!(
            "sampling of network {i} while a packet is in flight"
        )));
    }
    let tau = state.tau[i];
    if tau < net.eps_min - tol || tau > net.masp + tol {
        return Err(Error::Precondition(format!(
            "sampling of network {i} at tau = {tau} outside [{}, {}]",
            net.eps_min, net.masp
        )));
    }

    let part = &layout.partitions[i];
    let er = layout.e[i].clone();
    let nr = layout.mu[i].clone();
    let z = model.output(i, &state.delta, &state.x, &state.e);
    let mu = &state.mu[nr];

    let mut saturated = false;
    let mut eps_q = Vec::with_capacity(z.len());
    for (l, zl) in part.blocks(&z).enumerate() {
        let q = &net.quantizers[l];
        saturated |= !within_range(q, mu[l], zl);
        eps_q.extend(quantization_error(q, mu[l], zl)?);
    }

    let e = &state.e[er.clone()];
    let w = cert.w(e, mu, &state.m[er.clone()], state.kappa[i], false);
    let gamma = gamma_value(
        w,
        cert.phi_state(&z),
        false,
        net.etm.gamma0,
        net.etm.rho,
        lambda_bar,
    );
    let fire = triggered(gamma);

    let mut granted = None;
    if fire {
        granted = Some(select(net.protocol, state.kappa[i], e, part));
        let h = protocol_update(net.protocol, state.kappa[i], e, &eps_q, part)?;
        for (k, hk) in er.clone().zip(h) {
            state.m[k] = hk - state.e[k];
        }
        state.kappa[i] += 1;
    }
    state.triggered[i] = fire;
    state.b[i] = true;
    state.tau[i] = 0.0;
    state.j += 1;
    Ok(SampleOutcome {
        gamma,
        triggered: fire,
        saturated,
        granted,
    })
}

/// Arrival instant of network `i`'s in-flight packet.
pub fn update_jump(state: &mut HybridState, i: usize, layout: &Layout, net: &NetworkConfig) -> Result<()> {
    if !state.b[i] {
        return Err(Error::Precondition(format!(
            "update of network {i} without a packet in flight"
        )));
    }
    let tau = state.tau[i];
    if tau > net.mad + net.time_tol() {
        return Err(Error::Precondition(format!(
            "update of network {i} at tau = {tau} beyond mad = {}",
            net.mad
        )));
    }
    let fire = state.triggered[i];
    let er = layout.e[i].clone();
    if fire {
        for k in er.clone() {
            state.e[k] += state.m[k];
        }
    }
    if fire || !net.zoom_on_trigger_only {
        let floor = net.zoom_floor.max(f64::MIN_POSITIVE);
        for (mu, w) in state.mu[layout.mu[i].clone()].iter_mut().zip(&net.zoom) {
            *mu = (w * *mu).max(floor);
        }
    }
    for k in er {
        state.m[k] = -state.e[k];
    }
    state.b[i] = false;
    state.j += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::etm::EtmParams;
    use crate::hybrid::{DelayPolicy, SamplingPolicy};
    use crate::models::{ProtocolCertificate, ZeroDynamics, ZeroDynamicsParams};
    use crate::protocols::{NodePartition, Protocol};
    use crate::quantization::QuantizerParams;

    fn net(ell: usize, rho: f64) -> NetworkConfig {
        NetworkConfig {
            masp: 0.1,
            mad: 0.02,
            eps_min: 0.01,
            partition: NodePartition::new(vec![1; ell]).unwrap(),
            protocol: Protocol::RoundRobin,
            quantizers: vec![QuantizerParams::new(100.0, 0.8).unwrap(); ell],
            zoom: vec![0.6; ell],
            zoom_floor: 0.0,
            zoom_on_trigger_only: false,
            etm: EtmParams {
                rho,
                lambda: 0.5,
                gamma0: 1.0,
                gamma1: 1.0,
                l_bar0: 0.0,
                allow_rho_override: false,
            },
            sampling: SamplingPolicy::Fixed { h: 0.1 },
            delay: DelayPolicy::Fixed { value: 0.02 },
        }
    }

    fn setup(dims: Vec<Vec<usize>>, x0: Vec<f64>) -> (ZeroDynamics, Layout) {
        let m = ZeroDynamics::new(&ZeroDynamicsParams {
            node_dims: dims,
            x0: Some(x0),
        })
        .unwrap();
        let l = Layout::of(&m);
        (m, l)
    }

    fn cert(n: &NetworkConfig) -> ProtocolCertificate {
        ProtocolCertificate::new(
            n.protocol,
            n.partition.clone(),
            &n.quantizers,
            &n.zoom,
            n.zoom_floor,
            None,
            (0..n.partition.total()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_node_rr_sampling_sets_m_to_eps_minus_e() {
        // z = 2.3 with mu = 1: q = 1.6 * round(2.3 / 1.6) = 1.6, eps = -0.7
        let (model, layout) = setup(vec![vec![1]], vec![2.3]);
        let n = net(1, 0.0);
        let mut s = HybridState::initial(&layout, vec![2.3], vec![1.0]);
        s.e = vec![2.0];
        s.tau = vec![0.1];
        let out = sampling_jump(&mut s, 0, &layout, &model, &n, &cert(&n), 0.5).unwrap();
        assert!(out.triggered);
        assert!((s.m[0] - (-0.7 - 2.0)).abs() < 1e-12);
        assert_eq!(s.kappa[0], 1);
        assert!(s.b[0]);
        assert_eq!(s.tau[0], 0.0);
        assert_eq!(s.j, 1);
    }

    #[test]
    fn untriggered_sampling_keeps_memory() {
        let (model, layout) = setup(vec![vec![1]], vec![10.0]);
        let n = net(1, 0.5);
        let mut s = HybridState::initial(&layout, vec![10.0], vec![0.01]);
        s.m = vec![0.7];
        s.tau = vec![0.05];
        let out = sampling_jump(&mut s, 0, &layout, &model, &n, &cert(&n), 0.5).unwrap();
        assert!(out.gamma < 0.0);
        assert!(!out.triggered);
        assert_eq!(s.m, vec![0.7]);
        assert_eq!(s.kappa[0], 0);
        assert!(s.b[0]);
        assert_eq!(s.tau[0], 0.0);
    }

    #[test]
    fn sampling_precondition() {
        let (model, layout) = setup(vec![vec![1]], vec![1.0]);
        let n = net(1, 0.0);
        let mut s = HybridState::initial(&layout, vec![1.0], vec![1.0]);
        s.tau = vec![0.001];
        assert!(matches!(
            sampling_jump(&mut s, 0, &layout, &model, &n, &cert(&n), 0.5),
            Err(Error::Precondition(_))
        ));
        s.tau = vec![0.05];
        s.b = vec![true];
        assert!(sampling_jump(&mut s, 0, &layout, &model, &n, &cert(&n), 0.5).is_err());
    }

    #[test]
    fn triggered_update_perfect_correction() {
        let (_, layout) = setup(vec![vec![2]], vec![0.0, 0.0]);
        let mut n = net(1, 0.0);
        n.partition = NodePartition::new(vec![2]).unwrap();
        let mut s = HybridState::initial(&layout, vec![0.0, 0.0], vec![1.0]);
        s.e = vec![1.0, -2.0];
        s.m = vec![-1.0, 2.0];
        s.b = vec![true];
        s.triggered = vec![true];
        update_jump(&mut s, 0, &layout, &n).unwrap();
        assert_eq!(s.e, vec![0.0, 0.0]);
        assert_eq!(s.m, vec![0.0, 0.0]);
        assert!(!s.b[0]);
    }

    #[test]
    fn untriggered_update_resets_memory() {
        let (_, layout) = setup(vec![vec![1]], vec![0.0]);
        let n = net(1, 0.0);
        let mut s = HybridState::initial(&layout, vec![0.0], vec![1.0]);
        s.e = vec![1.0];
        s.m = vec![5.0];
        s.b = vec![true];
        update_jump(&mut s, 0, &layout, &n).unwrap();
        assert_eq!(s.e, vec![1.0]);
        assert_eq!(s.m, vec![-1.0]);
        assert_eq!(s.mu, vec![0.6]);
    }

    #[test]
    fn zoom_contracts_every_node() {
        let (_, layout) = setup(vec![vec![1, 1, 1]], vec![0.0; 3]);
        let n = net(3, 0.0);
        let mut s = HybridState::initial(&layout, vec![0.0; 3], vec![1.0; 3]);
        s.b = vec![true];
        update_jump(&mut s, 0, &layout, &n).unwrap();
        assert_eq!(s.mu, vec![0.6; 3]);
    }

    #[test]
    fn zoom_on_trigger_only_switch() {
        let (_, layout) = setup(vec![vec![1]], vec![0.0]);
        let mut n = net(1, 0.0);
        n.zoom_on_trigger_only = true;
        let mut s = HybridState::initial(&layout, vec![0.0], vec![1.0]);
        s.b = vec![true];
        update_jump(&mut s, 0, &layout, &n).unwrap();
        assert_eq!(s.mu, vec![1.0]);
    }

    #[test]
    fn update_without_packet_rejected() {
        let (_, layout) = setup(vec![vec![1]], vec![0.0]);
        let n = net(1, 0.0);
        let mut s = HybridState::initial(&layout, vec![0.0], vec![1.0]);
        assert!(matches!(
            update_jump(&mut s, 0, &layout, &n),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn jumps_leave_other_networks_alone() {
        let (model, layout) = setup(vec![vec![1], vec![1]], vec![3.0, -4.0]);
        let n = net(1, 0.0);
        let mut s = HybridState::initial(&layout, vec![3.0, -4.0], vec![1.0, 1.0]);
        s.e = vec![0.2, 0.4];
        s.m = vec![0.1, -0.3];
        s.tau = vec![0.05, 0.07];
        let before = s.clone();
        sampling_jump(&mut s, 0, &layout, &model, &n, &cert(&n), 0.5).unwrap();
        update_jump(&mut s, 0, &layout, &n).unwrap();
        assert_eq!(s.e[1], before.e[1]);
        assert_eq!(s.m[1], before.m[1]);
        assert_eq!(s.mu[1], before.mu[1]);
        assert_eq!(s.tau[1], before.tau[1]);
        assert_eq!(s.kappa[1], before.kappa[1]);
        assert_eq!(s.b[1], before.b[1]);
    }
}
