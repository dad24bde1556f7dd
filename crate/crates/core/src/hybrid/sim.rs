//! Event loop: flows between scheduled jumps, jumps in a fixed order.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hybrid::integrator::{flow_with, FlowWorkspace};
use crate::hybrid::jumps::{sampling_jump, update_jump};
use crate::hybrid::trace::{EventKind, EventRecord, NetworkCounts, Snapshot, Trace};
use crate::hybrid::{HybridState, Layout, NetworkConfig};
use crate::linalg::norm;
use crate::models::{CertificateSet, SystemModel};

/// Lower clamp and safety factor for the automatic initial zoom.
pub const MU_FLOOR: f64 = 1e-6;
pub const MU_SAFETY: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    pub step: f64,
    pub seed: u64,
    /// Record a flow sample every `flow_stride` integrator steps; 0 records none.
    pub flow_stride: usize,
    /// Keep pre/post states on every jump record.
    pub snapshots: bool,
    /// Initial zoom per node; derived from the initial signal when absent.
    pub initial_mu: Option<Vec<f64>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            t_end: 1.0,
            step: 1e-4,
            seed: 0,
            flow_stride: 1,
            snapshots: false,
            initial_mu: None,
        }
    }
}

#[derive(Clone)]
pub struct Simulation {
    pub model: Arc<dyn SystemModel>,
    pub networks: Vec<NetworkConfig>,
    pub certificates: CertificateSet,
    pub options: RunOptions,
    layout: Layout,
    lambda_bar: Vec<f64>,
    end_tol: f64,
}

impl Simulation {
    pub fn new(
        model: Arc<dyn SystemModel>,
        networks: Vec<NetworkConfig>,
        certificates: CertificateSet,
        options: RunOptions,
    ) -> Result<Self> {
        let layout = Layout::of(model.as_ref());
        if networks.len() != layout.networks() {
            return Err(Error::Dimension {
                context: "networks",
                expected: layout.networks(),
                got: networks.len(),
            });
        }
        if certificates.networks.len() != networks.len() {
            return Err(Error::Dimension {
                context: "certificates",
                expected: networks.len(),
                got: certificates.networks.len(),
            });
        }
        for (i, (n, p)) in networks.iter().zip(&layout.partitions).enumerate() {
            n.validate()
                .map_err(|e| Error::config(format!("networks[{i}]"), e.to_string()))?;
            if &n.partition != p {
                return Err(Error::config(
                    format!("networks[{i}].node_dims"),
                    format!("model expects {:?}, got {:?}", p.dims(), n.partition.dims()),
                ));
            }
        }
        if !(options.t_end > 0.0 && options.t_end.is_finite()) {
            return Err(Error::config("t_end", "must be finite and > 0"));
        }
        let eps = networks.iter().map(|n| n.eps_min).fold(f64::INFINITY, f64::min);
        if !(options.step > 0.0 && options.step <= eps / 20.0 * (1.0 + 1e-12)) {
            return Err(Error::config(
                "step",
                format!("must lie in (0, min eps_min / 20 = {}]", eps / 20.0),
            ));
        }
        if let Some(mu) = &options.initial_mu {
            if mu.len() != layout.n_nodes() || mu.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
                return Err(Error::config(
                    "initial_mu",
                    format!("needs {} finite positive entries", layout.n_nodes()),
                ));
            }
        }
        let sim_tol = 1e-9 * options.t_end.max(1.0);
        let lambda_bar = networks
            .iter()
            .map(|n| n.etm.lambda_bar())
            .collect::<Result<Vec<_>>>()?;
        let sim = Simulation {
            model,
            networks,
            certificates,
            options,
            layout,
            lambda_bar,
            end_tol: sim_tol,
        };
        let s0 = sim.initial_state();
        if !(s0.mu.iter().all(|m| m.is_finite()) && s0.x.iter().all(|v| v.is_finite())) {
            return Err(Error::config("model", "initial state or output is not finite"));
        }
        Ok(sim)
    }

    /// Event times within float noise of `t_end` are moved onto it, so a
    /// schedule like `k h` with `K h = t_end` keeps its last event.
    fn snap(&self, t: f64) -> f64 {
        if (t - self.options.t_end).abs() <= self.end_tol {
            self.options.t_end
        } else {
            t
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn lambda_bar(&self) -> &[f64] {
        &self.lambda_bar
    }

    /// `μ(0) = max{|z(0)|/m, MU_FLOOR} · MU_SAFETY` per node unless given.
    pub fn initial_state(&self) -> HybridState {
        let x0 = self.model.initial_x();
        let mu0 = match &self.options.initial_mu {
            Some(mu) => mu.clone(),
            None => {
                let mut mu = Vec::with_capacity(self.layout.n_nodes());
                let zeros = vec![0.0; self.layout.n_e()];
                let delta = vec![0.0; self.layout.networks()];
                for (i, net) in self.networks.iter().enumerate() {
                    let z = self.model.output(i, &delta, &x0, &zeros);
                    for (l, zl) in net.partition.blocks(&z).enumerate() {
                        mu.push((norm(zl) / net.quantizers[l].range).max(MU_FLOOR) * MU_SAFETY);
                    }
                }
                mu
            }
        };
        HybridState::initial(&self.layout, x0, mu0)
    }

    pub fn certificate_columns(&self) -> Vec<String> {
        let mut c: Vec<String> = (0..self.networks.len()).map(|i| format!("W_{i}")).collect();
        c.push("V".into());
        c
    }

    fn record(&self, s: &HybridState, kind: EventKind, network: Option<usize>) -> EventRecord {
        let l = &self.layout;
        let mut certs: Vec<f64> = (0..self.networks.len())
            .map(|i| {
                self.certificates.networks[i].w(s.e_i(l, i), s.mu_i(l, i), s.m_i(l, i), s.kappa[i], s.b[i])
            })
            .collect();
        certs.push(self.certificates.v(&s.x));
        EventRecord {
            t: s.t,
            j: s.j,
            network,
            kind,
            gamma: None,
            triggered: None,
            norm_eta: norm(self.model.tracking_error(&s.x)),
            norm_e: norm(&s.e),
            network_eta: (0..self.networks.len())
                .map(|i| self.model.network_tracking_norm(i, &s.x))
                .collect(),
            certificates: certs,
            snapshot: None,
        }
    }

    pub fn run(&self) -> Result<Trace> {
        let n = self.networks.len();
        let opts = &self.options;
        let mut state = self.initial_state();
        let mut ws = FlowWorkspace::for_state(self.model.as_ref(), &state);
        let mut rngs: Vec<ChaCha8Rng> = (0..n)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
                r.set_stream(i as u64);
                r
            })
            .collect();
        let mut next_sample: Vec<f64> = (0..n)
            .map(|i| self.snap(self.networks[i].draw_interval(&mut rngs[i])))
            .collect();
        let mut next_update = vec![f64::INFINITY; n];
        let mut last_sample: Vec<Option<f64>> = vec![None; n];
        let mut counts = vec![NetworkCounts::default(); n];
        let mut records = Vec::new();
        if opts.flow_stride > 0 {
            records.push(self.record(&state, EventKind::FlowSample, None));
        }
        let mut steps: usize = 0;

        loop {
            let next = (0..n)
                .map(|i| {
                    if state.b[i] {
                        next_update[i]
                    } else {
                        next_sample[i]
                    }
                })
                .fold(f64::INFINITY, f64::min);
            let target = next.min(opts.t_end);
            if target > state.t {
                let stride = opts.flow_stride;
                let this = self;
                let dt = target - state.t;
                flow_with(&mut state, self.model.as_ref(), dt, opts.step, &mut ws, |s| {
                    steps += 1;
                    if stride > 0 && steps.is_multiple_of(stride) {
                        records.push(this.record(s, EventKind::FlowSample, None));
                    }
                })?;
            }
            if next > opts.t_end {
                break;
            }
            let te = next;

            for i in 0..n {
                if state.b[i] || next_sample[i] != te {
                    continue;
                }
                let net = &self.networks[i];
                if let Some(prev) = last_sample[i] {
                    let gap = te - prev;
                    if gap < net.eps_min * 1e-6 {
                        return Err(Error::Zeno {
                            network: i,
                            t: te,
                            gap,
                        });
                    }
                }
                let pre = opts.snapshots.then(|| state.clone());
                let out = sampling_jump(
                    &mut state,
                    i,
                    &self.layout,
                    self.model.as_ref(),
                    net,
                    self.certificates.networks[i].as_ref(),
                    self.lambda_bar[i],
                )?;
                last_sample[i] = Some(te);
                let h = net.draw_interval(&mut rngs[i]);
                let d = net.draw_delay(&mut rngs[i], h);
                next_sample[i] = self.snap(te + h);
                next_update[i] = self.snap(te + d);

                let c = &mut counts[i];
                c.samples += 1;
                c.triggered += u64::from(out.triggered);
                c.saturation_violations += u64::from(out.saturated);
                let mut rec = self.record(&state, EventKind::Sample, Some(i));
                rec.gamma = Some(out.gamma);
                rec.triggered = Some(out.triggered);
                if let Some(pre) = pre {
                    rec.snapshot = Some(Box::new(Snapshot {
                        pre,
                        post: state.clone(),
                    }));
                }
                records.push(rec);
            }

            for i in 0..n {
                if !state.b[i] || next_update[i] != te {
                    continue;
                }
                let pre = opts.snapshots.then(|| state.clone());
                update_jump(&mut state, i, &self.layout, &self.networks[i])?;
                next_update[i] = f64::INFINITY;
                counts[i].updates += 1;
                let mut rec = self.record(&state, EventKind::Update, Some(i));
                rec.triggered = Some(state.triggered[i]);
                if let Some(pre) = pre {
                    rec.snapshot = Some(Box::new(Snapshot {
                        pre,
                        post: state.clone(),
                    }));
                }
                records.push(rec);
            }
        }

        Ok(Trace {
            records,
            counts,
            certificate_columns: self.certificate_columns(),
            final_state: state,
        })
    }
}
