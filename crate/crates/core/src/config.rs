//! Run configuration read from TOML or JSON.
//!
//! Most per-network fields are optional. Built-in robot models fill the
//! gaps with the two-arm example constants; the zero-dynamics model needs
//! the ETM gains spelled out.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::design::{default_phi0, PhiParams};
use crate::error::{Error, Result};
use crate::etm::{l_bar0_from_rho_bar, EtmParams};
use crate::hybrid::{DelayPolicy, NetworkConfig, RunOptions, SamplingPolicy, Simulation};
use crate::models::robot_arm::TwoArmConstants;
use crate::models::{
    CertificateSet, NetworkCertificate, ProtocolCertificate, RobotArm, RobotArmParams, SystemModel,
    ZeroDynamics, ZeroDynamicsParams,
};
use crate::protocols::Protocol;
use crate::quantization::QuantizerParams;

pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_RANGE: f64 = 1e12;
pub const DEFAULT_ERR_BOUND: f64 = 0.8;
pub const DEFAULT_ZOOM: f64 = 0.6;
pub const DEFAULT_VARRHO0: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    RobotArmRr(RobotArmParams),
    RobotArmTod(RobotArmParams),
    ZeroDynamics(ZeroDynamicsParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::RobotArmRr(_) => "robot_arm_rr",
            ModelSpec::RobotArmTod(_) => "robot_arm_tod",
            ModelSpec::ZeroDynamics(_) => "zero_dynamics",
        }
    }

    pub fn default_protocol(&self) -> Option<Protocol> {
        match self {
            ModelSpec::RobotArmRr(_) => Some(Protocol::RoundRobin),
            ModelSpec::RobotArmTod(_) => Some(Protocol::TryOnceDiscard),
            ModelSpec::ZeroDynamics(_) => None,
        }
    }

    fn is_robot(&self) -> bool {
        !matches!(self, ModelSpec::ZeroDynamics(_))
    }

    pub fn build(&self) -> Result<Arc<dyn SystemModel>> {
        Ok(match self {
            ModelSpec::RobotArmRr(p) | ModelSpec::RobotArmTod(p) => Arc::new(
                RobotArm::new(self.name(), p.clone()).map_err(|e| Error::config("model", e.to_string()))?,
            ),
            ModelSpec::ZeroDynamics(p) => {
                Arc::new(ZeroDynamics::new(p).map_err(|e| Error::config("model", e.to_string()))?)
            }
        })
    }
}

/// A scalar applied to every node, or one value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerNode<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Clone> PerNode<T> {
    fn expand(&self, ell: usize, field: &str) -> Result<Vec<T>> {
        match self {
            PerNode::All(v) => Ok(vec![v.clone(); ell]),
            PerNode::Each(v) if v.len() == ell => Ok(v.clone()),
            PerNode::Each(v) => Err(Error::config(
                field,
                format!("expected {ell} entries, got {}", v.len()),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerSpec {
    #[serde(default = "default_range")]
    pub range: f64,
    #[serde(default = "default_err_bound")]
    pub err_bound: f64,
    /// Defaults to `err_bound`.
    #[serde(default)]
    pub dead_zone: Option<f64>,
}

fn default_range() -> f64 {
    DEFAULT_RANGE
}

fn default_err_bound() -> f64 {
    DEFAULT_ERR_BOUND
}

impl Default for QuantizerSpec {
    fn default() -> Self {
        QuantizerSpec {
            range: DEFAULT_RANGE,
            err_bound: DEFAULT_ERR_BOUND,
            dead_zone: None,
        }
    }
}

impl QuantizerSpec {
    fn build(&self) -> Result<QuantizerParams> {
        QuantizerParams::with_dead_zone(
            self.range,
            self.err_bound,
            self.dead_zone.unwrap_or(self.err_bound),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtmSpec {
    #[serde(default)]
    pub rho: f64,
    /// Defaults to the certificate's contraction.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub gamma0: Option<f64>,
    #[serde(default)]
    pub gamma1: Option<f64>,
    #[serde(default)]
    pub lbar0: Option<f64>,
    /// Alternative to `lbar0`: the threshold `ρ̄` it produces.
    #[serde(default)]
    pub rho_bar: Option<f64>,
    #[serde(default)]
    pub allow_rho_override: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    #[serde(default, rename = "L0")]
    pub l0: Option<f64>,
    #[serde(default, rename = "L1")]
    pub l1: Option<f64>,
    #[serde(default)]
    pub varrho0: Option<f64>,
    /// Defaults to `varrho0 · M / λ`.
    #[serde(default)]
    pub varrho1: Option<f64>,
    #[serde(default)]
    pub phi0_0: Option<f64>,
    #[serde(default)]
    pub phi1_0: Option<f64>,
    /// Defaults to the ETM's `λ̄`.
    #[serde(default)]
    pub lambda_bar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub masp: f64,
    pub mad: f64,
    /// Defaults to half the MASP.
    #[serde(default)]
    pub eps_min: Option<f64>,
    #[serde(default)]
    pub protocol: Option<Protocol>,
    #[serde(default)]
    pub quantizer: Option<PerNode<QuantizerSpec>>,
    #[serde(default)]
    pub zoom: Option<PerNode<f64>>,
    #[serde(default)]
    pub zoom_floor: f64,
    #[serde(default)]
    pub zoom_on_trigger_only: bool,
    /// Defaults to a fixed interval equal to the MASP.
    #[serde(default)]
    pub sampling: Option<SamplingPolicy>,
    /// Defaults to a fixed delay equal to the MAD.
    #[serde(default)]
    pub delay: Option<DelayPolicy>,
    #[serde(default)]
    pub etm: EtmSpec,
    /// Weight `ω` of the error term in `W`.
    #[serde(default)]
    pub omega_w: Option<f64>,
    #[serde(default)]
    pub design: DesignSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "one")]
    pub flow_stride: usize,
    #[serde(default)]
    pub snapshots: bool,
}

fn one() -> usize {
    1
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            flow_stride: 1,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_monitor_tol")]
    pub tol: f64,
}

fn default_monitor_tol() -> f64 {
    1e-9
}

impl Default for MonitorSpec {
    fn default() -> Self {
        MonitorSpec {
            enabled: false,
            tol: default_monitor_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub t_end: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub seed: u64,
    pub networks: Vec<NetworkSpec>,
    #[serde(default)]
    pub initial_mu: Option<Vec<f64>>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub monitor: MonitorSpec,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

/// Inputs of the MASP/MAD search for one network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInputs {
    pub p0: PhiParams,
    pub p1: PhiParams,
    pub lambda_bar: f64,
}

/// A validated configuration ready to run.
#[derive(Clone)]
pub struct Scenario {
    pub simulation: Simulation,
    pub monitor: MonitorSpec,
    pub warnings: Vec<String>,
}

struct Resolved {
    net: NetworkConfig,
    cert: ProtocolCertificate,
    preset: Option<TwoArmConstants>,
}

fn at(i: usize, field: &str) -> String {
    format!("networks[{i}].{field}")
}

fn wrap(field: String) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    }
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::config("<toml>", e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config("<json>", e.to_string()))
    }

    /// Reads JSON when the extension is `.json`, TOML otherwise.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<toml>", e.to_string()))
    }

    fn resolve(&self, model: &dyn SystemModel, i: usize) -> Result<Resolved> {
        let spec = &self.networks[i];
        let partition = model.partitions()[i].clone();
        let ell = partition.ell();
        let protocol = spec
            .protocol
            .or(self.model.default_protocol())
            .ok_or_else(|| Error::config(at(i, "protocol"), "required for this model"))?;
        let preset = self
            .model
            .is_robot()
            .then(|| TwoArmConstants::for_protocol(protocol));

        let quantizers = spec
            .quantizer
            .clone()
            .unwrap_or(PerNode::All(QuantizerSpec::default()))
            .expand(ell, &at(i, "quantizer"))?
            .iter()
            .map(|q| q.build())
            .collect::<Result<Vec<_>>>()
            .map_err(wrap(at(i, "quantizer")))?;
        let zoom = spec
            .zoom
            .clone()
            .unwrap_or(PerNode::All(DEFAULT_ZOOM))
            .expand(ell, &at(i, "zoom"))?;

        let cert = ProtocolCertificate::new(
            protocol,
            partition.clone(),
            &quantizers,
            &zoom,
            spec.zoom_floor,
            spec.omega_w,
            model.state_components(i),
        )
        .map_err(wrap(at(i, "omega_w")))?;

        let e = &spec.etm;
        let gamma0 = e
            .gamma0
            .or(preset.map(|p| p.gamma[i][0]))
            .ok_or_else(|| Error::config(at(i, "etm.gamma0"), "required for this model"))?;
        let gamma1 = e
            .gamma1
            .or(preset.map(|p| p.gamma[i][1]))
            .ok_or_else(|| Error::config(at(i, "etm.gamma1"), "required for this model"))?;
        let l_bar0 = match (e.lbar0, e.rho_bar) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    at(i, "etm"),
                    "give either lbar0 or rho_bar, not both",
                ))
            }
            (Some(l), None) => l,
            (None, Some(rb)) => l_bar0_from_rho_bar(rb, gamma0).map_err(wrap(at(i, "etm.rho_bar")))?,
            (None, None) => match preset {
                Some(p) => l_bar0_from_rho_bar(p.rho_bar[i], gamma0)?,
                None => return Err(Error::config(at(i, "etm.lbar0"), "lbar0 or rho_bar is required")),
            },
        };
        let etm = EtmParams {
            rho: e.rho,
            lambda: e.lambda.unwrap_or(cert.lambda()),
            gamma0,
            gamma1,
            l_bar0,
            allow_rho_override: e.allow_rho_override,
        };

        let net = NetworkConfig {
            masp: spec.masp,
            mad: spec.mad,
            eps_min: spec.eps_min.unwrap_or(0.5 * spec.masp),
            partition,
            protocol,
            quantizers,
            zoom,
            zoom_floor: spec.zoom_floor,
            zoom_on_trigger_only: spec.zoom_on_trigger_only,
            etm,
            sampling: spec.sampling.unwrap_or(SamplingPolicy::Fixed { h: spec.masp }),
            delay: spec.delay.unwrap_or(DelayPolicy::Fixed { value: spec.mad }),
        };
        net.validate().map_err(|err| match err {
            Error::Param { name, reason } => Error::config(at(i, &name), reason),
            other => Error::config(at(i, ""), other.to_string()),
        })?;
        Ok(Resolved { net, cert, preset })
    }

    fn check_shape(&self, model: &dyn SystemModel) -> Result<()> {
        if self.networks.len() != model.n_networks() {
            return Err(Error::config(
                "networks",
                format!(
                    "model {} has {} networks, config lists {}",
                    model.name(),
                    model.n_networks(),
                    self.networks.len()
                ),
            ));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Scenario> {
        let model = self.model.build()?;
        self.check_shape(model.as_ref())?;
        let mut networks = Vec::new();
        let mut certs: Vec<Arc<dyn NetworkCertificate>> = Vec::new();
        let mut warnings = Vec::new();
        for i in 0..self.networks.len() {
            let r = self.resolve(model.as_ref(), i)?;
            warnings.extend(
                r.net
                    .etm
                    .warnings()
                    .into_iter()
                    .map(|w| format!("networks[{i}]: {w}")),
            );
            networks.push(r.net);
            certs.push(Arc::new(r.cert));
        }
        let m = model.clone();
        let set = CertificateSet::new(certs, Arc::new(move |x: &[f64]| m.lyapunov(x)));
        let options = RunOptions {
            t_end: self.t_end,
            step: self.step,
            seed: self.seed,
            flow_stride: self.output.flow_stride,
            snapshots: self.output.snapshots || self.monitor.enabled,
            initial_mu: self.initial_mu.clone(),
        };
        let simulation = Simulation::new(model, networks, set, options)?;
        Ok(Scenario {
            simulation,
            monitor: self.monitor.clone(),
            warnings,
        })
    }

    /// Timer-function inputs per network.
    pub fn design_inputs(&self) -> Result<Vec<DesignInputs>> {
        let model = self.model.build()?;
        self.check_shape(model.as_ref())?;
        (0..self.networks.len())
            .map(|i| {
                let r = self.resolve(model.as_ref(), i)?;
                let d = &self.networks[i].design;
                let need = |v: Option<f64>, preset: Option<f64>, field: &str| {
                    v.or(preset)
                        .ok_or_else(|| Error::config(at(i, field), "required for design"))
                };
                let l0 = need(d.l0, r.preset.map(|p| p.l[i][0]), "design.L0")?;
                let l1 = need(d.l1, r.preset.map(|p| p.l[i][1]), "design.L1")?;
                let lambda_bar = match d.lambda_bar {
                    Some(v) => v,
                    None => r.net.etm.lambda_bar()?,
                };
                let varrho0 = d
                    .varrho0
                    .or(r.preset.map(|p| p.varrho0))
                    .unwrap_or(DEFAULT_VARRHO0);
                let m_grad = r.net.protocol.gradient_bound(r.net.partition.ell());
                let varrho1 = d.varrho1.unwrap_or(varrho0 * m_grad / r.cert.lambda());
                let fallback = r.preset.map(|p| p.phi0[i]).unwrap_or(default_phi0(lambda_bar));
                let p0 = PhiParams {
                    l: l0,
                    gamma: r.net.etm.gamma0,
                    varrho: varrho0,
                    phi0: d.phi0_0.unwrap_or(fallback),
                };
                let p1 = PhiParams {
                    l: l1,
                    gamma: r.net.etm.gamma1,
                    varrho: varrho1,
                    phi0: d.phi1_0.unwrap_or(fallback),
                };
                p0.validate().map_err(wrap(at(i, "design")))?;
                p1.validate().map_err(wrap(at(i, "design")))?;
                Ok(DesignInputs { p0, p1, lambda_bar })
            })
            .collect()
    }
}
