//! The two-arm example configurations and their design targets.

use crate::config::{
    DesignSpec, EtmSpec, ModelSpec, MonitorSpec, NetworkSpec, OutputSpec, PerNode, QuantizerSpec, SimConfig,
};
use crate::hybrid::{DelayPolicy, SamplingPolicy};
use crate::models::RobotArmParams;
use crate::protocols::Protocol;

/// Target `(T_i, Δ_i)` per network.
pub const TARGET_DESIGN_RR: [(f64, f64); 2] = [(0.0256, 0.0064), (0.0161, 0.0026)];
pub const TARGET_DESIGN_TOD: [(f64, f64); 2] = [(0.0279, 0.00445), (0.02115, 0.0032)];

/// ETM gains, 0.9 ρ̄ per network.
pub const RHO: [f64; 2] = [0.045, 0.0333];

pub const ZOOM_FLOOR: f64 = 1e-10;

fn network(masp: f64, mad: f64, rho: f64) -> NetworkSpec {
    NetworkSpec {
        masp,
        mad,
        eps_min: Some(0.5 * masp),
        protocol: None,
        quantizer: Some(PerNode::All(QuantizerSpec {
            range: 1e12,
            err_bound: 0.8,
            dead_zone: None,
        })),
        zoom: Some(PerNode::All(0.6)),
        zoom_floor: ZOOM_FLOOR,
        zoom_on_trigger_only: false,
        sampling: Some(SamplingPolicy::Fixed { h: masp }),
        delay: Some(DelayPolicy::Fixed { value: mad }),
        etm: EtmSpec {
            rho,
            ..Default::default()
        },
        omega_w: None,
        design: DesignSpec {
            lambda_bar: Some((2.0f64 / 3.0).sqrt()),
            ..Default::default()
        },
    }
}

fn robot(protocol: Protocol, masp: f64, mad: f64, t_end: f64) -> SimConfig {
    let params = RobotArmParams::default();
    SimConfig {
        model: match protocol {
            Protocol::RoundRobin => ModelSpec::RobotArmRr(params),
            Protocol::TryOnceDiscard => ModelSpec::RobotArmTod(params),
        },
        t_end,
        step: 1e-4,
        seed: 1,
        networks: RHO.iter().map(|&r| network(masp, mad, r)).collect(),
        initial_mu: None,
        output: OutputSpec {
            flow_stride: 10,
            snapshots: false,
        },
        monitor: MonitorSpec::default(),
    }
}

/// Round-Robin scenario: `T = 0.01`, `Δ = 0.0015`, 23 time units.
pub fn fig1_rr() -> SimConfig {
    robot(Protocol::RoundRobin, 0.01, 0.0015, 23.0)
}

/// Try-Once-Discard scenario: `T = 0.014`, `Δ = 0.0025`, 32 time units.
pub fn fig2_tod() -> SimConfig {
    robot(Protocol::TryOnceDiscard, 0.014, 0.0025, 32.0)
}
