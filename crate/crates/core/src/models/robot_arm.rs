//! Two coupled single-link robot arms tracking a reference pair.
//!
//! State `x = (η₁₁, η₁₂, η₂₁, η₂₂, r₁₁, r₁₂, r₂₁, r₂₂)`: tracking error
//! (angle, rate) of each arm followed by the reference states. Arm `i` is
//! served by network `i`, which carries three nodes: `(η_i1, r_i1)`,
//! `(η_i2, r_i2)` and the control signal `u_c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::protocols::{NodePartition, Protocol};

pub const ARMS: usize = 2;

/// Error-block layout of one network: `(e_η1, e_r1, e_η2, e_r2, e_c)`.
pub const NODE_DIMS: [usize; 3] = [2, 2, 1];

/// `V` coefficients `(p1, p2, p3)` per arm.
pub const V_COEFFS: [[f64; 3]; ARMS] = [[8.0, 12.0, 6.0], [5.0, 7.0, 9.0]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotArmParams {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    /// Arm coupling `b_ij`: arm `i` feels `Σ_j b_ij (x_{1j} − x_{2j})`.
    pub coupling: Vec<Vec<f64>>,
    /// Initial tracking error `(η₁₁, η₁₂, η₂₁, η₂₂)`.
    pub eta0: Vec<f64>,
    /// Initial reference `(r₁₁, r₁₂, r₂₁, r₂₂)`.
    pub r0: Vec<f64>,
    pub feedforward_amplitude: f64,
    pub feedforward_frequency: f64,
}

impl Default for RobotArmParams {
    fn default() -> Self {
        RobotArmParams {
            a: vec![1.962, 2.943],
            c: vec![2.0, 4.0],
            coupling: vec![vec![-0.1, 0.0], vec![0.1, 0.0]],
            eta0: vec![0.5, -0.2, -0.4, 0.3],
            r0: vec![0.5, 0.0, -0.3, 0.0],
            feedforward_amplitude: 5.0,
            feedforward_frequency: 5.0,
        }
    }
}

impl RobotArmParams {
    pub fn validate(&self) -> Result<()> {
        let want = |name: &str, got: usize, n: usize| -> Result<()> {
            if got == n {
                Ok(())
            } else {
                Err(Error::param(name, format!("expected {n} entries, got {got}")))
            }
        };
        want("a", self.a.len(), ARMS)?;
        want("c", self.c.len(), ARMS)?;
        want("coupling", self.coupling.len(), ARMS)?;
        for row in &self.coupling {
            want("coupling", row.len(), ARMS)?;
        }
        want("eta0", self.eta0.len(), 2 * ARMS)?;
        want("r0", self.r0.len(), 2 * ARMS)?;
        if self.a.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::param("a", "entries must be finite and > 0"));
        }
        if self.c.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::param("c", "entries must be finite and > 0"));
        }
        Ok(())
    }
}

/// Certificate constants for the two-arm example, per network `(net 1, net 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoArmConstants {
    /// `(L_i0, L_i1)`.
    pub l: [[f64; 2]; ARMS],
    /// `(γ_i0, γ_i1)`.
    pub gamma: [[f64; 2]; ARMS],
    /// Common initial value of both timer functions.
    pub phi0: [f64; ARMS],
    pub varrho0: f64,
    pub rho_bar: [f64; ARMS],
}

impl TwoArmConstants {
    pub fn for_protocol(p: Protocol) -> Self {
        match p {
            Protocol::RoundRobin => TwoArmConstants {
                l: [[8.8860, 18.8501], [12.0, 25.4558]],
                gamma: [[22.9436, 48.6706], [30.9839, 65.7267]],
                phi0: [1.1023, 0.8816],
                varrho0: 0.05,
                rho_bar: [0.0501, 0.0371],
            },
            Protocol::TryOnceDiscard => TwoArmConstants {
                l: [[5.1303, 10.8831], [6.9282, 14.6969]],
                gamma: [[22.9436, 28.1], [30.9839, 37.9473]],
                phi0: [1.0468, 1.0468],
                varrho0: 0.05,
                rho_bar: [0.0501, 0.0371],
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct RobotArm {
    name: String,
    params: RobotArmParams,
    partitions: Vec<NodePartition>,
}

impl RobotArm {
    pub fn new(name: impl Into<String>, params: RobotArmParams) -> Result<Self> {
        params.validate()?;
        let p = NodePartition::new(NODE_DIMS.to_vec())?;
        Ok(RobotArm {
            name: name.into(),
            params,
            partitions: vec![p; ARMS],
        })
    }

    pub fn params(&self) -> &RobotArmParams {
        &self.params
    }

    /// `D_i = √3 max{1 + a_i, c_i}`.
    pub fn d_bound(&self, arm: usize) -> f64 {
        3f64.sqrt() * (1.0 + self.params.a[arm]).max(self.params.c[arm])
    }

    /// `(u_f, u̇_f)` at clock value `delta`.
    pub fn feedforward(&self, delta: f64) -> (f64, f64) {
        let (amp, w) = (
            self.params.feedforward_amplitude,
            self.params.feedforward_frequency,
        );
        (amp * (w * delta).sin(), amp * w * (w * delta).cos())
    }

    fn coupling(&self, arm: usize, v: impl Fn(usize, usize) -> f64) -> f64 {
        (0..ARMS)
            .map(|j| self.params.coupling[arm][j] * (v(0, j) - v(1, j)))
            .sum()
    }
}

impl super::SystemModel for RobotArm {
    fn name(&self) -> &str {
        &self.name
    }

    fn n_x(&self) -> usize {
        4 * ARMS
    }

    fn partitions(&self) -> &[NodePartition] {
        &self.partitions
    }

    fn initial_x(&self) -> Vec<f64> {
        let mut x = self.params.eta0.clone();
        x.extend_from_slice(&self.params.r0);
        x
    }

    fn flow(&self, delta: &[f64], x: &[f64], e: &[f64], dx: &mut [f64], de: &mut [f64]) {
        let eta = |arm: usize, k: usize| x[2 * arm + k];
        let r = |arm: usize, k: usize| x[4 + 2 * arm + k];
        for i in 0..ARMS {
            let (a, c) = (self.params.a[i], self.params.c[i]);
            let ei = &e[5 * i..5 * i + 5];
            let (ee1, er1, ee2, _er2, ec) = (ei[0], ei[1], ei[2], ei[3], ei[4]);
            let (n1, n2, r1, r2) = (eta(i, 0), eta(i, 1), r(i, 0), r(i, 1));

            let d_n1 = n2;
            let d_n2 = -a * ((n1 + r1).sin() - r1.sin() - (n1 + r1 + ee1 + er1).sin() + (r1 + er1).sin())
                - (n1 + ee1)
                - (n2 + ee2)
                + self.coupling(i, |arm, k| x[2 * arm + k])
                + c * ec;
            let d_r1 = r2;
            let d_r2 = -a * r1.sin()
                + self.coupling(i, |arm, k| x[4 + 2 * arm + k])
                + c * self.feedforward(delta[i]).0;

            dx[2 * i] = d_n1;
            dx[2 * i + 1] = d_n2;
            dx[4 + 2 * i] = d_r1;
            dx[4 + 2 * i + 1] = d_r2;

            // held values are constant between arrivals
            let dei = &mut de[5 * i..5 * i + 5];
            dei[0] = -d_n1;
            dei[1] = -d_r1;
            dei[2] = -d_n2;
            dei[3] = -d_r2;
            dei[4] = 0.0;
        }
    }

    fn output(&self, network: usize, _delta: &[f64], x: &[f64], e: &[f64]) -> Vec<f64> {
        let i = network;
        let (a, c) = (self.params.a[i], self.params.c[i]);
        let (n1, n2) = (x[2 * i], x[2 * i + 1]);
        let (r1, r2) = (x[4 + 2 * i], x[4 + 2 * i + 1]);
        let ei = &e[5 * i..5 * i + 5];
        let (h1, h2, hr1) = (n1 + ei[0], n2 + ei[2], r1 + ei[1]);
        let u_c = (a * ((h1 + hr1).sin() - hr1.sin()) - h1 - h2) / c;
        vec![n1, r1, n2, r2, u_c]
    }

    fn tracking_error<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..2 * ARMS]
    }

    fn network_tracking_norm(&self, network: usize, x: &[f64]) -> f64 {
        norm(&x[2 * network..2 * network + 2])
    }

    fn state_components(&self, _network: usize) -> Vec<usize> {
        vec![0, 2]
    }

    fn lyapunov(&self, x: &[f64]) -> f64 {
        V_COEFFS
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (a, b) = (x[2 * i], x[2 * i + 1]);
                p[0] * a * a + p[1] * a * b + p[2] * b * b
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SystemModel;

    fn arm() -> RobotArm {
        RobotArm::new("robot_arm_rr", RobotArmParams::default()).unwrap()
    }

    #[test]
    fn error_free_equilibrium() {
        let m = arm();
        let mut x = vec![0.0; 8];
        x[4..].copy_from_slice(&[0.5, 0.1, -0.3, 0.2]);
        let mut dx = vec![0.0; 8];
        let mut de = vec![0.0; 10];
        m.flow(&[0.3, 0.3], &x, &[0.0; 10], &mut dx, &mut de);
        assert_eq!(&dx[..4], &[0.0; 4]);
    }

    #[test]
    fn feedforward_at_zero() {
        let (u, du) = arm().feedforward(0.0);
        assert_eq!(u, 0.0);
        assert_eq!(du, 25.0);
    }

    #[test]
    fn d_bound_matches_reference_value() {
        let m = arm();
        assert!((m.d_bound(1) - 6.9282).abs() < 1e-4);
        assert!((m.d_bound(0) - 5.1303).abs() < 1e-4);
    }

    #[test]
    fn v_example() {
        assert_eq!(arm().lyapunov(&[1.0, 0.0, 0.0, 0.0, 9.0, 9.0, 9.0, 9.0]), 8.0);
    }

    #[test]
    fn v_lower_bound() {
        // smallest eigenvalues of the two 2x2 blocks
        let lmin = [7.0 - 37f64.sqrt(), 7.0 - 16.25f64.sqrt()];
        let m = arm();
        for k in 0..200 {
            let s = k as f64 * 0.37;
            let x = [
                s.sin(),
                (1.3 * s).cos(),
                (0.7 * s).sin(),
                (2.1 * s).cos(),
                0.0,
                0.0,
                0.0,
                0.0,
            ];
            let bound = lmin[0] * (x[0] * x[0] + x[1] * x[1]) + lmin[1] * (x[2] * x[2] + x[3] * x[3]);
            assert!(m.lyapunov(&x) >= bound - 1e-12);
        }
    }

    #[test]
    fn error_flow_is_negated_signal_flow() {
        let m = arm();
        let x = m.initial_x();
        let e = [0.01, -0.02, 0.03, 0.0, 0.05, 0.0, 0.01, -0.01, 0.02, 0.0];
        let mut dx = vec![0.0; 8];
        let mut de = vec![0.0; 10];
        m.flow(&[0.2, 0.2], &x, &e, &mut dx, &mut de);
        for i in 0..2 {
            assert_eq!(de[5 * i], -dx[2 * i]);
            assert_eq!(de[5 * i + 1], -dx[4 + 2 * i]);
            assert_eq!(de[5 * i + 2], -dx[2 * i + 1]);
            assert_eq!(de[5 * i + 3], -dx[4 + 2 * i + 1]);
            assert_eq!(de[5 * i + 4], 0.0);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = RobotArmParams {
            a: vec![0.0, 1.0],
            ..Default::default()
        };
        assert!(RobotArm::new("x", p).is_err());
        let p = RobotArmParams {
            c: vec![1.0],
            ..Default::default()
        };
        assert!(RobotArm::new("x", p).is_err());
    }

    #[test]
    fn output_layout() {
        let m = arm();
        let x = m.initial_x();
        let z = m.output(1, &[0.0, 0.0], &x, &[0.0; 10]);
        assert_eq!(&z[..4], &[-0.4, -0.3, 0.3, 0.0]);
        let expect = (m.params.a[1] * ((-0.7f64).sin() - (-0.3f64).sin()) + 0.4 - 0.3) / 4.0;
        assert!((z[4] - expect).abs() < 1e-15);
    }
}
