//! 3-DOF planar manoeuvring simulator.
//!
//! Rigid-body dynamics in the body frame with current-relative hydrodynamic
//! coupling:
//!
//! ```text
//!   eta_dot = R(psi) nu
//!   M nu_dot + C(nu_r) nu_r + D(nu_r) nu_r = tau_thr + tau_wave + tau_wind
//!   nu_r = nu - R(psi)^T V_current
//! ```
//!
//! with pose `eta = [x, y, psi]`, body velocities `nu = [u, v, r]`, heading
//! measured counterclockwise from +x, and port side positive y. Actuation is
//! two stern thrusters mounted at an inward angle plus a bow thruster, each
//! behind a first-order lag with saturated commands. The integrator is
//! fixed-step RK4 over the coupled 9-dimensional state.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::control::ThrustCommand;
use crate::disturbances::EnvForces;
use crate::error::{Error, Result};
use crate::wrap_angle;

/// Planar pose and body-frame velocities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselState {
    pub x: f64,
    pub y: f64,
    /// Yaw, wrapped to (-pi, pi].
    pub psi: f64,
    /// Surge velocity (m/s).
    pub u: f64,
    /// Sway velocity (m/s, positive to port).
    pub v: f64,
    /// Yaw rate (rad/s).
    pub r: f64,
}

impl VesselState {
    pub fn at_rest(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi),
            u: 0.0,
            v: 0.0,
            r: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.psi.is_finite()
            && self.u.is_finite()
            && self.v.is_finite()
            && self.r.is_finite()
    }
}

/// Hull, actuator, and power-model parameters.
///
/// The default set models a synthetic 2.5 m / ~300 kg electric vessel. The
/// values are not identified from any real hull; they are chosen so the
/// closed-loop behaviour is representative (a 0.5 m/s beam current demands
/// more lateral force than the bow thruster can deliver).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselParams {
    /// Inertia plus added mass, symmetric positive definite (kg, kg, kg m^2).
    pub mass_matrix: Matrix3<f64>,
    /// Linear damping matrix.
    pub d_lin: Matrix3<f64>,
    /// Diagonal quadratic damping coefficients.
    pub d_quad: Vector3<f64>,
    /// Longitudinal distance from CG to the bow thruster (m).
    pub x_bt: f64,
    /// Lateral distance from CG to each stern thruster (m).
    pub y_st: f64,
    /// Inward mounting angle of the stern thrusters (rad).
    pub alpha_thr: f64,
    /// Stern thruster force limit (N, symmetric).
    pub f_stern_max: f64,
    /// Bow thruster force limit (N, symmetric).
    pub f_bow_max: f64,
    /// Stern thruster lag time constant (s).
    pub tau_stern: f64,
    /// Bow thruster lag time constant (s).
    pub tau_bow: f64,
    /// Thrust-to-power coefficient (W / N^1.5).
    pub k_power: f64,
    /// Bus voltage for the charge integral (V).
    pub bus_voltage: f64,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            mass_matrix: Matrix3::from_diagonal(&Vector3::new(330.0, 540.0, 250.0)),
            d_lin: Matrix3::from_diagonal(&Vector3::new(40.0, 120.0, 80.0)),
            d_quad: Vector3::new(60.0, 300.0, 120.0),
            x_bt: 1.0,
            y_st: 0.4,
            alpha_thr: 0.1,
            f_stern_max: 150.0,
            f_bow_max: 60.0,
            tau_stern: 0.5,
            tau_bow: 0.25,
            k_power: 1.0,
            bus_voltage: 48.0,
        }
    }
}

impl VesselParams {
    pub fn validate(&self) -> Result<()> {
        let m = &self.mass_matrix;
        if (m - m.transpose()).amax() > 1e-9 {
            return Err(Error::Config("mass matrix must be symmetric".into()));
        }
        if m.clone_owned().cholesky().is_none() {
            return Err(Error::Config("mass matrix must be positive definite".into()));
        }
        if self.f_stern_max <= 0.0 || self.f_bow_max <= 0.0 {
            return Err(Error::Config("thrust saturation limits must be > 0".into()));
        }
        if self.tau_stern <= 0.0 || self.tau_bow <= 0.0 {
            return Err(Error::Config("thruster time constants must be > 0".into()));
        }
        if self.alpha_thr.cos() <= 0.1 {
            return Err(Error::Config(
                "stern thrusters mounted too close to perpendicular (cos(alpha) <= 0.1)".into(),
            ));
        }
        if self.y_st <= 0.0 {
            return Err(Error::Config("stern thruster lateral offset must be > 0".into()));
        }
        if self.k_power < 0.0 || self.bus_voltage <= 0.0 {
            return Err(Error::Config("power model parameters invalid".into()));
        }
        Ok(())
    }

    pub fn inverse_mass(&self) -> Matrix3<f64> {
        self.mass_matrix
            .try_inverse()
            .expect("validated mass matrix is invertible")
    }

    /// Generalized thrust [surge force, sway force, yaw moment] delivered by
    /// the thruster triple (F_SL, F_SR, F_B).
    pub fn thrust_wrench(&self, f_sl: f64, f_sr: f64, f_b: f64) -> Vector3<f64> {
        let ca = self.alpha_thr.cos();
        Vector3::new(
            (f_sl + f_sr) * ca,
            f_b,
            (f_sl - f_sr) * self.y_st * ca - f_b * self.x_bt,
        )
    }

    fn limits(&self) -> [f64; 3] {
        [self.f_stern_max, self.f_stern_max, self.f_bow_max]
    }

    fn taus(&self) -> [f64; 3] {
        [self.tau_stern, self.tau_stern, self.tau_bow]
    }
}

/// Commanded and delivered thrust for the three propulsors, ordered
/// (stern left, stern right, bow).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThrusterBank {
    pub actual: [f64; 3],
    pub commanded: [f64; 3],
}

impl ThrusterBank {
    /// True per thruster when the last command exceeded its force limit.
    pub fn saturation_flags(&self, params: &VesselParams) -> [bool; 3] {
        let lim = params.limits();
        [
            self.commanded[0].abs() > lim[0],
            self.commanded[1].abs() > lim[1],
            self.commanded[2].abs() > lim[2],
        ]
    }
}

/// Battery draw integrated from per-thruster power P mapped through the bus voltage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyAccumulator {
    /// Consumed charge (Ah), nondecreasing.
    pub charge_used: f64,
    pub bus_voltage: f64,
    pub k_power: f64,
}

impl EnergyAccumulator {
    pub fn new(params: &VesselParams) -> Self {
        Self {
            charge_used: 0.0,
            bus_voltage: params.bus_voltage,
            k_power: params.k_power,
        }
    }

    pub fn add(&mut self, delta_ah: f64) {
        debug_assert!(delta_ah >= 0.0);
        self.charge_used += delta_ah;
    }
}

fn rotation(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rigid-body Coriolis matrix derived from the (symmetric) mass matrix.
fn coriolis(m: &Matrix3<f64>, nu: &Vector3<f64>) -> Matrix3<f64> {
    let c13 = -(m[(1, 0)] * nu.x + m[(1, 1)] * nu.y + m[(1, 2)] * nu.z);
    let c23 = m[(0, 0)] * nu.x + m[(0, 1)] * nu.y + m[(0, 2)] * nu.z;
    Matrix3::new(0.0, 0.0, c13, 0.0, 0.0, c23, -c13, -c23, 0.0)
}

/// Time derivative of pose and body velocity for the given delivered thrust
/// and environmental forcing.
pub fn vessel_derivative(
    state: &VesselState,
    thrust_actual: &[f64; 3],
    env: &EnvForces,
    params: &VesselParams,
    m_inv: &Matrix3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let nu = Vector3::new(state.u, state.v, state.r);
    let rot = rotation(state.psi);

    // current enters through the relative velocity only
    let vc_body = rot.transpose() * Vector3::new(env.v_current.x, env.v_current.y, 0.0);
    let nu_r = nu - vc_body;

    let tau = params.thrust_wrench(thrust_actual[0], thrust_actual[1], thrust_actual[2])
        + env.tau_wave
        + env.tau_wind;

    let damping = params.d_lin * nu_r
        + Vector3::new(
            params.d_quad.x * nu_r.x.abs() * nu_r.x,
            params.d_quad.y * nu_r.y.abs() * nu_r.y,
            params.d_quad.z * nu_r.z.abs() * nu_r.z,
        );
    let nu_dot = m_inv * (tau - coriolis(&params.mass_matrix, &nu_r) * nu_r - damping);
    let eta_dot = rot * nu;
    (eta_dot, nu_dot)
}

#[derive(Clone, Copy)]
struct FullState {
    eta: Vector3<f64>,
    nu: Vector3<f64>,
    thrust: [f64; 3],
}

fn full_derivative(
    s: &FullState,
    cmd_clamped: &[f64; 3],
    env: &EnvForces,
    params: &VesselParams,
    m_inv: &Matrix3<f64>,
) -> FullState {
    let state = VesselState {
        x: s.eta.x,
        y: s.eta.y,
        psi: s.eta.z,
        u: s.nu.x,
        v: s.nu.y,
        r: s.nu.z,
    };
    let (eta_dot, nu_dot) = vessel_derivative(&state, &s.thrust, env, params, m_inv);
    let taus = params.taus();
    let thrust_dot = [
        (cmd_clamped[0] - s.thrust[0]) / taus[0],
        (cmd_clamped[1] - s.thrust[1]) / taus[1],
        (cmd_clamped[2] - s.thrust[2]) / taus[2],
    ];
    FullState {
        eta: eta_dot,
        nu: nu_dot,
        thrust: thrust_dot,
    }
}

fn axpy(a: &FullState, k: f64, b: &FullState) -> FullState {
    FullState {
        eta: a.eta + k * b.eta,
        nu: a.nu + k * b.nu,
        thrust: [
            a.thrust[0] + k * b.thrust[0],
            a.thrust[1] + k * b.thrust[1],
            a.thrust[2] + k * b.thrust[2],
        ],
    }
}

/// Advance the vessel and its thrusters by one RK4 step of length `h`.
///
/// Commands are clamped to the configured force limits before the lag, so
/// delivered thrust can never exceed them. Returns the new state, the
/// thruster bank (delivered + commanded), and the charge consumed during
/// the step.
pub fn step(
    state: &VesselState,
    bank: &ThrusterBank,
    commands: &ThrustCommand,
    env: &EnvForces,
    params: &VesselParams,
    m_inv: &Matrix3<f64>,
    h: f64,
) -> Result<(VesselState, ThrusterBank, f64)> {
    debug_assert!(h > 0.0);
    let lim = params.limits();
    let cmd = [commands.f_sl, commands.f_sr, commands.f_b];
    let cmd_clamped = [
        cmd[0].clamp(-lim[0], lim[0]),
        cmd[1].clamp(-lim[1], lim[1]),
        cmd[2].clamp(-lim[2], lim[2]),
    ];

    let s0 = FullState {
        eta: Vector3::new(state.x, state.y, state.psi),
        nu: Vector3::new(state.u, state.v, state.r),
        thrust: bank.actual,
    };
    let k1 = full_derivative(&s0, &cmd_clamped, env, params, m_inv);
    let k2 = full_derivative(&axpy(&s0, 0.5 * h, &k1), &cmd_clamped, env, params, m_inv);
    let k3 = full_derivative(&axpy(&s0, 0.5 * h, &k2), &cmd_clamped, env, params, m_inv);
    let k4 = full_derivative(&axpy(&s0, h, &k3), &cmd_clamped, env, params, m_inv);

    let mut next = s0;
    next = axpy(&next, h / 6.0, &k1);
    next = axpy(&next, h / 3.0, &k2);
    next = axpy(&next, h / 3.0, &k3);
    next = axpy(&next, h / 6.0, &k4);

    // rectangle-rule charge integral on the delivered thrust
    let power: f64 = bank
        .actual
        .iter()
        .map(|f| params.k_power * f.abs().powf(1.5))
        .sum();
    let delta_ah = power / (params.bus_voltage * 3600.0) * h;

    let new_state = VesselState {
        x: next.eta.x,
        y: next.eta.y,
        psi: wrap_angle(next.eta.z),
        u: next.nu.x,
        v: next.nu.y,
        r: next.nu.z,
    };
    if !new_state.is_finite() {
        return Err(Error::NonFiniteState {
            t: 0.0,
            step: 0,
            what: format!("vessel state {new_state:?}"),
        });
    }
    Ok((
        new_state,
        ThrusterBank {
            actual: next.thrust,
            commanded: cmd,
        },
        delta_ah,
    ))
}

/// One sample of a canned manoeuvre run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ManoeuvreSample {
    pub t: f64,
    pub state: VesselState,
    pub thrust: [f64; 3],
}

/// Time series from a canned open-loop manoeuvre.
#[derive(Debug, Clone)]
pub struct ManoeuvreTrace {
    pub samples: Vec<ManoeuvreSample>,
    pub h: f64,
}

fn run_open_loop(
    params: &VesselParams,
    h: f64,
    duration: f64,
    command_at: impl Fn(f64) -> ThrustCommand,
) -> Result<ManoeuvreTrace> {
    params.validate()?;
    let m_inv = params.inverse_mass();
    let env = EnvForces::calm();
    let mut state = VesselState::at_rest(0.0, 0.0, 0.0);
    let mut bank = ThrusterBank::default();
    let steps = (duration / h).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(ManoeuvreSample {
        t: 0.0,
        state,
        thrust: bank.actual,
    });
    for k in 0..steps {
        let t = k as f64 * h;
        let cmd = command_at(t);
        let (next, next_bank, _) = step(&state, &bank, &cmd, &env, params, &m_inv, h)?;
        state = next;
        bank = next_bank;
        samples.push(ManoeuvreSample {
            t: (k + 1) as f64 * h,
            state,
            thrust: bank.actual,
        });
    }
    Ok(ManoeuvreTrace { samples, h })
}

/// Zig-zag verification manoeuvre: constant base thrust with the
/// differential sign flipped every `ZIGZAG_PHASE` seconds.
pub const ZIGZAG_PHASE: f64 = 5.0;
pub const ZIGZAG_DURATION: f64 = 60.0;

pub fn zigzag_check(params: &VesselParams, h: f64) -> Result<ManoeuvreTrace> {
    run_open_loop(params, h, ZIGZAG_DURATION, |t| {
        let phase = (t / ZIGZAG_PHASE).floor() as i64;
        let diff = if phase % 2 == 0 { 40.0 } else { -40.0 };
        ThrustCommand {
            f_sl: 120.0 + diff,
            f_sr: 120.0 - diff,
            f_b: 0.0,
        }
    })
}

/// In-place spin manoeuvre: opposed stern thrust (pure couple).
pub const SPIN_DURATION: f64 = 30.0;

pub fn spin_check(params: &VesselParams, h: f64) -> Result<ManoeuvreTrace> {
    run_open_loop(params, h, SPIN_DURATION, |_| ThrustCommand {
        f_sl: 80.0,
        f_sr: -80.0,
        f_b: 0.0,
    })
}
