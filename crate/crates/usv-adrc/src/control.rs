//! Trajectory controller: three parallel channels (heading, surge, lateral
//! offset) in either ADRC or PID mode, a heading-projected lateral force,
//! the control mixer for the stern pair + bow thruster layout, and a
//! thruster delay compensator built on tracking differentiators.
//!
//! Both controller modes share the guidance interface, mixer, delay
//! compensator, and output limits; only the per-channel control law differs.

use serde::{Deserialize, Serialize};

use crate::adrc::{AdrcChannel, AdrcConfig, ChannelTelemetry, TdState};
use crate::error::{Error, Result};
use crate::guidance::GuidanceOutput;
use crate::vessel::{VesselParams, VesselState};
use crate::wrap_angle;

/// Generalized force demand produced by the three channels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlDemand {
    /// Surge force (N).
    pub f_x: f64,
    /// Sway force (N).
    pub f_y: f64,
    /// Yaw moment (N m).
    pub m_z: f64,
}

/// Per-thruster force command (stern left, stern right, bow).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThrustCommand {
    pub f_sl: f64,
    pub f_sr: f64,
    pub f_b: f64,
}

/// Map a generalized demand to thruster forces.
///
/// The bow thruster takes the whole sway demand; the stern pair splits the
/// surge demand plus the differential needed for the yaw moment, corrected
/// for the moment the bow thruster itself induces:
///
/// ```text
///   F_SL = (F_x + (M_z + F_y x_BT) / y_ST) / (2 cos alpha)
///   F_SR = (F_x - (M_z + F_y x_BT) / y_ST) / (2 cos alpha)
///   F_B  = F_y
/// ```
pub fn mix(demand: &ControlDemand, params: &VesselParams) -> Result<ThrustCommand> {
    let ca = params.alpha_thr.cos();
    if ca <= 0.1 {
        return Err(Error::Config(
            "mixer requires cos(alpha_thr) > 0.1".into(),
        ));
    }
    if params.y_st <= 0.0 {
        return Err(Error::Config("mixer requires y_ST > 0".into()));
    }
    let differential = (demand.m_z + demand.f_y * params.x_bt) / params.y_st;
    Ok(ThrustCommand {
        f_sl: (demand.f_x + differential) / (2.0 * ca),
        f_sr: (demand.f_x - differential) / (2.0 * ca),
        f_b: demand.f_y,
    })
}

/// First-order-lag inversion on the thrust commands: each component is
/// boosted by its lag constant times a TD-estimated derivative,
/// `gamma_bar = gamma + tau * d(gamma)/dt`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DelayCompensator {
    pub tau: [f64; 3],
    diffs: [TdState; 3],
    /// Differentiator parameters: large r0 so the TD transient adapts within
    /// a step and v2 acts as a filtered derivative.
    r0: f64,
    h: f64,
    primed: bool,
}

impl DelayCompensator {
    pub fn new(tau: [f64; 3], h: f64) -> Result<Self> {
        if tau.iter().any(|t| *t <= 0.0) {
            return Err(Error::Config("delay compensator taus must be > 0".into()));
        }
        if h <= 0.0 {
            return Err(Error::Config("delay compensator h must be > 0".into()));
        }
        Ok(Self {
            tau,
            diffs: [TdState::default(); 3],
            r0: 1e6,
            h,
            primed: false,
        })
    }

    pub fn compensate(&mut self, gamma: &ThrustCommand) -> Result<ThrustCommand> {
        let inputs = [gamma.f_sl, gamma.f_sr, gamma.f_b];
        if !self.primed {
            for (td, value) in self.diffs.iter_mut().zip(inputs) {
                td.v1 = value;
                td.v2 = 0.0;
            }
            self.primed = true;
        }
        let mut out = [0.0; 3];
        for i in 0..3 {
            let td = &mut self.diffs[i];
            let u = crate::adrc::fhan(td.v1 - inputs[i], td.v2, self.r0, self.h)?;
            td.v1 += self.h * td.v2;
            td.v2 += self.h * u;
            out[i] = inputs[i] + self.tau[i] * td.v2;
        }
        Ok(ThrustCommand {
            f_sl: out[0],
            f_sr: out[1],
            f_b: out[2],
        })
    }
}

/// Parallel PID gains for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Clamp on the integral term's contribution.
    pub i_limit: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        if self.i_limit < 0.0 {
            return Err(Error::Config("PID integrator limit must be >= 0".into()));
        }
        if self.u_min >= self.u_max {
            return Err(Error::Config("PID requires u_min < u_max".into()));
        }
        Ok(())
    }
}

/// PID channel state.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    last_measurement: f64,
    primed: bool,
}

/// One PID update with derivative-on-measurement and conditional
/// integration anti-windup: the integrator freezes while the output is
/// saturated in the direction the error keeps pushing.
pub fn pid_step(
    state: &mut PidState,
    setpoint: f64,
    measurement: f64,
    gains: &PidGains,
    h: f64,
) -> (f64, bool) {
    let error = setpoint - measurement;
    let derivative = if state.primed {
        -(measurement - state.last_measurement) / h
    } else {
        0.0
    };
    state.last_measurement = measurement;
    state.primed = true;

    let raw = gains.kp * error + state.integral + gains.kd * derivative;
    let u = raw.clamp(gains.u_min, gains.u_max);
    let saturated = raw != u;
    let pushing_deeper = saturated && (raw - u) * error > 0.0;
    if !pushing_deeper {
        state.integral =
            (state.integral + gains.ki * error * h).clamp(-gains.i_limit, gains.i_limit);
    }
    (u, saturated)
}

/// Which control law drives the three channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerMode {
    Adrc,
    Pid,
}

impl std::fmt::Display for ControllerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ControllerMode::Adrc => write!(f, "adrc"),
            ControllerMode::Pid => write!(f, "pid"),
        }
    }
}

#[derive(Debug, Clone)]
enum Channel {
    Adrc(AdrcChannel),
    Pid {
        gains: PidGains,
        state: PidState,
        h: f64,
    },
}

impl Channel {
    fn prime(&mut self, measurement: f64) {
        match self {
            Channel::Adrc(ch) => ch.prime(measurement),
            Channel::Pid { state, .. } => {
                state.last_measurement = measurement;
                state.primed = true;
            }
        }
    }

    fn step(&mut self, setpoint: f64, measurement: f64) -> Result<(f64, ChannelTelemetry)> {
        match self {
            Channel::Adrc(ch) => ch.step(setpoint, measurement),
            Channel::Pid { gains, state, h } => {
                let (u, saturated) = pid_step(state, setpoint, measurement, gains, *h);
                Ok((
                    u,
                    ChannelTelemetry {
                        v1: setpoint,
                        v2: 0.0,
                        z1: measurement,
                        z2: 0.0,
                        z3: 0.0,
                        e: measurement - setpoint,
                        u,
                        saturated,
                    },
                ))
            }
        }
    }
}

/// Per-channel gain bundle for one controller mode.
#[derive(Debug, Clone)]
pub struct ChannelSet<T> {
    pub heading: T,
    pub surge: T,
    pub lateral: T,
}

/// Everything the trajectory controller needs besides the vessel state.
#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub mode: ControllerMode,
    pub adrc: ChannelSet<AdrcConfig>,
    pub pid: ChannelSet<PidGains>,
    /// Delay compensator time constants (stern, stern, bow).
    pub comp_tau: [f64; 3],
    /// Control sample time (s).
    pub h: f64,
    /// Lateral force is zeroed when |psi - psi_traj| exceeds this (rad).
    pub misalign_cutoff: f64,
}

/// Control-tick telemetry shared by both modes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlTelemetry {
    pub heading: ChannelTelemetry,
    pub surge: ChannelTelemetry,
    pub lateral: ChannelTelemetry,
    pub demand: ControlDemand,
    /// Raw mixed thruster command before delay compensation.
    pub mixed: ThrustCommand,
    /// Compensated command sent to the plant (pre-clamping).
    pub compensated: ThrustCommand,
}

/// Three-channel trajectory controller with mixer and delay compensation.
#[derive(Debug, Clone)]
pub struct TrajectoryController {
    pub mode: ControllerMode,
    heading: Channel,
    surge: Channel,
    lateral: Channel,
    comp: DelayCompensator,
    misalign_cutoff: f64,
    mixer_params: VesselParams,
    /// Continuity-unwrapped heading measurement.
    psi_cont: f64,
    last_psi_wrapped: f64,
    primed: bool,
}

impl TrajectoryController {
    pub fn new(cfg: &ControllerConfig, vessel: &VesselParams) -> Result<Self> {
        vessel.validate()?;
        let make = |adrc: &AdrcConfig, pid: &PidGains, name: &str| -> Result<Channel> {
            Ok(match cfg.mode {
                ControllerMode::Adrc => Channel::Adrc(AdrcChannel::new(name, *adrc)?),
                ControllerMode::Pid => {
                    pid.validate()?;
                    Channel::Pid {
                        gains: *pid,
                        state: PidState::default(),
                        h: cfg.h,
                    }
                }
            })
        };
        Ok(Self {
            mode: cfg.mode,
            heading: make(&cfg.adrc.heading, &cfg.pid.heading, "heading")?,
            surge: make(&cfg.adrc.surge, &cfg.pid.surge, "surge")?,
            lateral: make(&cfg.adrc.lateral, &cfg.pid.lateral, "lateral")?,
            comp: DelayCompensator::new(cfg.comp_tau, cfg.h)?,
            misalign_cutoff: cfg.misalign_cutoff,
            mixer_params: vessel.clone(),
            psi_cont: 0.0,
            last_psi_wrapped: 0.0,
            primed: false,
        })
    }

    /// One control tick. The heading channel runs on a continuity-unwrapped
    /// heading with the setpoint mapped into the same winding, so the error
    /// entering the channel is always the wrapped difference. The lateral
    /// channel's output is projected by cos(psi - psi_traj) and zeroed
    /// beyond the misalignment cutoff.
    pub fn control_step(
        &mut self,
        guidance: &GuidanceOutput,
        state: &VesselState,
    ) -> Result<(ThrustCommand, ControlTelemetry)> {
        if !self.primed {
            self.psi_cont = state.psi;
            self.last_psi_wrapped = state.psi;
            self.heading.prime(state.psi);
            self.surge.prime(state.u);
            self.lateral.prime(guidance.y_err);
            self.primed = true;
        } else {
            self.psi_cont += wrap_angle(state.psi - self.last_psi_wrapped);
            self.last_psi_wrapped = state.psi;
        }
        let psi_sp_cont = self.psi_cont + wrap_angle(guidance.psi_sp - self.psi_cont);

        let (m_z, tel_heading) = self.heading.step(psi_sp_cont, self.psi_cont)?;
        let (f_x, tel_surge) = self.surge.step(guidance.u_sp, state.u)?;
        let (f_y_raw, tel_lateral) = self.lateral.step(0.0, guidance.y_err)?;

        let misalign = wrap_angle(state.psi - guidance.psi_traj);
        let f_y = if misalign.abs() > self.misalign_cutoff {
            0.0
        } else {
            f_y_raw * misalign.cos()
        };

        let demand = ControlDemand { f_x, f_y, m_z };
        let mixed = mix(&demand, &self.mixer_params)?;
        let compensated = self.comp.compensate(&mixed)?;
        Ok((
            compensated,
            ControlTelemetry {
                heading: tel_heading,
                surge: tel_surge,
                lateral: tel_lateral,
                demand,
                mixed,
                compensated,
            },
        ))
    }
}
