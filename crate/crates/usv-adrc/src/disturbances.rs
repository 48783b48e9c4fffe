//! Environmental force generators: uniform current, Pierson-Moskowitz wave
//! force synthesis, and constant wind.
//!
//! Waves are carried as a superposition of sinusoids sampled from the
//! one-parameter Pierson-Moskowitz spectrum
//!
//! ```text
//!   S(w) = A g^2 / w^5 * exp(-B (g / (sqrt(Hs) w))^4),
//!   A = 0.0081, B = 0.0324 g^-4 * g^4 ... (see below)
//! ```
//!
//! parameterized by the significant wave height of the Douglas sea state.
//! Forces are injected at force level (per-axis gains on the superposed
//! elevation signal), not via pressure integration.

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wrap_angle;

const GRAVITY: f64 = 9.81;
/// Phillips constant of the PM spectrum.
const PM_A: f64 = 0.0081;
/// Hs-form PM decay constant: S ~ exp(-B_HS g^4 / (Hs^2 w^4)) with
/// B_HS g^4 = 3.11, which makes 4 sqrt(m0) come out at Hs within 0.2%.
const PM_B_HS: f64 = 3.11;

/// Significant wave height (m) per Douglas sea state 0-4.
pub const SEA_STATE_HS: [f64; 5] = [0.0, 0.1, 0.5, 1.25, 2.5];

/// Environmental forcing snapshot handed to the simulator each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvForces {
    /// Uniform current velocity in the world frame (m/s).
    pub v_current: Vector2<f64>,
    /// Body-frame wave force/moment (N, N, N m).
    pub tau_wave: Vector3<f64>,
    /// Body-frame wind force/moment.
    pub tau_wind: Vector3<f64>,
}

impl EnvForces {
    pub fn calm() -> Self {
        Self {
            v_current: Vector2::zeros(),
            tau_wave: Vector3::zeros(),
            tau_wind: Vector3::zeros(),
        }
    }
}

/// One sinusoidal wave component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    /// Elevation amplitude (m).
    pub amplitude: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Phase offset (rad).
    pub phase: f64,
    /// Propagation direction in the world frame (rad).
    pub direction: f64,
}

/// A reproducible wave realization for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub sea_state: u8,
    pub components: Vec<WaveComponent>,
    pub seed: u64,
}

/// Per-axis force gains applied to the superposed wave elevation
/// (N/m, N/m, N m/m). Calibrated constants, not identified values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveGains {
    pub surge: f64,
    pub sway: f64,
    pub yaw: f64,
}

impl Default for WaveGains {
    fn default() -> Self {
        Self {
            surge: 60.0,
            sway: 80.0,
            yaw: 30.0,
        }
    }
}

/// Spectral density S(omega) of the PM spectrum for significant wave
/// height `hs`; zero for hs = 0.
pub fn pm_spectrum(omega: f64, hs: f64) -> f64 {
    if hs <= 0.0 || omega <= 0.0 {
        return 0.0;
    }
    let a = PM_A * GRAVITY * GRAVITY;
    let b = PM_B_HS / (hs * hs);
    a / omega.powi(5) * (-b / omega.powi(4)).exp()
}

/// Discretize the PM spectrum of the given sea state into `n_components`
/// equal-energy sinusoids with seeded random phases.
///
/// Frequencies are placed at the energy quantiles of the analytic spectrum
/// integral `m(w) = m0 exp(-B/w^4)`, so the component variance sum equals
/// the spectrum integral exactly and the significant-wave-height identity
/// `Hs ~ 4 sqrt(sum a_i^2 / 2)` is preserved.
pub fn sample_pm_spectrum(
    sea_state: u8,
    n_components: usize,
    seed: u64,
    direction: f64,
) -> Result<WaveField> {
    if sea_state as usize >= SEA_STATE_HS.len() {
        return Err(Error::Config(format!(
            "sea state must be 0-4, got {sea_state}"
        )));
    }
    if n_components == 0 {
        return Err(Error::Config("wave components must be >= 1".into()));
    }
    let hs = SEA_STATE_HS[sea_state as usize];
    if hs == 0.0 {
        return Ok(WaveField {
            sea_state,
            components: Vec::new(),
            seed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = PM_B_HS / (hs * hs);
    let m0 = PM_A * GRAVITY * GRAVITY / (4.0 * b);
    let amplitude = (2.0 * m0 / n_components as f64).sqrt();
    let components = (0..n_components)
        .map(|i| {
            let quantile = (i as f64 + 0.5) / n_components as f64;
            let omega = (b / -quantile.ln()).powf(0.25);
            WaveComponent {
                amplitude,
                omega,
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
                direction,
            }
        })
        .collect();
    Ok(WaveField {
        sea_state,
        components,
        seed,
    })
}

impl WaveField {
    /// Total elevation variance carried by the field.
    pub fn variance(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude * c.amplitude / 2.0)
            .sum()
    }

    /// Body-frame wave force at time `t` for vessel heading `psi`: the
    /// superposed elevation signal scaled by per-axis gains and projected
    /// through the encounter angle.
    pub fn force(&self, t: f64, psi: f64, gains: &WaveGains) -> Vector3<f64> {
        let mut tau = Vector3::zeros();
        for c in &self.components {
            let s = c.amplitude * (c.omega * t + c.phase).sin();
            let encounter = wrap_angle(c.direction - psi);
            tau.x += gains.surge * encounter.cos() * s;
            tau.y += gains.sway * encounter.sin() * s;
            tau.z += gains.yaw * encounter.sin() * s;
        }
        tau
    }
}

/// Quadratic-drag wind coefficients (N s^2/m^2 and N m s^2/m^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindCoeffs {
    pub surge: f64,
    pub sway: f64,
    pub yaw: f64,
}

impl Default for WindCoeffs {
    fn default() -> Self {
        Self {
            surge: 0.8,
            sway: 1.2,
            yaw: 0.5,
        }
    }
}

/// Body-frame wind force for wind blowing *toward* `wind_dir` at
/// `wind_speed`, quadratic in speed.
pub fn wind_force(wind_speed: f64, wind_dir: f64, psi: f64, coeffs: &WindCoeffs) -> Vector3<f64> {
    if wind_speed == 0.0 {
        return Vector3::zeros();
    }
    let rel = wrap_angle(wind_dir - psi);
    let q = wind_speed * wind_speed;
    Vector3::new(
        coeffs.surge * q * rel.cos(),
        coeffs.sway * q * rel.sin(),
        coeffs.yaw * q * rel.sin(),
    )
}
