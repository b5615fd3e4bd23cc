//! Few-cycle laser pulse in atomic units.
//!
//! The pulse is defined through its vector potential
//!
//! ```text
//! A(t) = -a0 * sin^2(pi t / T) * sin(omega (t - T/2) + cep),   t in [0, T],
//! ```
//!
//! with `T = 2 pi n_cycles / omega`, and `A = 0` outside. The electric field
//! is the exact derivative `E = -dA/dt`, so the field integral vanishes and
//! the momentum bookkeeping `p = -A(t0)` is clean. With this sign choice the
//! field at the envelope peak is `E(T/2) = a0 omega cos(cep)`:
//!
//! * `cep = 0`      -> cosine-like field (extremum at the envelope peak),
//! * `cep = -pi/2`  -> sine-like field, `A` peaks positive at the center,
//! * `cep = +pi/2`  -> (-sine)-like field, `A` peaks negative at the center,
//! * `cep -> cep + pi` flips the sign of both `A` and `E` everywhere.
//!
//! The carrier phase is stored internally as `(phi0 in [0, pi), sign)`, so a
//! CEP shift by pi negates the field bit-exactly.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::constants;

#[derive(Debug, Error, PartialEq)]
pub enum PulseError {
    #[error("invalid pulse parameter: {0}")]
    InvalidParameter(String),
}

/// Envelope shape of the vector potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Envelope {
    #[default]
    Sin2,
}

/// Few-cycle pulse, fully determined by peak vector potential `a0`, carrier
/// frequency `omega`, carrier-envelope phase `cep` and duration in cycles.
#[derive(Debug, Clone, Copy)]
pub struct Pulse {
    a0: f64,
    omega: f64,
    cep: f64,
    n_cycles: f64,
    envelope: Envelope,
    // carrier phase reduced to [0, pi) plus an overall sign, so that
    // cep and cep + pi produce exactly negated fields
    phi0: f64,
    sign: f64,
}

impl Pulse {
    pub fn new(a0: f64, omega: f64, cep: f64, n_cycles: f64) -> Result<Self, PulseError> {
        if !(a0 >= 0.0) {
            return Err(PulseError::InvalidParameter(format!("a0 = {a0}")));
        }
        if !(omega > 0.0) {
            return Err(PulseError::InvalidParameter(format!("omega = {omega}")));
        }
        if !(n_cycles > 0.0) {
            return Err(PulseError::InvalidParameter(format!(
                "n_cycles = {n_cycles}"
            )));
        }
        let reduced = cep.rem_euclid(2.0 * PI);
        let (phi0, sign) = if reduced < PI {
            (reduced, 1.0)
        } else {
            (reduced - PI, -1.0)
        };
        Ok(Self {
            a0,
            omega,
            cep,
            n_cycles,
            envelope: Envelope::Sin2,
            phi0,
            sign,
        })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn cep(&self) -> f64 {
        self.cep
    }

    pub fn n_cycles(&self) -> f64 {
        self.n_cycles
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    /// Same pulse with a different carrier-envelope phase.
    pub fn with_cep(&self, cep: f64) -> Self {
        Self::new(self.a0, self.omega, cep, self.n_cycles).expect("parameters already validated")
    }

    /// Total duration `T = 2 pi n_cycles / omega`.
    pub fn total_duration(&self) -> f64 {
        2.0 * PI * self.n_cycles / self.omega
    }

    /// One optical cycle `2 pi / omega`.
    pub fn optical_period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Time of the envelope maximum, `T/2`.
    pub fn envelope_peak_time(&self) -> f64 {
        self.total_duration() / 2.0
    }

    /// Peak electric field `a0 * omega`.
    pub fn peak_field(&self) -> f64 {
        self.a0 * self.omega
    }

    /// Ponderomotive energy `Up = a0^2 / 4 = E0^2 / (4 omega^2)`.
    pub fn ponderomotive_energy(&self) -> f64 {
        self.a0 * self.a0 / 4.0
    }

    /// Vector potential `A(t)`; identically zero outside `[0, T]`.
    pub fn vector_potential(&self, t: f64) -> f64 {
        let total = self.total_duration();
        if t <= 0.0 || t >= total {
            return 0.0;
        }
        let env = (PI * t / total).sin().powi(2);
        let carrier = (self.omega * (t - total / 2.0) + self.phi0).sin();
        self.sign * (-self.a0) * env * carrier
    }

    /// Electric field `E(t) = -dA/dt`, evaluated analytically.
    pub fn electric_field(&self, t: f64) -> f64 {
        let total = self.total_duration();
        if t <= 0.0 || t >= total {
            return 0.0;
        }
        let phase = self.omega * (t - total / 2.0) + self.phi0;
        let env = (PI * t / total).sin().powi(2);
        let env_deriv = (PI / total) * (2.0 * PI * t / total).sin();
        self.sign * self.a0 * (env_deriv * phase.sin() + self.omega * env * phase.cos())
    }

    /// Analytic continuation of `A` to complex time. The sin^2-envelope
    /// carrier product is entire; no support window is applied.
    pub fn vector_potential_complex(&self, t: Complex64) -> Complex64 {
        let total = self.total_duration();
        let env = (Complex64::new(PI / total, 0.0) * t).sin().powu(2);
        let carrier = (self.omega * (t - total / 2.0) + self.phi0).sin();
        self.sign * (-self.a0) * env * carrier
    }

    /// `dA/dt` at complex time (same closed form as `-electric_field`).
    pub fn vector_potential_derivative_complex(&self, t: Complex64) -> Complex64 {
        let total = self.total_duration();
        let phase = self.omega * (t - total / 2.0) + self.phi0;
        let env = (Complex64::new(PI / total, 0.0) * t).sin().powu(2);
        let env_deriv = (PI / total) * (Complex64::new(2.0 * PI / total, 0.0) * t).sin();
        self.sign * (-self.a0) * (env_deriv * phase.sin() + self.omega * env * phase.cos())
    }

    /// Local extrema of `A(t)` inside the support, as `(time, value)` pairs
    /// in ascending time order, with the endpoints `(0, 0)` and `(T, 0)`
    /// included. Extrema are roots of `E(t)`, bracketed on a dense grid and
    /// refined by bisection.
    pub fn vector_potential_extrema(&self) -> Vec<(f64, f64)> {
        let total = self.total_duration();
        let n = (512.0 * self.n_cycles).ceil() as usize + 1;
        let step = total / n as f64;
        let mut extrema = vec![(0.0, 0.0)];
        let mut t_prev = 0.0f64;
        // E(0) = 0 exactly; start the sign scan just inside
        let mut f_prev = self.electric_field(step * 1e-3);
        for i in 1..=n {
            let t = if i == n { total } else { i as f64 * step };
            let f = if i == n {
                self.electric_field(total - step * 1e-3)
            } else {
                self.electric_field(t)
            };
            if f_prev != 0.0 && f != 0.0 && f_prev.signum() != f.signum() {
                let root = bisect(|x| self.electric_field(x), t_prev.max(step * 1e-3), t);
                extrema.push((root, self.vector_potential(root)));
            }
            t_prev = t;
            f_prev = f;
        }
        extrema.push((total, 0.0));
        extrema
    }

    /// Maximum of `|A(t)|` over the pulse.
    pub fn max_abs_vector_potential(&self) -> f64 {
        self.vector_potential_extrema()
            .iter()
            .map(|&(_, a)| a.abs())
            .fold(0.0, f64::max)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo.signum() == f_mid.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Laboratory-frame pulse parameters.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentalParams {
    pub wavelength_nm: f64,
    pub intensity_w_cm2: f64,
    pub n_cycles: f64,
    pub cep: f64,
}

impl ExperimentalParams {
    /// Convert to atomic units: `omega = 2 pi c / lambda`,
    /// `E0 = sqrt(I / I_atomic)`, `a0 = E0 / omega`.
    pub fn build(&self) -> Result<Pulse, PulseError> {
        if !(self.wavelength_nm > 0.0) {
            return Err(PulseError::InvalidParameter(format!(
                "wavelength_nm = {}",
                self.wavelength_nm
            )));
        }
        if !(self.intensity_w_cm2 > 0.0) {
            return Err(PulseError::InvalidParameter(format!(
                "intensity_w_cm2 = {}",
                self.intensity_w_cm2
            )));
        }
        if !(self.n_cycles > 0.0) {
            return Err(PulseError::InvalidParameter(format!(
                "n_cycles = {}",
                self.n_cycles
            )));
        }
        let omega = constants::omega_from_wavelength_nm(self.wavelength_nm);
        let e0 = constants::field_from_intensity(self.intensity_w_cm2);
        Pulse::new(e0 / omega, omega, self.cep, self.n_cycles)
    }
}

/// The experiment's reference conditions: 850 nm, 1e14 W/cm^2, 6.5 cycles.
pub fn reference_params(cep: f64) -> ExperimentalParams {
    ExperimentalParams {
        wavelength_nm: 850.0,
        intensity_w_cm2: 1e14,
        n_cycles: 6.5,
        cep,
    }
}
