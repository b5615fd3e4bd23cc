//! Quasi-static tunneling ionization rate.
//!
//! The instantaneous rate sets the strength of each temporal slit. The
//! hydrogenic quasi-static form is used,
//!
//! ```text
//! R(F) = C^2 * (2 kappa^3 / |F|)^(2/kappa - 1) * exp(-2 kappa^3 / (3 |F|)),
//! kappa = sqrt(2 Ip),
//! ```
//!
//! even in the field sign and zero at zero field. Only relative slit weights
//! matter for the fringe observables, so the prefactor `C^2` defaults to 1.

use thiserror::Error;

use crate::pulse::Pulse;

#[derive(Debug, Error, PartialEq)]
pub enum IonizationError {
    #[error("rate profile needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// Target atom: ionization potential and rate prefactor, both in a.u.
#[derive(Debug, Clone, Copy)]
pub struct Atom {
    /// Ionization potential (a.u.).
    pub ip: f64,
    /// Squared rate prefactor `C^2`.
    pub prefactor: f64,
}

impl Atom {
    pub fn new(ip: f64) -> Self {
        assert!(ip > 0.0, "ionization potential must be positive");
        Self { ip, prefactor: 1.0 }
    }

    /// Argon, Ip = 15.76 eV = 0.5792 a.u.
    pub fn argon() -> Self {
        Self::new(0.5792)
    }

    /// `kappa = sqrt(2 Ip)`.
    pub fn kappa(&self) -> f64 {
        (2.0 * self.ip).sqrt()
    }
}

/// Quasi-static field-ionization rate; `rate(0) = 0` by continuity.
pub fn rate(field: f64, atom: &Atom) -> f64 {
    let f = field.abs();
    if f == 0.0 {
        return 0.0;
    }
    let kappa = atom.kappa();
    let k3 = kappa * kappa * kappa;
    atom.prefactor * (2.0 * k3 / f).powf(2.0 / kappa - 1.0) * (-2.0 * k3 / (3.0 * f)).exp()
}

/// Uniform time samples of `rate(E(t))` over the pulse support.
#[derive(Debug, Clone)]
pub struct RateProfile {
    pub times: Vec<f64>,
    pub rates: Vec<f64>,
}

pub fn rate_profile(
    pulse: &Pulse,
    atom: &Atom,
    n_samples: usize,
) -> Result<RateProfile, IonizationError> {
    if n_samples < 2 {
        return Err(IonizationError::TooFewSamples(n_samples));
    }
    let total = pulse.total_duration();
    let (times, rates) = (0..n_samples)
        .map(|i| {
            let t = total * i as f64 / (n_samples - 1) as f64;
            (t, rate(pulse.electric_field(t), atom))
        })
        .unzip();
    Ok(RateProfile { times, rates })
}
