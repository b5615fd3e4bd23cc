//! Simple-man double-slit model.
//!
//! An electron released at `t0` with zero velocity reaches the detector with
//! drift momentum `p = -A(t0)` (atomic units, electron charge -1). The
//! release times for a given `p` are therefore the intersections of the
//! vector potential with the horizontal line at `-p`; each carries an
//! amplitude `sqrt(R(E(t0)))` and a phase given by the action accumulated
//! from `t0` to the end of the pulse. The coherent sum of these few
//! amplitudes already reproduces the fringe pattern and its
//! carrier-envelope-phase dependence.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::ionization::{self, Atom};
use crate::pulse::Pulse;
use crate::quad;
use crate::spectrum::{self, DirectionalSpectrum, Model, SpectrumError, SpectrumMeta};

#[derive(Debug, Error, PartialEq)]
pub enum SemiclassicalError {
    #[error("release time {t0} outside pulse support [0, {total}]")]
    ReleaseTimeOutsideSupport { t0: f64, total: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// One temporal slit: release time, amplitude weight, action phase and the
/// local slope of the vector potential.
#[derive(Debug, Clone, Copy)]
pub struct SlitSolution {
    /// Release time (a.u.).
    pub t0: f64,
    /// Amplitude weight `sqrt(R(E(t0)))`.
    pub weight: f64,
    /// Action `S(p, t0)` (radians).
    pub action: f64,
    /// `dA/dt` at `t0` (a.u.).
    pub slope: f64,
}

/// Release-time finder for one pulse. The extrema of `A` partition the
/// support into monotone intervals, so every crossing of the target level is
/// bracketed structurally and refined by bisection; no root pair can be
/// missed at resolvable momenta.
pub struct SlitFinder {
    pulse: Pulse,
    extrema: Vec<(f64, f64)>,
}

impl SlitFinder {
    pub fn new(pulse: &Pulse) -> Self {
        Self {
            pulse: *pulse,
            extrema: pulse.vector_potential_extrema(),
        }
    }

    pub fn max_abs_vector_potential(&self) -> f64 {
        self.extrema.iter().map(|&(_, a)| a.abs()).fold(0.0, f64::max)
    }

    /// Values of A at its interior extrema (and the zero endpoints).
    pub fn extrema_values(&self) -> Vec<f64> {
        self.extrema.iter().map(|&(_, a)| a).collect()
    }

    /// All real solutions of `p + A(t0) = 0` in the pulse support, ascending.
    /// Empty if `|p|` exceeds the classical maximum of `|A|`.
    pub fn find(&self, p: f64) -> Vec<f64> {
        let target = -p;
        let mut roots = Vec::new();
        for w in self.extrema.windows(2) {
            let (t1, a1) = w[0];
            let (t2, a2) = w[1];
            if (a1 - target) * (a2 - target) < 0.0 {
                roots.push(self.bisect_level(t1, t2, target));
            }
        }
        roots
    }

    fn bisect_level(&self, mut lo: f64, mut hi: f64, target: f64) -> f64 {
        let f = |t: f64| self.pulse.vector_potential(t) - target;
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
            if (f_lo > 0.0) == (f_mid > 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Release times for momentum `p`; convenience wrapper building a fresh
/// [`SlitFinder`].
pub fn find_slits(pulse: &Pulse, p: f64) -> Vec<f64> {
    SlitFinder::new(pulse).find(p)
}

/// Action accumulated from `t0` to the end of the pulse,
/// `S = int_{t0}^{T} [ (p + A(t))^2 / 2 + Ip ] dt`.
///
/// The constant post-pulse contribution `(p^2/2 + Ip)(T' - T)` is omitted
/// identically for all slits; only action differences are observable.
pub fn action(pulse: &Pulse, atom: &Atom, p: f64, t0: f64) -> Result<f64, SemiclassicalError> {
    let total = pulse.total_duration();
    if !(0.0..=total).contains(&t0) {
        return Err(SemiclassicalError::ReleaseTimeOutsideSupport { t0, total });
    }
    Ok(action_unchecked(pulse, atom, p, t0))
}

fn action_unchecked(pulse: &Pulse, atom: &Atom, p: f64, t0: f64) -> f64 {
    let total = pulse.total_duration();
    let span = total - t0;
    if span == 0.0 {
        return 0.0;
    }
    // S = (p^2/2 + Ip)(T - t0) + p * int A + int A^2 / 2
    let panels = ((span / pulse.optical_period()) * 6.0).ceil().max(1.0) as usize;
    let int_a = quad::integrate(|t| pulse.vector_potential(t), t0, total, panels);
    let int_a2 = quad::integrate(
        |t| {
            let a = pulse.vector_potential(t);
            a * a
        },
        t0,
        total,
        panels,
    );
    (0.5 * p * p + atom.ip) * span + p * int_a + 0.5 * int_a2
}

/// Coherent two-or-more-beam sum `sum_j w_j exp(i phase_j)`.
pub(crate) fn coherent_sum(terms: &[(f64, f64)]) -> Complex64 {
    terms
        .iter()
        .map(|&(w, phase)| w * Complex64::new(0.0, phase).exp())
        .sum()
}

/// Transition amplitude `M(p)`: coherent sum over all slits, weighted by the
/// square root of the ionization rate at release. Zero for classically
/// forbidden momenta.
pub fn amplitude(pulse: &Pulse, atom: &Atom, p: f64) -> Complex64 {
    amplitude_with(&SlitFinder::new(pulse), atom, p)
}

fn amplitude_with(finder: &SlitFinder, atom: &Atom, p: f64) -> Complex64 {
    let pulse = &finder.pulse;
    let terms: Vec<(f64, f64)> = finder
        .find(p)
        .into_iter()
        .map(|t0| {
            let w = ionization::rate(pulse.electric_field(t0), atom).sqrt();
            (w, action_unchecked(pulse, atom, p, t0))
        })
        .collect();
    coherent_sum(&terms)
}

/// Full slit list for one momentum, with weights, actions and slopes;
/// the textual analogue of the model's geometric picture.
pub fn slit_solutions(pulse: &Pulse, atom: &Atom, p: f64) -> Vec<SlitSolution> {
    let finder = SlitFinder::new(pulse);
    finder
        .find(p)
        .into_iter()
        .map(|t0| SlitSolution {
            t0,
            weight: ionization::rate(pulse.electric_field(t0), atom).sqrt(),
            action: action_unchecked(pulse, atom, p, t0),
            slope: -pulse.electric_field(t0),
        })
        .collect()
}

/// Directional spectrum `|M(+-sqrt(2E))|^2` on the given energy grid (a.u.).
pub fn spectrum(
    pulse: &Pulse,
    atom: &Atom,
    energies: &[f64],
) -> Result<DirectionalSpectrum, SemiclassicalError> {
    spectrum::validate_energy_grid(energies)?;
    let finder = SlitFinder::new(pulse);
    let yields: Vec<(f64, f64)> = energies
        .par_iter()
        .map(|&e| {
            let p = (2.0 * e).sqrt();
            let right = amplitude_with(&finder, atom, p).norm_sqr();
            let left = amplitude_with(&finder, atom, -p).norm_sqr();
            (left, right)
        })
        .collect();
    Ok(DirectionalSpectrum {
        energies: energies.to_vec(),
        yield_left: yields.iter().map(|y| y.0).collect(),
        yield_right: yields.iter().map(|y| y.1).collect(),
        meta: SpectrumMeta {
            pulse: *pulse,
            atom: *atom,
            model: Model::Semiclassical,
        },
    })
}
