//! One-dimensional time-dependent Schrödinger solver.
//!
//! Split-operator spectral propagation on a uniform periodic grid, with a
//! soft-core potential `V(x) = -z / sqrt(x^2 + a2)`. The ground state comes
//! from imaginary-time propagation; the real-time run couples the pulse in
//! length gauge (`+x E(t)`, electron charge -1) or velocity gauge (shifted
//! kinetic energy `(k + A(t))^2 / 2`). A `cos^(1/8)` mask over the outer 10%
//! of the box absorbs outgoing flux, tallied per side; an optional virtual
//! detector accumulates the momentum content of the absorbed flux with
//! free-evolution phase corrections so it can be added back to the final
//! spectra.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

use crate::ionization::Atom;
use crate::pulse::Pulse;
use crate::spectrum::{self, DirectionalSpectrum, Model, SpectrumError, SpectrumMeta};

#[derive(Debug, Error)]
pub enum TdseError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("time step {dt} too coarse for the carrier (need dt <= {max_dt})")]
    TimeStepTooCoarse { dt: f64, max_dt: f64 },
    #[error(
        "imaginary-time propagation did not converge after {steps} steps \
         (last energy change {last_delta:.3e})"
    )]
    GroundStateNotConverged { steps: usize, last_delta: f64 },
    #[error("bound-state density {density:.3e} at the box edge exceeds 1e-12; widen the grid")]
    GridTooNarrow { density: f64 },
    #[error(
        "norm grew by {growth:.3e} in step {step} (t = {t:.3}); \
         propagation unstable, reduce dt"
    )]
    Unstable { step: usize, t: f64, growth: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Uniform spatial grid (periodic for the spectral method) plus the
/// propagation time step.
#[derive(Debug, Clone, Copy)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, dt: f64) -> Result<Self, TdseError> {
        if !(x_max > x_min) {
            return Err(TdseError::InvalidGrid(format!(
                "x_max {x_max} must exceed x_min {x_min}"
            )));
        }
        if n_points < 1024 || !n_points.is_power_of_two() {
            return Err(TdseError::InvalidGrid(format!(
                "n_points {n_points} must be a power of two >= 1024"
            )));
        }
        if !(dt > 0.0) {
            return Err(TdseError::InvalidGrid(format!("dt {dt} must be positive")));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dt,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    /// FFT wavenumber of bin `m` (standard wrap-around ordering).
    pub fn wavenumber(&self, m: usize) -> f64 {
        let n = self.n_points;
        let dk = 2.0 * PI / (self.x_max - self.x_min);
        if m < n / 2 {
            dk * m as f64
        } else {
            dk * (m as f64 - n as f64)
        }
    }
}

/// Soft-core potential `V(x) = -z / sqrt(x^2 + a2)`.
#[derive(Debug, Clone, Copy)]
pub struct SoftCorePotential {
    pub z: f64,
    pub a2: f64,
}

impl SoftCorePotential {
    pub fn new(z: f64, a2: f64) -> Result<Self, TdseError> {
        if !(a2 > 0.0) {
            return Err(TdseError::InvalidPotential(format!(
                "softening a2 = {a2} must be positive"
            )));
        }
        Ok(Self { z, a2 })
    }

    pub fn value(&self, x: f64) -> f64 {
        -self.z / (x * x + self.a2).sqrt()
    }
}

/// Complex amplitudes on a [`Grid1D`], with the cumulative probability
/// absorbed at each side of the box.
#[derive(Debug, Clone)]
pub struct Wavefunction1D {
    pub values: Vec<Complex64>,
    pub absorbed_left: f64,
    pub absorbed_right: f64,
}

impl Wavefunction1D {
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &Grid1D, f: F) -> Self {
        let values = (0..grid.n_points).map(|i| f(grid.position(i))).collect();
        Self {
            values,
            absorbed_left: 0.0,
            absorbed_right: 0.0,
        }
    }

    /// Normalized Gaussian packet `exp(-(x-x0)^2/(2 sigma^2) + i p0 x)`.
    pub fn gaussian(grid: &Grid1D, x0: f64, sigma: f64, p0: f64) -> Self {
        let mut psi = Self::from_fn(grid, |x| {
            let arg = -(x - x0).powi(2) / (2.0 * sigma * sigma);
            Complex64::from_polar(arg.exp(), p0 * x)
        });
        psi.normalize(grid);
        psi
    }

    pub fn norm_sq(&self, grid: &Grid1D) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dx()
    }

    pub fn normalize(&mut self, grid: &Grid1D) {
        let norm = self.norm_sq(grid).sqrt();
        if norm > 0.0 {
            for v in &mut self.values {
                *v /= norm;
            }
        }
    }

    pub fn overlap(&self, other: &Self, grid: &Grid1D) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * grid.dx()
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Dipole coupling gauge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    #[default]
    Length,
    Velocity,
}

impl Gauge {
    pub fn name(&self) -> &'static str {
        match self {
            Gauge::Length => "length",
            Gauge::Velocity => "velocity",
        }
    }
}

impl std::str::FromStr for Gauge {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "length" => Ok(Gauge::Length),
            "velocity" => Ok(Gauge::Velocity),
            other => Err(format!(
                "unknown gauge '{other}' (expected length or velocity)"
            )),
        }
    }
}

/// Absorbing-mask shape: `cos^exponent` over the outer `fraction` of the box
/// on each side.
#[derive(Debug, Clone, Copy)]
pub struct AbsorberSpec {
    pub fraction: f64,
    pub exponent: f64,
}

impl Default for AbsorberSpec {
    fn default() -> Self {
        Self {
            fraction: 0.1,
            exponent: 0.125,
        }
    }
}

/// Real-time propagation parameters.
#[derive(Debug, Clone, Copy)]
pub struct PropagationSpec {
    pub gauge: Gauge,
    /// Field-free drift after the pulse (a.u.).
    pub drift_time: f64,
    pub absorber: Option<AbsorberSpec>,
    /// Accumulate the momentum content of absorbed flux.
    pub virtual_detector: bool,
    /// Record |psi|^2 snapshots every so many steps (0 = never).
    pub snapshot_every: usize,
}

impl Default for PropagationSpec {
    fn default() -> Self {
        Self {
            gauge: Gauge::Length,
            drift_time: 0.0,
            absorber: Some(AbsorberSpec::default()),
            virtual_detector: false,
            snapshot_every: 0,
        }
    }
}

/// Momentum-space accumulator for flux removed by the mask, phase-referenced
/// to the end of the propagation by free evolution.
#[derive(Debug, Clone)]
pub struct VirtualDetector {
    pub amplitudes: Vec<Complex64>,
}

/// Result of a real-time propagation.
pub struct PropagationOutcome {
    pub psi: Wavefunction1D,
    pub t_end: f64,
    pub detector: Option<VirtualDetector>,
    /// `(time, |psi|^2)` pairs when snapshots were requested.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

/// Imaginary-time propagation controls.
#[derive(Debug, Clone, Copy)]
pub struct ItpSpec {
    pub dtau_start: f64,
    pub dtau_min: f64,
    /// Per-step energy change below which a stage is converged.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for ItpSpec {
    fn default() -> Self {
        Self {
            dtau_start: 0.2,
            dtau_min: 0.02,
            tol: 1e-12,
            max_steps: 500_000,
        }
    }
}

/// Split-step engine: FFT plans, wavenumbers, sampled potential and the
/// absorbing mask.
struct Engine {
    grid: Grid1D,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    potential: Vec<f64>,
    mask: Option<Vec<f64>>,
}

impl Engine {
    fn new(grid: &Grid1D, potential: &SoftCorePotential, absorber: Option<AbsorberSpec>) -> Self {
        let n = grid.n_points;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let k = (0..n).map(|m| grid.wavenumber(m)).collect();
        let v = (0..n).map(|i| potential.value(grid.position(i))).collect();
        let mask = absorber.map(|a| {
            let width = a.fraction * (grid.x_max - grid.x_min) / 2.0;
            (0..n)
                .map(|i| {
                    let x = grid.position(i);
                    let depth = (grid.x_min + width - x)
                        .max(x - (grid.x_max - width))
                        .max(0.0);
                    (PI / 2.0 * (depth / width).min(1.0)).cos().powf(a.exponent)
                })
                .collect()
        });
        Self {
            grid: *grid,
            fft,
            ifft,
            k,
            potential: v,
            mask,
        }
    }

    fn to_momentum(&self, values: &mut [Complex64]) {
        self.fft.process(values);
    }

    fn to_position(&self, values: &mut [Complex64]) {
        self.ifft.process(values);
        let scale = 1.0 / self.grid.n_points as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    /// One Strang step `exp(-i H dt)`: half potential, full kinetic, half
    /// potential, with the field evaluated at the step midpoint. In velocity
    /// gauge the coupling moves into the kinetic factor `(k + A)^2 / 2`.
    fn step(&self, values: &mut [Complex64], dt: f64, field: f64, a_mid: f64, gauge: Gauge) {
        let n = self.grid.n_points;
        match gauge {
            Gauge::Length => {
                for i in 0..n {
                    let x = self.grid.position(i);
                    let phase = -(self.potential[i] + x * field) * dt / 2.0;
                    values[i] *= Complex64::from_polar(1.0, phase);
                }
                self.fft.process(values);
                for (v, &k) in values.iter_mut().zip(&self.k) {
                    *v *= Complex64::from_polar(1.0, -0.5 * k * k * dt);
                }
                self.to_position(values);
                for i in 0..n {
                    let x = self.grid.position(i);
                    let phase = -(self.potential[i] + x * field) * dt / 2.0;
                    values[i] *= Complex64::from_polar(1.0, phase);
                }
            }
            Gauge::Velocity => {
                for i in 0..n {
                    let phase = -self.potential[i] * dt / 2.0;
                    values[i] *= Complex64::from_polar(1.0, phase);
                }
                self.fft.process(values);
                for (v, &k) in values.iter_mut().zip(&self.k) {
                    let shifted = k + a_mid;
                    *v *= Complex64::from_polar(1.0, -0.5 * shifted * shifted * dt);
                }
                self.to_position(values);
                for i in 0..n {
                    let phase = -self.potential[i] * dt / 2.0;
                    values[i] *= Complex64::from_polar(1.0, phase);
                }
            }
        }
    }

    /// One imaginary-time step `exp(-H dtau)` (field-free), not normalized.
    fn step_imaginary(&self, values: &mut [Complex64], dtau: f64) {
        for (v, &p) in values.iter_mut().zip(&self.potential) {
            *v *= (-p * dtau / 2.0).exp();
        }
        self.fft.process(values);
        for (v, &k) in values.iter_mut().zip(&self.k) {
            *v *= (-0.5 * k * k * dtau).exp();
        }
        self.to_position(values);
        for (v, &p) in values.iter_mut().zip(&self.potential) {
            *v *= (-p * dtau / 2.0).exp();
        }
    }

    /// Variational energy `<psi|H|psi> / <psi|psi>` with the spectral
    /// kinetic operator.
    fn energy(&self, values: &[Complex64]) -> f64 {
        let n = self.grid.n_points;
        let dx = self.grid.dx();
        let mut tilde = values.to_vec();
        self.fft.process(&mut tilde);
        let kinetic: f64 = tilde
            .iter()
            .zip(&self.k)
            .map(|(v, &k)| 0.5 * k * k * v.norm_sqr())
            .sum::<f64>()
            * dx
            / n as f64;
        let potential: f64 = values
            .iter()
            .zip(&self.potential)
            .map(|(v, &p)| p * v.norm_sqr())
            .sum::<f64>()
            * dx;
        let norm: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
        (kinetic + potential) / norm
    }

    /// Apply the mask; returns probability removed on each side.
    fn absorb(&self, values: &mut [Complex64]) -> (f64, f64) {
        let Some(mask) = &self.mask else {
            return (0.0, 0.0);
        };
        let dx = self.grid.dx();
        let half = self.grid.n_points / 2;
        let mut left = 0.0;
        let mut right = 0.0;
        for i in 0..self.grid.n_points {
            let m = mask[i];
            if m < 1.0 {
                let removed = values[i].norm_sqr() * (1.0 - m * m) * dx;
                if i < half {
                    left += removed;
                } else {
                    right += removed;
                }
                values[i] *= m;
            }
        }
        (left, right)
    }
}

/// Ground state of the potential by imaginary-time propagation with
/// stage-wise time-step reduction; returns the normalized even state and its
/// variational energy.
pub fn ground_state(
    potential: &SoftCorePotential,
    grid: &Grid1D,
    itp: &ItpSpec,
) -> Result<(Wavefunction1D, f64), TdseError> {
    let engine = Engine::new(grid, potential, None);
    let span = grid.x_max - grid.x_min;
    let sigma = (0.05 * span).min(10.0);
    let center = 0.5 * (grid.x_min + grid.x_max);
    let mut psi = Wavefunction1D::gaussian(grid, center, sigma, 0.0);

    let mut dtau = itp.dtau_start;
    let mut steps = 0usize;
    let mut last_delta = f64::INFINITY;
    loop {
        let mut prev_energy = f64::INFINITY;
        loop {
            if steps >= itp.max_steps {
                return Err(TdseError::GroundStateNotConverged { steps, last_delta });
            }
            engine.step_imaginary(&mut psi.values, dtau);
            let norm = psi.norm_sq(grid).sqrt();
            for v in &mut psi.values {
                *v /= norm;
            }
            // energy estimate from the norm decay of exp(-H dtau)
            let energy = -norm.ln() / dtau;
            steps += 1;
            last_delta = (energy - prev_energy).abs();
            prev_energy = energy;
            if last_delta < itp.tol {
                break;
            }
        }
        if dtau <= itp.dtau_min {
            break;
        }
        dtau = (dtau * 0.25).max(itp.dtau_min);
    }

    let edge_density = psi.values[0]
        .norm_sqr()
        .max(psi.values[grid.n_points - 1].norm_sqr());
    if edge_density > 1e-12 {
        return Err(TdseError::GridTooNarrow {
            density: edge_density,
        });
    }
    let energy = engine.energy(&psi.values);
    psi.normalize(grid);
    Ok((psi, energy))
}

/// Tune the softening `a2` so the ground-state energy matches `-ip`
/// (bisection; the binding weakens monotonically with the softening).
pub fn tune_softening_to_ip(
    z: f64,
    ip: f64,
    grid: &Grid1D,
    itp: &ItpSpec,
) -> Result<f64, TdseError> {
    let target = -ip;
    let (mut lo, mut hi) = (0.05, 8.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let potential = SoftCorePotential::new(z, mid)?;
        let (_, e0) = ground_state(&potential, grid, itp)?;
        if e0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Real-time propagation from `t = 0` through the pulse plus the drift time.
pub fn propagate(
    psi0: &Wavefunction1D,
    pulse: &Pulse,
    potential: &SoftCorePotential,
    grid: &Grid1D,
    spec: &PropagationSpec,
) -> Result<PropagationOutcome, TdseError> {
    let max_dt = pulse.optical_period() / 2000.0;
    if grid.dt > max_dt {
        return Err(TdseError::TimeStepTooCoarse {
            dt: grid.dt,
            max_dt,
        });
    }
    let engine = Engine::new(grid, potential, spec.absorber);
    let t_end = pulse.total_duration() + spec.drift_time;
    let n_steps = (t_end / grid.dt).ceil() as usize;
    let n = grid.n_points;

    let mut psi = psi0.clone();
    let mut detector = spec
        .virtual_detector
        .then(|| vec![Complex64::new(0.0, 0.0); n]);
    let mut snapshots = Vec::new();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut norm_prev = psi.norm_sq(grid);

    let mut t = 0.0;
    for step in 0..n_steps {
        let dt = (t_end - t).min(grid.dt);
        let t_mid = t + 0.5 * dt;
        engine.step(
            &mut psi.values,
            dt,
            pulse.electric_field(t_mid),
            pulse.vector_potential(t_mid),
            spec.gauge,
        );
        t += dt;

        if let (Some(acc), Some(mask)) = (detector.as_mut(), engine.mask.as_ref()) {
            // momentum content of the flux the mask is about to remove,
            // free-propagated to t_end
            for i in 0..n {
                scratch[i] = psi.values[i] * (1.0 - mask[i]);
            }
            engine.to_momentum(&mut scratch);
            for ((acc_v, s), &k) in acc.iter_mut().zip(&scratch).zip(&engine.k) {
                let phase = -0.5 * k * k * (t_end - t);
                *acc_v += s * Complex64::from_polar(1.0, phase);
            }
        }

        let (left, right) = engine.absorb(&mut psi.values);
        psi.absorbed_left += left;
        psi.absorbed_right += right;

        let norm = psi.norm_sq(grid);
        if norm > norm_prev + 1e-6 {
            return Err(TdseError::Unstable {
                step,
                t,
                growth: norm - norm_prev,
            });
        }
        norm_prev = norm;

        if spec.snapshot_every > 0 && step % spec.snapshot_every == 0 {
            snapshots.push((t, psi.density()));
        }
    }

    Ok(PropagationOutcome {
        psi,
        t_end,
        detector: detector.map(|amplitudes| VirtualDetector { amplitudes }),
        snapshots,
    })
}

/// Spatial splitting parameters for the spectrum extraction.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub x_split: f64,
    pub width: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            x_split: 50.0,
            width: 5.0,
        }
    }
}

/// Continuum-normalized momentum amplitudes `psi~(k_m)`, including the
/// absolute-position phase so different sources add coherently.
fn momentum_amplitudes(engine: &Engine, values: &[Complex64]) -> Vec<Complex64> {
    let grid = &engine.grid;
    let mut tilde = values.to_vec();
    engine.to_momentum(&mut tilde);
    let scale = grid.dx() / (2.0 * PI).sqrt();
    for (v, &k) in tilde.iter_mut().zip(&engine.k) {
        *v *= scale * Complex64::from_polar(1.0, -k * grid.x_min);
    }
    tilde
}

/// Directional photoelectron spectrum from the final wavefunction: smooth
/// sigmoidal split at `x_split`, momentum analysis of each part, energy
/// densities `|psi~|^2 / k` interpolated onto the requested grid (a.u.).
/// Flux recorded by the virtual detector is added coherently.
///
/// Warns when more than 1e-6 of the probability sits within two split
/// widths of either split point (the continuum should have moved past).
pub fn directional_spectrum(
    outcome: &PropagationOutcome,
    pulse: &Pulse,
    atom: &Atom,
    potential: &SoftCorePotential,
    grid: &Grid1D,
    split: &SplitSpec,
    energies: &[f64],
) -> Result<DirectionalSpectrum, TdseError> {
    spectrum::validate_energy_grid(energies)?;
    let engine = Engine::new(grid, potential, None);
    let n = grid.n_points;
    let dx = grid.dx();
    let psi = &outcome.psi;

    let mut near_split = 0.0;
    for i in 0..n {
        let x = grid.position(i);
        if (x.abs() - split.x_split).abs() <= 2.0 * split.width {
            near_split += psi.values[i].norm_sqr() * dx;
        }
    }
    if near_split > 1e-6 {
        eprintln!(
            "warning: {near_split:.3e} probability near the split points x = +-{}; \
             spectra may mix bound and continuum parts (increase drift time)",
            split.x_split
        );
    }

    let sigmoid = |u: f64| 1.0 / (1.0 + (-u).exp());
    let mut right_part = vec![Complex64::new(0.0, 0.0); n];
    let mut left_part = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let x = grid.position(i);
        right_part[i] = psi.values[i] * sigmoid((x - split.x_split) / split.width);
        left_part[i] = psi.values[i] * sigmoid((-x - split.x_split) / split.width);
    }
    let mut right_tilde = momentum_amplitudes(&engine, &right_part);
    let mut left_tilde = momentum_amplitudes(&engine, &left_part);

    if let Some(detector) = &outcome.detector {
        let scale = dx / (2.0 * PI).sqrt();
        for m in 0..n {
            let k = engine.k[m];
            let corrected =
                detector.amplitudes[m] * scale * Complex64::from_polar(1.0, -k * grid.x_min);
            if k > 0.0 {
                right_tilde[m] += corrected;
            } else if k < 0.0 {
                left_tilde[m] += corrected;
            }
        }
    }

    // energy density |psi~(k)|^2 / k on the FFT ladder, interpolated onto
    // the requested energies
    let dk = 2.0 * PI / (grid.x_max - grid.x_min);
    let half = n / 2;
    let density_at = |tilde: &[Complex64], negative: bool, e: f64| -> f64 {
        let k = (2.0 * e).sqrt();
        let pos = k / dk;
        let j = pos.floor() as usize;
        if j < 1 || j + 1 >= half {
            return 0.0;
        }
        let frac = pos - j as f64;
        let idx = |jj: usize| if negative { n - jj } else { jj };
        let d0 = tilde[idx(j)].norm_sqr() / (dk * j as f64);
        let d1 = tilde[idx(j + 1)].norm_sqr() / (dk * (j + 1) as f64);
        d0 * (1.0 - frac) + d1 * frac
    };

    let yield_right: Vec<f64> = energies
        .iter()
        .map(|&e| density_at(&right_tilde, false, e))
        .collect();
    let yield_left: Vec<f64> = energies
        .iter()
        .map(|&e| density_at(&left_tilde, true, e))
        .collect();

    Ok(DirectionalSpectrum {
        energies: energies.to_vec(),
        yield_left,
        yield_right,
        meta: SpectrumMeta {
            pulse: *pulse,
            atom: *atom,
            model: Model::Tdse,
        },
    })
}
