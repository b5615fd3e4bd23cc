//! Directional photoelectron spectra shared by all three models.

use thiserror::Error;

use crate::ionization::Atom;
use crate::pulse::Pulse;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("energy grid must be non-empty, positive and strictly increasing")]
    InvalidEnergyGrid,
}

/// Which model produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Semiclassical,
    Saddle,
    Tdse,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Semiclassical => "semiclassical",
            Model::Saddle => "saddle",
            Model::Tdse => "tdse",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "semiclassical" => Ok(Model::Semiclassical),
            "saddle" => Ok(Model::Saddle),
            "tdse" => Ok(Model::Tdse),
            other => Err(format!(
                "unknown model '{other}' (expected semiclassical, saddle or tdse)"
            )),
        }
    }
}

/// Provenance of a spectrum: pulse, atom and model that produced it.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumMeta {
    pub pulse: Pulse,
    pub atom: Atom,
    pub model: Model,
}

/// Electron yield vs energy, separately for emission to the left (p < 0)
/// and to the right (p > 0). Energies in a.u., strictly increasing.
#[derive(Debug, Clone)]
pub struct DirectionalSpectrum {
    pub energies: Vec<f64>,
    pub yield_left: Vec<f64>,
    pub yield_right: Vec<f64>,
    pub meta: SpectrumMeta,
}

/// Emission direction selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn name(&self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    pub fn sign(&self) -> f64 {
        match self {
            Direction::Left => -1.0,
            Direction::Right => 1.0,
        }
    }
}

impl DirectionalSpectrum {
    pub fn yields(&self, dir: Direction) -> &[f64] {
        match dir {
            Direction::Left => &self.yield_left,
            Direction::Right => &self.yield_right,
        }
    }
}

/// Validate an externally supplied energy grid.
pub fn validate_energy_grid(energies: &[f64]) -> Result<(), SpectrumError> {
    if energies.is_empty() || energies[0] <= 0.0 {
        return Err(SpectrumError::InvalidEnergyGrid);
    }
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectrumError::InvalidEnergyGrid);
    }
    Ok(())
}

/// Uniform energy grid of `n` bins on `[min, max]` (a.u.).
pub fn uniform_energy_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>, SpectrumError> {
    if n < 2 || !(min > 0.0) || !(max > min) {
        return Err(SpectrumError::InvalidEnergyGrid);
    }
    Ok((0..n)
        .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(validate_energy_grid(&[]).is_err());
        assert!(validate_energy_grid(&[0.0, 1.0]).is_err());
        assert!(validate_energy_grid(&[1.0, 1.0]).is_err());
        assert!(validate_energy_grid(&[0.5, 1.0, 2.0]).is_ok());
        let g = uniform_energy_grid(0.1, 1.0, 10).unwrap();
        assert_eq!(g.len(), 10);
        assert!(validate_energy_grid(&g).is_ok());
        assert!(uniform_energy_grid(0.0, 1.0, 10).is_err());
    }
}
