//! Model dispatch: one spectrum or a CEP scan from a resolved config.

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{self, PhaseScan};
use crate::config::{ConfigError, RunConfig};
use crate::spectrum::{DirectionalSpectrum, Model};
use crate::tdse1d::{
    self, AbsorberSpec, Grid1D, ItpSpec, PropagationSpec, SoftCorePotential, SplitSpec,
    Wavefunction1D,
};
use crate::{saddle, semiclassical};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl RunError {
    /// CLI exit code: 1 for configuration problems, 2 for numeric failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numeric(_) => 2,
        }
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numeric(e.to_string())
}

/// Reusable TDSE context: grid, potential and the ground state, computed
/// once per run and shared across CEP values.
pub struct TdseContext {
    pub grid: Grid1D,
    pub potential: SoftCorePotential,
    pub psi0: Wavefunction1D,
    pub ground_energy: f64,
}

impl TdseContext {
    pub fn prepare(config: &RunConfig) -> Result<Self, RunError> {
        let grid = Grid1D::new(
            config.tdse_x_min,
            config.tdse_x_max,
            config.tdse_n_points,
            config.tdse_dt,
        )
        .map_err(numeric)?;
        let a2 = if config.tdse_match_ip {
            tdse1d::tune_softening_to_ip(config.tdse_z, config.ip, &grid, &ItpSpec::default())
                .map_err(numeric)?
        } else {
            config.tdse_a2
        };
        let potential = SoftCorePotential::new(config.tdse_z, a2).map_err(numeric)?;
        let (psi0, ground_energy) =
            tdse1d::ground_state(&potential, &grid, &ItpSpec::default()).map_err(numeric)?;
        Ok(Self {
            grid,
            potential,
            psi0,
            ground_energy,
        })
    }

    pub fn spectrum(
        &self,
        config: &RunConfig,
        cep: f64,
        energies: &[f64],
    ) -> Result<DirectionalSpectrum, RunError> {
        Ok(self.spectrum_with_snapshots(config, cep, energies)?.0)
    }

    /// Spectrum plus any |psi|^2 checkpoint snapshots the config requested.
    pub fn spectrum_with_snapshots(
        &self,
        config: &RunConfig,
        cep: f64,
        energies: &[f64],
    ) -> Result<(DirectionalSpectrum, Vec<(f64, Vec<f64>)>), RunError> {
        let pulse = config.pulse_with_cep(cep)?;
        let spec = PropagationSpec {
            gauge: config.tdse_gauge,
            drift_time: config.tdse_drift_cycles * pulse.optical_period(),
            absorber: Some(AbsorberSpec {
                fraction: config.tdse_absorber_fraction,
                exponent: 0.125,
            }),
            virtual_detector: config.tdse_virtual_detector,
            snapshot_every: config.tdse_snapshot_every,
        };
        let outcome = tdse1d::propagate(&self.psi0, &pulse, &self.potential, &self.grid, &spec)
            .map_err(numeric)?;
        let spectrum = tdse1d::directional_spectrum(
            &outcome,
            &pulse,
            &config.atom(),
            &self.potential,
            &self.grid,
            &SplitSpec {
                x_split: config.tdse_x_split,
                width: config.tdse_split_width,
            },
            energies,
        )
        .map_err(numeric)?;
        Ok((spectrum, outcome.snapshots))
    }
}

/// One spectrum at the given CEP with the configured model.
pub fn spectrum_at(config: &RunConfig, cep: f64) -> Result<DirectionalSpectrum, RunError> {
    let energies = config.energy_grid_au()?;
    match config.model {
        Model::Semiclassical => {
            let pulse = config.pulse_with_cep(cep)?;
            semiclassical::spectrum(&pulse, &config.atom(), &energies).map_err(numeric)
        }
        Model::Saddle => {
            let pulse = config.pulse_with_cep(cep)?;
            Ok(saddle::spectrum(&pulse, &config.atom(), &energies)
                .map_err(numeric)?
                .spectrum)
        }
        Model::Tdse => TdseContext::prepare(config)?.spectrum(config, cep, &energies),
    }
}

/// Full CEP scan with the configured model. CEP values are distributed over
/// the worker pool; results are collected in CEP order, so the output is
/// deterministic regardless of scheduling.
pub fn scan(config: &RunConfig) -> Result<PhaseScan, RunError> {
    let energies = config.energy_grid_au()?;
    let ceps = config.scan_ceps();
    let atom = config.atom();
    let spectra: Vec<DirectionalSpectrum> = match config.model {
        Model::Semiclassical => ceps
            .par_iter()
            .map(|&c| {
                let pulse = config.pulse_with_cep(c)?;
                semiclassical::spectrum(&pulse, &atom, &energies).map_err(numeric)
            })
            .collect::<Result<_, _>>()?,
        Model::Saddle => ceps
            .par_iter()
            .map(|&c| -> Result<DirectionalSpectrum, RunError> {
                let pulse = config.pulse_with_cep(c)?;
                Ok(saddle::spectrum(&pulse, &atom, &energies)
                    .map_err(numeric)?
                    .spectrum)
            })
            .collect::<Result<_, _>>()?,
        Model::Tdse => {
            let context = TdseContext::prepare(config)?;
            ceps.par_iter()
                .map(|&c| context.spectrum(config, c, &energies))
                .collect::<Result<_, _>>()?
        }
    };
    PhaseScan::new(ceps, spectra).map_err(numeric)
}

/// Scan plus its phase-average-normalized counterpart.
pub fn scan_with_normalized(config: &RunConfig) -> Result<(PhaseScan, PhaseScan), RunError> {
    let raw = scan(config)?;
    let normalized = analysis::normalize_by_phase_average(&raw).map_err(numeric)?;
    Ok((raw, normalized))
}
