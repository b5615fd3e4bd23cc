//! Run configuration: flat `key = value` text with dotted section prefixes.
//!
//! The format is line-oriented and diff-friendly; the same text is embedded
//! verbatim in every output file's provenance header, so a run can be
//! reproduced from any of its outputs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

use crate::constants;
use crate::ionization::Atom;
use crate::pulse::{ExperimentalParams, Pulse};
use crate::spectrum::Model;
use crate::tdse1d::Gauge;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything a run needs, resolved; see `Default` for the reference values.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub wavelength_nm: f64,
    pub intensity_w_cm2: f64,
    pub n_cycles: f64,
    pub cep: f64,
    /// Extra CEP values for `spectrum` (empty: just `cep`).
    pub cep_list: Vec<f64>,
    pub n_cep: usize,
    pub ip: f64,
    pub prefactor: f64,
    pub model: Model,
    pub energy_min_ev: f64,
    pub energy_max_ev: f64,
    pub energy_bins: usize,
    pub band_min_ev: f64,
    pub band_max_ev: f64,
    pub tdse_x_min: f64,
    pub tdse_x_max: f64,
    pub tdse_n_points: usize,
    pub tdse_dt: f64,
    pub tdse_gauge: Gauge,
    pub tdse_z: f64,
    pub tdse_a2: f64,
    pub tdse_match_ip: bool,
    pub tdse_drift_cycles: f64,
    pub tdse_x_split: f64,
    pub tdse_split_width: f64,
    pub tdse_absorber_fraction: f64,
    pub tdse_virtual_detector: bool,
    pub tdse_snapshot_every: usize,
    pub out_dir: PathBuf,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            wavelength_nm: 850.0,
            intensity_w_cm2: 1e14,
            n_cycles: 6.5,
            cep: 0.0,
            cep_list: Vec::new(),
            n_cep: 32,
            ip: 0.5792,
            prefactor: 1.0,
            model: Model::Semiclassical,
            energy_min_ev: 0.4,
            energy_max_ev: 16.0,
            energy_bins: 1200,
            band_min_ev: 1.0,
            band_max_ev: 8.0,
            tdse_x_min: -600.0,
            tdse_x_max: 600.0,
            tdse_n_points: 16384,
            tdse_dt: 0.055,
            tdse_gauge: Gauge::Length,
            tdse_z: 1.0,
            tdse_a2: 2.0,
            tdse_match_ip: false,
            tdse_drift_cycles: 2.0,
            tdse_x_split: 50.0,
            tdse_split_width: 5.0,
            tdse_absorber_fraction: 0.1,
            tdse_virtual_detector: false,
            tdse_snapshot_every: 0,
            out_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected 'key = value', got '{raw}'"),
                });
            };
            config.set(key.trim(), value.trim(), line)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        fn num<T: FromStr>(value: &str, line: usize) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            value.parse().map_err(|e| ConfigError::Parse {
                line,
                message: format!("bad value '{value}': {e}"),
            })
        }
        match key {
            "pulse.wavelength_nm" => self.wavelength_nm = num(value, line)?,
            "pulse.intensity" => self.intensity_w_cm2 = num(value, line)?,
            "pulse.n_cycles" => self.n_cycles = num(value, line)?,
            "pulse.cep" => self.cep = num(value, line)?,
            "pulse.cep_list" => {
                self.cep_list = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|v| num(v.trim(), line))
                        .collect::<Result<_, _>>()?
                };
            }
            "scan.n_cep" => self.n_cep = num(value, line)?,
            "atom.ip" => self.ip = num(value, line)?,
            "atom.prefactor" => self.prefactor = num(value, line)?,
            "model" => self.model = num(value, line)?,
            "energy.min_ev" => self.energy_min_ev = num(value, line)?,
            "energy.max_ev" => self.energy_max_ev = num(value, line)?,
            "energy.n_bins" => self.energy_bins = num(value, line)?,
            "analysis.band_min_ev" => self.band_min_ev = num(value, line)?,
            "analysis.band_max_ev" => self.band_max_ev = num(value, line)?,
            "tdse.x_min" => self.tdse_x_min = num(value, line)?,
            "tdse.x_max" => self.tdse_x_max = num(value, line)?,
            "tdse.n_points" => self.tdse_n_points = num(value, line)?,
            "tdse.dt" => self.tdse_dt = num(value, line)?,
            "tdse.gauge" => self.tdse_gauge = num(value, line)?,
            "tdse.z" => self.tdse_z = num(value, line)?,
            "tdse.a2" => self.tdse_a2 = num(value, line)?,
            "tdse.match_ip" => self.tdse_match_ip = num(value, line)?,
            "tdse.drift_cycles" => self.tdse_drift_cycles = num(value, line)?,
            "tdse.x_split" => self.tdse_x_split = num(value, line)?,
            "tdse.split_width" => self.tdse_split_width = num(value, line)?,
            "tdse.absorber_fraction" => self.tdse_absorber_fraction = num(value, line)?,
            "tdse.virtual_detector" => self.tdse_virtual_detector = num(value, line)?,
            "tdse.snapshot_every" => self.tdse_snapshot_every = num(value, line)?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = num(value, line)?,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("unknown key '{other}'"),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("pulse.wavelength_nm", self.wavelength_nm),
            ("pulse.intensity", self.intensity_w_cm2),
            ("pulse.n_cycles", self.n_cycles),
            ("atom.ip", self.ip),
            ("tdse.dt", self.tdse_dt),
            ("tdse.a2", self.tdse_a2),
            ("tdse.split_width", self.tdse_split_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.n_cep < 1 {
            return Err(ConfigError::Invalid("scan.n_cep must be >= 1".into()));
        }
        if !(self.energy_min_ev > 0.0) || self.energy_max_ev <= self.energy_min_ev {
            return Err(ConfigError::Invalid(format!(
                "energy grid [{}, {}] eV invalid",
                self.energy_min_ev, self.energy_max_ev
            )));
        }
        if self.energy_bins < 2 {
            return Err(ConfigError::Invalid("energy.n_bins must be >= 2".into()));
        }
        if self.band_max_ev <= self.band_min_ev {
            return Err(ConfigError::Invalid("analysis band invalid".into()));
        }
        Ok(())
    }

    /// Canonical text form; `from_text` of this reproduces the config.
    pub fn to_text(&self) -> String {
        let cep_list = self
            .cep_list
            .iter()
            .map(|c| format!("{c:?}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "pulse.wavelength_nm = {:?}\n\
             pulse.intensity = {:?}\n\
             pulse.n_cycles = {:?}\n\
             pulse.cep = {:?}\n\
             pulse.cep_list = {}\n\
             scan.n_cep = {}\n\
             atom.ip = {:?}\n\
             atom.prefactor = {:?}\n\
             model = {}\n\
             energy.min_ev = {:?}\n\
             energy.max_ev = {:?}\n\
             energy.n_bins = {}\n\
             analysis.band_min_ev = {:?}\n\
             analysis.band_max_ev = {:?}\n\
             tdse.x_min = {:?}\n\
             tdse.x_max = {:?}\n\
             tdse.n_points = {}\n\
             tdse.dt = {:?}\n\
             tdse.gauge = {}\n\
             tdse.z = {:?}\n\
             tdse.a2 = {:?}\n\
             tdse.match_ip = {}\n\
             tdse.drift_cycles = {:?}\n\
             tdse.x_split = {:?}\n\
             tdse.split_width = {:?}\n\
             tdse.absorber_fraction = {:?}\n\
             tdse.virtual_detector = {}\n\
             tdse.snapshot_every = {}\n\
             output.dir = {}\n\
             threads = {}\n",
            self.wavelength_nm,
            self.intensity_w_cm2,
            self.n_cycles,
            self.cep,
            cep_list,
            self.n_cep,
            self.ip,
            self.prefactor,
            self.model.name(),
            self.energy_min_ev,
            self.energy_max_ev,
            self.energy_bins,
            self.band_min_ev,
            self.band_max_ev,
            self.tdse_x_min,
            self.tdse_x_max,
            self.tdse_n_points,
            self.tdse_dt,
            self.tdse_gauge.name(),
            self.tdse_z,
            self.tdse_a2,
            self.tdse_match_ip,
            self.tdse_drift_cycles,
            self.tdse_x_split,
            self.tdse_split_width,
            self.tdse_absorber_fraction,
            self.tdse_virtual_detector,
            self.tdse_snapshot_every,
            self.out_dir.display(),
            self.threads,
        )
    }

    pub fn pulse_with_cep(&self, cep: f64) -> Result<Pulse, ConfigError> {
        ExperimentalParams {
            wavelength_nm: self.wavelength_nm,
            intensity_w_cm2: self.intensity_w_cm2,
            n_cycles: self.n_cycles,
            cep,
        }
        .build()
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn atom(&self) -> Atom {
        Atom {
            ip: self.ip,
            prefactor: self.prefactor,
        }
    }

    /// Energy grid in atomic units from the eV-facing settings.
    pub fn energy_grid_au(&self) -> Result<Vec<f64>, ConfigError> {
        crate::spectrum::uniform_energy_grid(
            constants::ev_to_hartree(self.energy_min_ev),
            constants::ev_to_hartree(self.energy_max_ev),
            self.energy_bins,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Analysis band in atomic units.
    pub fn band_au(&self) -> (f64, f64) {
        (
            constants::ev_to_hartree(self.band_min_ev),
            constants::ev_to_hartree(self.band_max_ev),
        )
    }

    /// CEP values for the `spectrum` command.
    pub fn spectrum_ceps(&self) -> Vec<f64> {
        if self.cep_list.is_empty() {
            vec![self.cep]
        } else {
            self.cep_list.clone()
        }
    }

    /// Uniform CEP grid over [0, 2 pi) for the `scan` command.
    pub fn scan_ceps(&self) -> Vec<f64> {
        (0..self.n_cep)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / self.n_cep as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_text() {
        let config = RunConfig::default();
        let parsed = RunConfig::from_text(&config.to_text()).unwrap();
        assert_eq!(config, parsed);
    }

    #[test]
    fn overrides_and_comments_parse() {
        let text = "# comment\n\
                    pulse.cep = 1.5707963267948966\n\
                    model = tdse   # trailing comment\n\
                    tdse.gauge = velocity\n\
                    pulse.cep_list = 0.0, 1.0,2.5\n";
        let config = RunConfig::from_text(text).unwrap();
        assert_eq!(config.model, Model::Tdse);
        assert_eq!(config.tdse_gauge, Gauge::Velocity);
        assert_eq!(config.cep_list, vec![0.0, 1.0, 2.5]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::from_text("pulse.cep = 0.1\nnot a pair\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
        let err = RunConfig::from_text("bogus.key = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = RunConfig::from_text("pulse.wavelength_nm = -5\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }
}
