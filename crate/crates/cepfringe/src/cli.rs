//! Command implementations behind the binary: each takes a resolved config,
//! writes its files under `config.out_dir` and returns the paths written.

use std::path::PathBuf;

use crate::analysis::{self, FringeAnalyzer, FringeReport};
use crate::config::RunConfig;
use crate::constants::{ev_to_hartree, hartree_to_ev};
use crate::output::{self, OutputError};
use crate::run::{self, RunError, TdseContext};
use crate::semiclassical;
use crate::spectrum::Direction;

fn io(e: OutputError) -> RunError {
    RunError::Numeric(e.to_string())
}

fn ensure_out_dir(config: &RunConfig) -> Result<(), RunError> {
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| RunError::Numeric(format!("cannot create output dir: {e}")))
}

/// One tabular spectrum per CEP per direction; for the TDSE model with
/// `tdse.snapshot_every` set, also a |psi|^2 checkpoint table per CEP.
pub fn cmd_spectrum(config: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    ensure_out_dir(config)?;
    let energies = config.energy_grid_au()?;
    let tdse_context = match config.model {
        crate::spectrum::Model::Tdse => Some(run::TdseContext::prepare(config)?),
        _ => None,
    };
    let mut written = Vec::new();
    for (k, cep) in config.spectrum_ceps().into_iter().enumerate() {
        let (spectrum, snapshots) = match &tdse_context {
            Some(context) => context.spectrum_with_snapshots(config, cep, &energies)?,
            None => (run::spectrum_at(config, cep)?, Vec::new()),
        };
        for dir in [Direction::Left, Direction::Right] {
            let path = config.out_dir.join(format!(
                "spectrum_{}_cep{k}_{}.csv",
                config.model.name(),
                dir.name()
            ));
            output::write_spectrum_csv(&path, config, &spectrum.energies, spectrum.yields(dir))
                .map_err(io)?;
            written.push(path);
        }
        if !snapshots.is_empty() {
            let context = tdse_context.as_ref().unwrap();
            let path = config
                .out_dir
                .join(format!("snapshots_tdse_cep{k}.csv"));
            output::write_snapshots_csv(&path, config, &context.grid, &snapshots).map_err(io)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Raw and normalized scan matrices per direction, plus a PGM rendering of
/// each normalized matrix.
pub fn cmd_scan(config: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    ensure_out_dir(config)?;
    let (raw, normalized) = run::scan_with_normalized(config)?;
    let energies = raw.energies().to_vec();
    let mut written = Vec::new();
    for dir in [Direction::Left, Direction::Right] {
        for (scan, tag) in [(&raw, "raw"), (&normalized, "norm")] {
            let columns: Vec<Vec<f64>> = scan
                .spectra
                .iter()
                .map(|s| s.yields(dir).to_vec())
                .collect();
            let path = config.out_dir.join(format!(
                "scan_{}_{}_{tag}.csv",
                config.model.name(),
                dir.name()
            ));
            output::write_scan_csv(&path, config, &energies, &scan.cep_values, &columns)
                .map_err(io)?;
            written.push(path);
            if *tag == *"norm" {
                let pgm = config.out_dir.join(format!(
                    "scan_{}_{}_norm.pgm",
                    config.model.name(),
                    dir.name()
                ));
                output::write_scan_pgm(&pgm, &energies, &columns).map_err(io)?;
                written.push(pgm);
            }
        }
    }
    Ok(written)
}

/// Release times, weights and action phases for one |p|, both directions;
/// the textual analogue of the slit geometry picture.
pub fn cmd_slits(config: &RunConfig, momentum: f64) -> Result<Vec<PathBuf>, RunError> {
    ensure_out_dir(config)?;
    let pulse = config.pulse_with_cep(config.cep)?;
    let atom = config.atom();
    let p = momentum.abs();
    let mut rows = Vec::new();
    for signed in [-p, p] {
        for slit in semiclassical::slit_solutions(&pulse, &atom, signed) {
            rows.push((signed, slit.t0, slit.weight, slit.action, slit.slope));
        }
    }
    let path = config
        .out_dir
        .join(format!("slits_cep{:+.4}_p{:.4}.csv", config.cep, p));
    output::write_slits_csv(&path, config, &rows).map_err(io)?;
    Ok(vec![path])
}

/// Analyze tabular spectra: fringe report per input file.
pub fn cmd_analyze(
    config: &RunConfig,
    inputs: &[PathBuf],
    band_ev: (f64, f64),
) -> Result<Vec<PathBuf>, RunError> {
    ensure_out_dir(config)?;
    let pulse = config.pulse_with_cep(config.cep)?;
    let spacing_ev = hartree_to_ev(pulse.omega());
    let mut written = Vec::new();
    for input in inputs {
        let table = output::read_spectrum_csv(input).map_err(io)?;
        let report = report_for_table(&table.energies_ev, &table.yields, band_ev, spacing_ev)
            .map_err(|e| RunError::Numeric(format!("{}: {e}", input.display())))?;
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "input".into());
        let txt = config.out_dir.join(format!("report_{stem}.txt"));
        let csv = config.out_dir.join(format!("report_{stem}.csv"));
        output::write_report(&txt, &csv, config, &stem, &report).map_err(io)?;
        written.push(txt);
        written.push(csv);
    }
    Ok(written)
}

fn report_for_table(
    energies_ev: &[f64],
    yields: &[f64],
    band_ev: (f64, f64),
    spacing_ev: f64,
) -> Result<FringeReport, analysis::AnalysisError> {
    analysis::report_from_ev(energies_ev, yields, band_ev, spacing_ev)
}

/// Ground-state energy and density profile of the configured soft-core
/// potential.
pub fn cmd_tdse_groundstate(config: &RunConfig) -> Result<Vec<PathBuf>, RunError> {
    ensure_out_dir(config)?;
    let context = TdseContext::prepare(config)?;
    let path = config.out_dir.join("tdse_groundstate.csv");
    let mut body = output::provenance_header(config);
    body.push_str(&format!(
        "# ground_state_energy_au = {:.12e}\n# softening_a2 = {:?}\nx_au,density_per_au\n",
        context.ground_energy, context.potential.a2
    ));
    let density = context.psi0.density();
    for i in 0..context.grid.n_points {
        body.push_str(&format!(
            "{:.8e},{:.8e}\n",
            context.grid.position(i),
            density[i]
        ));
    }
    std::fs::write(&path, body).map_err(|e| RunError::Numeric(e.to_string()))?;
    Ok(vec![path])
}

/// Band in a.u. from eV bounds, defaulting to the config's analysis band.
pub fn band_from_args(config: &RunConfig, band_ev: Option<(f64, f64)>) -> (f64, f64) {
    match band_ev {
        Some((lo, hi)) => (ev_to_hartree(lo), ev_to_hartree(hi)),
        None => config.band_au(),
    }
}

/// Fringe report of one direction of a normalized scan member, in a.u.;
/// shared by the acceptance suite and ad-hoc analysis.
pub fn report_for_scan_member(
    scan: &analysis::PhaseScan,
    index: usize,
    dir: Direction,
    band_au: (f64, f64),
    spacing_au: f64,
) -> Result<FringeReport, analysis::AnalysisError> {
    let energies = scan.energies().to_vec();
    analysis::report_from_au(&energies, scan.spectra[index].yields(dir), band_au, spacing_au)
}

/// The configured analyzer, for callers that need the primitive operations.
pub fn analyzer_for(config: &RunConfig) -> Result<FringeAnalyzer, RunError> {
    let pulse = config.pulse_with_cep(config.cep)?;
    FringeAnalyzer::new(pulse.omega(), config.band_au())
        .map_err(|e| RunError::Numeric(e.to_string()))
}

/// Paths written by a command, echoed one per line (stdout contract used by
/// the integration tests).
pub fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}
