//! File formats: provenance-headed CSV tables, PGM quick-look maps and the
//! fringe report.
//!
//! Every file starts with `#`-prefixed provenance lines (tool version,
//! config content hash, full resolved config), then one header line naming
//! the columns with units, then comma-separated rows in 9-significant-digit
//! scientific notation with LF endings. Identical configs produce
//! byte-identical files.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

use crate::analysis::FringeReport;
use crate::config::RunConfig;
use crate::constants::hartree_to_ev;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Short content hash of the resolved config text.
pub fn content_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut s = String::new();
    for byte in digest.iter().take(6) {
        let _ = write!(s, "{byte:02x}");
    }
    s
}

/// Provenance block: tool version, config hash and the full config,
/// all as `#` comment lines.
pub fn provenance_header(config: &RunConfig) -> String {
    let text = config.to_text();
    let mut header = format!(
        "# cepfringe v{TOOL_VERSION}\n# config-hash: {}\n",
        content_hash(&text)
    );
    for line in text.lines() {
        let _ = writeln!(header, "# {line}");
    }
    header
}

/// Recover the config embedded in a provenance header.
pub fn config_from_header(text: &str) -> Option<RunConfig> {
    let config_text: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.contains('='))
        .map(|l| format!("{l}\n"))
        .collect();
    RunConfig::from_text(&config_text).ok()
}

fn fmt_sci(v: f64) -> String {
    format!("{v:.8e}")
}

/// One directional spectrum column pair, energies converted to eV.
pub fn write_spectrum_csv(
    path: &Path,
    config: &RunConfig,
    energies_au: &[f64],
    yields: &[f64],
) -> Result<(), OutputError> {
    let mut out = provenance_header(config);
    out.push_str("energy_ev,yield_arb\n");
    for (e, y) in energies_au.iter().zip(yields) {
        let _ = writeln!(out, "{},{}", fmt_sci(hartree_to_ev(*e)), fmt_sci(*y));
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Scan matrix: rows = energy bins ascending, one column per CEP.
pub fn write_scan_csv(
    path: &Path,
    config: &RunConfig,
    energies_au: &[f64],
    cep_values: &[f64],
    columns: &[Vec<f64>],
) -> Result<(), OutputError> {
    let mut out = provenance_header(config);
    out.push_str("energy_ev");
    for cep in cep_values {
        let _ = write!(out, ",yield_arb_cep_rad_{}", fmt_sci(*cep));
    }
    out.push('\n');
    for (i, e) in energies_au.iter().enumerate() {
        let _ = write!(out, "{}", fmt_sci(hartree_to_ev(*e)));
        for column in columns {
            let _ = write!(out, ",{}", fmt_sci(column[i]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// 8-bit binary PGM of a scan matrix (columns = CEP). Row 0 is the highest
/// energy; values are scaled linearly from the matrix minimum to maximum.
pub fn write_scan_pgm(
    path: &Path,
    energies_au: &[f64],
    columns: &[Vec<f64>],
) -> Result<(), OutputError> {
    let height = energies_au.len();
    let width = columns.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for column in columns {
        for &v in column {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut data = Vec::with_capacity(width * height);
    for row in 0..height {
        let energy_idx = height - 1 - row;
        for column in columns {
            let v = (column[energy_idx] - lo) / span;
            data.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    write!(file, "P5\n{width} {height}\n255\n").map_err(io_err(path))?;
    file.write_all(&data).map_err(io_err(path))?;
    Ok(())
}

/// Checkpoint table of |psi(x)|^2 snapshots: first column x, one column per
/// recorded time.
pub fn write_snapshots_csv(
    path: &Path,
    config: &RunConfig,
    grid: &crate::tdse1d::Grid1D,
    snapshots: &[(f64, Vec<f64>)],
) -> Result<(), OutputError> {
    let mut out = provenance_header(config);
    out.push_str("x_au");
    for (t, _) in snapshots {
        let _ = write!(out, ",density_per_au_t_au_{}", fmt_sci(*t));
    }
    out.push('\n');
    for i in 0..grid.n_points {
        let _ = write!(out, "{}", fmt_sci(grid.position(i)));
        for (_, density) in snapshots {
            let _ = write!(out, ",{}", fmt_sci(density[i]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Release times, weights, actions and slopes per direction for one |p|.
pub fn write_slits_csv(
    path: &Path,
    config: &RunConfig,
    rows: &[(f64, f64, f64, f64, f64)], // momentum, t0, weight, action, slope
) -> Result<(), OutputError> {
    let mut out = provenance_header(config);
    out.push_str("momentum_au,release_time_au,weight_sqrt_rate,action_rad,slope_dAdt_au\n");
    for (p, t0, w, s, slope) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sci(*p),
            fmt_sci(*t0),
            fmt_sci(*w),
            fmt_sci(*s),
            fmt_sci(*slope)
        );
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Flat key = value fringe report plus a machine-readable CSV twin.
pub fn write_report(
    txt_path: &Path,
    csv_path: &Path,
    config: &RunConfig,
    label: &str,
    report: &FringeReport,
) -> Result<(), OutputError> {
    let peaks = report
        .peak_energies_ev
        .iter()
        .map(|e| fmt_sci(*e))
        .collect::<Vec<_>>()
        .join(";");
    let mut txt = provenance_header(config);
    let _ = write!(
        txt,
        "input = {label}\n\
         spacing_mean_ev = {}\n\
         visibility = {}\n\
         envelope_fringe_count = {}\n\
         subslit_separation_as = {}\n\
         peak_energies_ev = {peaks}\n",
        fmt_sci(report.spacing_mean_ev),
        fmt_sci(report.visibility),
        fmt_sci(report.envelope_fringe_count),
        fmt_sci(report.subslit_separation_as),
    );
    std::fs::write(txt_path, txt).map_err(io_err(txt_path))?;

    let mut csv = provenance_header(config);
    csv.push_str(
        "input,spacing_mean_ev,visibility,envelope_fringe_count,subslit_separation_as\n",
    );
    let _ = writeln!(
        csv,
        "{label},{},{},{},{}",
        fmt_sci(report.spacing_mean_ev),
        fmt_sci(report.visibility),
        fmt_sci(report.envelope_fringe_count),
        fmt_sci(report.subslit_separation_as),
    );
    std::fs::write(csv_path, csv).map_err(io_err(csv_path))
}

/// Parsed tabular spectrum: energies (eV) and one yield column.
#[derive(Debug)]
pub struct SpectrumTable {
    pub energies_ev: Vec<f64>,
    pub yields: Vec<f64>,
    pub header: String,
}

/// Read a spectrum CSV back; format violations name the offending line.
pub fn read_spectrum_csv(path: &Path) -> Result<SpectrumTable, OutputError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut energies = Vec::new();
    let mut yields = Vec::new();
    let mut header = String::new();
    let mut saw_columns = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.starts_with('#') {
            header.push_str(raw);
            header.push('\n');
            continue;
        }
        if !saw_columns {
            if !raw.starts_with("energy_ev,") {
                return Err(OutputError::Format {
                    path: path.display().to_string(),
                    line,
                    message: format!("expected column header starting with 'energy_ev,', got '{raw}'"),
                });
            }
            saw_columns = true;
            continue;
        }
        let mut fields = raw.split(',');
        let parse = |field: Option<&str>, what: &str| -> Result<f64, OutputError> {
            field
                .ok_or_else(|| OutputError::Format {
                    path: path.display().to_string(),
                    line,
                    message: format!("missing {what} field"),
                })?
                .parse()
                .map_err(|e| OutputError::Format {
                    path: path.display().to_string(),
                    line,
                    message: format!("bad {what}: {e}"),
                })
        };
        energies.push(parse(fields.next(), "energy")?);
        yields.push(parse(fields.next(), "yield")?);
    }
    if energies.len() < 2 {
        return Err(OutputError::Format {
            path: path.display().to_string(),
            line: text.lines().count(),
            message: "fewer than 2 data rows".into(),
        });
    }
    Ok(SpectrumTable {
        energies_ev: energies,
        yields,
        header,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = content_hash("alpha");
        assert_eq!(a, content_hash("alpha"));
        assert_ne!(a, content_hash("beta"));
        assert_eq!(a.len(), 12);
    }

    #[test]
    fn header_embeds_recoverable_config() {
        let mut config = RunConfig::default();
        config.cep = 0.75;
        config.energy_bins = 333;
        let header = provenance_header(&config);
        let recovered = config_from_header(&header).unwrap();
        assert_eq!(recovered, config);
    }

    #[test]
    fn spectrum_csv_round_trip_and_line_errors() {
        let dir = std::env::temp_dir().join("cepfringe_output_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("spec.csv");
        let config = RunConfig::default();
        let energies = vec![0.05, 0.1, 0.15];
        let yields = vec![1.0, 0.5, 0.25];
        write_spectrum_csv(&path, &config, &energies, &yields).unwrap();
        let table = read_spectrum_csv(&path).unwrap();
        assert_eq!(table.energies_ev.len(), 3);
        assert!((table.energies_ev[1] - hartree_to_ev(0.1)).abs() < 1e-8);
        assert_eq!(table.yields[2], 0.25);

        let bad = dir.join("bad.csv");
        std::fs::write(&bad, "energy_ev,yield_arb\n1.0,2.0\nnot_a_number,3\n").unwrap();
        let err = read_spectrum_csv(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":3:"), "should name line 3: {msg}");
    }

    #[test]
    fn pgm_has_correct_dimensions_and_orientation() {
        let dir = std::env::temp_dir().join("cepfringe_output_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("map.pgm");
        // 3 energies x 2 ceps; the highest energy has the largest value in
        // column 0
        let energies = vec![0.1, 0.2, 0.3];
        let columns = vec![vec![0.0, 0.5, 1.0], vec![0.25, 0.25, 0.25]];
        write_scan_pgm(&path, &energies, &columns).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header_end = bytes
            .windows(4)
            .position(|w| w == b"255\n")
            .map(|p| p + 4)
            .unwrap();
        assert!(bytes.starts_with(b"P5\n2 3\n255\n"));
        let data = &bytes[header_end..];
        assert_eq!(data.len(), 6);
        // row 0 = highest energy: column 0 value 1.0 -> 255
        assert_eq!(data[0], 255);
        // row 2 = lowest energy: column 0 value 0.0 -> 0
        assert_eq!(data[4], 0);
    }
}
