//! CSV output: the diagnostics time series and shell spectra.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{DiagnosticsRecord, ShellSpectrum};
use crate::error::{Error, Result};

pub const SERIES_HEADER: &str = "t,E,H,D,inj_E,inj_H,budget_residual_H,bound_lhs,bound_rhs";
pub const SPECTRA_HEADER: &str = "shell,E_n,H_n,Pi_E,Pi_H";

/// Full double precision (17 significant digits).
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn series_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::with_capacity(64 + records.len() * 220);
    s.push_str(SERIES_HEADER);
    s.push('\n');
    for r in records {
        let row = [r.t, r.energy, r.helicity, r.dissipation, r.inj_e, r.inj_h, r.budget_residual_h, r.bound_lhs, r.bound_rhs];
        let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn spectra_csv(spectra: &[ShellSpectrum]) -> String {
    let mut s = String::new();
    s.push_str(SPECTRA_HEADER);
    s.push('\n');
    for x in spectra {
        let _ = writeln!(s, "{},{},{},{},{}", x.shell, num(x.energy), num(x.helicity), num(x.pi_e), num(x.pi_h));
    }
    s
}

pub fn write_series(records: &[DiagnosticsRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, series_csv(records)).map_err(|e| Error::io(path, e))
}

pub fn write_spectra(spectra: &[ShellSpectrum], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, spectra_csv(spectra)).map_err(|e| Error::io(path, e))
}

/// Parses a series CSV back into records; header must match exactly.
pub fn parse_series(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(SERIES_HEADER) {
        return Err(Error::InvalidParameter("series header mismatch".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidParameter(format!("series row {}: bad number", i + 2)))?;
            if v.len() != 9 {
                return Err(Error::InvalidParameter(format!("series row {}: {} columns", i + 2, v.len())));
            }
            Ok(DiagnosticsRecord {
                t: v[0],
                energy: v[1],
                helicity: v[2],
                dissipation: v[3],
                inj_e: v[4],
                inj_h: v[5],
                budget_residual_h: v[6],
                bound_lhs: v[7],
                bound_rhs: v[8],
            })
        })
        .collect()
}
