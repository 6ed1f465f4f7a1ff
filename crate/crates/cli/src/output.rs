//! File writers. Floating-point columns use 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use tdras::ObservableRecord;

use crate::CliError;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// `t,energy,norm,rho0,n1..nM`.
pub fn series_csv(records: &[ObservableRecord], n_orbitals: usize) -> String {
    let mut s = String::from("t,energy,norm,rho0");
    for k in 1..=n_orbitals {
        let _ = write!(s, ",n{k}");
    }
    s.push('\n');
    for r in records {
        let _ = write!(s, "{},{},{},{}", float(r.t), float(r.energy), float(r.norm), float(r.rho0));
        for k in 0..n_orbitals {
            let _ = write!(s, ",{}", float(r.natural_occupations.get(k).copied().unwrap_or(0.0)));
        }
        s.push('\n');
    }
    s
}

/// `x,rho`.
pub fn density_csv(x: &[f64], rho: &[f64]) -> String {
    let mut s = String::from("x,rho\n");
    for (a, b) in x.iter().zip(rho) {
        let _ = writeln!(s, "{},{}", float(*a), float(*b));
    }
    s
}
