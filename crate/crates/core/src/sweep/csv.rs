//! CSV output of sweep rows.
//!
//! Columns: the swept parameter, the group parameter (grouped sweeps only),
//! then `g, k, delta, gamma_th_vlc, gamma_th_rf, eps_vlc, eps_rf, s_closed,
//! s_series, s_sim, s_sim_stderr, method, seed, error`. Thresholds are in
//! dB. Engines that did not run, and thresholds that an explicit erasure
//! probability replaced, leave empty cells.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::ResultRow;
use crate::error::{Error, Result};

const FIXED_COLUMNS: [&str; 14] = [
    "g",
    "k",
    "delta",
    "gamma_th_vlc",
    "gamma_th_rf",
    "eps_vlc",
    "eps_rf",
    "s_closed",
    "s_series",
    "s_sim",
    "s_sim_stderr",
    "method",
    "seed",
    "error",
];

/// `%.12g`-style formatting: 12 significant digits, fixed notation for
/// moderate exponents, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if (-5..12).contains(&exp) {
        if exp >= 0 {
            let split = exp as usize + 1;
            let (int, frac) = digits.split_at(split);
            trim_fraction(format!("{int}.{frac}"))
        } else {
            trim_fraction(format!("0.{}{digits}", "0".repeat((-exp - 1) as usize)))
        }
    } else {
        let m = trim_fraction(format!("{}.{}", &digits[..1], &digits[1..]));
        format!("{m}e{exp}")
    };
    format!("{sign}{body}")
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn cells(row: &ResultRow) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
    let mut out = vec![format_sig(row.value)];
    if let Some((_, v)) = row.group {
        out.push(format_sig(v));
    }
    let i = &row.inputs;
    let finite = |v: f64| v.is_finite().then_some(v);
    out.extend([
        format_sig(i.load_g),
        i.num_relays.to_string(),
        format_sig(i.forward_prob),
        opt(i.eps_vlc_override.is_none().then_some(i.gamma_th_vlc_db)),
        opt(i.eps_rf_override.is_none().then_some(i.gamma_th_rf_db)),
        opt(finite(row.eps_vlc)),
        opt(finite(row.eps_rf)),
        opt(row.s_closed),
        opt(row.s_series),
        opt(row.sim.map(|s| s.mean)),
        opt(row.sim.map(|s| s.stderr)),
        row.method.map(|m| m.as_str().to_string()).unwrap_or_default(),
        row.sim.map(|s| s.seed.to_string()).unwrap_or_default(),
        row.error.clone().unwrap_or_default(),
    ]);
    out
}

/// Writes `rows` to `path`. All rows must come from the same sweep.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_rows(rows, std::io::BufWriter::new(file), path)
}

/// Same as [`emit_csv`] for an arbitrary writer (reported as `-` in errors).
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    write_rows(rows, out, Path::new("-"))
}

fn write_rows<W: Write>(rows: &[ResultRow], out: W, path: &Path) -> Result<()> {
    let first = rows.first().ok_or_else(|| Error::config("no rows to write"))?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = ::csv::Writer::from_writer(out);
    let mut header = vec![first.param.as_str().to_string()];
    if let Some((g, _)) = first.group {
        header.push(g.as_str().to_string());
    }
    header.extend(FIXED_COLUMNS.iter().map(|c| c.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        if row.param != first.param || row.group.map(|g| g.0) != first.group.map(|g| g.0) {
            return Err(Error::config("rows from different sweeps cannot share a CSV"));
        }
        w.write_record(cells(row)).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One parsed CSV line keyed by column name; empty cells are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord(pub HashMap<String, String>);

impl CsvRecord {
    pub fn get(&self, column: &str) -> Option<&str> {
        self.0.get(column).map(String::as_str)
    }

    pub fn get_f64(&self, column: &str) -> Option<f64> {
        self.get(column).and_then(|v| v.parse().ok())
    }
}

/// Reads a CSV written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<CsvRecord>)> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = ::csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let map = header
            .iter()
            .zip(rec.iter())
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect();
        out.push(CsvRecord(map));
    }
    Ok((header, out))
}
