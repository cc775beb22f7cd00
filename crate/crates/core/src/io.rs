//! CSV ingestion and emission.
//!
//! Dialect: comma separated, `.` decimal point, mandatory header, lines
//! starting with `#` skipped. Numbers are written in shortest round-trip form,
//! so writing a file, reading it back and writing again reproduces it byte for
//! byte. Writes go to a temporary file in the target directory and are renamed
//! into place.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::PeakList;
use crate::response::{Spectrum, SpectrumMeta, ValueKind};

pub const FREQUENCY: &str = "frequency_Hz";
pub const RE: &str = "re";
pub const IM: &str = "im";
pub const CURRENT: &str = "current_A";
pub const TEMPERATURE: &str = "temperature_K";
pub const POWER: &str = "power_dBm";
pub const GAMMA: &str = "gamma_m_Hz";
pub const PEAK: &str = "peak_Hz";

struct Table {
    path: std::path::PathBuf,
    columns: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let columns = reader
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let rows = reader.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Table {
            path: path.to_path_buf(),
            columns,
            rows,
        })
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.columns.get(name).copied().ok_or_else(|| Error::Schema {
            path: self.path.clone(),
            column: name.to_string(),
        })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.columns.get(name).copied()
    }

    fn row_error(&self, row: usize, message: impl Into<String>) -> Error {
        Error::Row {
            path: self.path.clone(),
            row: row + 1,
            message: message.into(),
        }
    }

    /// Finite number in data row `row` (0-based), column `col`.
    fn number(&self, row: usize, col: usize, name: &str) -> Result<f64> {
        let text = self.rows[row].get(col).unwrap_or("");
        let v: f64 = text
            .parse()
            .map_err(|_| self.row_error(row, format!("{name}: cannot parse {text:?} as a number")))?;
        if !v.is_finite() {
            return Err(self.row_error(row, format!("{name}: value {text} is not finite")));
        }
        Ok(v)
    }

    fn column(&self, col: usize, name: &str, rows: &[usize]) -> Result<Vec<f64>> {
        rows.iter().map(|&r| self.number(r, col, name)).collect()
    }

    /// The single value of an optional meta column over `rows`.
    fn constant(&self, name: &str, rows: &[usize]) -> Result<Option<f64>> {
        let Some(col) = self.optional(name) else {
            return Ok(None);
        };
        let values = self.column(col, name, rows)?;
        let first = values[0];
        if let Some(k) = values.iter().position(|&v| v != first) {
            return Err(self.row_error(rows[k], format!("{name} differs within one spectrum")));
        }
        Ok(Some(first))
    }

    fn spectrum(&self, rows: &[usize]) -> Result<Spectrum> {
        if rows.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let f_col = self.require(FREQUENCY)?;
        let re_col = self.require(RE)?;
        let im_col = self.optional(IM);
        let mut points = Vec::with_capacity(rows.len());
        for &r in rows {
            let f = self.number(r, f_col, FREQUENCY)?;
            let re = self.number(r, re_col, RE)?;
            let im = match im_col {
                Some(c) => self.number(r, c, IM)?,
                None => 0.0,
            };
            points.push((f, Complex64::new(re, im)));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut duplicates: Vec<f64> = points
            .windows(2)
            .filter(|w| w[0].0 == w[1].0)
            .map(|w| w[0].0)
            .collect();
        duplicates.dedup();
        if !duplicates.is_empty() {
            return Err(Error::DuplicateFrequencies {
                path: self.path.clone(),
                frequencies: duplicates,
            });
        }
        let kind = if im_col.is_some() {
            ValueKind::Complex
        } else {
            ValueKind::RealOnly
        };
        let (f, v): (Vec<f64>, Vec<Complex64>) = points.into_iter().unzip();
        let meta = SpectrumMeta {
            current: self.constant(CURRENT, rows)?,
            temperature: self.constant(TEMPERATURE, rows)?,
            power: self.constant(POWER, rows)?,
        };
        Ok(Spectrum::new(f, v, kind)?.with_meta(meta))
    }
}

/// One spectrum with columns frequency_Hz, re and optionally im, current_A,
/// temperature_K, power_dBm. Rows are sorted by frequency.
pub fn load_spectrum_csv(path: &Path) -> Result<Spectrum> {
    let table = Table::read(path)?;
    let rows: Vec<usize> = (0..table.rows.len()).collect();
    table.spectrum(&rows)
}

/// A long-format sweep: one spectrum per distinct current_A, in order of
/// increasing current.
pub fn load_sweep_csv(path: &Path) -> Result<Vec<Spectrum>> {
    let table = Table::read(path)?;
    let c = table.require(CURRENT)?;
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for r in 0..table.rows.len() {
        let i = table.number(r, c, CURRENT)?;
        match groups.iter_mut().find(|(v, _)| *v == i) {
            Some((_, rows)) => rows.push(r),
            None => groups.push((i, vec![r])),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    groups.iter().map(|(_, rows)| table.spectrum(rows)).collect()
}

/// Linewidth data sorted by temperature, with warnings about points the
/// temperature model does not cover.
#[derive(Debug, Clone, PartialEq)]
pub struct LinewidthData {
    pub points: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Columns temperature_K and gamma_m_Hz.
pub fn load_linewidth_csv(path: &Path) -> Result<LinewidthData> {
    let table = Table::read(path)?;
    let t_col = table.require(TEMPERATURE)?;
    let g_col = table.require(GAMMA)?;
    let mut points = Vec::with_capacity(table.rows.len());
    for r in 0..table.rows.len() {
        let t = table.number(r, t_col, TEMPERATURE)?;
        let g = table.number(r, g_col, GAMMA)?;
        if t < 0.0 {
            return Err(table.row_error(r, format!("negative temperature {t} K")));
        }
        if g < 0.0 {
            return Err(table.row_error(r, format!("negative linewidth {g} Hz")));
        }
        points.push((t, g));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let hot = points.iter().filter(|(t, _)| *t > 1.0).count();
    let warnings = if hot > 0 {
        vec![format!(
            "{hot} point(s) above 1 K: the TLS linewidth model is fitted below 1 K only and excludes them"
        )]
    } else {
        Vec::new()
    };
    Ok(LinewidthData { points, warnings })
}

/// Long-format peak list with columns current_A and peak_Hz.
pub fn load_peaks_csv(path: &Path) -> Result<PeakList> {
    let table = Table::read(path)?;
    let c = table.require(CURRENT)?;
    let p = table.require(PEAK)?;
    let mut out: PeakList = Vec::new();
    for r in 0..table.rows.len() {
        let i = table.number(r, c, CURRENT)?;
        let f = table.number(r, p, PEAK)?;
        match out.iter_mut().find(|(v, _)| *v == i) {
            Some((_, peaks)) => peaks.push(f),
            None => out.push((i, vec![f])),
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, peaks) in &mut out {
        peaks.sort_by(f64::total_cmp);
    }
    Ok(out)
}

/// Renders comments, header and rows in the CSV dialect above.
pub fn csv_string(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut out = Vec::new();
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    {
        let mut w = csv::WriterBuilder::new().from_writer(&mut out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    String::from_utf8(out).map_err(|e| crate::error::invalid(format!("non-UTF-8 CSV output: {e}")))
}

/// Writes `header` and `rows` to `path` atomically. `comments` become leading
/// `#` lines.
pub fn write_csv(path: &Path, comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_text(path, &csv_string(comments, header, rows)?)
}

fn num(v: f64) -> String {
    v.to_string()
}

fn spectrum_rows(s: &Spectrum, header: &[&str]) -> Vec<Vec<String>> {
    s.frequencies()
        .iter()
        .zip(s.values())
        .map(|(&f, v)| {
            header
                .iter()
                .map(|&h| match h {
                    CURRENT => num(s.meta.current.unwrap_or_default()),
                    TEMPERATURE => num(s.meta.temperature.unwrap_or_default()),
                    POWER => num(s.meta.power.unwrap_or_default()),
                    FREQUENCY => num(f),
                    RE => num(v.re),
                    _ => num(v.im),
                })
                .collect()
        })
        .collect()
}

fn spectrum_header(s: &Spectrum, with_current: bool) -> Vec<&'static str> {
    let mut h = Vec::new();
    if with_current || s.meta.current.is_some() {
        h.push(CURRENT);
    }
    if s.meta.temperature.is_some() {
        h.push(TEMPERATURE);
    }
    if s.meta.power.is_some() {
        h.push(POWER);
    }
    h.extend([FREQUENCY, RE]);
    if s.kind == ValueKind::Complex {
        h.push(IM);
    }
    h
}

pub fn write_spectrum_csv(path: &Path, s: &Spectrum, comments: &[String]) -> Result<()> {
    let header = spectrum_header(s, false);
    write_csv(path, comments, &header, &spectrum_rows(s, &header))
}

/// Long-format sweep; every spectrum must carry the same columns.
pub fn write_sweep_csv(path: &Path, sweep: &[Spectrum], comments: &[String]) -> Result<()> {
    let Some(first) = sweep.first() else {
        return write_csv(path, comments, &[CURRENT, FREQUENCY, RE, IM], &[]);
    };
    let header = spectrum_header(first, true);
    let mut rows = Vec::new();
    for s in sweep {
        if spectrum_header(s, true) != header {
            return Err(crate::error::invalid("sweep spectra carry different columns"));
        }
        rows.extend(spectrum_rows(s, &header));
    }
    write_csv(path, comments, &header, &rows)
}

pub fn write_linewidth_csv(path: &Path, points: &[(f64, f64)], comments: &[String]) -> Result<()> {
    let rows: Vec<Vec<String>> = points.iter().map(|&(t, g)| vec![num(t), num(g)]).collect();
    write_csv(path, comments, &[TEMPERATURE, GAMMA], &rows)
}

pub fn write_peaks_csv(path: &Path, peaks: &PeakList, comments: &[String]) -> Result<()> {
    let rows: Vec<Vec<String>> = peaks
        .iter()
        .flat_map(|(i, ps)| ps.iter().map(move |&f| vec![num(*i), num(f)]))
        .collect();
    write_csv(path, comments, &[CURRENT, PEAK], &rows)
}

/// Creates `path` with exactly `contents`, atomically.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Opens `path` for reading, mapping a missing file to an I/O error that
/// names it.
pub fn ensure_exists(path: &Path) -> Result<()> {
    File::open(path).map(|_| ()).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}
