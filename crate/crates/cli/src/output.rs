use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Shortest round-trip decimal.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Lowercase alphanumeric column slug, e.g. `B1(p=2)` -> `b1_p_2`.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() || c == '.' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[S], rows: &[Vec<String>]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header.iter().map(|h| h.as_ref()))?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub logx: bool,
    pub logy: bool,
    /// Extra gnuplot lines placed before `plot`.
    pub preamble: Vec<String>,
    /// Extra plot clauses appended after the data series.
    pub extra: Vec<String>,
}

impl Plot {
    pub fn new(title: impl Into<String>, x: &str, ys: &[&str]) -> Self {
        Self {
            title: title.into(),
            x: x.to_string(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            logx: true,
            logy: true,
            preamble: Vec::new(),
            extra: Vec::new(),
        }
    }

    pub fn linear(mut self) -> Self {
        self.logx = false;
        self.logy = false;
        self
    }
}

/// Sibling `.gp` script for `csv_path`; returns its path.
pub fn write_plot(csv_path: &Path, plot: &Plot) -> Result<PathBuf, CliError> {
    let gp = csv_path.with_extension("gp");
    let name = |p: &Path| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let data = name(csv_path);
    let png = name(&csv_path.with_extension("png"));
    let mut s = String::new();
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output \"{png}\"\n"));
    s.push_str(&format!("set title \"{}\"\n", plot.title));
    s.push_str(&format!("set xlabel \"{}\"\n", plot.x));
    match (plot.logx, plot.logy) {
        (true, true) => s.push_str("set logscale xy\n"),
        (true, false) => s.push_str("set logscale x\n"),
        (false, true) => s.push_str("set logscale y\n"),
        (false, false) => {}
    }
    for line in &plot.preamble {
        s.push_str(line);
        s.push('\n');
    }
    let mut clauses: Vec<String> = plot
        .ys
        .iter()
        .map(|y| format!("\"{data}\" using \"{}\":(abs(column(\"{y}\"))) title \"{y}\" with linespoints", plot.x))
        .collect();
    clauses.extend(plot.extra.iter().cloned());
    s.push_str(&format!("plot {}\n", clauses.join(", \\\n     ")));
    fs::write(&gp, s).map_err(|e| CliError::io(&gp, e))?;
    Ok(gp)
}
