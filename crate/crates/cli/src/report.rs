//! Deterministic report files: JSON for single records, CSV for tables,
//! each embedding the fully resolved config for provenance.

use serde::Serialize;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Round to 12 significant digits before formatting, so that quadrature
/// noise below the certification tolerances does not leak into reports,
/// then print the shortest round-tripping decimal.
pub fn sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let m = v.abs().log10().floor();
    let s = 10f64.powf(11.0 - m);
    (v * s).round() / s
}

/// Formatting for computed values: "1.0", "0.333333333333".
pub fn num(v: f64) -> String {
    format!("{:?}", sig(v))
}

/// Formatting for input parameters: "1", "0.5" (no trailing ".0").
pub fn input(v: f64) -> String {
    format!("{v}")
}

pub struct ReportWriter {
    dir: PathBuf,
    pub plot_data: bool,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    config: &'a C,
    result: &'a R,
}

impl ReportWriter {
    pub fn new(dir: &str, plot_data: bool) -> io::Result<Self> {
        let dir = Path::new(dir).to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(ReportWriter { dir, plot_data })
    }

    pub fn json<C: Serialize, R: Serialize>(
        &self,
        name: &str,
        config: &C,
        result: &R,
    ) -> io::Result<PathBuf> {
        let path = self.dir.join(format!("{name}.json"));
        let body = serde_json::to_string_pretty(&Envelope { config, result })
            .map_err(io::Error::other)?;
        fs::write(&path, body + "\n")?;
        Ok(path)
    }

    /// CSV with a leading `# config:` comment, a header row, and the
    /// given pre-formatted rows.
    pub fn csv<C: Serialize>(
        &self,
        name: &str,
        config: &C,
        header: &str,
        rows: &[String],
    ) -> io::Result<PathBuf> {
        let path = self.dir.join(format!("{name}.csv"));
        let cfg = serde_json::to_string(config).map_err(io::Error::other)?;
        let mut body = format!("# config: {cfg}\n{header}\n");
        for row in rows {
            body.push_str(row);
            body.push('\n');
        }
        fs::write(&path, body)?;
        Ok(path)
    }

    /// Two-column x/y data for external plotting, emitted only when
    /// requested.
    pub fn plot(&self, name: &str, points: &[(f64, f64)]) -> io::Result<Option<PathBuf>> {
        if !self.plot_data {
            return Ok(None);
        }
        let path = self.dir.join(format!("{name}_plot.csv"));
        let mut body = String::from("x,y\n");
        for &(x, y) in points {
            body.push_str(&format!("{},{}\n", num(x), num(y)));
        }
        fs::write(&path, body)?;
        Ok(Some(path))
    }
}
