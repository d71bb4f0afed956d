//! Output files. Nothing written here depends on wall-clock time.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use quasilin_core::discretization::io::write_field_csv;
use quasilin_core::estimates::EstimateReport;
use quasilin_core::solver::{SolveReport, SweepReport};
use quasilin_core::Field;

use crate::CliError;

/// Ordered `key = value` lines for `summary.txt`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary(pub Vec<(String, String)>);

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

pub struct OutputDir {
    root: PathBuf,
}

fn out_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

impl OutputDir {
    /// Creates the directory and checks it accepts files.
    pub fn prepare(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| out_err(root, e))?;
        let probe = root.join(".write-probe");
        File::create(&probe).map_err(|e| out_err(root, e))?;
        std::fs::remove_file(&probe).map_err(|e| out_err(&probe, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| out_err(&path, e))?;
        Ok((path, BufWriter::new(file)))
    }

    pub fn field(&self, name: &str, u: &Field) -> Result<(), CliError> {
        let (path, w) = self.create(name)?;
        write_field_csv(u, w).map_err(|e| out_err(&path, e))
    }

    fn table(&self, name: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
        let (path, w) = self.create(name)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(header).map_err(|e| out_err(&path, e))?;
        for row in rows {
            csv.write_record(&row).map_err(|e| out_err(&path, e))?;
        }
        csv.flush().map_err(|e| out_err(&path, e))
    }

    pub fn trace(&self, name: &str, rep: &SolveReport) -> Result<(), CliError> {
        let rows = rep
            .residual_trace
            .iter()
            .zip(&rep.step_lengths)
            .enumerate()
            .map(|(i, (r, s))| vec![i.to_string(), r.to_string(), s.to_string()]);
        self.table(name, &["iter", "residual_norm", "step_length"], rows)
    }

    pub fn estimates(&self, rep: &EstimateReport) -> Result<(), CliError> {
        let rows = rep.rows.iter().map(|r| {
            vec![r.id.clone(), r.lhs.to_string(), r.rhs.to_string(), r.slack.to_string(), r.pass.to_string()]
        });
        self.table("estimates.csv", &["id", "lhs", "rhs", "slack", "pass"], rows)
    }

    pub fn sweep(&self, rep: &SweepReport) -> Result<(), CliError> {
        let rows = rep
            .entries
            .iter()
            .map(|e| vec![e.level.to_string(), e.linf.to_string(), e.w1p.to_string()]);
        self.table("sweep.csv", &["level", "linf", "w1p"], rows)
    }

    pub fn fixed_point(&self, norms: &[f64], differences: &[f64]) -> Result<(), CliError> {
        let rows = norms.iter().enumerate().map(|(i, n)| {
            let d = if i == 0 { String::new() } else { differences.get(i - 1).map(f64::to_string).unwrap_or_default() };
            vec![i.to_string(), n.to_string(), d]
        });
        self.table("fixed_point.csv", &["iter", "norm_s", "difference"], rows)
    }

    pub fn summary(&self, s: &Summary) -> Result<(), CliError> {
        let (path, mut w) = self.create("summary.txt")?;
        w.write_all(s.render().as_bytes()).map_err(|e| out_err(&path, e))?;
        w.flush().map_err(|e| out_err(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_renders_in_order() {
        let mut s = Summary::default();
        s.push("threshold", 0.25);
        s.push("class", "Divergent");
        assert_eq!(s.render(), "threshold = 0.25\nclass = Divergent\n");
        assert_eq!(s.get("class"), Some("Divergent"));
        assert_eq!(s.get("nope"), None);
    }

    #[test]
    fn empty_trace_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::prepare(dir.path()).unwrap();
        let mesh = quasilin_core::discretization::build_mesh(1, 4).unwrap();
        let rep = SolveReport {
            converged: true,
            iterations: 0,
            residual_trace: Vec::new(),
            step_lengths: Vec::new(),
            field: Field::zeros(mesh),
            wall_time: std::time::Duration::ZERO,
        };
        out.trace("trace.csv", &rep).unwrap();
        let text = std::fs::read_to_string(out.path("trace.csv")).unwrap();
        assert_eq!(text, "iter,residual_norm,step_length\n");
    }

    #[test]
    fn unwritable_root_is_an_output_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        let err = OutputDir::prepare(&file.join("sub")).err().unwrap();
        assert_eq!(err.exit_code(), 4);
    }
}
