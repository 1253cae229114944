use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use degensemi_core::verify::EstimateReport;

use crate::CliError;

/// Metadata repeated at the top of every file.
#[derive(Clone, Debug)]
pub struct Header {
    pub config_hash: String,
    pub seed: u64,
}

impl Header {
    fn lines(&self) -> String {
        format!(
            "# degensemi {}\n# config_sha256 = {}\n# seed = {:#x}\n",
            env!("CARGO_PKG_VERSION"),
            self.config_hash,
            self.seed
        )
    }
}

/// Output directory plus the shared header.
pub struct Sink {
    dir: PathBuf,
    header: Header,
}

impl Sink {
    pub fn new(dir: &Path, header: Header) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `meta` as extra `#` lines, then `columns` and `rows`.
    pub fn csv(&self, name: &str, meta: &[String], columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut text = self.header.lines();
        for m in meta {
            text.push_str("# ");
            text.push_str(m);
            text.push('\n');
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.raw(name, &text)
    }

    pub fn raw(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// One row per point, one column per sweep parameter (first-seen order).
    pub fn report(&self, name: &str, report: &EstimateReport) -> Result<(), CliError> {
        let mut params: Vec<&str> = Vec::new();
        for p in &report.points {
            for (k, _) in &p.params {
                if !params.contains(&k.as_str()) {
                    params.push(k);
                }
            }
        }
        let mut columns = vec!["label"];
        columns.extend(&params);
        columns.extend(["measured", "bound", "ratio", "slack", "pass"]);
        let rows: Vec<Vec<String>> = report
            .points
            .iter()
            .map(|p| {
                let mut row = vec![p.label.clone()];
                for name in &params {
                    row.push(p.param(name).map(num).unwrap_or_default());
                }
                let slack = p.slack.unwrap_or(report.max_ratio);
                row.extend([
                    num(p.measured),
                    num(p.bound),
                    num(p.ratio()),
                    num(slack),
                    report.point_passes(p).to_string(),
                ]);
                row
            })
            .collect();
        self.csv(name, &report_meta(report), &columns, &rows)
    }
}

fn report_meta(report: &EstimateReport) -> Vec<String> {
    let mut meta = vec![
        format!("report = {}", report.id),
        format!("max_ratio = {}", num(report.max_ratio)),
    ];
    for (k, v) in &report.constants {
        meta.push(format!("constant {k} = {}", num(*v)));
    }
    for (k, v) in &report.axes {
        let vals: Vec<String> = v.iter().map(|&x| num(x)).collect();
        meta.push(format!("axis {k} = {}", vals.join(" ")));
    }
    for n in &report.notes {
        meta.push(format!("note: {n}"));
    }
    meta
}

/// Shortest round-trip decimal; stable across runs.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// One line per report in the order run.
#[derive(Default)]
pub struct Verdicts {
    lines: Vec<(String, bool)>,
}

impl Verdicts {
    pub fn record(&mut self, key: &str, report: &EstimateReport) {
        let mut line = format!(
            "{} {key} points={} worst_ratio={}",
            if report.passed() { "PASS" } else { "FAIL" },
            report.points.len(),
            num(report.worst_ratio())
        );
        for (k, v) in &report.constants {
            let _ = write!(line, " {k}={}", num(*v));
        }
        if let Some(p) = report.failures().next() {
            let _ = write!(line, " first_failure={}:{}/{}", p.label, num(p.measured), num(p.bound));
        }
        self.lines.push((line, report.passed()));
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|(_, ok)| *ok)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (line, _) in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        let failed = self.lines.iter().filter(|(_, ok)| !ok).count();
        let _ = writeln!(
            out,
            "{} {}/{} reports passed",
            if failed == 0 { "PASS" } else { "FAIL" },
            self.lines.len() - failed,
            self.lines.len()
        );
        out
    }
}
