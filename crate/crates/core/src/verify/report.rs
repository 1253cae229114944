//! Measured-versus-bound records produced by every sweep.

use std::collections::BTreeMap;

/// One measured quantity with the bound it must respect.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportPoint {
    /// Which inequality the point belongs to, e.g. `"resolvent"` or `"holdout"`.
    pub label: String,
    /// Sweep coordinates such as `theta`, `mag`, `t`, `b`, `eps`.
    pub params: Vec<(String, f64)>,
    pub measured: f64,
    pub bound: f64,
    /// Overrides the report's `max_ratio` for this point.
    pub slack: Option<f64>,
}

impl ReportPoint {
    pub fn new(label: &str, params: Vec<(String, f64)>, measured: f64, bound: f64) -> Self {
        Self {
            label: label.to_string(),
            params,
            measured,
            bound,
            slack: None,
        }
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = Some(slack);
        self
    }

    /// `measured / bound`; `0` when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.measured == 0.0 && self.bound >= 0.0 {
            0.0
        } else {
            self.measured / self.bound
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    pub fn passes(&self, max_ratio: f64) -> bool {
        let r = self.ratio();
        r.is_finite() && r <= max_ratio
    }
}

/// Outcome of one estimate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub id: String,
    /// Sweep axes in insertion order.
    pub axes: Vec<(String, Vec<f64>)>,
    /// Fitted or measured constants (`d0`, `d1`, `K`, `alpha`, `R`, …).
    pub constants: BTreeMap<String, f64>,
    pub points: Vec<ReportPoint>,
    /// Largest admissible `measured/bound` ratio.
    pub max_ratio: f64,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub fn new(id: &str, max_ratio: f64, seed: u64) -> Self {
        Self {
            id: id.to_string(),
            axes: Vec::new(),
            constants: BTreeMap::new(),
            points: Vec::new(),
            max_ratio,
            seed,
            notes: Vec::new(),
        }
    }

    pub fn add_axis(&mut self, name: &str, values: Vec<f64>) {
        self.axes.push((name.to_string(), values));
    }

    pub fn set_constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    pub fn push(&mut self, point: ReportPoint) {
        self.points.push(point);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Whether a point respects its own slack, or `max_ratio` when it has none.
    pub fn point_passes(&self, p: &ReportPoint) -> bool {
        p.passes(p.slack.unwrap_or(self.max_ratio))
    }

    /// Pass iff every ratio is finite and within its slack.
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| self.point_passes(p))
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportPoint> {
        self.points.iter().filter(|p| !self.point_passes(p))
    }

    pub fn points_labelled<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a ReportPoint> {
        self.points.iter().filter(move |p| p.label == label)
    }

    /// Largest ratio over all points.
    pub fn worst_ratio(&self) -> f64 {
        self.points.iter().map(ReportPoint::ratio).fold(0.0, f64::max)
    }

    /// Appends all points and constants of `other`, prefixing constant names.
    pub fn absorb(&mut self, prefix: &str, other: EstimateReport) {
        for (k, v) in other.constants {
            self.constants.insert(format!("{prefix}{k}"), v);
        }
        self.points.extend(other.points);
        self.notes.extend(other.notes);
    }
}
