//! Deterministic CSV/JSON rendering of run results.

use std::fmt::Write as _;

use crate::simulation::{BenchmarkReport, RateStudyReport};

/// Floats render with 17 significant digits so parsing the output recovers
/// the exact bits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

/// One uniform shape for every subcommand: scalar rows keyed by
/// (method, measure), optional aligned arrays, and the resolved config.
#[derive(Debug, Clone)]
pub struct Report {
    pub kind: String,
    /// Total observations the run consumed (0 when not applicable).
    pub n: usize,
    pub replications: usize,
    pub rows: Vec<(String, String, f64)>,
    /// Named numeric arrays (e.g. a grid and its per-point means).
    pub arrays: Vec<(String, Vec<f64>)>,
    pub config_echo: String,
}

impl Report {
    pub fn new(kind: &str, n: usize, replications: usize, config_echo: String) -> Self {
        Report {
            kind: kind.to_string(),
            n,
            replications,
            rows: Vec::new(),
            arrays: Vec::new(),
            config_echo,
        }
    }

    pub fn push(&mut self, method: &str, measure: &str, value: f64) {
        self.rows.push((method.into(), measure.into(), value));
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("method,measure,value,n,replications\n");
        for (method, measure, value) in &self.rows {
            let _ = writeln!(
                out,
                "{method},{measure},{},{},{}",
                fmt_f64(*value),
                self.n,
                self.replications
            );
        }
        // arrays flatten to one row per element, indexed by position
        for (name, values) in &self.arrays {
            for (i, v) in values.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{name},[{i}],{},{},{}",
                    fmt_f64(*v),
                    self.n,
                    self.replications
                );
            }
        }
        out
    }

    fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"kind\": {},", json_string(&self.kind));
        let _ = writeln!(out, "  \"version\": {},", json_string(env!("CARGO_PKG_VERSION")));
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let _ = writeln!(out, "  \"replications\": {},", self.replications);
        out.push_str("  \"results\": {\n");
        for (i, (method, measure, value)) in self.rows.iter().enumerate() {
            let comma = if i + 1 < self.rows.len() { "," } else { "" };
            let _ = writeln!(
                out,
                "    {}: {}{comma}",
                json_string(&format!("{method}.{measure}")),
                fmt_f64(*value)
            );
        }
        out.push_str("  },\n");
        out.push_str("  \"arrays\": {\n");
        for (i, (name, values)) in self.arrays.iter().enumerate() {
            let comma = if i + 1 < self.arrays.len() { "," } else { "" };
            let items: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(
                out,
                "    {}: [{}]{comma}",
                json_string(name),
                items.join(", ")
            );
        }
        out.push_str("  },\n");
        let _ = writeln!(out, "  \"config\": {}", json_string(&self.config_echo));
        out.push_str("}\n");
        out
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn benchmark_report(report: &BenchmarkReport, echo: String, n: usize) -> Report {
    let mut out = Report::new("benchmark", n, report.replications, echo);
    for m in &report.methods {
        out.push(&m.method, "bias", m.bias);
        out.push(&m.method, "rmse", m.rmse);
        out.push(&m.method, "failures", m.failures as f64);
    }
    out
}

pub fn rate_report(report: &RateStudyReport, echo: String, reps: usize) -> Report {
    let mut out = Report::new("rate-study", 0, reps, echo);
    out.push("rate", "slope", report.slope);
    out.push("rate", "slope_se", report.slope_se);
    out.arrays.push((
        "grid".into(),
        report.n_grid.iter().map(|&n| n as f64).collect(),
    ));
    out.arrays.push(("means".into(), report.mean_ipm.clone()));
    out
}
