//! Comparison tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tdacm_core::metrics::metrics;
use tdacm_core::sim::TrajectoryLog;

use crate::{AppError, AppResult};

/// Error indices of one controller on one channel. The vision channel is
/// `‖e_s‖`, the force channel is `e_f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricRow {
    pub controller: String,
    pub channel: String,
    pub rmse: f64,
    pub std: f64,
    pub iae: f64,
    pub itae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricReport {
    pub scenario: String,
    pub rows: Vec<MetricRow>,
}

impl MetricReport {
    pub fn row(&self, controller: &str, channel: &str) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.controller == controller && r.channel == channel)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.rows).expect("rows serialize");
        s.push('\n');
        s
    }

    pub fn save_json(&self, path: &Path) -> AppResult<()> {
        std::fs::write(path, self.to_json()).map_err(|e| AppError::io(path, e))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(
            out,
            "{:<16} {:<8} {:>12} {:>12} {:>12} {:>12}",
            "controller", "channel", "rmse", "std", "iae", "itae"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<16} {:<8} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                r.controller, r.channel, r.rmse, r.std, r.iae, r.itae
            );
        }
        out
    }
}

/// Parses the rows of a `metrics.json`.
pub fn parse_rows(text: &str) -> AppResult<Vec<MetricRow>> {
    serde_json::from_str(text).map_err(|e| AppError::Json {
        path: "metrics".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Vision and force indices for every log. All logs must share `dt` and time stamps.
pub fn compare(logs: &[TrajectoryLog]) -> AppResult<MetricReport> {
    let first = logs
        .first()
        .ok_or_else(|| AppError::Config("nothing to compare".into()))?;
    let times = first.times();
    for log in &logs[1..] {
        if log.dt != first.dt || log.times() != times {
            return Err(AppError::Timing {
                left: first.controller.name().into(),
                right: log.controller.name().into(),
            });
        }
    }
    let mut rows = Vec::with_capacity(2 * logs.len());
    for log in logs {
        for (channel, series) in [
            ("vision", log.vision_norms()),
            ("force", log.force_errors()),
        ] {
            let m = metrics(&series, log.dt)?;
            rows.push(MetricRow {
                controller: log.controller.name().into(),
                channel: channel.into(),
                rmse: m.rmse,
                std: m.std,
                iae: m.iae,
                itae: m.itae,
            });
        }
    }
    Ok(MetricReport {
        scenario: first.scenario.clone(),
        rows,
    })
}
