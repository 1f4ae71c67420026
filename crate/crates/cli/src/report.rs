//! Report types and their JSON and CSV forms.

use std::path::Path;

use anyhow::Context;
use dispersolve::estimates::EnergyResidual;
use dispersolve::{ContractionLog, ExistenceBudget, InequalityVerdict, NormReport};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct NamedVerdict {
    pub name: String,
    #[serde(flatten)]
    pub verdict: InequalityVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormSample {
    pub t: f64,
    #[serde(flatten)]
    pub norms: NormReport,
}

/// Time integrals of high seminorms; finite values witness the smoothing
/// of `l` derivatives.
#[derive(Debug, Clone, Serialize)]
pub struct Smoothing {
    /// `int_0^T ||D^{2l+1} u||^2 dt`
    pub order_2l_plus_1: f64,
    /// `int_0^T ||D^{3l+1} u||^2 dt`
    pub order_3l_plus_1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub converged: bool,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub budget: ExistenceBudget,
    /// One log per Picard window; a single entry for global runs.
    pub contraction: Vec<ContractionLog>,
    pub norm_series: Vec<NormSample>,
    pub residual_series: Option<EnergyResidual>,
    pub smoothing: Option<Smoothing>,
    pub verdicts: Vec<NamedVerdict>,
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Columns `t, l2, weighted_l2, seminorm_1.., energy_residual`; the residual
/// is blank where the centered time difference is undefined.
pub fn write_series_csv(dir: &Path, report: &RunReport) -> anyhow::Result<()> {
    let path = dir.join("series.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    let orders = report.norm_series.first().map_or(0, |s| s.norms.seminorms.len());
    let mut header = vec!["t".to_string(), "l2".into(), "weighted_l2".into()];
    header.extend((1..=orders).map(|j| format!("seminorm_{j}")));
    header.push("energy_residual".into());
    w.write_record(&header)?;
    for (m, s) in report.norm_series.iter().enumerate() {
        let mut row = vec![s.t.to_string(), s.norms.l2.to_string(), s.norms.weighted_l2.to_string()];
        row.extend(s.norms.seminorms.iter().map(|v| v.to_string()));
        let residual = report
            .residual_series
            .as_ref()
            .and_then(|r| m.checked_sub(1).and_then(|i| r.values.get(i)))
            .filter(|_| m + 1 < report.norm_series.len());
        row.push(residual.map_or(String::new(), |v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
