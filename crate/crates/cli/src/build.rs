use defq::fedosov::{build_fedosov, ChartData};
use serde_json::Value;

use crate::report::{Check, RunReport};
use crate::{CliError, Outcome};

/// Builds the Fedosov connection for a chart file and reports the curvature
/// residual per degree and the normalization of the correction.
pub fn cmd_build(chart: &[u8], degree: i32, jet_order: Option<usize>) -> Result<Outcome, CliError> {
    let mut v: Value = serde_json::from_slice(chart)?;
    if let Some(j) = jet_order {
        v.as_object_mut().ok_or_else(|| CliError::Input("chart must be a json object".into()))?.insert("J".into(), j.into());
    }
    let chart_data = ChartData::from_json(&v)?;
    let connection = build_fedosov(&chart_data, degree)?;
    let mut report = RunReport::new("build", chart)
        .param("n", chart_data.n)
        .param("N", chart_data.size)
        .param("D", degree)
        .param("J", chart_data.jet);
    let residuals = connection.curvature_residuals().map_err(|e| CliError::Input(e.to_string()))?;
    for (d, count) in residuals {
        let witness = (count > 0).then(|| format!("{count} nonzero coefficients"));
        report.checks.push(Check::exact(&format!("curvature_degree_{d}"), witness));
    }
    let gauge = (!connection.gauge_holds()).then(|| "delta_inv(r) != 0".to_string());
    report.checks.push(Check::exact("gauge_delta_inv_r", gauge));
    report = report.param("correction_is_zero", connection.correction().is_zero());
    Ok(Outcome { exit: report.exit_code(), text: report.to_json() })
}
