//! Relative differences, mean relative error (MRE), percentile error bars
//! and the ratio/accel/ANN comparison over a test split.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accel::accel_estimate;
use crate::ann::{predict_gme, MlpModel};
use crate::dataset::DatasetRecord;
use crate::error::{Error, Result};
use crate::gme::{GmeEstimate, Method};
use crate::moments::ratio_estimate;

/// References below this GME are excluded from relative errors.
pub const EXCLUSION_THRESHOLD: f64 = 1e-6;

/// Percentiles bounding the central 68.2% of `|delta|`.
pub const LOW_PERCENTILE: f64 = 15.9;
pub const HIGH_PERCENTILE: f64 = 84.1;

/// `(gme_true - gme_pred) / gme_true`.
pub fn relative_difference(gme_true: f64, gme_pred: f64) -> Result<f64> {
    if !(gme_true >= EXCLUSION_THRESHOLD) {
        return Err(Error::NearZeroReference(gme_true));
    }
    Ok((gme_true - gme_pred) / gme_true)
}

/// Mean of `|delta|`.
pub fn mre(deltas: &[f64]) -> Result<f64> {
    if deltas.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(deltas.iter().map(|d| d.abs()).sum::<f64>() / deltas.len() as f64)
}

/// `p`-th percentile (0..=100) with linear interpolation between the closest
/// order statistics.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, p))
}

fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 15.9th and 84.1th percentiles of `abs_deltas`.
pub fn percentile_bars(abs_deltas: &[f64]) -> Result<(f64, f64)> {
    if abs_deltas.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = abs_deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((
        percentile_sorted(&sorted, LOW_PERCENTILE),
        percentile_sorted(&sorted, HIGH_PERCENTILE),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatePrediction {
    pub id: u64,
    pub gme_true: f64,
    pub gme_pred: f64,
    /// `None` for excluded states.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub q_max: usize,
    pub n_qubits: usize,
    pub mre: f64,
    pub err_low: f64,
    pub err_high: f64,
    pub n_excluded: usize,
    pub n_evaluated: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predictions: Option<Vec<StatePrediction>>,
}

impl EvalReport {
    /// Aggregates predictions; states with a reference below the exclusion
    /// threshold are counted but do not enter the MRE.
    pub fn from_predictions(
        method: Method,
        q_max: usize,
        n_qubits: usize,
        mut predictions: Vec<StatePrediction>,
        keep_predictions: bool,
    ) -> Result<Self> {
        for p in &mut predictions {
            p.delta = relative_difference(p.gme_true, p.gme_pred).ok();
        }
        let deltas: Vec<f64> = predictions.iter().filter_map(|p| p.delta).collect();
        let abs: Vec<f64> = deltas.iter().map(|d| d.abs()).collect();
        let (err_low, err_high) = percentile_bars(&abs)?;
        Ok(Self {
            method,
            q_max,
            n_qubits,
            mre: mre(&deltas)?,
            err_low,
            err_high,
            n_excluded: predictions.len() - deltas.len(),
            n_evaluated: deltas.len(),
            predictions: keep_predictions.then_some(predictions),
        })
    }
}

/// Estimate for one record by `method` at `q_max`.
pub fn estimate(record: &DatasetRecord, method: Method, q_max: usize, model: Option<&MlpModel>) -> Result<GmeEstimate> {
    if record.moments.q_max() < q_max {
        return Err(Error::ShapeMismatch {
            expected: q_max,
            got: record.moments.q_max(),
        });
    }
    let seq = record.moments.truncated(q_max)?;
    match method {
        Method::Ratio => Ok(ratio_estimate(&seq)),
        Method::Accel => accel_estimate(&seq),
        Method::Ann => {
            let model = model.ok_or_else(|| Error::InvalidInput("ann evaluation needs a model".into()))?;
            if model.input_width() + 1 != q_max {
                return Err(Error::ShapeMismatch {
                    expected: q_max,
                    got: model.input_width() + 1,
                });
            }
            predict_gme(model, &seq)
        }
        Method::Reference => Ok(GmeEstimate::new(record.gme, Method::Reference, None)),
    }
}

/// Report for one method and truncation over `records`.
pub fn evaluate_method(
    records: &[DatasetRecord],
    method: Method,
    q_max: usize,
    model: Option<&MlpModel>,
    keep_predictions: bool,
) -> Result<EvalReport> {
    let n_qubits = records.first().ok_or(Error::EmptyInput)?.n_qubits();
    let predictions = records
        .par_iter()
        .map(|r| {
            Ok(StatePrediction {
                id: r.id,
                gme_true: r.gme,
                gme_pred: estimate(r, method, q_max, model)?.value,
                delta: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_predictions(method, q_max, n_qubits, predictions, keep_predictions)
}

/// One report per `(method, q_max)`: ratio and accel always, ANN wherever
/// `models` has a network for that `q_max`.
pub fn compare_methods(
    records: &[DatasetRecord],
    models: &BTreeMap<usize, MlpModel>,
    q_range: std::ops::RangeInclusive<usize>,
    keep_predictions: bool,
) -> Result<Vec<EvalReport>> {
    let mut reports = Vec::new();
    for q_max in q_range {
        reports.push(evaluate_method(records, Method::Ratio, q_max, None, keep_predictions)?);
        reports.push(evaluate_method(records, Method::Accel, q_max, None, keep_predictions)?);
        if let Some(model) = models.get(&q_max) {
            reports.push(evaluate_method(records, Method::Ann, q_max, Some(model), keep_predictions)?);
        }
    }
    Ok(reports)
}

/// CSV table `method,n_qubits,q_max,mre,err_low,err_high,n_excluded,n_evaluated`.
pub fn write_report_csv(path: &Path, reports: &[EvalReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "n_qubits", "q_max", "mre", "err_low", "err_high", "n_excluded", "n_evaluated"])?;
    for r in reports {
        w.write_record([
            r.method.to_string(),
            r.n_qubits.to_string(),
            r.q_max.to_string(),
            r.mre.to_string(),
            r.err_low.to_string(),
            r.err_high.to_string(),
            r.n_excluded.to_string(),
            r.n_evaluated.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-state dump `id,gme_true,gme_pred,delta` (empty delta when excluded).
pub fn write_predictions_csv(path: &Path, predictions: &[StatePrediction]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "gme_true", "gme_pred", "delta"])?;
    for p in predictions {
        w.write_record([
            p.id.to_string(),
            p.gme_true.to_string(),
            p.gme_pred.to_string(),
            p.delta.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares `c` in `mre ≈ c / q_max`.
pub fn fit_inverse_q(points: &[(usize, f64)]) -> Option<f64> {
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(q, m)| {
        let x = 1.0 / q as f64;
        (n + x * m, d + x * x)
    });
    (den > 0.0).then(|| num / den)
}
