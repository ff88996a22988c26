use rayon::prelude::*;

use super::approx::Method;
use super::model::FieldRom;
use super::pod::Truncation;
use crate::error::{Error, Result};
use crate::oracle::SnapshotDataset;

/// Mean held-out error of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub field: String,
    pub method: Method,
    pub mean_error: f64,
    /// Relative L2 error of every snapshot when it was held out.
    pub errors: Vec<f64>,
}

/// Consecutive folds: the first `M mod k` folds get one extra snapshot.
pub fn consecutive_folds(m: usize, k: usize) -> Result<Vec<std::ops::Range<usize>>> {
    if k < 2 || k > m {
        return Err(Error::InvalidInput(format!(
            "k-fold needs 2 ≤ k ≤ M, got k={k}, M={m}"
        )));
    }
    let (base, extra) = (m / k, m % k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        out.push(start..start + len);
        start += len;
    }
    Ok(out)
}

/// `‖ŝ − s‖₂ / ‖s‖₂`; the absolute error when `s` vanishes.
pub fn relative_l2(pred: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = pred
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = truth.iter().map(|b| b * b).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// k-fold cross-validation of every field of `ds` over consecutive folds.
/// Each fold retrains POD and the approximant on the remaining snapshots.
pub fn kfold_cv(
    ds: &SnapshotDataset,
    method: Method,
    k: usize,
    truncation: Truncation,
) -> Result<Vec<CvResult>> {
    let folds: Vec<Vec<usize>> = consecutive_folds(ds.n_snapshots(), k)?
        .into_iter()
        .map(|r| r.collect())
        .collect();
    cv_with_folds(ds, &folds, method, truncation)
}

/// Cross-validation over explicit held-out index sets, which must
/// partition the snapshots.
pub fn cv_with_folds(
    ds: &SnapshotDataset,
    folds: &[Vec<usize>],
    method: Method,
    truncation: Truncation,
) -> Result<Vec<CvResult>> {
    ds.validate()?;
    let m = ds.n_snapshots();
    let mut seen = vec![false; m];
    for &j in folds.iter().flatten() {
        if j >= m || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidInput(
                "folds must partition the snapshots".into(),
            ));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidInput(
            "folds must partition the snapshots".into(),
        ));
    }
    let per_fold: Vec<Vec<Vec<(usize, f64)>>> = folds
        .par_iter()
        .map(|fold| {
            let train: Vec<usize> = (0..m).filter(|j| !fold.contains(j)).collect();
            let sub = ds.select(&train);
            sub.fields
                .iter()
                .zip(&ds.fields)
                .map(|((name, s), (_, full))| {
                    let rom =
                        FieldRom::train(name, s, &sub.params, &ds.bounds, method, truncation)?;
                    Ok(fold
                        .iter()
                        .map(|&j| {
                            let pred = rom.predict(&ds.params[j]);
                            (j, relative_l2(pred.as_slice(), full.column(j).as_slice()))
                        })
                        .collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(ds
        .fields
        .iter()
        .enumerate()
        .map(|(f, (name, _))| {
            let mut errors = vec![0.0; m];
            for fold in &per_fold {
                for &(j, e) in &fold[f] {
                    errors[j] = e;
                }
            }
            CvResult {
                field: name.clone(),
                method,
                mean_error: errors.iter().sum::<f64>() / m as f64,
                errors,
            }
        })
        .collect())
}

/// Rows `field,method,mean_error,best` for several methods; `best` marks the
/// lowest error per field.
pub fn cv_report_csv(results: &[CvResult]) -> String {
    let mut out = String::from("field,method,mean_error,best\n");
    for r in results {
        let best = results
            .iter()
            .filter(|o| o.field == r.field)
            .all(|o| r.mean_error <= o.mean_error);
        out.push_str(&format!(
            "{},{},{:.6e},{}\n",
            r.field,
            r.method,
            r.mean_error,
            u8::from(best)
        ));
    }
    out
}
