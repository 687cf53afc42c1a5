//! Negative-part traces and partial-wave resummation.

use super::dense;
use super::tridiag::Tridiag;
use crate::error::{Error, Result};
use faer::Mat;
use serde::{Deserialize, Serialize};

/// tr[H]_−, or tr[φHφ]_− when a diagonal weight is given.
pub fn negative_sum(h: &Mat<f64>, weight: Option<&[f64]>) -> Result<f64> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Invalid("matrix not square".into()));
    }
    match weight {
        None => dense::negative_part_trace(h),
        Some(w) => {
            if w.len() != n {
                return Err(Error::Invalid("weight length mismatch".into()));
            }
            // rows with zero weight drop out entirely
            let keep: Vec<usize> = (0..n).filter(|&i| w[i] != 0.0).collect();
            let m = Mat::from_fn(keep.len(), keep.len(), |a, b| {
                let (i, j) = (keep[a], keep[b]);
                w[i] * h[(i, j)] * w[j]
            });
            dense::negative_part_trace(&m)
        }
    }
}

pub fn negative_sum_tridiag(t: &Tridiag, weight: Option<&[f64]>) -> f64 {
    match weight {
        None => t.negative_sum(),
        Some(w) => {
            let n = t.len();
            let d = (0..n).map(|i| w[i] * w[i] * t.d[i]).collect();
            let e = (0..n.saturating_sub(1)).map(|i| w[i] * t.e[i] * w[i + 1]).collect();
            Tridiag::new(d, e).negative_sum()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSum {
    pub total: f64,
    pub tail_estimate: f64,
    pub truncation_error: f64,
    pub last_ratio: f64,
    pub decaying: bool,
}

/// Σ_l q(2l+1)·value(l) for l = 0..=l_max, with a geometric tail from the last two terms.
pub fn channel_sum(values: &[f64], l_max: usize, spin: u8) -> ChannelSum {
    let q = spin as f64;
    let terms: Vec<f64> = values
        .iter()
        .take(l_max + 1)
        .enumerate()
        .map(|(l, v)| q * (2 * l + 1) as f64 * v)
        .collect();
    let total: f64 = terms.iter().sum();
    let k = terms.len();
    if k < 2 || terms[k - 1] == 0.0 {
        return ChannelSum { total, tail_estimate: 0.0, truncation_error: 0.0, last_ratio: 0.0, decaying: true };
    }
    let ratio = terms[k - 1] / terms[k - 2];
    if !(ratio.abs() < 1.0) {
        return ChannelSum {
            total,
            tail_estimate: f64::NAN,
            truncation_error: f64::INFINITY,
            last_ratio: ratio,
            decaying: false,
        };
    }
    let tail = terms[k - 1] * ratio / (1.0 - ratio);
    ChannelSum { total, tail_estimate: tail, truncation_error: tail.abs(), last_ratio: ratio, decaying: true }
}
