//! Polynomial angle-from-voltage calibration and usable-range extraction.
//!
//! Models map voltage to angle. The fit variable is `x = (v - v_center) / v_scale`
//! with `v_center` the mean voltage and `v_scale` half the voltage range, so
//! `x ∈ [-1, 1]` over most of the data and the Vandermonde system stays well
//! conditioned. The least-squares problem is solved by Householder QR.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::ResponseCurve;

pub const DEFAULT_ORDER: usize = 5;
pub const DEFAULT_MIN_SLOPE: f64 = 0.01;

/// Relative size of the smallest R diagonal below which the fit is rejected.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct CalibrationModel {
    order: usize,
    coeffs: Vec<f64>,
    v_center: f64,
    v_scale: f64,
    v_domain: (f64, f64),
    rmse_deg: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    order: usize,
    v_center: f64,
    v_scale: f64,
    v_lo: f64,
    v_hi: f64,
    rmse_deg: f64,
    /// Ascending powers of the normalized voltage.
    coeffs: Vec<f64>,
}

impl TryFrom<RawModel> for CalibrationModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        CalibrationModel::from_parts(
            raw.order,
            raw.coeffs,
            raw.v_center,
            raw.v_scale,
            (raw.v_lo, raw.v_hi),
            raw.rmse_deg,
        )
    }
}

impl From<CalibrationModel> for RawModel {
    fn from(m: CalibrationModel) -> Self {
        RawModel {
            order: m.order,
            v_center: m.v_center,
            v_scale: m.v_scale,
            v_lo: m.v_domain.0,
            v_hi: m.v_domain.1,
            rmse_deg: m.rmse_deg,
            coeffs: m.coeffs,
        }
    }
}

impl CalibrationModel {
    pub fn from_parts(
        order: usize,
        coeffs: Vec<f64>,
        v_center: f64,
        v_scale: f64,
        v_domain: (f64, f64),
        rmse_deg: f64,
    ) -> Result<Self> {
        if coeffs.len() != order + 1 {
            return Err(Error::invalid(
                "coeffs",
                format!("{} coefficients for order {order}", coeffs.len()),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !v_center.is_finite() {
            return Err(Error::invalid("coeffs", "non-finite value"));
        }
        if !(v_scale > 0.0 && v_scale.is_finite()) {
            return Err(Error::invalid("v_scale", format!("{v_scale} must be positive")));
        }
        if !(v_domain.0 < v_domain.1) {
            return Err(Error::invalid(
                "v_domain",
                format!("[{}, {}] is empty", v_domain.0, v_domain.1),
            ));
        }
        if !(rmse_deg >= 0.0) {
            return Err(Error::invalid("rmse_deg", format!("{rmse_deg} must be >= 0")));
        }
        Ok(Self {
            order,
            coeffs,
            v_center,
            v_scale,
            v_domain,
            rmse_deg,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn v_center(&self) -> f64 {
        self.v_center
    }
    pub fn v_scale(&self) -> f64 {
        self.v_scale
    }
    pub fn v_domain(&self) -> (f64, f64) {
        self.v_domain
    }
    pub fn rmse_deg(&self) -> f64 {
        self.rmse_deg
    }

    /// Polynomial value at `v` with no domain check.
    fn eval(&self, v: f64) -> f64 {
        let x = (v - self.v_center) / self.v_scale;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc.mul_add(x, c))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("calibration model serializes")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_owned(),
        })
    }
}

pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Least-squares fit of angle as a polynomial of voltage.
pub fn fit_angle_model(curve: &ResponseCurve, order: usize) -> Result<CalibrationModel> {
    let n = curve.len();
    let ncoef = order + 1;
    if n < ncoef {
        return Err(Error::Underdetermined {
            samples: n,
            coeffs: ncoef,
        });
    }
    let volts: Vec<f64> = curve.voltages().collect();
    let angles: Vec<f64> = curve.angles().collect();
    let v_lo = volts.iter().copied().fold(f64::INFINITY, f64::min);
    let v_hi = volts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(v_hi > v_lo) {
        return Err(Error::DegenerateInput(format!(
            "voltage range is zero (all samples at {v_lo} V)"
        )));
    }
    let v_center = volts.iter().sum::<f64>() / n as f64;
    let v_scale = 0.5 * (v_hi - v_lo);

    let design = DMatrix::from_fn(n, ncoef, |i, j| ((volts[i] - v_center) / v_scale).powi(j as i32));
    let qr = design.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let diag_min = r.diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    let ratio = if diag_max > 0.0 { diag_min / diag_max } else { 0.0 };
    if ratio < RANK_TOLERANCE {
        return Err(Error::Conditioning { ratio });
    }
    let mut rhs = DVector::from_column_slice(&angles);
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, ncoef).into_owned();
    let coeffs = r.solve_upper_triangular(&top).ok_or(Error::Conditioning { ratio })?;

    let mut model = CalibrationModel::from_parts(
        order,
        coeffs.iter().copied().collect(),
        v_center,
        v_scale,
        (v_lo, v_hi),
        0.0,
    )?;
    model.rmse_deg = rmse(&model, curve)?;
    Ok(model)
}

/// Angle for voltage `v`; `v` must lie inside the closed fit domain.
pub fn predict_angle(model: &CalibrationModel, v: f64) -> Result<f64> {
    let (lo, hi) = model.v_domain;
    if !(lo..=hi).contains(&v) {
        return Err(Error::Extrapolation { voltage: v, lo, hi });
    }
    Ok(model.eval(v))
}

/// Root-mean-square angle residual of `model` over `curve`.
pub fn rmse(model: &CalibrationModel, curve: &ResponseCurve) -> Result<f64> {
    let mut sum = 0.0;
    for s in curve.samples() {
        let r = predict_angle(model, s.voltage_v)? - s.angle_deg;
        sum += r * r;
    }
    Ok((sum / curve.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsableRange {
    pub q_lo: f64,
    pub q_hi: f64,
    pub delta_v: f64,
}

/// Longest run of consecutive samples whose every step rises with slope at
/// least `min_slope` V/deg. Ties go to the larger voltage span, then to the
/// smaller starting angle.
pub fn usable_range(curve: &ResponseCurve, min_slope: f64) -> Result<UsableRange> {
    if curve.len() < 2 {
        return Err(Error::invalid("curve", "usable range needs at least two samples"));
    }
    if !(min_slope > 0.0) {
        return Err(Error::invalid("min_slope", format!("{min_slope} must be positive")));
    }
    let s = curve.samples();
    let qualifies = |i: usize| {
        let dv = s[i + 1].voltage_v - s[i].voltage_v;
        dv > 0.0 && dv / (s[i + 1].angle_deg - s[i].angle_deg) >= min_slope
    };

    let mut best: Option<UsableRange> = None;
    let mut i = 0;
    while i + 1 < s.len() {
        if !qualifies(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < s.len() && qualifies(i) {
            i += 1;
        }
        let run = UsableRange {
            q_lo: s[start].angle_deg,
            q_hi: s[i].angle_deg,
            delta_v: s[i].voltage_v - s[start].voltage_v,
        };
        let better = match best {
            None => true,
            Some(b) => {
                let (len, best_len) = (run.q_hi - run.q_lo, b.q_hi - b.q_lo);
                len > best_len || (len == best_len && run.delta_v > b.delta_v)
            }
        };
        if better {
            best = Some(run);
        }
    }
    best.ok_or(Error::EmptyRange)
}
