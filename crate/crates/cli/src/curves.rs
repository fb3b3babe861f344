//! S-T diagrams and isothermal entropy-change curves.

use qheat_core::gibbs::entropy;
use qheat_core::{build_spectrum, ModelSpec};
use serde::Serialize;

use crate::scenario::describe;
use crate::sweep::Grid;
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSet {
    pub x_label: String,
    pub x_unit: String,
    pub y_label: String,
    pub y_unit: String,
    pub series: Vec<Series>,
    /// Point of largest `|y|` on the first series, when reported.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremum: Option<Extremum>,
}

impl CurveSet {
    /// Strictly increasing `x` and finite values in every series.
    pub fn validate(&self) -> Result<()> {
        for s in &self.series {
            if s.x.len() != s.y.len() {
                return Err(CliError::Numerical(format!("series `{}` has ragged columns", s.label)));
            }
            if s.x.windows(2).any(|w| w[0] >= w[1] || w[0].is_nan()) {
                return Err(CliError::Numerical(format!("series `{}`: x not strictly increasing", s.label)));
            }
            if s.x.iter().chain(&s.y).any(|v| !v.is_finite()) {
                return Err(CliError::Numerical(format!("series `{}` has non-finite values", s.label)));
            }
        }
        Ok(())
    }
}

fn temperatures(grid: &Grid) -> Result<Vec<f64>> {
    grid.validate()?;
    if grid.min <= 0.0 {
        return Err(CliError::usage("temperature range must be positive"));
    }
    Ok(grid.values())
}

fn entropy_curve(model: &ModelSpec, ts: &[f64]) -> Result<Vec<f64>> {
    let spectrum = build_spectrum(model)?;
    ts.iter().map(|t| Ok(entropy(&spectrum, *t)?)).collect()
}

/// One `S(T)` series per model.
pub fn st_diagram(models: &[ModelSpec], range: &Grid) -> Result<CurveSet> {
    if models.is_empty() {
        return Err(CliError::usage("no models given"));
    }
    let ts = temperatures(range)?;
    let mut series = Vec::with_capacity(models.len());
    for model in models {
        let y = entropy_curve(model, &ts)?;
        // S is non-decreasing in T since C ≥ 0.
        if let Some(w) = y.windows(2).find(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0)) {
            return Err(CliError::Numerical(format!(
                "entropy of {} decreases from {} to {}",
                describe(model),
                w[0],
                w[1]
            )));
        }
        series.push(Series {
            label: describe(model),
            x: ts.clone(),
            y,
        });
    }
    let set = CurveSet {
        x_label: "T".into(),
        x_unit: "K".into(),
        y_label: "S".into(),
        y_unit: "k_B".into(),
        series,
        extremum: None,
    };
    set.validate()?;
    Ok(set)
}

/// `ΔS_iso(T) = S_B(T) - S_A(T)` with the grid point of largest magnitude.
pub fn delta_s_iso(model_a: &ModelSpec, model_b: &ModelSpec, range: &Grid) -> Result<CurveSet> {
    if model_a.dimension() != model_b.dimension() {
        return Err(qheat_core::Error::DimensionMismatch {
            left: model_a.dimension(),
            right: model_b.dimension(),
        }
        .into());
    }
    let ts = temperatures(range)?;
    let s_a = entropy_curve(model_a, &ts)?;
    let s_b = entropy_curve(model_b, &ts)?;
    let y: Vec<f64> = s_b.iter().zip(&s_a).map(|(b, a)| b - a).collect();
    let peak = (0..y.len()).fold(0, |best, k| if y[k].abs() > y[best].abs() { k } else { best });
    let set = CurveSet {
        x_label: "T".into(),
        x_unit: "K".into(),
        y_label: "dS_iso".into(),
        y_unit: "k_B".into(),
        series: vec![Series {
            label: format!("{} -> {}", describe(model_a), describe(model_b)),
            x: ts.clone(),
            y: y.clone(),
        }],
        extremum: Some(Extremum { x: ts[peak], y: y[peak] }),
    };
    set.validate()?;
    Ok(set)
}
