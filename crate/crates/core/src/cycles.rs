//! Four-stroke Carnot, Stirling and Otto cycles.
//!
//! `q_in` and `q_out` are the signed heats exchanged with the hot and the
//! cold bath. The regenerator strokes of the Stirling cycle are charged to
//! the bath they end at: heating towards `T_H` counts as hot-bath heat,
//! cooling towards `T_C` as cold-bath heat.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{check_temperature, entropy, log_partition_function, populations};
use crate::spectra::{build_spectrum, ModelSpec, Spectrum};
use crate::strokes::{
    adiabatic_ledger, isochoric_stroke, isothermal_stroke, solve_adiabat, AdiabatMethod,
    StrokeLedger, ENTROPY_TOLERANCE,
};

/// Relative dead band for sign calls, scaled by the cycle's energy scale.
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-12;
/// Allowed relative mismatch when a solved Carnot adiabat lands on a bath temperature.
const CLOSURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    Carnot,
    Stirling,
    Otto,
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleKind::Carnot => "carnot",
            CycleKind::Stirling => "stirling",
            CycleKind::Otto => "otto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationMode {
    HeatEngine,
    Refrigerator,
    Accelerator,
    Heater,
    Degenerate,
}

impl fmt::Display for OperationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperationMode::HeatEngine => "heat_engine",
            OperationMode::Refrigerator => "refrigerator",
            OperationMode::Accelerator => "accelerator",
            OperationMode::Heater => "heater",
            OperationMode::Degenerate => "degenerate",
        })
    }
}

fn sign(x: f64, epsilon: f64) -> i8 {
    if x > epsilon {
        1
    } else if x < -epsilon {
        -1
    } else {
        0
    }
}

/// Operation mode from the signs of net work and the hot/cold bath heats.
///
/// Values within `epsilon` of zero count as zero, and any zero makes the
/// cycle `Degenerate`.
pub fn classify_mode(w_net: f64, q_in: f64, q_out: f64, epsilon: f64) -> OperationMode {
    let epsilon = epsilon.max(0.0);
    match (sign(w_net, epsilon), sign(q_in, epsilon), sign(q_out, epsilon)) {
        (-1, 1, -1) => OperationMode::HeatEngine,
        (1, -1, 1) => OperationMode::Refrigerator,
        (1, 1, -1) => OperationMode::Accelerator,
        (1, -1, -1) => OperationMode::Heater,
        _ => OperationMode::Degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bath {
    Hot,
    Cold,
    None,
}

/// Cycle-specific solved quantities and consistency checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CycleIntermediates {
    /// Otto: start of the hot isochore.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    /// Otto: start of the cold isochore.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_passes: Option<u32>,
    /// Carnot: scale factors of the solved closing spectra relative to B and A.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closing_scale: Option<(f64, f64)>,
    /// Carnot: `ln(Z_B/Z_A)|_{T_H} - ln(Z_C/Z_D)|_{T_C}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_constraint_residual: Option<f64>,
    /// Stirling: `-T_H ln(Z_B/Z_A)|_{T_H} - T_C ln(Z_A/Z_B)|_{T_C}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_work: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub kind: CycleKind,
    pub t_hot: f64,
    pub t_cold: f64,
    pub strokes: Vec<StrokeLedger>,
    pub baths: Vec<Bath>,
    pub w_net: f64,
    pub q_in: f64,
    pub q_out: f64,
    /// Sum of the positive stroke heats.
    pub heat_absorbed: f64,
    /// Sum of the negative stroke heats.
    pub heat_released: f64,
    pub first_law_residual: f64,
    pub epsilon: f64,
    pub mode: OperationMode,
    /// Efficiency for heat engines, COP for refrigerators.
    pub figure_of_merit: Option<f64>,
    /// `-W_net / Q_in`, whatever the mode.
    pub efficiency: Option<f64>,
    pub intermediates: CycleIntermediates,
}

impl CycleReport {
    fn assemble(
        kind: CycleKind,
        t_hot: f64,
        t_cold: f64,
        legs: Vec<(StrokeLedger, Bath)>,
        intermediates: CycleIntermediates,
    ) -> Self {
        let (strokes, baths): (Vec<_>, Vec<_>) = legs.into_iter().unzip();
        let w_net = strokes.iter().map(|s| s.work).sum::<f64>();
        let bath_heat = |which: Bath| -> f64 {
            strokes
                .iter()
                .zip(&baths)
                .filter(|(_, b)| **b == which)
                .map(|(s, _)| s.heat)
                .sum()
        };
        let q_in = bath_heat(Bath::Hot);
        let q_out = bath_heat(Bath::Cold);
        let heat_absorbed = strokes.iter().map(|s| s.heat.max(0.0)).sum();
        let heat_released = strokes.iter().map(|s| s.heat.min(0.0)).sum();

        let spectrum_scale = strokes
            .iter()
            .flat_map(|s| [&s.start.spectrum, &s.end.spectrum])
            .fold(0.0_f64, |m, sp| m.max(sp.energy_scale()));
        let dim = strokes[0].start.spectrum.dimension() as f64;
        let energy_scale = spectrum_scale + t_hot * dim.ln().max(1.0);

        let mut report = CycleReport {
            kind,
            t_hot,
            t_cold,
            strokes,
            baths,
            w_net,
            q_in,
            q_out,
            heat_absorbed,
            heat_released,
            first_law_residual: w_net + q_in + q_out,
            epsilon: 0.0,
            mode: OperationMode::Degenerate,
            figure_of_merit: None,
            efficiency: None,
            intermediates,
        };
        report.set_epsilon(DEFAULT_EPSILON_FACTOR * energy_scale);
        report
    }

    /// Re-run the classification with a different dead band.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.set_epsilon(epsilon);
        self
    }

    fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
        self.mode = classify_mode(self.w_net, self.q_in, self.q_out, epsilon);
        self.figure_of_merit = figure_of_merit(self).ok();
        self.efficiency = (self.q_in.abs() > epsilon).then(|| -self.w_net / self.q_in);
    }

    /// `|W_net + Q_in + Q_out| ≤ 1e-9 · max(1, |W_net|)`.
    pub fn closes(&self) -> bool {
        self.first_law_residual.abs() <= 1e-9 * self.w_net.abs().max(1.0)
    }
}

/// `η = |W_net|/Q_in` for a heat engine, `COP = Q_out/|W_net|` for a refrigerator.
pub fn figure_of_merit(report: &CycleReport) -> Result<f64> {
    match report.mode {
        OperationMode::HeatEngine => Ok(report.w_net.abs() / report.q_in),
        OperationMode::Refrigerator => Ok(report.q_out / report.w_net.abs()),
        mode => Err(Error::NotApplicable(mode)),
    }
}

fn check_baths(t_hot: f64, t_cold: f64) -> Result<()> {
    check_temperature(t_hot)?;
    check_temperature(t_cold)?;
    if t_hot > t_cold {
        Ok(())
    } else {
        Err(Error::TemperatureOrdering { t_hot, t_cold })
    }
}

fn check_dims(a: &Spectrum, b: &Spectrum) -> Result<()> {
    if a.dimension() == b.dimension() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        })
    }
}

/// Isotherm A→B at `T_H`, isochore B to `T_C`, isotherm B→A at `T_C`, isochore A to `T_H`.
pub fn run_stirling(a: &Spectrum, b: &Spectrum, t_hot: f64, t_cold: f64) -> Result<CycleReport> {
    check_baths(t_hot, t_cold)?;
    check_dims(a, b)?;
    let legs = vec![
        (isothermal_stroke(a, b, t_hot)?, Bath::Hot),
        (isochoric_stroke(b, t_hot, t_cold)?, Bath::Cold),
        (isothermal_stroke(b, a, t_cold)?, Bath::Cold),
        (isochoric_stroke(a, t_cold, t_hot)?, Bath::Hot),
    ];
    let ln_ratio = |t: f64| -> Result<f64> {
        Ok(log_partition_function(b, t)? - log_partition_function(a, t)?)
    };
    let closed_form_work = -t_hot * ln_ratio(t_hot)? + t_cold * ln_ratio(t_cold)?;
    Ok(CycleReport::assemble(
        CycleKind::Stirling,
        t_hot,
        t_cold,
        legs,
        CycleIntermediates {
            closed_form_work: Some(closed_form_work),
            ..Default::default()
        },
    ))
}

/// Hot isochore on B, adiabat B→A, cold isochore on A, adiabat A→B.
///
/// The level spacing of B sets the hot-bath spectrum, so for a uniformly
/// scaled pair the efficiency is `1 - gap_A/gap_B`.
pub fn run_otto(a: &Spectrum, b: &Spectrum, t_hot: f64, t_cold: f64) -> Result<CycleReport> {
    check_baths(t_hot, t_cold)?;
    check_dims(a, b)?;
    let expansion = solve_adiabat(b, t_hot, a, AdiabatMethod::Auto)?;
    let compression = solve_adiabat(a, t_cold, b, AdiabatMethod::Auto)?;
    let t3 = expansion.temperature;
    let t1 = compression.temperature;
    for residual in [expansion.entropy_residual, compression.entropy_residual] {
        if residual.abs() > ENTROPY_TOLERANCE {
            return Err(Error::NonConvergence {
                iterations: expansion.iterations.max(compression.iterations),
                residual,
            });
        }
    }
    let legs = vec![
        (isochoric_stroke(b, t1, t_hot)?, Bath::Hot),
        (adiabatic_ledger(b, t_hot, a, &expansion)?, Bath::None),
        (isochoric_stroke(a, t3, t_cold)?, Bath::Cold),
        (adiabatic_ledger(a, t_cold, b, &compression)?, Bath::None),
    ];
    Ok(CycleReport::assemble(
        CycleKind::Otto,
        t_hot,
        t_cold,
        legs,
        CycleIntermediates {
            t1: Some(t1),
            t3: Some(t3),
            fixed_point_passes: Some(1),
            ..Default::default()
        },
    ))
}

/// Isotherm A→B at `T_H`, adiabat B→C, isotherm C→D at `T_C`, adiabat D→A.
///
/// The closing spectra are `C = κB` and `D = κA` with `κ = T_C/T_H`, the
/// members of the scaling families of B and A whose adiabats land exactly
/// on the cold bath.
pub fn run_carnot(a: &Spectrum, b: &Spectrum, t_hot: f64, t_cold: f64) -> Result<CycleReport> {
    check_baths(t_hot, t_cold)?;
    check_dims(a, b)?;
    let kappa = t_cold / t_hot;
    close_carnot(a, b, &b.scaled(kappa), &a.scaled(kappa), t_hot, t_cold, (kappa, kappa))
}

/// Carnot cycle whose closing states stay inside the model family: only the
/// exchange couplings are rescaled, fields are held fixed.
///
/// Closes only when rescaling the couplings rescales the whole spectrum
/// (zero field); otherwise the adiabats cannot keep every population and a
/// [`Error::CycleClosure`] carries the best entropy residual and population drift.
pub fn run_carnot_model(
    model_a: &ModelSpec,
    model_b: &ModelSpec,
    t_hot: f64,
    t_cold: f64,
) -> Result<CycleReport> {
    check_baths(t_hot, t_cold)?;
    let a = build_spectrum(model_a)?;
    let b = build_spectrum(model_b)?;
    check_dims(&a, &b)?;
    let (scale_c, res_c) = solve_coupling_scale(model_b, entropy(&b, t_hot)?, t_hot, t_cold)?;
    let (scale_d, res_d) = solve_coupling_scale(model_a, entropy(&a, t_hot)?, t_hot, t_cold)?;
    let c = build_spectrum(&model_b.with_coupling_scale(scale_c))?;
    let d = build_spectrum(&model_a.with_coupling_scale(scale_d))?;
    let drift = |from: &Spectrum, to: &Spectrum| -> Result<f64> {
        let p = populations(from, t_hot)?;
        let q = populations(to, t_cold)?;
        Ok(p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum())
    };
    let population_drift = drift(&b, &c)?.max(drift(&a, &d)?);
    let entropy_residual = if res_c.abs() > res_d.abs() { res_c } else { res_d };
    if population_drift > CLOSURE_TOLERANCE || entropy_residual.abs() > ENTROPY_TOLERANCE {
        return Err(Error::CycleClosure {
            entropy_residual,
            population_drift,
        });
    }
    close_carnot(&a, &b, &c, &d, t_hot, t_cold, (scale_c, scale_d))
}

/// Coupling scale `s` with `S(model(sJ), T_C) = target`, plus the residual reached.
fn solve_coupling_scale(
    model: &ModelSpec,
    target: f64,
    t_hot: f64,
    t_cold: f64,
) -> Result<(f64, f64)> {
    let f = |s: f64| -> Result<f64> {
        Ok(entropy(&build_spectrum(&model.with_coupling_scale(s))?, t_cold)? - target)
    };
    let guess = t_cold / t_hot;
    let f_guess = f(guess)?;
    if f_guess == 0.0 {
        return Ok((guess, 0.0));
    }
    // Scan outward in factors of two for a sign change.
    let mut best = (guess, f_guess);
    let mut bracket = None;
    'scan: for k in 1..=64 {
        for s in [guess * 2f64.powi(k), guess * 2f64.powi(-k)] {
            let fs = f(s)?;
            if fs.abs() < best.1.abs() {
                best = (s, fs);
            }
            if fs.signum() != f_guess.signum() {
                let prev = if s > guess { s / 2.0 } else { s * 2.0 };
                bracket = Some((prev, s));
                break 'scan;
            }
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Err(Error::CycleClosure {
            entropy_residual: best.1,
            population_drift: f64::NAN,
        });
    };
    let mut f_lo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let f_hi = f(hi)?;
    Ok(if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) })
}

fn close_carnot(
    a: &Spectrum,
    b: &Spectrum,
    c: &Spectrum,
    d: &Spectrum,
    t_hot: f64,
    t_cold: f64,
    closing_scale: (f64, f64),
) -> Result<CycleReport> {
    let land = |from: &Spectrum, t_from: f64, to: &Spectrum, t_to: f64| -> Result<StrokeLedger> {
        let closure_error = |entropy_residual: f64, population_drift: f64| Error::CycleClosure {
            entropy_residual,
            population_drift,
        };
        let mut solution = match solve_adiabat(from, t_from, to, AdiabatMethod::Auto) {
            Ok(s) => s,
            Err(Error::EntropyOutOfRange { .. }) | Err(Error::NonConvergence { .. }) => {
                let residual = entropy(to, t_to)? - entropy(from, t_from)?;
                return Err(closure_error(residual, f64::NAN));
            }
            Err(e) => return Err(e),
        };
        if (solution.temperature - t_to).abs() > CLOSURE_TOLERANCE * t_to {
            let residual = entropy(to, t_to)? - entropy(from, t_from)?;
            return Err(closure_error(residual, solution.population_drift));
        }
        solution.temperature = t_to;
        adiabatic_ledger(from, t_from, to, &solution)
    };
    let legs = vec![
        (isothermal_stroke(a, b, t_hot)?, Bath::Hot),
        (land(b, t_hot, c, t_cold)?, Bath::None),
        (isothermal_stroke(c, d, t_cold)?, Bath::Cold),
        (land(d, t_cold, a, t_hot)?, Bath::None),
    ];
    let hot_ratio = log_partition_function(b, t_hot)? - log_partition_function(a, t_hot)?;
    let cold_ratio = log_partition_function(c, t_cold)? - log_partition_function(d, t_cold)?;
    Ok(CycleReport::assemble(
        CycleKind::Carnot,
        t_hot,
        t_cold,
        legs,
        CycleIntermediates {
            closing_scale: Some(closing_scale),
            partition_constraint_residual: Some(hot_ratio - cold_ratio),
            ..Default::default()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimer(j: f64, b: f64) -> Spectrum {
        build_spectrum(&ModelSpec::dimer(j, b)).unwrap()
    }

    fn gap(g: f64) -> Spectrum {
        Spectrum::from_levels(vec![-g / 2.0, g / 2.0]).unwrap()
    }

    #[test]
    fn table_rows() {
        assert_eq!(classify_mode(-1.0, 2.0, -1.0, 0.0), OperationMode::HeatEngine);
        assert_eq!(classify_mode(1.0, -2.0, 1.0, 0.0), OperationMode::Refrigerator);
        assert_eq!(classify_mode(1.0, 2.0, -3.0, 0.0), OperationMode::Accelerator);
        assert_eq!(classify_mode(1.0, -0.5, -0.5, 0.0), OperationMode::Heater);
        assert_eq!(classify_mode(0.0, 1.0, -1.0, 0.0), OperationMode::Degenerate);
        assert_eq!(classify_mode(-1e-13, 1.0, -1.0, 1e-12), OperationMode::Degenerate);
        assert_eq!(classify_mode(-1.0, -1.0, 2.0, 0.0), OperationMode::Degenerate);
    }

    #[test]
    fn figure_of_merit_by_mode() {
        let mut r = run_stirling(&dimer(-42.0, 0.0), &dimer(-32.0, 0.0), 40.0, 20.0).unwrap();
        r.w_net = -1.0;
        r.q_in = 2.0;
        r.q_out = -1.0;
        r = r.with_epsilon(0.0);
        assert_eq!(figure_of_merit(&r), Ok(0.5));
        r.w_net = 1.0;
        r.q_in = -4.0;
        r.q_out = 3.0;
        r = r.with_epsilon(0.0);
        assert_eq!(figure_of_merit(&r), Ok(3.0));
        r.q_in = 1.0;
        r.q_out = -2.0;
        r = r.with_epsilon(0.0);
        assert_eq!(figure_of_merit(&r), Err(Error::NotApplicable(OperationMode::Accelerator)));
    }

    #[test]
    fn stirling_dimer_is_an_engine() {
        let (a, b) = (dimer(-42.0, 0.0), dimer(-32.0, 0.0));
        let r = run_stirling(&a, &b, 40.0, 20.0).unwrap();
        assert_eq!(r.mode, OperationMode::HeatEngine);
        assert!(r.closes());
        let closed = r.intermediates.closed_form_work.unwrap();
        assert!((r.w_net - closed).abs() <= 1e-10 * r.w_net.abs().max(1.0));
        let eta = r.figure_of_merit.unwrap();
        assert!(eta > 0.0 && eta < 0.5);
        assert!(r.heat_absorbed >= 0.0 && r.heat_released <= 0.0);
    }

    #[test]
    fn identical_spectra_give_zero_work() {
        let a = dimer(-32.0, 0.0);
        for r in [
            run_stirling(&a, &a, 40.0, 20.0).unwrap(),
            run_otto(&a, &a, 40.0, 20.0).unwrap(),
            run_carnot(&a, &a, 40.0, 20.0).unwrap(),
        ] {
            assert!(r.w_net.abs() <= r.epsilon, "{:?}", r.kind);
            assert_eq!(r.mode, OperationMode::Degenerate);
        }
        let otto = run_otto(&a, &a, 40.0, 20.0).unwrap();
        assert_eq!(otto.intermediates.t1, Some(20.0));
        assert_eq!(otto.intermediates.t3, Some(40.0));
    }

    #[test]
    fn otto_two_level_spacing_law() {
        let r = run_otto(&gap(1.0), &gap(2.0), 30.0, 5.0).unwrap();
        assert_eq!(r.mode, OperationMode::HeatEngine);
        assert!((r.figure_of_merit.unwrap() - 0.5).abs() < 1e-10);
        let r = run_otto(&dimer(-32.0, 0.0), &dimer(-42.0, 0.0), 60.0, 20.0).unwrap();
        assert!((r.figure_of_merit.unwrap() - (1.0 - 32.0 / 42.0)).abs() < 1e-10);
    }

    #[test]
    fn carnot_reaches_classical_limit() {
        let r = run_carnot(&dimer(-32.0, 0.0), &dimer(-42.0, 0.0), 40.0, 20.0).unwrap();
        assert!((r.efficiency.unwrap() - 0.5).abs() < 1e-9);
        assert!(r.intermediates.partition_constraint_residual.unwrap().abs() < 1e-9);
        assert!(r.closes());
        // Raising the gap on the hot isotherm pumps heat uphill.
        assert_eq!(r.mode, OperationMode::Refrigerator);
        let r = run_carnot(&dimer(-42.0, 0.0), &dimer(-32.0, 0.0), 40.0, 20.0).unwrap();
        assert_eq!(r.mode, OperationMode::HeatEngine);
        assert!((r.figure_of_merit.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn carnot_model_family() {
        let ok = run_carnot_model(
            &ModelSpec::dimer(-42.0, 0.0),
            &ModelSpec::dimer(-32.0, 0.0),
            40.0,
            20.0,
        )
        .unwrap();
        assert!((ok.figure_of_merit.unwrap() - 0.5).abs() < 1e-9);
        let (sc, sd) = ok.intermediates.closing_scale.unwrap();
        assert!((sc - 0.5).abs() < 1e-12 && (sd - 0.5).abs() < 1e-12);
        let err = run_carnot_model(
            &ModelSpec::dimer(-42.0, 5.0),
            &ModelSpec::dimer(-32.0, 5.0),
            40.0,
            20.0,
        )
        .unwrap_err();
        match err {
            Error::CycleClosure {
                population_drift, ..
            } => assert!(population_drift > 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_baths() {
        let a = dimer(-32.0, 0.0);
        assert!(matches!(
            run_stirling(&a, &a, 10.0, 20.0),
            Err(Error::TemperatureOrdering { .. })
        ));
        assert!(run_otto(&a, &a, 20.0, 20.0).is_err());
        assert!(run_carnot(&a, &a, 20.0, -1.0).is_err());
        assert!(matches!(
            run_stirling(&a, &gap(1.0), 30.0, 20.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_closing_spectrum_is_a_closure_error() {
        let a = dimer(-32.0, 0.0);
        let flat = Spectrum::from_levels(vec![3.0; 4]).unwrap();
        assert!(matches!(
            run_carnot(&a, &flat, 40.0, 20.0),
            Err(Error::CycleClosure { .. })
        ));
    }
}
