//! The three quasi-static strokes and the adiabat endpoint solver.
//!
//! An adiabatic stroke keeps the entropy fixed. When the end spectrum is a
//! uniform rescaling of the start spectrum (up to a constant offset) every
//! population is preserved and the end temperature is `κ T₁`; otherwise the
//! end temperature is found by bisection on `S(T)` and the population drift
//! is reported instead.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{check_temperature, entropy, entropy_deficit, populations, ThermalState};
use crate::spectra::Spectrum;

/// Iteration cap for the entropy bisection.
pub const MAX_BISECTION_STEPS: u32 = 200;
/// Required entropy match at the adiabat end point.
pub const ENTROPY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrokeKind {
    Adiabatic,
    Isochoric,
    Isothermal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrokeEndpoint {
    pub spectrum: Spectrum,
    pub temperature: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StrokeDiagnostics {
    /// `‖p_end - p_start‖₁`, zero unless the stroke is adiabatic and off the scaling family.
    pub population_drift: f64,
    pub solver_iterations: u32,
    pub fast_path: bool,
    /// `dU - Q - W` as evaluated.
    pub first_law_residual: f64,
}

/// One stroke of a cycle. Heat is absorbed by, work is done on, the substance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrokeLedger {
    pub kind: StrokeKind,
    pub start: StrokeEndpoint,
    pub end: StrokeEndpoint,
    pub heat: f64,
    pub work: f64,
    pub energy_change: f64,
    pub diagnostics: StrokeDiagnostics,
}

impl StrokeLedger {
    fn new(
        kind: StrokeKind,
        start: (&Spectrum, f64),
        end: (&Spectrum, f64),
        heat: f64,
        work: f64,
        energy_change: f64,
        mut diagnostics: StrokeDiagnostics,
    ) -> Self {
        diagnostics.first_law_residual = energy_change - heat - work;
        StrokeLedger {
            kind,
            start: StrokeEndpoint {
                spectrum: start.0.clone(),
                temperature: start.1,
            },
            end: StrokeEndpoint {
                spectrum: end.0.clone(),
                temperature: end.1,
            },
            heat,
            work,
            energy_change,
            diagnostics,
        }
    }

    /// `|dU - Q - W| ≤ 1e-10 · max(1, |dU|)`.
    pub fn satisfies_first_law(&self) -> bool {
        self.diagnostics.first_law_residual.abs() <= 1e-10 * self.energy_change.abs().max(1.0)
    }
}

/// Bath held at `t` while the spectrum changes from `from` to `to`.
///
/// `Q = T ΔS`, `W = -T ln(Z_to/Z_from) = ΔF`, `ΔU = Q + W`.
pub fn isothermal_stroke(from: &Spectrum, to: &Spectrum, t: f64) -> Result<StrokeLedger> {
    check_temperature(t)?;
    let a = ThermalState::new(from, t)?;
    let b = ThermalState::new(to, t)?;
    let heat = t * (b.entropy - a.entropy);
    let work = -t * (b.log_z - a.log_z);
    Ok(StrokeLedger::new(
        StrokeKind::Isothermal,
        (from, t),
        (to, t),
        heat,
        work,
        b.internal_energy - a.internal_energy,
        StrokeDiagnostics::default(),
    ))
}

/// Fixed spectrum, bath temperature moved from `t1` to `t2`: `W = 0`, `Q = ΔU`.
pub fn isochoric_stroke(spectrum: &Spectrum, t1: f64, t2: f64) -> Result<StrokeLedger> {
    check_temperature(t1)?;
    check_temperature(t2)?;
    let u1 = ThermalState::new(spectrum, t1)?.internal_energy;
    let u2 = ThermalState::new(spectrum, t2)?.internal_energy;
    let du = u2 - u1;
    Ok(StrokeLedger::new(
        StrokeKind::Isochoric,
        (spectrum, t1),
        (spectrum, t2),
        du,
        0.0,
        du,
        StrokeDiagnostics::default(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdiabatMethod {
    /// Scaling fast path when it applies, bisection otherwise.
    Auto,
    /// Always bisect.
    RootFind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabatSolution {
    pub temperature: f64,
    pub iterations: u32,
    pub fast_path: bool,
    pub entropy_residual: f64,
    pub population_drift: f64,
}

/// End temperature of the isentrope from `(from, t1)` onto `to`.
pub fn adiabatic_endpoint(from: &Spectrum, t1: f64, to: &Spectrum) -> Result<f64> {
    Ok(solve_adiabat(from, t1, to, AdiabatMethod::Auto)?.temperature)
}

pub fn solve_adiabat(
    from: &Spectrum,
    t1: f64,
    to: &Spectrum,
    method: AdiabatMethod,
) -> Result<AdiabatSolution> {
    check_temperature(t1)?;
    if from.dimension() != to.dimension() {
        return Err(Error::DimensionMismatch {
            left: from.dimension(),
            right: to.dimension(),
        });
    }
    if method == AdiabatMethod::Auto {
        if from.energies() == to.energies() {
            return Ok(AdiabatSolution {
                temperature: t1,
                iterations: 0,
                fast_path: true,
                entropy_residual: 0.0,
                population_drift: 0.0,
            });
        }
        if let Some(kappa) = from.uniform_scale_to(to) {
            let t2 = kappa * t1;
            check_temperature(t2)?;
            return finish(from, t1, to, t2, 0, true);
        }
    }
    let target = entropy(from, t1)?;
    let (t2, iterations) = if target <= 0.5 * (from.dimension() as f64).ln() {
        bisect_entropy(target, t1, |t| Ok(entropy(to, t)? - target))?
    } else {
        // Close to saturation the deficit is the better-conditioned unknown.
        let deficit = entropy_deficit(from, t1)?;
        bisect_entropy(target, t1, |t| Ok(deficit - entropy_deficit(to, t)?))?
    };
    finish(from, t1, to, t2, iterations, false)
}

fn finish(
    from: &Spectrum,
    t1: f64,
    to: &Spectrum,
    t2: f64,
    iterations: u32,
    fast_path: bool,
) -> Result<AdiabatSolution> {
    let p1 = populations(from, t1)?;
    let p2 = populations(to, t2)?;
    let drift = p1.iter().zip(&p2).map(|(a, b)| (a - b).abs()).sum();
    Ok(AdiabatSolution {
        temperature: t2,
        iterations,
        fast_path,
        entropy_residual: entropy(to, t2)? - entropy(from, t1)?,
        population_drift: drift,
    })
}

/// Root of `residual`, an entropy difference non-decreasing in `T`.
/// `target` is only reported back in errors.
fn bisect_entropy(
    target: f64,
    guess: f64,
    residual: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, u32)> {
    let out_of_range = || Error::EntropyOutOfRange { target };

    // Bracket by doubling/halving from the guess; consecutive probes give a ratio-2 bracket.
    let (mut lo, mut hi) = (guess, guess);
    let r_guess = residual(guess)?;
    if r_guess > 0.0 {
        loop {
            hi = lo;
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                return Err(out_of_range());
            }
            if residual(lo)? <= 0.0 {
                break;
            }
        }
    } else if r_guess < 0.0 {
        loop {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(out_of_range());
            }
            if residual(hi)? >= 0.0 {
                break;
            }
        }
    } else {
        return Ok((guess, 0));
    }

    let mut iterations = 0;
    while iterations < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let rm = residual(mid)?;
        if rm < 0.0 {
            lo = mid;
        } else if rm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
            break;
        }
    }
    let (r_lo, r_hi) = (residual(lo)?.abs(), residual(hi)?.abs());
    let (t, r) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
    if r > ENTROPY_TOLERANCE {
        return Err(Error::NonConvergence {
            iterations,
            residual: r,
        });
    }
    Ok((t, iterations))
}

/// Isentropic stroke from `(from, t1)` onto `to`: `Q = 0`, `W = ΔU`.
pub fn adiabatic_stroke(from: &Spectrum, t1: f64, to: &Spectrum) -> Result<StrokeLedger> {
    let solution = solve_adiabat(from, t1, to, AdiabatMethod::Auto)?;
    adiabatic_ledger(from, t1, to, &solution)
}

pub(crate) fn adiabatic_ledger(
    from: &Spectrum,
    t1: f64,
    to: &Spectrum,
    solution: &AdiabatSolution,
) -> Result<StrokeLedger> {
    let t2 = solution.temperature;
    let u1 = ThermalState::new(from, t1)?.internal_energy;
    let u2 = ThermalState::new(to, t2)?.internal_energy;
    let work = u2 - u1;
    Ok(StrokeLedger::new(
        StrokeKind::Adiabatic,
        (from, t1),
        (to, t2),
        0.0,
        work,
        work,
        StrokeDiagnostics {
            population_drift: solution.population_drift,
            solver_iterations: solution.iterations,
            fast_path: solution.fast_path,
            first_law_residual: 0.0,
        },
    ))
}
