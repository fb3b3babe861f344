//! Gibbs-state functions of a spectrum at temperature `T`.
//!
//! All sums are taken relative to the ground level, so `Z` itself is never
//! formed: `ln Z = -E_0/T + ln(1 + Σ_{n>0} e^{-(E_n - E_0)/T})`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::Spectrum;

pub(crate) fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature(t))
    }
}

/// Shifted Boltzmann factors `w_n = e^{-x_n}`, `x_n = (E_n - E_0)/T`.
struct Boltzmann {
    reduced: Vec<f64>,
    weights: Vec<f64>,
    /// `ln Σ w_n`; `w_0 = 1` exactly, so this is `ln_1p` of the excited sum.
    log_sum: f64,
}

impl Boltzmann {
    fn new(spectrum: &Spectrum, t: f64) -> Result<Self> {
        check_temperature(t)?;
        let e0 = spectrum.ground_energy();
        let reduced: Vec<f64> = spectrum.energies().iter().map(|e| (e - e0) / t).collect();
        let weights: Vec<f64> = reduced.iter().map(|x| (-x).exp()).collect();
        let excited: f64 = weights[1..].iter().sum();
        Ok(Boltzmann {
            reduced,
            weights,
            log_sum: excited.ln_1p(),
        })
    }

    fn populations(&self) -> Vec<f64> {
        let total: f64 = 1.0 + self.weights[1..].iter().sum::<f64>();
        self.weights.iter().map(|w| w / total).collect()
    }
}

/// `ln Z` at temperature `t`.
pub fn log_partition_function(spectrum: &Spectrum, t: f64) -> Result<f64> {
    let b = Boltzmann::new(spectrum, t)?;
    Ok(-spectrum.ground_energy() / t + b.log_sum)
}

/// Occupation probabilities in spectrum order.
pub fn populations(spectrum: &Spectrum, t: f64) -> Result<Vec<f64>> {
    Ok(Boltzmann::new(spectrum, t)?.populations())
}

pub fn internal_energy(spectrum: &Spectrum, t: f64) -> Result<f64> {
    let p = populations(spectrum, t)?;
    Ok(p.iter().zip(spectrum.energies()).map(|(p, e)| p * e).sum())
}

/// Shannon entropy `-Σ p_n ln p_n` (k_B = 1), non-negative.
pub fn entropy(spectrum: &Spectrum, t: f64) -> Result<f64> {
    let b = Boltzmann::new(spectrum, t)?;
    Ok(entropy_of(&b, &b.populations()))
}

fn entropy_of(b: &Boltzmann, p: &[f64]) -> f64 {
    // -ln p_n = x_n + ln Σw, which avoids 0·ln 0 and keeps tiny entropies accurate
    let mean_reduced: f64 = p.iter().zip(&b.reduced).map(|(p, x)| p * x).sum();
    b.log_sum + mean_reduced
}

/// `ln d - S`, the entropy still missing from the maximum.
///
/// Near saturation `S` sits within rounding of `ln d`; this form keeps full
/// relative precision there by expanding the weights about the mean level.
pub fn entropy_deficit(spectrum: &Spectrum, t: f64) -> Result<f64> {
    check_temperature(t)?;
    let mean = spectrum.mean();
    let y: Vec<f64> = spectrum.energies().iter().map(|e| (e - mean) / t).collect();
    if y.iter().any(|y| y.abs() > 1.0) {
        return Ok((spectrum.dimension() as f64).ln() - entropy(spectrum, t)?);
    }
    let d = y.len() as f64;
    // w_n = e^{-y_n} = 1 + m_n
    let m: Vec<f64> = y.iter().map(|y| (-y).exp_m1()).collect();
    let sum_m: f64 = m.iter().sum();
    let sum_y: f64 = y.iter().sum();
    let sum_ym: f64 = y.iter().zip(&m).map(|(y, m)| y * m).sum();
    let mean_y = (sum_y + sum_ym) / (d + sum_m);
    Ok(-mean_y - (sum_m / d).ln_1p())
}

pub fn free_energy(spectrum: &Spectrum, t: f64) -> Result<f64> {
    Ok(-t * log_partition_function(spectrum, t)?)
}

/// `C = (⟨E²⟩ - ⟨E⟩²)/T²`.
pub fn heat_capacity(spectrum: &Spectrum, t: f64) -> Result<f64> {
    let b = Boltzmann::new(spectrum, t)?;
    Ok(heat_capacity_of(&b, &b.populations()))
}

fn heat_capacity_of(b: &Boltzmann, p: &[f64]) -> f64 {
    let mean: f64 = p.iter().zip(&b.reduced).map(|(p, x)| p * x).sum();
    p.iter()
        .zip(&b.reduced)
        .map(|(p, x)| p * (x - mean) * (x - mean))
        .sum()
}

/// Equilibrium state of a spectrum with all derived state functions.
#[derive(Debug, Clone, Serialize)]
pub struct ThermalState {
    pub spectrum: Spectrum,
    pub temperature: f64,
    pub log_z: f64,
    pub populations: Vec<f64>,
    pub internal_energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
    pub heat_capacity: f64,
}

impl ThermalState {
    pub fn new(spectrum: &Spectrum, t: f64) -> Result<Self> {
        let b = Boltzmann::new(spectrum, t)?;
        let populations = b.populations();
        let log_z = -spectrum.ground_energy() / t + b.log_sum;
        let internal_energy = populations
            .iter()
            .zip(spectrum.energies())
            .map(|(p, e)| p * e)
            .sum();
        Ok(ThermalState {
            spectrum: spectrum.clone(),
            temperature: t,
            log_z,
            internal_energy,
            entropy: entropy_of(&b, &populations),
            free_energy: -t * log_z,
            heat_capacity: heat_capacity_of(&b, &populations),
            populations,
        })
    }
}
