//! Ergotropy and passive states.
//!
//! The state and the Hamiltonian used to measure extractable work are
//! independent inputs, so a battery charged as the Gibbs state of the full
//! dimer can be discharged against its Zeeman part alone.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::populations;
use crate::spectra::Eigensystem;

const STATE_TOLERANCE: f64 = 1e-12;
pub const BRUTE_FORCE_MAX_DIM: usize = 8;

pub type C64 = Complex<f64>;

/// Validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    matrix: DMatrix<C64>,
}

impl QuantumState {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidState(format!("shape {rows}x{cols}")));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let hermitian_dev = (&matrix - matrix.adjoint()).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if hermitian_dev > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {hermitian_dev:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STATE_TOLERANCE || trace.im.abs() > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {trace}")));
        }
        let state = QuantumState { matrix };
        let (eigenvalues, _) = state.raw_eigen();
        if let Some(bad) = eigenvalues
            .iter()
            .find(|r| **r < -STATE_TOLERANCE || **r > 1.0 + STATE_TOLERANCE)
        {
            return Err(Error::InvalidState(format!("eigenvalue {bad} outside [0, 1]")));
        }
        Ok(state)
    }

    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        let diag = nalgebra::DVector::from_iterator(
            populations.len(),
            populations.iter().map(|p| C64::new(*p, 0.0)),
        );
        QuantumState::new(DMatrix::from_diagonal(&diag))
    }

    /// `Σ r_i |v_i⟩⟨v_i|` for orthonormal columns `v_i`.
    pub fn from_spectral(weights: &[f64], basis: &DMatrix<C64>) -> Result<Self> {
        let d = basis.nrows();
        if basis.ncols() != weights.len() {
            return Err(Error::DimensionMismatch {
                left: weights.len(),
                right: basis.ncols(),
            });
        }
        let mut rho = DMatrix::<C64>::zeros(d, d);
        for (k, r) in weights.iter().enumerate() {
            let v = basis.column(k);
            rho += (v * v.adjoint()) * C64::new(*r, 0.0);
        }
        QuantumState::new(hermitize(rho))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    fn raw_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = SymmetricEigen::new(self.matrix.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }

    /// Eigenvalues clamped to `[0, 1]`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.raw_eigen().0.into_iter().map(|r| r.clamp(0.0, 1.0)).collect();
        r.sort_by(f64::total_cmp);
        r
    }

    /// `Tr[ρ H]` with `H` given by its eigensystem.
    pub fn energy(&self, reference: &Eigensystem) -> Result<f64> {
        check_dimension(self, reference)?;
        let mut total = 0.0;
        for (k, e) in reference.spectrum.energies().iter().enumerate() {
            let v = reference.vectors.column(k).map(|x| C64::new(x, 0.0));
            let expectation = (v.adjoint() * &self.matrix * &v)[(0, 0)];
            total += e * expectation.re;
        }
        Ok(total)
    }
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn check_dimension(state: &QuantumState, reference: &Eigensystem) -> Result<()> {
    if state.dimension() == reference.dimension() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: state.dimension(),
            right: reference.dimension(),
        })
    }
}

/// Gibbs state `Σ p_n |n⟩⟨n|` of the Hamiltonian with eigensystem `system`.
pub fn gibbs_battery_state(system: &Eigensystem, t: f64) -> Result<QuantumState> {
    let p = populations(&system.spectrum, t)?;
    let basis = system.vectors.map(|x| C64::new(x, 0.0));
    QuantumState::from_spectral(&p, &basis)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgotropyReport {
    pub energy_initial: f64,
    pub energy_passive: f64,
    pub ergotropy: f64,
    /// `passive_assignment[i]` is the index (in ascending eigenvalue order of ρ)
    /// of the population placed on the `i`-th lowest reference level.
    pub passive_assignment: Vec<usize>,
}

/// Maximum work extractable from `state` by a unitary, measured with `reference`.
///
/// The passive state puts the largest population on the lowest level;
/// ties keep index order.
pub fn ergotropy(state: &QuantumState, reference: &Eigensystem) -> Result<ErgotropyReport> {
    check_dimension(state, reference)?;
    let r = state.eigenvalues();
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&i, &j| r[j].total_cmp(&r[i]));
    let energy_passive = order
        .iter()
        .zip(reference.spectrum.energies())
        .map(|(&k, e)| r[k] * e)
        .sum::<f64>();
    let energy_initial = state.energy(reference)?;
    Ok(ErgotropyReport {
        energy_initial,
        energy_passive,
        ergotropy: (energy_initial - energy_passive).max(0.0),
        passive_assignment: order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForceErgotropy {
    pub energy_passive: f64,
    pub ergotropy: f64,
}

/// Minimum of `Σ r_π(i) ε_i` over every permutation π; independent check on [`ergotropy`].
pub fn ergotropy_bruteforce(
    state: &QuantumState,
    reference: &Eigensystem,
) -> Result<BruteForceErgotropy> {
    check_dimension(state, reference)?;
    let d = state.dimension();
    if d > BRUTE_FORCE_MAX_DIM {
        return Err(Error::TooLarge(d));
    }
    let r = state.eigenvalues();
    let levels = reference.spectrum.energies();
    let cost = |perm: &[usize]| -> f64 { perm.iter().zip(levels).map(|(&k, e)| r[k] * e).sum() };

    // Heap's algorithm.
    let mut perm: Vec<usize> = (0..d).collect();
    let mut counters = vec![0usize; d];
    let mut best = cost(&perm);
    let mut i = 1;
    while i < d {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            best = best.min(cost(&perm));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    let initial = state.energy(reference)?;
    Ok(BruteForceErgotropy {
        energy_passive: best,
        ergotropy: (initial - best).max(0.0),
    })
}
