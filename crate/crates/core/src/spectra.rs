//! Working-substance Hamiltonians and their exact spectra.
//!
//! Every spin model uses the convention
//!
//! ```text
//! H = -Σ_(i,j) J_ij S_i·S_j + Σ_i b_i S_i^z
//! ```
//!
//! with spin-1/2 operators, energies in kelvin (k_B = 1) and `b = g μ_B B / k_B`.
//! A negative coupling is antiferromagnetic: the dimer ground state is the
//! singlet at `3J/4`, the triplet sits at `-J/4` and splits by `±b`.
//!
//! Computational basis index bit `i` set means site `i` is spin up.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SITES: usize = 10;
pub const MAX_DIMENSION: usize = 1 << MAX_SITES;

const SYMMETRY_TOLERANCE: f64 = 1e-12;
const SCALING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
}

impl Bond {
    pub fn new(i: usize, j: usize, coupling: f64) -> Self {
        Bond { i, j, coupling }
    }
}

/// Declarative description of a working substance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// One spin in a field: `H = b S^z`.
    SingleSpin { field: f64 },
    /// Two spins, one bond, uniform field. Solved in closed form.
    HeisenbergDimer { coupling: f64, field: f64 },
    /// Up to ten spins with an arbitrary bond list and per-site fields.
    HeisenbergCluster {
        n_sites: usize,
        bonds: Vec<Bond>,
        fields: Vec<f64>,
    },
    /// A level list supplied directly.
    ExplicitLevels { levels: Vec<f64> },
}

impl ModelSpec {
    pub fn dimer(coupling: f64, field: f64) -> Self {
        ModelSpec::HeisenbergDimer { coupling, field }
    }

    pub fn levels(levels: impl Into<Vec<f64>>) -> Self {
        ModelSpec::ExplicitLevels {
            levels: levels.into(),
        }
    }

    /// Open (or periodic) chain with uniform coupling and field.
    pub fn chain(n_sites: usize, coupling: f64, field: f64, periodic: bool) -> Self {
        let mut bonds: Vec<Bond> = (0..n_sites.saturating_sub(1))
            .map(|i| Bond::new(i, i + 1, coupling))
            .collect();
        if periodic && n_sites > 2 {
            bonds.push(Bond::new(n_sites - 1, 0, coupling));
        }
        ModelSpec::HeisenbergCluster {
            n_sites,
            bonds,
            fields: vec![field; n_sites],
        }
    }

    pub fn n_sites(&self) -> Option<usize> {
        match self {
            ModelSpec::SingleSpin { .. } => Some(1),
            ModelSpec::HeisenbergDimer { .. } => Some(2),
            ModelSpec::HeisenbergCluster { n_sites, .. } => Some(*n_sites),
            ModelSpec::ExplicitLevels { .. } => None,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ModelSpec::ExplicitLevels { levels } => levels.len(),
            _ => 1 << self.n_sites().unwrap_or(0).min(usize::BITS as usize - 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::SingleSpin { field } => finite(*field, "field"),
            ModelSpec::HeisenbergDimer { coupling, field } => {
                finite(*coupling, "coupling")?;
                finite(*field, "field")
            }
            ModelSpec::HeisenbergCluster {
                n_sites,
                bonds,
                fields,
            } => {
                if *n_sites == 0 {
                    return Err(Error::InvalidModel("cluster needs at least one site".into()));
                }
                if *n_sites > MAX_SITES {
                    return Err(Error::DimensionOverflow { n_sites: *n_sites });
                }
                if fields.len() != *n_sites {
                    return Err(Error::InvalidModel(format!(
                        "{} site fields given for {} sites",
                        fields.len(),
                        n_sites
                    )));
                }
                for bond in bonds {
                    if bond.i >= *n_sites || bond.j >= *n_sites {
                        return Err(Error::InvalidModel(format!(
                            "bond ({}, {}) references a site outside 0..{}",
                            bond.i, bond.j, n_sites
                        )));
                    }
                    if bond.i == bond.j {
                        return Err(Error::InvalidModel(format!("self-bond on site {}", bond.i)));
                    }
                    finite(bond.coupling, "coupling")?;
                }
                fields.iter().try_for_each(|b| finite(*b, "field"))
            }
            ModelSpec::ExplicitLevels { levels } => {
                if levels.is_empty() {
                    return Err(Error::EmptyLevels);
                }
                if levels.len() > MAX_DIMENSION {
                    return Err(Error::InvalidModel(format!(
                        "{} levels exceed the dimension limit {}",
                        levels.len(),
                        MAX_DIMENSION
                    )));
                }
                levels.iter().try_for_each(|e| finite(*e, "levels"))
            }
        }
    }

    /// Same model with every exchange coupling multiplied by `factor`; fields untouched.
    pub fn with_coupling_scale(&self, factor: f64) -> Self {
        match self {
            ModelSpec::HeisenbergDimer { coupling, field } => ModelSpec::HeisenbergDimer {
                coupling: coupling * factor,
                field: *field,
            },
            ModelSpec::HeisenbergCluster {
                n_sites,
                bonds,
                fields,
            } => ModelSpec::HeisenbergCluster {
                n_sites: *n_sites,
                bonds: bonds
                    .iter()
                    .map(|b| Bond::new(b.i, b.j, b.coupling * factor))
                    .collect(),
                fields: fields.clone(),
            },
            ModelSpec::ExplicitLevels { levels } => ModelSpec::ExplicitLevels {
                levels: levels.iter().map(|e| e * factor).collect(),
            },
            ModelSpec::SingleSpin { .. } => self.clone(),
        }
    }
}

fn finite(x: f64, what: &'static str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Sorted energy levels with the model they came from, if any.
///
/// Degenerate levels are kept as repeated entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    energies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    source: Option<ModelSpec>,
}

impl Spectrum {
    pub fn from_levels(mut levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("energies"));
        }
        levels.sort_by(f64::total_cmp);
        Ok(Spectrum {
            energies: levels,
            source: None,
        })
    }

    fn with_source(mut self, model: &ModelSpec) -> Self {
        self.source = Some(model.clone());
        self
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn source(&self) -> Option<&ModelSpec> {
        self.source.as_ref()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn trace(&self) -> f64 {
        self.energies.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.trace() / self.dimension() as f64
    }

    /// Largest level magnitude; the natural energy scale of the spectrum.
    pub fn energy_scale(&self) -> f64 {
        self.energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()))
    }

    pub fn centered(&self) -> Vec<f64> {
        let mean = self.mean();
        self.energies.iter().map(|e| e - mean).collect()
    }

    /// `κ E_n` for every level. Scaling about zero keeps `Z_κE(κT) = Z_E(T)`.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        let mut energies: Vec<f64> = self.energies.iter().map(|e| e * factor).collect();
        if factor < 0.0 {
            energies.reverse();
        }
        Spectrum {
            energies,
            source: None,
        }
    }

    pub fn shifted(&self, offset: f64) -> Spectrum {
        Spectrum {
            energies: self.energies.iter().map(|e| e + offset).collect(),
            source: None,
        }
    }

    /// Factor `κ > 0` with `centered(other) = κ · centered(self)`, if one exists.
    ///
    /// Returns `None` when the dimensions differ, when `self` is fully
    /// degenerate, or when the relative residual exceeds 1e-10.
    pub fn uniform_scale_to(&self, other: &Spectrum) -> Option<f64> {
        if self.dimension() != other.dimension() {
            return None;
        }
        let a = self.centered();
        let b = other.centered();
        let aa: f64 = a.iter().map(|x| x * x).sum();
        let bb: f64 = b.iter().map(|x| x * x).sum();
        let scale = self.energy_scale().max(other.energy_scale());
        let floor = (f64::EPSILON * scale).powi(2) * a.len() as f64;
        if aa <= floor {
            return None;
        }
        let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let kappa = ab / aa;
        if kappa.is_nan() || kappa <= 0.0 || !kappa.is_finite() {
            return None;
        }
        let resid: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (y - kappa * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid <= SCALING_TOLERANCE * bb.sqrt().max(f64::MIN_POSITIVE) {
            Some(kappa)
        } else {
            None
        }
    }
}

/// Spectrum together with orthonormal eigenvectors (columns, ascending order).
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub spectrum: Spectrum,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    /// `‖H − V Λ Vᵀ‖_F`.
    pub fn reconstruction_residual(&self, matrix: &DMatrix<f64>) -> f64 {
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            self.spectrum.energies(),
        ));
        (matrix - &self.vectors * lambda * self.vectors.transpose()).norm()
    }

    pub fn dimension(&self) -> usize {
        self.spectrum.dimension()
    }
}

/// Exact spectrum of a model.
pub fn build_spectrum(model: &ModelSpec) -> Result<Spectrum> {
    model.validate()?;
    let spectrum = match model {
        ModelSpec::SingleSpin { field } => Spectrum::from_levels(vec![-field / 2.0, field / 2.0])?,
        ModelSpec::HeisenbergDimer { coupling, field } => {
            Spectrum::from_levels(dimer_levels(*coupling, *field).to_vec())?
        }
        ModelSpec::HeisenbergCluster {
            n_sites,
            bonds,
            fields,
        } => cluster_spectrum(*n_sites, bonds, fields)?,
        ModelSpec::ExplicitLevels { levels } => Spectrum::from_levels(levels.clone())?,
    };
    Ok(spectrum.with_source(model))
}

/// Singlet `3J/4`, triplet `-J/4 - b`, `-J/4`, `-J/4 + b` (unsorted).
pub fn dimer_levels(coupling: f64, field: f64) -> [f64; 4] {
    let triplet = -coupling / 4.0;
    [0.75 * coupling, triplet - field, triplet, triplet + field]
}

/// Spectrum plus eigenvectors in the computational basis.
pub fn build_eigensystem(model: &ModelSpec) -> Result<Eigensystem> {
    let matrix = hamiltonian_matrix(model)?;
    let mut system = eigensystem_dense(&matrix)?;
    system.spectrum = system.spectrum.with_source(model);
    Ok(system)
}

/// Dense Hamiltonian in the computational basis.
///
/// Explicit level lists become a diagonal matrix.
pub fn hamiltonian_matrix(model: &ModelSpec) -> Result<DMatrix<f64>> {
    model.validate()?;
    match model {
        ModelSpec::SingleSpin { field } => Ok(cluster_matrix(1, &[], &[*field])),
        ModelSpec::HeisenbergDimer { coupling, field } => Ok(cluster_matrix(
            2,
            &[Bond::new(0, 1, *coupling)],
            &[*field, *field],
        )),
        ModelSpec::HeisenbergCluster {
            n_sites,
            bonds,
            fields,
        } => Ok(cluster_matrix(*n_sites, bonds, fields)),
        ModelSpec::ExplicitLevels { levels } => Ok(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(levels),
        )),
    }
}

fn spin_z(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 1 {
        0.5
    } else {
        -0.5
    }
}

fn diagonal_energy(state: usize, bonds: &[Bond], fields: &[f64]) -> f64 {
    let zeeman: f64 = fields
        .iter()
        .enumerate()
        .map(|(site, b)| b * spin_z(state, site))
        .sum();
    let ising: f64 = bonds
        .iter()
        .map(|bond| -bond.coupling * spin_z(state, bond.i) * spin_z(state, bond.j))
        .sum();
    zeeman + ising
}

/// Basis states connected to `state` by the flip-flop part of each bond, with amplitudes.
fn flip_flops<'a>(state: usize, bonds: &'a [Bond]) -> impl Iterator<Item = (usize, f64)> + 'a {
    bonds.iter().filter_map(move |bond| {
        let (bi, bj) = (state >> bond.i & 1, state >> bond.j & 1);
        (bi != bj).then(|| (state ^ (1 << bond.i) ^ (1 << bond.j), -bond.coupling / 2.0))
    })
}

fn cluster_matrix(n_sites: usize, bonds: &[Bond], fields: &[f64]) -> DMatrix<f64> {
    let dim = 1 << n_sites;
    let mut h = DMatrix::zeros(dim, dim);
    for state in 0..dim {
        h[(state, state)] += diagonal_energy(state, bonds, fields);
        for (other, amp) in flip_flops(state, bonds) {
            h[(other, state)] += amp;
        }
    }
    h
}

/// Block-diagonalises by total `S^z`, which every supported Hamiltonian conserves.
fn cluster_spectrum(n_sites: usize, bonds: &[Bond], fields: &[f64]) -> Result<Spectrum> {
    let dim = 1usize << n_sites;
    let mut energies = Vec::with_capacity(dim);
    let mut position = vec![0usize; dim];
    for up in 0..=n_sites {
        let states: Vec<usize> = (0..dim).filter(|s| s.count_ones() as usize == up).collect();
        for (k, &s) in states.iter().enumerate() {
            position[s] = k;
        }
        let n = states.len();
        let mut block = DMatrix::zeros(n, n);
        for (k, &s) in states.iter().enumerate() {
            block[(k, k)] += diagonal_energy(s, bonds, fields);
            for (other, amp) in flip_flops(s, bonds) {
                block[(position[other], k)] += amp;
            }
        }
        if n == 1 {
            energies.push(block[(0, 0)]);
        } else {
            energies.extend(SymmetricEigen::new(block).eigenvalues.iter());
        }
    }
    Spectrum::from_levels(energies)
}

fn check_dense_input(matrix: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptySpectrum);
    }
    if rows > MAX_DIMENSION {
        return Err(Error::InvalidModel(format!(
            "matrix dimension {} exceeds {}",
            rows, MAX_DIMENSION
        )));
    }
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let scale = matrix.amax();
    let deviation = (matrix - matrix.transpose()).amax();
    if deviation > SYMMETRY_TOLERANCE * scale {
        return Err(Error::Asymmetric { deviation });
    }
    Ok(())
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn diagonalize_dense(matrix: &DMatrix<f64>) -> Result<Spectrum> {
    check_dense_input(matrix)?;
    let symmetric = (matrix + matrix.transpose()) * 0.5;
    Spectrum::from_levels(symmetric.symmetric_eigenvalues().iter().copied().collect())
}

/// Eigenvalues and eigenvectors of a real symmetric matrix, ascending.
pub fn eigensystem_dense(matrix: &DMatrix<f64>) -> Result<Eigensystem> {
    check_dense_input(matrix)?;
    let symmetric = (matrix + matrix.transpose()) * 0.5;
    let eig = SymmetricEigen::new(symmetric);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(matrix.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(Eigensystem {
        spectrum: Spectrum::from_levels(energies)?,
        vectors,
    })
}
