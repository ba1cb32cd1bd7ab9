//! Levi form and gradient form as real symmetric `2n × 2n` matrices.
//!
//! Coordinates are stacked as `(x₁..xₙ, y₁..yₙ)`. The complex structure acts
//! by `J(v_x, v_y) = (−v_y, v_x)`, and the Levi form of `f` is realized as
//! `H + JᵀHJ` with `H` the real Hessian, so that `|y|²` maps to `2·Id`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::LabError;
use crate::jet::{Jet2, Point, ScalarField};

/// Real symmetric matrix of `dd^c f(·, √−1·)` or `df ∧ d^c f(·, √−1·)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeviMatrix {
    pub n: usize,
    pub entries: DMatrix<f64>,
}

/// Sorted spectrum plus the quantities used to scale tolerances.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub spectral_radius: f64,
}

impl LeviMatrix {
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self, LabError> {
        let (r, c) = entries.shape();
        if r != c || r % 2 != 0 || r == 0 {
            return Err(LabError::Dimension(format!(
                "Levi matrix must be square of even size, got {r}x{c}"
            )));
        }
        Ok(Self { n: r / 2, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: DMatrix::zeros(2 * n, 2 * n),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Result<Spectrum, LabError> {
        if self.entries.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFiniteMatrix);
        }
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eigenvalues.sort_by(f64::total_cmp);
        let spectral_radius = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(Spectrum {
            eigenvalues,
            spectral_radius,
        })
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LabError> {
        Ok(self.spectrum()?.eigenvalues[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64, LabError> {
        Ok(*self.spectrum()?.eigenvalues.last().expect("nonempty"))
    }

    pub fn spectral_radius(&self) -> Result<f64, LabError> {
        Ok(self.spectrum()?.spectral_radius)
    }

    /// `min_eigenvalue ≥ −tol · max(1, spectral_radius)`.
    pub fn is_psd(&self, tol: f64) -> Result<bool, LabError> {
        let s = self.spectrum()?;
        Ok(s.eigenvalues[0] >= -tol * s.spectral_radius.max(1.0))
    }

    /// Frobenius norm of `MJ − JM`.
    pub fn commutator_norm(&self) -> f64 {
        let j = j_matrix(self.n);
        (&self.entries * &j - &j * &self.entries).norm()
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    /// `M v` for a stacked real vector.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.entries * v
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            entries: &self.entries * c,
        }
    }
}

impl std::ops::Add for &LeviMatrix {
    type Output = LeviMatrix;
    fn add(self, rhs: &LeviMatrix) -> LeviMatrix {
        LeviMatrix {
            n: self.n,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl std::ops::Sub for &LeviMatrix {
    type Output = LeviMatrix;
    fn sub(self, rhs: &LeviMatrix) -> LeviMatrix {
        LeviMatrix {
            n: self.n,
            entries: &self.entries - &rhs.entries,
        }
    }
}

/// `J(v_x, v_y) = (−v_y, v_x)`.
pub fn apply_j(v: &[f64]) -> Result<Vec<f64>, LabError> {
    if v.len() % 2 != 0 {
        return Err(LabError::Dimension(format!(
            "complex structure needs an even-length vector, got {}",
            v.len()
        )));
    }
    let n = v.len() / 2;
    Ok(v[n..]
        .iter()
        .map(|c| -c)
        .chain(v[..n].iter().copied())
        .collect())
}

pub(crate) fn apply_j_vec(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 2;
    DVector::from_fn(2 * n, |i, _| if i < n { -v[n + i] } else { v[i - n] })
}

/// The matrix `[[0, −I], [I, 0]]`.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// `H + JᵀHJ` for a Hessian `H`.
pub fn levi_from_hessian(hessian: &DMatrix<f64>) -> LeviMatrix {
    let n = hessian.nrows() / 2;
    let j = j_matrix(n);
    let mut entries = hessian + j.transpose() * hessian * &j;
    let t = entries.transpose();
    entries = (entries + t) * 0.5;
    LeviMatrix { n, entries }
}

/// `ggᵀ + (Jg)(Jg)ᵀ` for a gradient `g`.
pub fn grad_form_from_gradient(g: &DVector<f64>) -> LeviMatrix {
    let n = g.len() / 2;
    let jg = apply_j_vec(g);
    let mut entries = g * g.transpose();
    entries.ger(1.0, &jg, &jg, 1.0);
    LeviMatrix { n, entries }
}

pub fn levi_of_jet(jet: &Jet2) -> LeviMatrix {
    levi_from_hessian(&jet.hessian)
}

pub fn levi_matrix(f: &dyn ScalarField, p: &Point) -> Result<LeviMatrix, LabError> {
    Ok(levi_of_jet(&f.eval(p)?))
}

pub fn grad_form_matrix(f: &dyn ScalarField, p: &Point) -> Result<LeviMatrix, LabError> {
    Ok(grad_form_from_gradient(&f.eval(p)?.gradient))
}

pub fn min_eigenvalue(m: &LeviMatrix) -> Result<f64, LabError> {
    m.min_eigenvalue()
}

pub fn is_psd(m: &LeviMatrix, tol: f64) -> Result<bool, LabError> {
    m.is_psd(tol)
}
