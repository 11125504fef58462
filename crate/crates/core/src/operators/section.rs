use nalgebra::{DMatrix, DVector};

use super::mesh::{BundleMesh, C64};
use crate::error::{Error, Result};

/// A section over the interior vertices: one fiber vector per interior
/// vertex, stacked in interior order.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    fiber_dim: usize,
    data: DVector<C64>,
}

impl Section {
    pub fn zeros(mesh: &BundleMesh) -> Self {
        Self {
            fiber_dim: mesh.fiber_dim(),
            data: DVector::zeros(mesh.dof()),
        }
    }

    pub fn from_vector(mesh: &BundleMesh, data: DVector<C64>) -> Result<Self> {
        if data.len() != mesh.dof() {
            return Err(Error::DimensionMismatch {
                expected: mesh.dof(),
                found: data.len(),
            });
        }
        Ok(Self {
            fiber_dim: mesh.fiber_dim(),
            data,
        })
    }

    /// Build from a function of the vertex id (called for interior vertices).
    pub fn from_fn(mesh: &BundleMesh, mut f: impl FnMut(usize) -> Vec<C64>) -> Result<Self> {
        let n = mesh.fiber_dim();
        let mut data = DVector::zeros(mesh.dof());
        for (k, &vertex) in mesh.interior().iter().enumerate() {
            let x = f(vertex);
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: x.len() });
            }
            for (j, z) in x.into_iter().enumerate() {
                data[k * n + j] = z;
            }
        }
        Ok(Self { fiber_dim: n, data })
    }

    /// Real scalar section from a function of the vertex id.
    pub fn scalar(mesh: &BundleMesh, mut f: impl FnMut(usize) -> f64) -> Result<Self> {
        if mesh.fiber_dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: mesh.fiber_dim(),
            });
        }
        Self::from_fn(mesh, |u| vec![C64::new(f(u), 0.0)])
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.fiber_dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.data
    }

    /// Fiber vector at interior index `k`.
    pub fn fiber(&self, k: usize) -> &[C64] {
        &self.data.as_slice()[k * self.fiber_dim..(k + 1) * self.fiber_dim]
    }

    /// `‖f_u‖` at every interior vertex.
    pub fn pointwise_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.fiber(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }

    /// The scalar section `|f|`.
    pub fn modulus(&self) -> Section {
        Section {
            fiber_dim: 1,
            data: DVector::from_iterator(self.len(), self.pointwise_norms().into_iter().map(|x| C64::new(x, 0.0))),
        }
    }

    /// `‖f‖² = Σ μ_u ‖f_u‖²`
    pub fn norm_sqr(&self, mu: &[f64]) -> f64 {
        self.pointwise_norms().iter().zip(mu).map(|(x, m)| m * x * x).sum()
    }

    pub(crate) fn check(&self, mesh: &BundleMesh) -> Result<()> {
        if self.fiber_dim != mesh.fiber_dim() || self.data.len() != mesh.dof() {
            return Err(Error::DimensionMismatch {
                expected: mesh.dof(),
                found: self.data.len(),
            });
        }
        Ok(())
    }
}

/// Hermitian endomorphism field over the interior vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct EndoField {
    blocks: Vec<DMatrix<C64>>,
}

/// Hermiticity tolerance, relative to the block size.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

impl EndoField {
    pub fn new(blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        for (k, b) in blocks.iter().enumerate() {
            if b.nrows() != b.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: b.nrows(),
                    found: b.ncols(),
                });
            }
            let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let dev = (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !(dev <= HERMITIAN_TOLERANCE * scale) {
                return Err(Error::NotHermitian { vertex: k, deviation: dev });
            }
        }
        Ok(Self { blocks })
    }

    /// `V_u = v(u)·Id` from a function of the vertex id.
    pub fn scalar(mesh: &BundleMesh, mut v: impl FnMut(usize) -> f64) -> Self {
        let n = mesh.fiber_dim();
        Self {
            blocks: mesh
                .interior()
                .iter()
                .map(|&u| DMatrix::identity(n, n) * C64::new(v(u), 0.0))
                .collect(),
        }
    }

    pub fn zero(mesh: &BundleMesh) -> Self {
        Self::scalar(mesh, |_| 0.0)
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn is_real(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|z| z.im == 0.0))
    }

    pub(crate) fn check(&self, mesh: &BundleMesh) -> Result<()> {
        if self.blocks.len() != mesh.interior().len() {
            return Err(Error::DimensionMismatch {
                expected: mesh.interior().len(),
                found: self.blocks.len(),
            });
        }
        let n = mesh.fiber_dim();
        if let Some(b) = self.blocks.iter().find(|b| b.nrows() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.nrows(),
            });
        }
        Ok(())
    }

    /// `Σ μ_u ⟨V_u f_u, f_u⟩`
    pub fn expectation(&self, f: &Section, mu: &[f64]) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let x = DVector::from_column_slice(f.fiber(k));
                mu[k] * (x.adjoint() * b * &x)[(0, 0)].re
            })
            .sum()
    }
}

/// Pointwise spectral split `V = V₁ - V₂` with `V₁, V₂ ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSplit {
    pub positive: EndoField,
    pub negative: EndoField,
    /// largest eigenvalue of `(V₂)_u`
    pub max_sigma: Vec<f64>,
}

pub fn fiber_split(v: &EndoField) -> FiberSplit {
    let mut pos = Vec::with_capacity(v.blocks.len());
    let mut neg = Vec::with_capacity(v.blocks.len());
    let mut max_sigma = Vec::with_capacity(v.blocks.len());
    for b in &v.blocks {
        let n = b.nrows();
        let eig = b.clone().symmetric_eigen();
        let mut p = DMatrix::<C64>::zeros(n, n);
        let mut q = DMatrix::<C64>::zeros(n, n);
        let mut top: f64 = 0.0;
        for (j, &lam) in eig.eigenvalues.iter().enumerate() {
            let col = eig.eigenvectors.column(j);
            let proj = col * col.adjoint();
            // zero eigenvalues go to V₁, which keeps V₂ minimal
            if lam >= 0.0 {
                p += proj * C64::new(lam, 0.0);
            } else {
                q += proj * C64::new(-lam, 0.0);
                top = top.max(-lam);
            }
        }
        let hp = (&p + p.adjoint()).unscale(2.0);
        let hq = (&q + q.adjoint()).unscale(2.0);
        pos.push(hp);
        neg.push(hq);
        max_sigma.push(top);
    }
    FiberSplit {
        positive: EndoField { blocks: pos },
        negative: EndoField { blocks: neg },
        max_sigma,
    }
}
