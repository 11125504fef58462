use nalgebra::{DMatrix, DVector};

use super::mesh::{BundleMesh, C64};
use super::section::{EndoField, Section};
use crate::error::Result;

/// Compressed sparse rows with complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<C64>,
}

impl Csr {
    fn from_rows(n: usize, mut rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(j, z) in row.iter() {
                if last == Some(j) {
                    *val.last_mut().expect("entry") += z;
                } else {
                    col.push(j);
                    val.push(z);
                    last = Some(j);
                }
            }
            row_ptr.push(col.len());
        }
        Self { n, row_ptr, col, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            self.n,
            (0..self.n).map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.val[k] * x[self.col[k]])
                    .sum::<C64>()
            }),
        )
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col[k])] += self.val[k];
            }
        }
        m
    }

    /// Row sums of absolute values, an upper bound for the spectral radius.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.val[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Discrete Bochner Laplacian
/// `(H f)_u = (1/(2μ_u)) Σ_{v∼u} w_{uv}(f_u - U_{vu} f_v)` on interior vertices.
///
/// Stored as `H = M⁻¹K` with `M = diag(μ)` and the Hermitian stiffness `K`,
/// so that `⟨Hf, f⟩_μ = f*Kf`. Spectral work uses `Ĥ = M^{-1/2} K M^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BochnerLaplacian {
    mesh: BundleMesh,
    mu: Vec<f64>,
    stiffness: Csr,
    real: bool,
}

pub fn bochner_laplacian(mesh: &BundleMesh) -> Result<BochnerLaplacian> {
    let n = mesh.fiber_dim();
    let dof = mesh.dof();
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dof];
    for e in mesh.edges() {
        let half = C64::new(0.5 * e.w, 0.0);
        let a = mesh.slot(e.u);
        let b = mesh.slot(e.v);
        for s in [a, b].into_iter().flatten() {
            for j in 0..n {
                rows[s * n + j].push((s * n + j, half));
            }
        }
        if let (Some(a), Some(b)) = (a, b) {
            // K[a, b] = -½w U_{vu} = -½w U_{uv}^*,  K[b, a] = -½w U_{uv}
            for i in 0..n {
                for j in 0..n {
                    let uij = e.transport[(i, j)];
                    rows[b * n + i].push((a * n + j, -half * uij));
                    rows[a * n + j].push((b * n + i, -half * uij.conj()));
                }
            }
        }
    }
    Ok(BochnerLaplacian {
        mu: mesh.interior_mu(),
        stiffness: Csr::from_rows(dof, rows),
        real: mesh.is_real(),
        mesh: mesh.clone(),
    })
}

/// `-Δ/2` on the same weighted graph: trivial line bundle.
pub fn scalar_laplacian(mesh: &BundleMesh) -> Result<BochnerLaplacian> {
    bochner_laplacian(&mesh.scalar())
}

impl BochnerLaplacian {
    pub fn mesh(&self) -> &BundleMesh {
        &self.mesh
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn dof(&self) -> usize {
        self.stiffness.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.mesh.fiber_dim()
    }

    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// `μ` per degree of freedom.
    pub fn dof_mu(&self) -> DVector<f64> {
        let n = self.fiber_dim();
        DVector::from_iterator(self.dof(), (0..self.dof()).map(|i| self.mu[i / n]))
    }

    pub fn apply(&self, f: &Section) -> Result<Section> {
        f.check(&self.mesh)?;
        let kf = self.stiffness.matvec(f.vector());
        let mu = self.dof_mu();
        Section::from_vector(&self.mesh, kf.zip_map(&mu, |z, m| z / m))
    }

    /// Matrix of `H` in the vertex basis (not symmetric unless `μ` is constant).
    pub fn matrix(&self) -> DMatrix<C64> {
        let mut k = self.stiffness.to_dense();
        let mu = self.dof_mu();
        for (i, mut row) in k.row_iter_mut().enumerate() {
            row /= C64::new(mu[i], 0.0);
        }
        k
    }

    /// `Ĥ + V` with `Ĥ = M^{-1/2} K M^{-1/2}`: Hermitian, similar to `H + V`.
    pub fn symmetric_matrix(&self, v: Option<&EndoField>) -> Result<DMatrix<C64>> {
        let mut k = self.stiffness.to_dense();
        let s = self.dof_mu().map(|m| 1.0 / m.sqrt());
        for i in 0..k.nrows() {
            for j in 0..k.ncols() {
                k[(i, j)] *= s[i] * s[j];
            }
        }
        if let Some(v) = v {
            v.check(&self.mesh)?;
            let n = self.fiber_dim();
            for (b, block) in v.blocks().iter().enumerate() {
                let mut view = k.view_mut((b * n, b * n), (n, n));
                view += block;
            }
        }
        Ok((&k + k.adjoint()).unscale(2.0))
    }

    /// `g ↦ (Ĥ + V)g`, matrix free.
    pub fn symmetric_apply(&self, v: Option<&EndoField>, g: &DVector<C64>) -> DVector<C64> {
        let s = self.dof_mu().map(|m| 1.0 / m.sqrt());
        let x = g.zip_map(&s, |z, w| z * w);
        let mut y = self.stiffness.matvec(&x).zip_map(&s, |z, w| z * w);
        if let Some(v) = v {
            let n = self.fiber_dim();
            for (b, block) in v.blocks().iter().enumerate() {
                let gb = g.rows(b * n, n);
                let add = block * gb;
                let mut yb = y.rows_mut(b * n, n);
                yb += add;
            }
        }
        y
    }

    /// Upper bound on `‖Ĥ + V‖`.
    pub fn norm_bound(&self, v: Option<&EndoField>) -> f64 {
        let mu_min = self.mu.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = v.map_or(0.0, |v| {
            v.blocks()
                .iter()
                .map(|b| b.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max))
                .fold(0.0, f64::max)
        });
        // Gershgorin on Ĥ: |Ĥ_ij| = |K_ij|/√(μ_i μ_j) ≤ |K_ij|/μ_min
        self.stiffness.max_abs_row_sum() / mu_min + vmax
    }

    /// `g = M^{1/2} f`
    pub fn to_symmetric(&self, f: &Section) -> DVector<C64> {
        let mu = self.dof_mu();
        f.vector().zip_map(&mu, |z, m| z * m.sqrt())
    }

    /// `f = M^{-1/2} g`
    pub fn from_symmetric(&self, g: DVector<C64>) -> Section {
        let mu = self.dof_mu();
        Section::from_vector(&self.mesh, g.zip_map(&mu, |z, m| z / m.sqrt())).expect("dof-sized vector")
    }

    /// `q_{H(0)}(f) = ½ Σ_edges w_{uv}‖f_u - U_{vu} f_v‖²` (Dirichlet values 0),
    /// summed edge by edge so it is nonnegative by construction.
    pub fn kinetic(&self, f: &Section) -> Result<f64> {
        f.check(&self.mesh)?;
        let n = self.fiber_dim();
        let zero = vec![C64::new(0.0, 0.0); n];
        let mut total = 0.0;
        for e in self.mesh.edges() {
            let fu = self.mesh.slot(e.u).map_or(&zero[..], |k| f.fiber(k));
            let fv = self.mesh.slot(e.v).map_or(&zero[..], |k| f.fiber(k));
            // ‖U_{uv} f_u - f_v‖ = ‖f_u - U_{vu} f_v‖
            let mut s = 0.0;
            for i in 0..n {
                let mut z = -fv[i];
                for j in 0..n {
                    z += e.transport[(i, j)] * fu[j];
                }
                s += z.norm_sqr();
            }
            total += 0.5 * e.w * s;
        }
        Ok(total)
    }
}
