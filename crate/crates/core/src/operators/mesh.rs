use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Unitarity tolerance for link transports.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub mu: f64,
    #[serde(default)]
    pub dirichlet: bool,
    /// optional embedding, used by grid meshes and plots
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl Vertex {
    pub fn new(mu: f64, dirichlet: bool) -> Self {
        Self {
            mu,
            dirichlet,
            coords: None,
        }
    }
}

/// Undirected edge `{u, v}` with weight `w` and transport `U_{uv}` from the
/// fiber at `u` to the fiber at `v`; the reverse transport is `U_{uv}^*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
    pub transport: DMatrix<C64>,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64, transport: DMatrix<C64>) -> Self {
        Self { u, v, w, transport }
    }

    /// Scalar edge with the phase `e^{iθ}` as transport.
    pub fn phase(u: usize, v: usize, w: f64, theta: f64) -> Self {
        Self::new(u, v, w, DMatrix::from_element(1, 1, C64::from_polar(1.0, theta)))
    }

    pub fn trivial(u: usize, v: usize, w: f64, n: usize) -> Self {
        Self::new(u, v, w, DMatrix::identity(n, n))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    u: usize,
    v: usize,
    w: f64,
    /// row-major `[re, im]` pairs; absent means identity
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    transport: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    #[serde(default = "one")]
    fiber_dim: usize,
    vertices: Vec<Vertex>,
    edges: Vec<RawEdge>,
}

fn one() -> usize {
    1
}

/// Weighted graph with a unitary connection on a rank-`n` Hermitian bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMesh", into = "RawMesh")]
pub struct BundleMesh {
    fiber_dim: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    /// interior vertex ids in order; position = interior index
    interior: Vec<usize>,
    /// vertex id -> interior index
    slot: Vec<Option<usize>>,
}

impl TryFrom<RawMesh> for BundleMesh {
    type Error = Error;

    fn try_from(raw: RawMesh) -> Result<Self> {
        let n = raw.fiber_dim;
        let edges = raw
            .edges
            .into_iter()
            .map(|e| {
                let transport = match e.transport {
                    None => DMatrix::identity(n, n),
                    Some(entries) => {
                        if entries.len() != n * n {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({}, {}) transport has {} entries, expected {}",
                                e.u,
                                e.v,
                                entries.len(),
                                n * n
                            )));
                        }
                        DMatrix::from_row_iterator(n, n, entries.into_iter().map(|[re, im]| C64::new(re, im)))
                    }
                };
                Ok(Edge::new(e.u, e.v, e.w, transport))
            })
            .collect::<Result<Vec<_>>>()?;
        BundleMesh::new(n, raw.vertices, edges)
    }
}

impl From<BundleMesh> for RawMesh {
    fn from(m: BundleMesh) -> Self {
        RawMesh {
            fiber_dim: m.fiber_dim,
            edges: m
                .edges
                .iter()
                .map(|e| RawEdge {
                    u: e.u,
                    v: e.v,
                    w: e.w,
                    transport: Some(
                        (0..m.fiber_dim)
                            .flat_map(|i| (0..m.fiber_dim).map(move |j| (i, j)))
                            .map(|(i, j)| [e.transport[(i, j)].re, e.transport[(i, j)].im])
                            .collect(),
                    ),
                })
                .collect(),
            vertices: m.vertices,
        }
    }
}

fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    let p = u.adjoint() * u - DMatrix::<C64>::identity(n, n);
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl BundleMesh {
    pub fn new(fiber_dim: usize, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::InvalidMesh("fiber dimension must be at least 1".into()));
        }
        if vertices.is_empty() {
            return Err(Error::InvalidMesh("mesh has no vertices".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.mu > 0.0) || !v.mu.is_finite() {
                return Err(Error::InvalidMesh(format!("vertex {i} has non-positive weight μ = {}", v.mu)));
            }
        }
        let nv = vertices.len();
        let mut seen = std::collections::HashSet::new();
        for (k, e) in edges.iter().enumerate() {
            if e.u >= nv || e.v >= nv || e.u == e.v {
                return Err(Error::InvalidMesh(format!("edge {k} ({}, {}) is not a pair of distinct vertices", e.u, e.v)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidMesh(format!("edge ({}, {}) appears twice", e.u, e.v)));
            }
            if !(e.w > 0.0) || !e.w.is_finite() {
                return Err(Error::InvalidMesh(format!("edge {k} has non-positive weight {}", e.w)));
            }
            if e.transport.nrows() != fiber_dim || e.transport.ncols() != fiber_dim {
                return Err(Error::InvalidMesh(format!(
                    "edge {k} transport is {}x{}, fiber dimension is {fiber_dim}",
                    e.transport.nrows(),
                    e.transport.ncols()
                )));
            }
            let d = unitarity_defect(&e.transport);
            if !(d <= UNITARY_TOLERANCE) {
                return Err(Error::InvalidMesh(format!("edge {k} transport is not unitary (defect {d:e})")));
            }
        }
        // connectivity by union-find
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &edges {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        if (0..nv).any(|i| find(&mut parent, i) != root) {
            return Err(Error::InvalidMesh("mesh graph is disconnected".into()));
        }
        let mut slot = vec![None; nv];
        let mut interior = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            if !v.dirichlet {
                slot[i] = Some(interior.len());
                interior.push(i);
            }
        }
        Ok(Self {
            fiber_dim,
            vertices,
            edges,
            interior,
            slot,
        })
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Interior (non-Dirichlet) vertex ids.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Interior index of a vertex, `None` for Dirichlet vertices.
    pub fn slot(&self, vertex: usize) -> Option<usize> {
        self.slot[vertex]
    }

    /// Degrees of freedom: interior vertices times fiber dimension.
    pub fn dof(&self) -> usize {
        self.interior.len() * self.fiber_dim
    }

    /// `μ` of each interior vertex.
    pub fn interior_mu(&self) -> Vec<f64> {
        self.interior.iter().map(|&i| self.vertices[i].mu).collect()
    }

    /// Same graph, weights and Dirichlet set with the trivial line bundle.
    pub fn scalar(&self) -> Self {
        let edges = self.edges.iter().map(|e| Edge::trivial(e.u, e.v, e.w, 1)).collect();
        Self::new(1, self.vertices.clone(), edges).expect("scalar reduction of a valid mesh")
    }

    /// Gauge transform `U_{uv} ↦ g_v U_{uv} g_u^*` by vertex unitaries.
    pub fn gauge_transformed(&self, g: &[DMatrix<C64>]) -> Result<Self> {
        if g.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vertices.len(),
                found: g.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(e.u, e.v, e.w, &g[e.v] * &e.transport * g[e.u].adjoint()))
            .collect();
        Self::new(self.fiber_dim, self.vertices.clone(), edges)
    }

    /// The same mesh with the listed vertices turned into Dirichlet vertices.
    pub fn with_dirichlet(&self, extra: &[usize]) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        for &i in extra {
            vertices
                .get_mut(i)
                .ok_or_else(|| Error::InvalidMesh(format!("no vertex {i}")))?
                .dirichlet = true;
        }
        Self::new(self.fiber_dim, vertices, self.edges.clone())
    }

    /// `true` when every transport is a real matrix.
    pub fn is_real(&self) -> bool {
        self.edges.iter().all(|e| e.transport.iter().all(|z| z.im == 0.0))
    }
}
