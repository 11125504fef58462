//! Bundled mesh families.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mesh::{BundleMesh, Edge, Vertex, C64};
use super::section::Section;
use crate::error::{Error, Result};
use crate::geometry::ModelSpace;
use crate::quadrature::gk21;

/// Uniform mesh of `[a, b]` with step `h`: `μ_u = h`, `w_uv = 1/h`, and
/// Dirichlet end points.
pub fn interval(a: f64, b: f64, h: f64) -> Result<BundleMesh> {
    if !(b > a) || !(h > 0.0) {
        return Err(Error::Usage(format!("interval needs a < b and h > 0, got [{a}, {b}], h = {h}")));
    }
    let n = ((b - a) / h).round() as usize;
    if n < 2 || ((b - a) / h - n as f64).abs() > 1e-9 * n as f64 {
        return Err(Error::Usage(format!("step {h} does not divide [{a}, {b}] into at least two cells")));
    }
    let vertices = (0..=n)
        .map(|i| Vertex {
            mu: h,
            dirichlet: i == 0 || i == n,
            coords: Some(vec![a + i as f64 * h]),
        })
        .collect();
    let edges = (0..n).map(|i| Edge::trivial(i, i + 1, 1.0 / h, 1)).collect();
    BundleMesh::new(1, vertices, edges)
}

/// Index of the vertex of an [`interval`] mesh closest to `x`.
pub fn interval_vertex(mesh: &BundleMesh, x: f64) -> Option<usize> {
    mesh.vertices()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.coords.as_ref().map(|c| (i, (c[0] - x).abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
}

/// Path of `interior` vertices between two Dirichlet vertices, `μ = w = 1`.
pub fn dirichlet_path(interior: usize) -> Result<BundleMesh> {
    if interior == 0 {
        return Err(Error::Usage("a Dirichlet path needs at least one interior vertex".into()));
    }
    let n = interior + 2;
    let vertices = (0..n).map(|i| Vertex::new(1.0, i == 0 || i == n - 1)).collect();
    let edges = (0..n - 1).map(|i| Edge::trivial(i, i + 1, 1.0, 1)).collect();
    BundleMesh::new(1, vertices, edges)
}

/// Cycle of `len` vertices, `μ = w = 1`, with transport `e^{iθ}` on every
/// edge oriented `u → u + 1`; the total flux is `len·θ`.
pub fn flux_cycle(len: usize, theta: f64) -> Result<BundleMesh> {
    if len < 3 {
        return Err(Error::Usage("a cycle needs at least three vertices".into()));
    }
    let vertices = (0..len).map(|_| Vertex::new(1.0, false)).collect();
    let edges = (0..len).map(|i| Edge::phase(i, (i + 1) % len, 1.0, theta)).collect();
    BundleMesh::new(1, vertices, edges)
}

/// Rectangular grid with spacing `h`, Dirichlet boundary ring, and Peierls
/// links `U_uv = exp(-i ∫_{u→v} A)` for the symmetric-gauge potential
/// `A = ½B(-y, x)` of a constant field `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub spacing: f64,
    #[serde(default)]
    pub field: f64,
}

/// Symmetric-gauge potential `½B(-y, x)`.
pub fn symmetric_gauge(field: f64, p: &[f64]) -> [f64; 2] {
    [-0.5 * field * p[1], 0.5 * field * p[0]]
}

pub fn grid_2d(spec: &GridSpec) -> Result<BundleMesh> {
    let h = spec.spacing;
    let cells = |lo: f64, hi: f64| -> Result<usize> {
        let n = ((hi - lo) / h).round() as usize;
        if !(hi > lo) || !(h > 0.0) || n < 2 || ((hi - lo) / h - n as f64).abs() > 1e-9 * n as f64 {
            return Err(Error::Usage(format!("spacing {h} does not divide [{lo}, {hi}]")));
        }
        Ok(n)
    };
    let nx = cells(spec.x[0], spec.x[1])?;
    let ny = cells(spec.y[0], spec.y[1])?;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let pos = |i: usize, j: usize| [spec.x[0] + i as f64 * h, spec.y[0] + j as f64 * h];
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vertex {
                mu: h * h,
                dirichlet: i == 0 || j == 0 || i == nx || j == ny,
                coords: Some(pos(i, j).to_vec()),
            });
        }
    }
    let link = |p: [f64; 2], q: [f64; 2]| {
        // A is linear, so the midpoint rule is exact on straight edges
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let a = symmetric_gauge(spec.field, &mid);
        -(a[0] * (q[0] - p[0]) + a[1] * (q[1] - p[1]))
    };
    let mut edges = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if i < nx {
                edges.push(Edge::phase(id(i, j), id(i + 1, j), 1.0, link(pos(i, j), pos(i + 1, j))));
            }
            if j < ny {
                edges.push(Edge::phase(id(i, j), id(i, j + 1), 1.0, link(pos(i, j), pos(i, j + 1))));
            }
        }
    }
    BundleMesh::new(1, vertices, edges)
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag R` moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let z = DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    // re-orthonormalise to push the unitarity defect to rounding level
    let qr = q.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let mut col = q.column_mut(j);
        col *= d / d.norm();
    }
    q
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMeshSpec {
    pub vertices: usize,
    pub fiber_dim: usize,
    /// probability of each non-tree edge
    #[serde(default = "default_extra")]
    pub extra_edge_probability: f64,
    /// number of Dirichlet vertices
    #[serde(default)]
    pub dirichlet: usize,
    /// all transports equal to the identity
    #[serde(default)]
    pub trivial: bool,
    pub seed: u64,
}

fn default_extra() -> f64 {
    0.2
}

/// Random connected graph (random recursive tree plus extra edges) with
/// weights `μ, w ∈ [0.5, 2]` and Haar transports.
pub fn random_bundle_mesh(spec: &RandomMeshSpec) -> Result<BundleMesh> {
    let nv = spec.vertices;
    if nv < 2 || spec.fiber_dim == 0 || spec.dirichlet >= nv {
        return Err(Error::Usage("random mesh needs >= 2 vertices, fiber_dim >= 1 and an interior vertex".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.fiber_dim;
    let mut vertices: Vec<Vertex> = (0..nv).map(|_| Vertex::new(rng.random_range(0.5..2.0), false)).collect();
    let mut order: Vec<usize> = (0..nv).collect();
    for i in (1..nv).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for &i in order.iter().take(spec.dirichlet) {
        vertices[i].dirichlet = true;
    }
    let transport = |rng: &mut ChaCha8Rng| {
        if spec.trivial {
            DMatrix::identity(n, n)
        } else {
            haar_unitary(n, rng)
        }
    };
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    for v in 1..nv {
        let u = rng.random_range(0..v);
        present.insert((u, v));
        let w = rng.random_range(0.5..2.0);
        let t = transport(&mut rng);
        edges.push(Edge::new(u, v, w, t));
    }
    for u in 0..nv {
        for v in u + 1..nv {
            if !present.contains(&(u, v)) && rng.random::<f64>() < spec.extra_edge_probability {
                let w = rng.random_range(0.5..2.0);
                let t = transport(&mut rng);
                edges.push(Edge::new(u, v, w, t));
            }
        }
    }
    BundleMesh::new(n, vertices, edges)
}

/// Finite-volume mesh of the radial heat equation in the geodesic ball of
/// radius `radius` about the origin of a model space: `shells` cells
/// `[iΔ, (i+1)Δ]` with exact shell volumes as `μ`, face fluxes
/// `|S_{(i+1)Δ}|/Δ` as weights, and a Dirichlet vertex on the boundary sphere.
///
/// Radial functions evolve under `e^{-tH}` like the killed heat semigroup;
/// vertex 0 represents the centre.
pub fn radial_ball(space: &ModelSpace, radius: f64, shells: usize) -> Result<BundleMesh> {
    if !(radius > 0.0) || shells < 2 {
        return Err(Error::Usage("radial ball needs radius > 0 and at least two shells".into()));
    }
    let d = radius / shells as f64;
    let mut vertices: Vec<Vertex> = (0..shells)
        .map(|i| {
            let (lo, hi) = (i as f64 * d, (i + 1) as f64 * d);
            Vertex {
                mu: gk21(&mut |r| space.sphere_area(r), lo, hi).0,
                dirichlet: false,
                coords: Some(vec![0.5 * (lo + hi)]),
            }
        })
        .collect();
    vertices.push(Vertex {
        mu: 1.0,
        dirichlet: true,
        coords: Some(vec![radius]),
    });
    let mut edges: Vec<Edge> = (0..shells - 1)
        .map(|i| Edge::trivial(i, i + 1, space.sphere_area((i + 1) as f64 * d) / d, 1))
        .collect();
    edges.push(Edge::trivial(shells - 1, shells, space.sphere_area(radius) / (0.5 * d), 1));
    BundleMesh::new(1, vertices, edges)
}

/// Section with independent entries uniform on `[-½, ½] + i[-½, ½]`
/// (real entries on a real mesh).
pub fn random_section(mesh: &BundleMesh, rng: &mut impl Rng) -> Section {
    let n = mesh.fiber_dim();
    let real = mesh.is_real();
    let mut entry = || {
        let re = rng.random::<f64>() - 0.5;
        let im = if real { 0.0 } else { rng.random::<f64>() - 0.5 };
        C64::new(re, im)
    };
    Section::from_fn(mesh, |_| (0..n).map(|_| entry()).collect()).expect("shape matches mesh")
}
