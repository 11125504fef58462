use nalgebra::{ComplexField, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mesh::C64;
use crate::error::{Error, Result};

/// Largest dimension handled by dense eigensolvers.
pub const DENSE_EIGEN_LIMIT: usize = 1500;
/// Largest dimension handled by dense matrix exponentials.
pub const DENSE_EXP_LIMIT: usize = 200;
/// Accepted relative disagreement between the two dense exponential routes.
pub const EXP_TOLERANCE: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn sorted<T: ComplexField<RealField = f64>>(h: DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])].clone());
    (values, vectors)
}

/// Dense Hermitian eigensolve; real symmetric input takes a real fast path.
pub fn hermitian_eigen(h: &DMatrix<C64>) -> Eigen {
    if is_real(h) {
        let (values, v) = sorted(h.map(|z| z.re));
        Eigen {
            values,
            vectors: v.map(|x| C64::new(x, 0.0)),
        }
    } else {
        let (values, vectors) = sorted(h.clone());
        Eigen { values, vectors }
    }
}

impl Eigen {
    /// `max_i ‖h v_i - λ_i v_i‖`
    pub fn max_residual(&self, h: &DMatrix<C64>) -> f64 {
        let r = h * &self.vectors - &self.vectors * DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&l| C64::new(l, 0.0)),
        ));
        r.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Q φ(Λ) Q^*`
    pub fn function(&self, phi: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (j, mut c) in scaled.column_iter_mut().enumerate() {
            c *= C64::new(phi(self.values[j]), 0.0);
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-t h)` for Hermitian `h` by scaling and squaring (Padé), certified
/// against the spectral route `Q e^{-tΛ} Q^*`.
pub fn dense_exp(h: &DMatrix<C64>, t: f64) -> Result<DMatrix<C64>> {
    let e = (h * C64::new(-t, 0.0)).exp();
    let eig = hermitian_eigen(h);
    let spectral = eig.function(|l| (-t * l).exp());
    let scale = spectral.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = (&e - &spectral).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    if !(residual <= EXP_TOLERANCE) {
        return Err(Error::Exponential { residual });
    }
    Ok(e)
}

/// Result of a Krylov exponential action.
#[derive(Clone, Debug)]
pub struct KrylovExp {
    pub value: DVector<C64>,
    /// accumulated a-posteriori error estimate (absolute, Euclidean norm)
    pub error: f64,
    pub matvecs: usize,
}

const KRYLOV_MAX_BASIS: usize = 80;
const KRYLOV_MAX_EXPONENT: f64 = 30.0;

/// `max |λ|` of a Hermitian operator, from the extreme Ritz values of a short
/// Lanczos run (inflated by 20% as Ritz values approach from inside).
pub fn spectral_radius_estimate(op: &impl Fn(&DVector<C64>) -> DVector<C64>, dim: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let v = DVector::from_fn(dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let vn = v.norm();
    let mut lz = Lanczos::start(v / C64::new(vn, 0.0));
    for _ in 0..30.min(dim) {
        if lz.step(op) == 0.0 {
            break;
        }
    }
    let (vals, _) = sorted(lz.tridiagonal());
    1.2 * vals.iter().fold(0.0f64, |a, l| a.max(l.abs()))
}

/// Lanczos basis and tridiagonal coefficients for a Hermitian operator.
struct Lanczos {
    basis: Vec<DVector<C64>>,
    alpha: Vec<f64>,
    /// `beta[j]` couples basis vectors `j` and `j + 1`
    beta: Vec<f64>,
}

impl Lanczos {
    fn start(v: DVector<C64>) -> Self {
        Self {
            basis: vec![v],
            alpha: Vec::new(),
            beta: Vec::new(),
        }
    }

    /// One Lanczos step with full reorthogonalisation; returns `β_{j+1}`.
    fn step(&mut self, op: &impl Fn(&DVector<C64>) -> DVector<C64>) -> f64 {
        let j = self.alpha.len();
        let mut w = op(&self.basis[j]);
        let a = self.basis[j].dotc(&w).re;
        self.alpha.push(a);
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dotc(&w);
                w.axpy(-c, q, C64::new(1.0, 0.0));
            }
        }
        let b = w.norm();
        self.beta.push(b);
        if b > 0.0 {
            self.basis.push(w / C64::new(b, 0.0));
        }
        b
    }

    fn tridiagonal(&self) -> DMatrix<f64> {
        let m = self.alpha.len();
        DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                self.alpha[i]
            } else if i + 1 == j {
                self.beta[i]
            } else if j + 1 == i {
                self.beta[j]
            } else {
                0.0
            }
        })
    }
}

/// `exp(-t A) b` for a Hermitian operator `A` given by its action, with
/// adaptive time stepping so every Krylov basis stays below 80 vectors.
///
/// Each substep is accepted when the a-posteriori estimate
/// `‖x‖ β_{m+1} |e_m^T exp(-τT_m) e_1|` is below its share of `tol·‖b‖`.
pub fn krylov_exp_action(
    op: impl Fn(&DVector<C64>) -> DVector<C64>,
    b: &DVector<C64>,
    t: f64,
    tol: f64,
) -> Result<KrylovExp> {
    let bnorm = b.norm();
    if bnorm == 0.0 || t == 0.0 {
        return Ok(KrylovExp {
            value: b.clone(),
            error: 0.0,
            matvecs: 0,
        });
    }
    let norm = spectral_radius_estimate(&op, b.len());
    // polynomial approximation of exp on [0, dt·‖A‖] needs dt·‖A‖ bounded
    let dt_max = if norm > 0.0 { KRYLOV_MAX_EXPONENT / norm } else { t };
    let mut x = b.clone();
    let mut remaining = t;
    let mut dt = t.min(dt_max);
    let mut error = 0.0;
    let mut matvecs = 0;
    let mut halvings = 0;
    while remaining > 0.0 {
        dt = dt.min(remaining);
        let xnorm = x.norm();
        if xnorm == 0.0 {
            break;
        }
        let budget = tol * bnorm * dt / t;
        let mut lz = Lanczos::start(&x / C64::new(xnorm, 0.0));
        let mut accepted = None;
        let mut previous: Option<DVector<f64>> = None;
        for m in 1..=KRYLOV_MAX_BASIS.min(x.len()) {
            let beta = lz.step(&op);
            matvecs += 1;
            let (vals, vecs) = sorted(lz.tridiagonal());
            // exp(-dt T) e_1 in the Lanczos basis
            let coeff = DVector::from_iterator(m, (0..m).map(|i| {
                (0..m).map(|k| vecs[(i, k)] * (-dt * vals[k]).exp() * vecs[(0, k)]).sum::<f64>()
            }));
            // the residual-type estimate alone is blind when exp(-dt T) underflows,
            // so it is paired with the change from the previous iterate
            let residual_est = xnorm * beta * coeff[m - 1].abs();
            let change = previous.as_ref().map_or(f64::INFINITY, |p| {
                let mut d = coeff.clone();
                for (i, v) in p.iter().enumerate() {
                    d[i] -= v;
                }
                xnorm * d.norm()
            });
            let est = residual_est.max(change);
            if beta <= 1e-14 * xnorm || m == x.len() || (m >= 2 && est <= budget) {
                accepted = Some((coeff, if beta <= 1e-14 * xnorm { 0.0 } else { est }));
                break;
            }
            previous = Some(coeff);
        }
        match accepted {
            Some((coeff, est)) => {
                let mut next = DVector::zeros(x.len());
                for (i, c) in coeff.iter().enumerate() {
                    next.axpy(C64::new(xnorm * c, 0.0), &lz.basis[i], C64::new(1.0, 0.0));
                }
                x = next;
                error += est;
                remaining -= dt;
                if remaining <= 1e-15 * t {
                    remaining = 0.0;
                }
                dt = (1.5 * dt).min(dt_max);
            }
            None => {
                dt *= 0.5;
                halvings += 1;
                if halvings > 60 {
                    return Err(Error::Exponential { residual: error });
                }
            }
        }
    }
    if !(error <= tol * bnorm * 10.0) {
        return Err(Error::Exponential { residual: error });
    }
    Ok(KrylovExp {
        value: x,
        error,
        matvecs,
    })
}

/// Lowest `k` eigenvalues of a Hermitian operator, returned with the residual
/// norms `‖A x - λ x‖` of their unit Ritz vectors.
///
/// One eigenpair is extracted per Lanczos run (full reorthogonalisation); the
/// next run works on the orthogonal complement of the pairs found so far, so
/// multiple eigenvalues are resolved.
pub fn lanczos_lowest(
    op: impl Fn(&DVector<C64>) -> DVector<C64>,
    dim: usize,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if k > dim {
        return Err(Error::Usage(format!("requested {k} eigenvalues of a {dim}-dimensional operator")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = spectral_radius_estimate(&op, dim).max(1e-300);
    let mut found: Vec<DVector<C64>> = Vec::new();
    let mut out = Vec::with_capacity(k);
    let project = |found: &[DVector<C64>], mut v: DVector<C64>| {
        for _ in 0..2 {
            for q in found {
                let c = q.dotc(&v);
                v.axpy(-c, q, C64::new(1.0, 0.0));
            }
        }
        v
    };
    for _ in 0..k {
        let free = dim - found.len();
        let start = project(
            &found,
            DVector::from_fn(dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
        );
        let sn = start.norm();
        let deflated = |x: &DVector<C64>| project(&found, op(&project(&found, x.clone())));
        let mut lz = Lanczos::start(start / C64::new(sn, 0.0));
        let mut best = None;
        for m in 1..=free {
            let beta = lz.step(&deflated);
            if m < free.min(10) && beta > 0.0 {
                continue;
            }
            let (vals, vecs) = sorted(lz.tridiagonal());
            let estimate = (beta * vecs[(m - 1, 0)]).abs();
            if estimate <= 0.1 * tol * scale || beta <= 1e-14 * scale || m == free {
                let mut x = DVector::zeros(dim);
                for i in 0..m {
                    x.axpy(C64::new(vecs[(i, 0)], 0.0), &lz.basis[i], C64::new(1.0, 0.0));
                }
                let x = project(&found, x);
                let x = &x / C64::new(x.norm(), 0.0);
                let residual = (op(&x) - &x * C64::new(vals[0], 0.0)).norm();
                best = Some((vals[0], residual, x));
                break;
            }
        }
        let (lambda, residual, x) = best.expect("Lanczos terminates by m = free");
        if residual > tol * scale {
            return Err(Error::Eigensolver { residual });
        }
        out.push((lambda, residual));
        found.push(x);
    }
    Ok(out)
}
