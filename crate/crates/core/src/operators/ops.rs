use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::laplacian::{bochner_laplacian, BochnerLaplacian};
use super::mesh::C64;
use super::section::{EndoField, Section};
use super::spectral::{
    dense_exp, hermitian_eigen, krylov_exp_action, lanczos_lowest, Eigen, DENSE_EIGEN_LIMIT, DENSE_EXP_LIMIT,
};
use crate::error::{Error, Result};
use crate::provenance::Provenance;

/// Kinetic and potential parts of a quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FormValue {
    pub value: f64,
    pub kinetic: f64,
    pub potential: Option<f64>,
}

pub fn quad_form(lap: &BochnerLaplacian, v: Option<&EndoField>, f: &Section) -> Result<FormValue> {
    let kinetic = lap.kinetic(f)?;
    let potential = match v {
        Some(v) => {
            v.check(lap.mesh())?;
            Some(v.expectation(f, lap.mu()))
        }
        None => None,
    };
    Ok(FormValue {
        value: kinetic + potential.unwrap_or(0.0),
        kinetic,
        potential,
    })
}

/// `½ Σ_edges w (|f_u| - |f_v|)²`, the scalar form of the modulus.
fn modulus_kinetic(lap: &BochnerLaplacian, f: &Section) -> f64 {
    let mesh = lap.mesh();
    let norms = f.pointwise_norms();
    mesh.edges()
        .iter()
        .map(|e| {
            let a = mesh.slot(e.u).map_or(0.0, |k| norms[k]);
            let b = mesh.slot(e.v).map_or(0.0, |k| norms[k]);
            0.5 * e.w * (a - b) * (a - b)
        })
        .sum()
}

/// `q_{H(0)}(f) - q_{-Δ/2}(|f|)`; nonnegative up to rounding.
pub fn kato_inequality_gap(lap: &BochnerLaplacian, f: &Section) -> Result<f64> {
    Ok(lap.kinetic(f)? - modulus_kinetic(lap, f))
}

/// `e^{-t(H + V)} f` with an error estimate (dense up to 200 degrees of
/// freedom, Krylov above).
pub fn semigroup(lap: &BochnerLaplacian, v: Option<&EndoField>, f: &Section, t: f64) -> Result<(Section, f64)> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("semigroup time must be nonnegative, got {t}")));
    }
    f.check(lap.mesh())?;
    let g = lap.to_symmetric(f);
    let (out, err) = if lap.dof() <= DENSE_EXP_LIMIT {
        let e = dense_exp(&lap.symmetric_matrix(v)?, t)?;
        let y = e * &g;
        let err = 1e-10 * y.norm();
        (y, err)
    } else {
        if let Some(v) = v {
            v.check(lap.mesh())?;
        }
        let k = krylov_exp_action(|x| lap.symmetric_apply(v, x), &g, t, 1e-11)?;
        (k.value, k.error)
    };
    Ok((lap.from_symmetric(out), err))
}

/// Pointwise and form-level semigroup domination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DominationGap {
    /// `min_u (e^{tΔ/2}|Ψ|)_u - ‖(e^{-tH(0)}Ψ)_u‖`
    pub pointwise: f64,
    /// `⟨e^{tΔ/2}|Ψ|, |Ψ|⟩ - ⟨e^{-tH(0)}Ψ, Ψ⟩` (real part)
    pub form: f64,
    pub error: f64,
}

pub fn semigroup_domination_gap(lap: &BochnerLaplacian, psi: &Section, t: f64) -> Result<DominationGap> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let scalar = bochner_laplacian(&lap.mesh().scalar())?;
    let (cov, e1) = semigroup(lap, None, psi, t)?;
    let modulus = psi.modulus();
    let (sca, e2) = semigroup(&scalar, None, &modulus, t)?;
    let cn = cov.pointwise_norms();
    let pointwise = sca
        .vector()
        .iter()
        .zip(&cn)
        .map(|(s, c)| s.re - c)
        .fold(f64::INFINITY, f64::min);
    let mu = lap.mu();
    let n = lap.fiber_dim();
    let cov_form: f64 = (0..mu.len())
        .map(|k| {
            mu[k] * (0..n).map(|j| (cov.fiber(k)[j] * psi.fiber(k)[j].conj()).re).sum::<f64>()
        })
        .sum();
    let sca_form: f64 = (0..mu.len()).map(|k| mu[k] * sca.vector()[k].re * modulus.vector()[k].re).sum();
    Ok(DominationGap {
        pointwise: if mu.is_empty() { 0.0 } else { pointwise },
        form: sca_form - cov_form,
        error: e1 + e2,
    })
}

/// Difference quotients `⟨(f - e^{-tH}f)/t, f⟩` against the form value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormLimit {
    pub t: Vec<f64>,
    pub quotients: Vec<f64>,
    /// `q(f)` (kinetic plus potential part)
    pub form: f64,
    /// rigorous bound `t/2 · ‖(H+V)f‖²_μ ≥ q(f) - quotient(t)` when `H+V ≥ 0`
    pub truncation_bound: Vec<f64>,
    /// quotients nondecreasing as `t` decreases (rounding slack 1e-14 relative)
    pub monotone: bool,
    pub provenance: Provenance,
}

impl FormLimit {
    pub fn final_gap(&self) -> f64 {
        self.quotients.last().map_or(0.0, |q| (self.form - q).abs())
    }
}

/// `(e^x - 1)/x`
fn phi1(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// Spectral evaluation of the quotients: with `Ĥ = Σ λ_k P_k` and
/// `c_k = P_k M^{1/2} f`, the quotient is `Σ |c_k|² λ_k φ₁(-tλ_k)`, free of
/// the cancellation in `f - e^{-tH}f`.
pub fn form_limit_check(lap: &BochnerLaplacian, v: Option<&EndoField>, f: &Section, t_sequence: &[f64]) -> Result<FormLimit> {
    if t_sequence.iter().any(|&t| !(t > 0.0)) || t_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Usage("t_sequence must be positive and strictly decreasing".into()));
    }
    if lap.dof() > DENSE_EIGEN_LIMIT {
        return Err(Error::Usage(format!(
            "form_limit_check uses a dense spectral decomposition; {} degrees of freedom exceed {}",
            lap.dof(),
            DENSE_EIGEN_LIMIT
        )));
    }
    f.check(lap.mesh())?;
    let h = lap.symmetric_matrix(v)?;
    let eig = hermitian_eigen(&h);
    let g = lap.to_symmetric(f);
    let c = eig.vectors.adjoint() * &g;
    let weights: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
    let quotients: Vec<f64> = t_sequence
        .iter()
        .map(|&t| eig.values.iter().zip(&weights).map(|(l, w)| w * l * phi1(-t * l)).sum())
        .collect();
    let form = quad_form(lap, v, f)?.value;
    let hg2: f64 = eig.values.iter().zip(&weights).map(|(l, w)| w * l * l).sum();
    let scale = quotients.iter().fold(0.0f64, |a, q| a.max(q.abs()));
    let monotone = quotients.windows(2).all(|w| w[1] >= w[0] - 1e-14 * scale);
    Ok(FormLimit {
        t: t_sequence.to_vec(),
        truncation_bound: t_sequence.iter().map(|t| 0.5 * t * hg2).collect(),
        quotients,
        form,
        monotone,
        provenance: Provenance::Eigensolve,
    })
}

/// Smallest `C₁ ≥ 0` with `q_{V₂}(f) ≤ C₁ q_{H(0)}(f) + C₂‖f‖²` for all `f`:
/// the largest eigenvalue of the pencil `(V₂ - C₂, Ĥ)`, clipped at zero.
///
/// On `ker Ĥ` the pencil denominator vanishes; the bound is then finite only
/// if `V₂ - C₂` is negative definite there, in which case the kernel
/// component is optimised out through the Schur complement.
pub fn klmn_optimal_c1(lap: &BochnerLaplacian, v2: &EndoField, c2: f64) -> Result<f64> {
    if !(c2 >= 0.0) {
        return Err(Error::Usage(format!("C₂ must be nonnegative, got {c2}")));
    }
    v2.check(lap.mesh())?;
    if lap.dof() > DENSE_EIGEN_LIMIT {
        return Err(Error::Usage(format!(
            "klmn_optimal_c1 is dense-only; {} degrees of freedom exceed {}",
            lap.dof(),
            DENSE_EIGEN_LIMIT
        )));
    }
    let n = lap.fiber_dim();
    let dof = lap.dof();
    let h = lap.symmetric_matrix(None)?;
    let eig = hermitian_eigen(&h);
    let lmax = eig.values.last().copied().unwrap_or(0.0).abs().max(1e-300);
    let mut d = DMatrix::<C64>::zeros(dof, dof);
    for (b, block) in v2.blocks().iter().enumerate() {
        let mut view = d.view_mut((b * n, b * n), (n, n));
        view += block;
    }
    for i in 0..dof {
        d[(i, i)] -= C64::new(c2, 0.0);
    }
    let dt = eig.vectors.adjoint() * &d * &eig.vectors;
    let cut = 1e-10 * lmax;
    let range: Vec<usize> = (0..dof).filter(|&i| eig.values[i] > cut).collect();
    let kernel: Vec<usize> = (0..dof).filter(|&i| eig.values[i] <= cut).collect();
    if kernel.iter().any(|&i| eig.values[i] < -cut) {
        return Err(Error::Kernel("H(0) has negative spectrum".into()));
    }
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| dt[(rows[i], cols[j])]);
    let mut s = pick(&range, &range);
    if !kernel.is_empty() {
        let dkk = pick(&kernel, &kernel);
        let keig = hermitian_eigen(&dkk);
        let scale = d.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let tol = 1e-12 * scale;
        let top = keig.values.last().copied().unwrap_or(f64::NEG_INFINITY);
        if top > tol {
            return Err(Error::Kernel(format!(
                "V₂ - C₂ is positive on ker H(0) (top eigenvalue {top:e}); no finite C₁"
            )));
        }
        let drk = pick(&range, &kernel);
        for (j, &l) in keig.values.iter().enumerate() {
            if l >= -tol {
                let coupling = (&drk * keig.vectors.column(j)).norm();
                if coupling > 1e-10 * scale {
                    return Err(Error::Kernel(format!(
                        "V₂ - C₂ is singular on ker H(0) but couples to its range ({coupling:e}); no finite C₁"
                    )));
                }
            }
        }
        let inv = keig.function(|l| if l < -tol { 1.0 / l } else { 0.0 });
        s -= &drk * inv * drk.adjoint();
    }
    if range.is_empty() {
        return Ok(0.0);
    }
    for (i, &ri) in range.iter().enumerate() {
        for (j, &rj) in range.iter().enumerate() {
            s[(i, j)] /= C64::new((eig.values[ri] * eig.values[rj]).sqrt(), 0.0);
        }
    }
    let s = (&s + s.adjoint()).unscale(2.0);
    let top = hermitian_eigen(&s).values.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub index: usize,
    pub eigenvalue: f64,
    pub residual: f64,
    pub provenance: Provenance,
}

/// Residual tolerance, relative to `‖Ĥ + V‖`.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Lowest `k` eigenvalues of `H(0) + V`.
pub fn form_sum_spectrum(lap: &BochnerLaplacian, v: Option<&EndoField>, k: usize) -> Result<Vec<SpectrumEntry>> {
    let dof = lap.dof();
    if k > dof {
        return Err(Error::Usage(format!("requested {k} eigenvalues, interior dimension is {dof}")));
    }
    let norm = lap.norm_bound(v).max(1e-300);
    if dof <= DENSE_EIGEN_LIMIT {
        let h = lap.symmetric_matrix(v)?;
        let eig: Eigen = hermitian_eigen(&h);
        let out: Vec<SpectrumEntry> = (0..k)
            .map(|i| {
                let x = eig.vectors.column(i);
                let r = (&h * x - x * C64::new(eig.values[i], 0.0)).norm();
                SpectrumEntry {
                    index: i,
                    eigenvalue: eig.values[i],
                    residual: r,
                    provenance: Provenance::Eigensolve,
                }
            })
            .collect();
        let worst = out.iter().map(|e| e.residual).fold(0.0, f64::max);
        if worst > EIGEN_RESIDUAL_TOLERANCE * norm {
            return Err(Error::Eigensolver { residual: worst });
        }
        return Ok(out);
    }
    if let Some(v) = v {
        v.check(lap.mesh())?;
    }
    let pairs = lanczos_lowest(|x: &DVector<C64>| lap.symmetric_apply(v, x), dof, k, EIGEN_RESIDUAL_TOLERANCE, 0)?;
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(i, (l, r))| SpectrumEntry {
            index: i,
            eigenvalue: l,
            residual: r,
            provenance: Provenance::Eigensolve,
        })
        .collect())
}
