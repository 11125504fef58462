use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::PathConfig;
use super::paths::{sample_paths, Walker};
use crate::error::{Error, Result};
use crate::geometry::SpaceKind;
use crate::kato::Potential;
use crate::parallel::Exec;
use crate::provenance::Provenance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// paths that contributed (survivors for killed expectations)
    pub n_effective: usize,
    pub h: f64,
    pub cap_events: u64,
    /// time-discretization bias bound, 0 when not estimated
    pub bias: f64,
    pub provenance: Provenance,
}

impl Estimate {
    fn from_samples(samples: impl Iterator<Item = f64> + Clone, n_effective: usize, h: f64) -> Self {
        let (mean, se, n) = mean_se(samples);
        Self {
            value: mean,
            std_error: se,
            n_paths: n,
            n_effective,
            h,
            cap_events: 0,
            bias: 0.0,
            provenance: Provenance::MonteCarlo,
        }
    }

    /// `|value − target| ≤ k·SE + bias`
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + self.bias
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: f64,
    pub im: f64,
    /// standard error of the complex mean, `sqrt(SE_re² + SE_im²)`
    pub std_error: f64,
    pub n_paths: usize,
    pub n_effective: usize,
    pub h: f64,
    pub provenance: Provenance,
}

impl ComplexEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn mean_se(samples: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let mut n = 0usize;
    let mut sum = 0.0;
    for s in samples.clone() {
        sum += s;
        n += 1;
    }
    let mean = sum / n as f64;
    // two-pass variance
    let ss: f64 = samples.map(|s| (s - mean) * (s - mean)).sum();
    let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
    (mean, (var / n as f64).sqrt(), n)
}

/// Largest value of `|v|` admitted at a single knot.
///
/// A path started on a point singularity sees `|v| = ∞` at its first knot.
/// The cap `h^{-1/2}` keeps that knot's trapezoid weight at `O(√h)`, the same
/// order as the discretization error for Coulomb-type singularities.
pub fn step_cap(h: f64) -> f64 {
    h.powf(-0.5)
}

struct KatoPath {
    fine: f64,
    coarse: f64,
    caps: u64,
}

fn kato_path(v: &Potential, w: &mut Walker<'_>) -> KatoPath {
    let h = w.h();
    let cap_f = step_cap(h);
    let cap_c = step_cap(2.0 * h);
    let mut caps = 0u64;
    let eval = |x: &[f64]| v.value(x).abs();
    let clamp = |a: f64, c: f64| if a.is_finite() && a <= c { a } else { c };

    let first = eval(w.position());
    if !(first.is_finite() && first <= cap_f) {
        caps += 1;
    }
    let (mut fine, mut coarse) = (0.0, 0.0);
    let mut prev_f = clamp(first, cap_f);
    let mut last_even_c = clamp(first, cap_c);
    let mut last_alive = 0usize;
    while w.advance() {
        if w.killed() {
            // integrate up to the last monitored knot inside the domain
            break;
        }
        let a = eval(w.position());
        if !(a.is_finite() && a <= cap_f) {
            caps += 1;
        }
        let af = clamp(a, cap_f);
        fine += 0.5 * h * (prev_f + af);
        prev_f = af;
        last_alive = w.step_index();
        if last_alive.is_multiple_of(2) {
            let ac = clamp(a, cap_c);
            coarse += h * (last_even_c + ac);
            last_even_c = ac;
        }
    }
    // an odd final knot is closed on the coarse grid with one fine trapezoid
    if last_alive % 2 == 1 {
        coarse += 0.5 * h * (last_even_c + prev_f);
    }
    KatoPath { fine, coarse, caps }
}

/// `E[∫₀^{t∧ζ} |v(B_s)| ds]` by the pathwise trapezoid rule.
///
/// The bias bound is Richardson-style: the same paths are also integrated on
/// the grid of spacing `2h`, and with an `O(√h)` error model the fine-grid
/// bias is `|I_h − I_{2h}| / (√2 − 1)`.
pub fn mc_kato_integral(v: &Potential, config: &PathConfig, exec: Exec) -> Result<Estimate> {
    if v.space() != &config.space {
        return Err(Error::DimensionMismatch {
            expected: config.space.dim(),
            found: v.space().dim(),
        });
    }
    let paths = sample_paths(config, exec, |w| kato_path(v, w))?;
    let mut est = Estimate::from_samples(paths.iter().map(|p| p.fine), paths.len(), config.h);
    let coarse = paths.iter().map(|p| p.coarse).sum::<f64>() / paths.len() as f64;
    est.cap_events = paths.iter().map(|p| p.caps).sum();
    est.bias = (est.value - coarse).abs() / (std::f64::consts::SQRT_2 - 1.0);
    Ok(est)
}

/// `E[f(B_t); t < ζ]`.
pub fn mc_heat_expectation<F>(f: F, config: &PathConfig, exec: Exec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let vals = sample_paths(config, exec, |w| {
        while w.advance() {}
        if w.killed() {
            None
        } else {
            Some(f(w.position()))
        }
    })?;
    let alive = vals.iter().filter(|v| v.is_some()).count();
    Ok(Estimate::from_samples(vals.iter().map(|v| v.unwrap_or(0.0)), alive, config.h))
}

/// Accumulates the Stratonovich midpoint phase
/// `exp(−i Σ_k A((X_k + X_{k+1})/2)·(X_{k+1} − X_k))` along a path.
#[derive(Clone, Debug, Default)]
pub struct PhaseAccumulator {
    angle: f64,
    mid: Vec<f64>,
}

impl PhaseAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push<A>(&mut self, a: &A, from: &[f64], to: &[f64])
    where
        A: Fn(&[f64]) -> Vec<f64> + ?Sized,
    {
        self.mid.clear();
        self.mid.extend(from.iter().zip(to).map(|(x, y)| 0.5 * (x + y)));
        let field = a(&self.mid);
        self.angle += field.iter().zip(from.iter().zip(to)).map(|(f, (x, y))| f * (y - x)).sum::<f64>();
    }

    /// Accumulated line integral `Σ A(mid)·ΔX`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.angle)
    }
}

/// Transport phase along a discrete path.
pub fn transport_phase<A>(path: &[Vec<f64>], a: &A) -> Complex64
where
    A: Fn(&[f64]) -> Vec<f64> + ?Sized,
{
    let mut acc = PhaseAccumulator::new();
    for pair in path.windows(2) {
        acc.push(a, &pair[0], &pair[1]);
    }
    acc.phase()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariantEstimate {
    pub value: ComplexEstimate,
    /// `E[|Ψ(B_t)|; t < ζ]` on the same paths
    pub scalar: Estimate,
    /// `|value| ≤ scalar + 3·(SE_value + SE_scalar)`
    pub dominated: bool,
}

/// `E[phase⁻¹ · Ψ(B_t); t < ζ]` for a line bundle over `ℝ^m` with
/// connection form `A`.
pub fn mc_covariant_semigroup<P, A>(psi: P, a: A, config: &PathConfig, exec: Exec) -> Result<CovariantEstimate>
where
    P: Fn(&[f64]) -> Complex64 + Sync + Send,
    A: Fn(&[f64]) -> Vec<f64> + Sync + Send,
{
    if config.space.kind() != SpaceKind::Euclidean {
        return Err(Error::Usage(
            "covariant semigroup sampling needs a Euclidean base space".into(),
        ));
    }
    let vals = sample_paths(config, exec, |w| {
        let mut acc = PhaseAccumulator::new();
        while w.advance() {
            if w.killed() {
                return None;
            }
            acc.push(&a, w.previous(), w.position());
        }
        Some(acc.phase().conj() * psi(w.position()))
    })?;
    let alive = vals.iter().filter(|v| v.is_some()).count();
    let z = || vals.iter().map(|v| v.unwrap_or_default());
    let (re, se_re, n) = mean_se(z().map(|c| c.re));
    let (im, se_im, _) = mean_se(z().map(|c| c.im));
    let scalar = Estimate::from_samples(z().map(|c| c.norm()), alive, config.h);
    let value = ComplexEstimate {
        re,
        im,
        std_error: se_re.hypot(se_im),
        n_paths: n,
        n_effective: alive,
        h: config.h,
        provenance: Provenance::MonteCarlo,
    };
    let dominated = value.value().norm() <= scalar.value + 3.0 * (value.std_error + scalar.std_error);
    Ok(CovariantEstimate {
        value,
        scalar,
        dominated,
    })
}
