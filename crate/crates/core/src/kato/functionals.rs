use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{h_kernel, radial_cutoff, radial_heat_density, Point};
use crate::parallel::Exec;
use crate::provenance::Provenance;
use crate::quadrature::{integrate_singular, integrate_singular_bounded, QuadResult, Tolerance};

use super::potential::Potential;

/// Resolvent integrals are truncated at `s = RESOLVENT_HORIZON / r`.
pub const RESOLVENT_HORIZON: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatoSettings {
    /// relative tolerance of the spatial (radial) quadrature
    pub spatial: Tolerance,
    /// relative tolerance of the time quadrature
    pub temporal: Tolerance,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for KatoSettings {
    fn default() -> Self {
        Self {
            spatial: Tolerance::relative(1e-8),
            temporal: Tolerance::relative(1e-7),
            exec: Exec::default(),
        }
    }
}

impl KatoSettings {
    fn inner(&self) -> Tolerance {
        Tolerance::new(self.spatial.abs * 1e-2, self.spatial.rel * 1e-2)
    }
}

/// A nonnegative quantity computed by quadrature, maximised over probes.
/// `value` is `+∞` exactly when `divergent` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluated {
    pub value: f64,
    pub error: f64,
    pub divergent: bool,
    pub converged: bool,
    /// index of the maximising probe
    pub argmax: usize,
    pub provenance: Provenance,
}

impl Evaluated {
    fn from_quad(q: QuadResult, scale: f64, rel: f64) -> Self {
        if q.is_divergent() {
            return Self::divergent();
        }
        let value = scale * q.value;
        Self {
            value,
            error: scale * q.error + rel * value.abs(),
            divergent: false,
            converged: q.converged,
            argmax: 0,
            provenance: Provenance::Quadrature,
        }
    }

    fn divergent() -> Self {
        Self {
            value: f64::INFINITY,
            error: f64::INFINITY,
            divergent: true,
            converged: true,
            argmax: 0,
            provenance: Provenance::Quadrature,
        }
    }

    fn zero() -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            divergent: false,
            converged: true,
            argmax: 0,
            provenance: Provenance::ClosedForm,
        }
    }
}

fn sup(items: Vec<Result<Evaluated>>) -> Result<Evaluated> {
    let mut best: Option<Evaluated> = None;
    for (i, e) in items.into_iter().enumerate() {
        let e = Evaluated { argmax: i, ..e? };
        match best {
            Some(b) if !(e.value > b.value) => {
                best = Some(Evaluated {
                    converged: b.converged && e.converged,
                    ..b
                })
            }
            _ => {
                let converged = best.is_none_or(|b| b.converged) && e.converged;
                best = Some(Evaluated { converged, ..e })
            }
        }
    }
    best.ok_or_else(|| Error::Usage("at least one probe point is required".into()))
}

fn probe_radii(v: &Potential, probes: &[Point]) -> Result<Vec<f64>> {
    if probes.is_empty() {
        return Err(Error::Usage("at least one probe point is required".into()));
    }
    probes
        .iter()
        .map(|p| {
            v.space().validate(p)?;
            Ok(v.space().radius_of(p.coords()))
        })
        .collect()
}

/// Break points in the distance `ρ` from a probe at radius `a`, restricted to
/// `(0, upper)`.
fn rho_breaks(v: &Potential, a: f64, upper: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    for b in v.break_radii() {
        for c in [(a - b).abs(), a + b] {
            if c > 0.0 && c < upper {
                pts.push(c);
            }
        }
    }
    pts.push(upper);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Mean of `|v|/|amplitude|` over the geodesic sphere of radius `ρ` about a
/// probe at radius `a`.
fn shell_mean(v: &Potential, a: f64, rho: f64, tol: Tolerance) -> f64 {
    let breaks = v.break_radii();
    let q = v.space().sphere_mean(rho, a, |r| v.unit_abs(r), &breaks, tol);
    if q.is_divergent() {
        f64::INFINITY
    } else {
        q.value
    }
}

/// `∫ p_s(x, y)|v(y)| dy / |amplitude|` for a probe at radius `a`.
fn unit_average(v: &Potential, a: f64, s: f64, settings: &KatoSettings) -> QuadResult {
    let space = v.space();
    let mut upper = radial_cutoff(space, s);
    if let Some(r) = v.support_radius() {
        upper = upper.min(a + r);
    }
    if upper <= 0.0 {
        return QuadResult::exact(0.0);
    }
    let pts = rho_breaks(v, a, upper);
    let inner = settings.inner();
    integrate_singular_bounded(
        |rho| {
            let dens = radial_heat_density(space, s, rho);
            if dens == 0.0 {
                return 0.0;
            }
            dens * shell_mean(v, a, rho, inner)
        },
        &pts,
        settings.spatial,
        f64::INFINITY,
    )
}

/// `(P_s|v|)(x) = ∫ p_s(x, y)|v(y)| vol(dy)`.
pub fn heat_potential_average(v: &Potential, x: &Point, s: f64, settings: &KatoSettings) -> Result<Evaluated> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("heat time must be positive, got {s}")));
    }
    let a = probe_radii(v, std::slice::from_ref(x))?[0];
    if v.is_zero() {
        return Ok(Evaluated::zero());
    }
    let q = unit_average(v, a, s, settings);
    Ok(Evaluated::from_quad(q, v.amplitude().abs(), settings.spatial.rel))
}

fn eta_at(v: &Potential, a: f64, t: f64, settings: &KatoSettings) -> Evaluated {
    let q = integrate_singular(
        |s| {
            let q = unit_average(v, a, s, settings);
            if q.is_divergent() {
                f64::INFINITY
            } else {
                q.value
            }
        },
        &[0.0, t],
        settings.temporal,
    );
    Evaluated::from_quad(q, v.amplitude().abs(), settings.spatial.rel)
}

/// Kato function `η(t) = sup_x ∫₀^t (P_s|v|)(x) ds`, the supremum taken over
/// the probe points.
pub fn kato_eta(v: &Potential, probes: &[Point], t: f64, settings: &KatoSettings) -> Result<Evaluated> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Kato time must be positive, got {t}")));
    }
    let radii = probe_radii(v, probes)?;
    if v.is_zero() {
        return Ok(Evaluated::zero());
    }
    sup(settings.exec.map(radii.len(), |i| Ok(eta_at(v, radii[i], t, settings))))
}

fn resolvent_at(v: &Potential, a: f64, r: f64, settings: &KatoSettings) -> Evaluated {
    let horizon = RESOLVENT_HORIZON / r;
    let average = |s: f64| {
        let q = unit_average(v, a, s, settings);
        if q.is_divergent() {
            f64::INFINITY
        } else {
            q.value
        }
    };
    let tail = average(horizon);
    let q = integrate_singular(|s| (-r * s).exp() * average(s), &[0.0, horizon], settings.temporal);
    let mut e = Evaluated::from_quad(q, v.amplitude().abs(), settings.spatial.rel);
    // the averages of a bounded tail are bounded by their value at the horizon
    // up to O(1) factors; e^{-40}/r is far below every tolerance in use
    e.error += v.amplitude().abs() * tail * (-RESOLVENT_HORIZON).exp() / r;
    e
}

/// Resolvent Kato constant `C_r = sup_x ∫₀^∞ e^{-rs}(P_s|v|)(x) ds`.
pub fn resolvent_constant(v: &Potential, probes: &[Point], r: f64, settings: &KatoSettings) -> Result<Evaluated> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("resolvent parameter must be positive, got {r}")));
    }
    let radii = probe_radii(v, probes)?;
    if v.is_zero() {
        return Ok(Evaluated::zero());
    }
    sup(settings.exec.map(radii.len(), |i| Ok(resolvent_at(v, radii[i], r, settings))))
}

/// Two-sided comparison of `η(t)` with `C_r`:
/// `(1 - e^{-rt})C_r ≤ η(t) ≤ e^{rt}C_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sandwich {
    pub t: f64,
    pub r: f64,
    pub eta: f64,
    pub c_r: f64,
    pub lower: f64,
    pub upper: f64,
    /// allowance used in both comparisons
    pub slack: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

pub fn sandwich_check(v: &Potential, probes: &[Point], r: f64, t: f64, settings: &KatoSettings) -> Result<Sandwich> {
    let eta = kato_eta(v, probes, t, settings)?;
    let c = resolvent_constant(v, probes, r, settings)?;
    let lower = -(-r * t).exp_m1() * c.value;
    let upper = (r * t).exp() * c.value;
    let combined = settings.spatial.rel + settings.temporal.rel;
    let slack = 2.0 * (combined * (eta.value + c.value) + eta.error + c.error * (r * t).exp());
    Ok(Sandwich {
        t,
        r,
        eta: eta.value,
        c_r: c.value,
        lower,
        upper,
        slack,
        lower_ok: eta.divergent || lower <= eta.value + slack,
        upper_ok: c.divergent || eta.value <= upper + slack,
    })
}

/// `sup_x ∫_{B(x, r)} h_m(d(x, y))|v(y)| dy` with `h_m` the Newtonian kernel
/// (logarithmic for `m = 2`).
pub fn analytic_kato_functional(v: &Potential, probes: &[Point], r: f64, settings: &KatoSettings) -> Result<Evaluated> {
    let space = *v.space();
    let m = space.dim();
    h_kernel(m, 0.5)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let radii = probe_radii(v, probes)?;
    if v.is_zero() {
        return Ok(Evaluated::zero());
    }
    let inner = settings.inner();
    sup(settings.exec.map(radii.len(), |i| {
        let a = radii[i];
        let pts = rho_breaks(v, a, r);
        let q = integrate_singular(
            |rho| {
                space.sphere_area(rho) * h_kernel(m, rho).unwrap_or(f64::INFINITY) * shell_mean(v, a, rho, inner)
            },
            &pts,
            settings.spatial,
        );
        Ok(Evaluated::from_quad(q, v.amplitude().abs(), 0.0))
    }))
}

/// `sup_x ∫_{B(x, r)} |v|`; finite values certify local integrability.
pub fn local_mass(v: &Potential, probes: &[Point], r: f64, settings: &KatoSettings) -> Result<Evaluated> {
    let space = *v.space();
    let radii = probe_radii(v, probes)?;
    if v.is_zero() {
        return Ok(Evaluated::zero());
    }
    let inner = settings.inner();
    sup(settings.exec.map(radii.len(), |i| {
        let a = radii[i];
        let pts = rho_breaks(v, a, r);
        let q = integrate_singular(
            |rho| space.sphere_area(rho) * shell_mean(v, a, rho, inner),
            &pts,
            settings.spatial,
        );
        Ok(Evaluated::from_quad(q, v.amplitude().abs(), 0.0))
    }))
}

/// Whether `L^p + L^∞` lies inside the Kato class in dimension `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpClass {
    Sufficient,
    NotCovered,
}

/// `p > m/2` (`p ≥ 1` when `m = 1`) suffices for Kato membership.
pub fn lp_kato_classify(p: f64, m: usize) -> Result<LpClass> {
    if !(p >= 1.0) || m == 0 {
        return Err(Error::Usage(format!("need p >= 1 and m >= 1, got p = {p}, m = {m}")));
    }
    let ok = if m == 1 { true } else { p > 0.5 * m as f64 };
    Ok(if ok { LpClass::Sufficient } else { LpClass::NotCovered })
}

/// Constants in `∫|v||f|² ≤ C₁ q₀(f) + C₂‖f‖²`, obtained from the smallest
/// `r` with `C_r ≤ target` as `C₁ = C_r`, `C₂ = r·C_r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FormBound {
    pub r_star: f64,
    pub c1: f64,
    pub c2: f64,
    pub target: f64,
}

const MAX_RESOLVENT: f64 = 1e12;

pub fn form_bound_constants(v: &Potential, probes: &[Point], target: f64, settings: &KatoSettings) -> Result<FormBound> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Usage(format!("form-bound target must lie in (0, 1), got {target}")));
    }
    if v.is_zero() {
        return Ok(FormBound {
            r_star: 0.0,
            c1: 0.0,
            c2: 0.0,
            target,
        });
    }
    let c = |r: f64| resolvent_constant(v, probes, r, settings).map(|e| e.value);
    let (mut lo, mut hi);
    let c1 = c(1.0)?;
    if c1 <= target {
        hi = 1.0;
        lo = 0.5;
        while c(lo)? <= target {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-12 {
                let c_hi = c(hi)?;
                return Ok(FormBound {
                    r_star: hi,
                    c1: c_hi,
                    c2: hi * c_hi,
                    target,
                });
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        loop {
            let ch = c(hi)?;
            if ch <= target {
                break;
            }
            lo = hi;
            hi *= 2.0;
            if hi > MAX_RESOLVENT {
                return Err(Error::NotFormBounded { r: lo, c_r: ch });
            }
        }
    }
    while hi / lo - 1.0 > 1e-9 {
        let mid = (lo * hi).sqrt();
        if c(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c_hi = c(hi)?;
    Ok(FormBound {
        r_star: hi,
        c1: c_hi,
        c2: hi * c_hi,
        target,
    })
}
