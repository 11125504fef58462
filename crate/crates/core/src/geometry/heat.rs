use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_pieces, integrate_singular, QuadResult, Tolerance};

use super::space::{ModelSpace, Point, SpaceKind};
use super::volume::unit_sphere_area;

/// Relative accuracy of the H² kernel integral representation.
const H2_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-8);
const RADIAL_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-10);

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("heat kernel time must be positive, got {t}")))
    }
}

/// `e^{-a}·sinh(ρ)` without overflow for large `ρ`.
fn sinh_times_exp_neg(rho: f64, a: f64) -> f64 {
    0.5 * ((rho - a).exp() - (-rho - a).exp())
}

/// H² kernel for `Δ/2` at time `t` (i.e. the `Δ`-kernel at `τ = t/2`) with
/// the Gaussian factor `e^{-ρ²/(2t)}` removed:
/// `p_t(ρ) = prefactor · e^{-ρ²/(2t)} · J(ρ)`.
fn h2_scaled(t: f64, rho: f64) -> (f64, QuadResult) {
    let tau = 0.5 * t;
    let prefactor = std::f64::consts::SQRT_2 * (-0.25 * tau).exp() * (4.0 * PI * tau).powf(-1.5);
    let q = if rho < 1e-10 {
        // ∫₀^∞ s e^{-s²/4τ} / (√2 sinh(s/2)) ds
        let upper = (240.0 * tau).sqrt();
        integrate(
            |s: f64| {
                let ratio = if s < 1e-8 { 2.0 } else { s / (0.5 * s).sinh() };
                ratio * (-s * s / (4.0 * tau)).exp() / std::f64::consts::SQRT_2
            },
            0.0,
            upper,
            H2_TOLERANCE,
        )
    } else {
        // s = ρ + u²
        let upper = (-rho + (rho * rho + 240.0 * tau).sqrt()).sqrt();
        let knee = rho.sqrt().min(0.5 * upper);
        integrate_pieces(
            |u: f64| {
                let u2 = u * u;
                let damp = (-(2.0 * rho * u2 + u2 * u2) / (4.0 * tau)).exp();
                let denom = (2.0 * (rho + 0.5 * u2).sinh() * (0.5 * u2).sinh()).sqrt();
                let slope = if u2 < 1e-12 {
                    // 2u/√(2 sinh(ρ) u²/2) as u -> 0
                    2.0 / rho.sinh().sqrt()
                } else {
                    2.0 * u / denom
                };
                slope * (rho + u2) * damp
            },
            &[0.0, knee, upper],
            H2_TOLERANCE,
        )
    };
    (prefactor, q)
}

/// Heat kernel `p_t` of `Δ/2` as a function of the geodesic distance.
pub fn heat_kernel_at_distance(space: &ModelSpace, t: f64, d: f64) -> Result<f64> {
    check_time(t)?;
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("distance must be non-negative, got {d}")));
    }
    Ok(kernel_unchecked(space, t, d))
}

pub(crate) fn kernel_unchecked(space: &ModelSpace, t: f64, d: f64) -> f64 {
    let m = space.dim();
    match (space.kind(), m) {
        (SpaceKind::Euclidean, _) => (2.0 * PI * t).powf(-0.5 * m as f64) * (-d * d / (2.0 * t)).exp(),
        (SpaceKind::Hyperbolic, 3) => {
            let ratio = if d < 1e-8 { 1.0 } else { d / d.sinh() };
            (2.0 * PI * t).powf(-1.5) * ratio * (-0.5 * t - d * d / (2.0 * t)).exp()
        }
        (SpaceKind::Hyperbolic, _) => {
            let (pref, q) = h2_scaled(t, d);
            pref * (-d * d / (2.0 * t)).exp() * q.value
        }
    }
}

pub fn heat_kernel(space: &ModelSpace, t: f64, x: &Point, y: &Point) -> Result<f64> {
    let d = space.distance(x, y)?;
    heat_kernel_at_distance(space, t, d)
}

/// `p_t(ρ)·|S_ρ|`: the density of `d(x, B_t)` on `[0, ∞)`.
pub fn radial_heat_density(space: &ModelSpace, t: f64, rho: f64) -> f64 {
    let m = space.dim();
    let gauss = rho * rho / (2.0 * t);
    if gauss > 745.0 {
        return 0.0;
    }
    // written in z = ρ/√t so that t^{-m/2} never overflows for tiny t
    let z = rho / t.sqrt();
    match (space.kind(), m) {
        (SpaceKind::Euclidean, _) => {
            unit_sphere_area(m) * (2.0 * PI).powf(-0.5 * m as f64) * z.powi(m as i32 - 1) * (-gauss).exp() / t.sqrt()
        }
        (SpaceKind::Hyperbolic, 3) => {
            4.0 * PI * (2.0 * PI).powf(-1.5) * z * (sinh_times_exp_neg(rho, 0.5 * t + gauss) / t)
        }
        (SpaceKind::Hyperbolic, _) => {
            let (pref, q) = h2_scaled(t, rho);
            2.0 * PI * pref * q.value * sinh_times_exp_neg(rho, rho * rho / (2.0 * t))
        }
    }
}

/// Radius beyond which the radial heat density carries less than ~1e-20 of
/// its mass.
pub fn radial_cutoff(space: &ModelSpace, t: f64) -> f64 {
    let m = space.dim() as f64;
    let drift = match space.kind() {
        SpaceKind::Euclidean => 0.0,
        SpaceKind::Hyperbolic => 0.5 * (m - 1.0) * t,
    };
    drift + (9.0 + m.sqrt()) * t.sqrt()
}

/// `∫ p_t(x, y) vol(dy)` by radial quadrature.
pub fn heat_mass(space: &ModelSpace, t: f64, x: &Point) -> Result<QuadResult> {
    check_time(t)?;
    space.validate(x)?;
    Ok(integrate(
        |rho| radial_heat_density(space, t, rho),
        0.0,
        radial_cutoff(space, t),
        RADIAL_TOLERANCE,
    ))
}

/// `E[d(x, B_t)^k] = ∫ ρ^k p_t(ρ) |S_ρ| dρ`.
pub fn heat_radial_moment(space: &ModelSpace, t: f64, k: i32) -> Result<QuadResult> {
    check_time(t)?;
    Ok(integrate(
        |rho| rho.powi(k) * radial_heat_density(space, t, rho),
        0.0,
        radial_cutoff(space, t),
        RADIAL_TOLERANCE,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CkResidual {
    pub direct: f64,
    pub composed: f64,
    pub residual: f64,
    pub quadrature_error: f64,
}

/// `|p_{t+s}(x,y) - ∫ p_t(x,z) p_s(z,y) vol(dz)|`.
pub fn chapman_kolmogorov_residual(space: &ModelSpace, s: f64, t: f64, x: &Point, y: &Point) -> Result<CkResidual> {
    check_time(s)?;
    check_time(t)?;
    let d = space.distance(x, y)?;
    let direct = kernel_unchecked(space, t + s, d);
    let upper = radial_cutoff(space, t) + d;
    let inner_tol = Tolerance::new(0.0, 1e-12);
    let mut pts = vec![0.0];
    if d > 0.0 {
        pts.push(d);
    }
    pts.push(upper);
    let q = integrate_singular(
        |rho| {
            let mean = space.sphere_mean(rho, d, |sigma| kernel_unchecked(space, s, sigma), &[], inner_tol);
            radial_heat_density(space, t, rho) * mean.value
        },
        &pts,
        Tolerance::new(1e-14, 1e-11),
    );
    if !q.converged {
        return Err(Error::Quadrature {
            value: q.value,
            error: q.error,
        });
    }
    Ok(CkResidual {
        direct,
        composed: q.value,
        residual: (direct - q.value).abs(),
        quadrature_error: q.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e(m: usize) -> ModelSpace {
        ModelSpace::euclidean(m).unwrap()
    }

    fn h(m: usize) -> ModelSpace {
        ModelSpace::hyperbolic(m).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_relative_eq!(
            heat_kernel_at_distance(&e(1), 1.0, 0.0).unwrap(),
            0.398_942_280_401_432_7,
            max_relative = 1e-15
        );
        let expected = PI.powf(-1.5) * (-1.0f64).exp();
        assert_relative_eq!(heat_kernel_at_distance(&e(3), 0.5, 1.0).unwrap(), expected, max_relative = 1e-14);
        assert!((expected - 0.066066).abs() < 5e-7);
        let h3 = heat_kernel_at_distance(&h(3), 1.0, 0.0).unwrap();
        assert_relative_eq!(h3, (2.0 * PI).powf(-1.5) * (-0.5f64).exp(), max_relative = 1e-15);
        assert!((h3 - 0.038511).abs() < 5e-7);
        assert!(heat_kernel_at_distance(&e(2), 0.0, 1.0).is_err());
        assert!(heat_kernel_at_distance(&e(2), -1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_is_symmetric() {
        let s = h(3);
        let x = s.point_at(&[1.0, 0.0, 0.0], 0.4).unwrap();
        let y = s.point_at(&[0.0, 1.0, 1.0], 1.1).unwrap();
        assert_eq!(heat_kernel(&s, 0.7, &x, &y).unwrap(), heat_kernel(&s, 0.7, &y, &x).unwrap());
    }

    #[test]
    fn h2_kernel_small_time_matches_flat_kernel() {
        // For small t and d the curvature correction is O(t), O(d²).
        let t = 1e-4;
        let d = 5e-3;
        let p = heat_kernel_at_distance(&h(2), t, d).unwrap();
        let flat = heat_kernel_at_distance(&e(2), t, d).unwrap();
        assert_relative_eq!(p, flat, max_relative = 1e-3);
        // continuity at the origin
        let p0 = heat_kernel_at_distance(&h(2), 0.3, 0.0).unwrap();
        let p1 = heat_kernel_at_distance(&h(2), 0.3, 1e-7).unwrap();
        assert_relative_eq!(p0, p1, max_relative = 1e-7);
    }

    #[test]
    fn masses_are_one() {
        for (s, t) in [(e(1), 1e-4), (e(3), 1.0), (h(3), 0.5), (h(2), 0.5), (h(2), 2.0), (e(5), 0.3)] {
            let q = heat_mass(&s, t, &s.origin()).unwrap();
            assert!(q.converged);
            assert!((q.value - 1.0).abs() < 1e-7, "{s:?} t={t}: {}", q.value);
        }
    }

    #[test]
    fn chapman_kolmogorov_examples() {
        let s = e(1);
        let r = chapman_kolmogorov_residual(&s, 0.5, 0.5, &s.origin(), &s.origin()).unwrap();
        assert!(r.residual < 1e-10, "{r:?}");
        let s = e(3);
        let y = s.point_at(&[1.0, 0.0, 0.0], 1.0).unwrap();
        let r = chapman_kolmogorov_residual(&s, 0.2, 0.3, &s.origin(), &y).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
        let s = h(3);
        let y = s.point_at(&[0.0, 0.0, 1.0], 0.5).unwrap();
        let r = chapman_kolmogorov_residual(&s, 0.25, 0.25, &s.origin(), &y).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn chapman_kolmogorov_h2() {
        let s = h(2);
        let y = s.point_at(&[1.0, 0.0], 0.6).unwrap();
        let r = chapman_kolmogorov_residual(&s, 0.3, 0.2, &s.origin(), &y).unwrap();
        assert!(r.residual < 1e-6 * r.direct.max(1.0), "{r:?}");
    }

    #[test]
    fn h3_second_moment_grows_like_three_t_for_small_t() {
        let q = heat_radial_moment(&h(3), 1e-3, 2).unwrap();
        assert_relative_eq!(q.value, 3e-3, max_relative = 2e-3);
    }
}
