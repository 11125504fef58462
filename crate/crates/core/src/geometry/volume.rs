use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gk21;

/// Euclidean area of the unit sphere `S^{m-1} ⊂ ℝ^m` (`C_1 = 2`, `C_2 = 2π`, `C_3 = 4π`).
pub fn unit_sphere_area(m: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => std::f64::consts::TAU,
        _ => unit_sphere_area(m - 2) * std::f64::consts::TAU / (m - 2) as f64,
    }
}

/// Ball-volume profile `l_{m,κ}` of the m-dimensional constant-curvature model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeProfile {
    pub dim: usize,
    pub curvature: f64,
}

impl VolumeProfile {
    pub fn new(dim: usize, curvature: f64) -> Self {
        Self { dim, curvature }
    }

    /// `π/√κ` for positive curvature, `+∞` otherwise.
    pub fn diameter(&self) -> f64 {
        if self.curvature > 0.0 {
            std::f64::consts::PI / self.curvature.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// `∫₀^x sinh^n` (hyperbolic) or `∫₀^x sin^n` (spherical) by the reduction formula.
fn power_integral(n: usize, x: f64, hyperbolic: bool) -> f64 {
    let (s, c) = if hyperbolic { (x.sinh(), x.cosh()) } else { (x.sin(), x.cos()) };
    match n {
        0 => x,
        1 => {
            let h = (0.5 * x).sinh();
            let g = (0.5 * x).sin();
            if hyperbolic {
                2.0 * h * h
            } else {
                2.0 * g * g
            }
        }
        _ => {
            let nf = n as f64;
            let lead = s.powi(n as i32 - 1) * c / nf;
            let rest = (nf - 1.0) / nf * power_integral(n - 2, x, hyperbolic);
            if hyperbolic {
                lead - rest
            } else {
                -lead + rest
            }
        }
    }
}

/// Volume of a geodesic ball of radius `r` in the model space with the given profile.
pub fn model_ball_volume(profile: VolumeProfile, r: f64) -> Result<f64> {
    let m = profile.dim;
    if m == 0 {
        return Err(Error::UnsupportedDimension {
            dim: m,
            reason: "dimension must be positive",
        });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("ball radius must be positive, got {r}")));
    }
    let kappa = profile.curvature;
    if r > profile.diameter() * (1.0 + 1e-15) {
        return Err(Error::Domain(format!(
            "radius {r} exceeds the model diameter {}",
            profile.diameter()
        )));
    }
    let cm = unit_sphere_area(m);
    let n = m - 1;
    if kappa == 0.0 {
        return Ok(cm * r.powi(m as i32) / m as f64);
    }
    let k = kappa.abs().sqrt();
    let x = k * r;
    // The reduction formula cancels badly for small arguments; there the
    // integrand is entire and one Kronrod panel is exact to rounding.
    let integral = if x < 1.0 {
        let f = |s: f64| {
            if kappa < 0.0 {
                s.sinh().powi(n as i32)
            } else {
                s.sin().powi(n as i32)
            }
        };
        gk21(&mut { f }, 0.0, x).0
    } else {
        power_integral(n, x, kappa < 0.0)
    };
    Ok(cm * integral / k.powi(m as i32))
}

/// `h_m(r) = r^{2-m}` for `m > 2` and `ln(1/r)` for `m = 2`.
pub fn h_kernel(m: usize, r: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::UnsupportedDimension {
            dim: m,
            reason: "h_m is defined for m >= 2; use local L¹ integrability for m = 1",
        });
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("h_m needs r > 0, got {r}")));
    }
    Ok(if m == 2 { -r.ln() } else { r.powi(2 - m as i32) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI);
        assert_relative_eq!(unit_sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn closed_form_volumes() {
        assert_relative_eq!(
            model_ball_volume(VolumeProfile::new(3, 0.0), 1.0).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            model_ball_volume(VolumeProfile::new(2, -1.0), 1.0).unwrap(),
            2.0 * PI * (1f64.cosh() - 1.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            model_ball_volume(VolumeProfile::new(3, 1.0), PI).unwrap(),
            2.0 * PI * PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn reduction_formula_matches_quadrature() {
        let tol = Tolerance::relative(1e-14);
        for m in 2..=6 {
            for kappa in [-2.0, -1.0, 0.5, 1.0] {
                let p = VolumeProfile::new(m, kappa);
                for r in [0.05, 0.9, 1.7, 2.5] {
                    if r > p.diameter() {
                        continue;
                    }
                    let k = f64::abs(kappa).sqrt();
                    let q = integrate(
                        |s| {
                            let base = if kappa < 0.0 { (k * s).sinh() / k } else { (k * s).sin() / k };
                            base.powi(m as i32 - 1)
                        },
                        0.0,
                        r,
                        tol,
                    );
                    let v = model_ball_volume(p, r).unwrap();
                    assert_relative_eq!(v, unit_sphere_area(m) * q.value, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn small_radius_limit() {
        for m in 1..=5 {
            for kappa in [-1.0, 0.0, 1.0] {
                let r = 1e-5;
                let v = model_ball_volume(VolumeProfile::new(m, kappa), r).unwrap();
                let flat = unit_sphere_area(m) * r.powi(m as i32) / m as f64;
                assert_relative_eq!(v, flat, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(model_ball_volume(VolumeProfile::new(3, 0.0), 0.0).is_err());
        assert!(model_ball_volume(VolumeProfile::new(3, 1.0), 4.0).is_err());
        assert!(h_kernel(1, 0.5).is_err());
        assert!(h_kernel(3, 0.0).is_err());
    }

    #[test]
    fn h_kernel_values() {
        assert_relative_eq!(h_kernel(3, 0.1).unwrap(), 10.0, max_relative = 1e-15);
        assert_relative_eq!(h_kernel(2, 0.1).unwrap(), 10f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(h_kernel(5, 2.0).unwrap(), 0.125);
    }
}
