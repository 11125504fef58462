use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_singular, QuadResult, Tolerance};

use super::volume::unit_sphere_area;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Hyperbolic,
}

/// `ℝ^m` or the hyperbolic space `H^m` (curvature -1, m ∈ {2, 3}).
///
/// Hyperbolic points live on the upper sheet of the hyperboloid
/// `-x₀² + x₁² + … + x_m² = -1` in `ℝ^{m+1}`; Euclidean points are Cartesian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct ModelSpace {
    kind: SpaceKind,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    kind: SpaceKind,
    dim: usize,
}

impl TryFrom<RawSpace> for ModelSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        match raw.kind {
            SpaceKind::Euclidean => ModelSpace::euclidean(raw.dim),
            SpaceKind::Hyperbolic => ModelSpace::hyperbolic(raw.dim),
        }
    }
}

impl From<ModelSpace> for RawSpace {
    fn from(s: ModelSpace) -> Self {
        RawSpace {
            kind: s.kind,
            dim: s.dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl ModelSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "dimension must be positive",
            });
        }
        Ok(Self {
            kind: SpaceKind::Euclidean,
            dim,
        })
    }

    pub fn hyperbolic(dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "hyperbolic spaces are provided for m = 2 and m = 3",
            });
        }
        Ok(Self {
            kind: SpaceKind::Hyperbolic,
            dim,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn curvature(&self) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => 0.0,
            SpaceKind::Hyperbolic => -1.0,
        }
    }

    /// Length of a coordinate vector.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Euclidean => self.dim,
            SpaceKind::Hyperbolic => self.dim + 1,
        }
    }

    pub fn origin(&self) -> Point {
        let mut c = vec![0.0; self.ambient_dim()];
        if self.kind == SpaceKind::Hyperbolic {
            c[0] = 1.0;
        }
        Point(c)
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        let p = Point(coords);
        self.validate(&p)?;
        Ok(p)
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        let c = &p.0;
        if c.len() != self.ambient_dim() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if self.kind == SpaceKind::Hyperbolic {
            let defect = minkowski(c, c) + 1.0;
            if c[0] <= 0.0 || defect.abs() > 1e-12 * c[0] * c[0] {
                return Err(Error::InvalidPoint(format!(
                    "not on the upper hyperboloid sheet (defect {defect:e})"
                )));
            }
        }
        Ok(())
    }

    /// Image of the tangent vector `distance · direction/|direction|` under the
    /// exponential map at the origin.
    pub fn point_at(&self, direction: &[f64], distance: f64) -> Result<Point> {
        if direction.len() != self.dim {
            return Err(Error::InvalidPoint(format!(
                "direction must have {} components",
                self.dim
            )));
        }
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 && distance != 0.0 {
            return Err(Error::InvalidPoint("zero direction".into()));
        }
        let unit: Vec<f64> = if norm == 0.0 {
            vec![0.0; self.dim]
        } else {
            direction.iter().map(|x| x / norm).collect()
        };
        Ok(match self.kind {
            SpaceKind::Euclidean => Point(unit.iter().map(|u| u * distance).collect()),
            SpaceKind::Hyperbolic => {
                let mut c = Vec::with_capacity(self.dim + 1);
                c.push(distance.cosh());
                c.extend(unit.iter().map(|u| u * distance.sinh()));
                Point(c)
            }
        })
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.distance_unchecked(x.coords(), y.coords()))
    }

    /// Geodesic distance between raw coordinate slices (no validation).
    pub fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            SpaceKind::Hyperbolic => {
                let c = -minkowski(x, y);
                if c > 2.0 {
                    c.acosh()
                } else {
                    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                    let q = minkowski(&diff, &diff).max(0.0);
                    2.0 * (0.5 * q.sqrt()).asinh()
                }
            }
        }
    }

    /// Distance from the origin.
    pub fn radius_of(&self, x: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::Euclidean => x.iter().map(|a| a * a).sum::<f64>().sqrt(),
            SpaceKind::Hyperbolic => x[1..].iter().map(|a| a * a).sum::<f64>().sqrt().asinh(),
        }
    }

    /// Area of the geodesic sphere of radius `rho` (for m = 1: the two points,
    /// counted with weight 1 each).
    pub fn sphere_area(&self, rho: f64) -> f64 {
        let c = unit_sphere_area(self.dim);
        let k = (self.dim - 1) as i32;
        match self.kind {
            SpaceKind::Euclidean => c * rho.powi(k),
            SpaceKind::Hyperbolic => c * rho.sinh().powi(k),
        }
    }

    /// Distance to the point `y` (with `d(x, y) = a`) from the point of the
    /// sphere `S_ρ(x)` at angle `θ` off the geodesic through `y`.
    fn law_of_cosines(&self, a: f64, rho: f64, theta: f64) -> f64 {
        let s2 = (0.5 * theta).sin().powi(2);
        match self.kind {
            SpaceKind::Euclidean => ((a - rho).powi(2) + 4.0 * a * rho * s2).sqrt(),
            SpaceKind::Hyperbolic if a + rho < 600.0 => {
                let x = 2.0 * (0.5 * (a - rho)).sinh().powi(2) + 2.0 * a.sinh() * rho.sinh() * s2;
                2.0 * (0.5 * x).sqrt().asinh()
            }
            SpaceKind::Hyperbolic => {
                // log of 2cosh d, assembled without overflow
                let near = (a - rho).abs() + (-2.0 * (a - rho).abs()).exp().ln_1p();
                let far = if s2 > 0.0 {
                    a + rho + (-(-2.0 * a).exp_m1()).ln() + (-(-2.0 * rho).exp_m1()).ln() + s2.ln()
                } else {
                    f64::NEG_INFINITY
                };
                let (hi, lo) = if near > far { (near, far) } else { (far, near) };
                let l = hi + (lo - hi).exp().ln_1p();
                if l < 700.0 {
                    (0.5 * l.exp()).max(1.0).acosh()
                } else {
                    l
                }
            }
        }
    }

    /// Angle at which the distance in [`Self::law_of_cosines`] equals `sigma`.
    fn angle_for_distance(&self, a: f64, rho: f64, sigma: f64) -> Option<f64> {
        let s2 = match self.kind {
            SpaceKind::Euclidean => (sigma * sigma - (a - rho).powi(2)) / (4.0 * a * rho),
            SpaceKind::Hyperbolic => {
                (2.0 * (0.5 * sigma).sinh().powi(2) - 2.0 * (0.5 * (a - rho)).sinh().powi(2))
                    / (2.0 * a.sinh() * rho.sinh())
            }
        };
        (s2 > 0.0 && s2 < 1.0).then(|| 2.0 * s2.sqrt().asin())
    }

    /// Mean of `g(d(z, y))` over the geodesic sphere `{z : d(x, z) = ρ}` when
    /// `d(x, y) = a`. `singular` lists distances from `y` at which `g` may be
    /// singular; they become break points of the angular quadrature.
    pub fn sphere_mean<G: FnMut(f64) -> f64>(
        &self,
        rho: f64,
        a: f64,
        mut g: G,
        singular: &[f64],
        tol: Tolerance,
    ) -> QuadResult {
        if rho == 0.0 {
            return QuadResult::exact(g(a));
        }
        if a == 0.0 {
            return QuadResult::exact(g(rho));
        }
        let m = self.dim;
        if m == 1 {
            return QuadResult::exact(0.5 * (g((rho - a).abs()) + g(rho + a)));
        }
        if m == 3 {
            let lo = (a - rho).abs();
            let hi = a + rho;
            let mut pts = vec![lo];
            pts.extend(singular.iter().copied().filter(|&s| s > lo && s < hi));
            pts.push(hi);
            pts.sort_by(f64::total_cmp);
            return match self.kind {
                SpaceKind::Euclidean => {
                    let norm = 1.0 / (2.0 * a * rho);
                    integrate_singular(|s| g(s) * s * norm, &pts, tol)
                }
                SpaceKind::Hyperbolic => {
                    let norm = 0.5 / a.sinh();
                    integrate_singular(|s| g(s) * sinh_ratio(s, rho) * norm, &pts, tol)
                }
            };
        }
        let k = (m - 2) as i32;
        let norm = 1.0 / sine_power_integral(m - 2);
        let mut pts = vec![0.0];
        pts.extend(singular.iter().filter_map(|&s| self.angle_for_distance(a, rho, s)));
        pts.push(std::f64::consts::PI);
        pts.sort_by(f64::total_cmp);
        integrate_singular(
            |th| g(self.law_of_cosines(a, rho, th)) * th.sin().powi(k) * norm,
            &pts,
            tol,
        )
    }
}

/// `sinh x / sinh y` for `x, y > 0`, finite whenever the ratio is.
fn sinh_ratio(x: f64, y: f64) -> f64 {
    (x - y).exp() * (-2.0 * x).exp_m1() / (-2.0 * y).exp_m1()
}

/// `∫₀^π sin^k θ dθ`
fn sine_power_integral(k: usize) -> f64 {
    match k {
        0 => std::f64::consts::PI,
        1 => 2.0,
        _ => (k - 1) as f64 / k as f64 * sine_power_integral(k - 2),
    }
}

fn minkowski(x: &[f64], y: &[f64]) -> f64 {
    -x[0] * y[0] + x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum::<f64>()
}
