use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{radial_cutoff, ModelSpace, Point, SpaceKind};
use crate::quadrature::{integrate_singular, Tolerance};

/// JSON description of a potential centred at the origin of its model space.
///
/// ```json
/// {"radial": {"expr": "coulomb", "params": {"c": 1.0}, "singularities": [0.0]}}
/// {"tabulated": {"radii": [0.0, 1.0, 2.0], "values": [3.0, 1.0, 0.0]}}
/// {"constant": 5.0}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Radial {
        expr: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        #[serde(default)]
        singularities: Vec<f64>,
    },
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
    },
    Constant(f64),
}

/// Radial profile with unit amplitude.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `r^{-α}`
    InversePower { alpha: f64 },
    Constant,
    /// `exp(1 - 1/(1 - (r/R)²))` on `r < R`
    Bump { radius: f64 },
    /// `r^{-α}` on `r < R`
    TruncatedPower { alpha: f64, radius: f64 },
    /// `exp(-r²/(2w²))`
    Gaussian { width: f64 },
    /// piecewise linear through the samples, constant outside
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl Shape {
    fn eval(&self, r: f64) -> f64 {
        match self {
            Shape::InversePower { alpha } => r.powf(-alpha),
            Shape::Constant => 1.0,
            Shape::Bump { radius } => {
                let x = r / radius;
                if x < 1.0 {
                    (1.0 - 1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
            Shape::TruncatedPower { alpha, radius } => {
                if r < *radius {
                    r.powf(-alpha)
                } else {
                    0.0
                }
            }
            Shape::Gaussian { width } => (-r * r / (2.0 * width * width)).exp(),
            Shape::Tabulated { radii, values } => interpolate(radii, values, r),
        }
    }

    /// Radius beyond which the profile vanishes identically.
    fn support(&self) -> Option<f64> {
        match self {
            Shape::Bump { radius } | Shape::TruncatedPower { radius, .. } => Some(*radius),
            Shape::Tabulated { radii, values } if values.last() == Some(&0.0) => radii.last().copied(),
            _ => None,
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            Shape::InversePower { .. } => vec![0.0],
            Shape::TruncatedPower { radius, .. } => vec![0.0, *radius],
            Shape::Bump { radius } => vec![*radius],
            Shape::Tabulated { radii, .. } => radii.clone(),
            Shape::Constant | Shape::Gaussian { .. } => vec![],
        }
    }
}

fn interpolate(radii: &[f64], values: &[f64], r: f64) -> f64 {
    let n = radii.len();
    if r <= radii[0] {
        return values[0];
    }
    if r >= radii[n - 1] {
        return values[n - 1];
    }
    let i = radii.partition_point(|&x| x <= r) - 1;
    let w = (r - radii[i]) / (radii[i + 1] - radii[i]);
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// Which part of the signed potential is represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Full,
    /// `max(v, 0)`
    Positive,
    /// `max(-v, 0)`
    Negative,
}

/// A radial scalar potential `v(y) = amplitude · shape(d(o, y))` on a model
/// space, centred at the origin `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    space: ModelSpace,
    amplitude: f64,
    shape: Shape,
    part: Part,
    singularities: Vec<f64>,
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    match (params.get(key), default) {
        (Some(v), _) if v.is_finite() => Ok(*v),
        (Some(v), _) => Err(Error::Usage(format!("parameter `{key}` must be finite, got {v}"))),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(Error::Usage(format!("missing parameter `{key}`"))),
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Usage(format!("parameter `{name}` must be positive, got {v}")))
    }
}

impl Potential {
    pub fn new(space: ModelSpace, amplitude: f64, shape: Shape) -> Self {
        Self {
            space,
            amplitude,
            shape,
            part: Part::Full,
            singularities: Vec::new(),
        }
    }

    /// `c/|y|`
    pub fn coulomb(space: ModelSpace, c: f64) -> Self {
        Self::new(space, c, Shape::InversePower { alpha: 1.0 })
    }

    /// `c/|y|²`
    pub fn inverse_square(space: ModelSpace, c: f64) -> Self {
        Self::new(space, c, Shape::InversePower { alpha: 2.0 })
    }

    pub fn constant(space: ModelSpace, c: f64) -> Self {
        Self::new(space, c, Shape::Constant)
    }

    pub fn from_spec(space: ModelSpace, spec: &PotentialSpec) -> Result<Self> {
        let mut v = match spec {
            PotentialSpec::Constant(c) => Self::constant(space, *c),
            PotentialSpec::Tabulated { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::Usage(
                        "tabulated potential needs equally many (>= 1) radii and values".into(),
                    ));
                }
                if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
                    return Err(Error::Usage("tabulated radii must be non-negative and increasing".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Usage("tabulated values must be finite".into()));
                }
                Self::new(
                    space,
                    1.0,
                    Shape::Tabulated {
                        radii: radii.clone(),
                        values: values.clone(),
                    },
                )
            }
            PotentialSpec::Radial { expr, params, .. } => {
                let allowed: &[&str] = match expr.as_str() {
                    "coulomb" | "inverse_square" | "constant" => &["c"],
                    "inverse_power" => &["c", "alpha"],
                    "bump" => &["c", "radius"],
                    "truncated_power" => &["c", "alpha", "radius"],
                    "gaussian" => &["c", "width"],
                    other => return Err(Error::Usage(format!("unknown radial expression `{other}`"))),
                };
                if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
                    return Err(Error::Usage(format!("unknown parameter `{k}` for `{expr}`")));
                }
                let c = param(params, "c", Some(1.0))?;
                let shape = match expr.as_str() {
                    "coulomb" => Shape::InversePower { alpha: 1.0 },
                    "inverse_square" => Shape::InversePower { alpha: 2.0 },
                    "constant" => Shape::Constant,
                    "inverse_power" => Shape::InversePower {
                        alpha: positive("alpha", param(params, "alpha", None)?)?,
                    },
                    "bump" => Shape::Bump {
                        radius: positive("radius", param(params, "radius", None)?)?,
                    },
                    "truncated_power" => Shape::TruncatedPower {
                        alpha: positive("alpha", param(params, "alpha", None)?)?,
                        radius: positive("radius", param(params, "radius", None)?)?,
                    },
                    _ => Shape::Gaussian {
                        width: positive("width", param(params, "width", None)?)?,
                    },
                };
                Self::new(space, c, shape)
            }
        };
        if let PotentialSpec::Radial { singularities, .. } = spec {
            if singularities.iter().any(|s| !(*s >= 0.0)) {
                return Err(Error::Usage("singular radii must be non-negative".into()));
            }
            v.singularities = singularities.clone();
        }
        Ok(v)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn part(&self) -> Part {
        self.part
    }

    /// `α·v`
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            amplitude: self.amplitude * alpha,
            ..self.clone()
        }
    }

    /// Positive and negative parts `(v₁, v₂)` with `v = v₁ - v₂`.
    pub fn sign_split(&self) -> (Self, Self) {
        let part = |p| Self {
            part: p,
            ..self.clone()
        };
        match self.part {
            Part::Full => (part(Part::Positive), part(Part::Negative)),
            Part::Positive => (self.clone(), Self::constant(self.space, 0.0)),
            Part::Negative => (Self::constant(self.space, 0.0), self.clone()),
        }
    }

    /// Signed value at distance `r` from the origin.
    pub fn value_at_radius(&self, r: f64) -> f64 {
        let v = self.amplitude * self.shape.eval(r);
        match self.part {
            Part::Full => v,
            Part::Positive => v.max(0.0),
            Part::Negative => (-v).max(0.0),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_at_radius(self.space.radius_of(x))
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    /// `|v(r)| / |amplitude|`; Kato functionals are computed on this profile
    /// and rescaled, so they are exactly homogeneous in the amplitude.
    pub fn unit_abs(&self, r: f64) -> f64 {
        let s = self.shape.eval(r);
        let sign = self.amplitude.signum();
        match self.part {
            Part::Full => s.abs(),
            Part::Positive => (sign * s).max(0.0),
            Part::Negative => (-sign * s).max(0.0),
        }
    }

    /// Radii (from the origin) where `|v|` may be singular or non-smooth.
    pub fn break_radii(&self) -> Vec<f64> {
        let mut b = self.shape.kinks();
        b.extend(self.singularities.iter().copied());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn support_radius(&self) -> Option<f64> {
        if self.is_zero() {
            return Some(0.0);
        }
        self.shape.support()
    }

    /// Probe points used to approximate the supremum over the space: the
    /// origin (the expected argmax for radially decreasing `|v|`), one point on
    /// every singular sphere and a few points further out.
    pub fn default_probes(&self) -> Vec<Point> {
        let mut radii = vec![0.0];
        radii.extend(self.break_radii().into_iter().filter(|&r| r > 0.0));
        radii.extend([0.5, 1.0, 2.0]);
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let mut dir = vec![0.0; self.space.dim()];
        dir[0] = 1.0;
        radii
            .into_iter()
            .map(|r| self.space.point_at(&dir, r).expect("unit direction"))
            .collect()
    }

    /// `‖v‖_{L^p}`, or `None` when it is infinite.
    pub fn lp_norm(&self, p: f64) -> Result<Option<f64>> {
        if !(p >= 1.0) {
            return Err(Error::Usage(format!("L^p norm needs p >= 1, got {p}")));
        }
        if self.is_zero() {
            return Ok(Some(0.0));
        }
        let m = self.space.dim() as f64;
        let upper = match (&self.shape, self.support_radius()) {
            (_, Some(r)) => r,
            (Shape::Gaussian { width }, None) => {
                radial_cutoff(&self.space, 1.0) * width + if self.space.kind() == SpaceKind::Hyperbolic {
                    2.0 * m * width * width
                } else {
                    0.0
                }
            }
            (Shape::InversePower { alpha }, None)
                if self.space.kind() == SpaceKind::Euclidean && alpha * p > m =>
            {
                // finite tail: ∫_R^∞ ρ^{m-1-αp} handled in closed form below
                1.0
            }
            _ => return Ok(None),
        };
        let mut pts = vec![0.0];
        pts.extend(self.break_radii().into_iter().filter(|&b| b > 0.0 && b < upper));
        pts.push(upper);
        let q = integrate_singular(
            |r| self.space.sphere_area(r) * self.unit_abs(r).powf(p),
            &pts,
            Tolerance::relative(1e-10),
        );
        if q.is_divergent() {
            return Ok(None);
        }
        let mut total = q.value;
        if let (Shape::InversePower { alpha }, None) = (&self.shape, self.shape.support()) {
            let area = self.space.sphere_area(1.0);
            total += area / (alpha * p - m);
        }
        Ok(Some(self.amplitude.abs() * total.powf(1.0 / p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn r3() -> ModelSpace {
        ModelSpace::euclidean(3).unwrap()
    }

    #[test]
    fn spec_parsing() {
        let spec: PotentialSpec =
            serde_json::from_str(r#"{"radial": {"expr": "coulomb", "params": {"c": 2.0}, "singularities": [0.0]}}"#)
                .unwrap();
        let v = Potential::from_spec(r3(), &spec).unwrap();
        assert_eq!(v.value_at_radius(0.5), 4.0);
        let spec: PotentialSpec = serde_json::from_str(r#"{"constant": 5.0}"#).unwrap();
        assert_eq!(Potential::from_spec(r3(), &spec).unwrap().value_at_radius(9.0), 5.0);
        let spec: PotentialSpec =
            serde_json::from_str(r#"{"tabulated": {"radii": [0.0, 1.0], "values": [2.0, 0.0]}}"#).unwrap();
        let v = Potential::from_spec(r3(), &spec).unwrap();
        assert_eq!(v.value_at_radius(0.25), 1.5);
        assert_eq!(v.support_radius(), Some(1.0));
    }

    #[test]
    fn spec_errors() {
        let bad = [
            r#"{"radial": {"expr": "nope"}}"#,
            r#"{"radial": {"expr": "coulomb", "params": {"d": 1.0}}}"#,
            r#"{"radial": {"expr": "bump", "params": {"radius": -1.0}}}"#,
            r#"{"tabulated": {"radii": [1.0, 0.5], "values": [1.0, 2.0]}}"#,
        ];
        for b in bad {
            let spec: PotentialSpec = serde_json::from_str(b).unwrap();
            assert!(Potential::from_spec(r3(), &spec).is_err(), "{b}");
        }
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"radial": {"expr": "coulomb", "extra": 1}}"#).is_err());
    }

    #[test]
    fn sign_split_reconstructs() {
        let spec = PotentialSpec::Tabulated {
            radii: vec![0.0, 1.0, 2.0, 3.0],
            values: vec![-2.0, 1.0, -0.5, 0.0],
        };
        let v = Potential::from_spec(r3(), &spec).unwrap().scaled(-1.5);
        let (v1, v2) = v.sign_split();
        for i in 0..300 {
            let r = i as f64 * 0.01;
            assert!(v1.value_at_radius(r) >= 0.0 && v2.value_at_radius(r) >= 0.0);
            assert_relative_eq!(v1.value_at_radius(r) - v2.value_at_radius(r), v.value_at_radius(r));
            assert_relative_eq!(v.amplitude().abs() * v1.unit_abs(r), v1.value_at_radius(r));
        }
    }

    #[test]
    fn lp_norms() {
        // ∫_{|y|<1} |y|^{-2.4} dy = 4π/0.6
        let v = Potential::new(r3(), 1.0, Shape::TruncatedPower { alpha: 1.2, radius: 1.0 });
        assert_relative_eq!(v.lp_norm(2.0).unwrap().unwrap(), (4.0 * PI / 0.6).sqrt(), max_relative = 1e-8);
        // ∫ |y|^{-4} over |y| > 1 is finite but the origin is not: infinite
        assert_eq!(Potential::inverse_square(r3(), 1.0).lp_norm(2.0).unwrap(), None);
        assert_eq!(Potential::constant(r3(), 1.0).lp_norm(2.0).unwrap(), None);
        let g = Potential::new(r3(), 1.0, Shape::Gaussian { width: 1.0 });
        // ∫ e^{-|y|²} dy = π^{3/2}
        assert_relative_eq!(g.lp_norm(2.0).unwrap().unwrap(), PI.powf(0.75), max_relative = 1e-8);
    }
}
