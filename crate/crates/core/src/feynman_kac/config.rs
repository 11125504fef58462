use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ModelSpace, Point, SpaceKind};

/// Killing region: paths are stopped at the first monitored exit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// geodesic ball about the origin
    Ball { radius: f64 },
    /// `{x : x·normal < offset}` (Euclidean only)
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// open coordinate box (Euclidean only)
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl Domain {
    pub fn contains(&self, space: &ModelSpace, x: &[f64]) -> bool {
        match self {
            Domain::Ball { radius } => space.radius_of(x) < *radius,
            Domain::HalfSpace { normal, offset } => x.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() < *offset,
            Domain::Box { lower, upper } => x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| v > l && v < u),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub space: ModelSpace,
    pub start: Point,
    /// horizon
    pub t: f64,
    /// time step
    pub h: f64,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub domain: Option<Domain>,
}

/// Paths per random stream; fixed so results do not depend on the number of
/// workers.
pub const PATH_BATCH: usize = 1024;

impl PathConfig {
    pub fn new(space: ModelSpace, start: Point, t: f64, h: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            space,
            start,
            t,
            h,
            n_paths,
            seed,
            domain: None,
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Number of time steps `t/h`.
    pub fn steps(&self) -> usize {
        (self.t / self.h).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::PathConfig(m));
        if !(self.t > 0.0) || !self.t.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.t));
        }
        if !(self.h > 0.0) || self.h > self.t / 10.0 * (1.0 + 1e-12) {
            return bad(format!("step must satisfy 0 < h <= t/10, got h = {}, t = {}", self.h, self.t));
        }
        let n = self.t / self.h;
        if (n - n.round()).abs() > 1e-9 * n {
            return bad(format!("t/h = {n} is not an integer"));
        }
        if self.n_paths < 100 {
            return bad(format!("need at least 100 paths, got {}", self.n_paths));
        }
        self.space
            .validate(&self.start)
            .map_err(|e| Error::PathConfig(format!("start point: {e}")))?;
        if let Some(d) = &self.domain {
            let euclid = self.space.kind() == SpaceKind::Euclidean;
            let m = self.space.dim();
            match d {
                Domain::Ball { radius } if !(*radius > 0.0) => return bad("ball radius must be positive".into()),
                Domain::HalfSpace { normal, .. } if !euclid || normal.len() != m => {
                    return bad("half-space needs a Euclidean space and a normal of length m".into())
                }
                Domain::Box { lower, upper }
                    if !euclid || lower.len() != m || upper.len() != m || lower.iter().zip(upper).any(|(l, u)| l >= u) =>
                {
                    return bad("box needs a Euclidean space and lower < upper in each of m coordinates".into())
                }
                _ => {}
            }
            if !d.contains(&self.space, self.start.coords()) {
                return bad("start point lies outside the killing domain".into());
            }
        }
        Ok(())
    }

    pub fn batches(&self) -> usize {
        self.n_paths.div_ceil(PATH_BATCH)
    }
}
