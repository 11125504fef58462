use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{PathConfig, PATH_BATCH};
use crate::error::Result;
use crate::geometry::{ModelSpace, SpaceKind};
use crate::parallel::Exec;

/// One sample path, advanced step by step and never stored whole.
///
/// Euclidean spaces use exact Gaussian increments of variance `h` per
/// coordinate (generator `Δ/2`). Hyperbolic spaces use the geodesic random
/// walk: a tangent Gaussian with covariance `h·Id`, carried to the current
/// point by the Lorentz boost from the origin and pushed through the
/// exponential map of the hyperboloid.
pub struct Walker<'a> {
    space: &'a ModelSpace,
    config: &'a PathConfig,
    rng: &'a mut ChaCha8Rng,
    pos: Vec<f64>,
    prev: Vec<f64>,
    step: usize,
    steps: usize,
    killed: bool,
    xi: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(config: &'a PathConfig, rng: &'a mut ChaCha8Rng) -> Self {
        let pos = config.start.coords().to_vec();
        Self {
            space: &config.space,
            config,
            rng,
            prev: pos.clone(),
            pos,
            step: 0,
            steps: config.steps(),
            killed: false,
            xi: vec![0.0; config.space.dim()],
        }
    }

    pub fn position(&self) -> &[f64] {
        &self.pos
    }

    /// Position before the last step.
    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    /// Number of steps taken.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn h(&self) -> f64 {
        self.config.h
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Whether the path left the killing domain (at the current step).
    pub fn killed(&self) -> bool {
        self.killed
    }

    /// Lifetime `ζ` observed on the time grid, `None` if the path survived.
    pub fn lifetime(&self) -> Option<f64> {
        self.killed.then_some(self.step as f64 * self.config.h)
    }

    /// Advance one step; returns `false` once the horizon is reached or the
    /// path has been killed (the exit position stays available).
    pub fn advance(&mut self) -> bool {
        if self.killed || self.step >= self.steps {
            return false;
        }
        let sd = self.config.h.sqrt();
        for x in self.xi.iter_mut() {
            let z: f64 = StandardNormal.sample(self.rng);
            *x = sd * z;
        }
        std::mem::swap(&mut self.prev, &mut self.pos);
        self.pos.clone_from(&self.prev);
        match self.space.kind() {
            SpaceKind::Euclidean => {
                for (p, x) in self.pos.iter_mut().zip(&self.xi) {
                    *p += x;
                }
            }
            SpaceKind::Hyperbolic => hyperbolic_step(&mut self.pos, &self.xi),
        }
        self.step += 1;
        if let Some(d) = &self.config.domain {
            if !d.contains(self.space, &self.pos) {
                self.killed = true;
            }
        }
        true
    }
}

/// `x ↦ exp_x(L_x(0, ξ))` on the hyperboloid, followed by re-projection.
fn hyperbolic_step(x: &mut [f64], xi: &[f64]) {
    let x0 = x[0];
    let dot: f64 = x[1..].iter().zip(xi).map(|(a, b)| a * b).sum();
    // tangent vector u = L_x(0, ξ), Minkowski norm |ξ|
    let r = xi.iter().map(|a| a * a).sum::<f64>().sqrt();
    if r == 0.0 {
        return;
    }
    let c = dot / (1.0 + x0);
    let (ch, sh) = (r.cosh(), r.sinh() / r);
    x[0] = ch * x0 + sh * dot;
    for i in 1..x.len() {
        let u = xi[i - 1] + x[i] * c;
        x[i] = ch * x[i] + sh * u;
    }
    x[0] = (1.0 + x[1..].iter().map(|a| a * a).sum::<f64>()).sqrt();
}

/// Run `visit` on every path and return the per-path results in path order.
///
/// Path `i` belongs to batch `i / PATH_BATCH`; each batch draws from its own
/// ChaCha stream `(seed, batch)`, so the output is identical for every worker
/// count.
pub fn sample_paths<R, F>(config: &PathConfig, exec: Exec, visit: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&mut Walker<'_>) -> R + Sync + Send,
{
    config.validate()?;
    let batches = exec.map(config.batches(), |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(b as u64);
        let count = PATH_BATCH.min(config.n_paths - b * PATH_BATCH);
        (0..count)
            .map(|_| {
                let mut w = Walker::new(config, &mut rng);
                visit(&mut w)
            })
            .collect::<Vec<R>>()
    });
    Ok(batches.into_iter().flatten().collect())
}
