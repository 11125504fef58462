//! Globally adaptive Gauss-Kronrod (10/21) quadrature.
//!
//! [`integrate`] is the plain QAG-style driver. [`integrate_singular`] accepts
//! a list of break points, each of which may carry an integrable algebraic
//! endpoint singularity: every piece is split at its midpoint and both halves
//! are mapped with `x = p + u²`, which turns `|x - p|^{-1/2}` behaviour into a
//! smooth integrand. Break points are probed for non-integrable power laws
//! before any work is done, and a divergent integral comes back as `+inf`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Values above this magnitude are treated as a blown-up (divergent) integral.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Local power-law exponent at or above which an endpoint singularity is
/// declared non-integrable.
pub const DIVERGENT_EXPONENT: f64 = 0.99;

const MAX_SEGMENTS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn diverged() -> Self {
        Self {
            value: f64::INFINITY,
            error: f64::INFINITY,
            evaluations: 0,
            converged: true,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    pub fn is_divergent(&self) -> bool {
        !self.value.is_finite()
    }

    /// Scale by a constant factor (errors scale with its modulus).
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
            ..self
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

/// One application of the 21-point Kronrod rule with the QUADPACK error
/// heuristic. Returns `(integral, error)`.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += WG[j] * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = ((res_kronrod - res_gauss) * half).abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    let mut scaled = err;
    if res_asc != 0.0 && err != 0.0 {
        scaled = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    (res_kronrod * half, scaled)
}

#[derive(Clone, Copy, Debug)]
enum Map {
    Identity,
    /// x = origin + u²
    SqrtRight(f64),
    /// x = origin - u²
    SqrtLeft(f64),
}

impl Map {
    #[inline]
    fn eval<F: FnMut(f64) -> f64>(&self, f: &mut F, u: f64) -> f64 {
        match *self {
            Map::Identity => f(u),
            Map::SqrtRight(p) => 2.0 * u * f(p + u * u),
            Map::SqrtLeft(p) => 2.0 * u * f(p - u * u),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    map: Map,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn apply<F: FnMut(f64) -> f64>(f: &mut F, map: Map, a: f64, b: f64) -> Segment {
    let mut g = |u: f64| map.eval(f, u);
    let (value, error) = gk21(&mut g, a, b);
    Segment {
        map,
        a,
        b,
        value,
        error,
    }
}

fn adapt<F: FnMut(f64) -> f64>(f: &mut F, initial: Vec<(Map, f64, f64)>, tol: Tolerance, limit: f64) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut value = 0.0;
    let mut error = 0.0;

    for (map, a, b) in initial {
        if b <= a {
            continue;
        }
        let seg = apply(f, map, a, b);
        evaluations += 21;
        if !seg.value.is_finite() {
            return QuadResult::diverged();
        }
        value += seg.value;
        error += seg.error;
        heap.push(seg);
    }

    loop {
        if value.abs() > limit || !value.is_finite() {
            return QuadResult::diverged();
        }
        let done = error <= tol.target(value) || heap.is_empty();
        if done || heap.len() >= MAX_SEGMENTS {
            // re-sum to drop the drift of the running totals
            let (value, error) = heap
                .iter()
                .fold((frozen_value, frozen_error), |(v, e), s| (v + s.value, e + s.error));
            if value.abs() > limit || !value.is_finite() {
                return QuadResult::diverged();
            }
            return QuadResult {
                value,
                error,
                evaluations,
                converged: error <= tol.target(value),
            };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if width <= 1e-15 * worst.a.abs().max(worst.b.abs()) || mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let left = apply(f, worst.map, worst.a, mid);
        let right = apply(f, worst.map, mid, worst.b);
        evaluations += 42;
        if !left.value.is_finite() || !right.value.is_finite() {
            return QuadResult::diverged();
        }
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Adaptive quadrature of a (piecewise) smooth integrand on `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a == b {
        return QuadResult::exact(0.0);
    }
    if b < a {
        let r = integrate(f, b, a, tol);
        return r.scaled(-1.0);
    }
    adapt(&mut f, vec![(Map::Identity, a, b)], tol, DIVERGENCE_THRESHOLD)
}

/// Adaptive quadrature over consecutive pieces `[p_i, p_{i+1}]` sharing one
/// global error budget. Points must be ascending.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> QuadResult {
    let initial: Vec<_> = points.windows(2).map(|w| (Map::Identity, w[0], w[1])).collect();
    if initial.is_empty() {
        return QuadResult::exact(0.0);
    }
    adapt(&mut f, initial, tol, DIVERGENCE_THRESHOLD)
}

/// Estimate the exponent `gamma` in `|f(p + s·d)| ~ d^{-gamma}` as `d -> 0`,
/// sampling at `d = 1e-6·width` and `1e-9·width` on the side `s = ±1`.
pub fn endpoint_exponent<F: FnMut(f64) -> f64>(f: &mut F, p: f64, side: f64, width: f64) -> f64 {
    let d1 = 1e-6 * width;
    let d2 = 1e-9 * width;
    let f1 = f(p + side * d1).abs();
    let f2 = f(p + side * d2).abs();
    if !f2.is_finite() || !f1.is_finite() {
        return f64::INFINITY;
    }
    if f2 == 0.0 {
        return f64::NEG_INFINITY;
    }
    if f1 == 0.0 {
        return f64::INFINITY;
    }
    (f2.ln() - f1.ln()) / (d1.ln() - d2.ln())
}

/// Adaptive quadrature over `[points[0], points[last]]` with every interior
/// and end point treated as a potential integrable singularity.
///
/// Points must be sorted ascending; duplicates are ignored.
pub fn integrate_singular<F: FnMut(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> QuadResult {
    integrate_singular_bounded(f, points, tol, DIVERGENCE_THRESHOLD)
}

/// [`integrate_singular`] with a caller-chosen magnitude at which the result
/// counts as divergent. Inner integrals of a nested quadrature can be large
/// but finite near an integrable singularity of the outer variable, so they
/// pass `f64::INFINITY` and rely on the endpoint exponent alone.
pub fn integrate_singular_bounded<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
    limit: f64,
) -> QuadResult {
    let mut pts: Vec<f64> = points.to_vec();
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 2 {
        return QuadResult::exact(0.0);
    }
    let mut initial = Vec::with_capacity(2 * (pts.len() - 1));
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let width = q - p;
        if width <= 0.0 {
            continue;
        }
        if endpoint_exponent(&mut f, p, 1.0, width) >= DIVERGENT_EXPONENT
            || endpoint_exponent(&mut f, q, -1.0, width) >= DIVERGENT_EXPONENT
        {
            return QuadResult::diverged();
        }
        let half = (0.5 * width).sqrt();
        initial.push((Map::SqrtRight(p), 0.0, half));
        initial.push((Map::SqrtLeft(q), 0.0, half));
    }
    adapt(&mut f, initial, tol, limit)
}
