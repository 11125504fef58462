use std::f64::consts::PI;

use kato_core::feynman_kac::*;
use kato_core::geometry::{heat_radial_moment, ModelSpace};
use kato_core::kato::Potential;
use kato_core::operators::generators::{grid_2d, radial_ball, symmetric_gauge, GridSpec};
use kato_core::operators::{bochner_laplacian, semigroup, Section, C64};
use kato_core::Exec;
use proptest::prelude::*;

fn r(m: usize) -> ModelSpace {
    ModelSpace::euclidean(m).unwrap()
}

fn config(space: ModelSpace, t: f64, h: f64, n: usize, seed: u64) -> PathConfig {
    let o = space.origin();
    PathConfig::new(space, o, t, h, n, seed)
}

fn ball_survival_series(t: f64) -> f64 {
    (1..60)
        .map(|k| 2.0 * if k % 2 == 1 { 1.0 } else { -1.0 } * (-((k * k) as f64) * PI * PI * t / 2.0).exp())
        .sum()
}

#[test]
fn config_validation() {
    let ok = config(r(1), 1.0, 0.1, 100, 0);
    assert!(ok.validate().is_ok());
    assert!(config(r(1), 1.0, 0.2, 100, 0).validate().is_err());
    assert!(config(r(1), 1.0, 0.1, 99, 0).validate().is_err());
    assert!(config(r(1), 1.0, 0.03, 100, 0).validate().is_err());
    let outside = ok.clone().with_domain(Domain::Ball { radius: 0.0 });
    assert!(outside.validate().is_err());
    let hyp = config(ModelSpace::hyperbolic(3).unwrap(), 1.0, 0.1, 100, 0).with_domain(Domain::HalfSpace {
        normal: vec![1.0, 0.0, 0.0],
        offset: 1.0,
    });
    assert!(hyp.validate().is_err());
    let json = r#"{"space":{"kind":"euclidean","dim":2},"start":[0,0],"t":1,"h":0.1,"n_paths":100,"seed":1,
                   "domain":{"box":{"lower":[-1,-1],"upper":[1,1]}}}"#;
    let c: PathConfig = serde_json::from_str(json).unwrap();
    assert!(c.validate().is_ok());
    assert!(serde_json::from_str::<PathConfig>(&json.replace("\"seed\"", "\"sed\"")).is_err());
}

#[test]
fn brownian_moments_in_one_dimension() {
    let c = config(r(1), 1.0, 1e-3, 100_000, 11);
    let mean = mc_heat_expectation(|x| x[0], &c, Exec::default()).unwrap();
    let second = mc_heat_expectation(|x| x[0] * x[0], &c, Exec::default()).unwrap();
    assert!(mean.agrees_with(0.0, 3.0), "{mean:?}");
    assert!(second.agrees_with(1.0, 3.0), "{second:?}");
}

#[test]
fn unkilled_mass_is_exactly_one() {
    let c = config(r(3), 0.5, 0.05, 500, 2);
    let e = mc_heat_expectation(|_| 1.0, &c, Exec::default()).unwrap();
    assert_eq!(e.value, 1.0);
    assert_eq!(e.std_error, 0.0);
    assert_eq!(e.n_effective, 500);
}

#[test]
fn ball_survival_matches_series_and_mesh() {
    let t = 0.1;
    let h = 1e-4;
    let c = config(r(3), t, h, 20_000, 5).with_domain(Domain::Ball { radius: 1.0 });
    let e = mc_heat_expectation(|_| 1.0, &c, Exec::default()).unwrap();
    assert!(e.value < 1.0);
    let series = ball_survival_series(t);
    // discrete monitoring misses excursions: O(√h) overestimate
    assert!((e.value - series).abs() <= 3.0 * e.std_error + h.sqrt(), "{e:?} vs {series}");

    let space = r(3);
    let mesh = radial_ball(&space, 1.0, 200).unwrap();
    let lap = bochner_laplacian(&mesh).unwrap();
    let one = Section::scalar(&mesh, |_| 1.0).unwrap();
    let (u, _) = semigroup(&lap, None, &one, t).unwrap();
    let mesh_value = u.vector()[0].re;
    assert!((e.value - mesh_value).abs() <= 3.0 * e.std_error + h.sqrt() + 2e-3);
}

#[test]
fn unit_ball_occupation_matches_quadrature() {
    // P(|B_t| < 1) for B_t ~ N(0, t I₃), by a radial Simpson rule
    let t = 0.25;
    let n = 2000;
    let dr = 1.0 / n as f64;
    let dens = |r: f64| 4.0 * PI * r * r * (2.0 * PI * t).powf(-1.5) * (-r * r / (2.0 * t)).exp();
    let oracle: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * dens(i as f64 * dr)
        })
        .sum::<f64>()
        * dr
        / 3.0;
    let c = config(r(3), t, 0.025, 50_000, 8);
    let e = mc_heat_expectation(|x| if x.iter().map(|a| a * a).sum::<f64>() < 1.0 { 1.0 } else { 0.0 }, &c, Exec::default())
        .unwrap();
    assert!(e.agrees_with(oracle, 3.0), "{e:?} vs {oracle}");
}

#[test]
fn hyperbolic_second_moment() {
    let s = ModelSpace::hyperbolic(3).unwrap();
    let t = 0.5;
    let h = 1e-3;
    let c = config(s, t, h, 20_000, 21);
    let o = s.origin();
    let e = mc_heat_expectation(|x| s.distance_unchecked(o.coords(), x).powi(2), &c, Exec::default()).unwrap();
    let q = heat_radial_moment(&s, t, 2).unwrap().value;
    // weak error of the geodesic walk is O(h)
    assert!((e.value - q).abs() <= 3.0 * e.std_error + 10.0 * h, "{e:?} vs {q}");
}

#[test]
fn kato_integral_simple_potentials() {
    let c = config(r(3), 0.01, 1e-4, 200, 1);
    let e = mc_kato_integral(&Potential::constant(r(3), 2.5), &c, Exec::default()).unwrap();
    assert!((e.value - 0.025).abs() < 1e-14);
    assert!(e.std_error < 1e-14);
    assert_eq!(e.cap_events, 0);
    let z = mc_kato_integral(&Potential::constant(r(3), 0.0), &c, Exec::default()).unwrap();
    assert_eq!(z.value, 0.0);
    assert!(mc_kato_integral(&Potential::constant(r(2), 1.0), &c, Exec::default()).is_err());
}

#[test]
fn coulomb_kato_integral() {
    let t = 0.01;
    let h = 1e-5;
    let c = config(r(3), t, h, 20_000, 3);
    let e = mc_kato_integral(&Potential::coulomb(r(3), 1.0), &c, Exec::default()).unwrap();
    let exact = 2.0 * (2.0 * t / PI).sqrt();
    // every path starts on the singularity
    assert!(e.cap_events >= 20_000);
    assert!(e.agrees_with(exact, 3.0), "{e:?} vs {exact}");
    assert!(e.bias > 0.0 && e.bias < 0.2 * exact);
}

#[test]
fn coulomb_refinement_stays_in_the_bias_envelope() {
    let t = 0.01;
    let v = Potential::coulomb(r(3), 1.0);
    let runs: Vec<Estimate> = [4e-4, 2e-4, 1e-4, 5e-5]
        .iter()
        .map(|&h| mc_kato_integral(&v, &config(r(3), t, h, 10_000, 4), Exec::default()).unwrap())
        .collect();
    for w in runs.windows(2) {
        let change = (w[1].value - w[0].value).abs();
        assert!(change <= w[0].bias + 3.0 * (w[0].std_error + w[1].std_error), "{w:?}");
    }
}

#[test]
fn killing_stops_the_kato_integral() {
    let c = config(r(3), 0.1, 1e-3, 2000, 9).with_domain(Domain::Ball { radius: 0.3 });
    let free = mc_kato_integral(&Potential::constant(r(3), 1.0), &config(r(3), 0.1, 1e-3, 2000, 9), Exec::default()).unwrap();
    let killed = mc_kato_integral(&Potential::constant(r(3), 1.0), &c, Exec::default()).unwrap();
    assert!((free.value - 0.1).abs() < 1e-13);
    assert!(killed.value < 0.1 && killed.value > 0.0);
}

#[test]
fn phases_on_deterministic_paths() {
    let flat = |_: &[f64]| vec![0.0, 0.0];
    let path: Vec<Vec<f64>> = (0..10).map(|k| vec![k as f64 * 0.1, (k as f64).sin()]).collect();
    assert_eq!(transport_phase(&path, &flat), C64::new(1.0, 0.0));

    // counter-clockwise square loop of side 1: enclosed flux B·1
    let b = 0.7;
    let a = move |p: &[f64]| symmetric_gauge(b, p).to_vec();
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]];
    let mut sq = Vec::new();
    for w in corners.windows(2) {
        for k in 0..25 {
            let s = k as f64 / 25.0;
            sq.push(vec![w[0][0] + s * (w[1][0] - w[0][0]), w[0][1] + s * (w[1][1] - w[0][1])]);
        }
    }
    sq.push(vec![0.0, 0.0]);
    let ph = transport_phase(&sq, &a);
    assert!((ph - C64::from_polar(1.0, -b)).norm() < 1e-13, "{ph}");

    // gauge shift by χ = x²y
    let chi = |p: &[f64]| p[0] * p[0] * p[1];
    let shifted = move |p: &[f64]| {
        let g = symmetric_gauge(b, p);
        vec![g[0] + 2.0 * p[0] * p[1], g[1] + p[0] * p[0]]
    };
    let wiggle: Vec<Vec<f64>> = (0..=400)
        .map(|k| {
            let s = k as f64 / 400.0;
            vec![s + 0.1 * (9.0 * s).sin(), 0.5 * s * s - 0.2 * (5.0 * s).cos()]
        })
        .collect();
    let (first, last) = (&wiggle[0], &wiggle[400]);
    let want = transport_phase(&wiggle, &a) * C64::from_polar(1.0, -(chi(last) - chi(first)));
    let got = transport_phase(&wiggle, &shifted);
    assert!((got - want).norm() < 1e-3, "{got} vs {want}");
}

fn bump(x: &[f64]) -> f64 {
    (-(x[0] * x[0] + x[1] * x[1]) / 0.5).exp()
}

// off-centre, so that the symmetric gauge leaves a nonzero imaginary part
fn shifted_bump(x: &[f64]) -> f64 {
    bump(&[x[0] + 0.5, x[1]])
}

#[test]
fn covariant_semigroup_flat_equals_scalar() {
    let c = PathConfig::new(r(2), ModelSpace::euclidean(2).unwrap().point(vec![0.3, 0.1]).unwrap(), 0.5, 0.01, 5000, 6);
    let cov = mc_covariant_semigroup(|x| C64::new(bump(x), 0.0), |_| vec![0.0, 0.0], &c, Exec::default()).unwrap();
    let scal = mc_heat_expectation(bump, &c, Exec::default()).unwrap();
    assert_eq!(cov.value.re, scal.value);
    assert_eq!(cov.value.im, 0.0);
    assert!(cov.dominated);
}

#[test]
fn covariant_semigroup_matches_peierls_grid() {
    let (t, h, field) = (0.5, 1e-3, 4.0);
    let start = [0.5, 0.3];
    let spec = GridSpec {
        x: [-3.0, 3.0],
        y: [-3.0, 3.0],
        spacing: 0.1,
        field,
    };
    let mesh = grid_2d(&spec).unwrap();
    let lap = bochner_laplacian(&mesh).unwrap();
    let psi = Section::from_fn(&mesh, |u| vec![C64::new(shifted_bump(mesh.vertices()[u].coords.as_ref().unwrap()), 0.0)]).unwrap();
    let (u, _) = semigroup(&lap, None, &psi, t).unwrap();
    let at = mesh
        .vertices()
        .iter()
        .position(|v| {
            let p = v.coords.as_ref().unwrap();
            (p[0] - start[0]).abs() < 1e-9 && (p[1] - start[1]).abs() < 1e-9
        })
        .unwrap();
    let grid = u.fiber(mesh.slot(at).unwrap())[0];

    let c = PathConfig::new(r(2), r(2).point(start.to_vec()).unwrap(), t, h, 20_000, 17).with_domain(Domain::Box {
        lower: vec![-3.0, -3.0],
        upper: vec![3.0, 3.0],
    });
    let cov = mc_covariant_semigroup(|x| C64::new(shifted_bump(x), 0.0), |p| symmetric_gauge(field, p).to_vec(), &c, Exec::default())
        .unwrap();
    assert!(cov.dominated);
    let diff = (cov.value.value() - grid).norm();
    assert!(diff <= 3.0 * cov.value.std_error + h + 0.01, "{:?} vs {grid}", cov.value);
    // the field visibly rotates the phase
    assert!(grid.im.abs() > 5.0 * cov.value.std_error, "{grid} {:?}", cov.value);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let c = config(r(3), 0.01, 1e-4, 3000, 77).with_domain(Domain::Ball { radius: 0.2 });
    let v = Potential::coulomb(r(3), 1.0);
    let a = mc_kato_integral(&v, &c, Exec::reference()).unwrap();
    let b = mc_kato_integral(&v, &c, Exec::with_workers(4)).unwrap();
    let d = mc_kato_integral(&v, &c, Exec::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a, d);
    let other = mc_kato_integral(&v, &PathConfig { seed: 78, ..c }, Exec::reference()).unwrap();
    assert_ne!(a.value, other.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn phases_have_unit_modulus(seed in 0u64..1000, b in -5.0f64..5.0) {
        let c = config(r(2), 0.2, 0.02, 100, seed);
        let phases = sample_paths(&c, Exec::reference(), |w| {
            let mut acc = PhaseAccumulator::new();
            while w.advance() {
                acc.push(&|p: &[f64]| symmetric_gauge(b, p).to_vec(), w.previous(), w.position());
            }
            acc.phase()
        }).unwrap();
        for p in phases {
            prop_assert!((p.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn covariant_estimate_is_dominated(seed in 0u64..1000, b in -3.0f64..3.0, x in -1.0f64..1.0) {
        let c = PathConfig::new(r(2), r(2).point(vec![x, 0.0]).unwrap(), 0.3, 0.03, 400, seed);
        let cov = mc_covariant_semigroup(
            |p| C64::new(bump(p), 0.0),
            |p| symmetric_gauge(b, p).to_vec(),
            &c,
            Exec::reference(),
        ).unwrap();
        prop_assert!(cov.dominated);
    }
}
