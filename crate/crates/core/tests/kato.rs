use std::f64::consts::PI;

use kato_core::geometry::{ModelSpace, Point};
use kato_core::kato::*;
use proptest::prelude::*;

fn r3() -> ModelSpace {
    ModelSpace::euclidean(3).unwrap()
}

fn origin_probe(space: &ModelSpace) -> Vec<Point> {
    vec![space.origin()]
}

fn settings() -> KatoSettings {
    KatoSettings::default()
}

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫ p_s(0, y)/|y| dy` in ℝ³ by Simpson in `ρ`, independent of the library.
fn coulomb_average_oracle(s: f64) -> f64 {
    let upper = 40.0 * s.sqrt();
    simpson(
        |rho| 4.0 * PI * rho * (2.0 * PI * s).powf(-1.5) * (-rho * rho / (2.0 * s)).exp(),
        0.0,
        upper,
        20_000,
    )
}

fn coulomb_eta_oracle(t: f64) -> f64 {
    // s = u²: ∫₀^t A(s) ds = ∫₀^{√t} 2u·A(u²) du, and A(u²)·u is smooth
    simpson(|u| if u == 0.0 { 2.0 * (2.0 / PI).sqrt() } else { 2.0 * u * coulomb_average_oracle(u * u) }, 0.0, t.sqrt(), 200)
}

#[test]
fn oracle_matches_closed_forms() {
    for s in [1e-4f64, 0.04, 1.0] {
        let closed = (2.0 / PI).sqrt() / s.sqrt();
        assert!((coulomb_average_oracle(s) / closed - 1.0).abs() < 1e-10);
    }
    let t = 0.01;
    assert!((coulomb_eta_oracle(t) / (2.0 * (2.0 * t / PI).sqrt()) - 1.0).abs() < 1e-8);
}

#[test]
fn coulomb_heat_average() {
    let v = Potential::coulomb(r3(), 1.0);
    let a = heat_potential_average(&v, &r3().origin(), 0.04, &settings()).unwrap();
    assert!((a.value - 3.98942).abs() < 5e-6, "{a:?}");
    assert!((a.value / coulomb_average_oracle(0.04) - 1.0).abs() < 1e-7);
    // off-centre probe against the oracle integrand shifted by Newton's theorem:
    // the mean of 1/|y| over a sphere of radius ρ about x is 1/max(ρ, |x|)
    let x = r3().point(vec![0.3, 0.0, 0.0]).unwrap();
    let s: f64 = 0.05;
    let oracle = simpson(
        |rho| 4.0 * PI * rho * rho * (2.0 * PI * s).powf(-1.5) * (-rho * rho / (2.0 * s)).exp() / rho.max(0.3),
        0.0,
        40.0 * s.sqrt(),
        40_000,
    );
    let a = heat_potential_average(&v, &x, s, &settings()).unwrap();
    assert!((a.value / oracle - 1.0).abs() < 1e-7, "{} vs {oracle}", a.value);
}

#[test]
fn constant_average_is_the_constant() {
    for space in [r3(), ModelSpace::hyperbolic(3).unwrap(), ModelSpace::hyperbolic(2).unwrap()] {
        let v = Potential::constant(space, 5.0);
        let mut dir = vec![0.0; space.dim()];
        dir[0] = 1.0;
        let x = space.point_at(&dir, 0.7).unwrap();
        let a = heat_potential_average(&v, &x, 0.3, &settings()).unwrap();
        assert!((a.value - 5.0).abs() < 1e-7, "{space:?}: {}", a.value);
    }
}

#[test]
fn inverse_square_single_time_is_finite() {
    // ∫ p_s(0,y)|y|^{-2} dy = E|Z|^{-2}/s = 1/s for a standard normal Z in ℝ³
    let v = Potential::inverse_square(r3(), 1.0);
    let a = heat_potential_average(&v, &r3().origin(), 0.01, &settings()).unwrap();
    assert!(!a.divergent);
    assert!((a.value - 100.0).abs() < 1e-5);
    let eta = kato_eta(&v, &origin_probe(&r3()), 0.01, &settings()).unwrap();
    assert!(eta.divergent && eta.value.is_infinite());
}

#[test]
fn coulomb_eta_and_resolvent() {
    let v = Potential::coulomb(r3(), 1.0);
    let probes = v.default_probes();
    for t in [1e-4, 1e-3, 1e-2, 1e-1] {
        let e = kato_eta(&v, &probes, t, &settings()).unwrap();
        let closed = 2.0 * (2.0 * t / PI).sqrt();
        assert!((e.value / closed - 1.0).abs() < 1e-6, "t={t}: {} vs {closed}", e.value);
        assert_eq!(e.argmax, 0, "origin is the maximiser");
        assert!(e.error < 1e-5 * e.value);
    }
    let e = kato_eta(&v, &probes, 0.01, &settings()).unwrap();
    assert!((e.value / coulomb_eta_oracle(0.01) - 1.0).abs() < 1e-6);
    assert!((e.value - 0.159577).abs() < 5e-7);
    for (r, want) in [(2.0, 1.0), (8.0, 0.5), (100.0, 0.02f64.sqrt())] {
        let c = resolvent_constant(&v, &probes, r, &settings()).unwrap();
        assert!((c.value / want - 1.0).abs() < 1e-6, "r={r}: {}", c.value);
    }
}

#[test]
fn constant_and_zero_functionals() {
    let c = 2.5;
    let v = Potential::constant(r3(), c);
    let probes = origin_probe(&r3());
    let e = kato_eta(&v, &probes, 0.3, &settings()).unwrap();
    assert!((e.value - c * 0.3).abs() < 1e-7);
    let cr = resolvent_constant(&v, &probes, 4.0, &settings()).unwrap();
    assert!((cr.value - c / 4.0).abs() < 1e-7);
    let z = Potential::constant(r3(), 0.0);
    assert_eq!(kato_eta(&z, &probes, 0.3, &settings()).unwrap().value, 0.0);
    let s = sandwich_check(&z, &probes, 3.0, 0.2, &settings()).unwrap();
    assert_eq!((s.lower, s.eta, s.upper), (0.0, 0.0, 0.0));
    assert!(s.holds());
    assert!(kato_eta(&v, &[], 0.1, &settings()).is_err());
}

#[test]
fn sandwich_examples() {
    let v = Potential::coulomb(r3(), 1.0);
    let s = sandwich_check(&v, &origin_probe(&r3()), 100.0, 0.01, &settings()).unwrap();
    let c = (0.02f64).sqrt();
    assert!((s.lower - (1.0 - (-1f64).exp()) * c).abs() < 1e-6, "{}", s.lower);
    assert!((s.eta - 0.159577).abs() < 5e-7);
    assert!((s.upper - 0.384423).abs() < 5e-6);
    assert!(s.holds());
    let k = Potential::constant(r3(), 3.0);
    for (r, t) in [(0.5, 2.0), (10.0, 0.01), (1.0, 1.0)] {
        let s = sandwich_check(&k, &origin_probe(&r3()), r, t, &settings()).unwrap();
        assert!(s.holds(), "{s:?}");
        assert!((s.eta - 3.0 * t).abs() < 1e-6);
    }
}

#[test]
fn analytic_functional_examples() {
    let v = Potential::coulomb(r3(), 1.0);
    let a = analytic_kato_functional(&v, &origin_probe(&r3()), 0.1, &settings()).unwrap();
    assert!((a.value - 0.4 * PI).abs() < 1e-7);
    let r2 = ModelSpace::euclidean(2).unwrap();
    let one = Potential::constant(r2, 1.0);
    let x = r2.point(vec![0.2, -1.0]).unwrap();
    let a = analytic_kato_functional(&one, &[x], 0.5, &settings()).unwrap();
    let closed = 2.0 * PI * (0.125 * 2f64.ln() + 0.0625);
    assert!((a.value - closed).abs() < 1e-7, "{} vs {closed}", a.value);
    assert!((a.value - 0.937096).abs() < 5e-7);
    let z = Potential::constant(r3(), 0.0);
    assert_eq!(analytic_kato_functional(&z, &origin_probe(&r3()), 0.1, &settings()).unwrap().value, 0.0);
    let r1 = ModelSpace::euclidean(1).unwrap();
    assert!(analytic_kato_functional(&Potential::constant(r1, 1.0), &[r1.origin()], 0.1, &settings()).is_err());
}

#[test]
fn lp_rules() {
    assert_eq!(lp_kato_classify(2.0, 3).unwrap(), LpClass::Sufficient);
    assert_eq!(lp_kato_classify(1.0, 1).unwrap(), LpClass::Sufficient);
    assert_eq!(lp_kato_classify(1.5, 3).unwrap(), LpClass::NotCovered);
    assert_eq!(lp_kato_classify(1.0, 2).unwrap(), LpClass::NotCovered);
    assert!(lp_kato_classify(0.5, 3).is_err());
}

#[test]
fn form_bounds() {
    let v = Potential::coulomb(r3(), 1.0);
    let fb = form_bound_constants(&v, &origin_probe(&r3()), 0.5, &settings()).unwrap();
    assert!((fb.r_star - 8.0).abs() < 1e-5, "{fb:?}");
    assert!((fb.c1 - 0.5).abs() < 1e-6 && fb.c1 <= 0.5);
    assert!((fb.c2 - 4.0).abs() < 1e-5);
    let c = 3.0;
    let fb = form_bound_constants(&Potential::constant(r3(), c), &origin_probe(&r3()), 0.5, &settings()).unwrap();
    assert!((fb.r_star - 2.0 * c).abs() < 1e-6 && (fb.c1 - 0.5).abs() < 1e-7 && (fb.c2 - c).abs() < 1e-6);
    let fb = form_bound_constants(&Potential::constant(r3(), 0.0), &origin_probe(&r3()), 0.5, &settings()).unwrap();
    assert_eq!((fb.c1, fb.c2), (0.0, 0.0));
    let err = form_bound_constants(&Potential::inverse_square(r3(), 1.0), &origin_probe(&r3()), 0.5, &settings());
    assert!(err.is_err());
}

#[test]
fn verdicts() {
    let opts = KatoOptions::default();
    let member = |v: &Potential| kato_verdict(v, &opts, &settings()).unwrap().verdict;
    assert_eq!(member(&Potential::coulomb(r3(), 1.0)), Verdict::Member);
    assert_eq!(member(&Potential::inverse_square(r3(), 1.0)), Verdict::Nonmember);
    assert_eq!(member(&Potential::constant(r3(), 7.0)), Verdict::Member);
    let bump = Potential::new(r3(), 2.0, Shape::Bump { radius: 1.0 });
    let report = kato_verdict(
        &bump,
        &KatoOptions {
            lp_exponent: Some(2.0),
            ..KatoOptions::default()
        },
        &settings(),
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Member);
    let lp = report.lp.unwrap();
    assert_eq!(lp.class, LpClass::Sufficient);
    assert!(lp.norm.unwrap().is_finite());
    // 1/|x| on the line is not even locally integrable
    let r1 = ModelSpace::euclidean(1).unwrap();
    let rep = kato_verdict(&Potential::coulomb(r1, 1.0), &opts, &settings()).unwrap();
    assert_eq!(rep.verdict, Verdict::Nonmember);
    assert!(rep.local_mass.divergent);
    assert!(kato_verdict(
        &bump,
        &KatoOptions {
            t_grid: vec![1.0, 0.1, 0.2, 0.01],
            ..KatoOptions::default()
        },
        &settings()
    )
    .is_err());
}

#[test]
fn report_grids_are_monotone_and_serialize() {
    let v = Potential::coulomb(ModelSpace::hyperbolic(3).unwrap(), 1.0);
    let rep = kato_verdict(&v, &KatoOptions::default(), &settings()).unwrap();
    assert_eq!(rep.verdict, Verdict::Member);
    assert!(rep.eta.windows(2).all(|w| w[1].value.value <= w[0].value.value));
    assert!(rep.resolvent.windows(2).all(|w| w[1].value.value < w[0].value.value));
    let fit = rep.fit.unwrap();
    assert!((fit.exponent - 0.5).abs() < 0.02, "{fit:?}");
    let json = serde_json::to_value(&rep).unwrap();
    assert_eq!(json["verdict"], "member");
    assert_eq!(json["eta"][0]["provenance"], "quadrature");
    assert!(json["eta"][0]["error"].as_f64().unwrap() > 0.0);
}

#[test]
fn hyperbolic_coulomb_small_time_matches_euclidean() {
    // short-time heat kernels agree to leading order
    for space in [ModelSpace::hyperbolic(3).unwrap(), ModelSpace::hyperbolic(2).unwrap()] {
        let v = Potential::coulomb(space, 1.0);
        let e = kato_eta(&v, &[space.origin()], 1e-4, &settings()).unwrap();
        let m = space.dim();
        // ℝ^m: E|B_s|^{-1} = Γ((m-1)/2)/(√2 Γ(m/2)) s^{-1/2}
        let g = if m == 3 { (2.0 / PI).sqrt() } else { (PI / 2.0).sqrt() };
        let closed = 2.0 * g * 1e-2;
        assert!((e.value / closed - 1.0).abs() < 1e-3, "m={m}: {} vs {closed}", e.value);
    }
}

fn bump_potential(c: f64, radius: f64) -> Potential {
    Potential::new(r3(), c, Shape::Bump { radius })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linearity_in_amplitude(alpha in -50.0f64..50.0, t in 0.001f64..1.0) {
        let v = Potential::coulomb(r3(), 1.0);
        let probes = v.default_probes();
        let base = kato_eta(&v, &probes, t, &settings()).unwrap().value;
        let scaled = kato_eta(&v.scaled(alpha), &probes, t, &settings()).unwrap().value;
        prop_assert!((scaled - alpha.abs() * base).abs() <= 1e-12 * alpha.abs() * base);
    }

    #[test]
    fn eta_nondecreasing_and_resolvent_decreasing(c in 0.1f64..5.0, radius in 0.2f64..2.0, t in 0.01f64..1.0, r in 0.1f64..10.0) {
        let v = bump_potential(c, radius);
        let probes = v.default_probes();
        let e1 = kato_eta(&v, &probes, t, &settings()).unwrap().value;
        let e2 = kato_eta(&v, &probes, 1.5 * t, &settings()).unwrap().value;
        prop_assert!(e2 >= e1);
        let c1 = resolvent_constant(&v, &probes, r, &settings()).unwrap().value;
        let c2 = resolvent_constant(&v, &probes, 1.5 * r, &settings()).unwrap().value;
        prop_assert!(c2 < c1);
    }

    #[test]
    fn sandwich_holds(c in 0.1f64..5.0, radius in 0.2f64..2.0, t in 0.01f64..1.0, r in 0.1f64..20.0) {
        let v = bump_potential(c, radius);
        let s = sandwich_check(&v, &v.default_probes(), r, t, &settings()).unwrap();
        prop_assert!(s.holds(), "{:?}", s);
    }

    #[test]
    fn lp_sufficient_implies_member(p in 1.6f64..6.0, alpha_frac in 0.05f64..0.95) {
        // truncated r^{-α} with αp < 3 lies in L^p(ℝ³)
        let alpha = alpha_frac * 3.0 / p;
        let v = Potential::new(r3(), 1.0, Shape::TruncatedPower { alpha, radius: 1.0 });
        prop_assert_eq!(lp_kato_classify(p, 3).unwrap(), LpClass::Sufficient);
        prop_assert!(v.lp_norm(p).unwrap().is_some());
        let rep = kato_verdict(&v, &KatoOptions { r_grid: vec![], analytic_radii: vec![], ..KatoOptions::default() }, &settings()).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Member);
    }
}
