use std::f64::consts::PI;

use kato_core::feynman_kac::{
    mc_covariant_semigroup, mc_heat_expectation, mc_kato_integral, Domain, PathConfig,
};
use kato_core::geometry::{heat_radial_moment, ModelSpace, SpaceKind};
use kato_core::kato::{form_bound_constants, kato_eta, kato_verdict, sandwich_check, KatoOptions, Potential, Verdict};
use kato_core::operators::generators::{grid_2d, random_section, symmetric_gauge, GridSpec};
use kato_core::operators::{
    bochner_laplacian, fiber_split, form_limit_check, form_sum_spectrum, kato_inequality_gap, klmn_optimal_c1,
    semigroup, semigroup_domination_gap, BundleMesh, EndoField, Section, C64,
};
use kato_core::provenance::Provenance;
use kato_core::Exec;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    ChecksSection, Command, Estimator, MeshSource, Observable, PotentialSource, RunConfig, SpaceSource, Tolerances,
};
use crate::{catalog, CliError};

/// A CSV table; `plot` tables hold exactly two columns `x,y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn plot(name: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut t = Self::new(&format!("plot_{name}"), &["x", "y"]);
        for (x, y) in points {
            t.rows.push(vec![num(x), num(y)]);
        }
        t
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

fn prov(p: Provenance) -> String {
    serde_json::to_value(p).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// A number with its provenance and error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
struct Num {
    value: f64,
    error: f64,
    provenance: Provenance,
}

fn n(value: f64, error: f64, provenance: Provenance) -> Num {
    Num { value, error, provenance }
}

#[derive(Debug)]
pub struct Outcome {
    pub result: Value,
    pub tables: Vec<Table>,
    /// failed contracts, each naming the invariant
    pub violations: Vec<String>,
}

pub struct Context {
    pub exec: Exec,
    pub seed: u64,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Contract(format!("computation failed: {e}"))
}

fn resolve_space(cfg: &RunConfig) -> Result<Option<ModelSpace>, CliError> {
    match &cfg.space {
        None => Ok(None),
        Some(SpaceSource::Explicit(s)) => Ok(Some(*s)),
        Some(SpaceSource::Named(id)) => catalog::space(id)
            .map(Some)
            .ok_or_else(|| usage(format!("unknown space `{id}`"))),
    }
}

fn resolve_potential(cfg: &RunConfig, space: Option<ModelSpace>) -> Result<Option<Potential>, CliError> {
    let spec = match &cfg.potential {
        None => return Ok(None),
        Some(PotentialSource::Explicit(spec)) => (space, spec.clone()),
        Some(PotentialSource::Named(id)) => {
            let (s, spec) = catalog::potential(id).ok_or_else(|| usage(format!("unknown potential `{id}`")))?;
            if let Some(sp) = space {
                if sp != s {
                    return Err(usage(format!("potential `{id}` lives on a different space than the configured one")));
                }
            }
            (Some(s), spec)
        }
    };
    let space = spec.0.ok_or_else(|| usage("an explicit potential needs `space`"))?;
    Potential::from_spec(space, &spec.1).map(Some).map_err(usage)
}

fn resolve_mesh(cfg: &RunConfig) -> Result<Option<BundleMesh>, CliError> {
    use kato_core::operators::generators::*;
    let Some(src) = &cfg.mesh else { return Ok(None) };
    let mesh = match src {
        MeshSource::Bundled(id) => catalog::mesh(id).ok_or_else(|| usage(format!("unknown mesh `{id}`")))?,
        MeshSource::Inline(m) => m.clone(),
        MeshSource::Interval { a, b, h, dirichlet_at } => {
            let m = interval(*a, *b, *h).map_err(usage)?;
            let extra = dirichlet_at
                .iter()
                .map(|&x| interval_vertex(&m, x).ok_or_else(|| usage(format!("{x} is not a grid point"))))
                .collect::<Result<Vec<_>, _>>()?;
            m.with_dirichlet(&extra).map_err(usage)?
        }
        MeshSource::Grid(spec) => grid_2d(spec).map_err(usage)?,
        MeshSource::Random(spec) => random_bundle_mesh(spec).map_err(usage)?,
        MeshSource::FluxCycle { len, theta } => flux_cycle(*len, *theta).map_err(usage)?,
        MeshSource::DirichletPath { interior } => dirichlet_path(*interior).map_err(usage)?,
    };
    Ok(Some(mesh))
}

/// `V_u = v(|x_u|)·Id` at interior vertices; the potential is treated as radial
/// in the vertex coordinates.
fn sample_on_mesh(v: &Potential, mesh: &BundleMesh) -> Result<EndoField, CliError> {
    let mut bad = None;
    let field = EndoField::scalar(mesh, |u| {
        let Some(x) = &mesh.vertices()[u].coords else {
            bad.get_or_insert(format!("vertex {u} has no coordinates"));
            return 0.0;
        };
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let val = v.value_at_radius(r);
        if !val.is_finite() {
            bad.get_or_insert(format!(
                "potential is singular at interior vertex {u}; make it a Dirichlet vertex"
            ));
        }
        val
    });
    match bad {
        Some(msg) => Err(usage(msg)),
        None => Ok(field),
    }
}

fn need<T>(x: Option<T>, what: &str, cmd: Command) -> Result<T, CliError> {
    x.ok_or_else(|| usage(format!("`{}` needs `{what}`", cmd.name())))
}

pub fn execute(cfg: &RunConfig, ctx: &Context) -> Result<Outcome, CliError> {
    let space = resolve_space(cfg)?;
    let potential = resolve_potential(cfg, space)?;
    let mesh = resolve_mesh(cfg)?;
    let settings = {
        let mut s = Tolerances::settings(cfg.tolerances.as_ref());
        s.exec = ctx.exec;
        s
    };
    match cfg.command {
        Command::KatoTest => {
            let v = need(potential, "potential", cfg.command)?;
            kato_test(cfg, &v, &settings)
        }
        Command::FormBounds => {
            let v = need(potential, "potential", cfg.command)?;
            form_bounds(cfg, &v, mesh.as_ref(), &settings)
        }
        Command::Spectrum => {
            let m = need(mesh, "mesh", cfg.command)?;
            spectrum(cfg, &m, potential.as_ref())
        }
        Command::CheckInequalities => {
            let m = need(mesh, "mesh", cfg.command)?;
            check_inequalities(cfg.checks.clone().unwrap_or_default(), &m, ctx.seed)
        }
        Command::FkMc => {
            let s = need(space.or(potential.as_ref().map(|v| *v.space())), "space", cfg.command)?;
            fk_mc(cfg, s, potential.as_ref(), ctx, &settings)
        }
    }
}

fn grid_table(name: &str, key: &'static str, grid: &[kato_core::kato::GridValue]) -> Table {
    let mut t = Table::new(name, &[key, "value", "error", "divergent", "provenance"]);
    for g in grid {
        t.push(vec![
            num(g.at),
            num(g.value.value),
            num(g.value.error),
            g.value.divergent.to_string(),
            prov(g.value.provenance),
        ]);
    }
    t
}

fn kato_test(cfg: &RunConfig, v: &Potential, settings: &kato_core::kato::KatoSettings) -> Result<Outcome, CliError> {
    let options = cfg.kato.clone().unwrap_or_default();
    let report = kato_verdict(v, &options, settings).map_err(failed)?;
    let mut violations = Vec::new();

    let mut sandwich = Vec::new();
    if report.verdict != Verdict::Nonmember {
        for &r in &options.r_grid {
            for &t in &options.t_grid {
                let s = sandwich_check(v, &report.probes, r, t, settings).map_err(failed)?;
                if !s.holds() {
                    violations.push(format!("sandwich inequality fails at r = {r}, t = {t}"));
                }
                sandwich.push(s);
            }
        }
    }
    if let Some(want) = cfg.expect.as_ref().and_then(|e| e.verdict) {
        if want != report.verdict {
            violations.push(format!("verdict: expected {want:?}, got {:?}", report.verdict).to_lowercase());
        }
    }

    let mut tables = vec![
        grid_table("eta", "t", &report.eta),
        grid_table("resolvent", "r", &report.resolvent),
    ];
    if !report.analytic.is_empty() {
        tables.push(grid_table("analytic", "r", &report.analytic));
    }
    let mut st = Table::new("sandwich", &["r", "t", "lower", "eta", "upper", "lower_ok", "upper_ok"]);
    for s in &sandwich {
        st.push(vec![
            num(s.r),
            num(s.t),
            num(s.lower),
            num(s.eta),
            num(s.upper),
            s.lower_ok.to_string(),
            s.upper_ok.to_string(),
        ]);
    }
    tables.push(st);
    let finite = |g: &&kato_core::kato::GridValue| g.value.value.is_finite();
    tables.push(Table::plot("eta", report.eta.iter().filter(finite).map(|g| (g.at, g.value.value))));
    tables.push(Table::plot("resolvent", report.resolvent.iter().filter(finite).map(|g| (g.at, g.value.value))));

    Ok(Outcome {
        result: json!({ "kato": report, "sandwich": sandwich }),
        tables,
        violations,
    })
}

fn form_bounds(
    cfg: &RunConfig,
    v: &Potential,
    mesh: Option<&BundleMesh>,
    settings: &kato_core::kato::KatoSettings,
) -> Result<Outcome, CliError> {
    let form = cfg.form.clone().unwrap_or_default();
    let probes = cfg
        .kato
        .as_ref()
        .and_then(|k: &KatoOptions| k.probes.clone())
        .unwrap_or_else(|| v.default_probes());
    let fb = form_bound_constants(v, &probes, form.target, settings).map_err(failed)?;
    let mut violations = Vec::new();
    let mut table = Table::new("form_bounds", &["quantity", "value", "provenance"]);
    table.push(vec!["r_star".into(), num(fb.r_star), "quadrature".into()]);
    table.push(vec!["c1".into(), num(fb.c1), "quadrature".into()]);
    table.push(vec!["c2".into(), num(fb.c2), "quadrature".into()]);
    let mut result = json!({
        "form_bound": fb,
        "c1": n(fb.c1, fb.c1 * settings.temporal.rel, Provenance::Quadrature),
        "c2": n(fb.c2, fb.c2 * settings.temporal.rel, Provenance::Quadrature),
    });
    if let Some(m) = mesh {
        let chain = mesh_chain(m, v, fb.c2)?;
        if chain.c1_mesh > fb.c1 + form.refinement_tolerance {
            violations.push(format!(
                "klmn: mesh-optimal C1 = {} exceeds C1 + tolerance = {}",
                chain.c1_mesh,
                fb.c1 + form.refinement_tolerance
            ));
        }
        if chain.lambda_min.value < -fb.c2 - chain.lambda_min.error {
            violations.push(format!("lower bound: lambda_min = {} < -C2 = {}", chain.lambda_min.value, -fb.c2));
        }
        table.push(vec!["c1_mesh".into(), num(chain.c1_mesh), "eigensolve".into()]);
        table.push(vec!["lambda_min".into(), num(chain.lambda_min.value), "eigensolve".into()]);
        result["mesh"] = json!({
            "c1_mesh": n(chain.c1_mesh, 0.0, Provenance::Eigensolve),
            "lambda_min": chain.lambda_min,
            "refinement_tolerance": form.refinement_tolerance,
        });
    }
    Ok(Outcome {
        result,
        tables: vec![table],
        violations,
    })
}

struct Chain {
    c1_mesh: f64,
    lambda_min: Num,
}

fn mesh_chain(m: &BundleMesh, v: &Potential, c2: f64) -> Result<Chain, CliError> {
    let lap = bochner_laplacian(m).map_err(usage)?;
    let field = sample_on_mesh(v, m)?;
    let split = fiber_split(&field);
    let c1_mesh = klmn_optimal_c1(&lap, &split.negative, c2).map_err(failed)?;
    let low = form_sum_spectrum(&lap, Some(&field), 1).map_err(failed)?;
    let e = low.first().ok_or_else(|| failed("empty spectrum"))?;
    Ok(Chain {
        c1_mesh,
        lambda_min: n(e.eigenvalue, e.residual, Provenance::Eigensolve),
    })
}

fn spectrum(cfg: &RunConfig, m: &BundleMesh, v: Option<&Potential>) -> Result<Outcome, CliError> {
    let count = cfg.spectrum.clone().unwrap_or_default().count;
    let lap = bochner_laplacian(m).map_err(usage)?;
    let field = v.map(|v| sample_on_mesh(v, m)).transpose()?;
    let k = count.min(lap.dof());
    let entries = form_sum_spectrum(&lap, field.as_ref(), k).map_err(failed)?;
    let mut violations = Vec::new();
    if let (Some(floor), Some(first)) = (cfg.expect.as_ref().and_then(|e| e.lambda_min_at_least), entries.first()) {
        if first.eigenvalue < floor - first.residual {
            violations.push(format!("lower bound: lambda_min = {} < {floor}", first.eigenvalue));
        }
    }
    let mut t = Table::new("spectrum", &["index", "eigenvalue", "residual", "provenance"]);
    for e in &entries {
        t.push(vec![e.index.to_string(), num(e.eigenvalue), num(e.residual), prov(e.provenance)]);
    }
    let plot = Table::plot("spectrum", entries.iter().map(|e| (e.index as f64, e.eigenvalue)));
    Ok(Outcome {
        result: json!({ "dof": lap.dof(), "fiber_dim": m.fiber_dim(), "spectrum": entries }),
        tables: vec![t, plot],
        violations,
    })
}

fn check_inequalities(checks: ChecksSection, m: &BundleMesh, seed: u64) -> Result<Outcome, CliError> {
    if checks.times.iter().any(|&t| !(t > 0.0)) {
        return Err(usage("checks.times must be positive"));
    }
    let lap = bochner_laplacian(m).map_err(usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sections: Vec<Section> = (0..checks.sections.max(checks.semigroup_sections))
        .map(|_| random_section(m, &mut rng))
        .collect();
    let mut violations = Vec::new();

    let mut kt = Table::new("kato_gaps", &["section", "gap", "kinetic", "relative_gap"]);
    let mut min_rel = f64::INFINITY;
    for (i, f) in sections.iter().take(checks.sections).enumerate() {
        let gap = kato_inequality_gap(&lap, f).map_err(failed)?;
        let q = lap.kinetic(f).map_err(failed)?;
        let rel = gap / (1.0 + q);
        min_rel = min_rel.min(rel);
        kt.push(vec![i.to_string(), num(gap), num(q), num(rel)]);
    }
    if min_rel < -checks.kato_tolerance {
        violations.push(format!("kato inequality: relative gap {min_rel:e} below -{:e}", checks.kato_tolerance));
    }

    let mut dt = Table::new("domination", &["section", "t", "pointwise", "form", "error"]);
    let mut min_dom = f64::INFINITY;
    let mut ft = Table::new("form_limit", &["section", "t", "quotient", "form", "truncation_bound"]);
    let mut form_rows = Vec::new();
    for (i, f) in sections.iter().take(checks.semigroup_sections).enumerate() {
        for &t in &checks.times {
            let g = semigroup_domination_gap(&lap, f, t).map_err(failed)?;
            min_dom = min_dom.min(g.pointwise.min(g.form));
            dt.push(vec![i.to_string(), num(t), num(g.pointwise), num(g.form), num(g.error)]);
        }
        if !checks.form_times.is_empty() {
            let fl = form_limit_check(&lap, None, f, &checks.form_times).map_err(failed)?;
            if !fl.monotone {
                violations.push(format!("form limit: quotients not monotone for section {i}"));
            }
            let last = fl.quotients.len() - 1;
            let gap = fl.form - fl.quotients[last];
            let slack = 1e-12 * (1.0 + fl.form.abs());
            if gap < -slack || gap > fl.truncation_bound[last] + slack {
                violations.push(format!("form limit: gap {gap:e} outside [0, t/2 |Hf|^2] for section {i}"));
            }
            for k in 0..fl.t.len() {
                ft.push(vec![
                    i.to_string(),
                    num(fl.t[k]),
                    num(fl.quotients[k]),
                    num(fl.form),
                    num(fl.truncation_bound[k]),
                ]);
            }
            form_rows.push(fl);
        }
    }
    if min_dom < -checks.domination_tolerance {
        violations.push(format!("semigroup domination: gap {min_dom:e} below -{:e}", checks.domination_tolerance));
    }
    let mut tables = vec![kt, dt, ft];
    if let Some(fl) = form_rows.first() {
        tables.push(Table::plot("form_limit", fl.t.iter().zip(&fl.quotients).map(|(t, q)| (1.0 / t, *q))));
    }
    Ok(Outcome {
        result: json!({
            "dof": lap.dof(),
            "fiber_dim": m.fiber_dim(),
            "kato_inequality": { "sections": checks.sections, "min_relative_gap": n(min_rel, 0.0, Provenance::ClosedForm) },
            "domination": {
                "sections": checks.semigroup_sections,
                "times": checks.times,
                "min_gap": n(if min_dom.is_finite() { min_dom } else { 0.0 }, 0.0, Provenance::Eigensolve),
            },
            "form_limit": form_rows,
        }),
        tables,
        violations,
    })
}

fn ball_survival(t: f64, radius: f64) -> f64 {
    (1..200)
        .map(|k| {
            let s = if k % 2 == 1 { 2.0 } else { -2.0 };
            s * (-((k * k) as f64) * PI * PI * t / (2.0 * radius * radius)).exp()
        })
        .sum()
}

fn fk_mc(
    cfg: &RunConfig,
    space: ModelSpace,
    v: Option<&Potential>,
    ctx: &Context,
    settings: &kato_core::kato::KatoSettings,
) -> Result<Outcome, CliError> {
    let ps = need(cfg.path.clone(), "path", cfg.command)?;
    let start = match &ps.start {
        Some(c) => space.point(c.clone()).map_err(usage)?,
        None => space.origin(),
    };
    let mut pc = PathConfig::new(space, start.clone(), ps.t, ps.h, ps.n_paths, ctx.seed);
    pc.domain = ps.domain.clone();
    pc.validate().map_err(usage)?;
    let at_origin = start == space.origin();
    let mut violations = Vec::new();
    let mut table = Table::new("estimate", &["quantity", "value", "std_error", "bias", "n_paths", "cap_events", "provenance"]);

    let result = match &ps.estimator {
        Estimator::Kato => {
            let v = need(v, "potential", cfg.command)?;
            if v.space() != &space {
                return Err(usage("potential and path live on different spaces"));
            }
            let e = mc_kato_integral(v, &pc, ctx.exec).map_err(failed)?;
            table.push(vec!["kato_integral".into(), num(e.value), num(e.std_error), num(e.bias), e.n_paths.to_string(), e.cap_events.to_string(), prov(e.provenance)]);
            let oracle = if pc.domain.is_none() {
                let q = kato_eta(v, std::slice::from_ref(&start), ps.t, settings).map_err(failed)?;
                if !e.agrees_with(q.value, 3.0) {
                    violations.push(format!(
                        "agreement: MC {} vs quadrature {} exceeds 3 SE + bias",
                        e.value, q.value
                    ));
                }
                table.push(vec!["quadrature".into(), num(q.value), num(q.error), "0".into(), "".into(), "".into(), prov(q.provenance)]);
                Some(q)
            } else {
                None
            };
            json!({ "estimate": e, "oracle": oracle })
        }
        Estimator::Heat { observable } => {
            let (e, oracle) = match observable {
                Observable::One => {
                    let e = mc_heat_expectation(|_| 1.0, &pc, ctx.exec).map_err(failed)?;
                    if e.value > 1.0 + 3.0 * e.std_error {
                        violations.push(format!("sub-Markov: survival {} exceeds 1", e.value));
                    }
                    let oracle = match &pc.domain {
                        None => Some((1.0, 0.0, Provenance::ClosedForm)),
                        Some(Domain::Ball { radius }) if space.kind() == SpaceKind::Euclidean && space.dim() == 3 && at_origin => {
                            // discrete exit monitoring overestimates survival by O(√h)
                            Some((ball_survival(ps.t, *radius), ps.h.sqrt(), Provenance::ClosedForm))
                        }
                        _ => None,
                    };
                    (e, oracle)
                }
                Observable::SquaredDistance => {
                    let o = start.coords().to_vec();
                    let e = mc_heat_expectation(|x| space.distance_unchecked(&o, x).powi(2), &pc, ctx.exec).map_err(failed)?;
                    let oracle = if pc.domain.is_some() {
                        None
                    } else if space.kind() == SpaceKind::Euclidean {
                        Some((space.dim() as f64 * ps.t, 0.0, Provenance::ClosedForm))
                    } else {
                        let q = heat_radial_moment(&space, ps.t, 2).map_err(failed)?;
                        // weak error of the geodesic walk is O(h)
                        Some((q.value, q.error + 10.0 * ps.h, Provenance::Quadrature))
                    };
                    (e, oracle)
                }
                Observable::BallIndicator { radius } => {
                    let o = start.coords().to_vec();
                    let r = *radius;
                    let e = mc_heat_expectation(|x| if space.distance_unchecked(&o, x) < r { 1.0 } else { 0.0 }, &pc, ctx.exec)
                        .map_err(failed)?;
                    (e, None)
                }
            };
            table.push(vec!["heat_expectation".into(), num(e.value), num(e.std_error), num(e.bias), e.n_paths.to_string(), e.cap_events.to_string(), prov(e.provenance)]);
            if let Some((value, slack, p)) = oracle {
                if (e.value - value).abs() > 3.0 * e.std_error + slack {
                    violations.push(format!("agreement: MC {} vs oracle {value} exceeds 3 SE + {slack:e}", e.value));
                }
                table.push(vec!["oracle".into(), num(value), num(slack), "0".into(), "".into(), "".into(), prov(p)]);
            }
            json!({
                "estimate": e,
                "oracle": oracle.map(|(value, slack, p)| json!({"value": value, "error": slack, "provenance": p})),
            })
        }
        Estimator::Covariant { field, center, width, mesh_spacing } => {
            if space.kind() != SpaceKind::Euclidean || space.dim() != 2 {
                return Err(usage("the covariant estimator needs Euclidean dimension 2"));
            }
            let (b, c, w) = (*field, *center, *width);
            if !(w > 0.0) {
                return Err(usage("width must be positive"));
            }
            let psi = move |x: &[f64]| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                (-d2 / (2.0 * w * w)).exp()
            };
            let est = mc_covariant_semigroup(|x| Complex64::new(psi(x), 0.0), |x| symmetric_gauge(b, x).to_vec(), &pc, ctx.exec)
                .map_err(failed)?;
            if !est.dominated {
                violations.push(format!(
                    "domination: |estimate| = {} exceeds scalar {} + 3 SE",
                    est.value.value().norm(),
                    est.scalar.value
                ));
            }
            table.push(vec!["covariant_re".into(), num(est.value.re), num(est.value.std_error), "0".into(), est.value.n_paths.to_string(), "0".into(), prov(est.value.provenance)]);
            table.push(vec!["covariant_im".into(), num(est.value.im), num(est.value.std_error), "0".into(), est.value.n_paths.to_string(), "0".into(), prov(est.value.provenance)]);
            table.push(vec!["scalar".into(), num(est.scalar.value), num(est.scalar.std_error), "0".into(), est.scalar.n_paths.to_string(), "0".into(), prov(est.scalar.provenance)]);
            let oracle = match mesh_spacing {
                Some(sp) => {
                    let g = peierls_oracle(&pc, b, *sp, &psi)?;
                    let slack = 3.0 * est.value.std_error + ps.h + sp;
                    let diff = (est.value.value() - g).norm();
                    if diff > slack {
                        violations.push(format!("agreement: MC vs Peierls grid differ by {diff:e} > {slack:e}"));
                    }
                    table.push(vec!["grid_re".into(), num(g.re), "".into(), "".into(), "".into(), "".into(), "eigensolve".into()]);
                    table.push(vec!["grid_im".into(), num(g.im), "".into(), "".into(), "".into(), "".into(), "eigensolve".into()]);
                    Some(json!({
                        "re": g.re,
                        "im": g.im,
                        "error": ps.h + sp,
                        "difference": diff,
                        "provenance": Provenance::Eigensolve,
                    }))
                }
                None => None,
            };
            json!({ "estimate": est, "oracle": oracle })
        }
    };
    Ok(Outcome {
        result: json!({ "path": pc, "fk": result }),
        tables: vec![table],
        violations,
    })
}

/// `(e^{-tH}Ψ)(start)` on the Dirichlet grid of the killing box.
fn peierls_oracle(pc: &PathConfig, field: f64, spacing: f64, psi: &dyn Fn(&[f64]) -> f64) -> Result<C64, CliError> {
    let Some(Domain::Box { lower, upper }) = &pc.domain else {
        return Err(usage("the Peierls-grid oracle needs a box killing domain"));
    };
    let mesh = grid_2d(&GridSpec {
        x: [lower[0], upper[0]],
        y: [lower[1], upper[1]],
        spacing,
        field,
    })
    .map_err(usage)?;
    let start = pc.start.coords();
    let at = mesh
        .vertices()
        .iter()
        .position(|v| {
            let p = v.coords.as_deref().unwrap_or(&[]);
            p.len() == 2 && (p[0] - start[0]).abs() < 1e-9 * spacing.max(1.0) && (p[1] - start[1]).abs() < 1e-9 * spacing.max(1.0)
        })
        .ok_or_else(|| usage("the start point must be a node of the oracle grid"))?;
    let lap = bochner_laplacian(&mesh).map_err(usage)?;
    let init = Section::from_fn(&mesh, |u| vec![C64::new(psi(mesh.vertices()[u].coords.as_deref().unwrap_or(&[0.0, 0.0])), 0.0)])
        .map_err(failed)?;
    let (u, _) = semigroup(&lap, None, &init, pc.t).map_err(failed)?;
    let k = mesh.slot(at).ok_or_else(|| usage("the start point lies on the grid boundary"))?;
    Ok(u.fiber(k)[0])
}
