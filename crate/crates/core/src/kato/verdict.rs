use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ModelSpace, Point};

use super::functionals::{
    analytic_kato_functional, form_bound_constants, kato_eta, local_mass, lp_kato_classify, resolvent_constant,
    Evaluated, FormBound, KatoSettings, LpClass,
};
use super::potential::Potential;

/// Exponent above which a fitted `η(t) ≈ a·t^b` counts as vanishing.
pub const MEMBER_EXPONENT: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    Nonmember,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoOptions {
    /// strictly decreasing positive times, at least four
    pub t_grid: Vec<f64>,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default = "default_analytic_radii")]
    pub analytic_radii: Vec<f64>,
    #[serde(default)]
    pub lp_exponent: Option<f64>,
    #[serde(default)]
    pub form_target: Option<f64>,
    /// probe points; the potential's default probes when absent
    #[serde(default)]
    pub probes: Option<Vec<Point>>,
}

fn default_r_grid() -> Vec<f64> {
    vec![1.0, 10.0, 100.0]
}

fn default_analytic_radii() -> Vec<f64> {
    vec![0.5, 0.1, 0.02, 0.004]
}

impl Default for KatoOptions {
    fn default() -> Self {
        Self {
            t_grid: vec![1.0, 0.1, 0.01, 0.001],
            r_grid: default_r_grid(),
            analytic_radii: default_analytic_radii(),
            lp_exponent: None,
            form_target: None,
            probes: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridValue {
    /// the grid parameter (`t`, `r` or a radius)
    pub at: f64,
    #[serde(flatten)]
    pub value: Evaluated,
}

/// Least-squares fit `log y = log a + b log x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub prefactor: f64,
    pub exponent: f64,
}

pub fn power_fit(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
    if xs.len() < 2 || xs.len() != ys.len() || ys.iter().any(|&y| !(y > 0.0) || !y.is_finite()) {
        return None;
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    Some(PowerFit {
        prefactor: (my - b * mx).exp(),
        exponent: b,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpReport {
    pub p: f64,
    /// `None` when the norm is infinite
    pub norm: Option<f64>,
    pub class: LpClass,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KatoReport {
    pub space: ModelSpace,
    pub verdict: Verdict,
    pub probes: Vec<Point>,
    pub eta: Vec<GridValue>,
    pub fit: Option<PowerFit>,
    pub resolvent: Vec<GridValue>,
    /// `sup_x ∫_{B(x,1)} |v|`
    pub local_mass: Evaluated,
    /// empty in dimension one
    pub analytic: Vec<GridValue>,
    pub analytic_fit: Option<PowerFit>,
    pub lp: Option<LpReport>,
    pub form_bound: Option<FormBound>,
}

/// Decide Kato membership from `η` on a grid of times shrinking to zero.
pub fn kato_verdict(v: &Potential, options: &KatoOptions, settings: &KatoSettings) -> Result<KatoReport> {
    let t = &options.t_grid;
    if t.len() < 4 || t.iter().any(|&x| !(x > 0.0) || !x.is_finite()) || t.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Usage(
            "t_grid must hold at least four positive, strictly decreasing times".into(),
        ));
    }
    let probes = options.probes.clone().unwrap_or_else(|| v.default_probes());

    let eta = t
        .iter()
        .map(|&s| kato_eta(v, &probes, s, settings).map(|value| GridValue { at: s, value }))
        .collect::<Result<Vec<_>>>()?;
    let local = local_mass(v, &probes, 1.0, settings)?;

    let tail = &eta[eta.len() - 3..];
    let xs: Vec<f64> = tail.iter().map(|g| g.at).collect();
    let ys: Vec<f64> = tail.iter().map(|g| g.value.value).collect();
    let fit = power_fit(&xs, &ys);
    let verdict = if local.divergent || eta.iter().any(|g| g.value.divergent) {
        Verdict::Nonmember
    } else if ys.iter().all(|&y| y == 0.0) {
        Verdict::Member
    } else {
        match fit {
            Some(f) if f.exponent > MEMBER_EXPONENT => Verdict::Member,
            _ => Verdict::Inconclusive,
        }
    };

    let resolvent = options
        .r_grid
        .iter()
        .map(|&r| resolvent_constant(v, &probes, r, settings).map(|value| GridValue { at: r, value }))
        .collect::<Result<Vec<_>>>()?;

    let analytic = if v.space().dim() >= 2 {
        options
            .analytic_radii
            .iter()
            .map(|&r| analytic_kato_functional(v, &probes, r, settings).map(|value| GridValue { at: r, value }))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let analytic_fit = if analytic.len() >= 3 {
        let tail = &analytic[analytic.len() - 3..];
        let xs: Vec<f64> = tail.iter().map(|g| g.at).collect();
        let ys: Vec<f64> = tail.iter().map(|g| g.value.value).collect();
        power_fit(&xs, &ys)
    } else {
        None
    };

    let lp = match options.lp_exponent {
        Some(p) => Some(LpReport {
            p,
            norm: v.lp_norm(p)?,
            class: lp_kato_classify(p, v.space().dim())?,
        }),
        None => None,
    };
    let form_bound = match options.form_target {
        Some(target) if verdict != Verdict::Nonmember => Some(form_bound_constants(v, &probes, target, settings)?),
        _ => None,
    };

    Ok(KatoReport {
        space: *v.space(),
        verdict,
        probes,
        eta,
        fit,
        resolvent,
        local_mass: local,
        analytic,
        analytic_fit,
        lp,
        form_bound,
    })
}
