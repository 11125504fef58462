use std::path::PathBuf;

use kato_core::feynman_kac::Domain;
use kato_core::geometry::ModelSpace;
use kato_core::kato::{KatoOptions, KatoSettings, PotentialSpec, Verdict};
use kato_core::operators::generators::{GridSpec, RandomMeshSpec};
use kato_core::operators::BundleMesh;
use kato_core::quadrature::Tolerance;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    KatoTest,
    FormBounds,
    Spectrum,
    CheckInequalities,
    FkMc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KatoTest => "kato-test",
            Command::FormBounds => "form-bounds",
            Command::Spectrum => "spectrum",
            Command::CheckInequalities => "check-inequalities",
            Command::FkMc => "fk-mc",
        }
    }
}

/// A complete run description. Unknown keys are rejected everywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kato: Option<KatoOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FormSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<ChecksSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// A catalog identifier or an explicit value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSource {
    Named(String),
    Explicit(ModelSpace),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSource {
    Named(String),
    Explicit(PotentialSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    Bundled(String),
    Inline(BundleMesh),
    /// uniform grid of `[a, b]`; vertices at the listed coordinates become
    /// Dirichlet as well as the end points
    Interval {
        a: f64,
        b: f64,
        h: f64,
        #[serde(default)]
        dirichlet_at: Vec<f64>,
    },
    Grid(GridSpec),
    Random(RandomMeshSpec),
    FluxCycle { len: usize, theta: f64 },
    DirichletPath { interior: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSection {
    #[serde(default = "default_target")]
    pub target: f64,
    /// slack allowed between the mesh-optimal C₁ and the continuum C₁
    #[serde(default = "default_refinement")]
    pub refinement_tolerance: f64,
}

fn default_target() -> f64 {
    0.5
}

fn default_refinement() -> f64 {
    0.05
}

impl Default for FormSection {
    fn default() -> Self {
        Self {
            target: default_target(),
            refinement_tolerance: default_refinement(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    6
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { count: default_count() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    /// random sections for the Kato-inequality gap
    #[serde(default = "default_sections")]
    pub sections: usize,
    /// sections used for semigroup domination and the form limit
    #[serde(default = "default_semigroup_sections")]
    pub semigroup_sections: usize,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_form_times")]
    pub form_times: Vec<f64>,
    #[serde(default = "default_kato_tol")]
    pub kato_tolerance: f64,
    #[serde(default = "default_dom_tol")]
    pub domination_tolerance: f64,
}

fn default_sections() -> usize {
    100
}
fn default_semigroup_sections() -> usize {
    10
}
fn default_times() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}
fn default_form_times() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}
fn default_kato_tol() -> f64 {
    1e-12
}
fn default_dom_tol() -> f64 {
    1e-10
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            sections: default_sections(),
            semigroup_sections: default_semigroup_sections(),
            times: default_times(),
            form_times: default_form_times(),
            kato_tolerance: default_kato_tol(),
            domination_tolerance: default_dom_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSection {
    /// start point coordinates; the origin when absent
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    pub t: f64,
    pub h: f64,
    pub n_paths: usize,
    #[serde(default)]
    pub domain: Option<Domain>,
    pub estimator: Estimator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Estimator {
    /// `E∫|v(B_s)|ds` for the configured potential, compared with the
    /// quadrature value when no killing domain is set
    Kato,
    Heat { observable: Observable },
    /// line bundle over ℝ² with constant field in the symmetric gauge and a
    /// Gaussian initial section; `mesh_spacing` adds a Peierls-grid oracle on
    /// the killing box
    Covariant {
        field: f64,
        center: [f64; 2],
        width: f64,
        #[serde(default)]
        mesh_spacing: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    One,
    SquaredDistance,
    BallIndicator { radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default)]
    pub spatial_rel: Option<f64>,
    #[serde(default)]
    pub temporal_rel: Option<f64>,
}

impl Tolerances {
    pub fn settings(tol: Option<&Tolerances>) -> KatoSettings {
        let mut s = KatoSettings::default();
        if let Some(t) = tol {
            if let Some(r) = t.spatial_rel {
                s.spatial = Tolerance::relative(r);
            }
            if let Some(r) = t.temporal_rel {
                s.temporal = Tolerance::relative(r);
            }
        }
        s
    }
}

/// Optional expectations turned into contracts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    #[serde(default)]
    pub verdict: Option<Verdict>,
    #[serde(default)]
    pub lambda_min_at_least: Option<f64>,
}
