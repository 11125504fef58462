//! Built-in spaces, potentials, meshes and run configurations.
//!
//! Identifiers are stable; `kato list` prints them.

use std::f64::consts::PI;

use kato_core::geometry::ModelSpace;
use kato_core::kato::PotentialSpec;
use kato_core::operators::generators::{dirichlet_path, flux_cycle, grid_2d, interval, interval_vertex, random_bundle_mesh, GridSpec, RandomMeshSpec};
use kato_core::operators::BundleMesh;
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Space,
    Potential,
    Mesh,
    Config,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Entry {
    pub kind: Kind,
    pub id: &'static str,
    pub description: &'static str,
}

const fn entry(kind: Kind, id: &'static str, description: &'static str) -> Entry {
    Entry { kind, id, description }
}

pub const CATALOG: &[Entry] = &[
    entry(Kind::Space, "euclidean_m1", "Euclidean line"),
    entry(Kind::Space, "euclidean_m2", "Euclidean plane"),
    entry(Kind::Space, "euclidean_m3", "Euclidean 3-space"),
    entry(Kind::Space, "hyperbolic_m2", "hyperbolic plane, curvature -1"),
    entry(Kind::Space, "hyperbolic_m3", "hyperbolic 3-space, curvature -1"),
    entry(Kind::Potential, "coulomb_r3", "1/|y| on Euclidean 3-space"),
    entry(Kind::Potential, "attractive_coulomb_r3", "-1/|y| on Euclidean 3-space"),
    entry(Kind::Potential, "inverse_square_r3", "1/|y|^2 on Euclidean 3-space"),
    entry(Kind::Potential, "constant_r3", "constant 1 on Euclidean 3-space"),
    entry(Kind::Potential, "bump_r3", "smooth bump of radius 1 on Euclidean 3-space"),
    entry(Kind::Potential, "constant_h3", "constant 1 on hyperbolic 3-space"),
    entry(Kind::Mesh, "flux_cycle_3", "3-cycle line bundle with holonomy e^{i pi/2}"),
    entry(Kind::Mesh, "random_bundle_20", "20-vertex random rank-2 bundle mesh, 2 Dirichlet vertices"),
    entry(Kind::Mesh, "dirichlet_path_16", "path with 16 interior vertices and Dirichlet ends"),
    entry(Kind::Mesh, "coulomb_line", "[-8, 8] with step 1/64, Dirichlet at the ends and at 0"),
    entry(Kind::Mesh, "landau_grid", "[-3, 3]^2 grid, spacing 0.1, field 4, symmetric-gauge Peierls links"),
    entry(Kind::Config, "coulomb_r3", "kato-test of the Coulomb potential (expects member)"),
    entry(Kind::Config, "inverse_square_r3", "kato-test of 1/|y|^2 (expects nonmember)"),
    entry(Kind::Config, "bump_r3", "kato-test of the bump with the L^2 rule (expects member)"),
    entry(Kind::Config, "constant_h3", "kato-test of a constant on hyperbolic 3-space (expects member)"),
    entry(Kind::Config, "coulomb_form_bounds", "form-bounds of 1/|y| with the mesh chain on coulomb_line"),
    entry(Kind::Config, "flux_cycle_3", "spectrum of the 3-cycle flux mesh"),
    entry(Kind::Config, "random_bundle_20", "check-inequalities on random_bundle_20"),
    entry(Kind::Config, "fk_coulomb", "fk-mc Coulomb Kato integral against quadrature"),
    entry(Kind::Config, "fk_survival", "fk-mc survival in the unit ball of Euclidean 3-space"),
    entry(Kind::Config, "fk_landau", "fk-mc covariant semigroup against the landau_grid exponential"),
];

pub fn space(id: &str) -> Option<ModelSpace> {
    match id {
        "euclidean_m1" => ModelSpace::euclidean(1).ok(),
        "euclidean_m2" => ModelSpace::euclidean(2).ok(),
        "euclidean_m3" => ModelSpace::euclidean(3).ok(),
        "hyperbolic_m2" => ModelSpace::hyperbolic(2).ok(),
        "hyperbolic_m3" => ModelSpace::hyperbolic(3).ok(),
        _ => None,
    }
}

/// A bundled potential with the space it lives on.
pub fn potential(id: &str) -> Option<(ModelSpace, PotentialSpec)> {
    let radial = |expr: &str, params: &[(&str, f64)], sing: &[f64]| PotentialSpec::Radial {
        expr: expr.into(),
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        singularities: sing.to_vec(),
    };
    let r3 = space("euclidean_m3")?;
    Some(match id {
        "coulomb_r3" => (r3, radial("coulomb", &[("c", 1.0)], &[0.0])),
        "attractive_coulomb_r3" => (r3, radial("coulomb", &[("c", -1.0)], &[0.0])),
        "inverse_square_r3" => (r3, radial("inverse_square", &[("c", 1.0)], &[0.0])),
        "constant_r3" => (r3, PotentialSpec::Constant(1.0)),
        "bump_r3" => (r3, radial("bump", &[("c", 1.0), ("radius", 1.0)], &[])),
        "constant_h3" => (space("hyperbolic_m3")?, PotentialSpec::Constant(1.0)),
        _ => return None,
    })
}

pub fn mesh(id: &str) -> Option<BundleMesh> {
    match id {
        "flux_cycle_3" => flux_cycle(3, PI / 2.0).ok(),
        "random_bundle_20" => random_bundle_mesh(&RandomMeshSpec {
            vertices: 20,
            fiber_dim: 2,
            extra_edge_probability: 0.2,
            dirichlet: 2,
            trivial: false,
            seed: 20,
        })
        .ok(),
        "dirichlet_path_16" => dirichlet_path(16).ok(),
        "coulomb_line" => {
            let m = interval(-8.0, 8.0, 1.0 / 64.0).ok()?;
            let c = interval_vertex(&m, 0.0)?;
            m.with_dirichlet(&[c]).ok()
        }
        "landau_grid" => grid_2d(&GridSpec {
            x: [-3.0, 3.0],
            y: [-3.0, 3.0],
            spacing: 0.1,
            field: 4.0,
        })
        .ok(),
        _ => None,
    }
}

pub fn config_json(id: &str) -> Option<&'static str> {
    Some(match id {
        "coulomb_r3" => {
            r#"{
  "command": "kato-test",
  "space": "euclidean_m3",
  "potential": "coulomb_r3",
  "kato": {"t_grid": [1.0, 0.1, 0.01, 0.001], "r_grid": [2.0, 8.0, 100.0], "lp_exponent": 2.0, "form_target": 0.5},
  "expect": {"verdict": "member"}
}"#
        }
        "inverse_square_r3" => {
            r#"{
  "command": "kato-test",
  "space": "euclidean_m3",
  "potential": "inverse_square_r3",
  "expect": {"verdict": "nonmember"}
}"#
        }
        "bump_r3" => {
            r#"{
  "command": "kato-test",
  "space": "euclidean_m3",
  "potential": "bump_r3",
  "kato": {"t_grid": [1.0, 0.1, 0.01, 0.001], "lp_exponent": 2.0},
  "expect": {"verdict": "member"}
}"#
        }
        "constant_h3" => {
            r#"{
  "command": "kato-test",
  "space": "hyperbolic_m3",
  "potential": "constant_h3",
  "expect": {"verdict": "member"}
}"#
        }
        "coulomb_form_bounds" => {
            r#"{
  "command": "form-bounds",
  "space": "euclidean_m3",
  "potential": "attractive_coulomb_r3",
  "mesh": {"bundled": "coulomb_line"},
  "form": {"target": 0.5, "refinement_tolerance": 0.05}
}"#
        }
        "flux_cycle_3" => {
            r#"{
  "command": "spectrum",
  "mesh": {"bundled": "flux_cycle_3"},
  "spectrum": {"count": 3}
}"#
        }
        "random_bundle_20" => {
            r#"{
  "command": "check-inequalities",
  "mesh": {"bundled": "random_bundle_20"},
  "checks": {"sections": 100, "semigroup_sections": 10}
}"#
        }
        "fk_coulomb" => {
            r#"{
  "command": "fk-mc",
  "space": "euclidean_m3",
  "potential": "coulomb_r3",
  "path": {"t": 0.01, "h": 0.0001, "n_paths": 20000, "estimator": "kato"}
}"#
        }
        "fk_survival" => {
            r#"{
  "command": "fk-mc",
  "space": "euclidean_m3",
  "path": {"t": 0.1, "h": 0.0001, "n_paths": 20000, "domain": {"ball": {"radius": 1.0}},
           "estimator": {"heat": {"observable": "one"}}}
}"#
        }
        "fk_landau" => {
            r#"{
  "command": "fk-mc",
  "space": "euclidean_m2",
  "path": {"start": [0.5, 0.3], "t": 0.5, "h": 0.001, "n_paths": 20000,
           "domain": {"box": {"lower": [-3.0, -3.0], "upper": [3.0, 3.0]}},
           "estimator": {"covariant": {"field": 4.0, "center": [-0.5, 0.0], "width": 0.5, "mesh_spacing": 0.1}}}
}"#
        }
        _ => return None,
    })
}

pub fn config(id: &str) -> Option<RunConfig> {
    config_json(id).map(|s| serde_json::from_str(s).expect("bundled configs parse"))
}

pub fn config_ids() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().filter(|e| e.kind == Kind::Config).map(|e| e.id)
}
