use serde::{Deserialize, Serialize};

/// Where a reported number came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Quadrature,
    Eigensolve,
    MonteCarlo,
    ClosedForm,
}
