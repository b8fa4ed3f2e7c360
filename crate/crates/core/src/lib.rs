//! Executable synthetic Lorentzian geometry on finite samples.
//!
//! The crate is organised bottom-up:
//!
//! * [`causal`] holds finite causal structures `(X, ≪, ≤, τ)` and their axiom checks.
//! * [`metric`] holds base metric spaces Σ and the Alexandrov quadruple test.
//! * [`product`] builds the Lorentzian metric product Σ×ℝ and samples it.
//! * [`geodesy`] computes discrete τ-lengths, maximizers, lines and null chains.
//! * [`comparison`] realizes comparison triangles in the Minkowski plane and
//!   certifies timelike curvature bounded below by zero.
//! * [`boundary`] implements past sets, the S-relation and future boundary classes.
//! * [`split`] chains everything into the splitting pipeline and its report.
//!
//! Heavy sweeps run on rayon when the `parallel` feature (default) is on and fall
//! back to plain iterators otherwise. Results never depend on the thread count.

pub mod boundary;
pub mod causal;
pub mod comparison;
mod error;
mod eventset;
pub mod geodesy;
pub mod metric;
pub mod par;
pub mod product;
pub mod split;

pub use error::{Error, Result};
pub use eventset::EventSet;

pub use causal::{CausalStructure, EventId, RelationKind};
pub use metric::{MetricSpace, Point};
pub use product::{ProductSpace, Region};

/// Verdict carried by every report.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Status::Pass
    }
}
