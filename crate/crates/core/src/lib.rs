//! Numerical toolkit for Hilbert bundles of bounded geometry over discretized
//! flat model manifolds.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs: grids, sampled operator fields with their de Rham
//! derivatives, bounded partitions of unity, stabilization projections, image
//! bundles of projection-valued fields and the round trips between bundle
//! morphisms and module morphisms. Each construction comes with a check that
//! measures the relevant analytic bound and returns a [`CheckReport`].
//!
//! IO, configuration and the scenario runner live in the `hilbund` crate.
//!
//! ```
//! use hilbund_core::imagebundle::{image_bundle, select_radius, ProjectionField};
//! use hilbund_core::partition::{ball_cover, build_partition};
//! use hilbund_core::ManifoldModel;
//!
//! let model = ManifoldModel::torus(&[core::f64::consts::TAU], &[256])?;
//! let field = ProjectionField::spinning_line(&model, 1)?;
//! let r = select_radius(&model, &field, 1.0);
//! let part = build_partition(&model, &ball_cover(&model, r / 2.0)?, r / 2.0)?;
//! let bundle = image_bundle(&model, &field, r, &part, None)?;
//! assert!(bundle.report.passed());
//! # Ok::<(), hilbund_core::Error>(())
//! ```

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod equivalence;
pub mod error;
pub mod field;
pub mod fourier;
pub mod imagebundle;
pub mod invsqrt;
pub mod linalg;
pub mod manifold;
pub mod math;
pub mod opspace;
pub mod partition;
pub mod report;
pub mod stabilize;
pub mod stdmodule;

pub use error::{Error, Result};
pub use field::{C1Field, CotangentField, OperatorField};
pub use linalg::{CMatrix, C64};
pub use manifold::{GridPoint, ManifoldModel, ModelKind};
pub use report::{Check, CheckReport};
