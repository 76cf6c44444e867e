//! Removal-based feature attributions and their robustness certificates.
//!
//! An attribution here is the composition of two choices:
//!
//! * a **removal** rule ([`removal`]) that turns a model `f` and an input `x`
//!   into predictions `f(x_S)` for every feature subset `S`, by holding the
//!   removed features at a baseline or averaging them over a marginal or
//!   conditional distribution, and
//! * a **summary** operator ([`summary`]) that maps the `2^d` subset
//!   predictions linearly onto `d` attribution scores (leave-one-out,
//!   Shapley, Banzhaf, RISE, LIME, and generic semivalues or random-order
//!   values).
//!
//! [`bounds`] turns model and data constants into certificates on how far
//! attributions can move under input or model perturbations, and
//! [`experiments`] reproduces the synthetic studies that check them.
//!
//! ```
//! use removal_attrib::models::{GeneralizedLinearModel, Link};
//! use removal_attrib::removal::{evaluate_all_subsets, RemovalStrategy};
//! use removal_attrib::summary::{attribute, build_operator, SummaryKind};
//! use removal_attrib::numerics::Rng;
//!
//! let model = GeneralizedLinearModel::new(vec![2.0, 0.0, -1.0], 0.0, Link::Identity);
//! let strategy = RemovalStrategy::baseline(vec![0.0; 3]);
//! let v = evaluate_all_subsets(&model, &[1.0, 1.0, 1.0], &strategy, &Rng::new(0, 0), 1).unwrap();
//! let shapley = build_operator(&SummaryKind::Shapley, 3).unwrap();
//! let phi = attribute(&shapley, &v).unwrap();
//! assert!((phi[0] - 2.0).abs() < 1e-12 && phi[1].abs() < 1e-12 && (phi[2] + 1.0).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod data;
pub mod error;
pub mod experiments;
pub mod models;
pub mod numerics;
pub mod removal;
pub mod summary;

pub use error::{Error, Result};

// The guide under book/ is compiled as doc-tests so its snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/removal.md")]
    struct Removal;
    #[doc = include_str!("../../../book/src/summary.md")]
    struct Summary;
    #[doc = include_str!("../../../book/src/lime.md")]
    struct Lime;
    #[doc = include_str!("../../../book/src/certificates.md")]
    struct Certificates;
    #[doc = include_str!("../../../book/src/sampling.md")]
    struct Sampling;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
