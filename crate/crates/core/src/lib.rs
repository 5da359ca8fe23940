//! Classification and canonical forms of a pair of symmetric bilinear forms
//! `(g, ǧ)` in three dimensions, where `g` has signature `(+,−,−)`.

pub mod canonical;
pub mod classifier;
pub mod document;
pub mod error;
pub mod invariants;
pub mod matrix;
pub mod numeric;
pub mod scalar;
pub mod testkit;

pub use canonical::{canonicalize, CanonicalForm, CanonicalResult};
pub use classifier::{classify, ClassId};
pub use error::{Error, Result};
pub use invariants::MetricPair;
