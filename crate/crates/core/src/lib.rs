//! Geometry of tangent bundles carrying `g`-natural metrics built from two
//! weight functions of the energy density, together with the almost complex
//! and contact structures they induce.

pub mod base;
pub mod dual;
pub mod error;
pub mod expr;
pub mod oracle;
pub mod sphere;
pub mod tbundle;
pub mod vecops;
pub mod weights;

pub use base::{ChartMetric, LocalGeometry, MetricSpec};
pub use error::{GeometryError, Result};
pub use expr::Expr;
pub use weights::{CompletionRule, DerivedCoefficients, Epsilon, FamilySpec, TDomain, WeightPair, WeightValues};
