//! Exact discrete minimization and analysis of the fractional s-perimeter in
//! a vertical cylinder with slab-complement exterior data.
//!
//! The tool discretizes the cylinder into cubic cells, tabulates the kernel
//! `|x - y|^{-(n+s)}` as pairwise cell weights with analytic far-field tails,
//! minimizes the resulting submodular binary energy exactly by s-t min-cut,
//! and provides nonlocal-mean-curvature evaluators and experiment drivers
//! (slab-width sweeps, critical-width bisection, protrusion-depth fits).

pub mod geometry;
pub mod kernel;
pub mod quad;
pub mod oracle;
pub mod scalar;

pub use scalar::Scalar;

/// Production scalar type; the documented tolerances assume it.
pub type Real = f64;

pub type Problem = geometry::ProblemSpec<Real>;
pub type Field = geometry::LabelField<Real>;
pub type Shape = geometry::ShapeExpr<Real>;
pub type Kernel = kernel::KernelTable<Real>;
