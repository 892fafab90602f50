//! Numerical core for generalised Seiberg–Witten / vortex equations on flat
//! Kähler tori.
//!
//! The crate is split along the mathematical pipeline:
//!
//! * [`hkalg`]: closed-form hyperKähler linear algebra on the flat target ℍⁿ
//!   (complex structures, Kähler forms, Killing fields, moment maps and the
//!   structural identities they satisfy).
//! * [`torusgeom`]: spectral differential geometry on T² and T⁴: Laplacian,
//!   Dolbeault operators twisted by a constant-curvature line bundle,
//!   curvature, Λ-contraction, degree, quadrature, and the field file formats.
//! * [`kwsolver`]: damped Newton–Krylov solver for the Kazdan–Warner equation
//!   `Δf + B e^{2f} = w` with existence certification.
//! * [`monopole`]: configurations, residuals of the three equation systems,
//!   complexified gauge action, the Hitchin–Kobayashi pipeline, the projection
//!   to classical solutions, the lift back, and divisor extraction.
//! * [`suite`]: the randomized invariant suite driven by the CLI.

pub mod error;
pub mod hkalg;
pub mod kwsolver;
pub mod monopole;
pub mod suite;
pub mod torusgeom;

pub use error::{Error, Result};
pub use hkalg::{ComplexStructureLabel, MomentValue, Quaternion, TargetPoint};
pub use kwsolver::{Certificate, KwOptions, KwProblem, KwSolution};
pub use monopole::{Configuration, Divisor, ResidualReport, Threshold};
pub use torusgeom::{Bundle, Connection, FieldGrid, Rank, TorusGrid};

/// Version tag of the sign/normalisation conventions, embedded in reports.
pub const CONVENTIONS_VERSION: &str = "gsw-conventions-1";
