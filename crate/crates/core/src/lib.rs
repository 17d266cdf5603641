//! Numerical toolkit for pseudo horizontally weakly conformal (PHWC) maps from
//! a Riemannian chart `(R^m, g)` into a Hermitian chart `(C^n, h)`.
//!
//! * [`jet`]: expression trees and second-order forward-mode differentiation.
//! * [`geometry`]: domain and target metrics, Christoffel symbols, the
//!   Kaehler test and the Laplace-Beltrami operator.
//! * [`maps`]: PHWC residuals (three equivalent forms), horizontal weak
//!   conformality, tension field, pluriharmonicity and composition.
//! * [`fstruct`]: the f-structure associated to a PHWC map, its integrability,
//!   parallelism and 2-form conditions, and the harmonicity implication suite.
//! * [`flow`]: tension-field gradient flow on flat tori.
//! * [`families`]: seeded random generators for the property suites.

pub mod error;
pub mod families;
pub mod flow;
pub mod fstruct;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod maps;

pub use error::{Error, Result};
pub use num_complex::Complex64;
