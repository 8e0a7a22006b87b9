//! Riemannian g-natural metrics on tangent bundles: construction of the
//! bundle metric from a six-function sextet, energy and tension of the map
//! defined by a vector field V: (M, g) -> (TM, G), the full family of
//! harmonicity criteria, contact-metric specializations, and a
//! finite-difference oracle on TM that cross-validates the closed-form
//! connection.

pub mod bundle;
pub mod contact;
pub mod error;
pub mod expr;
pub mod harmonicity;
pub mod fd;
pub mod manifold;
pub mod scenario;
pub mod sextet;

pub use error::{GeometryError, Result};
