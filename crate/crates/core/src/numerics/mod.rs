//! Scalar root finding, quadrature, ODE integrators and small dense linear algebra.

pub mod linalg;
pub mod ode;
pub mod quad;
pub mod roots;
