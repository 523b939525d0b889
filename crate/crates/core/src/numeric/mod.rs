//! Scaled arithmetic and the quadrature primitives shared by the rest of the crate.

mod quad;
mod scaled;

pub use quad::{central_diff, mixed_operator, trapezoid_line, QuadratureKind, QuadratureSpec};
pub use scaled::ScaledReal;

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}
