use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureKind {
    UniformTrapezoid,
}

/// Truncated line-integral settings: `∫_{-U}^{U}` sampled at `point_count` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub truncation_halfwidth: f64,
    pub point_count: usize,
    pub kind: QuadratureKind,
}

impl QuadratureSpec {
    pub const MIN_POINTS: usize = 64;

    pub fn new(truncation_halfwidth: f64, point_count: usize) -> Result<Self> {
        if !(truncation_halfwidth > 0.0 && truncation_halfwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "truncation half-width must be positive, got {truncation_halfwidth}"
            )));
        }
        if point_count < Self::MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least {} points, got {point_count}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            truncation_halfwidth,
            point_count,
            kind: QuadratureKind::UniformTrapezoid,
        })
    }

    /// U = 20 with 4000 nodes; the kernel integrands are below 1e-40 at |u| = 20.
    pub fn kernel_default() -> Self {
        Self {
            truncation_halfwidth: 20.0,
            point_count: 4000,
            kind: QuadratureKind::UniformTrapezoid,
        }
    }

    fn step(&self) -> f64 {
        2.0 * self.truncation_halfwidth / (self.point_count - 1) as f64
    }
}

/// Trapezoid approximation of `∫_{-U}^{U} f(u) du` on `point_count` equispaced nodes
/// including both endpoints.
pub fn trapezoid_line<F>(f: F, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let h = spec.step();
    let u0 = -spec.truncation_halfwidth;
    let last = spec.point_count - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..spec.point_count {
        // symmetric node placement keeps odd integrands cancelling pairwise
        let u = if k == last {
            spec.truncation_halfwidth
        } else {
            u0 + h * k as f64
        };
        let v = f(u);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { at: u });
        }
        let w = if k == 0 || k == last { 0.5 } else { 1.0 };
        acc += v * w;
    }
    Ok(acc * h)
}

/// Symmetric difference quotient `(f(x+h) - f(x-h)) / 2h`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `(1/(x-y)) (∂_y - ∂_x) f(x, y)` with a central difference in each slot.
pub fn mixed_operator<F: Fn(f64, f64) -> f64>(f: F, x: f64, y: f64, h: f64) -> f64 {
    let dy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
    let dx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
    (dy - dx) / (x - y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |u| Complex64::new(f(u), 0.0)
    }

    #[test]
    fn gaussian_integral() {
        let spec = QuadratureSpec::new(20.0, 2000).unwrap();
        let v = trapezoid_line(real(|u| (-u * u).exp()), &spec).unwrap();
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn constant_integrates_to_length() {
        let spec = QuadratureSpec::new(3.5, 101).unwrap();
        let v = trapezoid_line(real(|_| 1.0), &spec).unwrap();
        assert!((v.re - 7.0).abs() < 1e-13);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let spec = QuadratureSpec::new(20.0, 2000).unwrap();
        let v = trapezoid_line(real(|u| u * (-u * u).exp()), &spec).unwrap();
        assert!(v.re.abs() < 1e-14);
    }

    #[test]
    fn non_finite_sample_reports_location() {
        let spec = QuadratureSpec::new(1.0, 65).unwrap();
        let err = trapezoid_line(real(|u| if u == 1.0 { f64::NAN } else { 0.0 }), &spec);
        assert_eq!(err, Err(Error::NonFinite { at: 1.0 }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 100).is_err());
        assert!(QuadratureSpec::new(1.0, 63).is_err());
    }

    #[test]
    fn spectral_convergence_on_gaussian_decay() {
        let f = real(|u| (-u * u / 2.0).exp() * (1.3 * u).cos());
        let exact = (2.0 * std::f64::consts::PI).sqrt() * (-1.3f64 * 1.3 / 2.0).exp();
        let mut prev = f64::INFINITY;
        for n in [16usize, 32, 64] {
            let spec = QuadratureSpec {
                truncation_halfwidth: 12.0,
                point_count: n + 1,
                kind: QuadratureKind::UniformTrapezoid,
            };
            let err = (trapezoid_line(&f, &spec).unwrap().re - exact).abs();
            assert!(
                err * 4.0 <= prev || err < 1e-14,
                "n={n} err={err} prev={prev}"
            );
            prev = err;
        }
    }

    #[test]
    fn differences() {
        assert!((central_diff(|x| x * x, 3.0, 1e-4) - 6.0).abs() < 1e-7);
        assert_eq!(central_diff(|_| 2.5, 1.0, 1e-3), 0.0);
        assert!((central_diff(f64::exp, 0.0, 1e-5) - 1.0).abs() < 1e-9);
        // (1/(x-y))(∂_y - ∂_x)(x y) = (x - y)/(x - y) = 1
        assert!((mixed_operator(|x, y| x * y, 0.7, -0.2, 1e-4) - 1.0).abs() < 1e-9);
    }
}
