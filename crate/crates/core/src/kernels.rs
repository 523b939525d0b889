//! Limit kernels of the bulk (`𝕊`, `𝕋`) and the edge (`𝔸`, `𝔹`, `I^(α)`).
//!
//! `I^(α)(μ,ν)` is the line integral along `w = 1 − iu`,
//!
//! ```text
//! I^(α)(μ,ν) = 1/(4π^{3/2}) ∫ exp(w³/12 − (μ+ν)w/2 − (μ−ν)²/(4w)) w^{−α−1/2} du,
//! ```
//!
//! with `I^(0)(x,y) = Ai(x)Ai(y)`, `I^(1) = 𝔸` and `I^(2) = 𝔹`. Each application of
//! `(1/(x−y))(∂_y − ∂_x)` raises `α` by one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{trapezoid_line, QuadratureSpec};
use crate::special::{airy, AIRY_DOMAIN};

const MAX_ALPHA: f64 = 10.0;
const IMAG_TOLERANCE: f64 = 1e-10;
const AIRY_KERNEL_NEAR_DIAGONAL: f64 = 1e-5;
const B_KERNEL_NEAR_DIAGONAL: f64 = 1e-3;

/// Parameters of one `I^(α)` evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
    pub quad: QuadratureSpec,
}

impl KernelQuery {
    pub fn new(alpha: f64, mu: f64, nu: f64) -> Self {
        Self {
            alpha,
            mu,
            nu,
            quad: QuadratureSpec::kernel_default(),
        }
    }

    pub fn with_quadrature(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn evaluate(&self) -> Result<f64> {
        if !(self.alpha >= 0.0 && self.alpha <= MAX_ALPHA) {
            return Err(Error::Domain {
                what: "alpha",
                value: self.alpha,
            });
        }
        check_box(self.mu, self.nu)?;
        let (s, d2) = (self.mu + self.nu, (self.mu - self.nu).powi(2));
        let power = self.alpha + 0.5;
        let v = trapezoid_line(
            |u| {
                let w = Complex64::new(1.0, -u);
                let expo = w * w * w / 12.0 - w * (0.5 * s) - d2 / (4.0 * w) - w.ln() * power;
                expo.exp()
            },
            &self.quad,
        )?;
        let v = v / (4.0 * PI.powf(1.5));
        if v.im.abs() > IMAG_TOLERANCE {
            return Err(Error::ImaginaryResidue {
                residue: v.im.abs(),
                tolerance: IMAG_TOLERANCE,
            });
        }
        Ok(v.re)
    }
}

fn check_box(mu: f64, nu: f64) -> Result<()> {
    for v in [mu, nu] {
        if !(v.is_finite() && v.abs() <= AIRY_DOMAIN) {
            return Err(Error::Domain {
                what: "kernel argument",
                value: v,
            });
        }
    }
    Ok(())
}

/// `𝕊(μ,ν) = sin(π(μ−ν)) / (π(μ−ν))`.
pub fn sine_kernel(mu: f64, nu: f64) -> f64 {
    let x = PI * (mu - nu);
    if x.abs() < PI * 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `𝕋(μ,ν) = 2 sin(πδ)/(πδ³) − 2 cos(πδ)/δ²` with `δ = μ − ν`.
pub fn t_kernel(mu: f64, nu: f64) -> f64 {
    let d = mu - nu;
    if d.abs() < 1e-3 {
        let p2 = PI * PI;
        let d2 = d * d;
        2.0 * p2 / 3.0 - p2 * p2 * d2 / 15.0 + p2 * p2 * p2 * d2 * d2 / 420.0
    } else {
        let x = PI * d;
        2.0 * x.sin() / (PI * d * d * d) - 2.0 * x.cos() / (d * d)
    }
}

/// Airy kernel `𝔸(μ,ν)`; on the diagonal `Ai'(μ)² − μ Ai(μ)²`.
pub fn airy_kernel(mu: f64, nu: f64) -> Result<f64> {
    check_box(mu, nu)?;
    let d = mu - nu;
    if d.abs() < AIRY_KERNEL_NEAR_DIAGONAL {
        let m = 0.5 * (mu + nu);
        let p = airy(m)?;
        return Ok(p.ai_prime * p.ai_prime - m * p.ai * p.ai);
    }
    let (a, b) = (airy(mu)?, airy(nu)?);
    Ok((a.ai * b.ai_prime - a.ai_prime * b.ai) / d)
}

/// Edge kernel `𝔹(μ,ν)` of the real-symmetric case. Close to the diagonal the
/// explicit formula cancels badly, so it falls back to `I^(2)`.
pub fn b_kernel(mu: f64, nu: f64) -> Result<f64> {
    check_box(mu, nu)?;
    let d = mu - nu;
    if d.abs() < B_KERNEL_NEAR_DIAGONAL {
        return i_alpha(2.0, mu, nu);
    }
    let (a, b) = (airy(mu)?, airy(nu)?);
    let first = ((mu + nu) * a.ai * b.ai - 2.0 * a.ai_prime * b.ai_prime) / (d * d);
    let second = (2.0 * a.ai * b.ai_prime - 2.0 * a.ai_prime * b.ai) / (d * d * d);
    Ok(first + second)
}

/// `I^(α)(μ,ν)` with the default truncation `U = 20` and 4000 nodes.
pub fn i_alpha(alpha: f64, mu: f64, nu: f64) -> Result<f64> {
    KernelQuery::new(alpha, mu, nu).evaluate()
}

/// `Ai(x)·Ai(y)` from its contour representation along `1 − iu`; the `α = 0`
/// member of the `I^(α)` family.
pub fn airy_product(x: f64, y: f64) -> Result<f64> {
    i_alpha(0.0, x, y)
}

/// One application of `(1/(μ−ν))(∂_ν − ∂_μ)` to `f` by central differences.
pub fn operator_step<F>(f: F, mu: f64, nu: f64, h: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {h} outside [1e-6, 1e-2]"
        )));
    }
    if (mu - nu).abs() < 10.0 * h {
        return Err(Error::StencilTooNarrow { mu, nu, h });
    }
    let dnu = (f(mu, nu + h)? - f(mu, nu - h)?) / (2.0 * h);
    let dmu = (f(mu + h, nu)? - f(mu - h, nu)?) / (2.0 * h);
    Ok((dnu - dmu) / (mu - nu))
}

/// Both sides of `I^(α)(x,x) = ∫_x^∞ I^(α−1)(y,y) dy`.
///
/// The right side is cut off at `x + 40` and integrated with the trapezoid rule
/// in a tanh-sinh variable, which clusters nodes at the endpoints and converges
/// geometrically for the smooth, fast-decaying integrand.
pub fn diag_recursion_check(alpha: f64, x: f64) -> Result<(f64, f64)> {
    if alpha < 1.0 {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
        });
    }
    if !(-10.0..=10.0).contains(&x) {
        return Err(Error::Domain {
            what: "diagonal point",
            value: x,
        });
    }
    let lhs = i_alpha(alpha, x, x)?;
    let (a, b) = (x, (x + 40.0).min(AIRY_DOMAIN));
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let step = 1.0 / 64.0;
    let reach = 4.0;
    let count = (2.0 * reach / step) as i64;
    let mut rhs = 0.0;
    for k in 0..=count {
        let tau = -reach + step * k as f64;
        let s = 0.5 * PI * tau.sinh();
        let weight = half * 0.5 * PI * tau.cosh() / (s.cosh() * s.cosh());
        let y = mid + half * s.tanh();
        if weight < 1e-300 || y <= a || y >= b {
            continue;
        }
        rhs += weight * i_alpha(alpha - 1.0, y, y)?;
    }
    Ok((lhs, rhs * step))
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-digit quadrature of the defining integral: (α, μ, ν, I^(α)(μ,ν))
    const I_REFERENCE: [(f64, f64, f64, f64); 15] = [
        (1.0, 0.0, 0.0, 0.066987483779663974144),
        (2.0, 0.0, 0.0, 0.030629383078988447195),
        (1.0, 0.3, -0.2, 0.059219109393083241068),
        (2.0, 0.5, -0.5, 0.027623446173823386525),
        (1.0, 0.0, 1.0, 0.021485503837037954846),
        (2.0, 0.0, 1.0, 0.0086227192002450998946),
        (2.0, -1.0, 2.0, 0.0040382219388267577317),
        (3.0, 0.4, 0.1, 0.0066864225847983851355),
        (0.5, 0.2, -0.6, 0.11893559017619334033),
        (1.0, 1.0, 1.0, 0.0070238701595382203773),
        (2.0, 1.0, 1.0, 0.0024945671879930542553),
        (2.0, -1.0, -1.0, 0.19309966532459141776),
        (2.0, 2.0, 2.0, 0.00011244630650173347969),
        (1.0, -1.0, 1.0, 0.041929248279154096479),
        (2.0, -1.0, 1.0, 0.02015611001020783777),
    ];

    #[test]
    fn i_alpha_matches_reference() {
        for &(a, m, n, want) in &I_REFERENCE {
            let got = i_alpha(a, m, n).unwrap();
            assert!(
                (got - want).abs() < 1e-13,
                "I^{a}({m},{n}) = {got} vs {want}"
            );
        }
    }

    #[test]
    fn sine_kernel_values() {
        assert_eq!(sine_kernel(0.4, 0.4), 1.0);
        assert!((sine_kernel(1.5, 1.0) - 2.0 / PI).abs() < 1e-15);
        assert!(sine_kernel(2.0, 1.0).abs() < 1e-15);
        assert!((sine_kernel(1e-7, 0.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn t_kernel_values() {
        assert!((t_kernel(0.3, 0.3) - 2.0 * PI * PI / 3.0).abs() < 1e-14);
        assert!((t_kernel(1.0, 0.0) - 2.0).abs() < 1e-13);
        // either side of the series switch, against 30-digit values
        assert!((t_kernel(0.999e-3, 0.0) - 6.579729786437168223).abs() < 1e-13);
        assert!((t_kernel(1.001e-3, 0.0) - 6.579729760461428926).abs() < 1e-8);
    }

    #[test]
    fn t_kernel_is_operator_image_of_sine_kernel() {
        let v = operator_step(|x, y| Ok(sine_kernel(x, y)), 0.4, -0.3, 1e-4).unwrap();
        assert!((v - t_kernel(0.4, -0.3)).abs() < 1e-6);
    }

    #[test]
    fn airy_kernel_values() {
        let d = airy_kernel(0.0, 0.0).unwrap();
        assert!((d - 0.0669875).abs() < 1e-7);
        assert!((d - 0.258819403792807f64.powi(2)).abs() < 1e-13);
        assert_eq!(
            airy_kernel(0.2, 1.7).unwrap(),
            airy_kernel(1.7, 0.2).unwrap()
        );
        assert!((airy_kernel(0.0, 1.0).unwrap() - i_alpha(1.0, 0.0, 1.0).unwrap()).abs() < 1e-10);
        assert!((airy_kernel(0.3, -0.2).unwrap() - i_alpha(1.0, 0.3, -0.2).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn b_kernel_values() {
        let diag = b_kernel(0.0, 0.0).unwrap();
        assert!((diag - i_alpha(2.0, 0.0, 0.0).unwrap()).abs() < 1e-8);
        assert_eq!(b_kernel(1.0, -1.0).unwrap(), b_kernel(-1.0, 1.0).unwrap());
        assert!((b_kernel(0.5, -0.5).unwrap() - i_alpha(2.0, 0.5, -0.5).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn i_alpha_zero_is_airy_square() {
        let x = 0.7;
        let ai = airy(x).unwrap().ai;
        assert!((i_alpha(0.0, x, x).unwrap() - ai * ai).abs() < 1e-10);
        assert!((i_alpha(1.0, 0.0, 0.0).unwrap() - 0.0669875).abs() < 1e-7);
    }

    #[test]
    fn airy_product_values() {
        assert!((airy_product(0.0, 0.0).unwrap() - 0.126045).abs() < 1e-6);
        assert_eq!(
            airy_product(1.3, -0.4).unwrap(),
            airy_product(-0.4, 1.3).unwrap()
        );
        let want = airy(2.0).unwrap().ai * airy(-1.0).unwrap().ai;
        assert!((airy_product(2.0, -1.0).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn operator_chain() {
        let v = operator_step(airy_product, 0.8, -0.4, 1e-4).unwrap();
        assert!((v - i_alpha(1.0, 0.8, -0.4).unwrap()).abs() < 1e-6);
        assert_eq!(operator_step(|_, _| Ok(3.0), 0.5, -0.5, 1e-4).unwrap(), 0.0);
        assert!(matches!(
            operator_step(airy_product, 0.1, 0.1005, 1e-4),
            Err(Error::StencilTooNarrow { .. })
        ));
        assert!(operator_step(airy_product, 0.1, 1.0, 0.1).is_err());
    }

    #[test]
    fn diagonal_recursion() {
        let (l, r) = diag_recursion_check(1.0, 0.0).unwrap();
        assert!(
            (l - 0.0669875).abs() < 1e-7 && (l - r).abs() <= 1e-8,
            "{l} {r}"
        );
        let (l, r) = diag_recursion_check(1.0, 8.0).unwrap();
        assert!(l.abs() <= 1e-12 && r.abs() <= 1e-12);
        let (l, r) = diag_recursion_check(2.0, -2.0).unwrap();
        assert!((l - r).abs() <= 1e-7, "{l} {r}");
    }

    #[test]
    fn kernels_are_symmetric() {
        let grid: Vec<f64> = (0..7).map(|k| -3.0 + k as f64).collect();
        for &m in &grid {
            for &n in &grid {
                let pairs = [
                    (sine_kernel(m, n), sine_kernel(n, m)),
                    (t_kernel(m, n), t_kernel(n, m)),
                    (airy_kernel(m, n).unwrap(), airy_kernel(n, m).unwrap()),
                    (b_kernel(m, n).unwrap(), b_kernel(n, m).unwrap()),
                    (i_alpha(1.5, m, n).unwrap(), i_alpha(1.5, n, m).unwrap()),
                ];
                for (a, b) in pairs {
                    assert!((a - b).abs() <= 1e-10, "({m},{n}) {a} {b}");
                }
            }
        }
    }

    #[test]
    fn diagonal_continuity() {
        for x in [-2.0, 0.0, 1.5] {
            let a_near = airy_kernel(x + 1e-4, x).unwrap();
            let a_diag = airy_kernel(x + 0.5e-4, x + 0.5e-4).unwrap();
            assert!((a_near - a_diag).abs() < 1e-6);
            let b_near = b_kernel(x + 1e-4, x).unwrap();
            let b_diag = b_kernel(x + 0.5e-4, x + 0.5e-4).unwrap();
            assert!((b_near - b_diag).abs() < 1e-6);
        }
    }

    #[test]
    fn diagonal_positivity_and_derivative() {
        for alpha in [0.0, 1.0, 2.0, 3.0] {
            for k in 0..=24 {
                let x = -6.0 + 0.5 * k as f64;
                assert!(i_alpha(alpha, x, x).unwrap() > 0.0, "α={alpha} x={x}");
            }
        }
        let h = 1e-4;
        for alpha in [1.0, 2.0] {
            for x in [-3.0, -0.5, 0.0, 2.0] {
                let d = (i_alpha(alpha, x + h, x + h).unwrap()
                    - i_alpha(alpha, x - h, x - h).unwrap())
                    / (2.0 * h);
                assert!((d + i_alpha(alpha - 1.0, x, x).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn quadrature_is_converged() {
        let fine = QuadratureSpec::new(28.0, 8000).unwrap();
        for &(a, m, n, _) in I_REFERENCE.iter().take(8) {
            let coarse = i_alpha(a, m, n).unwrap();
            let refined = KernelQuery::new(a, m, n)
                .with_quadrature(fine)
                .evaluate()
                .unwrap();
            assert!((coarse - refined).abs() < 1e-11);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(i_alpha(11.0, 0.0, 0.0).is_err());
        assert!(i_alpha(-0.5, 0.0, 0.0).is_err());
        assert!(airy_kernel(31.0, 0.0).is_err());
        assert!(b_kernel(0.0, -40.0).is_err());
        assert!(diag_recursion_check(0.5, 0.0).is_err());
    }
}
