//! Hermite polynomials in scaled form, the mean characteristic polynomial, and the
//! finite-N GUE kernel.

use std::f64::consts::PI;

use crate::numeric::ScaledReal;

const RESCALE_LIMIT: f64 = 1e150;
/// Exact power of two used for renormalization: 2^-500.
const RESCALE_FACTOR: f64 = 3.054936363499605e-151;
const RESCALE_LOG: f64 = 500.0 * std::f64::consts::LN_2;

/// Physicists' Hermite polynomial `H_n(x)` by upward recurrence, renormalized by
/// exact powers of two whenever the iterates grow large.
pub fn hermite_phys(n: u32, x: f64) -> ScaledReal {
    if n == 0 {
        return ScaledReal::ONE;
    }
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    let mut shifts = 0i64;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * f64::from(k) * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_LIMIT {
            cur *= RESCALE_FACTOR;
            prev *= RESCALE_FACTOR;
            shifts += 1;
        }
    }
    ScaledReal::from_real(cur).scale_exp(shifts as f64 * RESCALE_LOG)
}

/// `g_N(λ) = E det(X_N − λ) = (−1)^N 2^{−N/2} H_N(λ/√2)`, shared by both ensembles.
pub fn char_poly_mean(n: u32, lambda: f64) -> ScaledReal {
    let h = hermite_phys(n, lambda / std::f64::consts::SQRT_2);
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    (h * sign).scale_exp(-0.5 * f64::from(n) * std::f64::consts::LN_2)
}

/// Normalized probabilists' Hermite values `He_k(x)/√(k!)` for `k < n`, each as
/// `(mantissa, log-scale)`.
fn normalized_hermite(n: u32, x: f64) -> Vec<ScaledReal> {
    let mut out = Vec::with_capacity(n as usize);
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut log_scale = 0.0;
    for k in 0..n {
        out.push(ScaledReal::from_real(cur).scale_exp(log_scale));
        let kf = f64::from(k);
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_LIMIT {
            cur *= RESCALE_FACTOR;
            prev *= RESCALE_FACTOR;
            log_scale += RESCALE_LOG;
        }
    }
    out
}

/// `K_N(x, y) = e^{−(x²+y²)/4} Σ_{k=1}^{N} p_{k−1}(x) p_{k−1}(y) / (√(2π) (k−1)!)` with
/// monic Hermite `p_k` for the weight `e^{−x²/2}`.
pub fn gue_kernel(n: u32, x: f64, y: f64) -> ScaledReal {
    let px = normalized_hermite(n, x);
    let py = normalized_hermite(n, y);
    let sum = px
        .iter()
        .zip(&py)
        .fold(ScaledReal::ZERO, |acc, (a, b)| acc + *a * *b);
    sum.scale_exp(-(x * x + y * y) / 4.0 - 0.5 * (2.0 * PI).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ln_factorial;

    fn close(a: ScaledReal, b: f64, tol: f64) -> bool {
        let v = a.to_real_checked().unwrap();
        (v - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn low_order_hermite() {
        for x in [-1.5, 0.0, 0.3, 2.0] {
            assert!(close(hermite_phys(1, x), 2.0 * x, 1e-15));
        }
        assert!(close(hermite_phys(3, 1.0), -4.0, 1e-15));
        assert!(close(hermite_phys(4, 0.0), 12.0, 1e-15));
        assert_eq!(hermite_phys(0, 5.0), ScaledReal::ONE);
        assert!(hermite_phys(5, 0.0).is_zero());
    }

    #[test]
    fn recurrence_residual_and_explicit_form() {
        // H_6(x) = 64x^6 − 480x^4 + 720x^2 − 120
        for x in [-2.2f64, -0.4, 0.9, 3.1] {
            let want = 64.0 * x.powi(6) - 480.0 * x.powi(4) + 720.0 * x * x - 120.0;
            assert!(close(hermite_phys(6, x), want, 1e-13));
        }
        let x = 1.7;
        for k in 1..60u32 {
            let hp = hermite_phys(k + 1, x);
            let rhs =
                hermite_phys(k, x) * (2.0 * x) - hermite_phys(k - 1, x) * (2.0 * f64::from(k));
            let scale = hp.abs().log_mag().max(rhs.abs().log_mag());
            let resid = (hp - rhs).abs();
            assert!(
                resid.is_zero() || resid.log_mag() - scale < (1e-10f64).ln(),
                "k={k}"
            );
        }
    }

    #[test]
    fn large_degree_stays_finite() {
        let n = 1_000_000;
        let x = (2.0 * f64::from(n)).sqrt();
        let h = hermite_phys(n, x);
        assert_eq!(h.sign(), 1);
        // |H_N| ≈ √(N!)·2^{N/2}·e^{N}·N^{-1/12}·(const) at the turning point
        let rough =
            0.5 * ln_factorial(u64::from(n)) + 0.5 * f64::from(n) * 2f64.ln() + f64::from(n);
        assert!(
            (h.log_mag() - rough).abs() < 10.0,
            "{} vs {rough}",
            h.log_mag()
        );
    }

    #[test]
    fn parity() {
        for n in [7u32, 8, 51, 200] {
            for x in [0.3, 2.5, 11.0] {
                let a = hermite_phys(n, x);
                let b = hermite_phys(n, -x);
                let s = if n % 2 == 1 { -1 } else { 1 };
                assert_eq!(b.sign(), s * a.sign());
                assert!((a.log_mag() - b.log_mag()).abs() <= 1e-12 * a.log_mag().abs().max(1.0));
            }
        }
    }

    #[test]
    fn mean_characteristic_polynomial() {
        for l in [-2.0f64, -0.5, 0.0, 1.3] {
            assert!(close(char_poly_mean(1, l), -l, 1e-15));
            assert!(close(char_poly_mean(3, l), -l * l * l + 3.0 * l, 1e-14));
        }
        assert_eq!(char_poly_mean(0, 3.0), ScaledReal::ONE);
        assert!(close(char_poly_mean(2, 0.0), -1.0, 1e-15));
    }

    #[test]
    fn kernel_small_cases() {
        let inv = 1.0 / (2.0 * PI).sqrt();
        for x in [-1.0, 0.0, 0.6] {
            assert!(close(
                gue_kernel(1, x, x),
                (-x * x / 2.0).exp() * inv,
                1e-14
            ));
        }
        assert!(close(gue_kernel(2, 0.0, 0.0), inv, 1e-14));
    }

    #[test]
    fn kernel_symmetry() {
        for n in [3u32, 40, 700] {
            let a = gue_kernel(n, 0.37, -1.9);
            let b = gue_kernel(n, -1.9, 0.37);
            assert_eq!(a.sign(), b.sign());
            assert!((a.log_mag() - b.log_mag()).abs() <= 1e-12 * a.log_mag().abs().max(1.0));
        }
    }
}
