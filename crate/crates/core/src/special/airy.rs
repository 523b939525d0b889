//! Airy function `Ai` and its derivative on the real line.
//!
//! The primary evaluator integrates `exp(z³/3 − xz)` along a vertical line
//! `z = c + it`. The abscissa `c` is picked per argument so the integrand has no
//! large cancellation: the real saddle `√x` for `x > 1`, `1` near the origin, and
//! `1/√|x|` on the oscillatory side, where a line close to the imaginary axis
//! keeps the peak magnitude at about `e^{√|x|}` instead of `e^{|x|}`.
//!
//! [`airy_series`] is an independent route (Maclaurin series near the origin,
//! asymptotic expansions outside) used as a cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{trapezoid_line, QuadratureKind, QuadratureSpec};

pub const AIRY_DOMAIN: f64 = 30.0;

/// `Ai(0) = 3^{-2/3} / Γ(2/3)`.
pub const AI_ZERO: f64 = 0.355_028_053_887_817_2;
/// `Ai'(0) = -3^{-1/3} / Γ(1/3)`.
pub const AI_PRIME_ZERO: f64 = -0.258_819_403_792_806_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryPair {
    pub ai: f64,
    pub ai_prime: f64,
}

fn check_domain(x: f64) -> Result<()> {
    if x.is_finite() && x.abs() <= AIRY_DOMAIN {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "Airy argument",
            value: x,
        })
    }
}

/// Line abscissa, truncation half-width and node count for the contour route.
fn contour_plan(x: f64) -> (f64, QuadratureSpec) {
    // Along z = c + it the integrand magnitude is exp(Re φ(c) − c t²). The
    // trapezoid error is about exp(−2π d / h) times the integrand growth on the
    // strip |Re z − c| < d, so h is set from d and that growth.
    let (c, d, growth) = if x > 1.0 {
        let c = x.sqrt();
        (c, 1.0 / c.sqrt(), 2.0)
    } else if x >= -1.0 {
        (1.0, 0.5, 2.0)
    } else {
        let s = (-x).sqrt();
        let c = 1.0 / s;
        // on Re z = c + d the peak grows like exp((c + d)|x|)
        (c, 0.5 * c, 1.5 * s)
    };
    let bulk = if x < -1.0 { c * (-x) } else { 0.0 };
    let half_width = ((44.0 + bulk) / c).sqrt();
    let h = 2.0 * PI * d / (40.0 + growth);
    let points = ((2.0 * half_width / h).ceil() as usize + 1).max(QuadratureSpec::MIN_POINTS);
    let spec = QuadratureSpec {
        truncation_halfwidth: half_width,
        point_count: points | 1,
        kind: QuadratureKind::UniformTrapezoid,
    };
    (c, spec)
}

/// `Ai(x)` and `Ai'(x)` for `|x| ≤ 30` from the vertical-line contour integral
/// `Ai(x) = (1/2πi) ∫ exp(z³/3 − xz) dz`.
pub fn airy(x: f64) -> Result<AiryPair> {
    check_domain(x)?;
    let (c, spec) = contour_plan(x);
    let peak = c * c * c / 3.0 - x * c;
    // Ai and -Ai' are both real parts of integrals over the same samples, so they
    // share one pass: the real slot carries the Ai integrand, the imaginary slot
    // the Ai' integrand.
    let packed = trapezoid_line(
        |t| {
            let damp = (-c * t * t).exp();
            let theta = c * c * t - t * t * t / 3.0 - x * t;
            let (s, co) = theta.sin_cos();
            Complex64::new(damp * co, -damp * (c * co - t * s))
        },
        &spec,
    )?;
    let scale = peak.exp() / (2.0 * PI);
    Ok(AiryPair {
        ai: packed.re * scale,
        ai_prime: packed.im * scale,
    })
}

/// Switch points of the series route: Maclaurin inside, asymptotics outside.
const SERIES_LOWER: f64 = -7.0;
const SERIES_UPPER: f64 = 5.0;

/// `Ai`, `Ai'` from power series and asymptotic expansions, independent of the
/// contour evaluator.
pub fn airy_series(x: f64) -> Result<AiryPair> {
    check_domain(x)?;
    Ok(if (SERIES_LOWER..=SERIES_UPPER).contains(&x) {
        maclaurin(x)
    } else if x > 0.0 {
        asymptotic_positive(x)
    } else {
        asymptotic_negative(-x)
    })
}

fn maclaurin(x: f64) -> AiryPair {
    let x3 = x * x * x;
    // f, g are the even/odd-type solutions with Ai = Ai(0) f + Ai'(0) g
    let (mut f, mut g, mut df, mut dg) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg, mut tdf, mut tdg) = (1.0, x, 0.0, 1.0);
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        tf *= x3 / ((k3 - 1.0) * k3);
        tg *= x3 / (k3 * (k3 + 1.0));
        tdf = if k == 1 {
            x * x / 2.0
        } else {
            tdf * x3 / ((k3 - 1.0) * (k3 - 3.0))
        };
        tdg *= x3 / (k3 * (k3 - 2.0));
        f += tf;
        g += tg;
        df += tdf;
        dg += tdg;
        let tail = tf.abs() + tg.abs() + tdf.abs() + tdg.abs();
        if tail <= 1e-18 * (f.abs() + g.abs() + df.abs() + dg.abs()) {
            break;
        }
    }
    AiryPair {
        ai: AI_ZERO * f + AI_PRIME_ZERO * g,
        ai_prime: AI_ZERO * df + AI_PRIME_ZERO * dg,
    }
}

/// Coefficients `u_k` and `v_k` of the large-argument expansions.
fn expansion_coefficients(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

/// Sums `Σ (-1)^k c_{offset+2k}`-style alternating series with terms `c_j ζ^{-j}`,
/// stopping at the smallest term.
fn truncated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for t in terms {
        if t.abs() > last {
            break;
        }
        sum += t;
        last = t.abs();
        if last < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn asymptotic_positive(x: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = expansion_coefficients(40);
    let su = truncated_sum(u.iter().enumerate().map(|(k, c)| {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        s * c / zeta.powi(k as i32)
    }));
    let sv = truncated_sum(v.iter().enumerate().map(|(k, c)| {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        s * c / zeta.powi(k as i32)
    }));
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    AiryPair {
        ai: e / q * su,
        ai_prime: -e * q * sv,
    }
}

fn asymptotic_negative(z: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (u, v) = expansion_coefficients(60);
    let parity = |c: &[f64], offset: usize| {
        truncated_sum((0..c.len() / 2).map(|k| {
            let j = 2 * k + offset;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s * c[j] / zeta.powi(j as i32)
        }))
    };
    let (ue, uo, ve, vo) = (parity(&u, 0), parity(&u, 1), parity(&v, 0), parity(&v, 1));
    let (s, c) = (zeta - PI / 4.0).sin_cos();
    let q = z.powf(0.25);
    let norm = PI.sqrt();
    AiryPair {
        ai: (c * ue + s * uo) / (norm * q),
        ai_prime: q * (s * ve - c * vo) / norm,
    }
}
