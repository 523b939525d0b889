//! Coefficient extraction from the exponential generating functions of the
//! second-order correlation functions.
//!
//! For `α > 0` the sequence `f_N^{(α)}(μ, ν)` has the EGF
//!
//! ```text
//! exp(μν z/(1−z²) − ½(μ²+ν²) z²/(1−z²) + b* z²) / ((1−z)^{α+½} (1+z)^{½})
//! ```
//!
//! with `α = 1` for Hermitian and `α = 2` for real-symmetric Wigner matrices.
//! Coefficients are recovered by the trapezoid rule on a circle `|z| = r`, which
//! for a periodic analytic integrand only aliases in the far coefficients
//! `c_{N+kM} r^{kM}`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, ScaledReal};
use crate::special::char_poly_mean;

/// Largest contour radius accepted by [`egf_eval`].
pub const MAX_RADIUS: f64 = 0.9999;
/// Smallest default radius; keeps very small `N` away from a degenerate circle.
pub const MIN_DEFAULT_RADIUS: f64 = 0.2;
pub const MIN_POINTS: usize = 64;
/// Condition number above which an extracted value is considered cancelled.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Relative bound on the imaginary part of an extracted coefficient.
pub const IMAG_TOLERANCE: f64 = 1e-8;
pub const MAX_EDGE_N: u64 = 1_000_000;
pub const MAX_BULK_N: u64 = 512;
pub const MAX_BULK_XI: f64 = 1.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgfParams {
    pub alpha: f64,
    pub bstar: f64,
    pub mu: f64,
    pub nu: f64,
}

impl EgfParams {
    pub fn new(alpha: f64, bstar: f64, mu: f64, nu: f64) -> Result<Self> {
        let p = Self {
            alpha,
            bstar,
            mu,
            nu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Domain {
                what: "alpha",
                value: self.alpha,
            });
        }
        for (what, value) in [("bstar", self.bstar), ("mu", self.mu), ("nu", self.nu)] {
            if !value.is_finite() {
                return Err(Error::Domain { what, value });
            }
        }
        Ok(())
    }

    /// Same parameters at other evaluation points.
    pub fn at(&self, mu: f64, nu: f64) -> Self {
        Self { mu, nu, ..*self }
    }
}

/// One coefficient extraction: parameters, order, circle radius and node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourJob {
    pub params: EgfParams,
    pub n: u64,
    pub radius: f64,
    pub points: usize,
}

impl ContourJob {
    /// Job on the saddle circle `|z| = 1 − n^{−1/3}`.
    pub fn new(params: EgfParams, n: u64) -> Self {
        Self {
            params,
            n,
            radius: default_radius(n),
            points: default_points(n),
        }
    }

    /// Job on the circle `|z| = 1 − 1/n`, which bulk evaluation points need.
    pub fn bulk(params: EgfParams, n: u64) -> Self {
        let radius = (1.0 - 1.0 / n.max(1) as f64).clamp(MIN_DEFAULT_RADIUS, MAX_RADIUS);
        Self {
            params,
            n,
            radius,
            points: (64 * n as usize).max(2048),
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.radius > 0.0 && self.radius <= MAX_RADIUS) {
            return Err(Error::Domain {
                what: "contour radius",
                value: self.radius,
            });
        }
        if self.points < MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "contour needs at least {MIN_POINTS} points, got {}",
                self.points
            )));
        }
        Ok(())
    }
}

pub fn default_radius(n: u64) -> f64 {
    (1.0 - (n.max(1) as f64).powf(-1.0 / 3.0)).clamp(MIN_DEFAULT_RADIUS, MAX_RADIUS)
}

pub fn default_points(n: u64) -> usize {
    let cube_root = (n as f64).cbrt().ceil() as usize;
    (512 * cube_root).max(2048)
}

/// Diagnostics of one extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub xi_n: f64,
    pub eta_n: f64,
    /// Largest real part of the integrand exponent, subtracted before summing.
    pub shift: f64,
    /// Largest sample magnitude over the magnitude of the result.
    pub condition: f64,
}

impl SaddleData {
    pub fn is_ill_conditioned(&self) -> bool {
        !(self.condition <= CONDITION_LIMIT)
    }
}

/// Natural log of the EGF at `z`, using principal logarithms.
pub fn egf_eval(params: &EgfParams, z: Complex64) -> Result<Complex64> {
    if !(z.norm() <= MAX_RADIUS) {
        return Err(Error::Domain {
            what: "|z|",
            value: z.norm(),
        });
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(log_egf(params, z, one - z))
}

/// `log EGF` with `1 − z` supplied separately so callers on a circle can form it
/// without cancellation.
fn log_egf(p: &EgfParams, z: Complex64, one_minus_z: Complex64) -> Complex64 {
    let xi = 0.5 * (p.mu + p.nu);
    let eta = 0.5 * (p.mu - p.nu);
    let one_plus_z = Complex64::new(1.0, 0.0) + z;
    xi * xi * z / one_plus_z - eta * eta * z / one_minus_z + p.bstar * z * z
        - (p.alpha + 0.5) * one_minus_z.ln()
        - 0.5 * one_plus_z.ln()
}

/// The coefficient `c_N = f_N/N!` of the EGF.
pub fn extract_coefficient(job: &ContourJob) -> Result<(ScaledReal, SaddleData)> {
    job.validate()?;
    let p = &job.params;
    let mut diag = SaddleData {
        xi_n: 0.5 * (p.mu + p.nu),
        eta_n: 0.5 * (p.mu - p.nu),
        shift: 0.0,
        condition: 1.0,
    };
    if job.n == 0 {
        return Ok((ScaledReal::ONE, diag));
    }
    let m = job.points;
    let r = job.radius;
    let log_r = r.ln();
    let n = job.n;

    let exponents: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            let (s, c) = t.sin_cos();
            let half = (0.5 * t).sin();
            let z = Complex64::new(r * c, r * s);
            let one_minus_z = Complex64::new((1.0 - r) + 2.0 * r * half * half, -r * s);
            // z^{-N} in polar form with the angle reduced exactly
            let turns = ((u128::from(n) * j as u128) % m as u128) as f64;
            let log_power = Complex64::new(-(n as f64) * log_r, -TAU * turns / m as f64);
            log_egf(p, z, one_minus_z) + log_power
        })
        .collect();

    let shift = exponents
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::NonFinite { at: shift });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for e in &exponents {
        let term = Complex64::from_polar((e.re - shift).exp(), e.im);
        sum += term;
        abs_sum += term.norm();
    }
    let mean = sum / m as f64;
    let mean_abs = abs_sum / m as f64;
    if !mean.re.is_finite() || !mean.im.is_finite() {
        return Err(Error::NonFinite { at: mean.re });
    }
    let tolerance = IMAG_TOLERANCE * mean.re.abs() + 64.0 * f64::EPSILON * mean_abs;
    if mean.im.abs() > tolerance {
        return Err(Error::ImaginaryResidue {
            residue: mean.im.abs() / mean.re.abs(),
            tolerance: IMAG_TOLERANCE,
        });
    }
    diag.shift = shift;
    diag.condition = 1.0 / mean.re.abs();
    Ok((ScaledReal::from_real(mean.re).scale_exp(shift), diag))
}

/// `f_N^{(α)}(μ, ν)` including the `N!` factor.
pub fn extract_f(job: &ContourJob) -> Result<(ScaledReal, SaddleData)> {
    let (c, diag) = extract_coefficient(job)?;
    Ok((c.scale_exp(ln_factorial(job.n)), diag))
}

/// Edge evaluation points `2√N + t N^{−1/6}`.
pub fn edge_point(n: u64, t: f64) -> f64 {
    let nf = n as f64;
    2.0 * nf.sqrt() + t * nf.powf(-1.0 / 6.0)
}

/// Spectral density of the semicircle on `[−2, 2]`.
pub fn rho(xi: f64) -> f64 {
    (4.0 - xi * xi).sqrt() / TAU
}

/// Bulk evaluation points `√N ξ + t/(√N ρ(ξ))`.
pub fn bulk_point(n: u64, xi: f64, t: f64) -> f64 {
    let sq = (n as f64).sqrt();
    sq * xi + t / (sq * rho(xi))
}

/// `log` of the edge normalization `√(2π) N! N^{(2α−1)/6} exp(2N + (μ+ν)N^{1/3})`.
pub fn edge_lognorm(alpha: f64, n: u64, mu: f64, nu: f64) -> f64 {
    ln_factorial(n) + edge_lognorm_reduced(alpha, n, mu, nu)
}

fn edge_lognorm_reduced(alpha: f64, n: u64, mu: f64, nu: f64) -> f64 {
    let nf = n as f64;
    0.5 * (TAU).ln() + (2.0 * alpha - 1.0) / 6.0 * nf.ln() + 2.0 * nf + (mu + nu) * nf.cbrt()
}

/// `log` of the bulk normalization: `√(2π) N! N^{1/2} ρ exp(½Nξ² + ½(μ+ν)ξ/ρ)` for
/// `α = 1` and the same with `N^{3/2} ρ³` for `α = 2`.
pub fn bulk_lognorm(alpha: f64, n: u64, xi: f64, mu: f64, nu: f64) -> Result<f64> {
    Ok(ln_factorial(n) + bulk_lognorm_reduced(alpha, n, xi, mu, nu)?)
}

fn bulk_lognorm_reduced(alpha: f64, n: u64, xi: f64, mu: f64, nu: f64) -> Result<f64> {
    let power = if alpha == 1.0 {
        1.0
    } else if alpha == 2.0 {
        3.0
    } else {
        return Err(Error::Domain {
            what: "bulk alpha",
            value: alpha,
        });
    };
    let nf = n as f64;
    let r = rho(xi);
    Ok(0.5 * TAU.ln()
        + 0.5 * power * nf.ln()
        + power * r.ln()
        + 0.5 * nf * xi * xi
        + 0.5 * (mu + nu) * xi / r)
}

/// A normalized value together with the raw coefficient it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledEvaluation {
    pub scaled: f64,
    /// `f_N` at the scaled evaluation points.
    pub raw: ScaledReal,
    pub saddle: SaddleData,
}

/// `F̂_N`, which tends to `exp(b*) I^{(α)}(μ, ν)`.
pub fn edge_evaluate(alpha: f64, bstar: f64, mu: f64, nu: f64, n: u64) -> Result<ScaledEvaluation> {
    if n == 0 || n > MAX_EDGE_N {
        return Err(Error::InvalidArgument(format!(
            "edge order n = {n} outside 1..={MAX_EDGE_N}"
        )));
    }
    let params = EgfParams::new(alpha, bstar, edge_point(n, mu), edge_point(n, nu))?;
    let (c, saddle) = extract_coefficient(&ContourJob::new(params, n))?;
    let scaled = c
        .scale_exp(-edge_lognorm_reduced(alpha, n, mu, nu))
        .to_real_checked()?;
    Ok(ScaledEvaluation {
        scaled,
        raw: c.scale_exp(ln_factorial(n)),
        saddle,
    })
}

pub fn edge_scaled_f(alpha: f64, bstar: f64, mu: f64, nu: f64, n: u64) -> Result<f64> {
    edge_evaluate(alpha, bstar, mu, nu, n).map(|e| e.scaled)
}

/// Bulk-normalized `f_N`, tending to `exp(b*)𝕊` (`α = 1`) or `exp(b*)𝕋` (`α = 2`).
/// Values whose extraction is too ill-conditioned are refused.
pub fn bulk_evaluate(
    alpha: f64,
    bstar: f64,
    xi: f64,
    mu: f64,
    nu: f64,
    n: u64,
) -> Result<ScaledEvaluation> {
    if n == 0 || n > MAX_BULK_N {
        return Err(Error::InvalidArgument(format!(
            "bulk order n = {n} outside 1..={MAX_BULK_N}"
        )));
    }
    if !(xi.abs() <= MAX_BULK_XI) {
        return Err(Error::Domain {
            what: "xi",
            value: xi,
        });
    }
    let lognorm = bulk_lognorm_reduced(alpha, n, xi, mu, nu)?;
    let params = EgfParams::new(alpha, bstar, bulk_point(n, xi, mu), bulk_point(n, xi, nu))?;
    let (c, saddle) = extract_coefficient(&ContourJob::bulk(params, n))?;
    if saddle.is_ill_conditioned() {
        return Err(Error::IllConditioned {
            condition: saddle.condition,
            limit: CONDITION_LIMIT,
        });
    }
    Ok(ScaledEvaluation {
        scaled: c.scale_exp(-lognorm).to_real_checked()?,
        raw: c.scale_exp(ln_factorial(n)),
        saddle,
    })
}

pub fn bulk_scaled_f(alpha: f64, bstar: f64, xi: f64, mu: f64, nu: f64, n: u64) -> Result<f64> {
    bulk_evaluate(alpha, bstar, xi, mu, nu, n).map(|e| e.scaled)
}

fn u32_order(n: u64) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::InvalidArgument(format!("order n = {n} too large")))
}

/// `σ` together with the cross correlation it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEvaluation {
    pub sigma: f64,
    /// `f_N(μ, ν)`; zero when the points coincide and nothing was extracted.
    pub f_cross: ScaledReal,
    /// Worst condition number among the three extractions.
    pub condition: f64,
}

/// Correlation coefficient of `D_N(μ)` and `D_N(ν)` at raw evaluation points.
pub fn sigma_alpha(alpha: f64, bstar: f64, mu_pt: f64, nu_pt: f64, n: u64) -> Result<f64> {
    sigma_evaluate(alpha, bstar, mu_pt, nu_pt, n).map(|s| s.sigma)
}

pub fn sigma_evaluate(
    alpha: f64,
    bstar: f64,
    mu_pt: f64,
    nu_pt: f64,
    n: u64,
) -> Result<SigmaEvaluation> {
    let params = EgfParams::new(alpha, bstar, mu_pt, nu_pt)?;
    if mu_pt == nu_pt {
        return Ok(SigmaEvaluation {
            sigma: 1.0,
            f_cross: ScaledReal::ZERO,
            condition: 1.0,
        });
    }
    let order = u32_order(n)?;
    let mut condition: f64 = 1.0;
    let mut coefficient = |a: f64, b: f64| -> Result<ScaledReal> {
        let (c, diag) = extract_coefficient(&ContourJob::new(params.at(a, b), n))?;
        if diag.is_ill_conditioned() {
            return Err(Error::IllConditioned {
                condition: diag.condition,
                limit: CONDITION_LIMIT,
            });
        }
        condition = condition.max(diag.condition);
        Ok(c.scale_exp(ln_factorial(n)))
    };
    let f_cross = coefficient(mu_pt, nu_pt)?;
    let f_mu = coefficient(mu_pt, mu_pt)?;
    let f_nu = coefficient(nu_pt, nu_pt)?;
    let g_mu = char_poly_mean(order, mu_pt);
    let g_nu = char_poly_mean(order, nu_pt);

    let numerator = f_cross - g_mu * g_nu;
    let var_mu = f_mu - g_mu * g_mu;
    let var_nu = f_nu - g_nu * g_nu;
    for v in [var_mu, var_nu] {
        if v.sign() <= 0 {
            return Err(Error::DegenerateVariance(v.to_real_lossy()));
        }
    }
    let sigma = numerator
        .checked_div((var_mu * var_nu).sqrt()?)?
        .to_real_checked()?;
    Ok(SigmaEvaluation {
        sigma,
        f_cross,
        condition,
    })
}

/// `σ` at the edge points of `(μ, ν)`.
pub fn edge_sigma(alpha: f64, bstar: f64, mu: f64, nu: f64, n: u64) -> Result<f64> {
    sigma_alpha(alpha, bstar, edge_point(n, mu), edge_point(n, nu), n)
}

/// `g_N(μ_N) g_N(ν_N)` under the edge normalization of `f_N`; tends to zero.
pub fn edge_scaled_mean_product(alpha: f64, mu: f64, nu: f64, n: u64) -> Result<f64> {
    let order = u32_order(n)?;
    let g = char_poly_mean(order, edge_point(n, mu)) * char_poly_mean(order, edge_point(n, nu));
    g.scale_exp(-edge_lognorm(alpha, n, mu, nu))
        .to_real_checked()
}
