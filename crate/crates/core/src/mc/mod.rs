//! Monte Carlo estimates of `E[D_N(μ) D_N(ν)]` and of the correlation coefficient
//! for Wigner matrices with a chosen entry distribution.
//!
//! Sample `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so every
//! estimate is a pure function of the configuration whatever the thread count.

mod lu;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ScaledReal;
use crate::oracle::{EnsembleKind, MomentProfile};
use crate::special::char_poly_mean;

pub const MIN_SAMPLES: usize = 100;
pub const MAX_MC_N: usize = 256;
/// Bound on `|Im det| / |det|` for Hermitian samples.
pub const DET_IMAG_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Gaussian,
    Rademacher,
    Uniform,
    /// Values `a > 0` with probability `p` and `−b < 0` otherwise.
    TwoPoint {
        p: f64,
    },
}

/// Centered entry distribution with a fixed variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryDist {
    pub kind: EntryKind,
    pub variance: f64,
}

impl EntryDist {
    pub fn new(kind: EntryKind, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::Domain {
                what: "variance",
                value: variance,
            });
        }
        if let EntryKind::TwoPoint { p } = kind {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain {
                    what: "two-point p",
                    value: p,
                });
            }
        }
        Ok(Self { kind, variance })
    }

    /// The distribution scaled to the ensemble's entry variance.
    pub fn for_ensemble(kind: EntryKind, ensemble: EnsembleKind) -> Result<Self> {
        Self::new(kind, ensemble.target_variance())
    }

    fn two_point_values(p: f64, v: f64) -> (f64, f64) {
        ((v * (1.0 - p) / p).sqrt(), (v * p / (1.0 - p)).sqrt())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = self.variance;
        match self.kind {
            EntryKind::Gaussian => v.sqrt() * rng.sample::<f64, _>(StandardNormal),
            EntryKind::Rademacher => {
                if rng.random::<bool>() {
                    v.sqrt()
                } else {
                    -v.sqrt()
                }
            }
            EntryKind::Uniform => {
                let a = (3.0 * v).sqrt();
                rng.random_range(-a..a)
            }
            EntryKind::TwoPoint { p } => {
                let (a, b) = Self::two_point_values(p, v);
                if rng.random::<f64>() < p {
                    a
                } else {
                    -b
                }
            }
        }
    }

    /// Exact moments of the distribution.
    pub fn moments(&self) -> MomentProfile {
        let v = self.variance;
        let (m3, m4) = match self.kind {
            EntryKind::Gaussian => (0.0, 3.0 * v * v),
            EntryKind::Rademacher => (0.0, v * v),
            EntryKind::Uniform => (0.0, 1.8 * v * v),
            EntryKind::TwoPoint { p } => {
                let (a, b) = Self::two_point_values(p, v);
                (
                    p * a.powi(3) - (1.0 - p) * b.powi(3),
                    p * a.powi(4) + (1.0 - p) * b.powi(4),
                )
            }
        };
        MomentProfile {
            m1: 0.0,
            m2: v,
            m3,
            m4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub ensemble: EnsembleKind,
    pub dist: EntryDist,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub points: Vec<(f64, f64)>,
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "at least {MIN_SAMPLES} samples required, got {}",
                self.samples
            )));
        }
        if self.n == 0 || self.n > MAX_MC_N {
            return Err(Error::InvalidArgument(format!(
                "matrix size n = {} outside 1..={MAX_MC_N}",
                self.n
            )));
        }
        if self.dist.variance != self.ensemble.target_variance() {
            return Err(Error::InvalidArgument(format!(
                "{:?} entries need variance {}, got {}",
                self.ensemble,
                self.ensemble.target_variance(),
                self.dist.variance
            )));
        }
        if self
            .points
            .iter()
            .any(|(m, v)| !m.is_finite() || !v.is_finite())
        {
            return Err(Error::InvalidArgument(
                "evaluation points must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Generator for sample `index`.
    pub fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// A sampled Wigner matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub enum WignerMatrix {
    Hermitian { n: usize, entries: Vec<Complex64> },
    Symmetric { n: usize, entries: Vec<f64> },
}

impl WignerMatrix {
    pub fn n(&self) -> usize {
        match self {
            WignerMatrix::Hermitian { n, .. } | WignerMatrix::Symmetric { n, .. } => *n,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match self {
            WignerMatrix::Hermitian { n, entries } => entries[i * n + j],
            WignerMatrix::Symmetric { n, entries } => Complex64::new(entries[i * n + j], 0.0),
        }
    }
}

/// Draws one matrix: diagonal `√2·X_ii`, off-diagonal `X^Re + i X^Im` (Hermitian)
/// or `X_ij` (symmetric), row by row over the upper triangle.
pub fn sample_matrix<R: Rng + ?Sized>(cfg: &MCConfig, rng: &mut R) -> WignerMatrix {
    let n = cfg.n;
    let s2 = std::f64::consts::SQRT_2;
    match cfg.ensemble {
        EnsembleKind::Hermitian => {
            let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                entries[i * n + i] = Complex64::new(s2 * cfg.dist.sample(rng), 0.0);
                for j in i + 1..n {
                    let z = Complex64::new(cfg.dist.sample(rng), cfg.dist.sample(rng));
                    entries[i * n + j] = z;
                    entries[j * n + i] = z.conj();
                }
            }
            WignerMatrix::Hermitian { n, entries }
        }
        EnsembleKind::RealSymmetric => {
            let mut entries = vec![0.0; n * n];
            for i in 0..n {
                entries[i * n + i] = s2 * cfg.dist.sample(rng);
                for j in i + 1..n {
                    let x = cfg.dist.sample(rng);
                    entries[i * n + j] = x;
                    entries[j * n + i] = x;
                }
            }
            WignerMatrix::Symmetric { n, entries }
        }
    }
}

/// `det(X − λ)`; an exactly singular matrix gives zero.
pub fn char_poly_value(matrix: &WignerMatrix, lambda: f64) -> Result<ScaledReal> {
    if !lambda.is_finite() {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
        });
    }
    match matrix {
        WignerMatrix::Symmetric { n, entries } => {
            let mut a = entries.clone();
            for i in 0..*n {
                a[i * n + i] -= lambda;
            }
            Ok(match lu::log_det(&mut a, *n) {
                Some((sign, log_abs)) => ScaledReal::from_parts(sign as i8, log_abs),
                None => ScaledReal::ZERO,
            })
        }
        WignerMatrix::Hermitian { n, entries } => {
            let mut a = entries.clone();
            for i in 0..*n {
                a[i * n + i] -= lambda;
            }
            let Some((phase, log_abs)) = lu::log_det(&mut a, *n) else {
                return Ok(ScaledReal::ZERO);
            };
            if phase.im.abs() > DET_IMAG_TOLERANCE {
                return Err(Error::ImaginaryResidue {
                    residue: phase.im.abs(),
                    tolerance: DET_IMAG_TOLERANCE,
                });
            }
            let sign = if phase.re > 0.0 { 1 } else { -1 };
            Ok(ScaledReal::from_parts(sign, log_abs + phase.re.abs().ln()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: ScaledReal,
    pub stderr: ScaledReal,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples_used: usize,
}

/// Characteristic-polynomial values of every sample at every distinct argument,
/// in sample order. Row `i` holds `D_i(λ_k)` for the `k`-th entry of `lambdas`.
fn sample_values(cfg: &MCConfig, lambdas: &[f64]) -> Result<Vec<Vec<ScaledReal>>> {
    cfg.validate()?;
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.rng_for(i);
            let m = sample_matrix(cfg, &mut rng);
            lambdas.iter().map(|&l| char_poly_value(&m, l)).collect()
        })
        .collect()
}

/// Distinct arguments among the points and, per point, the indices of `μ` and `ν`.
fn distinct_arguments(points: &[(f64, f64)]) -> (Vec<f64>, Vec<(usize, usize)>) {
    let mut lambdas: Vec<f64> = Vec::new();
    let mut index_of = |x: f64| match lambdas.iter().position(|&l| l == x) {
        Some(k) => k,
        None => {
            lambdas.push(x);
            lambdas.len() - 1
        }
    };
    let pairs = points
        .iter()
        .map(|&(m, v)| (index_of(m), index_of(v)))
        .collect();
    (lambdas, pairs)
}

/// Mean and standard error of `xs · exp(shift)`.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn max_log(values: impl Iterator<Item = ScaledReal>) -> f64 {
    let shift = values
        .map(|v| v.log_mag())
        .fold(f64::NEG_INFINITY, f64::max);
    if shift.is_finite() {
        shift
    } else {
        0.0
    }
}

/// Sample mean and standard error of `D(μ) D(ν)` at every configured point.
pub fn estimate_f(cfg: &MCConfig) -> Result<Vec<MCEstimate>> {
    let (lambdas, pairs) = distinct_arguments(&cfg.points);
    let values = sample_values(cfg, &lambdas)?;
    Ok(pairs
        .iter()
        .map(|&(a, b)| {
            let products: Vec<ScaledReal> = values.iter().map(|row| row[a] * row[b]).collect();
            let shift = max_log(products.iter().copied());
            let xs: Vec<f64> = products.iter().map(|p| p.relative_to(shift)).collect();
            let (mean, stderr) = mean_stderr(&xs);
            MCEstimate {
                mean: ScaledReal::from_real(mean).scale_exp(shift),
                stderr: ScaledReal::from_real(stderr).scale_exp(shift),
                samples_used: cfg.samples,
            }
        })
        .collect())
}

/// Correlation coefficient of `D(μ)` and `D(ν)` from the sampled second moments
/// and the exact mean `g_N`, with a delta-method standard error.
pub fn estimate_sigma(cfg: &MCConfig) -> Result<Vec<SigmaEstimate>> {
    let (lambdas, pairs) = distinct_arguments(&cfg.points);
    let values = sample_values(cfg, &lambdas)?;
    let order = u32::try_from(cfg.n).expect("n is bounded by MAX_MC_N");
    pairs
        .iter()
        .zip(&cfg.points)
        .map(|(&(a, b), &(mu, nu))| {
            if mu == nu {
                return Ok(SigmaEstimate {
                    value: 1.0,
                    stderr: 0.0,
                    samples_used: cfg.samples,
                });
            }
            let (g_mu, g_nu) = (char_poly_mean(order, mu), char_poly_mean(order, nu));
            let shift = max_log(
                values
                    .iter()
                    .flat_map(|r| [r[a] * r[b], r[a] * r[a], r[b] * r[b]]),
            );
            let column = |f: &dyn Fn(&Vec<ScaledReal>) -> ScaledReal| -> Vec<f64> {
                values.iter().map(|r| f(r).relative_to(shift)).collect()
            };
            let p12 = column(&|r| r[a] * r[b]);
            let p11 = column(&|r| r[a] * r[a]);
            let p22 = column(&|r| r[b] * r[b]);
            let k = cfg.samples as f64;
            let (m12, m11, m22) = (
                p12.iter().sum::<f64>() / k,
                p11.iter().sum::<f64>() / k,
                p22.iter().sum::<f64>() / k,
            );
            let cov = m12 - (g_mu * g_nu).relative_to(shift);
            let v1 = m11 - (g_mu * g_mu).relative_to(shift);
            let v2 = m22 - (g_nu * g_nu).relative_to(shift);
            for v in [v1, v2] {
                if !(v > 0.0) {
                    return Err(Error::DegenerateVariance(v));
                }
            }
            let sigma = cov / (v1 * v2).sqrt();
            let influence: Vec<f64> = (0..cfg.samples)
                .map(|i| {
                    sigma
                        * ((p12[i] - m12) / cov
                            - 0.5 * (p11[i] - m11) / v1
                            - 0.5 * (p22[i] - m22) / v2)
                })
                .collect();
            let (_, stderr) = mean_stderr(&influence);
            Ok(SigmaEstimate {
                value: sigma,
                stderr,
                samples_used: cfg.samples,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egf::sigma_alpha;
    use crate::oracle::oracle_f;

    fn config(
        ensemble: EnsembleKind,
        kind: EntryKind,
        n: usize,
        samples: usize,
        points: Vec<(f64, f64)>,
    ) -> MCConfig {
        MCConfig {
            ensemble,
            dist: EntryDist::for_ensemble(kind, ensemble).unwrap(),
            n,
            samples,
            seed: 7,
            points,
        }
    }

    #[test]
    fn one_by_one_matrix() {
        let cfg = config(EnsembleKind::Hermitian, EntryKind::Gaussian, 1, 100, vec![]);
        let mut a = cfg.rng_for(3);
        let mut b = cfg.rng_for(3);
        let m = sample_matrix(&cfg, &mut a);
        let x = std::f64::consts::SQRT_2 * cfg.dist.sample(&mut b);
        assert_eq!(m.entry(0, 0), Complex64::new(x, 0.0));
        let d = char_poly_value(&m, 0.25)
            .unwrap()
            .to_real_checked()
            .unwrap();
        assert!((d - (x - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn hermitian_structure_is_exact() {
        let cfg = config(EnsembleKind::Hermitian, EntryKind::Uniform, 9, 100, vec![]);
        let m = sample_matrix(&cfg, &mut cfg.rng_for(0));
        for i in 0..9 {
            assert_eq!(m.entry(i, i).im, 0.0);
            for j in 0..9 {
                assert_eq!(m.entry(i, j), m.entry(j, i).conj());
            }
        }
    }

    #[test]
    fn hand_determinant() {
        let m = WignerMatrix::Symmetric {
            n: 2,
            entries: vec![0.0, 1.0, 1.0, 0.0],
        };
        assert_eq!(
            char_poly_value(&m, 0.0).unwrap().to_real_checked().unwrap(),
            -1.0
        );
        let singular = WignerMatrix::Symmetric {
            n: 2,
            entries: vec![1.0, 1.0, 1.0, 1.0],
        };
        assert!(char_poly_value(&singular, 0.0).unwrap().is_zero());
    }

    #[test]
    fn determinant_near_eigenvalue_is_small() {
        let cfg = config(
            EnsembleKind::RealSymmetric,
            EntryKind::Gaussian,
            6,
            100,
            vec![],
        );
        let WignerMatrix::Symmetric { n, entries } = sample_matrix(&cfg, &mut cfg.rng_for(1))
        else {
            unreachable!()
        };
        // power iteration for the dominant eigenvalue
        let mut v = vec![1.0; n];
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let w: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| entries[i * n + j] * v[j]).sum())
                .collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            lambda =
                (0..n).map(|i| v[i] * w[i]).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>();
            v = w.iter().map(|x| x / norm).collect();
        }
        let m = WignerMatrix::Symmetric { n, entries };
        let at = char_poly_value(&m, lambda).unwrap().abs();
        let away = char_poly_value(&m, lambda + 0.5).unwrap().abs();
        assert!(at < away * 1e-3);
    }

    #[test]
    fn diagonal_mean_is_centered() {
        let cfg = config(
            EnsembleKind::Hermitian,
            EntryKind::TwoPoint { p: 0.3 },
            1,
            100_000,
            vec![],
        );
        let sum: f64 = (0..cfg.samples as u64)
            .map(|i| sample_matrix(&cfg, &mut cfg.rng_for(i)).entry(0, 0).re)
            .sum();
        let mean = sum / cfg.samples as f64;
        assert!(mean.abs() < 4.0 * (2.0 * 0.5 / 1e5f64).sqrt());
    }

    #[test]
    fn exact_moments() {
        for kind in [
            EntryKind::Gaussian,
            EntryKind::Rademacher,
            EntryKind::Uniform,
            EntryKind::TwoPoint { p: 0.2 },
        ] {
            let d = EntryDist::new(kind, 0.5).unwrap();
            let m = d.moments();
            assert!(m.validate().is_ok());
            assert_eq!(m.m2, 0.5);
        }
        let skew = EntryDist::new(EntryKind::TwoPoint { p: 0.2 }, 1.0)
            .unwrap()
            .moments();
        // a = 2, b = 1/2: m3 = 0.2·8 − 0.8/8, m4 = 0.2·16 + 0.8/16
        assert!((skew.m3 - 1.5).abs() < 1e-14 && (skew.m4 - 3.25).abs() < 1e-14);
        assert!(EntryDist::new(EntryKind::TwoPoint { p: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn agrees_with_oracle() {
        let points = vec![(0.5, -0.5), (0.0, 0.0), (1.0, 0.3)];
        for ensemble in [EnsembleKind::Hermitian, EnsembleKind::RealSymmetric] {
            let cfg = config(ensemble, EntryKind::Rademacher, 3, 20_000, points.clone());
            for (est, &(mu, nu)) in estimate_f(&cfg).unwrap().iter().zip(&points) {
                let want = oracle_f(ensemble, &cfg.dist.moments(), 3, mu, nu).unwrap();
                let got = est.mean.to_real_checked().unwrap();
                let se = est.stderr.to_real_checked().unwrap();
                assert!(
                    (got - want).abs() < 4.0 * se,
                    "{ensemble:?} ({mu},{nu}): {got} ± {se} vs {want}"
                );
                assert_eq!(est.samples_used, 20_000);
            }
        }
    }

    #[test]
    fn sigma_estimate() {
        for (ensemble, alpha) in [
            (EnsembleKind::Hermitian, 1.0),
            (EnsembleKind::RealSymmetric, 2.0),
        ] {
            let cfg = config(
                ensemble,
                EntryKind::Gaussian,
                4,
                20_000,
                vec![(0.0, 1.0), (0.7, 0.7)],
            );
            let est = estimate_sigma(&cfg).unwrap();
            let want = sigma_alpha(alpha, 0.0, 0.0, 1.0, 4).unwrap();
            assert!(
                (est[0].value - want).abs() < 4.0 * est[0].stderr,
                "{est:?} vs {want}"
            );
            assert_eq!(est[1].value, 1.0);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = config(
            EnsembleKind::Hermitian,
            EntryKind::Gaussian,
            5,
            500,
            vec![(0.1, 0.2)],
        );
        let a = estimate_f(&cfg).unwrap();
        let b = estimate_f(&cfg).unwrap();
        assert_eq!(a[0].mean.log_mag().to_bits(), b[0].mean.log_mag().to_bits());
        assert_eq!(
            a[0].stderr.log_mag().to_bits(),
            b[0].stderr.log_mag().to_bits()
        );
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let c = pool.install(|| estimate_f(&cfg).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(EnsembleKind::Hermitian, EntryKind::Gaussian, 4, 100, vec![]);
        assert!(cfg.validate().is_ok());
        cfg.samples = 99;
        assert!(cfg.validate().is_err());
        cfg.samples = 100;
        cfg.n = 257;
        assert!(cfg.validate().is_err());
        cfg.n = 4;
        cfg.dist =
            EntryDist::for_ensemble(EntryKind::Gaussian, EnsembleKind::RealSymmetric).unwrap();
        assert!(cfg.validate().is_err());
    }
}
