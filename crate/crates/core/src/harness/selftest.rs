//! Invariant checks of every module, grouped, with pass/fail per group.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::egf::{
    bulk_evaluate, edge_point, edge_scaled_f, edge_scaled_mean_product, edge_sigma,
    extract_coefficient, extract_f, ContourJob, EgfParams,
};
use crate::kernels::{
    airy_kernel, airy_product, b_kernel, diag_recursion_check, i_alpha, operator_step, sine_kernel,
    t_kernel,
};
use crate::mc::{estimate_f, EntryDist, EntryKind, MCConfig};
use crate::numeric::{central_diff, ln_factorial, trapezoid_line, QuadratureSpec, ScaledReal};
use crate::oracle::{oracle_f, oracle_mean, EnsembleKind, MomentProfile};
use crate::special::{
    airy, airy_series, char_poly_mean, gue_kernel, hermite_phys, AI_PRIME_ZERO, AI_ZERO,
};

/// Orders at or above this are skipped in fast mode.
pub const FAST_N_LIMIT: u64 = 4096;

type Check = std::result::Result<String, String>;
type CheckFn = Box<dyn Fn(bool) -> Check>;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupOutcome {
    pub name: String,
    pub checks: Vec<CheckOutcome>,
    pub seconds: f64,
}

impl GroupOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub fast: bool,
    pub groups: Vec<GroupOutcome>,
    pub seconds: f64,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(GroupOutcome::passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            writeln!(
                f,
                "{} {} ({:.2} s)",
                if g.passed() { "PASS" } else { "FAIL" },
                g.name,
                g.seconds
            )?;
            for c in g.checks.iter().filter(|c| !c.passed) {
                writeln!(f, "    {}: {}", c.name, c.detail)?;
            }
        }
        writeln!(
            f,
            "{} groups, {} failed, {:.2} s{}",
            self.groups.len(),
            self.groups.iter().filter(|g| !g.passed()).count(),
            self.seconds,
            if self.fast { " (fast)" } else { "" }
        )
    }
}

struct Group {
    name: &'static str,
    checks: Vec<(&'static str, CheckFn)>,
}

impl Group {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: Vec::new(),
        }
    }

    fn check(mut self, name: &'static str, f: impl Fn(bool) -> Check + 'static) -> Self {
        self.checks.push((name, Box::new(f)));
        self
    }

    fn run(&self, fast: bool) -> GroupOutcome {
        let started = Instant::now();
        let checks = self
            .checks
            .iter()
            .map(|(name, f)| {
                let (passed, detail) = match f(fast) {
                    Ok(d) => (true, d),
                    Err(d) => (false, d),
                };
                CheckOutcome {
                    name: name.to_string(),
                    passed,
                    detail,
                }
            })
            .collect();
        GroupOutcome {
            name: self.name.to_string(),
            checks,
            seconds: started.elapsed().as_secs_f64(),
        }
    }
}

fn ensure(ok: bool, detail: impl Into<String>) -> Check {
    let detail = detail.into();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn groups() -> Vec<Group> {
    vec![
        Group::new("scaled arithmetic and quadrature")
            .check("scaled sum", |_| {
                let s = ScaledReal::from_real(2.0) + ScaledReal::from_real(3.0);
                ensure((s.log_mag() - 5f64.ln()).abs() < 1e-15, format!("{s}"))
            })
            .check("cancellation", |_| {
                let (x, y) = (
                    ScaledReal::from_parts(1, 123.0),
                    ScaledReal::from_parts(1, 123.0),
                );
                ensure((x - y).is_zero(), "x − x")
            })
            .check("gaussian integral", |_| {
                let spec = QuadratureSpec::new(20.0, 2000).map_err(err)?;
                let v = trapezoid_line(|u| (-u * u).exp().into(), &spec).map_err(err)?;
                ensure((v.re - PI.sqrt()).abs() < 1e-12, format!("{}", v.re))
            }),
        Group::new("airy functions")
            .check("values at zero", |_| {
                let a = airy(0.0).map_err(err)?;
                ensure(
                    (a.ai - AI_ZERO).abs() < 1e-12 && (a.ai_prime - AI_PRIME_ZERO).abs() < 1e-12,
                    format!("{a:?}"),
                )
            })
            .check("contour vs series on [-10, 10]", |_| {
                let mut worst: f64 = 0.0;
                for x in grid(-10.0, 10.0, 401) {
                    let (a, b) = (airy(x).map_err(err)?, airy_series(x).map_err(err)?);
                    worst = worst
                        .max((a.ai - b.ai).abs())
                        .max((a.ai_prime - b.ai_prime).abs());
                }
                ensure(worst <= 1e-10, format!("max difference {worst:e}"))
            })
            .check("differential equation on [-8, 8]", |_| {
                let h = 1e-4;
                let mut worst: f64 = 0.0;
                for x in grid(-8.0, 8.0, 33) {
                    let d2 =
                        central_diff(|t| airy(t).map(|a| a.ai_prime).unwrap_or(f64::NAN), x, h);
                    worst = worst.max((d2 - x * airy(x).map_err(err)?.ai).abs());
                }
                ensure(worst <= 1e-6, format!("max residual {worst:e}"))
            }),
        Group::new("hermite polynomials and the mean")
            .check("parity", |_| {
                for n in [7u32, 8, 51] {
                    let (a, b) = (hermite_phys(n, 1.7), hermite_phys(n, -1.7));
                    let s = if n % 2 == 1 { -1 } else { 1 };
                    if b.sign() != s * a.sign()
                        || (a.log_mag() - b.log_mag()).abs() > 1e-12 * a.log_mag().abs()
                    {
                        return Err(format!("n = {n}"));
                    }
                }
                Ok(String::new())
            })
            .check("mean vs oracle", |_| {
                let m = MomentProfile::gaussian(EnsembleKind::Hermitian);
                for n in 1..=6 {
                    for l in [-2.0, -0.7, 0.0, 0.4, 1.9] {
                        let a = char_poly_mean(n as u32, l).to_real_checked().map_err(err)?;
                        let b = oracle_mean(EnsembleKind::Hermitian, &m, n, l).map_err(err)?;
                        if (a - b).abs() > 1e-10 * b.abs().max(1.0) {
                            return Err(format!("n = {n}, λ = {l}: {a} vs {b}"));
                        }
                    }
                }
                Ok(String::new())
            })
            .check("kernel symmetry", |_| {
                let (a, b) = (gue_kernel(40, 0.37, -1.9), gue_kernel(40, -1.9, 0.37));
                ensure(
                    (a.log_mag() - b.log_mag()).abs() < 1e-12 && a.sign() == b.sign(),
                    "K_40",
                )
            }),
        Group::new("limit kernels")
            .check("symmetry on a 7x7 grid", |_| {
                let g = grid(-3.0, 3.0, 7);
                for &x in &g {
                    for &y in &g {
                        let pairs = [
                            (sine_kernel(x, y), sine_kernel(y, x)),
                            (t_kernel(x, y), t_kernel(y, x)),
                            (
                                airy_kernel(x, y).map_err(err)?,
                                airy_kernel(y, x).map_err(err)?,
                            ),
                            (b_kernel(x, y).map_err(err)?, b_kernel(y, x).map_err(err)?),
                            (
                                i_alpha(1.5, x, y).map_err(err)?,
                                i_alpha(1.5, y, x).map_err(err)?,
                            ),
                        ];
                        if pairs.iter().any(|(a, b)| (a - b).abs() > 1e-10) {
                            return Err(format!("({x}, {y})"));
                        }
                    }
                }
                Ok(String::new())
            })
            .check("quadrature equals closed forms", |_| {
                let mut worst: f64 = 0.0;
                for (x, y) in [
                    (0.3, -0.2),
                    (0.0, 1.0),
                    (-2.0, 1.5),
                    (1.2, 1.2),
                    (0.5, -0.5),
                ] {
                    worst = worst
                        .max(
                            (i_alpha(1.0, x, y).map_err(err)? - airy_kernel(x, y).map_err(err)?)
                                .abs(),
                        )
                        .max(
                            (i_alpha(2.0, x, y).map_err(err)? - b_kernel(x, y).map_err(err)?).abs(),
                        );
                }
                ensure(worst <= 1e-9, format!("max difference {worst:e}"))
            })
            .check("airy product lemma on an 11x11 grid", |_| {
                let g = grid(-5.0, 5.0, 11);
                let mut worst: f64 = 0.0;
                for &x in &g {
                    for &y in &g {
                        let want = airy(x).map_err(err)?.ai * airy(y).map_err(err)?.ai;
                        worst = worst.max((airy_product(x, y).map_err(err)? - want).abs());
                    }
                }
                ensure(worst <= 1e-9, format!("max difference {worst:e}"))
            })
            .check("continuity at the diagonal", |_| {
                let x = 0.7;
                let a = (airy_kernel(x + 1e-6, x).map_err(err)?
                    - airy_kernel(x, x).map_err(err)?)
                .abs();
                let b = (b_kernel(x + 1e-6, x).map_err(err)? - b_kernel(x, x).map_err(err)?).abs();
                ensure(a < 1e-7 && b < 1e-7, format!("{a:e} {b:e}"))
            }),
        Group::new("operator chain")
            .check("product -> I1 -> I2", |_| {
                let h = 1e-4;
                let mut worst: f64 = 0.0;
                for (x, y) in [
                    (0.8, -0.4),
                    (1.5, 0.2),
                    (-1.0, 0.5),
                    (2.0, -2.0),
                    (-0.3, -1.6),
                ] {
                    let i1 = operator_step(airy_product, x, y, h).map_err(err)?;
                    let i2 = operator_step(|a, b| i_alpha(1.0, a, b), x, y, h).map_err(err)?;
                    let b2 = operator_step(airy_kernel, x, y, h).map_err(err)?;
                    worst = worst
                        .max((i1 - i_alpha(1.0, x, y).map_err(err)?).abs())
                        .max((i2 - i_alpha(2.0, x, y).map_err(err)?).abs())
                        .max((b2 - b_kernel(x, y).map_err(err)?).abs());
                }
                ensure(worst <= 1e-6, format!("max difference {worst:e}"))
            })
            .check("sine -> t", |_| {
                let t =
                    operator_step(|a, b| Ok(sine_kernel(a, b)), 0.4, -0.3, 1e-4).map_err(err)?;
                ensure((t - t_kernel(0.4, -0.3)).abs() <= 1e-6, format!("{t}"))
            }),
        Group::new("diagonal positivity and recursion")
            .check("positivity", |_| {
                for alpha in [0.0, 1.0, 2.0, 3.0] {
                    for x in grid(-6.0, 6.0, 25) {
                        if !(i_alpha(alpha, x, x).map_err(err)? > 0.0) {
                            return Err(format!("α = {alpha}, x = {x}"));
                        }
                    }
                }
                Ok(String::new())
            })
            .check("recursion", |_| {
                let mut worst: f64 = 0.0;
                for (alpha, x) in [(1.0, 0.0), (1.0, -3.0), (2.0, -2.0), (2.0, 1.0), (3.0, 0.5)] {
                    let (l, r) = diag_recursion_check(alpha, x).map_err(err)?;
                    worst = worst.max((l - r).abs());
                }
                ensure(worst <= 1e-7, format!("max difference {worst:e}"))
            }),
        Group::new("exact oracle")
            .check("third moment drops out", |_| {
                for kind in [EnsembleKind::Hermitian, EnsembleKind::RealSymmetric] {
                    let v = kind.target_variance();
                    for n in 1..=5 {
                        let base = oracle_f(
                            kind,
                            &MomentProfile::new(v, 0.0, 2.0 * v * v).map_err(err)?,
                            n,
                            0.4,
                            -0.9,
                        )
                        .map_err(err)?;
                        for m3 in [-1.0, 1.0] {
                            let p = MomentProfile::new(v, m3, 2.0 * v * v).map_err(err)?;
                            let x = oracle_f(kind, &p, n, 0.4, -0.9).map_err(err)?;
                            if (x - base).abs() > 1e-12 * base.abs().max(1.0) {
                                return Err(format!("{kind:?} n = {n}"));
                            }
                        }
                    }
                }
                Ok(String::new())
            })
            .check("oracle equals contour extraction", |_| oracle_vs_egf(1e-10)),
        Group::new("gue link").check("f_N = √(2π) N! e^{(μ²+ν²)/4} K_{N+1}", |_| {
            gue_link(40, 1e-8)
        }),
        Group::new("radius independence")
            .check("radius 0.5 vs saddle circle", |_| radius_independence(1e-9)),
        Group::new("edge limits")
            .check("convergence", |fast| {
                let ns: &[u64] = if fast {
                    &[125, 1000]
                } else {
                    &[125, 1000, 8000]
                };
                let mut detail = String::new();
                for alpha in [1.0, 2.0] {
                    for (mu, nu) in [(0.0, 0.0), (0.0, 1.0), (-1.0, 1.0)] {
                        let lim = i_alpha(alpha, mu, nu).map_err(err)?;
                        let errs: Vec<f64> = ns
                            .iter()
                            .map(|&n| edge_scaled_f(alpha, 0.0, mu, nu, n).map(|v| (v - lim).abs()))
                            .collect::<crate::Result<_>>()
                            .map_err(err)?;
                        if errs.windows(2).any(|w| w[1] >= w[0]) {
                            return Err(format!("α = {alpha} ({mu}, {nu}): {errs:?}"));
                        }
                        if !fast {
                            let ratio = errs[1] / errs[2];
                            if !(1.4..=3.0).contains(&ratio) {
                                return Err(format!("α = {alpha} ({mu}, {nu}): ratio {ratio}"));
                            }
                            detail += &format!("{ratio:.3} ");
                        }
                    }
                }
                Ok(detail)
            })
            .check("b* enters as a factor", |_| {
                let (n, mu, nu) = (60u64, edge_point(60, 0.3), edge_point(60, -0.2));
                let c = |bstar: f64, k: u64| {
                    EgfParams::new(1.0, bstar, mu, nu)
                        .and_then(|p| extract_coefficient(&ContourJob::new(p, k)))
                        .map(|v| v.0)
                };
                let mut series = ScaledReal::ZERO;
                let mut inv_factorial = 1.0;
                for k in 0..=n / 2 {
                    series = series + c(0.0, n - 2 * k).map_err(err)? * inv_factorial;
                    inv_factorial /= (k + 1) as f64;
                }
                let direct = c(1.0, n).map_err(err)?;
                ensure(
                    (series.log_mag() - direct.log_mag()).abs() < 1e-10,
                    format!("{series} vs {direct}"),
                )
            })
            .check("b* deficit decays like N^(-1/3)", |fast| {
                let ns: &[u64] = if fast { &[125, 1000] } else { &[125, 1000, 8000, 64000] };
                let deficits: Vec<f64> = ns
                    .iter()
                    .map(|&n| {
                        let with = edge_scaled_f(1.0, 1.0, 0.0, 0.0, n)?;
                        Ok(1.0 - (with / edge_scaled_f(1.0, 0.0, 0.0, 0.0, n)?).ln())
                    })
                    .collect::<crate::Result<_>>()
                    .map_err(err)?;
                let ratios: Vec<f64> = deficits.windows(2).map(|w| w[0] / w[1]).collect();
                ensure(
                    deficits.iter().all(|&d| d > 0.0) && ratios.iter().all(|r| (1.6..=2.6).contains(r)),
                    format!("deficit ratios {ratios:?}"),
                )
            })
            .check("mean is negligible", |fast| {
                if fast {
                    return Ok("skipped".into());
                }
                let v = edge_scaled_mean_product(1.0, 0.0, 0.0, 4096).map_err(err)?;
                ensure(v.abs() < 0.05, format!("{v:e}"))
            }),
        Group::new("edge correlation")
            .check("sigma near the kernel ratio", |fast| {
                let ns: &[u64] = if fast { &[1024] } else { &[1024, 4096] };
                for (alpha, mu, nu, tol) in [(1.0, 0.0, 1.0, 0.1), (2.0, -1.0, 2.0, 0.15)] {
                    let ratio = i_alpha(alpha, mu, nu).map_err(err)?
                        / (i_alpha(alpha, mu, mu).map_err(err)?
                            * i_alpha(alpha, nu, nu).map_err(err)?)
                        .sqrt();
                    let errs: Vec<f64> = ns
                        .iter()
                        .map(|&n| edge_sigma(alpha, 0.0, mu, nu, n).map(|s| (s - ratio).abs()))
                        .collect::<crate::Result<_>>()
                        .map_err(err)?;
                    if errs.iter().any(|&e| e > tol) || errs.windows(2).any(|w| w[1] >= w[0]) {
                        return Err(format!("α = {alpha}: {errs:?}"));
                    }
                }
                Ok(String::new())
            })
            .check("exactly one on the diagonal", |_| {
                ensure(
                    edge_sigma(2.0, 0.0, 0.3, 0.3, 500).map_err(err)? == 1.0,
                    "σ(x, x)",
                )
            }),
        Group::new("bulk limits").check("approach to S and T", |_| {
            for (alpha, mu, nu, lim) in [(1.0, 0.0, 0.5, 2.0 / PI), (2.0, 0.0, 1.0, 2.0)] {
                let mut last = f64::INFINITY;
                for n in [64, 128, 256] {
                    let e = bulk_evaluate(alpha, 0.0, 0.0, mu, nu, n).map_err(err)?;
                    let d = (e.scaled - lim).abs();
                    if d >= last || e.saddle.condition >= 1e12 {
                        return Err(format!("α = {alpha}, N = {n}: error {d:e}"));
                    }
                    last = d;
                }
            }
            Ok(String::new())
        }),
        Group::new("monte carlo").check("agreement with the oracle", |_| {
            let points = vec![(0.5, -0.5), (0.0, 0.0), (1.0, 0.3)];
            for ensemble in [EnsembleKind::Hermitian, EnsembleKind::RealSymmetric] {
                let cfg = MCConfig {
                    ensemble,
                    dist: EntryDist::for_ensemble(EntryKind::Rademacher, ensemble).map_err(err)?,
                    n: 3,
                    samples: 20_000,
                    seed: 11,
                    points: points.clone(),
                };
                for (est, &(mu, nu)) in estimate_f(&cfg).map_err(err)?.iter().zip(&points) {
                    let want = oracle_f(ensemble, &cfg.dist.moments(), 3, mu, nu).map_err(err)?;
                    let got = est.mean.to_real_checked().map_err(err)?;
                    let se = est.stderr.to_real_checked().map_err(err)?;
                    if (got - want).abs() > 4.0 * se {
                        return Err(format!("{ensemble:?} ({mu}, {nu}): {got} ± {se} vs {want}"));
                    }
                }
            }
            Ok(String::new())
        }),
    ]
}

/// Grid on which every `f_N`, `N ≤ 5`, is well away from zero for the presets.
pub const ORACLE_GRID: [f64; 3] = [-0.8, 0.1, 0.9];

/// Largest relative mismatch between oracle and contour extraction over both
/// ensembles, both presets, `N ≤ 5` and the oracle grid.
pub fn oracle_vs_egf_worst() -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for kind in [EnsembleKind::Hermitian, EnsembleKind::RealSymmetric] {
        for m in [
            MomentProfile::gaussian(kind),
            MomentProfile::rademacher(kind),
        ] {
            for n in 1..=5u64 {
                for &mu in &ORACLE_GRID {
                    for &nu in &ORACLE_GRID {
                        let exact = oracle_f(kind, &m, n as usize, mu, nu)?;
                        let p = EgfParams::new(kind.alpha(), m.bstar(kind), mu, nu)?;
                        let got = extract_f(&ContourJob::new(p, n))?.0.to_real_checked()?;
                        worst = worst.max(rel(got, exact));
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn oracle_vs_egf(tol: f64) -> Check {
    let worst = oracle_vs_egf_worst().map_err(err)?;
    ensure(worst <= tol, format!("max relative difference {worst:e}"))
}

/// Largest log-magnitude mismatch in the GUE link for `N ≤ max_n`.
pub fn gue_link_worst(max_n: u64) -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 1..=max_n {
        for (mu, nu) in [(0.0, 0.0), (0.3, -0.7), (1.0, 1.0)] {
            let p = EgfParams::new(1.0, 0.0, mu, nu)?;
            let got = extract_f(&ContourJob::new(p, n))?.0;
            let want = gue_kernel(n as u32 + 1, mu, nu)
                .scale_exp(0.5 * (2.0 * PI).ln() + ln_factorial(n) + (mu * mu + nu * nu) / 4.0);
            let d = if got.sign() == want.sign() {
                (got.log_mag() - want.log_mag()).abs()
            } else {
                f64::INFINITY
            };
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn gue_link(max_n: u64, tol: f64) -> Check {
    let worst = gue_link_worst(max_n).map_err(err)?;
    ensure(worst <= tol, format!("max relative difference {worst:e}"))
}

/// Largest log-magnitude mismatch between radius 0.5 and the default circle.
pub fn radius_independence_worst() -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for n in [5u64, 20, 50] {
        for alpha in [1.0, 2.0] {
            let p = EgfParams::new(alpha, 0.3, edge_point(n, 0.4), edge_point(n, -0.6))?;
            let a = extract_f(&ContourJob::new(p, n))?.0;
            let b = extract_f(&ContourJob::new(p, n).with_radius(0.5))?.0;
            let d = if a.sign() == b.sign() {
                (a.log_mag() - b.log_mag()).abs()
            } else {
                f64::INFINITY
            };
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn radius_independence(tol: f64) -> Check {
    let worst = radius_independence_worst().map_err(err)?;
    ensure(worst <= tol, format!("max relative difference {worst:e}"))
}

/// Runs every group; `fast` skips orders at or above [`FAST_N_LIMIT`].
pub fn selftest(fast: bool) -> SelftestReport {
    let started = Instant::now();
    let groups = groups().iter().map(|g| g.run(fast)).collect();
    SelftestReport {
        fast,
        groups,
        seconds: started.elapsed().as_secs_f64(),
    }
}
