use std::collections::HashMap;
use std::time::Instant;

use serde_json::json;

use crate::egf::{
    bulk_evaluate, default_points, default_radius, edge_evaluate, edge_point, extract_f,
    sigma_alpha, sigma_evaluate, ContourJob, EgfParams, CONDITION_LIMIT, MAX_BULK_N,
};
use crate::error::{Error, Result};
use crate::kernels::{
    airy_kernel, airy_product, b_kernel, i_alpha, operator_step, sine_kernel, t_kernel,
};
use crate::mc::{estimate_f, estimate_sigma, EntryDist, MCConfig};
use crate::numeric::ScaledReal;
use crate::oracle::{oracle_f, EnsembleKind, MAX_ORACLE_F_N};
use crate::special::airy;

use super::report::{Row, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum LimitKind {
    IAlpha,
    Sine,
    T,
}

/// Runs commands and caches limit values for the lifetime of the run.
#[derive(Debug, Default)]
pub struct Harness {
    deterministic: bool,
    command: Option<String>,
    cache: HashMap<(LimitKind, u64, u64, u64), f64>,
}

impl Harness {
    pub fn new() -> Self {
        Self::default()
    }

    /// Omit the wall-clock field so reports are byte-reproducible.
    pub fn deterministic(mut self, on: bool) -> Self {
        self.deterministic = on;
        self
    }

    /// Command line echoed into every report.
    pub fn command_line(mut self, line: impl Into<String>) -> Self {
        self.command = Some(line.into());
        self
    }

    fn limit(&mut self, kind: LimitKind, alpha: f64, mu: f64, nu: f64) -> Result<f64> {
        let key = (kind, alpha.to_bits(), mu.to_bits(), nu.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = match kind {
            LimitKind::IAlpha => i_alpha(alpha, mu, nu)?,
            LimitKind::Sine => sine_kernel(mu, nu),
            LimitKind::T => t_kernel(mu, nu),
        };
        self.cache.insert(key, v);
        Ok(v)
    }

    fn start(&self, name: &str) -> (RunReport, Instant) {
        let line = self.command.clone().unwrap_or_else(|| name.to_string());
        (RunReport::new(&line), Instant::now())
    }

    fn finish(&self, mut report: RunReport, started: Instant) -> RunReport {
        if !self.deterministic {
            report.wall_clock_s = Some(started.elapsed().as_secs_f64());
        }
        report
    }

    /// Edge-normalized `f_N` against `exp(b*) I^{(α)}(μ, ν)`.
    pub fn edge(
        &mut self,
        alpha: f64,
        bstar: f64,
        mu: f64,
        nu: f64,
        n_list: &[u64],
    ) -> Result<RunReport> {
        check_ascending(n_list)?;
        EgfParams::new(alpha, bstar, mu, nu)?;
        let (mut report, started) = self.start("edge");
        record_point(&mut report, alpha, bstar, mu, nu, n_list);
        let limit = bstar.exp() * self.limit(LimitKind::IAlpha, alpha, mu, nu)?;
        let mut contours = Vec::new();
        for &n in n_list {
            match edge_evaluate(alpha, bstar, mu, nu, n) {
                Ok(e) => {
                    contours.push(json!({
                        "N": n,
                        "radius": default_radius(n),
                        "points": default_points(n),
                        "shift": e.saddle.shift,
                    }));
                    if e.saddle.is_ill_conditioned() {
                        report.warn(n, "edge", ill_conditioned(e.saddle.condition));
                    }
                    report.push(
                        Row::new(n, e.raw, e.scaled, limit, "edge")
                            .at(mu, nu)
                            .with_condition(e.saddle.condition),
                    );
                }
                Err(err) => report.flag(n, "edge", err.to_string()),
            }
        }
        report.diagnostic("contours", contours);
        if let Some(slope) = log_log_slope(&report.rows) {
            report.diagnostic("error_slope", slope);
        }
        Ok(self.finish(report, started))
    }

    /// `σ` at edge points against `I(μ,ν)/√(I(μ,μ) I(ν,ν))`.
    pub fn corr(
        &mut self,
        alpha: f64,
        bstar: f64,
        mu: f64,
        nu: f64,
        n_list: &[u64],
    ) -> Result<RunReport> {
        check_ascending(n_list)?;
        EgfParams::new(alpha, bstar, mu, nu)?;
        let (mut report, started) = self.start("corr");
        record_point(&mut report, alpha, bstar, mu, nu, n_list);
        let ratio = self.limit(LimitKind::IAlpha, alpha, mu, nu)?
            / (self.limit(LimitKind::IAlpha, alpha, mu, mu)?
                * self.limit(LimitKind::IAlpha, alpha, nu, nu)?)
            .sqrt();
        for &n in n_list {
            let (mu_n, nu_n) = (edge_point(n, mu), edge_point(n, nu));
            let evaluated = sigma_evaluate(alpha, bstar, mu_n, nu_n, n).and_then(|s| {
                if s.f_cross.is_zero() {
                    let job = ContourJob::new(EgfParams::new(alpha, bstar, mu_n, nu_n)?, n);
                    let (f, d) = extract_f(&job)?;
                    Ok((s.sigma, f, d.condition))
                } else {
                    Ok((s.sigma, s.f_cross, s.condition))
                }
            });
            match evaluated {
                Ok((sigma, f, condition)) => {
                    if !(condition <= CONDITION_LIMIT) {
                        report.warn(n, "corr", ill_conditioned(condition));
                    }
                    report.push(
                        Row::new(n, f, sigma, ratio, "corr")
                            .at(mu, nu)
                            .with_condition(condition),
                    )
                }
                Err(err) => report.flag(n, "corr", err.to_string()),
            }
        }
        Ok(self.finish(report, started))
    }

    /// Bulk-normalized `f_N` against `exp(b*)𝕊` (α = 1) or `exp(b*)𝕋` (α = 2).
    pub fn bulk(
        &mut self,
        alpha: f64,
        bstar: f64,
        xi: f64,
        mu: f64,
        nu: f64,
        n_list: &[u64],
    ) -> Result<RunReport> {
        check_ascending(n_list)?;
        let kind = if alpha == 1.0 {
            LimitKind::Sine
        } else if alpha == 2.0 {
            LimitKind::T
        } else {
            return Err(Error::InvalidArgument(format!(
                "bulk needs alpha 1 or 2, got {alpha}"
            )));
        };
        if let Some(&n) = n_list.iter().find(|&&n| n > MAX_BULK_N) {
            return Err(Error::InvalidArgument(format!(
                "bulk order {n} exceeds {MAX_BULK_N}"
            )));
        }
        let (mut report, started) = self.start("bulk");
        record_point(&mut report, alpha, bstar, mu, nu, n_list);
        report.param("xi", xi);
        let limit = bstar.exp() * self.limit(kind, alpha, mu, nu)?;
        let mut contours = Vec::new();
        for &n in n_list {
            match bulk_evaluate(alpha, bstar, xi, mu, nu, n) {
                Ok(e) => {
                    let job = ContourJob::bulk(EgfParams::new(alpha, bstar, mu, nu)?, n);
                    contours.push(json!({
                        "N": n,
                        "radius": job.radius,
                        "points": job.points,
                        "shift": e.saddle.shift,
                    }));
                    report.push(
                        Row::new(n, e.raw, e.scaled, limit, "bulk")
                            .at(mu, nu)
                            .with_condition(e.saddle.condition),
                    )
                }
                Err(err @ Error::Domain { .. }) => return Err(err),
                Err(err) => report.flag(n, "bulk", err.to_string()),
            }
        }
        report.diagnostic("contours", contours);
        if let Some(slope) = log_log_slope(&report.rows) {
            report.diagnostic("error_slope", slope);
        }
        Ok(self.finish(report, started))
    }

    /// Monte Carlo estimates of `f_N` and `σ_N` against the exact values.
    pub fn mc(&mut self, cfg: &MCConfig) -> Result<RunReport> {
        cfg.validate()?;
        let (mut report, started) = self.start("mc");
        let moments = cfg.dist.moments();
        let alpha = cfg.ensemble.alpha();
        let bstar = moments.bstar(cfg.ensemble);
        report.param("ensemble", cfg.ensemble);
        report.param("dist", cfg.dist);
        report.param("n", cfg.n);
        report.param("samples", cfg.samples);
        report.param("seed", cfg.seed);
        report.param("points", &cfg.points);
        report.param("alpha", alpha);
        report.param("bstar", bstar);
        let n = cfg.n as u64;

        let f_estimates = estimate_f(cfg)?;
        let mut z_scores = Vec::new();
        let mut oracle_vs_egf: f64 = 0.0;
        for (est, &(mu, nu)) in f_estimates.iter().zip(&cfg.points) {
            let job = ContourJob::new(EgfParams::new(alpha, bstar, mu, nu)?, n);
            let reference = extract_f(&job).and_then(|(egf, diag)| {
                let egf = egf.to_real_checked()?;
                if cfg.n <= MAX_ORACLE_F_N {
                    let exact = oracle_f(cfg.ensemble, &moments, cfg.n, mu, nu)?;
                    oracle_vs_egf = oracle_vs_egf.max((exact - egf).abs() / exact.abs());
                    Ok((exact, diag.condition))
                } else {
                    Ok((egf, diag.condition))
                }
            });
            let row = reference.and_then(|(limit, condition)| {
                let stderr = est.stderr.to_real_checked()?;
                Ok(
                    Row::new(n, est.mean, est.mean.to_real_checked()?, limit, "f")
                        .at(mu, nu)
                        .with_condition(condition)
                        .with_stderr(stderr),
                )
            });
            match row {
                Ok(row) => {
                    z_scores.push(row.abs_err / row.stderr);
                    report.push(row);
                }
                Err(err) => report.flag(n, "f", err.to_string()),
            }
        }
        match estimate_sigma(cfg) {
            Ok(sigmas) => {
                for (est, &(mu, nu)) in sigmas.iter().zip(&cfg.points) {
                    match sigma_alpha(alpha, bstar, mu, nu, n) {
                        Ok(exact) => {
                            let row = Row::new(
                                n,
                                ScaledReal::from_real(est.value),
                                est.value,
                                exact,
                                "sigma",
                            )
                            .at(mu, nu)
                            .with_stderr(est.stderr);
                            if est.stderr > 0.0 {
                                z_scores.push(row.abs_err / row.stderr);
                            }
                            report.push(row);
                        }
                        Err(err) => report.flag(n, "sigma", err.to_string()),
                    }
                }
            }
            Err(err) => report.flag(n, "sigma", err.to_string()),
        }
        if cfg.n <= MAX_ORACLE_F_N {
            report.diagnostic("oracle_vs_egf_rel", oracle_vs_egf);
        }
        report.diagnostic("max_z_score", z_scores.iter().copied().fold(0.0, f64::max));
        Ok(self.finish(report, started))
    }

    /// Exact small-N values against contour extraction.
    pub fn oracle(
        &mut self,
        ensemble: EnsembleKind,
        dist: EntryDist,
        mu: f64,
        nu: f64,
        n_list: &[u64],
    ) -> Result<RunReport> {
        check_ascending(n_list)?;
        if let Some(&n) = n_list
            .iter()
            .find(|&&n| n == 0 || n as usize > MAX_ORACLE_F_N)
        {
            return Err(Error::InvalidArgument(format!(
                "oracle order {n} outside 1..={MAX_ORACLE_F_N}"
            )));
        }
        let moments = dist.moments();
        moments.validate_for(ensemble)?;
        let (mut report, started) = self.start("oracle");
        let alpha = ensemble.alpha();
        let bstar = moments.bstar(ensemble);
        report.param("ensemble", ensemble);
        report.param("dist", dist);
        report.param("moments", moments);
        record_point(&mut report, alpha, bstar, mu, nu, n_list);
        for &n in n_list {
            let row = oracle_f(ensemble, &moments, n as usize, mu, nu).and_then(|exact| {
                let (egf, diag) =
                    extract_f(&ContourJob::new(EgfParams::new(alpha, bstar, mu, nu)?, n))?;
                Ok(Row::new(
                    n,
                    ScaledReal::from_real(exact),
                    exact,
                    egf.to_real_checked()?,
                    "oracle",
                )
                .at(mu, nu)
                .with_condition(diag.condition))
            });
            match row {
                Ok(row) => report.push(row),
                Err(err) => report.flag(n, "oracle", err.to_string()),
            }
        }
        let worst = report
            .rows
            .iter()
            .map(|r| r.abs_err / r.scaled.abs())
            .fold(0.0, f64::max);
        report.diagnostic("max_rel_err", worst);
        Ok(self.finish(report, started))
    }

    /// Every named kernel at `(μ, ν)`, each against an independent route.
    pub fn kernel(&mut self, alpha: f64, mu: f64, nu: f64) -> Result<RunReport> {
        let (mut report, started) = self.start("kernel");
        report.param("alpha", alpha);
        report.param("mu", mu);
        report.param("nu", nu);
        let h = 1e-4;
        let separated = (mu - nu).abs() >= 10.0 * h;
        let sine = sine_kernel(mu, nu);
        let t = t_kernel(mu, nu);
        let t_check = if separated {
            operator_step(|x, y| Ok(sine_kernel(x, y)), mu, nu, h)?
        } else {
            t
        };
        let (ai_mu, ai_nu) = (airy(mu)?.ai, airy(nu)?.ai);
        let general = self.limit(LimitKind::IAlpha, alpha, mu, nu)?;
        let rows = [
            ("sine", sine, sine),
            ("t", t, t_check),
            (
                "airy",
                airy_kernel(mu, nu)?,
                self.limit(LimitKind::IAlpha, 1.0, mu, nu)?,
            ),
            (
                "b",
                b_kernel(mu, nu)?,
                self.limit(LimitKind::IAlpha, 2.0, mu, nu)?,
            ),
            ("airy_product", airy_product(mu, nu)?, ai_mu * ai_nu),
            ("i_alpha", general, general),
        ];
        for (label, value, check) in rows {
            report.push(Row::new(0, ScaledReal::from_real(value), value, check, label).at(mu, nu));
        }
        Ok(self.finish(report, started))
    }
}

fn record_point(report: &mut RunReport, alpha: f64, bstar: f64, mu: f64, nu: f64, n_list: &[u64]) {
    report.param("alpha", alpha);
    report.param("bstar", bstar);
    report.param("mu", mu);
    report.param("nu", nu);
    report.param("n_list", n_list);
}

fn ill_conditioned(condition: f64) -> String {
    format!(
        "condition {condition:e} exceeds {CONDITION_LIMIT:e}; digits may be lost to cancellation"
    )
}

fn check_ascending(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty N list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "N list {n_list:?} is not strictly ascending"
        )));
    }
    if n_list[0] == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    Ok(())
}

/// Least-squares slope of `log(abs_err)` against `log N`.
fn log_log_slope(rows: &[Row]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_err > 0.0)
        .map(|r| ((r.n as f64).ln(), r.abs_err.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
