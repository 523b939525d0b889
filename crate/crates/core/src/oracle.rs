//! Exact finite-N expectations of characteristic polynomials by expanding the
//! determinants over permutations and taking expectations monomial by monomial.
//!
//! Every entry of a Wigner matrix is a polynomial of degree one in independent real
//! variables, so `E[det(X−μ) det(X−ν)]` only needs moments of order ≤ 4. The result
//! is a function of the moment profile alone; that is what makes it a ground truth
//! for the generating-function route.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ORACLE_F_N: usize = 6;
pub const MAX_ORACLE_MEAN_N: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Hermitian,
    RealSymmetric,
}

impl EnsembleKind {
    /// Entry variance the normalization assumes: `1/2` (Hermitian) or `1` (symmetric).
    pub fn target_variance(self) -> f64 {
        match self {
            EnsembleKind::Hermitian => 0.5,
            EnsembleKind::RealSymmetric => 1.0,
        }
    }

    /// The exponent `α` of the generating function: 1 (Hermitian) or 2 (symmetric).
    pub fn alpha(self) -> f64 {
        match self {
            EnsembleKind::Hermitian => 1.0,
            EnsembleKind::RealSymmetric => 2.0,
        }
    }
}

/// Moments `m1..m4` of the entry distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MomentProfile {
    pub fn new(m2: f64, m3: f64, m4: f64) -> Result<Self> {
        let p = Self {
            m1: 0.0,
            m2,
            m3,
            m4,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m1 != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "m1 must be 0, got {}",
                self.m1
            )));
        }
        if !(self.m2 > 0.0) || !self.m3.is_finite() || !self.m4.is_finite() {
            return Err(Error::InvalidArgument(
                "m2 must be positive and moments finite".into(),
            ));
        }
        if self.m4 < self.m2 * self.m2 {
            return Err(Error::InvalidArgument(format!(
                "m4 = {} violates m4 ≥ m2² = {}",
                self.m4,
                self.m2 * self.m2
            )));
        }
        Ok(())
    }

    /// Checks the variance normalization the ensemble expects.
    pub fn validate_for(&self, kind: EnsembleKind) -> Result<()> {
        self.validate()?;
        if self.m2 != kind.target_variance() {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} entries need m2 = {}, got {}",
                kind.target_variance(),
                self.m2
            )));
        }
        Ok(())
    }

    /// Gaussian entries with the ensemble's variance: `m4 = 3 m2²`.
    pub fn gaussian(kind: EnsembleKind) -> Self {
        let v = kind.target_variance();
        Self {
            m1: 0.0,
            m2: v,
            m3: 0.0,
            m4: 3.0 * v * v,
        }
    }

    /// Symmetric ±√m2 entries: `m4 = m2²`.
    pub fn rademacher(kind: EnsembleKind) -> Self {
        let v = kind.target_variance();
        Self {
            m1: 0.0,
            m2: v,
            m3: 0.0,
            m4: v * v,
        }
    }

    /// The generating-function parameter `b*`: `b − 3/4` for Hermitian entries,
    /// `(b̃ − 3)/2` for real-symmetric ones.
    pub fn bstar(&self, kind: EnsembleKind) -> f64 {
        match kind {
            EnsembleKind::Hermitian => self.m4 - 0.75,
            EnsembleKind::RealSymmetric => 0.5 * (self.m4 - 3.0),
        }
    }

    fn moment(&self, p: usize) -> f64 {
        match p {
            0 => 1.0,
            1 => self.m1,
            2 => self.m2,
            3 => self.m3,
            4 => self.m4,
            _ => f64::NAN,
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Per-variable expectation tables for one ensemble, moment profile and pair of
/// spectral parameters.
struct MomentTables {
    /// `E[(√2R − μ)^a (√2R − ν)^b]` for `a, b ∈ {0, 1}`.
    diag: [[f64; 2]; 2],
    /// `E[X_ij^p X_ji^q]` for an off-diagonal pair, `p, q ≤ 2`.
    off: [[Complex64; 3]; 3],
}

impl MomentTables {
    fn new(kind: EnsembleKind, m: &MomentProfile, mu: f64, nu: f64) -> Self {
        let s2 = std::f64::consts::SQRT_2;
        let diag = [
            [1.0, s2 * m.m1 - nu],
            [s2 * m.m1 - mu, 2.0 * m.m2 - s2 * m.m1 * (mu + nu) + mu * nu],
        ];
        let mut off = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (p, row) in off.iter_mut().enumerate() {
            for (q, cell) in row.iter_mut().enumerate() {
                *cell = match kind {
                    EnsembleKind::RealSymmetric => Complex64::new(m.moment(p + q), 0.0),
                    EnsembleKind::Hermitian => {
                        // (R + iI)^p (R − iI)^q expanded binomially in R and I
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..=p {
                            for l in 0..=q {
                                let re_pow = k + l;
                                let im_pow = (p - k) + (q - l);
                                let unit = Complex64::i().powu((p - k) as u32)
                                    * (-Complex64::i()).powu((q - l) as u32);
                                acc += unit
                                    * binomial(p, k)
                                    * binomial(q, l)
                                    * m.moment(re_pow)
                                    * m.moment(im_pow);
                            }
                        }
                        acc
                    }
                };
            }
        }
        Self { diag, off }
    }
}

/// All permutations of `0..n` with their signs, in lexicographic order.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push((perm.clone(), permutation_sign(&perm)));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1.0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = p[k];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Product of expectations for the multiset of entries picked by one or two
/// permutations. `counts[i][j]` is how often entry `(i, j)` occurs, `fixed` marks
/// diagonal picks for the first and second determinant.
fn monomial_expectation(
    n: usize,
    counts: &[[u8; MAX_ORACLE_MEAN_N]; MAX_ORACLE_MEAN_N],
    fixed_a: &[bool],
    fixed_b: &[bool],
    tables: &MomentTables,
) -> Complex64 {
    let mut value = Complex64::new(1.0, 0.0);
    for i in 0..n {
        value *= tables.diag[usize::from(fixed_a[i])][usize::from(fixed_b[i])];
        for j in i + 1..n {
            let (p, q) = (counts[i][j] as usize, counts[j][i] as usize);
            if p + q > 0 {
                value *= tables.off[p][q];
            }
        }
        if value == Complex64::new(0.0, 0.0) {
            break;
        }
    }
    value
}

fn check_n(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::InvalidArgument(format!(
            "oracle size n = {n} outside 1..={max}"
        )));
    }
    Ok(())
}

/// `E[det(X_n − μ) det(X_n − ν)]` for `1 ≤ n ≤ 6`.
pub fn oracle_f(
    kind: EnsembleKind,
    moments: &MomentProfile,
    n: usize,
    mu: f64,
    nu: f64,
) -> Result<f64> {
    check_n(n, MAX_ORACLE_F_N)?;
    moments.validate()?;
    let tables = MomentTables::new(kind, moments, mu, nu);
    let perms = permutations(n);
    // one partial sum per first permutation, reduced in index order
    let partials: Vec<Complex64> = perms
        .par_iter()
        .map(|(sigma, sgn_s)| {
            let fixed_a: Vec<bool> = (0..n).map(|i| sigma[i] == i).collect();
            let mut base = [[0u8; MAX_ORACLE_MEAN_N]; MAX_ORACLE_MEAN_N];
            for i in 0..n {
                base[i][sigma[i]] += 1;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (tau, sgn_t) in &perms {
                let mut counts = base;
                let mut fixed_b = [false; MAX_ORACLE_MEAN_N];
                for i in 0..n {
                    counts[i][tau[i]] += 1;
                    fixed_b[i] = tau[i] == i;
                }
                acc += monomial_expectation(n, &counts, &fixed_a, &fixed_b[..n], &tables) * *sgn_t;
            }
            acc * *sgn_s
        })
        .collect();
    let total: Complex64 = partials.iter().sum();
    Ok(total.re)
}

/// `E[det(X_n − λ)]` for `1 ≤ n ≤ 7`.
pub fn oracle_mean(
    kind: EnsembleKind,
    moments: &MomentProfile,
    n: usize,
    lambda: f64,
) -> Result<f64> {
    check_n(n, MAX_ORACLE_MEAN_N)?;
    moments.validate()?;
    // second determinant absent: its diagonal factor is the constant 1
    let tables = MomentTables::new(kind, moments, lambda, 0.0);
    let none = vec![false; n];
    let total: Complex64 = permutations(n)
        .iter()
        .map(|(sigma, sgn)| {
            let fixed: Vec<bool> = (0..n).map(|i| sigma[i] == i).collect();
            let mut counts = [[0u8; MAX_ORACLE_MEAN_N]; MAX_ORACLE_MEAN_N];
            for i in 0..n {
                counts[i][sigma[i]] += 1;
            }
            monomial_expectation(n, &counts, &fixed, &none, &tables) * *sgn
        })
        .sum();
    Ok(total.re)
}
