//! Determinants by LU factorization with partial pivoting.

use std::ops::{Div, Mul, Sub};

use num_complex::Complex64;

pub(crate) trait Scalar:
    Copy + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Div<f64, Output = Self>
{
    const ONE: Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    const ONE: Self = 1.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const ONE: Self = Complex64 { re: 1.0, im: 0.0 };
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Determinant of the row-major `n × n` matrix `a` as `(phase, log|det|)` with
/// `|phase| = 1`, or `None` when a pivot column is exactly zero. Destroys `a`.
pub(crate) fn log_det<T: Scalar>(a: &mut [T], n: usize) -> Option<(T, f64)> {
    debug_assert_eq!(a.len(), n * n);
    let mut phase = T::ONE;
    let mut log_abs = 0.0;
    let mut flip = false;
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, a[i * n + k].modulus()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return None;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            flip = !flip;
        }
        let pivot = a[k * n + k];
        log_abs += best.ln();
        phase = phase * (pivot / best);
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            for c in k + 1..n {
                a[i * n + c] = a[i * n + c] - factor * a[k * n + c];
            }
        }
    }
    if flip {
        phase = phase / -1.0;
    }
    Some((phase, log_abs))
}
