//! Pfaffians of complex skew-symmetric matrices by Parlett–Reid
//! tridiagonalization with partial pivoting.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, C64, ONE, ZERO};

/// Complex matrix with Aᵀ = −A.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix(CMat);

impl SkewMatrix {
    /// Checks |A + Aᵀ| ≤ 1e-12·max(1, max|A|), then stores (A − Aᵀ)/2.
    pub fn new(a: CMat) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let res = max_abs(&(&a + a.transpose()));
        if res > 1e-12 * max_abs(&a).max(1.0) {
            return Err(Error::Numerical(alloc::format!(
                "matrix is not skew-symmetric (residual {res:e})"
            )));
        }
        Ok(Self((&a - a.transpose()) * C64::from(0.5)))
    }

    /// Antisymmetrizes the upper triangle without checks.
    pub fn from_upper(a: &CMat) -> Self {
        let n = a.nrows();
        Self(CMat::from_fn(n, n, |i, j| match i.cmp(&j) {
            core::cmp::Ordering::Less => a[(i, j)],
            core::cmp::Ordering::Greater => -a[(j, i)],
            core::cmp::Ordering::Equal => ZERO,
        }))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// pf(A) = exp(log_abs)·phase; `log_abs` is −∞ for a vanishing Pfaffian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogPfaffian {
    pub log_abs: f64,
    pub phase: C64,
}

impl LogPfaffian {
    pub fn zero() -> Self {
        Self {
            log_abs: f64::NEG_INFINITY,
            phase: ONE,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn value(&self) -> C64 {
        if self.is_zero() {
            ZERO
        } else {
            self.phase * libm::exp(self.log_abs)
        }
    }
}

pub fn pfaffian(a: &SkewMatrix) -> C64 {
    log_pfaffian(a).value()
}

/// Log-domain Pfaffian; O(n³).
pub fn log_pfaffian(a: &SkewMatrix) -> LogPfaffian {
    let n = a.dim();
    if n % 2 == 1 {
        return LogPfaffian::zero();
    }
    if n == 0 {
        return LogPfaffian {
            log_abs: 0.0,
            phase: ONE,
        };
    }
    // Row-major working copy.
    let mut m: Vec<C64> = (0..n * n).map(|k| a.0[(k / n, k % n)]).collect();
    let idx = |i: usize, j: usize| i * n + j;
    let mut log_abs = 0.0;
    let mut phase = ONE;
    let scale = m.iter().fold(0.0f64, |s, z| s.max(z.norm()));
    if scale == 0.0 {
        return LogPfaffian::zero();
    }
    let mut tau: Vec<C64> = vec_zero(n);
    let mut col: Vec<C64> = vec_zero(n);
    for k in (0..n - 1).step_by(2) {
        // Pivot: largest |A[i, k]| for i > k.
        let mut kp = k + 1;
        let mut best = m[idx(k + 1, k)].norm();
        for i in k + 2..n {
            let v = m[idx(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                m.swap(idx(k + 1, j), idx(kp, j));
            }
            for i in 0..n {
                m.swap(idx(i, k + 1), idx(i, kp));
            }
            phase = -phase;
        }
        let piv = m[idx(k, k + 1)];
        if piv.norm() <= scale * 1e-300 {
            return LogPfaffian::zero();
        }
        log_abs += libm::log(piv.norm());
        phase *= piv / piv.norm();
        if k + 2 < n {
            for i in k + 2..n {
                tau[i] = m[idx(k, i)] / piv;
                col[i] = m[idx(i, k + 1)];
            }
            for i in k + 2..n {
                let (ti, ci) = (tau[i], col[i]);
                for j in k + 2..n {
                    m[idx(i, j)] += ti * col[j] - ci * tau[j];
                }
            }
        }
    }
    LogPfaffian { log_abs, phase }
}

fn vec_zero(n: usize) -> Vec<C64> {
    alloc::vec![ZERO; n]
}

/// Sum over perfect matchings; exponential, for cross-checks only.
pub fn pfaffian_brute_force(a: &CMat) -> C64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return ZERO;
    }
    let idx: Vec<usize> = (0..n).collect();
    matchings(a, &idx)
}

fn matchings(a: &CMat, idx: &[usize]) -> C64 {
    if idx.is_empty() {
        return ONE;
    }
    let first = idx[0];
    let mut total = ZERO;
    for p in 1..idx.len() {
        let rest: Vec<usize> = idx[1..]
            .iter()
            .enumerate()
            .filter(|(q, _)| q + 1 != p)
            .map(|(_, &v)| v)
            .collect();
        let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
        total += a[(first, idx[p])] * sign * matchings(a, &rest);
    }
    total
}
