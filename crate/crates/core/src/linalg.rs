//! Dense complex linear-algebra helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// max |U†U − I|.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - identity(n)))
}

pub fn hermiticity_residual(h: &CMat) -> f64 {
    max_abs(&(h - h.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so tiny anti-Hermitian noise does not leak
/// into the solver.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// exp(−i H dt) for Hermitian H.
pub fn expm_hermitian(h: &CMat, dt: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let mut scaled = vecs.clone();
    for (k, e) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, -e * dt);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    scaled * vecs.adjoint()
}

/// Modified Gram–Schmidt (two passes) on the columns of `m`; columns whose
/// remaining norm drops below `tol` are discarded.
pub fn orthonormalize_columns(m: &CMat, tol: f64) -> CMat {
    let mut out: Vec<CVec> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: CVec = m.column(j).into_owned();
        let n0 = v.norm();
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let p = q.dotc(&v);
                v.axpy(-p, q, ONE);
            }
        }
        let n = v.norm();
        if n > tol * n0.max(1.0) {
            out.push(v.unscale(n));
        }
    }
    if out.is_empty() {
        return CMat::zeros(m.nrows(), 0);
    }
    CMat::from_columns(&out)
}

/// Complex matrix with i.i.d. standard normal real and imaginary parts.
pub fn random_complex<R: rand_core::RngCore>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(normal(rng), normal(rng)))
}

/// Haar-ish random unitary from the QR of a Ginibre matrix.
pub fn random_unitary<R: rand_core::RngCore>(rng: &mut R, n: usize) -> CMat {
    let g = random_complex(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        u.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    u
}

/// Uniform sample in [0, 1).
pub fn uniform<R: rand_core::RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal sample (Box–Muller).
pub fn normal<R: rand_core::RngCore>(rng: &mut R) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

/// Kahan-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: C64,
    comp: C64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: C64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum
    }
}
