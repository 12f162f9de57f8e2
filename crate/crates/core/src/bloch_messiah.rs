//! Bloch–Messiah decomposition X = C X̄ D†, Y = C* Ȳ D† of a canonical
//! Bogoliubov pair.
//!
//! Columns are ordered empty block, paired blocks (two columns each), then the
//! occupied block. On a paired block X̄ = x·1 and Ȳ = y·[[0, 1], [−1, 0]].

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evolution::BogoliubovXY;
use crate::linalg::{eigh, max_abs, CMat, CVec, C64, ONE};

/// Block classification threshold on singular values of Y.
pub const EPS_BM: f64 = 1e-8;
/// Gap below which singular values of Y (all in [0, 1]) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
pub const CANONICITY_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct BlochMessiahForm {
    pub c: CMat,
    pub d: CMat,
    pub n_empty: usize,
    /// (x_k, y_k) per paired block.
    pub pairs: Vec<(f64, f64)>,
    pub n_occupied: usize,
}

/// [[0, 1], [−1, 0]] blocks.
fn j_matrix(p: usize) -> CMat {
    let mut j = CMat::zeros(2 * p, 2 * p);
    for k in 0..p {
        j[(2 * k, 2 * k + 1)] = ONE;
        j[(2 * k + 1, 2 * k)] = -ONE;
    }
    j
}

/// Q with G = Q Jᵀ Qᵀ for an antisymmetric unitary G.
fn youla(g: &CMat) -> Result<CMat> {
    let n = g.nrows();
    if n % 2 == 1 {
        return Err(Error::Numerical(alloc::string::String::from(
            "paired block has odd dimension",
        )));
    }
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    let mut probe = 0;
    while cols.len() < n {
        // Next unit vector orthogonal to everything chosen so far.
        let mut q2 = None;
        while probe < n {
            let mut v = CVec::zeros(n);
            v[probe] = ONE;
            probe += 1;
            for _ in 0..2 {
                for c in &cols {
                    let p = c.dotc(&v);
                    v.axpy(-p, c, ONE);
                }
            }
            let nv = v.norm();
            if nv > 0.5 {
                q2 = Some(v.unscale(nv));
                break;
            }
        }
        let q2 = q2.ok_or_else(|| Error::Numerical(alloc::string::String::from("Youla basis exhausted")))?;
        let mut q1 = -(g * q2.conjugate());
        // Clean roundoff against earlier columns.
        for c in &cols {
            let p = c.dotc(&q1);
            q1.axpy(-p, c, ONE);
        }
        let n1 = q1.norm();
        q1.unscale_mut(n1);
        cols.push(q1);
        cols.push(q2);
    }
    Ok(CMat::from_columns(&cols))
}

/// Closest matrix with orthonormal columns, Z (Z†Z)^(−1/2).
fn lowdin(z: &CMat) -> Result<CMat> {
    let (lam, u) = eigh(&(z.adjoint() * z));
    if lam.iter().any(|&l| l.is_nan() || l <= 0.0) {
        return Err(Error::Numerical(alloc::string::String::from("rank-deficient paired block")));
    }
    let inv = CMat::from_diagonal(&CVec::from_iterator(lam.len(), lam.iter().map(|&l| C64::from(1.0 / libm::sqrt(l)))));
    Ok(z * &u * inv * u.adjoint())
}

pub fn bloch_messiah(xy: &BogoliubovXY) -> Result<BlochMessiahForm> {
    let m = xy.x.nrows();
    let (x, y) = (&xy.x, &xy.y);
    let canon = max_abs(&(x.adjoint() * x + y.adjoint() * y - CMat::identity(m, m)));
    if canon > CANONICITY_TOL {
        return Err(Error::CanonicityViolation { residual: canon });
    }
    if m == 0 {
        return Ok(BlochMessiahForm {
            c: CMat::zeros(0, 0),
            d: CMat::zeros(0, 0),
            n_empty: 0,
            pairs: Vec::new(),
            n_occupied: 0,
        });
    }
    // nalgebra's complex SVD loses accuracy on degenerate spectra, which a
    // canonical Y always has, so work from the eigenvectors of Y†Y. Norms of
    // the image columns give x_k and y_k to absolute precision.
    let (_, v) = eigh(&(y.adjoint() * y));
    let yv = y * &v;
    let xv = x * &v;
    let sig: Vec<f64> = (0..m).map(|k| yv.column(k).norm()).collect();
    let xsig: Vec<f64> = (0..m).map(|k| xv.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| sig[a].total_cmp(&sig[b]));
    // Near-equal values are grouped on the unit scale before classification,
    // so a pair straddling a threshold stays together.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(cl) if sig[k] - sig[*cl.last().unwrap()] <= DEGENERACY_TOL => cl.push(k),
            _ => clusters.push(alloc::vec![k]),
        }
    }
    let mean = |s: &[f64], cl: &[usize]| cl.iter().map(|&k| s[k]).sum::<f64>() / cl.len() as f64;
    let mut empty = Vec::new();
    let mut occupied = Vec::new();
    let mut paired = Vec::new();
    for cl in clusters {
        if mean(&sig, &cl) < EPS_BM {
            empty.extend(cl);
        } else if mean(&xsig, &cl) < EPS_BM {
            occupied.extend(cl);
        } else {
            paired.push(cl);
        }
    }
    let clusters = paired;
    let mut c = CMat::zeros(m, m);
    let mut d = CMat::zeros(m, m);
    let mut col = 0;
    for &k in &empty {
        d.set_column(col, &v.column(k));
        c.set_column(col, &xv.column(k).unscale(xsig[k]));
        col += 1;
    }
    let mut pairs = Vec::new();
    for cl in &clusters {
        if cl.len() % 2 == 1 {
            return Err(Error::Numerical(alloc::format!(
                "odd degenerate paired cluster at y = {}",
                sig[cl[0]]
            )));
        }
        let p = cl.len() / 2;
        let ys = mean(&sig, cl);
        let xs = mean(&xsig, cl);
        let vs = CMat::from_columns(&cl.iter().map(|&k| v.column(k).into_owned()).collect::<Vec<_>>());
        let ws = lowdin(&(y * &vs))?;
        let g = ws.transpose() * x * &vs * C64::from(1.0 / xs);
        let g = (&g - g.transpose()) * C64::from(0.5);
        let q = youla(&g)?;
        let r = q.conjugate();
        let ds = &vs * &r;
        let cs = (&ws * &r * j_matrix(p).transpose()).conjugate();
        for k in 0..2 * p {
            d.set_column(col + k, &ds.column(k));
            c.set_column(col + k, &cs.column(k));
        }
        for _ in 0..p {
            pairs.push((xs, ys));
        }
        col += 2 * p;
    }
    for &k in &occupied {
        d.set_column(col, &v.column(k));
        c.set_column(col, &yv.column(k).unscale(sig[k]).conjugate());
        col += 1;
    }
    Ok(BlochMessiahForm {
        c,
        d,
        n_empty: empty.len(),
        pairs,
        n_occupied: occupied.len(),
    })
}

impl BlochMessiahForm {
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn x_bar(&self) -> CMat {
        let m = self.dim();
        let mut xb = CMat::zeros(m, m);
        for k in 0..self.n_empty {
            xb[(k, k)] = ONE;
        }
        for (p, &(x, _)) in self.pairs.iter().enumerate() {
            let o = self.n_empty + 2 * p;
            xb[(o, o)] = C64::from(x);
            xb[(o + 1, o + 1)] = C64::from(x);
        }
        xb
    }

    pub fn y_bar(&self) -> CMat {
        let m = self.dim();
        let mut yb = CMat::zeros(m, m);
        for (p, &(_, y)) in self.pairs.iter().enumerate() {
            let o = self.n_empty + 2 * p;
            yb[(o, o + 1)] = C64::from(y);
            yb[(o + 1, o)] = C64::from(-y);
        }
        for k in m - self.n_occupied..m {
            yb[(k, k)] = ONE;
        }
        yb
    }

    /// max(‖X − CX̄D†‖, ‖Y − C*ȲD†‖) entrywise.
    pub fn reconstruction_residual(&self, xy: &BogoliubovXY) -> f64 {
        let dd = self.d.adjoint();
        let rx = max_abs(&(&xy.x - &self.c * self.x_bar() * &dd));
        let ry = max_abs(&(&xy.y - self.c.conjugate() * self.y_bar() * &dd));
        rx.max(ry)
    }

    pub fn unitarity_residual(&self) -> f64 {
        crate::linalg::unitarity_residual(&self.c).max(crate::linalg::unitarity_residual(&self.d))
    }

    /// max_k |x_k² + y_k² − 1|.
    pub fn pair_norm_residual(&self) -> f64 {
        self.pairs
            .iter()
            .fold(0.0, |a, &(x, y)| a.max((x * x + y * y - 1.0).abs()))
    }

    /// log N = Σ_pairs log y_k².
    pub fn log_norm(&self) -> Result<f64> {
        let mut acc = 0.0;
        for &(_, y) in &self.pairs {
            let y2 = y * y;
            if y2 < 1e-300 {
                return Err(Error::VacuumUnderflow { y_squared: y2 });
            }
            acc += libm::log(y2);
        }
        Ok(acc)
    }
}
