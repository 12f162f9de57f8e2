//! Vacuum expectation values ⟨m|A|n(t)⟩ between quasiparticle frames via the
//! block Pfaffian formula.
//!
//! Every elementary operator is a linear fermion o = w†Φ, stored as its Nambu
//! vector w. With α = Ψ₀†w expanded in the reference frame,
//! o = Σ_k conj(α[k]) d_k + conj(α[M+k]) d_k†, so the elementary contraction on
//! the reference vacuum is
//!
//!   ⟨0_d| a b |0_d⟩ = Σ_k conj(α_a[k]) · conj(α_b[M+k]).
//!
//! The evolved vacuum is built as ∏_{P} d̄_k d̄_k̄ ∏_{O} d̄_k |0_d⟩ / √N from the
//! Bloch–Messiah bar basis d̄ = D† d(t), N = ∏_P y_k².

use alloc::vec::Vec;
use core::ops::Range;

use crate::bloch_messiah::{bloch_messiah, BlochMessiahForm};
use crate::error::{Error, Result};
use crate::evolution::{bogoliubov_xy, tau_x_conj, WavefunctionSet};
use crate::linalg::{CMat, CVec, C64, ZERO};
use crate::pfaffian::{log_pfaffian, SkewMatrix};

/// Evolved vacuum in the bar basis.
#[derive(Clone, Debug)]
pub struct CommonVacuum {
    pub bm: BlochMessiahForm,
    /// Nambu vectors of the d̄ builders, leftmost factor first.
    pub builders: CMat,
    /// log N.
    pub log_norm: f64,
}

/// Bar-basis maps and the vacuum builder string for the pair (reference,
/// evolved) of frames.
pub fn build_common_vacuum(bm: BlochMessiahForm, evolved: &WavefunctionSet) -> Result<CommonVacuum> {
    let log_norm = bm.log_norm()?;
    // d̄_j = Σ_i conj(D_ij) d_i(t)  ⇔  w̄_j = Σ_i D_ij ψ_i(t).
    let bar = evolved.annihilators() * &bm.d;
    let start = bm.n_empty;
    let builders = bar.columns(start, bar.ncols() - start).into_owned();
    Ok(CommonVacuum {
        bm,
        builders,
        log_norm,
    })
}

/// Assembled contraction matrix with the row ranges of each operator family.
#[derive(Clone, Debug)]
pub struct ContractionTable {
    pub matrix: CMat,
    pub m_rows: Range<usize>,
    pub a_rows: Range<usize>,
    pub n_rows: Range<usize>,
    pub builder_rows: Range<usize>,
}

impl ContractionTable {
    /// Block [r c]_ij = ⟨0_d| r_i c_j |0_d⟩ for two families; the lower
    /// triangle of the assembled matrix follows by antisymmetry.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> CMat {
        self.matrix
            .view((rows.start, cols.start), (rows.len(), cols.len()))
            .into_owned()
    }

    pub fn skew(&self) -> Result<SkewMatrix> {
        SkewMatrix::new(self.matrix.clone())
    }
}

/// Reference frame, evolved frame and the common vacuum linking them.
#[derive(Clone, Debug)]
pub struct OverlapFrames {
    pub reference: WavefunctionSet,
    pub evolved: WavefunctionSet,
    pub vacuum: CommonVacuum,
    /// conj(Ψ₀† w) for the n-creators d_k†(t), one column per mode.
    creators_alpha: CMat,
    builders_alpha: CMat,
}

/// Sign from reversing a string of r operators.
fn reversal_sign(r: usize) -> f64 {
    if (r * r.saturating_sub(1) / 2) % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn occupied(occ: &[u8]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .filter(|(_, &b)| b != 0)
        .map(|(k, _)| k)
        .collect()
}

impl OverlapFrames {
    pub fn new(reference: WavefunctionSet, evolved: WavefunctionSet) -> Result<Self> {
        let xy = bogoliubov_xy(&reference, &evolved)?;
        let bm = bloch_messiah(&xy)?;
        let vacuum = build_common_vacuum(bm, &evolved)?;
        let m = reference.n_sites();
        let mut creators = CMat::zeros(2 * m, m);
        for k in 0..m {
            creators.set_column(k, &tau_x_conj(&evolved.psi.column(k).into_owned()));
        }
        let p0 = reference.psi.adjoint();
        let creators_alpha = (&p0 * creators).conjugate();
        let builders_alpha = (&p0 * &vacuum.builders).conjugate();
        Ok(Self {
            reference,
            evolved,
            vacuum,
            creators_alpha,
            builders_alpha,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.reference.n_sites()
    }

    /// Nambu vector of d_k in the reference frame.
    pub fn d(&self, k: usize) -> CVec {
        self.reference.psi.column(k).into_owned()
    }

    /// Nambu vector of d_k(t) = U d_k U†.
    pub fn d_evolved(&self, k: usize) -> CVec {
        self.evolved.psi.column(k).into_owned()
    }

    /// α columns for ⟨m| A |n(t)⟩ in row order m creators, A, n creators and,
    /// if asked, builders, with the lengths of the first three groups.
    fn alpha_columns(&self, m: &[u8], a: &[CVec], n: &[u8], builders: bool) -> Result<(CMat, [usize; 3])> {
        let modes = self.n_modes();
        for occ in [m, n] {
            if occ.len() != modes {
                return Err(Error::DimensionMismatch {
                    expected: modes,
                    found: occ.len(),
                });
            }
        }
        let mi = occupied(m);
        let ni = occupied(n);
        let nb = if builders { self.builders_alpha.ncols() } else { 0 };
        let total = mi.len() + a.len() + ni.len() + nb;
        let mut alpha = CMat::zeros(2 * modes, total);
        let mut col = 0;
        for &k in &mi {
            // Ψ₀†ψ_k = e_k.
            alpha[(k, col)] = C64::from(1.0);
            col += 1;
        }
        for w in a {
            if w.len() != 2 * modes {
                return Err(Error::DimensionMismatch {
                    expected: 2 * modes,
                    found: w.len(),
                });
            }
            alpha.set_column(col, &self.reference.psi.ad_mul(w).conjugate());
            col += 1;
        }
        for &k in &ni {
            alpha.set_column(col, &self.creators_alpha.column(k));
            col += 1;
        }
        for j in 0..nb {
            alpha.set_column(col, &self.builders_alpha.column(j));
            col += 1;
        }
        Ok((alpha, [mi.len(), a.len(), ni.len()]))
    }

    /// Contraction matrix for ⟨m| A |n(t)⟩; A given as Nambu vectors in
    /// operator order.
    pub fn contraction_table(&self, m: &[u8], a: &[CVec], n: &[u8]) -> Result<ContractionTable> {
        let modes = self.n_modes();
        let (alpha, [nm, na, nn]) = self.alpha_columns(m, a, n, true)?;
        let total = alpha.ncols();
        let upper = alpha.rows(0, modes).transpose() * alpha.rows(modes, modes);
        let mut matrix = CMat::zeros(total, total);
        for i in 0..total {
            for j in i + 1..total {
                matrix[(i, j)] = upper[(i, j)];
                matrix[(j, i)] = -upper[(i, j)];
            }
        }
        let r1 = nm + na;
        let r2 = r1 + nn;
        Ok(ContractionTable {
            matrix,
            m_rows: 0..nm,
            a_rows: nm..r1,
            n_rows: r1..r2,
            builder_rows: r2..total,
        })
    }

    fn scaled_pfaffian(&self, skew: &SkewMatrix, n_m: usize) -> C64 {
        if skew.dim() % 2 == 1 {
            return ZERO;
        }
        let lp = log_pfaffian(skew);
        if lp.is_zero() {
            return ZERO;
        }
        let mag = libm::exp(lp.log_abs - 0.5 * self.vacuum.log_norm);
        lp.phase * mag * reversal_sign(n_m)
    }

    /// ⟨m| A |n(t)⟩ = s_m / √N · pf(contraction matrix).
    pub fn vacuum_expectation(&self, m: &[u8], a: &[CVec], n: &[u8]) -> Result<C64> {
        let table = self.contraction_table(m, a, n)?;
        if table.matrix.nrows() % 2 == 1 {
            return Ok(ZERO);
        }
        Ok(self.scaled_pfaffian(&table.skew()?, table.m_rows.len()))
    }

    /// Ordered-pair contractions among `pool` and the builders. Independent
    /// of the basis states, so one pool serves every amplitude.
    pub fn contraction_pool(&self, pool: &[CVec]) -> Result<ContractionPool> {
        let modes = self.n_modes();
        let empty = alloc::vec![0u8; modes];
        let (alpha, _) = self.alpha_columns(&empty, pool, &empty, true)?;
        let product = alpha.rows(0, modes).transpose() * alpha.rows(modes, modes);
        Ok(ContractionPool { alpha, product, n_pool: pool.len() })
    }

    /// Adds the creator rows of ⟨m| and |n(t)⟩ to a pool.
    pub fn bind_pool(&self, pool: &ContractionPool, m: &[u8], n: &[u8]) -> Result<BoundPool> {
        let modes = self.n_modes();
        let (extra, [n_m, _, n_n]) = self.alpha_columns(m, &[], n, false)?;
        let (et, eb) = (extra.rows(0, modes), extra.rows(modes, modes));
        let (ct, cb) = (pool.alpha.rows(0, modes), pool.alpha.rows(modes, modes));
        let ee = et.transpose() * eb;
        let ec = et.transpose() * cb;
        let ce = ct.transpose() * eb;
        // Full order: m creators, pool, n creators, builders.
        let core = pool.product.nrows();
        let total = core + n_m + n_n;
        let source = |f: usize| -> (bool, usize) {
            if f < n_m {
                (true, f)
            } else if f < n_m + pool.n_pool {
                (false, f - n_m)
            } else if f < n_m + pool.n_pool + n_n {
                (true, f - pool.n_pool)
            } else {
                (false, f - n_m - n_n)
            }
        };
        let product = CMat::from_fn(total, total, |i, j| match (source(i), source(j)) {
            ((true, a), (true, b)) => ee[(a, b)],
            ((true, a), (false, b)) => ec[(a, b)],
            ((false, a), (true, b)) => ce[(a, b)],
            ((false, a), (false, b)) => pool.product[(a, b)],
        });
        Ok(BoundPool { product, n_m, n_pool: pool.n_pool })
    }

    /// ⟨m| A |n(t)⟩ for A = pool[picks[0]] pool[picks[1]] ⋯.
    pub fn pooled_expectation(&self, pool: &BoundPool, picks: &[usize]) -> Result<C64> {
        let total = pool.product.nrows();
        let fixed = total - pool.n_pool;
        if (fixed + picks.len()) % 2 == 1 {
            return Ok(ZERO);
        }
        let mut rows: Vec<usize> = Vec::with_capacity(fixed + picks.len());
        rows.extend(0..pool.n_m);
        for &p in picks {
            if p >= pool.n_pool {
                return Err(Error::DimensionMismatch {
                    expected: pool.n_pool,
                    found: p + 1,
                });
            }
            rows.push(pool.n_m + p);
        }
        rows.extend(pool.n_m + pool.n_pool..total);
        let dim = rows.len();
        let mut matrix = CMat::zeros(dim, dim);
        for i in 0..dim {
            for j in i + 1..dim {
                matrix[(i, j)] = pool.product[(rows[i], rows[j])];
            }
        }
        Ok(self.scaled_pfaffian(&SkewMatrix::from_upper(&matrix), pool.n_m))
    }
}

/// Operator pool plus builders in the reference frame, with entry (i, j) of
/// `product` the contraction of i standing left of j.
#[derive(Clone, Debug)]
pub struct ContractionPool {
    alpha: CMat,
    product: CMat,
    n_pool: usize,
}

/// A pool bound to ⟨m| and |n(t)⟩; rows ordered m creators, pool, n
/// creators, builders.
#[derive(Clone, Debug)]
pub struct BoundPool {
    product: CMat,
    n_m: usize,
    n_pool: usize,
}
