//! Kitaev-wire networks with time-dependent, site-resolved parameters.
//!
//! Nambu ordering Φ = (c₁…c_M, c₁†…c_M†) and H = ½Φ†H_BdGΦ with
//! H_BdG = [[h, D], [−D*, −h*]], h_ii = −μ_i, h_ab = −t_ab, and an
//! antisymmetric pairing D whose entry on an oriented bond a→b is Δe^{iφ}.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{eigh, CMat, C64};

/// Bond a→b with hopping t and pairing D_ab (D_ba = −D_ab).
#[derive(Clone, Debug, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub hopping: f64,
    pub pairing: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wire {
    pub name: String,
    /// Sites in orientation order.
    pub sites: Vec<usize>,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct WireNetwork {
    pub mu: Vec<f64>,
    pub bonds: Vec<Bond>,
    pub wires: Vec<Wire>,
}

impl WireNetwork {
    pub fn new(n_sites: usize, mu: f64) -> Self {
        Self {
            mu: vec![mu; n_sites],
            ..Self::default()
        }
    }

    pub fn n_sites(&self) -> usize {
        self.mu.len()
    }

    /// Chain of bonds along `sites` with pairing Δe^{iφ} oriented along the list.
    pub fn add_wire(&mut self, name: &str, sites: Vec<usize>, t: f64, delta: f64, phase: f64) -> Result<usize> {
        if sites.len() < 2 {
            return Err(Error::InvalidDevice(format!("wire {name} needs at least two sites")));
        }
        let pairing = C64::from_polar(delta, phase);
        for w in sites.windows(2) {
            self.add_bond(w[0], w[1], t, pairing)?;
        }
        self.wires.push(Wire {
            name: String::from(name),
            sites,
            phase,
        });
        Ok(self.wires.len() - 1)
    }

    pub fn add_bond(&mut self, a: usize, b: usize, hopping: f64, pairing: C64) -> Result<usize> {
        let n = self.n_sites();
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidDevice(format!("bad bond {a}->{b} on {n} sites")));
        }
        if self
            .bonds
            .iter()
            .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
        {
            return Err(Error::InvalidDevice(format!("duplicate bond {a}-{b}")));
        }
        self.bonds.push(Bond {
            a,
            b,
            hopping,
            pairing,
        });
        Ok(self.bonds.len() - 1)
    }

    /// Sites shared by several wires must be an end of each of them.
    pub fn validate(&self) -> Result<()> {
        let mut count = vec![0usize; self.n_sites()];
        for w in &self.wires {
            for (k, &s) in w.sites.iter().enumerate() {
                if s >= self.n_sites() {
                    return Err(Error::InvalidDevice(format!("wire {} leaves the lattice", w.name)));
                }
                count[s] += 1;
                let end = k == 0 || k + 1 == w.sites.len();
                if !end && self.wires.iter().filter(|o| o.sites.contains(&s)).count() > 1 {
                    return Err(Error::InvalidDevice(format!(
                        "site {s} joins wires but is interior to {}",
                        w.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Connected groups of sites under the bond graph, each sorted, ordered
    /// by smallest site.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n_sites();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for b in &self.bonds {
            let (ra, rb) = (root(&mut parent, b.a), root(&mut parent, b.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = root(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(i);
        }
        groups
    }

    /// Bond index between two sites, either orientation.
    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.bonds
            .iter()
            .position(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
    }

    /// BdG matrix for explicit parameters; linear in μ and in the bond scales.
    pub fn assemble_with(&self, mu: &[f64], bond_scale: &[f64]) -> CMat {
        let m = self.n_sites();
        let mut h = CMat::zeros(2 * m, 2 * m);
        for (i, &x) in mu.iter().enumerate() {
            h[(i, i)] = C64::from(-x);
            h[(m + i, m + i)] = C64::from(x);
        }
        for (bond, &s) in self.bonds.iter().zip(bond_scale) {
            let (a, b) = (bond.a, bond.b);
            let t = C64::from(-bond.hopping * s);
            let d = bond.pairing * s;
            h[(a, b)] += t;
            h[(b, a)] += t;
            h[(m + a, m + b)] -= t;
            h[(m + b, m + a)] -= t;
            h[(a, m + b)] += d;
            h[(b, m + a)] -= d;
            h[(m + a, b)] -= d.conj();
            h[(m + b, a)] += d.conj();
        }
        h
    }
}

/// max|τ_x H* τ_x + H|.
pub fn phs_residual(h: &CMat) -> f64 {
    let m = h.nrows() / 2;
    let mut r: f64 = 0.0;
    for a in 0..2 * m {
        for b in 0..2 * m {
            let ta = (a + m) % (2 * m);
            let tb = (b + m) % (2 * m);
            r = r.max((h[(ta, tb)].conj() + h[(a, b)]).norm());
        }
    }
    r
}

pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Mu { site: usize, value: f64 },
    BondScale { bond: usize, value: f64 },
}

/// Smoothstep ramp of some parameters from their current values to targets;
/// an empty target list is a hold.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub targets: Vec<Target>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParameterSchedule {
    pub t_total: f64,
    pub segments: Vec<Segment>,
}

impl ParameterSchedule {
    pub fn constant(t_total: f64) -> Self {
        Self {
            t_total,
            segments: Vec::new(),
        }
    }

    pub fn validate(&self, net: &WireNetwork) -> Result<()> {
        let mut last = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            if !(s.t_start >= last && s.t_end >= s.t_start && s.t_end <= self.t_total) {
                return Err(Error::InvalidSchedule(format!(
                    "segment {k} [{}, {}] overlaps or leaves [0, {}]",
                    s.t_start, s.t_end, self.t_total
                )));
            }
            last = s.t_end;
            for t in &s.targets {
                match *t {
                    Target::Mu { site, .. } if site >= net.n_sites() => {
                        return Err(Error::InvalidSchedule(format!("segment {k}: site {site} out of range")))
                    }
                    Target::BondScale { bond, .. } if bond >= net.bonds.len() => {
                        return Err(Error::InvalidSchedule(format!("segment {k}: bond {bond} out of range")))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Parameters (μ, bond scales) at time t, starting from `mu0`.
    pub fn params_at(&self, net: &WireNetwork, mu0: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(t >= -1e-12 && t <= self.t_total + 1e-12) {
            return Err(Error::ScheduleGap { t });
        }
        let mut mu = mu0.to_vec();
        let mut scale = vec![1.0; net.bonds.len()];
        for s in &self.segments {
            if t < s.t_start {
                break;
            }
            let x = if t >= s.t_end || s.t_end == s.t_start {
                1.0
            } else {
                smoothstep((t - s.t_start) / (s.t_end - s.t_start))
            };
            for target in &s.targets {
                let (slot, value) = match *target {
                    Target::Mu { site, value } => (&mut mu[site], value),
                    Target::BondScale { bond, value } => (&mut scale[bond], value),
                };
                *slot = if x >= 1.0 { value } else { *slot + (value - *slot) * x };
            }
        }
        Ok((mu, scale))
    }
}

/// Uniform μ offsets on [−W/2, W/2] from a seeded stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisorderSpec {
    pub seed: u64,
    pub amplitude: f64,
}

impl DisorderSpec {
    pub fn offsets(&self, n_sites: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..n_sites)
            .map(|_| (crate::linalg::uniform(&mut rng) - 0.5) * self.amplitude)
            .collect()
    }
}

/// Network plus schedule plus static disorder.
#[derive(Clone, Debug, PartialEq)]
pub struct BdGSystem {
    pub network: WireNetwork,
    pub schedule: ParameterSchedule,
    pub disorder: Option<DisorderSpec>,
}

/// Eigenvalues with the count of |E| < ε_zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumProbe {
    pub energies: Vec<f64>,
    pub n_zero: usize,
    pub eps_zero: f64,
    pub bulk_gap: f64,
}

impl BdGSystem {
    pub fn new(network: WireNetwork, schedule: ParameterSchedule, disorder: Option<DisorderSpec>) -> Result<Self> {
        network.validate()?;
        schedule.validate(&network)?;
        Ok(Self {
            network,
            schedule,
            disorder,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.network.n_sites()
    }

    /// Chemical potentials before scheduling, with disorder applied.
    pub fn base_mu(&self) -> Vec<f64> {
        let mut mu = self.network.mu.clone();
        if let Some(d) = self.disorder {
            if d.amplitude != 0.0 {
                let offsets = d.offsets(mu.len());
                for (m, o) in mu.iter_mut().zip(offsets) {
                    *m += o;
                }
            }
        }
        mu
    }

    pub fn assemble(&self, t: f64) -> Result<CMat> {
        let (mu, scale) = self.schedule.params_at(&self.network, &self.base_mu(), t)?;
        Ok(self.network.assemble_with(&mu, &scale))
    }

    /// Sorted BdG energies and the number below ε_zero; by default
    /// ε_zero = 1e-6 × bulk gap, the bulk gap being the smallest positive
    /// energy above 1e-3 × the bandwidth.
    pub fn spectrum_probe(&self, t: f64, eps_zero: Option<f64>) -> Result<SpectrumProbe> {
        let (energies, _) = eigh(&self.assemble(t)?);
        Ok(probe_energies(energies, eps_zero))
    }
}

pub fn probe_energies(energies: Vec<f64>, eps_zero: Option<f64>) -> SpectrumProbe {
    let width = energies.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let bulk_gap = energies
        .iter()
        .filter(|&&e| e > 1e-3 * width)
        .fold(f64::INFINITY, |a, &e| a.min(e));
    let bulk_gap = if bulk_gap.is_finite() { bulk_gap } else { width };
    let eps_zero = eps_zero.unwrap_or(1e-6 * bulk_gap);
    let n_zero = energies.iter().filter(|e| e.abs() < eps_zero).count();
    SpectrumProbe {
        energies,
        n_zero,
        eps_zero,
        bulk_gap,
    }
}

/// Random BdG matrix: Gaussian Hermitian hopping and antisymmetric pairing
/// blocks, particle-hole symmetric by construction.
pub fn random_bdg<R: rand_core::RngCore>(rng: &mut R, m: usize) -> CMat {
    let a = crate::linalg::random_complex(rng, m, m);
    let h = (&a + a.adjoint()) * C64::from(0.5);
    let b = crate::linalg::random_complex(rng, m, m);
    let d = (&b - b.transpose()) * C64::from(0.5);
    let mut out = CMat::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(&h);
    out.view_mut((m, m), (m, m)).copy_from(&(-h.conjugate()));
    out.view_mut((0, m), (m, m)).copy_from(&d);
    out.view_mut((m, 0), (m, m)).copy_from(&(-d.conjugate()));
    out
}
