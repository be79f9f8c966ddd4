//! Lattice bookkeeping and amplitude storage.
//!
//! Single-walker amplitudes are stored coin-major: index = coin * N + site.
//! Sites are addressed modulo N; site n sits at the signed offset
//! n (for n < N/2) or n - N, so the origin is site 0 and site N-1 is at -a.

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    sites: usize,
    spacing: f64,
}

impl Lattice {
    pub fn new(sites: usize, spacing: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidParameter(format!("lattice needs at least 2 sites, got {sites}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("lattice spacing must be positive, got {spacing}")));
        }
        Ok(Self { sites, spacing })
    }

    /// Lattice with a = dt = 1/scale.
    pub fn with_scale(sites: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!("scale L must be positive, got {scale}")));
        }
        Self::new(sites, 1.0 / scale)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Signed lattice offset of a site, in [-N/2, N/2).
    pub fn offset(&self, site: usize) -> i64 {
        let n = self.sites as i64;
        let s = site as i64;
        if s < (n + 1) / 2 {
            s
        } else {
            s - n
        }
    }

    pub fn position(&self, site: usize) -> f64 {
        self.offset(site) as f64 * self.spacing
    }

    /// Site index of a signed offset, wrapped periodically.
    pub fn site(&self, offset: i64) -> usize {
        offset.rem_euclid(self.sites as i64) as usize
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.sites).map(|s| self.position(s)).collect()
    }

    /// Sites ordered by increasing position (useful for output).
    pub fn sites_by_position(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.sites).collect();
        order.sort_by_key(|&s| self.offset(s));
        order
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    coin_dim: usize,
    lattice: Lattice,
    amps: Vec<C64>,
}

impl WalkState {
    pub fn zeros(coin_dim: usize, lattice: Lattice) -> Self {
        let len = coin_dim * lattice.sites();
        Self { coin_dim, lattice, amps: vec![ZERO; len] }
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(coin_dim: usize, lattice: Lattice, amps: Vec<C64>) -> Result<Self> {
        if coin_dim == 0 {
            return Err(Error::InvalidParameter("coin dimension must be positive".into()));
        }
        if amps.len() != coin_dim * lattice.sites() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes for coin_dim {} and {} sites, got {}",
                coin_dim * lattice.sites(),
                coin_dim,
                lattice.sites(),
                amps.len()
            )));
        }
        let mut s = Self { coin_dim, lattice, amps };
        s.normalize()?;
        Ok(s)
    }

    /// coin (x) position product state; both factors are normalized together.
    pub fn product(coin: &[C64], position: &[C64], lattice: Lattice) -> Result<Self> {
        if position.len() != lattice.sites() {
            return Err(Error::DimensionMismatch(format!(
                "position vector has {} entries, lattice has {} sites",
                position.len(),
                lattice.sites()
            )));
        }
        let amps = coin.iter().flat_map(|&cv| position.iter().map(move |&p| cv * p)).collect();
        Self::from_amplitudes(coin.len(), lattice, amps)
    }

    pub fn coin_dim(&self) -> usize {
        self.coin_dim
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn sites(&self) -> usize {
        self.lattice.sites()
    }

    pub fn index(&self, coin: usize, site: usize) -> usize {
        coin * self.lattice.sites() + site
    }

    pub fn decode(&self, index: usize) -> (usize, usize) {
        (index / self.lattice.sites(), index % self.lattice.sites())
    }

    pub fn amplitude(&self, coin: usize, site: usize) -> C64 {
        self.amps[self.index(coin, site)]
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    /// Amplitudes of a single coin component over all sites.
    pub fn coin_slice(&self, coin: usize) -> &[C64] {
        let n = self.sites();
        &self.amps[coin * n..(coin + 1) * n]
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amps)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(())
    }

    /// <self|other>
    pub fn inner(&self, other: &WalkState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

pub fn make_basis_state(coin_index: usize, site: usize, coin_dim: usize, lattice: &Lattice) -> Result<WalkState> {
    if coin_index >= coin_dim {
        return Err(Error::IndexOutOfRange { what: "coin_index", value: coin_index as i64, bound: coin_dim });
    }
    if site >= lattice.sites() {
        return Err(Error::IndexOutOfRange { what: "site", value: site as i64, bound: lattice.sites() });
    }
    let mut s = WalkState::zeros(coin_dim, lattice.clone());
    let idx = s.index(coin_index, site);
    s.amps[idx] = C64::new(1.0, 0.0);
    Ok(s)
}

/// Normalized linear combination of states sharing coin dimension and lattice.
pub fn superpose(terms: &[(C64, WalkState)]) -> Result<WalkState> {
    let (_, first) = terms.first().ok_or(Error::ZeroVector)?;
    let mut out = WalkState::zeros(first.coin_dim, first.lattice.clone());
    for (w, s) in terms {
        if s.coin_dim != first.coin_dim || s.lattice != first.lattice {
            return Err(Error::DimensionMismatch("superposed states live in different spaces".into()));
        }
        for (o, a) in out.amps.iter_mut().zip(&s.amps) {
            *o += w * a;
        }
    }
    out.normalize()?;
    Ok(out)
}

pub fn norm(state: &WalkState) -> f64 {
    state.norm()
}

fn l2(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Two walkers on a shared lattice, index ((c1*d2 + c2)*N + x1)*N + x2.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoParticleState {
    coin_dims: (usize, usize),
    lattice: Lattice,
    amps: Vec<C64>,
}

impl TwoParticleState {
    pub fn zeros(coin_dims: (usize, usize), lattice: Lattice) -> Self {
        let n = lattice.sites();
        Self { coin_dims, lattice, amps: vec![ZERO; coin_dims.0 * coin_dims.1 * n * n] }
    }

    pub fn from_amplitudes(coin_dims: (usize, usize), lattice: Lattice, amps: Vec<C64>) -> Result<Self> {
        let n = lattice.sites();
        let want = coin_dims.0 * coin_dims.1 * n * n;
        if amps.len() != want {
            return Err(Error::DimensionMismatch(format!("expected {want} amplitudes, got {}", amps.len())));
        }
        let mut s = Self { coin_dims, lattice, amps };
        let nrm = l2(&s.amps);
        if nrm == 0.0 {
            return Err(Error::ZeroVector);
        }
        s.amps.iter_mut().for_each(|a| *a /= nrm);
        Ok(s)
    }

    /// |a> (x) |b>, with particle 1 taken from `a`.
    pub fn from_product(a: &WalkState, b: &WalkState) -> Result<Self> {
        if a.lattice != b.lattice {
            return Err(Error::DimensionMismatch("particles must share the lattice".into()));
        }
        let n = a.sites();
        let (d1, d2) = (a.coin_dim, b.coin_dim);
        let mut s = Self::zeros((d1, d2), a.lattice.clone());
        for c1 in 0..d1 {
            for c2 in 0..d2 {
                for x1 in 0..n {
                    let av = a.amplitude(c1, x1);
                    for x2 in 0..n {
                        let idx = s.index(c1, c2, x1, x2);
                        s.amps[idx] = av * b.amplitude(c2, x2);
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn coin_dims(&self) -> (usize, usize) {
        self.coin_dims
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn index(&self, c1: usize, c2: usize, x1: usize, x2: usize) -> usize {
        let n = self.lattice.sites();
        ((c1 * self.coin_dims.1 + c2) * n + x1) * n + x2
    }

    pub fn decode(&self, index: usize) -> (usize, usize, usize, usize) {
        let n = self.lattice.sites();
        let x2 = index % n;
        let x1 = (index / n) % n;
        let c = index / (n * n);
        (c / self.coin_dims.1, c % self.coin_dims.1, x1, x2)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amps)
    }
}
