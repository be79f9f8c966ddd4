//! Position distributions, reduced coin states, entanglement measures and
//! expectation time series.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::state::{make_basis_state, Lattice, TwoParticleState, WalkState};

/// P(x) = sum_c |psi(c,x)|^2, indexed by site.
pub fn position_probability(state: &WalkState) -> Vec<f64> {
    let n = state.sites();
    let mut p = vec![0.0; n];
    for chunk in state.amplitudes().chunks(n) {
        for (pi, a) in p.iter_mut().zip(chunk) {
            *pi += a.norm_sqr();
        }
    }
    p
}

/// Marginal position distribution of particle 1 or 2.
pub fn two_particle_marginal(state: &TwoParticleState, particle: usize) -> Vec<f64> {
    let n = state.lattice().sites();
    let mut p = vec![0.0; n];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let (_, _, x1, x2) = state.decode(i);
        p[if particle == 1 { x1 } else { x2 }] += a.norm_sqr();
    }
    p
}

/// rho_c = Tr_x |psi><psi|
#[derive(Clone, Debug)]
pub struct ReducedCoinState {
    pub rho: DMatrix<C64>,
}

impl ReducedCoinState {
    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.rho.clone()).eigenvalues.iter().copied().collect()
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(&self.rho)
    }
}

pub fn reduced_coin_state(state: &WalkState) -> ReducedCoinState {
    let d = state.coin_dim();
    let mut rho = DMatrix::from_element(d, d, ZERO);
    for i in 0..d {
        let ci = state.coin_slice(i);
        for j in i..d {
            let cj = state.coin_slice(j);
            let v: C64 = ci.iter().zip(cj).map(|(a, b)| a * b.conj()).sum();
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
    }
    ReducedCoinState { rho }
}

/// -Tr rho ln rho, with eigenvalues in [-1e-12, 0) treated as zero.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> f64 {
    let eig = SymmetricEigen::new(rho.clone());
    eig.eigenvalues
        .iter()
        .map(|&l| if (-1e-12..=0.0).contains(&l) { 0.0 } else { l })
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

pub fn entanglement_entropy(state: &WalkState) -> f64 {
    reduced_coin_state(state).entropy()
}

pub const DENSE_NEGATIVITY_LIMIT: usize = 1 << 14;

/// Negativity of a pure walker state across the coin | position cut,
/// from its Schmidt coefficients: ((sum sqrt(l))^2 - 1) / 2.
pub fn negativity(state: &WalkState) -> f64 {
    let eig = reduced_coin_state(state).eigenvalues();
    let s: f64 = eig.iter().map(|&l| l.max(0.0).sqrt()).sum();
    ((s * s - 1.0) / 2.0).max(0.0)
}

/// Negativity of a bipartite density matrix on C^{dim_a} (x) C^{dim_b}
/// via an explicit partial transpose on the first factor.
pub fn negativity_of_density(rho: &DMatrix<C64>, dim_a: usize, dim_b: usize) -> Result<f64> {
    let dim = dim_a * dim_b;
    if dim > DENSE_NEGATIVITY_LIMIT {
        return Err(Error::TooLarge { dim, limit: DENSE_NEGATIVITY_LIMIT });
    }
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch(format!("density matrix is {}x{}, expected {dim}", rho.nrows(), rho.ncols())));
    }
    let mut pt = DMatrix::from_element(dim, dim, ZERO);
    for a in 0..dim_a {
        for b in 0..dim_b {
            for a2 in 0..dim_a {
                for b2 in 0..dim_b {
                    pt[(a2 * dim_b + b, a * dim_b + b2)] = rho[(a * dim_b + b, a2 * dim_b + b2)];
                }
            }
        }
    }
    let trace_norm: f64 = SymmetricEigen::new(pt).eigenvalues.iter().map(|l| l.abs()).sum();
    Ok(((trace_norm - 1.0) / 2.0).max(0.0))
}

/// Dense |psi><psi| in the coin-major ordering (small systems only).
pub fn density_matrix(state: &WalkState) -> Result<DMatrix<C64>> {
    let v = state.amplitudes();
    if v.len() > DENSE_NEGATIVITY_LIMIT {
        return Err(Error::TooLarge { dim: v.len(), limit: DENSE_NEGATIVITY_LIMIT });
    }
    Ok(DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj()))
}

/// <psi| A (x) I |psi> for a coin-space operator A.
pub fn expectation(state: &WalkState, observable: &DMatrix<C64>) -> f64 {
    let rho = reduced_coin_state(state).rho;
    (observable * rho).trace().re
}

/// <A>_t at steps 0..=n_steps.
pub fn expectation_series(state: &WalkState, observable: &DMatrix<C64>, engine: &Engine, n_steps: usize) -> Result<Vec<f64>> {
    let d = state.coin_dim();
    if observable.nrows() != d || observable.ncols() != d {
        return Err(Error::DimensionMismatch(format!("observable must be {d}x{d}")));
    }
    if crate::linalg::hermiticity_deviation(observable) > 1e-12 {
        return Err(Error::InvalidParameter("observable is not Hermitian".into()));
    }
    let mut psi = state.clone();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(expectation(&psi, observable));
    for n in 1..=n_steps {
        engine.step(&mut psi, n)?;
        out.push(expectation(&psi, observable));
    }
    Ok(out)
}

/// Mean of the last `window` entries.
pub fn average_late_entropy(series: &[f64], window: usize) -> Result<f64> {
    if window == 0 || window > series.len() {
        return Err(Error::InvalidParameter(format!("window {window} must lie in 1..={}", series.len())));
    }
    Ok(series[series.len() - window..].iter().sum::<f64>() / window as f64)
}

pub const DEFAULT_LATE_WINDOW: usize = 10;

/// cos(Omega_p/2)|up> + e^{i Omega_a} sin(Omega_p/2)|down>
pub fn bloch_coin(omega_a: f64, omega_p: f64) -> [C64; 2] {
    let (s, c) = (omega_p / 2.0).sin_cos();
    [C64::new(c, 0.0), C64::from_polar(s, omega_a)]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub omega_a: f64,
    pub omega_p: f64,
    pub avg_entropy: f64,
}

/// Late-time entropy over a uniform (Omega_a in [0, 2pi), Omega_p in [0, pi]) grid
/// for a walker starting at the origin.
pub fn bloch_sweep(
    engine: &Engine,
    lattice: &Lattice,
    n_steps: usize,
    grid: (usize, usize),
    window: usize,
) -> Result<Vec<SweepPoint>> {
    let (na, np) = grid;
    if na == 0 || np < 2 {
        return Err(Error::InvalidParameter("sweep grid needs na >= 1 and np >= 2".into()));
    }
    let points: Vec<(f64, f64)> = (0..na)
        .flat_map(|i| (0..np).map(move |j| (2.0 * std::f64::consts::PI * i as f64 / na as f64, std::f64::consts::PI * j as f64 / (np - 1) as f64)))
        .collect();
    points
        .par_iter()
        .map(|&(oa, op)| {
            let coin = bloch_coin(oa, op);
            let up = make_basis_state(0, 0, 2, lattice)?;
            let down = make_basis_state(1, 0, 2, lattice)?;
            let psi = crate::state::superpose(&[(coin[0], up), (coin[1], down)])?;
            let traj = crate::engine::evolve(&psi, engine, n_steps, &crate::engine::ObservableSet { entropy: true, ..Default::default() })?;
            Ok(SweepPoint { omega_a: oa, omega_p: op, avg_entropy: average_late_entropy(&traj.entropy, window)? })
        })
        .collect()
}

pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
}
