//! Momentum-space effective Hamiltonians for walks with position-independent coins.
//!
//! Every one-step block here has the form [[A, B], [-B*, A*]] up to a global
//! phase, so H_k = E n.sigma with cos(E dt) = Re A.

use nalgebra::{DMatrix, Schur};

use crate::coin::{CoinAngles, SubStep};
use crate::engine::{Engine, EngineKind};
use crate::error::{Error, Result};
use crate::linalg::{fix_phase, hermiticity_deviation, pauli, to_dmatrix, Mat2, Vec2, C64, I, ZERO};
use crate::state::{Lattice, WalkState};

/// k_n = 2 pi n / (N a) for n in -floor(N/2) .. ceil(N/2) - 1.
pub fn momentum_grid(lattice: &Lattice) -> Vec<f64> {
    let n = lattice.sites() as i64;
    let a = lattice.spacing();
    (-(n / 2)..(n + 1) / 2).map(|j| 2.0 * std::f64::consts::PI * j as f64 / (n as f64 * a)).collect()
}

/// Parameters of a translation-invariant two-component walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WalkParams {
    Dqw(CoinAngles),
    SsDqw { first: CoinAngles, second: CoinAngles },
    Dca { eta1: f64, eta2: f64 },
}

impl WalkParams {
    /// SS-DQW with sigma_1 rotations only.
    pub fn ssdqw(theta11: f64, theta12: f64) -> Self {
        WalkParams::SsDqw { first: CoinAngles::rotation(theta11), second: CoinAngles::rotation(theta12) }
    }

    pub fn dca_from_angle(theta: f64) -> Self {
        WalkParams::Dca { eta1: theta.cos(), eta2: theta.sin() }
    }

    /// Reads the parameters from an engine whose coins do not depend on position.
    pub fn from_engine(engine: &Engine, t: f64) -> Result<Self> {
        match &engine.kind {
            EngineKind::Dqw(a) => Ok(WalkParams::Dqw(*a)),
            EngineKind::Dca { eta1, eta2 } => Ok(WalkParams::Dca { eta1: *eta1, eta2: *eta2 }),
            EngineKind::SsDqw(s) => Ok(WalkParams::SsDqw {
                first: s.angles(SubStep::First, 0.0, t, engine.dt),
                second: s.angles(SubStep::Second, 0.0, t, engine.dt),
            }),
            other => Err(Error::UnsupportedEngine(other.name())),
        }
    }

    /// (A, B, global phase) of the one-step block at dimensionless momentum ka.
    pub fn block_parts(&self, ka: f64) -> (C64, C64, f64) {
        let e = C64::from_polar(1.0, -ka);
        match *self {
            WalkParams::Dqw(a) => {
                let (f, g) = a.fg();
                (f * e, g * e, a.theta[0])
            }
            WalkParams::SsDqw { first, second } => {
                let (f1, g1) = first.fg();
                let (f2, g2) = second.fg();
                (f2 * f1 * e - g2 * g1.conj(), f2 * g1 * e + g2 * f1.conj(), first.theta[0] + second.theta[0])
            }
            WalkParams::Dca { eta1, eta2 } => (C64::new(eta1, 0.0) * e, -I * eta2, 0.0),
        }
    }

    pub fn block(&self, ka: f64) -> Mat2 {
        let (a, b, phase) = self.block_parts(ka);
        Mat2::new(a, b, -b.conj(), a.conj()) * C64::from_polar(1.0, -phase)
    }
}

/// Per-k Hermitian generator with eigenvalues offset +- energy.
#[derive(Clone, Debug)]
pub struct MomentumModeSystem {
    pub k: f64,
    pub h: Mat2,
    /// Half the gap, in [0, pi/dt].
    pub energy: f64,
    /// Global sigma_0 term theta^0/dt.
    pub offset: f64,
    pub phi_plus: Vec2,
    pub phi_minus: Vec2,
}

fn ratio_x_over_sin(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 + x * x / 6.0
    } else {
        x / x.sin()
    }
}

/// Closed-form H_k with a = dt.
pub fn hk_closed_form(params: &WalkParams, k: f64, dt: f64) -> MomentumModeSystem {
    let ka = k * dt;
    let (a, b, phase) = params.block_parts(ka);
    let cos_e = a.re.clamp(-1.0, 1.0);
    let e_tilde = cos_e.acos();
    let s = e_tilde.sin();
    let scale = ratio_x_over_sin(e_tilde) / dt;
    let h0 = -(pauli(3) * C64::from(a.im) + pauli(2) * C64::from(b.re) + pauli(1) * C64::from(b.im)) * C64::from(scale);
    let offset = phase / dt;
    let h = h0 + Mat2::identity() * C64::from(offset);
    let (phi_plus, phi_minus) = if s < 1e-10 {
        eigvecs_numeric(&h0)
    } else {
        let v1 = Vec2::new(I * b, C64::from(s + a.im));
        let v2 = Vec2::new(C64::from(s - a.im), -I * b.conj());
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        let mut p = v / C64::from(v.norm());
        fix_phase(p.as_mut_slice(), 1e-14);
        let mut m = Vec2::new(-p[1].conj(), p[0].conj());
        fix_phase(m.as_mut_slice(), 1e-14);
        (p, m)
    };
    MomentumModeSystem { k, h, energy: e_tilde / dt, offset, phi_plus, phi_minus }
}

fn eigvecs_numeric(h: &Mat2) -> (Vec2, Vec2) {
    let eig = nalgebra::SymmetricEigen::new(to_dmatrix(h));
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let pick = |j: usize| {
        let mut v = Vec2::new(eig.eigenvectors[(0, j)], eig.eigenvectors[(1, j)]);
        fix_phase(v.as_mut_slice(), 1e-14);
        v
    };
    (pick(hi), pick(lo))
}

pub fn quasienergy(params: &WalkParams, k: f64, dt: f64) -> f64 {
    let (a, _, _) = params.block_parts(k * dt);
    a.re.clamp(-1.0, 1.0).acos() / dt
}

/// Z = arccos[cos theta cos(ka)] / (pi dt)
pub fn zbw_frequency(theta12: f64, k: f64, dt: f64) -> f64 {
    (theta12.cos() * (k * dt).cos()).clamp(-1.0, 1.0).acos() / (std::f64::consts::PI * dt)
}

/// H = (i/dt) log U on the principal branch.
pub fn hamiltonian_from_unitary(u: &DMatrix<C64>, dt: f64) -> Result<DMatrix<C64>> {
    const BRANCH_TOL: f64 = 1e-9;
    let n = u.nrows();
    if n != u.ncols() {
        return Err(Error::DimensionMismatch("unitary must be square".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("time step must be positive".into()));
    }
    let (q, t) = Schur::new(u.clone()).unpack();
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        let phase = t[(j, j)].arg();
        if std::f64::consts::PI - phase.abs() < BRANCH_TOL {
            return Err(Error::BranchAmbiguity { phase, tol: BRANCH_TOL });
        }
        d[(j, j)] = C64::from(-phase / dt);
    }
    let h = &q * d * q.adjoint();
    Ok((&h + h.adjoint()) * C64::from(0.5))
}

/// One-step block of `engine` at lattice momentum k, read off from plane waves.
pub fn lattice_block(engine: &Engine, lattice: &Lattice, k: f64, coin_dim: usize) -> Result<DMatrix<C64>> {
    let n = lattice.sites();
    let xs = lattice.positions();
    let norm = 1.0 / (n as f64).sqrt();
    let wave: Vec<C64> = xs.iter().map(|&x| C64::from_polar(norm, k * x)).collect();
    let mut out = DMatrix::zeros(coin_dim, coin_dim);
    for c in 0..coin_dim {
        let mut amps = vec![ZERO; coin_dim * n];
        amps[c * n..(c + 1) * n].copy_from_slice(&wave);
        let mut psi = WalkState::from_amplitudes(coin_dim, lattice.clone(), amps)?;
        engine.step(&mut psi, 1)?;
        for r in 0..coin_dim {
            out[(r, c)] = psi.coin_slice(r).iter().zip(&wave).map(|(p, w)| w.conj() * p).sum();
        }
    }
    Ok(out)
}

/// Max over sampled |k| <= window of ||H_k - (k sigma3 + m sigma1)|| with
/// dt = a = 1/scale and the mass set through theta = m dt.
pub fn continuum_deviation(family: ContinuumFamily, scale: f64, mass: f64, window: f64, samples: usize) -> f64 {
    let dt = 1.0 / scale;
    let params = family.params(mass * dt);
    let mut worst = 0.0f64;
    for j in 0..samples.max(2) {
        let k = -window + 2.0 * window * j as f64 / (samples.max(2) - 1) as f64;
        let h = hk_closed_form(&params, k, dt).h;
        let target = pauli(3) * C64::from(k) + pauli(1) * C64::from(mass);
        worst = worst.max(crate::linalg::hermitian2_norm(&(h - target)));
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContinuumFamily {
    Dqw,
    SsDqw,
    /// eta2 = m dt directly
    Dca,
}

impl ContinuumFamily {
    fn params(self, theta: f64) -> WalkParams {
        match self {
            ContinuumFamily::Dqw => WalkParams::Dqw(CoinAngles::rotation(theta)),
            ContinuumFamily::SsDqw => WalkParams::ssdqw(0.0, theta),
            ContinuumFamily::Dca => WalkParams::Dca { eta1: (1.0 - theta * theta).sqrt(), eta2: theta },
        }
    }
}

/// Spectrum table over the lattice momentum grid.
pub fn spectrum(params: &WalkParams, lattice: &Lattice) -> Vec<MomentumModeSystem> {
    let dt = lattice.spacing();
    momentum_grid(lattice).into_iter().map(|k| hk_closed_form(params, k, dt)).collect()
}

pub fn check_mode_system(m: &MomentumModeSystem) -> f64 {
    hermiticity_deviation(&to_dmatrix(&m.h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::CoinSchedule;
    use crate::linalg::{expm_hermitian, max_abs_diff};
    use proptest::prelude::*;
    use rustfft::FftPlanner;

    fn lattice(n: usize) -> Lattice {
        Lattice::new(n, 1.0 / n as f64).unwrap()
    }

    #[test]
    fn grid_small() {
        let g = momentum_grid(&Lattice::new(4, 1.0).unwrap());
        let want = [-std::f64::consts::PI, -std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(momentum_grid(&Lattice::new(7, 0.3).unwrap()).contains(&0.0));
    }

    #[test]
    fn grid_diagonalizes_full_shift() {
        let lat = lattice(16);
        let eng = Engine::new(EngineKind::Dqw(CoinAngles::rotation(0.0)), lat.spacing()).unwrap();
        let grid = momentum_grid(&lat);
        let xs = lat.positions();
        for &k in &grid {
            let blk = lattice_block(&eng, &lat, k, 2).unwrap();
            assert!((blk[(0, 1)]).norm() < 1e-12 && (blk[(1, 0)]).norm() < 1e-12);
            let want = C64::from_polar(1.0, -k * lat.spacing());
            assert!((blk[(0, 0)] - want).norm() < 1e-12);
            // the other plane waves give no leakage
            for &q in grid.iter().filter(|&&q| q != k) {
                let mut amps = vec![ZERO; 32];
                for (i, &x) in xs.iter().enumerate() {
                    amps[i] = C64::from_polar(0.25, k * x);
                }
                let mut psi = WalkState::from_amplitudes(2, lat.clone(), amps).unwrap();
                eng.step(&mut psi, 1).unwrap();
                let ov: C64 = psi.coin_slice(0).iter().zip(&xs).map(|(p, &x)| C64::from_polar(0.25, -q * x) * p).sum();
                assert!(ov.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn massless_dqw_is_linear() {
        let dt = 0.01;
        for k in [-3.0, -0.5, 0.2, 7.0] {
            let m = hk_closed_form(&WalkParams::Dqw(CoinAngles::rotation(0.0)), k, dt);
            assert!((m.energy - f64::abs(k)).abs() < 1e-10);
            let want = pauli(3) * C64::from(k);
            assert!(crate::linalg::hermitian2_norm(&(m.h - want)) < 1e-9);
        }
    }

    #[test]
    fn dca_quasienergy_formula() {
        let dt = 0.02;
        for (th, k) in [(0.3, 1.0), (1.2, -4.0), (0.05, 30.0)] {
            let e = quasienergy(&WalkParams::dca_from_angle(th), k, dt);
            let want = (f64::cos(th) * (k * dt).cos()).acos() / dt;
            assert!((e - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ssdqw_equals_dca_entrywise() {
        let mut seed = 0.123f64;
        for _ in 0..20 {
            seed = (seed * 7919.0 + 0.37).fract();
            let th = (seed - 0.5) * 3.0;
            let k = (seed * 13.0).fract() * 40.0 - 20.0;
            let dt = 0.05;
            let a = hk_closed_form(&WalkParams::ssdqw(0.0, th), k, dt);
            let b = hk_closed_form(&WalkParams::dca_from_angle(th), k, dt);
            assert!(max_abs_diff(&to_dmatrix(&a.h), &to_dmatrix(&b.h)) < 1e-12, "th {th} k {k}");
        }
    }

    #[test]
    fn log_of_single_axis_rotation() {
        let th = 0.4;
        let dt = 0.1;
        let u = to_dmatrix(&crate::linalg::su2_exp([th, 0.0, 0.0]));
        let h = hamiltonian_from_unitary(&u, dt).unwrap();
        assert!(max_abs_diff(&h, &(to_dmatrix(&pauli(1)) * C64::from(th / dt))) < 1e-12);
        let z = hamiltonian_from_unitary(&DMatrix::identity(3, 3), dt).unwrap();
        assert!(crate::linalg::max_abs(&z) < 1e-15);
    }

    #[test]
    fn branch_ambiguity_rejected() {
        let u = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]));
        assert!(matches!(hamiltonian_from_unitary(&u, 1.0), Err(Error::BranchAmbiguity { .. })));
    }

    fn families() -> Vec<WalkParams> {
        vec![
            WalkParams::Dqw(CoinAngles::new(0.2, 0.5, -0.3, 0.4)),
            WalkParams::Dqw(CoinAngles::rotation(0.04)),
            WalkParams::ssdqw(0.3, -0.7),
            WalkParams::SsDqw { first: CoinAngles::new(0.1, 0.3, 0.2, -0.5), second: CoinAngles::new(-0.3, 0.6, -0.1, 0.2) },
            WalkParams::dca_from_angle(0.8),
        ]
    }

    fn engine_for(p: &WalkParams, dt: f64) -> Engine {
        let kind = match *p {
            WalkParams::Dqw(a) => EngineKind::Dqw(a),
            WalkParams::SsDqw { first, second } => EngineKind::SsDqw(CoinSchedule::homogeneous(first, second)),
            WalkParams::Dca { eta1, eta2 } => EngineKind::Dca { eta1, eta2 },
        };
        Engine::new(kind, dt).unwrap()
    }

    #[test]
    fn oracle_equivalence_on_full_grid() {
        let lat = lattice(64);
        let dt = lat.spacing();
        for p in families() {
            let eng = engine_for(&p, dt);
            for k in momentum_grid(&lat) {
                let blk = lattice_block(&eng, &lat, k, 2).unwrap();
                assert!(max_abs_diff(&blk, &to_dmatrix(&p.block(k * dt))) < 1e-12);
                let m = hk_closed_form(&p, k, dt);
                let h_log = match hamiltonian_from_unitary(&blk, dt) {
                    Ok(h) => h,
                    Err(Error::BranchAmbiguity { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                // compare after folding the global phase into the principal branch
                let shifted = to_dmatrix(&m.h);
                let recon = expm_hermitian(&shifted, dt);
                assert!(max_abs_diff(&recon, &blk) < 1e-10, "{p:?} k={k}");
                if (m.offset * dt).abs() + m.energy * dt < std::f64::consts::PI - 1e-6 {
                    assert!(max_abs_diff(&h_log, &shifted) * dt < 1e-10, "{p:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn eigen_structure() {
        let dt = 0.1;
        for p in families() {
            for j in 0..50 {
                let k = -30.0 + 1.2 * j as f64;
                let m = hk_closed_form(&p, k, dt);
                assert!(check_mode_system(&m) < 1e-12);
                let hp = m.h * m.phi_plus;
                let hm = m.h * m.phi_minus;
                assert!((hp - m.phi_plus * C64::from(m.offset + m.energy)).norm() < 1e-9);
                assert!((hm - m.phi_minus * C64::from(m.offset - m.energy)).norm() < 1e-9);
                assert!(m.phi_plus.dotc(&m.phi_minus).norm() < 1e-12);
                assert!((m.phi_plus.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_point_uses_fallback() {
        // theta = 0, k = 0 gives U = I
        let m = hk_closed_form(&WalkParams::ssdqw(0.0, 0.0), 0.0, 0.1);
        assert_eq!(m.energy, 0.0);
        assert!(m.phi_plus.dotc(&m.phi_minus).norm() < 1e-12);
    }

    #[test]
    fn quasienergy_monotone() {
        let dt = 0.01;
        let p = WalkParams::Dqw(CoinAngles::rotation(0.3));
        let es: Vec<f64> = (1..=100).map(|j| quasienergy(&p, j as f64 * std::f64::consts::PI / dt / 100.0, dt)).collect();
        assert!(es.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(quasienergy(&WalkParams::Dqw(CoinAngles::rotation(0.0)), 0.0, dt), 0.0);
    }

    #[test]
    fn zbw_limits() {
        assert!((zbw_frequency(std::f64::consts::FRAC_PI_2, 0.0, 0.1) - 5.0).abs() < 1e-12);
        assert_eq!(zbw_frequency(0.0, 0.0, 0.1), 0.0);
    }

    #[test]
    fn zbw_matches_fft_peak() {
        let dt = 1.0;
        let (th, k) = (0.3, 0.2);
        let p = WalkParams::ssdqw(0.0, th);
        let m = hk_closed_form(&p, k, dt);
        let u = p.block(k * dt);
        let mut v = (m.phi_plus + m.phi_minus) / C64::from(2f64.sqrt());
        let n = 512;
        let mut series = Vec::with_capacity(n);
        for _ in 0..n {
            let s3 = (v.adjoint() * pauli(3) * v)[(0, 0)].re;
            series.push(s3);
            v = u * v;
        }
        let mean = series.iter().sum::<f64>() / n as f64;
        let mut buf: Vec<C64> = series.iter().map(|s| C64::from(s - mean)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let peak = (1..n / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap();
        let freq = peak as f64 / (n as f64 * dt);
        let z = zbw_frequency(th, k, dt);
        assert!((freq - z).abs() <= 1.0 / (n as f64 * dt), "fft {freq} vs {z}");
    }

    #[test]
    fn continuum_massless_and_orders() {
        for fam in [ContinuumFamily::Dqw, ContinuumFamily::SsDqw, ContinuumFamily::Dca] {
            assert!(continuum_deviation(fam, 100.0, 0.0, 0.1, 41) < 1e-12);
        }
        let c100 = continuum_deviation(ContinuumFamily::SsDqw, 100.0, 0.04, 0.1, 41);
        let c1000 = continuum_deviation(ContinuumFamily::SsDqw, 1000.0, 0.04, 0.1, 41);
        assert!(c100 / c1000 > 50.0);
        let d100 = continuum_deviation(ContinuumFamily::Dca, 100.0, 0.04, 0.1, 41);
        assert!(d100 < 1e-4);
    }

    proptest! {
        #[test]
        fn reconstructs_block(t1 in -1.5..1.5f64, t2 in -1.5..1.5f64, k in -50.0..50.0f64) {
            let p = WalkParams::ssdqw(t1, t2);
            let dt = 0.05;
            let m = hk_closed_form(&p, k, dt);
            let recon = expm_hermitian(&to_dmatrix(&m.h), dt);
            prop_assert!(max_abs_diff(&recon, &to_dmatrix(&p.block(k * dt))) < 1e-10);
        }
    }
}
