//! Single-step evolution for every walk family, trajectories, and the
//! classical random walk baseline.
//!
//! Step n (counting from 1) uses physical time t = n * dt, so schedules that
//! are singular at t = 0 are never evaluated there.

use nalgebra::DMatrix;

use crate::coin::{
    apply_dense_coin, apply_uniform_coin, block_direct_sum, coin_field, nonabelian_coin, u2_from_angles, CoinAngles,
    CoinSchedule, NonabelianCoinSpec, SubStep,
};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64, I};
use crate::observables::{entanglement_entropy, position_probability};
use crate::shift::{shift, ShiftKind};
use crate::state::{TwoParticleState, WalkState};
use crate::two_particle::{step_two_particle, TwoCoinField};

#[derive(Clone, Debug)]
pub enum EngineKind {
    /// Classical walk with probability `p_head` of stepping right.
    Crw { p_head: f64 },
    Dqw(CoinAngles),
    SsDqw(CoinSchedule),
    Dca { eta1: f64, eta2: f64 },
    Modified(CoinSchedule),
    Neutrino { thetas: [f64; 3] },
    TwoParticle(TwoCoinField),
    NonabelianModified(CoinSchedule, NonabelianCoinSpec),
}

impl EngineKind {
    pub fn name(&self) -> &'static str {
        match self {
            EngineKind::Crw { .. } => "crw",
            EngineKind::Dqw(_) => "dqw",
            EngineKind::SsDqw(_) => "ssdqw",
            EngineKind::Dca { .. } => "dca",
            EngineKind::Modified(_) => "modified",
            EngineKind::Neutrino { .. } => "neutrino",
            EngineKind::TwoParticle(_) => "two_particle",
            EngineKind::NonabelianModified(..) => "nonabelian_modified",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Engine {
    pub kind: EngineKind,
    pub dt: f64,
}

pub fn check_dca(eta1: f64, eta2: f64) -> Result<()> {
    let s = eta1 * eta1 + eta2 * eta2;
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::DcaNormalization { value: s });
    }
    Ok(())
}

impl Engine {
    pub fn new(kind: EngineKind, dt: f64) -> Result<Self> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be finite and non-negative, got {dt}")));
        }
        match &kind {
            EngineKind::Dca { eta1, eta2 } => check_dca(*eta1, *eta2)?,
            EngineKind::Crw { p_head } if !(0.0..=1.0).contains(p_head) => {
                return Err(Error::InvalidParameter(format!("p_head must lie in [0, 1], got {p_head}")))
            }
            _ => {}
        }
        Ok(Self { kind, dt })
    }

    /// Applies step number `n` (n >= 1) in place.
    pub fn step(&self, state: &mut WalkState, n: usize) -> Result<()> {
        let t = n as f64 * self.dt;
        match &self.kind {
            EngineKind::Dqw(a) => step_dqw(state, a),
            EngineKind::SsDqw(s) => step_ssdqw(state, s, t, self.dt),
            EngineKind::Dca { eta1, eta2 } => step_dca(state, *eta1, *eta2),
            EngineKind::Modified(s) => step_modified(state, s, t, self.dt),
            EngineKind::Neutrino { thetas } => step_neutrino(state, thetas),
            EngineKind::NonabelianModified(s, spec) => step_nonabelian_modified(state, s, spec, t, self.dt),
            EngineKind::Crw { .. } => Err(Error::UnsupportedEngine("crw (use crw_distribution)")),
            EngineKind::TwoParticle(_) => Err(Error::UnsupportedEngine("two_particle (use step_two)")),
        }
    }

    pub fn step_two(&self, state: &mut TwoParticleState, n: usize) -> Result<()> {
        match &self.kind {
            EngineKind::TwoParticle(f) => step_two_particle(state, f, n as f64 * self.dt, self.dt),
            _ => Err(Error::UnsupportedEngine("single-particle engine on a two-particle state")),
        }
    }
}

/// S (C (x) I)
pub fn step_dqw(state: &mut WalkState, angles: &CoinAngles) -> Result<()> {
    apply_uniform_coin(state, &u2_from_angles(angles))?;
    shift(ShiftKind::Full, 2, state.lattice())?.apply(state)
}

/// S+ C2(t,dt) S- C1(t,dt)
pub fn step_ssdqw(state: &mut WalkState, schedule: &CoinSchedule, t: f64, dt: f64) -> Result<()> {
    let lat = state.lattice().clone();
    coin_field(schedule, SubStep::First, t, dt, &lat).apply(state)?;
    shift(ShiftKind::HalfMinus, 2, &lat)?.apply(state)?;
    coin_field(schedule, SubStep::Second, t, dt, &lat).apply(state)?;
    shift(ShiftKind::HalfPlus, 2, &lat)?.apply(state)
}

/// eta1 [|up><up| (x) T+ + |down><down| (x) T-] - i eta2 sigma1 (x) I
pub fn step_dca(state: &mut WalkState, eta1: f64, eta2: f64) -> Result<()> {
    check_dca(eta1, eta2)?;
    if state.coin_dim() != 2 {
        return Err(Error::DimensionMismatch("DCA acts on a two-dimensional coin".into()));
    }
    let n = state.sites();
    let hop = C64::new(eta1, 0.0);
    let mass = -I * eta2;
    let old = state.amplitudes().to_vec();
    let amps = state.amplitudes_mut();
    for x in 0..n {
        let left = (x + n - 1) % n;
        let right = (x + 1) % n;
        amps[x] = hop * old[left] + mass * old[n + x];
        amps[n + x] = mass * old[x] + hop * old[n + right];
    }
    Ok(())
}

/// C1^dagger(t,0) C2^dagger(t,0) S+ C2(t,dt) S- C1(t,dt)
pub fn step_modified(state: &mut WalkState, schedule: &CoinSchedule, t: f64, dt: f64) -> Result<()> {
    step_ssdqw(state, schedule, t, dt)?;
    let lat = state.lattice().clone();
    coin_field(schedule, SubStep::Second, t, 0.0, &lat).adjoint().apply(state)?;
    coin_field(schedule, SubStep::First, t, 0.0, &lat).adjoint().apply(state)
}

/// Sectored S+ C2 S- C1 with C1 = I and C2 = direct sum of exp(-i theta_j sigma1).
pub fn step_neutrino(state: &mut WalkState, thetas: &[f64; 3]) -> Result<()> {
    if state.coin_dim() != 6 {
        return Err(Error::DimensionMismatch("neutrino walk needs a six-dimensional coin".into()));
    }
    let lat = state.lattice().clone();
    shift(ShiftKind::SectoredMinus, 6, &lat)?.apply(state)?;
    apply_dense_coin(state, &neutrino_coin(thetas)?)?;
    shift(ShiftKind::SectoredPlus, 6, &lat)?.apply(state)
}

pub fn neutrino_coin(thetas: &[f64; 3]) -> Result<DMatrix<C64>> {
    let blocks: Vec<Mat2> = thetas.iter().map(|&th| u2_from_angles(&CoinAngles::rotation(th))).collect();
    block_direct_sum(&blocks)
}

fn apply_site_coins(state: &mut WalkState, coins: &[DMatrix<C64>]) {
    let d = state.coin_dim();
    let n = state.sites();
    let amps = state.amplitudes_mut();
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for (x, coin) in coins.iter().enumerate() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = (0..d).map(|j| coin[(i, j)] * amps[j * n + x]).sum();
        }
        for (i, b) in buf.iter().enumerate() {
            amps[i * n + x] = *b;
        }
    }
}

/// Modified split-step walk on a 2N coin (spin (x) gauge).
pub fn step_nonabelian_modified(
    state: &mut WalkState,
    schedule: &CoinSchedule,
    spec: &NonabelianCoinSpec,
    t: f64,
    dt: f64,
) -> Result<()> {
    let d = 2 * spec.gauge_dim();
    if state.coin_dim() != d {
        return Err(Error::DimensionMismatch(format!("nonabelian walk needs coin dimension {d}")));
    }
    let lat = state.lattice().clone();
    let xs = lat.positions();
    let coins = |sub: SubStep, step_dt: f64| -> Vec<DMatrix<C64>> {
        xs.iter().map(|&x| nonabelian_coin(schedule, spec, sub, x, t, step_dt)).collect()
    };
    apply_site_coins(state, &coins(SubStep::First, dt));
    shift(ShiftKind::HalfMinus, d, &lat)?.apply(state)?;
    apply_site_coins(state, &coins(SubStep::Second, dt));
    shift(ShiftKind::HalfPlus, d, &lat)?.apply(state)?;
    let undo2: Vec<_> = coins(SubStep::Second, 0.0).iter().map(|m| m.adjoint()).collect();
    apply_site_coins(state, &undo2);
    let undo1: Vec<_> = coins(SubStep::First, 0.0).iter().map(|m| m.adjoint()).collect();
    apply_site_coins(state, &undo1);
    Ok(())
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ObservableSet {
    pub position: bool,
    pub entropy: bool,
    pub norm: bool,
}

impl ObservableSet {
    pub fn all() -> Self {
        Self { position: true, entropy: true, norm: true }
    }
}

/// Recorded time series; entry 0 is the initial state.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub position: Vec<Vec<f64>>,
    pub entropy: Vec<f64>,
    pub norm: Vec<f64>,
    pub final_state: WalkState,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn evolve(state: &WalkState, engine: &Engine, n_steps: usize, record: &ObservableSet) -> Result<Trajectory> {
    let mut psi = state.clone();
    let mut traj = Trajectory {
        steps: Vec::with_capacity(n_steps + 1),
        times: Vec::with_capacity(n_steps + 1),
        position: Vec::new(),
        entropy: Vec::new(),
        norm: Vec::new(),
        final_state: state.clone(),
    };
    let snap = |n: usize, psi: &WalkState, traj: &mut Trajectory| {
        traj.steps.push(n);
        traj.times.push(n as f64 * engine.dt);
        if record.position {
            traj.position.push(position_probability(psi));
        }
        if record.entropy {
            traj.entropy.push(entanglement_entropy(psi));
        }
        if record.norm {
            traj.norm.push(psi.norm());
        }
    };
    snap(0, &psi, &mut traj);
    for n in 1..=n_steps {
        engine.step(&mut psi, n)?;
        snap(n, &psi, &mut traj);
    }
    warn_on_boundary(&psi);
    traj.final_state = psi;
    Ok(traj)
}

/// Probability on the two sites adjacent to the periodic seam.
pub fn boundary_probability(state: &WalkState) -> f64 {
    let lat = state.lattice();
    let n = lat.sites() as i64;
    let far = [lat.site(n / 2), lat.site(n / 2 - 1)];
    (0..state.coin_dim()).flat_map(|c| far.iter().map(move |&s| (c, s))).map(|(c, s)| state.amplitude(c, s).norm_sqr()).sum()
}

fn warn_on_boundary(state: &WalkState) {
    let p = boundary_probability(state);
    if p > 1e-8 {
        log::warn!("probability {p:.3e} reached the periodic boundary; enlarge the lattice to emulate an infinite line");
    }
}

/// Exact classical distribution over offsets `min_offset..`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrwDistribution {
    pub min_offset: i64,
    pub probs: Vec<f64>,
}

impl CrwDistribution {
    pub fn get(&self, offset: i64) -> f64 {
        let i = offset - self.min_offset;
        if i < 0 {
            return 0.0;
        }
        self.probs.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| (self.min_offset + i as i64) as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs.iter().enumerate().map(|(i, p)| ((self.min_offset + i as i64) as f64 - m).powi(2) * p).sum()
    }
}

pub fn crw_distribution(p_head: f64, n_steps: usize, initial_offset: i64) -> Result<CrwDistribution> {
    if !(0.0..=1.0).contains(&p_head) {
        return Err(Error::InvalidParameter(format!("p_head must lie in [0, 1], got {p_head}")));
    }
    let width = 2 * n_steps + 1;
    let mut probs = vec![0.0; width];
    probs[n_steps] = 1.0;
    let mut next = vec![0.0; width];
    for _ in 0..n_steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..width {
            let p = probs[i];
            if p == 0.0 {
                continue;
            }
            if i + 1 < width {
                next[i + 1] += p_head * p;
            }
            if i > 0 {
                next[i - 1] += (1.0 - p_head) * p;
            }
        }
        std::mem::swap(&mut probs, &mut next);
    }
    Ok(CrwDistribution { min_offset: initial_offset - n_steps as i64, probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::Field;
    use crate::linalg::c;
    use crate::state::{make_basis_state, superpose, Lattice};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn plus_state(lat: &Lattice, phase: C64) -> WalkState {
        superpose(&[(c(1.0, 0.0), make_basis_state(0, 0, 2, lat).unwrap()), (phase, make_basis_state(1, 0, 2, lat).unwrap())])
            .unwrap()
    }

    #[test]
    fn dqw_single_step() {
        let lat = Lattice::new(8, 1.0).unwrap();
        let mut s = make_basis_state(0, 0, 2, &lat).unwrap();
        step_dqw(&mut s, &CoinAngles::rotation(PI / 4.0)).unwrap();
        assert!((s.amplitude(0, 1) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(1, lat.site(-1)) - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        let mut id = make_basis_state(0, 3, 2, &lat).unwrap();
        step_dqw(&mut id, &CoinAngles::default()).unwrap();
        assert_eq!(id.amplitude(0, 4), c(1.0, 0.0));
    }

    #[test]
    fn dqw_parity_support() {
        let lat = Lattice::new(256, 1.0).unwrap();
        let mut s = plus_state(&lat, c(1.0, 0.0));
        for _ in 0..100 {
            step_dqw(&mut s, &CoinAngles::rotation(PI / 4.0)).unwrap();
        }
        let p = position_probability(&s);
        for site in 0..256 {
            if lat.offset(site) % 2 != 0 {
                assert_eq!(p[site], 0.0);
            }
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_angle_ssdqw_is_pure_translation() {
        let lat = Lattice::new(6, 1.0).unwrap();
        let mut s = plus_state(&lat, I);
        step_ssdqw(&mut s, &CoinSchedule::new(), 0.0, 0.1).unwrap();
        assert!((s.amplitude(0, 1) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((s.amplitude(1, 5) - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn dca_normalization_rejected() {
        let lat = Lattice::new(6, 1.0).unwrap();
        let mut s = plus_state(&lat, I);
        assert!(matches!(step_dca(&mut s, 0.8, 0.8), Err(Error::DcaNormalization { .. })));
        assert!(Engine::new(EngineKind::Dca { eta1: 1.0, eta2: 0.1 }, 1.0).is_err());
        step_dca(&mut s, 1.0, 0.0).unwrap();
        assert!((s.amplitude(0, 1) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn modified_with_trivial_base_is_plain_ssdqw() {
        let lat = Lattice::new(32, 0.05).unwrap();
        let sched = CoinSchedule::new()
            .with_rate(SubStep::Second, 1, Field::Const(0.7))
            .with_rate(SubStep::First, 1, Field::func(|x, t| x + t));
        let init = plus_state(&lat, I);
        let (mut a, mut b) = (init.clone(), init);
        step_modified(&mut a, &sched, 0.3, 0.05).unwrap();
        step_ssdqw(&mut b, &sched, 0.3, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn neutrino_sector_matches_two_dim_walk() {
        let lat = Lattice::new(20, 1.0).unwrap();
        let thetas = [0.2, 0.5, 0.9];
        for j in 0..3 {
            let amps6: Vec<C64> = (0..120)
                .map(|i| {
                    let (zeta, x) = (i / 20, i % 20);
                    if zeta / 2 == j { c((x as f64).sin(), zeta as f64 * 0.3) } else { c(0.0, 0.0) }
                })
                .collect();
            let mut six = WalkState::from_amplitudes(6, lat.clone(), amps6.clone()).unwrap();
            let two_amps: Vec<C64> = amps6[40 * j..40 * j + 40].to_vec();
            let mut two = WalkState::from_amplitudes(2, lat.clone(), two_amps).unwrap();
            let sched = CoinSchedule::homogeneous(CoinAngles::default(), CoinAngles::rotation(thetas[j]));
            for _ in 0..7 {
                step_neutrino(&mut six, &thetas).unwrap();
                step_ssdqw(&mut two, &sched, 0.0, 1.0).unwrap();
            }
            let scale = six.coin_slice(2 * j)[0].norm() / two.coin_slice(0)[0].norm();
            for x in 0..20 {
                for s in 0..2 {
                    let d = six.amplitude(2 * j + s, x) - two.amplitude(s, x) * scale;
                    assert!(d.norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn norm_preserved_over_many_steps() {
        let lat = Lattice::with_scale(64, 40.0).unwrap();
        let sched = CoinSchedule::new()
            .with_base(SubStep::First, 0, Field::func(|x, t| -3.0 * x * t))
            .with_base(SubStep::First, 1, Field::func(|x, _| 0.3 + 0.2 * (2.0 * x).sin()))
            .with_rate(SubStep::First, 1, Field::Const(-0.4))
            .with_base(SubStep::Second, 1, Field::func(|x, _| -0.6 - 0.4 * (2.0 * x).sin()))
            .with_rate(SubStep::Second, 1, Field::func(|_, t| 0.04 * t));
        let engines = [
            Engine::new(EngineKind::Dqw(CoinAngles::new(0.1, 0.4, 0.2, -0.3)), 1.0 / 40.0).unwrap(),
            Engine::new(EngineKind::SsDqw(sched.clone()), 1.0 / 40.0).unwrap(),
            Engine::new(EngineKind::Dca { eta1: 0.6, eta2: 0.8 }, 1.0 / 40.0).unwrap(),
            Engine::new(EngineKind::Modified(sched), 1.0 / 40.0).unwrap(),
        ];
        for e in &engines {
            let mut s = plus_state(&lat, I);
            for n in 1..=1000 {
                e.step(&mut s, n).unwrap();
            }
            assert!((s.norm() - 1.0).abs() < 1e-10, "{}", e.kind.name());
        }
    }

    #[test]
    fn evolve_records_initial_state() {
        let lat = Lattice::new(8, 1.0).unwrap();
        let e = Engine::new(EngineKind::Dqw(CoinAngles::rotation(0.3)), 1.0).unwrap();
        let s = make_basis_state(0, 0, 2, &lat).unwrap();
        let traj = evolve(&s, &e, 0, &ObservableSet::all()).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.final_state, s);
        let traj = evolve(&s, &e, 3, &ObservableSet::all()).unwrap();
        assert_eq!(traj.len(), 4);
        assert_eq!(traj.steps, vec![0, 1, 2, 3]);
        assert!(traj.norm.iter().all(|n| (n - 1.0).abs() < 1e-14));
    }

    #[test]
    fn crw_recursion() {
        let d = crw_distribution(0.5, 2, 0).unwrap();
        assert_eq!((d.get(-2), d.get(0), d.get(2), d.get(1)), (0.25, 0.5, 0.25, 0.0));
        let drift = crw_distribution(1.0, 7, 3).unwrap();
        assert_eq!(drift.get(10), 1.0);
        let wide = crw_distribution(0.5, 100, 0).unwrap();
        assert!((wide.variance() - 100.0).abs() < 1e-9);
        assert!(crw_distribution(1.5, 1, 0).is_err());
    }
}
