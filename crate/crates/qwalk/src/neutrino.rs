//! Three-flavour neutrino oscillation on a six-dimensional coin.
//!
//! Mass eigenstate j lives in the coin sector {zeta_{2j-1}, zeta_{2j}} and
//! evolves under an SS-DQW with theta^1_1 = 0 and theta^1_2 = theta_j.
//! Runs use lattice units a = dt = 1, so k stands for ka.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::engine::{Engine, EngineKind};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::observables::entanglement_entropy;
use crate::spectral::{hk_closed_form, momentum_grid, WalkParams};
use crate::state::{Lattice, WalkState};

pub type Mat3 = Matrix3<C64>;

pub const FLAVOURS: [&str; 3] = ["e", "mu", "tau"];

/// Mixing angles and phases in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PmnsParams {
    pub theta12: f64,
    pub theta13: f64,
    pub theta23: f64,
    pub delta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for PmnsParams {
    /// Global-fit central values for normal ordering, CP phases zero.
    fn default() -> Self {
        Self {
            theta12: 33.48f64.to_radians(),
            theta13: 8.50f64.to_radians(),
            theta23: 42.3f64.to_radians(),
            delta: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
        }
    }
}

/// R23 U13(delta) R12 diag(e^{i alpha1/2}, e^{i alpha2/2}, 1)
pub fn pmns_matrix(p: &PmnsParams) -> Mat3 {
    let (s12, c12) = p.theta12.sin_cos();
    let (s13, c13) = p.theta13.sin_cos();
    let (s23, c23) = p.theta23.sin_cos();
    let r = |x: f64| C64::new(x, 0.0);
    let r23 = Mat3::new(r(1.0), ZERO, ZERO, ZERO, r(c23), r(s23), ZERO, r(-s23), r(c23));
    let u13 = Mat3::new(
        r(c13),
        ZERO,
        C64::from_polar(s13, -p.delta),
        ZERO,
        r(1.0),
        ZERO,
        -C64::from_polar(s13, p.delta),
        ZERO,
        r(c13),
    );
    let r12 = Mat3::new(r(c12), r(s12), ZERO, r(-s12), r(c12), ZERO, ZERO, ZERO, r(1.0));
    let maj = Mat3::from_diagonal(&nalgebra::Vector3::new(
        C64::from_polar(1.0, p.alpha1 / 2.0),
        C64::from_polar(1.0, p.alpha2 / 2.0),
        r(1.0),
    ));
    r23 * u13 * r12 * maj
}

/// Squared-mass splittings in eV^2 and beam energy in GeV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassSpectrum {
    pub dm21: f64,
    pub dm31: f64,
    pub dm32: f64,
    pub energy_gev: f64,
}

impl MassSpectrum {
    pub fn new(dm21: f64, dm31: f64, dm32: f64, energy_gev: f64) -> Result<Self> {
        if ((dm31 - dm21) - dm32).abs() > 1e-6 * dm31.abs().max(dm32.abs()) {
            return Err(Error::InvalidParameter(format!("dm32 = {dm32} differs from dm31 - dm21 = {}", dm31 - dm21)));
        }
        if !(dm21 > 0.0 && energy_gev > 0.0) {
            return Err(Error::InvalidParameter("dm21 and the beam energy must be positive".into()));
        }
        Ok(Self { dm21, dm31, dm32, energy_gev })
    }

    /// Normal ordering, E = 1 GeV.
    pub fn normal_ordering() -> Self {
        Self { dm21: 7.50e-5, dm31: 2.457e-3, dm32: 2.382e-3, energy_gev: 1.0 }
    }

    /// m_j^2 - m_1^2 for j = 1, 2, 3.
    pub fn relative(&self) -> [f64; 3] {
        [0.0, self.dm21, self.dm31]
    }
}

/// Dm^2 L / (2E) in radians for Dm^2 in eV^2, L in km and E in GeV.
pub const PHASE_PER_EV2_KM_PER_GEV: f64 = 2.533_865;

/// Coin angles theta^1_2(m_j), momentum k~ = ka and the two run lengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkCalibration {
    pub thetas: [f64; 3],
    pub k: f64,
    pub steps_short: usize,
    pub steps_long: usize,
}

impl WalkCalibration {
    /// The calibrated values used for the short and long oscillation profiles.
    pub fn reference() -> Self {
        Self { thetas: [0.001, 0.006_156_54, 0.066_468_8], k: 0.01, steps_short: 450, steps_long: 4500 }
    }

    /// true when k~ >= 10 max theta_j
    pub fn ultra_relativistic(&self) -> bool {
        self.thetas.iter().all(|&t| self.k >= 10.0 * t.abs())
    }

    pub fn engine(&self) -> Result<Engine> {
        Engine::new(EngineKind::Neutrino { thetas: self.thetas }, 1.0)
    }
}

/// Exact quasienergies E_j(k) = arccos[cos theta_j cos k].
pub fn walk_energies(cal: &WalkCalibration, k: f64) -> [f64; 3] {
    cal.thetas.map(|th| (th.cos() * k.cos()).clamp(-1.0, 1.0).acos())
}

/// Phases entering the analytic probability.
#[derive(Clone, Copy, Debug)]
pub enum PhaseArgs {
    /// E_j t for each mass eigenstate.
    EnergyTimes([f64; 3]),
    /// Ultra-relativistic reduction with L/E in km/GeV.
    Baseline { spectrum: MassSpectrum, l_over_e: f64 },
}

impl PhaseArgs {
    fn phases(&self) -> [f64; 3] {
        match *self {
            PhaseArgs::EnergyTimes(p) => p,
            PhaseArgs::Baseline { spectrum, l_over_e } => {
                spectrum.relative().map(|dm| PHASE_PER_EV2_KM_PER_GEV * dm * l_over_e)
            }
        }
    }
}

/// |sum_j U*_{alpha j} e^{-i phi_j} U_{beta j}|^2
pub fn analytic_transition_probability(alpha: usize, beta: usize, args: &PhaseArgs, pmns: &Mat3) -> f64 {
    let ph = args.phases();
    let amp: C64 = (0..3).map(|j| pmns[(alpha, j)].conj() * C64::from_polar(1.0, -ph[j]) * pmns[(beta, j)]).sum();
    amp.norm_sqr()
}

/// The real-matrix cosine form, valid when all CP phases vanish.
pub fn analytic_transition_probability_real(alpha: usize, beta: usize, args: &PhaseArgs, pmns: &Mat3) -> f64 {
    let ph = args.phases();
    let u = |a: usize, j: usize| pmns[(a, j)].re;
    let mut p = 0.0;
    for j in 0..3 {
        p += (u(alpha, j) * u(beta, j)).powi(2);
        for l in 0..j {
            p += 2.0 * u(alpha, j) * u(alpha, l) * u(beta, j) * u(beta, l) * (ph[j] - ph[l]).cos();
        }
    }
    p
}

/// f |zeta_{2j-1}> + g |zeta_{2j}> with (f, g) = phi^+(k) of sector j (1-based).
pub fn mass_eigenstate(j: usize, k: f64, cal: &WalkCalibration) -> Result<DVector<C64>> {
    if !(1..=3).contains(&j) {
        return Err(Error::IndexOutOfRange { what: "mass eigenstate", value: j as i64, bound: 4 });
    }
    let m = hk_closed_form(&WalkParams::ssdqw(0.0, cal.thetas[j - 1]), k, 1.0);
    let mut v = DVector::zeros(6);
    v[2 * (j - 1)] = m.phi_plus[0];
    v[2 * (j - 1) + 1] = m.phi_plus[1];
    Ok(v)
}

/// |nu_alpha(k)> = sum_j U*_{alpha j} |nu_{m_j}(k)>
pub fn flavour_state(alpha: usize, k: f64, cal: &WalkCalibration, pmns: &Mat3) -> Result<DVector<C64>> {
    let mut v = DVector::zeros(6);
    for j in 1..=3 {
        v += mass_eigenstate(j, k, cal)? * pmns[(alpha, j - 1)].conj();
    }
    Ok(v)
}

/// Six-dimensional one-step block at momentum k: the direct sum of the sector blocks.
pub fn neutrino_block(cal: &WalkCalibration, k: f64) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(6, 6);
    for (j, &th) in cal.thetas.iter().enumerate() {
        let b = WalkParams::ssdqw(0.0, th).block(k);
        for r in 0..2 {
            for c in 0..2 {
                m[(2 * j + r, 2 * j + c)] = b[(r, c)];
            }
        }
    }
    m
}

/// P_{alpha -> beta} after every step 0..=n_steps at the single momentum k~.
pub fn walk_series(alpha: usize, n_steps: usize, cal: &WalkCalibration, pmns: &Mat3) -> Result<Vec<[f64; 3]>> {
    let block = neutrino_block(cal, cal.k);
    let flav: Vec<DVector<C64>> = (0..3).map(|b| flavour_state(b, cal.k, cal, pmns)).collect::<Result<_>>()?;
    let mut psi = flav[alpha].clone();
    let mut out = Vec::with_capacity(n_steps + 1);
    for n in 0..=n_steps {
        if n > 0 {
            psi = &block * psi;
        }
        out.push([0, 1, 2].map(|b| flav[b].dotc(&psi).norm_sqr()));
    }
    Ok(out)
}

pub fn walk_transition_probability(
    alpha: usize,
    beta: usize,
    n_steps: usize,
    cal: &WalkCalibration,
    pmns: &Mat3,
) -> Result<f64> {
    Ok(walk_series(alpha, n_steps, cal, pmns)?[n_steps][beta])
}

/// Analytic probabilities at the exact walk quasienergies, steps 0..=n_steps.
pub fn analytic_series(alpha: usize, n_steps: usize, cal: &WalkCalibration, pmns: &Mat3) -> Vec<[f64; 3]> {
    let e = walk_energies(cal, cal.k);
    (0..=n_steps)
        .map(|n| {
            let args = PhaseArgs::EnergyTimes(e.map(|x| x * n as f64));
            [0, 1, 2].map(|b| analytic_transition_probability(alpha, b, &args, pmns))
        })
        .collect()
}

/// Options for mapping an experiment onto walk parameters.
#[derive(Clone, Copy, Debug)]
pub struct MappingOptions {
    pub k: f64,
    pub theta1: f64,
    /// Largest admissible coin angle.
    pub max_angle: f64,
}

impl Default for MappingOptions {
    fn default() -> Self {
        Self { k: 0.01, theta1: 0.001, max_angle: 0.3 }
    }
}

fn period_steps(dtheta2: f64, k: f64) -> f64 {
    // phase per step (theta_j^2 - theta_l^2) / (2k)
    2.0 * std::f64::consts::PI * 2.0 * k / dtheta2
}

/// Angles whose walk phases reproduce the experimental ones, with
/// `target_steps` spanning one full m2-m1 oscillation.
pub fn map_experiment_to_walk(spectrum: &MassSpectrum, target_steps: usize, opts: &MappingOptions) -> Result<WalkCalibration> {
    if target_steps == 0 {
        return Err(Error::InvalidParameter("target_steps must be at least 1".into()));
    }
    let n = target_steps as f64;
    let d21 = 4.0 * std::f64::consts::PI * opts.k / n;
    let t1sq = opts.theta1 * opts.theta1;
    let t2sq = t1sq + d21;
    let t3sq = t2sq + d21 * spectrum.dm32 / spectrum.dm21;
    let thetas = [opts.theta1, t2sq.sqrt(), t3sq.sqrt()];
    if thetas[2] >= opts.max_angle {
        let room = opts.max_angle * opts.max_angle - t1sq;
        let ratio = 1.0 + spectrum.dm32 / spectrum.dm21;
        let min_steps = if room > 0.0 { (ratio * 4.0 * std::f64::consts::PI * opts.k / room).ceil() as u64 + 1 } else { u64::MAX };
        return Err(Error::Infeasible {
            reason: format!("theta_3 = {:.4} rad exceeds the small-angle bound {}", thetas[2], opts.max_angle),
            min_steps,
        });
    }
    let steps_short = period_steps(t3sq - t1sq, opts.k).ceil() as usize;
    let cal = WalkCalibration { thetas, k: opts.k, steps_short, steps_long: target_steps };
    if !cal.ultra_relativistic() {
        log::warn!("k = {} is below 10 x theta_3 = {:.4}; the quadratic expansion is inaccurate", opts.k, 10.0 * thetas[2]);
    }
    Ok(cal)
}

pub const PLANCK_TIME_S: f64 = 5.3912e-44;
pub const FEASIBLE_STEP_LIMIT: f64 = 1e12;

/// Walk steps needed for one oscillation when dt is the Planck time.
#[derive(Clone, Copy, Debug)]
pub struct PlanckEstimate {
    pub atmospheric_steps: f64,
    pub solar_steps: f64,
    pub feasible: bool,
}

/// L_osc = 2.48 km E[GeV] / Dm^2[eV^2], step count (L_osc / c) / t_p.
pub fn planck_estimate(spectrum: &MassSpectrum) -> PlanckEstimate {
    const C_KM_S: f64 = 299_792.458;
    let steps = |dm: f64| 2.48 * spectrum.energy_gev / dm / C_KM_S / PLANCK_TIME_S;
    let atmospheric_steps = steps(spectrum.dm31);
    let solar_steps = steps(spectrum.dm21);
    PlanckEstimate { atmospheric_steps, solar_steps, feasible: solar_steps <= FEASIBLE_STEP_LIMIT }
}

/// sum_k p(k) |nu_alpha(k)> (x) |k> over grid momenta within [k0 - eps, k0 + eps].
pub fn gaussian_flavour_state(
    alpha: usize,
    k0: f64,
    width: f64,
    eps: f64,
    pmns: &Mat3,
    cal: &WalkCalibration,
    lattice: &Lattice,
) -> Result<WalkState> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("momentum window must be positive".into()));
    }
    let a = lattice.spacing();
    let ks: Vec<f64> = momentum_grid(lattice).into_iter().filter(|k| (k * a - k0).abs() <= eps + 1e-12).collect();
    if ks.is_empty() {
        return Err(Error::EmptyWindow { lo: k0 - eps, hi: k0 + eps });
    }
    let n = lattice.sites();
    let xs = lattice.positions();
    let mut amps = vec![ZERO; 6 * n];
    for &k in &ks {
        let p = (-0.5 * width * (k * a - k0).powi(2)).exp();
        let v = flavour_state(alpha, k * a, cal, pmns)?;
        for (site, &x) in xs.iter().enumerate() {
            let w = C64::from_polar(p, k * x);
            for c in 0..6 {
                amps[c * n + site] += v[c] * w;
            }
        }
    }
    WalkState::from_amplitudes(6, lattice.clone(), amps)
}

/// Entropy of the reduced coin state after each step 0..=n_steps.
pub fn oscillation_entropy_series(state: &WalkState, cal: &WalkCalibration, n_steps: usize) -> Result<Vec<f64>> {
    if state.coin_dim() != 6 {
        return Err(Error::DimensionMismatch("oscillation entropy needs a six-dimensional coin".into()));
    }
    let engine = cal.engine()?;
    let mut psi = state.clone();
    let mut out = vec![entanglement_entropy(&psi)];
    for n in 1..=n_steps {
        engine.step(&mut psi, n)?;
        out.push(entanglement_entropy(&psi));
    }
    Ok(out)
}

/// Flavour probabilities of a lattice state, projecting each momentum
/// component on the flavour vectors at that momentum.
pub fn wavepacket_flavour_probabilities(
    state: &WalkState,
    cal: &WalkCalibration,
    pmns: &Mat3,
    k_window: (f64, f64),
) -> Result<[f64; 3]> {
    let lat = state.lattice();
    let n = lat.sites();
    let a = lat.spacing();
    let xs = lat.positions();
    let norm = 1.0 / (n as f64).sqrt();
    let mut out = [0.0; 3];
    for k in momentum_grid(lat).into_iter().filter(|k| (k_window.0..=k_window.1).contains(&(k * a))) {
        let mut comp = DVector::<C64>::zeros(6);
        for c in 0..6 {
            comp[c] = state.coin_slice(c).iter().zip(&xs).map(|(p, &x)| C64::from_polar(norm, -k * x) * p).sum();
        }
        for (b, o) in out.iter_mut().enumerate() {
            *o += flavour_state(b, k * a, cal, pmns)?.dotc(&comp).norm_sqr();
        }
    }
    Ok(out)
}

/// Three-qubit label of zeta_{r+1}: |000> .. |101>.
pub fn three_qubit_label(r: usize) -> Option<String> {
    (r < 6).then(|| format!("{:03b}", r))
}

/// Qubit-qutrit label of zeta_{r+1}: |00> .. |12>.
pub fn qubit_qutrit_label(r: usize) -> Option<String> {
    (r < 6).then(|| format!("{}{}", r / 3, r % 3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pmns_identity_and_real() {
        let z = PmnsParams { theta12: 0.0, theta13: 0.0, theta23: 0.0, delta: 0.0, alpha1: 0.0, alpha2: 0.0 };
        assert!((pmns_matrix(&z) - Mat3::identity()).norm() < 1e-15);
        let u = pmns_matrix(&PmnsParams::default());
        assert!(u.iter().all(|x| x.im == 0.0));
    }

    proptest! {
        #[test]
        fn pmns_unitary(a in 0.0..3.2f64, b in 0.0..3.2f64, c in 0.0..3.2f64, d in 0.0..6.3f64, e in 0.0..6.3f64, f in 0.0..6.3f64) {
            let u = pmns_matrix(&PmnsParams { theta12: a, theta13: b, theta23: c, delta: d, alpha1: e, alpha2: f });
            prop_assert!((u * u.adjoint() - Mat3::identity()).norm() < 1e-12);
        }

        #[test]
        fn analytic_complete(t in 0.0..1e4f64, d in 0.0..6.3f64) {
            let u = pmns_matrix(&PmnsParams { delta: d, ..Default::default() });
            let args = PhaseArgs::EnergyTimes([0.3 * t, 1.1 * t, -0.2 * t]);
            for a in 0..3 {
                let s: f64 = (0..3).map(|b| analytic_transition_probability(a, b, &args, &u)).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_forms_agree() {
        let u = pmns_matrix(&PmnsParams::default());
        let spec = MassSpectrum::normal_ordering();
        for le in [0.0, 100.0, 513.0, 20000.0] {
            let args = PhaseArgs::Baseline { spectrum: spec, l_over_e: le };
            for a in 0..3 {
                for b in 0..3 {
                    let p = analytic_transition_probability(a, b, &args, &u);
                    let q = analytic_transition_probability_real(a, b, &args, &u);
                    assert!((p - q).abs() < 1e-12);
                    if le == 0.0 {
                        assert!((p - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn mass_eigenstates() {
        let cal = WalkCalibration::reference();
        let blk = neutrino_block(&cal, cal.k);
        let e = walk_energies(&cal, cal.k);
        for j in 1..=3 {
            let v = mass_eigenstate(j, cal.k, &cal).unwrap();
            let mut w = v.clone();
            for _ in 0..100 {
                w = &blk * w;
            }
            assert!((w - &v * C64::from_polar(1.0, -e[j - 1] * 100.0)).norm() < 1e-10);
            for l in 1..j {
                assert_eq!(mass_eigenstate(l, cal.k, &cal).unwrap().dotc(&v), ZERO);
            }
        }
        let massless = WalkCalibration { thetas: [0.0, 0.1, 0.2], ..cal };
        let v = mass_eigenstate(1, 0.3, &massless).unwrap();
        assert!((v[0] - C64::from(1.0)).norm() < 1e-12);
        assert!(mass_eigenstate(4, 0.3, &cal).is_err());
    }

    #[test]
    fn lattice_block_matches_engine() {
        let cal = WalkCalibration::reference();
        let lat = Lattice::new(32, 1.0).unwrap();
        let eng = cal.engine().unwrap();
        for k in momentum_grid(&lat) {
            let blk = crate::spectral::lattice_block(&eng, &lat, k, 6).unwrap();
            assert!(crate::linalg::max_abs_diff(&blk, &neutrino_block(&cal, k)) < 1e-12);
        }
    }

    #[test]
    fn walk_matches_analytic() {
        let cal = WalkCalibration::reference();
        let u = pmns_matrix(&PmnsParams::default());
        let w = walk_series(0, 600, &cal, &u).unwrap();
        let a = analytic_series(0, 600, &cal, &u);
        assert!((w[0][0] - 1.0).abs() < 1e-14 && w[0][1] < 1e-14 && w[0][2] < 1e-14);
        for (p, q) in w.iter().zip(&a) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for b in 0..3 {
                assert!((p[b] - q[b]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mapping_ratio_and_zoom() {
        let spec = MassSpectrum::normal_ordering();
        let cal = map_experiment_to_walk(&spec, 450, &MappingOptions { theta1: 0.0, ..Default::default() }).unwrap();
        let [t1, t2, t3] = cal.thetas.map(|t| t * t);
        assert!(((t3 - t2) / (t2 - t1) - spec.dm32 / spec.dm21).abs() < 1e-6 * spec.dm32 / spec.dm21);
        // scaling theta by s and steps by 1/s^2 keeps the phases
        let s = 0.5;
        let phase = |th: [f64; 3], n: f64| (th[1] * th[1] - th[0] * th[0]) / (2.0 * cal.k) * n;
        let p1 = phase(cal.thetas, 450.0);
        let p2 = phase(cal.thetas.map(|t| t * s), 450.0 / (s * s));
        assert!((p1 - p2).abs() < 1e-12);
        let err = map_experiment_to_walk(&spec, 1, &MappingOptions::default()).unwrap_err();
        match err {
            Error::Infeasible { min_steps, .. } => {
                assert!(min_steps > 1);
                assert!(map_experiment_to_walk(&spec, min_steps as usize, &MappingOptions::default()).is_ok());
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn planck_scale_orders() {
        let p = planck_estimate(&MassSpectrum::normal_ordering());
        assert!(!p.feasible);
        assert!(p.solar_steps.log10() >= 42.0 && p.solar_steps.log10() < 43.0);
        assert!(p.atmospheric_steps.log10() >= 40.0);
    }

    #[test]
    fn labels() {
        assert_eq!(three_qubit_label(0).unwrap(), "000");
        assert_eq!(three_qubit_label(5).unwrap(), "101");
        assert_eq!(qubit_qutrit_label(2).unwrap(), "02");
        assert_eq!(qubit_qutrit_label(3).unwrap(), "10");
        assert!(three_qubit_label(6).is_none());
    }

    #[test]
    fn momentum_eigenstate_has_no_entanglement() {
        let cal = WalkCalibration::reference();
        let u = pmns_matrix(&PmnsParams::default());
        let lat = Lattice::new(200, 1.0).unwrap();
        let k0 = momentum_grid(&lat)[101];
        let st = gaussian_flavour_state(0, k0, 100.0, 1e-4, &u, &cal, &lat).unwrap();
        let s = oscillation_entropy_series(&st, &cal, 50).unwrap();
        assert!(s.iter().all(|&x| x.abs() < 1e-12));
        assert!(matches!(gaussian_flavour_state(0, 0.5 * (k0 + momentum_grid(&lat)[102]), 1.0, 1e-3, &u, &cal, &lat), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn wavepacket_starts_in_flavour() {
        let cal = WalkCalibration::reference();
        let u = pmns_matrix(&PmnsParams::default());
        let lat = Lattice::new(629, 1.0).unwrap();
        let st = gaussian_flavour_state(1, 0.01, 100.0, 0.1, &u, &cal, &lat).unwrap();
        let p = wavepacket_flavour_probabilities(&st, &cal, &u, (-0.2, 0.2)).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-10 && p[0] < 1e-10);
    }
}
