use proptest::prelude::*;

use qwalk::coin::{CoinAngles, CoinSchedule, Field, SubStep};
use qwalk::engine::{crw_distribution, Engine, EngineKind};
use qwalk::expr::{Constants, Expr};
use qwalk::linalg::C64;
use qwalk::observables::entanglement_entropy;
use qwalk::shift::{shift, ShiftKind};
use qwalk::state::{Lattice, WalkState};

fn state_from(seed: f64, lattice: &Lattice) -> WalkState {
    let n = 2 * lattice.sites();
    let amps: Vec<C64> = (0..n).map(|i| C64::new((i as f64 * seed).sin(), (i as f64 * seed * 1.7 + 0.3).cos())).collect();
    let mut psi = WalkState::from_amplitudes(2, lattice.clone(), amps).unwrap();
    psi.normalize().unwrap();
    psi
}

fn wavy_schedule(a: f64, b: f64, c: f64) -> CoinSchedule {
    CoinSchedule::new()
        .with_base(SubStep::First, 1, Field::func(move |x, t| a + 0.5 * (b * x + t).sin()))
        .with_rate(SubStep::First, 1, Field::func(move |x, _| c * x))
        .with_base(SubStep::Second, 1, Field::func(move |x, _| b - c * x * x))
        .with_rate(SubStep::Second, 0, Field::Const(a))
        .with_base(SubStep::First, 0, Field::func(move |x, t| c * x * t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inhomogeneous_walks_conserve_norm(a in -1.5..1.5f64, b in -3.0..3.0f64, c in -2.0..2.0f64, seed in 0.1..5.0f64, modified in any::<bool>()) {
        let lat = Lattice::with_scale(40, 20.0).unwrap();
        let s = wavy_schedule(a, b, c);
        let kind = if modified { EngineKind::Modified(s) } else { EngineKind::SsDqw(s) };
        let engine = Engine::new(kind, lat.spacing()).unwrap();
        let mut psi = state_from(seed, &lat);
        for n in 1..=15 {
            engine.step(&mut psi, n).unwrap();
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
            let s = entanglement_entropy(&psi);
            prop_assert!(s >= -1e-12 && s <= 2f64.ln() + 1e-12);
        }
    }

    #[test]
    fn dca_matches_split_step(th in -1.5..1.5f64, seed in 0.1..5.0f64) {
        let lat = Lattice::new(30, 1.0).unwrap();
        let ss = Engine::new(EngineKind::SsDqw(CoinSchedule::homogeneous(CoinAngles::rotation(0.0), CoinAngles::rotation(th))), 1.0).unwrap();
        let dca = Engine::new(EngineKind::Dca { eta1: th.cos(), eta2: th.sin() }, 1.0).unwrap();
        let (mut p, mut q) = (state_from(seed, &lat), state_from(seed, &lat));
        for n in 1..=10 {
            ss.step(&mut p, n).unwrap();
            dca.step(&mut q, n).unwrap();
        }
        let diff = p.amplitudes().iter().zip(q.amplitudes()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        prop_assert!(diff < 1e-13);
    }

    #[test]
    fn shifts_invert(n in 2usize..40, seed in 0.1..5.0f64, kind in 0usize..3) {
        let lat = Lattice::new(n, 0.1).unwrap();
        let k = [ShiftKind::Full, ShiftKind::HalfPlus, ShiftKind::HalfMinus][kind];
        let psi = state_from(seed, &lat);
        let mut q = psi.clone();
        let s = shift(k, 2, &lat).unwrap();
        s.apply(&mut q).unwrap();
        s.apply_inverse(&mut q).unwrap();
        prop_assert_eq!(q.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn crw_moments(p in 0.0..=1.0f64, steps in 0usize..60) {
        let d = crw_distribution(p, steps, 0).unwrap();
        let total: f64 = (-(steps as i64)..=steps as i64).map(|x| d.get(x)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!((d.mean() - steps as f64 * (2.0 * p - 1.0)).abs() < 1e-9);
        prop_assert!((d.variance() - 4.0 * p * (1.0 - p) * steps as f64).abs() < 1e-8);
    }

    #[test]
    fn linear_expressions(a in -10.0..10.0f64, b in -10.0..10.0f64, x in -1.0..1.0f64, t in 0.0..2.0f64) {
        let e = Expr::parse(&format!("({a:.6})*x + ({b:.6})*t"), Constants { a: 0.01, scale: 100.0 }).unwrap();
        let want = format!("{a:.6}").parse::<f64>().unwrap() * x + format!("{b:.6}").parse::<f64>().unwrap() * t;
        prop_assert!((e.eval(x, t) - want).abs() < 1e-12);
    }
}
