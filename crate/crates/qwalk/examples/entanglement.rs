//! Coin-position entanglement: a time series and the Bloch-sphere sweep of late-time entropy.

use qwalk::coin::{CoinAngles, CoinSchedule};
use qwalk::engine::{evolve, Engine, EngineKind, ObservableSet};
use qwalk::linalg::c;
use qwalk::observables::{bloch_sweep, variance, DEFAULT_LATE_WINDOW};
use qwalk::state::{Lattice, WalkState};

fn main() -> qwalk::Result<()> {
    let lat = Lattice::with_scale(256, 256.0)?;
    let dt = lat.spacing();
    let theta = std::f64::consts::FRAC_PI_4;
    let dqw = Engine::new(EngineKind::Dqw(CoinAngles::rotation(theta)), dt)?;
    let ss = Engine::new(EngineKind::SsDqw(CoinSchedule::homogeneous(CoinAngles::rotation(0.0), CoinAngles::rotation(theta))), dt)?;

    let mut pos = vec![c(0.0, 0.0); lat.sites()];
    pos[0] = c(1.0, 0.0);
    let r = 1.0 / 2f64.sqrt();
    let psi = WalkState::product(&[c(r, 0.0), c(0.0, r)], &pos, lat.clone())?;
    let traj = evolve(&psi, &dqw, 100, &ObservableSet { entropy: true, ..Default::default() })?;
    for n in [0, 1, 2, 5, 10, 50, 100] {
        println!("step {n:>3}: S = {:.4}", traj.entropy[n]);
    }

    for (name, e) in [("dqw", &dqw), ("ssdqw", &ss)] {
        let sweep = bloch_sweep(e, &lat, 100, (16, 9), DEFAULT_LATE_WINDOW)?;
        let s: Vec<f64> = sweep.iter().map(|p| p.avg_entropy).collect();
        let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        println!("{name}: late entropy in [{lo:.4}, {hi:.4}], variance {:.3e}", variance(&s));
    }
    Ok(())
}
