//! Quantum walk against the classical random walk: ballistic vs diffusive spreading.

use qwalk::coin::CoinAngles;
use qwalk::engine::{crw_distribution, evolve, Engine, EngineKind, ObservableSet};
use qwalk::linalg::c;
use qwalk::state::{Lattice, WalkState};

fn main() -> qwalk::Result<()> {
    let lat = Lattice::new(256, 1.0)?;
    let mut pos = vec![c(0.0, 0.0); lat.sites()];
    pos[0] = c(1.0, 0.0);
    let r = 1.0 / 2f64.sqrt();
    let psi = WalkState::product(&[c(r, 0.0), c(0.0, r)], &pos, lat.clone())?;
    let engine = Engine::new(EngineKind::Dqw(CoinAngles::rotation(std::f64::consts::FRAC_PI_4)), 1.0)?;
    let traj = evolve(&psi, &engine, 100, &ObservableSet { position: true, ..Default::default() })?;

    println!("{:>5} {:>12} {:>12}", "steps", "var(DQW)", "var(CRW)");
    for n in [10, 25, 50, 100] {
        let p = &traj.position[n];
        let mean: f64 = (0..lat.sites()).map(|s| lat.offset(s) as f64 * p[s]).sum();
        let var: f64 = (0..lat.sites()).map(|s| (lat.offset(s) as f64 - mean).powi(2) * p[s]).sum();
        println!("{n:>5} {var:>12.3} {:>12.3}", crw_distribution(0.5, n, 0)?.variance());
    }
    Ok(())
}
