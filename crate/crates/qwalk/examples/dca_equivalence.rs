//! SS-DQW with theta^1_1 = 0 is the Dirac cellular automaton with (eta1, eta2) = (cos, sin).

use qwalk::coin::{CoinAngles, CoinSchedule};
use qwalk::engine::{evolve, Engine, EngineKind, ObservableSet};
use qwalk::linalg::c;
use qwalk::state::{Lattice, WalkState};

fn main() -> qwalk::Result<()> {
    let lat = Lattice::with_scale(256, 100.0)?;
    let mut pos = vec![c(0.0, 0.0); lat.sites()];
    pos[0] = c(1.0, 0.0);
    let r = 1.0 / 2f64.sqrt();
    let psi = WalkState::product(&[c(r, 0.0), c(r, 0.0)], &pos, lat.clone())?;
    let dt = lat.spacing();
    let theta = std::f64::consts::FRAC_PI_4;

    let ss = Engine::new(EngineKind::SsDqw(CoinSchedule::homogeneous(CoinAngles::rotation(0.0), CoinAngles::rotation(theta))), dt)?;
    let dca = Engine::new(EngineKind::Dca { eta1: theta.cos(), eta2: theta.sin() }, dt)?;
    let dqw = Engine::new(EngineKind::Dqw(CoinAngles::rotation(theta)), dt)?;
    let run = |e: &Engine| evolve(&psi, e, 100, &ObservableSet { position: true, ..Default::default() }).map(|t| t.position[100].clone());
    let (p_ss, p_dca, p_dqw) = (run(&ss)?, run(&dca)?, run(&dqw)?);

    let diff = p_ss.iter().zip(&p_dca).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("max |P_ssdqw - P_dca| after 100 steps: {diff:.2e}");
    println!("{:>6} {:>12} {:>12}", "x/a", "DCA", "DQW");
    for off in -6..=6 {
        let s = lat.site(off);
        println!("{off:>6} {:>12.6} {:>12.6}", p_dca[s], p_dqw[s]);
    }
    Ok(())
}
