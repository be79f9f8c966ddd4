//! The six built-in curved-spacetime runs: norm, left/right balance and boundary leakage.

use qwalk::curved::{reference_scenario, REFERENCE_SCENARIOS};
use qwalk::engine::{boundary_probability, evolve, Engine, EngineKind, ObservableSet};
use qwalk::observables::position_probability;

fn main() -> qwalk::Result<()> {
    println!("{:<22} {:>5} {:>5} {:>10} {:>9} {:>9} {:>10}", "scenario", "N", "steps", "norm drift", "P(x<0)", "<x>/a", "boundary");
    for name in REFERENCE_SCENARIOS {
        let p = reference_scenario(name)?;
        let lat = p.lattice()?;
        let engine = Engine::new(EngineKind::Modified(p.schedule.clone()), lat.spacing())?;
        let traj = evolve(&p.initial_state()?, &engine, p.steps, &ObservableSet { norm: true, ..Default::default() })?;
        let drift = traj.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
        let prob = position_probability(&traj.final_state);
        let left: f64 = (0..lat.sites()).filter(|&s| lat.offset(s) < 0).map(|s| prob[s]).sum();
        let mean: f64 = (0..lat.sites()).map(|s| lat.offset(s) as f64 * prob[s]).sum();
        println!(
            "{name:<22} {:>5} {:>5} {drift:>10.1e} {left:>9.4} {mean:>9.2} {:>10.1e}",
            lat.sites(),
            p.steps,
            boundary_probability(&traj.final_state)
        );
        println!("    {}", p.metric);
    }
    Ok(())
}
