//! Choosing coin angles for a given mass spectrum, and the Planck-time step count of a real experiment.

use qwalk::neutrino::{map_experiment_to_walk, planck_estimate, MappingOptions, MassSpectrum};

fn main() -> qwalk::Result<()> {
    let spectrum = MassSpectrum::normal_ordering();
    for target in [1000, 4500, 20000] {
        let cal = map_experiment_to_walk(&spectrum, target, &MappingOptions::default())?;
        println!("target {target:>5}: thetas {:?}, short period {} steps", cal.thetas, cal.steps_short);
    }
    match map_experiment_to_walk(&spectrum, 10, &MappingOptions::default()) {
        Ok(_) => println!("10 steps unexpectedly feasible"),
        Err(e) => println!("10 steps: {e}"),
    }
    let est = planck_estimate(&spectrum);
    println!("Planck-time steps: atmospheric {:.3e}, solar {:.3e}, feasible: {}", est.atmospheric_steps, est.solar_steps, est.feasible);
    Ok(())
}
