//! Two walkers with a short-range interaction phase, and the structure of their effective Hamiltonian.

use qwalk::observables::two_particle_marginal;
use qwalk::scenario::two_particle_demo;
use qwalk::two_particle::{step_two_particle, two_effective_hamiltonian};

fn main() -> qwalk::Result<()> {
    let (job, lat) = two_particle_demo(24, 20)?;
    let mut psi = job.initial.clone();
    for n in 1..=job.steps {
        step_two_particle(&mut psi, &job.field, n as f64 * job.dt, job.dt)?;
    }
    let (m1, m2) = (two_particle_marginal(&psi, 1), two_particle_marginal(&psi, 2));
    println!("norm after {} steps: {:.15}", job.steps, psi.norm());
    println!("{:>5} {:>9} {:>9}", "x/a", "P1", "P2");
    for s in lat.sites_by_position() {
        println!("{:>5} {:>9.5} {:>9.5}", lat.offset(s), m1[s], m2[s]);
    }
    let h = two_effective_hamiltonian(&job.field, -0.1, 0.2, 0.1, 1e-4)?;
    println!("Xi_00 at (x1, x2) = (-0.1, 0.2): {:.6}", h.xi[0][0]);
    println!("off-pattern components above 1e-9: {:?}", h.violations(1e-9));
    Ok(())
}
