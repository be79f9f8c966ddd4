//! Convergence of H_k to the Dirac Hamiltonian k sigma3 + m sigma1 as the lattice is refined.

use qwalk::spectral::{continuum_deviation, ContinuumFamily};

fn main() {
    let mass = 0.04;
    println!("{:>6} {:>8} {:>12} {:>8}", "family", "L", "deviation", "order");
    for (name, fam) in [("dqw", ContinuumFamily::Dqw), ("ssdqw", ContinuumFamily::SsDqw), ("dca", ContinuumFamily::Dca)] {
        let mut prev: Option<(f64, f64)> = None;
        for l in [100.0, 300.0, 1000.0, 3000.0] {
            let d = continuum_deviation(fam, l, mass, 0.1, 201);
            let order = prev.map(|(pl, pd)| (pd / d).ln() / (l / pl).ln());
            println!("{name:>6} {l:>8} {d:>12.3e} {:>8}", order.map_or("-".into(), |o| format!("{o:.2}")));
            prev = Some((l, d));
        }
    }
}
