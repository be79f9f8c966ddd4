//! Closed-form per-momentum Hamiltonian against the matrix logarithm of the lattice step.

use qwalk::coin::{CoinAngles, CoinSchedule};
use qwalk::engine::{Engine, EngineKind};
use qwalk::linalg::{max_abs_diff, to_dmatrix};
use qwalk::spectral::{hamiltonian_from_unitary, lattice_block, momentum_grid, spectrum, WalkParams};
use qwalk::state::Lattice;

fn main() -> qwalk::Result<()> {
    let lat = Lattice::with_scale(32, 32.0)?;
    let dt = lat.spacing();
    let (t1, t2) = (0.3, -0.7);
    let params = WalkParams::ssdqw(t1, t2);
    let engine = Engine::new(EngineKind::SsDqw(CoinSchedule::homogeneous(CoinAngles::rotation(t1), CoinAngles::rotation(t2))), dt)?;

    println!("{:>9} {:>10} {:>12}", "k", "E(k)", "|H_log - H|");
    for (m, k) in spectrum(&params, &lat).iter().zip(momentum_grid(&lat)) {
        let h = hamiltonian_from_unitary(&lattice_block(&engine, &lat, k, 2)?, dt)?;
        println!("{k:>9.3} {:>10.4} {:>12.2e}", m.energy, max_abs_diff(&h, &to_dmatrix(&m.h)));
    }
    Ok(())
}
