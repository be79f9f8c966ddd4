//! A Gaussian electron-flavour wavepacket: flavour content and coin-position entanglement over time.

use qwalk::neutrino::{gaussian_flavour_state, oscillation_entropy_series, pmns_matrix, wavepacket_flavour_probabilities, PmnsParams, WalkCalibration};
use qwalk::state::Lattice;

fn main() -> qwalk::Result<()> {
    let cal = WalkCalibration::reference();
    let pmns = pmns_matrix(&PmnsParams::default());
    let lat = Lattice::new(2048, 1.0)?;
    let mut psi = gaussian_flavour_state(0, cal.k, 2e4, 0.02, &pmns, &cal, &lat)?;
    psi.normalize()?;
    let window = (cal.k - 0.02, cal.k + 0.02);
    println!("initial flavour content {:?}", wavepacket_flavour_probabilities(&psi, &cal, &pmns, window)?);
    let entropy = oscillation_entropy_series(&psi, &cal, 450)?;
    for n in (0..=450).step_by(90) {
        println!("step {n:>3}: S = {:.5}", entropy[n]);
    }
    Ok(())
}
