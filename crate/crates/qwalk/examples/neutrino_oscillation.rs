//! Three-flavour oscillation from the six-dimensional coin walk compared with the analytic formula.

use qwalk::neutrino::{analytic_series, pmns_matrix, walk_series, PmnsParams, WalkCalibration, FLAVOURS};

fn main() -> qwalk::Result<()> {
    let cal = WalkCalibration::reference();
    let pmns = pmns_matrix(&PmnsParams::default());
    let walk = walk_series(0, cal.steps_long, &cal, &pmns)?;
    let exact = analytic_series(0, cal.steps_long, &cal, &pmns);
    println!("{:>5} {:>9} {:>9} {:>9}", "step", FLAVOURS[0], FLAVOURS[1], FLAVOURS[2]);
    for n in (0..=cal.steps_long).step_by(450) {
        println!("{n:>5} {:>9.5} {:>9.5} {:>9.5}", walk[n][0], walk[n][1], walk[n][2]);
    }
    let dev = walk.iter().zip(&exact).flat_map(|(w, a)| (0..3).map(move |b| (w[b] - a[b]).abs())).fold(0.0, f64::max);
    println!("max deviation from the analytic probabilities: {dev:.2e}");
    Ok(())
}
