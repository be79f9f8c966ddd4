//! From a 1+1 metric with potentials to a coin schedule and back.

use qwalk::coin::Field;
use qwalk::curved::{metric_from_schedule, schedule_from_metric_1p1, MassConvention, VielbeinField1p1};
use qwalk::state::Lattice;

fn main() -> qwalk::Result<()> {
    let lat = Lattice::with_scale(200, 250.0)?;
    let mass = 0.04;
    let field = VielbeinField1p1::fundamental(
        Field::func(|_, t| 1.0 + 0.2 * t),
        Field::func(|x, _| 0.6 + 0.5 * x),
        mass,
    )
    .with_potentials(Field::func(|x, _| 0.1 * x), Field::Const(0.05));
    let schedule = schedule_from_metric_1p1(&field, &lat, 100)?;

    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}", "x", "g00", "g11", "want g11", "A0", "A1");
    for x in [-0.3, -0.1, 0.1, 0.3] {
        let t = 0.2;
        let m = metric_from_schedule(&schedule, MassConvention::Fundamental(mass), x, t, 1e-4)?;
        let want = -(field.e11.eval(x, t)).powi(2);
        println!("{x:>6} {:>10.6} {:>10.6} {want:>10.6} {:>10.6} {:>10.6}", m.g00, m.g11, m.a0, m.a1);
    }

    let bad = VielbeinField1p1::fundamental(Field::Const(1.0), Field::func(|x, _| 3.0 * x), mass);
    if let Err(e) = schedule_from_metric_1p1(&bad, &lat, 10) {
        println!("rejected: {e}");
    }
    Ok(())
}
