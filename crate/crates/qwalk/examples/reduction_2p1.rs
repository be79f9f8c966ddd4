//! Reading a 2+1 geometry off the 1+1 walk with one hidden momentum k_y.

use qwalk::coin::{CoinSchedule, Field, SubStep};
use qwalk::curved::{reduce_2plus1, MassConvention};

fn main() -> qwalk::Result<()> {
    let s = CoinSchedule::new()
        .with_base(SubStep::First, 1, Field::func(|x, _| 0.4 + 0.3 * x))
        .with_base(SubStep::Second, 1, Field::func(|x, t| -0.5 + 0.2 * (x + t).sin()))
        .with_rate(SubStep::Second, 1, Field::Const(0.04))
        .with_base(SubStep::First, 0, Field::func(|x, _| 0.3 * x * x))
        .with_base(SubStep::Second, 0, Field::func(|x, _| -0.2 * x))
        .with_rate(SubStep::First, 0, Field::Const(0.1));
    let red = reduce_2plus1(&s, MassConvention::Fundamental(0.04), 0.7, 0.2, 0.1, 1e-4)?;
    println!("vielbein e^mu_(a):");
    for row in red.vielbein {
        println!("  {:>9.5} {:>9.5} {:>9.5}", row[0], row[1], row[2]);
    }
    println!("metric g^mu nu:");
    for row in red.metric {
        println!("  {:>9.5} {:>9.5} {:>9.5}", row[0], row[1], row[2]);
    }
    println!("potentials {:?}", red.potentials);
    println!("matching residuals {:?}", red.residuals.map(|r| format!("{r:.1e}")));
    let alt = red.residuals_for(red.printed_potentials());
    println!("residuals with flipped A1/A2 signs {:?}", alt.map(|r| format!("{r:.1e}")));
    Ok(())
}
