//! U(2) gauge fields on the modified walk: closed-form chi coefficients against the stencil.

use qwalk::coin::{CoinSchedule, Field, NonabelianCoinSpec, SubStep};
use qwalk::curved::{chi_coefficients, closed_form_coefficients, numeric_nonabelian_components};

fn main() -> qwalk::Result<()> {
    let s = CoinSchedule::new()
        .with_base(SubStep::First, 1, Field::func(|x, _| 0.3 + 0.2 * x))
        .with_base(SubStep::Second, 1, Field::func(|x, _| -0.6 - 0.4 * x))
        .with_rate(SubStep::Second, 1, Field::Const(0.04));
    let mut spec = NonabelianCoinSpec::with_default_generators(2)?;
    spec.set_omega(SubStep::First, 1, Field::func(|x, _| 0.5 * x));
    spec.set_big_omega(SubStep::First, 3, Field::Const(0.2));
    spec.set_omega(SubStep::Second, 2, Field::Const(-0.3));
    spec.set_big_omega(SubStep::Second, 1, Field::func(|x, t| 0.1 + x * t));

    let (x, t) = (0.15, 0.3);
    let chi = chi_coefficients(&s, &spec, x, t);
    let (_, local, res) = numeric_nonabelian_components(&s, &spec, x, t, 1e-5)?;
    let xi = closed_form_coefficients(&s, x, t, 1e-4)?.xi;
    println!("Richardson residual {res:.1e}");
    for (q, row) in chi.chi.iter().enumerate() {
        let want: Vec<f64> = (0..4).map(|r| row[r] + if q == 0 { xi[r].re } else { 0.0 }).collect();
        let got: Vec<f64> = (0..4).map(|r| local[q][r].re).collect();
        println!("Lambda_{q}: closed {:>9.5?}", want);
        println!("          stencil {:>9.5?}", got);
    }
    Ok(())
}
