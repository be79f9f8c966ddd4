//! Effective Hamiltonian of the modified walk: closed form against extraction from the step stencil.

use qwalk::curved::{closed_form_coefficients, numeric_coefficients, reference_scenario};

fn main() -> qwalk::Result<()> {
    let s = reference_scenario("nonstatic")?.schedule;
    let (x, t) = (0.1, 0.4);
    let closed = closed_form_coefficients(&s, x, t, 1e-3)?;
    let num = numeric_coefficients(&s, x, t, 1e-5)?;
    println!("x = {x}, t = {t}");
    println!("{:<7} {:>24} {:>24}", "coeff", "closed form", "stencil");
    for ((name, a), (_, b)) in closed.named().iter().zip(num.coeffs.named()) {
        println!("{name:<7} {:>11.7} {:>+11.7}i {:>11.7} {:>+11.7}i", a.re, a.im, b.re, b.im);
    }
    println!("momentum coupling to the identity {:.1e}, Richardson residual {:.1e}, hermiticity {:.1e}", num.theta0.norm(), num.residual, num.hermiticity);

    println!("\nstatic metric, Theta3 = x + 5a:");
    let st = reference_scenario("static")?.schedule;
    for x in [-0.2, 0.0, 0.2] {
        println!("  x = {x:>5}: Theta3 = {:.6}", closed_form_coefficients(&st, x, 0.0, 1e-4)?.theta[2]);
    }
    Ok(())
}
