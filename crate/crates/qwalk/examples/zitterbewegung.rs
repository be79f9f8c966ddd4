//! Trembling motion of <sigma3> for a superposition of the two energy branches.

use qwalk::linalg::{pauli, C64};
use qwalk::spectral::{hk_closed_form, zbw_frequency, WalkParams};
use rustfft::FftPlanner;

fn main() {
    let (theta, k, dt) = (0.5, 0.3, 1.0);
    let params = WalkParams::ssdqw(0.0, theta);
    let m = hk_closed_form(&params, k, dt);
    let u = params.block(k * dt);
    let mut v = (m.phi_plus + m.phi_minus) / C64::from(2f64.sqrt());
    let n = 512;
    let mut series = Vec::with_capacity(n);
    for _ in 0..n {
        series.push((v.adjoint() * pauli(3) * v)[(0, 0)].re);
        v = u * v;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<C64> = series.iter().map(|s| C64::from(s - mean)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = (1..n / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap();
    println!("first steps of <sigma3>: {:?}", &series[..6].iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("FFT peak {:.5}, Z = {:.5}, bin width {:.5}", peak as f64 / n as f64, zbw_frequency(theta, k, dt), 1.0 / n as f64);
}
