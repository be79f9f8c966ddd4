//! Curved-spacetime Dirac dynamics from the modified split-step walk.
//!
//! The modified step C1(t,0)^dagger C2(t,0)^dagger S+ C2(t,dt) S- C1(t,dt)
//! tends to the identity as dt -> 0 and its first-order generator is a
//! Dirac Hamiltonian
//!
//!   H = sum_r Theta_r sigma_r p + sum_r Xi_r sigma_r,   p = -i d/dx,
//!
//! whose coefficients are read off either from closed forms in the coin
//! angles or numerically from the local stencil of the step.
//! Natural units throughout (hbar = c = 1, a = dt).

use nalgebra::DMatrix;

use crate::coin::{nonabelian_coin, CoinSchedule, Field, NonabelianCoinSpec, SubStep};
use crate::engine::step_modified;
use crate::error::{Error, Result};
use crate::linalg::{c, kron, max_abs_diff, pauli, to_dmatrix, Mat2, C64, I, ZERO};
use crate::state::{Lattice, WalkState};
use crate::stencil::{compose_at, expand, richardson, Expansion, LocalOp, Terms};

const FIRST: SubStep = SubStep::First;
const SECOND: SubStep = SubStep::Second;

/// Relative tolerance on the Richardson residual of the numeric extraction.
pub const RICHARDSON_TOL: f64 = 1e-7;

/// Central difference of f at x with spacing h.
fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// How the mass term m / e00 is split between m and e00.
#[derive(Clone, Debug)]
pub enum MassSpec {
    /// Constant mass; e00 is a free field.
    Fundamental(f64),
    /// e00 = 1 and the mass is a field m(x, t).
    Emergent(Field),
}

/// Diagonal 1+1 vielbein (e1_(0) = 0) with abelian potentials and mass.
#[derive(Clone, Debug)]
pub struct VielbeinField1p1 {
    pub e00: Field,
    pub e11: Field,
    pub a0: Field,
    pub a1: Field,
    pub mass: MassSpec,
}

impl VielbeinField1p1 {
    pub fn fundamental(e00: Field, e11: Field, mass: f64) -> Self {
        Self { e00, e11, a0: Field::Zero, a1: Field::Zero, mass: MassSpec::Fundamental(mass) }
    }

    pub fn emergent(e11: Field, mass: Field) -> Self {
        Self { e00: Field::Const(1.0), e11, a0: Field::Zero, a1: Field::Zero, mass: MassSpec::Emergent(mass) }
    }

    pub fn with_potentials(mut self, a0: Field, a1: Field) -> Self {
        self.a0 = a0;
        self.a1 = a1;
        self
    }

    /// m / e00 at (x, t).
    pub fn mass_ratio(&self, x: f64, t: f64) -> f64 {
        match &self.mass {
            MassSpec::Fundamental(m) => m / self.e00.eval(x, t),
            MassSpec::Emergent(f) => f.eval(x, t),
        }
    }

    pub fn ratio(&self, x: f64, t: f64) -> f64 {
        self.e11.eval(x, t) / self.e00.eval(x, t)
    }
}

/// Which convention to use when recovering (m, e00) from the schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassConvention {
    Fundamental(f64),
    Emergent,
}

/// Coin schedule reproducing the vielbein field on `lattice` for `steps` steps.
///
/// theta^1_1 = acos(e11/e00)/2, theta^1_2 = -2 theta^1_1, vartheta^1_1 = -d_x theta^1_1,
/// vartheta^1_2 = m/e00, vartheta^0_1 = -A0 and theta^0_1 = int_0^x A1 cos(2 theta^1_1).
/// Spatial derivatives and the integral use the lattice spacing.
pub fn schedule_from_metric_1p1(field: &VielbeinField1p1, lattice: &Lattice, steps: usize) -> Result<CoinSchedule> {
    let h = lattice.spacing();
    for n in 0..=steps {
        let t = n as f64 * h;
        for x in lattice.positions() {
            let e00 = field.e00.eval(x, t);
            let r = field.ratio(x, t);
            if !(e00 != 0.0 && r.is_finite() && r.abs() <= 1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "|e11/e00| = {:.6} exceeds 1 at x = {x}, t = {t}; rescale the vielbeins",
                    r.abs()
                )));
            }
            if let MassSpec::Emergent(_) = field.mass {
                if (e00 - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter("emergent mass convention requires e00 = 1".into()));
                }
            }
        }
    }

    let f = field.clone();
    let theta11 = move |x: f64, t: f64| 0.5 * f.ratio(x, t).clamp(-1.0, 1.0).acos();
    let th = theta11.clone();
    let mut s = CoinSchedule::new()
        .with_base(FIRST, 1, Field::func(theta11.clone()))
        .with_base(SECOND, 1, Field::func(move |x, t| -2.0 * th(x, t)));
    let th = theta11.clone();
    s.set_rate(FIRST, 1, Field::func(move |x, t| -central(|y| th(y, t), x, h)));
    let f = field.clone();
    s.set_rate(SECOND, 1, Field::func(move |x, t| f.mass_ratio(x, t)));
    if !field.a0.is_zero() {
        let a0 = field.a0.clone();
        s.set_rate(FIRST, 0, Field::func(move |x, t| -a0.eval(x, t)));
    }
    if !field.a1.is_zero() {
        let f = field.clone();
        s.set_base(
            FIRST,
            0,
            Field::func(move |x, t| trapezoid(|y| f.a1.eval(y, t) * f.ratio(y, t).clamp(-1.0, 1.0), x, h)),
        );
    }
    Ok(s)
}

/// Cumulative trapezoid of g from 0 to x with step at most h.
fn trapezoid(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let n = (x.abs() / h).ceil().max(1.0) as usize;
    let step = x / n as f64;
    let mut sum = 0.5 * (g(0.0) + g(x));
    for i in 1..n {
        sum += g(i as f64 * step);
    }
    sum * step
}

/// Metric and potentials recovered from a schedule at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricPoint {
    pub g00: f64,
    pub g11: f64,
    pub e00: f64,
    pub e11: f64,
    pub mass: f64,
    pub a0: f64,
    pub a1: f64,
}

/// Inverse of [`schedule_from_metric_1p1`] at (x, t), derivatives by central differences with spacing h.
pub fn metric_from_schedule(schedule: &CoinSchedule, conv: MassConvention, x: f64, t: f64, h: f64) -> Result<MetricPoint> {
    if !schedule.in_theta01_family() {
        return Err(Error::InvalidParameter("metric map needs a schedule with only theta^0 and theta^1".into()));
    }
    let base = |sub, q, y| schedule.angle(sub, q, y, t, 0.0);
    let rate = |sub, q| schedule.rate(sub, q).eval(x, t);
    let (t11, t12) = (base(FIRST, 1, x), base(SECOND, 1, x));
    if (t12 + 2.0 * t11).abs() > 1e-10 {
        return Err(Error::Domain(format!("metric map assumes theta^1_2 = -2 theta^1_1 (off by {:e})", t12 + 2.0 * t11)));
    }
    let cos2 = (2.0 * t11).cos();
    let d11 = central(|y| base(FIRST, 1, y), x, h);
    let ratio = rate(FIRST, 1) + rate(SECOND, 1) + d11;
    let (e00, mass) = match conv {
        MassConvention::Fundamental(m) => {
            if ratio == 0.0 {
                return Err(Error::Domain("m/e00 vanishes; e00 cannot be recovered for a fixed mass".into()));
            }
            (m / ratio, m)
        }
        MassConvention::Emergent => (1.0, ratio),
    };
    let d01 = central(|y| base(FIRST, 0, y), x, h);
    let a1 = if d01 == 0.0 {
        0.0
    } else if cos2.abs() < 1e-14 {
        return Err(Error::Domain(format!("cos(2 theta^1_1) vanishes at x = {x}; A1 is undetermined")));
    } else {
        d01 / cos2
    };
    let e11 = e00 * cos2;
    Ok(MetricPoint {
        g00: e00 * e00,
        g11: -e11 * e11,
        e00,
        e11,
        mass,
        a0: -(rate(FIRST, 0) + rate(SECOND, 0)),
        a1,
    })
}

/// Theta_1..3 (momentum couplings) and Xi_0..3 (local terms).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianCoefficients {
    pub theta: [f64; 3],
    pub xi: [C64; 4],
}

impl HamiltonianCoefficients {
    pub const NAMES: [&'static str; 7] = ["Theta1", "Theta2", "Theta3", "Xi0", "Xi1", "Xi2", "Xi3"];

    /// (name, value) pairs in the order of [`Self::NAMES`].
    pub fn named(&self) -> [(&'static str, C64); 7] {
        let v = [c(self.theta[0], 0.0), c(self.theta[1], 0.0), c(self.theta[2], 0.0), self.xi[0], self.xi[1], self.xi[2], self.xi[3]];
        std::array::from_fn(|i| (Self::NAMES[i], v[i]))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let a = self.named();
        let b = other.named();
        a.iter().zip(&b).map(|(x, y)| (x.1 - y.1).norm()).fold(0.0, f64::max)
    }

    pub fn momentum_matrix(&self) -> Mat2 {
        (1..4).fold(Mat2::zeros(), |m, r| m + pauli(r) * c(self.theta[r - 1], 0.0))
    }

    pub fn local_matrix(&self) -> Mat2 {
        (0..4).fold(Mat2::zeros(), |m, r| m + pauli(r) * self.xi[r])
    }
}

/// Closed-form coefficients for a {theta^0, theta^1} schedule; derivatives by central differences with spacing h.
pub fn closed_form_coefficients(schedule: &CoinSchedule, x: f64, t: f64, h: f64) -> Result<HamiltonianCoefficients> {
    if !schedule.in_theta01_family() {
        return Err(Error::InvalidParameter(
            "closed form covers only theta^0 and theta^1 coins; use numeric_coefficients".into(),
        ));
    }
    let base = |sub, q, y| schedule.angle(sub, q, y, t, 0.0);
    let rate = |sub, q| schedule.rate(sub, q).eval(x, t);
    let d = |sub, q| central(|y| base(sub, q, y), x, h);
    let (al, be) = (base(FIRST, 1, x), base(SECOND, 1, x));
    let (d01, d02, d11, d12) = (d(FIRST, 0), d(SECOND, 0), d(FIRST, 1), d(SECOND, 1));
    let (s2ab, c2ab) = (2.0 * al + 2.0 * be).sin_cos();
    let (sab, cab) = (2.0 * al + be).sin_cos();
    let cb = be.cos();

    let theta2 = cb * sab;
    let theta3 = 0.5 * (2.0 * al).cos() + 0.5 * c2ab;
    let xi0 = c(rate(FIRST, 0) + rate(SECOND, 0) - 0.5 * d02, 0.0);
    let xi1 = c(rate(FIRST, 1) + rate(SECOND, 1) - 0.5 * d12, 0.0);
    let xi2 = c(-d01 * cb * sab - 0.5 * d02 * s2ab, -cb * cab * d11 - 0.5 * c2ab * d12);
    let xi3 = c(-0.5 * d01 * ((2.0 * al).cos() + c2ab) - 0.5 * d02 * c2ab, 0.5 * s2ab * d12 + cb * sab * d11);
    Ok(HamiltonianCoefficients { theta: [0.0, theta2, theta3], xi: [xi0, xi1, xi2, xi3] })
}

/// Numeric coefficients with diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct NumericCoefficients {
    pub coeffs: HamiltonianCoefficients,
    /// Momentum coupling to the identity; zero for a Dirac generator.
    pub theta0: C64,
    /// Difference between the two Richardson estimates.
    pub residual: f64,
    /// max over r of |Im Theta_r| and |Im Xi_r + Theta_r'/2|, the condition for H = H^dagger.
    pub hermiticity: f64,
}

fn up_down(n: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let id = DMatrix::identity(n, n);
    let up = DMatrix::from_row_slice(2, 2, &[C64::from(1.0), ZERO, ZERO, ZERO]);
    let down = DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, C64::from(1.0)]);
    (kron(&up, &id), kron(&down, &id))
}

/// Stencil of S+ (up reads psi(x - a)) or S- (down reads psi(x + a)).
fn shift_op<'a>(plus: bool, n: usize) -> LocalOp<'a, 1> {
    let (up, down) = up_down(n);
    Box::new(move |_| -> Terms<1> {
        if plus {
            vec![([-1], up.clone()), ([0], down.clone())]
        } else {
            vec![([0], up.clone()), ([1], down.clone())]
        }
    })
}

fn modified_ops<'a>(coin: &'a (dyn Fn(SubStep, f64, f64) -> DMatrix<C64> + 'a), n: usize, d: f64) -> Vec<LocalOp<'a, 1>> {
    let op = move |sub: SubStep, dt: f64, adjoint: bool| -> LocalOp<'a, 1> {
        Box::new(move |p: [f64; 1]| {
            let m = coin(sub, p[0], dt);
            vec![([0], if adjoint { m.adjoint() } else { m })]
        })
    };
    vec![op(FIRST, 0.0, true), op(SECOND, 0.0, true), shift_op(true, n), op(SECOND, d, false), shift_op(false, n), op(FIRST, d, false)]
}

fn patch(schedule: &CoinSchedule, x: f64, t: f64, d: f64) -> Expansion<1> {
    let coin = |sub, y, dt| to_dmatrix(&schedule.coin(sub, y, t, dt));
    let ops = modified_ops(&coin, 1, d);
    expand(&compose_at(&ops, [x], d), d, d)
}

/// Richardson estimates of (momentum, local) and their residual.
fn extrapolate(e: &dyn Fn(f64) -> Expansion<1>, d: f64) -> (DMatrix<C64>, DMatrix<C64>, f64) {
    let [e1, e2, e3] = [d, d / 2.0, d / 4.0].map(e);
    let p = richardson(&e1.momentum[0], &e2.momentum[0]);
    let l = richardson(&e1.local, &e2.local);
    let res = max_abs_diff(&p, &richardson(&e2.momentum[0], &e3.momentum[0]))
        .max(max_abs_diff(&l, &richardson(&e2.local, &e3.local)));
    (p, l, res)
}

fn pauli_parts(m: &DMatrix<C64>) -> [C64; 4] {
    let m2 = Mat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    crate::linalg::pauli_decompose(&m2)
}

fn raw_coefficients(schedule: &CoinSchedule, x: f64, t: f64, d: f64) -> (HamiltonianCoefficients, [C64; 4], f64) {
    let (p, l, res) = extrapolate(&|h| patch(schedule, x, t, h), d);
    let pp = pauli_parts(&p);
    let coeffs = HamiltonianCoefficients { theta: [pp[1].re, pp[2].re, pp[3].re], xi: pauli_parts(&l) };
    (coeffs, pp, res)
}

/// Coefficients extracted from the local stencil of the modified step with
/// a = dt = d, Richardson-extrapolated over d and d/2 (d/4 gives the residual).
pub fn numeric_coefficients(schedule: &CoinSchedule, x: f64, t: f64, d: f64) -> Result<NumericCoefficients> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("probe step must be positive".into()));
    }
    let (coeffs, pp, residual) = raw_coefficients(schedule, x, t, d);
    let scale = coeffs.named().iter().map(|v| v.1.norm()).fold(1.0, f64::max);
    if residual > RICHARDSON_TOL * scale {
        return Err(Error::NonConvergence { residual, tol: RICHARDSON_TOL * scale });
    }
    // Five-point derivative of the numeric Theta for the Hermiticity condition.
    let g = 1e-3;
    let th = |y: f64| raw_coefficients(schedule, y, t, d).0.theta;
    let (m2, m1, p1, p2) = (th(x - 2.0 * g), th(x - g), th(x + g), th(x + 2.0 * g));
    let mut herm = pp[1..].iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    for r in 0..3 {
        let dth = (m2[r] - 8.0 * m1[r] + 8.0 * p1[r] - p2[r]) / (12.0 * g);
        herm = herm.max((coeffs.xi[r + 1].im + 0.5 * dth).abs());
    }
    herm = herm.max(coeffs.xi[0].im.abs());
    Ok(NumericCoefficients { coeffs, theta0: pp[0], residual, hermiticity: herm })
}

/// max |U(t, 0) - I| for the stencil at a = dt = 0.
pub fn identity_deviation_at_zero(schedule: &CoinSchedule, x: f64, t: f64) -> f64 {
    let coin = |sub, y, dt| to_dmatrix(&schedule.coin(sub, y, t, dt));
    let ops = modified_ops(&coin, 1, 0.0);
    let blocks = compose_at(&ops, [x], 0.0);
    let sum = blocks.values().fold(DMatrix::<C64>::zeros(2, 2), |acc, b| acc + b);
    max_abs_diff(&sum, &DMatrix::identity(2, 2))
}

/// ||(U(t, dt) - I) psi|| for a Gaussian probe psi of width 0.1 with coin (1, i)/sqrt 2
/// on a lattice of spacing dt covering [-0.6, 0.6].
pub fn step_deviation(schedule: &CoinSchedule, t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let half = (0.6 / dt).ceil() as usize;
    let lattice = Lattice::new(2 * half + 1, dt)?;
    let sigma: f64 = 0.1;
    let amp = 1.0 / 2f64.sqrt();
    let xs = lattice.positions();
    let mut amps: Vec<C64> = xs.iter().map(|x| c(amp * (-x * x / (4.0 * sigma * sigma)).exp(), 0.0)).collect();
    amps.extend(xs.iter().map(|x| I * amp * (-x * x / (4.0 * sigma * sigma)).exp()));
    let psi = WalkState::from_amplitudes(2, lattice, amps)?;
    let mut out = psi.clone();
    step_modified(&mut out, schedule, t, dt)?;
    Ok(out.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
}

/// Effective 2+1 geometry at one point, with one hidden momentum k_y.
#[derive(Clone, Copy, Debug)]
pub struct Reduction2p1 {
    /// vielbein[mu][a] = e^mu_(a).
    pub vielbein: [[f64; 3]; 3],
    /// A_0, A_1, A_2.
    pub potentials: [f64; 3],
    pub mass: f64,
    pub metric: [[f64; 3]; 3],
    /// Residuals of the six matching conditions for `potentials`.
    pub residuals: [f64; 6],
    k_y: f64,
    angles: [f64; 2],
    derivs: [f64; 3],
    coeffs: HamiltonianCoefficients,
}

impl Reduction2p1 {
    /// Residuals of the matching conditions for an arbitrary choice of potentials.
    pub fn residuals_for(&self, pot: [f64; 3]) -> [f64; 6] {
        let [al, be] = self.angles;
        let [d01, d02, _] = self.derivs;
        let e00 = self.vielbein[0][0];
        let q = |mu: usize, a: usize| self.vielbein[mu][a] / e00;
        let (th2, th3) = (self.coeffs.theta[1], self.coeffs.theta[2]);
        let kk = self.k_y - pot[2];
        let c2ab = (2.0 * al + 2.0 * be).cos();
        let s2ab = (2.0 * al + 2.0 * be).sin();
        [
            q(1, 2) - th2,
            q(1, 1) - th3,
            -pot[0] + q(2, 0) * kk - self.coeffs.xi[0].re,
            self.mass / e00 - self.coeffs.xi[1].re,
            q(2, 1) * kk - q(1, 1) * pot[1] + d01 * th3 + 0.5 * d02 * c2ab,
            q(2, 2) * kk - q(1, 2) * pot[1] + d01 * th2 + 0.5 * d02 * s2ab,
        ]
    }

    /// Potentials in the sign convention printed alongside the vielbein solution.
    pub fn printed_potentials(&self) -> [f64; 3] {
        let [d01, d02, _] = self.derivs;
        [self.potentials[0], -d01, -d02 + self.k_y]
    }
}

/// Effective 2+1 reduction of a {theta^0, theta^1} schedule at (x, t).
///
/// Vielbein ratios: e2_(0)/e00 = 1/2, e1_(1)/e00 = Theta_3, e1_(2)/e00 = Theta_2,
/// e2_(1)/e00 = cos(2a+2b)/2, e2_(2)/e00 = sin(2a+2b)/2; potentials
/// A0 = -(vartheta^0_1 + vartheta^0_2), A1 = d_x theta^0_1, A2 = d_x theta^0_2 + k_y.
pub fn reduce_2plus1(schedule: &CoinSchedule, conv: MassConvention, k_y: f64, x: f64, t: f64, h: f64) -> Result<Reduction2p1> {
    let coeffs = closed_form_coefficients(schedule, x, t, h)?;
    let base = |sub, q, y| schedule.angle(sub, q, y, t, 0.0);
    let (al, be) = (base(FIRST, 1, x), base(SECOND, 1, x));
    let d01 = central(|y| base(FIRST, 0, y), x, h);
    let d02 = central(|y| base(SECOND, 0, y), x, h);
    let d12 = central(|y| base(SECOND, 1, y), x, h);
    let ratio = coeffs.xi[1].re;
    let (e00, mass) = match conv {
        MassConvention::Fundamental(m) => {
            if ratio == 0.0 {
                return Err(Error::Domain("m/e00 vanishes; e00 cannot be recovered for a fixed mass".into()));
            }
            (m / ratio, m)
        }
        MassConvention::Emergent => (1.0, ratio),
    };
    let (s2ab, c2ab) = (2.0 * al + 2.0 * be).sin_cos();
    let vielbein = [
        [e00, 0.0, 0.0],
        [0.0, e00 * coeffs.theta[2], e00 * coeffs.theta[1]],
        [0.5 * e00, 0.5 * e00 * c2ab, 0.5 * e00 * s2ab],
    ];
    let mut metric = [[0.0; 3]; 3];
    for (mu, row) in metric.iter_mut().enumerate() {
        for (nu, g) in row.iter_mut().enumerate() {
            *g = vielbein[mu][0] * vielbein[nu][0] - vielbein[mu][1] * vielbein[nu][1] - vielbein[mu][2] * vielbein[nu][2];
        }
    }
    let a0 = -(schedule.rate(FIRST, 0).eval(x, t) + schedule.rate(SECOND, 0).eval(x, t));
    let mut red = Reduction2p1 {
        vielbein,
        potentials: [a0, d01, d02 + k_y],
        mass,
        metric,
        residuals: [0.0; 6],
        k_y,
        angles: [al, be],
        derivs: [d01, d02, d12],
        coeffs,
    };
    red.residuals = red.residuals_for(red.potentials);
    Ok(red)
}

/// chi^q_r for the nonabelian extension; entry q holds [chi^q_0, .., chi^q_3].
#[derive(Clone, Debug, PartialEq)]
pub struct ChiCoefficients {
    pub chi: Vec<[f64; 4]>,
}

/// Closed-form chi at (x, t), with F1, G1 the first coin at dt = 0.
pub fn chi_coefficients(schedule: &CoinSchedule, spec: &NonabelianCoinSpec, x: f64, t: f64) -> ChiCoefficients {
    let (f1, g1) = schedule.angles(FIRST, x, t, 0.0).fg();
    let gf = g1 * f1.conj();
    let pol = f1.norm_sqr() - g1.norm_sqr();
    let chi = (0..spec.generators().len())
        .map(|q| {
            let (w1, big1) = (spec.omega(FIRST, q, x, t), spec.big_omega(FIRST, q, x, t));
            let (w2, big2) = (spec.omega(SECOND, q, x, t), spec.big_omega(SECOND, q, x, t));
            let dw = w2 - big2;
            [0.5 * (w1 + big1 + w2 + big2), gf.re * dw, -gf.im * dw, 0.5 * (w1 - big1 + dw * pol)]
        })
        .collect();
    ChiCoefficients { chi }
}

/// Numeric sigma_r (x) Lambda_q components of the nonabelian modified step:
/// (momentum[q][r], local[q][r]) and the Richardson residual.
pub fn numeric_nonabelian_components(
    schedule: &CoinSchedule,
    spec: &NonabelianCoinSpec,
    x: f64,
    t: f64,
    d: f64,
) -> Result<(Vec<[C64; 4]>, Vec<[C64; 4]>, f64)> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("probe step must be positive".into()));
    }
    let n = spec.gauge_dim();
    let coin = |sub, y, dt| nonabelian_coin(schedule, spec, sub, y, t, dt);
    let e = |h: f64| {
        let ops = modified_ops(&coin, n, h);
        expand(&compose_at(&ops, [x], h), h, h)
    };
    let (p, l, res) = extrapolate(&e, d);
    let decompose = |m: &DMatrix<C64>| -> Vec<[C64; 4]> {
        spec.generators()
            .iter()
            .map(|g| {
                let norm = (g.adjoint() * g).trace();
                std::array::from_fn(|r| {
                    let basis = kron(&to_dmatrix(&pauli(r)), g);
                    (basis.adjoint() * m).trace() / (norm * 2.0)
                })
            })
            .collect()
    };
    Ok((decompose(&p), decompose(&l), res))
}

pub const REFERENCE_SCENARIOS: [&str; 6] = ["flat", "nonstatic_gauge", "nonstatic", "static", "static_gauge", "static_x2_delocalized"];

/// A built-in curved-spacetime run: lattice, schedule, initial state and step count.
#[derive(Clone, Debug)]
pub struct ReferenceScenario {
    pub name: &'static str,
    pub scale: f64,
    pub sites: usize,
    pub steps: usize,
    pub mass: f64,
    pub schedule: CoinSchedule,
    pub coin: [C64; 2],
    /// Signed site offsets and weights of the initial position superposition.
    pub positions: Vec<(i64, C64)>,
    pub metric: &'static str,
}

impl ReferenceScenario {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::with_scale(self.sites, self.scale)
    }

    pub fn initial_state(&self) -> Result<WalkState> {
        let lat = self.lattice()?;
        let mut pos = vec![ZERO; lat.sites()];
        for &(off, w) in &self.positions {
            pos[lat.site(off)] += w;
        }
        WalkState::product(&self.coin, &pos, lat)
    }
}

pub fn reference_scenario(name: &str) -> Result<ReferenceScenario> {
    let mass = 0.04;
    let r = 1.0 / 2f64.sqrt();
    let coin = [c(r, 0.0), c(0.0, r)];
    let origin = vec![(0, c(1.0, 0.0))];
    let gauge = |s: CoinSchedule| {
        s.with_base(FIRST, 0, Field::func(|x, t| -1000.0 * x * t)).with_rate(FIRST, 0, Field::func(|x, _| -0.03 * x))
    };
    let nonstatic = || {
        CoinSchedule::new()
            .with_base(FIRST, 1, Field::func(|x, _| std::f64::consts::FRAC_PI_8 + 2.0 * x))
            .with_rate(FIRST, 1, Field::Const(-2.0))
            .with_base(SECOND, 1, Field::func(|x, _| -std::f64::consts::FRAC_PI_4 - 4.0 * x))
            .with_rate(SECOND, 1, Field::func(move |_, t| mass * t))
    };
    let static_metric = |shift: f64| {
        CoinSchedule::new()
            .with_base(FIRST, 1, Field::func(move |x, _| 0.5 * (x + shift).acos()))
            .with_rate(FIRST, 1, Field::func(move |x, _| 0.5 / (1.0 - (x + shift).powi(2)).sqrt()))
            .with_base(SECOND, 1, Field::func(move |x, _| -(x + shift).acos()))
            .with_rate(SECOND, 1, Field::Const(mass))
    };
    let a250 = 1.0 / 250.0;
    let sc = |name, scale, sites, steps, schedule, metric| ReferenceScenario {
        name,
        scale,
        sites,
        steps,
        mass,
        schedule,
        coin,
        positions: origin.clone(),
        metric,
    };
    match name {
        "flat" => Ok(sc("flat", 150.0, 400, 200, CoinSchedule::new().with_rate(SECOND, 1, Field::Const(mass)), "g00 = 1, g11 = -1")),
        "nonstatic_gauge" => Ok(sc(
            "nonstatic_gauge",
            150.0,
            400,
            200,
            gauge(nonstatic()),
            "g00 = t^-2, g11 = -(t^-2/2)(cos 4x + sin 4x)^2, U(1) potential",
        )),
        "nonstatic" => {
            Ok(sc("nonstatic", 150.0, 400, 200, nonstatic(), "g00 = t^-2, g11 = -(t^-2/2)(cos 4x + sin 4x)^2"))
        }
        "static" => Ok(sc("static", 250.0, 200, 800, static_metric(5.0 * a250), "g00 = 1, g11 = -(x+5a)^2")),
        "static_gauge" => Ok(sc(
            "static_gauge",
            250.0,
            200,
            800,
            gauge(static_metric(5.0 * a250)),
            "g00 = 1, g11 = -(x+5a)^2, U(1) potential",
        )),
        "static_x2_delocalized" => {
            let mut s = sc("static_x2_delocalized", 250.0, 200, 600, static_metric(0.0), "g00 = 1, g11 = -x^2");
            let h = c(0.5, 0.0);
            s.coin = [c(1.0, 0.0), c(0.0, 1.0)];
            s.positions = vec![(-9, h), (9, h)];
            Ok(s)
        }
        _ => Err(Error::UnknownScenario { name: name.to_string(), valid: REFERENCE_SCENARIOS.join(", ") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth_schedule(seed: u64) -> CoinSchedule {
        let k = seed as f64;
        let (a, b, cc, d) = ((k * 1.3).sin(), (k * 0.7).cos(), (k * 2.1).sin(), (k * 0.4).cos());
        CoinSchedule::new()
            .with_base(FIRST, 0, Field::func(move |x, t| a * (b * x).sin() + 0.2 * t * x))
            .with_rate(FIRST, 0, Field::func(move |x, t| cc * x + 0.1 * t))
            .with_base(SECOND, 0, Field::func(move |x, _| 0.3 * d * x * x))
            .with_rate(SECOND, 0, Field::func(move |x, _| b * (x * d).cos()))
            .with_base(FIRST, 1, Field::func(move |x, t| 0.4 * a + 0.5 * (cc * x + t).sin()))
            .with_rate(FIRST, 1, Field::func(move |x, _| d + 0.2 * x))
            .with_base(SECOND, 1, Field::func(move |x, t| b - 0.6 * (d * x).cos() + 0.1 * t))
            .with_rate(SECOND, 1, Field::func(move |x, t| 0.3 * a * x - t))
    }

    #[test]
    fn flat_closed_form() {
        let s = reference_scenario("flat").unwrap().schedule;
        let cf = closed_form_coefficients(&s, 0.1, 0.3, 1e-3).unwrap();
        assert!((cf.theta[2] - 1.0).abs() < 1e-14);
        assert!((cf.xi[1] - c(0.04, 0.0)).norm() < 1e-14);
        assert!(cf.theta[0].abs() + cf.theta[1].abs() < 1e-14);
        for r in [0, 2, 3] {
            assert!(cf.xi[r].norm() < 1e-14);
        }
        let num = numeric_coefficients(&s, 0.1, 0.3, 1e-4).unwrap();
        assert!(num.coeffs.max_diff(&cf) < 1e-10);
    }

    #[test]
    fn static_theta3_is_vielbein_ratio() {
        let s = reference_scenario("static").unwrap().schedule;
        for x in [-0.3, -0.05, 0.2] {
            let cf = closed_form_coefficients(&s, x, 0.5, 1e-4).unwrap();
            assert!((cf.theta[2] - (x + 5.0 / 250.0)).abs() < 1e-12);
            assert!(cf.theta[1].abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_matches_closed_form_random() {
        for seed in 0..8 {
            let s = smooth_schedule(seed);
            let (x, t) = (0.1 * seed as f64 - 0.3, 0.2 + 0.05 * seed as f64);
            let num = numeric_coefficients(&s, x, t, 1e-5).unwrap();
            let cf = closed_form_coefficients(&s, x, t, 1e-3).unwrap();
            assert!(num.coeffs.max_diff(&cf) < 1e-6, "seed {seed}: {:e}", num.coeffs.max_diff(&cf));
            assert!(num.theta0.norm() < 1e-9);
            assert!(num.hermiticity < 1e-8, "seed {seed}: {:e}", num.hermiticity);
        }
    }

    #[test]
    fn closed_form_error_is_second_order() {
        let s = smooth_schedule(3);
        let num = numeric_coefficients(&s, 0.2, 0.4, 1e-5).unwrap();
        let e1 = closed_form_coefficients(&s, 0.2, 0.4, 1e-2).unwrap().max_diff(&num.coeffs);
        let e2 = closed_form_coefficients(&s, 0.2, 0.4, 5e-3).unwrap().max_diff(&num.coeffs);
        assert!((3.5..4.5).contains(&(e1 / e2)), "ratio {}", e1 / e2);
    }

    #[test]
    fn general_family_has_theta2() {
        let s = CoinSchedule::new()
            .with_base(FIRST, 1, Field::Const(0.3))
            .with_base(SECOND, 1, Field::Const(0.2));
        let cf = closed_form_coefficients(&s, 0.0, 0.0, 1e-3).unwrap();
        assert!(cf.theta[1].abs() > 0.1);
        let num = numeric_coefficients(&s, 0.0, 0.0, 1e-4).unwrap();
        assert!((num.coeffs.theta[1] - cf.theta[1]).abs() < 1e-9);
    }

    #[test]
    fn constrained_family_has_no_theta1_theta2() {
        for seed in 0..5 {
            let k = seed as f64;
            let s = CoinSchedule::new()
                .with_base(FIRST, 1, Field::func(move |x, t| 0.3 * (x * k + t).sin()))
                .with_base(SECOND, 1, Field::func(move |x, t| -0.6 * (x * k + t).sin()));
            let cf = closed_form_coefficients(&s, 0.2, 0.1, 1e-3).unwrap();
            assert!(cf.theta[0].abs() < 1e-12 && cf.theta[1].abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_theta2_theta3() {
        let s = CoinSchedule::new().with_base(FIRST, 2, Field::Const(0.1));
        assert!(matches!(closed_form_coefficients(&s, 0.0, 0.0, 1e-3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn identity_at_zero_dt() {
        for name in REFERENCE_SCENARIOS {
            let s = reference_scenario(name).unwrap().schedule;
            for x in [-0.3, 0.0, 0.25] {
                assert!(identity_deviation_at_zero(&s, x, 0.4) < 1e-15, "{name}");
            }
        }
        assert!(identity_deviation_at_zero(&smooth_schedule(2), 0.1, 0.2) < 1e-15);
    }

    #[test]
    fn step_deviation_is_linear() {
        let s = reference_scenario("static").unwrap().schedule;
        let r = step_deviation(&s, 0.002, 1e-2).unwrap() / step_deviation(&s, 0.002, 1e-3).unwrap();
        assert!((9.0..11.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn flat_metric() {
        let lat = Lattice::with_scale(100, 150.0).unwrap();
        let f = VielbeinField1p1::fundamental(Field::Const(1.0), Field::Const(1.0), 0.04);
        let s = schedule_from_metric_1p1(&f, &lat, 10).unwrap();
        let dt = lat.spacing();
        assert!(s.angle(FIRST, 1, 0.1, 0.0, dt).abs() < 1e-15);
        assert!((s.angle(SECOND, 1, 0.1, 0.0, dt) - 0.04 * dt).abs() < 1e-15);
        let m = metric_from_schedule(&s, MassConvention::Fundamental(0.04), 0.1, 0.0, dt).unwrap();
        assert!((m.g00 - 1.0).abs() < 1e-12 && (m.g11 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn static_metric_from_vielbeins() {
        let lat = Lattice::with_scale(200, 250.0).unwrap();
        let a = lat.spacing();
        let f = VielbeinField1p1::fundamental(Field::Const(1.0), Field::func(move |x, _| x + 5.0 * a), 0.04);
        let s = schedule_from_metric_1p1(&f, &lat, 5).unwrap();
        let reference = reference_scenario("static").unwrap().schedule;
        for x in [-0.2, 0.0, 0.3] {
            for (sub, q) in [(FIRST, 1), (SECOND, 1)] {
                let got = s.angle(sub, q, x, 0.0, a);
                let want = reference.angle(sub, q, x, 0.0, a);
                assert!((got - want).abs() < 1e-7, "{x} {q}: {got} {want}");
            }
            let m = metric_from_schedule(&reference, MassConvention::Fundamental(0.04), x, 0.0, 1e-5).unwrap();
            assert!((m.g11 + (x + 5.0 * a).powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn metric_round_trip() {
        let lat = Lattice::with_scale(120, 100.0).unwrap();
        let f = VielbeinField1p1::fundamental(
            Field::func(|x, t| 1.5 + 0.3 * (x + t).sin()),
            Field::func(|x, t| 0.8 * (2.0 * x).cos() + 0.1 * t),
            0.04,
        )
        .with_potentials(Field::func(|x, t| 0.2 * x - t), Field::func(|x, _| 0.5 + x));
        let s = schedule_from_metric_1p1(&f, &lat, 5).unwrap();
        let h = lat.spacing();
        for x in [-0.25, 0.1, 0.33] {
            let t = 0.02;
            let m = metric_from_schedule(&s, MassConvention::Fundamental(0.04), x, t, h).unwrap();
            let e00 = f.e00.eval(x, t);
            assert!((m.e00 - e00).abs() < 1e-10);
            assert!((m.e11 - f.e11.eval(x, t)).abs() < 1e-10);
            assert!((m.g00 - e00 * e00).abs() < 1e-10);
            assert!((m.a0 - f.a0.eval(x, t)).abs() < 1e-12);
            // A1 goes through a trapezoid integral and a central difference: O(h^2).
            assert!((m.a1 - f.a1.eval(x, t)).abs() < 1e-3);
        }
    }

    #[test]
    fn emergent_mass_round_trip() {
        let lat = Lattice::with_scale(80, 100.0).unwrap();
        let f = VielbeinField1p1::emergent(Field::func(|x, _| 0.5 + 0.3 * x), Field::func(|x, t| 0.05 + x * t));
        let s = schedule_from_metric_1p1(&f, &lat, 3).unwrap();
        let m = metric_from_schedule(&s, MassConvention::Emergent, 0.1, 0.01, lat.spacing()).unwrap();
        assert!((m.mass - (0.05 + 0.001)).abs() < 1e-10);
        assert_eq!(m.e00, 1.0);
    }

    #[test]
    fn metric_domain_rejected() {
        let lat = Lattice::with_scale(100, 10.0).unwrap();
        let f = VielbeinField1p1::fundamental(Field::Const(1.0), Field::func(|x, _| 2.0 * x), 0.04);
        assert!(matches!(schedule_from_metric_1p1(&f, &lat, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn reduction_trivial_angles() {
        let s = CoinSchedule::new().with_rate(SECOND, 1, Field::Const(0.04));
        let red = reduce_2plus1(&s, MassConvention::Emergent, 0.3, 0.1, 0.2, 1e-4).unwrap();
        assert!((red.vielbein[1][1] - 1.0).abs() < 1e-14);
        assert!(red.vielbein[1][2].abs() < 1e-14);
        assert!((red.metric[0][2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn reduction_satisfies_matching_conditions() {
        for seed in 0..5 {
            let s = smooth_schedule(seed);
            let red = reduce_2plus1(&s, MassConvention::Emergent, 0.7, 0.15, 0.3, 1e-4).unwrap();
            assert!(red.residuals.iter().all(|r| r.abs() < 1e-10), "{:?}", red.residuals);
            let cb2 = (s.angle(SECOND, 1, 0.15, 0.3, 0.0)).cos().powi(2);
            let e2 = red.vielbein[0][0].powi(2);
            assert!((red.metric[1][1] + e2 * cb2).abs() < 1e-10);
            assert!((red.metric[1][2] + 0.5 * e2 * cb2).abs() < 1e-10);
            assert!(red.metric[2][2].abs() < 1e-10);
        }
    }

    #[test]
    fn printed_potential_signs_break_matching() {
        let s = smooth_schedule(1);
        let red = reduce_2plus1(&s, MassConvention::Emergent, 0.7, 0.15, 0.3, 1e-4).unwrap();
        let res = red.residuals_for(red.printed_potentials());
        assert!(res.iter().any(|r| r.abs() > 1e-3));
    }

    #[test]
    fn chi_vanishes_for_equal_second_rotation() {
        let s = smooth_schedule(4);
        let mut spec = NonabelianCoinSpec::with_default_generators(2).unwrap();
        for q in 0..4 {
            let w = 0.1 * q as f64 + 0.2;
            spec.set_omega(SECOND, q, Field::Const(w));
            spec.set_big_omega(SECOND, q, Field::Const(w));
            spec.set_omega(FIRST, q, Field::Const(-w));
            spec.set_big_omega(FIRST, q, Field::Const(0.5 * w));
        }
        let chi = chi_coefficients(&s, &spec, 0.1, 0.2);
        for (q, row) in chi.chi.iter().enumerate() {
            let w = 0.1 * q as f64 + 0.2;
            assert!(row[1].abs() < 1e-12 && row[2].abs() < 1e-12);
            assert!((row[0] - 0.5 * (-w + 0.5 * w + 2.0 * w)).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_zero_without_gauge() {
        let spec = NonabelianCoinSpec::with_default_generators(2).unwrap();
        let chi = chi_coefficients(&smooth_schedule(1), &spec, 0.0, 0.0);
        assert!(chi.chi.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn chi_matches_numeric_extraction() {
        for (seed, n) in [(1u64, 2usize), (2, 3)] {
            let s = smooth_schedule(seed);
            let mut spec = NonabelianCoinSpec::with_default_generators(n).unwrap();
            let count = spec.generators().len();
            for q in 0..count {
                let k = (q + 1) as f64 * (seed as f64 + 0.5);
                spec.set_omega(FIRST, q, Field::func(move |x, _| (k * 0.9).sin() + 0.2 * x));
                spec.set_big_omega(FIRST, q, Field::Const((k * 1.7).cos()));
                spec.set_omega(SECOND, q, Field::func(move |_, t| (k * 2.3).sin() - t));
                spec.set_big_omega(SECOND, q, Field::Const((k * 0.3).cos()));
            }
            let (x, t) = (0.12, 0.3);
            let chi = chi_coefficients(&s, &spec, x, t);
            let (mom, local, res) = numeric_nonabelian_components(&s, &spec, x, t, 1e-5).unwrap();
            assert!(res < 1e-8);
            let xi = numeric_coefficients(&s, x, t, 1e-5).unwrap().coeffs.xi;
            for q in 0..count {
                for r in 0..4 {
                    let want = if q == 0 { xi[r] + chi.chi[0][r] } else { c(chi.chi[q][r], 0.0) };
                    assert!((local[q][r] - want).norm() < 1e-8, "n {n} q {q} r {r}: {} vs {}", local[q][r], want);
                    if q > 0 {
                        assert!(mom[q][r].norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn scenario_lookup() {
        let s = reference_scenario("nonstatic_gauge").unwrap();
        assert_eq!((s.scale, s.sites, s.steps), (150.0, 400, 200));
        let dt = 1.0 / 150.0;
        let th = s.schedule.angle(FIRST, 0, 0.2, 0.5, dt);
        assert!((th - (-1000.0 * 0.2 * 0.5 - 0.03 * 0.2 / 150.0)).abs() < 1e-12);
        let d = reference_scenario("static_x2_delocalized").unwrap();
        assert_eq!(d.steps, 600);
        let psi = d.initial_state().unwrap();
        let lat = psi.lattice().clone();
        assert!((psi.amplitude(1, lat.site(9)) - c(0.0, 0.5)).norm() < 1e-15);
        assert!(matches!(reference_scenario("nope"), Err(Error::UnknownScenario { .. })));
    }
}
