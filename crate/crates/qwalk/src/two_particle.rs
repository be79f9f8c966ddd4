//! Two walkers coupled through a global 4x4 coin.
//!
//! The coin of sub-step j is exp(-i sum_{q,r} theta^{qr}_j sigma_q (x) sigma_r)
//! restricted to q, r in {0, 1}; its eigenvectors are fixed, so it is built as
//! sum_q e^{-i lambda^q_j} |psi_q><psi_q|.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix4};

use crate::coin::{CoinSchedule, Field, SubStep};
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, to_dmatrix, C64, ZERO};
use crate::shift::{shift, ShiftKind};
use crate::state::{Lattice, TwoParticleState};
use crate::stencil::{compose_at, expand, richardson, LocalOp, Terms};

pub type Mat4 = Matrix4<C64>;

/// A real field over (x1, x2, t).
#[derive(Clone, Default)]
pub enum Field2 {
    #[default]
    Zero,
    Const(f64),
    Func(Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>),
}

impl Field2 {
    pub fn func(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Field2::Func(Arc::new(f))
    }

    pub fn eval(&self, x1: f64, x2: f64, t: f64) -> f64 {
        match self {
            Field2::Zero => 0.0,
            Field2::Const(v) => *v,
            Field2::Func(f) => f(x1, x2, t),
        }
    }
}

impl fmt::Debug for Field2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field2::Zero => write!(f, "Zero"),
            Field2::Const(v) => write!(f, "Const({v})"),
            Field2::Func(_) => write!(f, "Func(..)"),
        }
    }
}

/// theta^{qr}_j(x1,x2,t,0) and vartheta^{qr}_j(x1,x2,t) for q, r in {0,1}.
#[derive(Clone, Debug, Default)]
pub struct TwoCoinField {
    base: [[[Field2; 2]; 2]; 2],
    rate: [[[Field2; 2]; 2]; 2],
}

fn sub_idx(sub: SubStep) -> usize {
    match sub {
        SubStep::First => 0,
        SubStep::Second => 1,
    }
}

impl TwoCoinField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_base(&mut self, sub: SubStep, q: usize, r: usize, f: Field2) -> Result<()> {
        if q > 1 || r > 1 {
            return Err(Error::UnsupportedIndex { q, r });
        }
        self.base[sub_idx(sub)][q][r] = f;
        Ok(())
    }

    pub fn set_rate(&mut self, sub: SubStep, q: usize, r: usize, f: Field2) -> Result<()> {
        if q > 1 || r > 1 {
            return Err(Error::UnsupportedIndex { q, r });
        }
        self.rate[sub_idx(sub)][q][r] = f;
        Ok(())
    }

    pub fn base(&self, sub: SubStep, q: usize, r: usize) -> &Field2 {
        &self.base[sub_idx(sub)][q][r]
    }

    pub fn rate(&self, sub: SubStep, q: usize, r: usize) -> &Field2 {
        &self.rate[sub_idx(sub)][q][r]
    }

    /// theta^{qr}_j(x1,x2,t,dt) as a 2x2 table.
    pub fn angles(&self, sub: SubStep, x1: f64, x2: f64, t: f64, dt: f64) -> [[f64; 2]; 2] {
        let j = sub_idx(sub);
        let mut out = [[0.0; 2]; 2];
        for q in 0..2 {
            for r in 0..2 {
                out[q][r] = self.base[j][q][r].eval(x1, x2, t) + dt * self.rate[j][q][r].eval(x1, x2, t);
            }
        }
        out
    }
}

/// lambda^0..3 for theta^{00}, theta^{01}, theta^{10}, theta^{11}.
pub fn lambdas(th: &[[f64; 2]; 2]) -> [f64; 4] {
    let (t00, t01, t10, t11) = (th[0][0], th[0][1], th[1][0], th[1][1]);
    [t00 + t01 + t10 + t11, t00 + t01 - t10 - t11, t00 - t01 + t10 - t11, t00 - t01 - t10 + t11]
}

/// Eigenvectors |psi_q> in the (up-up, up-down, down-up, down-down) basis.
pub fn eigenvectors() -> [[f64; 4]; 4] {
    [[0.5, 0.5, 0.5, 0.5], [-0.5, -0.5, 0.5, 0.5], [-0.5, 0.5, -0.5, 0.5], [0.5, -0.5, -0.5, 0.5]]
}

pub fn coin_from_angles(th: &[[f64; 2]; 2]) -> Mat4 {
    let lam = lambdas(th);
    let vecs = eigenvectors();
    let mut m = Mat4::zeros();
    for q in 0..4 {
        let ph = C64::from_polar(1.0, -lam[q]);
        for i in 0..4 {
            for k in 0..4 {
                m[(i, k)] += ph * vecs[q][i] * vecs[q][k];
            }
        }
    }
    m
}

pub fn two_coin(field: &TwoCoinField, sub: SubStep, x1: f64, x2: f64, t: f64, dt: f64) -> Mat4 {
    coin_from_angles(&field.angles(sub, x1, x2, t, dt))
}

fn apply_coin_field<F: Fn(f64, f64) -> Mat4>(state: &mut TwoParticleState, coin_at: F) {
    let lat = state.lattice().clone();
    let n = lat.sites();
    let xs = lat.positions();
    let nn = n * n;
    let amps = state.amplitudes_mut();
    for x1 in 0..n {
        for x2 in 0..n {
            let m = coin_at(xs[x1], xs[x2]);
            let p = x1 * n + x2;
            let v = [amps[p], amps[nn + p], amps[2 * nn + p], amps[3 * nn + p]];
            for i in 0..4 {
                amps[i * nn + p] = (0..4).map(|k| m[(i, k)] * v[k]).sum();
            }
        }
    }
}

/// [U(t,0)]^dagger U(t,dt) with U = S+ C2 S- C1 and two-particle shifts.
pub fn step_two_particle(state: &mut TwoParticleState, field: &TwoCoinField, t: f64, dt: f64) -> Result<()> {
    if state.coin_dims() != (2, 2) {
        return Err(Error::DimensionMismatch("two-particle walk needs two-dimensional coins".into()));
    }
    let lat = state.lattice().clone();
    apply_coin_field(state, |x1, x2| two_coin(field, SubStep::First, x1, x2, t, dt));
    shift(ShiftKind::TwoParticleMinus, 4, &lat)?.apply_two(state)?;
    apply_coin_field(state, |x1, x2| two_coin(field, SubStep::Second, x1, x2, t, dt));
    shift(ShiftKind::TwoParticlePlus, 4, &lat)?.apply_two(state)?;
    apply_coin_field(state, |x1, x2| two_coin(field, SubStep::Second, x1, x2, t, 0.0).adjoint());
    apply_coin_field(state, |x1, x2| two_coin(field, SubStep::First, x1, x2, t, 0.0).adjoint());
    Ok(())
}

/// Per-particle schedules of a separable coin field.
#[derive(Clone, Debug)]
pub struct SeparableFactors {
    pub first: CoinSchedule,
    pub second: CoinSchedule,
}

/// Detects the noninteracting structure on the lattice grid at time t:
/// theta^{11} = 0, theta^{10} depends on x1 only, theta^{01} on x2 only, and
/// theta^{00} = alpha(x1) + beta(x2). Returns the per-particle schedules.
pub fn is_separable_form(field: &TwoCoinField, lattice: &Lattice, t: f64) -> Option<SeparableFactors> {
    const TOL: f64 = 1e-12;
    let xs = lattice.positions();
    let x0 = 0.0;
    for fields in [&field.base, &field.rate] {
        for j in 0..2 {
            let f = &fields[j];
            for &x1 in &xs {
                for &x2 in &xs {
                    if f[1][1].eval(x1, x2, t).abs() > TOL
                        || (f[1][0].eval(x1, x2, t) - f[1][0].eval(x1, x0, t)).abs() > TOL
                        || (f[0][1].eval(x1, x2, t) - f[0][1].eval(x0, x2, t)).abs() > TOL
                    {
                        return None;
                    }
                    let mixed = f[0][0].eval(x1, x2, t) - f[0][0].eval(x1, x0, t) - f[0][0].eval(x0, x2, t) + f[0][0].eval(x0, x0, t);
                    if mixed.abs() > TOL {
                        return None;
                    }
                }
            }
        }
    }
    let mut first = CoinSchedule::new();
    let mut second = CoinSchedule::new();
    for (j, sub) in [SubStep::First, SubStep::Second].into_iter().enumerate() {
        for (is_rate, fields) in [(false, &field.base), (true, &field.rate)] {
            let f00 = fields[j][0][0].clone();
            let f00b = f00.clone();
            let f10 = fields[j][1][0].clone();
            let f01 = fields[j][0][1].clone();
            let alpha = Field::func(move |x, t| f00.eval(x, x0, t) - 0.5 * f00.eval(x0, x0, t));
            let beta = Field::func(move |x, t| f00b.eval(x0, x, t) - 0.5 * f00b.eval(x0, x0, t));
            let one = Field::func(move |x, t| f10.eval(x, x0, t));
            let two = Field::func(move |x, t| f01.eval(x0, x, t));
            if is_rate {
                first.set_rate(sub, 0, alpha);
                first.set_rate(sub, 1, one);
                second.set_rate(sub, 0, beta);
                second.set_rate(sub, 1, two);
            } else {
                first.set_base(sub, 0, alpha);
                first.set_base(sub, 1, one);
                second.set_base(sub, 0, beta);
                second.set_base(sub, 1, two);
            }
        }
    }
    Some(SeparableFactors { first, second })
}

/// Builds the separable two-particle field from two single-particle
/// {theta^0, theta^1} schedules.
pub fn separable_field(first: &CoinSchedule, second: &CoinSchedule) -> TwoCoinField {
    let mut f = TwoCoinField::new();
    for (j, sub) in [SubStep::First, SubStep::Second].into_iter().enumerate() {
        for is_rate in [false, true] {
            let pick = |s: &CoinSchedule, q: usize| if is_rate { s.rate(sub, q).clone() } else { s.base(sub, q).clone() };
            let (a0, a1, b0, b1) = (pick(first, 0), pick(first, 1), pick(second, 0), pick(second, 1));
            let fields = if is_rate { &mut f.rate } else { &mut f.base };
            fields[j][0][0] = Field2::func(move |x1, x2, t| a0.eval(x1, t) + b0.eval(x2, t));
            fields[j][1][0] = Field2::func(move |x1, _, t| a1.eval(x1, t));
            fields[j][0][1] = Field2::func(move |_, x2, t| b1.eval(x2, t));
        }
    }
    f
}

/// 1/2 [theta^{qr}(x1,x2) + theta^{rq}(x2,x1)] per component.
pub fn exchange_symmetrize(field: &TwoCoinField) -> TwoCoinField {
    let mut out = TwoCoinField::new();
    for j in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                for (src, dst) in [(&field.base, &mut out.base), (&field.rate, &mut out.rate)] {
                    let a = src[j][q][r].clone();
                    let b = src[j][r][q].clone();
                    dst[j][q][r] = Field2::func(move |x1, x2, t| 0.5 * (a.eval(x1, x2, t) + b.eval(x2, x1, t)));
                }
            }
        }
    }
    out
}

/// Coefficients of sigma_q (x) sigma_r multiplying p1, p2 and the identity.
#[derive(Clone, Debug)]
pub struct TwoHamiltonian {
    pub theta1: [[C64; 4]; 4],
    pub theta2: [[C64; 4]; 4],
    pub xi: [[C64; 4]; 4],
    pub residual: f64,
}

pub const THETA1_PATTERN: [(usize, usize); 4] = [(3, 0), (2, 0), (3, 1), (2, 1)];
pub const THETA2_PATTERN: [(usize, usize); 4] = [(0, 3), (0, 2), (1, 3), (1, 2)];
pub const XI_PATTERN: [(usize, usize); 12] =
    [(3, 0), (2, 0), (3, 1), (2, 1), (0, 3), (0, 2), (1, 3), (1, 2), (0, 0), (0, 1), (1, 0), (1, 1)];

impl TwoHamiltonian {
    /// Off-pattern components whose modulus exceeds `tol`, labelled like "Theta1_33".
    pub fn violations(&self, tol: f64) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (name, table, pattern) in [
            ("Theta1", &self.theta1, &THETA1_PATTERN[..]),
            ("Theta2", &self.theta2, &THETA2_PATTERN[..]),
            ("Xi", &self.xi, &XI_PATTERN[..]),
        ] {
            for q in 0..4 {
                for r in 0..4 {
                    let v = table[q][r].norm();
                    if !pattern.contains(&(q, r)) && v > tol {
                        out.push((format!("{name}_{q}{r}"), v));
                    }
                }
            }
        }
        out
    }

    pub fn check_sparsity(&self, tol: f64) -> Result<()> {
        let v = self.violations(tol);
        if v.is_empty() {
            Ok(())
        } else {
            let list: Vec<String> = v.iter().map(|(l, x)| format!("{l}={x:.3e}")).collect();
            Err(Error::StructuralViolation(list.join(", ")))
        }
    }

    fn matrix(table: &[[C64; 4]; 4]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(4, 4);
        for q in 0..4 {
            for r in 0..4 {
                m += kron(&to_dmatrix(&pauli(q)), &to_dmatrix(&pauli(r))) * table[q][r];
            }
        }
        m
    }

    pub fn momentum1_matrix(&self) -> DMatrix<C64> {
        Self::matrix(&self.theta1)
    }

    pub fn momentum2_matrix(&self) -> DMatrix<C64> {
        Self::matrix(&self.theta2)
    }

    pub fn local_matrix(&self) -> DMatrix<C64> {
        Self::matrix(&self.xi)
    }

    /// Rows of (label, value) for the coefficient CSV.
    pub fn rows(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (name, table) in [("Theta1", &self.theta1), ("Theta2", &self.theta2), ("Xi", &self.xi)] {
            for q in 0..4 {
                for r in 0..4 {
                    out.push((format!("{name}_{q}{r}_re"), table[q][r].re));
                    out.push((format!("{name}_{q}{r}_im"), table[q][r].im));
                }
            }
        }
        out
    }
}

fn decompose4(m: &DMatrix<C64>) -> [[C64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for q in 0..4 {
        for r in 0..4 {
            let basis = kron(&to_dmatrix(&pauli(q)), &to_dmatrix(&pauli(r)));
            out[q][r] = (basis * m).trace() / 4.0;
        }
    }
    out
}

fn projector(c1: usize, c2: usize) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(4, 4);
    p[(2 * c1 + c2, 2 * c1 + c2)] = C64::new(1.0, 0.0);
    p
}

fn shift_terms(plus: bool) -> Terms<2> {
    // S- moves down components by reading psi(x + a); S+ moves up components from psi(x - a)
    let m = |up: bool| -> i32 {
        match (plus, up) {
            (true, true) => -1,
            (true, false) => 0,
            (false, true) => 0,
            (false, false) => 1,
        }
    };
    let mut out = Vec::new();
    for c1 in 0..2 {
        for c2 in 0..2 {
            out.push(([m(c1 == 0), m(c2 == 0)], projector(c1, c2)));
        }
    }
    out
}

fn two_stencil_expansion(field: &TwoCoinField, x1: f64, x2: f64, t: f64, d: f64) -> crate::stencil::Expansion<2> {
    let coin = move |sub: SubStep, dt: f64, adjoint: bool| -> LocalOp<'_, 2> {
        Box::new(move |p: [f64; 2]| {
            let m = two_coin(field, sub, p[0], p[1], t, dt);
            let m = if adjoint { m.adjoint() } else { m };
            vec![([0, 0], DMatrix::from_fn(4, 4, |i, k| m[(i, k)]))]
        })
    };
    let ops: Vec<LocalOp<'_, 2>> = vec![
        coin(SubStep::First, 0.0, true),
        coin(SubStep::Second, 0.0, true),
        Box::new(|_| shift_terms(true)),
        coin(SubStep::Second, d, false),
        Box::new(|_| shift_terms(false)),
        coin(SubStep::First, d, false),
    ];
    expand(&compose_at(&ops, [x1, x2], d), d, d)
}

/// Numeric extraction of the two-particle effective Hamiltonian at (x1, x2, t),
/// Richardson-extrapolated over dt in {d, d/2}.
pub fn two_effective_hamiltonian(field: &TwoCoinField, x1: f64, x2: f64, t: f64, d: f64) -> Result<TwoHamiltonian> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("probe step must be positive".into()));
    }
    let e = [d, d / 2.0, d / 4.0].map(|h| two_stencil_expansion(field, x1, x2, t, h));
    let combine = |f: &dyn Fn(&crate::stencil::Expansion<2>) -> &DMatrix<C64>| {
        let r1 = richardson(f(&e[0]), f(&e[1]));
        let r2 = richardson(f(&e[1]), f(&e[2]));
        let res = crate::linalg::max_abs_diff(&r1, &r2);
        (r1, res)
    };
    let (p1, res1) = combine(&|x| &x.momentum[0]);
    let (p2, res2) = combine(&|x| &x.momentum[1]);
    let (m0, res0) = combine(&|x| &x.local);
    Ok(TwoHamiltonian { theta1: decompose4(&p1), theta2: decompose4(&p2), xi: decompose4(&m0), residual: res0.max(res1).max(res2) })
}

/// Dense particle-exchange permutation applied to a state.
pub fn swap_particles(state: &TwoParticleState) -> TwoParticleState {
    let mut out = state.clone();
    let amps = state.amplitudes();
    for (i, a) in amps.iter().enumerate() {
        let (c1, c2, x1, x2) = state.decode(i);
        let j = state.index(c2, c1, x2, x1);
        out.amplitudes_mut()[j] = *a;
    }
    out
}
