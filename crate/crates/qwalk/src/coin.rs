//! Coin operators: homogeneous U(2) coins, position-time dependent coin
//! fields, block direct sums for the six-dimensional neutrino coin, and
//! U(2N) coins carrying a nonabelian gauge rotation.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{c, expm_hermitian, hermiticity_deviation, unitarity_deviation, Mat2, C64, I, ONE, ZERO};
use crate::state::{Lattice, WalkState};

/// Rotation angles theta0..theta3 of a U(2) coin.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoinAngles {
    pub theta: [f64; 4],
}

impl CoinAngles {
    pub fn new(theta0: f64, theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self { theta: [theta0, theta1, theta2, theta3] }
    }

    /// Pure sigma_1 rotation, the coin used throughout the walk families here.
    pub fn rotation(theta1: f64) -> Self {
        Self::new(0.0, theta1, 0.0, 0.0)
    }

    pub fn magnitude(&self) -> f64 {
        let [_, a, b, c] = self.theta;
        (a * a + b * b + c * c).sqrt()
    }

    /// (F, G) of the coin without the global phase.
    pub fn fg(&self) -> (C64, C64) {
        let [_, t1, t2, t3] = self.theta;
        let r = self.magnitude();
        if r < 1e-8 {
            (c(1.0 - 0.5 * r * r, -t3), c(-t2, -t1))
        } else {
            let (s, co) = r.sin_cos();
            (c(co, -t3 / r * s), c(-t2 / r * s, -t1 / r * s))
        }
    }
}

/// e^{-i theta0} [[F, G], [-G*, F*]].
pub fn u2_from_angles(angles: &CoinAngles) -> Mat2 {
    let (f, g) = angles.fg();
    let phase = C64::from_polar(1.0, -angles.theta[0]);
    Mat2::new(f, g, -g.conj(), f.conj()) * phase
}

/// A real scalar field over (x, t).
#[derive(Clone, Default)]
pub enum Field {
    #[default]
    Zero,
    Const(f64),
    Expr(Arc<Expr>),
    Func(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Field {
    pub fn func(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Field::Func(Arc::new(f))
    }

    pub fn expr(e: Expr) -> Self {
        if e.is_constant_zero() {
            Field::Zero
        } else {
            Field::Expr(Arc::new(e))
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Field::Zero => 0.0,
            Field::Const(v) => *v,
            Field::Expr(e) => e.eval(x, t),
            Field::Func(f) => f(x, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Field::Zero => true,
            Field::Const(v) => *v == 0.0,
            Field::Expr(e) => e.is_constant_zero(),
            Field::Func(_) => false,
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Zero => write!(f, "Zero"),
            Field::Const(v) => write!(f, "Const({v})"),
            Field::Expr(e) => write!(f, "Expr({e:?})"),
            Field::Func(_) => write!(f, "Func(..)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubStep {
    First,
    Second,
}

impl SubStep {
    fn idx(self) -> usize {
        match self {
            SubStep::First => 0,
            SubStep::Second => 1,
        }
    }
}

/// theta^q_j(x,t,dt) = theta^q_j(x,t,0) + dt * vartheta^q_j(x,t) for j = 1, 2.
#[derive(Clone, Debug, Default)]
pub struct CoinSchedule {
    base: [[Field; 4]; 2],
    rate: [[Field; 4]; 2],
}

impl CoinSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Position- and time-independent schedule with dt-free angles.
    pub fn homogeneous(first: CoinAngles, second: CoinAngles) -> Self {
        let mut s = Self::new();
        for q in 0..4 {
            s.base[0][q] = Field::Const(first.theta[q]);
            s.base[1][q] = Field::Const(second.theta[q]);
        }
        s
    }

    pub fn with_base(mut self, sub: SubStep, q: usize, f: Field) -> Self {
        self.base[sub.idx()][q] = f;
        self
    }

    pub fn with_rate(mut self, sub: SubStep, q: usize, f: Field) -> Self {
        self.rate[sub.idx()][q] = f;
        self
    }

    pub fn set_base(&mut self, sub: SubStep, q: usize, f: Field) {
        self.base[sub.idx()][q] = f;
    }

    pub fn set_rate(&mut self, sub: SubStep, q: usize, f: Field) {
        self.rate[sub.idx()][q] = f;
    }

    pub fn base(&self, sub: SubStep, q: usize) -> &Field {
        &self.base[sub.idx()][q]
    }

    pub fn rate(&self, sub: SubStep, q: usize) -> &Field {
        &self.rate[sub.idx()][q]
    }

    pub fn angle(&self, sub: SubStep, q: usize, x: f64, t: f64, dt: f64) -> f64 {
        let j = sub.idx();
        let base = self.base[j][q].eval(x, t);
        if dt == 0.0 {
            base
        } else {
            base + dt * self.rate[j][q].eval(x, t)
        }
    }

    pub fn angles(&self, sub: SubStep, x: f64, t: f64, dt: f64) -> CoinAngles {
        let mut a = CoinAngles::default();
        for q in 0..4 {
            a.theta[q] = self.angle(sub, q, x, t, dt);
        }
        a
    }

    pub fn coin(&self, sub: SubStep, x: f64, t: f64, dt: f64) -> Mat2 {
        u2_from_angles(&self.angles(sub, x, t, dt))
    }

    /// True when only theta^0 and theta^1 components are present.
    pub fn in_theta01_family(&self) -> bool {
        (0..2).all(|j| (2..4).all(|q| self.base[j][q].is_zero() && self.rate[j][q].is_zero()))
    }
}

/// A coin that acts with its own 2x2 block at every site.
#[derive(Clone, Debug)]
pub struct PositionDiagonalCoin {
    pub blocks: Vec<Mat2>,
}

impl PositionDiagonalCoin {
    pub fn apply(&self, state: &mut WalkState) -> Result<()> {
        if state.coin_dim() != 2 || state.sites() != self.blocks.len() {
            return Err(Error::DimensionMismatch("coin field does not match the state".into()));
        }
        let n = state.sites();
        let amps = state.amplitudes_mut();
        for (x, b) in self.blocks.iter().enumerate() {
            let (u, d) = (amps[x], amps[n + x]);
            amps[x] = b[(0, 0)] * u + b[(0, 1)] * d;
            amps[n + x] = b[(1, 0)] * u + b[(1, 1)] * d;
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }
}

/// The coin of sub-step `sub` at physical time t, evaluated on every site.
pub fn coin_field(schedule: &CoinSchedule, sub: SubStep, t: f64, dt: f64, lattice: &Lattice) -> PositionDiagonalCoin {
    let blocks = (0..lattice.sites()).map(|s| schedule.coin(sub, lattice.position(s), t, dt)).collect();
    PositionDiagonalCoin { blocks }
}

/// Applies one 2x2 coin uniformly (coin_dim must be 2).
pub fn apply_uniform_coin(state: &mut WalkState, coin: &Mat2) -> Result<()> {
    if state.coin_dim() != 2 {
        return Err(Error::DimensionMismatch(format!("expected coin dimension 2, got {}", state.coin_dim())));
    }
    let n = state.sites();
    let (up, down) = state.amplitudes_mut().split_at_mut(n);
    for (u, d) in up.iter_mut().zip(down.iter_mut()) {
        let (a, b) = (*u, *d);
        *u = coin[(0, 0)] * a + coin[(0, 1)] * b;
        *d = coin[(1, 0)] * a + coin[(1, 1)] * b;
    }
    Ok(())
}

/// Applies a d x d coin uniformly on a d-dimensional coin space.
pub fn apply_dense_coin(state: &mut WalkState, coin: &DMatrix<C64>) -> Result<()> {
    let d = state.coin_dim();
    if coin.nrows() != d || coin.ncols() != d {
        return Err(Error::DimensionMismatch(format!("coin is {}x{}, state coin dimension {d}", coin.nrows(), coin.ncols())));
    }
    let n = state.sites();
    let amps = state.amplitudes_mut();
    let mut buf = vec![ZERO; d];
    for x in 0..n {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = (0..d).map(|j| coin[(i, j)] * amps[j * n + x]).sum();
        }
        for (i, b) in buf.iter().enumerate() {
            amps[i * n + x] = *b;
        }
    }
    Ok(())
}

/// Block-diagonal direct sum of 2x2 unitaries in the sector-ordered basis.
pub fn block_direct_sum(blocks: &[Mat2]) -> Result<DMatrix<C64>> {
    let m = blocks.len();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for (j, b) in blocks.iter().enumerate() {
        let dev = (b.adjoint() * b - Mat2::identity()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if dev > 1e-12 {
            return Err(Error::NonUnitary { deviation: dev });
        }
        for r in 0..2 {
            for col in 0..2 {
                out[(2 * j + r, 2 * j + col)] = b[(r, col)];
            }
        }
    }
    Ok(out)
}

/// Generators Lambda_0 = I, Lambda_1.. for a U(N) gauge rotation, with
/// coefficient fields omega (spin up) and Omega (spin down) per sub-step.
#[derive(Clone, Debug)]
pub struct NonabelianCoinSpec {
    n: usize,
    generators: Vec<DMatrix<C64>>,
    omega: [Vec<Field>; 2],
    big_omega: [Vec<Field>; 2],
}

impl NonabelianCoinSpec {
    pub fn new(generators: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidParameter("no generators supplied".into()))?;
        let n = first.nrows();
        if *first != DMatrix::identity(n, n) {
            return Err(Error::InvalidParameter("Lambda_0 must be the identity".into()));
        }
        for g in &generators {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::DimensionMismatch("generators must all be N x N".into()));
            }
            let dev = hermiticity_deviation(g);
            if dev > 1e-12 {
                return Err(Error::InvalidParameter(format!("generator not Hermitian (deviation {dev:e})")));
            }
        }
        let count = generators.len();
        Ok(Self {
            n,
            generators,
            omega: [vec![Field::Zero; count], vec![Field::Zero; count]],
            big_omega: [vec![Field::Zero; count], vec![Field::Zero; count]],
        })
    }

    /// Identity plus Pauli (N = 2) or Gell-Mann (N = 3) matrices; N = 1 gives just the identity.
    pub fn with_default_generators(n: usize) -> Result<Self> {
        Self::new(default_generators(n)?)
    }

    pub fn gauge_dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[DMatrix<C64>] {
        &self.generators
    }

    pub fn set_omega(&mut self, sub: SubStep, q: usize, f: Field) {
        self.omega[sub.idx()][q] = f;
    }

    pub fn set_big_omega(&mut self, sub: SubStep, q: usize, f: Field) {
        self.big_omega[sub.idx()][q] = f;
    }

    pub fn omega(&self, sub: SubStep, q: usize, x: f64, t: f64) -> f64 {
        self.omega[sub.idx()][q].eval(x, t)
    }

    pub fn big_omega(&self, sub: SubStep, q: usize, x: f64, t: f64) -> f64 {
        self.big_omega[sub.idx()][q].eval(x, t)
    }

    fn combination(&self, fields: &[Field], x: f64, t: f64) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (g, f) in self.generators.iter().zip(fields) {
            let w = f.eval(x, t);
            if w != 0.0 {
                m += g * c(w, 0.0);
            }
        }
        m
    }
}

pub fn default_generators(n: usize) -> Result<Vec<DMatrix<C64>>> {
    let z = ZERO;
    let o = ONE;
    match n {
        1 => Ok(vec![DMatrix::identity(1, 1)]),
        2 => Ok((0..4).map(|r| crate::linalg::to_dmatrix(&crate::linalg::pauli(r))).collect()),
        3 => {
            let s3 = 1.0 / 3f64.sqrt();
            let mats: [[C64; 9]; 8] = [
                [z, o, z, o, z, z, z, z, z],
                [z, -I, z, I, z, z, z, z, z],
                [o, z, z, z, -o, z, z, z, z],
                [z, z, o, z, z, z, o, z, z],
                [z, z, -I, z, z, z, I, z, z],
                [z, z, z, z, z, o, z, o, z],
                [z, z, z, z, z, -I, z, I, z],
                [c(s3, 0.0), z, z, z, c(s3, 0.0), z, z, z, c(-2.0 * s3, 0.0)],
            ];
            let mut out = vec![DMatrix::identity(3, 3)];
            out.extend(mats.iter().map(|m| DMatrix::from_row_slice(3, 3, m)));
            Ok(out)
        }
        _ => Err(Error::InvalidParameter(format!("no default generator set for N = {n}; supply generators explicitly"))),
    }
}

/// [u2(theta(x,t,dt)) (x) I_N] . [|up><up| (x) e^{-i dt omega.Lambda} + |down><down| (x) e^{-i dt Omega.Lambda}]
pub fn nonabelian_coin(
    schedule: &CoinSchedule,
    spec: &NonabelianCoinSpec,
    sub: SubStep,
    x: f64,
    t: f64,
    dt: f64,
) -> DMatrix<C64> {
    let n = spec.n;
    let u2 = schedule.coin(sub, x, t, dt);
    let j = sub.idx();
    let gate_up = expm_hermitian(&spec.combination(&spec.omega[j], x, t), dt);
    let gate_down = expm_hermitian(&spec.combination(&spec.big_omega[j], x, t), dt);
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..2 {
        for (col, gate) in [(0usize, &gate_up), (1usize, &gate_down)] {
            let u = u2[(r, col)];
            for a in 0..n {
                for b in 0..n {
                    out[(r * n + a, col * n + b)] = u * gate[(a, b)];
                }
            }
        }
    }
    out
}

/// Checks ||U^dagger U - I||_max against `tol`.
pub fn check_unitary(u: &DMatrix<C64>, tol: f64) -> Result<()> {
    let dev = unitarity_deviation(u);
    if dev > tol {
        Err(Error::NonUnitary { deviation: dev })
    } else {
        Ok(())
    }
}
