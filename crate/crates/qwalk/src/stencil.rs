//! Local stencil algebra for products of coins and shifts.
//!
//! An operator O acts on a smooth field as (O psi)(x) = sum_k B_k(x) psi(x + k a).
//! Composing factors symbolically at one point gives the blocks B_k of the
//! whole step, from which the small-dt effective Hamiltonian is read off.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::linalg::{C64, I};

pub type Terms<const D: usize> = Vec<([i32; D], DMatrix<C64>)>;

/// A position-dependent local operator.
pub type LocalOp<'a, const D: usize> = Box<dyn Fn([f64; D]) -> Terms<D> + 'a>;

/// Blocks of ops[0] * ops[1] * ... * ops[m-1] at position x with lattice spacing a.
pub fn compose_at<const D: usize>(ops: &[LocalOp<'_, D>], x: [f64; D], a: f64) -> BTreeMap<[i32; D], DMatrix<C64>> {
    let mut out = BTreeMap::new();
    let dim = ops[0](x)[0].1.nrows();
    accumulate(ops, x, a, [0; D], DMatrix::identity(dim, dim), &mut out);
    out
}

fn accumulate<const D: usize>(
    ops: &[LocalOp<'_, D>],
    x: [f64; D],
    a: f64,
    offset: [i32; D],
    prefix: DMatrix<C64>,
    out: &mut BTreeMap<[i32; D], DMatrix<C64>>,
) {
    let Some((head, rest)) = ops.split_first() else {
        out.entry(offset).and_modify(|m| *m += &prefix).or_insert(prefix);
        return;
    };
    let mut pos = x;
    for i in 0..D {
        pos[i] = x[i] + offset[i] as f64 * a;
    }
    for (k, b) in head(pos) {
        let mut next = offset;
        for i in 0..D {
            next[i] += k[i];
        }
        accumulate(rest, x, a, next, &prefix * b, out);
    }
}

/// First-order pieces of a stencil: momentum matrices M_p[i] = -(a/dt) sum_k k_i B_k
/// and the local part M_0 = (i/dt)(sum_k B_k - I).
pub struct Expansion<const D: usize> {
    pub momentum: [DMatrix<C64>; D],
    pub local: DMatrix<C64>,
}

pub fn expand<const D: usize>(blocks: &BTreeMap<[i32; D], DMatrix<C64>>, a: f64, dt: f64) -> Expansion<D> {
    let dim = blocks.values().next().map(|m| m.nrows()).unwrap_or(0);
    let zero = DMatrix::zeros(dim, dim);
    let mut momentum: [DMatrix<C64>; D] = std::array::from_fn(|_| zero.clone());
    let mut sum = zero.clone();
    for (k, b) in blocks {
        sum += b;
        for i in 0..D {
            if k[i] != 0 {
                momentum[i] -= b * C64::from(k[i] as f64 * a / dt);
            }
        }
    }
    let local = (sum - DMatrix::identity(dim, dim)) * (I / dt);
    Expansion { momentum, local }
}

/// Richardson combination 2 f(d/2) - f(d) applied entrywise.
pub fn richardson(coarse: &DMatrix<C64>, fine: &DMatrix<C64>) -> DMatrix<C64> {
    fine * C64::from(2.0) - coarse
}
