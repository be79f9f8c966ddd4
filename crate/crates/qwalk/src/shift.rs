//! Coin-conditioned translations, applied as cyclic rotations of coin slices.

use crate::error::{Error, Result};
use crate::state::{Lattice, TwoParticleState, WalkState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftKind {
    /// up -> x+a, down -> x-a
    Full,
    /// up -> x+a, down stays
    HalfPlus,
    /// up stays, down -> x-a
    HalfMinus,
    /// six-dimensional coin: zeta_1, zeta_3, zeta_5 move like up under S+
    SectoredPlus,
    SectoredMinus,
    /// S+ (x) S+ on two walkers with two-dimensional coins each
    TwoParticlePlus,
    TwoParticleMinus,
}

/// A shift bound to a coin dimension and lattice size.
#[derive(Clone, Debug)]
pub struct Shift {
    kind: ShiftKind,
    coin_dim: usize,
    sites: usize,
}

pub fn shift(kind: ShiftKind, coin_dim: usize, lattice: &Lattice) -> Result<Shift> {
    let ok = match kind {
        // a 2N coin (spin (x) gauge) shifts by spin only
        ShiftKind::Full | ShiftKind::HalfPlus | ShiftKind::HalfMinus => coin_dim >= 2 && coin_dim % 2 == 0,
        ShiftKind::SectoredPlus | ShiftKind::SectoredMinus => coin_dim == 6,
        ShiftKind::TwoParticlePlus | ShiftKind::TwoParticleMinus => coin_dim == 4,
    };
    if !ok {
        return Err(Error::DimensionMismatch(format!("{kind:?} shift cannot act on coin dimension {coin_dim}")));
    }
    Ok(Shift { kind, coin_dim, sites: lattice.sites() })
}

/// Displacement (in sites) of a spin component for the single-walker shifts.
fn spin_move(kind: ShiftKind, up: bool) -> i64 {
    match (kind, up) {
        (ShiftKind::Full, true) => 1,
        (ShiftKind::Full, false) => -1,
        (ShiftKind::HalfPlus | ShiftKind::SectoredPlus | ShiftKind::TwoParticlePlus, true) => 1,
        (ShiftKind::HalfPlus | ShiftKind::SectoredPlus | ShiftKind::TwoParticlePlus, false) => 0,
        (ShiftKind::HalfMinus | ShiftKind::SectoredMinus | ShiftKind::TwoParticleMinus, true) => 0,
        (ShiftKind::HalfMinus | ShiftKind::SectoredMinus | ShiftKind::TwoParticleMinus, false) => -1,
    }
}

fn rotate(slice: &mut [crate::linalg::C64], by: i64) {
    let n = slice.len();
    match by.signum() {
        1 => slice.rotate_right(by as usize % n),
        -1 => slice.rotate_left((-by) as usize % n),
        _ => {}
    }
}

impl Shift {
    pub fn kind(&self) -> ShiftKind {
        self.kind
    }

    /// Displacement in sites of coin component `c`.
    pub fn displacement(&self, c: usize) -> i64 {
        match self.kind {
            ShiftKind::SectoredPlus | ShiftKind::SectoredMinus => spin_move(self.kind, c % 2 == 0),
            _ => spin_move(self.kind, c < self.coin_dim / 2),
        }
    }

    fn check(&self, coin_dim: usize, sites: usize) -> Result<()> {
        if coin_dim != self.coin_dim || sites != self.sites {
            return Err(Error::DimensionMismatch(format!(
                "shift built for coin {} on {} sites, state has coin {} on {} sites",
                self.coin_dim, self.sites, coin_dim, sites
            )));
        }
        Ok(())
    }

    fn apply_signed(&self, state: &mut WalkState, sign: i64) -> Result<()> {
        self.check(state.coin_dim(), state.sites())?;
        if matches!(self.kind, ShiftKind::TwoParticlePlus | ShiftKind::TwoParticleMinus) {
            return Err(Error::DimensionMismatch("two-particle shift needs a two-particle state".into()));
        }
        let n = state.sites();
        for (c, chunk) in state.amplitudes_mut().chunks_mut(n).enumerate() {
            rotate(chunk, sign * self.displacement(c));
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut WalkState) -> Result<()> {
        self.apply_signed(state, 1)
    }

    pub fn apply_inverse(&self, state: &mut WalkState) -> Result<()> {
        self.apply_signed(state, -1)
    }

    fn apply_two_signed(&self, state: &mut TwoParticleState, sign: i64) -> Result<()> {
        let (d1, d2) = state.coin_dims();
        if (d1, d2) != (2, 2) || !matches!(self.kind, ShiftKind::TwoParticlePlus | ShiftKind::TwoParticleMinus) {
            return Err(Error::DimensionMismatch("two-particle shift needs 2x2 coins and a two-particle kind".into()));
        }
        let n = state.lattice().sites();
        if n != self.sites {
            return Err(Error::DimensionMismatch("lattice size differs from the shift".into()));
        }
        for (c, block) in state.amplitudes_mut().chunks_mut(n * n).enumerate() {
            let (c1, c2) = (c / 2, c % 2);
            let m1 = sign * spin_move(self.kind, c1 == 0);
            let m2 = sign * spin_move(self.kind, c2 == 0);
            // particle 1 indexes rows, particle 2 columns
            match m1.signum() {
                1 => block.rotate_right(n),
                -1 => block.rotate_left(n),
                _ => {}
            }
            if m2 != 0 {
                for row in block.chunks_mut(n) {
                    rotate(row, m2);
                }
            }
        }
        Ok(())
    }

    pub fn apply_two(&self, state: &mut TwoParticleState) -> Result<()> {
        self.apply_two_signed(state, 1)
    }

    pub fn apply_two_inverse(&self, state: &mut TwoParticleState) -> Result<()> {
        self.apply_two_signed(state, -1)
    }
}
