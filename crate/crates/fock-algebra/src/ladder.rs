use std::sync::Arc;

use crate::{Basis, FockError, ModeSpec, Result, SparseOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create,
    Annihilate,
    Number,
}

/// Sign from the fermion modes preceding `mode` (ordered-product convention).
fn jw_sign(modes: &[ModeSpec], state: &[u8], mode: usize) -> f64 {
    let occupied = modes[..mode]
        .iter()
        .zip(state)
        .filter(|(m, &n)| m.is_fermion() && n == 1)
        .count();
    if occupied % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies one ladder operator in place; returns the amplitude or `None` for zero.
pub fn apply_ladder(modes: &[ModeSpec], state: &mut [u8], mode: usize, kind: Ladder) -> Option<f64> {
    let spec = &modes[mode];
    let n = state[mode];
    match kind {
        Ladder::Number => (n > 0).then_some(n as f64),
        Ladder::Create => {
            if n >= spec.cap {
                return None;
            }
            let amp = if spec.is_fermion() {
                jw_sign(modes, state, mode)
            } else {
                ((n + 1) as f64).sqrt()
            };
            state[mode] = n + 1;
            Some(amp)
        }
        Ladder::Annihilate => {
            if n == 0 {
                return None;
            }
            let amp = if spec.is_fermion() {
                jw_sign(modes, state, mode)
            } else {
                (n as f64).sqrt()
            };
            state[mode] = n - 1;
            Some(amp)
        }
    }
}

/// Applies a product of ladder operators, rightmost factor first.
pub fn apply_string(modes: &[ModeSpec], state: &mut [u8], factors: &[(usize, Ladder)]) -> Option<f64> {
    let mut amp = 1.0;
    for &(mode, kind) in factors.iter().rev() {
        amp *= apply_ladder(modes, state, mode, kind)?;
    }
    Some(amp)
}

/// Creation, annihilation or number operator for one mode.
pub fn ladder(basis: &Arc<Basis>, mode: usize, kind: Ladder) -> Result<SparseOperator> {
    if mode >= basis.n_modes() {
        return Err(FockError::UnknownMode(mode));
    }
    let modes = basis.modes().to_vec();
    Ok(SparseOperator::from_action(basis, move |s, out| {
        let mut t = s.to_vec();
        if let Some(a) = apply_ladder(&modes, &mut t, mode, kind) {
            out.push((t, C64::new(a, 0.0)));
        }
    }))
}
