use crate::channel::ChannelRealization;
use crate::numerics::{dot, leading_singular_pair};
use crate::Complex64;

use super::PhaseError;

/// One user's designed phase block.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedBlock {
    pub phases: Vec<Complex64>,
    /// The common rotation had a zero numerator and was set to 1.
    pub degenerate: bool,
}

fn unit_phase(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, z.arg())
    }
}

fn rotation(z: Complex64) -> (Complex64, bool) {
    let r = z.norm();
    if r == 0.0 || !r.is_finite() {
        (Complex64::new(1.0, 0.0), true)
    } else {
        (z / r, false)
    }
}

/// Subsurface design for user `k` from the LoS steering vectors.
///
/// `φ_i = ν e^{j∠a_r,i} e^{−j∠h_ru,i}` with `ν = a_b†h_d / |a_b†h_d|`, which
/// co-phases every reflected path with the direct path.
pub fn sd_phases(real: &ChannelRealization, k: usize) -> Result<DesignedBlock, PhaseError> {
    check_user(real, k)?;
    let h = real.h_ru_block(k, k);
    let a_r = real.a_r_block(k);
    let (nu, degenerate) = rotation(dot(&real.a_b, &real.users[k].h_d));
    let phases = a_r
        .iter()
        .zip(&h)
        .map(|(a, x)| nu * unit_phase(*a) * unit_phase(*x).conj())
        .collect();
    Ok(DesignedBlock { phases, degenerate })
}

/// Extended subsurface design for user `k`, using the leading right
/// singular vector `v` of the user's own BS-RIS block in place of `a_r`.
///
/// `φ_i = ω e^{j∠v_i} e^{−j∠h_ru,i}` with
/// `ω = |h|ᵀ diag(e^{−j∠v}) H† h_d / |·|`.
pub fn esd_phases(real: &ChannelRealization, k: usize) -> Result<DesignedBlock, PhaseError> {
    check_user(real, k)?;
    let hb = real.h_br_block(k, k);
    let h = real.h_ru_block(k, k);
    let v = leading_singular_pair(&hb)?.v;
    let proj = hb.adjoint_mul_vec(&real.users[k].h_d);
    let num = v
        .iter()
        .zip(&h)
        .zip(&proj)
        .fold(Complex64::new(0.0, 0.0), |acc, ((vi, hi), p)| acc + unit_phase(*vi).conj() * hi.norm() * p);
    let (omega, degenerate) = rotation(num);
    let phases = v
        .iter()
        .zip(&h)
        .map(|(vi, x)| omega * unit_phase(*vi) * unit_phase(*x).conj())
        .collect();
    Ok(DesignedBlock { phases, degenerate })
}

fn check_user(real: &ChannelRealization, k: usize) -> Result<(), PhaseError> {
    if k >= real.user_count() {
        return Err(PhaseError::NoSuchUser {
            user: k,
            users: real.user_count(),
        });
    }
    Ok(())
}
