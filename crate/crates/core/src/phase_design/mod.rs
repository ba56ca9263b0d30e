//! Block-diagonal RIS phase selection: SD, ESD, random and a numeric
//! optimiser benchmark.

mod closed_form;
mod optimizer;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::channel::{ChannelRealization, ElementLayout};
use crate::numerics::{norm_sqr, uniform_phase, NumericsError};
use crate::Complex64;

pub use closed_form::{esd_phases, sd_phases, DesignedBlock};
pub use optimizer::{numeric_optimizer, OptimizerOutcome, OptimizerSettings};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhaseError {
    #[error("unknown phase method {0:?} (expected sd, esd, random or opt)")]
    UnknownMethod(String),
    #[error("user {user} out of range for {users} users")]
    NoSuchUser { user: usize, users: usize },
    #[error("phase block {user} has {got} entries, expected {expected}")]
    BlockSize { user: usize, expected: usize, got: usize },
    #[error("phase entry {index} of block {user} has modulus {modulus}")]
    NotUnitModulus { user: usize, index: usize, modulus: f64 },
    #[error("invalid optimizer settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseMethod {
    Sd,
    Esd,
    Random,
    Opt,
}

impl PhaseMethod {
    pub const ALL: [PhaseMethod; 4] = [PhaseMethod::Sd, PhaseMethod::Esd, PhaseMethod::Random, PhaseMethod::Opt];

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseMethod::Sd => "sd",
            PhaseMethod::Esd => "esd",
            PhaseMethod::Random => "random",
            PhaseMethod::Opt => "opt",
        }
    }
}

impl fmt::Display for PhaseMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseMethod {
    type Err = PhaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PhaseMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| PhaseError::UnknownMethod(s.to_string()))
    }
}

/// Φ = diag{Φ_1 … Φ_K}, stored per user block with the element layout that
/// maps blocks onto the RIS grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    blocks: Vec<Vec<Complex64>>,
    layout: Arc<ElementLayout>,
}

impl PhaseMatrix {
    /// Unit-modulus tolerance on entries.
    pub const MODULUS_TOL: f64 = 1e-12;

    pub fn new(blocks: Vec<Vec<Complex64>>, layout: Arc<ElementLayout>) -> Result<Self, PhaseError> {
        if blocks.len() != layout.users() {
            return Err(PhaseError::NoSuchUser {
                user: blocks.len(),
                users: layout.users(),
            });
        }
        for (user, block) in blocks.iter().enumerate() {
            let expected = layout.block(user).len();
            if block.len() != expected {
                return Err(PhaseError::BlockSize {
                    user,
                    expected,
                    got: block.len(),
                });
            }
            if let Some((index, z)) = block
                .iter()
                .enumerate()
                .find(|(_, z)| !((z.norm() - 1.0).abs() <= Self::MODULUS_TOL))
            {
                return Err(PhaseError::NotUnitModulus {
                    user,
                    index,
                    modulus: z.norm(),
                });
            }
        }
        Ok(Self { blocks, layout })
    }

    pub fn users(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, user: usize) -> &[Complex64] {
        &self.blocks[user]
    }

    pub fn layout(&self) -> &ElementLayout {
        &self.layout
    }

    /// Diagonal of Φ in RIS element order.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.layout.scatter(&self.blocks)
    }
}

/// I.i.d. uniform phases for one block.
pub fn random_block<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| uniform_phase(rng)).collect()
}

/// I.i.d. uniform phases on every block of `layout`.
pub fn random_phases<R: Rng + ?Sized>(layout: Arc<ElementLayout>, rng: &mut R) -> PhaseMatrix {
    let blocks = layout.sizes().into_iter().map(|n| random_block(n, rng)).collect();
    PhaseMatrix { blocks, layout }
}

/// `‖h_d,k + H_br,k,k Φ_k h_ru,k,k‖²` for a candidate block of user `k`.
pub fn block_objective(real: &ChannelRealization, k: usize, phases: &[Complex64]) -> f64 {
    let h = real.h_ru_block(k, k);
    let x: Vec<Complex64> = phases.iter().zip(&h).map(|(p, z)| p * z).collect();
    let mut y = real.h_br_block(k, k).mul_vec(&x);
    for (a, b) in y.iter_mut().zip(&real.users[k].h_d) {
        *a += b;
    }
    norm_sqr(&y)
}

/// Phase matrix with every user's block chosen by `method`.
///
/// Returns the matrix and whether any block hit a degenerate rotation or an
/// unconverged optimiser start.
pub fn design<R: Rng + ?Sized>(
    real: &ChannelRealization,
    method: PhaseMethod,
    settings: &OptimizerSettings,
    rng: &mut R,
) -> Result<(PhaseMatrix, bool), PhaseError> {
    if method == PhaseMethod::Random {
        return Ok((random_phases(Arc::clone(&real.layout), rng), false));
    }
    let mut flagged = false;
    let mut blocks = Vec::with_capacity(real.user_count());
    for k in 0..real.user_count() {
        let block = match method {
            PhaseMethod::Sd => {
                let d = sd_phases(real, k)?;
                flagged |= d.degenerate;
                d.phases
            }
            PhaseMethod::Esd => {
                let d = esd_phases(real, k)?;
                flagged |= d.degenerate;
                d.phases
            }
            PhaseMethod::Opt => {
                let o = numeric_optimizer(real, k, settings, rng)?;
                flagged |= !o.converged;
                o.phases
            }
            PhaseMethod::Random => unreachable!(),
        };
        blocks.push(block);
    }
    Ok((
        PhaseMatrix {
            blocks,
            layout: Arc::clone(&real.layout),
        },
        flagged,
    ))
}
