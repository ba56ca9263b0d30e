//! Closed-form mean SNR for the LoS BS-RIS link, the Jensen rate bound,
//! complexity counts and Jain's fairness index.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use crate::channel::{make_layout, ChannelError, ChannelModelParams, SystemConfig, CORRELATION_CLIP_TOL};
use crate::numerics::{gauss_2f1, norm, psd_sqrt, NumericsError};
use crate::{CMatrix, Complex64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("closed-form mean SNR needs a pure LoS BS-RIS link (kappa = inf), got kappa = {0}")]
    NotLoS(f64),
    #[error("user {user} out of range for {users} users")]
    NoSuchUser { user: usize, users: usize },
    #[error("unknown complexity method {0:?} (expected sd or tmse)")]
    UnknownMethod(String),
    #[error("fairness index needs at least one positive value")]
    AllZero,
    #[error("fairness values must be finite and nonnegative, got {0}")]
    NegativeValue(f64),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Expected values of the four non-vanishing terms of `‖h_d + f + g‖²`,
/// before the `E_s/σ²` scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrBreakdown {
    /// E[h_d†h_d].
    pub direct: f64,
    /// 2·E[Re(h_d†f)].
    pub cross: f64,
    /// E[f†f].
    pub designed: f64,
    /// E[g†g].
    pub uncontrolled: f64,
}

impl SnrBreakdown {
    pub fn total(&self) -> f64 {
        self.direct + self.cross + self.designed + self.uncontrolled
    }

    /// Mean SNR at the given symbol energy and noise variance.
    pub fn snr(&self, symbol_energy: f64, noise_variance: f64) -> f64 {
        self.total() * symbol_energy / noise_variance
    }
}

/// `β_d M`.
pub fn direct_term(beta_d: f64, m: usize) -> f64 {
    beta_d * m as f64
}

/// Un-doubled `E[h_d†f]` under SD phases:
/// `N_k (π/4) √(β_d β_br β_ru) ‖R_d^{1/2} a_b‖`.
///
/// `sqrt_r_d` must be the square root used for sampling.
pub fn cross_term(beta_d: f64, beta_br: f64, beta_ru: f64, sqrt_r_d: &CMatrix, a_b: &[Complex64], n_k: usize) -> f64 {
    let proj = sqrt_r_d.adjoint_mul_vec(a_b);
    n_k as f64 * FRAC_PI_4 * (beta_d * beta_br * beta_ru).sqrt() * norm(&proj)
}

fn check_square(r: &CMatrix) -> Result<(), AnalysisError> {
    if r.is_square() {
        Ok(())
    } else {
        Err(AnalysisError::NotSquare {
            rows: r.rows(),
            cols: r.cols(),
        })
    }
}

/// `M β_br β_ru (N_k + F)`, with
/// `F = (π/4) Σ_{i≠j} ₂F₁(−½, −½; 1; |ρ_ij|²)` over the user's own
/// diagonal block of `R_ru`.
pub fn designed_term(beta_br: f64, beta_ru: f64, own_block: &CMatrix, m: usize) -> Result<f64, AnalysisError> {
    check_square(own_block)?;
    let n = own_block.rows();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let z = own_block[(i, j)].norm_sqr().min(1.0);
                f += gauss_2f1(-0.5, -0.5, 1.0, z)?;
            }
        }
    }
    Ok(m as f64 * beta_br * beta_ru * (n as f64 + FRAC_PI_4 * f))
}

/// `M β_br β_ru Σ_{s≠k} Σ_{m,n} (π/4) |r_mn|² ₂F₁(½, ½; 2; |r_mn|²)`, where
/// each `r` is the diagonal block of `R_ru` on another user's subsurface.
/// Diagonal entries contribute exactly 1 each.
pub fn g_term(beta_br: f64, beta_ru: f64, other_blocks: &[CMatrix], m: usize) -> Result<f64, AnalysisError> {
    let mut sum = 0.0;
    for block in other_blocks {
        check_square(block)?;
        for z in block.as_slice() {
            let r2 = z.norm_sqr().min(1.0);
            if r2 > 0.0 {
                sum += FRAC_PI_4 * r2 * gauss_2f1(0.5, 0.5, 2.0, r2)?;
            }
        }
    }
    Ok(m as f64 * beta_br * beta_ru * sum)
}

/// Analytic mean-SNR breakdown of user `k` under SD phases on every
/// subsurface, for a pure LoS BS-RIS link.
pub fn mean_snr_closed_form(
    cfg: &SystemConfig,
    params: &ChannelModelParams,
    k: usize,
) -> Result<SnrBreakdown, AnalysisError> {
    if !params.is_los() {
        return Err(AnalysisError::NotLoS(params.rician_factor));
    }
    if k >= cfg.users() || k >= params.users.len() {
        return Err(AnalysisError::NoSuchUser {
            user: k,
            users: cfg.users(),
        });
    }
    let layout = make_layout(cfg)?;
    let (a_b, _) = crate::channel::steering_vectors(cfg);
    let g = params.users[k];
    let m = cfg.m();
    let sqrt_r_d = psd_sqrt(&params.r_d, CORRELATION_CLIP_TOL)?;
    let diag_block = |t: usize| params.r_ru.select(layout.block(t), layout.block(t));
    let others: Vec<CMatrix> = (0..cfg.users()).filter(|&t| t != k).map(diag_block).collect();
    Ok(SnrBreakdown {
        direct: direct_term(g.beta_d, m),
        cross: 2.0 * cross_term(g.beta_d, g.beta_br_los, g.beta_ru, &sqrt_r_d, &a_b, cfg.subsurface_sizes[k]),
        designed: designed_term(g.beta_br_los, g.beta_ru, &diag_block(k), m)?,
        uncontrolled: g_term(g.beta_br_los, g.beta_ru, &others, m)?,
    })
}

/// Jensen bound `log₂(1 + E[SNR])` on the ergodic rate, bits/s/Hz.
pub fn rate_upper_bound(mean_snr: f64) -> f64 {
    (1.0 + mean_snr).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityMethod {
    Sd,
    Tmse,
}

impl FromStr for ComplexityMethod {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sd" => Ok(ComplexityMethod::Sd),
            "tmse" => Ok(ComplexityMethod::Tmse),
            other => Err(AnalysisError::UnknownMethod(other.to_string())),
        }
    }
}

impl fmt::Display for ComplexityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplexityMethod::Sd => "sd",
            ComplexityMethod::Tmse => "tmse",
        })
    }
}

/// Complex multiplications per phase update.
///
/// SD: `2N + MK`. TMSE: `N(K+K²) + M(K+K²) + K(3+3K+2K²)`.
pub fn complexity_count(method: ComplexityMethod, n: u64, m: u64, k: u64) -> u64 {
    match method {
        ComplexityMethod::Sd => 2 * n + m * k,
        ComplexityMethod::Tmse => {
            let kk = k + k * k;
            n * kk + m * kk + k * (3 + 3 * k + 2 * k * k)
        }
    }
}

/// Jain's index `(Σx)² / (K Σx²)`.
pub fn jain_fairness(values: &[f64]) -> Result<f64, AnalysisError> {
    if let Some(&v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(AnalysisError::NegativeValue(v));
    }
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    if sum == 0.0 {
        return Err(AnalysisError::AllZero);
    }
    Ok(sum * sum / (values.len() as f64 * sq))
}
