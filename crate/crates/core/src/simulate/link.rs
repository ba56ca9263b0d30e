use crate::analysis::mean_snr_closed_form;
use crate::channel::{ChannelModelParams, ChannelRealization, SystemConfig};
use crate::numerics::{cholesky_solve, dot, norm_sqr, ComplexMatrix};
use crate::phase_design::PhaseMatrix;
use crate::Complex64;

use super::SimError;

/// User `k`'s composite channel split into direct, designed and
/// uncontrolled parts: `h_d`, `f = H_k,k Φ_k h_k,k`, `g = Σ_{t≠k} H_k,t Φ_t h_k,t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkComponents {
    pub h_d: Vec<Complex64>,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

impl LinkComponents {
    pub fn composite(&self) -> Vec<Complex64> {
        self.h_d
            .iter()
            .zip(&self.f)
            .zip(&self.g)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }

    /// `[‖h_d‖², 2Re(h_d†f), ‖f‖², ‖g‖²]`.
    pub fn terms(&self) -> [f64; 4] {
        [
            norm_sqr(&self.h_d),
            2.0 * dot(&self.h_d, &self.f).re,
            norm_sqr(&self.f),
            norm_sqr(&self.g),
        ]
    }
}

fn check_dims(real: &ChannelRealization, phases: &PhaseMatrix, k: usize) -> Result<(), SimError> {
    if k >= real.user_count() {
        return Err(SimError::DimensionMismatch {
            what: "user index",
            expected: real.user_count(),
            got: k,
        });
    }
    let n = real.users[k].h_ru.len();
    if phases.layout().elements() != n {
        return Err(SimError::DimensionMismatch {
            what: "phase diagonal",
            expected: n,
            got: phases.layout().elements(),
        });
    }
    let user = &real.users[k];
    if user.h_br.cols() != n || user.h_br.rows() != user.h_d.len() {
        return Err(SimError::DimensionMismatch {
            what: "BS-RIS channel",
            expected: user.h_d.len() * n,
            got: user.h_br.rows() * user.h_br.cols(),
        });
    }
    Ok(())
}

pub fn link_components(real: &ChannelRealization, phases: &PhaseMatrix, k: usize) -> Result<LinkComponents, SimError> {
    check_dims(real, phases, k)?;
    let user = &real.users[k];
    let m = user.h_d.len();
    let diag = phases.diagonal();
    let layout = phases.layout();
    let mut f = vec![Complex64::new(0.0, 0.0); m];
    let mut g = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        let row = user.h_br.row(i);
        for (j, (&h, &p)) in user.h_ru.iter().zip(&diag).enumerate() {
            let v = row[j] * p * h;
            if layout.owner(j) == k {
                f[i] += v;
            } else {
                g[i] += v;
            }
        }
    }
    Ok(LinkComponents {
        h_d: user.h_d.clone(),
        f,
        g,
    })
}

/// `(E_s/σ²) ‖h_d,k + f_k + g_k‖²`, user `k` alone in its band with MF.
pub fn snr_of(
    real: &ChannelRealization,
    phases: &PhaseMatrix,
    k: usize,
    symbol_energy: f64,
    noise_variance: f64,
) -> Result<f64, SimError> {
    let c = link_components(real, phases, k)?;
    Ok(symbol_energy / noise_variance * norm_sqr(&c.composite()))
}

/// MMSE output SINR of every user when all share one band:
/// `E_s h_k† (E_s Σ_{j≠k} h_j h_j† + σ² I)⁻¹ h_k`.
pub fn mmse_sinr(channels: &[Vec<Complex64>], symbol_energy: f64, noise_variance: f64) -> Result<Vec<f64>, SimError> {
    let Some(m) = channels.first().map(Vec::len) else {
        return Ok(Vec::new());
    };
    if let Some(bad) = channels.iter().find(|h| h.len() != m) {
        return Err(SimError::DimensionMismatch {
            what: "shared-band channel",
            expected: m,
            got: bad.len(),
        });
    }
    let mut all = ComplexMatrix::identity(m).scale(noise_variance);
    for h in channels {
        all = all.add(&ComplexMatrix::outer(h, h).scale(symbol_energy));
    }
    channels
        .iter()
        .map(|h| {
            let a = all.sub(&ComplexMatrix::outer(h, h).scale(symbol_energy));
            let x = cholesky_solve(&a, h)?;
            Ok(symbol_energy * dot(h, &x).re.max(0.0))
        })
        .collect()
}

/// Single-user, pure-LoS reference of a system: one subsurface spanning the
/// whole RIS, user 0's gains and correlations, κ = ∞.
pub fn single_user_reference(cfg: &SystemConfig, params: &ChannelModelParams) -> (SystemConfig, ChannelModelParams) {
    let mut su_cfg = cfg.clone();
    su_cfg.subsurface_sizes = vec![cfg.n()];
    let mut su = params.clone();
    su.users.truncate(1);
    su.rician_factor = f64::INFINITY;
    (su_cfg, su)
}

/// Symbol energy giving the single-user SD system a mean SNR of
/// `target_db` over a pure LoS BS-RIS link.
pub fn calibrate_es(cfg: &SystemConfig, params: &ChannelModelParams, target_db: f64) -> Result<f64, SimError> {
    let (su_cfg, su) = single_user_reference(cfg, params);
    let total = mean_snr_closed_form(&su_cfg, &su, 0)?.total();
    if !(total > 0.0) || !total.is_finite() {
        return Err(SimError::ZeroChannel);
    }
    Ok(10f64.powf(target_db / 10.0) * cfg.noise_variance / total)
}
