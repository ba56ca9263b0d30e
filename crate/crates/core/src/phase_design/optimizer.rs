use std::f64::consts::TAU;

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::numerics::{norm_sqr, ComplexMatrix};
use crate::{CMatrix, Complex64};

use super::{esd_phases, PhaseError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Number of starts; the first is seeded at the ESD design.
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative objective gain below which a start stops.
    pub tol: f64,
    /// Initial backtracking step, radians.
    pub initial_step: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 500,
            tol: 1e-9,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOutcome {
    pub phases: Vec<Complex64>,
    /// ‖h_d + H Φ h‖² at the returned phases.
    pub objective: f64,
    /// Objective of the ESD start.
    pub seed_objective: f64,
    /// Every start stopped on the gain tolerance rather than the iteration cap.
    pub converged: bool,
    pub iterations: usize,
}

/// `‖h_d + C e^{jφ}‖²` with `C = H_br,k,k diag(h_ru,k,k)`.
struct Objective {
    h_d: Vec<Complex64>,
    c: CMatrix,
}

impl Objective {
    fn value_at(&self, x: &[Complex64]) -> (f64, Vec<Complex64>) {
        let mut y = self.c.mul_vec(x);
        for (a, b) in y.iter_mut().zip(&self.h_d) {
            *a += b;
        }
        (norm_sqr(&y), y)
    }

    /// ∂J/∂φ_n = −2 Im{ (Cᴴy)_n^* x_n }.
    fn gradient(&self, x: &[Complex64], y: &[Complex64]) -> Vec<f64> {
        let w = self.c.adjoint_mul_vec(y);
        w.iter().zip(x).map(|(w, x)| -2.0 * (w.conj() * x).im).collect()
    }
}

fn polar(phi: &[f64]) -> Vec<Complex64> {
    phi.iter().map(|&p| Complex64::from_polar(1.0, p)).collect()
}

struct Run {
    phi: Vec<f64>,
    value: f64,
    converged: bool,
    iterations: usize,
}

/// Normalised-gradient ascent with backtracking. Each accepted step
/// strictly increases the objective.
fn ascend(obj: &Objective, mut phi: Vec<f64>, s: &OptimizerSettings) -> Run {
    let mut x = polar(&phi);
    let (mut value, mut y) = obj.value_at(&x);
    let mut step = s.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < s.max_iters {
        iterations += 1;
        let g = obj.gradient(&x, &y);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax == 0.0 || !gmax.is_finite() {
            converged = true;
            break;
        }
        // warm start from the last accepted step, capped at the initial step
        let mut t = (2.0 * step).min(s.initial_step);
        let mut accepted = None;
        while t > 1e-12 {
            let trial: Vec<f64> = phi.iter().zip(&g).map(|(p, d)| p + t * d / gmax).collect();
            let tx = polar(&trial);
            let (tv, ty) = obj.value_at(&tx);
            if tv > value {
                accepted = Some((trial, tx, tv, ty));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, tx, tv, ty)) = accepted else {
            converged = true;
            break;
        };
        let gain = tv - value;
        phi = trial;
        x = tx;
        y = ty;
        step = t;
        value = tv;
        if gain <= s.tol * value.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Run {
        phi,
        value,
        converged,
        iterations,
    }
}

/// Multi-start gradient ascent on user `k`'s own-subsurface objective
/// `‖h_d,k + H_br,k,k Φ_k h_ru,k,k‖²` over the phase angles.
///
/// The first start is the ESD design, the rest are uniform random. Returns
/// the best start; `converged` is false if any start hit `max_iters`.
pub fn numeric_optimizer<R: Rng + ?Sized>(
    real: &ChannelRealization,
    k: usize,
    settings: &OptimizerSettings,
    rng: &mut R,
) -> Result<OptimizerOutcome, PhaseError> {
    if settings.restarts == 0 {
        return Err(PhaseError::InvalidSettings("restarts must be at least 1".into()));
    }
    let seed = esd_phases(real, k)?.phases;
    let h = real.h_ru_block(k, k);
    let hb = real.h_br_block(k, k);
    let c = ComplexMatrix::from_fn(hb.rows(), hb.cols(), |i, j| hb[(i, j)] * h[j]);
    let obj = Objective {
        h_d: real.users[k].h_d.clone(),
        c,
    };
    let seed_objective = obj.value_at(&seed).0;
    let mut best: Option<Run> = None;
    let mut converged = true;
    let mut iterations = 0;
    for start in 0..settings.restarts {
        let phi0: Vec<f64> = if start == 0 {
            seed.iter().map(|z| z.arg()).collect()
        } else {
            (0..h.len()).map(|_| rng.random::<f64>() * TAU).collect()
        };
        let run = ascend(&obj, phi0, settings);
        converged &= run.converged;
        iterations += run.iterations;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    Ok(OptimizerOutcome {
        phases: polar(&best.phi),
        objective: best.value,
        seed_objective,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{equal_split, layout_for, ChannelModel, Layout, LinkBudget, SystemConfig, UserRealization};
    use crate::numerics::RngStream;
    use crate::phase_design::{block_objective, sd_phases};
    use std::sync::Arc;

    fn model(kappa: f64) -> ChannelModel {
        let mut cfg = SystemConfig {
            bs_x: 4,
            bs_z: 2,
            ris_x: 4,
            ris_z: 4,
            ris_spacing: 0.2,
            ..SystemConfig::default()
        };
        cfg.subsurface_sizes = equal_split(cfg.n(), 1);
        let budget = LinkBudget {
            rician_factor: kappa,
            ..LinkBudget::default()
        };
        ChannelModel::from_budget(&cfg, &budget).unwrap()
    }

    #[test]
    fn matches_sd_on_rank_one_channels() {
        let m = model(f64::INFINITY);
        for r in 0..5 {
            let real = m.sample_realization(&mut RngStream::new(7, r));
            let sd = block_objective(&real, 0, &sd_phases(&real, 0).unwrap().phases);
            let out = numeric_optimizer(&real, 0, &OptimizerSettings::default(), &mut RngStream::new(8, r)).unwrap();
            assert!((out.objective - sd).abs() <= 1e-6 * sd, "{} vs {sd}", out.objective);
        }
    }

    #[test]
    fn never_below_esd_start() {
        let m = model(0.0);
        for r in 0..5 {
            let real = m.sample_realization(&mut RngStream::new(9, r));
            let out = numeric_optimizer(&real, 0, &OptimizerSettings::default(), &mut RngStream::new(10, r)).unwrap();
            assert!(out.objective >= out.seed_objective - 1e-9 * out.seed_objective);
            assert!((block_objective(&real, 0, &out.phases) - out.objective).abs() < 1e-9 * out.objective);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = model(1.0);
        let real = m.sample_realization(&mut RngStream::new(11, 0));
        let h = real.h_ru_block(0, 0);
        let hb = real.h_br_block(0, 0);
        let obj = Objective {
            h_d: real.users[0].h_d.clone(),
            c: ComplexMatrix::from_fn(hb.rows(), hb.cols(), |i, j| hb[(i, j)] * h[j]),
        };
        let mut rng = RngStream::new(11, 1);
        let phi: Vec<f64> = (0..h.len()).map(|_| rng.random::<f64>() * TAU).collect();
        let x = polar(&phi);
        let (v0, y) = obj.value_at(&x);
        let g = obj.gradient(&x, &y);
        let eps = 1e-6;
        for n in [0, 3, 9] {
            let mut p = phi.clone();
            p[n] += eps;
            let up = obj.value_at(&polar(&p)).0;
            p[n] -= 2.0 * eps;
            let down = obj.value_at(&polar(&p)).0;
            let fd = (up - down) / (2.0 * eps);
            assert!((fd - g[n]).abs() <= 1e-5 * v0, "{fd} vs {}", g[n]);
        }
    }

    #[test]
    fn single_element_matches_grid_search() {
        let mut rng = RngStream::new(12, 0);
        let h_d = crate::numerics::sample_cn::<f64, _>(3, &mut rng);
        let col = crate::numerics::sample_cn::<f64, _>(3, &mut rng);
        let real = ChannelRealization {
            users: vec![UserRealization {
                h_d: h_d.clone(),
                h_ru: vec![Complex64::new(0.4, -0.9)],
                h_br: ComplexMatrix::from_row_major(3, 1, col.clone()),
            }],
            a_b: Arc::new(vec![Complex64::new(1.0, 0.0); 3]),
            a_r: Arc::new(vec![Complex64::new(1.0, 0.0)]),
            layout: Arc::new(layout_for(1, &[1], Layout::Grouped).unwrap()),
        };
        let out = numeric_optimizer(&real, 0, &OptimizerSettings::default(), &mut rng).unwrap();
        let grid = 10_000;
        let best = (0..grid)
            .map(|i| block_objective(&real, 0, &[Complex64::from_polar(1.0, TAU * i as f64 / grid as f64)]))
            .fold(f64::MIN, f64::max);
        assert!(out.objective >= best - 1e-12);
        // grid resolution bound: J is smooth with |J''| ≤ 2|c||h||h_d + ...|
        let step = TAU / grid as f64;
        assert!(out.objective - best <= out.objective * step * step);
    }

    #[test]
    fn zero_restarts_are_rejected() {
        let m = model(f64::INFINITY);
        let real = m.sample_realization(&mut RngStream::new(13, 0));
        let s = OptimizerSettings {
            restarts: 0,
            ..OptimizerSettings::default()
        };
        assert!(numeric_optimizer(&real, 0, &s, &mut RngStream::new(13, 1)).is_err());
    }
}
