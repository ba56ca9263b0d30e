//! Fast invariant suite run by `ris-lab selftest`.

use ris_lab::channel::{ChannelModel, LinkBudget, SystemConfig};
use ris_lab::numerics::{dot, gauss_2f1, RngStream};
use ris_lab::phase_design::{esd_phases, sd_phases};
use ris_lab::simulate::{run_experiment, ExperimentSpec, GridPoint};
use ris_lab::Complex64;

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Fewer realizations and one Monte Carlo configuration.
    pub fast: bool,
    pub seed: u64,
    /// Perturbs the hypergeometric evaluations by 1e-6 relative.
    pub inject_2f1_fault: bool,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = Result<String, String>;

/// Fixed-length partial sum of the hypergeometric series.
fn partial_sum_2f1(a: f64, b: f64, c: f64, z: f64, terms: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..terms {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
    }
    sum
}

fn check_2f1(opts: &SelftestOptions) -> Check {
    let eval = |a, b, c, z| {
        gauss_2f1(a, b, c, z).map(|v| if opts.inject_2f1_fault { v * (1.0 + 1e-6) } else { v })
    };
    let mut worst: f64 = 0.0;
    for (a, b, c) in [(-0.5, -0.5, 1.0), (0.5, 0.5, 2.0)] {
        for i in 0..50 {
            let z = i as f64 / 50.0;
            let got = eval(a, b, c, z).map_err(|e| e.to_string())?;
            let want = partial_sum_2f1(a, b, c, z, 20_000);
            worst = worst.max((got - want).abs());
        }
    }
    let at_one = eval(-0.5, -0.5, 1.0, 1.0).map_err(|e| e.to_string())?;
    let exact = 4.0 / std::f64::consts::PI;
    if worst > 1e-10 {
        return Err(format!("max deviation from partial sums {worst:.3e} > 1e-10"));
    }
    if (at_one - exact).abs() > 1e-12 {
        return Err(format!("value at z = 1 is {at_one}, expected 4/pi"));
    }
    Ok(format!("max deviation {worst:.1e} over 2 x 50 points"))
}

fn model(users: usize, kappa: f64, spacing: f64) -> Result<ChannelModel, String> {
    let mut cfg = SystemConfig::default().with_users(users);
    cfg.ris_spacing = spacing;
    let budget = LinkBudget {
        rician_factor: kappa,
        ..LinkBudget::default()
    };
    ChannelModel::from_budget(&cfg, &budget).map_err(|e| e.to_string())
}

fn check_rank_one(opts: &SelftestOptions) -> Check {
    let m = model(2, f64::INFINITY, 0.2)?;
    let draws = if opts.fast { 20 } else { 100 };
    let mut worst: f64 = 0.0;
    for r in 0..draws {
        let real = m.sample_realization(&mut RngStream::new(opts.seed, r));
        for k in 0..2 {
            let sd = sd_phases(&real, k).map_err(|e| e.to_string())?.phases;
            let esd = esd_phases(&real, k).map_err(|e| e.to_string())?.phases;
            for (a, b) in sd.iter().zip(&esd) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("max entry difference {worst:.3e} > 1e-10"));
    }
    Ok(format!("max entry difference {worst:.1e} over {draws} draws"))
}

fn check_alignment(opts: &SelftestOptions) -> Check {
    let draws = if opts.fast { 10 } else { 50 };
    let mut worst: f64 = 0.0;
    for (kappa, esd) in [(f64::INFINITY, false), (1.0, true), (0.0, true)] {
        let m = model(2, kappa, 0.25)?;
        for r in 0..draws {
            let real = m.sample_realization(&mut RngStream::new(opts.seed ^ 0xa11, r));
            for k in 0..2 {
                let d = if esd { esd_phases(&real, k) } else { sd_phases(&real, k) }.map_err(|e| e.to_string())?;
                let h = real.h_ru_block(k, k);
                let x: Vec<Complex64> = d.phases.iter().zip(&h).map(|(p, z)| p * z).collect();
                let f = real.h_br_block(k, k).mul_vec(&x);
                let c = dot(&real.users[k].h_d, &f);
                worst = worst.max((c.norm() - c.re) / c.norm());
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("cross term misaligned by {worst:.3e} (relative)"));
    }
    Ok(format!("max relative misalignment {worst:.1e}"))
}

fn check_monte_carlo(opts: &SelftestOptions) -> Check {
    let mut spec = ExperimentSpec::new("selftest", SystemConfig::default());
    spec.replicates = 2_000;
    spec.seed = opts.seed;
    spec.grid = if opts.fast {
        vec![GridPoint {
            users: Some(2),
            ris_spacing: Some(0.2),
            ..GridPoint::default()
        }]
    } else {
        [1, 2]
            .into_iter()
            .flat_map(|k| {
                [0.1, 0.3, 0.5].map(|d| GridPoint {
                    users: Some(k),
                    ris_spacing: Some(d),
                    ..GridPoint::default()
                })
            })
            .collect()
    };
    let res = run_experiment(&spec, 1).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for p in &res.points {
        for (k, cell) in p.cells.iter().enumerate() {
            let analytic = p.analytic_snr(k, res.symbol_energy).ok_or("missing analytic overlay")?;
            worst = worst.max((cell.snr.mean - analytic).abs() / analytic);
        }
    }
    if worst > 0.03 {
        return Err(format!("Monte Carlo mean SNR off by {:.2}% > 3%", 100.0 * worst));
    }
    Ok(format!("max relative gap {:.2}% over {} points", 100.0 * worst, res.points.len()))
}

pub fn run_selftest(opts: &SelftestOptions) -> Vec<CheckOutcome> {
    let checks: [(&'static str, fn(&SelftestOptions) -> Check); 4] = [
        ("2f1-oracle", check_2f1),
        ("esd-equals-sd-rank1", check_rank_one),
        ("cross-term-alignment", check_alignment),
        ("analytic-vs-monte-carlo", check_monte_carlo),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f(opts) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name, passed, detail }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes_and_fault_is_caught() {
        let mut opts = SelftestOptions {
            fast: true,
            seed: 3,
            ..SelftestOptions::default()
        };
        assert!(run_selftest(&opts).iter().all(|c| c.passed));
        opts.inject_2f1_fault = true;
        let out = run_selftest(&opts);
        assert!(!out[0].passed);
        assert!(out[1..].iter().all(|c| c.passed));
    }

    #[test]
    fn partial_sum_matches_closed_forms() {
        // ₂F₁(1,1;2;z) = −ln(1−z)/z
        let z: f64 = 0.3;
        assert!((partial_sum_2f1(1.0, 1.0, 2.0, z, 200) + (1.0 - z).ln() / z).abs() < 1e-14);
    }
}
