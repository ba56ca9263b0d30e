//! End-to-end checks through the public API.

use ris_lab::analysis::{mean_snr_closed_form, rate_upper_bound};
use ris_lab::channel::{ChannelModel, Layout, LinkBudget, SystemConfig};
use ris_lab::numerics::RngStream;
use ris_lab::phase_design::{design, OptimizerSettings, PhaseMethod};
use ris_lab::simulate::{
    calibrate_es, link_components, run_experiment, snr_of, to_csv, ExperimentSpec, GridPoint, Scheme, CSV_HEADER,
};

fn model(users: usize, kappa: f64, layout: Layout) -> ChannelModel {
    let mut cfg = SystemConfig::default().with_users(users);
    cfg.layout = layout;
    cfg.ris_spacing = 0.25;
    let budget = LinkBudget {
        rician_factor: kappa,
        ..LinkBudget::default()
    };
    ChannelModel::from_budget(&cfg, &budget).unwrap()
}

#[test]
fn hand_rolled_monte_carlo_matches_closed_form() {
    let m = model(2, f64::INFINITY, Layout::Interleaved);
    let es = calibrate_es(m.config(), m.params(), 5.0).unwrap();
    let settings = OptimizerSettings::default();
    let reps = 4000;
    let mut sums = [0.0; 2];
    for r in 0..reps {
        let real = m.sample_realization(&mut RngStream::new(17, r));
        let (phases, _) = design(&real, PhaseMethod::Sd, &settings, &mut RngStream::new(18, r)).unwrap();
        for (k, s) in sums.iter_mut().enumerate() {
            *s += snr_of(&real, &phases, k, es, 1.0).unwrap();
        }
    }
    for (k, s) in sums.iter().enumerate() {
        let analytic = mean_snr_closed_form(m.config(), m.params(), k).unwrap().snr(es, 1.0);
        let mc = s / reps as f64;
        assert!((mc - analytic).abs() / analytic < 0.03, "user {k}: {mc} vs {analytic}");
    }
}

#[test]
fn snr_is_sum_of_link_terms() {
    let m = model(3, 1.0, Layout::Grouped);
    let real = m.sample_realization(&mut RngStream::new(5, 0));
    let (phases, _) = design(&real, PhaseMethod::Esd, &OptimizerSettings::default(), &mut RngStream::new(5, 1)).unwrap();
    for k in 0..3 {
        let c = link_components(&real, &phases, k).unwrap();
        let snr = snr_of(&real, &phases, k, 2.0, 0.5).unwrap();
        let total: f64 = c.terms().iter().sum();
        // the cross term between f and g is not among the four terms
        let fg: f64 = c.f.iter().zip(&c.g).map(|(a, b)| 2.0 * (a.conj() * b).re).sum::<f64>()
            + c.h_d.iter().zip(&c.g).map(|(a, b)| 2.0 * (a.conj() * b).re).sum::<f64>();
        assert!((snr - 4.0 * (total + fg)).abs() < 1e-9 * snr);
    }
}

#[test]
fn designed_phases_beat_random_on_average() {
    let mut spec = ExperimentSpec::new("pipeline", SystemConfig::default());
    spec.grid = vec![GridPoint {
        users: Some(2),
        rician_factor: Some(1.0),
        ..GridPoint::default()
    }];
    spec.schemes = ["sd", "esd", "random"].iter().map(|s| s.parse::<Scheme>().unwrap()).collect();
    spec.replicates = 300;
    let res = run_experiment(&spec, 2).unwrap();
    let p = &res.points[0];
    let mean = |s: &str| p.pooled(s.parse().unwrap()).unwrap().mean;
    assert!(mean("esd") > mean("random"));
    assert!(mean("sd") > mean("random"));
    assert!(p.analytic.is_none());
    let csv = to_csv(&res);
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert!(!csv.contains(",analytic,"));
    for c in &p.cells {
        assert!(c.jensen_bound >= c.rate.mean);
        assert!((c.jensen_bound - rate_upper_bound(c.snr.mean)).abs() < 1e-12);
    }
}
