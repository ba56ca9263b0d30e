use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::{
    complexity_count, jain_fairness, mean_snr_closed_form, rate_upper_bound, ComplexityMethod, SnrBreakdown,
};
use crate::channel::{ChannelModel, ChannelModelParams, ChannelRealization, Layout, LinkBudget, SystemConfig};
use crate::numerics::RngStream;
use crate::phase_design::{design, random_phases, OptimizerSettings, PhaseMethod};
use crate::CMatrix;

use super::{calibrate_es, link_components, mmse_sinr, SimError, Summary};

/// Overrides applied to the base system at one sweep point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridPoint {
    pub ris_spacing: Option<f64>,
    pub rician_factor: Option<f64>,
    /// Equal split of the RIS among this many users.
    pub users: Option<usize>,
    /// RIS grid `(N_x, N_z)`; subsurfaces are re-split equally.
    pub ris_grid: Option<(usize, usize)>,
    pub layout: Option<Layout>,
}

impl GridPoint {
    pub fn resolve(&self, base: &SystemConfig, budget: &LinkBudget) -> (SystemConfig, LinkBudget) {
        let mut cfg = base.clone();
        let mut budget = budget.clone();
        if let Some(d) = self.ris_spacing {
            cfg.ris_spacing = d;
        }
        if let Some(k) = self.rician_factor {
            budget.rician_factor = k;
        }
        if let Some(layout) = self.layout {
            cfg.layout = layout;
        }
        let users = self.users.unwrap_or_else(|| cfg.users());
        if let Some((nx, nz)) = self.ris_grid {
            cfg.ris_x = nx;
            cfg.ris_z = nz;
        }
        if self.users.is_some() || self.ris_grid.is_some() {
            cfg = cfg.with_users(users);
        }
        (cfg, budget)
    }
}

/// How users are served at a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// One band per user, matched filter, phases from the given method.
    Subband(PhaseMethod),
    /// All users in one band with an MMSE receiver and random phases.
    SharedRandomMmse,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Subband(m) => m.as_str(),
            Scheme::SharedRandomMmse => "random_mmse",
        }
    }

    /// Fraction of the system bandwidth each user occupies.
    pub fn bandwidth_share(&self, users: usize) -> f64 {
        match self {
            Scheme::Subband(_) => 1.0 / users as f64,
            Scheme::SharedRandomMmse => 1.0,
        }
    }

    // Stream offset; fixed per scheme so adding schemes never changes others.
    fn stream_tag(&self) -> u64 {
        match self {
            Scheme::Subband(PhaseMethod::Sd) | Scheme::Subband(PhaseMethod::Esd) => 0,
            Scheme::Subband(PhaseMethod::Random) => 1,
            Scheme::Subband(PhaseMethod::Opt) => 2,
            Scheme::SharedRandomMmse => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "random_mmse" {
            return Ok(Scheme::SharedRandomMmse);
        }
        s.parse::<PhaseMethod>().map(Scheme::Subband).map_err(|_| SimError::UnknownScheme(s.to_string()))
    }
}

const STREAMS_PER_REPLICATE: u64 = 4;

fn channel_stream(seed: u64, replicate: usize) -> RngStream {
    RngStream::new(seed, replicate as u64 * STREAMS_PER_REPLICATE)
}

fn scheme_stream(seed: u64, replicate: usize, scheme: Scheme) -> RngStream {
    // the channel owns offset 0; deterministic schemes never draw
    RngStream::new(seed ^ 0x5eed_0f_fa5e, replicate as u64 * STREAMS_PER_REPLICATE + scheme.stream_tag())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub base: SystemConfig,
    pub budget: LinkBudget,
    pub grid: Vec<GridPoint>,
    pub schemes: Vec<Scheme>,
    pub replicates: usize,
    pub seed: u64,
    /// Single-user LoS mean-SNR target in dB; `None` keeps `base.symbol_energy`.
    pub calibration_db: Option<f64>,
    pub optimizer: OptimizerSettings,
    /// Keep raw per-replicate SNR samples in the result.
    pub keep_samples: bool,
    /// Replaces the sinc model for `R_d` and `R_b` when set.
    pub bs_correlation: Option<CMatrix>,
    /// Replaces the sinc model for `R_ru` and `R_r` when set.
    pub ris_correlation: Option<CMatrix>,
}

impl ExperimentSpec {
    pub fn new(name: impl Into<String>, base: SystemConfig) -> Self {
        Self {
            name: name.into(),
            base,
            budget: LinkBudget::default(),
            grid: vec![GridPoint::default()],
            schemes: vec![Scheme::Subband(PhaseMethod::Sd)],
            replicates: 10_000,
            seed: 0,
            calibration_db: Some(5.0),
            optimizer: OptimizerSettings::default(),
            keep_samples: false,
            bs_correlation: None,
            ris_correlation: None,
        }
    }

    /// Channel parameters of one resolved system, with correlation overrides.
    pub fn params_for(&self, cfg: &SystemConfig, budget: &LinkBudget) -> Result<ChannelModelParams, SimError> {
        let mut params = ChannelModelParams::from_budget(cfg, budget)?;
        if let Some(r) = &self.bs_correlation {
            params.r_d = r.clone();
            params.r_b = r.clone();
        }
        if let Some(r) = &self.ris_correlation {
            params.r_ru = r.clone();
            params.r_r = r.clone();
        }
        Ok(params)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.grid.is_empty() {
            out.push("grid must have at least one point".to_string());
        }
        if self.replicates == 0 {
            out.push("replicates must be at least 1".to_string());
        }
        if self.schemes.is_empty() {
            out.push("at least one scheme is required".to_string());
        }
        if self.optimizer.restarts == 0 {
            out.push("optimizer restarts must be at least 1".to_string());
        }
        for (i, point) in self.grid.iter().enumerate() {
            let (cfg, budget) = point.resolve(&self.base, &self.budget);
            out.extend(cfg.violations().into_iter().map(|v| format!("grid point {i}: {v}")));
            if !(budget.rician_factor >= 0.0) {
                out.push(format!("grid point {i}: rician factor must be >= 0, got {}", budget.rician_factor));
                continue;
            }
            if !cfg.violations().is_empty() {
                continue;
            }
            match self.params_for(&cfg, &budget) {
                Ok(p) => out.extend(p.violations(&cfg).into_iter().map(|v| format!("grid point {i}: {v}"))),
                Err(e) => out.push(format!("grid point {i}: {e}")),
            }
        }
        out
    }
}

/// Statistics of one (grid point, scheme, user) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub scheme: Scheme,
    pub user: usize,
    pub snr: Summary,
    /// log₂(1 + SNR) in the user's own band, bits/s/Hz.
    pub rate: Summary,
    /// Rate per Hz of system bandwidth: `bandwidth_share · rate.mean`.
    pub system_rate_mean: f64,
    /// log₂(1 + sample-mean SNR).
    pub jensen_bound: f64,
    /// Sample means of `[‖h_d‖², 2Re(h_d†f), ‖f‖², ‖g‖²]`, unscaled.
    pub term_means: Option<[f64; 4]>,
    /// Replicates flagged by a degenerate rotation or an unconverged optimiser.
    pub flagged: usize,
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub point: GridPoint,
    pub config: SystemConfig,
    pub rician_factor: f64,
    /// Closed-form breakdown per user when the BS-RIS link is pure LoS.
    pub analytic: Option<Vec<SnrBreakdown>>,
    pub cells: Vec<CellResult>,
    /// Pooled all-user SNR summary per scheme, in `schemes` order.
    pub pooled: Vec<(Scheme, Summary)>,
    /// Jain's index of mean system rates per scheme.
    pub fairness: Vec<(Scheme, f64)>,
    pub complexity_sd: u64,
    pub complexity_tmse: u64,
    pub elapsed: Duration,
}

impl PointResult {
    pub fn cell(&self, scheme: Scheme, user: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.scheme == scheme && c.user == user)
    }

    pub fn pooled(&self, scheme: Scheme) -> Option<&Summary> {
        self.pooled.iter().find(|(s, _)| *s == scheme).map(|(_, s)| s)
    }

    pub fn analytic_snr(&self, user: usize, symbol_energy: f64) -> Option<f64> {
        self.analytic
            .as_ref()
            .map(|a| a[user].snr(symbol_energy, self.config.noise_variance))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub name: String,
    pub seed: u64,
    pub replicates: usize,
    pub symbol_energy: f64,
    pub noise_variance: f64,
    pub points: Vec<PointResult>,
}

/// Per-replicate values for one scheme: SNR and terms per user.
struct SchemeDraw {
    snr: Vec<f64>,
    terms: Option<Vec<[f64; 4]>>,
    flagged: bool,
}

fn evaluate(
    real: &ChannelRealization,
    scheme: Scheme,
    spec: &ExperimentSpec,
    replicate: usize,
    es: f64,
    sigma2: f64,
) -> Result<SchemeDraw, SimError> {
    let users = real.user_count();
    let mut rng = scheme_stream(spec.seed, replicate, scheme);
    match scheme {
        Scheme::Subband(method) => {
            let (phases, flagged) = design(real, method, &spec.optimizer, &mut rng)?;
            let mut snr = Vec::with_capacity(users);
            let mut terms = Vec::with_capacity(users);
            for k in 0..users {
                let c = link_components(real, &phases, k)?;
                snr.push(es / sigma2 * crate::numerics::norm_sqr(&c.composite()));
                terms.push(c.terms());
            }
            Ok(SchemeDraw {
                snr,
                terms: Some(terms),
                flagged,
            })
        }
        Scheme::SharedRandomMmse => {
            let phases = random_phases(std::sync::Arc::clone(&real.layout), &mut rng);
            let channels = (0..users)
                .map(|k| link_components(real, &phases, k).map(|c| c.composite()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SchemeDraw {
                snr: mmse_sinr(&channels, es, sigma2)?,
                terms: None,
                flagged: false,
            })
        }
    }
}

fn run_point(
    spec: &ExperimentSpec,
    index: usize,
    es: f64,
    pool: &rayon::ThreadPool,
) -> Result<PointResult, SimError> {
    let started = Instant::now();
    let point = &spec.grid[index];
    let (mut cfg, budget) = point.resolve(&spec.base, &spec.budget);
    cfg.symbol_energy = es;
    let sigma2 = cfg.noise_variance;
    let model = ChannelModel::new(&cfg, spec.params_for(&cfg, &budget)?)?;
    let users = cfg.users();
    let analytic = if model.params().is_los() {
        Some(
            (0..users)
                .map(|k| mean_snr_closed_form(&cfg, model.params(), k))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };

    let draws: Vec<Vec<SchemeDraw>> = pool.install(|| {
        (0..spec.replicates)
            .into_par_iter()
            .map(|r| {
                let real = model.sample_realization(&mut channel_stream(spec.seed, r));
                spec.schemes
                    .iter()
                    .map(|&s| evaluate(&real, s, spec, r, es, sigma2))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut cells = Vec::new();
    let mut pooled = Vec::new();
    let mut fairness = Vec::new();
    for (si, &scheme) in spec.schemes.iter().enumerate() {
        let share = scheme.bandwidth_share(users);
        let flagged = draws.iter().filter(|d| d[si].flagged).count();
        let mut all = Vec::with_capacity(users * spec.replicates);
        let mut mean_rates = Vec::with_capacity(users);
        for k in 0..users {
            let snr: Vec<f64> = draws.iter().map(|d| d[si].snr[k]).collect();
            let rate: Vec<f64> = snr.iter().map(|s| rate_upper_bound(*s)).collect();
            let term_means = draws[0][si].terms.as_ref().map(|_| {
                let mut acc = [0.0; 4];
                for d in &draws {
                    let t = d[si].terms.as_ref().expect("subband terms")[k];
                    for (a, v) in acc.iter_mut().zip(t) {
                        *a += v;
                    }
                }
                acc.map(|a| a / spec.replicates as f64)
            });
            let snr_summary = Summary::of(&snr)?;
            let rate_summary = Summary::of(&rate)?;
            mean_rates.push(share * rate_summary.mean);
            all.extend_from_slice(&snr);
            cells.push(CellResult {
                scheme,
                user: k,
                jensen_bound: rate_upper_bound(snr_summary.mean),
                system_rate_mean: share * rate_summary.mean,
                snr: snr_summary,
                rate: rate_summary,
                term_means,
                flagged,
                samples: spec.keep_samples.then_some(snr),
            });
        }
        pooled.push((scheme, Summary::of(&all)?));
        fairness.push((scheme, jain_fairness(&mean_rates).unwrap_or(f64::NAN)));
    }
    let (n, m, k) = (cfg.n() as u64, cfg.m() as u64, users as u64);
    Ok(PointResult {
        index,
        point: point.clone(),
        rician_factor: budget.rician_factor,
        analytic,
        cells,
        pooled,
        fairness,
        complexity_sd: complexity_count(ComplexityMethod::Sd, n, m, k),
        complexity_tmse: complexity_count(ComplexityMethod::Tmse, n, m, k),
        elapsed: started.elapsed(),
        config: cfg,
    })
}

/// Symbol energy used by an experiment: calibrated once on the base system
/// when a target is set.
pub fn experiment_symbol_energy(spec: &ExperimentSpec) -> Result<f64, SimError> {
    match spec.calibration_db {
        Some(db) => {
            let params = spec.params_for(&spec.base, &spec.budget)?;
            calibrate_es(&spec.base, &params, db)
        }
        None => Ok(spec.base.symbol_energy),
    }
}

/// Runs every grid point with `workers` threads. Results depend only on the
/// spec, never on the worker count.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<SimResult, SimError> {
    let problems = spec.violations();
    if !problems.is_empty() {
        return Err(SimError::InvalidSpec(problems));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    let es = experiment_symbol_energy(spec)?;
    let points = (0..spec.grid.len())
        .map(|i| run_point(spec, i, es, &pool))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimResult {
        name: spec.name.clone(),
        seed: spec.seed,
        replicates: spec.replicates,
        symbol_energy: es,
        noise_variance: spec.base.noise_variance,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::equal_split;

    fn small_spec() -> ExperimentSpec {
        let mut base = SystemConfig {
            bs_x: 2,
            bs_z: 2,
            ris_x: 4,
            ris_z: 2,
            ..SystemConfig::default()
        };
        base.subsurface_sizes = equal_split(base.n(), 2);
        let mut spec = ExperimentSpec::new("small", base);
        spec.grid = vec![
            GridPoint {
                ris_spacing: Some(0.1),
                ..GridPoint::default()
            },
            GridPoint {
                rician_factor: Some(0.0),
                layout: Some(Layout::Interleaved),
                ..GridPoint::default()
            },
        ];
        spec.schemes = vec![
            Scheme::Subband(PhaseMethod::Sd),
            Scheme::Subband(PhaseMethod::Esd),
            Scheme::Subband(PhaseMethod::Random),
            Scheme::SharedRandomMmse,
        ];
        spec.replicates = 64;
        spec.seed = 17;
        spec
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let spec = small_spec();
        let mut a = run_experiment(&spec, 1).unwrap();
        let mut b = run_experiment(&spec, 4).unwrap();
        for p in a.points.iter_mut().chain(b.points.iter_mut()) {
            p.elapsed = Duration::ZERO;
        }
        assert_eq!(a, b);
    }

    #[test]
    fn one_replicate_gives_one_sample_per_cell() {
        let mut spec = small_spec();
        spec.replicates = 1;
        spec.keep_samples = true;
        let res = run_experiment(&spec, 1).unwrap();
        for p in &res.points {
            assert_eq!(p.cells.len(), 4 * 2);
            for c in &p.cells {
                assert_eq!(c.snr.count, 1);
                assert_eq!(c.samples.as_ref().unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn adding_a_scheme_keeps_other_results() {
        let mut spec = small_spec();
        let full = run_experiment(&spec, 1).unwrap();
        spec.schemes = vec![Scheme::Subband(PhaseMethod::Random)];
        let only = run_experiment(&spec, 1).unwrap();
        let s = Scheme::Subband(PhaseMethod::Random);
        assert_eq!(full.points[1].cell(s, 1).unwrap().snr, only.points[1].cell(s, 1).unwrap().snr);
    }

    #[test]
    fn analytic_overlay_only_for_los_points() {
        let res = run_experiment(&small_spec(), 1).unwrap();
        assert!(res.points[0].analytic.is_some());
        assert!(res.points[1].analytic.is_none());
        assert_eq!(res.points[0].complexity_sd, 2 * 8 + 4 * 2);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = small_spec();
        spec.replicates = 0;
        spec.grid.push(GridPoint {
            rician_factor: Some(-2.0),
            ..GridPoint::default()
        });
        let Err(SimError::InvalidSpec(p)) = run_experiment(&spec, 1) else {
            panic!("expected invalid spec");
        };
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn grid_point_resolution() {
        let base = SystemConfig::default();
        let (cfg, _) = GridPoint {
            users: Some(4),
            ris_grid: Some((32, 16)),
            ..GridPoint::default()
        }
        .resolve(&base, &LinkBudget::default());
        assert_eq!(cfg.n(), 512);
        assert_eq!(cfg.subsurface_sizes, vec![128; 4]);
        assert_eq!("random_mmse".parse::<Scheme>().unwrap(), Scheme::SharedRandomMmse);
        assert!("tmse".parse::<Scheme>().is_err());
    }
}
