use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ris_lab::analysis::mean_snr_closed_form;
use ris_lab::simulate::{experiment_symbol_energy, run_experiment, samples_csv, to_csv};
use serde::Serialize;

use crate::presets::preset;
use crate::scenario::ScenarioFile;

pub const RESULTS_FILE: &str = "results.csv";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const SCENARIO_FILE: &str = "scenario.toml";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Reads a scenario from a path, falling back to a preset name.
pub fn load_scenario(arg: &str) -> Result<ScenarioFile> {
    let path = Path::new(arg);
    let text = if path.exists() {
        fs::read_to_string(path).with_context(|| format!("reading {arg}"))?
    } else if let Some(text) = preset(arg) {
        text.to_string()
    } else {
        bail!("{arg}: no such file or preset");
    };
    Ok(ScenarioFile::parse(&text, arg)?)
}

pub struct RunOptions {
    pub scenario: String,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub workers: usize,
    pub force: bool,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    scenario_name: String,
    scenario_file: &'static str,
    config_hash_sha256: String,
    seed: u64,
    replicates: usize,
    workers: usize,
    symbol_energy_j: f64,
    outputs: Vec<&'static str>,
    elapsed_s: f64,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs a scenario and writes results, the resolved scenario and a manifest
/// into `opts.out`. Returns the written paths.
pub fn cmd_run(opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let mut file = load_scenario(&opts.scenario)?;
    if let Some(seed) = opts.seed {
        file.experiment.seed = seed;
    }
    if let Some(r) = opts.replicates {
        file.experiment.replicates = r;
    }
    let spec = file.experiment()?;
    let mut outputs = vec![RESULTS_FILE, SCENARIO_FILE, MANIFEST_FILE];
    if spec.keep_samples {
        outputs.push(SAMPLES_FILE);
    }
    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    if !opts.force {
        if let Some(existing) = outputs.iter().map(|f| opts.out.join(f)).find(|p| p.exists()) {
            bail!("{} exists; pass --force to overwrite", existing.display());
        }
    }
    let started = Instant::now();
    let result = run_experiment(&spec, opts.workers)?;
    let mut written = Vec::new();
    let mut write = |name: &str, body: String| -> Result<()> {
        let path = opts.out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(())
    };
    write(RESULTS_FILE, to_csv(&result))?;
    if spec.keep_samples {
        write(SAMPLES_FILE, samples_csv(&result))?;
    }
    write(SCENARIO_FILE, file.to_toml())?;
    let manifest = Manifest {
        tool: "ris-lab",
        version: env!("CARGO_PKG_VERSION"),
        core_version: ris_lab::VERSION,
        scenario_name: file.name.clone(),
        scenario_file: SCENARIO_FILE,
        config_hash_sha256: file.config_hash(),
        seed: spec.seed,
        replicates: spec.replicates,
        workers: opts.workers,
        symbol_energy_j: result.symbol_energy,
        outputs,
        elapsed_s: started.elapsed().as_secs_f64(),
    };
    write(MANIFEST_FILE, toml::to_string(&manifest)?)?;
    Ok(written)
}

/// Validation report lines and whether the scenario is valid.
pub fn cmd_validate(arg: &str) -> Result<(bool, Vec<String>)> {
    let file = load_scenario(arg)?;
    let spec = match file.experiment() {
        Ok(spec) => spec,
        Err(e) => return Ok((false, vec![format!("violation: {e}")])),
    };
    let violations = spec.violations();
    if !violations.is_empty() {
        return Ok((false, violations.into_iter().map(|v| format!("violation: {v}")).collect()));
    }
    let mut lines = vec![format!("{}: valid ({} grid points)", file.name, spec.grid.len())];
    if spec.budget.rician_factor.is_infinite() {
        let es = experiment_symbol_energy(&spec)?;
        let params = spec.params_for(&spec.base, &spec.budget)?;
        lines.push(format!("symbol energy E_s = {es:.6e} J"));
        for k in 0..spec.base.users() {
            let b = mean_snr_closed_form(&spec.base, &params, k)?;
            let snr = b.snr(es, spec.base.noise_variance);
            lines.push(format!("analytic mean SNR, user {k}: {:.3} dB ({snr:.6})", 10.0 * snr.log10()));
        }
    } else {
        lines.push("closed-form preview needs rician_factor = inf".to_string());
    }
    Ok((true, lines))
}
