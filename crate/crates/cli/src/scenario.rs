//! Versioned TOML scenario files.
//!
//! Every physical quantity carries its unit in the key name and unknown keys
//! are rejected.

use ris_lab::channel::{Angles, Layout, LinkBudget, SystemConfig};
use ris_lab::numerics::ComplexMatrix;
use ris_lab::phase_design::OptimizerSettings;
use ris_lab::simulate::{ExperimentSpec, GridPoint, Scheme};
use ris_lab::CMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "ris-lab/scenario/v1";

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("unsupported schema {found:?} (expected {SCHEMA:?})")]
    Schema { found: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub bs_grid: [usize; 2],
    pub ris_grid: [usize; 2],
    /// Equal split among this many users unless `subsurface_sizes` is set.
    pub users: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsurface_sizes: Option<Vec<usize>>,
    pub bs_spacing_wavelengths: f64,
    pub ris_spacing_wavelengths: f64,
    pub bandwidth_hz: f64,
    pub symbol_energy_j: f64,
    pub noise_variance_j: f64,
    pub layout: String,
    pub bs_elevation_rad: f64,
    pub bs_azimuth_rad: f64,
    pub ris_elevation_rad: f64,
    pub ris_azimuth_rad: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        let c = SystemConfig::default();
        Self {
            bs_grid: [c.bs_x, c.bs_z],
            ris_grid: [c.ris_x, c.ris_z],
            users: 1,
            subsurface_sizes: None,
            bs_spacing_wavelengths: c.bs_spacing,
            ris_spacing_wavelengths: c.ris_spacing,
            bandwidth_hz: c.bandwidth_hz,
            symbol_energy_j: c.symbol_energy,
            noise_variance_j: c.noise_variance,
            layout: c.layout.to_string(),
            bs_elevation_rad: c.angles.bs_elevation,
            bs_azimuth_rad: c.angles.bs_azimuth,
            ris_elevation_rad: c.angles.ris_elevation,
            ris_azimuth_rad: c.angles.ris_azimuth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub ref_loss_db: f64,
    pub ref_distance_m: f64,
    pub bs_ue_distance_m: f64,
    pub bs_ris_distance_m: f64,
    pub ris_ue_distance_m: f64,
    pub alpha_direct: f64,
    pub alpha_bs_ris_los: f64,
    pub alpha_bs_ris_nlos: f64,
    pub alpha_ris_ue: f64,
    /// `inf` for a pure LoS BS-RIS link.
    pub rician_factor: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        let b = LinkBudget::default();
        Self {
            ref_loss_db: b.ref_loss_db,
            ref_distance_m: b.ref_distance_m,
            bs_ue_distance_m: b.bs_ue_m,
            bs_ris_distance_m: b.bs_ris_m,
            ris_ue_distance_m: b.ris_ue_m,
            alpha_direct: b.alpha_direct,
            alpha_bs_ris_los: b.alpha_bs_ris_los,
            alpha_bs_ris_nlos: b.alpha_bs_ris_nlos,
            alpha_ris_ue: b.alpha_ris_ue,
            rician_factor: b.rician_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub schemes: Vec<String>,
    pub replicates: usize,
    pub seed: u64,
    /// Calibrate E_s so the single-user LoS SD system has mean SNR
    /// `calibration_target_db`; otherwise use `system.symbol_energy_j`.
    pub calibrate: bool,
    pub calibration_target_db: f64,
    pub keep_samples: bool,
    pub optimizer_restarts: usize,
    pub optimizer_max_iters: usize,
    pub optimizer_tol: f64,
    pub optimizer_initial_step_rad: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let o = OptimizerSettings::default();
        Self {
            schemes: vec!["sd".into()],
            replicates: 10_000,
            seed: 1,
            calibrate: true,
            calibration_target_db: 5.0,
            keep_samples: false,
            optimizer_restarts: o.restarts,
            optimizer_max_iters: o.max_iters,
            optimizer_tol: o.tol,
            optimizer_initial_step_rad: o.initial_step,
        }
    }
}

/// Cartesian sweep; the last listed axis varies fastest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rician_factor: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub users: Option<Vec<usize>>,
    /// `ris_grid` follows `users` index-by-index when both are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris_grid: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris_spacing_wavelengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris_spacing_wavelengths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rician_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub users: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris_grid: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<String>,
}

/// Explicit real symmetric correlation matrices, rows listed in raster order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris_matrix: Option<Vec<Vec<f64>>>,
}

fn invalid(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_layout(key: &str, s: &str) -> Result<Layout, ScenarioError> {
    s.parse().map_err(|e: ris_lab::channel::ChannelError| invalid(key, e.to_string()))
}

fn matrix(key: &str, rows: &[Vec<f64>]) -> Result<CMatrix, ScenarioError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(key, "must be a non-empty square list of rows"));
    }
    Ok(ComplexMatrix::from_real(n, n, |i, j| rows[i][j]))
}

impl ScenarioFile {
    pub fn parse(text: &str, path: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            path: path.to_string(),
            message: e.to_string(),
        })?;
        if file.schema != SCHEMA {
            return Err(ScenarioError::Schema { found: file.schema });
        }
        Ok(file)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// SHA-256 of the canonical serialisation.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn system_config(&self) -> Result<SystemConfig, ScenarioError> {
        let s = &self.system;
        let mut cfg = SystemConfig {
            bs_x: s.bs_grid[0],
            bs_z: s.bs_grid[1],
            ris_x: s.ris_grid[0],
            ris_z: s.ris_grid[1],
            subsurface_sizes: Vec::new(),
            bs_spacing: s.bs_spacing_wavelengths,
            ris_spacing: s.ris_spacing_wavelengths,
            bandwidth_hz: s.bandwidth_hz,
            symbol_energy: s.symbol_energy_j,
            noise_variance: s.noise_variance_j,
            layout: parse_layout("system.layout", &s.layout)?,
            angles: Angles {
                bs_elevation: s.bs_elevation_rad,
                bs_azimuth: s.bs_azimuth_rad,
                ris_elevation: s.ris_elevation_rad,
                ris_azimuth: s.ris_azimuth_rad,
            },
        };
        cfg.subsurface_sizes = match &s.subsurface_sizes {
            Some(sizes) => {
                if sizes.len() != s.users {
                    return Err(invalid(
                        "system.subsurface_sizes",
                        format!("{} sizes listed for {} users", sizes.len(), s.users),
                    ));
                }
                sizes.clone()
            }
            None => cfg.with_users(s.users).subsurface_sizes,
        };
        Ok(cfg)
    }

    pub fn link_budget(&self) -> LinkBudget {
        let l = &self.link;
        LinkBudget {
            ref_loss_db: l.ref_loss_db,
            ref_distance_m: l.ref_distance_m,
            bs_ue_m: l.bs_ue_distance_m,
            bs_ris_m: l.bs_ris_distance_m,
            ris_ue_m: l.ris_ue_distance_m,
            alpha_direct: l.alpha_direct,
            alpha_bs_ris_los: l.alpha_bs_ris_los,
            alpha_bs_ris_nlos: l.alpha_bs_ris_nlos,
            alpha_ris_ue: l.alpha_ris_ue,
            rician_factor: l.rician_factor,
        }
    }

    fn grid_points(&self) -> Result<Vec<GridPoint>, ScenarioError> {
        match (&self.sweep, self.grid.is_empty()) {
            (Some(_), false) => Err(invalid("grid", "use either [sweep] or [[grid]], not both")),
            (None, true) => Ok(vec![GridPoint::default()]),
            (None, false) => self
                .grid
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    Ok(GridPoint {
                        ris_spacing: g.ris_spacing_wavelengths,
                        rician_factor: g.rician_factor,
                        users: g.users,
                        ris_grid: g.ris_grid.map(|[x, z]| (x, z)),
                        layout: g
                            .layout
                            .as_deref()
                            .map(|l| parse_layout(&format!("grid[{i}].layout"), l))
                            .transpose()?,
                    })
                })
                .collect(),
            (Some(sweep), true) => sweep_points(sweep),
        }
    }

    pub fn experiment(&self) -> Result<ExperimentSpec, ScenarioError> {
        let e = &self.experiment;
        let schemes = e
            .schemes
            .iter()
            .map(|s| s.parse::<Scheme>().map_err(|err| invalid("experiment.schemes", err.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = ExperimentSpec::new(self.name.clone(), self.system_config()?);
        spec.budget = self.link_budget();
        spec.grid = self.grid_points()?;
        spec.schemes = schemes;
        spec.replicates = e.replicates;
        spec.seed = e.seed;
        spec.calibration_db = e.calibrate.then_some(e.calibration_target_db);
        spec.keep_samples = e.keep_samples;
        spec.optimizer = OptimizerSettings {
            restarts: e.optimizer_restarts,
            max_iters: e.optimizer_max_iters,
            tol: e.optimizer_tol,
            initial_step: e.optimizer_initial_step_rad,
        };
        if let Some(c) = &self.correlation {
            spec.bs_correlation = c.bs_matrix.as_deref().map(|m| matrix("correlation.bs_matrix", m)).transpose()?;
            spec.ris_correlation = c.ris_matrix.as_deref().map(|m| matrix("correlation.ris_matrix", m)).transpose()?;
        }
        Ok(spec)
    }
}

fn axis<T: Clone>(v: &Option<Vec<T>>) -> Vec<Option<T>> {
    match v {
        Some(list) => list.iter().cloned().map(Some).collect(),
        None => vec![None],
    }
}

fn sweep_points(s: &SweepSection) -> Result<Vec<GridPoint>, ScenarioError> {
    for (key, empty) in [
        ("sweep.rician_factor", s.rician_factor.as_ref().is_some_and(Vec::is_empty)),
        ("sweep.layout", s.layout.as_ref().is_some_and(Vec::is_empty)),
        ("sweep.users", s.users.as_ref().is_some_and(Vec::is_empty)),
        ("sweep.ris_grid", s.ris_grid.as_ref().is_some_and(Vec::is_empty)),
        ("sweep.ris_spacing_wavelengths", s.ris_spacing_wavelengths.as_ref().is_some_and(Vec::is_empty)),
    ] {
        if empty {
            return Err(invalid(key, "sweep axis must not be empty"));
        }
    }
    // users and ris_grid are paired when both are present
    let population: Vec<(Option<usize>, Option<(usize, usize)>)> = match (&s.users, &s.ris_grid) {
        (Some(u), Some(g)) => {
            if u.len() != g.len() {
                return Err(invalid("sweep.ris_grid", "must have one entry per sweep.users entry"));
            }
            u.iter().zip(g).map(|(&k, &[x, z])| (Some(k), Some((x, z)))).collect()
        }
        (Some(u), None) => u.iter().map(|&k| (Some(k), None)).collect(),
        (None, Some(g)) => g.iter().map(|&[x, z]| (None, Some((x, z)))).collect(),
        (None, None) => vec![(None, None)],
    };
    let layouts = axis(&s.layout)
        .into_iter()
        .map(|l| l.map(|l| parse_layout("sweep.layout", &l)).transpose())
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for kappa in axis(&s.rician_factor) {
        for &layout in &layouts {
            for &(users, ris_grid) in &population {
                for spacing in axis(&s.ris_spacing_wavelengths) {
                    out.push(GridPoint {
                        ris_spacing: spacing,
                        rician_factor: kappa,
                        users,
                        ris_grid,
                        layout,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = "ris-lab/scenario/v1"
name = "minimal"
"#;

    #[test]
    fn minimal_file_uses_defaults() {
        let s = ScenarioFile::parse(MINIMAL, "minimal.toml").unwrap();
        let spec = s.experiment().unwrap();
        assert_eq!(spec.base, SystemConfig::default());
        assert_eq!(spec.budget, LinkBudget::default());
        assert_eq!(spec.grid, vec![GridPoint::default()]);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{MINIMAL}\n[system]\ndr_spacing = 0.1\n");
        let err = ScenarioFile::parse(&text, "bad.toml").unwrap_err().to_string();
        assert!(err.contains("dr_spacing"), "{err}");
        assert!(err.contains("bad.toml"));
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let text = "schema = \"ris-lab/scenario/v0\"\nname = \"x\"\n";
        assert!(matches!(ScenarioFile::parse(text, "x"), Err(ScenarioError::Schema { .. })));
    }

    #[test]
    fn infinite_kappa_round_trips() {
        let mut s = ScenarioFile::parse(MINIMAL, "m").unwrap();
        s.sweep = Some(SweepSection {
            rician_factor: Some(vec![f64::INFINITY, 1.0, 0.0]),
            ris_spacing_wavelengths: Some(vec![0.1, 0.2]),
            ..SweepSection::default()
        });
        let text = s.to_toml();
        assert!(text.contains("inf"));
        let back = ScenarioFile::parse(&text, "m").unwrap();
        assert_eq!(back, s);
        assert_eq!(back.config_hash(), s.config_hash());
        let grid = back.experiment().unwrap().grid;
        assert_eq!(grid.len(), 6);
        assert_eq!(grid[0].rician_factor, Some(f64::INFINITY));
        assert_eq!(grid[1].ris_spacing, Some(0.2));
    }

    #[test]
    fn paired_population_axis() {
        let mut s = ScenarioFile::parse(MINIMAL, "m").unwrap();
        s.sweep = Some(SweepSection {
            users: Some(vec![1, 2]),
            ris_grid: Some(vec![[16, 8], [16, 16]]),
            ..SweepSection::default()
        });
        let grid = s.experiment().unwrap().grid;
        assert_eq!(grid.len(), 2);
        assert_eq!(grid[1].ris_grid, Some((16, 16)));
        s.sweep.as_mut().unwrap().ris_grid = Some(vec![[16, 8]]);
        assert!(s.experiment().is_err());
    }

    #[test]
    fn explicit_subsurface_sizes_must_match_users() {
        let text = format!("{MINIMAL}\n[system]\nusers = 2\nsubsurface_sizes = [64, 63, 1]\n");
        let s = ScenarioFile::parse(&text, "m").unwrap();
        assert!(s.experiment().unwrap_err().to_string().contains("subsurface_sizes"));
        let s = ScenarioFile::parse(&text.replace("[64, 63, 1]", "[64, 63]"), "m").unwrap();
        let spec = s.experiment().unwrap();
        assert!(spec.violations().iter().any(|v| v.contains("subsurface sizes")));
    }
}
