use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::ChannelError;

/// How RIS elements are assigned to subsurfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    /// Contiguous blocks in raster order.
    Grouped,
    /// Round-robin in raster order (stride K for equal subsurfaces).
    Interleaved,
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Grouped => "grouped",
            Layout::Interleaved => "interleaved",
        })
    }
}

impl FromStr for Layout {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grouped" => Ok(Layout::Grouped),
            "interleaved" => Ok(Layout::Interleaved),
            other => Err(ChannelError::UnknownLayout(other.to_string())),
        }
    }
}

/// Departure/arrival angles of the LoS ray, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    /// θ_A, elevation at the BS.
    pub bs_elevation: f64,
    /// φ_A, azimuth at the BS.
    pub bs_azimuth: f64,
    /// θ_D, elevation at the RIS.
    pub ris_elevation: f64,
    /// φ_D, azimuth at the RIS.
    pub ris_azimuth: f64,
}

impl Default for Angles {
    fn default() -> Self {
        Self {
            bs_elevation: PI / 2.0,
            bs_azimuth: PI / 4.0,
            ris_elevation: PI / 2.0,
            ris_azimuth: 5.0 * PI / 4.0,
        }
    }
}

/// Array dimensions, spacings and link-level constants of one system.
///
/// The user count is the number of subsurfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub bs_x: usize,
    pub bs_z: usize,
    pub ris_x: usize,
    pub ris_z: usize,
    /// N_1..N_K, elements designed for each user.
    pub subsurface_sizes: Vec<usize>,
    /// BS antenna spacing, wavelengths.
    pub bs_spacing: f64,
    /// RIS element spacing, wavelengths.
    pub ris_spacing: f64,
    /// System bandwidth, Hz. Bookkeeping only: each user gets B/K.
    pub bandwidth_hz: f64,
    pub symbol_energy: f64,
    pub noise_variance: f64,
    pub layout: Layout,
    pub angles: Angles,
}

impl Default for SystemConfig {
    /// M = 8×4 = 32 BS antennas, N = 16×8 = 128 RIS elements, one user.
    fn default() -> Self {
        Self {
            bs_x: 8,
            bs_z: 4,
            ris_x: 16,
            ris_z: 8,
            subsurface_sizes: vec![128],
            bs_spacing: 0.5,
            ris_spacing: 0.5,
            bandwidth_hz: 100e6,
            symbol_energy: 1.0,
            noise_variance: 1.0,
            layout: Layout::Grouped,
            angles: Angles::default(),
        }
    }
}

/// One broken configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigViolation {
    EmptyArray(&'static str),
    NoUsers,
    EmptySubsurface { user: usize },
    SubsurfaceSizes { sum: usize, elements: usize },
    NonPositive { field: &'static str, value: f64 },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigViolation::EmptyArray(which) => write!(f, "{which} grid has a zero dimension"),
            ConfigViolation::NoUsers => write!(f, "at least one user is required"),
            ConfigViolation::EmptySubsurface { user } => {
                write!(f, "subsurface sizes: user {user} has no elements")
            }
            ConfigViolation::SubsurfaceSizes { sum, elements } => {
                write!(f, "subsurface sizes sum to {sum} but the RIS has {elements} elements")
            }
            ConfigViolation::NonPositive { field, value } => write!(f, "{field} must be positive, got {value}"),
        }
    }
}

impl SystemConfig {
    /// M, BS antenna count.
    pub fn m(&self) -> usize {
        self.bs_x * self.bs_z
    }

    /// N, RIS element count.
    pub fn n(&self) -> usize {
        self.ris_x * self.ris_z
    }

    /// K, user (and band) count.
    pub fn users(&self) -> usize {
        self.subsurface_sizes.len()
    }

    pub fn snr_scale(&self) -> f64 {
        self.symbol_energy / self.noise_variance
    }

    /// Same system with `k` users splitting the RIS as evenly as possible
    /// (earlier users take the remainder).
    pub fn with_users(&self, k: usize) -> Self {
        let mut cfg = self.clone();
        cfg.subsurface_sizes = equal_split(self.n(), k);
        cfg
    }

    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = Vec::new();
        if self.m() == 0 {
            out.push(ConfigViolation::EmptyArray("BS"));
        }
        if self.n() == 0 {
            out.push(ConfigViolation::EmptyArray("RIS"));
        }
        if self.subsurface_sizes.is_empty() {
            out.push(ConfigViolation::NoUsers);
        }
        for (user, &size) in self.subsurface_sizes.iter().enumerate() {
            if size == 0 {
                out.push(ConfigViolation::EmptySubsurface { user });
            }
        }
        let sum: usize = self.subsurface_sizes.iter().sum();
        if !self.subsurface_sizes.is_empty() && sum != self.n() {
            out.push(ConfigViolation::SubsurfaceSizes {
                sum,
                elements: self.n(),
            });
        }
        for (field, value) in [
            ("bs_spacing", self.bs_spacing),
            ("ris_spacing", self.ris_spacing),
            ("symbol_energy", self.symbol_energy),
            ("noise_variance", self.noise_variance),
        ] {
            if !(value > 0.0) {
                out.push(ConfigViolation::NonPositive { field, value });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ChannelError::InvalidConfig(violations))
        }
    }
}

pub fn equal_split(n: usize, k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Path-loss reference, link distances and exponents, and the Rician factor
/// of the BS-RIS link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// C₀, path loss at the reference distance, dB.
    pub ref_loss_db: f64,
    /// D₀, metres.
    pub ref_distance_m: f64,
    pub bs_ue_m: f64,
    pub bs_ris_m: f64,
    pub ris_ue_m: f64,
    pub alpha_direct: f64,
    pub alpha_bs_ris_los: f64,
    pub alpha_bs_ris_nlos: f64,
    pub alpha_ris_ue: f64,
    /// κ; `f64::INFINITY` for a pure LoS BS-RIS link.
    pub rician_factor: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            ref_loss_db: -30.0,
            ref_distance_m: 1.0,
            bs_ue_m: 45.0,
            bs_ris_m: 20.0,
            ris_ue_m: 30.0,
            alpha_direct: 3.5,
            alpha_bs_ris_los: 2.0,
            alpha_bs_ris_nlos: 3.5,
            alpha_ris_ue: 2.8,
            rician_factor: f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let cfg = SystemConfig::default();
        assert_eq!(cfg.m(), 32);
        assert_eq!(cfg.n(), 128);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn size_sum_mismatch_is_reported() {
        let mut cfg = SystemConfig::default();
        cfg.subsurface_sizes = vec![64, 63];
        let v = cfg.violations();
        assert_eq!(v, vec![ConfigViolation::SubsurfaceSizes { sum: 127, elements: 128 }]);
        assert!(v[0].to_string().contains("subsurface sizes"));
    }

    #[test]
    fn non_positive_noise_is_reported() {
        let mut cfg = SystemConfig::default();
        cfg.noise_variance = 0.0;
        assert!(matches!(cfg.violations()[0], ConfigViolation::NonPositive { field: "noise_variance", .. }));
    }

    #[test]
    fn equal_split_distributes_remainder() {
        assert_eq!(equal_split(128, 4), vec![32; 4]);
        assert_eq!(equal_split(10, 3), vec![4, 3, 3]);
        assert_eq!(SystemConfig::default().with_users(2).subsurface_sizes, vec![64, 64]);
    }

    #[test]
    fn layout_round_trips_through_strings() {
        for layout in [Layout::Grouped, Layout::Interleaved] {
            assert_eq!(layout.to_string().parse::<Layout>().unwrap(), layout);
        }
        assert!("diagonal".parse::<Layout>().is_err());
    }
}
