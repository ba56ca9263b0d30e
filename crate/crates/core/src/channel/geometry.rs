use std::f64::consts::PI;

use crate::numerics::ComplexMatrix;
use crate::{CMatrix, Complex64};

use super::{ChannelError, Layout, SystemConfig};

/// Distance-based path loss `C₀ (d / D₀)^(−α)` as a linear power gain.
pub fn path_loss(distance_m: f64, alpha: f64, ref_loss_db: f64, ref_distance_m: f64) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0) {
        return Err(ChannelError::NonpositiveDistance(distance_m));
    }
    if !(ref_distance_m > 0.0) {
        return Err(ChannelError::NonpositiveDistance(ref_distance_m));
    }
    let c0 = 10f64.powf(ref_loss_db / 10.0);
    Ok(c0 * (distance_m / ref_distance_m).powf(-alpha))
}

/// Positions of an `nx × nz` planar grid in the x-z plane, wavelengths,
/// in raster order (index `ix * nz + iz`, z fastest) to match `a_x ⊗ a_z`.
pub fn grid_positions(nx: usize, nz: usize, spacing: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(nx * nz);
    for ix in 0..nx {
        for iz in 0..nz {
            out.push([ix as f64 * spacing, iz as f64 * spacing]);
        }
    }
    out
}

/// Normalised sinc, `sin(πx) / (πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Isotropic-scattering correlation `R_nm = sinc(2 d_nm)` for element
/// positions given in wavelengths.
pub fn sinc_correlation(positions: &[[f64; 2]]) -> Result<CMatrix, ChannelError> {
    let n = positions.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = positions[i][0] - positions[j][0];
            let dz = positions[i][1] - positions[j][1];
            let d = dx.hypot(dz);
            if d == 0.0 {
                return Err(ChannelError::DuplicatePositions(i, j));
            }
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    Ok(ComplexMatrix::from_real(n, n, |i, j| if i == j { 1.0 } else { sinc(2.0 * dist[i * n + j]) }))
}

/// Uniform planar-array response, `a_x ⊗ a_z`.
pub fn upa_steering(nx: usize, nz: usize, spacing: f64, elevation: f64, azimuth: f64) -> Vec<Complex64> {
    let kx = 2.0 * PI * spacing * elevation.sin() * azimuth.sin();
    let kz = 2.0 * PI * spacing * elevation.cos();
    let ax: Vec<Complex64> = (0..nx).map(|i| Complex64::from_polar(1.0, kx * i as f64)).collect();
    let az: Vec<Complex64> = (0..nz).map(|i| Complex64::from_polar(1.0, kz * i as f64)).collect();
    let mut out = Vec::with_capacity(nx * nz);
    for x in &ax {
        for z in &az {
            out.push(x * z);
        }
    }
    out
}

/// BS and RIS steering vectors `(a_b, a_r)` of the LoS BS-RIS ray.
pub fn steering_vectors(cfg: &SystemConfig) -> (Vec<Complex64>, Vec<Complex64>) {
    let a = &cfg.angles;
    let a_b = upa_steering(cfg.bs_x, cfg.bs_z, cfg.bs_spacing, a.bs_elevation, a.bs_azimuth);
    let a_r = upa_steering(cfg.ris_x, cfg.ris_z, cfg.ris_spacing, a.ris_elevation, a.ris_azimuth);
    (a_b, a_r)
}

/// Element-to-user assignment over the RIS grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementLayout {
    blocks: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl ElementLayout {
    /// Element indices (ascending, raster order) owned by `user`.
    pub fn block(&self, user: usize) -> &[usize] {
        &self.blocks[user]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn owner(&self, element: usize) -> usize {
        self.owner[element]
    }

    pub fn users(&self) -> usize {
        self.blocks.len()
    }

    pub fn elements(&self) -> usize {
        self.owner.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Gathers the entries of `full` that belong to `user`.
    pub fn gather<T: Copy>(&self, full: &[T], user: usize) -> Vec<T> {
        self.blocks[user].iter().map(|&i| full[i]).collect()
    }

    /// Inverse of [`gather`](Self::gather) over all users.
    pub fn scatter<T: Copy + Default>(&self, parts: &[Vec<T>]) -> Vec<T> {
        let mut out = vec![T::default(); self.owner.len()];
        for (block, part) in self.blocks.iter().zip(parts) {
            for (&i, &v) in block.iter().zip(part) {
                out[i] = v;
            }
        }
        out
    }
}

/// Assigns RIS elements to users according to `cfg.layout`.
pub fn make_layout(cfg: &SystemConfig) -> Result<ElementLayout, ChannelError> {
    layout_for(cfg.n(), &cfg.subsurface_sizes, cfg.layout)
}

pub fn layout_for(n: usize, sizes: &[usize], layout: Layout) -> Result<ElementLayout, ChannelError> {
    let total: usize = sizes.iter().sum();
    if sizes.is_empty() || total != n || sizes.contains(&0) {
        return Err(ChannelError::SizeMismatch {
            sizes: sizes.to_vec(),
            elements: n,
        });
    }
    let k = sizes.len();
    let mut blocks: Vec<Vec<usize>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    let mut owner = vec![0; n];
    match layout {
        Layout::Grouped => {
            let mut next = 0;
            for (user, &size) in sizes.iter().enumerate() {
                for i in next..next + size {
                    blocks[user].push(i);
                    owner[i] = user;
                }
                next += size;
            }
        }
        Layout::Interleaved => {
            let mut user = 0;
            for (i, slot) in owner.iter_mut().enumerate() {
                while blocks[user].len() == sizes[user] {
                    user = (user + 1) % k;
                }
                blocks[user].push(i);
                *slot = user;
                user = (user + 1) % k;
            }
        }
    }
    Ok(ElementLayout { blocks, owner })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_loss_reference_points() {
        assert!((path_loss(1.0, 2.8, -30.0, 1.0).unwrap() - 1e-3).abs() < 1e-15);
        assert!((path_loss(10.0, 2.0, -30.0, 1.0).unwrap() - 1e-5).abs() < 1e-18);
        // 100 m at α = 2.8: −30 − 28·2 = −86 dB
        let db = 10.0 * path_loss(100.0, 2.8, -30.0, 1.0).unwrap().log10();
        assert!((db + 86.0).abs() < 1e-10);
    }

    #[test]
    fn path_loss_rejects_nonpositive_distance() {
        assert_eq!(path_loss(0.0, 2.0, -30.0, 1.0), Err(ChannelError::NonpositiveDistance(0.0)));
        assert!(path_loss(-3.0, 2.0, -30.0, 1.0).is_err());
    }

    #[test]
    fn sinc_correlation_values() {
        let r = sinc_correlation(&[[0.0, 0.0], [0.5, 0.0], [0.0, 0.25]]).unwrap();
        assert_eq!(r[(0, 0)].re, 1.0);
        assert!(r[(0, 1)].re.abs() < 1e-15);
        assert!((r[(0, 2)].re - 2.0 / PI).abs() < 1e-15);
        assert_eq!(r.hermitian_deviation(), 0.0);
    }

    #[test]
    fn sinc_correlation_rejects_duplicates() {
        assert_eq!(
            sinc_correlation(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]).unwrap_err(),
            ChannelError::DuplicatePositions(0, 2)
        );
    }

    #[test]
    fn broadside_elevation_gives_flat_z_component() {
        let a = upa_steering(1, 5, 0.5, PI / 2.0, 1.0);
        for z in a {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn single_antenna_steering_is_one() {
        let mut cfg = SystemConfig::default();
        cfg.bs_x = 1;
        cfg.bs_z = 1;
        let (a_b, _) = steering_vectors(&cfg);
        assert_eq!(a_b, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn steering_norm_equals_length() {
        let mut cfg = SystemConfig::default();
        cfg.angles.bs_elevation = 0.9;
        cfg.angles.bs_azimuth = 2.1;
        let (a_b, a_r) = steering_vectors(&cfg);
        assert!((crate::numerics::norm_sqr(&a_b) - 32.0).abs() < 1e-12);
        assert!((crate::numerics::norm_sqr(&a_r) - 128.0).abs() < 1e-12);
    }

    #[test]
    fn grouped_and_interleaved_small_cases() {
        let grouped = layout_for(4, &[2, 2], Layout::Grouped).unwrap();
        assert_eq!(grouped.blocks(), &[vec![0, 1], vec![2, 3]]);
        let inter = layout_for(4, &[2, 2], Layout::Interleaved).unwrap();
        assert_eq!(inter.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!(
            layout_for(5, &[5], Layout::Grouped).unwrap(),
            layout_for(5, &[5], Layout::Interleaved).unwrap()
        );
    }

    #[test]
    fn interleaving_handles_unequal_sizes() {
        let l = layout_for(5, &[3, 2], Layout::Interleaved).unwrap();
        assert_eq!(l.blocks(), &[vec![0, 2, 4], vec![1, 3]]);
        let l = layout_for(4, &[3, 1], Layout::Interleaved).unwrap();
        assert_eq!(l.blocks(), &[vec![0, 2, 3], vec![1]]);
    }

    #[test]
    fn layout_rejects_bad_sizes() {
        assert!(matches!(layout_for(4, &[2, 1], Layout::Grouped), Err(ChannelError::SizeMismatch { .. })));
        assert!(layout_for(4, &[4, 0], Layout::Grouped).is_err());
    }

    #[test]
    fn gather_scatter_round_trip() {
        let l = layout_for(6, &[2, 2, 2], Layout::Interleaved).unwrap();
        let full: Vec<usize> = (10..16).collect();
        let parts: Vec<Vec<usize>> = (0..3).map(|u| l.gather(&full, u)).collect();
        assert_eq!(l.scatter(&parts), full);
        for u in 0..3 {
            for &i in l.block(u) {
                assert_eq!(l.owner(i), u);
            }
        }
    }
}
