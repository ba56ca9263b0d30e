use std::sync::Arc;

use rand::Rng;

use crate::numerics::{psd_sqrt, sample_cn, ComplexMatrix};
use crate::{CMatrix, Complex64};

use super::{
    grid_positions, make_layout, path_loss, sinc_correlation, steering_vectors, ChannelError, ElementLayout,
    LinkBudget, SystemConfig,
};

/// Eigenvalue clip tolerance for correlation square roots.
pub const CORRELATION_CLIP_TOL: f64 = 1e-10;

/// Linear power gains of one user's links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserGains {
    pub beta_d: f64,
    pub beta_ru: f64,
    /// BS-RIS gain applied to the LoS component.
    pub beta_br_los: f64,
    /// BS-RIS gain applied to the scattered component.
    pub beta_br_nlos: f64,
}

/// Gains, correlation matrices and Rician factor for every user.
///
/// Correlations are frequency-flat: every band sees the same `R_d`, `R_ru`,
/// `R_b` and `R_r`, and `R_ru` spans the full N-element grid so that
/// per-subsurface blocks can be sliced out of it.
#[derive(Debug, Clone)]
pub struct ChannelModelParams {
    pub users: Vec<UserGains>,
    /// UE-BS correlation at the BS, M×M.
    pub r_d: CMatrix,
    /// UE-RIS correlation at the RIS, N×N.
    pub r_ru: CMatrix,
    /// BS-RIS correlation at the BS end, M×M.
    pub r_b: CMatrix,
    /// BS-RIS correlation at the RIS end, N×N.
    pub r_r: CMatrix,
    /// κ; infinite for pure LoS.
    pub rician_factor: f64,
}

impl ChannelModelParams {
    /// Builds gains from the path-loss model and correlations from the sinc
    /// model over the configured array grids.
    pub fn from_budget(cfg: &SystemConfig, budget: &LinkBudget) -> Result<Self, ChannelError> {
        if !(budget.rician_factor >= 0.0) {
            return Err(ChannelError::InvalidRicianFactor(budget.rician_factor));
        }
        let pl = |d: f64, alpha: f64| path_loss(d, alpha, budget.ref_loss_db, budget.ref_distance_m);
        let gains = UserGains {
            beta_d: pl(budget.bs_ue_m, budget.alpha_direct)?,
            beta_ru: pl(budget.ris_ue_m, budget.alpha_ris_ue)?,
            beta_br_los: pl(budget.bs_ris_m, budget.alpha_bs_ris_los)?,
            beta_br_nlos: pl(budget.bs_ris_m, budget.alpha_bs_ris_nlos)?,
        };
        let bs = sinc_correlation(&grid_positions(cfg.bs_x, cfg.bs_z, cfg.bs_spacing))?;
        let ris = sinc_correlation(&grid_positions(cfg.ris_x, cfg.ris_z, cfg.ris_spacing))?;
        Ok(Self {
            users: vec![gains; cfg.users()],
            r_d: bs.clone(),
            r_ru: ris.clone(),
            r_b: bs,
            r_r: ris,
            rician_factor: budget.rician_factor,
        })
    }

    pub fn is_los(&self) -> bool {
        self.rician_factor.is_infinite()
    }

    /// Weights of the LoS and scattered BS-RIS components.
    pub fn rician_weights(&self) -> (f64, f64) {
        let k = self.rician_factor;
        if k.is_infinite() {
            (1.0, 0.0)
        } else {
            ((k / (1.0 + k)).sqrt(), (1.0 / (1.0 + k)).sqrt())
        }
    }

    /// Checks gains and correlation matrices against the model invariants.
    pub fn violations(&self, cfg: &SystemConfig) -> Vec<String> {
        let mut out = Vec::new();
        if self.users.len() != cfg.users() {
            out.push(format!("{} user gain sets for {} users", self.users.len(), cfg.users()));
        }
        for (k, g) in self.users.iter().enumerate() {
            for (name, v) in [
                ("beta_d", g.beta_d),
                ("beta_ru", g.beta_ru),
                ("beta_br_los", g.beta_br_los),
                ("beta_br_nlos", g.beta_br_nlos),
            ] {
                if !(v > 0.0) {
                    out.push(format!("user {k}: {name} must be positive, got {v}"));
                }
            }
        }
        if !(self.rician_factor >= 0.0) {
            out.push(format!("rician factor must be >= 0, got {}", self.rician_factor));
        }
        for (name, r, dim) in [
            ("R_d", &self.r_d, cfg.m()),
            ("R_ru", &self.r_ru, cfg.n()),
            ("R_b", &self.r_b, cfg.m()),
            ("R_r", &self.r_r, cfg.n()),
        ] {
            if r.rows() != dim || r.cols() != dim {
                out.push(format!("{name} is {}x{}, expected {dim}x{dim}", r.rows(), r.cols()));
                continue;
            }
            if r.diagonal().iter().any(|d| (d.re - 1.0).abs() > 1e-10 || d.im.abs() > 1e-10) {
                out.push(format!("{name} must have unit diagonal"));
            }
            if let Err(e) = psd_sqrt(r, CORRELATION_CLIP_TOL) {
                out.push(format!("{name}: {e}"));
            }
        }
        out
    }
}

/// Square-root correlation factor, kept real when the correlation is real.
#[derive(Debug, Clone)]
enum Factor {
    Real { n: usize, data: Vec<f64> },
    Complex(CMatrix),
}

impl Factor {
    fn new(r: &CMatrix) -> Result<Self, ChannelError> {
        let s = psd_sqrt(r, CORRELATION_CLIP_TOL)?;
        Ok(if s.is_real() {
            Factor::Real {
                n: s.rows(),
                data: s.as_slice().iter().map(|z| z.re).collect(),
            }
        } else {
            Factor::Complex(s)
        })
    }

    fn to_matrix(&self) -> CMatrix {
        match self {
            Factor::Real { n, data } => ComplexMatrix::from_real(*n, *n, |i, j| data[i * n + j]),
            Factor::Complex(s) => s.clone(),
        }
    }

    /// `S x` scaled by `scale`.
    fn apply(&self, x: &[Complex64], scale: f64) -> Vec<Complex64> {
        match self {
            Factor::Real { n, data } => (0..*n)
                .map(|i| {
                    let row = &data[i * n..(i + 1) * n];
                    row.iter().zip(x).fold(Complex64::new(0.0, 0.0), |acc, (a, z)| acc + z * *a) * scale
                })
                .collect(),
            Factor::Complex(s) => s.mul_vec(x).into_iter().map(|z| z * scale).collect(),
        }
    }

    /// `S X`.
    fn left_mul(&self, x: &CMatrix) -> CMatrix {
        match self {
            Factor::Real { n, data } => {
                let cols = x.cols();
                let mut out = vec![Complex64::new(0.0, 0.0); n * cols];
                for i in 0..*n {
                    let dst = &mut out[i * cols..(i + 1) * cols];
                    for k in 0..*n {
                        let a = data[i * n + k];
                        if a == 0.0 {
                            continue;
                        }
                        for (o, z) in dst.iter_mut().zip(x.row(k)) {
                            *o += z * a;
                        }
                    }
                }
                ComplexMatrix::from_row_major(*n, cols, out)
            }
            Factor::Complex(s) => s.matmul(x),
        }
    }

    /// `X S`.
    fn right_mul(&self, x: &CMatrix) -> CMatrix {
        match self {
            Factor::Real { n, data } => {
                let rows = x.rows();
                let mut out = vec![Complex64::new(0.0, 0.0); rows * n];
                for i in 0..rows {
                    let dst = &mut out[i * n..(i + 1) * n];
                    for (k, z) in x.row(i).iter().enumerate() {
                        let src = &data[k * n..(k + 1) * n];
                        for (o, a) in dst.iter_mut().zip(src) {
                            *o += z * *a;
                        }
                    }
                }
                ComplexMatrix::from_row_major(rows, *n, out)
            }
            Factor::Complex(s) => x.matmul(s),
        }
    }
}

/// Channels of one user in its own band.
#[derive(Debug, Clone)]
pub struct UserRealization {
    /// h_d,k, M.
    pub h_d: Vec<Complex64>,
    /// h_ru,k over the full RIS, N.
    pub h_ru: Vec<Complex64>,
    /// H_br,k over the full RIS, M×N.
    pub h_br: CMatrix,
}

/// One draw of every user's channels plus the shared steering vectors and
/// element layout.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub users: Vec<UserRealization>,
    pub a_b: Arc<Vec<Complex64>>,
    pub a_r: Arc<Vec<Complex64>>,
    pub layout: Arc<ElementLayout>,
}

impl ChannelRealization {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// h_ru,k,t: user k's RIS channel on subsurface t.
    pub fn h_ru_block(&self, k: usize, t: usize) -> Vec<Complex64> {
        self.layout.gather(&self.users[k].h_ru, t)
    }

    /// H_br,k,t: user k's BS-RIS channel restricted to subsurface t.
    pub fn h_br_block(&self, k: usize, t: usize) -> CMatrix {
        self.users[k].h_br.select_columns(self.layout.block(t))
    }

    /// a_r,t: RIS steering vector restricted to subsurface t.
    pub fn a_r_block(&self, t: usize) -> Vec<Complex64> {
        self.layout.gather(&self.a_r, t)
    }
}

/// Precomputed model state: correlation square roots, steering vectors and
/// element layout. Sampling is pure given the random stream.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    cfg: SystemConfig,
    params: ChannelModelParams,
    layout: Arc<ElementLayout>,
    a_b: Arc<Vec<Complex64>>,
    a_r: Arc<Vec<Complex64>>,
    los: CMatrix,
    sqrt_d: Factor,
    sqrt_ru: Factor,
    sqrt_b: Factor,
    sqrt_r: Factor,
}

impl ChannelModel {
    pub fn new(cfg: &SystemConfig, params: ChannelModelParams) -> Result<Self, ChannelError> {
        cfg.validate()?;
        let problems = params.violations(cfg);
        if !problems.is_empty() {
            return Err(ChannelError::InvalidParams(problems));
        }
        let layout = Arc::new(make_layout(cfg)?);
        let (a_b, a_r) = steering_vectors(cfg);
        let los = ComplexMatrix::outer(&a_b, &a_r);
        Ok(Self {
            cfg: cfg.clone(),
            sqrt_d: Factor::new(&params.r_d)?,
            sqrt_ru: Factor::new(&params.r_ru)?,
            sqrt_b: Factor::new(&params.r_b)?,
            sqrt_r: Factor::new(&params.r_r)?,
            params,
            layout,
            a_b: Arc::new(a_b),
            a_r: Arc::new(a_r),
            los,
        })
    }

    /// Convenience: path-loss gains and sinc correlations from a link budget.
    pub fn from_budget(cfg: &SystemConfig, budget: &LinkBudget) -> Result<Self, ChannelError> {
        Self::new(cfg, ChannelModelParams::from_budget(cfg, budget)?)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ChannelModelParams {
        &self.params
    }

    pub fn layout(&self) -> &Arc<ElementLayout> {
        &self.layout
    }

    pub fn a_b(&self) -> &[Complex64] {
        &self.a_b
    }

    pub fn a_r(&self) -> &[Complex64] {
        &self.a_r
    }

    /// R_d^{1/2}, the same factor used for sampling.
    pub fn sqrt_r_d(&self) -> CMatrix {
        self.sqrt_d.to_matrix()
    }

    /// Draws every user's channels.
    ///
    /// Per user the draw order is u_d, u_ru, then U_br when κ is finite.
    pub fn sample_realization<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let m = self.cfg.m();
        let n = self.cfg.n();
        let (w_los, w_nlos) = self.params.rician_weights();
        let users = self
            .params
            .users
            .iter()
            .map(|g| {
                let h_d = self.sqrt_d.apply(&sample_cn(m, rng), g.beta_d.sqrt());
                let h_ru = self.sqrt_ru.apply(&sample_cn(n, rng), g.beta_ru.sqrt());
                let los = self.los.scale(w_los * g.beta_br_los.sqrt());
                let h_br = if w_nlos == 0.0 {
                    los
                } else {
                    let u = ComplexMatrix::from_row_major(m, n, sample_cn(m * n, rng));
                    let scattered = self.sqrt_r.right_mul(&self.sqrt_b.left_mul(&u));
                    let scattered = scattered.scale(w_nlos * g.beta_br_nlos.sqrt());
                    if w_los == 0.0 {
                        scattered
                    } else {
                        los.add(&scattered)
                    }
                };
                UserRealization { h_d, h_ru, h_br }
            })
            .collect();
        ChannelRealization {
            users,
            a_b: Arc::clone(&self.a_b),
            a_r: Arc::clone(&self.a_r),
            layout: Arc::clone(&self.layout),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Layout;
    use crate::numerics::{leading_singular_pair, norm_sqr, RngStream};

    fn small_cfg(users: usize, layout: Layout) -> SystemConfig {
        let mut cfg = SystemConfig {
            bs_x: 2,
            bs_z: 2,
            ris_x: 4,
            ris_z: 2,
            ris_spacing: 0.2,
            layout,
            ..SystemConfig::default()
        };
        cfg.subsurface_sizes = crate::channel::equal_split(cfg.n(), users);
        cfg
    }

    #[test]
    fn los_channel_is_rank_one_outer_product() {
        let cfg = small_cfg(2, Layout::Grouped);
        let model = ChannelModel::from_budget(&cfg, &LinkBudget::default()).unwrap();
        let real = model.sample_realization(&mut RngStream::new(3, 0));
        let beta = model.params().users[0].beta_br_los;
        let expected = ComplexMatrix::outer(model.a_b(), model.a_r()).scale(beta.sqrt());
        for user in &real.users {
            assert!(user.h_br.sub(&expected).max_abs() < 1e-15);
        }
        // leading singular value of each block is √(β M N_k)
        for t in 0..2 {
            let block = real.h_br_block(0, t);
            let pair = leading_singular_pair(&block).unwrap();
            let nk = cfg.subsurface_sizes[t] as f64;
            assert!((pair.sigma - (beta * cfg.m() as f64 * nk).sqrt()).abs() < 1e-9 * pair.sigma);
            let gram = block.adjoint().matmul(&block);
            let eig = crate::numerics::hermitian_eigen(&gram).unwrap();
            // all but one eigenvalue vanish
            assert!(eig.values[..eig.values.len() - 1].iter().all(|v| v.abs() < 1e-9 * pair.sigma * pair.sigma));
        }
    }

    #[test]
    fn pure_nlos_and_mixture_weights() {
        let mut budget = LinkBudget::default();
        budget.rician_factor = 0.0;
        let cfg = small_cfg(1, Layout::Grouped);
        let p = ChannelModelParams::from_budget(&cfg, &budget).unwrap();
        assert_eq!(p.rician_weights(), (0.0, 1.0));
        budget.rician_factor = 1.0;
        let p = ChannelModelParams::from_budget(&cfg, &budget).unwrap();
        let (a, b) = p.rician_weights();
        assert!((a * a + b * b - 1.0).abs() < 1e-15 && (a - b).abs() < 1e-15);
        budget.rician_factor = -1.0;
        assert!(ChannelModelParams::from_budget(&cfg, &budget).is_err());
    }

    #[test]
    fn blocks_reassemble_full_channel() {
        for layout in [Layout::Grouped, Layout::Interleaved] {
            let mut budget = LinkBudget::default();
            budget.rician_factor = 1.0;
            let cfg = small_cfg(2, layout);
            let model = ChannelModel::from_budget(&cfg, &budget).unwrap();
            let real = model.sample_realization(&mut RngStream::new(5, 1));
            let parts: Vec<Vec<Complex64>> = (0..2).map(|t| real.h_ru_block(1, t)).collect();
            assert_eq!(real.layout.scatter(&parts), real.users[1].h_ru);
            for t in 0..2 {
                let block = real.h_br_block(1, t);
                for (j, &col) in real.layout.block(t).iter().enumerate() {
                    assert_eq!(block.column(j), real.users[1].h_br.column(col));
                }
                assert!((norm_sqr(&real.a_r_block(t)) - cfg.subsurface_sizes[t] as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn direct_channel_energy_matches_gain() {
        let cfg = SystemConfig::default();
        let model = ChannelModel::from_budget(&cfg, &LinkBudget::default()).unwrap();
        let beta = model.params().users[0].beta_d;
        let draws = 10_000;
        let mut acc = 0.0;
        for r in 0..draws {
            let real = model.sample_realization(&mut RngStream::new(11, r));
            acc += norm_sqr(&real.users[0].h_d);
        }
        let mean = acc / draws as f64;
        let expected = beta * cfg.m() as f64;
        assert!((mean - expected).abs() < 0.03 * expected, "{mean} vs {expected}");
    }

    #[test]
    fn ris_channel_covariance_matches_correlation() {
        let cfg = small_cfg(1, Layout::Grouped);
        let model = ChannelModel::from_budget(&cfg, &LinkBudget::default()).unwrap();
        let beta = model.params().users[0].beta_ru;
        let n = cfg.n();
        let draws = 10_000;
        let mut cov = ComplexMatrix::<f64>::zeros(n, n);
        for r in 0..draws {
            let real = model.sample_realization(&mut RngStream::new(13, r));
            let h: Vec<Complex64> = real.users[0].h_ru.iter().map(|z| z / beta.sqrt()).collect();
            cov = cov.add(&ComplexMatrix::outer(&h, &h));
        }
        let cov = cov.scale(1.0 / draws as f64);
        assert!(cov.sub(&model.params().r_ru).max_abs() <= 0.05);
    }

    #[test]
    fn sinc_correlations_have_square_roots() {
        for spacing in [0.05, 0.1, 0.25, 0.5] {
            let mut cfg = SystemConfig::default();
            cfg.ris_spacing = spacing;
            let p = ChannelModelParams::from_budget(&cfg, &LinkBudget::default()).unwrap();
            assert!(psd_sqrt(&p.r_ru, CORRELATION_CLIP_TOL).is_ok(), "spacing {spacing}");
        }
    }

    #[test]
    fn injected_negative_eigenvalue_is_reported() {
        let cfg = small_cfg(1, Layout::Grouped);
        let mut p = ChannelModelParams::from_budget(&cfg, &LinkBudget::default()).unwrap();
        // R - 1.1 v v† with v the top eigenvector pushes one eigenvalue below zero
        let eig = crate::numerics::hermitian_eigen(&p.r_d).unwrap();
        let top = eig.values.len() - 1;
        let v = eig.vectors.column(top);
        let shift = ComplexMatrix::outer(&v, &v).scale(eig.values[top] + 0.1);
        p.r_d = p.r_d.sub(&shift);
        let problems = p.violations(&cfg);
        assert!(problems.iter().any(|s| s.contains("indefinite")), "{problems:?}");
        assert!(matches!(ChannelModel::new(&cfg, p), Err(ChannelError::InvalidParams(_))));
    }
}
