use super::SimError;

/// Percent levels reported by [`cdf_summary`].
pub const QUANTILE_LEVELS: [u32; 9] = [1, 5, 10, 25, 50, 75, 90, 95, 99];

/// Empirical quantiles at [`QUANTILE_LEVELS`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles(pub [f64; 9]);

impl Quantiles {
    pub fn median(&self) -> f64 {
        self.0[4]
    }

    pub fn at(&self, percent: u32) -> Option<f64> {
        QUANTILE_LEVELS.iter().position(|&p| p == percent).map(|i| self.0[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        QUANTILE_LEVELS.iter().copied().zip(self.0.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single sample.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub quantiles: Quantiles,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Result<Self, SimError> {
        let quantiles = cdf_summary(samples)?;
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let (min, max) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        Ok(Self {
            count: samples.len(),
            mean,
            variance,
            min,
            max,
            quantiles,
        })
    }
}

/// Linear-interpolation quantile on sorted data (`h = (n−1)p`), so the median
/// of an even sample is the midpoint of the two central values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn cdf_summary(samples: &[f64]) -> Result<Quantiles, SimError> {
    if samples.is_empty() {
        return Err(SimError::Empty);
    }
    if let Some(&x) = samples.iter().find(|x| x.is_nan()) {
        return Err(SimError::InvalidSample(x));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = [0.0; 9];
    for (o, &p) in out.iter_mut().zip(&QUANTILE_LEVELS) {
        *o = quantile_sorted(&sorted, p as f64 / 100.0);
    }
    Ok(Quantiles(out))
}
