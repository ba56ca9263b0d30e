use num_complex::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Real;

/// Reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's stream
/// counter, so every replicate owns an independent sequence that does not
/// depend on how replicates are scheduled across workers.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `n` i.i.d. CN(0, 1) samples: real and imaginary parts each N(0, 1/2).
pub fn sample_cn<T, R>(n: usize, rng: &mut R) -> Vec<Complex<T>>
where
    T: Real,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let scale = T::FRAC_1_SQRT_2();
    (0..n)
        .map(|_| {
            let re: T = StandardNormal.sample(rng);
            let im: T = StandardNormal.sample(rng);
            Complex::new(re * scale, im * scale)
        })
        .collect()
}

/// Unit-modulus `e^{jθ}` with θ uniform on [0, 2π).
pub fn uniform_phase<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T>
where
    rand::distr::StandardUniform: Distribution<T>,
{
    let u: T = rng.random();
    Complex::from_polar(T::one(), T::TAU() * u)
}
