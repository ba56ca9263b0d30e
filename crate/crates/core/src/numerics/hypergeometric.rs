//! Gauss hypergeometric function ₂F₁(a, b; c; z) on 0 ≤ z ≤ 1.
//!
//! Inside the unit interval the power series is summed directly; at z = 1 the
//! Gauss summation theorem gives Γ(c)Γ(c−a−b) / (Γ(c−a)Γ(c−b)).

use super::{gamma, NumericsError, Real};

/// Absolute tolerance on the series tail.
pub const GAUSS_2F1_TOL: f64 = 1e-12;
/// Maximum number of series terms before giving up.
pub const GAUSS_2F1_TERM_CAP: usize = 1_000_000;

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.round()
}

pub fn gauss_2f1<T: Real>(a: T, b: T, c: T, z: T) -> Result<T, NumericsError> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(NumericsError::InvalidParams("non-finite argument".into()));
    }
    if is_nonpositive_integer(c) {
        return Err(NumericsError::InvalidParams(format!("c = {c} is a non-positive integer")));
    }
    if z < T::zero() || z > T::one() {
        return Err(NumericsError::InvalidParams(format!("z = {z} outside [0, 1]")));
    }
    if z == T::zero() {
        return Ok(T::one());
    }
    if z == T::one() {
        let excess = c - a - b;
        if excess <= T::zero() {
            return Err(NumericsError::InvalidParams(format!(
                "c - a - b = {excess} must be positive at z = 1"
            )));
        }
        return Ok(gamma(c) * gamma(excess) / (gamma(c - a) * gamma(c - b)));
    }

    let tol = T::lit(GAUSS_2F1_TOL);
    let ratio = |n: T| (a + n) * (b + n) / ((c + n) * (n + T::one())) * z;
    let mut term = T::one();
    let mut sum = T::one();
    for n in 0..GAUSS_2F1_TERM_CAP {
        let nf = T::lit(n as f64);
        term = term * ratio(nf);
        if term == T::zero() {
            // a or b is a non-positive integer: the series terminates
            return Ok(sum);
        }
        sum = sum + term;
        let rho = z.max(ratio(nf + T::one()).abs());
        if rho < T::one() {
            let tail = term.abs() * rho / (T::one() - rho);
            if tail <= tol.max(T::epsilon() * sum.abs()) {
                return Ok(sum);
            }
        }
    }
    Err(NumericsError::SeriesDiverged {
        terms: GAUSS_2F1_TERM_CAP,
    })
}
