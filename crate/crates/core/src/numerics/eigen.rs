//! Hermitian eigen-decomposition and the factorisations built on it.
//!
//! Real symmetric input goes through Householder tridiagonalisation followed
//! by implicit QL; genuinely complex Hermitian input goes through cyclic
//! Jacobi rotations. Both return eigenvalues in ascending order.

use num_complex::Complex;
use num_traits::Zero;

use super::{norm, ComplexMatrix, NumericsError, Real};

#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Eigenvalues, ascending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix<T>,
}

#[derive(Debug, Clone)]
pub struct SingularPair<T> {
    pub sigma: T,
    pub u: Vec<Complex<T>>,
    pub v: Vec<Complex<T>>,
}

const MAX_JACOBI_SWEEPS: usize = 64;

fn hermitian_tolerance<T: Real>(a: &ComplexMatrix<T>) -> T {
    let base = T::lit(1e-10).max(T::lit(128.0) * T::epsilon());
    base * T::one().max(a.max_abs())
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn hermitian_eigen<T: Real>(a: &ComplexMatrix<T>) -> Result<HermitianEigen<T>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let deviation = a.hermitian_deviation();
    if deviation > hermitian_tolerance(a) {
        return Err(NumericsError::NotHermitian {
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
        });
    }
    if a.rows() == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    if a.is_real() {
        symmetric_ql(a)
    } else {
        jacobi(a)
    }
}

/// Hermitian square root `S = V diag(√λ) V†` of a positive semidefinite
/// matrix, so that `S S† = R`. Eigenvalues within `clip_tol` of zero
/// (including negatives down to `-clip_tol`) are treated as exact zeros.
pub fn psd_sqrt<T: Real>(r: &ComplexMatrix<T>, clip_tol: T) -> Result<ComplexMatrix<T>, NumericsError> {
    let eig = hermitian_eigen(r)?;
    let n = r.rows();
    if let Some(&lowest) = eig.values.first() {
        if lowest < -clip_tol {
            return Err(NumericsError::IndefiniteMatrix {
                eigenvalue: lowest.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let roots: Vec<T> = eig
        .values
        .iter()
        .map(|&l| if l <= clip_tol { T::zero() } else { l.sqrt() })
        .collect();
    let v = &eig.vectors;
    let mut s = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex::zero();
            for (k, root) in roots.iter().enumerate() {
                if *root == T::zero() {
                    continue;
                }
                acc = acc + v[(i, k)] * v[(j, k)].conj() * *root;
            }
            s[(i, j)] = acc;
            s[(j, i)] = acc.conj();
        }
        s[(i, i)].im = T::zero();
    }
    Ok(s)
}

/// Leading singular triple of `a`, computed from the Hermitian
/// eigen-decomposition of the smaller Gram matrix (`a† a` or `a a†`).
///
/// The phase of `v` is fixed so that its first non-negligible component is
/// real and positive; `u` is rotated with it so `a v = σ u` still holds.
pub fn leading_singular_pair<T: Real>(a: &ComplexMatrix<T>) -> Result<SingularPair<T>, NumericsError> {
    if a.rows() == 0 || a.cols() == 0 || a.is_zero() {
        return Err(NumericsError::ZeroMatrix);
    }
    let (sigma, mut u, mut v);
    if a.cols() <= a.rows() {
        let gram = a.adjoint().matmul(a);
        let eig = hermitian_eigen(&gram)?;
        let top = eig.values.len() - 1;
        let lambda = eig.values[top].max(T::zero());
        if lambda == T::zero() {
            return Err(NumericsError::ZeroMatrix);
        }
        sigma = lambda.sqrt();
        v = eig.vectors.column(top);
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z = *z / nv);
        u = a.mul_vec(&v);
        let nu = norm(&u);
        u.iter_mut().for_each(|z| *z = *z / nu);
    } else {
        let gram = a.matmul(&a.adjoint());
        let eig = hermitian_eigen(&gram)?;
        let top = eig.values.len() - 1;
        let lambda = eig.values[top].max(T::zero());
        if lambda == T::zero() {
            return Err(NumericsError::ZeroMatrix);
        }
        sigma = lambda.sqrt();
        u = eig.vectors.column(top);
        let nu = norm(&u);
        u.iter_mut().for_each(|z| *z = *z / nu);
        v = a.adjoint_mul_vec(&u);
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z = *z / nv);
    }
    let peak = v.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let threshold = peak * T::lit(1e-8);
    if let Some(first) = v.iter().find(|z| z.norm() > threshold).copied() {
        let rot = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z = *z * rot);
        u.iter_mut().for_each(|z| *z = *z * rot);
        // exact zero imaginary part on the reference entry
        if let Some(z) = v.iter_mut().find(|z| z.norm() > threshold) {
            *z = Complex::new(z.norm(), T::zero());
        }
    }
    Ok(SingularPair { sigma, u, v })
}

/// Cyclic Jacobi for complex Hermitian matrices.
fn jacobi<T: Real>(input: &ComplexMatrix<T>) -> Result<HermitianEigen<T>, NumericsError> {
    let n = input.rows();
    let mut a = input.clone();
    for i in 0..n {
        a[(i, i)].im = T::zero();
    }
    let mut v = ComplexMatrix::<T>::identity(n);
    let scale = a.frobenius_norm();
    let target = (T::epsilon() * scale) * (T::epsilon() * scale);

    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[(p, q)].norm_sqr();
            }
        }
        if off + off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // negligible relative to both diagonals: drop it
                if mag <= T::epsilon() * T::epsilon() * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    continue;
                }
                let w = b / mag;
                let theta = (aqq - app) / (mag + mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let wc = w.conj();

                // A <- A U, V <- V U with U = [[c, s], [-s w*, c w*]]
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - wc * aiq * s;
                    a[(i, q)] = aip * s + wc * aiq * c;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - wc * viq * s;
                    v[(i, q)] = vip * s + wc * viq * c;
                }
                // A <- U† A
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - w * aqj * s;
                    a[(q, j)] = apj * s + w * aqj * c;
                }
                a[(p, p)] = Complex::new(app - t * mag, T::zero());
                a[(q, q)] = Complex::new(aqq + t * mag, T::zero());
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
            }
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence);
    }
    let values: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok(sorted(values, &v))
}

fn sorted<T: Real>(values: Vec<T>, vectors: &ComplexMatrix<T>) -> HermitianEigen<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    HermitianEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: vectors.select_columns(&order),
    }
}

/// Householder tridiagonalisation plus implicit QL for real symmetric input.
fn symmetric_ql<T: Real>(input: &ComplexMatrix<T>) -> Result<HermitianEigen<T>, NumericsError> {
    let n = input.rows();
    let mut v: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| input[(i, j)].re).collect()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;
    let vectors = ComplexMatrix::from_real(n, n, |i, j| v[i][j]);
    Ok(sorted(d, &vectors))
}

fn tridiagonalize<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g = g + v[k][j] * d[k];
                    e[k] = e[k] + v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] = v[k][j] - (f * e[k] + g * d[k]);
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] = v[k][j] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

fn tridiagonal_ql<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) -> Result<(), NumericsError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let max_iter = 64 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(NumericsError::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (e[l] + e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn reconstruct(s: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        s.matmul(&s.adjoint())
    }

    fn check_decomposition(a: &ComplexMatrix<f64>) {
        let eig = hermitian_eigen(a).unwrap();
        let n = a.rows();
        for k in 0..n {
            let x = eig.vectors.column(k);
            let ax = a.mul_vec(&x);
            for i in 0..n {
                assert!((ax[i] - x[i] * eig.values[k]).norm() < 1e-10 * (1.0 + a.frobenius_norm()));
            }
        }
        let gram = eig.vectors.adjoint().matmul(&eig.vectors);
        assert!(gram.sub(&ComplexMatrix::identity(n)).max_abs() < 1e-10);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn jacobi_handles_complex_hermitian() {
        let b = random_matrix(7, 7, 3);
        let a = b.add(&b.adjoint());
        assert!(!a.is_real());
        check_decomposition(&a);
    }

    #[test]
    fn ql_handles_real_symmetric() {
        let b = random_matrix(9, 9, 5).map(|z| C::new(z.re, 0.0));
        let a = b.add(&b.adjoint());
        assert!(a.is_real());
        check_decomposition(&a);
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        let b = random_matrix(6, 6, 11);
        let a = b.matmul(&b.adjoint());
        let ours = hermitian_eigen(&a).unwrap().values;
        let na = DMatrix::from_fn(6, 6, |i, j| nalgebra::Complex::new(a[(i, j)].re, a[(i, j)].im));
        let mut theirs: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn sqrt_of_identity_is_identity() {
        let s = psd_sqrt(&ComplexMatrix::<f64>::identity(4), 1e-10).unwrap();
        assert!(s.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-14);
    }

    #[test]
    fn sqrt_of_two_by_two_correlation_reconstructs() {
        let rho = 0.5;
        let r = ComplexMatrix::from_real(2, 2, |i, j| if i == j { 1.0 } else { rho });
        let s = psd_sqrt(&r, 1e-10).unwrap();
        assert!(reconstruct(&s).sub(&r).max_abs() < 1e-10);
        // closed form: [[a, b], [b, a]] with a = (√1.5 + √0.5)/2, b = (√1.5 − √0.5)/2
        let a = (1.5f64.sqrt() + 0.5f64.sqrt()) / 2.0;
        let b = (1.5f64.sqrt() - 0.5f64.sqrt()) / 2.0;
        assert!((s[(0, 0)].re - a).abs() < 1e-12);
        assert!((s[(0, 1)].re - b).abs() < 1e-12);
    }

    #[test]
    fn sqrt_of_rank_deficient_clips_zero_eigenvalue() {
        let r = ComplexMatrix::from_real(2, 2, |_, _| 1.0);
        let s = psd_sqrt(&r, 1e-10).unwrap();
        assert!(reconstruct(&s).sub(&r).max_abs() < 1e-12);
        // rank one: S = R / √2
        assert!((s[(0, 0)].re - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sqrt_rejects_non_hermitian() {
        let mut r = ComplexMatrix::<f64>::identity(2);
        r[(0, 1)] = C::new(0.3, 0.0);
        assert!(matches!(psd_sqrt(&r, 1e-10), Err(NumericsError::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let r = ComplexMatrix::from_real(2, 2, |i, j| if i == j { 1.0 } else { 1.2 });
        assert!(matches!(psd_sqrt(&r, 1e-10), Err(NumericsError::IndefiniteMatrix { .. })));
    }

    #[test]
    fn sqrt_complex_hermitian_reconstructs() {
        let b = random_matrix(8, 5, 17);
        let r = b.matmul(&b.adjoint()); // rank 5, PSD, complex
        let s = psd_sqrt(&r, 1e-10).unwrap();
        assert!(reconstruct(&s).sub(&r).frobenius_norm() <= 1e-8 * r.frobenius_norm());
    }

    #[test]
    fn leading_pair_of_rank_one() {
        let a_vec: Vec<C> = vec![C::new(1.0, 2.0), C::new(-0.5, 0.0), C::new(0.0, 1.0)];
        let b_vec: Vec<C> = vec![C::new(0.0, 1.0), C::new(2.0, -1.0)];
        let a = ComplexMatrix::outer(&a_vec, &b_vec);
        let pair = leading_singular_pair(&a).unwrap();
        assert!((pair.sigma - norm(&a_vec) * norm(&b_vec)).abs() < 1e-12);
        // v ∝ b: |<v, b>| = ‖b‖
        assert!((crate::numerics::dot(&pair.v, &b_vec).norm() - norm(&b_vec)).abs() < 1e-12);
        assert_eq!(pair.v[0].im, 0.0);
        assert!(pair.v[0].re > 0.0);
    }

    #[test]
    fn leading_pair_of_identity() {
        let pair = leading_singular_pair(&ComplexMatrix::<f64>::identity(3)).unwrap();
        assert!((pair.sigma - 1.0).abs() < 1e-14);
    }

    #[test]
    fn leading_pair_rejects_zero() {
        assert_eq!(
            leading_singular_pair(&ComplexMatrix::<f64>::zeros(3, 2)).unwrap_err(),
            NumericsError::ZeroMatrix
        );
    }

    #[test]
    fn leading_pair_matches_nalgebra_svd() {
        for (rows, cols, seed) in [(4, 6, 1), (6, 4, 2), (32, 64, 3)] {
            let a = random_matrix(rows, cols, seed);
            let pair = leading_singular_pair(&a).unwrap();
            let na = DMatrix::from_fn(rows, cols, |i, j| nalgebra::Complex::new(a[(i, j)].re, a[(i, j)].im));
            let svd = na.svd(true, true);
            let (imax, smax) = svd
                .singular_values
                .iter()
                .enumerate()
                .fold((0, 0.0), |(bi, bs), (i, &s)| if s > bs { (i, s) } else { (bi, bs) });
            assert!((pair.sigma - smax).abs() <= 1e-8 * smax);
            // right singular vectors agree up to a global phase
            let v_t = svd.v_t.unwrap();
            let v_ref: Vec<C> = (0..cols).map(|j| {
                let z = v_t[(imax, j)].conj();
                C::new(z.re, z.im)
            }).collect();
            let overlap = crate::numerics::dot(&v_ref, &pair.v).norm();
            assert!((overlap - 1.0).abs() < 1e-8);
            let av = a.mul_vec(&pair.v);
            for (x, y) in av.iter().zip(&pair.u) {
                assert!((x - y * pair.sigma).norm() <= 1e-8 * pair.sigma);
            }
        }
    }

    #[test]
    fn leading_pair_phase_convention_is_deterministic() {
        let a = random_matrix(5, 3, 99);
        let first = leading_singular_pair(&a).unwrap();
        let second = leading_singular_pair(&a).unwrap();
        assert_eq!(first.v, second.v);
        // rotating a by a global phase leaves v unchanged
        let rotated = a.map(|z| z * C::from_polar(1.0, 0.7));
        let third = leading_singular_pair(&rotated).unwrap();
        for (x, y) in first.v.iter().zip(&third.v) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn f32_path_works() {
        let r = ComplexMatrix::<f32>::from_real(3, 3, |i, j| if i == j { 1.0 } else { 0.25 });
        let s = psd_sqrt(&r, 1e-6).unwrap();
        assert!(s.matmul(&s.adjoint()).sub(&r).max_abs() < 1e-5);
    }
}
