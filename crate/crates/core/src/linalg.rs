//! Small dense real matrices: products, LU solves, spectral norms, and the
//! matrix exponential, square root and logarithm used by the matrix groups.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Square row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows. Panics if the rows do not form a square.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix rows must form a square");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Matrix unit `E_ij` (one in row `i`, column `j`).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(i, j)] = 1.0;
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { n: self.n, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { n: self.n, data }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect();
        Self { n: self.n, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Self { n, data: out }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Commutator `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest singular value, from the symmetric eigenproblem of `AᵀA`.
    pub fn norm_spectral(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        if self.n == 1 {
            return self.data[0].abs();
        }
        let gram = self.transpose().mul(self);
        let eig = symmetric_eigenvalues(&gram);
        libm::sqrt(eig.into_iter().fold(0.0, f64::max).max(0.0))
    }

    /// LU factorisation with partial pivoting.
    fn lu(&self) -> Result<Lu> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::NonInvertible);
        }
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= scale * 1e-14 {
                return Err(Error::NonInvertible);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, a, perm, sign })
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.solve(&Self::identity(self.n))
    }

    /// Solves `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        self.lu()?.solve(rhs)
    }

    pub fn determinant(&self) -> f64 {
        match self.lu() {
            Ok(lu) => lu.sign * (0..self.n).map(|i| lu.a[i * self.n + i]).product::<f64>(),
            Err(_) => 0.0,
        }
    }

    /// Matrix exponential by scaling and squaring around the [13/13] Padé
    /// approximant.
    pub fn exp(&self) -> Self {
        let n = self.n;
        if n == 0 {
            return self.clone();
        }
        if n == 1 {
            return Self { n, data: vec![libm::exp(self.data[0])] };
        }
        const THETA_13: f64 = 5.371_920_351_148_152;
        let norm = self.norm_one();
        let squarings = if norm > THETA_13 {
            libm::ceil(libm::log2(norm / THETA_13)) as i32
        } else {
            0
        };
        let a = self.scale(libm::exp2(-(squarings as f64)));
        let mut r = pade13(&a);
        for _ in 0..squarings {
            r = r.mul(&r);
        }
        r
    }

    /// Principal square root by the Denman–Beavers iteration.
    pub fn sqrt(&self) -> Result<Self> {
        let mut y = self.clone();
        let mut z = Self::identity(self.n);
        for _ in 0..100 {
            let yi = y.inverse()?;
            let zi = z.inverse()?;
            let y_next = y.add(&zi).scale(0.5);
            let z_next = z.add(&yi).scale(0.5);
            let change = y_next.sub(&y).norm_one();
            y = y_next;
            z = z_next;
            if change <= 1e-15 * y.norm_one() {
                return Ok(y);
            }
        }
        Err(Error::NonConvergent("matrix square root"))
    }

    /// Principal logarithm by inverse scaling and squaring. The caller is
    /// responsible for keeping `self` near the identity.
    pub fn log(&self) -> Result<Self> {
        let n = self.n;
        let eye = Self::identity(n);
        let mut x = self.clone();
        let mut roots = 0u32;
        while x.sub(&eye).norm_one() > 0.25 {
            if roots >= 30 {
                return Err(Error::NonConvergent("matrix logarithm"));
            }
            x = x.sqrt()?;
            roots += 1;
        }
        // log X = 2 atanh(Z), Z = (X − I)(X + I)⁻¹
        let z = x.add(&eye).transpose().solve(&x.sub(&eye).transpose())?.transpose();
        let z2 = z.mul(&z);
        let mut term = z.clone();
        let mut sum = z;
        for k in 1..200 {
            term = term.mul(&z2);
            let contrib = term.scale(1.0 / (2 * k + 1) as f64);
            sum = sum.add(&contrib);
            if contrib.norm_one() <= 1e-18 * sum.norm_one().max(1e-300) {
                break;
            }
        }
        Ok(sum.scale(libm::exp2((roots + 1) as f64)))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

struct Lu {
    n: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        let n = self.n;
        let mut x = Matrix::zeros(n);
        for col in 0..n {
            let mut y: Vec<f64> = (0..n).map(|i| rhs[(self.perm[i], col)]).collect();
            for i in 0..n {
                let mut s = y[i];
                for k in 0..i {
                    s -= self.a[i * n + k] * y[k];
                }
                y[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in (i + 1)..n {
                    s -= self.a[i * n + k] * y[k];
                }
                y[i] = s / self.a[i * n + i];
            }
            for i in 0..n {
                x[(i, col)] = y[i];
            }
        }
        if !x.is_finite() {
            return Err(Error::NonInvertible);
        }
        Ok(x)
    }
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn pade13(a: &Matrix) -> Matrix {
    let b = &PADE13;
    let eye = Matrix::identity(a.n);
    let a2 = a.mul(a);
    let a4 = a2.mul(&a2);
    let a6 = a4.mul(&a2);
    let u_inner = a6.scale(b[13]).axpy(b[11], &a4).axpy(b[9], &a2);
    let u = a.mul(
        &a6.mul(&u_inner)
            .axpy(b[7], &a6)
            .axpy(b[5], &a4)
            .axpy(b[3], &a2)
            .axpy(b[1], &eye),
    );
    let v_inner = a6.scale(b[12]).axpy(b[10], &a4).axpy(b[8], &a2);
    let v = a6
        .mul(&v_inner)
        .axpy(b[6], &a6)
        .axpy(b[4], &a4)
        .axpy(b[2], &a2)
        .axpy(b[0], &eye);
    // The denominator V − U is well conditioned for ‖A‖₁ ≤ θ₁₃.
    v.sub(&u)
        .solve(&v.add(&u))
        .expect("Padé denominator is nonsingular inside the scaling bound")
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.n;
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    /// Plain Taylor series, independent of the Padé path.
    fn exp_taylor(a: &Matrix) -> Matrix {
        let mut term = Matrix::identity(a.dim());
        let mut sum = term.clone();
        for k in 1..60 {
            term = term.mul(a).scale(1.0 / k as f64);
            sum = sum.add(&term);
        }
        sum
    }

    #[test]
    fn product_by_hand() {
        let a = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let b = Matrix::from_rows(&[&[1.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(a.mul(&b), Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 1.0]]));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(Error::NonInvertible)));
    }

    #[test]
    fn exp_matches_taylor() {
        let a = Matrix::from_rows(&[&[0.3, -1.2, 0.5], &[0.7, 0.1, -0.4], &[-0.2, 0.9, -0.6]]);
        let e = a.exp();
        let t = exp_taylor(&a);
        assert!(close(&e, &t, 1e-13 * t.max_abs()));
        // large norm goes through squaring
        let big = a.scale(7.0);
        let rel = big.exp().sub(&exp_taylor(&big.scale(0.125))).max_abs();
        let mut t8 = exp_taylor(&big.scale(0.125));
        for _ in 0..3 {
            t8 = t8.mul(&t8);
        }
        assert!(big.exp().sub(&t8).max_abs() <= 1e-11 * t8.max_abs(), "{rel}");
    }

    #[test]
    fn nilpotent_exp() {
        let x = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(close(&x.exp(), &Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-15));
    }

    #[test]
    fn log_inverts_exp() {
        let a = Matrix::from_rows(&[&[0.05, -0.12, 0.03], &[0.07, 0.01, -0.04], &[-0.02, 0.09, -0.06]]);
        let back = a.exp().log().unwrap();
        assert!(close(&back, &a, 1e-14));
        let m = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let l = m.log().unwrap();
        assert!(close(&l, &Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]), 1e-14));
    }

    #[test]
    fn spectral_norm_of_known_matrices() {
        let a = Matrix::from_rows(&[&[3.0, 0.0], &[4.0, 5.0]]);
        // singular values of [[3,0],[4,5]] are sqrt(45) and sqrt(5)
        assert_abs_diff_eq!(a.norm_spectral(), libm::sqrt(45.0), epsilon = 1e-12);
        assert_abs_diff_eq!(Matrix::unit(3, 0, 2).norm_spectral(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn determinant_and_trace() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        assert_abs_diff_eq!(a.determinant(), 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a.trace(), 5.0);
    }
}
