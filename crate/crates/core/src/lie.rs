//! Finite-dimensional Lie groups: the general linear groups and the additive
//! vector groups, with exponential chart, adjoint action, bracket and local
//! multiplication.
//!
//! Elements and algebra vectors are plain coordinate containers; every
//! group-level operation goes through a [`LieGroupSpec`], which checks that
//! the coordinates have the shape of that group.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub type C64 = Complex64;

/// Coordinate storage shared by group elements and algebra vectors.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Real(Vec<f64>),
    Complex(Vec<C64>),
    Matrix(Matrix),
}

impl Coords {
    fn zip_with(&self, other: &Self, fr: impl Fn(f64, f64) -> f64, fc: impl Fn(C64, C64) -> C64) -> Self {
        match (self, other) {
            (Coords::Real(a), Coords::Real(b)) if a.len() == b.len() => {
                Coords::Real(a.iter().zip(b).map(|(x, y)| fr(*x, *y)).collect())
            }
            (Coords::Complex(a), Coords::Complex(b)) if a.len() == b.len() => {
                Coords::Complex(a.iter().zip(b).map(|(x, y)| fc(*x, *y)).collect())
            }
            (Coords::Matrix(a), Coords::Matrix(b)) if a.dim() == b.dim() => {
                let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| fr(*x, *y)).collect();
                Coords::Matrix(Matrix::from_vec(a.dim(), data).expect("same dimension"))
            }
            _ => panic!("coordinate shapes differ"),
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        match (self, other) {
            (Coords::Real(a), Coords::Real(b)) => a.len() == b.len(),
            (Coords::Complex(a), Coords::Complex(b)) => a.len() == b.len(),
            (Coords::Matrix(a), Coords::Matrix(b)) => a.dim() == b.dim(),
            _ => false,
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Coords::Real(a) => a.iter().all(|x| x.is_finite()),
            Coords::Complex(a) => a.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            Coords::Matrix(m) => m.is_finite(),
        }
    }

    fn with_flat(&self, flat: &[f64]) -> Self {
        match self {
            Coords::Real(a) => Coords::Real(flat[..a.len()].to_vec()),
            Coords::Complex(a) => Coords::Complex((0..a.len()).map(|i| C64::new(flat[2 * i], flat[2 * i + 1])).collect()),
            Coords::Matrix(m) => {
                let n = m.dim();
                Coords::Matrix(Matrix::from_vec(n, flat[..n * n].to_vec()).expect("n*n entries"))
            }
        }
    }

    fn flatten(&self) -> Vec<f64> {
        match self {
            Coords::Real(a) => a.clone(),
            Coords::Complex(a) => a.iter().flat_map(|z| [z.re, z.im]).collect(),
            Coords::Matrix(m) => m.as_slice().to_vec(),
        }
    }
}

/// Coordinates of an element of a Lie algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVector {
    coords: Coords,
}

/// Coordinates of a group element.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    coords: Coords,
}

macro_rules! coord_constructors {
    ($ty:ident) => {
        impl $ty {
            pub fn from_coords(coords: Coords) -> Self {
                Self { coords }
            }
            pub fn scalar(x: f64) -> Self {
                Self { coords: Coords::Real(vec![x]) }
            }
            pub fn real(v: Vec<f64>) -> Self {
                Self { coords: Coords::Real(v) }
            }
            pub fn complex(v: Vec<C64>) -> Self {
                Self { coords: Coords::Complex(v) }
            }
            pub fn matrix(m: Matrix) -> Self {
                Self { coords: Coords::Matrix(m) }
            }
            pub fn coords(&self) -> &Coords {
                &self.coords
            }
            pub fn into_coords(self) -> Coords {
                self.coords
            }
            pub fn as_matrix(&self) -> Option<&Matrix> {
                match &self.coords {
                    Coords::Matrix(m) => Some(m),
                    _ => None,
                }
            }
            pub fn as_real(&self) -> Option<&[f64]> {
                match &self.coords {
                    Coords::Real(v) => Some(v),
                    _ => None,
                }
            }
            pub fn as_complex(&self) -> Option<&[C64]> {
                match &self.coords {
                    Coords::Complex(v) => Some(v),
                    _ => None,
                }
            }
            /// First real coordinate; panics for non-real coordinates.
            pub fn as_scalar(&self) -> f64 {
                self.as_real().expect("real coordinates")[0]
            }
            pub fn is_finite(&self) -> bool {
                self.coords.is_finite()
            }
            /// Same shape as `self` with coordinates taken from `flat`, laid
            /// out as in [`flatten`](Self::flatten).
            pub fn with_flat(&self, flat: &[f64]) -> Self {
                Self { coords: self.coords.with_flat(flat) }
            }
            /// All coordinates as reals (complex entries interleaved as re, im).
            pub fn flatten(&self) -> Vec<f64> {
                self.coords.flatten()
            }
        }
    };
}

coord_constructors!(AlgebraVector);
coord_constructors!(GroupElement);

impl AlgebraVector {
    /// Panics if the shapes differ.
    pub fn add(&self, other: &Self) -> Self {
        Self { coords: self.coords.zip_with(&other.coords, |a, b| a + b, |a, b| a + b) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coords: self.coords.zip_with(&other.coords, |a, b| a - b, |a, b| a - b) }
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self { coords: self.coords.zip_with(&other.coords, |a, b| a + s * b, |a, b| a + b * s) }
    }

    pub fn scale(&self, s: f64) -> Self {
        let coords = match &self.coords {
            Coords::Real(v) => Coords::Real(v.iter().map(|x| x * s).collect()),
            Coords::Complex(v) => Coords::Complex(v.iter().map(|z| z * s).collect()),
            Coords::Matrix(m) => Coords::Matrix(m.scale(s)),
        };
        Self { coords }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.coords.same_shape(&other.coords)
    }

    /// Complex coordinates of a vector-kind algebra element.
    pub fn to_complex(&self) -> Option<Vec<C64>> {
        match &self.coords {
            Coords::Real(v) => Some(v.iter().map(|&x| C64::new(x, 0.0)).collect()),
            Coords::Complex(v) => Some(v.clone()),
            Coords::Matrix(_) => None,
        }
    }

    /// Largest coordinate deviation; shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.flatten().iter().zip(other.flatten()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl GroupElement {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.flatten().iter().zip(other.flatten()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// `GL(n, ℝ)`.
    Matrix(usize),
    /// Additive `ℝ^d`.
    AdditiveVector(usize),
    /// Additive `ℝ`.
    ScalarLine,
    /// Additive `ℂ^d`, the fiber of the diagonal torus actions.
    ComplexTorusFactor(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraNorm {
    /// Twice the operator norm; makes `‖[x,y]‖ ≤ ‖x‖·‖y‖` hold on `gl(n)`.
    ScaledSpectral,
    Euclidean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieGroupSpec {
    pub kind: GroupKind,
    pub algebra_norm: AlgebraNorm,
    /// Bound on the chart distance from the identity inside which the
    /// logarithm is used. For matrices this is `‖g − I‖₂`.
    pub injectivity_radius: f64,
}

impl LieGroupSpec {
    pub fn general_linear(n: usize) -> Self {
        assert!(n >= 1, "GL(n) needs n >= 1");
        Self { kind: GroupKind::Matrix(n), algebra_norm: AlgebraNorm::ScaledSpectral, injectivity_radius: 0.5 }
    }

    pub fn additive(d: usize) -> Self {
        Self { kind: GroupKind::AdditiveVector(d), algebra_norm: AlgebraNorm::Euclidean, injectivity_radius: f64::INFINITY }
    }

    pub fn scalar_line() -> Self {
        Self { kind: GroupKind::ScalarLine, algebra_norm: AlgebraNorm::Euclidean, injectivity_radius: f64::INFINITY }
    }

    pub fn complex_vector(d: usize) -> Self {
        Self {
            kind: GroupKind::ComplexTorusFactor(d),
            algebra_norm: AlgebraNorm::Euclidean,
            injectivity_radius: f64::INFINITY,
        }
    }

    /// Number of coordinates (complex coordinates count once).
    pub fn dimension(&self) -> usize {
        match self.kind {
            GroupKind::Matrix(n) => n * n,
            GroupKind::AdditiveVector(d) | GroupKind::ComplexTorusFactor(d) => d,
            GroupKind::ScalarLine => 1,
        }
    }

    pub fn is_abelian(&self) -> bool {
        !matches!(self.kind, GroupKind::Matrix(n) if n > 1)
    }

    pub fn is_vector_group(&self) -> bool {
        !matches!(self.kind, GroupKind::Matrix(_))
    }

    fn accepts(&self, c: &Coords) -> bool {
        match (self.kind, c) {
            (GroupKind::Matrix(n), Coords::Matrix(m)) => m.dim() == n,
            (GroupKind::AdditiveVector(d), Coords::Real(v)) => v.len() == d,
            (GroupKind::ScalarLine, Coords::Real(v)) => v.len() == 1,
            (GroupKind::ComplexTorusFactor(d), Coords::Complex(v)) => v.len() == d,
            _ => false,
        }
    }

    pub fn check_vector(&self, x: &AlgebraVector) -> Result<()> {
        if self.accepts(&x.coords) {
            Ok(())
        } else {
            Err(Error::SpecMismatch("algebra vector does not belong to this group"))
        }
    }

    pub fn check_element(&self, g: &GroupElement) -> Result<()> {
        if self.accepts(&g.coords) {
            Ok(())
        } else {
            Err(Error::SpecMismatch("element does not belong to this group"))
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::Matrix(n) => GroupElement::matrix(Matrix::identity(n)),
            GroupKind::AdditiveVector(d) => GroupElement::real(vec![0.0; d]),
            GroupKind::ScalarLine => GroupElement::scalar(0.0),
            GroupKind::ComplexTorusFactor(d) => GroupElement::complex(vec![C64::new(0.0, 0.0); d]),
        }
    }

    pub fn zero(&self) -> AlgebraVector {
        match self.kind {
            GroupKind::Matrix(n) => AlgebraVector::matrix(Matrix::zeros(n)),
            GroupKind::AdditiveVector(d) => AlgebraVector::real(vec![0.0; d]),
            GroupKind::ScalarLine => AlgebraVector::scalar(0.0),
            GroupKind::ComplexTorusFactor(d) => AlgebraVector::complex(vec![C64::new(0.0, 0.0); d]),
        }
    }

    pub fn norm(&self, x: &AlgebraVector) -> f64 {
        match (&x.coords, self.algebra_norm) {
            (Coords::Matrix(m), AlgebraNorm::ScaledSpectral) => 2.0 * m.norm_spectral(),
            (Coords::Matrix(m), AlgebraNorm::Euclidean) => m.norm_frobenius(),
            (Coords::Real(v), _) => libm::sqrt(v.iter().map(|a| a * a).sum()),
            (Coords::Complex(v), _) => libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum()),
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_element(a)?;
        self.check_element(b)?;
        Ok(match (&a.coords, &b.coords) {
            (Coords::Matrix(x), Coords::Matrix(y)) => GroupElement::matrix(x.mul(y)),
            _ => GroupElement { coords: a.coords.zip_with(&b.coords, |p, q| p + q, |p, q| p + q) },
        })
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check_element(a)?;
        Ok(match &a.coords {
            Coords::Matrix(m) => GroupElement::matrix(m.inverse()?),
            Coords::Real(v) => GroupElement::real(v.iter().map(|x| -x).collect()),
            Coords::Complex(v) => GroupElement::complex(v.iter().map(|z| -z).collect()),
        })
    }

    pub fn exp(&self, x: &AlgebraVector) -> Result<GroupElement> {
        self.check_vector(x)?;
        Ok(match &x.coords {
            Coords::Matrix(m) => GroupElement::matrix(m.exp()),
            c => GroupElement { coords: c.clone() },
        })
    }

    /// Distance of `g` from the identity in the chart's own measure.
    pub fn chart_distance(&self, g: &GroupElement) -> Result<f64> {
        self.check_element(g)?;
        Ok(match &g.coords {
            Coords::Matrix(m) => m.sub(&Matrix::identity(m.dim())).norm_spectral(),
            _ => 0.0,
        })
    }

    /// Inverse of `exp` on the chart around the identity. Refuses elements
    /// outside the injectivity radius.
    pub fn log_local(&self, g: &GroupElement) -> Result<AlgebraVector> {
        let distance = self.chart_distance(g)?;
        if distance >= self.injectivity_radius || !g.is_finite() {
            return Err(Error::OutOfChart { distance, radius: self.injectivity_radius });
        }
        Ok(match &g.coords {
            Coords::Matrix(m) => AlgebraVector::matrix(m.log()?),
            c => AlgebraVector { coords: c.clone() },
        })
    }

    /// `Ad(g) y`.
    pub fn adjoint(&self, g: &GroupElement, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_element(g)?;
        self.check_vector(y)?;
        Ok(match (&g.coords, &y.coords) {
            (Coords::Matrix(gm), Coords::Matrix(ym)) => AlgebraVector::matrix(gm.mul(ym).mul(&gm.inverse()?)),
            _ => y.clone(),
        })
    }

    /// Lie bracket `[x, y] = ad(x) y`.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        Ok(match (&x.coords, &y.coords) {
            (Coords::Matrix(a), Coords::Matrix(b)) => AlgebraVector::matrix(a.commutator(b)),
            _ => self.zero(),
        })
    }

    /// Matrix of `ad x` in the basis `E_ij` (row-major), or `None` on
    /// abelian groups where it vanishes.
    pub fn ad_matrix(&self, x: &AlgebraVector) -> Result<Option<Matrix>> {
        self.check_vector(x)?;
        let Coords::Matrix(xm) = &x.coords else { return Ok(None) };
        let n = xm.dim();
        let mut ad = Matrix::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let image = xm.commutator(&Matrix::unit(n, i, j));
                for (row, &value) in image.as_slice().iter().enumerate() {
                    ad[(row, i * n + j)] = value;
                }
            }
        }
        Ok(Some(ad))
    }

    /// `e^{ad x} y`, evaluated through the exponential of the ad-matrix.
    pub fn exp_ad(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_vector(y)?;
        let Some(ad) = self.ad_matrix(x)? else { return Ok(y.clone()) };
        let e = ad.exp();
        let ym = y.as_matrix().expect("checked");
        let n = ym.dim();
        let yv = ym.as_slice();
        let out: Vec<f64> = (0..n * n)
            .map(|r| (0..n * n).map(|c| e[(r, c)] * yv[c]).sum())
            .collect();
        Ok(AlgebraVector::matrix(Matrix::from_vec(n, out)?))
    }

    /// Local multiplication `x * y = log(exp x · exp y)`.
    pub fn local_multiply(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        let p = self.multiply(&self.exp(x)?, &self.exp(y)?)?;
        self.log_local(&p)
    }

    /// Group metric used for refinement stopping: Frobenius distance for
    /// matrices, Euclidean distance for vector groups.
    pub fn distance(&self, a: &GroupElement, b: &GroupElement) -> Result<f64> {
        self.check_element(a)?;
        self.check_element(b)?;
        Ok(match (&a.coords, &b.coords) {
            (Coords::Matrix(x), Coords::Matrix(y)) => x.sub(y).norm_frobenius(),
            (Coords::Real(x), Coords::Real(y)) => {
                libm::sqrt(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum())
            }
            (Coords::Complex(x), Coords::Complex(y)) => {
                libm::sqrt(x.iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).sum())
            }
            _ => unreachable!("checked above"),
        })
    }

    /// Vector with coordinates drawn uniformly from `[-scale, scale]`.
    pub fn random_vector<R: rand::Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraVector {
        let mut draw = || rng.gen_range(-scale..=scale);
        match self.kind {
            GroupKind::Matrix(n) => {
                AlgebraVector::matrix(Matrix::from_vec(n, (0..n * n).map(|_| draw()).collect()).expect("n*n entries"))
            }
            GroupKind::AdditiveVector(d) => AlgebraVector::real((0..d).map(|_| draw()).collect()),
            GroupKind::ScalarLine => AlgebraVector::scalar(draw()),
            GroupKind::ComplexTorusFactor(d) => AlgebraVector::complex((0..d).map(|_| C64::new(draw(), draw())).collect()),
        }
    }

    /// Random vector of norm exactly `radius` (zero if the draw vanishes).
    pub fn random_on_sphere<R: rand::Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> AlgebraVector {
        let x = self.random_vector(rng, 1.0);
        let n = self.norm(&x);
        if n == 0.0 {
            x
        } else {
            x.scale(radius / n)
        }
    }

    /// The vector with a single coordinate equal to one; for one-dimensional
    /// algebras this is a unit vector.
    pub fn basis_vector(&self, index: usize) -> AlgebraVector {
        match self.kind {
            GroupKind::Matrix(n) => AlgebraVector::matrix(Matrix::unit(n, index / n, index % n)),
            GroupKind::AdditiveVector(d) => {
                let mut v = vec![0.0; d];
                v[index] = 1.0;
                AlgebraVector::real(v)
            }
            GroupKind::ScalarLine => AlgebraVector::scalar(1.0),
            GroupKind::ComplexTorusFactor(d) => {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[index] = C64::new(1.0, 0.0);
                AlgebraVector::complex(v)
            }
        }
    }

    /// Norm of `log(a⁻¹ b)`: the left-translated comparison used near
    /// limits.
    pub fn chart_error(&self, a: &GroupElement, b: &GroupElement) -> Result<f64> {
        let d = self.multiply(&self.inverse(a)?, b)?;
        Ok(self.norm(&self.log_local(&d)?))
    }
}
