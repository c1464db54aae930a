//! Concrete actions with closed-form derived actions and generators.
//!
//! Every constructor probes the action axioms on seeded samples and refuses
//! to build an instance whose residuals exceed [`PROBE_TOLERANCE`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, LieGroupSpec, C64};
use crate::linalg::Matrix;
use crate::semidirect::{Action, HalfLieGroup, HalfLiePoint, HalfLieVector, ProbeReport};

pub const PROBE_TOLERANCE: f64 = 1e-9;
const PROBE_SAMPLES: usize = 200;
const PROBE_SCALE: f64 = 0.2;
const PROBE_SEED: u64 = 0x1457_a11c;

/// Names accepted by [`by_name`].
pub const REGISTRY: &[&str] = &["oscillator", "affine", "unit_group_conjugation", "loop_group"];

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceParams {
    Oscillator { lambda: Vec<f64> },
    Affine { a: f64 },
    UnitGroupConjugation { generator: Matrix },
    LoopGroup { degree: usize },
}

#[derive(Debug)]
pub struct InstanceDescriptor {
    pub name: String,
    pub params: InstanceParams,
    pub group: HalfLieGroup,
    pub probe: ProbeReport,
}

impl InstanceDescriptor {
    fn build(name: &str, params: InstanceParams, action: impl Action + 'static) -> Result<Self> {
        let group = HalfLieGroup::new(name, action);
        let probe = group.probe(PROBE_SAMPLES, PROBE_SCALE, PROBE_SEED)?;
        probe.check(PROBE_TOLERANCE)?;
        Ok(Self { name: name.into(), params, group, probe })
    }

    /// The analytic `C¹` criterion of `v`, if the action has one.
    pub fn c1_criterion(&self, v: &AlgebraVector) -> Option<f64> {
        self.group.action().c1_criterion(v)
    }
}

/// `(e^{iθ} − 1)/(iθ)`, equal to 1 at θ = 0.
fn phase_integral(theta: f64) -> C64 {
    if theta == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let half = libm::sin(0.5 * theta);
    C64::new(libm::sin(theta) / theta, 2.0 * half * half / theta)
}

/// `(e^{y} − 1)/y`, equal to 1 at y = 0.
fn growth_integral(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        libm::expm1(y) / y
    }
}

/// Diagonal phase rotation of `ℂ^d` by `ℝ`: `π(t)(x_n) = (e^{iλ_n t} x_n)`.
pub struct Oscillator {
    lambda: Vec<f64>,
    fiber: LieGroupSpec,
    base: LieGroupSpec,
}

impl Oscillator {
    fn new(lambda: Vec<f64>) -> Self {
        let fiber = LieGroupSpec::complex_vector(lambda.len());
        Self { lambda, fiber, base: LieGroupSpec::scalar_line() }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.lambda
    }

    fn rotate(&self, t: f64, coords: &[C64]) -> Vec<C64> {
        coords.iter().zip(&self.lambda).map(|(z, l)| z * C64::from_polar(1.0, l * t)).collect()
    }

    fn complex_coords<'a>(&self, v: &'a AlgebraVector) -> Result<&'a [C64]> {
        self.fiber.check_vector(v)?;
        Ok(v.as_complex().expect("checked"))
    }
}

impl Action for Oscillator {
    fn fiber(&self) -> &LieGroupSpec {
        &self.fiber
    }

    fn base(&self) -> &LieGroupSpec {
        &self.base
    }

    fn act(&self, g: &GroupElement, n: &GroupElement) -> Result<GroupElement> {
        self.base.check_element(g)?;
        self.fiber.check_element(n)?;
        Ok(GroupElement::complex(self.rotate(g.as_scalar(), n.as_complex().expect("checked"))))
    }

    fn derived_act(&self, g: &GroupElement, v: &AlgebraVector) -> Result<AlgebraVector> {
        self.base.check_element(g)?;
        Ok(AlgebraVector::complex(self.rotate(g.as_scalar(), self.complex_coords(v)?)))
    }

    fn generator(&self, x: &AlgebraVector, v: &AlgebraVector) -> Option<Result<AlgebraVector>> {
        Some((|| {
            self.base.check_vector(x)?;
            let s = x.as_scalar();
            let coords = self.complex_coords(v)?;
            Ok(AlgebraVector::complex(
                coords.iter().zip(&self.lambda).map(|(z, l)| z * C64::new(0.0, s * l)).collect(),
            ))
        })())
    }

    fn exp_closed_form(&self, w: &HalfLieVector) -> Option<Result<HalfLiePoint>> {
        Some((|| {
            self.base.check_vector(&w.x)?;
            let x = w.x.as_scalar();
            let coords = self.complex_coords(&w.v)?;
            let n = coords.iter().zip(&self.lambda).map(|(z, l)| z * phase_integral(l * x)).collect();
            Ok(HalfLiePoint { n: GroupElement::complex(n), g: GroupElement::scalar(x) })
        })())
    }

    fn seminorm_closed_form(&self, v: &AlgebraVector, k: u32) -> Option<f64> {
        let coords = self.complex_coords(v).ok()?;
        let sum: f64 = coords
            .iter()
            .zip(&self.lambda)
            .map(|(z, l)| {
                let m = z.norm() * libm::pow(l.abs(), k as f64);
                m * m
            })
            .sum();
        Some(libm::sqrt(sum))
    }

    fn c1_criterion(&self, v: &AlgebraVector) -> Option<f64> {
        let coords = self.complex_coords(v).ok()?;
        Some(coords.iter().zip(&self.lambda).map(|(z, l)| (z * l).norm_sqr()).sum())
    }
}

/// `ℝ` acting on `ℝ` by `π(s)v = e^{as}v`.
pub struct Affine {
    a: f64,
    line: LieGroupSpec,
}

impl Action for Affine {
    fn fiber(&self) -> &LieGroupSpec {
        &self.line
    }

    fn base(&self) -> &LieGroupSpec {
        &self.line
    }

    fn act(&self, g: &GroupElement, n: &GroupElement) -> Result<GroupElement> {
        self.line.check_element(g)?;
        self.line.check_element(n)?;
        Ok(GroupElement::scalar(libm::exp(self.a * g.as_scalar()) * n.as_scalar()))
    }

    fn derived_act(&self, g: &GroupElement, v: &AlgebraVector) -> Result<AlgebraVector> {
        self.line.check_element(g)?;
        self.line.check_vector(v)?;
        Ok(AlgebraVector::scalar(libm::exp(self.a * g.as_scalar()) * v.as_scalar()))
    }

    fn generator(&self, x: &AlgebraVector, v: &AlgebraVector) -> Option<Result<AlgebraVector>> {
        Some((|| {
            self.line.check_vector(x)?;
            self.line.check_vector(v)?;
            Ok(AlgebraVector::scalar(self.a * x.as_scalar() * v.as_scalar()))
        })())
    }

    fn exp_closed_form(&self, w: &HalfLieVector) -> Option<Result<HalfLiePoint>> {
        Some((|| {
            self.line.check_vector(&w.v)?;
            self.line.check_vector(&w.x)?;
            let x = w.x.as_scalar();
            let n = w.v.as_scalar() * growth_integral(self.a * x);
            Ok(HalfLiePoint { n: GroupElement::scalar(n), g: GroupElement::scalar(x) })
        })())
    }

    fn seminorm_closed_form(&self, v: &AlgebraVector, k: u32) -> Option<f64> {
        self.line.check_vector(v).ok()?;
        Some(libm::pow(self.a.abs(), k as f64) * v.as_scalar().abs())
    }

    fn c1_criterion(&self, v: &AlgebraVector) -> Option<f64> {
        self.line.check_vector(v).ok()?;
        let y = self.a * v.as_scalar();
        Some(y * y)
    }
}

/// `ℝ` acting on `GL(n)` by conjugation, `π(t)m = e^{tA} m e^{−tA}`.
pub struct Conjugation {
    generator: Matrix,
    fiber: LieGroupSpec,
    base: LieGroupSpec,
}

impl Conjugation {
    fn conjugate(&self, t: f64, m: &Matrix) -> Result<Matrix> {
        let forward = self.generator.scale(t).exp();
        let backward = self.generator.scale(-t).exp();
        Ok(forward.mul(m).mul(&backward))
    }
}

impl Action for Conjugation {
    fn fiber(&self) -> &LieGroupSpec {
        &self.fiber
    }

    fn base(&self) -> &LieGroupSpec {
        &self.base
    }

    fn act(&self, g: &GroupElement, n: &GroupElement) -> Result<GroupElement> {
        self.base.check_element(g)?;
        self.fiber.check_element(n)?;
        Ok(GroupElement::matrix(self.conjugate(g.as_scalar(), n.as_matrix().expect("checked"))?))
    }

    fn derived_act(&self, g: &GroupElement, v: &AlgebraVector) -> Result<AlgebraVector> {
        self.base.check_element(g)?;
        self.fiber.check_vector(v)?;
        Ok(AlgebraVector::matrix(self.conjugate(g.as_scalar(), v.as_matrix().expect("checked"))?))
    }

    fn generator(&self, x: &AlgebraVector, v: &AlgebraVector) -> Option<Result<AlgebraVector>> {
        Some((|| {
            self.base.check_vector(x)?;
            self.fiber.check_vector(v)?;
            let c = self.generator.commutator(v.as_matrix().expect("checked"));
            Ok(AlgebraVector::matrix(c.scale(x.as_scalar())))
        })())
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be finite")))
    }
}

/// Phase rotation of the first `λ.len()` modes of `ℓ²`.
pub fn oscillator(lambda: &[f64]) -> Result<InstanceDescriptor> {
    if lambda.is_empty() {
        return Err(Error::InvalidArgument("oscillator needs at least one frequency".into()));
    }
    check_finite(lambda, "frequencies")?;
    if lambda.iter().any(|&l| l <= 0.0) {
        return Err(Error::InvalidArgument("oscillator frequencies must be positive".into()));
    }
    InstanceDescriptor::build(
        "oscillator",
        InstanceParams::Oscillator { lambda: lambda.to_vec() },
        Oscillator::new(lambda.to_vec()),
    )
}

/// The affine group `ℝ ⋊ ℝ` with rate `a`.
pub fn affine(a: f64) -> Result<InstanceDescriptor> {
    check_finite(&[a], "rate")?;
    InstanceDescriptor::build(
        "affine",
        InstanceParams::Affine { a },
        Affine { a, line: LieGroupSpec::scalar_line() },
    )
}

/// Conjugation of `GL(n)` by the one-parameter group of `generator`.
pub fn unit_group_conjugation(generator: Matrix) -> Result<InstanceDescriptor> {
    let n = generator.dim();
    if n < 2 {
        return Err(Error::InvalidArgument("conjugation needs matrices of size at least 2".into()));
    }
    if !generator.is_finite() {
        return Err(Error::InvalidArgument("generator must be finite".into()));
    }
    InstanceDescriptor::build(
        "unit_group_conjugation",
        InstanceParams::UnitGroupConjugation { generator: generator.clone() },
        Conjugation { generator, fiber: LieGroupSpec::general_linear(n), base: LieGroupSpec::scalar_line() },
    )
}

/// Rotation of trigonometric polynomials of degree `m` with values in an
/// abelian group; mode `k` turns with frequency `k` for `k = −m..m`.
pub fn loop_group(m: usize) -> Result<InstanceDescriptor> {
    if m == 0 {
        return Err(Error::InvalidArgument("loop group degree must be at least 1".into()));
    }
    let lambda: Vec<f64> = (-(m as i64)..=m as i64).map(|k| k as f64).collect();
    InstanceDescriptor::build("loop_group", InstanceParams::LoopGroup { degree: m }, Oscillator::new(lambda))
}

/// Builds a registered instance from its name and numeric parameters:
/// frequencies for `oscillator`, one rate for `affine`, the row-major
/// generator for `unit_group_conjugation` and the degree for `loop_group`.
pub fn by_name(name: &str, params: &[f64]) -> Result<InstanceDescriptor> {
    match name {
        "oscillator" => oscillator(params),
        "affine" => match params {
            [a] => affine(*a),
            _ => Err(Error::InvalidArgument("affine takes exactly one parameter".into())),
        },
        "unit_group_conjugation" => {
            let n = libm::sqrt(params.len() as f64) as usize;
            if n * n != params.len() {
                return Err(Error::InvalidArgument("conjugation generator must be a square matrix".into()));
            }
            unit_group_conjugation(Matrix::from_vec(n, params.to_vec())?)
        }
        "loop_group" => match params {
            [m] if *m >= 1.0 && libm::trunc(*m) == *m => loop_group(*m as usize),
            _ => Err(Error::InvalidArgument("loop_group takes one positive integer degree".into())),
        },
        other => Err(Error::InvalidArgument(format!(
            "unknown instance `{other}`; available: {}",
            REGISTRY.join(", ")
        ))),
    }
}

/// Oscillator truncations at each dimension in `dims`, with frequencies
/// `lambda(n)` and the vector of coefficients `coeff(n)`, `n = 1..=d`.
pub fn oscillator_ladder(
    dims: &[usize],
    lambda: impl Fn(usize) -> f64,
    coeff: impl Fn(usize) -> f64,
) -> Result<Vec<(InstanceDescriptor, AlgebraVector)>> {
    dims.iter()
        .map(|&d| {
            let freqs: Vec<f64> = (1..=d).map(&lambda).collect();
            let v = AlgebraVector::complex((1..=d).map(|n| C64::new(coeff(n), 0.0)).collect());
            Ok((oscillator(&freqs)?, v))
        })
        .collect()
}
