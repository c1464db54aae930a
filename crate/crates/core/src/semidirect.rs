//! Semidirect products `H = N ⋊ G` of a fiber group `N` by a base group `G`
//! acting through automorphisms.
//!
//! The product is `(n₁, g₁)(n₂, g₂) = (n₁·π(g₁)n₂, g₁g₂)`. Evolution on `H`
//! factorizes: the base component is the evolution of the base control and
//! the fiber component evolves the control twisted by the base path.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evolution::{evol_step, evolve, Control, EvolutionResult, EvolveOptions};
use crate::fit::tail_slope;
use crate::lie::{AlgebraVector, GroupElement, LieGroupSpec};
use crate::regulated::{map_pointwise, merge_partitions, RegulatedPath};

/// Samples used for the seminorm lower bound when `dim 𝔤 > 1`.
pub const SPHERE_SAMPLES: usize = 10_000;

/// An action of a base group on a fiber group by automorphisms.
pub trait Action: Send + Sync {
    fn fiber(&self) -> &LieGroupSpec;
    fn base(&self) -> &LieGroupSpec;

    /// `π(g)n`.
    fn act(&self, g: &GroupElement, n: &GroupElement) -> Result<GroupElement>;

    /// `π̇(g)v`, the induced map on the fiber algebra. Defaults to
    /// `log ∘ π(g) ∘ exp`, which refuses vectors leaving the chart.
    fn derived_act(&self, g: &GroupElement, v: &AlgebraVector) -> Result<AlgebraVector> {
        derived_act_via_chart(self, g, v)
    }

    /// Closed form of `dπ̇(x)v`, if known.
    fn generator(&self, _x: &AlgebraVector, _v: &AlgebraVector) -> Option<Result<AlgebraVector>> {
        None
    }

    /// Closed form of the exponential of `H`, if known.
    fn exp_closed_form(&self, _w: &HalfLieVector) -> Option<Result<HalfLiePoint>> {
        None
    }

    /// Closed form of the `k`-th smooth-vector seminorm, if known.
    fn seminorm_closed_form(&self, _v: &AlgebraVector, _k: u32) -> Option<f64> {
        None
    }

    /// A quantity that stays bounded along truncations exactly when `v` is a
    /// `C¹`-vector, if the action has one.
    fn c1_criterion(&self, _v: &AlgebraVector) -> Option<f64> {
        None
    }
}

/// `log(π(g) exp(v))`.
pub fn derived_act_via_chart<A: Action + ?Sized>(
    action: &A,
    g: &GroupElement,
    v: &AlgebraVector,
) -> Result<AlgebraVector> {
    let n = action.fiber().exp(v)?;
    action.fiber().log_local(&action.act(g, &n)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfLiePoint {
    pub n: GroupElement,
    pub g: GroupElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfLieVector {
    pub v: AlgebraVector,
    pub x: AlgebraVector,
}

impl HalfLieVector {
    pub fn new(v: AlgebraVector, x: AlgebraVector) -> Self {
        Self { v, x }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { v: self.v.scale(s), x: self.x.scale(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { v: self.v.add(&other.v), x: self.x.add(&other.x) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { v: self.v.sub(&other.v), x: self.x.sub(&other.x) }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.v.max_abs_diff(&other.v).max(self.x.max_abs_diff(&other.x))
    }
}

/// Evolution on `H`: the fiber part solves the twisted control, the base
/// part is the evolution of the base control itself.
#[derive(Clone, Debug)]
pub struct HalfEvolution {
    pub fiber: EvolutionResult,
    pub base: EvolutionResult,
}

impl HalfEvolution {
    pub fn endpoint(&self) -> HalfLiePoint {
        HalfLiePoint { n: self.fiber.endpoint.clone(), g: self.base.endpoint.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeminormValue {
    pub value: f64,
    /// False when the value is a sampled lower bound.
    pub exact: bool,
    pub samples: usize,
}

/// Largest residuals of the action axioms on random samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProbeReport {
    pub identity: f64,
    pub homomorphism: f64,
    pub naturality: f64,
    pub derived_homomorphism: f64,
}

impl ProbeReport {
    pub fn max(&self) -> f64 {
        self.identity.max(self.homomorphism).max(self.naturality).max(self.derived_homomorphism)
    }

    /// First check whose residual exceeds `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let checks = [
            ("identity", self.identity),
            ("homomorphism", self.homomorphism),
            ("naturality", self.naturality),
            ("derived homomorphism", self.derived_homomorphism),
        ];
        match checks.iter().find(|(_, r)| !(*r <= tol)) {
            Some(&(check, residual)) => Err(Error::ProbeFailed { check, residual }),
            None => Ok(()),
        }
    }
}

pub struct HalfLieGroup {
    name: String,
    action: Box<dyn Action>,
}

impl core::fmt::Debug for HalfLieGroup {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("HalfLieGroup")
            .field("name", &self.name)
            .field("fiber", self.fiber())
            .field("base", self.base())
            .finish()
    }
}

impl HalfLieGroup {
    pub fn new(name: impl Into<String>, action: impl Action + 'static) -> Self {
        Self { name: name.into(), action: Box::new(action) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn action(&self) -> &dyn Action {
        self.action.as_ref()
    }

    pub fn fiber(&self) -> &LieGroupSpec {
        self.action.fiber()
    }

    pub fn base(&self) -> &LieGroupSpec {
        self.action.base()
    }

    pub fn identity(&self) -> HalfLiePoint {
        HalfLiePoint { n: self.fiber().identity(), g: self.base().identity() }
    }

    pub fn zero(&self) -> HalfLieVector {
        HalfLieVector { v: self.fiber().zero(), x: self.base().zero() }
    }

    pub fn check_point(&self, a: &HalfLiePoint) -> Result<()> {
        self.fiber().check_element(&a.n)?;
        self.base().check_element(&a.g)
    }

    pub fn check_vector(&self, w: &HalfLieVector) -> Result<()> {
        self.fiber().check_vector(&w.v)?;
        self.base().check_vector(&w.x)
    }

    pub fn h_multiply(&self, a: &HalfLiePoint, b: &HalfLiePoint) -> Result<HalfLiePoint> {
        self.check_point(a)?;
        self.check_point(b)?;
        let twisted = self.action.act(&a.g, &b.n)?;
        Ok(HalfLiePoint { n: self.fiber().multiply(&a.n, &twisted)?, g: self.base().multiply(&a.g, &b.g)? })
    }

    pub fn h_inverse(&self, a: &HalfLiePoint) -> Result<HalfLiePoint> {
        self.check_point(a)?;
        let g_inv = self.base().inverse(&a.g)?;
        let n_inv = self.fiber().inverse(&a.n)?;
        Ok(HalfLiePoint { n: self.action.act(&g_inv, &n_inv)?, g: g_inv })
    }

    /// `a^k` by repeated squaring.
    pub fn h_pow(&self, a: &HalfLiePoint, mut k: u128) -> Result<HalfLiePoint> {
        let mut result = self.identity();
        let mut square = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = self.h_multiply(&result, &square)?;
            }
            k >>= 1;
            if k > 0 {
                square = self.h_multiply(&square, &square)?;
            }
        }
        Ok(result)
    }

    /// Product metric: chart error on the fiber plus the base distance.
    pub fn distance(&self, a: &HalfLiePoint, b: &HalfLiePoint) -> Result<f64> {
        Ok(self.fiber().chart_error(&a.n, &b.n)? + self.base().distance(&a.g, &b.g)?)
    }

    /// Largest coordinate deviation of the two components.
    pub fn max_abs_diff(&self, a: &HalfLiePoint, b: &HalfLiePoint) -> f64 {
        a.n.max_abs_diff(&b.n).max(a.g.max_abs_diff(&b.g))
    }

    /// `π̇(g)v`.
    pub fn derived_act(&self, g: &GroupElement, v: &AlgebraVector) -> Result<AlgebraVector> {
        self.action.derived_act(g, v)
    }

    /// The fiber control `t ↦ π̇(Evol(β)(t)) α(t)` sampled at midpoints on
    /// the merged partition of `α`, `β` and a uniform grid of `pieces`.
    pub fn twisted_control(&self, alpha: &RegulatedPath, beta: &RegulatedPath, pieces: usize) -> Result<RegulatedPath> {
        let base_path = evol_step(self.base(), beta, &[])?;
        let carrier = |t: f64| base_path.at(self.base(), t);
        let f = |g: &GroupElement, v: &AlgebraVector| self.action.derived_act(g, v);
        map_pointwise(self.fiber(), self.fiber(), &carrier, alpha, &f, pieces)
    }

    /// Evolution on `H` of the control `(α, β)`.
    pub fn evol_h(&self, alpha: &RegulatedPath, beta: &RegulatedPath, tol: f64) -> Result<HalfEvolution> {
        self.evol_h_with(alpha, beta, tol, &EvolveOptions::default())
    }

    pub fn evol_h_with(
        &self,
        alpha: &RegulatedPath,
        beta: &RegulatedPath,
        tol: f64,
        opts: &EvolveOptions,
    ) -> Result<HalfEvolution> {
        self.fiber().check_vector(&alpha.values()[0])?;
        self.base().check_vector(&beta.values()[0])?;
        let base = evolve(self.base(), Control::Step(beta), tol, opts)?;
        let twisted = |t: f64| -> Result<AlgebraVector> {
            let g = base.at(self.base(), t)?;
            self.action.derived_act(&g, alpha.eval(t))
        };
        let partition = merge_partitions(alpha.breakpoints(), beta.breakpoints());
        let fiber = evolve(self.fiber(), Control::Curve { curve: &twisted, partition: &partition }, tol, opts)?;
        Ok(HalfEvolution { fiber, base })
    }

    /// Exponential of `H` through the evolution of the constant control.
    pub fn exp_h(&self, w: &HalfLieVector, tol: f64) -> Result<HalfLiePoint> {
        self.check_vector(w)?;
        let alpha = RegulatedPath::constant(w.v.clone());
        let beta = RegulatedPath::constant(w.x.clone());
        Ok(self.evol_h(&alpha, &beta, tol)?.endpoint())
    }

    /// The closed-form exponential when the action registers one, otherwise
    /// [`exp_h`](Self::exp_h).
    pub fn exp_reference(&self, w: &HalfLieVector, tol: f64) -> Result<HalfLiePoint> {
        self.check_vector(w)?;
        match self.action.exp_closed_form(w) {
            Some(r) => r,
            None => self.exp_h(w, tol),
        }
    }

    /// `dπ̇(x)v = d/ds|₀ π̇(exp(sx))v`: the registered generator, or central
    /// differences with Richardson extrapolation.
    pub fn d_derived_action(&self, x: &AlgebraVector, v: &AlgebraVector) -> Result<AlgebraVector> {
        self.base().check_vector(x)?;
        self.fiber().check_vector(v)?;
        if let Some(r) = self.action.generator(x, v) {
            return r;
        }
        if self.base().norm(x) == 0.0 || self.fiber().norm(v) == 0.0 {
            return Ok(self.fiber().zero());
        }
        let orbit = |s: f64| self.action.derived_act(&self.base().exp(&x.scale(s))?, v);
        let central = |h: f64| -> Result<AlgebraVector> { Ok(orbit(h)?.sub(&orbit(-h)?).scale(0.5 / h)) };
        let mut h = 1e-2;
        let mut coarse = central(h)?;
        let mut previous: Option<AlgebraVector> = None;
        for _ in 0..12 {
            h *= 0.5;
            let fine = central(h)?;
            let extrapolated = fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0));
            if let Some(p) = &previous {
                let scale = 1.0 + self.fiber().norm(&extrapolated);
                if self.fiber().norm(&extrapolated.sub(p)) <= 1e-8 * scale {
                    return Ok(extrapolated);
                }
            }
            previous = Some(extrapolated);
            coarse = fine;
        }
        Err(Error::NotDifferentiable)
    }

    /// `[(v₁,x₁),(v₂,x₂)] = ([v₁,v₂] + dπ̇(x₁)v₂ − dπ̇(x₂)v₁, [x₁,x₂])`.
    pub fn h_bracket(&self, w1: &HalfLieVector, w2: &HalfLieVector) -> Result<HalfLieVector> {
        self.check_vector(w1)?;
        self.check_vector(w2)?;
        let partial = |x: &AlgebraVector, v: &AlgebraVector| match self.d_derived_action(x, v) {
            Err(Error::NotDifferentiable) | Err(Error::NoGenerator) => Err(Error::PartialBracketUndefined),
            other => other,
        };
        let v = self
            .fiber()
            .bracket(&w1.v, &w2.v)?
            .add(&partial(&w1.x, &w2.v)?)
            .sub(&partial(&w2.x, &w1.v)?);
        Ok(HalfLieVector { v, x: self.base().bracket(&w1.x, &w2.x)? })
    }

    /// `p_k(v) = sup ‖dπ̇(x₁)…dπ̇(x_k)v‖` over unit `xᵢ`. Exact when the base
    /// is one-dimensional; otherwise a lower bound from sphere samples.
    pub fn seminorm_pk(&self, v: &AlgebraVector, k: u32) -> Result<SeminormValue> {
        self.fiber().check_vector(v)?;
        if k == 0 {
            return Err(Error::InvalidArgument("seminorm order must be positive".into()));
        }
        let unit = self.base().basis_vector(0);
        let generate = |x: &AlgebraVector, w: &AlgebraVector| match self.action.generator(x, w) {
            Some(r) => r,
            None => Err(Error::NoGenerator),
        };
        generate(&unit, &self.fiber().zero())?;
        if let Some(value) = self.action.seminorm_closed_form(v, k) {
            return Ok(SeminormValue { value, exact: true, samples: 0 });
        }
        if self.base().dimension() == 1 {
            let x = unit.scale(1.0 / self.base().norm(&unit));
            let mut w = v.clone();
            for _ in 0..k {
                w = generate(&x, &w)?;
            }
            return Ok(SeminormValue { value: self.fiber().norm(&w), exact: true, samples: 0 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut best: f64 = 0.0;
        for _ in 0..SPHERE_SAMPLES {
            let mut w = v.clone();
            for _ in 0..k {
                let x = self.base().random_on_sphere(&mut rng, 1.0);
                w = generate(&x, &w)?;
            }
            best = best.max(self.fiber().norm(&w));
        }
        Ok(SeminormValue { value: best, exact: false, samples: SPHERE_SAMPLES })
    }

    /// Residuals of the action axioms on `samples` seeded random points of
    /// size at most `scale`.
    pub fn probe(&self, samples: usize, scale: f64, seed: u64) -> Result<ProbeReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (fiber, base) = (self.fiber(), self.base());
        let mut report = ProbeReport::default();
        for _ in 0..samples {
            let g1 = base.exp(&base.random_vector(&mut rng, scale))?;
            let g2 = base.exp(&base.random_vector(&mut rng, scale))?;
            let v = fiber.random_vector(&mut rng, scale);
            let n = fiber.exp(&v)?;

            let fixed = self.action.act(&base.identity(), &n)?;
            report.identity = report.identity.max(fixed.max_abs_diff(&n));

            let joint = self.action.act(&base.multiply(&g1, &g2)?, &n)?;
            let nested = self.action.act(&g1, &self.action.act(&g2, &n)?)?;
            report.homomorphism = report.homomorphism.max(joint.max_abs_diff(&nested));

            let lhs = self.action.act(&g1, &n)?;
            let rhs = fiber.exp(&self.action.derived_act(&g1, &v)?)?;
            report.naturality = report.naturality.max(lhs.max_abs_diff(&rhs));

            let joint = self.action.derived_act(&base.multiply(&g1, &g2)?, &v)?;
            let nested = self.action.derived_act(&g1, &self.action.derived_act(&g2, &v)?)?;
            report.derived_homomorphism = report.derived_homomorphism.max(joint.max_abs_diff(&nested));
        }
        Ok(report)
    }
}

/// One rung of a truncation ladder: a vector in a `dim`-mode truncation.
pub struct LadderLevel<'a> {
    pub dim: usize,
    pub group: &'a HalfLieGroup,
    pub vector: AlgebraVector,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CkVerdict {
    Bounded,
    Diverging { exponent: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CkDiagnostic {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub verdict: CkVerdict,
}

/// Slope below which a seminorm sequence counts as bounded.
pub const BOUNDED_SLOPE: f64 = 0.05;

/// Growth of `p_k` along a truncation ladder, fitted on the upper half of
/// the levels.
pub fn ck_vector_diagnostic(levels: &[LadderLevel<'_>], k: u32) -> Result<CkDiagnostic> {
    if levels.len() < 4 {
        return Err(Error::TooFewLevels { found: levels.len(), needed: 4 });
    }
    let dims: Vec<usize> = levels.iter().map(|l| l.dim).collect();
    let values = levels
        .iter()
        .map(|l| Ok(l.group.seminorm_pk(&l.vector, k)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let xs: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
    let slope = tail_slope(&xs, &values);
    let verdict = if slope < BOUNDED_SLOPE { CkVerdict::Bounded } else { CkVerdict::Diverging { exponent: slope } };
    Ok(CkDiagnostic { dims, values, slope, verdict })
}
