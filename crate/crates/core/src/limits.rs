//! Product formulas on `H`: strong Trotter, Trotter pairs and group
//! commutators, with convergence reports, plus the norm inequalities used
//! in the proof of the Trotter theorem.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fit::tail_slope;
use crate::lie::{AlgebraVector, GroupElement, LieGroupSpec};
use crate::semidirect::{HalfLieGroup, HalfLiePoint, HalfLieVector};

/// Tolerance for the exponential used as a target when no closed form is
/// registered.
pub const TARGET_TOL: f64 = 1e-11;
/// Tolerance below which a curve counts as starting at the identity.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Numerical slack allowed in the bound suite.
pub const BOUND_SLACK: f64 = 1e-9;

/// The default index grid `2⁴, 2⁵, …, 2¹²`.
pub fn default_indices() -> Vec<u64> {
    (4..=12).map(|k| 1u64 << k).collect()
}

/// The default commutator grid `2⁴, …, 2⁸`; the cost grows like `n²`.
pub fn default_commutator_indices() -> Vec<u64> {
    (4..=8).map(|k| 1u64 << k).collect()
}

type CurveFn<'a> = dyn Fn(f64) -> Result<HalfLiePoint> + Send + Sync + 'a;

/// A `C¹` curve through the identity of `H` with its declared velocity.
pub struct HCurve<'a> {
    eval: Box<CurveFn<'a>>,
    pub derivative: HalfLieVector,
    /// The base component is `s ↦ exp(s x)`.
    pub base_one_parameter: bool,
    /// The fiber velocity satisfies the action's `C¹` criterion.
    pub fiber_velocity_c1: bool,
}

impl<'a> HCurve<'a> {
    pub fn new(derivative: HalfLieVector, eval: impl Fn(f64) -> Result<HalfLiePoint> + Send + Sync + 'a) -> Self {
        Self { eval: Box::new(eval), derivative, base_one_parameter: false, fiber_velocity_c1: false }
    }

    /// `s ↦ exp(s w)`.
    pub fn one_parameter(group: &'a HalfLieGroup, w: HalfLieVector) -> Self {
        let direction = w.clone();
        let mut curve = Self::new(w, move |s| group.exp_reference(&direction.scale(s), TARGET_TOL));
        curve.base_one_parameter = true;
        curve
    }

    pub fn declare_base_one_parameter(mut self, flag: bool) -> Self {
        self.base_one_parameter = flag;
        self
    }

    pub fn declare_fiber_c1(mut self, flag: bool) -> Self {
        self.fiber_velocity_c1 = flag;
        self
    }

    pub fn eval(&self, s: f64) -> Result<HalfLiePoint> {
        (self.eval)(s)
    }

    fn check_origin(&self, group: &HalfLieGroup) -> Result<()> {
        let start = self.eval(0.0)?;
        group.check_point(&start)?;
        group.check_vector(&self.derivative)?;
        let offset = group.distance(&group.identity(), &start).unwrap_or(f64::INFINITY);
        if offset > IDENTITY_TOL {
            return Err(Error::NotAtIdentity { offset });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converging,
    Stalled,
    Diverging,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converging => "converging",
            Verdict::Stalled => "stalled",
            Verdict::Diverging => "diverging",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub indices: Vec<u64>,
    /// Distance of each product to the target, or successive differences
    /// when there is no target. Chart escapes are infinite.
    pub errors: Vec<f64>,
    /// Decay rate: minus the log-log slope of the errors over the tail half.
    pub fitted_exponent: f64,
    pub target: Option<HalfLiePoint>,
    pub products: Vec<HalfLiePoint>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    /// Builds the report from products computed at `indices`, in any
    /// evaluation order but listed by index.
    pub fn assemble(
        group: &HalfLieGroup,
        indices: Vec<u64>,
        products: Vec<HalfLiePoint>,
        target: Option<HalfLiePoint>,
        tolerance: f64,
    ) -> Result<Self> {
        if indices.is_empty() || indices.len() != products.len() {
            return Err(Error::InvalidArgument("one product per index is required".into()));
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("indices must be strictly increasing".into()));
        }
        let metric = |a: &HalfLiePoint, b: &HalfLiePoint| match group.distance(a, b) {
            Ok(d) => Ok(d),
            Err(Error::OutOfChart { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        };
        let (indices, errors, products) = match &target {
            Some(t) => {
                let errors = products.iter().map(|p| metric(p, t)).collect::<Result<Vec<_>>>()?;
                (indices, errors, products)
            }
            None => {
                if indices.len() < 2 {
                    return Err(Error::InvalidArgument("successive differences need two indices".into()));
                }
                let errors = products.windows(2).map(|w| metric(&w[0], &w[1])).collect::<Result<Vec<_>>>()?;
                (indices[1..].to_vec(), errors, products[1..].to_vec())
            }
        };
        let (fitted_exponent, verdict) = judge(&indices, &errors, tolerance);
        Ok(Self { indices, errors, fitted_exponent, target, products, tolerance, verdict })
    }

    pub fn final_error(&self) -> f64 {
        *self.errors.last().expect("nonempty")
    }
}

fn judge(indices: &[u64], errors: &[f64], tol: f64) -> (f64, Verdict) {
    let finite: Vec<(f64, f64)> =
        indices.iter().zip(errors).filter(|(_, e)| e.is_finite()).map(|(&n, &e)| (n as f64, e)).collect();
    let xs: Vec<f64> = finite.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = finite.iter().map(|p| p.1).collect();
    let exponent = if xs.len() >= 2 { -tail_slope(&xs, &ys) } else { 0.0 };
    let first = errors[0];
    let last = errors[errors.len() - 1];
    let verdict = if last < tol && (last < first / 4.0 || first < tol) {
        Verdict::Converging
    } else if !last.is_finite() || (errors.len() >= 2 && exponent < -0.05) {
        Verdict::Diverging
    } else {
        Verdict::Stalled
    };
    (exponent, verdict)
}

/// `ζ(t/n)ⁿ`.
pub fn strong_trotter_product(group: &HalfLieGroup, zeta: &HCurve<'_>, t: f64, n: u64) -> Result<HalfLiePoint> {
    group.h_pow(&zeta.eval(t / n as f64)?, n as u128)
}

/// `(γ₁(t/n) γ₂(t/n))ⁿ`.
pub fn trotter_pair_product(
    group: &HalfLieGroup,
    gamma1: &HCurve<'_>,
    gamma2: &HCurve<'_>,
    t: f64,
    n: u64,
) -> Result<HalfLiePoint> {
    let s = t / n as f64;
    let factor = group.h_multiply(&gamma1.eval(s)?, &gamma2.eval(s)?)?;
    group.h_pow(&factor, n as u128)
}

/// `(γ₁(s) γ₂(s) γ₁(−s) γ₂(−s))^{n²}` with `s = √t / n`.
pub fn commutator_product(
    group: &HalfLieGroup,
    gamma1: &HCurve<'_>,
    gamma2: &HCurve<'_>,
    t: f64,
    n: u64,
) -> Result<HalfLiePoint> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("commutator time must be nonnegative".into()));
    }
    let s = libm::sqrt(t) / n as f64;
    let left = group.h_multiply(&gamma1.eval(s)?, &gamma2.eval(s)?)?;
    let right = group.h_multiply(&gamma1.eval(-s)?, &gamma2.eval(-s)?)?;
    let factor = group.h_multiply(&left, &right)?;
    group.h_pow(&factor, (n as u128) * (n as u128))
}

/// Target `exp(t ζ'(0))` of the strong Trotter sequence.
pub fn strong_trotter_target(group: &HalfLieGroup, zeta: &HCurve<'_>, t: f64) -> Result<HalfLiePoint> {
    group.exp_reference(&zeta.derivative.scale(t), TARGET_TOL)
}

pub fn trotter_pair_target(group: &HalfLieGroup, g1: &HCurve<'_>, g2: &HCurve<'_>, t: f64) -> Result<HalfLiePoint> {
    group.exp_reference(&g1.derivative.add(&g2.derivative).scale(t), TARGET_TOL)
}

/// `exp(t [γ₁'(0), γ₂'(0)])`, or `None` when the bracket is undefined.
pub fn commutator_target(
    group: &HalfLieGroup,
    g1: &HCurve<'_>,
    g2: &HCurve<'_>,
    t: f64,
) -> Result<Option<HalfLiePoint>> {
    match group.h_bracket(&g1.derivative, &g2.derivative) {
        Ok(b) => Ok(Some(group.exp_reference(&b.scale(t), TARGET_TOL)?)),
        Err(Error::PartialBracketUndefined) => Ok(None),
        Err(e) => Err(e),
    }
}

fn check_indices(indices: &[u64]) -> Result<()> {
    if indices.is_empty() || indices[0] == 0 {
        return Err(Error::InvalidArgument("indices must be nonempty and positive".into()));
    }
    Ok(())
}

pub fn strong_trotter_sequence(
    group: &HalfLieGroup,
    zeta: &HCurve<'_>,
    t: f64,
    indices: &[u64],
    tol: f64,
) -> Result<ConvergenceReport> {
    check_indices(indices)?;
    zeta.check_origin(group)?;
    let target = strong_trotter_target(group, zeta, t)?;
    let products = indices.iter().map(|&n| strong_trotter_product(group, zeta, t, n)).collect::<Result<Vec<_>>>()?;
    ConvergenceReport::assemble(group, indices.to_vec(), products, Some(target), tol)
}

pub fn trotter_pair_sequence(
    group: &HalfLieGroup,
    gamma1: &HCurve<'_>,
    gamma2: &HCurve<'_>,
    t: f64,
    indices: &[u64],
    tol: f64,
) -> Result<ConvergenceReport> {
    check_indices(indices)?;
    gamma1.check_origin(group)?;
    gamma2.check_origin(group)?;
    let target = trotter_pair_target(group, gamma1, gamma2, t)?;
    let products = indices
        .iter()
        .map(|&n| trotter_pair_product(group, gamma1, gamma2, t, n))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceReport::assemble(group, indices.to_vec(), products, Some(target), tol)
}

/// Group-commutator products against `exp(t [γ₁'(0), γ₂'(0)])`. Without a
/// bracket the report carries successive differences instead.
pub fn commutator_sequence(
    group: &HalfLieGroup,
    gamma1: &HCurve<'_>,
    gamma2: &HCurve<'_>,
    t: f64,
    indices: &[u64],
    tol: f64,
) -> Result<ConvergenceReport> {
    check_indices(indices)?;
    gamma1.check_origin(group)?;
    gamma2.check_origin(group)?;
    let target = commutator_target(group, gamma1, gamma2, t)?;
    let products = indices
        .iter()
        .map(|&n| commutator_product(group, gamma1, gamma2, t, n))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceReport::assemble(group, indices.to_vec(), products, target, tol)
}

/// Depth of the extrapolation table; older rows drop out.
const RICHARDSON_COLUMNS: usize = 4;

/// Coordinatewise limit of the commutator products as `n → ∞`.
#[derive(Clone, Debug)]
pub struct CommutatorLimit {
    pub limit: HalfLiePoint,
    /// Largest `n` used by any coordinate.
    pub max_index: u64,
    /// Largest change between the last two extrapolated estimates.
    pub residual: f64,
    pub converged: bool,
}

/// Richardson extrapolation in `1/n` over `n = start, 2·start, …`, up to
/// `max_index`. Each coordinate stops once its diagonal estimates agree to
/// `tol·(1 + |value|)`.
pub fn commutator_limit(
    group: &HalfLieGroup,
    gamma1: &HCurve<'_>,
    gamma2: &HCurve<'_>,
    t: f64,
    start: u64,
    max_index: u64,
    tol: f64,
) -> Result<CommutatorLimit> {
    if start == 0 || max_index < start {
        return Err(Error::InvalidArgument("extrapolation needs 0 < start <= max_index".into()));
    }
    let flat = |p: &HalfLiePoint| {
        let mut v = p.n.flatten();
        v.extend(p.g.flatten());
        v
    };
    let first = commutator_product(group, gamma1, gamma2, t, start)?;
    let shape = first.clone();
    let width = flat(&first).len();
    let mut tables: Vec<Vec<f64>> = flat(&first).into_iter().map(|x| alloc::vec![x]).collect();
    let mut estimate: Vec<f64> = tables.iter().map(|row| row[0]).collect();
    let mut change = alloc::vec![f64::INFINITY; width];
    let mut done = alloc::vec![false; width];
    let mut n = start;
    let mut used = start;
    while done.iter().any(|d| !d) && n <= max_index / 2 {
        n *= 2;
        used = n;
        let values = flat(&commutator_product(group, gamma1, gamma2, t, n)?);
        for i in 0..width {
            if done[i] {
                continue;
            }
            let previous = tables[i].clone();
            let mut row = alloc::vec![values[i]];
            for j in 1..=previous.len().min(RICHARDSON_COLUMNS) {
                let factor = libm::ldexp(1.0, j as i32) - 1.0;
                row.push(row[j - 1] + (row[j - 1] - previous[j - 1]) / factor);
            }
            let best = *row.last().expect("nonempty");
            change[i] = (best - estimate[i]).abs();
            estimate[i] = best;
            tables[i] = row;
            if change[i] <= tol * (1.0 + best.abs()) {
                done[i] = true;
            }
        }
    }
    let split = shape.n.flatten().len();
    let limit = HalfLiePoint { n: shape.n.with_flat(&estimate[..split]), g: shape.g.with_flat(&estimate[split..]) };
    let residual = change.iter().cloned().fold(0.0, f64::max);
    Ok(CommutatorLimit { limit, max_index: used, residual, converged: done.iter().all(|d| *d) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarCondition {
    HoldsVia1,
    HoldsVia2,
    Unknown,
}

impl StarCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            StarCondition::HoldsVia1 => "holds_via_1",
            StarCondition::HoldsVia2 => "holds_via_2",
            StarCondition::Unknown => "unknown",
        }
    }
}

/// Which sufficient condition for the compatibility of a curve pair
/// applies: the base part of the first curve is a one-parameter group, or
/// the fiber velocity of the second is a `C¹`-vector. Never reports failure.
pub fn star_condition_check(gamma1: &HCurve<'_>, gamma2: &HCurve<'_>) -> StarCondition {
    if gamma1.base_one_parameter {
        StarCondition::HoldsVia1
    } else if gamma2.fiber_velocity_c1 {
        StarCondition::HoldsVia2
    } else {
        StarCondition::Unknown
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub claim: String,
    pub samples: usize,
    pub max_slack: f64,
    pub min_slack: f64,
    pub violations: usize,
    pub discarded: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub radius: f64,
    pub constant: f64,
    pub rows: Vec<BoundRow>,
    /// Largest residual of `e^x e^y e^{−x} = exp(e^{ad x} y)`.
    pub conjugation_residual: f64,
}

impl BoundReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }
}

struct SlackTally {
    samples: usize,
    max: f64,
    min: f64,
    violations: usize,
    discarded: usize,
}

impl SlackTally {
    fn new() -> Self {
        Self { samples: 0, max: f64::NEG_INFINITY, min: f64::INFINITY, violations: 0, discarded: 0 }
    }

    fn record(&mut self, slack: f64) {
        self.samples += 1;
        self.max = self.max.max(slack);
        self.min = self.min.min(slack);
        if slack < -BOUND_SLACK {
            self.violations += 1;
        }
    }

    fn row(self, claim: &str) -> BoundRow {
        let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
        BoundRow {
            claim: claim.into(),
            samples: self.samples,
            max_slack: finite(self.max),
            min_slack: finite(self.min),
            violations: self.violations,
            discarded: self.discarded,
        }
    }
}

fn sample_ball(spec: &LieGroupSpec, rng: &mut ChaCha8Rng, r: f64) -> AlgebraVector {
    let radius = r * rng.gen::<f64>();
    spec.random_on_sphere(rng, radius)
}

/// Checks `‖x*y‖ ≤ ‖x+y‖ + C(‖x‖²+‖y‖²)/2` with `C = 2/r²` and
/// `‖e^{ad x} y‖ ≤ e^{‖x‖}‖y‖` on seeded pairs in the ball of radius `r`.
pub fn bound_suite(spec: &LieGroupSpec, samples: usize, r: f64, seed: u64) -> Result<BoundReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let constant = 2.0 / (r * r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut product = SlackTally::new();
    let mut adjoint = SlackTally::new();
    let mut conjugation_residual: f64 = 0.0;
    for _ in 0..samples {
        let x = sample_ball(spec, &mut rng, r);
        let y = sample_ball(spec, &mut rng, r);
        let (nx, ny) = (spec.norm(&x), spec.norm(&y));
        match spec.local_multiply(&x, &y) {
            Ok(z) => {
                let bound = spec.norm(&x.add(&y)) + constant * (nx * nx + ny * ny) / 2.0;
                product.record(bound - spec.norm(&z));
            }
            Err(Error::OutOfChart { .. }) => product.discarded += 1,
            Err(e) => return Err(e),
        }
        let moved = spec.exp_ad(&x, &y)?;
        adjoint.record(libm::exp(nx) * ny - spec.norm(&moved));
        let gx = spec.exp(&x)?;
        let lhs = spec.multiply(&spec.multiply(&gx, &spec.exp(&y)?)?, &spec.inverse(&gx)?)?;
        let rhs = spec.exp(&moved)?;
        conjugation_residual = conjugation_residual.max(lhs.max_abs_diff(&rhs));
    }
    Ok(BoundReport {
        radius: r,
        constant,
        rows: alloc::vec![product.row("1.1"), adjoint.row("1.4")],
        conjugation_residual,
    })
}

/// `a_n(ρ) = ((Cρ + 1)ⁿ − 1)/C`.
pub fn a_n(c: f64, rho: f64, n: u64) -> f64 {
    libm::expm1(n as f64 * libm::log1p(c * rho)) / c
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnReport {
    /// Largest relative residual of `a_{2m} = 2a_m + C a_m²` for `m < n`.
    pub doubling_residual: f64,
    /// `a_m(ρ/m)` for `m = 1, 2, 4, …, n`.
    pub chain: Vec<(u64, f64)>,
    pub bound: f64,
    /// The chain is nondecreasing and stays below `(e^{Cρ} − 1)/C`.
    pub bound_holds: bool,
}

/// Checks the doubling identity and the bound `a_m(ρ/m) ≤ (e^{Cρ} − 1)/C`
/// along the powers of two up to `n`.
pub fn an_identities(c: f64, rho: f64, n: u64) -> Result<AnReport> {
    if !(c > 0.0 && rho > 0.0) || n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument("need C > 0, ρ > 0 and n a power of two".into()));
    }
    let bound = libm::expm1(c * rho) / c;
    let mut doubling_residual: f64 = 0.0;
    let mut chain = Vec::new();
    let mut m = 1u64;
    loop {
        let value = a_n(c, rho / m as f64, m);
        chain.push((m, value));
        if m < n {
            let arg = rho / (2 * m) as f64;
            let am = a_n(c, arg, m);
            let a2m = a_n(c, arg, 2 * m);
            let residual = (a2m - (2.0 * am + c * am * am)).abs() / a2m.abs().max(1.0);
            doubling_residual = doubling_residual.max(residual);
        }
        if m == n {
            break;
        }
        m *= 2;
    }
    let tol = 1e-12 * bound.max(1.0);
    let bound_holds = chain.iter().all(|&(_, v)| v <= bound + tol)
        && chain.windows(2).all(|w| w[1].1 + tol >= w[0].1);
    Ok(AnReport { doubling_residual, chain, bound, bound_holds })
}

/// The group element of `H` with the given fiber element and identity base.
pub fn fiber_point(group: &HalfLieGroup, n: GroupElement) -> HalfLiePoint {
    HalfLiePoint { n, g: group.base().identity() }
}
