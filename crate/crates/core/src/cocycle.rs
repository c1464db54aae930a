//! Cocycles `α(t + s) = α(t) + U_t α(s)` of a linear flow `U` on a vector
//! fiber, and their smoothing by averaging against a bump function.
//!
//! With `v = ∫ f(s) α(s) ds` the cocycle `β(t) = α(t) + U_t v − v` differs
//! from `α` by a coboundary and equals `∫ f(u) α(u + t) du − v`, which is as
//! smooth as `f`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement};
use crate::linalg::Matrix;
use crate::semidirect::{HalfLieGroup, HalfLiePoint};

/// Absolute tolerance of the quadratures.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Relative disagreement below which a derivative counts as resolved.
pub const SMOOTHNESS_THRESHOLD: f64 = 1e-3;

const MAX_QUADRATURE_DEPTH: u32 = 40;
const INITIAL_PANELS: usize = 8;
const WINDOW_SLACK: f64 = 1e-12;

/// A linear flow `(t, v) ↦ U_t v` on the fiber.
pub type Flow<'a> = dyn Fn(f64, &AlgebraVector) -> Result<AlgebraVector> + Send + Sync + 'a;

type VectorCurve<'a> = dyn Fn(f64) -> Result<AlgebraVector> + Send + Sync + 'a;

/// Euclidean norm of the real coordinates.
pub fn vector_norm(v: &AlgebraVector) -> f64 {
    libm::sqrt(v.flatten().iter().map(|x| x * x).sum())
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclaredClass {
    /// `α(t) = U_t w − w`.
    Coboundary(AlgebraVector),
    General,
}

/// A fiber-valued curve on the window `[0, T]`.
pub struct CocycleCurve<'a> {
    eval: Box<VectorCurve<'a>>,
    window: f64,
    pub class: DeclaredClass,
}

impl<'a> CocycleCurve<'a> {
    pub fn new(window: f64, eval: impl Fn(f64) -> Result<AlgebraVector> + Send + Sync + 'a) -> Result<Self> {
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::InvalidInterval { a: 0.0, b: window });
        }
        Ok(Self { eval: Box::new(eval), window, class: DeclaredClass::General })
    }

    /// `t ↦ U_t w − w`.
    pub fn coboundary(window: f64, flow: &'a Flow<'a>, w: AlgebraVector) -> Result<Self> {
        let base = w.clone();
        let mut curve = Self::new(window, move |t| Ok(flow(t, &base)?.sub(&base)))?;
        curve.class = DeclaredClass::Coboundary(w);
        Ok(curve)
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn eval(&self, t: f64) -> Result<AlgebraVector> {
        if !(t >= -WINDOW_SLACK && t <= self.window + WINDOW_SLACK) {
            return Err(Error::OutsideWindow { t, start: 0.0, end: self.window });
        }
        (self.eval)(t.clamp(0.0, self.window))
    }
}

/// `‖U_t α(s) − α(t + s) + α(t)‖`.
pub fn cocycle_defect(alpha: &CocycleCurve<'_>, flow: &Flow<'_>, s: f64, t: f64) -> Result<f64> {
    let moved = flow(t, &alpha.eval(s)?)?;
    let residual = moved.sub(&alpha.eval(t + s)?).add(&alpha.eval(t)?);
    Ok(vector_norm(&residual))
}

/// Largest defect over an `n × n` grid of `(s, t)` with `s + t` inside the
/// window.
pub fn max_cocycle_defect(alpha: &CocycleCurve<'_>, flow: &Flow<'_>, n: usize) -> Result<f64> {
    let step = alpha.window() / (2 * n.max(1)) as f64;
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            worst = worst.max(cocycle_defect(alpha, flow, i as f64 * step, j as f64 * step)?);
        }
    }
    Ok(worst)
}

/// A nonnegative profile on `(0, 1)` vanishing to all orders at the ends.
pub type Profile = fn(f64) -> f64;

/// `exp(−1/(1 − x²))` with `x = 2u − 1`.
pub fn standard_profile(u: f64) -> f64 {
    let x = 2.0 * u - 1.0;
    let q = 1.0 - x * x;
    if q <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / q)
    }
}

/// `exp(−1/(u(1 − u)))`, flatter at the ends than the standard profile.
pub fn logistic_profile(u: f64) -> f64 {
    let q = u * (1.0 - u);
    if q <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / q)
    }
}

/// A smooth bump of mass one supported on `[start, start + length]`.
#[derive(Clone, Copy, Debug)]
pub struct BumpFunction {
    start: f64,
    length: f64,
    profile: Profile,
    scale: f64,
}

impl BumpFunction {
    /// The standard mollifier on `[0, length]`.
    pub fn standard(length: f64) -> Result<Self> {
        Self::with_profile(0.0, length, standard_profile)
    }

    pub fn with_profile(start: f64, length: f64, profile: Profile) -> Result<Self> {
        if !(length > 0.0 && length.is_finite() && start.is_finite()) {
            return Err(Error::InvalidInterval { a: start, b: start + length });
        }
        let mass = integrate(&|u| Ok(vec![profile(u)]), 0.0, 1.0, 1e-14)?[0];
        if !(mass > 0.0) {
            return Err(Error::InvalidArgument("bump profile has no mass".into()));
        }
        Ok(Self { start, length, profile, scale: 1.0 / (mass * length) })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.start, self.start + self.length)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eval(&self, s: f64) -> f64 {
        let u = (s - self.start) / self.length;
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else {
            (self.profile)(u) * self.scale
        }
    }

    pub fn mass(&self) -> Result<f64> {
        let (a, b) = self.support();
        Ok(integrate(&|s| Ok(vec![self.eval(s)]), a, b, QUADRATURE_TOL)?[0])
    }
}

fn simpson(fa: &[f64], fm: &[f64], fb: &[f64], h: f64) -> Vec<f64> {
    fa.iter().zip(fm).zip(fb).map(|((a, m), b)| h / 6.0 * (a + 4.0 * m + b)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Adaptive Simpson quadrature of a vector-valued integrand with the
/// Richardson correction on accepted panels.
pub fn integrate(f: &dyn Fn(f64) -> Result<Vec<f64>>, a: f64, b: f64, tol: f64) -> Result<Vec<f64>> {
    if !(b >= a) {
        return Err(Error::InvalidInterval { a, b });
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut total: Option<Vec<f64>> = None;
    struct Panel {
        a: f64,
        b: f64,
        fa: Vec<f64>,
        fm: Vec<f64>,
        fb: Vec<f64>,
        whole: Vec<f64>,
        tol: f64,
        depth: u32,
    }
    let mut stack = Vec::new();
    let mut left = f(a)?;
    for i in 0..INITIAL_PANELS {
        let pa = a + i as f64 * width;
        let pb = if i + 1 == INITIAL_PANELS { b } else { pa + width };
        let fm = f(0.5 * (pa + pb))?;
        let fb = f(pb)?;
        let whole = simpson(&left, &fm, &fb, pb - pa);
        stack.push(Panel { a: pa, b: pb, fa: left, fm, fb: fb.clone(), whole, tol: tol / INITIAL_PANELS as f64, depth: 0 });
        left = fb;
    }
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = f(0.5 * (p.a + m))?;
        let frm = f(0.5 * (m + p.b))?;
        let h = 0.5 * (p.b - p.a);
        let lower = simpson(&p.fa, &flm, &p.fm, h);
        let upper = simpson(&p.fm, &frm, &p.fb, h);
        let refined: Vec<f64> = lower.iter().zip(&upper).map(|(x, y)| x + y).collect();
        let diff = max_diff(&refined, &p.whole);
        if diff <= 15.0 * p.tol || (p.b - p.a) <= f64::EPSILON * (1.0 + p.a.abs()) {
            let corrected: Vec<f64> = refined.iter().zip(&p.whole).map(|(r, w)| r + (r - w) / 15.0).collect();
            total = Some(match total {
                None => corrected,
                Some(t) => t.iter().zip(&corrected).map(|(x, y)| x + y).collect(),
            });
            continue;
        }
        if p.depth >= MAX_QUADRATURE_DEPTH || !diff.is_finite() {
            return Err(Error::QuadratureFailure);
        }
        let child_tol = 0.5 * p.tol;
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm.clone(), whole: lower, tol: child_tol, depth: p.depth + 1 });
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: upper, tol: child_tol, depth: p.depth + 1 });
    }
    Ok(total.expect("at least one panel"))
}

fn integrate_vector(
    like: &AlgebraVector,
    f: &dyn Fn(f64) -> Result<AlgebraVector>,
    a: f64,
    b: f64,
) -> Result<AlgebraVector> {
    let flat = integrate(&|s| Ok(f(s)?.flatten()), a, b, QUADRATURE_TOL)?;
    Ok(like.with_flat(&flat))
}

/// `v = ∫ f(s) α(s) ds`.
pub fn bump_average(alpha: &CocycleCurve<'_>, bump: &BumpFunction) -> Result<AlgebraVector> {
    let (a, b) = bump.support();
    for t in [a, b] {
        if t < 0.0 || t > alpha.window() {
            return Err(Error::OutsideWindow { t, start: 0.0, end: alpha.window() });
        }
    }
    let like = alpha.eval(a)?;
    integrate_vector(&like, &|s| Ok(alpha.eval(s)?.scale(bump.eval(s))), a, b)
}

/// The smoothed cocycle `β` with the averaged vector `v`.
pub struct SmoothCocycle<'a> {
    pub v: AlgebraVector,
    /// Largest gap between the integral form and `α + U·v − v` on samples.
    pub consistency_residual: f64,
    pub curve: CocycleCurve<'a>,
}

/// Smooths `α` with the bump `f` supported on `[0, L]`. The result lives
/// on `[0, T − L]` and needs `T ≥ 2L`.
pub fn smooth_equivalent<'a>(
    alpha: &'a CocycleCurve<'a>,
    flow: &'a Flow<'a>,
    bump: &BumpFunction,
) -> Result<SmoothCocycle<'a>> {
    let (start, end) = bump.support();
    if start != 0.0 {
        return Err(Error::InvalidArgument("smoothing bump must start at 0".into()));
    }
    let needed = 2.0 * bump.length();
    if alpha.window() < needed {
        return Err(Error::WindowTooShort { needed, available: alpha.window() });
    }
    let v = bump_average(alpha, bump)?;
    let bump = *bump;
    let shift = v.clone();
    let window = alpha.window() - bump.length();
    let curve = CocycleCurve::new(window, move |t| {
        let like = alpha.eval(t)?;
        let avg = integrate_vector(&like, &|u| Ok(alpha.eval(u + t)?.scale(bump.eval(u))), 0.0, end)?;
        Ok(avg.sub(&shift))
    })?;
    let mut consistency_residual: f64 = 0.0;
    for j in 0..=16 {
        let t = window * j as f64 / 16.0;
        let direct = alpha.eval(t)?.add(&flow(t, &v)?).sub(&v);
        consistency_residual = consistency_residual.max(vector_norm(&direct.sub(&curve.eval(t)?)));
    }
    Ok(SmoothCocycle { v, consistency_residual, curve })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoboundaryFit {
    pub v: AlgebraVector,
    /// Largest pointwise residual of `δ(t) − (U_t v − v)`.
    pub residual: f64,
}

/// Least-squares `v` with `δ(t_j) ≈ U_{t_j} v − v`.
pub fn fit_coboundary(samples: &[(f64, AlgebraVector)], flow: &Flow<'_>) -> Result<CoboundaryFit> {
    let like = &samples.first().ok_or_else(|| Error::InvalidArgument("no samples to fit".into()))?.1;
    let dim = like.flatten().len();
    let basis: Vec<AlgebraVector> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            like.with_flat(&e)
        })
        .collect();
    let mut normal = Matrix::zeros(dim);
    let mut rhs = vec![0.0; dim];
    let mut columns_at = Vec::with_capacity(samples.len());
    for (t, delta) in samples {
        let columns =
            basis.iter().map(|e| Ok(flow(*t, e)?.sub(e).flatten())).collect::<Result<Vec<Vec<f64>>>>()?;
        let d = delta.flatten();
        let mut data = normal.as_slice().to_vec();
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] += columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum::<f64>();
            }
            rhs[i] += columns[i].iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        }
        normal = Matrix::from_vec(dim, data)?;
        columns_at.push(columns);
    }
    let inverse = normal.inverse()?;
    let solution: Vec<f64> = (0..dim).map(|i| (0..dim).map(|j| inverse[(i, j)] * rhs[j]).sum()).collect();
    let v = like.with_flat(&solution);
    let mut residual: f64 = 0.0;
    for ((_, delta), columns) in samples.iter().zip(&columns_at) {
        let d = delta.flatten();
        for (row, target) in d.iter().enumerate() {
            let fitted: f64 = (0..dim).map(|j| columns[j][row] * solution[j]).sum();
            residual = residual.max((fitted - target).abs());
        }
    }
    Ok(CoboundaryFit { v, residual })
}

/// `g⁻¹ γ(t) g` for `g = (v, 1)` with `v` the bump average of the fiber
/// part of a one-parameter group `γ` of a vector-fiber `H`.
pub struct SmoothConjugate<'a> {
    pub conjugator: HalfLiePoint,
    pub v: AlgebraVector,
    group: &'a HalfLieGroup,
    gamma: &'a (dyn Fn(f64) -> Result<HalfLiePoint> + Send + Sync),
    bump: BumpFunction,
    window: f64,
}

impl SmoothConjugate<'_> {
    /// Window on which [`smooth`](Self::smooth) is defined.
    pub fn window(&self) -> f64 {
        self.window - self.bump.length()
    }

    /// `g⁻¹ γ(t) g` by group multiplication.
    pub fn direct(&self, t: f64) -> Result<HalfLiePoint> {
        let g_inv = self.group.h_inverse(&self.conjugator)?;
        self.group.h_multiply(&self.group.h_multiply(&g_inv, &(self.gamma)(t)?)?, &self.conjugator)
    }

    /// The same curve from the averaged representation
    /// `(∫ f(u) α(u + t) du − v, β(t))`.
    pub fn smooth(&self, t: f64) -> Result<HalfLiePoint> {
        if !(t >= 0.0 && t <= self.window()) {
            return Err(Error::OutsideWindow { t, start: 0.0, end: self.window() });
        }
        let point = (self.gamma)(t)?;
        let like = fiber_vector(&point.n);
        let (_, end) = self.bump.support();
        let avg = integrate_vector(
            &like,
            &|u| Ok(fiber_vector(&(self.gamma)(u + t)?.n).scale(self.bump.eval(u))),
            0.0,
            end,
        )?;
        Ok(HalfLiePoint { n: fiber_element(&avg.sub(&self.v)), g: point.g })
    }
}

fn fiber_vector(n: &GroupElement) -> AlgebraVector {
    AlgebraVector::from_coords(n.coords().clone())
}

fn fiber_element(v: &AlgebraVector) -> GroupElement {
    GroupElement::from_coords(v.coords().clone())
}

/// Conjugates a continuous one-parameter group of `H` with vector fiber,
/// sampled on `[0, window]`, to a smooth one.
pub fn conjugate_one_parameter<'a>(
    group: &'a HalfLieGroup,
    gamma: &'a (dyn Fn(f64) -> Result<HalfLiePoint> + Send + Sync),
    window: f64,
    bump: &BumpFunction,
) -> Result<SmoothConjugate<'a>> {
    if !group.fiber().is_vector_group() {
        return Err(Error::Unsupported("conjugation to a smooth curve needs a vector fiber"));
    }
    let (start, end) = bump.support();
    if start != 0.0 {
        return Err(Error::InvalidArgument("smoothing bump must start at 0".into()));
    }
    if window < 2.0 * bump.length() {
        return Err(Error::WindowTooShort { needed: 2.0 * bump.length(), available: window });
    }
    let like = fiber_vector(&gamma(0.0)?.n);
    let v = integrate_vector(&like, &|s| Ok(fiber_vector(&gamma(s)?.n).scale(bump.eval(s))), 0.0, end)?;
    let conjugator = HalfLiePoint { n: fiber_element(&v), g: group.base().identity() };
    Ok(SmoothConjugate { conjugator, v, group, gamma, bump: *bump, window })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreOptions {
    /// Coarsest difference step; the finer ones are half and a quarter.
    pub step: f64,
    pub probes: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self { step: 0.05, probes: 32 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderScore {
    pub order: u32,
    /// Largest disagreement between successive resolutions, relative to
    /// the largest finest-resolution derivative.
    pub score: f64,
    pub worst_t: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub threshold: f64,
    pub orders: Vec<OrderScore>,
}

impl SmoothnessReport {
    pub fn passed(&self) -> bool {
        self.orders.iter().all(|o| o.passed)
    }

    pub fn score(&self, order: u32) -> Option<f64> {
        self.orders.iter().find(|o| o.order == order).map(|o| o.score)
    }
}

fn difference(f: &dyn Fn(f64) -> Result<Vec<f64>>, t: f64, h: f64, order: u32, centre: &[f64]) -> Result<Vec<f64>> {
    let plus = f(t + h)?;
    let minus = f(t - h)?;
    Ok(match order {
        1 => plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect(),
        _ => plus.iter().zip(&minus).zip(centre).map(|((p, m), c)| (p - 2.0 * c + m) / (h * h)).collect(),
    })
}

/// Numerical smoothness proxy: central differences of order 1 or 2 at
/// steps `h`, `h/2`, `h/4` on probes inside `[a, b]`.
pub fn smoothness_score(
    curve: &dyn Fn(f64) -> Result<AlgebraVector>,
    window: (f64, f64),
    orders: &[u32],
    opts: ScoreOptions,
) -> Result<SmoothnessReport> {
    let (a, b) = window;
    let h = opts.step;
    if !(h > 0.0) || opts.probes == 0 || b - a <= 2.0 * h {
        return Err(Error::InvalidArgument("window must exceed twice the difference step".into()));
    }
    if orders.iter().any(|&k| k != 1 && k != 2) {
        return Err(Error::InvalidArgument("smoothness orders are 1 and 2".into()));
    }
    let f = |t: f64| Ok(curve(t)?.flatten());
    let spacing = (b - a - 2.0 * h) / opts.probes as f64;
    let probes: Vec<f64> = (0..opts.probes).map(|j| a + h + (j as f64 + 0.5) * spacing).collect();
    let mut out = Vec::new();
    for &order in orders {
        let mut scale: f64 = 0.0;
        let mut worst = (0.0f64, probes[0]);
        for &t in &probes {
            let centre = f(t)?;
            let d: Vec<Vec<f64>> = [h, 0.5 * h, 0.25 * h]
                .iter()
                .map(|&step| difference(&f, t, step, order, &centre))
                .collect::<Result<_>>()?;
            scale = scale.max(libm::sqrt(d[2].iter().map(|x| x * x).sum()));
            let gap = max_norm_diff(&d[0], &d[1]).max(max_norm_diff(&d[1], &d[2]));
            if gap > worst.0 {
                worst = (gap, t);
            }
        }
        let score = if worst.0 == 0.0 { 0.0 } else { worst.0 / scale.max(f64::MIN_POSITIVE) };
        out.push(OrderScore { order, score, worst_t: worst.1, passed: score < SMOOTHNESS_THRESHOLD });
    }
    Ok(SmoothnessReport { threshold: SMOOTHNESS_THRESHOLD, orders: out })
}

fn max_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}
