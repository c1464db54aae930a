//! Step functions on `[0, 1]` as stand-ins for regulated controls.
//!
//! A [`RegulatedPath`] stores a partition and one value per open interval.
//! The right-continuous representative is used for point evaluation;
//! breakpoint values never enter integrals. Paths obtained by sampling a
//! continuous curve carry a measured sup-norm approximation error.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, LieGroupSpec};

/// Breakpoints closer than this are treated as one.
pub const SNAP: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct RegulatedPath {
    breakpoints: Vec<f64>,
    values: Vec<AlgebraVector>,
    approx_error: f64,
}

impl RegulatedPath {
    /// Exact step path. Breakpoints must run strictly upwards from 0 to 1
    /// and there must be one value per interval.
    pub fn make_step(breakpoints: Vec<f64>, values: Vec<AlgebraVector>) -> Result<Self> {
        Self::with_error(breakpoints, values, 0.0)
    }

    /// Step path carrying a sup-norm distance to the curve it approximates.
    pub fn with_error(breakpoints: Vec<f64>, values: Vec<AlgebraVector>, approx_error: f64) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidBreakpoints(format!("need at least two breakpoints, got {}", breakpoints.len())));
        }
        if breakpoints[0] != 0.0 || breakpoints[breakpoints.len() - 1] != 1.0 {
            return Err(Error::InvalidBreakpoints("partition must start at 0 and end at 1".into()));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidBreakpoints(format!(
                "breakpoints not strictly increasing at index {}",
                i + 1
            )));
        }
        if values.len() != breakpoints.len() - 1 {
            return Err(Error::LengthMismatch { expected: breakpoints.len() - 1, found: values.len() });
        }
        if values.iter().any(|v| !v.same_shape(&values[0])) {
            return Err(Error::SpecMismatch("step values lie in different algebras"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("step values must be finite".into()));
        }
        if !(approx_error >= 0.0) {
            return Err(Error::InvalidArgument("approx_error must be nonnegative".into()));
        }
        Ok(Self { breakpoints, values, approx_error })
    }

    /// The constant control `c_v`.
    pub fn constant(v: AlgebraVector) -> Self {
        Self { breakpoints: alloc::vec![0.0, 1.0], values: alloc::vec![v], approx_error: 0.0 }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[AlgebraVector] {
        &self.values
    }

    pub fn approx_error(&self) -> f64 {
        self.approx_error
    }

    pub fn is_exact(&self) -> bool {
        self.approx_error == 0.0
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    /// Index of the interval `[t_j, t_{j+1})` containing `t`; the last
    /// interval is closed.
    pub fn interval_index(&self, t: f64) -> usize {
        let j = self.breakpoints.partition_point(|&b| b <= t);
        j.clamp(1, self.values.len()) - 1
    }

    /// Right-continuous value at `t`.
    pub fn eval(&self, t: f64) -> &AlgebraVector {
        &self.values[self.interval_index(t)]
    }

    /// Same function on the partition merged with `extra`.
    pub fn refine(&self, extra: &[f64]) -> Self {
        let breakpoints = merge_partitions(&self.breakpoints, extra);
        let values = breakpoints
            .windows(2)
            .map(|w| self.eval(0.5 * (w[0] + w[1])).clone())
            .collect();
        Self { breakpoints, values, approx_error: self.approx_error }
    }

    /// Applies `f` to every value, keeping the partition.
    pub fn map_values(&self, f: impl Fn(&AlgebraVector) -> Result<AlgebraVector>) -> Result<Self> {
        let values = self.values.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::with_error(self.breakpoints.clone(), values, self.approx_error)
    }
}

/// Union of two partitions of `[0, 1]`, snapping points closer than
/// [`SNAP`] and dropping points outside the unit interval.
pub fn merge_partitions(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().filter(|t| (0.0..=1.0).contains(t)).collect();
    all.push(0.0);
    all.push(1.0);
    all.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        match out.last() {
            Some(&last) if t - last <= SNAP => {
                // keep exact endpoints
                if t == 1.0 {
                    *out.last_mut().unwrap() = 1.0;
                }
            }
            _ => out.push(t),
        }
    }
    out
}

/// Uniform partition of `[0, 1]` into `n` pieces.
pub fn uniform_partition(n: usize) -> Vec<f64> {
    (0..=n).map(|k| if k == n { 1.0 } else { k as f64 / n as f64 }).collect()
}

/// Every interval of `base` split into `per_interval` equal pieces.
pub fn subdivide(base: &[f64], per_interval: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((base.len() - 1) * per_interval + 1);
    for w in base.windows(2) {
        for k in 0..per_interval {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / per_interval as f64);
        }
    }
    out.push(*base.last().expect("nonempty partition"));
    out
}

/// Points probing the closed interval `[a, b]` (endpoints nudged inside so
/// that discontinuities at the ends are seen as one-sided limits).
fn probe_points(a: f64, b: f64) -> [f64; 5] {
    let h = b - a;
    let nudge = 1e-12 * h;
    [a + nudge, a + 0.25 * h, a + 0.5 * h, a + 0.75 * h, b - nudge]
}

/// Midpoint samples of `curve` on `n` uniform pieces. The recorded error is
/// the largest deviation seen on a grid four times finer.
pub fn sample_to_step(
    spec: &LieGroupSpec,
    curve: &dyn Fn(f64) -> Result<AlgebraVector>,
    n: usize,
) -> Result<RegulatedPath> {
    sample_on_partition(spec, curve, &[0.0, 1.0], n.max(1))
}

/// Midpoint samples of `curve` with every interval of `base` split into
/// `per_interval` pieces; keeps jumps of a piecewise-continuous curve on the
/// partition.
pub fn sample_on_partition(
    spec: &LieGroupSpec,
    curve: &dyn Fn(f64) -> Result<AlgebraVector>,
    base: &[f64],
    per_interval: usize,
) -> Result<RegulatedPath> {
    sample_impl(spec, curve, base, per_interval, true)
}

/// Midpoint samples without the error probe; the refinement loop of the
/// evolution judges accuracy by successive differences instead.
pub(crate) fn sample_unprobed(
    spec: &LieGroupSpec,
    curve: &dyn Fn(f64) -> Result<AlgebraVector>,
    base: &[f64],
    per_interval: usize,
) -> Result<RegulatedPath> {
    sample_impl(spec, curve, base, per_interval, false)
}

fn sample_impl(
    spec: &LieGroupSpec,
    curve: &dyn Fn(f64) -> Result<AlgebraVector>,
    base: &[f64],
    per_interval: usize,
    probe: bool,
) -> Result<RegulatedPath> {
    if per_interval == 0 {
        return Err(Error::InvalidArgument("piece count must be at least 1".into()));
    }
    let breakpoints = subdivide(base, per_interval);
    let mut values = Vec::with_capacity(breakpoints.len() - 1);
    let mut error: f64 = 0.0;
    for w in breakpoints.windows(2) {
        let v = curve(0.5 * (w[0] + w[1]))?;
        spec.check_vector(&v)?;
        if probe {
            for s in probe_points(w[0], w[1]) {
                error = error.max(spec.norm(&curve(s)?.sub(&v)));
            }
        }
        values.push(v);
    }
    RegulatedPath::with_error(breakpoints, values, error)
}

/// Essential supremum of `‖p − q‖` over the merged partition.
pub fn sup_distance(spec: &LieGroupSpec, p: &RegulatedPath, q: &RegulatedPath) -> Result<f64> {
    spec.check_vector(&p.values[0])?;
    spec.check_vector(&q.values[0])?;
    let merged = merge_partitions(&p.breakpoints, &q.breakpoints);
    Ok(merged
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            spec.norm(&p.eval(mid).sub(q.eval(mid)))
        })
        .fold(0.0, f64::max))
}

/// `∫_a^b p(s) ds`, exact for step data.
pub fn weak_integral(p: &RegulatedPath, a: f64, b: f64) -> Result<AlgebraVector> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(Error::InvalidInterval { a, b });
    }
    let mut acc = p.values[0].scale(0.0);
    for (w, v) in p.breakpoints.windows(2).zip(&p.values) {
        let len = w[1].min(b) - w[0].max(a);
        if len > 0.0 {
            acc = acc.axpy(len, v);
        }
    }
    Ok(acc)
}

/// Pointwise image `t ↦ f(carrier(t), p(t))` as a step path.
///
/// The output partition merges `p`'s breakpoints with a uniform grid of
/// `grid_pieces` intervals; values are taken at midpoints. The recorded
/// error adds the probed deviation to `p`'s own error scaled by the
/// largest observed gain `‖f(c, v)‖ / ‖v‖`.
pub fn map_pointwise<C>(
    out_spec: &LieGroupSpec,
    in_spec: &LieGroupSpec,
    carrier: &dyn Fn(f64) -> Result<C>,
    p: &RegulatedPath,
    f: &dyn Fn(&C, &AlgebraVector) -> Result<AlgebraVector>,
    grid_pieces: usize,
) -> Result<RegulatedPath> {
    let grid = uniform_partition(grid_pieces.max(1));
    let breakpoints = merge_partitions(&p.breakpoints, &grid);
    let mut values = Vec::with_capacity(breakpoints.len() - 1);
    let mut deviation: f64 = 0.0;
    let mut gain: f64 = 0.0;
    for w in breakpoints.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let arg = p.eval(mid);
        let value = f(&carrier(mid)?, arg)?;
        out_spec.check_vector(&value)?;
        let arg_norm = in_spec.norm(arg);
        if arg_norm > 0.0 {
            gain = gain.max(out_spec.norm(&value) / arg_norm);
        }
        for s in probe_points(w[0], w[1]) {
            let exact = f(&carrier(s)?, p.eval(mid))?;
            deviation = deviation.max(out_spec.norm(&exact.sub(&value)));
        }
        values.push(value);
    }
    RegulatedPath::with_error(breakpoints, values, deviation + gain * p.approx_error)
}
