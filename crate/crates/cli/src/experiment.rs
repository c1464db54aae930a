//! Dispatch from a validated config to the library experiments.

use std::io;

use halflie_core::cocycle::{
    fit_coboundary, max_cocycle_defect, smooth_equivalent, smoothness_score, BumpFunction, CocycleCurve, Flow,
    ScoreOptions,
};
use halflie_core::evolution::{evolve, Control, EvolveOptions};
use halflie_core::fit::tail_slope;
use halflie_core::instances::{by_name, oscillator_ladder, InstanceDescriptor, InstanceParams};
use halflie_core::limits::{
    bound_suite, commutator_limit, commutator_sequence, default_commutator_indices, default_indices,
    star_condition_check, strong_trotter_sequence, trotter_pair_sequence, ConvergenceReport, HCurve,
};
use halflie_core::semidirect::ProbeReport;
use halflie_core::{
    AlgebraVector, Error, GroupElement, HalfLiePoint, HalfLieVector, LieGroupSpec, RegulatedPath, C64,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{ConfigError, CurveConfig, ExperimentConfig, ExperimentKind, GroupConfig, PathConfig};
use crate::report::{float_value, Report, Series};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_EXPECTATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Core { source, .. } if source.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

fn core(context: impl Into<String>) -> impl FnOnce(Error) -> RunError {
    let context = context.into();
    move |source| RunError::Core { context, source }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> RunError {
    RunError::Config(ConfigError::Invalid { field: field.into(), message: message.into() })
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads; 0 picks one per core. Never changes the output.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 0, jobs: 0 }
    }
}

pub struct RunOutput {
    pub report: Report,
    pub probe: Option<ProbeReport>,
}

/// Runs `config` as experiment `kind`. Grid points are evaluated on a
/// worker pool; rows are assembled in grid order.
pub fn run_experiment(config: &ExperimentConfig, kind: ExperimentKind, opts: &RunOptions) -> Result<RunOutput, RunError> {
    config.validate()?;
    config.validate_for(kind)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| RunError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| dispatch(config, kind, opts))
}

fn dispatch(config: &ExperimentConfig, kind: ExperimentKind, opts: &RunOptions) -> Result<RunOutput, RunError> {
    let instance = match &config.instance {
        Some(i) => Some(by_name(&i.name, &i.params).map_err(core(format!("instance `{}`", i.name)))?),
        None => None,
    };
    let probe = instance.as_ref().map(|i| i.probe);
    let report = match kind {
        ExperimentKind::Evolve => evolve_experiment(config, instance.as_ref())?,
        ExperimentKind::StrongTrotter | ExperimentKind::Trotter => {
            sequences(config, kind, instance.as_ref().expect("validated"))?
        }
        ExperimentKind::Commutator => match &config.ladder {
            Some(_) => commutator_ladder(config)?,
            None => sequences(config, kind, instance.as_ref().expect("validated"))?,
        },
        ExperimentKind::Seminorms => seminorms(config, instance.as_ref())?,
        ExperimentKind::CocycleSmooth => cocycle_smooth(config, instance.as_ref().expect("validated"))?,
        ExperimentKind::Bounds => bounds(config, instance.as_ref(), opts.seed)?,
    };
    Ok(RunOutput { report, probe })
}

fn subject(config: &ExperimentConfig) -> String {
    if let Some(i) = &config.instance {
        return i.name.clone();
    }
    match &config.group {
        Some(GroupConfig::GeneralLinear { n }) => format!("gl({n})"),
        Some(GroupConfig::Additive { d }) => format!("r^{d}"),
        Some(GroupConfig::ScalarLine) => "r".into(),
        Some(GroupConfig::ComplexVector { d }) => format!("c^{d}"),
        None => "oscillator ladder".into(),
    }
}

fn group_spec(g: &GroupConfig) -> LieGroupSpec {
    match *g {
        GroupConfig::GeneralLinear { n } => LieGroupSpec::general_linear(n),
        GroupConfig::Additive { d } => LieGroupSpec::additive(d),
        GroupConfig::ScalarLine => LieGroupSpec::scalar_line(),
        GroupConfig::ComplexVector { d } => LieGroupSpec::complex_vector(d),
    }
}

/// Reads a flat coordinate list as a vector of `spec`'s algebra.
fn vector_in(spec: &LieGroupSpec, flat: &[f64], field: &str) -> Result<AlgebraVector, RunError> {
    let zero = spec.zero();
    let len = zero.flatten().len();
    if flat.len() != len {
        return Err(invalid(field, format!("expected {len} coordinates, got {}", flat.len())));
    }
    if flat.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "coordinates must be finite"));
    }
    Ok(zero.with_flat(flat))
}

fn path_in(spec: &LieGroupSpec, p: &PathConfig, field: &str) -> Result<RegulatedPath, RunError> {
    let values = p
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| vector_in(spec, v, &format!("{field}.values[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    RegulatedPath::with_error(p.breakpoints.clone(), values, p.approx_error)
        .map_err(|e| invalid(field, e.to_string()))
}

fn serialize_element(g: &GroupElement) -> Value {
    Value::Array(g.flatten().into_iter().map(float_value).collect())
}

/// Compact JSON text of a point of `H`.
pub fn serialize_point(p: &HalfLiePoint) -> String {
    json!({ "n": serialize_element(&p.n), "g": serialize_element(&p.g) }).to_string()
}

fn build_curve<'a>(inst: &'a InstanceDescriptor, c: &CurveConfig, field: &str) -> Result<HCurve<'a>, RunError> {
    let group = &inst.group;
    let fiber = group.fiber().clone();
    let base = group.base().clone();
    let fv = |v: &[f64]| vector_in(&fiber, v, &format!("{field}.v"));
    let bv = |x: &[f64]| vector_in(&base, x, &format!("{field}.x"));
    let c1 = |v: &AlgebraVector| inst.c1_criterion(v).is_some_and(f64::is_finite);
    let curve = match c {
        CurveConfig::OneParameter { v, x } => {
            let v = fv(v)?;
            let smooth = c1(&v);
            HCurve::one_parameter(group, HalfLieVector::new(v, bv(x)?)).declare_fiber_c1(smooth)
        }
        CurveConfig::FiberLine { v } => {
            let v = fv(v)?;
            let smooth = c1(&v);
            let dir = v.clone();
            let (f, b) = (fiber.clone(), base.clone());
            HCurve::new(HalfLieVector::new(v, base.zero()), move |s| {
                Ok(HalfLiePoint { n: f.exp(&dir.scale(s))?, g: b.identity() })
            })
            .declare_base_one_parameter(true)
            .declare_fiber_c1(smooth)
        }
        CurveConfig::BaseLine { x } => {
            let x = bv(x)?;
            let dir = x.clone();
            let (f, b) = (fiber.clone(), base.clone());
            HCurve::new(HalfLieVector::new(fiber.zero(), x), move |s| {
                Ok(HalfLiePoint { n: f.identity(), g: b.exp(&dir.scale(s))? })
            })
            .declare_base_one_parameter(true)
            .declare_fiber_c1(true)
        }
        CurveConfig::SinProduct { v, x } => {
            let (v, x) = (fv(v)?, bv(x)?);
            let smooth = c1(&v);
            let (dv, dx) = (v.clone(), x.clone());
            let (f, b) = (fiber.clone(), base.clone());
            HCurve::new(HalfLieVector::new(v, x), move |s| {
                Ok(HalfLiePoint { n: f.exp(&dv.scale(s.sin()))?, g: b.exp(&dx.scale(s))? })
            })
            .declare_base_one_parameter(true)
            .declare_fiber_c1(smooth)
        }
        CurveConfig::FiberQuadratic { v } => {
            let v = fv(v)?;
            let (f, b) = (fiber.clone(), base.clone());
            HCurve::new(HalfLieVector::new(fiber.zero(), base.zero()), move |s| {
                Ok(HalfLiePoint { n: f.exp(&v.scale(s * s))?, g: b.identity() })
            })
            .declare_base_one_parameter(true)
            .declare_fiber_c1(true)
        }
    };
    Ok(curve)
}

fn tail_decreasing(errors: &[f64]) -> bool {
    let start = (errors.len() - 1) / 2;
    errors[start..].windows(2).all(|w| w[1] < w[0])
}

/// Shared expectation checks on a convergence report.
fn check_sequence(report: &mut Report, config: &ExperimentConfig, label: &str, r: &ConvergenceReport) {
    let e = &config.expect;
    let first = r.errors[0];
    let last = r.final_error();
    if let Some(v) = &e.verdict {
        report.check(format!("{label} verdict"), r.verdict.as_str() == v, format!("{} (expected {v})", r.verdict.as_str()));
    }
    if let Some(max) = e.max_final_error {
        report.check(format!("{label} final error"), last < max, format!("{last:.3e} < {max:.3e}"));
    }
    if let Some(ratio) = e.max_error_ratio {
        report.check(
            format!("{label} error ratio"),
            last < ratio * first,
            format!("{:.3e} < {ratio:.3e}", last / first),
        );
    }
    if let Some(true) = e.decreasing_tail {
        report.check(format!("{label} decreasing tail"), tail_decreasing(&r.errors), format!("{:?}", r.errors));
    }
    if let Some([lo, hi]) = e.fitted_exponent {
        report.check(
            format!("{label} fitted exponent"),
            (lo..=hi).contains(&r.fitted_exponent),
            format!("{:.4} in [{lo}, {hi}]", r.fitted_exponent),
        );
    }
}

fn sequences(config: &ExperimentConfig, kind: ExperimentKind, inst: &InstanceDescriptor) -> Result<Report, RunError> {
    let group = &inst.group;
    let curves = config
        .curves
        .iter()
        .enumerate()
        .map(|(i, c)| build_curve(inst, c, &format!("curves[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let indices = config.indices.clone().unwrap_or_else(|| match kind {
        ExperimentKind::Commutator => default_commutator_indices(),
        _ => default_indices(),
    });
    let tol = config.tol;
    let results: Vec<Result<ConvergenceReport, Error>> = config
        .t_grid
        .par_iter()
        .map(|&t| match kind {
            ExperimentKind::StrongTrotter => strong_trotter_sequence(group, &curves[0], t, &indices, tol),
            ExperimentKind::Trotter => trotter_pair_sequence(group, &curves[0], &curves[1], t, &indices, tol),
            _ => commutator_sequence(group, &curves[0], &curves[1], t, &indices, tol),
        })
        .collect();

    let mut report = Report::new(kind, subject(config), vec!["t", "n", "error", "target_serialized"]);
    if curves.len() == 2 {
        report.summary.insert("star_condition".into(), Value::from(star_condition_check(&curves[0], &curves[1]).as_str()));
    }
    let mut per_t = Vec::new();
    for (&t, result) in config.t_grid.iter().zip(results) {
        let r = result.map_err(core(format!("{kind} at t = {t}")))?;
        let target = r.target.as_ref().map(serialize_point).unwrap_or_default();
        for (&n, &e) in r.indices.iter().zip(&r.errors) {
            report.push_row(vec![t.into(), n.into(), e.into(), target.clone().into()]);
        }
        let mut entry = Map::new();
        entry.insert("t".into(), float_value(t));
        entry.insert("verdict".into(), Value::from(r.verdict.as_str()));
        entry.insert("fitted_exponent".into(), float_value(r.fitted_exponent));
        entry.insert("first_error".into(), float_value(r.errors[0]));
        entry.insert("final_error".into(), float_value(r.final_error()));
        entry.insert("has_target".into(), Value::from(r.target.is_some()));
        per_t.push(Value::Object(entry));
        report.series.push(Series {
            label: format!("t = {t}"),
            points: r.indices.iter().map(|&n| n as f64).zip(r.errors.iter().copied()).collect(),
        });
        check_sequence(&mut report, config, &format!("t = {t}"), &r);
    }
    report.summary.insert("sequences".into(), Value::Array(per_t));
    Ok(report)
}

struct LadderPoint {
    limit_norm: f64,
    deviation: f64,
    converged: bool,
}

fn commutator_ladder(config: &ExperimentConfig) -> Result<Report, RunError> {
    let ladder = config.ladder.as_ref().expect("validated");
    let (lp, cp) = (ladder.lambda_power, ladder.coeff_power);
    let levels = oscillator_ladder(&ladder.dims, |n| (n as f64).powf(lp), |n| (n as f64).powf(cp))
        .map_err(core("building the oscillator ladder"))?;
    let grid: Vec<(f64, usize)> =
        config.t_grid.iter().flat_map(|&t| (0..levels.len()).map(move |i| (t, i))).collect();
    let points: Vec<Result<LadderPoint, Error>> = grid
        .par_iter()
        .map(|&(t, i)| {
            let (inst, v) = &levels[i];
            let group = &inst.group;
            let fiber = group.fiber().clone();
            let dir = v.clone();
            let g1 = HCurve::new(HalfLieVector::new(v.clone(), group.base().zero()), move |s| {
                Ok(HalfLiePoint { n: fiber.exp(&dir.scale(s))?, g: GroupElement::scalar(0.0) })
            });
            let fiber = group.fiber().clone();
            let g2 = HCurve::new(HalfLieVector::new(group.fiber().zero(), AlgebraVector::scalar(1.0)), move |s| {
                Ok(HalfLiePoint { n: fiber.identity(), g: GroupElement::scalar(s) })
            });
            let lim = commutator_limit(group, &g1, &g2, t, ladder.start, ladder.max_index, ladder.tol)?;
            let modes = lim.limit.n.as_complex().expect("oscillator fiber");
            let InstanceParams::Oscillator { lambda } = &inst.params else { unreachable!("ladder of oscillators") };
            let coeffs = v.as_complex().expect("oscillator fiber");
            let deviation = modes
                .iter()
                .zip(lambda)
                .zip(coeffs)
                .map(|((z, l), x)| (z - C64::new(0.0, -l * t) * x).norm())
                .fold(0.0, f64::max);
            let limit_norm = modes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            Ok(LadderPoint { limit_norm, deviation, converged: lim.converged })
        })
        .collect();

    let mut report = Report::new(
        ExperimentKind::Commutator,
        subject(config),
        vec!["t", "d", "limit_norm", "fitted_exponent", "max_mode_deviation", "converged"],
    );
    report.axes = ("d", "limit norm");
    let mut points = points.into_iter();
    let mut per_t = Vec::new();
    for &t in &config.t_grid {
        let mut level_points = Vec::new();
        for &d in &ladder.dims {
            let p = points.next().expect("one point per grid entry").map_err(core(format!("commutator limit at t = {t}, d = {d}")))?;
            level_points.push((d, p));
        }
        let xs: Vec<f64> = level_points.iter().map(|(d, _)| *d as f64).collect();
        let ys: Vec<f64> = level_points.iter().map(|(_, p)| p.limit_norm).collect();
        let exponent = tail_slope(&xs, &ys);
        let deviation = level_points.iter().map(|(_, p)| p.deviation).fold(0.0, f64::max);
        let converged = level_points.iter().all(|(_, p)| p.converged);
        for (d, p) in &level_points {
            report.push_row(vec![
                t.into(),
                (*d).into(),
                p.limit_norm.into(),
                exponent.into(),
                p.deviation.into(),
                p.converged.into(),
            ]);
        }
        per_t.push(json!({
            "t": float_value(t),
            "fitted_exponent": float_value(exponent),
            "max_mode_deviation": float_value(deviation),
            "converged": converged,
        }));
        report.series.push(Series { label: format!("t = {t}"), points: xs.iter().copied().zip(ys).collect() });
        if let Some([lo, hi]) = config.expect.fitted_exponent {
            report.check(
                format!("t = {t} growth exponent"),
                (lo..=hi).contains(&exponent),
                format!("{exponent:.4} in [{lo}, {hi}]"),
            );
        }
        if let Some(max) = config.expect.max_mode_deviation {
            report.check(format!("t = {t} mode deviation"), deviation < max, format!("{deviation:.3e} < {max:.3e}"));
            report.check(format!("t = {t} extrapolation converged"), converged, converged.to_string());
        }
    }
    report.summary.insert("ladders".into(), Value::Array(per_t));
    Ok(report)
}

fn seminorms(config: &ExperimentConfig, inst: Option<&InstanceDescriptor>) -> Result<Report, RunError> {
    let spec = config.seminorm.as_ref().expect("validated");
    let owned;
    let levels: Vec<(&InstanceDescriptor, AlgebraVector)> = match &config.ladder {
        Some(l) => {
            let (lp, cp) = (l.lambda_power, l.coeff_power);
            owned = oscillator_ladder(&l.dims, |n| (n as f64).powf(lp), |n| (n as f64).powf(cp))
                .map_err(core("building the oscillator ladder"))?;
            owned.iter().map(|(i, v)| (i, v.clone())).collect()
        }
        None => {
            let inst = inst.expect("validated");
            let v = vector_in(inst.group.fiber(), spec.vector.as_deref().expect("validated"), "seminorm.vector")?;
            vec![(inst, v)]
        }
    };
    let grid: Vec<(usize, u32)> = (0..levels.len()).flat_map(|i| spec.orders.iter().map(move |&k| (i, k))).collect();
    let values: Vec<Result<(f64, bool), Error>> = grid
        .par_iter()
        .map(|&(i, k)| {
            let (inst, v) = &levels[i];
            inst.group.seminorm_pk(v, k).map(|s| (s.value, s.exact))
        })
        .collect();
    let mut report = Report::new(ExperimentKind::Seminorms, subject(config), vec!["k", "d", "p_k"]);
    report.axes = ("d", "p_k");
    let mut exact = true;
    let mut series: Vec<Series> =
        spec.orders.iter().map(|k| Series { label: format!("k = {k}"), points: Vec::new() }).collect();
    for (&(i, k), value) in grid.iter().zip(values) {
        let d = levels[i].0.group.fiber().dimension();
        let (p, is_exact) = value.map_err(core(format!("seminorm p_{k} at d = {d}")))?;
        exact &= is_exact;
        report.push_row(vec![k.into(), d.into(), p.into()]);
        let j = spec.orders.iter().position(|&o| o == k).expect("listed order");
        series[j].points.push((d as f64, p));
    }
    report.series = series;
    report.summary.insert("exact".into(), Value::from(exact));
    Ok(report)
}

fn bounds(config: &ExperimentConfig, inst: Option<&InstanceDescriptor>, seed: u64) -> Result<Report, RunError> {
    let settings = config.bounds.clone().unwrap_or_default();
    let specs: Vec<(String, LieGroupSpec)> = match inst {
        Some(i) => vec![("fiber/".into(), i.group.fiber().clone()), ("base/".into(), i.group.base().clone())],
        None => vec![(String::new(), group_spec(config.group.as_ref().expect("validated")))],
    };
    let results: Vec<_> =
        specs.par_iter().map(|(_, spec)| bound_suite(spec, settings.samples, settings.radius, seed)).collect();
    let mut report = Report::new(
        ExperimentKind::Bounds,
        subject(config),
        vec!["claim", "samples", "max_slack", "violations"],
    );
    let mut violations = 0;
    let mut groups = Vec::new();
    for ((prefix, _), result) in specs.iter().zip(results) {
        let r = result.map_err(core(format!("bound suite {}", prefix.trim_end_matches('/'))))?;
        for row in &r.rows {
            report.push_row(vec![
                format!("{prefix}{}", row.claim).into(),
                row.samples.into(),
                row.max_slack.into(),
                row.violations.into(),
            ]);
        }
        violations += r.violations();
        groups.push(json!({
            "group": prefix.trim_end_matches('/'),
            "radius": float_value(r.radius),
            "constant": float_value(r.constant),
            "conjugation_residual": float_value(r.conjugation_residual),
            "violations": r.violations(),
        }));
    }
    report.summary.insert("seed".into(), Value::from(seed));
    report.summary.insert("groups".into(), Value::Array(groups));
    if let Some(max) = config.expect.max_violations {
        report.check("violations", violations <= max, format!("{violations} <= {max}"));
    }
    Ok(report)
}

fn evolve_experiment(config: &ExperimentConfig, inst: Option<&InstanceDescriptor>) -> Result<Report, RunError> {
    let controls = config.controls.as_ref().expect("validated");
    let times = if config.t_grid.is_empty() { vec![1.0] } else { config.t_grid.clone() };
    let opts = EvolveOptions { sample_times: times.clone(), ..EvolveOptions::default() };
    match inst {
        Some(inst) => {
            let group = &inst.group;
            let alpha = path_in(group.fiber(), &controls.alpha, "controls.alpha")?;
            let beta = match &controls.beta {
                Some(b) => path_in(group.base(), b, "controls.beta")?,
                None => RegulatedPath::constant(group.base().zero()),
            };
            let h = group.evol_h_with(&alpha, &beta, config.tol, &opts).map_err(core("evolution on H"))?;
            let mut report = Report::new(ExperimentKind::Evolve, subject(config), vec!["t", "n", "g"]);
            for &t in &times {
                let n = h.fiber.at(group.fiber(), t).map_err(core(format!("fiber at t = {t}")))?;
                let g = h.base.at(group.base(), t).map_err(core(format!("base at t = {t}")))?;
                report.push_row(vec![
                    t.into(),
                    serialize_element(&n).to_string().into(),
                    serialize_element(&g).to_string().into(),
                ]);
            }
            report.summary.insert("refinement_depth".into(), Value::from(h.fiber.refinement_depth));
            report.summary.insert("error_estimate".into(), float_value(h.fiber.error_estimate));
            Ok(report)
        }
        None => {
            let spec = group_spec(config.group.as_ref().expect("validated"));
            let alpha = path_in(&spec, &controls.alpha, "controls.alpha")?;
            let r = evolve(&spec, Control::Step(&alpha), config.tol, &opts).map_err(core("evolution"))?;
            let mut report = Report::new(ExperimentKind::Evolve, subject(config), vec!["t", "g"]);
            for &t in &times {
                let g = r.at(&spec, t).map_err(core(format!("evolution at t = {t}")))?;
                report.push_row(vec![t.into(), serialize_element(&g).to_string().into()]);
            }
            report.summary.insert("error_estimate".into(), float_value(r.error_estimate));
            Ok(report)
        }
    }
}

fn cocycle_smooth(config: &ExperimentConfig, inst: &InstanceDescriptor) -> Result<Report, RunError> {
    let c = config.cocycle.as_ref().expect("validated");
    let group = &inst.group;
    if !group.fiber().is_vector_group() {
        return Err(invalid("instance", "cocycle smoothing needs a vector-group fiber"));
    }
    if group.base().dimension() != 1 {
        return Err(invalid("instance", "cocycle smoothing needs a one-dimensional base"));
    }
    let base = group.base().clone();
    let unit = base.basis_vector(0);
    let flow_fn = move |t: f64, v: &AlgebraVector| group.derived_act(&base.exp(&unit.scale(t))?, v);
    let flow: &Flow = &flow_fn;
    let w = vector_in(group.fiber(), &c.w, "cocycle.w")?;
    let alpha = CocycleCurve::coboundary(c.window, flow, w).map_err(core("input cocycle"))?;
    let bump = BumpFunction::standard(c.bump_length).map_err(core("bump function"))?;
    let smooth = smooth_equivalent(&alpha, flow, &bump).map_err(core("smoothing"))?;
    let window = smooth.curve.window();
    let opts = ScoreOptions { step: c.step, probes: c.probes };
    let before = smoothness_score(&|t| alpha.eval(t), (0.0, window), &[1], opts).map_err(core("input smoothness"))?;
    let after =
        smoothness_score(&|t| smooth.curve.eval(t), (0.0, window), &[1], opts).map_err(core("output smoothness"))?;
    let defect = max_cocycle_defect(&smooth.curve, flow, 8).map_err(core("cocycle defect"))?;
    let samples = (0..c.fit_samples)
        .map(|j| {
            let t = window * j as f64 / (c.fit_samples - 1) as f64;
            Ok((t, smooth.curve.eval(t)?.sub(&alpha.eval(t)?)))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(core("coboundary samples"))?;
    let fit = fit_coboundary(&samples, flow).map_err(core("coboundary fit"))?;

    let mut report = Report::new(ExperimentKind::CocycleSmooth, subject(config), vec!["metric", "value"]);
    let input_score = before.score(1).expect("order 1");
    let output_score = after.score(1).expect("order 1");
    for (name, value) in [
        ("input_score_order1", input_score),
        ("output_score_order1", output_score),
        ("smoothness_threshold", after.threshold),
        ("consistency_residual", smooth.consistency_residual),
        ("max_cocycle_defect", defect),
        ("coboundary_fit_residual", fit.residual),
    ] {
        report.push_row(vec![name.into(), value.into()]);
    }
    report.summary.insert("window".into(), float_value(window));
    report.summary.insert("input_passed".into(), Value::from(before.passed()));
    report.summary.insert("output_passed".into(), Value::from(after.passed()));
    let e = &config.expect;
    if let Some(rough) = e.input_rough {
        report.check("input rough", before.passed() != rough, format!("score {input_score:.3e}"));
    }
    if let Some(smooth_expected) = e.output_smooth {
        report.check("output smooth", after.passed() == smooth_expected, format!("score {output_score:.3e}"));
    }
    if let Some(max) = e.max_defect {
        report.check("cocycle defect", defect < max, format!("{defect:.3e} < {max:.3e}"));
    }
    if let Some(max) = e.max_fit_residual {
        report.check("coboundary fit", fit.residual < max, format!("{:.3e} < {max:.3e}", fit.residual));
    }
    Ok(report)
}
