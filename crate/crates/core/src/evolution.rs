//! Evolution of left-invariant initial value problems `η' = η·γ`, `η(0) = 1`.
//!
//! For a step control the solution is the ordered product of exponentials
//! `exp(Δ₁v₁)·exp(Δ₂v₂)···`. Controls given as curves are sampled on
//! dyadically refined partitions until successive endpoints agree.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, GroupKind, LieGroupSpec};
use crate::linalg::Matrix;
use crate::regulated::{merge_partitions, sample_on_partition, sample_unprobed, RegulatedPath};

/// Default number of dyadic refinements before giving up (about 10⁶ pieces).
pub const DEFAULT_MAX_DEPTH: u32 = 20;

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    /// Group elements at the control breakpoints and requested times, sorted
    /// by time; the first entry is `(0, 1)`.
    pub checkpoints: Vec<(f64, GroupElement)>,
    pub endpoint: GroupElement,
    pub refinement_depth: u32,
    pub error_estimate: f64,
    /// Successive endpoint differences of the refinement loop.
    pub refinement_history: Vec<f64>,
    control: RegulatedPath,
    nodes: Vec<GroupElement>,
}

impl EvolutionResult {
    /// The step control whose ordered exponential this is.
    pub fn control(&self) -> &RegulatedPath {
        &self.control
    }

    /// Values at the control breakpoints.
    pub fn nodes(&self) -> &[GroupElement] {
        &self.nodes
    }

    /// `η(t)`, evolved from the preceding breakpoint.
    pub fn at(&self, spec: &LieGroupSpec, t: f64) -> Result<GroupElement> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInterval { a: 0.0, b: t });
        }
        let j = self.control.interval_index(t);
        let start = self.control.breakpoints()[j];
        let step = spec.exp(&self.control.values()[j].scale(t - start))?;
        spec.multiply(&self.nodes[j], &step)
    }

    /// The solution as checkpointed ordered-exponential data.
    pub fn path(&self) -> GroupPath {
        GroupPath {
            breakpoints: self.control.breakpoints().to_vec(),
            nodes: self.nodes.clone(),
            generators: Some(self.control.values().to_vec()),
        }
    }
}

/// A piecewise one-parameter path: `nodes[j]` is the value at
/// `breakpoints[j]`, and on each interval the path moves by the
/// exponential of `generators[j]` when those are known.
#[derive(Clone, Debug)]
pub struct GroupPath {
    pub breakpoints: Vec<f64>,
    pub nodes: Vec<GroupElement>,
    pub generators: Option<Vec<AlgebraVector>>,
}

/// Ordered exponential of an exact step control, with checkpoints at every
/// breakpoint and at `sample_times`.
pub fn evol_step(spec: &LieGroupSpec, p: &RegulatedPath, sample_times: &[f64]) -> Result<EvolutionResult> {
    spec.check_vector(&p.values()[0])?;
    let nodes = ordered_nodes(spec, p)?;
    let endpoint = nodes.last().expect("at least two nodes").clone();
    let mut result = EvolutionResult {
        checkpoints: Vec::new(),
        endpoint,
        refinement_depth: 0,
        error_estimate: 0.0,
        refinement_history: Vec::new(),
        control: p.clone(),
        nodes,
    };
    result.checkpoints = checkpoints(spec, &result, sample_times)?;
    Ok(result)
}

fn ordered_nodes(spec: &LieGroupSpec, p: &RegulatedPath) -> Result<Vec<GroupElement>> {
    let mut nodes = Vec::with_capacity(p.breakpoints().len());
    let mut current = spec.identity();
    nodes.push(current.clone());
    for (w, v) in p.breakpoints().windows(2).zip(p.values()) {
        current = spec.multiply(&current, &spec.exp(&v.scale(w[1] - w[0]))?)?;
        nodes.push(current.clone());
    }
    Ok(nodes)
}

fn ordered_endpoint(spec: &LieGroupSpec, p: &RegulatedPath) -> Result<GroupElement> {
    let mut current = spec.identity();
    for (w, v) in p.breakpoints().windows(2).zip(p.values()) {
        current = spec.multiply(&current, &spec.exp(&v.scale(w[1] - w[0]))?)?;
    }
    Ok(current)
}

fn checkpoints(spec: &LieGroupSpec, r: &EvolutionResult, extra: &[f64]) -> Result<Vec<(f64, GroupElement)>> {
    let bps = r.control.breakpoints();
    let times = merge_partitions(bps, extra);
    times
        .into_iter()
        .map(|t| {
            let exact = bps.binary_search_by(|b| b.partial_cmp(&t).expect("finite"));
            let g = match exact {
                Ok(i) => r.nodes[i].clone(),
                Err(_) => r.at(spec, t)?,
            };
            Ok((t, g))
        })
        .collect()
}

/// A control for [`evolve`]: exact step data, or a curve that is continuous
/// on each interval of `partition`.
#[derive(Clone, Copy)]
pub enum Control<'a> {
    Step(&'a RegulatedPath),
    Curve {
        curve: &'a dyn Fn(f64) -> Result<AlgebraVector>,
        partition: &'a [f64],
    },
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub max_depth: u32,
    pub sample_times: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { max_depth: DEFAULT_MAX_DEPTH, sample_times: Vec::new() }
    }
}

/// Solves `δ(η) = γ`, `η(0) = 1` to tolerance `tol` in the group metric.
///
/// Step controls are evolved exactly. Curves are sampled at midpoints on
/// `2^d` pieces per partition interval for `d = 0, 1, …` until two
/// successive endpoints are closer than `tol`.
pub fn evolve(spec: &LieGroupSpec, control: Control<'_>, tol: f64, opts: &EvolveOptions) -> Result<EvolutionResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let (curve, partition) = match control {
        Control::Step(p) => {
            let mut r = evol_step(spec, p, &opts.sample_times)?;
            r.error_estimate = p.approx_error();
            return Ok(r);
        }
        Control::Curve { curve, partition } => (curve, partition),
    };
    let base = merge_partitions(partition, &[]);
    let mut previous = ordered_endpoint(spec, &sample_unprobed(spec, curve, &base, 1)?)?;
    let mut history = Vec::new();
    for depth in 1..=opts.max_depth {
        let sampled = sample_unprobed(spec, curve, &base, 1usize << depth)?;
        let current = ordered_endpoint(spec, &sampled)?;
        let difference = spec.distance(&previous, &current)?;
        history.push(difference);
        if difference < tol {
            let control = sample_on_partition(spec, curve, &base, 1usize << depth)?;
            let mut r = evol_step(spec, &control, &opts.sample_times)?;
            r.refinement_depth = depth;
            r.error_estimate = difference;
            r.refinement_history = history;
            return Ok(r);
        }
        if depth == opts.max_depth {
            return Err(Error::ConvergenceFailure {
                depth,
                difference,
                previous: Box::new(previous),
                last: Box::new(current),
            });
        }
        previous = current;
    }
    unreachable!("loop returns at max depth")
}

/// Left logarithmic derivative of a piecewise one-parameter path: the step
/// control whose ordered exponential reproduces it.
pub fn log_derivative(spec: &LieGroupSpec, path: &GroupPath) -> Result<RegulatedPath> {
    let bps = &path.breakpoints;
    if path.nodes.len() != bps.len() {
        return Err(Error::LengthMismatch { expected: bps.len(), found: path.nodes.len() });
    }
    let start = spec.distance(&path.nodes[0], &spec.identity())?;
    if start > 1e-12 {
        return Err(Error::NotOrderedExponential { interval: 0, residual: start });
    }
    let generators = match &path.generators {
        Some(gens) => {
            if gens.len() + 1 != bps.len() {
                return Err(Error::LengthMismatch { expected: bps.len() - 1, found: gens.len() });
            }
            for (j, x) in gens.iter().enumerate() {
                let predicted = spec.multiply(&path.nodes[j], &spec.exp(&x.scale(bps[j + 1] - bps[j]))?)?;
                let residual = spec.distance(&predicted, &path.nodes[j + 1])?;
                let scale = 1.0 + spec.distance(&path.nodes[j + 1], &spec.identity())?;
                if !(residual <= 1e-9 * scale) {
                    return Err(Error::NotOrderedExponential { interval: j, residual });
                }
            }
            gens.clone()
        }
        None => {
            let mut gens = Vec::with_capacity(bps.len() - 1);
            for j in 0..bps.len() - 1 {
                let step = spec.multiply(&spec.inverse(&path.nodes[j])?, &path.nodes[j + 1])?;
                let x = spec.log_local(&step).map_err(|e| match e {
                    Error::OutOfChart { distance, .. } => Error::NotOrderedExponential { interval: j, residual: distance },
                    other => other,
                })?;
                gens.push(x.scale(1.0 / (bps[j + 1] - bps[j])));
            }
            gens
        }
    };
    RegulatedPath::make_step(bps.clone(), generators)
}

/// Smooth homomorphisms with known derivative.
#[derive(Clone, Debug)]
pub enum Morphism {
    Identity,
    /// Conjugation `g ↦ h g h⁻¹`, derivative `Ad(h)`.
    Inner(GroupElement),
    /// `det: GL(n) → GL(1)`, derivative `trace`.
    Determinant,
}

impl Morphism {
    pub fn target(&self, source: &LieGroupSpec) -> Result<LieGroupSpec> {
        match self {
            Morphism::Determinant => match source.kind {
                GroupKind::Matrix(_) => Ok(LieGroupSpec::general_linear(1)),
                _ => Err(Error::Unsupported("determinant needs a matrix group")),
            },
            _ => Ok(source.clone()),
        }
    }

    pub fn apply(&self, source: &LieGroupSpec, g: &GroupElement) -> Result<GroupElement> {
        match self {
            Morphism::Identity => Ok(g.clone()),
            Morphism::Inner(h) => source.multiply(&source.multiply(h, g)?, &source.inverse(h)?),
            Morphism::Determinant => {
                let m = g.as_matrix().ok_or(Error::Unsupported("determinant needs a matrix group"))?;
                Ok(GroupElement::matrix(Matrix::diagonal(&[m.determinant()])))
            }
        }
    }

    pub fn derivative(&self, source: &LieGroupSpec, x: &AlgebraVector) -> Result<AlgebraVector> {
        match self {
            Morphism::Identity => Ok(x.clone()),
            Morphism::Inner(h) => source.adjoint(h, x),
            Morphism::Determinant => {
                let m = x.as_matrix().ok_or(Error::Unsupported("determinant needs a matrix group"))?;
                Ok(AlgebraVector::matrix(Matrix::diagonal(&[m.trace()])))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pushforward {
    pub target: LieGroupSpec,
    /// `Evol(Lie(f)∘α)`.
    pub result: EvolutionResult,
    /// Largest checkpoint distance between `f(Evol(α))` and the result.
    pub residual: f64,
}

/// Evolves `Lie(f)∘α` in the target group and compares it with the image of
/// `Evol(α)` under `f` at every checkpoint.
pub fn pushforward_evol(spec: &LieGroupSpec, morphism: &Morphism, p: &RegulatedPath) -> Result<Pushforward> {
    let target = morphism.target(spec)?;
    let source = evol_step(spec, p, &[])?;
    let mapped = p.map_values(|x| morphism.derivative(spec, x))?;
    let result = evol_step(&target, &mapped, &[])?;
    let mut residual: f64 = 0.0;
    for ((_, lhs), (_, rhs)) in source.checkpoints.iter().zip(&result.checkpoints) {
        let image = morphism.apply(spec, lhs)?;
        residual = residual.max(target.distance(&image, rhs)?);
    }
    Ok(Pushforward { target, result, residual })
}
