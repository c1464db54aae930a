//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::panic;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use halflie::config::parse_config;
use halflie::{run_experiment, ExperimentKind, RunOptions};
use halflie_core::cocycle::{
    fit_coboundary, max_cocycle_defect, smooth_equivalent, smoothness_score, BumpFunction, CocycleCurve, Flow,
    ScoreOptions,
};
use halflie_core::evolution::{evol_step, evolve, log_derivative, pushforward_evol, Control, EvolveOptions, Morphism};
use halflie_core::instances::{affine, loop_group, oscillator, unit_group_conjugation};
use halflie_core::limits::{
    a_n, an_identities, bound_suite, commutator_sequence, default_indices, strong_trotter_sequence,
    trotter_pair_sequence, HCurve,
};
use halflie_core::regulated::sup_distance;
use halflie_core::{
    AlgebraVector, GroupElement, HalfLieGroup, HalfLiePoint, HalfLieVector, LieGroupSpec, Matrix, RegulatedPath, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed < limit
}

/// Step control on `spec` with at most `max_pieces` pieces on the grid
/// `k / grid` and values of norm at most `radius`.
fn random_step(spec: &LieGroupSpec, rng: &mut ChaCha8Rng, max_pieces: usize, grid: u32, radius: f64) -> RegulatedPath {
    let pieces = rng.gen_range(1..=max_pieces);
    let mut cuts: Vec<u32> = Vec::new();
    while cuts.len() + 1 < pieces {
        let k = rng.gen_range(1..grid);
        if !cuts.contains(&k) {
            cuts.push(k);
        }
    }
    cuts.sort_unstable();
    let mut breakpoints = vec![0.0];
    breakpoints.extend(cuts.iter().map(|&k| k as f64 / grid as f64));
    breakpoints.push(1.0);
    let values = (0..pieces)
        .map(|_| {
            let x = spec.random_vector(rng, 1.0);
            let target = radius * rng.gen_range(0.0..=1.0);
            let norm = spec.norm(&x);
            if norm > 0.0 { x.scale(target / norm) } else { x }
        })
        .collect();
    RegulatedPath::make_step(breakpoints, values).expect("valid step control")
}

fn criterion_1() -> Outcome {
    let spec = LieGroupSpec::general_linear(3);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_step(&spec, &mut rng, 8, 64, 0.3);
        let exact = evol_step(&spec, &p, &[]).map_err(|e| e.to_string())?;
        let curve = |t: f64| Ok(p.eval(t).clone());
        let control = Control::Curve { curve: &curve, partition: p.breakpoints() };
        let refined = evolve(&spec, control, 1e-12, &EvolveOptions::default()).map_err(|e| e.to_string())?;
        worst = worst.max(exact.endpoint.max_abs_diff(&refined.endpoint));
    }
    let elapsed = started.elapsed();
    ensure(
        worst < 1e-9 && within(Duration::from_secs(10), elapsed),
        format!("max endpoint gap {worst:.2e} over 1000 controls in {elapsed:.2?}"),
    )
}

type M3 = [[f64; 3]; 3];

fn m3(m: &Matrix) -> M3 {
    let s = m.as_slice();
    [[s[0], s[1], s[2]], [s[3], s[4], s[5]], [s[6], s[7], s[8]]]
}

fn mul(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn scaled(a: &M3, s: f64) -> M3 {
    a.map(|row| row.map(|x| x * s))
}

/// Taylor series with scaling and squaring.
fn expm(a: &M3) -> M3 {
    let norm = a.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let x = scaled(a, 0.5f64.powi(squarings as i32));
    let mut result = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut term = result;
    for k in 1..=14 {
        term = scaled(&mul(&term, &x), 1.0 / k as f64);
        for i in 0..3 {
            for j in 0..3 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    result
}

fn criterion_2() -> Outcome {
    let generator = [[0.0, 1.0, 0.3], [-1.0, 0.0, 0.5], [-0.3, -0.5, 0.0]];
    let inst = unit_group_conjugation(Matrix::from_rows(&[&generator[0], &generator[1], &generator[2]]))
        .map_err(|e| e.to_string())?;
    let group = &inst.group;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let started = Instant::now();
    let (mut worst, mut base_gap): (f64, f64) = (0.0, 0.0);
    let steps = 10_000usize;
    let h = 1.0 / steps as f64;
    for _ in 0..100 {
        let alpha = random_step(group.fiber(), &mut rng, 4, 16, 0.3);
        let beta = random_step(group.base(), &mut rng, 4, 16, 0.5);
        let r = group.evol_h(&alpha, &beta, 1e-9).map_err(|e| e.to_string())?;
        let base_only = evol_step(group.base(), &beta, &[]).map_err(|e| e.to_string())?;
        base_gap = base_gap.max(r.base.endpoint.max_abs_diff(&base_only.endpoint));

        // n' = n · π̇(g) α, g' = g β, with the generator frozen at each step midpoint.
        let mut n = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut g = 0.0;
        for k in 0..steps {
            let mid = (k as f64 + 0.5) * h;
            let a = m3(alpha.eval(mid).as_matrix().expect("matrix"));
            let b = beta.eval(mid).as_scalar();
            let g_mid = g + 0.5 * h * b;
            let rot = expm(&scaled(&generator, g_mid));
            let back = expm(&scaled(&generator, -g_mid));
            let twisted = mul(&mul(&rot, &a), &back);
            n = mul(&n, &expm(&scaled(&twisted, h)));
            g += h * b;
        }
        let endpoint = m3(r.fiber.endpoint.as_matrix().expect("matrix"));
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((endpoint[i][j] - n[i][j]).abs());
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(
        worst < 1e-5 && base_gap == 0.0 && within(Duration::from_secs(60), elapsed),
        format!("max fiber gap {worst:.2e}, base gap {base_gap:e}, 100 controls in {elapsed:.2?}"),
    )
}

fn criterion_3() -> Outcome {
    let spec = LieGroupSpec::general_linear(3);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut log_res, mut push_res, mut det_res, mut liouville): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let p = random_step(&spec, &mut rng, 8, 64, 0.3);
        let evol = evol_step(&spec, &p, &[]).map_err(|e| e.to_string())?;
        let mut path = evol.path();
        path.generators = None;
        let recovered = log_derivative(&spec, &path).map_err(|e| e.to_string())?;
        log_res = log_res.max(sup_distance(&spec, &recovered, &p).map_err(|e| e.to_string())?);

        let h = spec.exp(&spec.random_vector(&mut rng, 0.3)).map_err(|e| e.to_string())?;
        let inner = pushforward_evol(&spec, &Morphism::Inner(h), &p).map_err(|e| e.to_string())?;
        push_res = push_res.max(inner.residual);
        let det = pushforward_evol(&spec, &Morphism::Determinant, &p).map_err(|e| e.to_string())?;
        det_res = det_res.max(det.residual);

        // det Evol(α)(1) = exp ∫ tr α.
        let integral: f64 = p
            .breakpoints()
            .windows(2)
            .zip(p.values())
            .map(|(w, v)| (w[1] - w[0]) * v.as_matrix().expect("matrix").trace())
            .sum();
        let determinant = evol.endpoint.as_matrix().expect("matrix").determinant();
        liouville = liouville.max((determinant - integral.exp()).abs());
    }
    let worst = log_res.max(push_res).max(det_res).max(liouville);
    ensure(
        worst < 1e-9,
        format!(
            "log-derivative {log_res:.2e}, inner pushforward {push_res:.2e}, determinant pushforward {det_res:.2e}, Liouville {liouville:.2e}"
        ),
    )
}

fn scalar_point(n: f64, g: f64) -> HalfLiePoint {
    HalfLiePoint { n: GroupElement::scalar(n), g: GroupElement::scalar(g) }
}

fn scalar_vector(v: f64, x: f64) -> HalfLieVector {
    HalfLieVector::new(AlgebraVector::scalar(v), AlgebraVector::scalar(x))
}

/// Composite Simpson rule for `∫_0^t e^s ds`.
fn exp_integral(t: f64) -> f64 {
    let m = 2000;
    let h = t / m as f64;
    let inner: f64 = (1..m).map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * (k as f64 * h).exp()).sum();
    h / 3.0 * (1.0 + t.exp() + inner)
}

fn criterion_4() -> Outcome {
    let aff = affine(1.0).map_err(|e| e.to_string())?.group;
    let zeta = HCurve::new(scalar_vector(1.0, 1.0), |s: f64| Ok(scalar_point(s.sin(), s)));
    let started = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for &t in &[0.5, 1.0, 2.0] {
        let r = strong_trotter_sequence(&aff, &zeta, t, &default_indices(), 1e-2).map_err(|e| e.to_string())?;
        let target = r.target.as_ref().expect("target");
        let oracle_gap = (target.n.as_scalar() - exp_integral(t)).abs().max((target.g.as_scalar() - t).abs());
        let tail = &r.errors[(r.errors.len() - 1) / 2..];
        let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
        let ratio = r.final_error() / r.errors[0];
        ok &= oracle_gap < 1e-10 && decreasing && ratio < 1e-2 && (0.8..=1.2).contains(&r.fitted_exponent);
        details.push(format!("t={t}: ratio {ratio:.2e}, exponent {:.3}, target gap {oracle_gap:.1e}", r.fitted_exponent));
    }
    let elapsed = started.elapsed();
    ensure(ok && within(Duration::from_secs(5), elapsed), format!("{} in {elapsed:.2?}", details.join("; ")))
}

fn criterion_5() -> Outcome {
    let aff = affine(1.0).map_err(|e| e.to_string())?.group;
    let g1 = HCurve::new(scalar_vector(1.0, 0.0), |s| Ok(scalar_point(s, 0.0)));
    let g2 = HCurve::new(scalar_vector(0.0, 1.0), |s| Ok(scalar_point(0.0, s)));
    let indices = [2, 1 << 12];
    let r = trotter_pair_sequence(&aff, &g1, &g2, 1.0, &indices, 1e-3).map_err(|e| e.to_string())?;
    // (s, 0)(0, s) = (s, s); its n-th power has fiber part s Σ_k e^{ks}.
    let geometric = |n: u64| {
        let s = 1.0 / n as f64;
        s * (0..n).map(|k| (k as f64 * s).exp()).sum::<f64>()
    };
    let first = r.products[0].n.as_scalar();
    let gap = (first - geometric(2)).abs().max((first - 0.5 * (1.0 + 0.5f64.exp())).abs());
    let final_error = r.final_error();
    ensure(gap < 1e-12 && final_error < 1e-3, format!("n=2 gap {gap:.1e}, n=4096 error {final_error:.2e}"))
}

fn oscillator_lines(group: &HalfLieGroup, x: AlgebraVector) -> (HCurve<'_>, HCurve<'_>) {
    let fiber = group.fiber().clone();
    let dir = x.clone();
    let g1 = HCurve::new(HalfLieVector::new(x, AlgebraVector::scalar(0.0)), move |s| {
        Ok(HalfLiePoint { n: fiber.exp(&dir.scale(s))?, g: GroupElement::scalar(0.0) })
    });
    let fiber = group.fiber().clone();
    let g2 = HCurve::new(HalfLieVector::new(group.fiber().zero(), AlgebraVector::scalar(1.0)), move |s| {
        Ok(HalfLiePoint { n: fiber.identity(), g: GroupElement::scalar(s) })
    });
    (g1, g2)
}

fn criterion_6() -> Outcome {
    let osc = oscillator(&[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?.group;
    let x = AlgebraVector::complex(vec![C64::new(1.0, 0.0), C64::new(0.125, 0.0), C64::new(1.0 / 27.0, 0.0)]);
    let (g1, g2) = oscillator_lines(&osc, x);
    let r = commutator_sequence(&osc, &g1, &g2, 1.0, &[16, 32, 64, 128, 256], 1e-2).map_err(|e| e.to_string())?;
    // The target is exp(t·bracket) with bracket (−iλx, 0).
    let target = r.target.as_ref().ok_or("bracket undefined")?;
    let expected = [C64::new(0.0, -1.0), C64::new(0.0, -0.25), C64::new(0.0, -1.0 / 9.0)];
    let target_gap = target.n.as_complex().expect("complex").iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let final_error = r.final_error();
    ensure(
        final_error < 1e-2 && target_gap < 1e-12,
        format!("n=256 error {final_error:.2e}, target gap {target_gap:.1e}"),
    )
}

/// Least-squares slope of `log y` on `log x` over the last half of the points.
fn oracle_tail_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let start = xs.len() - (xs.len() / 2).max(2);
    let lx: Vec<f64> = xs[start..].iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys[start..].iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn criterion_7() -> Outcome {
    let config = parse_config(
        r#"{
            "experiment": "commutator",
            "ladder": { "dims": [4, 8, 16, 32, 64, 128, 256], "lambda_power": 2.0, "coeff_power": -1.4, "start": 1024 },
            "t_grid": [1.0],
            "expect": { "fitted_exponent": [1.0, 1.2], "max_mode_deviation": 1e-6 }
        }"#,
    )
    .map_err(|e| e.to_string())?;
    let out = run_experiment(&config, ExperimentKind::Commutator, &RunOptions::default()).map_err(|e| e.to_string())?;
    let report = out.report;
    let column = |name: &str| report.columns.iter().position(|c| *c == name).expect("column");
    let cell = |row: &[halflie::report::Cell], i: usize| match &row[i] {
        halflie::report::Cell::Float(x) => *x,
        halflie::report::Cell::Int(k) => *k as f64,
        other => panic!("unexpected cell {other:?}"),
    };
    let dims: Vec<f64> = report.rows.iter().map(|r| cell(r, column("d"))).collect();
    let norms: Vec<f64> = report.rows.iter().map(|r| cell(r, column("limit_norm"))).collect();
    let deviation = report.rows.iter().map(|r| cell(r, column("max_mode_deviation"))).fold(0.0, f64::max);
    let exponent = cell(&report.rows[0], column("fitted_exponent"));

    // The limit has modes −iλ_n x_n t = −i n^{0.6}, so its norm is the square
    // root of the partial sums of n^{1.2}.
    let oracle_norms: Vec<f64> =
        dims.iter().map(|&d| (1..=d as u64).map(|n| (n as f64).powf(1.2)).sum::<f64>().sqrt()).collect();
    let norm_gap = norms.iter().zip(&oracle_norms).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
    let oracle_exponent = oracle_tail_slope(&dims, &oracle_norms);
    ensure(
        deviation < 1e-6 && (exponent - 1.1).abs() <= 0.1 && (oracle_exponent - 1.1).abs() <= 0.1 && report.all_passed(),
        format!(
            "max mode deviation {deviation:.2e}, growth exponent {exponent:.4} (oracle {oracle_exponent:.4}), norm gap {norm_gap:.1e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let inst = oscillator(&[1.0, 5.0]).map_err(|e| e.to_string())?;
    let group = &inst.group;
    let flow_fn = |t: f64, v: &AlgebraVector| group.derived_act(&GroupElement::scalar(t), v);
    let flow: &Flow = &flow_fn;
    let w = AlgebraVector::complex(vec![C64::new(1.0, 0.0); 2]);
    let alpha = CocycleCurve::coboundary(6.0, flow, w).map_err(|e| e.to_string())?;
    let bump = BumpFunction::standard(2.0).map_err(|e| e.to_string())?;
    let smooth = smooth_equivalent(&alpha, flow, &bump).map_err(|e| e.to_string())?;
    let window = (0.0, smooth.curve.window());
    let opts = ScoreOptions::default();
    let before = smoothness_score(&|t| alpha.eval(t), window, &[1], opts).map_err(|e| e.to_string())?;
    let after = smoothness_score(&|t| smooth.curve.eval(t), window, &[1], opts).map_err(|e| e.to_string())?;
    let defect = max_cocycle_defect(&smooth.curve, flow, 8).map_err(|e| e.to_string())?;
    let samples = (0..=20)
        .map(|j| {
            let t = 0.2 * j as f64;
            Ok((t, smooth.curve.eval(t)?.sub(&alpha.eval(t)?)))
        })
        .collect::<halflie_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let fit = fit_coboundary(&samples, flow).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let (s0, s1) = (before.score(1).unwrap_or(f64::NAN), after.score(1).unwrap_or(f64::NAN));
    ensure(
        !before.passed() && after.passed() && defect < 1e-8 && fit.residual < 1e-8 && within(Duration::from_secs(10), elapsed),
        format!(
            "input score {s0:.2e}, output score {s1:.2e}, defect {defect:.1e}, fit residual {:.1e}, {elapsed:.2?}",
            fit.residual
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for d in [1usize, 2, 4, 8, 16, 32, 64] {
        let lambda: Vec<f64> = (1..=d).map(|n| n as f64 * rng.gen_range(0.5..1.5)).collect();
        let group = oscillator(&lambda).map_err(|e| e.to_string())?.group;
        let v: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let vector = AlgebraVector::complex(v.clone());
        for k in 1..=5u32 {
            let p = group.seminorm_pk(&vector, k).map_err(|e| e.to_string())?;
            let mut sum = 0.0;
            for (z, l) in v.iter().zip(&lambda) {
                let mut scale = 1.0;
                for _ in 0..k {
                    scale *= l;
                }
                sum += (scale * z.norm()).powi(2);
            }
            let closed = sum.sqrt();
            worst = worst.max((p.value - closed).abs() / closed);
            cases += 1;
        }
    }
    ensure(worst < 1e-12, format!("max relative gap {worst:.1e} over {cases} cases"))
}

fn criterion_10() -> Outcome {
    let generator = Matrix::from_rows(&[&[0.0, 1.0, 0.3], &[-1.0, 0.0, 0.5], &[-0.3, -0.5, 0.0]]);
    let instances = [
        oscillator(&[1.0, 2.0, 3.0]),
        affine(1.0),
        unit_group_conjugation(generator),
        loop_group(2),
    ];
    let mut specs: Vec<(String, LieGroupSpec)> = Vec::new();
    for inst in instances {
        let inst = inst.map_err(|e| e.to_string())?;
        specs.push((format!("{} fiber", inst.name), inst.group.fiber().clone()));
        specs.push((format!("{} base", inst.name), inst.group.base().clone()));
    }
    specs.push(("gl(2)".into(), LieGroupSpec::general_linear(2)));
    specs.push(("gl(3)".into(), LieGroupSpec::general_linear(3)));
    let mut violations = 0;
    for (i, (_, spec)) in specs.iter().enumerate() {
        let r = bound_suite(spec, 10_000, 0.2, 1000 + i as u64).map_err(|e| e.to_string())?;
        violations += r.violations();
    }
    let (mut doubling, mut bound_ok) = (0.0f64, true);
    for &c in &[0.5, 1.0, 2.0] {
        for &rho in &[0.5, 1.0, 2.0] {
            let r = an_identities(c, rho, 1 << 10).map_err(|e| e.to_string())?;
            doubling = doubling.max(r.doubling_residual);
            bound_ok &= r.bound_holds;
            // Independent check: a_n(ρ/n) = ((1 + Cρ/n)^n − 1)/C ≤ (e^{Cρ} − 1)/C.
            let limit = ((c * rho).exp() - 1.0) / c;
            for j in 0..=10 {
                let n = 1u64 << j;
                let value = a_n(c, rho / n as f64, n);
                let direct = ((1.0 + c * rho / n as f64).powi(n as i32) - 1.0) / c;
                bound_ok &= value <= limit * (1.0 + 1e-12) && (value - direct).abs() <= 1e-12 * limit.max(1.0) * n as f64;
            }
            for j in 0..10 {
                let m = 1u64 << j;
                let x = rho / (2 * m) as f64;
                let (am, a2m) = (a_n(c, x, m), a_n(c, x, 2 * m));
                doubling = doubling.max((a2m - (2.0 * am + c * am * am)).abs() / a2m.max(1.0));
            }
        }
    }
    ensure(
        violations == 0 && doubling < 1e-12 && bound_ok,
        format!("{violations} violations over {} groups x 10^4 samples; doubling residual {doubling:.1e}", specs.len()),
    )
}

fn criterion_11() -> Outcome {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("strong-trotter", "strong_trotter_affine.json"),
        ("trotter", "trotter_affine.json"),
        ("commutator", "commutator_ladder.json"),
        ("seminorms", "seminorms_oscillator.json"),
        ("bounds", "bounds_gl2.json"),
        ("cocycle-smooth", "cocycle_smooth.json"),
        ("evolve", "evolve_conjugation.json"),
    ];
    let mut compared = 0;
    for (command, file) in cases {
        for format in ["csv", "json"] {
            let mut outputs = Vec::new();
            for jobs in ["1", "4"] {
                let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
                let config = configs.join(file);
                let args = [
                    "halflie",
                    command,
                    "--config",
                    config.to_str().expect("utf-8 path"),
                    "--out",
                    dir.path().to_str().expect("utf-8 path"),
                    "--format",
                    format,
                    "--seed",
                    "7",
                    "--jobs",
                    jobs,
                    "--quiet",
                ];
                let code = halflie::cli::execute(args);
                if code != 0 {
                    return Err(format!("{command} exited with {code}"));
                }
                let report = dir.path().join(format!("{command}.{format}"));
                outputs.push(std::fs::read(report).map_err(|e| e.to_string())?);
            }
            if outputs[0] != outputs[1] {
                return Err(format!("{command} {format} output differs between runs"));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} report pairs byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("step-control exactness", criterion_1),
        ("semidirect factorization", criterion_2),
        ("log-derivative and pushforward naturality", criterion_3),
        ("strong Trotter", criterion_4),
        ("Trotter pair", criterion_5),
        ("commutator on C1 data", criterion_6),
        ("commutator failure ladder", criterion_7),
        ("cocycle smoothing", criterion_8),
        ("seminorms", criterion_9),
        ("bound suite", criterion_10),
        ("determinism", criterion_11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|p| {
            let message = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {message}"))
        });
        let elapsed = started.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
