use std::f64::consts::E;

use approx::assert_abs_diff_eq;
use halflie_core::instances::{affine, oscillator, unit_group_conjugation};
use halflie_core::limits::{
    a_n, an_identities, bound_suite, commutator_limit, commutator_sequence, default_indices, star_condition_check,
    strong_trotter_product, strong_trotter_sequence, trotter_pair_sequence, HCurve, StarCondition, Verdict,
};
use halflie_core::{AlgebraVector, Error, GroupElement, HalfLieGroup, HalfLiePoint, HalfLieVector, LieGroupSpec, Matrix, C64};

fn point(n: f64, g: f64) -> HalfLiePoint {
    HalfLiePoint { n: GroupElement::scalar(n), g: GroupElement::scalar(g) }
}

fn vector(v: f64, x: f64) -> HalfLieVector {
    HalfLieVector::new(AlgebraVector::scalar(v), AlgebraVector::scalar(x))
}

fn fiber_line(group: &HalfLieGroup, v: AlgebraVector) -> HCurve<'_> {
    let zero = group.base().zero();
    let fiber = group.fiber().clone();
    let dir = v.clone();
    HCurve::new(HalfLieVector::new(v, zero), move |s| {
        Ok(HalfLiePoint { n: fiber.exp(&dir.scale(s))?, g: GroupElement::scalar(0.0) })
    })
    .declare_base_one_parameter(true)
}

fn base_line(group: &HalfLieGroup) -> HCurve<'_> {
    let fiber = group.fiber().clone();
    HCurve::new(HalfLieVector::new(group.fiber().zero(), AlgebraVector::scalar(1.0)), move |s| {
        Ok(HalfLiePoint { n: fiber.identity(), g: GroupElement::scalar(s) })
    })
    .declare_base_one_parameter(true)
}

#[test]
fn one_parameter_inputs_are_their_own_limits() {
    let aff = affine(1.0).unwrap().group;
    let w = vector(0.7, -0.4);
    let zeta = HCurve::one_parameter(&aff, w.clone());
    let r = strong_trotter_sequence(&aff, &zeta, 1.3, &default_indices(), 1e-6).unwrap();
    assert!(r.errors.iter().all(|&e| e < 1e-9), "{:?}", r.errors);
    assert_eq!(r.verdict, Verdict::Converging);

    let identity = HCurve::new(vector(0.0, 0.0), |_| Ok(point(0.0, 0.0)));
    let r = trotter_pair_sequence(&aff, &zeta, &identity, 1.3, &default_indices(), 1e-6).unwrap();
    assert!(r.errors.iter().all(|&e| e < 1e-9));

    let r = commutator_sequence(&aff, &zeta, &HCurve::one_parameter(&aff, w), 1.0, &[4, 8, 16], 1e-6).unwrap();
    assert!(r.errors.iter().all(|&e| e < 1e-9));
    assert!(aff.max_abs_diff(r.target.as_ref().unwrap(), &aff.identity()) < 1e-15);
}

#[test]
fn strong_trotter_affine() {
    let aff = affine(1.0).unwrap().group;
    let zeta = HCurve::new(vector(1.0, 1.0), |s: f64| Ok(point(s.sin(), s)));
    for &t in &[0.5, 1.0, 2.0] {
        let r = strong_trotter_sequence(&aff, &zeta, t, &default_indices(), 1e-2).unwrap();
        let target = r.target.as_ref().unwrap();
        assert_abs_diff_eq!(target.n.as_scalar(), t.exp() - 1.0, epsilon = 1e-13);
        assert!(r.errors.windows(2).all(|w| w[1] < w[0]));
        assert!(r.final_error() < 1e-2 * r.errors[0]);
        assert!((0.8..=1.2).contains(&r.fitted_exponent), "{}", r.fitted_exponent);
        assert_eq!(r.verdict, Verdict::Converging);
    }
}

#[test]
fn strong_trotter_quadratic_fiber() {
    let aff = affine(1.0).unwrap().group;
    let zeta = HCurve::new(vector(0.0, 0.0), |s: f64| Ok(point(s * s, 0.0)));
    let t = 1.5;
    let r = strong_trotter_sequence(&aff, &zeta, t, &[1, 2, 4, 8], 1e-6).unwrap();
    for (n, e) in r.indices.iter().zip(&r.errors) {
        assert_abs_diff_eq!(*e, t * t / *n as f64, epsilon = 1e-14);
    }
}

#[test]
fn rejects_curves_away_from_identity() {
    let aff = affine(1.0).unwrap().group;
    let zeta = HCurve::new(vector(1.0, 0.0), |s: f64| Ok(point(s + 0.1, 0.0)));
    assert!(matches!(strong_trotter_sequence(&aff, &zeta, 1.0, &[2], 1e-3), Err(Error::NotAtIdentity { .. })));
}

#[test]
fn binary_powers_match_naive_products() {
    let aff = affine(0.8).unwrap().group;
    let zeta = HCurve::new(vector(1.0, 1.0), |s: f64| Ok(point(s.sin(), s)));
    for n in 1..20u64 {
        let fast = strong_trotter_product(&aff, &zeta, 1.1, n).unwrap();
        let factor = zeta.eval(1.1 / n as f64).unwrap();
        let mut slow = aff.identity();
        for _ in 0..n {
            slow = aff.h_multiply(&slow, &factor).unwrap();
        }
        assert!(aff.max_abs_diff(&fast, &slow) < 1e-13);
    }
}

#[test]
fn trotter_pair_affine() {
    let aff = affine(1.0).unwrap().group;
    let g1 = HCurve::new(vector(1.0, 0.0), |s| Ok(point(s, 0.0)));
    let g2 = HCurve::new(vector(0.0, 1.0), |s| Ok(point(0.0, s)));
    let mut indices = vec![2];
    indices.extend(default_indices());
    let r = trotter_pair_sequence(&aff, &g1, &g2, 1.0, &indices, 1e-3).unwrap();
    assert_abs_diff_eq!(r.products[0].n.as_scalar(), 0.5 * (1.0 + 0.5f64.exp()), epsilon = 1e-12);
    assert_abs_diff_eq!(r.target.as_ref().unwrap().n.as_scalar(), E - 1.0, epsilon = 1e-14);
    assert!(r.final_error() < 1e-3);
    for (n, e) in r.indices.iter().zip(&r.errors).skip(1) {
        let predicted = (E - 1.0) / (2.0 * *n as f64);
        assert!((e / predicted - 1.0).abs() < 0.1, "n={n}: {e} vs {predicted}");
    }
    assert_eq!(r.verdict, Verdict::Converging);
    assert!((0.8..=1.2).contains(&r.fitted_exponent));
}

#[test]
fn commutator_of_curve_with_itself() {
    let osc = oscillator(&[1.0, 2.0]).unwrap().group;
    let v = AlgebraVector::complex(vec![C64::new(1.0, 0.0), C64::new(0.5, -0.5)]);
    let g = fiber_line(&osc, v);
    let r = commutator_sequence(&osc, &g, &g, 1.0, &[4, 8], 1e-6).unwrap();
    assert!(r.products.iter().all(|p| osc.max_abs_diff(p, &osc.identity()) < 1e-15));
    assert!(r.errors.iter().all(|&e| e < 1e-15));
}

#[test]
fn commutator_single_mode_limit() {
    let osc = oscillator(&[1.0]).unwrap().group;
    let g1 = fiber_line(&osc, AlgebraVector::complex(vec![C64::new(1.0, 0.0)]));
    let g2 = base_line(&osc);
    let r = commutator_sequence(&osc, &g1, &g2, 1.0, &[16, 64, 256], 1e-2).unwrap();
    let target = r.target.as_ref().unwrap().n.as_complex().unwrap()[0];
    assert!((target - C64::new(0.0, -1.0)).norm() < 1e-12);
    for (m, p) in r.indices.iter().zip(&r.products) {
        let m = *m as f64;
        let closed = C64::new(m, 0.0) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, 1.0 / m));
        assert!((p.n.as_complex().unwrap()[0] - closed).norm() < 1e-12);
    }
    assert_eq!(r.verdict, Verdict::Converging);
    let limit = commutator_limit(&osc, &g1, &g2, 1.0, 1 << 10, 1 << 30, 1e-10).unwrap();
    assert!(limit.converged);
    assert!((limit.limit.n.as_complex().unwrap()[0] - C64::new(0.0, -1.0)).norm() < 1e-9);
}

#[test]
fn commutator_on_smooth_oscillator_data() {
    let osc = oscillator(&[1.0, 2.0, 3.0]).unwrap().group;
    let x = AlgebraVector::complex(vec![C64::new(1.0, 0.0), C64::new(0.125, 0.0), C64::new(1.0 / 27.0, 0.0)]);
    let g1 = fiber_line(&osc, x);
    let g2 = base_line(&osc);
    let r = commutator_sequence(&osc, &g1, &g2, 1.0, &[16, 32, 64, 128, 256], 1e-2).unwrap();
    assert!(r.final_error() < 1e-2);
    assert!(r.errors.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn failure_regime_reports_differences() {
    use halflie_core::Action;
    struct Opaque(HalfLieGroup);
    impl Action for Opaque {
        fn fiber(&self) -> &LieGroupSpec {
            self.0.fiber()
        }
        fn base(&self) -> &LieGroupSpec {
            self.0.base()
        }
        fn act(&self, g: &GroupElement, n: &GroupElement) -> halflie_core::Result<GroupElement> {
            // Nowhere-differentiable orbit: a Weierstrass-type phase.
            let t = g.as_scalar();
            let phase: f64 = (0..40).map(|k| 0.5f64.powi(k) * (3f64.powi(k) * t).sin()).sum();
            let z = n.as_complex().unwrap()[0] * C64::from_polar(1.0, phase);
            Ok(GroupElement::complex(vec![z]))
        }
    }
    let inner = oscillator(&[1.0]).unwrap().group;
    let rough = HalfLieGroup::new("rough", Opaque(inner));
    let g1 = fiber_line(&rough, AlgebraVector::complex(vec![C64::new(1.0, 0.0)]));
    let g2 = base_line(&rough);
    let r = commutator_sequence(&rough, &g1, &g2, 1.0, &[4, 8, 16], 1e-6).unwrap();
    assert!(r.target.is_none());
    assert_eq!(r.indices, vec![8, 16]);
    assert_eq!(r.errors.len(), 2);
}

#[test]
fn star_condition_verdicts() {
    let aff = affine(1.0).unwrap().group;
    let one_param = HCurve::one_parameter(&aff, vector(1.0, 1.0));
    let plain = HCurve::new(vector(1.0, 1.0), |s: f64| Ok(point(s.sin(), s)));
    let smooth = HCurve::new(vector(1.0, 0.0), |s| Ok(point(s, 0.0))).declare_fiber_c1(true);
    assert_eq!(star_condition_check(&one_param, &plain), StarCondition::HoldsVia1);
    assert_eq!(star_condition_check(&plain, &smooth), StarCondition::HoldsVia2);
    assert_eq!(star_condition_check(&plain, &plain), StarCondition::Unknown);
}

#[test]
fn bound_suite_examples() {
    let spec = LieGroupSpec::general_linear(2);
    let x = AlgebraVector::matrix(Matrix::zeros(2));
    let y = AlgebraVector::matrix(Matrix::from_rows(&[&[0.01, 0.05], &[-0.02, 0.03]]));
    assert_eq!(spec.exp_ad(&x, &y).unwrap(), y);

    let report = bound_suite(&spec, 10_000, 0.2, 1).unwrap();
    assert_eq!(report.violations(), 0);
    assert!(report.conjugation_residual < 1e-12);
    assert_abs_diff_eq!(report.constant, 50.0, epsilon = 1e-12);
    for row in &report.rows {
        assert_eq!(row.samples + row.discarded, 10_000);
        assert!(row.min_slack >= -1e-9);
    }

    let line = LieGroupSpec::additive(3);
    let report = bound_suite(&line, 500, 0.2, 2).unwrap();
    assert_eq!(report.violations(), 0);
    assert!(report.rows[0].min_slack >= 0.0);

    let conj = unit_group_conjugation(Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap().group;
    assert_eq!(bound_suite(conj.fiber(), 2_000, 0.2, 3).unwrap().violations(), 0);
}

#[test]
fn an_examples() {
    assert_abs_diff_eq!(a_n(1.0, 1.0, 2), 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(a_n(1.0, 1.0, 4), 15.0, epsilon = 1e-13);
    assert_abs_diff_eq!(a_n(1.0, 0.25, 4), 1.25f64.powi(4) - 1.0, epsilon = 1e-14);
    for &c in &[0.5, 1.0, 2.0] {
        for &rho in &[0.5, 1.0, 2.0] {
            assert_abs_diff_eq!(a_n(c, rho, 1), rho, epsilon = 1e-14 * rho);
            let r = an_identities(c, rho, 1 << 10).unwrap();
            assert!(r.doubling_residual < 1e-12, "{}", r.doubling_residual);
            assert!(r.bound_holds);
            assert_eq!(r.chain.len(), 11);
        }
    }
    assert!(an_identities(1.0, 1.0, 3).is_err());
}
