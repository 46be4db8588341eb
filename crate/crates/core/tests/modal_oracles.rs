//! Independent oracles for the modal analysis: hand-rolled bisection on the
//! analytic pinned-free reduction, raw-term magnitude scaling, the boundary
//! determinant cross-check, and scaling/normalization properties.

use flexlink::beam::BeamParams;
use flexlink::modal::{
    boundary_matrix, char_eq_residual, char_eq_residual_scaled, find_beta_roots, find_mode_shape,
    natural_frequency, Normalization,
};
use proptest::prelude::*;

fn reference_beam() -> BeamParams<f64> {
    BeamParams::new(0.5, 1.0, 1.0, 0.002, 0.0, 0.0, 0.05).unwrap()
}

fn pinned_free_beam() -> BeamParams<f64> {
    BeamParams::new(0.5, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap()
}

/// Test-local bisection, written independently of the library root finder.
fn bisect_oracle(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) < 0.0, "oracle bracket must straddle a root");
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 || (b - a) < 1e-13 * mid.abs() {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// The additive terms of the characteristic equation, re-derived in test
/// code to define "the scale of the dominant term" independently.
fn raw_term_magnitudes(beta: f64, p: &BeamParams<f64>) -> Vec<f64> {
    let x = beta * p.length;
    let (s, c) = (x.sin(), x.cos());
    let (sh, ch) = (x.sinh(), x.cosh());
    let (rho, j0, jp, mp) = (p.rho, p.hub_inertia, p.payload_inertia, p.payload_mass);
    vec![
        (c * sh - s * ch).abs(),
        (2.0 * mp / rho * beta * s * sh).abs(),
        (2.0 * jp / rho * beta.powi(3) * c * ch).abs(),
        (j0 / rho * beta.powi(3) * (1.0 + c * ch)).abs(),
        (mp / (rho * rho) * (j0 + jp) * beta.powi(4) * (c * sh - s * ch)).abs(),
        (j0 * jp / (rho * rho) * beta.powi(6) * (c * sh + s * ch)).abs(),
        (j0 * jp * mp / (rho * rho * rho) * beta.powi(7) * (1.0 - c * ch)).abs(),
    ]
}

#[test]
fn residual_at_returned_roots_is_small_relative_to_dominant_term() {
    let p = reference_beam();
    for beta in find_beta_roots(&p, 5).unwrap() {
        let dominant = raw_term_magnitudes(beta, &p)
            .into_iter()
            .fold(0.0, f64::max);
        let residual = char_eq_residual(beta, &p).abs();
        assert!(
            residual < 1e-6 * dominant,
            "residual {residual:e} vs dominant term {dominant:e} at beta = {beta}"
        );
    }
}

#[test]
fn pinned_free_roots_match_tan_tanh_oracle() {
    // With no hub or payload inertia the characteristic equation reduces to
    // tan(bl) = tanh(bl); bracket its first two positive roots directly.
    let p = pinned_free_beam();
    let f = |x: f64| x.tan() - x.tanh();
    let expected = [
        bisect_oracle(f, 3.6, 3.95 - 1e-9),
        bisect_oracle(f, 6.9, 7.07),
    ];
    assert!((expected[0] - 3.92660).abs() < 1e-5);
    assert!((expected[1] - 7.06858).abs() < 1e-5);

    let roots = find_beta_roots(&p, 2).unwrap();
    for (root, oracle) in roots.iter().zip(expected) {
        assert!(
            (root * p.length - oracle).abs() < 1e-8,
            "root {root} vs oracle {oracle}"
        );
    }
}

#[test]
fn pinned_free_shape_matches_the_analytic_closed_form() {
    // For the pinned-free beam the shape is known in closed form:
    // phi(x) = sin(bx) + (sin(bl)/sinh(bl)) sinh(bx), so the
    // normalization-free tip/slope ratio is
    // 2 sin(bl) / (b (1 + sin(bl)/sinh(bl))).
    let p = pinned_free_beam();
    for beta in find_beta_roots(&p, 3).unwrap() {
        let bl = beta * p.length;
        let mix = bl.sin() / bl.sinh();
        let analytic = 2.0 * bl.sin() / (beta * (1.0 + mix));
        let shape = find_mode_shape(beta, &p, Normalization::MeanSquare).unwrap();
        let ratio = shape.tip_value / shape.hub_slope;
        assert!(
            (ratio - analytic).abs() < 1e-9 * analytic.abs(),
            "tip/slope ratio {ratio} vs analytic {analytic} at beta = {beta}"
        );
    }
}

#[test]
fn first_root_of_reference_beam_agrees_with_raw_residual_bisection() {
    // Independent path: bisect the *raw* residual (the library brackets the
    // conditioned one).
    let p = reference_beam();
    let f = |beta: f64| char_eq_residual(beta, &p);
    let oracle = bisect_oracle(f, 3.5, 3.9);
    let root = find_beta_roots(&p, 1).unwrap()[0];
    assert!((root - oracle).abs() < 1e-9 * oracle);
}

#[test]
fn boundary_determinant_shares_sign_changes_with_characteristic_residual() {
    let p = reference_beam();
    let roots = find_beta_roots(&p, 5).unwrap();
    let hi = roots[4] + 1.0;
    let grid = 4000;
    let mut det_changes = Vec::new();
    let mut res_changes = Vec::new();
    let mut prev_det = boundary_matrix(0.1, &p).determinant();
    let mut prev_res = char_eq_residual_scaled(0.1, &p);
    for k in 1..=grid {
        let beta = 0.1 + (hi - 0.1) * k as f64 / grid as f64;
        let det = boundary_matrix(beta, &p).determinant();
        let res = char_eq_residual_scaled(beta, &p);
        if det * prev_det < 0.0 {
            det_changes.push(k);
        }
        if res * prev_res < 0.0 {
            res_changes.push(k);
        }
        prev_det = det;
        prev_res = res;
    }
    assert_eq!(
        det_changes, res_changes,
        "determinant and residual must bracket the same roots"
    );
    assert_eq!(det_changes.len(), 5);
}

#[test]
fn omega_list_is_strictly_increasing() {
    let p = reference_beam();
    let omegas: Vec<f64> = find_beta_roots(&p, 6)
        .unwrap()
        .into_iter()
        .map(|b| natural_frequency(b, &p))
        .collect();
    for pair in omegas.windows(2) {
        assert!(pair[0] < pair[1]);
    }
}

#[test]
fn ratio_is_invariant_across_normalizations() {
    let p = reference_beam();
    for beta in find_beta_roots(&p, 3).unwrap() {
        let ratios: Vec<f64> = [
            Normalization::MeanSquare,
            Normalization::UnitHubSlope,
            Normalization::UnitTip,
        ]
        .into_iter()
        .map(|norm| {
            let shape = find_mode_shape(beta, &p, norm).unwrap();
            shape.tip_value / shape.hub_slope
        })
        .collect();
        for r in &ratios[1..] {
            assert!(
                (r - ratios[0]).abs() < 1e-10 * ratios[0].abs(),
                "ratios differ across conventions: {ratios:?}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Multiplying EI by s^2 leaves every root (and coefficient ratio)
    /// unchanged and multiplies every natural frequency by s.
    #[test]
    fn ei_scaling_law(
        rho in 0.2f64..3.0,
        length in 0.5f64..2.0,
        j0 in 0.0f64..0.01,
        s in 1.2f64..4.0,
    ) {
        let base = BeamParams::new(rho, length, 1.0, j0, 0.0, 0.0, 0.0).unwrap();
        let mut scaled = base;
        scaled.ei = s * s;

        let roots = find_beta_roots(&base, 3).unwrap();
        let roots_scaled = find_beta_roots(&scaled, 3).unwrap();
        for (b0, b1) in roots.iter().zip(&roots_scaled) {
            prop_assert!((b0 - b1).abs() < 1e-8 * b0);
            let ratio = natural_frequency(*b1, &scaled) / natural_frequency(*b0, &base);
            prop_assert!((ratio - s).abs() < 1e-8 * s);
        }

        // Coefficient ratios of the first shape are EI-independent.
        let shape0 = find_mode_shape(roots[0], &base, Normalization::UnitHubSlope).unwrap();
        let shape1 =
            find_mode_shape(roots_scaled[0], &scaled, Normalization::UnitHubSlope).unwrap();
        for (c0, c1) in shape0.coeffs.iter().zip(&shape1.coeffs) {
            prop_assert!((c0 - c1).abs() < 1e-7 * c0.abs().max(1e-3));
        }
    }

    /// Frequencies follow omega = beta^2 sqrt(EI/rho) for arbitrary
    /// parameters.
    #[test]
    fn natural_frequency_formula(beta in 0.1f64..50.0, ei in 0.1f64..10.0, rho in 0.1f64..10.0) {
        let p = BeamParams::new(rho, 1.0, ei, 0.0, 0.0, 0.0, 0.0).unwrap();
        let direct = natural_frequency(beta, &p);
        prop_assert!((direct * direct - beta.powi(4) * ei / rho).abs() < 1e-12 * direct * direct);
    }
}
