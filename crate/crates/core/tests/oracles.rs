//! Cross-module checks against values computed independently of the
//! library (by hand, closed form, or a second method).

use std::f64::consts::PI;

use gevrey_bbm::analytics::{estimate_radius, Calibration};
use gevrey_bbm::evolution::{lifespan, picard_solve, simulate};
use gevrey_bbm::identities::{
    factored_form, fractional_bound_exponents, power_sum, special_case_k1, special_case_k2, Triad,
};
use gevrey_bbm::multipliers::semigroup;
use gevrey_bbm::norms::{h1_invariant, hs_norm, i_norm};
use gevrey_bbm::spectral::{dealias, inverse_transform};
use gevrey_bbm::{GevreyWeight, Grid, InitialData, ModelParams, PicardOptions, SpectralField};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

#[test]
fn triad_one_one_minus_two() {
    let t = Triad::from_ints(1, 1);
    // 1 + 1 + (-2)^3 and 1 + 1 + (-2)^5
    assert_eq!(power_sum(&t, 1), int(-6));
    assert_eq!(power_sum(&t, 2), int(-30));
    assert_eq!(factored_form(&t, 1), int(-6));
    assert_eq!(factored_form(&t, 2), int(-30));
    // 3·1·1·(-2) and -5·(-2)·(1 - 2 - 2)
    assert_eq!(special_case_k1(&t), int(-6));
    assert_eq!(special_case_k2(&t), int(-30));
}

#[test]
fn white_spectrum_survivors() {
    let g = Grid::new(48, 64.0).unwrap();
    let white = SpectralField::from_half_spectrum(g, |_, _| Complex64::new(1.0, 0.0));
    let kept = dealias(&white)
        .coeffs()
        .iter()
        .filter(|c| c.norm() > 0.0)
        .count();
    assert_eq!(kept, 2 * (48 / 3) + 1);
}

#[test]
fn cosine_invariant_closed_form() {
    let l = 64.0;
    let g = Grid::new(64, l).unwrap();
    let u = gevrey_bbm::spectral::sample(&g, |x| (2.0 * PI * x / l).cos());
    let k = 2.0 * PI / l;
    let expected = l / 2.0 + k * k * l / 2.0;
    assert!((h1_invariant(&u) - expected).abs() < 1e-12 * expected);
}

#[test]
fn synthetic_spectrum_radius() {
    let g = Grid::new(1024, 64.0).unwrap();
    let f = SpectralField::from_half_spectrum(g, |_, xi| {
        Complex64::new((-0.5 * xi.abs()).exp() / (1.0 + xi * xi), 0.0)
    });
    let r = estimate_radius(&f, 0.0, f64::INFINITY, 1e-14).unwrap();
    assert!((r.sigma_est - 0.5).abs() < 0.01, "{}", r.sigma_est);
    assert!(r.r2 > 0.999);
}

#[test]
fn exponent_branches_meet_at_knee() {
    let e = fractional_bound_exponents(7.0 / 3.0).unwrap();
    assert!((e.beta - 2.0).abs() < 1e-15);
    assert!((e.mu - 0.5).abs() < 1e-15);
}

#[test]
fn semigroup_group_law() {
    let g = Grid::new(128, 64.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = gevrey_bbm::initial::random_band_limited(g, 6.0, &mut rng);
    for alpha in [2.0, 2.5, 3.0] {
        let two_steps = semigroup(&semigroup(&u, 1.7, alpha), -0.4, alpha);
        let one_step = semigroup(&u, 1.3, alpha);
        assert!(two_steps.sub(&one_step).l2_norm() < 1e-12 * u.l2_norm());
    }
}

#[test]
fn small_data_picard_agrees_with_rk4() {
    let g = Grid::new(256, 64.0).unwrap();
    let alpha = 2.0;
    let cal = Calibration::frozen(alpha).unwrap();
    let raw = InitialData::DEFAULT.sample(&g);
    let u0 = raw.scale(0.1 / i_norm(&raw, cal.sigma_ref, alpha));
    let weight = GevreyWeight::cosh(cal.sigma_ref, 0.5 * alpha);
    let delta = 0.5 * lifespan(&u0, &weight, alpha, cal.c1).unwrap();
    let opts = PicardOptions {
        tol: 1e-10,
        max_iter: 200,
        nodes: 64,
    };
    let (traj, diag) = picard_solve(&u0, delta, alpha, &weight, &opts).unwrap();
    assert!(
        diag.contraction_factor <= 0.5,
        "{}",
        diag.contraction_factor
    );
    let steps = 2000;
    let params = ModelParams::new(alpha, g, delta / steps as f64, delta).unwrap();
    let rk = simulate(&u0, &params, &weight, steps).unwrap();
    let gap = hs_norm(&traj.final_state().sub(rk.final_state()), 1.0);
    assert!(gap < 1e-5, "{gap}");
}

#[test]
fn solitary_wave_persists() {
    // u = 3(c-1) sech²(κx), κ = ½√((c-1)/c), travels at speed c.
    let c: f64 = 1.3;
    let kappa = 0.5 * ((c - 1.0) / c).sqrt();
    let g = Grid::new(256, 64.0).unwrap();
    let u0 = InitialData::Sech2 {
        amplitude: 3.0 * (c - 1.0),
        width: 1.0 / kappa,
    }
    .sample(&g);
    let params = ModelParams::new(2.0, g, 0.01, 50.0).unwrap();
    let traj = simulate(&u0, &params, &GevreyWeight::cosh(0.0, 1.0), 500).unwrap();
    let h0 = traj.norms[0].h1;
    for (t, (n, s)) in traj.times.iter().zip(traj.norms.iter().zip(&traj.states)) {
        assert!((n.h1 - h0).abs() < 0.05 * h0, "t = {t}");
        let peak = inverse_transform(s)
            .unwrap()
            .into_iter()
            .fold(f64::MIN, f64::max);
        assert!((peak - 3.0 * (c - 1.0)).abs() < 0.02, "t = {t}: {peak}");
    }
}
