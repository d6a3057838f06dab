//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use mfa::builtin;
use mfa::diagnostics;
use mfa::measure;
use mfa::potential::{self, PotentialFamily, QtWeights};
use mfa::pressure;
use mfa::spectrum::{self, QGrid};
use mfa::system::SystemSpec;
use mfa::thermo::{self, SolveOpts};

const HD_CANTOR: f64 = 0.6309297535714574; // log 2 / log 3

fn binomial() -> (SystemSpec, PotentialFamily) {
    let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    let fam = PotentialFamily::measure_weights(&sys, &[0.3, 0.7], HD_CANTOR).unwrap();
    (sys, fam)
}

/// Closed-form oracle for the binomial benchmark temperature.
fn binomial_t(q: f64) -> f64 {
    (0.3f64.powf(q) + 0.7f64.powf(q)).ln() / 3.0f64.ln()
}

/// Closed-form oracle for `alpha(q) = -T'(q)` of the binomial benchmark.
fn binomial_alpha(q: f64) -> f64 {
    let (p1, p2) = (0.3f64, 0.7f64);
    let num = p1.powf(q) * p1.ln() + p2.powf(q) * p2.ln();
    let den = p1.powf(q) + p2.powf(q);
    -(num / den) / 3.0f64.ln()
}

fn report(n: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} - {detail}");
    assert!(ok, "criterion {n}: FAIL - {detail}");
}

#[test]
fn criterion_01_cantor_dimension() {
    let start = Instant::now();
    let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    let est = thermo::hausdorff_dimension(&sys).unwrap();
    let err = (est.value - HD_CANTOR).abs();
    let bracket = thermo::dimension_bracket(&sys, 1, 1 << 20).unwrap().unwrap();
    let width = bracket.1 - bracket.0;
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        err <= 1e-12 && width == 0.0 && elapsed < 1.0,
        &format!(
            "dim err {err:.2e} (tol 1e-12), level-1 bracket width {width:.2e}, {elapsed:.2}s (< 1s)"
        ),
    );
}

#[test]
fn criterion_02_two_ratio_dimension() {
    // oracle: scalar bisection on 2^-t + 4^-t = 1
    let f = |t: f64| 2.0f64.powf(-t) + 4.0f64.powf(-t) - 1.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let oracle = 0.5 * (a + b);
    let golden = ((1.0 + 5.0f64.sqrt()) / 2.0).ln() / 2.0f64.ln();
    assert!((oracle - golden).abs() < 1e-12, "oracle sanity");

    let sys = builtin::affine_cantor(&[0.5, 0.25]).unwrap();
    let est = thermo::hausdorff_dimension(&sys).unwrap();
    let err = (est.value - oracle).abs();
    report(2, err <= 1e-10, &format!("dim err {err:.2e} (tol 1e-10)"));
}

#[test]
fn criterion_03_binomial_temperature_grid() {
    let start = Instant::now();
    let (sys, fam) = binomial();
    let qs = QGrid::new(-5.0, 5.0, 101).unwrap().values();
    let mut worst = 0.0f64;
    let mut hint = None;
    for &q in &qs {
        let (t, _) = thermo::solve_pressure_root(&sys, &fam, q, hint, 32, 1e-10).unwrap();
        hint = Some(t);
        worst = worst.max((t - binomial_t(q)).abs());
    }
    // the named spot checks
    let t0 = thermo::solve_pressure_root(&sys, &fam, 0.0, None, 32, 1e-10).unwrap().0;
    let t1 = thermo::solve_pressure_root(&sys, &fam, 1.0, None, 32, 1e-10).unwrap().0;
    let t2 = thermo::solve_pressure_root(&sys, &fam, 2.0, None, 32, 1e-10).unwrap().0;
    let spots = (t0 - binomial_t(0.0)).abs().max(t1.abs()).max((t2 - binomial_t(2.0)).abs());
    let elapsed = start.elapsed().as_secs_f64();
    report(
        3,
        worst <= 1e-8 && spots <= 1e-8 && elapsed < 30.0,
        &format!(
            "max |T - closed form| {worst:.2e} over 101 q's (tol 1e-8), \
             T(0) = {t0:.7}, T(1) = {t1:.1e}, T(2) = {t2:.7}, {elapsed:.2}s (< 30s)"
        ),
    );
}

#[test]
fn criterion_04_binomial_spectrum_identities() {
    let (sys, fam) = binomial();
    let grid = QGrid::new(-5.0, 5.0, 101).unwrap();
    let curve = spectrum::spectrum_curve(&sys, &fam, grid, &SolveOpts::default());
    assert_eq!(curve.solved_points().count(), 101, "all points solved");

    let legendre = spectrum::legendre_check(&curve);
    let p0 = curve.solved_points().find(|p| p.q == 0.0).unwrap();
    let p1 = curve.solved_points().find(|p| p.q == 1.0).unwrap();
    let peak_err = (p0.f_value - HD_CANTOR).abs();
    let diag_err = (p1.f_value - p1.alpha_grad).abs();
    let alpha1_err = (p1.alpha_grad - binomial_alpha(1.0)).abs();
    let cross = curve
        .solved_points()
        .map(|p| (p.alpha_fd - p.alpha_grad).abs())
        .fold(0.0f64, f64::max);
    report(
        4,
        legendre <= 1e-6 && peak_err <= 1e-6 && diag_err <= 1e-6 && alpha1_err <= 1e-6
            && cross <= 1e-4,
        &format!(
            "legendre {legendre:.2e} (tol 1e-6), f(alpha(0))-HD {peak_err:.2e}, \
             f(alpha(1))-alpha(1) {diag_err:.2e}, alpha(1) err {alpha1_err:.2e}, \
             cross-estimator {cross:.2e} (tol 1e-4)"
        ),
    );
}

#[test]
fn criterion_05_cf_digits_bracket() {
    let start = Instant::now();
    let sys = builtin::cf_digits(&[1, 2]).unwrap();
    let fam = PotentialFamily::geometric(&sys, 1.0).unwrap();
    let d32 = thermo::solve_pressure_root(&sys, &fam, 0.0, None, 32, 1e-12).unwrap().0;
    let d48 = thermo::solve_pressure_root(&sys, &fam, 0.0, None, 48, 1e-12).unwrap().0;
    let stability = (d32 - d48).abs();
    let (lo, hi) = thermo::dimension_bracket(&sys, 16, 1 << 21).unwrap().unwrap();
    let width = hi - lo;
    let contained = lo <= d32 && d32 <= hi;
    let lit_err = (d32 - 0.53128).abs();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        5,
        stability <= 1e-8 && contained && width <= 0.03 && lit_err <= 5e-3 && elapsed < 60.0,
        &format!(
            "dim {d32:.10}, |M32-M48| {stability:.2e} (tol 1e-8), bracket [{lo:.5}, {hi:.5}] \
             width {width:.4} (<= 0.03), contained {contained}, vs 0.53128 err {lit_err:.2e}, \
             {elapsed:.1}s (< 60s)"
        ),
    );
}

#[test]
fn criterion_06_cf_truncation_dimensions() {
    let mut dims = Vec::new();
    for n in [5u32, 10, 20, 50] {
        let sys = builtin::cf_full(n).unwrap();
        dims.push(thermo::hausdorff_dimension(&sys).unwrap().value);
    }
    let increasing = dims.windows(2).all(|w| w[1] > w[0]);
    let below_one = dims.iter().all(|&d| d < 1.0);
    let last_big = dims[3] > 0.97;
    report(
        6,
        increasing && below_one && last_big,
        &format!(
            "dims N=5,10,20,50: {:.6}, {:.6}, {:.6}, {:.6}; increasing {increasing}, \
             all < 1 {below_one}, dim(50) > 0.97 {last_big}",
            dims[0], dims[1], dims[2], dims[3]
        ),
    );
}

#[test]
fn criterion_07_pressure_property_suite() {
    // two systems x two families
    let sys_a = builtin::cf_digits(&[1, 2]).unwrap();
    let sys_b = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    let cases: Vec<(SystemSpec, PotentialFamily)> = vec![
        (
            sys_a.clone(),
            PotentialFamily::geometric(&sys_a, 0.8).unwrap(),
        ),
        (
            sys_a.clone(),
            PotentialFamily::edge_constants(&sys_a, vec![-0.3, 0.2], 0.8).unwrap(),
        ),
        (
            sys_b.clone(),
            PotentialFamily::measure_weights(&sys_b, &[0.3, 0.7], HD_CANTOR).unwrap(),
        ),
        (
            sys_b.clone(),
            PotentialFamily::geometric(&sys_b, HD_CANTOR).unwrap(),
        ),
    ];
    let mut all_ok = true;
    let mut details = Vec::new();
    for (k, (sys, fam)) in cases.iter().enumerate() {
        let theta = sys.finiteness_parameter();
        let geo = PotentialFamily::geometric(sys, fam.u().max(theta + 0.5)).unwrap();
        let mut min_drop = f64::INFINITY;
        let mut min_second = f64::INFINITY;
        let mut max_press_violation = f64::NEG_INFINITY;
        for &q in &[-1.5, 0.0, 1.0, 2.5] {
            let tmin = theta - q * fam.u() + 0.15;
            for k2 in 0..6 {
                let t = tmin + 0.2 * k2 as f64;
                let p = |tt: f64| {
                    pressure::pressure_collocation(sys, fam, q, tt, 32)
                        .unwrap()
                        .value
                };
                // strict decrease in t
                min_drop = min_drop.min(p(t) - p(t + 0.1));
                // convexity in t: central second difference
                let h = 0.05;
                min_second = min_second.min(p(t + h) - 2.0 * p(t) + p(t - h));
                // |P(q,t) - P((qu+t) Log)| <= |q| ||Psi||
                let exponent = q * fam.u() + t;
                let p_geo = pressure::pressure_collocation(sys, &geo, 0.0, exponent, 32)
                    .unwrap()
                    .value;
                let gap = (p(t) - p_geo).abs() - q.abs() * fam.eff_sup_norm();
                max_press_violation = max_press_violation.max(gap);
            }
        }
        let guard_rejected = QtWeights::new(sys, fam, 0.0, theta).is_err()
            && QtWeights::new(sys, fam, 1.0, theta - fam.u() - 0.1).is_err();
        let ok = min_drop > 1e-6 && min_second >= -1e-8 && max_press_violation <= 1e-8
            && guard_rejected;
        all_ok &= ok;
        details.push(format!(
            "case {k}: drop {min_drop:.2e}, second diff {min_second:.2e}, \
             press-ineq slack {max_press_violation:.2e}, guard {guard_rejected}"
        ));
    }
    report(7, all_ok, &details.join("; "));
}

#[test]
fn criterion_08_degenerate_family() {
    let sys = builtin::affine_cantor(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    let fam = PotentialFamily::geometric(&sys, HD_CANTOR).unwrap();
    let grid = QGrid::new(-5.0, 5.0, 21).unwrap();
    let curve = spectrum::spectrum_curve(&sys, &fam, grid, &SolveOpts::default());
    let mut max_t_err = 0.0f64;
    let mut max_alpha_err = 0.0f64;
    for p in curve.solved_points() {
        max_t_err = max_t_err.max((p.t - HD_CANTOR * (1.0 - p.q)).abs());
        max_alpha_err = max_alpha_err.max((p.alpha_grad - HD_CANTOR).abs());
    }
    let pts: Vec<f64> = curve.solved_points().map(|p| p.t).collect();
    let max_second = pts
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
        .fold(0.0f64, f64::max);
    report(
        8,
        max_t_err <= 1e-8 && max_second <= 1e-8 && max_alpha_err <= 1e-6,
        &format!(
            "|T - HD(1-q)| {max_t_err:.2e} (tol 1e-8), |T''| {max_second:.2e} (tol 1e-8), \
             |alpha - HD| {max_alpha_err:.2e}"
        ),
    );
}

#[test]
fn criterion_09_concentration() {
    let start = Instant::now();
    let (sys, fam) = binomial();
    let mut fractions = Vec::new();
    let mut ok = true;
    for &q in &[0.0, 1.0, 2.0] {
        let rep =
            measure::concentration_test(&sys, &fam, q, 200, 14, 42, 0.1, 1 << 22).unwrap();
        ok &= rep.fraction_in_band >= 0.9;
        fractions.push(format!(
            "q={q}: {:.3} (alpha {:.4})",
            rep.fraction_in_band, rep.alpha
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 120.0;
    report(
        9,
        ok,
        &format!(
            "fractions in band 0.1 (need >= 0.9): {}; {elapsed:.1}s (< 120s)",
            fractions.join(", ")
        ),
    );
}

#[test]
fn criterion_10_diagnostics() {
    let no_one = builtin::cf_no_one(50, -0.25).unwrap();
    let full = builtin::cf_full(50).unwrap();
    let gap_no_one = diagnostics::check_bsc(&no_one).unwrap();
    let gap_full = diagnostics::check_bsc(&full).unwrap();
    let gap_err = (gap_no_one - 5.0 / 28.0).abs();
    let cof_no_one = diagnostics::check_cofinite_regularity(&no_one);
    let cof_full = diagnostics::check_cofinite_regularity(&full);
    let prim = diagnostics::check_finitely_primitive(&full, 4);
    let ok = gap_err <= 1e-15
        && gap_full == 0.0
        && cof_no_one.as_str() == "yes"
        && cof_full.as_str() == "yes"
        && prim.primitive
        && prim.witness_length == Some(0);
    report(
        10,
        ok,
        &format!(
            "bsc gap(no-one) = {gap_no_one} (5/28 err {gap_err:.1e}), gap(full) = {gap_full}, \
             cofinitely regular: {}/{}, primitive p = {:?}",
            cof_no_one.as_str(),
            cof_full.as_str(),
            prim.witness_length
        ),
    );
}

/// Normalization defect bound from bounded variation (supporting check used
/// by the measures module contract).
#[test]
fn measure_defect_bounded_by_distortion() {
    let sys = builtin::cf_digits(&[1, 2]).unwrap();
    let dim = thermo::hausdorff_dimension(&sys).unwrap().value;
    let fam = PotentialFamily::geometric(&sys, dim).unwrap();
    let normalized = potential::normalize(&sys, &fam, 1e-9).unwrap();
    let model = measure::cylinder_weights(
        &sys,
        &normalized,
        measure::MeasureContext::Base,
        6,
        1 << 20,
    )
    .unwrap();
    let k = diagnostics::estimate_distortion_constant(&sys).unwrap();
    let bound = k.powf(normalized.u()) - 1.0;
    assert!(
        model.defect <= bound,
        "defect {} exceeds distortion bound {bound}",
        model.defect
    );
}
