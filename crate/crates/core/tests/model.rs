use std::f64::consts::PI;

use mdflow::model::{case1, case2, parse_case_config, write_case_config, Case1Variant};

/// ∫ kS over the disc of radius r1 for the decaying profile, in closed form:
/// 2π√kt0 [r0²/2 + a0 (F(r1) − F(r0))], F the antiderivative of √(r1² − r²).
fn support_integral_exact(kt0: f64, r0: f64, r1: f64) -> f64 {
    if r0 == r1 {
        return PI * r1 * r1 * kt0.sqrt();
    }
    let a0 = r0 / (r1 * r1 - r0 * r0).sqrt();
    let f = |r: f64| 0.5 * r * (r1 * r1 - r * r).max(0.0).sqrt() + 0.5 * r1 * r1 * (r / r1).asin();
    2.0 * PI * kt0.sqrt() * (0.5 * r0 * r0 + a0 * (f(r1) - f(r0)))
}

#[test]
fn support_integrals_converge_to_closed_form() {
    for (variant, r0, bound) in [(Case1Variant::A, 0.1, 1e-3), (Case1Variant::B, 0.2, 1e-2)] {
        let exact = support_integral_exact(1.0, r0, 0.2);
        let errs: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&m| {
                let p = case1(variant).discretize(m, 4).unwrap();
                ((p.coefficients.supports[0].total() - exact) / exact).abs()
            })
            .collect();
        // Gauss points on cut cells see a kink (A) or a jump (B) at r1, so
        // the error is erratic rather than monotone
        assert!(errs.iter().all(|&e| e < bound), "{variant:?}: {errs:?}");
        assert!(errs[3].max(errs[2]) < errs[0], "{variant:?}: {errs:?}");
    }
}

#[test]
fn decaying_profile_integral_matches_quadrature() {
    // radial Simpson on the profile itself, independent of the grid
    let (kt0, r0, r1) = (2.0f64, 0.1, 0.25);
    let prof = mdflow::geom::TransferProfile::new(kt0, r0, r1).unwrap();
    let n = 200_000;
    let h = r1 / n as f64;
    let g = |r: f64| 2.0 * PI * r * prof.transfer(r).sqrt();
    let mut s = g(0.0) + g(r1);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    let simpson = s * h / 3.0;
    let exact = support_integral_exact(kt0, r0, r1);
    assert!(((simpson - exact) / exact).abs() < 1e-6, "{simpson} vs {exact}");
}

#[test]
fn builtin_cases_round_trip_through_config() {
    for spec in [case1(Case1Variant::A), case1(Case1Variant::B), case2()] {
        let text = write_case_config(&spec);
        let back = parse_case_config(&text).unwrap();
        assert_eq!(back, spec, "{}", spec.name);
        assert_eq!(write_case_config(&back), text);
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    let text = write_case_config(&case1(Case1Variant::A)).replace("kd = 1.0 1.0", "kd = 1.0 oops");
    let err = parse_case_config(&text).unwrap_err().to_string();
    assert!(err.contains("line"), "{err}");
}
