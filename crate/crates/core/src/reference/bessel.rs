//! Bessel functions by power series.
//!
//! Only small arguments occur in the radial reference, so the ascending
//! series is accurate and cheap. Public entry points reject arguments
//! outside `[0, 5]` and orders outside `(−2, 2)`.

use std::f64::consts::PI;

use crate::reference::ReferenceError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const MAX_ARGUMENT: f64 = 5.0;
pub const MAX_ORDER: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesselKind {
    J,
    Y,
    I,
}

fn is_integer(nu: f64) -> bool {
    nu == nu.round()
}

/// 1/Γ(a), zero at the poles.
fn rgamma(a: f64) -> f64 {
    if a <= 0.0 && is_integer(a) {
        0.0
    } else {
        1.0 / libm::tgamma(a)
    }
}

/// Σ_k s^k (x/2)^{2k+ν} / (k! Γ(k+ν+1)) with s = −1 (J) or +1 (I).
fn series(nu: f64, x: f64, sign: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else if nu > 0.0 || is_integer(nu) { 0.0 } else { f64::INFINITY };
    }
    let half = 0.5 * x;
    let q = sign * half * half;
    let lead = half.powf(nu);
    let mut sum = 0.0;
    // walk the terms by ratio once the Γ factor is finite
    let mut k = 0usize;
    while rgamma(k as f64 + nu + 1.0) == 0.0 {
        k += 1;
    }
    let mut term = q.powi(k as i32) * rgamma(k as f64 + nu + 1.0) / factorial(k);
    loop {
        sum += term;
        k += 1;
        term *= q / (k as f64 * (k as f64 + nu));
        if term.abs() <= 1e-18 * sum.abs() && k > 2 {
            break;
        }
        if k > 200 {
            break;
        }
    }
    lead * sum
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn jn_raw(nu: f64, x: f64) -> f64 {
    if nu < 0.0 && is_integer(nu) {
        let n = -nu;
        let s = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return s * series(n, x, -1.0);
    }
    series(nu, x, -1.0)
}

fn in_raw(nu: f64, x: f64) -> f64 {
    if nu < 0.0 && is_integer(nu) {
        return series(-nu, x, 1.0);
    }
    series(nu, x, 1.0)
}

/// Y_n for integer n ≥ 0 from the logarithmic series.
fn yn_integer(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut finite = 0.0;
    for k in 0..n {
        finite += factorial(n - k - 1) / factorial(k) * q.powi(k as i32);
    }
    finite *= -half.powi(-(n as i32)) / PI;
    let log_part = 2.0 / PI * half.ln() * jn_raw(n as f64, x);
    let psi = |m: usize| -EULER_GAMMA + (1..m).map(|i| 1.0 / i as f64).sum::<f64>();
    let mut tail = 0.0;
    let mut k = 0;
    loop {
        let t = (psi(k + 1) + psi(n + k + 1)) * (-q).powi(k as i32) / (factorial(k) * factorial(n + k));
        tail += t;
        k += 1;
        if (t.abs() <= 1e-18 * tail.abs() && k > 2) || k > 200 {
            break;
        }
    }
    finite + log_part - half.powi(n as i32) / PI * tail
}

fn yn_raw(nu: f64, x: f64) -> f64 {
    if is_integer(nu) {
        let n = nu.abs() as usize;
        let y = yn_integer(n, x);
        return if nu < 0.0 && n % 2 == 1 { -y } else { y };
    }
    let (s, c) = (nu * PI).sin_cos();
    (jn_raw(nu, x) * c - jn_raw(-nu, x)) / s
}

fn raw(kind: BesselKind, nu: f64, x: f64) -> f64 {
    match kind {
        BesselKind::J => jn_raw(nu, x),
        BesselKind::Y => yn_raw(nu, x),
        BesselKind::I => in_raw(nu, x),
    }
}

fn check(kind: BesselKind, nu: f64, x: f64) -> Result<(), ReferenceError> {
    if !(0.0..=MAX_ARGUMENT).contains(&x) || !(nu.abs() < MAX_ORDER) {
        return Err(ReferenceError::BesselDomain { nu, x });
    }
    let singular = x == 0.0 && (kind == BesselKind::Y || (nu < 0.0 && !is_integer(nu)));
    if singular {
        return Err(ReferenceError::BesselDomain { nu, x });
    }
    Ok(())
}

pub fn bessel(kind: BesselKind, nu: f64, x: f64) -> Result<f64, ReferenceError> {
    check(kind, nu, x)?;
    Ok(raw(kind, nu, x))
}

/// d/dx 𝒞_ν(x) = 𝒞_{ν−1}(x) − (ν/x) 𝒞_ν(x); valid for J, Y and I.
pub fn bessel_derivative(kind: BesselKind, nu: f64, x: f64) -> Result<f64, ReferenceError> {
    check(kind, nu, x)?;
    if x == 0.0 {
        // only J and I reach here; derivative of the leading term
        return Ok(if nu == 1.0 {
            0.5
        } else if nu == 0.0 || nu > 1.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(raw(kind, nu - 1.0, x) - nu / x * raw(kind, nu, x))
}

pub fn bessel_j(nu: f64, x: f64) -> Result<f64, ReferenceError> {
    bessel(BesselKind::J, nu, x)
}

pub fn bessel_y(nu: f64, x: f64) -> Result<f64, ReferenceError> {
    bessel(BesselKind::Y, nu, x)
}

pub fn bessel_i(nu: f64, x: f64) -> Result<f64, ReferenceError> {
    bessel(BesselKind::I, nu, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_terms() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn half_order_closed_forms() {
        for &x in &[0.05, 0.3, PI / 2.0, 2.7, 5.0] {
            let j = (2.0 / (PI * x)).sqrt() * x.sin();
            let jm = (2.0 / (PI * x)).sqrt() * x.cos();
            assert!((bessel_j(0.5, x).unwrap() - j).abs() < 1e-14, "x = {x}");
            assert!((bessel_j(-0.5, x).unwrap() - jm).abs() < 1e-14);
            // Y_{1/2} = −J_{−1/2}
            assert!((bessel_y(0.5, x).unwrap() + jm).abs() < 1e-13);
            let i = (2.0 / (PI * x)).sqrt() * x.sinh();
            assert!((bessel_i(0.5, x).unwrap() - i).abs() < 1e-13 * i.max(1.0));
        }
        assert!((bessel_j(0.5, PI / 2.0).unwrap() - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn tabulated_integer_orders() {
        // values from standard tables, 15 digits
        let cases = [
            (BesselKind::J, 0.0, 1.0, 0.765_197_686_557_966_6),
            (BesselKind::J, 1.0, 2.5, 0.497_094_102_464_274_1),
            (BesselKind::Y, 0.0, 1.0, 0.088_256_964_215_676_96),
            (BesselKind::Y, 1.0, 1.0, -0.781_212_821_300_288_7),
            (BesselKind::Y, 0.0, 5.0, -0.308_517_625_249_033_6),
            (BesselKind::I, 0.0, 1.0, 1.266_065_877_752_008_4),
            (BesselKind::I, 1.0, 5.0, 24.335_642_142_450_524),
        ];
        for (kind, nu, x, want) in cases {
            let got = bessel(kind, nu, x).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "{kind:?} {nu} {x}: {got} vs {want}");
        }
    }

    #[test]
    fn negative_integer_orders() {
        assert!((bessel_j(-1.0, 1.3).unwrap() + bessel_j(1.0, 1.3).unwrap()).abs() < 1e-16);
        assert!((bessel_i(-1.0, 1.3).unwrap() - bessel_i(1.0, 1.3).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn non_integer_y_approaches_integer() {
        let y = bessel_y(1.0 - 1e-7, 1.5).unwrap();
        assert!((y - bessel_y(1.0, 1.5).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for kind in [BesselKind::J, BesselKind::Y, BesselKind::I] {
            for &nu in &[-1.5, -0.3, 0.0, 0.115_470_053_837_925_15, 1.0, 1.7] {
                for &x in &[0.1, 0.9, 3.3] {
                    let h = 1e-3 * x;
                    let f = |t: f64| bessel(kind, nu, t).unwrap();
                    let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
                    let d = bessel_derivative(kind, nu, x).unwrap();
                    assert!((fd - d).abs() < 1e-8 * d.abs().max(1.0), "{kind:?} nu={nu} x={x}: {fd} vs {d}");
                }
            }
        }
    }

    #[test]
    fn wronskian() {
        for &nu in &[0.115_470_053_837_925_15, 0.5, 1.3, -0.7, 0.0, 1.0] {
            for &x in &[0.01, 0.2, 1.0, 4.5] {
                let w = bessel_j(nu, x).unwrap() * bessel_derivative(BesselKind::Y, nu, x).unwrap()
                    - bessel_derivative(BesselKind::J, nu, x).unwrap() * bessel_y(nu, x).unwrap();
                let want = 2.0 / (PI * x);
                assert!((w - want).abs() < 1e-10 * want, "nu={nu} x={x}: {w} vs {want}");
            }
        }
    }

    #[test]
    fn domain_checks() {
        assert!(bessel_y(0.3, 0.0).is_err());
        assert!(bessel_j(0.3, 6.0).is_err());
        assert!(bessel_j(2.5, 1.0).is_err());
        assert!(bessel_j(-0.5, 0.0).is_err());
        assert!(bessel_i(0.0, -1.0).is_err());
    }
}
