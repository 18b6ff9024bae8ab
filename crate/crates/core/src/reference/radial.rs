//! Radially symmetric solution for one terminal at the centre of a disc
//! with an annular source.
//!
//! Regions: S1 `r ≤ r0` (constant transfer), S2 `r0 < r ≤ r1` (decaying
//! transfer), S3 `r1 < r ≤ r2` (no transfer, no source), S4 `r2 < r ≤ r3`
//! (source), S5 `r > r3` (at rest). Interface radii belong to the inner region.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};

use crate::model::RadialParams;
use crate::quadrature::composite_gauss;
use crate::reference::bessel::{bessel, BesselKind};
use crate::reference::ReferenceError;

/// Network flux from volume balance: −2π ∫ r rD(r) dr over the annulus.
pub fn volume_balance_qn(p: &RadialParams) -> f64 {
    let (r2, r3) = (p.r2, p.r3);
    -2.0 * PI * p.rd0 * ((r3.powi(4) - r2.powi(4)) / 12.0 - r2 * r3 * (r3 * r3 - r2 * r2) / 6.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialSolution {
    pub params: RadialParams,
    pub kappa0: f64,
    /// a0; infinite when r0 = r1.
    pub a0: f64,
    pub kappa1: f64,
    /// Order ν = κ1 r1 of the S2 Bessel functions.
    pub nu: f64,
    pub qn: f64,
    /// Terminal node pressure.
    pub pn1: f64,
    pub c_i: f64,
    pub c_j: f64,
    pub c_y: f64,
    pub c4: f64,
    pub p_r1: f64,
    pub p_r2: f64,
    pub p_r3: f64,
    /// 2-norm condition number of the constants system (1 for r0 = r1).
    pub condition: f64,
}

fn b(kind: BesselKind, nu: f64, x: f64) -> f64 {
    bessel(kind, nu, x).expect("arguments checked by solve_constants")
}

/// C'_ν(κ1 r) = C_{ν−1}(z) − (r1/r) C_ν(z) with z = κ1 r.
fn s2_derivative(kind: BesselKind, nu: f64, z: f64, ratio: f64) -> f64 {
    b(kind, nu - 1.0, z) - ratio * b(kind, nu, z)
}

pub fn solve_constants(p: &RadialParams) -> Result<RadialSolution, ReferenceError> {
    p.validate().map_err(|e| ReferenceError::Params(e.to_string()))?;
    let kappa0 = (p.kt0 / p.kd).sqrt();
    let qn = volume_balance_qn(p);
    let pn1 = p.pn0 - qn / p.kn;
    let c4 = p.rd0 / p.kd * (p.r3.powi(4) / 12.0 - p.r2 * p.r3.powi(3) / 6.0);
    let in_box = |x: f64| x <= crate::reference::bessel::MAX_ARGUMENT;
    if !in_box(kappa0 * p.r1) {
        return Err(ReferenceError::BesselDomain { nu: 0.0, x: kappa0 * p.r1 });
    }

    let (a0, kappa1, nu, c_i, c_j, c_y, u_r1, condition);
    if p.r0 == p.r1 {
        a0 = f64::INFINITY;
        kappa1 = f64::NAN;
        nu = f64::NAN;
        c_i = -qn / (2.0 * PI * p.r1 * p.kd * kappa0 * b(BesselKind::I, 1.0, kappa0 * p.r1));
        c_j = 0.0;
        c_y = 0.0;
        u_r1 = c_i * b(BesselKind::I, 0.0, kappa0 * p.r1);
        condition = 1.0;
    } else {
        a0 = p.r0 / (p.r1 * p.r1 - p.r0 * p.r0).sqrt();
        kappa1 = a0 * kappa0;
        nu = kappa1 * p.r1;
        if !(nu < crate::reference::bessel::MAX_ORDER) || !in_box(kappa1 * p.r1) {
            return Err(ReferenceError::BesselDomain { nu, x: kappa1 * p.r1 });
        }
        let (z0, z1) = (kappa1 * p.r0, kappa1 * p.r1);
        let ratio0 = p.r1 / p.r0;
        use BesselKind::{I, J, Y};
        #[rustfmt::skip]
        let m = Matrix3::new(
            b(I, 0.0, kappa0 * p.r0), -b(J, nu, z0), -b(Y, nu, z0),
            kappa0 * b(I, 1.0, kappa0 * p.r0), -kappa1 * s2_derivative(J, nu, z0, ratio0), -kappa1 * s2_derivative(Y, nu, z0, ratio0),
            0.0, -p.kd * kappa1 * s2_derivative(J, nu, z1, 1.0), -p.kd * kappa1 * s2_derivative(Y, nu, z1, 1.0),
        );
        let rhs = Vector3::new(0.0, 0.0, qn / (2.0 * PI * p.r1));
        let sv = m.singular_values();
        let smin = sv.min();
        condition = if smin > 0.0 { sv.max() / smin } else { f64::INFINITY };
        if !condition.is_finite() || condition > 1e14 {
            return Err(ReferenceError::Singular { condition });
        }
        let c = m.lu().solve(&rhs).ok_or(ReferenceError::Singular { condition })?;
        c_i = c[0];
        c_j = c[1];
        c_y = c[2];
        u_r1 = c_j * b(J, nu, z1) + c_y * b(Y, nu, z1);
    }
    let p_r1 = pn1 + u_r1;
    let p_r2 = p_r1 - qn / (2.0 * PI * p.kd) * (p.r2 / p.r1).ln();
    let mut sol = RadialSolution {
        params: *p,
        kappa0,
        a0,
        kappa1,
        nu,
        qn,
        pn1,
        c_i,
        c_j,
        c_y,
        c4,
        p_r1,
        p_r2,
        p_r3: 0.0,
        condition,
    };
    sol.p_r3 = sol.formula(4, p.r3).0;
    Ok(sol)
}

impl RadialSolution {
    /// Region (1-based) containing `r`.
    pub fn region(&self, r: f64) -> usize {
        let p = &self.params;
        if r <= p.r0 {
            1
        } else if r <= p.r1 {
            2
        } else if r <= p.r2 {
            3
        } else if r <= p.r3 {
            4
        } else {
            5
        }
    }

    /// Pressure and outward radial flux at radius `r`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        self.formula(self.region(r), r)
    }

    pub fn pressure(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// The closed form of region `k` at `r`, whether or not `r` lies in it.
    pub fn formula(&self, k: usize, r: f64) -> (f64, f64) {
        let p = &self.params;
        match k {
            1 => {
                let z = self.kappa0 * r;
                let u = self.c_i * b(BesselKind::I, 0.0, z);
                (self.pn1 + u, -p.kd * self.c_i * self.kappa0 * b(BesselKind::I, 1.0, z))
            }
            2 => {
                let z = self.kappa1 * r;
                let ratio = p.r1 / r;
                let u = self.c_j * b(BesselKind::J, self.nu, z) + self.c_y * b(BesselKind::Y, self.nu, z);
                let du = self.kappa1
                    * (self.c_j * s2_derivative(BesselKind::J, self.nu, z, ratio)
                        + self.c_y * s2_derivative(BesselKind::Y, self.nu, z, ratio));
                (self.pn1 + u, -p.kd * du)
            }
            3 => (self.p_r1 - self.qn / (2.0 * PI * p.kd) * (r / p.r1).ln(), self.qn / (2.0 * PI * r)),
            4 => {
                let (r2, r3) = (p.r2, p.r3);
                let pressure = self.p_r2
                    + self.c4 * (r / r2).ln()
                    + p.rd0 / p.kd
                        * ((r.powi(4) - r2.powi(4)) / 16.0 - (r2 + r3) * (r.powi(3) - r2.powi(3)) / 9.0
                            + r2 * r3 * (r * r - r2 * r2) / 4.0);
                let q = -p.kd * self.c4 / r - p.rd0 * (r.powi(3) / 4.0 - (r3 + r2) * r * r / 3.0 + r2 * r3 * r / 2.0);
                (pressure, q)
            }
            _ => (self.p_r3, 0.0),
        }
    }

    /// Transfer coefficient kT at radius `r`.
    pub fn transfer(&self, r: f64) -> f64 {
        let p = &self.params;
        if r <= p.r0 {
            p.kt0
        } else if r <= p.r1 {
            p.kt0 * self.a0 * self.a0 * (p.r1 * p.r1 - r * r) / (r * r)
        } else {
            0.0
        }
    }

    pub fn source(&self, r: f64) -> f64 {
        let p = &self.params;
        p.rd0 * (r - p.r2).max(0.0) * (p.r3 - r).max(0.0)
    }

    /// Relative pressure and flux jumps `(radius, Δp, Δq)` at every interface.
    ///
    /// Jumps are scaled by the largest pressure and flux magnitude on the profile.
    pub fn interface_jumps(&self) -> Vec<(f64, f64, f64)> {
        let p = &self.params;
        let mut pairs = Vec::new();
        if p.r0 < p.r1 {
            pairs.push((p.r0, 1, 2));
            pairs.push((p.r1, 2, 3));
        } else {
            pairs.push((p.r1, 1, 3));
        }
        pairs.push((p.r2, 3, 4));
        pairs.push((p.r3, 4, 5));
        let pscale = [self.pn1, self.p_r1, self.p_r2, self.p_r3].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let qscale = (self.qn / (2.0 * PI * p.r1)).abs();
        pairs
            .into_iter()
            .map(|(r, a, c)| {
                let (pa, qa) = self.formula(a, r);
                let (pc, qc) = self.formula(c, r);
                (r, (pa - pc).abs() / pscale, (qa - qc).abs() / qscale)
            })
            .collect()
    }

    /// Residuals of the three equations fixing c_I, c_J, c_Y.
    pub fn constraint_residuals(&self) -> [f64; 3] {
        let p = &self.params;
        let target = self.qn / (2.0 * PI * p.r1);
        if p.r0 == p.r1 {
            return [0.0, 0.0, self.formula(1, p.r1).1 - target];
        }
        let (pa, qa) = self.formula(1, p.r0);
        let (pb, qb) = self.formula(2, p.r0);
        [pa - pb, qa - qb, self.formula(2, p.r1).1 - target]
    }

    /// Largest residual of `−kD (p'' + p'/r) + kT (p − pN1) − rD` over the
    /// sample radii, derivatives from 5-point central differences with `step`.
    pub fn ode_residual_check(&self, radii: &[f64], step: f64) -> f64 {
        let kd = self.params.kd;
        radii
            .iter()
            .map(|&r| {
                let h = step;
                let f = |x: f64| self.pressure(x);
                let (fm2, fm1, f0, fp1, fp2) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
                let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
                let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
                (-kd * (d2 + d1 / r) + self.transfer(r) * (f0 - self.pn1) - self.source(r)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// 2π ∫₀^{r1} kT (pD − pN1) r dr by composite Gauss quadrature; equals −qN.
    pub fn transfer_balance(&self) -> f64 {
        let p = &self.params;
        let integrand = |r: f64| self.transfer(r) * (self.pressure(r) - self.pn1) * r;
        let mut total = composite_gauss(0.0, p.r0, 64, 8, integrand);
        if p.r1 > p.r0 {
            total += composite_gauss(p.r0, p.r1, 64, 8, integrand);
        }
        2.0 * PI * total
    }

    /// `r,pD,q_r` rows on `samples` equispaced radii in `(0, r_max]`.
    pub fn profile_csv(&self, samples: usize, r_max: f64) -> String {
        let mut out = String::from("r,pD,q_r\n");
        for k in 1..=samples {
            let r = r_max * k as f64 / samples as f64;
            let (pd, q) = self.eval(r);
            writeln!(out, "{r:.12e},{pd:.16e},{q:.16e}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(r0: f64) -> RadialParams {
        RadialParams { r0, r1: 0.2, r2: 0.3, r3: 0.4, kt0: 1.0, kd: 1.0, kn: 1.0, rd0: 1.0, pn0: 0.0 }
    }

    #[test]
    fn volume_balance_values() {
        let p = case(0.1);
        let q = volume_balance_qn(&p);
        assert!((q - -3.665_191_429_188_07e-4).abs() < 1e-18);
        // quadrature oracle of −2π ∫ r rD dr
        let quad = -2.0 * PI * composite_gauss(p.r2, p.r3, 16, 6, |r| r * (r - p.r2) * (p.r3 - r));
        assert!((q - quad).abs() < 1e-17);
        assert_eq!(volume_balance_qn(&RadialParams { r2: 0.4, ..p }), 0.0);
        let scaled = volume_balance_qn(&RadialParams { rd0: 3.0, ..p });
        assert!((scaled - 3.0 * q).abs() < 1e-18);
    }

    #[test]
    fn c4_value_and_zero_outer_flux() {
        let s = solve_constants(&case(0.1)).unwrap();
        assert!((s.c4 - -1.066_666_666_666_666_7e-3).abs() < 1e-17);
        assert!(s.eval(0.4).1.abs() < 1e-16);
        assert_eq!(s.eval(0.45), (s.p_r3, 0.0));
    }

    #[test]
    fn constraints_and_continuity() {
        for r0 in [0.1, 0.2, 0.15] {
            let s = solve_constants(&case(r0)).unwrap();
            let scale = s.qn.abs();
            for res in s.constraint_residuals() {
                assert!(res.abs() <= 1e-12 * scale.max(s.pn1.abs()), "r0 = {r0}: {res}");
            }
            for (r, dp, dq) in s.interface_jumps() {
                assert!(dp <= 1e-12 && dq <= 1e-12, "r0 = {r0}, jump at {r}: {dp} {dq}");
            }
        }
    }

    #[test]
    fn special_case_formula() {
        let s = solve_constants(&case(0.2)).unwrap();
        let want = -s.qn / (2.0 * PI * 0.2 * 1.0 * 1.0 * bessel(BesselKind::I, 1.0, 0.2).unwrap());
        assert_eq!(s.c_i, want);
    }

    #[test]
    fn near_indicator_limit() {
        // the order ν = κ1 r1 grows like (r1 − r0)^{-1/2}; stay inside the series box
        let limit = solve_constants(&case(0.2)).unwrap();
        let mut last = f64::INFINITY;
        for delta in [0.1, 0.05, 0.02, 0.01] {
            let near = solve_constants(&case(0.2 * (1.0 - delta))).unwrap();
            let gap = (near.c_i - limit.c_i).abs() / limit.c_i.abs();
            assert!(gap < last, "delta = {delta}: {gap}");
            last = gap;
        }
        assert!(last < 0.05, "{last}");
    }

    #[test]
    fn region_three_flux() {
        let s = solve_constants(&case(0.1)).unwrap();
        for r in [0.21, 0.25, 0.3] {
            assert!((s.eval(r).1 - s.qn / (2.0 * PI * r)).abs() < 1e-18);
        }
        assert_eq!(s.region(0.1), 1);
        assert_eq!(s.region(0.2), 2);
        assert_eq!(s.region(0.3), 3);
    }

    #[test]
    fn ode_residual_small() {
        let s = solve_constants(&case(0.1)).unwrap();
        let avoid = [0.1, 0.2, 0.3, 0.4];
        let mut radii = Vec::new();
        let mut k = 0;
        while radii.len() < 50 {
            let r = 0.005 + 0.009 * k as f64;
            k += 1;
            if avoid.iter().all(|a: &f64| (r - a).abs() > 1e-3) {
                radii.push(r);
            }
        }
        assert!(s.ode_residual_check(&radii, 1e-4) <= 1e-6);
        // S3 is harmonic and S5 constant
        assert!(s.ode_residual_check(&[0.22, 0.27], 1e-4) <= 1e-8);
        assert!(s.ode_residual_check(&[0.45], 1e-4) < 1e-8);
    }

    #[test]
    fn transfer_balance_matches_network_flux() {
        for r0 in [0.1, 0.2] {
            let s = solve_constants(&case(r0)).unwrap();
            assert!((s.transfer_balance() + s.qn).abs() <= 1e-8 * s.qn.abs(), "r0 = {r0}");
        }
    }

    #[test]
    fn terminal_pressure_from_poiseuille() {
        let s = solve_constants(&RadialParams { kn: 4.0, pn0: 0.5, ..case(0.1) }).unwrap();
        assert!((s.pn1 - (0.5 - s.qn / 4.0)).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(matches!(solve_constants(&case(0.3)), Err(ReferenceError::Params(_))));
    }
}
