//! Overflow-safe special-function kernels.
//!
//! Hermite functions are always produced in orthonormal form with the Gaussian
//! weight folded in, and Laguerre polynomials always come multiplied by their
//! natural exponential prefactor. The recurrences carry a separate log-scale so
//! no intermediate state overflows for level indices up to [`MAX_LEVEL`].

use std::f64::consts::{FRAC_1_PI, PI};

use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};

/// Largest level index accepted by the Hermite and Laguerre kernels.
pub const MAX_LEVEL: usize = 10_000;

/// Largest argument accepted by the Bessel kernels. The ascending series
/// loses digits to cancellation as `z` grows, and past this point the
/// near-integer `Y` no longer meets the `1e-10` Wronskian tolerance.
pub const MAX_BESSEL_ARG: f64 = 6.0;

/// Largest order magnitude accepted by the Bessel kernels.
pub const MAX_BESSEL_ORDER: f64 = 50.0;

const RESCALE: f64 = 1e150;
const LN_RESCALE: f64 = 345.387_763_949_106_8;

fn check_level(n: usize) -> Result<()> {
    if n > MAX_LEVEL {
        return Err(Error::Capacity {
            what: "level index",
            value: n,
            cap: MAX_LEVEL,
        });
    }
    Ok(())
}

#[inline]
fn scaled(value: f64, log_scale: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    value.signum() * (log_scale + value.abs().ln()).exp()
}

/// Orthonormal Hermite functions `H_k(t) e^{-t²/2} / sqrt(2^k k! sqrt(pi))`
/// for `k = 0..=n_max`.
pub fn hermite_functions(n_max: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    hermite_functions_into(n_max, t, &mut out);
    out
}

/// Same as [`hermite_functions`] but reuses the caller's buffer.
pub fn hermite_functions_into(n_max: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut log_scale = -0.5 * t * t;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    out.push(scaled(cur, log_scale));
    for k in 0..n_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        }
        out.push(scaled(cur, log_scale));
    }
}

/// Orthonormal Hermite function of order `n` at `t`.
pub fn hermite_scaled(n: usize, t: f64) -> Result<f64> {
    check_level(n)?;
    let mut buf = Vec::with_capacity(n + 1);
    hermite_functions_into(n, t, &mut buf);
    Ok(buf[n])
}

/// `e^{-w/h} L_n^k(2w/h)` together with the inputs that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledLaguerreProduct {
    pub n: usize,
    pub k: usize,
    pub w: f64,
    pub h: f64,
    pub value: f64,
}

/// Values of `e^{-x/2} L_j^k(x)` for `j = 0..=n_max`.
pub fn laguerre_row(n_max: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let base = -0.5 * x;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = 0.0;
    let mut prev = 1.0;
    out.push(base.exp());
    if n_max == 0 {
        return out;
    }
    let mut cur = kf + 1.0 - x;
    out.push(scaled(cur, base));
    for j in 1..n_max {
        let jf = j as f64;
        let next = ((2.0 * jf + kf + 1.0 - x) * cur - (jf + kf) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += LN_RESCALE;
        }
        out.push(scaled(cur, base + log_scale));
    }
    out
}

/// `e^{-w/h} L_n^k(2w/h)` evaluated without overflow.
pub fn laguerre_scaled(n: usize, k: usize, w: f64, h: f64) -> Result<ScaledLaguerreProduct> {
    check_level(n)?;
    check_level(k)?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(domain(format!("area parameter w must be positive, got {w}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(domain(format!("h must be positive, got {h}")));
    }
    let value = laguerre_row(n, k, 2.0 * w / h)[n];
    Ok(ScaledLaguerreProduct { n, k, w, h, value })
}

/// Normal density of width `gamma_w` in level index, centred on `E/2h`.
/// Realizes one tooth of the broadened Landau comb.
pub fn gaussian_comb(n: i64, energy: f64, h: f64, gamma_w: f64) -> f64 {
    let d = n as f64 - energy / (2.0 * h);
    (2.0 * PI * gamma_w * gamma_w).sqrt().recip() * (-d * d / (2.0 * gamma_w * gamma_w)).exp()
}

/// `sin(pi x)` with exact argument reduction.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `cos(pi x)` with exact argument reduction.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// `1/Gamma(x)`, zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return 0.0;
    }
    if x >= 0.5 {
        1.0 / gamma(x)
    } else {
        sin_pi(x) * gamma(1.0 - x) * FRAC_1_PI
    }
}

/// First- and second-kind Bessel values of one real order at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselPair {
    pub nu: f64,
    pub z: f64,
    pub j: f64,
    pub y: f64,
}

fn check_bessel(nu: f64, z: f64) -> Result<()> {
    if !(z > 0.0) {
        return Err(domain(format!("Bessel argument must be positive, got {z}")));
    }
    if z > MAX_BESSEL_ARG {
        return Err(domain(format!(
            "Bessel argument {z} above the series range {MAX_BESSEL_ARG}"
        )));
    }
    if !(nu.abs() <= MAX_BESSEL_ORDER) {
        return Err(domain(format!("Bessel order {nu} outside [-50, 50]")));
    }
    Ok(())
}

fn j_series(nu: f64, z: f64) -> f64 {
    if nu < 0.0 && nu == nu.round() {
        let m = -nu;
        let sign = if (m as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return sign * j_series(m, z);
    }
    let half = 0.5 * z;
    let q = -half * half;
    let mut term = half.powf(nu) * recip_gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..600 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if kf + nu > 0.0 && term.abs() < 1e-18 * sum.abs() && q.abs() < kf * (kf + nu) {
            break;
        }
    }
    sum
}

fn y_reflection(nu: f64, z: f64) -> f64 {
    (j_series(nu, z) * cos_pi(nu) - j_series(-nu, z)) / sin_pi(nu)
}

/// Bessel function of the first kind from the ascending series.
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    check_bessel(nu, z)?;
    Ok(j_series(nu, z))
}

/// Half-width of the window around integer orders where `Y` is interpolated
/// instead of taken from the reflection formula.
pub const NEAR_INTEGER_WINDOW: f64 = 5e-4;

fn y_near_integer(nu: f64, z: f64) -> f64 {
    let m = nu.round();
    let d = NEAR_INTEGER_WINDOW;
    let nodes = [-2.0, -1.0, 1.0, 2.0];
    let values = nodes.map(|k| y_reflection(m + k * d, z));
    let t = (nu - m) / d;
    // cubic Lagrange interpolation in units of d; at t = 0 this is the
    // symmetric mean with its d² term removed
    let mut y = 0.0;
    for (i, &xi) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                w *= (t - xj) / (xi - xj);
            }
        }
        y += w * values[i];
    }
    y
}

/// `J_nu(z)` and `Y_nu(z)`.
pub fn bessel_jy(nu: f64, z: f64) -> Result<BesselPair> {
    check_bessel(nu, z)?;
    let j = j_series(nu, z);
    let y = if (nu - nu.round()).abs() < NEAR_INTEGER_WINDOW {
        y_near_integer(nu, z)
    } else {
        y_reflection(nu, z)
    };
    Ok(BesselPair { nu, z, j, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermite_poly(n: usize, t: f64) -> f64 {
        let (mut a, mut b) = (1.0, 2.0 * t);
        if n == 0 {
            return a;
        }
        for k in 1..n {
            let c = 2.0 * t * b - 2.0 * k as f64 * a;
            a = b;
            b = c;
        }
        b
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn hermite_examples() {
        assert!((hermite_scaled(0, 0.0).unwrap() - PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(hermite_scaled(3, 0.0).unwrap(), 0.0);
        // 40 e^{-2} / sqrt(3! 2^3 sqrt(pi))
        assert!((hermite_scaled(3, 2.0).unwrap() - 0.5868984204285561).abs() < 1e-14);
    }

    #[test]
    fn hermite_matches_plain_polynomials() {
        for n in 0..25 {
            for &t in &[-3.1, -0.4, 0.0, 0.9, 2.5, 4.0] {
                let direct = hermite_poly(n, t) * (-0.5 * t * t).exp()
                    / (2f64.powi(n as i32) * factorial(n) * PI.sqrt()).sqrt();
                let got = hermite_scaled(n, t).unwrap();
                assert!((got - direct).abs() < 1e-12 * (1.0 + direct.abs()), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn hermite_survives_large_orders_and_arguments() {
        for &t in &[0.0, 50.0, 141.0, 199.9, -200.0] {
            let v = hermite_functions(MAX_LEVEL, t);
            assert!(v.iter().all(|x| x.is_finite()));
            // |psi_n| <= 1 for the orthonormal functions
            assert!(v.iter().all(|x| x.abs() < 1.0));
        }
        assert!(hermite_scaled(MAX_LEVEL + 1, 0.0).is_err());
    }

    #[test]
    fn laguerre_examples() {
        let e1 = (-1f64).exp();
        assert!((laguerre_scaled(0, 3, 1.0, 1.0).unwrap().value - e1).abs() < 1e-16);
        assert!((laguerre_scaled(1, 2, 0.5, 1.0).unwrap().value - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((laguerre_scaled(2, 0, 1.0, 1.0).unwrap().value + e1).abs() < 1e-15);
    }

    #[test]
    fn laguerre_extreme_range_is_finite() {
        for &(w, h) in &[(1000.0, 1.0), (1.0, 1e-3), (0.5, 1e-3)] {
            let row = laguerre_row(MAX_LEVEL, 0, 2.0 * w / h);
            assert!(row.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn gaussian_comb_examples() {
        let peak = gaussian_comb(15, 3.0, 0.1, 0.1);
        assert!((peak - 3.989422804014327).abs() < 1e-13);
        let off = gaussian_comb(1, 3.0, 1.0, 0.1);
        assert!((off / 1.4867195147342977e-5 - 1.0).abs() < 1e-12);
        let ten = gaussian_comb(2, 2.0, 1.0, 0.1);
        assert!((ten / (3.989422804014327 * (-50f64).exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_examples() {
        let p = bessel_jy(0.5, PI / 2.0).unwrap();
        assert!((p.j - 2.0 / PI).abs() < 1e-14, "{}", p.j - 2.0 / PI);
        let p = bessel_jy(0.5, PI).unwrap();
        assert!((p.y - 2f64.sqrt() / PI).abs() < 1e-14);
        assert!((bessel_j(0.0, 1e-12).unwrap() - 1.0).abs() < 1e-15);
        // J_0(1), J_1(2) reference values
        assert!((bessel_j(0.0, 1.0).unwrap() - 0.7651976865579666).abs() < 1e-15);
        assert!((bessel_j(1.0, 2.0).unwrap() - 0.5767248077568734).abs() < 1e-15);
        assert!((bessel_jy(0.0, 1.0).unwrap().y - 0.08825696421567696).abs() < 1e-10);
        assert!(bessel_jy(0.0, 0.0).is_err());
        assert!(bessel_jy(0.0, 20.0).is_err());
    }

    #[test]
    fn negative_integer_order_symmetry() {
        for m in 1..6 {
            let a = bessel_j(-(m as f64), 0.7).unwrap();
            let b = bessel_j(m as f64, 0.7).unwrap();
            assert!((a - if m % 2 == 0 { b } else { -b }).abs() < 1e-16);
        }
    }

    #[test]
    fn sin_pi_is_exact_at_integers() {
        for k in -20..20 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((cos_pi(1.0) + 1.0).abs() < 1e-16);
    }
}
