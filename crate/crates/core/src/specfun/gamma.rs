//! Gamma function family on the complex plane.
//!
//! Lanczos approximation (g = 7, nine coefficients) on `Re z >= 1/2`, the
//! reflection formula elsewhere. The real-argument helpers avoid the complex
//! path so that reciprocal gammas vanish exactly at the poles.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Largest argument with a finite `f64` gamma value.
const GAMMA_OVERFLOW: f64 = 171.6;

/// `sin(pi x)` with the argument reduced before scaling, exact at integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let n = x.round();
    let r = x - n;
    let s = (PI * r).sin();
    if (n as i64).rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}

/// `cos(pi x)`, exact at half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `ln sin(pi z)` without overflow for large `|Im z|`. The imaginary part is
/// some argument of `sin(pi z)`, which is all the reflection formula needs.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let r = z.re - n;
    let y = z.im;
    let sign_shift = if (n as i64).rem_euclid(2) == 0 {
        0.0
    } else {
        PI
    };
    let core = if y.abs() < 20.0 {
        let (sr, cr) = (PI * r).sin_cos();
        Complex64::new(sr * (PI * y).cosh(), cr * (PI * y).sinh()).ln()
    } else {
        let (sr, cr) = (PI * r).sin_cos();
        let unit = Complex64::new(sr, y.signum() * cr);
        Complex64::new(PI * y.abs() - std::f64::consts::LN_2, 0.0) + unit.ln()
    };
    core + Complex64::new(0.0, sign_shift)
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let z1 = z - 1.0;
    let mut a = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z1 + i as f64);
    }
    let t = z1 + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (z1 + 0.5) * t.ln() - t + a.ln()
}

/// Logarithm of the gamma function.
///
/// The real part is `ln|Gamma(z)|`; `exp(ln_gamma(z))` reproduces `Gamma(z)`.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(Error::Pole(z.re));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite argument {z}")));
    }
    if z.re >= 0.5 {
        Ok(lanczos_ln_gamma(z))
    } else {
        let one_minus = Complex64::new(1.0, 0.0) - z;
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - lanczos_ln_gamma(one_minus))
    }
}

/// Gamma function on the complex plane.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        return gamma_real(z.re).map(|v| Complex64::new(v, 0.0));
    }
    ln_gamma(z).map(|l| l.exp())
}

/// Reciprocal gamma, entire; zero at the non-positive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(rgamma_real(z.re), 0.0);
    }
    match ln_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// Gamma on `[1, 2)` by Lanczos, evaluated in value space.
fn gamma_unit_interval(x: f64) -> f64 {
    let z1 = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z1 + i as f64);
    }
    let t = z1 + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z1 + 0.5) * (-t).exp() * a
}

/// Real gamma function. Positive arguments are reduced to `[1, 2)` and
/// rebuilt by an upward product so that the relative error stays near a
/// few ulps over the whole finite range.
pub fn gamma_real(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite argument {x}")));
    }
    if x < 0.5 {
        let g = gamma_real(1.0 - x)?;
        return Ok(PI / (sin_pi(x) * g));
    }
    if x > GAMMA_OVERFLOW {
        return Ok(f64::INFINITY);
    }
    if x < 1.0 {
        return Ok(gamma_unit_interval(x + 1.0) / x);
    }
    if x == x.round() && x <= 23.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    let base = 1.0 + x.fract();
    let mut v = gamma_unit_interval(base);
    let mut y = base;
    while y + 0.5 < x {
        v *= y;
        y += 1.0;
    }
    Ok(v)
}

/// Reciprocal real gamma; zero at the non-positive integers.
pub fn rgamma_real(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        let one_minus = 1.0 - x;
        if one_minus > GAMMA_OVERFLOW {
            let (l, s) = ln_abs_gamma_real(one_minus);
            return sin_pi(x) / PI * s * l.exp();
        }
        return match gamma_real(one_minus) {
            Ok(g) => sin_pi(x) * g / PI,
            Err(_) => 0.0,
        };
    }
    if x > GAMMA_OVERFLOW {
        return (-ln_abs_gamma_real(x).0).exp();
    }
    match gamma_real(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// `(ln|Gamma(x)|, sign Gamma(x))`; `(+inf, 0)` at poles.
pub fn ln_abs_gamma_real(x: f64) -> (f64, f64) {
    if is_nonpositive_integer(x) {
        return (f64::INFINITY, 0.0);
    }
    if x >= 0.5 {
        if x <= 20.0 {
            if let Ok(g) = gamma_real(x) {
                return (g.ln(), 1.0);
            }
        }
        return (lanczos_ln_gamma(Complex64::new(x, 0.0)).re, 1.0);
    }
    let s = sin_pi(x);
    let (l1, _) = ln_abs_gamma_real(1.0 - x);
    (PI.ln() - s.abs().ln() - l1, s.signum())
}

/// `(ln|1/Gamma(x)|, sign)`; `(-inf, 0)` at poles.
pub fn ln_abs_rgamma_real(x: f64) -> (f64, f64) {
    let (l, s) = ln_abs_gamma_real(x);
    if s == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (-l, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ln_gamma_of_one_is_zero() {
        let v = ln_gamma(c(1.0, 0.0)).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn ln_gamma_of_half_is_ln_sqrt_pi() {
        let v = ln_gamma(c(0.5, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.572_364_942_924_700_4, epsilon = 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_of_five_is_ln_24() {
        let v = ln_gamma(c(5.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 24f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn poles_are_reported() {
        assert_eq!(ln_gamma(c(0.0, 0.0)), Err(Error::Pole(0.0)));
        assert_eq!(ln_gamma(c(-3.0, 0.0)), Err(Error::Pole(-3.0)));
        assert!(gamma_real(-2.0).is_err());
        assert_eq!(rgamma_real(-4.0), 0.0);
        assert_eq!(rgamma(c(-1.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn reflection_matches_recurrence_off_axis() {
        // Gamma(z + 1) = z Gamma(z) straddling the reflection boundary.
        for &(re, im) in &[(-2.3, 0.7), (0.2, -1.5), (-0.7, 3.0), (0.45, 12.0), (-5.5, -25.0)] {
            let z = c(re, im);
            let lhs = gamma(z + 1.0).unwrap();
            let rhs = z * gamma(z).unwrap();
            assert!((lhs - rhs).norm() <= 1e-13 * lhs.norm(), "z = {z}");
        }
    }

    #[test]
    fn large_imaginary_parts_stay_finite() {
        // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
        for &y in &[30.0, 100.0, 250.0] {
            let l = ln_gamma(c(0.5, y)).unwrap();
            let expected = 0.5 * (PI.ln() - (PI * y - std::f64::consts::LN_2));
            assert_relative_eq!(l.re, expected, max_relative = 1e-13);
            let lr = ln_gamma(c(0.3 - 1.0, -y)).unwrap();
            assert!(lr.re.is_finite());
        }
    }

    #[test]
    fn real_gamma_matches_known_values() {
        assert_relative_eq!(gamma_real(0.5).unwrap(), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_real(1.5).unwrap(), 0.5 * PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_real(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_real(11.0).unwrap(), 3_628_800.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_real(30.5).unwrap(), 4.822_696_933_490_909_5e31, max_relative = 1e-14);
        assert_relative_eq!(rgamma_real(-2.5), 1.0 / (-8.0 * PI.sqrt() / 15.0), max_relative = 1e-14);
    }

    #[test]
    fn log_magnitude_and_sign_for_negative_arguments() {
        let (l, s) = ln_abs_gamma_real(-1.5);
        assert_relative_eq!(s * l.exp(), 4.0 * PI.sqrt() / 3.0, max_relative = 1e-14);
        let (l, s) = ln_abs_rgamma_real(-0.75);
        assert_relative_eq!(s * l.exp(), rgamma_real(-0.75), max_relative = 1e-14);
        assert_eq!(ln_abs_rgamma_real(-2.0), (f64::NEG_INFINITY, 0.0));
        let (l, _) = ln_abs_gamma_real(200.0);
        assert_relative_eq!(l, 857.933_669_825_857_5, max_relative = 1e-14);
    }

    #[test]
    fn sin_pi_is_exact_on_the_lattice() {
        for k in -6..=6 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert_eq!(cos_pi(0.5), 0.0);
        assert_relative_eq!(sin_pi(0.25), std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(sin_pi(-7.75), std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-14);
    }
}
