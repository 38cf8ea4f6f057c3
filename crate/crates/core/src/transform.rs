//! Grid quadrature of the weighted deformed Fourier transform
//! `F f(xi) = (2 pi)^{-n/2} int e^{-i xi . phi(x)} omega f |J| dx`
//! and its inverse, used as a brute-force oracle.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::MediumConfig;
use crate::operators::{weighted_gradient, ScalarField};
use crate::quadrature::{integrate_complex, tanh_sinh};
use crate::specfun::gamma::{gamma_real, rgamma_real};

pub use crate::grid::GridSpec;

/// Largest boundary-to-peak ratio accepted before reporting truncation.
pub const BOUNDARY_RATIO: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(cfg: &MediumConfig, grid: &GridSpec, v: &[f64]) -> Result<()> {
    if grid.dim() != cfg.dim() || v.len() != cfg.dim() {
        return Err(Error::InvalidParameter(format!(
            "dimensions disagree: config {}, grid {}, point {}",
            cfg.dim(),
            grid.dim(),
            v.len()
        )));
    }
    Ok(())
}

/// Trapezoid sum of `values` over the grid, after checking that the boundary
/// nodes are negligible against the peak.
fn trapezoid<F>(grid: &GridSpec, what: &str, mut values: F) -> Result<Complex64>
where
    F: FnMut(usize, &[f64]) -> Result<Complex64>,
{
    let mut total = Complex64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for idx in 0..grid.len() {
        let x = grid.point(idx);
        let v = values(idx, &x)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Quadrature(format!("non-finite {what} integrand at {x:?}")));
        }
        let m = v.norm();
        peak = peak.max(m);
        if grid.on_boundary(idx) {
            edge = edge.max(m);
        }
        total += v * grid.weight(idx);
    }
    if peak > 0.0 && edge > BOUNDARY_RATIO * peak {
        return Err(Error::Truncation(format!(
            "{what} integrand at the grid boundary is {:.2e} of its peak",
            edge / peak
        )));
    }
    Ok(total)
}

fn unitary(n: usize) -> f64 {
    (2.0 * PI).powf(-0.5 * n as f64)
}

fn forward_with<V>(cfg: &MediumConfig, grid: &GridSpec, xi: &[f64], value: V) -> Result<Complex64>
where
    V: Fn(&[f64]) -> Result<f64>,
{
    check_dims(cfg, grid, xi)?;
    let sum = trapezoid(grid, "forward", |_, x| {
        let f = value(x)?;
        if f == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let phase = -dot(xi, &cfg.map.phi(x));
        let amp = cfg.weight.omega(x) * f * cfg.map.det(x).abs();
        Ok(Complex64::from_polar(amp, phase))
    })?;
    Ok(sum * unitary(cfg.dim()))
}

/// Forward weighted transform of `f` at frequency `xi`.
pub fn weighted_ft(cfg: &MediumConfig, f: &ScalarField, grid: &GridSpec, xi: &[f64]) -> Result<Complex64> {
    forward_with(cfg, grid, xi, |x| Ok(f.value(x)))
}

/// Inverse weighted transform of the spectral function `g`, sampled on a
/// frequency grid, at the point `x`.
pub fn inverse_weighted_ft<G>(cfg: &MediumConfig, g: G, grid: &GridSpec, x: &[f64]) -> Result<Complex64>
where
    G: Fn(&[f64]) -> Complex64,
{
    check_dims(cfg, grid, x)?;
    let y = cfg.map.phi(x);
    let sum = trapezoid(grid, "inverse", |_, xi| {
        Ok(g(xi) * Complex64::from_polar(1.0, dot(xi, &y)))
    })?;
    Ok(sum * unitary(cfg.dim()) / cfg.weight.omega(x))
}

/// Largest component of `|F[grad_w f](xi) - i xi F[f](xi)|`.
pub fn gradient_correspondence_defect(cfg: &MediumConfig, f: &ScalarField, grid: &GridSpec, xi: &[f64]) -> Result<f64> {
    let base = weighted_ft(cfg, f, grid, xi)?;
    let mut worst: f64 = 0.0;
    for k in 0..cfg.dim() {
        let lhs = forward_with(cfg, grid, xi, |x| Ok(weighted_gradient(cfg, f, x)?[k]))?;
        let rhs = Complex64::new(0.0, xi[k]) * base;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Closed-form constant `2^{2 lambda + n/2} Gamma(lambda + n/2) / Gamma(-lambda)`
/// of the power-function transform, with the phase `e^{-/+ i q pi / 2}`.
pub fn power_transform_constant(lambda: f64, p: usize, q: usize, minus_branch: bool) -> Result<Complex64> {
    let n = (p + q) as f64;
    let modulus = 2f64.powf(2.0 * lambda + 0.5 * n) * gamma_real(lambda + 0.5 * n)? * rgamma_real(-lambda);
    let sign = if minus_branch { 1.0 } else { -1.0 };
    Ok(Complex64::from_polar(modulus, sign * 0.5 * PI * q as f64))
}

/// Regularised check of the power-function transform in the one-dimensional
/// elliptic case. Returns `(lhs, rhs)`, where `lhs` is the extrapolated
/// `eps -> 0` limit of the transform of `(1/omega) phi^{2 lambda} e^{-eps phi^2}`
/// and `rhs` the closed form at `|xi|^{-2 lambda - 1}`.
pub fn spectral_identity_check(cfg: &MediumConfig, lambda: f64, xi: &[f64], grid: &GridSpec) -> Result<(Complex64, Complex64)> {
    check_dims(cfg, grid, xi)?;
    if cfg.dim() != 1 || cfg.sig.q() != 0 {
        return Err(Error::InvalidParameter("the spectral identity check needs n = 1, q = 0".into()));
    }
    if !(lambda > -0.5 && lambda < 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must lie in (-1/2, 0)")));
    }
    let xi = xi[0];
    if xi == 0.0 {
        return Err(Error::InvalidParameter("xi = 0 is the singular frequency".into()));
    }
    let (lo, hi) = (grid.lo()[0], grid.hi()[0]);
    let phi = |x: f64| cfg.map.phi(&[x])[0];
    let (pl, ph) = (phi(lo), phi(hi));
    if pl.signum() == ph.signum() {
        return Err(Error::InvalidParameter("phi has no root inside the grid".into()));
    }
    // Root of phi by bisection.
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if phi(m).signum() == pl.signum() && phi(m) != 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let root = if phi(a) == 0.0 { a } else { b };

    // Smallest eps keeps the regulariser below the boundary ratio at the
    // nearer end; the sequence doubles from there.
    let reach = pl.abs().min(ph.abs());
    let eps_min = -BOUNDARY_RATIO.ln() / (reach * reach) * 1.1;
    let h = grid.step(0);
    let stride = grid.samples()[0].div_ceil(400);
    let breaks: Vec<f64> = grid.axis(0).into_iter().step_by(stride).collect();

    let transform = |eps: f64| -> Result<Complex64> {
        let amp = |x: f64, y: f64| -> f64 {
            y.abs().powf(2.0 * lambda) * (-eps * y * y).exp() * cfg.map.det(&[x]).abs()
        };
        let mut total = Complex64::new(0.0, 0.0);
        for (start, end) in [(root, lo), (root, hi)] {
            let dir = (end - start).signum();
            let near = start + dir * h;
            // Singular piece next to the root, in the distance from it.
            let piece = |part: fn(Complex64) -> f64| {
                tanh_sinh(
                    |t, _| {
                        let x = start + dir * t;
                        let y = phi(x);
                        part(Complex64::from_polar(amp(x, y), -xi * y))
                    },
                    0.0,
                    h,
                    1e-13,
                    12,
                )
            };
            let re = piece(|z| z.re)?;
            let im = piece(|z| z.im)?;
            total += Complex64::new(re.value, im.value);
            let tail = integrate_complex(
                |x| {
                    let y = phi(x);
                    Complex64::from_polar(amp(x, y), -xi * y)
                },
                near,
                end,
                &breaks,
                1e-15,
                1e-12,
            )?;
            total += tail.value * dir;
        }
        Ok(total * unitary(1))
    };

    let eps: Vec<f64> = (0..4).rev().map(|k| eps_min * 2f64.powi(k)).collect();
    let vals = eps.iter().map(|&e| transform(e)).collect::<Result<Vec<_>>>()?;
    // Richardson in eps: first and second order eliminations.
    let r1: Vec<Complex64> = vals.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let r2: Vec<Complex64> = r1.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    let lhs = r2[1];
    let spread = (r2[1] - r2[0]).norm();
    if !(spread <= 1e-3 * lhs.norm()) {
        return Err(Error::Extrapolation(format!(
            "eps sequence {eps:?} gives extrapolants {} and {} apart by {spread:e}",
            r2[0], r2[1]
        )));
    }
    let rhs = power_transform_constant(lambda, 1, 0, false)? * xi.abs().powf(-2.0 * lambda - 1.0);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Signature, WeightField};
    use crate::timefrac::HilferOrder;

    fn line() -> MediumConfig {
        MediumConfig::flat(Signature::new(1, 0).unwrap(), 1.0, 1.0, HilferOrder::new(1.0, 1.0).unwrap()).unwrap()
    }

    fn gaussian() -> ScalarField {
        ScalarField::new(|x| (-0.5 * x[0] * x[0]).exp()).with_gradient(|x| vec![-x[0] * (-0.5 * x[0] * x[0]).exp()])
    }

    #[test]
    fn gaussian_is_self_dual() {
        let grid = GridSpec::line(-12.0, 12.0, 241).unwrap();
        for xi in [0.0, 0.7, 2.5] {
            let v = weighted_ft(&line(), &gaussian(), &grid, &[xi]).unwrap();
            assert!((v.re - (-0.5 * xi * xi).exp()).abs() < 1e-12 && v.im.abs() < 1e-14, "{xi}: {v}");
        }
        let back = inverse_weighted_ft(&line(), |k| Complex64::new((-0.5 * k[0] * k[0]).exp(), 0.0), &grid, &[1.3]).unwrap();
        assert!((back.re - (-0.5 * 1.69f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn zero_function_and_truncation() {
        let grid = GridSpec::line(-2.0, 2.0, 101).unwrap();
        assert_eq!(weighted_ft(&line(), &ScalarField::zero(1), &grid, &[1.0]).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(
            weighted_ft(&line(), &gaussian(), &grid, &[1.0]),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn derivative_rule_on_the_line() {
        let grid = GridSpec::line(-12.0, 12.0, 241).unwrap();
        for xi in [-3.0, 0.5, 3.0] {
            assert!(gradient_correspondence_defect(&line(), &gaussian(), &grid, &[xi]).unwrap() < 1e-7);
        }
        let cfg = line().with_weight(WeightField::rational());
        let f = ScalarField::new(|x| (-0.5 * x[0] * x[0]).exp() / (1.0 + x[0] * x[0]));
        assert!(gradient_correspondence_defect(&cfg, &f, &grid, &[1.0]).unwrap() < 1e-7);
    }

    #[test]
    fn power_constant_at_quarter() {
        let c = power_transform_constant(-0.25, 1, 0, false).unwrap();
        assert!((c.re - 1.0).abs() < 1e-14 && c.im == 0.0);
    }
}
