//! Weighted fractional calculus with respect to a temporal scale `gamma`
//! and a weight `rho`.
//!
//! The weighted operators are conjugations of the classical
//! Riemann-Liouville ones:
//!
//! ```text
//! I^a f(t) = 1/(rho(t) Gamma(a)) ∫_0^t (gamma(t) - gamma(s))^{a-1} rho(s) f(s) gamma'(s) ds
//! D g(t)   = 1/(rho(t) gamma'(t)) d/dt (rho(t) g(t))
//! Hilfer   = I^{nu(1-mu)} ∘ D ∘ I^{(1-nu)(1-mu)}
//! ```
//!
//! Integrals use tanh-sinh quadrature, which absorbs the algebraic
//! endpoint singularities; the derivative is a central difference.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::specfun::gamma::rgamma_real;
use crate::specfun::mittag_leffler::mittag_leffler;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type DiffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Built-in time reparametrisations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaKind {
    /// `gamma(t) = t`
    Identity,
    /// `gamma(t) = t^a`, `a > 0`
    Power(f64),
}

/// Built-in temporal weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoKind {
    /// `rho = 1`
    Unit,
    /// `rho = 1 + t`
    Linear,
    /// `rho = e^{a t}`
    Exp(f64),
}

/// Temporal scale `gamma` with its derivative and the weight `rho`.
#[derive(Clone)]
pub struct TemporalScale {
    gamma: ScalarFn,
    gamma_prime: ScalarFn,
    /// `gamma(t) - gamma(t - d)`, computed without cancellation when known.
    gamma_gap: DiffFn,
    rho: ScalarFn,
    rho_zero: f64,
    label: String,
}

impl fmt::Debug for TemporalScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TemporalScale")
            .field("label", &self.label)
            .field("rho_zero", &self.rho_zero)
            .finish()
    }
}

impl TemporalScale {
    /// General scale. `gamma` is shifted so that `gamma(0) = 0`; `rho_zero`
    /// is taken as `rho(0)`.
    pub fn new<G, Gp, R>(gamma: G, gamma_prime: Gp, rho: R) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        Gp: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g0 = gamma(0.0);
        if !g0.is_finite() {
            return Err(Error::InvalidParameter("gamma(0) is not finite".into()));
        }
        let gamma: ScalarFn = Arc::new(move |t| gamma(t) - g0);
        let g = gamma.clone();
        let gap: DiffFn = Arc::new(move |t, d| g(t) - g(t - d));
        let rho_zero = rho(0.0);
        let scale = TemporalScale {
            gamma,
            gamma_prime: Arc::new(gamma_prime),
            gamma_gap: gap,
            rho: Arc::new(rho),
            rho_zero,
            label: "custom".into(),
        };
        scale.validate(&[0.25, 0.5, 1.0, 2.0])?;
        Ok(scale)
    }

    /// Scale built from the named kinds, with exact differences.
    pub fn from_kinds(gamma: GammaKind, rho: RhoKind) -> Result<Self> {
        let (g, gp, gap, glabel): (ScalarFn, ScalarFn, DiffFn, String) = match gamma {
            GammaKind::Identity => (
                Arc::new(|t| t),
                Arc::new(|_| 1.0),
                Arc::new(|_, d| d),
                "t".into(),
            ),
            GammaKind::Power(a) => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidParameter(format!("gamma exponent {a} must be positive")));
                }
                (
                    Arc::new(move |t: f64| t.powf(a)),
                    Arc::new(move |t: f64| a * t.powf(a - 1.0)),
                    // t^a - (t-d)^a = -t^a expm1(a ln(1 - d/t))
                    Arc::new(move |t: f64, d: f64| -t.powf(a) * (a * (-d / t).ln_1p()).exp_m1()),
                    format!("t^{a}"),
                )
            }
        };
        let (r, rlabel): (ScalarFn, String) = match rho {
            RhoKind::Unit => (Arc::new(|_| 1.0), "1".into()),
            RhoKind::Linear => (Arc::new(|t| 1.0 + t), "1+t".into()),
            RhoKind::Exp(a) => {
                if !a.is_finite() {
                    return Err(Error::InvalidParameter(format!("rho rate {a}")));
                }
                (Arc::new(move |t: f64| (a * t).exp()), format!("exp({a}t)"))
            }
        };
        Ok(TemporalScale {
            gamma: g,
            gamma_prime: gp,
            gamma_gap: gap,
            rho_zero: r(0.0),
            rho: r,
            label: format!("gamma={glabel}, rho={rlabel}"),
        })
    }

    /// `gamma(t) = t`, `rho = 1`.
    pub fn standard() -> Self {
        Self::from_kinds(GammaKind::Identity, RhoKind::Unit).expect("standard scale")
    }

    pub fn gamma(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }
    pub fn gamma_prime(&self, t: f64) -> f64 {
        (self.gamma_prime)(t)
    }
    pub fn rho(&self, t: f64) -> f64 {
        (self.rho)(t)
    }
    pub fn rho_zero(&self) -> f64 {
        self.rho_zero
    }
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Check `gamma' > 0` and `rho > 0` at the given times.
    pub fn validate(&self, ts: &[f64]) -> Result<()> {
        if !(self.rho_zero > 0.0) {
            return Err(Error::InvalidParameter(format!("rho(0+) = {} must be positive", self.rho_zero)));
        }
        for &t in ts {
            let gp = self.gamma_prime(t);
            let r = self.rho(t);
            if !(gp > 0.0) || !(r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "at t = {t}: gamma' = {gp}, rho = {r} (both must be positive)"
                )));
            }
        }
        Ok(())
    }
}

/// Hilfer order `(mu, nu)`. Configurations accept `0 < mu <= 2` so that the
/// propagator gate can be probed; the fractional operators need `mu <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilferOrder {
    mu: f64,
    nu: f64,
}

impl HilferOrder {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 2.0) {
            return Err(Error::InvalidParameter(format!("mu = {mu} outside (0, 2]")));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::InvalidParameter(format!("nu = {nu} outside [0, 1]")));
        }
        Ok(HilferOrder { mu, nu })
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    fn require_fractional(&self) -> Result<()> {
        if self.mu > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "Hilfer derivative needs mu <= 1, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Which second Mittag-Leffler index the relaxation function carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum IndexConvention {
    /// `theta = mu + nu (1 - mu)`, the Hilfer eigenfunction index.
    #[default]
    Consistent,
    /// `theta = nu`, agreeing with the former only when `nu = 1`.
    Literal,
}

impl IndexConvention {
    pub fn theta(self, order: HilferOrder) -> f64 {
        match self {
            IndexConvention::Consistent => order.mu + order.nu * (1.0 - order.mu),
            IndexConvention::Literal => order.nu,
        }
    }
}

/// Accuracy knobs for the quadrature and finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Relative tolerance of the innermost integrals.
    pub quad_tol: f64,
    /// Central-difference step relative to `t`.
    pub fd_rel_step: f64,
    /// Maximum tanh-sinh refinement level.
    pub max_level: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            quad_tol: 1e-12,
            fd_rel_step: 1e-3,
            max_level: 11,
        }
    }
}

impl QuadSettings {
    /// Halve the difference step and tighten the quadrature.
    pub fn refined(self) -> Self {
        QuadSettings {
            quad_tol: self.quad_tol * 0.25,
            fd_rel_step: self.fd_rel_step * 0.5,
            max_level: self.max_level,
        }
    }

    fn outer_tol(&self) -> f64 {
        (10.0 * self.quad_tol / self.fd_rel_step).max(self.quad_tol)
    }
}

fn weighted_integral_tol<F>(f: &F, alpha: f64, scale: &TemporalScale, t: f64, tol: f64, max_level: usize) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("integral order {alpha} must be >= 0")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
    }
    if alpha == 0.0 {
        return Ok(f(t));
    }
    let half = 0.5 * t;
    let integrand = |s: f64, d: f64| -> f64 {
        // Distance to the nearer endpoint keeps both singular factors exact.
        let (s, gap) = if s > half {
            (t - d, (scale.gamma_gap)(t, d))
        } else {
            (d, (scale.gamma_gap)(t, t - d))
        };
        gap.powf(alpha - 1.0) * scale.rho(s) * f(s) * scale.gamma_prime(s)
    };
    let q = tanh_sinh(integrand, 0.0, t, tol, max_level)?;
    Ok(q.value * rgamma_real(alpha) / scale.rho(t))
}

/// Weighted Riemann-Liouville integral `I^alpha f (t)`; `alpha = 0` is the
/// identity.
pub fn weighted_fractional_integral<F>(f: F, alpha: f64, scale: &TemporalScale, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let s = QuadSettings::default();
    weighted_integral_tol(&f, alpha, scale, t, s.quad_tol, s.max_level)
}

/// `D g = (1/(rho gamma')) d/dt (rho g)` by the five-point central
/// difference.
fn weighted_derivative<G>(g: &G, scale: &TemporalScale, t: f64, rel_step: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let h = rel_step * t;
    if !(h > 0.0) || t - 2.0 * h <= 0.0 {
        return Err(Error::Differentiation(format!("step {h} at t = {t} leaves the domain")));
    }
    let w = |s: f64| -> Result<f64> { Ok(scale.rho(s) * g(s)?) };
    let d1 = w(t + h)? - w(t - h)?;
    let d2 = w(t + 2.0 * h)? - w(t - 2.0 * h)?;
    Ok((8.0 * d1 - d2) / (12.0 * h) / (scale.rho(t) * scale.gamma_prime(t)))
}

/// Weighted Hilfer derivative with explicit accuracy settings.
pub fn weighted_hilfer_derivative_with<F>(
    f: F,
    order: HilferOrder,
    scale: &TemporalScale,
    t: f64,
    settings: QuadSettings,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    order.require_fractional()?;
    if !(t > 0.0) || t < 1e-12 {
        return Err(Error::Differentiation(format!("t = {t} is too close to 0")));
    }
    let (mu, nu) = (order.mu, order.nu);
    let inner = (1.0 - nu) * (1.0 - mu);
    let outer = nu * (1.0 - mu);
    let tol = settings.quad_tol;
    let g = |s: f64| weighted_integral_tol(&f, inner, scale, s, tol, settings.max_level);
    let dg = |s: f64| weighted_derivative(&g, scale, s, settings.fd_rel_step);
    if outer == 0.0 {
        return dg(t);
    }
    // Errors inside the outer integrand are surfaced after the fact.
    let failure = std::sync::Mutex::new(None);
    let h = |s: f64| match dg(s) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().expect("no poisoning").get_or_insert(e);
            f64::NAN
        }
    };
    let v = weighted_integral_tol(&h, outer, scale, t, settings.outer_tol(), settings.max_level);
    if let Some(e) = failure.into_inner().expect("no poisoning") {
        return Err(e);
    }
    v
}

/// Weighted Hilfer derivative `I^{nu(1-mu)} D I^{(1-nu)(1-mu)} f (t)`.
pub fn weighted_hilfer_derivative<F>(f: F, order: HilferOrder, scale: &TemporalScale, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    weighted_hilfer_derivative_with(f, order, scale, t, QuadSettings::default())
}

/// `(rho(0+) gamma(t)^{theta-1} / rho(t)) E_{mu,theta}(-lambda gamma(t)^mu)`,
/// the solution of `D u = -lambda u` with unit initial datum.
pub fn relaxation(
    lambda: Complex64,
    t: f64,
    order: HilferOrder,
    scale: &TemporalScale,
    convention: IndexConvention,
) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive")));
    }
    let theta = convention.theta(order);
    let g = scale.gamma(t);
    let e = mittag_leffler(order.mu, theta, -lambda * g.powf(order.mu))?;
    Ok(e * (scale.rho_zero() * g.powf(theta - 1.0) / scale.rho(t)))
}

/// `q^beta` on the branch selected by the sign of `Im q` (signed zero
/// included).
pub fn symbol_power(q: Complex64, beta: f64) -> Complex64 {
    if q.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (beta * q.ln()).exp()
}

/// `|D u + c^2 q^beta u|` for the relaxation function `u`, with explicit
/// index convention and settings.
pub fn ode_residual_with(
    q_symbol: Complex64,
    t: f64,
    order: HilferOrder,
    scale: &TemporalScale,
    c: f64,
    beta: f64,
    convention: IndexConvention,
    settings: QuadSettings,
) -> Result<f64> {
    let lambda = c * c * symbol_power(q_symbol, beta);
    let failure = std::sync::Mutex::new(None);
    let eval = |s: f64| match relaxation(lambda, s, order, scale, convention) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().expect("no poisoning").get_or_insert(e);
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    let d_re = weighted_hilfer_derivative_with(|s| eval(s).re, order, scale, t, settings)?;
    let d_im = weighted_hilfer_derivative_with(|s| eval(s).im, order, scale, t, settings)?;
    if let Some(e) = failure.into_inner().expect("no poisoning") {
        return Err(e);
    }
    let u = relaxation(lambda, t, order, scale, convention)?;
    Ok((Complex64::new(d_re, d_im) + lambda * u).norm())
}

/// Residual of the fractional relaxation equation at `t`.
pub fn ode_residual(
    q_symbol: Complex64,
    t: f64,
    order: HilferOrder,
    scale: &TemporalScale,
    c: f64,
    beta: f64,
) -> Result<f64> {
    ode_residual_with(
        q_symbol,
        t,
        order,
        scale,
        c,
        beta,
        IndexConvention::Consistent,
        QuadSettings::default(),
    )
}
