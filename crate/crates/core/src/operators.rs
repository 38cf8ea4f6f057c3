//! Pointwise weighted deformed operators and the drift decomposition
//! `box_w u = box_phi u + V . grad u`.

use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{drift_field, fd_step, gradient_fd, inverse_metric, MediumConfig};

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Default relative step of the outer divergence difference.
pub const DIVERGENCE_STEP: f64 = 1e-4;

/// A scalar field with optional closed-form gradient and Hessian.
#[derive(Clone)]
pub struct ScalarField {
    eval: ScalarFn,
    grad: Option<VecFn>,
    hessian: Option<MatFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("grad", &self.grad.is_some())
            .field("hessian", &self.hessian.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            eval: Arc::new(f),
            grad: None,
            hessian: None,
        }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn with_hessian<H>(mut self, h: H) -> Self
    where
        H: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(h));
        self
    }

    /// The zero field.
    pub fn zero(dim: usize) -> Self {
        ScalarField::new(|_| 0.0)
            .with_gradient(move |_| vec![0.0; dim])
            .with_hessian(move |_| DMatrix::zeros(dim, dim))
    }

    /// `sum_k c_k x^{a_k} * exp(-|x|^2 / 2)` with closed-form gradient.
    pub fn polynomial_gaussian(terms: Vec<(Vec<u32>, f64)>) -> Self {
        let t1 = Arc::new(terms);
        let t2 = t1.clone();
        let poly = |terms: &[(Vec<u32>, f64)], x: &[f64]| -> (f64, Vec<f64>) {
            let mut p = 0.0;
            let mut dp = vec![0.0; x.len()];
            for (exps, c) in terms {
                let mono: f64 = exps.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
                p += c * mono;
                for k in 0..x.len() {
                    if exps[k] == 0 {
                        continue;
                    }
                    let mut d = c * exps[k] as f64;
                    for (j, (&e, &xj)) in exps.iter().zip(x).enumerate() {
                        d *= xj.powi(if j == k { e as i32 - 1 } else { e as i32 });
                    }
                    dp[k] += d;
                }
            }
            (p, dp)
        };
        ScalarField::new(move |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            poly(&t1, x).0 * (-0.5 * r2).exp()
        })
        .with_gradient(move |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let g = (-0.5 * r2).exp();
            let (p, dp) = poly(&t2, x);
            dp.iter().zip(x).map(|(d, xi)| (d - xi * p) * g).collect()
        })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    /// Gradient, closed form or central differences.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.grad {
            Some(g) => Ok(g(x)),
            None => gradient_fd(&|y: &[f64]| self.value(y), x),
        }
    }

    /// Hessian, closed form or central differences of the gradient.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if let Some(h) = &self.hessian {
            return Ok(h(x));
        }
        let n = x.len();
        let mut out = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = fd_step(x[k]);
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            let (gu, gd) = (self.gradient(&up)?, self.gradient(&down)?);
            for i in 0..n {
                out[(i, k)] = (gu[i] - gd[i]) / (2.0 * h);
            }
        }
        Ok(0.5 * (&out + out.transpose()))
    }

    /// Largest relative gap between the closed-form gradient and central
    /// differences of the values; zero when no gradient is attached.
    pub fn gradient_defect(&self, x: &[f64]) -> Result<f64> {
        let Some(g) = &self.grad else { return Ok(0.0) };
        let exact = g(x);
        let numeric = gradient_fd(&|y: &[f64]| self.value(y), x)?;
        let scale = exact.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        Ok(exact.iter().zip(&numeric).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale)
    }
}

fn check_dim(cfg: &MediumConfig, x: &[f64]) -> Result<()> {
    if x.len() != cfg.dim() {
        return Err(Error::InvalidParameter(format!(
            "point has {} coordinates, configuration has {}",
            x.len(),
            cfg.dim()
        )));
    }
    Ok(())
}

/// `(1/omega) Dphi^{-T} grad(omega f) = Dphi^{-T} (grad f + f grad ln omega)`.
pub fn weighted_gradient(cfg: &MediumConfig, f: &ScalarField, x: &[f64]) -> Result<DVector<f64>> {
    check_dim(cfg, x)?;
    let inv = cfg.map.checked_inverse(x)?;
    let gf = DVector::from_vec(f.gradient(x)?);
    let gw = DVector::from_vec(cfg.weight.grad_ln(x)?);
    Ok(inv.transpose() * (gf + gw * f.value(x)))
}

/// `(1/w) sum_i d_i (w g^{ij} d_j u)` with the outer derivative by central
/// differences of step `h_rel * max(1, |x_i|)`.
fn divergence_form(
    cfg: &MediumConfig,
    w: &dyn Fn(&[f64]) -> f64,
    u: &ScalarField,
    x: &[f64],
    h_rel: f64,
) -> Result<f64> {
    let n = x.len();
    let flux = |y: &[f64], i: usize| -> Result<f64> {
        let g = inverse_metric(cfg, y)?;
        let du = u.gradient(y)?;
        let row: f64 = (0..n).map(|j| g[(i, j)] * du[j]).sum();
        Ok(w(y) * row)
    };
    let mut total = 0.0;
    for i in 0..n {
        let h = h_rel * x[i].abs().max(1.0);
        let mut up = x.to_vec();
        let mut down = x.to_vec();
        up[i] += h;
        down[i] -= h;
        total += (flux(&up, i)? - flux(&down, i)?) / (2.0 * h);
    }
    let wx = w(x);
    let out = total / wx;
    if !out.is_finite() {
        return Err(Error::Differentiation(format!("non-finite divergence at {x:?}")));
    }
    Ok(out)
}

/// Closed form for affine maps with analytic Hessian and weight gradient:
/// `g : H + (g^T grad ln w) . grad u`.
fn divergence_affine(cfg: &MediumConfig, grad_ln_w: &[f64], u: &ScalarField, x: &[f64]) -> Result<f64> {
    let g = inverse_metric(cfg, x)?;
    let h = u.hessian(x)?;
    let du = DVector::from_vec(u.gradient(x)?);
    let second = g.component_mul(&h).sum();
    let first = (g.transpose() * DVector::from_vec(grad_ln_w.to_vec())).dot(&du);
    Ok(second + first)
}

/// Weighted d'Alembertian in divergence form.
pub fn box_weighted(cfg: &MediumConfig, u: &ScalarField, x: &[f64]) -> Result<f64> {
    check_dim(cfg, x)?;
    if cfg.map.is_affine() && u.has_hessian() {
        if let Some(gw) = cfg.weight.analytic_grad_ln(x) {
            return divergence_affine(cfg, &gw, u, x);
        }
    }
    box_weighted_with_step(cfg, u, x, DIVERGENCE_STEP)
}

/// [`box_weighted`] always through differences, with an explicit step.
pub fn box_weighted_with_step(cfg: &MediumConfig, u: &ScalarField, x: &[f64], h_rel: f64) -> Result<f64> {
    check_dim(cfg, x)?;
    divergence_form(cfg, &|y| cfg.weight.omega(y), u, x, h_rel)
}

/// Purely geometric operator: the divergence form with `omega = |J|`.
pub fn box_geometric(cfg: &MediumConfig, u: &ScalarField, x: &[f64]) -> Result<f64> {
    check_dim(cfg, x)?;
    if cfg.map.is_affine() && u.has_hessian() {
        let gj = cfg.map.grad_ln_det(x)?;
        return divergence_affine(cfg, &gj, u, x);
    }
    box_geometric_with_step(cfg, u, x, DIVERGENCE_STEP)
}

/// [`box_geometric`] always through differences, with an explicit step.
pub fn box_geometric_with_step(cfg: &MediumConfig, u: &ScalarField, x: &[f64], h_rel: f64) -> Result<f64> {
    check_dim(cfg, x)?;
    divergence_form(cfg, &|y| cfg.map.det(y).abs(), u, x, h_rel)
}

/// `|box_w u - box_phi u - V . grad u|` at `x`.
pub fn decomposition_residual(cfg: &MediumConfig, u: &ScalarField, x: &[f64]) -> Result<f64> {
    decomposition_residual_with_step(cfg, u, x, DIVERGENCE_STEP)
}

/// [`decomposition_residual`] with an explicit outer step.
pub fn decomposition_residual_with_step(cfg: &MediumConfig, u: &ScalarField, x: &[f64], h_rel: f64) -> Result<f64> {
    let bw = box_weighted_with_step(cfg, u, x, h_rel)?;
    let bg = box_geometric_with_step(cfg, u, x, h_rel)?;
    let v = drift_field(cfg, x)?;
    let du = DVector::from_vec(u.gradient(x)?);
    Ok((bw - bg - v.dot(&du)).abs())
}
