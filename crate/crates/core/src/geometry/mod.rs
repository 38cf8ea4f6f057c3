//! Deformation maps, weights and the geometry they induce: the deformed
//! quadratic form `P(phi(x))`, the inverse metric, the density ratio
//! `sigma = omega / |J|` and the drift `V = g^T grad ln sigma`.

mod cone;

pub use cone::{cone_level_set, Polyline};

use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::specfun::power::Branch;
use crate::timefrac::{HilferOrder, IndexConvention, TemporalScale};

type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Central-difference step `eps^{1/3}` scaled by the coordinate.
pub(crate) fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Quadratic-form signature: `p` plus directions, `q` minus directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("signature needs p >= 1".into()));
        }
        Ok(Signature { p, q })
    }
    /// Euclidean signature in `n` dimensions.
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn dim(&self) -> usize {
        self.p + self.q
    }
    /// `+1` for the first `p` axes, `-1` after.
    pub fn eta(&self, k: usize) -> f64 {
        if k < self.p {
            1.0
        } else {
            -1.0
        }
    }
    /// `sum_p y_k^2 - sum_q y_k^2`.
    pub fn quadratic_form(&self, y: &[f64]) -> f64 {
        let plus: f64 = y[..self.p].iter().map(|v| v * v).sum();
        let minus: f64 = y[self.p..].iter().map(|v| v * v).sum();
        plus - minus
    }
}

/// A diffeomorphism of `R^n` with its Jacobian matrix.
#[derive(Clone)]
pub struct DeformationMap {
    dim: usize,
    phi: VecFn,
    jacobian: MatFn,
    analytic_det: Option<ScalarFn>,
    grad_ln_det: Option<VecFn>,
    affine: bool,
    label: String,
}

impl fmt::Debug for DeformationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeformationMap")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish()
    }
}

impl DeformationMap {
    /// Map from `phi` and its Jacobian `D phi` (row `i` holds `grad phi_i`).
    pub fn new<P, J>(dim: usize, phi: P, jacobian: J) -> Self
    where
        P: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        DeformationMap {
            dim,
            phi: Arc::new(phi),
            jacobian: Arc::new(jacobian),
            analytic_det: None,
            grad_ln_det: None,
            affine: false,
            label: "custom".into(),
        }
    }

    /// Declare the Jacobian constant in `x`.
    pub fn affine(mut self) -> Self {
        self.affine = true;
        self
    }

    pub fn is_affine(&self) -> bool {
        self.affine
    }

    /// Attach a closed-form determinant.
    pub fn with_det<D>(mut self, det: D) -> Self
    where
        D: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.analytic_det = Some(Arc::new(det));
        self
    }

    /// Attach a closed-form `grad ln |det D phi|`.
    pub fn with_grad_ln_det<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad_ln_det = Some(Arc::new(g));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn identity(dim: usize) -> Self {
        DeformationMap::new(dim, |x| x.to_vec(), move |_| DMatrix::identity(dim, dim))
            .with_det(|_| 1.0)
            .with_grad_ln_det(move |_| vec![0.0; dim])
            .affine()
            .with_label("identity")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phi(&self, x: &[f64]) -> Vec<f64> {
        (self.phi)(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        (self.jacobian)(x)
    }

    /// `det D phi(x)`, closed form when available.
    pub fn det(&self, x: &[f64]) -> f64 {
        match &self.analytic_det {
            Some(d) => d(x),
            None => self.jacobian(x).determinant(),
        }
    }

    /// `grad ln |det D phi|`, closed form or central differences.
    pub fn grad_ln_det(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(g) = &self.grad_ln_det {
            return Ok(g(x));
        }
        gradient_fd(&|y: &[f64]| self.det(y).abs().ln(), x)
    }

    /// `Some(grad ln |J|)` only when it is known in closed form.
    pub fn analytic_grad_ln_det(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.grad_ln_det.as_ref().map(|g| g(x))
    }

    /// Largest relative deviation between the Jacobian and central
    /// differences of `phi` at `x`.
    pub fn jacobian_defect(&self, x: &[f64]) -> f64 {
        let j = self.jacobian(x);
        let mut worst: f64 = 0.0;
        for k in 0..self.dim {
            let h = fd_step(x[k]);
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            let (fu, fd) = (self.phi(&up), self.phi(&down));
            for i in 0..self.dim {
                let numeric = (fu[i] - fd[i]) / (2.0 * h);
                let scale = j[(i, k)].abs().max(j.column(k).amax()).max(1e-300);
                worst = worst.max((numeric - j[(i, k)]).abs() / scale);
            }
        }
        worst
    }

    pub(crate) fn checked_inverse(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let j = self.jacobian(x);
        let det = j.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularJacobian(x.to_vec()));
        }
        j.try_inverse().ok_or_else(|| Error::SingularJacobian(x.to_vec()))
    }
}

fn expm1_over(lambda: f64, x: f64) -> f64 {
    if (lambda * x).abs() < 1e-8 {
        // (e^{lx} - 1)/l = x (1 + lx/2 + ...)
        x * (1.0 + 0.5 * lambda * x)
    } else {
        (lambda * x).exp_m1() / lambda
    }
}

/// Component-wise `phi_k = (e^{lambda_k x_k} - 1) / lambda_k`, with the
/// limit `phi_k = x_k` for `lambda_k = 0`.
pub fn exponential_map(lambdas: Vec<f64>) -> DeformationMap {
    let dim = lambdas.len();
    let l1 = lambdas.clone();
    let l2 = lambdas.clone();
    let l3 = lambdas.clone();
    let l4 = lambdas.clone();
    DeformationMap::new(
        dim,
        move |x| x.iter().zip(&l1).map(|(&xk, &lk)| expm1_over(lk, xk)).collect(),
        move |x| DMatrix::from_diagonal(&DVector::from_iterator(dim, x.iter().zip(&l2).map(|(&xk, &lk)| (lk * xk).exp()))),
    )
    .with_det(move |x| x.iter().zip(&l3).map(|(&xk, &lk)| lk * xk).sum::<f64>().exp())
    .with_grad_ln_det(move |_| l4.clone())
    .with_label(format!("exponential{lambdas:?}"))
}

/// Positive weight `omega(x)`.
#[derive(Clone)]
pub struct WeightField {
    omega: ScalarFn,
    grad_ln: Option<VecFn>,
    label: String,
}

impl fmt::Debug for WeightField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightField").field("label", &self.label).finish()
    }
}

impl WeightField {
    pub fn new<W>(omega: W) -> Self
    where
        W: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        WeightField {
            omega: Arc::new(omega),
            grad_ln: None,
            label: "custom".into(),
        }
    }

    pub fn with_grad_ln<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad_ln = Some(Arc::new(g));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `omega = 1`.
    pub fn unit(dim: usize) -> Self {
        WeightField::new(|_| 1.0)
            .with_grad_ln(move |_| vec![0.0; dim])
            .with_label("unit")
    }

    /// `omega = exp(a . x)`.
    pub fn exp_linear(a: Vec<f64>) -> Self {
        let a1 = a.clone();
        let a2 = a.clone();
        WeightField::new(move |x| x.iter().zip(&a1).map(|(xi, ai)| xi * ai).sum::<f64>().exp())
            .with_grad_ln(move |_| a2.clone())
            .with_label(format!("exp-linear{a:?}"))
    }

    /// `omega = 1 + |x|^2`.
    pub fn rational() -> Self {
        WeightField::new(|x| 1.0 + x.iter().map(|v| v * v).sum::<f64>())
            .with_grad_ln(|x| {
                let s = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
                x.iter().map(|v| 2.0 * v / s).collect()
            })
            .with_label("rational")
    }

    /// `omega = |det D phi|`, which makes the density ratio identically 1.
    pub fn jacobian_of(map: &DeformationMap) -> Self {
        let m1 = map.clone();
        let mut w = WeightField::new(move |x| m1.det(x).abs()).with_label("jacobian");
        if map.grad_ln_det.is_some() {
            let m2 = map.clone();
            w = w.with_grad_ln(move |x| m2.analytic_grad_ln_det(x).expect("closed form present"));
        }
        w
    }

    pub fn omega(&self, x: &[f64]) -> f64 {
        (self.omega)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `grad ln omega`, closed form or central differences.
    pub fn grad_ln(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(g) = &self.grad_ln {
            return Ok(g(x));
        }
        gradient_fd(&|y: &[f64]| self.omega(y).ln(), x)
    }

    /// Closed-form `grad ln omega` if attached.
    pub fn analytic_grad_ln(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.grad_ln.as_ref().map(|g| g(x))
    }
}

pub(crate) fn gradient_fd(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let h = fd_step(x[k]);
        let mut up = x.to_vec();
        let mut down = x.to_vec();
        up[k] += h;
        down[k] -= h;
        let d = (f(&up) - f(&down)) / (2.0 * h);
        if !d.is_finite() {
            return Err(Error::Differentiation(format!("non-finite difference along axis {k} at {x:?}")));
        }
        out.push(d);
    }
    Ok(out)
}

/// Where the signature enters the inverse metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MetricConvention {
    /// `g = Dphi^{-1} eta Dphi^{-T}`: the operator is ultrahyperbolic.
    #[default]
    Ultrahyperbolic,
    /// `g = Dphi^{-1} Dphi^{-T}`: signature only in the symbol.
    Riemannian,
}

/// Everything needed to state and solve the problem.
#[derive(Debug, Clone)]
pub struct MediumConfig {
    pub map: DeformationMap,
    pub weight: WeightField,
    pub sig: Signature,
    pub c: f64,
    pub beta: f64,
    pub order: HilferOrder,
    pub scale: TemporalScale,
    pub branch: Branch,
    pub metric: MetricConvention,
    pub index: IndexConvention,
}

impl MediumConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        map: DeformationMap,
        weight: WeightField,
        sig: Signature,
        c: f64,
        beta: f64,
        order: HilferOrder,
        scale: TemporalScale,
        branch: Branch,
    ) -> Result<Self> {
        if map.dim() != sig.dim() {
            return Err(Error::InvalidParameter(format!(
                "map dimension {} does not match signature ({}, {})",
                map.dim(),
                sig.p(),
                sig.q()
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
        }
        Ok(MediumConfig {
            map,
            weight,
            sig,
            c,
            beta,
            order,
            scale,
            branch,
            metric: MetricConvention::default(),
            index: IndexConvention::default(),
        })
    }

    /// Identity map, unit weight, `gamma = t`, `rho = 1`, `+` branch.
    pub fn flat(sig: Signature, c: f64, beta: f64, order: HilferOrder) -> Result<Self> {
        let n = sig.dim();
        Self::new(
            DeformationMap::identity(n),
            WeightField::unit(n),
            sig,
            c,
            beta,
            order,
            TemporalScale::standard(),
            Branch::Plus,
        )
    }

    pub fn with_map(mut self, map: DeformationMap) -> Result<Self> {
        if map.dim() != self.sig.dim() {
            return Err(Error::InvalidParameter("map dimension mismatch".into()));
        }
        self.map = map;
        Ok(self)
    }
    pub fn with_weight(mut self, weight: WeightField) -> Self {
        self.weight = weight;
        self
    }
    pub fn with_scale(mut self, scale: TemporalScale) -> Self {
        self.scale = scale;
        self
    }
    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }
    pub fn with_metric(mut self, metric: MetricConvention) -> Self {
        self.metric = metric;
        self
    }
    pub fn with_index(mut self, index: IndexConvention) -> Self {
        self.index = index;
        self
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, configuration has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `P(phi(x))`.
pub fn deformed_distance(cfg: &MediumConfig, x: &[f64]) -> f64 {
    cfg.sig.quadratic_form(&cfg.map.phi(x))
}

/// `g(x) = Dphi^{-1} eta Dphi^{-T}` (or without `eta`, per the metric
/// convention).
pub fn inverse_metric(cfg: &MediumConfig, x: &[f64]) -> Result<DMatrix<f64>> {
    cfg.check_point(x)?;
    let inv = cfg.map.checked_inverse(x)?;
    let n = cfg.dim();
    let eta = DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else {
            match cfg.metric {
                MetricConvention::Ultrahyperbolic => cfg.sig.eta(i),
                MetricConvention::Riemannian => 1.0,
            }
        }
    });
    Ok(&inv * eta * inv.transpose())
}

/// `sigma = omega / |det D phi|`.
pub fn density_ratio(cfg: &MediumConfig, x: &[f64]) -> Result<f64> {
    cfg.check_point(x)?;
    let det = cfg.map.det(x);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularJacobian(x.to_vec()));
    }
    Ok(cfg.weight.omega(x) / det.abs())
}

/// `grad ln sigma`: closed form when both the weight and the map carry one,
/// central differences of `ln sigma` otherwise.
pub fn grad_ln_sigma(cfg: &MediumConfig, x: &[f64]) -> Result<Vec<f64>> {
    cfg.check_point(x)?;
    if let (Some(w), Some(j)) = (cfg.weight.analytic_grad_ln(x), cfg.map.analytic_grad_ln_det(x)) {
        return Ok(w.iter().zip(&j).map(|(a, b)| a - b).collect());
    }
    density_ratio(cfg, x)?;
    gradient_fd(
        &|y: &[f64]| (cfg.weight.omega(y) / cfg.map.det(y).abs()).ln(),
        x,
    )
}

/// Drift `V = g^T grad ln sigma`.
pub fn drift_field(cfg: &MediumConfig, x: &[f64]) -> Result<DVector<f64>> {
    let g = inverse_metric(cfg, x)?;
    let grad = DVector::from_vec(grad_ln_sigma(cfg, x)?);
    Ok(g.transpose() * grad)
}
