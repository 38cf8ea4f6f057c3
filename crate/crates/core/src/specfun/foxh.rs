//! Fox H-function
//!
//! ```text
//! H^{m,n}_{p,q}(z) = 1/(2 pi i) ∫_L  Π_{j<=m} Γ(b_j + β_j s) Π_{j<=n} Γ(1 - a_j - α_j s)
//!                                   / [Π_{j>m} Γ(1 - b_j - β_j s) Π_{j>n} Γ(a_j + α_j s)]  z^{-s} ds
//! ```
//!
//! evaluated three ways: trapezoidal quadrature along a vertical line that
//! separates the two pole families, the residue series over the left poles
//! (convergent for `mu* > 0`, asymptotic as `z -> 0` otherwise), and the
//! residue series over the right poles (convergent for `mu* < 0`). The right
//! residues are taken numerically on small circles, which covers double
//! poles and poles cancelled by zeros of the denominator alike.
//!
//! All entry points have a `_log` twin taking `ln z`, so that callers can fix
//! the branch of `z^{-s}` themselves.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::gamma::{ln_abs_gamma_real, ln_gamma};
use crate::error::{Error, Result};

/// Orders and parameter lists of a Fox H-function.
#[derive(Debug, Clone, PartialEq)]
pub struct FoxHSpec {
    m: usize,
    n: usize,
    upper: Vec<(f64, f64)>,
    lower: Vec<(f64, f64)>,
}

impl FoxHSpec {
    /// `upper` holds `(a_j, alpha_j)`, `lower` holds `(b_j, beta_j)`.
    pub fn new(m: usize, n: usize, upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> Result<Self> {
        if m > lower.len() || n > upper.len() {
            return Err(Error::InvalidParameter(format!(
                "orders m={m}, n={n} exceed list lengths q={}, p={}",
                lower.len(),
                upper.len()
            )));
        }
        for &(a, alpha) in &upper {
            if !(alpha > 0.0 && alpha.is_finite() && a.is_finite()) {
                return Err(Error::InvalidParameter(format!("upper pair ({a}, {alpha})")));
            }
        }
        for &(b, beta) in &lower {
            if !(beta > 0.0 && beta.is_finite() && b.is_finite()) {
                return Err(Error::InvalidParameter(format!("lower pair ({b}, {beta})")));
            }
        }
        Ok(FoxHSpec { m, n, upper, lower })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.upper.len()
    }
    pub fn q(&self) -> usize {
        self.lower.len()
    }
    pub fn upper(&self) -> &[(f64, f64)] {
        &self.upper
    }
    pub fn lower(&self) -> &[(f64, f64)] {
        &self.lower
    }

    /// Rightmost pole of the `Γ(b_j + β_j s)` family (`-inf` if `m = 0`).
    pub fn left_pole_bound(&self) -> f64 {
        self.lower[..self.m]
            .iter()
            .map(|&(b, beta)| -b / beta)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Leftmost pole of the `Γ(1 - a_j - α_j s)` family (`+inf` if `n = 0`).
    pub fn right_pole_bound(&self) -> f64 {
        self.upper[..self.n]
            .iter()
            .map(|&(a, alpha)| (1.0 - a) / alpha)
            .fold(f64::INFINITY, f64::min)
    }

    /// `ln` of the Mellin-Barnes integrand without the `z^{-s}` factor.
    /// `None` where a denominator Gamma has a pole, i.e. the integrand is 0.
    fn ln_kernel(&self, s: Complex64) -> Result<Option<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &(b, beta)) in self.lower.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma(b + beta * s)?;
            } else {
                match ln_gamma(one - b - beta * s) {
                    Ok(v) => acc -= v,
                    Err(Error::Pole(_)) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
        }
        for (j, &(a, alpha)) in self.upper.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma(one - a - alpha * s)?;
            } else {
                match ln_gamma(a + alpha * s) {
                    Ok(v) => acc -= v,
                    Err(Error::Pole(_)) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(Some(acc))
    }

    /// Full integrand `kernel(s) z^{-s}` given `ln z`.
    fn integrand(&self, s: Complex64, ln_z: Complex64) -> Result<Complex64> {
        Ok(match self.ln_kernel(s)? {
            Some(l) => (l - s * ln_z).exp(),
            None => Complex64::new(0.0, 0.0),
        })
    }
}

/// Exact sum of doubles, rounded once. Every finite double is a dyadic
/// rational, so a shared power-of-two scale turns the sum into integer
/// arithmetic.
fn exact_sum(terms: &[f64]) -> f64 {
    let parts: Vec<(i128, i32)> = terms
        .iter()
        .filter(|x| **x != 0.0)
        .map(|&x| {
            let bits = x.to_bits();
            let sign = if bits >> 63 == 0 { 1i128 } else { -1 };
            let exp = ((bits >> 52) & 0x7ff) as i32;
            let frac = (bits & ((1u64 << 52) - 1)) as i128;
            if exp == 0 {
                (sign * frac, -1074)
            } else {
                (sign * (frac | (1i128 << 52)), exp - 1075)
            }
        })
        .collect();
    let Some(min_exp) = parts.iter().map(|p| p.1).min() else {
        return 0.0;
    };
    let max_exp = parts.iter().map(|p| p.1).max().unwrap_or(min_exp);
    if max_exp - min_exp > 60 {
        return terms.iter().sum();
    }
    let total: i128 = parts.iter().map(|&(v, e)| v << (e - min_exp)).sum();
    total as f64 * 2f64.powi(min_exp)
}

/// `(a*, mu*)`: the sector half-angle parameter and the balance of the
/// Gamma arguments. Each is a single exactly-rounded sum of the list entries.
pub fn convergence_params(spec: &FoxHSpec) -> (f64, f64) {
    let mut a_terms = Vec::new();
    for (j, &(_, alpha)) in spec.upper.iter().enumerate() {
        a_terms.push(if j < spec.n { alpha } else { -alpha });
    }
    for (j, &(_, beta)) in spec.lower.iter().enumerate() {
        a_terms.push(if j < spec.m { beta } else { -beta });
    }
    let mut mu_terms: Vec<f64> = spec.lower.iter().map(|p| p.1).collect();
    mu_terms.extend(spec.upper.iter().map(|p| -p.1));
    (exact_sum(&a_terms), exact_sum(&mu_terms))
}

/// Vertical integration line and initial trapezoid parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPlan {
    /// Abscissa of the line `Re s = c`.
    pub c: f64,
    /// Initial truncation `|Im s| <= T`.
    pub half_height: f64,
    /// Initial number of trapezoid nodes on `[-T, T]`.
    pub node_count: usize,
    /// Edges of the pole-free strip.
    pub strip: (f64, f64),
}

impl ContourPlan {
    fn step(&self) -> f64 {
        2.0 * self.half_height / (self.node_count - 1) as f64
    }
}

/// Place the line midway in the pole-free strip and pick a starting grid.
pub fn plan_contour(spec: &FoxHSpec) -> Result<ContourPlan> {
    let left = spec.left_pole_bound();
    let right = spec.right_pole_bound();
    if left >= right {
        return Err(Error::Separation { left, right });
    }
    let c = match (left.is_finite(), right.is_finite()) {
        (true, true) => 0.5 * (left + right),
        (true, false) => left + 0.5,
        (false, true) => right - 0.5,
        (false, false) => 0.0,
    };
    let half_gap = (c - left).min(right - c).min(0.5);
    let (a_star, _) = convergence_params(spec);
    let decay = if a_star > 0.0 { a_star * PI / 2.0 } else { f64::NAN };
    let half_height = if decay.is_finite() { (36.0 / decay).max(10.0) } else { 10.0 };
    let h = 0.36 * half_gap;
    let node_count = ((2.0 * half_height / h).ceil() as usize + 1).max(64);
    Ok(ContourPlan {
        c,
        half_height,
        node_count,
        strip: (left, right),
    })
}

/// How a Fox H value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FoxHMethod {
    SeriesSmall,
    SeriesLarge,
    Contour,
}

impl std::fmt::Display for FoxHMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FoxHMethod::SeriesSmall => "series",
            FoxHMethod::SeriesLarge => "series-large",
            FoxHMethod::Contour => "contour",
        })
    }
}

/// A Fox H value with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoxHValue {
    pub value: Complex64,
    pub error: f64,
    pub method: FoxHMethod,
    /// Quadrature nodes or series terms used.
    pub work: usize,
}

/// True if `z^{-s}` (with the given `ln z`) keeps the contour integral
/// absolutely convergent: `|arg z| < a* pi / 2`.
pub fn in_sector(spec: &FoxHSpec, ln_z: Complex64) -> bool {
    let (a_star, _) = convergence_params(spec);
    a_star > 0.0 && ln_z.im.abs() < a_star * PI / 2.0
}

/// Mellin-Barnes integral at `z` (principal branch).
pub fn fox_h_contour(spec: &FoxHSpec, z: Complex64, plan: &ContourPlan) -> Result<FoxHValue> {
    if z.norm() == 0.0 {
        return Err(Error::InvalidParameter("contour evaluation needs z != 0".into()));
    }
    fox_h_contour_log(spec, z.ln(), plan)
}

/// Mellin-Barnes integral given `ln z`.
pub fn fox_h_contour_log(spec: &FoxHSpec, ln_z: Complex64, plan: &ContourPlan) -> Result<FoxHValue> {
    const TAIL_REL: f64 = 1e-14;
    const STEP_REL: f64 = 1e-13;
    const MAX_HEIGHT: f64 = 2e4;
    const MAX_HALVINGS: usize = 9;

    let (a_star, _) = convergence_params(spec);
    if a_star <= 0.0 {
        return Err(Error::Convergence(format!(
            "a* = {a_star} <= 0: the contour integral does not converge"
        )));
    }
    let margin = a_star * PI / 2.0 - ln_z.im.abs();
    if margin <= 0.0 {
        return Err(Error::Convergence(format!(
            "|arg z| = {} is outside the convergence sector a* pi/2 = {}",
            ln_z.im.abs(),
            a_star * PI / 2.0
        )));
    }
    let c = plan.c;
    let f = |tau: f64| spec.integrand(Complex64::new(c, tau), ln_z);

    let mut h = plan.step();
    let mut height = plan.half_height.max(36.0 / margin).min(MAX_HEIGHT);
    // Trapezoid sum over k h, |k h| <= height.
    let sum_on = |h: f64, height: f64, offset: f64, stride: usize| -> Result<(Complex64, f64)> {
        let kmax = (height / h).floor() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        let mut k = -kmax;
        while k <= kmax {
            let tau = k as f64 * h + offset;
            if tau.abs() <= height {
                let v = f(tau)?;
                acc += v;
                abs += v.norm();
            }
            k += stride as i64;
        }
        Ok((acc, abs))
    };

    // Grow the window until the endpoint integrand is negligible.
    let mut sum;
    loop {
        let (s, _) = sum_on(h, height, 0.0, 1)?;
        sum = s;
        let total = (s * h).norm() / (2.0 * PI);
        let edge = f(height)?.norm().max(f(-height)?.norm()) / (2.0 * PI);
        if edge <= TAIL_REL * total.max(f64::MIN_POSITIVE) || edge == 0.0 {
            break;
        }
        if height >= MAX_HEIGHT {
            return Err(Error::Convergence(format!(
                "integrand still {edge:e} at |Im s| = {height}"
            )));
        }
        height = (height * 1.5).min(MAX_HEIGHT);
    }
    let mut value = sum * h / (2.0 * PI);
    let mut nodes = 2 * (height / h).floor() as usize + 1;
    let mut error = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        // Midpoints of the current grid.
        let (mid, _) = sum_on(h, height - 0.5 * h, 0.5 * h, 1)?;
        nodes += 2 * ((height - 0.5 * h) / h).floor() as usize + 2;
        sum += mid;
        h *= 0.5;
        let next = sum * h / (2.0 * PI);
        error = (next - value).norm();
        value = next;
        if error <= STEP_REL * value.norm() {
            break;
        }
    }
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Convergence("non-finite contour integral".into()));
    }
    Ok(FoxHValue {
        value,
        error: error + 4.0 * f64::EPSILON * value.norm(),
        method: FoxHMethod::Contour,
        work: nodes,
    })
}

/// Truncate a residue series before its smallest term.
fn truncate(terms: &[Complex64], converged_at: Option<usize>) -> Result<(Complex64, f64, usize)> {
    let abs_total: f64 = terms.iter().map(|t| t.norm()).sum();
    let rounding = 4.0 * f64::EPSILON * abs_total;
    if let Some(k) = converged_at {
        let value: Complex64 = terms[..=k].iter().sum();
        return Ok((value, terms[k].norm() + rounding, k + 1));
    }
    let nonzero: Vec<(usize, f64)> = terms
        .iter()
        .enumerate()
        .map(|(k, t)| (k, t.norm()))
        .filter(|&(_, m)| m > 0.0)
        .collect();
    let Some(&(k_min, m_min)) = nonzero.iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        return Err(Error::Convergence(
            "every residue vanishes: the function lies beyond all orders of this series".into(),
        ));
    };
    if nonzero.len() > 1 && k_min == nonzero[0].0 {
        return Err(Error::Convergence(
            "residue series terms grow from the start".into(),
        ));
    }
    // An isolated near-zero residue is not a minimum of the envelope: take
    // the larger neighbour as the error.
    let pos = nonzero.iter().position(|&(k, _)| k == k_min).expect("present");
    let envelope = nonzero[pos.saturating_sub(1)..(pos + 2).min(nonzero.len())]
        .iter()
        .map(|&(_, m)| m)
        .fold(m_min, f64::max);
    let value: Complex64 = terms[..k_min].iter().sum();
    Ok((value, envelope + rounding, k_min))
}

fn series_converged(terms: &[Complex64]) -> Option<usize> {
    // Three consecutive terms below rounding level of the partial sum,
    // ignoring exact zeros.
    let mut partial = Complex64::new(0.0, 0.0);
    let mut run = 0;
    for (k, t) in terms.iter().enumerate() {
        partial += t;
        let m = t.norm();
        if m <= 0.25 * f64::EPSILON * partial.norm() && partial.norm() > 0.0 {
            run += 1;
            if run >= 3 {
                return Some(k);
            }
        } else if m > 0.0 {
            run = 0;
        }
    }
    None
}

/// Residue series over the poles of `Γ(b_j + β_j s)`, `j <= m`, at `z`.
pub fn fox_h_series_small(spec: &FoxHSpec, z: Complex64, kmax: usize) -> Result<FoxHValue> {
    if z.norm() == 0.0 {
        // Only a pole at s = 0 survives; z^{-s} kills poles with s < 0.
        let poles = left_poles(spec, kmax)?;
        let mut value = Complex64::new(0.0, 0.0);
        for (j, k, s) in poles {
            if s > 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "pole at s = {s} > 0 makes the series singular at z = 0"
                )));
            }
            if s == 0.0 {
                value += left_residue(spec, j, k, Complex64::new(0.0, 0.0))?;
            }
        }
        return Ok(FoxHValue {
            value,
            error: 0.0,
            method: FoxHMethod::SeriesSmall,
            work: 1,
        });
    }
    fox_h_series_small_log(spec, z.ln(), kmax)
}

fn left_poles(spec: &FoxHSpec, kmax: usize) -> Result<Vec<(usize, usize, f64)>> {
    if spec.m == 0 {
        return Err(Error::InvalidParameter("no left poles (m = 0)".into()));
    }
    let mut poles = Vec::new();
    for j in 0..spec.m {
        let (b, beta) = spec.lower[j];
        for k in 0..kmax {
            poles.push((j, k, -(b + k as f64) / beta));
        }
    }
    poles.sort_by(|a, b| b.2.total_cmp(&a.2));
    for w in poles.windows(2) {
        if (w[0].2 - w[1].2).abs() <= 1e-12 * (1.0 + w[0].2.abs()) {
            return Err(Error::Convergence(format!(
                "coincident left poles at s = {}; use the contour",
                w[0].2
            )));
        }
    }
    Ok(poles)
}

/// Residue of the integrand at the simple pole `s = -(b_j + k)/β_j`, with
/// `z^{-s}` supplied through `ln_z` (ignored when `s = 0`).
fn left_residue(spec: &FoxHSpec, j: usize, k: usize, ln_z: Complex64) -> Result<Complex64> {
    let (b, beta) = spec.lower[j];
    let s = -(b + k as f64) / beta;
    let mut ln_mag = -ln_abs_gamma_real(k as f64 + 1.0).0 - beta.ln();
    let mut sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut apply = |x: f64, numerator: bool| -> Result<bool> {
        let (l, sg) = ln_abs_gamma_real(x);
        if sg == 0.0 {
            if numerator {
                return Err(Error::Convergence(format!(
                    "left and right poles collide at s = {s}"
                )));
            }
            return Ok(false);
        }
        if numerator {
            ln_mag += l;
        } else {
            ln_mag -= l;
        }
        sign *= sg;
        Ok(true)
    };
    for (i, &(bi, bei)) in spec.lower.iter().enumerate() {
        if i == j {
            continue;
        }
        let live = if i < spec.m {
            apply(bi + bei * s, true)?
        } else {
            apply(1.0 - bi - bei * s, false)?
        };
        if !live {
            return Ok(Complex64::new(0.0, 0.0));
        }
    }
    for (i, &(ai, ali)) in spec.upper.iter().enumerate() {
        let live = if i < spec.n {
            apply(1.0 - ai - ali * s, true)?
        } else {
            apply(ai + ali * s, false)?
        };
        if !live {
            return Ok(Complex64::new(0.0, 0.0));
        }
    }
    let ln_term = Complex64::new(ln_mag, 0.0) - if s == 0.0 { Complex64::new(0.0, 0.0) } else { s * ln_z };
    Ok(ln_term.exp() * sign)
}

/// Left residue series given `ln z`.
pub fn fox_h_series_small_log(spec: &FoxHSpec, ln_z: Complex64, kmax: usize) -> Result<FoxHValue> {
    if kmax < 2 {
        return Err(Error::InvalidParameter(format!("kmax = {kmax} < 2")));
    }
    let poles = left_poles(spec, kmax)?;
    let mut terms = Vec::with_capacity(kmax);
    for &(j, k, _) in poles.iter().take(kmax) {
        terms.push(left_residue(spec, j, k, ln_z)?);
        if series_converged(&terms).is_some() {
            break;
        }
    }
    let (value, error, used) = truncate(&terms, series_converged(&terms))?;
    Ok(FoxHValue {
        value,
        error,
        method: FoxHMethod::SeriesSmall,
        work: used,
    })
}

/// Residue series over the poles of `Γ(1 - a_j - α_j s)`, `j <= n`, at `z`.
pub fn fox_h_series_large(spec: &FoxHSpec, z: Complex64, kmax: usize) -> Result<FoxHValue> {
    if z.norm() == 0.0 {
        return Err(Error::InvalidParameter("right-pole series needs z != 0".into()));
    }
    fox_h_series_large_log(spec, z.ln(), kmax)
}

/// Right residue series given `ln z`. Residues are computed as
/// `(1/2 pi i) ∮ f ds` on circles around each distinct pole.
pub fn fox_h_series_large_log(spec: &FoxHSpec, ln_z: Complex64, kmax: usize) -> Result<FoxHValue> {
    const CIRCLE_NODES: usize = 64;
    if spec.n == 0 {
        return Err(Error::InvalidParameter("no right poles (n = 0)".into()));
    }
    if kmax < 2 {
        return Err(Error::InvalidParameter(format!("kmax = {kmax} < 2")));
    }
    let mut poles = Vec::new();
    let mut reach = f64::INFINITY;
    for j in 0..spec.n {
        let (a, alpha) = spec.upper[j];
        for k in 0..kmax {
            poles.push((1.0 - a + k as f64) / alpha);
        }
        reach = reach.min((1.0 - a + (kmax - 1) as f64) / alpha);
    }
    poles.sort_by(f64::total_cmp);
    poles.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * (1.0 + y.abs()));
    poles.retain(|&s| s <= reach + 1e-12);

    let left_edge = spec.left_pole_bound();
    let mut terms = Vec::with_capacity(poles.len());
    for (i, &sp) in poles.iter().enumerate() {
        let mut gap = sp - left_edge;
        if i > 0 {
            gap = gap.min(sp - poles[i - 1]);
        }
        if i + 1 < poles.len() {
            gap = gap.min(poles[i + 1] - sp);
        }
        let r = (0.4 * gap).min(0.25);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut peak: f64 = 0.0;
        for k in 0..CIRCLE_NODES {
            let w = Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / CIRCLE_NODES as f64);
            let v = spec.integrand(Complex64::new(sp, 0.0) + w, ln_z)? * w;
            peak = peak.max(v.norm());
            acc += v;
        }
        // Closing to the right runs clockwise.
        let residue = -acc / CIRCLE_NODES as f64;
        let noise = 16.0 * f64::EPSILON * peak;
        terms.push(if residue.norm() <= noise { Complex64::new(0.0, 0.0) } else { residue });
        if series_converged(&terms).is_some() {
            break;
        }
    }
    let (value, error, used) = truncate(&terms, series_converged(&terms))?;
    Ok(FoxHValue {
        value,
        error,
        method: FoxHMethod::SeriesLarge,
        work: used,
    })
}

/// Default truncation for the residue series.
pub const DEFAULT_KMAX: usize = 40;
/// `|z|` up to which the left series is tried first.
pub const DEFAULT_SERIES_RADIUS: f64 = 1.0;

/// Evaluate with the most reliable available representation:
/// left series inside the series radius, then the contour inside its
/// sector, then whichever residue series converges (`mu* < 0` right,
/// `mu* > 0` left).
pub fn fox_h_log(spec: &FoxHSpec, ln_z: Complex64, plan: &ContourPlan) -> Result<FoxHValue> {
    const SERIES_OK: f64 = 1e-12;
    const FINAL_OK: f64 = 1e-8;
    let (_, mu_star) = convergence_params(spec);
    let mut candidates: Vec<FoxHValue> = Vec::new();
    let mut last_err = None;
    let mut consider = |r: Result<FoxHValue>, threshold: f64| -> Option<FoxHValue> {
        match r {
            Ok(v) => {
                if v.value.norm() > 0.0 && v.error <= threshold * v.value.norm() {
                    return Some(v);
                }
                candidates.push(v);
            }
            Err(e) => last_err = Some(e),
        }
        None
    };
    if ln_z.re.exp() <= DEFAULT_SERIES_RADIUS && spec.m > 0 {
        if let Some(v) = consider(fox_h_series_small_log(spec, ln_z, DEFAULT_KMAX), SERIES_OK) {
            return Ok(v);
        }
    }
    if in_sector(spec, ln_z) {
        if let Some(v) = consider(fox_h_contour_log(spec, ln_z, plan), 1e-10) {
            return Ok(v);
        }
    }
    if mu_star < 0.0 && spec.n > 0 {
        if let Some(v) = consider(fox_h_series_large_log(spec, ln_z, DEFAULT_KMAX), SERIES_OK) {
            return Ok(v);
        }
    }
    if mu_star > 0.0 && spec.m > 0 {
        if let Some(v) = consider(fox_h_series_small_log(spec, ln_z, 4 * DEFAULT_KMAX), SERIES_OK) {
            return Ok(v);
        }
    }
    let best = candidates
        .into_iter()
        .filter(|v| v.error.is_finite())
        .min_by(|a, b| {
            let ra = a.error / a.value.norm().max(f64::MIN_POSITIVE);
            let rb = b.error / b.value.norm().max(f64::MIN_POSITIVE);
            ra.total_cmp(&rb)
        });
    match best {
        Some(v) if v.error <= FINAL_OK * v.value.norm() || v.error <= 1e-300 => Ok(v),
        Some(v) => Err(Error::Convergence(format!(
            "best H-function estimate {} ({}) has error {:e}",
            v.value, v.method, v.error
        ))),
        None => Err(last_err.unwrap_or_else(|| {
            Error::Convergence("no H-function representation applies".into())
        })),
    }
}

/// [`fox_h_log`] at `z` on the principal branch.
pub fn fox_h(spec: &FoxHSpec, z: Complex64, plan: &ContourPlan) -> Result<FoxHValue> {
    if z.norm() == 0.0 {
        return fox_h_series_small(spec, z, DEFAULT_KMAX);
    }
    fox_h_log(spec, z.ln(), plan)
}

/// `H^{1,1}_{1,2}[z | (0,1); (0,1), (1-nu, mu)] = E_{mu,nu}(-z)`.
pub fn mittag_leffler_h_spec(mu: f64, nu: f64) -> Result<FoxHSpec> {
    FoxHSpec::new(1, 1, vec![(0.0, 1.0)], vec![(0.0, 1.0), (1.0 - nu, mu)])
}
