//! Run configuration files.
//!
//! TOML with one table per concern:
//!
//! ```toml
//! [medium]
//! signature = [1, 1]      # (p, q)
//! c = 1.0
//! beta = 0.75
//! mu = 0.5
//! nu = 1.0
//! branch = "+"            # "+" or "-"
//! metric = "ultrahyperbolic"   # or "riemannian"
//! index = "consistent"    # or "literal"
//!
//! [map]
//! kind = "exponential"    # identity | exponential
//! lambda = [1.0, 1.0]
//!
//! [weight]
//! kind = "jacobian"       # unit | jacobian | exp-linear (with a = [...]) | rational
//!
//! [time]
//! gamma = "t"             # t | t^a (with exponent)
//! rho = "1"               # 1 | 1+t | exp (with rate)
//!
//! [grid]
//! lo = [-3.0, -3.0]
//! hi = [3.0, 3.0]
//! samples = [101, 101]
//!
//! [oracle]
//! xi_max = 100.0
//! samples = 4001
//! tolerance = 1e-3
//! ```
//!
//! Only `[medium]` is required; `[map]`, `[weight]` and `[time]` default to
//! the identity, the unit weight and `gamma = t`, `rho = 1`.

use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{exponential_map, DeformationMap, MediumConfig, MetricConvention, Signature, WeightField};
use crate::grid::GridSpec;
use crate::specfun::power::Branch;
use crate::timefrac::{GammaKind, HilferOrder, IndexConvention, RhoKind, TemporalScale};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumSection {
    signature: (usize, usize),
    #[serde(default = "one")]
    c: f64,
    beta: f64,
    mu: f64,
    #[serde(default = "one")]
    nu: f64,
    #[serde(default = "plus")]
    branch: Branch,
    #[serde(default)]
    metric: MetricName,
    #[serde(default)]
    index: IndexName,
}

fn one() -> f64 {
    1.0
}

fn plus() -> Branch {
    Branch::Plus
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MetricName {
    #[default]
    Ultrahyperbolic,
    Riemannian,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum IndexName {
    #[default]
    Consistent,
    Literal,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum MapSection {
    #[default]
    Identity,
    Exponential { lambda: Vec<f64> },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum WeightSection {
    #[default]
    Unit,
    Jacobian,
    ExpLinear { a: Vec<f64> },
    Rational,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeSection {
    #[serde(default = "gamma_t")]
    gamma: String,
    exponent: Option<f64>,
    #[serde(default = "rho_one")]
    rho: String,
    rate: Option<f64>,
}

fn gamma_t() -> String {
    "t".into()
}

fn rho_one() -> String {
    "1".into()
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            gamma: gamma_t(),
            exponent: None,
            rho: rho_one(),
            rate: None,
        }
    }
}

/// Grid bounds and resolution, one entry per axis.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub samples: Vec<usize>,
}

impl GridSection {
    pub fn to_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.lo.clone(), self.hi.clone(), self.samples.clone())
    }
}

/// Settings of the inverse-transform oracle.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "xi_max")]
    pub xi_max: f64,
    #[serde(default = "oracle_samples")]
    pub samples: usize,
    #[serde(default = "oracle_tolerance")]
    pub tolerance: f64,
}

fn xi_max() -> f64 {
    100.0
}

fn oracle_samples() -> usize {
    4001
}

fn oracle_tolerance() -> f64 {
    1e-3
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            xi_max: xi_max(),
            samples: oracle_samples(),
            tolerance: oracle_tolerance(),
        }
    }
}

impl OracleSection {
    /// Symmetric frequency grid `[-xi_max, xi_max]`.
    pub fn frequency_grid(&self) -> Result<GridSpec> {
        GridSpec::line(-self.xi_max, self.xi_max, self.samples)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLayout {
    medium: MediumSection,
    #[serde(default)]
    map: MapSection,
    #[serde(default)]
    weight: WeightSection,
    #[serde(default)]
    time: TimeSection,
    grid: Option<GridSection>,
    #[serde(default)]
    oracle: OracleSection,
}

/// A parsed configuration file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub medium: MediumConfig,
    pub grid: Option<GridSection>,
    pub oracle: OracleSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: FileLayout = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let m = &raw.medium;
        let sig = Signature::new(m.signature.0, m.signature.1).map_err(config)?;
        let n = sig.dim();
        let map = match &raw.map {
            MapSection::Identity => DeformationMap::identity(n),
            MapSection::Exponential { lambda } => {
                check_len("map.lambda", lambda.len(), n)?;
                exponential_map(lambda.clone())
            }
        };
        let weight = match &raw.weight {
            WeightSection::Unit => WeightField::unit(n),
            WeightSection::Jacobian => WeightField::jacobian_of(&map),
            WeightSection::ExpLinear { a } => {
                check_len("weight.a", a.len(), n)?;
                WeightField::exp_linear(a.clone())
            }
            WeightSection::Rational => WeightField::rational(),
        };
        let gamma = match (raw.time.gamma.as_str(), raw.time.exponent) {
            ("t", None) => GammaKind::Identity,
            ("t^a", Some(a)) => GammaKind::Power(a),
            (g, e) => return Err(Error::Config(format!("time.gamma = {g:?} with exponent {e:?}"))),
        };
        let rho = match (raw.time.rho.as_str(), raw.time.rate) {
            ("1", None) => RhoKind::Unit,
            ("1+t", None) => RhoKind::Linear,
            ("exp", Some(a)) => RhoKind::Exp(a),
            (r, a) => return Err(Error::Config(format!("time.rho = {r:?} with rate {a:?}"))),
        };
        let scale = TemporalScale::from_kinds(gamma, rho).map_err(config)?;
        let order = HilferOrder::new(m.mu, m.nu).map_err(config)?;
        let medium = MediumConfig::new(map, weight, sig, m.c, m.beta, order, scale, m.branch)
            .map_err(config)?
            .with_metric(match m.metric {
                MetricName::Ultrahyperbolic => MetricConvention::Ultrahyperbolic,
                MetricName::Riemannian => MetricConvention::Riemannian,
            })
            .with_index(match m.index {
                IndexName::Consistent => IndexConvention::Consistent,
                IndexName::Literal => IndexConvention::Literal,
            });
        if let Some(g) = &raw.grid {
            for (name, len) in [("lo", g.lo.len()), ("hi", g.hi.len()), ("samples", g.samples.len())] {
                check_len(&format!("grid.{name}"), len, n)?;
            }
        }
        Ok(RunConfig {
            medium,
            grid: raw.grid,
            oracle: raw.oracle,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

fn config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn check_len(key: &str, len: usize, n: usize) -> Result<()> {
    if len != n {
        return Err(Error::Config(format!("{key} has {len} entries, the signature needs {n}")));
    }
    Ok(())
}
