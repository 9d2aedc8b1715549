//! Scan configuration: which metric, where to sample, what counts as a pass.

use std::path::PathBuf;

use finsler::averaging::Measure;
use finsler::metrics::{MetricDescriptor, ScalarField, TangentPoint, VectorField};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub metric: MetricDescriptor,
    /// Lattice of base points, one axis per coordinate.
    #[serde(default)]
    pub x_box: Vec<Axis>,
    /// Explicit `(x, y)` points, scanned before the lattice.
    #[serde(default)]
    pub points: Vec<TangentPoint>,
    #[serde(default)]
    pub y_sampling: YSampling,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub vector_field: Option<FieldSpec>,
    #[serde(default)]
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default)]
    pub average: AverageConfig,
    #[serde(default)]
    pub berwald: BerwaldConfig,
    #[serde(default)]
    pub convexity: Option<ConvexityConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

impl Axis {
    /// `count` evenly spaced values from `min` to `max`; a single value sits at the midpoint.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![0.5 * (self.min + self.max)];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// `count` values per fiber axis on `[-1, 1]`, zero excluded.
    Lattice,
    /// `count` Gaussian vectors per base point from ChaCha8 seeded with `seed`,
    /// stream equal to the base point index.
    #[default]
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConeFilter {
    #[default]
    Any,
    Timelike,
    Future,
    Past,
    Spacelike,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YSampling {
    #[serde(default)]
    pub mode: SampleMode,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cone: ConeFilter,
}

fn default_count() -> usize {
    8
}

impl Default for YSampling {
    fn default() -> Self {
        YSampling { mode: SampleMode::Random, count: default_count(), seed: 0, cone: ConeFilter::Any }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// `|R|` for curvature scans and the verify chain.
    pub ricci: f64,
    pub fieldeq: f64,
    /// Relative gap between the two curvature paths.
    pub dual_path: f64,
    pub killing: f64,
    pub frobenius: f64,
    /// `|Γ(h) - Γ|` in `average`.
    pub christoffel: f64,
    /// `|Ric(h) - ½∂²R/∂y²|` in `average`, `|Ric(h)|` in `verify`.
    pub ricci_h: f64,
    /// `max |ΔL|` per unit affine parameter.
    pub conservation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ricci: 1e-8,
            fieldeq: 1e-7,
            dual_path: 1e-6,
            killing: 1e-10,
            frobenius: 1e-8,
            christoffel: 1e-4,
            ricci_h: 1e-5,
            conservation: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Relative to `--out` when given.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Vector field for `killing` and `static`; `∂_0` when absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Coordinate(usize),
    Rotation([usize; 2]),
    Dilation,
    AxisDilation(usize),
    Components(Vec<ScalarField>),
}

impl FieldSpec {
    pub fn build(&self, dim: usize) -> Result<VectorField, String> {
        let check = |i: usize| {
            if i < dim {
                Ok(())
            } else {
                Err(format!("vector field index {i} out of range for dimension {dim}"))
            }
        };
        Ok(match self {
            FieldSpec::Coordinate(i) => {
                check(*i)?;
                VectorField::coordinate(dim, *i)
            }
            FieldSpec::Rotation([i, j]) => {
                check(*i)?;
                check(*j)?;
                VectorField::rotation(dim, *i, *j)
            }
            FieldSpec::Dilation => VectorField::dilation(dim),
            FieldSpec::AxisDilation(i) => {
                check(*i)?;
                VectorField::axis_dilation(dim, *i)
            }
            FieldSpec::Components(c) => {
                if c.len() != dim {
                    return Err(format!("vector field has {} components, dimension is {dim}", c.len()));
                }
                VectorField(c.clone())
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s_end: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AverageConfig {
    /// Starting node count; doubled until the quadrature converges.
    pub nodes: usize,
    pub fd_step: f64,
    pub quadrature_tol: f64,
    pub max_nodes: usize,
    pub measure: Measure,
}

impl Default for AverageConfig {
    fn default() -> Self {
        AverageConfig { nodes: 32, fd_step: 1e-3, quadrature_tol: 1e-13, max_nodes: 1 << 15, measure: Measure::Cone }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BerwaldConfig {
    pub samples: usize,
}

impl Default for BerwaldConfig {
    fn default() -> Self {
        BerwaldConfig { samples: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexityConfig {
    pub pairs: usize,
    #[serde(default)]
    pub with_past: bool,
    #[serde(default)]
    pub cross_pairs: usize,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, String> {
        let c: Config = serde_json::from_str(text).map_err(|e| e.to_string())?;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), String> {
        let d = self.metric.dimension;
        if !self.x_box.is_empty() && self.x_box.len() != d {
            return Err(format!("x_box has {} axes, metric dimension is {d}", self.x_box.len()));
        }
        for (i, a) in self.x_box.iter().enumerate() {
            if a.count == 0 {
                return Err(format!("x_box axis {i} has count 0"));
            }
            if !(a.min <= a.max) {
                return Err(format!("x_box axis {i} has min > max"));
            }
        }
        for p in &self.points {
            if p.x.len() != d || p.y.len() != d {
                return Err(format!("explicit point {p:?} does not have {d} components"));
            }
        }
        if self.y_sampling.count == 0 {
            return Err("y_sampling.count must be at least 1".into());
        }
        if let Some(g) = &self.geodesic {
            if g.x.len() != d || g.y.len() != d {
                return Err(format!("geodesic initial data must have {d} components"));
            }
        }
        if !(self.average.fd_step > 0.0) || !(self.average.quadrature_tol > 0.0) || self.average.nodes < 2 {
            return Err("average needs fd_step > 0, quadrature_tol > 0 and nodes >= 2".into());
        }
        if self.berwald.samples == 0 {
            return Err("berwald.samples must be at least 1".into());
        }
        Ok(())
    }

    /// Base points of the lattice, last axis fastest.
    pub fn lattice(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = vec![vec![]];
        for axis in &self.x_box {
            let vals = axis.values();
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        if self.x_box.is_empty() {
            out.clear();
        }
        out
    }
}
