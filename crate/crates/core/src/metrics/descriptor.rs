use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Drift, MatrixField, Metric, MetricSpec, OneForm, ScalarField};
use crate::error::{Error, Result};

/// JSON form of a metric: `{"family": .., "dimension": .., "params": {..}}`.
///
/// Parameters per family:
///
/// | family | params |
/// |---|---|
/// | `lorentzian_quadratic` | matrix |
/// | `riemannian_base` | matrix |
/// | `randers_base` | `{"a": matrix, "beta": [field..]}` |
/// | `f_omega` | `{"lambda": field, "omega": [field..], "base": descriptor}` |
/// | `g_plus_beta` | `{"lambda": field, "beta": [field..], "base": descriptor}` |
/// | `stationary_splitting` | `{"lambda": field, "drift": drift, "base": descriptor}` |
/// | `standard_static_product` | `{"base": descriptor}` |
/// | `f_omega_static` | `{"lambda": field, "omega": [field..], "base": descriptor}` |
/// | `rutz_schwarzschild` | `{"mass": m, "epsilon": ε}` |
///
/// A matrix is `{"preset": name}` with `name` one of `minkowski`, `euclidean`,
/// `schwarzschild` (plus `"mass"`), `round_sphere` or `sphere_times_line`
/// (plus `"radius"`), or `{"matrix": [[field..]..]}`. A drift is
/// `{"one_form": [field..]}` or `{"norm": {"factor": field, "metric": matrix}}`.
/// A field is a number or `{"terms": [{"coeff": c, "powers": [..]}]}`. Fields
/// of splitting families use the spatial coordinates only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub family: String,
    pub dimension: usize,
    #[serde(default)]
    pub params: Value,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixParams {
    Preset {
        preset: String,
        #[serde(default)]
        mass: Option<f64>,
        #[serde(default)]
        radius: Option<f64>,
    },
    Explicit {
        matrix: Vec<Vec<ScalarField>>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandersParams {
    a: Value,
    beta: OneForm,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftedParams {
    #[serde(default = "unit")]
    lambda: ScalarField,
    #[serde(alias = "beta")]
    omega: OneForm,
    base: MetricDescriptor,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum DriftParams {
    OneForm(OneForm),
    Norm { factor: ScalarField, metric: Value },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SplittingParams {
    #[serde(default = "unit")]
    lambda: ScalarField,
    drift: Option<DriftParams>,
    base: MetricDescriptor,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StaticParams {
    base: MetricDescriptor,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RutzParams {
    mass: f64,
    #[serde(default)]
    epsilon: f64,
}

fn unit() -> ScalarField {
    ScalarField::constant(1.0)
}

fn parse<T: for<'de> Deserialize<'de>>(family: &str, v: &Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::InvalidSpec(format!("{family} params: {e}")))
}

fn matrix(family: &str, v: &Value, dim: usize) -> Result<MatrixField> {
    let m = match parse::<MatrixParams>(family, v)? {
        MatrixParams::Explicit { matrix } => MatrixField::Explicit { matrix },
        MatrixParams::Preset { preset, mass, radius } => {
            let need = |what: &str, v: Option<f64>| {
                v.ok_or_else(|| Error::InvalidSpec(format!("preset {preset} needs \"{what}\"")))
            };
            match preset.as_str() {
                "minkowski" => MatrixField::Minkowski { dim },
                "euclidean" => MatrixField::Euclidean { dim },
                "schwarzschild" => MatrixField::Schwarzschild { mass: need("mass", mass)? },
                "round_sphere" => MatrixField::RoundSphere { radius: need("radius", radius)? },
                "sphere_times_line" => MatrixField::SphereTimesLine { radius: need("radius", radius)? },
                other => return Err(Error::InvalidSpec(format!("unknown matrix preset {other}"))),
            }
        }
    };
    if m.dim() != dim {
        return Err(Error::InvalidSpec(format!(
            "{family}: matrix has dimension {}, descriptor says {dim}",
            m.dim()
        )));
    }
    Ok(m)
}

impl MetricDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    /// Build and validate the metric.
    pub fn to_spec(&self) -> Result<MetricSpec> {
        let f = self.family.as_str();
        let d = self.dimension;
        let p = &self.params;
        let spec = match f {
            "lorentzian_quadratic" => MetricSpec::LorentzianQuadratic { h: matrix(f, p, d)? },
            "riemannian_base" => MetricSpec::RiemannianBase { a: matrix(f, p, d)? },
            "randers_base" => {
                let r: RandersParams = parse(f, p)?;
                MetricSpec::RandersBase { a: matrix(f, &r.a, d)?, beta: r.beta }
            }
            "f_omega" | "g_plus_beta" | "f_omega_static" => {
                let s: ShiftedParams = parse(f, p)?;
                let base = Box::new(s.base.to_spec()?);
                match f {
                    "f_omega" => MetricSpec::FOmega { lambda: s.lambda, omega: s.omega, base },
                    "g_plus_beta" => MetricSpec::GPlusBeta { lambda: s.lambda, beta: s.omega, base },
                    _ => MetricSpec::FOmegaStatic { lambda: s.lambda, omega: s.omega, base },
                }
            }
            "stationary_splitting" => {
                let s: SplittingParams = parse(f, p)?;
                let drift = match s.drift {
                    None => Drift::OneForm(OneForm::zero(d.saturating_sub(1))),
                    Some(DriftParams::OneForm(w)) => Drift::OneForm(w),
                    Some(DriftParams::Norm { factor, metric }) => Drift::Norm {
                        factor,
                        metric: matrix(f, &metric, d.saturating_sub(1))?,
                    },
                };
                MetricSpec::StationarySplitting {
                    lambda: s.lambda,
                    drift,
                    base: Box::new(s.base.to_spec()?),
                }
            }
            "standard_static_product" => {
                let s: StaticParams = parse(f, p)?;
                MetricSpec::StandardStaticProduct { base: Box::new(s.base.to_spec()?) }
            }
            "rutz_schwarzschild" => {
                let r: RutzParams = parse(f, p)?;
                MetricSpec::RutzSchwarzschild { mass: r.mass, epsilon: r.epsilon }
            }
            other => return Err(Error::InvalidSpec(format!("unknown metric family {other}"))),
        };
        if spec.dimension() != d {
            return Err(Error::InvalidSpec(format!(
                "{f} has dimension {}, descriptor says {d}",
                spec.dimension()
            )));
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_family() {
        let cases = [
            r#"{"family":"lorentzian_quadratic","dimension":4,"params":{"preset":"schwarzschild","mass":1}}"#,
            r#"{"family":"riemannian_base","dimension":2,"params":{"preset":"round_sphere","radius":2}}"#,
            r#"{"family":"randers_base","dimension":2,"params":{"a":{"preset":"euclidean"},"beta":[0.3,0]}}"#,
            r#"{"family":"f_omega","dimension":2,"params":{"lambda":1,"omega":[0.3,0],
                "base":{"family":"riemannian_base","dimension":2,"params":{"preset":"euclidean"}}}}"#,
            r#"{"family":"stationary_splitting","dimension":3,"params":{"lambda":1,
                "drift":{"one_form":[{"terms":[{"coeff":1,"powers":[0,1]}]},0]},
                "base":{"family":"riemannian_base","dimension":2,"params":{"preset":"euclidean"}}}}"#,
            r#"{"family":"stationary_splitting","dimension":3,"params":{
                "drift":{"norm":{"factor":0.2,"metric":{"preset":"euclidean"}}},
                "base":{"family":"riemannian_base","dimension":2,"params":{"preset":"euclidean"}}}}"#,
            r#"{"family":"standard_static_product","dimension":3,"params":{
                "base":{"family":"riemannian_base","dimension":2,"params":{"matrix":[[1,0],[0,2]]}}}}"#,
            r#"{"family":"f_omega_static","dimension":3,"params":{"lambda":1,"omega":[0.3,0],
                "base":{"family":"riemannian_base","dimension":2,"params":{"preset":"euclidean"}}}}"#,
            r#"{"family":"rutz_schwarzschild","dimension":4,"params":{"mass":1,"epsilon":0.01}}"#,
        ];
        for c in cases {
            let spec = MetricDescriptor::from_json(c).unwrap().to_spec().unwrap();
            assert!(spec.dimension() >= 2);
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        let bad = [
            r#"{"family":"bogus","dimension":2,"params":{}}"#,
            r#"{"family":"riemannian_base","dimension":3,"params":{"preset":"round_sphere","radius":1}}"#,
            r#"{"family":"rutz_schwarzschild","dimension":4,"params":{"mass":-1}}"#,
            r#"{"family":"riemannian_base","dimension":5,"params":{"preset":"euclidean"}}"#,
            r#"{"family":"standard_static_product","dimension":3,"params":{
                "base":{"family":"lorentzian_quadratic","dimension":2,"params":{"preset":"minkowski"}}}}"#,
        ];
        for c in bad {
            let r = MetricDescriptor::from_json(c).and_then(|d| d.to_spec());
            assert!(matches!(r, Err(Error::InvalidSpec(_))), "{c}");
        }
    }
}
