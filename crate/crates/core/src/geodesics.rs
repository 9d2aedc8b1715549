//! Geodesics as solutions of `ẍ^i + 2G^i(x, ẋ) = 0`, integrated with the
//! classical fixed-step fourth-order Runge–Kutta scheme.

use serde::Serialize;

use crate::cones::{self, CausalClass};
use crate::error::{Error, Result};
use crate::geometry::spray_values;
use crate::metrics::{eval_energy, Metric};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicState {
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `L(γ, γ̇)`.
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitKind {
    /// Left the causal cone of the initial velocity, or hit its non-smooth locus.
    Cone,
    /// Left the coordinate chart.
    Chart,
    /// Reached a point where the spray is undefined (degenerate or non-smooth).
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exit {
    pub kind: ExitKind,
    /// Parameter of the last accepted sample.
    pub s: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub exit: Option<Exit>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories start with the initial sample")
    }

    /// Header and rows `s, x0..xn, y0..yn, L`.
    pub fn csv_header(&self) -> Vec<String> {
        let d = self.samples[0].x.len();
        let mut h = vec!["s".to_string()];
        h.extend((0..d).map(|i| format!("x{i}")));
        h.extend((0..d).map(|i| format!("y{i}")));
        h.push("L".into());
        h
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.samples.iter().map(|p| {
            let mut r = vec![p.s];
            r.extend(&p.x);
            r.extend(&p.y);
            r.push(p.l);
            r
        })
    }
}

fn exit_for(e: &Error) -> ExitKind {
    match e {
        Error::Chart(_) => ExitKind::Chart,
        Error::NonSmooth(_) | Error::Domain { .. } => ExitKind::Cone,
        _ => ExitKind::Singular,
    }
}

/// `(ẋ, ẏ) = (y, -2G(x, y))`.
fn rhs(metric: &dyn Metric, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = spray_values(metric, x, y)?;
    Ok((y.to_vec(), g.into_iter().map(|v| -2.0 * v).collect()))
}

fn axpy(a: &[f64], h: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u + h * v).collect()
}

fn rk4_step(metric: &dyn Metric, x: &[f64], y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (k1x, k1y) = rhs(metric, x, y)?;
    let (k2x, k2y) = rhs(metric, &axpy(x, h / 2.0, &k1x), &axpy(y, h / 2.0, &k1y))?;
    let (k3x, k3y) = rhs(metric, &axpy(x, h / 2.0, &k2x), &axpy(y, h / 2.0, &k2y))?;
    let (k4x, k4y) = rhs(metric, &axpy(x, h, &k3x), &axpy(y, h, &k3y))?;
    let combine = |v: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..v.len()).map(|i| v[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])).collect()
    };
    Ok((combine(x, &k1x, &k2x, &k3x, &k4x), combine(y, &k1y, &k2y, &k3y, &k4y)))
}

/// Integrate from `initial.s` to `s_end` with a fixed `step`.
///
/// Inadmissible initial data is an error. Once under way, leaving the chart,
/// the cone of the initial velocity or the smooth region truncates the
/// trajectory at the last good sample and records why.
pub fn integrate(metric: &dyn Metric, initial: &GeodesicState, s_end: f64, step: f64) -> Result<Trajectory> {
    let d = metric.dimension();
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidSpec(format!("step must be positive, got {step}")));
    }
    if initial.x.len() != d || initial.y.len() != d {
        return Err(Error::InvalidSpec(format!("initial data must have {d} components")));
    }
    if !metric.smooth_at(&initial.x, &initial.y) {
        return Err(Error::NonSmooth(format!(
            "initial velocity {:?} lies where L is not twice differentiable",
            initial.y
        )));
    }
    rhs(metric, &initial.x, &initial.y)?;
    let l0 = eval_energy(metric, &initial.x, &initial.y)?;
    let start_class = metric
        .splitting(&initial.x, &initial.y[1..])
        .and_then(|_| cones::classify(metric, &initial.x, &initial.y).ok())
        .map(|c| c.class);
    let mut samples = vec![Sample { s: initial.s, x: initial.x.clone(), y: initial.y.clone(), l: l0 }];
    let steps = ((s_end - initial.s) / step).round().max(0.0) as usize;
    let mut exit = None;
    for n in 1..=steps {
        let prev = samples.last().unwrap();
        let (x, y) = match rk4_step(metric, &prev.x, &prev.y, step) {
            Ok(v) => v,
            Err(e) => {
                exit = Some(Exit { kind: exit_for(&e), s: prev.s, reason: e.to_string() });
                break;
            }
        };
        let s = initial.s + n as f64 * step;
        if let Some(reason) = left_cone(metric, start_class, &x, &y) {
            exit = Some(Exit { kind: ExitKind::Cone, s: prev.s, reason });
            break;
        }
        let l = match eval_energy(metric, &x, &y) {
            Ok(l) => l,
            Err(e) => {
                exit = Some(Exit { kind: exit_for(&e), s: prev.s, reason: e.to_string() });
                break;
            }
        };
        samples.push(Sample { s, x, y, l });
    }
    Ok(Trajectory { samples, exit })
}

fn left_cone(metric: &dyn Metric, start: Option<CausalClass>, x: &[f64], y: &[f64]) -> Option<String> {
    if !metric.smooth_at(x, y) {
        return Some("velocity reached the non-smooth locus of L".into());
    }
    let start = start?;
    if !start.is_timelike() {
        return None;
    }
    match cones::classify(metric, x, y) {
        Ok(c) if c.class == start => None,
        Ok(c) => Some(format!("causal class changed from {start:?} to {:?}", c.class)),
        Err(e) => Some(e.to_string()),
    }
}

/// `max |L(γ(s), γ̇(s)) - L(γ(0), γ̇(0))|`.
pub fn conservation_check(t: &Trajectory) -> f64 {
    let l0 = t.samples[0].l;
    t.samples.iter().fold(0.0, |m, p| m.max((p.l - l0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricSpec;

    #[test]
    fn minkowski_lines_are_straight() {
        let m = MetricSpec::minkowski(3);
        let init = GeodesicState { s: 0.0, x: vec![0.0, 1.0, 2.0], y: vec![1.0, 0.25, -0.5] };
        let t = integrate(&m, &init, 1.0, 0.125).unwrap();
        assert_eq!(t.samples.len(), 9);
        assert_eq!(t.last().x, vec![1.0, 1.25, 1.5]);
        assert_eq!(conservation_check(&t), 0.0);
        assert!(t.exit.is_none());
    }

    #[test]
    fn radial_infall_stops_at_horizon() {
        let m = MetricSpec::schwarzschild(1.0);
        let init = GeodesicState {
            s: 0.0,
            x: vec![0.0, 3.0, std::f64::consts::FRAC_PI_2, 0.0],
            y: vec![1.0, -0.3, 0.0, 0.0],
        };
        let t = integrate(&m, &init, 100.0, 0.01).unwrap();
        assert!(t.exit.is_some());
        assert!(t.last().x[1] > 2.0);
    }

    #[test]
    fn non_smooth_initial_velocity_refused() {
        let m = MetricSpec::rutz(1.0, 0.01);
        let init = GeodesicState {
            s: 0.0,
            x: vec![0.0, 6.0, std::f64::consts::FRAC_PI_2, 0.0],
            y: vec![1.0, 0.2, 0.0, 0.0],
        };
        assert!(matches!(integrate(&m, &init, 1.0, 0.1), Err(Error::NonSmooth(_))));
    }

    #[test]
    fn csv_layout() {
        let m = MetricSpec::minkowski(2);
        let t = integrate(&m, &GeodesicState { s: 0.0, x: vec![0.0, 0.0], y: vec![1.0, 0.5] }, 0.1, 0.1).unwrap();
        assert_eq!(t.csv_header(), vec!["s", "x0", "x1", "y0", "y1", "L"]);
        assert_eq!(t.csv_rows().next().unwrap(), vec![0.0, 0.0, 0.0, 1.0, 0.5, -0.75]);
    }
}
