//! Expansion of a config into the scan points.

use finsler::cones::{self, CausalClass};
use finsler::metrics::{MetricSpec, TangentPoint};
use finsler::sampling;
use finsler::{Metric, MetricKind};

use crate::config::{ConeFilter, Config, SampleMode, YSampling};

/// Maximum draws per accepted random vector.
const MAX_DRAWS: usize = 1000;

/// Distinct base points: those of the explicit points, then the lattice.
pub fn base_points(cfg: &Config) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in &cfg.points {
        if !out.contains(&p.x) {
            out.push(p.x.clone());
        }
    }
    out.extend(cfg.lattice());
    out
}

fn accepts(spec: &MetricSpec, filter: ConeFilter, x: &[f64], y: &[f64]) -> bool {
    if y.iter().all(|v| *v == 0.0) {
        return false;
    }
    if filter == ConeFilter::Any {
        return true;
    }
    let Ok(c) = cones::classify(spec, x, y) else { return false };
    match filter {
        ConeFilter::Any => true,
        ConeFilter::Timelike => c.class.is_timelike(),
        ConeFilter::Future => c.class == CausalClass::TimelikeFuture,
        ConeFilter::Past => c.class == CausalClass::TimelikeOther,
        ConeFilter::Spacelike => c.class == CausalClass::Spacelike,
    }
}

/// Fiber vectors at the base point with index `stream`.
pub fn fiber_vectors(spec: &MetricSpec, ys: &YSampling, x: &[f64], stream: u64) -> Vec<Vec<f64>> {
    let d = spec.dimension();
    match ys.mode {
        SampleMode::Lattice => {
            let vals: Vec<f64> = if ys.count == 1 {
                vec![1.0]
            } else {
                (0..ys.count).map(|i| -1.0 + 2.0 * i as f64 / (ys.count - 1) as f64).collect()
            };
            let mut out: Vec<Vec<f64>> = vec![vec![]];
            for _ in 0..d {
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
            out.retain(|y| accepts(spec, ys.cone, x, y));
            out
        }
        SampleMode::Random => {
            let mut rng = sampling::rng(ys.seed, stream);
            let mut out = Vec::with_capacity(ys.count);
            let mut draws = 0;
            while out.len() < ys.count && draws < MAX_DRAWS * ys.count {
                draws += 1;
                let y = match ys.cone {
                    ConeFilter::Future | ConeFilter::Past | ConeFilter::Timelike => {
                        let future = match ys.cone {
                            ConeFilter::Future => true,
                            ConeFilter::Past => false,
                            _ => out.len() % 2 == 0,
                        };
                        match cones::sample_cone_vector(spec, x, future, &mut rng) {
                            Ok(y) => y,
                            Err(_) => continue,
                        }
                    }
                    _ => sampling::gaussian(&mut rng, d),
                };
                if accepts(spec, ys.cone, x, &y) {
                    out.push(y);
                }
            }
            out
        }
    }
}

/// Explicit points followed by the lattice points with their fiber samples.
pub fn tangent_points(cfg: &Config, spec: &MetricSpec) -> Vec<TangentPoint> {
    let mut out = cfg.points.clone();
    for (k, x) in cfg.lattice().into_iter().enumerate() {
        for y in fiber_vectors(spec, &cfg.y_sampling, &x, k as u64) {
            out.push(TangentPoint::new(x.clone(), y));
        }
    }
    out
}

pub fn check_cone_filter(spec: &MetricSpec, ys: &YSampling) -> Result<(), String> {
    if ys.cone != ConeFilter::Any && spec.kind() != MetricKind::Spacetime {
        return Err(format!("cone filter {:?} needs a spacetime metric", ys.cone));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minkowski(ys: &str) -> (Config, MetricSpec) {
        let c = Config::from_json(&format!(
            r#"{{"metric": {{"family": "lorentzian_quadratic", "dimension": 2, "params": {{"preset": "minkowski"}}}},
                "x_box": [{{"min": 0, "max": 1, "count": 2}}, {{"min": 0, "max": 0}}],
                "points": [{{"x": [0, 0], "y": [1, 0]}}], "y_sampling": {ys}}}"#
        ))
        .unwrap();
        let s = c.metric.to_spec().unwrap();
        (c, s)
    }

    #[test]
    fn lattice_fibers_skip_zero_and_honour_the_cone() {
        let (c, s) = minkowski(r#"{"mode": "lattice", "count": 3, "cone": "future"}"#);
        let ys = fiber_vectors(&s, &c.y_sampling, &[0.0, 0.0], 0);
        // future timelike among {-1, 0, 1}²: only (1, 0)
        assert_eq!(ys, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn random_fibers_are_seeded_per_stream() {
        let (c, s) = minkowski(r#"{"count": 5, "seed": 3, "cone": "past"}"#);
        let a = fiber_vectors(&s, &c.y_sampling, &[0.0, 0.0], 1);
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|y| y[0] < -y[1].abs()));
        assert_eq!(a, fiber_vectors(&s, &c.y_sampling, &[0.0, 0.0], 1));
        assert_ne!(a, fiber_vectors(&s, &c.y_sampling, &[0.0, 0.0], 2));
    }

    #[test]
    fn explicit_points_come_first() {
        let (c, s) = minkowski(r#"{"count": 2}"#);
        let pts = tangent_points(&c, &s);
        assert_eq!(pts.len(), 1 + 2 * 2);
        assert_eq!(pts[0].y, vec![1.0, 0.0]);
        assert_eq!(base_points(&c), vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn cone_filters_need_a_spacetime() {
        let ys = YSampling { cone: ConeFilter::Timelike, ..YSampling::default() };
        assert!(check_cone_filter(&MetricSpec::euclidean(2), &ys).is_err());
        assert!(check_cone_filter(&MetricSpec::minkowski(2), &ys).is_ok());
    }
}
