//! One function per subcommand. Each returns the per-point records in scan
//! order and a summary; nothing here touches the file system.

use finsler::averaging::{self, AverageOptions};
use finsler::berwald;
use finsler::cones::{self, CausalClass};
use finsler::geodesics::{self, GeodesicState, Trajectory};
use finsler::geometry;
use finsler::metrics::{MetricSpec, TangentPoint};
use finsler::sampling;
use finsler::symmetry;
use finsler::{Error, Metric, MetricKind};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde_json::{json, Map, Value};

use crate::config::{ConeFilter, Config, FieldSpec, SampleMode, YSampling};
use crate::points::{base_points, fiber_vectors, tangent_points};
use crate::ConfigError;

pub struct Outcome {
    pub passed: bool,
    pub summary: Map<String, Value>,
    pub points: Vec<Value>,
    pub trajectory: Option<Trajectory>,
}

pub struct Context<'a> {
    pub config: &'a Config,
    pub spec: &'a MetricSpec,
    pub pool: &'a ThreadPool,
}

impl Context<'_> {
    fn par_map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
        self.pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect())
    }
}

/// Running maximum, mean and point counts.
#[derive(Default)]
struct Tally {
    max: f64,
    sum: f64,
    evaluated: usize,
    skipped: usize,
    failed: usize,
}

impl Tally {
    fn add(&mut self, v: f64) {
        self.max = self.max.max(v.abs());
        self.sum += v.abs();
        self.evaluated += 1;
    }

    fn mean(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            self.sum / self.evaluated as f64
        }
    }

    fn count(&mut self, record: &Value) {
        match record["status"].as_str() {
            Some("skipped") => self.skipped += 1,
            Some("failed") => self.failed += 1,
            _ => {}
        }
    }

    fn into_summary(self, prefix: &str) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert(format!("max_{prefix}"), json!(self.max));
        m.insert(format!("mean_{prefix}"), json!(self.mean()));
        m.insert("evaluated".into(), json!(self.evaluated));
        m.insert("skipped".into(), json!(self.skipped));
        m.insert("failed".into(), json!(self.failed));
        m
    }
}

fn skipped(e: &Error) -> bool {
    e.is_inadmissible() || matches!(e, Error::NullDirection(_))
}

fn record(index: usize, x: &[f64], y: Option<&[f64]>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("index".into(), json!(index));
    m.insert("x".into(), json!(x));
    if let Some(y) = y {
        m.insert("y".into(), json!(y));
    }
    m
}

fn error_record(mut m: Map<String, Value>, e: &Error) -> Value {
    m.insert("status".into(), json!(if skipped(e) { "skipped" } else { "failed" }));
    m.insert("reason".into(), json!(e.to_string()));
    Value::Object(m)
}

fn ok_record(mut m: Map<String, Value>, fields: Value) -> Value {
    m.insert("status".into(), json!("ok"));
    if let Value::Object(f) = fields {
        m.extend(f);
    }
    Value::Object(m)
}

fn finish(passed: bool, summary: Map<String, Value>, points: Vec<Value>) -> Outcome {
    Outcome { passed, summary, points, trajectory: None }
}

pub fn curvature(ctx: &Context) -> Outcome {
    let pts = tangent_points(ctx.config, ctx.spec);
    let tol = ctx.config.tolerances.dual_path;
    let out = ctx.par_map(&pts, |i, p| {
        let m = record(i, &p.x, Some(&p.y));
        match geometry::curvature(ctx.spec, p) {
            Ok(r) => {
                let y2: f64 = p.y.iter().map(|v| v * v).sum();
                let ok = r.dual_path_gap <= tol * r.r2_scale() + 1e-12 * (1.0 + y2);
                let v = serde_json::to_value(&r).expect("report serializes");
                (Some((r.ricci_scalar, r.dual_path_gap, ok)), ok_record(m, v))
            }
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let mut ricci = Tally::default();
    let mut gap = 0.0_f64;
    let mut consistent = true;
    let mut points = Vec::with_capacity(out.len());
    for (v, rec) in out {
        ricci.count(&rec);
        if let Some((r, g, ok)) = v {
            ricci.add(r);
            gap = gap.max(g);
            consistent &= ok;
        }
        points.push(rec);
    }
    let passed = consistent && ricci.failed == 0 && ricci.evaluated > 0;
    let mut s = ricci.into_summary("abs_ricci_scalar");
    s.insert("max_dual_path_gap".into(), json!(gap));
    finish(passed, s, points)
}

pub fn fieldeq(ctx: &Context) -> Outcome {
    let pts = tangent_points(ctx.config, ctx.spec);
    let out = ctx.par_map(&pts, |i, p| {
        let m = record(i, &p.x, Some(&p.y));
        match geometry::curvature_with_fieldeq(ctx.spec, p) {
            Ok(r) => {
                let fe = r.fieldeq.expect("requested");
                let v = json!({
                    "l": r.l,
                    "ricci_scalar": r.ricci_scalar,
                    "residual": fe.residual,
                    "normalized": fe.normalized,
                    "dual_path_gap": r.dual_path_gap,
                });
                (Some((fe.residual, r.ricci_scalar)), ok_record(m, v))
            }
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let mut res = Tally::default();
    let mut ricci = 0.0_f64;
    let mut points = Vec::with_capacity(out.len());
    for (v, rec) in out {
        res.count(&rec);
        if let Some((r, rs)) = v {
            res.add(r);
            ricci = ricci.max(rs.abs());
        }
        points.push(rec);
    }
    let passed = res.failed == 0 && res.evaluated > 0 && res.max <= ctx.config.tolerances.fieldeq;
    let mut s = res.into_summary("abs_residual");
    s.insert("max_abs_ricci_scalar".into(), json!(ricci));
    s.insert("tolerance".into(), json!(ctx.config.tolerances.fieldeq));
    finish(passed, s, points)
}

fn class_name(c: CausalClass) -> Value {
    serde_json::to_value(c).expect("class serializes")
}

pub fn classify(ctx: &Context) -> Outcome {
    let pts = tangent_points(ctx.config, ctx.spec);
    let out = ctx.par_map(&pts, |i, p| {
        let m = record(i, &p.x, Some(&p.y));
        match cones::classify(ctx.spec, &p.x, &p.y) {
            Ok(c) => {
                let y2: f64 = p.y.iter().map(|v| v * v).sum();
                let agrees = match c.class {
                    CausalClass::TimelikeFuture | CausalClass::TimelikeOther => c.l_value < 0.0,
                    CausalClass::Spacelike => c.l_value > 0.0,
                    CausalClass::Null => c.l_value.abs() <= 1e-8 * y2,
                    CausalClass::NonSmoothLocus | CausalClass::Zero => true,
                };
                let (tp, tm) = c.boundary_tau.unwrap_or((f64::NAN, f64::NAN));
                let v = json!({
                    "class": class_name(c.class),
                    "l": c.l_value,
                    "tau_plus": tp,
                    "tau_minus": tm,
                    "agrees_with_sign_of_l": agrees,
                });
                (Some((c.class, agrees)), ok_record(m, v))
            }
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let mut counts: Map<String, Value> = Map::new();
    let mut disagreements = 0;
    let mut tally = Tally::default();
    let mut points = Vec::with_capacity(out.len());
    for (v, rec) in out {
        tally.count(&rec);
        if let Some((class, agrees)) = v {
            tally.evaluated += 1;
            let key = class_name(class).as_str().unwrap_or_default().to_string();
            let n = counts.get(&key).and_then(Value::as_u64).unwrap_or(0);
            counts.insert(key, json!(n + 1));
            if !agrees {
                disagreements += 1;
            }
        }
        points.push(rec);
    }
    let mut passed = disagreements == 0 && tally.failed == 0 && tally.evaluated > 0;
    let mut s = Map::new();
    s.insert("classes".into(), Value::Object(counts));
    s.insert("disagreements".into(), json!(disagreements));
    s.insert("evaluated".into(), json!(tally.evaluated));
    s.insert("failed".into(), json!(tally.failed));
    if let Some(cv) = &ctx.config.convexity {
        let xs = base_points(ctx.config);
        let probes = ctx.par_map(&xs, |i, x| {
            let mut rng = sampling::rng(ctx.config.y_sampling.seed, (1 << 32) + i as u64);
            cones::cone_convexity_probe(ctx.spec, x, cv.pairs, cv.with_past, cv.cross_pairs, &mut rng)
        });
        let mut violations = 0;
        let mut reports = Vec::new();
        for (x, p) in xs.iter().zip(probes) {
            match p {
                Ok(r) => {
                    violations += r.violations;
                    reports.push(json!({"x": x, "report": r}));
                }
                Err(e) => {
                    passed = false;
                    reports.push(json!({"x": x, "error": e.to_string()}));
                }
            }
        }
        passed &= violations == 0;
        s.insert("convexity".into(), json!({"violations": violations, "probes": reports}));
    }
    finish(passed, s, points)
}

fn vector_field(ctx: &Context) -> Result<finsler::metrics::VectorField, ConfigError> {
    let spec = ctx.config.vector_field.clone().unwrap_or(FieldSpec::Coordinate(0));
    spec.build(ctx.spec.dimension()).map_err(ConfigError)
}

pub fn killing(ctx: &Context) -> Result<Outcome, ConfigError> {
    let k = vector_field(ctx)?;
    let pts = tangent_points(ctx.config, ctx.spec);
    let out = ctx.par_map(&pts, |i, p| {
        let m = record(i, &p.x, Some(&p.y));
        match symmetry::killing_residual(ctx.spec, &k, p) {
            Ok(r) => (Some(r), ok_record(m, json!({"residual": r}))),
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let mut t = Tally::default();
    let mut points = Vec::with_capacity(out.len());
    for (v, rec) in out {
        t.count(&rec);
        if let Some(r) = v {
            t.add(r);
        }
        points.push(rec);
    }
    let passed = t.failed == 0 && t.evaluated > 0 && t.max <= ctx.config.tolerances.killing;
    let mut s = t.into_summary("abs_residual");
    s.insert("tolerance".into(), json!(ctx.config.tolerances.killing));
    Ok(finish(passed, s, points))
}

pub fn static_check(ctx: &Context) -> Result<Outcome, ConfigError> {
    let k = vector_field(ctx)?;
    let xs = base_points(ctx.config);
    let out = ctx.par_map(&xs, |i, x| {
        let m = record(i, x, None);
        match symmetry::static_frobenius_residual(ctx.spec, &k, x) {
            Ok(r) => {
                let res = r.residual;
                (Some(res), ok_record(m, serde_json::to_value(r).expect("serializes")))
            }
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let mut t = Tally::default();
    let mut points = Vec::with_capacity(out.len());
    for (v, rec) in out {
        t.count(&rec);
        if let Some(r) = v {
            t.add(r);
        }
        points.push(rec);
    }
    let passed = t.failed == 0 && t.skipped == 0 && t.evaluated > 0 && t.max <= ctx.config.tolerances.frobenius;
    let mut s = t.into_summary("frobenius_residual");
    s.insert("tolerance".into(), json!(ctx.config.tolerances.frobenius));
    Ok(finish(passed, s, points))
}

fn berwald_scan(ctx: &Context, metric: &dyn Metric, xs: &[Vec<f64>]) -> Vec<(Option<bool>, Value)> {
    let samples = ctx.config.berwald.samples;
    let seed = ctx.config.y_sampling.seed;
    ctx.par_map(xs, |i, x| {
        let m = record(i, x, None);
        let mut rng = sampling::rng(seed, i as u64);
        match berwald::is_berwald(metric, x, samples, &mut rng) {
            Ok(r) => (Some(r.berwald), ok_record(m, serde_json::to_value(r).expect("serializes"))),
            Err(e) => (None, error_record(m, &e)),
        }
    })
}

pub fn berwald(ctx: &Context) -> Outcome {
    let xs = base_points(ctx.config);
    let out = berwald_scan(ctx, ctx.spec, &xs);
    let mut t = Tally::default();
    let mut all = true;
    let mut points = Vec::with_capacity(out.len());
    for (v, rec) in out {
        t.count(&rec);
        if let Some(b) = v {
            t.evaluated += 1;
            all &= b;
        }
        points.push(rec);
    }
    let passed = all && t.failed == 0 && t.skipped == 0 && t.evaluated > 0;
    let mut s = Map::new();
    s.insert("berwald".into(), json!(all));
    s.insert("evaluated".into(), json!(t.evaluated));
    s.insert("failed".into(), json!(t.failed + t.skipped));
    finish(passed, s, points)
}

/// The positive-definite metric to average and the projection of scan points onto its chart.
fn averaged_base(spec: &MetricSpec) -> Result<(MetricSpec, usize), ConfigError> {
    if spec.kind() == MetricKind::Base {
        return Ok((spec.clone(), 0));
    }
    spec.spatial_base()
        .map(|b| (b, 1))
        .ok_or_else(|| ConfigError(format!("{} has no positive-definite base to average", spec.family())))
}

fn average_options(cfg: &Config) -> AverageOptions {
    AverageOptions {
        tol: cfg.average.quadrature_tol,
        start_nodes: cfg.average.nodes,
        max_nodes: cfg.average.max_nodes,
        rotation: None,
        measure: cfg.average.measure,
    }
}

fn reference_direction(base: &MetricSpec, seed: u64, x: &[f64], stream: u64) -> Vec<f64> {
    let ys = YSampling { mode: SampleMode::Random, count: 1, seed, cone: ConeFilter::Any };
    fiber_vectors(base, &ys, x, stream).pop().expect("random fiber vector")
}

fn max_gap(a: &[Vec<Vec<f64>>], b: &[Vec<Vec<f64>>]) -> f64 {
    a.iter()
        .flatten()
        .flatten()
        .zip(b.iter().flatten().flatten())
        .fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

struct AverageResult {
    christoffel_gap: f64,
    ricci_gap: f64,
    ricci_max: f64,
    record: Value,
}

fn average_at(ctx: &Context, base: &MetricSpec, i: usize, x: &[f64]) -> Result<AverageResult, Error> {
    let cfg = ctx.config;
    let opts = average_options(cfg);
    let y = reference_direction(base, cfg.y_sampling.seed, x, i as u64);
    let h = averaging::average_metric(base, x, &opts)?;
    let ch = averaging::christoffel_of_h(base, x, cfg.average.fd_step, &opts)?;
    let chern = geometry::chern_symbols(base, &TangentPoint::new(x.to_vec(), y.clone()))?;
    let ric = averaging::ricci_of_h(base, x, &y, cfg.average.fd_step, &opts)?;
    let christoffel_gap = max_gap(&ch.gamma, &chern);
    let ricci_max = ric.ricci.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let record = json!({
        "h": h,
        "christoffel_h": ch,
        "chern": chern,
        "christoffel_gap": christoffel_gap,
        "ricci_h": ric,
    });
    Ok(AverageResult { christoffel_gap, ricci_gap: ric.difference, ricci_max, record })
}

pub fn average(ctx: &Context) -> Result<Outcome, ConfigError> {
    let (base, skip) = averaged_base(ctx.spec)?;
    if !(2..=3).contains(&base.dimension()) {
        return Err(ConfigError(format!("averaging needs a 2 or 3 dimensional base, got {}", base.dimension())));
    }
    let xs: Vec<Vec<f64>> = base_points(ctx.config).into_iter().map(|x| x[skip..].to_vec()).collect();
    let out = ctx.par_map(&xs, |i, x| {
        let m = record(i, x, None);
        match average_at(ctx, &base, i, x) {
            Ok(r) => (Some((r.christoffel_gap, r.ricci_gap)), ok_record(m, r.record)),
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let tol = &ctx.config.tolerances;
    let (mut cg, mut rg) = (0.0_f64, 0.0_f64);
    let mut t = Tally::default();
    let mut points = Vec::with_capacity(out.len());
    for (v, rec) in out {
        t.count(&rec);
        if let Some((c, r)) = v {
            t.evaluated += 1;
            cg = cg.max(c);
            rg = rg.max(r);
        }
        points.push(rec);
    }
    let passed =
        t.failed == 0 && t.skipped == 0 && t.evaluated > 0 && cg <= tol.christoffel && rg <= tol.ricci_h;
    let mut s = Map::new();
    s.insert("max_christoffel_gap".into(), json!(cg));
    s.insert("max_ricci_gap".into(), json!(rg));
    s.insert("evaluated".into(), json!(t.evaluated));
    s.insert("failed".into(), json!(t.failed + t.skipped));
    Ok(finish(passed, s, points))
}

pub fn geodesic(ctx: &Context) -> Result<Outcome, ConfigError> {
    let g = ctx
        .config
        .geodesic
        .as_ref()
        .ok_or_else(|| ConfigError("geodesic needs a \"geodesic\" section".into()))?;
    let init = GeodesicState { s: 0.0, x: g.x.clone(), y: g.y.clone() };
    let traj = geodesics::integrate(ctx.spec, &init, g.s_end, g.step)
        .map_err(|e| ConfigError(format!("initial data refused: {e}")))?;
    let conservation = geodesics::conservation_check(&traj);
    let span = (traj.last().s - init.s).abs().max(1.0);
    let passed = conservation <= ctx.config.tolerances.conservation * span;
    let mut s = Map::new();
    s.insert("conservation".into(), json!(conservation));
    s.insert("s_reached".into(), json!(traj.last().s));
    s.insert("samples".into(), json!(traj.samples.len()));
    s.insert("step".into(), json!(g.step));
    s.insert("exit".into(), serde_json::to_value(&traj.exit).expect("serializes"));
    let points = traj
        .samples
        .iter()
        .enumerate()
        .map(|(i, p)| json!({"index": i, "s": p.s, "x": p.x, "y": p.y, "l": p.l}))
        .collect();
    Ok(Outcome { passed, summary: s, points, trajectory: Some(traj) })
}

fn stage(name: &str, passed: bool, value: f64, tolerance: Option<f64>, evaluated: usize) -> Value {
    json!({"stage": name, "passed": passed, "max": value, "tolerance": tolerance, "evaluated": evaluated})
}

fn tag(stage: &str, v: Value) -> Value {
    let mut m = Map::new();
    m.insert("stage".into(), json!(stage));
    if let Value::Object(o) = v {
        m.extend(o);
    }
    Value::Object(m)
}

/// The chain Berwald base, `R = 0`, field equation, `Ric(h) = 0` on a standard static product.
pub fn verify(ctx: &Context) -> Result<Outcome, ConfigError> {
    let MetricSpec::StandardStaticProduct { base } = ctx.spec else {
        return Err(ConfigError(format!(
            "verify needs a standard_static_product metric, got {}",
            ctx.spec.family()
        )));
    };
    let base = base.as_ref();
    let cfg = ctx.config;
    let tol = &cfg.tolerances;
    let xs: Vec<Vec<f64>> = base_points(cfg).into_iter().map(|x| x[1..].to_vec()).collect();
    let mut points = Vec::new();
    let mut stages = Vec::new();

    let bw = berwald_scan(ctx, base, &xs);
    let mut ok = !bw.is_empty();
    let mut third = 0.0_f64;
    for (v, rec) in &bw {
        ok &= *v == Some(true);
        third = third.max(rec["max_third_deriv"].as_f64().unwrap_or(0.0));
        points.push(tag("berwald", rec.clone()));
    }
    stages.push(stage("berwald", ok, third, None, bw.len()));

    let mut sampled = cfg.clone();
    if sampled.y_sampling.cone == ConeFilter::Any {
        sampled.y_sampling.cone = ConeFilter::Future;
    }
    let pts = tangent_points(&sampled, ctx.spec);
    let out = ctx.par_map(&pts, |i, p| {
        let m = record(i, &p.x, Some(&p.y));
        match geometry::curvature_with_fieldeq(ctx.spec, p) {
            Ok(r) => {
                let fe = r.fieldeq.expect("requested");
                let v = json!({"ricci_scalar": r.ricci_scalar, "residual": fe.residual, "l": r.l});
                (Some((r.ricci_scalar, fe.residual)), ok_record(m, v))
            }
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let (mut ricci, mut res) = (Tally::default(), Tally::default());
    for (v, rec) in out {
        ricci.count(&rec);
        if let Some((r, f)) = v {
            ricci.add(r);
            res.add(f);
        }
        points.push(tag("curvature", rec));
    }
    let sound = ricci.failed == 0 && ricci.evaluated > 0;
    stages.push(stage("ricci_scalar", sound && ricci.max <= tol.ricci, ricci.max, Some(tol.ricci), ricci.evaluated));
    stages.push(stage("fieldeq", sound && res.max <= tol.fieldeq, res.max, Some(tol.fieldeq), res.evaluated));

    let av = ctx.par_map(&xs, |i, x| {
        let m = record(i, x, None);
        match average_at(ctx, base, i, x) {
            Ok(r) => (Some(r.ricci_max), ok_record(m, json!({"ricci_h_max": r.ricci_max, "detail": r.record}))),
            Err(e) => (None, error_record(m, &e)),
        }
    });
    let mut rh = Tally::default();
    let mut complete = !av.is_empty();
    for (v, rec) in av {
        match v {
            Some(r) => rh.add(r),
            None => complete = false,
        }
        points.push(tag("ricci_h", rec));
    }
    stages.push(stage("ricci_h", complete && rh.max <= tol.ricci_h, rh.max, Some(tol.ricci_h), rh.evaluated));

    let passed = stages.iter().all(|s| s["passed"] == json!(true));
    let mut s = Map::new();
    s.insert("stages".into(), Value::Array(stages));
    Ok(finish(passed, s, points))
}
