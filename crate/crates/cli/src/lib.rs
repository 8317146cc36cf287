//! The `convexlab` command line: argument parsing, pipelines and reports.

use std::collections::BTreeMap;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use convexlab::bump::{bump_domain_2d, bump_order_choice, GraphDomain2D};
use convexlab::convexity::{classify_point, geometric_convexity_oracle, strong_convexify_with, ConvexifyOptions, OracleVerdict};
use convexlab::exhaust::{max_exhaustion, sublevel_decomposition};
use convexlab::gallery;
use convexlab::hulls::{extreme_samples, f_hull, is_extreme, minkowski_gauge, CompactSet, ExtremeVerdict, FunctionFamily, Shape};
use convexlab::order::{contact_order, DEFAULT_CUTOFF};
use convexlab::{DomainSpec, Error};

pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "convexlab", version, about = "Convexity analysis of implicitly defined domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Number of sample points.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pointwise verdicts and orders at sampled boundary points, plus the segment oracle.
    Classify { domain: String },
    /// Strongly convex defining function (exp(lambda rho) - 1) / lambda.
    Convexify { domain: String },
    /// Hull of a finite set with respect to a function family.
    Hull {
        domain: String,
        /// Points as "x1,x2;y1,y2;...".
        #[arg(long, allow_hyphen_values = true)]
        set: Option<String>,
        /// Random interior points used when --set is absent.
        #[arg(long, default_value_t = 8)]
        random: usize,
        #[arg(long, default_value = "linear")]
        family: String,
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
    /// Extreme-point test at one point, or over sampled boundary points.
    Extreme {
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Convex exhaustion function and its smoothed sublevel sets.
    Exhaust {
        domain: String,
        #[arg(long, default_value = "0.5,1,2", allow_hyphen_values = true)]
        levels: String,
    },
    /// Outward boundary bump near a 2D boundary point.
    Bump {
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Prescribed even order at the new center.
        #[arg(long)]
        order: Option<u32>,
    },
    /// Minkowski gauge of a shape containing the origin.
    Gauge {
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

#[derive(Serialize, Debug, Clone)]
pub struct PointRecord {
    pub location: Vec<f64>,
    pub normal: Vec<f64>,
    pub class: Option<String>,
    pub min_tangential_eigenvalue: Option<f64>,
    pub order: Option<String>,
    /// (s, |rho(P + s t) - rho(P)|) along the direction of highest order.
    pub probes: Option<Vec<(f64, f64)>>,
}

#[derive(Serialize, Debug, Clone)]
pub struct AnalysisReport {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub domain: String,
    pub spec_hash: String,
    pub status: String,
    pub error: Option<String>,
    pub parameters: BTreeMap<String, Value>,
    pub global: BTreeMap<String, Value>,
    pub points: Vec<PointRecord>,
}

impl AnalysisReport {
    fn new(command: &str, shape: &Shape, seed: u64) -> Self {
        let mut r = AnalysisReport {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            domain: shape.name(),
            spec_hash: spec_hash(shape),
            status: "pass".into(),
            error: None,
            parameters: BTreeMap::new(),
            global: BTreeMap::new(),
            points: vec![],
        };
        r.param("seed", seed);
        r
    }

    fn param(&mut self, k: &str, v: impl Serialize) {
        self.parameters.insert(k.into(), json!(v));
    }

    fn put(&mut self, k: &str, v: impl Serialize) {
        self.global.insert(k.into(), json!(v));
    }

    fn negative(&mut self, e: &Error) {
        self.status = "negative".into();
        self.error = Some(e.to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// sha256 of the shape's JSON.
pub fn spec_hash(shape: &Shape) -> String {
    let s = serde_json::to_string(shape).expect("shape serializes");
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Exit status of an error: 2 for mathematical negatives, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConvex { .. }
        | Error::NotConvexPoint { .. }
        | Error::Infeasible { .. }
        | Error::NotStronglyConvex { .. }
        | Error::FlatPoint { .. }
        | Error::PatchNotStronglyConvex(_)
        | Error::NoSupportingHyperplane { .. }
        | Error::OrderIncreased { .. } => 2,
        _ => 1,
    }
}

/// Gallery name, DomainSpec JSON file, or shape JSON file.
pub fn load_shape(arg: &str) -> Result<Shape, Error> {
    if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|e| Error::InvalidInput(format!("{arg}: {e}")))?;
        if let Ok(d) = DomainSpec::from_json(&text) {
            return Ok(Shape::Domain(d));
        }
        return serde_json::from_str(&text).map_err(Error::from);
    }
    gallery::shape(arg)
}

fn parse_point(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number {t:?}"))))
        .collect()
}

fn parse_points(s: &str) -> Result<Vec<Vec<f64>>, Error> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_point).collect()
}

fn csv_rows(rows: &[(Vec<f64>, String)]) -> String {
    let n = rows.first().map_or(0, |r| r.0.len());
    let mut out: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    out.push("label".into());
    let mut s = out.join(",") + "\n";
    for (x, l) in rows {
        let cells: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
        s += &format!("{},{l}\n", cells.join(","));
    }
    s
}

fn domain_of(shape: &Shape) -> Result<&DomainSpec, Error> {
    shape.as_domain().ok_or_else(|| Error::InvalidInput(format!("{} has no defining function", shape.name())))
}

fn order_cutoff(d: &DomainSpec) -> u32 {
    DEFAULT_CUTOFF.min(2 * d.smoothness().min(DEFAULT_CUTOFF / 2))
}

struct Output {
    code: i32,
    body: String,
    /// Extra files written next to --out.
    extra: Vec<(String, String)>,
}

fn done(report: AnalysisReport, code: i32) -> Output {
    Output { code, body: report.to_json(), extra: vec![] }
}

fn classify(shape: &Shape, c: &Common) -> Result<Output, Error> {
    let count = c.points.unwrap_or(100);
    let mut r = AnalysisReport::new("classify", shape, c.seed);
    r.param("points", count);
    r.param("oracle_pairs", 1000);
    let oracle = geometric_convexity_oracle(shape, 1000, c.seed)?;
    let mut code = 0;
    match &oracle {
        OracleVerdict::Convex => r.put("oracle", json!({"verdict": "Convex"})),
        OracleVerdict::NotConvex { a, b, exit } => {
            code = 2;
            r.status = "negative".into();
            r.put("oracle", json!({"verdict": "NotConvex", "a": a, "b": b, "exit": exit}));
        }
    }
    let mut rows = Vec::new();
    match shape.as_domain() {
        Some(d) => {
            let cutoff = order_cutoff(d);
            r.param("cutoff", cutoff);
            for bp in d.sample_boundary(count, c.seed)? {
                let v = classify_point(d, &bp)?;
                let (order, probes) = if v.class.is_convex() {
                    match contact_order(d, &bp, cutoff) {
                        Ok(o) => {
                            let top = o.direction_orders.iter().find(|p| p.order == o.order).map(|p| p.table.clone());
                            (Some(o.order.to_string()), top)
                        }
                        Err(Error::IndeterminateOrder { probes, .. }) => (Some("indeterminate".into()), Some(probes)),
                        Err(e) => return Err(e),
                    }
                } else {
                    (None, None)
                };
                let class = format!("{:?}", v.class);
                rows.push((bp.location.as_slice().to_vec(), class.clone()));
                r.points.push(PointRecord {
                    location: bp.location.as_slice().to_vec(),
                    normal: bp.normal.as_slice().to_vec(),
                    class: Some(class),
                    min_tangential_eigenvalue: Some(v.min_tangential_eigenvalue),
                    order,
                    probes,
                });
            }
            let all_convex = r.points.iter().all(|p| p.class.as_deref() != Some("NotConvex"));
            r.put("all_points_convex", all_convex);
        }
        None => {
            for x in shape.boundary_samples(count, c.seed)? {
                let normal = shape.normal_at(&x)?.as_slice().to_vec();
                rows.push((x.clone(), "boundary".into()));
                r.points.push(PointRecord {
                    location: x,
                    normal,
                    class: None,
                    min_tangential_eigenvalue: None,
                    order: None,
                    probes: None,
                });
            }
        }
    }
    if c.csv {
        return Ok(Output { code, body: csv_rows(&rows), extra: vec![] });
    }
    Ok(done(r, code))
}

fn convexify(shape: &Shape, c: &Common) -> Result<Output, Error> {
    let d = domain_of(shape)?;
    let opts = ConvexifyOptions { boundary_samples: c.points.unwrap_or(200), seed: c.seed, ..Default::default() };
    let mut r = AnalysisReport::new("convexify", shape, c.seed);
    r.param("boundary_samples", opts.boundary_samples);
    r.param("sphere_samples", opts.sphere_samples);
    r.param("band", opts.band);
    match strong_convexify_with(d, &opts) {
        Ok(res) => {
            r.put("lambda", res.lambda);
            r.put("certified_c", res.certified_c);
            r.put("boundary_min_eigenvalue", res.boundary_min_eigenvalue);
            r.put("samples", res.samples);
            Ok(done(r, 0))
        }
        Err(e) if exit_code(&e) == 2 => {
            r.negative(&e);
            Ok(done(r, 2))
        }
        Err(e) => Err(e),
    }
}

fn hull(shape: &Shape, c: &Common, set: Option<&str>, random: usize, family: &str, grid: usize) -> Result<Output, Error> {
    let k = match set {
        Some(s) => parse_points(s)?,
        None => convexlab::convexity::interior_points(shape, random, c.seed),
    };
    let k = CompactSet::new(k, "K")?;
    let fam = match family {
        "linear" => FunctionFamily::real_linear(),
        "continuous" => FunctionFamily::Continuous,
        other => return Err(Error::InvalidInput(format!("unknown family {other}"))),
    };
    let h = f_hull(shape, &k, &fam, grid)?;
    let mut rows: Vec<(Vec<f64>, String)> = k.points.iter().map(|x| (x.clone(), "K".to_string())).collect();
    rows.extend(h.points.iter().map(|x| (x.clone(), "hull".to_string())));
    if c.json {
        let mut r = AnalysisReport::new("hull", shape, c.seed);
        r.param("family", family);
        r.param("grid", grid);
        r.put("k", &k.points);
        r.put("hull_size", h.points.len());
        r.put("hull", &h.points);
        return Ok(done(r, 0));
    }
    Ok(Output { code: 0, body: csv_rows(&rows), extra: vec![] })
}

fn extreme(shape: &Shape, c: &Common, point: Option<&str>) -> Result<Output, Error> {
    let mut r = AnalysisReport::new("extreme", shape, c.seed);
    r.param("probe_directions", 512);
    if let Some(p) = point {
        let p = parse_point(p)?;
        let v = is_extreme(shape, &p, 512)?;
        let code = match &v {
            ExtremeVerdict::Extreme => {
                r.put("verdict", "Extreme");
                0
            }
            ExtremeVerdict::NotExtreme { a, b } => {
                r.status = "negative".into();
                r.put("verdict", "NotExtreme");
                r.put("witness", json!([a, b]));
                2
            }
        };
        r.put("point", &p);
        if c.csv {
            let label = if code == 0 { "extreme" } else { "not_extreme" };
            return Ok(Output { code, body: csv_rows(&[(p, label.into())]), extra: vec![] });
        }
        return Ok(done(r, code));
    }
    let count = c.points.unwrap_or(64);
    r.param("points", count);
    let samples = extreme_samples(shape, count, c.seed)?;
    let rows: Vec<(Vec<f64>, String)> = samples
        .iter()
        .map(|(x, v)| (x.clone(), if v.is_extreme() { "extreme" } else { "not_extreme" }.to_string()))
        .collect();
    if c.json {
        r.put("extreme_count", rows.iter().filter(|x| x.1 == "extreme").count());
        r.put("samples", rows.iter().map(|(x, l)| json!({"point": x, "label": l})).collect::<Vec<_>>());
        return Ok(done(r, 0));
    }
    Ok(Output { code: 0, body: csv_rows(&rows), extra: vec![] })
}

fn exhaust(shape: &Shape, c: &Common, levels: &str) -> Result<Output, Error> {
    let d = domain_of(shape)?;
    let levels = parse_point(levels)?;
    let mut r = AnalysisReport::new("exhaust", shape, c.seed);
    r.param("levels", &levels);
    r.param("eps", convexlab::exhaust::EXHAUSTION_EPS);
    r.param("grid", convexlab::exhaust::EXHAUSTION_GRID);
    r.param("samples_per_level", convexlab::exhaust::SUBLEVEL_SAMPLES);
    let e = match max_exhaustion(d) {
        Ok(e) => e,
        Err(err) if exit_code(&err) == 2 => {
            r.negative(&err);
            return Ok(done(r, 2));
        }
        Err(err) => return Err(err),
    };
    r.put("checks", &e.checks);
    let subs = sublevel_decomposition(&e, &levels)?;
    let mut code = 0;
    let mut out = Vec::new();
    for s in &subs {
        let strong = s.verdicts.iter().filter(|v| v.class == convexlab::convexity::ConvexityClass::StronglyConvex).count();
        if strong != s.verdicts.len() {
            code = 2;
            r.status = "negative".into();
        }
        for (b, v) in s.boundary.iter().zip(&s.verdicts) {
            r.points.push(PointRecord {
                location: b.location.as_slice().to_vec(),
                normal: b.normal.as_slice().to_vec(),
                class: Some(format!("{:?}", v.class)),
                min_tangential_eigenvalue: Some(v.min_tangential_eigenvalue),
                order: None,
                probes: None,
            });
        }
        out.push(json!({
            "level": s.level,
            "min_gradient": s.min_gradient,
            "samples": s.verdicts.len(),
            "strongly_convex": strong,
            "domain": serde_json::to_value(&s.domain)?,
        }));
    }
    r.put("sublevels", out);
    Ok(done(r, code))
}

fn bump(shape: &Shape, c: &Common, at: &str, eps: f64, k: usize, order: Option<u32>) -> Result<Output, Error> {
    let d = domain_of(shape)?;
    let p = parse_point(at)?;
    let g = GraphDomain2D::at(d, &p)?;
    let mut r = AnalysisReport::new("bump", shape, c.seed);
    r.param("at", &p);
    r.param("eps", eps);
    r.param("k", k);
    r.param("order", order);
    let res = match order {
        Some(t) => bump_order_choice(&g, t, eps),
        None => bump_domain_2d(&g, eps, k),
    };
    let b = match res {
        Ok(b) => b,
        Err(e) if exit_code(&e) == 2 => {
            if let Error::FlatPoint { witness: Some((a, w)), .. } = &e {
                r.put("witness", json!([a, w]));
            }
            r.negative(&e);
            return Ok(done(r, 2));
        }
        Err(e) => return Err(e),
    };
    let coef = serde_json::to_string_pretty(&b.coefficients())? + "\n";
    let poly = b.graph.polyline(c.points.unwrap_or(512))?;
    let rows: Vec<(Vec<f64>, String)> = poly.iter().map(|x| (x.to_vec(), "boundary".to_string())).collect();
    if c.csv {
        let extra = c.out.as_ref().map(|o| vec![(format!("{o}.coef.json"), coef)]).unwrap_or_default();
        return Ok(Output { code: 0, body: csv_rows(&rows), extra });
    }
    r.put("center_order", b.center_order.to_string());
    r.put("hausdorff", b.hausdorff);
    r.put("half_width", b.half_width);
    r.put("height", b.height);
    r.put("checks", &b.checks);
    r.put("coefficients", b.coefficients());
    Ok(done(r, 0))
}

fn gauge(shape: &Shape, c: &Common, point: &str) -> Result<Output, Error> {
    let x = parse_point(point)?;
    let v = minkowski_gauge(shape, &x)?;
    let mut r = AnalysisReport::new("gauge", shape, c.seed);
    r.put("point", &x);
    r.put("gauge", v);
    Ok(done(r, 0))
}

fn dispatch(cli: &Cli) -> Result<Output, Error> {
    let c = &cli.common;
    match &cli.command {
        Command::Classify { domain } => classify(&load_shape(domain)?, c),
        Command::Convexify { domain } => convexify(&load_shape(domain)?, c),
        Command::Hull { domain, set, random, family, grid } => {
            hull(&load_shape(domain)?, c, set.as_deref(), *random, family, *grid)
        }
        Command::Extreme { domain, point } => extreme(&load_shape(domain)?, c, point.as_deref()),
        Command::Exhaust { domain, levels } => exhaust(&load_shape(domain)?, c, levels),
        Command::Bump { domain, at, eps, k, order } => bump(&load_shape(domain)?, c, at, *eps, *k, *order),
        Command::Gauge { domain, point } => gauge(&load_shape(domain)?, c, point),
    }
}

/// Runs one command line (including the program name) without touching the
/// process: output goes to the returned buffers, or to --out.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text.into_bytes(), stderr: String::new() }
            } else {
                Outcome { code, stdout: vec![], stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.common.out {
                let mut files = vec![(path.clone(), out.body)];
                files.extend(out.extra);
                for (p, body) in files {
                    if let Err(e) = std::fs::write(&p, body) {
                        return Outcome { code: 1, stdout: vec![], stderr: format!("error: {p}: {e}\n") };
                    }
                }
                Outcome { code: out.code, stdout: vec![], stderr: String::new() }
            } else {
                Outcome { code: out.code, stdout: out.body.into_bytes(), stderr: String::new() }
            }
        }
        Err(e) => Outcome { code: exit_code(&e), stdout: vec![], stderr: format!("error: {e}\n") },
    }
}

/// Applies CONVEXLAB_THREADS to the global thread pool.
pub fn configure_threads() {
    if let Some(n) = std::env::var("CONVEXLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
