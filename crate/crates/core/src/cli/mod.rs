//! Command-line pipeline: assumption check, isolation, classification and
//! loop certification, reported as JSON.

pub mod report;
pub mod svg;

use std::cmp::Ordering;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::assumptions::{check_assumptions, check_system, AssumptionVerdict};
use crate::config::{with_jobs, Budget, CurveMode, EngineConfig};
use crate::interval::{rational_to_f64, Box2, CompiledPoly, Dir, IBox, Precision};
use crate::isolate::{isolate_system, CandidateBox, Isolation};
use crate::mpoly::{MPoly, PolyError, PolyFile, Var};
use crate::oracle::{oracle_singular_points, ExactKind, OracleError, RatBox};
use crate::system::{Chart, CurveSystem};
use crate::topology::{analyze_all, SingularityKind, SingularityReport, TopologyError};

use report::*;

pub use svg::emit_svg;

/// Exit status when everything requested was certified.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed input.
pub const EXIT_INPUT: i32 = 1;
/// Exit status when a budget ran out or a cross-check failed.
pub const EXIT_INCOMPLETE: i32 = 2;

/// Most frontier boxes listed per chart.
const FRONTIER_LISTED: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Box(Box2<f64>),
    Global,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub mode: CurveMode,
    pub domain: Domain,
    pub budget: Budget,
    pub inflation: f64,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub check_assumptions_only: bool,
    pub oracle: bool,
    pub allow_unverified: bool,
    pub timing: bool,
    pub jobs: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mode: CurveMode::Resultant,
            domain: Domain::Box(unit_box()),
            budget: Budget::default(),
            inflation: EngineConfig::default().inflation,
            output: None,
            svg: None,
            check_assumptions_only: false,
            oracle: false,
            allow_unverified: false,
            timing: true,
            jobs: None,
        }
    }
}

impl Config {
    fn engine(&self) -> EngineConfig {
        EngineConfig { budget: self.budget, inflation: self.inflation, jobs: self.jobs, ..EngineConfig::default() }
    }
}

fn unit_box() -> Box2<f64> {
    IBox::from_f64s([(-1.0, 1.0), (-1.0, 1.0)], 53)
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: crate::mpoly::PolyFormatError },
    #[error("{mode} mode takes {expected} polynomial file(s), got {got}")]
    InputCount { mode: &'static str, expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("invalid box {0:?}: expected xlo,xhi,ylo,yhi with lo < hi")]
    Box(String),
    #[error("budgets must be positive")]
    Budget,
}

impl InputError {
    /// Stable module-qualified code.
    pub fn code(&self) -> &'static str {
        match self {
            InputError::Io { .. } => "cli.io",
            InputError::Format { .. } => "mpoly.format",
            InputError::InputCount { .. } => "cli.input_count",
            InputError::Poly(PolyError::DegreeTooLow { .. }) => "mpoly.degree_too_low",
            InputError::Poly(PolyError::NonConstantLeadingCoefficient) => "mpoly.non_constant_leading_coefficient",
            InputError::Poly(_) => "mpoly.invalid",
            InputError::Box(_) => "cli.box",
            InputError::Budget => "cli.budget",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Resultant,
    Discriminant,
}

/// Certified singularities of `Res_z(P, Q) = 0` and their local topology.
#[derive(Debug, Parser)]
#[command(name = "singuline", version)]
pub struct Args {
    /// Polynomial files: `P` and `Q` in resultant mode, `P` alone in
    /// discriminant mode (`Q = P_z`).
    #[arg(required = true, num_args = 1..=2)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "resultant")]
    pub mode: ModeArg,
    /// Domain `xlo,xhi,ylo,yhi` as decimal rationals.
    #[arg(long = "box", value_name = "XLO,XHI,YLO,YHI", allow_hyphen_values = true, conflicts_with = "global")]
    pub bbox: Option<String>,
    /// The whole plane, through three charts.
    #[arg(long)]
    pub global: bool,
    #[arg(long, default_value_t = Budget::default().max_depth)]
    pub max_depth: u32,
    #[arg(long, default_value_t = Budget::default().max_boxes)]
    pub max_boxes: usize,
    #[arg(long, default_value_t = Budget::default().max_precision_bits)]
    pub max_precision_bits: u32,
    #[arg(long, default_value_t = Budget::default().max_iterations)]
    pub max_iterations: u32,
    /// Relative inflation before each Krawczyk acceptance test.
    #[arg(long, default_value_t = EngineConfig::default().inflation)]
    pub inflation: f64,
    /// Report path; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write an SVG picture.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Stop after the assumption check.
    #[arg(long)]
    pub check_assumptions: bool,
    /// Cross-check against the exact solver (bounded domains, small degree).
    #[arg(long)]
    pub oracle: bool,
    /// Run isolation even when the assumptions are not verified.
    #[arg(long)]
    pub allow_unverified: bool,
    /// Leave timings out so identical runs give identical reports.
    #[arg(long)]
    pub no_timing: bool,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Args {
    pub fn config(&self) -> Result<Config, InputError> {
        let domain = match (&self.bbox, self.global) {
            (_, true) => Domain::Global,
            (Some(s), false) => Domain::Box(parse_box_arg(s)?),
            (None, false) => Domain::Box(unit_box()),
        };
        let budget = Budget {
            max_depth: self.max_depth,
            max_boxes: self.max_boxes,
            max_precision_bits: self.max_precision_bits,
            max_iterations: self.max_iterations,
        };
        if budget.max_depth == 0 || budget.max_boxes == 0 || budget.max_precision_bits == 0 || budget.max_iterations == 0 || self.inflation.is_nan() || self.inflation < 0.0 {
            return Err(InputError::Budget);
        }
        Ok(Config {
            mode: match self.mode {
                ModeArg::Resultant => CurveMode::Resultant,
                ModeArg::Discriminant => CurveMode::Discriminant,
            },
            domain,
            budget,
            inflation: self.inflation,
            output: self.output.clone(),
            svg: self.svg.clone(),
            check_assumptions_only: self.check_assumptions,
            oracle: self.oracle,
            allow_unverified: self.allow_unverified,
            timing: !self.no_timing,
            jobs: self.jobs,
        })
    }
}

/// A decimal rational: sign, digits, optional fraction and exponent, or
/// `p/q`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let d: BigInt = d.trim().parse().ok()?;
        let n: BigInt = n.trim().parse().ok()?;
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(digits);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    }
    Some(if neg { -q } else { q })
}

/// `xlo,xhi,ylo,yhi`, rounded outward to `f64`.
pub fn parse_box_arg(s: &str) -> Result<Box2<f64>, InputError> {
    let err = || InputError::Box(s.to_string());
    let v: Vec<BigRational> = s.split(',').map(parse_rational).collect::<Option<_>>().ok_or_else(err)?;
    if v.len() != 4 || v[0] >= v[1] || v[2] >= v[3] {
        return Err(err());
    }
    let lo = |q: &BigRational| rational_to_f64(q, Dir::Down);
    let hi = |q: &BigRational| rational_to_f64(q, Dir::Up);
    Ok(IBox::from_f64s([(lo(&v[0]), hi(&v[1])), (lo(&v[2]), hi(&v[3]))], 53))
}

/// Reads the polynomial files.
pub fn read_inputs(paths: &[PathBuf]) -> Result<Vec<MPoly>, InputError> {
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|source| InputError::Io { path: p.clone(), source })?;
            PolyFile::parse(&text).map_err(|source| InputError::Format { path: p.clone(), source })
        })
        .collect()
}

/// The `(P, Q)` pair of the mode.
pub fn pair_for_mode(mode: CurveMode, polys: &[MPoly]) -> Result<(MPoly, MPoly), InputError> {
    match (mode, polys) {
        (CurveMode::Discriminant, [p]) => Ok((p.clone(), p.derivative(Var::Z, 1))),
        (CurveMode::Resultant, [p, q]) => Ok((p.clone(), q.clone())),
        (CurveMode::Discriminant, _) => Err(InputError::InputCount { mode: "discriminant", expected: 1, got: polys.len() }),
        (CurveMode::Resultant, _) => Err(InputError::InputCount { mode: "resultant", expected: 2, got: polys.len() }),
    }
}

/// Report plus the curve in plane coordinates, for plotting.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub report: Report,
    pub curve: MPoly,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn precision_name(p: Precision) -> String {
    p.to_string()
}

fn chart_verdict(chart: Chart, v: &AssumptionVerdict) -> ChartVerdict {
    ChartVerdict {
        chart,
        status: v.status,
        boxes_processed: v.stats.boxes_processed,
        max_depth_reached: v.stats.max_depth_reached,
        stalled: v.stalled.iter().map(|s| StalledEntry { bbox: box_json(&s.bbox), check: s.reason.check(), reason: s.reason, depth: s.depth }).collect(),
        only_at_infinity: !v.stalled.is_empty() && v.stalled.iter().all(|s| chart.touches_infinity(&s.bbox)),
    }
}

fn chart_isolation(chart: Chart, iso: &Isolation) -> ChartIsolation {
    ChartIsolation {
        chart,
        status: iso.status,
        candidates: iso.candidates.len(),
        boxes_processed: iso.stats.boxes_processed,
        max_depth_reached: iso.stats.max_depth_reached,
        min_accepted_diameter: iso.stats.min_accepted_diameter.map(float_str),
        frontier_size: iso.frontier.len(),
        frontier: iso.frontier.iter().take(FRONTIER_LISTED).map(box_json).collect(),
    }
}

fn singularity_entry(r: &SingularityReport) -> SingularityEntry {
    SingularityEntry {
        bbox: box_json(&r.plane_box()),
        chart: r.chart,
        chart_box: box_json(&r.bbox),
        kind: r.kind,
        branches: r.branches,
        loop_free: r.loop_free,
        boundary_crossings: r.boundary_crossings,
        classification: r.diagnostics.classification,
        loop_test: r.diagnostics.loop_test,
        precision: r.diagnostics.precision.map(precision_name),
        contractions: r.diagnostics.contractions,
        corner_retries: r.diagnostics.corner_retries,
        triple_root_box: r.triple_root_box.as_ref().map(box3_json),
    }
}

/// Runs the configured phases on parsed polynomials.
pub fn run_pipeline(cfg: &Config, polys: &[MPoly]) -> Result<PipelineOutput, InputError> {
    let (p, q) = pair_for_mode(cfg.mode, polys)?;
    let ecfg = cfg.engine();
    let curve = crate::mpoly::resultant_z(&p, &q)?;
    let (charts, b0): (Vec<Chart>, Box2<f64>) = match &cfg.domain {
        Domain::Box(b) => (vec![Chart::Identity], b.clone()),
        Domain::Global => (Chart::ALL.to_vec(), unit_box()),
    };
    // pairs linear in z have no subresultant system but can still be checked
    let plane = match CurveSystem::with_extension(&p, &q, ecfg.extension) {
        Ok(s) => Some(s),
        Err(PolyError::DegreeTooLow { .. }) if cfg.check_assumptions_only && charts.len() == 1 => None,
        Err(e) => return Err(e.into()),
    };
    let systems: Vec<CurveSystem> = plane.iter().flat_map(|pl| charts.iter().map(|&c| pl.in_chart(c))).collect();
    let mut errors = Vec::new();
    let mut timing = Timing::default();
    let mut exit_code = EXIT_OK;

    // assumptions
    let t = Instant::now();
    let assumptions = if cfg.allow_unverified && !cfg.check_assumptions_only {
        AssumptionsSection { status: AssumptionSummary::Skipped, charts: Vec::new() }
    } else {
        let verdicts: Vec<ChartVerdict> = if plane.is_none() {
            vec![chart_verdict(Chart::Identity, &with_jobs(cfg.jobs, || check_assumptions(&p, &q, &b0, &cfg.budget))?)]
        } else {
            systems.iter().map(|s| chart_verdict(s.chart, &with_jobs(cfg.jobs, || check_system(s, &b0, &cfg.budget)))).collect()
        };
        let status = if verdicts.iter().all(|v| v.stalled.is_empty()) {
            AssumptionSummary::Verified
        } else if cfg.domain == Domain::Global && verdicts.iter().all(|v| v.stalled.is_empty() || v.only_at_infinity) {
            AssumptionSummary::VerifiedInThePlane
        } else {
            AssumptionSummary::BudgetExhausted
        };
        AssumptionsSection { status, charts: verdicts }
    };
    timing.assumptions_ms = ms(t);
    let blocked = assumptions.status == AssumptionSummary::BudgetExhausted;
    if blocked {
        exit_code = EXIT_INCOMPLETE;
        let checks: Vec<String> = assumptions.charts.iter().flat_map(|c| c.stalled.iter().map(|s| format!("{:?}", s.check))).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        errors.push(ErrorEntry { code: "assumptions.budget_exhausted".into(), message: format!("assumptions not verified; stalled checks: {}", checks.join(", ")) });
    }

    let domain = match &cfg.domain {
        Domain::Box(b) => DomainEntry::Box { bounds: box_json(b) },
        Domain::Global => DomainEntry::Global,
    };
    let mut report = Report {
        schema: SCHEMA.into(),
        mode: cfg.mode,
        domain,
        budget: cfg.budget,
        assumptions,
        isolation: None,
        singularities: Vec::new(),
        failures: Vec::new(),
        hypotheses: Hypotheses { squarefree_f: HypothesisStatus::Unchecked },
        precision_levels: Vec::new(),
        oracle: None,
        errors: Vec::new(),
        exit_code,
        timing: None,
    };
    let Some(plane) = plane.filter(|_| !cfg.check_assumptions_only && !(blocked && !cfg.allow_unverified)) else {
        report.errors = errors;
        report.timing = cfg.timing.then_some(timing);
        return Ok(PipelineOutput { report, curve });
    };

    // isolation
    let t = Instant::now();
    let per_chart: Vec<Isolation> = with_jobs(cfg.jobs, || systems.iter().map(|s| isolate_system(s, &b0, s.chart, &ecfg)).collect());
    let mut candidates: Vec<CandidateBox> = per_chart.iter().flat_map(|i| i.candidates.iter().cloned()).collect();
    if cfg.domain == Domain::Global {
        candidates = crate::isolate::merge_across_charts(&plane, candidates, ecfg.inflation);
    }
    timing.isolation_ms = ms(t);
    let complete = per_chart.iter().all(|i| i.status == crate::isolate::IsolationStatus::Complete);
    if !complete {
        exit_code = EXIT_INCOMPLETE;
        errors.push(ErrorEntry { code: "isolate.budget_exhausted".into(), message: "isolation budget exhausted with undecided boxes left".into() });
    }
    report.isolation = Some(IsolationSection {
        status: if complete { crate::isolate::IsolationStatus::Complete } else { crate::isolate::IsolationStatus::BudgetExhausted },
        charts: charts.iter().zip(&per_chart).map(|(&c, i)| chart_isolation(c, i)).collect(),
    });

    // topology
    let t = Instant::now();
    let results = with_jobs(cfg.jobs, || analyze_all(&plane, &candidates, cfg.mode, &cfg.budget));
    timing.topology_ms = ms(t);
    let mut levels: Vec<Precision> = Vec::new();
    for (c, r) in candidates.iter().zip(&results) {
        match r {
            Ok(r) => {
                if let Some(p) = r.diagnostics.precision {
                    levels.push(p);
                }
                report.singularities.push(singularity_entry(r));
            }
            Err(TopologyError::BudgetExhausted { phase, hint, last_box }) => {
                exit_code = EXIT_INCOMPLETE;
                report.failures.push(FailureEntry {
                    code: "topology.budget_exhausted".into(),
                    phase: *phase,
                    hint: *hint,
                    chart: c.chart,
                    candidate_box: box_json(&c.bbox),
                    last_box: box_json(last_box),
                });
            }
        }
    }
    if !report.failures.is_empty() {
        errors.push(ErrorEntry { code: "topology.budget_exhausted".into(), message: format!("{} singularities left unresolved", report.failures.len()) });
    }
    levels.sort_by_key(|p| p.bits());
    levels.dedup();
    report.precision_levels = levels.into_iter().map(precision_name).collect();

    if cfg.oracle {
        let t = Instant::now();
        let section = oracle_cross_check(cfg, &p, &q, &candidates, &results);
        timing.oracle_ms = Some(ms(t));
        match section.status {
            OracleStatus::Agree => report.hypotheses.squarefree_f = HypothesisStatus::VerifiedByOracle,
            OracleStatus::Disagree | OracleStatus::Error => {
                exit_code = EXIT_INCOMPLETE;
                errors.push(ErrorEntry { code: "oracle.mismatch".into(), message: section.message.clone().unwrap_or_default() });
            }
            OracleStatus::Skipped => {}
        }
        report.oracle = Some(section);
    }

    report.errors = errors;
    report.exit_code = exit_code;
    report.timing = cfg.timing.then_some(timing);
    Ok(PipelineOutput { report, curve })
}

/// Compares the isolation boxes and certified kinds with the exact
/// singular points in the domain.
fn oracle_cross_check(cfg: &Config, p: &MPoly, q: &MPoly, cands: &[CandidateBox], results: &[Result<SingularityReport, TopologyError>]) -> OracleSection {
    let skipped = |status, message: String| OracleSection { status, message: Some(message), points: Vec::new(), unmatched_boxes: 0, kind_mismatches: 0 };
    let Domain::Box(b0) = &cfg.domain else {
        return skipped(OracleStatus::Skipped, "the exact solver needs a bounded domain".into());
    };
    let pts = match oracle_singular_points(p, q, &RatBox::from_box(b0)) {
        Ok(v) => v,
        Err(e @ OracleError::DegreeGuardExceeded { .. }) => return skipped(OracleStatus::Skipped, e.to_string()),
        Err(e) => return skipped(OracleStatus::Error, e.to_string()),
    };
    let boxes: Vec<RatBox> = cands.iter().map(|c| RatBox::from_box(&c.plane_box())).collect();
    let mut points = Vec::new();
    let mut per_box = vec![0usize; boxes.len()];
    let mut kind_mismatches = 0;
    for sp in &pts {
        let hits: Vec<usize> = (0..boxes.len()).filter(|&i| sp.point.in_box(&boxes[i])).collect();
        for &i in &hits {
            per_box[i] += 1;
            if let Ok(r) = &results[i] {
                let agrees = match r.kind {
                    SingularityKind::Node => sp.kind == ExactKind::Node,
                    SingularityKind::OrdinaryCusp => sp.kind == ExactKind::OrdinaryCusp,
                };
                if !agrees {
                    kind_mismatches += 1;
                }
            }
        }
        let (x, y) = sp.point.approx();
        points.push(OraclePointEntry {
            x: float_str(x),
            y: float_str(y),
            kind: sp.kind,
            hessian_sign: match sp.hessian_sign {
                Ordering::Less => -1,
                Ordering::Equal => 0,
                Ordering::Greater => 1,
            },
            boxes: hits.len(),
        });
    }
    let unmatched_boxes = per_box.iter().filter(|&&n| n != 1).count();
    let bijection = unmatched_boxes == 0 && points.iter().all(|p| p.boxes == 1);
    let status = if bijection && kind_mismatches == 0 { OracleStatus::Agree } else { OracleStatus::Disagree };
    let message = (status == OracleStatus::Disagree).then(|| {
        format!("{} exact points, {} boxes, {unmatched_boxes} boxes unmatched, {kind_mismatches} kind mismatches", points.len(), boxes.len())
    });
    OracleSection { status, message, points, unmatched_boxes, kind_mismatches }
}

/// Viewport for the picture: the domain, or a window around the finite
/// singularity boxes in global mode.
pub fn viewport(cfg: &Config, report: &Report) -> Box2<f64> {
    if let Domain::Box(b) = &cfg.domain {
        return b.clone();
    }
    let mut r: f64 = 2.0;
    for s in &report.singularities {
        if let Some(b) = parse_box(&s.bbox) {
            for (lo, hi) in b.to_f64_bounds() {
                if lo.is_finite() && hi.is_finite() {
                    r = r.max(1.25 * lo.abs().max(hi.abs()));
                }
            }
        }
    }
    IBox::from_f64s([(-r, r), (-r, r)], 53)
}

/// Entry point of the binary; returns the exit status.
pub fn main_with_args(args: &Args) -> i32 {
    let run = || -> Result<(Config, PipelineOutput), InputError> {
        let cfg = args.config()?;
        let polys = read_inputs(&args.inputs)?;
        let out = run_pipeline(&cfg, &polys)?;
        Ok((cfg, out))
    };
    let (cfg, out) = match run() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            return EXIT_INPUT;
        }
    };
    let json = out.report.to_json();
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &json).map_err(|e| (path.clone(), e)),
        None => {
            print!("{json}");
            Ok(())
        }
    };
    if let Err((path, e)) = written {
        eprintln!("error[cli.io]: cannot write {}: {e}", path.display());
        return EXIT_INPUT;
    }
    if let Some(path) = &cfg.svg {
        let f = CompiledPoly::new(&out.curve, 2);
        let doc = emit_svg(&out.report, &f, &viewport(&cfg, &out.report));
        if let Err(e) = std::fs::write(path, doc) {
            eprintln!("error[cli.io]: cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    for e in &out.report.errors {
        eprintln!("{}: {}", e.code, e.message);
    }
    out.report.exit_code
}
