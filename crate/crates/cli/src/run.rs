use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use frobenius_core::field::{FieldConfig, FieldElement};
use frobenius_core::fsplit::{fedder_test, fpurity_exponent, splitting_number, splitting_sequence, DEFAULT_EXPONENT_CAP};
use frobenius_core::hk::{basic_length_identity, hk_sequence, verify_all_pairs, BoundConstants, BoundVariant, SoclePair};
use frobenius_core::ideal::{Budget, IdealBasis};
use frobenius_core::local::LocalRingPresentation;
use frobenius_core::poly::{MonomialOrder, PolyRing, Polynomial};
use frobenius_core::scan::{rational_points, scan_points, subvariety_record};
use frobenius_core::tame::{construct_parameter, discriminant_valuation, generator_bound_check, tame_invariants, DEFAULT_SEED};
use frobenius_core::{error::ErrorKind, Error};
use log::info;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error as ThisError;

use crate::job::{Command, JobSpec};

pub const SCHEMA: &str = "frobenius-lab/run-record/1";
pub const JOB_DEADLINE: Duration = Duration::from_secs(600);

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Parse => 2,
                ErrorKind::Precondition => 3,
                ErrorKind::Budget => 4,
            },
            CliError::Io(_) => 1,
        }
    }

    /// Machine-readable error document.
    pub fn to_json(&self) -> Value {
        let (kind, position) = match self {
            CliError::Core(e @ Error::Parse { pos, .. }) => (kind_name(e), Some(*pos)),
            CliError::Core(e) => (kind_name(e), None),
            CliError::Io(_) => ("io", None),
        };
        rationalize(json!({
            "schema": SCHEMA,
            "error": { "kind": kind, "exit_code": self.exit_code(), "message": self.to_string(), "position": position },
        }))
    }
}

fn kind_name(e: &Error) -> &'static str {
    match e.kind() {
        ErrorKind::Parse => "parse",
        ErrorKind::Precondition => "precondition",
        ErrorKind::Budget => "budget",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Timing {
    pub operation: String,
    pub micros: u64,
}

/// CSV header and rows for tabular commands.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub schema: String,
    pub version: String,
    pub job: String,
    pub timings: Vec<Timing>,
    pub results: Value,
    pub hash: String,
    #[serde(skip)]
    pub table: Option<Table>,
}

/// Replaces every JSON number by `{"num": ..., "den": "1"}`.
pub fn rationalize(v: Value) -> Value {
    match v {
        Value::Number(n) => json!({ "num": n.to_string(), "den": "1" }),
        Value::Array(a) => Value::Array(a.into_iter().map(rationalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rationalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

impl RunRecord {
    pub fn to_json(&self) -> Value {
        rationalize(serde_json::to_value(self).expect("run record serializes"))
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("json value prints");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let Some(table) = &self.table else { return Ok(()) };
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&table.header).map_err(io)?;
        for row in &table.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// `sha256(job text, results)`; timings and output paths do not enter.
pub fn content_hash(job: &str, results: &Value) -> String {
    let mut h = Sha256::new();
    h.update(job.as_bytes());
    h.update(b"\n");
    h.update(serde_json::to_string(results).expect("json value prints").as_bytes());
    hex::encode(h.finalize())
}

struct Context {
    job: JobSpec,
    budget: Budget,
    timings: Vec<Timing>,
}

impl Context {
    fn timed<T>(&mut self, op: &str, f: impl FnOnce(&Budget) -> Result<T, Error>) -> Result<T, Error> {
        let start = Instant::now();
        let out = f(&self.budget);
        let micros = start.elapsed().as_micros() as u64;
        info!("{op}: {micros} us");
        self.timings.push(Timing { operation: op.to_string(), micros });
        out
    }

    fn ring(&self) -> Result<Arc<PolyRing>, Error> {
        let p = self.job.p.ok_or(Error::Parse { pos: 0, msg: "missing `p`".into() })?;
        if self.job.vars.is_empty() {
            return Err(Error::Parse { pos: 0, msg: "missing `vars`".into() });
        }
        PolyRing::new(FieldConfig::new(p)?, &self.job.vars, MonomialOrder::Grevlex)
    }

    fn point(&self, ring: &Arc<PolyRing>, coords: &[u64]) -> Vec<FieldElement> {
        coords.iter().map(|c| ring.field().element(*c)).collect()
    }

    fn presentation(&mut self) -> Result<(IdealBasis, LocalRingPresentation), Error> {
        let ring = self.ring()?;
        let ideal = parse_ideal(&ring, &self.job.ideal)?;
        let point = match &self.job.point {
            Some(pt) => self.point(&ring, pt),
            None => vec![ring.field().zero(); ring.nvars()],
        };
        let i = ideal.clone();
        let pres = self.timed("presentation", |b| LocalRingPresentation::new(i, point, b))?;
        Ok((ideal, pres))
    }

    fn emax(&self, default: u32) -> u32 {
        self.job.emax.unwrap_or(default)
    }
}

/// Parses generators one by one so errors name the offending generator.
fn parse_ideal(ring: &Arc<PolyRing>, gens: &[String]) -> Result<IdealBasis, Error> {
    let polys = gens
        .iter()
        .map(|g| {
            ring.parse(g).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse { pos, msg: format!("{msg} in `{g}`") },
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    IdealBasis::new(ring, polys)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

pub fn budget_for(job: &JobSpec) -> Budget {
    let mut b = Budget::default();
    if let Some(n) = job.budget_pairs {
        b.max_pairs = n;
    }
    if let Some(n) = job.budget_degree {
        b.max_degree = n;
    }
    b.with_time_limit(JOB_DEADLINE)
}

/// Runs a job and collects its results; output files are written by the caller.
pub fn run(job: &JobSpec) -> Result<RunRecord, CliError> {
    let command = job.command()?;
    let mut cx = Context { job: job.clone(), budget: budget_for(job), timings: Vec::new() };
    let (results, table) = match command {
        Command::Hk => run_hk(&mut cx)?,
        Command::Fsig => run_fsig(&mut cx)?,
        Command::Fedder => (run_fedder(&mut cx)?, None),
        Command::Tame => (run_tame(&mut cx)?, None),
        Command::Scan => run_scan(&mut cx)?,
        Command::VerifyBounds => (run_bounds(&mut cx)?, None),
    };
    let results = rationalize(results);
    let text = job.to_string();
    let hash = content_hash(&JobSpec { json: None, csv: None, ..job.clone() }.to_string(), &results);
    Ok(RunRecord {
        schema: SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        job: text,
        timings: cx.timings,
        results,
        hash,
        table,
    })
}

type Output = (Value, Option<Table>);

fn run_hk(cx: &mut Context) -> Result<Output, Error> {
    let (_, pres) = cx.presentation()?;
    let e_max = cx.emax(3);
    let report = cx.timed("hk_sequence", |b| hk_sequence(&pres, e_max, b))?;
    let table = Table {
        header: vec!["e".into(), "q".into(), "colength".into(), "lambda".into()],
        rows: report
            .samples
            .iter()
            .map(|s| vec![s.e.to_string(), s.q.to_string(), s.colength.to_string(), s.lambda.to_string()])
            .collect(),
    };
    let mut v = to_value(&report);
    v["jacobian"] = to_value(&pres.jacobian_report());
    Ok((v, Some(table)))
}

fn run_fsig(cx: &mut Context) -> Result<Output, Error> {
    let (_, pres) = cx.presentation()?;
    let e_max = cx.emax(3);
    let report = cx.timed("splitting_sequence", |b| splitting_sequence(&pres, e_max, b))?;
    let table = Table {
        header: vec!["e".into(), "q".into(), "colength".into(), "s_e".into()],
        rows: report
            .samples
            .iter()
            .map(|s| vec![s.e.to_string(), s.q.to_string(), s.colength.to_string(), s.s_e.to_string()])
            .collect(),
    };
    Ok((to_value(&report), Some(table)))
}

fn run_fedder(cx: &mut Context) -> Result<Value, Error> {
    let (_, pres) = cx.presentation()?;
    let verdict = cx.timed("fedder_test", |b| fedder_test(&pres, b))?;
    let s1 = cx.timed("splitting_number", |b| splitting_number(&pres, 1, b))?;
    let c = match &cx.job.element {
        Some(text) => pres.ring().parse(text)?,
        None => pres.ring().one(),
    };
    let cap = cx.job.ecap.unwrap_or(DEFAULT_EXPONENT_CAP);
    let exponent = cx.timed("fpurity_exponent", |b| fpurity_exponent(&pres, &c, cap, b))?;
    let mut v = to_value(&verdict);
    v["s_1"] = to_value(&s1);
    v["test_element"] = Value::String(c.to_string());
    v["purity_exponent"] = to_value(&exponent);
    Ok(v)
}

fn run_tame(cx: &mut Context) -> Result<Value, Error> {
    let curve = cx.job.curve()?;
    let seed = cx.job.seed.unwrap_or(DEFAULT_SEED);
    let precision = cx.job.precision;
    let inv = cx.timed("tame_invariants", |_| tame_invariants(&curve))?;
    let parameter = cx.timed("construct_parameter", |_| construct_parameter(&curve, seed))?;
    let disc = cx.timed("discriminant_valuation", |_| discriminant_valuation(&curve, precision, seed))?;
    let gens = cx.timed("generator_bound_check", |_| generator_bound_check(&curve))?;
    Ok(json!({
        "curve": to_value(&curve),
        "invariants": to_value(&inv),
        "parameter": to_value(&parameter),
        "discriminant": to_value(&disc),
        "generator_bound": to_value(&gens),
    }))
}

fn run_scan(cx: &mut Context) -> Result<Output, Error> {
    let ring = cx.ring()?;
    let ideal = parse_ideal(&ring, &cx.job.ideal)?;
    let points = if cx.job.scan_points.is_empty() {
        rational_points(&ideal)?
    } else {
        cx.job.scan_points.iter().map(|pt| cx.point(&ring, pt)).collect()
    };
    let e_max = cx.emax(1);
    let mut report = cx.timed("scan_points", |b| scan_points(&ideal, &points, e_max, b))?;
    for sub in cx.job.subvarieties.clone() {
        let prime = parse_ideal(&ring, &sub.prime)?;
        let witnesses = sub
            .witnesses
            .iter()
            .map(|w| {
                let lifts = w.lifts.iter().map(|t| ring.parse(t)).collect::<Result<Vec<Polynomial>, Error>>()?;
                Ok((cx.point(&ring, &w.point), lifts))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let rec = cx.timed("generic_value", |b| subvariety_record(&report, &ideal, &prime, &witnesses, b))?;
        report = report.with_subvariety(rec);
    }
    let mut rows = Vec::new();
    for pt in &report.points {
        let label = pt.point.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        for (k, e) in report.e_values.iter().enumerate() {
            rows.push(vec![label.clone(), e.to_string(), pt.lambda[k].to_string(), pt.splitting[k].to_string()]);
        }
    }
    let table = Table { header: vec!["point".into(), "e".into(), "lambda".into(), "s_e".into()], rows };
    Ok((to_value(&report), Some(table)))
}

fn run_bounds(cx: &mut Context) -> Result<Value, Error> {
    let (_, pres) = cx.presentation()?;
    let (Some(m), Some(delta)) = (cx.job.bound_m, cx.job.bound_delta) else {
        return Err(Error::Precondition("verify-bounds needs `bound_m` and `bound_delta`".into()));
    };
    let variant = match cx.job.bound_variant.as_deref() {
        Some("module") => BoundVariant::Module,
        _ => BoundVariant::Single,
    };
    let pair = if cx.job.socle_ideal.is_empty() {
        SoclePair::maximal(&pres)?
    } else {
        let i = parse_ideal(pres.ring(), &cx.job.socle_ideal)?;
        let u = pres.ring().parse(cx.job.socle_element.as_deref().unwrap_or("1"))?;
        cx.timed("socle_pair", |b| SoclePair::new(&pres, &i, &u, b))?
    };
    let e_max = cx.emax(3);
    let constants = BoundConstants::new(m, delta);
    let check = cx.timed("verify_all_pairs", |b| verify_all_pairs(&pair, e_max, &constants, variant, b))?;
    let p = pres.characteristic();
    let identities = cx.timed("basic_length_identity", |b| {
        (1..=e_max.min(2))
            .map(|e| basic_length_identity(&pair, frobenius_core::field::frobenius_exponent(p, e)?, b))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    Ok(json!({
        "bounds": to_value(&check),
        "violations": check.violations(),
        "length_identity": to_value(&identities),
    }))
}
