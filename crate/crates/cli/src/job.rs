//! Job files: `key = value` statements separated by newlines or `;`, with `#`
//! comments.
//!
//! ```text
//! command = hk
//! p = 5; vars = x, y, z; ideal = x*y - z^2; point = 0,0,0;
//! emax = 3
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use frobenius_core::tame::{Branch, BranchCurve};
use frobenius_core::Error;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Hk,
    Fsig,
    Fedder,
    Tame,
    Scan,
    VerifyBounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Hk => "hk",
            Command::Fsig => "fsig",
            Command::Fedder => "fedder",
            Command::Tame => "tame",
            Command::Scan => "scan",
            Command::VerifyBounds => "verify-bounds",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [Command::Hk, Command::Fsig, Command::Fedder, Command::Tame, Command::Scan, Command::VerifyBounds]
            .into_iter()
            .find(|c| c.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<u64>,
    pub lifts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subvariety {
    pub prime: Vec<String>,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    pub command: Option<Command>,
    pub p: Option<u64>,
    pub vars: Vec<String>,
    pub ideal: Vec<String>,
    pub point: Option<Vec<u64>>,
    pub branches: Vec<Branch>,
    pub emax: Option<u32>,
    pub ecap: Option<u32>,
    pub budget_pairs: Option<u64>,
    pub budget_degree: Option<u64>,
    pub precision: Option<usize>,
    pub seed: Option<u64>,
    /// Test element `c` for the F-purity exponent.
    pub element: Option<String>,
    pub scan_points: Vec<Vec<u64>>,
    pub subvarieties: Vec<Subvariety>,
    pub socle_ideal: Vec<String>,
    pub socle_element: Option<String>,
    pub bound_m: Option<u64>,
    pub bound_delta: Option<u64>,
    pub bound_variant: Option<String>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl JobSpec {
    pub fn command(&self) -> Result<Command, Error> {
        self.command.ok_or(Error::Parse { pos: 0, msg: "missing `command`".into() })
    }

    pub fn curve(&self) -> Result<BranchCurve, Error> {
        let p = self.p.ok_or(Error::Parse { pos: 0, msg: "missing `p`".into() })?;
        BranchCurve::new(p, self.branches.clone())
    }
}

impl FromStr for JobSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self, Error> {
        let mut job = JobSpec::default();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let line_start = offset;
            offset += line.len();
            let content = line.split('#').next().unwrap();
            let mut stmt_start = line_start;
            for stmt in content.split(';') {
                let pos = stmt_start;
                stmt_start += stmt.len() + 1;
                let stmt = stmt.trim();
                if stmt.is_empty() {
                    continue;
                }
                let (key, value) = stmt
                    .split_once('=')
                    .ok_or_else(|| Error::Parse { pos, msg: format!("expected `key = value`, found {stmt:?}") })?;
                job.set(key.trim(), value.trim(), pos)?;
            }
        }
        Ok(job)
    }
}

impl JobSpec {
    fn set(&mut self, key: &str, value: &str, pos: usize) -> Result<(), Error> {
        let bad = |msg: String| Error::Parse { pos, msg };
        let int = |v: &str| v.trim().parse::<u64>().map_err(|_| bad(format!("`{key}` expects an integer, found {v:?}")));
        let ints = |v: &str| -> Result<Vec<u64>, Error> { list(v).iter().map(|s| int(s)).collect() };
        match key {
            "command" => {
                self.command = Some(Command::from_name(value).ok_or_else(|| bad(format!("unknown command {value:?}")))?)
            }
            "p" => self.p = Some(int(value)?),
            "vars" => self.vars = list(value),
            "ideal" => self.ideal.extend(list(value)),
            "point" => self.point = Some(ints(value)?),
            "branch" => {
                let (gens, cross) = match value.split_once("cross") {
                    Some((g, c)) => (g, c),
                    None => (value, ""),
                };
                let words = |s: &str| -> Result<Vec<u64>, Error> { s.split_whitespace().map(int).collect() };
                self.branches.push(Branch { semigroup: words(gens)?, cross_valuations: words(cross)? });
            }
            "emax" => self.emax = Some(int(value)? as u32),
            "ecap" => self.ecap = Some(int(value)? as u32),
            "budget_pairs" => self.budget_pairs = Some(int(value)?),
            "budget_degree" => self.budget_degree = Some(int(value)?),
            "precision" => self.precision = Some(int(value)? as usize),
            "seed" => self.seed = Some(int(value)?),
            "element" => self.element = Some(value.to_string()),
            "scan_point" => self.scan_points.push(ints(value)?),
            "subvariety" => self.subvarieties.push(Subvariety { prime: list(value), witnesses: Vec::new() }),
            "witness" => {
                let sub = self.subvarieties.last_mut().ok_or_else(|| bad("`witness` before any `subvariety`".into()))?;
                let (pt, lifts) = value.split_once('|').unwrap_or((value, ""));
                let point = list(pt).iter().map(|s| int(s)).collect::<Result<_, _>>()?;
                sub.witnesses.push(Witness { point, lifts: list(lifts) });
            }
            "socle_ideal" => self.socle_ideal.extend(list(value)),
            "socle_element" => self.socle_element = Some(value.to_string()),
            "bound_m" => self.bound_m = Some(int(value)?),
            "bound_delta" => self.bound_delta = Some(int(value)?),
            "bound_variant" => match value {
                "single" | "module" => self.bound_variant = Some(value.to_string()),
                _ => return Err(bad(format!("bound_variant is `single` or `module`, found {value:?}"))),
            },
            "json" => self.json = Some(PathBuf::from(value)),
            "csv" => self.csv = Some(PathBuf::from(value)),
            _ => return Err(bad(format!("unknown key {key:?}"))),
        }
        Ok(())
    }
}

/// Canonical text form; parses back to an equal job.
impl fmt::Display for JobSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.command {
            writeln!(f, "command = {}", c.name())?;
        }
        if let Some(p) = self.p {
            writeln!(f, "p = {p}")?;
        }
        if !self.vars.is_empty() {
            writeln!(f, "vars = {}", join(&self.vars, ", "))?;
        }
        if !self.ideal.is_empty() {
            writeln!(f, "ideal = {}", join(&self.ideal, ", "))?;
        }
        if let Some(pt) = &self.point {
            writeln!(f, "point = {}", join(pt, ","))?;
        }
        for b in &self.branches {
            write!(f, "branch = {}", join(&b.semigroup, " "))?;
            if !b.cross_valuations.is_empty() {
                write!(f, " cross {}", join(&b.cross_valuations, " "))?;
            }
            writeln!(f)?;
        }
        let opt = |f: &mut fmt::Formatter<'_>, k: &str, v: Option<String>| -> fmt::Result {
            match v {
                Some(v) => writeln!(f, "{k} = {v}"),
                None => Ok(()),
            }
        };
        opt(f, "emax", self.emax.map(|v| v.to_string()))?;
        opt(f, "ecap", self.ecap.map(|v| v.to_string()))?;
        opt(f, "budget_pairs", self.budget_pairs.map(|v| v.to_string()))?;
        opt(f, "budget_degree", self.budget_degree.map(|v| v.to_string()))?;
        opt(f, "precision", self.precision.map(|v| v.to_string()))?;
        opt(f, "seed", self.seed.map(|v| v.to_string()))?;
        opt(f, "element", self.element.clone())?;
        for pt in &self.scan_points {
            writeln!(f, "scan_point = {}", join(pt, ","))?;
        }
        for s in &self.subvarieties {
            writeln!(f, "subvariety = {}", join(&s.prime, ", "))?;
            for w in &s.witnesses {
                writeln!(f, "witness = {} | {}", join(&w.point, ","), join(&w.lifts, ", "))?;
            }
        }
        if !self.socle_ideal.is_empty() {
            writeln!(f, "socle_ideal = {}", join(&self.socle_ideal, ", "))?;
        }
        opt(f, "socle_element", self.socle_element.clone())?;
        opt(f, "bound_m", self.bound_m.map(|v| v.to_string()))?;
        opt(f, "bound_delta", self.bound_delta.map(|v| v.to_string()))?;
        opt(f, "bound_variant", self.bound_variant.clone())?;
        opt(f, "json", self.json.as_ref().map(|p| p.display().to_string()))?;
        opt(f, "csv", self.csv.as_ref().map(|p| p.display().to_string()))?;
        Ok(())
    }
}
