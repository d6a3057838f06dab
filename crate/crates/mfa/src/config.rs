//! Flat INI-style run configuration.
//!
//! Sections `[system] [potential] [numerics] [output]` with `key = value`
//! lines, UTF-8, `#` comments, decimal numbers with optional exponent.
//! Repeated keys accumulate (used for explicit `edge =` lists).

use std::collections::BTreeMap;

use crate::builtin;
use crate::error::{MfaError, Result};
use crate::interval::Interval;
use crate::maps::MapKind;
use crate::potential::PotentialFamily;
use crate::system::{EdgeMap, Incidence, SystemSpec, TailModel, VertexPiece};

/// Parsed INI document.
#[derive(Debug, Clone, Default)]
pub struct Ini {
    sections: BTreeMap<String, Vec<(String, String)>>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Ini> {
        let mut sections: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                MfaError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            if current.is_empty() {
                return Err(MfaError::Config(format!(
                    "line {}: key outside any [section]",
                    lineno + 1
                )));
            }
            sections
                .get_mut(&current)
                .unwrap()
                .push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(Ini { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|kv| {
            kv.iter()
                .rev()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        })
    }

    pub fn get_all(&self, section: &str, key: &str) -> Vec<&str> {
        self.sections
            .get(section)
            .map(|kv| {
                kv.iter()
                    .filter(|(k, _)| k == key)
                    .map(|(_, v)| v.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .push((key.to_string(), value));
    }

    fn f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| MfaError::Config(format!("[{section}] {key}: bad number '{v}'"))),
        }
    }

    fn usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| MfaError::Config(format!("[{section}] {key}: bad integer '{v}'"))),
        }
    }

    fn f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => {
                let parsed: std::result::Result<Vec<f64>, _> =
                    v.split(',').map(|s| s.trim().parse()).collect();
                parsed.map(Some).map_err(|_| {
                    MfaError::Config(format!("[{section}] {key}: bad number list '{v}'"))
                })
            }
        }
    }
}

/// How `u` is chosen for the weight family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum USpec {
    Value(f64),
    /// Use the computed Hausdorff dimension (degenerate linear benchmark).
    Dimension,
}

/// Everything a run needs, resolved from file plus flag overrides.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system_name: String,
    pub ratios: Option<Vec<f64>>,
    pub offsets: Option<Vec<f64>>,
    pub truncation: Option<usize>,
    pub eps: Option<f64>,
    pub digits: Option<Vec<f64>>,
    pub explicit: Option<Ini>,

    pub psi: String,
    pub psi_values: Option<Vec<f64>>,
    pub u: USpec,
    pub normalize: bool,

    pub n_max: usize,
    pub nodes: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub q: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub seed: u64,
    pub word_budget: u128,
    pub threads: usize,
    pub sample_count: usize,
    pub word_length: usize,
    pub band: f64,

    pub out: Option<String>,
}

impl RunConfig {
    pub fn from_ini(ini: &Ini) -> Result<RunConfig> {
        let system_name = ini
            .get("system", "name")
            .ok_or_else(|| MfaError::Config("[system] name is required".into()))?
            .to_string();
        let u = match ini.get("potential", "u") {
            None => USpec::Dimension,
            Some("dim") => USpec::Dimension,
            Some(v) => USpec::Value(v.parse().map_err(|_| {
                MfaError::Config(format!("[potential] u: bad value '{v}'"))
            })?),
        };
        let psi_raw = ini.get("potential", "psi").unwrap_or("zero").to_string();
        let (psi, psi_values) = match psi_raw.split_once(' ') {
            Some((kind, rest)) => {
                let vals: std::result::Result<Vec<f64>, _> =
                    rest.split(',').map(|s| s.trim().parse()).collect();
                (
                    kind.to_string(),
                    Some(vals.map_err(|_| {
                        MfaError::Config(format!("[potential] psi: bad list '{rest}'"))
                    })?),
                )
            }
            None => (psi_raw, None),
        };
        let cfg = RunConfig {
            system_name,
            ratios: ini.f64_list("system", "ratios")?,
            offsets: ini.f64_list("system", "offsets")?,
            truncation: ini.usize("system", "n")?,
            eps: ini.f64("system", "eps")?,
            digits: ini.f64_list("system", "digits")?,
            explicit: Some(ini.clone()),
            psi,
            psi_values,
            u,
            normalize: matches!(ini.get("potential", "normalize"), Some("true") | Some("1")),
            n_max: ini.usize("numerics", "n_max")?.unwrap_or(16),
            nodes: ini.usize("numerics", "nodes")?.unwrap_or(0),
            q_min: ini.f64("numerics", "q_min")?.unwrap_or(-5.0),
            q_max: ini.f64("numerics", "q_max")?.unwrap_or(5.0),
            q_steps: ini.usize("numerics", "q_steps")?.unwrap_or(101),
            q: ini.f64("numerics", "q")?.unwrap_or(1.0),
            t_min: ini.f64("numerics", "t_min")?.unwrap_or(0.3),
            t_max: ini.f64("numerics", "t_max")?.unwrap_or(1.5),
            t_steps: ini.usize("numerics", "t_steps")?.unwrap_or(13),
            seed: ini
                .get("numerics", "seed")
                .map(|v| {
                    v.parse().map_err(|_| {
                        MfaError::Config(format!("[numerics] seed: bad value '{v}'"))
                    })
                })
                .transpose()?
                .unwrap_or(42),
            word_budget: ini
                .usize("numerics", "word_budget")?
                .map(|v| v as u128)
                .unwrap_or(20_000_000),
            threads: ini.usize("numerics", "threads")?.unwrap_or(0),
            sample_count: ini.usize("numerics", "sample_count")?.unwrap_or(200),
            word_length: ini.usize("numerics", "word_length")?.unwrap_or(14),
            band: ini.f64("numerics", "band")?.unwrap_or(0.1),
            out: ini.get("output", "out").map(str::to_string),
        };
        if !(cfg.q_min < cfg.q_max) || cfg.q_steps < 2 {
            return Err(MfaError::Config(
                "q grid needs q_min < q_max and q_steps >= 2".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn build_system(&self) -> Result<SystemSpec> {
        match self.system_name.as_str() {
            "affine_cantor" => {
                let ratios = self
                    .ratios
                    .as_ref()
                    .ok_or_else(|| MfaError::Config("[system] ratios required".into()))?;
                match &self.offsets {
                    Some(offs) => builtin::affine_cantor_placed(ratios, offs),
                    None => builtin::affine_cantor(ratios),
                }
            }
            "cf_full" => {
                let n = self
                    .truncation
                    .ok_or_else(|| MfaError::Config("[system] n required".into()))?;
                builtin::cf_full(n as u32)
            }
            "cf_no_one" => {
                let n = self
                    .truncation
                    .ok_or_else(|| MfaError::Config("[system] n required".into()))?;
                builtin::cf_no_one(n as u32, self.eps.unwrap_or(-0.25))
            }
            "cf_digits" => {
                let digits = self
                    .digits
                    .as_ref()
                    .ok_or_else(|| MfaError::Config("[system] digits required".into()))?;
                let d: Vec<u32> = digits.iter().map(|&v| v as u32).collect();
                builtin::cf_digits(&d)
            }
            "explicit" => build_explicit(self.explicit.as_ref().unwrap()),
            other => Err(MfaError::Config(format!("unknown system '{other}'"))),
        }
    }

    pub fn resolve_u(&self, sys: &SystemSpec) -> Result<f64> {
        match self.u {
            USpec::Value(v) => Ok(v),
            USpec::Dimension => Ok(crate::thermo::hausdorff_dimension(sys)?.value),
        }
    }

    pub fn build_family(&self, sys: &SystemSpec) -> Result<PotentialFamily> {
        let u = self.resolve_u(sys)?;
        let family = match self.psi.as_str() {
            "zero" => PotentialFamily::geometric(sys, u)?,
            "constants" => {
                let vals = self.psi_values.clone().ok_or_else(|| {
                    MfaError::Config("psi constants need a value list".into())
                })?;
                PotentialFamily::edge_constants(sys, vals, u)?
            }
            "measure_weights" => {
                let vals = self.psi_values.clone().ok_or_else(|| {
                    MfaError::Config("psi measure_weights need probabilities".into())
                })?;
                PotentialFamily::measure_weights(sys, &vals, u)?
            }
            other => {
                return Err(MfaError::Config(format!("unknown psi spec '{other}'")));
            }
        };
        if self.normalize {
            crate::potential::normalize(sys, &family, 1e-9)
        } else {
            Ok(family)
        }
    }

    /// Echo the effective configuration as deterministic comment lines.
    pub fn echo_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |s: String| out.push(format!("# {s}"));
        push(format!("[system] name = {}", self.system_name));
        if let Some(r) = &self.ratios {
            push(format!("[system] ratios = {}", join(r)));
        }
        if let Some(o) = &self.offsets {
            push(format!("[system] offsets = {}", join(o)));
        }
        if let Some(n) = self.truncation {
            push(format!("[system] n = {n}"));
        }
        if let Some(e) = self.eps {
            push(format!("[system] eps = {e}"));
        }
        if let Some(d) = &self.digits {
            push(format!("[system] digits = {}", join(d)));
        }
        let u = match self.u {
            USpec::Value(v) => format!("{v}"),
            USpec::Dimension => "dim".to_string(),
        };
        let psi = match &self.psi_values {
            Some(v) => format!("{} {}", self.psi, join(v)),
            None => self.psi.clone(),
        };
        push(format!("[potential] psi = {psi}"));
        push(format!("[potential] u = {u}"));
        push(format!("[potential] normalize = {}", self.normalize));
        push(format!("[numerics] n_max = {}", self.n_max));
        push(format!("[numerics] nodes = {}", self.nodes));
        push(format!(
            "[numerics] q_min = {} q_max = {} q_steps = {}",
            self.q_min, self.q_max, self.q_steps
        ));
        push(format!("[numerics] q = {}", self.q));
        push(format!(
            "[numerics] t_min = {} t_max = {} t_steps = {}",
            self.t_min, self.t_max, self.t_steps
        ));
        push(format!("[numerics] seed = {}", self.seed));
        push(format!("[numerics] word_budget = {}", self.word_budget));
        push(format!("[numerics] threads = {}", self.threads));
        push(format!(
            "[numerics] sample_count = {} word_length = {} band = {}",
            self.sample_count, self.word_length, self.band
        ));
        out
    }
}

fn join(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Explicit system grammar:
///
/// ```text
/// [system]
/// name = explicit
/// vertices = 0 1 ; -0.25 0.75      # one "lo hi" pair per vertex
/// edge = 0 0 affine 0.4 0          # source target affine slope offset
/// edge = 0 0 moebius 0 1 1 2       # source target moebius a b c d
/// incidence = full                 # or rows like "11;10"
/// tail_gamma = 2.0                 # optional tail model
/// tail_log_power = 0
/// tail_accumulation = 0
/// ```
fn build_explicit(ini: &Ini) -> Result<SystemSpec> {
    let vtext = ini
        .get("system", "vertices")
        .ok_or_else(|| MfaError::Config("[system] vertices required for explicit".into()))?;
    let mut vertices = Vec::new();
    for (id, part) in vtext.split(';').enumerate() {
        let nums: Vec<f64> = part
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| MfaError::Config(format!("bad vertex interval '{part}'")))?;
        if nums.len() != 2 {
            return Err(MfaError::Config(format!(
                "vertex needs 'lo hi', got '{part}'"
            )));
        }
        vertices.push(VertexPiece {
            id,
            interval: Interval::new(nums[0], nums[1]),
        });
    }
    let mut edges = Vec::new();
    for spec in ini.get_all("system", "edge") {
        let parts: Vec<&str> = spec.split_whitespace().collect();
        if parts.len() < 3 {
            return Err(MfaError::Config(format!("bad edge spec '{spec}'")));
        }
        let source: usize = parts[0]
            .parse()
            .map_err(|_| MfaError::Config(format!("bad edge source in '{spec}'")))?;
        let target: usize = parts[1]
            .parse()
            .map_err(|_| MfaError::Config(format!("bad edge target in '{spec}'")))?;
        let nums: Vec<f64> = parts[3..]
            .iter()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| MfaError::Config(format!("bad edge params in '{spec}'")))?;
        let kind = match (parts[2], nums.len()) {
            ("affine", 2) => MapKind::Affine {
                slope: nums[0],
                offset: nums[1],
            },
            ("moebius", 4) => MapKind::Moebius {
                a: nums[0],
                b: nums[1],
                c: nums[2],
                d: nums[3],
            },
            _ => {
                return Err(MfaError::Config(format!(
                    "edge kind must be 'affine r b' or 'moebius a b c d': '{spec}'"
                )))
            }
        };
        edges.push(EdgeMap {
            source,
            target,
            kind,
            contraction_bound: 0.0,
            label: format!("{}", edges.len()),
        });
    }
    if edges.is_empty() {
        return Err(MfaError::Config("explicit system needs edge lines".into()));
    }
    let incidence = match ini.get("system", "incidence") {
        None | Some("full") => Incidence::full(edges.len()),
        Some(rows) => {
            let parsed: Vec<Vec<bool>> = rows
                .split(';')
                .map(|r| r.trim().chars().map(|c| c == '1').collect())
                .collect();
            Incidence::from_rows(parsed)?
        }
    };
    let tail = match ini.get("system", "tail_gamma") {
        None => None,
        Some(g) => {
            let gamma: f64 = g
                .parse()
                .map_err(|_| MfaError::Config("bad tail_gamma".into()))?;
            let log_power = ini.f64("system", "tail_log_power")?.unwrap_or(0.0);
            let accumulation = ini
                .f64_list("system", "tail_accumulation")?
                .unwrap_or_default();
            Some(TailModel {
                gamma,
                log_power,
                accumulation,
            })
        }
    };
    SystemSpec::new("explicit", vertices, edges, incidence, tail, None)
}
