//! Flat `key = value` run configuration.
//!
//! ```text
//! # N=1 reference run
//! dimension = 1
//! s = 0.7
//! beta = 0.8
//! lambda = 1
//! c2 = 1
//! n = 512
//! L = 40
//! ```
//!
//! `n` and `L` take one value for every axis or a comma-separated list.
//! `tau` and `dt` accept `auto`. Unknown and repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{FnlsError, Result};
use crate::functionals::Problem;
use crate::ground_state::SolverOptions;
use crate::model::{validate, AdmissibilityReport, NonlinearitySpec, PhysicsParams};
use crate::spectral::{Grid, KernelQuadrature};

pub const KEYS: [&str; 17] = [
    "dimension", "s", "beta", "lambda", "c2", "cmu", "mu", "n", "L", "tau", "tol", "max_iters", "T", "dt", "record_stride",
    "seed", "kernel",
];
const REQUIRED: [&str; 7] = ["dimension", "s", "beta", "lambda", "c2", "n", "L"];

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSettings {
    pub t_final: f64,
    /// `None` selects the resolution heuristic of the evolution module.
    pub dt: Option<f64>,
    pub record_stride: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub physics: PhysicsParams,
    pub nonlinearity: NonlinearitySpec,
    pub grid: Grid,
    pub kernel: KernelQuadrature,
    pub solver: SolverOptions,
    pub evolution: EvolutionSettings,
    pub seed: u64,
    pub admissibility: AdmissibilityReport,
}

impl RunConfig {
    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.physics, self.nonlinearity, &self.grid, self.kernel)
    }

    pub fn dt(&self) -> f64 {
        self.evolution.dt.unwrap_or_else(|| crate::evolution::default_dt(&self.grid, self.physics.frac_order))
    }

    /// Canonical text form; floats use the shortest round-tripping repr.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let join = |v: Vec<String>| v.join(",");
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("dimension", self.physics.dimension.to_string());
        line("s", self.physics.frac_order.to_string());
        line("beta", self.physics.kernel_exponent.to_string());
        line("lambda", self.physics.mass.to_string());
        line("c2", self.nonlinearity.c2.to_string());
        line("cmu", self.nonlinearity.cmu.to_string());
        line("mu", self.nonlinearity.mu.to_string());
        line("n", join(self.grid.dims().iter().map(|v| v.to_string()).collect()));
        line("L", join(self.grid.lengths().iter().map(|v| v.to_string()).collect()));
        line("tau", self.solver.tau.map_or("auto".into(), |v| v.to_string()));
        line("tol", self.solver.tol.to_string());
        line("max_iters", self.solver.max_iters.to_string());
        line("T", self.evolution.t_final.to_string());
        line("dt", self.evolution.dt.map_or("auto".into(), |v| v.to_string()));
        line("record_stride", self.evolution.record_stride.to_string());
        line("seed", self.seed.to_string());
        line("kernel", self.kernel.to_string());
        out
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| FnlsError::Config { line, message: format!("cannot parse '{value}' for key '{key}'") })
}

fn parse_list<T: FromStr + Clone>(key: &str, value: &str, line: usize, ndim: usize) -> Result<Vec<T>> {
    let items: Vec<T> = value.split(',').map(|v| parse_value(key, v.trim(), line)).collect::<Result<_>>()?;
    match items.len() {
        1 => Ok(vec![items[0].clone(); ndim]),
        k if k == ndim => Ok(items),
        k => Err(FnlsError::Config { line, message: format!("'{key}' has {k} entries for dimension {ndim}") }),
    }
}

fn parse_auto(key: &str, value: &str, line: usize) -> Result<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_value(key, value, line).map(Some)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| FnlsError::Config { line, message: format!("expected 'key = value', got '{content}'") })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(FnlsError::Config { line, message: format!("unknown key '{key}'") });
        }
        if let Some((_, first)) = entries.get(key) {
            return Err(FnlsError::Config { line, message: format!("duplicate key '{key}' on lines {first} and {line}") });
        }
        entries.insert(key.to_string(), (value.to_string(), line));
    }
    for key in REQUIRED {
        if !entries.contains_key(key) {
            return Err(FnlsError::Config { line: 0, message: format!("missing required key '{key}'") });
        }
    }
    let get = |k: &str| entries.get(k).map(|(v, l)| (v.as_str(), *l));
    fn req<T: FromStr>(e: Option<(&str, usize)>, key: &str) -> Result<T> {
        let (v, l) = e.expect("required key checked");
        parse_value(key, v, l)
    }
    fn opt<T: FromStr>(e: Option<(&str, usize)>, key: &str, default: T) -> Result<T> {
        match e {
            Some((v, l)) => parse_value(key, v, l),
            None => Ok(default),
        }
    }
    let at = |k: &str| get(k).map_or(0, |(_, l)| l);
    let wrap = |k: &str, r: Result<PhysicsParams>| r.map_err(|e| FnlsError::Config { line: at(k), message: e.to_string() });

    let dimension: usize = req(get("dimension"), "dimension")?;
    let physics = wrap(
        "dimension",
        PhysicsParams::new(dimension, req(get("s"), "s")?, req(get("beta"), "beta")?, req(get("lambda"), "lambda")?),
    )?;
    let nonlinearity = NonlinearitySpec::new(req(get("c2"), "c2")?, opt(get("cmu"), "cmu", 0.0)?, opt(get("mu"), "mu", 2.0)?)
        .map_err(|e| FnlsError::Config { line: at("c2"), message: e.to_string() })?;
    let (nv, nl) = get("n").expect("required");
    let (lv, ll) = get("L").expect("required");
    let dims: Vec<usize> = parse_list("n", nv, nl, dimension)?;
    let lengths: Vec<f64> = parse_list("L", lv, ll, dimension)?;
    let grid = Grid::new(dims, lengths).map_err(|e| FnlsError::Config { line: nl, message: e.to_string() })?;

    let defaults = SolverOptions::default();
    let tau = match get("tau") {
        Some((v, l)) => parse_auto("tau", v, l)?,
        None => None,
    };
    let solver = SolverOptions {
        tau,
        tol: opt(get("tol"), "tol", defaults.tol)?,
        max_iters: opt(get("max_iters"), "max_iters", defaults.max_iters)?,
        ..defaults
    };
    let dt = match get("dt") {
        Some((v, l)) => parse_auto("dt", v, l)?,
        None => None,
    };
    let evolution = EvolutionSettings {
        t_final: opt(get("T"), "T", 10.0)?,
        dt,
        record_stride: opt(get("record_stride"), "record_stride", 10)?,
    };
    let kernel = opt(get("kernel"), "kernel", KernelQuadrature::default())?;
    let seed = opt(get("seed"), "seed", 0)?;
    let admissibility = validate(&physics, &nonlinearity);
    Ok(RunConfig { physics, nonlinearity, grid, kernel, solver, evolution, seed, admissibility })
}
