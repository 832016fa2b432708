use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use fnls::analysis::levy::levy_concentration;
use fnls::analysis::scaling::{geometric_ladder, gn_hls_exponents, scaling_exponents, ExponentFit};
use fnls::analysis::stability::{stability_experiment, StabilityRow, StabilitySetup};
use fnls::analysis::subadd::{continuity_proxy, small_mass_limit, subadditivity_check, theta_scaling_check};
use fnls::analysis::{orbit_distance, PerturbationKind, ShiftSearch};
use fnls::config::RunConfig;
use fnls::evolution::{evolve as run_evolve, EvolveOptions, TrajectoryRecord};
use fnls::ground_state::{mass_energy_curve, solve_ground_state, CurvePoint, GroundStateResult, HistoryEntry, InitialGuess};
use fnls::report::{fmt_f64, Assertion, Summary};
use fnls::spectral::save_snapshot;
use fnls::ComplexField;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::io::{self, load_config, load_state, parse_list, CliResult};
use crate::ConfigArgs;

pub type Report = Summary<Value>;

const MASS_DRIFT_TOLERANCE: f64 = 1e-9;
const FIT_REL_TOLERANCE: f64 = 0.01;
const MASS_SLOPE_TOLERANCE: f64 = 1e-3;
const TREND_TOLERANCE: f64 = 0.05;
const SLOPE_WINDOW: (f64, f64) = (0.8, 1.2);
const MAX_RELATIVE_DISTANCE: f64 = 0.5;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report data serialises")
}

pub fn validate(args: &ConfigArgs) -> CliResult<Report> {
    let cfg = load_config(args)?;
    let data = json!({
        "config": cfg.serialize(),
        "admissibility": to_value(&cfg.admissibility),
        "subcritical": cfg.physics.is_subcritical(),
    });
    Ok(Summary::new("validate", Vec::new(), data))
}

#[derive(Args, Debug)]
pub struct GroundStateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Start from this snapshot instead of the default Gaussian.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Start from a smooth random field drawn with the configured seed.
    #[arg(long, conflicts_with = "init")]
    pub random_init: bool,
    /// Write the converged state here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the per-iteration history CSV here.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

fn ground_state_assertions(cfg: &RunConfig, r: &GroundStateResult) -> Vec<Assertion> {
    let mut out = vec![
        Assertion::new("converged", r.converged, format!("{} iterations, residual {:e}", r.iterations, r.el_residual)),
        Assertion::new(
            "boundary_mass",
            r.boundary_fraction <= cfg.solver.boundary_tolerance,
            format!("outer-shell mass fraction {:e}", r.boundary_fraction),
        ),
    ];
    if cfg.admissibility.negative_energy_ok {
        out.push(Assertion::new("negative_energy", r.energy.total < 0.0, format!("E = {}", fmt_f64(r.energy.total))));
    }
    out
}

fn ground_state_data(r: &GroundStateResult) -> Value {
    json!({
        "energy": to_value(&r.energy),
        "kappa": r.kappa,
        "el_residual": r.el_residual,
        "hs_norm": r.hs_norm,
        "energy_uncertainty": r.energy_uncertainty,
        "iterations": r.iterations,
        "converged": r.converged,
        "boundary_fraction": r.boundary_fraction,
        "warnings": r.warnings,
    })
}

fn solve(cfg: &RunConfig, init: InitialGuess) -> CliResult<GroundStateResult> {
    let problem = cfg.problem()?;
    Ok(solve_ground_state(&problem, init, &cfg.solver)?)
}

fn write_history(path: &Path, r: &GroundStateResult) -> CliResult<()> {
    io::write_csv(path, HistoryEntry::CSV_HEADER, &r.history, HistoryEntry::csv_row)
}

pub fn ground_state(args: &GroundStateArgs) -> CliResult<Report> {
    let cfg = load_config(&args.config)?;
    let init = match &args.init {
        Some(path) => InitialGuess::Field(load_state(path, &cfg)?),
        None if args.random_init => InitialGuess::Random(cfg.seed),
        None => InitialGuess::Gaussian,
    };
    let r = solve(&cfg, init)?;
    if let Some(path) = &args.out {
        save_snapshot(path, &r.state)?;
    }
    if let Some(path) = &args.history {
        write_history(path, &r)?;
    }
    Ok(Summary::new("ground-state", ground_state_assertions(&cfg, &r), ground_state_data(&r)))
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Initial state snapshot.
    #[arg(long)]
    pub init: PathBuf,
    /// Final time (default: the configured `T`).
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    /// Time step (default: the configured `dt`).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Reference state for the orbit distance column.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Trajectory CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Dump the state at every n-th record.
    #[arg(long, requires = "dump_prefix")]
    pub dump_every: Option<usize>,
    /// Dumps are written to `<prefix><record index>.snap`.
    #[arg(long)]
    pub dump_prefix: Option<String>,
    /// Translation search for the orbit distance (grid, neighborhood, sub-grid).
    #[arg(long, default_value = "neighborhood")]
    pub search: ShiftSearch,
}

pub fn evolve(args: &EvolveArgs) -> CliResult<Report> {
    let cfg = load_config(&args.config)?;
    let problem = cfg.problem()?;
    let phi0 = load_state(&args.init, &cfg)?;
    let reference = args.reference.as_deref().map(|p| load_state(p, &cfg)).transpose()?;
    let mut opts = EvolveOptions::new(args.t_final.unwrap_or(cfg.evolution.t_final), args.dt.unwrap_or_else(|| cfg.dt()));
    opts.record_stride = cfg.evolution.record_stride;
    opts.shift_search = args.search;

    let mut csv = io::create(&args.out)?;
    writeln!(csv, "{}", TrajectoryRecord::CSV_HEADER)?;
    let dump_every = args.dump_every.filter(|&n| n > 0);
    let mut index = 0usize;
    let traj = run_evolve(&problem, &phi0, &opts, reference.as_ref(), |rec, phi| {
        writeln!(csv, "{}", rec.csv_row())?;
        if let (Some(n), Some(prefix)) = (dump_every, &args.dump_prefix) {
            if index.is_multiple_of(n) {
                save_snapshot(format!("{prefix}{index:06}.snap"), phi)?;
            }
        }
        index += 1;
        Ok(())
    })?;
    csv.flush()?;

    let mass_drift = traj.max_mass_drift();
    let mut assertions = vec![
        Assertion::new("completed", traj.failure.is_none(), traj.failure.clone().unwrap_or_else(|| format!("{} steps", traj.steps))),
        Assertion::new("mass_conserved", mass_drift <= MASS_DRIFT_TOLERANCE, format!("max relative drift {mass_drift:e}")),
    ];
    if let Some(d) = traj.max_orbit_distance() {
        assertions.push(Assertion::new("orbit_distance_finite", d.is_finite(), format!("max distance {d:e}")));
    }
    let data = json!({
        "steps": traj.steps,
        "dt": traj.dt,
        "records": traj.records.len(),
        "max_mass_drift": mass_drift,
        "max_energy_drift": traj.max_energy_drift(),
        "max_orbit_distance": traj.max_orbit_distance(),
    });
    Ok(Summary::new("evolve", assertions, data))
}

#[derive(Args, Debug)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Ground-state snapshot.
    #[arg(long)]
    pub gs: PathBuf,
    /// Comma-separated perturbation sizes in units of the ground state's H^s norm.
    #[arg(long)]
    pub deltas: String,
    /// Comma-separated perturbation kinds (random-smooth, mode-bump, phase-ramp).
    #[arg(long, default_value = "random-smooth,mode-bump,phase-ramp")]
    pub kinds: String,
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Per-row CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "sub-grid")]
    pub search: ShiftSearch,
}

pub fn stability(args: &StabilityArgs) -> CliResult<Report> {
    let cfg = load_config(&args.config)?;
    let problem = cfg.problem()?;
    let gs = load_state(&args.gs, &cfg)?;
    let setup = StabilitySetup {
        deltas: parse_list(&args.deltas)?,
        kinds: parse_list::<PerturbationKind>(&args.kinds)?,
        t_final: args.t_final.unwrap_or(cfg.evolution.t_final),
        dt: args.dt.unwrap_or_else(|| cfg.dt()),
        record_stride: cfg.evolution.record_stride,
        seed: cfg.seed,
        shift_search: args.search,
    };
    let report = stability_experiment(&problem, &gs, &setup)?;
    io::write_csv(&args.out, StabilityRow::CSV_HEADER, &report.rows, StabilityRow::csv_row)?;

    let errors: Vec<String> = report.rows.iter().filter_map(|r| r.error.clone()).collect();
    let mut assertions = vec![
        Assertion::new("runs_completed", errors.is_empty(), errors.join("; ")),
        Assertion::new(
            "distance_bounded",
            report.max_relative_distance <= MAX_RELATIVE_DISTANCE,
            format!("max sup_t d/|u|_Hs = {:e}", report.max_relative_distance),
        ),
    ];
    for f in &report.fits {
        let ok = f.slope.is_some_and(|s| (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&s));
        assertions.push(Assertion::new(format!("linear_response_{}", f.kind), ok, format!("slope {:?}, R^2 {:?}", f.slope, f.r_squared)));
    }
    let data = json!({ "hs_norm": report.hs_norm, "max_relative_distance": report.max_relative_distance, "fits": to_value(&report.fits) });
    Ok(Summary::new("stability", assertions, data))
}

#[derive(Subcommand, Debug)]
pub enum Analyze {
    /// H^s distance from a state to the translation/phase orbit of another.
    Orbit {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, default_value = "sub-grid")]
        search: ShiftSearch,
    },
    /// Concentration function Q(r) and its classification.
    Levy {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated radii (default: 24 geometric radii up to 45% of the box).
        #[arg(long)]
        radii: Option<String>,
        /// Fail unless the classification is this one.
        #[arg(long)]
        expect: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fitted scaling exponents of the energy terms and the interaction bounds.
    Exponents {
        #[command(flatten)]
        config: ConfigArgs,
        /// Profile to rescale (default: a Gaussian of width 2).
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mass-energy curve and the subadditivity, scaling and small-mass checks.
    Subadd {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated splits pi/lambda in (0, 1).
        #[arg(long, default_value = "0.5,0.25")]
        splits: String,
        /// Curve CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn analyze(what: &Analyze) -> CliResult<Report> {
    match what {
        Analyze::Orbit { config, state, reference, search } => {
            let cfg = load_config(config)?;
            let problem = cfg.problem()?;
            let phi = load_state(state, &cfg)?;
            let w = load_state(reference, &cfg)?;
            let d = orbit_distance(problem.ops(), &phi, &w, problem.s(), *search)?;
            Ok(Summary::new("analyze orbit", Vec::new(), to_value(&d)))
        }
        Analyze::Levy { config, state, radii, expect, out } => {
            let cfg = load_config(config)?;
            let problem = cfg.problem()?;
            let u = load_state(state, &cfg)?;
            let radii = match radii {
                Some(text) => parse_list(text)?,
                None => {
                    let half = cfg.grid.lengths().iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
                    geometric_ladder(2.0 * cfg.grid.min_spacing(), 0.9 * half, 24)
                }
            };
            let profile = levy_concentration(problem.ops(), &u, &radii)?;
            let rows: Vec<(f64, f64)> = profile.radii.iter().cloned().zip(profile.q.iter().cloned()).collect();
            io::write_csv(out, "r,q", &rows, |(r, q)| format!("{},{}", fmt_f64(*r), fmt_f64(*q)))?;
            let monotone = profile.q.windows(2).all(|w| w[0] <= w[1]) && profile.q.iter().all(|&q| q <= profile.mass * (1.0 + 1e-12));
            let mut assertions = vec![Assertion::new("q_monotone_bounded", monotone, String::new())];
            if let Some(expected) = expect {
                let got = profile.classification.to_string();
                assertions.push(Assertion::new("classification", &got == expected, format!("{got} (expected {expected})")));
            }
            Ok(Summary::new("analyze levy", assertions, to_value(&profile)))
        }
        Analyze::Exponents { config, state, out } => {
            let cfg = load_config(config)?;
            let problem = cfg.problem()?;
            let u = match state {
                Some(path) => load_state(path, &cfg)?,
                None => ComplexField::gaussian(&cfg.grid, &vec![0.0; cfg.grid.ndim()], 2.0, 1.0),
            };
            let kappas = geometric_ladder(0.5, 2.0, 9);
            let fits = scaling_exponents(&problem, &u, &kappas)?;
            io::write_csv(out, "name,predicted,fitted,rel_error,abs_error,r_squared,flagged", &fits, |f: &ExponentFit| {
                format!(
                    "{},{},{},{},{},{},{}",
                    f.name,
                    fmt_f64(f.predicted),
                    fmt_f64(f.fitted),
                    fmt_f64(f.rel_error),
                    fmt_f64(f.abs_error),
                    fmt_f64(f.r_squared),
                    f.flagged
                )
            })?;
            let mut assertions: Vec<Assertion> = fits
                .iter()
                .map(|f| {
                    let within = if f.name == "mass" { f.abs_error <= MASS_SLOPE_TOLERANCE } else { f.rel_error <= FIT_REL_TOLERANCE };
                    Assertion::new(format!("exponent_{}", f.name), within && !f.flagged, format!("{} vs {}", f.fitted, f.predicted))
                })
                .collect();
            let bounds = gn_hls_exponents(&problem, &u, &geometric_ladder(0.5, 2.0, 5), &geometric_ladder(0.7, 1.4, 5))?;
            for b in bounds.pairings.iter().filter(|b| !b.flagged) {
                let trend = b.amplitude_trend.abs().max(b.dilation_trend.abs());
                assertions.push(Assertion::new(format!("bound_D{}{}", b.i, b.j), trend <= TREND_TOLERANCE, format!("eta {}, trend {trend:e}", b.eta)));
            }
            if cfg.admissibility.negative_energy_ok {
                assertions.push(Assertion::new("young_exponents_above_one", bounds.e_above_one, format!("{:?}", bounds.e)));
            }
            Ok(Summary::new("analyze exponents", assertions, json!({ "fits": to_value(&fits), "bounds": to_value(&bounds) })))
        }
        Analyze::Subadd { config, splits, out } => subadd(config, splits, out),
    }
}

const CONTINUITY_EPSILONS: [f64; 4] = [0.08, 0.04, 0.02, 0.01];

fn push_unique(list: &mut Vec<f64>, v: f64) {
    if !list.iter().any(|x| (x - v).abs() <= 1e-12 * v.abs().max(1.0)) {
        list.push(v);
    }
}

fn subadd(config: &ConfigArgs, splits: &str, out: &Path) -> CliResult<Report> {
    let cfg = load_config(config)?;
    let problem = cfg.problem()?;
    let lambda = cfg.physics.mass;
    let fractions: Vec<f64> = parse_list(splits)?;
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(format!("split {f} outside (0, 1)").into());
    }
    let mut lambdas = vec![lambda];
    let pairs: Vec<(f64, f64)> = fractions.iter().map(|f| (f * lambda, lambda)).collect();
    for &(pi, l) in &pairs {
        push_unique(&mut lambdas, pi);
        push_unique(&mut lambdas, l - pi);
    }
    for e in CONTINUITY_EPSILONS {
        push_unique(&mut lambdas, lambda * (1.0 + e));
    }
    let curve = mass_energy_curve(&problem, &lambdas, &cfg.solver);
    if let Some((l, e)) = curve.failures.first() {
        return Err(format!("solver failed at lambda = {l}: {e}").into());
    }
    let mut points = curve.points.clone();
    points.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    io::write_csv(out, CurvePoint::CSV_HEADER, &points, CurvePoint::csv_row)?;

    let rows = subadditivity_check(&points, &pairs)?;
    let theta = theta_scaling_check(&points, lambda, &cfg.physics, 1.0)?;
    let continuity = continuity_proxy(&points, lambda, &CONTINUITY_EPSILONS)?;
    let below: Vec<CurvePoint> = points.iter().filter(|p| p.lambda <= lambda * (1.0 + 1e-12)).cloned().collect();
    let shrinking = continuity.windows(2).all(|w| w[1].1 < w[0].1);

    let mut assertions = vec![Assertion::new(
        "converged",
        points.iter().all(|p| p.converged),
        format!("{} curve points", points.len()),
    )];
    for r in &rows {
        assertions.push(Assertion::new(
            format!("subadditive_{}", r.pi),
            r.holds,
            format!("gap {:e}, margin {:e}", r.gap, r.margin),
        ));
    }
    assertions.push(Assertion::new("theta_scaling", theta.iter().all(|t| t.holds), String::new()));
    assertions.push(Assertion::new("small_mass_limit", small_mass_limit(&below), String::new()));
    assertions.push(Assertion::new("continuity", shrinking, format!("{continuity:?}")));
    let data = json!({ "curve": to_value(&points), "subadditivity": to_value(&rows), "theta": to_value(&theta) });
    Ok(Summary::new("analyze subadd", assertions, data))
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Directory of configuration files; every regular file is used.
    #[arg(long)]
    pub configs: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory for snapshots, histories and summaries.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    name: String,
    passed: bool,
    error: Option<String>,
    summary: Option<Value>,
}

fn sweep_one(path: &Path, out: &Path) -> CliResult<Report> {
    let args = ConfigArgs { config: path.to_path_buf(), overrides: Vec::new() };
    let cfg = load_config(&args)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("config");
    let r = solve(&cfg, InitialGuess::Gaussian)?;
    save_snapshot(out.join(format!("{stem}.snap")), &r.state)?;
    write_history(&out.join(format!("{stem}.history.csv")), &r)?;
    let summary = Summary::new("ground-state", ground_state_assertions(&cfg, &r), ground_state_data(&r));
    io::write_text(&out.join(format!("{stem}.json")), &format!("{}\n", summary.to_json()))?;
    Ok(summary)
}

pub fn sweep(args: &SweepArgs) -> CliResult<Report> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.configs)
        .map_err(|e| format!("{}: {e}", args.configs.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!("{}: no configuration files", args.configs.display()).into());
    }
    fs::create_dir_all(&args.out)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build()?;
    let entries: Vec<SweepEntry> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| {
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                match sweep_one(p, &args.out) {
                    Ok(s) => SweepEntry { name, passed: s.passed, error: None, summary: Some(s.data) },
                    Err(e) => SweepEntry { name, passed: false, error: Some(e.to_string()), summary: None },
                }
            })
            .collect()
    });
    let rows: Vec<&SweepEntry> = entries.iter().collect();
    io::write_csv(&args.out.join("sweep.csv"), "config,passed,energy,kappa,residual,iterations,error", &rows, |e| {
        let get = |k: &str| e.summary.as_ref().and_then(|s| s.get(k)).cloned();
        let num = |v: Option<Value>| v.and_then(|v| v.as_f64()).map(fmt_f64).unwrap_or_default();
        let energy = e.summary.as_ref().and_then(|s| s["energy"].get("total")).cloned();
        format!(
            "{},{},{},{},{},{},{}",
            e.name,
            e.passed,
            num(energy),
            num(get("kappa")),
            num(get("el_residual")),
            get("iterations").map(|v| v.to_string()).unwrap_or_default(),
            e.error.as_deref().unwrap_or("").replace(',', ";")
        )
    })?;
    let failed: Vec<&str> = entries.iter().filter(|e| e.error.is_some()).map(|e| e.name.as_str()).collect();
    if !failed.is_empty() {
        let detail: Vec<String> = entries.iter().filter_map(|e| e.error.as_ref().map(|m| format!("{}: {m}", e.name))).collect();
        return Err(format!("{} of {} configurations failed: {}", failed.len(), entries.len(), detail.join("; ")).into());
    }
    let assertions = entries.iter().map(|e| Assertion::new(e.name.clone(), e.passed, String::new())).collect();
    Ok(Summary::new("sweep", assertions, to_value(&entries)))
}
