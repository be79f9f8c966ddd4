//! Scenario configs and the runner that turns them into CSV files.
//!
//! A scenario is a list of jobs (walk evolutions, neutrino series, spectra,
//! coefficient tables, two-particle runs). Jobs are computed in parallel and
//! written sequentially; every CSV is a pure function of the config, so
//! reruns are byte-identical. Reals are written with 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::coin::{CoinAngles, CoinSchedule, Field, SubStep};
use crate::curved::{closed_form_coefficients, numeric_coefficients, reference_scenario, REFERENCE_SCENARIOS};
use crate::engine::{boundary_probability, evolve, Engine, EngineKind, ObservableSet};
use crate::error::{Error, Result};
use crate::expr::{Constants, Expr};
use crate::linalg::{c, C64};
use crate::neutrino::{analytic_series, pmns_matrix, walk_series, PmnsParams, WalkCalibration, FLAVOURS};
use crate::observables::{position_probability, two_particle_marginal};
use crate::spectral::{continuum_deviation, hk_closed_form, momentum_grid, ContinuumFamily, WalkParams};
use crate::state::{Lattice, TwoParticleState, WalkState};
use crate::two_particle::{step_two_particle, two_effective_hamiltonian, Field2, TwoCoinField};

pub const BUILTIN_SCENARIOS: [&str; 11] = [
    "flat",
    "nonstatic_gauge",
    "nonstatic",
    "static",
    "static_gauge",
    "static_x2_delocalized",
    "neutrino_short",
    "neutrino_long",
    "dca_vs_dqw",
    "continuum",
    "two_particle",
];

pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outputs {
    pub heatmap: bool,
    pub probability: bool,
    pub entropy: bool,
}

#[derive(Clone, Debug)]
pub struct WalkJob {
    /// File-name prefix, empty for a single walk.
    pub label: String,
    pub engine: Engine,
    pub initial: WalkState,
    pub steps: usize,
    pub outputs: Outputs,
}

#[derive(Clone, Debug)]
pub struct NeutrinoJob {
    pub calibration: WalkCalibration,
    pub pmns: PmnsParams,
    pub alpha: usize,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct SpectrumJob {
    pub params: WalkParams,
    pub lattice: Lattice,
}

#[derive(Clone, Debug)]
pub struct ContinuumJob {
    pub scales: [f64; 2],
    pub mass: f64,
    pub window: f64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct CoefficientJob {
    pub schedule: CoinSchedule,
    pub xs: Vec<f64>,
    pub t: f64,
    pub h: f64,
    /// Also extract the numeric coefficients with this probe step.
    pub numeric_probe: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TwoParticleJob {
    pub field: TwoCoinField,
    pub initial: TwoParticleState,
    pub dt: f64,
    pub steps: usize,
    /// (x1, x2) points for the effective-Hamiltonian table.
    pub probes: Vec<(f64, f64)>,
    pub probe_time: f64,
}

#[derive(Clone, Debug)]
pub enum Job {
    Walk(WalkJob),
    Neutrino(NeutrinoJob),
    Spectrum(SpectrumJob),
    Continuum(ContinuumJob),
    Coefficients(CoefficientJob),
    TwoParticle(TwoParticleJob),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    /// Text the config hash is taken over.
    pub source: String,
    pub jobs: Vec<Job>,
    pub memory_budget: u64,
    pub overrides: Vec<(String, String)>,
}

impl Scenario {
    pub fn new(name: &str, source: String, jobs: Vec<Job>) -> Self {
        Self { name: name.to_string(), source, jobs, memory_budget: DEFAULT_MEMORY_BUDGET, overrides: Vec::new() }
    }

    /// Replaces the step count of every time-stepping job.
    pub fn with_steps(mut self, steps: usize) -> Self {
        for job in &mut self.jobs {
            match job {
                Job::Walk(w) => w.steps = steps,
                Job::Neutrino(n) => n.steps = steps,
                Job::TwoParticle(t) => t.steps = steps,
                _ => {}
            }
        }
        self.overrides.push(("steps".into(), steps.to_string()));
        self
    }

    /// Rough peak memory of the run in bytes.
    pub fn memory_estimate(&self) -> u64 {
        self.jobs
            .iter()
            .map(|job| match job {
                Job::Walk(w) => {
                    let n = w.initial.sites() as u64;
                    let d = w.initial.coin_dim() as u64;
                    let series = if w.outputs.heatmap || w.outputs.probability { 8 * n * (w.steps as u64 + 1) } else { 0 };
                    series + 64 * d * n + 16 * w.steps as u64
                }
                Job::Neutrino(n) => 64 * (n.steps as u64 + 1),
                Job::Spectrum(s) => 128 * s.lattice.sites() as u64,
                Job::Continuum(c) => 64 * c.samples as u64,
                Job::Coefficients(c) => 128 * c.xs.len() as u64,
                Job::TwoParticle(t) => {
                    let n = t.initial.lattice().sites() as u64;
                    48 * 4 * n * n + 16 * n * t.steps as u64
                }
            })
            .sum()
    }
}

pub fn list_scenarios() -> &'static [&'static str] {
    &BUILTIN_SCENARIOS
}

fn unknown(name: &str) -> Error {
    Error::UnknownScenario { name: name.to_string(), valid: BUILTIN_SCENARIOS.join(", ") }
}

fn coin_up_i() -> [C64; 2] {
    let r = 1.0 / 2f64.sqrt();
    [c(r, 0.0), c(0.0, r)]
}

fn curved_scenario(name: &str) -> Result<Scenario> {
    let p = reference_scenario(name)?;
    let lattice = p.lattice()?;
    let dt = lattice.spacing();
    let engine = Engine::new(EngineKind::Modified(p.schedule.clone()), dt)?;
    let walk = WalkJob {
        label: String::new(),
        engine,
        initial: p.initial_state()?,
        steps: p.steps,
        outputs: Outputs { heatmap: true, probability: true, entropy: true },
    };
    let xs: Vec<f64> = lattice.sites_by_position().into_iter().step_by(10).map(|s| lattice.position(s)).collect();
    let coeffs = CoefficientJob { schedule: p.schedule, xs, t: 0.5 * p.steps as f64 * dt, h: dt, numeric_probe: None };
    Ok(Scenario::new(p.name, format!("builtin = \"{name}\"\n"), vec![Job::Walk(walk), Job::Coefficients(coeffs)]))
}

fn dca_vs_dqw() -> Result<Scenario> {
    let lattice = Lattice::with_scale(256, 100.0)?;
    let r = 1.0 / 2f64.sqrt();
    let mut pos = vec![c(0.0, 0.0); lattice.sites()];
    pos[0] = c(1.0, 0.0);
    let initial = WalkState::product(&[c(r, 0.0), c(r, 0.0)], &pos, lattice.clone())?;
    let outputs = Outputs { heatmap: false, probability: true, entropy: false };
    let dt = lattice.spacing();
    let jobs = vec![
        Job::Walk(WalkJob {
            label: "dqw_".into(),
            engine: Engine::new(EngineKind::Dqw(CoinAngles::rotation(std::f64::consts::FRAC_PI_4)), dt)?,
            initial: initial.clone(),
            steps: 100,
            outputs,
        }),
        Job::Walk(WalkJob {
            label: "dca_".into(),
            engine: Engine::new(EngineKind::Dca { eta1: r, eta2: r }, dt)?,
            initial,
            steps: 100,
            outputs,
        }),
    ];
    Ok(Scenario::new("dca_vs_dqw", "builtin = \"dca_vs_dqw\"\n".into(), jobs))
}

/// Two massive walkers with a short-range interaction phase.
pub fn two_particle_demo(sites: usize, steps: usize) -> Result<(TwoParticleJob, Lattice)> {
    let lattice = Lattice::with_scale(sites, sites as f64)?;
    let dt = lattice.spacing();
    let mut field = TwoCoinField::new();
    field.set_rate(SubStep::Second, 1, 0, Field2::Const(0.04))?;
    field.set_rate(SubStep::Second, 0, 1, Field2::Const(0.04))?;
    field.set_rate(SubStep::First, 0, 0, Field2::func(|x1, x2, _| 0.05 / ((x1 - x2).abs() + 0.1)))?;
    let walker = |off: i64| -> Result<WalkState> {
        let mut pos = vec![c(0.0, 0.0); lattice.sites()];
        pos[lattice.site(off)] = c(1.0, 0.0);
        WalkState::product(&coin_up_i(), &pos, lattice.clone())
    };
    let initial = TwoParticleState::from_product(&walker(-3)?, &walker(3)?)?;
    let probes = vec![(-0.2, 0.1), (0.05, 0.3), (0.25, -0.15)];
    Ok((TwoParticleJob { field, initial, dt, steps, probes, probe_time: 0.1 }, lattice))
}

pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let src = format!("builtin = \"{name}\"\n");
    match name {
        n if REFERENCE_SCENARIOS.contains(&n) => curved_scenario(n),
        "neutrino_short" | "neutrino_long" => {
            let cal = WalkCalibration::reference();
            let steps = if name == "neutrino_short" { cal.steps_short } else { cal.steps_long };
            let job = NeutrinoJob { calibration: cal, pmns: PmnsParams::default(), alpha: 0, steps };
            Ok(Scenario::new(name, src, vec![Job::Neutrino(job)]))
        }
        "dca_vs_dqw" => dca_vs_dqw(),
        "continuum" => {
            let job = ContinuumJob { scales: [100.0, 1000.0], mass: 0.04, window: 0.1, samples: 201 };
            Ok(Scenario::new(name, src, vec![Job::Continuum(job)]))
        }
        "two_particle" => {
            let (job, _) = two_particle_demo(24, 20)?;
            Ok(Scenario::new(name, src, vec![Job::TwoParticle(job)]))
        }
        _ => Err(unknown(name)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    name: Option<String>,
    builtin: Option<String>,
    scenario: Option<String>,
    steps: Option<usize>,
    memory_budget_mb: Option<u64>,
    lattice: Option<LatticeCfg>,
    engine: Option<EngineCfg>,
    initial: Option<InitialCfg>,
    output: Option<OutputCfg>,
    neutrino: Option<NeutrinoCfg>,
    coefficients: Option<CoefficientsCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeCfg {
    sites: usize,
    scale: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum EngineCfg {
    Dqw {
        #[serde(default)]
        theta0: f64,
        #[serde(default)]
        theta1: f64,
        #[serde(default)]
        theta2: f64,
        #[serde(default)]
        theta3: f64,
    },
    Ssdqw {
        first: AnglesCfg,
        second: AnglesCfg,
    },
    Modified {
        first: AnglesCfg,
        second: AnglesCfg,
    },
    Dca {
        eta1: f64,
        eta2: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FieldCfg {
    Num(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnglesCfg {
    theta0: Option<FieldCfg>,
    theta1: Option<FieldCfg>,
    theta2: Option<FieldCfg>,
    theta3: Option<FieldCfg>,
    rate0: Option<FieldCfg>,
    rate1: Option<FieldCfg>,
    rate2: Option<FieldCfg>,
    rate3: Option<FieldCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialCfg {
    coin: Vec<[f64; 2]>,
    positions: Option<Vec<PositionCfg>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PositionCfg {
    offset: i64,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputCfg {
    heatmap: Option<bool>,
    probability: Option<bool>,
    entropy: Option<bool>,
    spectrum: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NeutrinoCfg {
    alpha: Option<String>,
    thetas: Option<[f64; 3]>,
    k: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientsCfg {
    x_min: f64,
    x_max: f64,
    count: usize,
    t: f64,
    h: Option<f64>,
    numeric_probe: Option<f64>,
}

fn cfg_err(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {e}"))
}

fn field_from(cfg: &Option<FieldCfg>, consts: Constants, path: &str) -> Result<Field> {
    match cfg {
        None => Ok(Field::Zero),
        Some(FieldCfg::Num(v)) => Ok(if *v == 0.0 { Field::Zero } else { Field::Const(*v) }),
        Some(FieldCfg::Text(s)) => Expr::parse(s, consts).map(Field::expr).map_err(|e| cfg_err(path, e)),
    }
}

fn schedule_from(first: &AnglesCfg, second: &AnglesCfg, consts: Constants) -> Result<CoinSchedule> {
    let mut s = CoinSchedule::new();
    for (sub, cfg, tag) in [(SubStep::First, first, "first"), (SubStep::Second, second, "second")] {
        let thetas = [&cfg.theta0, &cfg.theta1, &cfg.theta2, &cfg.theta3];
        let rates = [&cfg.rate0, &cfg.rate1, &cfg.rate2, &cfg.rate3];
        for q in 0..4 {
            s.set_base(sub, q, field_from(thetas[q], consts, &format!("engine.{tag}.theta{q}"))?);
            s.set_rate(sub, q, field_from(rates[q], consts, &format!("engine.{tag}.rate{q}"))?);
        }
    }
    Ok(s)
}

fn flavour_index(name: &str) -> Result<usize> {
    FLAVOURS.iter().position(|f| *f == name).ok_or_else(|| cfg_err("neutrino.alpha", format!("unknown flavour '{name}', expected e, mu or tau")))
}

/// Parses a TOML scenario config.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(format!("config syntax: {e}")))?;
    let mut scenario = build(&cfg)?;
    scenario.source = text.to_string();
    if let Some(name) = &cfg.name {
        scenario.name = name.clone();
    }
    if let Some(mb) = cfg.memory_budget_mb {
        scenario.memory_budget = mb << 20;
    }
    Ok(scenario)
}

fn build(cfg: &ConfigFile) -> Result<Scenario> {
    let modes = [cfg.builtin.is_some(), cfg.scenario.is_some(), cfg.engine.is_some(), cfg.neutrino.is_some()];
    if modes.iter().filter(|m| **m).count() != 1 {
        return Err(Error::Config("config needs exactly one of builtin, scenario, engine or neutrino".into()));
    }
    if let Some(name) = &cfg.builtin {
        if cfg.lattice.is_some() || cfg.initial.is_some() || cfg.output.is_some() || cfg.coefficients.is_some() {
            return Err(Error::Config("builtin: only name, steps and memory_budget_mb may accompany a builtin".into()));
        }
        let s = builtin_scenario(name)?;
        return Ok(match cfg.steps {
            Some(n) => s.with_steps(n),
            None => s,
        });
    }
    if let Some(name) = &cfg.scenario {
        if !REFERENCE_SCENARIOS.contains(&name.as_str()) {
            return Err(Error::UnknownScenario { name: name.clone(), valid: REFERENCE_SCENARIOS.join(", ") });
        }
        if cfg.lattice.is_some() || cfg.initial.is_some() {
            return Err(Error::Config("scenario: lattice and initial state are fixed by the scenario".into()));
        }
        let mut s = curved_scenario(name)?;
        if let Some(out) = &cfg.output {
            if let Some(Job::Walk(w)) = s.jobs.first_mut() {
                w.outputs = Outputs {
                    heatmap: out.heatmap.unwrap_or(w.outputs.heatmap),
                    probability: out.probability.unwrap_or(w.outputs.probability),
                    entropy: out.entropy.unwrap_or(w.outputs.entropy),
                };
            }
            if out.spectrum == Some(true) {
                return Err(cfg_err("output.spectrum", "spectrum needs a translation-invariant engine"));
            }
        }
        if let Some(cc) = &cfg.coefficients {
            let schedule = reference_scenario(name)?.schedule;
            s.jobs.retain(|j| !matches!(j, Job::Coefficients(_)));
            s.jobs.push(Job::Coefficients(coefficient_job(cc, schedule)?));
        }
        return Ok(match cfg.steps {
            Some(n) => s.with_steps(n),
            None => s,
        });
    }
    if let Some(nc) = &cfg.neutrino {
        let mut cal = WalkCalibration::reference();
        if let Some(th) = nc.thetas {
            cal.thetas = th;
        }
        if let Some(k) = nc.k {
            cal.k = k;
        }
        let alpha = flavour_index(nc.alpha.as_deref().unwrap_or("e"))?;
        let steps = cfg.steps.unwrap_or(cal.steps_short);
        let job = NeutrinoJob { calibration: cal, pmns: PmnsParams::default(), alpha, steps };
        return Ok(Scenario::new("neutrino", String::new(), vec![Job::Neutrino(job)]));
    }

    let engine_cfg = cfg.engine.as_ref().expect("mode checked above");
    let lat_cfg = cfg.lattice.as_ref().ok_or_else(|| Error::Config("lattice: section required with an engine".into()))?;
    let lattice = Lattice::with_scale(lat_cfg.sites, lat_cfg.scale).map_err(|e| cfg_err("lattice", e))?;
    let dt = lattice.spacing();
    let consts = Constants { a: dt, scale: lat_cfg.scale };
    let kind = match engine_cfg {
        EngineCfg::Dqw { theta0, theta1, theta2, theta3 } => EngineKind::Dqw(CoinAngles::new(*theta0, *theta1, *theta2, *theta3)),
        EngineCfg::Ssdqw { first, second } => EngineKind::SsDqw(schedule_from(first, second, consts)?),
        EngineCfg::Modified { first, second } => EngineKind::Modified(schedule_from(first, second, consts)?),
        EngineCfg::Dca { eta1, eta2 } => EngineKind::Dca { eta1: *eta1, eta2: *eta2 },
    };
    let engine = Engine::new(kind, dt).map_err(|e| cfg_err("engine", e))?;
    let out = cfg.output.as_ref();
    let outputs = Outputs {
        heatmap: out.and_then(|o| o.heatmap).unwrap_or(false),
        probability: out.and_then(|o| o.probability).unwrap_or(true),
        entropy: out.and_then(|o| o.entropy).unwrap_or(false),
    };
    let mut jobs = Vec::new();
    if outputs.heatmap || outputs.probability || outputs.entropy {
        let init = cfg.initial.as_ref().ok_or_else(|| Error::Config("initial: section required for a walk".into()))?;
        let steps = cfg.steps.ok_or_else(|| Error::Config("steps: required for a walk".into()))?;
        if lattice.sites() % 2 == 1 {
            log::warn!("odd lattice size {}: the periodic seam is not symmetric about the origin", lattice.sites());
        }
        jobs.push(Job::Walk(WalkJob { label: String::new(), engine: engine.clone(), initial: initial_state(init, &lattice)?, steps, outputs }));
    }
    if out.and_then(|o| o.spectrum).unwrap_or(false) {
        let params = WalkParams::from_engine(&engine, 0.0).map_err(|e| cfg_err("output.spectrum", e))?;
        jobs.push(Job::Spectrum(SpectrumJob { params, lattice: lattice.clone() }));
    }
    if let Some(cc) = &cfg.coefficients {
        let EngineKind::Modified(s) = &engine.kind else {
            return Err(cfg_err("coefficients", "coefficient tables need the modified engine"));
        };
        jobs.push(Job::Coefficients(coefficient_job(cc, s.clone())?));
    }
    if jobs.is_empty() {
        return Err(Error::Config("output: nothing to compute".into()));
    }
    Ok(Scenario::new("custom", String::new(), jobs))
}

fn coefficient_job(cc: &CoefficientsCfg, schedule: CoinSchedule) -> Result<CoefficientJob> {
    if cc.count == 0 || !(cc.x_max >= cc.x_min) {
        return Err(cfg_err("coefficients", "need count >= 1 and x_max >= x_min"));
    }
    let xs = (0..cc.count)
        .map(|i| if cc.count == 1 { cc.x_min } else { cc.x_min + (cc.x_max - cc.x_min) * i as f64 / (cc.count - 1) as f64 })
        .collect();
    Ok(CoefficientJob { schedule, xs, t: cc.t, h: cc.h.unwrap_or(1e-3), numeric_probe: cc.numeric_probe })
}

fn initial_state(cfg: &InitialCfg, lattice: &Lattice) -> Result<WalkState> {
    let coin: Vec<C64> = cfg.coin.iter().map(|[re, im]| c(*re, *im)).collect();
    let mut pos = vec![c(0.0, 0.0); lattice.sites()];
    match &cfg.positions {
        None => pos[0] = c(1.0, 0.0),
        Some(list) => {
            for p in list {
                pos[lattice.site(p.offset)] += c(p.re, p.im);
            }
        }
    }
    WalkState::product(&coin, &pos, lattice.clone()).map_err(|e| cfg_err("initial", e))
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // adding 0.0 folds -0 into +0
            Cell::Real(v) => format!("{:.16e}", v + 0.0),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Files and manifest entries produced by one job.
#[derive(Clone, Debug, Default)]
pub struct JobOutput {
    pub tables: Vec<Table>,
    pub manifest: Vec<(String, String)>,
}

fn real(v: f64) -> Cell {
    Cell::Real(v)
}

pub fn run_job(job: &Job) -> Result<JobOutput> {
    match job {
        Job::Walk(w) => run_walk(w),
        Job::Neutrino(n) => run_neutrino(n),
        Job::Spectrum(s) => Ok(run_spectrum(s)),
        Job::Continuum(c) => Ok(run_continuum(c)),
        Job::Coefficients(c) => run_coefficients(c),
        Job::TwoParticle(t) => run_two_particle(t),
    }
}

fn run_walk(w: &WalkJob) -> Result<JobOutput> {
    let record = ObservableSet { position: w.outputs.heatmap || w.outputs.probability, entropy: w.outputs.entropy, norm: true };
    let traj = evolve(&w.initial, &w.engine, w.steps, &record)?;
    let lat = w.initial.lattice();
    let order = lat.sites_by_position();
    let mut out = JobOutput::default();
    let p = &w.label;
    if w.outputs.heatmap {
        let rows = (1..traj.len())
            .flat_map(|i| order.iter().map(move |&s| (i, s)))
            .map(|(i, s)| vec![Cell::Int(traj.steps[i] as i64), real(lat.position(s)), real(traj.position[i][s])])
            .collect();
        out.tables.push(Table { file: format!("{p}heatmap.csv"), header: vec!["step", "x", "prob"], rows });
    }
    if w.outputs.probability {
        let last = traj.len() - 1;
        let rows = order
            .iter()
            .map(|&s| vec![Cell::Int(traj.steps[last] as i64), real(lat.position(s)), real(traj.position[last][s])])
            .collect();
        out.tables.push(Table { file: format!("{p}probability.csv"), header: vec!["step", "x", "prob"], rows });
    }
    if w.outputs.entropy {
        let rows = traj.steps.iter().zip(&traj.entropy).map(|(n, e)| vec![Cell::Int(*n as i64), real(*e)]).collect();
        out.tables.push(Table { file: format!("{p}entropy.csv"), header: vec!["step", "entropy"], rows });
    }
    let drift = traj.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    let probs = position_probability(&traj.final_state);
    let left: f64 = (0..lat.sites()).filter(|&s| lat.offset(s) < 0).map(|s| probs[s]).sum();
    out.manifest.push((format!("{p}engine"), w.engine.kind.name().into()));
    out.manifest.push((format!("{p}steps"), w.steps.to_string()));
    out.manifest.push((format!("{p}sites"), lat.sites().to_string()));
    out.manifest.push((format!("{p}max_norm_drift"), format!("{drift:e}")));
    out.manifest.push((format!("{p}final_probability_x_negative"), format!("{left:e}")));
    out.manifest.push((format!("{p}final_boundary_probability"), format!("{:e}", boundary_probability(&traj.final_state))));
    Ok(out)
}

fn run_neutrino(n: &NeutrinoJob) -> Result<JobOutput> {
    let pmns = pmns_matrix(&n.pmns);
    let walk = walk_series(n.alpha, n.steps, &n.calibration, &pmns)?;
    let analytic = analytic_series(n.alpha, n.steps, &n.calibration, &pmns);
    let rows = (1..walk.len())
        .map(|i| vec![Cell::Int(i as i64), real(i as f64), real(walk[i][0]), real(walk[i][1]), real(walk[i][2])])
        .collect();
    let dev = walk.iter().zip(&analytic).flat_map(|(w, a)| (0..3).map(move |b| (w[b] - a[b]).abs())).fold(0.0, f64::max);
    let sum = walk.iter().map(|w| (w.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    Ok(JobOutput {
        tables: vec![Table { file: "oscillation.csv".into(), header: vec!["step", "t", "P_e", "P_mu", "P_tau"], rows }],
        manifest: vec![
            ("initial_flavour".into(), FLAVOURS[n.alpha].into()),
            ("thetas".into(), format!("{:?}", n.calibration.thetas)),
            ("k".into(), n.calibration.k.to_string()),
            ("steps".into(), n.steps.to_string()),
            ("max_analytic_deviation".into(), format!("{dev:e}")),
            ("max_probability_sum_error".into(), format!("{sum:e}")),
        ],
    })
}

fn run_spectrum(s: &SpectrumJob) -> JobOutput {
    let dt = s.lattice.spacing();
    let modes: Vec<_> = momentum_grid(&s.lattice).par_iter().map(|&k| hk_closed_form(&s.params, k, dt)).collect();
    let rows = modes
        .iter()
        .map(|m| {
            let mut row = vec![real(m.k), real(m.energy)];
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                row.push(real(m.h[(i, j)].re));
                row.push(real(m.h[(i, j)].im));
            }
            row
        })
        .collect();
    JobOutput {
        tables: vec![Table {
            file: "spectrum.csv".into(),
            header: vec!["k", "E", "h00_re", "h00_im", "h01_re", "h01_im", "h10_re", "h10_im", "h11_re", "h11_im"],
            rows,
        }],
        manifest: vec![("spectrum_modes".into(), modes.len().to_string())],
    }
}

fn run_continuum(cj: &ContinuumJob) -> JobOutput {
    let families = [("dqw", ContinuumFamily::Dqw), ("ssdqw", ContinuumFamily::SsDqw), ("dca", ContinuumFamily::Dca)];
    let mut rows = Vec::new();
    let mut manifest = Vec::new();
    for (name, fam) in families {
        let devs = cj.scales.map(|l| continuum_deviation(fam, l, cj.mass, cj.window, cj.samples));
        for (l, d) in cj.scales.iter().zip(&devs) {
            rows.push(vec![Cell::Text(name.into()), real(*l), real(*d)]);
        }
        let order = (devs[0] / devs[1]).ln() / (cj.scales[1] / cj.scales[0]).ln();
        manifest.push((format!("continuum_ratio_{name}"), format!("{}", devs[0] / devs[1])));
        manifest.push((format!("convergence_order_{name}"), format!("{order:.4}")));
    }
    JobOutput { tables: vec![Table { file: "continuum.csv".into(), header: vec!["family", "L", "deviation"], rows }], manifest }
}

fn run_coefficients(cj: &CoefficientJob) -> Result<JobOutput> {
    let per_x: Vec<Vec<Vec<Cell>>> = cj
        .xs
        .par_iter()
        .map(|&x| -> Result<Vec<Vec<Cell>>> {
            let mut rows = Vec::new();
            let cf = closed_form_coefficients(&cj.schedule, x, cj.t, cj.h)?;
            for (name, v) in cf.named() {
                rows.push(vec![real(x), real(cj.t), Cell::Text(name.into()), real(v.re), real(v.im)]);
            }
            if let Some(d) = cj.numeric_probe {
                let num = numeric_coefficients(&cj.schedule, x, cj.t, d)?;
                for (name, v) in num.coeffs.named() {
                    rows.push(vec![real(x), real(cj.t), Cell::Text(format!("{name}_numeric")), real(v.re), real(v.im)]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(JobOutput {
        tables: vec![Table {
            file: "coefficients.csv".into(),
            header: vec!["x", "t", "name", "re", "im"],
            rows: per_x.into_iter().flatten().collect(),
        }],
        manifest: vec![("coefficient_points".into(), cj.xs.len().to_string())],
    })
}

fn run_two_particle(tj: &TwoParticleJob) -> Result<JobOutput> {
    let lat = tj.initial.lattice().clone();
    let order = lat.sites_by_position();
    let mut psi = tj.initial.clone();
    let mut rows = Vec::new();
    let mut drift: f64 = 0.0;
    for n in 1..=tj.steps {
        step_two_particle(&mut psi, &tj.field, n as f64 * tj.dt, tj.dt)?;
        drift = drift.max((psi.norm() - 1.0).abs());
        let (m1, m2) = (two_particle_marginal(&psi, 1), two_particle_marginal(&psi, 2));
        rows.extend(order.iter().map(|&s| vec![Cell::Int(n as i64), real(lat.position(s)), real(m1[s]), real(m2[s])]));
    }
    let tables_h: Vec<_> = tj
        .probes
        .par_iter()
        .map(|&(x1, x2)| two_effective_hamiltonian(&tj.field, x1, x2, tj.probe_time, 1e-4).map(|h| (x1, x2, h)))
        .collect::<Result<_>>()?;
    let mut coeff_rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (x1, x2, h) in &tables_h {
        worst = h.violations(0.0).iter().map(|v| v.1).fold(worst, f64::max);
        for (label, v) in h.rows() {
            coeff_rows.push(vec![real(*x1), real(*x2), real(tj.probe_time), Cell::Text(label), real(v)]);
        }
    }
    Ok(JobOutput {
        tables: vec![
            Table { file: "marginals.csv".into(), header: vec!["step", "x", "p1", "p2"], rows },
            Table { file: "two_coefficients.csv".into(), header: vec!["x1", "x2", "t", "label", "value"], rows: coeff_rows },
        ],
        manifest: vec![
            ("two_particle_sites".into(), lat.sites().to_string()),
            ("two_particle_steps".into(), tj.steps.to_string()),
            ("max_norm_drift".into(), format!("{drift:e}")),
            ("max_off_pattern_component".into(), format!("{worst:e}")),
        ],
    })
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub manifest: Vec<(String, String)>,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn write_table(dir: &Path, table: &Table) -> Result<PathBuf> {
    let path = dir.join(&table.file);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(path)
}

/// Runs every job and writes the CSVs plus `manifest.txt` into `out_dir`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let estimate = scenario.memory_estimate();
    if estimate > scenario.memory_budget {
        return Err(Error::MemoryBudget { estimate, budget: scenario.memory_budget });
    }
    let start = Instant::now();
    let outputs: Vec<JobOutput> = scenario.jobs.par_iter().map(run_job).collect::<Result<_>>()?;
    let wall = start.elapsed().as_secs_f64();

    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut manifest = vec![
        ("name".to_string(), scenario.name.clone()),
        ("library_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("config_sha256".to_string(), config_hash(&scenario.source)),
    ];
    manifest.extend(scenario.overrides.iter().map(|(k, v)| (format!("override_{k}"), v.clone())));
    for out in &outputs {
        for t in &out.tables {
            files.push(write_table(out_dir, t)?);
        }
        manifest.extend(out.manifest.iter().cloned());
    }
    manifest.push(("wall_time_s".to_string(), format!("{wall:.3}")));
    let text: String = manifest.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    let mpath = out_dir.join("manifest.txt");
    fs::write(&mpath, text)?;
    files.push(mpath);
    Ok(RunReport { files, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_key_is_verbatim() {
        let s = parse_config("scenario = \"static\"\n").unwrap();
        let Job::Walk(w) = &s.jobs[0] else { panic!("expected a walk job") };
        assert_eq!(w.steps, 800);
        assert_eq!(w.initial.sites(), 200);
        assert!((w.engine.dt - 1.0 / 250.0).abs() < 1e-18);
        assert_eq!(s.name, "static");
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = parse_config("builtin = \"flat\"\nbogus = 3\n").unwrap_err().to_string();
        assert!(err.contains("bogus") && err.contains("line 2"), "{err}");
        let err = parse_config("[engine]\nkind = \"dca\"\neta1 = 1.0\neta2 = 0.0\nextra = 1\n").unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn dca_normalization_is_named() {
        let text = "steps = 3\n[lattice]\nsites = 16\nscale = 1\n[engine]\nkind = \"dca\"\neta1 = 0.8\neta2 = 0.8\n[initial]\ncoin = [[1, 0], [0, 0]]\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("engine") && err.contains("DCA normalization"), "{err}");
    }

    #[test]
    fn odd_lattice_is_accepted() {
        let text = "steps = 3\n[lattice]\nsites = 17\nscale = 10\n[engine]\nkind = \"dqw\"\ntheta1 = 0.785\n[initial]\ncoin = [[1, 0], [0, 1]]\npositions = [{ offset = -2, re = 1 }, { offset = 2, re = 1 }]\n";
        let s = parse_config(text).unwrap();
        assert_eq!(s.jobs.len(), 1);
    }

    #[test]
    fn expressions_in_schedules() {
        let text = r#"
steps = 4
[lattice]
sites = 32
scale = 50
[engine]
kind = "modified"
first = { theta1 = "0.5*arccos(x + 5*a)", rate1 = "0.5/sqrt(1 - (x + 5*a)^2)" }
second = { theta1 = "-arccos(x + 5*a)", rate1 = 0.04 }
[initial]
coin = [[0.7071067811865476, 0], [0, 0.7071067811865476]]
[coefficients]
x_min = -0.1
x_max = 0.1
count = 3
t = 0.02
"#;
        let s = parse_config(text).unwrap();
        assert_eq!(s.jobs.len(), 2);
        let Job::Walk(w) = &s.jobs[0] else { panic!() };
        let EngineKind::Modified(sch) = &w.engine.kind else { panic!() };
        let want = 0.5 * (0.1f64 + 5.0 / 50.0).acos();
        assert!((sch.angle(SubStep::First, 1, 0.1, 0.0, 0.0) - want).abs() < 1e-15);
        let bad = text.replace("arccos(x + 5*a)\", rate1 = \"0.5", "arccos(x + ) \", rate1 = \"0.5");
        let err = parse_config(&bad).unwrap_err().to_string();
        assert!(err.contains("engine.first.theta1") && err.contains("column"), "{err}");
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let err = builtin_scenario("warp_drive").unwrap_err().to_string();
        assert!(err.contains("neutrino_short") && err.contains("static_x2_delocalized"));
    }

    #[test]
    fn memory_budget_preflight() {
        let mut s = builtin_scenario("static").unwrap();
        s.memory_budget = 1000;
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(run_scenario(&s, dir.path()), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn cells_have_17_digits() {
        assert_eq!(Cell::Real(0.1).render(), "1.0000000000000001e-1");
        let back: f64 = Cell::Real(std::f64::consts::PI).render().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn neutrino_short_rows() {
        let s = builtin_scenario("neutrino_short").unwrap();
        let out = run_job(&s.jobs[0]).unwrap();
        assert_eq!(out.tables[0].rows.len(), 450);
        assert_eq!(out.tables[0].header, vec!["step", "t", "P_e", "P_mu", "P_tau"]);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let s = builtin_scenario("dca_vs_dqw").unwrap().with_steps(20);
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let r1 = run_scenario(&s, d1.path()).unwrap();
        run_scenario(&s, d2.path()).unwrap();
        for f in &r1.files {
            let name = f.file_name().unwrap();
            if name == "manifest.txt" {
                continue;
            }
            assert_eq!(fs::read(f).unwrap(), fs::read(d2.path().join(name)).unwrap());
        }
        assert!(d1.path().join("dqw_probability.csv").exists() && d1.path().join("dca_probability.csv").exists());
        let manifest = fs::read_to_string(d1.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("config_sha256=") && manifest.contains("wall_time_s=") && manifest.contains("library_version="));
    }
}
