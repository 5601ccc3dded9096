//! Monte-Carlo comparison of the four design schemes.
//!
//! Every realization `r` of a run keyed by `master_seed` uses the child seed
//! `derive_seed(master_seed, r)` for its scenario, and further children of that
//! seed for the swarm, the random design and sampled CSI errors. The same
//! realizations are therefore reused across every grid point and every scheme,
//! and realizations can run in parallel without changing any result.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channel::{ChannelSet, PaLayout};
use crate::error::{Error, Result};
use crate::noma::{estimated_order_sinr, min_sinr, PowerAlloc};
use crate::pso::{optimize, sample_feasible_theta, Evaluator, FitnessMode, PsoParams};
use crate::scalar::to_db;
use crate::scenario::{generate_scenario, uniform_layout, Scenario, SystemConfig};
use crate::seeding::{derive_seed, stream_rng};
use crate::Scalar;

const SWARM_SEED: u64 = 1;
const RANDOM_SEED: u64 = 2;
const CSI_SEED: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Swarm search on the robust fitness.
    #[serde(rename = "RobustPSO")]
    RobustPso,
    /// Swarm search on the perfect-CSI fitness.
    #[serde(rename = "NonRobustPSO")]
    NonRobustPso,
    /// One random feasible design.
    Random,
    /// Evenly spaced antennas with equal power split.
    Uniform,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::RobustPso,
        Scheme::NonRobustPso,
        Scheme::Random,
        Scheme::Uniform,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::RobustPso => "RobustPSO",
            Scheme::NonRobustPso => "NonRobustPSO",
            Scheme::Random => "Random",
            Scheme::Uniform => "Uniform",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.tag() == s)
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

/// How a finished design is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// Conservative min-SINR at the configured ε with nominal estimates.
    #[default]
    Conservative,
    /// True min-SINR when SIC follows the order of randomly perturbed estimates.
    SampledTrue,
}

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub min_sinr_linear: f64,
    pub min_sinr_db: f64,
    pub runtime_ms: f64,
}

pub const CSV_HEADER: &str =
    "sweep_var,sweep_value,scheme,seed,min_sinr_linear,min_sinr_db,runtime_ms";

/// Formats with at most 9 significant digits, trailing zeros trimmed.
pub fn format_sig9(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.8e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

impl SweepRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.sweep_var,
            format_sig9(self.sweep_value),
            self.scheme,
            self.seed,
            format_sig9(self.min_sinr_linear),
            format_sig9(self.min_sinr_db),
            format_sig9(self.runtime_ms),
        )
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[SweepRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    out.flush()
}

/// Run-wide controls that do not change the physical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub master_seed: u64,
    pub realizations: usize,
    /// Record wall time in `runtime_ms`; otherwise it is written as 0 so output is reproducible.
    pub timing: bool,
    pub scoring: Scoring,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            master_seed: 0,
            realizations: 50,
            timing: false,
            scoring: Scoring::Conservative,
        }
    }
}

impl RunOptions {
    pub fn realization_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }
}

/// A scored design produced by one scheme on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun<T> {
    pub scheme: Scheme,
    pub layout: PaLayout<T>,
    pub power: PowerAlloc<T>,
    pub min_sinr: T,
    pub elapsed: Duration,
}

impl<T: Scalar> SchemeRun<T> {
    pub fn record(
        &self,
        sweep_var: &str,
        sweep_value: f64,
        seed: u64,
        timing: bool,
    ) -> SweepRecord {
        let linear = self.min_sinr.as_f64();
        SweepRecord {
            sweep_var: sweep_var.to_string(),
            sweep_value,
            scheme: self.scheme,
            seed,
            min_sinr_linear: linear,
            min_sinr_db: to_db(linear),
            runtime_ms: if timing {
                self.elapsed.as_secs_f64() * 1e3
            } else {
                0.0
            },
        }
    }
}

/// Scores a design under the chosen scoring rule.
pub fn score_design<T: Scalar>(
    layout: &PaLayout<T>,
    power: &PowerAlloc<T>,
    scenario: &Scenario<T>,
    config: &SystemConfig<T>,
    scoring: Scoring,
    seed: u64,
) -> Result<T> {
    match scoring {
        Scoring::Conservative => Ok(Evaluator::new(scenario, config, FitnessMode::Robust)
            .evaluate_parts(&layout.positions, &power.fractions)?
            .min_sinr),
        Scoring::SampledTrue => {
            let channels = ChannelSet::compute(layout, scenario, config)?
                .with_csi_errors(config.csi_eps, &mut stream_rng(seed, 0));
            let sinrs = estimated_order_sinr(
                &channels.h,
                &channels.h_hat,
                power,
                config.tx_power,
                config.noise_power,
            );
            min_sinr(&sinrs)
        }
    }
}

/// Produces and scores one scheme's design on `scenario`.
///
/// `seed` is the realization seed; the swarm, random draw and sampled errors
/// use fixed children of it, so both swarm schemes share their initial swarm.
pub fn run_scheme<T: Scalar>(
    scheme: Scheme,
    scenario: &Scenario<T>,
    config: &SystemConfig<T>,
    params: &PsoParams<T>,
    seed: u64,
    scoring: Scoring,
) -> Result<SchemeRun<T>> {
    let start = Instant::now();
    let (layout, power) = match scheme {
        Scheme::RobustPso | Scheme::NonRobustPso => {
            let robust = scheme == Scheme::RobustPso;
            let result = optimize(
                scenario,
                config,
                params,
                derive_seed(seed, SWARM_SEED),
                robust,
            )?;
            (
                PaLayout::new(result.positions().to_vec()),
                PowerAlloc::new(result.alpha().to_vec()),
            )
        }
        Scheme::Random => {
            let theta =
                sample_feasible_theta(config, &mut stream_rng(derive_seed(seed, RANDOM_SEED), 0))?;
            let (positions, alpha) = theta.split_at(config.num_pas);
            (
                PaLayout::new(positions.to_vec()),
                PowerAlloc::new(alpha.to_vec()),
            )
        }
        Scheme::Uniform => (
            uniform_layout(config)?,
            PowerAlloc::uniform(config.num_users),
        ),
    };
    let min_sinr = score_design(
        &layout,
        &power,
        scenario,
        config,
        scoring,
        derive_seed(seed, CSI_SEED),
    )?;
    Ok(SchemeRun {
        scheme,
        layout,
        power,
        min_sinr,
        elapsed: start.elapsed(),
    })
}

fn run_all_schemes<T: Scalar>(
    config: &SystemConfig<T>,
    params: &PsoParams<T>,
    seed: u64,
    scoring: Scoring,
) -> Result<Vec<SchemeRun<T>>> {
    let scenario = generate_scenario(config, seed)?;
    Scheme::ALL
        .into_iter()
        .map(|scheme| run_scheme(scheme, &scenario, config, params, seed, scoring))
        .collect()
}

/// Runs every scheme on every `(grid point, realization)` cell in parallel,
/// returning records in grid-major, realization, scheme order.
fn sweep<T: Scalar, G: Sync>(
    sweep_var: &str,
    grid: &[G],
    value_of: impl Fn(&G) -> f64 + Sync,
    config_at: impl Fn(&G) -> SystemConfig<T> + Sync,
    params: &PsoParams<T>,
    opts: &RunOptions,
) -> Result<Vec<SweepRecord>> {
    if opts.realizations == 0 {
        return Err(Error::InvalidConfig("realizations >= 1".into()));
    }
    params.validate()?;
    for point in grid {
        config_at(point).validate()?;
    }
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..opts.realizations).map(move |r| (g, r)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(g, r)| {
            let point = &grid[g];
            let config = config_at(point);
            let seed = opts.realization_seed(r);
            let runs = run_all_schemes(&config, params, seed, opts.scoring)?;
            Ok(runs
                .iter()
                .map(|run| run.record(sweep_var, value_of(point), seed, opts.timing))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Min-SINR of every scheme across a grid of CSI error bounds.
pub fn sweep_epsilon<T: Scalar>(
    config: &SystemConfig<T>,
    params: &PsoParams<T>,
    eps_grid: &[T],
    opts: &RunOptions,
) -> Result<Vec<SweepRecord>> {
    sweep(
        "csi_eps",
        eps_grid,
        |eps| eps.as_f64(),
        |&eps| SystemConfig {
            csi_eps: eps,
            ..config.clone()
        },
        params,
        opts,
    )
}

/// Min-SINR of every scheme across a grid of user counts.
pub fn sweep_users<T: Scalar>(
    config: &SystemConfig<T>,
    params: &PsoParams<T>,
    k_grid: &[usize],
    opts: &RunOptions,
) -> Result<Vec<SweepRecord>> {
    sweep(
        "num_users",
        k_grid,
        |&k| k as f64,
        |&k| SystemConfig {
            num_users: k,
            ..config.clone()
        },
        params,
        opts,
    )
}

/// Every scheme on each realization at the configured operating point.
pub fn compare_schemes<T: Scalar>(
    config: &SystemConfig<T>,
    params: &PsoParams<T>,
    opts: &RunOptions,
) -> Result<Vec<(u64, Vec<SchemeRun<T>>)>> {
    if opts.realizations == 0 {
        return Err(Error::InvalidConfig("realizations >= 1".into()));
    }
    (0..opts.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = opts.realization_seed(r);
            Ok((seed, run_all_schemes(config, params, seed, opts.scoring)?))
        })
        .collect()
}

/// Per-iteration global-best traces of both swarm schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub seeds: Vec<u64>,
    /// Robust Γ_min of the robust swarm's global best, per realization and iteration.
    pub robust: Vec<Vec<f64>>,
    /// Robust Γ_min of the perfect-CSI swarm's global best.
    pub non_robust: Vec<Vec<f64>>,
    /// Penalized fitness the robust swarm ranks by (nondecreasing by construction).
    pub robust_fitness: Vec<Vec<f64>>,
    /// Fitness the perfect-CSI swarm ranks by (nondecreasing by construction).
    pub non_robust_fitness: Vec<Vec<f64>>,
}

fn mean_db_curve(traces: &[Vec<f64>]) -> Vec<f64> {
    let len = traces.first().map_or(0, Vec::len);
    (0..len)
        .map(|t| traces.iter().map(|tr| to_db(tr[t])).sum::<f64>() / traces.len() as f64)
        .collect()
}

impl Convergence {
    /// Mean over realizations of the dB value at each iteration.
    pub fn mean_db(&self, scheme: Scheme) -> Vec<f64> {
        match scheme {
            Scheme::RobustPso => mean_db_curve(&self.robust),
            Scheme::NonRobustPso => mean_db_curve(&self.non_robust),
            _ => Vec::new(),
        }
    }

    pub fn records(&self) -> Vec<SweepRecord> {
        let mut out = Vec::new();
        for (scheme, traces) in [
            (Scheme::RobustPso, &self.robust),
            (Scheme::NonRobustPso, &self.non_robust),
        ] {
            for (seed, trace) in self.seeds.iter().zip(traces) {
                for (t, &v) in trace.iter().enumerate() {
                    out.push(SweepRecord {
                        sweep_var: "iteration".into(),
                        sweep_value: t as f64,
                        scheme,
                        seed: *seed,
                        min_sinr_linear: v,
                        min_sinr_db: to_db(v),
                        runtime_ms: 0.0,
                    });
                }
            }
        }
        out
    }
}

/// Share of a curve's total gain reached by its midpoint.
///
/// `curve[0]` is the value after initialization and `curve[t]` after
/// iteration `t`. Returns `None` when the curve never rises above its start.
pub fn early_gain_fraction(curve: &[f64]) -> Option<f64> {
    let (&first, &last) = (curve.first()?, curve.last()?);
    let total = last - first;
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let half = (curve.len() - 1) / 2;
    Some((curve[half] - first) / total)
}

/// Runs both swarm schemes on each realization and keeps their traces.
pub fn convergence_trace<T: Scalar>(
    config: &SystemConfig<T>,
    params: &PsoParams<T>,
    opts: &RunOptions,
) -> Result<Convergence> {
    if opts.realizations == 0 {
        return Err(Error::InvalidConfig("realizations >= 1".into()));
    }
    let to_f64 = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<_>>();
    let runs = (0..opts.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = opts.realization_seed(r);
            let scenario = generate_scenario(config, seed)?;
            let swarm_seed = derive_seed(seed, SWARM_SEED);
            let robust = optimize(&scenario, config, params, swarm_seed, true)?;
            let nominal = optimize(&scenario, config, params, swarm_seed, false)?;
            Ok((seed, robust, nominal))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Convergence {
        seeds: Vec::new(),
        robust: Vec::new(),
        non_robust: Vec::new(),
        robust_fitness: Vec::new(),
        non_robust_fitness: Vec::new(),
    };
    for (seed, robust, nominal) in runs {
        out.seeds.push(seed);
        out.robust.push(to_f64(&robust.robust_trace));
        out.non_robust.push(to_f64(&nominal.robust_trace));
        out.robust_fitness.push(to_f64(&robust.trace));
        out.non_robust_fitness.push(to_f64(&nominal.trace));
    }
    Ok(out)
}

/// Mean statistics of one `(grid point, scheme)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub count: usize,
    /// Arithmetic mean of the per-realization dB values.
    pub mean_db: f64,
    pub mean_linear: f64,
}

/// Groups records by `(sweep_var, sweep_value, scheme)` in first-seen order.
pub fn aggregate(records: &[SweepRecord]) -> Vec<Aggregate> {
    let mut out: Vec<Aggregate> = Vec::new();
    for r in records {
        let slot = out.iter_mut().find(|a| {
            a.sweep_var == r.sweep_var && a.sweep_value == r.sweep_value && a.scheme == r.scheme
        });
        match slot {
            Some(a) => {
                a.count += 1;
                a.mean_db += r.min_sinr_db;
                a.mean_linear += r.min_sinr_linear;
            }
            None => out.push(Aggregate {
                sweep_var: r.sweep_var.clone(),
                sweep_value: r.sweep_value,
                scheme: r.scheme,
                count: 1,
                mean_db: r.min_sinr_db,
                mean_linear: r.min_sinr_linear,
            }),
        }
    }
    for a in &mut out {
        a.mean_db /= a.count as f64;
        a.mean_linear /= a.count as f64;
    }
    out
}

/// Looks up the mean dB of one group.
pub fn mean_db_of(aggregates: &[Aggregate], sweep_value: f64, scheme: Scheme) -> Option<f64> {
    aggregates
        .iter()
        .find(|a| a.sweep_value == sweep_value && a.scheme == scheme)
        .map(|a| a.mean_db)
}

/// A complete run description: model constants, swarm settings and sweep grids.
///
/// The JSON form is flat: every [`SystemConfig`] key at the top level next to
/// the reserved keys `pso`, `eps_grid`, `k_grid`, `realizations` and `scoring`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig<f64>,
    pub pso: PsoParams<f64>,
    pub eps_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    pub realizations: usize,
    pub scoring: Scoring,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            pso: PsoParams::default(),
            eps_grid: vec![0.0, 0.05, 0.10, 0.15, 0.20],
            k_grid: vec![2, 3, 4, 5],
            realizations: 50,
            scoring: Scoring::Conservative,
        }
    }
}

impl RunConfig {
    pub const RESERVED_KEYS: [&'static str; 5] =
        ["pso", "eps_grid", "k_grid", "realizations", "scoring"];

    pub fn from_json_str(json: &str) -> Result<Self> {
        Self::from_json_value(serde_json::from_str(json)?)
    }

    pub fn from_json_value(value: Value) -> Result<Self> {
        let Value::Object(mut map) = value else {
            return Err(Error::InvalidConfig("config must be a JSON object".into()));
        };
        let defaults = Self::default();
        let mut take = |key: &str| map.remove(key);
        let pso = match take("pso") {
            Some(v) => serde_json::from_value(v)?,
            None => defaults.pso,
        };
        let eps_grid = match take("eps_grid") {
            Some(v) => serde_json::from_value(v)?,
            None => defaults.eps_grid,
        };
        let k_grid = match take("k_grid") {
            Some(v) => serde_json::from_value(v)?,
            None => defaults.k_grid,
        };
        let realizations = match take("realizations") {
            Some(v) => serde_json::from_value(v)?,
            None => defaults.realizations,
        };
        let scoring = match take("scoring") {
            Some(v) => serde_json::from_value(v)?,
            None => defaults.scoring,
        };
        let system: SystemConfig<f64> = serde_json::from_value(Value::Object(map))?;
        let config = Self {
            system,
            pso,
            eps_grid,
            k_grid,
            realizations,
            scoring,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.pso.validate()?;
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("realizations >= 1".into()));
        }
        if let Some(eps) = self.eps_grid.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(Error::InvalidConfig(format!(
                "eps_grid values in [0, 1) (got {eps})"
            )));
        }
        if self.k_grid.contains(&0) {
            return Err(Error::InvalidConfig("k_grid values >= 1".into()));
        }
        Ok(())
    }

    /// Flat JSON form, the inverse of [`RunConfig::from_json_value`].
    pub fn to_json_value(&self) -> Value {
        let mut map: Map<String, Value> = match serde_json::to_value(&self.system) {
            Ok(Value::Object(map)) => map,
            _ => unreachable!("SystemConfig serializes to an object"),
        };
        map.insert(
            "pso".into(),
            serde_json::to_value(&self.pso).expect("pso serializes"),
        );
        map.insert(
            "eps_grid".into(),
            serde_json::to_value(&self.eps_grid).expect("grid serializes"),
        );
        map.insert(
            "k_grid".into(),
            serde_json::to_value(&self.k_grid).expect("grid serializes"),
        );
        map.insert("realizations".into(), self.realizations.into());
        map.insert(
            "scoring".into(),
            serde_json::to_value(self.scoring).expect("scoring serializes"),
        );
        Value::Object(map)
    }

    pub fn options(&self, master_seed: u64, timing: bool) -> RunOptions {
        RunOptions {
            master_seed,
            realizations: self.realizations,
            timing,
            scoring: self.scoring,
        }
    }
}
