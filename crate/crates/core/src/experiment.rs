//! Experiment plans, seeded sweeps, result tables and the diagnostic suite.
//!
//! Plans are TOML. Powers are given in dBm, gains in dB and lengths in
//! wavelengths (`*_wl` keys); everything is converted to SI on load.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ao::{self, mc_evaluate, run_ao, Layout, RunTrace, Scheme};
use crate::apv_rx::FrozenReceiveContext;
use crate::apv_tx::{grad_ee_transmit, MinorizerEe, TransmitObjective};
use crate::channel::{sample_scenario, Apv, ChannelStatistics};
use crate::config::{db_to_linear, dbm_to_watt, AlgorithmKnobs, Geometry, PowerModel, ScenarioConfig};
use crate::de::{minorizer_params, minorizer_value, DeOptions};
use crate::error::{Error, Result};
use crate::mc::{fd_gradient, relative_error};
use crate::precoder::{optimal_precoder, PrecoderBranch, PrecoderProblem};

/// Scenario section of a plan file, in engineering units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_users: usize,
    pub streams: usize,
    /// Metres.
    pub wavelength: f64,
    pub min_spacing_wl: f64,
    pub tx_region_wl: f64,
    pub rx_region_wl: f64,
    pub omega: f64,
    pub p_max_dbm: f64,
    pub p_c_dbm: f64,
    pub p_s_dbm: f64,
    pub noise_dbm: f64,
    /// Path count on both sides.
    pub paths: usize,
    /// Linear.
    pub rician_factor: f64,
    pub ref_gain_db: f64,
    pub pathloss_exp: f64,
    /// Metres.
    pub dist_min: f64,
    pub dist_max: f64,
}

impl ScenarioFile {
    pub fn to_config(&self, knobs: AlgorithmKnobs) -> Result<ScenarioConfig> {
        let w = self.wavelength;
        let cfg = ScenarioConfig {
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            n_users: self.n_users,
            streams: self.streams,
            geometry: Geometry {
                wavelength: w,
                min_spacing: self.min_spacing_wl * w,
                tx_region: self.tx_region_wl * w,
                rx_region: self.rx_region_wl * w,
            },
            power: PowerModel {
                omega: self.omega,
                p_max: dbm_to_watt(self.p_max_dbm),
                p_c: dbm_to_watt(self.p_c_dbm),
                p_s: dbm_to_watt(self.p_s_dbm),
                n_tx: self.n_tx,
            },
            noise_power: dbm_to_watt(self.noise_dbm),
            paths_tx: self.paths,
            paths_rx: self.paths,
            rician_factor: self.rician_factor,
            ref_gain: db_to_linear(self.ref_gain_db),
            pathloss_exp: self.pathloss_exp,
            dist_min: self.dist_min,
            dist_max: self.dist_max,
            knobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reference operating point.
    pub fn reference() -> Self {
        Self {
            n_tx: 16,
            n_rx: 4,
            n_users: 4,
            streams: 4,
            wavelength: 0.1,
            min_spacing_wl: 0.5,
            tx_region_wl: 3.2,
            rx_region_wl: 2.0,
            omega: 5.0,
            p_max_dbm: 30.0,
            p_c_dbm: 30.0,
            p_s_dbm: 40.0,
            noise_dbm: -80.0,
            paths: 5,
            rician_factor: 1.0,
            ref_gain_db: -40.0,
            pathloss_exp: 2.8,
            dist_min: 20.0,
            dist_max: 100.0,
        }
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    PMaxDbm,
    NUsers,
    TxRegionWl,
    RxRegionWl,
    Paths,
    RicianFactor,
}

impl Axis {
    pub fn apply(self, base: &ScenarioFile, value: f64) -> Result<ScenarioFile> {
        let mut s = base.clone();
        let count = |name: &str| -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::config(name, format!("sweep value {value} is not a positive integer")))
            }
        };
        match self {
            Axis::PMaxDbm => s.p_max_dbm = value,
            Axis::NUsers => s.n_users = count("n_users")?,
            Axis::TxRegionWl => s.tx_region_wl = value,
            Axis::RxRegionWl => s.rx_region_wl = value,
            Axis::Paths => s.paths = count("paths")?,
            Axis::RicianFactor => s.rician_factor = value,
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(default)]
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_mc_samples() -> usize {
    10_000
}

/// On-disk plan layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub scenario: ScenarioFile,
    #[serde(default)]
    pub knobs: AlgorithmKnobs,
    pub sweep: SweepFile,
}

/// Validated plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub file: PlanFile,
    pub base: ScenarioConfig,
}

impl ExperimentPlan {
    pub fn from_file(file: PlanFile) -> Result<Self> {
        let base = file.scenario.to_config(file.knobs)?;
        let sw = &file.sweep;
        if sw.schemes.is_empty() {
            return Err(Error::config("sweep.schemes", "at least one scheme is required"));
        }
        if sw.seeds.is_empty() {
            return Err(Error::config("sweep.seeds", "at least one seed is required"));
        }
        let mut seeds = sw.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("sweep.seeds", "seeds must be distinct"));
        }
        if sw.mc_samples == 0 {
            return Err(Error::config("sweep.mc_samples", "must be at least 1"));
        }
        match sw.axis {
            Some(axis) => {
                if sw.values.is_empty() {
                    return Err(Error::config("sweep.values", "a sweep axis needs values"));
                }
                if sw.values.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("sweep.values", "values must be strictly increasing"));
                }
                for &v in &sw.values {
                    axis.apply(&file.scenario, v)?.to_config(file.knobs)?;
                }
            }
            None if !sw.values.is_empty() => return Err(Error::config("sweep.axis", "values given without an axis")),
            None => {}
        }
        Ok(Self { file, base })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: PlanFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.file).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Sweep points; a single unlabelled point when there is no axis.
    pub fn points(&self) -> Vec<Option<f64>> {
        match self.file.sweep.axis {
            Some(_) => self.file.sweep.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    pub fn config_at(&self, point: Option<f64>) -> Result<ScenarioConfig> {
        match (self.file.sweep.axis, point) {
            (Some(axis), Some(v)) => axis.apply(&self.file.scenario, v)?.to_config(self.file.knobs),
            _ => Ok(self.base.clone()),
        }
    }

    /// Drops the sweep axis so only the base scenario is run.
    pub fn without_axis(mut self) -> Self {
        self.file.sweep.axis = None;
        self.file.sweep.values.clear();
        self
    }
}

/// Scenario and knobs of a plan document; a `[sweep]` table is tolerated
/// and ignored.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDocument {
    scenario: ScenarioFile,
    #[serde(default)]
    knobs: AlgorithmKnobs,
    #[serde(default)]
    #[allow(dead_code)]
    sweep: Option<toml::Value>,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let doc: ScenarioDocument = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.scenario.to_config(doc.knobs)
}

pub fn load_config(path: &Path) -> Result<ExperimentPlan> {
    let text = std::fs::read_to_string(path)?;
    ExperimentPlan::parse(&text)
}

/// One line of the result table. Rates are in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis: Option<f64>,
    pub scheme: Scheme,
    pub seed: u64,
    #[serde(rename = "EE_de")]
    pub ee_de: f64,
    #[serde(rename = "EE_mc")]
    pub ee_mc: f64,
    pub sum_rate: f64,
    pub tx_power: f64,
    pub iters: usize,
    pub wall_time: f64,
    pub status: String,
}

pub const CSV_HEADER: [&str; 10] = ["axis", "scheme", "seed", "EE_de", "EE_mc", "sum_rate", "tx_power", "iters", "wall_time", "status"];

/// Per-run record stored in the sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub axis: Option<f64>,
    pub scheme: Scheme,
    pub seed: u64,
    pub wall_time: f64,
    pub mc_std_error: Vec<f64>,
    pub trace: Option<RunTrace>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub jobs: usize,
    /// Write measured wall time into the table instead of zero.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { jobs: 1, timing: false }
    }
}

#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub rows: Vec<ResultRow>,
    pub records: Vec<RunRecord>,
}

fn run_cell(plan: &ExperimentPlan, point: Option<f64>, scheme: Scheme, seed: u64) -> Result<(RunTrace, f64, Vec<f64>)> {
    let config = plan.config_at(point)?;
    let stats = sample_scenario(&config, seed)?;
    let trace = run_ao(&config, &stats, scheme)?;
    let (mc_sum, est) = mc_evaluate(&config, &stats, &trace.layout, &trace.precoder, plan.file.sweep.mc_samples, seed)?;
    let ee_mc = mc_sum / config.power.total(trace.precoder.power());
    Ok((trace, ee_mc, est.iter().map(|e| e.std_error).collect()))
}

/// Runs every (point, scheme, seed) cell. Rows come back ordered by point,
/// then scheme as listed, then seed as listed.
pub fn run_plan(plan: &ExperimentPlan, opts: RunOptions) -> Result<PlanOutput> {
    let mut cells = Vec::new();
    for point in plan.points() {
        for &scheme in &plan.file.sweep.schemes {
            for &seed in &plan.file.sweep.seeds {
                cells.push((point, scheme, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let results: Vec<(ResultRow, RunRecord)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(axis, scheme, seed)| {
                let start = Instant::now();
                let out = run_cell(plan, axis, scheme, seed);
                let elapsed = start.elapsed().as_secs_f64();
                let wall_time = if opts.timing { elapsed } else { 0.0 };
                match out {
                    Ok((trace, ee_mc, se)) => {
                        let bits = std::f64::consts::LN_2;
                        let row = ResultRow {
                            axis,
                            scheme,
                            seed,
                            ee_de: trace.result.ee / bits,
                            ee_mc: ee_mc / bits,
                            sum_rate: trace.result.sum_rate / bits,
                            tx_power: trace.result.tx_power,
                            iters: trace.iterations.len(),
                            wall_time,
                            status: "ok".into(),
                        };
                        let rec = RunRecord { axis, scheme, seed, wall_time: elapsed, mc_std_error: se, trace: Some(trace), error: None };
                        (row, rec)
                    }
                    Err(e) => {
                        log::warn!("{scheme} seed {seed}: {e}");
                        let row = ResultRow {
                            axis,
                            scheme,
                            seed,
                            ee_de: f64::NAN,
                            ee_mc: f64::NAN,
                            sum_rate: f64::NAN,
                            tx_power: f64::NAN,
                            iters: 0,
                            wall_time,
                            status: format!("error: {e}"),
                        };
                        let rec = RunRecord { axis, scheme, seed, wall_time: elapsed, mc_std_error: Vec::new(), trace: None, error: Some(e.to_string()) };
                        (row, rec)
                    }
                }
            })
            .collect()
    });
    let (rows, records) = results.into_iter().unzip();
    Ok(PlanOutput { rows, records })
}

fn sci(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.axis.map(sci).unwrap_or_default(),
            r.scheme.name().to_string(),
            r.seed.to_string(),
            sci(r.ee_de),
            sci(r.ee_mc),
            sci(r.sum_rate),
            sci(r.tx_power),
            r.iters.to_string(),
            sci(r.wall_time),
            r.status.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers().map_err(|e| Error::Parse(e.to_string()))?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    rd.deserialize().map(|r| r.map_err(|e| Error::Parse(e.to_string()))).collect()
}

#[derive(Serialize)]
struct Sidecar<'a> {
    plan: &'a PlanFile,
    resolved: Vec<(Option<f64>, ScenarioConfig)>,
    runs: &'a [RunRecord],
}

/// Writes `<out>` (CSV) and `<out>.json` (resolved plan and traces).
pub fn write_outputs(plan: &ExperimentPlan, output: &PlanOutput, out: &Path) -> Result<PathBuf> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(&output.rows, std::fs::File::create(out)?)?;
    let resolved = plan.points().into_iter().map(|p| Ok((p, plan.config_at(p)?))).collect::<Result<Vec<_>>>()?;
    let sidecar = Sidecar { plan: &plan.file, resolved, runs: &output.records };
    let path = out.with_extension("json");
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

/// One diagnostic with its measured value and limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value >= tolerance }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn transmit_objective(config: &ScenarioConfig, stats: &ChannelStatistics, layout: &Layout, trace: &RunTrace, p_max: f64, opts: DeOptions) -> Result<MinorizerEe> {
    let links = ao::links(config, stats, layout)?;
    let rates = ao::user_rates(&links, &trace.precoder, opts)?;
    let params = links.iter().enumerate().map(|(k, l)| minorizer_params(l, &trace.precoder, k, &rates[k])).collect();
    let mut power = config.power;
    power.p_max = p_max;
    Ok(MinorizerEe {
        tx_dirs: stats.users.iter().map(|u| u.tx_dirs.clone()).collect(),
        params,
        power,
        wavelength: config.geometry.wavelength,
        streams: vec![config.streams; config.n_users],
    })
}

/// Oracle suite on one seeded scenario: DE against sampling, gradients
/// against finite differences, tangency, monotonicity, feasibility and the
/// power-constraint residual.
pub fn validate(config: &ScenarioConfig, seed: u64, mc_samples: usize) -> Result<ValidationReport> {
    let stats = sample_scenario(config, seed)?;
    let trace = run_ao(config, &stats, Scheme::Ma)?;
    let mut checks = Vec::new();

    let (mc_sum, _) = mc_evaluate(config, &stats, &trace.layout, &trace.precoder, mc_samples, seed)?;
    checks.push(Check::at_most("DE vs MC sum rate (relative)", ((trace.result.sum_rate - mc_sum) / mc_sum).abs(), 0.03));

    let ee = trace.ee_trace();
    let min_inc = ee.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least("AO minimum increment", if min_inc.is_finite() { min_inc } else { 0.0 }, -1e-9));
    let feasible = trace.iterations.iter().all(|it| it.layout.is_feasible(config, 1e-12)) && trace.layout.is_feasible(config, 1e-12);
    checks.push(Check::at_least("APV feasibility", feasible as u8 as f64, 1.0));

    let links = ao::links(config, &stats, &trace.layout)?;
    let rates = ao::user_rates(&links, &trace.precoder, DeOptions::precise())?;
    let mut tangency: f64 = 0.0;
    for (k, l) in links.iter().enumerate() {
        let par = minorizer_params(l, &trace.precoder, k, &rates[k]);
        let v = minorizer_value(&l.g, &trace.precoder, k, &par);
        tangency = tangency.max((v - rates[k].net()).abs() / rates[k].net().abs().max(1e-12));
    }
    checks.push(Check::at_most("minorizer tangency (relative)", tangency, 1e-8));

    let h = 1e-6 * config.geometry.wavelength;
    for (label, p_max) in [("full-power", config.power.p_max * 1e-3), ("unconstrained", config.power.p_max * 1e3)] {
        let obj = transmit_objective(config, &stats, &trace.layout, &trace, p_max, DeOptions::precise())?;
        let (_, sol) = obj.evaluate(&trace.layout.t)?;
        let g = grad_ee_transmit(&obj, &trace.layout.t, &sol)?.total();
        let fd = fd_gradient(|x| obj.evaluate(&Apv::from_slice(x)).map(|v| v.0).unwrap_or(f64::NAN), &trace.layout.t.to_vec(), h);
        checks.push(Check::at_most(&format!("transmit gradient vs FD ({label} branch)"), relative_error(&g, &fd), 1e-4));
        if sol.precoder.branch == PrecoderBranch::WaterFilling {
            let res = (sol.precoder.precoder.power() - p_max).abs() / p_max;
            checks.push(Check::at_most("water-filling power residual", res, 1e-8));
        }
    }

    let mut rx_err: f64 = 0.0;
    for (k, u) in stats.users.iter().enumerate() {
        let fr = FrozenReceiveContext::from_rate(&rates[k], &u.rx_dirs, config.geometry.wavelength);
        let r = &trace.layout.r[k];
        let fd = fd_gradient(|x| fr.rate(&Apv::from_slice(x)).unwrap_or(f64::NAN), &r.to_vec(), h);
        rx_err = rx_err.max(relative_error(&fr.gradient(r)?, &fd));
    }
    checks.push(Check::at_most("receive gradient vs FD", rx_err, 1e-4));

    let gs: Vec<_> = links.iter().map(|l| &l.g).collect();
    let params: Vec<_> = links.iter().enumerate().map(|(k, l)| minorizer_params(l, &trace.precoder, k, &rates[k])).collect();
    let problem = PrecoderProblem::new(&gs, &params, config.power)?;
    let sol = optimal_precoder(&problem, &vec![config.streams; config.n_users])?;
    if sol.branch == PrecoderBranch::WaterFilling {
        let res = (sol.precoder.power() - config.power.p_max).abs() / config.power.p_max;
        checks.push(Check::at_most("water-filling power residual (operating point)", res, 1e-8));
    }
    Ok(ValidationReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan_text(extra: &str) -> String {
        let mut s = String::from(
            r#"
[scenario]
n_tx = 8
n_rx = 2
n_users = 2
streams = 2
wavelength = 0.1
min_spacing_wl = 0.5
tx_region_wl = 3.2
rx_region_wl = 2.0
omega = 5.0
p_max_dbm = 30.0
p_c_dbm = 30.0
p_s_dbm = 40.0
noise_dbm = -80.0
paths = 5
rician_factor = 1.0
ref_gain_db = -40.0
pathloss_exp = 2.8
dist_min = 20.0
dist_max = 100.0
"#,
        );
        s.push_str(extra);
        s
    }

    #[test]
    fn reference_file_converts_to_si() {
        let cfg = ScenarioFile::reference().to_config(AlgorithmKnobs::default()).unwrap();
        assert_eq!(cfg, ScenarioConfig::reference());
    }

    #[test]
    fn plan_round_trips_through_toml() {
        let plan = ExperimentPlan::parse(&plan_text("[sweep]\naxis = \"p_max_dbm\"\nvalues = [10.0, 20.0, 30.0, 34.0, 38.0]\nschemes = [\"MA\", \"UPA\"]\nseeds = [1, 2]\n")).unwrap();
        assert_eq!(plan.points().len(), 5);
        let again = ExperimentPlan::parse(&plan.to_toml().unwrap()).unwrap();
        assert_eq!(again, plan);
    }

    #[test]
    fn missing_field_is_named() {
        let text = plan_text("[sweep]\nschemes = [\"MA\"]\nseeds = [1]\n").replace("noise_dbm = -80.0\n", "");
        let err = ExperimentPlan::parse(&text).unwrap_err().to_string();
        assert!(err.contains("noise_dbm"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = ExperimentPlan::parse(&plan_text("bogus = 1\n[sweep]\nschemes = [\"MA\"]\nseeds = [1]\n")).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn plan_invariants() {
        let bad_order = plan_text("[sweep]\naxis = \"p_max_dbm\"\nvalues = [20.0, 10.0]\nschemes = [\"MA\"]\nseeds = [1]\n");
        assert!(ExperimentPlan::parse(&bad_order).unwrap_err().to_string().contains("sweep.values"));
        let dup = plan_text("[sweep]\nschemes = [\"MA\"]\nseeds = [1, 1]\n");
        assert!(ExperimentPlan::parse(&dup).unwrap_err().to_string().contains("sweep.seeds"));
        let close = plan_text("[sweep]\nschemes = [\"MA\"]\nseeds = [1]\n").replace("min_spacing_wl = 0.5", "min_spacing_wl = 0.4");
        assert!(ExperimentPlan::parse(&close).unwrap_err().to_string().contains("min_spacing"));
    }

    #[test]
    fn csv_round_trips() {
        let rows = vec![
            ResultRow { axis: Some(10.0), scheme: Scheme::Ma, seed: 3, ee_de: 0.1 + 0.2, ee_mc: 1.0 / 3.0, sum_rate: 12.5, tx_power: 1e-3, iters: 7, wall_time: 0.0, status: "ok".into() },
            ResultRow { axis: None, scheme: Scheme::MaLos, seed: 4, ee_de: f64::NAN, ee_mc: f64::NAN, sum_rate: f64::NAN, tx_power: f64::NAN, iters: 0, wall_time: 0.0, status: "error: x, y".into() },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("axis,scheme,seed,EE_de,EE_mc,sum_rate,tx_power,iters,wall_time,status\n"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].status, rows[1].status);
        assert!(back[1].ee_de.is_nan() && back[1].axis.is_none());
    }
}
