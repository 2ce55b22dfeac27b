//! Alternating optimization of the transmit block (positions and precoder)
//! and the per-user receive positions, plus the benchmark variants.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apv_rx::{sca_receive, FrozenReceiveContext};
use crate::apv_tx::{sca_transmit, MinorizerEe, ScaSettings, TransmitObjective};
use crate::channel::{centered_grid, field_matrix, Apv, ChannelStatistics};
use crate::config::ScenarioConfig;
use crate::de::{minorizer_params, DeOptions, Link, MinorizerParams, UserRate};
use crate::error::{Error, Result};
use crate::mc::{mc_user_rate, McEstimate};
use crate::precoder::{PrecoderBranch, PrecoderSet};
use crate::single_user::{optimize_covariance, SingleUserEe};

/// Optimization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Both arrays movable.
    #[serde(rename = "MA")]
    Ma,
    /// Only the transmit array moves.
    #[serde(rename = "TMA")]
    Tma,
    /// Only the receive arrays move.
    #[serde(rename = "RMA")]
    Rma,
    /// Both arrays restricted to a grid with local search.
    #[serde(rename = "DPS")]
    Dps,
    /// Fixed half-wavelength arrays.
    #[serde(rename = "UPA")]
    Upa,
    /// Designed for the line-of-sight part only, evaluated on the full model.
    #[serde(rename = "MA-LOS")]
    MaLos,
    /// One user with the rate itself as transmit objective.
    #[serde(rename = "MA-single-user")]
    SingleUser,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [Scheme::Ma, Scheme::Tma, Scheme::Rma, Scheme::Dps, Scheme::Upa, Scheme::MaLos, Scheme::SingleUser];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ma => "MA",
            Scheme::Tma => "TMA",
            Scheme::Rma => "RMA",
            Scheme::Dps => "DPS",
            Scheme::Upa => "UPA",
            Scheme::MaLos => "MA-LOS",
            Scheme::SingleUser => "MA-single-user",
        }
    }

    pub fn moves_tx(self) -> bool {
        !matches!(self, Scheme::Rma | Scheme::Upa)
    }

    pub fn moves_rx(self) -> bool {
        !matches!(self, Scheme::Tma | Scheme::Upa)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown scheme `{s}`")))
    }
}

/// Transmit and receive positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub t: Apv,
    pub r: Vec<Apv>,
}

impl Layout {
    /// Centred grids at pitch `spacing` in both regions.
    pub fn grid(config: &ScenarioConfig, spacing: f64) -> Result<Self> {
        let g = &config.geometry;
        let t = centered_grid(config.n_tx, spacing, g.tx_region)?;
        let r = centered_grid(config.n_rx, spacing, g.rx_region)?;
        Ok(Self { t, r: vec![r; config.n_users] })
    }

    pub fn is_feasible(&self, config: &ScenarioConfig, tol: f64) -> bool {
        let g = &config.geometry;
        self.t.is_feasible(g.tx_region, g.min_spacing, tol) && self.r.iter().all(|r| r.is_feasible(g.rx_region, g.min_spacing, tol))
    }
}

pub fn link(config: &ScenarioConfig, stats: &ChannelStatistics, t: &Apv, r: &Apv, k: usize) -> Result<Link> {
    let u = &stats.users[k];
    let w = config.geometry.wavelength;
    Link::new(field_matrix(t, &u.tx_dirs, w), field_matrix(r, &u.rx_dirs, w), u, stats.noise_power)
}

pub fn links(config: &ScenarioConfig, stats: &ChannelStatistics, layout: &Layout) -> Result<Vec<Link>> {
    (0..stats.users.len()).map(|k| link(config, stats, &layout.t, &layout.r[k], k)).collect()
}

/// DE evaluation of one operating point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evaluation {
    /// Energy efficiency, nats per joule per hertz.
    pub ee: f64,
    /// Sum rate, nats per second per hertz.
    pub sum_rate: f64,
    pub rates: Vec<f64>,
    pub tx_power: f64,
    pub residual: f64,
}

pub fn user_rates(links: &[Link], precoder: &PrecoderSet, opts: DeOptions) -> Result<Vec<UserRate>> {
    links.par_iter().enumerate().map(|(k, l)| UserRate::evaluate(l, precoder, k, opts)).collect()
}

pub fn summarize(config: &ScenarioConfig, rates: &[UserRate], precoder: &PrecoderSet) -> Evaluation {
    let values: Vec<f64> = rates.iter().map(UserRate::net).collect();
    let sum_rate: f64 = values.iter().sum();
    let tx_power = precoder.power();
    Evaluation {
        ee: sum_rate / config.power.total(tx_power),
        sum_rate,
        rates: values,
        tx_power,
        residual: rates.iter().map(UserRate::residual).fold(0.0, f64::max),
    }
}

pub fn evaluate(config: &ScenarioConfig, stats: &ChannelStatistics, layout: &Layout, precoder: &PrecoderSet, opts: DeOptions) -> Result<Evaluation> {
    let l = links(config, stats, layout)?;
    Ok(summarize(config, &user_rates(&l, precoder, opts)?, precoder))
}

/// Sample-mean evaluation of one operating point; user `k` draws from the
/// stream `(seed, k)`.
pub fn mc_evaluate(
    config: &ScenarioConfig,
    stats: &ChannelStatistics,
    layout: &Layout,
    precoder: &PrecoderSet,
    samples: usize,
    seed: u64,
) -> Result<(f64, Vec<McEstimate>)> {
    let w = config.geometry.wavelength;
    let est = stats
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let g = field_matrix(&layout.t, &u.tx_dirs, w);
            let f = field_matrix(&layout.r[k], &u.rx_dirs, w);
            mc_user_rate(&g, &f, u, stats.noise_power, precoder, k, samples, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let sum: f64 = est.iter().map(|e| e.mean).sum();
    Ok((sum, est))
}

/// Square lattice of candidate sites at pitch `spacing`, centred in `[0, side]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteGrid {
    pub per_side: usize,
    pub spacing: f64,
    pub offset: f64,
}

impl SiteGrid {
    pub fn new(side: f64, spacing: f64) -> Self {
        let per_side = ((side / spacing) * (1.0 + 1e-12)).floor().max(1.0) as usize;
        let offset = 0.5 * (side - (per_side - 1) as f64 * spacing);
        Self { per_side, spacing, offset }
    }

    pub fn position(&self, cell: (usize, usize)) -> (f64, f64) {
        (self.offset + cell.0 as f64 * self.spacing, self.offset + cell.1 as f64 * self.spacing)
    }

    pub fn apv(&self, cells: &[(usize, usize)]) -> Apv {
        let (x, y) = cells.iter().map(|&c| self.position(c)).unzip();
        Apv { x, y }
    }

    /// Nearest site of every antenna; fails when two antennas share a site.
    pub fn snap(&self, apv: &Apv) -> Result<Vec<(usize, usize)>> {
        let idx = |v: f64| ((v - self.offset) / self.spacing + 0.5 + 1e-6).floor().clamp(0.0, (self.per_side - 1) as f64) as usize;
        let cells: Vec<(usize, usize)> = apv.x.iter().zip(&apv.y).map(|(&x, &y)| (idx(x), idx(y))).collect();
        for i in 0..cells.len() {
            if cells[..i].contains(&cells[i]) {
                return Err(Error::Infeasible("positions do not map to distinct grid sites".into()));
            }
        }
        Ok(cells)
    }

    fn neighbours(&self, c: (usize, usize)) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(4);
        if c.1 + 1 < self.per_side {
            out.push((c.0, c.1 + 1));
        }
        if c.1 > 0 {
            out.push((c.0, c.1 - 1));
        }
        if c.0 > 0 {
            out.push((c.0 - 1, c.1));
        }
        if c.0 + 1 < self.per_side {
            out.push((c.0 + 1, c.1));
        }
        out
    }
}

/// Result of a grid local search.
#[derive(Debug, Clone)]
pub struct LocalSearch {
    pub cells: Vec<(usize, usize)>,
    pub value: f64,
    pub moves: usize,
    pub sweeps: usize,
}

/// Moves antennas one at a time to the best unoccupied neighbouring site
/// until a full sweep improves the objective by no more than `1e-12`.
pub fn dps_local_search<F>(grid: &SiteGrid, start: &[(usize, usize)], max_sweeps: usize, mut objective: F) -> Result<LocalSearch>
where
    F: FnMut(&Apv) -> Result<f64>,
{
    for &(i, j) in start {
        if i >= grid.per_side || j >= grid.per_side {
            return Err(Error::Infeasible("antenna is off the site grid".into()));
        }
    }
    let mut cells = start.to_vec();
    let mut value = objective(&grid.apv(&cells))?;
    let mut moves = 0;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut moved = false;
        for a in 0..cells.len() {
            let mut best = (value, cells[a]);
            for nb in grid.neighbours(cells[a]) {
                if cells.contains(&nb) {
                    continue;
                }
                let mut trial = cells.clone();
                trial[a] = nb;
                let v = objective(&grid.apv(&trial))?;
                if v > best.0 + 1e-12 {
                    best = (v, nb);
                }
            }
            if best.1 != cells[a] {
                cells[a] = best.1;
                value = best.0;
                moves += 1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(LocalSearch { cells, value, moves, sweeps })
}

/// Quantities exposed at every transmit expansion point.
pub struct ExpansionPoint<'a> {
    pub iteration: usize,
    pub layout: &'a Layout,
    pub links: &'a [Link],
    pub precoder: &'a PrecoderSet,
    pub rates: &'a [UserRate],
    pub params: &'a [MinorizerParams],
}

/// Run-time options of the AO driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoOptions {
    pub de: DeOptions,
    /// Maximum local-search sweeps of the grid scheme per block update.
    pub dps_sweeps: usize,
    /// Outer iterations of the single-user covariance solver.
    pub covariance_iters: usize,
}

impl AoOptions {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self { de: DeOptions::new(config.knobs.de_sweeps, config.knobs.de_tol), dps_sweeps: 50, covariance_iters: 100 }
    }
}

/// One outer iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub ee: f64,
    pub sum_rate: f64,
    pub tx_power: f64,
    pub increment: f64,
    pub branch: Option<PrecoderBranch>,
    pub tx_steps: usize,
    pub rx_steps: usize,
    /// Transmit update discarded because it lowered the DE objective.
    pub tx_rejected: bool,
    /// Receive updates discarded for the same reason.
    pub rx_rejected: usize,
    pub de_residual: f64,
    pub layout: Layout,
}

/// Full record of one optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub scheme: Scheme,
    pub initial: Evaluation,
    pub iterations: Vec<IterationRecord>,
    pub layout: Layout,
    #[serde(skip)]
    pub precoder: PrecoderSet,
    /// DE evaluation of the final point under the design statistics.
    pub design: Evaluation,
    /// DE evaluation of the final point under the true statistics.
    pub result: Evaluation,
    /// First iteration whose increment fell below the stopping threshold.
    pub settled_at: Option<usize>,
}

impl RunTrace {
    pub fn safeguard_hits(&self) -> usize {
        self.iterations.iter().map(|it| it.tx_rejected as usize + it.rx_rejected).sum()
    }

    pub fn ee_trace(&self) -> Vec<f64> {
        std::iter::once(self.initial.ee).chain(self.iterations.iter().map(|i| i.ee)).collect()
    }
}

impl Default for PrecoderSet {
    fn default() -> Self {
        PrecoderSet { blocks: Vec::new() }
    }
}

/// Isotropic precoder scaled to the most energy-efficient power in
/// `(0, p_max]`; the ratio is unimodal in the power, so a golden-section
/// search over the log-power suffices.
pub fn isotropic_start(config: &ScenarioConfig, links: &[Link], opts: DeOptions) -> Result<PrecoderSet> {
    let pm = config.power.p_max;
    let at = |u: f64| PrecoderSet::isotropic(config.n_tx, config.n_users, config.streams, u.exp().min(pm));
    let ee = |u: f64| -> Result<f64> {
        let p = at(u);
        Ok(summarize(config, &user_rates(links, &p, opts)?, &p).ee)
    };
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (pm.ln() - 6.0 * std::f64::consts::LN_10, pm.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (ee(c)?, ee(d)?);
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ee(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ee(d)?;
        }
        if b - a <= 1e-12 {
            break;
        }
    }
    let (u, best) = if fc >= fd { (c, fc) } else { (d, fd) };
    if ee(pm.ln())? >= best {
        return Ok(at(pm.ln()));
    }
    Ok(at(u))
}

fn initial_layout(config: &ScenarioConfig, scheme: Scheme) -> Result<Layout> {
    let g = &config.geometry;
    let spacing = if scheme == Scheme::Upa { (0.5 * g.wavelength).max(g.min_spacing) } else { g.min_spacing };
    let layout = Layout::grid(config, spacing)?;
    if scheme == Scheme::Dps {
        let tg = SiteGrid::new(g.tx_region, g.min_spacing);
        let rg = SiteGrid::new(g.rx_region, g.min_spacing);
        let t = tg.apv(&tg.snap(&layout.t)?);
        let r = rg.apv(&rg.snap(&layout.r[0])?);
        return Ok(Layout { t, r: vec![r; config.n_users] });
    }
    Ok(layout)
}

/// Alternating optimization for `scheme`.
pub fn run_ao(config: &ScenarioConfig, stats: &ChannelStatistics, scheme: Scheme) -> Result<RunTrace> {
    run_ao_observed(config, stats, scheme, AoOptions::from_config(config), &mut |_| {})
}

/// [`run_ao`] with a callback at every transmit expansion point.
pub fn run_ao_observed(
    config: &ScenarioConfig,
    stats: &ChannelStatistics,
    scheme: Scheme,
    opts: AoOptions,
    observer: &mut dyn FnMut(&ExpansionPoint<'_>),
) -> Result<RunTrace> {
    config.validate()?;
    if stats.users.len() != config.n_users {
        return Err(Error::Dimension("statistics do not match the user count".into()));
    }
    if scheme == Scheme::SingleUser && config.n_users != 1 {
        return Err(Error::config("n_users", "the single-user scheme needs exactly one user"));
    }
    let design_stats = if scheme == Scheme::MaLos { stats.line_of_sight_only() } else { stats.clone() };
    let design = &design_stats;
    let g = config.geometry;
    let knobs = config.knobs;
    let tx_settings = ScaSettings::transmit(&knobs, g.tx_region, g.min_spacing);
    let rx_settings = ScaSettings::receive(&knobs, g.rx_region, g.min_spacing);
    let tx_sites = SiteGrid::new(g.tx_region, g.min_spacing);
    let rx_sites = SiteGrid::new(g.rx_region, g.min_spacing);

    let mut layout = initial_layout(config, scheme)?;
    let mut cur_links = links(config, design, &layout)?;
    let mut precoder = isotropic_start(config, &cur_links, opts.de)?;
    let mut cur_rates = user_rates(&cur_links, &precoder, opts.de)?;
    let initial = summarize(config, &cur_rates, &precoder);
    let mut current = initial.clone();
    let mut records = Vec::new();
    let mut settled_at = None;
    let mut quiet = 0;

    for it in 0..knobs.ao_iters {
        let before = current.ee;
        let mut branch = None;
        let mut tx_steps = 0;
        let mut tx_rejected = false;

        // Transmit block.
        let (cand_t, cand_p) = if scheme == Scheme::SingleUser {
            let obj = SingleUserEe {
                stats: design.users[0].clone(),
                f: cur_links[0].f.clone(),
                noise: design.noise_power,
                power: config.power,
                wavelength: g.wavelength,
                streams: config.streams,
                opts: opts.de,
                max_iters: opts.covariance_iters,
            };
            let out = sca_transmit(&obj, &layout.t, &tx_settings)?;
            tx_steps = out.steps.len();
            (out.apv, PrecoderSet::new(vec![out.solution.precoder])?)
        } else {
            let params: Vec<MinorizerParams> =
                cur_links.iter().enumerate().map(|(k, l)| minorizer_params(l, &precoder, k, &cur_rates[k])).collect();
            observer(&ExpansionPoint { iteration: it, layout: &layout, links: &cur_links, precoder: &precoder, rates: &cur_rates, params: &params });
            let obj = MinorizerEe {
                tx_dirs: design.users.iter().map(|u| u.tx_dirs.clone()).collect(),
                params,
                power: config.power,
                wavelength: g.wavelength,
                streams: vec![config.streams; config.n_users],
            };
            let (t, sol) = match scheme {
                Scheme::Dps => {
                    let found = dps_local_search(&tx_sites, &tx_sites.snap(&layout.t)?, opts.dps_sweeps, |a| obj.evaluate(a).map(|v| v.0))?;
                    tx_steps = found.moves;
                    let t = tx_sites.apv(&found.cells);
                    let sol = obj.solve(&t)?;
                    (t, sol)
                }
                s if s.moves_tx() => {
                    let out = sca_transmit(&obj, &layout.t, &tx_settings)?;
                    tx_steps = out.steps.len();
                    (out.apv, out.solution)
                }
                _ => (layout.t.clone(), obj.solve(&layout.t)?),
            };
            branch = Some(sol.precoder.branch);
            (t, sol.precoder.precoder)
        };
        let cand_layout = Layout { t: cand_t, r: layout.r.clone() };
        let cand_links = links(config, design, &cand_layout)?;
        let cand_rates = user_rates(&cand_links, &cand_p, opts.de)?;
        let cand_eval = summarize(config, &cand_rates, &cand_p);
        if cand_eval.ee >= current.ee {
            layout = cand_layout;
            precoder = cand_p;
            cur_links = cand_links;
            cur_rates = cand_rates;
            current = cand_eval;
        } else {
            tx_rejected = true;
        }

        // Receive block, one independent problem per user.
        let mut rx_steps = 0;
        let mut rx_rejected = 0;
        if scheme.moves_rx() {
            let updates: Vec<Result<Option<(Apv, Link, UserRate, usize)>>> = (0..config.n_users)
                .into_par_iter()
                .map(|k| {
                    let frozen = FrozenReceiveContext::from_rate(&cur_rates[k], &design.users[k].rx_dirs, g.wavelength);
                    let (r, steps) = if scheme == Scheme::Dps {
                        let found = dps_local_search(&rx_sites, &rx_sites.snap(&layout.r[k])?, opts.dps_sweeps, |a| frozen.rate(a))?;
                        (rx_sites.apv(&found.cells), found.moves)
                    } else {
                        let out = sca_receive(&frozen, &layout.r[k], &rx_settings)?;
                        (out.apv, out.steps.len())
                    };
                    if r == layout.r[k] {
                        return Ok(None);
                    }
                    let l = link(config, design, &layout.t, &r, k)?;
                    let rate = UserRate::evaluate(&l, &precoder, k, opts.de)?;
                    Ok(Some((r, l, rate, steps)))
                })
                .collect();
            for (k, up) in updates.into_iter().enumerate() {
                if let Some((r, l, rate, steps)) = up? {
                    rx_steps += steps;
                    if rate.net() >= cur_rates[k].net() {
                        layout.r[k] = r;
                        cur_links[k] = l;
                        cur_rates[k] = rate;
                    } else {
                        rx_rejected += 1;
                    }
                }
            }
            current = summarize(config, &cur_rates, &precoder);
        }

        let increment = current.ee - before;
        records.push(IterationRecord {
            index: it + 1,
            ee: current.ee,
            sum_rate: current.sum_rate,
            tx_power: current.tx_power,
            increment,
            branch,
            tx_steps,
            rx_steps,
            tx_rejected,
            rx_rejected,
            de_residual: current.residual,
            layout: layout.clone(),
        });
        log::debug!("{scheme} iteration {}: ee {:.6e} increment {:.3e}", it + 1, current.ee, increment);
        if increment < knobs.eps1 {
            settled_at.get_or_insert(it + 1);
            quiet += 1;
            if quiet >= knobs.patience {
                break;
            }
        } else {
            quiet = 0;
        }
    }

    let result = if scheme == Scheme::MaLos { evaluate(config, stats, &layout, &precoder, opts.de)? } else { current.clone() };
    Ok(RunTrace { scheme, initial, iterations: records, layout, precoder, design: current, result, settled_at })
}

/// Single-user run: the transmit block maximizes the DE rate over power
/// directly instead of the quadratic lower model.
pub fn run_single_user(config: &ScenarioConfig, stats: &ChannelStatistics) -> Result<RunTrace> {
    run_ao(config, stats, Scheme::SingleUser)
}

/// Energy-efficient covariance of a single user at fixed positions.
pub fn single_user_point(config: &ScenarioConfig, stats: &ChannelStatistics, layout: &Layout, opts: AoOptions) -> Result<(f64, PrecoderSet)> {
    let l = link(config, stats, &layout.t, &layout.r[0], 0)?;
    let sol = optimize_covariance(&l, &config.power, config.streams, opts.de, opts.covariance_iters)?;
    Ok((sol.ee, PrecoderSet::new(vec![sol.precoder])?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_scenario;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            let js = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<Scheme>(&js).unwrap(), s);
        }
        assert!("XYZ".parse::<Scheme>().is_err());
    }

    #[test]
    fn local_search_constant_objective_does_not_move() {
        let grid = SiteGrid::new(1.0, 0.25);
        let out = dps_local_search(&grid, &[(0, 0), (1, 1)], 10, |_| Ok(1.0)).unwrap();
        assert_eq!(out.moves, 0);
        assert_eq!(out.cells, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn local_search_takes_single_adjacent_move() {
        let grid = SiteGrid::new(1.0, 0.25);
        let target = grid.position((2, 1));
        let out = dps_local_search(&grid, &[(1, 1)], 10, |a| Ok(-((a.x[0] - target.0).powi(2) + (a.y[0] - target.1).powi(2)))).unwrap();
        assert_eq!(out.moves, 1);
        assert_eq!(out.cells, vec![(2, 1)]);
    }

    #[test]
    fn local_search_ends_at_local_optimum_versus_exhaustive() {
        use rand::{Rng, SeedableRng};
        let grid = SiteGrid::new(0.3, 0.1);
        assert_eq!(grid.per_side, 3);
        let cells: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
        for seed in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let w: Vec<f64> = (0..9).map(|_| rng.gen::<f64>()).collect();
            let pair: Vec<f64> = (0..81).map(|_| rng.gen::<f64>() * 0.3).collect();
            let idx = |x: f64, y: f64| grid.snap(&Apv { x: vec![x], y: vec![y] }).map(|c| c[0].0 * 3 + c[0].1).unwrap();
            let f = |a: &Apv| {
                let i = idx(a.x[0], a.y[0]);
                let j = idx(a.x[1], a.y[1]);
                Ok(w[i] + w[j] + pair[i * 9 + j])
            };
            let out = dps_local_search(&grid, &[(0, 0), (2, 2)], 100, f).unwrap();
            let mut best = f64::MIN;
            for a in &cells {
                for b in &cells {
                    if a != b {
                        best = best.max(f(&grid.apv(&[*a, *b])).unwrap());
                    }
                }
            }
            assert!(out.value <= best + 1e-15);
            for a in 0..2 {
                for nb in grid.neighbours(out.cells[a]) {
                    if out.cells.contains(&nb) {
                        continue;
                    }
                    let mut c = out.cells.clone();
                    c[a] = nb;
                    assert!(f(&grid.apv(&c)).unwrap() <= out.value + 1e-12);
                }
            }
        }
    }

    #[test]
    fn ao_trace_is_monotone_and_feasible() {
        let mut cfg = ScenarioConfig::desk_scale();
        cfg.knobs.ao_iters = 6;
        let st = sample_scenario(&cfg, 1).unwrap();
        for scheme in [Scheme::Ma, Scheme::Upa, Scheme::Dps] {
            let tr = run_ao(&cfg, &st, scheme).unwrap();
            let ee = tr.ee_trace();
            assert!(ee.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{scheme}: {ee:?}");
            assert!(tr.layout.is_feasible(&cfg, 1e-12), "{scheme}");
        }
    }

    #[test]
    fn single_user_requires_one_user() {
        let cfg = ScenarioConfig::desk_scale();
        let st = sample_scenario(&cfg, 1).unwrap();
        assert!(run_single_user(&cfg, &st).is_err());
    }
}
