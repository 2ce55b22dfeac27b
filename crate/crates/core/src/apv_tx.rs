//! Transmit antenna positioning: gradient of the energy-efficiency model
//! with respect to the transmit positions, linearized spacing constraints
//! and the successive convex approximation loop with Armijo backtracking.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channel::{field_matrix, Apv, PathDir};
use crate::config::{AlgorithmKnobs, PowerModel};
use crate::de::MinorizerParams;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, C64};
use crate::precoder::{optimal_precoder, PrecoderBranch, PrecoderProblem, PrecoderSolution};
use crate::qp::{box_and_halfspaces, solve_constrained_quadratic, Halfspace, QuadraticModel};

/// Diagonals of the phase-derivative matrices `j 2 pi / lambda * cos_x` and
/// `j 2 pi / lambda * cos_y` of a set of paths.
pub fn delta_matrices(dirs: &[PathDir], wavelength: f64) -> (CVec, CVec) {
    let k = 2.0 * PI / wavelength;
    let dx = CVec::from_iterator(dirs.len(), dirs.iter().map(|d| C64::new(0.0, k * d.cos_x())));
    let dy = CVec::from_iterator(dirs.len(), dirs.iter().map(|d| C64::new(0.0, k * d.cos_y())));
    (dx, dy)
}

fn scale_rows(m: &CMat, d: &CVec) -> CMat {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

/// Halfspaces `u_ij^T (t_i - t_j) >= D` in stacked `[x; y]` coordinates,
/// with `u_ij` the unit direction between antennas `i` and `j` at `apv`.
pub fn linearized_spacing(apv: &Apv, spacing: f64) -> Vec<Halfspace> {
    let n = apv.len();
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (apv.x[i] - apv.x[j], apv.y[i] - apv.y[j]);
            let norm = dx.hypot(dy);
            let mut a = DVector::zeros(2 * n);
            a[i] = dx / norm;
            a[j] = -dx / norm;
            a[n + i] = dy / norm;
            a[n + j] = -dy / norm;
            out.push(Halfspace { a, d: spacing });
        }
    }
    out
}

/// Objective of the transmit position update. `evaluate` returns the value
/// and whatever inner solution the gradient needs.
pub trait TransmitObjective {
    type Solution: Clone;
    fn evaluate(&self, t: &Apv) -> Result<(f64, Self::Solution)>;
    fn gradient(&self, t: &Apv, solution: &Self::Solution) -> Result<Vec<f64>>;
}

/// Energy efficiency of the quadratic lower model with the precoder
/// re-optimized at every transmit position.
#[derive(Debug, Clone)]
pub struct MinorizerEe {
    pub tx_dirs: Vec<Vec<PathDir>>,
    pub params: Vec<MinorizerParams>,
    pub power: PowerModel,
    pub wavelength: f64,
    pub streams: Vec<usize>,
}

/// Precoder solution together with the problem it solved.
#[derive(Debug, Clone)]
pub struct TransmitSolution {
    pub problem: PrecoderProblem,
    pub precoder: PrecoderSolution,
    pub g: Vec<CMat>,
}

/// Per-coordinate breakdown of the transmit gradient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmitGradient {
    pub partial: Vec<f64>,
    pub correction: Vec<f64>,
    /// Set when the shift-sensitivity denominator was too small to use.
    pub clamped: bool,
}

impl TransmitGradient {
    pub fn total(&self) -> Vec<f64> {
        self.partial.iter().zip(&self.correction).map(|(a, b)| a + b).collect()
    }
}

impl MinorizerEe {
    pub fn field_responses(&self, t: &Apv) -> Vec<CMat> {
        self.tx_dirs.iter().map(|d| field_matrix(t, d, self.wavelength)).collect()
    }

    pub fn solve(&self, t: &Apv) -> Result<TransmitSolution> {
        let g = self.field_responses(t);
        let refs: Vec<&CMat> = g.iter().collect();
        let problem = PrecoderProblem::new(&refs, &self.params, self.power)?;
        let precoder = optimal_precoder(&problem, &self.streams)?;
        Ok(TransmitSolution { problem, precoder, g })
    }

    /// Partial derivative at fixed precoder plus the implicit term through
    /// the water-filling shift.
    pub fn gradient_parts(&self, t: &Apv, sol: &TransmitSolution) -> Result<TransmitGradient> {
        let n = t.len();
        let p = &sol.precoder.precoder;
        let q = p.covariance();
        let den = self.power.total(p.power());
        let mut partial = vec![0.0; 2 * n];
        let deltas: Vec<(CVec, CVec)> = self.tx_dirs.iter().map(|d| delta_matrices(d, self.wavelength)).collect();
        for (k, gk) in sol.g.iter().enumerate() {
            let par = &self.params[k];
            let pa = &p.blocks[k] * par.a.adjoint();
            let qgb = &q * gk.adjoint() * &par.b;
            for (axis, d) in [&deltas[k].0, &deltas[k].1].into_iter().enumerate() {
                let dg = scale_rows(gk, d);
                for col in 0..n {
                    let dcol = dg.column(col);
                    let v = pa.row(col).transpose().dot(&dcol) - qgb.row(col).transpose().dot(&dcol);
                    partial[axis * n + col] += 2.0 / den * v.re;
                }
            }
        }
        let mut correction = vec![0.0; 2 * n];
        let mut clamped = false;
        if sol.precoder.branch == PrecoderBranch::WaterFilling {
            let mu = sol.precoder.shift;
            let nn = sol.problem.s.nrows();
            let w = (&sol.problem.s + CMat::identity(nn, nn) * c(mu))
                .try_inverse()
                .ok_or_else(|| Error::Numerical("shifted curvature is singular".into()))?;
            let grad_p = sol.problem.gradient(p);
            let wp: Vec<CMat> = p.blocks.iter().map(|pk| &w * pk).collect();
            let denom: f64 = p.blocks.iter().zip(&wp).map(|(pk, wpk)| crate::linalg::trace_product(&pk.adjoint(), wpk).re).sum();
            if denom <= 1e-14 * p.power() / (sol.problem.eigenvalues().max() + mu) {
                clamped = true;
            } else {
                for axis in 0..2 {
                    for col in 0..n {
                        let mut ds = CMat::zeros(nn, nn);
                        let mut db: Vec<CMat> = Vec::with_capacity(sol.g.len());
                        for (k, gk) in sol.g.iter().enumerate() {
                            let d = if axis == 0 { &deltas[k].0 } else { &deltas[k].1 };
                            let wcol = gk.column(col).component_mul(d);
                            let par = &self.params[k];
                            let row = wcol.adjoint() * &par.b * gk;
                            let colv = gk.adjoint() * &par.b * &wcol;
                            for j in 0..nn {
                                ds[(col, j)] += row[j];
                                ds[(j, col)] += colv[j];
                            }
                            let mut dbk = CMat::zeros(nn, par.a.ncols());
                            dbk.set_row(col, &(wcol.adjoint() * &par.a));
                            db.push(dbk);
                        }
                        let r: Vec<CMat> = p.blocks.iter().zip(&db).map(|(pk, dbk)| dbk - &ds * pk).collect();
                        let num: f64 = p.blocks.iter().zip(&r).map(|(pk, rk)| crate::linalg::trace_product(&pk.adjoint(), &(&w * rk)).re).sum();
                        let dmu = num / denom;
                        let mut acc = 0.0;
                        for k in 0..p.blocks.len() {
                            let dp = &w * (&r[k] - &p.blocks[k] * c(dmu));
                            acc += 2.0 * crate::linalg::trace_product(&grad_p[k].adjoint(), &dp).re;
                        }
                        correction[axis * n + col] = acc;
                    }
                }
            }
        }
        Ok(TransmitGradient { partial, correction, clamped })
    }
}

impl TransmitObjective for MinorizerEe {
    type Solution = TransmitSolution;

    fn evaluate(&self, t: &Apv) -> Result<(f64, TransmitSolution)> {
        let sol = self.solve(t)?;
        Ok((sol.precoder.ee, sol))
    }

    fn gradient(&self, t: &Apv, sol: &TransmitSolution) -> Result<Vec<f64>> {
        Ok(self.gradient_parts(t, sol)?.total())
    }
}

/// Total derivative of the model energy efficiency along the optimal
/// precoder path.
pub fn grad_ee_transmit(objective: &MinorizerEe, t: &Apv, sol: &TransmitSolution) -> Result<TransmitGradient> {
    objective.gradient_parts(t, sol)
}

/// Region, spacing and step-control constants of one SCA run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaSettings {
    pub max_iters: usize,
    pub delta: f64,
    pub tau0: f64,
    pub kappa: f64,
    pub xi: f64,
    pub eps1: f64,
    pub side: f64,
    pub spacing: f64,
}

impl ScaSettings {
    pub fn transmit(knobs: &AlgorithmKnobs, side: f64, spacing: f64) -> Self {
        Self { max_iters: knobs.sca_tx_iters, delta: knobs.delta_t, tau0: knobs.tau0, kappa: knobs.kappa, xi: knobs.xi, eps1: knobs.eps1, side, spacing }
    }

    pub fn receive(knobs: &AlgorithmKnobs, side: f64, spacing: f64) -> Self {
        Self { max_iters: knobs.sca_rx_iters, delta: knobs.delta_r, tau0: knobs.tau0, kappa: knobs.kappa, xi: knobs.xi, eps1: knobs.eps1, side, spacing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Closed,
    Projected,
    Stalled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaStep {
    pub kind: StepKind,
    pub tau: f64,
    pub value: f64,
    pub increment: f64,
}

#[derive(Debug, Clone)]
pub struct ScaOutcome<S> {
    pub apv: Apv,
    pub solution: S,
    pub value: f64,
    pub steps: Vec<ScaStep>,
}

impl<S> ScaOutcome<S> {
    pub fn stalled(&self) -> bool {
        self.steps.last().map(|s| s.kind == StepKind::Stalled).unwrap_or(false)
    }
}

pub(crate) fn satisfies(v: &DVector<f64>, cons: &[Halfspace]) -> bool {
    cons.iter().all(|h| h.a.dot(v) >= h.d)
}

/// Closed-form candidate when it meets the linearized constraints, the
/// constrained maximizer of the quadratic model otherwise.
pub(crate) fn constrained_target(model: &QuadraticModel, free: DVector<f64>, current: &Apv, s: &ScaSettings) -> Result<(DVector<f64>, StepKind)> {
    let spacing = linearized_spacing(current, s.spacing);
    let in_box = free.iter().all(|&v| (0.0..=s.side).contains(&v));
    if in_box && satisfies(&free, &spacing) {
        return Ok((free, StepKind::Closed));
    }
    let cons = box_and_halfspaces(free.len(), 0.0, s.side, &spacing);
    let start = DVector::from_vec(current.to_vec()).map(|v| v.clamp(0.0, s.side));
    let sol = solve_constrained_quadratic(model, &cons, &start)?;
    Ok((sol.v, StepKind::Projected))
}

/// Armijo backtracking from `current` towards `target`: `tau` starts at
/// `tau0` and shrinks by `kappa` until the gain reaches
/// `xi * tau * ||target - current||^2`.
pub(crate) fn armijo<S, F>(current: &Apv, value: f64, target: &DVector<f64>, s: &ScaSettings, mut eval: F) -> Result<Option<(Apv, f64, S, f64)>>
where
    F: FnMut(&Apv) -> Result<(f64, S)>,
{
    let cur = DVector::from_vec(current.to_vec());
    let dir = target - &cur;
    let dist2 = dir.norm_squared();
    if dist2 == 0.0 {
        return Ok(None);
    }
    let mut tau = s.tau0 / s.kappa;
    while tau > 1e-12 * s.tau0 {
        tau *= s.kappa;
        let trial = Apv::from_slice((&cur + &dir * tau).as_slice());
        let (v, sol) = eval(&trial)?;
        if v - value >= s.xi * tau * dist2 {
            return Ok(Some((trial, v, sol, tau)));
        }
    }
    Ok(None)
}

/// Successive convex approximation over the transmit positions.
pub fn sca_transmit<O: TransmitObjective>(objective: &O, start: &Apv, s: &ScaSettings) -> Result<ScaOutcome<O::Solution>> {
    let (mut value, mut solution) = objective.evaluate(start)?;
    let mut t = start.clone();
    let mut steps = Vec::new();
    for _ in 0..s.max_iters {
        let grad = DVector::from_vec(objective.gradient(&t, &solution)?);
        let center = DVector::from_vec(t.to_vec());
        let free = (&center + &grad / (2.0 * s.delta)).map(|v| v.clamp(0.0, s.side));
        let model = QuadraticModel::isotropic(center, s.delta, grad);
        let (target, kind) = constrained_target(&model, free, &t, s)?;
        match armijo(&t, value, &target, s, |a| objective.evaluate(a))? {
            Some((next, v, sol, tau)) => {
                let increment = v - value;
                t = next;
                value = v;
                solution = sol;
                steps.push(ScaStep { kind, tau, value, increment });
                if increment <= s.eps1 {
                    break;
                }
            }
            None => {
                steps.push(ScaStep { kind: StepKind::Stalled, tau: 0.0, value, increment: 0.0 });
                break;
            }
        }
    }
    Ok(ScaOutcome { apv: t, solution, value, steps })
}
