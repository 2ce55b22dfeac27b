//! Precoder design for the quadratic lower model of the sum rate:
//! Dinkelbach iterations for the unconstrained energy-efficiency optimum and
//! bisection water-filling when that optimum exceeds the power budget.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::PowerModel;
use crate::de::MinorizerParams;
use crate::error::{Error, Result};
use crate::linalg::{c, frobenius_sq, herm_eig, trace_product, CMat, RVec, C64};

/// Per-user precoders `P_k` (`N x s_k`).
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub blocks: Vec<CMat>,
}

impl PrecoderSet {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        let n = blocks.first().map(|b| b.nrows()).unwrap_or(0);
        if blocks.iter().any(|b| b.nrows() != n) {
            return Err(Error::Dimension("precoder blocks disagree on antenna count".into()));
        }
        Ok(Self { blocks })
    }

    pub fn n_tx(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn n_users(&self) -> usize {
        self.blocks.len()
    }

    /// Orthogonal DFT columns, `streams` per user, with total power `power`.
    pub fn isotropic(n_tx: usize, n_users: usize, streams: usize, power: f64) -> Self {
        let total = n_users * streams;
        let scale = (power / total as f64).sqrt() / (n_tx as f64).sqrt();
        let blocks = (0..n_users)
            .map(|k| {
                CMat::from_fn(n_tx, streams, |n, s| {
                    let col = (k * streams + s) % n_tx;
                    C64::from_polar(scale, -2.0 * PI * (n * col) as f64 / n_tx as f64)
                })
            })
            .collect();
        Self { blocks }
    }

    pub fn covariance(&self) -> CMat {
        let n = self.n_tx();
        self.blocks.iter().fold(CMat::zeros(n, n), |acc, p| acc + p * p.adjoint())
    }

    pub fn covariance_without(&self, k: usize) -> CMat {
        let n = self.n_tx();
        self.blocks.iter().enumerate().filter(|(j, _)| *j != k).fold(CMat::zeros(n, n), |acc, (_, p)| acc + p * p.adjoint())
    }

    /// `tr(P P^H)`.
    pub fn power(&self) -> f64 {
        self.blocks.iter().map(frobenius_sq).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * c(factor)).collect() }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| frobenius_sq(&(a - b))).sum::<f64>().sqrt()
    }
}

/// Energy-efficiency model at fixed transmit positions:
/// `(sum_k 2 Re tr(b_k^H P_k) - tr(P^H S P) + c) / (omega tr(P P^H) + static)`.
#[derive(Debug, Clone)]
pub struct PrecoderProblem {
    /// `sum_k G_k^H B_k G_k`, PSD.
    pub s: CMat,
    /// `G_k^H A_k`.
    pub b: Vec<CMat>,
    pub c_sum: f64,
    pub power: PowerModel,
    eigvals: RVec,
    eigvecs: CMat,
    proj: Vec<CMat>,
}

impl PrecoderProblem {
    pub fn new(gs: &[&CMat], params: &[MinorizerParams], power: PowerModel) -> Result<Self> {
        if gs.len() != params.len() || gs.is_empty() {
            return Err(Error::Dimension("one field response per minorizer is required".into()));
        }
        let n = gs[0].ncols();
        let mut s = CMat::zeros(n, n);
        let mut b = Vec::with_capacity(gs.len());
        for (g, p) in gs.iter().zip(params) {
            s += g.adjoint() * &p.b * *g;
            b.push(g.adjoint() * &p.a);
        }
        let c_sum = params.iter().map(|p| p.c).sum();
        Ok(Self::from_parts(s, b, c_sum, power))
    }

    pub fn from_parts(s: CMat, b: Vec<CMat>, c_sum: f64, power: PowerModel) -> Self {
        let s = crate::linalg::hermitian_part(&s);
        let (vals, vecs) = herm_eig(&s);
        let eigvals = vals.map(|v| v.max(0.0));
        let proj = b.iter().map(|bk| vecs.adjoint() * bk).collect();
        Self { s, b, c_sum, power, eigvals, eigvecs: vecs, proj }
    }

    pub fn numerator(&self, p: &PrecoderSet) -> f64 {
        let mut acc = self.c_sum;
        for (bk, pk) in self.b.iter().zip(&p.blocks) {
            acc += 2.0 * trace_product(&bk.adjoint(), pk).re - trace_product(&pk.adjoint(), &(&self.s * pk)).re;
        }
        acc
    }

    pub fn ee(&self, p: &PrecoderSet) -> f64 {
        self.numerator(p) / self.power.total(p.power())
    }

    /// Conjugate gradient `dEE/dP_k^*` so that `dEE = 2 Re tr(grad^H dP)`.
    pub fn gradient(&self, p: &PrecoderSet) -> Vec<CMat> {
        let den = self.power.total(p.power());
        let num = self.numerator(p);
        self.b
            .iter()
            .zip(&p.blocks)
            .map(|(bk, pk)| (bk - &self.s * pk) * c(1.0 / den) - pk * c(num * self.power.omega / (den * den)))
            .collect()
    }

    /// `(S + mu I)^{-1} b_k` for every user.
    pub fn solve_shifted(&self, mu: f64) -> PrecoderSet {
        let inv = self.eigvals.map(|l| c(1.0 / (l + mu)));
        let blocks = self
            .proj
            .iter()
            .map(|pr| {
                let mut scaled = pr.clone();
                for (i, mut row) in scaled.row_iter_mut().enumerate() {
                    row *= inv[i];
                }
                &self.eigvecs * scaled
            })
            .collect();
        PrecoderSet { blocks }
    }

    /// Per-eigenmode weights `c_i = sum_k ||(U^H b_k)_{i,:}||^2`.
    fn mode_weights(&self) -> RVec {
        let n = self.eigvals.len();
        RVec::from_iterator(n, (0..n).map(|i| self.proj.iter().map(|pr| pr.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()))
    }

    /// `tr(P P^H)` of `solve_shifted(mu)` in closed form.
    pub fn power_at(&self, mu: f64) -> f64 {
        self.mode_weights().iter().zip(self.eigvals.iter()).map(|(w, l)| w / ((l + mu) * (l + mu))).sum()
    }

    pub fn eigenvalues(&self) -> &RVec {
        &self.eigvals
    }

    pub fn is_trivial(&self) -> bool {
        self.b.iter().all(|bk| frobenius_sq(bk) == 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct DinkelbachOutcome {
    pub precoder: PrecoderSet,
    pub ee_trace: Vec<f64>,
    pub converged: bool,
}

/// Dinkelbach iterations `P <- (S + eta omega I)^{-1} b` with `eta` the
/// current energy efficiency.
pub fn dinkelbach_unconstrained(problem: &PrecoderProblem, init: &PrecoderSet, max_iters: usize) -> DinkelbachOutcome {
    if problem.is_trivial() {
        let zero = init.scaled(0.0);
        let ee = problem.ee(&zero);
        return DinkelbachOutcome { precoder: zero, ee_trace: vec![ee], converged: true };
    }
    let omega = problem.power.omega;
    let floor = 1e-12 * (problem.eigvals.max() + 1e-300) / omega;
    let mut p = init.clone();
    let mut eta = problem.ee(&p);
    let mut trace = vec![eta];
    let mut converged = false;
    for _ in 0..max_iters {
        let next = problem.solve_shifted(eta.max(floor) * omega);
        let eta_next = problem.ee(&next);
        trace.push(eta_next);
        let done = (eta_next - eta).abs() <= 4.0 * f64::EPSILON * eta_next.abs().max(f64::MIN_POSITIVE);
        p = next;
        eta = eta_next;
        if done {
            converged = true;
            break;
        }
    }
    DinkelbachOutcome { precoder: p, ee_trace: trace, converged }
}

#[derive(Debug, Clone)]
pub struct WaterFilling {
    pub precoder: PrecoderSet,
    pub mu: f64,
}

/// Shift `mu > 0` with `tr(P(mu) P(mu)^H) = P_max`, by bisection then
/// Newton polishing from the left of the root.
pub fn water_filling_full_power(problem: &PrecoderProblem) -> Result<WaterFilling> {
    let p_max = problem.power.p_max;
    let w = problem.mode_weights();
    let lam = &problem.eigvals;
    let power = |mu: f64| -> f64 { w.iter().zip(lam.iter()).map(|(w, l)| w / ((l + mu) * (l + mu))).sum() };
    let scale = lam.max().max(f64::MIN_POSITIVE);
    let mut lo = 1e-12 * scale;
    if !(power(lo) >= p_max) {
        return Err(Error::Bracket(format!("power {:.3e} at the smallest shift is below the budget {p_max:.3e}", power(lo))));
    }
    let mut hi = scale.max(1.0);
    let mut guard = 0;
    while power(hi) > p_max {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Bracket("no upper shift found".into()));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if power(mid) >= p_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut mu = lo;
    for _ in 0..60 {
        let f = power(mu) - p_max;
        let df: f64 = -2.0 * w.iter().zip(lam.iter()).map(|(w, l)| w / (l + mu).powi(3)).sum::<f64>();
        if df == 0.0 {
            break;
        }
        let next = mu - f / df;
        if !(next.is_finite()) || (next - mu).abs() <= 1e-16 * mu {
            mu = if next.is_finite() { next } else { mu };
            break;
        }
        mu = next;
    }
    let p = problem.solve_shifted(mu);
    let fix = (p_max / p.power()).sqrt();
    Ok(WaterFilling { precoder: p.scaled(fix), mu })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrecoderBranch {
    Dinkelbach,
    WaterFilling,
}

#[derive(Debug, Clone)]
pub struct PrecoderSolution {
    pub precoder: PrecoderSet,
    pub branch: PrecoderBranch,
    /// Diagonal shift of `S` in the closed form `(S + shift I)^{-1} b`.
    pub shift: f64,
    pub ee: f64,
    pub iterations: usize,
}

/// Unconstrained Dinkelbach optimum when it meets the power budget, the
/// full-power water-filling solution otherwise.
pub fn optimal_precoder(problem: &PrecoderProblem, n_streams: &[usize]) -> Result<PrecoderSolution> {
    let n = problem.s.nrows();
    let init = match water_filling_full_power(problem) {
        Ok(wf) => wf.precoder,
        Err(_) if problem.is_trivial() => {
            PrecoderSet { blocks: n_streams.iter().map(|&s| CMat::zeros(n, s)).collect() }
        }
        Err(_) => problem.solve_shifted(1e-12 * problem.eigvals.max().max(f64::MIN_POSITIVE)),
    };
    let dk = dinkelbach_unconstrained(problem, &init, 200);
    let eta = *dk.ee_trace.last().unwrap();
    let p_max = problem.power.p_max;
    if dk.precoder.power() <= p_max * (1.0 + 1e-12) {
        let shift = eta * problem.power.omega;
        return Ok(PrecoderSolution { ee: eta, precoder: dk.precoder, branch: PrecoderBranch::Dinkelbach, shift, iterations: dk.ee_trace.len() - 1 });
    }
    let wf = water_filling_full_power(problem)?;
    let ee = problem.ee(&wf.precoder);
    Ok(PrecoderSolution { precoder: wf.precoder, branch: PrecoderBranch::WaterFilling, shift: wf.mu, ee, iterations: dk.ee_trace.len() - 1 })
}
