//! Single-user specialization: the transmit objective is the DE rate
//! itself divided by the consumed power, with the transmit covariance
//! re-optimized by iterative eigenmode power allocation.

use crate::apv_tx::{delta_matrices, TransmitObjective};
use crate::channel::{field_matrix, Apv, PathDir, UserStats};
use crate::config::PowerModel;
use crate::de::{DeOptions, Link, RateTerm};
use crate::error::{Error, Result};
use crate::linalg::{c, herm_eig, rel_change, CMat};

/// Energy-efficient power split over parallel modes with gains `gains`:
/// maximizes `sum log(1 + g_i p_i) / (omega sum p_i + static)` subject to
/// `sum p_i <= p_max`. Returns the powers and the attained ratio.
pub fn eigenmode_power(gains: &[f64], power: &PowerModel) -> (Vec<f64>, f64) {
    let active: Vec<f64> = gains.iter().map(|&g| g.max(0.0)).collect();
    if active.iter().all(|&g| g <= 0.0) {
        return (vec![0.0; gains.len()], 0.0);
    }
    let fill = |level: f64| -> Vec<f64> { active.iter().map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 }).collect() };
    let full = full_power_level(&active, power.p_max);
    let ratio = |p: &[f64]| {
        let num: f64 = p.iter().zip(&active).map(|(p, g)| (g * p).ln_1p()).sum();
        num / power.total(p.iter().sum())
    };
    let mut eta = 0.0;
    let mut p = fill(full);
    for _ in 0..200 {
        let next_eta = ratio(&p);
        if (next_eta - eta).abs() <= 1e-15 * next_eta.abs() {
            eta = next_eta;
            break;
        }
        eta = next_eta;
        let level = if eta > 0.0 { (1.0 / (eta * power.omega)).min(full) } else { full };
        p = fill(level);
    }
    let value = ratio(&p);
    (p, value.max(eta))
}

/// Water level meeting `sum (level - 1/g_i)^+ = p_max` over positive gains.
fn full_power_level(gains: &[f64], p_max: f64) -> f64 {
    let mut inv: Vec<f64> = gains.iter().filter(|&&g| g > 0.0).map(|g| 1.0 / g).collect();
    inv.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut level = 0.0;
    for (i, v) in inv.iter().enumerate() {
        sum += v;
        let candidate = (p_max + sum) / (i + 1) as f64;
        if i + 1 == inv.len() || candidate <= inv[i + 1] {
            level = candidate;
            if candidate >= *v {
                break;
            }
        }
    }
    level
}

/// Optimized covariance of the single user at fixed field responses.
#[derive(Debug, Clone)]
pub struct CovarianceSolution {
    pub covariance: CMat,
    /// `N x s` factor with `precoder * precoder^H = covariance`.
    pub precoder: CMat,
    pub term: RateTerm,
    pub ee: f64,
    pub tx_power: f64,
    pub iterations: usize,
}

/// Alternates between the transmit-side context at the current covariance
/// and the energy-efficient allocation over its top `streams` eigenmodes.
pub fn optimize_covariance(link: &Link, power: &PowerModel, streams: usize, opts: DeOptions, max_iters: usize) -> Result<CovarianceSolution> {
    let n = link.n_tx();
    let mut q = CMat::identity(n, n) * c(power.p_max / n as f64);
    let mut best: Option<CovarianceSolution> = None;
    for it in 0..max_iters {
        let term = RateTerm::evaluate(link, &q, opts)?;
        let tx_power: f64 = q.trace().re;
        let ee = term.value / power.total(tx_power);
        let (vals, vecs) = herm_eig(&(link.g.adjoint() * &term.gamma_tilde * &link.g));
        let s = streams.min(n);
        let gains: Vec<f64> = vals.iter().take(s).copied().collect();
        let (p, _) = eigenmode_power(&gains, power);
        let mut factor = CMat::zeros(n, s);
        for (j, pj) in p.iter().enumerate() {
            factor.set_column(j, &(vecs.column(j) * c(pj.sqrt())));
        }
        let next = &factor * factor.adjoint();
        let improved = best.as_ref().map(|b| ee > b.ee).unwrap_or(true);
        if improved {
            best = Some(CovarianceSolution { covariance: q.clone(), precoder: crate::linalg::psd_factor(&q, s), term, ee, tx_power, iterations: it });
        }
        let change = rel_change(&next, &q);
        q = next;
        if change <= 1e-11 {
            let term = RateTerm::evaluate(link, &q, opts)?;
            let tx_power = q.trace().re;
            let ee = term.value / power.total(tx_power);
            if best.as_ref().map(|b| ee >= b.ee).unwrap_or(true) {
                best = Some(CovarianceSolution { covariance: q.clone(), precoder: factor, term, ee, tx_power, iterations: it + 1 });
            }
            break;
        }
    }
    best.ok_or_else(|| Error::Numerical("covariance iteration produced no iterate".into()))
}

/// Single-user transmit objective with the receive positions held fixed.
#[derive(Debug, Clone)]
pub struct SingleUserEe {
    pub stats: UserStats,
    pub f: CMat,
    pub noise: f64,
    pub power: PowerModel,
    pub wavelength: f64,
    pub streams: usize,
    pub opts: DeOptions,
    pub max_iters: usize,
}

impl SingleUserEe {
    fn tx_dirs(&self) -> &[PathDir] {
        &self.stats.tx_dirs
    }

    pub fn link(&self, t: &Apv) -> Result<Link> {
        Link::new(field_matrix(t, self.tx_dirs(), self.wavelength), self.f.clone(), &self.stats, self.noise)
    }
}

impl TransmitObjective for SingleUserEe {
    type Solution = CovarianceSolution;

    fn evaluate(&self, t: &Apv) -> Result<(f64, CovarianceSolution)> {
        let sol = optimize_covariance(&self.link(t)?, &self.power, self.streams, self.opts, self.max_iters)?;
        Ok((sol.ee, sol))
    }

    /// Partial derivative at the optimized covariance:
    /// `2 Re diag(Q G^H T D G) / P_tot` per axis.
    fn gradient(&self, t: &Apv, sol: &CovarianceSolution) -> Result<Vec<f64>> {
        let g = field_matrix(t, self.tx_dirs(), self.wavelength);
        let (dx, dy) = delta_matrices(self.tx_dirs(), self.wavelength);
        let left = &sol.covariance * g.adjoint() * &sol.term.sensitivity;
        let den = self.power.total(sol.tx_power);
        let n = t.len();
        let mut out = vec![0.0; 2 * n];
        for (axis, d) in [dx, dy].iter().enumerate() {
            let mut dg = g.clone();
            for (i, mut row) in dg.row_iter_mut().enumerate() {
                row *= d[i];
            }
            let m = &left * dg;
            for j in 0..n {
                out[axis * n + j] = 2.0 * m[(j, j)].re / den;
            }
        }
        Ok(out)
    }
}
