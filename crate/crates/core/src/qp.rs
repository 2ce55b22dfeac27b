//! Dense primal active-set solver for small strictly convex quadratic
//! programs with linear inequality constraints.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One inequality `a^T v >= d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub a: DVector<f64>,
    pub d: f64,
}

/// Concave quadratic model `-1/2 (v - c)^T H (v - c) + g^T (v - c)` to be
/// maximized.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    pub center: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub gradient: DVector<f64>,
}

impl QuadraticModel {
    /// `-delta ||v - c||^2 + g^T (v - c)`.
    pub fn isotropic(center: DVector<f64>, delta: f64, gradient: DVector<f64>) -> Self {
        let n = center.len();
        Self { center, hessian: DMatrix::identity(n, n) * (2.0 * delta), gradient }
    }

    pub fn value(&self, v: &DVector<f64>) -> f64 {
        let d = v - &self.center;
        -0.5 * d.dot(&(&self.hessian * &d)) + self.gradient.dot(&d)
    }

    /// Unconstrained maximizer `c + H^{-1} g`.
    pub fn unconstrained(&self) -> Result<DVector<f64>> {
        let step = self
            .hessian
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Qp("model curvature is not positive definite".into()))?
            .solve(&self.gradient);
        Ok(&self.center + step)
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub v: DVector<f64>,
    /// One multiplier per constraint, zero when inactive.
    pub multipliers: DVector<f64>,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// Stacks box bounds `lo <= v_i <= hi` and extra halfspaces.
pub fn box_and_halfspaces(n: usize, lo: f64, hi: f64, extra: &[Halfspace]) -> Vec<Halfspace> {
    let mut out = Vec::with_capacity(2 * n + extra.len());
    for i in 0..n {
        let mut a = DVector::zeros(n);
        a[i] = 1.0;
        out.push(Halfspace { a: a.clone(), d: lo });
        out.push(Halfspace { a: -a, d: -hi });
    }
    out.extend_from_slice(extra);
    out
}

/// Maximizes `model` subject to `constraints`, starting from the feasible
/// point `start`.
pub fn solve_constrained_quadratic(model: &QuadraticModel, constraints: &[Halfspace], start: &DVector<f64>) -> Result<QpSolution> {
    let n = start.len();
    let h = &model.hessian;
    let lin = h * &model.center + &model.gradient;
    let scale = 1.0 + start.amax();
    let feas_tol = 1e-10 * scale;
    for (i, c) in constraints.iter().enumerate() {
        if c.a.dot(start) < c.d - feas_tol {
            return Err(Error::Qp(format!("start violates constraint {i} by {:.3e}", c.d - c.a.dot(start))));
        }
    }
    let mut v = start.clone();
    let mut working: Vec<usize> = Vec::new();
    // Set after an unblocked full step: `v` then minimizes over the current
    // working set and any residual step is round-off.
    let mut settled = false;
    let max_iter = 50 * (n + constraints.len());
    for iter in 0..max_iter {
        let grad = h * &v - &lin;
        let w = working.len();
        let mut kkt = DMatrix::zeros(n + w, n + w);
        kkt.view_mut((0, 0), (n, n)).copy_from(h);
        for (j, &ci) in working.iter().enumerate() {
            for r in 0..n {
                kkt[(r, n + j)] = -constraints[ci].a[r];
                kkt[(n + j, r)] = constraints[ci].a[r];
            }
        }
        let mut rhs = DVector::zeros(n + w);
        rhs.rows_mut(0, n).copy_from(&(-&grad));
        let sol = kkt.lu().solve(&rhs).ok_or_else(|| Error::Qp("singular KKT system".into()))?;
        let p = sol.rows(0, n).into_owned();
        let lambda = sol.rows(n, w).into_owned();
        if settled || p.amax() <= 1e-13 * scale {
            settled = false;
            let (mut worst, mut worst_j) = (0.0, None);
            for j in 0..w {
                if lambda[j] < worst {
                    worst = lambda[j];
                    worst_j = Some(j);
                }
            }
            let lam_scale = 1e-12 * (1.0 + grad.amax());
            match worst_j {
                Some(j) if worst < -lam_scale => {
                    working.remove(j);
                }
                _ => {
                    let mut multipliers = DVector::zeros(constraints.len());
                    for (j, &ci) in working.iter().enumerate() {
                        multipliers[ci] = lambda[j].max(0.0);
                    }
                    let kkt_residual = kkt_residual(model, constraints, &v, &multipliers);
                    return Ok(QpSolution { v, multipliers, iterations: iter + 1, kkt_residual });
                }
            }
        } else {
            let mut alpha = 1.0;
            let mut blocking = None;
            for (i, c) in constraints.iter().enumerate() {
                if working.contains(&i) {
                    continue;
                }
                let ap = c.a.dot(&p);
                if ap < -1e-15 * c.a.amax() * p.amax() {
                    let slack = (c.a.dot(&v) - c.d).max(0.0);
                    let step = slack / -ap;
                    if step < alpha {
                        alpha = step;
                        blocking = Some(i);
                    }
                }
            }
            v += &p * alpha;
            match blocking {
                Some(i) => working.push(i),
                None => settled = true,
            }
        }
    }
    Err(Error::Qp("active-set iteration limit reached".into()))
}

/// Largest violation among stationarity, primal and dual feasibility and
/// complementary slackness, relative to the gradient scale.
pub fn kkt_residual(model: &QuadraticModel, constraints: &[Halfspace], v: &DVector<f64>, multipliers: &DVector<f64>) -> f64 {
    let lin = &model.hessian * &model.center + &model.gradient;
    let mut station = &model.hessian * v - &lin;
    for (c, &l) in constraints.iter().zip(multipliers.iter()) {
        station -= &c.a * l;
    }
    let gscale = 1.0 + lin.amax();
    let mut worst = station.amax() / gscale;
    let vscale = 1.0 + v.amax();
    for (c, &l) in constraints.iter().zip(multipliers.iter()) {
        let slack = c.a.dot(v) - c.d;
        worst = worst.max((-slack).max(0.0) / vscale);
        worst = worst.max((-l).max(0.0) / gscale);
        worst = worst.max((l * slack).abs() / (gscale * vscale));
    }
    worst
}
