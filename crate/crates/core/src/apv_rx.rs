//! Receive antenna positioning for one user with the transmit side frozen.
//!
//! The objective is `log det(I + F^H G+ F) - log det(I + F^H G- F)` plus
//! constants, with `F` the receive field response and `G+`, `G-` the
//! receive-side contexts of the two DE terms.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::apv_tx::{armijo, constrained_target, delta_matrices, ScaOutcome, ScaSettings, ScaStep, StepKind};
use crate::channel::{field_matrix, Apv, PathDir};
use crate::de::UserRate;
use crate::error::{Error, Result};
use crate::linalg::{identity, inv_hpd, logdet_hpd, trace_product, CMat, CVec};
use crate::qp::QuadraticModel;

/// Receive-side contexts of one user, independent of its receive positions.
#[derive(Debug, Clone)]
pub struct FrozenReceiveContext {
    pub gamma_plus: CMat,
    pub gamma_minus: CMat,
    pub const_plus: f64,
    pub const_minus: f64,
    pub rx_dirs: Vec<PathDir>,
    pub wavelength: f64,
}

impl FrozenReceiveContext {
    pub fn from_rate(rate: &UserRate, rx_dirs: &[PathDir], wavelength: f64) -> Self {
        Self {
            gamma_plus: rate.plus.gamma.clone(),
            gamma_minus: rate.minus.gamma.clone(),
            const_plus: rate.plus.rx_constant,
            const_minus: rate.minus.rx_constant,
            rx_dirs: rx_dirs.to_vec(),
            wavelength,
        }
    }

    pub fn field(&self, r: &Apv) -> CMat {
        field_matrix(r, &self.rx_dirs, self.wavelength)
    }

    /// DE rate of the user at receive positions `r` (nats).
    pub fn rate(&self, r: &Apv) -> Result<f64> {
        let f = self.field(r);
        let m = f.ncols();
        let plus = logdet_hpd(&(identity(m) + f.adjoint() * &self.gamma_plus * &f))?;
        let minus = logdet_hpd(&(identity(m) + f.adjoint() * &self.gamma_minus * &f))?;
        Ok(plus + self.const_plus - minus - self.const_minus)
    }

    /// Gradient of [`Self::rate`] in stacked `[x; y]` coordinates.
    pub fn gradient(&self, r: &Apv) -> Result<Vec<f64>> {
        let ctx = build_receive_ctx(r, self)?;
        Ok((ctx.grad_plus() - &ctx.grad_minus).as_slice().to_vec())
    }
}

/// Expansion of the receive objective at one set of positions.
#[derive(Debug, Clone)]
pub struct ReceiveSurrogateCtx {
    pub center: Apv,
    pub value: f64,
    /// `(I + F^H G+ F)^{-1}`, `M x M`.
    pub e_plus: CMat,
    /// `(I + F^H G- F)^{-1}`, `M x M`.
    pub e_minus: CMat,
    /// `F^H G+ Dx F` and `F^H G+ Dy F`.
    pub d_x: CMat,
    pub d_y: CMat,
    /// Gradient of the subtracted term.
    pub grad_minus: DVector<f64>,
}

fn diag_re2(m: &CMat) -> Vec<f64> {
    (0..m.nrows()).map(|i| 2.0 * m[(i, i)].re).collect()
}

fn scaled_rows(m: &CMat, d: &CVec) -> CMat {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

pub fn build_receive_ctx(r: &Apv, frozen: &FrozenReceiveContext) -> Result<ReceiveSurrogateCtx> {
    let f = frozen.field(r);
    let m = f.ncols();
    let (dx, dy) = delta_matrices(&frozen.rx_dirs, frozen.wavelength);
    let (fdx, fdy) = (scaled_rows(&f, &dx), scaled_rows(&f, &dy));
    let j_plus = identity(m) + f.adjoint() * &frozen.gamma_plus * &f;
    let j_minus = identity(m) + f.adjoint() * &frozen.gamma_minus * &f;
    let e_plus = crate::linalg::hermitian_part(&inv_hpd(&j_plus)?);
    let e_minus = crate::linalg::hermitian_part(&inv_hpd(&j_minus)?);
    let value = logdet_hpd(&j_plus)? + frozen.const_plus - logdet_hpd(&j_minus)? - frozen.const_minus;
    let d_x = f.adjoint() * &frozen.gamma_plus * &fdx;
    let d_y = f.adjoint() * &frozen.gamma_plus * &fdy;
    let em = &e_minus * f.adjoint() * &frozen.gamma_minus;
    let mut grad_minus = diag_re2(&(&em * &fdx));
    grad_minus.extend(diag_re2(&(&em * &fdy)));
    Ok(ReceiveSurrogateCtx { center: r.clone(), value, e_plus, e_minus, d_x, d_y, grad_minus: DVector::from_vec(grad_minus) })
}

impl ReceiveSurrogateCtx {
    pub fn n(&self) -> usize {
        self.center.len()
    }

    /// Gradient of the first term, `2 Re diag(E+ D)` per axis.
    pub fn grad_plus(&self) -> DVector<f64> {
        let mut g = diag_re2(&(&self.e_plus * &self.d_x));
        g.extend(diag_re2(&(&self.e_plus * &self.d_y)));
        DVector::from_vec(g)
    }

    /// Linear coefficient of the surrogate.
    pub fn b(&self) -> DVector<f64> {
        self.grad_plus() - &self.grad_minus
    }

    /// Gram matrix `Q_ij = Re tr(E dJ_i E dJ_j)` assembled from entrywise
    /// products.
    pub fn curvature(&self) -> DMatrix<f64> {
        let n = self.n();
        let e = &self.e_plus;
        let blocks = [&self.d_x, &self.d_y];
        let ed: Vec<CMat> = blocks.iter().map(|d| e * *d).collect();
        let mut q = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..2 {
            for b in 0..2 {
                let cross = blocks[b].adjoint() * e * blocks[a];
                for i in 0..n {
                    for j in 0..n {
                        let v = ed[a][(j, i)] * ed[b][(i, j)] + e[(i, j)] * cross[(j, i)];
                        q[(a * n + i, b * n + j)] = 2.0 * v.re;
                    }
                }
            }
        }
        q
    }

    /// `A = 2 Q + 2 delta I`.
    pub fn a_matrix(&self, delta: f64) -> DMatrix<f64> {
        let n = 2 * self.n();
        let q = self.curvature();
        (&q + q.transpose()) + DMatrix::identity(n, n) * (2.0 * delta)
    }

    pub fn model(&self, delta: f64) -> QuadraticModel {
        QuadraticModel { center: DVector::from_vec(self.center.to_vec()), hessian: self.a_matrix(delta), gradient: self.b() }
    }
}

/// Linearization `dJ = sum_i d_i (D_i e_i e_i^T + e_i e_i^T D_i^H)`.
fn linear_increment(ctx: &ReceiveSurrogateCtx, d: &[f64]) -> CMat {
    let n = ctx.n();
    let mut dj = CMat::zeros(n, n);
    for (a, block) in [&ctx.d_x, &ctx.d_y].into_iter().enumerate() {
        for i in 0..n {
            let s = d[a * n + i];
            if s == 0.0 {
                continue;
            }
            let col = block.column(i) * crate::linalg::c(s);
            for row in 0..n {
                dj[(row, i)] += col[row];
                dj[(i, row)] += col[row].conj();
            }
        }
    }
    dj
}

/// Concave surrogate `tr(E+ dJ) - tr(E+ dJ E+ dJ) - grad-^T d - delta ||d||^2`
/// plus the value at the expansion point.
pub fn receive_surrogate_value(r: &Apv, ctx: &ReceiveSurrogateCtx, delta: f64) -> f64 {
    let d: Vec<f64> = r.to_vec().iter().zip(ctx.center.to_vec()).map(|(a, b)| a - b).collect();
    let dj = linear_increment(ctx, &d);
    let e = &ctx.e_plus;
    let lin = trace_product(e, &dj).re;
    let quad = trace_product(&(e * &dj), &(e * &dj)).re;
    let minus: f64 = ctx.grad_minus.iter().zip(&d).map(|(g, v)| g * v).sum();
    let reg: f64 = d.iter().map(|v| v * v).sum();
    ctx.value + lin - quad - minus - delta * reg
}

/// Unconstrained maximizer `r0 + A^{-1} b` of the surrogate.
pub fn receive_newton_candidate(ctx: &ReceiveSurrogateCtx, delta: f64) -> Result<DVector<f64>> {
    ctx.model(delta).unconstrained().map_err(|_| Error::Numerical("receive curvature is not positive definite".into()))
}

/// Successive convex approximation over one user's receive positions.
pub fn sca_receive(frozen: &FrozenReceiveContext, start: &Apv, s: &ScaSettings) -> Result<ScaOutcome<()>> {
    let mut r = start.clone();
    let mut ctx = build_receive_ctx(&r, frozen)?;
    let mut value = ctx.value;
    let mut steps = Vec::new();
    for _ in 0..s.max_iters {
        let model = ctx.model(s.delta);
        let free = receive_newton_candidate(&ctx, s.delta)?;
        let (target, kind) = constrained_target(&model, free, &r, s)?;
        match armijo(&r, value, &target, s, |a| frozen.rate(a).map(|v| (v, ())))? {
            Some((next, v, _, tau)) => {
                let increment = v - value;
                r = next;
                value = v;
                steps.push(ScaStep { kind, tau, value, increment });
                if increment <= s.eps1 {
                    break;
                }
                ctx = build_receive_ctx(&r, frozen)?;
            }
            None => {
                steps.push(ScaStep { kind: StepKind::Stalled, tau: 0.0, value, increment: 0.0 });
                break;
            }
        }
    }
    Ok(ScaOutcome { apv: r, solution: (), value, steps })
}

/// Per-user summary of a receive update.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReceiveReport {
    pub start_value: f64,
    pub value: f64,
    pub iterations: usize,
    pub stalled: bool,
}
