//! Deterministic equivalent (DE) of the ergodic per-user rate, its
//! transmit-side and receive-side views, and the quadratic minorizer built
//! from it.
//!
//! For user `k` the rate is the difference of two DE terms, one at the full
//! covariance `Q` and one at `Q` with the user's own stream removed. Each
//! term solves a four-matrix fixed point that depends only on the field
//! responses, the mean path response and the entry-wise path variance.

use serde::{Deserialize, Serialize};

use crate::channel::UserStats;
use crate::error::{Error, Result};
use crate::linalg::{
    c, clip_psd, from_real_diag, hermitian_part, identity, inv_general, inv_hpd, logdet_hpd, psd_sqrt, real_diag,
    rel_change, trace_product, CMat, RMat, RVec,
};
use crate::precoder::PrecoderSet;

/// Stopping rule of the fixed-point iteration. `tol = 0` runs exactly
/// `max_sweeps` sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeOptions {
    pub max_sweeps: usize,
    pub tol: f64,
}

impl DeOptions {
    pub fn new(max_sweeps: usize, tol: f64) -> Self {
        Self { max_sweeps, tol }
    }

    /// Tight setting used by gradient and tangency checks.
    pub fn precise() -> Self {
        Self { max_sweeps: 400, tol: 1e-14 }
    }
}

impl Default for DeOptions {
    fn default() -> Self {
        Self { max_sweeps: 200, tol: 1e-12 }
    }
}

/// Converged (or budget-limited) fixed point of one DE term.
#[derive(Debug, Clone)]
pub struct DeState {
    /// `M x M`, Hermitian, `>= I`.
    pub phi_tilde: CMat,
    /// `N x N`, Hermitian, `>= I`.
    pub phi: CMat,
    /// `M x M`, Hermitian negative definite.
    pub theta_tilde: CMat,
    /// `N x N`, Hermitian negative definite.
    pub theta: CMat,
    pub residual: f64,
    pub sweeps: usize,
    pub damped: bool,
    pub converged: bool,
}

/// Field responses of one user at fixed positions together with its S-CSI.
#[derive(Debug, Clone)]
pub struct Link {
    /// Transmit field response, `L_t x N`.
    pub g: CMat,
    /// Receive field response, `L_r x M`.
    pub f: CMat,
    /// Mean path response, `L_r x L_t`.
    pub los: CMat,
    /// Entry-wise variance of the random path response.
    pub var: RMat,
    /// Mean channel `F^H los G`.
    pub hbar: CMat,
    pub noise: f64,
}

impl Link {
    pub fn new(g: CMat, f: CMat, stats: &UserStats, noise: f64) -> Result<Self> {
        if stats.los.nrows() != f.nrows() || stats.los.ncols() != g.nrows() {
            return Err(Error::Dimension("path response does not match field responses".into()));
        }
        let hbar = f.adjoint() * &stats.los * &g;
        Ok(Self { g, f, los: stats.los.clone(), var: stats.variance(), hbar, noise })
    }

    pub fn n_tx(&self) -> usize {
        self.g.ncols()
    }

    pub fn n_rx(&self) -> usize {
        self.f.ncols()
    }
}

fn eta_tilde_from_gx(theta: &CMat, gx: &CMat, var: &RMat) -> RVec {
    let w = gx * theta * gx.adjoint();
    var * real_diag(&w)
}

fn eta_from_f(theta_tilde: &CMat, f: &CMat, var: &RMat) -> RVec {
    let w = f * theta_tilde * f.adjoint();
    var.transpose() * real_diag(&w)
}

/// Receive-side variance map: diagonal of `E[S X S^H]` where `S` is the
/// random path response and `X = G Q^{1/2} theta Q^{H/2} G^H`.
/// Returns the `L_r` diagonal entries.
pub fn eta_tilde(theta: &CMat, g: &CMat, q_half: &CMat, mask: &RMat) -> RVec {
    let var = mask.map(|m| m * m);
    eta_tilde_from_gx(theta, &(g * q_half), &var)
}

/// Transmit-side variance map: diagonal of `E[S^H F theta_tilde F^H S]`.
/// Returns the `L_t` diagonal entries.
pub fn eta(theta_tilde: &CMat, f: &CMat, mask: &RMat) -> RVec {
    let var = mask.map(|m| m * m);
    eta_from_f(theta_tilde, f, &var)
}

/// `(I - U^H diag(e) U)^{-1}` for `U` of size `L x N`, `e <= 0`.
///
/// Uses the push-through form when `L < N`; it never inverts `diag(e)`,
/// which is singular for the line-of-sight path.
fn inv_identity_minus(u: &CMat, e: &RVec) -> Result<CMat> {
    let (l, n) = u.shape();
    if l < n {
        let cu = from_real_diag(&e.map(|v| -v)) * u;
        let core = inv_general(&(identity(l) + &cu * u.adjoint()))?;
        Ok(hermitian_part(&(identity(n) - u.adjoint() * core * cu)))
    } else {
        inv_hpd(&(identity(n) - u.adjoint() * from_real_diag(e) * u))
    }
}

struct Sweep {
    phi_tilde: CMat,
    phi: CMat,
    theta_tilde: CMat,
    theta: CMat,
}

fn half_sweep(link: &Link, gx: &CMat, hx: &CMat, phi_tilde: CMat, phi: CMat, phi_inv: CMat) -> Result<Sweep> {
    let s2 = link.noise;
    let n = gx.ncols();
    let inner = &phi_tilde * c(s2) + hx * &phi_inv * hx.adjoint();
    let theta_tilde = -inv_hpd(&inner)?;
    let corr = hx.adjoint() * &theta_tilde * hx * &phi_inv;
    let theta = hermitian_part(&(&phi_inv * (identity(n) + corr) * c(-1.0 / s2)));
    Ok(Sweep { phi_tilde, phi, theta_tilde, theta })
}

/// Solves the DE fixed point for covariance `q` starting from `phi = I`.
pub fn de_fixed_point(link: &Link, q: &CMat, opts: DeOptions) -> Result<DeState> {
    let q_half = psd_sqrt(q);
    solve(link, &q_half, opts)
}

fn solve(link: &Link, q_half: &CMat, opts: DeOptions) -> Result<DeState> {
    let (m, n) = (link.n_rx(), link.n_tx());
    if q_half.nrows() != n {
        return Err(Error::Dimension(format!("covariance is {}x{}, expected {n}x{n}", q_half.nrows(), q_half.ncols())));
    }
    let gx = &link.g * q_half;
    let hx = &link.hbar * q_half;
    let (lr, lt) = (link.f.nrows(), link.g.nrows());

    // The four matrices depend on the previous sweep only through the two
    // diagonal variance maps, so the iteration runs on v = [eta_tilde; eta].
    let map = |v: &RVec| -> Result<(Sweep, RVec)> {
        let et = v.rows(0, lr).into_owned();
        let e = v.rows(lr, lt).into_owned();
        let phi_tilde = hermitian_part(&(identity(m) - link.f.adjoint() * from_real_diag(&et) * &link.f));
        let phi = hermitian_part(&(identity(n) - gx.adjoint() * from_real_diag(&e) * &gx));
        let phi_inv = inv_identity_minus(&gx, &e)?;
        let sweep = half_sweep(link, &gx, &hx, phi_tilde, phi, phi_inv)?;
        let mut out = RVec::zeros(lr + lt);
        out.rows_mut(0, lr).copy_from(&eta_tilde_from_gx(&sweep.theta, &gx, &link.var));
        out.rows_mut(lr, lt).copy_from(&eta_from_f(&sweep.theta_tilde, &link.f, &link.var));
        Ok((sweep, out))
    };

    // Anderson mixing restarts whenever the residual of v doubles; after
    // MAX_RESTARTS restarts the iteration falls back to averaged plain sweeps.
    let mut accel = Anderson::new(ANDERSON_DEPTH);
    let mut v = RVec::zeros(lr + lt);
    let (mut cur, mut image) = map(&v)?;
    let mut residual = f64::INFINITY;
    let mut best_vres = f64::INFINITY;
    let mut restarts = 0;
    let mut damped = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let vres = (&image - &v).norm() / image.norm().max(f64::MIN_POSITIVE);
        if vres > 2.0 * best_vres && !damped {
            accel.clear();
            restarts += 1;
            damped = restarts > MAX_RESTARTS;
        }
        best_vres = best_vres.min(vres);
        v = if damped { (&v + &image).scale(0.5) } else { accel.step(&v, &image) };
        v.apply(|x| *x = x.min(0.0));
        let (next, next_image) = map(&v)?;
        residual = [
            rel_change(&next.phi_tilde, &cur.phi_tilde),
            rel_change(&next.phi, &cur.phi),
            rel_change(&next.theta_tilde, &cur.theta_tilde),
            rel_change(&next.theta, &cur.theta),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(Error::Numerical("DE fixed point produced non-finite values".into()));
        }
        cur = next;
        image = next_image;
        if residual < opts.tol {
            break;
        }
    }
    Ok(DeState {
        phi_tilde: cur.phi_tilde,
        phi: cur.phi,
        theta_tilde: cur.theta_tilde,
        theta: cur.theta,
        residual,
        sweeps,
        damped,
        converged: residual < opts.tol.max(f64::MIN_POSITIVE),
    })
}

const ANDERSON_DEPTH: usize = 4;
const MAX_RESTARTS: usize = 8;

/// Anderson mixing for `v = T(v)` on a short real vector.
struct Anderson {
    depth: usize,
    last: Option<(RVec, RVec)>,
    dx: Vec<RVec>,
    df: Vec<RVec>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self { depth, last: None, dx: Vec::new(), df: Vec::new() }
    }

    fn clear(&mut self) {
        self.last = None;
        self.dx.clear();
        self.df.clear();
    }

    /// Next iterate given `v` and its image `t = T(v)`.
    fn step(&mut self, v: &RVec, t: &RVec) -> RVec {
        let f = t - v;
        if let Some((lv, lf)) = self.last.take() {
            self.dx.push(v - lv);
            self.df.push(&f - lf);
            if self.dx.len() > self.depth {
                self.dx.remove(0);
                self.df.remove(0);
            }
        }
        self.last = Some((v.clone(), f.clone()));
        if self.df.is_empty() {
            return t.clone();
        }
        let k = self.df.len();
        let big_f = RMat::from_columns(&self.df);
        let svd = big_f.clone().svd(true, true);
        let tol = 1e-12 * svd.singular_values.max();
        let gamma = match svd.solve(&f, tol) {
            Ok(g) => g,
            Err(_) => return t.clone(),
        };
        let mut out = t.clone();
        for i in 0..k {
            out -= (&self.dx[i] + &self.df[i]) * gamma[i];
        }
        if out.iter().all(|x| x.is_finite()) {
            out
        } else {
            self.clear();
            t.clone()
        }
    }
}

/// One DE term evaluated at a covariance, with the context matrices of both
/// views.
#[derive(Debug, Clone)]
pub struct RateTerm {
    pub state: DeState,
    pub q_half: CMat,
    /// Transmit-side context, `L_t x L_t`, PSD.
    pub gamma_tilde: CMat,
    /// Receive-side context, `L_r x L_r`, PSD.
    pub gamma: CMat,
    /// `(I + gamma_tilde G Q G^H)^{-1} gamma_tilde`, Hermitian.
    pub sensitivity: CMat,
    /// Transmit-view value (nats).
    pub value: f64,
    /// `log det phi - sigma^2 tr((I - phi) theta)`, the receive-view constant.
    pub rx_constant: f64,
}

impl RateTerm {
    pub fn evaluate(link: &Link, q: &CMat, opts: DeOptions) -> Result<Self> {
        let q_half = psd_sqrt(q);
        let state = solve(link, &q_half, opts)?;
        let s2 = link.noise;
        let (m, n) = (link.n_rx(), link.n_tx());
        let gx = &link.g * &q_half;

        let phi_tilde_inv = inv_hpd(&state.phi_tilde)?;
        let e = eta_from_f(&state.theta_tilde, &link.f, &link.var);
        let fs = link.f.adjoint() * &link.los;
        let gamma_tilde =
            hermitian_part(&(fs.adjoint() * &phi_tilde_inv * &fs * c(1.0 / s2) - from_real_diag(&e)));

        let phi_inv = inv_hpd(&state.phi)?;
        let et = eta_tilde_from_gx(&state.theta, &gx, &link.var);
        let sg = &link.los * &gx;
        let gamma = hermitian_part(&(&sg * &phi_inv * sg.adjoint() * c(1.0 / s2) - from_real_diag(&et)));

        let inner = identity(n) + gx.adjoint() * &gamma_tilde * &gx;
        let inner_inv = inv_hpd(&inner)?;
        let tg = &gamma_tilde * &gx;
        let sensitivity = hermitian_part(&(&gamma_tilde - &tg * inner_inv * tg.adjoint()));

        let tr_tilde = trace_product(&(identity(m) - &state.phi_tilde), &state.theta_tilde).re;
        let value = logdet_hpd(&inner)? + logdet_hpd(&state.phi_tilde)? - s2 * tr_tilde;
        let tr = trace_product(&(identity(n) - &state.phi), &state.theta).re;
        let rx_constant = logdet_hpd(&state.phi)? - s2 * tr;
        Ok(Self { state, q_half, gamma_tilde, gamma, sensitivity, value, rx_constant })
    }

    /// Receive-view value of this term for receive response `f`.
    pub fn receive_value(&self, f: &CMat) -> Result<f64> {
        let m = f.ncols();
        Ok(logdet_hpd(&(identity(m) + f.adjoint() * &self.gamma * f))? + self.rx_constant)
    }
}

/// Which part of the per-user rate to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatePart {
    Positive,
    Negative,
    Net,
}

/// Both DE terms of one user.
#[derive(Debug, Clone)]
pub struct UserRate {
    pub plus: RateTerm,
    pub minus: RateTerm,
}

impl UserRate {
    pub fn evaluate(link: &Link, precoder: &PrecoderSet, k: usize, opts: DeOptions) -> Result<Self> {
        let plus = RateTerm::evaluate(link, &precoder.covariance(), opts)?;
        let minus = RateTerm::evaluate(link, &precoder.covariance_without(k), opts)?;
        Ok(Self { plus, minus })
    }

    pub fn part(&self, which: RatePart) -> f64 {
        match which {
            RatePart::Positive => self.plus.value,
            RatePart::Negative => self.minus.value,
            RatePart::Net => self.plus.value - self.minus.value,
        }
    }

    pub fn net(&self) -> f64 {
        self.part(RatePart::Net)
    }

    pub fn residual(&self) -> f64 {
        self.plus.state.residual.max(self.minus.state.residual)
    }
}

/// Transmit-view DE rate of user `k`.
pub fn de_rate_transmit(link: &Link, precoder: &PrecoderSet, k: usize, which: RatePart, opts: DeOptions) -> Result<f64> {
    Ok(UserRate::evaluate(link, precoder, k, opts)?.part(which))
}

/// Receive-view DE rate with the context of `rate` held fixed at receive
/// response `f`.
pub fn de_rate_receive(rate: &UserRate, f: &CMat) -> Result<f64> {
    Ok(rate.plus.receive_value(f)? - rate.minus.receive_value(f)?)
}

/// Coefficients of the concave quadratic lower model
/// `2 Re tr(A^H G P_k) - tr(B G P P^H G^H) + c` of one user's rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinorizerParams {
    #[serde(skip)]
    pub a: CMat,
    #[serde(skip)]
    pub b: CMat,
    pub c: f64,
    /// Frobenius mass removed when projecting `b` onto the PSD cone.
    pub clipped: f64,
}

pub fn minorizer_params(link: &Link, precoder: &PrecoderSet, k: usize, rate: &UserRate) -> MinorizerParams {
    let raw = hermitian_part(&(&rate.minus.sensitivity - &rate.plus.sensitivity));
    let b = clip_psd(&raw);
    let clipped = crate::linalg::frobenius_sq(&(&raw - &b)).sqrt();
    let y = &link.g * &precoder.blocks[k];
    let a = &rate.minus.sensitivity * &y;
    let gq = &link.g * precoder.covariance() * link.g.adjoint();
    let c = rate.net() + trace_product(&b, &gq).re - 2.0 * trace_product(&a.adjoint(), &y).re;
    MinorizerParams { a, b, c, clipped }
}

/// Value of the quadratic lower model at transmit response `g` and precoder.
pub fn minorizer_value(g: &CMat, precoder: &PrecoderSet, k: usize, params: &MinorizerParams) -> f64 {
    let y = g * &precoder.blocks[k];
    let gq = g * precoder.covariance() * g.adjoint();
    2.0 * trace_product(&params.a.adjoint(), &y).re - trace_product(&params.b, &gq).re + params.c
}
