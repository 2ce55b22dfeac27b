//! Monte-Carlo reference for the ergodic rate and central finite-difference
//! gradients. Both are independent of the deterministic-equivalent code
//! paths and serve as oracles for it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_matrix, UserStats};
use crate::error::Result;
use crate::linalg::{c, identity, logdet_hpd, CMat, C64};
use crate::precoder::PrecoderSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { mean, std_error: (var / n as f64).sqrt(), samples: n }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sample `index` in `stream`; independent of scheduling.
pub fn sample_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ stream) ^ index)
}

/// `log det(I + H Q_plus H^H / s2) - log det(I + H Q_minus H^H / s2)` for one draw.
pub fn realized_rate(h: &CMat, q_plus: &CMat, q_minus: &CMat, noise: f64) -> Result<f64> {
    let m = h.nrows();
    let inv = c(1.0 / noise);
    let a = logdet_hpd(&(identity(m) + h * q_plus * h.adjoint() * inv))?;
    let b = logdet_hpd(&(identity(m) + h * q_minus * h.adjoint() * inv))?;
    Ok(a - b)
}

/// Sample-mean ergodic rate of user `k` with field responses `g`, `f`.
pub fn mc_user_rate(
    g: &CMat,
    f: &CMat,
    stats: &UserStats,
    noise: f64,
    precoder: &PrecoderSet,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let q = precoder.covariance();
    let qk = precoder.covariance_without(k);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, k as u64, i as u64));
            let sigma = stats.draw_path_response(&mut rng);
            let h = channel_matrix(g, f, &sigma)?;
            realized_rate(&h, &q, &qk, noise)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_samples(&values))
}

/// Central finite-difference gradient of a real function of real variables.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central finite-difference conjugate gradient of a real function of
/// complex matrices, scaled so that `df = 2 Re tr(G^H dX)`.
pub fn fd_gradient_complex<F: Fn(&[CMat]) -> f64>(f: F, x: &[CMat], h: f64) -> Vec<CMat> {
    let mut xp = x.to_vec();
    let mut out: Vec<CMat> = x.iter().map(|m| CMat::zeros(m.nrows(), m.ncols())).collect();
    for b in 0..x.len() {
        for idx in 0..x[b].len() {
            let base = x[b][idx];
            let mut parts = [0.0; 2];
            for (p, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
                xp[b][idx] = base + dir * h;
                let up = f(&xp);
                xp[b][idx] = base - dir * h;
                let down = f(&xp);
                parts[p] = (up - down) / (2.0 * h);
            }
            xp[b][idx] = base;
            out[b][idx] = C64::new(0.5 * parts[0], 0.5 * parts[1]);
        }
    }
    out
}

/// `||a - b|| / ||b||` over stacked vectors.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{centered_grid, field_matrix, sample_scenario};
    use crate::config::ScenarioConfig;

    #[test]
    fn fd_recovers_quadratic_gradient() {
        let f = |x: &[f64]| 3.0 * x[0] * x[0] - x[0] * x[1] + 0.5 * x[1].powi(3);
        let g = fd_gradient(f, &[1.0, 2.0], 1e-5);
        assert!((g[0] - 4.0).abs() < 1e-8);
        assert!((g[1] - 5.0).abs() < 1e-8);
    }

    #[test]
    fn fd_complex_uses_conjugate_convention() {
        let a = CMat::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64 - 0.5));
        let f = |x: &[CMat]| 2.0 * crate::linalg::trace_product(&a.adjoint(), &x[0]).re;
        let x = CMat::from_element(2, 2, C64::new(0.3, -0.1));
        let g = fd_gradient_complex(f, &[x], 1e-6);
        assert!(crate::linalg::max_abs_diff(&g[0], &a) < 1e-8);
    }

    #[test]
    fn estimates_are_reproducible() {
        let cfg = ScenarioConfig::desk_scale();
        let st = sample_scenario(&cfg, 1).unwrap();
        let geo = &cfg.geometry;
        let t = centered_grid(cfg.n_tx, geo.min_spacing, geo.tx_region).unwrap();
        let r = centered_grid(cfg.n_rx, geo.min_spacing, geo.rx_region).unwrap();
        let u = &st.users[0];
        let g = field_matrix(&t, &u.tx_dirs, geo.wavelength);
        let f = field_matrix(&r, &u.rx_dirs, geo.wavelength);
        let p = PrecoderSet::isotropic(cfg.n_tx, cfg.n_users, cfg.streams, 1.0);
        let a = mc_user_rate(&g, &f, u, st.noise_power, &p, 0, 500, 9).unwrap();
        let b = mc_user_rate(&g, &f, u, st.noise_power, &p, 0, 500, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.mean > 0.0 && a.std_error > 0.0);
    }

    #[test]
    fn standard_error_shrinks() {
        let few = McEstimate::from_samples(&(0..100).map(|i| (i % 7) as f64).collect::<Vec<_>>());
        let many = McEstimate::from_samples(&(0..10_000).map(|i| (i % 7) as f64).collect::<Vec<_>>());
        assert!(many.std_error < few.std_error / 5.0);
    }
}
