//! Field-response channel model: antenna-position vectors, path directions,
//! field-response matrices and the random path-response matrix.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, RMat, C64};

/// Direction of one propagation path seen from an array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathDir {
    pub elevation: f64,
    pub azimuth: f64,
}

impl PathDir {
    /// Direction cosine along the x axis.
    pub fn cos_x(&self) -> f64 {
        self.elevation.sin() * self.azimuth.cos()
    }

    /// Direction cosine along the y axis.
    pub fn cos_y(&self) -> f64 {
        self.elevation.cos()
    }
}

/// Planar antenna positions in the local frame `[0, side]^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Apv {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Apv {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!("apv x has {} entries, y has {}", x.len(), y.len())));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Stacked coordinates `[x; y]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let n = v.len() / 2;
        Self { x: v[..n].to_vec(), y: v[n..].to_vec() }
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min((self.x[i] - self.x[j]).hypot(self.y[i] - self.y[j]));
            }
        }
        best
    }

    /// Box and spacing check with absolute slack `tol` in metres.
    pub fn is_feasible(&self, side: f64, spacing: f64, tol: f64) -> bool {
        let in_box = self.x.iter().chain(self.y.iter()).all(|&v| v >= -tol && v <= side + tol);
        in_box && (self.len() < 2 || self.min_distance() >= spacing - tol)
    }

    pub fn distance_sq(&self, other: &Apv) -> f64 {
        self.to_vec().iter().zip(other.to_vec()).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Square grid of `n` antennas with pitch `spacing`, centred in `[0, side]^2`,
/// filled row by row.
pub fn centered_grid(n: usize, spacing: f64, side: f64) -> Result<Apv> {
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols.max(1));
    let span = (cols.max(rows) - 1) as f64 * spacing;
    if span > side * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("{n} antennas at pitch {spacing} do not fit a side of {side}")));
    }
    let ox = 0.5 * (side - (cols - 1) as f64 * spacing);
    let oy = 0.5 * (side - (rows - 1) as f64 * spacing);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        x.push(ox + (i % cols) as f64 * spacing);
        y.push(oy + (i / cols) as f64 * spacing);
    }
    Ok(Apv { x, y })
}

/// Field-response vector of one antenna at `(x, y)` over the given paths.
pub fn field_response(x: f64, y: f64, dirs: &[PathDir], wavelength: f64) -> CVec {
    let k = 2.0 * PI / wavelength;
    CVec::from_iterator(dirs.len(), dirs.iter().map(|d| C64::from_polar(1.0, k * (x * d.cos_x() + y * d.cos_y()))))
}

/// Field-response matrix with one column per antenna (`paths x antennas`).
pub fn field_matrix(apv: &Apv, dirs: &[PathDir], wavelength: f64) -> CMat {
    let k = 2.0 * PI / wavelength;
    CMat::from_fn(dirs.len(), apv.len(), |l, n| {
        C64::from_polar(1.0, k * (apv.x[n] * dirs[l].cos_x() + apv.y[n] * dirs[l].cos_y()))
    })
}

/// `F^H Sigma G`: receive-by-transmit channel for one path-response draw.
pub fn channel_matrix(g: &CMat, f: &CMat, sigma: &CMat) -> Result<CMat> {
    if sigma.nrows() != f.nrows() || sigma.ncols() != g.nrows() {
        return Err(Error::Dimension(format!(
            "path response is {}x{}, expected {}x{}",
            sigma.nrows(),
            sigma.ncols(),
            f.nrows(),
            g.nrows()
        )));
    }
    Ok(f.adjoint() * sigma * g)
}

/// Statistical CSI of one user: path directions, mean path response and
/// the per-entry standard deviation of the random part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserStats {
    pub tx_dirs: Vec<PathDir>,
    pub rx_dirs: Vec<PathDir>,
    #[serde(with = "cmat_serde")]
    pub los: CMat,
    #[serde(with = "rmat_serde")]
    pub mask: RMat,
    pub distance: f64,
    pub gain: f64,
}

impl UserStats {
    pub fn paths_tx(&self) -> usize {
        self.tx_dirs.len()
    }

    pub fn paths_rx(&self) -> usize {
        self.rx_dirs.len()
    }

    /// Entry-wise variance of the random part, `mask .* mask`.
    pub fn variance(&self) -> RMat {
        self.mask.map(|m| m * m)
    }

    /// Copy with the random part removed.
    pub fn line_of_sight_only(&self) -> Self {
        let mut out = self.clone();
        out.mask.fill(0.0);
        out
    }

    /// `los + mask .* W` with `W` i.i.d. circularly-symmetric unit-variance Gaussian.
    pub fn draw_path_response<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = self.los.clone();
        for (o, &m) in out.iter_mut().zip(self.mask.iter()) {
            if m != 0.0 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *o += C64::new(re * s * m, im * s * m);
            }
        }
        out
    }
}

/// Statistical CSI of all users plus the receiver noise power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStatistics {
    pub users: Vec<UserStats>,
    pub noise_power: f64,
}

impl ChannelStatistics {
    pub fn line_of_sight_only(&self) -> Self {
        Self { users: self.users.iter().map(UserStats::line_of_sight_only).collect(), noise_power: self.noise_power }
    }
}

fn draw_dirs<R: Rng>(rng: &mut R, count: usize) -> Vec<PathDir> {
    (0..count)
        .map(|_| {
            let elevation = PI * rng.gen::<f64>();
            let azimuth = (1.0 - 2.0 * rng.gen::<f64>()).acos();
            PathDir { elevation, azimuth }
        })
        .collect()
}

/// Draws user distances, path directions and the mean/variance profile.
///
/// The first path is the line-of-sight path with power share
/// `K/(K+1)`; the remaining `L-1` paths share `1/(K+1)` equally. Users are
/// drawn in order, so a smaller user count yields a prefix of a larger one.
pub fn sample_scenario(config: &ScenarioConfig, seed: u64) -> Result<ChannelStatistics> {
    config.validate()?;
    if config.paths_tx != config.paths_rx {
        return Err(Error::config("paths_rx", "the diagonal path-response model needs equal path counts"));
    }
    let l = config.paths_tx;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kr = config.rician_factor;
    let mut users = Vec::with_capacity(config.n_users);
    for _ in 0..config.n_users {
        let distance = config.dist_min + (config.dist_max - config.dist_min) * rng.gen::<f64>();
        let gain = config.ref_gain * distance.powf(-config.pathloss_exp);
        let tx_dirs = draw_dirs(&mut rng, l);
        let rx_dirs = draw_dirs(&mut rng, l);
        let mut los = CMat::zeros(l, l);
        los[(0, 0)] = c((gain * kr / (kr + 1.0)).sqrt());
        let mut mask = RMat::zeros(l, l);
        if l > 1 {
            let std = (gain / ((l - 1) as f64 * (kr + 1.0))).sqrt();
            for i in 1..l {
                mask[(i, i)] = std;
            }
        }
        users.push(UserStats { tx_dirs, rx_dirs, los, mask, distance, gain });
    }
    Ok(ChannelStatistics { users, noise_power: config.noise_power })
}

mod cmat_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::{CMat, C64};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        re: Vec<f64>,
        im: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        Repr { rows: m.nrows(), cols: m.ncols(), re: m.iter().map(|z| z.re).collect(), im: m.iter().map(|z| z.im).collect() }
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let r = Repr::deserialize(d)?;
        if r.re.len() != r.rows * r.cols || r.im.len() != r.re.len() {
            return Err(serde::de::Error::custom("matrix payload length mismatch"));
        }
        Ok(CMat::from_iterator(r.rows, r.cols, r.re.iter().zip(&r.im).map(|(&a, &b)| C64::new(a, b))))
    }
}

mod rmat_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::RMat;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(m: &RMat, s: S) -> Result<S::Ok, S::Error> {
        Repr { rows: m.nrows(), cols: m.ncols(), data: m.iter().copied().collect() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RMat, D::Error> {
        let r = Repr::deserialize(d)?;
        if r.data.len() != r.rows * r.cols {
            return Err(serde::de::Error::custom("matrix payload length mismatch"));
        }
        Ok(RMat::from_vec(r.rows, r.cols, r.data))
    }
}
