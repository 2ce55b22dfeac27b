//! Scenario and algorithm parameters, all in SI units (watts, metres, linear gains).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Array and region geometry shared by the transmitter and every receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub wavelength: f64,
    pub min_spacing: f64,
    pub tx_region: f64,
    pub rx_region: f64,
}

/// Power-consumption model `omega * tr(P P^H) + n_tx * p_c + p_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub omega: f64,
    pub p_max: f64,
    pub p_c: f64,
    pub p_s: f64,
    pub n_tx: usize,
}

impl PowerModel {
    pub fn static_power(&self) -> f64 {
        self.n_tx as f64 * self.p_c + self.p_s
    }

    pub fn total(&self, tx_power: f64) -> f64 {
        self.omega * tx_power + self.static_power()
    }
}

/// Iteration budgets and step-control constants of the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmKnobs {
    pub ao_iters: usize,
    pub de_sweeps: usize,
    pub de_tol: f64,
    pub sca_tx_iters: usize,
    pub sca_rx_iters: usize,
    pub delta_t: f64,
    pub delta_r: f64,
    pub tau0: f64,
    pub kappa: f64,
    pub xi: f64,
    pub eps1: f64,
    /// Consecutive sub-`eps1` AO increments that end the outer loop.
    pub patience: usize,
}

impl Default for AlgorithmKnobs {
    fn default() -> Self {
        Self {
            ao_iters: 50,
            de_sweeps: 200,
            de_tol: 1e-12,
            sca_tx_iters: 20,
            sca_rx_iters: 20,
            delta_t: 0.02,
            delta_r: 0.02,
            tau0: 1.0,
            kappa: 0.2,
            xi: 0.02,
            eps1: 1e-3,
            patience: 3,
        }
    }
}

/// Complete description of one downlink instance before any randomness is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_users: usize,
    pub streams: usize,
    pub geometry: Geometry,
    pub power: PowerModel,
    pub noise_power: f64,
    pub paths_tx: usize,
    pub paths_rx: usize,
    pub rician_factor: f64,
    pub ref_gain: f64,
    pub pathloss_exp: f64,
    pub dist_min: f64,
    pub dist_max: f64,
    pub knobs: AlgorithmKnobs,
}

impl ScenarioConfig {
    /// Defaults of the reference operating point.
    pub fn reference() -> Self {
        let wavelength = 0.1;
        Self {
            n_tx: 16,
            n_rx: 4,
            n_users: 4,
            streams: 4,
            geometry: Geometry {
                wavelength,
                min_spacing: 0.5 * wavelength,
                tx_region: 3.2 * wavelength,
                rx_region: 2.0 * wavelength,
            },
            power: PowerModel { omega: 5.0, p_max: dbm_to_watt(30.0), p_c: dbm_to_watt(30.0), p_s: dbm_to_watt(40.0), n_tx: 16 },
            noise_power: dbm_to_watt(-80.0),
            paths_tx: 5,
            paths_rx: 5,
            rician_factor: 1.0,
            ref_gain: db_to_linear(-40.0),
            pathloss_exp: 2.8,
            dist_min: 20.0,
            dist_max: 100.0,
            knobs: AlgorithmKnobs::default(),
        }
    }

    /// Reduced instance used where the reference size is too slow.
    pub fn desk_scale() -> Self {
        let mut c = Self::reference();
        c.n_tx = 8;
        c.n_rx = 2;
        c.n_users = 2;
        c.streams = 2;
        c.power.n_tx = 8;
        c
    }

    pub fn with_n_tx(mut self, n: usize) -> Self {
        self.n_tx = n;
        self.power.n_tx = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        let positive = [
            ("wavelength", g.wavelength),
            ("min_spacing", g.min_spacing),
            ("tx_region", g.tx_region),
            ("rx_region", g.rx_region),
            ("omega", self.power.omega),
            ("p_max", self.power.p_max),
            ("noise_power", self.noise_power),
            ("ref_gain", self.ref_gain),
            ("pathloss_exp", self.pathloss_exp),
            ("dist_min", self.dist_min),
            ("delta_t", self.knobs.delta_t),
            ("delta_r", self.knobs.delta_r),
            ("eps1", self.knobs.eps1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("p_c", self.power.p_c), ("p_s", self.power.p_s), ("rician_factor", self.rician_factor)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be non-negative, got {v}")));
            }
        }
        for (name, v) in [("n_tx", self.n_tx), ("n_rx", self.n_rx), ("n_users", self.n_users), ("streams", self.streams), ("paths_tx", self.paths_tx), ("paths_rx", self.paths_rx)] {
            if v == 0 {
                return Err(Error::config(name, "must be at least 1"));
            }
        }
        if self.power.n_tx != self.n_tx {
            return Err(Error::config("n_tx", "power model antenna count disagrees"));
        }
        if self.streams > self.n_rx {
            return Err(Error::config("streams", "cannot exceed receive antennas"));
        }
        if self.dist_max < self.dist_min {
            return Err(Error::config("dist_max", "must be at least dist_min"));
        }
        if g.min_spacing < 0.5 * g.wavelength * (1.0 - 1e-12) {
            return Err(Error::config("min_spacing", "must be at least half a wavelength"));
        }
        for (name, n, side) in [("tx_region", self.n_tx, g.tx_region), ("rx_region", self.n_rx, g.rx_region)] {
            let per_side = (side / g.min_spacing + 1e-9).floor() as usize + 1;
            if per_side * per_side < n {
                return Err(Error::config(name, format!("cannot host {n} antennas at the minimum spacing")));
            }
        }
        let k = &self.knobs;
        if !(k.kappa > 0.0 && k.kappa < 1.0) {
            return Err(Error::config("kappa", "must lie in (0, 1)"));
        }
        if !(k.xi > 0.0 && k.xi < 1.0) {
            return Err(Error::config("xi", "must lie in (0, 1)"));
        }
        if !(k.tau0 > 0.0 && k.tau0 <= 1.0) {
            return Err(Error::config("tau0", "must lie in (0, 1]"));
        }
        if k.de_sweeps == 0 || k.ao_iters == 0 {
            return Err(Error::config("de_sweeps", "iteration budgets must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watt(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watt(-80.0) - 1e-11).abs() < 1e-25);
        assert!((db_to_linear(-40.0) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn defaults_are_valid() {
        ScenarioConfig::reference().validate().unwrap();
        ScenarioConfig::desk_scale().validate().unwrap();
    }

    #[test]
    fn rejects_crowded_region() {
        let mut c = ScenarioConfig::reference();
        c.geometry.tx_region = c.geometry.wavelength;
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("tx_region"));
    }

    #[test]
    fn rejects_sub_half_wavelength_spacing() {
        let mut c = ScenarioConfig::reference();
        c.geometry.min_spacing = 0.4 * c.geometry.wavelength;
        assert!(c.validate().is_err());
    }
}
