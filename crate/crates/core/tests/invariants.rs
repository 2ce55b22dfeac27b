use maee_core::ao::{self, Layout, Scheme};
use maee_core::apv_tx::{sca_transmit, MinorizerEe, ScaSettings, TransmitObjective};
use maee_core::channel::{sample_scenario, Apv};
use maee_core::config::ScenarioConfig;
use maee_core::de::{de_rate_receive, minorizer_params, minorizer_value, DeOptions, RatePart, UserRate};
use maee_core::experiment::{read_csv, write_csv, ResultRow};
use maee_core::precoder::{optimal_precoder, PrecoderProblem, PrecoderSet};
use proptest::prelude::*;

fn small() -> ScenarioConfig {
    let mut c = ScenarioConfig::desk_scale();
    c.n_tx = 4;
    c.power.n_tx = 4;
    c.streams = 1;
    c
}

/// Grid layout shifted by a feasible common offset.
fn shifted_layout(config: &ScenarioConfig, dx: f64, dy: f64) -> Layout {
    let mut layout = Layout::grid(config, config.geometry.min_spacing).unwrap();
    let shift = |a: &mut Apv, side: f64| {
        let room_x = side - a.x.iter().cloned().fold(f64::MIN, f64::max);
        let room_y = side - a.y.iter().cloned().fold(f64::MIN, f64::max);
        let lo_x = a.x.iter().cloned().fold(f64::MAX, f64::min);
        let lo_y = a.y.iter().cloned().fold(f64::MAX, f64::min);
        let (sx, sy) = (-lo_x + dx * (lo_x + room_x), -lo_y + dy * (lo_y + room_y));
        a.x.iter_mut().for_each(|v| *v += sx);
        a.y.iter_mut().for_each(|v| *v += sy);
    };
    let g = config.geometry;
    shift(&mut layout.t, g.tx_region);
    for r in &mut layout.r {
        shift(r, g.rx_region);
    }
    layout
}

fn precoder(config: &ScenarioConfig, seed: u64, fraction: f64) -> PrecoderSet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let blocks = (0..config.n_users)
        .map(|_| maee_core::linalg::CMat::from_fn(config.n_tx, config.streams, |_, _| maee_core::linalg::C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
        .collect();
    let p = PrecoderSet::new(blocks).unwrap();
    let s = (fraction * config.power.p_max / p.power()).sqrt();
    p.scaled(s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transmit_and_receive_views_agree(seed in 1u64..500, dx in 0.0..1.0f64, dy in 0.0..1.0f64, frac in 0.05..1.0f64) {
        let config = small();
        let stats = sample_scenario(&config, seed).unwrap();
        let layout = shifted_layout(&config, dx, dy);
        let p = precoder(&config, seed, frac);
        for k in 0..config.n_users {
            let link = ao::link(&config, &stats, &layout.t, &layout.r[k], k).unwrap();
            let rate = UserRate::evaluate(&link, &p, k, DeOptions::precise()).unwrap();
            let rx = de_rate_receive(&rate, &link.f).unwrap();
            prop_assert!((rx - rate.part(RatePart::Net)).abs() <= 1e-8 * rate.net().abs().max(1e-12));
        }
    }

    #[test]
    fn minorizer_is_tight_and_below_the_rate(seed in 1u64..500, frac in 0.05..1.0f64, shrink in 0.8..1.2f64) {
        let config = small();
        let stats = sample_scenario(&config, seed).unwrap();
        let layout = shifted_layout(&config, 0.5, 0.5);
        let p = precoder(&config, seed, frac);
        let moved = p.scaled(shrink);
        for k in 0..config.n_users {
            let link = ao::link(&config, &stats, &layout.t, &layout.r[k], k).unwrap();
            let rate = UserRate::evaluate(&link, &p, k, DeOptions::precise()).unwrap();
            let par = minorizer_params(&link, &p, k, &rate);
            let at = minorizer_value(&link.g, &p, k, &par);
            prop_assert!((at - rate.net()).abs() <= 1e-8 * rate.net().abs().max(1e-12));
            let other = UserRate::evaluate(&link, &moved, k, DeOptions::precise()).unwrap().net();
            prop_assert!(minorizer_value(&link.g, &moved, k, &par) <= other + 1e-6);
        }
    }

    #[test]
    fn optimal_precoder_beats_random_feasible_ones(seed in 1u64..500, frac in 0.05..1.0f64, trial in 0u64..1000) {
        let config = small();
        let stats = sample_scenario(&config, seed).unwrap();
        let layout = shifted_layout(&config, 0.3, 0.7);
        let p = precoder(&config, seed, frac);
        let links = ao::links(&config, &stats, &layout).unwrap();
        let rates = ao::user_rates(&links, &p, DeOptions::precise()).unwrap();
        let params: Vec<_> = links.iter().enumerate().map(|(k, l)| minorizer_params(l, &p, k, &rates[k])).collect();
        let gs: Vec<_> = links.iter().map(|l| &l.g).collect();
        let problem = PrecoderProblem::new(&gs, &params, config.power).unwrap();
        let sol = optimal_precoder(&problem, &vec![config.streams; config.n_users]).unwrap();
        prop_assert!(sol.precoder.power() <= config.power.p_max * (1.0 + 1e-9));
        let rival = precoder(&config, trial + 10_000, frac);
        prop_assert!(problem.ee(&sol.precoder) >= problem.ee(&rival) - 1e-12);
        prop_assert!(problem.ee(&sol.precoder) >= problem.ee(&p) - 1e-12);
    }

    #[test]
    fn transmit_sca_stays_feasible_and_monotone(seed in 1u64..200, dx in 0.0..1.0f64, dy in 0.0..1.0f64) {
        let config = small();
        let stats = sample_scenario(&config, seed).unwrap();
        let layout = shifted_layout(&config, dx, dy);
        let p = precoder(&config, seed, 0.5);
        let links = ao::links(&config, &stats, &layout).unwrap();
        let rates = ao::user_rates(&links, &p, DeOptions::precise()).unwrap();
        let obj = MinorizerEe {
            tx_dirs: stats.users.iter().map(|u| u.tx_dirs.clone()).collect(),
            params: links.iter().enumerate().map(|(k, l)| minorizer_params(l, &p, k, &rates[k])).collect(),
            power: config.power,
            wavelength: config.geometry.wavelength,
            streams: vec![config.streams; config.n_users],
        };
        let g = config.geometry;
        let start = obj.evaluate(&layout.t).unwrap().0;
        let out = sca_transmit(&obj, &layout.t, &ScaSettings::transmit(&config.knobs, g.tx_region, g.min_spacing)).unwrap();
        prop_assert!(out.value >= start - 1e-12 * start.abs());
        prop_assert!(out.apv.is_feasible(g.tx_region, g.min_spacing, 1e-12));
    }

    #[test]
    fn csv_rows_round_trip(ee in proptest::num::f64::NORMAL, rate in 0.0..1e3f64, seed in 0u64..u64::MAX, iters in 0usize..1000, axis in proptest::option::of(-50.0..50.0f64), scheme in 0usize..7) {
        let row = ResultRow {
            axis,
            scheme: Scheme::ALL[scheme],
            seed,
            ee_de: ee,
            ee_mc: ee / 3.0,
            sum_rate: rate,
            tx_power: rate * 1e-3,
            iters,
            wall_time: 0.0,
            status: "ok".into(),
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(&back[0], &row);
    }
}
