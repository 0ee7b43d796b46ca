use proptest::prelude::*;
use surfvortex::config::{Crossing, Experiment, IntegratorConfig, SurfaceConfig, VortexConfig};
use surfvortex::ScenarioConfig;

fn metric() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("round".to_string()),
        (0.5..2.0f64).prop_map(|c| format!("scaled:{c}")),
        (0.5..2.0f64, 0.5..2.0f64).prop_map(|(a, c)| format!("spheroid:{a},{c}")),
    ]
}

fn vortex() -> impl Strategy<Value = VortexConfig> {
    (-90.0..=90.0f64, -180.0..180.0f64, -5.0..5.0f64).prop_map(|(lat, lon, strength)| VortexConfig {
        lat,
        lon,
        strength,
        mass: None,
        velocity: None,
    })
}

fn experiment() -> impl Strategy<Value = Experiment> {
    prop_oneof![
        Just(Experiment::None),
        (prop::collection::vec(0.001..0.4f64, 1..4), 1..1000usize).prop_map(|(epsilons, samples)| Experiment::Dipole {
            lat: 10.0,
            lon: -30.0,
            heading: 45.0,
            epsilons,
            samples,
        }),
        (-0.9..0.9f64, prop::collection::vec(-80.0..80.0f64, 1..5)).prop_map(|(level, latitudes)| {
            Experiment::Poincare {
                level,
                crossing: Crossing::Both,
                epsilon: 0.1,
                heading: 0.0,
                lon: 0.0,
                latitudes,
                fourier_modes: 3,
            }
        }),
        (2..64usize).prop_map(|grid| Experiment::GreensTable { grid }),
    ]
}

prop_compose! {
    fn scenario()(
        metric in metric(),
        degree in 2..64usize,
        vortices in prop::collection::vec(vortex(), 1..6),
        t_end in 0.1..100.0f64,
        tol in 1e-14..1e-3f64,
        experiment in experiment(),
        seed in any::<u64>(),
    ) -> ScenarioConfig {
        ScenarioConfig {
            surface: SurfaceConfig { metric, degree },
            vortices,
            random_vortices: None,
            integrator: IntegratorConfig { t_end, tol, ..IntegratorConfig::default() },
            experiment,
            output_dir: "out".into(),
            seed,
        }
    }
}

proptest! {
    #[test]
    fn serialized_config_parses_back_unchanged(cfg in scenario()) {
        let text = cfg.to_toml();
        let parsed = ScenarioConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_toml(), text);
    }
}

#[test]
fn shipped_scenarios_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.metric().unwrap();
            n += 1;
        }
    }
    assert!(n >= 6);
}
