use std::path::Path;

use proptest::prelude::*;
use rispeb::channel::Mode;
use rispeb::config::RunConfig;

#[test]
fn fixture_round_trips_through_file() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/single_ris.cfg");
    let cfg = RunConfig::load(&path).unwrap();
    assert!(cfg.reflector.is_none());
    assert_eq!(cfg.scene().unwrap().ris_count(), 1);

    let dir = tempfile::tempdir().unwrap();
    let dumped = dir.path().join("effective.toml");
    std::fs::write(&dumped, cfg.to_toml()).unwrap();
    assert_eq!(RunConfig::load(&dumped).unwrap(), cfg);
}

#[test]
fn missing_file_names_the_path() {
    let err = RunConfig::load(Path::new("/nonexistent/run.cfg")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/run.cfg"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_edits_round_trip(
        bw in 1e6f64..5e9,
        nf in -10.0f64..20.0,
        power in -30.0f64..30.0,
        k_bar in 0usize..=5,
        nx in 2usize..200,
        mode in prop::sample::select(Mode::ALL.to_vec()),
    ) {
        let mut cfg = RunConfig::builtin();
        cfg.waveform.bandwidth_hz = bw;
        cfg.waveform.noise_figure_db = nf;
        cfg.waveform.power_dbm = power;
        cfg.run.k_bar = k_bar;
        cfg.grid.nx = nx;
        cfg.run.mode = mode;
        let parsed = RunConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        let w = parsed.waveform().unwrap();
        prop_assert!((w.bandwidth_hz() - bw).abs() <= 1e-9 * bw);
    }
}
