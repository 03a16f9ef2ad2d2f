use std::path::PathBuf;

use aeronet::geometry::NodeKind;
use aeronet::scenario::fixtures::{self, rwm_config};
use aeronet::scenario::{generate_rwm, ScenarioFile};
use aeronet::Error;
use proptest::prelude::*;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Set `AERONET_BLESS=1` to rewrite the committed copies after an intended change.
#[test]
fn committed_fixtures_match_generators() {
    let bless = std::env::var_os("AERONET_BLESS").is_some();
    for (name, sc) in fixtures::all().unwrap() {
        let mut fresh = Vec::new();
        sc.write(&mut fresh).unwrap();
        let path = fixture_dir().join(name);
        if bless {
            std::fs::write(&path, &fresh).unwrap();
        }
        let committed = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(committed == fresh, "{name} differs from its generator");
        assert_eq!(ScenarioFile::<f64>::load(&path).unwrap(), sc, "{name}");
    }
}

#[test]
fn fixtures_have_one_gateway_and_known_sources() {
    for name in fixtures::FIXTURE_NAMES {
        let sc = fixtures::by_name(name).unwrap();
        assert_eq!(sc.nodes_of_kind(NodeKind::Gw).len(), 1, "{name}");
        assert!(sc.demands.sources().all(|s| sc.trajectory(s).is_some()));
        let set = sc.demand_set().unwrap();
        assert_eq!(set.steps(), sc.header.grid.steps);
    }
}

#[test]
fn truncated_file_reports_parse_error() {
    let mut buf = Vec::new();
    fixtures::reference_case().unwrap().write(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    // stop in the middle of the fourth record
    let start = text.match_indices('\n').nth(3).unwrap().0 + 1;
    let cut = &text[..start + 10];
    match ScenarioFile::<f64>::read(cut.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, cut.lines().count()),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rwm_stays_in_box_and_in_speed_range(seed in any::<u64>()) {
        let cfg = rwm_config(seed);
        let trs = generate_rwm(&cfg).unwrap();
        prop_assert_eq!(trs.len(), 21);
        for tr in &trs {
            for w in tr.waypoints() {
                let p = w.pos;
                prop_assert!((0.0..=80.0).contains(&p.x) && (0.0..=80.0).contains(&p.y) && (0.0..=25.0).contains(&p.z));
                prop_assert!((0.0..=160.0).contains(&w.t));
            }
            prop_assert_eq!(tr.waypoints().last().unwrap().t, 160.0);
            for v in tr.segment_speeds() {
                prop_assert!((0.5 - 1e-9..=3.0 + 1e-9).contains(&v), "speed {}", v);
            }
        }
    }

    #[test]
    fn rwm_scenarios_round_trip(seed in any::<u64>()) {
        let sc = fixtures::rwm_redefine(seed).unwrap();
        let mut buf = Vec::new();
        sc.write(&mut buf).unwrap();
        prop_assert_eq!(ScenarioFile::<f64>::read(buf.as_slice()).unwrap(), sc);
    }
}
