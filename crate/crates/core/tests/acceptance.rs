//! Acceptance checks. Run with `cargo test -p aeronet --test acceptance`; prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aeronet::channel::{capacity_from_snr_db, LinkBudget, McsTable};
use aeronet::geometry::{Node, NodeId, NodeKind, TimeGrid, Trajectory, Vec3};
use aeronet::gwp::{assign_targets, channel_occupancy, fair_share, gwp_algorithm, residual_at, GwpConfig};
use aeronet::netplan::{net_force, run_netplan, FmapState, NetPlanConfig, ZoneGrid};
use aeronet::routing::{
    build_snapshot, build_snapshot_with_cs, compute_schedule, path_cost, route_snapshot, shortest_path, GraphSnapshot, PathSelection,
    RoutingConfig, RoutingMetric, TrafficDemandSet,
};
use aeronet::scenario::fixtures::{self, rwm_config};
use aeronet::scenario::{generate_rwm, node_rng, unit, ScenarioFile};
use aeronet::sim::{compare_runs, run_simulation, MediumMode, RoutingMode, SimConfig, SimReport};
use rand_pcg::Pcg64;

// Tolerances and budgets.
const GWP_SNR_TOL_DB: f64 = 1e-6;
const OCCUPANCY_TOL: f64 = 5e-4;
const MIN_PREDICTIVE_GAIN: f64 = 0.15;
const FORCE_TOL: f64 = 1e-9;
const FUZZ_TOL: f64 = 1e-6;
const BUDGET_INVERSION_REL_TOL: f64 = 1e-6;
const SHANNON_TOL_BPS: f64 = 0.5e6;
const OCCUPANCY_CAP_SLACK: f64 = 1e-9;
const SPEED_SLACK: f64 = 1e-9;

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn criterion_1() -> Outcome {
    let sc = fixtures::venue_gwp4().map_err(|e| e.to_string())?;
    let mcs = McsTable::default();
    let b = LinkBudget::default();
    let l = fair_share(mcs.top_rate(), 4).map_err(|e| e.to_string())?;
    check(l == 195e6, format!("fair share {l}"))?;

    let fmaps: Vec<_> = sc
        .nodes_of_kind(NodeKind::Fmap)
        .into_iter()
        .map(|id| (id, sc.trajectory(id).unwrap().position_at(0.0), sc.demands.offered_at(id, 0.0)))
        .collect();
    let targeted = assign_targets(&fmaps, &mcs, 4).map_err(|e| e.to_string())?;
    let targets: Vec<f64> = targeted.iter().map(|f| f.target_snr_db).collect();
    check(targets == [20.0, 35.0, 20.0, 35.0], format!("targets {targets:?}"))?;

    let reference_point = sc.trajectory(NodeId(0)).unwrap().position_at(0.0);
    let r22 = residual_at(&targeted, &b, 22.0, &reference_point);
    check(r22 <= 0.0, format!("residual at the reference point {r22}"))?;

    let cfg = GwpConfig::new(Vec3::new(30.0, 30.0, 20.0));
    let s = gwp_algorithm(&fmaps, &mcs, 4, &b, &cfg).map_err(|e| e.to_string())?;
    check(s.tx_power_dbm <= 22.0 && s.residual <= 0.0, format!("solution {s:?}"))?;
    check(s.links.iter().all(|l| l.snr_db >= l.target_snr_db - GWP_SNR_TOL_DB), "a link misses its target")?;

    let demands: Vec<f64> = fmaps.iter().map(|f| f.2).collect();
    let rates: Vec<f64> = targets.iter().map(|t| mcs.rate_for_snr(*t)).collect();
    let occ = channel_occupancy(&demands, &rates).map_err(|e| e.to_string())?;
    check((occ - 0.8333).abs() <= OCCUPANCY_TOL, format!("occupancy {occ}"))?;
    Ok(format!(
        "L = 195 Mbit/s, targets {targets:?} dB, reference residual {r22:.3} m, minimal power {} dBm, occupancy {occ:.4}",
        s.tx_power_dbm
    ))
}

fn all_simple_paths(s: &GraphSnapshot<f64>, src: NodeId, dst: NodeId) -> Vec<Vec<NodeId>> {
    fn go(s: &GraphSnapshot<f64>, cur: &mut Vec<NodeId>, dst: NodeId, out: &mut Vec<Vec<NodeId>>) {
        let last = *cur.last().unwrap();
        if last == dst {
            out.push(cur.clone());
            return;
        }
        for &n in s.nodes() {
            if !cur.contains(&n) && s.link(last, n).is_some() {
                cur.push(n);
                go(s, cur, dst, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(s, &mut vec![src], dst, &mut out);
    out
}

fn random_snapshot(rng: &mut Pcg64) -> GraphSnapshot<f64> {
    loop {
        let n = 2 + (unit(rng) * 7.0) as u32;
        let nodes: Vec<_> = (0..n).map(|i| (NodeId(i), Vec3::new(unit(rng) * 70.0, unit(rng) * 70.0, 5.0 + unit(rng) * 10.0))).collect();
        if let Ok(s) = build_snapshot(&nodes, &LinkBudget::default(), 0.0) {
            return s;
        }
    }
}

fn criterion_2() -> Outcome {
    let mut rng = node_rng(0xACCE, 2);
    let (mut compared, mut routed) = (0usize, 0usize);
    for g in 0..200 {
        let s = random_snapshot(&mut rng);
        let active: BTreeSet<NodeId> = s.nodes().iter().copied().filter(|_| unit(&mut rng) < 0.5).collect();
        let metrics = [
            RoutingMetric::Euclidean,
            RoutingMetric::i2r(0.0).unwrap(),
            RoutingMetric::i2r(0.5).unwrap(),
            RoutingMetric::i2r(1.0).unwrap(),
        ];
        for metric in &metrics {
            for &src in &s.nodes()[1..] {
                let gw = s.nodes()[0];
                let found = shortest_path(&s, metric, src, gw, &active).map_err(|e| e.to_string())?;
                let brute = all_simple_paths(&s, src, gw)
                    .iter()
                    .map(|p| path_cost(&s, metric, p, &active).unwrap())
                    .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.min(c))));
                match (found.as_ref().map(|r| r.cost), brute) {
                    (None, None) => {}
                    (Some(a), Some(b)) if a == b => routed += 1,
                    (a, b) => return Err(format!("graph {g}, {metric:?}, source {src}: search {a:?} vs enumeration {b:?}")),
                }
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} source/metric pairs on 200 graphs agree exactly ({routed} routable)"))
}

fn run(sc: &ScenarioFile<f64>, sel: PathSelection<f64>, mode: RoutingMode) -> Result<SimReport<f64>, String> {
    let d = sc.demand_set().map_err(|e| e.to_string())?;
    let cfg = RoutingConfig { selection: sel, cs_threshold_db: None };
    let s = compute_schedule(sc.trajectories(), &sc.header.grid, &sc.header.budget, &cfg, &d, NodeId(0)).map_err(|e| e.to_string())?;
    run_simulation(sc.trajectories(), &sc.header.budget, &s, &d, &SimConfig::default(), mode).map_err(|e| e.to_string())
}

fn criterion_3() -> Outcome {
    let sc = fixtures::reference_case().map_err(|e| e.to_string())?;
    let d = sc.demand_set().map_err(|e| e.to_string())?;
    let cfg = RoutingConfig { selection: PathSelection::MaxBottleneck, cs_threshold_db: None };
    let s = compute_schedule(sc.trajectories(), &sc.header.grid, &sc.header.budget, &cfg, &d, NodeId(0)).map_err(|e| e.to_string())?;
    let updates = s.update_instants(NodeId(3));
    check(updates.len() == 2, format!("route updates at {updates:?}"))?;
    let pred = run(&sc, PathSelection::MaxBottleneck, RoutingMode::Predictive)?;
    let stat = run(&sc, PathSelection::MaxBottleneck, RoutingMode::Static)?;
    let gain = compare_runs(&pred, &stat).map_err(|e| e.to_string())?.aggregate.value().ok_or("undefined gain")?;
    check(gain >= MIN_PREDICTIVE_GAIN, format!("gain {gain:.4}"))?;
    Ok(format!("one relay switch at t = {} s, predictive gain {:.1} % (widest-path rule)", updates[1], gain * 100.0))
}

fn criterion_4() -> Outcome {
    let sc = fixtures::interference().map_err(|e| e.to_string())?;
    let cs = sc.header.meta.get("cs_threshold_db").and_then(|v| v.as_f64()).ok_or("fixture lacks cs_threshold_db")?;
    let nodes: Vec<_> = sc.trajectories().iter().map(|t| (t.id(), t.position_at(0.0))).collect();
    let snap = build_snapshot_with_cs(&nodes, &sc.header.budget, cs, 0.0).map_err(|e| e.to_string())?;
    let sources: Vec<NodeId> = sc.demands.sources().collect();
    let relays = |alpha: f64| -> Result<Vec<BTreeSet<NodeId>>, String> {
        let routes = route_snapshot(&snap, &PathSelection::i2r(alpha).unwrap(), &sources, NodeId(0)).map_err(|e| e.to_string())?;
        sources
            .iter()
            .map(|s| {
                let p = &routes[s].as_ref().ok_or(format!("flow {s} unrouted"))?.path;
                Ok(p[1..p.len() - 1].iter().copied().collect())
            })
            .collect()
    };
    let full = relays(1.0)?;
    check(full[0].is_disjoint(&full[1]), format!("alpha = 1 relays overlap: {full:?}"))?;
    let plain = relays(0.0)?;
    let shared: Vec<_> = plain[0].intersection(&plain[1]).collect();
    check(!shared.is_empty(), format!("alpha = 0 relays do not share: {plain:?}"))?;
    Ok(format!("alpha = 1 relays {:?} / {:?}; alpha = 0 shares {:?}", full[0], full[1], shared))
}

fn criterion_5() -> Outcome {
    let cfg = NetPlanConfig::desk_profile();
    let grid = ZoneGrid::new(100.0, 100.0, 10.0).unwrap();
    let flat = grid.clone().with_demand(vec![10e6; 100]).unwrap();
    let f = net_force(&cfg, &flat, &[FmapState::new(1, 50.0, 50.0, 10.0, 25.0)], 0).map_err(|e| e.to_string())?;
    check(f.norm() <= FORCE_TOL, format!("symmetric force {f:?}"))?;

    let start =
        [FmapState::new(1, 20.0, 20.0, 10.0, 25.0), FmapState::new(2, 50.0, 50.0, 10.0, 25.0), FmapState::new(3, 80.0, 30.0, 10.0, 25.0)];
    let mut d = vec![0.0; 100];
    d[77] = 100e6;
    let hot = grid.clone().with_demand(d.clone()).unwrap();
    let hotspot = hot.zone_center(77);
    let end = run_netplan(&cfg, &hot, &start, 50).map_err(|e| e.to_string())?.pop().unwrap();
    let dist: Vec<f64> = end.iter().map(|f| f.pos.horizontal_distance(&hotspot)).collect();
    let near = dist.iter().filter(|x| **x <= cfg.r_mean).count();
    check(near >= 2, format!("{near} FMAPs near the hotspot, distances {dist:?}"))?;
    let closest = (0..3).min_by(|a, b| dist[*a].total_cmp(&dist[*b])).unwrap();
    let farthest = (0..3).max_by(|a, b| dist[*a].total_cmp(&dist[*b])).unwrap();
    check(
        end[closest].cell_range < cfg.r_mean && cfg.r_mean < end[farthest].cell_range,
        format!("cell ranges {:?}", end.iter().map(|f| f.cell_range).collect::<Vec<_>>()),
    )?;

    let mut rng = node_rng(0xACCE, 5);
    for case in 0..100 {
        let demand: Vec<f64> = (0..100).map(|_| unit(&mut rng) * 120e6).collect();
        let n = 1 + (unit(&mut rng) * 5.0) as u32;
        let fmaps: Vec<_> =
            (0..n).map(|i| FmapState::new(i, unit(&mut rng) * 100.0, unit(&mut rng) * 100.0, 10.0, 5.0 + unit(&mut rng) * 35.0)).collect();
        let (dx, dy) = (unit(&mut rng) * 1000.0 - 500.0, unit(&mut rng) * 1000.0 - 500.0);
        let c = 0.1 + unit(&mut rng) * 10.0;
        let base = grid.clone().with_demand(demand).unwrap();
        let moved_grid = base.clone().with_origin(dx, dy);
        let moved: Vec<_> = fmaps.iter().map(|f| FmapState::new(f.id.0, f.pos.x + dx, f.pos.y + dy, 10.0, f.cell_range)).collect();
        let scaled = NetPlanConfig { k_fa: cfg.k_fa * c, k_fr: cfg.k_fr * c, ..cfg };
        for u in 0..fmaps.len() {
            let a = net_force(&cfg, &base, &fmaps, u).map_err(|e| e.to_string())?;
            let b = net_force(&cfg, &moved_grid, &moved, u).map_err(|e| e.to_string())?;
            let s = net_force(&scaled, &base, &fmaps, u).map_err(|e| e.to_string())?;
            let scale = 1.0 + a.norm();
            check((a - b).norm() <= FUZZ_TOL * scale, format!("case {case}: translated force {b:?} vs {a:?}"))?;
            check((a * c - s).norm() <= FUZZ_TOL * scale * c, format!("case {case}: scaled force {s:?} vs {:?}", a * c))?;
        }
    }
    Ok(format!("|F| = {:.1e}; {near}/3 FMAPs within R_Mean of the hotspot; 100 fuzzed instances equivariant and linear", f.norm()))
}

fn criterion_6() -> Outcome {
    let b = LinkBudget::<f64>::default();
    let mut worst = 0.0_f64;
    for i in 1..=2000 {
        let d = 0.05 * i as f64;
        let back = b.distance_for_snr(b.snr_db(d).map_err(|e| e.to_string())?);
        worst = worst.max((back - d).abs() / d);
    }
    check(worst <= BUDGET_INVERSION_REL_TOL, format!("inversion error {worst:e}"))?;
    let c = capacity_from_snr_db(160e6_f64, 5.0);
    check((c - 329.2e6).abs() <= SHANNON_TOL_BPS, format!("Shannon {c}"))?;
    let mcs = McsTable::<f64>::default();
    let rows: Vec<(f64, f64)> = mcs.rows().iter().map(|r| (r.min_snr_db, r.phy_rate_bps)).collect();
    check(rows == [(12.0, 58.5e6), (20.0, 234e6), (35.0, 702e6), (37.0, 780e6)], format!("rows {rows:?}"))?;
    let lookups = [(11.9, 0.0), (12.0, 58.5e6), (34.99, 234e6), (35.0, 702e6), (50.0, 780e6)];
    for (snr, rate) in lookups {
        check(mcs.rate_for_snr(snr) == rate, format!("rate at {snr} dB"))?;
    }
    let demand_targets = [(14.625e6, 12.0), (48.75e6, 20.0), (146.25e6, 35.0), (195e6, 37.0)];
    for (dem, snr) in demand_targets {
        check(mcs.min_snr_for_demand(dem, 4).map_err(|e| e.to_string())? == snr, format!("target for {dem}"))?;
    }
    Ok(format!("worst inversion error {worst:.1e}, Shannon {:.2} Mbit/s, table rows exact", c / 1e6))
}

fn fuzz_scenario(rng: &mut Pcg64) -> (Vec<Trajectory<f64>>, TimeGrid<f64>, TrafficDemandSet<f64>) {
    let n = 3 + (unit(rng) * 5.0) as u32;
    let steps = 5 + (unit(rng) * 10.0) as usize;
    let pt = |rng: &mut Pcg64| Vec3::new(unit(rng) * 90.0, unit(rng) * 90.0, 5.0 + unit(rng) * 15.0);
    let trs: Vec<_> = (0..n)
        .map(|i| {
            let kind = if i == 0 { NodeKind::Gw } else { NodeKind::Fmap };
            let (a, b) = (pt(rng), pt(rng));
            Trajectory::straight(Node::new(i, kind), a, b, 0.0, 0.5 + unit(rng) * 2.5).unwrap()
        })
        .collect();
    let mut d = TrafficDemandSet::new(steps);
    for i in 1..n {
        d.set(NodeId(i), (0..steps).map(|_| unit(rng) * 200e6).collect()).unwrap();
    }
    (trs, TimeGrid::new(0.0, 2.0, steps).unwrap(), d)
}

fn criterion_7() -> Outcome {
    let mut rng = node_rng(0xACCE, 7);
    let b = LinkBudget::default();
    let mut flows = 0usize;
    for case in 0..100 {
        let (trs, grid, d) = fuzz_scenario(&mut rng);
        let s = compute_schedule(&trs, &grid, &b, &RoutingConfig::default(), &d, NodeId(0)).map_err(|e| e.to_string())?;
        for medium in [MediumMode::BottleneckOnly, MediumMode::AirtimeShare, MediumMode::MaxMinFair] {
            let cfg = SimConfig { medium, ..SimConfig::default() };
            let a = run_simulation(&trs, &b, &s, &d, &cfg, RoutingMode::Predictive).map_err(|e| e.to_string())?;
            for st in &a.steps {
                for f in &st.flows {
                    check(f.achieved_bps <= f.offered_bps, format!("case {case}: R > T at t = {}", st.t))?;
                    flows += 1;
                }
                if medium != MediumMode::BottleneckOnly {
                    check(st.occupancy <= 1.0 + OCCUPANCY_CAP_SLACK, format!("case {case}: occupancy {}", st.occupancy))?;
                }
            }
            let again = run_simulation(&trs, &b, &s, &d, &cfg, RoutingMode::Predictive).map_err(|e| e.to_string())?;
            let (mut x, mut y) = (Vec::new(), Vec::new());
            a.write_csv(&mut x, "").map_err(|e| e.to_string())?;
            again.write_csv(&mut y, "").map_err(|e| e.to_string())?;
            check(x == y && a == again, format!("case {case}: repeated run differs"))?;
        }
    }
    Ok(format!("{flows} flow-steps over 100 scenarios x 3 medium modes, repeat runs bit-identical"))
}

fn criterion_8() -> Outcome {
    let mut segments = 0usize;
    for seed in 0..20 {
        let cfg = rwm_config(seed);
        for tr in generate_rwm(&cfg).map_err(|e| e.to_string())? {
            for w in tr.waypoints() {
                let p = w.pos;
                let inside =
                    (0.0..=cfg.bounds.x).contains(&p.x) && (0.0..=cfg.bounds.y).contains(&p.y) && (0.0..=cfg.bounds.z).contains(&p.z);
                check(inside, format!("seed {seed}: node {} leaves the box at {p}", tr.id()))?;
            }
            for v in tr.segment_speeds() {
                check((cfg.v_min - SPEED_SLACK..=cfg.v_max + SPEED_SLACK).contains(&v), format!("seed {seed}: speed {v}"))?;
                segments += 1;
            }
        }
    }
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let all = fixtures::all().map_err(|e| e.to_string())?;
    for (name, sc) in &all {
        let mut first = Vec::new();
        sc.write(&mut first).map_err(|e| e.to_string())?;
        let back = ScenarioFile::<f64>::read(first.as_slice()).map_err(|e| e.to_string())?;
        let mut second = Vec::new();
        back.write(&mut second).map_err(|e| e.to_string())?;
        check(&back == sc && first == second, format!("{name} does not round-trip"))?;
        let committed = std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
        check(committed == first, format!("{name} differs from the committed copy"))?;
    }
    Ok(format!("{segments} segments from 20 seeds in bounds and in speed range; {} fixtures round-trip", all.len()))
}

type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "gateway placement worked example", criterion_1, Some(Duration::from_secs(5))),
        (2, "least-cost search vs enumeration", criterion_2, Some(Duration::from_secs(30))),
        (3, "predictive routing reference case", criterion_3, Some(Duration::from_secs(5))),
        (4, "interference-aware relay choice", criterion_4, None),
        (5, "placement force properties", criterion_5, None),
        (6, "channel math", criterion_6, None),
        (7, "simulation conservation and determinism", criterion_7, None),
        (8, "scenario generator and files", criterion_8, None),
    ];
    let mut failed = 0;
    for (n, name, f, budget) in criteria {
        let start = Instant::now();
        let mut outcome = f();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, budget) {
            if took > limit {
                outcome = Err(format!("took {took:.2?}, budget {limit:?}"));
            }
        }
        match outcome {
            Ok(msg) => println!("criterion {n} PASS  {name}: {msg} [{took:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {msg} [{took:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
