use std::path::PathBuf;

use aeronet::gwp::{gwp_over_time, write_solutions_json, GwpConfig};
use aeronet::{NodeKind, Vec3};

use crate::args::GwpArgs;
use crate::error::{CliError, CliResult, Context};
use crate::hash::InputHasher;
use crate::io::{load_mcs, load_scenario, meta_f64s, write_file};

pub fn run(a: &GwpArgs) -> CliResult<Vec<PathBuf>> {
    let mut hasher = InputHasher::new();
    let sc = load_scenario(&a.input.scenario, a.input.demands.as_deref(), &mut hasher)?;
    let mcs = load_mcs(a.mcs.as_deref(), &mut hasher)?;
    let cuboid = match (a.cuboid, meta_f64s(&sc, "cuboid").as_deref()) {
        (Some((x, y, z)), _) => Vec3::new(x, y, z),
        (None, Some(&[x, y, z])) => Vec3::new(x, y, z),
        _ => return Err(CliError::usage("--cuboid is required when the scenario does not record one")),
    };
    let cfg = GwpConfig {
        power_start_dbm: a.power_start,
        power_step_dbm: a.power_step,
        power_max_dbm: a.power_max,
        grid_resolution: a.resolution,
        refine_passes: a.refine_passes,
        ..GwpConfig::new(cuboid)
    };
    cfg.validate().context(|| "gateway placement settings".into())?;
    hasher.json("gwp", &cfg);
    let fmaps = sc.nodes_of_kind(NodeKind::Fmap);
    let grid = sc.header.grid;
    let solutions = gwp_over_time(
        &grid,
        |k| {
            let t = grid.instant(k);
            fmaps.iter().map(|&id| (id, sc.trajectory(id).unwrap().position_at(t), sc.demands.offered_at(id, t))).collect()
        },
        &mcs,
        &sc.header.budget,
        &cfg,
    )
    .context(|| "gateway placement".into())?;
    let hash = hasher.finish();
    Ok(vec![write_file(&a.out, |w| write_solutions_json(w, &solutions, &hash).context(|| format!("writing {}", a.out.display())))?])
}
