//! File helpers shared by the subcommands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use aeronet::channel::McsTable;
use aeronet::scenario::{read_demands, ScenarioFile};

use crate::error::{CliError, CliResult, Context};
use crate::hash::InputHasher;

fn parse_dims<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    if parts.len() != N {
        return Err(format!("expected {N} sizes separated by 'x', got {s:?}"));
    }
    let mut out = [0.0_f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("{p:?} is not a number"))?;
        if !(*o > 0.0 && o.is_finite()) {
            return Err(format!("sizes must be positive, got {p}"));
        }
    }
    Ok(out)
}

pub fn parse_dims2(s: &str) -> Result<(f64, f64), String> {
    parse_dims::<2>(s).map(|[x, y]| (x, y))
}

pub fn parse_dims3(s: &str) -> Result<(f64, f64, f64), String> {
    parse_dims::<3>(s).map(|[x, y, z]| (x, y, z))
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::file(path, e))
}

/// Creates `path` and hands a buffered writer to `body`, flushing at the end.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>) -> CliResult<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(|e| CliError::file(path, e))?);
    body(&mut w)?;
    w.flush().map_err(|e| CliError::file(path, e))?;
    Ok(path.to_path_buf())
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::file(path, e)
}

/// Loads a scenario, replacing its demands when a demand file is given, and feeds both
/// inputs to `hasher`.
pub fn load_scenario(scenario: &Path, demands: Option<&Path>, hasher: &mut InputHasher) -> CliResult<ScenarioFile<f64>> {
    hasher.file("scenario", scenario)?;
    let sc = ScenarioFile::<f64>::read(open(scenario)?).context(|| format!("reading {}", scenario.display()))?;
    let Some(dpath) = demands else {
        return Ok(sc);
    };
    hasher.file("demands", dpath)?;
    let d = read_demands::<f64, _>(open(dpath)?).context(|| format!("reading {}", dpath.display()))?;
    ScenarioFile::new(sc.header.clone(), sc.trajectories().to_vec(), d).context(|| format!("applying {}", dpath.display()))
}

pub fn load_mcs(path: Option<&Path>, hasher: &mut InputHasher) -> CliResult<McsTable<f64>> {
    match path {
        None => Ok(McsTable::default()),
        Some(p) => {
            hasher.file("mcs", p)?;
            McsTable::read_csv(open(p)?).context(|| format!("reading {}", p.display()))
        }
    }
}

/// Numeric array stored under `key` in the scenario header meta.
pub fn meta_f64s(sc: &ScenarioFile<f64>, key: &str) -> Option<Vec<f64>> {
    sc.header.meta.get(key)?.as_array()?.iter().map(|v| v.as_f64()).collect()
}
