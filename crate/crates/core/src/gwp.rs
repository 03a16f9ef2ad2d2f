//! Gateway placement: choose the lowest common transmit power, and a gateway position,
//! such that every FMAP's link to the gateway reaches the SNR its demand requires.
//!
//! A target SNR fixes a maximum link distance for a given power, so the feasible
//! positions are the intersection of one ball per FMAP with the search cuboid. The
//! solver minimizes `residual(p) = max_i (|p - c_i| - d_max_i)`; `p` is feasible iff
//! the residual is `<= 0`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkBudget, McsTable};
use crate::error::{Error, Result};
use crate::geometry::{NodeId, TimeGrid, Vec3};
use crate::num::Real;

/// Candidate positions closer than this to an FMAP are rejected, meters.
pub const FMAP_EXCLUSION_RADIUS: f64 = 0.5;

const MAX_RECENTER: usize = 50;

/// Direction of the backhaul traffic. Links are symmetric, so it does not change the
/// solution; it is carried for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowDirection {
    #[default]
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwpConfig<T> {
    /// Search cuboid `[0, X] x [0, Y] x [0, Z]`, meters.
    pub cuboid: Vec3<T>,
    pub power_start_dbm: T,
    pub power_step_dbm: T,
    pub power_max_dbm: T,
    /// Spacing of the coarse scan, meters.
    pub grid_resolution: T,
    /// Local refinement passes, each ten times finer than the previous one.
    pub refine_passes: usize,
    #[serde(default)]
    pub direction: FlowDirection,
}

impl<T: Real> GwpConfig<T> {
    pub fn new(cuboid: Vec3<T>) -> Self {
        Self {
            cuboid,
            power_start_dbm: T::zero(),
            power_step_dbm: T::one(),
            power_max_dbm: T::lit(40.0),
            grid_resolution: T::one(),
            refine_passes: 3,
            direction: FlowDirection::Uplink,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.cuboid;
        if !(c.x > T::zero() && c.y > T::zero() && c.z > T::zero()) || !c.is_finite() {
            return Err(Error::invalid(format!("cuboid sides must be positive, got {c}")));
        }
        if !(self.power_step_dbm > T::zero()) {
            return Err(Error::invalid("power step must be positive"));
        }
        if !(self.grid_resolution > T::zero()) {
            return Err(Error::invalid("grid resolution must be positive"));
        }
        if !(self.power_start_dbm <= self.power_max_dbm) {
            return Err(Error::invalid("power start exceeds the power cap"));
        }
        Ok(())
    }

    fn contains(&self, p: &Vec3<T>) -> bool {
        let c = self.cuboid;
        (T::zero()..=c.x).contains(&p.x) && (T::zero()..=c.y).contains(&p.y) && (T::zero()..=c.z).contains(&p.z)
    }
}

/// An FMAP with its offered backhaul load and the SNR that load requires.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandedFmap<T> {
    pub id: NodeId,
    pub pos: Vec3<T>,
    pub demand_bps: T,
    pub target_snr_db: T,
}

/// Best position found at one power level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement<T> {
    pub pos: Vec3<T>,
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmapLinkReport<T> {
    pub id: NodeId,
    pub target_snr_db: T,
    pub snr_db: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwpSolution<T> {
    pub gw_pos: Vec3<T>,
    pub tx_power_dbm: T,
    /// Meters; `<= 0` at a feasible position.
    pub residual: T,
    pub links: Vec<FmapLinkReport<T>>,
}

/// `L = capacity / n`.
pub fn fair_share<T: Real>(medium_capacity_bps: T, n_fmaps: usize) -> Result<T> {
    if n_fmaps == 0 {
        return Err(Error::invalid("fair share needs at least one FMAP"));
    }
    Ok(medium_capacity_bps / T::from_usize(n_fmaps).unwrap())
}

/// Largest distance at which `target_snr_db` is met with `tx_power_dbm`.
pub fn d_max<T: Real>(budget: &LinkBudget<T>, tx_power_dbm: T, target_snr_db: T) -> T {
    budget.with_tx_power(tx_power_dbm).distance_for_snr(target_snr_db)
}

/// Attaches target SNRs: the lowest MCS row whose rate, split among `sharers`, carries
/// each FMAP's demand.
pub fn assign_targets<T: Real>(fmaps: &[(NodeId, Vec3<T>, T)], mcs: &McsTable<T>, sharers: usize) -> Result<Vec<DemandedFmap<T>>> {
    fmaps
        .iter()
        .map(|&(id, pos, demand_bps)| {
            if !(demand_bps > T::zero()) {
                return Err(Error::invalid(format!("FMAP {id} has no positive demand")));
            }
            if !pos.is_finite() {
                return Err(Error::invalid(format!("FMAP {id} position is not finite")));
            }
            Ok(DemandedFmap { id, pos, demand_bps, target_snr_db: mcs.min_snr_for_demand(demand_bps, sharers)? })
        })
        .collect()
}

/// `sum_i demand_i / rate_i`: fraction of airtime the FMAPs keep the channel busy.
pub fn channel_occupancy<T: Real>(demands_bps: &[T], phy_rates_bps: &[T]) -> Result<T> {
    if demands_bps.len() != phy_rates_bps.len() {
        return Err(Error::invalid("demand and rate lists differ in length"));
    }
    demands_bps
        .iter()
        .zip(phy_rates_bps)
        .map(|(d, r)| {
            if !(*r > T::zero()) {
                return Err(Error::invalid(format!("PHY rate must be positive, got {r}")));
            }
            Ok(*d / *r)
        })
        .sum()
}

/// Precomputed ball radii for one power level.
struct Balls<'a, T> {
    fmaps: &'a [DemandedFmap<T>],
    radii: Vec<T>,
    exclusion: T,
}

impl<'a, T: Real> Balls<'a, T> {
    fn new(fmaps: &'a [DemandedFmap<T>], budget: &LinkBudget<T>, tx_power_dbm: T) -> Self {
        let radii = fmaps.iter().map(|f| d_max(budget, tx_power_dbm, f.target_snr_db)).collect();
        Self { fmaps, radii, exclusion: T::lit(FMAP_EXCLUSION_RADIUS) }
    }

    /// Residual at `p`, or `None` inside an exclusion ball.
    fn eval(&self, p: &Vec3<T>) -> Option<T> {
        let mut worst = T::neg_infinity();
        for (f, r) in self.fmaps.iter().zip(&self.radii) {
            let d = p.distance(&f.pos);
            if d < self.exclusion {
                return None;
            }
            worst = worst.max(d - *r);
        }
        Some(worst)
    }
}

/// `max_i (|p - c_i| - d_max_i)` at an arbitrary point, ignoring exclusion and cuboid.
pub fn residual_at<T: Real>(fmaps: &[DemandedFmap<T>], budget: &LinkBudget<T>, tx_power_dbm: T, p: &Vec3<T>) -> T {
    let balls = Balls::new(fmaps, budget, tx_power_dbm);
    fmaps.iter().zip(&balls.radii).map(|(f, r)| p.distance(&f.pos) - *r).fold(T::neg_infinity(), T::max)
}

/// Axis samples `lo, lo + h, ...` up to `hi`, always including `hi`.
fn axis<T: Real>(lo: T, hi: T, h: T) -> Vec<T> {
    let n = ((hi - lo) / h).floor().to_usize().unwrap_or(0);
    let mut v: Vec<T> = (0..=n).map(|i| lo + h * T::from_usize(i).unwrap()).filter(|x| *x <= hi).collect();
    if v.last().is_none_or(|x| hi - *x > h * T::lit(1e-9)) {
        v.push(hi);
    }
    v
}

/// Scans a lattice and returns the lowest-residual point; ties keep the earliest point in
/// x-major order.
fn scan<T: Real>(balls: &Balls<'_, T>, xs: &[T], ys: &[T], zs: &[T]) -> Option<Placement<T>> {
    let (ny, nz) = (ys.len(), zs.len());
    (0..xs.len() * ny * nz)
        .into_par_iter()
        .filter_map(|i| {
            let p = Vec3::new(xs[i / (ny * nz)], ys[(i / nz) % ny], zs[i % nz]);
            balls.eval(&p).map(|r| (i, Placement { pos: p, residual: r }))
        })
        .min_by(|a, b| a.1.residual.partial_cmp(&b.1.residual).unwrap().then(a.0.cmp(&b.0)))
        .map(|(_, p)| p)
}

/// Zooms in around `start`: each pass scans a window of the previous spacing at a tenth
/// of it, re-centring while the best point sits on the window edge.
fn refine<T: Real>(balls: &Balls<'_, T>, cfg: &GwpConfig<T>, start: Placement<T>) -> Placement<T> {
    let ten = T::lit(10.0);
    let mut best = start;
    let mut h = cfg.grid_resolution;
    for _ in 0..cfg.refine_passes {
        let fine = h / ten;
        for _ in 0..MAX_RECENTER {
            let c = best.pos;
            let span = |v: T, hi: T| axis((v - h).max(T::zero()), (v + h).min(hi), fine);
            let Some(p) = scan(balls, &span(c.x, cfg.cuboid.x), &span(c.y, cfg.cuboid.y), &span(c.z, cfg.cuboid.z)) else {
                break;
            };
            if !(p.residual < best.residual) {
                break;
            }
            best = p;
            let shift = (p.pos.x - c.x).abs().max((p.pos.y - c.y).abs()).max((p.pos.z - c.z).abs());
            if shift < h * T::lit(0.999) {
                break;
            }
        }
        h = fine;
    }
    best
}

/// Lowest-residual position in the cuboid at `tx_power_dbm`, optionally also refining
/// around a warm-start hint.
pub fn best_point<T: Real>(
    fmaps: &[DemandedFmap<T>],
    budget: &LinkBudget<T>,
    tx_power_dbm: T,
    cfg: &GwpConfig<T>,
    hint: Option<Vec3<T>>,
) -> Result<Placement<T>> {
    cfg.validate()?;
    budget.validate()?;
    if fmaps.is_empty() {
        return Err(Error::invalid("at least one FMAP is required"));
    }
    let balls = Balls::new(fmaps, budget, tx_power_dbm);
    let h = cfg.grid_resolution;
    let c = cfg.cuboid;
    let coarse = scan(&balls, &axis(T::zero(), c.x, h), &axis(T::zero(), c.y, h), &axis(T::zero(), c.z, h))
        .ok_or_else(|| Error::invalid("every grid point lies inside an FMAP exclusion ball"))?;
    let mut best = refine(&balls, cfg, coarse);
    if let Some(hint) = hint.filter(|p| cfg.contains(p)) {
        if let Some(r) = balls.eval(&hint) {
            let warm = refine(&balls, cfg, Placement { pos: hint, residual: r });
            if warm.residual < best.residual {
                best = warm;
            }
        }
    }
    Ok(best)
}

/// A position meeting every target at `tx_power_dbm`, or `None`.
pub fn feasible_point<T: Real>(
    fmaps: &[DemandedFmap<T>],
    budget: &LinkBudget<T>,
    tx_power_dbm: T,
    cfg: &GwpConfig<T>,
) -> Result<Option<Placement<T>>> {
    let p = best_point(fmaps, budget, tx_power_dbm, cfg, None)?;
    Ok((p.residual <= T::zero()).then_some(p))
}

/// Raises the common transmit power from `power_start_dbm` in `power_step_dbm` steps until
/// a feasible position exists.
pub fn gwp_solve<T: Real>(
    fmaps: &[DemandedFmap<T>],
    budget: &LinkBudget<T>,
    cfg: &GwpConfig<T>,
    hint: Option<Vec3<T>>,
) -> Result<GwpSolution<T>> {
    cfg.validate()?;
    let tol = cfg.power_step_dbm * T::lit(1e-9);
    let mut k = 0usize;
    loop {
        let power = cfg.power_start_dbm + cfg.power_step_dbm * T::from_usize(k).unwrap();
        if power > cfg.power_max_dbm + tol {
            return Err(Error::InfeasibleDeployment { max_power_dbm: cfg.power_max_dbm.to_f64_lossy() });
        }
        let p = best_point(fmaps, budget, power, cfg, hint)?;
        if p.residual <= T::zero() {
            let b = budget.with_tx_power(power);
            let links = fmaps
                .iter()
                .map(|f| Ok(FmapLinkReport { id: f.id, target_snr_db: f.target_snr_db, snr_db: b.snr_db(p.pos.distance(&f.pos))? }))
                .collect::<Result<_>>()?;
            return Ok(GwpSolution { gw_pos: p.pos, tx_power_dbm: power, residual: p.residual, links });
        }
        k += 1;
    }
}

/// Targets from the MCS table, then the power loop.
pub fn gwp_algorithm<T: Real>(
    fmaps: &[(NodeId, Vec3<T>, T)],
    mcs: &McsTable<T>,
    sharers: usize,
    budget: &LinkBudget<T>,
    cfg: &GwpConfig<T>,
) -> Result<GwpSolution<T>> {
    let demanded = assign_targets(fmaps, mcs, sharers)?;
    gwp_solve(&demanded, budget, cfg, None)
}

/// One solution per time step, each warm-started from the previous position.
///
/// `fmaps_at(k)` lists the FMAPs and demands at step `k`; steps with no demanding FMAP
/// keep the previous solution (or fail if there is none yet).
pub fn gwp_over_time<T: Real>(
    grid: &TimeGrid<T>,
    mut fmaps_at: impl FnMut(usize) -> Vec<(NodeId, Vec3<T>, T)>,
    mcs: &McsTable<T>,
    budget: &LinkBudget<T>,
    cfg: &GwpConfig<T>,
) -> Result<Vec<(T, GwpSolution<T>)>> {
    grid.validate()?;
    let mut out: Vec<(T, GwpSolution<T>)> = Vec::with_capacity(grid.steps);
    for k in 0..grid.steps {
        let t = grid.instant(k);
        let active: Vec<_> = fmaps_at(k).into_iter().filter(|f| f.2 > T::zero()).collect();
        if active.is_empty() {
            let prev = out
                .last()
                .map(|(_, s)| s.clone())
                .ok_or_else(|| Error::InvalidScenario(format!("no FMAP offers traffic at t = {t}, nothing to place the gateway for")))?;
            out.push((t, prev));
            continue;
        }
        let demanded = assign_targets(&active, mcs, active.len())?;
        let hint = out.last().map(|(_, s)| s.gw_pos);
        out.push((t, gwp_solve(&demanded, budget, cfg, hint)?));
    }
    Ok(out)
}

/// JSON array of per-step solutions, wrapped with the input hash.
pub fn write_solutions_json<T: Real, W: Write>(w: W, solutions: &[(T, GwpSolution<T>)], input_hash: &str) -> Result<()> {
    #[derive(Serialize)]
    struct Step<'a, T> {
        t: T,
        #[serde(flatten)]
        solution: &'a GwpSolution<T>,
    }
    #[derive(Serialize)]
    struct Doc<'a, T> {
        input_hash: &'a str,
        solutions: Vec<Step<'a, T>>,
    }
    let doc = Doc { input_hash, solutions: solutions.iter().map(|(t, s)| Step { t: *t, solution: s }).collect() };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fmap(id: u32, x: f64, y: f64, z: f64, target: f64) -> DemandedFmap<f64> {
        DemandedFmap { id: NodeId(id), pos: Vec3::new(x, y, z), demand_bps: 1.0, target_snr_db: target }
    }

    #[test]
    fn fair_share_examples() {
        assert_eq!(fair_share(780e6, 4).unwrap(), 195e6);
        assert_eq!(fair_share(780e6, 1).unwrap(), 780e6);
        assert!(fair_share(780e6, 0).is_err());
        assert_eq!(0.25 * 195e6, 48.75e6);
        assert_eq!(0.75 * 195e6, 146.25e6);
    }

    #[test]
    fn d_max_examples() {
        let b = LinkBudget::<f64>::default();
        assert!((d_max(&b, 22.0, 35.0) - 18.1031).abs() < 1e-3);
        assert!((d_max(&b, 42.0, 35.0) / d_max(&b, 22.0, 35.0) - 10.0).abs() < 1e-9);
        let k = b.budget_constant_db();
        assert!((d_max(&b, 3.0, k + 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn occupancy_examples() {
        let occ = channel_occupancy::<f64>(&[48.75, 48.75, 146.25, 146.25], &[234.0, 234.0, 702.0, 702.0]).unwrap();
        assert!((occ - 0.8333).abs() < 5e-4);
        assert_eq!(channel_occupancy(&[0.0, 0.0], &[234.0, 702.0]).unwrap(), 0.0);
        assert_eq!(channel_occupancy(&[234.0], &[234.0]).unwrap(), 1.0);
        assert!(channel_occupancy(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn single_fmap_is_feasible_near_it() {
        let cfg = GwpConfig::new(Vec3::new(20.0, 20.0, 20.0));
        let f = [fmap(1, 10.0, 10.0, 10.0, 35.0)];
        let p = feasible_point(&f, &LinkBudget::default(), 10.0, &cfg).unwrap().unwrap();
        assert!(p.residual < 0.0);
        assert!(p.pos.distance(&f[0].pos) >= FMAP_EXCLUSION_RADIUS);
    }

    #[test]
    fn disjoint_balls_are_infeasible() {
        let b = LinkBudget::<f64>::default();
        // power giving d_max = 14 m at 35 dB
        let p = 35.0 - b.budget_constant_db() + 20.0 * 14f64.log10();
        assert!((d_max(&b, p, 35.0) - 14.0).abs() < 1e-9);
        let cfg = GwpConfig::new(Vec3::new(40.0, 10.0, 20.0));
        let f = [fmap(1, 5.0, 5.0, 10.0, 35.0), fmap(2, 35.0, 5.0, 10.0, 35.0)];
        assert!(feasible_point(&f, &b, p, &cfg).unwrap().is_none());
        let best = best_point(&f, &b, p, &cfg, None).unwrap();
        assert!((best.residual - 1.0).abs() < 1e-3, "{}", best.residual);
    }

    #[test]
    fn zero_demand_step_power_start() {
        let cfg = GwpConfig::new(Vec3::new(20.0, 20.0, 20.0));
        let f = [(NodeId(1), Vec3::new(10.0, 10.0, 10.0), 1e6)];
        let s = gwp_algorithm(&f, &McsTable::default(), 1, &LinkBudget::default(), &cfg).unwrap();
        assert_eq!(s.tx_power_dbm, 0.0);
    }

    #[test]
    fn power_cap_reports_infeasible_deployment() {
        let mut cfg = GwpConfig::new(Vec3::new(200.0, 10.0, 20.0));
        cfg.power_max_dbm = 5.0;
        let f = [fmap(1, 0.0, 5.0, 10.0, 35.0), fmap(2, 200.0, 5.0, 10.0, 35.0)];
        assert!(matches!(
            gwp_solve(&f, &LinkBudget::default(), &cfg, None),
            Err(Error::InfeasibleDeployment { max_power_dbm }) if max_power_dbm == 5.0
        ));
    }

    #[test]
    fn invalid_configs() {
        let f = [fmap(1, 1.0, 1.0, 1.0, 20.0)];
        let b = LinkBudget::<f64>::default();
        assert!(best_point(&f, &b, 0.0, &GwpConfig::new(Vec3::new(0.0, 1.0, 1.0)), None).is_err());
        let mut cfg = GwpConfig::new(Vec3::new(1.0, 1.0, 1.0));
        cfg.power_step_dbm = 0.0;
        assert!(gwp_solve(&f, &b, &cfg, None).is_err());
        assert!(best_point(&[], &b, 0.0, &GwpConfig::new(Vec3::new(1.0, 1.0, 1.0)), None).is_err());
        let demand = [(NodeId(1), Vec3::new(1.0, 1.0, 1.0), 0.0)];
        assert!(assign_targets(&demand, &McsTable::default(), 1).is_err());
        let demand = [(NodeId(1), Vec3::new(1.0, 1.0, 1.0), 1e9)];
        assert!(matches!(assign_targets(&demand, &McsTable::default(), 1), Err(Error::InfeasibleDemand(_))));
    }

    #[test]
    fn axis_includes_end() {
        assert_eq!(axis(0.0, 2.5, 1.0), vec![0.0, 1.0, 2.0, 2.5]);
        assert_eq!(axis(0.0, 2.0, 1.0), vec![0.0, 1.0, 2.0]);
    }
}
