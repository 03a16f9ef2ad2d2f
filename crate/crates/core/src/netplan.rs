//! Potential-field placement of flying access points.
//!
//! Every zone of the map carries an attractive generator whose intensity grows with the
//! zone's offered traffic and with its lack of coverage; every FMAP carries a rejective
//! generator that pushes the other FMAPs away. One update cycle moves each FMAP by
//! `K_s` times the resulting force and recomputes its Wi-Fi cell range.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NodeId, Vec2, Vec3};
use crate::num::Real;

/// Separation substituted for the distance between coincident FMAPs, meters.
pub const COINCIDENT_SEPARATION: f64 = 0.1;

/// Lower bound of the Wi-Fi cell range, meters.
pub const MIN_CELL_RANGE: f64 = 1.0;

/// Rectangular map split into square zones, each with an aggregate offered throughput.
///
/// Zones are stored row-major: index `iy * nx + ix`, zone `(0, 0)` at the origin corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneGrid<T> {
    #[serde(default)]
    origin: Vec2<T>,
    cov_x: T,
    cov_y: T,
    zone_len: T,
    nx: usize,
    ny: usize,
    demand: Vec<T>,
}

impl<T: Real> ZoneGrid<T> {
    pub fn new(cov_x: T, cov_y: T, zone_len: T) -> Result<Self> {
        if !(zone_len > T::zero()) || !(cov_x > T::zero()) || !(cov_y > T::zero()) {
            return Err(Error::invalid("map and zone sizes must be positive"));
        }
        let nx = whole_zones(cov_x, zone_len)?;
        let ny = whole_zones(cov_y, zone_len)?;
        Ok(Self { origin: Vec2::zero(), cov_x, cov_y, zone_len, nx, ny, demand: vec![T::zero(); nx * ny] })
    }

    pub fn with_demand(mut self, demand: Vec<T>) -> Result<Self> {
        if demand.len() != self.zone_count() {
            return Err(Error::invalid(format!("expected {} zone demands, got {}", self.zone_count(), demand.len())));
        }
        if demand.iter().any(|d| !(*d >= T::zero()) || !d.is_finite()) {
            return Err(Error::invalid("zone demand must be finite and non-negative"));
        }
        self.demand = demand;
        Ok(self)
    }

    /// Moves the map so that its lower corner sits at `(x, y)`.
    pub fn with_origin(mut self, x: T, y: T) -> Self {
        self.origin = Vec2::new(x, y);
        self
    }

    pub fn origin(&self) -> Vec2<T> {
        self.origin
    }

    pub fn cov_x(&self) -> T {
        self.cov_x
    }

    pub fn cov_y(&self) -> T {
        self.cov_y
    }

    pub fn zone_len(&self) -> T {
        self.zone_len
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn zone_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn demand(&self) -> &[T] {
        &self.demand
    }

    pub fn index(&self, ix: usize, iy: usize) -> Option<usize> {
        (ix < self.nx && iy < self.ny).then(|| iy * self.nx + ix)
    }

    pub fn set_demand(&mut self, ix: usize, iy: usize, offered_bps: T) -> Result<()> {
        let z = self.index(ix, iy).ok_or_else(|| Error::invalid(format!("zone ({ix}, {iy}) outside a {}x{} grid", self.nx, self.ny)))?;
        if !(offered_bps >= T::zero()) {
            return Err(Error::invalid("zone demand must be non-negative"));
        }
        self.demand[z] = offered_bps;
        Ok(())
    }

    /// Centre of zone `z` on the ground plane.
    pub fn zone_center(&self, z: usize) -> Vec3<T> {
        let half = T::lit(0.5);
        let ix = T::from_usize(z % self.nx).unwrap();
        let iy = T::from_usize(z / self.nx).unwrap();
        Vec3::new(self.origin.x + (ix + half) * self.zone_len, self.origin.y + (iy + half) * self.zone_len, T::zero())
    }

    /// Zone containing `(x, y)`; points on the far map edges belong to the last zone.
    pub fn zone_of(&self, x: T, y: T) -> Option<usize> {
        let (x, y) = (x - self.origin.x, y - self.origin.y);
        if !(x >= T::zero() && x <= self.cov_x && y >= T::zero() && y <= self.cov_y) {
            return None;
        }
        let ix = (x / self.zone_len).floor().to_usize().unwrap_or(0).min(self.nx - 1);
        let iy = (y / self.zone_len).floor().to_usize().unwrap_or(0).min(self.ny - 1);
        self.index(ix, iy)
    }

    /// Reads `zone_x_index,zone_y_index,offered_bps` rows; zones not listed keep zero demand.
    pub fn read_demand_csv<R: Read>(cov_x: T, cov_y: T, zone_len: T, reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            zone_x_index: usize,
            zone_y_index: usize,
            offered_bps: f64,
        }
        let mut grid = Self::new(cov_x, cov_y, zone_len)?;
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        for row in rdr.deserialize::<Row>() {
            let row = row?;
            grid.set_demand(row.zone_x_index, row.zone_y_index, T::lit(row.offered_bps))?;
        }
        Ok(grid)
    }
}

fn whole_zones<T: Real>(len: T, zone_len: T) -> Result<usize> {
    let n = (len / zone_len).round();
    let tol = T::lit(1e-9) * len.max(T::one());
    if n < T::one() || (n * zone_len - len).abs() > tol {
        return Err(Error::invalid(format!("map side {len} is not a multiple of zone length {zone_len}")));
    }
    Ok(n.to_usize().unwrap())
}

/// Calibration constants of the placement model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetPlanConfig<T> {
    pub k_afg_t: T,
    pub k_afg_c: T,
    /// Weight of the offered throughput, per bit/s.
    pub k_afg_t_t: T,
    pub k_afg_t_min: T,
    pub k_rfg_t: T,
    pub k_rfg_c: T,
    pub k_fa: T,
    pub k_fr: T,
    pub k_s: T,
    pub k_r: T,
    /// Demand clamp `T_Max`, bit/s.
    pub t_max: T,
    /// Mean Wi-Fi cell range, meters.
    pub r_mean: T,
    /// Update period, seconds.
    pub t_netplan: T,
    /// Hovering altitude of the FMAPs, meters.
    pub altitude: T,
}

impl<T: Real> NetPlanConfig<T> {
    /// Profile `desk-100m`, calibrated for a 100 m x 100 m map of 10 m zones with up to
    /// 100 Mbit/s per zone. With three FMAPs the largest per-cycle displacement stays below 10 m.
    pub fn desk_profile() -> Self {
        Self {
            k_afg_t: T::one(),
            k_afg_c: T::lit(0.02),
            k_afg_t_t: T::lit(1e-8),
            k_afg_t_min: T::lit(0.01),
            k_rfg_t: T::one(),
            k_rfg_c: T::one(),
            k_fa: T::one(),
            k_fr: T::lit(5e4),
            k_s: T::lit(0.015),
            k_r: T::lit(200.0),
            t_max: T::lit(100e6),
            r_mean: T::lit(25.0),
            t_netplan: T::lit(10.0),
            altitude: T::lit(10.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_netplan >= T::one()) {
            return Err(Error::invalid("the update period must be at least 1 s"));
        }
        if !(self.r_mean > T::zero()) {
            return Err(Error::invalid("mean cell range must be positive"));
        }
        if !(self.t_max > T::zero()) {
            return Err(Error::invalid("demand clamp must be positive"));
        }
        Ok(())
    }
}

/// Name of the profile returned by [`NetPlanConfig::desk_profile`].
pub const DESK_PROFILE: &str = "desk-100m";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmapState<T> {
    pub id: NodeId,
    pub pos: Vec3<T>,
    pub cell_range: T,
}

impl<T: Real> FmapState<T> {
    pub fn new(id: u32, x: T, y: T, altitude: T, cell_range: T) -> Self {
        Self { id: NodeId(id), pos: Vec3::new(x, y, altitude), cell_range }
    }
}

/// `r_u - d_zu`, with `d_zu` the horizontal distance between FMAP and zone centre.
pub fn coverage_margin<T: Real>(fmap: &FmapState<T>, zone_center: &Vec3<T>) -> T {
    fmap.cell_range - fmap.pos.horizontal_distance(zone_center)
}

/// Coverage component of the attractive generator, from the best margin `m_z` over all FMAPs.
pub fn afg_coverage<T: Real>(m_z: T, zone_len: T) -> T {
    if m_z <= T::zero() {
        T::one()
    } else if m_z >= zone_len {
        T::zero()
    } else {
        T::one() - m_z / zone_len
    }
}

/// Traffic component `AFG^T_z`, with `t_z` clamped to `[0, T_Max]`.
pub fn afg_traffic<T: Real>(cfg: &NetPlanConfig<T>, t_z: T) -> T {
    let t = t_z.max(T::zero()).min(cfg.t_max);
    cfg.k_afg_t_t * t + cfg.k_afg_t_min
}

/// Total attractive intensity of a zone.
pub fn afg_intensity<T: Real>(cfg: &NetPlanConfig<T>, t_z: T, afg_c: T) -> T {
    cfg.k_afg_t * afg_traffic(cfg, t_z) + cfg.k_afg_c * afg_c
}

/// Rejective intensity of one FMAP, with its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfgIntensity<T> {
    /// Global mean of `AFG^T` minus the mean over the zones the FMAP covers.
    pub traffic: T,
    /// Global mean of `AFG^T`.
    pub mean: T,
    pub total: T,
}

pub fn rfg_intensity<T: Real>(cfg: &NetPlanConfig<T>, grid: &ZoneGrid<T>, fmap: &FmapState<T>, all_afg_t: &[T]) -> Result<RfgIntensity<T>> {
    if all_afg_t.len() != grid.zone_count() {
        return Err(Error::invalid("AFG^T values must cover every zone"));
    }
    let mean = mean(all_afg_t.iter().copied());
    let covered = all_afg_t.iter().enumerate().filter(|(z, _)| coverage_margin(fmap, &grid.zone_center(*z)) >= T::zero()).map(|(_, v)| *v);
    let traffic = match mean_opt(covered) {
        Some(covered_mean) => mean - covered_mean,
        None => T::zero(),
    };
    Ok(RfgIntensity { traffic, mean, total: cfg.k_rfg_t * traffic + cfg.k_rfg_c * mean })
}

/// Pull of zone generator `afg_z` on an FMAP: `K_FA * AFG_z * d_zu`, towards the zone centre.
pub fn attractive_force<T: Real>(cfg: &NetPlanConfig<T>, afg_z: T, zone_center: &Vec3<T>, fmap_pos: &Vec3<T>) -> Vec2<T> {
    // magnitude * unit vector == K_FA * AFG * (centre - pos), zero when they coincide
    (zone_center.xy() - fmap_pos.xy()) * (cfg.k_fa * afg_z)
}

/// Push of FMAP `i` (intensity `rfg_i`) on FMAP `u`: `K_FR * RFG_i / d_iu`, directed from `i` through `u`.
///
/// Coincident FMAPs use `d = COINCIDENT_SEPARATION` along +x when `u_after_i`, -x otherwise.
pub fn rejective_force<T: Real>(cfg: &NetPlanConfig<T>, rfg_i: T, pos_i: &Vec3<T>, pos_u: &Vec3<T>, u_after_i: bool) -> Vec2<T> {
    let eps = T::lit(COINCIDENT_SEPARATION);
    let delta = pos_u.xy() - pos_i.xy();
    let d = delta.norm();
    let (dir, d) = if d > T::zero() {
        (delta * d.recip(), d.max(eps))
    } else if u_after_i {
        (Vec2::new(T::one(), T::zero()), eps)
    } else {
        (Vec2::new(-T::one(), T::zero()), eps)
    };
    dir * (cfg.k_fr * rfg_i / d)
}

/// Generator intensities for one snapshot of the map and the FMAPs.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField<T> {
    pub afg_t: Vec<T>,
    pub afg_c: Vec<T>,
    pub afg: Vec<T>,
    pub rfg: Vec<RfgIntensity<T>>,
}

impl<T: Real> PotentialField<T> {
    pub fn compute(cfg: &NetPlanConfig<T>, grid: &ZoneGrid<T>, fmaps: &[FmapState<T>]) -> Result<Self> {
        let centers: Vec<_> = (0..grid.zone_count()).map(|z| grid.zone_center(z)).collect();
        let afg_t: Vec<T> = grid.demand().iter().map(|t| afg_traffic(cfg, *t)).collect();
        let afg_c: Vec<T> = centers
            .iter()
            .map(|c| {
                let m_z = fmaps.iter().map(|f| coverage_margin(f, c)).fold(T::neg_infinity(), T::max);
                afg_coverage(m_z, grid.zone_len())
            })
            .collect();
        let afg = afg_t.iter().zip(&afg_c).map(|(t, c)| cfg.k_afg_t * *t + cfg.k_afg_c * *c).collect();
        let rfg = fmaps.iter().map(|f| rfg_intensity(cfg, grid, f, &afg_t)).collect::<Result<_>>()?;
        Ok(Self { afg_t, afg_c, afg, rfg })
    }

    /// Sum of every attractive force and the rejective forces of all other FMAPs on FMAP `u`.
    pub fn net_force(&self, cfg: &NetPlanConfig<T>, grid: &ZoneGrid<T>, fmaps: &[FmapState<T>], u: usize) -> Vec2<T> {
        let pos_u = &fmaps[u].pos;
        let mut f = Vec2::zero();
        for (z, afg) in self.afg.iter().enumerate() {
            f += attractive_force(cfg, *afg, &grid.zone_center(z), pos_u);
        }
        for (i, other) in fmaps.iter().enumerate() {
            if i != u {
                f += rejective_force(cfg, self.rfg[i].total, &other.pos, pos_u, u > i);
            }
        }
        f
    }
}

/// Resulting force on FMAP `u`.
pub fn net_force<T: Real>(cfg: &NetPlanConfig<T>, grid: &ZoneGrid<T>, fmaps: &[FmapState<T>], u: usize) -> Result<Vec2<T>> {
    if u >= fmaps.len() {
        return Err(Error::invalid(format!("FMAP index {u} out of range")));
    }
    Ok(PotentialField::compute(cfg, grid, fmaps)?.net_force(cfg, grid, fmaps, u))
}

/// One update cycle: displace each FMAP by `K_s * F_u` (clamped to the map) and set its
/// cell range to `R_Mean + K_r * RFG^T_u`, floored at [`MIN_CELL_RANGE`].
pub fn netplan_step<T: Real>(cfg: &NetPlanConfig<T>, grid: &ZoneGrid<T>, fmaps: &[FmapState<T>]) -> Result<Vec<FmapState<T>>> {
    cfg.validate()?;
    if fmaps.is_empty() {
        return Err(Error::invalid("at least one FMAP is required"));
    }
    let field = PotentialField::compute(cfg, grid, fmaps)?;
    let next = (0..fmaps.len())
        .into_par_iter()
        .map(|u| {
            let s = field.net_force(cfg, grid, fmaps, u) * cfg.k_s;
            let old = &fmaps[u];
            let o = grid.origin();
            let x = (old.pos.x + s.x).max(o.x).min(o.x + grid.cov_x());
            let y = (old.pos.y + s.y).max(o.y).min(o.y + grid.cov_y());
            let r = (cfg.r_mean + cfg.k_r * field.rfg[u].traffic).max(T::lit(MIN_CELL_RANGE));
            FmapState { id: old.id, pos: Vec3::new(x, y, old.pos.z), cell_range: r }
        })
        .collect();
    Ok(next)
}

/// Runs `steps` cycles and returns every intermediate state, initial state first.
pub fn run_netplan<T: Real>(
    cfg: &NetPlanConfig<T>,
    grid: &ZoneGrid<T>,
    fmaps: &[FmapState<T>],
    steps: usize,
) -> Result<Vec<Vec<FmapState<T>>>> {
    let mut history = Vec::with_capacity(steps + 1);
    history.push(fmaps.to_vec());
    for _ in 0..steps {
        let next = netplan_step(cfg, grid, history.last().unwrap())?;
        history.push(next);
    }
    Ok(history)
}

fn mean<T: Real>(it: impl Iterator<Item = T>) -> T {
    mean_opt(it).unwrap_or_else(T::zero)
}

fn mean_opt<T: Real>(it: impl Iterator<Item = T>) -> Option<T> {
    let (sum, n) = it.fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / T::from_usize(n).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones() -> NetPlanConfig<f64> {
        NetPlanConfig {
            k_afg_t: 1.0,
            k_afg_c: 1.0,
            k_afg_t_t: 1.0,
            k_afg_t_min: 1.0,
            k_rfg_t: 1.0,
            k_rfg_c: 1.0,
            k_fa: 1.0,
            k_fr: 1.0,
            k_s: 1.0,
            k_r: 1.0,
            t_max: 100.0,
            r_mean: 20.0,
            t_netplan: 10.0,
            altitude: 10.0,
        }
    }

    fn fmap(x: f64, y: f64, r: f64) -> FmapState<f64> {
        FmapState::new(1, x, y, 10.0, r)
    }

    #[test]
    fn coverage_margin_examples() {
        let c = Vec3::new(5.0, 0.0, 0.0);
        assert_eq!(coverage_margin(&fmap(0.0, 0.0, 20.0), &c), 15.0);
        assert_eq!(coverage_margin(&fmap(-15.0, 0.0, 20.0), &c), 0.0);
        assert_eq!(coverage_margin(&fmap(-20.0, 0.0, 10.0), &c), -15.0);
    }

    #[test]
    fn coverage_branches() {
        assert_eq!(afg_coverage(-3.0, 10.0), 1.0);
        assert_eq!(afg_coverage(0.0, 10.0), 1.0);
        assert_eq!(afg_coverage(10.0, 10.0), 0.0);
        assert_eq!(afg_coverage(5.0, 10.0), 0.5);
    }

    #[test]
    fn afg_intensity_examples() {
        let cfg = ones();
        let mut cfg0 = cfg;
        cfg0.k_afg_t = 2.0;
        cfg0.k_afg_t_min = 0.25;
        assert_eq!(afg_intensity(&cfg0, 0.0, 0.0), 0.5);
        assert_eq!(afg_intensity(&cfg, cfg.t_max + 1.0, 0.3), afg_intensity(&cfg, cfg.t_max, 0.3));
        assert_eq!(afg_intensity(&cfg, 10.0, 0.5), 11.5);
    }

    #[test]
    fn rfg_examples() {
        let cfg = ones();
        let grid = ZoneGrid::new(30.0, 30.0, 10.0).unwrap();
        let uniform = vec![2.0; 9];
        let f = fmap(15.0, 15.0, 6.0);
        assert_eq!(rfg_intensity(&cfg, &grid, &f, &uniform).unwrap().traffic, 0.0);

        // FMAP covering only the centre zone, which has the highest AFG^T
        let mut peaked = vec![1.0; 9];
        peaked[4] = 10.0;
        let r = rfg_intensity(&cfg, &grid, &f, &peaked).unwrap();
        assert!(r.traffic < 0.0);
        assert_eq!(r.traffic, 2.0 - 10.0);

        // covers nothing
        let far = fmap(10.0, 10.0, 1.0);
        let r = rfg_intensity(&cfg, &grid, &far, &peaked).unwrap();
        assert_eq!(r.traffic, 0.0);
        assert_eq!(r.total, cfg.k_rfg_c * 2.0);
        assert!(rfg_intensity(&cfg, &grid, &far, &peaked[..3]).is_err());
    }

    #[test]
    fn attractive_force_examples() {
        let cfg = ones();
        let c = Vec3::new(10.0, 0.0, 0.0);
        assert_eq!(attractive_force(&cfg, 2.0, &c, &Vec3::new(10.0, 0.0, 10.0)), Vec2::zero());
        assert_eq!(attractive_force(&cfg, 2.0, &c, &Vec3::new(0.0, 0.0, 10.0)), Vec2::new(20.0, 0.0));
        let near = attractive_force(&cfg, 2.0, &c, &Vec3::new(5.0, 0.0, 10.0)).norm();
        let far = attractive_force(&cfg, 2.0, &c, &Vec3::new(0.0, 0.0, 10.0)).norm();
        assert_eq!(far, 2.0 * near);
    }

    #[test]
    fn rejective_force_examples() {
        let cfg = ones();
        let i = Vec3::new(0.0, 0.0, 10.0);
        let u = Vec3::new(5.0, 0.0, 10.0);
        assert_eq!(rejective_force(&cfg, 5.0, &i, &u, true), Vec2::new(1.0, 0.0));
        let half = rejective_force(&cfg, 5.0, &i, &Vec3::new(2.5, 0.0, 10.0), true);
        assert_eq!(half, Vec2::new(2.0, 0.0));
        let on_u = rejective_force(&cfg, 3.0, &i, &u, true);
        let on_i = rejective_force(&cfg, 3.0, &u, &i, false);
        assert_eq!(on_u, -on_i);
    }

    #[test]
    fn coincident_fmaps_are_separated_not_infinite() {
        let cfg = ones();
        let p = Vec3::new(1.0, 1.0, 10.0);
        let a = rejective_force(&cfg, 1.0, &p, &p, true);
        let b = rejective_force(&cfg, 1.0, &p, &p, false);
        assert_eq!(a, Vec2::new(10.0, 0.0));
        assert_eq!(b, Vec2::new(-10.0, 0.0));
    }

    #[test]
    fn centred_fmap_on_uniform_grid_feels_no_force() {
        let cfg = ones();
        let grid = ZoneGrid::new(100.0, 100.0, 10.0).unwrap().with_demand(vec![5.0; 100]).unwrap();
        let f = net_force(&cfg, &grid, &[fmap(50.0, 50.0, 20.0)], 0).unwrap();
        assert!(f.norm() < 1e-9, "{f:?}");
    }

    #[test]
    fn no_generators_no_force() {
        let mut cfg = ones();
        cfg.k_afg_t_min = 0.0;
        cfg.k_afg_c = 0.0;
        let grid = ZoneGrid::new(100.0, 100.0, 10.0).unwrap();
        let f = net_force(&cfg, &grid, &[fmap(20.0, 70.0, 20.0)], 0).unwrap();
        assert_eq!(f, Vec2::zero());
    }

    #[test]
    fn mirrored_pair_gets_mirrored_forces() {
        let cfg = ones();
        let grid = ZoneGrid::new(100.0, 100.0, 10.0).unwrap().with_demand(vec![3.0; 100]).unwrap();
        let fmaps = [FmapState::new(1, 30.0, 40.0, 10.0, 20.0), FmapState::new(2, 70.0, 40.0, 10.0, 20.0)];
        let a = net_force(&cfg, &grid, &fmaps, 0).unwrap();
        let b = net_force(&cfg, &grid, &fmaps, 1).unwrap();
        assert!((a.x + b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9, "{a:?} {b:?}");
    }

    #[test]
    fn zero_force_fixed_point() {
        let mut cfg = ones();
        cfg.k_afg_t_min = 0.0;
        cfg.k_afg_c = 0.0;
        let grid = ZoneGrid::new(100.0, 100.0, 10.0).unwrap();
        let before = [fmap(20.0, 70.0, 3.0)];
        let after = netplan_step(&cfg, &grid, &before).unwrap();
        assert_eq!(after[0].pos, before[0].pos);
        assert_eq!(after[0].cell_range, cfg.r_mean);
    }

    #[test]
    fn positions_clamped_to_map() {
        let mut cfg = ones();
        cfg.k_s = 100.0;
        let grid = ZoneGrid::new(100.0, 100.0, 10.0).unwrap().with_demand(vec![1.0; 100]).unwrap();
        let after = netplan_step(&cfg, &grid, &[fmap(1.0, 99.0, 20.0)]).unwrap();
        let p = after[0].pos;
        assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
        assert_eq!(p.z, 10.0);
    }

    #[test]
    fn cell_range_floor() {
        let mut cfg = ones();
        cfg.k_r = 1e6;
        let mut grid = ZoneGrid::new(30.0, 30.0, 10.0).unwrap();
        grid.set_demand(1, 1, 50.0).unwrap();
        let after = netplan_step(&cfg, &grid, &[fmap(15.0, 15.0, 6.0)]).unwrap();
        assert_eq!(after[0].cell_range, MIN_CELL_RANGE);
    }

    #[test]
    fn grid_validation_and_csv() {
        assert!(ZoneGrid::new(95.0, 100.0, 10.0).is_err());
        let csv = "zone_x_index,zone_y_index,offered_bps\n7,7,25000000\n0,1,1e6\n";
        let g = ZoneGrid::<f64>::read_demand_csv(100.0, 100.0, 10.0, csv.as_bytes()).unwrap();
        assert_eq!(g.demand()[77], 25e6);
        assert_eq!(g.demand()[10], 1e6);
        assert_eq!(g.demand().iter().filter(|d| **d > 0.0).count(), 2);
        let bad = "zone_x_index,zone_y_index,offered_bps\n10,0,1\n";
        assert!(ZoneGrid::<f64>::read_demand_csv(100.0, 100.0, 10.0, bad.as_bytes()).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = NetPlanConfig::<f64>::desk_profile();
        assert!(cfg.validate().is_ok());
        cfg.t_netplan = 0.5;
        assert!(cfg.validate().is_err());
    }
}
