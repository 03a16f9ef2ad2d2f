use rand_core::Rng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Node, NodeKind, Trajectory, Vec3, Waypoint};
use crate::num::Real;

/// Random waypoint mobility inside `[0, X] x [0, Y] x [0, Z]`.
///
/// Node 0 is the gateway, nodes `1..n_nodes` are FMAPs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwmConfig<T> {
    pub bounds: Vec3<T>,
    pub n_nodes: u32,
    pub v_min: T,
    pub v_max: T,
    /// Hold time at each destination, seconds.
    pub pause: T,
    pub duration: T,
    pub seed: u64,
    /// Keep the gateway at its initial position.
    #[serde(default)]
    pub pin_gw: bool,
}

impl<T: Real> RwmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let b = self.bounds;
        if !(b.x > T::zero() && b.y > T::zero() && b.z > T::zero()) || !b.is_finite() {
            return Err(Error::invalid(format!("mobility box must have positive sides, got {b}")));
        }
        if self.n_nodes == 0 {
            return Err(Error::invalid("at least one node is required"));
        }
        if !(self.v_min > T::zero() && self.v_min <= self.v_max) || !self.v_max.is_finite() {
            return Err(Error::invalid(format!("need 0 < v_min <= v_max, got {} and {}", self.v_min, self.v_max)));
        }
        if !(self.pause >= T::zero()) || !self.pause.is_finite() {
            return Err(Error::invalid("pause must be non-negative"));
        }
        if !(self.duration > T::zero()) || !self.duration.is_finite() {
            return Err(Error::invalid("duration must be positive"));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer, used to spread a user seed over the generator state.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator of node `id`: PCG64 (XSL-RR 128/64) with state `splitmix64(seed)` and
/// stream `id`.
pub fn node_rng(seed: u64, id: u32) -> Pcg64 {
    Pcg64::new(u128::from(splitmix64(seed)), u128::from(id))
}

/// Uniform draw in `[0, 1)` from the top 53 bits of the next output.
pub fn unit(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform<T: Real>(rng: &mut Pcg64, lo: T, hi: T) -> T {
    lo + (hi - lo) * T::lit(unit(rng))
}

fn point<T: Real>(rng: &mut Pcg64, b: Vec3<T>) -> Vec3<T> {
    let x = uniform(rng, T::zero(), b.x);
    let y = uniform(rng, T::zero(), b.y);
    let z = uniform(rng, T::zero(), b.z);
    Vec3::new(x, y, z)
}

/// One trace per node. Each node starts at a uniform point, then repeatedly travels in a
/// straight line to a uniform destination at a uniform speed in `[v_min, v_max]` and
/// pauses there. Traces end exactly at `duration`.
pub fn generate_rwm<T: Real>(cfg: &RwmConfig<T>) -> Result<Vec<Trajectory<T>>> {
    cfg.validate()?;
    (0..cfg.n_nodes)
        .map(|id| {
            let kind = if id == 0 { NodeKind::Gw } else { NodeKind::Fmap };
            let node = Node::new(id, kind);
            let mut rng = node_rng(cfg.seed, id);
            let start = point(&mut rng, cfg.bounds);
            if id == 0 && cfg.pin_gw {
                return Ok(Trajectory::stationary(node, start));
            }
            Trajectory::new(node, walk(&mut rng, cfg, start))
        })
        .collect()
}

fn walk<T: Real>(rng: &mut Pcg64, cfg: &RwmConfig<T>, start: Vec3<T>) -> Vec<Waypoint<T>> {
    let mut wps = vec![Waypoint { t: T::zero(), pos: start }];
    let mut t = T::zero();
    let mut pos = start;
    while t < cfg.duration {
        let dest = point(rng, cfg.bounds);
        let speed = uniform(rng, cfg.v_min, cfg.v_max);
        let len = pos.distance(&dest);
        if !(len > T::zero()) {
            continue;
        }
        let arrive = t + len / speed;
        if arrive >= cfg.duration {
            let s = (cfg.duration - t) / (arrive - t);
            wps.push(Waypoint { t: cfg.duration, pos: pos.lerp(&dest, s) });
            break;
        }
        wps.push(Waypoint { t: arrive, pos: dest });
        t = arrive;
        pos = dest;
        if cfg.pause > T::zero() {
            t = (t + cfg.pause).min(cfg.duration);
            wps.push(Waypoint { t, pos });
        }
    }
    wps
}
