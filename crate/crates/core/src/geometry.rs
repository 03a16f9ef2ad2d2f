//! Positions, time discretization, node identity and piecewise-linear trajectories.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Point or displacement in 3D space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    /// Distance measured in the horizontal (x, y) plane only.
    pub fn horizontal_distance(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn xy(&self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    /// Linear interpolation, `s = 0` gives `self`, `s = 1` gives `other`.
    pub fn lerp(&self, other: &Self, s: T) -> Self {
        *self + (*other - *self) * s
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> fmt::Display for Vec3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Euclidean distance between two points.
pub fn distance<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a.distance(b)
}

/// Horizontal vector, used for forces and displacements in the placement plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> AddAssign for Vec2<T> {
    fn add_assign(&mut self, o: Self) {
        self.x = self.x + o.x;
        self.y = self.y + o.y;
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Uniform time grid `t_k = t0 + k * dt`, `k = 0 .. steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    pub t0: T,
    pub dt: T,
    pub steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t0: T, dt: T, steps: usize) -> Result<Self> {
        let grid = Self { t0, dt, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("time grid needs at least one step"));
        }
        if !self.t0.is_finite() {
            return Err(Error::invalid("time origin must be finite"));
        }
        Ok(())
    }

    pub fn instant(&self, k: usize) -> T {
        self.t0 + self.dt * T::from_usize(k).unwrap()
    }

    pub fn instants(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.steps).map(move |k| self.instant(k))
    }

    /// Time of the last instant.
    pub fn end(&self) -> T {
        self.instant(self.steps - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Fmap,
    Gw,
    Ue,
}

/// A node identity together with its role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

impl Node {
    pub fn new(id: u32, kind: NodeKind) -> Self {
        Self { id: NodeId(id), kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint<T> {
    pub t: T,
    pub pos: Vec3<T>,
}

/// Piecewise-linear motion through time-stamped waypoints.
///
/// Before the first waypoint and after the last one the node holds position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    node: Node,
    waypoints: Vec<Waypoint<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(node: Node, waypoints: Vec<Waypoint<T>>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::invalid(format!("trajectory of node {} has no waypoints", node.id)));
        }
        for w in &waypoints {
            if !w.t.is_finite() || !w.pos.is_finite() {
                return Err(Error::invalid(format!("non-finite waypoint for node {}", node.id)));
            }
        }
        if let Some(pair) = waypoints.windows(2).find(|p| !(p[1].t > p[0].t)) {
            return Err(Error::invalid(format!(
                "waypoint times of node {} must strictly increase ({} then {})",
                node.id, pair[0].t, pair[1].t
            )));
        }
        Ok(Self { node, waypoints })
    }

    /// A node that never moves.
    pub fn stationary(node: Node, pos: Vec3<T>) -> Self {
        Self { node, waypoints: vec![Waypoint { t: T::zero(), pos }] }
    }

    /// Straight-line move from `from` to `to` at constant `speed`, starting at `t_start`.
    pub fn straight(node: Node, from: Vec3<T>, to: Vec3<T>, t_start: T, speed: T) -> Result<Self> {
        if !(speed > T::zero()) {
            return Err(Error::invalid("speed must be positive"));
        }
        let len = from.distance(&to);
        let mut wps = vec![Waypoint { t: t_start, pos: from }];
        if len > T::zero() {
            wps.push(Waypoint { t: t_start + len / speed, pos: to });
        }
        Self::new(node, wps)
    }

    pub fn node(&self) -> Node {
        self.node
    }

    pub fn id(&self) -> NodeId {
        self.node.id
    }

    pub fn waypoints(&self) -> &[Waypoint<T>] {
        &self.waypoints
    }

    pub fn position_at(&self, t: T) -> Vec3<T> {
        let wps = &self.waypoints;
        let first = &wps[0];
        if t <= first.t {
            return first.pos;
        }
        let last = &wps[wps.len() - 1];
        if t >= last.t {
            return last.pos;
        }
        // first index whose time exceeds t; 1 <= hi < len
        let hi = wps.partition_point(|w| w.t <= t);
        let (a, b) = (&wps[hi - 1], &wps[hi]);
        let s = (t - a.t) / (b.t - a.t);
        a.pos.lerp(&b.pos, s)
    }

    /// Speed along each segment, in waypoint order.
    pub fn segment_speeds(&self) -> Vec<T> {
        self.waypoints.windows(2).map(|p| p[0].pos.distance(&p[1].pos) / (p[1].t - p[0].t)).collect()
    }
}

/// Position of `traj` at time `t`.
pub fn position_at<T: Real>(traj: &Trajectory<T>, t: T) -> Vec3<T> {
    traj.position_at(t)
}
