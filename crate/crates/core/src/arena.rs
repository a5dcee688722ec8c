//! Arena geometry, physical state types, and the mirror transform.
//!
//! Distances are in arena units (uu), velocities in uu/s. The coordinate
//! frame follows the usual field convention: x spans the side walls, y runs
//! from the blue goal (negative) to the orange goal (positive), z is up.
//! Blue always attacks the orange net. All geometry lives in
//! [`ArenaConstants`]; nothing else in the crate hardcodes field dimensions,
//! so alternate arenas are a config file away. Two constants are load-bearing
//! for reward normalization and are validated as exact: `car_max_speed` 2300
//! and `ball_max_speed` 6000.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Tolerance for unit-vector and orthogonality checks on orientations.
const ORIENTATION_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector, or `None` when the norm is exactly zero.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self * (1.0 / n))
        }
    }

    /// Reflection across the x-z plane (y negated). The arena is symmetric
    /// under this map with the team labels swapped.
    pub fn mirror_y(self) -> Vec3 {
        Vec3::new(self.x, -self.y, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rescale to `max_norm` if longer; exact zero stays zero.
    pub fn clamped_norm(self, max_norm: f64) -> Vec3 {
        let n = self.norm();
        if n > max_norm && n > 0.0 {
            self * (max_norm / n)
        } else {
            self
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Team {
    Blue,
    Orange,
}

impl Team {
    pub fn opponent(self) -> Team {
        match self {
            Team::Blue => Team::Orange,
            Team::Orange => Team::Blue,
        }
    }

    /// Sign of the y direction this team attacks: blue shoots toward +y.
    pub fn attack_sign(self) -> f64 {
        match self {
            Team::Blue => 1.0,
            Team::Orange => -1.0,
        }
    }
}

/// Rigid-body snapshot of the ball or a car body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysObject {
    pub position: Vec3,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
    /// Unit forward axis of the body frame.
    pub forward: Vec3,
    /// Unit up axis, orthogonal to `forward`.
    pub up: Vec3,
}

impl PhysObject {
    /// A body at rest at `position`, facing +x, upright.
    pub fn stationary_at(position: Vec3) -> Self {
        PhysObject {
            position,
            linear_velocity: Vec3::ZERO,
            angular_velocity: Vec3::ZERO,
            forward: Vec3::new(1.0, 0.0, 0.0),
            up: Vec3::new(0.0, 0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("position", self.position),
            ("linear_velocity", self.linear_velocity),
            ("angular_velocity", self.angular_velocity),
            ("forward", self.forward),
            ("up", self.up),
        ] {
            if !v.is_finite() {
                return Err(Error::State(format!("{name} is not finite")));
            }
        }
        if (self.forward.norm() - 1.0).abs() > ORIENTATION_EPS {
            return Err(Error::State("forward is not a unit vector".into()));
        }
        if (self.up.norm() - 1.0).abs() > ORIENTATION_EPS {
            return Err(Error::State("up is not a unit vector".into()));
        }
        if self.forward.dot(self.up).abs() > ORIENTATION_EPS {
            return Err(Error::State("forward and up are not orthogonal".into()));
        }
        Ok(())
    }

    fn mirrored(&self) -> Self {
        PhysObject {
            position: self.position.mirror_y(),
            linear_velocity: self.linear_velocity.mirror_y(),
            angular_velocity: self.angular_velocity.mirror_y(),
            forward: self.forward.mirror_y(),
            up: self.up.mirror_y(),
        }
    }
}

/// Signed displacement from `a` to `b`.
pub fn object_distance(a: &PhysObject, b: &PhysObject) -> Vec3 {
    b.position - a.position
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub body: PhysObject,
    /// Boost tank, 0 to 100.
    pub boost: f64,
    pub team: Team,
    pub on_ground: bool,
    pub has_flip: bool,
    pub demolished: bool,
}

impl PlayerState {
    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        if !self.boost.is_finite() || !(0.0..=100.0).contains(&self.boost) {
            return Err(Error::State(format!("boost {} outside [0, 100]", self.boost)));
        }
        Ok(())
    }
}

/// Full game snapshot. Players are grouped blue-first; `tick` counts agent
/// steps since episode start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub ball: PhysObject,
    pub players: Vec<PlayerState>,
    pub tick: u64,
}

impl GameState {
    pub fn team_indices(&self, team: Team) -> Vec<usize> {
        self.players
            .iter()
            .enumerate()
            .filter(|(_, p)| p.team == team)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn team_count(&self, team: Team) -> usize {
        self.players.iter().filter(|p| p.team == team).count()
    }

    /// Checks finiteness, orientation sanity, boost range, blue-first player
    /// grouping, and ball position within the arena (goal depth included).
    pub fn validate(&self, arena: &ArenaConstants) -> Result<()> {
        self.ball.validate()?;
        let p = self.ball.position;
        if p.x.abs() > arena.half_width_x
            || p.y.abs() > arena.half_length_y + arena.goal_depth
            || p.z < 0.0
            || p.z > arena.ceiling_z
        {
            return Err(Error::State(format!(
                "ball position ({}, {}, {}) outside arena",
                p.x, p.y, p.z
            )));
        }
        let mut seen_orange = false;
        for (i, player) in self.players.iter().enumerate() {
            player
                .validate()
                .map_err(|e| Error::State(format!("player {i}: {e}")))?;
            match player.team {
                Team::Orange => seen_orange = true,
                Team::Blue if seen_orange => {
                    return Err(Error::State(format!(
                        "player {i} is blue after an orange player; players must be grouped blue-first"
                    )));
                }
                Team::Blue => {}
            }
        }
        Ok(())
    }
}

/// Field geometry plus the two normalization speeds.
///
/// Defaults match the standard field. `goal_line_y` must equal
/// `half_length_y`, and the two max speeds are exact contract values used to
/// normalize reward components; [`ArenaConstants::validate`] enforces both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArenaConstants {
    pub half_width_x: f64,
    pub half_length_y: f64,
    pub ceiling_z: f64,
    pub goal_line_y: f64,
    pub goal_half_width: f64,
    pub goal_height: f64,
    /// Distance from the goal line to the back of the net.
    pub goal_depth: f64,
    /// Anchor point at the back of the blue net, used by distance utilities.
    pub back_net_blue: Vec3,
    pub back_net_orange: Vec3,
    /// Goal mouth center on the blue goal line.
    pub goal_center_blue: Vec3,
    pub goal_center_orange: Vec3,
    pub ball_radius: f64,
    /// Exact normalization constant for car velocities and distances: 2300.
    pub car_max_speed: f64,
    /// Exact normalization constant for ball velocities and distances: 6000.
    pub ball_max_speed: f64,
}

impl Default for ArenaConstants {
    fn default() -> Self {
        ArenaConstants {
            half_width_x: 4096.0,
            half_length_y: 5120.0,
            ceiling_z: 2044.0,
            goal_line_y: 5120.0,
            goal_half_width: 892.755,
            goal_height: 642.775,
            goal_depth: 880.0,
            back_net_blue: Vec3::new(0.0, -6000.0, 321.0),
            back_net_orange: Vec3::new(0.0, 6000.0, 321.0),
            goal_center_blue: Vec3::new(0.0, -5120.0, 321.0),
            goal_center_orange: Vec3::new(0.0, 5120.0, 321.0),
            ball_radius: 92.75,
            car_max_speed: 2300.0,
            ball_max_speed: 6000.0,
        }
    }
}

impl ArenaConstants {
    /// Back of the net this team defends.
    pub fn back_net(&self, team: Team) -> Vec3 {
        match team {
            Team::Blue => self.back_net_blue,
            Team::Orange => self.back_net_orange,
        }
    }

    /// Back of the net this team attacks.
    pub fn opponent_back_net(&self, team: Team) -> Vec3 {
        self.back_net(team.opponent())
    }

    /// Mouth center of the goal this team defends.
    pub fn goal_center(&self, team: Team) -> Vec3 {
        match team {
            Team::Blue => self.goal_center_blue,
            Team::Orange => self.goal_center_orange,
        }
    }

    pub fn opponent_goal_center(&self, team: Team) -> Vec3 {
        self.goal_center(team.opponent())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("half_width_x", self.half_width_x),
            ("half_length_y", self.half_length_y),
            ("ceiling_z", self.ceiling_z),
            ("goal_half_width", self.goal_half_width),
            ("goal_height", self.goal_height),
            ("goal_depth", self.goal_depth),
            ("ball_radius", self.ball_radius),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Parameter(format!("arena {name} must be positive, got {v}")));
            }
        }
        if self.goal_line_y != self.half_length_y {
            return Err(Error::Parameter(format!(
                "goal_line_y ({}) must equal half_length_y ({})",
                self.goal_line_y, self.half_length_y
            )));
        }
        if self.car_max_speed != 2300.0 {
            return Err(Error::Parameter(format!(
                "car_max_speed must be exactly 2300, got {}",
                self.car_max_speed
            )));
        }
        if self.ball_max_speed != 6000.0 {
            return Err(Error::Parameter(format!(
                "ball_max_speed must be exactly 6000, got {}",
                self.ball_max_speed
            )));
        }
        Ok(())
    }

    /// Reads the `[arena]` section of a TOML document, or the `"arena"` key
    /// of a JSON document. Missing fields keep their defaults; the result is
    /// validated. A document without the section yields the defaults.
    pub fn from_config_str(text: &str, format: ConfigFormat) -> Result<Self> {
        #[derive(Deserialize, Default)]
        #[serde(default)]
        struct Wrapper {
            arena: ArenaConstants,
        }
        let wrapper: Wrapper = match format {
            ConfigFormat::Toml => {
                toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
            }
            ConfigFormat::Json => {
                serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
            }
        };
        wrapper.arena.validate()?;
        Ok(wrapper.arena)
    }

    /// Loads from a file, inferring TOML or JSON from the extension
    /// (`.json` means JSON, anything else TOML).
    pub fn from_config_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ConfigFormat::Json,
            _ => ConfigFormat::Toml,
        };
        Self::from_config_str(&text, format)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Toml,
    Json,
}

/// Scoring team for a ball moving from `prev` to `now`, if that motion
/// crossed a goal line inside the goal mouth. Crossing +y scores for blue.
pub fn goal_crossing(prev: Vec3, now: Vec3, arena: &ArenaConstants) -> Option<Team> {
    let line = arena.goal_line_y;
    let in_mouth = now.x.abs() < arena.goal_half_width && now.z < arena.goal_height;
    if prev.y <= line && now.y > line && in_mouth {
        return Some(Team::Blue);
    }
    if prev.y >= -line && now.y < -line && in_mouth {
        return Some(Team::Orange);
    }
    None
}

/// The mirror transform: reflects every body across y=0, swaps team labels,
/// and regroups players blue-first. Applying it twice returns the original
/// state bit for bit. Every shipped reward component is invariant under it.
pub fn mirror_for_orange(state: &GameState) -> GameState {
    let mirror_player = |p: &PlayerState| PlayerState {
        body: p.body.mirrored(),
        boost: p.boost,
        team: p.team.opponent(),
        on_ground: p.on_ground,
        has_flip: p.has_flip,
        demolished: p.demolished,
    };
    let mut players = Vec::with_capacity(state.players.len());
    // Orange players become blue and move to the front, preserving order.
    for p in state.players.iter().filter(|p| p.team == Team::Orange) {
        players.push(mirror_player(p));
    }
    for p in state.players.iter().filter(|p| p.team == Team::Blue) {
        players.push(mirror_player(p));
    }
    GameState {
        ball: state.ball.mirrored(),
        players,
        tick: state.tick,
    }
}

/// Index of player `index` after [`mirror_for_orange`] regroups the roster.
pub fn mirrored_player_index(state: &GameState, index: usize) -> usize {
    let team = state.players[index].team;
    let rank = state.players[..index]
        .iter()
        .filter(|p| p.team == team)
        .count();
    match team {
        // Orange players land at the front of the mirrored roster.
        Team::Orange => rank,
        Team::Blue => state.team_count(Team::Orange) + rank,
    }
}
