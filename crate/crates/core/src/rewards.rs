//! The reward component catalog.
//!
//! Every component maps a game state (plus, for event components, a set of
//! per-step event flags) to a scalar for one player. All continuous
//! components are normalized into [-1, 1] by the arena's exact max speeds,
//! and all of them are team-relative: the attacked net is chosen by the
//! player's team, so mirroring the state for orange (see
//! [`crate::arena::mirror_for_orange`]) leaves every value unchanged.
//!
//! The parameterized distance family follows
//! `exp(-0.5 * d / (c * dispersion))^(1 / density)`:
//! dispersion widens the length scale of the falloff, density flattens the
//! curve (larger density keeps the value higher at the same distance).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::arena::{ArenaConstants, GameState, PhysObject, PlayerState, Vec3};
use crate::error::{Error, Result};

/// Per-player event flags for one agent step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EventFlags {
    pub touch: bool,
    /// This player scored.
    pub goal: bool,
    /// This player's team was scored on.
    pub concede: bool,
    /// This player's team scored (regardless of who shot).
    pub team_goal: bool,
    pub shot: bool,
    pub save: bool,
    /// This player demolished an opponent.
    pub demolish: bool,
    /// This player was demolished.
    pub demolished: bool,
}

impl EventFlags {
    pub fn get(&self, kind: EventKind) -> bool {
        match kind {
            EventKind::Touch => self.touch,
            EventKind::Goal => self.goal,
            EventKind::Concede => self.concede,
            EventKind::TeamGoal => self.team_goal,
            EventKind::Shot => self.shot,
            EventKind::Save => self.save,
            EventKind::Demolish => self.demolish,
            EventKind::Demolished => self.demolished,
        }
    }

    /// Rejects combinations that cannot happen in one step for one player.
    pub fn validate(&self) -> Result<()> {
        if self.goal && self.concede {
            return Err(Error::State(
                "goal and concede cannot both be set for one player".into(),
            ));
        }
        if self.goal && !self.team_goal {
            return Err(Error::State("goal requires team_goal".into()));
        }
        if self.shot && !self.touch {
            return Err(Error::State("shot requires touch".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Touch,
    Goal,
    Concede,
    TeamGoal,
    Shot,
    Save,
    Demolish,
    Demolished,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::Touch,
        EventKind::Goal,
        EventKind::Concede,
        EventKind::TeamGoal,
        EventKind::Shot,
        EventKind::Save,
        EventKind::Demolish,
        EventKind::Demolished,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Touch => "touch",
            EventKind::Goal => "goal",
            EventKind::Concede => "concede",
            EventKind::TeamGoal => "team_goal",
            EventKind::Shot => "shot",
            EventKind::Save => "save",
            EventKind::Demolish => "demolish",
            EventKind::Demolished => "demolished",
        }
    }

    pub fn from_name(name: &str) -> Option<EventKind> {
        EventKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

/// Everything a component needs to evaluate for one player.
///
/// `events` holds one flag set per player; an empty slice means "no events
/// this step" (every flag reads false). `previous_state` is only consulted by
/// components that difference across the step.
#[derive(Clone, Copy)]
pub struct ComponentContext<'a> {
    pub state: &'a GameState,
    pub previous_state: Option<&'a GameState>,
    pub events: &'a [EventFlags],
    pub player_index: usize,
    pub arena: &'a ArenaConstants,
}

impl<'a> ComponentContext<'a> {
    pub fn player(&self) -> Result<&'a PlayerState> {
        self.state.players.get(self.player_index).ok_or_else(|| {
            Error::State(format!(
                "player index {} out of range for {} players",
                self.player_index,
                self.state.players.len()
            ))
        })
    }

    pub fn flags(&self) -> EventFlags {
        self.events
            .get(self.player_index)
            .copied()
            .unwrap_or_default()
    }
}

/// The distance-to-utility curve: `exp(-0.5 * d / (norm * dispersion))`
/// raised to `1 / density`. Both exponent steps collapse into a single
/// `exp`, which is what this computes.
pub fn parameterized_distance(distance: f64, norm: f64, dispersion: f64, density: f64) -> f64 {
    (-0.5 * distance / (norm * dispersion) / density).exp()
}

fn validate_curve_params(what: &str, dispersion: f64, density: f64) -> Result<()> {
    if !dispersion.is_finite() || dispersion <= 0.0 {
        return Err(Error::Parameter(format!(
            "{what} dispersion must be positive, got {dispersion}"
        )));
    }
    if !density.is_finite() || density <= 0.0 {
        return Err(Error::Parameter(format!(
            "{what} density must be positive, got {density}"
        )));
    }
    Ok(())
}

/// Cosine of the angle between two vectors; 0 when either is zero.
fn cos_between(a: Vec3, b: Vec3) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

fn ball_speed_toward(ball: &PhysObject, target: Vec3, max_speed: f64) -> f64 {
    let d = target - ball.position;
    let n = d.norm();
    if n == 0.0 {
        return 0.0;
    }
    d.dot(ball.linear_velocity) / (n * max_speed)
}

/// Normalized ball speed toward the net the player's team attacks.
/// +1 means the ball moves at full speed straight at the target anchor.
pub fn ball_to_goal_velocity(ctx: &ComponentContext) -> Result<f64> {
    let player = ctx.player()?;
    let target = ctx.arena.opponent_back_net(player.team);
    Ok(ball_speed_toward(&ctx.state.ball, target, ctx.arena.ball_max_speed))
}

/// Normalized player speed toward the ball.
pub fn player_to_ball_velocity(ctx: &ComponentContext) -> Result<f64> {
    let player = ctx.player()?;
    let d = ctx.state.ball.position - player.body.position;
    let n = d.norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(d.dot(player.body.linear_velocity) / (n * ctx.arena.car_max_speed))
}

/// Square root of the normalized boost tank, in [0, 1].
pub fn save_boost(ctx: &ComponentContext) -> Result<f64> {
    let player = ctx.player()?;
    Ok((player.boost.clamp(0.0, 100.0) / 100.0).sqrt())
}

/// Distance utility between the car and the ball surface. The gap
/// `max(0, |ball - car| - ball_radius)` feeds the parameterized curve with
/// the car max speed as the normalizer, so touching the ball yields 1.
pub fn player_to_ball_distance(
    ctx: &ComponentContext,
    dispersion: f64,
    density: f64,
) -> Result<f64> {
    validate_curve_params("player_to_ball_distance", dispersion, density)?;
    let player = ctx.player()?;
    let gap = ((ctx.state.ball.position - player.body.position).norm()
        - ctx.arena.ball_radius)
        .max(0.0);
    Ok(parameterized_distance(gap, ctx.arena.car_max_speed, dispersion, density))
}

/// Positioning quality in [-1, 1]: the mean of two cosines, car-to-ball
/// direction versus ball-to-opponent-goal, and car-to-ball direction versus
/// own-goal-to-ball. Both hit +1 when the car sits on the own-goal/ball/
/// opponent-goal line behind the ball.
pub fn align_ball_to_goal(ctx: &ComponentContext) -> Result<f64> {
    let player = ctx.player()?;
    let ball = ctx.state.ball.position;
    let to_ball = ball - player.body.position;
    if to_ball.norm() == 0.0 {
        return Ok(0.0);
    }
    let attack = ctx.arena.opponent_goal_center(player.team) - ball;
    let defend = ball - ctx.arena.goal_center(player.team);
    Ok(0.5 * cos_between(to_ball, attack) + 0.5 * cos_between(to_ball, defend))
}

/// Parameters for the two halves of [`ball_to_goal_distance_difference`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceDifferenceParams {
    pub offensive_weight: f64,
    pub offensive_dispersion: f64,
    pub offensive_density: f64,
    pub defensive_weight: f64,
    pub defensive_dispersion: f64,
    pub defensive_density: f64,
}

impl Default for DistanceDifferenceParams {
    fn default() -> Self {
        DistanceDifferenceParams {
            offensive_weight: 1.0,
            offensive_dispersion: 1.0,
            offensive_density: 1.0,
            defensive_weight: 1.0,
            defensive_dispersion: 1.0,
            defensive_density: 1.0,
        }
    }
}

impl DistanceDifferenceParams {
    pub fn validate(&self) -> Result<()> {
        validate_curve_params(
            "ball_to_goal_distance_difference offensive",
            self.offensive_dispersion,
            self.offensive_density,
        )?;
        validate_curve_params(
            "ball_to_goal_distance_difference defensive",
            self.defensive_dispersion,
            self.defensive_density,
        )?;
        for (name, w) in [
            ("offensive_weight", self.offensive_weight),
            ("defensive_weight", self.defensive_weight),
        ] {
            if !w.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

fn goal_distance_utility(
    ball: Vec3,
    net: Vec3,
    arena: &ArenaConstants,
    dispersion: f64,
    density: f64,
) -> f64 {
    // Distances are measured to the back of the net and shifted by the net
    // depth so the utility peaks at 1 on the goal line; inside the net the
    // shifted distance clamps to 0 to keep the declared range.
    let shifted = ((net - ball).norm() - arena.goal_depth).max(0.0);
    parameterized_distance(shifted, arena.ball_max_speed, dispersion, density)
}

/// Offensive-minus-defensive ball progress utility: the offensive half grows
/// as the ball nears the attacked net, the defensive half penalizes the ball
/// nearing the defended net. Range is (-defensive_weight, offensive_weight].
pub fn ball_to_goal_distance_difference(
    ctx: &ComponentContext,
    params: &DistanceDifferenceParams,
) -> Result<f64> {
    params.validate()?;
    let player = ctx.player()?;
    let ball = ctx.state.ball.position;
    let off = goal_distance_utility(
        ball,
        ctx.arena.opponent_back_net(player.team),
        ctx.arena,
        params.offensive_dispersion,
        params.offensive_density,
    );
    let def = goal_distance_utility(
        ball,
        ctx.arena.back_net(player.team),
        ctx.arena,
        params.defensive_dispersion,
        params.defensive_density,
    );
    Ok(params.offensive_weight * off - params.defensive_weight * def)
}

/// Change in [`ball_to_goal_velocity`] across the step, emitted only on the
/// toucher's step. Range is [-2, 2]. Needs the previous state when the touch
/// flag is set.
pub fn touch_ball_to_goal_acceleration(ctx: &ComponentContext) -> Result<f64> {
    if !ctx.flags().touch {
        return Ok(0.0);
    }
    let player = ctx.player()?;
    let prev = ctx.previous_state.ok_or_else(|| {
        Error::State("touch_ball_to_goal_acceleration needs a previous state on touch steps".into())
    })?;
    let target = ctx.arena.opponent_back_net(player.team);
    let now = ball_speed_toward(&ctx.state.ball, target, ctx.arena.ball_max_speed);
    let before = ball_speed_toward(&prev.ball, target, ctx.arena.ball_max_speed);
    Ok(now - before)
}

/// 1.0 on steps where the given event fired for this player, else 0.0.
pub fn event_reward(ctx: &ComponentContext, kind: EventKind) -> f64 {
    if ctx.flags().get(kind) {
        1.0
    } else {
        0.0
    }
}

/// A validated, parameterized component ready to evaluate. Construction via
/// [`Component::from_name`] is how reward spec files resolve leaf nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Component {
    Event(EventKind),
    TouchBallToGoalAcceleration,
    BallToGoalVelocity,
    PlayerToBallVelocity,
    SaveBoost,
    PlayerToBallDistance { dispersion: f64, density: f64 },
    AlignBallToGoal,
    BallToGoalDistanceDifference(DistanceDifferenceParams),
}

impl Component {
    /// Component names accepted by [`Component::from_name`].
    pub const NAMES: [&'static str; 15] = [
        "touch",
        "goal",
        "concede",
        "team_goal",
        "shot",
        "save",
        "demolish",
        "demolished",
        "touch_ball_to_goal_acceleration",
        "ball_to_goal_velocity",
        "player_to_ball_velocity",
        "save_boost",
        "player_to_ball_distance",
        "align_ball_to_goal",
        "ball_to_goal_distance_difference",
    ];

    /// Resolves a leaf by name and validates its parameter map. Unknown
    /// names and unknown parameter keys are spec errors; out-of-range values
    /// are parameter errors.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Component> {
        let mut allowed: &[&str] = &[];
        let component = if let Some(kind) = EventKind::from_name(name) {
            Component::Event(kind)
        } else {
            match name {
                "touch_ball_to_goal_acceleration" => Component::TouchBallToGoalAcceleration,
                "ball_to_goal_velocity" => Component::BallToGoalVelocity,
                "player_to_ball_velocity" => Component::PlayerToBallVelocity,
                "save_boost" => Component::SaveBoost,
                "player_to_ball_distance" => {
                    allowed = &["dispersion", "density"];
                    let dispersion = params.get("dispersion").copied().unwrap_or(1.0);
                    let density = params.get("density").copied().unwrap_or(1.0);
                    validate_curve_params("player_to_ball_distance", dispersion, density)?;
                    Component::PlayerToBallDistance { dispersion, density }
                }
                "align_ball_to_goal" => Component::AlignBallToGoal,
                "ball_to_goal_distance_difference" => {
                    allowed = &[
                        "offensive_weight",
                        "offensive_dispersion",
                        "offensive_density",
                        "defensive_weight",
                        "defensive_dispersion",
                        "defensive_density",
                    ];
                    let defaults = DistanceDifferenceParams::default();
                    let p = DistanceDifferenceParams {
                        offensive_weight: params
                            .get("offensive_weight")
                            .copied()
                            .unwrap_or(defaults.offensive_weight),
                        offensive_dispersion: params
                            .get("offensive_dispersion")
                            .copied()
                            .unwrap_or(defaults.offensive_dispersion),
                        offensive_density: params
                            .get("offensive_density")
                            .copied()
                            .unwrap_or(defaults.offensive_density),
                        defensive_weight: params
                            .get("defensive_weight")
                            .copied()
                            .unwrap_or(defaults.defensive_weight),
                        defensive_dispersion: params
                            .get("defensive_dispersion")
                            .copied()
                            .unwrap_or(defaults.defensive_dispersion),
                        defensive_density: params
                            .get("defensive_density")
                            .copied()
                            .unwrap_or(defaults.defensive_density),
                    };
                    p.validate()?;
                    Component::BallToGoalDistanceDifference(p)
                }
                _ => {
                    return Err(Error::Spec(format!(
                        "unknown component `{name}`; known components: {}",
                        Component::NAMES.join(", ")
                    )))
                }
            }
        };
        if let Some(key) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Spec(format!(
                "component `{name}` does not take a parameter `{key}`"
            )));
        }
        Ok(component)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Component::Event(kind) => kind.name(),
            Component::TouchBallToGoalAcceleration => "touch_ball_to_goal_acceleration",
            Component::BallToGoalVelocity => "ball_to_goal_velocity",
            Component::PlayerToBallVelocity => "player_to_ball_velocity",
            Component::SaveBoost => "save_boost",
            Component::PlayerToBallDistance { .. } => "player_to_ball_distance",
            Component::AlignBallToGoal => "align_ball_to_goal",
            Component::BallToGoalDistanceDifference(_) => "ball_to_goal_distance_difference",
        }
    }

    /// True for components that only make sense on the reward side (they
    /// read event flags or difference across states). Utility trees reject
    /// them: a potential must be a pure function of one state.
    pub fn is_event_scoped(&self) -> bool {
        matches!(
            self,
            Component::Event(_) | Component::TouchBallToGoalAcceleration
        )
    }

    pub fn evaluate(&self, ctx: &ComponentContext) -> Result<f64> {
        match self {
            Component::Event(kind) => {
                ctx.player()?;
                Ok(event_reward(ctx, *kind))
            }
            Component::TouchBallToGoalAcceleration => touch_ball_to_goal_acceleration(ctx),
            Component::BallToGoalVelocity => ball_to_goal_velocity(ctx),
            Component::PlayerToBallVelocity => player_to_ball_velocity(ctx),
            Component::SaveBoost => save_boost(ctx),
            Component::PlayerToBallDistance { dispersion, density } => {
                player_to_ball_distance(ctx, *dispersion, *density)
            }
            Component::AlignBallToGoal => align_ball_to_goal(ctx),
            Component::BallToGoalDistanceDifference(params) => {
                ball_to_goal_distance_difference(ctx, params)
            }
        }
    }
}
