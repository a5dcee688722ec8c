//! Deterministic kinematic harness: planar cars, a bouncing ball, event
//! detection, and episode loops that exercise the reward stack end to end.
//!
//! Timing follows the action cadence of fifteen decisions per simulated
//! second (frame skip 8 over 120 Hz physics), so the five-minute cap is
//! 4500 steps and the 45-second no-touch limit is 675 steps. The dynamics
//! themselves are deliberately simple: cars are ground-bound point masses
//! that steer and accelerate (no aerials, no flips, no car-car collision
//! response beyond demolitions), the ball flies under gravity and reflects
//! off the arena shell with fixed restitution. Gravity 650, restitution 0.6,
//! car acceleration 1000 (1600 while boosting), and boost drain 33.3 per
//! second are plausible round numbers, all overridable through [`SimConfig`]
//! and never asserted as anything more.
//!
//! Shot and save detection thresholds (500 uu/s toward goal, a one-second
//! linear extrapolation horizon) are documented heuristics; touch and goal
//! detection reuse the same rules as replay ingestion. The no-touch clock is
//! global: any touch by either team resets it.

use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arena::{goal_crossing, ArenaConstants, GameState, PhysObject, PlayerState, Team, Vec3};
use crate::compose::{step_rewards, RewardSpec, ShapedRewardOutput};
use crate::error::{Error, Result};
use crate::rewards::EventFlags;

/// One planar control frame for one car.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CarAction {
    /// Forward/backward drive in [-1, 1].
    pub throttle: f64,
    /// Left/right steering in [-1, 1]; positive turns counterclockwise.
    pub steer: f64,
    pub boost: bool,
}

impl CarAction {
    pub fn clamped(self) -> CarAction {
        CarAction {
            throttle: self.throttle.clamp(-1.0, 1.0),
            steer: self.steer.clamp(-1.0, 1.0),
            boost: self.boost,
        }
    }
}

/// Thresholds for event detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventRules {
    /// Car-ball distance margin over the ball radius that counts as contact.
    pub touch_margin: f64,
    /// Ball velocity discontinuity (uu/s) that counts as an impulse.
    pub touch_impulse: f64,
    /// Post-touch ball speed toward the opponent goal that counts as a shot.
    pub shot_speed: f64,
    /// Linear extrapolation horizon (s) for save detection.
    pub save_horizon: f64,
    /// Attacker speed required to demolish on car overlap.
    pub demolish_speed: f64,
}

impl Default for EventRules {
    fn default() -> Self {
        EventRules {
            touch_margin: 120.0,
            touch_impulse: 50.0,
            shot_speed: 500.0,
            save_horizon: 1.0,
            demolish_speed: 2200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Actions per simulated second.
    pub tick_rate: f64,
    /// Downward ball acceleration, uu/s^2.
    pub gravity: f64,
    /// Ball bounce restitution in [0, 1].
    pub restitution: f64,
    /// Car acceleration at full throttle, uu/s^2.
    pub car_accel: f64,
    /// Car acceleration while boosting, uu/s^2 (replaces car_accel).
    pub boost_accel: f64,
    /// Boost drain per second of held boost.
    pub boost_drain: f64,
    /// Peak yaw rate, rad/s, reached at full speed.
    pub turn_rate: f64,
    /// Ball speed under which a grounded ball comes to rest. Must beat the
    /// micro-bounce limit 2 g dt / (1 - e^2) or bounces never decay.
    pub rest_speed: f64,
    /// Car collision radius for touches and demolitions.
    pub car_contact_radius: f64,
    /// Hard episode cap in steps.
    pub max_steps: usize,
    /// Steps without any touch before termination; None disables.
    pub no_touch_timeout: Option<usize>,
    /// Steps a demolished car stays off the field.
    pub demolish_respawn_steps: usize,
    pub seed: u64,
    pub events: EventRules,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tick_rate: 15.0,
            gravity: 650.0,
            restitution: 0.6,
            car_accel: 1000.0,
            boost_accel: 1600.0,
            boost_drain: 33.3,
            turn_rate: 3.0,
            rest_speed: 150.0,
            car_contact_radius: 80.0,
            max_steps: 4500,
            no_touch_timeout: Some(675),
            demolish_respawn_steps: 45,
            seed: 0,
            events: EventRules::default(),
        }
    }
}

impl SimConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.tick_rate
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tick_rate > 0.0) {
            return Err(Error::Parameter("tick_rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return Err(Error::Parameter(format!(
                "restitution must lie in [0, 1], got {}",
                self.restitution
            )));
        }
        for (name, v) in [
            ("gravity", self.gravity),
            ("car_accel", self.car_accel),
            ("boost_accel", self.boost_accel),
            ("boost_drain", self.boost_drain),
            ("turn_rate", self.turn_rate),
            ("rest_speed", self.rest_speed),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.car_contact_radius <= 0.0 {
            return Err(Error::Parameter("car_contact_radius must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Parameter("max_steps must be at least 1".into()));
        }
        if self.restitution < 1.0 {
            let micro_bounce = 2.0 * self.gravity * self.dt()
                / (1.0 - self.restitution * self.restitution);
            if self.rest_speed <= micro_bounce {
                return Err(Error::Parameter(format!(
                    "rest_speed {} must exceed the micro-bounce limit {micro_bounce:.1} \
                     (2 g dt / (1 - e^2)) or floor bounces never settle",
                    self.rest_speed
                )));
            }
        }
        Ok(())
    }
}

const CAR_RIDE_HEIGHT: f64 = 17.0;
/// Keeps car centers off the walls.
const CAR_WALL_MARGIN: f64 = 60.0;

fn yaw_rotate(v: Vec3, angle: f64) -> Vec3 {
    let (sin, cos) = angle.sin_cos();
    Vec3::new(v.x * cos - v.y * sin, v.x * sin + v.y * cos, v.z)
}

/// Advances every car then the ball by one tick. Pure and deterministic:
/// demolished cars are frozen in place, cars never leave the ground, the
/// ball reflects off the shell but passes into goal mouths so crossings stay
/// observable. Panics if the action count mismatches the roster.
pub fn step_physics(
    state: &GameState,
    actions: &[CarAction],
    config: &SimConfig,
    arena: &ArenaConstants,
) -> GameState {
    assert_eq!(
        actions.len(),
        state.players.len(),
        "one action per player required"
    );
    let dt = config.dt();
    let mut next = state.clone();
    next.tick = state.tick + 1;

    for (player, action) in next.players.iter_mut().zip(actions) {
        if player.demolished {
            continue;
        }
        let action = action.clamped();
        let forward = player.body.forward;
        let speed = player.body.linear_velocity.dot(forward);

        let boosting = action.boost && player.boost > 0.0;
        let accel = if boosting { config.boost_accel } else { config.car_accel };
        let new_speed = (speed + action.throttle * accel * dt)
            .clamp(-arena.car_max_speed, arena.car_max_speed);
        if boosting {
            player.boost = (player.boost - config.boost_drain * dt).max(0.0);
        }

        // Yaw authority grows with speed so a parked car cannot spin.
        let speed_fraction = (new_speed.abs() / arena.car_max_speed).min(1.0);
        let yaw = action.steer * config.turn_rate * speed_fraction * dt;
        let new_forward = yaw_rotate(forward, yaw).normalized().unwrap_or(forward);

        player.body.forward = new_forward;
        player.body.up = Vec3::new(0.0, 0.0, 1.0);
        player.body.linear_velocity = new_forward * new_speed;
        player.body.angular_velocity = Vec3::new(0.0, 0.0, yaw / dt);
        let mut pos = player.body.position + player.body.linear_velocity * dt;
        pos.x = pos.x.clamp(
            -(arena.half_width_x - CAR_WALL_MARGIN),
            arena.half_width_x - CAR_WALL_MARGIN,
        );
        pos.y = pos.y.clamp(
            -(arena.half_length_y - CAR_WALL_MARGIN),
            arena.half_length_y - CAR_WALL_MARGIN,
        );
        pos.z = CAR_RIDE_HEIGHT;
        player.body.position = pos;
        player.on_ground = true;
    }

    step_ball(&mut next, config, arena);

    for i in 0..next.players.len() {
        if next.players[i].demolished {
            continue;
        }
        resolve_car_ball_contact(&mut next, i, config, arena);
    }
    let speed = next.ball.linear_velocity.norm();
    if speed > arena.ball_max_speed {
        next.ball.linear_velocity = next.ball.linear_velocity * (arena.ball_max_speed / speed);
    }

    next
}

fn step_ball(state: &mut GameState, config: &SimConfig, arena: &ArenaConstants) {
    let ball = &mut state.ball;
    let r = arena.ball_radius;
    ball.linear_velocity.z -= config.gravity * config.dt();

    // Rest contact: a slow grounded ball stops instead of micro-bouncing.
    let grounded = ball.position.z <= r + 1.0;
    if grounded && ball.linear_velocity.norm() <= config.rest_speed {
        ball.linear_velocity = Vec3::ZERO;
        ball.angular_velocity = Vec3::ZERO;
        ball.position.z = r;
        return;
    }

    ball.position = ball.position + ball.linear_velocity * config.dt();

    // Contacts project the ball onto the surface rather than reflecting the
    // overshoot: projection caps the potential-energy gain of a bounce at
    // g |v_n| dt, which the restitution loss beats for any impact above the
    // micro-bounce limit, keeping bounce energy non-increasing.
    let e = config.restitution;
    if ball.position.z < r {
        ball.position.z = r;
        if ball.linear_velocity.z < 0.0 {
            ball.linear_velocity.z = -e * ball.linear_velocity.z;
        }
    }
    let ceiling = arena.ceiling_z - r;
    if ball.position.z > ceiling {
        ball.position.z = ceiling;
        if ball.linear_velocity.z > 0.0 {
            ball.linear_velocity.z = -e * ball.linear_velocity.z;
        }
    }
    let x_limit = arena.half_width_x - r;
    if ball.position.x.abs() > x_limit {
        let sign = ball.position.x.signum();
        ball.position.x = sign * x_limit;
        if ball.linear_velocity.x * sign > 0.0 {
            ball.linear_velocity.x = -e * ball.linear_velocity.x;
        }
    }
    // The back wall reflects except inside a goal mouth, where the ball
    // passes through so goal crossings remain observable; the net's back
    // plane finally stops it.
    let y_limit = arena.half_length_y - r;
    if ball.position.y.abs() > y_limit {
        let in_mouth = ball.position.x.abs() < arena.goal_half_width
            && ball.position.z < arena.goal_height;
        if in_mouth {
            let back = arena.half_length_y + arena.goal_depth - r;
            if ball.position.y.abs() > back {
                let sign = ball.position.y.signum();
                ball.position.y = sign * back;
                if ball.linear_velocity.y * sign > 0.0 {
                    ball.linear_velocity.y = -e * ball.linear_velocity.y;
                }
            }
        } else {
            let sign = ball.position.y.signum();
            ball.position.y = sign * y_limit;
            if ball.linear_velocity.y * sign > 0.0 {
                ball.linear_velocity.y = -e * ball.linear_velocity.y;
            }
        }
    }
}

/// Kicks the ball away from an overlapping car: the approach-speed component
/// along the contact normal transfers with a 1.5 factor, then the ball is
/// pushed out of overlap. Cars are unaffected (infinite-mass approximation).
fn resolve_car_ball_contact(
    state: &mut GameState,
    player_index: usize,
    config: &SimConfig,
    arena: &ArenaConstants,
) {
    let contact_range = arena.ball_radius + config.car_contact_radius;
    let car = state.players[player_index].body;
    let offset = state.ball.position - car.position;
    let distance = offset.norm();
    if distance >= contact_range {
        return;
    }
    let normal = if distance > 1e-9 {
        offset * (1.0 / distance)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let approach = (car.linear_velocity - state.ball.linear_velocity).dot(normal);
    if approach > 0.0 {
        state.ball.linear_velocity = state.ball.linear_velocity + normal * (1.5 * approach);
    }
    state.ball.position = car.position + normal * contact_range;
}

/// True when a straight-line flight from `ball` enters `defending`'s goal
/// mouth within `horizon` seconds. Gravity is ignored; this is a heuristic
/// threat test for save detection, not ballistics.
fn extrapolation_threatens_goal(
    ball: &PhysObject,
    defending: Team,
    horizon: f64,
    arena: &ArenaConstants,
) -> bool {
    let target_y = -defending.attack_sign() * arena.goal_line_y;
    let dy = target_y - ball.position.y;
    let vy = ball.linear_velocity.y;
    if vy == 0.0 {
        return false;
    }
    let t = dy / vy;
    if t <= 0.0 || t > horizon {
        return false;
    }
    let x = ball.position.x + ball.linear_velocity.x * t;
    let z = ball.position.z + ball.linear_velocity.z * t;
    x.abs() < arena.goal_half_width && z > 0.0 && z < arena.goal_height
}

/// Derives per-player event flags from one step transition.
///
/// `last_toucher` carries cross-step memory for goal attribution (the flags
/// of a goal step credit the most recent toucher); the updated toucher is
/// returned alongside the flags so callers can thread it through a loop.
pub fn detect_events(
    prev: &GameState,
    state: &GameState,
    config: &SimConfig,
    arena: &ArenaConstants,
    last_toucher: Option<usize>,
) -> (Vec<EventFlags>, Option<usize>) {
    let rules = &config.events;
    let n = state.players.len();
    let mut events = vec![EventFlags::default(); n];

    // Touches: proximity plus a ball velocity discontinuity.
    let impulse = (state.ball.linear_velocity - prev.ball.linear_velocity).norm();
    let mut toucher: Option<(usize, f64)> = None;
    if impulse > rules.touch_impulse {
        for i in 0..n {
            if prev.players[i].demolished || state.players[i].demolished {
                continue;
            }
            let gap = (state.ball.position - state.players[i].body.position).norm();
            if gap < arena.ball_radius + rules.touch_margin {
                events[i].touch = true;
                if toucher.map(|(_, best)| gap < best).unwrap_or(true) {
                    toucher = Some((i, gap));
                }
            }
        }
    }
    let new_toucher = toucher.map(|(i, _)| i).or(last_toucher);

    // Shots and saves hang off this step's touches.
    for i in 0..n {
        if !events[i].touch {
            continue;
        }
        let team = state.players[i].team;
        let toward_goal = arena.opponent_goal_center(team) - state.ball.position;
        let range = toward_goal.norm();
        if range > 0.0 {
            let speed_toward = state.ball.linear_velocity.dot(toward_goal) / range;
            if speed_toward > rules.shot_speed {
                events[i].shot = true;
            }
        }
        let was_threatened =
            extrapolation_threatens_goal(&prev.ball, team, rules.save_horizon, arena);
        let still_threatened =
            extrapolation_threatens_goal(&state.ball, team, rules.save_horizon, arena);
        if was_threatened && !still_threatened {
            events[i].save = true;
        }
    }

    // Goals: ball center crossed a goal line inside the mouth.
    if let Some(scoring) = goal_crossing(prev.ball.position, state.ball.position, arena) {
        for i in 0..n {
            if state.players[i].team == scoring {
                events[i].team_goal = true;
            } else {
                events[i].concede = true;
            }
        }
        if let Some(t) = new_toucher {
            if state.players[t].team == scoring {
                events[t].goal = true;
            }
        }
    }

    // Demolitions: car overlap with the attacker at demolition speed.
    for i in 0..n {
        for j in 0..n {
            if i == j
                || state.players[i].team == state.players[j].team
                || prev.players[i].demolished
                || state.players[i].demolished
                || prev.players[j].demolished
                || state.players[j].demolished
                || events[j].demolished
            {
                continue;
            }
            let gap = (state.players[i].body.position - state.players[j].body.position).norm();
            let attacker_speed = state.players[i].body.linear_velocity.norm();
            if gap < 2.0 * config.car_contact_radius && attacker_speed >= rules.demolish_speed {
                events[i].demolish = true;
                events[j].demolished = true;
            }
        }
    }

    (events, new_toucher)
}

/// Per-player action source for an episode. Implementations may keep state
/// (an RNG, a controller), hence `&mut self`.
pub trait Policy {
    fn act(&mut self, state: &GameState, player_index: usize) -> CarAction;
}

/// Does nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdlePolicy;

impl Policy for IdlePolicy {
    fn act(&mut self, _state: &GameState, _player_index: usize) -> CarAction {
        CarAction::default()
    }
}

/// Uniform random controls from a seeded stream; deterministic because
/// `run_episode` queries players in roster order every step.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Policy for RandomPolicy {
    fn act(&mut self, _state: &GameState, _player_index: usize) -> CarAction {
        CarAction {
            throttle: self.rng.gen_range(-1.0..=1.0),
            steer: self.rng.gen_range(-1.0..=1.0),
            boost: self.rng.gen_bool(0.2),
        }
    }
}

/// Steers toward the ball at full throttle.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChasePolicy;

impl Policy for ChasePolicy {
    fn act(&mut self, state: &GameState, player_index: usize) -> CarAction {
        let player = &state.players[player_index];
        let to_ball = state.ball.position - player.body.position;
        let forward = player.body.forward;
        // Signed planar angle from forward to the ball direction.
        let cross = forward.x * to_ball.y - forward.y * to_ball.x;
        let dot = forward.x * to_ball.x + forward.y * to_ball.y;
        let angle = cross.atan2(dot);
        CarAction {
            throttle: 1.0,
            steer: (2.0 * angle).clamp(-1.0, 1.0),
            boost: angle.abs() < 0.3 && player.boost > 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Goal,
    TimeCap,
    NoTouch,
}

/// One recorded step: the state after physics, the events of the transition,
/// and the rewards computed from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeStep {
    pub state: GameState,
    pub events: Vec<EventFlags>,
    pub rewards: ShapedRewardOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub initial_state: GameState,
    pub steps: Vec<EpisodeStep>,
    pub termination: Termination,
}

impl EpisodeResult {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Runs physics, event detection, demolition bookkeeping, and reward
/// evaluation until a goal, the no-touch clock, or the step cap ends the
/// episode. Every step's previous state is known, so shaping telescopes
/// exactly over the whole episode.
pub fn run_episode(
    spec: &RewardSpec,
    initial: GameState,
    policy: &mut dyn Policy,
    config: &SimConfig,
    arena: &ArenaConstants,
) -> Result<EpisodeResult> {
    config.validate()?;
    initial.validate(arena)?;
    spec.validate()?;

    let n = initial.players.len();
    let mut state = initial.clone();
    let mut steps = Vec::new();
    let mut last_toucher: Option<usize> = None;
    let mut respawn_timers: Vec<usize> = vec![0; n];
    let mut no_touch_steps = 0usize;
    let mut termination = Termination::TimeCap;

    for _ in 0..config.max_steps {
        let actions: Vec<CarAction> = (0..n).map(|i| policy.act(&state, i)).collect();
        let mut next = step_physics(&state, &actions, config, arena);

        // Respawns due this step come back before events are scored.
        for i in 0..n {
            if next.players[i].demolished && respawn_timers[i] > 0 {
                respawn_timers[i] -= 1;
                if respawn_timers[i] == 0 {
                    respawn(&mut next.players[i], arena);
                }
            }
        }

        let (events, toucher) = detect_events(&state, &next, config, arena, last_toucher);
        last_toucher = toucher;
        for i in 0..n {
            if events[i].demolished {
                next.players[i].demolished = true;
                next.players[i].body.linear_velocity = Vec3::ZERO;
                respawn_timers[i] = config.demolish_respawn_steps;
            }
        }

        let rewards = step_rewards(spec, Some(&state), &next, &events, arena)?;
        let scored = events.iter().any(|e| e.team_goal);
        let touched = events.iter().any(|e| e.touch);
        steps.push(EpisodeStep { state: next.clone(), events, rewards });
        state = next;

        if scored {
            termination = Termination::Goal;
            break;
        }
        if touched {
            no_touch_steps = 0;
        } else {
            no_touch_steps += 1;
        }
        if let Some(limit) = config.no_touch_timeout {
            if no_touch_steps >= limit {
                termination = Termination::NoTouch;
                break;
            }
        }
    }

    Ok(EpisodeResult { initial_state: initial, steps, termination })
}

fn respawn(player: &mut PlayerState, arena: &ArenaConstants) {
    let sign = -player.team.attack_sign();
    player.body = PhysObject {
        position: Vec3::new(0.0, sign * (arena.half_length_y - 1000.0), CAR_RIDE_HEIGHT),
        linear_velocity: Vec3::ZERO,
        angular_velocity: Vec3::ZERO,
        forward: Vec3::new(0.0, player.team.attack_sign(), 0.0),
        up: Vec3::new(0.0, 0.0, 1.0),
    };
    player.boost = 33.0;
    player.on_ground = true;
    player.has_flip = true;
    player.demolished = false;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetterVariant {
    /// Seeded uniform placement within bounds.
    Random,
    /// Centered still ball, mirrored lineups facing it.
    KickoffLike,
}

/// Builds a valid starting state for `blue` + `orange` cars. The draw order
/// is fixed (ball, then players in roster order), so equal seeds give
/// bit-identical states.
pub fn random_state_setter(
    seed: u64,
    blue: usize,
    orange: usize,
    variant: SetterVariant,
    arena: &ArenaConstants,
) -> Result<GameState> {
    if blue == 0 && orange == 0 {
        return Err(Error::Parameter("rosters must contain at least one player".into()));
    }
    let state = match variant {
        SetterVariant::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = arena.ball_radius;
            let ball_position = Vec3::new(
                rng.gen_range(-(arena.half_width_x - 2.0 * r)..=(arena.half_width_x - 2.0 * r)),
                rng.gen_range(-(arena.half_length_y - 2.0 * r)..=(arena.half_length_y - 2.0 * r)),
                rng.gen_range(r..=1500.0),
            );
            let ball_velocity = Vec3::new(
                rng.gen_range(-1200.0..=1200.0),
                rng.gen_range(-1200.0..=1200.0),
                rng.gen_range(-500.0..=500.0),
            );
            let mut ball = PhysObject::stationary_at(ball_position);
            ball.linear_velocity = ball_velocity;

            let mut players = Vec::with_capacity(blue + orange);
            for team in [Team::Blue, Team::Orange] {
                let count = if team == Team::Blue { blue } else { orange };
                for _ in 0..count {
                    let position = Vec3::new(
                        rng.gen_range(-(arena.half_width_x - 200.0)..=(arena.half_width_x - 200.0)),
                        rng.gen_range(-(arena.half_length_y - 200.0)..=(arena.half_length_y - 200.0)),
                        CAR_RIDE_HEIGHT,
                    );
                    let yaw = rng.gen_range(0.0..std::f64::consts::TAU);
                    let forward = Vec3::new(yaw.cos(), yaw.sin(), 0.0);
                    let speed = rng.gen_range(0.0..=1400.0);
                    let boost = rng.gen_range(0.0..=100.0);
                    players.push(PlayerState {
                        body: PhysObject {
                            position,
                            linear_velocity: forward * speed,
                            angular_velocity: Vec3::ZERO,
                            forward,
                            up: Vec3::new(0.0, 0.0, 1.0),
                        },
                        boost,
                        team,
                        on_ground: true,
                        has_flip: true,
                        demolished: false,
                    });
                }
            }
            GameState { ball, players, tick: 0 }
        }
        SetterVariant::KickoffLike => {
            let offsets = [0.0, -1024.0, 1024.0, -2048.0, 2048.0];
            let mut players = Vec::with_capacity(blue + orange);
            for team in [Team::Blue, Team::Orange] {
                let count = if team == Team::Blue { blue } else { orange };
                let sign = -team.attack_sign();
                for i in 0..count {
                    let row = (i / offsets.len()) as f64;
                    let position = Vec3::new(
                        offsets[i % offsets.len()],
                        sign * (2560.0 + 600.0 * row),
                        CAR_RIDE_HEIGHT,
                    );
                    players.push(PlayerState {
                        body: PhysObject {
                            position,
                            linear_velocity: Vec3::ZERO,
                            angular_velocity: Vec3::ZERO,
                            forward: Vec3::new(0.0, team.attack_sign(), 0.0),
                            up: Vec3::new(0.0, 0.0, 1.0),
                        },
                        boost: 33.0,
                        team,
                        on_ground: true,
                        has_flip: true,
                        demolished: false,
                    });
                }
            }
            GameState {
                ball: PhysObject::stationary_at(Vec3::new(0.0, 0.0, arena.ball_radius)),
                players,
                tick: 0,
            }
        }
    };
    state.validate(arena)?;
    Ok(state)
}
