//! Observation encoding (query / key-value / padding-mask triplet with
//! action stacking) and the keyboard-and-mouse action expansion.
//!
//! Every packed row follows the same layout, 1-based column spans:
//! object-type flags 1-4, position 5-7, linear velocity 8-10, forward 11-13,
//! up 14-16, angular velocity 17-19, boost 20, on-ground 21, has-flip 22,
//! demolished 23, previous actions 24..23+8k (query row only, zero
//! elsewhere), one reserved zero slot at 24+8k, and the padding-mask bit at
//! 25+8k. For the default k=5 stack that is 65 features per row. There are
//! no boost-pad rows and no demolition or boost-pickup timers anywhere.
//!
//! Coordinates are absolute, not re-based on the acting player: positions
//! and linear velocities divide by 2300, angular velocities by 5.5, boost by
//! 100. The query row describes the acting player and is the only row
//! carrying the main-player flag; the player's own key/value row uses the
//! teammate flag.

use serde::{Deserialize, Serialize};

use crate::arena::{ArenaConstants, GameState, PhysObject};
use crate::error::{Error, Result};

/// The 8-slot continuous action order used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionVector {
    pub throttle: f64,
    pub steer: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
    pub jump: bool,
    pub boost: bool,
    pub handbrake: bool,
}

impl ActionVector {
    pub const SLOTS: usize = 8;

    pub fn zero() -> Self {
        ActionVector::default()
    }

    /// Continuous components clamped into [-1, 1].
    pub fn clamped(mut self) -> Self {
        self.throttle = self.throttle.clamp(-1.0, 1.0);
        self.steer = self.steer.clamp(-1.0, 1.0);
        self.pitch = self.pitch.clamp(-1.0, 1.0);
        self.yaw = self.yaw.clamp(-1.0, 1.0);
        self.roll = self.roll.clamp(-1.0, 1.0);
        self
    }

    pub fn to_slots(&self) -> [f64; 8] {
        [
            self.throttle,
            self.steer,
            self.pitch,
            self.yaw,
            self.roll,
            self.jump as u8 as f64,
            self.boost as u8 as f64,
            self.handbrake as u8 as f64,
        ]
    }
}

/// Knobs for [`encode_observation`]. The defaults mirror the published
/// setup: k=5 stacked actions, exact roster (no pad rows). Setting
/// `object_capacity` pads the key/value rows up to a fixed count, which is
/// what a fixed-width attention stack wants; 8 reproduces the fixed-roster
/// arithmetic discussed alongside boost-pad removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservationConfig {
    pub action_stack_len: usize,
    pub object_capacity: Option<usize>,
    pub position_norm: f64,
    pub velocity_norm: f64,
    pub angular_velocity_norm: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        ObservationConfig {
            action_stack_len: 5,
            object_capacity: None,
            position_norm: 2300.0,
            velocity_norm: 2300.0,
            angular_velocity_norm: 5.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationTriplet {
    /// Row describing the acting player, including the action stack.
    pub query: Vec<f64>,
    /// One row per object: ball first, then every car in roster order,
    /// then pad rows up to capacity.
    pub key_value: Vec<Vec<f64>>,
    /// True for pad rows; aligned with `key_value`.
    pub mask: Vec<bool>,
    /// Query in row 0, objects below; the mask bit is the last feature of
    /// each row.
    pub packed: Vec<Vec<f64>>,
}

/// Total packed row length for a k-deep action stack.
pub fn row_length(action_stack_len: usize) -> usize {
    25 + 8 * action_stack_len
}

/// A named 1-based inclusive column span of the packed row layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeatureSpan {
    pub name: &'static str,
    pub start: usize,
    pub end: usize,
}

/// The packed row layout as data, for tests and tooling.
pub fn feature_layout(action_stack_len: usize) -> Vec<FeatureSpan> {
    let k = action_stack_len;
    let span = |name, start, end| FeatureSpan { name, start, end };
    vec![
        span("object_type_flags", 1, 4),
        span("position", 5, 7),
        span("linear_velocity", 8, 10),
        span("forward", 11, 13),
        span("up", 14, 16),
        span("angular_velocity", 17, 19),
        span("boost", 20, 20),
        span("on_ground", 21, 21),
        span("has_flip", 22, 22),
        span("demolished", 23, 23),
        span("previous_actions", 24, 23 + 8 * k),
        span("reserved", 24 + 8 * k, 24 + 8 * k),
        span("padding_mask", 25 + 8 * k, 25 + 8 * k),
    ]
}

/// Number of semantic features before the action block.
/// Width of the semantic prefix of every row: flags, kinematics, boost, and
/// status bits, before the action block begins.
pub const SEMANTIC_FEATURES: usize = 23;

fn push_vec3(row: &mut Vec<f64>, v: crate::arena::Vec3, norm: f64) {
    row.push(v.x / norm);
    row.push(v.y / norm);
    row.push(v.z / norm);
}

#[allow(clippy::too_many_arguments)]
fn semantic_features(
    row: &mut Vec<f64>,
    flags: [f64; 4],
    body: &PhysObject,
    boost: f64,
    on_ground: bool,
    has_flip: bool,
    demolished: bool,
    cfg: &ObservationConfig,
) {
    row.extend_from_slice(&flags);
    push_vec3(row, body.position, cfg.position_norm);
    push_vec3(row, body.linear_velocity, cfg.velocity_norm);
    push_vec3(row, body.forward, 1.0);
    push_vec3(row, body.up, 1.0);
    push_vec3(row, body.angular_velocity, cfg.angular_velocity_norm);
    row.push(boost / 100.0);
    row.push(on_ground as u8 as f64);
    row.push(has_flip as u8 as f64);
    row.push(demolished as u8 as f64);
    debug_assert_eq!(row.len(), SEMANTIC_FEATURES);
}

/// Fills the action block (oldest first, zero-filled when the history is
/// shorter than k), the reserved slot, and the mask bit.
fn finish_row(row: &mut Vec<f64>, actions: &[ActionVector], k: usize, is_padding: bool) {
    let take = actions.len().min(k);
    let lead = k - take;
    for _ in 0..lead * ActionVector::SLOTS {
        row.push(0.0);
    }
    for action in &actions[actions.len() - take..] {
        row.extend_from_slice(&action.clamped().to_slots());
    }
    row.push(0.0); // reserved slot completing the semantic span
    row.push(is_padding as u8 as f64);
}

/// Builds the observation triplet for one player.
///
/// `action_history` holds that player's previous actions, oldest first; only
/// the last k entries are used and missing entries zero-fill from the left.
pub fn encode_observation(
    state: &GameState,
    player_index: usize,
    action_history: &[ActionVector],
    cfg: &ObservationConfig,
    arena: &ArenaConstants,
) -> Result<ObservationTriplet> {
    let _ = arena; // geometry is not needed: coordinates stay absolute
    let player = state.players.get(player_index).ok_or_else(|| {
        Error::Parameter(format!(
            "player_index {player_index} out of range for {} players",
            state.players.len()
        ))
    })?;
    let k = cfg.action_stack_len;
    let width = row_length(k);
    let object_count = 1 + state.players.len();
    let capacity = match cfg.object_capacity {
        None => object_count,
        Some(c) => {
            if c < object_count {
                return Err(Error::Parameter(format!(
                    "object_capacity {c} is smaller than the {object_count} objects present"
                )));
            }
            c
        }
    };

    let mut query = Vec::with_capacity(width);
    semantic_features(
        &mut query,
        [1.0, 0.0, 0.0, 0.0],
        &player.body,
        player.boost,
        player.on_ground,
        player.has_flip,
        player.demolished,
        cfg,
    );
    finish_row(&mut query, action_history, k, false);

    let mut key_value = Vec::with_capacity(capacity);
    let mut mask = Vec::with_capacity(capacity);

    let mut ball_row = Vec::with_capacity(width);
    semantic_features(
        &mut ball_row,
        [0.0, 0.0, 0.0, 1.0],
        &state.ball,
        0.0,
        false,
        false,
        false,
        cfg,
    );
    finish_row(&mut ball_row, &[], k, false);
    key_value.push(ball_row);
    mask.push(false);

    for other in &state.players {
        // The acting player's own row counts as a teammate row; the main
        // flag is exclusive to the query.
        let flags = if other.team == player.team {
            [0.0, 1.0, 0.0, 0.0]
        } else {
            [0.0, 0.0, 1.0, 0.0]
        };
        let mut row = Vec::with_capacity(width);
        semantic_features(
            &mut row,
            flags,
            &other.body,
            other.boost,
            other.on_ground,
            other.has_flip,
            other.demolished,
            cfg,
        );
        finish_row(&mut row, &[], k, false);
        key_value.push(row);
        mask.push(false);
    }

    while key_value.len() < capacity {
        let mut row = vec![0.0; width - 1];
        row.push(1.0);
        key_value.push(row);
        mask.push(true);
    }

    let mut packed = Vec::with_capacity(1 + key_value.len());
    packed.push(query.clone());
    packed.extend(key_value.iter().cloned());

    Ok(ObservationTriplet { query, key_value, mask, packed })
}

/// Targets an expansion slot can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KbmTarget {
    Throttle,
    Steer,
    Pitch,
    Yaw,
    Roll,
    Jump,
    Boost,
    Handbrake,
}

impl KbmTarget {
    fn is_flag(self) -> bool {
        matches!(self, KbmTarget::Jump | KbmTarget::Boost | KbmTarget::Handbrake)
    }

    fn write(self, action: &mut ActionVector, value: f64) {
        match self {
            KbmTarget::Throttle => action.throttle = value,
            KbmTarget::Steer => action.steer = value,
            KbmTarget::Pitch => action.pitch = value,
            KbmTarget::Yaw => action.yaw = value,
            KbmTarget::Roll => action.roll = value,
            KbmTarget::Jump => action.jump = value != 0.0,
            KbmTarget::Boost => action.boost = value != 0.0,
            KbmTarget::Handbrake => action.handbrake = value != 0.0,
        }
    }

    fn read(self, action: &ActionVector) -> f64 {
        match self {
            KbmTarget::Throttle => action.throttle,
            KbmTarget::Steer => action.steer,
            KbmTarget::Pitch => action.pitch,
            KbmTarget::Yaw => action.yaw,
            KbmTarget::Roll => action.roll,
            KbmTarget::Jump => action.jump as u8 as f64,
            KbmTarget::Boost => action.boost as u8 as f64,
            KbmTarget::Handbrake => action.handbrake as u8 as f64,
        }
    }
}

/// One discrete slot of the keyboard-and-mouse action space. Trinary slots
/// (arity 3) decode raw values 0/1/2 to -1/0/+1; binary slots (arity 2)
/// decode 0/1 directly. `always` targets are driven in both contexts;
/// `airborne`/`grounded` targets only in theirs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbmSlot {
    pub arity: u8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub always: Vec<KbmTarget>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub airborne: Vec<KbmTarget>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grounded: Vec<KbmTarget>,
}

/// The 5-slot to 8-action expansion table, shipped as data.
///
/// The default couples throttle with pitch and steer with yaw (the secondary
/// target engages only when airborne), maps the third trinary slot to air
/// roll or, when grounded, to the handbrake flag, and keeps jump and boost
/// as plain binary slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbmTable {
    #[serde(rename = "slot")]
    pub slots: Vec<KbmSlot>,
}

impl Default for KbmTable {
    fn default() -> Self {
        let slot = |arity, always: &[KbmTarget], airborne: &[KbmTarget], grounded: &[KbmTarget]| {
            KbmSlot {
                arity,
                always: always.to_vec(),
                airborne: airborne.to_vec(),
                grounded: grounded.to_vec(),
            }
        };
        KbmTable {
            slots: vec![
                slot(3, &[KbmTarget::Throttle], &[KbmTarget::Pitch], &[]),
                slot(3, &[KbmTarget::Steer], &[KbmTarget::Yaw], &[]),
                slot(3, &[], &[KbmTarget::Roll], &[KbmTarget::Handbrake]),
                slot(2, &[KbmTarget::Jump], &[], &[]),
                slot(2, &[KbmTarget::Boost], &[], &[]),
            ],
        }
    }
}

impl KbmTable {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: KbmTable = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("KBM tables always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots.is_empty() {
            return Err(Error::Spec("KBM table needs at least one slot".into()));
        }
        for (i, slot) in self.slots.iter().enumerate() {
            if !(2..=3).contains(&slot.arity) {
                return Err(Error::Spec(format!(
                    "KBM slot {i}: arity must be 2 or 3, got {}",
                    slot.arity
                )));
            }
            if slot.always.is_empty() && slot.airborne.is_empty() && slot.grounded.is_empty() {
                return Err(Error::Spec(format!("KBM slot {i} drives no targets")));
            }
        }
        // A target driven by two slots in the same context would make the
        // expansion order-dependent.
        for context in [false, true] {
            let mut seen: Vec<KbmTarget> = Vec::new();
            for (i, slot) in self.slots.iter().enumerate() {
                let extra = if context { &slot.airborne } else { &slot.grounded };
                for target in slot.always.iter().chain(extra) {
                    if seen.contains(target) {
                        return Err(Error::Spec(format!(
                            "KBM slot {i}: target {target:?} already driven by an earlier slot"
                        )));
                    }
                    seen.push(*target);
                }
            }
        }
        Ok(())
    }

    /// Expands a discrete raw vector through the table. `on_ground` selects
    /// which context-gated targets engage.
    pub fn expand(&self, raw: &[u8], on_ground: bool) -> Result<ActionVector> {
        if raw.len() != self.slots.len() {
            return Err(Error::Parameter(format!(
                "raw action has {} slots, table expects {}",
                raw.len(),
                self.slots.len()
            )));
        }
        let mut action = ActionVector::zero();
        for (i, (slot, &value)) in self.slots.iter().zip(raw).enumerate() {
            if value >= slot.arity {
                return Err(Error::Parameter(format!(
                    "slot {i} value {value} out of arity {}",
                    slot.arity
                )));
            }
            let decoded = match slot.arity {
                3 => value as f64 - 1.0,
                _ => value as f64,
            };
            let context = if on_ground { &slot.grounded } else { &slot.airborne };
            for target in slot.always.iter().chain(context) {
                let v = if target.is_flag() { (decoded != 0.0) as u8 as f64 } else { decoded };
                target.write(&mut action, v);
            }
        }
        Ok(action)
    }

    /// Reads an [`ActionVector`] back into raw slot values using the first
    /// driven target of each slot. Exact inverse of [`KbmTable::expand`] for
    /// the airborne context; when grounded, a flag target recovers only
    /// pressed/not-pressed, so a trinary slot collapses to neutral or +1.
    pub fn read_back(&self, action: &ActionVector, on_ground: bool) -> Vec<u8> {
        self.slots
            .iter()
            .map(|slot| {
                let context = if on_ground { &slot.grounded } else { &slot.airborne };
                let target = slot.always.iter().chain(context).next();
                let Some(target) = target else { return 0 };
                let v = target.read(action);
                match slot.arity {
                    3 => {
                        if target.is_flag() {
                            if v != 0.0 { 2 } else { 1 }
                        } else if v < -0.5 {
                            0
                        } else if v > 0.5 {
                            2
                        } else {
                            1
                        }
                    }
                    _ => (v != 0.0) as u8,
                }
            })
            .collect()
    }
}

/// Expands a raw 5-slot vector through the default table, grounded context.
pub fn parse_kbm_actions(raw: &[u8]) -> Result<ActionVector> {
    KbmTable::default().expand(raw, true)
}
