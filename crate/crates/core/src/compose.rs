//! Reward composition: spec trees, KRC, potential-based shaping, and team
//! spirit distribution.
//!
//! A [`RewardSpec`] holds two trees. The `reward` tree is paid directly each
//! step; the `utility` tree defines a potential Φ over states, paid as the
//! shaping term `F = γ·Φ(s') − Φ(s)`. Because F telescopes, the shaping sum
//! over any episode collapses to `Φ(s_T) − Φ(s_0)` and the optimal policy is
//! unchanged. Shaped rewards are then blended within each team:
//! `𝓡'_i = (1−τ)·R'_i + τ·mean(team) − mean(opponent)`, which is zero-sum
//! across equal-sized teams.
//!
//! Trees nest three node kinds: `leaf` (a catalog component with a weight),
//! `linear` (weighted sum), and `krc` (kinesthetic reward combination: the
//! geometric mean of the children's magnitudes, positive only when every
//! child is positive). KRC children take no weights; scaling belongs outside
//! the combination.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::arena::{ArenaConstants, GameState, Team};
use crate::error::{Error, Result};
use crate::rewards::{Component, ComponentContext, EventFlags};

/// Built-in preset: the full shaped reward.
pub const LUCY_SKG_TOML: &str = include_str!("../../../configs/lucy_skg.toml");
/// Built-in preset: sparse event rewards for auxiliary-task ablations.
pub const AUX_ABLATION_TOML: &str = include_str!("../../../configs/aux_ablation.toml");

/// Kinesthetic reward combination: `sgn · (∏|r_i|)^(1/n)`, where sgn is +1
/// only when every input is strictly positive. Any zero input zeroes the
/// result; a single input passes through unchanged, sign included.
pub fn krc_combine(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Parameter("krc_combine needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("krc_combine inputs must be finite".into()));
    }
    if values.len() == 1 {
        return Ok(values[0]);
    }
    let mut product = 1.0;
    for v in values {
        product *= v.abs();
    }
    if product == 0.0 {
        return Ok(0.0);
    }
    let magnitude = product.powf(1.0 / values.len() as f64);
    if values.iter().all(|v| *v > 0.0) {
        Ok(magnitude)
    } else {
        Ok(-magnitude)
    }
}

/// Potential-based shaping term. `None` for the previous potential marks the
/// first step of an episode, where F is defined as 0.
pub fn shaping_term(previous: Option<f64>, current: f64, gamma: f64) -> f64 {
    match previous {
        None => 0.0,
        Some(prev) => gamma * current - prev,
    }
}

/// Team spirit distribution over shaped rewards. Requires one team entry per
/// reward, τ in [0, 1], and at least one player per team.
pub fn distribute_team_spirit(shaped: &[f64], teams: &[Team], tau: f64) -> Result<Vec<f64>> {
    if shaped.len() != teams.len() {
        return Err(Error::Parameter(format!(
            "distribute_team_spirit got {} rewards for {} team labels",
            shaped.len(),
            teams.len()
        )));
    }
    if !tau.is_finite() || !(0.0..=1.0).contains(&tau) {
        return Err(Error::Parameter(format!("team_spirit must be in [0, 1], got {tau}")));
    }
    let mut sum = [0.0f64; 2];
    let mut count = [0usize; 2];
    for (r, team) in shaped.iter().zip(teams) {
        let side = *team as usize;
        sum[side] += r;
        count[side] += 1;
    }
    if count[0] == 0 || count[1] == 0 {
        return Err(Error::Parameter(
            "team spirit needs at least one player on each team".into(),
        ));
    }
    let mean = [sum[0] / count[0] as f64, sum[1] / count[1] as f64];
    Ok(shaped
        .iter()
        .zip(teams)
        .map(|(r, team)| {
            let own = *team as usize;
            let opp = team.opponent() as usize;
            (1.0 - tau) * r + tau * mean[own] - mean[opp]
        })
        .collect())
}

/// A compiled node of a reward or utility tree.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecNode {
    Leaf {
        component: Component,
        weight: f64,
        key: String,
    },
    Linear {
        weight: f64,
        key: String,
        children: Vec<SpecNode>,
    },
    Krc {
        weight: f64,
        key: String,
        children: Vec<SpecNode>,
    },
}

impl SpecNode {
    pub fn weight(&self) -> f64 {
        match self {
            SpecNode::Leaf { weight, .. }
            | SpecNode::Linear { weight, .. }
            | SpecNode::Krc { weight, .. } => *weight,
        }
    }

    pub fn key(&self) -> &str {
        match self {
            SpecNode::Leaf { key, .. }
            | SpecNode::Linear { key, .. }
            | SpecNode::Krc { key, .. } => key,
        }
    }

    /// An empty linear node; the identity utility (Φ ≡ 0).
    pub fn empty() -> SpecNode {
        SpecNode::Linear {
            weight: 1.0,
            key: "empty".to_string(),
            children: Vec::new(),
        }
    }

    /// Unweighted value of this node (the parent applies this node's weight).
    pub fn evaluate(&self, ctx: &ComponentContext) -> Result<f64> {
        match self {
            SpecNode::Leaf { component, .. } => component.evaluate(ctx),
            SpecNode::Linear { children, .. } => {
                let mut total = 0.0;
                for child in children {
                    total += child.weight() * child.evaluate(ctx)?;
                }
                Ok(total)
            }
            SpecNode::Krc { children, .. } => {
                let mut values = Vec::with_capacity(children.len());
                for child in children {
                    values.push(child.evaluate(ctx)?);
                }
                krc_combine(&values)
            }
        }
    }

    /// Weighted total plus a per-child breakdown. For a linear root the map
    /// holds one entry per child (weighted, root weight folded in) and the
    /// total is their exact sum; other roots produce a single entry.
    pub fn evaluate_with_breakdown(
        &self,
        ctx: &ComponentContext,
    ) -> Result<(f64, BTreeMap<String, f64>)> {
        let mut breakdown = BTreeMap::new();
        match self {
            SpecNode::Linear { weight, children, .. } => {
                let mut total = 0.0;
                for child in children {
                    let contribution = weight * child.weight() * child.evaluate(ctx)?;
                    total += contribution;
                    *breakdown.entry(child.key().to_string()).or_insert(0.0) += contribution;
                }
                Ok((total, breakdown))
            }
            _ => {
                let total = self.weight() * self.evaluate(ctx)?;
                breakdown.insert(self.key().to_string(), total);
                Ok((total, breakdown))
            }
        }
    }

    /// Breakdown keys in the order [`evaluate_with_breakdown`] would emit
    /// them, without evaluating.
    pub fn breakdown_keys(&self) -> Vec<String> {
        match self {
            SpecNode::Linear { children, .. } => {
                let mut keys: Vec<String> = Vec::new();
                for child in children {
                    let key = child.key().to_string();
                    if !keys.contains(&key) {
                        keys.push(key);
                    }
                }
                keys.sort();
                keys
            }
            _ => vec![self.key().to_string()],
        }
    }

    fn for_each_component(&self, f: &mut impl FnMut(&Component)) {
        match self {
            SpecNode::Leaf { component, .. } => f(component),
            SpecNode::Linear { children, .. } | SpecNode::Krc { children, .. } => {
                for child in children {
                    child.for_each_component(f);
                }
            }
        }
    }
}

fn default_weight() -> f64 {
    1.0
}

/// On-disk node shape, shared by the TOML and JSON readers.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    #[serde(rename = "type")]
    kind: String,
    name: Option<String>,
    label: Option<String>,
    #[serde(default = "default_weight")]
    weight: f64,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    children: Vec<RawNode>,
}

impl RawNode {
    fn compile(&self, path: &str, inside_krc: bool) -> Result<SpecNode> {
        if !self.weight.is_finite() {
            return Err(Error::Spec(format!("{path}: weight must be finite")));
        }
        if inside_krc && self.weight != 1.0 {
            return Err(Error::Spec(format!(
                "{path}: KRC children cannot carry weights (got {}); scale outside the combination",
                self.weight
            )));
        }
        match self.kind.as_str() {
            "leaf" => {
                let name = self.name.as_deref().ok_or_else(|| {
                    Error::Spec(format!("{path}: leaf nodes need a component `name`"))
                })?;
                if !self.children.is_empty() {
                    return Err(Error::Spec(format!("{path}: leaf nodes take no children")));
                }
                let component = Component::from_name(name, &self.params)
                    .map_err(|e| match e {
                        Error::Spec(msg) => Error::Spec(format!("{path}: {msg}")),
                        Error::Parameter(msg) => Error::Parameter(format!("{path}: {msg}")),
                        other => other,
                    })?;
                let key = self.label.clone().unwrap_or_else(|| name.to_string());
                Ok(SpecNode::Leaf { component, weight: self.weight, key })
            }
            "linear" | "krc" => {
                if self.name.is_some() {
                    return Err(Error::Spec(format!(
                        "{path}: `name` belongs on leaf nodes; use `label` here"
                    )));
                }
                if !self.params.is_empty() {
                    return Err(Error::Spec(format!("{path}: combination nodes take no params")));
                }
                let is_krc = self.kind == "krc";
                if is_krc && self.children.is_empty() {
                    return Err(Error::Spec(format!("{path}: krc nodes need at least one child")));
                }
                let mut children = Vec::with_capacity(self.children.len());
                for (i, child) in self.children.iter().enumerate() {
                    children.push(child.compile(&format!("{path}.children[{i}]"), is_krc)?);
                }
                let key = self
                    .label
                    .clone()
                    .unwrap_or_else(|| self.kind.clone());
                Ok(if is_krc {
                    SpecNode::Krc { weight: self.weight, key, children }
                } else {
                    SpecNode::Linear { weight: self.weight, key, children }
                })
            }
            other => Err(Error::Spec(format!(
                "{path}: unknown node type `{other}` (expected leaf, linear, or krc)"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    team_spirit: f64,
    #[serde(default = "default_weight")]
    shaping_gamma: f64,
    reward: RawNode,
    utility: Option<RawNode>,
}

/// A full reward definition: direct rewards, shaping potential, and the
/// distribution parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSpec {
    pub reward: SpecNode,
    pub utility: SpecNode,
    pub shaping_gamma: f64,
    pub team_spirit: f64,
}

impl RewardSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::compile(raw)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::compile(raw)
    }

    /// Loads a spec file, JSON for `.json`, TOML otherwise.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["lucy_skg", "aux_ablation"]
    }

    /// One of the compiled-in presets.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "lucy_skg" => Self::from_toml_str(LUCY_SKG_TOML),
            "aux_ablation" => Self::from_toml_str(AUX_ABLATION_TOML),
            other => Err(Error::Spec(format!(
                "unknown built-in spec `{other}`; available: {}",
                Self::builtin_names().join(", ")
            ))),
        }
    }

    /// Resolves a CLI-style argument: an existing file path wins, otherwise
    /// the name is looked up among the built-ins.
    pub fn resolve(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.exists() {
            Self::from_file(path)
        } else {
            Self::builtin(arg)
        }
    }

    fn compile(raw: RawSpec) -> Result<Self> {
        let reward = raw.reward.compile("reward", false)?;
        let utility = match &raw.utility {
            Some(node) => node.compile("utility", false)?,
            None => SpecNode::empty(),
        };
        let spec = RewardSpec {
            reward,
            utility,
            shaping_gamma: raw.shaping_gamma,
            team_spirit: raw.team_spirit,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.team_spirit.is_finite() || !(0.0..=1.0).contains(&self.team_spirit) {
            return Err(Error::Spec(format!(
                "team_spirit must be in [0, 1], got {}",
                self.team_spirit
            )));
        }
        if !self.shaping_gamma.is_finite()
            || self.shaping_gamma <= 0.0
            || self.shaping_gamma > 1.0
        {
            return Err(Error::Spec(format!(
                "shaping_gamma must be in (0, 1], got {}",
                self.shaping_gamma
            )));
        }
        // A potential must be a pure function of one state; event-scoped
        // components would silently read absent flags.
        let mut bad: Option<&'static str> = None;
        self.utility.for_each_component(&mut |c| {
            if c.is_event_scoped() && bad.is_none() {
                bad = Some(c.name());
            }
        });
        if let Some(name) = bad {
            return Err(Error::Spec(format!(
                "utility tree contains event-scoped component `{name}`; potentials must depend on state only"
            )));
        }
        Ok(())
    }
}

/// Per-player result of one reward step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRewardOutput {
    /// Direct reward R from the event tree.
    pub reward: f64,
    /// Potential Φ(s') of the current state (0 while demolished).
    pub utility: f64,
    /// Potential Φ(s) of the previous state; `None` on the first step.
    pub previous_utility: Option<f64>,
    /// Shaping term F = γ·Φ(s') − Φ(s); 0 on the first step.
    pub shaping: f64,
    /// R' = R + F.
    pub shaped: f64,
    /// 𝓡' after team spirit distribution.
    pub distributed: f64,
    pub reward_breakdown: BTreeMap<String, f64>,
    pub utility_breakdown: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapedRewardOutput {
    pub players: Vec<PlayerRewardOutput>,
}

fn zeroed_breakdown(node: &SpecNode) -> BTreeMap<String, f64> {
    node.breakdown_keys().into_iter().map(|k| (k, 0.0)).collect()
}

/// Evaluates one full reward step for every player: direct rewards, the
/// shaping term against `previous` (F = 0 when `previous` is `None`), and
/// team spirit distribution. Demolished players contribute Φ = 0 on either
/// side of the step.
pub fn step_rewards(
    spec: &RewardSpec,
    previous: Option<&GameState>,
    state: &GameState,
    events: &[EventFlags],
    arena: &ArenaConstants,
) -> Result<ShapedRewardOutput> {
    let n = state.players.len();
    if events.len() != n {
        return Err(Error::State(format!(
            "got {} event flag sets for {} players",
            events.len(),
            n
        )));
    }
    for (i, flags) in events.iter().enumerate() {
        flags
            .validate()
            .map_err(|e| Error::State(format!("player {i}: {e}")))?;
    }
    if let Some(prev) = previous {
        if prev.players.len() != n {
            return Err(Error::State(format!(
                "previous state has {} players, current has {n}",
                prev.players.len()
            )));
        }
        for (i, (a, b)) in prev.players.iter().zip(&state.players).enumerate() {
            if a.team != b.team {
                return Err(Error::State(format!(
                    "player {i} changed team between states"
                )));
            }
        }
    }

    let mut shaped = Vec::with_capacity(n);
    let mut partial: Vec<PlayerRewardOutput> = Vec::with_capacity(n);
    for i in 0..n {
        let ctx = ComponentContext {
            state,
            previous_state: previous,
            events,
            player_index: i,
            arena,
        };
        let (reward, reward_breakdown) = spec.reward.evaluate_with_breakdown(&ctx)?;
        let (utility, utility_breakdown) = if state.players[i].demolished {
            (0.0, zeroed_breakdown(&spec.utility))
        } else {
            let (u, b) = spec.utility.evaluate_with_breakdown(&ctx)?;
            (u, b)
        };
        let previous_utility = match previous {
            None => None,
            Some(prev) => {
                if prev.players[i].demolished {
                    Some(0.0)
                } else {
                    let prev_ctx = ComponentContext {
                        state: prev,
                        previous_state: None,
                        events: &[],
                        player_index: i,
                        arena,
                    };
                    // Same code path as the current-state potential, so equal
                    // states produce bitwise-equal potentials and the shaping
                    // sum telescopes cleanly.
                    Some(spec.utility.evaluate_with_breakdown(&prev_ctx)?.0)
                }
            }
        };
        let shaping = shaping_term(previous_utility, utility, spec.shaping_gamma);
        let shaped_i = reward + shaping;
        shaped.push(shaped_i);
        partial.push(PlayerRewardOutput {
            reward,
            utility,
            previous_utility,
            shaping,
            shaped: shaped_i,
            distributed: 0.0,
            reward_breakdown,
            utility_breakdown,
        });
    }

    let teams: Vec<Team> = state.players.iter().map(|p| p.team).collect();
    let distributed = distribute_team_spirit(&shaped, &teams, spec.team_spirit)?;
    for (out, d) in partial.iter_mut().zip(distributed) {
        out.distributed = d;
    }
    Ok(ShapedRewardOutput { players: partial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{PhysObject, PlayerState, Vec3};

    fn player_at(pos: Vec3, team: Team) -> PlayerState {
        PlayerState {
            body: PhysObject::stationary_at(pos),
            boost: 64.0,
            team,
            on_ground: true,
            has_flip: true,
            demolished: false,
        }
    }

    fn state_2v2() -> GameState {
        GameState {
            ball: PhysObject::stationary_at(Vec3::new(0.0, 0.0, 92.75)),
            players: vec![
                player_at(Vec3::new(-1000.0, -2000.0, 17.0), Team::Blue),
                player_at(Vec3::new(1000.0, -2000.0, 17.0), Team::Blue),
                player_at(Vec3::new(-1000.0, 2000.0, 17.0), Team::Orange),
                player_at(Vec3::new(1000.0, 2000.0, 17.0), Team::Orange),
            ],
            tick: 0,
        }
    }

    fn no_events(n: usize) -> Vec<EventFlags> {
        vec![EventFlags::default(); n]
    }

    #[test]
    fn krc_worked_values() {
        let v = krc_combine(&[0.9, 0.1]).unwrap();
        assert!((v - 0.3).abs() < 1e-12);
        assert_eq!(krc_combine(&[0.5]).unwrap(), 0.5);
        assert_eq!(krc_combine(&[-0.7]).unwrap(), -0.7);
        assert_eq!(krc_combine(&[0.8, 0.0, -0.3]).unwrap(), 0.0);
        let v = krc_combine(&[-0.5, -0.5]).unwrap();
        assert!((v + 0.5).abs() < 1e-12);
        // One negative input flips the sign of the whole combination.
        let v = krc_combine(&[0.9, -0.1]).unwrap();
        assert!((v + 0.3).abs() < 1e-12);
    }

    #[test]
    fn krc_rejects_bad_input() {
        assert!(krc_combine(&[]).is_err());
        assert!(krc_combine(&[0.5, f64::NAN]).is_err());
        assert!(krc_combine(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn shaping_term_cases() {
        assert_eq!(shaping_term(None, 5.0, 1.0), 0.0);
        assert_eq!(shaping_term(Some(1.0), 2.0, 1.0), 1.0);
        let f = shaping_term(Some(1.0), 2.0, 0.9);
        assert!((f - 0.8).abs() < 1e-12);
    }

    #[test]
    fn team_spirit_worked_example() {
        let shaped = [1.0, 0.0, 0.0, 0.0];
        let teams = [Team::Blue, Team::Blue, Team::Orange, Team::Orange];
        let out = distribute_team_spirit(&shaped, &teams, 0.3).unwrap();
        let expected = [0.85, 0.15, -0.5, -0.5];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-12, "{o} vs {e}");
        }
        // Zero-sum across equal-sized teams.
        assert!(out.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn team_spirit_validation() {
        let teams = [Team::Blue, Team::Orange];
        assert!(distribute_team_spirit(&[1.0], &teams, 0.3).is_err());
        assert!(distribute_team_spirit(&[1.0, 2.0], &teams, 1.5).is_err());
        assert!(distribute_team_spirit(&[1.0, 2.0], &[Team::Blue, Team::Blue], 0.3).is_err());
    }

    #[test]
    fn builtin_presets_load() {
        let lucy = RewardSpec::builtin("lucy_skg").unwrap();
        assert_eq!(lucy.team_spirit, 0.3);
        assert_eq!(lucy.shaping_gamma, 1.0);
        // The event catalog carries its published weights.
        if let SpecNode::Linear { children, .. } = &lucy.reward {
            let weight_of = |key: &str| {
                children
                    .iter()
                    .find(|c| c.key() == key)
                    .map(SpecNode::weight)
                    .unwrap()
            };
            assert_eq!(weight_of("goal"), 10.0);
            assert_eq!(weight_of("concede"), -3.0);
            assert_eq!(weight_of("shot"), 1.5);
            assert_eq!(weight_of("touch_ball_to_goal_acceleration"), 0.25);
            assert_eq!(weight_of("touch"), 0.05);
            assert_eq!(weight_of("demolish"), 2.0);
            assert_eq!(weight_of("demolished"), -2.0);
        } else {
            panic!("lucy_skg reward root should be linear");
        }
        if let SpecNode::Linear { children, .. } = &lucy.utility {
            let weight_of = |key: &str| {
                children
                    .iter()
                    .find(|c| c.key() == key)
                    .map(SpecNode::weight)
                    .unwrap()
            };
            assert_eq!(weight_of("ball_to_goal_distance_difference"), 2.0);
            assert_eq!(weight_of("ball_to_goal_velocity"), 0.8);
            assert_eq!(weight_of("save_boost"), 0.5);
            assert_eq!(weight_of("distance_weighted_alignment"), 0.6);
            assert_eq!(weight_of("offensive_potential"), 1.0);
        } else {
            panic!("lucy_skg utility root should be linear");
        }

        let aux = RewardSpec::builtin("aux_ablation").unwrap();
        assert_eq!(aux.team_spirit, 0.0);
        assert_eq!(aux.utility, SpecNode::empty());
        assert!(RewardSpec::builtin("nope").is_err());
    }

    #[test]
    fn single_leaf_passes_through() {
        let text = r#"
team_spirit = 0.0
[reward]
type = "leaf"
name = "save_boost"
"#;
        let spec = RewardSpec::from_toml_str(text).unwrap();
        let state = state_2v2();
        let arena = ArenaConstants::default();
        let events = no_events(4);
        let out = step_rewards(&spec, None, &state, &events, &arena).unwrap();
        // boost 64 -> sqrt(0.64) = 0.8 exactly.
        assert_eq!(out.players[0].reward, 0.8);
        assert_eq!(out.players[0].reward_breakdown["save_boost"], 0.8);
    }

    #[test]
    fn spec_validation_errors() {
        // Weighted KRC children are not supported.
        let text = r#"
team_spirit = 0.3
[reward]
type = "krc"
[[reward.children]]
type = "leaf"
name = "save_boost"
weight = 2.0
"#;
        assert!(matches!(RewardSpec::from_toml_str(text), Err(Error::Spec(_))));

        let unknown = r#"
team_spirit = 0.3
[reward]
type = "leaf"
name = "mystery"
"#;
        assert!(matches!(RewardSpec::from_toml_str(unknown), Err(Error::Spec(_))));

        let bad_tau = r#"
team_spirit = 1.2
[reward]
type = "leaf"
name = "save_boost"
"#;
        assert!(RewardSpec::from_toml_str(bad_tau).is_err());

        // Event components cannot appear in the utility tree.
        let event_utility = r#"
team_spirit = 0.3
[reward]
type = "leaf"
name = "save_boost"
[utility]
type = "leaf"
name = "goal"
"#;
        assert!(matches!(
            RewardSpec::from_toml_str(event_utility),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn json_specs_load_too() {
        let text = r#"{
  "team_spirit": 0.3,
  "reward": {"type": "leaf", "name": "save_boost"}
}"#;
        let spec = RewardSpec::from_json_str(text).unwrap();
        assert_eq!(spec.team_spirit, 0.3);
    }

    #[test]
    fn step_rewards_shaping_identity() {
        let spec = RewardSpec::builtin("lucy_skg").unwrap();
        let arena = ArenaConstants::default();
        let prev = state_2v2();
        let mut state = state_2v2();
        state.ball.position = Vec3::new(0.0, 800.0, 92.75);
        state.tick = 1;
        let events = no_events(4);
        let out = step_rewards(&spec, Some(&prev), &state, &events, &arena).unwrap();
        for p in &out.players {
            // R' = R + F exactly, and F matches the potentials it came from.
            assert_eq!(p.shaped, p.reward + p.shaping);
            let expected_f = spec.shaping_gamma * p.utility - p.previous_utility.unwrap();
            assert_eq!(p.shaping, expected_f);
            // Breakdown entries sum to their aggregates exactly.
            let reward_sum: f64 = p.reward_breakdown.values().sum();
            assert!((reward_sum - p.reward).abs() < 1e-12);
            let utility_sum: f64 = p.utility_breakdown.values().sum();
            assert!((utility_sum - p.utility).abs() < 1e-12);
        }
        // Moving the ball toward orange helps blue and hurts orange.
        assert!(out.players[0].shaping > 0.0);
        assert!(out.players[2].shaping < 0.0);
    }

    #[test]
    fn step_rewards_first_step_has_no_shaping() {
        let spec = RewardSpec::builtin("lucy_skg").unwrap();
        let arena = ArenaConstants::default();
        let state = state_2v2();
        let events = no_events(4);
        let out = step_rewards(&spec, None, &state, &events, &arena).unwrap();
        for p in &out.players {
            assert_eq!(p.shaping, 0.0);
            assert_eq!(p.previous_utility, None);
            assert_eq!(p.shaped, p.reward);
        }
    }

    #[test]
    fn demolished_players_have_zero_potential() {
        let spec = RewardSpec::builtin("lucy_skg").unwrap();
        let arena = ArenaConstants::default();
        let prev = state_2v2();
        let mut state = state_2v2();
        state.players[1].demolished = true;
        let events = no_events(4);
        let out = step_rewards(&spec, Some(&prev), &state, &events, &arena).unwrap();
        assert_eq!(out.players[1].utility, 0.0);
        assert!(out.players[1].utility_breakdown.values().all(|v| *v == 0.0));
        // The shaping term is the full drop from the previous potential.
        assert_eq!(out.players[1].shaping, -out.players[1].previous_utility.unwrap());
        assert!(out.players[0].utility != 0.0);
    }

    #[test]
    fn step_rewards_validates_inputs() {
        let spec = RewardSpec::builtin("lucy_skg").unwrap();
        let arena = ArenaConstants::default();
        let state = state_2v2();
        // Wrong number of event sets.
        assert!(step_rewards(&spec, None, &state, &no_events(3), &arena).is_err());
        // Roster mismatch against the previous state.
        let mut prev = state_2v2();
        prev.players[3].team = Team::Blue;
        assert!(step_rewards(&spec, Some(&prev), &state, &no_events(4), &arena).is_err());
        // Contradictory flags.
        let mut events = no_events(4);
        events[0].shot = true;
        assert!(step_rewards(&spec, None, &state, &events, &arena).is_err());
    }
}
