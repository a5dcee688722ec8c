//! Replay ingestion: frame CSVs to game states to reward timelines.
//!
//! The canonical CSV schema has one row per frame with columns
//! `frame` (optional), `ball_pos_{x,y,z}`, `ball_vel_{x,y,z}`, optional
//! `ball_ang_vel_{x,y,z}`, and per player i: `player{i}_pos_{x,y,z}`,
//! `player{i}_vel_{x,y,z}`, `player{i}_boost`, `player{i}_team` (0/blue or
//! 1/orange). Other columns are ignored. A [`ColumnMap`] renames canonical
//! columns to whatever the exporter produced. Rows with unparseable numeric
//! cells are dropped and counted rather than failing the file.
//!
//! Replays carry no car rotations, so rebuilt cars face along their planar
//! velocity (or their attack direction when still); rewards never read car
//! orientation, this only affects re-exported states.
//!
//! Reward evaluation samples every (n_skip+1)-th frame. Touches are inferred
//! from proximity (car-ball distance < ball radius + 120) combined with a
//! ball velocity discontinuity > 50 uu/s; goals from the ball center
//! crossing a goal line inside the mouth. Shots, saves, and demolitions are
//! not inferred: positions alone cannot establish them reliably, so those
//! flags stay false.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::arena::{
    goal_crossing, ArenaConstants, GameState, PhysObject, PlayerState, Team, Vec3,
};
use crate::compose::{step_rewards, PlayerRewardOutput, RewardSpec};
use crate::error::{Error, Result};
use crate::rewards::EventFlags;

/// Car-ball center distance margin over the ball radius that counts as
/// contact between evaluated frames.
const TOUCH_MARGIN: f64 = 120.0;
/// Minimum ball velocity discontinuity (uu/s) that counts as an impulse.
const TOUCH_IMPULSE: f64 = 50.0;
/// Planar speed below which a car's heading falls back to its attack
/// direction.
const HEADING_SPEED_FLOOR: f64 = 1.0;

/// Renames canonical column names to the names present in a CSV header.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    /// canonical name -> actual header name
    #[serde(default)]
    pub overrides: BTreeMap<String, String>,
}

impl ColumnMap {
    pub fn resolve<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.overrides
            .get(canonical)
            .map(String::as_str)
            .unwrap_or(canonical)
    }

    /// Reads the `[columns]` section of a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize, Default)]
        #[serde(default)]
        struct Wrapper {
            columns: BTreeMap<String, String>,
        }
        let wrapper: Wrapper = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(ColumnMap { overrides: wrapper.columns })
    }
}

/// One parsed frame, players in CSV order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayFrame {
    pub frame: u64,
    pub ball: PhysObject,
    pub players: Vec<PlayerState>,
}

/// A typed replay: ordered frames plus parse bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayFrameTable {
    pub frames: Vec<ReplayFrame>,
    pub player_count: usize,
    /// Rows discarded because a numeric or team cell failed to parse.
    pub dropped_rows: usize,
    pub has_ball_angular_velocity: bool,
}

impl ReplayFrameTable {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Team of each player in CSV order, from the first frame.
    pub fn teams(&self) -> Vec<Team> {
        self.frames
            .first()
            .map(|f| f.players.iter().map(|p| p.team).collect())
            .unwrap_or_default()
    }

    /// CSV player indices reordered blue-first (stable within each team),
    /// the order used by every [`GameState`] built from this table.
    pub fn state_order(&self) -> Vec<usize> {
        let teams = self.teams();
        let mut order: Vec<usize> = (0..teams.len())
            .filter(|i| teams[*i] == Team::Blue)
            .collect();
        order.extend((0..teams.len()).filter(|i| teams[*i] == Team::Orange));
        order
    }

    /// Builds the game state for one frame, players regrouped blue-first.
    pub fn game_state(&self, index: usize, order: &[usize]) -> GameState {
        let frame = &self.frames[index];
        GameState {
            ball: frame.ball,
            players: order.iter().map(|i| frame.players[*i]).collect(),
            tick: frame.frame,
        }
    }
}

fn parse_team(cell: &str) -> Option<Team> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "0" | "blue" => Some(Team::Blue),
        "1" | "orange" => Some(Team::Orange),
        _ => None,
    }
}

fn car_body(position: Vec3, velocity: Vec3, team: Team) -> PhysObject {
    let planar = Vec3::new(velocity.x, velocity.y, 0.0);
    let forward = if planar.norm() > HEADING_SPEED_FLOOR {
        planar.normalized().unwrap()
    } else {
        Vec3::new(0.0, team.attack_sign(), 0.0)
    };
    PhysObject {
        position,
        linear_velocity: velocity,
        angular_velocity: Vec3::ZERO,
        forward,
        up: Vec3::new(0.0, 0.0, 1.0),
    }
}

struct ColumnIndex {
    frame: Option<usize>,
    ball_pos: [usize; 3],
    ball_vel: [usize; 3],
    ball_ang_vel: Option<[usize; 3]>,
    // per player: pos xyz, vel xyz, boost, team
    players: Vec<([usize; 3], [usize; 3], usize, usize)>,
}

fn index_columns(headers: &csv::StringRecord, map: &ColumnMap) -> Result<ColumnIndex> {
    let mut by_name: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, name) in headers.iter().enumerate() {
        by_name.entry(name.trim()).or_insert(i);
    }
    let find = |canonical: String| -> Result<usize> {
        let resolved = map.resolve(&canonical).to_string();
        by_name
            .get(resolved.as_str())
            .copied()
            .ok_or(Error::MissingColumn(resolved))
    };
    let try_find = |canonical: String| -> Option<usize> {
        let resolved = map.resolve(&canonical);
        by_name.get(resolved).copied()
    };

    let axes = ["x", "y", "z"];
    let mut ball_pos = [0; 3];
    let mut ball_vel = [0; 3];
    for (k, axis) in axes.iter().enumerate() {
        ball_pos[k] = find(format!("ball_pos_{axis}"))?;
        ball_vel[k] = find(format!("ball_vel_{axis}"))?;
    }
    let ang: Vec<Option<usize>> = axes
        .iter()
        .map(|axis| try_find(format!("ball_ang_vel_{axis}")))
        .collect();
    let ball_ang_vel = match (ang[0], ang[1], ang[2]) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        _ => None,
    };

    let mut players = Vec::new();
    let mut i = 0;
    while try_find(format!("player{i}_pos_x")).is_some() {
        let mut pos = [0; 3];
        let mut vel = [0; 3];
        for (k, axis) in axes.iter().enumerate() {
            pos[k] = find(format!("player{i}_pos_{axis}"))?;
            vel[k] = find(format!("player{i}_vel_{axis}"))?;
        }
        let boost = find(format!("player{i}_boost"))?;
        let team = find(format!("player{i}_team"))?;
        players.push((pos, vel, boost, team));
        i += 1;
    }
    if players.is_empty() {
        return Err(Error::MissingColumn(map.resolve("player0_pos_x").to_string()));
    }

    Ok(ColumnIndex {
        frame: try_find("frame".to_string()),
        ball_pos,
        ball_vel,
        ball_ang_vel,
        players,
    })
}

/// Parses a replay CSV from any reader. See the module docs for the schema.
pub fn parse_replay_csv_reader<R: Read>(reader: R, map: &ColumnMap) -> Result<ReplayFrameTable> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header row: {e}")))?
        .clone();
    if headers.is_empty() {
        return Err(Error::Empty("replay file has no header row".into()));
    }
    let index = index_columns(&headers, map)?;

    let mut frames: Vec<ReplayFrame> = Vec::new();
    let mut dropped = 0usize;
    for (row_number, record) in csv_reader.records().enumerate() {
        let record = match record {
            Ok(r) => r,
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        match parse_row(&record, &index, row_number as u64, frames.len() as u64) {
            Some(frame) => {
                if let Some(last) = frames.last() {
                    if frame.frame <= last.frame {
                        return Err(Error::Schema(format!(
                            "frame index {} at row {} does not increase (previous {})",
                            frame.frame,
                            row_number + 2,
                            last.frame
                        )));
                    }
                }
                frames.push(frame);
            }
            None => dropped += 1,
        }
    }

    if frames.is_empty() {
        return Err(Error::Empty(format!(
            "replay contains no usable frames ({dropped} dropped)"
        )));
    }

    Ok(ReplayFrameTable {
        player_count: index.players.len(),
        has_ball_angular_velocity: index.ball_ang_vel.is_some(),
        frames,
        dropped_rows: dropped,
    })
}

fn parse_row(
    record: &csv::StringRecord,
    index: &ColumnIndex,
    _row: u64,
    ordinal: u64,
) -> Option<ReplayFrame> {
    let cell = |i: usize| -> Option<f64> { record.get(i)?.trim().parse::<f64>().ok() };
    let vec3 = |idx: &[usize; 3]| -> Option<Vec3> {
        Some(Vec3::new(cell(idx[0])?, cell(idx[1])?, cell(idx[2])?))
    };

    let frame = match index.frame {
        Some(i) => record.get(i)?.trim().parse::<u64>().ok()?,
        None => ordinal,
    };
    let ball_pos = vec3(&index.ball_pos)?;
    let ball_vel = vec3(&index.ball_vel)?;
    let ball_ang = match &index.ball_ang_vel {
        Some(idx) => vec3(idx)?,
        None => Vec3::ZERO,
    };
    if !ball_pos.is_finite() || !ball_vel.is_finite() || !ball_ang.is_finite() {
        return None;
    }
    let ball = PhysObject {
        position: ball_pos,
        linear_velocity: ball_vel,
        angular_velocity: ball_ang,
        forward: Vec3::new(1.0, 0.0, 0.0),
        up: Vec3::new(0.0, 0.0, 1.0),
    };

    let mut players = Vec::with_capacity(index.players.len());
    for (pos_idx, vel_idx, boost_idx, team_idx) in &index.players {
        let pos = vec3(pos_idx)?;
        let vel = vec3(vel_idx)?;
        if !pos.is_finite() || !vel.is_finite() {
            return None;
        }
        let boost = cell(*boost_idx)?.clamp(0.0, 100.0);
        let team = parse_team(record.get(*team_idx)?)?;
        players.push(PlayerState {
            body: car_body(pos, vel, team),
            boost,
            team,
            on_ground: pos.z < 50.0,
            has_flip: true,
            demolished: false,
        });
    }

    Some(ReplayFrame { frame, ball, players })
}

/// Parses a replay CSV file.
pub fn parse_replay_csv(path: &Path, map: &ColumnMap) -> Result<ReplayFrameTable> {
    let file = std::fs::File::open(path)?;
    parse_replay_csv_reader(file, map)
}

/// One evaluated frame of a timeline. Players follow the table's blue-first
/// state order; `player_csv_indices` on the timeline maps back to CSV slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineFrame {
    pub frame: u64,
    pub events: Vec<EventFlags>,
    pub players: Vec<PlayerRewardOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardTimeline {
    pub n_skip: usize,
    /// Team per player, state order.
    pub player_teams: Vec<Team>,
    /// CSV player index per state-order slot.
    pub player_csv_indices: Vec<usize>,
    pub frames: Vec<TimelineFrame>,
}

impl RewardTimeline {
    pub fn player_count(&self) -> usize {
        self.player_teams.len()
    }
}

/// Infers touch flags and goal attribution between two evaluated states.
/// Returns the flags and the toucher (closest car when several qualify).
fn infer_events(
    prev: &GameState,
    state: &GameState,
    last_toucher: Option<usize>,
    arena: &ArenaConstants,
) -> (Vec<EventFlags>, Option<usize>) {
    let n = state.players.len();
    let mut events = vec![EventFlags::default(); n];

    let impulse = (state.ball.linear_velocity - prev.ball.linear_velocity).norm();
    let mut toucher: Option<(usize, f64)> = None;
    if impulse > TOUCH_IMPULSE {
        for (i, player) in state.players.iter().enumerate() {
            let gap = (state.ball.position - player.body.position).norm();
            if gap < arena.ball_radius + TOUCH_MARGIN {
                events[i].touch = true;
                if toucher.map(|(_, best)| gap < best).unwrap_or(true) {
                    toucher = Some((i, gap));
                }
            }
        }
    }
    let toucher = toucher.map(|(i, _)| i).or(last_toucher);

    if let Some(scoring) = goal_crossing(prev.ball.position, state.ball.position, arena) {
        for (i, player) in state.players.iter().enumerate() {
            if player.team == scoring {
                events[i].team_goal = true;
            } else {
                events[i].concede = true;
            }
        }
        if let Some(t) = toucher {
            if state.players[t].team == scoring {
                events[t].goal = true;
            }
        }
    }

    (events, toucher)
}

/// Evaluates a reward timeline over every (n_skip+1)-th frame. The previous
/// evaluated frame supplies the shaping and touch-acceleration context; the
/// first evaluated frame has no predecessor, so its shaping term is zero.
pub fn replay_to_rewards(
    table: &ReplayFrameTable,
    spec: &RewardSpec,
    n_skip: usize,
    arena: &ArenaConstants,
) -> Result<RewardTimeline> {
    if table.is_empty() {
        return Err(Error::Empty("replay table has no frames".into()));
    }
    let teams_csv = table.teams();
    for frame in &table.frames {
        if frame.players.len() != teams_csv.len()
            || frame.players.iter().zip(&teams_csv).any(|(p, t)| p.team != *t)
        {
            return Err(Error::State(format!(
                "roster change at frame {}",
                frame.frame
            )));
        }
    }

    let order = table.state_order();
    let player_teams: Vec<Team> = order.iter().map(|i| teams_csv[*i]).collect();

    let stride = n_skip + 1;
    let mut frames = Vec::with_capacity(table.len().div_ceil(stride));
    let mut previous: Option<GameState> = None;
    let mut last_toucher: Option<usize> = None;

    for idx in (0..table.len()).step_by(stride) {
        let state = table.game_state(idx, &order);
        let events = match &previous {
            None => vec![EventFlags::default(); state.players.len()],
            Some(prev) => {
                let (events, toucher) = infer_events(prev, &state, last_toucher, arena);
                last_toucher = toucher;
                events
            }
        };
        let output = step_rewards(spec, previous.as_ref(), &state, &events, arena)?;
        frames.push(TimelineFrame {
            frame: state.tick,
            events,
            players: output.players,
        });
        previous = Some(state);
    }

    Ok(RewardTimeline {
        n_skip,
        player_teams,
        player_csv_indices: order,
        frames,
    })
}

/// Flattens a timeline to CSV: one row per (frame, player), breakdowns as
/// `reward.<key>` / `utility.<key>` columns.
pub fn timeline_to_csv(timeline: &RewardTimeline) -> String {
    let mut reward_keys: Vec<String> = Vec::new();
    let mut utility_keys: Vec<String> = Vec::new();
    if let Some(frame) = timeline.frames.first() {
        if let Some(p) = frame.players.first() {
            reward_keys = p.reward_breakdown.keys().cloned().collect();
            utility_keys = p.utility_breakdown.keys().cloned().collect();
        }
    }
    let mut out = String::from("frame,player,team,reward,shaping,shaped,distributed,utility");
    for k in &reward_keys {
        out.push_str(",reward.");
        out.push_str(k);
    }
    for k in &utility_keys {
        out.push_str(",utility.");
        out.push_str(k);
    }
    out.push('\n');
    for frame in &timeline.frames {
        for (slot, p) in frame.players.iter().enumerate() {
            let team = match timeline.player_teams[slot] {
                Team::Blue => "blue",
                Team::Orange => "orange",
            };
            let csv_index = timeline.player_csv_indices[slot];
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}",
                frame.frame, csv_index, team, p.reward, p.shaping, p.shaped, p.distributed, p.utility
            ));
            for k in &reward_keys {
                out.push_str(&format!(",{}", p.reward_breakdown.get(k).copied().unwrap_or(0.0)));
            }
            for k in &utility_keys {
                out.push_str(&format!(",{}", p.utility_breakdown.get(k).copied().unwrap_or(0.0)));
            }
            out.push('\n');
        }
    }
    out
}
