//! Reward shaping and arena analysis for Rocket-League-style field games.
//!
//! The crate covers the full path from raw game states to the scalars an
//! agent trains on: arena geometry and state validation ([`arena`]), the
//! reward component catalog ([`rewards`]), composition into shaped and
//! team-distributed rewards ([`compose`]), attention-ready observation
//! encoding ([`obs`]), pairwise-distance graph adjacency ([`graph`]), replay
//! CSV ingestion ([`replay`]), reward fields over the arena plane
//! ([`field`]), a small deterministic simulator ([`sim`]), and auxiliary
//! task preparation and losses ([`objectives`]).
//!
//! Conventions shared by every module: Blue attacks +y and Orange attacks
//! -y, positions stay in unnormalized arena units (uu) until an encoder says
//! otherwise, rosters list Blue before Orange, and anything configurable
//! validates on construction so evaluation paths stay infallible where the
//! math is total.

pub mod arena;
pub mod compose;
pub mod error;
pub mod field;
pub mod graph;
pub mod objectives;
pub mod obs;
pub mod replay;
pub mod rewards;
pub mod sim;

pub use arena::{ArenaConstants, GameState, PhysObject, PlayerState, Team, Vec3};
pub use compose::{
    distribute_team_spirit, krc_combine, shaping_term, step_rewards, PlayerRewardOutput,
    RewardSpec, ShapedRewardOutput,
};
pub use error::{Error, Result};
pub use rewards::{parameterized_distance, Component, ComponentContext, EventFlags, EventKind};
