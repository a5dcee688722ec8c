//! Arena field sampling: reward values over a horizontal plane.
//!
//! A probe car is swept across a rectangular grid at fixed height while the
//! rest of the scene (ball, other cars) stays frozen, and the chosen reward
//! component or utility tree is evaluated at every grid point. The grid is
//! rectilinear rather than triangulated: the sampled function is identical
//! and rectilinear output is what contour consumers expect. Default
//! resolution is 128x160 cells at z = 300.
//!
//! The probe always occupies Blue slot 0; scenario players fill the
//! remaining slots blue-first. Sampling never sees events or a previous
//! state, so event-scoped components and touch acceleration produce all-zero
//! fields rather than errors.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::arena::{ArenaConstants, GameState, PhysObject, PlayerState, Team, Vec3};
use crate::compose::RewardSpec;
use crate::error::{Error, Result};
use crate::rewards::{Component, ComponentContext};

/// Grid shape and placement. Axis ranges default to the arena footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub z: f64,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            nx: 128,
            ny: 160,
            z: 300.0,
            x_range: None,
            y_range: None,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Parameter(format!(
                "grid resolution must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !self.z.is_finite() {
            return Err(Error::Parameter("grid z must be finite".into()));
        }
        for (name, range) in [("x", self.x_range), ("y", self.y_range)] {
            if let Some((lo, hi)) = range {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(Error::Parameter(format!(
                        "{name} range must be finite with lo < hi, got ({lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn ranges(&self, arena: &ArenaConstants) -> ((f64, f64), (f64, f64)) {
        let x = self.x_range.unwrap_or((-arena.half_width_x, arena.half_width_x));
        let y = self.y_range.unwrap_or((-arena.half_length_y, arena.half_length_y));
        (x, y)
    }
}

/// A sampled plane: axis coordinates, flattened positions, and one value per
/// position. Flattened index is `iy * nx + ix` (x fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaGrid {
    pub nx: usize,
    pub ny: usize,
    pub z: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub positions: Vec<Vec3>,
    pub values: Vec<f64>,
}

impl ArenaGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.values {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }
}

/// Frozen scene around the probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub ball: PhysObject,
    /// Other cars; teams may mix, order is free.
    pub others: Vec<PlayerState>,
    pub probe_velocity: Vec3,
    pub probe_boost: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            ball: PhysObject::stationary_at(Vec3::new(0.0, 0.0, 93.15)),
            others: Vec::new(),
            probe_velocity: Vec3::ZERO,
            probe_boost: 100.0,
        }
    }
}

impl Scenario {
    pub fn with_ball(position: Vec3) -> Self {
        Scenario {
            ball: PhysObject::stationary_at(position),
            ..Scenario::default()
        }
    }
}

/// What to evaluate at each grid point.
#[derive(Debug, Clone)]
pub enum FieldTarget {
    /// One reward component, evaluated directly.
    Component(Component),
    /// A spec's whole utility tree (the potential function).
    Utility(RewardSpec),
}

impl FieldTarget {
    pub fn label(&self) -> String {
        match self {
            FieldTarget::Component(c) => c.name().to_string(),
            FieldTarget::Utility(_) => "utility".to_string(),
        }
    }
}

fn probe_player(position: Vec3, scenario: &Scenario) -> PlayerState {
    let planar = Vec3::new(scenario.probe_velocity.x, scenario.probe_velocity.y, 0.0);
    let forward = planar
        .normalized()
        .unwrap_or(Vec3::new(0.0, 1.0, 0.0));
    PlayerState {
        body: PhysObject {
            position,
            linear_velocity: scenario.probe_velocity,
            angular_velocity: Vec3::ZERO,
            forward,
            up: Vec3::new(0.0, 0.0, 1.0),
        },
        boost: scenario.probe_boost,
        team: Team::Blue,
        on_ground: position.z < 50.0,
        has_flip: true,
        demolished: false,
    }
}

/// Roster with the probe in Blue slot 0 and the scenario players regrouped
/// blue-first behind it.
fn build_roster(probe: PlayerState, others: &[PlayerState]) -> Vec<PlayerState> {
    let mut players = vec![probe];
    players.extend(others.iter().filter(|p| p.team == Team::Blue).cloned());
    players.extend(others.iter().filter(|p| p.team == Team::Orange).cloned());
    players
}

/// Sweeps the probe over the grid and evaluates the target at every point.
pub fn sample_field(
    target: &FieldTarget,
    scenario: &Scenario,
    grid: &GridConfig,
    arena: &ArenaConstants,
) -> Result<ArenaGrid> {
    grid.validate()?;
    if let FieldTarget::Utility(spec) = target {
        spec.validate()?;
    }
    let ((x0, x1), (y0, y1)) = grid.ranges(arena);
    let xs: Vec<f64> = (0..grid.nx)
        .map(|i| x0 + (x1 - x0) * i as f64 / (grid.nx - 1) as f64)
        .collect();
    let ys: Vec<f64> = (0..grid.ny)
        .map(|i| y0 + (y1 - y0) * i as f64 / (grid.ny - 1) as f64)
        .collect();

    let mut positions = Vec::with_capacity(grid.nx * grid.ny);
    let mut values = Vec::with_capacity(grid.nx * grid.ny);
    let mut state = GameState {
        ball: scenario.ball,
        players: build_roster(probe_player(Vec3::new(xs[0], ys[0], grid.z), scenario), &scenario.others),
        tick: 0,
    };
    state.validate(arena)?;

    for y in &ys {
        for x in &xs {
            let position = Vec3::new(*x, *y, grid.z);
            state.players[0] = probe_player(position, scenario);
            let ctx = ComponentContext {
                state: &state,
                previous_state: None,
                player_index: 0,
                events: &[],
                arena,
            };
            let value = match target {
                FieldTarget::Component(component) => component.evaluate(&ctx)?,
                FieldTarget::Utility(spec) => spec.utility.evaluate_with_breakdown(&ctx)?.0,
            };
            positions.push(position);
            values.push(value);
        }
    }

    Ok(ArenaGrid {
        nx: grid.nx,
        ny: grid.ny,
        z: grid.z,
        xs,
        ys,
        positions,
        values,
    })
}

/// Euclidean-nearest grid point, ties broken by lowest flattened index.
///
/// The grid is rectilinear with uniform spacing per axis, so only the cell
/// containing the query and its neighbors can host the nearest point; exact
/// squared distances decide among those candidates, which keeps the result
/// identical to a full linear scan.
pub fn nearest_grid_lookup(grid: &ArenaGrid, position: Vec3) -> (usize, f64) {
    assert!(!grid.is_empty(), "nearest_grid_lookup on an empty grid");
    let axis_window = |coords: &[f64], q: f64| -> (usize, usize) {
        let lo = coords[0];
        let hi = coords[coords.len() - 1];
        let step = (hi - lo) / (coords.len() - 1) as f64;
        let raw = ((q - lo) / step).floor();
        let center = if raw.is_nan() {
            0isize
        } else {
            raw.clamp(0.0, (coords.len() - 1) as f64) as isize
        };
        let start = (center - 1).max(0) as usize;
        let end = ((center + 1) as usize).min(coords.len() - 1);
        (start, end)
    };
    let (ix0, ix1) = axis_window(&grid.xs, position.x);
    let (iy0, iy1) = axis_window(&grid.ys, position.y);

    let mut best_index = usize::MAX;
    let mut best_dist = f64::INFINITY;
    for iy in iy0..=iy1 {
        for ix in ix0..=ix1 {
            let index = iy * grid.nx + ix;
            let d = (grid.positions[index] - position).norm_sq();
            if d < best_dist || (d == best_dist && index < best_index) {
                best_dist = d;
                best_index = index;
            }
        }
    }
    (best_index, grid.values[best_index])
}

/// A labeled marker resolved against the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    pub position: Vec3,
    pub grid_index: usize,
    pub value: f64,
}

/// A grid plus the scenario that produced it and marker annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    pub target: String,
    pub params: BTreeMap<String, f64>,
    pub scenario: Scenario,
    pub grid: ArenaGrid,
    pub annotations: Vec<Annotation>,
}

/// Samples the field and annotates every scenario player (and optionally the
/// ball) with the value at its nearest grid point.
pub fn build_report(
    target: &FieldTarget,
    params: BTreeMap<String, f64>,
    scenario: &Scenario,
    grid_config: &GridConfig,
    arena: &ArenaConstants,
    annotate_ball: bool,
) -> Result<FieldReport> {
    let grid = sample_field(target, scenario, grid_config, arena)?;
    let mut annotations = Vec::new();
    for (i, player) in scenario.others.iter().enumerate() {
        let (grid_index, value) = nearest_grid_lookup(&grid, player.body.position);
        annotations.push(Annotation {
            label: format!("player{i}"),
            position: player.body.position,
            grid_index,
            value,
        });
    }
    if annotate_ball {
        let (grid_index, value) = nearest_grid_lookup(&grid, scenario.ball.position);
        annotations.push(Annotation {
            label: "ball".to_string(),
            position: scenario.ball.position,
            grid_index,
            value,
        });
    }
    Ok(FieldReport {
        target: target.label(),
        params,
        scenario: scenario.clone(),
        grid,
        annotations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

impl ExportFormat {
    /// Picks a format from a file extension ("csv", "json", "svg").
    pub fn from_extension(ext: &str) -> Result<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(Error::Format(format!("unknown field export format '{other}'"))),
        }
    }
}

pub fn export_field(report: &FieldReport, format: ExportFormat) -> Result<String> {
    match format {
        ExportFormat::Csv => Ok(export_csv(report)),
        ExportFormat::Json => {
            serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))
        }
        ExportFormat::Svg => Ok(export_svg(report)),
    }
}

fn export_csv(report: &FieldReport) -> String {
    let mut out = String::from("x,y,value\n");
    for (pos, value) in report.grid.positions.iter().zip(&report.grid.values) {
        out.push_str(&format!("{},{},{}\n", pos.x, pos.y, value));
    }
    out
}

/// Two-stop linear color scale, low -> dark blue, high -> warm yellow.
fn heat_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(20.0, 250.0), lerp(24.0, 200.0), lerp(72.0, 40.0))
}

fn export_svg(report: &FieldReport) -> String {
    let grid = &report.grid;
    let cell = 4.0_f64;
    let width = grid.nx as f64 * cell;
    let height = grid.ny as f64 * cell;
    let (lo, hi) = grid.value_range();
    let span = if hi > lo { hi - lo } else { 1.0 };

    let x0 = grid.xs[0];
    let x1 = grid.xs[grid.nx - 1];
    let y0 = grid.ys[0];
    let y1 = grid.ys[grid.ny - 1];
    // +y points up in arena coordinates, down in SVG.
    let to_px = |p: Vec3| -> (f64, f64) {
        let px = (p.x - x0) / (x1 - x0) * (width - cell) + cell / 2.0;
        let py = (y1 - p.y) / (y1 - y0) * (height - cell) + cell / 2.0;
        (px, py)
    };

    let mut out = String::with_capacity(grid.len() * 64);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    out.push_str(&format!(
        "<title>{} field at z = {}</title>\n",
        report.target, grid.z
    ));
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let value = grid.values[iy * grid.nx + ix];
            let t = (value - lo) / span;
            let px = ix as f64 * cell;
            let py = (grid.ny - 1 - iy) as f64 * cell;
            out.push_str(&format!(
                "<rect x=\"{px}\" y=\"{py}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\"/>\n",
                heat_color(t)
            ));
        }
    }
    for annotation in &report.annotations {
        let (px, py) = to_px(annotation.position);
        let stroke = if annotation.label == "ball" { "#ffffff" } else { "#00e5ff" };
        out.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>\n",
            cell * 1.5
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{:.1}\" fill=\"{stroke}\">{} = {:.4}</text>\n",
            px + cell * 2.0,
            py - cell,
            cell * 2.5,
            annotation.label,
            annotation.value
        ));
    }
    out.push_str("</svg>\n");
    out
}
