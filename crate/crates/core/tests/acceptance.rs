//! Acceptance suite: one test per release criterion, tolerances pinned in
//! code. Each test prints a single PASS line on success; a failed assert is
//! the corresponding FAIL. Oracles are independent of the code under test
//! wherever the criterion allows: closed-form formulas, brute-force scans,
//! and hand-computed worked examples.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arenakit_core::arena::{
    ArenaConstants, GameState, PhysObject, PlayerState, Team, Vec3,
};
use arenakit_core::compose::{
    distribute_team_spirit, krc_combine, step_rewards, RewardSpec, SpecNode,
};
use arenakit_core::field::{
    build_report, nearest_grid_lookup, sample_field, FieldTarget, GridConfig, Scenario,
};
use arenakit_core::graph::{build_adjacency, build_adjacency_with, AdjacencyVariant, CaseANormalization};
use arenakit_core::objectives::{
    build_history, classify_reward, cross_entropy_3class, smooth_l1, RewardClass,
};
use arenakit_core::obs::{encode_observation, feature_layout, row_length, ObservationConfig};
use arenakit_core::replay::{parse_replay_csv, replay_to_rewards, ColumnMap};
use arenakit_core::rewards::{
    parameterized_distance, Component, ComponentContext, EventFlags, EventKind,
};
use arenakit_core::sim::{
    random_state_setter, run_episode, ChasePolicy, IdlePolicy, RandomPolicy, SetterVariant,
    SimConfig, Termination,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn upright_car(team: Team, position: Vec3, velocity: Vec3, boost: f64) -> PlayerState {
    PlayerState {
        body: PhysObject {
            position,
            linear_velocity: velocity,
            angular_velocity: Vec3::ZERO,
            forward: Vec3::new(0.0, team.attack_sign(), 0.0),
            up: Vec3::new(0.0, 0.0, 1.0),
        },
        boost,
        team,
        on_ground: true,
        has_flip: true,
        demolished: false,
    }
}

#[test]
fn criterion_01_krc_suite() {
    const TOL: f64 = 1e-12;
    const VECTORS: usize = 100_000;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    for case in 0..VECTORS {
        let n = rng.gen_range(1..=6usize);
        let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        // Every 10th vector gets a forced zero to exercise absorption.
        if case % 10 == 0 {
            let slot = rng.gen_range(0..n);
            values[slot] = 0.0;
        }
        let combined = krc_combine(&values).unwrap();

        if n == 1 {
            assert_eq!(combined, values[0], "n=1 must be the exact identity");
            continue;
        }
        if values.iter().any(|v| *v == 0.0) {
            assert_eq!(combined, 0.0, "zero absorption must produce exactly 0");
            continue;
        }
        // Sign rule: positive iff every input is strictly positive.
        if values.iter().all(|v| *v > 0.0) {
            assert!(combined > 0.0);
        } else {
            assert!(combined < 0.0);
        }
        // Geometric-mean bounds.
        let lo = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(combined.abs() >= lo - TOL && combined.abs() <= hi + TOL);
        // Permutation invariance.
        let mut shuffled = values.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let combined_shuffled = krc_combine(&shuffled).unwrap();
        assert!((combined - combined_shuffled).abs() <= TOL);
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "KRC suite took {elapsed:?}, budget is 5 s");
    println!("PASS criterion 1: KRC identity/sign/zero/bounds/permutation over {VECTORS} vectors in {elapsed:?}");
}

#[test]
fn criterion_02_distance_curve_suite() {
    const TOL: f64 = 1e-12;
    const NORM: f64 = 2300.0;

    // Value exactly 1 at d = 0 for any curve shape.
    for &(dis, den) in &[(0.5, 0.5), (1.0, 1.0), (2.0, 1.1), (0.7, 3.0)] {
        assert_eq!(parameterized_distance(0.0, NORM, dis, den), 1.0);
    }

    let sweep: Vec<f64> = (0..1000).map(|i| i as f64 * 6.0).collect();

    // Monotone decreasing in distance.
    for &(dis, den) in &[(0.7, 1.0), (1.0, 1.0), (2.0, 1.0), (1.1, 1.1)] {
        for pair in sweep.windows(2) {
            let a = parameterized_distance(pair[0], NORM, dis, den);
            let b = parameterized_distance(pair[1], NORM, dis, den);
            assert!(b <= a + TOL, "curve must fall as distance grows");
        }
    }

    // Monotone increasing in dispersion and in density at fixed d > 0.
    let params: Vec<f64> = (1..=1000).map(|i| 0.01 * i as f64).collect();
    for &d in &[100.0, 1000.0, 4000.0] {
        for pair in params.windows(2) {
            let lo = parameterized_distance(d, NORM, pair[0], 1.0);
            let hi = parameterized_distance(d, NORM, pair[1], 1.0);
            assert!(hi >= lo - TOL, "curve must rise with dispersion");
            let lo = parameterized_distance(d, NORM, 1.0, pair[0]);
            let hi = parameterized_distance(d, NORM, 1.0, pair[1]);
            assert!(hi >= lo - TOL, "curve must rise with density");
        }
    }

    // Dominance: the dispersion-2 curve sits pointwise above dispersion-0.7.
    for &d in &sweep {
        let wide = parameterized_distance(d, NORM, 2.0, 1.0);
        let narrow = parameterized_distance(d, NORM, 0.7, 1.0);
        assert!(wide >= narrow - TOL);
    }

    println!("PASS criterion 2: distance curve unit value, monotonicity, and dispersion dominance over 1000-point sweeps");
}

#[test]
fn criterion_03_shaping_telescopes() {
    const TOL: f64 = 1e-9;
    const EPISODES: u64 = 100;
    let arena = ArenaConstants::default();
    let spec = RewardSpec::builtin("lucy_skg").unwrap();
    assert_eq!(spec.shaping_gamma, 1.0, "shaping must run at gamma = 1");

    for seed in 0..EPISODES {
        let config = SimConfig {
            seed,
            max_steps: 1000,
            no_touch_timeout: None,
            ..SimConfig::default()
        };
        let initial = random_state_setter(seed, 1, 1, SetterVariant::Random, &arena).unwrap();
        let mut policy = RandomPolicy::new(seed);
        let episode = run_episode(&spec, initial, &mut policy, &config, &arena).unwrap();
        assert!(!episode.steps.is_empty());

        let players = episode.steps[0].rewards.players.len();
        for i in 0..players {
            let first = &episode.steps[0].rewards.players[i];
            let last = episode.steps.last().unwrap().rewards.players[i].clone();
            let phi_start = first.previous_utility.expect("episode steps know the previous state");
            let phi_end = last.utility;
            let total: f64 = episode.steps.iter().map(|s| s.rewards.players[i].shaping).sum();
            assert!(
                (total - (phi_end - phi_start)).abs() <= TOL,
                "seed {seed} player {i}: sum F = {total}, endpoints give {}",
                phi_end - phi_start
            );
        }
    }
    println!("PASS criterion 3: shaping telescopes to phi(s_T) - phi(s_0) over {EPISODES} random 1000-step episodes");
}

#[test]
fn criterion_04_team_spirit_suite() {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(404);

    for _ in 0..10_000 {
        let per_team = rng.gen_range(1..=4usize);
        let mut shaped = Vec::new();
        let mut teams = Vec::new();
        for _ in 0..per_team {
            shaped.push(rng.gen_range(-10.0..10.0));
            teams.push(Team::Blue);
        }
        for _ in 0..per_team {
            shaped.push(rng.gen_range(-10.0..10.0));
            teams.push(Team::Orange);
        }
        for tau in [0.0, 0.3, 1.0] {
            let out = distribute_team_spirit(&shaped, &teams, tau).unwrap();
            let sum: f64 = out.iter().sum();
            assert!(sum.abs() <= TOL, "equal teams must be zero-sum, got {sum}");
        }
        // tau = 0 reduces to own reward minus the opponent mean, exactly.
        let out = distribute_team_spirit(&shaped, &teams, 0.0).unwrap();
        let blue_mean: f64 = shaped[..per_team].iter().sum::<f64>() / per_team as f64;
        let orange_mean: f64 = shaped[per_team..].iter().sum::<f64>() / per_team as f64;
        for (i, v) in out.iter().enumerate() {
            let expected = if i < per_team {
                shaped[i] - orange_mean
            } else {
                shaped[i] - blue_mean
            };
            assert_eq!(*v, expected, "tau = 0 reduction must be exact");
        }
    }

    // Worked example.
    let shaped = [1.0, 0.0, 0.0, 0.0];
    let teams = [Team::Blue, Team::Blue, Team::Orange, Team::Orange];
    let out = distribute_team_spirit(&shaped, &teams, 0.3).unwrap();
    let expected = [0.85, 0.15, -0.5, -0.5];
    for (v, e) in out.iter().zip(&expected) {
        assert!((v - e).abs() <= 1e-12);
    }
    println!("PASS criterion 4: team spirit zero-sum over 10^4 vectors, exact tau=0 reduction, worked example");
}

#[test]
fn criterion_05_reward_catalog() {
    let spec = RewardSpec::builtin("lucy_skg").unwrap();
    assert_eq!(spec.team_spirit, 0.3);
    assert_eq!(spec.shaping_gamma, 1.0);

    let event_weights: &[(&str, EventKind, f64)] = &[
        ("goal", EventKind::Goal, 10.0),
        ("concede", EventKind::Concede, -3.0),
        ("shot", EventKind::Shot, 1.5),
        ("touch", EventKind::Touch, 0.05),
        ("demolish", EventKind::Demolish, 2.0),
        ("demolished", EventKind::Demolished, -2.0),
    ];
    let reward_children = match &spec.reward {
        SpecNode::Linear { children, .. } => children,
        other => panic!("reward root must be linear, got {other:?}"),
    };
    assert_eq!(reward_children.len(), 7);
    for (key, kind, weight) in event_weights {
        let child = reward_children
            .iter()
            .find(|c| c.key() == *key)
            .unwrap_or_else(|| panic!("missing reward child {key}"));
        assert_eq!(child.weight(), *weight, "weight of {key}");
        match child {
            SpecNode::Leaf { component: Component::Event(k), .. } => assert_eq!(k, kind),
            other => panic!("{key} must be an event leaf, got {other:?}"),
        }
    }
    let accel = reward_children
        .iter()
        .find(|c| c.key() == "touch_ball_to_goal_acceleration")
        .unwrap();
    assert_eq!(accel.weight(), 0.25);
    assert!(matches!(
        accel,
        SpecNode::Leaf { component: Component::TouchBallToGoalAcceleration, .. }
    ));

    let utility_children = match &spec.utility {
        SpecNode::Linear { children, .. } => children,
        other => panic!("utility root must be linear, got {other:?}"),
    };
    assert_eq!(utility_children.len(), 5);
    let child = |key: &str| {
        utility_children
            .iter()
            .find(|c| c.key() == key)
            .unwrap_or_else(|| panic!("missing utility child {key}"))
    };

    let dd = child("ball_to_goal_distance_difference");
    assert_eq!(dd.weight(), 2.0);
    match dd {
        SpecNode::Leaf { component: Component::BallToGoalDistanceDifference(p), .. } => {
            assert_eq!(p.offensive_dispersion, 0.6);
            assert_eq!(p.defensive_dispersion, 0.4);
            assert_eq!(p.offensive_density, 1.0);
            assert_eq!(p.defensive_density, 1.0);
            assert_eq!(p.offensive_weight, 1.0);
            assert_eq!(p.defensive_weight, 1.0);
        }
        other => panic!("distance difference leaf expected, got {other:?}"),
    }
    assert_eq!(child("ball_to_goal_velocity").weight(), 0.8);
    assert_eq!(child("save_boost").weight(), 0.5);

    let krc_children = |key: &str| match child(key) {
        SpecNode::Krc { children, .. } => children,
        other => panic!("{key} must be a krc node, got {other:?}"),
    };
    let dwa = krc_children("distance_weighted_alignment");
    assert_eq!(child("distance_weighted_alignment").weight(), 0.6);
    assert_eq!(dwa.len(), 2);
    assert!(matches!(
        &dwa[0],
        SpecNode::Leaf { component: Component::AlignBallToGoal, .. }
    ));
    match &dwa[1] {
        SpecNode::Leaf { component: Component::PlayerToBallDistance { dispersion, density }, .. } => {
            assert_eq!(*dispersion, 1.1);
            assert_eq!(*density, 1.0);
        }
        other => panic!("distance leaf expected, got {other:?}"),
    }

    let op = krc_children("offensive_potential");
    assert_eq!(child("offensive_potential").weight(), 1.0);
    assert_eq!(op.len(), 3);
    assert!(matches!(
        &op[0],
        SpecNode::Leaf { component: Component::AlignBallToGoal, .. }
    ));
    match &op[1] {
        SpecNode::Leaf { component: Component::PlayerToBallDistance { dispersion, density }, .. } => {
            assert_eq!(*dispersion, 1.0);
            assert_eq!(*density, 1.1);
        }
        other => panic!("distance leaf expected, got {other:?}"),
    }
    assert!(matches!(
        &op[2],
        SpecNode::Leaf { component: Component::PlayerToBallVelocity, .. }
    ));
    println!("PASS criterion 5: lucy_skg catalog weights and curve parameters match the reference table field by field");
}

#[test]
fn criterion_06_touch_acceleration_range() {
    const TOL: f64 = 1e-12;
    let arena = ArenaConstants::default();
    let component = Component::TouchBallToGoalAcceleration;

    let car = upright_car(Team::Blue, Vec3::new(0.0, -100.0, 17.0), Vec3::ZERO, 50.0);
    let ball_at = Vec3::new(0.0, 0.0, 93.15);
    let target = arena.opponent_back_net(Team::Blue);
    let dir = (target - ball_at).normalized().unwrap();

    let state_with_ball_velocity = |v: Vec3| GameState {
        ball: PhysObject {
            position: ball_at,
            linear_velocity: v,
            ..PhysObject::stationary_at(ball_at)
        },
        players: vec![car],
        tick: 1,
    };
    let events = [EventFlags { touch: true, ..EventFlags::default() }];

    // Full-speed reversal away-from-goal to toward-goal: +2.
    let prev = state_with_ball_velocity(dir * -arena.ball_max_speed);
    let state = state_with_ball_velocity(dir * arena.ball_max_speed);
    let ctx = ComponentContext {
        state: &state,
        previous_state: Some(&prev),
        events: &events,
        player_index: 0,
        arena: &arena,
    };
    let up = component.evaluate(&ctx).unwrap();
    assert!((up - 2.0).abs() <= TOL, "got {up}");

    // The opposite reversal: -2.
    let ctx = ComponentContext {
        state: &prev,
        previous_state: Some(&state),
        events: &events,
        player_index: 0,
        arena: &arena,
    };
    let down = component.evaluate(&ctx).unwrap();
    assert!((down + 2.0).abs() <= TOL, "got {down}");

    // A touch that redirects a neutral ball toward the own goal scores negative.
    let prev = state_with_ball_velocity(Vec3::ZERO);
    let own = state_with_ball_velocity(dir * -1000.0);
    let ctx = ComponentContext {
        state: &own,
        previous_state: Some(&prev),
        events: &events,
        player_index: 0,
        arena: &arena,
    };
    assert!(component.evaluate(&ctx).unwrap() < 0.0);

    // No touch flag: the component stays silent.
    let quiet = [EventFlags::default()];
    let ctx = ComponentContext {
        state: &state,
        previous_state: Some(&prev),
        events: &quiet,
        player_index: 0,
        arena: &arena,
    };
    assert_eq!(component.evaluate(&ctx).unwrap(), 0.0);
    println!("PASS criterion 6: touch acceleration reaches +/-2 at the speed cap and penalizes own-goal redirects");
}

#[test]
fn criterion_07_observation_layout() {
    assert_eq!(row_length(5), 65);

    let expected: &[(&str, usize, usize)] = &[
        ("object_type_flags", 1, 4),
        ("position", 5, 7),
        ("linear_velocity", 8, 10),
        ("forward", 11, 13),
        ("up", 14, 16),
        ("angular_velocity", 17, 19),
        ("boost", 20, 20),
        ("on_ground", 21, 21),
        ("has_flip", 22, 22),
        ("demolished", 23, 23),
        ("previous_actions", 24, 63),
        ("reserved", 64, 64),
        ("padding_mask", 65, 65),
    ];
    let layout = feature_layout(5);
    assert_eq!(layout.len(), expected.len());
    let mut cursor = 1;
    for (span, (name, start, end)) in layout.iter().zip(expected) {
        assert_eq!(span.name, *name);
        assert_eq!(span.start, *start);
        assert_eq!(span.end, *end);
        // Spans tile the row with no gaps: no boost-pad or timer features fit.
        assert_eq!(span.start, cursor);
        cursor = span.end + 1;
    }
    assert_eq!(cursor, row_length(5) + 1);

    let arena = ArenaConstants::default();
    for blue in 1..=4usize {
        for orange in 1..=4usize {
            let mut players = Vec::new();
            for i in 0..blue {
                players.push(upright_car(
                    Team::Blue,
                    Vec3::new(-1000.0 - 200.0 * i as f64, -2000.0, 17.0),
                    Vec3::ZERO,
                    50.0,
                ));
            }
            for i in 0..orange {
                players.push(upright_car(
                    Team::Orange,
                    Vec3::new(1000.0 + 200.0 * i as f64, 2000.0, 17.0),
                    Vec3::ZERO,
                    50.0,
                ));
            }
            let state = GameState {
                ball: PhysObject::stationary_at(Vec3::new(0.0, 0.0, 93.15)),
                players,
                tick: 0,
            };
            state.validate(&arena).unwrap();

            let objects = 1 + blue + orange;
            // Tight encoding: one row per object, nothing masked.
            let cfg = ObservationConfig::default();
            let triplet = encode_observation(&state, 0, &[], &cfg, &arena).unwrap();
            assert_eq!(triplet.query.len(), 65);
            assert_eq!(triplet.key_value.len(), objects);
            assert!(triplet.mask.iter().all(|m| !m));

            // Padded encoding: rows up to capacity, pad rows masked, and the
            // mask bit mirrored in the last feature of each row.
            let cfg = ObservationConfig { object_capacity: Some(9), ..cfg };
            let triplet = encode_observation(&state, 0, &[], &cfg, &arena).unwrap();
            assert_eq!(triplet.key_value.len(), 9);
            let masked = triplet.mask.iter().filter(|m| **m).count();
            assert_eq!(masked, 9 - objects);
            for (row, m) in triplet.key_value.iter().zip(&triplet.mask) {
                assert_eq!(row.len(), 65);
                assert_eq!(row[64] == 1.0, *m);
                if *m {
                    assert!(row[..64].iter().all(|v| *v == 0.0), "pad rows are all zero");
                }
            }
        }
    }
    println!("PASS criterion 7: packed row 65 for k=5, spans tile the row, masks exact over 1v1..4v4");
}

#[test]
fn criterion_08_adjacency_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=8usize);
        let positions: Vec<Vec3> = (0..n)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(-4000.0..4000.0),
                    rng.gen_range(-5000.0..5000.0),
                    rng.gen_range(0.0..2000.0),
                )
            })
            .collect();
        let dispersion = rng.gen_range(0.3..3.0);
        let density = rng.gen_range(0.3..3.0);

        let a = build_adjacency(&positions, AdjacencyVariant::UnitSelf, dispersion, density).unwrap();
        for (i, row) in a.values.iter().enumerate() {
            assert_eq!(row[i], 1.0, "case a diagonal is exactly 1");
        }

        let b = build_adjacency(&positions, AdjacencyVariant::NormalizedSelf, dispersion, density)
            .unwrap();
        for (i, row) in b.values.iter().enumerate() {
            let mean: f64 = row.iter().sum::<f64>() / n as f64;
            assert!((mean - 1.0).abs() <= 1e-12, "case b row mean is 1");
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|(_, x), (_, y)| x.partial_cmp(y).unwrap())
                .unwrap()
                .0;
            assert!(
                row[i] >= row[argmax] - 1e-12,
                "case b diagonal must be a row maximum"
            );
        }
    }

    // Worked two-object example: objects one norm apart, kernel e^-0.5 = 0.6065.
    let two = [Vec3::ZERO, Vec3::new(2300.0, 0.0, 0.0)];
    let kernel = (-0.5f64).exp();
    assert!((kernel - 0.6065).abs() < 1e-4);
    let b = build_adjacency(&two, AdjacencyVariant::NormalizedSelf, 1.0, 1.0).unwrap();
    assert!((b.values[0][0] - 1.2449).abs() < 1e-4);
    assert!((b.values[0][1] - 0.7550).abs() < 1e-4);
    // Case a under the literal sum-over-N divisor doubles the lone neighbor,
    // exactly; the off-diagonal-mean divisor pins it back to 1.
    let a = build_adjacency(&two, AdjacencyVariant::UnitSelf, 1.0, 1.0).unwrap();
    assert_eq!(a.values[0][1], 2.0);
    let a = build_adjacency_with(
        &two,
        AdjacencyVariant::UnitSelf,
        1.0,
        1.0,
        CaseANormalization::OffDiagonalMean,
    )
    .unwrap();
    assert_eq!(a.values[0][1], 1.0);
    println!("PASS criterion 8: adjacency diagonals, row means, argmax over 10^3 sets, worked examples");
}

#[test]
fn criterion_09_replay_pipeline() {
    const TOL: f64 = 1e-12;
    let arena = ArenaConstants::default();
    let spec = RewardSpec::builtin("lucy_skg").unwrap();
    let table = parse_replay_csv(&fixture("replay_2v2.csv"), &ColumnMap::default()).unwrap();
    assert_eq!(table.len(), 100);

    let timeline = replay_to_rewards(&table, &spec, 9, &arena).unwrap();
    assert_eq!(timeline.frames.len(), 10, "100 frames at n_skip 9 evaluate every 10th");

    // Oracle: drive step_rewards directly over the sampled pairs. The fixture
    // has no touches or goals, which the assert on the flags certifies.
    let order = table.state_order();
    let mut previous: Option<GameState> = None;
    for (j, index) in (0..table.len()).step_by(10).enumerate() {
        let state = table.game_state(index, &order);
        let events = vec![EventFlags::default(); state.players.len()];
        for player_events in &timeline.frames[j].events {
            assert_eq!(*player_events, EventFlags::default(), "fixture is event-free");
        }
        let expected = step_rewards(&spec, previous.as_ref(), &state, &events, &arena).unwrap();
        for (got, want) in timeline.frames[j].players.iter().zip(&expected.players) {
            assert!((got.reward - want.reward).abs() <= TOL);
            assert!((got.utility - want.utility).abs() <= TOL);
            assert!((got.shaping - want.shaping).abs() <= TOL);
            assert!((got.shaped - want.shaped).abs() <= TOL);
            assert!((got.distributed - want.distributed).abs() <= TOL);
        }
        previous = Some(state);
    }

    // Determinism: two full runs serialize to identical bytes.
    let again = replay_to_rewards(&table, &spec, 9, &arena).unwrap();
    let a = serde_json::to_string(&timeline).unwrap();
    let b = serde_json::to_string(&again).unwrap();
    assert_eq!(a, b);
    println!("PASS criterion 9: replay fixture evaluates 10 frames matching the direct oracle, deterministically");
}

#[test]
fn criterion_10_field_analysis() {
    const ORACLE_TOL: f64 = 1e-12;
    const RAY_TOL: f64 = 1e-9;
    let arena = ArenaConstants::default();

    // Grid values must equal the closed-form curve at every cell.
    let scenario = Scenario::with_ball(Vec3::new(400.0, -800.0, 93.15));
    let target = FieldTarget::Component(Component::PlayerToBallDistance {
        dispersion: 1.1,
        density: 1.0,
    });
    let grid_config = GridConfig { nx: 16, ny: 20, z: 300.0, ..GridConfig::default() };
    let grid = sample_field(&target, &scenario, &grid_config, &arena).unwrap();
    assert_eq!(grid.values.len(), 16 * 20);
    for (pos, value) in grid.positions.iter().zip(&grid.values) {
        let gap = ((scenario.ball.position - *pos).norm() - arena.ball_radius).max(0.0);
        let direct = parameterized_distance(gap, arena.car_max_speed, 1.1, 1.0);
        assert!((value - direct).abs() <= ORACLE_TOL);
    }

    // Nearest lookup agrees with a brute-force scan, ties to the lowest index.
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..10_000 {
        let q = Vec3::new(
            rng.gen_range(-5000.0..5000.0),
            rng.gen_range(-7000.0..7000.0),
            rng.gen_range(0.0..500.0),
        );
        let (index, value) = nearest_grid_lookup(&grid, q);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, p) in grid.positions.iter().enumerate() {
            let d = (*p - q).norm_sq();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        assert_eq!(index, best);
        assert_eq!(value, grid.values[best]);
    }

    // Ray invariance of alignment: the value depends only on the direction
    // from the car to the ball, so it is constant along any ray from the ball.
    let ball = Vec3::new(0.0, 1000.0, 93.15);
    let align = Component::AlignBallToGoal;
    for _ in 0..100 {
        let dir = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-0.2..0.2),
        );
        let Some(dir) = dir.normalized() else { continue };
        let mut values = Vec::new();
        for t in [200.0, 800.0, 2000.0] {
            let car = upright_car(Team::Blue, ball + dir * t, Vec3::ZERO, 100.0);
            let state = GameState {
                ball: PhysObject::stationary_at(ball),
                players: vec![car],
                tick: 0,
            };
            let ctx = ComponentContext {
                state: &state,
                previous_state: None,
                events: &[],
                player_index: 0,
                arena: &arena,
            };
            values.push(align.evaluate(&ctx).unwrap());
        }
        assert!((values[0] - values[1]).abs() <= RAY_TOL);
        assert!((values[0] - values[2]).abs() <= RAY_TOL);
    }

    // The report annotates scenario players with their nearest cell's value.
    let mut scenario = scenario;
    scenario.others = vec![upright_car(
        Team::Orange,
        Vec3::new(-1200.0, 3000.0, 17.0),
        Vec3::ZERO,
        75.0,
    )];
    let report = build_report(
        &target,
        BTreeMap::new(),
        &scenario,
        &grid_config,
        &arena,
        true,
    )
    .unwrap();
    assert_eq!(report.annotations.len(), 2);
    for annotation in &report.annotations {
        let (index, value) = nearest_grid_lookup(&report.grid, annotation.position);
        assert_eq!(annotation.grid_index, index);
        assert_eq!(annotation.value, value);
    }
    println!("PASS criterion 10: field grid matches the closed form, lookup matches linear scan, alignment is ray-invariant");
}

#[test]
fn criterion_11_aux_objectives() {
    const TOL: f64 = 1e-12;
    let eps = 0.009;

    // Threshold table: the boundary lands in the zero class on both sides.
    let table: &[(f64, RewardClass)] = &[
        (0.5, RewardClass::Positive),
        (0.0090001, RewardClass::Positive),
        (0.009, RewardClass::Zero),
        (0.0, RewardClass::Zero),
        (-0.009, RewardClass::Zero),
        (-0.0090001, RewardClass::Negative),
        (-0.5, RewardClass::Negative),
    ];
    for (r, expected) in table {
        assert_eq!(classify_reward(*r, eps).unwrap().class, *expected, "classify({r})");
    }

    // Smooth L1 at beta = 1: quadratic inside, linear outside.
    for (x, expected) in [(0.0, 0.0), (0.5, 0.125), (2.0, 1.5)] {
        let loss = smooth_l1(&[x], &[0.0], 1.0).unwrap();
        assert!((loss - expected).abs() <= TOL, "smooth_l1({x}) = {loss}");
    }

    // Cross entropy of the uniform distribution is ln 3 for every label.
    let uniform = [1.0 / 3.0; 3];
    for class in [RewardClass::Positive, RewardClass::Zero, RewardClass::Negative] {
        let ce = cross_entropy_3class(uniform, class).unwrap();
        assert!((ce - 3.0f64.ln()).abs() <= TOL);
    }

    // Histories zero-pad per episode: a new episode never sees the old rows.
    let episode_a: Vec<Vec<f64>> = (0..3).map(|i| vec![1.0 + i as f64; 4]).collect();
    let episode_b: Vec<Vec<f64>> = vec![vec![-7.0; 4]];
    let history_a = build_history(&episode_a, 20).unwrap();
    assert_eq!(history_a.pad_count, 17);
    assert!(history_a.rows[..17].iter().all(|r| r.iter().all(|v| *v == 0.0)));
    assert_eq!(history_a.rows[17], episode_a[0]);
    assert_eq!(history_a.rows[19], episode_a[2]);
    let history_b = build_history(&episode_b, 20).unwrap();
    assert_eq!(history_b.pad_count, 19);
    assert!(history_b.rows[..19].iter().all(|r| r.iter().all(|v| *v == 0.0)));
    assert_eq!(history_b.rows[19], episode_b[0]);
    println!("PASS criterion 11: threshold table, smooth-L1 anchors, uniform cross entropy, per-episode padding");
}

#[test]
fn criterion_12_simulator_contract() {
    let arena = ArenaConstants::default();
    let spec = RewardSpec::builtin("lucy_skg").unwrap();

    // Defaults carry the reference timing: 5-minute cap and 45-second
    // no-touch clock at 15 steps per second.
    let defaults = SimConfig::default();
    assert_eq!(defaults.max_steps, 4500);
    assert_eq!(defaults.no_touch_timeout, Some(675));

    // Determinism: identical seeds produce bit-identical episodes.
    let config = SimConfig { seed: 12, max_steps: 400, ..SimConfig::default() };
    let run = |seed: u64| {
        let initial = random_state_setter(seed, 2, 2, SetterVariant::Random, &arena).unwrap();
        let mut policy = RandomPolicy::new(seed);
        run_episode(&spec, initial, &mut policy, &config, &arena).unwrap()
    };
    let a = run(12);
    let b = run(12);
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );

    // Speed clamps hold on every step of random play.
    for step in &a.steps {
        assert!(step.state.ball.linear_velocity.norm() <= arena.ball_max_speed + 1e-9);
        for player in &step.state.players {
            assert!(player.body.linear_velocity.norm() <= arena.car_max_speed + 1e-9);
        }
    }

    // Terminal semantics: idle play trips the no-touch clock exactly, and
    // with the clock off the step cap ends the episode.
    let idle_config = SimConfig { max_steps: 4500, ..SimConfig::default() };
    let initial = random_state_setter(3, 1, 1, SetterVariant::KickoffLike, &arena).unwrap();
    let mut idle = IdlePolicy;
    let episode = run_episode(&spec, initial.clone(), &mut idle, &idle_config, &arena).unwrap();
    assert_eq!(episode.termination, Termination::NoTouch);
    assert_eq!(episode.steps.len(), 675);

    let capped = SimConfig { max_steps: 100, no_touch_timeout: None, ..SimConfig::default() };
    let episode = run_episode(&spec, initial, &mut idle, &capped, &arena).unwrap();
    assert_eq!(episode.termination, Termination::TimeCap);
    assert_eq!(episode.steps.len(), 100);

    // A full default-config 2v2 rollout fits the wall-clock budget.
    let start = Instant::now();
    let initial = random_state_setter(7, 2, 2, SetterVariant::KickoffLike, &arena).unwrap();
    let mut chase = ChasePolicy;
    let episode = run_episode(&spec, initial, &mut chase, &SimConfig::default(), &arena).unwrap();
    let elapsed = start.elapsed();
    assert!(!episode.steps.is_empty());
    assert!(elapsed.as_secs_f64() < 10.0, "2v2 rollout took {elapsed:?}");
    println!(
        "PASS criterion 12: deterministic episodes, clamps hold, terminals 4500/675, 2v2 rollout in {elapsed:?}"
    );
}
