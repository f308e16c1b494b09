use proptest::prelude::*;
use schemanet::{ActivityPattern, PatternError};
use schemanet_scenarios::detour::*;

fn heading_map(cfg: &DetourConfig, world: &WorldState) -> ActivityPattern {
    let p = world.perceive(cfg);
    integrate_mhm(&p.prey, &p.sor, &ActivityPattern::zeros(cfg.bins)).unwrap()
}

fn local_maxima(v: &ActivityPattern, floor: f64) -> Vec<usize> {
    let n = v.dim();
    (0..n)
        .filter(|&i| {
            let x = v.get(i);
            x >= floor && x >= v.get((i + n - 1) % n) && x > v.get((i + 1) % n)
        })
        .collect()
}

#[test]
fn prey_alone_gives_one_bump_straight_ahead() {
    let cfg = DetourConfig::default();
    let mhm = heading_map(&cfg, &WorldState::new(&cfg, None));
    assert_eq!(local_maxima(&mhm, cfg.lobe_threshold), vec![cfg.bins / 2]);
    assert_eq!(mhm.argmax(), cfg.bearing_bin(0.0));
}

#[test]
fn narrow_barrier_leaves_two_flanking_lobes() {
    let cfg = DetourConfig::default();
    let world = WorldState::new(&cfg, Some(Fence::centred(cfg.fence_y, 10.0)));
    let mhm = heading_map(&cfg, &world);
    let centre = cfg.bins / 2;
    assert_eq!(mhm.get(centre), 0.0);
    let peaks = local_maxima(&mhm, cfg.lobe_threshold);
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    assert!(peaks[0] < centre && peaks[1] > centre);
    // symmetric layout, symmetric lobes
    assert!((mhm.get(peaks[0]) - mhm.get(peaks[1])).abs() < 1e-9);
}

#[test]
fn wide_barrier_silences_heading_map() {
    let cfg = DetourConfig::default();
    let world = WorldState::new(&cfg, Some(Fence::centred(cfg.fence_y, 20.0)));
    assert!(heading_map(&cfg, &world).is_silent());
}

#[test]
fn modulatory_input_superposes_before_rectification() {
    let cfg = DetourConfig::default();
    let world = WorldState::new(&cfg, Some(Fence::centred(cfg.fence_y, 20.0)));
    let p = world.perceive(&cfg);
    let lift = cfg.side_pattern(Side::Left);
    let mhm = integrate_mhm(&p.prey, &p.sor, &lift).unwrap();
    for i in 0..cfg.bins {
        let expect = (p.prey.get(i) - p.sor.get(i) + lift.get(i)).max(0.0);
        assert_eq!(mhm.get(i), expect);
    }
}

#[test]
fn mismatched_rasters_are_rejected() {
    let a = ActivityPattern::zeros(8);
    let b = ActivityPattern::zeros(9);
    assert!(matches!(integrate_mhm(&a, &b, &a), Err(PatternError::DimensionMismatch { .. })));
    assert!(matches!(integrate_mhm(&a, &a, &b), Err(PatternError::DimensionMismatch { .. })));
}

#[test]
fn walking_into_the_fence_bumps_then_steps_aside() {
    let cfg = DetourConfig::default();
    let mut world = WorldState::new(&cfg, Some(Fence::centred(cfg.fence_y, 20.0)));
    let mut memory = ControllerMemory::default();
    let mut coin = || true;
    while !world.contact {
        world.act(&cfg, MotorCommand::Forward);
        assert!(world.ticks < 10);
    }
    assert_eq!(world.bumps, 1);
    assert!(world.pose.y < cfg.fence_y);
    let p = world.perceive(&cfg);
    assert_eq!(p.tactile.get(0), 1.0);
    let mhm = integrate_mhm(&p.prey, &p.sor, &ActivityPattern::zeros(cfg.bins)).unwrap();
    let (cmd, drive) = arbitrate(&cfg, &world, &p, &mhm, None, &mut memory, &mut coin).unwrap();
    assert!(matches!(cmd, MotorCommand::Sidestep(_)), "{cmd:?}");
    assert_eq!(drive, Drive::BumpAvoid);
    assert!(memory.avoid.is_some());
}

#[test]
fn snap_captures_nearby_prey_only_when_unobstructed() {
    let cfg = DetourConfig::default();
    let mut open = WorldState::new(&cfg, None);
    open.prey = Some((0.0, cfg.snap_radius - 1.0));
    assert!(open.can_snap(&cfg));
    open.act(&cfg, MotorCommand::Snap);
    assert!(open.captured && open.prey.is_none());

    let mut blocked = WorldState::new(&cfg, Some(Fence::centred(2.0, 10.0)));
    blocked.prey = Some((0.0, cfg.snap_radius - 1.0));
    assert!(!blocked.can_snap(&cfg));
    blocked.act(&cfg, MotorCommand::Snap);
    assert!(!blocked.captured);

    let mut far = WorldState::new(&cfg, None);
    far.prey = Some((0.0, cfg.snap_radius + 1.0));
    assert!(!far.can_snap(&cfg));
}

#[test]
fn side_templates_decode_to_their_side() {
    let cfg = DetourConfig::default();
    assert_eq!(decode_side(&cfg, &cfg.side_pattern(Side::Left)), Some(Side::Left));
    assert_eq!(decode_side(&cfg, &cfg.side_pattern(Side::Right)), Some(Side::Right));
    assert_eq!(decode_side(&cfg, &ActivityPattern::zeros(cfg.bins)), None);
}

#[test]
fn naive_agent_detours_a_narrow_barrier() {
    let cfg = DetourConfig::default();
    let mut w = DetourWorld::new(2, cfg.clone()).unwrap();
    w.calibrate().unwrap();
    let o = w.run_innate(10.0).unwrap();
    assert!(o.captured);
    assert_eq!(o.bumps, 0);
    assert!(o.ticks <= cfg.innate_trial_ticks);
    assert!(o.constructed.is_empty());
}

#[test]
fn learning_run_builds_side_pair_and_stops_bumping() {
    let cfg = DetourConfig::default();
    let (w, trials) = learning_run(5, cfg.clone(), 5).unwrap();
    let first = &trials[0];
    assert!(!first.captured);
    assert!(first.bumps >= 3, "bumps {}", first.bumps);
    let built: Vec<_> = w.constructor.records.iter().map(|r| (r.trigger.effect.schema.as_str(), r.trigger.cause.schema.as_str())).collect();
    assert_eq!(built, vec![("MHM", "SIDE")]);
    let last = trials.last().unwrap();
    assert!(last.captured);
    assert_eq!(last.bumps, 0);
    assert!(last.records.iter().any(|r| r.drive == Some(Drive::Modulated)));
    assert!(last.anticipation(&cfg, 3).is_some_and(|lead| lead >= 2));
}

#[test]
fn equal_seeds_give_equal_runs() {
    let cfg = DetourConfig { calibration_trials: 2, ..DetourConfig::default() };
    let (_, a) = learning_run(9, cfg.clone(), 2).unwrap();
    let (_, b) = learning_run(9, cfg, 2).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn heading_map_is_rectified_sum(
        vals in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), 1..40)
    ) {
        let prey = ActivityPattern::new(vals.iter().map(|v| v.0).collect()).unwrap();
        let sor = ActivityPattern::new(vals.iter().map(|v| v.1).collect()).unwrap();
        let m = ActivityPattern::new(vals.iter().map(|v| v.2).collect()).unwrap();
        let out = integrate_mhm(&prey, &sor, &m).unwrap();
        for (i, v) in vals.iter().enumerate() {
            prop_assert!(out.get(i) >= 0.0);
            prop_assert!((out.get(i) - (v.0 - v.1 + v.2).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_lands_in_half_turn(a in -50.0f64..50.0) {
        let w = wrap(a);
        prop_assert!(w > -std::f64::consts::PI - 1e-12 && w <= std::f64::consts::PI + 1e-12);
        prop_assert!(((a - w) / std::f64::consts::TAU - ((a - w) / std::f64::consts::TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn arbitration_is_a_function_of_its_inputs(
        x in -15.0f64..15.0,
        y in -5.0f64..8.0,
        heading_deg in 45.0f64..135.0,
        width in 0.0f64..30.0,
        flip in any::<bool>(),
    ) {
        let cfg = DetourConfig::default();
        let mut world = WorldState::new(&cfg, (width > 0.5).then(|| Fence::centred(cfg.fence_y, width)));
        world.pose = Pose { x, y, heading: heading_deg.to_radians() };
        let p = world.perceive(&cfg);
        let mhm = integrate_mhm(&p.prey, &p.sor, &ActivityPattern::zeros(cfg.bins)).unwrap();
        let run = || {
            let mut memory = ControllerMemory::default();
            let mut coin = || flip;
            (arbitrate(&cfg, &world, &p, &mhm, None, &mut memory, &mut coin), memory)
        };
        prop_assert_eq!(run(), run());
        prop_assert!(run().0.is_some());
    }
}
