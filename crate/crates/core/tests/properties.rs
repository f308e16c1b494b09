use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemanet::cause_effect::{instantaneous_c, CandidateSpace, CauseEffectConfig, ReliabilityMatrix};
use schemanet::drives::DriveState;
use schemanet::dual::DualSchema;
use schemanet::goal::GoalSchema;
use schemanet::map::DifferentiableMap;
use schemanet::oracle::{central_gradient, central_jacobian, max_relative_error};
use schemanet::predictive::PredictiveSchema;
use schemanet::{ActivityPattern, Emission, Network, PortRef, PortSpec, SchemaNode, SemanticTag};

fn scalar_source(name: &str, signal: Vec<f64>) -> SchemaNode {
    SchemaNode::new(name, move |ctx, _| {
        Emission::outputs(vec![ActivityPattern::scalar(signal.get(ctx.tick as usize).copied().unwrap_or(0.0))])
    })
    .with_output(PortSpec::output("out", 1, SemanticTag::Motor))
}

fn copier(name: &str) -> SchemaNode {
    SchemaNode::new(name, |ctx, _| Emission::outputs(vec![ctx.input("in").clone()]))
        .with_input(PortSpec::input("in", 1, SemanticTag::Generic))
        .with_output(PortSpec::output("out", 1, SemanticTag::Perceptual))
}

/// Sparse pulse train: silent most ticks, otherwise a clearly active level.
fn pulses() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![3 => Just(0.0), 1 => 0.3f64..1.0, 1 => -1.0f64..-0.3], 60..160)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn drive_bounded_and_monotone_in_incentive(
        start in 0.0f64..4.0,
        max in 0.5f64..4.0,
        growth in 0.01f64..0.99,
        steps in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..60),
        extra in 0.0f64..2.0,
    ) {
        let mut d = DriveState::hunger(start, max, growth);
        for (reduction, incentive) in steps {
            let more = d.update(reduction, incentive + extra).value;
            d = d.update(reduction, incentive);
            prop_assert!((0.0..=max).contains(&d.value));
            prop_assert!(more >= d.value);
        }
    }

    #[test]
    fn quiet_source_posts_no_goal(
        source in prop::collection::vec(-0.05f64..0.05, 4),
        observed in prop::collection::vec(-1.0f64..1.0, 3),
        seed in any::<u64>(),
    ) {
        let mut g = GoalSchema::new("G", "S", "E", 4, 3, None);
        g.map = DifferentiableMap::random(&[4], 3, None, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let src = ActivityPattern::new(source).unwrap();
        prop_assert!(g.emit(&src, None).unwrap().is_silent());
        let before = g.map.clone();
        g.tune(&src, None, &ActivityPattern::new(observed.clone()).unwrap(), true).unwrap();
        let loud = ActivityPattern::new(vec![0.9, 0.0, 0.0, 0.0]).unwrap();
        g.tune(&loud, None, &ActivityPattern::new(observed).unwrap(), false).unwrap();
        prop_assert_eq!(g.map, before);
    }

    /// A copy through a delay-k connection shows up as a relation at lag k + 1,
    /// since even a zero-delay connection reads the previous commit.
    #[test]
    fn copy_through_delay_is_found_at_that_lag(signal in pulses(), k in 0usize..5) {
        prop_assume!(signal.iter().filter(|v| **v != 0.0).count() >= 15);
        let mut net = Network::new(0);
        net.add_schema(scalar_source("SRC", signal.clone())).unwrap();
        net.add_schema(copier("DST")).unwrap();
        net.connect(&PortRef::new("SRC", "out"), &PortRef::new("DST", "in"), k).unwrap();
        let space = CandidateSpace::new(vec![PortRef::new("DST", "out")], vec![PortRef::new("SRC", "out")], 8);
        let cfg = CauseEffectConfig { r_threshold: 0.05, ..CauseEffectConfig::default() };
        let mut m = ReliabilityMatrix::new(space, cfg);
        for _ in 0..signal.len() + 8 {
            net.step().unwrap();
            m.accumulate(&net).unwrap();
        }
        let rel = m.extract();
        prop_assert_eq!(rel.len(), 1);
        prop_assert_eq!(rel[0].tau, k + 1);
    }

    #[test]
    fn online_sum_equals_offline_sum(effect in pulses(), cause in pulses(), tau in 0usize..6) {
        let n = effect.len().min(cause.len());
        let cfg = CauseEffectConfig::default();
        let space = CandidateSpace::new(vec![PortRef::new("E", "out")], vec![PortRef::new("C", "out")], 5);
        let mut m = ReliabilityMatrix::new(space, cfg.clone());
        for t in 0..n {
            m.accumulate_with(|p, lag| {
                let series = if p.schema == "E" { &effect } else { &cause };
                Ok(ActivityPattern::scalar(if t >= lag { series[t - lag] } else { 0.0 }))
            }).unwrap();
        }
        let offline: f64 = (0..n)
            .map(|t| {
                let lagged = if t >= tau { cause[t - tau] } else { 0.0 };
                cfg.beta * instantaneous_c(&ActivityPattern::scalar(effect[t]), &ActivityPattern::scalar(lagged), cfg.alpha, cfg.theta_act)
            })
            .sum();
        prop_assert!((m.lookup("E", "C", tau).unwrap() - offline).abs() < 1e-9);
    }

    #[test]
    fn silence_never_builds_reliability(ticks in 1usize..300, effects in 1usize..4, causes in 1usize..4) {
        let ports = |p: &str, n: usize| (0..n).map(|i| PortRef::new(&format!("{p}{i}"), "out")).collect();
        let mut m = ReliabilityMatrix::new(CandidateSpace::new(ports("E", effects), ports("C", causes), 4), CauseEffectConfig::default());
        for _ in 0..ticks {
            m.accumulate_with(|_, _| Ok(ActivityPattern::zeros(2))).unwrap();
        }
        prop_assert!(m.extract_above(f64::MIN).iter().all(|r| r.r == 0.0));
    }

    #[test]
    fn higher_threshold_extracts_a_subset(effect in pulses(), cause in pulses(), lo in -0.5f64..0.5, step in 0.0f64..0.5) {
        let n = effect.len().min(cause.len());
        let space = CandidateSpace::new(vec![PortRef::new("E", "out")], vec![PortRef::new("C", "out"), PortRef::new("D", "out")], 6);
        let mut m = ReliabilityMatrix::new(space, CauseEffectConfig::default());
        for t in 0..n {
            m.accumulate_with(|p, lag| {
                let s = match p.schema.as_str() { "E" => &effect, "C" => &cause, _ => &effect };
                Ok(ActivityPattern::scalar(if t >= lag { s[t - lag] } else { 0.0 }))
            }).unwrap();
        }
        let loose = m.extract_above(lo);
        for r in m.extract_above(lo + step) {
            prop_assert!(loose.contains(&r));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analytic_gradients_match_central_differences(
        dims in prop::collection::vec(1usize..4, 1..4),
        out in 1usize..4,
        hidden in prop::option::of(2usize..6),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = DifferentiableMap::random(&dims, out, hidden, 1.0, &mut rng);
        let x: Vec<f64> = (0..map.in_total()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..out).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fw = map.forward(&x);
        let numeric = central_jacobian(|p| map.eval(p), &x, 1e-5);
        for (a, b) in map.input_jacobian(&fw).iter().zip(&numeric) {
            prop_assert!(max_relative_error(a, b, 1e-6) < 1e-4);
        }
        let loss = |p: &[f64]| {
            let mut m = map.clone();
            m.set_params(p.to_vec());
            m.eval(&x).iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
        };
        let numeric = central_gradient(loss, map.params(), 1e-5);
        prop_assert!(max_relative_error(&map.param_vjp(&fw, &v), &numeric, 1e-6) < 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// The inverse model learns the command `goal / gain` of a linear plant from
    /// effect-space errors only.
    #[test]
    fn distal_learning_inverts_a_linear_plant(gain in 1.0f64..3.0, goal in -0.7f64..0.7, seed in 0u64..1000) {
        prop_assume!(goal.abs() > 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = PredictiveSchema::new("P", "X", "Y", None, DifferentiableMap::random(&[1, 1], 1, None, 0.01, &mut rng), 1);
        let mut effect = ActivityPattern::scalar(0.0);
        for _ in 0..3000 {
            let u = ActivityPattern::scalar(rng.gen_range(-0.4..0.4));
            p.predict(&effect, &u, None).unwrap();
            effect = ActivityPattern::scalar(gain * u.get(0));
            p.tune(&effect).unwrap();
        }
        let mut d = DualSchema::new("D", "X", "Y", None, DifferentiableMap::random(&[1, 1], 1, None, 0.01, &mut rng), 1);
        let g = ActivityPattern::scalar(goal);
        let mut effect = ActivityPattern::scalar(0.0);
        let mut u = 0.0;
        for _ in 0..2000 {
            u = d.emit(&effect, &g, None, Some(&p)).unwrap().get(0);
            effect = ActivityPattern::scalar(gain * u);
            d.tune(&effect, Some(&p)).unwrap();
        }
        prop_assert!((u - goal / gain).abs() < 1e-3, "command {u}, analytic {}", goal / gain);
    }
}
