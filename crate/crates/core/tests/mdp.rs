mod common;

use common::{path_value, random_policy, rng, small_mdp, zero_rewards};
use finmdp_core::bench::{build_bandit2, build_dice, random_mdp, RandomMdpSpec, DICE_CONTINUE, DICE_STOP};
use finmdp_core::mdp::{
    backward_induction_optimal, evaluate_policy, performance_difference, sample_trajectory,
    state_visitation, Epoch, FiniteMdp, MdpError, Substreams, TabularPolicy,
};

/// `W_1 = 3.5`, `W_{k+1} = E[max(face, W_k)]` as exact fractions `(num, den)`.
fn dice_values(h: usize) -> Vec<(i64, i64)> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let mut out = vec![(7, 2)];
    while out.len() < h {
        let (n, d) = *out.last().unwrap();
        let mut num = 0;
        for f in 1..=6i64 {
            num += if f * d >= n { f * d } else { n };
        }
        let den = 6 * d;
        let g = gcd(num, den);
        out.push((num / g, den / g));
    }
    out
}

#[test]
fn dice_optimal_value_is_277_over_54() {
    let w = dice_values(5);
    assert_eq!(w, vec![(7, 2), (17, 4), (14, 3), (89, 18), (277, 54)]);
    let mdp = build_dice(5);
    let (tables, _) = backward_induction_optimal(&mdp);
    assert!((tables.value(0, mdp.start()) - 277.0 / 54.0).abs() < 1e-12);
    for (k, &(n, d)) in w.iter().enumerate() {
        let h = 4 - k;
        assert!((tables.value(h, mdp.start()) - n as f64 / d as f64).abs() < 1e-12);
    }
}

#[test]
fn dice_single_epoch_always_stops() {
    let mdp = build_dice(1);
    let (tables, pi) = backward_induction_optimal(&mdp);
    assert!((tables.value(0, mdp.start()) - 3.5).abs() < 1e-15);
    for s in 0..6 {
        assert_eq!(pi.prob(0, s, DICE_STOP), 1.0);
    }
}

#[test]
fn dice_optimal_rule_stops_above_continuation() {
    let mdp = build_dice(5);
    let (_, pi) = backward_induction_optimal(&mdp);
    let w = dice_values(5);
    for h in 0..4 {
        let (n, d) = w[3 - h];
        let cont = n as f64 / d as f64;
        for s in 0..6 {
            let face = (s + 1) as f64;
            let expected = if face >= cont { DICE_STOP } else { DICE_CONTINUE };
            assert_eq!(pi.prob(h, s, expected), 1.0, "h={h} face={face}");
        }
    }
}

#[test]
fn always_stop_at_last_epoch_averages_faces() {
    let mdp = build_dice(5);
    let pi = TabularPolicy::deterministic(&mdp, &vec![vec![DICE_STOP; 7]; 5]);
    let tables = evaluate_policy(&mdp, &pi);
    assert!((tables.value(4, mdp.start()) - 3.5).abs() < 1e-15);
}

#[test]
fn zero_rewards_give_zero_tables() {
    let mut r = rng(1);
    for _ in 0..20 {
        let mdp = zero_rewards(&small_mdp(&mut r, false));
        let t = evaluate_policy(&mdp, &random_policy(&mdp, &mut r));
        assert!(t.v.iter().flatten().all(|x| *x == 0.0));
        assert!(t.q.iter().flatten().flatten().all(|x| *x == 0.0));
        assert!(t.adv.iter().flatten().flatten().all(|x| *x == 0.0));
    }
}

#[test]
fn evaluation_matches_path_enumeration() {
    let mut r = rng(2);
    for _ in 0..100 {
        let mdp = small_mdp(&mut r, false);
        let pi = random_policy(&mdp, &mut r);
        let t = evaluate_policy(&mdp, &pi);
        for h in 0..mdp.horizon() {
            for s in 0..mdp.num_states(h) {
                assert!((t.v[h][s] - path_value(&mdp, &pi, h, s)).abs() < 1e-10);
                let avg: f64 = (0..mdp.num_actions(h, s)).map(|a| pi.prob(h, s, a) * t.q[h][s][a]).sum();
                assert!((t.v[h][s] - avg).abs() < 1e-10);
                let adv: f64 = (0..mdp.num_actions(h, s)).map(|a| pi.prob(h, s, a) * t.adv[h][s][a]).sum();
                assert!(adv.abs() < 1e-10);
            }
        }
        let last = mdp.horizon() - 1;
        for s in 0..mdp.num_states(last) {
            for a in 0..mdp.num_actions(last, s) {
                assert_eq!(t.q[last][s][a], mdp.reward(last, s, a));
            }
        }
    }
}

#[test]
fn optimal_values_dominate_random_policies() {
    let mut r = rng(3);
    let mdp = random_mdp(&RandomMdpSpec { horizon: 4, ..RandomMdpSpec::default() }, &mut r);
    let (opt, _) = backward_induction_optimal(&mdp);
    for _ in 0..1000 {
        let t = evaluate_policy(&mdp, &random_policy(&mdp, &mut r));
        for (vs, ws) in opt.v.iter().zip(&t.v) {
            for (v, w) in vs.iter().zip(ws) {
                assert!(v + 1e-12 >= *w);
            }
        }
    }
}

#[test]
fn optimal_policy_reproduces_optimal_tables() {
    let mut r = rng(4);
    for _ in 0..50 {
        let mdp = small_mdp(&mut r, false);
        let (opt, pi) = backward_induction_optimal(&mdp);
        assert_eq!(evaluate_policy(&mdp, &pi).v, opt.v);
    }
}

#[test]
fn bandit_and_single_action_optima() {
    let bandit = build_bandit2();
    let (t, pi) = backward_induction_optimal(&bandit);
    assert_eq!(pi.row(0, 0), &[1.0, 0.0]);
    assert_eq!(t.v[0][0], 1.0);

    let mut r = rng(5);
    let mdp = random_mdp(&RandomMdpSpec { max_actions: 1, ..RandomMdpSpec::default() }, &mut r);
    let (opt, _) = backward_induction_optimal(&mdp);
    assert_eq!(opt.v, evaluate_policy(&mdp, &TabularPolicy::uniform(&mdp)).v);
}

#[test]
fn visitation_mass_is_horizon() {
    let mut r = rng(6);
    for _ in 0..100 {
        let mdp = small_mdp(&mut r, false);
        let vis = state_visitation(&mdp, &random_policy(&mdp, &mut r), mdp.start());
        assert!((vis.total_mass() - mdp.horizon() as f64).abs() < 1e-12);
        assert!((vis.d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        if mdp.horizon() == 1 {
            assert_eq!(vis.rho[0], mdp.start());
        }
    }
}

#[test]
fn dice_never_stop_visits_faces_uniformly() {
    let mdp = build_dice(5);
    let pi = TabularPolicy::deterministic(&mdp, &vec![vec![DICE_CONTINUE; 7]; 5]);
    let vis = state_visitation(&mdp, &pi, mdp.start());
    for row in &vis.rho {
        for s in 0..6 {
            assert!((row[s] - 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(row[6], 0.0);
    }
}

#[test]
fn dice_first_state_frequencies_within_three_sigma() {
    let mdp = build_dice(5);
    let pi = TabularPolicy::uniform(&mdp);
    let streams = Substreams::new(2024);
    let mut rng = streams.rng(0, 0);
    let m = 100_000;
    let mut counts = [0usize; 7];
    for _ in 0..m {
        counts[sample_trajectory(&mdp, &pi, mdp.start(), 0, &mut rng).at(0).state] += 1;
    }
    let p = 1.0 / 6.0;
    let sigma = (p * (1.0 - p) / m as f64).sqrt();
    for c in &counts[..6] {
        assert!((*c as f64 / m as f64 - p).abs() < 3.0 * sigma);
    }
    assert_eq!(counts[6], 0);
}

#[test]
fn sampling_is_reproducible_and_reward_to_go_is_suffix_sum() {
    let mut r = rng(7);
    let mdp = small_mdp(&mut r, false);
    let pi = random_policy(&mdp, &mut r);
    let streams = Substreams::new(99);
    for i in 0..50 {
        let a = sample_trajectory(&mdp, &pi, mdp.start(), 0, &mut streams.rng(3, i));
        let b = sample_trajectory(&mdp, &pi, mdp.start(), 0, &mut streams.rng(3, i));
        assert_eq!(a, b);
        assert_eq!(a.len(), mdp.horizon());
        for h in 0..mdp.horizon() {
            let suffix: f64 = (h..mdp.horizon()).rev().map(|k| a.at(k).reward).sum();
            assert_eq!(a.reward_to_go(h), suffix);
        }
    }
}

#[test]
fn single_action_chain_has_one_trajectory() {
    let epochs = vec![
        Epoch::indexed(vec![vec![1.0], vec![0.5]], vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]]),
        Epoch::indexed(vec![vec![0.25], vec![2.0]], Vec::new()),
    ];
    let mdp = FiniteMdp::with_start(epochs, 2.0, vec![1.0, 0.0]).unwrap();
    let pi = TabularPolicy::uniform(&mdp);
    let streams = Substreams::new(0);
    for seed in 0..20 {
        let t = sample_trajectory(&mdp, &pi, mdp.start(), 0, &mut streams.rng(seed, 0));
        assert_eq!((t.at(0).state, t.at(1).state), (0, 1));
        assert_eq!(t.reward_to_go(0), 3.0);
    }
}

#[test]
fn performance_difference_identity_on_random_models() {
    let mut r = rng(8);
    for _ in 0..100 {
        let mdp = small_mdp(&mut r, false);
        let pi = random_policy(&mdp, &mut r);
        let pi2 = random_policy(&mdp, &mut r);
        for s in 0..mdp.num_states(0) {
            let (lhs, rhs) = performance_difference(&mdp, &pi, &pi2, 0, s);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}

#[test]
fn performance_difference_on_dice() {
    let mdp = build_dice(5);
    let (_, opt) = backward_induction_optimal(&mdp);
    let never = TabularPolicy::deterministic(&mdp, &vec![vec![DICE_CONTINUE; 7]; 5]);
    let (lhs, rhs) = performance_difference(&mdp, &opt, &never, 0, 5);
    assert_eq!(lhs, 6.0);
    assert!((rhs - 6.0).abs() < 1e-12);
}

#[test]
fn dice_validates_for_every_small_horizon() {
    for h in 1..=20 {
        let mdp = build_dice(h);
        mdp.validate().unwrap();
        assert_eq!(mdp.horizon(), h);
        assert_eq!(mdp.r_star(), 6.0);
        for k in 0..h {
            assert_eq!(mdp.num_states(k), 7);
            assert!((0..7).all(|s| mdp.num_actions(k, s) == 2));
        }
    }
}

#[test]
fn validation_rejects_constructed_violations() {
    let sub = vec![
        Epoch::indexed(vec![vec![1.0]], vec![vec![vec![0.9]]]),
        Epoch::indexed(vec![vec![1.0]], Vec::new()),
    ];
    let err = FiniteMdp::new(sub, 1.0).unwrap_err();
    assert!(matches!(err, MdpError::NotStochastic { .. }));
    assert!(err.to_string().contains("transition not stochastic"));

    let big = vec![Epoch::indexed(vec![vec![7.0]], Vec::new())];
    let err = FiniteMdp::new(big, 6.0).unwrap_err();
    assert!(matches!(err, MdpError::RewardOutOfBounds { .. }));
    assert!(err.to_string().contains("reward out of bounds"));

    let none = vec![Epoch::indexed(vec![vec![]], Vec::new())];
    assert!(FiniteMdp::new(none, 1.0).is_err());
}
