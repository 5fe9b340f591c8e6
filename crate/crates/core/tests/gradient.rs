mod common;

use common::{finite_difference, max_abs_diff, random_theta, rng, small_mdp};
use finmdp_core::bench::{build_bandit2, build_dice, random_mdp, RandomMdpSpec};
use finmdp_core::gradient::{
    distribution_mismatch, grad_dynamic, grad_simultaneous, objective_dynamic,
    objective_simultaneous, pl_certificate_dynamic, pl_certificate_simultaneous,
    smoothness_witness, Scheme,
};
use finmdp_core::mdp::{backward_induction_optimal, state_visitation, TabularPolicy};
use finmdp_core::softmax::{policy_of, ParamTensor};
use rand::Rng;

#[test]
fn simultaneous_gradient_matches_finite_differences() {
    let mut r = rng(11);
    for _ in 0..100 {
        let mdp = small_mdp(&mut r, false);
        let theta = random_theta(&mdp, 2.0, &mut r);
        let mu = mdp.start().to_vec();
        let exact = grad_simultaneous(&mdp, &theta, &mu);
        let fd = finite_difference(&theta, 1e-6, |t| objective_simultaneous(&mdp, t, &mu));
        assert!(max_abs_diff(&exact, &fd) <= 1e-5);
    }
}

#[test]
fn dynamic_gradient_matches_finite_differences() {
    let mut r = rng(12);
    for _ in 0..100 {
        let mdp = small_mdp(&mut r, false);
        let theta = random_theta(&mdp, 2.0, &mut r);
        let tilde = policy_of(&random_theta(&mdp, 2.0, &mut r));
        let h = r.random_range(0..mdp.horizon());
        let mu_h = mdp.uniform_distribution(h);
        let exact = ParamTensor::from_blocks(vec![grad_dynamic(&mdp, theta.block(h), &tilde, &mu_h, h)]);
        let block = ParamTensor::from_blocks(vec![theta.block(h).clone()]);
        let fd = finite_difference(&block, 1e-6, |t| {
            objective_dynamic(&mdp, t.block(0), &tilde, &mu_h, h)
        });
        assert!(max_abs_diff(&exact, &fd) <= 1e-5);
    }
}

#[test]
fn gradient_rows_sum_to_zero() {
    let mut r = rng(13);
    for _ in 0..100 {
        let mdp = small_mdp(&mut r, false);
        let theta = random_theta(&mdp, 3.0, &mut r);
        let g = grad_simultaneous(&mdp, &theta, mdp.start());
        let pi = policy_of(&theta);
        for h in 0..mdp.horizon() {
            for row in g.block(h) {
                assert!(row.iter().sum::<f64>().abs() <= 1e-12);
            }
            let gd = grad_dynamic(&mdp, theta.block(h), &pi, &mdp.uniform_distribution(h), h);
            for row in gd {
                assert!(row.iter().sum::<f64>().abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn simultaneous_block_equals_dynamic_under_visitation_start() {
    let mut r = rng(14);
    for _ in 0..50 {
        let spec = RandomMdpSpec { horizon: 2, ..RandomMdpSpec::default() };
        let mdp = random_mdp(&spec, &mut r);
        let theta = random_theta(&mdp, 2.0, &mut r);
        let pi = policy_of(&theta);
        let g = grad_simultaneous(&mdp, &theta, mdp.start());
        let rho = state_visitation(&mdp, &pi, mdp.start()).rho;
        for h in 0..2 {
            let gd = grad_dynamic(&mdp, theta.block(h), &pi, &rho[h], h);
            for (row, drow) in g.block(h).iter().zip(&gd) {
                for (x, y) in row.iter().zip(drow) {
                    assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn dynamic_gradient_ignores_other_blocks() {
    let mdp = build_dice(4);
    let mut r = rng(15);
    let theta = random_theta(&mdp, 1.0, &mut r);
    let tilde = policy_of(&theta);
    let mu = mdp.uniform_distribution(2);
    let before = grad_dynamic(&mdp, theta.block(2), &tilde, &mu, 2);
    let mut moved = theta.clone();
    moved.set(0, 3, 1, 5.0);
    moved.set(1, 0, 0, -2.0);
    let after = grad_dynamic(&mdp, moved.block(2), &policy_of(&moved), &mu, 2);
    assert_eq!(before, after);
}

#[test]
fn dice_last_epoch_gradient_is_stopping_bandit() {
    let mdp = build_dice(5);
    let theta = ParamTensor::zeros(&mdp);
    let mu = mdp.uniform_distribution(4);
    let g = grad_dynamic(&mdp, theta.block(4), &TabularPolicy::uniform(&mdp), &mu, 4);
    // Face f: Q = (0, f), V = f/2, so the stop entry is (1/7)(1/2)(f/2).
    for f in 1..=6 {
        let expected = f as f64 / 28.0;
        assert!((g[f - 1][1] - expected).abs() < 1e-15);
        assert!((g[f - 1][0] + expected).abs() < 1e-15);
    }
    assert_eq!(g[6], vec![0.0, 0.0]);
}

#[test]
fn zero_rewards_give_zero_gradients() {
    let mut r = rng(16);
    let spec = RandomMdpSpec { r_star: 1.0, ..RandomMdpSpec::default() };
    let base = random_mdp(&spec, &mut r);
    let theta = random_theta(&base, 1.0, &mut r);
    let mut epochs_zero = Vec::new();
    for h in 0..base.horizon() {
        let e = base.epoch(h);
        let rewards = (0..e.num_states()).map(|s| vec![0.0; e.actions(s).len()]).collect();
        let transitions = if h + 1 < base.horizon() {
            (0..e.num_states())
                .map(|s| (0..e.actions(s).len()).map(|a| base.transition(h, s, a).to_vec()).collect())
                .collect()
        } else {
            Vec::new()
        };
        epochs_zero.push(finmdp_core::mdp::Epoch::new(
            e.states().to_vec(),
            (0..e.num_states()).map(|s| e.actions(s).to_vec()).collect(),
            rewards,
            transitions,
        ));
    }
    let mdp = finmdp_core::mdp::FiniteMdp::new(epochs_zero, 1.0).unwrap();
    assert_eq!(grad_simultaneous(&mdp, &theta, mdp.start()).norm(), 0.0);
}

#[test]
fn mismatch_at_least_one_on_dice() {
    let mdp = build_dice(5);
    let (_, pi_star) = backward_induction_optimal(&mdp);
    let mut r = rng(17);
    for _ in 0..100 {
        let pi = policy_of(&random_theta(&mdp, 3.0, &mut r));
        let m = distribution_mismatch(&mdp, mdp.start(), &pi_star, &pi).unwrap();
        assert!(m.coefficient >= 1.0 - 1e-12);
        assert!(m.uniform_bound >= m.coefficient - 1e-12);
    }
    let one = distribution_mismatch(&mdp, mdp.start(), &pi_star, &pi_star).unwrap();
    assert!((one.coefficient - 1.0).abs() < 1e-15);
}

#[test]
fn simultaneous_pl_certificate_random_instances() {
    let mut r = rng(18);
    for _ in 0..200 {
        let spec = RandomMdpSpec {
            horizon: r.random_range(1..=3),
            constant_states: true,
            ..RandomMdpSpec::default()
        };
        let mdp = random_mdp(&spec, &mut r);
        let (_, pi_star) = backward_induction_optimal(&mdp);
        let theta = random_theta(&mdp, 3.0, &mut r);
        let cert = pl_certificate_simultaneous(&mdp, &theta, mdp.start(), &pi_star);
        assert!(cert.rhs.is_some());
        assert!(cert.holds(1e-10), "{cert:?}");
        assert!(cert.suboptimality >= -1e-10);
        assert!(cert.min_opt_prob > 0.0 && cert.min_opt_prob <= 1.0);
    }
}

#[test]
fn simultaneous_pl_certificate_dice_uniform() {
    let mdp = build_dice(5);
    let (_, pi_star) = backward_induction_optimal(&mdp);
    let cert = pl_certificate_simultaneous(&mdp, &ParamTensor::zeros(&mdp), mdp.start(), &pi_star);
    assert_eq!(cert.min_opt_prob, 0.5);
    assert!(cert.lhs.is_finite() && cert.rhs.unwrap().is_finite());
    assert!(cert.mismatch.unwrap().is_finite());
    assert!(cert.holds(1e-10));
}

#[test]
fn bandit_certificate_vanishes_at_optimum() {
    let mdp = build_bandit2();
    let (_, pi_star) = backward_induction_optimal(&mdp);
    let theta = ParamTensor::from_blocks(vec![vec![vec![20.0, 0.0]]]);
    let cert = pl_certificate_simultaneous(&mdp, &theta, &[1.0], &pi_star);
    assert!(cert.suboptimality < 1e-8);
    assert!(cert.lhs < 1e-8 && cert.rhs.unwrap() < 1e-8);
    assert!(cert.holds(1e-10));
}

#[test]
fn dynamic_pl_certificate_normalised_random_instances() {
    let mut r = rng(19);
    for _ in 0..200 {
        let mdp = small_mdp(&mut r, false);
        let theta = random_theta(&mdp, 3.0, &mut r);
        let tilde = policy_of(&random_theta(&mdp, 3.0, &mut r));
        let h = r.random_range(0..mdp.horizon());
        let cert = pl_certificate_dynamic(&mdp, theta.block(h), &tilde, &mdp.uniform_distribution(h), h);
        assert!(cert.normalised_holds(1e-10), "{cert:?}");
        assert!(cert.suboptimality >= -1e-10);
    }
}

#[test]
fn smoothness_witnesses_hold() {
    let mut r = rng(20);
    let dice = build_dice(5);
    for _ in 0..100 {
        let a = random_theta(&dice, 3.0, &mut r);
        let b = random_theta(&dice, 3.0, &mut r);
        let (gap, bound) =
            smoothness_witness(&dice, &a, &b, &Scheme::Simultaneous { mu: dice.start() });
        assert!(gap <= bound);
        let h = r.random_range(0..5);
        let tilde = policy_of(&random_theta(&dice, 3.0, &mut r));
        let mu_h = dice.uniform_distribution(h);
        let (gap, bound) = smoothness_witness(
            &dice,
            &a,
            &b,
            &Scheme::Dynamic { h, tilde_pi: &tilde, mu_h: &mu_h },
        );
        assert!(gap <= bound);
    }
    for _ in 0..200 {
        let mdp = small_mdp(&mut r, false);
        let a = random_theta(&mdp, 2.0, &mut r);
        let b = random_theta(&mdp, 2.0, &mut r);
        let (gap, bound) = smoothness_witness(&mdp, &a, &b, &Scheme::Simultaneous { mu: mdp.start() });
        assert!(gap <= bound);
    }
    let same = random_theta(&dice, 1.0, &mut r);
    assert_eq!(
        smoothness_witness(&dice, &same, &same, &Scheme::Simultaneous { mu: dice.start() }),
        (0.0, 0.0)
    );
}

#[test]
fn dynamic_pl_unnormalised_bound_fails_on_wide_bandit() {
    // Four identical two-armed states at θ ≡ 0: every gradient entry is
    // ±1/16, so ‖∇J_0‖ = √8/16 while min π(a*) (J* - J) = 1/4.
    let rewards = vec![vec![1.0, 0.0]; 4];
    let mdp = finmdp_core::mdp::FiniteMdp::new(
        vec![finmdp_core::mdp::Epoch::indexed(rewards, vec![])],
        1.0,
    )
    .unwrap();
    let pi = TabularPolicy::uniform(&mdp);
    let theta = ParamTensor::zeros(&mdp);
    let cert = pl_certificate_dynamic(&mdp, theta.block(0), &pi, mdp.start(), 0);
    assert!((cert.lhs - 8f64.sqrt() / 16.0).abs() < 1e-15);
    assert_eq!(cert.rhs, Some(0.25));
    assert!(!cert.holds(1e-10));
    assert!(cert.normalised_holds(1e-10));
}
