mod common;

use common::{rng, small_mdp, zero_rewards};
use finmdp_core::bench::{build_bandit2, build_dice};
use finmdp_core::mdp::{backward_induction_optimal, evaluate_policy};
use finmdp_core::softmax::{policy_of, ParamTensor};
use finmdp_core::trainers::{
    dynamic_step_size, schedule_dynamic, simultaneous_step_size, train_dynamic,
    train_simultaneous, uniform_mu_list, CConstant, DynamicSchedule, EpochSchedule, Phase,
    StepView, TrainOptions,
};

fn fixed_schedule(mdp: &finmdp_core::mdp::FiniteMdp, steps: u64) -> DynamicSchedule {
    DynamicSchedule {
        epochs: (0..mdp.horizon())
            .map(|h| EpochSchedule {
                eta: dynamic_step_size(mdp, h),
                n_steps: steps,
                n_real: steps as f64,
                c: 1.0 / mdp.max_actions() as f64,
            })
            .collect(),
    }
}

#[test]
fn simultaneous_ascent_is_monotone() {
    let mut r = rng(1);
    for _ in 0..20 {
        let mdp = small_mdp(&mut r, false);
        let out = train_simultaneous(
            &mdp,
            &ParamTensor::zeros(&mdp),
            mdp.start(),
            simultaneous_step_size(&mdp),
            300,
            &TrainOptions::default(),
            None,
        )
        .unwrap();
        assert_eq!(out.grad_evals, 300);
        assert_eq!(out.log.rows.len(), 301);
        for w in out.log.rows.windows(2) {
            assert!(w[1].j >= w[0].j - 1e-12);
        }
    }
}

#[test]
fn dynamic_phase_objective_is_monotone() {
    let mut r = rng(2);
    for _ in 0..20 {
        let mdp = small_mdp(&mut r, false);
        let mut last: Option<(Phase, f64)> = None;
        let mut sink = |v: &StepView<'_>| {
            if let Some((phase, prev)) = last {
                if phase == v.row.phase {
                    assert!(v.phase_objective >= prev - 1e-12);
                }
            }
            last = Some((v.row.phase, v.phase_objective));
        };
        train_dynamic(
            &mdp,
            &ParamTensor::zeros(&mdp),
            &uniform_mu_list(&mdp),
            &fixed_schedule(&mdp, 200),
            &TrainOptions::default(),
            Some(&mut sink),
        )
        .unwrap();
    }
}

#[test]
fn uniform_init_keeps_optimal_action_probability() {
    let mut r = rng(3);
    for _ in 0..30 {
        let mdp = small_mdp(&mut r, false);
        let c = 1.0 / mdp.max_actions() as f64;
        let mut sink = |v: &StepView<'_>| assert!(v.row.min_opt_prob >= c - 1e-12);
        let out = train_dynamic(
            &mdp,
            &ParamTensor::zeros(&mdp),
            &uniform_mu_list(&mdp),
            &fixed_schedule(&mdp, 200),
            &TrainOptions::default(),
            Some(&mut sink),
        )
        .unwrap();
        assert!(out.c_hat >= c - 1e-12);
    }
}

#[test]
fn trained_blocks_stay_bit_stable() {
    let mdp = build_dice(4);
    let mut finished: Vec<Option<Vec<Vec<f64>>>> = vec![None; 4];
    let mut current: Option<(usize, Vec<Vec<f64>>)> = None;
    let mut sink = |v: &StepView<'_>| {
        if let Phase::Epoch(h) = v.row.phase {
            if let Some((prev, block)) = current.take() {
                if prev != h {
                    finished[prev] = Some(block);
                }
            }
            current = Some((h, v.theta.block(h).clone()));
            for (k, done) in finished.iter().enumerate() {
                if let Some(b) = done {
                    assert_eq!(v.theta.block(k), b);
                }
            }
        }
    };
    let out = train_dynamic(
        &mdp,
        &ParamTensor::zeros(&mdp),
        &uniform_mu_list(&mdp),
        &fixed_schedule(&mdp, 100),
        &TrainOptions::default(),
        Some(&mut sink),
    )
    .unwrap();
    for (k, done) in finished.iter().enumerate().skip(1) {
        assert_eq!(out.theta.block(k), done.as_ref().unwrap());
    }
}

#[test]
fn single_epoch_schemes_coincide() {
    let mdp = build_bandit2();
    let eta = dynamic_step_size(&mdp, 0);
    let sim = train_simultaneous(
        &mdp,
        &ParamTensor::zeros(&mdp),
        mdp.start(),
        eta,
        250,
        &TrainOptions::default(),
        None,
    )
    .unwrap();
    let dynamic = train_dynamic(
        &mdp,
        &ParamTensor::zeros(&mdp),
        &uniform_mu_list(&mdp),
        &fixed_schedule(&mdp, 250),
        &TrainOptions::default(),
        None,
    )
    .unwrap();
    assert_eq!(sim.theta, dynamic.theta);
    assert_eq!(sim.grad_evals, dynamic.grad_evals);
    let js = |log: &finmdp_core::trainers::TrainLog| log.rows.iter().map(|r| r.j).collect::<Vec<_>>();
    assert_eq!(js(&sim.log), js(&dynamic.log));
}

#[test]
fn zero_rewards_leave_parameters_unchanged() {
    let mut r = rng(4);
    let mdp = zero_rewards(&small_mdp(&mut r, false));
    let theta0 = common::random_theta(&mdp, 1.0, &mut r);
    let sim = train_simultaneous(&mdp, &theta0, mdp.start(), 0.1, 50, &TrainOptions::default(), None)
        .unwrap();
    assert_eq!(sim.theta, theta0);
    assert!(sim.log.rows.iter().all(|row| row.j == 0.0 && row.subopt == 0.0));
    let dynamic = train_dynamic(
        &mdp,
        &theta0,
        &uniform_mu_list(&mdp),
        &fixed_schedule(&mdp, 50),
        &TrainOptions::default(),
        None,
    )
    .unwrap();
    assert_eq!(dynamic.theta, theta0);
}

#[test]
fn dynamic_theorem_schedule_meets_target_per_state() {
    let mdp = build_dice(5);
    let mu_list = uniform_mu_list(&mdp);
    let schedule = schedule_dynamic(&mdp, &mu_list, 1.0, &CConstant::UniformInit).unwrap();
    let out = train_dynamic(
        &mdp,
        &ParamTensor::zeros(&mdp),
        &mu_list,
        &schedule,
        &TrainOptions { log_every: 10, early_stop: None },
        None,
    )
    .unwrap();
    assert_eq!(out.grad_evals, schedule.total_steps());
    let (opt, _) = backward_induction_optimal(&mdp);
    let v = evaluate_policy(&mdp, &policy_of(&out.theta)).v;
    for s in 0..7 {
        assert!(opt.v[0][s] - v[0][s] <= 1.0);
    }

    let mut plateau = vec![0u64; 5];
    let mut prev = 0;
    for row in &out.log.rows {
        if let Phase::Epoch(h) = row.phase {
            plateau[h] += row.grad_evals - prev;
            prev = row.grad_evals;
        }
    }
    for h in 0..5 {
        assert_eq!(plateau[h], schedule.epochs[h].n_steps);
    }
    assert!(plateau.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn simultaneous_early_stop_reaches_target() {
    let mdp = build_dice(3);
    let out = train_simultaneous(
        &mdp,
        &ParamTensor::zeros(&mdp),
        mdp.start(),
        simultaneous_step_size(&mdp),
        1_000_000,
        &TrainOptions { log_every: 100, early_stop: Some(0.2) },
        None,
    )
    .unwrap();
    assert!(out.early_stopped);
    let last = out.log.last().unwrap();
    assert!(last.subopt <= 0.2);
    assert_eq!(last.grad_evals, out.grad_evals);
    assert!(out.log.rows[out.log.rows.len() - 2].subopt > 0.2);
}
