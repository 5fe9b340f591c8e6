use rand::Rng;

use crate::mdp::{Epoch, FiniteMdp};

/// Name of the absorbing state entered by stopping.
pub const DICE_STOPPED: &str = "stopped";
pub const DICE_CONTINUE: usize = 0;
pub const DICE_STOP: usize = 1;

/// Optimal stopping of `h` dice throws. States are the faces `"1"..="6"` and
/// the absorbing `"stopped"` at every epoch; `continue` rethrows, `stop`
/// collects the face value. The start distribution is uniform on the faces.
pub fn build_dice(h: usize) -> FiniteMdp {
    assert!(h >= 1, "dice horizon must be at least 1");
    let mut states: Vec<String> = (1..=6).map(|f| f.to_string()).collect();
    states.push(DICE_STOPPED.to_owned());
    let actions = vec![vec!["continue".to_owned(), "stop".to_owned()]; 7];
    let rewards: Vec<Vec<f64>> = (0..7)
        .map(|s| if s < 6 { vec![0.0, (s + 1) as f64] } else { vec![0.0, 0.0] })
        .collect();
    let mut face = vec![1.0 / 6.0; 6];
    face.push(0.0);
    let mut absorbed = vec![0.0; 6];
    absorbed.push(1.0);
    let transitions: Vec<Vec<Vec<f64>>> = (0..7)
        .map(|s| {
            let cont = if s < 6 { face.clone() } else { absorbed.clone() };
            vec![cont, absorbed.clone()]
        })
        .collect();
    let epochs = (0..h)
        .map(|k| {
            let t = if k + 1 < h { transitions.clone() } else { Vec::new() };
            Epoch::new(states.clone(), actions.clone(), rewards.clone(), t)
        })
        .collect();
    let mut start = vec![1.0 / 6.0; 6];
    start.push(0.0);
    FiniteMdp::with_start(epochs, 6.0, start).expect("dice model is valid")
}

/// One state, one epoch, rewards `(1, 0)`.
pub fn build_bandit2() -> FiniteMdp {
    FiniteMdp::new(
        vec![Epoch::new(
            vec!["s".into()],
            vec![vec!["a1".into(), "a2".into()]],
            vec![vec![1.0, 0.0]],
            Vec::new(),
        )],
        1.0,
    )
    .expect("bandit is valid")
}

/// Shape of a randomly generated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMdpSpec {
    pub horizon: usize,
    pub max_states: usize,
    pub max_actions: usize,
    /// Same state names at every epoch.
    pub constant_states: bool,
    pub r_star: f64,
}

impl Default for RandomMdpSpec {
    fn default() -> Self {
        Self {
            horizon: 3,
            max_states: 4,
            max_actions: 3,
            constant_states: false,
            r_star: 1.0,
        }
    }
}

/// Random model with `1..=max_states` states per epoch, `1..=max_actions`
/// actions per state, rewards uniform on `[0, r_star]` and transition rows
/// with random sparsity. The start distribution is random and positive.
pub fn random_mdp<R: Rng + ?Sized>(spec: &RandomMdpSpec, rng: &mut R) -> FiniteMdp {
    let common = rng.random_range(1..=spec.max_states);
    let sizes: Vec<usize> = (0..spec.horizon)
        .map(|_| {
            if spec.constant_states {
                common
            } else {
                rng.random_range(1..=spec.max_states)
            }
        })
        .collect();
    let epochs = (0..spec.horizon)
        .map(|h| {
            let n = sizes[h];
            let rewards: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let k = rng.random_range(1..=spec.max_actions);
                    (0..k).map(|_| rng.random::<f64>() * spec.r_star).collect()
                })
                .collect();
            let transitions = if h + 1 < spec.horizon {
                rewards
                    .iter()
                    .map(|row| row.iter().map(|_| random_distribution(sizes[h + 1], rng)).collect())
                    .collect()
            } else {
                Vec::new()
            };
            Epoch::indexed(rewards, transitions)
        })
        .collect();
    let start = random_distribution(sizes[0], rng)
        .into_iter()
        .map(|p| 0.5 * p + 0.5 / sizes[0] as f64)
        .collect();
    FiniteMdp::with_start(epochs, spec.r_star, start).expect("generated model is valid")
}

/// Random probability vector; roughly a third of the entries are zeroed
/// unless that would leave none.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let drift = 1.0 - w.iter().sum::<f64>();
    let top = crate::mdp::argmax(&w);
    w[top] += drift;
    w
}
