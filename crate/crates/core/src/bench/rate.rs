use thiserror::Error;

use crate::trainers::{Phase, TrainLog};

/// Least-squares fit of `log(subopt) = intercept + slope · log(grad_evals)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Gradient-evaluation range `[first, last]` of the fitted points.
    pub window: (u64, u64),
    pub points: usize,
    pub final_subopt: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("rate fit needs at least {needed} rows with positive suboptimality, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("every suboptimality is below 1e-14; the run converged exactly and has no rate")]
    Converged,
}

const MIN_ROWS: usize = 50;
const EXACT_ZERO: f64 = 1e-14;

/// Ordinary least squares on `(ln x, ln y)`.
pub fn fit_log_log(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r_squared)
}

/// Fits the trailing half of the log, with suboptimality recomputed as
/// `oracle_value - J`. For logs of the backward sweep only the final phase
/// (epoch 0) is used.
pub fn estimate_rate(log: &TrainLog, oracle_value: f64) -> Result<RateEstimate, RateError> {
    let dynamic = log.rows.iter().any(|r| matches!(r.phase, Phase::Epoch(_)));
    let rows: Vec<(f64, f64)> = log
        .rows
        .iter()
        .filter(|r| !dynamic || r.phase == Phase::Epoch(0))
        .filter(|r| r.grad_evals > 0)
        .map(|r| (r.grad_evals as f64, oracle_value - r.j))
        .collect();
    if !rows.is_empty() && rows.iter().all(|p| p.1 < EXACT_ZERO) {
        return Err(RateError::Converged);
    }
    let positive: Vec<(f64, f64)> = rows.into_iter().filter(|p| p.1 >= EXACT_ZERO).collect();
    if positive.len() < MIN_ROWS {
        return Err(RateError::TooFewRows {
            needed: MIN_ROWS,
            found: positive.len(),
        });
    }
    let tail = &positive[positive.len() / 2..];
    let (slope, intercept, r_squared) = fit_log_log(tail);
    Ok(RateEstimate {
        slope,
        intercept,
        r_squared,
        window: (tail[0].0 as u64, tail[tail.len() - 1].0 as u64),
        points: tail.len(),
        final_subopt: positive[positive.len() - 1].1,
    })
}

/// Fit through the end points `(total gradient evaluations, final error)`
/// of several runs, e.g. one backward sweep per target accuracy.
pub fn endpoint_rate(points: &[(u64, f64)]) -> Result<RateEstimate, RateError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 >= EXACT_ZERO && p.0 > 0)
        .map(|p| (p.0 as f64, p.1))
        .collect();
    if usable.len() < 2 {
        return Err(RateError::TooFewRows {
            needed: 2,
            found: usable.len(),
        });
    }
    let (slope, intercept, r_squared) = fit_log_log(&usable);
    Ok(RateEstimate {
        slope,
        intercept,
        r_squared,
        window: (
            usable.iter().map(|p| p.0 as u64).min().unwrap_or(0),
            usable.iter().map(|p| p.0 as u64).max().unwrap_or(0),
        ),
        points: usable.len(),
        final_subopt: usable[usable.len() - 1].1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainers::LogRow;

    fn synthetic(f: impl Fn(f64) -> f64, n: u64) -> TrainLog {
        let mut log = TrainLog::new(false);
        for k in 0..=n {
            let s = if k == 0 { 1.0 } else { f(k as f64) };
            log.push(LogRow {
                grad_evals: k,
                phase: Phase::All,
                j: 10.0 - s,
                grad_norm: 0.0,
                min_opt_prob: 1.0,
                pl_lhs: None,
                pl_rhs: None,
                subopt: s,
                batch_size: None,
                coupling_dist: None,
                crossed: None,
            });
        }
        log
    }

    #[test]
    fn exact_power_law() {
        let est = estimate_rate(&synthetic(|n| 7.0 / n, 400), 10.0).unwrap();
        assert!((est.slope + 1.0).abs() < 1e-3, "{est:?}");
        assert!((est.intercept - 7f64.ln()).abs() < 1e-2);
        assert!(est.r_squared > 0.999);
    }

    #[test]
    fn converged_run_has_no_rate() {
        assert_eq!(
            estimate_rate(&synthetic(|_| 0.0, 100), 10.0),
            Err(RateError::Converged)
        );
    }

    #[test]
    fn short_log_rejected() {
        assert!(matches!(
            estimate_rate(&synthetic(|n| 1.0 / n, 20), 10.0),
            Err(RateError::TooFewRows { .. })
        ));
    }

    #[test]
    fn endpoints_of_inverse_law() {
        let pts: Vec<(u64, f64)> = [10u64, 100, 1000].iter().map(|&n| (n, 3.0 / n as f64)).collect();
        let est = endpoint_rate(&pts).unwrap();
        assert!((est.slope + 1.0).abs() < 1e-12);
    }
}
