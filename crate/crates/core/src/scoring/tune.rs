//! Fitting Λ to expert grades by coordinate ascent on rank agreement.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::rng::SeededRng;
use crate::scoring::linear::{FamilyValues, LinearScoreModel, FAMILIES};
use crate::CoreError;

pub const MAX_SWEEPS: usize = 50;
pub const MIN_IMPROVEMENT: f64 = 1e-4;
pub const RESTARTS: usize = 5;

/// One labeled candidate: its family values and expert grade.
pub type LabeledCandidate = (FamilyValues, u8);

/// {0} followed by 10^(k/16) for k = -48..=16, i.e. 0.001 up to 10.
pub fn lambda_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend((-48..=16).map(|k| libm::pow(10.0, f64::from(k) / 16.0)));
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub model: LinearScoreModel,
    /// Agreement of the fitted model on the training labels.
    pub e: f64,
    /// Agreement of the initial model on the training labels.
    pub e_initial: f64,
    /// Coordinate sweeps performed across every run.
    pub iterations: usize,
    pub seed: u64,
}

/// Kendall-style agreement over the pairs whose grades differ:
/// (concordant − discordant) / pairs. Score ties count as neither.
/// `None` when every grade is equal.
pub fn rank_agreement(scores: &[f64], grades: &[u8]) -> Option<f64> {
    let (mut c, mut d, mut pairs) = (0i64, 0i64, 0i64);
    for i in 0..scores.len() {
        for j in i + 1..scores.len() {
            if grades[i] == grades[j] {
                continue;
            }
            pairs += 1;
            let s = (scores[i] - scores[j]) * (f64::from(grades[i]) - f64::from(grades[j]));
            if s > 0.0 {
                c += 1;
            } else if s < 0.0 {
                d += 1;
            }
        }
    }
    (pairs > 0).then(|| (c - d) as f64 / pairs as f64)
}

struct Query {
    /// Row-major: candidate × coordinate.
    values: Vec<f64>,
    grades: Vec<u8>,
}

struct Problem {
    coords: Vec<&'static str>,
    queries: Vec<Query>,
}

impl Problem {
    fn scores(&self, q: &Query, lambda: &[f64]) -> Vec<f64> {
        let n = self.coords.len();
        q.grades
            .iter()
            .enumerate()
            .map(|(i, _)| {
                q.values[i * n..(i + 1) * n]
                    .iter()
                    .zip(lambda)
                    .map(|(v, l)| v * l)
                    .sum()
            })
            .collect()
    }

    fn agreement(&self, lambda: &[f64]) -> f64 {
        let total: f64 = self
            .queries
            .iter()
            .map(|q| rank_agreement(&self.scores(q, lambda), &q.grades).unwrap_or(0.0))
            .sum();
        total / self.queries.len() as f64
    }

    /// Coordinate ascent from `lambda`; returns (E, sweeps).
    fn ascend(&self, lambda: &mut [f64], grid: &[f64]) -> (f64, usize) {
        let mut best = self.agreement(lambda);
        let mut sweeps = 0;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let start = best;
            for j in 0..lambda.len() {
                let current = lambda[j];
                let mut pick = current;
                for &g in grid {
                    if g == current {
                        continue;
                    }
                    lambda[j] = g;
                    let e = self.agreement(lambda);
                    if e > best {
                        best = e;
                        pick = g;
                    }
                }
                lambda[j] = pick;
            }
            if best - start < MIN_IMPROVEMENT {
                break;
            }
        }
        (best, sweeps)
    }
}

fn to_model(coords: &[&str], lambda: &[f64], initial: &LinearScoreModel) -> LinearScoreModel {
    let mut map = initial.lambda.clone();
    for (id, l) in coords.iter().zip(lambda) {
        map.insert(id.to_string(), *l);
    }
    LinearScoreModel {
        lambda: map,
        z: 0.0,
    }
}

/// Maximizes the mean per-query rank agreement between model scores and
/// expert grades. The intercept is held at zero since it cannot change any
/// within-query ordering.
pub fn tune_lambda(
    queries: &[Vec<LabeledCandidate>],
    initial: &LinearScoreModel,
    seed: u64,
) -> Result<TuneResult, CoreError> {
    initial.check()?;
    let coords: Vec<&'static str> = FAMILIES
        .into_iter()
        .filter(|id| {
            initial.lambda.contains_key(*id)
                || queries.iter().flatten().any(|(f, _)| f.contains_key(*id))
        })
        .collect();

    let usable: Vec<Query> = queries
        .iter()
        .filter(|q| {
            rank_agreement(
                &vec![0.0; q.len()],
                &q.iter().map(|c| c.1).collect::<Vec<_>>(),
            )
            .is_some()
        })
        .map(|q| Query {
            values: q
                .iter()
                .flat_map(|(f, _)| coords.iter().map(|id| f.get(*id).copied().unwrap_or(0.0)))
                .collect(),
            grades: q.iter().map(|c| c.1).collect(),
        })
        .collect();
    if usable.is_empty() {
        return Err(CoreError::NoTuningSignal);
    }
    let problem = Problem {
        coords,
        queries: usable,
    };
    let grid = lambda_grid();

    let start: Vec<f64> = problem
        .coords
        .iter()
        .map(|id| initial.lambda.get(*id).copied().unwrap_or(0.0))
        .collect();
    let e_initial = problem.agreement(&start);

    let mut best = start.clone();
    let (mut best_e, mut iterations) = problem.ascend(&mut best, &grid);

    let mut rng = SeededRng::new(seed);
    for _ in 0..RESTARTS {
        let mut lambda: Vec<f64> = (0..problem.coords.len())
            .map(|_| grid[rng.below(grid.len())])
            .collect();
        let (e, sweeps) = problem.ascend(&mut lambda, &grid);
        iterations += sweeps;
        if e > best_e {
            best_e = e;
            best = lambda;
        }
    }

    let model = if best == start && initial.z == 0.0 {
        initial.clone()
    } else {
        to_model(&problem.coords, &best, initial)
    };
    Ok(TuneResult {
        model,
        e: best_e,
        e_initial,
        iterations,
        seed,
    })
}

/// Ids of families with a non-zero coefficient, for reporting.
pub fn active_families(model: &LinearScoreModel) -> Vec<String> {
    model
        .lambda
        .iter()
        .filter(|(_, l)| **l != 0.0)
        .map(|(id, _)| id.clone())
        .collect()
}
