//! Minimizing `max_w c(w)·π / N(w)·π` over the triangular weight polytope.
//!
//! Projected subgradient descent with heavy-ball momentum and a geometric
//! step schedule, restarted from random feasible points. The best iterate
//! seen is returned; the final iterate of the winning restart is kept too.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::egg::WordStats;
use crate::error::{Error, Result};
use crate::weights::{Constraints, Slacks, Weights};

/// Ratios within this distance of the maximum count as active.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxProblem {
    /// Distinct rows with a non-zero numerator, in order of first occurrence.
    num: Vec<Vec<f64>>,
    den: Vec<Vec<f64>>,
    /// Original index of each distinct row's first occurrence.
    first: Vec<usize>,
    rows: usize,
    constraints: Constraints,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub step0: f64,
    pub decay: f64,
    /// Heavy-ball coefficient.
    pub inertia: f64,
    pub tol: f64,
    /// Stop a restart after this many iterations without improvement.
    pub patience: usize,
    pub seed: u64,
    /// Average the gradients of all active ratios instead of taking the first.
    pub average_ties: bool,
}

impl Default for OptOptions {
    fn default() -> Self {
        OptOptions {
            restarts: 16,
            iterations: 2000,
            step0: 0.05,
            decay: 0.999,
            inertia: 0.5,
            tol: 1e-7,
            patience: 400,
            seed: 0,
            average_ties: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub weights: Weights,
    pub eta: f64,
    /// Index of the maximal ratio among the input rows.
    pub argmax: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub slacks: Slacks,
    /// Objective at the caller's starting point (after projection).
    pub start_eta: f64,
    /// Last iterate of the restart that produced the best point.
    pub final_weights: Weights,
    pub final_eta: f64,
}

impl MinimaxProblem {
    pub fn new(rows: &[WordStats], constraints: Constraints) -> Result<MinimaxProblem> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("no words to optimize over".into()));
        }
        let mut seen = std::collections::HashMap::new();
        let mut num = Vec::new();
        let mut den = Vec::new();
        let mut first = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            if r.n.len() != constraints.n || r.c.len() != constraints.n {
                return Err(Error::InvalidArgument("count row has the wrong width".into()));
            }
            if r.syllables() == 0 {
                return Err(Error::InvalidArgument(format!("row {i} has an empty word")));
            }
            if r.c.iter().all(|&k| k == 0) || seen.contains_key(r) {
                continue;
            }
            seen.insert(r.clone(), i);
            num.push(r.c.iter().map(|&k| k as f64).collect());
            den.push(r.n.iter().map(|&k| k as f64).collect());
            first.push(i);
        }
        Ok(MinimaxProblem { num, den, first, rows: rows.len(), constraints })
    }

    pub fn constraints(&self) -> &Constraints {
        &self.constraints
    }

    pub fn distinct_rows(&self) -> usize {
        self.num.len()
    }

    fn ratio(&self, k: usize, p: &[f64]) -> f64 {
        let a: f64 = self.num[k].iter().zip(p).map(|(c, x)| c * x).sum();
        let b: f64 = self.den[k].iter().zip(p).map(|(c, x)| c * x).sum();
        a / b
    }

    /// Maximum over distinct rows and the first active one.
    fn eval(&self, p: &[f64]) -> (f64, Option<usize>) {
        let vals: Vec<f64> = (0..self.num.len()).map(|k| self.ratio(k, p)).collect();
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if vals.is_empty() {
            return (0.0, None);
        }
        let k = vals.iter().position(|&v| v >= max - TIE_TOL);
        (max, k)
    }

    /// `(max ratio, index of the first maximal input row)`.
    pub fn objective(&self, p: &[f64]) -> (f64, usize) {
        match self.eval(p) {
            (v, Some(k)) => (v, self.first[k]),
            _ => (0.0, 0),
        }
    }

    /// Gradient of the ratio of distinct row `k`: `(c − r·N) / (N·π)`.
    fn grad_row(&self, k: usize, p: &[f64]) -> Vec<f64> {
        let b: f64 = self.den[k].iter().zip(p).map(|(c, x)| c * x).sum();
        let r = self.ratio(k, p);
        self.num[k].iter().zip(&self.den[k]).map(|(c, n)| (c - r * n) / b).collect()
    }

    /// Gradient of the active ratio at `p` (the row reported by [`Self::objective`]).
    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        match self.eval(p).1 {
            Some(k) => self.grad_row(k, p),
            None => vec![0.0; p.len()],
        }
    }

    fn subgradient(&self, p: &[f64], average: bool) -> Vec<f64> {
        let (max, first) = self.eval(p);
        let Some(k) = first else { return vec![0.0; p.len()] };
        if !average {
            return self.grad_row(k, p);
        }
        let active: Vec<usize> = (0..self.num.len()).filter(|&j| self.ratio(j, p) >= max - TIE_TOL).collect();
        let mut g = vec![0.0; p.len()];
        for &j in &active {
            for (gi, v) in g.iter_mut().zip(self.grad_row(j, p)) {
                *gi += v / active.len() as f64;
            }
        }
        g
    }

    fn descend(&self, start: Vec<f64>, opts: &OptOptions) -> Result<(Vec<f64>, f64, Vec<f64>, f64, usize)> {
        let c = &self.constraints;
        let mut x = c.project(&start)?;
        let mut f = self.eval(&x).0;
        let (mut best_x, mut best_f) = (x.clone(), f);
        let mut v = vec![0.0; x.len()];
        let mut step = opts.step0;
        let mut since = 0;
        let mut iters = 0;
        for _ in 0..opts.iterations {
            iters += 1;
            let mut g = self.subgradient(&x, opts.average_ties);
            // descent happens inside the simplex, so drop the normal component
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            g.iter_mut().for_each(|gi| *gi -= mean);
            let norm = g.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm < 1e-15 {
                break;
            }
            for (vi, gi) in v.iter_mut().zip(&g) {
                *vi = opts.inertia * *vi - step * gi / norm;
            }
            let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
            let nx = c.project(&y)?;
            for i in 0..x.len() {
                v[i] = nx[i] - x[i];
            }
            x = nx;
            f = self.eval(&x).0;
            step *= opts.decay;
            if f < best_f - opts.tol {
                best_f = f;
                best_x = x.clone();
                since = 0;
            } else {
                if f < best_f {
                    best_f = f;
                    best_x = x.clone();
                }
                since += 1;
                if since >= opts.patience {
                    break;
                }
            }
        }
        Ok((best_x, best_f, x, f, iters))
    }

    /// Multi-start minimization from `start` plus `opts.restarts` random
    /// feasible points. Deterministic in `opts.seed`.
    pub fn optimize(&self, start: &[f64], opts: &OptOptions) -> Result<OptResult> {
        let c = &self.constraints;
        let first = c.project(start)?;
        let start_eta = self.eval(&first).0;
        let mut starts = vec![first];
        if opts.restarts > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for _ in 0..opts.restarts {
                // normalized unit exponentials are uniform on the simplex
                let raw: Vec<f64> = (0..c.n).map(|_| Exp1.sample(&mut rng)).collect();
                starts.push(c.project(&raw)?);
            }
        }
        if self.num.is_empty() {
            let w = starts.swap_remove(0);
            return Ok(OptResult {
                slacks: c.slacks(&w),
                weights: Weights::from_vec_unchecked(w.clone()),
                eta: 0.0,
                argmax: 0,
                iterations: 0,
                restarts: 0,
                start_eta: 0.0,
                final_weights: Weights::from_vec_unchecked(w),
                final_eta: 0.0,
            });
        }
        let runs: Vec<Result<(Vec<f64>, f64, Vec<f64>, f64, usize)>> =
            starts.into_par_iter().map(|s| self.descend(s, opts)).collect();
        let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
        let iterations = runs.iter().map(|r| r.4).sum();
        let best = runs
            .iter()
            .min_by(|a, b| {
                a.1.total_cmp(&b.1).then_with(|| {
                    a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
                })
            })
            .expect("at least one start");
        let (eta, argmax) = self.objective(&best.0);
        Ok(OptResult {
            weights: Weights::from_vec_unchecked(best.0.clone()),
            eta,
            argmax,
            iterations,
            restarts: opts.restarts,
            slacks: c.slacks(&best.0),
            start_eta,
            final_weights: Weights::from_vec_unchecked(best.2.clone()),
            final_eta: best.3,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux::AuxGroup;
    use crate::formats::zoo;
    use crate::group::Group;

    fn rows() -> (Vec<WordStats>, Constraints) {
        // a, ba, ca, da over (a, b, c, d)
        let r = |n: [u32; 4], c: [u32; 4]| WordStats { n: n.to_vec(), c: c.to_vec() };
        let g = Group::new(zoo::grigorchuk()).unwrap();
        let aux = AuxGroup::parse_blocks(&g, "{a},{b,c,d}").unwrap();
        (
            vec![
                r([1, 0, 0, 0], [0, 0, 0, 0]),
                r([1, 1, 0, 0], [1, 0, 1, 0]),
                r([1, 0, 1, 0], [1, 0, 0, 1]),
                r([1, 0, 0, 1], [0, 1, 0, 0]),
            ],
            Constraints::from_aux(&aux),
        )
    }

    #[test]
    fn objective_examples() {
        let (rows, c) = rows();
        let p = MinimaxProblem::new(&rows, c.clone()).unwrap();
        let (v, k) = p.objective(&zoo::BARTHOLDI_WEIGHTS);
        assert!((v - 0.8106).abs() < 1e-4);
        assert_eq!(k, 1);
        let (v, k) = p.objective(&[0.25; 4]);
        assert_eq!((v, k), (1.0, 1));
        let single = MinimaxProblem::new(&rows[..1], c).unwrap();
        assert_eq!(single.objective(&[0.25; 4]).0, 0.0);
    }

    #[test]
    fn recovers_bartholdi_weights() {
        let (rows, c) = rows();
        let p = MinimaxProblem::new(&rows, c.clone()).unwrap();
        let r = p.optimize(&[0.25; 4], &OptOptions::default()).unwrap();
        assert!(c.is_feasible(r.weights.as_slice()));
        assert!(r.eta <= 0.8115, "{r:?}");
        assert!(r.weights.l1_distance(&zoo::BARTHOLDI_WEIGHTS) < 0.05, "{r:?}");
    }

    #[test]
    fn trivial_rows_give_zero() {
        let (rows, c) = rows();
        let p = MinimaxProblem::new(&rows[..1], c.clone()).unwrap();
        let r = p.optimize(&[0.25; 4], &OptOptions::default()).unwrap();
        assert_eq!(r.eta, 0.0);
        assert!(c.is_feasible(r.weights.as_slice()));
    }
}
