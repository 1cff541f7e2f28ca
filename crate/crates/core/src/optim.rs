//! Nelder–Mead with a coordinate-descent polish, an optional L-BFGS
//! refinement for objectives with gradients, and seeded multi-start.

use std::cell::RefCell;

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop when the spread of simplex values drops below this.
    pub f_tol: f64,
    /// ... and the simplex diameter drops below this.
    pub x_tol: f64,
    /// Rounds of coordinate polishing after the simplex stage.
    pub polish_rounds: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            initial_step: 0.2,
            f_tol: 1e-12,
            x_tol: 1e-9,
            polish_rounds: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Adaptive-coefficient Nelder–Mead (coefficients scaled with dimension).
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let mut fc = Counted { f, evals: 0 };
    if n == 0 {
        let value = fc.call(x0);
        return Minimum {
            x: Vec::new(),
            value,
            evaluations: 1,
            converged: true,
        };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| fc.call(v)).collect();
    let mut converged = false;

    while fc.evals < opts.max_evals {
        // stable sort keeps the earlier vertex first on ties
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&k| simplex[k].clone()).collect();
        values = order.iter().map(|&k| values[k]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol && diameter <= opts.x_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = fc.call(&xr);
        if fr < values[0] {
            let xe = along(alpha * beta);
            let fe = fc.call(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fcv) = if fr < values[n] {
            let xc = along(alpha * gamma);
            let v = fc.call(&xc);
            (xc, v)
        } else {
            let xc = along(-gamma);
            let v = fc.call(&xc);
            (xc, v)
        };
        if fcv < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fcv;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=n {
            for (x, b) in simplex[k].iter_mut().zip(&best) {
                *x = b + delta * (*x - b);
            }
            values[k] = fc.call(&simplex[k]);
        }
    }

    let k = (0..=n).fold(0, |b, k| if values[k] < values[b] { k } else { b });
    Minimum {
        x: simplex[k].clone(),
        value: values[k],
        evaluations: fc.evals,
        converged,
    }
}

/// Cyclic coordinate search with step shrinking, started from `start`.
pub fn coordinate_polish<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: Minimum,
    step: f64,
    rounds: usize,
    max_evals: usize,
) -> Minimum {
    let mut fc = Counted { f, evals: 0 };
    let mut x = start.x;
    let mut best = start.value;
    let mut h = step;
    for _ in 0..rounds {
        let mut improved = true;
        while improved && fc.evals < max_evals {
            improved = false;
            for i in 0..x.len() {
                for dir in [1.0, -1.0] {
                    let old = x[i];
                    x[i] = old + dir * h;
                    let v = fc.call(&x);
                    if v < best {
                        best = v;
                        improved = true;
                        break;
                    }
                    x[i] = old;
                }
            }
        }
        h *= 0.1;
    }
    Minimum {
        x,
        value: best,
        evaluations: start.evaluations + fc.evals,
        converged: start.converged,
    }
}

/// Nelder–Mead followed by coordinate polish.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let m = nelder_mead(f, x0, opts);
    if opts.polish_rounds == 0 {
        return m;
    }
    coordinate_polish(
        f,
        m,
        0.1 * opts.initial_step,
        opts.polish_rounds,
        opts.max_evals,
    )
}

struct Tracked<'a, G> {
    f: &'a G,
    /// Last evaluation `(x, value, gradient)` and the best point seen.
    last: &'a RefCell<Option<(Vec<f64>, f64, Vec<f64>)>>,
    best: &'a RefCell<(f64, Vec<f64>, usize)>,
}

impl<G: Fn(&[f64]) -> (f64, Vec<f64>)> Tracked<'_, G> {
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        if let Some((lx, v, g)) = self.last.borrow().as_ref() {
            if lx.as_slice() == x {
                return (*v, g.clone());
            }
        }
        let (v, g) = (self.f)(x);
        let mut best = self.best.borrow_mut();
        best.2 += 1;
        if v < best.0 {
            best.0 = v;
            best.1 = x.to_vec();
        }
        *self.last.borrow_mut() = Some((x.to_vec(), v, g.clone()));
        (v, g)
    }
}

impl<G: Fn(&[f64]) -> (f64, Vec<f64>)> CostFunction for Tracked<'_, G> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        let v = self.eval(x).0;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ArgminError::msg("non-finite objective"))
        }
    }
}

impl<G: Fn(&[f64]) -> (f64, Vec<f64>)> Gradient for Tracked<'_, G> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, ArgminError> {
        Ok(self.eval(x).1)
    }
}

/// L-BFGS refinement of `start` using `f(x) = (value, gradient)`. Returns the
/// best point evaluated, which is never worse than `start`.
pub fn gradient_polish<G: Fn(&[f64]) -> (f64, Vec<f64>)>(
    f: &G,
    start: Minimum,
    max_iters: u64,
) -> Minimum {
    if max_iters == 0 || start.x.is_empty() {
        return start;
    }
    let last = RefCell::new(None);
    let best = RefCell::new((start.value, start.x.clone(), 0usize));
    let problem = Tracked {
        f,
        last: &last,
        best: &best,
    };
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), 8);
    let solver = match solver
        .with_tolerance_grad(1e-12)
        .and_then(|s| s.with_tolerance_cost(1e-15))
    {
        Ok(s) => s,
        Err(_) => return start,
    };
    // a failed line search still leaves the best evaluated point in `best`
    let _ = Executor::new(problem, solver)
        .configure(|state| state.param(start.x.clone()).max_iters(max_iters))
        .run();
    let (value, x, evals) = best.into_inner();
    Minimum {
        x,
        value,
        evaluations: start.evaluations + evals,
        converged: start.converged,
    }
}

#[derive(Debug, Clone)]
pub struct MultiStartResult {
    pub best: Minimum,
    pub best_restart: usize,
    /// Final objective of every restart, in restart order.
    pub values: Vec<f64>,
}

/// Runs `restarts` independent minimizations from points drawn by
/// `sample`. Restart `k` uses stream `k` of a ChaCha generator seeded with
/// `seed`, so results do not depend on scheduling. Ties go to the lowest
/// restart index.
pub fn multi_start<F, S>(
    f: &F,
    sample: &S,
    restarts: usize,
    seed: u64,
    opts: &NelderMeadOptions,
) -> MultiStartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    multi_start_refined(f, sample, &|m| m, restarts, seed, opts)
}

/// [`multi_start`] with `refine` applied to each restart's minimum.
pub fn multi_start_refined<F, S, R>(
    f: &F,
    sample: &S,
    refine: &R,
    restarts: usize,
    seed: u64,
    opts: &NelderMeadOptions,
) -> MultiStartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
    R: Fn(Minimum) -> Minimum + Sync,
{
    let restarts = restarts.max(1);
    let runs: Vec<Minimum> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = restart_rng(seed, k);
            let x0 = sample(&mut rng);
            refine(minimize(f, &x0, opts))
        })
        .collect();
    let best_restart =
        (0..runs.len()).fold(0, |b, k| if runs[k].value < runs[b].value { k } else { b });
    MultiStartResult {
        values: runs.iter().map(|m| m.value).collect(),
        best: runs[best_restart].clone(),
        best_restart,
    }
}

pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}
