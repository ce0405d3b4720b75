//! Generic optimization kernels backing the design algorithms: projection
//! onto the PSD trace ball, projected-gradient ascent over that set,
//! box-constrained projected gradient, and Nelder–Mead direct search.
//!
//! The PSD projection is deliberately the cheap clamp-then-rescale
//! surrogate (never the exact Euclidean projection onto the cone∩ball
//! intersection): it always lands inside the feasible set, and the
//! monotone Armijo line search supplies the ascent guarantee.

use crate::channel::BCVector;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner_re, hermitian_eigen, hermitian_part};
use crate::throughput::PrecoderMatrix;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Armijo sufficient-increase coefficient shared by both gradient solvers.
const ARMIJO_C: f64 = 1e-4;
/// Line-search shrink factor.
const ARMIJO_SHRINK: f64 = 0.5;
/// Initial trial step.
const INITIAL_STEP: f64 = 1.0;
/// Smallest trial step before a line search gives up.
const MIN_STEP: f64 = 1e-18;
/// Largest trial step the warm-started search may grow to.
const MAX_STEP: f64 = 1e9;

/// Outcome summary attached to every solver result.
#[derive(Debug, Clone)]
pub struct SolverReport {
    /// Outer iterations executed.
    pub iterations: usize,
    /// Objective value at the returned point.
    pub final_value: f64,
    /// Whether the stopping rule (rather than the iteration cap) fired;
    /// for the box solver this also requires the exit KKT residual check.
    pub converged: bool,
    /// Per-iteration objective values (nondecreasing for the two
    /// projected-gradient solvers), starting with the initial value.
    pub trace: Option<Vec<f64>>,
}

/// Projects a (nearly) Hermitian matrix onto {PSD, trace ≤ budget}:
/// symmetrize, clamp negative eigenvalues to zero, then — only if the
/// clamped trace still exceeds the budget — rescale the spectrum uniformly
/// so the trace equals the budget exactly.
pub fn project_psd_trace(x: &DMatrix<Complex64>, budget: f64) -> PrecoderMatrix {
    let budget = budget.max(0.0);
    let (values, vectors) = hermitian_eigen(&hermitian_part(x));
    let mut clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let trace: f64 = clamped.iter().sum();
    if trace > budget {
        let scale = if trace > 0.0 { budget / trace } else { 0.0 };
        for v in &mut clamped {
            *v *= scale;
        }
    }
    let n = x.nrows();
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        clamped.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    PrecoderMatrix::new(&vectors * lambda * vectors.adjoint())
}

/// Projected-gradient ascent of a concave objective over the PSD trace
/// ball. `gradient` must return the Hermitian matrix G such that
/// f(F + D) ≈ f(F) + Re tr(Gᴴ D) for Hermitian perturbations D.
///
/// Stops when an iteration improves the objective by less than `tol`
/// (converged) or after `max_iter` iterations; the returned objective is
/// never below the initial one.
pub fn pga_psd_maximize(
    objective: impl Fn(&PrecoderMatrix) -> f64,
    gradient: impl Fn(&PrecoderMatrix) -> DMatrix<Complex64>,
    init: &PrecoderMatrix,
    budget: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(PrecoderMatrix, SolverReport)> {
    let mut current = project_psd_trace(&init.matrix, budget);
    let mut value = objective(&current);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective {
            value,
            context: "projected-gradient ascent initialization",
        });
    }
    let mut trace_log = vec![value];
    let mut step = INITIAL_STEP;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let grad = hermitian_part(&gradient(&current));
        let mut accepted = None;
        let mut trial = step;
        while trial >= MIN_STEP {
            let cand = project_psd_trace(&(&current.matrix + &grad * Complex64::new(trial, 0.0)), budget);
            let cand_value = objective(&cand);
            if cand_value.is_finite() {
                let along = frobenius_inner_re(&grad, &(&cand.matrix - &current.matrix));
                let sufficient = if along > 0.0 {
                    cand_value >= value + ARMIJO_C * along
                } else {
                    cand_value > value
                };
                if sufficient {
                    accepted = Some((cand, cand_value, trial));
                    break;
                }
            }
            trial *= ARMIJO_SHRINK;
        }
        match accepted {
            Some((cand, cand_value, used_step)) => {
                let improvement = cand_value - value;
                current = cand;
                value = cand_value;
                trace_log.push(value);
                step = (used_step * 2.0).min(MAX_STEP);
                if improvement < tol {
                    converged = true;
                    break;
                }
            }
            None => {
                // No feasible ascent step left: stationary for this
                // projection family.
                converged = true;
                break;
            }
        }
    }
    let report = SolverReport {
        iterations,
        final_value: value,
        converged,
        trace: Some(trace_log),
    };
    Ok((current, report))
}

/// Projected-gradient ascent of a concave objective over the box
/// [lo, hi]^M, with clamping projection and Armijo backtracking.
///
/// `converged` additionally requires the exit KKT residual — the norm of
/// the unit-step projected gradient — to fall below 1e−6 (scaled).
pub fn box_pg_maximize(
    objective: impl Fn(&BCVector) -> f64,
    gradient: impl Fn(&BCVector) -> Vec<f64>,
    init: &BCVector,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(BCVector, SolverReport)> {
    if lo >= hi {
        return Err(Error::domain(format!(
            "box bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut current = init.clamped(lo, hi);
    let mut value = objective(&current);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective {
            value,
            context: "box projected-gradient initialization",
        });
    }
    let m = current.len();
    let mut trace_log = vec![value];
    let mut step = INITIAL_STEP;
    let mut iterations = 0;
    let mut stopped = false;
    while iterations < max_iter {
        iterations += 1;
        let grad = gradient(&current);
        let mut accepted = None;
        let mut trial = step;
        while trial >= MIN_STEP {
            let cand = BCVector {
                alphas: (0..m)
                    .map(|k| (current.alphas[k] + trial * grad[k]).clamp(lo, hi))
                    .collect(),
            };
            let cand_value = objective(&cand);
            if cand_value.is_finite() {
                let along: f64 = (0..m)
                    .map(|k| grad[k] * (cand.alphas[k] - current.alphas[k]))
                    .sum();
                let sufficient = if along > 0.0 {
                    cand_value >= value + ARMIJO_C * along
                } else {
                    cand_value > value
                };
                if sufficient {
                    accepted = Some((cand, cand_value, trial));
                    break;
                }
            }
            trial *= ARMIJO_SHRINK;
        }
        match accepted {
            Some((cand, cand_value, used_step)) => {
                let improvement = cand_value - value;
                current = cand;
                value = cand_value;
                trace_log.push(value);
                step = (used_step * 2.0).min(MAX_STEP);
                if improvement < tol {
                    stopped = true;
                    break;
                }
            }
            None => {
                stopped = true;
                break;
            }
        }
    }
    // Exit KKT residual: unit-step projected gradient.
    let grad = gradient(&current);
    let residual: f64 = (0..m)
        .map(|k| {
            let moved = (current.alphas[k] + grad[k]).clamp(lo, hi) - current.alphas[k];
            moved * moved
        })
        .sum::<f64>()
        .sqrt();
    let grad_norm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let kkt_ok = residual < 1e-6 * (1.0 + grad_norm);
    let report = SolverReport {
        iterations,
        final_value: value,
        converged: stopped && kkt_ok,
        trace: Some(trace_log),
    };
    Ok((current, report))
}

/// Standard Nelder–Mead direct search, maximizing.
///
/// Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
/// The initial simplex is `start` plus one `scale[i]`-sized step per
/// coordinate. Stops when the simplex objective spread falls below `tol`
/// or after `max_iter` loop passes. Returns the best point ever evaluated —
/// including rejected trial points — so the result is never worse than the
/// start. Non-finite trial values are treated as −∞ (never accepted).
pub fn nelder_mead(
    objective: impl Fn(&[f64]) -> f64,
    start: &[f64],
    scale: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolverReport)> {
    let n = start.len();
    if n == 0 {
        return Err(Error::domain("empty start point for direct search"));
    }
    if scale.len() != n {
        return Err(Error::DimensionMismatch {
            context: "simplex scale vs start point",
            expected: n,
            actual: scale.len(),
        });
    }
    let eval = |x: &[f64]| -> f64 {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let start_value = objective(start);
    if !start_value.is_finite() {
        return Err(Error::NonFiniteObjective {
            value: start_value,
            context: "direct-search initialization",
        });
    }

    let mut best_point = start.to_vec();
    let mut best_value = start_value;
    let track = |x: &[f64], v: f64, best_point: &mut Vec<f64>, best_value: &mut f64| {
        if v > *best_value {
            *best_value = v;
            best_point.clear();
            best_point.extend_from_slice(x);
        }
    };

    // Initial simplex: start plus per-coordinate steps.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), start_value));
    for i in 0..n {
        let mut p = start.to_vec();
        let h = if scale[i] != 0.0 { scale[i] } else { 1e-4 };
        p[i] += h;
        let v = eval(&p);
        track(&p, v, &mut best_point, &mut best_value);
        simplex.push((p, v));
    }

    let mut trace_log = vec![best_value];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // Descending by value: index 0 best, index n worst (maximizing).
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = simplex[0].1 - simplex[n].1;
        if spread < tol {
            converged = true;
            break;
        }
        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (p, _) in simplex.iter().take(n) {
            for i in 0..n {
                centroid[i] += p[i];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }
        let worst = simplex[n].clone();
        let point_at = |coef: f64| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + coef * (centroid[i] - worst.0[i]))
                .collect()
        };

        let reflected = point_at(1.0);
        let f_reflected = eval(&reflected);
        track(&reflected, f_reflected, &mut best_point, &mut best_value);

        if f_reflected > simplex[0].1 {
            // Try to expand past the reflection.
            let expanded = point_at(2.0);
            let f_expanded = eval(&expanded);
            track(&expanded, f_expanded, &mut best_point, &mut best_value);
            simplex[n] = if f_expanded > f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected > simplex[n - 1].1 {
            simplex[n] = (reflected, f_reflected);
        } else {
            // Contract toward the better side; shrink if even that fails.
            let (contracted, f_contracted) = if f_reflected > worst.1 {
                let p = point_at(0.5);
                let v = eval(&p);
                (p, v)
            } else {
                let p = point_at(-0.5);
                let v = eval(&p);
                (p, v)
            };
            track(&contracted, f_contracted, &mut best_point, &mut best_value);
            if f_contracted > worst.1.max(f_reflected) {
                simplex[n] = (contracted, f_contracted);
            } else {
                // Shrink every vertex toward the best.
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        vertex.0[i] = anchor[i] + 0.5 * (vertex.0[i] - anchor[i]);
                    }
                    vertex.1 = eval(&vertex.0);
                    track(&vertex.0.clone(), vertex.1, &mut best_point, &mut best_value);
                }
            }
        }
        trace_log.push(best_value);
    }
    let report = SolverReport {
        iterations,
        final_value: best_value,
        converged,
        trace: Some(trace_log),
    };
    Ok((best_point, report))
}
