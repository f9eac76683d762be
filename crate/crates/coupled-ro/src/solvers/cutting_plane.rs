//! Cutting-plane solver for static robust problems.
//!
//! The master keeps only the constraints generated so far, starting from the
//! nominal realization (the Chebyshev center of the coupled set). Each round
//! maximizes the violation of every robust row over the coupled set and adds
//! the single most violating `(row, u)` pair, breaking ties toward the lowest
//! row index; it stops when no violation exceeds the tolerance. Ball atoms
//! are handled by the same separation oracle (multiplier bisection or tangent
//! outer approximation inside `maximize_linear`).

use super::{Method, SecondStage, SolveOptions, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::lp::{solve_lp, LpStatus};
use crate::model::{CoeffRobustProblem, RhsRobustProblem, RobustProblem};
use crate::sets::{chebyshev_center, maximize_linear};

/// Accumulated uncertainty realizations with the row each cut came from.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    pub realizations: Vec<Vec<f64>>,
    pub source_rows: Vec<usize>,
}

impl CutPool {
    fn push(&mut self, row: usize, u: Vec<f64>) {
        self.source_rows.push(row);
        self.realizations.push(u);
    }
}

pub fn solve_cutting_plane(problem: &RobustProblem, opts: &SolveOptions) -> Result<SolveResult> {
    match problem {
        RobustProblem::Rhs(p) => cutting_plane_rhs(p, opts).map(|r| r.0),
        RobustProblem::Coeff(p) => cutting_plane_coeff(p, opts).map(|r| r.0),
    }
}

/// Variant exposing the cut pool (every stored `u` is a member of the set).
pub fn solve_cutting_plane_with_pool(
    problem: &RobustProblem,
    opts: &SolveOptions,
) -> Result<(SolveResult, CutPool)> {
    match problem {
        RobustProblem::Rhs(p) => cutting_plane_rhs(p, opts),
        RobustProblem::Coeff(p) => cutting_plane_coeff(p, opts),
    }
}

fn nominal_point(problem: &crate::sets::UncertaintySpec) -> Result<Vec<f64>> {
    match chebyshev_center(problem) {
        Ok((c, _)) => Ok(c),
        // Degenerate sets still have a usable nominal point: any member.
        Err(Error::EmptyInterior) => {
            let zero = vec![0.0; problem.dim];
            let (_, point) = maximize_linear(problem, &zero)?;
            Ok(point)
        }
        Err(e) => Err(e),
    }
}

fn cutting_plane_rhs(
    prob: &RhsRobustProblem,
    opts: &SolveOptions,
) -> Result<(SolveResult, CutPool)> {
    prob.validate()?;
    let t0 = std::time::Instant::now();
    let m = prob.num_robust_rows();
    let mut master = prob.base_lp();
    let mut pool = CutPool::default();
    let u0 = nominal_point(&prob.uncertainty)?;
    for i in 0..m {
        master.add_ge(&prob.robust_row(i), u0[i]);
        pool.push(i, u0.clone());
    }
    // Per-coordinate maxima: the worst case of each row is independent of
    // the decision for this family.
    let mut dbar = vec![0.0; m];
    for (i, d) in dbar.iter_mut().enumerate() {
        let mut e = vec![0.0; prob.uncertainty.dim];
        e[i] = 1.0;
        let (v, _) = maximize_linear(&prob.uncertainty, &e)?;
        *d = v;
    }
    let mut last_violation = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let sol = solve_lp(&master)?;
        match sol.status {
            LpStatus::Infeasible => {
                return Ok((finish_rhs(prob, Method::CuttingPlane, SolveStatus::Infeasible, f64::NAN, Vec::new(), iter, 0.0, t0), pool));
            }
            LpStatus::Unbounded => {
                // Block the improving ray with the strongest available cuts.
                let ray = sol.ray.clone().unwrap_or_default();
                let mut blocked = false;
                for i in 0..m {
                    if dot(&prob.robust_row(i), &ray) < -1e-12 {
                        let mut worst = u0.clone();
                        worst[i] = dbar[i];
                        // Keep the stored realization a set member.
                        if !prob.uncertainty.membership(&worst, 1e-7)? {
                            let mut e = vec![0.0; prob.uncertainty.dim];
                            e[i] = 1.0;
                            let (_, point) = maximize_linear(&prob.uncertainty, &e)?;
                            worst = point;
                        }
                        master.add_ge(&prob.robust_row(i), worst[i]);
                        pool.push(i, worst);
                        blocked = true;
                    }
                }
                if !blocked {
                    return Ok((finish_rhs(prob, Method::CuttingPlane, SolveStatus::Unbounded, f64::NEG_INFINITY, Vec::new(), iter, 0.0, t0), pool));
                }
                continue;
            }
            LpStatus::Optimal => {}
        }
        let point = &sol.primal;
        // phi_i = max_u u_i - a_i.x - g_i.y
        let (mut worst_i, mut worst_v) = (0usize, f64::NEG_INFINITY);
        for i in 0..m {
            let v = dbar[i] - dot(&prob.robust_row(i), point);
            if v > worst_v + 1e-15 {
                worst_v = v;
                worst_i = i;
            }
        }
        last_violation = worst_v;
        if worst_v < opts.tol {
            return Ok((
                finish_rhs(prob, Method::CuttingPlane, SolveStatus::Optimal, sol.objective, sol.primal, iter, worst_v.max(0.0), t0),
                pool,
            ));
        }
        let mut e = vec![0.0; prob.uncertainty.dim];
        e[worst_i] = 1.0;
        let (_, ustar) = maximize_linear(&prob.uncertainty, &e)?;
        master.add_ge(&prob.robust_row(worst_i), ustar[worst_i]);
        pool.push(worst_i, ustar);
    }
    let sol = solve_lp(&master)?;
    Ok((
        finish_rhs(prob, Method::CuttingPlane, SolveStatus::IterationLimit, sol.objective, sol.primal, opts.max_iter, last_violation, t0),
        pool,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish_rhs(
    prob: &RhsRobustProblem,
    method: Method,
    status: SolveStatus,
    objective: f64,
    primal: Vec<f64>,
    iterations: usize,
    max_violation: f64,
    t0: std::time::Instant,
) -> SolveResult {
    let (x, second_stage) = if primal.is_empty() {
        (Vec::new(), SecondStage::None)
    } else {
        (
            primal[..prob.n1].to_vec(),
            SecondStage::StaticY(primal[prob.n1..prob.n1 + prob.n2].to_vec()),
        )
    };
    SolveResult {
        method,
        status,
        objective,
        x,
        second_stage,
        iterations,
        max_violation,
        wall_time_s: t0.elapsed().as_secs_f64(),
        exact: true,
    }
}

fn cutting_plane_coeff(
    prob: &CoeffRobustProblem,
    opts: &SolveOptions,
) -> Result<(SolveResult, CutPool)> {
    prob.validate()?;
    let t0 = std::time::Instant::now();
    let n = prob.n1 + prob.n2;
    let dim = prob.uncertainty.dim;
    let mut master = prob.base_lp();
    let mut pool = CutPool::default();
    let u0 = nominal_point(&prob.uncertainty)?;
    for (i, row) in prob.rows.iter().enumerate() {
        let (off, len) = prob.block_scope(row);
        let (coef, rhs) = row.at_realization(&u0[off..off + len]);
        master.add_ineq(coef, rhs);
        pool.push(i, u0.clone());
    }
    // Worst violation of row i at a decision point: maximize the bilinear
    // term over the coupled set in the direction the point induces.
    let separate = |point: &[f64], i: usize| -> Result<(f64, Vec<f64>)> {
        let row = &prob.rows[i];
        let (off, len) = prob.block_scope(row);
        let dir = row.u_direction(point);
        let mut full = vec![0.0; dim];
        full[off..off + len].copy_from_slice(&dir);
        let (val, ustar) = maximize_linear(&prob.uncertainty, &full)?;
        let viol = dot(&row.lin, point) + val - row.rhs;
        Ok((viol, ustar))
    };
    let mut last_violation = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let sol = solve_lp(&master)?;
        match sol.status {
            LpStatus::Infeasible => {
                return Ok((finish_coeff(prob, SolveStatus::Infeasible, f64::NAN, Vec::new(), iter, 0.0, t0), pool));
            }
            LpStatus::Unbounded => {
                let ray = sol.ray.clone().unwrap_or_default();
                let mut best: Option<(f64, usize, Vec<f64>)> = None;
                for (i, row) in prob.rows.iter().enumerate() {
                    let (off, len) = prob.block_scope(row);
                    // Growth of the row along the ray, maximized over u.
                    let dir: Vec<f64> =
                        row.u_coeff.iter().map(|w| dot(w, &ray)).collect();
                    let mut full = vec![0.0; dim];
                    full[off..off + len].copy_from_slice(&dir);
                    let (val, ustar) = maximize_linear(&prob.uncertainty, &full)?;
                    let growth = dot(&row.lin, &ray) + val;
                    if growth > 1e-9 && best.as_ref().is_none_or(|b| growth > b.0) {
                        best = Some((growth, i, ustar));
                    }
                }
                match best {
                    Some((_, i, ustar)) => {
                        let row = &prob.rows[i];
                        let (off, len) = prob.block_scope(row);
                        let (coef, rhs) = row.at_realization(&ustar[off..off + len]);
                        master.add_ineq(coef, rhs);
                        pool.push(i, ustar);
                        continue;
                    }
                    None => {
                        return Ok((finish_coeff(prob, SolveStatus::Unbounded, f64::INFINITY, Vec::new(), iter, 0.0, t0), pool));
                    }
                }
            }
            LpStatus::Optimal => {}
        }
        let point = &sol.primal[..n];
        let mut worst: Option<(f64, usize, Vec<f64>)> = None;
        for i in 0..prob.rows.len() {
            let (viol, ustar) = separate(point, i)?;
            if worst.as_ref().is_none_or(|w| viol > w.0 + 1e-15) {
                worst = Some((viol, i, ustar));
            }
        }
        let (viol, i, ustar) = worst.expect("at least one robust row");
        last_violation = viol;
        if viol < opts.tol {
            return Ok((
                finish_coeff(prob, SolveStatus::Optimal, sol.objective, sol.primal, iter, viol.max(0.0), t0),
                pool,
            ));
        }
        let row = &prob.rows[i];
        let (off, len) = prob.block_scope(row);
        let (coef, rhs) = row.at_realization(&ustar[off..off + len]);
        master.add_ineq(coef, rhs);
        pool.push(i, ustar);
    }
    let sol = solve_lp(&master)?;
    Ok((
        finish_coeff(prob, SolveStatus::IterationLimit, sol.objective, sol.primal, opts.max_iter, last_violation, t0),
        pool,
    ))
}

fn finish_coeff(
    prob: &CoeffRobustProblem,
    status: SolveStatus,
    objective: f64,
    primal: Vec<f64>,
    iterations: usize,
    max_violation: f64,
    t0: std::time::Instant,
) -> SolveResult {
    let (x, second_stage) = if primal.is_empty() {
        (Vec::new(), SecondStage::None)
    } else {
        (
            primal[..prob.n1].to_vec(),
            SecondStage::StaticY(primal[prob.n1..prob.n1 + prob.n2].to_vec()),
        )
    };
    SolveResult {
        method: Method::CuttingPlane,
        status,
        objective,
        x,
        second_stage,
        iterations,
        max_violation,
        wall_time_s: t0.elapsed().as_secs_f64(),
        exact: true,
    }
}
