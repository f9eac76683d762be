//! Full adaptivity by vertex enumeration and the finite-scenario bound.
//!
//! Both build one LP with an independent recourse vector per uncertainty
//! point and an epigraph variable for the worst-case second-stage objective.
//! With the full vertex list this is exact for the RHS family and for
//! fixed-recourse coefficient problems; with sampled scenarios it is an
//! optimistic bound (lower for minimization, upper for maximization).

use super::{Method, SecondStage, SolveOptions, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, INF, NEG_INF};
use crate::model::{CoeffRobustProblem, RhsRobustProblem, RobustProblem, RowSense};
use crate::sets::hit_and_run_sample;

fn polytope_vertices(problem: &RobustProblem, budget: usize) -> Result<Vec<Vec<f64>>> {
    let spec = problem.uncertainty().without_redundant_balls();
    if spec.has_ball() {
        return Err(Error::NonPolyhedralAtomInRc);
    }
    let verts = spec.to_polyhedron()?.enumerate_vertices()?;
    if verts.len() > budget {
        return Err(Error::VertexBudgetExceeded { count: verts.len(), budget });
    }
    Ok(verts.points)
}

pub fn solve_full_adaptive_vertex(
    problem: &RobustProblem,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let points = polytope_vertices(problem, opts.vertex_budget)?;
    scenario_lp(problem, points, Method::Vertex)
}

pub fn solve_finite_scenarios(
    problem: &RobustProblem,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let points = hit_and_run_sample(
        problem.uncertainty(),
        opts.scenario_count,
        opts.seed,
        opts.boundary,
    )?;
    scenario_lp(problem, points, Method::Scenarios)
}

/// Scenario program over a caller-provided point list.
pub fn solve_finite_scenarios_with(
    problem: &RobustProblem,
    points: Vec<Vec<f64>>,
    method: Method,
) -> Result<SolveResult> {
    scenario_lp(problem, points, method)
}

fn scenario_lp(
    problem: &RobustProblem,
    points: Vec<Vec<f64>>,
    method: Method,
) -> Result<SolveResult> {
    match problem {
        RobustProblem::Rhs(p) => scenario_lp_rhs(p, points, method),
        RobustProblem::Coeff(p) => scenario_lp_coeff(p, points, method),
    }
}

fn scenario_lp_rhs(
    prob: &RhsRobustProblem,
    points: Vec<Vec<f64>>,
    method: Method,
) -> Result<SolveResult> {
    prob.validate()?;
    let t0 = std::time::Instant::now();
    if points.is_empty() {
        return Err(Error::EmptyCoupledSet);
    }
    let k = points.len();
    let (n1, n2) = (prob.n1, prob.n2);
    // Variables: x, tau, y_1..y_k.
    let total = n1 + 1 + k * n2;
    let mut cost = vec![0.0; total];
    cost[..n1].copy_from_slice(&prob.c);
    cost[n1] = 1.0;
    let mut lp = LinearProgram::minimize(cost);
    for j in 0..n1 {
        lp.set_bounds(j, prob.x_bounds.lower[j], prob.x_bounds.upper[j]);
    }
    lp.set_bounds(n1, NEG_INF, INF);
    let y0 = |v: usize| n1 + 1 + v * n2;
    for v in 0..k {
        for j in 0..n2 {
            lp.set_bounds(y0(v) + j, prob.y_bounds.lower[j], prob.y_bounds.upper[j]);
        }
    }
    for (v, u) in points.iter().enumerate() {
        // tau >= d.y_v
        let mut row = vec![0.0; total];
        row[n1] = -1.0;
        for j in 0..n2 {
            row[y0(v) + j] = prob.d[j];
        }
        lp.add_ineq(row, 0.0);
        // a_i.x + g_i.y_v >= u_i
        for i in 0..prob.num_robust_rows() {
            let mut row = vec![0.0; total];
            row[..n1].copy_from_slice(&prob.a_mat[i]);
            for j in 0..n2 {
                row[y0(v) + j] = prob.g_mat[i][j];
            }
            lp.add_ge(&row, u[i]);
        }
        for det in &prob.det {
            if !det.touches_y() && v > 0 {
                continue;
            }
            let mut row = vec![0.0; total];
            row[..n1].copy_from_slice(&det.ax);
            for j in 0..n2 {
                row[y0(v) + j] = det.ay[j];
            }
            match det.sense {
                RowSense::Le => lp.add_ineq(row, det.rhs),
                RowSense::Eq => lp.add_eq(row, det.rhs),
            }
        }
    }
    finish(prob.n1, prob.n2, k, &points, lp, method, method == Method::Vertex, t0)
}

fn scenario_lp_coeff(
    prob: &CoeffRobustProblem,
    points: Vec<Vec<f64>>,
    method: Method,
) -> Result<SolveResult> {
    prob.validate()?;
    let t0 = std::time::Instant::now();
    if points.is_empty() {
        return Err(Error::EmptyCoupledSet);
    }
    let k = points.len();
    let (n1, n2) = (prob.n1, prob.n2);
    let total = n1 + 1 + k * n2;
    let mut cost = vec![0.0; total];
    cost[..n1].copy_from_slice(&prob.c);
    cost[n1] = 1.0;
    let mut lp = LinearProgram::maximize(cost);
    for j in 0..n1 {
        lp.set_bounds(j, prob.x_bounds.lower[j], prob.x_bounds.upper[j]);
    }
    if n2 == 0 {
        lp.set_bounds(n1, 0.0, 0.0);
    } else {
        lp.set_bounds(n1, NEG_INF, INF);
    }
    let y0 = |v: usize| n1 + 1 + v * n2;
    for v in 0..k {
        for j in 0..n2 {
            lp.set_bounds(y0(v) + j, prob.y_bounds.lower[j], prob.y_bounds.upper[j]);
        }
    }
    for (v, u) in points.iter().enumerate() {
        if n2 > 0 {
            // tau <= d.y_v
            let mut row = vec![0.0; total];
            row[n1] = 1.0;
            for j in 0..n2 {
                row[y0(v) + j] = -prob.d[j];
            }
            lp.add_ineq(row, 0.0);
        }
        for crow in &prob.rows {
            let (off, len) = prob.block_scope(crow);
            let (coef, rhs) = crow.at_realization(&u[off..off + len]);
            let mut row = vec![0.0; total];
            row[..n1].copy_from_slice(&coef[..n1]);
            for j in 0..n2 {
                row[y0(v) + j] = coef[n1 + j];
            }
            lp.add_ineq(row, rhs);
        }
        for det in &prob.det {
            if !det.touches_y() && v > 0 {
                continue;
            }
            let mut row = vec![0.0; total];
            row[..n1].copy_from_slice(&det.ax);
            for j in 0..n2 {
                row[y0(v) + j] = det.ay[j];
            }
            match det.sense {
                RowSense::Le => lp.add_ineq(row, det.rhs),
                RowSense::Eq => lp.add_eq(row, det.rhs),
            }
        }
    }
    // Exact when the uncertainty never multiplies the recourse; otherwise an
    // optimistic bound only.
    let exact = method == Method::Vertex && prob.rows.iter().all(|r| r.fixed_recourse(n1));
    finish(prob.n1, prob.n2, k, &points, lp, method, exact, t0)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    n1: usize,
    n2: usize,
    k: usize,
    points: &[Vec<f64>],
    lp: LinearProgram,
    method: Method,
    exact: bool,
    t0: std::time::Instant,
) -> Result<SolveResult> {
    let sol = solve_lp(&lp)?;
    let status = match sol.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
    };
    let (x, second_stage) = if sol.status == LpStatus::Optimal {
        let x = sol.primal[..n1].to_vec();
        let y0 = n1 + 1;
        let recourse: Vec<Vec<f64>> = (0..k)
            .map(|v| sol.primal[y0 + v * n2..y0 + (v + 1) * n2].to_vec())
            .collect();
        let stage = match method {
            Method::Vertex => {
                SecondStage::PerVertex { scenarios: points.to_vec(), recourse }
            }
            _ => SecondStage::PerScenario { scenarios: points.to_vec(), recourse },
        };
        (x, stage)
    } else {
        (Vec::new(), SecondStage::None)
    };
    Ok(SolveResult {
        method,
        status,
        objective: sol.objective,
        x,
        second_stage,
        iterations: 1,
        max_violation: 0.0,
        wall_time_s: t0.elapsed().as_secs_f64(),
        exact,
    })
}
