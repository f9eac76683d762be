//! Benders decomposition for two-stage adaptive RHS problems.
//!
//! Outer level: a master over the first stage with an epigraph variable and
//! optimality cuts. Inner level: the worst-case recourse cost over the
//! coupled set, solved exactly by vertex enumeration when the uncertainty
//! dimension is small enough, and otherwise by alternating maximization
//! (fix `u` -> recourse LP in the duals; fix the duals -> linear in `u`)
//! from many starting points. The recourse carries elastic slacks with a
//! large penalty, so first stages without feasible recourse are priced, not
//! rejected; the master starts from the coupled static solution.

use super::{Method, SecondStage, SolveOptions, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::lp::{solve_lp, LinearProgram, LpStatus, LpSolution, INF, NEG_INF};
use crate::model::{build_rc_projection, RhsRobustProblem, RowSense};
use crate::sets::{hit_and_run_sample, maximize_linear};

const ELASTIC_PENALTY: f64 = 1e7;

struct Recourse<'a> {
    prob: &'a RhsRobustProblem,
    /// Deterministic rows that involve the second stage.
    det_y: Vec<usize>,
}

/// Value and cut data of the recourse at a fixed `(x, u)`.
struct Evaluation {
    value: f64,
    /// Constant + gradient so that `tau >= constant + grad . x` is valid.
    constant: f64,
    grad: Vec<f64>,
    /// Objective weight of each `u_i` for the dual-fixed step.
    u_weights: Vec<f64>,
    y: Vec<f64>,
}

impl<'a> Recourse<'a> {
    fn new(prob: &'a RhsRobustProblem) -> Self {
        let det_y = prob
            .det
            .iter()
            .enumerate()
            .filter(|(_, r)| r.touches_y())
            .map(|(k, _)| k)
            .collect();
        Recourse { prob, det_y }
    }

    fn build_lp(&self, x: &[f64], u: &[f64], elastic: bool) -> LinearProgram {
        let p = self.prob;
        let m = p.num_robust_rows();
        let k = self.det_y.len();
        let extra = if elastic { m + k } else { 0 };
        let n = p.n2 + extra; // y (+ sigma_robust, sigma_det when elastic)
        let mut cost = vec![0.0; n];
        cost[..p.n2].copy_from_slice(&p.d);
        for c in cost.iter_mut().skip(p.n2) {
            *c = ELASTIC_PENALTY;
        }
        let mut lp = LinearProgram::minimize(cost);
        for j in 0..p.n2 {
            lp.set_bounds(j, p.y_bounds.lower[j], p.y_bounds.upper[j]);
        }
        for j in p.n2..n {
            lp.set_bounds(j, 0.0, INF);
        }
        // -g_i.y (- sigma_i) <= a_i.x - u_i
        for i in 0..m {
            let mut row = vec![0.0; n];
            for j in 0..p.n2 {
                row[j] = -p.g_mat[i][j];
            }
            if elastic {
                row[p.n2 + i] = -1.0;
            }
            lp.add_ineq(row, dot(&p.a_mat[i], x) - u[i]);
        }
        // ay.y (- sigma) <= rhs - ax.x   (and the reverse for equalities)
        for (slot, &det_idx) in self.det_y.iter().enumerate() {
            let det = &p.det[det_idx];
            let mut row = vec![0.0; n];
            row[..p.n2].copy_from_slice(&det.ay);
            if elastic {
                row[p.n2 + m + slot] = -1.0;
            }
            let rhs = det.rhs - dot(&det.ax, x);
            match det.sense {
                RowSense::Le => lp.add_ineq(row, rhs),
                RowSense::Eq => {
                    lp.add_ineq(row.clone(), rhs);
                    let mut neg: Vec<f64> = row.iter().map(|v| -v).collect();
                    if elastic {
                        neg[p.n2 + m + slot] = -1.0;
                    }
                    lp.add_ineq(neg, -rhs);
                }
            }
        }
        lp
    }

    /// `min d.y` over the recourse rows at fixed `(x, u)`. A plain solve
    /// gives tight duals; when the first stage admits no recourse, the
    /// elastic relaxation prices the violation instead, which acts as a
    /// feasibility cut in the master.
    fn evaluate(&self, x: &[f64], u: &[f64]) -> Result<Evaluation> {
        let plain = self.build_lp(x, u, false);
        let sol = solve_lp(&plain)?;
        if sol.status == LpStatus::Optimal {
            return self.cut_from(&plain, &sol, x, u);
        }
        let elastic = self.build_lp(x, u, true);
        let sol = solve_lp(&elastic)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::InnerStagnation);
        }
        self.cut_from(&elastic, &sol, x, u)
    }

    /// Builds the affine minorant of `Q(., u)` at `(x, u)` from the duals.
    /// The rhs of robust row `i` is `a_i.x - u_i` and of det row `k` is
    /// `rhs_k - ax_k.x`; the dual objective is linear in those, so fixing
    /// the multipliers gives a bound valid for every `x`.
    fn cut_from(
        &self,
        lp: &LinearProgram,
        sol: &LpSolution,
        x: &[f64],
        u: &[f64],
    ) -> Result<Evaluation> {
        let p = self.prob;
        let m = p.num_robust_rows();
        let value = sol.objective;
        let dual_obj = sol.dual_objective(lp);
        let mut grad = vec![0.0; p.n1];
        let mut u_weights = vec![0.0; m];
        // dual objective contains -sum lambda_r rhs_r
        for i in 0..m {
            let lam = sol.dual_ineq[i];
            if lam == 0.0 {
                continue;
            }
            for j in 0..p.n1 {
                grad[j] -= lam * p.a_mat[i][j];
            }
            u_weights[i] = lam;
        }
        let mut row_idx = m;
        for &det_idx in &self.det_y {
            let det = &p.det[det_idx];
            match det.sense {
                RowSense::Le => {
                    let lam = sol.dual_ineq[row_idx];
                    row_idx += 1;
                    for j in 0..p.n1 {
                        grad[j] += lam * det.ax[j];
                    }
                }
                RowSense::Eq => {
                    let lam = sol.dual_ineq[row_idx] - sol.dual_ineq[row_idx + 1];
                    row_idx += 2;
                    for j in 0..p.n1 {
                        grad[j] += lam * det.ax[j];
                    }
                }
            }
        }
        let constant = dual_obj - dot(&grad, x);
        let _ = u;
        Ok(Evaluation { value, constant, grad, u_weights, y: sol.primal[..p.n2].to_vec() })
    }
}

/// Worst-case recourse over the coupled set: exact over the vertex list, or
/// alternating maximization from multiple starts.
struct Inner {
    vertices: Option<Vec<Vec<f64>>>,
    starts: Vec<Vec<f64>>,
}

impl Inner {
    fn prepare(prob: &RhsRobustProblem, opts: &SolveOptions) -> Result<Inner> {
        let spec = prob.uncertainty.without_redundant_balls();
        let vertices = if !spec.has_ball() && spec.dim <= opts.inner_vertex_cap {
            match spec.to_polyhedron()?.enumerate_vertices() {
                Ok(v) if v.len() <= opts.vertex_budget => Some(v.points),
                _ => None,
            }
        } else {
            None
        };
        let starts = if vertices.is_none() {
            let mut pts =
                hit_and_run_sample(&prob.uncertainty, opts.starts.max(1), opts.seed ^ 0xB5, true)?;
            if let Ok(more) =
                hit_and_run_sample(&prob.uncertainty, opts.starts.max(1), opts.seed ^ 0x5B, false)
            {
                pts.extend(more);
            }
            pts
        } else {
            Vec::new()
        };
        Ok(Inner { vertices, starts })
    }

    fn exact(&self) -> bool {
        self.vertices.is_some()
    }

    /// Returns the worst realization found, its evaluation, and whether the
    /// search was exhaustive.
    fn worst(
        &self,
        rec: &Recourse,
        prob: &RhsRobustProblem,
        x: &[f64],
        incumbent: Option<&[f64]>,
    ) -> Result<(Vec<f64>, Evaluation)> {
        let mut best: Option<(Vec<f64>, Evaluation)> = None;
        let consider = |u: Vec<f64>, ev: Evaluation, best: &mut Option<(Vec<f64>, Evaluation)>| {
            if best.as_ref().is_none_or(|(_, b)| ev.value > b.value + 1e-12) {
                *best = Some((u, ev));
            }
        };
        if let Some(verts) = &self.vertices {
            for v in verts {
                let ev = rec.evaluate(x, v)?;
                consider(v.clone(), ev, &mut best);
            }
            return best.ok_or(Error::InnerStagnation);
        }
        let mut seeds: Vec<Vec<f64>> = self.starts.clone();
        if let Some(u) = incumbent {
            seeds.push(u.to_vec());
        }
        for seed in seeds {
            let mut u = seed;
            let mut last = f64::NEG_INFINITY;
            for _ in 0..60 {
                let ev = rec.evaluate(x, &u)?;
                if ev.value <= last + 1e-9 * (1.0 + last.abs()) {
                    consider(u.clone(), ev, &mut best);
                    break;
                }
                last = ev.value;
                // Dual-fixed step: the value is linear in u with these
                // weights; move to its maximizer over the coupled set.
                let (_, unew) = maximize_linear(&prob.uncertainty, &ev.u_weights)?;
                consider(u.clone(), ev, &mut best);
                if crate::linalg::sub(&unew, &u).iter().all(|d| d.abs() < 1e-10) {
                    break;
                }
                u = unew;
            }
        }
        best.ok_or(Error::InnerStagnation)
    }
}

pub fn solve_benders(prob: &RhsRobustProblem, opts: &SolveOptions) -> Result<SolveResult> {
    prob.validate()?;
    let t0 = std::time::Instant::now();
    let rec = Recourse::new(prob);
    let inner = Inner::prepare(prob, opts)?;

    // Master over (x, tau) with the x-only deterministic rows.
    let mut master = LinearProgram::minimize({
        let mut c = prob.c.clone();
        c.push(1.0);
        c
    });
    for j in 0..prob.n1 {
        master.set_bounds(j, prob.x_bounds.lower[j], prob.x_bounds.upper[j]);
    }
    master.set_bounds(prob.n1, NEG_INF, INF);
    for det in &prob.det {
        if det.touches_y() {
            continue;
        }
        let mut row = det.ax.clone();
        row.push(0.0);
        match det.sense {
            RowSense::Le => master.add_ineq(row, det.rhs),
            RowSense::Eq => master.add_eq(row, det.rhs),
        }
    }

    // Initialize from the coupled static solution.
    let static_lp = build_rc_projection(&RhsRobustProblem { adaptive: false, ..prob.clone() })?;
    let static_sol = solve_lp(&static_lp)?;
    if static_sol.status == LpStatus::Infeasible {
        return Ok(SolveResult {
            method: Method::Benders,
            status: SolveStatus::Infeasible,
            objective: f64::NAN,
            x: Vec::new(),
            second_stage: SecondStage::None,
            iterations: 0,
            max_violation: 0.0,
            wall_time_s: t0.elapsed().as_secs_f64(),
            exact: inner.exact(),
        });
    }
    let mut x = static_sol.primal[..prob.n1].to_vec();
    let mut incumbent_u: Option<Vec<f64>> = None;
    let mut best_ub = INF;
    let mut best_x = x.clone();
    let mut lb = NEG_INF;
    let mut iterations = 0;

    for iter in 1..=opts.max_iter {
        iterations = iter;
        let (worst_u, ev) = inner.worst(&rec, prob, &x, incumbent_u.as_deref())?;
        let ub = dot(&prob.c, &x) + ev.value;
        if ub < best_ub {
            best_ub = ub;
            best_x = x.clone();
        }
        incumbent_u = Some(worst_u);
        let gap_tol = opts.tol * (1.0 + best_ub.abs());
        if best_ub - lb <= gap_tol && iter > 1 {
            break;
        }
        // tau >= constant + grad.x  <=>  grad.x - tau <= -constant
        let mut row = ev.grad.clone();
        row.push(-1.0);
        master.add_ineq(row, -ev.constant);
        let sol = solve_lp(&master)?;
        match sol.status {
            LpStatus::Optimal => {
                lb = sol.objective;
                x = sol.primal[..prob.n1].to_vec();
            }
            LpStatus::Unbounded => {
                // Needs more cuts; keep the incumbent first stage.
                continue;
            }
            LpStatus::Infeasible => {
                return Ok(SolveResult {
                    method: Method::Benders,
                    status: SolveStatus::Infeasible,
                    objective: f64::NAN,
                    x: Vec::new(),
                    second_stage: SecondStage::None,
                    iterations: iter,
                    max_violation: 0.0,
                    wall_time_s: t0.elapsed().as_secs_f64(),
                    exact: inner.exact(),
                });
            }
        }
    }

    let converged = best_ub - lb <= opts.tol * (1.0 + best_ub.abs());
    // Recourse table at the reported first stage.
    let second_stage = match &inner.vertices {
        Some(verts) => {
            let mut recourse = Vec::with_capacity(verts.len());
            for v in verts {
                recourse.push(rec.evaluate(&best_x, v)?.y);
            }
            SecondStage::PerVertex { scenarios: verts.clone(), recourse }
        }
        None => SecondStage::None,
    };
    Ok(SolveResult {
        method: Method::Benders,
        status: if converged { SolveStatus::Optimal } else { SolveStatus::IterationLimit },
        objective: best_ub,
        x: best_x,
        second_stage,
        iterations,
        max_violation: (best_ub - lb).max(0.0),
        wall_time_s: t0.elapsed().as_secs_f64(),
        exact: inner.exact(),
    })
}
