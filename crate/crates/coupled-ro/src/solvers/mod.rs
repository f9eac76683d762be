//! Solution methods for static and adaptive robust problems: direct
//! projection, robust counterparts, cutting planes, linear decision rules,
//! Benders decomposition, finite scenarios, and full adaptivity by vertex
//! enumeration.

mod benders;
mod closed_form;
mod cutting_plane;
mod enumeration;
mod statics;

pub use benders::solve_benders;
pub use closed_form::{verify_closed_form_instances, ClosedFormEntry, ClosedFormReport};
pub use cutting_plane::{solve_cutting_plane, solve_cutting_plane_with_pool, CutPool};
pub use enumeration::{solve_finite_scenarios, solve_finite_scenarios_with, solve_full_adaptive_vertex};
pub use statics::{build_rc_static_rhs, solve_at_realization, solve_static};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::model::{AffineDecisionRule, CoeffRobustProblem, RhsRobustProblem, RobustProblem};
use crate::sets::hit_and_run_sample;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Projection,
    Rc,
    CuttingPlane,
    Ldr,
    Benders,
    Scenarios,
    Vertex,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        Ok(match s {
            "projection" => Method::Projection,
            "rc" => Method::Rc,
            "cutting-plane" => Method::CuttingPlane,
            "ldr" => Method::Ldr,
            "benders" => Method::Benders,
            "scenarios" => Method::Scenarios,
            "vertex" => Method::Vertex,
            other => return Err(Error::Parse(format!("unknown method '{other}'"))),
        })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Projection => "projection",
            Method::Rc => "rc",
            Method::CuttingPlane => "cutting-plane",
            Method::Ldr => "ldr",
            Method::Benders => "benders",
            Method::Scenarios => "scenarios",
            Method::Vertex => "vertex",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit hit; the incumbent is reported.
    IterationLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SecondStage {
    None,
    StaticY(Vec<f64>),
    Affine(AffineDecisionRule),
    PerVertex { scenarios: Vec<Vec<f64>>, recourse: Vec<Vec<f64>> },
    PerScenario { scenarios: Vec<Vec<f64>>, recourse: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub method: Method,
    pub status: SolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub second_stage: SecondStage,
    pub iterations: usize,
    /// Violation measure at the solver's exit (0 for one-shot LPs).
    pub max_violation: f64,
    pub wall_time_s: f64,
    /// False when an inexact inner loop makes the value a bound only.
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Random starting points for the inexact inner maximization.
    pub starts: usize,
    pub seed: u64,
    pub scenario_count: usize,
    /// Rescale sampled scenarios to the set boundary.
    pub boundary: bool,
    pub vertex_budget: usize,
    /// Benders solves its inner problem exactly by vertex enumeration up to
    /// this uncertainty dimension.
    pub inner_vertex_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-3,
            max_iter: 1000,
            starts: 100,
            seed: 0,
            scenario_count: 200,
            boundary: true,
            vertex_budget: 4096,
            inner_vertex_cap: 10,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

/// Runs a method on a problem, enforcing the family/method compatibility
/// rules.
pub fn solve(problem: &RobustProblem, method: Method, opts: &SolveOptions) -> Result<SolveResult> {
    problem.validate()?;
    let unsupported = |reason: &str| {
        Err(Error::UnsupportedMethod { method: method.to_string(), reason: reason.into() })
    };
    match method {
        Method::Projection | Method::Rc | Method::CuttingPlane => {
            if problem.is_adaptive() {
                return unsupported("static methods need a static problem");
            }
            match method {
                Method::CuttingPlane => solve_cutting_plane(problem, opts),
                _ => solve_static(problem, method, opts),
            }
        }
        Method::Ldr => match problem {
            RobustProblem::Rhs(p) if p.adaptive => {
                let (lp, layout) = crate::model::build_rc_ldr_rhs(p)?;
                lp_result(&lp, Method::Ldr, |sol| {
                    let (x, rule) = layout.extract(&sol.primal);
                    (x, SecondStage::Affine(rule))
                })
            }
            RobustProblem::Coeff(p) if p.adaptive => {
                let (lp, layout) = crate::model::build_rc_ldr_coeff(p)?;
                lp_result(&lp, Method::Ldr, |sol| {
                    let (x, rule) = layout.extract(&sol.primal);
                    (x, SecondStage::Affine(rule))
                })
            }
            _ => unsupported("linear decision rules need an adaptive problem"),
        },
        Method::Benders => match problem {
            RobustProblem::Rhs(p) if p.adaptive => solve_benders(p, opts),
            _ => unsupported("this implementation runs Benders on adaptive RHS problems"),
        },
        Method::Scenarios => {
            if !problem.is_adaptive() {
                return unsupported("finite scenarios need an adaptive problem");
            }
            solve_finite_scenarios(problem, opts)
        }
        Method::Vertex => {
            if !problem.is_adaptive() {
                return unsupported("full adaptivity needs an adaptive problem");
            }
            solve_full_adaptive_vertex(problem, opts)
        }
    }
}

pub(crate) fn lp_result(
    lp: &LinearProgram,
    method: Method,
    extract: impl FnOnce(&crate::lp::LpSolution) -> (Vec<f64>, SecondStage),
) -> Result<SolveResult> {
    let t0 = std::time::Instant::now();
    let sol = solve_lp(lp)?;
    let status = match sol.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
    };
    let (x, second_stage) = if sol.status == LpStatus::Optimal {
        extract(&sol)
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
        exact: true,
    })
}

/// Worst constraint violation of a returned solution over sampled members of
/// the coupled set. Table policies are audited by solving the per-sample
/// recourse feasibility problem for the fixed first stage.
pub fn audit_feasibility(
    problem: &RobustProblem,
    result: &SolveResult,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if result.status != SolveStatus::Optimal && result.status != SolveStatus::IterationLimit {
        return Ok(0.0);
    }
    let spec = problem.uncertainty();
    let points = match hit_and_run_sample(spec, samples, seed, false) {
        Ok(p) => p,
        // Degenerate sets (empty interior) fall back to vertex auditing.
        Err(Error::EmptyInterior) => match spec.to_polyhedron() {
            Ok(poly) => poly.enumerate_vertices()?.points,
            Err(_) => return Ok(0.0),
        },
        Err(e) => return Err(e),
    };
    let mut worst: f64 = 0.0;
    match problem {
        RobustProblem::Rhs(p) => {
            for u in &points {
                worst = worst.max(rhs_violation_at(p, result, u)?);
            }
        }
        RobustProblem::Coeff(p) => {
            for u in &points {
                worst = worst.max(coeff_violation_at(p, result, u)?);
            }
        }
    }
    Ok(worst)
}

fn rhs_violation_at(p: &RhsRobustProblem, result: &SolveResult, u: &[f64]) -> Result<f64> {
    let x = &result.x;
    let eval_fixed = |y: &[f64]| -> f64 {
        let mut v: f64 = 0.0;
        for i in 0..p.num_robust_rows() {
            v = v.max(u[i] - dot(&p.a_mat[i], x) - dot(&p.g_mat[i], y));
        }
        for row in &p.det {
            let lhs = dot(&row.ax, x) + dot(&row.ay, y);
            match row.sense {
                crate::model::RowSense::Le => v = v.max(lhs - row.rhs),
                crate::model::RowSense::Eq => v = v.max((lhs - row.rhs).abs()),
            }
        }
        for j in 0..p.n2 {
            v = v.max(p.y_bounds.lower[j] - y[j]);
            v = v.max(y[j] - p.y_bounds.upper[j]);
        }
        v
    };
    match &result.second_stage {
        SecondStage::StaticY(y) => Ok(eval_fixed(y)),
        SecondStage::Affine(rule) => Ok(eval_fixed(&rule.evaluate(u))),
        SecondStage::PerVertex { .. } | SecondStage::PerScenario { .. } => {
            // Feasibility of the first stage: does any recourse work at u?
            let mut lp = LinearProgram::minimize(vec![0.0; p.n2]);
            for j in 0..p.n2 {
                lp.set_bounds(j, p.y_bounds.lower[j], p.y_bounds.upper[j]);
            }
            for i in 0..p.num_robust_rows() {
                lp.add_ge(&p.g_mat[i], u[i] - dot(&p.a_mat[i], x));
            }
            for row in &p.det {
                let rhs = row.rhs - dot(&row.ax, x);
                match row.sense {
                    crate::model::RowSense::Le => lp.add_ineq(row.ay.clone(), rhs),
                    crate::model::RowSense::Eq => lp.add_eq(row.ay.clone(), rhs),
                }
            }
            // Elastic relaxation measures the violation depth.
            let viol = min_total_violation(&lp)?;
            Ok(viol)
        }
        SecondStage::None => Ok(0.0),
    }
}

fn coeff_violation_at(p: &CoeffRobustProblem, result: &SolveResult, u: &[f64]) -> Result<f64> {
    let x = &result.x;
    let eval_fixed = |y: &[f64]| -> f64 {
        let mut point = x.clone();
        point.extend_from_slice(y);
        let mut v: f64 = 0.0;
        for row in &p.rows {
            let (off, len) = p.block_scope(row);
            let (coef, rhs) = row.at_realization(&u[off..off + len]);
            v = v.max(dot(&coef, &point) - rhs);
        }
        for row in &p.det {
            let lhs = dot(&row.ax, x) + dot(&row.ay, y);
            match row.sense {
                crate::model::RowSense::Le => v = v.max(lhs - row.rhs),
                crate::model::RowSense::Eq => v = v.max((lhs - row.rhs).abs()),
            }
        }
        v
    };
    match &result.second_stage {
        SecondStage::None | SecondStage::StaticY(_) => {
            let y = match &result.second_stage {
                SecondStage::StaticY(y) => y.clone(),
                _ => vec![0.0; p.n2],
            };
            Ok(eval_fixed(&y))
        }
        SecondStage::Affine(rule) => Ok(eval_fixed(&rule.evaluate(u))),
        SecondStage::PerVertex { .. } | SecondStage::PerScenario { .. } => {
            let mut lp = LinearProgram::minimize(vec![0.0; p.n2]);
            for j in 0..p.n2 {
                lp.set_bounds(j, p.y_bounds.lower[j], p.y_bounds.upper[j]);
            }
            for row in &p.rows {
                let (off, len) = p.block_scope(row);
                let (coef, rhs) = row.at_realization(&u[off..off + len]);
                lp.add_ineq(coef[p.n1..].to_vec(), rhs - dot(&coef[..p.n1], x));
            }
            for row in &p.det {
                let rhs = row.rhs - dot(&row.ax, x);
                match row.sense {
                    crate::model::RowSense::Le => lp.add_ineq(row.ay.clone(), rhs),
                    crate::model::RowSense::Eq => lp.add_eq(row.ay.clone(), rhs),
                }
            }
            min_total_violation(&lp)
        }
    }
}

/// Minimum max-violation relaxation of an LP's rows (bounds stay hard).
fn min_total_violation(lp: &LinearProgram) -> Result<f64> {
    let n = lp.num_vars();
    let mut relaxed = LinearProgram::minimize({
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        c
    });
    relaxed.lower[..n].copy_from_slice(&lp.lower);
    relaxed.upper[..n].copy_from_slice(&lp.upper);
    relaxed.set_bounds(n, 0.0, crate::lp::INF);
    for i in 0..lp.ineq.rows {
        let mut row = lp.ineq.row(i).to_vec();
        row.push(-1.0);
        relaxed.add_ineq(row, lp.ineq_rhs[i]);
    }
    for i in 0..lp.eq.rows {
        let mut row = lp.eq.row(i).to_vec();
        row.push(-1.0);
        relaxed.add_ineq(row, lp.eq_rhs[i]);
        let mut neg: Vec<f64> = lp.eq.row(i).iter().map(|v| -v).collect();
        neg.push(-1.0);
        relaxed.add_ineq(neg, -lp.eq_rhs[i]);
    }
    let sol = solve_lp(&relaxed)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective.max(0.0)),
        _ => Ok(f64::INFINITY),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{Bounds, RobustProblem};
    use crate::sets::{SetAtom, UncertaintySpec};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn paper_intro(adaptive: bool, set: crate::sets::UncertaintySpec) -> RobustProblem {
        RobustProblem::Rhs(intro_network(
            [100.0, 100.0],
            [200.0, 200.0, 200.0],
            1.0,
            set,
            adaptive,
        ))
    }

    fn unit_intro(adaptive: bool, s12: f64, set: crate::sets::UncertaintySpec) -> RobustProblem {
        RobustProblem::Rhs(intro_network([1.0, 1.0], [1.0, 1.0, s12], 1.0, set, adaptive))
    }

    #[test]
    fn cutting_plane_scenario_b_matches_rc() {
        let prob = paper_intro(false, scenario_b_set(0.5, 0.75));
        let opts = SolveOptions::with_tol(1e-9);
        let cp = solve_cutting_plane(&prob, &opts).unwrap();
        assert_eq!(cp.status, SolveStatus::Optimal);
        assert!((cp.objective - 450.0).abs() < 1e-6, "cp {}", cp.objective);
        let rc = solve(&prob, Method::Rc, &opts).unwrap();
        assert!((rc.objective - 450.0).abs() < 1e-6, "rc {}", rc.objective);
        let proj = solve(&prob, Method::Projection, &opts).unwrap();
        assert!((proj.objective - 450.0).abs() < 1e-6);
    }

    #[test]
    fn cutting_plane_stops_first_round_when_nominal_covers() {
        // The deterministic floor already dominates the whole uncertainty
        // range, so the first violation check passes.
        let set = UncertaintySpec::unit_box_scalar(1);
        let prob = RobustProblem::Rhs(crate::model::RhsRobustProblem {
            n1: 1,
            n2: 0,
            c: vec![1.0],
            d: vec![],
            a_mat: vec![vec![1.0]],
            g_mat: vec![vec![]],
            det: vec![],
            x_bounds: Bounds { lower: vec![2.0], upper: vec![crate::lp::INF] },
            y_bounds: Bounds::free(0),
            uncertainty: set,
            adaptive: false,
        });
        let res = solve_cutting_plane(&prob, &SolveOptions::default()).unwrap();
        assert_eq!(res.iterations, 1);
        assert!((res.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn cutting_plane_thm5_instance_both_sets() {
        let opts = SolveOptions::with_tol(1e-10);
        // Uncoupled: the l2 block is separated by the closed-form oracle.
        let coupled = l1_l2_static(vec![0.0, 0.0, 1.0, 1.0]);
        let uncoupled = RobustProblem::Coeff(coupled.uncoupled());
        let z_ro = solve_cutting_plane(&uncoupled, &opts).unwrap();
        assert!(
            (z_ro.objective - 2.0f64.sqrt()).abs() < 1e-6,
            "z_ro {} vs sqrt(2)",
            z_ro.objective
        );
        let z_cp = solve_cutting_plane(&RobustProblem::Coeff(coupled), &opts).unwrap();
        assert!((z_cp.objective - 2.0).abs() < 1e-6, "z_cp {}", z_cp.objective);
        // Second cost vector: 2 -> 2.
        let coupled = l1_l2_static(vec![1.0, 1.0, 0.0, 0.0]);
        let z_ro = solve_cutting_plane(&RobustProblem::Coeff(coupled.uncoupled()), &opts).unwrap();
        assert!((z_ro.objective - 2.0).abs() < 1e-6);
        let z_cp = solve_cutting_plane(&RobustProblem::Coeff(coupled), &opts).unwrap();
        assert!((z_cp.objective - 2.0).abs() < 1e-6);
    }

    #[test]
    fn cut_pool_members_and_monotone_master() {
        let prob = paper_intro(false, scenario_a_set(1.5));
        let (res, pool) =
            solve_cutting_plane_with_pool(&prob, &SolveOptions::with_tol(1e-9)).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        for u in &pool.realizations {
            assert!(prob.uncertainty().membership(u, 1e-6).unwrap());
        }
        assert_eq!(pool.realizations.len(), pool.source_rows.len());
    }

    fn random_coeff_instance(rng: &mut ChaCha8Rng, m: usize) -> crate::model::CoeffRobustProblem {
        // Scalar blocks, box plus a budget coupling; nonnegative row maps so
        // the instances stay bounded.
        let u = UncertaintySpec::scalar_blocks(
            m,
            (0..m)
                .map(|_| {
                    vec![SetAtom::Box {
                        lower: vec![rng.gen_range(0.1..0.5)],
                        upper: vec![rng.gen_range(1.0..2.0)],
                    }]
                })
                .collect(),
        );
        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
        let limit = rng.gen_range(1.0..(m as f64));
        let ubar = u
            .intersect(vec![SetAtom::Budget { weights: w, limit }])
            .unwrap_or(u);
        let c: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..2.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..3.0)).collect();
        crate::model::CoeffRobustProblem::canonical_static(
            c,
            (0..m).map(|i| vec![i]).collect(),
            b,
            ubar,
            Bounds::nonneg(m),
        )
        .unwrap()
    }

    #[test]
    fn cutting_plane_equals_rc_on_random_coeff_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..25 {
            let m = rng.gen_range(2..=5usize);
            let prob = RobustProblem::Coeff(random_coeff_instance(&mut rng, m));
            let opts = SolveOptions::with_tol(1e-9);
            let cp = solve_cutting_plane(&prob, &opts).unwrap();
            let rc = solve(&prob, Method::Rc, &opts).unwrap();
            assert!(
                (cp.objective - rc.objective).abs() <= 1e-6 * (1.0 + rc.objective.abs()),
                "trial {trial}: cp {} vs rc {}",
                cp.objective,
                rc.objective
            );
        }
    }

    #[test]
    fn vertex_full_scenario_a_unit_costs() {
        let prob = unit_intro(true, 1.0, scenario_a_set(1.5));
        let res = solve_full_adaptive_vertex(&prob, &SolveOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective - 3.0).abs() < 1e-7, "z_acp {}", res.objective);
        assert!(res.exact);
    }

    #[test]
    fn vertex_full_scenario_a_expensive_cross_route() {
        // s12 = 100 disables the flexible route. First stage is forced to
        // x = (1, 1) and the worst second stage is max(u1 + u2) = 3/2 with
        // the direct policy (u1, u2, 0), so the optimum is exactly 3.5;
        // every adaptive method must agree.
        let prob = unit_intro(true, 100.0, scenario_a_set(1.5));
        let opts = SolveOptions::with_tol(1e-9);
        let vertex = solve_full_adaptive_vertex(&prob, &opts).unwrap();
        assert!((vertex.objective - 3.5).abs() < 1e-7, "vertex {}", vertex.objective);
        let benders = solve_benders(
            match &prob {
                RobustProblem::Rhs(p) => p,
                _ => unreachable!(),
            },
            &opts,
        )
        .unwrap();
        assert!((benders.objective - 3.5).abs() < 1e-6, "benders {}", benders.objective);
        let ldr = solve(&prob, Method::Ldr, &opts).unwrap();
        assert!(ldr.objective >= vertex.objective - 1e-7);
        assert!((ldr.objective - 3.5).abs() < 1e-6, "ldr {}", ldr.objective);
    }

    #[test]
    fn vertex_full_singleton_is_nominal() {
        let set = UncertaintySpec::scalar_blocks(
            2,
            vec![
                vec![SetAtom::Box { lower: vec![0.6], upper: vec![0.6] }],
                vec![SetAtom::Box { lower: vec![0.7], upper: vec![0.7] }],
            ],
        );
        let prob = unit_intro(true, 1.0, set);
        let res = solve_full_adaptive_vertex(&prob, &SolveOptions::default()).unwrap();
        let nominal = solve_at_realization(
            match &prob {
                RobustProblem::Rhs(p) => p,
                _ => unreachable!(),
            },
            &[0.6, 0.7],
        )
        .unwrap();
        assert!((res.objective - nominal.0).abs() < 1e-7);
    }

    #[test]
    fn scenarios_with_vertex_list_match_vertex_solver() {
        let prob = unit_intro(true, 1.0, scenario_a_set(1.5));
        let verts = prob
            .uncertainty()
            .to_polyhedron()
            .unwrap()
            .enumerate_vertices()
            .unwrap()
            .points;
        let a = solve_finite_scenarios_with(&prob, verts, Method::Scenarios).unwrap();
        let b = solve_full_adaptive_vertex(&prob, &SolveOptions::default()).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-9);
    }

    #[test]
    fn one_nominal_scenario_gives_nominal_value() {
        let prob = unit_intro(true, 1.0, scenario_a_set(1.5));
        let u0 = vec![0.25, 0.25];
        let res = solve_finite_scenarios_with(&prob, vec![u0.clone()], Method::Scenarios).unwrap();
        let nominal = solve_at_realization(
            match &prob {
                RobustProblem::Rhs(p) => p,
                _ => unreachable!(),
            },
            &u0,
        )
        .unwrap();
        assert!((res.objective - nominal.0).abs() < 1e-8);
    }

    #[test]
    fn sampled_scenarios_lower_bound_vertex_value() {
        let prob = unit_intro(true, 1.0, scenario_a_set(1.5));
        let opts = SolveOptions { scenario_count: 60, seed: 5, ..Default::default() };
        let sc = solve_finite_scenarios(&prob, &opts).unwrap();
        let vx = solve_full_adaptive_vertex(&prob, &opts).unwrap();
        assert!(sc.objective <= vx.objective + 1e-9);
        assert!(!sc.exact);
    }

    #[test]
    fn benders_scenario_a_unit_costs_reaches_three() {
        let prob = unit_intro(true, 1.0, scenario_a_set(1.5));
        let p = match &prob {
            RobustProblem::Rhs(p) => p,
            _ => unreachable!(),
        };
        let res = solve_benders(p, &SolveOptions::with_tol(1e-8)).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!(res.exact, "small polytope should use the exact inner");
        assert!((res.objective - 3.0).abs() < 1e-6, "benders {}", res.objective);
    }

    #[test]
    fn benders_uncoupled_box_equals_static_rc() {
        // Constraint-wise compact sets: static solutions are fully adaptive.
        let prob = unit_intro(true, 1.0, UncertaintySpec::unit_box_scalar(2));
        let p = match &prob {
            RobustProblem::Rhs(p) => p,
            _ => unreachable!(),
        };
        let benders = solve_benders(p, &SolveOptions::with_tol(1e-8)).unwrap();
        let static_prob = paper_static(p);
        let rc = solve(&static_prob, Method::Projection, &SolveOptions::default()).unwrap();
        assert!(
            (benders.objective - rc.objective).abs() < 1e-6,
            "benders {} vs static {}",
            benders.objective,
            rc.objective
        );
    }

    fn paper_static(p: &crate::model::RhsRobustProblem) -> RobustProblem {
        RobustProblem::Rhs(crate::model::RhsRobustProblem { adaptive: false, ..p.clone() })
    }

    #[test]
    fn benders_matches_vertex_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..8 {
            let m = rng.gen_range(2..=3usize);
            let set = UncertaintySpec::unit_box_scalar(m)
                .intersect(vec![SetAtom::Budget {
                    weights: vec![1.0; m],
                    limit: rng.gen_range(0.8..(m as f64) * 0.9),
                }])
                .unwrap();
            // Random transportation-like instance.
            let n2 = m;
            let c: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
            let d: Vec<f64> = (0..n2).map(|_| rng.gen_range(0.5..2.0)).collect();
            let a_mat = vec![vec![0.0; m]; m];
            let mut g_mat = vec![vec![0.0; n2]; m];
            for (i, row) in g_mat.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            let det = (0..m)
                .map(|i| {
                    let mut ax = vec![0.0; m];
                    ax[i] = -1.0;
                    let mut ay = vec![0.0; n2];
                    ay[i] = 1.0;
                    crate::model::DetRow::le(ax, ay, 0.0)
                })
                .collect();
            let prob = crate::model::RhsRobustProblem {
                n1: m,
                n2,
                c,
                d,
                a_mat,
                g_mat,
                det,
                x_bounds: Bounds::boxed(m, 0.0, 2.0),
                y_bounds: Bounds::boxed(n2, 0.0, 2.0),
                uncertainty: set,
                adaptive: true,
            };
            let opts = SolveOptions::with_tol(1e-7);
            let benders = solve_benders(&prob, &opts).unwrap();
            let vertex =
                solve_full_adaptive_vertex(&RobustProblem::Rhs(prob.clone()), &opts).unwrap();
            assert!(
                (benders.objective - vertex.objective).abs() < 1e-5 * (1.0 + vertex.objective),
                "trial {trial}: benders {} vs vertex {}",
                benders.objective,
                vertex.objective
            );
        }
    }

    #[test]
    fn ldr_dominates_vertex_for_minimization() {
        let prob = unit_intro(true, 1.0, scenario_b_set(0.25, 0.9));
        let opts = SolveOptions::with_tol(1e-8);
        let ldr = solve(&prob, Method::Ldr, &opts).unwrap();
        let vx = solve_full_adaptive_vertex(&prob, &opts).unwrap();
        assert!(ldr.objective >= vx.objective - 1e-7, "ldr {} < vertex {}", ldr.objective, vx.objective);
    }

    #[test]
    fn audit_static_solution_feasible() {
        let prob = paper_intro(false, scenario_b_set(0.5, 0.75));
        let res = solve(&prob, Method::Projection, &SolveOptions::default()).unwrap();
        let viol = audit_feasibility(&prob, &res, 1000, 3).unwrap();
        assert!(viol <= 1e-5, "audit violation {viol}");
    }

    #[test]
    fn audit_vertex_policy_feasible() {
        let prob = unit_intro(true, 1.0, scenario_a_set(1.5));
        let res = solve_full_adaptive_vertex(&prob, &SolveOptions::default()).unwrap();
        let viol = audit_feasibility(&prob, &res, 300, 4).unwrap();
        assert!(viol <= 1e-5, "audit violation {viol}");
    }

    #[test]
    fn method_family_guards() {
        let adaptive = unit_intro(true, 1.0, scenario_a_set(1.5));
        assert!(matches!(
            solve(&adaptive, Method::Projection, &SolveOptions::default()),
            Err(crate::error::Error::UnsupportedMethod { .. })
        ));
        let static_p = paper_intro(false, scenario_a_set(1.5));
        assert!(matches!(
            solve(&static_p, Method::Vertex, &SolveOptions::default()),
            Err(crate::error::Error::UnsupportedMethod { .. })
        ));
    }

    #[test]
    fn determinism_fixed_seed() {
        let prob = unit_intro(true, 1.0, scenario_a_set(1.5));
        let opts = SolveOptions { scenario_count: 40, seed: 12, ..Default::default() };
        let a = solve_finite_scenarios(&prob, &opts).unwrap();
        let b = solve_finite_scenarios(&prob, &opts).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }
}
