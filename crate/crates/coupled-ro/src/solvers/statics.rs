//! Static solves by direct projection and by robust counterpart.

use super::{lp_result, Method, SecondStage, SolveOptions, SolveResult};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, INF};
use crate::model::{
    build_rc_projection, build_rc_static_coeff, CoeffRobustProblem, RcForm, RhsRobustProblem,
    RobustProblem,
};
use crate::shrinkage::block_projection;

/// Static robust counterpart of the RHS family through support-function
/// duals: one dual block per robust row with `Q^T z_i = e_i` and
/// `a_i.x + g_i.y >= h.z_i`, over the stacked rows `(Q, h)` of the coupled
/// set.
pub fn build_rc_static_rhs(prob: &RhsRobustProblem) -> Result<LinearProgram> {
    prob.validate()?;
    let spec = prob.uncertainty.without_redundant_balls();
    if spec.has_ball() {
        return Err(Error::NonPolyhedralAtomInRc);
    }
    let (q, h) = spec.polyhedral_rows();
    let q = q.to_rows();
    let n = prob.n1 + prob.n2;
    let m = prob.num_robust_rows();
    let rows_per = q.len();
    let mut lp = prob.base_lp();
    // Extend with dual variables z_i >= 0 per robust row.
    let total = n + m * rows_per;
    let grow = |v: &mut Vec<f64>, fill: f64| v.extend(std::iter::repeat(fill).take(m * rows_per));
    grow(&mut lp.cost, 0.0);
    grow(&mut lp.lower, 0.0);
    grow(&mut lp.upper, INF);
    let mut ineq = crate::linalg::Mat::zeros(0, total);
    let mut ineq_rhs = Vec::new();
    for i in 0..lp.ineq.rows {
        let mut row = lp.ineq.row(i).to_vec();
        row.resize(total, 0.0);
        ineq.push_row(&row);
        ineq_rhs.push(lp.ineq_rhs[i]);
    }
    let mut eq = crate::linalg::Mat::zeros(0, total);
    let mut eq_rhs = Vec::new();
    for i in 0..lp.eq.rows {
        let mut row = lp.eq.row(i).to_vec();
        row.resize(total, 0.0);
        eq.push_row(&row);
        eq_rhs.push(lp.eq_rhs[i]);
    }
    for i in 0..m {
        let z0 = n + i * rows_per;
        // Q^T z_i = e_i
        for k in 0..spec.dim {
            let mut row = vec![0.0; total];
            for (r, qr) in q.iter().enumerate() {
                row[z0 + r] = qr[k];
            }
            eq.push_row(&row);
            eq_rhs.push(if k == i { 1.0 } else { 0.0 });
        }
        // h.z_i - a_i.x - g_i.y <= 0
        let mut row = vec![0.0; total];
        for (j, v) in prob.robust_row(i).iter().enumerate() {
            row[j] = -v;
        }
        for (r, hv) in h.iter().enumerate() {
            row[z0 + r] = *hv;
        }
        ineq.push_row(&row);
        ineq_rhs.push(0.0);
    }
    lp.ineq = ineq;
    lp.ineq_rhs = ineq_rhs;
    lp.eq = eq;
    lp.eq_rhs = eq_rhs;
    Ok(lp)
}

/// Direct-projection solve of the static coefficient family: each block's
/// projection polytope is computed first and every row is dualized against
/// its own projection.
fn solve_projection_coeff(prob: &CoeffRobustProblem) -> Result<LinearProgram> {
    prob.validate()?;
    let n = prob.n1 + prob.n2;
    let mut projections = Vec::with_capacity(prob.uncertainty.blocks.len());
    for i in 0..prob.uncertainty.blocks.len() {
        let pi = block_projection(&prob.uncertainty, i)?;
        let pi = pi.without_redundant_balls();
        if pi.has_ball() {
            return Err(Error::NonPolyhedralAtomInRc);
        }
        let (a, b) = pi.polyhedral_rows();
        projections.push((a.to_rows(), b));
    }
    let mut lp = prob.base_lp();
    let mut total = n;
    let mut z_starts = Vec::with_capacity(prob.rows.len());
    for row in &prob.rows {
        z_starts.push(total);
        total += projections[row.block].0.len();
    }
    lp.cost.resize(total, 0.0);
    lp.lower.resize(total, 0.0);
    lp.upper.resize(total, INF);
    let mut ineq = crate::linalg::Mat::zeros(0, total);
    let mut ineq_rhs = Vec::new();
    for i in 0..lp.ineq.rows {
        let mut r = lp.ineq.row(i).to_vec();
        r.resize(total, 0.0);
        ineq.push_row(&r);
        ineq_rhs.push(lp.ineq_rhs[i]);
    }
    let mut eq = crate::linalg::Mat::zeros(0, total);
    let mut eq_rhs = Vec::new();
    for i in 0..lp.eq.rows {
        let mut r = lp.eq.row(i).to_vec();
        r.resize(total, 0.0);
        eq.push_row(&r);
        eq_rhs.push(lp.eq_rhs[i]);
    }
    for (idx, row) in prob.rows.iter().enumerate() {
        let (pa, pb) = &projections[row.block];
        let p = prob.uncertainty.blocks[row.block].1;
        let z0 = z_starts[idx];
        // (P_a)^T z = W xi + w0 per block coordinate.
        for k in 0..p {
            let mut r = vec![0.0; total];
            for (rr, prow) in pa.iter().enumerate() {
                r[z0 + rr] = prow[k];
            }
            for (j, w) in row.u_coeff[k].iter().enumerate() {
                r[j] -= w;
            }
            eq.push_row(&r);
            eq_rhs.push(row.u_const[k]);
        }
        // lin.xi + (p_b).z <= rhs
        let mut r = vec![0.0; total];
        for (j, v) in row.lin.iter().enumerate() {
            r[j] = *v;
        }
        for (rr, bv) in pb.iter().enumerate() {
            r[z0 + rr] = *bv;
        }
        ineq.push_row(&r);
        ineq_rhs.push(row.rhs);
    }
    lp.ineq = ineq;
    lp.ineq_rhs = ineq_rhs;
    lp.eq = eq;
    lp.eq_rhs = eq_rhs;
    Ok(lp)
}

pub fn solve_static(
    problem: &RobustProblem,
    method: Method,
    _opts: &SolveOptions,
) -> Result<SolveResult> {
    let lp = match (problem, method) {
        (RobustProblem::Rhs(p), Method::Projection) => build_rc_projection(p)?,
        (RobustProblem::Rhs(p), Method::Rc) => build_rc_static_rhs(p)?,
        (RobustProblem::Coeff(p), Method::Projection) => solve_projection_coeff(p)?,
        (RobustProblem::Coeff(p), Method::Rc) => build_rc_static_coeff(p, RcForm::Combined)?,
        _ => unreachable!("dispatch guards the method"),
    };
    let (n1, n2) = match problem {
        RobustProblem::Rhs(p) => (p.n1, p.n2),
        RobustProblem::Coeff(p) => (p.n1, p.n2),
    };
    lp_result(&lp, method, |sol| {
        let x = sol.primal[..n1].to_vec();
        let y = sol.primal[n1..n1 + n2].to_vec();
        (x, SecondStage::StaticY(y))
    })
}

/// Nominal LP at a fixed uncertainty value (used by singleton sets and as a
/// subroutine elsewhere).
pub fn solve_at_realization(prob: &RhsRobustProblem, u: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut lp = prob.base_lp();
    for i in 0..prob.num_robust_rows() {
        lp.add_ge(&prob.robust_row(i), u[i]);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.primal)),
        LpStatus::Infeasible => Err(Error::EmptyCoupledSet),
        LpStatus::Unbounded => Err(Error::UnboundedDirection),
    }
}
