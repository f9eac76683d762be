//! Deterministic robust counterparts.
//!
//! Every builder emits one LP. Worst-case terms `sup_u y(vars).u` over a
//! polyhedral set `{Qu <= h}` are dualized in place: variables `z >= 0` with
//! `Q^T z = y(vars)` and the term `h.z` in the constraint. The split form
//! keeps the constraint-wise part `U` and the coupling part `C` separate
//! through an explicit decomposition `y = y1 + y2` with one dual block per
//! piece; the combined form stacks all atoms of the coupled set into a
//! single system. Ball atoms have no finite halfspace system, so every RC
//! path rejects them; those sets go through the cutting-plane solver.

use super::{AffineDecisionRule, CoeffRobustProblem, RhsRobustProblem, RowSense};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::lp::{LinearProgram, Sense, INF, NEG_INF};
use crate::sets::UncertaintySpec;
use crate::shrinkage::projection_bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RcForm {
    /// One dual block per robust row over all atoms of the coupled set.
    #[default]
    Combined,
    /// Support-function split `y = y1 + y2` between `U` and `C`.
    Split,
}

/// Replaces each right-hand side with the per-coordinate maximum of the
/// coupled set; exact for the static RHS family.
pub fn build_rc_projection(prob: &RhsRobustProblem) -> Result<LinearProgram> {
    prob.validate()?;
    let dbar = projection_bounds(&prob.uncertainty, true)?;
    let mut lp = prob.base_lp();
    for i in 0..prob.num_robust_rows() {
        lp.add_ge(&prob.robust_row(i), dbar[i]);
    }
    Ok(lp)
}

/// Affine expression over LP variables.
#[derive(Debug, Clone, Default)]
struct Aff {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl Aff {
    fn var(j: usize, coef: f64) -> Aff {
        Aff { terms: vec![(j, coef)], constant: 0.0 }
    }

    fn constant(c: f64) -> Aff {
        Aff { terms: Vec::new(), constant: c }
    }

    fn push(&mut self, j: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((j, coef));
        }
    }
}

/// Sparse LP assembly with variable groups.
struct Builder {
    sense: Sense,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    ineq: Vec<(Vec<(usize, f64)>, f64)>,
    eq: Vec<(Vec<(usize, f64)>, f64)>,
}

impl Builder {
    fn new(sense: Sense) -> Self {
        Builder { sense, cost: Vec::new(), lower: Vec::new(), upper: Vec::new(), ineq: Vec::new(), eq: Vec::new() }
    }

    fn add_vars(&mut self, count: usize, lo: f64, hi: f64) -> usize {
        let start = self.cost.len();
        self.cost.extend(std::iter::repeat(0.0).take(count));
        self.lower.extend(std::iter::repeat(lo).take(count));
        self.upper.extend(std::iter::repeat(hi).take(count));
        start
    }

    fn set_cost(&mut self, j: usize, c: f64) {
        self.cost[j] = c;
    }

    fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    /// `terms <= rhs`
    fn le(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.ineq.push((terms, rhs));
    }

    /// `terms = rhs`
    fn equal(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.eq.push((terms, rhs));
    }

    /// Dual block for `sup { y.u : Q u <= h } <= ...` with `y` given per
    /// coordinate as an affine expression. Adds `z >= 0`, the equalities
    /// `Q^T z = y`, and returns the objective-side term `h.z`.
    fn support_term(&mut self, q: &[Vec<f64>], h: &[f64], arg: &[Aff]) -> Vec<(usize, f64)> {
        let z0 = self.add_vars(q.len(), 0.0, INF);
        for (k, a) in arg.iter().enumerate() {
            let mut row: Vec<(usize, f64)> = q
                .iter()
                .enumerate()
                .filter(|(_, qr)| qr[k] != 0.0)
                .map(|(r, qr)| (z0 + r, qr[k]))
                .collect();
            for &(j, c) in &a.terms {
                row.push((j, -c));
            }
            self.equal(row, a.constant);
        }
        h.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(r, v)| (z0 + r, *v)).collect()
    }

    fn build(self) -> LinearProgram {
        let n = self.cost.len();
        let mut lp = LinearProgram::new(self.sense, self.cost);
        lp.lower = self.lower;
        lp.upper = self.upper;
        let densify = |terms: &[(usize, f64)]| {
            let mut row = vec![0.0; n];
            for &(j, c) in terms {
                row[j] += c;
            }
            row
        };
        for (terms, rhs) in &self.ineq {
            lp.add_ineq(densify(terms), *rhs);
        }
        for (terms, rhs) in &self.eq {
            lp.add_eq(densify(terms), *rhs);
        }
        lp
    }
}

/// Polyhedral rows of the set, with provably redundant balls dropped first.
fn polyhedral_rows_checked(spec: &UncertaintySpec) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let spec = spec.without_redundant_balls();
    if spec.has_ball() {
        return Err(Error::NonPolyhedralAtomInRc);
    }
    let (a, b) = spec.polyhedral_rows();
    Ok((a.to_rows(), b))
}

/// Constraint-wise rows embedded in the full space, and the coupling rows.
fn split_rows(spec: &UncertaintySpec) -> Result<((Vec<Vec<f64>>, Vec<f64>), (Vec<Vec<f64>>, Vec<f64>))> {
    let spec = spec.without_redundant_balls();
    if spec.has_ball() {
        return Err(Error::NonPolyhedralAtomInRc);
    }
    let cw = spec.constraint_wise();
    let (a, b) = cw.polyhedral_rows();
    let mut ca = Mat::zeros(0, spec.dim);
    let mut cb = Vec::new();
    for atom in &spec.coupling_atoms {
        for (row, rhs) in atom.local_rows(spec.dim).unwrap() {
            ca.push_row(&row);
            cb.push(rhs);
        }
    }
    Ok(((a.to_rows(), b), (ca.to_rows(), cb)))
}

/// Static robust counterpart of the coefficient family.
pub fn build_rc_static_coeff(prob: &CoeffRobustProblem, form: RcForm) -> Result<LinearProgram> {
    prob.validate()?;
    let n = prob.n1 + prob.n2;
    let dim = prob.uncertainty.dim;
    let mut b = Builder::new(Sense::Maximize);
    let xi = b.add_vars(n, NEG_INF, INF);
    for j in 0..prob.n1 {
        b.set_cost(xi + j, prob.c[j]);
        b.set_bounds(xi + j, prob.x_bounds.lower[j], prob.x_bounds.upper[j]);
    }
    for j in 0..prob.n2 {
        b.set_cost(xi + prob.n1 + j, prob.d[j]);
        b.set_bounds(xi + prob.n1 + j, prob.y_bounds.lower[j], prob.y_bounds.upper[j]);
    }
    for row in &prob.det {
        let mut terms = Vec::new();
        for (j, v) in row.ax.iter().chain(row.ay.iter()).enumerate() {
            if *v != 0.0 {
                terms.push((xi + j, *v));
            }
        }
        match row.sense {
            RowSense::Le => b.le(terms, row.rhs),
            RowSense::Eq => b.equal(terms, row.rhs),
        }
    }

    let combined = polyhedral_rows_checked(&prob.uncertainty)?;
    let split = split_rows(&prob.uncertainty)?;
    for row in &prob.rows {
        let (off, len) = prob.block_scope(row);
        // Argument of the support term: E_b (W xi + w0), expressed per
        // full-space coordinate.
        let mut arg = vec![Aff::constant(0.0); dim];
        for k in 0..len {
            let mut a = Aff::constant(row.u_const[k]);
            for (j, w) in row.u_coeff[k].iter().enumerate() {
                a.push(xi + j, *w);
            }
            arg[off + k] = a;
        }
        let mut lhs: Vec<(usize, f64)> = Vec::new();
        for (j, v) in row.lin.iter().enumerate() {
            if *v != 0.0 {
                lhs.push((xi + j, *v));
            }
        }
        match form {
            RcForm::Combined => {
                lhs.extend(b.support_term(&combined.0, &combined.1, &arg));
            }
            RcForm::Split => {
                let ((ua, ub), (ca, cb)) = (&split.0, &split.1);
                if ca.is_empty() {
                    lhs.extend(b.support_term(ua, ub, &arg));
                } else {
                    // y1 + y2 = arg; sup(y1 | U) + sup(y2 | C) in the row.
                    let y1 = b.add_vars(dim, NEG_INF, INF);
                    let y2 = b.add_vars(dim, NEG_INF, INF);
                    for (k, a) in arg.iter().enumerate() {
                        let mut terms = vec![(y1 + k, 1.0), (y2 + k, 1.0)];
                        for &(j, c) in &a.terms {
                            terms.push((j, -c));
                        }
                        b.equal(terms, a.constant);
                    }
                    let id1: Vec<Aff> = (0..dim).map(|k| Aff::var(y1 + k, 1.0)).collect();
                    let id2: Vec<Aff> = (0..dim).map(|k| Aff::var(y2 + k, 1.0)).collect();
                    lhs.extend(b.support_term(ua, ub, &id1));
                    lhs.extend(b.support_term(ca, cb, &id2));
                }
            }
        }
        b.le(lhs, row.rhs);
    }
    Ok(b.build())
}

/// Where the decision-rule pieces live in the LDR counterpart's variables.
#[derive(Debug, Clone)]
pub struct LdrLayout {
    pub n1: usize,
    pub n2: usize,
    pub dim: usize,
    pub x0: usize,
    pub z0: usize,
    pub v0: usize,
    pub tau: usize,
}

impl LdrLayout {
    pub fn extract(&self, primal: &[f64]) -> (Vec<f64>, AffineDecisionRule) {
        let x = primal[self.x0..self.x0 + self.n1].to_vec();
        let z = primal[self.z0..self.z0 + self.n2].to_vec();
        let v = (0..self.n2)
            .map(|j| primal[self.v0 + j * self.dim..self.v0 + (j + 1) * self.dim].to_vec())
            .collect();
        (x, AffineDecisionRule { z, v })
    }
}

/// Robust counterpart under linear decision rules `y(u) = z + V u`.
///
/// RHS family: `min c.x + tau` with the worst case of `d.y(u)` in an
/// epigraph and every y-involving row robustified through support terms.
pub fn build_rc_ldr_rhs(prob: &RhsRobustProblem) -> Result<(LinearProgram, LdrLayout)> {
    prob.validate()?;
    let dim = prob.uncertainty.dim;
    let (q, h) = polyhedral_rows_checked(&prob.uncertainty)?;
    let mut b = Builder::new(Sense::Minimize);
    let x0 = b.add_vars(prob.n1, NEG_INF, INF);
    let z0 = b.add_vars(prob.n2, NEG_INF, INF);
    let v0 = b.add_vars(prob.n2 * dim, NEG_INF, INF);
    let tau = b.add_vars(1, NEG_INF, INF);
    let layout = LdrLayout { n1: prob.n1, n2: prob.n2, dim, x0, z0, v0, tau };
    for j in 0..prob.n1 {
        b.set_cost(x0 + j, prob.c[j]);
        b.set_bounds(x0 + j, prob.x_bounds.lower[j], prob.x_bounds.upper[j]);
    }
    b.set_cost(tau, 1.0);
    let vcell = |j: usize, k: usize| v0 + j * dim + k;

    // tau >= d.z + sup (V^T d).u
    {
        let mut arg = vec![Aff::constant(0.0); dim];
        for k in 0..dim {
            for j in 0..prob.n2 {
                arg[k].push(vcell(j, k), prob.d[j]);
            }
        }
        let mut lhs = b.support_term(&q, &h, &arg);
        for j in 0..prob.n2 {
            if prob.d[j] != 0.0 {
                lhs.push((z0 + j, prob.d[j]));
            }
        }
        lhs.push((tau, -1.0));
        b.le(lhs, 0.0);
    }
    // Robust rows: sup (e_i - V^T g_i).u <= a_i.x + g_i.z
    for i in 0..prob.num_robust_rows() {
        let mut arg = vec![Aff::constant(0.0); dim];
        arg[i].constant = 1.0;
        for k in 0..dim {
            for j in 0..prob.n2 {
                arg[k].push(vcell(j, k), -prob.g_mat[i][j]);
            }
        }
        let mut lhs = b.support_term(&q, &h, &arg);
        for (j, v) in prob.a_mat[i].iter().enumerate() {
            if *v != 0.0 {
                lhs.push((x0 + j, -v));
            }
        }
        for (j, v) in prob.g_mat[i].iter().enumerate() {
            if *v != 0.0 {
                lhs.push((z0 + j, -v));
            }
        }
        b.le(lhs, 0.0);
    }
    // Deterministic rows touching y hold for every u.
    for row in &prob.det {
        if !row.touches_y() {
            let terms = row
                .ax
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (x0 + j, *v))
                .collect();
            match row.sense {
                RowSense::Le => b.le(terms, row.rhs),
                RowSense::Eq => b.equal(terms, row.rhs),
            }
            continue;
        }
        if row.sense == RowSense::Eq {
            return Err(Error::UnsupportedMethod {
                method: "ldr".into(),
                reason: "equality rows on second-stage variables".into(),
            });
        }
        let mut arg = vec![Aff::constant(0.0); dim];
        for k in 0..dim {
            for j in 0..prob.n2 {
                arg[k].push(vcell(j, k), row.ay[j]);
            }
        }
        let mut lhs = b.support_term(&q, &h, &arg);
        for (j, v) in row.ax.iter().enumerate() {
            if *v != 0.0 {
                lhs.push((x0 + j, *v));
            }
        }
        for (j, v) in row.ay.iter().enumerate() {
            if *v != 0.0 {
                lhs.push((z0 + j, *v));
            }
        }
        b.le(lhs, row.rhs);
    }
    // Second-stage bounds hold for every u.
    for j in 0..prob.n2 {
        let hi = prob.y_bounds.upper[j];
        if hi.is_finite() {
            let arg: Vec<Aff> = (0..dim).map(|k| Aff::var(vcell(j, k), 1.0)).collect();
            let mut lhs = b.support_term(&q, &h, &arg);
            lhs.push((z0 + j, 1.0));
            b.le(lhs, hi);
        }
        let lo = prob.y_bounds.lower[j];
        if lo.is_finite() {
            let arg: Vec<Aff> = (0..dim).map(|k| Aff::var(vcell(j, k), -1.0)).collect();
            let mut lhs = b.support_term(&q, &h, &arg);
            lhs.push((z0 + j, -1.0));
            b.le(lhs, -lo);
        }
    }
    Ok((b.build(), layout))
}

/// LDR counterpart of the coefficient family; requires fixed recourse (the
/// uncertain term must not touch second-stage variables).
pub fn build_rc_ldr_coeff(prob: &CoeffRobustProblem) -> Result<(LinearProgram, LdrLayout)> {
    prob.validate()?;
    if prob.rows.iter().any(|r| !r.fixed_recourse(prob.n1)) {
        return Err(Error::UnsupportedMethod {
            method: "ldr".into(),
            reason: "uncertainty multiplies second-stage variables".into(),
        });
    }
    let dim = prob.uncertainty.dim;
    let (q, h) = polyhedral_rows_checked(&prob.uncertainty)?;
    let mut b = Builder::new(Sense::Maximize);
    let x0 = b.add_vars(prob.n1, NEG_INF, INF);
    let z0 = b.add_vars(prob.n2, NEG_INF, INF);
    let v0 = b.add_vars(prob.n2 * dim, NEG_INF, INF);
    let tau = b.add_vars(1, NEG_INF, INF);
    let layout = LdrLayout { n1: prob.n1, n2: prob.n2, dim, x0, z0, v0, tau };
    for j in 0..prob.n1 {
        b.set_cost(x0 + j, prob.c[j]);
        b.set_bounds(x0 + j, prob.x_bounds.lower[j], prob.x_bounds.upper[j]);
    }
    let vcell = |j: usize, k: usize| v0 + j * dim + k;
    if prob.n2 > 0 {
        b.set_cost(tau, 1.0);
        // tau <= d.z + inf (V^T d).u  <=>  tau - d.z + sup (-V^T d).u <= 0
        let mut arg = vec![Aff::constant(0.0); dim];
        for k in 0..dim {
            for j in 0..prob.n2 {
                arg[k].push(vcell(j, k), -prob.d[j]);
            }
        }
        let mut lhs = b.support_term(&q, &h, &arg);
        lhs.push((tau, 1.0));
        for j in 0..prob.n2 {
            if prob.d[j] != 0.0 {
                lhs.push((z0 + j, -prob.d[j]));
            }
        }
        b.le(lhs, 0.0);
    } else {
        b.set_bounds(tau, 0.0, 0.0);
    }
    for row in &prob.rows {
        let (off, len) = prob.block_scope(row);
        // u-coefficient: E_b (W_x x + w0) + V^T lin_y
        let mut arg = vec![Aff::constant(0.0); dim];
        for k in 0..len {
            let a = &mut arg[off + k];
            a.constant = row.u_const[k];
            for j in 0..prob.n1 {
                a.push(x0 + j, row.u_coeff[k][j]);
            }
        }
        for k in 0..dim {
            for j in 0..prob.n2 {
                arg[k].push(vcell(j, k), row.lin[prob.n1 + j]);
            }
        }
        let mut lhs = b.support_term(&q, &h, &arg);
        for j in 0..prob.n1 {
            if row.lin[j] != 0.0 {
                lhs.push((x0 + j, row.lin[j]));
            }
        }
        for j in 0..prob.n2 {
            if row.lin[prob.n1 + j] != 0.0 {
                lhs.push((z0 + j, row.lin[prob.n1 + j]));
            }
        }
        b.le(lhs, row.rhs);
    }
    for row in &prob.det {
        if row.touches_y() {
            if row.sense == RowSense::Eq {
                return Err(Error::UnsupportedMethod {
                    method: "ldr".into(),
                    reason: "equality rows on second-stage variables".into(),
                });
            }
            let mut arg = vec![Aff::constant(0.0); dim];
            for k in 0..dim {
                for j in 0..prob.n2 {
                    arg[k].push(vcell(j, k), row.ay[j]);
                }
            }
            let mut lhs = b.support_term(&q, &h, &arg);
            for (j, v) in row.ax.iter().enumerate() {
                if *v != 0.0 {
                    lhs.push((x0 + j, *v));
                }
            }
            for (j, v) in row.ay.iter().enumerate() {
                if *v != 0.0 {
                    lhs.push((z0 + j, *v));
                }
            }
            b.le(lhs, row.rhs);
        } else {
            let terms = row
                .ax
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (x0 + j, *v))
                .collect();
            match row.sense {
                RowSense::Le => b.le(terms, row.rhs),
                RowSense::Eq => b.equal(terms, row.rhs),
            }
        }
    }
    for j in 0..prob.n2 {
        let hi = prob.y_bounds.upper[j];
        if hi.is_finite() {
            let arg: Vec<Aff> = (0..dim).map(|k| Aff::var(vcell(j, k), 1.0)).collect();
            let mut lhs = b.support_term(&q, &h, &arg);
            lhs.push((z0 + j, 1.0));
            b.le(lhs, hi);
        }
        let lo = prob.y_bounds.lower[j];
        if lo.is_finite() {
            let arg: Vec<Aff> = (0..dim).map(|k| Aff::var(vcell(j, k), -1.0)).collect();
            let mut lhs = b.support_term(&q, &h, &arg);
            lhs.push((z0 + j, -1.0));
            b.le(lhs, -lo);
        }
    }
    Ok((b.build(), layout))
}

/// One LDR entry point across the two families.
pub fn build_rc_ldr(prob: &super::RobustProblem) -> Result<(LinearProgram, LdrLayout)> {
    match prob {
        super::RobustProblem::Rhs(p) => build_rc_ldr_rhs(p),
        super::RobustProblem::Coeff(p) => build_rc_ldr_coeff(p),
    }
}
