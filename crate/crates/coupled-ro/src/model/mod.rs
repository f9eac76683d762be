//! Problem data model for the two robust families and their deterministic
//! robust counterparts.
//!
//! Right-hand-side family (minimization):
//! `min c.x + d.y(u)` s.t. `a_i.x + g_i.y(u) >= u_i` for all `u` in the set,
//! plus deterministic rows and bounds. In the adaptive variant the objective
//! worst-cases `d.y(u)` over the set.
//!
//! Coefficient family (maximization):
//! `max c.x + min_u d.y(u)` s.t.
//! `lin_i.(x,y(u)) + u_i.(W_i (x,y(u)) + w_i) <= rhs_i` for all `u`,
//! where `u_i` is the row's uncertainty block.

mod rc;

pub use rc::{
    build_rc_ldr, build_rc_ldr_coeff, build_rc_ldr_rhs, build_rc_projection,
    build_rc_static_coeff, LdrLayout, RcForm,
};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::lp::{LinearProgram, INF, NEG_INF};
use crate::sets::UncertaintySpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSense {
    Le,
    Eq,
}

/// Deterministic constraint over `(x, y)`: `ax.x + ay.y (<=|=) rhs`.
/// Rows with a nonzero `ay` must hold for every uncertainty realization in
/// the adaptive case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetRow {
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl DetRow {
    pub fn le(ax: Vec<f64>, ay: Vec<f64>, rhs: f64) -> Self {
        DetRow { ax, ay, sense: RowSense::Le, rhs }
    }

    pub fn touches_y(&self) -> bool {
        self.ay.iter().any(|v| *v != 0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn free(n: usize) -> Self {
        Bounds { lower: vec![NEG_INF; n], upper: vec![INF; n] }
    }

    pub fn nonneg(n: usize) -> Self {
        Bounds { lower: vec![0.0; n], upper: vec![INF; n] }
    }

    pub fn boxed(n: usize, lo: f64, hi: f64) -> Self {
        Bounds { lower: vec![lo; n], upper: vec![hi; n] }
    }
}

/// `min c.x + d.y` with robust rows `a_i.x + g_i.y >= u_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhsRobustProblem {
    pub n1: usize,
    pub n2: usize,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    pub g_mat: Vec<Vec<f64>>,
    #[serde(rename = "det_constraints")]
    pub det: Vec<DetRow>,
    pub x_bounds: Bounds,
    pub y_bounds: Bounds,
    pub uncertainty: UncertaintySpec,
    pub adaptive: bool,
}

impl RhsRobustProblem {
    pub fn num_robust_rows(&self) -> usize {
        self.a_mat.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.a_mat.len();
        let ok = self.c.len() == self.n1
            && self.d.len() == self.n2
            && self.g_mat.len() == m
            && self.a_mat.iter().all(|r| r.len() == self.n1)
            && self.g_mat.iter().all(|r| r.len() == self.n2)
            && self.det.iter().all(|r| r.ax.len() == self.n1 && r.ay.len() == self.n2)
            && self.x_bounds.lower.len() == self.n1
            && self.y_bounds.lower.len() == self.n2;
        if !ok {
            return Err(Error::DimensionMismatch("rhs problem shapes".into()));
        }
        if self.uncertainty.dim != m {
            return Err(Error::DimensionMismatch(format!(
                "uncertainty dim {} vs {m} robust rows",
                self.uncertainty.dim
            )));
        }
        if self.uncertainty.blocks.iter().any(|&(_, len)| len != 1) {
            return Err(Error::DimensionMismatch(
                "rhs problems need scalar uncertainty blocks".into(),
            ));
        }
        self.uncertainty.validate()
    }

    /// Objective, deterministic rows, and bounds over the stacked variables
    /// `(x, y)`; robust rows are left to the caller.
    pub fn base_lp(&self) -> LinearProgram {
        let n = self.n1 + self.n2;
        let mut cost = Vec::with_capacity(n);
        cost.extend_from_slice(&self.c);
        cost.extend_from_slice(&self.d);
        let mut lp = LinearProgram::minimize(cost);
        for row in &self.det {
            let mut r = Vec::with_capacity(n);
            r.extend_from_slice(&row.ax);
            r.extend_from_slice(&row.ay);
            match row.sense {
                RowSense::Le => lp.add_ineq(r, row.rhs),
                RowSense::Eq => lp.add_eq(r, row.rhs),
            }
        }
        for j in 0..self.n1 {
            lp.set_bounds(j, self.x_bounds.lower[j], self.x_bounds.upper[j]);
        }
        for j in 0..self.n2 {
            lp.set_bounds(self.n1 + j, self.y_bounds.lower[j], self.y_bounds.upper[j]);
        }
        lp
    }

    /// The stacked coefficient row of robust constraint `i` over `(x, y)`.
    pub fn robust_row(&self, i: usize) -> Vec<f64> {
        let mut r = Vec::with_capacity(self.n1 + self.n2);
        r.extend_from_slice(&self.a_mat[i]);
        r.extend_from_slice(&self.g_mat[i]);
        r
    }

    /// The problem with its coupling atoms dropped.
    pub fn uncoupled(&self) -> RhsRobustProblem {
        RhsRobustProblem { uncertainty: self.uncertainty.constraint_wise(), ..self.clone() }
    }

    /// The problem over a replacement uncertainty set.
    pub fn with_uncertainty(&self, uncertainty: UncertaintySpec) -> RhsRobustProblem {
        RhsRobustProblem { uncertainty, ..self.clone() }
    }
}

/// One robust row of the coefficient family:
/// `lin.(x,y) + u_b.(u_coeff (x,y) + u_const) <= rhs` for all `u`, where
/// `u_b` is block `block` of the uncertainty vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffRow {
    pub block: usize,
    pub lin: Vec<f64>,
    pub u_coeff: Vec<Vec<f64>>,
    pub u_const: Vec<f64>,
    pub rhs: f64,
}

impl CoeffRow {
    /// Coefficient row over `(x, y)` and adjusted rhs at a fixed realization.
    pub fn at_realization(&self, u_block: &[f64]) -> (Vec<f64>, f64) {
        let n = self.lin.len();
        let mut row = self.lin.clone();
        for (k, uk) in u_block.iter().enumerate() {
            if *uk == 0.0 {
                continue;
            }
            for j in 0..n {
                row[j] += uk * self.u_coeff[k][j];
            }
        }
        (row, self.rhs - dot(u_block, &self.u_const))
    }

    /// `u_coeff (x,y) + u_const` evaluated at a decision point: the direction
    /// whose support over the block set is the row's worst-case term.
    pub fn u_direction(&self, point: &[f64]) -> Vec<f64> {
        self.u_coeff
            .iter()
            .zip(&self.u_const)
            .map(|(w, w0)| dot(w, point) + w0)
            .collect()
    }

    /// True when the uncertain term touches only the first `n1` variables.
    pub fn fixed_recourse(&self, n1: usize) -> bool {
        self.u_coeff.iter().all(|w| w[n1..].iter().all(|v| *v == 0.0))
    }
}

/// `max c.x + min_u d.y(u)` subject to coefficient-robust rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffRobustProblem {
    pub n1: usize,
    pub n2: usize,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub rows: Vec<CoeffRow>,
    #[serde(rename = "det_constraints")]
    pub det: Vec<DetRow>,
    pub x_bounds: Bounds,
    pub y_bounds: Bounds,
    pub uncertainty: UncertaintySpec,
    pub adaptive: bool,
}

impl CoeffRobustProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.n1 + self.n2;
        let ok = self.c.len() == self.n1
            && self.d.len() == self.n2
            && self.det.iter().all(|r| r.ax.len() == self.n1 && r.ay.len() == self.n2)
            && self.x_bounds.lower.len() == self.n1
            && self.y_bounds.lower.len() == self.n2;
        if !ok {
            return Err(Error::DimensionMismatch("coeff problem shapes".into()));
        }
        for row in &self.rows {
            if row.block >= self.uncertainty.blocks.len() {
                return Err(Error::DimensionMismatch("row block index".into()));
            }
            let p = self.uncertainty.blocks[row.block].1;
            if row.lin.len() != n
                || row.u_coeff.len() != p
                || row.u_const.len() != p
                || row.u_coeff.iter().any(|w| w.len() != n)
            {
                return Err(Error::DimensionMismatch("coeff row shapes".into()));
            }
        }
        self.uncertainty.validate()
    }

    /// Objective, deterministic rows, and bounds over `(x, y)`; robust rows
    /// are left to the caller. Maximization.
    pub fn base_lp(&self) -> LinearProgram {
        let n = self.n1 + self.n2;
        let mut cost = Vec::with_capacity(n);
        cost.extend_from_slice(&self.c);
        cost.extend_from_slice(&self.d);
        let mut lp = LinearProgram::maximize(cost);
        for row in &self.det {
            let mut r = Vec::with_capacity(n);
            r.extend_from_slice(&row.ax);
            r.extend_from_slice(&row.ay);
            match row.sense {
                RowSense::Le => lp.add_ineq(r, row.rhs),
                RowSense::Eq => lp.add_eq(r, row.rhs),
            }
        }
        for j in 0..self.n1 {
            lp.set_bounds(j, self.x_bounds.lower[j], self.x_bounds.upper[j]);
        }
        for j in 0..self.n2 {
            lp.set_bounds(self.n1 + j, self.y_bounds.lower[j], self.y_bounds.upper[j]);
        }
        lp
    }

    /// The uncertainty slice `(offset, len)` of a row's block.
    pub fn block_scope(&self, row: &CoeffRow) -> (usize, usize) {
        self.uncertainty.blocks[row.block]
    }

    pub fn uncoupled(&self) -> CoeffRobustProblem {
        CoeffRobustProblem { uncertainty: self.uncertainty.constraint_wise(), ..self.clone() }
    }

    pub fn with_uncertainty(&self, uncertainty: UncertaintySpec) -> CoeffRobustProblem {
        CoeffRobustProblem { uncertainty, ..self.clone() }
    }

    /// Canonical static family `max c.x : u_i.x_sel <= b_i` with block `i`
    /// multiplying the listed variables.
    pub fn canonical_static(
        c: Vec<f64>,
        row_vars: Vec<Vec<usize>>,
        b: Vec<f64>,
        uncertainty: UncertaintySpec,
        x_bounds: Bounds,
    ) -> Result<CoeffRobustProblem> {
        let n1 = c.len();
        let mut rows = Vec::with_capacity(row_vars.len());
        for (i, vars) in row_vars.iter().enumerate() {
            let p = uncertainty.blocks[i].1;
            if vars.len() != p {
                return Err(Error::DimensionMismatch(
                    "one selected variable per block coordinate".into(),
                ));
            }
            let mut u_coeff = vec![vec![0.0; n1]; p];
            for (k, &j) in vars.iter().enumerate() {
                u_coeff[k][j] = 1.0;
            }
            rows.push(CoeffRow {
                block: i,
                lin: vec![0.0; n1],
                u_coeff,
                u_const: vec![0.0; p],
                rhs: b[i],
            });
        }
        let prob = CoeffRobustProblem {
            n1,
            n2: 0,
            c,
            d: Vec::new(),
            rows,
            det: Vec::new(),
            x_bounds,
            y_bounds: Bounds::free(0),
            uncertainty,
            adaptive: false,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Translates the uncertainty so the origin lands inside the coupled
    /// set, absorbing the shift into the rows' certain parts.
    pub fn canonical_translate(&self) -> Result<(CoeffRobustProblem, Vec<f64>)> {
        let u_cw = self.uncertainty.constraint_wise();
        let (u2, ubar2, shift) =
            crate::shrinkage::translate_by_symmetry_point(&u_cw, &self.uncertainty)?;
        let _ = u2;
        let mut out = self.clone();
        out.uncertainty = ubar2;
        for row in out.rows.iter_mut() {
            let (off, len) = self.uncertainty.blocks[row.block];
            let s = &shift[off..off + len];
            // (u_s + u).(W xi + w0) = u.(W xi + w0) + u_s.W xi + u_s.w0
            for (k, sk) in s.iter().enumerate() {
                if *sk == 0.0 {
                    continue;
                }
                for j in 0..row.lin.len() {
                    row.lin[j] += sk * row.u_coeff[k][j];
                }
            }
            row.rhs -= dot(s, &row.u_const);
        }
        Ok((out, shift))
    }
}

/// Affine decision rule `y(u) = z + V u`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineDecisionRule {
    pub z: Vec<f64>,
    /// `n2 x dim`, row per second-stage variable.
    pub v: Vec<Vec<f64>>,
}

impl AffineDecisionRule {
    pub fn evaluate(&self, u: &[f64]) -> Vec<f64> {
        self.z
            .iter()
            .zip(&self.v)
            .map(|(z, row)| z + dot(row, u))
            .collect()
    }
}

/// Wire format envelope for problem files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RobustProblem {
    Rhs(RhsRobustProblem),
    Coeff(CoeffRobustProblem),
}

impl RobustProblem {
    pub fn validate(&self) -> Result<()> {
        match self {
            RobustProblem::Rhs(p) => p.validate(),
            RobustProblem::Coeff(p) => p.validate(),
        }
    }

    pub fn uncertainty(&self) -> &UncertaintySpec {
        match self {
            RobustProblem::Rhs(p) => &p.uncertainty,
            RobustProblem::Coeff(p) => &p.uncertainty,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        match self {
            RobustProblem::Rhs(p) => p.adaptive,
            RobustProblem::Coeff(p) => p.adaptive,
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::sets::SetAtom;

    /// The two-source, two-center, two-store network: decision variables
    /// `x = (x11, x22)` and `y = (y11, y22, y12)`, demand rows for the two
    /// stores, flow conservation at both centers, unit capacities.
    pub fn intro_network(
        costs_x: [f64; 2],
        costs_y: [f64; 3],
        capacity: f64,
        uncertainty: UncertaintySpec,
        adaptive: bool,
    ) -> RhsRobustProblem {
        let det = vec![
            // y11 + y12 <= x11
            DetRow::le(vec![-1.0, 0.0], vec![1.0, 0.0, 1.0], 0.0),
            // y22 <= x22
            DetRow::le(vec![0.0, -1.0], vec![0.0, 1.0, 0.0], 0.0),
        ];
        RhsRobustProblem {
            n1: 2,
            n2: 3,
            c: costs_x.to_vec(),
            d: costs_y.to_vec(),
            a_mat: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            g_mat: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]],
            det,
            x_bounds: Bounds::boxed(2, 0.0, capacity),
            y_bounds: Bounds::boxed(3, 0.0, capacity),
            uncertainty,
            adaptive,
        }
    }

    pub fn scenario_a_set(eta: f64) -> UncertaintySpec {
        UncertaintySpec::unit_box_scalar(2)
            .intersect(vec![SetAtom::Budget { weights: vec![1.0, 1.0], limit: eta }])
            .unwrap()
    }

    pub fn scenario_b_set(alpha: f64, beta: f64) -> UncertaintySpec {
        UncertaintySpec::unit_box_scalar(2)
            .intersect(vec![SetAtom::Halfspaces {
                a: vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
                b: vec![-alpha, beta],
            }])
            .unwrap()
    }

    /// Static coefficient instance with an l1-ball block and an l2-ball
    /// block equalized by the coupling; variables `(x1..x4)`.
    pub fn l1_l2_static(c: Vec<f64>) -> CoeffRobustProblem {
        let l1 = SetAtom::Halfspaces {
            a: vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]],
            b: vec![1.0; 4],
        };
        let u = UncertaintySpec {
            dim: 4,
            blocks: vec![(0, 2), (2, 2)],
            cw_atoms: vec![vec![l1], vec![SetAtom::L2Ball { radius: 1.0 }]],
            coupling_atoms: Vec::new(),
        };
        let coupling = SetAtom::Halfspaces {
            a: vec![
                vec![1.0, 0.0, -1.0, 0.0],
                vec![-1.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0, -1.0],
                vec![0.0, -1.0, 0.0, 1.0],
            ],
            b: vec![0.0; 4],
        };
        let ubar = u.intersect(vec![coupling]).unwrap();
        CoeffRobustProblem::canonical_static(
            c,
            vec![vec![0, 1], vec![2, 3]],
            vec![1.0, 1.0],
            ubar,
            Bounds::free(4),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::lp::{solve_lp, LpStatus};

    #[test]
    fn validate_catches_block_width() {
        let mut p = intro_network(
            [100.0, 100.0],
            [200.0, 200.0, 200.0],
            1.0,
            scenario_a_set(1.5),
            false,
        );
        assert!(p.validate().is_ok());
        p.uncertainty = UncertaintySpec::from_atom(2, crate::sets::SetAtom::unit_box(2));
        assert!(p.validate().is_err());
    }

    #[test]
    fn base_lp_solves_without_robust_rows() {
        let p = intro_network(
            [100.0, 100.0],
            [200.0, 200.0, 200.0],
            1.0,
            scenario_a_set(1.5),
            false,
        );
        let sol = solve_lp(&p.base_lp()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective.abs() < 1e-9); // nothing forces shipping yet
    }

    #[test]
    fn coeff_row_realization() {
        let p = l1_l2_static(vec![0.0, 0.0, 1.0, 1.0]);
        let (row, rhs) = p.rows[0].at_realization(&[0.5, -0.25]);
        assert_eq!(row, vec![0.5, -0.25, 0.0, 0.0]);
        assert_eq!(rhs, 1.0);
    }

    #[test]
    fn canonical_translate_identity_when_origin_inside() {
        let p = l1_l2_static(vec![1.0; 4]);
        let (q, shift) = p.canonical_translate().unwrap();
        assert!(shift.iter().all(|s| s.abs() < 1e-9));
        assert_eq!(q.rows[0].rhs, p.rows[0].rhs);
    }

    #[test]
    fn problem_json_round_trip() {
        let p = intro_network(
            [100.0, 100.0],
            [200.0, 200.0, 200.0],
            1.0,
            scenario_b_set(0.5, 0.75),
            true,
        );
        let wrapped = RobustProblem::Rhs(p);
        let js = serde_json::to_value(&wrapped).unwrap();
        assert_eq!(js["family"], "rhs");
        assert_eq!(js["adaptive"], true);
        assert!(js.get("A").is_some() && js.get("G").is_some());
        assert!(js.get("det_constraints").is_some());
        assert!(js.get("uncertainty").is_some());
        let back: RobustProblem = serde_json::from_value(js).unwrap();
        back.validate().unwrap();
    }
}
