//! Dense linear-programming solver.
//!
//! Two-phase primal simplex on a dense tableau. Pricing is Dantzig by default
//! and switches to Bland's rule after a run of degenerate pivots, which keeps
//! the solver cycle-free without paying Bland's cost on every iteration.
//!
//! The solver returns primal and dual certificates. Duals always refer to the
//! minimization form (a maximization is solved as `min -c`): the multiplier of
//! a `<=` row is nonnegative and stationarity reads
//! `c + A^T y_ineq + E^T y_eq = z` with `z` the bound multipliers.

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};

pub const FEAS_TOL: f64 = 1e-9;
pub const PIVOT_TOL: f64 = 1e-10;
pub const GAP_TOL: f64 = 1e-7;

/// Switch from Dantzig to Bland pricing after this many consecutive
/// degenerate pivots.
const DEGENERACY_STREAK: usize = 40;

pub const INF: f64 = f64::INFINITY;
pub const NEG_INF: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `min/max cost.x` subject to `ineq x <= ineq_rhs`, `eq x = eq_rhs`,
/// `lower <= x <= upper` (entries may be infinite).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub cost: Vec<f64>,
    pub ineq: Mat,
    pub ineq_rhs: Vec<f64>,
    pub eq: Mat,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense, cost: Vec<f64>) -> Self {
        let n = cost.len();
        LinearProgram {
            sense,
            cost,
            ineq: Mat::zeros(0, n),
            ineq_rhs: Vec::new(),
            eq: Mat::zeros(0, n),
            eq_rhs: Vec::new(),
            lower: vec![NEG_INF; n],
            upper: vec![INF; n],
        }
    }

    pub fn minimize(cost: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, cost)
    }

    pub fn maximize(cost: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, cost)
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_ineq(&mut self, row: Vec<f64>, rhs: f64) {
        self.ineq.push_row(&row);
        self.ineq_rhs.push(rhs);
    }

    /// Adds `row . x >= rhs` as the inequality `-row . x <= -rhs`.
    pub fn add_ge(&mut self, row: &[f64], rhs: f64) {
        self.ineq.push_row(&row.iter().map(|v| -v).collect::<Vec<_>>());
        self.ineq_rhs.push(-rhs);
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq.push_row(&row);
        self.eq_rhs.push(rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let check = |name: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::MalformedProgram(name.to_string()))
            }
        };
        check("ineq column count", self.ineq.cols == n)?;
        check("eq column count", self.eq.cols == n)?;
        check("ineq rhs length", self.ineq_rhs.len() == self.ineq.rows)?;
        check("eq rhs length", self.eq_rhs.len() == self.eq.rows)?;
        check("bound lengths", self.lower.len() == n && self.upper.len() == n)?;
        check("cost has NaN", self.cost.iter().all(|v| v.is_finite()))?;
        check("ineq has NaN", self.ineq.is_finite())?;
        check("eq has NaN", self.eq.is_finite())?;
        check("rhs has NaN", self.ineq_rhs.iter().chain(&self.eq_rhs).all(|v| v.is_finite()))?;
        check(
            "bounds have NaN",
            self.lower.iter().chain(&self.upper).all(|v| !v.is_nan()),
        )?;
        check(
            "lower <= upper",
            self.lower.iter().zip(&self.upper).all(|(l, u)| l <= u),
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the problem's own sense. Meaningful only when Optimal.
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Multiplier per inequality row, minimization convention (>= 0).
    pub dual_ineq: Vec<f64>,
    /// Multiplier per equality row, minimization convention (free sign).
    pub dual_eq: Vec<f64>,
    /// Improving ray in the original variable space when Unbounded.
    pub ray: Option<Vec<f64>>,
}

impl LpSolution {
    /// Dual objective of the minimization form, including bound terms.
    /// Equals the (minimization) primal objective at an optimum.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        let min_cost: Vec<f64> = match lp.sense {
            Sense::Minimize => lp.cost.clone(),
            Sense::Maximize => lp.cost.iter().map(|c| -c).collect(),
        };
        // z = c + A^T y + E^T w; each component is the multiplier of the
        // active bound of its variable.
        let mut z = min_cost;
        let at = lp.ineq.tr_matvec(&self.dual_ineq);
        let et = lp.eq.tr_matvec(&self.dual_eq);
        for j in 0..z.len() {
            z[j] += at[j] + et[j];
        }
        let mut obj = -dot(&self.dual_ineq, &lp.ineq_rhs) - dot(&self.dual_eq, &lp.eq_rhs);
        for j in 0..z.len() {
            if z[j].abs() < 1e-12 {
                continue;
            }
            let xj = self.primal[j];
            let bound = if (xj - lp.lower[j]).abs() <= (lp.upper[j] - xj).abs() {
                lp.lower[j]
            } else {
                lp.upper[j]
            };
            if bound.is_finite() {
                obj += z[j] * bound;
            }
        }
        obj
    }

    /// Largest primal constraint violation (rows and bounds).
    pub fn primal_residual(&self, lp: &LinearProgram) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..lp.ineq.rows {
            r = r.max(dot(lp.ineq.row(i), &self.primal) - lp.ineq_rhs[i]);
        }
        for i in 0..lp.eq.rows {
            r = r.max((dot(lp.eq.row(i), &self.primal) - lp.eq_rhs[i]).abs());
        }
        for j in 0..lp.num_vars() {
            r = r.max(lp.lower[j] - self.primal[j]);
            r = r.max(self.primal[j] - lp.upper[j]);
        }
        r
    }
}

/// How each original variable maps into the standard-form columns.
enum VarMap {
    /// x = lower + s[col]
    Shift { col: usize, offset: f64 },
    /// x = upper - s[col]
    Flip { col: usize, offset: f64 },
    /// x = s[pos] - s[neg]
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    cost: Vec<f64>,
    a: Mat,
    b: Vec<f64>,
    maps: Vec<VarMap>,
    /// Column of the slack variable for each original inequality row.
    ineq_slack: Vec<usize>,
    /// Standard row index of each original inequality / equality row.
    ineq_row: Vec<usize>,
    eq_row: Vec<usize>,
    constant: f64,
}

fn build_standard(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let min_cost: Vec<f64> = match lp.sense {
        Sense::Minimize => lp.cost.clone(),
        Sense::Maximize => lp.cost.iter().map(|c| -c).collect(),
    };

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    // (column, cap) pairs for two-sided bounded variables.
    let mut caps: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        if l.is_finite() {
            if u.is_finite() {
                caps.push((ncols, u - l));
            }
            maps.push(VarMap::Shift { col: ncols, offset: l });
            ncols += 1;
        } else if u.is_finite() {
            maps.push(VarMap::Flip { col: ncols, offset: u });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    let nrows = lp.ineq.rows + lp.eq.rows + caps.len();
    let total_cols = ncols + lp.ineq.rows + caps.len(); // + slacks
    let mut a = Mat::zeros(nrows, total_cols);
    let mut b = vec![0.0; nrows];
    let mut cost = vec![0.0; total_cols];
    let mut constant = 0.0;

    for j in 0..n {
        match maps[j] {
            VarMap::Shift { col, offset } => {
                cost[col] = min_cost[j];
                constant += min_cost[j] * offset;
            }
            VarMap::Flip { col, offset } => {
                cost[col] = -min_cost[j];
                constant += min_cost[j] * offset;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] = min_cost[j];
                cost[neg] = -min_cost[j];
            }
        }
    }

    let fill_row = |a: &mut Mat, r: usize, src: &[f64], rhs: f64, b: &mut [f64]| {
        let mut adj = rhs;
        for j in 0..n {
            let v = src[j];
            if v == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    a[(r, col)] += v;
                    adj -= v * offset;
                }
                VarMap::Flip { col, offset } => {
                    a[(r, col)] -= v;
                    adj -= v * offset;
                }
                VarMap::Split { pos, neg } => {
                    a[(r, pos)] += v;
                    a[(r, neg)] -= v;
                }
            }
        }
        b[r] = adj;
    };

    let mut ineq_slack = Vec::with_capacity(lp.ineq.rows);
    let mut ineq_row = Vec::with_capacity(lp.ineq.rows);
    for i in 0..lp.ineq.rows {
        fill_row(&mut a, i, lp.ineq.row(i), lp.ineq_rhs[i], &mut b);
        let slack = ncols + i;
        a[(i, slack)] = 1.0;
        ineq_slack.push(slack);
        ineq_row.push(i);
    }
    let mut eq_row = Vec::with_capacity(lp.eq.rows);
    for i in 0..lp.eq.rows {
        let r = lp.ineq.rows + i;
        fill_row(&mut a, r, lp.eq.row(i), lp.eq_rhs[i], &mut b);
        eq_row.push(r);
    }
    for (k, &(col, cap)) in caps.iter().enumerate() {
        let r = lp.ineq.rows + lp.eq.rows + k;
        a[(r, col)] = 1.0;
        a[(r, ncols + lp.ineq.rows + k)] = 1.0;
        b[r] = cap;
    }

    StandardForm { cost, a, b, maps, ineq_slack, ineq_row, eq_row, constant }
}

struct Tableau {
    /// rows x (cols + 1); last column is the rhs.
    t: Mat,
    /// Objective row: reduced costs, last entry is -objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    /// Columns barred from entering (artificials in phase 2).
    barred: Vec<bool>,
}

enum PivotOutcome {
    Optimal,
    Unbounded { entering: usize },
}

impl Tableau {
    fn reduced_cost_iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.obj[..self.ncols]
            .iter()
            .copied()
            .enumerate()
            .filter(|&(j, _)| !self.barred[j])
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let d = self.t[(row, col)];
        for v in self.t.row_mut(row).iter_mut() {
            *v /= d;
        }
        // Slice-based eliminations keep the inner loops vectorizable.
        let pivot_row = self.t.row(row).to_vec();
        for r in 0..self.t.rows {
            if r == row {
                continue;
            }
            let target = self.t.row_mut(r);
            let f = target[col];
            if f.abs() <= 1e-14 {
                target[col] = 0.0;
                continue;
            }
            for (t, p) in target.iter_mut().zip(&pivot_row) {
                *t -= f * p;
            }
            target[col] = 0.0;
        }
        let f = self.obj[col];
        if f.abs() > 1e-14 {
            for (t, p) in self.obj.iter_mut().zip(&pivot_row) {
                *t -= f * p;
            }
        }
        self.obj[col] = 0.0;
        self.basis[row] = col;
    }

    fn run(&mut self, max_iter: usize) -> Result<PivotOutcome> {
        let mut degenerate_streak = 0usize;
        for it in 0..max_iter {
            let bland = degenerate_streak >= DEGENERACY_STREAK;
            if it > 0 && it % 500 == 0 && std::env::var("LP_TRACE").is_ok() {
                eprintln!("simplex: {it} pivots, bland={bland}, obj={}", -self.obj[self.ncols]);
            }
            let entering = if bland {
                self.reduced_cost_iter().find(|&(_, rc)| rc < -PIVOT_TOL)
            } else {
                self.reduced_cost_iter()
                    .filter(|&(_, rc)| rc < -PIVOT_TOL)
                    .min_by(|a, b| a.1.total_cmp(&b.1))
            };
            let Some((col, _)) = entering else {
                return Ok(PivotOutcome::Optimal);
            };
            // Ratio test; ties go to the smallest basis index (Bland-safe).
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.t.rows {
                let coef = self.t[(r, col)];
                if coef > PIVOT_TOL {
                    let ratio = self.t[(r, self.ncols)] / coef;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio < lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Ok(PivotOutcome::Unbounded { entering: col });
            };
            if ratio.abs() <= 1e-12 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(row, col);
        }
        Err(Error::IterationLimit(max_iter))
    }

    fn primal_std(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.ncols];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < self.ncols {
                x[bv] = self.t[(r, self.ncols)];
            }
        }
        x
    }
}

/// Solves a linear program. Deterministic for a fixed input.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let sf = build_standard(lp);
    let nrows = sf.a.rows;
    let ncols = sf.cost.len();
    let nall = ncols + nrows; // + artificials

    let mut t = Mat::zeros(nrows, nall + 1);
    let mut sigma = vec![1.0; nrows];
    for r in 0..nrows {
        let s = if sf.b[r] < 0.0 { -1.0 } else { 1.0 };
        sigma[r] = s;
        for j in 0..ncols {
            t[(r, j)] = s * sf.a[(r, j)];
        }
        t[(r, ncols + r)] = 1.0;
        t[(r, nall)] = s * sf.b[r];
    }

    // Phase 1: minimize the sum of artificials. Start with all artificials
    // basic; the objective row is minus the sum of the constraint rows.
    let mut obj = vec![0.0; nall + 1];
    for r in 0..nrows {
        for j in 0..=nall {
            obj[j] -= t[(r, j)];
        }
    }
    for r in 0..nrows {
        obj[ncols + r] = 0.0;
    }
    let mut tab = Tableau {
        t,
        obj,
        basis: (ncols..nall).collect(),
        ncols: nall,
        barred: vec![false; nall],
    };
    let max_iter = 50_000 + 200 * (nrows + ncols);
    match tab.run(max_iter)? {
        PivotOutcome::Optimal => {}
        PivotOutcome::Unbounded { .. } => {
            return Err(Error::MalformedProgram("phase 1 unbounded".into()))
        }
    }
    let bscale = 1.0 + sf.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let phase1_obj = -tab.obj[nall];
    if phase1_obj > 1e-8 * bscale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::NAN,
            primal: vec![f64::NAN; lp.num_vars()],
            dual_ineq: vec![0.0; lp.ineq.rows],
            dual_eq: vec![0.0; lp.eq.rows],
            ray: None,
        });
    }

    // Drive any artificial still basic (at zero level) out of the basis.
    for r in 0..nrows {
        if tab.basis[r] < ncols {
            continue;
        }
        let col = (0..ncols).find(|&j| tab.t[(r, j)].abs() > 1e-7);
        match col {
            Some(j) => tab.pivot(r, j),
            // Redundant row; bar its artificial and leave it basic at zero.
            None => {}
        }
    }

    // Phase 2: real costs, artificials barred from entering.
    for j in ncols..nall {
        tab.barred[j] = true;
    }
    let mut obj = vec![0.0; nall + 1];
    obj[..ncols].copy_from_slice(&sf.cost);
    for r in 0..nrows {
        let bv = tab.basis[r];
        let cb = if bv < ncols { sf.cost[bv] } else { 0.0 };
        if cb == 0.0 {
            continue;
        }
        for j in 0..=nall {
            obj[j] -= cb * tab.t[(r, j)];
        }
    }
    // Keep reduced costs of basic columns exactly zero.
    for &bv in &tab.basis {
        obj[bv] = 0.0;
    }
    tab.obj = obj;

    match tab.run(max_iter)? {
        PivotOutcome::Optimal => {
            let xs = tab.primal_std();
            let primal = map_back(&sf, &xs, lp.num_vars(), false);
            // The slack's reduced cost is the row's multiplier in the
            // minimization convention; equality rows read off the artificial.
            let dual_ineq: Vec<f64> = sf
                .ineq_row
                .iter()
                .zip(&sf.ineq_slack)
                .map(|(_, &sl)| tab.obj[sl].max(0.0))
                .collect();
            let dual_eq: Vec<f64> = sf
                .eq_row
                .iter()
                .map(|&r| sigma[r] * tab.obj[ncols + r])
                .collect();
            let min_obj = -tab.obj[nall] + sf.constant;
            let objective = match lp.sense {
                Sense::Minimize => min_obj,
                Sense::Maximize => -min_obj,
            };
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective,
                primal,
                dual_ineq,
                dual_eq,
                ray: None,
            })
        }
        PivotOutcome::Unbounded { entering } => {
            let mut dir = vec![0.0; tab.ncols];
            dir[entering] = 1.0;
            for (r, &bv) in tab.basis.iter().enumerate() {
                if bv < tab.ncols {
                    dir[bv] = -tab.t[(r, entering)];
                }
            }
            let ray = map_back(&sf, &dir, lp.num_vars(), true);
            let xs = tab.primal_std();
            let primal = map_back(&sf, &xs, lp.num_vars(), false);
            Ok(LpSolution {
                status: LpStatus::Unbounded,
                objective: match lp.sense {
                    Sense::Minimize => NEG_INF,
                    Sense::Maximize => INF,
                },
                primal,
                dual_ineq: vec![0.0; lp.ineq.rows],
                dual_eq: vec![0.0; lp.eq.rows],
                ray: Some(ray),
            })
        }
    }
}

fn map_back(sf: &StandardForm, xs: &[f64], n: usize, is_direction: bool) -> Vec<f64> {
    (0..n)
        .map(|j| match sf.maps[j] {
            VarMap::Shift { col, offset } => xs[col] + if is_direction { 0.0 } else { offset },
            VarMap::Flip { col, offset } => {
                if is_direction {
                    -xs[col]
                } else {
                    offset - xs[col]
                }
            }
            VarMap::Split { pos, neg } => xs[pos] - xs[neg],
        })
        .collect()
}
