//! Linear optimization over uncertainty sets.
//!
//! Pure polyhedral sets go through the LP solver. Ball atoms are handled
//! without a conic solver: a lone ball has the closed form `radius * ||y||`,
//! box-and-ball sets use bisection on the ball's Lagrange multiplier, and
//! general polyhedra intersected with balls run an outer-approximation loop
//! that adds tangent cuts until the ball constraint is met.

use super::{Scope, SetAtom, UncertaintySpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, sub};
use crate::lp::{solve_lp, LinearProgram, LpStatus, INF, NEG_INF};

const BALL_TOL: f64 = 1e-9;
const KELLEY_MAX_ITER: usize = 2000;

/// `max c.u` over the set. Returns the value and a maximizer.
pub fn maximize_linear(spec: &UncertaintySpec, c: &[f64]) -> Result<(f64, Vec<f64>)> {
    if c.len() != spec.dim {
        return Err(Error::DimensionMismatch("objective dimension".into()));
    }
    let balls = spec.balls();
    if balls.is_empty() {
        return maximize_over_rows(spec, c);
    }
    if let Some(v) = pure_ball_closed_form(spec, c, &balls) {
        return Ok(v);
    }
    if let Some(v) = box_ball_bisection(spec, c, &balls)? {
        return Ok(v);
    }
    kelley_maximize(spec, c, &balls)
}

/// Support function `delta*(y | set) = sup y.u` with its argmax.
pub fn support_function(spec: &UncertaintySpec, y: &[f64]) -> Result<(f64, Vec<f64>)> {
    maximize_linear(spec, y)
}

fn lp_over_rows(spec: &UncertaintySpec, c: &[f64]) -> LinearProgram {
    let mut lp = LinearProgram::maximize(c.to_vec());
    // Box atoms become variable bounds; other atoms become rows. Paired
    // opposite rows collapse to equalities. Both keep the tableau small and
    // cut degeneracy.
    for (s, atom) in spec.scoped_atoms() {
        match atom {
            SetAtom::Box { lower, upper } => {
                for k in 0..s.len {
                    let j = s.offset + k;
                    lp.lower[j] = lp.lower[j].max(lower[k]);
                    lp.upper[j] = lp.upper[j].min(upper[k]);
                }
            }
            SetAtom::L2Ball { .. } => {}
            _ => {
                for (local, rhs) in atom.local_rows(s.len).unwrap() {
                    let mut full = vec![0.0; spec.dim];
                    full[s.offset..s.offset + s.len].copy_from_slice(&local);
                    lp.add_ineq(full, rhs);
                }
            }
        }
    }
    collapse_equalities(&mut lp);
    lp
}

/// Rewrites row pairs `a.x <= b` and `-a.x <= -b` as one equality row.
fn collapse_equalities(lp: &mut LinearProgram) {
    let rows = lp.ineq.to_rows();
    let rhs = lp.ineq_rhs.clone();
    let n = rows.len();
    let mut used = vec![false; n];
    let mut keep_ineq: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mut matched = false;
        for j in i + 1..n {
            if used[j] {
                continue;
            }
            if rhs[i] + rhs[j] == 0.0
                && rows[i].iter().zip(&rows[j]).all(|(a, b)| a + b == 0.0)
            {
                used[i] = true;
                used[j] = true;
                lp.add_eq(rows[i].clone(), rhs[i]);
                matched = true;
                break;
            }
        }
        if !matched {
            keep_ineq.push((rows[i].clone(), rhs[i]));
            used[i] = true;
        }
    }
    lp.ineq = crate::linalg::Mat::zeros(0, lp.num_vars());
    lp.ineq_rhs.clear();
    for (row, b) in keep_ineq {
        lp.add_ineq(row, b);
    }
}

fn maximize_over_rows(spec: &UncertaintySpec, c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let sol = solve_lp(&lp_over_rows(spec, c))?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.primal)),
        LpStatus::Unbounded => Err(Error::UnboundedDirection),
        LpStatus::Infeasible => Err(Error::EmptyCoupledSet),
    }
}

/// A single ball covering the whole space and no polyhedral atoms.
fn pure_ball_closed_form(
    spec: &UncertaintySpec,
    c: &[f64],
    balls: &[(Scope, f64)],
) -> Option<(f64, Vec<f64>)> {
    let polyhedral = spec
        .scoped_atoms()
        .any(|(_, a)| !matches!(a, SetAtom::L2Ball { .. }));
    if polyhedral || balls.len() != 1 || balls[0].0.len != spec.dim {
        return None;
    }
    let radius = balls[0].1;
    let n = norm2(c);
    if n < 1e-300 {
        return Some((0.0, vec![0.0; spec.dim]));
    }
    Some((radius * n, c.iter().map(|v| v * radius / n).collect()))
}

/// Bisection on the ball multiplier for sets whose polyhedral part is made of
/// box atoms only and whose single ball spans the full space:
/// `u_j(lam) = clamp(c_j / (2 lam), box)` is monotone in `lam`.
fn box_ball_bisection(
    spec: &UncertaintySpec,
    c: &[f64],
    balls: &[(Scope, f64)],
) -> Result<Option<(f64, Vec<f64>)>> {
    let boxes_only = spec
        .scoped_atoms()
        .all(|(_, a)| matches!(a, SetAtom::Box { .. } | SetAtom::L2Ball { .. }));
    if !boxes_only || balls.len() != 1 || balls[0].0.len != spec.dim {
        return Ok(None);
    }
    let radius = balls[0].1;
    let mut lo = vec![NEG_INF; spec.dim];
    let mut hi = vec![INF; spec.dim];
    for (s, atom) in spec.scoped_atoms() {
        if let SetAtom::Box { lower, upper } = atom {
            for j in 0..s.len {
                lo[s.offset + j] = lo[s.offset + j].max(lower[j]);
                hi[s.offset + j] = hi[s.offset + j].min(upper[j]);
            }
        }
    }
    let clamp = |v: f64, j: usize| v.max(lo[j]).min(hi[j]);
    let point = |lam: f64| -> Vec<f64> {
        (0..spec.dim)
            .map(|j| {
                let raw = if lam > 0.0 {
                    c[j] / (2.0 * lam)
                } else if c[j] > 0.0 {
                    INF
                } else if c[j] < 0.0 {
                    NEG_INF
                } else {
                    0.0
                };
                clamp(raw, j)
            })
            .collect()
    };
    let u0 = point(0.0);
    if !u0.iter().all(|v| v.is_finite()) {
        // Box unbounded in an improving direction; only the ball bounds it.
        // Fall through to the cut loop which handles the general case.
        return Ok(None);
    }
    if norm2(&u0) <= radius * (1.0 + BALL_TOL) {
        return Ok(Some((dot(c, &u0), u0)));
    }
    let mut lam_hi = norm2(c).max(1e-12) / (2.0 * radius);
    while norm2(&point(lam_hi)) > radius {
        lam_hi *= 2.0;
        if lam_hi > 1e300 {
            // Shrinking toward clamp(0, box) never reaches the ball.
            return Err(Error::EmptyCoupledSet);
        }
    }
    let (mut a, mut b) = (0.0f64, lam_hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if norm2(&point(mid)) > radius {
            a = mid;
        } else {
            b = mid;
        }
    }
    let u = point(b);
    Ok(Some((dot(c, &u), u)))
}

/// Outer approximation: maximize over the polyhedral rows plus accumulated
/// ball tangents, adding a tangent at the violated scaled point each round.
fn kelley_maximize(
    spec: &UncertaintySpec,
    c: &[f64],
    balls: &[(Scope, f64)],
) -> Result<(f64, Vec<f64>)> {
    let mut lp = lp_over_rows(spec, c);
    // Seed axis tangents so pure-ball scopes are bounded from the start.
    for &(s, radius) in balls {
        for j in s.offset..s.offset + s.len {
            let mut row = vec![0.0; spec.dim];
            row[j] = 1.0;
            lp.add_ineq(row.clone(), radius);
            row[j] = -1.0;
            lp.add_ineq(row, radius);
        }
    }
    for _ in 0..KELLEY_MAX_ITER {
        let sol = solve_lp(&lp)?;
        let u = match sol.status {
            LpStatus::Optimal => sol.primal,
            LpStatus::Infeasible => return Err(Error::EmptyCoupledSet),
            LpStatus::Unbounded => return Err(Error::UnboundedDirection),
        };
        let mut worst: Option<(f64, Vec<f64>, f64)> = None;
        for &(s, radius) in balls {
            let part = &u[s.offset..s.offset + s.len];
            let n = norm2(part);
            let viol = n - radius;
            if viol > BALL_TOL * radius.max(1.0)
                && worst.as_ref().is_none_or(|w| viol > w.0)
            {
                let mut row = vec![0.0; spec.dim];
                for (j, v) in part.iter().enumerate() {
                    row[s.offset + j] = v / n;
                }
                worst = Some((viol, row, radius));
            }
        }
        match worst {
            None => return Ok((dot(c, &u), u)),
            Some((_, row, radius)) => lp.add_ineq(row, radius),
        }
    }
    Err(Error::IterationLimit(KELLEY_MAX_ITER))
}

/// `max { t >= 0 : t v in set } = 1 / gauge(set, v)`, with `1/0 = inf`.
pub fn max_scaling_of_point_into(v: &[f64], spec: &UncertaintySpec) -> Result<f64> {
    let g = spec.gauge(v)?;
    if g <= 0.0 {
        Ok(INF)
    } else {
        Ok(1.0 / g)
    }
}

/// `max { t >= 0 : t v <= s for some s in set }`, the scaling of `v` into the
/// down-hull of the set, computed on the lifted system without materializing
/// the hull. Requires `v >= 0` and the set to meet the nonnegative orthant.
pub fn max_scaling_into_down_hull(v: &[f64], spec: &UncertaintySpec) -> Result<f64> {
    if v.iter().any(|x| *x < -1e-12) {
        return Err(Error::NotInNonnegativeOrthant);
    }
    if v.iter().all(|x| x.abs() <= 1e-300) {
        return Ok(INF);
    }
    // Variables (t, s): maximize t s.t. t v - s <= 0, s in set, t >= 0.
    let lifted = lift_spec(spec);
    let mut c = vec![0.0; spec.dim + 1];
    c[0] = 1.0;
    let mut with_link = lifted;
    for j in 0..spec.dim {
        if v[j] != 0.0 {
            let mut row = vec![0.0; spec.dim + 1];
            row[0] = v[j];
            row[j + 1] = -1.0;
            with_link.coupling_atoms.push(SetAtom::Halfspaces { a: vec![row], b: vec![0.0] });
        }
    }
    let mut nonneg = vec![0.0; spec.dim + 1];
    nonneg[0] = -1.0;
    with_link
        .coupling_atoms
        .push(SetAtom::Halfspaces { a: vec![nonneg], b: vec![0.0] });
    match maximize_linear(&with_link, &c) {
        Ok((t, _)) => Ok(t),
        Err(Error::UnboundedDirection) => Ok(INF),
        Err(e) => Err(e),
    }
}

/// Re-scopes a spec over variables `(t, s)` where `s` are the original
/// coordinates shifted right by one.
fn lift_spec(spec: &UncertaintySpec) -> UncertaintySpec {
    let dim = spec.dim + 1;
    let mut blocks = vec![(0usize, 1usize)];
    blocks.extend(spec.blocks.iter().map(|&(o, l)| (o + 1, l)));
    let mut cw_atoms: Vec<Vec<SetAtom>> = vec![Vec::new()];
    cw_atoms.extend(spec.cw_atoms.clone());
    let coupling_atoms = spec
        .coupling_atoms
        .iter()
        .map(|atom| embed_atom(atom, spec.dim, 1, dim))
        .collect();
    UncertaintySpec { dim, blocks, cw_atoms, coupling_atoms }
}

/// Embeds an atom over `len` coordinates at `offset` into a `dim`-space atom.
fn embed_atom(atom: &SetAtom, len: usize, offset: usize, dim: usize) -> SetAtom {
    let widen = |row: &[f64]| {
        let mut full = vec![0.0; dim];
        full[offset..offset + len].copy_from_slice(row);
        full
    };
    match atom {
        SetAtom::Halfspaces { a, b } => SetAtom::Halfspaces {
            a: a.iter().map(|r| widen(r)).collect(),
            b: b.clone(),
        },
        SetAtom::Budget { weights, limit } => {
            SetAtom::Halfspaces { a: vec![widen(weights)], b: vec![*limit] }
        }
        SetAtom::Box { lower, upper } => {
            let mut lo = vec![NEG_INF; dim];
            let mut hi = vec![INF; dim];
            lo[offset..offset + len].copy_from_slice(lower);
            hi[offset..offset + len].copy_from_slice(upper);
            SetAtom::Box { lower: lo, upper: hi }
        }
        SetAtom::L2Ball { .. } => unreachable!("ball atoms keep their scopes"),
    }
}

/// Chebyshev center: the deepest point with respect to the polyhedral rows,
/// with ball atoms linearized by tangent cuts. Returns `(center, radius)`.
pub fn chebyshev_center(spec: &UncertaintySpec) -> Result<(Vec<f64>, f64)> {
    let (a, b) = spec.polyhedral_rows();
    let n = spec.dim;
    let mut lp = LinearProgram::maximize({
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        c
    });
    for i in 0..a.rows {
        let mut row = a.row(i).to_vec();
        row.push(crate::linalg::norm2(a.row(i)));
        lp.add_ineq(row, b[i]);
    }
    lp.set_bounds(n, 0.0, INF);
    let balls = spec.balls();
    for &(s, radius) in &balls {
        for j in s.offset..s.offset + s.len {
            for sign in [1.0, -1.0] {
                let mut row = vec![0.0; n + 1];
                row[j] = sign;
                row[n] = 1.0;
                lp.add_ineq(row, radius);
            }
        }
    }
    for _ in 0..KELLEY_MAX_ITER {
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Infeasible => return Err(Error::EmptyInterior),
            LpStatus::Unbounded => return Err(Error::UnboundedPolyhedron),
            LpStatus::Optimal => {}
        }
        let center = sol.primal[..n].to_vec();
        let r = sol.primal[n];
        let mut violated = false;
        for &(s, radius) in &balls {
            let part = &center[s.offset..s.offset + s.len];
            let nn = norm2(part);
            if nn + r > radius + 1e-10 {
                if nn < 1e-12 {
                    continue; // center at the ball origin: r <= radius holds
                }
                let mut row = vec![0.0; n + 1];
                for (j, v) in part.iter().enumerate() {
                    row[s.offset + j] = v / nn;
                }
                row[n] = 1.0;
                lp.add_ineq(row, radius);
                violated = true;
            }
        }
        if !violated {
            if r <= 1e-9 {
                return Err(Error::EmptyInterior);
            }
            return Ok((center, r));
        }
    }
    Err(Error::IterationLimit(KELLEY_MAX_ITER))
}

/// Nonemptiness test. Without balls this is a phase-1 LP. With balls we
/// minimize the violated ball's squared norm over the remaining constraints
/// by Frank-Wolfe, whose linear subproblems the engine can already solve; the
/// Frank-Wolfe gap certifies emptiness.
pub(super) fn spec_is_nonempty(spec: &UncertaintySpec) -> Result<bool> {
    let balls = spec.balls();
    let zero = vec![0.0; spec.dim];
    if balls.is_empty() {
        return match maximize_over_rows(spec, &zero) {
            Ok(_) => Ok(true),
            Err(Error::EmptyCoupledSet) => Ok(false),
            Err(e) => Err(e),
        };
    }
    // Relaxation without the balls (dropping a constraint keeps feasibility
    // necessary).
    let mut relaxed = spec.clone();
    for atoms in relaxed.cw_atoms.iter_mut() {
        atoms.retain(|a| !matches!(a, SetAtom::L2Ball { .. }));
    }
    relaxed.coupling_atoms.retain(|a| !matches!(a, SetAtom::L2Ball { .. }));
    let mut u = match maximize_over_rows(&relaxed, &zero) {
        Ok((_, u)) => u,
        Err(Error::EmptyCoupledSet) => return Ok(false),
        Err(Error::UnboundedDirection) => unreachable!("zero objective"),
        Err(e) => return Err(e),
    };
    // Frank-Wolfe on f(u) = sum over balls of max(0, ||u_S||^2 - r^2).
    for _ in 0..5000 {
        if spec.membership(&u, 1e-7)? {
            return Ok(true);
        }
        let mut grad = vec![0.0; spec.dim];
        let mut active = false;
        for &(s, radius) in &balls {
            let part = &u[s.offset..s.offset + s.len];
            if norm2(part) > radius {
                active = true;
                for (j, v) in part.iter().enumerate() {
                    grad[s.offset + j] += 2.0 * v;
                }
            }
        }
        if !active {
            return Ok(true);
        }
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let (_, s) = match maximize_over_rows(&relaxed, &neg) {
            Ok(v) => v,
            Err(Error::UnboundedDirection) => {
                // Walk a bounded step along the improving ray instead.
                let dir: Vec<f64> = neg.iter().map(|g| g.signum()).collect();
                (0.0, crate::linalg::add(&u, &dir))
            }
            Err(e) => return Err(e),
        };
        let d = sub(&s, &u);
        // Exact line search for the quadratic objective on [0, 1].
        let mut num = 0.0;
        let mut den = 0.0;
        for &(sc, radius) in &balls {
            let up = &u[sc.offset..sc.offset + sc.len];
            if norm2(up) <= radius {
                continue;
            }
            let dp = &d[sc.offset..sc.offset + sc.len];
            num += -dot(up, dp);
            den += dot(dp, dp);
        }
        if den < 1e-300 {
            break;
        }
        let step = (num / den).clamp(0.0, 1.0);
        if step <= 1e-16 {
            break;
        }
        for j in 0..spec.dim {
            u[j] += step * d[j];
        }
    }
    // Converged without reaching the balls: compare the certified minimum
    // norm against each radius.
    for &(s, radius) in &balls {
        let part = &u[s.offset..s.offset + s.len];
        if norm2(part) > radius + 1e-6 {
            return Ok(false);
        }
    }
    Ok(spec.membership(&u, 1e-6)?)
}
