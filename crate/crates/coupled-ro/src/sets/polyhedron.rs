//! H-representation polyhedra: canonicalization, Fourier-Motzkin projection,
//! down-hulls, and brute-force vertex enumeration.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, Mat};
use crate::lp::{solve_lp, LinearProgram, LpStatus};

/// Hard cap on intermediate rows during Fourier-Motzkin elimination.
pub const FM_ROW_CAP: usize = 20_000;
/// Dimension cap for vertex enumeration and symmetry computations.
pub const VERTEX_DIM_CAP: usize = 12;

const FEAS_TOL: f64 = 1e-8;

/// `{ u : a u <= b }`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Polyhedron {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Enumerated vertices of a polytope.
#[derive(Debug, Clone)]
pub struct VertexList {
    pub points: Vec<Vec<f64>>,
    pub tol: f64,
}

impl Polyhedron {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        Polyhedron { a, b }
    }

    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Self {
        let d = lower.len();
        let mut p = Polyhedron::new(Vec::new(), Vec::new());
        for j in 0..d {
            let mut e = vec![0.0; d];
            if upper[j].is_finite() {
                e[j] = 1.0;
                p.a.push(e.clone());
                p.b.push(upper[j]);
            }
            if lower[j].is_finite() {
                e[j] = -1.0;
                p.a.push(e.clone());
                p.b.push(-lower[j]);
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    /// Canonical representation of an empty polyhedron.
    pub fn empty(dim: usize) -> Self {
        Polyhedron { a: vec![vec![0.0; dim]], b: vec![-1.0] }
    }

    pub fn is_marked_empty(&self) -> bool {
        self.a.len() == 1 && self.a[0].iter().all(|v| *v == 0.0) && self.b[0] < 0.0
    }

    pub fn membership(&self, u: &[f64], tol: f64) -> Result<bool> {
        if !self.a.is_empty() && u.len() != self.dim() {
            return Err(Error::DimensionMismatch("membership point".into()));
        }
        Ok(self.a.iter().zip(&self.b).all(|(row, rhs)| dot(row, u) <= rhs + tol))
    }

    pub fn maximize(&self, c: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut lp = LinearProgram::maximize(c.to_vec());
        lp.ineq = Mat::from_rows(&self.a);
        lp.ineq_rhs = self.b.clone();
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok((sol.objective, sol.primal)),
            LpStatus::Unbounded => Err(Error::UnboundedPolyhedron),
            LpStatus::Infeasible => Err(Error::EmptyCoupledSet),
        }
    }

    pub fn is_bounded(&self) -> Result<bool> {
        let d = self.dim();
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; d];
                c[j] = sign;
                match self.maximize(&c) {
                    Ok(_) => {}
                    Err(Error::UnboundedPolyhedron) => return Ok(false),
                    Err(Error::EmptyCoupledSet) => return Ok(true),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(true)
    }

    /// Scales rows to unit max coefficient, drops trivial rows, dedups, and
    /// removes every row that a redundancy LP proves implied by the others.
    pub fn canonicalize(&self) -> Result<Polyhedron> {
        let mut p = self.normalized_dedup()?;
        if p.is_marked_empty() {
            return Ok(p);
        }
        // Exact prune: a row is redundant iff its max over the others stays
        // below its own rhs.
        let mut i = 0;
        while i < p.a.len() {
            if p.a.len() == 1 {
                break;
            }
            let row = p.a[i].clone();
            let rhs = p.b[i];
            let mut rest = Polyhedron {
                a: p.a
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, r)| r.clone())
                    .collect(),
                b: p.b
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, v)| *v)
                    .collect(),
            };
            // Clamp along the objective itself to keep the test LP bounded.
            rest.a.push(row.clone());
            rest.b.push(rhs + 1.0);
            let redundant = match rest.maximize(&row) {
                Ok((v, _)) => v <= rhs + 1e-9 * (1.0 + rhs.abs()),
                Err(Error::EmptyCoupledSet) => return Ok(Polyhedron::empty(self.dim())),
                Err(Error::UnboundedPolyhedron) => false,
                Err(e) => return Err(e),
            };
            if redundant {
                p.a.remove(i);
                p.b.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(p)
    }

    fn normalized_dedup(&self) -> Result<Polyhedron> {
        let mut out = Polyhedron::new(Vec::new(), Vec::new());
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let scale = norm_inf(row);
            if scale <= 1e-12 {
                if rhs < -1e-9 {
                    return Ok(Polyhedron::empty(self.dim()));
                }
                continue;
            }
            let r: Vec<f64> = row.iter().map(|v| v / scale).collect();
            let v = rhs / scale;
            // Keep only the tightest copy of duplicate directions.
            let mut dup = false;
            for (erow, erhs) in out.a.iter().zip(out.b.iter_mut()) {
                if erow.iter().zip(&r).all(|(x, y)| (x - y).abs() <= 1e-12) {
                    *erhs = erhs.min(v);
                    dup = true;
                    break;
                }
            }
            if !dup {
                out.a.push(r);
                out.b.push(v);
            }
        }
        Ok(out)
    }

    /// Exact projection onto `keep_dims` by Fourier-Motzkin elimination with
    /// redundancy pruning after every eliminated variable.
    pub fn project(&self, keep_dims: &[usize]) -> Result<Polyhedron> {
        let d = self.dim();
        let mut keep = vec![false; d];
        for &k in keep_dims {
            if k >= d {
                return Err(Error::DimensionMismatch("keep index out of range".into()));
            }
            keep[k] = true;
        }
        let mut rows: Vec<(Vec<f64>, f64)> =
            self.a.iter().cloned().zip(self.b.iter().copied()).collect();
        let mut alive: Vec<usize> = (0..d).filter(|&j| !keep[j]).collect();
        while !alive.is_empty() {
            // Eliminate the variable with the smallest pos x neg fill-in.
            let (pick, _) = alive
                .iter()
                .enumerate()
                .map(|(idx, &j)| {
                    let pos = rows.iter().filter(|(r, _)| r[j] > 1e-12).count();
                    let neg = rows.iter().filter(|(r, _)| r[j] < -1e-12).count();
                    (idx, pos * neg + pos + neg)
                })
                .min_by_key(|&(_, cost)| cost)
                .unwrap();
            let j = alive.remove(pick);
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            let mut rest = Vec::new();
            for (r, rhs) in rows {
                if r[j] > 1e-12 {
                    pos.push((r, rhs));
                } else if r[j] < -1e-12 {
                    neg.push((r, rhs));
                } else {
                    rest.push((r, rhs));
                }
            }
            for (rp, bp) in &pos {
                for (rn, bn) in &neg {
                    let cp = rp[j];
                    let cn = -rn[j];
                    let mut combo: Vec<f64> =
                        rp.iter().zip(rn).map(|(p, n)| p / cp + n / cn).collect();
                    combo[j] = 0.0;
                    rest.push((combo, bp / cp + bn / cn));
                }
            }
            if rest.len() > FM_ROW_CAP {
                return Err(Error::ProjectionBlowup { rows: rest.len(), cap: FM_ROW_CAP });
            }
            let pruned = Polyhedron {
                a: rest.iter().map(|(r, _)| r.clone()).collect(),
                b: rest.iter().map(|(_, v)| *v).collect(),
            }
            .canonicalize()?;
            if pruned.is_marked_empty() {
                return Ok(Polyhedron::empty(keep_dims.len()));
            }
            rows = pruned.a.into_iter().zip(pruned.b).collect();
        }
        // Restrict surviving rows to the kept coordinates, in caller order.
        let mut out = Polyhedron::new(Vec::new(), Vec::new());
        for (r, rhs) in rows {
            debug_assert!(
                (0..d).all(|j| keep[j] || r[j].abs() <= 1e-9),
                "eliminated variable left in row"
            );
            out.a.push(keep_dims.iter().map(|&k| r[k]).collect());
            out.b.push(rhs);
        }
        if out.a.is_empty() {
            // Whole space in the kept coordinates.
            out.a.push(vec![0.0; keep_dims.len()]);
            out.b.push(0.0);
        }
        Ok(out)
    }

    /// Down-hull `{ t >= 0 : exists s in P with t <= s }` for `P` inside the
    /// nonnegative orthant, via the lifted projection.
    pub fn down_hull(&self) -> Result<Polyhedron> {
        let d = self.dim();
        for j in 0..d {
            let mut c = vec![0.0; d];
            c[j] = -1.0;
            match self.maximize(&c) {
                Ok((v, _)) => {
                    if v > 1e-9 {
                        return Err(Error::NotInNonnegativeOrthant);
                    }
                }
                Err(Error::EmptyCoupledSet) => return Ok(Polyhedron::empty(d)),
                Err(e) => return Err(e),
            }
        }
        // Variables (t, s) in R^{2d}: t >= 0, t <= s, A s <= b; keep t.
        let mut lifted = Polyhedron::new(Vec::new(), Vec::new());
        for j in 0..d {
            let mut row = vec![0.0; 2 * d];
            row[j] = -1.0;
            lifted.a.push(row.clone());
            lifted.b.push(0.0);
            row[j] = 1.0;
            row[d + j] = -1.0;
            lifted.a.push(row);
            lifted.b.push(0.0);
        }
        for (r, &rhs) in self.a.iter().zip(&self.b) {
            let mut row = vec![0.0; 2 * d];
            row[d..].copy_from_slice(r);
            lifted.a.push(row);
            lifted.b.push(rhs);
        }
        lifted.project(&(0..d).collect::<Vec<_>>())
    }

    /// All vertices by brute force over d-subsets of rows.
    pub fn enumerate_vertices(&self) -> Result<VertexList> {
        let d = self.dim();
        if d > VERTEX_DIM_CAP {
            return Err(Error::DimensionCapExceeded { dim: d, cap: VERTEX_DIM_CAP });
        }
        if self.is_marked_empty() {
            return Ok(VertexList { points: Vec::new(), tol: FEAS_TOL });
        }
        if !self.is_bounded()? {
            return Err(Error::UnboundedPolyhedron);
        }
        let p = self.canonicalize()?;
        if p.is_marked_empty() {
            return Ok(VertexList { points: Vec::new(), tol: FEAS_TOL });
        }
        let r = p.a.len();
        if r < d {
            return Ok(VertexList { points: Vec::new(), tol: FEAS_TOL });
        }
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut idx: Vec<usize> = (0..d).collect();
        loop {
            let a = Mat::from_rows(&idx.iter().map(|&i| p.a[i].clone()).collect::<Vec<_>>());
            let rhs: Vec<f64> = idx.iter().map(|&i| p.b[i]).collect();
            if let Some(x) = crate::linalg::solve_dense(&a, &rhs, 1e-9) {
                let scale = 1.0 + norm_inf(&x);
                if p.membership(&x, FEAS_TOL * scale)?
                    && !points
                        .iter()
                        .any(|q| q.iter().zip(&x).all(|(a, b)| (a - b).abs() <= FEAS_TOL * scale))
                {
                    points.push(x);
                }
            }
            // next d-combination
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok(VertexList { points, tol: FEAS_TOL });
                }
                i -= 1;
                if idx[i] != i + r - d {
                    idx[i] += 1;
                    for k in i + 1..d {
                        idx[k] = idx[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

impl VertexList {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Max of `y . v` over the vertices.
    pub fn support(&self, y: &[f64]) -> Option<(f64, &[f64])> {
        self.points
            .iter()
            .map(|p| (dot(y, p), p.as_slice()))
            .max_by(|a, b| a.0.total_cmp(&b.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::INF;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_box(d: usize) -> Polyhedron {
        Polyhedron::from_bounds(&vec![0.0; d], &vec![1.0; d])
    }

    fn scenario_a_poly() -> Polyhedron {
        let mut p = unit_box(2);
        p.a.push(vec![1.0, 1.0]);
        p.b.push(1.5);
        p
    }

    fn scenario_b_poly() -> Polyhedron {
        let mut p = unit_box(2);
        p.a.push(vec![1.0, -1.0]);
        p.b.push(-0.5);
        p.a.push(vec![-1.0, 1.0]);
        p.b.push(0.75);
        p
    }

    #[test]
    fn canonicalize_removes_redundant_row() {
        let mut p = unit_box(2);
        p.a.push(vec![1.0, 1.0]);
        p.b.push(5.0); // implied by the box
        let c = p.canonicalize().unwrap();
        assert_eq!(c.num_rows(), 4);
    }

    #[test]
    fn project_scenario_b_down_hull_to_axis() {
        // First coordinate of the down-hull of scenario b is [0, 1/2].
        let dh = scenario_b_poly().down_hull().unwrap();
        let proj = dh.project(&[0]).unwrap();
        let (hi, _) = proj.maximize(&[1.0]).unwrap();
        let (lo, _) = proj.maximize(&[-1.0]).unwrap();
        assert!((hi - 0.5).abs() < 1e-9);
        assert!(lo.abs() < 1e-9);
    }

    #[test]
    fn project_box_to_axis() {
        let p = unit_box(3);
        let proj = p.project(&[1]).unwrap();
        let (hi, _) = proj.maximize(&[1.0]).unwrap();
        assert!((hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn project_simplex_membership_equivalence() {
        // Simplex {u >= 0, u1+u2+u3 <= 1} onto (u1, u2): sampling oracle — a
        // 2d point is in the projection iff an LP completion exists.
        let mut p = Polyhedron::from_bounds(&[0.0; 3], &[INF; 3]);
        p.a.push(vec![1.0, 1.0, 1.0]);
        p.b.push(1.0);
        let proj = p.project(&[0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let q = [rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2)];
            let inside = proj.membership(&q, 1e-9).unwrap();
            let mut lp = LinearProgram::minimize(vec![0.0]);
            lp.set_bounds(0, 0.0, INF);
            lp.add_ineq(vec![1.0], 1.0 - q[0] - q[1]);
            let feasible = q[0] >= -1e-9
                && q[1] >= -1e-9
                && q[0] + q[1] <= 1.0 + 1e-9
                && solve_lp(&lp).unwrap().status == LpStatus::Optimal;
            assert_eq!(inside, feasible, "point {q:?}");
        }
    }

    #[test]
    fn empty_projection() {
        let p = Polyhedron::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![-1.0, 0.0]);
        let proj = p.project(&[1]).unwrap();
        assert!(proj.is_marked_empty());
    }

    #[test]
    fn down_hull_of_monotone_set_is_same_set() {
        let p = scenario_a_poly();
        let dh = p.down_hull().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let q = [rng.gen_range(-0.1..1.4), rng.gen_range(-0.1..1.4)];
            assert_eq!(
                p.membership(&q, 1e-9).unwrap(),
                dh.membership(&q, 1e-9).unwrap(),
                "point {q:?}"
            );
        }
    }

    #[test]
    fn down_hull_scenario_b_is_rectangle() {
        let dh = scenario_b_poly().down_hull().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..300 {
            let q = [rng.gen_range(-0.1..1.2), rng.gen_range(-0.1..1.2)];
            let expect =
                q[0] >= -1e-9 && q[0] <= 0.5 + 1e-9 && q[1] >= -1e-9 && q[1] <= 1.0 + 1e-9;
            assert_eq!(dh.membership(&q, 1e-9).unwrap(), expect, "point {q:?}");
        }
    }

    #[test]
    fn down_hull_contains_set_and_is_idempotent() {
        let p = scenario_b_poly();
        let dh = p.down_hull().unwrap();
        let dh2 = dh.down_hull().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let q = [rng.gen_range(0.0..1.2), rng.gen_range(0.0..1.2)];
            if p.membership(&q, 1e-9).unwrap() {
                assert!(dh.membership(&q, 1e-9).unwrap());
            }
            assert_eq!(dh.membership(&q, 1e-9).unwrap(), dh2.membership(&q, 1e-9).unwrap());
        }
    }

    #[test]
    fn down_hull_of_singleton_is_box() {
        let p = Polyhedron::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0, -1.0, 1.0, -1.0],
        );
        let dh = p.down_hull().unwrap();
        for (q, expect) in
            [([0.5, 0.7], true), ([1.0, 1.0], true), ([1.1, 0.5], false), ([-0.1, 0.5], false)]
        {
            assert_eq!(dh.membership(&q, 1e-9).unwrap(), expect);
        }
    }

    #[test]
    fn down_hull_rejects_negative_set() {
        let p = Polyhedron::from_bounds(&[-1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(p.down_hull(), Err(Error::NotInNonnegativeOrthant)));
    }

    #[test]
    fn vertices_of_box() {
        let verts = unit_box(2).enumerate_vertices().unwrap();
        assert_eq!(verts.len(), 4);
        for expect in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
            assert!(verts
                .points
                .iter()
                .any(|p| p.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-9)));
        }
    }

    #[test]
    fn vertices_of_scenario_a() {
        // Brute force over active-constraint pairs gives exactly these five.
        let verts = scenario_a_poly().enumerate_vertices().unwrap();
        let expect = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.5], [0.5, 1.0]];
        assert_eq!(verts.len(), expect.len());
        for e in expect {
            assert!(verts
                .points
                .iter()
                .any(|p| p.iter().zip(&e).all(|(a, b)| (a - b).abs() < 1e-9)));
        }
    }

    #[test]
    fn vertices_empty_set() {
        let p = Polyhedron::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![-1.0, 0.0]);
        assert!(p.enumerate_vertices().unwrap().is_empty());
    }

    #[test]
    fn vertices_unbounded_rejected() {
        let p = Polyhedron::from_bounds(&[0.0, 0.0], &[1.0, INF]);
        assert!(matches!(p.enumerate_vertices(), Err(Error::UnboundedPolyhedron)));
    }

    #[test]
    fn vertex_support_matches_lp_support() {
        // Soundness: LP support over the halfspaces equals the vertex max.
        let p = scenario_b_poly();
        let verts = p.enumerate_vertices().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..60 {
            let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (lp_val, _) = p.maximize(&y).unwrap();
            let (v_val, _) = verts.support(&y).unwrap();
            assert!((lp_val - v_val).abs() < 1e-7, "dir {y:?}: {lp_val} vs {v_val}");
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let p = Polyhedron::from_bounds(&vec![0.0; 13], &vec![1.0; 13]);
        assert!(matches!(p.enumerate_vertices(), Err(Error::DimensionCapExceeded { .. })));
    }
}
