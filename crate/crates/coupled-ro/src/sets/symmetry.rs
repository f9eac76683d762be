//! Symmetry point of a polytope.
//!
//! `sym(u, P) = max { alpha >= 0 : u + alpha (u - v) in P for all v in P }`.
//! Over a polytope the quantifier reduces to the vertices, and for a fixed
//! `alpha` the feasible-`u` region is the polyhedron
//! `(1 + alpha) a_k . u <= b_k + alpha min_j a_k . v_j`, which shrinks as
//! `alpha` grows. The maximizer is found by bisection on `alpha` with an
//! inner feasibility LP.

use super::polyhedron::Polyhedron;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Mat};
use crate::lp::{solve_lp, LinearProgram, LpStatus, INF};

/// Returns the point of maximum symmetry and its symmetry value.
pub fn symmetry_point(p: &Polyhedron) -> Result<(Vec<f64>, f64)> {
    let verts = p.enumerate_vertices()?;
    if verts.is_empty() {
        return Err(Error::EmptyCoupledSet);
    }
    let rows = p.canonicalize()?;
    if rows.is_marked_empty() {
        return Err(Error::EmptyCoupledSet);
    }
    // min over vertices of a_k . v, per row.
    let row_mins: Vec<f64> = rows
        .a
        .iter()
        .map(|a| {
            verts
                .points
                .iter()
                .map(|v| dot(a, v))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    // Deepest feasible point at a given alpha (max-slack LP); None if empty.
    let deepest = |alpha: f64| -> Result<Option<Vec<f64>>> {
        let d = rows.dim();
        let mut lp = LinearProgram::maximize({
            let mut c = vec![0.0; d + 1];
            c[d] = 1.0;
            c
        });
        lp.set_bounds(d, 0.0, INF);
        let mut ineq = Mat::zeros(0, d + 1);
        let mut rhs = Vec::new();
        for (k, a) in rows.a.iter().enumerate() {
            let mut r: Vec<f64> = a.iter().map(|v| v * (1.0 + alpha)).collect();
            r.push(norm2(a));
            ineq.push_row(&r);
            rhs.push(rows.b[k] + alpha * row_mins[k]);
        }
        lp.ineq = ineq;
        lp.ineq_rhs = rhs;
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(sol.primal[..d].to_vec())),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::UnboundedPolyhedron),
        }
    };

    // sym <= 1 always, with equality for centrally symmetric bodies.
    let mut best = deepest(0.0)?.ok_or(Error::EmptyCoupledSet)?;
    if let Some(u) = deepest(1.0)? {
        return Ok((u, 1.0));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match deepest(mid)? {
            Some(u) => {
                best = u;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    Ok((best, lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn box_center_has_symmetry_one() {
        let p = Polyhedron::from_bounds(&[0.0, 0.0], &[1.0, 1.0]);
        let (u, s) = symmetry_point(&p).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
        assert!((u[0] - 0.5).abs() < 1e-6 && (u[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn segment_midpoint_has_symmetry_one() {
        // [0,1] x {0}
        let p = Polyhedron::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0, 0.0, 0.0, 0.0],
        );
        let (u, s) = symmetry_point(&p).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
        assert!((u[0] - 0.5).abs() < 1e-6 && u[1].abs() < 1e-6);
    }

    /// Grid-search oracle for sym on the 2d simplex.
    fn sym_at(p: &Polyhedron, u: &[f64], verts: &[Vec<f64>]) -> f64 {
        let mut alpha: f64 = 2.0;
        for v in verts {
            // largest a with u + a (u - v) in P, by bisection on membership
            let (mut lo, mut hi) = (0.0f64, 2.0f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let q: Vec<f64> =
                    u.iter().zip(v).map(|(ui, vi)| ui + mid * (ui - vi)).collect();
                if p.membership(&q, 1e-12).unwrap() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            alpha = alpha.min(lo);
        }
        alpha
    }

    #[test]
    fn simplex_symmetry_matches_grid_search() {
        let p = Polyhedron::new(
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            vec![0.0, 0.0, 1.0],
        );
        let (u, s) = symmetry_point(&p).unwrap();
        assert!((s - 0.5).abs() < 1e-6, "simplex symmetry should be 1/2, got {s}");
        let verts = p.enumerate_vertices().unwrap().points;
        // No grid point beats the reported value.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut best = 0.0f64;
        for _ in 0..500 {
            let a = rng.gen_range(0.0..1.0);
            let b = rng.gen_range(0.0..1.0 - a);
            best = best.max(sym_at(&p, &[a, b], &verts));
        }
        assert!(best <= s + 1e-6);
        assert!((sym_at(&p, &u, &verts) - s).abs() < 1e-6);
    }
}
