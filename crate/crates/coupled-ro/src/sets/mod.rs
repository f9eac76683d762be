//! Uncertainty sets: constraint-wise atoms, coupling, and the geometry
//! engine built on top of them (projection, down-hulls, vertex enumeration,
//! gauges, support functions, symmetry points, sampling).

mod optimize;
mod polyhedron;
mod sample;
mod symmetry;

pub use optimize::{
    chebyshev_center, max_scaling_into_down_hull, max_scaling_of_point_into, maximize_linear,
    support_function,
};
pub use polyhedron::{Polyhedron, VertexList};
pub use sample::hit_and_run_sample;
pub use symmetry::symmetry_point;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::linalg::Mat;
use serde::{Deserialize, Serialize};

/// One convex piece of an uncertainty set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SetAtom {
    /// `{u : a u <= b}`
    Halfspaces { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// `{u : lower <= u <= upper}`
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{u : weights . u <= limit}`, weights nonnegative
    Budget { weights: Vec<f64>, limit: f64 },
    /// `{u : ||u||_2 <= radius}`, centered at the origin
    L2Ball { radius: f64 },
}

impl SetAtom {
    pub fn unit_box(dim: usize) -> SetAtom {
        SetAtom::Box { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SetAtom::Halfspaces { a, .. } => a.first().map(|r| r.len()),
            SetAtom::Box { lower, .. } => Some(lower.len()),
            SetAtom::Budget { weights, .. } => Some(weights.len()),
            SetAtom::L2Ball { .. } => None, // any dimension
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::DimensionMismatch(msg.to_string()));
        match self {
            SetAtom::Halfspaces { a, b } => {
                if a.len() != b.len() || a.iter().any(|r| r.len() != dim) {
                    return bad("halfspace system shape");
                }
                if a.iter().flatten().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
                    return Err(Error::MalformedProgram("non-finite halfspace entry".into()));
                }
            }
            SetAtom::Box { lower, upper } => {
                if lower.len() != dim || upper.len() != dim {
                    return bad("box bounds length");
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l <= u)) {
                    return Err(Error::MalformedProgram("box lower > upper".into()));
                }
            }
            SetAtom::Budget { weights, limit } => {
                if weights.len() != dim {
                    return bad("budget weights length");
                }
                if weights.iter().any(|w| *w < 0.0) || !limit.is_finite() {
                    return Err(Error::MalformedProgram("budget weights must be >= 0".into()));
                }
            }
            SetAtom::L2Ball { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::MalformedProgram("ball radius must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Halfspace rows `(a, b)` over `dim` local coordinates; `None` for balls.
    pub(crate) fn local_rows(&self, dim: usize) -> Option<Vec<(Vec<f64>, f64)>> {
        match self {
            SetAtom::Halfspaces { a, b } => {
                Some(a.iter().cloned().zip(b.iter().copied()).collect())
            }
            SetAtom::Box { lower, upper } => {
                let mut rows = Vec::new();
                for j in 0..dim {
                    let mut e = vec![0.0; dim];
                    e[j] = 1.0;
                    if upper[j].is_finite() {
                        rows.push((e.clone(), upper[j]));
                    }
                    if lower[j].is_finite() {
                        let neg: Vec<f64> = e.iter().map(|v| -v).collect();
                        rows.push((neg, -lower[j]));
                    }
                }
                Some(rows)
            }
            SetAtom::Budget { weights, limit } => Some(vec![(weights.clone(), *limit)]),
            SetAtom::L2Ball { .. } => None,
        }
    }

    fn membership(&self, u: &[f64], tol: f64) -> bool {
        match self {
            SetAtom::Halfspaces { a, b } => a
                .iter()
                .zip(b)
                .all(|(row, rhs)| dot(row, u) <= rhs + tol),
            SetAtom::Box { lower, upper } => u
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, up))| *v >= l - tol && *v <= up + tol),
            SetAtom::Budget { weights, limit } => dot(weights, u) <= limit + tol,
            SetAtom::L2Ball { radius } => norm2(u) <= radius + tol,
        }
    }

    /// Contribution of this atom to `gauge(set, w) = min { g >= 0 : w in g set }`.
    /// Requires the origin to be contained in the atom.
    fn gauge_contrib(&self, w: &[f64]) -> Result<f64> {
        let ratio = |num: f64, den: f64| -> Result<f64> {
            if den > 1e-300 {
                Ok((num / den).max(0.0))
            } else if num > 1e-9 {
                Ok(f64::INFINITY)
            } else if den < -1e-12 {
                Err(Error::OriginNotContained)
            } else {
                Ok(0.0)
            }
        };
        match self {
            SetAtom::Halfspaces { a, b } => {
                let mut g: f64 = 0.0;
                for (row, rhs) in a.iter().zip(b) {
                    g = g.max(ratio(dot(row, w), *rhs)?);
                }
                Ok(g)
            }
            SetAtom::Box { lower, upper } => {
                let mut g: f64 = 0.0;
                for j in 0..w.len() {
                    if w[j] > 0.0 {
                        g = g.max(ratio(w[j], upper[j])?);
                    } else if w[j] < 0.0 {
                        g = g.max(ratio(-w[j], -lower[j])?);
                    }
                }
                Ok(g)
            }
            SetAtom::Budget { weights, limit } => ratio(dot(weights, w), *limit),
            SetAtom::L2Ball { radius } => Ok(norm2(w) / radius),
        }
    }

    /// The atom is down-closed within the nonnegative orthant.
    fn is_monotone(&self) -> bool {
        match self {
            SetAtom::Box { lower, .. } => lower.iter().all(|l| *l <= 0.0),
            SetAtom::Budget { .. } | SetAtom::L2Ball { .. } => true,
            SetAtom::Halfspaces { a, .. } => a.iter().flatten().all(|v| *v >= 0.0),
        }
    }

    /// Upper bound on `t` so that `t * u` stays inside the atom (`u` inside).
    fn ray_upper(&self, u: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        match self {
            SetAtom::L2Ball { radius } => {
                let n = norm2(u);
                if n > 1e-300 {
                    t = radius / n;
                }
            }
            _ => {
                for (row, rhs) in self.local_rows(u.len()).unwrap() {
                    let s = dot(&row, u);
                    if s > 1e-12 {
                        t = t.min(rhs / s);
                    }
                }
            }
        }
        t
    }

    /// Translates the atom by `-shift` (so that points move to `u - shift`).
    fn translated(&self, shift: &[f64]) -> SetAtom {
        match self {
            SetAtom::Halfspaces { a, b } => SetAtom::Halfspaces {
                a: a.clone(),
                b: a.iter().zip(b).map(|(row, rhs)| rhs - dot(row, shift)).collect(),
            },
            SetAtom::Box { lower, upper } => SetAtom::Box {
                lower: lower.iter().zip(shift).map(|(l, s)| l - s).collect(),
                upper: upper.iter().zip(shift).map(|(u, s)| u - s).collect(),
            },
            SetAtom::Budget { weights, limit } => SetAtom::Budget {
                weights: weights.clone(),
                limit: limit - dot(weights, shift),
            },
            SetAtom::L2Ball { radius } => {
                // A translated ball is no longer origin-centered; callers must
                // not translate specs with ball atoms by nonzero shifts.
                assert!(
                    shift.iter().all(|s| s.abs() < 1e-12),
                    "cannot translate an origin-centered ball"
                );
                SetAtom::L2Ball { radius: *radius }
            }
        }
    }
}

/// An atom together with the coordinate slice it constrains.
#[derive(Debug, Clone, Copy)]
pub struct Scope {
    pub offset: usize,
    pub len: usize,
}

/// A constraint-wise product of per-block sets intersected with coupling
/// atoms over the full space.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UncertaintySpec {
    pub dim: usize,
    /// `(offset, length)` per block; blocks partition `[0, dim)`.
    pub blocks: Vec<(usize, usize)>,
    /// Constraint-wise atoms, one list per block, over block coordinates.
    pub cw_atoms: Vec<Vec<SetAtom>>,
    /// Coupling atoms over the full space.
    pub coupling_atoms: Vec<SetAtom>,
}

impl UncertaintySpec {
    /// Scalar blocks `1 x ... x 1` over `dim` coordinates, one atom list each.
    pub fn scalar_blocks(dim: usize, cw_atoms: Vec<Vec<SetAtom>>) -> Self {
        UncertaintySpec {
            dim,
            blocks: (0..dim).map(|i| (i, 1)).collect(),
            cw_atoms,
            coupling_atoms: Vec::new(),
        }
    }

    /// A single full-dimensional block described by one atom.
    pub fn from_atom(dim: usize, atom: SetAtom) -> Self {
        UncertaintySpec {
            dim,
            blocks: vec![(0, dim)],
            cw_atoms: vec![vec![atom]],
            coupling_atoms: Vec::new(),
        }
    }

    /// A box `[0,1]^dim` split into scalar blocks (the common RHS layout).
    pub fn unit_box_scalar(dim: usize) -> Self {
        let atoms = (0..dim)
            .map(|_| vec![SetAtom::Box { lower: vec![0.0], upper: vec![1.0] }])
            .collect();
        UncertaintySpec::scalar_blocks(dim, atoms)
    }

    pub fn validate(&self) -> Result<()> {
        let mut covered = vec![false; self.dim];
        for &(off, len) in &self.blocks {
            if off + len > self.dim || len == 0 {
                return Err(Error::DimensionMismatch("block out of range".into()));
            }
            for c in covered.iter_mut().skip(off).take(len) {
                if *c {
                    return Err(Error::DimensionMismatch("blocks overlap".into()));
                }
                *c = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::DimensionMismatch("blocks do not cover the space".into()));
        }
        if self.cw_atoms.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch("one atom list per block required".into()));
        }
        for (atoms, &(_, len)) in self.cw_atoms.iter().zip(&self.blocks) {
            for atom in atoms {
                atom.validate(len)?;
            }
        }
        for atom in &self.coupling_atoms {
            atom.validate(self.dim)?;
        }
        Ok(())
    }

    /// All atoms with their scopes: per-block atoms first, then coupling.
    pub fn scoped_atoms(&self) -> impl Iterator<Item = (Scope, &SetAtom)> {
        self.blocks
            .iter()
            .zip(&self.cw_atoms)
            .flat_map(|(&(offset, len), atoms)| {
                atoms.iter().map(move |a| (Scope { offset, len }, a))
            })
            .chain(
                self.coupling_atoms
                    .iter()
                    .map(move |a| (Scope { offset: 0, len: self.dim }, a)),
            )
    }

    pub fn membership(&self, u: &[f64], tol: f64) -> Result<bool> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point has dimension {}, set has {}",
                u.len(),
                self.dim
            )));
        }
        Ok(self
            .scoped_atoms()
            .all(|(s, atom)| atom.membership(&u[s.offset..s.offset + s.len], tol)))
    }

    pub fn has_ball(&self) -> bool {
        self.scoped_atoms().any(|(_, a)| matches!(a, SetAtom::L2Ball { .. }))
    }

    /// Ball atoms with their scopes.
    pub fn balls(&self) -> Vec<(Scope, f64)> {
        self.scoped_atoms()
            .filter_map(|(s, a)| match a {
                SetAtom::L2Ball { radius } => Some((s, *radius)),
                _ => None,
            })
            .collect()
    }

    /// All polyhedral rows embedded in the full space.
    pub fn polyhedral_rows(&self) -> (Mat, Vec<f64>) {
        let mut a = Mat::zeros(0, self.dim);
        let mut b = Vec::new();
        for (s, atom) in self.scoped_atoms() {
            if let Some(rows) = atom.local_rows(s.len) {
                for (local, rhs) in rows {
                    let mut full = vec![0.0; self.dim];
                    full[s.offset..s.offset + s.len].copy_from_slice(&local);
                    a.push_row(&full);
                    b.push(rhs);
                }
            }
        }
        (a, b)
    }

    /// H-representation of the whole set; errors when a ball atom is present.
    pub fn to_polyhedron(&self) -> Result<Polyhedron> {
        if self.has_ball() {
            return Err(Error::NonPolyhedralAtomInRc);
        }
        let (a, b) = self.polyhedral_rows();
        Ok(Polyhedron { a: a.to_rows(), b })
    }

    /// `min { g >= 0 : w in g * set }`; requires the origin inside the set.
    pub fn gauge(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch("gauge point dimension".into()));
        }
        let mut g: f64 = 0.0;
        for (s, atom) in self.scoped_atoms() {
            g = g.max(atom.gauge_contrib(&w[s.offset..s.offset + s.len])?);
        }
        Ok(g)
    }

    /// Appends coupling atoms, failing when the result is empty.
    pub fn intersect(&self, coupling: Vec<SetAtom>) -> Result<UncertaintySpec> {
        let mut out = self.clone();
        out.coupling_atoms.extend(coupling);
        out.validate()?;
        if !out.is_nonempty()? {
            return Err(Error::EmptyCoupledSet);
        }
        Ok(out)
    }

    /// Drops all coupling atoms (the constraint-wise relaxation `U`).
    pub fn constraint_wise(&self) -> UncertaintySpec {
        UncertaintySpec { coupling_atoms: Vec::new(), ..self.clone() }
    }

    /// Feasibility check. Polyhedral sets use a phase-1 LP; sets with ball
    /// atoms run Frank-Wolfe on `||u||^2` over the polyhedral part, with the
    /// duality gap certifying emptiness when the minimum norm exceeds a radius.
    pub fn is_nonempty(&self) -> Result<bool> {
        optimize::spec_is_nonempty(self)
    }

    /// Upper bound of the set in every coordinate direction;
    /// `Err(UnboundedDirection)` when some coordinate is unbounded above.
    pub fn coordinate_maxima(&self) -> Result<Vec<f64>> {
        (0..self.dim)
            .map(|j| {
                let mut e = vec![0.0; self.dim];
                e[j] = 1.0;
                maximize_linear(self, &e).map(|(v, _)| v)
            })
            .collect()
    }

    /// The set is already its own down-hull inside the nonnegative orthant:
    /// all atoms monotone and some box atom pins `u >= 0` on every coordinate.
    pub fn is_down_closed_in_orthant(&self) -> bool {
        if !self.scoped_atoms().all(|(_, a)| a.is_monotone()) {
            return false;
        }
        let mut floored = vec![false; self.dim];
        for (s, atom) in self.scoped_atoms() {
            if let SetAtom::Box { lower, .. } = atom {
                for (j, l) in lower.iter().enumerate() {
                    if *l == 0.0 {
                        floored[s.offset + j] = true;
                    }
                }
            }
        }
        floored.into_iter().all(|f| f)
    }

    /// Translates the set by `-shift`. Fails when a ball atom would move off
    /// the origin.
    pub fn translated(&self, shift: &[f64]) -> Result<UncertaintySpec> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch("shift dimension".into()));
        }
        let shifted_ball = self
            .balls()
            .iter()
            .any(|(s, _)| shift[s.offset..s.offset + s.len].iter().any(|v| v.abs() > 1e-12));
        if shifted_ball {
            return Err(Error::NonPolyhedralAtomInRc);
        }
        let mut out = self.clone();
        for (atoms, &(off, len)) in out.cw_atoms.iter_mut().zip(&self.blocks) {
            for atom in atoms.iter_mut() {
                *atom = atom.translated(&shift[off..off + len]);
            }
        }
        for atom in out.coupling_atoms.iter_mut() {
            *atom = atom.translated(shift);
        }
        Ok(out)
    }

    /// Largest scaling that keeps `t * u` inside the set along the ray from
    /// the origin through the member point `u`.
    pub fn ray_upper(&self, u: &[f64]) -> f64 {
        self.scoped_atoms()
            .map(|(s, atom)| atom.ray_upper(&u[s.offset..s.offset + s.len]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Removes ball atoms made redundant by the per-coordinate box ranges.
    /// Keeps everything else untouched.
    pub fn simplified(&self) -> UncertaintySpec {
        let mut lo = vec![f64::NEG_INFINITY; self.dim];
        let mut hi = vec![f64::INFINITY; self.dim];
        for (s, atom) in self.scoped_atoms() {
            if let SetAtom::Box { lower, upper } = atom {
                for j in 0..s.len {
                    lo[s.offset + j] = lo[s.offset + j].max(lower[j]);
                    hi[s.offset + j] = hi[s.offset + j].min(upper[j]);
                }
            }
        }
        let ball_redundant = |scope: &Scope, radius: f64| {
            let mut sq = 0.0;
            for j in scope.offset..scope.offset + scope.len {
                let m = lo[j].abs().max(hi[j].abs());
                if !m.is_finite() {
                    return false;
                }
                sq += m * m;
            }
            sq.sqrt() <= radius + 1e-12
        };
        let keep = |scope: &Scope, atom: &SetAtom| match atom {
            SetAtom::L2Ball { radius } => !ball_redundant(scope, *radius),
            _ => true,
        };
        let mut out = self.clone();
        for (atoms, &(off, len)) in out.cw_atoms.iter_mut().zip(&self.blocks) {
            atoms.retain(|a| keep(&Scope { offset: off, len }, a));
        }
        let full = Scope { offset: 0, len: self.dim };
        out.coupling_atoms.retain(|a| keep(&full, a));
        out
    }

    /// Like [`simplified`](Self::simplified), but also drops ball atoms whose
    /// redundancy is proven exactly: the vertex scan of the polyhedral
    /// remainder stays inside the ball. Balls that cannot be certified
    /// redundant are kept.
    pub fn without_redundant_balls(&self) -> UncertaintySpec {
        let mut out = self.simplified();
        if !out.has_ball() {
            return out;
        }
        let mut remainder = out.clone();
        for atoms in remainder.cw_atoms.iter_mut() {
            atoms.retain(|a| !matches!(a, SetAtom::L2Ball { .. }));
        }
        remainder.coupling_atoms.retain(|a| !matches!(a, SetAtom::L2Ball { .. }));
        let Ok(poly) = remainder.to_polyhedron() else {
            return out;
        };
        let Ok(verts) = poly.enumerate_vertices() else {
            return out;
        };
        if verts.is_empty() {
            return out;
        }
        let redundant = |scope: &Scope, radius: f64| {
            verts
                .points
                .iter()
                .map(|v| norm2(&v[scope.offset..scope.offset + scope.len]))
                .fold(0.0, f64::max)
                <= radius + 1e-9
        };
        for (atoms, &(off, len)) in out.cw_atoms.iter_mut().zip(&self.blocks) {
            atoms.retain(|a| match a {
                SetAtom::L2Ball { radius } => !redundant(&Scope { offset: off, len }, *radius),
                _ => true,
            });
        }
        let full = Scope { offset: 0, len: self.dim };
        out.coupling_atoms.retain(|a| match a {
            SetAtom::L2Ball { radius } => !redundant(&full, *radius),
            _ => true,
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn scenario_a(eta: f64) -> UncertaintySpec {
        UncertaintySpec::unit_box_scalar(2)
            .intersect(vec![SetAtom::Budget { weights: vec![1.0, 1.0], limit: eta }])
            .unwrap()
    }

    pub(crate) fn scenario_b(alpha: f64, beta: f64) -> UncertaintySpec {
        UncertaintySpec::unit_box_scalar(2)
            .intersect(vec![SetAtom::Halfspaces {
                a: vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
                b: vec![-alpha, beta],
            }])
            .unwrap()
    }

    #[test]
    fn membership_box() {
        let spec = UncertaintySpec::from_atom(2, SetAtom::unit_box(2));
        assert!(spec.membership(&[0.5, 0.5], 1e-9).unwrap());
        assert!(!spec.membership(&[1.5, 0.5], 1e-9).unwrap());
    }

    #[test]
    fn membership_scenario_b_excludes_corner() {
        let spec = scenario_b(0.5, 0.75);
        assert!(!spec.membership(&[1.0, 1.0], 1e-9).unwrap());
        assert!(spec.membership(&[0.25, 1.0], 1e-9).unwrap());
    }

    #[test]
    fn membership_ball_boundary() {
        let spec = UncertaintySpec::from_atom(2, SetAtom::L2Ball { radius: 1.0 });
        assert!(!spec.membership(&[1.0, 1e-3], 1e-9).unwrap());
        assert!(spec.membership(&[1.0, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn membership_dimension_mismatch() {
        let spec = UncertaintySpec::from_atom(2, SetAtom::unit_box(2));
        assert!(spec.membership(&[0.1], 1e-9).is_err());
    }

    #[test]
    fn gauge_box_and_ball() {
        let spec = UncertaintySpec::from_atom(2, SetAtom::unit_box(2));
        assert!((spec.gauge(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        let ball = UncertaintySpec::from_atom(2, SetAtom::L2Ball { radius: 2.0 });
        assert!((ball.gauge(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_budget_matches_membership_bisection() {
        // Derived by bisection on membership along the ray through w.
        let spec = UncertaintySpec::from_atom(
            2,
            SetAtom::Box { lower: vec![0.0, 0.0], upper: vec![f64::INFINITY, f64::INFINITY] },
        )
        .intersect(vec![SetAtom::Budget { weights: vec![1.0, 1.0], limit: 1.0 }])
        .unwrap();
        let w = [0.4, 0.4];
        let g = spec.gauge(&w).unwrap();
        assert!((g - 0.8).abs() < 1e-12);
        let (mut lo, mut hi) = (0.0f64, 16.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let p: Vec<f64> = w.iter().map(|v| v * mid).collect();
            if spec.membership(&p, 1e-12).unwrap() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // max scaling t = 1/gauge
        assert!((lo - 1.0 / g).abs() < 1e-8);
    }

    #[test]
    fn gauge_origin_missing_detected() {
        let spec = scenario_b(0.5, 0.75);
        assert!(matches!(spec.gauge(&[0.1, 0.6]), Err(Error::OriginNotContained)));
    }

    #[test]
    fn intersect_empty_detected() {
        let spec = UncertaintySpec::unit_box_scalar(2);
        let out = spec.intersect(vec![SetAtom::Budget { weights: vec![1.0, 1.0], limit: -1.0 }]);
        assert!(matches!(out, Err(Error::EmptyCoupledSet)));
    }

    #[test]
    fn intersect_full_space_is_identity_on_members() {
        let spec = UncertaintySpec::unit_box_scalar(2);
        let out = spec
            .intersect(vec![SetAtom::Budget { weights: vec![0.0, 0.0], limit: 0.0 }])
            .unwrap();
        for p in [[0.0, 0.0], [1.0, 1.0], [0.3, 0.9]] {
            assert_eq!(
                spec.membership(&p, 1e-9).unwrap(),
                out.membership(&p, 1e-9).unwrap()
            );
        }
    }

    #[test]
    fn down_closed_detection() {
        assert!(scenario_a(1.5).is_down_closed_in_orthant());
        assert!(!scenario_b(0.5, 0.75).is_down_closed_in_orthant());
    }

    #[test]
    fn simplify_drops_covering_ball() {
        let m = 4;
        let mut spec = UncertaintySpec::unit_box_scalar(m);
        spec.coupling_atoms.push(SetAtom::L2Ball { radius: 2.0 }); // sqrt(4) = 2
        let s = spec.simplified();
        assert!(!s.has_ball());
        let tight = UncertaintySpec::unit_box_scalar(m)
            .intersect(vec![SetAtom::L2Ball { radius: 1.9 }])
            .unwrap();
        assert!(tight.simplified().has_ball());
    }

    #[test]
    fn json_round_trip_fixed_field_names() {
        let spec = scenario_a(1.5);
        let js = serde_json::to_value(&spec).unwrap();
        assert!(js.get("dim").is_some());
        assert!(js.get("blocks").is_some());
        assert!(js.get("cw_atoms").is_some());
        assert_eq!(js["coupling_atoms"][0]["type"], "budget");
        let back: UncertaintySpec = serde_json::from_value(js).unwrap();
        assert_eq!(back, spec);
        let ball = serde_json::to_value(SetAtom::L2Ball { radius: 2.0 }).unwrap();
        assert_eq!(ball["type"], "l2ball");
        assert_eq!(ball["radius"], 2.0);
    }
}
