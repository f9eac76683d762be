//! Shrinkage factors and objective-improvement bounds.
//!
//! For a constraint-wise set `U` and a coupled set `Ubar = U ∩ C`, the
//! factors are
//!
//! - `rho_ro`, `gamma_ro`: largest/smallest scalings relating the per-block
//!   projections of the coupled set to the constraint-wise set,
//! - `rho_aro`, `gamma_aro`: the same relation between the sets themselves,
//! - `rho_adapt`: the scaling of the projection product back into the coupled
//!   set, which bounds the gain of adaptive over static solutions.
//!
//! Right-hand-side problems work on down-hulls (solving over a set and over
//! its down-hull is equivalent there), so every query below reduces to
//! coordinate maxima and lifted scaling LPs that never materialize the hull.
//! Coefficient problems work on the sets directly and require the origin
//! inside the coupled set, arranged by [`translate_by_symmetry_point`].

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::lp::INF;
use crate::sets::{
    hit_and_run_sample, max_scaling_into_down_hull, maximize_linear, symmetry_point, Polyhedron,
    SetAtom, UncertaintySpec,
};
use serde::{Deserialize, Serialize};

pub const NESTING_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMethod {
    ClosedForm,
    LpComputed,
}

/// Provenance per factor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FactorMethods {
    pub rho_ro: FactorMethod,
    pub gamma_ro: FactorMethod,
    pub rho_aro: FactorMethod,
    pub gamma_aro: FactorMethod,
    pub rho_adapt: FactorMethod,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShrinkageReport {
    pub rho_ro: f64,
    pub gamma_ro: f64,
    pub rho_aro: f64,
    pub gamma_aro: f64,
    pub rho_adapt: f64,
    /// RHS case: `(d_i, dbar_i)` coordinate maxima of the two down-hulls.
    /// Coefficient case: `(r_i, s_i)` per-block scaling pair.
    pub per_dim: Vec<(f64, f64)>,
    pub methods: FactorMethods,
}

/// Per-coordinate maxima of the set (equivalently of its down-hull: the
/// down-hull only adds dominated points). With `use_down_hull` the set must
/// sit in the nonnegative orthant.
pub fn projection_bounds(set: &UncertaintySpec, use_down_hull: bool) -> Result<Vec<f64>> {
    if use_down_hull {
        ensure_nonnegative(set)?;
    }
    set.coordinate_maxima()
}

fn ensure_nonnegative(set: &UncertaintySpec) -> Result<()> {
    for j in 0..set.dim {
        let mut e = vec![0.0; set.dim];
        e[j] = -1.0;
        let (v, _) = maximize_linear(set, &e)?;
        if v > 1e-9 {
            return Err(Error::NotInNonnegativeOrthant);
        }
    }
    Ok(())
}

/// Checks `inner ⊆ outer`. Exact vertex membership for polyhedral `inner`
/// within the dimension cap; Monte-Carlo otherwise. The structural fast path
/// recognizes `inner` built by appending atoms to `outer`.
pub fn check_nested(inner: &UncertaintySpec, outer: &UncertaintySpec) -> Result<()> {
    if inner.dim != outer.dim {
        return Err(Error::DimensionMismatch("nesting check".into()));
    }
    let inner_atoms: Vec<_> = inner.scoped_atoms().collect();
    let structurally_nested = outer.scoped_atoms().all(|(so, ao)| {
        inner_atoms
            .iter()
            .any(|(si, ai)| si.offset == so.offset && si.len == so.len && *ai == ao)
    });
    if structurally_nested {
        return Ok(());
    }
    if !inner.has_ball() && inner.dim <= 12 {
        if let Ok(verts) = inner.to_polyhedron()?.enumerate_vertices() {
            for v in &verts.points {
                if !outer.membership(v, 1e-7)? {
                    return Err(Error::NotNested { witness: v.clone() });
                }
            }
            return Ok(());
        }
    }
    let samples = hit_and_run_sample(inner, NESTING_SAMPLES, 0xC0FFEE, false)?;
    for s in samples {
        if !outer.membership(&s, 1e-7)? {
            return Err(Error::NotNested { witness: s });
        }
    }
    Ok(())
}

/// Shrinkage factors for the right-hand-side family (scalar blocks, sets in
/// the nonnegative orthant, `Ubar ⊆ U`). All factors are taken on down-hulls.
pub fn compute_rhs_factors(
    u: &UncertaintySpec,
    ubar: &UncertaintySpec,
) -> Result<ShrinkageReport> {
    if u.dim != ubar.dim {
        return Err(Error::DimensionMismatch("factor sets".into()));
    }
    ensure_nonnegative(u)?;
    ensure_nonnegative(ubar)?;
    check_nested(ubar, u)?;

    let d = projection_bounds(u, true)?;
    let dbar = projection_bounds(ubar, true)?;

    // Degenerate axes (zero width in U) carry no uncertainty: ratio pinned
    // to 1 and excluded from the min/max.
    let mut ratios = Vec::with_capacity(u.dim);
    for i in 0..u.dim {
        if d[i] > 1e-12 {
            ratios.push(dbar[i] / d[i]);
        }
    }
    let (rho_ro, gamma_ro) = if ratios.is_empty() {
        (1.0, 1.0)
    } else {
        (
            ratios.iter().copied().fold(INF, f64::min),
            ratios.iter().copied().fold(0.0, f64::max),
        )
    };

    // The gauge of a down-hull is monotone on the nonnegative orthant, so the
    // minimum over the corners of a box is attained at the full corner.
    let rho_aro = scaling_capped(&d, ubar)?;
    let gamma_aro = gamma_ro;
    let rho_adapt = scaling_capped(&dbar, ubar)?;

    let gauge_method = if ubar.is_down_closed_in_orthant() {
        FactorMethod::ClosedForm
    } else {
        FactorMethod::LpComputed
    };
    Ok(ShrinkageReport {
        rho_ro,
        gamma_ro,
        rho_aro,
        gamma_aro,
        rho_adapt,
        per_dim: d.into_iter().zip(dbar).collect(),
        methods: FactorMethods {
            rho_ro: FactorMethod::LpComputed,
            gamma_ro: FactorMethod::LpComputed,
            rho_aro: gauge_method,
            gamma_aro: FactorMethod::LpComputed,
            rho_adapt: gauge_method,
        },
    })
}

fn scaling_capped(corner: &[f64], ubar: &UncertaintySpec) -> Result<f64> {
    if corner.iter().all(|v| *v <= 1e-12) {
        return Ok(1.0);
    }
    let t = if ubar.is_down_closed_in_orthant() {
        let g = ubar.gauge(corner)?;
        if g <= 0.0 {
            INF
        } else {
            1.0 / g
        }
    } else {
        max_scaling_into_down_hull(corner, ubar)?
    };
    Ok(t.min(1.0))
}

/// Extreme structure of one block: an explicit vertex list or a sphere.
enum BlockExt {
    Verts(Vec<Vec<f64>>),
    Sphere(f64),
}

/// Extreme structure of a whole set: explicit points, a product of
/// independent blocks, or the diagonal embedding of one block's sphere when
/// the coupling equalizes the blocks.
enum DomainExtremes {
    Verts(Vec<Vec<f64>>),
    Blocks(Vec<(crate::sets::Scope, BlockExt)>),
    DiagSphere { radius: f64, scopes: Vec<crate::sets::Scope> },
}

/// Extremes of a block-local spec: vertices for polytopes, the sphere for a
/// lone covering ball, and the surviving side when one of the two is
/// redundant in a polytope-ball intersection.
fn local_extremes(spec: &UncertaintySpec) -> Result<BlockExt> {
    let balls = spec.balls();
    if balls.is_empty() {
        return Ok(BlockExt::Verts(spec.to_polyhedron()?.enumerate_vertices()?.points));
    }
    if balls.len() > 1 || balls[0].0.len != spec.dim {
        return Err(Error::DimensionCapExceeded { dim: spec.dim, cap: 1 });
    }
    let radius = balls[0].1;
    let (rows, rhs) = {
        let mut no_ball = spec.clone();
        for atoms in no_ball.cw_atoms.iter_mut() {
            atoms.retain(|a| !matches!(a, SetAtom::L2Ball { .. }));
        }
        no_ball.coupling_atoms.retain(|a| !matches!(a, SetAtom::L2Ball { .. }));
        let (a, b) = no_ball.polyhedral_rows();
        (a.to_rows(), b)
    };
    if rows.is_empty() {
        return Ok(BlockExt::Sphere(radius));
    }
    // Polytope part redundant against the ball?
    if rows.iter().zip(&rhs).all(|(a, b)| radius * norm2(a) <= b + 1e-9) {
        return Ok(BlockExt::Sphere(radius));
    }
    // Ball redundant against the polytope part?
    let poly = Polyhedron::new(rows, rhs);
    let verts = poly.enumerate_vertices()?;
    let maxnorm = verts.points.iter().map(|v| norm2(v)).fold(0.0, f64::max);
    if maxnorm <= radius + 1e-9 {
        return Ok(BlockExt::Verts(verts.points));
    }
    Err(Error::DimensionCapExceeded { dim: spec.dim, cap: 1 })
}

fn block_slice_spec(spec: &UncertaintySpec, block: usize) -> UncertaintySpec {
    let (_, len) = spec.blocks[block];
    UncertaintySpec {
        dim: len,
        blocks: vec![(0, len)],
        cw_atoms: vec![spec.cw_atoms[block].clone()],
        coupling_atoms: Vec::new(),
    }
}

fn domain_extremes(spec: &UncertaintySpec) -> Result<DomainExtremes> {
    if spec.coupling_atoms.is_empty() {
        let mut out = Vec::with_capacity(spec.blocks.len());
        for (i, &(offset, len)) in spec.blocks.iter().enumerate() {
            out.push((
                crate::sets::Scope { offset, len },
                local_extremes(&block_slice_spec(spec, i))?,
            ));
        }
        return Ok(DomainExtremes::Blocks(out));
    }
    if blocks_fully_equalized(spec) {
        let p = spec.blocks[0].1;
        let atoms: Vec<SetAtom> = spec.cw_atoms.iter().flatten().cloned().collect();
        let pi = UncertaintySpec {
            dim: p,
            blocks: vec![(0, p)],
            cw_atoms: vec![atoms],
            coupling_atoms: Vec::new(),
        };
        let scopes: Vec<crate::sets::Scope> = spec
            .blocks
            .iter()
            .map(|&(offset, len)| crate::sets::Scope { offset, len })
            .collect();
        return match local_extremes(&pi)? {
            BlockExt::Verts(points) => {
                let embedded = points
                    .into_iter()
                    .map(|w| {
                        let mut full = vec![0.0; spec.dim];
                        for s in &scopes {
                            full[s.offset..s.offset + s.len].copy_from_slice(&w);
                        }
                        full
                    })
                    .collect();
                Ok(DomainExtremes::Verts(embedded))
            }
            BlockExt::Sphere(radius) => Ok(DomainExtremes::DiagSphere { radius, scopes }),
        };
    }
    match local_extremes(spec)? {
        BlockExt::Verts(points) => Ok(DomainExtremes::Verts(points)),
        BlockExt::Sphere(radius) => Ok(DomainExtremes::Blocks(vec![(
            crate::sets::Scope { offset: 0, len: spec.dim },
            BlockExt::Sphere(radius),
        )])),
    }
}

/// Max of the linear functional `row . u` over the domain's extremes.
fn max_linear_over(row: &[f64], dom: &DomainExtremes) -> f64 {
    match dom {
        DomainExtremes::Verts(points) => points
            .iter()
            .map(|p| crate::linalg::dot(row, p))
            .fold(f64::NEG_INFINITY, f64::max),
        DomainExtremes::Blocks(blocks) => blocks
            .iter()
            .map(|(s, ext)| {
                let part = &row[s.offset..s.offset + s.len];
                match ext {
                    BlockExt::Verts(points) => points
                        .iter()
                        .map(|p| crate::linalg::dot(part, p))
                        .fold(f64::NEG_INFINITY, f64::max),
                    BlockExt::Sphere(beta) => beta * norm2(part),
                }
            })
            .sum(),
        DomainExtremes::DiagSphere { radius, scopes } => {
            let p = scopes[0].len;
            let mut combined = vec![0.0; p];
            for s in scopes {
                for k in 0..p {
                    combined[k] += row[s.offset + k];
                }
            }
            radius * norm2(&combined)
        }
    }
}

/// Max of `||u_S||` over the domain's extremes, for a scope `S` that is a
/// union of domain blocks.
fn max_norm_over(scope: &crate::sets::Scope, dom: &DomainExtremes) -> Result<f64> {
    let covers = |s: &crate::sets::Scope| s.offset >= scope.offset
        && s.offset + s.len <= scope.offset + scope.len;
    match dom {
        DomainExtremes::Verts(points) => Ok(points
            .iter()
            .map(|p| norm2(&p[scope.offset..scope.offset + scope.len]))
            .fold(0.0, f64::max)),
        DomainExtremes::Blocks(blocks) => {
            let mut sq = 0.0;
            let mut covered = 0usize;
            for (s, ext) in blocks {
                if !covers(s) {
                    continue;
                }
                covered += s.len;
                sq += match ext {
                    BlockExt::Verts(points) => points
                        .iter()
                        .map(|p| crate::linalg::dot(p, p))
                        .fold(0.0, f64::max),
                    BlockExt::Sphere(beta) => beta * beta,
                };
            }
            if covered != scope.len {
                return Err(Error::DimensionCapExceeded { dim: scope.len, cap: covered });
            }
            Ok(sq.sqrt())
        }
        DomainExtremes::DiagSphere { radius, scopes } => {
            let k = scopes.iter().filter(|s| covers(s)).count();
            if k * scopes[0].len != scope.len {
                return Err(Error::DimensionCapExceeded { dim: scope.len, cap: k });
            }
            Ok(radius * (k as f64).sqrt())
        }
    }
}

/// Max of `gauge(gauge_set, .)` over the extreme points of `domain`.
fn max_gauge_over(gauge_set: &UncertaintySpec, domain: &UncertaintySpec) -> Result<f64> {
    let dom = domain_extremes(domain)?;
    if let DomainExtremes::Verts(points) = &dom {
        let mut g: f64 = 0.0;
        for p in points {
            g = g.max(gauge_set.gauge(p)?);
        }
        return Ok(g);
    }
    // Piece-by-piece closed forms over the product / diagonal structure.
    let mut g: f64 = 0.0;
    for (s, atom) in gauge_set.scoped_atoms() {
        match atom {
            SetAtom::L2Ball { radius } => {
                g = g.max(max_norm_over(&s, &dom)? / radius);
            }
            _ => {
                for (local, rhs) in atom.local_rows(s.len).unwrap() {
                    let mut full = vec![0.0; gauge_set.dim];
                    full[s.offset..s.offset + s.len].copy_from_slice(&local);
                    let num = max_linear_over(&full, &dom);
                    if rhs > 1e-300 {
                        g = g.max((num / rhs).max(0.0));
                    } else if num > 1e-9 {
                        return Ok(INF);
                    } else if rhs < -1e-12 {
                        return Err(Error::OriginNotContained);
                    }
                }
            }
        }
    }
    Ok(g)
}

/// `max r : r * inner ⊆ outer`, via `1 / max over extremes(inner) of the
/// outer gauge`. Both sets must contain the origin.
pub fn scaling_of_set_into(inner: &UncertaintySpec, outer: &UncertaintySpec) -> Result<f64> {
    let g = max_gauge_over(outer, inner)?;
    if g <= 0.0 {
        Ok(INF)
    } else {
        Ok(1.0 / g)
    }
}

/// `min g : covered ⊆ g * shape`: the smallest blow-up of `shape` that
/// contains `covered`.
pub fn cover_scaling_of_set(shape: &UncertaintySpec, covered: &UncertaintySpec) -> Result<f64> {
    max_gauge_over(shape, covered)
}

/// Per-block projection of the coupled set. Uses the block's own atoms when
/// uncoupled, the intersection of all block sets when the coupling equalizes
/// entire blocks, and Fourier-Motzkin elimination otherwise.
pub fn block_projection(ubar: &UncertaintySpec, block: usize) -> Result<UncertaintySpec> {
    let (off, len) = ubar.blocks[block];
    if ubar.coupling_atoms.is_empty() {
        return Ok(UncertaintySpec {
            dim: len,
            blocks: vec![(0, len)],
            cw_atoms: vec![ubar.cw_atoms[block].clone()],
            coupling_atoms: Vec::new(),
        });
    }
    if blocks_fully_equalized(ubar) {
        let atoms: Vec<SetAtom> = ubar.cw_atoms.iter().flatten().cloned().collect();
        return Ok(UncertaintySpec {
            dim: len,
            blocks: vec![(0, len)],
            cw_atoms: vec![atoms],
            coupling_atoms: Vec::new(),
        });
    }
    if len == 1 {
        // Scalar blocks project to intervals regardless of ball atoms.
        let mut e = vec![0.0; ubar.dim];
        e[off] = 1.0;
        let (hi, _) = maximize_linear(ubar, &e)?;
        e[off] = -1.0;
        let (lo_neg, _) = maximize_linear(ubar, &e)?;
        return Ok(UncertaintySpec::from_atom(
            1,
            SetAtom::Box { lower: vec![-lo_neg], upper: vec![hi] },
        ));
    }
    let poly = ubar.to_polyhedron()?;
    let keep: Vec<usize> = (off..off + len).collect();
    let proj = poly.project(&keep)?;
    Ok(UncertaintySpec::from_atom(len, SetAtom::Halfspaces { a: proj.a, b: proj.b }))
}

/// True when the coupling atoms are exactly equalities tying every block's
/// coordinates together position by position.
fn blocks_fully_equalized(ubar: &UncertaintySpec) -> bool {
    let p = ubar.blocks[0].1;
    let m = ubar.blocks.len();
    if m < 2 || ubar.blocks.iter().any(|&(_, len)| len != p) {
        return false;
    }
    let mut linked = vec![vec![false; p]; m];
    for atom in &ubar.coupling_atoms {
        let SetAtom::Halfspaces { a, b } = atom else {
            return false;
        };
        for (row, rhs) in a.iter().zip(b) {
            if rhs.abs() > 1e-12 {
                return false;
            }
            let nz: Vec<usize> = (0..row.len()).filter(|&j| row[j].abs() > 1e-12).collect();
            if nz.len() != 2 {
                return false;
            }
            let (x, y) = (nz[0], nz[1]);
            let unit = (row[x] - 1.0).abs() < 1e-12 || (row[x] + 1.0).abs() < 1e-12;
            if !unit || (row[x] + row[y]).abs() > 1e-12 {
                return false;
            }
            // Same within-block position in two different blocks.
            let (bx, kx) = block_of(ubar, x);
            let (by, ky) = block_of(ubar, y);
            if kx != ky || bx == by {
                return false;
            }
            linked[bx][kx] = true;
            linked[by][ky] = true;
        }
    }
    linked.iter().all(|blk| blk.iter().all(|v| *v))
}

fn block_of(spec: &UncertaintySpec, coord: usize) -> (usize, usize) {
    for (i, &(off, len)) in spec.blocks.iter().enumerate() {
        if coord >= off && coord < off + len {
            return (i, coord - off);
        }
    }
    unreachable!("blocks partition the space")
}

fn product_of_specs(parts: &[UncertaintySpec]) -> UncertaintySpec {
    let dim: usize = parts.iter().map(|s| s.dim).sum();
    let mut blocks = Vec::new();
    let mut cw_atoms = Vec::new();
    let mut off = 0;
    for part in parts {
        blocks.push((off, part.dim));
        cw_atoms.push(part.cw_atoms.iter().flatten().cloned().collect());
        off += part.dim;
    }
    UncertaintySpec { dim, blocks, cw_atoms, coupling_atoms: Vec::new() }
}

/// Shrinkage factors for the coefficient family: per-block scalings between
/// `U_i` and the block projections of `Ubar`, plus full-space factors.
/// Requires the origin inside `Ubar` (translate first).
pub fn compute_coeff_factors(
    u: &UncertaintySpec,
    ubar: &UncertaintySpec,
) -> Result<ShrinkageReport> {
    if u.dim != ubar.dim || u.blocks != ubar.blocks {
        return Err(Error::DimensionMismatch("factor sets".into()));
    }
    if !ubar.membership(&vec![0.0; ubar.dim], 1e-9)? {
        return Err(Error::OriginNotContained);
    }
    check_nested(ubar, u)?;

    let m = u.blocks.len();
    let mut per_dim = Vec::with_capacity(m);
    let mut projections = Vec::with_capacity(m);
    for i in 0..m {
        let u_i = block_projection(&u.constraint_wise(), i)?;
        let pi = block_projection(ubar, i)?;
        let r_i = scaling_of_set_into(&u_i, &pi)?;
        let s_i = max_gauge_over(&u_i, &pi)?;
        per_dim.push((r_i, s_i));
        projections.push(pi);
    }
    let rho_ro = per_dim.iter().map(|p| p.0).fold(INF, f64::min).min(1.0);
    let gamma_ro = per_dim.iter().map(|p| p.1).fold(0.0, f64::max);

    let rho_aro = scaling_of_set_into(u, ubar)?.min(1.0);
    let gamma_aro = max_gauge_over(u, ubar)?;
    let pi_product = product_of_specs(&projections);
    let rho_adapt = scaling_of_set_into(&pi_product, ubar)?.min(1.0);

    Ok(ShrinkageReport {
        rho_ro,
        gamma_ro,
        rho_aro,
        gamma_aro,
        rho_adapt,
        per_dim,
        methods: FactorMethods {
            rho_ro: FactorMethod::LpComputed,
            gamma_ro: FactorMethod::LpComputed,
            rho_aro: FactorMethod::LpComputed,
            gamma_aro: FactorMethod::LpComputed,
            rho_adapt: FactorMethod::LpComputed,
        },
    })
}

/// Translates `U` and `Ubar` so that the origin lands inside `Ubar`.
/// Fast path: when the bounding-box lower corner of `Ubar` is itself a
/// member, the pure translation by that corner lands the set in the
/// nonnegative orthant with 0 inside and is used instead of the symmetry
/// point.
pub fn translate_by_symmetry_point(
    u: &UncertaintySpec,
    ubar: &UncertaintySpec,
) -> Result<(UncertaintySpec, UncertaintySpec, Vec<f64>)> {
    if ubar.membership(&vec![0.0; ubar.dim], 1e-9)? {
        return Ok((u.clone(), ubar.clone(), vec![0.0; ubar.dim]));
    }
    let mut lows = Vec::with_capacity(ubar.dim);
    for j in 0..ubar.dim {
        let mut e = vec![0.0; ubar.dim];
        e[j] = -1.0;
        let (v, _) = maximize_linear(ubar, &e)?;
        lows.push(-v);
    }
    let shift = if ubar.membership(&lows, 1e-9)? {
        lows
    } else {
        let (us, _) = symmetry_point(&ubar.to_polyhedron()?)?;
        us
    };
    Ok((u.translated(&shift)?, ubar.translated(&shift)?, shift))
}

/// `rho_adapt` for `{0 <= u <= alpha, ||u||_q <= beta}` with
/// `alpha <= beta <= alpha m^{1/q}`: the scaled box corner meets the q-norm
/// constraint at `beta / (alpha m^{1/q})`.
pub fn closed_form_q_norm(alpha: f64, beta: f64, m: usize, q: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(q >= 1.0) || m == 0 {
        return Err(Error::ParameterOutOfRange("need alpha > 0, q >= 1, m >= 1".into()));
    }
    let cap = alpha * (m as f64).powf(1.0 / q);
    if beta < alpha - 1e-12 || beta > cap + 1e-12 {
        return Err(Error::ParameterOutOfRange(format!(
            "need alpha <= beta <= alpha m^(1/q), got alpha={alpha}, beta={beta}, cap={cap}"
        )));
    }
    Ok((beta / cap).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Minimization with uncertainty on the right-hand side.
    RhsMin,
    /// Maximization with uncertainty in the constraint coefficients.
    CoeffMax,
}

/// Solved objective values to verify against a report.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ObjectiveValues {
    pub z_ro: Option<f64>,
    pub z_cp: Option<f64>,
    pub z_aro: Option<f64>,
    pub z_acp: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub name: String,
    pub lower: f64,
    pub ratio: f64,
    pub upper: f64,
    pub pass: bool,
    /// Distance to the nearer bound; negative when failing.
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub checks: Vec<TheoremCheck>,
    pub all_pass: bool,
}

/// Verifies every theorem sandwich the provided objective values allow.
pub fn bound_check(
    report: &ShrinkageReport,
    family: FamilyKind,
    zs: &ObjectiveValues,
    tol: f64,
) -> Result<BoundVerdict> {
    let mut checks = Vec::new();
    let mut push = |name: &str, lower: f64, ratio: f64, upper: f64| {
        let slack = (ratio - lower).min(upper - ratio);
        checks.push(TheoremCheck {
            name: name.to_string(),
            lower,
            ratio,
            upper,
            pass: slack >= -tol,
            slack,
        });
    };
    let positive = |v: Option<f64>, name: &str| -> Result<Option<f64>> {
        match v {
            Some(x) if x <= 0.0 => {
                Err(Error::AssumptionViolated(format!("{name} must be positive, got {x}")))
            }
            other => Ok(other),
        }
    };
    let inv = |v: f64| if v > 1e-12 { 1.0 / v } else { INF };

    match family {
        FamilyKind::RhsMin => {
            let z_ro = positive(zs.z_ro, "z_ro")?;
            let z_cp = positive(zs.z_cp, "z_cp")?;
            let z_aro = positive(zs.z_aro, "z_aro")?;
            let z_acp = positive(zs.z_acp, "z_acp")?;
            if let (Some(ro), Some(cp)) = (z_ro, z_cp) {
                push("static_ratio_bounds", report.rho_ro, cp / ro, report.gamma_ro);
            }
            if let (Some(aro), Some(acp)) = (z_aro, z_acp) {
                push("adaptive_ratio_bounds", report.rho_aro, acp / aro, report.gamma_aro);
            }
            if let (Some(cp), Some(acp)) = (z_cp, z_acp) {
                push("adaptive_vs_static", report.rho_adapt, acp / cp, 1.0);
            }
        }
        FamilyKind::CoeffMax => {
            let z_ro = positive(zs.z_ro, "z_ro")?;
            let z_cp = positive(zs.z_cp, "z_cp")?;
            let z_aro = positive(zs.z_aro, "z_aro")?;
            let z_acp = positive(zs.z_acp, "z_acp")?;
            if let (Some(ro), Some(cp)) = (z_ro, z_cp) {
                push("static_ratio_bounds", inv(report.gamma_ro), cp / ro, inv(report.rho_ro));
            }
            if let (Some(aro), Some(acp)) = (z_aro, z_acp) {
                if report.rho_aro <= 1e-12 {
                    return Err(Error::AssumptionViolated(
                        "adaptive coefficient bounds need rho_aro > 0".into(),
                    ));
                }
                push(
                    "adaptive_ratio_bounds",
                    inv(report.gamma_aro),
                    acp / aro,
                    inv(report.rho_aro),
                );
            }
            if let (Some(cp), Some(acp)) = (z_cp, z_acp) {
                push("adaptive_vs_static", 0.0, acp / cp, inv(report.rho_adapt));
                // Factor-level half of the same bound.
                if report.rho_aro > 1e-12 {
                    push(
                        "adapt_factor_bound",
                        0.0,
                        inv(report.rho_adapt),
                        report.gamma_ro / report.rho_aro,
                    );
                }
            }
        }
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(BoundVerdict { checks, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn scenario_a(eta: f64) -> (UncertaintySpec, UncertaintySpec) {
        let u = UncertaintySpec::unit_box_scalar(2);
        let ubar = u
            .intersect(vec![SetAtom::Budget { weights: vec![1.0, 1.0], limit: eta }])
            .unwrap();
        (u, ubar)
    }

    fn scenario_b(alpha: f64, beta: f64) -> (UncertaintySpec, UncertaintySpec) {
        let u = UncertaintySpec::unit_box_scalar(2);
        let ubar = u
            .intersect(vec![SetAtom::Halfspaces {
                a: vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
                b: vec![-alpha, beta],
            }])
            .unwrap();
        (u, ubar)
    }

    #[test]
    fn projection_bounds_examples() {
        let (_, ua) = scenario_a(1.5);
        let d = projection_bounds(&ua, true).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-9 && (d[1] - 1.0).abs() < 1e-9);

        let (_, ub) = scenario_b(0.5, 0.75);
        let d = projection_bounds(&ub, true).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-9 && (d[1] - 1.0).abs() < 1e-9);

        let boxset = UncertaintySpec::from_atom(
            3,
            SetAtom::Box { lower: vec![0.0; 3], upper: vec![0.7; 3] },
        );
        let d = projection_bounds(&boxset, false).unwrap();
        assert!(d.iter().all(|v| (v - 0.7).abs() < 1e-9));
    }

    #[test]
    fn rhs_factors_scenario_a() {
        let (u, ubar) = scenario_a(1.5);
        let r = compute_rhs_factors(&u, &ubar).unwrap();
        assert!((r.rho_ro - 1.0).abs() < 1e-9);
        assert!((r.gamma_ro - 1.0).abs() < 1e-9);
        assert!((r.rho_aro - 0.75).abs() < 1e-9);
        assert!((r.gamma_aro - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rhs_factors_scenario_b() {
        let (u, ubar) = scenario_b(0.5, 0.75);
        let r = compute_rhs_factors(&u, &ubar).unwrap();
        assert!((r.rho_ro - 0.5).abs() < 1e-9);
        assert!((r.gamma_ro - 1.0).abs() < 1e-9);
        assert!((r.rho_aro - 0.5).abs() < 1e-9);
        assert!((r.gamma_aro - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rhs_factors_identity() {
        let u = UncertaintySpec::unit_box_scalar(3);
        let r = compute_rhs_factors(&u, &u).unwrap();
        for v in [r.rho_ro, r.gamma_ro, r.rho_aro, r.gamma_aro, r.rho_adapt] {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn nesting_violation_detected() {
        let u = UncertaintySpec::unit_box_scalar(2);
        let bigger = UncertaintySpec::from_atom(
            2,
            SetAtom::Box { lower: vec![0.0, 0.0], upper: vec![2.0, 1.0] },
        );
        assert!(matches!(compute_rhs_factors(&u, &bigger), Err(Error::NotNested { .. })));
    }

    #[test]
    fn corner_scaling_matches_full_vertex_scan() {
        // rho_aro via the box corner agrees with the explicit minimum over
        // all corners of the box hull (gauge monotonicity).
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let m = rng.gen_range(2..5usize);
            let u = UncertaintySpec::unit_box_scalar(m);
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..1.0)).collect();
            let limit = rng.gen_range(1.0..(m as f64) * 0.8);
            let ubar = match u.intersect(vec![SetAtom::Budget { weights: w, limit }]) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let r = compute_rhs_factors(&u, &ubar).unwrap();
            let mut best = INF;
            for mask in 1..(1u32 << m) {
                let v: Vec<f64> =
                    (0..m).map(|j| if mask >> j & 1 == 1 { 1.0 } else { 0.0 }).collect();
                best = best.min(max_scaling_into_down_hull(&v, &ubar).unwrap());
            }
            assert!(
                (r.rho_aro - best.min(1.0)).abs() < 1e-7,
                "corner shortcut {} vs scan {}",
                r.rho_aro,
                best
            );
        }
    }

    #[test]
    fn report_invariants_random_suite() {
        // Factor ordering, gamma equality, and the adaptivity floor hold on
        // randomized nested pairs.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut count = 0;
        while count < 200 {
            let m = rng.gen_range(2..=6usize);
            let u = UncertaintySpec::unit_box_scalar(m);
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            let limit = rng.gen_range(0.3..(m as f64) * 0.9);
            let Ok(ubar) = u.intersect(vec![SetAtom::Budget { weights: w, limit }]) else {
                continue;
            };
            let r = compute_rhs_factors(&u, &ubar).unwrap();
            assert!(r.rho_ro >= -1e-9 && r.rho_ro <= r.gamma_ro + 1e-9);
            assert!(r.gamma_ro <= 1.0 + 1e-9);
            assert!(r.rho_aro >= -1e-9 && r.rho_aro <= r.gamma_aro + 1e-9);
            assert_eq!(r.gamma_aro, r.gamma_ro);
            assert!(r.rho_adapt >= r.rho_aro / r.gamma_ro.max(1e-12) - 1e-7);
            assert!(r.rho_adapt >= 1.0 / m as f64 - 1e-9, "rho_adapt {}", r.rho_adapt);
            count += 1;
        }
    }

    #[test]
    fn scale_invariance_of_factors() {
        let (u, ubar) = scenario_b(0.3, 0.8);
        let r1 = compute_rhs_factors(&u, &ubar).unwrap();
        let lambda = 3.7;
        let scale_atom = |a: &SetAtom| match a {
            SetAtom::Box { lower, upper } => SetAtom::Box {
                lower: lower.iter().map(|v| v * lambda).collect(),
                upper: upper.iter().map(|v| v * lambda).collect(),
            },
            SetAtom::Halfspaces { a, b } => SetAtom::Halfspaces {
                a: a.clone(),
                b: b.iter().map(|v| v * lambda).collect(),
            },
            SetAtom::Budget { weights, limit } => {
                SetAtom::Budget { weights: weights.clone(), limit: limit * lambda }
            }
            SetAtom::L2Ball { radius } => SetAtom::L2Ball { radius: radius * lambda },
        };
        let scale_spec = |s: &UncertaintySpec| UncertaintySpec {
            dim: s.dim,
            blocks: s.blocks.clone(),
            cw_atoms: s.cw_atoms.iter().map(|v| v.iter().map(&scale_atom).collect()).collect(),
            coupling_atoms: s.coupling_atoms.iter().map(&scale_atom).collect(),
        };
        let r2 = compute_rhs_factors(&scale_spec(&u), &scale_spec(&ubar)).unwrap();
        assert!((r1.rho_ro - r2.rho_ro).abs() < 1e-9);
        assert!((r1.gamma_ro - r2.gamma_ro).abs() < 1e-9);
        assert!((r1.rho_aro - r2.rho_aro).abs() < 1e-9);
        assert!((r1.rho_adapt - r2.rho_adapt).abs() < 1e-9);
    }

    #[test]
    fn rho_ro_consistency_with_axis_scalings() {
        // rho_ro from projection ratios equals the min over axes of the
        // scaling of the axis-extreme point of the U hull into the projection
        // product of the Ubar hull.
        let (u, ubar) = scenario_b(0.5, 0.75);
        let r = compute_rhs_factors(&u, &ubar).unwrap();
        let d = projection_bounds(&u, true).unwrap();
        let dbar = projection_bounds(&ubar, true).unwrap();
        let pi =
            UncertaintySpec::from_atom(2, SetAtom::Box { lower: vec![0.0; 2], upper: dbar });
        let mut axis_min = INF;
        for (j, dj) in d.iter().enumerate() {
            if *dj <= 1e-12 {
                continue;
            }
            let mut v = vec![0.0; 2];
            v[j] = *dj;
            axis_min = axis_min.min(crate::sets::max_scaling_of_point_into(&v, &pi).unwrap());
        }
        assert!((axis_min.min(1.0) - r.rho_ro).abs() < 1e-9);
    }

    #[test]
    fn q_norm_closed_form_examples() {
        assert!((closed_form_q_norm(1.0, 1.0, 4, 1.0).unwrap() - 0.25).abs() < 1e-12);
        assert!((closed_form_q_norm(1.0, 1.0, 25, 2.0).unwrap() - 0.2).abs() < 1e-12);
        let m = 6;
        let cap = (m as f64).powf(1.0 / 3.0);
        assert!((closed_form_q_norm(1.0, cap, m, 3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(closed_form_q_norm(1.0, 3.0, 4, 1.0).is_ok());
        assert!(closed_form_q_norm(1.0, 5.0, 4, 1.0).is_err());
        assert!(closed_form_q_norm(1.0, 0.5, 4, 1.0).is_err());
    }

    #[test]
    fn q_norm_matches_lp_computed_rho_adapt() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let m = rng.gen_range(2..=6usize);
            let alpha = rng.gen_range(0.5..2.0);
            let beta = rng.gen_range(alpha..alpha * m as f64);
            let u = UncertaintySpec::scalar_blocks(
                m,
                (0..m)
                    .map(|_| vec![SetAtom::Box { lower: vec![0.0], upper: vec![alpha] }])
                    .collect(),
            );
            let ubar = u
                .intersect(vec![SetAtom::Budget { weights: vec![1.0; m], limit: beta }])
                .unwrap();
            let r = compute_rhs_factors(&u, &ubar).unwrap();
            let cf = closed_form_q_norm(alpha, beta, m, 1.0).unwrap();
            assert!(
                (r.rho_adapt - cf).abs() < 1e-7,
                "m={m} alpha={alpha} beta={beta}: {} vs {cf}",
                r.rho_adapt
            );
        }
    }

    fn l1_atom_2d(alpha: f64) -> SetAtom {
        SetAtom::Halfspaces {
            a: vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]],
            b: vec![alpha; 4],
        }
    }

    #[test]
    fn coeff_factors_l1_l2_equal_blocks() {
        // Two blocks of width 2, an l1 ball and an l2 ball, coupled by
        // equality of the blocks.
        let (alpha, beta) = (1.0, 1.0);
        let u = UncertaintySpec {
            dim: 4,
            blocks: vec![(0, 2), (2, 2)],
            cw_atoms: vec![vec![l1_atom_2d(alpha)], vec![SetAtom::L2Ball { radius: beta }]],
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
        let r = compute_coeff_factors(&u, &ubar).unwrap();
        assert!((r.rho_ro - 1.0 / 2.0f64.sqrt()).abs() < 1e-9, "rho_ro {}", r.rho_ro);
        assert!((r.gamma_ro - 1.0).abs() < 1e-9, "gamma_ro {}", r.gamma_ro);
    }

    #[test]
    fn coeff_factors_box_ball() {
        // Box of side alpha per scalar block, l2 coupling of radius beta:
        // rho_aro = min(beta / (alpha sqrt(mp)), 1) with p = 1.
        let (m, alpha, beta) = (2usize, 1.0, 1.0);
        let u = UncertaintySpec::scalar_blocks(
            m,
            (0..m)
                .map(|_| vec![SetAtom::Box { lower: vec![-alpha], upper: vec![alpha] }])
                .collect(),
        );
        let ubar = u.intersect(vec![SetAtom::L2Ball { radius: beta }]).unwrap();
        let r = compute_coeff_factors(&u, &ubar).unwrap();
        assert!((r.rho_aro - 1.0 / 2.0f64.sqrt()).abs() < 1e-9, "rho_aro {}", r.rho_aro);
        assert!(1.0 / r.rho_adapt <= (m as f64) + 1e-9);
    }

    #[test]
    fn coeff_factors_identity_box() {
        let u = UncertaintySpec::scalar_blocks(
            3,
            (0..3)
                .map(|_| vec![SetAtom::Box { lower: vec![-1.0], upper: vec![1.0] }])
                .collect(),
        );
        let r = compute_coeff_factors(&u, &u).unwrap();
        for v in [r.rho_ro, r.gamma_ro, r.rho_aro, r.gamma_aro, r.rho_adapt] {
            assert!((v - 1.0).abs() < 1e-9, "factor {v}");
        }
    }

    #[test]
    fn coeff_factors_require_origin() {
        let u = UncertaintySpec::unit_box_scalar(2);
        let ubar = u
            .intersect(vec![SetAtom::Halfspaces { a: vec![vec![-1.0, 0.0]], b: vec![-0.5] }])
            .unwrap();
        assert!(matches!(compute_coeff_factors(&u, &ubar), Err(Error::OriginNotContained)));
    }

    #[test]
    fn translate_box_fast_path() {
        let u = UncertaintySpec::from_atom(
            2,
            SetAtom::Box { lower: vec![0.5, 0.5], upper: vec![2.5, 3.0] },
        );
        let ubar = UncertaintySpec::from_atom(
            2,
            SetAtom::Box { lower: vec![1.0, 1.0], upper: vec![2.0, 2.0] },
        );
        let (_, ubar2, shift) = translate_by_symmetry_point(&u, &ubar).unwrap();
        assert!((shift[0] - 1.0).abs() < 1e-9 && (shift[1] - 1.0).abs() < 1e-9);
        assert!(ubar2.membership(&[0.0, 0.0], 1e-9).unwrap());
    }

    #[test]
    fn translate_simplex_uses_symmetry_point() {
        let u = UncertaintySpec::from_atom(
            2,
            SetAtom::Box { lower: vec![-2.0, -2.0], upper: vec![2.0, 2.0] },
        );
        // A simplex whose bounding-box corner is not a member.
        let ubar = UncertaintySpec::from_atom(
            2,
            SetAtom::Halfspaces {
                a: vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
                b: vec![1.0, 1.0, 0.0],
            },
        );
        let (_, ubar2, shift) = translate_by_symmetry_point(&u, &ubar).unwrap();
        assert!(ubar2.membership(&[0.0, 0.0], 1e-9).unwrap());
        let poly = ubar.to_polyhedron().unwrap();
        let (_, sym) = symmetry_point(&poly).unwrap();
        assert!((sym - 0.5).abs() < 1e-6);
        assert!(poly.membership(&shift, 1e-9).unwrap());
    }

    #[test]
    fn bound_check_families() {
        let (u, ubar) = scenario_b(0.5, 0.75);
        let report = compute_rhs_factors(&u, &ubar).unwrap();
        // Lower bound tight: ratio 1/2 = rho_ro.
        let verdict = bound_check(
            &report,
            FamilyKind::RhsMin,
            &ObjectiveValues { z_ro: Some(2.0), z_cp: Some(1.0), ..Default::default() },
            1e-9,
        )
        .unwrap();
        assert!(verdict.all_pass);
        assert!((verdict.checks[0].ratio - 0.5).abs() < 1e-12);
        assert!(verdict.checks[0].slack.abs() < 1e-9, "lower bound should be tight");

        let bad = bound_check(
            &report,
            FamilyKind::RhsMin,
            &ObjectiveValues { z_ro: Some(2.0), z_cp: Some(0.5), ..Default::default() },
            1e-9,
        )
        .unwrap();
        assert!(!bad.all_pass);

        assert!(matches!(
            bound_check(
                &report,
                FamilyKind::RhsMin,
                &ObjectiveValues { z_ro: Some(-1.0), z_cp: Some(1.0), ..Default::default() },
                1e-9,
            ),
            Err(Error::AssumptionViolated(_))
        ));
    }

    #[test]
    fn bound_check_identity_all_one() {
        let u = UncertaintySpec::unit_box_scalar(2);
        let report = compute_rhs_factors(&u, &u).unwrap();
        let verdict = bound_check(
            &report,
            FamilyKind::RhsMin,
            &ObjectiveValues {
                z_ro: Some(3.0),
                z_cp: Some(3.0),
                z_aro: Some(3.0),
                z_acp: Some(3.0),
            },
            1e-9,
        )
        .unwrap();
        assert!(verdict.all_pass);
        for c in &verdict.checks {
            assert!((c.ratio - 1.0).abs() < 1e-12);
        }
        assert!(verdict.checks[0].slack.abs() < 1e-9);
    }
}
