//! Instance generators for the three experiment families.
//!
//! Every generator is deterministic in its seed. Sizes are desk scale; the
//! coupling parameters are configurable so parameter sweeps can turn each
//! coupling on, off, or pin it to a fixed value.

use crate::error::{Error, Result};
use crate::model::{Bounds, CoeffRobustProblem, CoeffRow, DetRow, RhsRobustProblem, RowSense};
use crate::sets::{SetAtom, UncertaintySpec};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// How a scalar coupling parameter is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamRule {
    Fixed(f64),
    Uniform(f64, f64),
    Off,
}

impl ParamRule {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<f64> {
        match self {
            ParamRule::Fixed(v) => Some(*v),
            ParamRule::Uniform(lo, hi) => Some(rng.gen_range(*lo..*hi)),
            ParamRule::Off => None,
        }
    }
}

/// Supply-chain coupling: per-group demand dominance `u_l1 >= u_lk + alpha`
/// and the total-demand ball `||u|| <= Gamma`. The Gamma rule is a multiple
/// of `sqrt(M)`.
#[derive(Debug, Clone, Copy)]
pub struct SupplyChainCoupling {
    pub alpha: ParamRule,
    /// Multiplied by `sqrt(M)` when drawn.
    pub gamma_factor: ParamRule,
}

impl Default for SupplyChainCoupling {
    fn default() -> Self {
        SupplyChainCoupling {
            alpha: ParamRule::Uniform(0.1, 0.2),
            gamma_factor: ParamRule::Uniform(0.5, 0.75),
        }
    }
}

/// Splits `1..=m` store indices into groups of two and three.
pub fn store_groups(m: usize) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    let mut next = 0;
    let mut rem = m;
    while rem > 0 {
        let take = match rem {
            1 => 1, // degenerate group; no coupling rows emitted
            2 | 4 => 2,
            _ => 3,
        };
        groups.push((next..next + take).collect());
        next += take;
        rem -= take;
    }
    groups
}

/// Two-stage transportation network with `J = K = M`: first stage ships
/// source -> center, the recourse ships center -> store to meet uncertain
/// demands in `[0,1]^M`.
pub fn gen_supply_chain(
    m: usize,
    seed: u64,
    coupling: &SupplyChainCoupling,
    adaptive: bool,
) -> Result<RhsRobustProblem> {
    if m < 2 {
        return Err(Error::ParameterOutOfRange("supply chain needs M >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t_cap, p_cap) = (10.0, 10.0);
    // First-stage costs: cheap when the route is available, prohibitive
    // otherwise; every center keeps at least one available inbound route.
    let mut c = vec![0.0; m * m];
    for k in 0..m {
        let mut any = false;
        for j in 0..m {
            let available = rng.gen_bool(0.5);
            any |= available;
            c[j * m + k] = if available {
                rng.gen_range(0.0..5.0)
            } else {
                rng.gen_range(0.0..5001.0)
            };
        }
        if !any {
            let j = rng.gen_range(0..m);
            c[j * m + k] = rng.gen_range(0.0..5.0);
        }
    }
    let d: Vec<f64> = (0..m * m).map(|_| rng.gen_range(0.0..5.0)).collect();

    // Demand rows: sum_k y_ki >= u_i.
    let a_mat = vec![vec![0.0; m * m]; m];
    let mut g_mat = vec![vec![0.0; m * m]; m];
    for (i, row) in g_mat.iter_mut().enumerate() {
        for k in 0..m {
            row[k * m + i] = 1.0;
        }
    }
    // Flow conservation at every center: sum_i y_ki <= sum_j x_jk.
    let det = (0..m)
        .map(|k| {
            let mut ax = vec![0.0; m * m];
            for j in 0..m {
                ax[j * m + k] = -1.0;
            }
            let mut ay = vec![0.0; m * m];
            for i in 0..m {
                ay[k * m + i] = 1.0;
            }
            DetRow::le(ax, ay, 0.0)
        })
        .collect();

    let mut spec = UncertaintySpec::unit_box_scalar(m);
    let mut rows = Vec::new();
    for group in store_groups(m) {
        if group.len() < 2 {
            continue;
        }
        if let Some(alpha) = coupling.alpha.draw(&mut rng) {
            let lead = group[0];
            for &other in &group[1..] {
                // u_other - u_lead <= -alpha
                let mut row = vec![0.0; m];
                row[other] = 1.0;
                row[lead] = -1.0;
                rows.push((row, -alpha));
            }
        }
    }
    let mut atoms = Vec::new();
    if !rows.is_empty() {
        atoms.push(SetAtom::Halfspaces {
            a: rows.iter().map(|(r, _)| r.clone()).collect(),
            b: rows.iter().map(|(_, v)| *v).collect(),
        });
    }
    if let Some(f) = coupling.gamma_factor.draw(&mut rng) {
        atoms.push(SetAtom::L2Ball { radius: f * (m as f64).sqrt() });
    }
    if !atoms.is_empty() {
        spec = spec.intersect(atoms)?;
    }

    Ok(RhsRobustProblem {
        n1: m * m,
        n2: m * m,
        c,
        d,
        a_mat,
        g_mat,
        det,
        x_bounds: Bounds::boxed(m * m, 0.0, t_cap),
        y_bounds: Bounds::boxed(m * m, 0.0, p_cap),
        uncertainty: spec,
        adaptive,
    })
}

/// The two-source, two-center, two-store introduction network with the
/// textbook costs; `scenario` picks the coupled set.
pub fn supply_chain_intro(scenario: IntroScenario, adaptive: bool) -> RhsRobustProblem {
    let spec = match scenario {
        IntroScenario::Uncoupled => UncertaintySpec::unit_box_scalar(2),
        IntroScenario::TotalDemand { eta } => UncertaintySpec::unit_box_scalar(2)
            .intersect(vec![SetAtom::Budget { weights: vec![1.0, 1.0], limit: eta }])
            .expect("intro set nonempty"),
        IntroScenario::DemandGap { alpha, beta } => UncertaintySpec::unit_box_scalar(2)
            .intersect(vec![SetAtom::Halfspaces {
                a: vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
                b: vec![-alpha, beta],
            }])
            .expect("intro set nonempty"),
    };
    // Variables x = (x11, x22), y = (y11, y22, y12); store 1 is served by
    // center 1 only, store 2 by both centers.
    RhsRobustProblem {
        n1: 2,
        n2: 3,
        c: vec![100.0, 100.0],
        d: vec![200.0, 200.0, 200.0],
        a_mat: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        g_mat: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]],
        det: vec![
            DetRow::le(vec![-1.0, 0.0], vec![1.0, 0.0, 1.0], 0.0),
            DetRow::le(vec![0.0, -1.0], vec![0.0, 1.0, 0.0], 0.0),
        ],
        x_bounds: Bounds::boxed(2, 0.0, 1.0),
        y_bounds: Bounds::boxed(3, 0.0, 1.0),
        uncertainty: spec,
        adaptive,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntroScenario {
    Uncoupled,
    TotalDemand { eta: f64 },
    DemandGap { alpha: f64, beta: f64 },
}

/// Portfolio coupling switches: common factors equalized across assets, and
/// sector dominance rows on the first idiosyncratic coordinate.
#[derive(Debug, Clone, Copy)]
pub struct PortfolioCoupling {
    pub common_factors: bool,
    pub sectors: bool,
}

impl Default for PortfolioCoupling {
    fn default() -> Self {
        PortfolioCoupling { common_factors: true, sectors: true }
    }
}

pub const PORTFOLIO_FACTOR_DIM: usize = 4;
pub const PORTFOLIO_BLOCK_DIM: usize = 8;
const PORTFOLIO_ROWS: usize = 30;
const PORTFOLIO_SECTORS: usize = 5;
const PORTFOLIO_BUDGET: f64 = 100.0;

/// Robust return maximization over `m` assets. Each asset's uncertainty
/// block holds four common factors and four idiosyncratic sources; returns
/// and prices are bilinear in the decision and the block. Variables are
/// `(x_1..x_m, t_1..t_m, b_1..b_m)`, all first stage.
pub fn gen_portfolio(
    m: usize,
    seed: u64,
    coupling: &PortfolioCoupling,
) -> Result<CoeffRobustProblem> {
    if m < PORTFOLIO_SECTORS {
        return Err(Error::ParameterOutOfRange(
            "portfolio needs at least one asset per sector".into(),
        ));
    }
    let p = PORTFOLIO_BLOCK_DIM;
    for attempt in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let mut mbar = vec![vec![0.0; p]; PORTFOLIO_ROWS];
        for row in mbar.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.gen_range(-2.5..2.5);
            }
        }
        // Anchor point keeps every per-asset polyhedron nonempty.
        let w: Vec<f64> = (0..p).map(|_| standard_normal(&mut rng)).collect();
        let sbar: Vec<f64> = mbar
            .iter()
            .map(|row| crate::linalg::dot(row, &w) + rng.gen_range(0.0..100.0))
            .collect();
        let mut cw_atoms = Vec::with_capacity(m);
        for _ in 0..m {
            let a: Vec<Vec<f64>> = mbar
                .iter()
                .map(|row| row.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect())
                .collect();
            let b: Vec<f64> = sbar.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
            cw_atoms.push(vec![SetAtom::Halfspaces { a, b }]);
        }
        let u = UncertaintySpec {
            dim: m * p,
            blocks: (0..m).map(|i| (i * p, p)).collect(),
            cw_atoms,
            coupling_atoms: Vec::new(),
        };
        let mut atoms = Vec::new();
        if coupling.common_factors {
            let mut rows = Vec::new();
            for i in 1..m {
                for j in 0..PORTFOLIO_FACTOR_DIM {
                    let mut row = vec![0.0; m * p];
                    row[i * p + j] = 1.0;
                    row[j] = -1.0;
                    rows.push(row.clone());
                    rows.push(row.iter().map(|v| -v).collect());
                }
            }
            let k = rows.len();
            atoms.push(SetAtom::Halfspaces { a: rows, b: vec![0.0; k] });
        }
        if coupling.sectors {
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for s in 0..PORTFOLIO_SECTORS {
                let members: Vec<usize> = (0..m).filter(|i| i % PORTFOLIO_SECTORS == s).collect();
                let lead = members[0];
                for &other in &members[1..] {
                    // u_other - u_lead <= -alpha on the first idiosyncratic
                    // coordinate.
                    let alpha = rng.gen_range(0.0..1.0);
                    let mut row = vec![0.0; m * p];
                    row[other * p + PORTFOLIO_FACTOR_DIM] = 1.0;
                    row[lead * p + PORTFOLIO_FACTOR_DIM] = -1.0;
                    rows.push(row);
                    rhs.push(-alpha);
                }
            }
            if !rows.is_empty() {
                atoms.push(SetAtom::Halfspaces { a: rows, b: rhs });
            }
        }
        let ubar = if atoms.is_empty() { u.clone() } else { match u.intersect(atoms) {
            Ok(s) => s,
            Err(Error::EmptyCoupledSet) => continue,
            Err(e) => return Err(e),
        }};

        // Problem data.
        let n1 = 3 * m; // x, t, b
        let xv = |i: usize| i;
        let tv = |i: usize| m + i;
        let bv = |i: usize| 2 * m + i;
        let mut rows = Vec::with_capacity(2 * m);
        for i in 0..m {
            let cbar = rng.gen_range(80.0..100.0);
            // Price intercepts sit below the budget so worst-case prices
            // stay affordable for a fully invested portfolio.
            let abar = rng.gen_range(50.0..80.0);
            let q: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.5..2.5)).collect();
            let pr: Vec<f64> = (0..p).map(|_| rng.gen_range(-0.5..0.5)).collect();
            // t_i - (cbar + q.u) x_i <= 0
            let mut lin = vec![0.0; n1];
            lin[tv(i)] = 1.0;
            lin[xv(i)] = -cbar;
            let mut u_coeff = vec![vec![0.0; n1]; p];
            for (k, qk) in q.iter().enumerate() {
                u_coeff[k][xv(i)] = -qk;
            }
            rows.push(CoeffRow { block: i, lin, u_coeff, u_const: vec![0.0; p], rhs: 0.0 });
            // (abar + pr.u) x_i - b_i <= 0
            let mut lin = vec![0.0; n1];
            lin[xv(i)] = abar;
            lin[bv(i)] = -1.0;
            let mut u_coeff = vec![vec![0.0; n1]; p];
            for (k, pk) in pr.iter().enumerate() {
                u_coeff[k][xv(i)] = *pk;
            }
            rows.push(CoeffRow { block: i, lin, u_coeff, u_const: vec![0.0; p], rhs: 0.0 });
        }
        let mut det = Vec::new();
        // sum b_i <= budget
        let mut ax = vec![0.0; n1];
        for i in 0..m {
            ax[bv(i)] = 1.0;
        }
        det.push(DetRow::le(ax, Vec::new(), PORTFOLIO_BUDGET));
        // sector caps
        for s in 0..PORTFOLIO_SECTORS {
            let mut ax = vec![0.0; n1];
            for i in (0..m).filter(|i| i % PORTFOLIO_SECTORS == s) {
                ax[xv(i)] = 1.0;
            }
            det.push(DetRow::le(ax, Vec::new(), 8.0 / m as f64));
        }
        // sum x_i = 1
        let mut ax = vec![0.0; n1];
        for i in 0..m {
            ax[xv(i)] = 1.0;
        }
        det.push(DetRow { ax, ay: Vec::new(), sense: RowSense::Eq, rhs: 1.0 });

        let mut x_bounds = Bounds::free(n1);
        for i in 0..m {
            x_bounds.lower[xv(i)] = 0.0;
        }
        let mut c = vec![0.0; n1];
        for i in 0..m {
            c[tv(i)] = 1.0;
        }
        let prob = CoeffRobustProblem {
            n1,
            n2: 0,
            c,
            d: Vec::new(),
            rows,
            det: det
                .into_iter()
                .map(|r| DetRow { ay: vec![0.0; 0], ..r })
                .collect(),
            x_bounds,
            y_bounds: Bounds::free(0),
            uncertainty: ubar,
            adaptive: false,
        };
        prob.validate()?;
        return Ok(prob);
    }
    Err(Error::EmptyCoupledSet)
}

/// Lot sizing on a network: allocate stock first, transport between stores
/// after demands in `[0,20]^m` (budgeted by `20 sqrt(m)`) realize.
pub fn gen_lot_sizing(m: usize, seed: u64, coupled: bool) -> Result<RhsRobustProblem> {
    if m < 2 {
        return Err(Error::ParameterOutOfRange("lot sizing needs m >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..m)
        .map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
        .collect();
    let mut t = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let dx = pts[i].0 - pts[j].0;
                let dy = pts[i].1 - pts[j].1;
                t[i * m + j] = (dx * dx + dy * dy).sqrt();
            }
        }
    }
    // Demand rows: x_i + sum_j y_ji - sum_j y_ij >= u_i.
    let mut a_mat = vec![vec![0.0; m]; m];
    let mut g_mat = vec![vec![0.0; m * m]; m];
    for i in 0..m {
        a_mat[i][i] = 1.0;
        for j in 0..m {
            if i != j {
                g_mat[i][j * m + i] += 1.0;
                g_mat[i][i * m + j] -= 1.0;
            }
        }
    }
    let mut spec = UncertaintySpec::scalar_blocks(
        m,
        (0..m)
            .map(|_| vec![SetAtom::Box { lower: vec![0.0], upper: vec![20.0] }])
            .collect(),
    );
    if coupled {
        spec = spec.intersect(vec![SetAtom::Budget {
            weights: vec![1.0; m],
            limit: 20.0 * (m as f64).sqrt(),
        }])?;
    }
    Ok(RhsRobustProblem {
        n1: m,
        n2: m * m,
        c: vec![20.0; m],
        d: t,
        a_mat,
        g_mat,
        det: Vec::new(),
        x_bounds: Bounds::boxed(m, 0.0, 20.0),
        y_bounds: Bounds::nonneg(m * m),
        uncertainty: spec,
        adaptive: true,
    })
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}
