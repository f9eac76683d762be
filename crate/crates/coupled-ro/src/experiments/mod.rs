//! Experiment harness: instance generation, multi-method runs, bound
//! verification, and CSV/plot-data output.

mod generators;

pub use generators::{
    gen_lot_sizing, gen_portfolio, gen_supply_chain, store_groups, supply_chain_intro,
    IntroScenario, ParamRule, PortfolioCoupling, SupplyChainCoupling,
};

use crate::error::{Error, Result};
use crate::model::{RhsRobustProblem, RobustProblem};
use crate::shrinkage::{
    bound_check, compute_coeff_factors, compute_rhs_factors, BoundVerdict, FamilyKind,
    ObjectiveValues, ShrinkageReport,
};
use crate::solvers::{solve, Method, SolveOptions, SolveResult, SolveStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentFamily {
    SupplyChain,
    Portfolio,
    LotSizing,
}

impl std::str::FromStr for ExperimentFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "supply_chain" | "supply-chain" => ExperimentFamily::SupplyChain,
            "portfolio" => ExperimentFamily::Portfolio,
            "lot_sizing" | "lot-sizing" => ExperimentFamily::LotSizing,
            other => return Err(Error::Parse(format!("unknown family '{other}'"))),
        })
    }
}

impl std::fmt::Display for ExperimentFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ExperimentFamily::SupplyChain => "supply_chain",
            ExperimentFamily::Portfolio => "portfolio",
            ExperimentFamily::LotSizing => "lot_sizing",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: ExperimentFamily,
    pub size: usize,
    pub seed: u64,
    pub instances: usize,
    pub adaptive: bool,
    pub methods: Vec<Method>,
    pub supply_coupling: SupplyChainCoupling,
    pub portfolio_coupling: PortfolioCoupling,
    pub opts: SolveOptions,
}

impl ExperimentConfig {
    pub fn new(family: ExperimentFamily, size: usize, seeds: usize) -> Self {
        ExperimentConfig {
            family,
            size,
            seed: 0,
            instances: seeds,
            adaptive: family == ExperimentFamily::LotSizing,
            methods: Vec::new(),
            supply_coupling: SupplyChainCoupling::default(),
            portfolio_coupling: PortfolioCoupling::default(),
            opts: SolveOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min_size = match self.family {
            ExperimentFamily::Portfolio => 5,
            _ => 2,
        };
        if self.size < min_size {
            return Err(Error::ParameterOutOfRange(format!(
                "family {} needs size >= {min_size}",
                self.family
            )));
        }
        if self.instances == 0 {
            return Err(Error::ParameterOutOfRange("instance count must be >= 1".into()));
        }
        Ok(())
    }
}

/// One solved (instance, method) pair, CSV-ready. Optional fields stay empty
/// when a quantity was skipped or failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub family: String,
    pub size: usize,
    pub seed: u64,
    pub method: String,
    pub objective: Option<f64>,
    pub baseline: Option<f64>,
    pub ratio: Option<f64>,
    pub rho_ro: Option<f64>,
    pub gamma_ro: Option<f64>,
    pub rho_aro: Option<f64>,
    pub gamma_aro: Option<f64>,
    pub rho_adapt: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub runtime_s: f64,
    pub verdict: String,
}

/// Deterministic per-instance seed derived from the config seed (splitmix64
/// over the instance index).
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

struct Instance {
    problem: RobustProblem,
    /// Constraint-wise static value: `z_ro`, and by constraint-wise static
    /// optimality also `z_aro` for the RHS families.
    baseline: f64,
    /// Coupled static value (for the adaptive-vs-static bound).
    coupled_static: Option<f64>,
    factors: std::result::Result<ShrinkageReport, String>,
}

fn build_instance(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    match cfg.family {
        ExperimentFamily::SupplyChain => {
            let prob = gen_supply_chain(cfg.size, seed, &cfg.supply_coupling, cfg.adaptive)?;
            build_rhs_instance(prob, cfg)
        }
        ExperimentFamily::LotSizing => {
            let mut prob = gen_lot_sizing(cfg.size, seed, true)?;
            prob.adaptive = cfg.adaptive;
            build_rhs_instance(prob, cfg)
        }
        ExperimentFamily::Portfolio => {
            let prob = gen_portfolio(cfg.size, seed, &cfg.portfolio_coupling)?;
            let uncoupled = RobustProblem::Coeff(prob.uncoupled());
            let baseline =
                solve(&uncoupled, Method::CuttingPlane, &cfg.opts)?.objective;
            let factors = portfolio_factors(&prob);
            Ok(Instance {
                problem: RobustProblem::Coeff(prob),
                baseline,
                coupled_static: None,
                factors,
            })
        }
    }
}

fn build_rhs_instance(prob: RhsRobustProblem, cfg: &ExperimentConfig) -> Result<Instance> {
    let stat = RhsRobustProblem { adaptive: false, ..prob.clone() };
    let uncoupled = RobustProblem::Rhs(RhsRobustProblem {
        uncertainty: prob.uncertainty.constraint_wise(),
        ..stat.clone()
    });
    let baseline = solve(&uncoupled, Method::Projection, &cfg.opts)?.objective;
    let coupled_static =
        Some(solve(&RobustProblem::Rhs(stat), Method::Projection, &cfg.opts)?.objective);
    let factors = compute_rhs_factors(
        &prob.uncertainty.constraint_wise().simplified(),
        &prob.uncertainty,
    )
    .map_err(|e| e.to_string());
    Ok(Instance {
        problem: RobustProblem::Rhs(prob),
        baseline,
        coupled_static,
        factors,
    })
}

/// Coefficient-family factors after translation; dimension caps make this a
/// best-effort computation for the portfolio sizes.
fn portfolio_factors(
    prob: &crate::model::CoeffRobustProblem,
) -> std::result::Result<ShrinkageReport, String> {
    let translate = prob.canonical_translate().map_err(|e| e.to_string())?;
    let shifted = translate.0;
    compute_coeff_factors(&shifted.uncertainty.constraint_wise(), &shifted.uncertainty)
        .map_err(|e| e.to_string())
}

fn family_kind(family: ExperimentFamily) -> FamilyKind {
    match family {
        ExperimentFamily::Portfolio => FamilyKind::CoeffMax,
        _ => FamilyKind::RhsMin,
    }
}

/// Bound interval for a row's ratio under the family and adaptivity.
fn ratio_bounds(
    report: &ShrinkageReport,
    kind: FamilyKind,
    adaptive: bool,
) -> (f64, f64) {
    let inv = |v: f64| if v > 1e-12 { 1.0 / v } else { f64::INFINITY };
    match (kind, adaptive) {
        (FamilyKind::RhsMin, false) => (report.rho_ro, report.gamma_ro),
        (FamilyKind::RhsMin, true) => (report.rho_aro, report.gamma_aro),
        (FamilyKind::CoeffMax, false) => (inv(report.gamma_ro), inv(report.rho_ro)),
        (FamilyKind::CoeffMax, true) => (inv(report.gamma_aro), inv(report.rho_aro)),
    }
}

fn verdict_for(
    report: &ShrinkageReport,
    kind: FamilyKind,
    adaptive: bool,
    baseline: f64,
    objective: f64,
    coupled_static: Option<f64>,
    tol: f64,
) -> String {
    let zs = match (kind, adaptive) {
        (FamilyKind::RhsMin, false) | (FamilyKind::CoeffMax, false) => ObjectiveValues {
            z_ro: Some(baseline),
            z_cp: Some(objective),
            ..Default::default()
        },
        (_, true) => ObjectiveValues {
            z_aro: Some(baseline),
            z_acp: Some(objective),
            z_cp: coupled_static,
            ..Default::default()
        },
    };
    match bound_check(report, kind, &zs, tol) {
        Ok(BoundVerdict { checks, all_pass: true }) => {
            let _ = checks;
            "pass".to_string()
        }
        Ok(v) => {
            let failed: Vec<String> = v
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{}({:+.3e})", c.name, c.slack))
                .collect();
            format!("fail:{}", failed.join(";"))
        }
        Err(e) => format!("skipped:{e}"),
    }
}

/// Runs every `(instance, method)` pair of a config. Instances run in a work
/// pool; rows come back ordered by instance seed and method.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let indices: Vec<u64> = (0..cfg.instances as u64).collect();
    let mut rows: Vec<(u64, Vec<ResultRow>)> = indices
        .par_iter()
        .map(|&idx| {
            let seed = mix_seed(cfg.seed, idx);
            (idx, run_instance(cfg, seed))
        })
        .collect();
    rows.sort_by_key(|(idx, _)| *idx);
    Ok(rows.into_iter().flat_map(|(_, r)| r).collect())
}

fn run_instance(cfg: &ExperimentConfig, seed: u64) -> Vec<ResultRow> {
    let kind = family_kind(cfg.family);
    let base_row = |method: &str| ResultRow {
        family: cfg.family.to_string(),
        size: cfg.size,
        seed,
        method: method.to_string(),
        objective: None,
        baseline: None,
        ratio: None,
        rho_ro: None,
        gamma_ro: None,
        rho_aro: None,
        gamma_aro: None,
        rho_adapt: None,
        lower_bound: None,
        upper_bound: None,
        runtime_s: 0.0,
        verdict: String::new(),
    };
    let instance = match build_instance(cfg, seed) {
        Ok(i) => i,
        Err(e) => {
            let mut row = base_row("generator");
            row.verdict = format!("error:{e}");
            return vec![row];
        }
    };
    let mut out = Vec::with_capacity(cfg.methods.len());
    for method in &cfg.methods {
        let mut row = base_row(&method.to_string());
        row.baseline = Some(instance.baseline);
        if let Ok(report) = &instance.factors {
            row.rho_ro = Some(report.rho_ro);
            row.gamma_ro = Some(report.gamma_ro);
            row.rho_aro = Some(report.rho_aro);
            row.gamma_aro = Some(report.gamma_aro);
            row.rho_adapt = Some(report.rho_adapt);
            let (lb, ub) = ratio_bounds(report, kind, cfg.adaptive);
            row.lower_bound = Some(lb);
            row.upper_bound = Some(ub);
        }
        match solve(&instance.problem, *method, &cfg.opts) {
            Ok(SolveResult { status: SolveStatus::Optimal, objective, wall_time_s, .. }) => {
                row.objective = Some(objective);
                row.ratio = Some(objective / instance.baseline);
                row.runtime_s = wall_time_s;
                row.verdict = match &instance.factors {
                    Ok(report) => verdict_for(
                        report,
                        kind,
                        cfg.adaptive,
                        instance.baseline,
                        objective,
                        instance.coupled_static,
                        1e-6,
                    ),
                    Err(reason) => format!("skipped:{reason}"),
                };
            }
            Ok(res) => {
                row.verdict = format!("error:status {:?}", res.status);
            }
            Err(e) => {
                row.verdict = format!("error:{e}");
            }
        }
        out.push(row);
    }
    out
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec.map_err(|e| Error::Parse(e.to_string()))?);
    }
    Ok(rows)
}

/// One aggregated sweep point: `x`, ratio mean and standard deviation, and
/// the theoretical band.
#[derive(Debug, Clone, Serialize)]
pub struct PlotPoint {
    pub x: f64,
    pub mean: f64,
    pub std: f64,
    pub lb: f64,
    pub ub: f64,
}

pub fn aggregate(rows: &[ResultRow], x: f64) -> Option<PlotPoint> {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    if ratios.is_empty() {
        return None;
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let lb = rows
        .iter()
        .filter_map(|r| r.lower_bound)
        .fold(f64::INFINITY, f64::min);
    let ub = rows
        .iter()
        .filter_map(|r| r.upper_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    Some(PlotPoint { x, mean, std: var.sqrt(), lb, ub })
}

/// Tab-separated plot data: `x  mean  std  lb  ub`.
pub fn write_plot_tsv<W: std::io::Write>(points: &[PlotPoint], mut out: W) -> Result<()> {
    writeln!(out, "x\tmean\tstd\tlb\tub")?;
    for p in points {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", p.x, p.mean, p.std, p.lb, p.ub)?;
    }
    Ok(())
}

/// Full bound verification of one problem file: factors, objectives per
/// applicable method, and the per-theorem verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub factors: ShrinkageReport,
    pub values: ObjectiveValues,
    pub verdict: BoundVerdict,
}

pub fn verify_bounds(problem: &RobustProblem, opts: &SolveOptions) -> Result<VerifyReport> {
    problem.validate()?;
    match problem {
        RobustProblem::Rhs(p) => {
            let factors = compute_rhs_factors(
                &p.uncertainty.constraint_wise().simplified(),
                &p.uncertainty,
            )?;
            let stat = RhsRobustProblem { adaptive: false, ..p.clone() };
            let uncoupled = RobustProblem::Rhs(RhsRobustProblem {
                uncertainty: p.uncertainty.constraint_wise(),
                ..stat.clone()
            });
            let z_ro = solve(&uncoupled, Method::Projection, opts)?.objective;
            let z_cp = solve(&RobustProblem::Rhs(stat), Method::Projection, opts)?.objective;
            let mut values = ObjectiveValues {
                z_ro: Some(z_ro),
                z_cp: Some(z_cp),
                ..Default::default()
            };
            if p.adaptive {
                // Constraint-wise static optimality pins the uncoupled
                // adaptive value to the static one.
                values.z_aro = Some(z_ro);
                let coupled = RobustProblem::Rhs(p.clone());
                let acp = solve(&coupled, Method::Vertex, opts)
                    .or_else(|_| solve(&coupled, Method::Benders, opts))?;
                values.z_acp = Some(acp.objective);
            }
            let verdict = bound_check(&factors, FamilyKind::RhsMin, &values, opts.tol.max(1e-9))?;
            Ok(VerifyReport { factors, values, verdict })
        }
        RobustProblem::Coeff(p) => {
            let (shifted, _) = p.canonical_translate()?;
            let factors = compute_coeff_factors(
                &shifted.uncertainty.constraint_wise(),
                &shifted.uncertainty,
            )?;
            let stat = crate::model::CoeffRobustProblem { adaptive: false, ..p.clone() };
            let uncoupled = RobustProblem::Coeff(stat.uncoupled());
            let z_ro = solve(&uncoupled, Method::CuttingPlane, opts)?.objective;
            let z_cp =
                solve(&RobustProblem::Coeff(stat), Method::CuttingPlane, opts)?.objective;
            let values = ObjectiveValues {
                z_ro: Some(z_ro),
                z_cp: Some(z_cp),
                ..Default::default()
            };
            let verdict = bound_check(&factors, FamilyKind::CoeffMax, &values, opts.tol.max(1e-9))?;
            Ok(VerifyReport { factors, values, verdict })
        }
    }
}
