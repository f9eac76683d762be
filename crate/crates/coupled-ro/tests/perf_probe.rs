use coupled_ro::experiments::{gen_portfolio, PortfolioCoupling};
use coupled_ro::model::RobustProblem;
use coupled_ro::solvers::{solve, Method, SolveOptions};

#[test]
fn probe() {
    let prob = gen_portfolio(5, 2, &PortfolioCoupling { common_factors: true, sectors: false }).unwrap();
    let t0 = std::time::Instant::now();
    let opts = SolveOptions::with_tol(1e-7);
    let res = solve(&RobustProblem::Coeff(prob.clone()), Method::CuttingPlane, &opts).unwrap();
    eprintln!("coupled cp: obj={} iters={} time={:?}", res.objective, res.iterations, t0.elapsed());
    let t0 = std::time::Instant::now();
    let res = solve(&RobustProblem::Coeff(prob.clone()), Method::Rc, &opts).unwrap();
    eprintln!("coupled rc: obj={} time={:?}", res.objective, t0.elapsed());
}
