use coupled_ro::experiments::{gen_portfolio, PortfolioCoupling};
use coupled_ro::sets::maximize_linear;

#[test]
fn probe2() {
    let prob = gen_portfolio(5, 2, &PortfolioCoupling { common_factors: true, sectors: false }).unwrap();
    let dim = prob.uncertainty.dim;
    let t0 = std::time::Instant::now();
    let mut c = vec![0.0; dim];
    c[0] = 1.0; c[7] = -0.5; c[13] = 0.3;
    let (v, _) = maximize_linear(&prob.uncertainty, &c).unwrap();
    eprintln!("one separation LP: val={v} time={:?}", t0.elapsed());
    let t0 = std::time::Instant::now();
    let lp = coupled_ro::model::build_rc_static_coeff(&prob, coupled_ro::model::RcForm::Combined).unwrap();
    eprintln!("rc build: {:?}  rows={} cols={}", t0.elapsed(), lp.ineq.rows + lp.eq.rows, lp.num_vars());
    let t0 = std::time::Instant::now();
    let sol = coupled_ro::lp::solve_lp(&lp).unwrap();
    eprintln!("rc solve: obj={} status={:?} time={:?}", sol.objective, sol.status, t0.elapsed());
}
