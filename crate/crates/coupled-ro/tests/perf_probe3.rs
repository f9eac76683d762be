use coupled_ro::lp::{solve_lp, LinearProgram};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn build(m: usize, pairs: bool) -> LinearProgram {
    // 5 blocks of 8 dims, 30 random rows each, equalities tying first 4 coords.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = 8; let dim = m * p;
    let mut lp = LinearProgram::maximize((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let mbar: Vec<Vec<f64>> = (0..30).map(|_| (0..p).map(|_| rng.gen_range(-2.5..2.5)).collect()).collect();
    let w: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sbar: Vec<f64> = mbar.iter().map(|r| r.iter().zip(&w).map(|(a,b)| a*b).sum::<f64>() + rng.gen_range(0.0..100.0)).collect();
    for i in 0..m {
        for (r, rhs) in mbar.iter().zip(&sbar) {
            let mut row = vec![0.0; dim];
            for k in 0..p { row[i*p+k] = r[k] + rng.gen_range(-0.5..0.5); }
            lp.add_ineq(row, rhs + rng.gen_range(-0.5..0.5));
        }
    }
    for i in 1..m {
        for j in 0..4 {
            let mut row = vec![0.0; dim];
            row[i*p+j] = 1.0; row[j] = -1.0;
            if pairs {
                lp.add_ineq(row.clone(), 0.0);
                lp.add_ineq(row.iter().map(|v| -v).collect(), 0.0);
            } else {
                lp.add_eq(row, 0.0);
            }
        }
    }
    lp
}

#[test]
fn probe3() {
    let lp = build(5, false);
    let t0 = std::time::Instant::now();
    let sol = solve_lp(&lp).unwrap();
    eprintln!("EQ form: {:?} obj={} time={:?}", sol.status, sol.objective, t0.elapsed());
    let lp = build(5, true);
    let t0 = std::time::Instant::now();
    let sol = solve_lp(&lp).unwrap();
    eprintln!("PAIR form: {:?} obj={} time={:?}", sol.status, sol.objective, t0.elapsed());
}
