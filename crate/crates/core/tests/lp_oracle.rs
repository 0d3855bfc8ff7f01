mod common;

use bernstein_convex::lp::{solve_lp, LpStatus};
use bernstein_convex::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = Scalar::from_f64(1e-25);
    for case in 0..20 {
        let vars = 1 + case % 6;
        let p = common::random_feasible_lp(&mut rng, vars, 2 + case % 4);
        let sol = solve_lp(&p, &tol).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
        let oracle = common::vertex_enumeration(&p, &Scalar::from_f64(1e-40)).unwrap();
        assert!((&sol.objective_value - &oracle).abs() <= tol, "case {case}");
        assert!(sol.primal_residual <= tol);
        assert!(sol.dual_residual <= tol);
        assert!(sol.complementarity_gap <= tol);
    }
}

#[test]
fn grid_oracle_reproduces_abs_degree_two() {
    let e = common::grid_minimax(f64::abs, 2, 2001, false);
    assert!((e - 0.125).abs() < 1e-9);
}


/// The certified upper bound must dominate the error of the returned
/// polynomial on a dense f64 grid. The convex optimum for |x|^1.5 at n = 18
/// has sign runs holding several near-equal humps.
#[test]
fn convex_upper_bound_dominates_dense_scan() {
    use bernstein_convex::{best_convex_approx, SolverOptions, TargetSpec};
    let f = TargetSpec::abs_pow_f64(1.5).unwrap();
    let opts = SolverOptions::new(Scalar::from_f64(1e-16)).unwrap();
    for n in [18, 19] {
        let r = best_convex_approx(&f, n, &opts).unwrap();
        let c: Vec<f64> = r.polynomial.coeffs().iter().map(Scalar::to_f64).collect();
        let m = 200_000;
        let dense = (0..=m)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / m as f64;
                let (t, _) = common::chebyshev_f64(n, x);
                let p: f64 = c.iter().zip(&t).map(|(a, b)| a * b).sum();
                (x.abs().powf(1.5) - p).abs()
            })
            .fold(0.0, f64::max);
        assert!(dense <= r.error_upper.to_f64() + 1e-15, "n={n}: {dense} > {}", r.error_upper);
    }
}
