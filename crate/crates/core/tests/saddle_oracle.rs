mod common;

use bro_mimo::asymptotics::{inner_max_gamma, minmax_objective, solve_minmax, AsymptoticInput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn saddle_matches_grid_search_on_random_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let input = common::random_spectrum(&mut rng);
        let sol = solve_minmax(&input).unwrap_or_else(|e| panic!("case {case} {input:?}: {e}"));
        let (mu, gamma) = common::brute_force_saddle(&input);
        assert!(
            (sol.mu_star - mu).abs() <= 1e-3 && (sol.gamma_star - gamma).abs() <= 1e-3,
            "case {case} {input:?}: solver ({}, {}) grid ({mu}, {gamma})",
            sol.mu_star,
            sol.gamma_star
        );
    }
}

#[test]
fn saddle_value_dominates_neighbours() {
    let input = AsymptoticInput::new(vec![0.3, 0.9, 1.4, 2.0], vec![0.2, 0.1, 0.05, 0.0], 8.0, 3).unwrap();
    let sol = solve_minmax(&input).unwrap();
    for d in [0.9, 0.99, 1.01, 1.1] {
        let (_, v) = inner_max_gamma(sol.mu_star * d, &input).unwrap();
        assert!(v >= sol.objective - 1e-12, "outer minimum violated at factor {d}");
        let w = minmax_objective(sol.mu_star, sol.gamma_star * d, &input);
        assert!(w <= sol.objective + 1e-12, "inner maximum violated at factor {d}");
    }
}

#[test]
fn richer_snr_gives_larger_mu() {
    let mk = |rho| AsymptoticInput::new(vec![1.0; 6], vec![0.0; 6], rho, 4).unwrap();
    let mut prev = 0.0;
    for rho in [1.0, 3.0, 10.0, 30.0, 100.0] {
        let mu = solve_minmax(&mk(rho)).unwrap().mu_star;
        assert!(mu > prev);
        prev = mu;
    }
}
