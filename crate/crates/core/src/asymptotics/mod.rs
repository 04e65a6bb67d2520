//! Asymptotic MSE/BER predictions for the box-relaxation decoder.
//!
//! Everything here is a pure function of its arguments.

mod saddle;
mod scalar;
mod sphere_box;

pub use saddle::{inner_max_gamma, minmax_objective, solve_minmax, AsymptoticInput, AsymptoticSolution};
pub use scalar::{
    big_f, big_f_prime, normal_pdf, q_function, solve_mu_of_xi, upsilon, upsilon_prime, varphi, SERIES_THRESHOLD,
};
pub use sphere_box::{sphere_box_min, sphere_box_minimizer, SphereBoxMin};
