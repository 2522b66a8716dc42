//! Ground state from the Bethe equations, checked against exact diagonalization.

use competing_chain::bae::{bae_residual, energy_from_roots, regime_of, solve_ground_state, SolverOptions};
use competing_chain::model::ModelParams;
use competing_chain::spectrum::{ground_state_roots, FitOptions};

fn main() -> competing_chain::Result<()> {
    let params = ModelParams::with_q_bar(8, 0.66, 1.2, -0.3, 1.2)?;
    let regime = regime_of(params.p, params.q_bar())?;
    let sol = solve_ground_state(regime, &params, &SolverOptions::default())?;
    let (e_ed, _) = ground_state_roots(&params, &FitOptions::default())?;
    println!("regime {regime}, {} Newton iterations, residual {:.1e}", sol.iterations, sol.residual);
    println!("product-form residual {:.1e}", bae_residual(&sol.roots, &params)?.max_abs());
    println!("energy {:.12} (exact {:.12})", energy_from_roots(&sol.roots, &params)?, e_ed);

    // Larger chains are out of reach for dense diagonalization but not for the solver.
    let big = ModelParams::with_q_bar(20, 0.66, 1.2, -0.3, 1.2)?;
    let sol = solve_ground_state(regime, &big, &SolverOptions::default())?;
    println!("2N = 20: energy {:.10}", energy_from_roots(&sol.roots, &big)?);
    Ok(())
}
