//! Ground energies from the Bethe equations at growing size against the bulk
//! and surface energies of the thermodynamic limit.

use competing_chain::bae::{energy_from_roots, solve_ground_state, Regime, SolverOptions};
use competing_chain::model::ModelParams;
use competing_chain::thermo::{bulk_energy_per_site, surface_energy, QuadratureSpec};

fn main() -> competing_chain::Result<()> {
    let spec = QuadratureSpec::default();
    let bulk = bulk_energy_per_site(0.6, &spec)?.value;
    let surface = surface_energy(&ModelParams::with_q_bar(8, 0.6, 1.0, 0.8, 1.2)?, &spec)?.value;
    println!("bulk per site {bulk:.8}, surface {surface:.8}");
    for two_n in (8..=20).step_by(2) {
        let params = ModelParams::with_q_bar(two_n, 0.6, 1.0, 0.8, 1.2)?;
        let sol = solve_ground_state(Regime::V, &params, &SolverOptions::default())?;
        let e = energy_from_roots(&sol.roots, &params)?;
        println!("2N = {two_n:>2}: E = {e:.10}, E - 2N e = {:.6}", e - two_n as f64 * bulk);
    }
    Ok(())
}
