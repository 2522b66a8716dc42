//! Exact diagonalization and the zero roots of the lowest eigenvalues.

use competing_chain::bae::energy_from_roots;
use competing_chain::model::ModelParams;
use competing_chain::spectrum::{diagonalize, extract_zero_roots, fit_lambda_polynomial, FitOptions};

fn main() -> competing_chain::Result<()> {
    let params = ModelParams::with_q_bar(8, 0.66, 1.2, 0.7, 1.2)?;
    let spectrum = diagonalize(&params)?;
    for (k, pair) in spectrum.iter().take(3).enumerate() {
        let poly = fit_lambda_polynomial(&pair.state, &params, &FitOptions::default())?;
        let roots = extract_zero_roots(&poly, &params)?;
        println!(
            "state {k}: E = {:.12}, from roots {:.12}, fit holdout {:.1e}",
            pair.energy,
            energy_from_roots(&roots, &params)?,
            poly.holdout_residual
        );
        if k == 0 {
            for z in roots.zbar() {
                println!("  zbar = {:+.6} {:+.6}i", z.re, z.im);
            }
        }
    }
    Ok(())
}
