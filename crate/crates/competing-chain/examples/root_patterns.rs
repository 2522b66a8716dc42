//! Classification of ground-state root patterns across the six regimes.

use competing_chain::bae::{classify_pattern, regime_of};
use competing_chain::model::ModelParams;
use competing_chain::spectrum::{ground_state_roots, FitOptions};

fn main() -> competing_chain::Result<()> {
    let points = [(0.3, 0.1), (0.1, -0.15), (1.2, 0.2), (1.2, -0.3), (1.2, 0.7), (1.2, -0.8)];
    for (p, q_bar) in points {
        let params = ModelParams::with_q_bar(8, 0.66, p, q_bar, 1.2)?;
        let (_, roots) = ground_state_roots(&params, &FitOptions::default())?;
        let pattern = classify_pattern(&roots, &params);
        println!(
            "p = {p:+.2}, q_bar = {q_bar:+.2}: box {}, pattern {}, 2-strings {}, boundary pairs {:?}, real pair {:?}, imaginary pair {:?}",
            regime_of(p, q_bar)?,
            pattern.regime,
            pattern.pairs_n2.len(),
            pattern.boundary_pairs,
            pattern.real_pair,
            pattern.imaginary_pair
        );
    }
    Ok(())
}
