//! Surface energy and its parts in the thermodynamic limit.

use competing_chain::model::ModelParams;
use competing_chain::thermo::{bulk_energy_per_site, surface_energy, QuadratureSpec};

fn main() -> competing_chain::Result<()> {
    let spec = QuadratureSpec::default();
    for a_bar in [0.0, 0.6, 0.8] {
        let params = ModelParams::with_q_bar(8, a_bar, 1.0, 0.8, 1.2)?;
        let eb = surface_energy(&params, &spec)?;
        let bulk = bulk_energy_per_site(a_bar, &spec)?;
        println!("a_bar = {a_bar}: bulk per site {:.10}, surface {:.10}", bulk.value, eb.value);
        for (name, v) in &eb.components {
            println!("  {name:>15} {v:+.10}");
        }
    }
    Ok(())
}
