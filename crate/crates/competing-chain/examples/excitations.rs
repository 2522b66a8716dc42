//! Bulk, string and boundary excitation energies.

use competing_chain::model::ModelParams;
use competing_chain::thermo::{
    boundary_excitation_energy, bulk_excitation_energy, string_excitation_energy, QuadratureSpec,
};

fn main() -> competing_chain::Result<()> {
    let spec = QuadratureSpec::default();
    for a_bar in [0.0, 0.8] {
        let params = ModelParams::new(8, a_bar, 1.0, 1.0, 1.2)?;
        print!("a_bar = {a_bar}, pair on the real axis:");
        for z in [0.0, 0.4, 0.8, 1.2, 2.0] {
            print!(" {:.4}", bulk_excitation_energy(z, &params, &spec)?);
        }
        println!();
        println!(
            "  3-string at 0.5 carries {:.1e}",
            string_excitation_energy(3, 0.5, &params, &spec)?
        );
        print!("  boundary string:");
        for b in [0.1, 0.2, 0.3, 0.4] {
            print!(" {:.4}", boundary_excitation_energy(b, &params, &spec)?);
        }
        println!();
    }
    Ok(())
}
