//! Couplings of the chain and agreement of the two Hamiltonian constructions.

use competing_chain::algebra::max_norm;
use competing_chain::model::{couplings, hamiltonian_direct, hamiltonian_from_transfer, ModelParams};

fn main() -> competing_chain::Result<()> {
    let params = ModelParams::with_q_bar(6, 0.66, 1.2, 0.7, 1.2)?;
    let k = couplings(&params)?;
    println!("nearest neighbour {}, next nearest {}, chiral {}", k.j1_bulk, k.j2, k.j3.re);
    println!("first bond {}, last bond {}", k.j1(1, 6), k.j1(5, 6));
    let h = hamiltonian_direct(&params)?;
    let ht = hamiltonian_from_transfer(&params)?;
    println!("dimension {}", h.nrows());
    println!("max |H_direct - H_transfer| = {:.2e}", max_norm(&(h - ht)));
    Ok(())
}
