//! A configuration file driving a parallel sweep with in-band divergence markers.

use competing_chain::cli::{scan_rows, Quantity, ScanSpec, Sweep};
use competing_chain::config::Config;

fn main() -> competing_chain::Result<()> {
    let cfg = Config::parse("a_bar = 0.66\np = 1.2\nq_bar = 0.7\nxi = 1.2\n")?;
    print!("{}", cfg.to_text());
    let spec = ScanSpec {
        quantity: Quantity::SurfaceEnergy,
        sweep: Sweep::P,
        from: -1.0,
        to: 1.0,
        points: 9,
        n: 3,
    };
    for row in scan_rows(&cfg, &spec)? {
        println!("p = {:+.2}: {:?} ({})", row.x, row.value, row.status);
    }
    Ok(())
}
