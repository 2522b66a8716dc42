//! Yang-Baxter and reflection-equation residuals at a few spectral points.

use competing_chain::algebra::{c, reflection_residual, yang_baxter_residual, Reflection};

fn main() {
    let points = [c(0.3, 0.0), c(-1.2, 0.4), c(0.7, -0.9), c(2.1, 1.3)];
    for w in points.windows(3) {
        println!(
            "yang-baxter residual at ({}, {}, {}): {:.2e}",
            w[0], w[1], w[2],
            yang_baxter_residual(w[0], w[1], w[2])
        );
    }
    let (lambda, u) = (c(0.4, 0.1), c(-0.9, 0.3));
    let left = reflection_residual(lambda, u, Reflection::Left { p: 1.3 });
    let right = reflection_residual(lambda, u, Reflection::Right { q: 0.5, xi: 1.2 });
    println!("reflection residuals: left {left:.2e}, right {right:.2e}");
}
