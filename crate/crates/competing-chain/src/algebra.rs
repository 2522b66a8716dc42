//! Dense complex matrices and the integrable building blocks: the rational
//! R-matrix `u + P` and the boundary reflection matrices.
//!
//! Space ordering: in every tensor product the first factor is the slowest
//! index. The auxiliary space is always the leftmost factor.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default cap on the dimension of any dense matrix built by this crate.
pub const DEFAULT_DIM_CAP: usize = 1 << 13;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Kronecker product with the default dimension cap.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kron_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn kron_capped(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let dim = a.nrows() * b.nrows();
    if dim > cap || a.ncols() * b.ncols() > cap {
        return Err(Error::Size { dim, cap });
    }
    Ok(a.kronecker(b))
}

/// Largest entrywise modulus.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Swap operator on two spin-1/2 spaces, built as (1 + σ·σ)/2.
pub fn permutation_operator() -> CMatrix {
    let mut p = identity(4);
    for s in [sigma_x(), sigma_y(), sigma_z()] {
        p += s.kronecker(&s);
    }
    p * c(0.5, 0.)
}

pub fn r_matrix(u: C64) -> CMatrix {
    identity(4) * u + permutation_operator()
}

pub fn k_minus(u: C64, p: f64) -> CMatrix {
    let mut k = CMatrix::zeros(2, 2);
    k[(0, 0)] = p + u;
    k[(1, 1)] = p - u;
    k
}

pub fn k_plus(u: C64, q: f64, xi: f64) -> CMatrix {
    let off = (u + 1.0) * xi;
    CMatrix::from_row_slice(2, 2, &[q + u + 1.0, off, off, q - u - 1.0])
}

fn r12_in_three(u: C64) -> CMatrix {
    r_matrix(u).kronecker(&identity(2))
}

fn r23_in_three(u: C64) -> CMatrix {
    identity(2).kronecker(&r_matrix(u))
}

fn r13_in_three(u: C64) -> CMatrix {
    let p23 = identity(2).kronecker(&permutation_operator());
    &p23 * r12_in_three(u) * &p23
}

/// Max-norm of the difference of the two sides of the Yang-Baxter equation
/// R12(u1-u2) R13(u1-u3) R23(u2-u3) = R23(u2-u3) R13(u1-u3) R12(u1-u2).
pub fn yang_baxter_residual(u1: C64, u2: C64, u3: C64) -> f64 {
    let r12 = r12_in_three(u1 - u2);
    let r13 = r13_in_three(u1 - u3);
    let r23 = r23_in_three(u2 - u3);
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    max_norm(&(lhs - rhs))
}

/// Which reflection equation to check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reflection {
    /// Left boundary with parameter p.
    Left { p: f64 },
    /// Right boundary (dual equation) with parameters q, xi.
    Right { q: f64, xi: f64 },
}

/// Max-norm residual of the reflection equation (left) or its dual (right).
pub fn reflection_residual(lambda: C64, u: C64, which: Reflection) -> f64 {
    let perm = permutation_operator();
    let r12 = |x: C64| r_matrix(x);
    let r21 = |x: C64| &perm * r_matrix(x) * &perm;
    let in1 = |k: CMatrix| k.kronecker(&identity(2));
    let in2 = |k: CMatrix| identity(2).kronecker(&k);
    let (lhs, rhs) = match which {
        Reflection::Left { p } => {
            let k1 = in1(k_minus(lambda, p));
            let k2 = in2(k_minus(u, p));
            (
                r12(lambda - u) * &k1 * r21(lambda + u) * &k2,
                &k2 * r12(lambda + u) * &k1 * r21(lambda - u),
            )
        }
        Reflection::Right { q, xi } => {
            let k1 = in1(k_plus(lambda, q, xi));
            let k2 = in2(k_plus(u, q, xi));
            (
                r12(-lambda + u) * &k1 * r21(-lambda - u - 2.0) * &k2,
                &k2 * r12(-lambda - u - 2.0) * &k1 * r21(-lambda + u),
            )
        }
    };
    max_norm(&(lhs - rhs))
}
