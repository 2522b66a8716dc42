//! The open chain: parameters, couplings, the Hamiltonian built from explicit
//! spin couplings, and the double-row transfer matrix with its derivative.
//!
//! Site j (1-based) is tensor factor j; basis bit 0 is spin up. In extended
//! vectors the auxiliary spin is the most significant bit.

use serde::{Deserialize, Serialize};

use crate::algebra::{c, identity, max_norm, CMatrix, C64, DEFAULT_DIM_CAP};
use crate::error::{Error, Result};

/// Largest chain length for which dense operators are built.
pub const DENSE_TWO_N_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of sites (2N).
    pub two_n: usize,
    /// a = i * a_bar.
    pub a_bar: f64,
    pub p: f64,
    pub q: f64,
    pub xi: f64,
    /// Inhomogeneities theta_j = i * theta_bar_j, one per site.
    pub theta_bar: Vec<f64>,
}

impl ModelParams {
    pub fn new(two_n: usize, a_bar: f64, p: f64, q: f64, xi: f64) -> Result<Self> {
        let params = ModelParams {
            two_n,
            a_bar,
            p,
            q,
            xi,
            theta_bar: vec![0.0; two_n],
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from the reduced right boundary value q_bar = q / sqrt(1 + xi^2).
    pub fn with_q_bar(two_n: usize, a_bar: f64, p: f64, q_bar: f64, xi: f64) -> Result<Self> {
        Self::new(two_n, a_bar, p, q_bar * (1.0 + xi * xi).sqrt(), xi)
    }

    pub fn with_theta(mut self, theta_bar: Vec<f64>) -> Result<Self> {
        self.theta_bar = theta_bar;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_n < 4 || self.two_n % 2 != 0 {
            return Err(Error::param("two_n", "must be even and at least 4"));
        }
        for (key, v) in [
            ("a_bar", self.a_bar),
            ("p", self.p),
            ("q", self.q),
            ("xi", self.xi),
        ] {
            if !v.is_finite() {
                return Err(Error::param(key, "must be finite"));
            }
        }
        if self.theta_bar.len() != self.two_n {
            return Err(Error::param(
                "theta_bar",
                format!("expected {} values, got {}", self.two_n, self.theta_bar.len()),
            ));
        }
        if self.theta_bar.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("theta_bar", "must be finite"));
        }
        if self.p * self.p + self.a_bar * self.a_bar == 0.0 {
            return Err(Error::param("p", "p^2 - a^2 vanishes"));
        }
        if self.right_denominator() == 0.0 {
            return Err(Error::param("q", "a^2 xi^2 + a^2 - q^2 vanishes"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.two_n / 2
    }

    pub fn a(&self) -> C64 {
        c(0., self.a_bar)
    }

    /// a^2 = -a_bar^2, real.
    pub fn a2(&self) -> f64 {
        -self.a_bar * self.a_bar
    }

    pub fn xi_norm(&self) -> f64 {
        (1.0 + self.xi * self.xi).sqrt()
    }

    pub fn q_bar(&self) -> f64 {
        self.q / self.xi_norm()
    }

    pub fn theta(&self, j: usize) -> C64 {
        c(0., self.theta_bar[j - 1])
    }

    pub fn is_homogeneous(&self) -> bool {
        self.theta_bar.iter().all(|&t| t == 0.0)
    }

    pub fn homogeneous(&self) -> Self {
        ModelParams {
            theta_bar: vec![0.0; self.two_n],
            ..self.clone()
        }
    }

    /// a^2 xi^2 + a^2 - q^2.
    pub fn right_denominator(&self) -> f64 {
        self.a2() * (1.0 + self.xi * self.xi) - self.q * self.q
    }

    /// p^2 - a^2.
    pub fn left_denominator(&self) -> f64 {
        self.p * self.p - self.a2()
    }
}

/// The inhomogeneity profile theta_bar_j = 0.1 (j - N - 1/2).
pub fn spread_profile(two_n: usize) -> Vec<f64> {
    let n = (two_n / 2) as f64;
    (1..=two_n).map(|j| 0.1 * (j as f64 - n - 0.5)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub j1_bulk: f64,
    pub j2: f64,
    /// i a, real in the hermitian regime.
    pub j3: C64,
    pub c1: f64,
    /// Correction on the last bond (2N-1).
    pub c_last: f64,
}

impl Couplings {
    /// Nearest-neighbour coefficient of bond j (1-based).
    pub fn j1(&self, bond: usize, two_n: usize) -> f64 {
        let mut v = self.j1_bulk;
        if bond == 1 {
            v += self.c1;
        }
        if bond == two_n - 1 {
            v += self.c_last;
        }
        v
    }
}

pub fn couplings(params: &ModelParams) -> Result<Couplings> {
    params.validate()?;
    let a2 = params.a2();
    let (p, q, xi) = (params.p, params.q, params.xi);
    let c1 = a2 * (1.0 - 2.0 * a2 - 2.0 * p * p) / params.left_denominator();
    let c_last = 2.0 * a2 + a2 * (4.0 * q * q - xi * xi - 1.0) / params.right_denominator();
    Ok(Couplings {
        j1_bulk: 1.0,
        j2: -2.0 * a2,
        j3: c(0., 1.) * params.a(),
        c1,
        c_last,
    })
}

/// c0 = -(2N-1)(2a^2-1) - (2a^4-6a^2+1)/(a^2-1).
pub fn c0(params: &ModelParams) -> f64 {
    let a2 = params.a2();
    -(params.two_n as f64 - 1.0) * (2.0 * a2 - 1.0)
        - (2.0 * a2 * a2 - 6.0 * a2 + 1.0) / (a2 - 1.0)
}

/// c2 = 8 (1-4a^2)^(2N-2) (p^2-a^2)(a^2-1)(a^2 xi^2 + a^2 - q^2).
pub fn c2(params: &ModelParams) -> f64 {
    let a2 = params.a2();
    8.0 * (1.0 - 4.0 * a2).powi(params.two_n as i32 - 2)
        * params.left_denominator()
        * (a2 - 1.0)
        * params.right_denominator()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pauli {
    X,
    Y,
    Z,
}

const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// Sum of Pauli strings; sites are 1-based.
#[derive(Default)]
struct PauliSum {
    terms: Vec<(C64, Vec<(usize, Pauli)>)>,
}

impl PauliSum {
    fn add(&mut self, coef: C64, ops: &[(usize, Pauli)]) {
        if coef != c(0., 0.) {
            self.terms.push((coef, ops.to_vec()));
        }
    }

    fn add_dot(&mut self, coef: C64, i: usize, j: usize) {
        for s in XYZ {
            self.add(coef, &[(i, s), (j, s)]);
        }
    }

    /// coef * sigma_m . (sigma_i x sigma_k)
    fn add_triple(&mut self, coef: C64, m: usize, i: usize, k: usize) {
        use Pauli::*;
        for (x, y, z, s) in [
            (X, Y, Z, 1.),
            (Y, Z, X, 1.),
            (Z, X, Y, 1.),
            (X, Z, Y, -1.),
            (Z, Y, X, -1.),
            (Y, X, Z, -1.),
        ] {
            self.add(coef * s, &[(m, x), (i, y), (k, z)]);
        }
    }

    fn to_dense(&self, two_n: usize) -> CMatrix {
        let dim = 1usize << two_n;
        let mut h = CMatrix::zeros(dim, dim);
        for (coef, ops) in &self.terms {
            for b in 0..dim {
                let mut out = b;
                let mut amp = *coef;
                for &(site, op) in ops {
                    let bit = 1usize << (two_n - site);
                    let down = out & bit != 0;
                    match op {
                        Pauli::X => out ^= bit,
                        Pauli::Y => {
                            amp *= if down { c(0., -1.) } else { c(0., 1.) };
                            out ^= bit;
                        }
                        Pauli::Z => {
                            if down {
                                amp = -amp;
                            }
                        }
                    }
                }
                h[(out, b)] += amp;
            }
        }
        h
    }
}

fn check_dense(params: &ModelParams) -> Result<()> {
    if params.two_n > DENSE_TWO_N_CAP {
        return Err(Error::Size {
            dim: 1 << params.two_n,
            cap: 1 << DENSE_TWO_N_CAP,
        });
    }
    Ok(())
}

/// Hamiltonian from the explicit bulk and boundary couplings (inhomogeneities ignored).
pub fn hamiltonian_direct(params: &ModelParams) -> Result<CMatrix> {
    check_dense(params)?;
    let cp = couplings(params)?;
    let l = params.two_n;
    let a = params.a();
    let a2 = c(params.a2(), 0.);
    let (p, q, xi) = (params.p, params.q, params.xi);
    let mut h = PauliSum::default();

    for j in 1..l {
        h.add_dot(c(cp.j1(j, l), 0.), j, j + 1);
        if j + 2 <= l {
            h.add_dot(c(cp.j2, 0.), j, j + 2);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            h.add_triple(cp.j3 * sign, j + 1, j, j + 2);
        }
    }

    use Pauli::*;
    let left = (c(1., 0.) - a2 * 4.0) / params.left_denominator();
    h.add(left * p, &[(1, Z)]);
    h.add(-left * a2, &[(1, Z), (2, Z)]);
    let dm = -left * c(0., 1.) * a * p;
    h.add(dm, &[(1, X), (2, Y)]);
    h.add(-dm, &[(1, Y), (2, X)]);

    let (m, n) = (l - 1, l);
    let right = (a2 * 4.0 - 1.0) / params.right_denominator();
    h.add(right * q * xi, &[(n, X)]);
    h.add(right * q, &[(n, Z)]);
    for (cm, om) in [(xi, X), (1.0, Z)] {
        for (cn, on) in [(xi, X), (1.0, Z)] {
            h.add(-right * a2 * cm * cn, &[(m, om), (n, on)]);
        }
    }
    // (sigma_n x sigma_m)_x = y_n z_m - z_n y_m ; (sigma_n x sigma_m)_z = x_n y_m - y_n x_m
    let dm = -right * c(0., 1.) * a * q;
    h.add(dm * xi, &[(n, Y), (m, Z)]);
    h.add(-dm * xi, &[(n, Z), (m, Y)]);
    h.add(dm, &[(n, X), (m, Y)]);
    h.add(-dm, &[(n, Y), (m, X)]);

    Ok(h.to_dense(l))
}

/// Affine factor of a monodromy product: R_{0,site}(u + shift).
#[derive(Clone, Copy)]
struct RFactor {
    site: usize,
    shift: C64,
}

/// Factors of T0 listed in application order (rightmost first).
fn t_factors(params: &ModelParams) -> Vec<RFactor> {
    let a = params.a();
    (1..=params.two_n)
        .map(|j| {
            let s = a + params.theta(j);
            RFactor {
                site: j,
                shift: if j % 2 == 0 { s } else { -s },
            }
        })
        .collect()
}

/// Factors of the reflected monodromy in application order (rightmost first).
fn t_hat_factors(params: &ModelParams) -> Vec<RFactor> {
    let a = params.a();
    (1..=params.two_n)
        .rev()
        .map(|j| {
            let s = a + params.theta(j);
            RFactor {
                site: j,
                shift: if j % 2 == 1 { s } else { -s },
            }
        })
        .collect()
}

/// Value and u-derivative carried through a product of affine factors.
struct Dual {
    v: Vec<C64>,
    dv: Vec<C64>,
}

fn swap_aux_site(v: &[C64], two_n: usize, site: usize) -> Vec<C64> {
    let dim = 1usize << two_n;
    let bit = 1usize << (two_n - site);
    let mut out = vec![c(0., 0.); 2 * dim];
    for (idx, &x) in v.iter().enumerate() {
        let alpha = idx / dim;
        let s = idx % dim;
        let beta = usize::from(s & bit != 0);
        let s2 = if alpha == 1 { s | bit } else { s & !bit };
        out[beta * dim + s2] += x;
    }
    out
}

fn apply_r(d: &mut Dual, f: RFactor, u: C64, two_n: usize, with_deriv: bool) {
    let x = u + f.shift;
    let pv = swap_aux_site(&d.v, two_n, f.site);
    if with_deriv {
        let pdv = swap_aux_site(&d.dv, two_n, f.site);
        for i in 0..d.v.len() {
            d.dv[i] = d.dv[i] * x + pdv[i] + d.v[i];
        }
    }
    for i in 0..d.v.len() {
        d.v[i] = d.v[i] * x + pv[i];
    }
}

/// Applies a 2x2 auxiliary matrix m(u) = m0 + u m1.
fn apply_aux(d: &mut Dual, m: [[C64; 2]; 2], dm: [[C64; 2]; 2], dim: usize, with_deriv: bool) {
    let (v, dv) = (&d.v, &d.dv);
    let mut nv = vec![c(0., 0.); 2 * dim];
    let mut ndv = vec![c(0., 0.); if with_deriv { 2 * dim } else { 0 }];
    for s in 0..dim {
        for r in 0..2 {
            nv[r * dim + s] = m[r][0] * v[s] + m[r][1] * v[dim + s];
            if with_deriv {
                ndv[r * dim + s] = m[r][0] * dv[s]
                    + m[r][1] * dv[dim + s]
                    + dm[r][0] * v[s]
                    + dm[r][1] * v[dim + s];
            }
        }
    }
    d.v = nv;
    d.dv = ndv;
}

fn k_minus_parts(u: C64, p: f64) -> ([[C64; 2]; 2], [[C64; 2]; 2]) {
    let z = c(0., 0.);
    (
        [[u + p, z], [z, -u + p]],
        [[c(1., 0.), z], [z, c(-1., 0.)]],
    )
}

fn k_plus_parts(u: C64, q: f64, xi: f64) -> ([[C64; 2]; 2], [[C64; 2]; 2]) {
    let off = (u + 1.0) * xi;
    (
        [[u + 1.0 + q, off], [off, q - u - 1.0]],
        [[c(1., 0.), c(xi, 0.)], [c(xi, 0.), c(-1., 0.)]],
    )
}

fn transfer_action(params: &ModelParams, u: C64, psi: &[C64], with_deriv: bool) -> (Vec<C64>, Vec<C64>) {
    let l = params.two_n;
    let dim = 1usize << l;
    assert_eq!(psi.len(), dim, "state length must be 2^(2N)");
    let hat = t_hat_factors(params);
    let t = t_factors(params);
    let (km, dkm) = k_minus_parts(u, params.p);
    let (kp, dkp) = k_plus_parts(u, params.q, params.xi);
    let mut out = vec![c(0., 0.); dim];
    let mut dout = vec![c(0., 0.); if with_deriv { dim } else { 0 }];
    for alpha in 0..2 {
        let mut v = vec![c(0., 0.); 2 * dim];
        v[alpha * dim..(alpha + 1) * dim].copy_from_slice(psi);
        let mut d = Dual {
            v,
            dv: vec![c(0., 0.); if with_deriv { 2 * dim } else { 0 }],
        };
        for f in &hat {
            apply_r(&mut d, *f, u, l, with_deriv);
        }
        apply_aux(&mut d, km, dkm, dim, with_deriv);
        for f in &t {
            apply_r(&mut d, *f, u, l, with_deriv);
        }
        apply_aux(&mut d, kp, dkp, dim, with_deriv);
        for s in 0..dim {
            out[s] += d.v[alpha * dim + s];
            if with_deriv {
                dout[s] += d.dv[alpha * dim + s];
            }
        }
    }
    (out, dout)
}

/// t(u) psi without forming the matrix.
pub fn apply_transfer(params: &ModelParams, u: C64, psi: &[C64]) -> Vec<C64> {
    transfer_action(params, u, psi, false).0
}

/// (t(u) psi, t'(u) psi) by exact product-rule differentiation.
pub fn apply_transfer_with_derivative(
    params: &ModelParams,
    u: C64,
    psi: &[C64],
) -> (Vec<C64>, Vec<C64>) {
    transfer_action(params, u, psi, true)
}

fn dense_from_columns(dim: usize, mut col: impl FnMut(&[C64]) -> Vec<C64>) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    let mut e = vec![c(0., 0.); dim];
    for j in 0..dim {
        e[j] = c(1., 0.);
        let v = col(&e);
        for (i, x) in v.into_iter().enumerate() {
            m[(i, j)] = x;
        }
        e[j] = c(0., 0.);
    }
    m
}

/// Dense t(u) = tr_0 [K+(u) T0(u) K-(u) T0hat(u)].
pub fn transfer_matrix(u: C64, params: &ModelParams) -> Result<CMatrix> {
    check_dense(params)?;
    Ok(dense_from_columns(1 << params.two_n, |e| {
        apply_transfer(params, u, e)
    }))
}

/// Dense t(u) and t'(u).
pub fn transfer_matrix_with_derivative(u: C64, params: &ModelParams) -> Result<(CMatrix, CMatrix)> {
    check_dense(params)?;
    let dim = 1usize << params.two_n;
    let mut t = CMatrix::zeros(dim, dim);
    let mut dt = CMatrix::zeros(dim, dim);
    let mut e = vec![c(0., 0.); dim];
    for j in 0..dim {
        e[j] = c(1., 0.);
        let (v, dv) = apply_transfer_with_derivative(params, u, &e);
        for i in 0..dim {
            t[(i, j)] = v[i];
            dt[(i, j)] = dv[i];
        }
        e[j] = c(0., 0.);
    }
    Ok((t, dt))
}

/// Dense monodromy on auxiliary (leftmost) times quantum space.
/// `reflected` selects the reflected product.
pub fn monodromy(u: C64, params: &ModelParams, reflected: bool) -> Result<CMatrix> {
    let dim = 2usize << params.two_n;
    if dim > DEFAULT_DIM_CAP {
        return Err(Error::Size {
            dim,
            cap: DEFAULT_DIM_CAP,
        });
    }
    let factors = if reflected {
        t_hat_factors(params)
    } else {
        t_factors(params)
    };
    Ok(dense_from_columns(dim, |e| {
        let mut d = Dual {
            v: e.to_vec(),
            dv: Vec::new(),
        };
        for f in &factors {
            apply_r(&mut d, *f, u, params.two_n, false);
        }
        d.v
    }))
}

/// H = c2^{-1} [t(-a) t'(a) + t(a) t'(-a)] - c0 at the homogeneous point.
pub fn hamiltonian_from_transfer(params: &ModelParams) -> Result<CMatrix> {
    hamiltonian_from_transfer_with_c2(params, c2(params))
}

/// As [`hamiltonian_from_transfer`] with an explicit normalization constant.
pub fn hamiltonian_from_transfer_with_c2(params: &ModelParams, c2: f64) -> Result<CMatrix> {
    if !params.is_homogeneous() {
        return Err(Error::Precondition(
            "the Hamiltonian is generated at vanishing inhomogeneities".into(),
        ));
    }
    if c2 == 0.0 {
        return Err(Error::param("c2", "normalization constant vanishes"));
    }
    let a = params.a();
    let (tp, dtp) = transfer_matrix_with_derivative(a, params)?;
    let (tm, dtm) = transfer_matrix_with_derivative(-a, params)?;
    let dim = tp.nrows();
    let h = (&tm * &dtp + &tp * &dtm) / c(c2, 0.);
    Ok(h - identity(dim) * c(c0(params), 0.))
}

/// ||t(u) - t(-u-1)||_max.
pub fn crossing_residual(u: C64, params: &ModelParams) -> Result<f64> {
    let t1 = transfer_matrix(u, params)?;
    let t2 = transfer_matrix(-u - 1.0, params)?;
    Ok(max_norm(&(t1 - t2)))
}

/// a(u) = (2u+2)/(2u+1) (u+p) (sqrt(1+xi^2) u + q) prod_j (u+theta_j+a+1)(u-theta_j-a+1).
pub fn a_bare(u: C64, params: &ModelParams) -> Result<C64> {
    let den = u * 2.0 + 1.0;
    if den.norm() < 1e-14 {
        return Err(Error::Evaluation(format!("a(u) has a pole at u = {u}")));
    }
    let mut v = (u * 2.0 + 2.0) / den * (u + params.p) * (u * params.xi_norm() + params.q);
    let a = params.a();
    for j in 1..=params.two_n {
        let e = params.theta(j) + a;
        v *= (u + e + 1.0) * (u - e + 1.0);
    }
    Ok(v)
}

/// d(u) = a(-u-1).
pub fn d_bare(u: C64, params: &ModelParams) -> Result<C64> {
    a_bare(-u - 1.0, params)
}

/// Relative max-norm residual of t(theta_j+a) t(theta_j+a-1) = a(theta_j+a) d(theta_j+a-1).
pub fn transfer_identity_residual(j: usize, params: &ModelParams) -> Result<f64> {
    if j == 0 || j > params.two_n {
        return Err(Error::Domain(format!("site index {j} outside 1..={}", params.two_n)));
    }
    let u = params.theta(j) + params.a();
    let rhs = a_bare(u, params)? * d_bare(u - 1.0, params)?;
    let lhs = transfer_matrix(u, params)? * transfer_matrix(u - 1.0, params)?;
    let dim = lhs.nrows();
    Ok(max_norm(&(lhs - identity(dim) * rhs)) / rhs.norm())
}
