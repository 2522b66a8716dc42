//! Exact diagonalization, transfer-matrix eigenvalues on eigenstates, and
//! their zero roots.
//!
//! Lambda(u) is even in v = u + 1/2, so its polynomial is stored in powers of v.
//! Coefficients are recovered from samples on the circle |v| = r by FFT.

use nalgebra::{DVector, SymmetricEigen};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::algebra::{c, max_norm, CMatrix, C64};
use crate::error::{Error, Result};
use crate::model::{a_bare, apply_transfer, d_bare, hamiltonian_direct, transfer_matrix, ModelParams};

/// Spectral point used to split degenerate energy levels.
pub const REFERENCE_POINT: f64 = 0.37;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub energy: f64,
    pub state: Vec<C64>,
}

fn hermitian_eigen(m: CMatrix, what: &str) -> Result<(Vec<f64>, CMatrix)> {
    let skew = max_norm(&(m.adjoint() - &m));
    if skew > 1e-10 * max_norm(&m).max(1.0) {
        return Err(Error::Consistency(format!(
            "{what} is not Hermitian (skew part {skew:e})"
        )));
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok((values, vectors))
}

/// Rotates each degenerate block of `vectors` so that it also diagonalizes t(u_ref).
fn split_degenerate(
    values: &[f64],
    vectors: &mut CMatrix,
    params: &ModelParams,
    tol: f64,
) -> Result<()> {
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[start]).abs() <= tol * values[start].abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let t_block: Vec<DVector<C64>> = (0..block.ncols())
                .map(|k| {
                    let col: Vec<C64> = block.column(k).iter().copied().collect();
                    DVector::from_vec(apply_transfer(params, c(REFERENCE_POINT, 0.), &col))
                })
                .collect();
            let tv = CMatrix::from_columns(&t_block);
            let restricted = block.adjoint() * tv;
            let (_, rot) = hermitian_eigen(restricted, "restricted transfer matrix")?;
            let rotated = &block * rot;
            vectors.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }
    Ok(())
}

/// Full spectrum of H, ascending. Degenerate levels are resolved by t(0.37).
pub fn diagonalize(params: &ModelParams) -> Result<Vec<EigenPair>> {
    let h = hamiltonian_direct(params)?;
    let (values, mut vectors) = hermitian_eigen(h, "Hamiltonian")?;
    split_degenerate(&values, &mut vectors, params, 1e-9)?;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(k, energy)| EigenPair {
            energy,
            state: vectors.column(k).iter().copied().collect(),
        })
        .collect())
}

/// Eigenstates of t(u_ref), usable at nonzero inhomogeneities where H is not defined.
/// The `energy` field holds the t(u_ref) eigenvalue.
pub fn diagonalize_transfer(params: &ModelParams, u_ref: f64) -> Result<Vec<EigenPair>> {
    let t = transfer_matrix(c(u_ref, 0.), params)?;
    let (values, vectors) = hermitian_eigen(t, "transfer matrix at a real point")?;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(k, energy)| EigenPair {
            energy,
            state: vectors.column(k).iter().copied().collect(),
        })
        .collect())
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Lambda(u_k) = <psi| t(u_k) |psi> with the certificate ||t psi - Lambda psi||^2 <= 1e-8 |Lambda|^2.
pub fn lambda_samples(state: &[C64], params: &ModelParams, points: &[C64]) -> Result<Vec<C64>> {
    let norm2 = dot(state, state).re;
    points
        .iter()
        .map(|&u| {
            let tv = apply_transfer(params, u, state);
            let lam = dot(state, &tv) / norm2;
            let spread: f64 = tv
                .iter()
                .zip(state)
                .map(|(x, s)| (x - lam * s).norm_sqr())
                .sum::<f64>()
                / norm2;
            if spread > 1e-8 * lam.norm_sqr().max(1e-300) {
                return Err(Error::Degeneracy(format!(
                    "state is not an eigenvector of t({u}); resolve the degenerate subspace first"
                )));
            }
            Ok(lam)
        })
        .collect()
}

/// Lambda(0) = 2 p q prod_j (1 - theta_j - a)(1 + theta_j + a).
pub fn lambda_at_zero(params: &ModelParams) -> C64 {
    let a = params.a();
    (1..=params.two_n).fold(c(2.0 * params.p * params.q, 0.), |acc, j| {
        let e = params.theta(j) + a;
        acc * (-e + 1.0) * (e + 1.0)
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralPolynomial {
    /// Coefficients in ascending powers of v = u + 1/2.
    pub coeffs: Vec<C64>,
    /// Largest relative mismatch at held-out sample points.
    pub holdout_residual: f64,
}

impl SpectralPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, u: C64) -> C64 {
        let v = u + 0.5;
        self.coeffs.iter().rev().fold(c(0., 0.), |acc, &k| acc * v + k)
    }

    /// Largest odd-power coefficient relative to the largest coefficient; zero
    /// exactly when Lambda(u) = Lambda(-u-1).
    pub fn crossing_asymmetry(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        self.coeffs
            .iter()
            .skip(1)
            .step_by(2)
            .fold(0.0f64, |m, z| m.max(z.norm()))
            / scale
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Radius of the sampling circle in v = u + 1/2.
    pub radius: f64,
    /// Number of samples on the circle (at least degree + 1).
    pub samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            radius: 2.0,
            samples: 64,
        }
    }
}

/// Points u on the sampling circle, in FFT order.
pub fn circle_points(opts: &FitOptions) -> Vec<C64> {
    (0..opts.samples)
        .map(|m| {
            let phi = 2.0 * std::f64::consts::PI * m as f64 / opts.samples as f64;
            C64::from_polar(opts.radius, phi) - 0.5
        })
        .collect()
}

/// Degree-`degree` polynomial from samples at [`circle_points`].
pub fn fit_circle_samples(values: &[C64], degree: usize, opts: &FitOptions) -> Result<Vec<C64>> {
    let m = values.len();
    if m != opts.samples || m <= degree {
        return Err(Error::Fit(format!(
            "need more than {degree} samples on the circle, got {m}"
        )));
    }
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let coeffs: Vec<C64> = (0..=degree)
        .map(|k| buf[k] / (m as f64) / opts.radius.powi(k as i32))
        .collect();
    // Energy above the degree signals aliasing or a wrong degree.
    let tail = buf[degree + 1..]
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.norm()));
    let head = buf.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if tail > 1e-6 * head {
        return Err(Error::Fit(format!(
            "samples carry power above degree {degree} (ratio {:e}); enlarge the sample count",
            tail / head
        )));
    }
    Ok(coeffs)
}

/// Fits Lambda(u) of an eigenstate as a polynomial of degree 4N+2 and checks it
/// at held-out points on the real axis.
pub fn fit_lambda_polynomial(
    state: &[C64],
    params: &ModelParams,
    opts: &FitOptions,
) -> Result<SpectralPolynomial> {
    let degree = 2 * params.two_n + 2;
    let points = circle_points(opts);
    let values = lambda_samples(state, params, &points)?;
    let coeffs = fit_circle_samples(&values, degree, opts)?;
    let mut poly = SpectralPolynomial {
        coeffs,
        holdout_residual: 0.0,
    };
    let holdout: Vec<C64> = (0..8).map(|k| c(-2.8 + 0.63 * k as f64, 0.05)).collect();
    let fresh = lambda_samples(state, params, &holdout)?;
    let scale = values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    poly.holdout_residual = holdout
        .iter()
        .zip(&fresh)
        .map(|(&u, &f)| (poly.eval(u) - f).norm() / f.norm().max(1e-12 * scale))
        .fold(0.0, f64::max);
    if poly.holdout_residual > 1e-7 {
        return Err(Error::Fit(format!(
            "held-out residual {:e} exceeds 1e-7; widen the sampling circle",
            poly.holdout_residual
        )));
    }
    Ok(poly)
}

/// The 2N+1 zero roots of an eigenvalue, one representative per +/- pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroRootSet {
    pub two_n: usize,
    pub params: ModelParams,
    /// Representatives z with Im z >= 0 (Re z <= 0 on the real axis).
    pub roots: Vec<C64>,
    pub residual: f64,
}

/// Puts z into the representative half plane.
/// In zbar = -i z this is Re zbar >= 0, with Im zbar > 0 on the imaginary axis.
/// Imaginary parts of z below 1e-9 (1 + |z|) count as zero.
pub fn representative(z: C64) -> C64 {
    let on_real_axis = z.im.abs() <= 1e-9 * (1.0 + z.norm());
    let flip = if on_real_axis { z.re > 0.0 } else { z.im < 0.0 };
    if flip {
        -z
    } else {
        z
    }
}

impl ZeroRootSet {
    pub fn new(params: &ModelParams, roots: Vec<C64>, residual: f64) -> Self {
        ZeroRootSet {
            two_n: params.two_n,
            params: params.clone(),
            roots: roots.into_iter().map(representative).collect(),
            residual,
        }
    }

    /// The paper's real variable zbar = -i z for each representative.
    pub fn zbar(&self) -> Vec<C64> {
        self.roots.iter().map(|&z| z * c(0., -1.)).collect()
    }

    /// All 4N+2 roots in zbar, closed under negation.
    pub fn zbar_all(&self) -> Vec<C64> {
        self.zbar().into_iter().flat_map(|w| [w, -w]).collect()
    }

    pub fn lambda(&self, u: C64) -> C64 {
        lambda_from_roots(&self.roots, u)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&RootFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: RootFile = serde_json::from_str(text)?;
        Ok(ZeroRootSet {
            two_n: f.two_n,
            params: f.params,
            roots: f.roots.into_iter().map(|[re, im]| c(re, im)).collect(),
            residual: f.residual,
        })
    }

    /// CSV rows (index, re, im) of zbar for plotting; both members of each pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (k, w) in self.zbar_all().iter().enumerate() {
            out.push_str(&format!("{k},{},{}\n", crate::io::fmt17(w.re), crate::io::fmt17(w.im)));
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct RootFile {
    two_n: usize,
    params: ModelParams,
    roots: Vec<[f64; 2]>,
    residual: f64,
}

impl From<&ZeroRootSet> for RootFile {
    fn from(r: &ZeroRootSet) -> Self {
        RootFile {
            two_n: r.two_n,
            params: r.params.clone(),
            roots: r.roots.iter().map(|z| [z.re, z.im]).collect(),
            residual: r.residual,
        }
    }
}

/// Lambda(u) = 2 prod_l (u - z_l + 1/2)(u + z_l + 1/2).
pub fn lambda_from_roots(roots: &[C64], u: C64) -> C64 {
    let v = u + 0.5;
    roots
        .iter()
        .fold(c(2.0, 0.), |acc, &z| acc * (v - z) * (v + z))
}

fn polish(coeffs: &[C64], mut x: C64) -> C64 {
    for _ in 0..3 {
        let (mut p, mut dp) = (c(0., 0.), c(0., 0.));
        for &k in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + k;
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.norm() < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Roots of a polynomial given by ascending coefficients (companion matrix, then Newton polish).
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    if lead.norm() == 0.0 {
        return Err(Error::Extraction("leading coefficient vanishes".into()));
    }
    let mut comp = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = c(1., 0.);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eig = comp
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Extraction("Schur iteration failed".into()))?;
    Ok(eig.iter().map(|&x| polish(coeffs, x)).collect())
}

/// Orders roots by imaginary then real part, with keys rounded to 1e-8 so that
/// noise does not reorder near-ties.
pub fn sort_roots(roots: &mut [C64]) {
    let key = |x: f64| (x * 1e8).round();
    roots.sort_by(|x, y| {
        key(x.im)
            .total_cmp(&key(y.im))
            .then(key(x.re).total_cmp(&key(y.re)))
    });
}

/// Pairs the 4N+2 polynomial roots into +/- z and returns the representatives.
pub fn extract_zero_roots(poly: &SpectralPolynomial, params: &ModelParams) -> Result<ZeroRootSet> {
    let expected = 2 * params.two_n + 2;
    if poly.degree() != expected {
        return Err(Error::Extraction(format!(
            "expected degree {expected}, got {}",
            poly.degree()
        )));
    }
    let mut pool = polynomial_roots(&poly.coeffs)?;
    let mut reps = Vec::with_capacity(expected / 2);
    let mut worst = 0.0f64;
    while let Some(s) = pool.pop() {
        let (k, dist) = pool
            .iter()
            .enumerate()
            .map(|(k, &t)| (k, (t + s).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or_else(|| Error::Extraction("odd number of roots".into()))?;
        let partner = pool.swap_remove(k);
        worst = worst.max(dist / (1.0 + s.norm()));
        reps.push(representative((s - partner) * 0.5));
    }
    if worst > 1e-6 {
        return Err(Error::Extraction(format!(
            "roots do not pair into +/- z (mismatch {worst:e})"
        )));
    }
    sort_roots(&mut reps);
    Ok(ZeroRootSet::new(params, reps, worst))
}

/// Relative residual of Lambda(theta_j+a) Lambda(theta_j+a-1) = a(theta_j+a) d(theta_j+a-1).
pub fn inversion_identity_check(roots: &ZeroRootSet, params: &ModelParams, j: usize) -> Result<f64> {
    if j == 0 || j > params.two_n {
        return Err(Error::Domain(format!("site index {j} outside 1..={}", params.two_n)));
    }
    let u = params.theta(j) + params.a();
    let lhs = roots.lambda(u) * roots.lambda(u - 1.0);
    let rhs = a_bare(u, params)? * d_bare(u - 1.0, params)?;
    let diff = (lhs - rhs).norm();
    Ok(if rhs.norm() > 1e-300 { diff / rhs.norm() } else { diff })
}

/// Ground state and its zero roots from exact diagonalization.
pub fn ground_state_roots(params: &ModelParams, opts: &FitOptions) -> Result<(f64, ZeroRootSet)> {
    let spectrum = diagonalize(params)?;
    let gs = &spectrum[0];
    let poly = fit_lambda_polynomial(&gs.state, params, opts)?;
    Ok((gs.energy, extract_zero_roots(&poly, params)?))
}
