//! Thermodynamic limit: root densities in Fourier space, the ground-state
//! energy, surface energy and excitation energies.
//!
//! Fourier images use a_n(k) = exp(-n|k|/2) and b_n(k) = i sign(k) exp(-n|k|/2),
//! the transforms of the kernels a_n(u), b_n(u) with the 2 pi absorbed into the
//! measure. All integrands are even in k; they are integrated over [0, k_max]
//! and doubled, with k_max chosen so the discarded tail is below abs_tol / 20.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use gkquad::single::Integrator;
use gkquad::Tolerance;
use serde::{Deserialize, Serialize};

use crate::algebra::{c, C64};
use crate::error::{Error, Result};
use crate::model::{c0, ModelParams};

/// a_n(u) = (1 / 2 pi) n / (u^2 + n^2 / 4).
pub fn kernel_a(n: f64, u: f64) -> f64 {
    n / (2.0 * PI * (u * u + n * n / 4.0))
}

/// b_n(u) = (1 / 2 pi) 2u / (u^2 + n^2 / 4).
pub fn kernel_b(n: f64, u: f64) -> f64 {
    2.0 * u / (2.0 * PI * (u * u + n * n / 4.0))
}

pub fn kernel_a_hat(n: f64, k: f64) -> f64 {
    (-n * k.abs() / 2.0).exp()
}

pub fn kernel_b_hat(n: f64, k: f64) -> C64 {
    let sign = if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    };
    c(0., sign * (-n * k.abs() / 2.0).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Adaptive Gauss-Kronrod with extrapolation (QAGS).
    GaussKronrod,
    /// Double-exponential (tanh-sinh) quadrature.
    TanhSinh,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    /// Fixed cutoff; None derives it from the integrand's decay rate.
    pub k_max: Option<f64>,
    /// Subdivision limit for the adaptive rule.
    pub limit: usize,
    pub method: Method,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            k_max: None,
            limit: 2000,
            method: Method::GaussKronrod,
        }
    }
}

impl QuadratureSpec {
    pub fn with_method(self, method: Method) -> Self {
        QuadratureSpec { method, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::param("abs_tol", "must be positive"));
        }
        if let Some(k) = self.k_max {
            if !(k > 0.0) {
                return Err(Error::param("k_max", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Cutoff beyond which M exp(-rate k) integrates to less than `tail`.
pub fn k_cutoff(rate: f64, amplitude: f64, tail: f64) -> f64 {
    ((amplitude / (rate * tail)).ln() / rate).max(1.0)
}

/// Integral over the real line of an even integrand bounded by
/// `amplitude * exp(-rate |k|)`. Returns (value, error estimate).
pub fn integrate_even<F: Fn(f64) -> f64>(
    f: F,
    rate: f64,
    amplitude: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let tail = spec.abs_tol / 20.0;
    let k_max = spec
        .k_max
        .unwrap_or_else(|| k_cutoff(rate, amplitude, tail));
    let tol = spec.abs_tol / 4.0;
    let (value, err) = match spec.method {
        Method::GaussKronrod => {
            let result = Integrator::new(|k: f64| f(k))
                .tolerance(Tolerance::AbsOrRel(tol, 1e-14))
                .max_iters(spec.limit)
                .run(0.0..k_max);
            result.estimate_delta().map_err(|e| {
                Error::Quadrature(format!("adaptive rule on [0, {k_max:.3}]: {e}"))
            })?
        }
        Method::TanhSinh => {
            // Panels of unit length keep oscillatory integrands resolved.
            let panels = k_max.ceil() as usize;
            let width = k_max / panels as f64;
            let mut total = 0.0;
            let mut err = 0.0;
            for j in 0..panels {
                let out = quadrature::double_exponential::integrate(
                    &f,
                    j as f64 * width,
                    (j + 1) as f64 * width,
                    tol / panels as f64,
                );
                total += out.integral;
                err += out.error_estimate;
            }
            (total, err)
        }
    };
    if !value.is_finite() || err > spec.abs_tol {
        return Err(Error::Quadrature(format!(
            "error estimate {err:e} exceeds {:e} on [0, {k_max:.3}]",
            spec.abs_tol
        )));
    }
    Ok((2.0 * value, 2.0 * err + tail))
}

/// A thermodynamic quantity with its parts and error estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThermoResult {
    pub value: f64,
    pub components: BTreeMap<String, f64>,
    pub est_error: f64,
    pub spec: QuadratureSpec,
}

/// 4a^2 - 1 = -(4 a_bar^2 + 1).
fn coupling(a_bar: f64) -> f64 {
    -4.0 * a_bar * a_bar - 1.0
}

/// 1 / cosh(k/2) without overflow, k >= 0.
fn sech_half(k: f64) -> f64 {
    2.0 * (-k / 2.0).exp() / (1.0 + (-k).exp())
}

/// 2 tanh(k/2), k >= 0.
fn two_tanh_half(k: f64) -> f64 {
    2.0 * (-(-k).exp_m1()) / (1.0 + (-k).exp())
}

/// Root density of regime I. `alpha = None` drops the real-pair term, as in the
/// thermodynamic limit where the pair runs off to infinity.
pub fn density_regime1(k: f64, params: &ModelParams, alpha: Option<f64>) -> C64 {
    density_ratio(k, params, |k| {
        alpha.map_or(c(0., 0.), |al| kernel_b_hat(1.0, k) * (2.0 * (al * k).cos()))
    })
}

/// Root density of regime II, with the imaginary pair +/- i beta.
pub fn density_regime2(k: f64, params: &ModelParams, beta: f64) -> C64 {
    let b = beta.abs();
    density_ratio(k, params, |k| {
        kernel_b_hat(2.0 * b + 1.0, k) + kernel_b_hat(2.0 * b - 1.0, k)
    })
}

fn density_ratio<F: Fn(f64) -> C64>(k: f64, params: &ModelParams, extra: F) -> C64 {
    // Numerator and denominator both vanish at k = 0; take the limit k -> 0+.
    let k = if k == 0.0 { f64::MIN_POSITIVE } else { k };
    let two_n = params.two_n as f64;
    let bh = |n: f64| kernel_b_hat(n, k);
    let p = params.p.abs();
    let q = params.q_bar().abs();
    let num = bh(2.0) * (2.0 * two_n * (params.a_bar * k).cos()) + bh(2.0)
        - bh(1.0)
        - bh(2.0 * p + 2.0)
        - bh(2.0 * q + 2.0)
        - extra(k);
    num / ((bh(1.0) + bh(3.0)) * two_n)
}

/// Ground energy of the open chain from a root density.
/// `rho` must satisfy |rho(k)| <= 4 so that the tail bound holds.
pub fn ground_energy_density<F: Fn(f64) -> f64>(
    params: &ModelParams,
    rho: F,
    spec: &QuadratureSpec,
) -> Result<ThermoResult> {
    let a_bar = params.a_bar;
    let g = coupling(a_bar);
    let (integral, err) = integrate_even(
        |k| (kernel_a_hat(1.0, k) - kernel_a_hat(3.0, k)) * (a_bar * k).cos() * rho(k),
        0.5,
        4.0,
        spec,
    )?;
    let a2 = params.a2();
    let (p, q) = (params.p.abs(), params.q_bar().abs());
    let boundary = -g * (p / (a2 - p * p) + q / (a2 - q * q));
    let bulk = params.n() as f64 * g * integral;
    let shift = -c0(params);
    let mut components = BTreeMap::new();
    components.insert("density_term".into(), bulk);
    components.insert("constant".into(), shift);
    components.insert("boundary_rational".into(), boundary);
    Ok(ThermoResult {
        value: bulk + shift + boundary,
        components,
        est_error: params.n() as f64 * g.abs() * err,
        spec: *spec,
    })
}

/// Ground energy per site of the infinite chain.
pub fn bulk_energy_per_site(a_bar: f64, spec: &QuadratureSpec) -> Result<ThermoResult> {
    let g = coupling(a_bar);
    let (integral, err) = integrate_even(
        |k| {
            let cs = (a_bar * k).cos();
            cs * cs * ((-1.5 * k).exp() - (-0.5 * k).exp()) * sech_half(k)
        },
        1.0,
        2.0,
        spec,
    )?;
    let constant = -2.0 * a_bar * a_bar - 1.0;
    let mut components = BTreeMap::new();
    components.insert("integral".into(), -g / 2.0 * integral);
    components.insert("constant".into(), constant);
    Ok(ThermoResult {
        value: -g / 2.0 * integral + constant,
        components,
        est_error: g.abs() / 2.0 * err,
        spec: *spec,
    })
}

/// Boundary-field part e_b(x) of the surface energy, x = p or q_bar.
///
/// The slowly decaying piece 2 cos(a_bar k) exp(-x k) is integrated in closed
/// form; the remainder decays like exp(-(1 + x) k).
pub fn boundary_field_energy(x: f64, a_bar: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let x = x.abs();
    if x == 0.0 {
        return Err(Error::Divergence(
            "boundary-field surface energy at zero boundary parameter".into(),
        ));
    }
    let g = coupling(a_bar);
    let (rest, err) = integrate_even(
        |k| 4.0 * (-(1.0 + x) * k).exp() * (a_bar * k).cos() / (1.0 + (-k).exp()),
        1.0 + x,
        4.0,
        spec,
    )?;
    let closed = 4.0 * x / (x * x + a_bar * a_bar);
    Ok((g / 4.0 * (closed - rest), g.abs() / 4.0 * err))
}

/// Free-boundary part e_b0 of the surface energy; depends on a_bar only.
pub fn free_boundary_energy(a_bar: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let g = coupling(a_bar);
    let (integral, err) = integrate_even(
        |k| two_tanh_half(k) * (a_bar * k).cos() * ((-k).exp() - (-0.5 * k).exp()),
        0.5,
        2.0,
        spec,
    )?;
    Ok((g / 4.0 * integral, g.abs() / 4.0 * err))
}

/// Difference between the open chain's non-extensive constant and the
/// periodic chain's: -c0 - 2N (2a^2 - 1).
pub fn constant_shift(a_bar: f64) -> f64 {
    let a2 = -a_bar * a_bar;
    (2.0 * a2 * a2 - 6.0 * a2 + 1.0) / (a2 - 1.0) - (2.0 * a2 - 1.0)
}

/// Surface energy E_b = e_b(p) + e_b(q_bar) + e_b0 + constant shift.
/// The same decomposition holds in every regime.
pub fn surface_energy(params: &ModelParams, spec: &QuadratureSpec) -> Result<ThermoResult> {
    if params.p == 0.0 || params.q == 0.0 {
        return Err(Error::Divergence(
            "surface energy diverges when p = 0 or q = 0".into(),
        ));
    }
    let (ep, err_p) = boundary_field_energy(params.p, params.a_bar, spec)?;
    let (eq, err_q) = boundary_field_energy(params.q_bar(), params.a_bar, spec)?;
    let (e0, err_0) = free_boundary_energy(params.a_bar, spec)?;
    let shift = constant_shift(params.a_bar);
    let mut components = BTreeMap::new();
    components.insert("e_b_p".into(), ep);
    components.insert("e_b_q".into(), eq);
    components.insert("e_b0".into(), e0);
    components.insert("constant_shift".into(), shift);
    Ok(ThermoResult {
        value: ep + eq + e0 + shift,
        components,
        est_error: err_p + err_q + err_0,
        spec: *spec,
    })
}

/// Energy of the excitation that moves a 2-string pair onto the real axis at +/- z_bar.
pub fn bulk_excitation_energy(z_bar: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    if !z_bar.is_finite() {
        return Err(Error::Domain("z_bar must be finite".into()));
    }
    let a_bar = params.a_bar;
    let g = coupling(a_bar);
    let (integral, _) = integrate_even(
        |k| -(-k).exp_m1() * (a_bar * k).cos() * (z_bar * k).cos() * sech_half(k),
        0.5,
        2.0,
        spec,
    )?;
    let rational =
        1.0 / ((z_bar + a_bar).powi(2) + 0.25) + 1.0 / ((z_bar - a_bar).powi(2) + 0.25);
    Ok(-g / 2.0 * (integral + rational))
}

/// Energy carried by an n-string pair (n > 2) centered at z_tilde. Vanishes
/// identically; the returned value measures how well quadrature reproduces that.
pub fn string_excitation_energy(
    n: usize,
    z_tilde: f64,
    params: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("string length {n} must be at least 3")));
    }
    let a_bar = params.a_bar;
    let g = coupling(a_bar);
    let nf = n as f64;
    let (integral, _) = integrate_even(
        |k| {
            two_tanh_half(k)
                * (a_bar * k).cos()
                * ((-(nf + 1.0) * k / 2.0).exp() + (-(nf - 1.0) * k / 2.0).exp())
                * (z_tilde * k).cos()
        },
        (nf - 1.0) / 2.0,
        4.0,
        spec,
    )?;
    let rational: f64 = [z_tilde + a_bar, z_tilde - a_bar]
        .iter()
        .map(|&u| kernel_a(nf + 1.0, u) - kernel_a(nf - 1.0, u))
        .sum();
    let value = -g / 2.0 * (integral + 2.0 * PI * rational);
    if value.abs() > 1e-6 {
        return Err(Error::Consistency(format!(
            "string excitation energy {value:e} should vanish"
        )));
    }
    Ok(value)
}

/// Energy of moving the boundary pair i(|b|+1/2) to the boundary string i(1/2-|b|).
pub fn boundary_excitation_energy(b: f64, params: &ModelParams, spec: &QuadratureSpec) -> Result<f64> {
    let b = b.abs();
    if b >= 0.5 {
        return Err(Error::Domain(format!(
            "boundary strings need |b| < 1/2, got {b}"
        )));
    }
    let a_bar = params.a_bar;
    if b == 0.0 && a_bar == 0.0 {
        return Err(Error::Divergence(
            "boundary excitation diverges at b = 0 when a = 0".into(),
        ));
    }
    let g = coupling(a_bar);
    let (integral, _) = integrate_even(
        |k| {
            -(-k).exp_m1() * (a_bar * k).cos() * (((b - 1.0) * k).exp() + (-(b + 1.0) * k).exp())
                / (1.0 + (-k).exp())
        },
        1.0 - b,
        2.0,
        spec,
    )?;
    let w = c(b, a_bar);
    let rational = 4.0 * b / (b * b + a_bar * a_bar) - 4.0 * (w / (w * w - 1.0)).re;
    Ok(-g / 2.0 * (integral + rational))
}
