//! The zero-root equations in polynomial form.
//!
//! Write s = u^2 after shifting so that the equations become a statement about
//! the rational function h(s) = L(s) / R(s), where L collects the Lambda factors
//! and R the bare functions a(u) d(u-1). The equations say h = 1 at every node
//! s_j = (theta_j + a)^2. Encoding this through Newton divided differences keeps
//! the system well posed when nodes coincide, as they do on the homogeneous chain.
//!
//! There all nodes but the last sit at s0 = a^2 and the same conditions say
//! that log h vanishes to order 2N at s0. The moment form states this through
//! the Taylor coefficients of log h, which are power sums over the factors of h.

use crate::algebra::{c, C64};
use crate::model::ModelParams;

/// (J - c) v, where J has `nodes` on the diagonal and ones below it.
fn apply_lin(v: &[C64], nodes: &[C64], shift: C64) -> Vec<C64> {
    let mut out: Vec<C64> = v.iter().zip(nodes).map(|(x, n)| (n - shift) * x).collect();
    for k in 1..v.len() {
        out[k] += v[k - 1];
    }
    out
}

/// (J - c)^{-1} v by forward substitution.
fn solve_lin(v: &[C64], nodes: &[C64], shift: C64) -> Vec<C64> {
    let mut out = vec![c(0., 0.); v.len()];
    for k in 0..v.len() {
        let prev = if k > 0 { out[k - 1] } else { c(0., 0.) };
        out[k] = (v[k] - prev) / (nodes[k] - shift);
    }
    out
}

pub(crate) struct Equations {
    /// Common node of the homogeneous chain.
    confluent: Option<C64>,
    nodes: Vec<C64>,
    denominator_roots: Vec<C64>,
    lead_ratio: C64,
    lambda_zero: C64,
    weights: Vec<f64>,
}

impl Equations {
    pub(crate) fn new(params: &ModelParams) -> Self {
        let xi_norm = params.xi_norm();
        let shifts: Vec<C64> = (1..=params.two_n)
            .map(|j| params.theta(j) + params.a())
            .collect();
        let mut nodes: Vec<C64> = shifts.iter().map(|e| e * e).collect();
        nodes.push(c(0., 0.));
        let mut denominator_roots = vec![
            c(1., 0.),
            c(params.p * params.p, 0.),
            c((params.q / xi_norm).powi(2), 0.),
        ];
        for e in &shifts {
            denominator_roots.push((e + 1.0) * (e + 1.0));
            denominator_roots.push((-e + 1.0) * (-e + 1.0));
        }
        let lambda_zero = shifts
            .iter()
            .fold(c(params.p * params.q, 0.), |acc, e| acc * (-e * e + 1.0));
        // Rows are Taylor data at the clustered nodes; their natural scale is
        // set by the distance from those nodes to the poles of h.
        let rho = nodes[..params.two_n]
            .iter()
            .flat_map(|n| denominator_roots.iter().map(move |r| (n - r).norm()))
            .fold(f64::INFINITY, f64::min);
        let mut weights: Vec<f64> = (0..nodes.len()).map(|k| rho.powi(k as i32)).collect();
        weights.push(1.0);
        Equations {
            confluent: None,
            nodes,
            denominator_roots,
            lead_ratio: c(-16.0, 0.) / (-4.0 * xi_norm * xi_norm),
            lambda_zero,
            weights,
        }
    }

    /// Moment form on the homogeneous chain, divided differences otherwise.
    /// Each power sum is scaled by the sum of its term sizes at `z`, so the
    /// residual measures the cancellation left relative to the terms.
    pub(crate) fn with_moments(params: &ModelParams, z: &[C64]) -> Self {
        let mut eq = Self::new(params);
        let n = params.two_n;
        if eq.nodes[..n].iter().all(|x| *x == eq.nodes[0]) {
            let s0 = eq.nodes[0];
            eq.confluent = Some(s0);
            let (_, sizes) = eq.moments(z, s0, eq.nodes.len() - 2);
            eq.weights = std::iter::once(1.0)
                .chain(sizes.iter().map(|s| 1.0 / s))
                .chain([1.0, 1.0])
                .collect();
        }
        eq
    }

    pub(crate) fn is_moment_form(&self) -> bool {
        self.confluent.is_some()
    }

    pub(crate) fn rows(&self) -> usize {
        self.nodes.len() + 1
    }

    /// Divided differences of h on the nodes, optionally without the factor of root `skip`.
    fn h_vec(&self, z: &[C64], skip: Option<usize>) -> Vec<C64> {
        let mut v = vec![c(0., 0.); self.nodes.len()];
        v[0] = self.lead_ratio;
        for &r in &self.denominator_roots {
            v = solve_lin(&v, &self.nodes, r);
        }
        v = apply_lin(&v, &self.nodes, c(0.25, 0.));
        for (l, &zl) in z.iter().enumerate() {
            if skip == Some(l) {
                continue;
            }
            v = apply_lin(&v, &self.nodes, (zl - 0.5) * (zl - 0.5));
            v = apply_lin(&v, &self.nodes, (zl + 0.5) * (zl + 0.5));
        }
        v
    }

    /// h(s) and d h(s) / d z_l for every root.
    fn h_at(&self, z: &[C64], s: C64) -> (C64, Vec<C64>) {
        let mut h = self.lead_ratio * (s - 0.25);
        for r in &self.denominator_roots {
            h /= s - r;
        }
        for zl in z {
            h *= (s - (zl - 0.5) * (zl - 0.5)) * (s - (zl + 0.5) * (zl + 0.5));
        }
        let grad = z
            .iter()
            .map(|zl| {
                let (wm, wp) = ((zl - 0.5) * (zl - 0.5), (zl + 0.5) * (zl + 0.5));
                h * (-(zl - 0.5) * 2.0 / (s - wm) - (zl + 0.5) * 2.0 / (s - wp))
            })
            .collect();
        (h, grad)
    }

    /// Power sums sum_num (s0 - w)^-k - sum_den (s0 - r)^-k for k = 1..count,
    /// with the sums of the term sizes.
    fn moments(&self, z: &[C64], s0: C64, count: usize) -> (Vec<C64>, Vec<f64>) {
        let mut out = vec![c(0., 0.); count];
        let mut sizes = vec![0.0; count];
        let mut add = |w: C64, sign: f64| {
            let inv = 1.0 / (s0 - w);
            let mut pow = inv;
            for (o, size) in out.iter_mut().zip(sizes.iter_mut()) {
                *o += pow * sign;
                *size += pow.norm();
                pow *= inv;
            }
        };
        add(c(0.25, 0.), 1.0);
        for zl in z {
            add((zl - 0.5) * (zl - 0.5), 1.0);
            add((zl + 0.5) * (zl + 0.5), 1.0);
        }
        for &r in &self.denominator_roots {
            add(r, -1.0);
        }
        (out, sizes)
    }

    fn lambda_zero_row(&self, z: &[C64]) -> C64 {
        let lam0 = z.iter().fold(c(1., 0.), |acc, zl| acc * (-zl * zl + 0.25));
        lam0 / self.lambda_zero - 1.0
    }

    /// Unweighted residual: divided differences of h - 1, then Lambda(0) / target - 1.
    /// On the homogeneous chain the middle rows are the log-h power sums instead.
    pub(crate) fn raw_residual(&self, z: &[C64]) -> Vec<C64> {
        let mut v = match self.confluent {
            Some(s0) => {
                let m = self.nodes.len() - 2;
                let mut v = vec![self.h_at(z, s0).0 - 1.0];
                v.extend(self.moments(z, s0, m).0);
                v.push(self.h_at(z, c(0., 0.)).0 - 1.0);
                v
            }
            None => {
                let mut v = self.h_vec(z, None);
                v[0] -= 1.0;
                v
            }
        };
        v.push(self.lambda_zero_row(z));
        v
    }

    pub(crate) fn residual(&self, z: &[C64]) -> Vec<C64> {
        self.raw_residual(z)
            .into_iter()
            .zip(&self.weights)
            .map(|(r, w)| r * *w)
            .collect()
    }

    /// Column l holds the derivative of the weighted residual in z_l.
    pub(crate) fn jacobian(&self, z: &[C64]) -> Vec<Vec<C64>> {
        let confluent = self.confluent.map(|s0| {
            (self.h_at(z, s0).1, self.h_at(z, c(0., 0.)).1)
        });
        (0..z.len())
            .map(|l| {
                let zl = z[l];
                let mut col: Vec<C64> = match (&confluent, self.confluent) {
                    (Some((g0, gz)), Some(s0)) => {
                        let m = self.nodes.len() - 2;
                        let mut col = vec![g0[l]];
                        let mut d = vec![c(0., 0.); m];
                        for (w, dw) in [
                            ((zl - 0.5) * (zl - 0.5), (zl - 0.5) * 2.0),
                            ((zl + 0.5) * (zl + 0.5), (zl + 0.5) * 2.0),
                        ] {
                            let inv = 1.0 / (s0 - w);
                            let mut pow = inv * inv;
                            for (k, dk) in d.iter_mut().enumerate() {
                                *dk += pow * dw * (k + 1) as f64;
                                pow *= inv;
                            }
                        }
                        col.extend(d);
                        col.push(gz[l]);
                        col
                    }
                    _ => {
                        let v = self.h_vec(z, Some(l));
                        apply_lin(&v, &self.nodes, zl * zl - 0.25)
                            .into_iter()
                            .map(|x| x * zl * -4.0)
                            .collect()
                    }
                };
                let others = z
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != l)
                    .fold(c(1., 0.), |acc, (_, zm)| acc * (-zm * zm + 0.25));
                col.push(zl * -2.0 * others / self.lambda_zero);
                col.into_iter()
                    .zip(&self.weights)
                    .map(|(x, w)| x * *w)
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lin_ops_are_inverse() {
        let nodes = vec![c(0.3, 0.), c(0.3, 0.), c(-1.0, 0.2)];
        let v = vec![c(1., 2.), c(-0.5, 0.), c(0.1, 0.4)];
        let shift = c(0.7, -0.1);
        let back = apply_lin(&solve_lin(&v, &nodes, shift), &nodes, shift);
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let hom = ModelParams::with_q_bar(4, 0.66, 1.2, 0.7, 1.2).unwrap();
        let inh = hom.clone().with_theta(vec![0.1, -0.2, 0.05, 0.3]).unwrap();
        for p in [hom, inh] {
            check_jacobian(&p);
        }
    }

    #[test]
    fn moment_form_matches_divided_differences() {
        // Same solution set: both forms vanish at the ED ground state.
        let p = ModelParams::with_q_bar(6, 0.66, 1.2, 0.7, 1.2).unwrap();
        let (_, roots) = crate::spectrum::ground_state_roots(&p, &Default::default()).unwrap();
        let eq = Equations::with_moments(&p, &roots.roots);
        assert!(eq.is_moment_form());
        let dd = Equations::new(&p);
        let a = eq.residual(&roots.roots);
        let b = dd.residual(&roots.roots);
        assert_eq!(a.len(), b.len());
        assert!(a.iter().all(|r| r.norm() < 1e-8), "{a:?}");
        assert!(b.iter().all(|r| r.norm() < 1e-8), "{b:?}");
    }

    fn check_jacobian(p: &ModelParams) {
        let z = vec![c(0.3, 1.1), c(-0.3, 1.1), c(0.2, 0.7), c(0.0, 2.1), c(1.4, 0.1)];
        let eq = Equations::with_moments(p, &z);
        let jac = eq.jacobian(&z);
        let h = 1e-6;
        for l in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[l] += h;
            zm[l] -= h;
            let (rp, rm) = (eq.residual(&zp), eq.residual(&zm));
            for k in 0..eq.rows() {
                let fd = (rp[k] - rm[k]) / (2.0 * h);
                assert!((fd - jac[l][k]).norm() <= 1e-5 * (1.0 + fd.norm()), "row {k} col {l}");
            }
        }
    }
}
