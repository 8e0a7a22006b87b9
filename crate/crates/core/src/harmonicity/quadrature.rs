//! Quadrature rules for integrals over the compact presets: tensor-product
//! trapezoid sums on flat tori (spectrally accurate for periodic smooth
//! integrands) and Gauss-Legendre x trapezoid product grids on round S^2
//! and S^3.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{GeometryError, Result};
use crate::manifold::{sphere_point_from_ambient, ChartedManifold, Point};

/// Nodes with positive weights summing to vol(M, g).
pub struct QuadratureRule {
    pub manifold: String,
    pub nodes: Vec<(Point, f64)>,
    /// Nodes per axis of the underlying product grid.
    pub order: usize,
}

impl QuadratureRule {
    /// Default-resolution rule for a compact preset manifold.
    pub fn for_manifold(m: &ChartedManifold) -> Result<Self> {
        Self::with_resolution(m, 0)
    }

    /// Rule with an explicit per-axis node count (0 selects the default:
    /// 32 per axis on tori, 32 x 64 on S^2, 24^3 on S^3).
    pub fn with_resolution(m: &ChartedManifold, order: usize) -> Result<Self> {
        if m.name.starts_with("torus:") {
            let k = if order == 0 { 32 } else { order };
            return Ok(torus_rule(m, k));
        }
        if m.name.starts_with("sphere:") {
            let curv = m.constant_curvature.expect("sphere presets declare curvature");
            let a = 1.0 / curv.sqrt();
            match m.dim {
                2 => {
                    let k = if order == 0 { 32 } else { order };
                    return Ok(sphere2_rule(a, k));
                }
                3 => {
                    let k = if order == 0 { 24 } else { order };
                    return Ok(sphere3_rule(a, k));
                }
                _ => {}
            }
        }
        Err(GeometryError::IncompatibleOperation {
            op: "quadrature".into(),
            manifold: m.name.clone(),
            reason: "rules exist for flat tori, S^2 and S^3 only".into(),
        })
    }

    /// Sum of all weights (integrates the constant 1).
    pub fn total_weight(&self) -> f64 {
        let w: Vec<f64> = self.nodes.iter().map(|(_, w)| *w).collect();
        pairwise_sum(&w)
    }

    /// Integrates a pointwise function over the rule. Nodes are evaluated in
    /// parallel and reduced by pairwise summation in node order, so results
    /// are deterministic regardless of thread count.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Point) -> Result<f64> + Sync,
    {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .map(|(p, w)| f(p).map(|v| v * w))
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_sum(&terms))
    }
}

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

fn torus_rule(m: &ChartedManifold, k: usize) -> QuadratureRule {
    let n = m.dim;
    let period = m.charts[0].hi[0] - m.charts[0].lo[0];
    let h = period / k as f64;
    let weight = h.powi(n as i32);
    let mut nodes = Vec::with_capacity(k.pow(n as u32));
    let mut idx = vec![0usize; n];
    loop {
        let coords: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        nodes.push((Point::new(0, coords), weight));
        // odometer increment over the n-fold product grid
        let mut axis = 0;
        loop {
            if axis == n {
                return QuadratureRule { manifold: m.name.clone(), nodes, order: k };
            }
            idx[axis] += 1;
            if idx[axis] < k {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Latitude Gauss-Legendre in cos(theta) times longitude trapezoid; the area
/// element a^2 sin(theta) dtheta dphi becomes a^2 dc dphi with c = cos(theta).
fn sphere2_rule(a: f64, k: usize) -> QuadratureRule {
    let (cs, ws) = gauss_legendre(k);
    let kphi = 2 * k;
    let wphi = TAU / kphi as f64;
    let mut nodes = Vec::with_capacity(k * kphi);
    for (c, wc) in cs.iter().zip(ws.iter()) {
        let sin_theta = (1.0 - c * c).sqrt();
        for j in 0..kphi {
            let phi = j as f64 * wphi;
            let p = DVector::from_vec(vec![
                a * sin_theta * phi.cos(),
                a * sin_theta * phi.sin(),
                a * c,
            ]);
            nodes.push((sphere_point_from_ambient(&p, a), a * a * wc * wphi));
        }
    }
    QuadratureRule { manifold: format!("sphere:2:{a}"), nodes, order: k }
}

/// Torus-like coordinates (eta, xi1, xi2) on S^3 with the substitution
/// s = sin^2(eta): the volume element a^3 sin(eta) cos(eta) deta dxi1 dxi2
/// becomes (a^3 / 2) ds dxi1 dxi2 over [0,1] x [0,2pi)^2; Gauss-Legendre in
/// s, trapezoid in both angles.
fn sphere3_rule(a: f64, k: usize) -> QuadratureRule {
    let (xs, ws) = gauss_legendre(k);
    let wxi = TAU / k as f64;
    let mut nodes = Vec::with_capacity(k * k * k);
    for (x, wsc) in xs.iter().zip(ws.iter()) {
        let s = 0.5 * (x + 1.0);
        let ws_mapped = 0.5 * wsc; // ds = dx / 2 on [-1, 1] -> [0, 1]
        let cos_eta = (1.0 - s).sqrt();
        let sin_eta = s.sqrt();
        for j1 in 0..k {
            let xi1 = j1 as f64 * wxi;
            for j2 in 0..k {
                let xi2 = j2 as f64 * wxi;
                let p = DVector::from_vec(vec![
                    a * cos_eta * xi1.cos(),
                    a * cos_eta * xi1.sin(),
                    a * sin_eta * xi2.cos(),
                    a * sin_eta * xi2.sin(),
                ]);
                let w = 0.5 * a.powi(3) * ws_mapped * wxi * wxi;
                nodes.push((sphere_point_from_ambient(&p, a), w));
            }
        }
    }
    QuadratureRule { manifold: format!("sphere:3:{a}"), nodes, order: k }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; k];
    let mut ws = vec![0.0; k];
    for i in 0..k {
        let mut x = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre(k, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(k, x);
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    xs.reverse();
    ws.reverse();
    (xs, ws)
}

/// (P_k(x), P_k'(x)) from the three-term recurrence.
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{flat_torus, sphere};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (xs, ws) = gauss_legendre(8);
        // degree up to 2k - 1 = 15 is exact; check x^14: integral 2/15
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-13, "{s}");
        let s1: f64 = ws.iter().sum();
        assert!((s1 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn weights_sum_to_volume() {
        for m in [
            flat_torus(2, None),
            flat_torus(3, None),
            flat_torus(2, Some(3.0)),
            sphere(2, 1.0),
            sphere(2, 2.0),
            sphere(3, 1.0),
        ] {
            let rule = QuadratureRule::for_manifold(&m).unwrap();
            let vol = m.volume.unwrap();
            assert!(
                (rule.total_weight() - vol).abs() < 1e-9 * vol,
                "{}: {} vs {vol}",
                m.name,
                rule.total_weight()
            );
        }
    }

    #[test]
    fn integrates_smooth_function_on_sphere() {
        // integral of z^2 over S^2(a) = (4 pi a^4) / 3
        let m = sphere(2, 1.0);
        let rule = QuadratureRule::for_manifold(&m).unwrap();
        let val = rule
            .integrate(|p| {
                let amb = crate::manifold::sphere_embed(p.chart, &p.coords, 1.0);
                Ok(amb[2] * amb[2])
            })
            .unwrap();
        assert!((val - 4.0 * PI / 3.0).abs() < 1e-10, "{val}");
    }

    #[test]
    fn torus_rule_rejects_nothing_but_unknown_manifolds() {
        let e = QuadratureRule::for_manifold(&crate::manifold::euclidean(2));
        assert!(e.is_err());
    }
}
