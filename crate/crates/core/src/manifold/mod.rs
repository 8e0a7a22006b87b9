//! Charted Riemannian manifolds and the intrinsic quantities the lifted
//! formulas consume: Christoffel symbols, curvature, Ricci operator,
//! covariant derivatives, rough Laplacian, divergence and the curvature
//! trace term.

mod fields;
mod presets;

pub use fields::*;
pub use presets::*;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeometryError, Result};
use crate::fd;

/// An axis-aligned coordinate box, with optional periodic axes.
#[derive(Debug, Clone)]
pub struct Chart {
    pub id: usize,
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Period length per axis; `None` for non-periodic axes.
    pub periodic: Vec<Option<f64>>,
}

impl Chart {
    pub fn boxed(id: usize, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let dim = lo.len();
        Chart { id, dim, lo, hi, periodic: vec![None; dim] }
    }

    pub fn periodic_box(id: usize, dim: usize, period: f64) -> Self {
        Chart {
            id,
            dim,
            lo: vec![0.0; dim],
            hi: vec![period; dim],
            periodic: vec![Some(period); dim],
        }
    }

    /// Wraps periodic axes and reports whether the result lies in the box.
    pub fn normalize(&self, coords: &mut DVector<f64>) -> bool {
        for i in 0..self.dim {
            if let Some(p) = self.periodic[i] {
                let mut c = (coords[i] - self.lo[i]).rem_euclid(p) + self.lo[i];
                if c >= self.hi[i] {
                    c -= p;
                }
                coords[i] = c;
            } else if coords[i] < self.lo[i] - 1e-12 || coords[i] > self.hi[i] + 1e-12 {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct Point {
    pub chart: usize,
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(chart: usize, coords: Vec<f64>) -> Self {
        Point { chart, coords: DVector::from_vec(coords) }
    }
}

#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: Point,
    pub comps: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, comps: DVector<f64>) -> Self {
        TangentVector { base, comps }
    }
}

/// Curvature components: `get(i, j, k, l)` is the l-th component of
/// R(d_i, d_j) d_k in the convention R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y] Z.
#[derive(Debug, Clone)]
pub struct CurvatureArray {
    pub n: usize,
    data: Vec<f64>,
}

impl CurvatureArray {
    pub fn zeros(n: usize) -> Self {
        CurvatureArray { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }

    /// R(X, Y) Z as a coordinate vector.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                let xy = x[i] * y[j];
                for k in 0..n {
                    if z[k] == 0.0 {
                        continue;
                    }
                    let w = xy * z[k];
                    for l in 0..n {
                        out[l] += w * self.get(i, j, k, l);
                    }
                }
            }
        }
        out
    }
}

pub type MetricFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
/// Christoffel symbols as `n` matrices: `gamma[k][(i, j)]`.
pub type ChristoffelFn = Arc<dyn Fn(&DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync>;
pub type CurvatureFn = Arc<dyn Fn(&DVector<f64>) -> CurvatureArray + Send + Sync>;
pub type CoordMap = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type JacobianMap = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Transition between overlapping chart domains.
#[derive(Clone)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub map: CoordMap,
    pub jacobian: JacobianMap,
}

#[derive(Clone)]
pub struct ChartedManifold {
    pub name: String,
    pub dim: usize,
    pub charts: Vec<Chart>,
    pub metric: Vec<MetricFn>,
    pub analytic_christoffel: Vec<Option<ChristoffelFn>>,
    pub analytic_curvature: Vec<Option<CurvatureFn>>,
    pub transitions: Vec<Transition>,
    /// Set on constant-curvature presets (spheres, flat tori).
    pub constant_curvature: Option<f64>,
    /// Analytic volume, when the preset is compact.
    pub volume: Option<f64>,
}

impl ChartedManifold {
    pub fn chart(&self, id: usize) -> Result<&Chart> {
        self.charts.get(id).ok_or_else(|| GeometryError::UnknownChart {
            manifold: self.name.clone(),
            chart: id,
        })
    }

    /// Wraps periodic coordinates in place; errors when the point leaves its chart.
    pub fn validate_point(&self, p: &Point) -> Result<Point> {
        let chart = self.chart(p.chart)?;
        let mut coords = p.coords.clone();
        if !chart.normalize(&mut coords) {
            return Err(GeometryError::PointOutsideCharts {
                manifold: self.name.clone(),
                coords: p.coords.iter().cloned().collect(),
            });
        }
        Ok(Point { chart: p.chart, coords })
    }

    pub fn metric_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        let p = self.validate_point(p)?;
        Ok((self.metric[p.chart])(&p.coords))
    }

    pub fn inverse_metric_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        let g = self.metric_at(p)?;
        g.clone().try_inverse().ok_or_else(|| GeometryError::SingularMetric {
            coords: p.coords.iter().cloned().collect(),
        })
    }

    pub fn inner(&self, p: &Point, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let g = self.metric_at(p)?;
        Ok((x.transpose() * g * y)[(0, 0)])
    }

    /// FD Christoffel without domain validation; FD stencils are allowed to
    /// step just outside a chart box.
    fn christoffel_fd_raw(&self, chart: usize, coords: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        let metric = self.metric[chart].clone();
        let h = fd::step(coords.norm());

        // dg[m] = d_m g as a matrix
        let mut dg = Vec::with_capacity(n);
        for m in 0..n {
            let mf = metric.clone();
            let flat = fd::partial_vec(
                move |x| {
                    let g = mf(x);
                    DVector::from_iterator(n * n, g.iter().cloned())
                },
                coords,
                m,
                h,
            );
            dg.push(DMatrix::from_iterator(n, n, flat.iter().cloned()));
        }

        let g = (self.metric[chart])(coords);
        let ginv = g.try_inverse().expect("metric invertible near a valid point");
        let mut gamma = vec![DMatrix::zeros(n, n); n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    let v = 0.5 * s;
                    gamma[k][(i, j)] = v;
                    gamma[k][(j, i)] = v;
                }
            }
        }
        gamma
    }

    pub(crate) fn christoffel_raw(&self, chart: usize, coords: &DVector<f64>) -> Vec<DMatrix<f64>> {
        if let Some(f) = &self.analytic_christoffel[chart] {
            f(coords)
        } else {
            self.christoffel_fd_raw(chart, coords)
        }
    }

    /// Christoffel symbols by finite differences on the metric components.
    pub fn christoffel_fd(&self, p: &Point) -> Result<Vec<DMatrix<f64>>> {
        let p = self.validate_point(p)?;
        Ok(self.christoffel_fd_raw(p.chart, &p.coords))
    }

    /// Christoffel symbols, preferring an analytic override.
    pub fn christoffel(&self, p: &Point) -> Result<Vec<DMatrix<f64>>> {
        let p = self.validate_point(p)?;
        Ok(self.christoffel_raw(p.chart, &p.coords))
    }

    /// Curvature components from the Christoffel field; used directly when no
    /// analytic curvature is supplied and as the FD cross-check otherwise.
    pub fn curvature_fd(&self, p: &Point) -> Result<CurvatureArray> {
        let p = self.validate_point(p)?;
        let n = self.dim;
        // Differentiating an FD Christoffel needs a larger outer step to keep
        // the inner FD noise from being amplified.
        let h = if self.analytic_christoffel[p.chart].is_some() {
            fd::step(p.coords.norm())
        } else {
            5e-3 * (1.0 + p.coords.norm())
        };

        let gamma0 = self.christoffel_raw(p.chart, &p.coords);
        let mut dgamma = Vec::with_capacity(n);
        for m in 0..n {
            let this = self.clone();
            let chart = p.chart;
            let flat = fd::partial_vec(
                move |x| {
                    let g = this.christoffel_raw(chart, x);
                    DVector::from_iterator(n * n * n, g.iter().flat_map(|m| m.iter().cloned()))
                },
                &p.coords,
                m,
                h,
            );
            dgamma.push(flat);
        }
        // dgamma[m][k * n * n + col * n + row] follows DMatrix column-major order.
        let dg = |m: usize, k: usize, i: usize, j: usize| dgamma[m][k * n * n + j * n + i];

        let mut r = CurvatureArray::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        // (R(d_i, d_j) d_k)^l
                        let mut v = dg(i, l, j, k) - dg(j, l, i, k);
                        for m in 0..n {
                            v += gamma0[l][(i, m)] * gamma0[m][(j, k)]
                                - gamma0[l][(j, m)] * gamma0[m][(i, k)];
                        }
                        r.set(i, j, k, l, v);
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn curvature(&self, p: &Point) -> Result<CurvatureArray> {
        let p = self.validate_point(p)?;
        if let Some(f) = &self.analytic_curvature[p.chart] {
            Ok(f(&p.coords))
        } else {
            self.curvature_fd(&p)
        }
    }

    /// Ricci operator Q with g(QX, Y) = tr(Z -> R(Z, X)Y).
    pub fn ricci_operator(&self, p: &Point) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let r = self.curvature(p)?;
        let mut ric = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += r.get(i, j, k, i);
                }
                ric[(j, k)] = s;
            }
        }
        let ginv = self.inverse_metric_at(p)?;
        Ok(ginv * ric)
    }

    /// g-orthonormal frame from Gram-Schmidt on the coordinate frame, in
    /// deterministic axis order.
    pub fn orthonormal_frame(&self, p: &Point) -> Result<Vec<DVector<f64>>> {
        let n = self.dim;
        let g = self.metric_at(p)?;
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            for e in &frame {
                let c = (e.transpose() * &g * &v)[(0, 0)];
                v -= e * c;
            }
            let norm2 = (v.transpose() * &g * &v)[(0, 0)];
            if norm2 <= 0.0 {
                return Err(GeometryError::SingularMetric {
                    coords: p.coords.iter().cloned().collect(),
                });
            }
            frame.push(v / norm2.sqrt());
        }
        Ok(frame)
    }

    pub fn transition(&self, from: usize, to: usize) -> Result<&Transition> {
        self.transitions
            .iter()
            .find(|t| t.from == from && t.to == to)
            .ok_or(GeometryError::MissingTransition { from, to })
    }

    /// Re-expresses a point of the overlap in another chart.
    pub fn transport_point(&self, p: &Point, to: usize) -> Result<Point> {
        if p.chart == to {
            return Ok(p.clone());
        }
        let t = self.transition(p.chart, to)?;
        let coords = (t.map)(&p.coords);
        self.validate_point(&Point { chart: to, coords })
    }

    /// Pushes tangent components through the overlap Jacobian.
    pub fn transport_vector(&self, v: &TangentVector, to: usize) -> Result<TangentVector> {
        if v.base.chart == to {
            return Ok(v.clone());
        }
        let t = self.transition(v.base.chart, to)?;
        let base = self.transport_point(&v.base, to)?;
        let j = (t.jacobian)(&v.base.coords);
        Ok(TangentVector { base, comps: j * &v.comps })
    }
}

/// Free-function forms of the intrinsic operations, matching the public API
/// of the crate one-to-one with the methods above.
pub fn christoffel(m: &ChartedManifold, p: &Point) -> Result<Vec<DMatrix<f64>>> {
    m.christoffel(p)
}

pub fn curvature(m: &ChartedManifold, p: &Point) -> Result<CurvatureArray> {
    m.curvature(p)
}

pub fn ricci_operator(m: &ChartedManifold, p: &Point) -> Result<DMatrix<f64>> {
    m.ricci_operator(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_christoffel_vanishes() {
        let m = euclidean(2);
        let p = Point::new(0, vec![0.3, -1.2]);
        let gamma = m.christoffel(&p).unwrap();
        for k in 0..2 {
            assert!(gamma[k].amax() < 1e-12);
        }
    }

    #[test]
    fn torus_is_flat() {
        let m = flat_torus(2, None);
        let p = Point::new(0, vec![1.0, 2.0]);
        let gamma = m.christoffel(&p).unwrap();
        for k in 0..2 {
            assert!(gamma[k].amax() < 1e-12);
        }
        let r = m.curvature(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert!(r.get(i, j, k, l).abs() < 1e-12);
                    }
                }
            }
        }
        assert!(m.ricci_operator(&p).unwrap().amax() < 1e-12);
    }

    #[test]
    fn torus_wraps_periodic_coordinates() {
        let m = flat_torus(2, None);
        let p = m
            .validate_point(&Point::new(0, vec![7.0, -1.0]))
            .unwrap();
        let tau = std::f64::consts::TAU;
        assert!((p.coords[0] - (7.0 - tau)).abs() < 1e-12);
        assert!((p.coords[1] - (tau - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn point_outside_chart_errors() {
        let m = euclidean(2);
        assert!(m.validate_point(&Point::new(0, vec![1e9, 0.0])).is_err());
    }

    /// Hand differentiation of g_ij = 4 delta_ij / (1 + |x|^2)^2 gives
    /// Gamma^k_ij = delta_ik w_j + delta_jk w_i - delta_ij w_k with
    /// w_i = -2 x_i / (1 + |x|^2); the FD route must reproduce it.
    #[test]
    fn sphere_fd_christoffel_matches_conformal_formula() {
        let m = sphere(2, 1.0);
        for coords in [vec![0.0, 0.0], vec![0.3, -0.4]] {
            let p = Point::new(0, coords.clone());
            let fd = m.christoffel_fd(&p).unwrap();
            let s: f64 = 1.0 + coords.iter().map(|c| c * c).sum::<f64>();
            let w: Vec<f64> = coords.iter().map(|c| -2.0 * c / s).collect();
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut exact = 0.0;
                        if i == k {
                            exact += w[j];
                        }
                        if j == k {
                            exact += w[i];
                        }
                        if i == j {
                            exact -= w[k];
                        }
                        assert!(
                            (fd[k][(i, j)] - exact).abs() < 1e-9,
                            "Gamma^{k}_{i}{j}: fd {} vs exact {}",
                            fd[k][(i, j)],
                            exact
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sphere_sectional_curvature_is_one() {
        // S^2 with the analytic curvature array.
        let m = sphere(2, 1.0);
        let p = Point::new(0, vec![0.2, 0.1]);
        let frame = m.orthonormal_frame(&p).unwrap();
        let r = m.curvature(&p).unwrap();
        let rz = r.apply(&frame[0], &frame[1], &frame[1]);
        let sec = m.inner(&p, &rz, &frame[0]).unwrap();
        assert!((sec - 1.0).abs() < 1e-10, "sec = {sec}");
    }

    #[test]
    fn sphere3_fd_sectional_curvature() {
        // Pure FD route on the stereographic chart of S^3.
        let mut m = sphere(3, 1.0);
        m.analytic_curvature = vec![None; m.charts.len()];
        let p = Point::new(0, vec![0.25, -0.15, 0.4]);
        let frame = m.orthonormal_frame(&p).unwrap();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let r = m.curvature(&p).unwrap();
            let rz = r.apply(&frame[a], &frame[b], &frame[b]);
            let sec = m.inner(&p, &rz, &frame[a]).unwrap();
            assert!((sec - 1.0).abs() < 1e-6, "sec({a},{b}) = {sec}");
        }
    }

    #[test]
    fn sphere_ricci_is_n_minus_one() {
        let m = sphere(3, 1.0);
        let p = Point::new(0, vec![0.1, 0.2, -0.3]);
        let q = m.ricci_operator(&p).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((q - 2.0 * id).amax() < 1e-8);
    }

    #[test]
    fn first_bianchi_on_sphere() {
        let m = sphere(2, 1.0);
        let p = Point::new(0, vec![0.4, 0.2]);
        let r = m.curvature(&p).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let y = DVector::from_vec(vec![1.1, 0.2]);
        let z = DVector::from_vec(vec![-0.4, 0.9]);
        let s = r.apply(&x, &y, &z) + r.apply(&y, &z, &x) + r.apply(&z, &x, &y);
        assert!(s.amax() < 1e-6);
    }

    #[test]
    fn orthonormal_frame_is_orthonormal() {
        let m = sphere(2, 2.0);
        let p = Point::new(0, vec![0.5, -0.2]);
        let frame = m.orthonormal_frame(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d = m.inner(&p, &frame[i], &frame[j]).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn metric_transforms_as_tensor_on_sphere_overlap() {
        let m = sphere(2, 1.0);
        // overlap band 0.5 < |x| < 2.0
        let p = Point::new(0, vec![0.8, 0.5]);
        let q = m.transport_point(&p, 1).unwrap();
        let t = m.transition(0, 1).unwrap();
        let j = (t.jacobian)(&p.coords);
        let g0 = m.metric_at(&p).unwrap();
        let g1 = m.metric_at(&q).unwrap();
        let pulled = j.transpose() * g1 * j;
        assert!((pulled - g0).amax() < 1e-9);
    }

    #[test]
    fn vector_transport_round_trip() {
        let m = sphere(2, 1.0);
        let p = Point::new(0, vec![1.0, -0.6]);
        let v = TangentVector::new(p, DVector::from_vec(vec![0.3, 0.9]));
        let w = m.transport_vector(&v, 1).unwrap();
        let back = m.transport_vector(&w, 0).unwrap();
        assert!((back.comps - v.comps).amax() < 1e-9);
    }
}
