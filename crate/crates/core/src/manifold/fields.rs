//! Vector fields on charted manifolds and the differential operators taken
//! of them: nabla V, rough Laplacian, divergence, grad r^2 and the curvature
//! trace term tr[R(nabla_. V, V) .].

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ChartedManifold, Point, TangentVector};
use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::fd;

type CompsFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type JacFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A vector field given chart-wise by component functions, with an optional
/// analytic Jacobian (`jac[(k, i)] = d_i V^k`).
#[derive(Clone)]
pub struct VectorFieldDescriptor {
    pub name: String,
    comps: Vec<Option<CompsFn>>,
    jacobian: Vec<Option<JacFn>>,
}

impl VectorFieldDescriptor {
    pub fn from_fns(
        name: impl Into<String>,
        comps: Vec<Option<CompsFn>>,
        jacobian: Vec<Option<JacFn>>,
    ) -> Self {
        VectorFieldDescriptor { name: name.into(), comps, jacobian }
    }

    /// Same closure on every chart.
    pub fn uniform(name: impl Into<String>, n_charts: usize, f: CompsFn, j: Option<JacFn>) -> Self {
        VectorFieldDescriptor {
            name: name.into(),
            comps: vec![Some(f); n_charts],
            jacobian: vec![j; n_charts],
        }
    }

    /// Constant chart components (a parallel field on flat presets).
    pub fn parallel(c: Vec<f64>, n_charts: usize) -> Self {
        let n = c.len();
        let v = DVector::from_vec(c);
        let vv = v.clone();
        Self::uniform(
            format!("parallel:{}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
            n_charts,
            Arc::new(move |_x| vv.clone()),
            Some(Arc::new(move |_x| DMatrix::zeros(n, n))),
        )
    }

    pub fn zero(n: usize, n_charts: usize) -> Self {
        Self::parallel(vec![0.0; n], n_charts)
    }

    /// V(x) = A x in chart coordinates, same formula on every chart.
    pub fn linear(a: DMatrix<f64>, n_charts: usize) -> Self {
        let aj = a.clone();
        Self::uniform(
            "linear",
            n_charts,
            Arc::new(move |x| &a * x),
            Some(Arc::new(move |_x| aj.clone())),
        )
    }

    /// Block rotation in chart coordinates:
    /// V = scale * (-x2, x1, -x4, x3, ...), last component 0 in odd dimension.
    pub fn rotation(n: usize, scale: f64, n_charts: usize) -> Self {
        let mut a = DMatrix::zeros(n, n);
        let mut i = 0;
        while i + 1 < n {
            a[(i, i + 1)] = -scale;
            a[(i + 1, i)] = scale;
            i += 2;
        }
        let mut f = Self::linear(a, n_charts);
        f.name = format!("rotation:{scale}");
        f
    }

    /// The Hopf field on `sphere(2m+1, radius)`: the ambient field
    /// p -> (-p2, p1, -p4, p3, ...) pushed down to stereographic chart
    /// components. Unit length when radius = 1.
    pub fn hopf(dim: usize, radius: f64) -> Result<Self> {
        if dim % 2 == 0 {
            return Err(GeometryError::EvenDimension(dim));
        }
        let make = |chart: usize| -> CompsFn {
            Arc::new(move |x: &DVector<f64>| {
                let p = super::sphere_embed(chart, x, radius);
                let mut xi = DVector::zeros(p.len());
                let mut i = 0;
                while i + 1 < p.len() {
                    xi[i] = -p[i + 1];
                    xi[i + 1] = p[i];
                    i += 2;
                }
                super::sphere_vector_from_ambient(chart, x, &xi, radius)
            })
        };
        Ok(VectorFieldDescriptor {
            name: "hopf".into(),
            comps: vec![Some(make(0)), Some(make(1))],
            jacobian: vec![None, None],
        })
    }

    /// Unit-length field on `sphere(n, radius)` (n odd) obtained by
    /// normalizing the tangent field p -> A p of a nonsingular skew-symmetric
    /// ambient matrix A; the round metric is induced, so ambient
    /// normalization gives Riemannian unit length.
    pub fn skew_unit(a: DMatrix<f64>, radius: f64) -> Result<Self> {
        let n = a.nrows() - 1;
        if n % 2 == 0 {
            return Err(GeometryError::EvenDimension(n));
        }
        if (a.clone() + a.transpose()).amax() > 1e-12 {
            return Err(GeometryError::InvalidParameters(
                "skew_unit needs a skew-symmetric ambient matrix".into(),
            ));
        }
        let a = Arc::new(a);
        let make = |chart: usize| -> CompsFn {
            let a = a.clone();
            Arc::new(move |x: &DVector<f64>| {
                let p = super::sphere_embed(chart, x, radius);
                let w = &*a * p;
                let w = &w / w.norm();
                super::sphere_vector_from_ambient(chart, x, &w, radius)
            })
        };
        Ok(VectorFieldDescriptor {
            name: "skew-unit".into(),
            comps: vec![Some(make(0)), Some(make(1))],
            jacobian: vec![None, None],
        })
    }

    /// Components given as expression trees in the coordinate variables,
    /// applied identically on every chart.
    pub fn from_exprs(name: impl Into<String>, comps: Vec<Expr>, n_charts: usize) -> Self {
        let n = comps.len();
        let cf = comps.clone();
        let f: CompsFn = Arc::new(move |x: &DVector<f64>| {
            let vars: Vec<f64> = x.iter().cloned().collect();
            DVector::from_iterator(n, cf.iter().map(|e| e.eval(&vars)))
        });
        let j: JacFn = Arc::new(move |x: &DVector<f64>| {
            let vars: Vec<f64> = x.iter().cloned().collect();
            let mut jm = DMatrix::zeros(n, n);
            for (k, e) in comps.iter().enumerate() {
                for i in 0..n {
                    jm[(k, i)] = e.eval_with_deriv(&vars, i).1;
                }
            }
            jm
        });
        Self::uniform(name, n_charts, f, Some(j))
    }

    /// The field scaled by a constant factor.
    pub fn scaled(&self, c: f64) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|opt| {
                opt.as_ref().map(|f| {
                    let f = f.clone();
                    let g: CompsFn = Arc::new(move |x: &DVector<f64>| f(x) * c);
                    g
                })
            })
            .collect();
        let jacobian = self
            .jacobian
            .iter()
            .map(|opt| {
                opt.as_ref().map(|f| {
                    let f = f.clone();
                    let g: JacFn = Arc::new(move |x: &DVector<f64>| f(x) * c);
                    g
                })
            })
            .collect();
        VectorFieldDescriptor { name: format!("{}*{}", self.name, c), comps, jacobian }
    }

    fn comps_fn(&self, chart: usize) -> Result<&CompsFn> {
        self.comps
            .get(chart)
            .and_then(|o| o.as_ref())
            .ok_or_else(|| GeometryError::FieldNotDefined { field: self.name.clone(), chart })
    }

    /// Raw evaluation without chart-domain validation; FD stencils may step
    /// slightly outside the box.
    pub(crate) fn comps_raw(&self, chart: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok((self.comps_fn(chart)?)(x))
    }

    pub fn comps_at(&self, m: &ChartedManifold, p: &Point) -> Result<DVector<f64>> {
        let p = m.validate_point(p)?;
        self.comps_raw(p.chart, &p.coords)
    }

    pub fn at(&self, m: &ChartedManifold, p: &Point) -> Result<TangentVector> {
        let p = m.validate_point(p)?;
        let comps = self.comps_raw(p.chart, &p.coords)?;
        Ok(TangentVector { base: p, comps })
    }

    pub(crate) fn jacobian_raw(&self, chart: usize, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if let Some(Some(j)) = self.jacobian.get(chart) {
            return Ok(j(x));
        }
        let f = self.comps_fn(chart)?.clone();
        let n = x.len();
        let h = fd::step(x.norm());
        let mut jm = DMatrix::zeros(n, n);
        for i in 0..n {
            let col = fd::partial_vec(|y| f(y), x, i, h);
            jm.set_column(i, &col);
        }
        // partial_vec columns: jm[(k, i)] = d_i V^k
        Ok(jm)
    }

    pub fn jacobian_at(&self, m: &ChartedManifold, p: &Point) -> Result<DMatrix<f64>> {
        let p = m.validate_point(p)?;
        self.jacobian_raw(p.chart, &p.coords)
    }
}

/// (nabla V) at a point as the matrix N with N[(k, i)] = (nabla_{d_i} V)^k.
pub(crate) fn nabla_matrix_raw(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    chart: usize,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = m.dim;
    let mut nmat = v.jacobian_raw(chart, x)?;
    let gamma = m.christoffel_raw(chart, x);
    let vv = v.comps_raw(chart, x)?;
    for k in 0..n {
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += gamma[k][(i, j)] * vv[j];
            }
            nmat[(k, i)] += s;
        }
    }
    Ok(nmat)
}

pub fn nabla_matrix(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<DMatrix<f64>> {
    let p = m.validate_point(p)?;
    nabla_matrix_raw(m, v, p.chart, &p.coords)
}

/// nabla_X V for a tangent vector X.
pub fn covariant_derivative(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    x: &TangentVector,
) -> Result<TangentVector> {
    let base = m.validate_point(&x.base)?;
    let nmat = nabla_matrix_raw(m, v, base.chart, &base.coords)?;
    Ok(TangentVector { base, comps: nmat * &x.comps })
}

/// nabla_V V at p.
pub fn nabla_v_v(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<TangentVector> {
    let vp = v.at(m, p)?;
    covariant_derivative(m, v, &vp)
}

/// div V = tr(nabla V).
pub fn divergence(m: &ChartedManifold, v: &VectorFieldDescriptor, p: &Point) -> Result<f64> {
    Ok(nabla_matrix(m, v, p)?.trace())
}

/// ||nabla V||^2 = g^{ab} g(nabla_a V, nabla_b V).
pub fn norm_nabla_v_sq(m: &ChartedManifold, v: &VectorFieldDescriptor, p: &Point) -> Result<f64> {
    let p = m.validate_point(p)?;
    let nmat = nabla_matrix_raw(m, v, p.chart, &p.coords)?;
    let g = (m.metric[p.chart])(&p.coords);
    let ginv = m.inverse_metric_at(&p)?;
    Ok((ginv * nmat.transpose() * g * nmat).trace())
}

/// r^2 = g(V, V) at p.
pub fn r2(m: &ChartedManifold, v: &VectorFieldDescriptor, p: &Point) -> Result<f64> {
    let p = m.validate_point(p)?;
    r2_raw(m, v, p.chart, &p.coords)
}

pub(crate) fn r2_raw(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    chart: usize,
    x: &DVector<f64>,
) -> Result<f64> {
    let vv = v.comps_raw(chart, x)?;
    let g = (m.metric[chart])(x);
    Ok((vv.transpose() * g * vv)[(0, 0)])
}

/// g-gradient of r^2 = g(V, V). Metric compatibility gives
/// d_i r^2 = 2 g(nabla_i V, V), so grad r^2 = 2 g^{-1} N^T g V exactly
/// (no finite differencing of the metric).
pub fn grad_r2(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<TangentVector> {
    let p = m.validate_point(p)?;
    let nmat = nabla_matrix_raw(m, v, p.chart, &p.coords)?;
    let g = (m.metric[p.chart])(&p.coords);
    let ginv = m.inverse_metric_at(&p)?;
    let vv = v.comps_raw(p.chart, &p.coords)?;
    let comps = 2.0 * ginv * nmat.transpose() * g * vv;
    Ok(TangentVector { base: p, comps })
}

/// nabla_{grad r^2} V.
pub fn nabla_grad_r2_v(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<TangentVector> {
    let grad = grad_r2(m, v, p)?;
    covariant_derivative(m, v, &grad)
}

/// V(r^2) = g(grad r^2, V).
pub fn v_of_r2(m: &ChartedManifold, v: &VectorFieldDescriptor, p: &Point) -> Result<f64> {
    let grad = grad_r2(m, v, p)?;
    let vv = v.comps_raw(grad.base.chart, &grad.base.coords)?;
    m.inner(&grad.base, &grad.comps, &vv)
}

/// ||grad r^2||^2.
pub fn norm_grad_r2_sq(m: &ChartedManifold, v: &VectorFieldDescriptor, p: &Point) -> Result<f64> {
    let grad = grad_r2(m, v, p)?;
    m.inner(&grad.base, &grad.comps, &grad.comps)
}

/// Rough Laplacian, sign chosen so the spectrum is nonnegative on compact M:
/// (DeltaBar V)^k = -g^{ij} [ d_i N^k_j + Gamma^k_{il} N^l_j - Gamma^l_{ij} N^k_l ]
/// where N is the nabla-V matrix.
pub fn rough_laplacian(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<TangentVector> {
    let p = m.validate_point(p)?;
    let n = m.dim;
    let chart = p.chart;
    let h = fd::step(p.coords.norm());

    let n0 = nabla_matrix_raw(m, v, chart, &p.coords)?;
    // dn[i][(k, j)] = d_i N^k_j
    let mut dn = Vec::with_capacity(n);
    for i in 0..n {
        let flat = fd::partial_vec(
            |x| {
                let nm = nabla_matrix_raw(m, v, chart, x).expect("field defined near p");
                DVector::from_iterator(n * n, nm.iter().cloned())
            },
            &p.coords,
            i,
            h,
        );
        dn.push(DMatrix::from_iterator(n, n, flat.iter().cloned()));
    }

    let gamma = m.christoffel_raw(chart, &p.coords);
    let ginv = m.inverse_metric_at(&p)?;
    let mut out = DVector::zeros(n);
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut t = dn[i][(k, j)];
                for l in 0..n {
                    t += gamma[k][(i, l)] * n0[(l, j)] - gamma[l][(i, j)] * n0[(k, l)];
                }
                acc += ginv[(i, j)] * t;
            }
        }
        out[k] = -acc;
    }
    Ok(TangentVector { base: p, comps: out })
}

/// tr[R(nabla_. V, V) .] = g^{ab} R(nabla_a V, V) d_b.
pub fn trace_r_term(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<TangentVector> {
    let p = m.validate_point(p)?;
    let n = m.dim;
    let r = m.curvature(&p)?;
    let nmat = nabla_matrix_raw(m, v, p.chart, &p.coords)?;
    let vv = v.comps_raw(p.chart, &p.coords)?;
    let ginv = m.inverse_metric_at(&p)?;
    let mut out = DVector::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let w = ginv[(a, b)];
            if w == 0.0 {
                continue;
            }
            // R(nabla_a V, V) d_b
            for i in 0..n {
                for j in 0..n {
                    let c = nmat[(i, a)] * vv[j];
                    if c == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        out[l] += w * c * r.get(i, j, b, l);
                    }
                }
            }
        }
    }
    Ok(TangentVector { base: p, comps: out })
}

/// Resolves a field spec string against a manifold:
/// `zero`, `parallel:c1,...,cn`, `rotation[:scale]`, `linear:a11,a12,...`
/// (row-major n x n), `hopf`.
pub fn field_by_name(m: &ChartedManifold, spec: &str) -> Result<VectorFieldDescriptor> {
    let n = m.dim;
    let n_charts = m.charts.len();
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (spec, None),
    };
    let parse_list = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| GeometryError::UnknownPreset(spec.to_string()))
            })
            .collect()
    };
    match head {
        "zero" => Ok(VectorFieldDescriptor::zero(n, n_charts)),
        "parallel" => {
            let c = parse_list(rest.unwrap_or(""))?;
            if c.len() != n {
                return Err(GeometryError::DimensionMismatch(format!(
                    "parallel field has {} components on a {n}-manifold",
                    c.len()
                )));
            }
            Ok(VectorFieldDescriptor::parallel(c, n_charts))
        }
        "rotation" => {
            let scale = match rest {
                Some(r) => r.parse().map_err(|_| GeometryError::UnknownPreset(spec.into()))?,
                None => 1.0,
            };
            Ok(VectorFieldDescriptor::rotation(n, scale, n_charts))
        }
        "linear" => {
            let entries = parse_list(rest.unwrap_or(""))?;
            if entries.len() != n * n {
                return Err(GeometryError::DimensionMismatch(format!(
                    "linear field needs {} entries, got {}",
                    n * n,
                    entries.len()
                )));
            }
            let a = DMatrix::from_row_slice(n, n, &entries);
            Ok(VectorFieldDescriptor::linear(a, n_charts))
        }
        "hopf" => {
            let radius = m
                .name
                .strip_prefix("sphere:")
                .map(|_| ())
                .ok_or_else(|| GeometryError::IncompatibleOperation {
                    op: "hopf field".into(),
                    manifold: m.name.clone(),
                    reason: "defined on odd spheres only".into(),
                })
                .and_then(|_| {
                    m.constant_curvature
                        .map(|k| 1.0 / k.sqrt())
                        .ok_or_else(|| GeometryError::UnknownPreset(spec.into()))
                })?;
            VectorFieldDescriptor::hopf(n, radius)
        }
        _ => Err(GeometryError::UnknownPreset(spec.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{flat_torus, sphere};
    use super::*;

    #[test]
    fn parallel_field_on_torus_is_parallel() {
        let m = flat_torus(2, None);
        let v = VectorFieldDescriptor::parallel(vec![1.0, -2.0], 1);
        let p = Point::new(0, vec![0.7, 2.2]);
        let x = TangentVector::new(p.clone(), DVector::from_vec(vec![0.3, 0.4]));
        assert!(covariant_derivative(&m, &v, &x).unwrap().comps.amax() < 1e-12);
        assert!(rough_laplacian(&m, &v, &p).unwrap().comps.amax() < 1e-10);
        assert!(divergence(&m, &v, &p).unwrap().abs() < 1e-12);
        assert!(grad_r2(&m, &v, &p).unwrap().comps.amax() < 1e-10);
        assert!(trace_r_term(&m, &v, &p).unwrap().comps.amax() < 1e-12);
    }

    #[test]
    fn flat_rotation_field_derivative() {
        // Euclidean R^2, V = (-y, x), nabla_{d_x} V = (0, 1).
        let m = super::super::euclidean(2);
        let v = VectorFieldDescriptor::rotation(2, 1.0, 1);
        let p = Point::new(0, vec![0.4, -1.1]);
        let x = TangentVector::new(p, DVector::from_vec(vec![1.0, 0.0]));
        let d = covariant_derivative(&m, &v, &x).unwrap();
        assert!((d.comps[0]).abs() < 1e-12);
        assert!((d.comps[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_laplacian_componentwise() {
        // V = (sin x, 0) on R^2: DeltaBar V = (sin x, 0); at x = pi/2 gives (1, 0).
        let m = super::super::euclidean(2);
        let v = VectorFieldDescriptor::from_exprs(
            "sinx",
            vec![Expr::Sin(Box::new(Expr::Var(0))), Expr::Const(0.0)],
            1,
        );
        let p = Point::new(0, vec![std::f64::consts::FRAC_PI_2, 0.0]);
        let lap = rough_laplacian(&m, &v, &p).unwrap();
        assert!((lap.comps[0] - 1.0).abs() < 1e-8, "{}", lap.comps[0]);
        assert!(lap.comps[1].abs() < 1e-10);
    }

    #[test]
    fn radial_field_divergence_and_grad() {
        // V = (x, y) on R^2 at (1,2): div = 2, grad r^2 = (2, 4).
        let m = super::super::euclidean(2);
        let v = VectorFieldDescriptor::linear(DMatrix::identity(2, 2), 1);
        let p = Point::new(0, vec![1.0, 2.0]);
        assert!((divergence(&m, &v, &p).unwrap() - 2.0).abs() < 1e-12);
        let g = grad_r2(&m, &v, &p).unwrap();
        assert!((g.comps[0] - 2.0).abs() < 1e-9);
        assert!((g.comps[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn hopf_field_is_unit_and_geodesic() {
        let m = sphere(3, 1.0);
        let v = VectorFieldDescriptor::hopf(3, 1.0).unwrap();
        for coords in [vec![0.0, 0.0, 0.0], vec![0.3, -0.5, 0.2], vec![1.1, 0.4, -0.8]] {
            let p = Point::new(0, coords);
            assert!((r2(&m, &v, &p).unwrap() - 1.0).abs() < 1e-12);
            let xi = v.at(&m, &p).unwrap();
            let d = covariant_derivative(&m, &v, &xi).unwrap();
            assert!(d.comps.amax() < 1e-6, "nabla_xi xi = {:?}", d.comps);
            assert!(divergence(&m, &v, &p).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn hopf_field_identities() {
        let m = sphere(3, 1.0);
        let v = VectorFieldDescriptor::hopf(3, 1.0).unwrap();
        let p = Point::new(0, vec![0.25, -0.15, 0.4]);
        // Q xi = 2 xi
        let q = m.ricci_operator(&p).unwrap();
        let xi = v.comps_at(&m, &p).unwrap();
        assert!((q * &xi - 2.0 * &xi).amax() < 1e-8);
        // DeltaBar xi = 2 xi
        let lap = rough_laplacian(&m, &v, &p).unwrap();
        assert!((lap.comps - 2.0 * &xi).amax() < 1e-4);
        // ||nabla xi||^2 = 2
        assert!((norm_nabla_v_sq(&m, &v, &p).unwrap() - 2.0).abs() < 1e-6);
        // tr[R(nabla_. xi, xi) .] = 0
        assert!(trace_r_term(&m, &v, &p).unwrap().comps.amax() < 1e-5);
    }

    #[test]
    fn constant_curvature_trace_identity() {
        // On S^2 (k = 1): tr[R(nabla_. V, V) .] = -(div V) V + nabla_V V.
        let m = sphere(2, 1.0);
        let v = VectorFieldDescriptor::linear(DMatrix::identity(2, 2), m.charts.len());
        let p = Point::new(0, vec![0.5, -0.3]);
        let t = trace_r_term(&m, &v, &p).unwrap();
        let div = divergence(&m, &v, &p).unwrap();
        let vv = v.comps_at(&m, &p).unwrap();
        let nvv = nabla_v_v(&m, &v, &p).unwrap();
        let expect = -div * &vv + nvv.comps;
        assert!((t.comps - expect).amax() < 1e-5);
    }

    #[test]
    fn metric_compatibility_along_fd_derivative() {
        // d/ds g(W1, W2) = g(nabla_X W1, W2) + g(W1, nabla_X W2) along X.
        let m = sphere(2, 1.0);
        let w1 = VectorFieldDescriptor::rotation(2, 1.0, m.charts.len());
        let w2 = VectorFieldDescriptor::linear(
            DMatrix::from_row_slice(2, 2, &[0.5, 1.0, -0.3, 0.2]),
            m.charts.len(),
        );
        let p = Point::new(0, vec![0.3, 0.4]);
        let x = DVector::from_vec(vec![0.7, -0.2]);
        let h = 1e-4;
        let val = |s: f64| {
            let q = Point { chart: 0, coords: &p.coords + &x * s };
            let g = (m.metric[0])(&q.coords);
            let a = w1.comps_raw(0, &q.coords).unwrap();
            let b = w2.comps_raw(0, &q.coords).unwrap();
            (a.transpose() * g * b)[(0, 0)]
        };
        let fd_deriv = (val(h) - val(-h)) / (2.0 * h);
        let xv = TangentVector::new(p.clone(), x.clone());
        let d1 = covariant_derivative(&m, &w1, &xv).unwrap();
        let d2 = covariant_derivative(&m, &w2, &xv).unwrap();
        let b1 = w1.comps_at(&m, &p).unwrap();
        let b2 = w2.comps_at(&m, &p).unwrap();
        let rhs = m.inner(&p, &d1.comps, &b2).unwrap() + m.inner(&p, &b1, &d2.comps).unwrap();
        assert!((fd_deriv - rhs).abs() < 1e-6);
    }

    #[test]
    fn chart_independence_of_covariant_derivative() {
        let m = sphere(2, 1.0);
        let v = VectorFieldDescriptor::hopf_like_test_field(&m);
        let p = Point::new(0, vec![0.8, 0.5]);
        let x = TangentVector::new(p.clone(), DVector::from_vec(vec![0.2, -0.6]));
        let d0 = covariant_derivative(&m, &v, &x).unwrap();
        let x1 = m.transport_vector(&x, 1).unwrap();
        let d1 = covariant_derivative(&m, &v, &x1).unwrap();
        let d0_in_1 = m.transport_vector(&d0, 1).unwrap();
        assert!((d0_in_1.comps - d1.comps).amax() < 1e-6);
    }

    #[test]
    fn parses_field_specs() {
        let m = flat_torus(2, None);
        assert!(field_by_name(&m, "parallel:1,0").is_ok());
        assert!(field_by_name(&m, "parallel:1").is_err());
        assert!(field_by_name(&m, "rotation:2.0").is_ok());
        assert!(field_by_name(&m, "hopf").is_err());
        let s = sphere(3, 1.0);
        assert!(field_by_name(&s, "hopf").is_ok());
    }
}

#[cfg(test)]
impl VectorFieldDescriptor {
    /// A smooth chart-consistent test field on S^2: the ambient rotation
    /// field about the z-axis, pushed to both stereographic charts.
    fn hopf_like_test_field(m: &ChartedManifold) -> Self {
        let a = 1.0 / m.constant_curvature.unwrap().sqrt();
        let make = |chart: usize| -> CompsFn {
            Arc::new(move |x: &DVector<f64>| {
                let p = super::sphere_embed(chart, x, a);
                let mut w = DVector::zeros(p.len());
                w[0] = -p[1];
                w[1] = p[0];
                super::sphere_vector_from_ambient(chart, x, &w, a)
            })
        };
        VectorFieldDescriptor {
            name: "z-rotation".into(),
            comps: vec![Some(make(0)), Some(make(1))],
            jacobian: vec![None, None],
        }
    }
}
