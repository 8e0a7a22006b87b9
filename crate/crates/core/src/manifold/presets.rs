//! Built-in base manifolds: Euclidean space, flat tori, round spheres in
//! stereographic charts, and products with a flat line factor.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{Chart, ChartedManifold, CurvatureArray, Point, Transition};
use crate::error::{GeometryError, Result};

fn zero_christoffel(n: usize) -> super::ChristoffelFn {
    Arc::new(move |_x| vec![DMatrix::zeros(n, n); n])
}

fn zero_curvature(n: usize) -> super::CurvatureFn {
    Arc::new(move |_x| CurvatureArray::zeros(n))
}

/// Euclidean R^n on a single large box chart.
pub fn euclidean(n: usize) -> ChartedManifold {
    let chart = Chart::boxed(0, vec![-50.0; n], vec![50.0; n]);
    ChartedManifold {
        name: format!("euclidean:{n}"),
        dim: n,
        charts: vec![chart],
        metric: vec![Arc::new(move |_x| DMatrix::identity(n, n))],
        analytic_christoffel: vec![Some(zero_christoffel(n))],
        analytic_curvature: vec![Some(zero_curvature(n))],
        transitions: vec![],
        constant_curvature: Some(0.0),
        volume: None,
    }
}

/// Flat torus T^n: one chart with every axis periodic (default period 2*pi).
pub fn flat_torus(n: usize, period: Option<f64>) -> ChartedManifold {
    let period = period.unwrap_or(TAU);
    let chart = Chart::periodic_box(0, n, period);
    ChartedManifold {
        name: format!("torus:{n}"),
        dim: n,
        charts: vec![chart],
        metric: vec![Arc::new(move |_x| DMatrix::identity(n, n))],
        analytic_christoffel: vec![Some(zero_christoffel(n))],
        analytic_curvature: vec![Some(zero_curvature(n))],
        transitions: vec![],
        constant_curvature: Some(0.0),
        volume: Some(period.powi(n as i32)),
    }
}

/// Gamma function at integer or half-integer arguments (for sphere volumes).
fn gamma_half(two_z: u32) -> f64 {
    // argument z = two_z / 2
    match two_z {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (two_z as f64 / 2.0 - 1.0) * gamma_half(two_z - 2),
    }
}

pub fn sphere_volume(n: usize, radius: f64) -> f64 {
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half((n + 1) as u32) * radius.powi(n as i32)
}

/// Round sphere S^n of the given radius, in two stereographic charts
/// (chart 0 covers everything except one pole, chart 1 the antipodal chart).
/// The metric is conformal: g_ij = (2 a^2 / (a^2 + |x|^2))^2 delta_ij.
pub fn sphere(n: usize, radius: f64) -> ChartedManifold {
    let a = radius;
    let metric: super::MetricFn = Arc::new(move |x: &DVector<f64>| {
        let s = a * a + x.norm_squared();
        let lam = 2.0 * a * a / s;
        DMatrix::identity(n, n) * (lam * lam)
    });
    let christoffel: super::ChristoffelFn = Arc::new(move |x: &DVector<f64>| {
        let s = a * a + x.norm_squared();
        let w: Vec<f64> = x.iter().map(|c| -2.0 * c / s).collect();
        let mut gamma = vec![DMatrix::zeros(n, n); n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = 0.0;
                    if i == k {
                        v += w[j];
                    }
                    if j == k {
                        v += w[i];
                    }
                    if i == j {
                        v -= w[k];
                    }
                    gamma[k][(i, j)] = v;
                }
            }
        }
        gamma
    });
    let k = 1.0 / (a * a);
    let metric_for_curv = metric.clone();
    let curv: super::CurvatureFn = Arc::new(move |x: &DVector<f64>| {
        let g = metric_for_curv(x);
        let mut r = CurvatureArray::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for kk in 0..n {
                    for l in 0..n {
                        let mut v = 0.0;
                        if l == i {
                            v += k * g[(j, kk)];
                        }
                        if l == j {
                            v -= k * g[(i, kk)];
                        }
                        r.set(i, j, kk, l, v);
                    }
                }
            }
        }
        r
    });

    // Transition: inversion y = a^2 x / |x|^2, its own inverse.
    let inv_map: super::CoordMap = Arc::new(move |x: &DVector<f64>| {
        let r2 = x.norm_squared();
        x * (a * a / r2)
    });
    let inv_jac: super::JacobianMap = Arc::new(move |x: &DVector<f64>| {
        let r2 = x.norm_squared();
        let n_ = x.len();
        let mut j = DMatrix::identity(n_, n_) / r2;
        for p in 0..n_ {
            for q in 0..n_ {
                j[(p, q)] -= 2.0 * x[p] * x[q] / (r2 * r2);
            }
        }
        j * (a * a)
    });

    let bound = 2.5 * a;
    let charts = vec![
        Chart::boxed(0, vec![-bound; n], vec![bound; n]),
        Chart::boxed(1, vec![-bound; n], vec![bound; n]),
    ];
    ChartedManifold {
        name: format!("sphere:{n}"),
        dim: n,
        charts,
        metric: vec![metric.clone(), metric],
        analytic_christoffel: vec![Some(christoffel.clone()), Some(christoffel)],
        analytic_curvature: vec![Some(curv.clone()), Some(curv)],
        transitions: vec![
            Transition { from: 0, to: 1, map: inv_map.clone(), jacobian: inv_jac.clone() },
            Transition { from: 1, to: 0, map: inv_map, jacobian: inv_jac },
        ],
        constant_curvature: Some(k),
        volume: Some(sphere_volume(n, a)),
    }
}

/// Embeds a chart point of `sphere(n, a)` into R^{n+1}.
pub fn sphere_embed(chart: usize, x: &DVector<f64>, a: f64) -> DVector<f64> {
    let n = x.len();
    let s = a * a + x.norm_squared();
    let mut p = DVector::zeros(n + 1);
    for i in 0..n {
        p[i] = 2.0 * a * a * x[i] / s;
    }
    let last = a * (x.norm_squared() - a * a) / s;
    p[n] = if chart == 0 { last } else { -last };
    p
}

/// Differential of the embedding: an (n+1) x n matrix with orthogonal
/// columns of common length 2 a^2 / (a^2 + |x|^2).
pub fn sphere_embed_jacobian(chart: usize, x: &DVector<f64>, a: f64) -> DMatrix<f64> {
    let n = x.len();
    let s = a * a + x.norm_squared();
    let mut d = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = -4.0 * a * a * x[i] * x[j] / (s * s);
            if i == j {
                v += 2.0 * a * a / s;
            }
            d[(i, j)] = v;
        }
    }
    for j in 0..n {
        let last = 4.0 * a.powi(3) * x[j] / (s * s);
        d[(n, j)] = if chart == 0 { last } else { -last };
    }
    d
}

/// Chart representation of an ambient point of the sphere |p| = a, choosing
/// the chart whose covered hemisphere contains it.
pub fn sphere_point_from_ambient(p: &DVector<f64>, a: f64) -> Point {
    let n = p.len() - 1;
    let w = p[n] / a;
    let q = DVector::from_iterator(n, p.iter().take(n).cloned());
    if w <= 0.0 {
        Point { chart: 0, coords: q / (1.0 - w) }
    } else {
        Point { chart: 1, coords: q / (1.0 + w) }
    }
}

/// Pushes an ambient tangent vector (tangent to the sphere at the embedded
/// point) down to chart components.
pub fn sphere_vector_from_ambient(
    chart: usize,
    x: &DVector<f64>,
    ambient: &DVector<f64>,
    a: f64,
) -> DVector<f64> {
    let d = sphere_embed_jacobian(chart, x, a);
    let s = a * a + x.norm_squared();
    let lam = 2.0 * a * a / s;
    (d.transpose() * ambient) / (lam * lam)
}

/// Product R x M' with the flat line as axis 0.
pub fn product_with_line(inner: ChartedManifold) -> ChartedManifold {
    let n = inner.dim + 1;
    let charts = inner
        .charts
        .iter()
        .map(|c| {
            let mut lo = vec![-50.0];
            lo.extend_from_slice(&c.lo);
            let mut hi = vec![50.0];
            hi.extend_from_slice(&c.hi);
            let mut periodic = vec![None];
            periodic.extend_from_slice(&c.periodic);
            Chart { id: c.id, dim: n, lo, hi, periodic }
        })
        .collect();

    let split = move |x: &DVector<f64>| DVector::from_iterator(n - 1, x.iter().skip(1).cloned());

    let metric = inner
        .metric
        .iter()
        .map(|m| {
            let m = m.clone();
            let f: super::MetricFn = Arc::new(move |x: &DVector<f64>| {
                let gi = m(&DVector::from_iterator(x.len() - 1, x.iter().skip(1).cloned()));
                let mut g = DMatrix::zeros(x.len(), x.len());
                g[(0, 0)] = 1.0;
                for i in 0..gi.nrows() {
                    for j in 0..gi.ncols() {
                        g[(i + 1, j + 1)] = gi[(i, j)];
                    }
                }
                g
            });
            f
        })
        .collect();

    let analytic_christoffel = inner
        .analytic_christoffel
        .iter()
        .map(|opt| {
            opt.as_ref().map(|f| {
                let f = f.clone();
                let g: super::ChristoffelFn = Arc::new(move |x: &DVector<f64>| {
                    let inner_g = f(&DVector::from_iterator(x.len() - 1, x.iter().skip(1).cloned()));
                    let n = x.len();
                    let mut out = vec![DMatrix::zeros(n, n); n];
                    for k in 0..n - 1 {
                        for i in 0..n - 1 {
                            for j in 0..n - 1 {
                                out[k + 1][(i + 1, j + 1)] = inner_g[k][(i, j)];
                            }
                        }
                    }
                    out
                });
                g
            })
        })
        .collect();

    let analytic_curvature = inner
        .analytic_curvature
        .iter()
        .map(|opt| {
            opt.as_ref().map(|f| {
                let f = f.clone();
                let g: super::CurvatureFn = Arc::new(move |x: &DVector<f64>| {
                    let ri = f(&DVector::from_iterator(x.len() - 1, x.iter().skip(1).cloned()));
                    let n = x.len();
                    let mut r = CurvatureArray::zeros(n);
                    for i in 0..n - 1 {
                        for j in 0..n - 1 {
                            for k in 0..n - 1 {
                                for l in 0..n - 1 {
                                    r.set(i + 1, j + 1, k + 1, l + 1, ri.get(i, j, k, l));
                                }
                            }
                        }
                    }
                    r
                });
                g
            })
        })
        .collect();

    let transitions = inner
        .transitions
        .iter()
        .map(|t| {
            let map = t.map.clone();
            let jac = t.jacobian.clone();
            let split2 = split;
            Transition {
                from: t.from,
                to: t.to,
                map: Arc::new(move |x: &DVector<f64>| {
                    let inner = map(&split2(x));
                    let mut out = DVector::zeros(x.len());
                    out[0] = x[0];
                    for i in 0..inner.len() {
                        out[i + 1] = inner[i];
                    }
                    out
                }),
                jacobian: Arc::new(move |x: &DVector<f64>| {
                    let ji = jac(&DVector::from_iterator(x.len() - 1, x.iter().skip(1).cloned()));
                    let n = x.len();
                    let mut j = DMatrix::zeros(n, n);
                    j[(0, 0)] = 1.0;
                    for p in 0..n - 1 {
                        for q in 0..n - 1 {
                            j[(p + 1, q + 1)] = ji[(p, q)];
                        }
                    }
                    j
                }),
            }
        })
        .collect();

    let flat = inner.constant_curvature == Some(0.0);
    ChartedManifold {
        name: format!("product:r1x{}", inner.name),
        dim: n,
        charts,
        metric,
        analytic_christoffel,
        analytic_curvature,
        transitions,
        constant_curvature: if flat { Some(0.0) } else { None },
        volume: None,
    }
}

/// Resolves a manifold spec string:
/// `euclidean:n`, `torus:n[:period]`, `sphere:n[:radius]`, `product:r1x<name>`.
pub fn manifold_by_name(spec: &str) -> Result<ChartedManifold> {
    let bad = || GeometryError::UnknownPreset(spec.to_string());
    if let Some(rest) = spec.strip_prefix("product:r1x") {
        return Ok(product_with_line(manifold_by_name(rest)?));
    }
    let mut parts = spec.split(':');
    let head = parts.next().ok_or_else(bad)?;
    let n: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(GeometryError::InvalidParameters("dimension must be positive".into()));
    }
    match head {
        "euclidean" => Ok(euclidean(n)),
        "torus" => {
            let period = match parts.next() {
                Some(p) => Some(p.parse().map_err(|_| bad())?),
                None => None,
            };
            Ok(flat_torus(n, period))
        }
        "sphere" => {
            let radius = match parts.next() {
                Some(r) => r.parse().map_err(|_| bad())?,
                None => 1.0,
            };
            Ok(sphere(n, radius))
        }
        _ => Err(bad()),
    }
}
