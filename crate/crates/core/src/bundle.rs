//! TM made concrete: induced 2n-coordinate charts, the horizontal/vertical
//! frame, the bundle metric as a 2n x 2n matrix, the closed-form lifted
//! connection, and the finite-difference oracle that recomputes the
//! Levi-Civita connection of G directly from the matrix field.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeometryError, Result};
use crate::fd;
use crate::manifold::{covariant_derivative, ChartedManifold, CurvatureArray, Point, TangentVector, VectorFieldDescriptor};
use crate::sextet::{coefficient_table, CoefficientTable, Lift, MetricSextet};

/// A point (x, u) of TM: base point plus fiber components in the base chart.
#[derive(Debug, Clone)]
pub struct TMPoint {
    pub base: Point,
    pub fiber: DVector<f64>,
}

impl TMPoint {
    pub fn new(base: Point, fiber: DVector<f64>) -> Self {
        TMPoint { base, fiber }
    }
}

/// A tangent vector of TM in the h/v splitting at a TMPoint.
#[derive(Debug, Clone)]
pub struct TMVector {
    pub hor: DVector<f64>,
    pub ver: DVector<f64>,
}

impl TMVector {
    pub fn zeros(n: usize) -> Self {
        TMVector { hor: DVector::zeros(n), ver: DVector::zeros(n) }
    }

    pub fn amax(&self) -> f64 {
        self.hor.amax().max(self.ver.amax())
    }
}

/// W[(k, i)] = Gamma^k_{ij} u^j: the fiber correction of horizontal lifts,
/// X^h = (X, -W X) in raw induced coordinates; X^v = (0, X).
pub(crate) fn w_matrix(m: &ChartedManifold, chart: usize, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let n = m.dim;
    let gamma = m.christoffel_raw(chart, x);
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += gamma[k][(i, j)] * u[j];
            }
            w[(k, i)] = s;
        }
    }
    w
}

/// The 2n frame vectors {d_i^h, d_i^v} as columns of a 2n x 2n matrix in raw
/// induced coordinates.
pub fn hv_frame(m: &ChartedManifold, q: &TMPoint) -> Result<DMatrix<f64>> {
    let base = m.validate_point(&q.base)?;
    let n = m.dim;
    let w = w_matrix(m, base.chart, &base.coords, &q.fiber);
    let mut l = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        l[(i, i)] = 1.0;
        l[(n + i, n + i)] = 1.0;
        for k in 0..n {
            l[(n + k, i)] = -w[(k, i)];
        }
    }
    Ok(l)
}

/// h/v components -> raw induced-coordinate components.
pub fn hv_to_raw(w: &DMatrix<f64>, v: &TMVector) -> DVector<f64> {
    let n = v.hor.len();
    let fiber = &v.ver - w * &v.hor;
    let mut raw = DVector::zeros(2 * n);
    for i in 0..n {
        raw[i] = v.hor[i];
        raw[n + i] = fiber[i];
    }
    raw
}

/// Raw induced-coordinate components -> h/v components; exact inverse of
/// `hv_to_raw` for the same W.
pub fn raw_to_hv(w: &DMatrix<f64>, raw: &DVector<f64>) -> TMVector {
    let n = w.nrows();
    let hor = DVector::from_iterator(n, raw.iter().take(n).cloned());
    let fiber = DVector::from_iterator(n, raw.iter().skip(n).cloned());
    let ver = fiber + w * &hor;
    TMVector { hor, ver }
}

/// The three blocks of G on the h/v frame at (x, u):
/// (hh, hv, vv) with hh = (a1+a3) g + (b1+b3) (gu)(gu)^T etc.
fn g_frame_blocks(
    m: &ChartedManifold,
    f: &MetricSextet,
    chart: usize,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let g = (m.metric[chart])(x);
    let gu = &g * u;
    let t = (u.transpose() * &gu)[(0, 0)];
    let s = f.eval(t)?;
    let outer = &gu * gu.transpose();
    let hh = &g * (s.a1 + s.a3) + &outer * (s.b1 + s.b3);
    let hv = &g * s.a2 + &outer * s.b2;
    let vv = &g * s.a1 + &outer * s.b1;
    Ok((hh, hv, vv))
}

pub(crate) fn g_matrix_raw(
    m: &ChartedManifold,
    f: &MetricSextet,
    chart: usize,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = m.dim;
    let (hh, hv, vv) = g_frame_blocks(m, f, chart, x, u)?;
    let w = w_matrix(m, chart, x, u);
    // raw = L . hv with L = [[I, 0], [-W, I]]; G_raw = L^{-T} G_frame L^{-1}
    // and L^{-1} = [[I, 0], [W, I]], so
    //   G_raw = [[hh + W^T hv^T + hv W + W^T vv W,  hv + W^T vv], [hv^T + vv W, vv]]
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    let top_left = &hh + w.transpose() * hv.transpose() + &hv * &w + w.transpose() * &vv * &w;
    let top_right = &hv + w.transpose() * &vv;
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = top_left[(i, j)];
            g[(i, n + j)] = top_right[(i, j)];
            g[(n + i, j)] = top_right[(j, i)];
            g[(n + i, n + j)] = vv[(i, j)];
        }
    }
    Ok(g)
}

/// G at a TMPoint in the raw induced coordinates.
pub fn g_matrix(m: &ChartedManifold, f: &MetricSextet, q: &TMPoint) -> Result<DMatrix<f64>> {
    let base = m.validate_point(&q.base)?;
    g_matrix_raw(m, f, base.chart, &base.coords, &q.fiber)
}

/// G applied to two h/v-split vectors at q.
pub fn g_inner(
    m: &ChartedManifold,
    f: &MetricSextet,
    q: &TMPoint,
    a: &TMVector,
    b: &TMVector,
) -> Result<f64> {
    let base = m.validate_point(&q.base)?;
    let (hh, hv, vv) = g_frame_blocks(m, f, base.chart, &base.coords, &q.fiber)?;
    let s = (a.hor.transpose() * &hh * &b.hor)[(0, 0)]
        + (a.hor.transpose() * &hv * &b.ver)[(0, 0)]
        + (b.hor.transpose() * &hv * &a.ver)[(0, 0)]
        + (a.ver.transpose() * &vv * &b.ver)[(0, 0)];
    Ok(s)
}

pub fn g_norm(m: &ChartedManifold, f: &MetricSextet, q: &TMPoint, a: &TMVector) -> Result<f64> {
    Ok(g_inner(m, f, q, a, a)?.max(0.0).sqrt())
}

struct CombInputs<'a> {
    g: &'a DMatrix<f64>,
    r: &'a CurvatureArray,
    u: &'a DVector<f64>,
    tab: &'a CoefficientTable,
}

impl CombInputs<'_> {
    fn dot(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * self.g * b)[(0, 0)]
    }

    /// A(u; X, Y) = A1 [R(X,u)Y + R(Y,u)X] + A2 [g(Y,u)X + g(X,u)Y]
    ///            + A3 g(R(X,u)Y, u) u + A4 g(X,Y) u + A5 g(X,u) g(Y,u) u
    fn comb_a(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let a = &self.tab.a;
        let rxuy = self.r.apply(x, self.u, y);
        let ryux = self.r.apply(y, self.u, x);
        let gxu = self.dot(x, self.u);
        let gyu = self.dot(y, self.u);
        (rxuy.clone() + ryux) * a[0]
            + (x * gyu + y * gxu) * a[1]
            + self.u * (a[2] * self.dot(&rxuy, self.u) + a[3] * self.dot(x, y) + a[4] * gxu * gyu)
    }

    /// B(u; X, Y) = B1 R(X,u)Y + B2 R(X,Y)u + B3 [g(Y,u)X + g(X,u)Y]
    ///            + B4 g(R(X,u)Y, u) u + B5 g(X,Y) u + B6 g(X,u) g(Y,u) u
    fn comb_b(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let b = &self.tab.b;
        let rxuy = self.r.apply(x, self.u, y);
        let rxyu = self.r.apply(x, y, self.u);
        let gxu = self.dot(x, self.u);
        let gyu = self.dot(y, self.u);
        rxuy.clone() * b[0]
            + rxyu * b[1]
            + (x * gyu + y * gxu) * b[2]
            + self.u * (b[3] * self.dot(&rxuy, self.u) + b[4] * self.dot(x, y) + b[5] * gxu * gyu)
    }

    /// C(u; X, Y) = C1 R(Y,u)X + C2 g(X,u)Y + C3 g(Y,u)X
    ///            + C4 g(R(X,u)Y, u) u + C5 g(X,Y) u + C6 g(X,u) g(Y,u) u
    /// and its D-twin.
    fn comb_cd(&self, coeff: &[f64; 6], x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let ryux = self.r.apply(y, self.u, x);
        let rxuy = self.r.apply(x, self.u, y);
        let gxu = self.dot(x, self.u);
        let gyu = self.dot(y, self.u);
        ryux * coeff[0]
            + y * (coeff[1] * gxu)
            + x * (coeff[2] * gyu)
            + self.u
                * (coeff[3] * self.dot(&rxuy, self.u)
                    + coeff[4] * self.dot(x, y)
                    + coeff[5] * gxu * gyu)
    }

    /// E(u; X, Y) = E1 [g(Y,u)X + g(X,u)Y] + E2 g(X,Y) u + E3 g(X,u) g(Y,u) u
    /// and its F-twin.
    fn comb_ef(&self, coeff: &[f64; 3], x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let gxu = self.dot(x, self.u);
        let gyu = self.dot(y, self.u);
        (x * gyu + y * gxu) * coeff[0]
            + self.u * (coeff[1] * self.dot(x, y) + coeff[2] * gxu * gyu)
    }
}

/// The closed-form lifted connection: evaluates the matching case of the
/// four-case characterization
///   (i)   nb_{X^h} Y^h = (nabla_X Y)^h + h{A(u;X,Y)} + v{B(u;X,Y)}
///   (ii)  nb_{X^h} Y^v = (nabla_X Y)^v + h{C(u;X,Y)} + v{D(u;X,Y)}
///   (iii) nb_{X^v} Y^h = h{C(u;Y,X)} + v{D(u;Y,X)}
///   (iv)  nb_{X^v} Y^v = h{E(u;X,Y)} + v{F(u;X,Y)}
/// at q, with X a vector and Y a field (its value is used in the tensorial
/// terms; its covariant derivative only in cases (i)-(ii)).
pub fn nabla_bar(
    m: &ChartedManifold,
    f: &MetricSextet,
    q: &TMPoint,
    kind_x: Lift,
    x: &DVector<f64>,
    kind_y: Lift,
    y_field: &VectorFieldDescriptor,
) -> Result<TMVector> {
    let base = m.validate_point(&q.base)?;
    let g = (m.metric[base.chart])(&base.coords);
    let r = m.curvature(&base)?;
    let u = &q.fiber;
    let t = (u.transpose() * &g * u)[(0, 0)];
    let tab = coefficient_table(f, t)?;
    let inputs = CombInputs { g: &g, r: &r, u, tab: &tab };
    let y = y_field.comps_at(m, &base)?;

    let out = match (kind_x, kind_y) {
        (Lift::Horizontal, Lift::Horizontal) => {
            let nab = covariant_derivative(m, y_field, &TangentVector::new(base, x.clone()))?;
            TMVector { hor: nab.comps + inputs.comb_a(x, &y), ver: inputs.comb_b(x, &y) }
        }
        (Lift::Horizontal, Lift::Vertical) => {
            let nab = covariant_derivative(m, y_field, &TangentVector::new(base, x.clone()))?;
            TMVector {
                hor: inputs.comb_cd(&tab.c, x, &y),
                ver: nab.comps + inputs.comb_cd(&tab.d, x, &y),
            }
        }
        (Lift::Vertical, Lift::Horizontal) => TMVector {
            hor: inputs.comb_cd(&tab.c, &y, x),
            ver: inputs.comb_cd(&tab.d, &y, x),
        },
        (Lift::Vertical, Lift::Vertical) => TMVector {
            hor: inputs.comb_ef(&tab.e, x, &y),
            ver: inputs.comb_ef(&tab.f, x, &y),
        },
    };
    Ok(out)
}

fn tm_fd_step(axis: usize, n: usize, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
    if axis < n {
        fd::step(x.norm())
    } else {
        1e-4 * (1.0 + u.norm())
    }
}

/// Brute-force Levi-Civita symbols of the GMatrix field by central
/// differences in the 2n induced coordinates; the artifact's independent
/// check of the closed-form connection.
pub fn oracle_christoffel_tm(
    m: &ChartedManifold,
    f: &MetricSextet,
    q: &TMPoint,
) -> Result<Vec<DMatrix<f64>>> {
    let base = m.validate_point(&q.base)?;
    let n = m.dim;
    let nn = 2 * n;
    let chart = base.chart;
    let mut z0 = DVector::zeros(nn);
    for i in 0..n {
        z0[i] = base.coords[i];
        z0[n + i] = q.fiber[i];
    }
    let gfun = |z: &DVector<f64>| -> DVector<f64> {
        let x = DVector::from_iterator(n, z.iter().take(n).cloned());
        let u = DVector::from_iterator(n, z.iter().skip(n).cloned());
        let g = g_matrix_raw(m, f, chart, &x, &u).expect("G defined near q");
        DVector::from_iterator(nn * nn, g.iter().cloned())
    };

    let mut dg = Vec::with_capacity(nn);
    for axis in 0..nn {
        let h = tm_fd_step(axis, n, &base.coords, &q.fiber);
        let flat = fd::partial_vec(gfun, &z0, axis, h);
        dg.push(DMatrix::from_iterator(nn, nn, flat.iter().cloned()));
    }

    let g0 = g_matrix_raw(m, f, chart, &base.coords, &q.fiber)?;
    let ginv = g0.try_inverse().ok_or_else(|| GeometryError::SingularMetric {
        coords: z0.iter().cloned().collect(),
    })?;
    let mut gamma = vec![DMatrix::zeros(nn, nn); nn];
    for k in 0..nn {
        for i in 0..nn {
            for j in i..nn {
                let mut s = 0.0;
                for l in 0..nn {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                let v = 0.5 * s;
                gamma[k][(i, j)] = v;
                gamma[k][(j, i)] = v;
            }
        }
    }
    Ok(gamma)
}

/// Raw components of the lifted coordinate field d_b^h or d_b^v as a function
/// of raw TM coordinates.
fn lifted_coord_field(
    m: &ChartedManifold,
    chart: usize,
    kind: Lift,
    b: usize,
    z: &DVector<f64>,
) -> DVector<f64> {
    let n = m.dim;
    let mut raw = DVector::zeros(2 * n);
    match kind {
        Lift::Vertical => raw[n + b] = 1.0,
        Lift::Horizontal => {
            raw[b] = 1.0;
            let x = DVector::from_iterator(n, z.iter().take(n).cloned());
            let u = DVector::from_iterator(n, z.iter().skip(n).cloned());
            let w = w_matrix(m, chart, &x, &u);
            for k in 0..n {
                raw[n + k] = -w[(k, b)];
            }
        }
    }
    raw
}

/// nb of one lifted coordinate field along another, computed entirely from
/// the FD oracle: directional derivative of the raw field plus the oracle
/// Christoffel contraction. Returned in the h/v splitting at q.
pub fn oracle_nabla_bar(
    m: &ChartedManifold,
    _f: &MetricSextet,
    q: &TMPoint,
    kind_x: Lift,
    a: usize,
    kind_y: Lift,
    b: usize,
    gamma_tm: &[DMatrix<f64>],
) -> Result<TMVector> {
    let base = m.validate_point(&q.base)?;
    let n = m.dim;
    let nn = 2 * n;
    let chart = base.chart;
    let mut z0 = DVector::zeros(nn);
    for i in 0..n {
        z0[i] = base.coords[i];
        z0[n + i] = q.fiber[i];
    }
    let xraw = lifted_coord_field(m, chart, kind_x, a, &z0);
    let yraw = lifted_coord_field(m, chart, kind_y, b, &z0);

    let mut out = DVector::zeros(nn);
    // X^I d_I Y^K
    for axis in 0..nn {
        if xraw[axis] == 0.0 {
            continue;
        }
        let h = tm_fd_step(axis, n, &base.coords, &q.fiber);
        let dy = fd::partial_vec(|z| lifted_coord_field(m, chart, kind_y, b, z), &z0, axis, h);
        out += dy * xraw[axis];
    }
    // Gamma~^K_{IJ} X^I Y^J
    for k in 0..nn {
        out[k] += (xraw.transpose() * &gamma_tm[k] * &yraw)[(0, 0)];
    }

    let w = w_matrix(m, chart, &base.coords, &q.fiber);
    Ok(raw_to_hv(&w, &out))
}

/// Maximum relative disagreement between the closed-form connection and the
/// FD oracle over all 4n^2 lifted coordinate-field pairs at q.
pub fn oracle_max_error(m: &ChartedManifold, f: &MetricSextet, q: &TMPoint) -> Result<f64> {
    let n = m.dim;
    let gamma_tm = oracle_christoffel_tm(m, f, q)?;
    let mut max_err: f64 = 0.0;
    for kind_x in [Lift::Horizontal, Lift::Vertical] {
        for a in 0..n {
            let mut x = DVector::zeros(n);
            x[a] = 1.0;
            for kind_y in [Lift::Horizontal, Lift::Vertical] {
                for b in 0..n {
                    let y_field = VectorFieldDescriptor::parallel(
                        (0..n).map(|i| if i == b { 1.0 } else { 0.0 }).collect(),
                        m.charts.len(),
                    );
                    let closed = nabla_bar(m, f, q, kind_x, &x, kind_y, &y_field)?;
                    let oracle = oracle_nabla_bar(m, f, q, kind_x, a, kind_y, b, &gamma_tm)?;
                    let scale = 1.0f64
                        .max(closed.hor.amax())
                        .max(closed.ver.amax());
                    let err = ((&closed.hor - &oracle.hor).amax())
                        .max((&closed.ver - &oracle.ver).amax())
                        / scale;
                    max_err = max_err.max(err);
                }
            }
        }
    }
    Ok(max_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{flat_torus, sphere};
    use crate::sextet::{
        default_oproiu, preset_cheeger_gromoll, preset_example_a, preset_sasaki,
    };

    fn torus_q() -> TMPoint {
        TMPoint::new(Point::new(0, vec![1.0, 2.0]), DVector::from_vec(vec![0.7, -0.4]))
    }

    #[test]
    fn sasaki_on_torus_is_block_identity() {
        let m = flat_torus(2, None);
        let g = g_matrix(&m, &preset_sasaki(), &torus_q()).unwrap();
        assert!((g - DMatrix::<f64>::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn cg_hv_block_vanishes() {
        let m = flat_torus(2, None);
        let g = g_matrix(&m, &preset_cheeger_gromoll(), &torus_q()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(g[(i, 2 + j)].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn g_matrix_symmetric_positive_definite() {
        let m = sphere(2, 1.0);
        let q = TMPoint::new(Point::new(0, vec![0.3, -0.2]), DVector::from_vec(vec![0.8, 0.5]));
        for f in [preset_sasaki(), preset_cheeger_gromoll(), default_oproiu()] {
            let g = g_matrix(&m, &f, &q).unwrap();
            assert!((g.clone() - g.transpose()).amax() < 1e-12);
            assert!(g.symmetric_eigenvalues().iter().all(|&l| l > 0.0), "{}", f.name);
        }
    }

    #[test]
    fn frame_round_trip_is_exact() {
        let m = sphere(2, 1.0);
        let q = TMPoint::new(Point::new(0, vec![0.4, 0.6]), DVector::from_vec(vec![-0.9, 0.3]));
        let w = w_matrix(&m, 0, &q.base.coords, &q.fiber);
        let v = TMVector {
            hor: DVector::from_vec(vec![0.3, -1.2]),
            ver: DVector::from_vec(vec![0.8, 0.1]),
        };
        let raw = hv_to_raw(&w, &v);
        let back = raw_to_hv(&w, &raw);
        assert!((back.hor - &v.hor).amax() < 1e-12);
        assert!((back.ver - &v.ver).amax() < 1e-12);
        // frame matrix is invertible and consistent with hv_to_raw
        let l = hv_frame(&m, &q).unwrap();
        let mut hv = DVector::zeros(4);
        for i in 0..2 {
            hv[i] = v.hor[i];
            hv[2 + i] = v.ver[i];
        }
        assert!((l * hv - raw).amax() < 1e-12);
    }

    #[test]
    fn g_inner_matches_raw_matrix() {
        let m = sphere(2, 1.0);
        let f = preset_cheeger_gromoll();
        let q = TMPoint::new(Point::new(0, vec![0.2, 0.5]), DVector::from_vec(vec![0.6, -0.8]));
        let a = TMVector {
            hor: DVector::from_vec(vec![1.0, 0.3]),
            ver: DVector::from_vec(vec![-0.4, 0.9]),
        };
        let b = TMVector {
            hor: DVector::from_vec(vec![0.2, -0.7]),
            ver: DVector::from_vec(vec![1.1, 0.5]),
        };
        let direct = g_inner(&m, &f, &q, &a, &b).unwrap();
        let g = g_matrix(&m, &f, &q).unwrap();
        let w = w_matrix(&m, 0, &q.base.coords, &q.fiber);
        let via_raw = (hv_to_raw(&w, &a).transpose() * g * hv_to_raw(&w, &b))[(0, 0)];
        assert!((direct - via_raw).abs() < 1e-12);
    }

    #[test]
    fn sasaki_vertical_vertical_vanishes_on_torus() {
        let m = flat_torus(2, None);
        let f = preset_sasaki();
        let q = torus_q();
        let x = DVector::from_vec(vec![1.0, -0.5]);
        let y = VectorFieldDescriptor::parallel(vec![0.3, 0.8], 1);
        let d = nabla_bar(&m, &f, &q, Lift::Vertical, &x, Lift::Vertical, &y).unwrap();
        assert!(d.amax() < 1e-14);
    }

    #[test]
    fn sasaki_horizontal_horizontal_reduces_on_torus() {
        let m = flat_torus(2, None);
        let f = preset_sasaki();
        let q = torus_q();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let y = VectorFieldDescriptor::parallel(vec![0.0, 1.0], 1);
        let d = nabla_bar(&m, &f, &q, Lift::Horizontal, &x, Lift::Horizontal, &y).unwrap();
        assert!(d.amax() < 1e-14); // (nabla_X Y)^h with nabla_X Y = 0
    }

    #[test]
    fn oracle_zero_on_flat_torus_sasaki() {
        let m = flat_torus(2, None);
        let gamma = oracle_christoffel_tm(&m, &preset_sasaki(), &torus_q()).unwrap();
        for k in 0..4 {
            assert!(gamma[k].amax() < 1e-10);
        }
    }

    #[test]
    fn oracle_matches_closed_form_torus() {
        let m = flat_torus(2, None);
        for f in [preset_sasaki(), preset_cheeger_gromoll(), default_oproiu()] {
            let err = oracle_max_error(&m, &f, &torus_q()).unwrap();
            assert!(err < 1e-5, "{}: err = {err:.3e}", f.name);
        }
    }

    #[test]
    fn oracle_matches_closed_form_sphere() {
        let m = sphere(2, 1.0);
        let q = TMPoint::new(Point::new(0, vec![0.3, -0.2]), DVector::from_vec(vec![0.5, 0.4]));
        for f in [
            preset_sasaki(),
            preset_cheeger_gromoll(),
            default_oproiu(),
            preset_example_a(1.0, 2.0, 1.0, 0.5).unwrap(),
        ] {
            let err = oracle_max_error(&m, &f, &q).unwrap();
            assert!(err < 1e-5, "{}: err = {err:.3e}", f.name);
        }
    }

    #[test]
    fn closed_form_is_torsion_free() {
        // nb_{X~}Y~ - nb_{Y~}X~ = [X~, Y~] for lifted coordinate fields,
        // the bracket evaluated by FD on raw components.
        let m = sphere(2, 1.0);
        let f = preset_cheeger_gromoll();
        let q = TMPoint::new(Point::new(0, vec![0.2, 0.4]), DVector::from_vec(vec![0.7, -0.3]));
        let n = 2;
        let chart = 0;
        let mut z0 = DVector::zeros(2 * n);
        for i in 0..n {
            z0[i] = q.base.coords[i];
            z0[n + i] = q.fiber[i];
        }
        let w = w_matrix(&m, chart, &q.base.coords, &q.fiber);
        let pairs = [
            (Lift::Horizontal, 0, Lift::Horizontal, 1),
            (Lift::Horizontal, 0, Lift::Vertical, 1),
            (Lift::Vertical, 0, Lift::Horizontal, 1),
            (Lift::Vertical, 0, Lift::Vertical, 1),
        ];
        for (kx, a, ky, b) in pairs {
            let e = |idx: usize| {
                let mut v = DVector::zeros(n);
                v[idx] = 1.0;
                v
            };
            let yf = VectorFieldDescriptor::parallel(e(b).iter().cloned().collect(), m.charts.len());
            let xf = VectorFieldDescriptor::parallel(e(a).iter().cloned().collect(), m.charts.len());
            let d1 = nabla_bar(&m, &f, &q, kx, &e(a), ky, &yf).unwrap();
            let d2 = nabla_bar(&m, &f, &q, ky, &e(b), kx, &xf).unwrap();
            // FD bracket of the raw lifted fields
            let mut bracket = DVector::zeros(2 * n);
            let xr = lifted_coord_field(&m, chart, kx, a, &z0);
            let yr = lifted_coord_field(&m, chart, ky, b, &z0);
            for axis in 0..2 * n {
                let h = tm_fd_step(axis, n, &q.base.coords, &q.fiber);
                let dy = fd::partial_vec(|z| lifted_coord_field(&m, chart, ky, b, z), &z0, axis, h);
                let dx = fd::partial_vec(|z| lifted_coord_field(&m, chart, kx, a, z), &z0, axis, h);
                bracket += dy * xr[axis] - dx * yr[axis];
            }
            let diff = hv_to_raw(&w, &d1) - hv_to_raw(&w, &d2) - bracket;
            assert!(diff.amax() < 1e-5, "({kx:?},{a},{ky:?},{b}): {:?}", diff);
        }
    }

    #[test]
    fn closed_form_is_metric_compatible() {
        // X~ . G(Y~, Z~) = G(nb_{X~}Y~, Z~) + G(Y~, nb_{X~}Z~), FD left side.
        let m = sphere(2, 1.0);
        let f = default_oproiu();
        let q = TMPoint::new(Point::new(0, vec![0.1, 0.3]), DVector::from_vec(vec![0.6, 0.5]));
        let n = 2;
        let chart = 0;
        let mut z0 = DVector::zeros(2 * n);
        for i in 0..n {
            z0[i] = q.base.coords[i];
            z0[n + i] = q.fiber[i];
        }
        let e = |idx: usize| {
            let mut v = DVector::zeros(n);
            v[idx] = 1.0;
            v
        };
        for (kx, a, ky, b, kz, c) in [
            (Lift::Horizontal, 0, Lift::Horizontal, 1, Lift::Vertical, 0),
            (Lift::Vertical, 1, Lift::Horizontal, 0, Lift::Vertical, 1),
        ] {
            let scalar = |z: &DVector<f64>| {
                let x = DVector::from_iterator(n, z.iter().take(n).cloned());
                let u = DVector::from_iterator(n, z.iter().skip(n).cloned());
                let g = g_matrix_raw(&m, &f, chart, &x, &u).unwrap();
                let yr = lifted_coord_field(&m, chart, ky, b, z);
                let zr = lifted_coord_field(&m, chart, kz, c, z);
                (yr.transpose() * g * zr)[(0, 0)]
            };
            let xr = lifted_coord_field(&m, chart, kx, a, &z0);
            let mut lhs = 0.0;
            for axis in 0..2 * n {
                if xr[axis] == 0.0 {
                    continue;
                }
                let h = tm_fd_step(axis, n, &q.base.coords, &q.fiber);
                lhs += xr[axis] * fd::partial_scalar(scalar, &z0, axis, h);
            }
            let yf = VectorFieldDescriptor::parallel(e(b).iter().cloned().collect(), m.charts.len());
            let zf = VectorFieldDescriptor::parallel(e(c).iter().cloned().collect(), m.charts.len());
            let dy = nabla_bar(&m, &f, &q, kx, &e(a), ky, &yf).unwrap();
            let dz = nabla_bar(&m, &f, &q, kx, &e(a), kz, &zf).unwrap();
            let w = w_matrix(&m, chart, &q.base.coords, &q.fiber);
            let yv = raw_to_hv(&w, &lifted_coord_field(&m, chart, ky, b, &z0));
            let zv = raw_to_hv(&w, &lifted_coord_field(&m, chart, kz, c, &z0));
            let rhs = g_inner(&m, &f, &q, &dy, &zv).unwrap() + g_inner(&m, &f, &q, &yv, &dz).unwrap();
            assert!((lhs - rhs).abs() < 1e-5, "{kx:?}{a} {ky:?}{b} {kz:?}{c}: {lhs} vs {rhs}");
        }
    }
}
