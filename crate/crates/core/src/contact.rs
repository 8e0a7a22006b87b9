//! Contact metric structures (eta, xi, phi, h) on odd-dimensional bases,
//! the Reeb identities, H-contact detection, the harmonic-map residuals of
//! the Reeb field at t = 1, the K-contact and (kappa, mu) scalar conditions,
//! and the standard Hopf structure on odd round spheres.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::bundle::{g_norm, TMPoint, TMVector};
use crate::error::{GeometryError, Result};
use crate::fd;
use crate::manifold::{
    divergence, nabla_matrix, norm_nabla_v_sq, rough_laplacian, sphere, trace_r_term,
    ChartedManifold, Point, VectorFieldDescriptor,
};
use crate::sextet::{coefficient_table, derived_scalars, MetricSextet};

/// Per-chart (1,1)-tensor field given as a matrix-valued function of chart
/// coordinates: `phi(x)[(k, j)]` is the k-th component of phi(d_j).
pub type PhiFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A contact metric structure (base, xi, phi) on a base of dimension 2m + 1;
/// eta is g(xi, .) and h = 1/2 L_xi phi is computed from the flow of xi.
#[derive(Clone)]
pub struct ContactMetricStructure {
    pub base: ChartedManifold,
    pub xi: VectorFieldDescriptor,
    phi: Vec<PhiFn>,
    /// Half the odd base dimension: dim M = 2m + 1.
    pub m: usize,
}

impl ContactMetricStructure {
    pub fn new(
        base: ChartedManifold,
        xi: VectorFieldDescriptor,
        phi: Vec<PhiFn>,
    ) -> Result<Self> {
        if base.dim % 2 == 0 {
            return Err(GeometryError::EvenDimension(base.dim));
        }
        if phi.len() != base.charts.len() {
            return Err(GeometryError::DimensionMismatch(format!(
                "phi given on {} charts, base {} has {}",
                phi.len(),
                base.name,
                base.charts.len()
            )));
        }
        let m = (base.dim - 1) / 2;
        Ok(ContactMetricStructure { base, xi, phi, m })
    }

    fn phi_raw(&self, chart: usize, x: &DVector<f64>) -> DMatrix<f64> {
        (self.phi[chart])(x)
    }

    /// phi as a matrix at a validated point.
    pub fn phi_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        let p = self.base.validate_point(p)?;
        Ok(self.phi_raw(p.chart, &p.coords))
    }

    /// eta = g(xi, .) as covector components.
    pub fn eta_at(&self, p: &Point) -> Result<DVector<f64>> {
        let p = self.base.validate_point(p)?;
        let g = self.base.metric_at(&p)?;
        let xi = self.xi.comps_raw(p.chart, &p.coords)?;
        Ok(g * xi)
    }

    /// Pullback of phi under the first-order flow step x -> x + s xi(x);
    /// the step's Jacobian is exactly I + s Dxi(x).
    fn flow_pullback(&self, chart: usize, x: &DVector<f64>, s: f64) -> Result<DMatrix<f64>> {
        let n = self.base.dim;
        let xi = self.xi.comps_raw(chart, x)?;
        let dxi = self.xi.jacobian_raw(chart, x)?;
        let q = x + s * &xi;
        let j = DMatrix::identity(n, n) + s * dxi;
        let jinv = j.clone().try_inverse().ok_or_else(|| GeometryError::SingularMetric {
            coords: x.iter().cloned().collect(),
        })?;
        Ok(jinv * self.phi_raw(chart, &q) * j)
    }

    /// Lie derivative L_xi phi as the s-derivative of the flow pullback:
    /// central difference of first-order flow steps, with one Richardson
    /// level (the Euler truncation is even in s, so it cancels).
    pub fn lie_derivative_phi(&self, p: &Point) -> Result<DMatrix<f64>> {
        let p = self.base.validate_point(p)?;
        let s = 1e-3 * (1.0 + p.coords.norm());
        let d = |s: f64| -> Result<DMatrix<f64>> {
            Ok((self.flow_pullback(p.chart, &p.coords, s)?
                - self.flow_pullback(p.chart, &p.coords, -s)?)
                / (2.0 * s))
        };
        let d1 = d(s)?;
        let d2 = d(s / 2.0)?;
        Ok((d2 * 4.0 - d1) / 3.0)
    }

    /// h = 1/2 L_xi phi.
    pub fn h_at(&self, p: &Point) -> Result<DMatrix<f64>> {
        Ok(self.lie_derivative_phi(p)? * 0.5)
    }

    /// tr h^2 at p.
    pub fn tr_h_sq_at(&self, p: &Point) -> Result<f64> {
        let h = self.h_at(p)?;
        Ok((&h * &h).trace())
    }
}

/// Max residuals of the contact metric axioms over a sample:
/// eta(xi) = 1, phi xi = 0, eta after phi = 0, phi^2 = -I + xi (x) eta,
/// |xi| = 1, skewness of g(., phi .), and d eta = g(., phi .) with
/// d eta(X, Y) = 1/2 (X eta(Y) - Y eta(X) - eta([X, Y])).
#[derive(Debug, Clone)]
pub struct ContactAxiomReport {
    pub eta_xi: f64,
    pub phi_xi: f64,
    pub eta_phi: f64,
    pub phi_sq: f64,
    pub unit_xi: f64,
    pub skew: f64,
    pub deta: f64,
    pub pass: bool,
    pub samples: usize,
}

/// Checks the structure axioms at the sampled points. Algebraic identities
/// use `algebraic_tol` (default caller value 1e-8), the finite-differenced
/// d eta identity uses `differential_tol` (default caller value 1e-6).
pub fn verify_contact(
    s: &ContactMetricStructure,
    points: &[Point],
    algebraic_tol: f64,
    differential_tol: f64,
) -> Result<ContactAxiomReport> {
    let n = s.base.dim;
    let mut rep = ContactAxiomReport {
        eta_xi: 0.0,
        phi_xi: 0.0,
        eta_phi: 0.0,
        phi_sq: 0.0,
        unit_xi: 0.0,
        skew: 0.0,
        deta: 0.0,
        pass: false,
        samples: points.len(),
    };
    for p in points {
        let p = s.base.validate_point(p)?;
        let g = s.base.metric_at(&p)?;
        let xi = s.xi.comps_raw(p.chart, &p.coords)?;
        let phi = s.phi_raw(p.chart, &p.coords);
        let eta = &g * &xi;

        rep.eta_xi = rep.eta_xi.max((eta.dot(&xi) - 1.0).abs());
        rep.phi_xi = rep.phi_xi.max((&phi * &xi).amax());
        rep.eta_phi = rep.eta_phi.max((phi.transpose() * &eta).amax());
        let phi_sq = &phi * &phi + DMatrix::identity(n, n) - &xi * eta.transpose();
        rep.phi_sq = rep.phi_sq.max(phi_sq.amax());
        rep.unit_xi = rep.unit_xi.max((xi.dot(&(&g * &xi)) - 1.0).abs());
        let gphi = &g * &phi;
        rep.skew = rep.skew.max((&gphi + gphi.transpose()).amax());

        // d eta(d_i, d_j) = 1/2 (d_i eta_j - d_j eta_i) against g(d_i, phi d_j)
        let chart = p.chart;
        let h = fd::step(p.coords.norm());
        let eta_fn = |x: &DVector<f64>| -> DVector<f64> {
            let g = (s.base.metric[chart])(x);
            let xi = s.xi.comps_raw(chart, x).expect("field defined near p");
            g * xi
        };
        let mut deta = DMatrix::zeros(n, n);
        for i in 0..n {
            let col = fd::partial_vec(eta_fn, &p.coords, i, h);
            deta.set_column(i, &col);
        }
        // deta[(j, i)] currently holds d_i eta_j
        let deta = 0.5 * (deta.transpose() - deta.clone());
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                err = err.max((deta[(i, j)] - gphi[(i, j)]).abs());
            }
        }
        rep.deta = rep.deta.max(err);
    }
    rep.pass = rep.eta_xi <= algebraic_tol
        && rep.phi_xi <= algebraic_tol
        && rep.eta_phi <= algebraic_tol
        && rep.phi_sq <= algebraic_tol
        && rep.unit_xi <= algebraic_tol
        && rep.skew <= algebraic_tol
        && rep.deta <= differential_tol;
    Ok(rep)
}

/// Max residuals of the Reeb identities over a sample:
/// nabla xi = -phi - phi h, nabla_xi xi = 0, div xi = 0,
/// |nabla xi|^2 = 2m + tr h^2 = 4m - g(Q xi, xi), and
/// lap xi = 4m xi - Q xi (nonnegative rough Laplacian).
#[derive(Debug, Clone)]
pub struct ReebIdentityReport {
    pub nabla_xi: f64,
    pub geodesic: f64,
    pub divergence: f64,
    pub nabla_norm_h: f64,
    pub nabla_norm_ricci: f64,
    pub laplacian: f64,
    pub pass: bool,
    pub samples: usize,
}

pub fn reeb_identities(
    s: &ContactMetricStructure,
    points: &[Point],
    tol: f64,
) -> Result<ReebIdentityReport> {
    let m2 = 2.0 * s.m as f64;
    let mut rep = ReebIdentityReport {
        nabla_xi: 0.0,
        geodesic: 0.0,
        divergence: 0.0,
        nabla_norm_h: 0.0,
        nabla_norm_ricci: 0.0,
        laplacian: 0.0,
        pass: false,
        samples: points.len(),
    };
    for p in points {
        let p = s.base.validate_point(p)?;
        let xi = s.xi.comps_raw(p.chart, &p.coords)?;
        let phi = s.phi_raw(p.chart, &p.coords);
        let h = s.h_at(&p)?;
        let nmat = nabla_matrix(&s.base, &s.xi, &p)?;

        rep.nabla_xi = rep.nabla_xi.max((&nmat + &phi + &phi * &h).amax());
        rep.geodesic = rep.geodesic.max((&nmat * &xi).amax());
        rep.divergence = rep.divergence.max(divergence(&s.base, &s.xi, &p)?.abs());

        let nn2 = norm_nabla_v_sq(&s.base, &s.xi, &p)?;
        let q = s.base.ricci_operator(&p)?;
        let qxi = &q * &xi;
        let g_qxi_xi = s.base.inner(&p, &qxi, &xi)?;
        rep.nabla_norm_h = rep.nabla_norm_h.max((nn2 - (m2 + (&h * &h).trace())).abs());
        rep.nabla_norm_ricci = rep.nabla_norm_ricci.max((nn2 - (2.0 * m2 - g_qxi_xi)).abs());

        let lap = rough_laplacian(&s.base, &s.xi, &p)?;
        rep.laplacian = rep.laplacian.max((&lap.comps - 2.0 * m2 * &xi + &qxi).amax());
    }
    rep.pass = rep.nabla_xi <= tol
        && rep.geodesic <= tol
        && rep.divergence <= tol
        && rep.nabla_norm_h <= tol
        && rep.nabla_norm_ricci <= tol
        && rep.laplacian <= tol;
    Ok(rep)
}

/// H-contact verdict: whether Q xi stays collinear to xi over the sample.
#[derive(Debug, Clone)]
pub struct HContactVerdict {
    pub h_contact: bool,
    /// g(Q xi, xi) at the first sample (the Ricci eigenvalue when collinear).
    pub eigenvalue: f64,
    pub max_residual: f64,
    pub samples: usize,
}

pub fn is_h_contact(
    s: &ContactMetricStructure,
    points: &[Point],
    tol: f64,
) -> Result<HContactVerdict> {
    let mut max_residual: f64 = 0.0;
    let mut eigenvalue = f64::NAN;
    for p in points {
        let p = s.base.validate_point(p)?;
        let xi = s.xi.comps_raw(p.chart, &p.coords)?;
        let q = s.base.ricci_operator(&p)?;
        let qxi = &q * &xi;
        let lam = s.base.inner(&p, &qxi, &xi)?;
        if eigenvalue.is_nan() {
            eigenvalue = lam;
        }
        let resid = &qxi - lam * &xi;
        max_residual = max_residual.max(s.base.inner(&p, &resid, &resid)?.max(0.0).sqrt());
    }
    Ok(HContactVerdict { h_contact: max_residual <= tol, eigenvalue, max_residual, samples: points.len() })
}

/// The three separate conditions reported when alpha2(1) = beta2(1) = 0:
/// Q xi collinear to xi, the scalar condition
/// (tr h^2 + 2m)(a1 + a1')(1) + [2m(a1+a3) + phi1 + phi3]'(1) = 0, and
/// tr[R(nabla_. xi, xi) .] = 0.
#[derive(Debug, Clone)]
pub struct ReebSpecialConditions {
    pub h_contact: bool,
    pub h_contact_residual: f64,
    pub newxiv_residual: f64,
    pub trace_term: f64,
    pub pass: bool,
}

/// Residuals of the two harmonic-map displays for the Reeb field at t = 1.
#[derive(Debug, Clone)]
pub struct ReebHarmonicReport {
    /// Max g-norm of the horizontal display.
    pub horizontal_residual: f64,
    /// Max g-norm of the vertical display.
    pub vertical_residual: f64,
    /// Max G-norm of the combined (horizontal, vertical) residual at (p, xi).
    pub g_residual: f64,
    pub pass: bool,
    pub special: Option<ReebSpecialConditions>,
    pub samples: usize,
}

/// Evaluates, at each sample and with every coefficient at t = 1:
///   h-display: -2 A1 Q xi + 2 C1 T_R + [2 A2 + (2m+1) A4 + A5 + 4m E2
///              + 2 C4 g(T_R, xi) - (A3 + E2) g(Q xi, xi)] xi
///   v-display: (1 - B1) Q xi + 2 D1 T_R + [-4m + 2 B3 + (2m+1) B5 + B6
///              + 4m F2 + 2 D4 g(T_R, xi) - (B4 + F2) g(Q xi, xi)] xi
/// with T_R = tr[R(nabla_. xi, xi) .]; these are the general tau_h, tau_v of
/// xi with the Reeb identities substituted, and both must vanish for xi to
/// define a harmonic map. When alpha2(1) = beta2(1) = 0 the three-condition
/// split (H-contact, the tr h^2 scalar condition, T_R = 0) is also reported.
pub fn reeb_harmonic_map_conditions(
    s: &ContactMetricStructure,
    f: &MetricSextet,
    points: &[Point],
    tol: f64,
) -> Result<ReebHarmonicReport> {
    let tab = coefficient_table(f, 1.0)?;
    let sv = f.eval(1.0)?;
    let m2 = 2.0 * s.m as f64;
    let n = s.base.dim as f64;

    let mut rep = ReebHarmonicReport {
        horizontal_residual: 0.0,
        vertical_residual: 0.0,
        g_residual: 0.0,
        pass: false,
        special: None,
        samples: points.len(),
    };
    let mut max_trace: f64 = 0.0;
    let mut max_newxiv: f64 = 0.0;
    for p in points {
        let p = s.base.validate_point(p)?;
        let xi = s.xi.comps_raw(p.chart, &p.coords)?;
        let q = s.base.ricci_operator(&p)?;
        let qxi = &q * &xi;
        let tr = trace_r_term(&s.base, &s.xi, &p)?.comps;
        let g_qxi_xi = s.base.inner(&p, &qxi, &xi)?;
        let g_tr_xi = s.base.inner(&p, &tr, &xi)?;

        let h_scalar = 2.0 * tab.a[1] + n * tab.a[3] + tab.a[4] + 2.0 * m2 * tab.e[1]
            + 2.0 * tab.c[3] * g_tr_xi
            - (tab.a[2] + tab.e[1]) * g_qxi_xi;
        let h_res = -2.0 * tab.a[0] * &qxi + 2.0 * tab.c[0] * &tr + h_scalar * &xi;

        let v_scalar = -2.0 * m2 + 2.0 * tab.b[2] + n * tab.b[4] + tab.b[5]
            + 2.0 * m2 * tab.f[1]
            + 2.0 * tab.d[3] * g_tr_xi
            - (tab.b[3] + tab.f[1]) * g_qxi_xi;
        let v_res = (1.0 - tab.b[0]) * &qxi + 2.0 * tab.d[0] * &tr + v_scalar * &xi;

        rep.horizontal_residual = rep
            .horizontal_residual
            .max(s.base.inner(&p, &h_res, &h_res)?.max(0.0).sqrt());
        rep.vertical_residual =
            rep.vertical_residual.max(s.base.inner(&p, &v_res, &v_res)?.max(0.0).sqrt());
        let q_tm = TMPoint::new(p.clone(), xi.clone());
        let w = TMVector { hor: h_res, ver: v_res };
        rep.g_residual = rep.g_residual.max(g_norm(&s.base, f, &q_tm, &w)?);

        max_trace = max_trace.max(s.base.inner(&p, &tr, &tr)?.max(0.0).sqrt());
        let tr_h_sq = s.tr_h_sq_at(&p)?;
        max_newxiv = max_newxiv.max(newxiv_condition(f, s.m, tr_h_sq)?.abs());
    }
    rep.pass = rep.g_residual <= tol;

    if sv.a2.abs() <= 1e-12 && sv.b2.abs() <= 1e-12 {
        let hc = is_h_contact(s, points, tol)?;
        let pass = hc.h_contact && max_newxiv <= 1e-8 && max_trace <= tol;
        rep.special = Some(ReebSpecialConditions {
            h_contact: hc.h_contact,
            h_contact_residual: hc.max_residual,
            newxiv_residual: max_newxiv,
            trace_term: max_trace,
            pass,
        });
    }
    Ok(rep)
}

/// (tr h^2 + 2m)(a1 + a1')(1) + [2m(a1+a3) + phi1 + phi3]'(1); with
/// alpha2(1) = beta2(1) = 0, its vanishing together with H-contact and a
/// vanishing curvature trace characterizes xi defining a harmonic map.
pub fn newxiv_condition(f: &MetricSextet, m: usize, tr_h_sq: f64) -> Result<f64> {
    let s = f.eval(1.0)?;
    let d = derived_scalars(f, 1.0, 2 * m + 1)?;
    Ok((tr_h_sq + 2.0 * m as f64) * (s.a1 + s.a1p) + d.bracket_prime)
}

/// K-contact scalar condition (h = 0):
/// 2m(a1 + a1')(1) + [2m(a1+a3) + phi1 + phi3]'(1).
pub fn kcontact_condition(f: &MetricSextet, m: usize) -> Result<f64> {
    newxiv_condition(f, m, 0.0)
}

/// (kappa, mu)-space scalar condition (Q xi = 2m kappa xi):
/// 2m(2 - kappa)(a1 + a1')(1) + [2m(a1+a3) + phi1 + phi3]'(1);
/// reduces to the K-contact condition at kappa = 1.
pub fn kmu_condition(f: &MetricSextet, m: usize, kappa: f64) -> Result<f64> {
    let s = f.eval(1.0)?;
    let d = derived_scalars(f, 1.0, 2 * m + 1)?;
    Ok(2.0 * m as f64 * (2.0 - kappa) * (s.a1 + s.a1p) + d.bracket_prime)
}

/// The standard Sasakian structure on the unit sphere S^{2m+1}: xi is the
/// Hopf field (ambient x -> (-x2, x1, -x4, x3, ...)) and phi = -nabla xi.
pub fn hopf_structure(m: usize) -> Result<ContactMetricStructure> {
    if m == 0 {
        return Err(GeometryError::InvalidParameters(
            "hopf structure needs m >= 1".into(),
        ));
    }
    let dim = 2 * m + 1;
    let base = sphere(dim, 1.0);
    let xi = VectorFieldDescriptor::hopf(dim, 1.0)?;
    let phi: Vec<PhiFn> = (0..base.charts.len())
        .map(|chart| {
            let base = base.clone();
            let xi = xi.clone();
            let f: PhiFn = Arc::new(move |x: &DVector<f64>| {
                -crate::manifold::nabla_matrix_raw(&base, &xi, chart, x)
                    .expect("hopf field defined on the whole chart")
            });
            f
        })
        .collect();
    ContactMetricStructure::new(base, xi, phi)
}

/// Resolves a structure spec string: `hopf:m` (or plain `hopf` for m = 1).
pub fn structure_by_name(spec: &str) -> Result<ContactMetricStructure> {
    match spec.split_once(':') {
        None if spec == "hopf" => hopf_structure(1),
        Some(("hopf", rest)) => {
            let m: usize =
                rest.parse().map_err(|_| GeometryError::UnknownPreset(spec.to_string()))?;
            hopf_structure(m)
        }
        _ => Err(GeometryError::UnknownPreset(spec.to_string())),
    }
}
