//! The six-function data (alpha_i, beta_i) defining a bundle metric G on TM,
//! its derived scalars, the Riemannian-condition checker, and the 29 closed
//! connection coefficients A1..A5, B1..B6, C1..C6, D1..D6, E1..E3, F1..F3.

mod presets;

pub use presets::*;

use std::sync::Arc;

use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::fd;
use crate::manifold::{ChartedManifold, TangentVector};

/// A scalar function of t >= 0 returning (value, first derivative).
pub type Curve = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub struct MetricSextet {
    pub name: String,
    /// Lower end of the declared validity range (0 for every built-in preset;
    /// singular presets are prolonged below their cut rather than truncated).
    pub t_min: f64,
    pub alpha1: Curve,
    pub alpha2: Curve,
    pub alpha3: Curve,
    pub beta1: Curve,
    pub beta2: Curve,
    pub beta3: Curve,
}

/// The six values and six derivatives at one t.
#[derive(Debug, Clone, Copy)]
pub struct SextetValues {
    pub t: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub a1p: f64,
    pub a2p: f64,
    pub a3p: f64,
    pub b1p: f64,
    pub b2p: f64,
    pub b3p: f64,
}

/// phi_i = alpha_i + t beta_i, alpha = a1(a1+a3) - a2^2,
/// phi = phi1(phi1+phi3) - phi2^2, and the bracket
/// (n-1)(a1+a3) + phi1 + phi3 with its derivative.
#[derive(Debug, Clone, Copy)]
pub struct DerivedScalars {
    pub t: f64,
    pub n: usize,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub alpha: f64,
    pub phi: f64,
    pub bracket: f64,
    pub bracket_prime: f64,
}

/// The 29 connection coefficients at one t.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoefficientTable {
    pub t: f64,
    pub a: [f64; 5],
    pub b: [f64; 6],
    pub c: [f64; 6],
    pub d: [f64; 6],
    pub e: [f64; 3],
    pub f: [f64; 3],
}

impl MetricSextet {
    pub fn from_curves(
        name: impl Into<String>,
        alpha1: Curve,
        alpha2: Curve,
        alpha3: Curve,
        beta1: Curve,
        beta2: Curve,
        beta3: Curve,
    ) -> Self {
        MetricSextet {
            name: name.into(),
            t_min: 0.0,
            alpha1,
            alpha2,
            alpha3,
            beta1,
            beta2,
            beta3,
        }
    }

    /// Six expression trees in t (variable index 0), derivatives exact.
    pub fn from_exprs(name: impl Into<String>, exprs: [Expr; 6]) -> Self {
        let curve = |e: Expr| -> Curve { Arc::new(move |t| e.eval_with_deriv(&[t], 0)) };
        let [a1, a2, a3, b1, b2, b3] = exprs;
        Self::from_curves(name, curve(a1), curve(a2), curve(a3), curve(b1), curve(b2), curve(b3))
    }

    pub fn eval(&self, t: f64) -> Result<SextetValues> {
        if t < 0.0 {
            return Err(GeometryError::NegativeT(t));
        }
        if t < self.t_min {
            return Err(GeometryError::SextetOutOfRange {
                name: self.name.clone(),
                t,
                t_min: self.t_min,
            });
        }
        let (a1, a1p) = (self.alpha1)(t);
        let (a2, a2p) = (self.alpha2)(t);
        let (a3, a3p) = (self.alpha3)(t);
        let (b1, b1p) = (self.beta1)(t);
        let (b2, b2p) = (self.beta2)(t);
        let (b3, b3p) = (self.beta3)(t);
        Ok(SextetValues { t, a1, a2, a3, b1, b2, b3, a1p, a2p, a3p, b1p, b2p, b3p })
    }

    /// Checks each evaluator's reported derivative against an FD derivative
    /// of its value over a grid; relative tolerance guards inconsistent
    /// user-supplied curves.
    pub fn check_derivative_consistency(&self, grid: &[f64], rel_tol: f64) -> Result<bool> {
        let curves: [(&str, &Curve); 6] = [
            ("alpha1", &self.alpha1),
            ("alpha2", &self.alpha2),
            ("alpha3", &self.alpha3),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("beta3", &self.beta3),
        ];
        for &t in grid {
            if t < self.t_min {
                continue;
            }
            for (_, c) in curves.iter() {
                let (_, reported) = c(t);
                // keep the FD stencil inside the validity range
                let h = (1e-5 * (1.0 + t)).min(if t > self.t_min { (t - self.t_min) / 2.0 } else { f64::MAX });
                if h <= 0.0 {
                    continue;
                }
                let fdv = fd::deriv_scalar(|s| c(s).0, t, h);
                let scale = 1.0f64.max(reported.abs());
                if (fdv - reported).abs() > rel_tol * scale {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn derived_scalars(f: &MetricSextet, t: f64, n: usize) -> Result<DerivedScalars> {
    let s = f.eval(t)?;
    let phi1 = s.a1 + t * s.b1;
    let phi2 = s.a2 + t * s.b2;
    let phi3 = s.a3 + t * s.b3;
    let alpha = s.a1 * (s.a1 + s.a3) - s.a2 * s.a2;
    let phi = phi1 * (phi1 + phi3) - phi2 * phi2;
    let bracket = (n as f64 - 1.0) * (s.a1 + s.a3) + phi1 + phi3;
    // phi_i' = a_i' + b_i + t b_i'
    let phi1p = s.a1p + s.b1 + t * s.b1p;
    let phi3p = s.a3p + s.b3 + t * s.b3p;
    let bracket_prime = (n as f64 - 1.0) * (s.a1p + s.a3p) + phi1p + phi3p;
    Ok(DerivedScalars { t, n, phi1, phi2, phi3, alpha, phi, bracket, bracket_prime })
}

/// Per-point outcome of the Riemannian inequalities
/// alpha1 > 0, phi1 > 0, alpha > 0, phi > 0 (for n = 1 only the
/// alpha1 and alpha checks apply).
#[derive(Debug, Clone)]
pub struct RiemannianEntry {
    pub t: f64,
    pub alpha1_pos: bool,
    pub phi1_pos: bool,
    pub alpha_pos: bool,
    pub phi_pos: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RiemannianReport {
    pub n: usize,
    pub entries: Vec<RiemannianEntry>,
    pub pass: bool,
}

pub fn is_riemannian(f: &MetricSextet, t_grid: &[f64], n: usize) -> Result<RiemannianReport> {
    let mut entries = Vec::with_capacity(t_grid.len());
    let mut pass = true;
    for &t in t_grid {
        let s = f.eval(t)?;
        let d = derived_scalars(f, t, n)?;
        let alpha1_pos = s.a1 > 0.0;
        let phi1_pos = d.phi1 > 0.0;
        let alpha_pos = d.alpha > 0.0;
        let phi_pos = d.phi > 0.0;
        let point_pass = if n == 1 {
            alpha1_pos && alpha_pos
        } else {
            alpha1_pos && phi1_pos && alpha_pos && phi_pos
        };
        pass &= point_pass;
        entries.push(RiemannianEntry { t, alpha1_pos, phi1_pos, alpha_pos, phi_pos, pass: point_pass });
    }
    Ok(RiemannianReport { n, entries, pass })
}

/// Literal transcription of the 29 closed-form connection coefficients; no
/// algebraic simplification, so the vanishing patterns of the simplest
/// presets double as a transcription audit.
pub fn coefficient_table(f: &MetricSextet, t: f64) -> Result<CoefficientTable> {
    let s = f.eval(t)?;
    let SextetValues { a1, a2, a3, b1, b2, b3, a1p, a2p, a3p, b1p, b2p, b3p, .. } = s;
    let p1 = a1 + t * b1;
    let p2 = a2 + t * b2;
    let p3 = a3 + t * b3;
    let al = a1 * (a1 + a3) - a2 * a2;
    let ph = p1 * (p1 + p3) - p2 * p2;
    if al.abs() < 1e-14 || ph.abs() < 1e-14 {
        return Err(GeometryError::DegenerateSextet { name: f.name.clone(), t, alpha: al, phi: ph });
    }
    let a13 = a1 + a3;
    let a13p = a1p + a3p;
    let b13 = b1 + b3;
    let b13p = b1p + b3p;
    let p13 = p1 + p3;

    let mut table = CoefficientTable { t, ..Default::default() };

    table.a[0] = -a1 * a2 / (2.0 * al);
    table.a[1] = a2 * b13 / (2.0 * al);
    table.a[2] =
        a2 * (a1 * (p1 * b13 - p2 * b2) + a2 * (b1 * a2 - b2 * a1)) / (al * ph);
    table.a[3] = p2 * a13p / ph;
    table.a[4] = (al * p2 * b13p
        + b13 * (a2 * (p2 * b2 - p1 * b13) + a13 * (a1 * b2 - a2 * b1)))
        / (al * ph);

    table.b[0] = a2 * a2 / al;
    table.b[1] = -a1 * a13 / (2.0 * al);
    table.b[2] = -a13 * b13 / (2.0 * al);
    table.b[3] =
        a2 * (a2 * (p2 * b2 - p1 * b13) + a13 * (b2 * a1 - b1 * a2)) / (al * ph);
    table.b[4] = -p13 * a13p / ph;
    table.b[5] = (-al * p13 * b13p
        + b13 * (a13 * (p13 * b1 - p2 * b2) + a2 * (a2 * b13 - a13 * b2)))
        / (al * ph);

    table.c[0] = -a1 * a1 / (2.0 * al);
    // sign flipped relative to the printed closed form: the FD Levi-Civita
    // oracle (and a hand computation on flat bases with block-diagonal G)
    // fixes C2 = +a1 (b1+b3) / (2 alpha)
    table.c[1] = a1 * b13 / (2.0 * al);
    table.c[2] = (a1 * a13p - a2 * (a2p - b2 / 2.0)) / al;
    table.c[3] =
        a1 * (a2 * (a2 * b1 - a1 * b2) + a1 * (p1 * b13 - p2 * b2)) / (2.0 * al * ph);
    table.c[4] = (p1 * b13 + p2 * (2.0 * a2p - b2)) / (2.0 * ph);
    table.c[5] = (al * p1 * b13p
        + (a2 * (a1 * b2 - a2 * b1) + a1 * (p2 * b2 - b13 * p1)) * (a13p + b13 / 2.0)
        + (a2 * (b1 * p13 - b2 * p2) - a1 * (b2 * a13 - a2 * b13)) * (a2p - b2 / 2.0))
        / (al * ph);

    table.d[0] = a1 * a2 / (2.0 * al);
    // sign flipped like C2 (same oracle evidence): D2 = -a2 (b1+b3) / (2 alpha)
    table.d[1] = -a2 * b13 / (2.0 * al);
    table.d[2] = (-a2 * a13p + a13 * (a2p - b2 / 2.0)) / al;
    table.d[3] =
        a1 * (a13 * (a1 * b2 - a2 * b1) + a2 * (p2 * b2 - p1 * b13)) / (2.0 * al * ph);
    table.d[4] = -(p2 * b13 + p13 * (2.0 * a2p - b2)) / (2.0 * ph);
    table.d[5] = (-al * p2 * b13p
        + (a13 * (a2 * b1 - a1 * b2) + a2 * (p1 * b13 - p2 * b2)) * (a13p + b13 / 2.0)
        + (a13 * (b2 * p2 - b1 * p13) + a2 * (b2 * a13 - a2 * b13)) * (a2p - b2 / 2.0))
        / (al * ph);

    table.e[0] = (a1 * (a2p + b2 / 2.0) - a2 * a1p) / al;
    table.e[1] = (p1 * b2 - p2 * (b1 - a1p)) / ph;
    table.e[2] = (al * (2.0 * p1 * b2p - p2 * b1p)
        + 2.0 * a1p * (a1 * (a2 * b13 - b2 * a13) + a2 * (b1 * p13 - b2 * p2))
        + (2.0 * a2p + b2) * (a1 * (p2 * b2 - p1 * b13) + a2 * (a1 * b2 - a2 * b1)))
        / (al * ph);

    table.f[0] = (-a2 * (a2p + b2 / 2.0) + a13 * a1p) / al;
    table.f[1] = (p13 * (b1 - a1p) - p2 * b2) / ph;
    table.f[2] = (al * (p13 * b1p - 2.0 * p2 * b2p)
        + 2.0 * a1p * (a2 * (b2 * a13 - a2 * b13) + a13 * (b2 * p2 - b1 * p13))
        + (2.0 * a2p + b2) * (a2 * (p1 * b13 - p2 * b2) + a13 * (a2 * b1 - a1 * b2)))
        / (al * ph);

    Ok(table)
}

/// Which lift a tangent vector is taken through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lift {
    Horizontal,
    Vertical,
}

/// The bundle metric on lifted vectors at (x, u):
///   G(X^h, Y^h) = (a1+a3)(r2) g(X,Y) + (b1+b3)(r2) g(X,u) g(Y,u)
///   G(X^h, Y^v) = a2(r2) g(X,Y) + b2(r2) g(X,u) g(Y,u)
///   G(X^v, Y^v) = a1(r2) g(X,Y) + b1(r2) g(X,u) g(Y,u)
/// with r2 = g(u, u).
pub fn g_on_lifts(
    m: &ChartedManifold,
    f: &MetricSextet,
    u: &TangentVector,
    x: &TangentVector,
    kind_x: Lift,
    y: &TangentVector,
    kind_y: Lift,
) -> Result<f64> {
    for other in [&x.base, &y.base] {
        if other.chart != u.base.chart || (&other.coords - &u.base.coords).amax() > 1e-9 {
            return Err(GeometryError::BasePointMismatch(format!(
                "lift arguments must share the base point of u in chart {}",
                u.base.chart
            )));
        }
    }
    let g = m.metric_at(&u.base)?;
    let gxy = (x.comps.transpose() * &g * &y.comps)[(0, 0)];
    let gxu = (x.comps.transpose() * &g * &u.comps)[(0, 0)];
    let gyu = (y.comps.transpose() * &g * &u.comps)[(0, 0)];
    let t = (u.comps.transpose() * &g * &u.comps)[(0, 0)];
    let s = f.eval(t)?;
    let (c, d) = match (kind_x, kind_y) {
        (Lift::Horizontal, Lift::Horizontal) => (s.a1 + s.a3, s.b1 + s.b3),
        (Lift::Vertical, Lift::Vertical) => (s.a1, s.b1),
        _ => (s.a2, s.b2),
    };
    Ok(c * gxy + d * gxu * gyu)
}
