//! Energy and tension of the map V: (M, g) -> (TM, G) defined by a vector
//! field, and the harmonicity criteria built on them: the harmonic-map
//! verdict, the constant-length classification, constant-curvature
//! reductions, the two rigidity families, and the vertical criticality
//! vector T(V) with its constant-length and Killing/Einstein specials.

mod quadrature;

pub use quadrature::{gauss_legendre, QuadratureRule};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{g_norm, TMPoint, TMVector};
use crate::error::{GeometryError, Result};
use crate::manifold::{
    covariant_derivative, divergence, grad_r2, nabla_v_v, norm_nabla_v_sq, rough_laplacian,
    sphere_point_from_ambient, trace_r_term, ChartedManifold, Point, TangentVector,
    VectorFieldDescriptor,
};
use crate::sextet::{coefficient_table, derived_scalars, g_on_lifts, Lift, MetricSextet};

/// Scalar ingredients shared by the tension and criticality formulas.
#[derive(Debug, Clone, Copy)]
pub struct TensionDiagnostics {
    pub r2: f64,
    pub div_v: f64,
    pub norm_nabla_v_sq: f64,
    pub g_qv_v: f64,
    pub g_tr_v: f64,
    pub v_of_r2: f64,
    pub norm_grad_r2_sq: f64,
}

/// The tension field of V: (M, g) -> (TM, G) at a point, split into its
/// horizontal and vertical parts, together with the vertical-projection
/// combination T(V) and the scalar diagnostics.
#[derive(Debug, Clone)]
pub struct TensionResult {
    pub tau_h: TangentVector,
    pub tau_v: TangentVector,
    pub t_of_v: TangentVector,
    pub diagnostics: TensionDiagnostics,
}

/// Pullback metric (V*G)(X, Y) = G(X^h + (nabla_X V)^v, Y^h + (nabla_Y V)^v)
/// at p, for chart components X, Y.
pub fn pullback_metric(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    p: &Point,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let p = m.validate_point(p)?;
    let u = v.at(m, &p)?;
    let xv = TangentVector::new(p.clone(), x.clone());
    let yv = TangentVector::new(p.clone(), y.clone());
    let nx = covariant_derivative(m, v, &xv)?;
    let ny = covariant_derivative(m, v, &yv)?;
    Ok(g_on_lifts(m, f, &u, &xv, Lift::Horizontal, &yv, Lift::Horizontal)?
        + g_on_lifts(m, f, &u, &xv, Lift::Horizontal, &ny, Lift::Vertical)?
        + g_on_lifts(m, f, &u, &nx, Lift::Vertical, &yv, Lift::Horizontal)?
        + g_on_lifts(m, f, &u, &nx, Lift::Vertical, &ny, Lift::Vertical)?)
}

/// Energy density e(V) = 1/2 { n(a1+a3)(r2) + (b1+b3)(r2) r2
/// + 2 a2(r2) div V + b2(r2) V(r2) + a1(r2) |nabla V|^2
/// + 1/4 b1(r2) |grad r2|^2 }; equals 1/2 tr_g (V*G) by construction.
/// (The b2 cross term is 2 b2 g(nabla_V V, V) = b2 V(r2); a printed form
/// of this density doubles it, which the trace identity rules out.)
pub fn energy_density(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<f64> {
    let p = m.validate_point(p)?;
    let n = m.dim as f64;
    let vp = v.comps_raw(p.chart, &p.coords)?;
    let t = m.inner(&p, &vp, &vp)?;
    let s = f.eval(t)?;
    let div = divergence(m, v, &p)?;
    let nn2 = norm_nabla_v_sq(m, v, &p)?;
    let grad = grad_r2(m, v, &p)?;
    let gr2 = m.inner(&p, &grad.comps, &grad.comps)?;
    let vr2 = m.inner(&p, &grad.comps, &vp)?;
    Ok(0.5
        * (n * (s.a1 + s.a3)
            + (s.b1 + s.b3) * t
            + 2.0 * s.a2 * div
            + s.b2 * vr2
            + s.a1 * nn2
            + 0.25 * s.b1 * gr2))
}

/// Total energy E(V) over a quadrature rule.
pub fn energy(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    rule: &QuadratureRule,
) -> Result<f64> {
    rule.integrate(|p| energy_density(m, f, v, p))
}

/// Closed form for constant-length fields (|V|^2 = rho):
/// E(V) = 1/2 [(n-1)(a1+a3) + phi1 + phi3](rho) vol
///        + 1/2 a1(rho) * integral of |nabla V|^2.
pub fn energy_constant_length(
    f: &MetricSextet,
    rho: f64,
    n: usize,
    vol: f64,
    integral_nabla_v_sq: f64,
) -> Result<f64> {
    let d = derived_scalars(f, rho, n)?;
    let s = f.eval(rho)?;
    Ok(0.5 * d.bracket * vol + 0.5 * s.a1 * integral_nabla_v_sq)
}

/// Assembles tau_h, tau_v and T(V) from precomputed Ricci and curvature-trace
/// inputs; `tension_field` passes the exact ones, the constant-curvature
/// reduction passes their closed-form substitutes.
fn assemble_tension(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    p: &Point,
    qv: DVector<f64>,
    tr: DVector<f64>,
) -> Result<TensionResult> {
    let n = m.dim as f64;
    let vp = v.comps_raw(p.chart, &p.coords)?;
    let t = m.inner(p, &vp, &vp)?;
    let tab = coefficient_table(f, t)?;
    let s = f.eval(t)?;

    let grad = grad_r2(m, v, p)?;
    let nabla_grad = covariant_derivative(m, v, &grad)?.comps;
    let nvv = nabla_v_v(m, v, p)?.comps;
    let lap = rough_laplacian(m, v, p)?.comps;
    let div = divergence(m, v, p)?;
    let nn2 = norm_nabla_v_sq(m, v, p)?;
    let gr2 = m.inner(p, &grad.comps, &grad.comps)?;
    let vr2 = m.inner(p, &grad.comps, &vp)?;
    let g_qv_v = m.inner(p, &qv, &vp)?;
    let g_tr_v = m.inner(p, &tr, &vp)?;

    let h_scalar = 2.0 * tab.a[1] - tab.a[2] * g_qv_v + n * tab.a[3] + tab.a[4] * t
        + 2.0 * tab.c[3] * g_tr_v
        + 2.0 * tab.c[4] * div
        + tab.c[5] * vr2
        + tab.e[1] * nn2
        + 0.25 * tab.e[2] * gr2;
    let tau_h = -2.0 * tab.a[0] * &qv
        + 2.0 * tab.c[0] * &tr
        + tab.c[2] * &grad.comps
        + tab.e[0] * &nabla_grad
        + 2.0 * tab.c[1] * &nvv
        + h_scalar * &vp;

    let v_scalar = 2.0 * tab.b[2] - tab.b[3] * g_qv_v + n * tab.b[4] + tab.b[5] * t
        + 2.0 * tab.d[3] * g_tr_v
        + 2.0 * tab.d[4] * div
        + tab.d[5] * vr2
        + tab.f[1] * nn2
        + 0.25 * tab.f[2] * gr2;
    let tau_v = -&lap - tab.b[0] * &qv
        + 2.0 * tab.d[0] * &tr
        + tab.d[2] * &grad.comps
        + tab.f[0] * &nabla_grad
        + 2.0 * tab.d[1] * &nvv
        + v_scalar * &vp;

    let t_of_v = s.a2 * &tau_h
        + s.b2 * m.inner(p, &tau_h, &vp)? * &vp
        + s.a1 * &tau_v
        + s.b1 * m.inner(p, &tau_v, &vp)? * &vp;

    Ok(TensionResult {
        tau_h: TangentVector::new(p.clone(), tau_h),
        tau_v: TangentVector::new(p.clone(), tau_v),
        t_of_v: TangentVector::new(p.clone(), t_of_v),
        diagnostics: TensionDiagnostics {
            r2: t,
            div_v: div,
            norm_nabla_v_sq: nn2,
            g_qv_v,
            g_tr_v,
            v_of_r2: vr2,
            norm_grad_r2_sq: gr2,
        },
    })
}

/// The tension field tau(V) = {tau_h}^h + {tau_v}^v at p, with all 29
/// connection coefficients evaluated at r^2 = g(V, V)(p).
pub fn tension_field(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<TensionResult> {
    let p = m.validate_point(p)?;
    let vp = v.comps_raw(p.chart, &p.coords)?;
    let q = m.ricci_operator(&p)?;
    let qv = &q * &vp;
    let tr = trace_r_term(m, v, &p)?.comps;
    assemble_tension(m, f, v, &p, qv, tr)
}

/// Tension on a constant-sectional-curvature base, with the curvature data
/// replaced by its closed forms QV = (n-1) k V and
/// tr[R(nabla_. V, V) .] = -k (div V) V + k nabla_V V. Must agree with
/// `tension_field` whenever the base really has curvature k.
pub fn constant_curvature_conditions(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    p: &Point,
    k: f64,
) -> Result<TensionResult> {
    let p = m.validate_point(p)?;
    let n = m.dim as f64;
    let vp = v.comps_raw(p.chart, &p.coords)?;
    let qv = (n - 1.0) * k * &vp;
    let div = divergence(m, v, &p)?;
    let nvv = nabla_v_v(m, v, &p)?.comps;
    let tr = -k * div * &vp + k * &nvv;
    assemble_tension(m, f, v, &p, qv, tr)
}

/// Harmonic-map verdict over a sample of points: true when the G-norm of
/// tau(V) stays below the tolerance everywhere in the sample.
#[derive(Debug, Clone)]
pub struct HarmonicVerdict {
    pub harmonic: bool,
    pub max_residual: f64,
    pub samples: usize,
}

pub fn is_harmonic_map(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    points: &[Point],
    tol: f64,
) -> Result<HarmonicVerdict> {
    let mut max_residual: f64 = 0.0;
    for p in points {
        let res = tension_field(m, f, v, p)?;
        let q = TMPoint::new(res.tau_h.base.clone(), v.comps_at(m, p)?);
        let w = TMVector { hor: res.tau_h.comps.clone(), ver: res.tau_v.comps.clone() };
        max_residual = max_residual.max(g_norm(m, f, &q, &w)?);
    }
    Ok(HarmonicVerdict { harmonic: max_residual <= tol, max_residual, samples: points.len() })
}

/// Seeded sample of points: uniform on round spheres (via normalized ambient
/// Gaussians), uniform over the chart box otherwise (clamped to [-2, 2] per
/// axis on unbounded charts).
pub fn sample_points(m: &ChartedManifold, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = move |rng: &mut ChaCha8Rng| -> f64 {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u1.ln()).sqrt() * u2.cos()
    };
    if m.name.starts_with("sphere:") {
        let a = 1.0 / m.constant_curvature.expect("sphere presets declare curvature").sqrt();
        return (0..count)
            .map(|_| {
                let mut p = DVector::from_fn(m.dim + 1, |_, _| normal(&mut rng));
                while p.norm() < 1e-6 {
                    p = DVector::from_fn(m.dim + 1, |_, _| normal(&mut rng));
                }
                let p = p.clone() * (a / p.norm());
                sphere_point_from_ambient(&p, a)
            })
            .collect();
    }
    let chart = &m.charts[0];
    (0..count)
        .map(|_| {
            let coords: Vec<f64> = (0..m.dim)
                .map(|i| {
                    let (lo, hi) = if chart.periodic[i].is_some() {
                        (chart.lo[i], chart.hi[i])
                    } else {
                        (chart.lo[i].max(-2.0), chart.hi[i].min(2.0))
                    };
                    rng.gen_range(lo..hi)
                })
                .collect();
            Point::new(0, coords)
        })
        .collect()
}

/// Derivative of the bracket (n-1)(a1+a3) + phi1 + phi3 at rho; its
/// vanishing is exactly the condition for parallel fields of squared length
/// rho to define harmonic maps.
pub fn parallel_condition(f: &MetricSextet, rho: f64, n: usize) -> Result<f64> {
    Ok(derived_scalars(f, rho, n)?.bracket_prime)
}

/// Case tags of the constant-length classification, keyed by which of the
/// two discriminants (1/rho a1 + a1')(rho) and bracket'(rho) vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantLengthCase {
    /// Both vanish: harmonic iff V is a rough-Laplacian eigenvector (plus
    /// the horizontal condition).
    AnyEigenvector,
    /// Only bracket' vanishes: parallel fields are the only harmonic ones.
    ParallelOnly,
    /// Only the a1-discriminant vanishes: no constant-length field of this
    /// length defines a harmonic map.
    NoHarmonicFields,
    /// Neither vanishes: harmonicity pins |nabla V|^2 to a fixed value.
    PinnedNablaNorm,
}

impl ConstantLengthCase {
    pub fn tag(&self) -> &'static str {
        match self {
            ConstantLengthCase::AnyEigenvector => "i",
            ConstantLengthCase::ParallelOnly => "ii",
            ConstantLengthCase::NoHarmonicFields => "iii",
            ConstantLengthCase::PinnedNablaNorm => "iv",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationVerdict {
    pub case: ConstantLengthCase,
    /// (1/rho a1 + a1')(rho).
    pub alpha1_discriminant: f64,
    /// bracket'(rho).
    pub bracket_discriminant: f64,
    /// For the pinned case: the required |nabla V|^2, realizable iff >= 0.
    pub required_nabla_norm_sq: Option<f64>,
    pub realizable: bool,
}

/// Classification of constant-length fields (|V|^2 = rho) for sextets with
/// a2(rho) = b2(rho) = 0 (horizontal and vertical distributions orthogonal);
/// errors out when the orthogonality precondition fails.
pub fn classify_constant_length(
    f: &MetricSextet,
    rho: f64,
    n: usize,
) -> Result<ClassificationVerdict> {
    let s = f.eval(rho)?;
    if s.a2.abs() > 1e-12 || s.b2.abs() > 1e-12 {
        return Err(GeometryError::InvalidParameters(format!(
            "classification needs alpha2(rho) = beta2(rho) = 0; {} has alpha2({rho}) = {}, beta2({rho}) = {}",
            f.name, s.a2, s.b2
        )));
    }
    let d1 = s.a1 / rho + s.a1p;
    let d2 = derived_scalars(f, rho, n)?.bracket_prime;
    let zero = 1e-10;
    let (case, required) = match (d1.abs() <= zero, d2.abs() <= zero) {
        (true, true) => (ConstantLengthCase::AnyEigenvector, None),
        (false, true) => (ConstantLengthCase::ParallelOnly, None),
        (true, false) => (ConstantLengthCase::NoHarmonicFields, None),
        (false, false) => {
            (ConstantLengthCase::PinnedNablaNorm, Some(-rho * d2 / (s.a1 + rho * s.a1p)))
        }
    };
    let realizable = match case {
        ConstantLengthCase::NoHarmonicFields => false,
        ConstantLengthCase::PinnedNablaNorm => required.unwrap() >= 0.0,
        _ => true,
    };
    Ok(ClassificationVerdict {
        case,
        alpha1_discriminant: d1,
        bracket_discriminant: d2,
        required_nabla_norm_sq: required,
        realizable,
    })
}

/// The two sextet families for which harmonic sections are exactly the
/// parallel fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigidityFamily {
    /// a2 = b2 = 0, a1 and a3 positive constants, b1 = -b3 >= 0, b1' <= 0.
    OrthogonalSplitting,
    /// a1, a2 nonzero constants making all h-coefficients proportional to
    /// the v-coefficients: b1 = b2 = 0, b3 > 0, alpha > 0, bracket constant.
    ProportionalCoefficients,
    None,
}

impl RigidityFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            RigidityFamily::OrthogonalSplitting => "orthogonal-splitting",
            RigidityFamily::ProportionalCoefficients => "proportional",
            RigidityFamily::None => "none",
        }
    }
}

/// Membership test over a t-grid in (0, 10], constancy tolerance 1e-10.
pub fn rigidity_family(f: &MetricSextet, n: usize) -> Result<RigidityFamily> {
    let tol = 1e-10;
    let grid: Vec<f64> = (1..=400).map(|i| 0.025 * i as f64).collect();
    let vals: Vec<_> = grid.iter().map(|&t| f.eval(t)).collect::<Result<_>>()?;
    let derived: Vec<_> = grid.iter().map(|&t| derived_scalars(f, t, n)).collect::<Result<_>>()?;

    let constant = |pick: &dyn Fn(usize) -> f64| -> bool {
        let first = pick(0);
        (1..grid.len()).all(|i| (pick(i) - first).abs() <= tol)
    };

    let fam1 = vals.iter().all(|s| s.a2.abs() <= tol && s.b2.abs() <= tol)
        && constant(&|i| vals[i].a1)
        && vals[0].a1 > 0.0
        && constant(&|i| vals[i].a3)
        && vals[0].a3 > -vals[0].a1
        && vals.iter().all(|s| (s.b1 + s.b3).abs() <= tol && s.b1 >= -tol && s.b1p <= tol);
    if fam1 {
        return Ok(RigidityFamily::OrthogonalSplitting);
    }

    let fam2 = constant(&|i| vals[i].a1)
        && vals[0].a1 > 0.0
        && constant(&|i| vals[i].a2)
        && vals[0].a2.abs() > tol
        && derived.iter().all(|d| d.alpha > 0.0)
        && vals.iter().all(|s| s.b1.abs() <= tol && s.b2.abs() <= tol && s.b3 > 0.0)
        && constant(&|i| derived[i].bracket);
    if fam2 {
        return Ok(RigidityFamily::ProportionalCoefficients);
    }
    Ok(RigidityFamily::None)
}

/// The vertical-criticality vector T(V) from its closed form:
/// T(V) = -a1 lap V + (a2' - b2/2) grad r2 + a1' nabla_{grad r2} V - { ... } V.
/// Agrees with the a2/b2/a1/b1-weighted combination of tau_h, tau_v.
pub fn x_harmonic_t(
    m: &ChartedManifold,
    f: &MetricSextet,
    v: &VectorFieldDescriptor,
    p: &Point,
) -> Result<TangentVector> {
    let p = m.validate_point(p)?;
    let vp = v.comps_raw(p.chart, &p.coords)?;
    let t = m.inner(&p, &vp, &vp)?;
    let s = f.eval(t)?;
    let d = derived_scalars(f, t, m.dim)?;
    let tab = coefficient_table(f, t)?;

    let lap = rough_laplacian(m, v, &p)?.comps;
    let grad = grad_r2(m, v, &p)?;
    let nabla_grad = covariant_derivative(m, v, &grad)?.comps;
    let div = divergence(m, v, &p)?;
    let nn2 = norm_nabla_v_sq(m, v, &p)?;
    let gr2 = m.inner(&p, &grad.comps, &grad.comps)?;
    let vr2 = m.inner(&p, &grad.comps, &vp)?;
    let g_lap_v = m.inner(&p, &lap, &vp)?;

    let vr2_coeff = d.phi2 * tab.c[5]
        + d.phi1 * tab.d[5]
        + s.b2 * tab.c[1]
        + s.b1 * tab.d[1]
        + s.b2 * tab.c[2]
        + s.b1 * tab.d[2];
    let gr2_coeff = d.phi2 * tab.e[2] + d.phi1 * tab.f[2] + 2.0 * s.b2 * tab.e[0]
        + 2.0 * s.b1 * tab.f[0];
    let brace = d.bracket_prime
        + (2.0 * s.a2p - s.b2) * div
        + (s.a1p - s.b1) * nn2
        + s.b1 * g_lap_v
        - vr2_coeff * vr2
        - 0.25 * gr2_coeff * gr2;

    let out = -s.a1 * &lap + (s.a2p - s.b2 / 2.0) * &grad.comps + s.a1p * &nabla_grad
        - brace * &vp;
    Ok(TangentVector::new(p, out))
}

/// Constant-length criticality residual:
/// (1/rho a1 + a1')(rho) |nabla V|^2 + (2 a2' - b2)(rho) div V
/// + bracket'(rho). Zero together with Laplacian-collinearity characterizes
/// criticality among constant-length fields.
pub fn x_harmonic_constant_length_residual(
    f: &MetricSextet,
    rho: f64,
    n: usize,
    nabla_v_sq: f64,
    div_v: f64,
) -> Result<f64> {
    let s = f.eval(rho)?;
    let d = derived_scalars(f, rho, n)?;
    Ok((s.a1 / rho + s.a1p) * nabla_v_sq + (2.0 * s.a2p - s.b2) * div_v + d.bracket_prime)
}

/// Residual of the Killing/Einstein coupling
/// (t a1)'(rho) S/n + rho bracket'(rho); with a2(rho) = b2(rho) = 0 and
/// (b1+b3)(rho) = 0 its vanishing makes a constant-length Killing field on
/// an Einstein space harmonic iff tr[R(nabla_. V, V) .] = 0.
pub fn killing_einstein_condition(f: &MetricSextet, rho: f64, s_curv: f64, n: usize) -> Result<f64> {
    let s = f.eval(rho)?;
    let d = derived_scalars(f, rho, n)?;
    Ok((s.a1 + rho * s.a1p) * s_curv / n as f64 + rho * d.bracket_prime)
}

/// Whether the rough Laplacian of V is collinear to V at p, decided by
/// |lap V - (g(lap V, V)/rho) V| <= tol * |lap V|.
pub fn laplacian_collinear_to_v(
    m: &ChartedManifold,
    v: &VectorFieldDescriptor,
    p: &Point,
    tol: f64,
) -> Result<bool> {
    let p = m.validate_point(p)?;
    let lap = rough_laplacian(m, v, &p)?;
    let vp = v.comps_raw(p.chart, &p.coords)?;
    let rho = m.inner(&p, &vp, &vp)?;
    if rho <= 0.0 {
        return Err(GeometryError::InvalidParameters(
            "collinearity test needs a nonvanishing field".into(),
        ));
    }
    let coeff = m.inner(&p, &lap.comps, &vp)? / rho;
    let resid = &lap.comps - coeff * &vp;
    let lap_norm = m.inner(&p, &lap.comps, &lap.comps)?.max(0.0).sqrt();
    let resid_norm = m.inner(&p, &resid, &resid)?.max(0.0).sqrt();
    // a numerically vanishing Laplacian is trivially collinear
    Ok(lap_norm < 1e-9 || resid_norm <= tol * lap_norm)
}
