//! Batch plumbing: JSON scenarios resolved against the preset registries,
//! deterministic JSON reports, CSV sweeps of the scalar discriminants, and a
//! condensed self-check battery.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bundle::oracle_max_error;
use crate::bundle::TMPoint;
use crate::contact::{
    is_h_contact, kcontact_condition, reeb_harmonic_map_conditions, reeb_identities,
    structure_by_name, verify_contact,
};
use crate::error::{GeometryError, Result};
use crate::expr::Expr;
use crate::harmonicity::{
    classify_constant_length, energy, energy_density, is_harmonic_map, pullback_metric,
    rigidity_family, sample_points, tension_field, QuadratureRule,
};
use crate::manifold::{
    field_by_name, manifold_by_name, rough_laplacian, trace_r_term, ChartedManifold,
    VectorFieldDescriptor,
};
use crate::sextet::{derived_scalars, is_riemannian, sextet_by_name, MetricSextet};

/// A batch job: spec strings resolved against the preset registries, the
/// operation to run, and its numeric parameters. Custom expression trees
/// override the corresponding spec string when present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub operation: String,
    pub manifold: Option<String>,
    pub sextet: Option<String>,
    pub field: Option<String>,
    pub structure: Option<String>,
    /// Custom field components as expression trees in the chart coordinates,
    /// applied identically on every chart.
    pub custom_field: Option<Vec<Expr>>,
    /// Custom sextet [alpha1, alpha2, alpha3, beta1, beta2, beta3] as
    /// expression trees in t.
    pub custom_sextet: Option<Vec<Expr>>,
    pub parameters: Parameters,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    /// Squared length for the constant-length classification.
    pub rho: f64,
    /// t-grid for check-metric and sweeps.
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
    /// Quadrature resolution (0 = per-manifold default).
    pub resolution: usize,
    pub kappa: f64,
    /// Base dimension for sextet-only operations.
    pub dim: Option<usize>,
    /// Sweep quantity name.
    pub quantity: Option<String>,
    /// Expected value for energy comparisons.
    pub expected: Option<f64>,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            tolerance: 1e-8,
            samples: 20,
            seed: 0,
            rho: 1.0,
            t_min: 0.0,
            t_max: 10.0,
            steps: 101,
            resolution: 0,
            kappa: 1.0,
            dim: None,
            quantity: None,
            expected: None,
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Deterministic run outcome. Maps are ordered and floats use the shortest
/// round-trip encoding, so serialization is byte-stable for a given seed;
/// wall-clock time is kept out of the serialized form for the same reason.
#[derive(Debug, Serialize)]
pub struct Report {
    pub operation: String,
    pub manifold: Option<String>,
    pub sextet: Option<String>,
    pub field: Option<String>,
    pub structure: Option<String>,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub verdicts: BTreeMap<String, bool>,
    pub residuals: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, Value>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl Report {
    fn new(s: &Scenario) -> Self {
        Report {
            operation: s.operation.clone(),
            manifold: s.manifold.clone(),
            sextet: effective_sextet_name(s),
            field: effective_field_name(s),
            structure: s.structure.clone(),
            seed: s.parameters.seed,
            samples: s.parameters.samples,
            tolerance: s.parameters.tolerance,
            pass: false,
            verdicts: BTreeMap::new(),
            residuals: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn effective_sextet_name(s: &Scenario) -> Option<String> {
    if s.custom_sextet.is_some() {
        Some("custom".into())
    } else {
        s.sextet.clone()
    }
}

fn effective_field_name(s: &Scenario) -> Option<String> {
    if s.custom_field.is_some() {
        Some("custom".into())
    } else {
        s.field.clone()
    }
}

fn need<'a, T>(v: &'a Option<T>, what: &str, op: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| GeometryError::Scenario(format!("operation `{op}` needs a {what}")))
}

fn resolve_manifold(s: &Scenario) -> Result<ChartedManifold> {
    manifold_by_name(need(&s.manifold, "manifold", &s.operation)?)
}

fn resolve_sextet(s: &Scenario) -> Result<MetricSextet> {
    if let Some(exprs) = &s.custom_sextet {
        let arr: [Expr; 6] = exprs.clone().try_into().map_err(|_| {
            GeometryError::Scenario("custom_sextet needs exactly six expressions".into())
        })?;
        Ok(MetricSextet::from_exprs("custom", arr))
    } else {
        sextet_by_name(need(&s.sextet, "sextet", &s.operation)?)
    }
}

fn resolve_field(s: &Scenario, m: &ChartedManifold) -> Result<VectorFieldDescriptor> {
    if let Some(exprs) = &s.custom_field {
        if exprs.len() != m.dim {
            return Err(GeometryError::Scenario(format!(
                "custom_field has {} components on a {}-manifold",
                exprs.len(),
                m.dim
            )));
        }
        Ok(VectorFieldDescriptor::from_exprs("custom", exprs.clone(), m.charts.len()))
    } else {
        field_by_name(m, need(&s.field, "field", &s.operation)?)
    }
}

/// Dimension for sextet-only operations: explicit parameter first, else the
/// manifold's, else 2.
fn base_dim(s: &Scenario) -> usize {
    s.parameters
        .dim
        .or_else(|| s.manifold.as_ref().and_then(|m| manifold_by_name(m).ok()).map(|m| m.dim))
        .unwrap_or(2)
}

fn t_grid(p: &Parameters) -> Vec<f64> {
    let k = p.steps.max(2);
    (0..k).map(|i| p.t_min + (p.t_max - p.t_min) * i as f64 / (k - 1) as f64).collect()
}

/// Runs one scenario and returns its report; the process exit code is the
/// caller's translation of `pass` (0) / failure (nonzero).
pub fn run_scenario(s: &Scenario) -> Result<Report> {
    let start = Instant::now();
    let mut rep = Report::new(s);
    let p = &s.parameters;
    match s.operation.as_str() {
        "check-metric" => {
            let f = resolve_sextet(s)?;
            let n = base_dim(s);
            let grid: Vec<f64> =
                t_grid(p).into_iter().filter(|&t| t >= f.t_min).collect();
            let r = is_riemannian(&f, &grid, n)?;
            let mut margins = [f64::INFINITY; 4];
            for &t in &grid {
                let sv = f.eval(t)?;
                let d = derived_scalars(&f, t, n)?;
                margins[0] = margins[0].min(sv.a1);
                margins[1] = margins[1].min(d.phi1);
                margins[2] = margins[2].min(d.alpha);
                margins[3] = margins[3].min(d.phi);
            }
            rep.residuals.insert("min_alpha1".into(), margins[0]);
            rep.residuals.insert("min_phi1".into(), margins[1]);
            rep.residuals.insert("min_alpha".into(), margins[2]);
            rep.residuals.insert("min_phi".into(), margins[3]);
            rep.verdicts.insert("riemannian".into(), r.pass);
            rep.diagnostics.insert("grid_points".into(), Value::from(grid.len()));
            rep.pass = r.pass;
        }
        "tension" => {
            let m = resolve_manifold(s)?;
            let f = resolve_sextet(s)?;
            let v = resolve_field(s, &m)?;
            let points = sample_points(&m, p.samples, p.seed);
            let verdict = is_harmonic_map(&m, &f, &v, &points, p.tolerance)?;
            let first = tension_field(&m, &f, &v, &points[0])?;
            rep.residuals.insert("max_tension_g_norm".into(), verdict.max_residual);
            rep.diagnostics.insert("r2_at_first_sample".into(), Value::from(first.diagnostics.r2));
            rep.diagnostics
                .insert("div_v_at_first_sample".into(), Value::from(first.diagnostics.div_v));
            rep.diagnostics.insert(
                "norm_nabla_v_sq_at_first_sample".into(),
                Value::from(first.diagnostics.norm_nabla_v_sq),
            );
            rep.verdicts.insert("harmonic_map".into(), verdict.harmonic);
            rep.pass = verdict.harmonic;
        }
        "energy" => {
            let m = resolve_manifold(s)?;
            let f = resolve_sextet(s)?;
            let v = resolve_field(s, &m)?;
            let rule = QuadratureRule::with_resolution(&m, p.resolution)?;
            let total = energy(&m, &f, &v, &rule)?;
            rep.diagnostics.insert("total_energy".into(), Value::from(total));
            rep.diagnostics.insert("quadrature_nodes".into(), Value::from(rule.nodes.len()));
            match p.expected {
                Some(e) => {
                    let err = (total - e).abs() / e.abs().max(1.0);
                    rep.residuals.insert("relative_error".into(), err);
                    let ok = err <= p.tolerance;
                    rep.verdicts.insert("matches_expected".into(), ok);
                    rep.pass = ok;
                }
                None => rep.pass = true,
            }
        }
        "classify" => {
            let f = resolve_sextet(s)?;
            let n = base_dim(s);
            let c = classify_constant_length(&f, p.rho, n)?;
            rep.diagnostics.insert("case".into(), Value::from(c.case.tag()));
            rep.residuals.insert("alpha1_discriminant".into(), c.alpha1_discriminant);
            rep.residuals.insert("bracket_discriminant".into(), c.bracket_discriminant);
            if let Some(r) = c.required_nabla_norm_sq {
                rep.diagnostics.insert("required_nabla_norm_sq".into(), Value::from(r));
            }
            rep.verdicts.insert("realizable".into(), c.realizable);
            let fam = rigidity_family(&f, n)?;
            rep.diagnostics.insert("rigidity_family".into(), Value::from(fam.tag()));
            rep.pass = true;
        }
        "contact" => {
            let st = structure_by_name(need(&s.structure, "structure", &s.operation)?)?;
            let points = sample_points(&st.base, p.samples, p.seed);
            let axioms = verify_contact(&st, &points, p.tolerance, p.tolerance)?;
            let ids = reeb_identities(&st, &points, p.tolerance)?;
            let hc = is_h_contact(&st, &points, p.tolerance)?;
            rep.residuals.insert("axiom_eta_xi".into(), axioms.eta_xi);
            rep.residuals.insert("axiom_phi_sq".into(), axioms.phi_sq);
            rep.residuals.insert("axiom_deta".into(), axioms.deta);
            rep.residuals.insert("reeb_nabla_xi".into(), ids.nabla_xi);
            rep.residuals.insert("reeb_laplacian".into(), ids.laplacian);
            rep.residuals.insert("h_contact_residual".into(), hc.max_residual);
            rep.diagnostics.insert("ricci_eigenvalue".into(), Value::from(hc.eigenvalue));
            rep.verdicts.insert("contact_axioms".into(), axioms.pass);
            rep.verdicts.insert("reeb_identities".into(), ids.pass);
            rep.verdicts.insert("h_contact".into(), hc.h_contact);
            let mut pass = axioms.pass && ids.pass;
            if s.sextet.is_some() || s.custom_sextet.is_some() {
                let f = resolve_sextet(s)?;
                let hm = reeb_harmonic_map_conditions(&st, &f, &points, p.tolerance)?;
                rep.residuals.insert("reeb_tension_g_norm".into(), hm.g_residual);
                rep.residuals
                    .insert("kcontact_condition".into(), kcontact_condition(&f, st.m)?);
                rep.verdicts.insert("reeb_harmonic_map".into(), hm.pass);
                if let Some(sp) = hm.special {
                    rep.residuals.insert("newxiv_condition".into(), sp.newxiv_residual);
                    rep.residuals.insert("curvature_trace".into(), sp.trace_term);
                }
                pass = pass && hm.pass;
            }
            rep.pass = pass;
        }
        "oracle" => {
            let m = resolve_manifold(s)?;
            let f = resolve_sextet(s)?;
            let points = sample_points(&m, p.samples, p.seed);
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(0x9e3779b97f4a7c15));
            let mut max_err: f64 = 0.0;
            for pt in &points {
                let g = m.metric_at(pt)?;
                let mut u = DVector::from_fn(m.dim, |_, _| rng.gen_range(-1.0..1.0));
                let norm2 = (u.transpose() * &g * &u)[(0, 0)];
                let target: f64 = rng.gen_range(0.25..4.0);
                u *= (target / norm2.max(1e-12)).sqrt();
                let q = TMPoint::new(pt.clone(), u);
                max_err = max_err.max(oracle_max_error(&m, &f, &q)?);
            }
            rep.residuals.insert("max_relative_error".into(), max_err);
            rep.pass = max_err <= p.tolerance;
            rep.verdicts.insert("oracle_match".into(), rep.pass);
        }
        "sweep" => {
            let f = resolve_sextet(s)?;
            let quantity = need(&p.quantity, "quantity", &s.operation)?;
            let csv = sweep(quantity, &f, base_dim(s), &t_grid(p))?;
            rep.diagnostics
                .insert("rows".into(), Value::from(csv.lines().count().saturating_sub(1)));
            rep.diagnostics.insert("csv".into(), Value::from(csv));
            rep.pass = true;
        }
        "accept" => {
            rep = acceptance_battery(p.seed)?;
        }
        other => {
            return Err(GeometryError::Scenario(format!("unknown operation `{other}`")));
        }
    }
    rep.runtime = start.elapsed();
    Ok(rep)
}

/// CSV sweep of a named scalar quantity over a t-grid. Quantities:
/// `riemannian` (alias `cond-riem`), `bracket-prime`, `classify`
/// (both constant-length discriminants; needs t > 0), `kcontact`
/// (the K-contact residual as a function of t, m = (dim-1)/2).
pub fn sweep(quantity: &str, f: &MetricSextet, n: usize, grid: &[f64]) -> Result<String> {
    let mut out = String::new();
    match quantity {
        "riemannian" | "cond-riem" => {
            out.push_str("t,alpha1,phi1,alpha,phi,pass\n");
            for &t in grid {
                let s = f.eval(t)?;
                let d = derived_scalars(f, t, n)?;
                let pass = if n == 1 {
                    s.a1 > 0.0 && d.alpha > 0.0
                } else {
                    s.a1 > 0.0 && d.phi1 > 0.0 && d.alpha > 0.0 && d.phi > 0.0
                };
                out.push_str(&format!("{t},{},{},{},{},{pass}\n", s.a1, d.phi1, d.alpha, d.phi));
            }
        }
        "bracket-prime" => {
            out.push_str("t,bracket_prime\n");
            for &t in grid {
                out.push_str(&format!("{t},{}\n", derived_scalars(f, t, n)?.bracket_prime));
            }
        }
        "classify" => {
            out.push_str("t,alpha1_discriminant,bracket_discriminant\n");
            for &t in grid {
                if t <= 0.0 {
                    return Err(GeometryError::Scenario(
                        "classify sweep needs a positive t-grid".into(),
                    ));
                }
                let s = f.eval(t)?;
                let d = derived_scalars(f, t, n)?;
                out.push_str(&format!("{t},{},{}\n", s.a1 / t + s.a1p, d.bracket_prime));
            }
        }
        "kcontact" => {
            if n % 2 == 0 {
                return Err(GeometryError::EvenDimension(n));
            }
            let m2 = (n - 1) as f64;
            out.push_str("t,kcontact_residual\n");
            for &t in grid {
                let s = f.eval(t)?;
                let d = derived_scalars(f, t, n)?;
                out.push_str(&format!("{t},{}\n", m2 * (s.a1 + s.a1p) + d.bracket_prime));
            }
        }
        other => {
            return Err(GeometryError::Scenario(format!("unknown sweep quantity `{other}`")));
        }
    }
    Ok(out)
}

/// Condensed deterministic self-check battery: one named residual per line of
/// the full acceptance story, sized to run in seconds. All randomness comes
/// from the given seed, so two runs produce byte-identical reports.
pub fn acceptance_battery(seed: u64) -> Result<Report> {
    let start = Instant::now();
    let mut rep = Report::new(&Scenario {
        operation: "accept".into(),
        parameters: Parameters { seed, ..Default::default() },
        ..Default::default()
    });

    let check = |rep: &mut Report, name: &str, residual: f64, tol: f64| {
        rep.residuals.insert(name.into(), residual);
        rep.verdicts.insert(name.into(), residual <= tol);
    };

    // closed-form bundle connection against the FD oracle on TM
    {
        let m = manifold_by_name("sphere:2")?;
        let f = sextet_by_name("cg")?;
        let points = sample_points(&m, 2, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let mut max_err: f64 = 0.0;
        for pt in &points {
            let g = m.metric_at(pt)?;
            let mut u = DVector::from_fn(m.dim, |_, _| rng.gen_range(-1.0..1.0));
            let norm2 = (u.transpose() * &g * &u)[(0, 0)];
            u *= (rng.gen_range(0.25..4.0) / norm2.max(1e-12)).sqrt();
            max_err = max_err.max(oracle_max_error(&m, &f, &TMPoint::new(pt.clone(), u))?);
        }
        check(&mut rep, "oracle-cg-s2", max_err, 1e-5);
    }

    // Sasaki tension reduces to (-tr R term, -laplacian)
    {
        let m = manifold_by_name("sphere:2")?;
        let f = sextet_by_name("sasaki")?;
        let v = field_by_name(&m, "rotation:0.7")?;
        let mut max_res: f64 = 0.0;
        for pt in sample_points(&m, 3, seed.wrapping_add(2)) {
            let res = tension_field(&m, &f, &v, &pt)?;
            let tr = trace_r_term(&m, &v, &pt)?;
            let lap = rough_laplacian(&m, &v, &pt)?;
            max_res = max_res
                .max((&res.tau_h.comps + &tr.comps).amax())
                .max((&res.tau_v.comps + &lap.comps).amax());
        }
        check(&mut rep, "sasaki-reduction-s2", max_res, 1e-8);
    }

    // parallel fields on the flat 3-torus are harmonic for Sasaki and CG
    {
        let m = manifold_by_name("torus:3")?;
        let v = field_by_name(&m, "parallel:0.4,-0.2,0.9")?;
        let points = sample_points(&m, 5, seed.wrapping_add(3));
        for name in ["sasaki", "cg"] {
            let f = sextet_by_name(name)?;
            let verdict = is_harmonic_map(&m, &f, &v, &points, 1e-10)?;
            check(
                &mut rep,
                &format!("parallel-t3-{name}"),
                verdict.max_residual,
                1e-10,
            );
        }
    }

    // Hopf field on S^3: tau_v = -2 xi under Sasaki, harmonic under Example A
    {
        let m = manifold_by_name("sphere:3")?;
        let v = field_by_name(&m, "hopf")?;
        let points = sample_points(&m, 3, seed.wrapping_add(4));
        let f = sextet_by_name("sasaki")?;
        let mut max_res: f64 = 0.0;
        for pt in &points {
            let res = tension_field(&m, &f, &v, pt)?;
            let xi = v.comps_at(&m, pt)?;
            max_res = max_res.max((&res.tau_v.comps + 2.0 * xi).amax());
        }
        check(&mut rep, "hopf-sasaki-tauv", max_res, 1e-3);

        let fa = sextet_by_name("example_a:lambda=1,mu=2,k=1,eps=0.5")?;
        let verdict = is_harmonic_map(&m, &fa, &v, &points, 1e-4)?;
        check(&mut rep, "hopf-example-a-harmonic", verdict.max_residual, 1e-4);
        check(&mut rep, "kcontact-example-a", kcontact_condition(&fa, 1)?.abs(), 1e-12);
    }

    // constant-length classification tags
    {
        let tags = [
            ("sasaki", 1.0, "ii"),
            ("cg", 1.0, "ii"),
            ("example_a:lambda=1,mu=2,k=1,eps=0.5", 1.0, "i"),
            ("example_b:lambda=1,eta=1,eps=0.5", 1.0, "iii"),
        ];
        let mut ok = true;
        for (name, rho, tag) in tags {
            let f = sextet_by_name(name)?;
            ok &= classify_constant_length(&f, rho, 3)?.case.tag() == tag;
        }
        rep.verdicts.insert("classification-tags".into(), ok);
        rep.residuals.insert("classification-tags".into(), if ok { 0.0 } else { 1.0 });
    }

    // Riemannian inequalities for CG across [0, 10]
    {
        let f = sextet_by_name("cg")?;
        let grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
        let r = is_riemannian(&f, &grid, 3)?;
        rep.verdicts.insert("riemannian-cg".into(), r.pass);
        rep.residuals.insert("riemannian-cg".into(), if r.pass { 0.0 } else { 1.0 });
    }

    // energy density against the half-trace of the pullback metric
    {
        let m = manifold_by_name("sphere:2")?;
        let f = sextet_by_name("cg")?;
        let v = field_by_name(&m, "rotation:0.8")?;
        let mut max_res: f64 = 0.0;
        for pt in sample_points(&m, 20, seed.wrapping_add(5)) {
            let e = energy_density(&m, &f, &v, &pt)?;
            let frame = m.orthonormal_frame(&pt)?;
            let mut tr = 0.0;
            for ei in &frame {
                tr += pullback_metric(&m, &f, &v, &pt, ei, ei)?;
            }
            max_res = max_res.max((e - 0.5 * tr).abs());
        }
        check(&mut rep, "energy-density-trace", max_res, 1e-10);
    }

    // contact axioms and Reeb identities on the Hopf structure
    {
        let st = structure_by_name("hopf:1")?;
        let points = sample_points(&st.base, 5, seed.wrapping_add(6));
        let axioms = verify_contact(&st, &points, 1e-4, 1e-4)?;
        let ids = reeb_identities(&st, &points, 1e-4)?;
        let hc = is_h_contact(&st, &points, 1e-5)?;
        rep.verdicts.insert("contact-axioms".into(), axioms.pass);
        rep.residuals.insert(
            "contact-axioms".into(),
            axioms.eta_xi.max(axioms.phi_sq).max(axioms.deta),
        );
        rep.verdicts.insert("reeb-identities".into(), ids.pass);
        rep.residuals.insert("reeb-identities".into(), ids.nabla_xi.max(ids.laplacian));
        check(&mut rep, "hopf-ricci-eigenvalue", (hc.eigenvalue - 2.0).abs(), 1e-5);
    }

    rep.pass = rep.verdicts.values().all(|&v| v);
    rep.runtime = start.elapsed();
    Ok(rep)
}
