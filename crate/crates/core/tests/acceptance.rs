//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gnatural::bundle::{g_norm, oracle_max_error, TMPoint, TMVector};
use gnatural::contact::{
    hopf_structure, is_h_contact, kcontact_condition, reeb_identities, verify_contact,
};
use gnatural::expr::Expr;
use gnatural::harmonicity::{
    classify_constant_length, energy, energy_constant_length, energy_density, pullback_metric,
    sample_points, tension_field, QuadratureRule,
};
use gnatural::manifold::{
    field_by_name, flat_torus, manifold_by_name, nabla_grad_r2_v, rough_laplacian, sphere,
    trace_r_term, ChartedManifold, Point, VectorFieldDescriptor,
};
use gnatural::sextet::{
    derived_scalars, is_riemannian, preset_cheeger_gromoll, preset_example_a, preset_example_b,
    preset_exp_family, preset_sasaki, sextet_by_name, MetricSextet,
};

fn criterion(n: usize, name: &str, pass: bool) {
    println!("criterion {n:2} ({name}): {}", if pass { "pass" } else { "FAIL" });
    assert!(pass, "criterion {n} ({name}) failed");
}

/// Random affine-plus-trigonometric field, the same expression on every
/// chart; smooth near any sampled point, which is all the pointwise
/// identities need.
fn random_field(n: usize, n_charts: usize, rng: &mut ChaCha8Rng) -> VectorFieldDescriptor {
    let comps: Vec<Expr> = (0..n)
        .map(|_| {
            let mut e = Expr::Const(rng.gen_range(-1.0..1.0));
            for j in 0..n {
                e = Expr::Add(
                    Box::new(e),
                    Box::new(Expr::Mul(
                        Box::new(Expr::Const(rng.gen_range(-0.5..0.5))),
                        Box::new(Expr::Var(j)),
                    )),
                );
            }
            e = Expr::Add(
                Box::new(e),
                Box::new(Expr::Mul(
                    Box::new(Expr::Const(rng.gen_range(-0.5..0.5))),
                    Box::new(Expr::Sin(Box::new(Expr::Var(rng.gen_range(0..n))))),
                )),
            );
            e
        })
        .collect();
    VectorFieldDescriptor::from_exprs("random", comps, n_charts)
}

/// Random fiber with |u|^2 uniform in [lo, hi] under the metric at p.
fn random_fiber(
    m: &ChartedManifold,
    p: &Point,
    rng: &mut ChaCha8Rng,
    lo: f64,
    hi: f64,
) -> DVector<f64> {
    let g = m.metric_at(p).unwrap();
    let mut u = DVector::from_fn(m.dim, |_, _| rng.gen_range(-1.0..1.0));
    let norm2 = (u.transpose() * &g * &u)[(0, 0)];
    u *= (rng.gen_range(lo..hi) / norm2.max(1e-12)).sqrt();
    u
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let sextets = [
        preset_sasaki(),
        preset_cheeger_gromoll(),
        preset_example_a(1.0, 2.0, 1.0, 0.5).unwrap(),
        preset_exp_family(1.0, 2.0).unwrap(),
    ];
    let bases = ["torus:2", "sphere:2", "sphere:3"];
    let mut max_err: f64 = 0.0;
    for (bi, name) in bases.iter().enumerate() {
        let m = manifold_by_name(name).unwrap();
        let points = sample_points(&m, 10, 1000 + bi as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + bi as u64);
        for f in &sextets {
            for p in &points {
                let u = random_fiber(&m, p, &mut rng, 0.25, 4.0);
                let q = TMPoint::new(p.clone(), u);
                max_err = max_err.max(oracle_max_error(&m, f, &q).unwrap());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("  oracle max relative error {max_err:.3e} in {elapsed:.1}s");
    criterion(1, "closed-form bundle connection vs FD oracle", max_err <= 1e-5 && elapsed <= 60.0);
}

#[test]
fn criterion_02_sasaki_reduction() {
    let m = sphere(2, 1.0);
    let f = preset_sasaki();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points = sample_points(&m, 20, 12);
    let mut max_res: f64 = 0.0;
    for p in &points {
        let v = random_field(2, m.charts.len(), &mut rng);
        let res = tension_field(&m, &f, &v, p).unwrap();
        let tr = trace_r_term(&m, &v, p).unwrap();
        let lap = rough_laplacian(&m, &v, p).unwrap();
        max_res = max_res
            .max((&res.tau_h.comps + &tr.comps).amax())
            .max((&res.tau_v.comps + &lap.comps).amax());
    }
    criterion(2, "Sasaki tension reduces to (-curvature trace, -laplacian)", max_res <= 1e-10);
}

#[test]
fn criterion_03_cheeger_gromoll_displays() {
    let m = flat_torus(2, None);
    let f = preset_cheeger_gromoll();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let points = sample_points(&m, 20, 22);
    let mut max_res: f64 = 0.0;
    for p in &points {
        let v = random_field(2, 1, &mut rng);
        let res = tension_field(&m, &f, &v, p).unwrap();
        let vp = v.comps_at(&m, p).unwrap();
        let r2 = res.diagnostics.r2;
        let nn2 = res.diagnostics.norm_nabla_v_sq;
        let gr2 = res.diagnostics.norm_grad_r2_sq;
        let lap = rough_laplacian(&m, &v, p).unwrap().comps;
        let ngrad = nabla_grad_r2_v(&m, &v, p).unwrap().comps;
        let w = 1.0 + r2;

        // vertical part: (1+r2) lap V + nabla_{grad r2} V
        //   - [(2+r2) |nabla V|^2 + 1/4 |grad r2|^2] V / (1+r2) = -(1+r2) tau_v
        let display = w * &lap + &ngrad - ((2.0 + r2) * nn2 + 0.25 * gr2) / w * &vp;
        max_res = max_res.max((&display + w * &res.tau_v.comps).amax());

        // criticality vector: T(V) = -lap V / (1+r2) - nabla_{grad r2} V / (1+r2)^2
        //   + [ -g(lap V, V) + (2+r2)/(1+r2) |nabla V|^2 - 1/4 |grad r2|^2/(1+r2) ] V / (1+r2)
        let g_lap_v = m.inner(p, &lap, &vp).unwrap();
        let t_cg = -&lap / w - &ngrad / (w * w)
            + (-g_lap_v + (2.0 + r2) / w * nn2 - 0.25 * gr2 / w) / w * &vp;
        max_res = max_res.max((&t_cg - &res.t_of_v.comps).amax());
    }
    criterion(3, "Cheeger-Gromoll vertical tension and criticality displays", max_res <= 1e-8);
}

#[test]
fn criterion_04_parallel_fields_on_t3() {
    let m = flat_torus(3, None);
    let v = VectorFieldDescriptor::parallel(vec![0.6, -0.3, 0.8], 1);
    let rho = 0.6f64 * 0.6 + 0.3 * 0.3 + 0.8 * 0.8;
    let vol = (std::f64::consts::TAU).powi(3);
    let points = sample_points(&m, 50, 31);
    let rule = QuadratureRule::for_manifold(&m).unwrap();
    let mut pass = true;
    for name in ["sasaki", "cg"] {
        let f = sextet_by_name(name).unwrap();
        let mut max_res: f64 = 0.0;
        for p in &points {
            let res = tension_field(&m, &f, &v, p).unwrap();
            let q = TMPoint::new(p.clone(), v.comps_at(&m, p).unwrap());
            let w = TMVector { hor: res.tau_h.comps.clone(), ver: res.tau_v.comps.clone() };
            max_res = max_res.max(g_norm(&m, &f, &q, &w).unwrap());
        }
        let e_quad = energy(&m, &f, &v, &rule).unwrap();
        let e_closed = energy_constant_length(&f, rho, 3, vol, 0.0).unwrap();
        let rel = (e_quad - e_closed).abs() / e_closed.abs();
        pass &= max_res <= 1e-10 && rel <= 1e-6;
        println!("  {name}: tension {max_res:.2e}, energy rel err {rel:.2e}");
    }
    criterion(4, "parallel fields on the flat 3-torus", pass);
}

#[test]
fn criterion_05_hopf_sasaki_negative_result() {
    let m = sphere(3, 1.0);
    let f = preset_sasaki();
    let v = field_by_name(&m, "hopf").unwrap();
    let mut max_h: f64 = 0.0;
    let mut max_v: f64 = 0.0;
    let mut max_t: f64 = 0.0;
    for p in sample_points(&m, 10, 41) {
        let res = tension_field(&m, &f, &v, &p).unwrap();
        let xi = v.comps_at(&m, &p).unwrap();
        max_h = max_h.max(res.tau_h.comps.amax());
        max_v = max_v.max((&res.tau_v.comps + 2.0 * &xi).amax());
        max_t = max_t.max((&res.t_of_v.comps + 2.0 * &xi).amax());
    }
    println!("  tau_h {max_h:.2e}, tau_v + 2xi {max_v:.2e}, T + 2xi {max_t:.2e}");
    criterion(5, "Hopf field under Sasaki: tau = (0, -2 xi)", max_h <= 1e-4 && max_v <= 1e-3 && max_t <= 1e-3);
}

#[test]
fn criterion_06_hopf_example_a_positive_result() {
    let m = sphere(3, 1.0);
    let f = preset_example_a(1.0, 2.0, 1.0, 0.5).unwrap();
    let v = field_by_name(&m, "hopf").unwrap();
    let mut max_res: f64 = 0.0;
    for p in sample_points(&m, 50, 51) {
        let res = tension_field(&m, &f, &v, &p).unwrap();
        let q = TMPoint::new(p.clone(), v.comps_at(&m, &p).unwrap());
        let w = TMVector { hor: res.tau_h.comps.clone(), ver: res.tau_v.comps.clone() };
        max_res = max_res.max(g_norm(&m, &f, &q, &w).unwrap());
    }
    let kc = kcontact_condition(&f, 1).unwrap().abs();
    println!("  tension G-norm {max_res:.2e}, kcontact residual {kc:.2e}");
    criterion(6, "Hopf field harmonic under Example A", max_res <= 1e-4 && kc <= 1e-12);
}

#[test]
fn criterion_07_classification_tags() {
    let mut pass = true;
    for rho in [1.0, 2.5] {
        pass &= classify_constant_length(&preset_sasaki(), rho, 3).unwrap().case.tag() == "ii";
        pass &=
            classify_constant_length(&preset_cheeger_gromoll(), rho, 3).unwrap().case.tag() == "ii";
    }
    let fa = preset_example_a(1.0, 2.0, 1.0, 0.5).unwrap();
    let fb = preset_example_b(1.0, 1.0, 0.5).unwrap();
    for rho in [0.5, 1.0, 3.0] {
        pass &= classify_constant_length(&fa, rho, 3).unwrap().case.tag() == "i";
        pass &= classify_constant_length(&fb, rho, 3).unwrap().case.tag() == "iii";
    }
    criterion(7, "constant-length classification tags", pass);
}

#[test]
fn criterion_08_riemannian_checker() {
    let grid: Vec<f64> = (0..=400).map(|i| 0.025 * i as f64).collect();
    let mut pass = is_riemannian(&preset_cheeger_gromoll(), &grid, 3).unwrap().pass;

    let broken = MetricSextet::from_exprs(
        "alpha1-negative",
        [
            Expr::Const(-1.0),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::Const(0.0),
            Expr::Const(0.0),
        ],
    );
    let rep = is_riemannian(&broken, &grid, 3).unwrap();
    pass &= !rep.pass && rep.entries.iter().all(|e| !e.pass);

    let upper: Vec<f64> = (0..=380).map(|i| 0.5 + 0.025 * i as f64).collect();
    pass &= is_riemannian(&preset_example_a(1.0, 2.0, 1.0, 0.5).unwrap(), &upper, 3).unwrap().pass;
    pass &= is_riemannian(&preset_example_b(1.0, 1.0, 0.5).unwrap(), &upper, 3).unwrap().pass;
    criterion(8, "Riemannian inequality checker", pass);
}

#[test]
fn criterion_09_energy_identities() {
    // density equals half the g-trace of the pullback metric: 500 draws
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut max_res: f64 = 0.0;
    let cases = [("torus:2", "cg"), ("sphere:2", "sasaki"), ("sphere:2", "oproiu"), ("torus:3", "example_a:lambda=1,mu=2,k=1,eps=0.5"), ("sphere:3", "exp_family:k1=1,k2=2")];
    for (i, (mn, fname)) in cases.iter().enumerate() {
        let m = manifold_by_name(mn).unwrap();
        let f = sextet_by_name(fname).unwrap();
        for p in sample_points(&m, 100, 62 + i as u64) {
            let v = random_field(m.dim, m.charts.len(), &mut rng);
            let e = energy_density(&m, &f, &v, &p).unwrap();
            let frame = m.orthonormal_frame(&p).unwrap();
            let mut tr = 0.0;
            for ei in &frame {
                tr += pullback_metric(&m, &f, &v, &p, ei, ei).unwrap();
            }
            max_res = max_res.max((e - 0.5 * tr).abs());
        }
    }
    println!("  density-vs-trace max residual {max_res:.2e} over 500 draws");
    let mut pass = max_res <= 1e-10;

    // constant-length lower bound E >= 1/2 bracket(rho) vol on S^3
    let m = sphere(3, 1.0);
    let vol = 2.0 * std::f64::consts::PI.powi(2);
    let rule = QuadratureRule::with_resolution(&m, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for fname in ["sasaki", "cg", "example_a:lambda=1,mu=2,k=1,eps=0.5"] {
        let f = sextet_by_name(fname).unwrap();
        let bound = 0.5 * derived_scalars(&f, 1.0, 3).unwrap().bracket * vol;
        for _ in 0..20 {
            let mut a: DMatrix<f64> = DMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in 0..i {
                    let c = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = c;
                    a[(j, i)] = -c;
                }
            }
            if (a[(0, 1)] * a[(2, 3)] - a[(0, 2)] * a[(1, 3)] + a[(0, 3)] * a[(1, 2)]).abs() < 0.05
            {
                continue; // nearly singular pencil; unit normalization unstable
            }
            let v = VectorFieldDescriptor::skew_unit(a, 1.0).unwrap();
            let e = energy(&m, &f, &v, &rule).unwrap();
            pass &= e >= bound - 1e-6 * bound.abs();
        }
    }

    // Hopf energy under Sasaki: (5/2) vol(S^3)
    let f = preset_sasaki();
    let v = field_by_name(&m, "hopf").unwrap();
    let rule = QuadratureRule::with_resolution(&m, 12).unwrap();
    let e = energy(&m, &f, &v, &rule).unwrap();
    let expect = 2.5 * vol;
    println!("  Hopf/Sasaki energy {e:.6} vs {expect:.6}");
    pass &= (e - expect).abs() <= 1e-3;
    criterion(9, "energy identities and bounds", pass);
}

#[test]
fn criterion_10_contact_axioms_and_reeb_identities() {
    let s = hopf_structure(1).unwrap();
    let points = sample_points(&s.base, 10, 71);
    let axioms = verify_contact(&s, &points, 1e-4, 1e-4).unwrap();
    let ids = reeb_identities(&s, &points, 1e-4).unwrap();
    let hc = is_h_contact(&s, &points, 1e-5).unwrap();
    let mut max_tr: f64 = 0.0;
    for p in &points {
        max_tr = max_tr.max(trace_r_term(&s.base, &s.xi, p).unwrap().comps.amax());
    }
    println!(
        "  axioms pass {}, identities pass {}, eigenvalue {:.6}, trace term {max_tr:.2e}",
        axioms.pass, ids.pass, hc.eigenvalue
    );
    criterion(
        10,
        "contact axioms and Reeb identities on the Hopf structure",
        axioms.pass && ids.pass && hc.h_contact && (hc.eigenvalue - 2.0).abs() <= 1e-5 && max_tr <= 1e-5,
    );
}

#[test]
fn criterion_11_criticality_couples_to_vertical_tension() {
    // orthogonal-splitting sextet: a2 = b2 = 0, a1, a3 constant,
    // b1 = -b3 = 0.2 exp(-t) with b1' <= 0
    let decay = || {
        Expr::Mul(
            Box::new(Expr::Const(0.2)),
            Box::new(Expr::Exp(Box::new(Expr::Neg(Box::new(Expr::Var(0)))))),
        )
    };
    let f = MetricSextet::from_exprs(
        "orthogonal-splitting-test",
        [
            Expr::Const(1.0),
            Expr::Const(0.0),
            Expr::Const(0.5),
            decay(),
            Expr::Const(0.0),
            Expr::Neg(Box::new(decay())),
        ],
    );
    let m = flat_torus(2, None);
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let mut pass = true;
    for p in sample_points(&m, 20, 82) {
        let v = random_field(2, 1, &mut rng);
        let res = tension_field(&m, &f, &v, &p).unwrap();
        let vp = v.comps_at(&m, &p).unwrap();
        let t = res.diagnostics.r2;
        let s = f.eval(t).unwrap();
        let phi1 = s.a1 + t * s.b1;
        let tau_v = &res.tau_v.comps;
        let t_of_v = &res.t_of_v.comps;
        let norm = |x: &DVector<f64>| m.inner(&p, x, x).unwrap().max(0.0).sqrt();
        // T = a1 tau_v + b1 g(tau_v, V) V pins each norm by the other:
        //   |tau_v| <= (|T| + |b1| |g(T,V)| sqrt(t) / phi1) / a1
        //   |T| <= (a1 + |b1| t) |tau_v|
        let g_t_v = m.inner(&p, t_of_v, &vp).unwrap();
        let upper_tau = (norm(t_of_v) + s.b1.abs() * g_t_v.abs() * t.sqrt() / phi1) / s.a1;
        let upper_t = (s.a1 + s.b1.abs() * t) * norm(tau_v);
        pass &= norm(tau_v) <= upper_tau + 1e-9 && norm(t_of_v) <= upper_t + 1e-9;
    }
    criterion(11, "criticality vector vanishes iff vertical tension does", pass);
}

#[test]
fn criterion_12_deterministic_reports() {
    let exe = env!("CARGO_BIN_EXE_gnatural");
    let dir = std::env::temp_dir();
    let out_a = dir.join("gnatural-accept-a.json");
    let out_b = dir.join("gnatural-accept-b.json");
    for out in [&out_a, &out_b] {
        let status = std::process::Command::new(exe)
            .args(["accept", "--seed", "123", "--threads", "1", "--output"])
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success(), "accept battery failed");
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    let _ = std::fs::remove_file(&out_a);
    let _ = std::fs::remove_file(&out_b);
    criterion(12, "byte-identical reports for a fixed seed", !a.is_empty() && a == b);
}
