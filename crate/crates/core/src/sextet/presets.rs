//! Built-in metric sextets and the string parser for them.

use std::collections::HashMap;
use std::sync::Arc;

use super::{Curve, MetricSextet};
use crate::error::{GeometryError, Result};

pub fn const_curve(c: f64) -> Curve {
    Arc::new(move |_t| (c, 0.0))
}

/// Replaces `f` below `eps` by the cubic a + b t^2 + c t^3 that matches value,
/// first and second derivative at t = eps and has zero derivative at t = 0;
/// keeps 1/t- and 1/t^2-type curves C^2-smooth and positive down to t = 0.
pub fn prolong_below(eps: f64, f: Curve) -> Curve {
    let (v, d) = f(eps);
    // second derivative at the cut from the reported first derivative
    let s = crate::fd::deriv_scalar(|t| f(t).1, eps, eps * 1e-4);
    let c = (s * eps - d) / (3.0 * eps * eps);
    let b = (s - 6.0 * c * eps) / 2.0;
    let a = v - b * eps * eps - c * eps * eps * eps;
    Arc::new(move |t| {
        if t >= eps {
            f(t)
        } else {
            (a + b * t * t + c * t * t * t, 2.0 * b * t + 3.0 * c * t * t)
        }
    })
}

/// alpha1 = 1, all other functions 0 (the classical bundle metric with
/// orthogonal, isometric horizontal/vertical splitting).
pub fn preset_sasaki() -> MetricSextet {
    MetricSextet::from_curves(
        "sasaki",
        const_curve(1.0),
        const_curve(0.0),
        const_curve(0.0),
        const_curve(0.0),
        const_curve(0.0),
        const_curve(0.0),
    )
}

/// alpha1 = beta1 = -beta3 = 1/(1+t), alpha3 = t/(1+t), alpha2 = beta2 = 0.
pub fn preset_cheeger_gromoll() -> MetricSextet {
    let inv: Curve = Arc::new(|t| {
        let s = 1.0 + t;
        (1.0 / s, -1.0 / (s * s))
    });
    let neg_inv: Curve = Arc::new(|t| {
        let s = 1.0 + t;
        (-1.0 / s, 1.0 / (s * s))
    });
    let a3: Curve = Arc::new(|t| {
        let s = 1.0 + t;
        (t / s, 1.0 / (s * s))
    });
    MetricSextet::from_curves(
        "cheeger_gromoll",
        inv.clone(),
        const_curve(0.0),
        a3,
        inv,
        const_curve(0.0),
        neg_inv,
    )
}

/// The two-function family with (alpha1+alpha3)(t) = v(t/2),
/// (beta1+beta3)(t) = w(t/2), alpha1 = 1/v(t/2),
/// beta1 = -w / (v (v + t w)) (arguments t/2), alpha2 = beta2 = 0.
/// `v` and `w` are curves in s = t/2 reporting d/ds.
pub fn preset_oproiu(v: Curve, w: Curve) -> MetricSextet {
    let a1: Curve = {
        let v = v.clone();
        Arc::new(move |t| {
            let (vv, vp) = v(t / 2.0);
            (1.0 / vv, -0.5 * vp / (vv * vv))
        })
    };
    let a3: Curve = {
        let v = v.clone();
        let a1 = a1.clone();
        Arc::new(move |t| {
            let (vv, vp) = v(t / 2.0);
            let (a, ap) = a1(t);
            (vv - a, 0.5 * vp - ap)
        })
    };
    let b1: Curve = {
        let v = v.clone();
        let w = w.clone();
        Arc::new(move |t| {
            let (vv, vp) = v(t / 2.0);
            let (ww, wp) = w(t / 2.0);
            let num = -ww;
            let den = vv * vv + t * vv * ww;
            let dnum = -0.5 * wp;
            let dden = vv * vp + vv * ww + t * 0.5 * (vp * ww + vv * wp);
            ((num / den), (dnum * den - num * dden) / (den * den))
        })
    };
    let b3: Curve = {
        let w = w.clone();
        let b1 = b1.clone();
        Arc::new(move |t| {
            let (ww, wp) = w(t / 2.0);
            let (b, bp) = b1(t);
            (ww - b, 0.5 * wp - bp)
        })
    };
    MetricSextet::from_curves("oproiu", a1, const_curve(0.0), a3, b1, const_curve(0.0), b3)
}

/// Oproiu family with v(s) = 1 + s, w(s) = 1.
pub fn default_oproiu() -> MetricSextet {
    preset_oproiu(Arc::new(|s| (1.0 + s, 1.0)), const_curve(1.0))
}

/// alpha1 = lambda/t (prolonged below eps), alpha1+alpha3 = mu constant,
/// beta1+beta3 = -k alpha1, beta1 = 0, alpha2 = beta2 = 0.
/// Requires lambda > 0 and mu > sup(0, k lambda).
pub fn preset_example_a(lambda: f64, mu: f64, k: f64, eps: f64) -> Result<MetricSextet> {
    if lambda <= 0.0 || mu <= (k * lambda).max(0.0) || eps <= 0.0 {
        return Err(GeometryError::InvalidParameters(format!(
            "example_a needs lambda > 0, mu > sup(0, k*lambda), eps > 0; got lambda={lambda}, mu={mu}, k={k}, eps={eps}"
        )));
    }
    let a1 = prolong_below(
        eps,
        Arc::new(move |t| (lambda / t, -lambda / (t * t))),
    );
    let a3: Curve = {
        let a1 = a1.clone();
        Arc::new(move |t| {
            let (a, ap) = a1(t);
            (mu - a, -ap)
        })
    };
    let b3: Curve = {
        let a1 = a1.clone();
        Arc::new(move |t| {
            let (a, ap) = a1(t);
            (-k * a, -k * ap)
        })
    };
    Ok(MetricSextet::from_curves(
        format!("example_a:lambda={lambda},mu={mu},k={k},eps={eps}"),
        a1,
        const_curve(0.0),
        a3,
        const_curve(0.0),
        const_curve(0.0),
        b3,
    ))
}

/// alpha1 = lambda/t (prolonged below eps), alpha1+alpha3 = 2 lambda,
/// beta1+beta3 = eta/t^2 (prolonged), beta1 = 0, alpha2 = beta2 = 0.
pub fn preset_example_b(lambda: f64, eta: f64, eps: f64) -> Result<MetricSextet> {
    if lambda <= 0.0 || eta <= 0.0 || eps <= 0.0 {
        return Err(GeometryError::InvalidParameters(format!(
            "example_b needs lambda > 0, eta > 0, eps > 0; got lambda={lambda}, eta={eta}, eps={eps}"
        )));
    }
    let mu = 2.0 * lambda;
    let a1 = prolong_below(
        eps,
        Arc::new(move |t| (lambda / t, -lambda / (t * t))),
    );
    let a3: Curve = {
        let a1 = a1.clone();
        Arc::new(move |t| {
            let (a, ap) = a1(t);
            (mu - a, -ap)
        })
    };
    let b3 = prolong_below(
        eps,
        Arc::new(move |t| (eta / (t * t), -2.0 * eta / (t * t * t))),
    );
    Ok(MetricSextet::from_curves(
        format!("example_b:lambda={lambda},eta={eta},eps={eps}"),
        a1,
        const_curve(0.0),
        a3,
        const_curve(0.0),
        const_curve(0.0),
        b3,
    ))
}

/// alpha1 = k1 e^{-t}, alpha3 = k2 - alpha1, all other functions 0; built so
/// (alpha1 + alpha1')(t) = 0 identically and the bracket is constant.
pub fn preset_exp_family(k1: f64, k2: f64) -> Result<MetricSextet> {
    if k1 <= 0.0 || k2 <= 0.0 {
        return Err(GeometryError::InvalidParameters(format!(
            "exp_family needs k1 > 0, k2 > 0; got k1={k1}, k2={k2}"
        )));
    }
    let a1: Curve = Arc::new(move |t| {
        let e = k1 * (-t).exp();
        (e, -e)
    });
    let a3: Curve = Arc::new(move |t| {
        let e = k1 * (-t).exp();
        (k2 - e, e)
    });
    Ok(MetricSextet::from_curves(
        format!("exp_family:k1={k1},k2={k2}"),
        a1,
        const_curve(0.0),
        a3,
        const_curve(0.0),
        const_curve(0.0),
        const_curve(0.0),
    ))
}

fn parse_params(s: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    if s.is_empty() {
        return Ok(out);
    }
    for pair in s.split(',') {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| GeometryError::UnknownPreset(s.to_string()))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| GeometryError::UnknownPreset(s.to_string()))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// Resolves a sextet spec string: `sasaki`, `cheeger_gromoll` (alias `cg`),
/// `oproiu`, `example_a:lambda=1,mu=2,k=1,eps=0.5`,
/// `example_b:lambda=1,eta=1,eps=0.5`, `exp_family:k1=1,k2=2`.
pub fn sextet_by_name(spec: &str) -> Result<MetricSextet> {
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, r),
        None => (spec, ""),
    };
    let params = parse_params(rest)?;
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    match head {
        "sasaki" => Ok(preset_sasaki()),
        "cheeger_gromoll" | "cg" => Ok(preset_cheeger_gromoll()),
        "oproiu" => Ok(default_oproiu()),
        "example_a" => preset_example_a(
            get("lambda", 1.0),
            get("mu", 2.0),
            get("k", 1.0),
            get("eps", 0.5),
        ),
        "example_b" => preset_example_b(get("lambda", 1.0), get("eta", 1.0), get("eps", 0.5)),
        "exp_family" => preset_exp_family(get("k1", 1.0), get("k2", 2.0)),
        _ => Err(GeometryError::UnknownPreset(spec.to_string())),
    }
}
