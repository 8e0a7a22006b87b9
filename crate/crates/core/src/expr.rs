//! Small expression trees for user-supplied scalar functions.
//!
//! Custom metric sextets are given as polynomial/rational/exponential trees
//! in the variable `t`; custom vector-field components use the same trees
//! over coordinate variables. Evaluation with first derivatives goes through
//! forward-mode dual numbers, so reported derivatives are exact for the tree.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    /// Variable by index; a sextet uses `var(0)` for t.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

/// Value together with its gradient in the active variables.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Pow(a, k) => a.eval(vars).powi(*k),
            Expr::Exp(a) => a.eval(vars).exp(),
            Expr::Sin(a) => a.eval(vars).sin(),
            Expr::Cos(a) => a.eval(vars).cos(),
        }
    }

    /// Value and derivative with respect to variable `wrt`.
    pub fn eval_with_deriv(&self, vars: &[f64], wrt: usize) -> (f64, f64) {
        let d = self.dual(vars, wrt);
        (d.v, d.d)
    }

    fn dual(&self, vars: &[f64], wrt: usize) -> Dual {
        match self {
            Expr::Const(c) => Dual { v: *c, d: 0.0 },
            Expr::Var(i) => Dual {
                v: vars[*i],
                d: if *i == wrt { 1.0 } else { 0.0 },
            },
            Expr::Add(a, b) => {
                let (x, y) = (a.dual(vars, wrt), b.dual(vars, wrt));
                Dual { v: x.v + y.v, d: x.d + y.d }
            }
            Expr::Sub(a, b) => {
                let (x, y) = (a.dual(vars, wrt), b.dual(vars, wrt));
                Dual { v: x.v - y.v, d: x.d - y.d }
            }
            Expr::Mul(a, b) => {
                let (x, y) = (a.dual(vars, wrt), b.dual(vars, wrt));
                Dual { v: x.v * y.v, d: x.d * y.v + x.v * y.d }
            }
            Expr::Div(a, b) => {
                let (x, y) = (a.dual(vars, wrt), b.dual(vars, wrt));
                Dual {
                    v: x.v / y.v,
                    d: (x.d * y.v - x.v * y.d) / (y.v * y.v),
                }
            }
            Expr::Neg(a) => {
                let x = a.dual(vars, wrt);
                Dual { v: -x.v, d: -x.d }
            }
            Expr::Pow(a, k) => {
                let x = a.dual(vars, wrt);
                Dual {
                    v: x.v.powi(*k),
                    d: (*k as f64) * x.v.powi(*k - 1) * x.d,
                }
            }
            Expr::Exp(a) => {
                let x = a.dual(vars, wrt);
                let e = x.v.exp();
                Dual { v: e, d: e * x.d }
            }
            Expr::Sin(a) => {
                let x = a.dual(vars, wrt);
                Dual { v: x.v.sin(), d: x.v.cos() * x.d }
            }
            Expr::Cos(a) => {
                let x = a.dual(vars, wrt);
                Dual { v: x.v.cos(), d: -x.v.sin() * x.d }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Box<Expr> {
        Box::new(Expr::Var(0))
    }

    #[test]
    fn rational_derivative() {
        // f(t) = 1 / (1 + t)
        let f = Expr::Div(Box::new(Expr::Const(1.0)), Box::new(Expr::Add(Box::new(Expr::Const(1.0)), t())));
        let (v, d) = f.eval_with_deriv(&[1.0], 0);
        assert!((v - 0.5).abs() < 1e-15);
        assert!((d + 0.25).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_json() {
        let f = Expr::Mul(Box::new(Expr::Const(2.0)), Box::new(Expr::Exp(Box::new(Expr::Neg(t())))));
        let s = serde_json::to_string(&f).unwrap();
        let g: Expr = serde_json::from_str(&s).unwrap();
        assert_eq!(f.eval(&[0.3]), g.eval(&[0.3]));
    }
}
