use std::sync::Arc;

use thiserror::Error;

use super::ast::{BinOp, Constant, Expr, Func};
use super::jet::{integer_exponent, Jet2};
use crate::algebra::MetallicParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("{reason} in `{expr}` (argument {arg})")]
    Domain {
        reason: &'static str,
        expr: String,
        arg: f64,
    },
}

/// Ordered variable bindings. The order fixes the gradient layout of jets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env {
    names: Vec<String>,
    values: Vec<f64>,
}

impl Env {
    pub fn new<S: Into<String>>(bindings: impl IntoIterator<Item = (S, f64)>) -> Env {
        let (names, values) = bindings.into_iter().map(|(n, v)| (n.into(), v)).unzip();
        Env { names, values }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Var(usize),
    Const(Constant),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// An expression with its variables resolved to positions in a fixed
/// coordinate list. Cheap to clone and safe to share across threads.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    node: Arc<Node>,
    names: Arc<[String]>,
}

impl CompiledExpr {
    pub fn new(expr: &Expr, coords: &[String]) -> Result<CompiledExpr, EvalError> {
        Ok(CompiledExpr {
            node: Arc::new(lower(expr, coords)?),
            names: coords.into(),
        })
    }

    pub fn coords(&self) -> &[String] {
        &self.names
    }

    pub fn eval(&self, values: &[f64], params: &MetallicParams) -> Result<f64, EvalError> {
        let cx = Ctx {
            values,
            params,
            names: &self.names,
        };
        cx.scalar(&self.node)
    }

    pub fn eval_jet2(&self, values: &[f64], params: &MetallicParams) -> Result<Jet2, EvalError> {
        let cx = Ctx {
            values,
            params,
            names: &self.names,
        };
        cx.jet(&self.node)
    }
}

fn lower(expr: &Expr, coords: &[String]) -> Result<Node, EvalError> {
    Ok(match expr {
        Expr::Num(v) => Node::Num(*v),
        Expr::Const(c) => Node::Const(*c),
        Expr::Var(name) => Node::Var(
            coords
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?,
        ),
        Expr::Neg(inner) => Node::Neg(Box::new(lower(inner, coords)?)),
        Expr::Call(f, inner) => Node::Call(*f, Box::new(lower(inner, coords)?)),
        Expr::Binary(op, lhs, rhs) => Node::Binary(
            *op,
            Box::new(lower(lhs, coords)?),
            Box::new(lower(rhs, coords)?),
        ),
    })
}

fn raise(node: &Node, names: &[String]) -> Expr {
    match node {
        Node::Num(v) => Expr::Num(*v),
        Node::Const(c) => Expr::Const(*c),
        Node::Var(i) => Expr::Var(names[*i].clone()),
        Node::Neg(inner) => Expr::neg(raise(inner, names)),
        Node::Call(f, inner) => Expr::call(*f, raise(inner, names)),
        Node::Binary(op, l, r) => Expr::binary(*op, raise(l, names), raise(r, names)),
    }
}

fn has_vars(node: &Node) -> bool {
    match node {
        Node::Var(_) => true,
        Node::Num(_) | Node::Const(_) => false,
        Node::Neg(i) | Node::Call(_, i) => has_vars(i),
        Node::Binary(_, l, r) => has_vars(l) || has_vars(r),
    }
}

fn constant_value(c: Constant, params: &MetallicParams) -> f64 {
    match c {
        Constant::Sigma => params.sigma(),
        Constant::Sigbar => params.sigbar(),
        Constant::Pi => std::f64::consts::PI,
    }
}

struct Ctx<'a> {
    values: &'a [f64],
    params: &'a MetallicParams,
    names: &'a [String],
}

impl Ctx<'_> {
    fn domain(&self, reason: &'static str, node: &Node, arg: f64) -> EvalError {
        EvalError::Domain {
            reason,
            expr: raise(node, self.names).to_string(),
            arg,
        }
    }

    fn check_call(&self, f: Func, node: &Node, arg: f64) -> Result<(), EvalError> {
        match f {
            Func::Ln if arg.is_nan() || arg <= 0.0 => {
                Err(self.domain("ln of non-positive value", node, arg))
            }
            Func::Sqrt if arg.is_nan() || arg <= 0.0 => {
                Err(self.domain("sqrt of non-positive value", node, arg))
            }
            _ => Ok(()),
        }
    }

    fn check_pow(&self, node: &Node, base: f64, exponent: f64, constant_exp: bool) -> Result<(), EvalError> {
        let integer = constant_exp && integer_exponent(exponent).is_some();
        if integer {
            if base == 0.0 && exponent < 0.0 {
                return Err(self.domain("zero raised to a negative power", node, base));
            }
        } else if base <= 0.0 {
            return Err(self.domain("non-positive base with non-integer exponent", node, base));
        }
        Ok(())
    }

    fn scalar(&self, node: &Node) -> Result<f64, EvalError> {
        Ok(match node {
            Node::Num(v) => *v,
            Node::Var(i) => self.values[*i],
            Node::Const(c) => constant_value(*c, self.params),
            Node::Neg(inner) => -self.scalar(inner)?,
            Node::Call(f, inner) => {
                let a = self.scalar(inner)?;
                self.check_call(*f, node, a)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sqrt => a.sqrt(),
                }
            }
            Node::Binary(op, l, r) => {
                let a = self.scalar(l)?;
                let b = self.scalar(r)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(self.domain("division by zero", node, b));
                        }
                        a * (1.0 / b)
                    }
                    BinOp::Pow => {
                        let constant_exp = !has_vars(r);
                        self.check_pow(node, a, b, constant_exp)?;
                        scalar_pow(a, b, constant_exp)
                    }
                }
            }
        })
    }

    fn jet(&self, node: &Node) -> Result<Jet2, EvalError> {
        let n = self.values.len();
        Ok(match node {
            Node::Num(v) => Jet2::constant(*v, n),
            Node::Var(i) => Jet2::variable(self.values[*i], *i, n),
            Node::Const(c) => Jet2::constant(constant_value(*c, self.params), n),
            Node::Neg(inner) => -&self.jet(inner)?,
            Node::Call(f, inner) => {
                let a = self.jet(inner)?;
                self.check_call(*f, node, a.value)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Sqrt => a.sqrt(),
                }
            }
            Node::Binary(op, l, r) => {
                let a = self.jet(l)?;
                let b = self.jet(r)?;
                match op {
                    BinOp::Add => &a + &b,
                    BinOp::Sub => &a - &b,
                    BinOp::Mul => &a * &b,
                    BinOp::Div => {
                        if b.value == 0.0 {
                            return Err(self.domain("division by zero", node, b.value));
                        }
                        &a * &b.recip()
                    }
                    BinOp::Pow => {
                        let constant_exp = !has_vars(r);
                        self.check_pow(node, a.value, b.value, constant_exp)?;
                        if constant_exp {
                            a.powf_const(b.value)
                        } else {
                            (&b * &a.ln()).exp()
                        }
                    }
                }
            }
        })
    }
}

fn scalar_pow(base: f64, exponent: f64, constant_exp: bool) -> f64 {
    if constant_exp {
        if exponent == 0.0 {
            return 1.0;
        }
        if let Some(k) = integer_exponent(exponent) {
            return base.powi(k);
        }
        base.powf(exponent)
    } else {
        (exponent * base.ln()).exp()
    }
}

/// Evaluates `expr` with the bindings in `env`.
pub fn eval(expr: &Expr, env: &Env, params: &MetallicParams) -> Result<f64, EvalError> {
    CompiledExpr::new(expr, env.names())?.eval(env.values(), params)
}

/// Evaluates `expr` together with its exact gradient and Hessian with respect
/// to the variables of `env`, in `env` order.
pub fn eval_jet2(expr: &Expr, env: &Env, params: &MetallicParams) -> Result<Jet2, EvalError> {
    CompiledExpr::new(expr, env.names())?.eval_jet2(env.values(), params)
}
