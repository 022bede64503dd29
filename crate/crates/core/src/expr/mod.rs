//! The metric-definition language.
//!
//! Metric components, warping functions and operator-field entries are
//! written as scalar expressions over chart coordinates:
//!
//! ```
//! use metallic_warp::expr::{parse, eval_jet2, Env};
//! use metallic_warp::algebra::MetallicParams;
//!
//! let e = parse("exp(t)*x").unwrap();
//! let jet = eval_jet2(&e, &Env::new([("t", 0.0), ("x", 2.0)]), &MetallicParams::golden()).unwrap();
//! assert_eq!(jet.value, 2.0);
//! assert_eq!(jet.gradient, vec![2.0, 1.0]);
//! assert_eq!(jet.hessian_rows(), vec![vec![2.0, 1.0], vec![1.0, 0.0]]);
//! ```

mod ast;
mod eval;
mod jet;
mod parser;

pub use ast::{BinOp, Constant, Expr, Func};
pub use eval::{eval, eval_jet2, CompiledExpr, Env, EvalError};
pub use jet::Jet2;
pub use parser::{parse, ParseError, ParseErrorKind};
