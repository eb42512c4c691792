//! Reference interpreter.
//!
//! Strict, with poison tracking: undefined values may be moved around freely
//! but inspecting a poisoned tag, or returning poison to the host, is an
//! error. Arithmetic on a poisoned operand yields poison.

use crate::ast::{Expr, PairPath, PrimOp, Side};
use crate::error::{Error, Result};
use crate::trace::trace_matches;
use crate::types::{make_undef, AdtRegistry, RepValue, Scalar, SurfaceType, SurfaceValue};

/// Variable values in scope; later bindings shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct ValueEnv {
    bindings: Vec<(String, RepValue)>,
}

impl ValueEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, v: RepValue) {
        self.bindings.push((name.into(), v));
    }

    pub fn lookup(&self, name: &str) -> Result<&RepValue> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::UnboundVar(name.to_string()))
    }

    pub(crate) fn pop(&mut self) {
        self.bindings.pop();
    }
}

pub fn eval(e: &Expr, env: &ValueEnv) -> Result<RepValue> {
    eval_in(e, &mut env.clone())
}

/// Evaluates a closed program and converts the result to host form.
pub fn eval_closed(e: &Expr, result_type: &SurfaceType, registry: &AdtRegistry) -> Result<SurfaceValue> {
    let v = eval(e, &ValueEnv::new())?;
    registry.lower(&v, result_type)
}

fn eval_in(e: &Expr, env: &mut ValueEnv) -> Result<RepValue> {
    Ok(match e {
        Expr::Const(s) => RepValue::prim(*s),
        Expr::Unit => RepValue::Unit,
        Expr::Pair(a, b) => RepValue::pair(eval_in(a, env)?, eval_in(b, env)?),
        Expr::Prj(path, inner) => project(&eval_in(inner, env)?, path)?.clone(),
        Expr::Roll { body, .. } => RepValue::Roll(Box::new(eval_in(body, env)?)),
        Expr::Unroll(inner) => unroll(eval_in(inner, env)?)?,
        Expr::Match(..) => return Err(Error::ResidualMatch("evaluated match node".into())),
        Expr::Case {
            scrutinee,
            branches,
        } => {
            let v = eval_in(scrutinee, env)?;
            for (tr, body) in branches {
                if trace_matches(tr, &v)? {
                    return eval_in(body, env);
                }
            }
            return Err(Error::NoBranchMatched);
        }
        Expr::Let { name, bound, body } => {
            let v = eval_in(bound, env)?;
            env.bind(name.clone(), v);
            let result = eval_in(body, env);
            env.pop();
            return result;
        }
        Expr::Var(name, _) => env.lookup(name)?.clone(),
        Expr::Undef(t) => make_undef(t),
        Expr::Prim(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval_in(a, env))
                .collect::<Result<Vec<_>>>()?;
            apply_prim(*op, &vals)?
        }
    })
}

pub(crate) fn unroll(v: RepValue) -> Result<RepValue> {
    match v {
        RepValue::Roll(inner) => Ok(*inner),
        other => Err(other.shape_error("roll")),
    }
}

pub(crate) fn project<'a>(v: &'a RepValue, path: &PairPath) -> Result<&'a RepValue> {
    path.steps().iter().try_fold(v, |cur, side| {
        let (l, r) = cur.as_pair()?;
        Ok(match side {
            Side::Left => l,
            Side::Right => r,
        })
    })
}

pub(crate) fn apply_prim(op: PrimOp, args: &[RepValue]) -> Result<RepValue> {
    let [a, b] = args else {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: args.len(),
        });
    };
    let (
        RepValue::Prim {
            value: x,
            poisoned: px,
        },
        RepValue::Prim {
            value: y,
            poisoned: py,
        },
    ) = (a, b)
    else {
        return Err(Error::MalformedValue(format!(
            "`{}` applied to non-primitive operands",
            op.name()
        )));
    };
    if x.kind() != y.kind() {
        return Err(Error::MalformedValue(format!(
            "`{}` applied to {} and {}",
            op.name(),
            x.kind().name(),
            y.kind().name()
        )));
    }
    if *px || *py {
        let value = if op.is_comparison() {
            return Ok(RepValue::pair(
                RepValue::Prim {
                    value: Scalar::Tag(0),
                    poisoned: true,
                },
                RepValue::Unit,
            ));
        } else {
            Scalar::zero(x.kind())
        };
        return Ok(RepValue::Prim {
            value,
            poisoned: true,
        });
    }
    let unsupported = || {
        Error::MalformedValue(format!(
            "`{}` is not defined on {}",
            op.name(),
            x.kind().name()
        ))
    };
    let result = match (op, *x, *y) {
        (PrimOp::Eq, x, y) => return Ok(RepValue::bool_value(scalar_eq(x, y))),
        (PrimOp::Lt, x, y) => return Ok(RepValue::bool_value(scalar_lt(x, y))),
        (PrimOp::Add, Scalar::I64(a), Scalar::I64(b)) => Scalar::I64(a.wrapping_add(b)),
        (PrimOp::Sub, Scalar::I64(a), Scalar::I64(b)) => Scalar::I64(a.wrapping_sub(b)),
        (PrimOp::Mul, Scalar::I64(a), Scalar::I64(b)) => Scalar::I64(a.wrapping_mul(b)),
        (PrimOp::Div, Scalar::I64(_), Scalar::I64(0)) => return Err(Error::IntegerDivByZero),
        (PrimOp::Div, Scalar::I64(a), Scalar::I64(b)) => Scalar::I64(a.wrapping_div(b)),
        (PrimOp::Add, Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a + b),
        (PrimOp::Sub, Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a - b),
        (PrimOp::Mul, Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a * b),
        (PrimOp::Div, Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a / b),
        _ => return Err(unsupported()),
    };
    Ok(RepValue::prim(result))
}

// Numeric comparison: IEEE for floats, unlike `Scalar`'s bitwise `PartialEq`.
fn scalar_eq(x: Scalar, y: Scalar) -> bool {
    match (x, y) {
        (Scalar::F64(a), Scalar::F64(b)) => a == b,
        _ => x == y,
    }
}

fn scalar_lt(x: Scalar, y: Scalar) -> bool {
    match (x, y) {
        (Scalar::I64(a), Scalar::I64(b)) => a < b,
        (Scalar::F64(a), Scalar::F64(b)) => a < b,
        (Scalar::Tag(a), Scalar::Tag(b)) => a < b,
        _ => false,
    }
}
