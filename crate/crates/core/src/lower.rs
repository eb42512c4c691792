//! Case lowering: flat trace-labelled `Case` terms become nested switches on
//! literal tags, with repeated arms folded into a default.

use std::fmt::{self, Write as _};

use crate::ast::{assert_no_match, fresh_name, newline, type_of_open, Expr, PairPath, PrimOp, Side};
use crate::error::{Error, Result};
use crate::eval::{apply_prim, project, unroll, ValueEnv};
use crate::trace::Trace;
use crate::types::{make_undef, AdtRegistry, PrimType, RepValue, Scalar, TypeRep};

#[derive(Clone, Debug, PartialEq)]
pub enum CoreExpr {
    Const(Scalar),
    Unit,
    Pair(Box<CoreExpr>, Box<CoreExpr>),
    Prj(PairPath, Box<CoreExpr>),
    Roll { adt: String, body: Box<CoreExpr> },
    Unroll(Box<CoreExpr>),
    Let {
        name: String,
        bound: Box<CoreExpr>,
        body: Box<CoreExpr>,
    },
    Var(String, TypeRep),
    Undef(TypeRep),
    Prim(PrimOp, Vec<CoreExpr>),
    /// Reads the tag at `tag_path` inside the scrutinee and takes the arm
    /// with that tag, else the default.
    Switch {
        scrutinee: Box<CoreExpr>,
        tag_path: PairPath,
        arms: Vec<(u32, CoreExpr)>,
        default: Option<Box<CoreExpr>>,
    },
}

impl CoreExpr {
    pub fn count(&self, pred: &impl Fn(&CoreExpr) -> bool) -> usize {
        let own = usize::from(pred(self));
        own + self.children().map(|c| c.count(pred)).sum::<usize>()
    }

    pub fn switch_count(&self) -> usize {
        self.count(&|e| matches!(e, CoreExpr::Switch { .. }))
    }

    fn children(&self) -> Box<dyn Iterator<Item = &CoreExpr> + '_> {
        match self {
            CoreExpr::Const(_) | CoreExpr::Unit | CoreExpr::Var(..) | CoreExpr::Undef(_) => {
                Box::new(std::iter::empty())
            }
            CoreExpr::Pair(a, b) => Box::new([&**a, &**b].into_iter()),
            CoreExpr::Prj(_, x) | CoreExpr::Unroll(x) | CoreExpr::Roll { body: x, .. } => {
                Box::new(std::iter::once(&**x))
            }
            CoreExpr::Let { bound, body, .. } => Box::new([&**bound, &**body].into_iter()),
            CoreExpr::Prim(_, args) => Box::new(args.iter()),
            CoreExpr::Switch {
                scrutinee,
                arms,
                default,
                ..
            } => Box::new(
                std::iter::once(&**scrutinee)
                    .chain(arms.iter().map(|(_, a)| a))
                    .chain(default.as_deref()),
            ),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LowerOptions {
    /// Fold repeated arms into a default.
    pub dedup: bool,
}

impl Default for LowerOptions {
    fn default() -> Self {
        Self { dedup: true }
    }
}

pub fn lower_expr(e: &Expr, registry: &AdtRegistry) -> Result<CoreExpr> {
    lower_expr_with(e, registry, LowerOptions::default())
}

pub fn lower_expr_with(e: &Expr, registry: &AdtRegistry, opts: LowerOptions) -> Result<CoreExpr> {
    assert_no_match(e)?;
    Lowerer { registry, opts }.expr(e)
}

struct Lowerer<'a> {
    registry: &'a AdtRegistry,
    opts: LowerOptions,
}

impl Lowerer<'_> {
    fn expr(&self, e: &Expr) -> Result<CoreExpr> {
        let boxed = |x: &Expr| self.expr(x).map(Box::new);
        Ok(match e {
            Expr::Const(s) => CoreExpr::Const(*s),
            Expr::Unit => CoreExpr::Unit,
            Expr::Pair(a, b) => CoreExpr::Pair(boxed(a)?, boxed(b)?),
            Expr::Prj(p, x) => CoreExpr::Prj(p.clone(), boxed(x)?),
            Expr::Roll { adt, body } => CoreExpr::Roll {
                adt: adt.clone(),
                body: boxed(body)?,
            },
            Expr::Unroll(x) => CoreExpr::Unroll(boxed(x)?),
            Expr::Let { name, bound, body } => CoreExpr::Let {
                name: name.clone(),
                bound: boxed(bound)?,
                body: boxed(body)?,
            },
            Expr::Var(n, t) => CoreExpr::Var(n.clone(), t.clone()),
            Expr::Undef(t) => CoreExpr::Undef(t.clone()),
            Expr::Prim(op, args) => {
                CoreExpr::Prim(*op, args.iter().map(|a| self.expr(a)).collect::<Result<_>>()?)
            }
            Expr::Match(..) => return Err(Error::ResidualMatch("/".into())),
            Expr::Case {
                scrutinee,
                branches,
            } => self.case(scrutinee, branches)?,
        })
    }

    fn case(&self, scrutinee: &Expr, branches: &[(Trace, Expr)]) -> Result<CoreExpr> {
        if branches.is_empty() {
            return Err(Error::MalformedTraces("case without branches".into()));
        }
        let rows = branches
            .iter()
            .map(|(t, rhs)| Ok((t.clone(), self.expr(rhs)?)))
            .collect::<Result<Vec<_>>>()?;
        // The scrutinee is inspected once per switch level, so bind it first.
        let (var, binding) = match scrutinee {
            Expr::Var(n, t) => (CoreExpr::Var(n.clone(), t.clone()), None),
            other => {
                let name = fresh_name("s");
                let ty = type_of_open(other, self.registry)?;
                (CoreExpr::Var(name.clone(), ty), Some((name, self.expr(other)?)))
            }
        };
        let switch = self.rows_at(&var, rows, true)?;
        Ok(match binding {
            Some((name, bound)) => CoreExpr::Let {
                name,
                bound: Box::new(bound),
                body: Box::new(switch),
            },
            None => switch,
        })
    }

    /// Compiles rows in first-match order. `top` switches are never collapsed
    /// into their default, so every lowered case keeps one dispatch point.
    fn rows_at(&self, var: &CoreExpr, mut rows: Vec<(Trace, CoreExpr)>, top: bool) -> Result<CoreExpr> {
        let Some(path) = leftmost_tag(&rows[0].0) else {
            // The first row matches everything left to inspect.
            return Ok(rows.swap_remove(0).1);
        };
        let mut groups: Vec<(u32, Vec<(Trace, CoreExpr)>)> = Vec::new();
        let mut wildcards = Vec::new();
        for (trace, rhs) in &rows {
            match trace.at(&path) {
                Some(Trace::Tag(k, _)) => {
                    if !groups.iter().any(|(g, _)| g == k) {
                        groups.push((*k, Vec::new()));
                    }
                }
                Some(_) => wildcards.push((trace.clone(), rhs.clone())),
                None => {
                    return Err(Error::MalformedTraces(format!(
                        "trace {trace} has no position {path}"
                    )))
                }
            }
        }
        // Each group sees its own rows and the wildcard rows, in source order.
        for (k, group) in &mut groups {
            for (trace, rhs) in &rows {
                match trace.at(&path) {
                    Some(Trace::Tag(j, _)) if j == k => group.push((consume_tag(trace, &path), rhs.clone())),
                    Some(Trace::Tag(..)) => {}
                    _ => group.push((trace.clone(), rhs.clone())),
                }
            }
        }
        groups.sort_by_key(|(k, _)| *k);
        let mut arms = groups
            .into_iter()
            .map(|(k, g)| Ok((k, self.rows_at(var, g, false)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut default = if wildcards.is_empty() {
            None
        } else {
            Some(self.rows_at(var, wildcards, false)?)
        };
        if self.opts.dedup {
            dedup(&mut arms, &mut default);
            if !top && arms.is_empty() {
                if let Some(d) = default {
                    return Ok(d);
                }
            }
        }
        Ok(CoreExpr::Switch {
            scrutinee: Box::new(var.clone()),
            tag_path: path.then(Side::Left),
            arms,
            default: default.map(Box::new),
        })
    }
}

/// Path of the first `Tag` in a left-to-right pre-order walk.
fn leftmost_tag(t: &Trace) -> Option<PairPath> {
    fn go(t: &Trace, path: &mut Vec<Side>) -> bool {
        match t {
            Trace::Tag(..) => true,
            Trace::Pair(a, b) => {
                path.push(Side::Left);
                if go(a, path) {
                    return true;
                }
                path.pop();
                path.push(Side::Right);
                if go(b, path) {
                    return true;
                }
                path.pop();
                false
            }
            _ => false,
        }
    }
    let mut path = Vec::new();
    go(t, &mut path).then(|| PairPath::from_steps(path))
}

/// Replaces the tag node at `path` by the plain pair it encodes.
fn consume_tag(t: &Trace, path: &PairPath) -> Trace {
    fn go(t: &Trace, steps: &[Side]) -> Trace {
        match (t, steps.split_first()) {
            (Trace::Tag(_, f), None) => Trace::pair(Trace::Prim(PrimType::Tag), (**f).clone()),
            (Trace::Pair(a, b), Some((Side::Left, rest))) => Trace::pair(go(a, rest), (**b).clone()),
            (Trace::Pair(a, b), Some((Side::Right, rest))) => Trace::pair((**a).clone(), go(b, rest)),
            (Trace::Tag(k, f), Some((Side::Right, rest))) => Trace::tag(*k, go(f, rest)),
            _ => t.clone(),
        }
    }
    go(t, path.steps())
}

fn dedup(arms: &mut Vec<(u32, CoreExpr)>, default: &mut Option<CoreExpr>) {
    if let Some(d) = default {
        arms.retain(|(_, a)| !core_eq(a, d));
        return;
    }
    // Largest class of equal arms; ties go to the class with the smallest tag,
    // which is the first one found since arms are sorted.
    let mut best: Option<(usize, usize)> = None;
    for i in 0..arms.len() {
        if arms[..i].iter().any(|(_, a)| core_eq(a, &arms[i].1)) {
            continue;
        }
        let size = arms[i..].iter().filter(|(_, a)| core_eq(a, &arms[i].1)).count();
        if size >= 2 && best.is_none_or(|(_, s)| size > s) {
            best = Some((i, size));
        }
    }
    if let Some((i, _)) = best {
        let d = arms[i].1.clone();
        arms.retain(|(_, a)| !core_eq(a, &d));
        *default = Some(d);
    }
}

/// Equality up to renaming of let-bound variables.
pub fn core_eq(a: &CoreExpr, b: &CoreExpr) -> bool {
    alpha_eq(a, b, &mut Vec::new(), &mut Vec::new())
}

fn alpha_eq<'a>(a: &'a CoreExpr, b: &'a CoreExpr, sa: &mut Vec<&'a str>, sb: &mut Vec<&'a str>) -> bool {
    use CoreExpr as C;
    match (a, b) {
        (C::Const(x), C::Const(y)) => x == y,
        (C::Unit, C::Unit) => true,
        (C::Pair(a1, a2), C::Pair(b1, b2)) => alpha_eq(a1, b1, sa, sb) && alpha_eq(a2, b2, sa, sb),
        (C::Prj(p, x), C::Prj(q, y)) => p == q && alpha_eq(x, y, sa, sb),
        (C::Roll { adt: m, body: x }, C::Roll { adt: n, body: y }) => m == n && alpha_eq(x, y, sa, sb),
        (C::Unroll(x), C::Unroll(y)) => alpha_eq(x, y, sa, sb),
        (
            C::Let {
                name: n1,
                bound: b1,
                body: e1,
            },
            C::Let {
                name: n2,
                bound: b2,
                body: e2,
            },
        ) => {
            if !alpha_eq(b1, b2, sa, sb) {
                return false;
            }
            sa.push(n1);
            sb.push(n2);
            let eq = alpha_eq(e1, e2, sa, sb);
            sa.pop();
            sb.pop();
            eq
        }
        (C::Var(x, t), C::Var(y, u)) => {
            let dx = sa.iter().rev().position(|n| n == x);
            let dy = sb.iter().rev().position(|n| n == y);
            match (dx, dy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y && t == u,
                _ => false,
            }
        }
        (C::Undef(t), C::Undef(u)) => t == u,
        (C::Prim(o, xs), C::Prim(p, ys)) => {
            o == p && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_eq(x, y, sa, sb))
        }
        (
            C::Switch {
                scrutinee: s1,
                tag_path: p1,
                arms: a1,
                default: d1,
            },
            C::Switch {
                scrutinee: s2,
                tag_path: p2,
                arms: a2,
                default: d2,
            },
        ) => {
            p1 == p2
                && alpha_eq(s1, s2, sa, sb)
                && a1.len() == a2.len()
                && a1
                    .iter()
                    .zip(a2)
                    .all(|((k, x), (j, y))| k == j && alpha_eq(x, y, sa, sb))
                && match (d1, d2) {
                    (Some(x), Some(y)) => alpha_eq(x, y, sa, sb),
                    (None, None) => true,
                    _ => false,
                }
        }
        _ => false,
    }
}

pub fn eval_core(e: &CoreExpr, env: &ValueEnv) -> Result<RepValue> {
    eval_in(e, &mut env.clone())
}

fn eval_in(e: &CoreExpr, env: &mut ValueEnv) -> Result<RepValue> {
    Ok(match e {
        CoreExpr::Const(s) => RepValue::prim(*s),
        CoreExpr::Unit => RepValue::Unit,
        CoreExpr::Pair(a, b) => RepValue::pair(eval_in(a, env)?, eval_in(b, env)?),
        CoreExpr::Prj(path, x) => project(&eval_in(x, env)?, path)?.clone(),
        CoreExpr::Roll { body, .. } => RepValue::Roll(Box::new(eval_in(body, env)?)),
        CoreExpr::Unroll(x) => unroll(eval_in(x, env)?)?,
        CoreExpr::Let { name, bound, body } => {
            let v = eval_in(bound, env)?;
            env.bind(name.clone(), v);
            let result = eval_in(body, env);
            env.pop();
            return result;
        }
        CoreExpr::Var(name, _) => env.lookup(name)?.clone(),
        CoreExpr::Undef(t) => make_undef(t),
        CoreExpr::Prim(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval_in(a, env))
                .collect::<Result<Vec<_>>>()?;
            apply_prim(*op, &vals)?
        }
        CoreExpr::Switch {
            scrutinee,
            tag_path,
            arms,
            default,
        } => {
            let v = eval_in(scrutinee, env)?;
            let tag = project(&v, tag_path)?.read_tag()?;
            let chosen = arms
                .iter()
                .find(|(k, _)| *k == tag)
                .map(|(_, a)| a)
                .or(default.as_deref());
            return match chosen {
                Some(body) => eval_in(body, env),
                None => Err(Error::NoBranchMatched),
            };
        }
    })
}

pub fn pretty_core(e: &CoreExpr) -> String {
    let mut out = String::new();
    write_core(e, 0, &mut out);
    out
}

impl fmt::Display for CoreExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_core(self))
    }
}

fn write_core(e: &CoreExpr, indent: usize, out: &mut String) {
    match e {
        CoreExpr::Const(s) => write!(out, "{s}").unwrap(),
        CoreExpr::Unit => out.push_str("()"),
        CoreExpr::Pair(a, b) => {
            out.push('(');
            write_core(a, indent, out);
            out.push_str(", ");
            write_core(b, indent, out);
            out.push(')');
        }
        CoreExpr::Prj(p, x) => {
            write!(out, "prj[{p}] ").unwrap();
            write_atom(x, indent, out);
        }
        CoreExpr::Roll { adt, body } => {
            write!(out, "roll<{adt}> ").unwrap();
            write_atom(body, indent, out);
        }
        CoreExpr::Unroll(x) => {
            out.push_str("unroll ");
            write_atom(x, indent, out);
        }
        CoreExpr::Let { name, bound, body } => {
            write!(out, "let {name} = ").unwrap();
            write_core(bound, indent + 2, out);
            out.push_str(" in");
            newline(indent, out);
            write_core(body, indent, out);
        }
        CoreExpr::Var(name, _) => out.push_str(name),
        CoreExpr::Undef(t) => write!(out, "undef<{t}>").unwrap(),
        CoreExpr::Prim(op, args) => {
            write!(out, "{}(", op.name()).unwrap();
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_core(a, indent, out);
            }
            out.push(')');
        }
        CoreExpr::Switch {
            scrutinee,
            tag_path,
            arms,
            default,
        } => {
            out.push_str("switch ");
            write_atom(scrutinee, indent, out);
            write!(out, "[{tag_path}] of").unwrap();
            for (k, a) in arms {
                newline(indent + 2, out);
                write!(out, "{k} -> ").unwrap();
                write_core(a, indent + 4, out);
            }
            if let Some(d) = default {
                newline(indent + 2, out);
                out.push_str("_ -> ");
                write_core(d, indent + 4, out);
            }
        }
    }
}

fn write_atom(e: &CoreExpr, indent: usize, out: &mut String) {
    let simple = matches!(
        e,
        CoreExpr::Const(_)
            | CoreExpr::Unit
            | CoreExpr::Var(..)
            | CoreExpr::Undef(_)
            | CoreExpr::Pair(..)
            | CoreExpr::Prim(..)
    );
    if !simple {
        out.push('(');
    }
    write_core(e, indent, out);
    if !simple {
        out.push(')');
    }
}
