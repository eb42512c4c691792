//! The embedded expression language.
//!
//! A uni-typed tree checked by [`type_of`]. `Match` is a construction-time
//! proxy: it wraps a term with the trace of the alternative currently being
//! explored and must be gone from any program that is evaluated.

use std::fmt::{self, Write as _};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::trace::Trace;
use crate::types::{AdtRegistry, PrimType, Scalar, SurfaceType, TypeRep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Route from a pair to one of its (nested) components. Steps are listed
/// outermost first, so `[Left, Right]` is `fst` followed by `snd`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PairPath(Vec<Side>);

impl PairPath {
    pub fn here() -> Self {
        PairPath(Vec::new())
    }

    pub fn from_steps(steps: impl IntoIterator<Item = Side>) -> Self {
        PairPath(steps.into_iter().collect())
    }

    pub fn steps(&self) -> &[Side] {
        &self.0
    }

    pub fn is_here(&self) -> bool {
        self.0.is_empty()
    }

    pub fn then(&self, side: Side) -> Self {
        let mut steps = self.0.clone();
        steps.push(side);
        PairPath(steps)
    }

    pub fn join(&self, rest: &PairPath) -> Self {
        PairPath(self.0.iter().chain(&rest.0).copied().collect())
    }

    /// Path of slot `i` in a unit-rooted spine of `n` items.
    pub fn spine_slot(n: usize, i: usize) -> Self {
        debug_assert!(i < n);
        let mut steps = vec![Side::Left; n - 1 - i];
        steps.push(Side::Right);
        PairPath(steps)
    }

    /// Parses the `L`/`R` step string; the empty string is `here`.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                'L' => Some(Side::Left),
                'R' => Some(Side::Right),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(PairPath)
    }

    pub fn project<'a>(&self, t: &'a TypeRep) -> Option<&'a TypeRep> {
        self.0.iter().try_fold(t, |cur, side| {
            let (l, r) = cur.as_pair()?;
            Some(match side {
                Side::Left => l,
                Side::Right => r,
            })
        })
    }
}

impl fmt::Display for PairPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_char(match s {
                Side::Left => 'L',
                Side::Right => 'R',
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Lt,
}

impl PrimOp {
    pub const ALL: [PrimOp; 6] = [
        PrimOp::Add,
        PrimOp::Sub,
        PrimOp::Mul,
        PrimOp::Div,
        PrimOp::Eq,
        PrimOp::Lt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimOp::Add => "add",
            PrimOp::Sub => "sub",
            PrimOp::Mul => "mul",
            PrimOp::Div => "div",
            PrimOp::Eq => "eq",
            PrimOp::Lt => "lt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, PrimOp::Eq | PrimOp::Lt)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Scalar),
    Unit,
    Pair(Box<Expr>, Box<Expr>),
    Prj(PairPath, Box<Expr>),
    /// Folds the one-step unfolding of `adt` into its recursive type.
    Roll { adt: String, body: Box<Expr> },
    Unroll(Box<Expr>),
    Match(Trace, Box<Expr>),
    Case {
        scrutinee: Box<Expr>,
        branches: Vec<(Trace, Expr)>,
    },
    Let {
        name: String,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    Var(String, TypeRep),
    Undef(TypeRep),
    Prim(PrimOp, Vec<Expr>),
}

impl Expr {
    pub fn f64(v: f64) -> Self {
        Expr::Const(Scalar::F64(v))
    }

    pub fn i64(v: i64) -> Self {
        Expr::Const(Scalar::I64(v))
    }

    pub fn tag(v: u32) -> Self {
        Expr::Const(Scalar::Tag(v))
    }

    pub fn pair(l: Expr, r: Expr) -> Self {
        Expr::Pair(Box::new(l), Box::new(r))
    }

    pub fn prj(path: PairPath, e: Expr) -> Self {
        Expr::Prj(path, Box::new(e))
    }

    pub fn roll(adt: impl Into<String>, e: Expr) -> Self {
        Expr::Roll {
            adt: adt.into(),
            body: Box::new(e),
        }
    }

    pub fn unroll(e: Expr) -> Self {
        Expr::Unroll(Box::new(e))
    }

    pub fn matching(tr: Trace, e: Expr) -> Self {
        Expr::Match(tr, Box::new(e))
    }

    pub fn case(scrutinee: Expr, branches: Vec<(Trace, Expr)>) -> Self {
        Expr::Case {
            scrutinee: Box::new(scrutinee),
            branches,
        }
    }

    pub fn let_in(name: impl Into<String>, bound: Expr, body: Expr) -> Self {
        Expr::Let {
            name: name.into(),
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }

    pub fn var(name: impl Into<String>, ty: TypeRep) -> Self {
        Expr::Var(name.into(), ty)
    }

    pub fn prim(op: PrimOp, args: Vec<Expr>) -> Self {
        Expr::Prim(op, args)
    }

    pub fn binop(op: PrimOp, a: Expr, b: Expr) -> Self {
        Expr::Prim(op, vec![a, b])
    }

    /// Unit-rooted left-nested pairs.
    pub fn spine(items: impl IntoIterator<Item = Expr>) -> Self {
        items.into_iter().fold(Expr::Unit, Expr::pair)
    }

    pub fn is_match(&self) -> bool {
        matches!(self, Expr::Match(..))
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Unit | Expr::Var(..) | Expr::Undef(_) => vec![],
            Expr::Pair(a, b) => vec![a, b],
            Expr::Prj(_, e) | Expr::Roll { body: e, .. } | Expr::Unroll(e) | Expr::Match(_, e) => {
                vec![e]
            }
            Expr::Case {
                scrutinee,
                branches,
            } => std::iter::once(&**scrutinee)
                .chain(branches.iter().map(|(_, b)| b))
                .collect(),
            Expr::Let { bound, body, .. } => vec![bound, body],
            Expr::Prim(_, args) => args.iter().collect(),
        }
    }

    /// Number of nodes satisfying `pred`.
    pub fn count(&self, pred: &impl Fn(&Expr) -> bool) -> usize {
        pred(self) as usize + self.children().into_iter().map(|c| c.count(pred)).sum::<usize>()
    }

    pub fn case_count(&self) -> usize {
        self.count(&|e| matches!(e, Expr::Case { .. }))
    }

    /// Removes every `Match` proxy, keeping the wrapped term.
    pub fn strip_matches(self) -> Expr {
        match self {
            Expr::Match(_, e) => e.strip_matches(),
            Expr::Pair(a, b) => Expr::pair(a.strip_matches(), b.strip_matches()),
            Expr::Prj(p, e) => Expr::prj(p, e.strip_matches()),
            Expr::Roll { adt, body } => Expr::roll(adt, body.strip_matches()),
            Expr::Unroll(e) => Expr::unroll(e.strip_matches()),
            Expr::Case {
                scrutinee,
                branches,
            } => Expr::case(
                scrutinee.strip_matches(),
                branches
                    .into_iter()
                    .map(|(t, b)| (t, b.strip_matches()))
                    .collect(),
            ),
            Expr::Let { name, bound, body } => {
                Expr::let_in(name, bound.strip_matches(), body.strip_matches())
            }
            Expr::Prim(op, args) => {
                Expr::Prim(op, args.into_iter().map(Expr::strip_matches).collect())
            }
            leaf => leaf,
        }
    }
}

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A variable name that no earlier call returned. Names start with `_` so
/// they stay clear of names written by hand.
pub fn fresh_name(hint: &str) -> String {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    format!("_{hint}{n}")
}

/// Variable types in scope; later bindings shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    bindings: Vec<(String, TypeRep)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, ty: TypeRep) {
        self.bindings.push((name.into(), ty));
    }

    pub fn lookup(&self, name: &str) -> Option<&TypeRep> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

/// Representation type of `e`. Free variables must be bound in `env`.
pub fn type_of(e: &Expr, env: &TypeEnv, registry: &AdtRegistry) -> Result<TypeRep> {
    Checker {
        registry,
        open: false,
    }
    .check(e, &mut env.clone())
}

/// Like [`type_of`], but a free variable takes the type it is annotated with.
/// Used while building terms, when enclosing binders are not yet known.
pub fn type_of_open(e: &Expr, registry: &AdtRegistry) -> Result<TypeRep> {
    Checker {
        registry,
        open: true,
    }
    .check(e, &mut TypeEnv::new())
}

struct Checker<'a> {
    registry: &'a AdtRegistry,
    open: bool,
}

impl Checker<'_> {
    fn check(&self, e: &Expr, env: &mut TypeEnv) -> Result<TypeRep> {
        match e {
            Expr::Const(s) => Ok(TypeRep::Prim(s.kind())),
            Expr::Unit => Ok(TypeRep::Unit),
            Expr::Pair(a, b) => Ok(TypeRep::pair(self.check(a, env)?, self.check(b, env)?)),
            Expr::Prj(path, inner) => {
                let t = self.check(inner, env)?;
                path.project(&t).cloned().ok_or_else(|| Error::BadProjection {
                    path: path.to_string(),
                    ty: t.to_string(),
                })
            }
            Expr::Roll { adt, body } => {
                let t = self.check(body, env)?;
                let expected = self.registry.repr_of(&SurfaceType::Adt(adt.clone()))?;
                if t != expected {
                    return Err(Error::BadRoll(format!(
                        "body has type {t}, `{adt}` unfolds to {expected}"
                    )));
                }
                Ok(TypeRep::Rec(adt.clone()))
            }
            Expr::Unroll(inner) => match self.check(inner, env)? {
                TypeRep::Rec(adt) => self.registry.repr_of(&SurfaceType::Adt(adt)),
                t => Err(Error::BadUnroll(format!("operand has non-recursive type {t}"))),
            },
            Expr::Match(tr, inner) => {
                let t = self.check(inner, env)?;
                if !tr.conforms(&t) {
                    return Err(Error::TypeMismatch(format!(
                        "match trace {tr} does not fit type {t}"
                    )));
                }
                Ok(t)
            }
            Expr::Case {
                scrutinee,
                branches,
            } => {
                let st = self.check(scrutinee, env)?;
                let mut result: Option<TypeRep> = None;
                for (tr, body) in branches {
                    if !tr.conforms(&st) {
                        return Err(Error::TypeMismatch(format!(
                            "case trace {tr} does not fit scrutinee type {st}"
                        )));
                    }
                    let bt = self.check(body, env)?;
                    match &result {
                        Some(rt) if *rt != bt => {
                            return Err(Error::TypeMismatch(format!(
                                "case branches have types {rt} and {bt}"
                            )))
                        }
                        Some(_) => {}
                        None => result = Some(bt),
                    }
                }
                result.ok_or_else(|| Error::TypeMismatch("case with no branches".into()))
            }
            Expr::Let { name, bound, body } => {
                let bt = self.check(bound, env)?;
                env.bind(name.clone(), bt);
                let result = self.check(body, env);
                env.bindings.pop();
                result
            }
            Expr::Var(name, ty) => match env.lookup(name) {
                Some(bound) if bound == ty => Ok(ty.clone()),
                Some(bound) => Err(Error::TypeMismatch(format!(
                    "variable `{name}` annotated {ty} but bound at {bound}"
                ))),
                None if self.open => Ok(ty.clone()),
                None => Err(Error::UnboundVar(name.clone())),
            },
            Expr::Undef(t) => Ok(t.clone()),
            Expr::Prim(op, args) => {
                if args.len() != 2 {
                    return Err(Error::ArityMismatch {
                        expected: 2,
                        found: args.len(),
                    });
                }
                let a = self.check(&args[0], env)?;
                let b = self.check(&args[1], env)?;
                prim_result(*op, &a, &b)
            }
        }
    }
}

pub(crate) fn prim_result(op: PrimOp, a: &TypeRep, b: &TypeRep) -> Result<TypeRep> {
    let mismatch = || {
        Error::TypeMismatch(format!("`{}` cannot take operands {a} and {b}", op.name()))
    };
    if a != b {
        return Err(mismatch());
    }
    match (op.is_comparison(), a) {
        (true, TypeRep::Prim(_)) => Ok(TypeRep::bool_rep()),
        (false, TypeRep::Prim(p @ (PrimType::I64 | PrimType::F64))) => Ok(TypeRep::Prim(*p)),
        _ => Err(mismatch()),
    }
}

/// Syntactic equality up to renaming of `Let`-bound variables.
pub fn structural_eq(a: &Expr, b: &Expr) -> bool {
    alpha_eq(a, b, &mut Vec::new(), &mut Vec::new())
}

fn binder_depth(scope: &[&str], name: &str) -> Option<usize> {
    scope.iter().rev().position(|n| *n == name)
}

fn alpha_eq<'a>(a: &'a Expr, b: &'a Expr, sa: &mut Vec<&'a str>, sb: &mut Vec<&'a str>) -> bool {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x == y,
        (Expr::Unit, Expr::Unit) => true,
        (Expr::Pair(a1, a2), Expr::Pair(b1, b2)) => {
            alpha_eq(a1, b1, sa, sb) && alpha_eq(a2, b2, sa, sb)
        }
        (Expr::Prj(p, x), Expr::Prj(q, y)) => p == q && alpha_eq(x, y, sa, sb),
        (Expr::Roll { adt: m, body: x }, Expr::Roll { adt: n, body: y }) => {
            m == n && alpha_eq(x, y, sa, sb)
        }
        (Expr::Unroll(x), Expr::Unroll(y)) => alpha_eq(x, y, sa, sb),
        (Expr::Match(s, x), Expr::Match(t, y)) => s == t && alpha_eq(x, y, sa, sb),
        (
            Expr::Case {
                scrutinee: x,
                branches: xs,
            },
            Expr::Case {
                scrutinee: y,
                branches: ys,
            },
        ) => {
            alpha_eq(x, y, sa, sb)
                && xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys)
                    .all(|((s, x), (t, y))| s == t && alpha_eq(x, y, sa, sb))
        }
        (
            Expr::Let {
                name: m,
                bound: x1,
                body: x2,
            },
            Expr::Let {
                name: n,
                bound: y1,
                body: y2,
            },
        ) => {
            if !alpha_eq(x1, y1, sa, sb) {
                return false;
            }
            sa.push(m);
            sb.push(n);
            let eq = alpha_eq(x2, y2, sa, sb);
            sa.pop();
            sb.pop();
            eq
        }
        (Expr::Var(m, s), Expr::Var(n, t)) => {
            s == t
                && match (binder_depth(sa, m), binder_depth(sb, n)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => m == n,
                    _ => false,
                }
        }
        (Expr::Undef(s), Expr::Undef(t)) => s == t,
        (Expr::Prim(o, xs), Expr::Prim(p, ys)) => {
            o == p
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| alpha_eq(x, y, sa, sb))
        }
        _ => false,
    }
}

/// Fails with the location of the first `Match` node, if any.
pub fn assert_no_match(e: &Expr) -> Result<()> {
    find_match(e, &mut String::new()).map_or(Ok(()), |p| Err(Error::ResidualMatch(p)))
}

fn find_match(e: &Expr, path: &mut String) -> Option<String> {
    let descend = |child: &Expr, label: &str, path: &mut String| {
        let len = path.len();
        path.push('/');
        path.push_str(label);
        let found = find_match(child, path);
        path.truncate(len);
        found
    };
    match e {
        Expr::Match(..) => Some(if path.is_empty() { "/".into() } else { path.clone() }),
        Expr::Const(_) | Expr::Unit | Expr::Var(..) | Expr::Undef(_) => None,
        Expr::Pair(a, b) => descend(a, "left", path).or_else(|| descend(b, "right", path)),
        Expr::Prj(_, x) | Expr::Roll { body: x, .. } | Expr::Unroll(x) => descend(x, "body", path),
        Expr::Case {
            scrutinee,
            branches,
        } => descend(scrutinee, "scrutinee", path).or_else(|| {
            branches
                .iter()
                .enumerate()
                .find_map(|(i, (_, b))| descend(b, &format!("branches[{i}]"), path))
        }),
        Expr::Let { bound, body, .. } => {
            descend(bound, "bound", path).or_else(|| descend(body, "body", path))
        }
        Expr::Prim(_, args) => args
            .iter()
            .enumerate()
            .find_map(|(i, a)| descend(a, &format!("args[{i}]"), path)),
    }
}

/// Multi-line human-readable rendering. Case branches are labelled with their
/// traces, e.g. `#1((), f64) -> ...`.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, 0, &mut out);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

pub(crate) fn newline(indent: usize, out: &mut String) {
    out.push('\n');
    out.extend(std::iter::repeat_n(' ', indent));
}

fn write_expr(e: &Expr, indent: usize, out: &mut String) {
    match e {
        Expr::Const(s) => write!(out, "{s}").unwrap(),
        Expr::Unit => out.push_str("()"),
        Expr::Pair(a, b) => {
            out.push('(');
            write_expr(a, indent, out);
            out.push_str(", ");
            write_expr(b, indent, out);
            out.push(')');
        }
        Expr::Prj(p, x) => {
            write!(out, "prj[{p}] ").unwrap();
            write_atom(x, indent, out);
        }
        Expr::Roll { adt, body } => {
            write!(out, "roll<{adt}> ").unwrap();
            write_atom(body, indent, out);
        }
        Expr::Unroll(x) => {
            out.push_str("unroll ");
            write_atom(x, indent, out);
        }
        Expr::Match(t, x) => {
            write!(out, "match[{t}] ").unwrap();
            write_atom(x, indent, out);
        }
        Expr::Case {
            scrutinee,
            branches,
        } => {
            out.push_str("case ");
            write_atom(scrutinee, indent, out);
            out.push_str(" of");
            for (t, b) in branches {
                newline(indent + 2, out);
                write!(out, "{t} -> ").unwrap();
                write_expr(b, indent + 4, out);
            }
        }
        Expr::Let { name, bound, body } => {
            write!(out, "let {name} = ").unwrap();
            write_expr(bound, indent + 2, out);
            out.push_str(" in");
            newline(indent, out);
            write_expr(body, indent, out);
        }
        Expr::Var(name, _) => out.push_str(name),
        Expr::Undef(t) => write!(out, "undef<{t}>").unwrap(),
        Expr::Prim(op, args) => {
            write!(out, "{}(", op.name()).unwrap();
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(a, indent, out);
            }
            out.push(')');
        }
    }
}

fn write_atom(e: &Expr, indent: usize, out: &mut String) {
    let simple = matches!(
        e,
        Expr::Const(_) | Expr::Unit | Expr::Var(..) | Expr::Undef(_) | Expr::Pair(..) | Expr::Prim(..)
    );
    if !simple {
        out.push('(');
    }
    write_expr(e, indent, out);
    if !simple {
        out.push(')');
    }
}
