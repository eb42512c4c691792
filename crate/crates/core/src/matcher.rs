//! The match combinator.
//!
//! A host function over embedded terms may branch on its arguments only
//! through matchers, and matchers only answer for `Match`-wrapped terms. To
//! turn that host-level branching into an embedded `Case`, the function is
//! re-run once per trace of each argument's type, with the argument wrapped in
//! `Match(trace, arg)`. Each run follows exactly one host branch and yields the
//! right-hand side for that trace.

use std::fmt;
use std::sync::Arc;

use crate::ast::{fresh_name, structural_eq, type_of_open, Expr};
use crate::error::{Error, Result};
use crate::pattern::{match_con, ConRef};
use crate::trace::{enumerate_traces, Trace};
use crate::types::{AdtRegistry, SurfaceType, TypeRep};

type Body = dyn Fn(&[Expr]) -> Result<Expr> + Send + Sync;

/// A host function from embedded terms to an embedded term.
///
/// The body must be pure: it is evaluated once per trace combination.
#[derive(Clone)]
pub struct EmbeddedFn {
    pub arg_types: Vec<SurfaceType>,
    body: Arc<Body>,
}

impl EmbeddedFn {
    pub fn new(
        arg_types: Vec<SurfaceType>,
        body: impl Fn(&[Expr]) -> Result<Expr> + Send + Sync + 'static,
    ) -> Self {
        EmbeddedFn {
            arg_types,
            body: Arc::new(body),
        }
    }

    /// Runs the body as-is, without arity or type checks.
    pub fn call(&self, args: &[Expr]) -> Result<Expr> {
        (self.body)(args)
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }
}

impl fmt::Debug for EmbeddedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbeddedFn")
            .field("arg_types", &self.arg_types)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MatchOptions {
    /// Evaluate the body twice per trace combination and fail with
    /// [`Error::PurityViolation`] if the results differ.
    pub purity_audit: bool,
}

struct ArgInfo {
    rep: TypeRep,
    traces: Vec<Trace>,
}

pub fn match_fn(f: &EmbeddedFn, registry: &AdtRegistry) -> Result<EmbeddedFn> {
    match_fn_with(f, registry, MatchOptions::default())
}

/// Lifts the host-level branching of `f` into embedded `Case` terms.
///
/// Arguments are processed left to right. An argument already in `Match`
/// form gets no new `Case`, which keeps repeated application linear. An
/// argument type with a single trace gets no `Case` either. Branches appear
/// in trace enumeration order. Scrutinized arguments other than variables are
/// first bound with `Let` so the scrutinee is never duplicated.
pub fn match_fn_with(f: &EmbeddedFn, registry: &AdtRegistry, opts: MatchOptions) -> Result<EmbeddedFn> {
    let info = f
        .arg_types
        .iter()
        .map(|t| {
            let rep = registry.repr_of(t)?;
            let traces = enumerate_traces(&rep);
            Ok(ArgInfo { rep, traces })
        })
        .collect::<Result<Vec<_>>>()?;
    let info = Arc::new(info);
    let inner = f.clone();
    Ok(EmbeddedFn::new(f.arg_types.clone(), move |args| {
        if args.len() != info.len() {
            return Err(Error::ArityMismatch {
                expected: info.len(),
                found: args.len(),
            });
        }
        let mut lets = Vec::new();
        let mut current = Vec::with_capacity(args.len());
        for (arg, ArgInfo { rep, traces }) in args.iter().zip(info.iter()) {
            match arg {
                Expr::Match(..) | Expr::Var(..) => current.push(arg.clone()),
                _ if traces.len() == 1 => current.push(arg.clone()),
                _ => {
                    let name = fresh_name("arg");
                    current.push(Expr::var(name.clone(), rep.clone()));
                    lets.push((name, arg.clone()));
                }
            }
        }
        let body = explore(&inner, &info, &mut current, 0, opts)?.strip_matches();
        Ok(lets
            .into_iter()
            .rev()
            .fold(body, |body, (name, bound)| Expr::let_in(name, bound, body)))
    }))
}

fn explore(
    f: &EmbeddedFn,
    info: &[ArgInfo],
    args: &mut Vec<Expr>,
    i: usize,
    opts: MatchOptions,
) -> Result<Expr> {
    if i == args.len() {
        let result = f.call(args)?;
        if opts.purity_audit && !structural_eq(&result, &f.call(args)?) {
            return Err(Error::PurityViolation);
        }
        return Ok(result);
    }
    if args[i].is_match() {
        return explore(f, info, args, i + 1, opts);
    }
    let scrutinee = args[i].clone();
    let mut branches = Vec::with_capacity(info[i].traces.len());
    for tr in &info[i].traces {
        args[i] = Expr::matching(tr.clone(), scrutinee.clone());
        let rhs = explore(f, info, args, i + 1, opts);
        args[i] = scrutinee.clone();
        branches.push((tr.clone(), rhs?));
    }
    if branches.len() == 1 {
        return Ok(branches.pop().expect("one branch").1);
    }
    Ok(Expr::case(scrutinee, branches))
}

/// Applies `f` to `args` after checking arity and argument types.
pub fn apply_fn(f: &EmbeddedFn, args: &[Expr], registry: &AdtRegistry) -> Result<Expr> {
    if args.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: args.len(),
        });
    }
    for (i, (arg, ty)) in args.iter().zip(&f.arg_types).enumerate() {
        let expected = registry.repr_of(ty)?;
        let found = type_of_open(arg, registry)?;
        if found != expected {
            return Err(Error::TypeMismatch(format!(
                "argument {i} has type {found}, expected {expected} ({ty})"
            )));
        }
    }
    let result = f.call(args)?;
    type_of_open(&result, registry)?;
    Ok(result)
}

/// Embedded conditional on a `Bool`-valued term, expressed as a match on
/// `True`.
pub fn cond(test: Expr, then: Expr, otherwise: Expr, registry: &AdtRegistry) -> Result<Expr> {
    let truth = ConRef::new(registry, "Bool", "True")?;
    let reg = registry.clone();
    let pick = EmbeddedFn::new(vec![SurfaceType::adt("Bool")], move |args| {
        Ok(match match_con(&truth, &args[0], &reg)? {
            Some(_) => then.clone(),
            None => otherwise.clone(),
        })
    });
    apply_fn(&match_fn(&pick, registry)?, &[test], registry)
}
