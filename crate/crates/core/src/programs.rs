//! Built-in example types and embedded programs.

use crate::ast::{Expr, PrimOp};
use crate::error::{Error, Result};
use crate::eval::eval_closed;
use crate::matcher::{apply_fn, cond, match_fn, EmbeddedFn};
use crate::pattern::{build_con, lift_expr, match_con, ConRef};
use crate::types::{AdtDecl, AdtRegistry, ConDecl, PrimType, SurfaceType, SurfaceValue};

/// Bool, MaybeF64, MaybeBool, EitherBoolBool, Point and ListF64.
pub fn example_registry() -> AdtRegistry {
    let f64t = SurfaceType::Prim(PrimType::F64);
    let boolt = SurfaceType::adt("Bool");
    let mut reg = AdtRegistry::with_prelude();
    reg.register_all(vec![
        AdtDecl::new(
            "MaybeF64",
            vec![ConDecl::new("Nothing", vec![]), ConDecl::new("Just", vec![f64t.clone()])],
        ),
        AdtDecl::new(
            "MaybeBool",
            vec![ConDecl::new("Nothing", vec![]), ConDecl::new("Just", vec![boolt.clone()])],
        ),
        AdtDecl::new(
            "EitherBoolBool",
            vec![
                ConDecl::new("Left", vec![boolt.clone()]),
                ConDecl::new("Right", vec![boolt]),
            ],
        ),
        AdtDecl::new("Point", vec![ConDecl::new("Point", vec![f64t.clone(), f64t.clone()])]),
        AdtDecl::new(
            "ListF64",
            vec![
                ConDecl::new("Nil", vec![]),
                ConDecl::new("Cons", vec![f64t, SurfaceType::adt("ListF64")]),
            ],
        ),
    ])
    .expect("example declarations are valid");
    reg
}

type Builder = fn(&AdtRegistry) -> Result<EmbeddedFn>;

#[derive(Clone)]
pub struct ExampleProgram {
    pub name: &'static str,
    pub summary: &'static str,
    pub arg_types: Vec<SurfaceType>,
    pub result_type: SurfaceType,
    builder: Builder,
}

impl std::fmt::Debug for ExampleProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExampleProgram")
            .field("name", &self.name)
            .field("arg_types", &self.arg_types)
            .field("result_type", &self.result_type)
            .finish_non_exhaustive()
    }
}

impl ExampleProgram {
    /// The host function as written, before matching.
    pub fn build(&self, registry: &AdtRegistry) -> Result<EmbeddedFn> {
        (self.builder)(registry)
    }

    pub fn matched(&self, registry: &AdtRegistry) -> Result<EmbeddedFn> {
        match_fn(&self.build(registry)?, registry)
    }

    /// Parameter variables `x0, x1, ...` of the argument types.
    pub fn params(&self, registry: &AdtRegistry) -> Result<Vec<Expr>> {
        self.arg_types
            .iter()
            .enumerate()
            .map(|(i, t)| Ok(Expr::var(format!("x{i}"), registry.repr_of(t)?)))
            .collect()
    }

    /// The matched body over the parameter variables.
    pub fn body(&self, registry: &AdtRegistry) -> Result<Expr> {
        apply_fn(&self.matched(registry)?, &self.params(registry)?, registry)
    }

    /// The matched function applied to embedded host values.
    pub fn instantiate(&self, args: &[SurfaceValue], registry: &AdtRegistry) -> Result<Expr> {
        if args.len() != self.arg_types.len() {
            return Err(Error::ArityMismatch {
                expected: self.arg_types.len(),
                found: args.len(),
            });
        }
        let terms = args
            .iter()
            .zip(&self.arg_types)
            .map(|(v, t)| {
                registry.lift_at(v, t)?;
                lift_expr(v, registry)
            })
            .collect::<Result<Vec<_>>>()?;
        apply_fn(&self.matched(registry)?, &terms, registry)
    }

    pub fn run(&self, args: &[SurfaceValue], registry: &AdtRegistry) -> Result<SurfaceValue> {
        eval_closed(&self.instantiate(args, registry)?, &self.result_type, registry)
    }
}

pub fn examples() -> Vec<ExampleProgram> {
    let f64t = || SurfaceType::Prim(PrimType::F64);
    let adt = SurfaceType::adt;
    vec![
        ExampleProgram {
            name: "safe_div",
            summary: "Nothing when the divisor is zero, else Just the quotient",
            arg_types: vec![f64t(), f64t()],
            result_type: adt("MaybeF64"),
            builder: safe_div,
        },
        ExampleProgram {
            name: "from_maybe",
            summary: "the Just payload, or the default",
            arg_types: vec![f64t(), adt("MaybeF64")],
            result_type: f64t(),
            builder: from_maybe,
        },
        ExampleProgram {
            name: "simple",
            summary: "Nothing is 0, Just x is x",
            arg_types: vec![adt("MaybeF64")],
            result_type: f64t(),
            builder: simple,
        },
        ExampleProgram {
            name: "add_point",
            summary: "componentwise sum of two points",
            arg_types: vec![adt("Point"), adt("Point")],
            result_type: adt("Point"),
            builder: add_point,
        },
        ExampleProgram {
            name: "nested",
            summary: "Nothing is 0, Just False is 1, Just True is 2",
            arg_types: vec![adt("MaybeBool")],
            result_type: SurfaceType::Prim(PrimType::I64),
            builder: nested,
        },
        ExampleProgram {
            name: "list_head_or",
            summary: "head of the list, or the default when empty",
            arg_types: vec![f64t(), adt("ListF64")],
            result_type: f64t(),
            builder: list_head_or,
        },
        ExampleProgram {
            name: "either_pick",
            summary: "Left b is b, Right b is not b",
            arg_types: vec![adt("EitherBoolBool")],
            result_type: adt("Bool"),
            builder: either_pick,
        },
        ExampleProgram {
            name: "not",
            summary: "boolean negation",
            arg_types: vec![adt("Bool")],
            result_type: adt("Bool"),
            builder: not,
        },
        ExampleProgram {
            name: "sum_first_two",
            summary: "sum of the first two elements, missing ones counting as 0",
            arg_types: vec![adt("ListF64")],
            result_type: f64t(),
            builder: sum_first_two,
        },
    ]
}

pub fn find_example(name: &str) -> Result<ExampleProgram> {
    examples()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExample(name.to_string()))
}

fn con(registry: &AdtRegistry, adt: &str, name: &str) -> Result<ConRef> {
    ConRef::new(registry, adt, name)
}

fn bool_term(registry: &AdtRegistry, b: bool) -> Result<Expr> {
    let c = con(registry, "Bool", if b { "True" } else { "False" })?;
    build_con(&c, vec![], registry)
}

fn safe_div(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let nothing = con(&reg, "MaybeF64", "Nothing")?;
    let just = con(&reg, "MaybeF64", "Just")?;
    let arg_types = vec![SurfaceType::Prim(PrimType::F64); 2];
    Ok(EmbeddedFn::new(arg_types, move |args| {
        let (n, d) = (&args[0], &args[1]);
        let is_zero = Expr::binop(PrimOp::Eq, d.clone(), Expr::f64(0.0));
        let quotient = Expr::binop(PrimOp::Div, n.clone(), d.clone());
        cond(
            is_zero,
            build_con(&nothing, vec![], &reg)?,
            build_con(&just, vec![quotient], &reg)?,
            &reg,
        )
    }))
}

fn from_maybe(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let just = con(&reg, "MaybeF64", "Just")?;
    let arg_types = vec![SurfaceType::Prim(PrimType::F64), SurfaceType::adt("MaybeF64")];
    Ok(EmbeddedFn::new(arg_types, move |args| {
        Ok(match match_con(&just, &args[1], &reg)? {
            Some(fields) => fields[0].clone(),
            None => args[0].clone(),
        })
    }))
}

fn simple(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let just = con(&reg, "MaybeF64", "Just")?;
    Ok(EmbeddedFn::new(vec![SurfaceType::adt("MaybeF64")], move |args| {
        Ok(match match_con(&just, &args[0], &reg)? {
            Some(fields) => fields[0].clone(),
            None => Expr::f64(0.0),
        })
    }))
}

fn add_point(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let point = con(&reg, "Point", "Point")?;
    Ok(EmbeddedFn::new(vec![SurfaceType::adt("Point"); 2], move |args| {
        let p = match_con(&point, &args[0], &reg)?.expect("single constructor");
        let q = match_con(&point, &args[1], &reg)?.expect("single constructor");
        let sum = |i: usize| Expr::binop(PrimOp::Add, p[i].clone(), q[i].clone());
        build_con(&point, vec![sum(0), sum(1)], &reg)
    }))
}

fn nested(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let just = con(&reg, "MaybeBool", "Just")?;
    let truth = con(&reg, "Bool", "True")?;
    Ok(EmbeddedFn::new(vec![SurfaceType::adt("MaybeBool")], move |args| {
        let Some(fields) = match_con(&just, &args[0], &reg)? else {
            return Ok(Expr::i64(0));
        };
        Ok(match match_con(&truth, &fields[0], &reg)? {
            Some(_) => Expr::i64(2),
            None => Expr::i64(1),
        })
    }))
}

fn list_head_or(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let cons = con(&reg, "ListF64", "Cons")?;
    let arg_types = vec![SurfaceType::Prim(PrimType::F64), SurfaceType::adt("ListF64")];
    Ok(EmbeddedFn::new(arg_types, move |args| {
        Ok(match match_con(&cons, &args[1], &reg)? {
            Some(fields) => fields[0].clone(),
            None => args[0].clone(),
        })
    }))
}

fn either_pick(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let left = con(&reg, "EitherBoolBool", "Left")?;
    let right = con(&reg, "EitherBoolBool", "Right")?;
    let truth = con(&reg, "Bool", "True")?;
    Ok(EmbeddedFn::new(vec![SurfaceType::adt("EitherBoolBool")], move |args| {
        if let Some(fields) = match_con(&left, &args[0], &reg)? {
            return Ok(fields[0].clone());
        }
        let fields = match_con(&right, &args[0], &reg)?.expect("Left or Right");
        let b = match_con(&truth, &fields[0], &reg)?.is_some();
        bool_term(&reg, !b)
    }))
}

fn not(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let reg = reg.clone();
    let truth = con(&reg, "Bool", "True")?;
    Ok(EmbeddedFn::new(vec![SurfaceType::adt("Bool")], move |args| {
        let b = match_con(&truth, &args[0], &reg)?.is_some();
        bool_term(&reg, !b)
    }))
}

fn sum_first_two(reg: &AdtRegistry) -> Result<EmbeddedFn> {
    let head_or = match_fn(&list_head_or(reg)?, reg)?;
    let reg = reg.clone();
    let cons = con(&reg, "ListF64", "Cons")?;
    Ok(EmbeddedFn::new(vec![SurfaceType::adt("ListF64")], move |args| {
        let Some(fields) = match_con(&cons, &args[0], &reg)? else {
            return Ok(Expr::f64(0.0));
        };
        // The tail is recursive, so it needs a match of its own.
        let second = apply_fn(&head_or, &[Expr::f64(0.0), fields[1].clone()], &reg)?;
        Ok(Expr::binop(PrimOp::Add, fields[0].clone(), second))
    }))
}
