//! JSON encodings of types, traces, terms and host values.
//!
//! Parse errors carry a JSON-pointer location into the offending document.

use serde_json::{json, Map, Value};

use crate::ast::{Expr, PairPath, PrimOp};
use crate::error::{Error, Result};
use crate::lower::CoreExpr;
use crate::trace::Trace;
use crate::types::{AdtDecl, ConDecl, PrimType, Scalar, SurfaceType, SurfaceValue, TypeRep};

pub fn parse_str(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

/// A value together with its location, for error reporting.
#[derive(Clone, Copy)]
struct At<'a> {
    v: &'a Value,
    path: &'a str,
}

impl<'a> At<'a> {
    fn root(v: &'a Value) -> Self {
        At { v, path: "" }
    }

    fn err(&self, detail: impl Into<String>) -> Error {
        let loc = if self.path.is_empty() { "/" } else { self.path };
        Error::parse(loc, detail)
    }

    fn array(&self) -> Result<&'a [Value]> {
        self.v
            .as_array()
            .map(Vec::as_slice)
            .ok_or_else(|| self.err("expected an array"))
    }

    fn object(&self) -> Result<&'a Map<String, Value>> {
        self.v.as_object().ok_or_else(|| self.err("expected an object"))
    }

    fn str(&self) -> Result<&'a str> {
        self.v.as_str().ok_or_else(|| self.err("expected a string"))
    }

    fn u32(&self) -> Result<u32> {
        self.v
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| self.err("expected a non-negative 32-bit integer"))
    }

    fn with<T>(&self, key: &str, f: impl FnOnce(At<'_>) -> Result<T>) -> Result<T> {
        let v = self
            .object()?
            .get(key)
            .ok_or_else(|| self.err(format!("missing field `{key}`")))?;
        let path = format!("{}/{key}", self.path);
        f(At { v, path: &path })
    }

    fn each<T>(&self, mut f: impl FnMut(At<'_>) -> Result<T>) -> Result<Vec<T>> {
        self.array()?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let path = format!("{}/{i}", self.path);
                f(At { v, path: &path })
            })
            .collect()
    }

    fn nth<T>(&self, i: usize, f: impl FnOnce(At<'_>) -> Result<T>) -> Result<T> {
        let items = self.array()?;
        let v = items
            .get(i)
            .ok_or_else(|| self.err(format!("expected at least {} elements", i + 1)))?;
        let path = format!("{}/{i}", self.path);
        f(At { v, path: &path })
    }

    fn head(&self) -> Result<&'a str> {
        self.array()?
            .first()
            .and_then(Value::as_str)
            .ok_or_else(|| self.err("expected a tagged array"))
    }

    /// A `["head", ...]` array: returns the head and checks the length.
    fn tagged(&self, len: usize) -> Result<&'a str> {
        let head = self.head()?;
        if self.array()?.len() != len {
            return Err(self.err(format!("`{head}` takes {} operands", len - 1)));
        }
        Ok(head)
    }

    fn prim_type(&self) -> Result<PrimType> {
        let s = self.str()?;
        PrimType::from_name(s).ok_or_else(|| self.err(format!("unknown primitive `{s}`")))
    }

    fn path_value(&self) -> Result<PairPath> {
        let s = self.str()?;
        PairPath::parse(s).ok_or_else(|| self.err(format!("bad pair path `{s}`")))
    }
}

pub fn type_rep_to_json(t: &TypeRep) -> Value {
    match t {
        TypeRep::Unit => json!(["unit"]),
        TypeRep::Prim(p) => json!(["prim", p.name()]),
        TypeRep::Rec(n) => json!(["rec", n]),
        TypeRep::Pair(l, r) => json!(["pair", type_rep_to_json(l), type_rep_to_json(r)]),
        TypeRep::Sum { fields, .. } => {
            json!(["pair", ["prim", "tag"], type_rep_to_json(fields)])
        }
    }
}

pub fn type_rep_from_json(v: &Value) -> Result<TypeRep> {
    type_rep_at(At::root(v))
}

fn type_rep_at(at: At<'_>) -> Result<TypeRep> {
    let head = at.head()?;
    Ok(match head {
        "unit" => {
            at.tagged(1)?;
            TypeRep::Unit
        }
        "prim" => {
            at.tagged(2)?;
            TypeRep::Prim(at.nth(1, |p| p.prim_type())?)
        }
        "rec" => {
            at.tagged(2)?;
            TypeRep::Rec(at.nth(1, |n| n.str().map(str::to_string))?)
        }
        "pair" => {
            at.tagged(3)?;
            TypeRep::pair(at.nth(1, type_rep_at)?, at.nth(2, type_rep_at)?)
        }
        other => return Err(at.err(format!("unknown type node `{other}`"))),
    })
}

pub fn trace_to_json(t: &Trace) -> Value {
    match t {
        Trace::Unit => json!(["unit"]),
        Trace::Prim(p) => json!(["prim", p.name()]),
        Trace::Rec => json!(["rec"]),
        Trace::Pair(a, b) => json!(["pair", trace_to_json(a), trace_to_json(b)]),
        Trace::Tag(k, f) => json!(["tag", k, trace_to_json(f)]),
    }
}

pub fn trace_from_json(v: &Value) -> Result<Trace> {
    trace_at(At::root(v))
}

fn trace_at(at: At<'_>) -> Result<Trace> {
    let head = at.head()?;
    Ok(match head {
        "unit" => {
            at.tagged(1)?;
            Trace::Unit
        }
        "rec" => {
            at.tagged(1)?;
            Trace::Rec
        }
        "prim" => {
            at.tagged(2)?;
            Trace::Prim(at.nth(1, |p| p.prim_type())?)
        }
        "pair" => {
            at.tagged(3)?;
            Trace::pair(at.nth(1, trace_at)?, at.nth(2, trace_at)?)
        }
        "tag" => {
            at.tagged(3)?;
            Trace::tag(at.nth(1, |k| k.u32())?, at.nth(2, trace_at)?)
        }
        other => return Err(at.err(format!("unknown trace node `{other}`"))),
    })
}

fn f64_to_json(x: f64) -> Value {
    if x.is_nan() {
        json!("nan")
    } else if x.is_infinite() {
        json!(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        json!(x)
    }
}

fn scalar_fields(s: &Scalar) -> (&'static str, Value) {
    match s {
        Scalar::I64(x) => ("i64", json!(x)),
        Scalar::F64(x) => ("f64", f64_to_json(*x)),
        Scalar::Tag(k) => ("tag", json!(k)),
    }
}

fn scalar_to_json(s: &Scalar) -> Value {
    let (kind, value) = scalar_fields(s);
    json!({"kind": kind, "value": value})
}

/// Reads `{"kind", "value"}` from an object.
fn scalar_at(at: At<'_>) -> Result<Scalar> {
    let kind = at.with("kind", |k| k.prim_type())?;
    at.with("value", |v| match kind {
        PrimType::I64 => v
            .v
            .as_i64()
            .map(Scalar::I64)
            .ok_or_else(|| v.err("expected a 64-bit integer")),
        PrimType::Tag => v.u32().map(Scalar::Tag),
        PrimType::F64 => match v.v {
            Value::String(s) => match s.as_str() {
                "nan" => Ok(Scalar::F64(f64::NAN)),
                "inf" => Ok(Scalar::F64(f64::INFINITY)),
                "-inf" => Ok(Scalar::F64(f64::NEG_INFINITY)),
                other => Err(v.err(format!("bad float `{other}`"))),
            },
            n => n
                .as_f64()
                .map(Scalar::F64)
                .ok_or_else(|| v.err("expected a number")),
        },
    })
}

pub fn expr_to_json(e: &Expr) -> Value {
    match e {
        Expr::Const(s) => {
            let (kind, value) = scalar_fields(s);
            json!({"node": "const", "kind": kind, "value": value})
        }
        Expr::Unit => json!({"node": "unit"}),
        Expr::Pair(a, b) => json!({"node": "pair", "left": expr_to_json(a), "right": expr_to_json(b)}),
        Expr::Prj(p, x) => json!({"node": "prj", "path": p.to_string(), "body": expr_to_json(x)}),
        Expr::Roll { adt, body } => json!({"node": "roll", "adt": adt, "body": expr_to_json(body)}),
        Expr::Unroll(x) => json!({"node": "unroll", "body": expr_to_json(x)}),
        Expr::Match(t, x) => json!({"node": "match", "trace": trace_to_json(t), "body": expr_to_json(x)}),
        Expr::Case {
            scrutinee,
            branches,
        } => json!({
            "node": "case",
            "scrutinee": expr_to_json(scrutinee),
            "branches": branches
                .iter()
                .map(|(t, b)| json!([trace_to_json(t), expr_to_json(b)]))
                .collect::<Vec<_>>(),
        }),
        Expr::Let { name, bound, body } => json!({
            "node": "let",
            "name": name,
            "bound": expr_to_json(bound),
            "body": expr_to_json(body),
        }),
        Expr::Var(n, t) => json!({"node": "var", "name": n, "type": type_rep_to_json(t)}),
        Expr::Undef(t) => json!({"node": "undef", "type": type_rep_to_json(t)}),
        Expr::Prim(op, args) => json!({
            "node": "prim",
            "op": op.name(),
            "args": args.iter().map(expr_to_json).collect::<Vec<_>>(),
        }),
    }
}

pub fn expr_from_json(v: &Value) -> Result<Expr> {
    expr_at(At::root(v))
}

fn expr_at(at: At<'_>) -> Result<Expr> {
    let node = at.with("node", |n| n.str().map(str::to_string))?;
    let body = |key: &str| at.with(key, expr_at);
    Ok(match node.as_str() {
        "const" => Expr::Const(scalar_at(at)?),
        "unit" => Expr::Unit,
        "pair" => Expr::pair(body("left")?, body("right")?),
        "prj" => Expr::prj(at.with("path", |p| p.path_value())?, body("body")?),
        "roll" => Expr::roll(at.with("adt", |a| a.str().map(str::to_string))?, body("body")?),
        "unroll" => Expr::unroll(body("body")?),
        "match" => Expr::matching(at.with("trace", trace_at)?, body("body")?),
        "case" => Expr::case(
            body("scrutinee")?,
            at.with("branches", |bs| {
                bs.each(|b| {
                    b.tagged_pair()?;
                    Ok((b.nth(0, trace_at)?, b.nth(1, expr_at)?))
                })
            })?,
        ),
        "let" => Expr::let_in(
            at.with("name", |n| n.str().map(str::to_string))?,
            body("bound")?,
            body("body")?,
        ),
        "var" => Expr::var(
            at.with("name", |n| n.str().map(str::to_string))?,
            at.with("type", type_rep_at)?,
        ),
        "undef" => Expr::Undef(at.with("type", type_rep_at)?),
        "prim" => {
            let op = at.with("op", |o| {
                let s = o.str()?;
                PrimOp::from_name(s).ok_or_else(|| o.err(format!("unknown operator `{s}`")))
            })?;
            let args = at.with("args", |a| a.each(expr_at))?;
            if args.len() != 2 {
                return Err(at.err(format!("`{}` takes 2 arguments", op.name())));
            }
            Expr::prim(op, args)
        }
        other => return Err(at.err(format!("unknown node `{other}`"))),
    })
}

impl At<'_> {
    fn tagged_pair(&self) -> Result<()> {
        if self.array()?.len() == 2 {
            Ok(())
        } else {
            Err(self.err("expected a two-element array"))
        }
    }
}

pub fn core_to_json(e: &CoreExpr) -> Value {
    match e {
        CoreExpr::Const(s) => {
            let (kind, value) = scalar_fields(s);
            json!({"node": "const", "kind": kind, "value": value})
        }
        CoreExpr::Unit => json!({"node": "unit"}),
        CoreExpr::Pair(a, b) => json!({"node": "pair", "left": core_to_json(a), "right": core_to_json(b)}),
        CoreExpr::Prj(p, x) => json!({"node": "prj", "path": p.to_string(), "body": core_to_json(x)}),
        CoreExpr::Roll { adt, body } => json!({"node": "roll", "adt": adt, "body": core_to_json(body)}),
        CoreExpr::Unroll(x) => json!({"node": "unroll", "body": core_to_json(x)}),
        CoreExpr::Let { name, bound, body } => json!({
            "node": "let",
            "name": name,
            "bound": core_to_json(bound),
            "body": core_to_json(body),
        }),
        CoreExpr::Var(n, t) => json!({"node": "var", "name": n, "type": type_rep_to_json(t)}),
        CoreExpr::Undef(t) => json!({"node": "undef", "type": type_rep_to_json(t)}),
        CoreExpr::Prim(op, args) => json!({
            "node": "prim",
            "op": op.name(),
            "args": args.iter().map(core_to_json).collect::<Vec<_>>(),
        }),
        CoreExpr::Switch {
            scrutinee,
            tag_path,
            arms,
            default,
        } => json!({
            "node": "switch",
            "scrutinee": core_to_json(scrutinee),
            "path": tag_path.to_string(),
            "arms": arms.iter().map(|(k, a)| json!([k, core_to_json(a)])).collect::<Vec<_>>(),
            "default": default.as_deref().map(core_to_json),
        }),
    }
}

pub fn surface_value_to_json(v: &SurfaceValue) -> Value {
    match v {
        SurfaceValue::Scalar(s) => json!({"scalar": scalar_to_json(s)}),
        SurfaceValue::Con { adt, index, fields } => json!({"con": {
            "adt": adt,
            "index": index,
            "fields": fields.iter().map(surface_value_to_json).collect::<Vec<_>>(),
        }}),
        SurfaceValue::Tuple(items) => {
            json!({"tuple": items.iter().map(surface_value_to_json).collect::<Vec<_>>()})
        }
    }
}

pub fn surface_value_from_json(v: &Value) -> Result<SurfaceValue> {
    surface_value_at(At::root(v))
}

fn surface_value_at(at: At<'_>) -> Result<SurfaceValue> {
    let obj = at.object()?;
    if obj.len() != 1 {
        return Err(at.err("expected exactly one of `scalar`, `con`, `tuple`"));
    }
    if obj.contains_key("scalar") {
        at.with("scalar", |s| scalar_at(s).map(SurfaceValue::Scalar))
    } else if obj.contains_key("con") {
        at.with("con", |c| {
            Ok(SurfaceValue::Con {
                adt: c.with("adt", |a| a.str().map(str::to_string))?,
                index: c.with("index", |i| i.u32())?,
                fields: c.with("fields", |f| f.each(surface_value_at))?,
            })
        })
    } else if obj.contains_key("tuple") {
        at.with("tuple", |t| t.each(surface_value_at).map(SurfaceValue::Tuple))
    } else {
        Err(at.err("expected one of `scalar`, `con`, `tuple`"))
    }
}

pub fn surface_type_to_json(t: &SurfaceType) -> Value {
    match t {
        SurfaceType::Prim(p) => json!(p.name()),
        SurfaceType::Adt(n) => json!({"adt": n}),
        SurfaceType::Tuple(ts) => json!({"tuple": ts.iter().map(surface_type_to_json).collect::<Vec<_>>()}),
    }
}

pub fn surface_type_from_json(v: &Value) -> Result<SurfaceType> {
    surface_type_at(At::root(v))
}

fn surface_type_at(at: At<'_>) -> Result<SurfaceType> {
    if let Value::String(s) = at.v {
        return match PrimType::from_name(s) {
            Some(p) if p != PrimType::Tag => Ok(SurfaceType::Prim(p)),
            _ => Err(at.err(format!("unknown field type `{s}`"))),
        };
    }
    let obj = at.object()?;
    if obj.contains_key("adt") {
        at.with("adt", |a| a.str().map(SurfaceType::adt))
    } else if obj.contains_key("tuple") {
        at.with("tuple", |t| t.each(surface_type_at).map(SurfaceType::Tuple))
    } else {
        Err(at.err("expected a type reference"))
    }
}

pub fn adt_decl_to_json(d: &AdtDecl) -> Value {
    json!({
        "name": d.name,
        "constructors": d.constructors.iter().map(|c| json!({
            "name": c.name,
            "fields": c.fields.iter().map(surface_type_to_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn adt_decl_from_json(v: &Value) -> Result<AdtDecl> {
    let at = At::root(v);
    Ok(AdtDecl::new(
        at.with("name", |n| n.str().map(str::to_string))?,
        at.with("constructors", |cs| {
            cs.each(|c| {
                Ok(ConDecl::new(
                    c.with("name", |n| n.str().map(str::to_string))?,
                    c.with("fields", |f| f.each(surface_type_at))?,
                ))
            })
        })?,
    ))
}
