mod common;

use proptest::prelude::*;

use embedded_match::ast::{structural_eq, Expr, PairPath, PrimOp};
use embedded_match::eval::{eval, ValueEnv};
use embedded_match::json::{
    expr_from_json, expr_to_json, surface_value_from_json, surface_value_to_json,
};
use embedded_match::lower::{eval_core, lower_expr, lower_expr_with, CoreExpr, LowerOptions};
use embedded_match::matcher::{match_fn, EmbeddedFn};
use embedded_match::pattern::{match_con, ConRef};
use embedded_match::programs::example_registry;
use embedded_match::trace::{enumerate_traces, trace_matches, trace_of_value, Trace};
use embedded_match::types::{AdtRegistry, PrimType, Scalar, SurfaceType, SurfaceValue, TypeRep};

fn float() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO | prop::num::f64::INFINITE,
        Just(f64::NAN),
    ]
}

/// A value together with its surface type, drawn from the example types.
fn typed_value() -> impl Strategy<Value = (SurfaceType, SurfaceValue)> {
    let leaf = prop_oneof![
        float().prop_map(|x| (SurfaceType::Prim(PrimType::F64), common::f(x))),
        any::<i64>().prop_map(|x| (SurfaceType::Prim(PrimType::I64), SurfaceValue::i64(x))),
        any::<bool>().prop_map(|b| (SurfaceType::adt("Bool"), common::boolean(b))),
        proptest::option::of(float()).prop_map(|m| (SurfaceType::adt("MaybeF64"), common::maybe_f64(m))),
        proptest::option::of(any::<bool>()).prop_map(|m| (SurfaceType::adt("MaybeBool"), common::maybe_bool(m))),
        (any::<bool>(), any::<bool>()).prop_map(|(l, b)| {
            let e = if l { common::Either::Left(b) } else { common::Either::Right(b) };
            (SurfaceType::adt("EitherBoolBool"), common::either(e))
        }),
        (float(), float()).prop_map(|p| (SurfaceType::adt("Point"), common::point(p))),
        prop::collection::vec(float(), 0..6).prop_map(|xs| (SurfaceType::adt("ListF64"), common::list(&xs))),
    ];
    leaf.prop_recursive(2, 12, 3, |inner| {
        prop::collection::vec(inner, 1..4).prop_map(|items| {
            let (ts, vs) = items.into_iter().unzip();
            (SurfaceType::Tuple(ts), SurfaceValue::Tuple(vs))
        })
    })
}

/// Types whose values can be listed exhaustively.
fn finite_type() -> impl Strategy<Value = SurfaceType> {
    let leaf = prop_oneof![
        Just(SurfaceType::adt("Bool")),
        Just(SurfaceType::adt("MaybeBool")),
        Just(SurfaceType::adt("EitherBoolBool")),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| prop::collection::vec(inner, 1..4).prop_map(SurfaceType::Tuple))
}

/// Every value of a finite type, built from host enumerations.
fn all_values(t: &SurfaceType) -> Vec<SurfaceValue> {
    match t {
        SurfaceType::Adt(n) if n == "Bool" => common::BOOLS.iter().map(|b| common::boolean(*b)).collect(),
        SurfaceType::Adt(n) if n == "MaybeBool" => common::maybe_bools().into_iter().map(common::maybe_bool).collect(),
        SurfaceType::Adt(n) if n == "EitherBoolBool" => common::eithers().into_iter().map(common::either).collect(),
        SurfaceType::Tuple(ts) => ts.iter().fold(vec![vec![]], |acc, t| {
            let vs = all_values(t);
            acc.into_iter()
                .flat_map(|prefix: Vec<SurfaceValue>| {
                    vs.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v.clone());
                        next
                    })
                })
                .collect()
        })
        .into_iter()
        .map(SurfaceValue::Tuple)
        .collect(),
        other => panic!("not a finite test type: {other}"),
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let names = prop::sample::select(vec!["a", "b", "c"]);
    let leaf = prop_oneof![
        float().prop_map(Expr::f64),
        any::<i64>().prop_map(Expr::i64),
        any::<u32>().prop_map(Expr::tag),
        Just(Expr::Unit),
        names.clone().prop_map(|n| Expr::var(n, TypeRep::Prim(PrimType::F64))),
        Just(Expr::Undef(TypeRep::bool_rep())),
        Just(Expr::Undef(TypeRep::Rec("ListF64".into()))),
    ];
    leaf.prop_recursive(4, 40, 3, move |inner| {
        let trace = prop_oneof![
            Just(Trace::Unit),
            Just(Trace::Rec),
            (0u32..3).prop_map(|k| Trace::tag(k, Trace::pair(Trace::Unit, Trace::Prim(PrimType::F64)))),
        ];
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::pair(a, b)),
            ("[LR]{0,4}", inner.clone()).prop_map(|(p, e)| Expr::prj(PairPath::parse(&p).unwrap(), e)),
            inner.clone().prop_map(|e| Expr::roll("ListF64", e)),
            inner.clone().prop_map(Expr::unroll),
            (trace.clone(), inner.clone()).prop_map(|(t, e)| Expr::matching(t, e)),
            (inner.clone(), prop::collection::vec((trace, inner.clone()), 1..3))
                .prop_map(|(s, bs)| Expr::case(s, bs)),
            (names.clone(), inner.clone(), inner.clone()).prop_map(|(n, b, e)| Expr::let_in(n, b, e)),
            (prop::sample::select(PrimOp::ALL.to_vec()), inner.clone(), inner)
                .prop_map(|(op, a, b)| Expr::binop(op, a, b)),
        ]
    })
}

/// Renames every let binder (and its bound occurrences) by appending `'`.
fn rename(e: &Expr, scope: &mut Vec<String>) -> Expr {
    match e {
        Expr::Let { name, bound, body } => {
            let b = rename(bound, scope);
            scope.push(name.clone());
            let r = rename(body, scope);
            scope.pop();
            Expr::let_in(format!("{name}'"), b, r)
        }
        Expr::Var(n, t) if scope.contains(n) => Expr::var(format!("{n}'"), t.clone()),
        Expr::Pair(a, b) => Expr::pair(rename(a, scope), rename(b, scope)),
        Expr::Prj(p, x) => Expr::prj(p.clone(), rename(x, scope)),
        Expr::Roll { adt, body } => Expr::roll(adt.clone(), rename(body, scope)),
        Expr::Unroll(x) => Expr::unroll(rename(x, scope)),
        Expr::Match(t, x) => Expr::matching(t.clone(), rename(x, scope)),
        Expr::Case { scrutinee, branches } => Expr::case(
            rename(scrutinee, scope),
            branches.iter().map(|(t, b)| (t.clone(), rename(b, scope))).collect(),
        ),
        Expr::Prim(op, args) => Expr::prim(*op, args.iter().map(|a| rename(a, scope)).collect()),
        other => other.clone(),
    }
}

fn max_arms(e: &CoreExpr) -> usize {
    match e {
        CoreExpr::Switch { arms, default, scrutinee, .. } => arms
            .iter()
            .map(|(_, a)| max_arms(a))
            .chain(default.as_deref().map(max_arms))
            .chain([arms.len(), max_arms(scrutinee)])
            .max()
            .unwrap_or(0),
        CoreExpr::Let { bound, body, .. } => max_arms(bound).max(max_arms(body)),
        _ => 0,
    }
}

fn decode_bool(arg: &Expr, reg: &AdtRegistry) -> bool {
    let truth = ConRef::new(reg, "Bool", "True").unwrap();
    match_con(&truth, arg, reg).unwrap().is_some()
}

/// Host-side decoding of a `MaybeBool` match proxy, index into its domain.
fn decode_maybe_bool(arg: &Expr, reg: &AdtRegistry) -> usize {
    let just = ConRef::new(reg, "MaybeBool", "Just").unwrap();
    match match_con(&just, arg, reg).unwrap() {
        None => 0,
        Some(fields) => 1 + usize::from(decode_bool(&fields[0], reg)),
    }
}

fn decode_either(arg: &Expr, reg: &AdtRegistry) -> usize {
    let left = ConRef::new(reg, "EitherBoolBool", "Left").unwrap();
    let right = ConRef::new(reg, "EitherBoolBool", "Right").unwrap();
    if let Some(fields) = match_con(&left, arg, reg).unwrap() {
        return usize::from(decode_bool(&fields[0], reg));
    }
    let fields = match_con(&right, arg, reg).unwrap().unwrap();
    2 + usize::from(decode_bool(&fields[0], reg))
}

proptest! {
    #[test]
    fn lift_then_lower_is_identity((ty, v) in typed_value()) {
        let reg = example_registry();
        let rep = reg.lift_at(&v, &ty).unwrap();
        prop_assert!(reg.conforms(&rep, &reg.repr_of(&ty).unwrap()));
        prop_assert_eq!(reg.lower(&rep, &ty).unwrap(), v);
    }

    #[test]
    fn surface_value_json_round_trip((_, v) in typed_value()) {
        let back = surface_value_from_json(&surface_value_to_json(&v)).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn expr_json_round_trip(e in expr()) {
        let text = expr_to_json(&e).to_string();
        let back = expr_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert!(structural_eq(&back, &e), "{} vs {}", back, e);
        prop_assert_eq!(back, e);
    }

    #[test]
    fn structural_eq_is_alpha_equivalence(e in expr(), f in expr()) {
        let renamed = rename(&e, &mut Vec::new());
        prop_assert!(structural_eq(&e, &e));
        prop_assert!(structural_eq(&e, &renamed));
        prop_assert!(structural_eq(&renamed, &e));
        prop_assert_eq!(structural_eq(&e, &f), structural_eq(&f, &e));
        let changed = Expr::pair(e.clone(), Expr::Unit);
        prop_assert!(!structural_eq(&e, &changed));
    }

    #[test]
    fn traces_biject_with_finite_values(ty in finite_type()) {
        let reg = example_registry();
        let rep = reg.repr_of(&ty).unwrap();
        let traces = enumerate_traces(&rep);
        let values = all_values(&ty);
        prop_assert_eq!(traces.len(), values.len());
        for (i, a) in traces.iter().enumerate() {
            prop_assert!(a.conforms(&rep));
            prop_assert!(traces[..i].iter().all(|b| b != a));
        }
        for v in &values {
            let lifted = reg.lift_at(v, &ty).unwrap();
            let hits: Vec<&Trace> = traces
                .iter()
                .filter(|t| trace_matches(t, &lifted).unwrap())
                .collect();
            prop_assert_eq!(hits.len(), 1);
            prop_assert_eq!(hits[0], &trace_of_value(v, &reg).unwrap());
        }
    }

    #[test]
    fn exactly_one_trace_matches_any_value((ty, v) in typed_value()) {
        let reg = example_registry();
        let rep = reg.repr_of(&ty).unwrap();
        let lifted = reg.lift_at(&v, &ty).unwrap();
        let hits = enumerate_traces(&rep)
            .iter()
            .filter(|t| trace_matches(t, &lifted).unwrap())
            .count();
        prop_assert_eq!(hits, 1);
    }

    #[test]
    fn lowering_preserves_meaning(ty in finite_type(), seed in prop::collection::vec(0i64..3, 64)) {
        let reg = example_registry();
        let rep = reg.repr_of(&ty).unwrap();
        let traces = enumerate_traces(&rep);
        let branches = traces
            .iter()
            .zip(seed.iter().cycle())
            .map(|(t, k)| (t.clone(), Expr::i64(*k)))
            .collect();
        let e = Expr::case(Expr::var("x", rep), branches);
        let with = lower_expr(&e, &reg).unwrap();
        let without = lower_expr_with(&e, &reg, LowerOptions { dedup: false }).unwrap();
        prop_assert!(max_arms(&with) <= 2 && max_arms(&without) <= 2);
        for v in all_values(&ty) {
            let mut env = ValueEnv::new();
            env.bind("x", reg.lift_at(&v, &ty).unwrap());
            let expected = eval(&e, &env).unwrap();
            prop_assert_eq!(eval_core(&with, &env).unwrap(), expected.clone());
            prop_assert_eq!(eval_core(&without, &env).unwrap(), expected);
        }
    }

    #[test]
    fn matched_tables_reproduce_host_tables(table in prop::collection::vec(-2i64..3, 12)) {
        let reg = example_registry();
        let (r, t) = (reg.clone(), table.clone());
        let f = EmbeddedFn::new(
            vec![SurfaceType::adt("MaybeBool"), SurfaceType::adt("EitherBoolBool")],
            move |args| {
                let i = decode_maybe_bool(&args[0], &r) * 4 + decode_either(&args[1], &r);
                Ok(Expr::i64(t[i]))
            },
        );
        let g = match_fn(&f, &reg).unwrap();
        let m = Expr::var("m", reg.repr_of(&SurfaceType::adt("MaybeBool")).unwrap());
        let e = Expr::var("e", reg.repr_of(&SurfaceType::adt("EitherBoolBool")).unwrap());
        let body = g.call(&[m, e]).unwrap();
        let core = lower_expr(&body, &reg).unwrap();
        for (i, mv) in common::maybe_bools().into_iter().enumerate() {
            for (j, ev) in common::eithers().into_iter().enumerate() {
                let mut env = ValueEnv::new();
                env.bind("m", reg.lift(&common::maybe_bool(mv)).unwrap());
                env.bind("e", reg.lift(&common::either(ev)).unwrap());
                let want = embedded_match::types::RepValue::prim(Scalar::I64(table[i * 4 + j]));
                prop_assert_eq!(eval(&body, &env).unwrap(), want.clone());
                prop_assert_eq!(eval_core(&core, &env).unwrap(), want);
            }
        }
    }
}
