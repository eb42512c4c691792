//! Builders and matchers for constructors and tuples.
//!
//! A builder assembles the representation of a constructor application. A
//! matcher goes the other way, but it cannot look at the runtime value: it
//! only inspects the `Match` proxy wrapped around its argument and answers
//! whether the trace in that proxy selects its constructor. On success it
//! hands back projections of the fields, each wrapped in a `Match` carrying
//! the field's sub-trace so nested patterns keep working. Builder and matcher
//! are not syntactic inverses; they agree only under evaluation.

use crate::ast::{type_of_open, Expr, PairPath, Side};
use crate::error::{Error, Result};
use crate::trace::Trace;
use crate::types::{AdtRegistry, SurfaceType, SurfaceValue, TypeRep};

/// A constructor of a registered ADT.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConRef {
    pub adt: String,
    pub index: u32,
}

impl ConRef {
    /// Resolves `adt::con` by name.
    pub fn new(registry: &AdtRegistry, adt: &str, con: &str) -> Result<Self> {
        Ok(ConRef {
            adt: adt.to_string(),
            index: registry.constructor(adt, con)?,
        })
    }
}

struct Layout {
    /// Representation of each field slot; for sums, all constructors' slots.
    slot_types: Vec<TypeRep>,
    /// Slots owned by the referenced constructor.
    own: std::ops::Range<usize>,
    /// Path prefix from the value to its field spine.
    prefix: PairPath,
    sum: bool,
}

impl Layout {
    fn of(c: &ConRef, registry: &AdtRegistry) -> Result<Self> {
        let decl = registry.get(&c.adt)?;
        if c.index as usize >= decl.constructors.len() {
            return Err(Error::BadTag {
                adt: c.adt.clone(),
                tag: c.index,
                count: decl.constructors.len(),
            });
        }
        let repr = registry.repr_of(&SurfaceType::Adt(c.adt.clone()))?;
        Ok(match &repr {
            TypeRep::Sum { info, fields } => Layout {
                slot_types: fields
                    .unspine(info.slot_count())
                    .expect("sum fields form a spine")
                    .into_iter()
                    .cloned()
                    .collect(),
                own: info.slots_of(c.index as usize),
                prefix: PairPath::here().then(Side::Right),
                sum: true,
            },
            product => {
                let n = decl.constructors[0].fields.len();
                Layout {
                    slot_types: product
                        .unspine(n)
                        .expect("product is a spine")
                        .into_iter()
                        .cloned()
                        .collect(),
                    own: 0..n,
                    prefix: PairPath::here(),
                    sum: false,
                }
            }
        })
    }

    fn slot_path(&self, i: usize) -> PairPath {
        self.prefix
            .join(&PairPath::spine_slot(self.slot_types.len(), i))
    }

    /// Field projections out of `inner`, each wrapped with its sub-trace.
    /// Recursive fields are unrolled and left unwrapped, so they cannot be
    /// matched on directly.
    fn fields(&self, inner: &Expr, subtraces: Option<&[&Trace]>) -> Vec<Expr> {
        self.own
            .clone()
            .map(|i| {
                let field = Expr::prj(self.slot_path(i), inner.clone());
                match (&self.slot_types[i], subtraces) {
                    (TypeRep::Rec(_), _) => Expr::unroll(field),
                    (_, Some(ts)) => Expr::matching(ts[i].clone(), field),
                    (_, None) => field,
                }
            })
            .collect()
    }
}

/// Builds constructor `c` applied to `args`.
///
/// Sums pair a literal tag with every constructor's field slots; slots that
/// belong to other constructors are `Undef`. Recursive arguments are rolled.
pub fn build_con(c: &ConRef, args: Vec<Expr>, registry: &AdtRegistry) -> Result<Expr> {
    let layout = Layout::of(c, registry)?;
    if args.len() != layout.own.len() {
        return Err(Error::ArityMismatch {
            expected: layout.own.len(),
            found: args.len(),
        });
    }
    let mut args = args.into_iter();
    let mut items = Vec::with_capacity(layout.slot_types.len());
    for (i, slot) in layout.slot_types.iter().enumerate() {
        if !layout.own.contains(&i) {
            items.push(Expr::Undef(slot.clone()));
            continue;
        }
        let arg = args.next().expect("arity checked");
        let (expected, roll) = match slot {
            TypeRep::Rec(adt) => (registry.repr_of(&SurfaceType::Adt(adt.clone()))?, true),
            t => (t.clone(), false),
        };
        let found = type_of_open(&arg, registry)?;
        if found != expected {
            return Err(Error::TypeMismatch(format!(
                "argument {} of constructor {}#{} has type {found}, expected {expected}",
                i - layout.own.start,
                c.adt,
                c.index
            )));
        }
        items.push(if roll { Expr::roll(c.adt.clone(), arg) } else { arg });
    }
    let fields = Expr::spine(items);
    Ok(if layout.sum {
        Expr::pair(Expr::tag(c.index), fields)
    } else {
        fields
    })
}

/// Matches constructor `c` against a `Match`-wrapped scrutinee.
///
/// Returns `None` when the proxy's trace selects another constructor and the
/// field terms when it selects `c`. Single-constructor types never need to
/// inspect anything, so they also accept plain terms.
pub fn match_con(c: &ConRef, scrutinee: &Expr, registry: &AdtRegistry) -> Result<Option<Vec<Expr>>> {
    let layout = Layout::of(c, registry)?;
    let n = layout.slot_types.len();
    match scrutinee {
        Expr::Match(Trace::Rec, _) | Expr::Unroll(_) => Err(Error::RecursiveSubPattern),
        Expr::Match(tr, inner) if layout.sum => {
            let Trace::Tag(k, fields) = tr else {
                return Err(trace_mismatch(tr, c));
            };
            if *k != c.index {
                return Ok(None);
            }
            let subtraces = fields.unspine(n).ok_or_else(|| trace_mismatch(tr, c))?;
            Ok(Some(layout.fields(inner, Some(&subtraces))))
        }
        Expr::Match(tr, inner) => {
            let subtraces = tr.unspine(n).ok_or_else(|| trace_mismatch(tr, c))?;
            Ok(Some(layout.fields(inner, Some(&subtraces))))
        }
        plain if !layout.sum => Ok(Some(layout.fields(plain, None))),
        _ => Err(Error::MatchOutsideContext),
    }
}

fn trace_mismatch(tr: &Trace, c: &ConRef) -> Error {
    Error::TypeMismatch(format!("trace {tr} does not describe `{}`", c.adt))
}

pub fn build_tuple(args: Vec<Expr>) -> Expr {
    Expr::spine(args)
}

/// Component projections of an `arity`-tuple. Inside a match context the
/// sub-traces are propagated to the components.
pub fn match_tuple(scrutinee: &Expr, arity: usize) -> Result<Vec<Expr>> {
    let component = |i: usize, of: &Expr| Expr::prj(PairPath::spine_slot(arity, i), of.clone());
    match scrutinee {
        Expr::Match(tr, inner) => {
            let subs = tr.unspine(arity).ok_or_else(|| {
                Error::TypeMismatch(format!("trace {tr} does not describe a {arity}-tuple"))
            })?;
            Ok(subs
                .into_iter()
                .enumerate()
                .map(|(i, s)| Expr::matching(s.clone(), component(i, inner)))
                .collect())
        }
        plain => {
            let registry = AdtRegistry::new();
            if let Ok(t) = type_of_open(plain, &registry) {
                if t.unspine(arity).is_none() {
                    return Err(Error::TypeMismatch(format!(
                        "{t} is not a {arity}-tuple"
                    )));
                }
            }
            Ok((0..arity).map(|i| component(i, plain)).collect())
        }
    }
}

/// Embeds a host value as a closed term built from constructors.
pub fn lift_expr(v: &SurfaceValue, registry: &AdtRegistry) -> Result<Expr> {
    match v {
        SurfaceValue::Scalar(s) => Ok(Expr::Const(*s)),
        SurfaceValue::Tuple(vs) => Ok(build_tuple(
            vs.iter()
                .map(|v| lift_expr(v, registry))
                .collect::<Result<_>>()?,
        )),
        SurfaceValue::Con { adt, index, fields } => {
            let c = ConRef {
                adt: adt.clone(),
                index: *index,
            };
            let args = fields
                .iter()
                .map(|v| lift_expr(v, registry))
                .collect::<Result<_>>()?;
            build_con(&c, args, registry)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::enumerate_traces;
    use crate::types::{AdtDecl, ConDecl, PrimType};

    fn f64t() -> SurfaceType {
        SurfaceType::Prim(PrimType::F64)
    }

    fn f64_rep() -> TypeRep {
        TypeRep::Prim(PrimType::F64)
    }

    fn registry() -> AdtRegistry {
        let mut reg = AdtRegistry::with_prelude();
        for decl in [
            AdtDecl::new(
                "MaybeF64",
                vec![ConDecl::new("Nothing", vec![]), ConDecl::new("Just", vec![f64t()])],
            ),
            AdtDecl::new(
                "ListF64",
                vec![
                    ConDecl::new("Nil", vec![]),
                    ConDecl::new("Cons", vec![f64t(), SurfaceType::adt("ListF64")]),
                ],
            ),
            AdtDecl::new("Point", vec![ConDecl::new("Point", vec![f64t(), f64t()])]),
        ] {
            reg.register(decl).unwrap();
        }
        reg
    }

    fn path(s: &str) -> PairPath {
        PairPath::parse(s).unwrap()
    }

    #[test]
    fn build_just_and_nothing() {
        let reg = registry();
        let just = ConRef::new(&reg, "MaybeF64", "Just").unwrap();
        let nothing = ConRef::new(&reg, "MaybeF64", "Nothing").unwrap();
        let x = Expr::var("x", f64_rep());
        assert_eq!(
            build_con(&just, vec![x.clone()], &reg).unwrap(),
            Expr::pair(Expr::tag(1), Expr::pair(Expr::Unit, x.clone()))
        );
        assert_eq!(
            build_con(&nothing, vec![], &reg).unwrap(),
            Expr::pair(Expr::tag(0), Expr::pair(Expr::Unit, Expr::Undef(f64_rep())))
        );
        assert!(matches!(
            build_con(&just, vec![], &reg),
            Err(Error::ArityMismatch { expected: 1, found: 0 })
        ));
        assert!(matches!(
            build_con(&just, vec![Expr::i64(3)], &reg),
            Err(Error::TypeMismatch(_))
        ));
    }

    #[test]
    fn build_cons_rolls_the_tail() {
        let reg = registry();
        let cons = ConRef::new(&reg, "ListF64", "Cons").unwrap();
        let nil = build_con(&ConRef::new(&reg, "ListF64", "Nil").unwrap(), vec![], &reg).unwrap();
        let e = build_con(&cons, vec![Expr::f64(1.0), nil.clone()], &reg).unwrap();
        assert_eq!(
            e,
            Expr::pair(
                Expr::tag(1),
                Expr::spine([Expr::f64(1.0), Expr::roll("ListF64", nil)])
            )
        );
    }

    #[test]
    fn match_just_success_and_failure() {
        let reg = registry();
        let just = ConRef::new(&reg, "MaybeF64", "Just").unwrap();
        let a = Expr::var("a", reg.repr_of(&SurfaceType::adt("MaybeF64")).unwrap());
        let s = Trace::Prim(PrimType::F64);
        let hit = Expr::matching(Trace::tag(1, Trace::pair(Trace::Unit, s.clone())), a.clone());
        assert_eq!(
            match_con(&just, &hit, &reg).unwrap(),
            Some(vec![Expr::matching(s.clone(), Expr::prj(path("RR"), a.clone()))])
        );
        let miss = Expr::matching(Trace::tag(0, Trace::pair(Trace::Unit, s)), a.clone());
        assert_eq!(match_con(&just, &miss, &reg).unwrap(), None);
        assert_eq!(match_con(&just, &a, &reg), Err(Error::MatchOutsideContext));
    }

    #[test]
    fn match_cons_unrolls_tail_without_match() {
        let reg = registry();
        let cons = ConRef::new(&reg, "ListF64", "Cons").unwrap();
        let list = reg.repr_of(&SurfaceType::adt("ListF64")).unwrap();
        let a = Expr::var("a", list.clone());
        let tr = enumerate_traces(&list)[1].clone();
        let fields = match_con(&cons, &Expr::matching(tr, a.clone()), &reg)
            .unwrap()
            .unwrap();
        assert_eq!(
            fields,
            vec![
                Expr::matching(Trace::Prim(PrimType::F64), Expr::prj(path("RLR"), a.clone())),
                Expr::unroll(Expr::prj(path("RR"), a)),
            ]
        );
        assert_eq!(
            match_con(&cons, &fields[1], &reg),
            Err(Error::RecursiveSubPattern)
        );
        assert_eq!(
            match_con(&cons, &Expr::matching(Trace::Rec, fields[1].clone()), &reg),
            Err(Error::RecursiveSubPattern)
        );
    }

    #[test]
    fn products_match_with_or_without_context() {
        let reg = registry();
        let point = ConRef::new(&reg, "Point", "Point").unwrap();
        let p = Expr::var("p", reg.repr_of(&SurfaceType::adt("Point")).unwrap());
        assert_eq!(
            match_con(&point, &p, &reg).unwrap(),
            Some(vec![
                Expr::prj(path("LR"), p.clone()),
                Expr::prj(path("R"), p.clone())
            ])
        );
        assert_eq!(
            match_tuple(&p, 2).unwrap(),
            vec![Expr::prj(path("LR"), p.clone()), Expr::prj(path("R"), p.clone())]
        );
        let f = Trace::Prim(PrimType::F64);
        let wrapped = Expr::matching(Trace::spine([f.clone(), f.clone()]), p.clone());
        assert_eq!(
            match_tuple(&wrapped, 2).unwrap(),
            vec![
                Expr::matching(f.clone(), Expr::prj(path("LR"), p.clone())),
                Expr::matching(f, Expr::prj(path("R"), p.clone())),
            ]
        );
        assert!(matches!(match_tuple(&p, 3), Err(Error::TypeMismatch(_))));
        assert!(matches!(match_tuple(&wrapped, 1), Err(Error::TypeMismatch(_))));
    }

    #[test]
    fn build_tuple_shape() {
        let x = Expr::var("x", f64_rep());
        let y = Expr::var("y", f64_rep());
        assert_eq!(
            build_tuple(vec![x.clone(), y.clone()]),
            Expr::pair(Expr::pair(Expr::Unit, x), y)
        );
        assert_eq!(build_tuple(vec![]), Expr::Unit);
    }
}
