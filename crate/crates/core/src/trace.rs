//! Traces: witnesses of one complete pathway of constructor choices through
//! every nested sub-pattern of a type.
//!
//! `Tag` nodes record which constructor was chosen at a sum; the remaining
//! node kinds only witness structure. Recursive positions are opaque (`Rec`)
//! and never descended into, so every type has a finite trace set.

use std::fmt;

use crate::ast::{PairPath, Side};
use crate::error::{Error, Result};
use crate::types::{AdtRegistry, PrimType, RepValue, SurfaceValue, TypeRep};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Trace {
    Unit,
    Prim(PrimType),
    Pair(Box<Trace>, Box<Trace>),
    Rec,
    Tag(u32, Box<Trace>),
}

impl Trace {
    pub fn pair(left: Trace, right: Trace) -> Self {
        Trace::Pair(Box::new(left), Box::new(right))
    }

    pub fn tag(k: u32, fields: Trace) -> Self {
        Trace::Tag(k, Box::new(fields))
    }

    pub fn spine(items: impl IntoIterator<Item = Trace>) -> Self {
        items.into_iter().fold(Trace::Unit, Trace::pair)
    }

    /// Splits a unit-rooted spine into `n` items.
    pub fn unspine(&self, n: usize) -> Option<Vec<&Trace>> {
        let mut items = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n {
            let Trace::Pair(l, r) = cur else { return None };
            items.push(&**r);
            cur = l;
        }
        matches!(cur, Trace::Unit).then(|| {
            items.reverse();
            items
        })
    }

    /// The sub-trace at `path`. A `Tag` node counts as the pair
    /// `(tag, fields)`.
    pub fn at(&self, path: &PairPath) -> Option<&Trace> {
        let mut cur = self;
        for side in path.steps() {
            cur = match (cur, side) {
                (Trace::Pair(l, _), Side::Left) => l,
                (Trace::Pair(_, r), Side::Right) => r,
                (Trace::Tag(_, f), Side::Right) => f,
                _ => return None,
            };
        }
        Some(cur)
    }

    pub fn conforms(&self, t: &TypeRep) -> bool {
        match (self, t) {
            (Trace::Unit, TypeRep::Unit) => true,
            (Trace::Prim(p), TypeRep::Prim(q)) => p == q,
            (Trace::Rec, TypeRep::Rec(_)) => true,
            (Trace::Tag(k, f), _) => match t {
                TypeRep::Sum { info, fields } => {
                    (*k as usize) < info.constructor_count() && f.conforms(fields)
                }
                TypeRep::Pair(l, r) => **l == TypeRep::Prim(PrimType::Tag) && f.conforms(r),
                _ => false,
            },
            (Trace::Pair(a, b), _) => match t.as_pair() {
                Some((l, r)) => a.conforms(l) && b.conforms(r),
                None => false,
            },
            _ => false,
        }
    }

    /// Whether the trace contains any constructor choice.
    pub fn has_tag(&self) -> bool {
        match self {
            Trace::Tag(..) => true,
            Trace::Pair(a, b) => a.has_tag() || b.has_tag(),
            _ => false,
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trace::Unit => f.write_str("()"),
            Trace::Prim(p) => f.write_str(p.name()),
            Trace::Rec => f.write_str("rec"),
            Trace::Pair(a, b) => write!(f, "({a}, {b})"),
            Trace::Tag(k, fields) => write!(f, "#{k}{fields}"),
        }
    }
}

/// The single trace that records no constructor choice: it matches every
/// value of `t`. Used for field slots of constructors that were not chosen.
pub fn witness(t: &TypeRep) -> Trace {
    match t {
        TypeRep::Unit => Trace::Unit,
        TypeRep::Prim(p) => Trace::Prim(*p),
        TypeRep::Rec(_) => Trace::Rec,
        TypeRep::Pair(l, r) => Trace::pair(witness(l), witness(r)),
        TypeRep::Sum { fields, .. } => Trace::pair(Trace::Prim(PrimType::Tag), witness(fields)),
    }
}

/// All traces of a type, in a fixed order: constructors in declaration order,
/// then Cartesian products with the left component varying slowest.
pub fn enumerate_traces(t: &TypeRep) -> Vec<Trace> {
    match t {
        TypeRep::Unit => vec![Trace::Unit],
        TypeRep::Prim(p) => vec![Trace::Prim(*p)],
        TypeRep::Rec(_) => vec![Trace::Rec],
        TypeRep::Pair(l, r) => {
            let rights = enumerate_traces(r);
            let mut out = Vec::new();
            for a in enumerate_traces(l) {
                for b in &rights {
                    out.push(Trace::pair(a.clone(), b.clone()));
                }
            }
            out
        }
        TypeRep::Sum { info, fields } => {
            let slots = fields
                .unspine(info.slot_count())
                .expect("sum fields form a spine");
            let mut out = Vec::new();
            for k in 0..info.constructor_count() {
                let mine = info.slots_of(k);
                let choices: Vec<Vec<Trace>> = slots
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        if mine.contains(&i) {
                            enumerate_traces(s)
                        } else {
                            vec![witness(s)]
                        }
                    })
                    .collect();
                out.extend(
                    cartesian(&choices)
                        .into_iter()
                        .map(|items| Trace::tag(k as u32, Trace::spine(items))),
                );
            }
            out
        }
    }
}

fn cartesian(choices: &[Vec<Trace>]) -> Vec<Vec<Trace>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect()
    })
}

/// The trace selected by a host value.
pub fn trace_of_value(v: &SurfaceValue, registry: &AdtRegistry) -> Result<Trace> {
    let ty = registry.type_of_value(v)?;
    let rep = registry.repr_of(&ty)?;
    trace_of_rep(&registry.lift_at(v, &ty)?, &rep)
}

/// The trace selected by a representation value of type `t`.
pub fn trace_of_rep(v: &RepValue, t: &TypeRep) -> Result<Trace> {
    match t {
        TypeRep::Unit => Ok(Trace::Unit),
        TypeRep::Prim(p) => Ok(Trace::Prim(*p)),
        TypeRep::Rec(_) => Ok(Trace::Rec),
        TypeRep::Pair(l, r) => {
            let (vl, vr) = v.as_pair()?;
            Ok(Trace::pair(trace_of_rep(vl, l)?, trace_of_rep(vr, r)?))
        }
        TypeRep::Sum { info, fields } => {
            let (tag, vfields) = v.as_pair()?;
            let k = tag.read_tag()?;
            if k as usize >= info.constructor_count() {
                return Err(Error::BadTag {
                    adt: info.adt.clone(),
                    tag: k,
                    count: info.constructor_count(),
                });
            }
            let n = info.slot_count();
            let slot_types = fields.unspine(n).expect("sum fields form a spine");
            let slot_values = vfields.unspine(n)?;
            let mine = info.slots_of(k as usize);
            let items = slot_types
                .into_iter()
                .zip(slot_values)
                .enumerate()
                .map(|(i, (st, sv))| {
                    if mine.contains(&i) {
                        trace_of_rep(sv, st)
                    } else {
                        Ok(witness(st))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Trace::tag(k, Trace::spine(items)))
        }
    }
}

/// Whether a value follows the pathway a trace describes. Only the tags the
/// trace inspects are read; reading a poisoned tag is an error.
pub fn trace_matches(tr: &Trace, v: &RepValue) -> Result<bool> {
    match tr {
        Trace::Unit | Trace::Prim(_) | Trace::Rec => Ok(true),
        Trace::Pair(a, b) => {
            let (vl, vr) = v.as_pair()?;
            Ok(trace_matches(a, vl)? && trace_matches(b, vr)?)
        }
        Trace::Tag(k, fields) => {
            let (tag, vfields) = v.as_pair()?;
            if tag.read_tag()? != *k {
                return Ok(false);
            }
            trace_matches(fields, vfields)
        }
    }
}
