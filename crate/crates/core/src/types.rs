//! ADT schemas and their representation types.
//!
//! Every surface type is encoded into a closed set of representation types:
//! unit, primitives, binary pairs and recursion markers. Products become
//! unit-rooted left-nested pairs of their fields. Sums become a pair of a
//! constructor tag and the flat concatenation of *all* constructors' fields,
//! so every value of a sum has the same shape regardless of which constructor
//! it holds. Field slots that belong to other constructors are filled with
//! undefined (poisoned) values.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimType {
    I64,
    F64,
    /// Constructor tag of a sum type.
    Tag,
}

impl PrimType {
    pub fn name(self) -> &'static str {
        match self {
            PrimType::I64 => "i64",
            PrimType::F64 => "f64",
            PrimType::Tag => "tag",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "i64" => Some(PrimType::I64),
            "f64" => Some(PrimType::F64),
            "tag" => Some(PrimType::Tag),
            _ => None,
        }
    }
}

impl fmt::Display for PrimType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimType::I64 => "I64",
            PrimType::F64 => "F64",
            PrimType::Tag => "TAG",
        })
    }
}

/// A primitive payload. Floats compare by bit pattern, so `NaN == NaN` when
/// the payloads agree and `0.0 != -0.0`.
#[derive(Clone, Copy, Debug)]
pub enum Scalar {
    I64(i64),
    F64(f64),
    Tag(u32),
}

impl Scalar {
    pub fn kind(self) -> PrimType {
        match self {
            Scalar::I64(_) => PrimType::I64,
            Scalar::F64(_) => PrimType::F64,
            Scalar::Tag(_) => PrimType::Tag,
        }
    }

    pub fn zero(kind: PrimType) -> Self {
        match kind {
            PrimType::I64 => Scalar::I64(0),
            PrimType::F64 => Scalar::F64(0.0),
            PrimType::Tag => Scalar::Tag(0),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::I64(a), Scalar::I64(b)) => a == b,
            (Scalar::F64(a), Scalar::F64(b)) => a.to_bits() == b.to_bits(),
            (Scalar::Tag(a), Scalar::Tag(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::I64(v) => write!(f, "{v}i64"),
            Scalar::F64(v) => write!(f, "{v:?}"),
            Scalar::Tag(v) => write!(f, "#{v}"),
        }
    }
}

/// Constructor table attached to the root of a sum representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumInfo {
    pub adt: String,
    /// Field count of each constructor, in declaration order.
    pub arities: Vec<usize>,
}

impl SumInfo {
    pub fn constructor_count(&self) -> usize {
        self.arities.len()
    }

    /// Indices of the flat field slots owned by constructor `k`.
    pub fn slots_of(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.arities[..k].iter().sum();
        start..start + self.arities[k]
    }

    pub fn slot_count(&self) -> usize {
        self.arities.iter().sum()
    }
}

/// Representation type.
///
/// `Sum` is the pair `(TAG, fields)` at the root of a sum type, annotated with
/// its constructor table. Equality is structural and ignores that annotation:
/// a `Sum` equals the plain `Pair(Prim Tag, fields)`.
#[derive(Clone, Debug)]
pub enum TypeRep {
    Unit,
    Prim(PrimType),
    Pair(Box<TypeRep>, Box<TypeRep>),
    Sum {
        info: Arc<SumInfo>,
        fields: Box<TypeRep>,
    },
    /// Position of a self-recursive field.
    Rec(String),
}

static TAG_REP: TypeRep = TypeRep::Prim(PrimType::Tag);

impl TypeRep {
    pub fn pair(left: TypeRep, right: TypeRep) -> Self {
        TypeRep::Pair(Box::new(left), Box::new(right))
    }

    /// The representation shared by all two-constructor nullary enums, and the
    /// result type of comparisons.
    pub fn bool_rep() -> Self {
        TypeRep::Sum {
            info: Arc::new(SumInfo {
                adt: "Bool".to_string(),
                arities: vec![0, 0],
            }),
            fields: Box::new(TypeRep::Unit),
        }
    }

    /// Unit-rooted left-nested pairs: `(((), a), b), c)`.
    pub fn spine(items: impl IntoIterator<Item = TypeRep>) -> Self {
        items.into_iter().fold(TypeRep::Unit, TypeRep::pair)
    }

    /// Inverse of [`TypeRep::spine`] for a known number of items.
    pub fn unspine(&self, n: usize) -> Option<Vec<&TypeRep>> {
        let mut items = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n {
            let (l, r) = cur.as_pair()?;
            items.push(r);
            cur = l;
        }
        match cur {
            TypeRep::Unit => {
                items.reverse();
                Some(items)
            }
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&TypeRep, &TypeRep)> {
        match self {
            TypeRep::Pair(l, r) => Some((l, r)),
            TypeRep::Sum { fields, .. } => Some((&TAG_REP, fields)),
            _ => None,
        }
    }

    pub fn sum_info(&self) -> Option<&SumInfo> {
        match self {
            TypeRep::Sum { info, .. } => Some(info),
            _ => None,
        }
    }
}

impl PartialEq for TypeRep {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TypeRep::Unit, TypeRep::Unit) => true,
            (TypeRep::Prim(a), TypeRep::Prim(b)) => a == b,
            (TypeRep::Rec(a), TypeRep::Rec(b)) => a == b,
            _ => match (self.as_pair(), other.as_pair()) {
                (Some((al, ar)), Some((bl, br))) => al == bl && ar == br,
                _ => false,
            },
        }
    }
}

impl Eq for TypeRep {}

impl fmt::Display for TypeRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRep::Unit => f.write_str("()"),
            TypeRep::Prim(p) => write!(f, "{p}"),
            TypeRep::Rec(name) => write!(f, "Rec {name}"),
            TypeRep::Pair(l, r) => write!(f, "({l}, {r})"),
            TypeRep::Sum { fields, .. } => write!(f, "(TAG, {fields})"),
        }
    }
}

/// The user's view of a type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceType {
    Prim(PrimType),
    Adt(String),
    Tuple(Vec<SurfaceType>),
}

impl SurfaceType {
    pub fn adt(name: impl Into<String>) -> Self {
        SurfaceType::Adt(name.into())
    }

    fn mentions(&self, adt: &str) -> bool {
        match self {
            SurfaceType::Prim(_) => false,
            SurfaceType::Adt(n) => n == adt,
            SurfaceType::Tuple(ts) => ts.iter().any(|t| t.mentions(adt)),
        }
    }

    fn adt_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SurfaceType::Prim(_) => {}
            SurfaceType::Adt(n) => out.push(n),
            SurfaceType::Tuple(ts) => ts.iter().for_each(|t| t.adt_refs(out)),
        }
    }
}

impl fmt::Display for SurfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceType::Prim(p) => f.write_str(p.name()),
            SurfaceType::Adt(n) => f.write_str(n),
            SurfaceType::Tuple(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConDecl {
    pub name: String,
    pub fields: Vec<SurfaceType>,
}

impl ConDecl {
    pub fn new(name: impl Into<String>, fields: Vec<SurfaceType>) -> Self {
        ConDecl {
            name: name.into(),
            fields,
        }
    }
}

/// A user data declaration. Constructor index is declaration position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdtDecl {
    pub name: String,
    pub constructors: Vec<ConDecl>,
}

impl AdtDecl {
    pub fn new(name: impl Into<String>, constructors: Vec<ConDecl>) -> Self {
        AdtDecl {
            name: name.into(),
            constructors,
        }
    }

    pub fn is_sum(&self) -> bool {
        self.constructors.len() > 1
    }

    pub fn constructor_index(&self, con: &str) -> Option<usize> {
        self.constructors.iter().position(|c| c.name == con)
    }

    fn is_recursive_field(&self, ty: &SurfaceType) -> bool {
        matches!(ty, SurfaceType::Adt(n) if *n == self.name)
    }
}

/// Host-side value in constructor form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceValue {
    Scalar(Scalar),
    Con {
        adt: String,
        index: u32,
        fields: Vec<SurfaceValue>,
    },
    Tuple(Vec<SurfaceValue>),
}

impl SurfaceValue {
    pub fn f64(v: f64) -> Self {
        SurfaceValue::Scalar(Scalar::F64(v))
    }

    pub fn i64(v: i64) -> Self {
        SurfaceValue::Scalar(Scalar::I64(v))
    }

    pub fn con(adt: impl Into<String>, index: u32, fields: Vec<SurfaceValue>) -> Self {
        SurfaceValue::Con {
            adt: adt.into(),
            index,
            fields,
        }
    }
}

impl fmt::Display for SurfaceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceValue::Scalar(s) => write!(f, "{s}"),
            SurfaceValue::Con { adt, index, fields } => {
                write!(f, "{adt}#{index}")?;
                for v in fields {
                    write!(f, " ({v})")?;
                }
                Ok(())
            }
            SurfaceValue::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Value in representation form. `poisoned` marks undefined slots and
/// anything computed from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepValue {
    Unit,
    Prim { value: Scalar, poisoned: bool },
    Pair(Box<RepValue>, Box<RepValue>),
    Roll(Box<RepValue>),
}

impl RepValue {
    pub fn prim(value: Scalar) -> Self {
        RepValue::Prim {
            value,
            poisoned: false,
        }
    }

    pub fn pair(left: RepValue, right: RepValue) -> Self {
        RepValue::Pair(Box::new(left), Box::new(right))
    }

    pub fn spine(items: impl IntoIterator<Item = RepValue>) -> Self {
        items.into_iter().fold(RepValue::Unit, RepValue::pair)
    }

    pub fn is_poisoned(&self) -> bool {
        matches!(self, RepValue::Prim { poisoned: true, .. })
    }

    /// Comparison results: `False` is tag 0, `True` is tag 1.
    pub fn bool_value(b: bool) -> Self {
        RepValue::pair(RepValue::prim(Scalar::Tag(b as u32)), RepValue::Unit)
    }

    /// Splits unit-rooted left-nested pairs into `n` items.
    pub fn unspine(&self, n: usize) -> Result<Vec<&RepValue>> {
        let mut items = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n {
            let (l, r) = cur.as_pair()?;
            items.push(r);
            cur = l;
        }
        match cur {
            RepValue::Unit => {
                items.reverse();
                Ok(items)
            }
            other => Err(other.shape_error("unit")),
        }
    }

    pub fn as_pair(&self) -> Result<(&RepValue, &RepValue)> {
        match self {
            RepValue::Pair(l, r) => Ok((l, r)),
            other => Err(other.shape_error("pair")),
        }
    }

    /// Reads a constructor tag, refusing poisoned ones.
    pub fn read_tag(&self) -> Result<u32> {
        match self {
            RepValue::Prim {
                poisoned: true, ..
            } => Err(Error::PoisonRead),
            RepValue::Prim {
                value: Scalar::Tag(t),
                ..
            } => Ok(*t),
            other => Err(other.shape_error("tag")),
        }
    }

    /// Error for a value of the wrong shape. A poisoned stub standing where
    /// structure was expected counts as a poison read.
    pub(crate) fn shape_error(&self, expected: &str) -> Error {
        if self.is_poisoned() {
            Error::PoisonRead
        } else {
            Error::MalformedValue(format!("expected {expected}, found {self}"))
        }
    }
}

impl fmt::Display for RepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepValue::Unit => f.write_str("()"),
            RepValue::Prim { value, poisoned } => {
                write!(f, "{value}")?;
                if *poisoned {
                    f.write_str("!")?;
                }
                Ok(())
            }
            RepValue::Pair(l, r) => write!(f, "({l}, {r})"),
            RepValue::Roll(v) => write!(f, "roll {v}"),
        }
    }
}

/// Undefined value of a representation type: zero everywhere, all poisoned.
///
/// Recursive positions hold a rolled poisoned tag stub rather than a full
/// unfolding, which would not be finite.
pub fn make_undef(t: &TypeRep) -> RepValue {
    match t {
        TypeRep::Unit => RepValue::Unit,
        TypeRep::Prim(p) => poisoned(Scalar::zero(*p)),
        TypeRep::Pair(l, r) => RepValue::pair(make_undef(l), make_undef(r)),
        TypeRep::Sum { fields, .. } => {
            RepValue::pair(poisoned(Scalar::Tag(0)), make_undef(fields))
        }
        TypeRep::Rec(_) => RepValue::Roll(Box::new(poisoned(Scalar::Tag(0)))),
    }
}

fn poisoned(value: Scalar) -> RepValue {
    RepValue::Prim {
        value,
        poisoned: true,
    }
}

#[derive(Clone, Debug)]
struct AdtEntry {
    decl: AdtDecl,
    repr: TypeRep,
}

/// Registered ADT schemas with their derived representation types.
#[derive(Clone, Debug, Default)]
pub struct AdtRegistry {
    entries: Vec<AdtEntry>,
    index: HashMap<String, usize>,
}

impl AdtRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// A registry holding `Bool = False | True`, the result type of comparisons.
    pub fn with_prelude() -> Self {
        let mut reg = Self::new();
        reg.register(AdtDecl::new(
            "Bool",
            vec![ConDecl::new("False", vec![]), ConDecl::new("True", vec![])],
        ))
        .expect("prelude registers");
        reg
    }

    pub fn register(&mut self, decl: AdtDecl) -> Result<()> {
        if self.index.contains_key(&decl.name) {
            return Err(Error::DuplicateAdt(decl.name));
        }
        if decl.constructors.is_empty() {
            return Err(Error::EmptyAdt(decl.name));
        }
        let mut seen = HashSet::new();
        for con in &decl.constructors {
            if !seen.insert(con.name.as_str()) {
                return Err(Error::DuplicateConstructor {
                    adt: decl.name.clone(),
                    con: con.name.clone(),
                });
            }
            for field in &con.fields {
                self.check_field(&decl, con, field)?;
            }
        }
        let repr = self.derive_repr(&decl)?;
        self.index.insert(decl.name.clone(), self.entries.len());
        self.entries.push(AdtEntry { decl, repr });
        Ok(())
    }

    /// Registers a batch whose members may refer to each other in any
    /// order. Cycles through more than one ADT are rejected.
    pub fn register_all(&mut self, decls: Vec<AdtDecl>) -> Result<()> {
        let by_name: HashMap<&str, &AdtDecl> =
            decls.iter().map(|d| (d.name.as_str(), d)).collect();
        let mut order: Vec<&str> = Vec::new();
        let mut state: HashMap<&str, bool> = HashMap::new(); // false = visiting
        for d in &decls {
            visit(&d.name, &by_name, &mut state, &mut Vec::new(), &mut order)?;
        }
        for name in order {
            self.register(by_name[name].clone())?;
        }
        return Ok(());

        fn visit<'a>(
            name: &'a str,
            by_name: &HashMap<&'a str, &'a AdtDecl>,
            state: &mut HashMap<&'a str, bool>,
            stack: &mut Vec<&'a str>,
            order: &mut Vec<&'a str>,
        ) -> Result<()> {
            match state.get(name) {
                Some(true) => return Ok(()),
                Some(false) => {
                    let start = stack.iter().position(|n| *n == name).unwrap_or(0);
                    let mut cycle: Vec<String> =
                        stack[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(name.to_string());
                    return Err(Error::MutualRecursionUnsupported(cycle));
                }
                None => {}
            }
            let Some(decl) = by_name.get(name) else {
                return Ok(());
            };
            state.insert(name, false);
            stack.push(name);
            let mut refs = Vec::new();
            for con in &decl.constructors {
                for f in &con.fields {
                    f.adt_refs(&mut refs);
                }
            }
            for r in refs {
                if r != name {
                    visit(r, by_name, state, stack, order)?;
                }
            }
            stack.pop();
            state.insert(name, true);
            order.push(name);
            Ok(())
        }
    }

    fn check_field(&self, decl: &AdtDecl, con: &ConDecl, field: &SurfaceType) -> Result<()> {
        match field {
            SurfaceType::Prim(_) => Ok(()),
            SurfaceType::Adt(n) if *n == decl.name => Ok(()),
            SurfaceType::Adt(n) if self.index.contains_key(n) => Ok(()),
            SurfaceType::Adt(n) => Err(Error::UnknownFieldType {
                adt: decl.name.clone(),
                con: con.name.clone(),
                ty: n.clone(),
            }),
            SurfaceType::Tuple(ts) => {
                if field.mentions(&decl.name) {
                    return Err(Error::NestedRecursionUnsupported {
                        adt: decl.name.clone(),
                        con: con.name.clone(),
                    });
                }
                ts.iter().try_for_each(|t| self.check_field(decl, con, t))
            }
        }
    }

    fn derive_repr(&self, decl: &AdtDecl) -> Result<TypeRep> {
        let field_rep = |t: &SurfaceType| -> Result<TypeRep> {
            if decl.is_recursive_field(t) {
                Ok(TypeRep::Rec(decl.name.clone()))
            } else {
                self.repr_of(t)
            }
        };
        if !decl.is_sum() {
            let fields = decl.constructors[0]
                .fields
                .iter()
                .map(field_rep)
                .collect::<Result<Vec<_>>>()?;
            return Ok(TypeRep::spine(fields));
        }
        let slots = decl
            .constructors
            .iter()
            .flat_map(|c| c.fields.iter())
            .map(field_rep)
            .collect::<Result<Vec<_>>>()?;
        Ok(TypeRep::Sum {
            info: Arc::new(SumInfo {
                adt: decl.name.clone(),
                arities: decl.constructors.iter().map(|c| c.fields.len()).collect(),
            }),
            fields: Box::new(TypeRep::spine(slots)),
        })
    }

    pub fn get(&self, name: &str) -> Result<&AdtDecl> {
        self.entry(name).map(|e| &e.decl)
    }

    fn entry(&self, name: &str) -> Result<&AdtEntry> {
        self.index
            .get(name)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| Error::UnknownAdt(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Declarations in registration order.
    pub fn decls(&self) -> impl Iterator<Item = &AdtDecl> {
        self.entries.iter().map(|e| &e.decl)
    }

    /// Index of constructor `con` in ADT `adt`.
    pub fn constructor(&self, adt: &str, con: &str) -> Result<u32> {
        let decl = self.get(adt)?;
        decl.constructor_index(con)
            .map(|i| i as u32)
            .ok_or_else(|| Error::UnknownConstructor {
                adt: adt.to_string(),
                con: con.to_string(),
            })
    }

    pub fn repr_of(&self, t: &SurfaceType) -> Result<TypeRep> {
        match t {
            SurfaceType::Prim(p) => Ok(TypeRep::Prim(*p)),
            SurfaceType::Tuple(ts) => Ok(TypeRep::spine(
                ts.iter().map(|t| self.repr_of(t)).collect::<Result<Vec<_>>>()?,
            )),
            SurfaceType::Adt(n) => Ok(self.entry(n)?.repr.clone()),
        }
    }

    /// Surface type of a value, resolving ADT names against the registry.
    pub fn type_of_value(&self, v: &SurfaceValue) -> Result<SurfaceType> {
        Ok(match v {
            SurfaceValue::Scalar(s) => SurfaceType::Prim(s.kind()),
            SurfaceValue::Con { adt, .. } => {
                self.get(adt)?;
                SurfaceType::Adt(adt.clone())
            }
            SurfaceValue::Tuple(vs) => SurfaceType::Tuple(
                vs.iter()
                    .map(|v| self.type_of_value(v))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    /// Converts a host value into representation form.
    pub fn lift(&self, v: &SurfaceValue) -> Result<RepValue> {
        let ty = self.type_of_value(v)?;
        self.lift_at(v, &ty)
    }

    pub fn lift_at(&self, v: &SurfaceValue, ty: &SurfaceType) -> Result<RepValue> {
        match (v, ty) {
            (SurfaceValue::Scalar(s), SurfaceType::Prim(p)) if s.kind() == *p => {
                Ok(RepValue::prim(*s))
            }
            (SurfaceValue::Tuple(vs), SurfaceType::Tuple(ts)) => {
                if vs.len() != ts.len() {
                    return Err(Error::ArityMismatch {
                        expected: ts.len(),
                        found: vs.len(),
                    });
                }
                let items = vs
                    .iter()
                    .zip(ts)
                    .map(|(v, t)| self.lift_at(v, t))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RepValue::spine(items))
            }
            (SurfaceValue::Con { adt, index, fields }, SurfaceType::Adt(name)) if adt == name => {
                let entry = self.entry(name)?;
                let decl = &entry.decl;
                let con = decl.constructors.get(*index as usize).ok_or(Error::BadTag {
                    adt: name.clone(),
                    tag: *index,
                    count: decl.constructors.len(),
                })?;
                if fields.len() != con.fields.len() {
                    return Err(Error::ArityMismatch {
                        expected: con.fields.len(),
                        found: fields.len(),
                    });
                }
                let mut own = fields
                    .iter()
                    .zip(&con.fields)
                    .map(|(v, t)| {
                        let lifted = self.lift_at(v, t)?;
                        Ok(if decl.is_recursive_field(t) {
                            RepValue::Roll(Box::new(lifted))
                        } else {
                            lifted
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter();
                let TypeRep::Sum { info, fields: slots } = &entry.repr else {
                    return Ok(RepValue::spine(own));
                };
                let slot_types = slots
                    .unspine(info.slot_count())
                    .expect("sum representation is a spine");
                let mine = info.slots_of(*index as usize);
                let items = slot_types.into_iter().enumerate().map(|(i, t)| {
                    if mine.contains(&i) {
                        own.next().expect("arity checked")
                    } else {
                        make_undef(t)
                    }
                });
                Ok(RepValue::pair(
                    RepValue::prim(Scalar::Tag(*index)),
                    RepValue::spine(items),
                ))
            }
            _ => Err(Error::TypeMismatch(format!("value {v} is not of type {ty}"))),
        }
    }

    /// Converts a representation value back into constructor form. Only the
    /// selected constructor's fields are read.
    pub fn lower(&self, v: &RepValue, ty: &SurfaceType) -> Result<SurfaceValue> {
        match ty {
            SurfaceType::Prim(p) => match v {
                RepValue::Prim { poisoned: true, .. } => Err(Error::PoisonRead),
                RepValue::Prim { value, .. } if value.kind() == *p => {
                    Ok(SurfaceValue::Scalar(*value))
                }
                other => Err(other.shape_error(p.name())),
            },
            SurfaceType::Tuple(ts) => {
                let items = v.unspine(ts.len())?;
                Ok(SurfaceValue::Tuple(
                    items
                        .into_iter()
                        .zip(ts)
                        .map(|(v, t)| self.lower(v, t))
                        .collect::<Result<_>>()?,
                ))
            }
            SurfaceType::Adt(name) => {
                let entry = self.entry(name)?;
                let decl = &entry.decl;
                let (index, own) = match &entry.repr {
                    TypeRep::Sum { info, .. } => {
                        let (tag, slots) = v.as_pair()?;
                        let k = tag.read_tag()?;
                        if k as usize >= decl.constructors.len() {
                            return Err(Error::BadTag {
                                adt: name.clone(),
                                tag: k,
                                count: decl.constructors.len(),
                            });
                        }
                        let all = slots.unspine(info.slot_count())?;
                        (k, all[info.slots_of(k as usize)].to_vec())
                    }
                    _ => (0, v.unspine(decl.constructors[0].fields.len())?),
                };
                let con = &decl.constructors[index as usize];
                let fields = own
                    .into_iter()
                    .zip(&con.fields)
                    .map(|(v, t)| {
                        if decl.is_recursive_field(t) {
                            match v {
                                RepValue::Roll(inner) => self.lower(inner, t),
                                other => Err(other.shape_error("roll")),
                            }
                        } else {
                            self.lower(v, t)
                        }
                    })
                    .collect::<Result<_>>()?;
                Ok(SurfaceValue::Con {
                    adt: name.clone(),
                    index,
                    fields,
                })
            }
        }
    }

    /// Whether `v` has the shape of `t`. A recursive position accepts either
    /// a conforming unfolding or the poisoned stub produced by [`make_undef`].
    pub fn conforms(&self, v: &RepValue, t: &TypeRep) -> bool {
        match (v, t) {
            (RepValue::Unit, TypeRep::Unit) => true,
            (RepValue::Prim { value, .. }, TypeRep::Prim(p)) => value.kind() == *p,
            (RepValue::Roll(inner), TypeRep::Rec(name)) => {
                let stub = matches!(
                    **inner,
                    RepValue::Prim {
                        value: Scalar::Tag(_),
                        poisoned: true
                    }
                );
                stub || self
                    .entry(name)
                    .is_ok_and(|e| self.conforms(inner, &e.repr))
            }
            (RepValue::Pair(vl, vr), _) => match t.as_pair() {
                Some((tl, tr)) => self.conforms(vl, tl) && self.conforms(vr, tr),
                None => false,
            },
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f64t() -> SurfaceType {
        SurfaceType::Prim(PrimType::F64)
    }

    fn registry() -> AdtRegistry {
        let mut reg = AdtRegistry::with_prelude();
        reg.register(AdtDecl::new(
            "MaybeF64",
            vec![ConDecl::new("Nothing", vec![]), ConDecl::new("Just", vec![f64t()])],
        ))
        .unwrap();
        reg.register(AdtDecl::new(
            "ListF64",
            vec![
                ConDecl::new("Nil", vec![]),
                ConDecl::new("Cons", vec![f64t(), SurfaceType::adt("ListF64")]),
            ],
        ))
        .unwrap();
        reg.register(AdtDecl::new(
            "Point",
            vec![ConDecl::new("Point", vec![f64t(), f64t()])],
        ))
        .unwrap();
        reg
    }

    #[test]
    fn constructors_are_indexed_by_position() {
        let reg = registry();
        assert_eq!(reg.constructor("MaybeF64", "Nothing").unwrap(), 0);
        assert_eq!(reg.constructor("MaybeF64", "Just").unwrap(), 1);
        assert!(matches!(
            reg.constructor("MaybeF64", "Other"),
            Err(Error::UnknownConstructor { .. })
        ));
    }

    #[test]
    fn registration_errors() {
        let mut reg = registry();
        assert_eq!(
            reg.register(AdtDecl::new("Point", vec![ConDecl::new("P", vec![])])),
            Err(Error::DuplicateAdt("Point".into()))
        );
        assert_eq!(
            reg.register(AdtDecl::new("Void", vec![])),
            Err(Error::EmptyAdt("Void".into()))
        );
        assert!(matches!(
            reg.register(AdtDecl::new(
                "Twice",
                vec![ConDecl::new("A", vec![]), ConDecl::new("A", vec![])]
            )),
            Err(Error::DuplicateConstructor { .. })
        ));
        assert!(matches!(
            reg.register(AdtDecl::new(
                "Wrap",
                vec![ConDecl::new("W", vec![SurfaceType::adt("Missing")])]
            )),
            Err(Error::UnknownFieldType { .. })
        ));
        assert!(matches!(
            reg.register(AdtDecl::new(
                "Tree",
                vec![
                    ConDecl::new("Leaf", vec![]),
                    ConDecl::new(
                        "Node",
                        vec![SurfaceType::Tuple(vec![SurfaceType::adt("Tree"), f64t()])]
                    )
                ]
            )),
            Err(Error::NestedRecursionUnsupported { .. })
        ));
    }

    #[test]
    fn mutual_recursion_rejected_in_batches() {
        let mut reg = AdtRegistry::new();
        let a = AdtDecl::new("A", vec![ConDecl::new("MkA", vec![SurfaceType::adt("B")])]);
        let b = AdtDecl::new(
            "B",
            vec![ConDecl::new("End", vec![]), ConDecl::new("MkB", vec![SurfaceType::adt("A")])],
        );
        let err = reg.register_all(vec![a, b]).unwrap_err();
        assert!(matches!(err, Error::MutualRecursionUnsupported(ref c) if c.len() == 3), "{err}");
        assert!(!reg.contains("A") && !reg.contains("B"));
    }

    #[test]
    fn batch_registration_orders_dependencies() {
        let mut reg = AdtRegistry::new();
        let outer = AdtDecl::new(
            "Outer",
            vec![ConDecl::new("O", vec![SurfaceType::adt("Inner")])],
        );
        let inner = AdtDecl::new("Inner", vec![ConDecl::new("I", vec![f64t()])]);
        reg.register_all(vec![outer, inner]).unwrap();
        assert_eq!(
            reg.decls().map(|d| d.name.as_str()).collect::<Vec<_>>(),
            ["Inner", "Outer"]
        );
    }

    #[test]
    fn representation_shapes() {
        let reg = registry();
        assert_eq!(
            reg.repr_of(&SurfaceType::adt("Point")).unwrap().to_string(),
            "(((), F64), F64)"
        );
        assert_eq!(
            reg.repr_of(&SurfaceType::adt("ListF64")).unwrap().to_string(),
            "(TAG, (((), F64), Rec ListF64))"
        );
        assert_eq!(
            reg.repr_of(&SurfaceType::adt("Bool")).unwrap(),
            TypeRep::pair(TypeRep::Prim(PrimType::Tag), TypeRep::Unit)
        );
        assert_eq!(
            reg.repr_of(&SurfaceType::Tuple(vec![])).unwrap(),
            TypeRep::Unit
        );
        assert!(matches!(
            reg.repr_of(&SurfaceType::adt("Nope")),
            Err(Error::UnknownAdt(_))
        ));
    }

    #[test]
    fn undef_is_zero_and_poisoned() {
        assert_eq!(make_undef(&TypeRep::Unit), RepValue::Unit);
        assert_eq!(
            make_undef(&TypeRep::Prim(PrimType::F64)),
            RepValue::Prim {
                value: Scalar::F64(0.0),
                poisoned: true
            }
        );
        assert_eq!(
            make_undef(&TypeRep::pair(TypeRep::Unit, TypeRep::Prim(PrimType::Tag))),
            RepValue::pair(
                RepValue::Unit,
                RepValue::Prim {
                    value: Scalar::Tag(0),
                    poisoned: true
                }
            )
        );
        let reg = registry();
        let list = reg.repr_of(&SurfaceType::adt("ListF64")).unwrap();
        assert!(reg.conforms(&make_undef(&list), &list));
    }

    #[test]
    fn lift_examples() {
        let reg = registry();
        assert_eq!(
            reg.lift(&SurfaceValue::con("Bool", 1, vec![])).unwrap(),
            RepValue::pair(RepValue::prim(Scalar::Tag(1)), RepValue::Unit)
        );
        assert_eq!(
            reg.lift(&SurfaceValue::con("MaybeF64", 0, vec![])).unwrap(),
            RepValue::pair(
                RepValue::prim(Scalar::Tag(0)),
                RepValue::pair(RepValue::Unit, make_undef(&TypeRep::Prim(PrimType::F64)))
            )
        );
        assert_eq!(
            reg.lift(&SurfaceValue::con(
                "Point",
                0,
                vec![SurfaceValue::f64(1.0), SurfaceValue::f64(2.0)]
            ))
            .unwrap(),
            RepValue::spine([
                RepValue::prim(Scalar::F64(1.0)),
                RepValue::prim(Scalar::F64(2.0))
            ])
        );
    }

    #[test]
    fn lift_rejects_ill_typed_values() {
        let reg = registry();
        assert!(matches!(
            reg.lift(&SurfaceValue::con("MaybeF64", 1, vec![])),
            Err(Error::ArityMismatch { expected: 1, found: 0 })
        ));
        assert!(matches!(
            reg.lift(&SurfaceValue::con("MaybeF64", 1, vec![SurfaceValue::i64(3)])),
            Err(Error::TypeMismatch(_))
        ));
        assert!(matches!(
            reg.lift(&SurfaceValue::con("Ghost", 0, vec![])),
            Err(Error::UnknownAdt(_))
        ));
    }

    #[test]
    fn lower_examples() {
        let reg = registry();
        let maybe = SurfaceType::adt("MaybeF64");
        let nothing = RepValue::pair(
            RepValue::prim(Scalar::Tag(0)),
            RepValue::pair(RepValue::Unit, make_undef(&TypeRep::Prim(PrimType::F64))),
        );
        assert_eq!(
            reg.lower(&nothing, &maybe).unwrap(),
            SurfaceValue::con("MaybeF64", 0, vec![])
        );
        let just = SurfaceValue::con("MaybeF64", 1, vec![SurfaceValue::f64(2.0)]);
        assert_eq!(reg.lower(&reg.lift(&just).unwrap(), &maybe).unwrap(), just);
        let bad = RepValue::pair(
            RepValue::prim(Scalar::Tag(5)),
            RepValue::pair(RepValue::Unit, RepValue::prim(Scalar::F64(0.0))),
        );
        assert!(matches!(
            reg.lower(&bad, &maybe),
            Err(Error::BadTag { tag: 5, count: 2, .. })
        ));
        // a Just whose payload slot is undefined
        let poisoned_just = RepValue::pair(
            RepValue::prim(Scalar::Tag(1)),
            RepValue::pair(RepValue::Unit, make_undef(&TypeRep::Prim(PrimType::F64))),
        );
        assert_eq!(reg.lower(&poisoned_just, &maybe), Err(Error::PoisonRead));
    }

    #[test]
    fn list_round_trip_wraps_tail_in_roll() {
        let reg = registry();
        let nil = SurfaceValue::con("ListF64", 0, vec![]);
        let list = SurfaceValue::con("ListF64", 1, vec![SurfaceValue::f64(1.5), nil]);
        let rep = reg.lift(&list).unwrap();
        let RepValue::Pair(_, fields) = &rep else { panic!() };
        let slots = fields.unspine(2).unwrap();
        assert!(matches!(slots[1], RepValue::Roll(_)));
        let ty = SurfaceType::adt("ListF64");
        assert!(reg.conforms(&rep, &reg.repr_of(&ty).unwrap()));
        assert_eq!(reg.lower(&rep, &ty).unwrap(), list);
    }

    #[test]
    fn sum_annotation_does_not_affect_equality() {
        let reg = registry();
        let bool_rep = reg.repr_of(&SurfaceType::adt("Bool")).unwrap();
        assert!(bool_rep.sum_info().is_some());
        assert_eq!(bool_rep, TypeRep::bool_rep());
        assert_eq!(
            bool_rep,
            TypeRep::pair(TypeRep::Prim(PrimType::Tag), TypeRep::Unit)
        );
        assert_ne!(bool_rep, TypeRep::pair(TypeRep::Prim(PrimType::I64), TypeRep::Unit));
    }
}
