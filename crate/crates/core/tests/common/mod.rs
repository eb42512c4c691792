//! Host reference implementations and finite input domains shared by the
//! integration tests. Nothing here goes through the embedded language.

#![allow(dead_code)]

use embedded_match::types::SurfaceValue;

#[derive(Clone, Copy, Debug)]
pub enum Either {
    Left(bool),
    Right(bool),
}

pub fn f(x: f64) -> SurfaceValue {
    SurfaceValue::f64(x)
}

pub fn boolean(b: bool) -> SurfaceValue {
    SurfaceValue::con("Bool", u32::from(b), vec![])
}

pub fn maybe_f64(m: Option<f64>) -> SurfaceValue {
    match m {
        None => SurfaceValue::con("MaybeF64", 0, vec![]),
        Some(x) => SurfaceValue::con("MaybeF64", 1, vec![f(x)]),
    }
}

pub fn maybe_bool(m: Option<bool>) -> SurfaceValue {
    match m {
        None => SurfaceValue::con("MaybeBool", 0, vec![]),
        Some(b) => SurfaceValue::con("MaybeBool", 1, vec![boolean(b)]),
    }
}

pub fn either(e: Either) -> SurfaceValue {
    match e {
        Either::Left(b) => SurfaceValue::con("EitherBoolBool", 0, vec![boolean(b)]),
        Either::Right(b) => SurfaceValue::con("EitherBoolBool", 1, vec![boolean(b)]),
    }
}

pub fn point((x, y): (f64, f64)) -> SurfaceValue {
    SurfaceValue::con("Point", 0, vec![f(x), f(y)])
}

pub fn list(xs: &[f64]) -> SurfaceValue {
    xs.iter().rev().fold(SurfaceValue::con("ListF64", 0, vec![]), |tail, x| {
        SurfaceValue::con("ListF64", 1, vec![f(*x), tail])
    })
}

/// 32 doubles: ordinary values, boundaries, signed zeros, infinities, NaN.
pub fn f64_samples() -> Vec<f64> {
    vec![
        0.0,
        -0.0,
        1.0,
        -1.0,
        0.5,
        2.0,
        3.0,
        -2.5,
        7.0,
        42.0,
        100.0,
        -0.5,
        0.1,
        0.2,
        1.0 / 3.0,
        -3.75,
        123_456.789,
        1e10,
        -1e-10,
        1e300,
        1e-300,
        9_007_199_254_740_992.0,
        f64::MIN_POSITIVE,
        5e-324,
        f64::MAX,
        f64::MIN,
        f64::EPSILON,
        std::f64::consts::PI,
        std::f64::consts::E,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NAN,
    ]
}

pub const BOOLS: [bool; 2] = [false, true];

pub fn maybe_bools() -> Vec<Option<bool>> {
    vec![None, Some(false), Some(true)]
}

pub fn eithers() -> Vec<Either> {
    vec![
        Either::Left(false),
        Either::Left(true),
        Either::Right(false),
        Either::Right(true),
    ]
}

/// All lists of length at most 3 over a few representative elements.
pub fn short_lists() -> Vec<Vec<f64>> {
    let elems = [0.0, -0.0, 1.5, -2.0, f64::INFINITY, f64::NAN];
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..3 {
        frontier = frontier
            .iter()
            .flat_map(|prefix: &Vec<f64>| {
                elems.iter().map(move |x| {
                    let mut next = prefix.clone();
                    next.push(*x);
                    next
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

pub mod reference {
    use super::Either;

    pub fn safe_div(n: f64, d: f64) -> Option<f64> {
        if d == 0.0 {
            None
        } else {
            Some(n / d)
        }
    }

    pub fn from_maybe(d: f64, m: Option<f64>) -> f64 {
        m.unwrap_or(d)
    }

    pub fn simple(m: Option<f64>) -> f64 {
        m.unwrap_or(0.0)
    }

    pub fn add_point(p: (f64, f64), q: (f64, f64)) -> (f64, f64) {
        (p.0 + q.0, p.1 + q.1)
    }

    pub fn nested(m: Option<bool>) -> i64 {
        match m {
            None => 0,
            Some(false) => 1,
            Some(true) => 2,
        }
    }

    pub fn list_head_or(d: f64, xs: &[f64]) -> f64 {
        xs.first().copied().unwrap_or(d)
    }

    pub fn either_pick(e: Either) -> bool {
        match e {
            Either::Left(b) => b,
            Either::Right(b) => !b,
        }
    }

    pub fn not(b: bool) -> bool {
        !b
    }

    pub fn sum_first_two(xs: &[f64]) -> f64 {
        match xs {
            [] => 0.0,
            [x] => x + 0.0,
            [x, y, ..] => x + y,
        }
    }
}

/// One input of the fidelity suite with the host reference's answer.
#[derive(Clone, Debug)]
pub struct Case {
    pub example: &'static str,
    pub args: Vec<SurfaceValue>,
    pub expected: SurfaceValue,
}

fn case(example: &'static str, args: Vec<SurfaceValue>, expected: SurfaceValue) -> Case {
    Case {
        example,
        args,
        expected,
    }
}

/// Exhaustive inputs over the finite domains for every example program.
pub fn fidelity_cases() -> Vec<Case> {
    use reference as r;
    let xs = f64_samples();
    let mut out = Vec::new();
    for &n in &xs {
        for &d in &xs {
            out.push(case("safe_div", vec![f(n), f(d)], maybe_f64(r::safe_div(n, d))));
        }
    }
    let maybes: Vec<Option<f64>> = std::iter::once(None).chain(xs.iter().map(|x| Some(*x))).collect();
    for &d in &xs {
        for &m in &maybes {
            out.push(case("from_maybe", vec![f(d), maybe_f64(m)], f(r::from_maybe(d, m))));
        }
    }
    for &m in &maybes {
        out.push(case("simple", vec![maybe_f64(m)], f(r::simple(m))));
    }
    let points: Vec<(f64, f64)> = xs.iter().zip(xs.iter().cycle().skip(7)).map(|(a, b)| (*a, *b)).collect();
    for &p in &points {
        for &q in &points {
            out.push(case("add_point", vec![point(p), point(q)], point(r::add_point(p, q))));
        }
    }
    for m in maybe_bools() {
        out.push(case(
            "nested",
            vec![maybe_bool(m)],
            SurfaceValue::i64(r::nested(m)),
        ));
    }
    let lists = short_lists();
    for &d in &xs[..8] {
        for l in &lists {
            out.push(case("list_head_or", vec![f(d), list(l)], f(r::list_head_or(d, l))));
        }
    }
    for e in eithers() {
        out.push(case("either_pick", vec![either(e)], boolean(r::either_pick(e))));
    }
    for b in BOOLS {
        out.push(case("not", vec![boolean(b)], boolean(r::not(b))));
    }
    for l in &lists {
        out.push(case("sum_first_two", vec![list(l)], f(r::sum_first_two(l))));
    }
    out
}
