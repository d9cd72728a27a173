//! Exact point evaluation of the curve of a nonterminal.
//!
//! The local coordinate `ℓ·z` is tracked as an exact rational, so the
//! entry index and the residual inside it are decided without rounding.
//! Evaluation stops on a turn entry or a glueing point; otherwise it
//! descends into the symbol and repeats with the residual. Past the depth
//! limit the remaining subcurve is replaced by the origin, which is off by
//! at most `B·Π a⁻¹`.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_rule, Entry, FractalLSystem, LSystemError, Turn, E};
use crate::schemes::{check_ca_square, SquareReport};

/// Serializes a rational as the string `"p/q"`.
pub mod fraction {
    use num::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", z.numer(), z.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(|_| D::Error::custom(format!("invalid fraction `{text}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(with = "fraction")]
    pub z: BigRational,
    pub value: [f64; 2],
    pub exact: bool,
    pub error_bound: f64,
    /// Number of rule levels entered.
    pub depth: usize,
}

struct CompiledRule {
    shrink: f64,
    entries: Vec<Option<usize>>,
    /// Span and direction of each prefix `body[..i]`, for `i = 0..=ℓ`.
    prefix_span: Vec<[f64; 2]>,
    prefix_dir: Vec<Turn>,
}

struct Compiled {
    rules: Vec<CompiledRule>,
    bound: f64,
    min_shrink: f64,
}

/// Compiles the rules reachable from `start`; `start` gets index 0.
fn compile(sys: &FractalLSystem, start: &str) -> Result<(Compiled, usize), LSystemError> {
    let names = sys.reachable(start)?;
    let mut rules = Vec::with_capacity(names.len());
    for name in &names {
        let rule = &sys.rules[name];
        if !check_rule(name, rule).well_formed() {
            return Err(LSystemError::NotWellFormed(name.clone()));
        }
        let mut prefix_span = vec![[0.0, 0.0]];
        let mut prefix_dir = vec![Turn::identity()];
        let mut entries = Vec::with_capacity(rule.len());
        for entry in &rule.body {
            let mut span = *prefix_span.last().expect("nonempty");
            let mut dir = *prefix_dir.last().expect("nonempty");
            match entry {
                Entry::Turn(t) => {
                    dir = dir.compose(*t);
                    entries.push(None);
                }
                Entry::Symbol(s) => {
                    let v = dir.rotate(E);
                    span = [span[0] + v[0], span[1] + v[1]];
                    entries.push(Some(names.iter().position(|n| n == s).expect("reachable")));
                }
            }
            prefix_span.push(span);
            prefix_dir.push(dir);
        }
        rules.push(CompiledRule {
            shrink: rule.shrink,
            entries,
            prefix_span,
            prefix_dir,
        });
    }
    let min_shrink = rules.iter().map(|r| r.shrink).fold(f64::INFINITY, f64::min);
    let max_len = rules.iter().map(|r| r.entries.len()).max().unwrap_or(1) as f64;
    Ok((
        Compiled {
            rules,
            bound: max_len / (min_shrink - 1.0),
            min_shrink,
        },
        0,
    ))
}

/// Bound `B = ℓ_max / (a_min − 1)` on `|h(start)(z)|` over the rules
/// reachable from `start`.
pub fn curve_bound(sys: &FractalLSystem, start: &str) -> Result<f64, LSystemError> {
    Ok(compile(sys, start)?.0.bound)
}

/// Depth `D(ε) = ⌈log(B/ε) / log a_min⌉` after which truncation is within
/// `ε`.
pub fn depth_limit(sys: &FractalLSystem, start: &str, epsilon: f64) -> Result<usize, LSystemError> {
    let (c, _) = compile(sys, start)?;
    Ok(limit(&c, epsilon))
}

fn limit(c: &Compiled, epsilon: f64) -> usize {
    ((c.bound / epsilon).ln() / c.min_shrink.ln()).ceil().max(0.0) as usize
}

fn check_domain(z: &BigRational) -> Result<(), LSystemError> {
    if z.is_negative() || *z > BigRational::one() {
        return Err(LSystemError::OutOfDomain(z.to_string()));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<(), LSystemError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(LSystemError::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// Splits `x ∈ [0, ℓ]` into an entry index and a residual: `(0, 0)` at the
/// origin, otherwise `(⌈x⌉ − 1, x − ⌈x⌉ + 1)` with residual in `(0, 1]`.
fn locate(x: &BigRational) -> (usize, BigRational) {
    if x.is_zero() {
        return (0, BigRational::zero());
    }
    let idx = x.ceil() - BigRational::one();
    let residual = x - &idx;
    (idx.to_integer().to_usize().expect("index fits"), residual)
}

fn eval_compiled(c: &Compiled, start: usize, z: &BigRational, limit: usize) -> CurvePoint {
    let mut pos = [0.0, 0.0];
    let mut dir = Turn::identity();
    let mut scale = 1.0;
    let mut rule = start;
    let mut local = z.clone();
    let mut depth = 0;
    let add = |pos: &mut [f64; 2], dir: Turn, scale: f64, v: [f64; 2]| {
        let v = dir.rotate(v);
        pos[0] += scale * v[0];
        pos[1] += scale * v[1];
    };
    loop {
        if depth >= limit {
            return CurvePoint {
                z: z.clone(),
                value: pos,
                exact: false,
                error_bound: c.bound * scale,
                depth,
            };
        }
        depth += 1;
        let r = &c.rules[rule];
        scale /= r.shrink;
        let x = &local * BigRational::from_integer(BigInt::from(r.entries.len()));
        let (idx, residual) = locate(&x);
        let done = match r.entries[idx] {
            None => Some(r.prefix_span[idx]),
            Some(_) if residual.is_zero() => Some(r.prefix_span[idx]),
            Some(_) if residual.is_one() => Some(r.prefix_span[idx + 1]),
            Some(next) => {
                add(&mut pos, dir, scale, r.prefix_span[idx]);
                dir = dir.compose(r.prefix_dir[idx]);
                rule = next;
                local = residual;
                None
            }
        };
        if let Some(v) = done {
            add(&mut pos, dir, scale, v);
            return CurvePoint {
                z: z.clone(),
                value: pos,
                exact: true,
                error_bound: 0.0,
                depth,
            };
        }
    }
}

/// Evaluates the curve of `start` at `z` to within `epsilon`.
pub fn eval_point(
    sys: &FractalLSystem,
    start: &str,
    z: &BigRational,
    epsilon: f64,
) -> Result<CurvePoint, LSystemError> {
    check_domain(z)?;
    check_epsilon(epsilon)?;
    let (c, s) = compile(sys, start)?;
    Ok(eval_compiled(&c, s, z, limit(&c, epsilon)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub n: usize,
    pub points: Vec<CurvePoint>,
    pub bound: f64,
}

impl Sample {
    pub fn exact_count(&self) -> usize {
        self.points.iter().filter(|p| p.exact).count()
    }

    pub fn exact_fraction(&self) -> f64 {
        self.exact_count() as f64 / self.points.len() as f64
    }
}

/// Evaluates at `z = k/n` for `k = 0..=n`. With `parallel` the points are
/// computed on the rayon pool; the result is identical either way.
pub fn sample_curve(
    sys: &FractalLSystem,
    start: &str,
    n: usize,
    epsilon: f64,
    parallel: bool,
) -> Result<Sample, LSystemError> {
    if n == 0 {
        return Err(LSystemError::NoSamples);
    }
    check_epsilon(epsilon)?;
    let (c, s) = compile(sys, start)?;
    let d = limit(&c, epsilon);
    let at = |k: usize| {
        let z = BigRational::new(BigInt::from(k), BigInt::from(n));
        eval_compiled(&c, s, &z, d)
    };
    let points = if parallel {
        (0..=n).into_par_iter().map(at).collect()
    } else {
        (0..=n).map(at).collect()
    };
    Ok(Sample {
        n,
        points,
        bound: c.bound,
    })
}

/// One level of unfolding at `z`: the prefix displacement, and the
/// pending symbol with its local coordinate if evaluation continues.
struct Unfolded {
    shrink: f64,
    offset: [f64; 2],
    dir: Turn,
    inner: Option<(usize, BigRational)>,
}

fn unfold_at(c: &Compiled, rule: usize, z: &BigRational) -> Unfolded {
    let r = &c.rules[rule];
    let x = z * BigRational::from_integer(BigInt::from(r.entries.len()));
    let (idx, residual) = locate(&x);
    let (offset, inner) = match r.entries[idx] {
        Some(next) if !residual.is_zero() && !residual.is_one() => (r.prefix_span[idx], Some((next, residual))),
        Some(_) if residual.is_one() => (r.prefix_span[idx + 1], None),
        _ => (r.prefix_span[idx], None),
    };
    Unfolded {
        shrink: r.shrink,
        offset,
        dir: r.prefix_dir[idx],
        inner,
    }
}

/// Checks at each `z` that the curve of `start` equals its one-level
/// recomposition `a⁻¹·(offset + ρ·h(inner)(z′))`, allowing for the error
/// bounds of both evaluations.
pub fn check_self_similarity(
    sys: &FractalLSystem,
    start: &str,
    zs: &[BigRational],
    epsilon: f64,
    tol: f64,
) -> Result<SquareReport, LSystemError> {
    check_epsilon(epsilon)?;
    for z in zs {
        check_domain(z)?;
    }
    let (c, s) = compile(sys, start)?;
    let d = limit(&c, epsilon);
    let h = |z: &BigRational| {
        let p = eval_compiled(&c, s, z, d);
        (p.value, p.error_bound)
    };
    check_ca_square::<_, _, _, _, std::convert::Infallible>(
        zs,
        |z| z.to_string(),
        |z| unfold_at(&c, s, z),
        |u, _| {
            let inner = u.inner.as_ref().map(|(rule, z)| {
                let p = eval_compiled(&c, *rule, z, d);
                (p.value, p.error_bound)
            });
            (u.shrink, u.offset, u.dir, inner)
        },
        |&(a, offset, dir, inner)| {
            let (v, err) = inner.unwrap_or(([0.0, 0.0], 0.0));
            let v = dir.rotate(v);
            Ok(([(offset[0] + v[0]) / a, (offset[1] + v[1]) / a], err / a))
        },
        h,
        |(p, ep), (q, eq)| {
            let slack = tol + ep + eq;
            (p[0] - q[0]).abs() <= slack && (p[1] - q[1]).abs() <= slack
        },
    )
    .map_err(|never| match never {})
}
