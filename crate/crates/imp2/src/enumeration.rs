//! Rank/unrank bijection between natural numbers and IMP2 sentences.
//!
//! The bijection is assembled from two combinators:
//!
//! * a round-robin union over the production rules of one syntactic
//!   category (finite alternatives occupy only their first rounds), and
//! * a sum-layered tupling for products: tuples are ordered by increasing
//!   coordinate sum and lexicographically within a layer. For arity 2 this
//!   is Cantor pairing oriented as `rank(a, b) = (a+b)(a+b+1)/2 + a`.
//!
//! Numerals enumerate as the identity on naturals, so indices are
//! arbitrary-precision throughout: whole-sentence positions reach dozens
//! of decimal digits for small programs.

use crate::syntax::{ArithExpr, BoolExpr, Sentence};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("tuple arity must be at least 1")]
    ZeroArity,
    #[error("position {position} lies beyond the union of {total} elements")]
    PositionOutOfRange { position: BigUint, total: BigUint },
}

/// Cardinality of one production alternative in a union.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleSize {
    Finite(u64),
    Infinite,
}

fn triangular(s: &BigUint) -> BigUint {
    s * (s + 1u32) / 2u32
}

/// Pairing by increasing coordinate sum, lexicographic within a sum layer:
/// `rank(a, b) = T(a+b) + a`.
pub fn pair_rank(a: &BigUint, b: &BigUint) -> BigUint {
    triangular(&(a + b)) + a
}

/// Exact inverse of [`pair_rank`], using integer square root only.
pub fn pair_unrank(i: &BigUint) -> (BigUint, BigUint) {
    // Largest s with s(s+1)/2 <= i.
    let mut s = (((i * 8u32) + 1u32).sqrt() - 1u32) / 2u32;
    while triangular(&(&s + 1u32)) <= *i {
        s += 1u32;
    }
    while triangular(&s) > *i {
        s -= 1u32;
    }
    let a = i - triangular(&s);
    let b = &s - &a;
    (a, b)
}

/// Binomial coefficient with arbitrary-precision upper argument.
fn binomial(n: &BigUint, k: u64) -> BigUint {
    if *n < BigUint::from(k) {
        return BigUint::zero();
    }
    let mut result = BigUint::one();
    for i in 1..=k {
        // n - k + i is non-negative here; division is exact at each step.
        result = result * (n - BigUint::from(k - i)) / BigUint::from(i);
    }
    result
}

/// Number of `arity`-tuples with coordinate sum strictly below `s`.
fn layer_offset(s: &BigUint, arity: u64) -> BigUint {
    binomial(&(s + BigUint::from(arity - 1)), arity)
}

/// Rank of a tuple under the sum-layered lexicographic order. The layer of
/// coordinate sum `s` holds `C(s+k-1, k-1)` tuples; within a layer, tuples
/// are ordered lexicographically left-to-right. Coincides with
/// [`pair_rank`] at arity 2.
pub fn tuple_rank(components: &[BigUint]) -> Result<BigUint, EnumError> {
    let k = components.len() as u64;
    if k == 0 {
        return Err(EnumError::ZeroArity);
    }
    let s: BigUint = components.iter().sum();
    let mut rank = layer_offset(&s, k);
    let mut budget = s;
    for (j, c) in components.iter().take(components.len() - 1).enumerate() {
        let rem = k - j as u64 - 1;
        // Tuples in this layer whose coordinate j is smaller than c.
        rank += binomial(&(&budget + BigUint::from(rem)), rem)
            - binomial(&(&budget - c + BigUint::from(rem)), rem);
        budget -= c;
    }
    Ok(rank)
}

/// Inverse of [`tuple_rank`] for the given arity.
pub fn tuple_unrank(i: &BigUint, arity: usize) -> Result<Vec<BigUint>, EnumError> {
    let k = arity as u64;
    if k == 0 {
        return Err(EnumError::ZeroArity);
    }
    // Find the layer: largest s with layer_offset(s) <= i.
    let mut hi = BigUint::one();
    while layer_offset(&hi, k) <= *i {
        hi *= 2u32;
    }
    let mut lo = BigUint::zero();
    while &lo + 1u32 < hi {
        let mid = (&lo + &hi) / 2u32;
        if layer_offset(&mid, k) <= *i {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = lo;
    let mut rest = i - layer_offset(&s, k);
    let mut budget = s;
    let mut out = Vec::with_capacity(arity);
    for j in 0..k - 1 {
        let rem = k - j - 1;
        let below = |v: &BigUint| -> BigUint {
            binomial(&(&budget + BigUint::from(rem)), rem)
                - binomial(&(&budget - v + BigUint::from(rem)), rem)
        };
        // Largest v in [0, budget] with below(v) <= rest.
        let mut vlo = BigUint::zero();
        let mut vhi = &budget + 1u32;
        while &vlo + 1u32 < vhi {
            let mid = (&vlo + &vhi) / 2u32;
            if below(&mid) <= rest {
                vlo = mid;
            } else {
                vhi = mid;
            }
        }
        rest -= below(&vlo);
        budget -= &vlo;
        out.push(vlo);
    }
    out.push(budget);
    Ok(out)
}

/// Position of element `inner` of rule `rule` in the round-robin union:
/// round `t` emits, in rule order, element `t` of every rule whose size
/// exceeds `t`.
pub fn union_rank(sizes: &[RuleSize], rule: usize, inner: &BigUint) -> Result<BigUint, EnumError> {
    if let RuleSize::Finite(z) = sizes[rule] {
        if *inner >= BigUint::from(z) {
            return Err(EnumError::PositionOutOfRange {
                position: inner.clone(),
                total: BigUint::from(z),
            });
        }
    }
    // Elements emitted in rounds before `inner`, plus the offset of `rule`
    // among the rules still active at round `inner`.
    let mut pos = BigUint::zero();
    for sz in sizes {
        match sz {
            RuleSize::Infinite => pos += inner,
            RuleSize::Finite(z) => pos += inner.clone().min(BigUint::from(*z)),
        }
    }
    for sz in &sizes[..rule] {
        let active = match sz {
            RuleSize::Infinite => true,
            RuleSize::Finite(z) => BigUint::from(*z) > *inner,
        };
        if active {
            pos += 1u32;
        }
    }
    Ok(pos)
}

/// Inverse of [`union_rank`]: which rule and inner index a global position
/// denotes.
pub fn union_unrank(sizes: &[RuleSize], pos: &BigUint) -> Result<(usize, BigUint), EnumError> {
    let mut breakpoints: Vec<u64> = sizes
        .iter()
        .filter_map(|s| match s {
            RuleSize::Finite(z) => Some(*z),
            RuleSize::Infinite => None,
        })
        .collect();
    breakpoints.sort_unstable();
    breakpoints.dedup();

    let active_at = |t: u64| -> Vec<usize> {
        sizes
            .iter()
            .enumerate()
            .filter(|(_, s)| match s {
                RuleSize::Infinite => true,
                RuleSize::Finite(z) => *z > t,
            })
            .map(|(r, _)| r)
            .collect()
    };

    let mut remaining = pos.clone();
    let mut t = 0u64;
    for bp in breakpoints {
        if bp <= t {
            continue;
        }
        let active = active_at(t);
        let width = BigUint::from(active.len());
        let segment = &width * BigUint::from(bp - t);
        if remaining < segment {
            let round = BigUint::from(t) + &remaining / &width;
            let offset = (&remaining % &width)
                .try_into()
                .map(|v: u64| v as usize)
                .expect("offset below rule count");
            return Ok((active[offset], round));
        }
        remaining -= segment;
        t = bp;
    }
    let active = active_at(t);
    if active.is_empty() {
        let total: BigUint = sizes
            .iter()
            .map(|s| match s {
                RuleSize::Finite(z) => BigUint::from(*z),
                RuleSize::Infinite => BigUint::zero(),
            })
            .sum();
        return Err(EnumError::PositionOutOfRange {
            position: pos.clone(),
            total,
        });
    }
    let width = BigUint::from(active.len());
    let round = BigUint::from(t) + &remaining / &width;
    let offset = (&remaining % &width)
        .try_into()
        .map(|v: u64| v as usize)
        .expect("offset below rule count");
    Ok((active[offset], round))
}

// Production alternatives in grammar order.
const P_RULES: [RuleSize; 5] = [
    RuleSize::Finite(1), // skip
    RuleSize::Infinite,  // x[N] := A
    RuleSize::Infinite,  // (while B do P)
    RuleSize::Infinite,  // (P ; P)
    RuleSize::Infinite,  // (if B then P else P)
];
const B_RULES: [RuleSize; 7] = [
    RuleSize::Finite(1), // true
    RuleSize::Finite(1), // false
    RuleSize::Infinite,  // (A = A)
    RuleSize::Infinite,  // (A < A)
    RuleSize::Infinite,  // (B and B)
    RuleSize::Infinite,  // (B or B)
    RuleSize::Infinite,  // not B
];
const A_RULES: [RuleSize; 6] = [
    RuleSize::Finite(1), // readbit
    RuleSize::Infinite,  // N
    RuleSize::Infinite,  // x[N]
    RuleSize::Infinite,  // (A + A)
    RuleSize::Infinite,  // (A - A)
    RuleSize::Infinite,  // (A * A)
];

fn arith_unrank(pos: &BigUint) -> ArithExpr {
    let (rule, inner) = union_unrank(&A_RULES, pos).expect("A has infinite rules");
    match rule {
        0 => ArithExpr::ReadBit,
        1 => ArithExpr::Lit(inner),
        2 => ArithExpr::Loc(inner),
        op => {
            let (l, r) = pair_unrank(&inner);
            let l = Box::new(arith_unrank(&l));
            let r = Box::new(arith_unrank(&r));
            match op {
                3 => ArithExpr::Add(l, r),
                4 => ArithExpr::Sub(l, r),
                _ => ArithExpr::Mul(l, r),
            }
        }
    }
}

fn arith_rank(e: &ArithExpr) -> BigUint {
    let (rule, inner) = match e {
        ArithExpr::ReadBit => (0, BigUint::zero()),
        ArithExpr::Lit(n) => (1, n.clone()),
        ArithExpr::Loc(n) => (2, n.clone()),
        ArithExpr::Add(l, r) => (3, pair_rank(&arith_rank(l), &arith_rank(r))),
        ArithExpr::Sub(l, r) => (4, pair_rank(&arith_rank(l), &arith_rank(r))),
        ArithExpr::Mul(l, r) => (5, pair_rank(&arith_rank(l), &arith_rank(r))),
    };
    union_rank(&A_RULES, rule, &inner).expect("inner index within rule size")
}

fn bool_unrank(pos: &BigUint) -> BoolExpr {
    let (rule, inner) = union_unrank(&B_RULES, pos).expect("B has infinite rules");
    match rule {
        0 => BoolExpr::True,
        1 => BoolExpr::False,
        2 | 3 => {
            let (l, r) = pair_unrank(&inner);
            let l = Box::new(arith_unrank(&l));
            let r = Box::new(arith_unrank(&r));
            if rule == 2 {
                BoolExpr::Eq(l, r)
            } else {
                BoolExpr::Lt(l, r)
            }
        }
        4 | 5 => {
            let (l, r) = pair_unrank(&inner);
            let l = Box::new(bool_unrank(&l));
            let r = Box::new(bool_unrank(&r));
            if rule == 4 {
                BoolExpr::And(l, r)
            } else {
                BoolExpr::Or(l, r)
            }
        }
        _ => BoolExpr::Not(Box::new(bool_unrank(&inner))),
    }
}

fn bool_rank(e: &BoolExpr) -> BigUint {
    let (rule, inner) = match e {
        BoolExpr::True => (0, BigUint::zero()),
        BoolExpr::False => (1, BigUint::zero()),
        BoolExpr::Eq(l, r) => (2, pair_rank(&arith_rank(l), &arith_rank(r))),
        BoolExpr::Lt(l, r) => (3, pair_rank(&arith_rank(l), &arith_rank(r))),
        BoolExpr::And(l, r) => (4, pair_rank(&bool_rank(l), &bool_rank(r))),
        BoolExpr::Or(l, r) => (5, pair_rank(&bool_rank(l), &bool_rank(r))),
        BoolExpr::Not(b) => (6, bool_rank(b)),
    };
    union_rank(&B_RULES, rule, &inner).expect("inner index within rule size")
}

/// The sentence at position `n`. Total and bijective with
/// [`sentence_rank`].
pub fn sentence_unrank(n: &BigUint) -> Sentence {
    let (rule, inner) = union_unrank(&P_RULES, n).expect("P has infinite rules");
    match rule {
        0 => Sentence::Skip,
        1 => {
            let (loc, a) = pair_unrank(&inner);
            Sentence::Assign(loc, arith_unrank(&a))
        }
        2 => {
            let (b, p) = pair_unrank(&inner);
            Sentence::While(bool_unrank(&b), Box::new(sentence_unrank(&p)))
        }
        3 => {
            let (p, q) = pair_unrank(&inner);
            Sentence::Seq(
                Box::new(sentence_unrank(&p)),
                Box::new(sentence_unrank(&q)),
            )
        }
        _ => {
            let t = tuple_unrank(&inner, 3).expect("arity 3");
            Sentence::If(
                bool_unrank(&t[0]),
                Box::new(sentence_unrank(&t[1])),
                Box::new(sentence_unrank(&t[2])),
            )
        }
    }
}

/// The unique position of a sentence.
pub fn sentence_rank(s: &Sentence) -> BigUint {
    let (rule, inner) = match s {
        Sentence::Skip => (0, BigUint::zero()),
        Sentence::Assign(loc, a) => (1, pair_rank(loc, &arith_rank(a))),
        Sentence::While(b, p) => (2, pair_rank(&bool_rank(b), &sentence_rank(p))),
        Sentence::Seq(p, q) => (3, pair_rank(&sentence_rank(p), &sentence_rank(q))),
        Sentence::If(b, p, q) => {
            let t = [bool_rank(b), sentence_rank(p), sentence_rank(q)];
            (4, tuple_rank(&t).expect("arity 3"))
        }
    };
    union_rank(&P_RULES, rule, &inner).expect("inner index within rule size")
}
