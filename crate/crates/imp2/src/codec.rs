//! Binary-string bijection, self-delimiting two-part program codes, and the
//! length-stratified program space.
//!
//! `B_n` is the n-th binary string in the length-increasing lexicographic
//! order `(ε,0), (0,1), (1,2), (00,3), ...` — the binary numeral of `n+1`
//! with its leading 1 removed. A program code `<n, y>` is the bit string
//! `1^|B_n| 0 B_n y`: the padded prefix makes the sentence index
//! self-delimiting, and every remaining bit belongs to the input stream
//! `y`. A code of length `m` whose index part occupies `k` bits (`k` is
//! always odd) leaves `2^(m-k)` choices of input and spans `2^((k-1)/2)`
//! sentence indices, which is the basis for counting, iterating, and
//! sampling the space of codes of bounded length.

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("malformed self-delimiting prefix: got {got} bits, need at least {need}")]
    MalformedPrefix { got: usize, need: usize },
    #[error("prefix length {k} invalid for code length {m}: need odd k with 1 <= k <= m")]
    InvalidStratum { m: u32, k: u32 },
    #[error("range [{lo}, {hi}) out of bounds for stratum of size {size}")]
    RangeOutOfBounds {
        lo: BigUint,
        hi: BigUint,
        size: BigUint,
    },
    #[error("maximum code length must be at least 1")]
    EmptySpace,
}

/// A finite sequence of bits, leftmost bit first.
///
/// Renders as ASCII `0`/`1` text (the empty string for ε) and orders by
/// length first, then lexicographically — the same order in which the
/// strings appear as outputs of the `B_n` enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    /// Wraps a vector of 0/1 values.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        BitString(bits)
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_packed(value: u64, len: u32) -> Self {
        let mut bits = Vec::with_capacity(len as usize);
        for i in (0..len).rev() {
            bits.push(((value >> i) & 1) as u8);
        }
        BitString(bits)
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        self.0.push(bit);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// True if `self` is a proper prefix of `other`.
    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && other.0[..self.len()] == self.0[..]
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit character {ch:?} at position {pos}")]
pub struct ParseBitStringError {
    pub pos: usize,
    pub ch: char,
}

impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return Err(ParseBitStringError { pos, ch }),
            }
        }
        Ok(BitString(bits))
    }
}

/// The n-th binary string in length-increasing lexicographic order.
pub fn binstring_unrank(n: &BigUint) -> BitString {
    let mut digits = (n + 1u32).to_radix_be(2);
    digits.remove(0);
    BitString(digits)
}

/// Position of a binary string in the length-increasing lexicographic
/// order; inverse of [`binstring_unrank`].
pub fn binstring_rank(s: &BitString) -> BigUint {
    let mut digits = Vec::with_capacity(s.len() + 1);
    digits.push(1u8);
    digits.extend_from_slice(s.bits());
    BigUint::from_radix_be(&digits, 2).expect("digits are binary") - 1u32
}

/// A two-part program code: a sentence index and an input bit stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramCode {
    pub sentence_index: BigUint,
    pub input: BitString,
}

impl ProgramCode {
    pub fn new(sentence_index: BigUint, input: BitString) -> Self {
        ProgramCode {
            sentence_index,
            input,
        }
    }

    /// Total encoded length in bits: `2|B_n| + 1 + |y|`.
    pub fn encoded_len(&self) -> usize {
        let bn = binstring_unrank(&self.sentence_index);
        2 * bn.len() + 1 + self.input.len()
    }
}

/// The self-delimiting bits `1^|B_n| 0 B_n y` of a program code.
pub fn encode_program(p: &ProgramCode) -> BitString {
    let bn = binstring_unrank(&p.sentence_index);
    let mut bits = Vec::with_capacity(2 * bn.len() + 1 + p.input.len());
    bits.resize(bn.len(), 1u8);
    bits.push(0);
    bits.extend_from_slice(bn.bits());
    bits.extend_from_slice(p.input.bits());
    BitString(bits)
}

/// Parses the self-delimiting index part of `bits` and treats every
/// remaining bit as input stream. Returns the code together with the
/// number of bits the index part consumed.
pub fn decode_program(bits: &[u8]) -> Result<(ProgramCode, usize), CodecError> {
    let ones = bits.iter().take_while(|&&b| b == 1).count();
    let prefix_len = 2 * ones + 1;
    if bits.len() < prefix_len {
        return Err(CodecError::MalformedPrefix {
            got: bits.len(),
            need: prefix_len,
        });
    }
    let bn = BitString(bits[ones + 1..prefix_len].to_vec());
    let n = binstring_rank(&bn);
    let y = BitString(bits[prefix_len..].to_vec());
    Ok((ProgramCode::new(n, y), prefix_len))
}

/// One (code length, prefix length) cell of the program space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    /// Total code length `m` in bits.
    pub code_len: u32,
    /// Bits taken by the self-delimiting index part (`k`, odd).
    pub prefix_len: u32,
    /// `2^((k-1)/2)` sentence indices.
    pub sentence_count: BigUint,
    /// `2^(m-k)` input streams.
    pub input_count: BigUint,
}

impl Stratum {
    pub fn new(code_len: u32, prefix_len: u32) -> Result<Self, CodecError> {
        if prefix_len % 2 == 0 || prefix_len == 0 || prefix_len > code_len {
            return Err(CodecError::InvalidStratum {
                m: code_len,
                k: prefix_len,
            });
        }
        Ok(Stratum {
            code_len,
            prefix_len,
            sentence_count: BigUint::one() << ((prefix_len - 1) / 2),
            input_count: BigUint::one() << (code_len - prefix_len),
        })
    }

    pub fn size(&self) -> BigUint {
        &self.sentence_count * &self.input_count
    }

    /// Smallest sentence index whose `B_n` occupies `(k-1)/2` bits.
    pub fn first_sentence_index(&self) -> BigUint {
        &self.sentence_count - 1u32
    }

    /// The code at a flattened position: index `i` maps to the
    /// `(i / input_count)`-th sentence and the `(i mod input_count)`-th
    /// input of length `m - k` in lexicographic order.
    pub fn code_at(&self, i: &BigUint) -> ProgramCode {
        debug_assert!(*i < self.size());
        let (q, r) = num_integer::div_rem(i.clone(), self.input_count.clone());
        let n = self.first_sentence_index() + q;
        let width = (self.code_len - self.prefix_len) as usize;
        // to_radix_be renders zero as a single 0 digit; the empty input
        // wants no digits at all.
        let mut bits = if r == BigUint::ZERO {
            Vec::new()
        } else {
            r.to_radix_be(2)
        };
        let mut y = Vec::with_capacity(width);
        y.resize(width - bits.len(), 0u8);
        y.append(&mut bits);
        ProgramCode::new(n, BitString(y))
    }
}

/// All strata of code length at most `max_len`, lengths ascending and
/// prefix lengths ascending within a length.
pub fn strata(max_len: u32) -> Vec<Stratum> {
    let mut out = Vec::new();
    for m in 1..=max_len {
        for k in (1..=m).step_by(2) {
            out.push(Stratum::new(m, k).expect("valid stratum"));
        }
    }
    out
}

/// Exact number of program codes of length at most `max_len`.
pub fn count_programs(max_len: u32) -> BigUint {
    strata(max_len).iter().map(|s| s.size()).sum()
}

/// Streams the codes of one stratum over the flattened range `[lo, hi)`.
pub fn iterate_stratum(
    code_len: u32,
    prefix_len: u32,
    lo: &BigUint,
    hi: &BigUint,
) -> Result<impl Iterator<Item = ProgramCode>, CodecError> {
    let stratum = Stratum::new(code_len, prefix_len)?;
    let size = stratum.size();
    if lo > hi || *hi > size {
        return Err(CodecError::RangeOutOfBounds {
            lo: lo.clone(),
            hi: hi.clone(),
            size,
        });
    }
    let mut i = lo.clone();
    let hi = hi.clone();
    Ok(std::iter::from_fn(move || {
        if i < hi {
            let code = stratum.code_at(&i);
            i += 1u32;
            Some(code)
        } else {
            None
        }
    }))
}

/// Draws a program uniformly at random among all codes of length at most
/// `max_len`: a stratum is chosen with probability proportional to its
/// size, then a flattened position uniformly within it.
pub fn sample_program<R: Rng + ?Sized>(
    max_len: u32,
    rng: &mut R,
) -> Result<ProgramCode, CodecError> {
    if max_len == 0 {
        return Err(CodecError::EmptySpace);
    }
    let all = strata(max_len);
    let total = all.iter().map(|s| s.size()).sum::<BigUint>();
    let mut draw = rng.gen_biguint_below(&total);
    for stratum in &all {
        let size = stratum.size();
        if draw < size {
            return Ok(stratum.code_at(&draw));
        }
        draw -= size;
    }
    unreachable!("draw below total")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn binstring_enumeration_start() {
        // (ε,0), (0,1), (1,2), (00,3), (01,4), (10,5), (11,6)
        let expected = ["", "0", "1", "00", "01", "10", "11"];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(binstring_unrank(&big(i as u64)).to_string(), *e);
            assert_eq!(binstring_rank(&bits(e)), big(i as u64));
        }
        assert_eq!(binstring_unrank(&big(120)).to_string(), "111001");
        assert_eq!(binstring_rank(&bits("111001")), big(120));
    }

    #[test]
    fn binstring_roundtrip_prefix() {
        for n in 0..10_000u64 {
            let s = binstring_unrank(&big(n));
            assert_eq!(binstring_rank(&s), big(n));
        }
    }

    #[test]
    fn bitstring_order_is_shortlex() {
        let mut v = vec![bits("1"), bits(""), bits("00"), bits("0"), bits("10")];
        v.sort();
        let rendered: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(rendered, vec!["", "0", "1", "00", "10"]);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(
            encode_program(&ProgramCode::new(big(0), bits(""))).to_string(),
            "0"
        );
        assert_eq!(
            encode_program(&ProgramCode::new(big(2), bits("01"))).to_string(),
            "10101"
        );
        assert_eq!(
            encode_program(&ProgramCode::new(big(5), bits(""))).to_string(),
            "11010"
        );
    }

    #[test]
    fn decode_examples() {
        let (p, consumed) = decode_program(bits("0").bits()).unwrap();
        assert_eq!((p.sentence_index, p.input.len(), consumed), (big(0), 0, 1));

        let (p, consumed) = decode_program(bits("10101").bits()).unwrap();
        assert_eq!(p.sentence_index, big(2));
        assert_eq!(p.input.to_string(), "01");
        assert_eq!(consumed, 3);

        assert_eq!(
            decode_program(bits("11").bits()),
            Err(CodecError::MalformedPrefix { got: 2, need: 5 })
        );
        assert!(decode_program(&[]).is_err());
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_programs(0), big(0));
        assert_eq!(count_programs(1), big(1));
        assert_eq!(count_programs(3), big(9));
        assert_eq!(count_programs(14), big(32_385));
        assert_eq!(count_programs(20), big(2_094_081));
        assert_eq!(count_programs(26), big(134_193_153));
        assert_eq!(
            count_programs(40),
            "2199020109825".parse::<BigUint>().unwrap()
        );
    }

    /// Independent oracle: a string of length m is a valid code exactly
    /// when its self-delimiting prefix parses and every remaining bit is
    /// input, so counting decodable strings of each length must reproduce
    /// the stratified count.
    #[test]
    fn count_matches_decode_all_bitstrings() {
        for max_len in 1..=10u32 {
            let mut valid = 0u64;
            for m in 1..=max_len {
                for v in 0..(1u64 << m) {
                    let s = BitString::from_packed(v, m);
                    if decode_program(s.bits()).is_ok() {
                        valid += 1;
                    }
                }
            }
            assert_eq!(BigUint::from(valid), count_programs(max_len), "L={max_len}");
        }
    }

    #[test]
    fn iterate_stratum_examples() {
        let only: Vec<_> = iterate_stratum(1, 1, &big(0), &big(1)).unwrap().collect();
        assert_eq!(only, vec![ProgramCode::new(big(0), bits(""))]);

        let inputs: Vec<_> = iterate_stratum(3, 1, &big(0), &big(4)).unwrap().collect();
        let expected: Vec<_> = ["00", "01", "10", "11"]
            .iter()
            .map(|y| ProgramCode::new(big(0), bits(y)))
            .collect();
        assert_eq!(inputs, expected);

        let sentences: Vec<_> = iterate_stratum(3, 3, &big(0), &big(2)).unwrap().collect();
        assert_eq!(
            sentences,
            vec![
                ProgramCode::new(big(1), bits("")),
                ProgramCode::new(big(2), bits(""))
            ]
        );
    }

    #[test]
    fn iterate_stratum_rejects_bad_ranges() {
        assert!(matches!(
            iterate_stratum(3, 3, &big(0), &big(3)),
            Err(CodecError::RangeOutOfBounds { .. })
        ));
        assert!(matches!(
            iterate_stratum(3, 2, &big(0), &big(1)),
            Err(CodecError::InvalidStratum { .. })
        ));
    }

    #[test]
    fn stratified_enumeration_is_exact_and_duplicate_free() {
        // Every code of length <= 12 appears exactly once across strata,
        // its encoding has the stratum's length, and encoding then
        // decoding is the identity.
        let mut seen = std::collections::HashSet::new();
        let mut total = 0u64;
        for stratum in strata(12) {
            let size = stratum.size();
            for code in iterate_stratum(
                stratum.code_len,
                stratum.prefix_len,
                &BigUint::zero(),
                &size,
            )
            .unwrap()
            {
                let enc = encode_program(&code);
                assert_eq!(enc.len() as u32, stratum.code_len);
                let (back, _) = decode_program(enc.bits()).unwrap();
                assert_eq!(back, code);
                assert!(seen.insert(enc), "duplicate encoding");
                total += 1;
            }
        }
        assert_eq!(BigUint::from(total), count_programs(12));
    }

    #[test]
    fn stratum_ranges_concatenate() {
        let stratum = Stratum::new(9, 5).unwrap();
        let size = stratum.size();
        let whole: Vec<_> = iterate_stratum(9, 5, &BigUint::zero(), &size)
            .unwrap()
            .collect();
        let mut pieces = Vec::new();
        let cuts = [big(0), big(7), big(13), size.clone()];
        for w in cuts.windows(2) {
            pieces.extend(iterate_stratum(9, 5, &w[0], &w[1]).unwrap());
        }
        assert_eq!(whole, pieces);
    }

    #[test]
    fn sample_space_of_length_one_is_singleton() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = sample_program(1, &mut rng).unwrap();
            assert_eq!(p, ProgramCode::new(big(0), bits("")));
        }
        assert_eq!(sample_program(0, &mut rng), Err(CodecError::EmptySpace));
    }

    #[test]
    fn sample_is_uniform_over_length_three_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000usize;
        let mut counts: std::collections::HashMap<String, usize> = Default::default();
        for _ in 0..draws {
            let p = sample_program(3, &mut rng).unwrap();
            assert!(p.encoded_len() <= 3);
            *counts.entry(encode_program(&p).to_string()).or_default() += 1;
        }
        assert_eq!(counts.len(), 9);
        // Binomial(draws, 1/9): allow three standard deviations.
        let expect = draws as f64 / 9.0;
        let sigma = (draws as f64 * (1.0 / 9.0) * (8.0 / 9.0)).sqrt();
        for (code, count) in counts {
            assert!(
                (count as f64 - expect).abs() < 3.0 * sigma,
                "{code}: {count} vs {expect}"
            );
        }
    }
}
