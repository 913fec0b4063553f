//! Resource-bounded execution of IMP2 sentences.
//!
//! Every run is classified into one of five terminal statuses. A run that
//! finishes on its own is `Halted` when it consumed the input stream
//! exactly and `Extension` when bits were left over. A `readbit` on an
//! exhausted stream is the non-halting read-from-empty case and stops the
//! run as `ReadPastEnd`. When the machine configuration at a while guard
//! recurs exactly the run can never terminate and stops as `LoopDetected`;
//! everything else is cut off by the step threshold as
//! `ThresholdSurpassed`.
//!
//! Semantics: memory maps arbitrary-precision locations to
//! arbitrary-precision non-negative values, all initially zero; `readbit`
//! consumes the next input bit, in order, never twice; subtraction
//! truncates at zero; binary operators evaluate strictly left-to-right
//! with no short-circuiting. One step is counted per statement dispatch
//! (a while counts one more each time control returns to its guard) and
//! per expression node evaluated.

use crate::codec::{binstring_unrank, BitString, ProgramCode};
use crate::enumeration::sentence_unrank;
use crate::syntax::{ArithExpr, BoolExpr, Sentence};
use num_bigint::BigUint;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Terminal classification of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Halted,
    Extension,
    ReadPastEnd,
    LoopDetected,
    ThresholdSurpassed,
}

impl Status {
    pub const ALL: [Status; 5] = [
        Status::Halted,
        Status::Extension,
        Status::ReadPastEnd,
        Status::LoopDetected,
        Status::ThresholdSurpassed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Status::Halted => "halted",
            Status::Extension => "extension",
            Status::ReadPastEnd => "read_past_end",
            Status::LoopDetected => "loop_detected",
            Status::ThresholdSurpassed => "threshold_surpassed",
        }
    }

    /// True for the statuses that represent a run finishing on its own.
    pub fn is_termination(self) -> bool {
        matches!(self, Status::Halted | Status::Extension)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown status {s:?}"))
    }
}

/// Result of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub status: Status,
    pub steps_used: u64,
    pub bits_consumed: usize,
    /// Present exactly when the run halted validly.
    pub output: Option<BitString>,
}

/// Read-only access to an input bit stream. Lets the sweep supply inputs
/// straight from packed integers without materializing bit vectors.
pub trait InputBits {
    fn bit_len(&self) -> usize;
    /// The i-th bit from the left, `i < bit_len()`.
    fn bit_at(&self, i: usize) -> u8;
}

impl InputBits for BitString {
    fn bit_len(&self) -> usize {
        self.len()
    }

    fn bit_at(&self, i: usize) -> u8 {
        self.bits()[i]
    }
}

/// The low `len` bits of `value`, most significant first.
#[derive(Debug, Clone, Copy)]
pub struct PackedBits {
    pub value: u64,
    pub len: u32,
}

impl InputBits for PackedBits {
    fn bit_len(&self) -> usize {
        self.len as usize
    }

    fn bit_at(&self, i: usize) -> u8 {
        ((self.value >> (self.len as usize - 1 - i)) & 1) as u8
    }
}

/// A machine value: a non-negative integer, kept inline while it fits a
/// word. Invariant: `Big` only holds values above `u64::MAX`, so derived
/// equality is value equality.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Nat {
    Small(u64),
    Big(Box<BigUint>),
}

impl Nat {
    const ZERO: Nat = Nat::Small(0);

    fn from_biguint(b: &BigUint) -> Nat {
        match u64::try_from(b) {
            Ok(v) => Nat::Small(v),
            Err(_) => Nat::Big(Box::new(b.clone())),
        }
    }

    fn normalize(b: BigUint) -> Nat {
        match u64::try_from(&b) {
            Ok(v) => Nat::Small(v),
            Err(_) => Nat::Big(Box::new(b)),
        }
    }

    fn to_biguint(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => (**b).clone(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    fn add(&self, other: &Nat) -> Nat {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => match a.checked_add(*b) {
                Some(v) => Nat::Small(v),
                None => Nat::Big(Box::new(BigUint::from(*a) + *b)),
            },
            _ => Nat::normalize(self.to_biguint() + other.to_biguint()),
        }
    }

    /// Truncated subtraction: zero when `other` is the larger value.
    fn monus(&self, other: &Nat) -> Nat {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => Nat::Small(a.saturating_sub(*b)),
            (Nat::Small(_), Nat::Big(_)) => Nat::ZERO,
            _ => {
                let a = self.to_biguint();
                let b = other.to_biguint();
                if a <= b {
                    Nat::ZERO
                } else {
                    Nat::normalize(a - b)
                }
            }
        }
    }

    fn mul(&self, other: &Nat) -> Nat {
        if self.is_zero() || other.is_zero() {
            return Nat::ZERO;
        }
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => match a.checked_mul(*b) {
                Some(v) => Nat::Small(v),
                None => Nat::Big(Box::new(BigUint::from(*a) * *b)),
            },
            _ => Nat::Big(Box::new(self.to_biguint() * other.to_biguint())),
        }
    }

    /// Minimal little-endian bytes, length-prefixed, identical for equal
    /// values regardless of representation.
    fn write_canonical(&self, out: &mut Vec<u8>) {
        match self {
            Nat::Small(v) => {
                let bytes = v.to_le_bytes();
                let len = 8 - v.leading_zeros() as usize / 8;
                out.extend_from_slice(&(len as u32).to_le_bytes());
                out.extend_from_slice(&bytes[..len]);
            }
            Nat::Big(b) => {
                let bytes = b.to_bytes_le();
                out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
                out.extend_from_slice(&bytes);
            }
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

/// The memory array: locations with non-zero values, kept sorted by
/// location. Absent locations read as zero and zero is never stored, so
/// structural equality is state equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Memory {
    cells: Vec<(Nat, Nat)>,
}

impl Memory {
    pub fn new() -> Self {
        Memory::default()
    }

    fn get(&self, loc: &Nat) -> Nat {
        match self.cells.binary_search_by(|(l, _)| l.cmp(loc)) {
            Ok(i) => self.cells[i].1.clone(),
            Err(_) => Nat::ZERO,
        }
    }

    fn set(&mut self, loc: Nat, value: Nat) {
        match self.cells.binary_search_by(|(l, _)| l.cmp(&loc)) {
            Ok(i) => {
                if value.is_zero() {
                    self.cells.remove(i);
                } else {
                    self.cells[i].1 = value;
                }
            }
            Err(i) => {
                if !value.is_zero() {
                    self.cells.insert(i, (loc, value));
                }
            }
        }
    }

    /// Stores a value at a location, both as arbitrary-precision naturals.
    pub fn store(&mut self, loc: &BigUint, value: &BigUint) {
        self.set(Nat::from_biguint(loc), Nat::from_biguint(value));
    }

    /// The value at a location (zero when absent).
    pub fn load(&self, loc: &BigUint) -> BigUint {
        self.get(&Nat::from_biguint(loc)).to_biguint()
    }

    /// Non-zero cells in increasing location order.
    pub fn iter(&self) -> impl Iterator<Item = (BigUint, BigUint)> + '_ {
        self.cells
            .iter()
            .map(|(l, v)| (l.to_biguint(), v.to_biguint()))
    }

    fn clear(&mut self) {
        self.cells.clear();
    }
}

/// The output convention: concatenate `B_value` over memory locations in
/// increasing location order. Zero-valued locations contribute the empty
/// string.
pub fn extract_output(mem: &Memory) -> BitString {
    let mut out = BitString::new();
    for (_, value) in &mem.cells {
        let piece = binstring_unrank(&value.to_biguint());
        for &b in piece.bits() {
            out.push(b);
        }
    }
    out
}

enum Stop {
    ReadPastEnd,
    LoopDetected,
    Threshold,
}

const FNV128_OFFSET: u128 = 0x6c62272e07bb014262b821756295c58d;
const FNV128_PRIME: u128 = 0x0000000001000000000000000000013b;

fn fnv1a128(bytes: &[u8]) -> u128 {
    let mut h = FNV128_OFFSET;
    for &b in bytes {
        h ^= b as u128;
        h = h.wrapping_mul(FNV128_PRIME);
    }
    h
}

#[derive(PartialEq, Eq)]
struct GuardSnapshot {
    guard: usize,
    cursor: usize,
    cells: Vec<(Nat, Nat)>,
}

/// Reusable execution engine. A fresh [`Executor`] per run is fine;
/// sweeps reuse one to keep the per-program cost allocation-free.
#[derive(Default)]
pub struct Executor {
    mem: Memory,
    cursor: usize,
    steps: u64,
    threshold: u64,
    snapshots: Vec<GuardSnapshot>,
    // 128-bit content hash indexes candidate snapshots; equality is then
    // verified on the full snapshot, so a detected loop is never spurious.
    snap_index: HashMap<u128, Vec<u32>>,
    hash_buf: Vec<u8>,
}

impl Executor {
    pub fn new() -> Self {
        Executor::default()
    }

    /// Runs a sentence on an input stream under a step budget.
    pub fn run<I: InputBits + ?Sized>(
        &mut self,
        sentence: &Sentence,
        input: &I,
        threshold: u64,
    ) -> ExecOutcome {
        self.mem.clear();
        self.cursor = 0;
        self.steps = 0;
        self.threshold = threshold;
        self.snapshots.clear();
        self.snap_index.clear();

        let result = self.exec(sentence, input);
        let status = match result {
            Ok(()) if self.cursor == input.bit_len() => Status::Halted,
            Ok(()) => Status::Extension,
            Err(Stop::ReadPastEnd) => Status::ReadPastEnd,
            Err(Stop::LoopDetected) => Status::LoopDetected,
            Err(Stop::Threshold) => Status::ThresholdSurpassed,
        };
        let output = (status == Status::Halted).then(|| extract_output(&self.mem));
        ExecOutcome {
            status,
            steps_used: self.steps,
            bits_consumed: self.cursor,
            output,
        }
    }

    /// Memory as left by the most recent run.
    pub fn memory(&self) -> &Memory {
        &self.mem
    }

    fn step(&mut self) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.threshold {
            Err(Stop::Threshold)
        } else {
            Ok(())
        }
    }

    /// Records the configuration at a while guard; an exact recurrence
    /// proves the run can never terminate.
    fn check_guard(&mut self, guard: usize) -> Result<(), Stop> {
        self.hash_buf.clear();
        self.hash_buf.extend_from_slice(&guard.to_le_bytes());
        self.hash_buf.extend_from_slice(&self.cursor.to_le_bytes());
        for (loc, value) in &self.mem.cells {
            loc.write_canonical(&mut self.hash_buf);
            value.write_canonical(&mut self.hash_buf);
        }
        let key = fnv1a128(&self.hash_buf);
        if let Some(bucket) = self.snap_index.get(&key) {
            for &i in bucket {
                let snap = &self.snapshots[i as usize];
                if snap.guard == guard
                    && snap.cursor == self.cursor
                    && snap.cells == self.mem.cells
                {
                    return Err(Stop::LoopDetected);
                }
            }
        }
        let idx = self.snapshots.len() as u32;
        self.snapshots.push(GuardSnapshot {
            guard,
            cursor: self.cursor,
            cells: self.mem.cells.clone(),
        });
        self.snap_index.entry(key).or_default().push(idx);
        Ok(())
    }

    fn exec<I: InputBits + ?Sized>(&mut self, s: &Sentence, input: &I) -> Result<(), Stop> {
        self.step()?;
        match s {
            Sentence::Skip => Ok(()),
            Sentence::Assign(loc, e) => {
                let value = self.eval_arith(e, input)?;
                self.mem.set(Nat::from_biguint(loc), value);
                Ok(())
            }
            Sentence::Seq(p, q) => {
                self.exec(p, input)?;
                self.exec(q, input)
            }
            Sentence::If(cond, t, e) => {
                if self.eval_bool(cond, input)? {
                    self.exec(t, input)
                } else {
                    self.exec(e, input)
                }
            }
            Sentence::While(cond, body) => {
                let guard = s as *const Sentence as usize;
                loop {
                    self.check_guard(guard)?;
                    if !self.eval_bool(cond, input)? {
                        return Ok(());
                    }
                    self.exec(body, input)?;
                    self.step()?;
                }
            }
        }
    }

    fn eval_arith<I: InputBits + ?Sized>(
        &mut self,
        e: &ArithExpr,
        input: &I,
    ) -> Result<Nat, Stop> {
        self.step()?;
        match e {
            ArithExpr::ReadBit => {
                if self.cursor == input.bit_len() {
                    return Err(Stop::ReadPastEnd);
                }
                let bit = input.bit_at(self.cursor);
                self.cursor += 1;
                Ok(Nat::Small(bit as u64))
            }
            ArithExpr::Lit(n) => Ok(Nat::from_biguint(n)),
            ArithExpr::Loc(n) => Ok(self.mem.get(&Nat::from_biguint(n))),
            ArithExpr::Add(l, r) => {
                let a = self.eval_arith(l, input)?;
                let b = self.eval_arith(r, input)?;
                Ok(a.add(&b))
            }
            ArithExpr::Sub(l, r) => {
                let a = self.eval_arith(l, input)?;
                let b = self.eval_arith(r, input)?;
                Ok(a.monus(&b))
            }
            ArithExpr::Mul(l, r) => {
                let a = self.eval_arith(l, input)?;
                let b = self.eval_arith(r, input)?;
                Ok(a.mul(&b))
            }
        }
    }

    fn eval_bool<I: InputBits + ?Sized>(&mut self, e: &BoolExpr, input: &I) -> Result<bool, Stop> {
        self.step()?;
        match e {
            BoolExpr::True => Ok(true),
            BoolExpr::False => Ok(false),
            BoolExpr::Eq(l, r) => {
                let a = self.eval_arith(l, input)?;
                let b = self.eval_arith(r, input)?;
                Ok(a == b)
            }
            BoolExpr::Lt(l, r) => {
                let a = self.eval_arith(l, input)?;
                let b = self.eval_arith(r, input)?;
                Ok(a < b)
            }
            BoolExpr::And(l, r) => {
                let a = self.eval_bool(l, input)?;
                let b = self.eval_bool(r, input)?;
                Ok(a && b)
            }
            BoolExpr::Or(l, r) => {
                let a = self.eval_bool(l, input)?;
                let b = self.eval_bool(r, input)?;
                Ok(a || b)
            }
            BoolExpr::Not(b) => Ok(!self.eval_bool(b, input)?),
        }
    }
}

/// One-shot execution of a sentence on an input stream.
pub fn execute<I: InputBits + ?Sized>(
    sentence: &Sentence,
    input: &I,
    threshold: u64,
) -> ExecOutcome {
    Executor::new().run(sentence, input, threshold)
}

/// Decodes the sentence index of a two-part code and executes it on the
/// code's input stream.
pub fn execute_code(code: &ProgramCode, threshold: u64) -> ExecOutcome {
    let sentence = sentence_unrank(&code.sentence_index);
    execute(&sentence, &code.input, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    const FACTORIAL: &str = "(x[0] := 5 ; (x[1] := 1 ; (while (0 < x[0]) do \
                             (x[1] := (x[1] * x[0]) ; x[0] := (x[0] - 1)))))";
    const COUNT_ONES: &str = "(x[0] := readbit ; (while (readbit = 1) do x[0] := (x[0] + 1)))";

    #[test]
    fn factorial_halts_with_output() {
        let s = parse(FACTORIAL).unwrap();
        let out = execute(&s, &bits(""), 1_000_000);
        assert_eq!(out.status, Status::Halted);
        assert_eq!(out.bits_consumed, 0);
        assert_eq!(out.output.unwrap().to_string(), "111001");
    }

    #[test]
    fn count_ones_consumes_exactly_its_input() {
        let s = parse(COUNT_ONES).unwrap();
        let mut ex = Executor::new();
        let out = ex.run(&s, &bits("1110"), 1_000_000);
        assert_eq!(out.status, Status::Halted);
        assert_eq!(out.bits_consumed, 4);
        assert_eq!(ex.memory().load(&BigUint::from(0u32)), BigUint::from(3u32));
        assert_eq!(out.output.unwrap().to_string(), "00");
    }

    #[test]
    fn count_ones_fails_reading_past_short_input() {
        let s = parse(COUNT_ONES).unwrap();
        let out = execute(&s, &bits("11"), 1_000_000);
        assert_eq!(out.status, Status::ReadPastEnd);
        assert_eq!(out.bits_consumed, 2);
        assert_eq!(out.output, None);
    }

    #[test]
    fn unread_input_is_an_extension() {
        let out = execute(&Sentence::Skip, &bits("0"), 10);
        assert_eq!(out.status, Status::Extension);
        assert_eq!(out.bits_consumed, 0);
        assert_eq!(out.steps_used, 1);
    }

    #[test]
    fn trivial_loop_is_detected() {
        let s = parse("(while true do skip)").unwrap();
        let out = execute(&s, &bits(""), 1_000_000);
        assert_eq!(out.status, Status::LoopDetected);
    }

    #[test]
    fn growing_loop_hits_the_threshold() {
        let s = parse("(while (0 < (x[0] + 1)) do x[0] := (x[0] + 1))").unwrap();
        let out = execute(&s, &bits(""), 100);
        assert_eq!(out.status, Status::ThresholdSurpassed);
        assert_eq!(out.steps_used, 101);
    }

    #[test]
    fn loop_over_consumed_bits_is_not_a_false_positive() {
        // The guard consumes a bit per round, so the configuration never
        // recurs and the run halts after the final zero bit.
        let s = parse("(while (readbit = 1) do skip)").unwrap();
        let out = execute(&s, &bits("1110"), 1_000_000);
        assert_eq!(out.status, Status::Halted);
        assert_eq!(out.bits_consumed, 4);
        assert_eq!(out.output.unwrap().to_string(), "");
    }

    #[test]
    fn output_concatenates_locations_in_index_order() {
        let mut mem = Memory::new();
        assert_eq!(extract_output(&mem).to_string(), "");

        mem.store(&BigUint::from(1u32), &BigUint::from(120u32));
        assert_eq!(extract_output(&mem).to_string(), "111001");

        let mut mem = Memory::new();
        mem.store(&BigUint::from(5u32), &BigUint::from(2u32));
        mem.store(&BigUint::from(2u32), &BigUint::from(1u32));
        assert_eq!(extract_output(&mem).to_string(), "01");
    }

    #[test]
    fn zero_stores_leave_memory_empty() {
        let s = parse("x[0] := (1 - 5)").unwrap();
        let mut ex = Executor::new();
        let out = ex.run(&s, &bits(""), 100);
        assert_eq!(out.status, Status::Halted);
        assert_eq!(out.output.unwrap().to_string(), "");
        assert_eq!(ex.memory().iter().count(), 0);

        let s = parse("x[0] := (7 - 5)").unwrap();
        let out = execute(&s, &bits(""), 100);
        assert_eq!(out.output.unwrap().to_string(), "1");
    }

    #[test]
    fn operands_evaluate_left_to_right() {
        let s = parse("x[0] := (readbit - readbit)").unwrap();
        let out = execute(&s, &bits("10"), 100);
        assert_eq!(out.status, Status::Halted);
        assert_eq!(out.output.unwrap().to_string(), "0"); // 1 - 0

        let out = execute(&s, &bits("01"), 100);
        assert_eq!(out.status, Status::Halted);
        assert_eq!(out.output.unwrap().to_string(), ""); // 0 - 1 truncates
    }

    #[test]
    fn boolean_operators_do_not_short_circuit() {
        let s = parse("(if (false and (readbit = 1)) then skip else skip)").unwrap();
        let out = execute(&s, &bits("1"), 100);
        assert_eq!(out.status, Status::Halted);
        assert_eq!(out.bits_consumed, 1);
    }

    #[test]
    fn skip_takes_one_step() {
        let out = execute(&Sentence::Skip, &bits(""), 10);
        assert_eq!(out.steps_used, 1);
        assert_eq!(out.status, Status::Halted);
    }

    #[test]
    fn execution_is_deterministic() {
        let s = parse(COUNT_ONES).unwrap();
        let a = execute(&s, &bits("10110"), 1000);
        let b = execute(&s, &bits("10110"), 1000);
        assert_eq!(a, b);
    }

    #[test]
    fn packed_and_vector_inputs_agree() {
        let s = parse(COUNT_ONES).unwrap();
        for value in 0..32u64 {
            let packed = PackedBits { value, len: 5 };
            let vector = BitString::from_packed(value, 5);
            assert_eq!(
                execute(&s, &packed, 1000),
                execute(&s, &vector, 1000),
                "value {value}"
            );
        }
    }

    #[test]
    fn raising_the_threshold_preserves_settled_outcomes() {
        let programs = [
            FACTORIAL,
            COUNT_ONES,
            "(while true do skip)",
            "(while (0 < (x[0] + 1)) do x[0] := (x[0] + 1))",
            "skip",
        ];
        for text in programs {
            let s = parse(text).unwrap();
            for input in ["", "1", "10", "111"] {
                let lo = execute(&s, &bits(input), 50);
                let hi = execute(&s, &bits(input), 5000);
                if lo.status != Status::ThresholdSurpassed {
                    assert_eq!(lo, hi, "{text} on {input:?}");
                }
            }
        }
    }

    #[test]
    fn big_values_survive_arithmetic() {
        // 2^80 by repeated doubling, then back down to a small value.
        let s = parse(
            "(x[0] := 1 ; ((while (x[1] < 80) do (x[0] := (x[0] + x[0]) ; \
             x[1] := (x[1] + 1))) ; x[0] := ((x[0] - 3) - (x[0] - 5))))",
        )
        .unwrap();
        let mut ex = Executor::new();
        let out = ex.run(&s, &bits(""), 100_000);
        assert_eq!(out.status, Status::Halted);
        // (2^80 - 3) - (2^80 - 5) = 2
        assert_eq!(ex.memory().load(&BigUint::from(0u32)), BigUint::from(2u32));
    }
}
