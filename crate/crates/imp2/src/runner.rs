//! Partitioned sweeps of the program space.
//!
//! A sweep enumerates every code of length 1..=L that falls into its
//! partition, executes it, and aggregates per-output halting counts, the
//! smallest program found per output, and status tallies. Within each
//! (length, prefix-length) stratum the flattened index space is split
//! into `count` contiguous ranges, one per partition, so independent
//! machines can each run one partition and the results merge offline.
//!
//! Aggregation is associative and commutative: halting counts and status
//! tallies sum, and the smallest-program witness is the minimum by
//! (length, encoded bits). For codes of equal length the enumeration
//! order (prefix length, then sentence, then input) coincides with the
//! lexicographic order of the encoded bits, so that minimum is exactly
//! the earliest witness in enumeration order and merged results are
//! bit-identical to a single-partition sweep.

use crate::codec::{count_programs, encode_program, strata, BitString, ProgramCode, Stratum};
use crate::enumeration::sentence_unrank;
use crate::interpreter::{Executor, PackedBits, Status};
use num_bigint::BigUint;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;
use thiserror::Error;

/// Sweeps keep flattened stratum indices in machine words; lengths beyond
/// this bound would take geological time anyway.
pub const MAX_SWEEP_LEN: u32 = 62;

/// Programs per work block: the unit of parallelism and checkpointing.
const BLOCK_SIZE: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("max code length must lie in 1..={MAX_SWEEP_LEN}, got {0}")]
    InvalidMaxLen(u32),
    #[error("step threshold must be at least 1")]
    InvalidThreshold,
    #[error("partition index {index} out of range for {count} partitions")]
    InvalidPartition { index: u32, count: u32 },
    #[error("nothing to merge")]
    EmptyMerge,
    #[error("metadata mismatch across aggregates: {field}")]
    MetadataMismatch { field: &'static str },
    #[error("partitions do not tile the space: {0}")]
    PartitionCoverage(String),
    #[error("results file line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("checkpoint does not belong to this run configuration: {0}")]
    CheckpointMismatch(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// `index/count` placement of one worker in a partitioned run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionSpec {
    pub index: u32,
    pub count: u32,
}

impl PartitionSpec {
    pub const WHOLE: PartitionSpec = PartitionSpec { index: 0, count: 1 };

    pub fn new(index: u32, count: u32) -> Result<Self, RunnerError> {
        if count == 0 || index >= count {
            return Err(RunnerError::InvalidPartition { index, count });
        }
        Ok(PartitionSpec { index, count })
    }

    /// This partition's contiguous range of a stratum of `size` flattened
    /// positions. The last partition takes the remainder.
    fn range(&self, size: u64) -> (u64, u64) {
        let base = size / self.count as u64;
        let lo = base * self.index as u64;
        let hi = if self.index + 1 == self.count {
            size
        } else {
            base * (self.index as u64 + 1)
        };
        (lo, hi)
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, self.count)
    }
}

impl FromStr for PartitionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (i, k) = s
            .split_once('/')
            .ok_or_else(|| format!("expected i/k, got {s:?}"))?;
        let index: u32 = i.parse().map_err(|e| format!("bad partition index: {e}"))?;
        let count: u32 = k.parse().map_err(|e| format!("bad partition count: {e}"))?;
        PartitionSpec::new(index, count).map_err(|e| e.to_string())
    }
}

/// Per-output aggregate of one swept region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputStats {
    pub halt_count: u64,
    /// Code length in bits of the smallest program found for this output.
    pub spf_length: u32,
    /// Encoded bits of that program; decodes to a witness reproducing the
    /// output.
    pub first_program: BitString,
}

/// Counts per terminal status, in the canonical status order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatusTallies {
    counts: [u64; 5],
}

impl StatusTallies {
    pub fn bump(&mut self, status: Status) {
        self.counts[status as usize] += 1;
    }

    pub fn get(&self, status: Status) -> u64 {
        self.counts[status as usize]
    }

    pub fn set(&mut self, status: Status, count: u64) {
        self.counts[status as usize] = count;
    }

    pub fn add(&mut self, other: &StatusTallies) {
        for i in 0..5 {
            self.counts[i] += other.counts[i];
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Status, u64)> + '_ {
        Status::ALL.into_iter().map(|s| (s, self.get(s)))
    }
}

/// Metadata identifying what a sweep covered and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeta {
    pub max_len: u32,
    pub threshold: u64,
    pub partition: PartitionSpec,
    pub seed: Option<u64>,
    pub version: String,
}

/// Aggregated results of a swept region of program space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunAggregate {
    pub meta: RunMeta,
    /// Keyed by output string in shortlex order.
    pub outputs: BTreeMap<BitString, OutputStats>,
    pub statuses: StatusTallies,
    pub total_programs: u64,
}

/// Inputs of [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub max_len: u32,
    pub threshold: u64,
    pub partition: PartitionSpec,
    /// Recorded in metadata only (provenance of the threshold estimate).
    pub seed: Option<u64>,
}

impl SweepConfig {
    pub fn new(max_len: u32, threshold: u64) -> Self {
        SweepConfig {
            max_len,
            threshold,
            partition: PartitionSpec::WHOLE,
            seed: None,
        }
    }

    fn validate(&self) -> Result<(), RunnerError> {
        if self.max_len == 0 || self.max_len > MAX_SWEEP_LEN {
            return Err(RunnerError::InvalidMaxLen(self.max_len));
        }
        if self.threshold == 0 {
            return Err(RunnerError::InvalidThreshold);
        }
        PartitionSpec::new(self.partition.index, self.partition.count)?;
        Ok(())
    }

    fn meta(&self) -> RunMeta {
        RunMeta {
            max_len: self.max_len,
            threshold: self.threshold,
            partition: self.partition,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// One contiguous chunk of one stratum's flattened index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    code_len: u32,
    prefix_len: u32,
    lo: u64,
    hi: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct BlockResult {
    outputs: BTreeMap<BitString, OutputStats>,
    statuses: StatusTallies,
    total: u64,
}

fn stratum_size_u64(stratum: &Stratum) -> u64 {
    u64::try_from(&stratum.size()).expect("stratum size fits u64 for max_len <= 62")
}

/// Work blocks of one partition, in enumeration order (length ascending,
/// prefix length ascending, range ascending).
fn partition_blocks(max_len: u32, partition: PartitionSpec) -> Vec<Block> {
    let mut blocks = Vec::new();
    for stratum in strata(max_len) {
        let size = stratum_size_u64(&stratum);
        let (lo, hi) = partition.range(size);
        let mut at = lo;
        while at < hi {
            let end = (at + BLOCK_SIZE).min(hi);
            blocks.push(Block {
                code_len: stratum.code_len,
                prefix_len: stratum.prefix_len,
                lo: at,
                hi: end,
            });
            at = end;
        }
    }
    blocks
}

fn run_block(block: &Block, threshold: u64) -> BlockResult {
    let stratum =
        Stratum::new(block.code_len, block.prefix_len).expect("blocks come from valid strata");
    let input_count = u64::try_from(&stratum.input_count).expect("fits u64");
    let input_len = block.code_len - block.prefix_len;
    let first_n = stratum.first_sentence_index();

    let mut result = BlockResult {
        total: block.hi - block.lo,
        ..Default::default()
    };
    let mut executor = Executor::new();
    let mut current_offset = u64::MAX;
    let mut sentence = None;

    for i in block.lo..block.hi {
        let sentence_offset = i / input_count;
        let input_value = i % input_count;
        if sentence_offset != current_offset {
            sentence = Some(sentence_unrank(&(&first_n + sentence_offset)));
            current_offset = sentence_offset;
        }
        let sentence = sentence.as_ref().expect("assigned above");
        let input = PackedBits {
            value: input_value,
            len: input_len,
        };
        let outcome = executor.run(sentence, &input, threshold);
        result.statuses.bump(outcome.status);
        if let Some(output) = outcome.output {
            match result.outputs.entry(output) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    e.get_mut().halt_count += 1;
                }
                std::collections::btree_map::Entry::Vacant(e) => {
                    // Ascending flattened order within a single stratum, so
                    // the first halt is this block's earliest witness.
                    let code = ProgramCode::new(
                        &first_n + sentence_offset,
                        BitString::from_packed(input_value, input_len),
                    );
                    e.insert(OutputStats {
                        halt_count: 1,
                        spf_length: block.code_len,
                        first_program: encode_program(&code),
                    });
                }
            }
        }
    }
    result
}

/// Folds `incoming` into `acc`. Counts sum; the smallest-program witness
/// is the minimum of (length, encoded bits), which for equal lengths is
/// the earliest program in enumeration order.
fn fold_outputs(
    acc: &mut BTreeMap<BitString, OutputStats>,
    incoming: BTreeMap<BitString, OutputStats>,
) {
    for (output, stats) in incoming {
        match acc.entry(output) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(stats);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let cur = e.get_mut();
                cur.halt_count += stats.halt_count;
                if (stats.spf_length, &stats.first_program)
                    < (cur.spf_length, &cur.first_program)
                {
                    cur.spf_length = stats.spf_length;
                    cur.first_program = stats.first_program;
                }
            }
        }
    }
}

fn fold_blocks(meta: RunMeta, results: Vec<BlockResult>) -> RunAggregate {
    let mut agg = RunAggregate {
        meta,
        outputs: BTreeMap::new(),
        statuses: StatusTallies::default(),
        total_programs: 0,
    };
    for r in results {
        fold_outputs(&mut agg.outputs, r.outputs);
        agg.statuses.add(&r.statuses);
        agg.total_programs += r.total;
    }
    agg
}

/// Executes every program of this partition and aggregates the results.
pub fn sweep(config: &SweepConfig) -> Result<RunAggregate, RunnerError> {
    sweep_with_checkpoint(config, None)
}

/// Like [`sweep`], but when a checkpoint path is given, every completed
/// block is appended to it and blocks already recorded there are not
/// re-executed, so an interrupted run resumes where it stopped.
pub fn sweep_with_checkpoint(
    config: &SweepConfig,
    checkpoint: Option<&Path>,
) -> Result<RunAggregate, RunnerError> {
    config.validate()?;
    let blocks = partition_blocks(config.max_len, config.partition);

    let mut done: BTreeMap<(u32, u32, u64, u64), BlockResult> = BTreeMap::new();
    let mut sink = None;
    if let Some(path) = checkpoint {
        if path.exists() {
            done = load_checkpoint(path, config)?;
        } else {
            let mut f = BufWriter::new(File::create(path)?);
            writeln!(f, "checkpoint {}", checkpoint_tag(config))?;
            f.flush()?;
        }
        sink = Some(Mutex::new(BufWriter::new(
            OpenOptions::new().append(true).open(path)?,
        )));
    }

    let results: Vec<BlockResult> = blocks
        .par_iter()
        .map(|block| {
            let key = (block.code_len, block.prefix_len, block.lo, block.hi);
            if let Some(cached) = done.get(&key) {
                return Ok(cached.clone());
            }
            let result = run_block(block, config.threshold);
            if let Some(sink) = &sink {
                let mut f = sink.lock().expect("checkpoint writer");
                write_checkpoint_block(&mut *f, block, &result)?;
                f.flush()?;
            }
            Ok(result)
        })
        .collect::<Result<_, RunnerError>>()?;

    Ok(fold_blocks(config.meta(), results))
}

/// Combines complete partition aggregates into the whole-space aggregate.
/// All inputs must share length bound, threshold, seed, and tool version,
/// and their partitions must tile `0..count` exactly.
pub fn merge(aggregates: &[RunAggregate]) -> Result<RunAggregate, RunnerError> {
    let first = aggregates.first().ok_or(RunnerError::EmptyMerge)?;
    for a in aggregates {
        if a.meta.max_len != first.meta.max_len {
            return Err(RunnerError::MetadataMismatch { field: "max_len" });
        }
        if a.meta.threshold != first.meta.threshold {
            return Err(RunnerError::MetadataMismatch { field: "threshold" });
        }
        if a.meta.version != first.meta.version {
            return Err(RunnerError::MetadataMismatch { field: "version" });
        }
        if a.meta.seed != first.meta.seed {
            return Err(RunnerError::MetadataMismatch { field: "seed" });
        }
        if a.meta.partition.count != first.meta.partition.count {
            return Err(RunnerError::MetadataMismatch {
                field: "partition count",
            });
        }
    }
    let count = first.meta.partition.count;
    if aggregates.len() != count as usize {
        return Err(RunnerError::PartitionCoverage(format!(
            "expected {count} partitions, got {}",
            aggregates.len()
        )));
    }
    let mut seen = vec![false; count as usize];
    for a in aggregates {
        let idx = a.meta.partition.index as usize;
        if seen[idx] {
            return Err(RunnerError::PartitionCoverage(format!(
                "partition {idx} appears twice"
            )));
        }
        seen[idx] = true;
    }

    let mut merged = RunAggregate {
        meta: RunMeta {
            partition: PartitionSpec::WHOLE,
            ..first.meta.clone()
        },
        outputs: BTreeMap::new(),
        statuses: StatusTallies::default(),
        total_programs: 0,
    };
    for a in aggregates {
        fold_outputs(&mut merged.outputs, a.outputs.clone());
        merged.statuses.add(&a.statuses);
        merged.total_programs += a.total_programs;
    }
    Ok(merged)
}

impl RunAggregate {
    /// Expected program count for the covered region; equals
    /// `total_programs` after a complete sweep.
    pub fn expected_total(&self) -> BigUint {
        if self.meta.partition == PartitionSpec::WHOLE {
            count_programs(self.meta.max_len)
        } else {
            let mut total = BigUint::ZERO;
            for stratum in strata(self.meta.max_len) {
                let size = stratum_size_u64(&stratum);
                let (lo, hi) = self.meta.partition.range(size);
                total += hi - lo;
            }
            total
        }
    }

    /// Serializes to the results format: `key=value` metadata, the
    /// per-output CSV, then the status CSV. LF line endings, UTF-8.
    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "max_len={}", self.meta.max_len)?;
        writeln!(w, "threshold={}", self.meta.threshold)?;
        writeln!(w, "partitions={}", self.meta.partition)?;
        match self.meta.seed {
            Some(seed) => writeln!(w, "seed={seed}")?,
            None => writeln!(w, "seed=")?,
        }
        writeln!(w, "version={}", self.meta.version)?;
        writeln!(w, "total_programs={}", self.total_programs)?;
        writeln!(w, "output,halt_count,spf,first_program")?;
        for (output, stats) in &self.outputs {
            writeln!(
                w,
                "{output},{},{},{}",
                stats.halt_count, stats.spf_length, stats.first_program
            )?;
        }
        writeln!(w, "status,count")?;
        for (status, count) in self.statuses.iter() {
            writeln!(w, "{status},{count}")?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self, RunnerError> {
        let reader = BufReader::new(r);
        let mut lines = Vec::new();
        for line in reader.lines() {
            lines.push(line?);
        }
        parse_aggregate(&lines, 0).map(|(agg, _)| agg)
    }

    /// Atomically writes the results file (via a sibling temp file).
    pub fn save(&self, path: &Path) -> Result<(), RunnerError> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = BufWriter::new(File::create(&tmp)?);
            self.write_to(&mut f)?;
            f.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        Self::read_from(File::open(path)?)
    }
}

fn malformed(line: usize, message: impl Into<String>) -> RunnerError {
    RunnerError::Malformed {
        line: line + 1,
        message: message.into(),
    }
}

/// Parses an aggregate starting at `lines[start]`; returns it and the
/// index one past its final status row.
fn parse_aggregate(lines: &[String], start: usize) -> Result<(RunAggregate, usize), RunnerError> {
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    let mut at = start;
    while at < lines.len() {
        let line = &lines[at];
        if line == "output,halt_count,spf,first_program" {
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| malformed(at, format!("expected key=value, got {line:?}")))?;
        meta.insert(key.to_string(), value.to_string());
        at += 1;
    }
    if at == lines.len() {
        return Err(malformed(at, "missing output CSV header"));
    }
    at += 1;

    let field = |key: &str| -> Result<&String, RunnerError> {
        meta.get(key)
            .ok_or_else(|| malformed(start, format!("missing metadata key {key}")))
    };
    let max_len: u32 = field("max_len")?
        .parse()
        .map_err(|e| malformed(start, format!("bad max_len: {e}")))?;
    let threshold: u64 = field("threshold")?
        .parse()
        .map_err(|e| malformed(start, format!("bad threshold: {e}")))?;
    let partition: PartitionSpec = field("partitions")?
        .parse()
        .map_err(|e| malformed(start, format!("bad partitions: {e}")))?;
    let seed_raw = field("seed")?;
    let seed = if seed_raw.is_empty() {
        None
    } else {
        Some(
            seed_raw
                .parse()
                .map_err(|e| malformed(start, format!("bad seed: {e}")))?,
        )
    };
    let version = field("version")?.clone();
    let total_programs: u64 = field("total_programs")?
        .parse()
        .map_err(|e| malformed(start, format!("bad total_programs: {e}")))?;

    let mut outputs = BTreeMap::new();
    while at < lines.len() && lines[at] != "status,count" {
        let row = &lines[at];
        let mut parts = row.split(',');
        let (output, halt, spf, program) = match (
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
        ) {
            (Some(a), Some(b), Some(c), Some(d), None) => (a, b, c, d),
            _ => return Err(malformed(at, format!("expected 4 fields, got {row:?}"))),
        };
        let output: BitString = output
            .parse()
            .map_err(|e| malformed(at, format!("bad output: {e}")))?;
        let stats = OutputStats {
            halt_count: halt
                .parse()
                .map_err(|e| malformed(at, format!("bad halt_count: {e}")))?,
            spf_length: spf
                .parse()
                .map_err(|e| malformed(at, format!("bad spf: {e}")))?,
            first_program: program
                .parse()
                .map_err(|e| malformed(at, format!("bad first_program: {e}")))?,
        };
        if stats.first_program.len() != stats.spf_length as usize {
            return Err(malformed(at, "first_program length disagrees with spf"));
        }
        if outputs.insert(output, stats).is_some() {
            return Err(malformed(at, "duplicate output row"));
        }
        at += 1;
    }
    if at == lines.len() {
        return Err(malformed(at, "missing status CSV header"));
    }
    at += 1;

    let mut statuses = StatusTallies::default();
    for expected in Status::ALL {
        if at == lines.len() {
            return Err(malformed(at, format!("missing status row {expected}")));
        }
        let row = &lines[at];
        let (name, count) = row
            .split_once(',')
            .ok_or_else(|| malformed(at, format!("expected status,count, got {row:?}")))?;
        if name != expected.name() {
            return Err(malformed(
                at,
                format!("expected status {expected}, got {name}"),
            ));
        }
        statuses.set(
            expected,
            count
                .parse()
                .map_err(|e| malformed(at, format!("bad count: {e}")))?,
        );
        at += 1;
    }

    if statuses.total() != total_programs {
        return Err(malformed(
            start,
            format!(
                "status tallies sum to {}, expected total_programs {}",
                statuses.total(),
                total_programs
            ),
        ));
    }
    let halts: u64 = outputs.values().map(|s| s.halt_count).sum();
    if halts != statuses.get(Status::Halted) {
        return Err(malformed(
            start,
            format!(
                "output halt counts sum to {halts}, expected {}",
                statuses.get(Status::Halted)
            ),
        ));
    }

    Ok((
        RunAggregate {
            meta: RunMeta {
                max_len,
                threshold,
                partition,
                seed,
                version,
            },
            outputs,
            statuses,
            total_programs,
        },
        at,
    ))
}

fn checkpoint_tag(config: &SweepConfig) -> String {
    format!(
        "max_len={} threshold={} partition={} version={}",
        config.max_len,
        config.threshold,
        config.partition,
        env!("CARGO_PKG_VERSION")
    )
}

fn write_checkpoint_block<W: Write>(
    w: &mut W,
    block: &Block,
    result: &BlockResult,
) -> io::Result<()> {
    writeln!(
        w,
        "block m={} k={} lo={} hi={}",
        block.code_len, block.prefix_len, block.lo, block.hi
    )?;
    writeln!(w, "output,halt_count,spf,first_program")?;
    for (output, stats) in &result.outputs {
        writeln!(
            w,
            "{output},{},{},{}",
            stats.halt_count, stats.spf_length, stats.first_program
        )?;
    }
    writeln!(w, "status,count")?;
    for (status, count) in result.statuses.iter() {
        writeln!(w, "{status},{count}")?;
    }
    writeln!(w, "end block")?;
    Ok(())
}

/// Reads back completed blocks; records without the `end block`
/// terminator (a write cut short) are ignored.
fn load_checkpoint(
    path: &Path,
    config: &SweepConfig,
) -> Result<BTreeMap<(u32, u32, u64, u64), BlockResult>, RunnerError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = Vec::new();
    for line in reader.lines() {
        lines.push(line?);
    }
    if lines.is_empty() {
        return Ok(BTreeMap::new());
    }
    let expected = format!("checkpoint {}", checkpoint_tag(config));
    if lines[0] != expected {
        return Err(RunnerError::CheckpointMismatch(lines[0].clone()));
    }

    let mut done = BTreeMap::new();
    let mut at = 1;
    while at < lines.len() {
        let header = &lines[at];
        let Some(rest) = header.strip_prefix("block ") else {
            return Err(malformed(at, format!("expected block header, got {header:?}")));
        };
        let mut m = None;
        let mut k = None;
        let mut lo = None;
        let mut hi = None;
        for part in rest.split(' ') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| malformed(at, format!("bad block header field {part:?}")))?;
            let value: u64 = value
                .parse()
                .map_err(|e| malformed(at, format!("bad block header number: {e}")))?;
            match key {
                "m" => m = Some(value as u32),
                "k" => k = Some(value as u32),
                "lo" => lo = Some(value),
                "hi" => hi = Some(value),
                _ => return Err(malformed(at, format!("unknown block field {key}"))),
            }
        }
        let (Some(m), Some(k), Some(lo), Some(hi)) = (m, k, lo, hi) else {
            return Err(malformed(at, "incomplete block header"));
        };
        at += 1;

        match parse_block_body(&lines, at) {
            Some((result, next)) => {
                done.insert((m, k, lo, hi), result);
                at = next;
            }
            // Truncated trailing record: drop it and re-run that block.
            None => break,
        }
    }
    Ok(done)
}

/// Parses one checkpoint block body; `None` when the record is truncated.
fn parse_block_body(lines: &[String], mut at: usize) -> Option<(BlockResult, usize)> {
    if lines.get(at).map(String::as_str) != Some("output,halt_count,spf,first_program") {
        return None;
    }
    at += 1;
    let mut outputs = BTreeMap::new();
    while at < lines.len() && lines[at] != "status,count" {
        let mut parts = lines[at].split(',');
        let output: BitString = parts.next()?.parse().ok()?;
        let halt_count: u64 = parts.next()?.parse().ok()?;
        let spf_length: u32 = parts.next()?.parse().ok()?;
        let first_program: BitString = parts.next()?.parse().ok()?;
        if parts.next().is_some() {
            return None;
        }
        outputs.insert(
            output,
            OutputStats {
                halt_count,
                spf_length,
                first_program,
            },
        );
        at += 1;
    }
    if at == lines.len() {
        return None;
    }
    at += 1;
    let mut statuses = StatusTallies::default();
    for expected in Status::ALL {
        let (name, count) = lines.get(at)?.split_once(',')?;
        if name != expected.name() {
            return None;
        }
        statuses.set(expected, count.parse().ok()?);
        at += 1;
    }
    if lines.get(at).map(String::as_str) != Some("end block") {
        return None;
    }
    Some((
        BlockResult {
            outputs,
            statuses,
            total: statuses.total(),
        },
        at + 1,
    ))
}
