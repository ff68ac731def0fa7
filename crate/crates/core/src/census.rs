//! Parallel classification of all primes up to X: order statistics, T1/T2
//! membership, minimal term counts for the exceptions, and density
//! aggregates. Work is split into contiguous chunks; chunk results merge
//! associatively and commutatively, so the worker schedule cannot change
//! the report, and completed chunks are checkpointed so a killed run
//! resumes where it stopped.
//!
//! T1 membership is ord parity: -1 lies in <2> exactly when the cyclic
//! group has even order. T1 implies T2 because 1 = 2^(ord-1) + 2^(ord-1)
//! mod p lets any k-term sum stretch to k+1 terms, so the O(ord) T2 scan
//! only runs for the odd-order primes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::{multiplicative_order, sieve_range_into, two_adic_split};
use crate::sumset::sum_into;

/// Order-statistic thresholds reported by the census: fraction of odd
/// primes with ord_p(2) >= p^theta.
pub const ORD_THETAS: [f64; 4] = [0.4, 0.5, 0.677, 0.75];

/// The classical density of primes dividing some 2^a + 1.
pub const T1_EXPECTED_FRACTION: f64 = 17.0 / 24.0;

/// Largest census bound; dense per-prime tables above this are pointless.
pub const MAX_CENSUS_X: u64 = 1 << 32;

/// Minimal number of subgroup elements summing to -1 mod p, capped at 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinTermsNeg1 {
    /// Not requested for this record.
    NotComputed,
    Found(u32),
    /// Searched through six terms without a hit.
    ExceedsSix,
}

impl MinTermsNeg1 {
    pub fn found(self) -> Option<u32> {
        match self {
            MinTermsNeg1::Found(k) => Some(k),
            _ => None,
        }
    }
}

/// Census row for one odd prime.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRecord {
    pub p: u64,
    pub ord2: u64,
    pub s: u32,
    pub w: u64,
    pub in_t1: bool,
    pub in_t2: bool,
    pub min_terms_neg1: MinTermsNeg1,
    /// ord2 > p^(3/4) together with T2 membership; a prime with the large
    /// order but outside T2 lands in the report's violation list instead.
    pub diag_34: bool,
}

/// One census row; p = 2 carries a marker instead of a classification.
#[derive(Debug, Clone, PartialEq)]
pub enum PrimeRecord {
    Skipped { p: u64 },
    Row(ClassificationRecord),
}

impl PrimeRecord {
    pub fn p(&self) -> u64 {
        match self {
            PrimeRecord::Skipped { p } => *p,
            PrimeRecord::Row(r) => r.p,
        }
    }

    pub fn row(&self) -> Option<&ClassificationRecord> {
        match self {
            PrimeRecord::Row(r) => Some(r),
            PrimeRecord::Skipped { .. } => None,
        }
    }

    /// One-line JSON. Field order is fixed; "mt" is omitted when not
    /// computed and null when the six-term search came up empty.
    pub fn to_jsonl(&self) -> String {
        match self {
            PrimeRecord::Skipped { p } => format!("{{\"p\":{p},\"skipped\":true}}"),
            PrimeRecord::Row(r) => {
                let mt = match r.min_terms_neg1 {
                    MinTermsNeg1::NotComputed => String::new(),
                    MinTermsNeg1::Found(k) => format!(",\"mt\":{k}"),
                    MinTermsNeg1::ExceedsSix => ",\"mt\":null".to_string(),
                };
                format!(
                    "{{\"p\":{},\"ord2\":{},\"s\":{},\"w\":{},\"t1\":{},\"t2\":{}{}}}",
                    r.p, r.ord2, r.s, r.w, r.in_t1, r.in_t2, mt
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassifyOptions {
    /// Fill min_terms_neg1 for every prime, not only the T2 exceptions.
    pub compute_t6: bool,
}

#[derive(Default)]
struct Scratch {
    powers: Vec<u64>,
    r_bits: Vec<u64>,
    l2: Vec<u64>,
    l3: Vec<u64>,
    dbl: Vec<u64>,
}

impl Scratch {
    fn words_for(&mut self, p: u64) -> usize {
        let nw = p.div_ceil(64) as usize;
        if self.r_bits.len() < nw {
            self.r_bits.resize(nw, 0);
            self.l2.resize(nw, 0);
            self.l3.resize(nw, 0);
            self.dbl.resize(2 * nw + 1, 0);
        }
        nw
    }
}

#[inline]
fn set_bit(words: &mut [u64], x: u64) {
    words[x as usize / 64] |= 1 << (x % 64);
}

#[inline]
fn get_bit(words: &[u64], x: u64) -> bool {
    words[x as usize / 64] & (1 << (x % 64)) != 0
}

fn first_hit_scan(powers: &[u64], table: &[u64], p: u64) -> bool {
    let target = p - 1;
    powers.iter().any(|&pw| get_bit(table, target - pw))
}

/// Scan set bits x of `over`, testing target - x against `table`.
fn pairwise_hit(over: &[u64], table: &[u64], p: u64, nw: usize) -> bool {
    let target = p - 1;
    for (wi, &word) in over.iter().enumerate().take(nw) {
        let mut w = word;
        while w != 0 {
            let x = wi as u64 * 64 + w.trailing_zeros() as u64;
            if x >= p {
                break;
            }
            if get_bit(table, target - x) {
                return true;
            }
            w &= w - 1;
        }
    }
    false
}

/// min k in 3..=6 with -1 in kR, or None. 2R comes from pair marking when
/// the subgroup is small and from the shift-or kernel otherwise; 3R always
/// uses the kernel. Deeper layers are never needed: 4R = 2R + 2R and
/// 6R = 3R + 3R split through the precomputed tables.
fn min_terms_neg1_search(scratch: &mut Scratch, p: u64, nw: usize) -> Option<u32> {
    let ord = scratch.powers.len();
    scratch.l2[..nw].fill(0);
    if (ord as u64) * 32 < p {
        for i in 0..ord {
            let a = scratch.powers[i];
            for j in i..ord {
                let mut v = a + scratch.powers[j];
                if v >= p {
                    v -= p;
                }
                set_bit(&mut scratch.l2, v);
            }
        }
    } else {
        let (l2, rest) = (&mut scratch.l2, &mut scratch.dbl);
        sum_into(&scratch.r_bits[..nw], p, scratch.powers.iter().copied(), rest, &mut l2[..nw]);
    }
    if first_hit_scan(&scratch.powers, &scratch.l2, p) {
        return Some(3);
    }
    if pairwise_hit(&scratch.l2, &scratch.l2, p, nw) {
        return Some(4);
    }
    {
        let (l2, l3, dbl) = (&scratch.l2, &mut scratch.l3, &mut scratch.dbl);
        sum_into(&l2[..nw], p, scratch.powers.iter().copied(), dbl, &mut l3[..nw]);
    }
    if pairwise_hit(&scratch.l2, &scratch.l3, p, nw) {
        return Some(5);
    }
    if pairwise_hit(&scratch.l3, &scratch.l3, p, nw) {
        return Some(6);
    }
    None
}

fn classify_with(scratch: &mut Scratch, p: u64, opts: ClassifyOptions) -> Result<PrimeRecord> {
    if p == 2 {
        return Ok(PrimeRecord::Skipped { p });
    }
    let profile = multiplicative_order(2, p)?;
    let ord = profile.ord;
    let (s, w) = two_adic_split(p - 1);
    let in_t1 = ord % 2 == 0;
    let mut in_t2 = in_t1;
    let mut mt = MinTermsNeg1::NotComputed;
    if !in_t1 {
        let nw = scratch.words_for(p);
        scratch.r_bits[..nw].fill(0);
        scratch.powers.clear();
        let mut pw = 1u64;
        for _ in 0..ord {
            set_bit(&mut scratch.r_bits, pw);
            scratch.powers.push(pw);
            pw <<= 1;
            if pw >= p {
                pw -= p;
            }
        }
        in_t2 = first_hit_scan(&scratch.powers, &scratch.r_bits, p);
        if !in_t2 {
            mt = match min_terms_neg1_search(scratch, p, nw) {
                Some(k) => MinTermsNeg1::Found(k),
                None => MinTermsNeg1::ExceedsSix,
            };
        }
    }
    if in_t2 && opts.compute_t6 {
        mt = MinTermsNeg1::Found(if in_t1 { 1 } else { 2 });
    }
    let ord_gt_34 = {
        let o = ord as u128;
        let pp = p as u128;
        o * o * o * o > pp * pp * pp
    };
    Ok(PrimeRecord::Row(ClassificationRecord {
        p,
        ord2: ord,
        s,
        w,
        in_t1,
        in_t2,
        min_terms_neg1: mt,
        diag_34: ord_gt_34 && in_t2,
    }))
}

/// Classify a single prime. p = 2 yields the marker record.
pub fn classify_prime(p: u64, opts: ClassifyOptions) -> Result<PrimeRecord> {
    classify_with(&mut Scratch::default(), p, opts)
}

/// A T2 exception with the outcome of its six-term search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct T2Exception {
    pub p: u64,
    /// Smallest k <= 6 with -1 in kR, None when even six terms fail.
    pub min_terms: Option<u32>,
}

/// Mergeable census aggregate. Addition of two tallies is associative and
/// commutative; the list fields are sorted at finalize time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CensusTally {
    pub prime_count: u64,
    pub odd_prime_count: u64,
    pub t1_count: u64,
    pub t2_exceptions: Vec<T2Exception>,
    /// Counts of odd primes with ord2 >= p^theta, theta per ORD_THETAS.
    pub ord_ge_theta: [u64; 4],
    /// Primes with ord2 > p^(3/4) that still miss T2.
    pub diag34_violations: Vec<u64>,
}

impl CensusTally {
    pub fn add_record(&mut self, rec: &PrimeRecord) {
        self.prime_count += 1;
        let Some(r) = rec.row() else { return };
        self.odd_prime_count += 1;
        if r.in_t1 {
            self.t1_count += 1;
        }
        if !r.in_t2 {
            self.t2_exceptions.push(T2Exception {
                p: r.p,
                min_terms: r.min_terms_neg1.found(),
            });
        }
        let o = r.ord2 as u128;
        let pp = r.p as u128;
        let lo = (r.ord2 as f64).ln();
        let lp = (r.p as f64).ln();
        if lo >= 0.4 * lp {
            self.ord_ge_theta[0] += 1;
        }
        if o * o >= pp {
            self.ord_ge_theta[1] += 1;
        }
        if lo >= 0.677 * lp {
            self.ord_ge_theta[2] += 1;
        }
        let ord_gt_34 = o * o * o * o > pp * pp * pp;
        if ord_gt_34 {
            self.ord_ge_theta[3] += 1;
            if !r.in_t2 {
                self.diag34_violations.push(r.p);
            }
        }
    }

    pub fn merge(&mut self, other: &CensusTally) {
        self.prime_count += other.prime_count;
        self.odd_prime_count += other.odd_prime_count;
        self.t1_count += other.t1_count;
        self.t2_exceptions.extend_from_slice(&other.t2_exceptions);
        for i in 0..4 {
            self.ord_ge_theta[i] += other.ord_ge_theta[i];
        }
        self.diag34_violations
            .extend_from_slice(&other.diag34_violations);
    }

    fn finalize(&mut self) {
        self.t2_exceptions.sort_unstable_by_key(|e| e.p);
        self.diag34_violations.sort_unstable();
    }
}

/// Aggregated census result. Runtime and chunk bookkeeping sit outside the
/// tally so that resumed and fresh runs compare equal where it matters.
#[derive(Debug, Clone)]
pub struct CensusReport {
    pub x: u64,
    pub tally: CensusTally,
    pub t1_fraction: f64,
    pub ord_ge_fraction: [f64; 4],
    pub t6_exception_count: u64,
    pub runtime_secs: f64,
    pub chunk_count: u32,
    pub resumed_chunk_count: u32,
}

impl CensusReport {
    fn from_tally(x: u64, mut tally: CensusTally, runtime_secs: f64, chunks: u32, resumed: u32) -> Self {
        tally.finalize();
        let denom = tally.prime_count.max(1) as f64;
        let odd = tally.odd_prime_count.max(1) as f64;
        CensusReport {
            x,
            t1_fraction: tally.t1_count as f64 / denom,
            ord_ge_fraction: std::array::from_fn(|i| tally.ord_ge_theta[i] as f64 / odd),
            t6_exception_count: tally
                .t2_exceptions
                .iter()
                .filter(|e| e.min_terms.is_none())
                .count() as u64,
            tally,
            runtime_secs,
            chunk_count: chunks,
            resumed_chunk_count: resumed,
        }
    }

    pub fn t2_exception_list(&self) -> Vec<u64> {
        self.tally.t2_exceptions.iter().map(|e| e.p).collect()
    }

    /// Fraction of odd primes with ord2 below sqrt(p).
    pub fn ord_below_sqrt_fraction(&self) -> f64 {
        1.0 - self.ord_ge_fraction[1]
    }

    /// True when the two runs agree on everything the census computed,
    /// ignoring wall-clock and scheduling details.
    pub fn semantically_eq(&self, other: &CensusReport) -> bool {
        self.x == other.x && self.tally == other.tally
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "census of primes in [2, {}]", self.x);
        let _ = writeln!(out, "  primes            {}", self.tally.prime_count);
        let _ = writeln!(
            out,
            "  t1 members        {} (fraction {:.6}, expected {:.6}, delta {:+.6})",
            self.tally.t1_count,
            self.t1_fraction,
            T1_EXPECTED_FRACTION,
            self.t1_fraction - T1_EXPECTED_FRACTION
        );
        let _ = writeln!(out, "  t2 exceptions     {}", self.tally.t2_exceptions.len());
        let _ = writeln!(out, "  t6 exceptions     {}", self.t6_exception_count);
        for (i, theta) in ORD_THETAS.iter().enumerate() {
            let _ = writeln!(
                out,
                "  ord2 >= p^{:<5}   fraction {:.6}",
                theta, self.ord_ge_fraction[i]
            );
        }
        let _ = writeln!(
            out,
            "  diag violations   {}",
            self.tally.diag34_violations.len()
        );
        let _ = writeln!(
            out,
            "  chunks {} (resumed {})  runtime {:.2}s",
            self.chunk_count, self.resumed_chunk_count, self.runtime_secs
        );
        if !self.tally.t2_exceptions.is_empty() {
            let _ = write!(out, "t2 exception primes (mt):");
            for e in &self.tally.t2_exceptions {
                match e.min_terms {
                    Some(k) => {
                        let _ = write!(out, " {}({k})", e.p);
                    }
                    None => {
                        let _ = write!(out, " {}(>6)", e.p);
                    }
                }
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "x,prime_count,t1_count,t1_fraction,t1_expected,t2_exception_count,\
             t6_exception_count,ord_ge_p04,ord_ge_p05,ord_ge_p0677,ord_ge_p075,\
             diag34_violation_count,runtime_secs\n",
        );
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{},{},{:.6},{:.6},{:.6},{:.6},{},{:.2}",
            self.x,
            self.tally.prime_count,
            self.tally.t1_count,
            self.t1_fraction,
            T1_EXPECTED_FRACTION,
            self.tally.t2_exceptions.len(),
            self.t6_exception_count,
            self.ord_ge_fraction[0],
            self.ord_ge_fraction[1],
            self.ord_ge_fraction[2],
            self.ord_ge_fraction[3],
            self.tally.diag34_violations.len(),
            self.runtime_secs
        );
        out
    }
}

/// Aggregate an in-memory record stream into a report.
pub fn density_report(records: &[PrimeRecord]) -> Result<CensusReport> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut tally = CensusTally::default();
    let mut x = 0;
    for rec in records {
        tally.add_record(rec);
        x = x.max(rec.p());
    }
    Ok(CensusReport::from_tally(x, tally, 0.0, 0, 0))
}

#[derive(Debug, Clone)]
pub struct CensusOptions {
    pub workers: usize,
    pub compute_t6: bool,
    /// Override the auto-tuned chunk span.
    pub chunk_span: Option<u64>,
    /// Emit per-chunk progress lines on stderr.
    pub progress: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            compute_t6: false,
            chunk_span: None,
            progress: false,
        }
    }
}

const CHECKPOINT_MAGIC: &str = "sparsemul-census-checkpoint v1";

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct CheckpointHeader {
    x: u64,
    span: u64,
    compute_t6: bool,
}

fn load_checkpoint(path: &Path, header: &CheckpointHeader) -> Option<BTreeMap<u32, CensusTally>> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()? != CHECKPOINT_MAGIC {
        return None;
    }
    let found: CheckpointHeader = serde_json::from_str(lines.next()?).ok()?;
    if &found != header {
        return None;
    }
    let mut done = BTreeMap::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(4, ' ');
        let idx: u32 = parts.next()?.parse().ok()?;
        let _lo: u64 = parts.next()?.parse().ok()?;
        let _hi: u64 = parts.next()?.parse().ok()?;
        let tally: CensusTally = serde_json::from_str(parts.next()?).ok()?;
        done.insert(idx, tally);
    }
    Some(done)
}

fn write_checkpoint(
    path: &Path,
    header: &CheckpointHeader,
    chunks: &[(u64, u64)],
    done: &BTreeMap<u32, CensusTally>,
) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "{CHECKPOINT_MAGIC}");
    let _ = writeln!(
        text,
        "{}",
        serde_json::to_string(header).map_err(|e| Error::Checkpoint(e.to_string()))?
    );
    for (&idx, tally) in done {
        let (lo, hi) = chunks[idx as usize];
        let _ = writeln!(
            text,
            "{idx} {lo} {hi} {}",
            serde_json::to_string(tally).map_err(|e| Error::Checkpoint(e.to_string()))?
        );
    }
    let tmp: PathBuf = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

struct ChunkOutput {
    tally: CensusTally,
    records: Vec<PrimeRecord>,
}

fn classify_chunk(lo: u64, hi: u64, opts: ClassifyOptions, collect: bool) -> Result<ChunkOutput> {
    let mut primes = Vec::new();
    sieve_range_into(lo, hi, &mut primes);
    let mut scratch = Scratch::default();
    let mut tally = CensusTally::default();
    let mut records = Vec::new();
    for &p in &primes {
        let rec = classify_with(&mut scratch, p, opts)?;
        tally.add_record(&rec);
        if collect {
            records.push(rec);
        }
    }
    Ok(ChunkOutput { tally, records })
}

/// Classify every prime up to x. Records (when a sink is given) stream out
/// in ascending order for the chunks computed in this run; chunks restored
/// from a checkpoint contribute their tallies but are not re-emitted.
pub fn run_census(
    x: u64,
    opts: &CensusOptions,
    checkpoint: Option<&Path>,
    mut sink: Option<&mut dyn FnMut(&PrimeRecord)>,
) -> Result<CensusReport> {
    if x < 3 {
        return Err(Error::Unsupported("census needs x >= 3".into()));
    }
    if x > MAX_CENSUS_X {
        return Err(Error::Unsupported(format!("census bound {x} above 2^32")));
    }
    let start = Instant::now();
    let workers = opts.workers.max(1);
    let span = opts
        .chunk_span
        .unwrap_or_else(|| (x / (workers as u64 * 8)).clamp(25_000, 1_000_000));
    let mut chunks = Vec::new();
    let mut lo = 2u64;
    while lo <= x {
        let hi = lo.saturating_add(span).min(x + 1);
        chunks.push((lo, hi));
        lo = hi;
    }
    let header = CheckpointHeader {
        x,
        span,
        compute_t6: opts.compute_t6,
    };
    let mut done: BTreeMap<u32, CensusTally> = BTreeMap::new();
    if let Some(path) = checkpoint {
        if path.exists() {
            match load_checkpoint(path, &header) {
                Some(loaded) => done = loaded,
                None => {
                    eprintln!(
                        "warning: checkpoint {} unreadable or for a different run; starting fresh",
                        path.display()
                    );
                }
            }
        }
    }
    let resumed = done.len() as u32;
    let pending: Vec<u32> = (0..chunks.len() as u32)
        .filter(|i| !done.contains_key(i))
        .collect();
    let classify_opts = ClassifyOptions {
        compute_t6: opts.compute_t6,
    };
    let collect = sink.is_some();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("worker pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<(u32, Result<ChunkOutput>)>();
    let chunks_ref = &chunks;
    let mut first_err: Option<Error> = None;
    pool.in_place_scope(|scope| {
        for &idx in &pending {
            let tx = tx.clone();
            scope.spawn(move |_| {
                let (lo, hi) = chunks_ref[idx as usize];
                let out = classify_chunk(lo, hi, classify_opts, collect);
                let _ = tx.send((idx, out));
            });
        }
        drop(tx);

        // ordered merge: buffer out-of-order chunks, emit records in
        // ascending chunk order, checkpoint after every completion
        let mut buffered: BTreeMap<u32, Vec<PrimeRecord>> = BTreeMap::new();
        let mut emit_cursor = 0usize;
        let mut completed = 0usize;
        while let Ok((idx, result)) = rx.recv() {
            match result {
                Ok(out) => {
                    done.insert(idx, out.tally);
                    if collect {
                        buffered.insert(idx, out.records);
                    }
                    completed += 1;
                    if opts.progress {
                        let (lo, hi) = chunks_ref[idx as usize];
                        eprintln!(
                            "census: chunk {}/{} [{lo},{hi}) done ({:.1}s)",
                            completed,
                            pending.len(),
                            start.elapsed().as_secs_f64()
                        );
                    }
                    if let Some(path) = checkpoint {
                        if let Err(e) = write_checkpoint(path, &header, chunks_ref, &done) {
                            if first_err.is_none() {
                                first_err = Some(e);
                            }
                            break;
                        }
                    }
                    if let Some(sink) = sink.as_deref_mut() {
                        while emit_cursor < pending.len() {
                            let next_idx = pending[emit_cursor];
                            match buffered.remove(&next_idx) {
                                Some(records) => {
                                    for rec in &records {
                                        sink(rec);
                                    }
                                    emit_cursor += 1;
                                }
                                None => break,
                            }
                        }
                    }
                }
                Err(e) => {
                    if first_err.is_none() {
                        first_err = Some(e);
                    }
                    break;
                }
            }
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    let mut total = CensusTally::default();
    for tally in done.values() {
        total.merge(tally);
    }
    Ok(CensusReport::from_tally(
        x,
        total,
        start.elapsed().as_secs_f64(),
        chunks.len() as u32,
        resumed,
    ))
}
