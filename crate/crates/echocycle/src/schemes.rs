//! Phase-cycling scheme construction and echo-cancellation verification.
//!
//! A scheme is a signed matrix of per-shot pulse phase flags: column 0 drives
//! the preparation pi/2 pulse, columns 1..m the inversion pulses, and the
//! sign vector says whether each shot's result is added or subtracted.
//!
//! Echo classes are labelled by the set F of inversion pulses at which the
//! coherence order changes by ±1. A class is cancelled when the element-wise
//! product of the scheme's F-columns, the preparation column, and the sign
//! vector sums to zero. [`verify_scheme`] counts cancelled classes exactly
//! whenever possible: it walks the subgroup generated by the inversion
//! columns (polynomially many product images even when 2^m classes exist),
//! falls back to Gray-code enumeration, and only then to seeded sampling
//! with the sample size disclosed in the report.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::hadamard::sylvester;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("inversion pulse count must be at least 1")]
    NoPulses,
    #[error("scheme would need {rows} rows, budget is {budget}")]
    RowBudgetExceeded { rows: u128, budget: u128 },
    #[error("pulse count {m} exceeds the verifiable maximum {max}")]
    TooManyPulses { m: usize, max: usize },
    #[error("malformed scheme: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Tpc,
    Cpc,
    Hpc,
    Custom,
}

/// A phase-cycling scheme for IDD-m.
///
/// Serialized form (JSON): `{"m", "kind", "sign", "rows"}` with explicit
/// integer ±1 entries; each row has m+1 entries, column 0 being the
/// preparation pulse flag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseScheme {
    pub m: usize,
    pub kind: SchemeKind,
    pub sign: Vec<i8>,
    pub rows: Vec<Vec<i8>>,
}

impl PhaseScheme {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Column of phase flags for the preparation pulse.
    pub fn prep_column(&self) -> Vec<i8> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    /// Column of phase flags for inversion pulse `j` (1-based).
    pub fn inversion_column(&self, j: usize) -> Vec<i8> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if self.sign.len() != self.rows.len() {
            return Err(SchemeError::Malformed(format!(
                "sign vector length {} does not match {} rows",
                self.sign.len(),
                self.rows.len()
            )));
        }
        if self.rows.is_empty() {
            return Err(SchemeError::Malformed("scheme has no rows".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.m + 1 {
                return Err(SchemeError::Malformed(format!(
                    "row {i} has {} entries, expected m+1 = {}",
                    row.len(),
                    self.m + 1
                )));
            }
            if row.iter().any(|&v| v != 1 && v != -1) {
                return Err(SchemeError::Malformed(format!("row {i} has a non-±1 entry")));
            }
        }
        if self.sign.iter().any(|&v| v != 1 && v != -1) {
            return Err(SchemeError::Malformed("sign vector has a non-±1 entry".into()));
        }
        Ok(())
    }
}

/// Two-step phase cycling: the preparation pulse alone is cycled ±x and the
/// two shots are subtracted.
pub fn build_tpc(m: usize) -> PhaseScheme {
    let mut plus = vec![1i8; m + 1];
    let mut minus = vec![1i8; m + 1];
    plus[0] = 1;
    minus[0] = -1;
    PhaseScheme { m, kind: SchemeKind::Tpc, sign: vec![1, -1], rows: vec![plus, minus] }
}

pub const DEFAULT_CPC_ROW_BUDGET: u128 = 1 << 20;

/// Complete phase cycling: all 2^m phase configurations of the inversion
/// pulses, preparation fixed to +x, all shots added. The first inversion
/// pulse varies slowest, so row r assigns pulse j the sign of bit (m - j)
/// of r.
pub fn build_cpc(m: usize) -> Result<PhaseScheme, SchemeError> {
    build_cpc_with_budget(m, DEFAULT_CPC_ROW_BUDGET)
}

pub fn build_cpc_with_budget(m: usize, budget: u128) -> Result<PhaseScheme, SchemeError> {
    if m == 0 {
        return Err(SchemeError::NoPulses);
    }
    if m >= 127 {
        return Err(SchemeError::TooManyPulses { m, max: 126 });
    }
    let rows_needed = 1u128 << m;
    if rows_needed > budget {
        return Err(SchemeError::RowBudgetExceeded { rows: rows_needed, budget });
    }
    let count = rows_needed as usize;
    let mut rows = Vec::with_capacity(count);
    for r in 0..count {
        let mut row = vec![1i8; m + 1];
        for j in 1..=m {
            if (r >> (m - j)) & 1 == 1 {
                row[j] = -1;
            }
        }
        rows.push(row);
    }
    Ok(PhaseScheme { m, kind: SchemeKind::Cpc, sign: vec![1; count], rows })
}

/// Hadamard phase cycling: four stacked blocks of N = nextpow2(m) rows.
///
/// Block layout (sign | prep | inversion 1 | inversions 2..m):
///   + | +E | E | +H'
///   + | +E | E | -H'
///   - | -E | E | +H'
///   - | -E | E | -H'
/// where H' is the Sylvester matrix of order N without its first column,
/// truncated to the first m-1 columns when m is not a power of two.
pub fn build_hpc(m: usize) -> Result<PhaseScheme, SchemeError> {
    if m == 0 {
        return Err(SchemeError::NoPulses);
    }
    let n = m.next_power_of_two();
    let h = sylvester(n).expect("next_power_of_two is a power of two");
    let mut rows = Vec::with_capacity(4 * n);
    let mut sign = Vec::with_capacity(4 * n);
    for block in 0..4 {
        let block_sign: i8 = if block < 2 { 1 } else { -1 };
        let block_h: i8 = if block % 2 == 0 { 1 } else { -1 };
        for r in 0..n {
            let mut row = vec![1i8; m + 1];
            row[0] = block_sign;
            // inversion pulse 1 stays at E; pulses 2..m take H' columns
            for j in 2..=m {
                row[j] = block_h * h.get(r, j - 1);
            }
            rows.push(row);
            sign.push(block_sign);
        }
    }
    Ok(PhaseScheme { m, kind: SchemeKind::Hpc, sign, rows })
}

/// Shot count of each scheme kind for IDD-m.
pub fn scheme_complexity(kind: SchemeKind, m: usize) -> Result<u128, SchemeError> {
    if m == 0 {
        return Err(SchemeError::NoPulses);
    }
    Ok(match kind {
        SchemeKind::Tpc => 2,
        SchemeKind::Cpc => {
            if m >= 127 {
                return Err(SchemeError::TooManyPulses { m, max: 126 });
            }
            1u128 << m
        }
        SchemeKind::Hpc => 4 * m.next_power_of_two() as u128,
        SchemeKind::Custom => return Err(SchemeError::Malformed("custom schemes have no closed-form complexity".into())),
    })
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Maximum class count for exhaustive Gray-code enumeration.
    pub class_budget: u64,
    /// Memory cap for the subgroup-walk image table, in bytes.
    pub group_walk_budget_bytes: usize,
    /// Maximum survivors listed in the report.
    pub survivor_cap: usize,
    /// Class tests spent locating survivors when enumeration is not exhaustive.
    pub survivor_search_budget: u64,
    /// Sample size of the randomized fallback.
    pub sample_size: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            class_budget: 1 << 24,
            group_walk_budget_bytes: 64 << 20,
            survivor_cap: 32,
            survivor_search_budget: 2_000_000,
            sample_size: 1_000_000,
            seed: 0x1d5a_9c3e,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyMethod {
    /// Exact count via subgroup-image dynamic programming.
    ExactGroupWalk,
    /// Exact count via Gray-code enumeration of all classes.
    ExactEnumeration,
    /// Randomized estimate; `cancelled` and `ratio` refer to the sample.
    Sampled { sample_size: u64 },
}

/// Cancellation coverage of a scheme over all 2^m - 1 non-empty classes.
#[derive(Clone, Debug)]
pub struct OrthogonalityReport {
    pub m: usize,
    /// 2^m, the number of pathway classes including the desired F = ∅.
    pub total_classes: u128,
    /// Classes whose combined phase vector sums to zero. For the sampled
    /// method this counts within the sample.
    pub cancelled: u128,
    /// cancelled / (2^m - 1) exactly (or over the sample size when sampled).
    pub ratio: BigRational,
    /// Uncancelled classes, ordered by size then lexicographically, truncated.
    pub surviving_classes: Vec<Vec<usize>>,
    pub survivor_cap: usize,
    /// True when `surviving_classes` lists every survivor.
    pub survivors_exhaustive: bool,
    pub method: VerifyMethod,
    /// The desired class F = ∅ must keep a nonzero combined sum.
    pub desired_preserved: bool,
}

impl OrthogonalityReport {
    pub fn ratio_f64(&self) -> f64 {
        self.ratio.to_f64().unwrap_or(f64::NAN)
    }
}

/// Bit-packed ±1 column over the scheme's rows: bit set iff entry is -1.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Mask(Vec<u64>);

impl Mask {
    fn zeros(words: usize) -> Self {
        Mask(vec![0; words])
    }

    fn from_column(col: &[i8], words: usize) -> Self {
        let mut mask = vec![0u64; words];
        for (i, &v) in col.iter().enumerate() {
            if v == -1 {
                mask[i / 64] |= 1 << (i % 64);
            }
        }
        Mask(mask)
    }

    fn xor_assign(&mut self, other: &Mask) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn xored(&self, other: &Mask) -> Mask {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    fn count_ones(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
}

struct ClassContext {
    columns: Vec<Mask>,
    /// sign ∘ prep column, the desired echo's phase reference.
    reference: Mask,
    rows: usize,
}

impl ClassContext {
    fn new(scheme: &PhaseScheme) -> Self {
        let rows = scheme.row_count();
        let words = rows.div_ceil(64);
        let columns = (1..=scheme.m)
            .map(|j| Mask::from_column(&scheme.inversion_column(j), words))
            .collect();
        let combined: Vec<i8> =
            scheme.sign.iter().zip(scheme.rows.iter()).map(|(s, r)| s * r[0]).collect();
        ClassContext { columns, reference: Mask::from_column(&combined, words), rows }
    }

    /// Sum over rows of sign * prep * product of the class columns.
    fn combined_sum(&self, product: &Mask) -> i64 {
        let ones = product.xored(&self.reference).count_ones() as i64;
        self.rows as i64 - 2 * ones
    }

    fn class_cancelled(&self, class: &[usize]) -> bool {
        let words = self.reference.0.len();
        let mut acc = Mask::zeros(words);
        for &j in class {
            acc.xor_assign(&self.columns[j - 1]);
        }
        self.combined_sum(&acc) == 0
    }
}

/// Counts cancelled classes for every non-empty F ⊆ {1..m}.
pub fn verify_scheme(scheme: &PhaseScheme) -> Result<OrthogonalityReport, SchemeError> {
    verify_scheme_with(scheme, &VerifyOptions::default())
}

pub fn verify_scheme_with(
    scheme: &PhaseScheme,
    opts: &VerifyOptions,
) -> Result<OrthogonalityReport, SchemeError> {
    scheme.validate()?;
    let m = scheme.m;
    if m > 126 {
        return Err(SchemeError::TooManyPulses { m, max: 126 });
    }
    let ctx = ClassContext::new(scheme);
    let total_classes = 1u128 << m;
    let desired_preserved = ctx.combined_sum(&Mask::zeros(ctx.reference.0.len())) != 0;

    if m == 0 {
        // Degenerate: nothing to cancel.
        return Ok(OrthogonalityReport {
            m,
            total_classes,
            cancelled: 0,
            ratio: BigRational::one(),
            surviving_classes: Vec::new(),
            survivor_cap: opts.survivor_cap,
            survivors_exhaustive: true,
            method: VerifyMethod::ExactEnumeration,
            desired_preserved,
        });
    }

    if let Some(cancelled) = group_walk_count(&ctx, opts) {
        let (survivors, exhaustive) = find_survivors(&ctx, m, opts);
        let ratio = BigRational::new(
            BigInt::from(cancelled),
            BigInt::from(total_classes - 1),
        );
        return Ok(OrthogonalityReport {
            m,
            total_classes,
            cancelled,
            ratio,
            surviving_classes: survivors,
            survivor_cap: opts.survivor_cap,
            survivors_exhaustive: exhaustive,
            method: VerifyMethod::ExactGroupWalk,
            desired_preserved,
        });
    }

    if m <= 63 && (total_classes - 1) <= opts.class_budget as u128 {
        let (cancelled, survivors, exhaustive) = enumerate_count(&ctx, m, opts);
        let ratio = BigRational::new(BigInt::from(cancelled), BigInt::from(total_classes - 1));
        return Ok(OrthogonalityReport {
            m,
            total_classes,
            cancelled,
            ratio,
            surviving_classes: survivors,
            survivor_cap: opts.survivor_cap,
            survivors_exhaustive: exhaustive,
            method: VerifyMethod::ExactEnumeration,
            desired_preserved,
        });
    }

    let (cancelled, survivors) = sampled_count(&ctx, m, opts);
    let ratio = BigRational::new(BigInt::from(cancelled), BigInt::from(opts.sample_size));
    Ok(OrthogonalityReport {
        m,
        total_classes,
        cancelled,
        ratio,
        surviving_classes: survivors,
        survivor_cap: opts.survivor_cap,
        survivors_exhaustive: false,
        method: VerifyMethod::Sampled { sample_size: opts.sample_size },
        desired_preserved,
    })
}

/// Dynamic programming over product images: the map from classes to their
/// column products lands in the subgroup generated by the columns, which for
/// structured schemes stays tiny even when 2^m classes exist. Returns None
/// if the image table would exceed the memory budget.
fn group_walk_count(ctx: &ClassContext, opts: &VerifyOptions) -> Option<u128> {
    let words = ctx.reference.0.len();
    let entry_bytes = words * 8 + 48;
    let mut images: HashMap<Mask, u128> = HashMap::new();
    images.insert(Mask::zeros(words), 1);
    for col in &ctx.columns {
        let mut next = images.clone();
        for (mask, count) in &images {
            *next.entry(mask.xored(col)).or_insert(0) += count;
        }
        if next.len() * entry_bytes > opts.group_walk_budget_bytes {
            return None;
        }
        images = next;
    }
    let mut cancelled: u128 = 0;
    for (mask, count) in &images {
        if ctx.combined_sum(mask) == 0 {
            cancelled += count;
        }
    }
    // The empty class (product = E) is excluded from the tally; it was
    // counted above only if the reference itself sums to zero.
    if ctx.combined_sum(&Mask::zeros(words)) == 0 {
        cancelled -= 1;
    }
    Some(cancelled)
}

/// Gray-code walk over all 2^m - 1 classes; one column toggle per step.
fn enumerate_count(
    ctx: &ClassContext,
    m: usize,
    opts: &VerifyOptions,
) -> (u128, Vec<Vec<usize>>, bool) {
    let words = ctx.reference.0.len();
    let mut acc = Mask::zeros(words);
    let mut cancelled: u128 = 0;
    let mut survivors: Vec<(u64, Vec<usize>)> = Vec::new();
    let total = 1u64 << m;
    for r in 1..total {
        let toggle = r.trailing_zeros() as usize;
        acc.xor_assign(&ctx.columns[toggle]);
        if ctx.combined_sum(&acc) == 0 {
            cancelled += 1;
        } else {
            let gray = r ^ (r >> 1);
            let class: Vec<usize> = (0..m).filter(|j| gray >> j & 1 == 1).map(|j| j + 1).collect();
            survivors.push((gray, class));
        }
    }
    survivors.sort_by(|a, b| {
        (a.1.len(), &a.1).cmp(&(b.1.len(), &b.1))
    });
    let exhaustive = survivors.len() <= opts.survivor_cap;
    let listed = survivors.into_iter().take(opts.survivor_cap).map(|(_, c)| c).collect();
    (cancelled, listed, exhaustive)
}

/// Size-ordered survivor search used when classes are counted without being
/// enumerated individually.
fn find_survivors(ctx: &ClassContext, m: usize, opts: &VerifyOptions) -> (Vec<Vec<usize>>, bool) {
    let mut survivors = Vec::new();
    let mut tested: u64 = 0;
    let mut exhausted_all_sizes = true;
    'sizes: for q in 1..=m {
        let mut class: Vec<usize> = (1..=q).collect();
        loop {
            tested += 1;
            if tested > opts.survivor_search_budget {
                exhausted_all_sizes = false;
                break 'sizes;
            }
            if !ctx.class_cancelled(&class) {
                survivors.push(class.clone());
                if survivors.len() >= opts.survivor_cap {
                    exhausted_all_sizes = false;
                    break 'sizes;
                }
            }
            // next combination of size q from 1..=m
            let mut i = q;
            loop {
                if i == 0 {
                    break;
                }
                if class[i - 1] < m - (q - i) {
                    class[i - 1] += 1;
                    for k in i..q {
                        class[k] = class[k - 1] + 1;
                    }
                    break;
                }
                i -= 1;
            }
            if i == 0 {
                break;
            }
        }
    }
    (survivors, exhausted_all_sizes)
}

fn sampled_count(ctx: &ClassContext, m: usize, opts: &VerifyOptions) -> (u128, Vec<Vec<usize>>) {
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let mut cancelled: u128 = 0;
    let mut survivors = Vec::new();
    for _ in 0..opts.sample_size {
        // uniform non-empty class
        let class: Vec<usize> = loop {
            let mut picked: Vec<usize> = (1..=m).filter(|_| rng.gen::<bool>()).collect();
            if !picked.is_empty() {
                picked.sort_unstable();
                break picked;
            }
        };
        if ctx.class_cancelled(&class) {
            cancelled += 1;
        } else if survivors.len() < opts.survivor_cap {
            survivors.push(class);
        }
    }
    (cancelled, survivors)
}
