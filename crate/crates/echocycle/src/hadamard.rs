//! Sylvester Hadamard matrices and Hadamard-product orthogonality (HPO).
//!
//! All ±1 data is held in exact integer form: orthogonality tests are
//! sum-to-zero checks, subset counts are arbitrary-precision integers, and
//! ratios are exact rationals. No floating point enters the combinatorics.
//!
//! A set of ±1 columns of one length forms a [`SignVectorSet`]; the columns
//! of a Sylvester matrix form an abelian group under the element-wise
//! (Hadamard) product, which is what makes a small number of columns cancel
//! almost every echo class. [`count_nonorthogonal_exact`] evaluates the
//! closed-form count of product-to-identity subsets, and
//! [`count_nonorthogonal_brute`] re-derives it by exhaustive enumeration.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HadamardError {
    #[error("order {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry at ({row}, {col}) is {value}, expected +1 or -1")]
    NotSign { row: usize, col: usize, value: i8 },
    #[error("vector length {got} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subset of sign vectors is empty")]
    EmptySubset,
    #[error("set must contain the all-ones vector E")]
    MissingIdentity,
    #[error("subset size {q} out of range 1..={max}")]
    QOutOfRange { q: usize, max: usize },
    #[error("enumeration requires {required} subset evaluations, budget is {budget}")]
    BudgetExceeded { required: BigUint, budget: u64 },
}

/// A ±1 vector stored exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self, HadamardError> {
        for (i, &v) in entries.iter().enumerate() {
            if v != 1 && v != -1 {
                return Err(HadamardError::NotSign { row: i, col: 0, value: v });
            }
        }
        Ok(Self(entries))
    }

    /// All-ones vector E, the group identity under the Hadamard product.
    pub fn identity(len: usize) -> Self {
        Self(vec![1; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&v| v == 1)
    }

    /// Element-wise product with another vector of the same length.
    pub fn hadamard(&self, other: &SignVector) -> Result<SignVector, HadamardError> {
        if self.len() != other.len() {
            return Err(HadamardError::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(SignVector(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect()))
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&v| v as i64).sum()
    }

    /// Bitmask encoding: bit i set iff entry i is -1. The Hadamard product
    /// of two vectors is the XOR of their masks.
    fn bitmask(&self) -> Vec<u64> {
        let mut mask = vec![0u64; self.len().div_ceil(64)];
        for (i, &v) in self.0.iter().enumerate() {
            if v == -1 {
                mask[i / 64] |= 1 << (i % 64);
            }
        }
        mask
    }
}

/// An ordered collection of ±1 columns sharing one dimension.
#[derive(Clone, Debug)]
pub struct SignVectorSet {
    dimension: usize,
    columns: Vec<SignVector>,
}

impl SignVectorSet {
    pub fn new(columns: Vec<SignVector>) -> Result<Self, HadamardError> {
        let dimension = columns.first().map_or(0, SignVector::len);
        for c in &columns {
            if c.len() != dimension {
                return Err(HadamardError::DimensionMismatch { expected: dimension, got: c.len() });
            }
        }
        Ok(Self { dimension, columns })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn columns(&self) -> &[SignVector] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// A Sylvester Hadamard matrix of power-of-two order, rows stored flat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    pub fn column(&self, col: usize) -> SignVector {
        SignVector((0..self.order).map(|r| self.get(r, col)).collect())
    }

    /// All columns as a sign-vector set; column 0 is E.
    pub fn column_set(&self) -> SignVectorSet {
        SignVectorSet {
            dimension: self.order,
            columns: (0..self.order).map(|c| self.column(c)).collect(),
        }
    }
}

/// Sylvester's doubling construction: H_1 = (1), H_2N = [[H, H], [H, -H]].
///
/// Deterministic and bit-for-bit reproducible; rejects non-power-of-two
/// orders.
pub fn sylvester(order: usize) -> Result<HadamardMatrix, HadamardError> {
    if order == 0 || !order.is_power_of_two() {
        return Err(HadamardError::NotPowerOfTwo(order));
    }
    let mut n = 1usize;
    let mut entries = vec![1i8];
    while n < order {
        let double = 2 * n;
        let mut next = vec![0i8; double * double];
        for r in 0..n {
            for c in 0..n {
                let v = entries[r * n + c];
                next[r * double + c] = v;
                next[r * double + n + c] = v;
                next[(n + r) * double + c] = v;
                next[(n + r) * double + n + c] = -v;
            }
        }
        n = double;
        entries = next;
    }
    Ok(HadamardMatrix { order, entries })
}

/// Exact Hadamard test: square ±1 matrix with H^T H = n I.
pub fn is_hadamard(rows: &[Vec<i8>]) -> Result<bool, HadamardError> {
    let n = rows.len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(HadamardError::NotSquare { rows: n, cols: row.len() });
        }
        for (c, &v) in row.iter().enumerate() {
            if v != 1 && v != -1 {
                return Err(HadamardError::NotSign { row: r, col: c, value: v });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dot: i64 = (0..n).map(|r| (rows[r][i] as i64) * (rows[r][j] as i64)).sum();
            if dot != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Hadamard-product orthogonality of a column subset: the element-wise
/// product of all members sums to zero.
pub fn hpo_check(subset: &[SignVector]) -> Result<bool, HadamardError> {
    let first = subset.first().ok_or(HadamardError::EmptySubset)?;
    let mut product = first.clone();
    for v in &subset[1..] {
        product = product.hadamard(v)?;
    }
    Ok(product.sum() == 0)
}

/// Outcome of a closure check over a column set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureVerdict {
    Closed,
    /// Indices of a witness pair whose product lies outside the set.
    Counterexample { i: usize, j: usize },
}

/// Checks that a set containing E is closed under the Hadamard product.
pub fn group_closure_check(set: &SignVectorSet) -> Result<ClosureVerdict, HadamardError> {
    if !set.columns().iter().any(SignVector::is_identity) {
        return Err(HadamardError::MissingIdentity);
    }
    let masks: Vec<Vec<u64>> = set.columns().iter().map(SignVector::bitmask).collect();
    let members: std::collections::HashSet<&[u64]> = masks.iter().map(|m| m.as_slice()).collect();
    for i in 0..masks.len() {
        for j in (i + 1)..masks.len() {
            let product: Vec<u64> = masks[i].iter().zip(&masks[j]).map(|(a, b)| a ^ b).collect();
            if !members.contains(product.as_slice()) {
                return Ok(ClosureVerdict::Counterexample { i, j });
            }
        }
    }
    Ok(ClosureVerdict::Closed)
}

/// Exact count of non-HPO subsets of given size among the 2^n - 1 non-identity
/// group columns, with the matching exact fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalityCount {
    /// Group exponent: the column group has 2^n elements including E.
    pub n: u32,
    /// Subset size.
    pub q: usize,
    /// Number of q-subsets whose product is E (equivalently, non-HPO subsets).
    pub d: BigUint,
    /// d / C(2^n - 1, q), exact.
    pub p: BigRational,
}

impl OrthogonalityCount {
    pub fn p_f64(&self) -> f64 {
        self.p.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// Closed-form D(q) and p(q) for subsets of the 2^n - 1 non-identity columns
/// of a Sylvester group.
///
/// For q = 2k:     D = [C(2^n-1, q) + (-1)^k     (2^n-1) C(2^(n-1)-1, k)] / 2^n
/// For q = 2k + 1: D = [C(2^n-1, q) + (-1)^(k+1) (2^n-1) C(2^(n-1)-1, k)] / 2^n
pub fn count_nonorthogonal_exact(n: u32, q: usize) -> Result<OrthogonalityCount, HadamardError> {
    let group = 1u64 << n;
    let max = (group - 1) as usize;
    if q == 0 || q > max {
        return Err(HadamardError::QOutOfRange { q, max });
    }
    let m = group - 1;
    let k = (q / 2) as u64;
    let parity_flip = if q.is_multiple_of(2) { k } else { k + 1 };
    let lead = BigInt::from(binomial(m, q as u64));
    let corr = BigInt::from(m) * BigInt::from(binomial((group / 2) - 1, k));
    let signed = if parity_flip % 2 == 0 { lead + corr } else { lead - corr };
    debug_assert!(!signed.is_negative());
    let (quot, rem) = num_integer::Integer::div_rem(&signed, &BigInt::from(group));
    debug_assert!(rem.is_zero(), "closed form must divide by 2^n");
    let d = quot.to_biguint().expect("non-negative");
    let p = BigRational::new(BigInt::from(d.clone()), BigInt::from(binomial(m, q as u64)));
    Ok(OrthogonalityCount { n, q, d, p })
}

/// Default evaluation budget for the brute-force counter: keeps desk runs
/// bounded; callers may raise it explicitly.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 100_000_000;

/// Exhaustively counts q-subsets of the given columns whose Hadamard product
/// equals E. Refuses (never truncates) when C(len, q) exceeds `budget`;
/// [`DEFAULT_ENUMERATION_BUDGET`] is the conventional limit.
pub fn count_nonorthogonal_brute(
    set: &SignVectorSet,
    q: usize,
    budget: u64,
) -> Result<u64, HadamardError> {
    let cols = set.len();
    if q == 0 || q > cols {
        return Err(HadamardError::QOutOfRange { q, max: cols });
    }
    let required = binomial(cols as u64, q as u64);
    if required > BigUint::from(budget) {
        return Err(HadamardError::BudgetExceeded { required, budget });
    }
    let masks: Vec<Vec<u64>> = set.columns().iter().map(SignVector::bitmask).collect();
    if set.dimension() <= 64 {
        let flat: Vec<u64> = masks.iter().map(|m| m.first().copied().unwrap_or(0)).collect();
        Ok(count_subsets_xor_zero_u64(&flat, q))
    } else {
        let mut count = 0u64;
        let mut acc = vec![0u64; masks[0].len()];
        count_subsets_xor_zero_wide(&masks, q, 0, &mut acc, &mut count);
        Ok(count)
    }
}

fn count_subsets_xor_zero_u64(masks: &[u64], q: usize) -> u64 {
    fn rec(masks: &[u64], start: usize, remaining: usize, acc: u64, count: &mut u64) {
        if remaining == 0 {
            if acc == 0 {
                *count += 1;
            }
            return;
        }
        // not enough columns left
        let last_start = masks.len() - remaining;
        for i in start..=last_start {
            rec(masks, i + 1, remaining - 1, acc ^ masks[i], count);
        }
    }
    let mut count = 0;
    rec(masks, 0, q, 0, &mut count);
    count
}

fn count_subsets_xor_zero_wide(
    masks: &[Vec<u64>],
    remaining: usize,
    start: usize,
    acc: &mut [u64],
    count: &mut u64,
) {
    if remaining == 0 {
        if acc.iter().all(|&w| w == 0) {
            *count += 1;
        }
        return;
    }
    let last_start = masks.len() - remaining;
    for i in start..=last_start {
        for (a, m) in acc.iter_mut().zip(&masks[i]) {
            *a ^= m;
        }
        count_subsets_xor_zero_wide(masks, remaining - 1, i + 1, acc, count);
        for (a, m) in acc.iter_mut().zip(&masks[i]) {
            *a ^= m;
        }
    }
}

/// Column layout the HPO ratio is evaluated over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// Non-identity columns of the plain Sylvester matrix.
    PlainHadamard,
    /// Columns of the stacked matrix [[E, H'], [E, -H']]; every odd-size
    /// subset of the non-identity columns satisfies HPO by construction.
    Stacked,
}

/// Fraction of non-empty subsets of the 2^n - 1 non-identity columns that
/// satisfy HPO: 1 - sum_q D(q) / sum_q C(2^n - 1, q), exact.
pub fn hpo_ratio(kind: MatrixKind, n: u32) -> Result<BigRational, HadamardError> {
    if n < 2 {
        return Err(HadamardError::QOutOfRange { q: n as usize, max: 1 });
    }
    let m = (1u64 << n) - 1;
    let mut bad = BigUint::zero();
    for q in 1..=(m as usize) {
        if kind == MatrixKind::Stacked && q % 2 == 1 {
            continue;
        }
        bad += count_nonorthogonal_exact(n, q)?.d;
    }
    // sum_q C(m, q) = 2^m - 1
    let total = (BigUint::one() << m) - BigUint::one();
    let frac = BigRational::new(BigInt::from(bad), BigInt::from(total));
    Ok(BigRational::one() - frac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn non_identity_columns(order: usize) -> SignVectorSet {
        let h = sylvester(order).unwrap();
        SignVectorSet::new((1..order).map(|c| h.column(c)).collect()).unwrap()
    }

    #[test]
    fn sylvester_small_orders() {
        assert_eq!(sylvester(1).unwrap().row(0), &[1]);
        let h2 = sylvester(2).unwrap();
        assert_eq!(h2.row(0), &[1, 1]);
        assert_eq!(h2.row(1), &[1, -1]);
        let h4 = sylvester(4).unwrap();
        assert_eq!(h4.row(0), &[1, 1, 1, 1]);
        assert_eq!(h4.row(1), &[1, -1, 1, -1]);
        assert_eq!(h4.row(2), &[1, 1, -1, -1]);
        assert_eq!(h4.row(3), &[1, -1, -1, 1]);
    }

    #[test]
    fn sylvester_rejects_non_power_of_two() {
        assert_eq!(sylvester(12).unwrap_err(), HadamardError::NotPowerOfTwo(12));
        assert_eq!(sylvester(0).unwrap_err(), HadamardError::NotPowerOfTwo(0));
    }

    #[test]
    fn sylvester_normal_form_and_orthogonality_up_to_256() {
        let mut order = 1;
        while order <= 256 {
            let h = sylvester(order).unwrap();
            assert!(h.row(0).iter().all(|&v| v == 1));
            assert!((0..order).all(|r| h.get(r, 0) == 1));
            let rows: Vec<Vec<i8>> = (0..order).map(|r| h.row(r).to_vec()).collect();
            assert!(is_hadamard(&rows).unwrap(), "order {order}");
            order *= 2;
        }
    }

    #[test]
    fn sylvester_columns_form_a_group() {
        let mut order = 2usize;
        while order <= 256 {
            let set = sylvester(order).unwrap().column_set();
            assert_eq!(group_closure_check(&set).unwrap(), ClosureVerdict::Closed);
            order *= 2;
        }
    }

    #[test]
    fn closure_counterexample_for_tampered_set() {
        // Replace one non-E column of H_4 with a balanced vector outside the group.
        let h = sylvester(4).unwrap();
        let mut cols: Vec<SignVector> = (0..4).map(|c| h.column(c)).collect();
        cols[2] = SignVector::new(vec![-1, 1, 1, -1]).unwrap(); // = -(col 3 of H4), outside
        let set = SignVectorSet::new(cols).unwrap();
        match group_closure_check(&set).unwrap() {
            ClosureVerdict::Counterexample { .. } => {}
            ClosureVerdict::Closed => panic!("tampered set reported closed"),
        }
    }

    #[test]
    fn closure_requires_identity() {
        let set = non_identity_columns(4);
        assert_eq!(group_closure_check(&set).unwrap_err(), HadamardError::MissingIdentity);
    }

    #[test]
    fn identity_alone_is_closed() {
        let set = SignVectorSet::new(vec![SignVector::identity(4)]).unwrap();
        assert_eq!(group_closure_check(&set).unwrap(), ClosureVerdict::Closed);
    }

    #[test]
    fn is_hadamard_rejects_and_detects() {
        // all-ones 2x2: identical columns
        assert!(!is_hadamard(&[vec![1, 1], vec![1, 1]]).unwrap());
        // one flipped sign breaks H_4
        let h = sylvester(4).unwrap();
        let mut rows: Vec<Vec<i8>> = (0..4).map(|r| h.row(r).to_vec()).collect();
        rows[2][1] = -rows[2][1];
        assert!(!is_hadamard(&rows).unwrap());
        assert!(matches!(
            is_hadamard(&[vec![1, 1], vec![1]]),
            Err(HadamardError::NotSquare { .. })
        ));
        assert!(matches!(
            is_hadamard(&[vec![1, 0], vec![1, 1]]),
            Err(HadamardError::NotSign { .. })
        ));
    }

    #[test]
    fn hpo_check_examples() {
        let e = SignVector::identity(4);
        let g2 = SignVector::new(vec![1, 1, -1, -1]).unwrap();
        let g3 = SignVector::new(vec![1, -1, 1, -1]).unwrap();
        assert!(hpo_check(&[e.clone(), g2.clone(), g3.clone()]).unwrap());
        // same column twice multiplies to E
        assert!(!hpo_check(&[g2.clone(), g2.clone()]).unwrap());
        // any single non-E group column is balanced
        for c in non_identity_columns(4).columns() {
            assert!(hpo_check(std::slice::from_ref(c)).unwrap());
        }
        assert_eq!(hpo_check(&[]).unwrap_err(), HadamardError::EmptySubset);
        let short = SignVector::identity(2);
        assert!(matches!(hpo_check(&[e, short]), Err(HadamardError::DimensionMismatch { .. })));
    }

    #[test]
    fn exact_counts_match_spec_examples() {
        for n in 2..=6u32 {
            let c = count_nonorthogonal_exact(n, 1).unwrap();
            assert!(c.d.is_zero());
            assert!(c.p.is_zero());
            let c2 = count_nonorthogonal_exact(n, 2).unwrap();
            assert!(c2.d.is_zero());
        }
        assert_eq!(count_nonorthogonal_exact(3, 3).unwrap().d, BigUint::from(7u32));
        assert_eq!(count_nonorthogonal_exact(3, 4).unwrap().d, BigUint::from(7u32));
        assert!(matches!(
            count_nonorthogonal_exact(3, 8),
            Err(HadamardError::QOutOfRange { .. })
        ));
    }

    #[test]
    fn exact_counts_satisfy_recursion_lemma_and_symmetry() {
        // D(q) = [C(m, q-1) - D(q-1) - (2^n - q + 1) D(q-2)] / q, with D(0) = 1
        for n in 2..=10u32 {
            let m = (1u64 << n) - 1;
            let d = |q: usize| -> BigUint {
                if q == 0 {
                    BigUint::one()
                } else {
                    count_nonorthogonal_exact(n, q).unwrap().d
                }
            };
            for q in 2..=(m as usize) {
                let lhs = d(q) * BigUint::from(q as u64);
                let rhs = binomial(m, (q - 1) as u64) - d(q - 1)
                    - BigUint::from((1u64 << n) - q as u64 + 1) * d(q - 2);
                assert_eq!(lhs, rhs, "recursion n={n} q={q}");
            }
            // p(2k) = p(2k-1)
            for k in 1..=((m as usize) / 2) {
                let even = count_nonorthogonal_exact(n, 2 * k).unwrap().p;
                let odd = count_nonorthogonal_exact(n, 2 * k - 1).unwrap().p;
                assert_eq!(even, odd, "lemma n={n} k={k}");
            }
            // D(q) = D(2^n - 1 - q)
            for q in 1..(m as usize) {
                assert_eq!(
                    count_nonorthogonal_exact(n, q).unwrap().d,
                    count_nonorthogonal_exact(n, m as usize - q).unwrap().d,
                    "symmetry n={n} q={q}"
                );
            }
        }
    }

    #[test]
    fn brute_matches_exact_small() {
        for n in 2..=4u32 {
            let set = non_identity_columns(1 << n);
            for q in 1..set.len() {
                let exact = count_nonorthogonal_exact(n, q).unwrap().d;
                let brute = count_nonorthogonal_brute(&set, q, 1 << 24).unwrap();
                assert_eq!(exact, BigUint::from(brute), "n={n} q={q}");
            }
        }
    }

    #[test]
    fn brute_spec_examples() {
        let s8 = non_identity_columns(8);
        assert_eq!(count_nonorthogonal_brute(&s8, 3, 1 << 20).unwrap(), 7);
        let s4 = non_identity_columns(4);
        assert_eq!(count_nonorthogonal_brute(&s4, 3, 1 << 20).unwrap(), 1);
        assert_eq!(count_nonorthogonal_brute(&s8, 1, 1 << 20).unwrap(), 0);
    }

    #[test]
    fn brute_budget_refusal_is_explicit() {
        let set = non_identity_columns(32);
        let err = count_nonorthogonal_brute(&set, 15, 1000).unwrap_err();
        match err {
            HadamardError::BudgetExceeded { required, budget } => {
                assert_eq!(budget, 1000);
                assert_eq!(required, binomial(31, 15));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn brute_wide_dimension_path() {
        // dimension 128 exercises the multi-word bitmask path
        let set = non_identity_columns(128);
        assert_eq!(count_nonorthogonal_brute(&set, 2, 1 << 20).unwrap(), 0);
        let exact = count_nonorthogonal_exact(7, 3).unwrap().d;
        let brute = count_nonorthogonal_brute(&set, 3, 1 << 22).unwrap();
        assert_eq!(exact, BigUint::from(brute));
    }

    #[test]
    fn hpo_ratio_paper_values() {
        let plain = hpo_ratio(MatrixKind::PlainHadamard, 5).unwrap();
        assert!((plain.to_f64().unwrap() - 0.9688).abs() < 1e-4);
        let stacked = hpo_ratio(MatrixKind::Stacked, 5).unwrap();
        assert!((stacked.to_f64().unwrap() - 0.9844).abs() < 1e-4);
        // n = 3 plain ratio from exhaustive enumeration over sylvester(8)
        let set = non_identity_columns(8);
        let mut bad = 0u64;
        let mut total = 0u64;
        for q in 1..=7usize {
            bad += count_nonorthogonal_brute(&set, q, 1 << 20).unwrap();
            total += binomial(7, q as u64).to_u64().unwrap();
        }
        let brute_ratio = 1.0 - (bad as f64) / (total as f64);
        assert!((hpo_ratio(MatrixKind::PlainHadamard, 3).unwrap().to_f64().unwrap() - brute_ratio).abs() < 1e-15);
        assert!(hpo_ratio(MatrixKind::PlainHadamard, 1).is_err());
    }
}
