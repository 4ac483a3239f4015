//! Patterns over `{0,1,*}`, kernel matrices, set partitions, and the
//! union-cardinality and orbit-enumeration machinery behind the moment sum.
//!
//! A pattern with `s` stars denotes a subcube with `2^s` points. A kernel is
//! the active-column core of a k-tuple of subcubes; kernels are enumerated
//! either exhaustively or as orbit representatives under row permutations
//! (within rows of equal star count), column permutations, and per-column
//! 0/1 flips.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CubeError {
    #[error("pattern width mismatch: {0} vs {1}")]
    WidthMismatch(u32, u32),
    #[error("pattern width {0} exceeds supported maximum {1}")]
    WidthTooLarge(u32, u32),
    #[error("invalid pattern string {0:?}: expected characters 0, 1, *")]
    BadPattern(String),
    #[error("partition has {0} rows but kernel has {1}")]
    SizeMismatch(usize, usize),
    #[error("too many patterns for inclusion-exclusion: {0}")]
    TooManyPatterns(usize),
}

/// A subcube of `{0,1}^width` as a word over `{0,1,*}`.
///
/// Stored as two bit masks: `stars` marks wildcard columns, `bits` holds the
/// fixed coordinates (zero on starred columns). Column `j` is bit `j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubePattern {
    width: u32,
    stars: u64,
    bits: u64,
}

pub const MAX_WIDTH: u32 = 63;

impl CubePattern {
    pub fn new(width: u32, stars: u64, bits: u64) -> Result<Self, CubeError> {
        if width > MAX_WIDTH {
            return Err(CubeError::WidthTooLarge(width, MAX_WIDTH));
        }
        let mask = low_mask(width);
        Ok(CubePattern {
            width,
            stars: stars & mask,
            bits: bits & mask & !stars,
        })
    }

    /// Parse the paper-style string form, e.g. `"*1*10*1"`. Character `i`
    /// of the string is column `i` (bit `i`).
    pub fn parse(s: &str) -> Result<Self, CubeError> {
        if s.is_empty() || s.len() > MAX_WIDTH as usize {
            return Err(CubeError::BadPattern(s.into()));
        }
        let mut stars = 0u64;
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '*' => stars |= 1 << i,
                '1' => bits |= 1 << i,
                '0' => {}
                _ => return Err(CubeError::BadPattern(s.into())),
            }
        }
        CubePattern::new(s.len() as u32, stars, bits)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn stars(&self) -> u64 {
        self.stars
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn star_count(&self) -> u32 {
        self.stars.count_ones()
    }

    /// Number of points of the denoted subcube.
    pub fn volume(&self) -> u64 {
        1u64 << self.star_count()
    }

    /// Does the point `x` (coordinate `j` = bit `j`) lie in this subcube?
    pub fn contains_point(&self, x: u64) -> bool {
        (x ^ self.bits) & !self.stars & low_mask(self.width) == 0
    }

    /// Columnwise meet: `* ∧ * = *`, `* ∧ b = b`, `b ∧ b = b`, `0 ∧ 1` kills
    /// the intersection. `Ok(None)` means the subcubes are disjoint.
    pub fn intersect(&self, other: &CubePattern) -> Result<Option<CubePattern>, CubeError> {
        if self.width != other.width {
            return Err(CubeError::WidthMismatch(self.width, other.width));
        }
        let both_fixed = !self.stars & !other.stars & low_mask(self.width);
        if (self.bits ^ other.bits) & both_fixed != 0 {
            return Ok(None);
        }
        let stars = self.stars & other.stars;
        let bits = (self.bits | other.bits) & !stars;
        Ok(Some(CubePattern {
            width: self.width,
            stars,
            bits,
        }))
    }
}

impl fmt::Display for CubePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.width {
            let ch = if self.stars >> j & 1 == 1 {
                '*'
            } else if self.bits >> j & 1 == 1 {
                '1'
            } else {
                '0'
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CubePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CubePattern({self})")
    }
}

fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        !0
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnionAlgorithm {
    InclusionExclusion,
    PointEnum,
}

/// Exact cardinality of the union of the denoted subcubes.
pub fn union_cardinality(
    patterns: &[CubePattern],
    algorithm: UnionAlgorithm,
) -> Result<u64, CubeError> {
    assert!(!patterns.is_empty(), "union of an empty pattern list");
    let width = patterns[0].width;
    for p in patterns {
        if p.width != width {
            return Err(CubeError::WidthMismatch(width, p.width));
        }
    }
    match algorithm {
        UnionAlgorithm::PointEnum => {
            let mut count = 0u64;
            for x in 0..(1u64 << width) {
                if patterns.iter().any(|p| p.contains_point(x)) {
                    count += 1;
                }
            }
            Ok(count)
        }
        UnionAlgorithm::InclusionExclusion => {
            if patterns.len() > 25 {
                return Err(CubeError::TooManyPatterns(patterns.len()));
            }
            let table = subset_union_table(patterns);
            Ok(table[table.len() - 1])
        }
    }
}

/// For every nonempty subset mask `T` of the pattern list, the exact
/// cardinality of the union of the patterns in `T` (index 0 unused).
///
/// Built by inclusion-exclusion over sub-subsets: a subset contributes iff
/// no column carries both a fixed 0 and a fixed 1 among its rows, with
/// contribution `2^{#columns starred in every row}`.
pub fn subset_union_table(patterns: &[CubePattern]) -> Vec<u64> {
    let k = patterns.len();
    let size = 1usize << k;
    // per-subset intersection data: (alive, common stars, fixed zeros, fixed ones)
    let mut alive = vec![true; size];
    let mut star = vec![0u64; size];
    let mut zeros = vec![0u64; size];
    let mut ones = vec![0u64; size];
    let width_mask = low_mask(patterns.first().map_or(0, |p| p.width));
    star[0] = width_mask;
    for t in 1..size {
        let i = t.trailing_zeros() as usize;
        let rest = t & (t - 1);
        let p = &patterns[i];
        let fixed = !p.stars & width_mask;
        star[t] = star[rest] & p.stars;
        zeros[t] = zeros[rest] | (fixed & !p.bits);
        ones[t] = ones[rest] | (fixed & p.bits);
        alive[t] = alive[rest] && zeros[t] & ones[t] == 0;
    }
    let mut union = vec![0u64; size];
    for t in 1..size {
        let mut acc = 0i64;
        // sum over nonempty sub-subsets of t
        let mut s = t;
        loop {
            if alive[s] {
                let sign = if (s.count_ones() & 1) == 1 { 1 } else { -1 };
                acc += sign * (1i64 << star[s].count_ones());
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & t;
            if s == 0 {
                break;
            }
        }
        union[t] = acc as u64;
    }
    union
}

/// A partition of the row set `{0..k-1}`; blocks ordered by least element.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SetPartition {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(k: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        let p = SetPartition { k, blocks };
        debug_assert!(p.is_valid());
        p
    }

    fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.k];
        for b in &self.blocks {
            if b.is_empty() {
                return false;
            }
            for &i in b {
                if i >= self.k || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of blocks, the paper's `m`.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Bit mask of each block over the rows.
    pub fn block_masks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(0usize, |m, &i| m | 1 << i))
            .collect()
    }
}

/// All set partitions of `{0..k-1}` via restricted growth strings; the count
/// is the Bell number B(k).
pub fn enumerate_set_partitions(k: usize) -> Vec<SetPartition> {
    assert!(k >= 1 && k <= 12, "set partition enumeration supports 1..=12 rows");
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    loop {
        let m = rgs.iter().copied().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); m];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(SetPartition::new(k, blocks));
        // next restricted growth string
        let mut i = k;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let cap = rgs[..i].iter().copied().max().unwrap() + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for v in rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                break;
            }
            rgs[i] = 0;
        }
    }
}

/// A `k x a` matrix over `{0,1,*}` where row `i` has exactly `r_i` stars and
/// every column contains at least one star.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KernelMatrix {
    a: u32,
    rows: Vec<CubePattern>,
}

impl KernelMatrix {
    pub fn new(a: u32, rows: Vec<CubePattern>) -> Self {
        let k = KernelMatrix { a, rows };
        debug_assert!(k.check_invariants().is_ok(), "invalid kernel: {k:?}");
        k
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[CubePattern] {
        &self.rows
    }

    pub fn row_star_counts(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.star_count()).collect()
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let mut star_union = 0u64;
        for r in &self.rows {
            if r.width() != self.a {
                return Err(format!("row width {} != a = {}", r.width(), self.a));
            }
            star_union |= r.stars();
        }
        if star_union != low_mask(self.a) {
            return Err("inactive column in kernel".into());
        }
        let rs = self.row_star_counts();
        let max_r = rs.iter().copied().max().unwrap_or(0);
        let sum_r: u32 = rs.iter().sum();
        if !(max_r <= self.a && self.a <= sum_r) && !(self.a == 0 && sum_r == 0) {
            return Err(format!("a = {} outside [{max_r}, {sum_r}]", self.a));
        }
        Ok(())
    }

    /// One pattern string per row.
    pub fn render(&self) -> String {
        self.rows
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// `v`: total vertex count of the per-block unions of kernel rows. Blocks
/// receive distinct tails, so their unions are disjoint and add up.
pub fn kernel_block_volume(kernel: &KernelMatrix, p: &SetPartition) -> Result<u64, CubeError> {
    if p.k() != kernel.k() {
        return Err(CubeError::SizeMismatch(p.k(), kernel.k()));
    }
    let mut v = 0u64;
    for block in p.blocks() {
        if kernel.a() == 0 {
            v += 1; // width-0 rows all denote the same single point
            continue;
        }
        let rows: Vec<CubePattern> = block.iter().map(|&i| kernel.rows()[i]).collect();
        v += union_cardinality(&rows, UnionAlgorithm::InclusionExclusion)?;
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMode {
    Exhaustive,
    Orbits,
}

/// One kernel column: star mask and fixed bits over the `k` rows.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Column {
    stars: u32,
    bits: u32,
}

impl Column {
    /// Flip-canonical representative: the lowest non-star row carries a 0.
    fn flip_canonical(self, k: usize) -> Column {
        let non_star = !self.stars & mask_k(k);
        let low = non_star & non_star.wrapping_neg();
        if low != 0 && self.bits & low != 0 {
            Column {
                stars: self.stars,
                bits: !self.bits & non_star,
            }
        } else {
            self
        }
    }

    fn is_all_star(self, k: usize) -> bool {
        self.stars == mask_k(k)
    }

    fn permute_rows(self, perm: &[usize]) -> Column {
        // row i of the result is row perm[i] of the input
        let mut stars = 0u32;
        let mut bits = 0u32;
        for (i, &src) in perm.iter().enumerate() {
            stars |= (self.stars >> src & 1) << i;
            bits |= (self.bits >> src & 1) << i;
        }
        Column { stars, bits }
    }
}

fn mask_k(k: usize) -> u32 {
    if k >= 32 {
        !0
    } else {
        (1u32 << k) - 1
    }
}

/// Enumerate kernels for row star counts `rs` and `a` active columns.
///
/// `Exhaustive` yields every matrix with multiplicity 1 and is only feasible
/// for small sizes. `Orbits` yields one representative per orbit under the
/// symmetry group (row permutations among rows with equal `r_i`, column
/// permutations, per-column 0/1 flips) with multiplicity equal to the orbit
/// size; the summed multiplicities equal the exhaustive count.
pub fn enumerate_kernels(
    rs: &[u32],
    a: u32,
    mode: KernelMode,
) -> Vec<(KernelMatrix, u128)> {
    let k = rs.len();
    assert!(k >= 1 && k <= 16, "kernel enumeration supports 1..=16 rows");
    let max_r = rs.iter().copied().max().unwrap();
    let sum_r: u32 = rs.iter().sum();
    if a < max_r || a > sum_r {
        if !(a == 0 && sum_r == 0) {
            return Vec::new();
        }
    }
    if a == 0 {
        // empty kernel: valid only when every row has zero stars
        if sum_r == 0 {
            let rows = vec![CubePattern::new(0, 0, 0).unwrap(); k];
            return vec![(KernelMatrix { a: 0, rows }, 1)];
        }
        return Vec::new();
    }
    match mode {
        KernelMode::Exhaustive => enumerate_exhaustive(rs, a),
        KernelMode::Orbits => enumerate_orbits(rs, a),
    }
}

fn columns_to_kernel(cols: &[Column], k: usize) -> KernelMatrix {
    let a = cols.len() as u32;
    let rows = (0..k)
        .map(|i| {
            let mut stars = 0u64;
            let mut bits = 0u64;
            for (j, c) in cols.iter().enumerate() {
                stars |= ((c.stars >> i & 1) as u64) << j;
                bits |= ((c.bits >> i & 1) as u64) << j;
            }
            CubePattern::new(a, stars, bits).unwrap()
        })
        .collect();
    KernelMatrix { a, rows }
}

fn enumerate_exhaustive(rs: &[u32], a: u32) -> Vec<(KernelMatrix, u128)> {
    let k = rs.len();
    // all possible rows per star count
    let mut row_choices: BTreeMap<u32, Vec<CubePattern>> = BTreeMap::new();
    for &r in rs {
        row_choices.entry(r).or_insert_with(|| {
            let mut v = Vec::new();
            for stars in 0u64..(1 << a) {
                if stars.count_ones() != r {
                    continue;
                }
                let free = !stars & low_mask(a);
                let mut bits_sub = 0u64;
                loop {
                    v.push(CubePattern::new(a, stars, bits_sub).unwrap());
                    bits_sub = (bits_sub.wrapping_sub(free)) & free;
                    if bits_sub == 0 {
                        break;
                    }
                }
            }
            v
        });
    }
    let mut out = Vec::new();
    let mut rows: Vec<CubePattern> = Vec::with_capacity(k);
    fn rec(
        rs: &[u32],
        a: u32,
        choices: &BTreeMap<u32, Vec<CubePattern>>,
        rows: &mut Vec<CubePattern>,
        out: &mut Vec<(KernelMatrix, u128)>,
    ) {
        let i = rows.len();
        if i == rs.len() {
            let star_union = rows.iter().fold(0u64, |m, r| m | r.stars());
            if star_union == low_mask(a) {
                out.push((
                    KernelMatrix {
                        a,
                        rows: rows.clone(),
                    },
                    1,
                ));
            }
            return;
        }
        // prune: remaining rows must be able to activate the missing columns
        let star_union = rows.iter().fold(0u64, |m, r| m | r.stars());
        let missing = (low_mask(a) & !star_union).count_ones();
        let remaining: u32 = rs[i..].iter().sum();
        if missing > remaining {
            return;
        }
        for row in &choices[&rs[i]] {
            rows.push(*row);
            rec(rs, a, choices, rows, out);
            rows.pop();
        }
    }
    rec(rs, a, &row_choices, &mut rows, &mut out);
    out
}

/// Orbit enumeration via column multisets.
///
/// A kernel up to column permutation and per-column flips is exactly a
/// multiset of flip-canonical columns. We enumerate those multisets with the
/// row star counts as constraints; the number of ordered matrices in each
/// class is `a!/prod(mult!) * 2^{#non-all-star columns}`. Row symmetry is
/// then quotiented by keeping only the lexicographically least multiset
/// among its images under permutations of equal-`r_i` rows.
fn enumerate_orbits(rs: &[u32], a: u32) -> Vec<(KernelMatrix, u128)> {
    let k = rs.len();
    // flip-canonical column types, ascending
    let mut types: Vec<Column> = Vec::new();
    for stars in 1u32..(1 << k) {
        let free = !stars & mask_k(k);
        // first free row fixed to 0 by flip canonicalization
        let low = free & free.wrapping_neg();
        let var = free & !low;
        let mut bits_sub = 0u32;
        loop {
            types.push(Column {
                stars,
                bits: bits_sub,
            });
            if var == 0 {
                break;
            }
            bits_sub = bits_sub.wrapping_sub(var) & var;
            if bits_sub == 0 {
                break;
            }
        }
    }
    types.sort();

    let row_perms = equal_row_permutations(rs);
    let mut out = Vec::new();
    let mut mults: Vec<(usize, u32)> = Vec::new(); // (type index, multiplicity)
    rec_orbits(
        rs,
        a,
        &types,
        0,
        a,
        &mut rs.to_vec(),
        &mut mults,
        &row_perms,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn rec_orbits(
    rs: &[u32],
    a: u32,
    types: &[Column],
    type_idx: usize,
    cols_left: u32,
    stars_left: &mut Vec<u32>,
    mults: &mut Vec<(usize, u32)>,
    row_perms: &[Vec<usize>],
    out: &mut Vec<(KernelMatrix, u128)>,
) {
    if cols_left == 0 {
        if stars_left.iter().all(|&r| r == 0) {
            emit_orbit(rs, a, types, mults, row_perms, out);
        }
        return;
    }
    if type_idx == types.len() {
        return;
    }
    // prune: every remaining column needs at least one star, and no row can
    // take more than one star per column
    let total_left: u32 = stars_left.iter().sum();
    if total_left < cols_left || stars_left.iter().any(|&r| r > cols_left) {
        return;
    }
    let t = types[type_idx];
    // max multiplicity for this type limited by per-row budgets
    let mut max_mult = cols_left;
    for (i, &r) in stars_left.iter().enumerate() {
        if t.stars >> i & 1 == 1 {
            max_mult = max_mult.min(r);
        }
    }
    for mult in (0..=max_mult).rev() {
        if mult > 0 {
            for (i, r) in stars_left.iter_mut().enumerate() {
                if t.stars >> i & 1 == 1 {
                    *r -= mult;
                }
            }
            mults.push((type_idx, mult));
        }
        rec_orbits(
            rs,
            a,
            types,
            type_idx + 1,
            cols_left - mult,
            stars_left,
            mults,
            row_perms,
            out,
        );
        if mult > 0 {
            mults.pop();
            for (i, r) in stars_left.iter_mut().enumerate() {
                if t.stars >> i & 1 == 1 {
                    *r += mult;
                }
            }
        }
    }
}

fn emit_orbit(
    rs: &[u32],
    a: u32,
    types: &[Column],
    mults: &[(usize, u32)],
    row_perms: &[Vec<usize>],
    out: &mut Vec<(KernelMatrix, u128)>,
) {
    let k = rs.len();
    let cols: Vec<Column> = mults
        .iter()
        .flat_map(|&(ti, m)| std::iter::repeat(types[ti]).take(m as usize))
        .collect();
    // canonical signature of a column multiset under flips and ordering
    let signature = |cs: &[Column]| -> Vec<Column> {
        let mut v: Vec<Column> = cs.iter().map(|c| c.flip_canonical(k)).collect();
        v.sort();
        v
    };
    let own = signature(&cols);
    // quotient by permutations of equal-r rows: keep only the least image;
    // bail out as soon as any image compares smaller
    let mut images: Vec<Vec<Column>> = Vec::new();
    let mut permuted: Vec<Column> = Vec::with_capacity(cols.len());
    for perm in row_perms {
        permuted.clear();
        permuted.extend(cols.iter().map(|c| c.permute_rows(perm).flip_canonical(k)));
        permuted.sort();
        if permuted < own {
            return; // a smaller representative exists elsewhere
        }
        if !images.contains(&permuted) {
            images.push(permuted.clone());
        }
    }
    // ordered matrices represented by one multiset
    let mut fiber: u128 = factorial_u128(a);
    let mut run = 1u32;
    for w in own.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            fiber /= factorial_u128(run);
            run = 1;
        }
    }
    fiber /= factorial_u128(run);
    let non_all_star = own.iter().filter(|c| !c.is_all_star(k)).count() as u32;
    fiber <<= non_all_star;
    out.push((
        columns_to_kernel(&own, k),
        fiber * images.len() as u128,
    ));
}

fn factorial_u128(a: u32) -> u128 {
    (1..=a as u128).product::<u128>().max(1)
}

/// All permutations that only move rows with equal star counts. The
/// permutation maps result row `i` to source row `perm[i]`.
fn equal_row_permutations(rs: &[u32]) -> Vec<Vec<usize>> {
    let k = rs.len();
    // build position by position, allowing row j at position i iff r_j == r_i
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(rs: &[u32], current: &mut Vec<usize>, used: &mut u32, out: &mut Vec<Vec<usize>>) {
        let i = current.len();
        if i == rs.len() {
            out.push(current.clone());
            return;
        }
        for j in 0..rs.len() {
            if *used >> j & 1 == 0 && rs[j] == rs[i] {
                *used |= 1 << j;
                current.push(j);
                rec(rs, current, used, out);
                current.pop();
                *used &= !(1u32 << j);
            }
        }
    }
    let mut used = 0u32;
    rec(rs, &mut current, &mut used, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(s: &str) -> CubePattern {
        CubePattern::parse(s).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p = pat("*1*10*1");
        assert_eq!(p.to_string(), "*1*10*1");
        assert_eq!(p.star_count(), 3);
        assert_eq!(p.volume(), 8);
        assert!(CubePattern::parse("01x").is_err());
        assert!(CubePattern::parse("").is_err());
    }

    #[test]
    fn intersect_examples() {
        // [*,1] ∩ [0,*] = [0,1]
        assert_eq!(pat("*1").intersect(&pat("0*")).unwrap(), Some(pat("01")));
        // conflicting fixed bit
        assert_eq!(pat("0*").intersect(&pat("1*")).unwrap(), None);
        // idempotence
        let p = pat("*10");
        assert_eq!(p.intersect(&p).unwrap(), Some(p));
        assert!(pat("0").intersect(&pat("01")).is_err());
    }

    #[test]
    fn union_examples() {
        let ie = UnionAlgorithm::InclusionExclusion;
        assert_eq!(union_cardinality(&[pat("**0")], ie).unwrap(), 4);
        assert_eq!(union_cardinality(&[pat("*0"), pat("*1")], ie).unwrap(), 4);
        assert_eq!(union_cardinality(&[pat("*0"), pat("0*")], ie).unwrap(), 3);
    }

    #[test]
    fn union_algorithms_agree_randomized() {
        // deterministic pseudo-random pattern lists up to width 8
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..300 {
            let width = 1 + (next() % 8) as u32;
            let len = 1 + (next() % 4) as usize;
            let pats: Vec<CubePattern> = (0..len)
                .map(|_| {
                    let stars = next() & low_mask(width);
                    let bits = next() & low_mask(width);
                    CubePattern::new(width, stars, bits).unwrap()
                })
                .collect();
            assert_eq!(
                union_cardinality(&pats, UnionAlgorithm::InclusionExclusion).unwrap(),
                union_cardinality(&pats, UnionAlgorithm::PointEnum).unwrap()
            );
        }
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        let bell = [1usize, 2, 5, 15, 52, 203, 877, 4140];
        for (i, &b) in bell.iter().enumerate() {
            assert_eq!(enumerate_set_partitions(i + 1).len(), b);
        }
    }

    #[test]
    fn set_partitions_unique_and_canonical() {
        let parts = enumerate_set_partitions(4);
        for (i, p) in parts.iter().enumerate() {
            assert!(p.is_valid());
            for q in &parts[i + 1..] {
                assert_ne!(p, q);
            }
        }
    }

    #[test]
    fn kernel_block_volume_examples() {
        let kernel = KernelMatrix::new(2, vec![pat("*0"), pat("0*")]);
        let joined = SetPartition::new(2, vec![vec![0, 1]]);
        let split = SetPartition::new(2, vec![vec![0], vec![1]]);
        assert_eq!(kernel_block_volume(&kernel, &joined).unwrap(), 3);
        assert_eq!(kernel_block_volume(&kernel, &split).unwrap(), 4);
        let twin = KernelMatrix::new(1, vec![pat("*"), pat("*")]);
        let j1 = SetPartition::new(2, vec![vec![0, 1]]);
        assert_eq!(kernel_block_volume(&twin, &j1).unwrap(), 2);
        let bad = SetPartition::new(3, vec![vec![0], vec![1], vec![2]]);
        assert!(kernel_block_volume(&kernel, &bad).is_err());
    }

    #[test]
    fn kernel_enumeration_small_cases() {
        // rs=[1], a=1: the single-star 1x1 matrix
        assert_eq!(enumerate_kernels(&[1], 1, KernelMode::Exhaustive).len(), 1);
        // rs=[1,1], a=1: both rows must star the single column
        let ks = enumerate_kernels(&[1, 1], 1, KernelMode::Exhaustive);
        assert_eq!(ks.len(), 1);
        // rs=[1,1], a=2: 8 matrices
        let ks = enumerate_kernels(&[1, 1], 2, KernelMode::Exhaustive);
        assert_eq!(ks.len(), 8);
        let orbit_total: u128 = enumerate_kernels(&[1, 1], 2, KernelMode::Orbits)
            .iter()
            .map(|(_, m)| m)
            .sum();
        assert_eq!(orbit_total, 8);
        // a outside bounds
        assert!(enumerate_kernels(&[1, 1], 3, KernelMode::Orbits).is_empty());
        assert!(enumerate_kernels(&[2], 1, KernelMode::Orbits).is_empty());
    }

    #[test]
    fn orbit_modes_agree_on_weighted_sums() {
        // multiplicity-weighted distribution of v over all partitions must
        // match between modes for every (rs, a) with k <= 3, a <= 4
        for rs in [
            vec![1u32],
            vec![2],
            vec![1, 1],
            vec![2, 1],
            vec![2, 2],
            vec![1, 1, 1],
            vec![2, 1, 1],
        ] {
            let max_r = *rs.iter().max().unwrap();
            let sum_r: u32 = rs.iter().sum();
            for a in max_r..=sum_r.min(4) {
                let parts = enumerate_set_partitions(rs.len());
                let mut hist_ex: BTreeMap<(usize, u64), u128> = BTreeMap::new();
                let mut hist_orb: BTreeMap<(usize, u64), u128> = BTreeMap::new();
                for (mode, hist) in [
                    (KernelMode::Exhaustive, &mut hist_ex),
                    (KernelMode::Orbits, &mut hist_orb),
                ] {
                    for (kernel, mult) in enumerate_kernels(&rs, a, mode) {
                        kernel.check_invariants().unwrap();
                        for p in &parts {
                            let v = kernel_block_volume(&kernel, p).unwrap();
                            *hist.entry((p.block_count(), v)).or_default() += mult;
                        }
                    }
                }
                assert_eq!(hist_ex, hist_orb, "rs={rs:?} a={a}");
            }
        }
    }

    #[test]
    fn union_invariant_under_column_symmetry() {
        // permuting columns and flipping bits jointly leaves the union size fixed
        let pats = vec![pat("*01"), pat("0*1"), pat("10*")];
        let base = union_cardinality(&pats, UnionAlgorithm::InclusionExclusion).unwrap();
        // reverse columns and flip column 0
        let transformed: Vec<CubePattern> = pats
            .iter()
            .map(|p| {
                let s = p.to_string();
                let mut chars: Vec<char> = s.chars().rev().collect();
                chars[0] = match chars[0] {
                    '0' => '1',
                    '1' => '0',
                    c => c,
                };
                CubePattern::parse(&chars.iter().collect::<String>()).unwrap()
            })
            .collect();
        assert_eq!(
            union_cardinality(&transformed, UnionAlgorithm::InclusionExclusion).unwrap(),
            base
        );
    }
}

