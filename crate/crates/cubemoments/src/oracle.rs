//! Ground truth by explicit enumeration and sampling: subcube counting in
//! explicit subsets, exhaustive exact moments for tiny `n`, tuple-sum exact
//! moments, and reproducible Monte-Carlo estimation.
//!
//! Point encoding: coordinate `j` of the cube is bit `j` of the point index,
//! so the dimension-`d` neighbor of point `x` is `x ^ (1 << d)`. Both
//! counting methods rely on this fixed convention.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cubes::{union_cardinality, CubePattern, UnionAlgorithm};
use crate::exactalg::{rat_to_f64, Rat};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("n = {0} out of range for this operation (max {1})")]
    NOutOfRange(u32, u32),
    #[error("r = {0} exceeds n = {1}")]
    ROutOfRange(u32, u32),
    #[error("invalid subset point {0:?}: expected a length-n string over 0/1")]
    BadPoint(String),
    #[error("tuple budget exceeded: {0} tuples requested, limit {1}")]
    TupleBudgetExceeded(u128, u64),
}

/// Explicit subset of `{0,1}^n` as a `2^n`-bit vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubsetBitmap {
    n: u32,
    words: Vec<u64>,
}

pub const MAX_SUBSET_N: u32 = 30;

impl SubsetBitmap {
    pub fn empty(n: u32) -> Result<Self, OracleError> {
        if n > MAX_SUBSET_N {
            return Err(OracleError::NOutOfRange(n, MAX_SUBSET_N));
        }
        let bits = 1usize << n;
        Ok(SubsetBitmap {
            n,
            words: vec![0; bits.div_ceil(64)],
        })
    }

    pub fn full(n: u32) -> Result<Self, OracleError> {
        let mut s = SubsetBitmap::empty(n)?;
        for w in &mut s.words {
            *w = !0;
        }
        s.mask_tail();
        Ok(s)
    }

    /// Parse comma-separated point strings such as `"000,001,010"`. Character
    /// `j` of each string is coordinate `j` (bit `j` of the index); all
    /// strings must have the same length `n`.
    pub fn parse(s: &str) -> Result<Self, OracleError> {
        let points: Vec<&str> = s.split(',').map(|t| t.trim()).collect();
        let first = points.first().ok_or_else(|| OracleError::BadPoint(s.into()))?;
        let n = first.len() as u32;
        if n == 0 || n > MAX_SUBSET_N {
            return Err(OracleError::BadPoint((*first).into()));
        }
        let mut out = SubsetBitmap::empty(n)?;
        for p in points {
            if p.len() != n as usize {
                return Err(OracleError::BadPoint(p.into()));
            }
            let mut x = 0u64;
            for (j, ch) in p.chars().enumerate() {
                match ch {
                    '1' => x |= 1 << j,
                    '0' => {}
                    _ => return Err(OracleError::BadPoint(p.into())),
                }
            }
            out.insert(x);
        }
        Ok(out)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn insert(&mut self, x: u64) {
        self.words[(x >> 6) as usize] |= 1 << (x & 63);
    }

    pub fn contains(&self, x: u64) -> bool {
        self.words[(x >> 6) as usize] >> (x & 63) & 1 == 1
    }

    pub fn is_subset_of(&self, other: &SubsetBitmap) -> bool {
        self.n == other.n
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    fn mask_tail(&mut self) {
        let bits = 1u64 << self.n;
        if bits < 64 {
            self.words[0] &= (1u64 << bits) - 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    Naive,
    BitParallel,
}

/// All `r`-dimensional subcubes of `{0,1}^n` as width-`n` patterns.
pub fn all_subcubes(n: u32, r: u32) -> Vec<CubePattern> {
    assert!(r <= n && n <= 63);
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut stars: u64 = if r == 0 { 0 } else { (1 << r) - 1 };
    loop {
        let free = !stars & ((1u64 << n) - 1);
        let mut bits = 0u64;
        loop {
            out.push(CubePattern::new(n, stars, bits).unwrap());
            bits = bits.wrapping_sub(free) & free;
            if bits == 0 {
                break;
            }
        }
        if r == 0 || r == n {
            break;
        }
        // Gosper's hack: next n-bit word with r set bits
        let c = stars & stars.wrapping_neg();
        let rr = stars + c;
        stars = (((rr ^ stars) >> 2) / c) | rr;
        if stars >= 1 << n {
            break;
        }
    }
    out
}

/// Exact number of `r`-subcubes fully contained in `subset`.
pub fn count_subcubes(
    subset: &SubsetBitmap,
    r: u32,
    method: CountMethod,
) -> Result<u64, OracleError> {
    let n = subset.n;
    if r > n {
        return Err(OracleError::ROutOfRange(r, n));
    }
    match method {
        CountMethod::Naive => {
            let mut count = 0u64;
            for pat in all_subcubes(n, r) {
                let stars = pat.stars();
                let mut sub = 0u64;
                let mut all_in = true;
                loop {
                    if !subset.contains(pat.bits() | sub) {
                        all_in = false;
                        break;
                    }
                    sub = sub.wrapping_sub(stars) & stars;
                    if sub == 0 {
                        break;
                    }
                }
                if all_in {
                    count += 1;
                }
            }
            Ok(count)
        }
        CountMethod::BitParallel => Ok(count_bitparallel(subset, r)),
    }
}

// bits i with i & 2^d == 0, for d < 6
const DIM_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

fn count_bitparallel(subset: &SubsetBitmap, r: u32) -> u64 {
    let n = subset.n;
    let mut total = 0u64;
    // iterate all r-subsets of dimensions via Gosper's hack
    let mut dims: u64 = if r == 0 { 0 } else { (1 << r) - 1 };
    loop {
        // fold: survivors are base points whose whole D-subcube is present
        let mut t = subset.words.clone();
        let mut d_iter = dims;
        while d_iter != 0 {
            let d = d_iter.trailing_zeros();
            shr_in_place_and(&mut t, 1u64 << d);
            d_iter &= d_iter - 1;
        }
        // count survivors whose D-coordinates are all zero
        for (j, &w) in t.iter().enumerate() {
            let mut m = !0u64;
            let mut d_iter = dims;
            while d_iter != 0 {
                let d = d_iter.trailing_zeros();
                if d < 6 {
                    m &= DIM_MASKS[d as usize];
                } else if (j >> (d - 6)) & 1 == 1 {
                    m = 0;
                    break;
                }
                d_iter &= d_iter - 1;
            }
            total += (w & m & word_valid_mask(n, j)).count_ones() as u64;
        }
        if r == 0 || r == n {
            break;
        }
        let c = dims & dims.wrapping_neg();
        let rr = dims + c;
        dims = (((rr ^ dims) >> 2) / c) | rr;
        if dims >= 1 << n {
            break;
        }
    }
    total
}

fn word_valid_mask(n: u32, word_index: usize) -> u64 {
    let bits = 1u64 << n;
    if bits >= 64 {
        !0
    } else if word_index == 0 {
        (1u64 << bits) - 1
    } else {
        0
    }
}

/// `t &= t >> shift` across the whole bit vector.
fn shr_in_place_and(words: &mut [u64], shift: u64) {
    let word_shift = (shift >> 6) as usize;
    let bit_shift = (shift & 63) as u32;
    for j in 0..words.len() {
        let src = j + word_shift;
        let mut shifted = if src < words.len() { words[src] } else { 0 };
        if bit_shift != 0 {
            shifted >>= bit_shift;
            if src + 1 < words.len() {
                shifted |= words[src + 1] << (64 - bit_shift);
            }
        }
        words[j] &= shifted;
    }
}

/// In-word subcube count for subsets of `{0,1}^n` with `n <= 6`, the inner
/// loop of the exhaustive moment sweep.
pub fn count_subcubes_word(subset_word: u64, n: u32, r: u32) -> u64 {
    debug_assert!(n <= 6 && r <= n);
    let valid = if n == 6 { !0 } else { (1u64 << (1 << n)) - 1 };
    let word = subset_word & valid;
    let mut total = 0u64;
    let mut dims: u64 = if r == 0 { 0 } else { (1 << r) - 1 };
    loop {
        let mut t = word;
        let mut mask = valid;
        let mut d_iter = dims;
        while d_iter != 0 {
            let d = d_iter.trailing_zeros();
            t &= t >> (1u64 << d);
            mask &= DIM_MASKS[d as usize];
            d_iter &= d_iter - 1;
        }
        total += (t & mask).count_ones() as u64;
        if r == 0 || r == n {
            break;
        }
        let c = dims & dims.wrapping_neg();
        let rr = dims + c;
        dims = (((rr ^ dims) >> 2) / c) | rr;
        if dims >= 1 << n {
            break;
        }
    }
    total
}

#[cfg(feature = "n5-exhaustive")]
const MAX_EXHAUSTIVE_N: u32 = 5;
#[cfg(not(feature = "n5-exhaustive"))]
const MAX_EXHAUSTIVE_N: u32 = 4;

/// Exhaustive exact mixed moment at `p = 1/2`:
/// `2^{-2^n} * sum_S prod_i X_{r_i}(S)` over all subsets `S` of `{0,1}^n`.
pub fn exact_moment_subsets(n: u32, rs: &[u32]) -> Result<Rat, OracleError> {
    if n > MAX_EXHAUSTIVE_N {
        return Err(OracleError::NOutOfRange(n, MAX_EXHAUSTIVE_N));
    }
    for &r in rs {
        if r > n {
            return Err(OracleError::ROutOfRange(r, n));
        }
    }
    let num_subsets: u64 = 1 << (1 << n);
    let mut acc = BigUint::zero();
    let mut chunk: u128 = 0;
    for s in 0..num_subsets {
        let mut prod: u128 = 1;
        for &r in rs {
            prod *= count_subcubes_word(s, n, r) as u128;
        }
        chunk += prod;
        // drain the small accumulator periodically so it cannot overflow
        if s % (1 << 20) == 0 {
            #[cfg(feature = "n5-exhaustive")]
            if n == 5 && s % (1 << 28) == 0 {
                eprintln!("exhaustive sweep: {s}/{num_subsets}");
            }
            acc += BigUint::from(chunk);
            chunk = 0;
        }
    }
    acc += BigUint::from(chunk);
    let denom = BigUint::one() << (1usize << n);
    Ok(Rat::new(BigInt::from(acc), BigInt::from(denom)))
}

/// Tuple-sum exact mixed moment for arbitrary `p`: sums `p^{|union|}` over
/// all ordered tuples of subcubes, independent of the kernel pipeline.
pub fn exact_moment_tuples(
    n: u32,
    rs: &[u32],
    p: &Rat,
    tuple_budget: u64,
) -> Result<Rat, OracleError> {
    for &r in rs {
        if r > n {
            return Err(OracleError::ROutOfRange(r, n));
        }
    }
    let lists: Vec<Vec<CubePattern>> = rs.iter().map(|&r| all_subcubes(n, r)).collect();
    let total: u128 = lists.iter().map(|l| l.len() as u128).product();
    if total > tuple_budget as u128 {
        return Err(OracleError::TupleBudgetExceeded(total, tuple_budget));
    }
    let v_max: usize = rs.iter().map(|&r| 1usize << r).sum();
    let mut p_pow = Vec::with_capacity(v_max + 1);
    p_pow.push(Rat::one());
    for i in 1..=v_max {
        p_pow.push(&p_pow[i - 1] * p);
    }
    let k = rs.len();
    let mut idx = vec![0usize; k];
    let mut tuple: Vec<CubePattern> = idx.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
    let mut acc = Rat::zero();
    loop {
        let v = union_cardinality(&tuple, UnionAlgorithm::InclusionExclusion)
            .expect("equal widths by construction");
        acc += &p_pow[v as usize];
        // odometer
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(acc);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < lists[pos].len() {
                tuple[pos] = lists[pos][idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = lists[pos][0];
        }
    }
}

/// Deterministic Monte-Carlo estimate of `E[X_r^k]` at `p = 1/2`.
#[derive(Clone, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
    pub seed: u64,
    /// RNG construction, recorded for reproducibility.
    pub algorithm: &'static str,
}

pub const MC_ALGORITHM: &str = "chacha8(seed_from splitmix64(seed, sample_index))";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sample mean and standard error of `X_r(S)^k` over uniform random subsets.
/// Each sample uses its own counter-derived ChaCha8 stream, so the result
/// depends only on `(seed, samples)`, not on evaluation order.
pub fn mc_estimate(
    n: u32,
    r: u32,
    k: u32,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, OracleError> {
    if n > MAX_SUBSET_N {
        return Err(OracleError::NOutOfRange(n, MAX_SUBSET_N));
    }
    if r > n {
        return Err(OracleError::ROutOfRange(r, n));
    }
    assert!(samples >= 2, "need at least two samples for a standard error");
    let mut sum = BigUint::zero();
    let mut sum_sq = BigUint::zero();
    let mut subset = SubsetBitmap::empty(n)?;
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(i)));
        for w in &mut subset.words {
            *w = rng.next_u64();
        }
        subset.mask_tail();
        let x = BigUint::from(count_bitparallel(&subset, r));
        let xk = x.pow(k);
        sum_sq += &xk * &xk;
        sum += xk;
    }
    let s = Rat::new(BigInt::from(sum), BigInt::from(samples));
    let mean = rat_to_f64(&s);
    let ssq = Rat::new(BigInt::from(sum_sq), BigInt::from(samples));
    let var = (rat_to_f64(&ssq) - mean * mean) * samples as f64 / (samples - 1) as f64;
    let std_err = (var.max(0.0) / samples as f64).sqrt();
    Ok(McEstimate {
        mean,
        std_err,
        samples,
        seed,
        algorithm: MC_ALGORITHM,
    })
}
