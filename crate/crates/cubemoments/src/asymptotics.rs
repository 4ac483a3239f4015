//! Cumulants from moments, scaled central-moment limits, dependency-graph
//! construction, and the normal-approximation ratio check.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cubes::CubePattern;
use crate::exactalg::{
    binomial, nth_root_approx, pow2, rat, sqrt_approx, BiPoly, Rat,
};
use crate::moments::{central_moment, variance_closed, MomentError};
use crate::oracle::all_subcubes;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("need moments m_1..m_{0} but only {1} were provided")]
    NotEnoughMoments(usize, usize),
    #[error("dependency graph for (n={0}, r={1}) has {2} vertices, over the {3} limit")]
    GraphTooLarge(u32, u32, u64, u64),
    #[error("variance vanishes at n = {0}; the ratio is undefined")]
    DegenerateVariance(u32),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// Cumulants `kappa_1..kappa_K` as exact polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantSeq {
    pub kappas: Vec<BiPoly>,
}

/// Cumulants from raw moments `m_1..m_K` via the finite recursion
/// `kappa_k = m_k - sum_{j=1}^{k-1} binom(k-1, j-1) kappa_j m_{k-j}`.
pub fn moments_to_cumulants(ms: &[BiPoly], big_k: usize) -> Result<CumulantSeq, AsymptoticsError> {
    if ms.len() < big_k {
        return Err(AsymptoticsError::NotEnoughMoments(big_k, ms.len()));
    }
    let mut kappas: Vec<BiPoly> = Vec::with_capacity(big_k);
    for k in 1..=big_k {
        let mut kappa = ms[k - 1].clone();
        for j in 1..k {
            let c = Rat::from_integer(binomial((k - 1) as u64, (j - 1) as u64));
            kappa = kappa.sub(&kappas[j - 1].mul(&ms[k - j - 1]).scale(&c));
        }
        kappas.push(kappa);
    }
    Ok(CumulantSeq { kappas })
}

/// Inverse recursion, reconstructing `m_1..m_K` from cumulants.
pub fn cumulants_to_moments(cs: &CumulantSeq) -> Vec<BiPoly> {
    let big_k = cs.kappas.len();
    let mut ms: Vec<BiPoly> = Vec::with_capacity(big_k);
    for k in 1..=big_k {
        let mut m = cs.kappas[k - 1].clone();
        for j in 1..k {
            let c = Rat::from_integer(binomial((k - 1) as u64, (j - 1) as u64));
            m = m.add(&cs.kappas[j - 1].mul(&ms[k - j - 1]).scale(&c));
        }
        ms.push(m);
    }
    ms
}

/// Limit of `E[(X_r - mu)^k] / Var^{k/2}` as `n -> infinity`, read off the
/// leading terms under the `(deg_q, deg_n)` dominance order. Equals 0 for
/// odd `k` and `(k-1)!!` for even `k` when the variable is asymptotically
/// normal.
pub fn scaled_limit(r: u32, k: u32) -> Result<Rat, AsymptoticsError> {
    let cm = central_moment(r, k, &rat(1, 2))?;
    if cm.is_zero() {
        return Ok(Rat::zero());
    }
    let (cq, cn, cc) = cm.leading_term().expect("nonzero");
    let (vq, vn, vc) = variance_closed(r).leading_term().expect("variance nonzero");
    // compare degrees of cm^2 against var^k to avoid fractional powers
    let lhs = (2 * cq, 2 * cn);
    let rhs = (k * vq, k * vn);
    if lhs < rhs {
        return Ok(Rat::zero());
    }
    assert!(lhs == rhs && k % 2 == 0, "central moment grows faster than sigma^k");
    let mut denom = Rat::one();
    for _ in 0..k / 2 {
        denom *= &vc;
    }
    Ok(cc / denom)
}

/// `(k-1)!!` for even `k`, 0 for odd `k`: the moments of N(0,1).
pub fn normal_moment(k: u32) -> Rat {
    if k % 2 == 1 {
        return Rat::zero();
    }
    let mut acc = BigInt::one();
    let mut i = k as i64 - 1;
    while i > 1 {
        acc *= BigInt::from(i);
        i -= 2;
    }
    Rat::from_integer(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRecord {
    pub k: u32,
    pub deg_q: u32,
    pub deg_n: u32,
    pub limit_num: String,
    pub limit_den: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub r: u32,
    pub records: Vec<DecayRecord>,
}

impl DecayReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

/// Verifies `kappa_k / sigma^k -> 0` for `3 <= k <= K` by comparing leading
/// degrees of the cumulants against `k/2` times those of the variance.
pub fn cumulant_decay_check(r: u32, big_k: u32) -> Result<DecayReport, AsymptoticsError> {
    assert!(big_k >= 3);
    let ms: Vec<BiPoly> = (1..=big_k)
        .map(|j| {
            crate::moments::mixed_moment(&crate::moments::MomentSpec::uniform(
                vec![r; j as usize],
            )?)
        })
        .collect::<Result<_, _>>()?;
    let cs = moments_to_cumulants(&ms, big_k as usize)?;
    let (vq, vn, _) = cs.kappas[1].leading_term().expect("variance nonzero");
    let mut records = Vec::new();
    for k in 3..=big_k {
        let kappa = &cs.kappas[(k - 1) as usize];
        let (dq, dn, _) = match kappa.leading_term() {
            Ok(t) => t,
            Err(_) => {
                records.push(DecayRecord {
                    k,
                    deg_q: 0,
                    deg_n: 0,
                    limit_num: "0".into(),
                    limit_den: "1".into(),
                    pass: true,
                });
                continue;
            }
        };
        let pass = (2 * dq, 2 * dn) < (k * vq, k * vn);
        let limit = scaled_limit(r, k)?;
        records.push(DecayRecord {
            k,
            deg_q: dq,
            deg_n: dn,
            limit_num: limit.numer().to_string(),
            limit_den: limit.denom().to_string(),
            pass,
        });
    }
    Ok(DecayReport { r, records })
}

/// Summary statistics of the dependency graph on all `r`-subcubes of
/// `{0,1}^n`, with an edge between intersecting cubes.
#[derive(Clone, Debug, Serialize)]
pub struct DepGraphStats {
    pub n: u32,
    pub r: u32,
    pub vertex_count: u64,
    pub max_degree: u64,
    pub is_regular: bool,
    /// sqrt of the exact variance at this n, to ~50 digits
    pub sigma: f64,
    /// uniform bound on the variables (indicator variables here)
    pub a_n: u64,
}

pub struct DepGraph {
    pub vertices: Vec<CubePattern>,
    pub adjacency: Vec<Vec<u32>>,
    pub stats: DepGraphStats,
}

pub const MAX_GRAPH_VERTICES: u64 = 100_000;

/// Build the dependency graph explicitly. Neighbors of a cube are generated
/// constructively: every star set, with fixed coordinates copied from the
/// base cube wherever both are fixed.
pub fn build_dep_graph(n: u32, r: u32) -> Result<DepGraph, AsymptoticsError> {
    let count = (binomial(n as u64, r as u64) * BigInt::from(1u64 << (n - r.min(n))))
        .try_into()
        .unwrap_or(u64::MAX);
    if count > MAX_GRAPH_VERTICES {
        return Err(AsymptoticsError::GraphTooLarge(
            n,
            r,
            count,
            MAX_GRAPH_VERTICES,
        ));
    }
    let vertices = all_subcubes(n, r);
    let index: std::collections::HashMap<CubePattern, u32> = vertices
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i as u32))
        .collect();
    // star sets of the neighbor candidates
    let star_sets: Vec<u64> = all_subcubes(n, r)
        .iter()
        .map(|p| p.stars())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    // Neighbors of C are generated constructively: any star set D', fixed
    // coordinates copied from C where both are fixed, free on D \ D'.
    let mut adjacency = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let mut nbrs = Vec::new();
        for &stars in &star_sets {
            let free = v.stars() & !stars; // fixed in C', starred in C
            let base = v.bits() & !stars;
            let mut sub = 0u64;
            loop {
                let c = CubePattern::new(n, stars, base | sub).expect("valid width");
                let j = index[&c];
                if j != i as u32 {
                    nbrs.push(j);
                }
                sub = sub.wrapping_sub(free) & free;
                if sub == 0 {
                    break;
                }
            }
        }
        adjacency.push(nbrs);
    }
    let degrees: Vec<u64> = adjacency.iter().map(|a| a.len() as u64).collect();
    let max_degree_raw = degrees.iter().copied().max().unwrap_or(0);
    let is_regular = degrees.iter().all(|&d| d == max_degree_raw);
    let variance = variance_closed(r).eval_at_n(n);
    let sigma = crate::exactalg::rat_to_f64(&sqrt_approx(&variance, 50));
    Ok(DepGraph {
        stats: DepGraphStats {
            n,
            r,
            vertex_count: vertices.len() as u64,
            max_degree: max_degree_raw.max(1), // M_n := 1 for an edgeless graph
            is_regular,
            sigma,
            a_n: 1,
        },
        vertices,
        adjacency,
    })
}

/// `2^r * binom(n, r)`, the printed upper bound on the dependency-graph degree.
pub fn degree_bound(n: u32, r: u32) -> BigInt {
    binomial(n as u64, r as u64) << r
}

#[derive(Clone, Debug, Serialize)]
pub struct JansonRatio {
    pub n: u32,
    pub r: u32,
    pub m: u32,
    /// exact vertex count N_n
    pub vertex_count: String,
    /// maximal degree used (exact when the graph fits in memory, else the bound)
    pub max_degree: String,
    pub max_degree_exact: bool,
    /// the ratio (N/M)^{1/m} * M * A / sigma, approximated to ~50 digits
    pub ratio: f64,
}

/// The normal-approximation ratio `(N_n/M_n)^{1/m} M_n A_n / sigma_n` with
/// `A_n = 1`. Roots and the square root are taken to 50 decimal digits.
pub fn janson_ratio(n: u32, r: u32, m: u32) -> Result<JansonRatio, AsymptoticsError> {
    assert!(m >= 1);
    let variance = variance_closed(r).eval_at_n(n);
    if variance.is_zero() || variance.is_negative() {
        return Err(AsymptoticsError::DegenerateVariance(n));
    }
    let n_n = binomial(n as u64, r as u64) * (BigInt::one() << (n - r) as usize);
    let (m_n, exact) = match build_dep_graph(n, r) {
        Ok(g) => (BigInt::from(g.stats.max_degree), true),
        Err(AsymptoticsError::GraphTooLarge(..)) => (degree_bound(n, r).max(BigInt::one()), false),
        Err(e) => return Err(e),
    };
    let ratio = janson_ratio_value(&n_n, &m_n, &variance, m);
    Ok(JansonRatio {
        n,
        r,
        m,
        vertex_count: n_n.to_string(),
        max_degree: m_n.to_string(),
        max_degree_exact: exact,
        ratio: crate::exactalg::rat_to_f64(&ratio),
    })
}

/// Rational approximation (about 50 digits) of the ratio.
pub fn janson_ratio_rat(n: u32, r: u32, m: u32) -> Result<Rat, AsymptoticsError> {
    let variance = variance_closed(r).eval_at_n(n);
    if variance.is_zero() || variance.is_negative() {
        return Err(AsymptoticsError::DegenerateVariance(n));
    }
    let n_n = binomial(n as u64, r as u64) * (BigInt::one() << (n - r) as usize);
    let (m_n, _) = match build_dep_graph(n, r) {
        Ok(g) => (BigInt::from(g.stats.max_degree), true),
        Err(AsymptoticsError::GraphTooLarge(..)) => (degree_bound(n, r).max(BigInt::one()), false),
        Err(e) => return Err(e),
    };
    Ok(janson_ratio_value(&n_n, &m_n, &variance, m))
}

fn janson_ratio_value(n_n: &BigInt, m_n: &BigInt, variance: &Rat, m: u32) -> Rat {
    const DIGITS: u32 = 50;
    let root = nth_root_approx(&Rat::new(n_n.clone(), m_n.clone()), m, DIGITS);
    let sigma = sqrt_approx(variance, DIGITS);
    root * Rat::from_integer(m_n.clone()) / sigma
}

/// Closed form `2 * 2^{-n/6}` for the `r = 0`, `m = 3` ratio, to ~50 digits.
pub fn ratio_r0_closed_form(n: u32) -> Rat {
    const DIGITS: u32 = 50;
    let base = pow2(-(n as i64)); // 2^{-n}
    rat(2, 1) * nth_root_approx(&base, 6, DIGITS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use crate::moments::{mixed_moment, MomentSpec};

    fn pure_moments(r: u32, up_to: u32) -> Vec<BiPoly> {
        (1..=up_to)
            .map(|j| mixed_moment(&MomentSpec::uniform(vec![r; j as usize]).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn cumulant_identities() {
        let ms = pure_moments(1, 3);
        let cs = moments_to_cumulants(&ms, 3).unwrap();
        assert_eq!(cs.kappas[0], ms[0]);
        assert_eq!(cs.kappas[1], ms[1].sub(&ms[0].pow(2)));
        // kappa_3 = m_3 - 3 m_1 m_2 + 2 m_1^3
        let expect = ms[2]
            .sub(&ms[0].mul(&ms[1]).scale(&rat(3, 1)))
            .add(&ms[0].pow(3).scale(&rat(2, 1)));
        assert_eq!(cs.kappas[2], expect);
        // kappa_2 equals the closed-form variance
        assert_eq!(cs.kappas[1], variance_closed(1));
    }

    #[test]
    fn cumulants_round_trip() {
        for r in 0..=2u32 {
            let ms = pure_moments(r, 4);
            let cs = moments_to_cumulants(&ms, 4).unwrap();
            assert_eq!(cumulants_to_moments(&cs), ms);
        }
        assert!(moments_to_cumulants(&pure_moments(1, 2), 3).is_err());
    }

    #[test]
    fn kappa3_equals_third_central_moment() {
        for r in 0..=2u32 {
            let ms = pure_moments(r, 3);
            let cs = moments_to_cumulants(&ms, 3).unwrap();
            let c3 = central_moment(r, 3, &rat(1, 2)).unwrap();
            assert_eq!(cs.kappas[2], c3, "r={r}");
        }
    }

    #[test]
    fn scaled_limits_match_normal_moments() {
        assert_eq!(scaled_limit(1, 3).unwrap(), rat(0, 1));
        assert_eq!(scaled_limit(1, 4).unwrap(), rat(3, 1));
        assert_eq!(scaled_limit(0, 4).unwrap(), rat(3, 1));
        assert_eq!(scaled_limit(0, 6).unwrap(), rat(15, 1));
        assert_eq!(normal_moment(6), rat(15, 1));
        assert_eq!(normal_moment(5), rat(0, 1));
    }

    #[test]
    fn decay_check_passes() {
        for (r, big_k) in [(0u32, 4u32), (1, 3), (2, 4)] {
            let report = cumulant_decay_check(r, big_k).unwrap();
            assert!(report.all_pass(), "r={r}, K={big_k}: {report:?}");
        }
    }

    #[test]
    fn dep_graph_small_cases() {
        let g = build_dep_graph(2, 1).unwrap();
        assert_eq!(g.stats.vertex_count, 4);
        assert!(g.stats.is_regular);
        assert_eq!(g.stats.max_degree, 2);

        let g = build_dep_graph(3, 1).unwrap();
        assert_eq!(g.stats.vertex_count, 12);
        assert!(g.stats.is_regular);
        assert_eq!(g.stats.max_degree, 4);
        assert!(BigInt::from(g.stats.max_degree) <= degree_bound(3, 1));

        // r = 0: distinct points are disjoint, M_n := 1
        let g = build_dep_graph(4, 0).unwrap();
        assert_eq!(g.stats.max_degree, 1);
        assert!(g.adjacency.iter().all(|a| a.is_empty()));
    }

    #[test]
    fn dep_graph_regular_with_bounded_degree() {
        for n in 2..=6u32 {
            for r in 0..=n.min(3) {
                let g = build_dep_graph(n, r).unwrap();
                assert!(g.stats.is_regular, "n={n}, r={r}");
                if !g.adjacency.is_empty() && !g.adjacency[0].is_empty() {
                    assert!(
                        BigInt::from(g.stats.max_degree) <= degree_bound(n, r),
                        "n={n}, r={r}"
                    );
                }
            }
        }
    }

    #[test]
    fn janson_ratio_r0() {
        // closed form 2 * 2^{-n/6}; equals 1 at n = 6
        let v = janson_ratio_rat(6, 0, 3).unwrap();
        let err = (v.clone() - rat(1, 1)).abs();
        assert!(err < rat(1, 10_000_000_000i64), "value {}", v);
        // strictly decreasing over 6..=30
        let mut prev: Option<Rat> = None;
        for n in 6..=30u32 {
            let v = janson_ratio_rat(n, 0, 3).unwrap();
            let closed = ratio_r0_closed_form(n);
            assert!((v.clone() - closed).abs() < rat(1, 10_000_000_000i64));
            if let Some(p) = prev {
                assert!(v < p, "not decreasing at n={n}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn janson_ratio_r1_decreasing_below_one() {
        let mut prev: Option<Rat> = None;
        for n in 4..=24u32 {
            let v = janson_ratio_rat(n, 1, 3).unwrap();
            if let Some(p) = prev {
                assert!(v < p, "not decreasing at n={n}");
            }
            prev = Some(v.clone());
            if n == 24 {
                assert!(v < rat(1, 1), "ratio at n=24 is {}", v);
            }
        }
    }

    #[test]
    fn degenerate_variance_is_an_error() {
        // r = 2, n = 1: no squares at all
        assert!(matches!(
            janson_ratio(1, 2, 3),
            Err(AsymptoticsError::DegenerateVariance(1))
        ));
    }
}
