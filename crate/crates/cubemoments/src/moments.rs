//! Symbolic mixed, pure, and central moments of subcube counts, assembled
//! as exact bivariate polynomials in `(n, 2^n)`.
//!
//! The mixed-moment engine sums, over the number `a` of active columns,
//! `binom(n, a)` times a weighted count of kernel matrices: each kernel and
//! each set partition of its rows (roommates sharing a tail) contributes the
//! ordered-tail count `(q/2^a)(q/2^a - 1)...` times `p^v`, where `v` is the
//! total vertex count of the per-block unions.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cubes::{
    enumerate_kernels, enumerate_set_partitions, subset_union_table, KernelMode,
};
use crate::exactalg::{binom_poly, factorial, falling_factorial_poly, pow2, rat, BiPoly, Rat};

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("invalid moment spec: {0}")]
    InvalidSpec(String),
    #[error("kernel budget exhausted after {kernels} kernels (limit {limit})")]
    KernelBudgetExceeded { kernels: u64, limit: u64 },
    #[error("time budget exhausted after {elapsed:.1}s (limit {limit:.1}s)")]
    TimeBudgetExceeded { elapsed: f64, limit: f64 },
}

impl MomentError {
    /// Distinguishes resource aborts from genuine input errors.
    pub fn is_resource_abort(&self) -> bool {
        matches!(
            self,
            MomentError::KernelBudgetExceeded { .. } | MomentError::TimeBudgetExceeded { .. }
        )
    }
}

/// Which mixed moment to compute: the dimension list `[r_1, ..., r_k]` and
/// the per-point inclusion probability `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSpec {
    rs: Vec<u32>,
    p: Rat,
}

impl MomentSpec {
    pub fn new(rs: Vec<u32>, p: Rat) -> Result<Self, MomentError> {
        if rs.is_empty() {
            return Err(MomentError::InvalidSpec("empty dimension list".into()));
        }
        if p <= Rat::zero() || p >= Rat::one() {
            return Err(MomentError::InvalidSpec(format!(
                "p must lie strictly between 0 and 1, got {p}"
            )));
        }
        Ok(MomentSpec { rs, p })
    }

    pub fn uniform(rs: Vec<u32>) -> Result<Self, MomentError> {
        MomentSpec::new(rs, rat(1, 2))
    }

    pub fn rs(&self) -> &[u32] {
        &self.rs
    }

    pub fn p(&self) -> &Rat {
        &self.p
    }
}

/// Resource limits for the kernel engine. The defaults are generous enough
/// for every dimension list with `sum(r_i) <= 9`, `k <= 4` other than
/// `[3,3,3,3]`, and for `[1]*k` up to `k = 6`.
#[derive(Clone, Debug)]
pub struct Budget {
    pub max_kernels: u64,
    pub max_seconds: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_kernels: 50_000_000,
            max_seconds: 1800.0,
        }
    }
}

/// `E[X_{r_1} ... X_{r_k}]` with the default orbit pipeline and budget.
pub fn mixed_moment(spec: &MomentSpec) -> Result<BiPoly, MomentError> {
    mixed_moment_with(spec, KernelMode::Orbits, &Budget::default())
}

pub fn mixed_moment_with(
    spec: &MomentSpec,
    mode: KernelMode,
    budget: &Budget,
) -> Result<BiPoly, MomentError> {
    mixed_moment_threaded(spec, mode, budget, 1)
}

/// Same computation with the independent `a`-contributions spread over
/// `threads` workers. The reduction is an exact ordered sum, so the output
/// is identical for every thread count.
pub fn mixed_moment_threaded(
    spec: &MomentSpec,
    mode: KernelMode,
    budget: &Budget,
    threads: usize,
) -> Result<BiPoly, MomentError> {
    let rs = spec.rs();
    let k = rs.len();
    let max_r = *rs.iter().max().unwrap();
    let sum_r: u32 = rs.iter().sum();
    let start = Instant::now();

    let partitions = enumerate_set_partitions(k);
    let part_data: Vec<(usize, Vec<usize>)> = partitions
        .iter()
        .map(|p| (p.block_count(), p.block_masks()))
        .collect();
    // powers of p up to the largest possible union size
    let v_max: usize = rs.iter().map(|&r| 1usize << r).sum();
    let p_pow: Vec<Rat> = {
        let mut v = Vec::with_capacity(v_max + 1);
        v.push(Rat::one());
        for i in 1..=v_max {
            v.push(&v[i - 1] * spec.p());
        }
        v
    };

    let a_values: Vec<u32> = (max_r..=sum_r).collect();
    let results: Vec<Result<BiPoly, MomentError>> = if threads <= 1 || a_values.len() <= 1 {
        let mut kernel_count = 0u64;
        a_values
            .iter()
            .map(|&a| {
                a_contribution(
                    rs, a, mode, budget, &part_data, &p_pow, start, &mut kernel_count,
                )
            })
            .collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<BiPoly, MomentError>>>> =
            a_values.iter().map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..threads.min(a_values.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= a_values.len() {
                        break;
                    }
                    // per-worker kernel counter; the budget bounds each worker
                    let mut kernel_count = 0u64;
                    let res = a_contribution(
                        rs,
                        a_values[i],
                        mode,
                        budget,
                        &part_data,
                        &p_pow,
                        start,
                        &mut kernel_count,
                    );
                    *slots[i].lock().unwrap() = Some(res);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("worker finished"))
            .collect()
    };

    let mut total = BiPoly::zero();
    for r in results {
        total = total.add(&r?);
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn a_contribution(
    rs: &[u32],
    a: u32,
    mode: KernelMode,
    budget: &Budget,
    part_data: &[(usize, Vec<usize>)],
    p_pow: &[Rat],
    start: Instant,
    kernel_count: &mut u64,
) -> Result<BiPoly, MomentError> {
    let k = rs.len();
    // per block-count m, the accumulated sum of mult * p^v
    let mut by_m = vec![Rat::zero(); k + 1];
    for (kernel, mult) in enumerate_kernels(rs, a, mode) {
        *kernel_count += 1;
        if *kernel_count > budget.max_kernels {
            return Err(MomentError::KernelBudgetExceeded {
                kernels: *kernel_count,
                limit: budget.max_kernels,
            });
        }
        if *kernel_count % 4096 == 0 {
            let elapsed = start.elapsed().as_secs_f64();
            if elapsed > budget.max_seconds {
                return Err(MomentError::TimeBudgetExceeded {
                    elapsed,
                    limit: budget.max_seconds,
                });
            }
        }
        let unions = if a == 0 {
            Vec::new()
        } else {
            subset_union_table(kernel.rows())
        };
        let mult_rat = Rat::from_integer(big_from_u128(mult));
        for (m, masks) in part_data {
            let v: u64 = if a == 0 {
                *m as u64 // every width-0 block is a single point
            } else {
                masks.iter().map(|&mask| unions[mask]).sum()
            };
            by_m[*m] += &mult_rat * &p_pow[v as usize];
        }
    }
    let mut inner = BiPoly::zero();
    for (m, c) in by_m.iter().enumerate().skip(1) {
        if !c.is_zero() {
            inner = inner.add(&falling_factorial_poly(a, m as u32).scale(c));
        }
    }
    Ok(binom_poly(a).mul(&inner))
}

fn big_from_u128(x: u128) -> BigInt {
    BigInt::from(x)
}

/// Closed-form mean: `p^{2^r} * binom(n, r) * 2^{n-r}`.
pub fn mean_closed(r: u32, p: &Rat) -> BiPoly {
    let mut c = Rat::one();
    for _ in 0..(1u64 << r) {
        c *= p;
    }
    binom_poly(r)
        .mul(&BiPoly::var_q())
        .scale(&(c * pow2(-(r as i64))))
}

/// Thanatipanonda's closed form for `E[X_r^2]` at `p = 1/2`: the variance
/// sum plus the squared mean. Factorial quotients `n!/(n-2r+i)!` are read as
/// falling-factorial polynomials in `n`.
pub fn second_moment_closed(r: u32) -> BiPoly {
    assert!(r <= 16, "second_moment_closed supports r <= 16");
    let mean_sq = mean_closed(r, &rat(1, 2)).pow(2);
    // mean^2 already carries p^{2^{r+1}} = 2^{-2^{r+1}}
    variance_closed(r).add(&mean_sq)
}

/// Thanatipanonda's closed form for `Var(X_r)` at `p = 1/2`:
/// `sum_{i=0}^{r} n!2^{n-i}/(i!(r-i)!^2(n-2r+i)! 2^{2^{r+1}}) (2^{2^i}-1)`.
pub fn variance_closed(r: u32) -> BiPoly {
    assert!(r <= 16, "variance_closed supports r <= 16");
    let mut total = BiPoly::zero();
    for i in 0..=r {
        // n!/(n-2r+i)! as the falling factorial n(n-1)...(n-(2r-i)+1)
        let mut ff = BiPoly::one();
        for j in 0..(2 * r - i) {
            ff = ff.mul(&BiPoly::var_n().sub(&BiPoly::constant(rat(j as i64, 1))));
        }
        let mut coeff = Rat::new(BigInt::one(), factorial(i));
        let rf = factorial(r - i);
        coeff /= Rat::from_integer(&rf * &rf);
        coeff *= pow2(-(i as i64));
        coeff *= pow2(-(1i64 << (r + 1)));
        let weight = pow2(1i64 << i) - Rat::one();
        total = total.add(&ff.mul(&BiPoly::var_q()).scale(&(coeff * weight)));
    }
    total
}

/// `E[(X_r - mu_r)^k]` via binomial expansion over the pure moments.
pub fn central_moment(r: u32, k: u32, p: &Rat) -> Result<BiPoly, MomentError> {
    central_moment_with(r, k, p, KernelMode::Orbits, &Budget::default())
}

pub fn central_moment_with(
    r: u32,
    k: u32,
    p: &Rat,
    mode: KernelMode,
    budget: &Budget,
) -> Result<BiPoly, MomentError> {
    assert!(k >= 1);
    let mu = mean_closed(r, p);
    let mut total = BiPoly::zero();
    for j in 0..=k {
        let pure = if j == 0 {
            BiPoly::one()
        } else {
            mixed_moment_with(&MomentSpec::new(vec![r; j as usize], p.clone())?, mode, budget)?
        };
        let binom = Rat::from_integer(crate::exactalg::binomial(k as u64, j as u64));
        let mu_pow = mu.neg().pow(k - j);
        total = total.add(&pure.mul(&mu_pow).scale(&binom));
    }
    Ok(total)
}
