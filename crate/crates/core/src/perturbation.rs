//! Comparing witness sets of two orderings that differ by a bounded amount.
//!
//! If `f(u) = pi(u) ^ sigma(u)` is at most `f*` on `[2^n]`, every triple of
//! `A_n^sigma` lies in `A_n^pi(v)` for some `v` with `pi(v) <= 4 f*`, so
//! `#A_n^sigma <= (4 f* + 1) #A_n^pi`. With `f(u) = |pi(u) - sigma(u)|` the
//! same holds for the sum-based sets with `|v| <= 4 f*` and factor
//! `8 f* + 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{a_counts_for_targets, a_hat_counts_for_offsets, six_pow};
use crate::orderings::{abs_deviation, xor_deviation, DeviationFlavor, LinearMatrix, Ordering};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub flavor: DeviationFlavor,
    pub n: u32,
    /// Maximum deviation on `[2^n]`.
    pub f_star: u64,
    /// `4 f* + 1` for the xor flavor, `8 f* + 1` for the abs flavor.
    pub factor: u64,
    pub sigma_count: u64,
    pub pi_count: u64,
    /// Offsets `v` admitted by the inclusion.
    pub offsets: Vec<i64>,
    /// Sum of the shifted `pi` counts over the admitted offsets.
    pub union_count: u64,
    pub triples_checked: u64,
    pub inclusion_violations: u64,
    pub first_violation: Option<[u64; 3]>,
    pub inclusion_holds: bool,
    /// `factor * pi_count`
    pub bound: u64,
    pub cardinality_holds: bool,
    /// `bound / sigma_count`; absent when `sigma_count = 0`.
    pub slack: Option<f64>,
    /// Membership agrees on every triple.
    pub sets_equal: bool,
}

impl PerturbationReport {
    pub fn holds(&self) -> bool {
        self.inclusion_holds && self.cardinality_holds
    }
}

fn same_domain(n: u32, sigma: &Ordering, pi: &Ordering) -> Result<()> {
    if sigma.n() != pi.n() {
        return Err(Error::MismatchedExponent { left: sigma.n(), right: pi.n() });
    }
    if sigma.n() != n {
        return Err(Error::MismatchedExponent { left: n, right: sigma.n() });
    }
    Ok(())
}

#[derive(Default)]
struct Sweep {
    sigma_count: u64,
    pi_count: u64,
    checked: u64,
    violations: u64,
    first_violation: Option<[u64; 3]>,
    disagreements: u64,
}

impl Sweep {
    fn merge(mut self, other: Sweep) -> Sweep {
        self.sigma_count += other.sigma_count;
        self.pi_count += other.pi_count;
        self.checked += other.checked;
        self.violations += other.violations;
        self.first_violation = self.first_violation.or(other.first_violation);
        self.disagreements += other.disagreements;
        self
    }
}

fn finish(
    flavor: DeviationFlavor,
    n: u32,
    f_star: u64,
    factor: u64,
    offsets: Vec<i64>,
    union_count: u64,
    sweep: Sweep,
) -> PerturbationReport {
    let bound = factor * sweep.pi_count;
    PerturbationReport {
        flavor,
        n,
        f_star,
        factor,
        sigma_count: sweep.sigma_count,
        pi_count: sweep.pi_count,
        offsets,
        union_count,
        triples_checked: sweep.checked,
        inclusion_violations: sweep.violations,
        first_violation: sweep.first_violation,
        inclusion_holds: sweep.violations == 0,
        bound,
        cardinality_holds: sweep.sigma_count <= bound,
        slack: (sweep.sigma_count > 0).then(|| bound as f64 / sweep.sigma_count as f64),
        sets_equal: sweep.disagreements == 0,
    }
}

/// Xor flavor: checks every triple of `A_n^sigma` against the admitted
/// offsets of `pi`, then the cardinality bound.
pub fn verify_perturbation_a(n: u32, sigma: &Ordering, pi: &Ordering) -> Result<PerturbationReport> {
    same_domain(n, sigma, pi)?;
    let f_star = xor_deviation(pi, sigma)?.max;
    let limit = 4 * f_star;
    let s = sigma.images();
    let p = pi.images();
    let size = 1u64 << n;
    let sweep = (0..size)
        .into_par_iter()
        .map(|x| {
            let mut acc = Sweep::default();
            for y in 0..size {
                let sum = x + y;
                for z in (sum + 1).saturating_sub(size)..size.min(sum + 1) {
                    let j = (sum - z) as usize;
                    let (x, y, zu) = (x as usize, y as usize, z as usize);
                    let in_sigma = s[x] ^ s[y] ^ s[zu] == s[j];
                    let pi_value = p[x] ^ p[y] ^ p[zu] ^ p[j];
                    acc.checked += 1;
                    acc.sigma_count += in_sigma as u64;
                    acc.pi_count += (pi_value == 0) as u64;
                    acc.disagreements += (in_sigma != (pi_value == 0)) as u64;
                    // the triple sits in A^pi(v) with pi(v) = pi_value
                    if in_sigma && pi_value as u64 > limit {
                        acc.violations += 1;
                        acc.first_violation.get_or_insert([x as u64, y as u64, z]);
                    }
                }
            }
            acc
        })
        .reduce(Sweep::default, Sweep::merge);

    let targets: Vec<u32> = (0..size as u32).filter(|&t| t as u64 <= limit).collect();
    let union_count = a_counts_for_targets(p, n, &targets).iter().sum();
    let offsets = p
        .iter()
        .enumerate()
        .filter(|&(_, &value)| value as u64 <= limit)
        .map(|(v, _)| v as i64)
        .collect();
    Ok(finish(DeviationFlavor::Xor, n, f_star, limit + 1, offsets, union_count, sweep))
}

/// Abs flavor for the sets `s(x)+s(y)-s(z)+v = s(x^y^z)`.
pub fn verify_perturbation_a_hat(n: u32, sigma: &Ordering, pi: &Ordering) -> Result<PerturbationReport> {
    same_domain(n, sigma, pi)?;
    let f_star = abs_deviation(pi, sigma)?.max;
    let limit = 4 * f_star as i64;
    let s = sigma.images();
    let p = pi.images();
    let size = 1usize << n;
    let sweep = (0..size)
        .into_par_iter()
        .map(|x| {
            let mut acc = Sweep::default();
            for y in 0..size {
                for z in 0..size {
                    let w = x ^ y ^ z;
                    let in_sigma = s[x] as i64 + s[y] as i64 - s[z] as i64 == s[w] as i64;
                    let v = p[w] as i64 - p[x] as i64 - p[y] as i64 + p[z] as i64;
                    acc.checked += 1;
                    acc.sigma_count += in_sigma as u64;
                    acc.pi_count += (v == 0) as u64;
                    acc.disagreements += (in_sigma != (v == 0)) as u64;
                    if in_sigma && v.abs() > limit {
                        acc.violations += 1;
                        acc.first_violation.get_or_insert([x as u64, y as u64, z as u64]);
                    }
                }
            }
            acc
        })
        .reduce(Sweep::default, Sweep::merge);

    let offsets: Vec<i64> = (-limit..=limit).collect();
    let union_count = a_hat_counts_for_offsets(p, n, &offsets).iter().sum();
    Ok(finish(DeviationFlavor::Abs, n, f_star, 2 * limit as u64 + 1, offsets, union_count, sweep))
}

/// Pointwise checks behind both inclusions, over every triple in `[2^n]^3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub n: u32,
    pub triples_checked: u64,
    /// Triples where the xor of the two chains differs from the chain of `f`.
    pub xor_identity_failures: u64,
    /// Triples where the sum-chain difference exceeds the sum of `|f|`.
    pub abs_inequality_failures: u64,
}

impl PointwiseReport {
    pub fn holds(&self) -> bool {
        self.xor_identity_failures == 0 && self.abs_inequality_failures == 0
    }
}

pub fn check_pointwise(n: u32, sigma: &Ordering, pi: &Ordering) -> Result<PointwiseReport> {
    same_domain(n, sigma, pi)?;
    let xor_f = xor_deviation(pi, sigma)?.values;
    let abs_f = abs_deviation(pi, sigma)?.values;
    let s = sigma.images();
    let p = pi.images();
    let size = 1usize << n;
    let (checked, xor_fail, abs_fail) = (0..size)
        .into_par_iter()
        .map(|x| {
            let mut out = (0u64, 0u64, 0u64);
            for y in 0..size {
                for z in 0..size {
                    out.0 += 1;
                    if let Some(j) = (x + y).checked_sub(z).filter(|&j| j < size) {
                        let lhs = s[x] ^ s[y] ^ s[z] ^ s[j] ^ p[x] ^ p[y] ^ p[z] ^ p[j];
                        let rhs = xor_f[x] ^ xor_f[y] ^ xor_f[z] ^ xor_f[j];
                        out.1 += (lhs as u64 != rhs) as u64;
                    }
                    let w = x ^ y ^ z;
                    let chain = |o: &[u32]| o[w] as i64 - o[x] as i64 - o[y] as i64 + o[z] as i64;
                    let lhs = (chain(s) - chain(p)).unsigned_abs();
                    let rhs = abs_f[w] + abs_f[x] + abs_f[y] + abs_f[z];
                    out.2 += (lhs > rhs) as u64;
                }
            }
            out
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(PointwiseReport { n, triples_checked: checked, xor_identity_failures: xor_fail, abs_inequality_failures: abs_fail })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetExampleReport {
    pub n: u32,
    pub bit_set: Vec<u32>,
    pub m: u32,
    pub seed: u64,
    /// Bit permutation moving `bit_set` to the low coordinates.
    pub companion_sources: Vec<u32>,
    pub companion_linear: bool,
    pub count_sigma: u64,
    /// `#A` of the companion composed after the scramble.
    pub count_composed: u64,
    pub count_companion: u64,
    /// `count_composed = count_sigma`
    pub invariance_holds: bool,
    /// Xor deviation of the composition from the companion.
    pub f_star: u64,
    pub f_star_below_2m: bool,
    pub perturbation: PerturbationReport,
    /// `4 * 2^m * 6^n`
    pub chained_bound: u64,
    pub bound_holds: bool,
    pub ratio8: f64,
    /// `4 * 2^m * (6/8)^n`
    pub ratio8_bound: f64,
    /// `m / n`; absent for `n = 0`.
    pub density: Option<f64>,
    /// Density below `2 - log2(3)`, the regime where the bound decays.
    pub below_threshold: Option<bool>,
}

impl SubsetExampleReport {
    pub fn holds(&self) -> bool {
        self.companion_linear && self.invariance_holds && self.f_star_below_2m && self.bound_holds && self.perturbation.holds()
    }
}

pub const DENSITY_THRESHOLD: f64 = 0.415_037_499_278_843_8;

/// Scramble the bits in `bit_set` and check the chained bound
/// `#A_n^sigma <= 4 * 2^m * 6^n`.
pub fn verify_subset_example(n: u32, bit_set: &[u32], seed: u64) -> Result<SubsetExampleReport> {
    let mut bits = bit_set.to_vec();
    bits.sort_unstable();
    bits.dedup();
    if let Some(&bit) = bits.iter().find(|&&b| b >= n) {
        return Err(Error::BitOutOfRange { bit, n });
    }
    let m = bits.len() as u32;
    let sigma = Ordering::subset_scramble(&bits, n, seed)?;
    let mut sources = bits.clone();
    sources.extend((0..n).filter(|b| !bits.contains(b)));
    let companion = Ordering::from_matrix(LinearMatrix::bit_permutation(&sources)?)?;
    let composed = Ordering::compose(&companion, &sigma)?;

    let perturbation = verify_perturbation_a(n, &composed, &companion)?;
    let count_sigma = crate::combinatorics::count_a(n, &sigma, 0)?.count;
    let count_composed = perturbation.sigma_count;
    let count_companion = perturbation.pi_count;
    let chained_bound = 4 * (1u64 << m) * six_pow(n);
    let ratio8 = count_sigma as f64 / 8f64.powi(n as i32);
    let density = (n > 0).then(|| m as f64 / n as f64);
    Ok(SubsetExampleReport {
        n,
        bit_set: bits,
        m,
        seed,
        companion_sources: sources,
        companion_linear: companion.is_dyadically_linear().linear,
        count_sigma,
        count_composed,
        count_companion,
        invariance_holds: count_composed == count_sigma,
        f_star: perturbation.f_star,
        f_star_below_2m: perturbation.f_star < 1 << m,
        perturbation,
        chained_bound,
        bound_holds: count_sigma <= chained_bound,
        ratio8,
        ratio8_bound: 4.0 * (1u64 << m) as f64 * 0.75f64.powi(n as i32),
        density,
        below_threshold: density.map(|d| d < DENSITY_THRESHOLD),
    })
}
