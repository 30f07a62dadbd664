//! Walsh, trigonometric and key-function evaluation, and grid L_p norms.
//!
//! Walsh functions use the right-continuous convention at dyadic rationals,
//! so `w_k` is constant on every half-open dyadic cell of length `2^-T` once
//! `k < 2^T`. The t-integral of anything built from such functions is
//! therefore a finite sum over cells. In s, an equispaced rule with `M`
//! points integrates `e_a` exactly unless `M` divides `a != 0`; for even `p`
//! the integrand `|F|^p` is a trigonometric polynomial of degree at most
//! `(p/2) * max_index`, so `M > p * max_index` is exact with headroom.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::Index;
use crate::orderings::Ordering;
use crate::{Error, Result};

/// s-points per reduction chunk. The chunk partition is fixed, so sums do
/// not depend on the number of worker threads.
const S_CHUNK: usize = 32;

/// Rademacher function `r_i(t) = (-1)^{t_i}`, `t_i` the `i`-th binary digit
/// after the point (`t_0` is the halves digit).
pub fn rademacher(i: u32, t: f64) -> Result<i8> {
    check_point(t)?;
    Ok(if binary_digit(t, i) == 1 { -1 } else { 1 })
}

/// `w_k(t) = prod_i r_i(t)^{k_i}`.
pub fn walsh_eval(k: Index, t: f64) -> Result<i8> {
    check_point(t)?;
    let k = k.value();
    let mut sign = 0u32;
    let mut rest = k;
    let mut i = 0u32;
    while rest != 0 {
        if rest & 1 == 1 {
            sign ^= binary_digit(t, i);
        }
        rest >>= 1;
        i += 1;
    }
    Ok(if sign == 1 { -1 } else { 1 })
}

/// Walsh function `w_k` on dyadic cell `cell` of `2^bits` cells.
#[inline]
pub fn walsh_on_cell(k: u64, cell: u64, bits: u32) -> i8 {
    let digits = crate::dyadic::reverse_bits(cell, bits);
    if (k & digits).count_ones() & 1 == 1 {
        -1
    } else {
        1
    }
}

/// `e_k(s) = exp(2 pi i k s)`.
pub fn trig_eval(k: i64, s: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (k as f64) * s)
}

fn check_point(t: f64) -> Result<()> {
    if (0.0..1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::PointOutOfRange(t))
    }
}

#[inline]
fn binary_digit(t: f64, i: u32) -> u32 {
    // scaling by a power of two is exact
    let scaled = t * 2f64.powi(i as i32 + 1);
    (scaled.floor() as u64 & 1) as u32
}

/// In-place Walsh-Hadamard transform in natural (Hadamard) order:
/// `out[y] = sum_w in[w] (-1)^{popcount(w & y)}`.
pub fn fwht(data: &mut [Complex64]) {
    let len = data.len();
    assert!(len.is_power_of_two() || len == 0, "fwht length must be a power of two");
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `F(s,t) = sum_{k < 2^n} e_k(s) w_{sigma(k)}(t)`
    Full,
    /// `sum_{2^n <= k < 2^{n+1}} e_k(s) w_{sigma(k)}(t)`
    Tail,
}

/// Data defining a key function.
#[derive(Clone, Debug)]
pub struct KeyFunctionSpec {
    n: u32,
    ordering: Ordering,
    variant: Variant,
}

impl KeyFunctionSpec {
    pub fn new(n: u32, ordering: Ordering, variant: Variant) -> Result<Self> {
        let need = match variant {
            Variant::Full => n,
            Variant::Tail => n + 1,
        };
        if ordering.n() < need {
            return Err(Error::DomainMismatch { have: ordering.n(), need });
        }
        Ok(KeyFunctionSpec { n, ordering, variant })
    }

    pub fn full(ordering: Ordering) -> Self {
        KeyFunctionSpec { n: ordering.n(), ordering, variant: Variant::Full }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Trigonometric indices summed by this variant.
    pub fn index_range(&self) -> std::ops::Range<u32> {
        let size = 1u32 << self.n;
        match self.variant {
            Variant::Full => 0..size,
            Variant::Tail => size..2 * size,
        }
    }

    pub fn term_count(&self) -> u64 {
        1 << self.n
    }

    pub fn max_index(&self) -> u64 {
        (self.index_range().end - 1) as u64
    }

    /// Number of binary digits of the largest Walsh index used.
    pub fn walsh_bits(&self) -> u32 {
        let max = self.index_range().map(|k| self.ordering.apply(k)).max().unwrap_or(0);
        Index::new(max as u64).map(Index::bit_len).unwrap_or(0)
    }

    /// Smallest dyadic t-grid on which every term is cell-wise constant.
    pub fn required_t_cells(&self) -> usize {
        1 << self.walsh_bits()
    }

    /// Default exact grid for an even exponent `p`: `p * 2^{n+1}` s-points
    /// and `2^{n+1}` t-cells (more if the Walsh indices need it).
    pub fn exact_grid(&self, p: u32) -> (usize, usize) {
        let s = (p as usize).max(1) << (self.n + 1);
        let t = (1usize << (self.n + 1)).max(self.required_t_cells());
        (s, t)
    }
}

pub fn key_function_eval(spec: &KeyFunctionSpec, s: f64, t: f64) -> Result<Complex64> {
    check_point(s)?;
    check_point(t)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in spec.index_range() {
        let w = walsh_eval(Index::new(spec.ordering.apply(k) as u64)?, t)?;
        sum += trig_eval(k as i64, s) * w as f64;
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Grid,
    Count,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub p: f64,
    pub value: f64,
    /// `value^p`, the integral itself, kept to avoid a root/power round trip.
    pub integral: f64,
    pub method: NormMethod,
    pub grid_s_points: Option<usize>,
    pub grid_t_cells: Option<usize>,
    pub exact: bool,
}

impl NormResult {
    /// L4 norm from the count identity `||F||_4^4 = #A`.
    pub fn from_count(count: u64) -> Self {
        let integral = count as f64;
        NormResult {
            p: 4.0,
            value: integral.powf(0.25),
            integral,
            method: NormMethod::Count,
            grid_s_points: None,
            grid_t_cells: None,
            exact: true,
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

fn is_even_integer(p: f64) -> bool {
    p.fract() == 0.0 && (p as u64) % 2 == 0
}

#[inline]
fn abs_pow(z: Complex64, p: f64) -> f64 {
    let sq = z.norm_sqr();
    if p == 2.0 {
        sq
    } else if p == 4.0 {
        sq * sq
    } else if is_even_integer(p) && p <= 64.0 {
        sq.powi((p / 2.0) as i32)
    } else {
        sq.sqrt().powf(p)
    }
}

/// `exp(2 pi i k a / m)` with the phase reduced modulo `m` first.
#[inline]
fn root_of_unity(k: u64, a: u64, m: u64) -> Complex64 {
    let r = ((k % m) * (a % m)) % m;
    Complex64::from_polar(1.0, TAU * r as f64 / m as f64)
}

/// Grid L_p norm of a key function over `[0,1)^2`.
///
/// s runs over `grid_s` equispaced points, t over `grid_t` dyadic cells
/// (a power of two at least [`KeyFunctionSpec::required_t_cells`]). For
/// each s the t-values come from one Walsh-Hadamard transform.
pub fn lp_norm_key(spec: &KeyFunctionSpec, p: f64, grid_s: usize, grid_t: usize) -> Result<NormResult> {
    check_exponent(p)?;
    if grid_s == 0 {
        return Err(Error::GridTooCoarse { axis: "s", have: 0, need: 1 });
    }
    if !grid_t.is_power_of_two() {
        return Err(Error::GridNotDyadic(grid_t));
    }
    let need_t = spec.required_t_cells();
    if grid_t < need_t {
        return Err(Error::GridTooCoarse { axis: "t", have: grid_t, need: need_t });
    }
    let exact = is_even_integer(p) && (grid_s as u128) > (p as u128) * spec.max_index() as u128;

    let range = spec.index_range();
    let images: Vec<(u64, usize)> = range.map(|k| (k as u64, spec.ordering.apply(k) as usize)).collect();
    let m = grid_s as u64;
    let chunk_sums: Vec<f64> = (0..grid_s.div_ceil(S_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut buf = vec![Complex64::new(0.0, 0.0); grid_t];
            let start = chunk * S_CHUNK;
            let end = (start + S_CHUNK).min(grid_s);
            let mut acc = 0.0;
            for a in start..end {
                buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for &(k, w) in &images {
                    buf[w] = root_of_unity(k, a as u64, m);
                }
                fwht(&mut buf);
                acc += buf.iter().map(|&z| abs_pow(z, p)).sum::<f64>();
            }
            acc
        })
        .collect();
    let integral = chunk_sums.iter().sum::<f64>() / (grid_s as f64 * grid_t as f64);
    Ok(NormResult {
        p,
        value: integral.powf(1.0 / p),
        integral,
        method: NormMethod::Grid,
        grid_s_points: Some(grid_s),
        grid_t_cells: Some(grid_t),
        exact,
    })
}

/// [`lp_norm_key`] on the default exact grid; `p` must be an even integer.
pub fn lp_norm_key_exact(spec: &KeyFunctionSpec, p: f64) -> Result<NormResult> {
    check_exponent(p)?;
    if !is_even_integer(p) {
        return Err(Error::NotExact(p));
    }
    let (s, t) = spec.exact_grid(p as u32);
    lp_norm_key(spec, p, s, t)
}

/// Largest `|F|` over the grid (s equispaced, t at cell representatives).
pub fn sup_norm_sample(spec: &KeyFunctionSpec, grid_s: usize, grid_t: usize) -> Result<f64> {
    if grid_s == 0 {
        return Err(Error::GridTooCoarse { axis: "s", have: 0, need: 1 });
    }
    if !grid_t.is_power_of_two() {
        return Err(Error::GridNotDyadic(grid_t));
    }
    let need_t = spec.required_t_cells();
    if grid_t < need_t {
        return Err(Error::GridTooCoarse { axis: "t", have: grid_t, need: need_t });
    }
    let m = grid_s as u64;
    let mut best = 0.0f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_t];
    for a in 0..grid_s {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for k in spec.index_range() {
            buf[spec.ordering.apply(k) as usize] = root_of_unity(k as u64, a as u64, m);
        }
        fwht(&mut buf);
        best = buf.iter().map(|z| z.norm()).fold(best, f64::max);
    }
    Ok(best)
}

/// `( int_0^1 |sum_{k<terms} e_k(s)|^p ds )^{1/p}` on `grid_s` equispaced
/// points; exact for even `p` once `grid_s > p * (terms - 1)`.
pub fn dirichlet_lp_norm(terms: u64, p: f64, grid_s: usize) -> Result<f64> {
    check_exponent(p)?;
    if terms == 0 {
        return Err(Error::GridTooCoarse { axis: "terms", have: 0, need: 1 });
    }
    if grid_s == 0 {
        return Err(Error::GridTooCoarse { axis: "s", have: 0, need: 1 });
    }
    let m = grid_s as u64;
    let chunk_sums: Vec<f64> = (0..grid_s.div_ceil(S_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * S_CHUNK;
            let end = (start + S_CHUNK).min(grid_s);
            (start..end)
                .map(|a| {
                    let d: Complex64 = (0..terms).map(|k| root_of_unity(k, a as u64, m)).sum();
                    abs_pow(d, p)
                })
                .sum::<f64>()
        })
        .collect();
    Ok((chunk_sums.iter().sum::<f64>() / grid_s as f64).powf(1.0 / p))
}

/// Default s-grid for the Dirichlet kernel: `p * terms` points, rounded up.
pub fn dirichlet_exact_grid(terms: u64, p: f64) -> usize {
    (p.ceil() as usize).max(1) * terms.max(1) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RpLowerBound {
    pub p: f64,
    pub dirichlet_norm: f64,
    pub key_norm: f64,
    /// `dirichlet_norm / key_norm`, a lower bound on the equivalence
    /// constant between the first `2^n` exponentials and the rearranged
    /// Walsh functions.
    pub bound: f64,
    pub exact: bool,
}

/// Constant-free lower bound `||D_N||_p / ||F||_p`, `N = 2^n` terms.
///
/// Testing the norm inequality on `xi_k = e_k(s)` and integrating over s
/// bounds the Dirichlet kernel norm by the constant times `||F||_p`; the
/// tail variant gives the same kernel up to a unimodular factor.
pub fn rp_lower_bound(spec: &KeyFunctionSpec, p: f64) -> Result<RpLowerBound> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let terms = spec.term_count();
    let (key, dirichlet) = if is_even_integer(p) {
        let key = lp_norm_key_exact(spec, p)?;
        let d = dirichlet_lp_norm(terms, p, dirichlet_exact_grid(terms, p))?;
        (key, d)
    } else {
        let (s, t) = spec.exact_grid(p.ceil() as u32 * 4);
        let key = lp_norm_key(spec, p, s, t)?;
        let d = dirichlet_lp_norm(terms, p, 4 * dirichlet_exact_grid(terms, p))?;
        (key, d)
    };
    Ok(RpLowerBound {
        p,
        dirichlet_norm: dirichlet,
        key_norm: key.value,
        bound: dirichlet / key.value,
        exact: key.exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orderings::NamedOrdering;

    fn idx(v: u64) -> Index {
        Index::new(v).unwrap()
    }

    #[test]
    fn walsh_examples() {
        for t in [0.0, 0.1, 0.5, 0.99] {
            assert_eq!(walsh_eval(idx(0), t).unwrap(), 1);
        }
        assert_eq!(walsh_eval(idx(1), 0.25).unwrap(), 1);
        assert_eq!(walsh_eval(idx(3), 0.25).unwrap(), -1);
        assert_eq!(walsh_eval(idx(1), 0.5).unwrap(), -1);
        assert_eq!(walsh_eval(idx(1), 1.0), Err(Error::PointOutOfRange(1.0)));
        assert_eq!(walsh_eval(idx(1), -0.1), Err(Error::PointOutOfRange(-0.1)));
    }

    #[test]
    fn walsh_is_product_of_rademachers() {
        for k in 0..64u64 {
            for cell in 0..64 {
                let t = (cell as f64 + 0.5) / 64.0;
                let product: i8 = (0..6).filter(|i| (k >> i) & 1 == 1).map(|i| rademacher(i, t).unwrap()).product();
                assert_eq!(walsh_eval(idx(k), t).unwrap(), product);
                assert_eq!(walsh_on_cell(k, cell, 6), product);
            }
        }
    }

    #[test]
    fn walsh_multiplicativity() {
        let bits = 8;
        for m in 0..256u64 {
            for n in 0..256u64 {
                for cell in 0..256 {
                    assert_eq!(
                        walsh_on_cell(m ^ n, cell, bits),
                        walsh_on_cell(m, cell, bits) * walsh_on_cell(n, cell, bits)
                    );
                }
            }
        }
        // left endpoints of cells agree with the cell value (right-continuity)
        for k in 0..256u64 {
            for cell in 0..256u64 {
                let t = cell as f64 / 256.0;
                assert_eq!(walsh_eval(idx(k), t).unwrap(), walsh_on_cell(k, cell, bits));
            }
        }
    }

    #[test]
    fn fwht_matches_definition() {
        let data: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64, (i * i % 5) as f64)).collect();
        let mut fast = data.clone();
        fwht(&mut fast);
        for (y, out) in fast.iter().enumerate() {
            let slow: Complex64 = data
                .iter()
                .enumerate()
                .map(|(w, &c)| if (w & y).count_ones() % 2 == 1 { -c } else { c })
                .sum();
            assert!((slow - out).norm() < 1e-12);
        }
    }

    #[test]
    fn key_function_examples() {
        for name in NamedOrdering::ALL {
            let spec = KeyFunctionSpec::full(Ordering::named(name, 3).unwrap());
            assert!((key_function_eval(&spec, 0.0, 0.0).unwrap() - Complex64::new(8.0, 0.0)).norm() < 1e-12);
            for a in 0..32 {
                for b in 0..32 {
                    let v = key_function_eval(&spec, a as f64 / 32.0, b as f64 / 32.0).unwrap();
                    assert!(v.norm() <= 8.0 + 1e-12);
                }
            }
        }
        let trivial = KeyFunctionSpec::full(Ordering::identity(0).unwrap());
        for (s, t) in [(0.0, 0.0), (0.3, 0.7), (0.9, 0.1)] {
            assert!((key_function_eval(&trivial, s, t).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        assert!(key_function_eval(&trivial, 1.5, 0.0).is_err());
    }

    #[test]
    fn grid_agrees_with_pointwise_evaluation() {
        let spec = KeyFunctionSpec::new(2, Ordering::named(NamedOrdering::Kaczmarz, 3).unwrap(), Variant::Tail).unwrap();
        let (gs, gt) = (16usize, 8usize);
        let mut direct = 0.0;
        for a in 0..gs {
            for c in 0..gt {
                let v = key_function_eval(&spec, a as f64 / gs as f64, c as f64 / gt as f64).unwrap();
                direct += v.norm_sqr().powi(2);
            }
        }
        direct /= (gs * gt) as f64;
        let grid = lp_norm_key(&spec, 4.0, gs, gt).unwrap();
        assert!((grid.integral - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn parseval_on_exact_grid() {
        for n in 0..=8 {
            for name in NamedOrdering::ALL {
                let spec = KeyFunctionSpec::full(Ordering::named(name, n).unwrap());
                let r = lp_norm_key_exact(&spec, 2.0).unwrap();
                assert!(r.exact);
                let expected = (1u64 << n) as f64;
                assert!((r.value * r.value - expected).abs() <= 1e-12 * expected, "{name} n={n}: {}", r.value);
            }
        }
    }

    #[test]
    fn identity_n1_fourth_power_is_six() {
        let spec = KeyFunctionSpec::full(Ordering::identity(1).unwrap());
        let r = lp_norm_key_exact(&spec, 4.0).unwrap();
        assert!((r.integral - 6.0).abs() < 1e-12);
        assert!((r.value - 6f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn grid_errors() {
        let spec = KeyFunctionSpec::full(Ordering::identity(3).unwrap());
        assert_eq!(lp_norm_key(&spec, 0.5, 64, 8), Err(Error::InvalidExponent(0.5)));
        assert_eq!(lp_norm_key(&spec, 4.0, 64, 4), Err(Error::GridTooCoarse { axis: "t", have: 4, need: 8 }));
        assert_eq!(lp_norm_key(&spec, 4.0, 64, 12), Err(Error::GridNotDyadic(12)));
        assert_eq!(lp_norm_key(&spec, 4.0, 0, 8), Err(Error::GridTooCoarse { axis: "s", have: 0, need: 1 }));
        assert_eq!(lp_norm_key_exact(&spec, 3.0), Err(Error::NotExact(3.0)));
        assert!(!lp_norm_key(&spec, 4.0, 28, 8).unwrap().exact);
        assert!(lp_norm_key(&spec, 4.0, 29, 8).unwrap().exact);
        assert!(!lp_norm_key(&spec, 3.0, 1000, 8).unwrap().exact);
        assert_eq!(
            KeyFunctionSpec::new(3, Ordering::identity(3).unwrap(), Variant::Tail).err(),
            Some(Error::DomainMismatch { have: 3, need: 4 })
        );
    }

    #[test]
    fn finer_t_grid_changes_nothing() {
        let spec = KeyFunctionSpec::full(Ordering::named(NamedOrdering::OriginalWalsh, 3).unwrap());
        let a = lp_norm_key(&spec, 4.0, 64, 8).unwrap();
        let b = lp_norm_key(&spec, 4.0, 64, 64).unwrap();
        assert!((a.integral - b.integral).abs() < 1e-10 * a.integral);
    }

    #[test]
    fn dirichlet_examples() {
        for n in 1..=64u64 {
            let d2 = dirichlet_lp_norm(n, 2.0, dirichlet_exact_grid(n, 2.0)).unwrap();
            assert!((d2 - (n as f64).sqrt()).abs() < 1e-10);
        }
        for p in [1.0, 2.0, 3.5, 4.0] {
            assert!((dirichlet_lp_norm(1, p, 7).unwrap() - 1.0).abs() < 1e-14);
        }
        // |1 + e(s)|^4 averages to 6
        let d = dirichlet_lp_norm(2, 4.0, 8).unwrap();
        assert!((d.powi(4) - 6.0).abs() < 1e-12);
        // fourth power counts k1 + k2 = l1 + l2 in [N]: (2N^3 + N) / 3
        for n in 1..=64u64 {
            let d = dirichlet_lp_norm(n, 4.0, dirichlet_exact_grid(n, 4.0)).unwrap();
            let expected = (2 * n * n * n + n) as f64 / 3.0;
            assert!((d.powi(4) - expected).abs() < 1e-9 * expected);
            // order n^{3/4}
            let scaled = d / (n as f64).powf(0.75);
            assert!(scaled > 0.5 && scaled < 1.5, "n={n}: {scaled}");
        }
    }

    #[test]
    fn rp_bound_examples() {
        for name in NamedOrdering::ALL {
            let spec = KeyFunctionSpec::full(Ordering::named(name, 3).unwrap());
            let b = rp_lower_bound(&spec, 2.0).unwrap();
            assert!((b.bound - 1.0).abs() < 1e-12);
        }
        let spec = KeyFunctionSpec::full(Ordering::identity(1).unwrap());
        let b = rp_lower_bound(&spec, 4.0).unwrap();
        let d = dirichlet_lp_norm(2, 4.0, 8).unwrap();
        assert!((b.bound - d / 6f64.powf(0.25)).abs() < 1e-12);
        assert!(rp_lower_bound(&spec, 1.0).is_err());
    }

    #[test]
    fn sup_norm_attained_at_origin() {
        for name in NamedOrdering::ALL {
            let spec = KeyFunctionSpec::full(Ordering::named(name, 4).unwrap());
            let sup = sup_norm_sample(&spec, 64, 32).unwrap();
            assert!((sup - 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn log_convexity_between_two_and_four() {
        // 1/3 = theta/2 + (1 - theta)/4  =>  theta = 1/3
        let theta = 1.0 / 3.0;
        for n in 0..=5 {
            for name in NamedOrdering::ALL {
                for variant in [Variant::Full, Variant::Tail] {
                    let spec = KeyFunctionSpec::new(n, Ordering::named(name, n + 1).unwrap(), variant).unwrap();
                    let (s, t) = spec.exact_grid(16);
                    let n2 = lp_norm_key(&spec, 2.0, s, t).unwrap().value;
                    let n3 = lp_norm_key(&spec, 3.0, s, t).unwrap().value;
                    let n4 = lp_norm_key(&spec, 4.0, s, t).unwrap().value;
                    let rhs = n2.powf(theta) * n4.powf(1.0 - theta);
                    assert!(n3 <= rhs * (1.0 + 1e-4), "{name} {variant:?} n={n}: {n3} > {rhs}");
                }
            }
        }
    }
}
