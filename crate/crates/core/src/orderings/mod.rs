//! Rearrangements of the Walsh system restricted to `[2^n]`.
//!
//! Every [`Ordering`] is materialized as a full image table at construction
//! and validated as a bijection of `[2^n]`; the structured representation
//! it came from is kept alongside in [`OrderingKind`].

mod matrix;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::reverse_bits;
use crate::{Error, Result};

pub use matrix::LinearMatrix;

/// Largest block exponent for which orderings are materialized.
pub const MAX_ORDERING_EXPONENT: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedOrdering {
    Identity,
    /// Walsh-Paley order, the identity rearrangement.
    Paley,
    /// Band matrix `t_{i,j} = 1` iff `j in {i, i+1}`.
    OriginalWalsh,
    /// Block-wise bit reversal, `2^k + m -> 2^k + rev_k(m)`.
    Kaczmarz,
    /// Bit reversal of all `n` digits.
    Kronecker,
}

impl NamedOrdering {
    pub const ALL: [NamedOrdering; 5] = [
        NamedOrdering::Identity,
        NamedOrdering::Paley,
        NamedOrdering::OriginalWalsh,
        NamedOrdering::Kaczmarz,
        NamedOrdering::Kronecker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedOrdering::Identity => "identity",
            NamedOrdering::Paley => "paley",
            NamedOrdering::OriginalWalsh => "walsh",
            NamedOrdering::Kaczmarz => "kaczmarz",
            NamedOrdering::Kronecker => "kronecker",
        }
    }

    /// True for the orderings that are GF(2)-linear on every `[2^n]`.
    pub fn is_linear(self) -> bool {
        !matches!(self, NamedOrdering::Kaczmarz)
    }
}

impl fmt::Display for NamedOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(NamedOrdering::Identity),
            "paley" => Ok(NamedOrdering::Paley),
            "walsh" | "original_walsh" => Ok(NamedOrdering::OriginalWalsh),
            "kaczmarz" => Ok(NamedOrdering::Kaczmarz),
            "kronecker" => Ok(NamedOrdering::Kronecker),
            other => Err(Error::UnknownOrdering(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderingKind {
    Named(NamedOrdering),
    Table,
    Linear(LinearMatrix),
    /// Block `k` acts on `2^k + [2^k]`.
    Piecewise(Vec<LinearMatrix>),
    Composite,
}

/// A bijection of `[2^n]`, `images[k] = sigma(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ordering {
    n: u32,
    kind: OrderingKind,
    images: Vec<u32>,
}

/// Outcome of [`Ordering::is_dyadically_linear`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LinearityCheck {
    pub linear: bool,
    /// A pair `(x, y)` with `sigma(x ^ y) != sigma(x) ^ sigma(y)`.
    pub witness: Option<(u64, u64)>,
}

fn check_exponent(n: u32) -> Result<()> {
    if n > MAX_ORDERING_EXPONENT {
        Err(Error::ExponentOutOfRange { n, max: MAX_ORDERING_EXPONENT })
    } else {
        Ok(())
    }
}

fn validate_bijection(images: &[u32]) -> Result<()> {
    let len = images.len();
    let mut seen = vec![false; len];
    for (position, &v) in images.iter().enumerate() {
        let slot = seen
            .get_mut(v as usize)
            .ok_or(Error::TableValueOutOfRange { value: v as u64, position, len })?;
        if *slot {
            return Err(Error::NotBijective { value: v as u64, position });
        }
        *slot = true;
    }
    Ok(())
}

impl Ordering {
    fn build(n: u32, kind: OrderingKind, images: Vec<u32>) -> Result<Self> {
        debug_assert_eq!(images.len(), 1usize << n);
        validate_bijection(&images)?;
        Ok(Ordering { n, kind, images })
    }

    pub fn identity(n: u32) -> Result<Self> {
        Ordering::named(NamedOrdering::Identity, n)
    }

    pub fn named(name: NamedOrdering, n: u32) -> Result<Self> {
        check_exponent(n)?;
        let size = 1u32 << n;
        let images: Vec<u32> = match name {
            NamedOrdering::Identity | NamedOrdering::Paley => (0..size).collect(),
            NamedOrdering::OriginalWalsh => (0..size).map(|x| x ^ (x >> 1)).collect(),
            NamedOrdering::Kaczmarz => (0..size).map(kaczmarz_image).collect(),
            NamedOrdering::Kronecker => (0..size).map(|x| reverse_bits(x as u64, n) as u32).collect(),
        };
        Ordering::build(n, OrderingKind::Named(name), images)
    }

    /// Parses a name (`identity`, `paley`, `walsh`/`original_walsh`,
    /// `kaczmarz`, `kronecker`) and builds it on `[2^n]`.
    pub fn make_named(name: &str, n: u32) -> Result<Self> {
        Ordering::named(name.parse()?, n)
    }

    pub fn from_matrix(m: LinearMatrix) -> Result<Self> {
        check_exponent(m.dim())?;
        if let Some(kernel) = m.kernel_vector() {
            return Err(Error::SingularMatrix { kernel: kernel as u64 });
        }
        let images = (0..1u32 << m.dim()).map(|x| m.apply(x)).collect();
        Ordering::build(m.dim(), OrderingKind::Linear(m), images)
    }

    pub fn from_table(images: &[u64], n: u32) -> Result<Self> {
        check_exponent(n)?;
        let expected = 1usize << n;
        if images.len() != expected {
            return Err(Error::TableLength { len: images.len(), expected });
        }
        let mut table = Vec::with_capacity(expected);
        for (position, &v) in images.iter().enumerate() {
            if v >= expected as u64 {
                return Err(Error::TableValueOutOfRange { value: v, position, len: expected });
            }
            table.push(v as u32);
        }
        Ordering::build(n, OrderingKind::Table, table)
    }

    /// Parses the permutation table file format: line `i` holds `sigma(i)`.
    pub fn parse_table(text: &str, n: u32) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() && i + 1 == text.lines().count() {
                continue;
            }
            let v = line.parse::<u64>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{line:?}: {e}"),
            })?;
            values.push(v);
        }
        Ordering::from_table(&values, n)
    }

    pub fn to_table_text(&self) -> String {
        let mut out = String::with_capacity(self.images.len() * 4);
        for v in &self.images {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    /// `sigma(0) = 0`, `sigma(2^k + m) = 2^k + sigma_k(m)` where block `k`
    /// is the `k x k` matrix `blocks[k]`.
    pub fn piecewise_linear_from_blocks(blocks: Vec<LinearMatrix>) -> Result<Self> {
        let n = blocks.len() as u32;
        check_exponent(n)?;
        let mut images = Vec::with_capacity(1 << n);
        images.push(0u32);
        for (k, block) in blocks.iter().enumerate() {
            if block.dim() != k as u32 {
                return Err(Error::BlockDimension { k, got: block.dim() });
            }
            if let Some(kernel) = block.kernel_vector() {
                return Err(Error::SingularMatrix { kernel: kernel as u64 });
            }
            let base = 1u32 << k;
            images.extend((0..base).map(|m| base + block.apply(m)));
        }
        Ordering::build(n, OrderingKind::Piecewise(blocks), images)
    }

    /// `outer ∘ inner`, i.e. `k -> outer(inner(k))`.
    pub fn compose(outer: &Ordering, inner: &Ordering) -> Result<Self> {
        if outer.n != inner.n {
            return Err(Error::MismatchedExponent { left: outer.n, right: inner.n });
        }
        let images = inner.images.iter().map(|&k| outer.images[k as usize]).collect();
        let kind = match (&outer.kind, &inner.kind) {
            (OrderingKind::Linear(a), OrderingKind::Linear(b)) => OrderingKind::Linear(a.compose(b)?),
            _ => OrderingKind::Composite,
        };
        Ordering::build(outer.n, kind, images)
    }

    pub fn invert(&self) -> Ordering {
        let mut images = vec![0u32; self.images.len()];
        for (k, &v) in self.images.iter().enumerate() {
            images[v as usize] = k as u32;
        }
        let kind = match &self.kind {
            OrderingKind::Named(NamedOrdering::Identity) => OrderingKind::Named(NamedOrdering::Identity),
            OrderingKind::Named(NamedOrdering::Paley) => OrderingKind::Named(NamedOrdering::Paley),
            OrderingKind::Linear(m) => match m.inverse() {
                Some(inv) => OrderingKind::Linear(inv),
                None => OrderingKind::Composite,
            },
            OrderingKind::Piecewise(blocks) => {
                match blocks.iter().map(LinearMatrix::inverse).collect::<Option<Vec<_>>>() {
                    Some(inv) => OrderingKind::Piecewise(inv),
                    None => OrderingKind::Composite,
                }
            }
            _ => OrderingKind::Composite,
        };
        Ordering { n: self.n, kind, images }
    }

    /// Uniformly random permutation of `[2^n]`.
    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_exponent(n)?;
        let mut images: Vec<u32> = (0..1u32 << n).collect();
        images.shuffle(rng);
        Ordering::build(n, OrderingKind::Table, images)
    }

    /// Uniformly random dyadically linear ordering of `[2^n]`.
    pub fn random_linear<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_exponent(n)?;
        Ordering::from_matrix(LinearMatrix::random_invertible(n, rng))
    }

    /// Permutation acting on the digits listed in `bit_set` and as the
    /// identity on the others: for each pattern of the untouched digits a
    /// seeded bijection scrambles the selected digits.
    pub fn subset_scramble(bit_set: &[u32], n: u32, seed: u64) -> Result<Self> {
        check_exponent(n)?;
        let mut selected = 0u32;
        for &bit in bit_set {
            if bit >= n {
                return Err(Error::BitOutOfRange { bit, n });
            }
            selected |= 1 << bit;
        }
        let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
        let untouched = full & !selected;
        let m = selected.count_ones();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let key_count = 1usize << (n - m);
        let mut scrambles = Vec::with_capacity(key_count);
        for _ in 0..key_count {
            let mut perm: Vec<u32> = (0..1u32 << m).collect();
            perm.shuffle(&mut rng);
            scrambles.push(perm);
        }

        let images = (0..1u32 << n)
            .map(|x| {
                let key = extract_bits(x, untouched);
                let pattern = extract_bits(x, selected);
                deposit_bits(scrambles[key as usize][pattern as usize], selected) | (x & untouched)
            })
            .collect();
        Ordering::build(n, OrderingKind::Table, images)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn kind(&self) -> &OrderingKind {
        &self.kind
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, k: u32) -> u32 {
        self.images[k as usize]
    }

    /// `sigma(x ^ y) = sigma(x) ^ sigma(y)` on `[2^n]`, with a witness on
    /// failure.
    ///
    /// The linear map determined by the basis images is compared against
    /// the full table; the first disagreement `x` splits into its lowest bit
    /// and the rest, both of which already agree, giving the witness.
    pub fn is_dyadically_linear(&self) -> LinearityCheck {
        restricted_linearity(&self.images)
    }

    pub fn restricted_linearity(&self, n: u32) -> LinearityCheck {
        restricted_linearity(&self.images[..1usize << n.min(self.n)])
    }
}

/// Linearity of a table on its own index range (a power of two).
pub(crate) fn restricted_linearity(images: &[u32]) -> LinearityCheck {
    if images[0] != 0 {
        return LinearityCheck { linear: false, witness: Some((0, 0)) };
    }
    let mut predicted = vec![0u32; images.len()];
    for x in 1..images.len() {
        let low = x & x.wrapping_neg();
        predicted[x] = if low == x { images[x] } else { predicted[low] ^ predicted[x ^ low] };
        if predicted[x] != images[x] {
            return LinearityCheck { linear: false, witness: Some((low as u64, (x ^ low) as u64)) };
        }
    }
    LinearityCheck { linear: true, witness: None }
}

#[inline]
fn kaczmarz_image(x: u32) -> u32 {
    if x == 0 {
        return 0;
    }
    let k = 31 - x.leading_zeros();
    let base = 1u32 << k;
    base + reverse_bits((x - base) as u64, k) as u32
}

/// Packs the bits of `x` selected by `mask` into the low bits.
fn extract_bits(x: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut pos = 0;
    let mut m = mask;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if x & bit != 0 {
            out |= 1 << pos;
        }
        pos += 1;
        m ^= bit;
    }
    out
}

/// Inverse of [`extract_bits`].
fn deposit_bits(x: u32, mask: u32) -> u32 {
    let mut out = 0;
    let mut pos = 0;
    let mut m = mask;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        if (x >> pos) & 1 == 1 {
            out |= bit;
        }
        pos += 1;
        m ^= bit;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationFlavor {
    /// `f(u) = pi(u) ^ sigma(u)`
    Xor,
    /// `f(u) = |pi(u) - sigma(u)|`
    Abs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationProfile {
    pub flavor: DeviationFlavor,
    pub values: Vec<u64>,
    pub max: u64,
}

fn deviation(pi: &Ordering, sigma: &Ordering, flavor: DeviationFlavor) -> Result<DeviationProfile> {
    if pi.n != sigma.n {
        return Err(Error::MismatchedExponent { left: pi.n, right: sigma.n });
    }
    let values: Vec<u64> = pi
        .images
        .iter()
        .zip(&sigma.images)
        .map(|(&a, &b)| match flavor {
            DeviationFlavor::Xor => (a ^ b) as u64,
            DeviationFlavor::Abs => a.abs_diff(b) as u64,
        })
        .collect();
    let max = values.iter().copied().max().unwrap_or(0);
    Ok(DeviationProfile { flavor, values, max })
}

pub fn xor_deviation(pi: &Ordering, sigma: &Ordering) -> Result<DeviationProfile> {
    deviation(pi, sigma, DeviationFlavor::Xor)
}

pub fn abs_deviation(pi: &Ordering, sigma: &Ordering) -> Result<DeviationProfile> {
    deviation(pi, sigma, DeviationFlavor::Abs)
}
