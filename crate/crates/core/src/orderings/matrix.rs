//! Square matrices over GF(2) acting on the binary digits of an index.

use rand::Rng;

use crate::dyadic::parity;
use crate::{Error, Result};

/// An `n x n` 0/1 matrix; `rows[i]` holds row `i` with bit `j` equal to
/// `t_{i,j}`. The action is `sigma(x)_i = sum_j t_{i,j} x_j mod 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearMatrix {
    n: u32,
    rows: Vec<u32>,
}

impl LinearMatrix {
    /// Builds a matrix from its bit-rows. Row `i` may only use bits `0..n`.
    pub fn new(rows: Vec<u32>) -> Result<Self> {
        let n = rows.len() as u32;
        if n > 32 {
            return Err(Error::ExponentOutOfRange { n, max: 32 });
        }
        for (row, &bits) in rows.iter().enumerate() {
            if n < 32 && bits >> n != 0 {
                return Err(Error::MatrixShape { row, dim: n });
            }
        }
        Ok(LinearMatrix { n, rows })
    }

    /// Builds a matrix from column images `T e_j`.
    pub fn from_columns(columns: &[u32]) -> Result<Self> {
        let n = columns.len();
        let mut rows = vec![0u32; n];
        for (j, &col) in columns.iter().enumerate() {
            for (i, row) in rows.iter_mut().enumerate() {
                if (col >> i) & 1 == 1 {
                    *row |= 1 << j;
                }
            }
        }
        LinearMatrix::new(rows)
    }

    pub fn identity(n: u32) -> Self {
        LinearMatrix { n, rows: (0..n).map(|i| 1 << i).collect() }
    }

    /// `t_{i,j} = 1` iff `j = i` or `j = i + 1`: the original Walsh order.
    pub fn band(n: u32) -> Self {
        let rows = (0..n)
            .map(|i| if i + 1 < n { (1 << i) | (1 << (i + 1)) } else { 1 << i })
            .collect();
        LinearMatrix { n, rows }
    }

    /// The anti-diagonal permutation matrix: output bit `i` is input bit `n-1-i`.
    pub fn bit_reversal(n: u32) -> Self {
        LinearMatrix { n, rows: (0..n).map(|i| 1 << (n - 1 - i)).collect() }
    }

    /// Permutation matrix sending input bit `sources[i]` to output bit `i`.
    pub fn bit_permutation(sources: &[u32]) -> Result<Self> {
        let n = sources.len() as u32;
        let mut seen = 0u64;
        for &s in sources {
            if s >= n {
                return Err(Error::BitOutOfRange { bit: s, n });
            }
            seen |= 1 << s;
        }
        if seen.count_ones() != n {
            return Err(Error::MatrixShape { row: 0, dim: n });
        }
        LinearMatrix::new(sources.iter().map(|&s| 1 << s).collect())
    }

    /// Uniformly random invertible matrix (rejection sampling).
    pub fn random_invertible<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Self {
        let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        loop {
            let rows = (0..n).map(|_| rng.gen::<u32>() & mask).collect();
            let m = LinearMatrix { n, rows };
            if m.kernel_vector().is_none() {
                return m;
            }
        }
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn entry(&self, i: u32, j: u32) -> bool {
        (self.rows[i as usize] >> j) & 1 == 1
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        let mut out = 0u32;
        for (i, &row) in self.rows.iter().enumerate() {
            out |= (parity((row & x) as u64) as u32) << i;
        }
        out
    }

    pub fn columns(&self) -> Vec<u32> {
        (0..self.n).map(|j| self.apply(1 << j)).collect()
    }

    /// A nonzero vector `x` with `T x = 0`, if the matrix is singular.
    pub fn kernel_vector(&self) -> Option<u32> {
        // basis[p] = (reduced column with leading bit p, columns combined into it)
        let mut basis: Vec<Option<(u32, u32)>> = vec![None; self.n as usize];
        for (j, col) in self.columns().into_iter().enumerate() {
            let mut v = col;
            let mut combo = 1u32 << j;
            loop {
                if v == 0 {
                    return Some(combo);
                }
                let p = 31 - v.leading_zeros();
                match basis[p as usize] {
                    Some((bv, bc)) => {
                        v ^= bv;
                        combo ^= bc;
                    }
                    None => {
                        basis[p as usize] = Some((v, combo));
                        break;
                    }
                }
            }
        }
        None
    }

    pub fn is_invertible(&self) -> bool {
        self.kernel_vector().is_none()
    }

    /// Gauss-Jordan inverse over GF(2).
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n as usize;
        let mut mat = self.rows.clone();
        let mut inv: Vec<u32> = (0..n).map(|i| 1 << i).collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| (mat[r] >> col) & 1 == 1)?;
            mat.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && (mat[r] >> col) & 1 == 1 {
                    mat[r] ^= mat[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Some(LinearMatrix { n: self.n, rows: inv })
    }

    /// Matrix of `x -> self(other(x))`.
    pub fn compose(&self, other: &LinearMatrix) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::MismatchedExponent { left: self.n, right: other.n });
        }
        let cols: Vec<u32> = other.columns().into_iter().map(|c| self.apply(c)).collect();
        LinearMatrix::from_columns(&cols)
    }

    /// Parses the matrix file format: `n` lines of `n` characters `0`/`1`,
    /// line `i` is row `i`, character `j` is input bit `j`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines: Vec<&str> = text.lines().map(str::trim_end).collect();
        while lines.last() == Some(&"") {
            lines.pop();
        }
        let n = lines.len();
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines.iter().enumerate() {
            if line.chars().count() != n {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {n} characters, found {}", line.chars().count()),
                });
            }
            let mut row = 0u32;
            for (j, c) in line.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => row |= 1 << j,
                    other => {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: format!("unexpected character {other:?}"),
                        })
                    }
                }
            }
            rows.push(row);
        }
        LinearMatrix::new(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &row in &self.rows {
            for j in 0..self.n {
                out.push(if (row >> j) & 1 == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn band_is_gray_code() {
        let m = LinearMatrix::band(4);
        for x in 0..16u32 {
            assert_eq!(m.apply(x), x ^ (x >> 1));
        }
    }

    #[test]
    fn bit_reversal_maps_one_to_four() {
        assert_eq!(LinearMatrix::bit_reversal(3).apply(1), 4);
    }

    #[test]
    fn kernel_of_singular_matrix() {
        // columns: e0, e0, e1 -> x = 0b011 lies in the kernel
        let m = LinearMatrix::from_columns(&[0b01, 0b01, 0b10]).unwrap();
        let k = m.kernel_vector().unwrap();
        assert_ne!(k, 0);
        assert_eq!(m.apply(k), 0);
        assert!(m.inverse().is_none());
    }

    #[test]
    fn zero_dimensional_matrix() {
        let m = LinearMatrix::identity(0);
        assert!(m.is_invertible());
        assert_eq!(m.apply(0), 0);
        assert_eq!(LinearMatrix::parse("").unwrap(), m);
    }

    #[test]
    fn inverse_undoes_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=8 {
            let m = LinearMatrix::random_invertible(n, &mut rng);
            let inv = m.inverse().unwrap();
            let id = m.compose(&inv).unwrap();
            assert_eq!(id, LinearMatrix::identity(n));
            for x in 0..1u32 << n {
                assert_eq!(inv.apply(m.apply(x)), x);
            }
        }
    }

    #[test]
    fn text_format() {
        let m = LinearMatrix::band(3);
        assert_eq!(m.to_text(), "110\n011\n001\n");
        assert_eq!(LinearMatrix::parse(&m.to_text()).unwrap(), m);
        assert_eq!(LinearMatrix::parse("110\n011\n001").unwrap(), m);
        assert!(matches!(LinearMatrix::parse("11\n0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(LinearMatrix::parse("1x\n01\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rejects_wide_rows() {
        assert_eq!(LinearMatrix::new(vec![0b100, 1]), Err(Error::MatrixShape { row: 0, dim: 2 }));
    }
}
