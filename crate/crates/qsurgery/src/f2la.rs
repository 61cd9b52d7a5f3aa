//! Exact linear algebra over GF(2).
//!
//! Vectors are word-packed. Matrices are stored row-major as a list of
//! [`BitVector`] rows. Every elimination pivots on the lowest available
//! index so repeated runs return identical bases.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; len.div_ceil(WORD)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Vector of length `len` with ones at `indices`.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let bits: Result<Vec<bool>> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::parse(0, format!("bad bit character {c:?}"))),
            })
            .collect();
        Ok(Self::from_bools(&bits?))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones() & 1;
        }
        acc == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of the set bits in increasing order.
    pub fn ones(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * WORD + b);
                w &= w - 1;
            }
        }
        out
    }

    /// Lowest set index, if any.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * WORD + w.trailing_zeros() as usize)
    }

    /// Concatenation `self | other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut v = BitVector::zeros(self.len + other.len);
        for i in self.ones() {
            v.set(i, true);
        }
        for i in other.ones() {
            v.set(self.len + i, true);
        }
        v
    }

    /// Sub-vector `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len);
        BitVector::from_indices(len, self.ones().into_iter().filter(|&i| i >= start && i < start + len).map(|i| i - start))
    }

    /// Copy extended with zeros to length `len`.
    pub fn resized(&self, len: usize) -> BitVector {
        BitVector::from_indices(len, self.ones().into_iter().filter(|&i| i < len))
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A dense matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows, cols, data: vec![BitVector::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows that all have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::invalid(format!("row length {} does not match {cols} columns", r.len())));
        }
        Ok(BitMatrix { rows: rows.len(), cols, data: rows })
    }

    /// Parses rows given as `0`/`1` strings.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let data: Result<Vec<BitVector>> = rows.iter().map(|s| BitVector::parse(s)).collect();
        let data = data?;
        let cols = data.first().map_or(0, |r| r.len());
        Self::from_rows(cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.data[i]
    }

    pub fn row_vectors(&self) -> &[BitVector] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) out of range");
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) out of range");
        self.data[r].set(c, value);
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for c in row.ones() {
                t.data[c].set(r, true);
            }
        }
        t
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        BitVector::from_bools(&self.data.iter().map(|r| r.dot(v)).collect::<Vec<_>>())
    }

    /// Matrix with only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let data = self
            .data
            .iter()
            .map(|r| BitVector::from_bools(&cols.iter().map(|&c| r.get(c)).collect::<Vec<_>>()))
            .collect();
        BitMatrix { rows: self.rows, cols: cols.len(), data }
    }

    /// Row-reduces a copy to reduced echelon form. Returns the reduced rows
    /// (pivot rows first) and the pivot columns.
    fn rref(&self) -> (Vec<BitVector>, Vec<usize>) {
        let mut rows = self.data.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            let Some(p) = (next..rows.len()).find(|&r| rows[r].get(c)) else {
                continue;
            };
            rows.swap(next, p);
            let pivot = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(c);
            next += 1;
            if next == rows.len() {
                break;
            }
        }
        (rows, pivots)
    }

    pub fn to_sparse_text(&self) -> String {
        let mut entries = Vec::new();
        for (r, row) in self.data.iter().enumerate() {
            for c in row.ones() {
                entries.push((r, c));
            }
        }
        let mut s = format!("{} {} {}\n", self.rows, self.cols, entries.len());
        for (r, c) in entries {
            s.push_str(&format!("{r} {c}\n"));
        }
        s
    }

    /// Parses the sparse text format: a `rows cols nnz` header followed by
    /// one `r c` pair per nonzero entry, 0-indexed. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_sparse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(0, "missing header"))?;
        let nums = parse_usizes(hl, header)?;
        let [rows, cols, nnz] = nums[..] else {
            return Err(Error::parse(hl, "header must be `rows cols nnz`"));
        };
        let mut m = BitMatrix::zeros(rows, cols);
        let mut count = 0;
        for (ln, line) in lines {
            let pair = parse_usizes(ln, line)?;
            let [r, c] = pair[..] else {
                return Err(Error::parse(ln, "entry must be `r c`"));
            };
            if r >= rows || c >= cols {
                return Err(Error::parse(ln, format!("entry ({r},{c}) outside {rows}x{cols}")));
            }
            if m.get(r, c) {
                return Err(Error::parse(ln, format!("duplicate entry ({r},{c})")));
            }
            m.set(r, c, true);
            count += 1;
        }
        if count != nnz {
            return Err(Error::parse(hl, format!("header promises {nnz} entries, found {count}")));
        }
        Ok(m)
    }
}

fn parse_usizes(line_no: usize, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::parse(line_no, format!("not a count: {t:?}"))))
        .collect()
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

/// GF(2) row rank.
pub fn rank(m: &BitMatrix) -> usize {
    m.rref().1.len()
}

/// Basis of the right kernel `{v : m v = 0}`, one vector per free column in
/// increasing column order.
pub fn kernel_basis(m: &BitMatrix) -> Vec<BitVector> {
    let (rows, pivots) = m.rref();
    let mut is_pivot = vec![None; m.cols];
    for (i, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(i);
    }
    let mut basis = Vec::new();
    for free in 0..m.cols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut v = BitVector::zeros(m.cols);
        v.set(free, true);
        for (i, &pc) in pivots.iter().enumerate() {
            if rows[i].get(free) {
                v.set(pc, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Some `x` with `m x = b`, or `None` when the system is inconsistent.
pub fn solve(m: &BitMatrix, b: &BitVector) -> Option<BitVector> {
    assert_eq!(b.len(), m.rows, "right-hand side length must equal row count");
    let mut aug = BitMatrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in m.data[r].ones() {
            aug.set(r, c, true);
        }
        if b.get(r) {
            aug.set(r, m.cols, true);
        }
    }
    let (rows, pivots) = aug.rref();
    if pivots.last() == Some(&m.cols) {
        return None;
    }
    let mut x = BitVector::zeros(m.cols);
    for (i, &pc) in pivots.iter().enumerate() {
        if rows[i].get(m.cols) {
            x.set(pc, true);
        }
    }
    Some(x)
}

/// Incrementally built row-echelon basis for span membership tests.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<(usize, BitVector)>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        EchelonBasis { len, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.len);
        let mut r = v.clone();
        for (p, row) in &self.rows {
            if r.get(*p) {
                r.xor_assign(row);
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` when it is independent of the stored rows. Returns whether
    /// the dimension grew.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        let r = self.reduce(v);
        match r.first_one() {
            None => false,
            Some(p) => {
                for (_, row) in self.rows.iter_mut() {
                    if row.get(p) {
                        row.xor_assign(&r);
                    }
                }
                self.rows.push((p, r));
                true
            }
        }
    }
}
