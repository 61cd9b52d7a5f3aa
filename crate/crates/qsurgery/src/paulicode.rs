//! Pauli operators and stabilizer codes.
//!
//! A [`PauliOperator`] is `sign * P_0 ⊗ ... ⊗ P_{n-1}` with every `P_q`
//! Hermitian (`Y` is stored as `x = z = 1`).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2la::{self, BitMatrix, BitVector, EchelonBasis};

/// Single-qubit Pauli.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        let (a, b) = self.bits();
        let (c, d) = other.bits();
        (a & d) ^ (b & c)
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator with a ±1 sign.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    x: BitVector,
    z: BitVector,
    negative: bool,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator { x: BitVector::zeros(n), z: BitVector::zeros(n), negative: false }
    }

    pub fn from_bits(x: BitVector, z: BitVector, negative: bool) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts must have equal length");
        PauliOperator { x, z, negative }
    }

    /// From a symplectic vector `(x | z)` of length `2n`.
    pub fn from_symplectic(v: &BitVector) -> Self {
        assert!(v.len() % 2 == 0);
        let n = v.len() / 2;
        PauliOperator { x: v.slice(0, n), z: v.slice(n, n), negative: false }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set(q, p);
        op
    }

    /// Product of `p` on each listed qubit.
    pub fn on(n: usize, qubits: impl IntoIterator<Item = usize>, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        for q in qubits {
            op.set(q, p);
        }
        op
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &BitVector {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVector {
        &self.z
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// Sign as ±1.
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.negative = !p.negative;
        p
    }

    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.negative = false;
        p
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s = self.x.clone();
        s.or_assign(&self.z);
        s.ones()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Symplectic vector `(x | z)`.
    pub fn symplectic(&self) -> BitVector {
        self.x.concat(&self.z)
    }

    /// Symplectic inner product; `true` means the operators anticommute.
    pub fn anticommutes_with(&self, other: &PauliOperator) -> bool {
        assert_eq!(self.n(), other.n(), "qubit count mismatch");
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    /// Product `self * other` as `i^phase * P` with `P` Hermitian.
    /// The returned phase is 0 or 2 exactly when the factors commute.
    pub fn mul_with_phase(&self, other: &PauliOperator) -> (PauliOperator, u8) {
        assert_eq!(self.n(), other.n(), "qubit count mismatch");
        let mut plus = 0i64;
        let mut minus = 0i64;
        for i in 0..self.x.words().len() {
            let (x1, z1) = (self.x.words()[i], self.z.words()[i]);
            let (x2, z2) = (other.x.words()[i], other.z.words()[i]);
            let p = (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2) | (x1 & z1 & !x2 & z2);
            let m = (x1 & !z1 & !x2 & z2) | (!x1 & z1 & x2 & z2) | (x1 & z1 & x2 & !z2);
            plus += p.count_ones() as i64;
            minus += m.count_ones() as i64;
        }
        let mut e = (plus - minus).rem_euclid(4);
        if self.negative {
            e += 2;
        }
        if other.negative {
            e += 2;
        }
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        (PauliOperator { x, z, negative: false }, (e % 4) as u8)
    }

    /// Product of two commuting operators, with the sign folded in.
    pub fn mul_commuting(&self, other: &PauliOperator) -> PauliOperator {
        let (mut p, phase) = self.mul_with_phase(other);
        assert!(phase % 2 == 0, "factors anticommute");
        p.negative = phase == 2;
        p
    }

    /// Product ignoring phases.
    pub fn mul_unsigned(&self, other: &PauliOperator) -> PauliOperator {
        let mut p = self.mul_with_phase(other).0;
        p.negative = false;
        p
    }

    /// Copy on `n` qubits with this operator placed at `offset`.
    pub fn embed(&self, n: usize, offset: usize) -> PauliOperator {
        assert!(offset + self.n() <= n);
        let mut p = PauliOperator::identity(n);
        for q in self.support() {
            p.set(offset + q, self.get(q));
        }
        p.negative = self.negative;
        p
    }

    /// Restriction to qubits `[start, start + len)`, sign kept.
    pub fn restrict(&self, start: usize, len: usize) -> PauliOperator {
        PauliOperator { x: self.x.slice(start, len), z: self.z.slice(start, len), negative: self.negative }
    }

    /// Same support pattern extended to `n` qubits with identity.
    pub fn extended(&self, n: usize) -> PauliOperator {
        self.embed(n, 0)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let n = self.n() + other.n();
        let mut p = self.embed(n, 0);
        for q in other.support() {
            p.set(self.n() + q, other.get(q));
        }
        p.negative = self.negative ^ other.negative;
        p
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.n() {
            write!(f, "{}", self.get(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses `[+|-]P...` over `{I,X,Y,Z}`; `_` is accepted for identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        if body.is_empty() {
            return Err(Error::parse(0, "empty Pauli string"));
        }
        let mut p = PauliOperator::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let pauli = match c.to_ascii_uppercase() {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::parse(0, format!("bad Pauli character {c:?} in {s:?}"))),
            };
            p.set(q, pauli);
        }
        p.negative = negative;
        Ok(p)
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Whether `p` and `q` commute.
pub fn commutes(p: &PauliOperator, q: &PauliOperator) -> Result<bool> {
    if p.n() != q.n() {
        return Err(Error::invalid(format!("operators act on {} and {} qubits", p.n(), q.n())));
    }
    Ok(!p.anticommutes_with(q))
}

/// Qubits where the single-qubit actions of `s` and `l` anticommute.
pub fn anticommute_set(s: &PauliOperator, l: &PauliOperator) -> BTreeSet<usize> {
    assert_eq!(s.n(), l.n(), "qubit count mismatch");
    let mut a = s.x_bits().clone();
    a.and_assign(l.z_bits());
    let mut b = s.z_bits().clone();
    b.and_assign(l.x_bits());
    a.xor_assign(&b);
    a.ones().into_iter().collect()
}

/// Maximum check weight and maximum number of checks per qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdpcProfile {
    pub omega: usize,
    pub delta: usize,
}

/// Outcome of an exact distance computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distance {
    /// Minimum weight of a nontrivial logical operator.
    Exact(usize),
    /// No nontrivial logical of weight at most the searched bound; the true
    /// distance is at least the stored value.
    AtLeast(usize),
    /// The code encodes no logical qubits.
    NoLogical,
}

/// A stabilizer code given by its measured check set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerCode {
    n: usize,
    generators: Vec<PauliOperator>,
}

impl StabilizerCode {
    /// Validates lengths and pairwise commutation.
    pub fn new(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.n() != n {
                return Err(Error::invalid(format!("check {i} acts on {} qubits, expected {n}", g.n())));
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if generators[i].anticommutes_with(&generators[j]) {
                    return Err(Error::invalid(format!(
                        "checks {i} ({}) and {j} ({}) anticommute",
                        generators[i], generators[j]
                    )));
                }
            }
        }
        Ok(StabilizerCode { n, generators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Symplectic check matrix, one row `(x | z)` per generator.
    pub fn check_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(2 * self.n, self.generators.iter().map(|g| g.symplectic()).collect())
            .expect("generator lengths validated")
    }

    pub fn rank(&self) -> usize {
        f2la::rank(&self.check_matrix())
    }

    /// Number of logical qubits `n - rank`.
    pub fn k(&self) -> usize {
        self.n - self.rank()
    }

    /// Echelon basis of the stabilizer row space.
    pub fn stabilizer_span(&self) -> EchelonBasis {
        let mut e = EchelonBasis::new(2 * self.n);
        for g in &self.generators {
            e.insert(&g.symplectic());
        }
        e
    }

    /// Whether `p` commutes with every check.
    pub fn commutes_with_all(&self, p: &PauliOperator) -> bool {
        self.generators.iter().all(|g| !g.anticommutes_with(p))
    }

    /// Whether `p` is in the stabilizer group up to sign.
    pub fn in_stabilizer_group(&self, p: &PauliOperator) -> bool {
        self.stabilizer_span().contains(&p.symplectic())
    }

    /// Whether `p` is a nontrivial logical operator.
    pub fn is_logical(&self, p: &PauliOperator) -> bool {
        p.n() == self.n && self.commutes_with_all(p) && !self.in_stabilizer_group(p)
    }

    /// Block-diagonal union acting on `self.n + other.n` qubits.
    pub fn direct_sum(&self, other: &StabilizerCode) -> StabilizerCode {
        let n = self.n + other.n;
        let mut gens: Vec<PauliOperator> = self.generators.iter().map(|g| g.embed(n, 0)).collect();
        gens.extend(other.generators.iter().map(|g| g.embed(n, self.n)));
        StabilizerCode { n, generators: gens }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for g in &self.generators {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the code file format: `n` on the first content line, then one
    /// Pauli string per line with an optional sign. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(0, "missing qubit count"))?;
        let n: usize = header.parse().map_err(|_| Error::parse(hl, format!("expected qubit count, got {header:?}")))?;
        let mut gens = Vec::new();
        for (ln, line) in lines {
            let p: PauliOperator = line.parse().map_err(|e| match e {
                Error::Parse { msg, .. } => Error::parse(ln, msg),
                other => other,
            })?;
            if p.n() != n {
                return Err(Error::parse(ln, format!("check has {} qubits, expected {n}", p.n())));
            }
            gens.push(p);
        }
        StabilizerCode::new(n, gens)
    }

    /// CSS code from X-check and Z-check matrices.
    pub fn from_css(hx: &BitMatrix, hz: &BitMatrix) -> Result<Self> {
        if hx.cols() != hz.cols() {
            return Err(Error::invalid(format!("HX has {} columns, HZ has {}", hx.cols(), hz.cols())));
        }
        let n = hx.cols();
        let mut gens = Vec::new();
        for r in hx.row_vectors() {
            gens.push(PauliOperator::from_bits(r.clone(), BitVector::zeros(n), false));
        }
        for r in hz.row_vectors() {
            gens.push(PauliOperator::from_bits(BitVector::zeros(n), r.clone(), false));
        }
        StabilizerCode::new(n, gens)
    }
}

/// Symplectic form of two `(x | z)` vectors.
fn symp(a: &BitVector, b: &BitVector) -> bool {
    PauliOperator::from_symplectic(a).anticommutes_with(&PauliOperator::from_symplectic(b))
}

/// Logical operators `[X̄_1, Z̄_1, X̄_2, Z̄_2, ...]` from symplectic
/// Gram-Schmidt over the normalizer modulo the stabilizer group.
pub fn logical_basis(code: &StabilizerCode) -> Vec<PauliOperator> {
    let n = code.n();
    // normalizer = kernel of the check matrix with x and z halves swapped
    let swapped: Vec<BitVector> =
        code.generators().iter().map(|g| g.z_bits().concat(g.x_bits())).collect();
    let m = BitMatrix::from_rows(2 * n, swapped).expect("lengths");
    let normalizer = f2la::kernel_basis(&m);
    let mut span = code.stabilizer_span();
    let mut complement: Vec<BitVector> = Vec::new();
    for v in normalizer {
        if span.insert(&v) {
            complement.push(v);
        }
    }
    let mut out = Vec::new();
    while let Some(a) = (!complement.is_empty()).then(|| complement.remove(0)) {
        let j = complement
            .iter()
            .position(|c| symp(&a, c))
            .expect("symplectic form on the logical quotient is nondegenerate");
        let b = complement.remove(j);
        for c in complement.iter_mut() {
            let cb = symp(c, &b);
            let ca = symp(c, &a);
            if cb {
                c.xor_assign(&a);
            }
            if ca {
                c.xor_assign(&b);
            }
        }
        out.push(PauliOperator::from_symplectic(&a));
        out.push(PauliOperator::from_symplectic(&b));
    }
    out
}

/// Maximum check weight and per-qubit check count.
pub fn ldpc_profile(code: &StabilizerCode) -> LdpcProfile {
    let omega = code.generators().iter().map(|g| g.weight()).max().unwrap_or(0);
    let mut deg = vec![0usize; code.n()];
    for g in code.generators() {
        for q in g.support() {
            deg[q] += 1;
        }
    }
    LdpcProfile { omega, delta: deg.into_iter().max().unwrap_or(0) }
}

/// Searches for a nontrivial logical of weight at most `max_weight`,
/// enumerating weights upward. Returns the first one found.
pub fn find_low_weight_logical(code: &StabilizerCode, max_weight: usize) -> Option<PauliOperator> {
    let logicals = logical_basis(code);
    if logicals.is_empty() {
        return None;
    }
    let n = code.n();
    let m = code.generators().len();
    let width = m + logicals.len();
    // signature of each single-qubit Pauli: syndrome bits then logical flags
    let mut sig: Vec<[BitVector; 3]> = Vec::with_capacity(n);
    for q in 0..n {
        let mut per = [BitVector::zeros(width), BitVector::zeros(width), BitVector::zeros(width)];
        for (pi, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
            for (i, g) in code.generators().iter().enumerate() {
                if g.get(q).anticommutes(p) {
                    per[pi].set(i, true);
                }
            }
            for (i, l) in logicals.iter().enumerate() {
                if l.get(q).anticommutes(p) {
                    per[pi].set(m + i, true);
                }
            }
        }
        sig.push(per);
    }
    let synd_words = m.div_ceil(64);
    let is_hit = |acc: &BitVector| -> bool {
        let w = acc.words();
        let mut synd_zero = true;
        for (i, &word) in w.iter().enumerate().take(synd_words) {
            let mask = if (i + 1) * 64 <= m { u64::MAX } else { (1u64 << (m - i * 64)) - 1 };
            if word & mask != 0 {
                synd_zero = false;
                break;
            }
        }
        synd_zero && !acc.is_zero()
    };
    for w in 1..=max_weight.min(n) {
        let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(w);
        let mut acc = BitVector::zeros(width);
        if search(&sig, n, w, 0, &mut chosen, &mut acc, &is_hit) {
            let mut p = PauliOperator::identity(n);
            for &(q, pi) in &chosen {
                p.set(q, [Pauli::X, Pauli::Y, Pauli::Z][pi]);
            }
            return Some(p);
        }
    }
    None
}

fn search(
    sig: &[[BitVector; 3]],
    n: usize,
    remaining: usize,
    start: usize,
    chosen: &mut Vec<(usize, usize)>,
    acc: &mut BitVector,
    is_hit: &dyn Fn(&BitVector) -> bool,
) -> bool {
    if remaining == 0 {
        return is_hit(acc);
    }
    for q in start..=n - remaining {
        for pi in 0..3 {
            acc.xor_assign(&sig[q][pi]);
            chosen.push((q, pi));
            if search(sig, n, remaining - 1, q + 1, chosen, acc, is_hit) {
                return true;
            }
            chosen.pop();
            acc.xor_assign(&sig[q][pi]);
        }
    }
    false
}

/// Exact distance by weight enumeration. Refuses codes with `n > max_n`.
pub fn distance_bruteforce(code: &StabilizerCode, max_n: usize) -> Result<Distance> {
    if code.n() > max_n {
        return Err(Error::CapExceeded(format!("distance enumeration limited to n <= {max_n}, code has n = {}", code.n())));
    }
    if code.k() == 0 {
        return Ok(Distance::NoLogical);
    }
    let p = find_low_weight_logical(code, code.n()).expect("a code with k > 0 has a logical");
    Ok(Distance::Exact(p.weight()))
}

/// Distance search limited to weight `max_weight`; returns `AtLeast` when
/// nothing is found.
pub fn distance_bounded(code: &StabilizerCode, max_weight: usize) -> Distance {
    if code.k() == 0 {
        return Distance::NoLogical;
    }
    match find_low_weight_logical(code, max_weight) {
        Some(p) => Distance::Exact(p.weight()),
        None => Distance::AtLeast(max_weight + 1),
    }
}

/// Built-in fixture codes.
pub mod fixtures {
    use super::*;

    fn code(n: usize, gens: &[&str]) -> StabilizerCode {
        StabilizerCode::new(n, gens.iter().map(|s| s.parse().expect("fixture")).collect()).expect("fixture")
    }

    /// `[[4,2,2]]` with checks XXXX, ZZZZ.
    pub fn four_two_two() -> StabilizerCode {
        code(4, &["XXXX", "ZZZZ"])
    }

    /// Steane `[[7,1,3]]` from the Hamming parity checks.
    pub fn steane() -> StabilizerCode {
        code(
            7,
            &["IIIXXXX", "IXXIIXX", "XIXIXIX", "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ"],
        )
    }

    /// Bell pair stabilizers, `k = 0`.
    pub fn bell_pair() -> StabilizerCode {
        code(2, &["XX", "ZZ"])
    }

    /// The `[[5,1,3]]` perfect code (non-CSS).
    pub fn five_qubit() -> StabilizerCode {
        code(5, &["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"])
    }

    /// Rotated surface code `[[9,1,3]]`.
    pub fn surface_d3() -> StabilizerCode {
        code(
            9,
            &[
                "XXIXXIIII", "IIIIXXIXX", "IIXIIXIII", "IIIXIIXII",
                "ZZIIIIIII", "IZZIZZIII", "IIIZZIZZI", "IIIIIIIZZ",
            ],
        )
    }

    /// Two-qubit repetition code for bit flips, `[[2,1,1]]`.
    pub fn repetition2() -> StabilizerCode {
        code(2, &["ZZ"])
    }

    /// Looks a fixture up by name.
    pub fn by_name(name: &str) -> Option<StabilizerCode> {
        Some(match name {
            "4_2_2" | "422" | "four_two_two" => four_two_two(),
            "steane" | "7_1_3" => steane(),
            "bell" => bell_pair(),
            "5_1_3" | "five_qubit" => five_qubit(),
            "surface3" | "surface_d3" => surface_d3(),
            "rep2" => repetition2(),
            _ => return None,
        })
    }
}
