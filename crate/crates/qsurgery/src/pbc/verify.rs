use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    conjugate_by_rotation, correction_eighths, eighth_achieved, quarter_achieved, Circuit, Compilation, Gate, GadgetKind,
};
use crate::config::rng_for;
use crate::error::{Error, Result};
use crate::paulicode::{Pauli, PauliOperator};

const TOL: f64 = 1e-9;

/// Dense state on few qubits; qubit `q` is bit `q` of the index.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amp: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); 1 << n];
        amp[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amp }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn masks(p: &PauliOperator, offset: usize) -> (usize, usize, u32) {
        let (mut x, mut z, mut y) = (0usize, 0usize, 0u32);
        for q in p.support() {
            let (bx, bz) = p.get(q).bits();
            if bx {
                x |= 1 << (q + offset);
            }
            if bz {
                z |= 1 << (q + offset);
            }
            if bx && bz {
                y += 1;
            }
        }
        (x, z, y + if p.is_negative() { 2 } else { 0 })
    }

    /// `out = P |ψ⟩` for a Pauli placed at `offset` (given as `(x, z, i-power)` masks).
    fn pauli_image(&self, (x, z, e): (usize, usize, u32)) -> Vec<Complex64> {
        let phase = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];
        let mut out = vec![Complex64::new(0.0, 0.0); self.amp.len()];
        for (b, a) in self.amp.iter().enumerate() {
            let sign = if (b & z).count_ones() % 2 == 1 { 2 } else { 0 };
            out[b ^ x] = a * phase[((e + sign) % 4) as usize];
        }
        out
    }

    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        self.amp = self.pauli_image(Self::masks(p, 0));
    }

    /// `exp(-iθP)`.
    pub fn apply_rotation(&mut self, p: &PauliOperator, theta: f64) {
        let pa = self.pauli_image(Self::masks(p, 0));
        let (c, s) = (theta.cos(), theta.sin());
        for (a, b) in self.amp.iter_mut().zip(pa) {
            *a = *a * c - Complex64::new(0.0, s) * b;
        }
    }

    /// Applies `(1 + m P)/2` and returns the probability, renormalising when
    /// nonzero.
    pub fn project(&mut self, p: &PauliOperator, m: i8) -> f64 {
        let pa = self.pauli_image(Self::masks(p, 0));
        let mut norm = 0.0;
        for (a, b) in self.amp.iter_mut().zip(pa) {
            *a = (*a + b * m as f64) * 0.5;
            norm += a.norm_sqr();
        }
        if norm > TOL * TOL {
            let s = 1.0 / norm.sqrt();
            self.amp.iter_mut().for_each(|a| *a *= s);
        }
        norm
    }

    pub fn apply_single(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1 << q;
        for b in 0..self.amp.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amp[b], self.amp[b | bit]);
                self.amp[b] = u[0][0] * a0 + u[0][1] * a1;
                self.amp[b | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        let h = c(FRAC_1_SQRT_2, 0.0);
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match *g {
            Gate::X(q) => self.apply_single(q, [[o, l], [l, o]]),
            Gate::Y(q) => self.apply_single(q, [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]]),
            Gate::Z(q) => self.apply_single(q, [[l, o], [o, -l]]),
            Gate::H(q) => self.apply_single(q, [[h, h], [h, -h]]),
            Gate::S(q) => self.apply_single(q, [[l, o], [o, c(0.0, 1.0)]]),
            Gate::Sdg(q) => self.apply_single(q, [[l, o], [o, c(0.0, -1.0)]]),
            Gate::T(q) => self.apply_single(q, [[l, o], [o, w]]),
            Gate::Tdg(q) => self.apply_single(q, [[l, o], [o, w.conj()]]),
            Gate::Cnot(ct, t) => {
                let (cb, tb) = (1 << ct, 1 << t);
                for b in 0..self.amp.len() {
                    if b & cb != 0 && b & tb == 0 {
                        self.amp.swap(b, b | tb);
                    }
                }
            }
            Gate::MeasureZ(_) => {}
        }
    }

    /// `|⟨ψ|φ⟩|`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm()
    }

    /// Joint outcome distribution of commuting Paulis; index bit `i` is set
    /// when operator `i` reads `−1`.
    pub fn distribution(&self, ops: &[PauliOperator]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << ops.len()];
        let mut stack = vec![(0usize, 0usize, self.clone(), 1.0f64)];
        while let Some((i, idx, st, p)) = stack.pop() {
            if i == ops.len() {
                out[idx] += p;
                continue;
            }
            for (bit, m) in [(0, 1i8), (1, -1)] {
                let mut s = st.clone();
                let q = s.project(&ops[i], m);
                if q > TOL * TOL {
                    stack.push((i + 1, idx | (bit << i), s, p * q));
                }
            }
        }
        out
    }
}

/// Outcome distribution of measuring every qubit in `Z` at the end.
pub fn simulate_circuit(c: &Circuit) -> Vec<f64> {
    let mut s = StateVector::zero(c.num_qubits);
    for g in &c.gates {
        s.apply_gate(g);
    }
    let zs: Vec<PauliOperator> = (0..c.num_qubits).map(|q| PauliOperator::single(c.num_qubits, q, Pauli::Z)).collect();
    s.distribution(&zs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub qubits: usize,
    pub gadgets: usize,
    pub branches: usize,
    /// Largest `1 − |⟨u|v⟩|` between branch results of one gadget.
    pub branch_defect: f64,
    pub max_abs_diff: f64,
    pub ok: bool,
}

/// Pauli frame: Cliffords `C_1 ⋯ C_m` owed to the register, newest last.
#[derive(Clone, Debug, Default)]
struct Frame {
    ops: Vec<(PauliOperator, i8)>,
}

impl Frame {
    /// `W† Q W`.
    fn conjugate(&self, q: &PauliOperator) -> PauliOperator {
        self.ops.iter().fold(q.clone(), |acc, (p, e)| match e.rem_euclid(8) {
            4 => {
                if p.anticommutes_with(&acc) {
                    acc.negated()
                } else {
                    acc
                }
            }
            2 => conjugate_by_rotation(p, 1, &acc),
            6 => conjugate_by_rotation(p, -1, &acc),
            _ => acc,
        })
    }

    /// State the register should be in: `W |φ⟩`.
    fn apply_to(&self, s: &StateVector, n: usize) -> StateVector {
        let mut out = s.clone();
        for (p, e) in self.ops.iter().rev() {
            out.apply_rotation(&p.extended(n), *e as f64 * std::f64::consts::PI / 8.0);
        }
        out
    }

    fn push(&mut self, p: PauliOperator, eighths: i8) {
        if eighths.rem_euclid(8) != 0 {
            self.ops.push((p, eighths.rem_euclid(8)));
        }
    }
}

/// Runs the schedule on a state vector and compares the final distribution
/// with direct simulation. At each gadget every outcome branch is followed
/// and checked to leave the same logical state; execution then continues on
/// a seeded choice among them.
pub fn verify_compilation(comp: &Compilation, max_qubits: usize, seed: u64) -> Result<VerifyReport> {
    let s = &comp.schedule;
    let k = s.num_qubits;
    let nb = s.num_blocks;
    let n = k + nb + 1;
    if n > max_qubits {
        return Err(Error::CapExceeded(format!("{n} simulated qubits exceed the cap of {max_qubits}")));
    }
    let magic = k + nb;
    let reference = simulate_circuit(&comp.circuit);
    let mut rng = rng_for(seed, "verify-branches");
    let mut state = StateVector::zero(n);
    let mut frame = Frame::default();
    let mut anc_sign = vec![1i8; nb];
    let mut branches = 0;
    let mut defect: f64 = 0.0;
    let single = |q: usize, p: Pauli| PauliOperator::single(n, q, p);
    for gi in s.execution_order() {
        let g = &s.gadgets[gi];
        let axis = frame.conjugate(&g.rotation.axis);
        let wide = axis.extended(n);
        let mut results: Vec<(StateVector, Frame, i8, f64)> = Vec::new();
        match g.kind {
            GadgetKind::Quarter { ancilla_block, before } => {
                let a = k + ancilla_block;
                let after = if before == Pauli::Z { Pauli::X } else { Pauli::Z };
                let target = g.rotation.eighths / 2;
                for m1 in [1i8, -1] {
                    let mut s1 = state.clone();
                    let p1 = s1.project(&joint(&wide, a, Pauli::Y), m1);
                    if p1 <= TOL {
                        continue;
                    }
                    for m2 in [1i8, -1] {
                        let mut s2 = s1.clone();
                        let p2 = s2.project(&single(a, after), m2);
                        if p2 <= TOL {
                            continue;
                        }
                        let mut f = frame.clone();
                        if quarter_achieved(before, anc_sign[ancilla_block], m1, m2) != target {
                            f.push(axis.clone(), 4);
                        }
                        results.push((s2, f, m2, p1 * p2));
                    }
                }
            }
            GadgetKind::Eighth => {
                let mut prepared = state.clone();
                reset_to_t(&mut prepared, magic);
                for m1 in [1i8, -1] {
                    let mut s1 = prepared.clone();
                    let p1 = s1.project(&joint(&wide, magic, Pauli::Z), m1);
                    if p1 <= TOL {
                        continue;
                    }
                    for m2 in [1i8, -1] {
                        let mut s2 = s1.clone();
                        let p2 = s2.project(&single(magic, Pauli::X), m2);
                        if p2 <= TOL {
                            continue;
                        }
                        let mut f = frame.clone();
                        f.push(axis.clone(), correction_eighths(g.rotation.eighths, eighth_achieved(m1, m2)));
                        results.push((s2, f, m2, p1 * p2));
                    }
                }
            }
        }
        let mut expected = frame.apply_to(&state, n);
        expected.apply_rotation(&g.rotation.axis.extended(n), g.rotation.eighths as f64 * std::f64::consts::PI / 8.0);
        for (st, f, _, _) in &results {
            let got = f.apply_to(st, n);
            let ov = logical_overlap(&got, &expected, k, n);
            defect = if ov.is_finite() { defect.max(1.0 - ov) } else { f64::INFINITY };
        }
        branches += results.len();
        if results.is_empty() {
            return Err(Error::invalid(format!("gadget {gi} has no consistent outcome")));
        }
        let pick = rng.gen_range(0..results.len());
        let (st, f, m2, _) = results.swap_remove(pick);
        state = st;
        frame = f;
        if let GadgetKind::Quarter { ancilla_block, .. } = g.kind {
            anc_sign[ancilla_block] = m2;
        }
    }
    let finals: Vec<PauliOperator> = comp.absorbed.final_bases.iter().map(|b| frame.conjugate(b).extended(n)).collect();
    let got = state.distribution(&finals);
    let max_abs_diff = got.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ok = max_abs_diff < TOL && defect < TOL;
    Ok(VerifyReport { qubits: n, gadgets: s.gadgets.len(), branches, branch_defect: defect, max_abs_diff, ok })
}

/// Replaces the (unentangled) magic qubit with `|T⟩ = (|0⟩ + e^{iπ/4}|1⟩)/√2`.
fn reset_to_t(s: &mut StateVector, q: usize) {
    let bit = 1 << q;
    let w = Complex64::from_polar(FRAC_1_SQRT_2, std::f64::consts::FRAC_PI_4);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for b in 0..s.amp.len() {
        if b & bit == 0 {
            let (a0, a1) = (s.amp[b], s.amp[b | bit]);
            let r = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
            if r == 0.0 {
                continue;
            }
            let base = if a0.norm() >= a1.norm() { a0 / a0.norm() } else { a1 / a1.norm() };
            let amp = base * r;
            s.amp[b] = amp * h;
            s.amp[b | bit] = amp * w;
        }
    }
}

fn joint(p: &PauliOperator, q: usize, a: Pauli) -> PauliOperator {
    let mut j = p.clone();
    j.set(q, a);
    j
}

/// Overlap of the reduced computational states, assuming the ancilla and
/// magic registers are unentangled with them.
fn logical_overlap(a: &StateVector, b: &StateVector, k: usize, n: usize) -> f64 {
    let ra = reduce(a, k, n);
    let rb = reduce(b, k, n);
    ra.iter().zip(&rb).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

/// Computational part of a product state, phase fixed by its largest block.
fn reduce(s: &StateVector, k: usize, n: usize) -> Vec<Complex64> {
    let low = 1usize << k;
    let mut best = 0;
    let mut best_norm = -1.0;
    for hi in 0..(1usize << (n - k)) {
        let norm: f64 = (0..low).map(|l| s.amp[hi * low + l].norm_sqr()).sum();
        if norm > best_norm {
            best_norm = norm;
            best = hi;
        }
    }
    let scale = 1.0 / best_norm.sqrt();
    (0..low).map(|l| s.amp[best * low + l] * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archkit::BlockMap;
    use crate::pbc::{compile, random_compatible_circuit, BlockPartition};

    #[test]
    fn cnot_decomposition_is_exact() {
        let c = Circuit::parse("qubits 2\nH 0\nT 0\nH 1\nS 1\nCNOT 0 1\nT 1\nH 0\n").unwrap();
        let p = BlockPartition::new(2, vec![vec![0], vec![1]]).unwrap();
        let comp = compile(&c, &p, &BlockMap::line(2)).unwrap();
        let r = verify_compilation(&comp, 12, 1).unwrap();
        assert!(r.ok, "{r:?}");
        assert_eq!(r.gadgets, 3);
    }

    #[test]
    fn random_circuits_verify() {
        let p = BlockPartition::contiguous(6, 3).unwrap();
        let m = BlockMap::line(3);
        for seed in 0..6 {
            let c = random_compatible_circuit(&p, &m, 25, seed);
            let comp = compile(&c, &p, &m).unwrap();
            let r = verify_compilation(&comp, 12, seed).unwrap();
            assert!(r.ok, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn oversized_register_is_refused() {
        let p = BlockPartition::contiguous(10, 3).unwrap();
        let c = Circuit::parse("qubits 10\nT 0\n").unwrap();
        let comp = compile(&c, &p, &BlockMap::line(5)).unwrap();
        assert!(matches!(verify_compilation(&comp, 12, 0), Err(Error::CapExceeded(_))));
    }
}
