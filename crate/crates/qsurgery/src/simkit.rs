//! Stabilizer tableau simulation of the measurement protocol, branch
//! oracles and bounded-weight phenomenological fault search.
//!
//! Edge qubits start in `|+⟩` and are split off by `X` measurements, matching
//! the merged-code convention in [`crate::surgery`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::rng_for;
use crate::error::{Error, Result};
use crate::f2la::{self, BitMatrix, BitVector, EchelonBasis};
use crate::paulicode::{logical_basis, Pauli, PauliOperator, StabilizerCode};
use crate::surgery::MergedCode;

/// Supplies outcomes of random measurements.
pub trait OutcomeSource {
    /// `true` means outcome −1.
    fn next_bit(&mut self) -> bool;
}

/// Replays a fixed bit stream; zeros once it runs out.
#[derive(Clone, Debug, Default)]
pub struct ForcedBits {
    bits: Vec<bool>,
    used: usize,
}

impl ForcedBits {
    pub fn new(bits: Vec<bool>) -> Self {
        ForcedBits { bits, used: 0 }
    }

    /// Branch `index` of `count` random measurements, least significant first.
    pub fn branch(index: u64, count: usize) -> Self {
        ForcedBits::new((0..count).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn consumed(&self) -> usize {
        self.used
    }
}

impl OutcomeSource for ForcedBits {
    fn next_bit(&mut self) -> bool {
        let b = self.bits.get(self.used).copied().unwrap_or(false);
        self.used += 1;
        b
    }
}

/// Seeded random outcomes.
pub struct SeededBits(ChaCha8Rng);

impl SeededBits {
    pub fn new(seed: u64) -> Self {
        SeededBits(rng_for(seed, "measurement-outcomes"))
    }
}

impl OutcomeSource for SeededBits {
    fn next_bit(&mut self) -> bool {
        self.0.gen()
    }
}

/// Result of one measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub value: i8,
    pub deterministic: bool,
}

impl Outcome {
    pub fn bit(&self) -> bool {
        self.value < 0
    }
}

/// Stabilizer state as signed stabilizer rows plus destabilizer rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    stab: Vec<PauliOperator>,
    destab: Vec<PauliOperator>,
}

impl Tableau {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        Tableau {
            n,
            stab: (0..n).map(|q| PauliOperator::single(n, q, Pauli::Z)).collect(),
            destab: (0..n).map(|q| PauliOperator::single(n, q, Pauli::X)).collect(),
        }
    }

    /// `|+…+⟩`.
    pub fn plus(n: usize) -> Self {
        Tableau {
            n,
            stab: (0..n).map(|q| PauliOperator::single(n, q, Pauli::X)).collect(),
            destab: (0..n).map(|q| PauliOperator::single(n, q, Pauli::Z)).collect(),
        }
    }

    /// State with the given `n` independent commuting stabilizers.
    pub fn from_stabilizers(n: usize, gens: Vec<PauliOperator>) -> Result<Self> {
        if gens.len() != n || gens.iter().any(|g| g.n() != n) {
            return Err(Error::invalid(format!("need {n} stabilizers on {n} qubits")));
        }
        let mut span = EchelonBasis::new(2 * n);
        for (i, g) in gens.iter().enumerate() {
            if !span.insert(&g.symplectic()) {
                return Err(Error::invalid(format!("stabilizer {i} is dependent")));
            }
            if let Some(j) = gens[..i].iter().position(|h| h.anticommutes_with(g)) {
                return Err(Error::invalid(format!("stabilizers {j} and {i} anticommute")));
            }
        }
        // rows (z | x) so that M·d gives the symplectic products with d = (x | z)
        let rows: Vec<BitVector> = gens.iter().map(|g| g.z_bits().concat(g.x_bits())).collect();
        let m = BitMatrix::from_rows(2 * n, rows)?;
        let mut destab = Vec::with_capacity(n);
        for i in 0..n {
            let e = BitVector::from_indices(n, [i]);
            let d = f2la::solve(&m, &e).ok_or_else(|| Error::invalid("no destabilizer frame"))?;
            destab.push(PauliOperator::from_symplectic(&d));
        }
        for j in 0..n {
            for i in 0..j {
                if destab[i].anticommutes_with(&destab[j]) {
                    destab[j] = destab[j].mul_unsigned(&gens[i]);
                }
            }
        }
        Ok(Tableau { n, stab: gens, destab })
    }

    /// A code state: all generators fixed to +1, then each `fix` fixed to +1.
    pub fn code_state(code: &StabilizerCode, fixes: &[PauliOperator]) -> Result<Self> {
        let n = code.n();
        let mut t = Tableau::zero(n);
        let mut src = ForcedBits::default();
        let mut done: Vec<PauliOperator> = Vec::new();
        for g in code.generators().iter().chain(fixes) {
            if t.measure(g, Some(1), &mut src).is_err() {
                // deterministic with the wrong sign: flip it with a Pauli that
                // commutes with everything fixed so far
                let rows: Vec<BitVector> =
                    done.iter().chain([g]).map(|p| p.z_bits().concat(p.x_bits())).collect();
                let m = BitMatrix::from_rows(2 * n, rows)?;
                let rhs = BitVector::from_indices(done.len() + 1, [done.len()]);
                let e = f2la::solve(&m, &rhs)
                    .ok_or_else(|| Error::invalid(format!("{g} is fixed by the earlier operators")))?;
                t.apply_pauli(&PauliOperator::from_symplectic(&e));
            }
            done.push(g.clone());
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliOperator] {
        &self.stab
    }

    pub fn destabilizers(&self) -> &[PauliOperator] {
        &self.destab
    }

    /// Checks the symplectic frame relations.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                if self.stab[i].anticommutes_with(&self.stab[j]) || (i != j && self.destab[i].anticommutes_with(&self.destab[j])) {
                    return Err(Error::invalid(format!("rows {i} and {j} anticommute")));
                }
                if self.destab[i].anticommutes_with(&self.stab[j]) != (i == j) {
                    return Err(Error::invalid(format!("destabilizer {i} and stabilizer {j} break the frame")));
                }
            }
        }
        Ok(())
    }

    /// Deterministic value of `p`, if any.
    pub fn peek(&self, p: &PauliOperator) -> Option<i8> {
        assert_eq!(p.n(), self.n, "operator width");
        if self.stab.iter().any(|s| s.anticommutes_with(p)) {
            return None;
        }
        let mut prod = PauliOperator::identity(self.n);
        for (s, d) in self.stab.iter().zip(&self.destab) {
            if d.anticommutes_with(p) {
                prod = prod.mul_commuting(s);
            }
        }
        debug_assert_eq!(prod.unsigned(), p.unsigned());
        Some(if prod.is_negative() == p.is_negative() { 1 } else { -1 })
    }

    /// Projective measurement of `p`. `forced` picks the outcome of a random
    /// measurement; forcing a deterministic one to the wrong value fails.
    pub fn measure(&mut self, p: &PauliOperator, forced: Option<i8>, src: &mut dyn OutcomeSource) -> Result<Outcome> {
        if p.n() != self.n {
            return Err(Error::invalid(format!("operator on {} qubits, state has {}", p.n(), self.n)));
        }
        let Some(i) = self.stab.iter().position(|s| s.anticommutes_with(p)) else {
            let value = self.peek(p).expect("commutes with every stabilizer");
            if forced.is_some_and(|f| f != value) {
                return Err(Error::invalid(format!("cannot force {p} to {}: it is deterministic", -value)));
            }
            return Ok(Outcome { value, deterministic: true });
        };
        let pivot = self.stab[i].clone();
        for j in 0..self.n {
            if j != i && self.stab[j].anticommutes_with(p) {
                self.stab[j] = self.stab[j].mul_commuting(&pivot);
            }
            if j != i && self.destab[j].anticommutes_with(p) {
                self.destab[j] = self.destab[j].mul_unsigned(&pivot);
            }
        }
        let value = match forced {
            Some(f) => f.signum(),
            None if src.next_bit() => -1,
            None => 1,
        };
        self.destab[i] = pivot;
        self.stab[i] = if value < 0 { p.negated() } else { p.clone() };
        Ok(Outcome { value, deterministic: false })
    }

    /// Applies a Pauli unitary.
    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        for s in self.stab.iter_mut() {
            if s.anticommutes_with(p) {
                *s = s.negated();
            }
        }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Tableau) -> Tableau {
        let n = self.n + other.n;
        let idl = PauliOperator::identity(self.n);
        let idr = PauliOperator::identity(other.n);
        let mut stab: Vec<PauliOperator> = self.stab.iter().map(|s| s.tensor(&idr)).collect();
        stab.extend(other.stab.iter().map(|s| idl.tensor(s)));
        let mut destab: Vec<PauliOperator> = self.destab.iter().map(|s| s.tensor(&idr)).collect();
        destab.extend(other.destab.iter().map(|s| idl.tensor(s)));
        Tableau { n, stab, destab }
    }

    /// Inserts `count` qubits in `|+⟩` before qubit `at`.
    pub fn insert_plus(&self, at: usize, count: usize) -> Tableau {
        assert!(at <= self.n);
        let n = self.n + count;
        let widen = |p: &PauliOperator| {
            p.restrict(0, at)
                .tensor(&PauliOperator::identity(count))
                .tensor(&p.restrict(at, self.n - at).unsigned())
        };
        let mut stab: Vec<PauliOperator> = self.stab.iter().map(widen).collect();
        let mut destab: Vec<PauliOperator> = self.destab.iter().map(widen).collect();
        stab.extend((0..count).map(|e| PauliOperator::single(n, at + e, Pauli::X)));
        destab.extend((0..count).map(|e| PauliOperator::single(n, at + e, Pauli::Z)));
        Tableau { n, stab, destab }
    }

    /// State of qubits `[start, start + len)`; fails when they are entangled
    /// with the rest.
    pub fn restrict(&self, start: usize, len: usize) -> Result<Tableau> {
        assert!(start + len <= self.n);
        let outside: Vec<usize> = (0..self.n).filter(|&q| q < start || q >= start + len).collect();
        let mut rows = self.stab.clone();
        let mut r = 0;
        for &q in &outside {
            for want_x in [true, false] {
                let has = |p: &PauliOperator| {
                    let (x, z) = p.get(q).bits();
                    if want_x {
                        x
                    } else {
                        z
                    }
                };
                let Some(pv) = (r..rows.len()).find(|&i| has(&rows[i])) else { continue };
                rows.swap(r, pv);
                let pivot = rows[r].clone();
                for (i, row) in rows.iter_mut().enumerate() {
                    if i != r && has(row) {
                        *row = row.mul_commuting(&pivot);
                    }
                }
                r += 1;
            }
        }
        let tail: Vec<PauliOperator> = rows[r..].iter().map(|p| p.restrict(start, len)).collect();
        if rows[r..].iter().any(|p| outside.iter().any(|&q| p.get(q) != Pauli::I)) || tail.len() != len {
            return Err(Error::invalid("qubits are entangled with the rest of the state"));
        }
        Tableau::from_stabilizers(len, tail)
    }

    /// Same pure state as `other`.
    pub fn same_state(&self, other: &Tableau) -> bool {
        self.n == other.n && other.stab.iter().all(|s| self.peek(s) == Some(1))
    }
}

/// Free-function form of [`Tableau::measure`]; unforced random outcomes
/// resolve to +1.
pub fn measure_pauli(t: &Tableau, p: &PauliOperator, forced: Option<i8>) -> Result<(i8, bool, Tableau)> {
    let mut out = t.clone();
    let o = out.measure(p, forced, &mut ForcedBits::default())?;
    Ok((o.value, o.deterministic, out))
}

/// Protocol stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Pre,
    Merge,
    Split,
    Post,
}

/// Which check a record measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckRef {
    Code(usize),
    Vertex(usize),
    Cycle(usize),
    Deformed(usize),
    Edge(usize),
}

/// One scheduled measurement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSpec {
    pub stage: Stage,
    pub round: usize,
    pub check: CheckRef,
    pub op: PauliOperator,
}

/// Syndrome rounds before, during and after the merge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rounds {
    pub pre: usize,
    pub merge: usize,
    pub post: usize,
}

impl Rounds {
    pub fn uniform(d: usize) -> Self {
        Rounds { pre: d, merge: d, post: d }
    }
}

#[derive(Clone, Debug)]
enum Event {
    Slot(usize),
    Measure(usize),
    Correct,
}

/// Space-time layout of the protocol.
#[derive(Clone, Debug)]
pub struct ProtocolSchedule {
    pub n: usize,
    pub m: usize,
    pub width: usize,
    pub records: Vec<RecordSpec>,
    /// `(stage, round, qubits)` where data faults may strike.
    pub slots: Vec<(Stage, usize, Vec<usize>)>,
    /// Record sets with noiseless parity 0.
    pub detectors: Vec<Vec<usize>>,
    /// Vertex records whose product is the reported outcome.
    pub sigma_records: Vec<usize>,
    pub split_records: Vec<usize>,
    /// `(qubit, Pauli, tree path edges)` per ported qubit.
    pub corrections: Vec<(usize, Pauli, Vec<usize>)>,
    pub logical: PauliOperator,
    /// Width-`width` operators equal to +1 before and after the protocol.
    pub tracked: Vec<PauliOperator>,
    events: Vec<Event>,
}

impl ProtocolSchedule {
    /// Builds the schedule; `refs` reference qubits follow the edge qubits.
    pub fn new(merged: &MergedCode, rounds: Rounds, refs: usize) -> Result<Self> {
        if rounds.merge == 0 {
            return Err(Error::invalid("at least one merged round is required"));
        }
        let code = &merged.base;
        let n = code.n();
        let m = merged.graph.num_edges();
        let width = n + m + refs;
        let widen = |p: &PauliOperator| p.extended(width);
        let mut records = Vec::new();
        let mut slots = Vec::new();
        let mut events = Vec::new();
        let mut detectors = Vec::new();
        let code_q: Vec<usize> = (0..n).collect();
        let all_q: Vec<usize> = (0..n + m).collect();
        let push = |records: &mut Vec<RecordSpec>, events: &mut Vec<Event>, stage, round, check, op| {
            records.push(RecordSpec { stage, round, check, op });
            events.push(Event::Measure(records.len() - 1));
            records.len() - 1
        };
        let gens = code.generators();
        let mut last_code: Vec<Option<usize>> = vec![None; gens.len()];
        for r in 0..rounds.pre {
            slots.push((Stage::Pre, r, code_q.clone()));
            events.push(Event::Slot(slots.len() - 1));
            for (i, g) in gens.iter().enumerate() {
                let id = push(&mut records, &mut events, Stage::Pre, r, CheckRef::Code(i), widen(g));
                detectors.push(last_code[i].into_iter().chain([id]).collect());
                last_code[i] = Some(id);
            }
        }
        let merged_ops: Vec<(CheckRef, PauliOperator)> = merged
            .vertex_checks
            .iter()
            .enumerate()
            .map(|(v, c)| (CheckRef::Vertex(v), widen(c)))
            .chain(merged.cycle_checks.iter().enumerate().map(|(c, op)| (CheckRef::Cycle(c), widen(op))))
            .chain(merged.deformed_checks.iter().enumerate().map(|(j, op)| (CheckRef::Deformed(j), widen(op))))
            .collect();
        let mut last_merged: Vec<usize> = Vec::new();
        let mut sigma_records = Vec::new();
        for r in 0..rounds.merge {
            slots.push((Stage::Merge, r, all_q.clone()));
            events.push(Event::Slot(slots.len() - 1));
            let mut this = Vec::with_capacity(merged_ops.len());
            for (k, (check, op)) in merged_ops.iter().enumerate() {
                let id = push(&mut records, &mut events, Stage::Merge, r, *check, op.clone());
                this.push(id);
                if r > 0 {
                    detectors.push(vec![last_merged[k], id]);
                    continue;
                }
                match *check {
                    CheckRef::Vertex(_) => sigma_records.push(id),
                    CheckRef::Cycle(_) => detectors.push(vec![id]),
                    CheckRef::Deformed(j) => detectors.push(last_code[j].into_iter().chain([id]).collect()),
                    _ => unreachable!(),
                }
            }
            last_merged = this;
        }
        slots.push((Stage::Split, 0, all_q.clone()));
        events.push(Event::Slot(slots.len() - 1));
        let split_records: Vec<usize> = (0..m)
            .map(|e| {
                push(&mut records, &mut events, Stage::Split, 0, CheckRef::Edge(e), PauliOperator::single(width, n + e, Pauli::X))
            })
            .collect();
        let nv = merged.vertex_checks.len();
        for (c, cyc) in merged.basis.cycles.iter().enumerate() {
            let mut d: Vec<usize> = cyc.iter().map(|&e| split_records[e]).collect();
            if c < merged.cycle_checks.len() {
                d.push(last_merged[nv + c]);
            }
            detectors.push(d);
        }
        events.push(Event::Correct);
        let nc = merged.cycle_checks.len();
        let mut prev: Vec<usize> = (0..gens.len()).map(|j| last_merged[nv + nc + j]).collect();
        for r in 0..rounds.post {
            slots.push((Stage::Post, r, code_q.clone()));
            events.push(Event::Slot(slots.len() - 1));
            for (i, g) in gens.iter().enumerate() {
                let id = push(&mut records, &mut events, Stage::Post, r, CheckRef::Code(i), widen(g));
                detectors.push(vec![prev[i], id]);
                prev[i] = id;
            }
        }
        let corrections = correction_paths(merged)?;
        let logical = merged.operator.extended(width);
        let tracked = if refs > 0 { tracked_logicals(code, &merged.operator, n + m, width)? } else { Vec::new() };
        Ok(ProtocolSchedule {
            n,
            m,
            width,
            records,
            slots,
            detectors,
            sigma_records,
            split_records,
            corrections,
            logical,
            tracked,
            events,
        })
    }

    /// Number of reference qubits needed to track every logical.
    pub fn refs_for(code: &StabilizerCode) -> usize {
        code.k()
    }

    /// Initial state: code state maximally entangled with the references,
    /// edges in `|+⟩`.
    pub fn initial_state(&self, code: &StabilizerCode) -> Result<Tableau> {
        let refs = self.width - self.n - self.m;
        let basis = logical_basis(code);
        if basis.len() != 2 * refs {
            return Err(Error::invalid("reference count does not match the number of logical qubits"));
        }
        let n = self.n;
        let w = n + refs;
        let mut fixes = Vec::new();
        for (j, pair) in basis.chunks(2).enumerate() {
            fixes.push(pair[0].extended(w).mul_commuting(&PauliOperator::single(w, n + j, Pauli::X)));
            fixes.push(pair[1].extended(w).mul_commuting(&PauliOperator::single(w, n + j, Pauli::Z)));
        }
        let widened = StabilizerCode::new(w, code.generators().iter().map(|g| g.extended(w)).collect())?;
        Ok(Tableau::code_state(&widened, &fixes)?.insert_plus(n, self.m))
    }

    /// Executes the schedule. Data faults are applied at their slot;
    /// `flips` inverts recorded outcomes.
    pub fn execute(
        &self,
        state: &mut Tableau,
        faults: &BTreeMap<usize, PauliOperator>,
        flips: &BTreeSet<usize>,
        src: &mut dyn OutcomeSource,
    ) -> Result<Execution> {
        if state.n() != self.width {
            return Err(Error::invalid(format!("state has {} qubits, schedule needs {}", state.n(), self.width)));
        }
        let mut bits = vec![false; self.records.len()];
        let mut random = 0;
        let mut corrected = Vec::new();
        for ev in &self.events {
            match *ev {
                Event::Slot(s) => {
                    if let Some(p) = faults.get(&s) {
                        state.apply_pauli(p);
                    }
                }
                Event::Measure(r) => {
                    let o = state.measure(&self.records[r].op, None, src)?;
                    random += usize::from(!o.deterministic);
                    bits[r] = o.bit() ^ flips.contains(&r);
                }
                Event::Correct => {
                    for (q, p, path) in &self.corrections {
                        if path.iter().fold(false, |acc, &e| acc ^ bits[self.split_records[e]]) {
                            state.apply_pauli(&PauliOperator::single(self.width, *q, *p));
                            corrected.push(*q);
                        }
                    }
                }
            }
        }
        Ok(Execution { bits, random, corrected })
    }

    pub fn detector_values(&self, bits: &[bool]) -> Vec<bool> {
        self.detectors.iter().map(|d| d.iter().fold(false, |a, &r| a ^ bits[r])).collect()
    }

    pub fn sigma_bit(&self, bits: &[bool]) -> bool {
        self.sigma_records.iter().fold(false, |a, &r| a ^ bits[r])
    }

    /// Record flips and final Pauli frame caused by one fault set.
    fn propagate(&self, faults: &BTreeMap<usize, PauliOperator>, flips: &BTreeSet<usize>) -> (Vec<bool>, PauliOperator) {
        let mut frame = PauliOperator::identity(self.width);
        let mut out = vec![false; self.records.len()];
        for ev in &self.events {
            match *ev {
                Event::Slot(s) => {
                    if let Some(p) = faults.get(&s) {
                        frame = frame.mul_unsigned(p);
                    }
                }
                Event::Measure(r) => out[r] = frame.anticommutes_with(&self.records[r].op) ^ flips.contains(&r),
                Event::Correct => {
                    for (q, p, path) in &self.corrections {
                        if path.iter().fold(false, |acc, &e| acc ^ out[self.split_records[e]]) {
                            frame = frame.mul_unsigned(&PauliOperator::single(self.width, *q, *p));
                        }
                    }
                }
            }
        }
        (out, frame)
    }
}

/// Outcome bits of one execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub bits: Vec<bool>,
    pub random: usize,
    pub corrected: Vec<usize>,
}

fn correction_paths(merged: &MergedCode) -> Result<Vec<(usize, Pauli, Vec<usize>)>> {
    let g = &merged.graph;
    if g.num_vertices() == 0 {
        return Ok(Vec::new());
    }
    let tree = g.bfs_tree(0, None);
    merged
        .operator
        .support()
        .into_iter()
        .map(|q| {
            let v = *merged.port.get(&q).ok_or_else(|| Error::invalid(format!("qubit {q} is not ported")))?;
            let path = tree.path_to_root(v).ok_or_else(|| Error::invalid("measurement graph is disconnected"))?;
            Ok((q, merged.operator.get(q), path))
        })
        .collect()
}

/// Width-`width` logical operators (with reference partners) that commute
/// with `l` and stay +1 through an ideal measurement of `l`.
fn tracked_logicals(code: &StabilizerCode, l: &PauliOperator, ref_at: usize, width: usize) -> Result<Vec<PauliOperator>> {
    let basis = logical_basis(code);
    let full: Vec<PauliOperator> = basis
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let partner = PauliOperator::single(width, ref_at + i / 2, if i % 2 == 0 { Pauli::X } else { Pauli::Z });
            b.extended(width).mul_commuting(&partner)
        })
        .collect();
    let anti: Vec<bool> = basis.iter().map(|b| b.anticommutes_with(l)).collect();
    let pivot = anti.iter().position(|&a| a);
    let mut out = Vec::new();
    for (i, f) in full.iter().enumerate() {
        match (anti[i], pivot) {
            (false, _) => out.push(f.clone()),
            (true, Some(p)) if p != i => out.push(f.mul_commuting(&full[p])),
            _ => {}
        }
    }
    Ok(out)
}

/// Per-stage outcomes of one protocol run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub epsilon: Vec<i8>,
    pub sigma: i8,
    pub omega: Vec<i8>,
    pub corrections: Vec<usize>,
    pub lines: Vec<(Stage, usize, CheckRef, i8)>,
    pub random: usize,
}

impl ProtocolTrace {
    /// Line-oriented log: stage, round, check, outcome.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (stage, round, check, v) in &self.lines {
            let _ = writeln!(s, "{stage:?} {round} {check:?} {v:+}");
        }
        let _ = writeln!(s, "sigma {:+}", self.sigma);
        let _ = writeln!(s, "corrections {:?}", self.corrections);
        s
    }
}

fn sign(bit: bool) -> i8 {
    if bit {
        -1
    } else {
        1
    }
}

/// Initialization, merge, split and correction on a code state of `code`.
/// Returns the trace and the final state of the code qubits.
pub fn run_protocol(
    code: &StabilizerCode,
    merged: &MergedCode,
    initial: &Tableau,
    src: &mut dyn OutcomeSource,
) -> Result<(ProtocolTrace, Tableau)> {
    if merged.base != *code {
        return Err(Error::invalid("merged code was built for another code"));
    }
    if initial.n() != code.n() {
        return Err(Error::invalid(format!("initial state has {} qubits, code has {}", initial.n(), code.n())));
    }
    if let Some((i, _)) = code.generators().iter().enumerate().find(|(_, g)| initial.peek(g) != Some(1)) {
        return Err(Error::invalid(format!("initial state is not a code state: generator {i} is not +1")));
    }
    let sched = ProtocolSchedule::new(merged, Rounds { pre: 0, merge: 1, post: 0 }, 0)?;
    let mut state = initial.insert_plus(code.n(), sched.m);
    let exec = sched.execute(&mut state, &BTreeMap::new(), &BTreeSet::new(), src)?;
    let epsilon: Vec<i8> = sched.sigma_records.iter().map(|&r| sign(exec.bits[r])).collect();
    let omega = sched.split_records.iter().map(|&r| sign(exec.bits[r])).collect();
    let lines = sched
        .records
        .iter()
        .zip(&exec.bits)
        .map(|(r, &b)| (r.stage, r.round, r.check, sign(b)))
        .collect();
    let trace = ProtocolTrace {
        sigma: epsilon.iter().product(),
        epsilon,
        omega,
        corrections: exec.corrected,
        lines,
        random: exec.random,
    };
    Ok((trace, state.restrict(0, code.n())?))
}

/// Branch-by-branch comparison against a direct measurement of `𝓛`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub branches: u64,
    pub random_bits: usize,
    pub plus_branches: u64,
    pub direct_deterministic: Option<i8>,
    pub mismatches: Vec<String>,
}

impl OracleReport {
    pub fn ok(&self) -> bool {
        if !self.mismatches.is_empty() {
            return false;
        }
        match self.direct_deterministic {
            Some(1) => self.plus_branches == self.branches,
            Some(_) => self.plus_branches == 0,
            None => 2 * self.plus_branches == self.branches,
        }
    }
}

/// Runs the protocol on every randomness branch and compares outcome and
/// post-measurement state with `measure_pauli(𝓛)` on the code qubits.
pub fn protocol_oracle(code: &StabilizerCode, merged: &MergedCode, initial: &Tableau, max_qubits: usize) -> Result<OracleReport> {
    if merged.n_total() > max_qubits {
        return Err(Error::CapExceeded(format!("{} qubits exceed the oracle cap {max_qubits}", merged.n_total())));
    }
    let (probe, _) = run_protocol(code, merged, initial, &mut ForcedBits::default())?;
    let random_bits = probe.random;
    if random_bits > 24 {
        return Err(Error::CapExceeded(format!("{random_bits} random outcomes is too many branches")));
    }
    let (_, direct_det, _) = measure_pauli(initial, &merged.operator, None)?;
    let direct_deterministic = direct_det.then(|| initial.peek(&merged.operator)).flatten();
    let branches = 1u64 << random_bits;
    let mut report = OracleReport { branches, random_bits, plus_branches: 0, direct_deterministic, mismatches: Vec::new() };
    for b in 0..branches {
        let mut src = ForcedBits::branch(b, random_bits);
        let (trace, out) = run_protocol(code, merged, initial, &mut src)?;
        if trace.random != random_bits {
            report.mismatches.push(format!("branch {b}: {} random outcomes", trace.random));
        }
        if trace.sigma == 1 {
            report.plus_branches += 1;
        }
        match measure_pauli(initial, &merged.operator, Some(trace.sigma)) {
            Ok((_, _, direct)) => {
                if !out.same_state(&direct) {
                    report.mismatches.push(format!("branch {b}: post-measurement states differ"));
                }
            }
            Err(_) => report.mismatches.push(format!("branch {b}: outcome {} is impossible", trace.sigma)),
        }
    }
    Ok(report)
}

/// A single space-time fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FaultLocation {
    Data { slot: usize, stage: Stage, round: usize, qubit: usize, pauli: Pauli },
    Measurement { record: usize, stage: Stage, round: usize, check: CheckRef },
}

/// Outcome of [`fault_search`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSearchResult {
    pub rounds: Rounds,
    pub searched_weight: usize,
    /// False when the budget stopped the search early.
    pub complete: bool,
    pub locations: usize,
    pub violation: Option<Vec<FaultLocation>>,
}

impl FaultSearchResult {
    pub fn verdict(&self) -> String {
        match (&self.violation, self.complete) {
            (Some(v), _) => format!("violation of weight {}", v.len()),
            (None, true) => format!("no violation up to weight {}", self.searched_weight),
            (None, false) => format!("no violation up to weight {} (budget reached)", self.searched_weight),
        }
    }
}

fn fault_maps(sched: &ProtocolSchedule, faults: &[FaultLocation]) -> (BTreeMap<usize, PauliOperator>, BTreeSet<usize>) {
    let mut data: BTreeMap<usize, PauliOperator> = BTreeMap::new();
    let mut flips = BTreeSet::new();
    for f in faults {
        match *f {
            FaultLocation::Data { slot, qubit, pauli, .. } => {
                let p = PauliOperator::single(sched.width, qubit, pauli);
                let e = data.entry(slot).or_insert_with(|| PauliOperator::identity(sched.width));
                *e = e.mul_unsigned(&p);
            }
            FaultLocation::Measurement { record, .. } => {
                if !flips.insert(record) {
                    flips.remove(&record);
                }
            }
        }
    }
    (data, flips)
}

/// Result of replaying a fault set through the tableau.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replay {
    pub fired: Vec<usize>,
    pub sigma_wrong: bool,
    pub logical_flipped: Vec<usize>,
}

impl Replay {
    pub fn undetected_logical_error(&self) -> bool {
        self.fired.is_empty() && (self.sigma_wrong || !self.logical_flipped.is_empty())
    }
}

/// Runs the protocol with `faults` injected, starting from a state entangled
/// with reference qubits so every logical is checked.
pub fn replay(merged: &MergedCode, rounds: Rounds, faults: &[FaultLocation], seed: u64) -> Result<Replay> {
    let sched = ProtocolSchedule::new(merged, rounds, ProtocolSchedule::refs_for(&merged.base))?;
    replay_on(&sched, &merged.base, faults, &mut SeededBits::new(seed))
}

fn replay_on(sched: &ProtocolSchedule, code: &StabilizerCode, faults: &[FaultLocation], src: &mut dyn OutcomeSource) -> Result<Replay> {
    let mut state = sched.initial_state(code)?;
    let (data, flips) = fault_maps(sched, faults);
    let exec = sched.execute(&mut state, &data, &flips, src)?;
    let fired = sched.detector_values(&exec.bits).iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    let sigma = sched.sigma_bit(&exec.bits);
    let sigma_wrong = state.peek(&sched.logical) != Some(sign(sigma));
    let logical_flipped = sched.tracked.iter().enumerate().filter(|(_, t)| state.peek(t) != Some(1)).map(|(i, _)| i).collect();
    Ok(Replay { fired, sigma_wrong, logical_flipped })
}

/// Default number of fault combinations examined.
pub const FAULT_BUDGET: u64 = 20_000_000;

/// Exhaustive search for undetected logical faults up to `max_weight`.
pub fn fault_search(merged: &MergedCode, rounds: Rounds, max_weight: usize) -> Result<FaultSearchResult> {
    fault_search_with(merged, rounds, max_weight, FAULT_BUDGET, 0)
}

/// [`fault_search`] with an explicit combination budget and replay seed.
pub fn fault_search_with(
    merged: &MergedCode,
    rounds: Rounds,
    max_weight: usize,
    budget: u64,
    seed: u64,
) -> Result<FaultSearchResult> {
    let code = &merged.base;
    let sched = ProtocolSchedule::new(merged, rounds, ProtocolSchedule::refs_for(code))?;
    let mut result =
        FaultSearchResult { rounds, searched_weight: 0, complete: true, locations: 0, violation: None };
    // weight 0: the noiseless protocol itself must be correct on several branches
    for s in 0..4u64 {
        let r = if s == 0 {
            replay_on(&sched, code, &[], &mut ForcedBits::default())?
        } else {
            replay_on(&sched, code, &[], &mut SeededBits::new(seed.wrapping_add(s)))?
        };
        if !r.fired.is_empty() {
            return Err(Error::invalid(format!("noiseless run fires detectors {:?}", r.fired)));
        }
        if r.sigma_wrong || !r.logical_flipped.is_empty() {
            result.violation = Some(Vec::new());
            return Ok(result);
        }
    }
    let mut locations = Vec::new();
    for (slot, (stage, round, qubits)) in sched.slots.iter().enumerate() {
        for &qubit in qubits {
            for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                locations.push(FaultLocation::Data { slot, stage: *stage, round: *round, qubit, pauli });
            }
        }
    }
    for (record, r) in sched.records.iter().enumerate() {
        locations.push(FaultLocation::Measurement { record, stage: r.stage, round: r.round, check: r.check });
    }
    result.locations = locations.len();
    let nd = sched.detectors.len();
    let effects: Vec<(BitVector, BitVector)> = locations
        .iter()
        .map(|f| {
            let (data, flips) = fault_maps(&sched, std::slice::from_ref(f));
            let (recs, frame) = sched.propagate(&data, &flips);
            let det: Vec<bool> = sched.detector_values(&recs);
            let mut obs = vec![sched.sigma_bit(&recs) ^ frame.anticommutes_with(&sched.logical)];
            obs.extend(sched.tracked.iter().map(|t| frame.anticommutes_with(t)));
            (BitVector::from_bools(&det), BitVector::from_bools(&obs))
        })
        .collect();
    debug_assert!(effects.iter().all(|(d, _)| d.len() == nd));
    // drop faults with no effect at all; they never help
    let live: Vec<usize> = (0..locations.len()).filter(|&i| !(effects[i].0.is_zero() && effects[i].1.is_zero())).collect();
    let mut by_det: HashMap<BitVector, Vec<usize>> = HashMap::new();
    for &i in &live {
        by_det.entry(effects[i].0.clone()).or_default().push(i);
    }
    let mut spent = 0u64;
    'weights: for w in 1..=max_weight {
        // a weight-w set is a (w−1)-prefix plus one fault with the same syndrome
        let mut prefix: Vec<usize> = Vec::new();
        let mut found: Option<Vec<usize>> = None;
        let mut exhausted = false;
        combos(live.len(), w - 1, &mut prefix, &mut |idx: &[usize]| {
            spent += 1;
            if spent > budget {
                exhausted = true;
                return false;
            }
            let mut det = BitVector::zeros(nd);
            let mut obs = BitVector::zeros(effects[0].1.len());
            for &k in idx {
                det.xor_assign(&effects[live[k]].0);
                obs.xor_assign(&effects[live[k]].1);
            }
            let last = idx.last().map(|&k| live[k]);
            if let Some(cands) = by_det.get(&det) {
                for &c in cands {
                    if last.is_some_and(|l| c <= l) {
                        continue;
                    }
                    let mut o = obs.clone();
                    o.xor_assign(&effects[c].1);
                    if !o.is_zero() {
                        let mut set: Vec<usize> = idx.iter().map(|&k| live[k]).collect();
                        set.push(c);
                        found = Some(set);
                        return false;
                    }
                }
            }
            true
        });
        if let Some(set) = found {
            let faults: Vec<FaultLocation> = set.iter().map(|&i| locations[i]).collect();
            let r = replay_on(&sched, code, &faults, &mut SeededBits::new(seed))?;
            if !r.undetected_logical_error() {
                return Err(Error::invalid(format!("fault set {faults:?} does not replay as a logical error")));
            }
            result.searched_weight = w;
            result.violation = Some(faults);
            break 'weights;
        }
        if exhausted {
            result.complete = false;
            break;
        }
        result.searched_weight = w;
    }
    Ok(result)
}

/// Calls `f` on every increasing `k`-subset of `0..n`; stops when `f`
/// returns false.
fn combos(n: usize, k: usize, prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if prefix.len() == k {
        return f(prefix);
    }
    let start = prefix.last().map_or(0, |&l| l + 1);
    for i in start..n {
        prefix.push(i);
        let go = combos(n, k, prefix, f);
        prefix.pop();
        if !go {
            return false;
        }
    }
    true
}
