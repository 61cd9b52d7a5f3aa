//! Compilation of Clifford+T circuits into Pauli-measurement schedules on a
//! block architecture.
//!
//! Rotations follow `P_θ = exp(-iθP)`; angles are stored in units of `π/8`.

mod schedule;
mod verify;

pub use schedule::*;
pub use verify::*;

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::archkit::BlockMap;
use crate::config::rng_for;
use crate::error::{Error, Result};
use crate::paulicode::{Pauli, PauliOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    Cnot(usize, usize),
    T(usize),
    Tdg(usize),
    MeasureZ(usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Cnot(c, t) => vec![c, t],
            Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::T(q)
            | Gate::Tdg(q)
            | Gate::MeasureZ(q) => vec![q],
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::T(_) | Gate::Tdg(_) | Gate::MeasureZ(_))
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::T(q) => Gate::Tdg(q),
            Gate::Tdg(q) => Gate::T(q),
            g => g,
        }
    }

    /// `U† P U` for this Clifford gate.
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        let n = p.n();
        let one = |q: usize, x: Pauli, sign: bool| {
            let mut o = PauliOperator::single(n, q, x);
            o.set_negative(sign);
            o
        };
        match *self {
            Gate::X(q) => conjugate_local(p, &[q], |_, is_x| if is_x { one(q, Pauli::X, false) } else { one(q, Pauli::Z, true) }),
            Gate::Y(q) => conjugate_local(p, &[q], |_, is_x| if is_x { one(q, Pauli::X, true) } else { one(q, Pauli::Z, true) }),
            Gate::Z(q) => conjugate_local(p, &[q], |_, is_x| if is_x { one(q, Pauli::X, true) } else { one(q, Pauli::Z, false) }),
            Gate::H(q) => conjugate_local(p, &[q], |_, is_x| if is_x { one(q, Pauli::Z, false) } else { one(q, Pauli::X, false) }),
            Gate::S(q) => conjugate_local(p, &[q], |_, is_x| if is_x { one(q, Pauli::Y, true) } else { one(q, Pauli::Z, false) }),
            Gate::Sdg(q) => conjugate_local(p, &[q], |_, is_x| if is_x { one(q, Pauli::Y, false) } else { one(q, Pauli::Z, false) }),
            Gate::Cnot(c, t) => conjugate_local(p, &[c, t], |q, is_x| match (q == c, is_x) {
                (true, true) => PauliOperator::on(n, [c, t], Pauli::X),
                (true, false) => one(c, Pauli::Z, false),
                (false, true) => one(t, Pauli::X, false),
                (false, false) => PauliOperator::on(n, [c, t], Pauli::Z),
            }),
            Gate::T(_) | Gate::Tdg(_) | Gate::MeasureZ(_) => panic!("not a Clifford gate: {self}"),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Y(q) => write!(f, "Y {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::H(q) => write!(f, "H {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::Sdg(q) => write!(f, "SDG {q}"),
            Gate::Cnot(c, t) => write!(f, "CNOT {c} {t}"),
            Gate::T(q) => write!(f, "T {q}"),
            Gate::Tdg(q) => write!(f, "TDG {q}"),
            Gate::MeasureZ(q) => write!(f, "MZ {q}"),
        }
    }
}

/// Applies a Clifford acting on `qubits` given the images of `X_q`, `Z_q`.
fn conjugate_local(p: &PauliOperator, qubits: &[usize], image: impl Fn(usize, bool) -> PauliOperator) -> PauliOperator {
    let mut acc = p.unsigned();
    let mut e = if p.is_negative() { 2u32 } else { 0 };
    for &q in qubits {
        acc.set(q, Pauli::I);
    }
    for &q in qubits {
        let (x, z) = p.get(q).bits();
        if x && z {
            e += 1;
        }
        if x {
            let (r, f) = acc.mul_with_phase(&image(q, true));
            acc = r;
            e += f as u32;
        }
        if z {
            let (r, f) = acc.mul_with_phase(&image(q, false));
            acc = r;
            e += f as u32;
        }
    }
    debug_assert!(e % 2 == 0, "conjugation produced a non-Hermitian image");
    acc.set_negative(e % 4 == 2);
    acc
}

/// `U† P U` for `U = Q_θ` with `θ = quarter · π/4`, `quarter = ±1`.
pub fn conjugate_by_rotation(q: &PauliOperator, quarter: i8, p: &PauliOperator) -> PauliOperator {
    if !q.anticommutes_with(p) {
        return p.clone();
    }
    let (mut r, e) = q.mul_with_phase(p);
    let e = e as i32 + 1 + if quarter < 0 { 2 } else { 0 };
    debug_assert!(e % 2 == 0);
    r.set_negative(e.rem_euclid(4) == 2);
    r
}

/// Circuit on `num_qubits` qubits. Measurements are terminal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Circuit { num_qubits, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let mut measured = vec![false; self.num_qubits];
        for (i, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= self.num_qubits) {
                return Err(Error::invalid(format!("gate {i} ({g}) uses qubit {q} of {}", self.num_qubits)));
            }
            if let Gate::Cnot(c, t) = g {
                if c == t {
                    return Err(Error::invalid(format!("gate {i} is a CNOT with equal control and target")));
                }
            }
            if let Some(&q) = qs.iter().find(|&&q| measured[q]) {
                return Err(Error::invalid(format!("gate {i} ({g}) acts on measured qubit {q}")));
            }
            if let Gate::MeasureZ(q) = g {
                measured[*q] = true;
            }
        }
        Ok(())
    }

    /// Accepts `qubits N` (optional), `# comments` and one gate per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut num_qubits = None;
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let arg = |j: usize| -> Result<usize> {
                toks.get(j)
                    .ok_or_else(|| Error::parse(i + 1, format!("missing operand in '{line}'")))?
                    .parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad qubit index in '{line}'")))
            };
            let want = |k: usize| -> Result<()> {
                if toks.len() != k + 1 {
                    return Err(Error::parse(i + 1, format!("expected {k} operand(s) in '{line}'")));
                }
                Ok(())
            };
            let name = toks[0].to_ascii_uppercase();
            let g = match name.as_str() {
                "QUBITS" => {
                    want(1)?;
                    num_qubits = Some(arg(1)?);
                    continue;
                }
                "CNOT" | "CX" => {
                    want(2)?;
                    Gate::Cnot(arg(1)?, arg(2)?)
                }
                _ => {
                    want(1)?;
                    let q = arg(1)?;
                    match name.as_str() {
                        "X" => Gate::X(q),
                        "Y" => Gate::Y(q),
                        "Z" => Gate::Z(q),
                        "H" => Gate::H(q),
                        "S" => Gate::S(q),
                        "SDG" | "S†" | "SDAG" => Gate::Sdg(q),
                        "T" => Gate::T(q),
                        "TDG" | "T†" | "TDAG" => Gate::Tdg(q),
                        "MZ" | "M" | "MEASURE" => Gate::MeasureZ(q),
                        _ => return Err(Error::parse(i + 1, format!("unknown gate '{}'", toks[0]))),
                    }
                }
            };
            gates.push(g);
        }
        let inferred = gates.iter().flat_map(|g| g.qubits()).max().map_or(0, |q| q + 1);
        let num_qubits = num_qubits.unwrap_or(inferred);
        Circuit::new(num_qubits, gates)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.num_qubits);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Strips measurements and appends `MZ` on every qubit in order. The
    /// flag is set when the input did not already end that way.
    pub fn normalized(&self) -> (Circuit, bool) {
        let body: Vec<Gate> = self.gates.iter().copied().filter(|g| !matches!(g, Gate::MeasureZ(_))).collect();
        let tail: Vec<Gate> = (0..self.num_qubits).map(Gate::MeasureZ).collect();
        let measured: BTreeSet<usize> =
            self.gates.iter().filter_map(|g| if let Gate::MeasureZ(q) = g { Some(*q) } else { None }).collect();
        let changed = measured.len() != self.num_qubits;
        if changed {
            log::warn!("circuit does not measure every qubit; completing the final Z measurements");
        }
        let mut gates = body;
        gates.extend(tail);
        (Circuit { num_qubits: self.num_qubits, gates }, changed)
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::T(_) | Gate::Tdg(_))).count()
    }
}

/// Assignment of circuit qubits to blocks. Each block holds at most `k − 1`
/// computational qubits; its `k`-th logical qubit is the ancilla.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub k: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(k: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let p = BlockPartition { k, blocks };
        p.validate()?;
        Ok(p)
    }

    /// Fills blocks of `k − 1` in qubit order.
    pub fn contiguous(num_qubits: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("blocks need k ≥ 2"));
        }
        let blocks = (0..num_qubits).collect::<Vec<_>>().chunks(k - 1).map(|c| c.to_vec()).collect();
        BlockPartition::new(k, blocks)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid("blocks need k ≥ 2"));
        }
        let mut seen = BTreeSet::new();
        for (b, qs) in self.blocks.iter().enumerate() {
            if qs.len() > self.k - 1 {
                return Err(Error::Incompatible(format!("block {b} holds {} qubits, capacity is {}", qs.len(), self.k - 1)));
            }
            for &q in qs {
                if !seen.insert(q) {
                    return Err(Error::invalid(format!("qubit {q} assigned twice")));
                }
            }
        }
        if let Some(&m) = seen.iter().next_back() {
            if m + 1 != seen.len() {
                return Err(Error::invalid("partition must cover qubits 0..K exactly"));
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, q: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&q))
    }

    /// Index of block `b`'s ancilla in the compiled register.
    pub fn ancilla(&self, b: usize) -> usize {
        self.num_qubits() + b
    }

    pub fn blocks_of(&self, p: &PauliOperator) -> Vec<usize> {
        let set: BTreeSet<usize> = p.support().into_iter().filter_map(|q| self.block_of(q)).collect();
        set.into_iter().collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: BlockPartition = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Outcome of a compatibility check.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatReport {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

pub fn check_compatibility(c: &Circuit, p: &BlockPartition, m: &BlockMap) -> CompatReport {
    let mut diagnostics = Vec::new();
    if let Err(e) = p.validate() {
        diagnostics.push(e.to_string());
    }
    if p.num_qubits() != c.num_qubits {
        diagnostics.push(format!("partition covers {} qubits, circuit has {}", p.num_qubits(), c.num_qubits));
    }
    if p.num_blocks() != m.num_blocks() {
        diagnostics.push(format!("partition has {} blocks, block map has {}", p.num_blocks(), m.num_blocks()));
    }
    for (i, g) in c.gates.iter().enumerate() {
        if let Gate::Cnot(a, b) = *g {
            match (p.block_of(a), p.block_of(b)) {
                (Some(x), Some(y)) if x != y && (x >= m.num_blocks() || y >= m.num_blocks() || !m.adjacent(x, y)) => {
                    diagnostics.push(format!("gate {i} ({g}) couples blocks {x} and {y}, which share no bridge"))
                }
                (None, _) | (_, None) => diagnostics.push(format!("gate {i} ({g}) uses an unassigned qubit")),
                _ => {}
            }
        }
    }
    CompatReport { ok: diagnostics.is_empty(), diagnostics }
}

/// `exp(-i · eighths · π/8 · axis)` with `eighths ∈ {±1, ±2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliRotation {
    pub axis: PauliOperator,
    pub eighths: i8,
    /// Index of the source gate.
    pub source: usize,
}

impl PauliRotation {
    pub fn is_clifford(&self) -> bool {
        self.eighths % 2 == 0
    }
}

/// Clifford kept aside during absorption.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordOp {
    Gate(Gate),
    /// `axis_θ` with `θ = quarter · π/4`.
    Rotation { axis: PauliOperator, quarter: i8 },
}

impl CliffordOp {
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        match self {
            CliffordOp::Gate(g) => g.conjugate(p),
            CliffordOp::Rotation { axis, quarter } => conjugate_by_rotation(axis, *quarter, p),
        }
    }

    pub fn inverse(&self) -> CliffordOp {
        match self {
            CliffordOp::Gate(g) => CliffordOp::Gate(g.inverse()),
            CliffordOp::Rotation { axis, quarter } => CliffordOp::Rotation { axis: axis.clone(), quarter: -quarter },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Rotation(PauliRotation),
    Clifford(CliffordOp),
}

/// Cross-block CNOTs become `(Z⊗X)_{π/4} · Z_c(−π/4) · X_t(−π/4)`, T gates
/// become `Z_{±π/8}`; everything else stays. Terminal measurements are dropped.
pub fn to_rotations(c: &Circuit, p: &BlockPartition) -> Vec<Step> {
    let n = c.num_qubits;
    let mut out = Vec::new();
    for (i, g) in c.gates.iter().enumerate() {
        match *g {
            Gate::T(q) => out.push(Step::Rotation(PauliRotation { axis: PauliOperator::single(n, q, Pauli::Z), eighths: 1, source: i })),
            Gate::Tdg(q) => {
                out.push(Step::Rotation(PauliRotation { axis: PauliOperator::single(n, q, Pauli::Z), eighths: -1, source: i }))
            }
            Gate::Cnot(a, b) if p.block_of(a) != p.block_of(b) => {
                let mut zx = PauliOperator::single(n, a, Pauli::Z);
                zx.set(b, Pauli::X);
                out.push(Step::Rotation(PauliRotation { axis: zx, eighths: 2, source: i }));
                out.push(Step::Clifford(CliffordOp::Rotation { axis: PauliOperator::single(n, a, Pauli::Z), quarter: -1 }));
                out.push(Step::Clifford(CliffordOp::Rotation { axis: PauliOperator::single(n, b, Pauli::X), quarter: -1 }));
            }
            Gate::MeasureZ(_) => {}
            g => out.push(Step::Clifford(CliffordOp::Gate(g))),
        }
    }
    out
}

/// Rotations with Cliffords pushed to the end and absorbed into the final
/// measurement bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorbed {
    pub num_qubits: usize,
    pub rotations: Vec<PauliRotation>,
    /// Measured in place of `Z_q`, one per qubit.
    pub final_bases: Vec<PauliOperator>,
    /// Clifford prefix length seen by each rotation.
    pub prefix: Vec<usize>,
    pub cliffords: Vec<CliffordOp>,
}

fn conjugate_through(ops: &[CliffordOp], p: &PauliOperator) -> PauliOperator {
    ops.iter().rev().fold(p.clone(), |acc, c| c.conjugate(&acc))
}

/// Moves every Clifford step past later rotations: `R_P · U = U · R_{U†PU}`.
/// Block support of each axis is preserved because the moved Cliffords are
/// in-block.
pub fn commute_and_absorb(steps: &[Step], num_qubits: usize) -> Absorbed {
    let mut cliffords = Vec::new();
    let mut rotations = Vec::new();
    let mut prefix = Vec::new();
    for s in steps {
        match s {
            Step::Clifford(c) => cliffords.push(c.clone()),
            Step::Rotation(r) => {
                rotations.push(PauliRotation { axis: conjugate_through(&cliffords, &r.axis), ..r.clone() });
                prefix.push(cliffords.len());
            }
        }
    }
    let final_bases =
        (0..num_qubits).map(|q| conjugate_through(&cliffords, &PauliOperator::single(num_qubits, q, Pauli::Z))).collect();
    Absorbed { num_qubits, rotations, final_bases, prefix, cliffords }
}

/// Undoes the conjugation of every rotation axis.
pub fn restore_axes(a: &Absorbed) -> Vec<PauliOperator> {
    a.rotations
        .iter()
        .zip(&a.prefix)
        .map(|(r, &len)| a.cliffords[..len].iter().fold(r.axis.clone(), |acc, c| c.inverse().conjugate(&acc)))
        .collect()
}

/// ASAP layer (1-based) of each T gate and cross-block CNOT after dropping
/// in-block Cliffords; 0 for other gates. Also returns the depth `Λ`.
pub fn reduced_layers(c: &Circuit, p: &BlockPartition) -> (Vec<usize>, usize) {
    let mut last = vec![0usize; c.num_qubits];
    let mut layers = vec![0; c.gates.len()];
    let mut depth = 0;
    for (i, g) in c.gates.iter().enumerate() {
        let kept = match *g {
            Gate::T(_) | Gate::Tdg(_) => true,
            Gate::Cnot(a, b) => p.block_of(a) != p.block_of(b),
            _ => false,
        };
        if !kept {
            continue;
        }
        let qs = g.qubits();
        let l = 1 + qs.iter().map(|&q| last[q]).max().unwrap_or(0);
        for q in qs {
            last[q] = l;
        }
        layers[i] = l;
        depth = depth.max(l);
    }
    (layers, depth)
}

pub fn reduced_depth(c: &Circuit, p: &BlockPartition) -> usize {
    reduced_layers(c, p).1
}

/// Greedy proper edge colouring of a multigraph in edge order.
pub fn greedy_edge_coloring(num_vertices: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); num_vertices];
    let mut colors = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        let c = (0..).find(|c| !used[a].contains(c) && !used[b].contains(c)).expect("unbounded");
        used[a].insert(c);
        used[b].insert(c);
        colors.push(c);
    }
    colors
}

/// Random circuit whose CNOTs only couple blocks adjacent in `m`.
pub fn random_compatible_circuit(p: &BlockPartition, m: &BlockMap, gates: usize, seed: u64) -> Circuit {
    let mut rng = rng_for(seed, "random-circuit");
    let n = p.num_qubits();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let (x, y) = (p.block_of(a).unwrap(), p.block_of(b).unwrap());
            if x == y || m.adjacent(x, y) {
                pairs.push((a, b));
            }
        }
    }
    let mut out = Vec::with_capacity(gates + n);
    for _ in 0..gates {
        let q = rng.gen_range(0..n);
        let g = match rng.gen_range(0..10) {
            0 => Gate::H(q),
            1 => Gate::S(q),
            2 => Gate::Sdg(q),
            3 => [Gate::X(q), Gate::Y(q), Gate::Z(q)][rng.gen_range(0..3)],
            4 | 5 => Gate::T(q),
            6 => Gate::Tdg(q),
            _ if !pairs.is_empty() => {
                let (a, b) = pairs[rng.gen_range(0..pairs.len())];
                Gate::Cnot(a, b)
            }
            _ => Gate::H(q),
        };
        out.push(g);
    }
    out.extend((0..n).map(Gate::MeasureZ));
    Circuit { num_qubits: n, gates: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_conjugations() {
        assert_eq!(Gate::H(0).conjugate(&op("X")), op("Z"));
        assert_eq!(Gate::H(0).conjugate(&op("Y")), op("-Y"));
        assert_eq!(Gate::S(0).conjugate(&op("X")), op("-Y"));
        assert_eq!(Gate::S(0).conjugate(&op("Y")), op("X"));
        assert_eq!(Gate::Sdg(0).conjugate(&op("Y")), op("-X"));
        assert_eq!(Gate::X(0).conjugate(&op("Y")), op("-Y"));
        assert_eq!(Gate::Cnot(0, 1).conjugate(&op("XI")), op("XX"));
        assert_eq!(Gate::Cnot(0, 1).conjugate(&op("IZ")), op("ZZ"));
        assert_eq!(Gate::Cnot(0, 1).conjugate(&op("YI")), op("YX"));
        assert_eq!(Gate::Cnot(0, 1).conjugate(&op("IY")), op("ZY"));
    }

    #[test]
    fn quarter_rotation_matches_s() {
        for p in ["X", "Y", "Z", "-X"] {
            let r = conjugate_by_rotation(&op("Z"), 1, &op(p));
            assert_eq!(r, Gate::S(0).conjugate(&op(p)), "{p}");
        }
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let c = Circuit::parse("# demo\nH 0\nCNOT 0 1\nT 1\nMZ 0\nMZ 1\n").unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(Circuit::parse(&c.to_text()).unwrap(), c);
        assert!(matches!(Circuit::parse("H 0\nFOO 1"), Err(Error::Parse { line: 2, .. })));
        assert!(Circuit::parse("MZ 0\nH 0").is_err());
        let (full, changed) = Circuit::parse("qubits 3\nT 0").unwrap().normalized();
        assert!(changed);
        assert_eq!(full.gates.len(), 4);
    }

    #[test]
    fn compatibility_flags_non_adjacent_blocks() {
        let p = BlockPartition::contiguous(6, 3).unwrap();
        let m = BlockMap::line(3);
        let c = Circuit::parse("qubits 6\nCNOT 0 2\nCNOT 1 5\n").unwrap();
        let r = check_compatibility(&c, &p, &m);
        assert!(!r.ok);
        assert_eq!(r.diagnostics.len(), 1);
        assert!(r.diagnostics[0].contains("gate 1"));
    }

    #[test]
    fn reduced_depth_ignores_in_block_cliffords() {
        let p = BlockPartition::contiguous(4, 3).unwrap();
        let c = Circuit::parse("qubits 4\nT 0\nCNOT 0 1\nH 1\nT 1\nCNOT 1 2\nT 3\n").unwrap();
        assert_eq!(reduced_depth(&c, &p), 2);
    }
}
