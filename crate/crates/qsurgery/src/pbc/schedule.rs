use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    check_compatibility, commute_and_absorb, greedy_edge_coloring, reduced_layers, to_rotations, Absorbed, BlockPartition,
    Circuit, PauliRotation,
};
use crate::archkit::BlockMap;
use crate::error::{Error, Result};
use crate::paulicode::{Pauli, PauliOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AncillaRef {
    Block(usize),
    Magic,
}

/// How a rotation is realised by two measurements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GadgetKind {
    /// Measure `P ⊗ Y_a`, then the ancilla in the basis it is not already in.
    /// The ancilla keeps its state between gadgets.
    Quarter { ancilla_block: usize, before: Pauli },
    /// Consume `|T⟩`: measure `P ⊗ Z_m`, then `X_m`.
    Eighth,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gadget {
    pub rotation: PauliRotation,
    pub blocks: Vec<usize>,
    pub kind: GadgetKind,
}

impl Gadget {
    pub fn consumes_magic(&self) -> bool {
        matches!(self.kind, GadgetKind::Eighth)
    }

    /// The two measurements, computational part first.
    pub fn measurements(&self, index: usize) -> [ScheduledMeasurement; 2] {
        let (anc, first, second) = match self.kind {
            GadgetKind::Quarter { ancilla_block, before } => {
                let after = if before == Pauli::Z { Pauli::X } else { Pauli::Z };
                (AncillaRef::Block(ancilla_block), Pauli::Y, after)
            }
            GadgetKind::Eighth => (AncillaRef::Magic, Pauli::Z, Pauli::X),
        };
        let anc_blocks = match anc {
            AncillaRef::Block(b) => vec![b],
            AncillaRef::Magic => Vec::new(),
        };
        [
            ScheduledMeasurement {
                gadget: index,
                step: 0,
                axis: Some(self.rotation.axis.clone()),
                ancilla: Some((anc, first)),
                blocks: self.blocks.clone(),
                consumes_magic: self.consumes_magic(),
            },
            ScheduledMeasurement {
                gadget: index,
                step: 1,
                axis: None,
                ancilla: Some((anc, second)),
                blocks: anc_blocks,
                consumes_magic: false,
            },
        ]
    }
}

/// Rotation angle in units of `π/4` realised by a quarter gadget, given the
/// ancilla's prior eigenvalue `s_a` and the two outcomes (`±1`).
pub fn quarter_achieved(before: Pauli, s_a: i8, m1: i8, m2: i8) -> i8 {
    let sigma = if before == Pauli::Z { 1 } else { -1 };
    -m1 * sigma * s_a * m2
}

/// Rotation angle mod 8 in units of `π/8` realised by an eighth gadget.
pub fn eighth_achieved(m1: i8, m2: i8) -> i8 {
    match (m1, m2) {
        (1, 1) => 1,
        (1, _) => 5,
        (_, 1) => 7,
        _ => 3,
    }
}

/// Frame correction in units of `π/8`: 0, 2, 4 or 6.
pub fn correction_eighths(target: i8, achieved: i8) -> i8 {
    (target - achieved).rem_euclid(8)
}

/// Maps rotations onto gadgets. Quarter gadgets use the ancilla of their
/// lowest block; ancilla bases are assigned by [`serialize`].
pub fn lower_to_measurements(a: &Absorbed, p: &BlockPartition) -> Result<Vec<Gadget>> {
    a.rotations
        .iter()
        .map(|r| {
            let blocks = p.blocks_of(&r.axis);
            let kind = match r.eighths.abs() {
                1 => {
                    if blocks.len() != 1 {
                        return Err(Error::Incompatible(format!("π/8 rotation from gate {} spans blocks {blocks:?}", r.source)));
                    }
                    GadgetKind::Eighth
                }
                2 => GadgetKind::Quarter { ancilla_block: blocks[0], before: Pauli::Z },
                e => return Err(Error::invalid(format!("unsupported rotation angle {e}π/8"))),
            };
            Ok(Gadget { rotation: r.clone(), blocks, kind })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledMeasurement {
    pub gadget: usize,
    pub step: u8,
    /// Computational part, before frame updates.
    pub axis: Option<PauliOperator>,
    pub ancilla: Option<(AncillaRef, Pauli)>,
    pub blocks: Vec<usize>,
    pub consumes_magic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalMeasurement {
    pub block: usize,
    pub qubit: usize,
    pub axis: PauliOperator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSchedule {
    pub k: usize,
    pub num_qubits: usize,
    pub num_blocks: usize,
    pub lambda: usize,
    pub gadgets: Vec<Gadget>,
    /// Gadget indices per colour class, in execution order.
    pub classes: Vec<Vec<usize>>,
    /// Two layers per colour class.
    pub layers: Vec<Vec<ScheduledMeasurement>>,
    pub final_rounds: Vec<Vec<FinalMeasurement>>,
    pub depth: usize,
    pub depth_bound: usize,
    /// Colours the greedy edge colouring needs per reduced layer.
    pub layer_colors: Vec<usize>,
    pub magic_count: usize,
}

impl MeasurementSchedule {
    pub fn execution_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes.iter().flatten().copied()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// List schedule in circuit order. A gadget goes into the first colour class
/// after every earlier anticommuting gadget and free on all its blocks.
pub fn serialize(
    a: &Absorbed,
    mut gadgets: Vec<Gadget>,
    p: &BlockPartition,
    m: &BlockMap,
    source_layers: &[usize],
    lambda: usize,
) -> Result<MeasurementSchedule> {
    for (i, g) in gadgets.iter().enumerate() {
        match g.blocks.as_slice() {
            [_] => {}
            [x, y] if m.adjacent(*x, *y) => {}
            bs => return Err(Error::Incompatible(format!("gadget {i} spans blocks {bs:?} without a bridge"))),
        }
    }
    let mut class_of: Vec<usize> = Vec::with_capacity(gadgets.len());
    let mut busy: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p.num_blocks()];
    for i in 0..gadgets.len() {
        let lo = (0..i)
            .filter(|&j| gadgets[j].rotation.axis.anticommutes_with(&gadgets[i].rotation.axis))
            .map(|j| class_of[j] + 1)
            .max()
            .unwrap_or(0);
        let c = (lo..).find(|c| gadgets[i].blocks.iter().all(|&b| !busy[b].contains(c))).expect("unbounded");
        for &b in &gadgets[i].blocks {
            busy[b].insert(c);
        }
        class_of.push(c);
    }
    let num_classes = class_of.iter().map(|c| c + 1).max().unwrap_or(0);
    let mut classes = vec![Vec::new(); num_classes];
    for (i, &c) in class_of.iter().enumerate() {
        classes[c].push(i);
    }
    let mut basis = vec![Pauli::Z; p.num_blocks()];
    for &i in classes.iter().flatten() {
        if let GadgetKind::Quarter { ancilla_block, before } = &mut gadgets[i].kind {
            *before = basis[*ancilla_block];
            basis[*ancilla_block] = if *before == Pauli::Z { Pauli::X } else { Pauli::Z };
        }
    }
    let mut layers = Vec::with_capacity(2 * num_classes);
    for class in &classes {
        let ms: Vec<[ScheduledMeasurement; 2]> = class.iter().map(|&i| gadgets[i].measurements(i)).collect();
        layers.push(ms.iter().map(|m| m[0].clone()).collect());
        layers.push(ms.iter().map(|m| m[1].clone()).collect());
    }
    let rounds = p.blocks.iter().map(|b| b.len()).max().unwrap_or(0);
    let final_rounds: Vec<Vec<FinalMeasurement>> = (0..rounds)
        .map(|r| {
            p.blocks
                .iter()
                .enumerate()
                .filter_map(|(b, qs)| qs.get(r).map(|&q| FinalMeasurement { block: b, qubit: q, axis: a.final_bases[q].clone() }))
                .collect()
        })
        .collect();
    let mut layer_colors = vec![0; lambda];
    for (l, colors) in layer_colors.iter_mut().enumerate() {
        let members: Vec<&Gadget> = gadgets.iter().filter(|g| source_layers[g.rotation.source] == l + 1).collect();
        let edges: Vec<(usize, usize)> =
            members.iter().filter(|g| g.blocks.len() == 2).map(|g| (g.blocks[0], g.blocks[1])).collect();
        let ec = greedy_edge_coloring(p.num_blocks(), &edges).into_iter().map(|c| c + 1).max().unwrap_or(0);
        let mut load = vec![0; p.num_blocks()];
        for g in &members {
            for &b in &g.blocks {
                load[b] += 1;
            }
        }
        *colors = ec.max(load.into_iter().max().unwrap_or(0));
    }
    let depth = layers.len() + final_rounds.len();
    let depth_bound = 4 * p.k * lambda + p.k;
    if depth >= depth_bound {
        return Err(Error::invalid(format!("schedule depth {depth} reaches the bound {depth_bound}")));
    }
    let magic_count = gadgets.iter().filter(|g| g.consumes_magic()).count();
    Ok(MeasurementSchedule {
        k: p.k,
        num_qubits: p.num_qubits(),
        num_blocks: p.num_blocks(),
        lambda,
        gadgets,
        classes,
        layers,
        final_rounds,
        depth,
        depth_bound,
        layer_colors,
        magic_count,
    })
}

/// Every layer is block-disjoint and cross-block measurements follow bridges.
pub fn validate_schedule(s: &MeasurementSchedule, m: &BlockMap) -> Result<()> {
    for (i, layer) in s.layers.iter().enumerate() {
        let mut used = BTreeSet::new();
        for ms in layer {
            for &b in &ms.blocks {
                if !used.insert(b) {
                    return Err(Error::invalid(format!("layer {i} uses block {b} twice")));
                }
            }
            if let [x, y] = ms.blocks.as_slice() {
                if !m.adjacent(*x, *y) {
                    return Err(Error::invalid(format!("layer {i} measures across non-adjacent blocks {x}, {y}")));
                }
            } else if ms.blocks.len() > 2 {
                return Err(Error::invalid(format!("layer {i} touches {} blocks at once", ms.blocks.len())));
            }
        }
    }
    for (r, round) in s.final_rounds.iter().enumerate() {
        let blocks: BTreeSet<usize> = round.iter().map(|f| f.block).collect();
        if blocks.len() != round.len() {
            return Err(Error::invalid(format!("final round {r} measures a block twice")));
        }
    }
    Ok(())
}

/// Circuit, absorption and schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Compilation {
    pub circuit: Circuit,
    pub partition: BlockPartition,
    pub absorbed: Absorbed,
    pub schedule: MeasurementSchedule,
    pub warnings: Vec<String>,
}

pub fn compile(c: &Circuit, p: &BlockPartition, m: &BlockMap) -> Result<Compilation> {
    let (circuit, completed) = c.normalized();
    let mut warnings = Vec::new();
    if completed {
        warnings.push("appended final Z measurements".to_string());
    }
    let report = check_compatibility(&circuit, p, m);
    if !report.ok {
        return Err(Error::Incompatible(report.diagnostics.join("; ")));
    }
    let steps = to_rotations(&circuit, p);
    let absorbed = commute_and_absorb(&steps, circuit.num_qubits);
    let gadgets = lower_to_measurements(&absorbed, p)?;
    let (source_layers, lambda) = reduced_layers(&circuit, p);
    let schedule = serialize(&absorbed, gadgets, p, m, &source_layers, lambda)?;
    Ok(Compilation { circuit, partition: p.clone(), absorbed, schedule, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CacheModel {
    /// Every layer waits for magic production.
    Small,
    /// Per-block cache of `capacity` states; a slot is refilled after the
    /// gadget that emptied it finishes, taking `t_magic` cycles.
    Large { capacity: usize, prefilled: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Runtime {
    pub model: CacheModel,
    pub t_magic: u64,
    pub depth: u64,
    pub stall_events: u64,
    pub stall_cycles: u64,
    pub total_cycles: u64,
}

pub fn estimate_runtime(s: &MeasurementSchedule, t_magic: u64, model: CacheModel) -> Runtime {
    let depth = s.depth as u64;
    let (capacity, prefilled) = match model {
        CacheModel::Small => {
            return Runtime { model, t_magic, depth, stall_events: 0, stall_cycles: 0, total_cycles: depth * t_magic.max(1) };
        }
        CacheModel::Large { capacity, prefilled } => (capacity, prefilled),
    };
    let nb = s.num_blocks;
    let infinite = capacity == usize::MAX;
    let mut cache: Vec<usize> = vec![if prefilled || infinite { capacity } else { 0 }; nb];
    let mut pending: Vec<usize> = vec![if prefilled || infinite { 0 } else { capacity }; nb];
    let mut done_at: Vec<Option<u64>> = vec![None; nb];
    let mut now = 0u64;
    let (mut events, mut stalls) = (0u64, 0u64);
    let start = |b: usize, at: u64, pending: &mut Vec<usize>, done_at: &mut Vec<Option<u64>>| {
        if done_at[b].is_none() && pending[b] > 0 {
            pending[b] -= 1;
            done_at[b] = Some(at + t_magic);
        }
    };
    let settle = |b: usize, upto: u64, cache: &mut Vec<usize>, pending: &mut Vec<usize>, done_at: &mut Vec<Option<u64>>| {
        while let Some(t) = done_at[b] {
            if t > upto {
                break;
            }
            cache[b] += 1;
            done_at[b] = None;
            if pending[b] > 0 {
                pending[b] -= 1;
                done_at[b] = Some(t + t_magic);
            }
        }
    };
    for b in 0..nb {
        start(b, 0, &mut pending, &mut done_at);
    }
    for layer in &s.layers {
        for ms in layer.iter().filter(|m| m.consumes_magic) {
            if infinite {
                continue;
            }
            let b = ms.blocks[0];
            settle(b, now, &mut cache, &mut pending, &mut done_at);
            if cache[b] == 0 {
                let t = done_at[b].expect("a freed slot is always being refilled");
                if t > now {
                    events += 1;
                    stalls += t - now;
                    now = t;
                }
                settle(b, now, &mut cache, &mut pending, &mut done_at);
            }
            cache[b] -= 1;
        }
        now += 1;
        for ms in layer.iter().filter(|m| m.step == 1 && s.gadgets[m.gadget].consumes_magic()) {
            if infinite {
                continue;
            }
            let b = s.gadgets[ms.gadget].blocks[0];
            pending[b] += 1;
            start(b, now, &mut pending, &mut done_at);
        }
    }
    let total_cycles = now + s.final_rounds.len() as u64;
    Runtime { model, t_magic, depth, stall_events: events, stall_cycles: stalls, total_cycles }
}
