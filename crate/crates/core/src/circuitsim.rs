//! Gate-level simulation of the sampling algorithm: qubit-register encoding
//! of fusion paths, q-6j and diagonal-phase gates, controlled braid-word
//! circuits and Hadamard-test estimation.
//!
//! The register packs `4m-3` blocks of `⌈log₂(k+1)⌉` qubits: the `2m` strand
//! colors left to right, then the `2m-3` internal labels in plat order (the
//! degenerate two-strand register is a single channel block). Every block
//! stores a twice-spin; codes above `k` are non-physical.
//!
//! Gates act per block. A generator letter compiles to one diagonal-phase
//! gate (conditioned on the two strand-color blocks, which it also swaps);
//! an even letter wraps its phase gate in the `3m-5` q-6j moves of the
//! duality decomposition and their reversal. A q-6j gate touches five
//! blocks: four context labels and the channel it recouples. For each
//! context the physical channels transform by the elementary duality block;
//! the remaining codes are carried by the order-preserving bijection onto
//! the codes unreachable on the output side, which keeps the gate unitary
//! without mixing the admissible sector into the rest.
//!
//! Sampling draws ±1 outcomes from the exact ancilla distribution of the
//! controlled-circuit state, so a seeded run is bit-reproducible.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::braid::ColoredBraidWord;
use crate::invariant::{evaluate, qdim_product, InvariantError};
use crate::kaulrep::tree::{decomposition_moves, even_channel_slot, DualityMove, EdgeId};
use crate::kaulrep::{enumerate_basis, half_twist_eigenvalue, FusionPath, KaulError};
use crate::linalg::CMatrix;
use crate::qarith::{Cplx, Level, Spin};
use crate::recoupling::{admissible, admissible_channels, SixJCache};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("label {label} does not fit a block of width {width}")]
    Overflow { label: u32, width: usize },
    #[error("simulation needs {needed} qubits, over the limit of {limit} (set PLATJONES_MAX_QUBITS to override)")]
    TooManyQubits { needed: usize, limit: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Kaul(#[from] KaulError),
}

/// Simulation limits; the qubit guard counts the ancilla.
#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    pub max_qubits: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { max_qubits: 24 }
    }
}

/// What one register block stores.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockRole {
    /// Color of strand `strand` (zero-based).
    Color { strand: usize },
    /// Internal label in plat-tree slot `slot`.
    Internal { slot: usize },
}

/// Block structure of the encoding register.
#[derive(Clone, Debug)]
pub struct RegisterLayout {
    pub m: usize,
    pub level: Level,
    pub block_width: usize,
    pub blocks: Vec<BlockRole>,
}

/// Build the canonical register for `2m` strands at one level:
/// `4m-3` blocks of `⌈log₂(k+1)⌉` qubits (one block for two strands).
pub fn layout(m: usize, level: Level) -> RegisterLayout {
    assert!(m >= 1);
    // ⌈log₂(k+1)⌉: bits needed to store a twice-spin up to k
    let block_width = {
        let mut w = 1usize;
        while (1usize << w) < (level.k() as usize + 1) {
            w += 1;
        }
        w
    };
    let mut blocks = Vec::new();
    if m == 1 {
        // degenerate two-strand register: the single channel label; the
        // colors are classical side data
        blocks.push(BlockRole::Internal { slot: 0 });
    } else {
        for strand in 0..2 * m {
            blocks.push(BlockRole::Color { strand });
        }
        for slot in 0..2 * m - 3 {
            blocks.push(BlockRole::Internal { slot });
        }
    }
    debug_assert_eq!(blocks.len(), 4 * m - 3);
    RegisterLayout { m, level, block_width, blocks }
}

impl RegisterLayout {
    /// Qubits for the register alone.
    pub fn total_qubits(&self) -> usize {
        self.blocks.len() * self.block_width
    }

    /// Register plus the Hadamard-test ancilla.
    pub fn qubits_with_ancilla(&self) -> usize {
        self.total_qubits() + 1
    }

    /// Register block index of a strand color (layouts with `m ≥ 2`).
    pub fn color_block(&self, strand: usize) -> usize {
        debug_assert!(self.m >= 2);
        strand
    }

    /// Register block index of an internal slot.
    pub fn internal_block(&self, slot: usize) -> usize {
        if self.m == 1 {
            0
        } else {
            2 * self.m + slot
        }
    }

    fn block_of(&self, e: EdgeId) -> usize {
        match e {
            EdgeId::Leaf(strand) => self.color_block(strand),
            EdgeId::Internal(slot) => self.internal_block(slot),
        }
    }

    pub fn read_block(&self, index: u64, block: usize) -> u32 {
        let mask = (1u64 << self.block_width) - 1;
        ((index >> (block * self.block_width)) & mask) as u32
    }

    pub fn write_block(&self, index: u64, block: usize, value: u32) -> u64 {
        let shift = block * self.block_width;
        let mask = ((1u64 << self.block_width) - 1) << shift;
        (index & !mask) | ((u64::from(value) << shift) & mask)
    }
}

/// Computational-basis index of an encoded fusion path. Injective on
/// admissible paths; the all-zero path encodes to the colors alone (index 0
/// when every color is 0, and exactly 0 for the two-strand register).
pub fn encode_path(layout: &RegisterLayout, path: &FusionPath) -> Result<u64, CircuitError> {
    let capacity = 1u32 << layout.block_width;
    let mut index = 0u64;
    let labels = path.independent_labels();
    for (block, role) in layout.blocks.iter().enumerate() {
        let value = match role {
            BlockRole::Color { strand } => path.colors[*strand].twice(),
            BlockRole::Internal { slot } => labels[*slot].twice(),
        };
        if value >= capacity {
            return Err(CircuitError::Overflow { label: value, width: layout.block_width });
        }
        index = layout.write_block(index, block, value);
    }
    Ok(index)
}

/// Decode a basis index back into block values (colors, internal labels).
pub fn decode_blocks(layout: &RegisterLayout, index: u64) -> (Vec<u32>, Vec<u32>) {
    let mut colors = vec![0u32; if layout.m == 1 { 0 } else { 2 * layout.m }];
    let mut internals = vec![0u32; if layout.m == 1 { 1 } else { 2 * layout.m - 3 }];
    for (block, role) in layout.blocks.iter().enumerate() {
        let v = layout.read_block(index, block);
        match role {
            BlockRole::Color { strand } => colors[*strand] = v,
            BlockRole::Internal { slot } => internals[*slot] = v,
        }
    }
    (colors, internals)
}

/// A diagonal-phase gate: applies a channel-conditioned phase and swaps the
/// two strand-color blocks of the crossing (an exact no-op on equal colors).
#[derive(Clone, Debug)]
pub struct PhaseGate {
    /// Color blocks exchanged by the crossing (`None` for the two-strand
    /// register, whose colors are classical).
    pub swap: Option<(usize, usize)>,
    pub channel_block: usize,
    /// Slice colors the phase is conditioned on, as twice-spins.
    expected: Option<(u32, u32)>,
    /// Phase per channel code; identity on non-physical codes.
    phases: Vec<Cplx>,
}

/// A q-6j gate: one duality move, block-diagonal over the four context
/// blocks, acting on the channel block.
#[derive(Clone, Debug)]
pub struct QSixJGate {
    pub context_blocks: [usize; 4],
    pub target_block: usize,
    /// Context values (twice-spins) → unitary over the channel codes.
    /// Missing contexts act as the identity.
    tables: HashMap<[u32; 4], CMatrix>,
}

/// One gate of a compiled circuit.
#[derive(Clone, Debug)]
pub enum GateOp {
    DiagonalPhase(PhaseGate),
    QSixJ(QSixJGate),
    Controlled(Box<GateOp>),
}

impl GateOp {
    pub fn kind_name(&self) -> &'static str {
        match self {
            GateOp::DiagonalPhase(_) => "diagonal-phase",
            GateOp::QSixJ(_) => "q6j",
            GateOp::Controlled(_) => "controlled",
        }
    }

    /// Register blocks the gate touches.
    pub fn blocks(&self) -> Vec<usize> {
        match self {
            GateOp::DiagonalPhase(g) => {
                let mut v = Vec::new();
                if let Some((a, b)) = g.swap {
                    v.push(a);
                    v.push(b);
                }
                v.push(g.channel_block);
                v
            }
            GateOp::QSixJ(g) => {
                let mut v = g.context_blocks.to_vec();
                v.push(g.target_block);
                v
            }
            GateOp::Controlled(inner) => inner.blocks(),
        }
    }

    pub fn controlled(self) -> GateOp {
        GateOp::Controlled(Box::new(self))
    }

    /// The inverse gate.
    pub fn reversed(&self) -> GateOp {
        match self {
            GateOp::DiagonalPhase(g) => GateOp::DiagonalPhase(PhaseGate {
                swap: g.swap,
                channel_block: g.channel_block,
                // the inverse acts after the swap, so the conditioning pair
                // is exchanged
                expected: g.expected.map(|(a, b)| (b, a)),
                phases: g.phases.iter().map(|z| z.conj()).collect(),
            }),
            GateOp::QSixJ(g) => GateOp::QSixJ(QSixJGate {
                context_blocks: g.context_blocks,
                target_block: g.target_block,
                tables: g
                    .tables
                    .iter()
                    .map(|(ctx, m)| (*ctx, m.dagger()))
                    .collect(),
            }),
            GateOp::Controlled(inner) => GateOp::Controlled(Box::new(inner.reversed())),
        }
    }

    /// `‖UU†−I‖_max` over the full register unitary. The gate is
    /// block-diagonal over untouched blocks and contexts, so the defect is
    /// the worst defect among the per-context actions.
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            // a permutation composed with unit phases: defect is the worst
            // deviation of any phase from unit modulus
            GateOp::DiagonalPhase(g) => g
                .phases
                .iter()
                .map(|z| (z.norm() - 1.0).abs())
                .fold(0.0, f64::max),
            GateOp::QSixJ(g) => g
                .tables
                .values()
                .map(|m| m.unitarity_defect())
                .fold(0.0, f64::max),
            GateOp::Controlled(inner) => inner.unitarity_defect(),
        }
    }

    /// Materialize the dense unitary on the touched sub-register (test-scale
    /// layouts only).
    pub fn dense_unitary(&self, layout: &RegisterLayout) -> CMatrix {
        let blocks = self.blocks();
        let dim = 1usize << (blocks.len() * layout.block_width);
        // basis: local index packs the touched blocks in `blocks` order
        let mut out = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            // scatter the local index into a full register index
            let mut full = 0u64;
            for (i, &b) in blocks.iter().enumerate() {
                let v = (col >> (i * layout.block_width)) as u32
                    & ((1u32 << layout.block_width) - 1);
                full = layout.write_block(full, b, v);
            }
            let mut state = HashMap::new();
            state.insert(full, Cplx::new(1.0, 0.0));
            let state = apply_gate_sparse(layout, self, &state);
            for (idx, amp) in state {
                let mut local = 0usize;
                for (i, &b) in blocks.iter().enumerate() {
                    local |= (layout.read_block(idx, b) as usize) << (i * layout.block_width);
                }
                out[(local, col)] += amp;
            }
        }
        out
    }
}

/// Diagonal-phase gate for one generator letter at a classical slice.
fn twist_gate(
    level: Level,
    layout: &RegisterLayout,
    left: (Spin, bool),
    right: (Spin, bool),
    strand: usize,
    channel_slot: usize,
    inverse: bool,
) -> Result<PhaseGate, KaulError> {
    let parallel = left.1 == right.1;
    let crossing_inverse = if parallel { inverse } else { !inverse };
    let codes = 1u32 << layout.block_width;
    let mut phases = vec![Cplx::new(1.0, 0.0); codes as usize];
    for t in 0..codes.min(level.k() + 1) {
        let channel = Spin::from_twice(t);
        if admissible(level, left.0, right.0, channel) {
            phases[t as usize] = half_twist_eigenvalue(
                level,
                left.0,
                right.0,
                channel,
                parallel,
                crossing_inverse,
            )?;
        }
    }
    let (swap, expected) = if layout.m == 1 {
        (None, None)
    } else {
        (
            Some((layout.color_block(strand - 1), layout.color_block(strand))),
            Some((left.0.twice(), right.0.twice())),
        )
    };
    Ok(PhaseGate {
        swap,
        channel_block: layout.internal_block(channel_slot),
        expected,
        phases,
    })
}

/// Build the q-6j gate realizing one duality move.
fn qsixj_gate(cache: &SixJCache, layout: &RegisterLayout, mv: &DualityMove) -> QSixJGate {
    let level = cache.level();
    let codes = 1u32 << layout.block_width;
    let mut tables = HashMap::new();
    let spins: Vec<Spin> = (0..codes).map(Spin::from_twice).collect();
    for a in 0..codes {
        for b in 0..codes {
            for c in 0..codes {
                for d in 0..codes {
                    let ctx = [a, b, c, d];
                    if ctx.iter().any(|&v| v > level.k()) {
                        continue; // non-physical context: identity
                    }
                    let (sa, sb, sc, sd) = (
                        spins[a as usize],
                        spins[b as usize],
                        spins[c as usize],
                        spins[d as usize],
                    );
                    let adm_x: Vec<u32> = admissible_channels(level, sa, sb)
                        .into_iter()
                        .filter(|&t| admissible(level, sc, sd, t))
                        .map(|t| t.twice())
                        .collect();
                    let adm_y: Vec<u32> = admissible_channels(level, sb, sc)
                        .into_iter()
                        .filter(|&t| admissible(level, sd, sa, t))
                        .map(|t| t.twice())
                        .collect();
                    if adm_x.is_empty() && adm_y.is_empty() {
                        continue;
                    }
                    debug_assert_eq!(
                        adm_x.len(),
                        adm_y.len(),
                        "channel counts must agree across the move"
                    );
                    let in_x = |v: u32| adm_x.contains(&v);
                    let in_y = |v: u32| adm_y.contains(&v);
                    let rest_x: Vec<u32> = (0..codes).filter(|&v| !in_x(v)).collect();
                    let rest_y: Vec<u32> = (0..codes).filter(|&v| !in_y(v)).collect();
                    let mut mat = CMatrix::zeros(codes as usize, codes as usize);
                    for &x in &adm_x {
                        for &y in &adm_y {
                            let f = cache.unitarized(
                                sa,
                                sb,
                                sc,
                                sd,
                                Spin::from_twice(x),
                                Spin::from_twice(y),
                            );
                            mat[(y as usize, x as usize)] = Cplx::new(f, 0.0);
                        }
                    }
                    for (&x, &y) in rest_x.iter().zip(rest_y.iter()) {
                        mat[(y as usize, x as usize)] = Cplx::new(1.0, 0.0);
                    }
                    tables.insert(ctx, mat);
                }
            }
        }
    }
    QSixJGate {
        context_blocks: [
            layout.block_of(mv.quad[0]),
            layout.block_of(mv.quad[1]),
            layout.block_of(mv.quad[2]),
            layout.block_of(mv.quad[3]),
        ],
        target_block: layout.internal_block(mv.target),
        tables,
    }
}

/// A compiled braid circuit, plus the per-letter gate accounting.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    pub layout: RegisterLayout,
    pub gates: Vec<GateOp>,
    /// For each letter: (letter, number of q6j gates, number of phase gates).
    pub per_letter: Vec<(i32, usize, usize)>,
}

/// Reusable compilation state for one `(level, 2m)` register: the q-6j move
/// gates are independent of the braid word and coloring, so building them
/// once amortizes across many words.
pub struct Compiler {
    level: Level,
    layout: RegisterLayout,
    move_gates: Vec<QSixJGate>,
}

impl Compiler {
    pub fn new(level: Level, m: usize) -> Compiler {
        let layout = layout(m, level);
        let cache = SixJCache::new(level);
        let move_list = if m >= 2 { decomposition_moves(m) } else { Vec::new() };
        let move_gates = move_list.iter().map(|mv| qsixj_gate(&cache, &layout, mv)).collect();
        Compiler { level, layout, move_gates }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    /// Gate list realizing the braid word on the encoded register: one
    /// diagonal-phase gate per odd letter, and the `3m-5` duality moves, the
    /// phase gate, and the reversed moves for each even letter.
    pub fn compile(&self, braid: &ColoredBraidWord) -> Result<CompiledCircuit, CircuitError> {
        let m = braid.pairs();
        assert_eq!(2 * m, 2 * self.layout.m, "braid width must match the register");
        for s in braid.bottom() {
            if !self.level.allows(s.color) {
                return Err(CircuitError::Invariant(InvariantError::Truncation {
                    color: s.color,
                    k: self.level.k(),
                }));
            }
        }
        let mut gates = Vec::new();
        let mut per_letter = Vec::new();
        let mut slice = braid.bottom_slice();
        for &letter in braid.word() {
            let index = letter.unsigned_abs() as usize;
            let inverse = letter < 0;
            let left = (slice.strands[index - 1].color, slice.strands[index - 1].up);
            let right = (slice.strands[index].color, slice.strands[index].up);
            if index % 2 == 1 {
                let pair = (index + 1) / 2;
                let slot = if m <= 2 { 0 } else { pair - 1 };
                gates.push(GateOp::DiagonalPhase(twist_gate(
                    self.level, &self.layout, left, right, index, slot, inverse,
                )?));
                per_letter.push((letter, 0, 1));
            } else {
                let l = index / 2;
                let slot = even_channel_slot(m, l);
                for g in &self.move_gates {
                    gates.push(GateOp::QSixJ(g.clone()));
                }
                gates.push(GateOp::DiagonalPhase(twist_gate(
                    self.level, &self.layout, left, right, index, slot, inverse,
                )?));
                for g in self.move_gates.iter().rev() {
                    gates.push(GateOp::QSixJ(g.clone()).reversed());
                }
                per_letter.push((letter, 2 * self.move_gates.len(), 1));
            }
            slice.strands.swap(index - 1, index);
        }
        Ok(CompiledCircuit {
            layout: self.layout.clone(),
            gates,
            per_letter,
        })
    }
}

/// One-shot compilation of a braid word.
pub fn compile_braid(
    level: Level,
    braid: &ColoredBraidWord,
) -> Result<CompiledCircuit, CircuitError> {
    Compiler::new(level, braid.pairs()).compile(braid)
}

/// Apply a gate to a dense statevector (optionally controlled on a qubit).
pub fn apply_gate_dense(
    layout: &RegisterLayout,
    gate: &GateOp,
    state: &[Cplx],
    control_bit: Option<usize>,
) -> Vec<Cplx> {
    match gate {
        GateOp::Controlled(inner) => {
            // by convention the outermost controlled wrapper targets the
            // ancilla, the highest qubit
            let bit = control_bit.unwrap_or(layout.total_qubits());
            apply_gate_dense(layout, inner, state, Some(bit))
        }
        _ => {
            let mut out = vec![Cplx::new(0.0, 0.0); state.len()];
            for (idx, &amp) in state.iter().enumerate() {
                if amp == Cplx::new(0.0, 0.0) {
                    continue;
                }
                let idx64 = idx as u64;
                if let Some(bit) = control_bit {
                    if (idx64 >> bit) & 1 == 0 {
                        out[idx] += amp;
                        continue;
                    }
                }
                scatter(layout, gate, idx64, amp, |target, value| {
                    out[target as usize] += value;
                });
            }
            out
        }
    }
}

/// Apply a gate to a sparse statevector.
pub fn apply_gate_sparse(
    layout: &RegisterLayout,
    gate: &GateOp,
    state: &HashMap<u64, Cplx>,
) -> HashMap<u64, Cplx> {
    let mut out: HashMap<u64, Cplx> = HashMap::new();
    for (&idx, &amp) in state {
        match gate {
            GateOp::Controlled(inner) => {
                let bit = layout.total_qubits();
                if (idx >> bit) & 1 == 0 {
                    *out.entry(idx).or_insert(Cplx::new(0.0, 0.0)) += amp;
                } else {
                    scatter(layout, inner, idx, amp, |target, value| {
                        *out.entry(target).or_insert(Cplx::new(0.0, 0.0)) += value;
                    });
                }
            }
            _ => scatter(layout, gate, idx, amp, |target, value| {
                *out.entry(target).or_insert(Cplx::new(0.0, 0.0)) += value;
            }),
        }
    }
    out
}

/// Distribute one amplitude through a (non-controlled) gate.
fn scatter(
    layout: &RegisterLayout,
    gate: &GateOp,
    idx: u64,
    amp: Cplx,
    mut emit: impl FnMut(u64, Cplx),
) {
    match gate {
        GateOp::DiagonalPhase(g) => {
            let t = layout.read_block(idx, g.channel_block) as usize;
            let mut phase = Cplx::new(1.0, 0.0);
            let mut target = idx;
            match (g.swap, g.expected) {
                (Some((ba, bb)), Some((ea, eb))) => {
                    let (va, vb) = (layout.read_block(idx, ba), layout.read_block(idx, bb));
                    if (va, vb) == (ea, eb) {
                        phase = g.phases[t];
                    }
                    target = layout.write_block(target, ba, vb);
                    target = layout.write_block(target, bb, va);
                }
                _ => {
                    phase = g.phases[t];
                }
            }
            emit(target, amp * phase);
        }
        GateOp::QSixJ(g) => {
            let ctx = [
                layout.read_block(idx, g.context_blocks[0]),
                layout.read_block(idx, g.context_blocks[1]),
                layout.read_block(idx, g.context_blocks[2]),
                layout.read_block(idx, g.context_blocks[3]),
            ];
            match g.tables.get(&ctx) {
                None => emit(idx, amp),
                Some(mat) => {
                    let x = layout.read_block(idx, g.target_block) as usize;
                    for y in 0..mat.rows() {
                        let coeff = mat[(y, x)];
                        if coeff == Cplx::new(0.0, 0.0) {
                            continue;
                        }
                        let target = layout.write_block(idx, g.target_block, y as u32);
                        emit(target, amp * coeff);
                    }
                }
            }
        }
        GateOp::Controlled(_) => unreachable!("controlled gates are unwrapped by the callers"),
    }
}

/// Smallest `n` with `2·exp(−nδ²/(4v)) ≤ fail`, the modified Chernoff bound:
/// `n = ⌈(4v/δ²)·ln(2/fail)⌉`.
pub fn chernoff_samples(delta: f64, fail_prob: f64, variance_bound: f64) -> Result<u64, CircuitError> {
    if delta <= 0.0 || fail_prob <= 0.0 || variance_bound <= 0.0 {
        return Err(CircuitError::Domain(format!(
            "chernoff_samples needs positive arguments, got (δ={delta}, fail={fail_prob}, v={variance_bound})"
        )));
    }
    let raw = (4.0 * variance_bound / (delta * delta)) * (2.0 / fail_prob).ln();
    Ok(raw.max(0.0).ceil() as u64)
}

/// Measurement axis of the Hadamard test.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Axis {
    X,
    Y,
}

/// Result of a sampling run, with the exact value alongside.
#[derive(Clone, Debug)]
pub struct SampleReport {
    pub exact: Cplx,
    pub estimate: Cplx,
    pub n_samples: u64,
    pub delta: f64,
    pub seed: u64,
    /// Running means at evenly spaced checkpoints (the convergence trace).
    pub per_batch_means: Vec<Cplx>,
}

impl Serialize for SampleReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        fn c(z: &Cplx) -> [f64; 2] {
            [z.re, z.im]
        }
        let mut s = serializer.serialize_struct("SampleReport", 6)?;
        s.serialize_field("exact", &c(&self.exact))?;
        s.serialize_field("estimate", &c(&self.estimate))?;
        s.serialize_field("n_samples", &self.n_samples)?;
        s.serialize_field("delta", &self.delta)?;
        s.serialize_field("seed", &self.seed)?;
        s.serialize_field(
            "per_batch_means",
            &self.per_batch_means.iter().map(c).collect::<Vec<_>>(),
        )?;
        s.end()
    }
}

/// Final state of the ancilla-controlled circuit on `|+⟩ ⊗ |initial⟩`.
fn controlled_final_state(
    layout: &RegisterLayout,
    gates: &[GateOp],
    initial: u64,
    opts: SimOptions,
) -> Result<Vec<Cplx>, CircuitError> {
    let needed = layout.qubits_with_ancilla();
    if needed > opts.max_qubits {
        return Err(CircuitError::TooManyQubits { needed, limit: opts.max_qubits });
    }
    let dim = 1usize << needed;
    let anc = layout.total_qubits();
    let mut state = vec![Cplx::new(0.0, 0.0); dim];
    let half = Cplx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    state[initial as usize] = half;
    state[(initial | (1u64 << anc)) as usize] = half;
    for gate in gates {
        let controlled = gate.clone().controlled();
        state = apply_gate_dense(layout, &controlled, &state, None);
    }
    Ok(state)
}

/// Exact matrix element `⟨initial|U|initial⟩` and the ±1 outcome probability
/// for the requested axis, read off the controlled-circuit state.
fn ancilla_statistics(
    layout: &RegisterLayout,
    state: &[Cplx],
    initial: u64,
    axis: Axis,
) -> (Cplx, f64) {
    let anc_bit = layout.total_qubits();
    let exact = state[(initial | (1u64 << anc_bit)) as usize] * std::f64::consts::SQRT_2;
    let half_dim = 1usize << anc_bit;
    let mut p_plus = 0.0;
    for low in 0..half_dim {
        let a0 = state[low];
        let a1 = state[low | half_dim];
        let proj = match axis {
            // |+⟩ = (|0⟩+|1⟩)/√2 , |+i⟩ = (|0⟩+i|1⟩)/√2
            Axis::X => (a0 + a1) * std::f64::consts::FRAC_1_SQRT_2,
            Axis::Y => (a0 - Cplx::new(0.0, 1.0) * a1) * std::f64::consts::FRAC_1_SQRT_2,
        };
        p_plus += proj.norm_sqr();
    }
    (exact, p_plus.clamp(0.0, 1.0))
}

/// Simulate the Hadamard test: prepare `|+⟩|initial⟩`, apply the controlled
/// circuit, and draw `n` ±1 samples from the exact σ_x or σ_y distribution
/// of the ancilla. The estimate carries the sampled axis component; `exact`
/// is the full matrix element.
pub fn hadamard_test(
    layout: &RegisterLayout,
    gates: &[GateOp],
    initial: u64,
    axis: Axis,
    n: u64,
    seed: u64,
    opts: SimOptions,
) -> Result<SampleReport, CircuitError> {
    if n == 0 {
        return Err(CircuitError::Domain("need at least one sample".to_string()));
    }
    let state = controlled_final_state(layout, gates, initial, opts)?;
    let (exact, p_plus) = ancilla_statistics(layout, &state, initial, axis);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checkpoints = 100u64.min(n);
    let batch = n.div_ceil(checkpoints);
    let mut sum = 0i64;
    let mut per_batch_means = Vec::new();
    for i in 1..=n {
        let draw: f64 = rng.random();
        sum += if draw < p_plus { 1 } else { -1 };
        if i % batch == 0 || i == n {
            per_batch_means.push(axis_component(axis, sum as f64 / i as f64));
        }
    }
    let mean = sum as f64 / n as f64;
    Ok(SampleReport {
        exact,
        estimate: axis_component(axis, mean),
        n_samples: n,
        delta: 0.0,
        seed,
        per_batch_means,
    })
}

fn axis_component(axis: Axis, value: f64) -> Cplx {
    match axis {
        Axis::X => Cplx::new(value, 0.0),
        Axis::Y => Cplx::new(0.0, value),
    }
}

/// Run the full estimation protocol: sample both axes with
/// `n = chernoff_samples(δ/Π[2jᵢ+1], 1/4, 1)` each, rescale by the
/// quantum-dimension product, and report the estimate next to the exact
/// invariant. The y-axis run uses `seed + 1`.
pub fn approximate_colored_jones(
    level: Level,
    braid: &ColoredBraidWord,
    delta: f64,
    seed: u64,
    samples_override: Option<u64>,
    opts: SimOptions,
) -> Result<SampleReport, CircuitError> {
    if delta <= 0.0 && samples_override.is_none() {
        return Err(CircuitError::Domain("delta must be positive".to_string()));
    }
    let exact = evaluate(level, braid)?;
    let qd = qdim_product(level, braid)?;
    let n = match samples_override {
        Some(n) if n >= 1 => n,
        Some(_) => return Err(CircuitError::Domain("need at least one sample".to_string())),
        None => chernoff_samples(delta / qd, 0.25, 1.0)?,
    };
    let circuit = compile_braid(level, braid)?;
    let basis = enumerate_basis(level, &braid.bottom_slice());
    let start = basis.all_zero_index().ok_or_else(|| {
        CircuitError::Invariant(InvariantError::Plat(
            "bottom basis has no all-zero fusion path".to_string(),
        ))
    })?;
    let initial = encode_path(&circuit.layout, &basis.paths[start])?;

    let rx = hadamard_test(&circuit.layout, &circuit.gates, initial, Axis::X, n, seed, opts)?;
    let ry = hadamard_test(
        &circuit.layout,
        &circuit.gates,
        initial,
        Axis::Y,
        n,
        seed.wrapping_add(1),
        opts,
    )?;
    let estimate = Cplx::new(rx.estimate.re, ry.estimate.im) * qd;
    let trace: Vec<Cplx> = rx
        .per_batch_means
        .iter()
        .zip(ry.per_batch_means.iter())
        .map(|(x, y)| Cplx::new(x.re, y.im) * qd)
        .collect();
    Ok(SampleReport {
        exact: exact.value,
        estimate,
        n_samples: n,
        delta,
        seed,
        per_batch_means: trace,
    })
}
