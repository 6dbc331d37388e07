//! Process-operand incidence matrices and the hetero-functional incidence tensors.
//!
//! Capabilities are linearized process-major: `ψ = σR·i + v` (0-based), i.e.
//! `ψ = σR·(i−1) + v` with 1-based indices.

use crate::metamodel::{SystemModel, SystemProcess};
use crate::sparse::{SparseBoolMatrix, SparseBoolTensor3, SparseIntTensor3};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperandIncidence {
    /// σL × σP_γ, operands consumed by each holding process.
    pub mlg_neg: SparseBoolMatrix,
    /// σL × σP_γ, operands produced by each holding process.
    pub mlg_pos: SparseBoolMatrix,
    /// σL × σP.
    pub mlp_neg: SparseBoolMatrix,
    pub mlp_pos: SparseBoolMatrix,
}

pub fn compute_operand_incidence(model: &SystemModel) -> OperandIncidence {
    let pc = &model.catalog;
    let nl = model.operands.len();
    let op = |name: &String| model.operand_index(name).expect("operand collected from the model");

    let mut mlg_neg = SparseBoolMatrix::new(nl, pc.num_holding());
    let mut mlg_pos = SparseBoolMatrix::new(nl, pc.num_holding());
    for a in &model.raw.abstractions.methods_xport {
        let g = pc.holding_index(&a.reference).expect("holding process cataloged");
        a.operand.iter().for_each(|o| {
            mlg_neg.insert(op(o), g);
        });
        a.output.iter().for_each(|o| {
            mlg_pos.insert(op(o), g);
        });
    }

    let mut mlp_neg = SparseBoolMatrix::new(nl, pc.num_processes());
    let mut mlp_pos = SparseBoolMatrix::new(nl, pc.num_processes());
    for f in &model.methods.forms {
        let m = &model.raw.machines[f.resource].methods_xform[f.method];
        m.operand.iter().for_each(|o| {
            mlp_neg.insert(op(o), f.form);
        });
        m.output.iter().for_each(|o| {
            mlp_pos.insert(op(o), f.form);
        });
    }
    let mu = pc.num_transform();
    let sq = pc.num_transport();
    for (l, g) in mlg_neg.iter() {
        for port in 0..sq {
            mlp_neg.insert(l, mu + sq * g + port);
        }
    }
    for (l, g) in mlg_pos.iter() {
        for port in 0..sq {
            mlp_pos.insert(l, mu + sq * g + port);
        }
    }
    OperandIncidence { mlg_neg, mlg_pos, mlp_neg, mlp_pos }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceTensors {
    /// σL × σB × σP·σR.
    pub neg: SparseBoolTensor3,
    pub pos: SparseBoolTensor3,
    /// `pos − neg`.
    pub signed: SparseIntTensor3,
    /// Capability axis restricted to `realized`.
    pub proj_neg: SparseBoolTensor3,
    pub proj_pos: SparseBoolTensor3,
    pub proj_signed: SparseIntTensor3,
    /// Capabilities with `A_S(i, v) = 1`, ascending.
    pub realized: Vec<usize>,
}

/// Buffer endpoints of process `i` when executed by resource `v`.
pub fn endpoints(model: &SystemModel, i: usize, v: usize) -> (usize, usize) {
    match model.catalog.process(i) {
        SystemProcess::Transform(_) => (v, v),
        SystemProcess::Refined { origin, dest, .. } => (origin, dest),
    }
}

pub fn compute_incidence_tensor(
    model: &SystemModel,
    system_concept: &SparseBoolMatrix,
    incidence: &OperandIncidence,
) -> IncidenceTensors {
    let nr = model.resources.num_resources();
    let dims = (model.operands.len(), model.resources.num_buffers(), model.catalog.num_processes() * nr);
    let neg_cols = incidence.mlp_neg.transpose();
    let pos_cols = incidence.mlp_pos.transpose();
    let mut neg = SparseBoolTensor3::new(dims);
    let mut pos = SparseBoolTensor3::new(dims);
    let mut realized = Vec::with_capacity(system_concept.nnz());
    for (i, v) in system_concept.iter() {
        let psi = nr * i + v;
        realized.push(psi);
        let (origin, dest) = endpoints(model, i, v);
        for l in neg_cols.row(i) {
            neg.insert(l, origin, psi);
        }
        for l in pos_cols.row(i) {
            pos.insert(l, dest, psi);
        }
    }
    let signed = SparseIntTensor3::difference(&pos, &neg);
    let proj_neg = neg.select_mode3(&realized);
    let proj_pos = pos.select_mode3(&realized);
    let proj_signed = SparseIntTensor3::difference(&proj_pos, &proj_neg);
    IncidenceTensors { neg, pos, signed, proj_neg, proj_pos, proj_signed, realized }
}
