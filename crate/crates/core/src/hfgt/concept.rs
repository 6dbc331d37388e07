//! Knowledge bases `J`, constraint matrices `K` and system concepts `A = J ∧ ¬K`.

use std::collections::BTreeMap;

use crate::metamodel::SystemModel;
use crate::sparse::{SparseBoolMatrix, SparseBoolTensor3};

/// A knowledge base / constraint / concept triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub j: SparseBoolMatrix,
    pub k: SparseBoolMatrix,
    pub a: SparseBoolMatrix,
}

impl Concept {
    /// Builds `J` from every declared `(row, col)` and `K` from the cells where
    /// no declaring method is active.
    fn from_declarations(rows: usize, cols: usize, decl: BTreeMap<(usize, usize), bool>) -> Self {
        let j = SparseBoolMatrix::from_entries(rows, cols, decl.keys().copied());
        let k = SparseBoolMatrix::from_entries(rows, cols, decl.iter().filter(|(_, &active)| !active).map(|(&c, _)| c));
        let a = j.and_not(&k);
        Self { j, k, a }
    }

    pub fn new(j: SparseBoolMatrix, k: SparseBoolMatrix) -> Self {
        let a = j.and_not(&k);
        Self { j, k, a }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptTensor {
    pub j: SparseBoolTensor3,
    pub k: SparseBoolTensor3,
    pub a: SparseBoolTensor3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StructuralDof {
    pub m: usize,
    pub h: usize,
    pub href: usize,
}

/// `J_M`, `K_M`, `A_M`: σP_μ × σM.
pub fn compute_transformation_concept(model: &SystemModel) -> Concept {
    let mut decl: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for f in &model.methods.forms {
        let active = model.raw.machines[f.resource].methods_xform[f.method].status.is_active();
        *decl.entry((f.form, f.resource)).or_insert(false) |= active;
    }
    Concept::from_declarations(model.catalog.num_transform(), model.resources.num_machines, decl)
}

fn port_declarations(model: &SystemModel, refined: bool) -> BTreeMap<(usize, usize), bool> {
    let mut decl = BTreeMap::new();
    for p in &model.methods.ports {
        let active = model.port_method(p).status.is_active();
        let row = if refined { p.port_ref } else { p.port };
        *decl.entry((row, p.resource)).or_insert(false) |= active;
    }
    decl
}

/// `J_H`, `K_H`, `A_H` (σB² × σR) and their σB × σB × σR tensor forms,
/// indexed `(dest, origin, resource)`.
pub fn compute_transport_concept(model: &SystemModel) -> (Concept, ConceptTensor) {
    let b = model.resources.num_buffers();
    let r = model.resources.num_resources();
    let m = Concept::from_declarations(model.catalog.num_transport(), r, port_declarations(model, false));
    let tensor = |mat: &SparseBoolMatrix| {
        let mut t = SparseBoolTensor3::new((b, b, r));
        for (row, v) in mat.iter() {
            t.insert(row % b, row / b, v);
        }
        t
    };
    let t = ConceptTensor { j: tensor(&m.j), k: tensor(&m.k), a: tensor(&m.a) };
    (m, t)
}

/// `J_H̄`, `K_H̄`, `A_H̄` (σP_η̄ × σR) and tensor forms of shape
/// (σP_γ·σB) × σB × σR, indexed `(σB·hold + dest, origin, resource)`.
pub fn compute_refined_transport_concept(model: &SystemModel) -> (Concept, ConceptTensor) {
    let pc = &model.catalog;
    let b = pc.num_buffers;
    let r = model.resources.num_resources();
    let m = Concept::from_declarations(pc.num_refined(), r, port_declarations(model, true));
    let tensor = |mat: &SparseBoolMatrix| {
        let mut t = SparseBoolTensor3::new((pc.num_holding() * b, b, r));
        for (row, v) in mat.iter() {
            let (hold, origin, dest) = pc.refined(row);
            t.insert(b * hold + dest, origin, v);
        }
        t
    };
    let t = ConceptTensor { j: tensor(&m.j), k: tensor(&m.k), a: tensor(&m.a) };
    (m, t)
}

/// Unfolds a transport tensor back to its σB² × σR matrix.
pub fn matricize_transport(t: &SparseBoolTensor3) -> SparseBoolMatrix {
    t.fold_first_two()
}

/// Unfolds a refined transport tensor (holding-major first mode) back to σP_η̄ × σR.
pub fn matricize_refined(t: &SparseBoolTensor3, num_buffers: usize) -> SparseBoolMatrix {
    let (d1, d2, d3) = t.dims();
    let holds = d1.checked_div(num_buffers).unwrap_or(0);
    let sq = num_buffers * num_buffers;
    debug_assert_eq!(d2, num_buffers);
    SparseBoolMatrix::from_entries(
        holds * sq,
        d3,
        t.iter().map(|(m1, origin, v)| {
            let (hold, dest) = (m1 / num_buffers, m1 % num_buffers);
            (sq * hold + num_buffers * origin + dest, v)
        }),
    )
}

/// `J_S`, `K_S`, `A_S`: (σP_μ + σP_η̄) × σR, transformation rows first.
pub fn compute_system_concept(model: &SystemModel, transformation: &Concept, refined: &Concept) -> Concept {
    let r = model.resources.num_resources();
    let mu = model.catalog.num_transform();
    let stack = |m: &SparseBoolMatrix, h: &SparseBoolMatrix| SparseBoolMatrix::vstack(&[&m.resized(mu, r), h]);
    let j = stack(&transformation.j, &refined.j);
    let k = stack(&transformation.k, &refined.k);
    Concept::new(j, k)
}

pub fn compute_structural_dof(transformation: &Concept, transport: &Concept, refined: &Concept) -> StructuralDof {
    StructuralDof { m: transformation.a.nnz(), h: transport.a.nnz(), href: refined.a.nnz() }
}
