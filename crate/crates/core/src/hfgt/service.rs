//! Service Petri nets and the service feasibility (Λ) family.

use crate::hfgt::incidence::{IncidenceTensors, OperandIncidence};
use crate::hfgt::HfgtError;
use crate::ingest::ProcessRef;
use crate::metamodel::{ProcessSelector, SystemModel};
use crate::sparse::SparseBoolMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceNet {
    pub name: String,
    pub operand: String,
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub links: Vec<ProcessRef>,
    /// |S| × |E|: place feeds transition.
    pub mneg: SparseBoolMatrix,
    /// |S| × |E|: transition feeds place.
    pub mpos: SparseBoolMatrix,
    /// |E| × |E|: `Mnegᵀ · Mpos`.
    pub dual_adjacency: SparseBoolMatrix,
}

pub fn build_service_nets(model: &SystemModel) -> Result<Vec<ServiceNet>, HfgtError> {
    model
        .raw
        .services
        .iter()
        .map(|s| {
            let place = |name: &str, t: &str| {
                s.places.iter().position(|p| p == name).ok_or_else(|| HfgtError::Service {
                    service: s.name.clone(),
                    message: format!("transition {t} names unknown place {name}"),
                })
            };
            let (np, ne) = (s.places.len(), s.transitions.len());
            let mut mneg = SparseBoolMatrix::new(np, ne);
            let mut mpos = SparseBoolMatrix::new(np, ne);
            for (e, t) in s.transitions.iter().enumerate() {
                if t.preset.is_empty() && t.postset.is_empty() {
                    return Err(HfgtError::Service {
                        service: s.name.clone(),
                        message: format!("transition {} has neither preset nor postset", t.name),
                    });
                }
                for p in &t.preset {
                    mneg.insert(place(p, &t.name)?, e);
                }
                for p in &t.postset {
                    mpos.insert(place(p, &t.name)?, e);
                }
            }
            let dual_adjacency = mneg.transpose().bool_product(&mpos);
            Ok(ServiceNet {
                name: s.name.clone(),
                operand: s.bound_operand().to_string(),
                places: s.places.clone(),
                transitions: s.transitions.iter().map(|t| t.name.clone()).collect(),
                links: s.transitions.iter().map(|t| t.method_link.clone()).collect(),
                mneg,
                mpos,
                dual_adjacency,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceFeasibility {
    /// |E| × σP·σR.
    pub raw_lambda: SparseBoolMatrix,
    pub raw_lambda_neg: SparseBoolMatrix,
    pub raw_lambda_pos: SparseBoolMatrix,
    /// |E| × realized capabilities.
    pub lambda: SparseBoolMatrix,
    /// |E| × σP_μ.
    pub raw_xform_lambda: SparseBoolMatrix,
    pub raw_xform_lambda_neg: SparseBoolMatrix,
    pub raw_xform_lambda_pos: SparseBoolMatrix,
    /// `lambda` restricted to transformation capabilities (same shape).
    pub xform_lambda: SparseBoolMatrix,
    /// |E| × σP_γ.
    pub xport_lambda: SparseBoolMatrix,
    pub xport_lambda_neg: SparseBoolMatrix,
    pub xport_lambda_pos: SparseBoolMatrix,
}

pub fn compute_service_feasibility(
    model: &SystemModel,
    nets: &[ServiceNet],
    system_concept: &SparseBoolMatrix,
    incidence: &OperandIncidence,
    tensors: &IncidenceTensors,
) -> Result<Vec<ServiceFeasibility>, HfgtError> {
    let pc = &model.catalog;
    let nr = model.resources.num_resources();
    let ncap = pc.num_processes() * nr;
    nets.iter()
        .zip(&model.raw.services)
        .map(|(net, raw)| {
            let l = model.operand_index(&net.operand).ok_or_else(|| HfgtError::Service {
                service: net.name.clone(),
                message: format!("unknown operand {}", net.operand),
            })?;
            let selectors: Vec<ProcessSelector> = net
                .links
                .iter()
                .map(|pr| {
                    model.select(pr).map_err(|_| HfgtError::Service {
                        service: net.name.clone(),
                        message: format!("method link {pr} names no known process"),
                    })
                })
                .collect::<Result<_, _>>()?;
            let ne = net.transitions.len();
            let mut f = ServiceFeasibility {
                raw_lambda: SparseBoolMatrix::new(ne, ncap),
                raw_lambda_neg: SparseBoolMatrix::new(ne, ncap),
                raw_lambda_pos: SparseBoolMatrix::new(ne, ncap),
                lambda: SparseBoolMatrix::new(ne, tensors.realized.len()),
                raw_xform_lambda: SparseBoolMatrix::new(ne, pc.num_transform()),
                raw_xform_lambda_neg: SparseBoolMatrix::new(ne, pc.num_transform()),
                raw_xform_lambda_pos: SparseBoolMatrix::new(ne, pc.num_transform()),
                xform_lambda: SparseBoolMatrix::new(ne, tensors.realized.len()),
                xport_lambda: SparseBoolMatrix::new(ne, pc.num_holding()),
                xport_lambda_neg: SparseBoolMatrix::new(ne, pc.num_holding()),
                xport_lambda_pos: SparseBoolMatrix::new(ne, pc.num_holding()),
            };
            if !raw.status.is_active() {
                return Ok(f);
            }
            for (e, sel) in selectors.iter().enumerate() {
                match sel {
                    ProcessSelector::Transform(j) => {
                        f.raw_xform_lambda.insert(e, *j);
                        if incidence.mlp_neg.get(l, *j) {
                            f.raw_xform_lambda_neg.insert(e, *j);
                        }
                        if incidence.mlp_pos.get(l, *j) {
                            f.raw_xform_lambda_pos.insert(e, *j);
                        }
                    }
                    ProcessSelector::Holdings(hs) => {
                        for &g in hs {
                            f.xport_lambda.insert(e, g);
                            if incidence.mlg_neg.get(l, g) {
                                f.xport_lambda_neg.insert(e, g);
                            }
                            if incidence.mlg_pos.get(l, g) {
                                f.xport_lambda_pos.insert(e, g);
                            }
                        }
                    }
                }
                for (col, (i, v)) in system_concept.iter().enumerate() {
                    if !sel.matches(pc, i) {
                        continue;
                    }
                    let psi = nr * i + v;
                    f.raw_lambda.insert(e, psi);
                    f.lambda.insert(e, col);
                    if matches!(sel, ProcessSelector::Transform(_)) {
                        f.xform_lambda.insert(e, col);
                    }
                    if incidence.mlp_neg.get(l, i) {
                        f.raw_lambda_neg.insert(e, psi);
                    }
                    if incidence.mlp_pos.get(l, i) {
                        f.raw_lambda_pos.insert(e, psi);
                    }
                }
            }
            Ok(f)
        })
        .collect()
}
