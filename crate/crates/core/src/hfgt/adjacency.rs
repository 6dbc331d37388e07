//! Hetero-functional adjacency: capability ψ1 may be followed by ψ2 when ψ1
//! produces some operand at the buffer where ψ2 consumes it.

use crate::hfgt::incidence::IncidenceTensors;
use crate::hfgt::HfgtError;
use crate::metamodel::{ProcessSelector, SystemModel};
use crate::sparse::{SparseBoolMatrix, SparseBoolTensor3};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HfAdjacency {
    /// σP·σR square.
    pub ar: SparseBoolMatrix,
    /// Restricted to realized capabilities.
    pub ar_proj: SparseBoolMatrix,
    /// Continuity pairs by type:
    /// 1 self-succession, 2 same resource, 3 same process on another resource,
    /// 4 different resource and process, 5 pairs allowed by the method pairs.
    pub dofr: [usize; 5],
    pub dofr_total: usize,
}

/// Boolean product of the mode-3 unfoldings: `AR = M⁺ᵀ · M⁻`.
pub fn tensor_adjacency(pos: &SparseBoolTensor3, neg: &SparseBoolTensor3) -> SparseBoolMatrix {
    pos.mode3_rows().transpose().bool_product(&neg.mode3_rows())
}

pub fn compute_hf_adjacency(model: &SystemModel, tensors: &IncidenceTensors) -> Result<HfAdjacency, HfgtError> {
    let ar = tensor_adjacency(&tensors.pos, &tensors.neg);
    let ar_proj = tensor_adjacency(&tensors.proj_pos, &tensors.proj_neg);

    let nr = model.resources.num_resources();
    let pairs: Vec<(ProcessSelector, ProcessSelector)> = model
        .raw
        .abstractions
        .method_pairs
        .iter()
        .map(|mp| Ok((model.select(&mp.first)?, model.select(&mp.second)?)))
        .collect::<Result<_, HfgtError>>()?;

    let mut dofr = [0usize; 5];
    for (p1, p2) in ar.iter() {
        let (i1, v1) = (p1 / nr, p1 % nr);
        let (i2, v2) = (p2 / nr, p2 % nr);
        let ty = if p1 == p2 {
            0
        } else if v1 == v2 {
            1
        } else if i1 == i2 {
            2
        } else {
            3
        };
        dofr[ty] += 1;
        let allowed = pairs.is_empty()
            || pairs
                .iter()
                .any(|(a, b)| a.matches(&model.catalog, i1) && b.matches(&model.catalog, i2));
        if allowed {
            dofr[4] += 1;
        }
    }
    Ok(HfAdjacency { ar, ar_proj, dofr, dofr_total: dofr[4] })
}
