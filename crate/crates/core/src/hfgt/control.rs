//! Controller agency (`A_Q`, controllers × resources) and controller adjacency
//! (`A_C`, controllers × controllers).
//!
//! Inactive controllers keep their row and diagonal entry but exercise no
//! agency and exchange no information.

use crate::hfgt::{HfgtError, HfgtOptions};
use crate::metamodel::SystemModel;
use crate::sparse::SparseBoolMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerMatrices {
    /// Row labels; implicit controllers are named `implicit:<resource>`.
    pub names: Vec<String>,
    pub agency: SparseBoolMatrix,
    pub adjacency: SparseBoolMatrix,
}

pub fn compute_controller_matrices(model: &SystemModel, opts: &HfgtOptions) -> Result<ControllerMatrices, HfgtError> {
    let nr = model.resources.num_resources();
    let mut names: Vec<String> = model.raw.controllers.iter().map(|c| c.name.clone()).collect();
    let mut active: Vec<bool> = model.raw.controllers.iter().map(|c| c.status.is_active()).collect();
    let mut agency_entries = Vec::new();
    let mut uncontrolled = Vec::new();
    for v in 0..nr {
        match model.resource_controller(v) {
            Some(c) => {
                let q = model.controller_index(c).ok_or_else(|| HfgtError::UnknownController {
                    resource: model.resources.entries[v].name.clone(),
                    controller: c.to_string(),
                })?;
                if active[q] {
                    agency_entries.push((q, v));
                }
            }
            None => uncontrolled.push(v),
        }
    }
    if opts.implicit_controllers {
        for v in uncontrolled {
            agency_entries.push((names.len(), v));
            names.push(format!("implicit:{}", model.resources.entries[v].name));
            active.push(true);
        }
    }
    let nq = names.len();
    let agency = SparseBoolMatrix::from_entries(nq, nr, agency_entries);

    let mut adjacency = SparseBoolMatrix::from_entries(nq, nq, (0..nq).map(|q| (q, q)));
    for (q1, c) in model.raw.controllers.iter().enumerate() {
        for r in &c.peer_recipients {
            let q2 = model.controller_index(r).ok_or_else(|| HfgtError::UnknownController {
                resource: c.name.clone(),
                controller: r.clone(),
            })?;
            if active[q1] && active[q2] {
                if opts.transpose_ac {
                    adjacency.insert(q2, q1);
                } else {
                    adjacency.insert(q1, q2);
                }
            }
        }
    }
    Ok(ControllerMatrices { names, agency, adjacency })
}
