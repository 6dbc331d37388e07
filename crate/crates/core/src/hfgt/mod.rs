//! The HFGT mathematical models computed over a [`SystemModel`].

mod adjacency;
mod assemble;
mod concept;
mod control;
mod incidence;
mod service;

pub use adjacency::{compute_hf_adjacency, tensor_adjacency, HfAdjacency};
pub use assemble::{assemble_system_adjacency, SystemAdjacency};
pub use concept::{
    compute_refined_transport_concept, compute_structural_dof, compute_system_concept,
    compute_transformation_concept, compute_transport_concept, matricize_refined, matricize_transport, Concept,
    ConceptTensor, StructuralDof,
};
pub use control::{compute_controller_matrices, ControllerMatrices};
pub use incidence::{compute_incidence_tensor, compute_operand_incidence, endpoints, IncidenceTensors, OperandIncidence};
pub use service::{build_service_nets, compute_service_feasibility, ServiceFeasibility, ServiceNet};

use crate::metamodel::{ModelError, SystemModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HfgtError {
    #[error("resource {resource} names undeclared controller {controller}")]
    UnknownController { resource: String, controller: String },
    #[error("service {service}: {message}")]
    Service { service: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HfgtOptions {
    /// Store controller adjacency as receiver → sender instead of sender → receiver.
    pub transpose_ac: bool,
    /// Give every resource without an independent controller its own implicit controller.
    pub implicit_controllers: bool,
}

/// Every computed matrix and tensor of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct HfgtBundle {
    pub transformation: Concept,
    pub transport: Concept,
    pub transport_tensor: ConceptTensor,
    pub refined: Concept,
    pub refined_tensor: ConceptTensor,
    pub system: Concept,
    pub dof: StructuralDof,
    pub operand_incidence: OperandIncidence,
    pub incidence: IncidenceTensors,
    pub adjacency: HfAdjacency,
    pub control: ControllerMatrices,
    pub services: Vec<ServiceNet>,
    pub feasibility: Vec<ServiceFeasibility>,
    pub system_adjacency: SystemAdjacency,
}

impl HfgtBundle {
    pub fn compute(model: &SystemModel, opts: &HfgtOptions) -> Result<Self, HfgtError> {
        let transformation = compute_transformation_concept(model);
        let (transport, transport_tensor) = compute_transport_concept(model);
        let (refined, refined_tensor) = compute_refined_transport_concept(model);
        let system = compute_system_concept(model, &transformation, &refined);
        let dof = compute_structural_dof(&transformation, &transport, &refined);
        let operand_incidence = compute_operand_incidence(model);
        let incidence = compute_incidence_tensor(model, &system.a, &operand_incidence);
        let adjacency = compute_hf_adjacency(model, &incidence)?;
        let control = compute_controller_matrices(model, opts)?;
        let services = build_service_nets(model)?;
        let feasibility = compute_service_feasibility(model, &services, &system.a, &operand_incidence, &incidence)?;
        let system_adjacency = assemble_system_adjacency(
            &adjacency.ar_proj,
            &incidence.realized,
            model.resources.num_resources(),
            &control,
            &services,
            &feasibility,
        );
        log::debug!(
            "computed bundle: DOFM={} DOFH={} DOFHref={} |AR|={}",
            dof.m,
            dof.h,
            dof.href,
            adjacency.ar.nnz()
        );
        Ok(Self {
            transformation,
            transport,
            transport_tensor,
            refined,
            refined_tensor,
            system,
            dof,
            operand_incidence,
            incidence,
            adjacency,
            control,
            services,
            feasibility,
            system_adjacency,
        })
    }

    /// σ(A_S), the number of realized capabilities.
    pub fn num_capabilities(&self) -> usize {
        self.system.a.nnz()
    }
}
