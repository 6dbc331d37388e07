use crate::hfgt::control::ControllerMatrices;
use crate::hfgt::service::{ServiceFeasibility, ServiceNet};
use crate::sparse::SparseBoolMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemAdjacency {
    /// `[[Ã_ρ, Ã_Qᵀ], [Ã_Q, A_C]]` over realized capabilities then controllers.
    pub partial: SparseBoolMatrix,
    /// `partial` extended with one node per service transition.
    pub full: SparseBoolMatrix,
}

/// Block sizes: realized capabilities, controllers, then each service's transitions.
pub fn assemble_system_adjacency(
    ar_proj: &SparseBoolMatrix,
    realized: &[usize],
    num_resources: usize,
    control: &ControllerMatrices,
    nets: &[ServiceNet],
    feasibility: &[ServiceFeasibility],
) -> SystemAdjacency {
    let ncap = realized.len();
    let nq = control.names.len();
    // Ã_Q(q, ψ) = A_Q(q, resource(ψ))
    let agency_proj = SparseBoolMatrix::from_entries(
        nq,
        ncap,
        realized.iter().enumerate().flat_map(|(col, &psi)| {
            let v = psi % num_resources;
            (0..nq).filter(move |&q| control.agency.get(q, v)).map(move |q| (q, col))
        }),
    );
    let base = ncap + nq;
    let mut partial = SparseBoolMatrix::new(base, base);
    partial.place(0, 0, ar_proj);
    partial.place(0, ncap, &agency_proj.transpose());
    partial.place(ncap, 0, &agency_proj);
    partial.place(ncap, ncap, &control.adjacency);

    let total = base + nets.iter().map(|n| n.transitions.len()).sum::<usize>();
    let mut full = partial.resized(total, total);
    let mut off = base;
    for (net, f) in nets.iter().zip(feasibility) {
        full.place(off, 0, &f.lambda);
        full.place(0, off, &f.lambda.transpose());
        full.place(off, off, &net.dual_adjacency);
        off += net.transitions.len();
    }
    SystemAdjacency { partial, full }
}
