//! Canonical indexing of resources and enumeration of the process sets.
//!
//! Global resource order is machines, then independent buffers, then
//! transporters, each in file order. The first `σB = σM + σB_ind` resources
//! form the buffer set. All indices stored here are 0-based; the 1-based
//! formulas used in exports are
//!
//! ```text
//! idxPort    = σB·(idxOrigin−1) + idxDest
//! idxPortRef = σB²·(idxHold−1) + idxPort
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ingest::{validate_raw, Diagnostic, ProcessRef, RawLfes, RawMethodxPort, Severity};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("system has {} validation error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
    #[error("duplicate resource name {name}: declared at {first} and {second}")]
    DuplicateResource { name: String, first: String, second: String },
    #[error("{resource}/{method}: ref {reference:?} is not a holding process declared in Abstractions")]
    UnknownHolding { resource: String, method: String, reference: String },
    #[error("{resource}/{method}: missing ref")]
    MissingRef { resource: String, method: String },
    #[error("{resource}/{method}: {endpoint} is a transporter; transports must start and end at buffers")]
    TransporterEndpoint { resource: String, method: String, endpoint: String },
    #[error("{resource}/{method}: unknown buffer {endpoint}")]
    UnknownBuffer { resource: String, method: String, endpoint: String },
    #[error("unknown process {0}")]
    UnknownProcess(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResourceKind {
    Machine,
    IndBuffer,
    Transporter,
}

impl ResourceKind {
    pub fn element(self) -> &'static str {
        match self {
            ResourceKind::Machine => "Machine",
            ResourceKind::IndBuffer => "IndBuffer",
            ResourceKind::Transporter => "Transporter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceEntry {
    pub name: String,
    pub kind: ResourceKind,
    /// Position within its own class (idxMachine / idxBuffer / idxTransporter).
    pub class_index: usize,
    /// Position in the global resource order (idxResource).
    pub global: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResourceIndex {
    pub entries: Vec<ResourceEntry>,
    by_name: BTreeMap<String, usize>,
    pub num_machines: usize,
    pub num_ind_buffers: usize,
    pub num_transporters: usize,
    pub num_controllers: usize,
    pub num_services: usize,
}

impl ResourceIndex {
    pub fn num_buffers(&self) -> usize {
        self.num_machines + self.num_ind_buffers
    }

    pub fn num_resources(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, name: &str) -> Option<&ResourceEntry> {
        self.by_name.get(name).map(|&i| &self.entries[i])
    }

    /// Global index of a machine or independent buffer.
    pub fn buffer(&self, name: &str) -> Option<usize> {
        self.get(name).filter(|e| e.kind != ResourceKind::Transporter).map(|e| e.global)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }
}

pub fn index_resources(raw: &RawLfes) -> Result<ResourceIndex, ModelError> {
    let mut ri = ResourceIndex {
        num_machines: raw.machines.len(),
        num_ind_buffers: raw.ind_buffers.len(),
        num_transporters: raw.transporters.len(),
        num_controllers: raw.controllers.len(),
        num_services: raw.services.len(),
        ..Default::default()
    };
    let named = raw
        .machines
        .iter()
        .map(|m| (m.name.as_str(), ResourceKind::Machine))
        .chain(raw.ind_buffers.iter().map(|b| (b.name.as_str(), ResourceKind::IndBuffer)))
        .chain(raw.transporters.iter().map(|h| (h.name.as_str(), ResourceKind::Transporter)));
    let mut class_counts: BTreeMap<ResourceKind, usize> = BTreeMap::new();
    for (global, (name, kind)) in named.enumerate() {
        let class_index = *class_counts.entry(kind).and_modify(|c| *c += 1).or_insert(0);
        if let Some(&prev) = ri.by_name.get(name) {
            let p = &ri.entries[prev];
            return Err(ModelError::DuplicateResource {
                name: name.to_string(),
                first: format!("/LFES/{}[{}]", p.kind.element(), p.class_index + 1),
                second: format!("/LFES/{}[{}]", kind.element(), class_index + 1),
            });
        }
        ri.by_name.insert(name.to_string(), global);
        ri.entries.push(ResourceEntry { name: name.to_string(), kind, class_index, global });
    }
    Ok(ri)
}

/// One element of the system process set P = P_μ ∪ P_η̄.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemProcess {
    /// Index into P_μ.
    Transform(usize),
    /// Holding process and buffer endpoints of a refined transport.
    Refined { hold: usize, origin: usize, dest: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProcessCatalog {
    /// P_μ, unique names in first-appearance order.
    pub transform: Vec<String>,
    /// P_γ, holding process names in Abstractions order.
    pub holding: Vec<String>,
    /// σB; P_η is the full σB×σB grid of (origin, dest) pairs.
    pub num_buffers: usize,
}

impl ProcessCatalog {
    pub fn num_transform(&self) -> usize {
        self.transform.len()
    }

    pub fn num_transport(&self) -> usize {
        self.num_buffers * self.num_buffers
    }

    pub fn num_holding(&self) -> usize {
        self.holding.len()
    }

    pub fn num_refined(&self) -> usize {
        self.num_holding() * self.num_transport()
    }

    /// σP = σP_μ + σP_η̄.
    pub fn num_processes(&self) -> usize {
        self.num_transform() + self.num_refined()
    }

    pub fn transform_index(&self, name: &str) -> Option<usize> {
        self.transform.iter().position(|n| n == name)
    }

    pub fn holding_index(&self, name: &str) -> Option<usize> {
        self.holding.iter().position(|n| n == name)
    }

    /// Origin-major position in P_η.
    pub fn port_index(&self, origin: usize, dest: usize) -> usize {
        self.num_buffers * origin + dest
    }

    /// Holding-major position in P_η̄.
    pub fn port_ref_index(&self, hold: usize, origin: usize, dest: usize) -> usize {
        self.num_transport() * hold + self.port_index(origin, dest)
    }

    /// P_η in origin-major order.
    pub fn transport_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let b = self.num_buffers;
        (0..b).flat_map(move |o| (0..b).map(move |d| (o, d)))
    }

    pub fn refined(&self, port_ref: usize) -> (usize, usize, usize) {
        let sq = self.num_transport();
        let hold = port_ref / sq;
        let port = port_ref % sq;
        (hold, port / self.num_buffers, port % self.num_buffers)
    }

    pub fn process(&self, i: usize) -> SystemProcess {
        if i < self.num_transform() {
            SystemProcess::Transform(i)
        } else {
            let (hold, origin, dest) = self.refined(i - self.num_transform());
            SystemProcess::Refined { hold, origin, dest }
        }
    }

    /// Row of a refined transport in the system process set.
    pub fn refined_process(&self, hold: usize, origin: usize, dest: usize) -> usize {
        self.num_transform() + self.port_ref_index(hold, origin, dest)
    }

    pub fn label(&self, i: usize, resources: &ResourceIndex) -> String {
        match self.process(i) {
            SystemProcess::Transform(j) => self.transform[j].clone(),
            SystemProcess::Refined { hold, origin, dest } => format!(
                "{}: {} -> {}",
                self.holding[hold],
                resources.entries[origin].name,
                resources.entries[dest].name
            ),
        }
    }
}

pub fn build_process_catalog(raw: &RawLfes, ri: &ResourceIndex) -> Result<ProcessCatalog, ModelError> {
    let mut pc = ProcessCatalog { num_buffers: ri.num_buffers(), ..Default::default() };
    for f in raw.machines.iter().flat_map(|m| &m.methods_xform) {
        if pc.transform_index(&f.name).is_none() {
            pc.transform.push(f.name.clone());
        }
    }
    for a in &raw.abstractions.methods_xport {
        if pc.holding_index(&a.reference).is_none() {
            pc.holding.push(a.reference.clone());
        }
    }
    for (res, p) in ports(raw) {
        match &p.reference {
            None => return Err(ModelError::MissingRef { resource: res.into(), method: p.name.clone() }),
            Some(r) if pc.holding_index(r).is_none() => {
                return Err(ModelError::UnknownHolding {
                    resource: res.into(),
                    method: p.name.clone(),
                    reference: r.clone(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(pc)
}

fn ports(raw: &RawLfes) -> impl Iterator<Item = (&str, &RawMethodxPort)> {
    raw.machines
        .iter()
        .flat_map(|m| m.methods_xport.iter().map(move |p| (m.name.as_str(), p)))
        .chain(raw.ind_buffers.iter().flat_map(|b| b.methods_xport.iter().map(move |p| (b.name.as_str(), p))))
        .chain(raw.transporters.iter().flat_map(|h| h.methods_xport.iter().map(move |p| (h.name.as_str(), p))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormIndex {
    pub resource: usize,
    /// Position in the machine's `methods_xform`.
    pub method: usize,
    /// idxForm: position in P_μ.
    pub form: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortIndex {
    pub resource: usize,
    /// Position in the resource's `methods_xport`.
    pub method: usize,
    pub origin: usize,
    pub dest: usize,
    pub hold: usize,
    pub port: usize,
    pub port_ref: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MethodIndices {
    pub forms: Vec<FormIndex>,
    pub ports: Vec<PortIndex>,
}

pub fn resolve_method_indices(
    raw: &RawLfes,
    ri: &ResourceIndex,
    pc: &ProcessCatalog,
) -> Result<MethodIndices, ModelError> {
    let mut mi = MethodIndices::default();
    for (k, m) in raw.machines.iter().enumerate() {
        for (j, f) in m.methods_xform.iter().enumerate() {
            let form = pc
                .transform_index(&f.name)
                .ok_or_else(|| ModelError::UnknownProcess(f.name.clone()))?;
            mi.forms.push(FormIndex { resource: k, method: j, form });
        }
    }
    let endpoint = |res: &str, p: &RawMethodxPort, name: &str| -> Result<usize, ModelError> {
        match ri.get(name) {
            Some(e) if e.kind == ResourceKind::Transporter => Err(ModelError::TransporterEndpoint {
                resource: res.into(),
                method: p.name.clone(),
                endpoint: name.into(),
            }),
            Some(e) => Ok(e.global),
            None => Err(ModelError::UnknownBuffer { resource: res.into(), method: p.name.clone(), endpoint: name.into() }),
        }
    };
    let mut current = String::new();
    let mut method = 0;
    for (res, p) in ports(raw) {
        if res != current {
            current = res.to_string();
            method = 0;
        }
        let resource = ri.get(res).expect("indexed resource").global;
        let origin = endpoint(res, p, &p.origin)?;
        let dest = endpoint(res, p, &p.dest)?;
        let reference = p
            .reference
            .as_deref()
            .ok_or_else(|| ModelError::MissingRef { resource: res.into(), method: p.name.clone() })?;
        let hold = pc.holding_index(reference).ok_or_else(|| ModelError::UnknownHolding {
            resource: res.into(),
            method: p.name.clone(),
            reference: reference.into(),
        })?;
        mi.ports.push(PortIndex {
            resource,
            method,
            origin,
            dest,
            hold,
            port: pc.port_index(origin, dest),
            port_ref: pc.port_ref_index(hold, origin, dest),
        });
        method += 1;
    }
    Ok(mi)
}

/// A set of system processes named by a service transition link or a method pair side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessSelector {
    Transform(usize),
    /// Every refined transport whose holding process is in the set.
    Holdings(BTreeSet<usize>),
}

impl ProcessSelector {
    pub fn matches(&self, catalog: &ProcessCatalog, process: usize) -> bool {
        match (self, catalog.process(process)) {
            (ProcessSelector::Transform(j), SystemProcess::Transform(k)) => *j == k,
            (ProcessSelector::Holdings(h), SystemProcess::Refined { hold, .. }) => h.contains(&hold),
            _ => false,
        }
    }
}

impl fmt::Display for ProcessSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessSelector::Transform(j) => write!(f, "transform #{j}"),
            ProcessSelector::Holdings(h) => write!(f, "holdings {h:?}"),
        }
    }
}

/// The validated system with every index the matrix builders need.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub raw: RawLfes,
    pub resources: ResourceIndex,
    pub catalog: ProcessCatalog,
    pub methods: MethodIndices,
    /// σL operands: explicit list first, then inferred from method attributes.
    pub operands: Vec<String>,
}

impl SystemModel {
    /// Validates, indexes and catalogs a parsed system.
    pub fn build(raw: RawLfes) -> Result<Self, ModelError> {
        let errors: Vec<Diagnostic> = validate_raw(&raw).into_iter().filter(|d| d.severity == Severity::Error).collect();
        if !errors.is_empty() {
            return Err(ModelError::Invalid(errors));
        }
        let resources = index_resources(&raw)?;
        let catalog = build_process_catalog(&raw, &resources)?;
        let methods = resolve_method_indices(&raw, &resources, &catalog)?;
        let operands = raw.operand_names();
        Ok(Self { raw, resources, catalog, methods, operands })
    }

    pub fn operand_index(&self, name: &str) -> Option<usize> {
        self.operands.iter().position(|o| o == name)
    }

    pub fn controller_index(&self, name: &str) -> Option<usize> {
        self.raw.controllers.iter().position(|c| c.name == name)
    }

    /// Resolves a (name, ref) process reference.
    pub fn select(&self, pr: &ProcessRef) -> Result<ProcessSelector, ModelError> {
        if pr.reference.is_none() {
            if let Some(j) = self.catalog.transform_index(&pr.name) {
                return Ok(ProcessSelector::Transform(j));
            }
        }
        let holds: BTreeSet<usize> = self
            .raw
            .abstractions
            .methods_xport
            .iter()
            .filter(|a| a.name == pr.name && pr.reference.as_ref().is_none_or(|r| *r == a.reference))
            .filter_map(|a| self.catalog.holding_index(&a.reference))
            .collect();
        if holds.is_empty() {
            Err(ModelError::UnknownProcess(pr.to_string()))
        } else {
            Ok(ProcessSelector::Holdings(holds))
        }
    }

    /// The concrete port method of `port` (resource/method position).
    pub fn port_method(&self, p: &PortIndex) -> &RawMethodxPort {
        let entry = &self.resources.entries[p.resource];
        match entry.kind {
            ResourceKind::Machine => &self.raw.machines[entry.class_index].methods_xport[p.method],
            ResourceKind::IndBuffer => &self.raw.ind_buffers[entry.class_index].methods_xport[p.method],
            ResourceKind::Transporter => &self.raw.transporters[entry.class_index].methods_xport[p.method],
        }
    }

    /// Controller attribute of resource `global`.
    pub fn resource_controller(&self, global: usize) -> Option<&str> {
        let e = &self.resources.entries[global];
        match e.kind {
            ResourceKind::Machine => self.raw.machines[e.class_index].controller.as_deref(),
            ResourceKind::IndBuffer => self.raw.ind_buffers[e.class_index].controller.as_deref(),
            ResourceKind::Transporter => self.raw.transporters[e.class_index].controller.as_deref(),
        }
    }
}
