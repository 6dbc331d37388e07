//! Raw input structures: the LFES XML system description and the
//! scheduled-event CSV.
//!
//! Parsing is strict about structure (unknown elements are rejected) but
//! lenient about attributes: anything not part of the grammar is kept in the
//! `extra` map of the element it appeared on and written back by
//! [`RawLfes::to_xml`].

mod events;
mod validate;
mod xml;

use std::collections::BTreeMap;
use std::fmt;

pub use events::{parse_event_list, EventListError, RawEvent, RawEventList, EVENT_COLUMNS};
pub use validate::{validate_raw, Diagnostic, Severity};
pub use xml::{parse_lfes, ParseError};

/// Attributes that are not part of the grammar, keyed by attribute name.
pub type Extra = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataState {
    #[default]
    Raw,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Status {
    #[default]
    Active,
    Inactive,
}

impl Status {
    pub fn is_active(self) -> bool {
        self == Status::Active
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Active => "active",
            Status::Inactive => "inactive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawLfes {
    pub name: String,
    pub system_type: String,
    pub data_state: DataState,
    pub operands: Vec<String>,
    pub machines: Vec<RawMachine>,
    pub ind_buffers: Vec<RawIndBuffer>,
    pub transporters: Vec<RawTransporter>,
    pub controllers: Vec<RawController>,
    pub services: Vec<RawService>,
    pub abstractions: RawAbstractions,
    pub extra: Extra,
}

/// A transformation resource. Machines are also buffers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawMachine {
    pub name: String,
    pub controller: Option<String>,
    pub gps_x: Option<f64>,
    pub gps_y: Option<f64>,
    pub init_tokens: Option<u64>,
    /// Operand of the initial tokens (replay only); defaults to the first system operand.
    pub init_operand: Option<String>,
    pub methods_xform: Vec<RawMethodxForm>,
    pub methods_xport: Vec<RawMethodxPort>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawIndBuffer {
    pub name: String,
    pub controller: Option<String>,
    pub gps_x: Option<f64>,
    pub gps_y: Option<f64>,
    pub init_tokens: Option<u64>,
    pub init_operand: Option<String>,
    pub methods_xport: Vec<RawMethodxPort>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTransporter {
    pub name: String,
    pub controller: Option<String>,
    pub methods_xport: Vec<RawMethodxPort>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawMethodxForm {
    pub name: String,
    pub status: Status,
    pub operand: Vec<String>,
    pub output: Vec<String>,
    pub gps_offset_x: Option<f64>,
    pub gps_offset_y: Option<f64>,
    pub init_tokens: Option<u64>,
    pub dt: Option<f64>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawMethodxPort {
    pub name: String,
    pub status: Status,
    pub origin: String,
    pub dest: String,
    pub reference: Option<String>,
    pub operand: Vec<String>,
    pub output: Vec<String>,
    pub gps_offset_x: Option<f64>,
    pub gps_offset_y: Option<f64>,
    pub init_tokens: Option<u64>,
    pub dt: Option<f64>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawController {
    pub name: String,
    pub status: Status,
    pub peer_recipients: Vec<String>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawService {
    pub name: String,
    pub status: Status,
    /// Explicit operand binding; when absent the service is bound to the operand
    /// that shares its name.
    pub operand: Option<String>,
    pub places: Vec<String>,
    pub transitions: Vec<RawServiceTransition>,
    pub extra: Extra,
}

impl RawService {
    pub fn bound_operand(&self) -> &str {
        self.operand.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawServiceTransition {
    pub name: String,
    pub preset: Vec<String>,
    pub postset: Vec<String>,
    pub method_link: ProcessRef,
    pub extra: Extra,
}

/// Names a system process: a transformation by name, or a refined transport by
/// the abstract port name plus (optionally) the holding process.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProcessRef {
    pub name: String,
    pub reference: Option<String>,
}

impl fmt::Display for ProcessRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reference {
            Some(r) => write!(f, "{} [{}]", self.name, r),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawAbstractions {
    pub methods_xport: Vec<RawAbstractPort>,
    pub method_pairs: Vec<RawMethodPair>,
}

/// A holding process declaration inside `<Abstractions>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawAbstractPort {
    pub name: String,
    pub reference: String,
    pub operand: Vec<String>,
    pub output: Vec<String>,
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawMethodPair {
    pub first: ProcessRef,
    pub second: ProcessRef,
    pub extra: Extra,
}

impl RawLfes {
    /// Every operand name, explicit list first, then in document order of first use.
    pub fn operand_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |name: &str| {
            if !out.iter().any(|o| o == name) {
                out.push(name.to_string());
            }
        };
        for o in &self.operands {
            push(o);
        }
        for m in &self.machines {
            for f in &m.methods_xform {
                f.operand.iter().chain(&f.output).for_each(|o| push(o));
            }
            for p in &m.methods_xport {
                p.operand.iter().chain(&p.output).for_each(|o| push(o));
            }
        }
        for b in &self.ind_buffers {
            for p in &b.methods_xport {
                p.operand.iter().chain(&p.output).for_each(|o| push(o));
            }
        }
        for h in &self.transporters {
            for p in &h.methods_xport {
                p.operand.iter().chain(&p.output).for_each(|o| push(o));
            }
        }
        for a in &self.abstractions.methods_xport {
            a.operand.iter().chain(&a.output).for_each(|o| push(o));
        }
        out
    }
}
