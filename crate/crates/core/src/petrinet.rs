//! System Petri net and scheduled-event replay.
//!
//! Places are the buffers (machines then independent buffers); every declared
//! method instance is a transition. A scheduled event fires one capability on
//! one token: it removes one token of each consumed operand from the origin
//! place at `tStart`, holds them in the transition until `tEnd = tStart + dT`,
//! then deposits one token of each produced operand at the destination place.
//! Zero-duration events move tokens place to place at `tStart` and never show
//! up in the transition counts.
//!
//! The timeline starts with a synthetic initial column (time `0⁻`) holding the
//! initial marking, followed by every distinct start and end time. At each
//! time, completions are applied before starts; within each group events keep
//! their list order.

use serde::Serialize;

use crate::hfgt::HfgtBundle;
use crate::ingest::RawEventList;
use crate::metamodel::{ResourceKind, SystemModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PetriError {
    #[error("missing Petri net attributes: {}", .0.join("; "))]
    MissingAttributes(Vec<String>),
    #[error("{place}: initOperand {operand:?} is not a system operand")]
    UnknownInitOperand { place: String, operand: String },
    #[error("{0}: initial tokens need an operand but the system declares none")]
    NoOperand(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("infeasible event at row {row}: {reason}")]
    Infeasible { row: usize, reason: String },
    #[error("token {token} at time {time}: place {place} would hold a negative count of {operand}")]
    NegativeCount { token: u64, time: f64, place: String, operand: String },
    #[error("network has not been simulated")]
    NotSimulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub name: String,
    pub resource: usize,
    pub x: f64,
    pub y: f64,
    pub init_tokens: u64,
    pub init_operand: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub name: String,
    pub resource: usize,
    /// Row of the system process set this transition realizes.
    pub process: usize,
    pub active: bool,
    pub x: f64,
    pub y: f64,
    pub dt: f64,
    pub init_tokens: u64,
    pub origin_place: usize,
    pub dest_place: usize,
    pub consumes: Vec<usize>,
    pub produces: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcDirection {
    PlaceToTransition,
    TransitionToPlace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub place: usize,
    pub transition: usize,
    pub direction: ArcDirection,
}

/// Token counts split by operand: `[operand][node][column]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DrawMatrices {
    pub qb: Vec<Vec<Vec<u64>>>,
    pub qt: Vec<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PetriNetwork {
    pub operands: Vec<String>,
    pub places: Vec<Place>,
    pub transitions: Vec<Transition>,
    pub arcs: Vec<Arc>,
    /// Column times; column 0 is the initial marking.
    pub timeline: Vec<f64>,
    /// places × timeline.
    pub qb: Vec<Vec<u64>>,
    /// transitions × timeline.
    pub qt: Vec<Vec<u64>>,
    pub draw: Option<DrawMatrices>,
}

impl PetriNetwork {
    pub fn initial_tokens(&self) -> u64 {
        self.places.iter().map(|p| p.init_tokens).sum::<u64>() + self.transitions.iter().map(|t| t.init_tokens).sum::<u64>()
    }

    pub fn is_simulated(&self) -> bool {
        !self.timeline.is_empty()
    }
}

pub fn build_petri_network(model: &SystemModel) -> Result<PetriNetwork, PetriError> {
    let raw = &model.raw;
    let mut missing = Vec::new();
    let mut need = |path: String, attrs: &[(&str, bool)]| {
        let absent: Vec<&str> = attrs.iter().filter(|(_, present)| !present).map(|(a, _)| *a).collect();
        if !absent.is_empty() {
            missing.push(format!("{path} lacks {}", absent.join(", ")));
        }
    };
    let default_operand = |place: &str, tokens: u64, named: &Option<String>| -> Result<usize, PetriError> {
        match named {
            Some(op) => model
                .operand_index(op)
                .ok_or_else(|| PetriError::UnknownInitOperand { place: place.into(), operand: op.clone() }),
            None if model.operands.is_empty() && tokens > 0 => Err(PetriError::NoOperand(place.into())),
            None => Ok(0),
        }
    };

    let mut places = Vec::new();
    for (i, m) in raw.machines.iter().enumerate() {
        need(
            format!("/LFES/Machine[{}]", i + 1),
            &[("gpsX", m.gps_x.is_some()), ("gpsY", m.gps_y.is_some()), ("initTokens", m.init_tokens.is_some())],
        );
        let tokens = m.init_tokens.unwrap_or(0);
        places.push(Place {
            name: m.name.clone(),
            resource: i,
            x: m.gps_x.unwrap_or(0.0),
            y: m.gps_y.unwrap_or(0.0),
            init_tokens: tokens,
            init_operand: default_operand(&m.name, tokens, &m.init_operand)?,
        });
    }
    for (i, b) in raw.ind_buffers.iter().enumerate() {
        need(
            format!("/LFES/IndBuffer[{}]", i + 1),
            &[("gpsX", b.gps_x.is_some()), ("gpsY", b.gps_y.is_some()), ("initTokens", b.init_tokens.is_some())],
        );
        let tokens = b.init_tokens.unwrap_or(0);
        places.push(Place {
            name: b.name.clone(),
            resource: raw.machines.len() + i,
            x: b.gps_x.unwrap_or(0.0),
            y: b.gps_y.unwrap_or(0.0),
            init_tokens: tokens,
            init_operand: default_operand(&b.name, tokens, &b.init_operand)?,
        });
    }

    let ops = |names: &[String]| -> Vec<usize> {
        names.iter().map(|n| model.operand_index(n).expect("operand collected from the model")).collect()
    };
    let pc = &model.catalog;
    let mut transitions = Vec::new();
    let mut forms = model.methods.forms.iter().peekable();
    let mut ports = model.methods.ports.iter().peekable();
    for entry in &model.resources.entries {
        let host = (entry.kind != ResourceKind::Transporter).then(|| (places[entry.global].x, places[entry.global].y));
        let elem = format!("/LFES/{}[{}]", entry.kind.element(), entry.class_index + 1);
        while let Some(f) = forms.next_if(|f| f.resource == entry.global) {
            let m = &raw.machines[f.resource].methods_xform[f.method];
            need(
                format!("{elem}/MethodxForm[{}]", f.method + 1),
                &[
                    ("gpsOffSetX", m.gps_offset_x.is_some()),
                    ("gpsOffSetY", m.gps_offset_y.is_some()),
                    ("initTokens", m.init_tokens.is_some()),
                    ("dT", m.dt.is_some()),
                ],
            );
            let (hx, hy) = host.unwrap_or_default();
            transitions.push(Transition {
                name: m.name.clone(),
                resource: entry.global,
                process: f.form,
                active: m.status.is_active(),
                x: hx + m.gps_offset_x.unwrap_or(0.0),
                y: hy + m.gps_offset_y.unwrap_or(0.0),
                dt: m.dt.unwrap_or(0.0),
                init_tokens: m.init_tokens.unwrap_or(0),
                origin_place: entry.global,
                dest_place: entry.global,
                consumes: ops(&m.operand),
                produces: ops(&m.output),
            });
        }
        while let Some(p) = ports.next_if(|p| p.resource == entry.global) {
            let m = model.port_method(p);
            need(
                format!("{elem}/MethodxPort[{}]", p.method + 1),
                &[
                    ("gpsOffSetX", m.gps_offset_x.is_some()),
                    ("gpsOffSetY", m.gps_offset_y.is_some()),
                    ("initTokens", m.init_tokens.is_some()),
                    ("dT", m.dt.is_some()),
                ],
            );
            // Transporters have no position of their own: draw at the midpoint of the route.
            let (hx, hy) = host.unwrap_or_else(|| {
                let (o, d) = (&places[p.origin], &places[p.dest]);
                ((o.x + d.x) / 2.0, (o.y + d.y) / 2.0)
            });
            let holding = raw.abstractions.methods_xport.iter().find(|a| a.reference == pc.holding[p.hold]);
            let pick = |own: &[String], abstract_list: Option<&Vec<String>>| {
                if own.is_empty() {
                    ops(abstract_list.map(Vec::as_slice).unwrap_or_default())
                } else {
                    ops(own)
                }
            };
            transitions.push(Transition {
                name: m.name.clone(),
                resource: entry.global,
                process: pc.num_transform() + p.port_ref,
                active: m.status.is_active(),
                x: hx + m.gps_offset_x.unwrap_or(0.0),
                y: hy + m.gps_offset_y.unwrap_or(0.0),
                dt: m.dt.unwrap_or(0.0),
                init_tokens: m.init_tokens.unwrap_or(0),
                origin_place: p.origin,
                dest_place: p.dest,
                consumes: pick(&m.operand, holding.map(|h| &h.operand)),
                produces: pick(&m.output, holding.map(|h| &h.output)),
            });
        }
    }
    if !missing.is_empty() {
        return Err(PetriError::MissingAttributes(missing));
    }
    let arcs = transitions
        .iter()
        .enumerate()
        .flat_map(|(k, t)| {
            [
                Arc { place: t.origin_place, transition: k, direction: ArcDirection::PlaceToTransition },
                Arc { place: t.dest_place, transition: k, direction: ArcDirection::TransitionToPlace },
            ]
        })
        .collect();
    Ok(PetriNetwork { operands: model.operands.clone(), places, transitions, arcs, ..Default::default() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplayOptions {
    /// Interpret `idxProcess` as a position in the resource's own method list
    /// (transformations first, then ports) instead of the system process set.
    pub local_process_index: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappedEvent {
    /// 1-based row of the event file.
    pub row: usize,
    pub token: u64,
    pub t_start: f64,
    pub t_end: f64,
    /// 0-based global resource.
    pub resource: usize,
    /// 0-based system process.
    pub process: usize,
    /// 0-based capability `ψ = σR·process + resource`.
    pub capability: usize,
    pub transition: usize,
    pub origin_place: usize,
    pub dest_place: usize,
    pub consumes: Vec<usize>,
    pub produces: Vec<usize>,
}

pub fn map_events(
    events: &RawEventList,
    model: &SystemModel,
    bundle: &HfgtBundle,
    net: &PetriNetwork,
    opts: &ReplayOptions,
) -> Result<Vec<MappedEvent>, ReplayError> {
    let nr = model.resources.num_resources();
    events
        .rows
        .iter()
        .map(|ev| {
            let infeasible = |reason: String| ReplayError::Infeasible { row: ev.row, reason };
            if ev.resource > nr {
                return Err(infeasible(format!("resource {} does not exist (σR = {nr})", ev.resource)));
            }
            let v = ev.resource - 1;
            let process = if opts.local_process_index {
                let local: Vec<&Transition> = net.transitions.iter().filter(|t| t.resource == v).collect();
                local
                    .get(ev.process - 1)
                    .map(|t| t.process)
                    .ok_or_else(|| infeasible(format!("resource {} has no local process {}", ev.resource, ev.process)))?
            } else {
                ev.process - 1
            };
            if process >= model.catalog.num_processes() || !bundle.system.a.get(process, v) {
                return Err(infeasible(format!(
                    "process {} is not a realized capability of resource {}",
                    process + 1,
                    ev.resource
                )));
            }
            let (k, t) = net
                .transitions
                .iter()
                .enumerate()
                .find(|(_, t)| t.resource == v && t.process == process && t.active)
                .ok_or_else(|| infeasible("no active transition realizes the capability".into()))?;
            Ok(MappedEvent {
                row: ev.row,
                token: ev.token,
                t_start: ev.t_start,
                t_end: ev.t_start + t.dt,
                resource: v,
                process,
                capability: nr * process + v,
                transition: k,
                origin_place: t.origin_place,
                dest_place: t.dest_place,
                consumes: t.consumes.clone(),
                produces: t.produces.clone(),
            })
        })
        .collect()
}

fn build_timeline(events: &[MappedEvent]) -> Vec<f64> {
    let mut times: Vec<f64> = events.iter().flat_map(|e| [e.t_start, e.t_end]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut timeline = Vec::with_capacity(times.len() + 1);
    timeline.push(0.0);
    timeline.extend(times);
    timeline
}

fn column_of(timeline: &[f64], t: f64) -> usize {
    1 + timeline[1..].partition_point(|&x| x < t)
}

/// Per-operand replay shared by [`simulate_token_flow`] and [`derive_draw_matrices`].
fn replay(net: &PetriNetwork, events: &[MappedEvent]) -> Result<(Vec<f64>, DrawMatrices), ReplayError> {
    let timeline = build_timeline(events);
    let (nl, np, nt, nc) = (net.operands.len(), net.places.len(), net.transitions.len(), timeline.len());
    let mut places = vec![vec![0u64; np]; nl];
    let mut trans = vec![vec![0u64; nt]; nl];
    for (p, place) in net.places.iter().enumerate() {
        if place.init_tokens > 0 {
            places[place.init_operand][p] += place.init_tokens;
        }
    }
    for (k, t) in net.transitions.iter().enumerate() {
        if t.init_tokens > 0 {
            let op = t.consumes.first().or(t.produces.first()).copied().unwrap_or(0);
            if nl > 0 {
                trans[op][k] += t.init_tokens;
            }
        }
    }

    let mut starts: Vec<Vec<&MappedEvent>> = vec![Vec::new(); nc];
    let mut ends: Vec<Vec<&MappedEvent>> = vec![Vec::new(); nc];
    for e in events {
        starts[column_of(&timeline, e.t_start)].push(e);
        if e.t_end > e.t_start {
            ends[column_of(&timeline, e.t_end)].push(e);
        }
    }

    let mut draw = DrawMatrices { qb: vec![vec![vec![0; nc]; np]; nl], qt: vec![vec![vec![0; nc]; nt]; nl] };
    let snapshot = |draw: &mut DrawMatrices, col: usize, places: &[Vec<u64>], trans: &[Vec<u64>]| {
        for (layer, counts) in draw.qb.iter_mut().zip(places) {
            layer.iter_mut().zip(counts).for_each(|(row, &n)| row[col] = n);
        }
        for (layer, counts) in draw.qt.iter_mut().zip(trans) {
            layer.iter_mut().zip(counts).for_each(|(row, &n)| row[col] = n);
        }
    };
    snapshot(&mut draw, 0, &places, &trans);
    for col in 1..nc {
        let time = timeline[col];
        for e in &ends[col] {
            for &l in &e.consumes {
                trans[l][e.transition] -= 1;
            }
            for &l in &e.produces {
                places[l][e.dest_place] += 1;
            }
        }
        for e in &starts[col] {
            for &l in &e.consumes {
                let slot = &mut places[l][e.origin_place];
                *slot = slot.checked_sub(1).ok_or_else(|| ReplayError::NegativeCount {
                    token: e.token,
                    time,
                    place: net.places[e.origin_place].name.clone(),
                    operand: net.operands[l].clone(),
                })?;
                if e.t_end > e.t_start {
                    trans[l][e.transition] += 1;
                }
            }
            if e.t_end == e.t_start {
                for &l in &e.produces {
                    places[l][e.dest_place] += 1;
                }
            }
        }
        snapshot(&mut draw, col, &places, &trans);
    }
    Ok((timeline, draw))
}

fn sum_over_operands(stack: &[Vec<Vec<u64>>], nodes: usize, cols: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0u64; cols]; nodes];
    for layer in stack {
        for (n, row) in layer.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                out[n][c] += v;
            }
        }
    }
    out
}

/// Populates the timeline and the `Q_b` / `Q_t` count matrices.
pub fn simulate_token_flow(mut net: PetriNetwork, events: &[MappedEvent]) -> Result<PetriNetwork, ReplayError> {
    let (timeline, draw) = replay(&net, events)?;
    net.qb = sum_over_operands(&draw.qb, net.places.len(), timeline.len());
    net.qt = sum_over_operands(&draw.qt, net.transitions.len(), timeline.len());
    net.timeline = timeline;
    log::debug!("replayed {} events over {} columns", events.len(), net.timeline.len());
    Ok(net)
}

/// Per-operand decomposition of `Q_b` / `Q_t`.
pub fn derive_draw_matrices(net: &PetriNetwork, events: &[MappedEvent]) -> Result<DrawMatrices, ReplayError> {
    replay(net, events).map(|(_, d)| d)
}

/// Builds, maps, simulates and decomposes in one call.
pub fn run_replay(
    model: &SystemModel,
    bundle: &HfgtBundle,
    events: &RawEventList,
    opts: &ReplayOptions,
) -> Result<(PetriNetwork, Vec<MappedEvent>), RunError> {
    let net = build_petri_network(model)?;
    let mapped = map_events(events, model, bundle, &net, opts)?;
    let mut net = simulate_token_flow(net, &mapped)?;
    net.draw = Some(derive_draw_matrices(&net, &mapped)?);
    Ok((net, mapped))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Petri(#[from] PetriError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

pub const FRAMES_SCHEMA: &str = "hfgt-frames/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameDocument {
    pub schema: &'static str,
    pub system: String,
    pub operands: Vec<String>,
    pub places: Vec<NodeInfo>,
    pub transitions: Vec<NodeInfo>,
    pub arcs: Vec<Arc>,
    pub legend: Legend,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeInfo {
    /// 0-based position, used by `arcs` and frame arrays.
    pub index: usize,
    pub name: String,
    pub resource: String,
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Legend {
    /// `"<1-based index> <name>"`.
    pub places: Vec<String>,
    pub transitions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub index: usize,
    pub time: f64,
    /// True for the synthetic initial-marking column.
    pub initial: bool,
    pub places: Vec<u64>,
    pub transitions: Vec<u64>,
    /// `[operand][place]`, aligned with the document's `operands`.
    pub places_by_operand: Vec<Vec<u64>>,
    pub transitions_by_operand: Vec<Vec<u64>>,
    pub events: Vec<FrameEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameEvent {
    pub row: usize,
    pub token: u64,
    pub transition: usize,
    pub phase: EventPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventPhase {
    Start,
    End,
}

pub fn export_frames(
    system: &str,
    model: &SystemModel,
    net: &PetriNetwork,
    events: &[MappedEvent],
) -> Result<FrameDocument, ReplayError> {
    let draw = net.draw.as_ref().ok_or(ReplayError::NotSimulated)?;
    if !net.is_simulated() {
        return Err(ReplayError::NotSimulated);
    }
    let resource_name = |v: usize| model.resources.entries[v].name.clone();
    let places = net
        .places
        .iter()
        .enumerate()
        .map(|(i, p)| NodeInfo { index: i, name: p.name.clone(), resource: resource_name(p.resource), x: p.x, y: p.y, dt: None })
        .collect();
    let transitions = net
        .transitions
        .iter()
        .enumerate()
        .map(|(i, t)| NodeInfo {
            index: i,
            name: t.name.clone(),
            resource: resource_name(t.resource),
            x: t.x,
            y: t.y,
            dt: Some(t.dt),
        })
        .collect();
    let legend = Legend {
        places: net.places.iter().enumerate().map(|(i, p)| format!("{} {}", i + 1, p.name)).collect(),
        transitions: net.transitions.iter().enumerate().map(|(i, t)| format!("{} {}", i + 1, t.name)).collect(),
    };
    let column = |rows: &[Vec<u64>], c: usize| rows.iter().map(|r| r[c]).collect::<Vec<u64>>();
    let frames = net
        .timeline
        .iter()
        .enumerate()
        .map(|(c, &time)| {
            let mut notes = Vec::new();
            if c > 0 {
                for e in events {
                    if e.t_end > e.t_start && e.t_end == time {
                        notes.push(FrameEvent { row: e.row, token: e.token, transition: e.transition, phase: EventPhase::End });
                    }
                }
                for e in events {
                    if e.t_start == time {
                        notes.push(FrameEvent { row: e.row, token: e.token, transition: e.transition, phase: EventPhase::Start });
                    }
                }
            }
            Frame {
                index: c,
                time,
                initial: c == 0,
                places: column(&net.qb, c),
                transitions: column(&net.qt, c),
                places_by_operand: draw.qb.iter().map(|layer| column(layer, c)).collect(),
                transitions_by_operand: draw.qt.iter().map(|layer| column(layer, c)).collect(),
                events: notes,
            }
        })
        .collect();
    Ok(FrameDocument {
        schema: FRAMES_SCHEMA,
        system: system.to_string(),
        operands: net.operands.clone(),
        places,
        transitions,
        arcs: net.arcs.clone(),
        legend,
        frames,
    })
}

/// Writes a count matrix as CSV: header `name,<times...>` with the initial column labelled `0-`.
pub fn counts_csv(names: impl IntoIterator<Item = String>, timeline: &[f64], counts: &[Vec<u64>]) -> String {
    let mut out = String::from("name");
    for (c, t) in timeline.iter().enumerate() {
        out.push(',');
        if c == 0 {
            out.push_str("0-");
        } else {
            out.push_str(&t.to_string());
        }
    }
    out.push('\n');
    for (name, row) in names.into_iter().zip(counts) {
        out.push_str(&csv_field(&name));
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
