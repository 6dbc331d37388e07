//! Random LFES systems plus brute-force oracles computed from the generator's
//! own record, never from the library's indices.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;

use hfgt::ingest::parse_lfes;
use hfgt::{HfgtBundle, HfgtOptions, SystemModel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const DESK3: &str = include_str!("../fixtures/desk3.xml");
pub const DESK3_EVENTS: &str = include_str!("../fixtures/desk3_events.csv");

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn load(xml: &str) -> (SystemModel, HfgtBundle) {
    let model = SystemModel::build(parse_lfes(xml.as_bytes()).unwrap()).unwrap();
    let bundle = HfgtBundle::compute(&model, &HfgtOptions::default()).unwrap();
    (model, bundle)
}

#[derive(Debug, Clone)]
pub struct GenForm {
    pub name: usize,
    pub active: bool,
    pub operand: Vec<usize>,
    pub output: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GenPort {
    pub hold: usize,
    pub origin: usize,
    pub dest: usize,
    pub active: bool,
}

/// `Ok(transform name)` or `Err((hold, with_ref))`.
pub type GenLink = Result<usize, (usize, bool)>;

#[derive(Debug, Clone)]
pub struct GenService {
    pub operand: usize,
    pub active: bool,
    pub places: usize,
    /// (preset, postset, link).
    pub transitions: Vec<(Vec<usize>, Vec<usize>, GenLink)>,
}

/// A small random system described independently of the library's data model.
#[derive(Debug, Clone)]
pub struct GenSystem {
    pub machines: usize,
    pub buffers: usize,
    pub transporters: usize,
    pub operands: usize,
    /// Per holding process: (operand list, output list).
    pub holds: Vec<(Vec<usize>, Vec<usize>)>,
    /// Per machine.
    pub forms: Vec<Vec<GenForm>>,
    /// Per resource in global order.
    pub ports: Vec<Vec<GenPort>>,
    pub init_tokens: Vec<u64>,
    pub controllers: Vec<(bool, Vec<usize>)>,
    pub controller_of: Vec<Option<usize>>,
    pub services: Vec<GenService>,
    /// Each side: `Ok(transform name)` or `Err(hold)`.
    pub method_pairs: Vec<(Result<usize, usize>, Result<usize, usize>)>,
}

fn subset(rng: &mut StdRng, n: usize, nonempty: bool) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !nonempty || !s.is_empty() || n == 0 {
            return s;
        }
    }
}

impl GenSystem {
    pub fn random(seed: u64) -> Self {
        Self::random_with(seed, false)
    }

    /// `conservative` keeps every holding process single-operand with equal
    /// operand and output and drops transformations, so replays conserve tokens.
    pub fn random_with(seed: u64, conservative: bool) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let operands = rng.random_range(1..=3);
        let machines = if conservative { rng.random_range(0..=2) } else { rng.random_range(0..=3) };
        let buffers = rng.random_range(usize::from(machines == 0)..=2);
        let nb = machines + buffers;
        let nholds = rng.random_range(usize::from(conservative)..=2);
        let transporters = if nholds == 0 { 0 } else { rng.random_range(0..=(5 - nb).min(2)) };
        let holds = (0..nholds)
            .map(|_| {
                if conservative {
                    let l = rng.random_range(0..operands);
                    (vec![l], vec![l])
                } else {
                    (subset(&mut rng, operands, false), subset(&mut rng, operands, false))
                }
            })
            .collect();
        let forms = (0..machines)
            .map(|_| {
                if conservative {
                    return Vec::new();
                }
                let mut names: Vec<usize> = (0..3).filter(|_| rng.random_bool(0.4)).collect();
                names.truncate(2);
                names
                    .into_iter()
                    .map(|name| GenForm {
                        name,
                        active: rng.random_bool(0.8),
                        operand: subset(&mut rng, operands, true),
                        output: subset(&mut rng, operands, true),
                    })
                    .collect()
            })
            .collect();
        let nr = nb + transporters;
        let mut ports: Vec<Vec<GenPort>> = Vec::new();
        for v in 0..nr {
            let mut seen = BTreeSet::new();
            let mut list = Vec::new();
            let want = if v >= nb { rng.random_range(1..=3) } else { rng.random_range(0..=2) };
            for _ in 0..want {
                if nholds == 0 {
                    break;
                }
                let hold = rng.random_range(0..nholds);
                // buffers store in place or hand off to another buffer; transporters move between any buffers
                let origin = if v < nb { v } else { rng.random_range(0..nb) };
                let dest = rng.random_range(0..nb);
                if seen.insert((hold, origin, dest)) {
                    list.push(GenPort { hold, origin, dest, active: rng.random_bool(0.85) });
                }
            }
            if v >= nb && list.is_empty() {
                list.push(GenPort { hold: 0, origin: 0, dest: nb - 1, active: true });
            }
            ports.push(list);
        }
        let init_tokens = (0..nb).map(|_| rng.random_range(0..=3)).collect();
        let nq = rng.random_range(0..=2);
        let controllers =
            (0..nq).map(|_| (rng.random_bool(0.85), (0..nq).filter(|_| rng.random_bool(0.4)).collect())).collect();
        let controller_of = (0..nr).map(|_| if nq > 0 && rng.random_bool(0.7) { Some(rng.random_range(0..nq)) } else { None }).collect();

        let sys_forms: &Vec<Vec<GenForm>> = &forms;
        let transform_names: Vec<usize> =
            (0..3).filter(|n| sys_forms.iter().flatten().any(|f| f.name == *n)).collect();
        let mut services = Vec::new();
        if !conservative && rng.random_bool(0.6) && (nholds > 0 || !transform_names.is_empty()) {
            let places = rng.random_range(1..=4);
            let ne = rng.random_range(1..=3);
            let transitions = (0..ne)
                .map(|_| {
                    let pre = subset(&mut rng, places, false);
                    let mut post = subset(&mut rng, places, false);
                    if pre.is_empty() && post.is_empty() {
                        post.push(0);
                    }
                    let link = if !transform_names.is_empty() && (nholds == 0 || rng.random_bool(0.5)) {
                        Ok(transform_names[rng.random_range(0..transform_names.len())])
                    } else {
                        Err((rng.random_range(0..nholds), rng.random_bool(0.5)))
                    };
                    (pre, post, link)
                })
                .collect();
            services.push(GenService { operand: rng.random_range(0..operands), active: rng.random_bool(0.85), places, transitions });
        }
        let mut method_pairs = Vec::new();
        if !conservative && rng.random_bool(0.4) {
            let side = |rng: &mut StdRng| {
                if !transform_names.is_empty() && (nholds == 0 || rng.random_bool(0.5)) {
                    Ok(transform_names[rng.random_range(0..transform_names.len())])
                } else {
                    Err(rng.random_range(0..nholds))
                }
            };
            if nholds > 0 || !transform_names.is_empty() {
                for _ in 0..rng.random_range(1..=2) {
                    let a = side(&mut rng);
                    let b = side(&mut rng);
                    method_pairs.push((a, b));
                }
            }
        }
        GenSystem {
            machines,
            buffers,
            transporters,
            operands,
            holds,
            forms,
            ports,
            init_tokens,
            controllers,
            controller_of,
            services,
            method_pairs,
        }
    }

    pub fn num_buffers(&self) -> usize {
        self.machines + self.buffers
    }

    pub fn num_resources(&self) -> usize {
        self.num_buffers() + self.transporters
    }

    pub fn resource_name(&self, v: usize) -> String {
        if v < self.machines {
            format!("M{}", v + 1)
        } else if v < self.num_buffers() {
            format!("B{}", v - self.machines + 1)
        } else {
            format!("H{}", v - self.num_buffers() + 1)
        }
    }

    /// Transform names in first-appearance order.
    pub fn transform_order(&self) -> Vec<usize> {
        let mut order = Vec::new();
        for f in self.forms.iter().flatten() {
            if !order.contains(&f.name) {
                order.push(f.name);
            }
        }
        order
    }

    pub fn num_processes(&self) -> usize {
        self.transform_order().len() + self.holds.len() * self.num_buffers().pow(2)
    }

    pub fn refined_row(&self, hold: usize, origin: usize, dest: usize) -> usize {
        let nb = self.num_buffers();
        self.transform_order().len() + nb * nb * hold + nb * origin + dest
    }

    pub fn to_xml(&self) -> String {
        let ops = |l: &[usize]| l.iter().map(|o| format!("op{}", o + 1)).collect::<Vec<_>>().join(",");
        let status = |a: bool| if a { "active" } else { "inactive" };
        let ctl = |v: usize| match self.controller_of[v] {
            Some(q) => format!(r#" controller="C{}""#, q + 1),
            None => String::new(),
        };
        let port_xml = |v: usize, k: usize, p: &GenPort| {
            format!(
                r#"    <MethodxPort name="port{k} of {}" status="{}" origin="{}" dest="{}" ref="hold{}" gpsOffSetX="0" gpsOffSetY="{k}" initTokens="0" dT="{}"/>
"#,
                self.resource_name(v),
                status(p.active),
                self.resource_name(p.origin),
                self.resource_name(p.dest),
                p.hold + 1,
                (k % 3) as f64 * 0.5,
            )
        };
        let mut x = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<LFES name=\"random\" type=\"test\" dataState=\"raw\">\n");
        for l in 0..self.operands {
            let _ = writeln!(x, r#"  <Operand name="op{}"/>"#, l + 1);
        }
        for v in 0..self.num_buffers() {
            let tag = if v < self.machines { "Machine" } else { "IndBuffer" };
            let _ = writeln!(
                x,
                r#"  <{tag} name="{}"{} gpsX="{v}" gpsY="0" initTokens="{}">"#,
                self.resource_name(v),
                ctl(v),
                self.init_tokens[v]
            );
            if v < self.machines {
                for (k, f) in self.forms[v].iter().enumerate() {
                    let _ = writeln!(
                        x,
                        r#"    <MethodxForm name="form{}" status="{}" operand="{}" output="{}" gpsOffSetX="1" gpsOffSetY="{k}" initTokens="0" dT="1"/>"#,
                        f.name + 1,
                        status(f.active),
                        ops(&f.operand),
                        ops(&f.output)
                    );
                }
            }
            for (k, p) in self.ports[v].iter().enumerate() {
                x.push_str(&port_xml(v, k, p));
            }
            let _ = writeln!(x, "  </{tag}>");
        }
        for v in self.num_buffers()..self.num_resources() {
            let _ = writeln!(x, r#"  <Transporter name="{}"{}>"#, self.resource_name(v), ctl(v));
            for (k, p) in self.ports[v].iter().enumerate() {
                x.push_str(&port_xml(v, k, p));
            }
            x.push_str("  </Transporter>\n");
        }
        for (q, (active, peers)) in self.controllers.iter().enumerate() {
            let _ = writeln!(x, r#"  <Controller name="C{}" status="{}">"#, q + 1, status(*active));
            for p in peers {
                let _ = writeln!(x, r#"    <PeerRecipient name="C{}"/>"#, p + 1);
            }
            x.push_str("  </Controller>\n");
        }
        for (s, svc) in self.services.iter().enumerate() {
            let _ = writeln!(
                x,
                r#"  <Service name="service{}" status="{}" operand="op{}">"#,
                s + 1,
                status(svc.active),
                svc.operand + 1
            );
            for p in 0..svc.places {
                let _ = writeln!(x, r#"    <ServicePlace name="s{}"/>"#, p + 1);
            }
            for (e, (pre, post, link)) in svc.transitions.iter().enumerate() {
                let names = |l: &[usize]| l.iter().map(|p| format!("s{}", p + 1)).collect::<Vec<_>>().join(",");
                let link = match link {
                    Ok(n) => format!(r#"methodLinkName="form{}""#, n + 1),
                    Err((h, true)) => format!(r#"methodLinkName="abstract{}" methodLinkRef="hold{}""#, h + 1, h + 1),
                    Err((h, false)) => format!(r#"methodLinkName="abstract{}""#, h + 1),
                };
                let _ = writeln!(
                    x,
                    r#"    <ServiceTransition name="e{}" preset="{}" postset="{}" {link}/>"#,
                    e + 1,
                    names(pre),
                    names(post)
                );
            }
            x.push_str("  </Service>\n");
        }
        x.push_str("  <Abstractions>\n");
        for (h, (operand, output)) in self.holds.iter().enumerate() {
            let _ = writeln!(
                x,
                r#"    <MethodxPort name="abstract{}" ref="hold{}" operand="{}" output="{}"/>"#,
                h + 1,
                h + 1,
                ops(operand),
                ops(output)
            );
        }
        for (a, b) in &self.method_pairs {
            let side = |s: &Result<usize, usize>, n: u8| match s {
                Ok(t) => format!(r#"process{n}="form{}""#, t + 1),
                Err(h) => format!(r#"process{n}="abstract{}" ref{n}="hold{}""#, h + 1, h + 1),
            };
            let _ = writeln!(x, "    <MethodPair {} {}/>", side(a, 1), side(b, 2));
        }
        x.push_str("  </Abstractions>\n</LFES>\n");
        x
    }

    // ---- oracles, 0-based ----

    /// Realized (process, resource) cells.
    pub fn oracle_as(&self) -> BTreeSet<(usize, usize)> {
        let order = self.transform_order();
        let mut declared = BTreeSet::new();
        let mut live = BTreeSet::new();
        for (v, fs) in self.forms.iter().enumerate() {
            for f in fs {
                let i = order.iter().position(|n| *n == f.name).unwrap();
                declared.insert((i, v));
                if f.active {
                    live.insert((i, v));
                }
            }
        }
        for (v, ps) in self.ports.iter().enumerate() {
            for p in ps {
                let i = self.refined_row(p.hold, p.origin, p.dest);
                declared.insert((i, v));
                if p.active {
                    live.insert((i, v));
                }
            }
        }
        live
    }

    pub fn oracle_dofm(&self) -> usize {
        self.oracle_as().iter().filter(|(i, _)| *i < self.transform_order().len()).count()
    }

    /// (consumed, produced) operands of system process `i`.
    pub fn oracle_operands(&self, i: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let order = self.transform_order();
        if i < order.len() {
            let mut neg = BTreeSet::new();
            let mut pos = BTreeSet::new();
            for f in self.forms.iter().flatten().filter(|f| f.name == order[i]) {
                neg.extend(f.operand.iter().copied());
                pos.extend(f.output.iter().copied());
            }
            (neg, pos)
        } else {
            let nb = self.num_buffers();
            let h = (i - order.len()) / (nb * nb);
            (self.holds[h].0.iter().copied().collect(), self.holds[h].1.iter().copied().collect())
        }
    }

    pub fn oracle_endpoints(&self, i: usize, v: usize) -> (usize, usize) {
        let mu = self.transform_order().len();
        if i < mu {
            (v, v)
        } else {
            let nb = self.num_buffers();
            let r = (i - mu) % (nb * nb);
            (r / nb, r % nb)
        }
    }

    /// Quadratic loop over capability pairs, buffers and operands; entries as linear ψ.
    pub fn oracle_ar(&self) -> BTreeSet<(usize, usize)> {
        let nr = self.num_resources();
        let caps: Vec<(usize, usize)> = self.oracle_as().into_iter().collect();
        let mut out = BTreeSet::new();
        for &(i1, v1) in &caps {
            for &(i2, v2) in &caps {
                let (_, d1) = self.oracle_endpoints(i1, v1);
                let (o2, _) = self.oracle_endpoints(i2, v2);
                let (_, pos1) = self.oracle_operands(i1);
                let (neg2, _) = self.oracle_operands(i2);
                let mut hit = false;
                for y in 0..self.num_buffers() {
                    for l in 0..self.operands {
                        hit |= d1 == y && o2 == y && pos1.contains(&l) && neg2.contains(&l);
                    }
                }
                if hit {
                    out.insert((nr * i1 + v1, nr * i2 + v2));
                }
            }
        }
        out
    }

    /// DOFR1..4 from the oracle AR.
    pub fn oracle_dofr(&self) -> [usize; 4] {
        let nr = self.num_resources();
        let mut d = [0; 4];
        for (a, b) in self.oracle_ar() {
            let (i1, v1, i2, v2) = (a / nr, a % nr, b / nr, b % nr);
            let t = match (a == b, v1 == v2, i1 == i2) {
                (true, _, _) => 0,
                (false, true, _) => 1,
                (false, false, true) => 2,
                _ => 3,
            };
            d[t] += 1;
        }
        d
    }
}

/// `D(e1, e2) = ∃ place in preset(e1) ∩ postset(e2)`, from the raw service.
pub fn oracle_dual_adjacency(svc: &hfgt::ingest::RawService) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (a, t1) in svc.transitions.iter().enumerate() {
        for (b, t2) in svc.transitions.iter().enumerate() {
            if t1.preset.iter().any(|p| t2.postset.contains(p)) {
                out.insert((a, b));
            }
        }
    }
    out
}

/// A feasible random transport-only event list for DESK-3 (tokens shuttle between B1 and B2).
pub fn desk3_transport_events(seed: u64, init_b1: u64, init_b2: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    // (end time, destination) of in-flight moves
    let mut flying: Vec<(u32, usize)> = Vec::new();
    let mut at = [init_b1, init_b2];
    let mut t = 0u32;
    let mut out = String::from("idxToken,tStart,idxResource,idxProcess\n");
    for token in 1..=rng.random_range(0..=12u64) {
        t += rng.random_range(0..=2);
        flying.retain(|&(end, dest)| {
            if end <= t {
                at[dest] += 1;
                false
            } else {
                true
            }
        });
        let choices: Vec<usize> = (0..2).filter(|&b| at[b] > 0).collect();
        if choices.is_empty() {
            continue;
        }
        let from = choices[rng.random_range(0..choices.len())];
        at[from] -= 1;
        flying.push((t + 2, 1 - from));
        // carry B1→B2 is process 16, carry B2→B1 is process 18, both on H1 (resource 4)
        let process = if from == 0 { 16 } else { 18 };
        let _ = writeln!(out, "{token},{t},4,{process}");
    }
    out
}
