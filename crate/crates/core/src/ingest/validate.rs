use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}: {}", self.path, self.message)
    }
}

struct Checker<'a> {
    raw: &'a RawLfes,
    buffers: BTreeSet<&'a str>,
    transporters: BTreeSet<&'a str>,
    controllers: BTreeSet<&'a str>,
    holdings: BTreeSet<&'a str>,
    transforms: BTreeSet<&'a str>,
    out: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn error(&mut self, path: String, message: String) {
        self.out.push(Diagnostic { severity: Severity::Error, path, message });
    }

    fn check_controller(&mut self, path: &str, controller: &Option<String>) {
        if let Some(c) = controller {
            if !self.controllers.contains(c.as_str()) {
                self.error(path.to_string(), format!("unknown controller {c}"));
            }
        }
    }

    fn check_port(&mut self, path: String, p: &RawMethodxPort) {
        for end in [&p.origin, &p.dest] {
            if self.buffers.contains(end.as_str()) {
                continue;
            }
            if self.transporters.contains(end.as_str()) {
                self.error(path.clone(), format!("{end} is a transporter, not a buffer"));
            } else {
                self.error(path.clone(), format!("unknown buffer {end}"));
            }
        }
        match &p.reference {
            None => self.error(path, format!("method {} has no ref (holding process)", p.name)),
            Some(r) if !self.holdings.contains(r.as_str()) => {
                self.error(path, format!("unknown holding process {r}"))
            }
            Some(_) => {}
        }
    }

    fn process_resolves(&self, pr: &ProcessRef) -> bool {
        if pr.reference.is_none() && self.transforms.contains(pr.name.as_str()) {
            return true;
        }
        self.raw
            .abstractions
            .methods_xport
            .iter()
            .any(|a| a.name == pr.name && pr.reference.as_ref().is_none_or(|r| *r == a.reference))
    }
}

/// Checks every cross-reference of a parsed system. An empty result means the
/// system can be indexed and computed.
pub fn validate_raw(raw: &RawLfes) -> Vec<Diagnostic> {
    let mut ck = Checker {
        raw,
        buffers: raw
            .machines
            .iter()
            .map(|m| m.name.as_str())
            .chain(raw.ind_buffers.iter().map(|b| b.name.as_str()))
            .collect(),
        transporters: raw.transporters.iter().map(|h| h.name.as_str()).collect(),
        controllers: raw.controllers.iter().map(|c| c.name.as_str()).collect(),
        holdings: raw.abstractions.methods_xport.iter().map(|a| a.reference.as_str()).collect(),
        transforms: raw
            .machines
            .iter()
            .flat_map(|m| m.methods_xform.iter().map(|f| f.name.as_str()))
            .collect(),
        out: Vec::new(),
    };

    // Resource names share one namespace.
    let mut names: BTreeMap<&str, String> = BTreeMap::new();
    let resource_paths = raw
        .machines
        .iter()
        .enumerate()
        .map(|(i, m)| (m.name.as_str(), format!("/LFES/Machine[{}]", i + 1)))
        .chain(raw.ind_buffers.iter().enumerate().map(|(i, b)| (b.name.as_str(), format!("/LFES/IndBuffer[{}]", i + 1))))
        .chain(raw.transporters.iter().enumerate().map(|(i, h)| (h.name.as_str(), format!("/LFES/Transporter[{}]", i + 1))));
    for (name, path) in resource_paths {
        if let Some(first) = names.get(name) {
            let msg = format!("duplicate resource name {name} (first declared at {first})");
            ck.error(path, msg);
        } else {
            names.insert(name, path);
        }
    }
    let mut seen = BTreeSet::new();
    for (i, c) in raw.controllers.iter().enumerate() {
        if !seen.insert(c.name.as_str()) {
            ck.error(format!("/LFES/Controller[{}]", i + 1), format!("duplicate controller name {}", c.name));
        }
    }
    let mut seen = BTreeSet::new();
    for (i, a) in raw.abstractions.methods_xport.iter().enumerate() {
        if !seen.insert(a.reference.as_str()) {
            ck.error(
                format!("/LFES/Abstractions[1]/MethodxPort[{}]", i + 1),
                format!("duplicate holding process {}", a.reference),
            );
        }
    }

    for (i, m) in raw.machines.iter().enumerate() {
        let path = format!("/LFES/Machine[{}]", i + 1);
        ck.check_controller(&path, &m.controller);
        for (j, p) in m.methods_xport.iter().enumerate() {
            ck.check_port(format!("{path}/MethodxPort[{}]", j + 1), p);
        }
    }
    for (i, b) in raw.ind_buffers.iter().enumerate() {
        let path = format!("/LFES/IndBuffer[{}]", i + 1);
        ck.check_controller(&path, &b.controller);
        for (j, p) in b.methods_xport.iter().enumerate() {
            ck.check_port(format!("{path}/MethodxPort[{}]", j + 1), p);
        }
    }
    for (i, h) in raw.transporters.iter().enumerate() {
        let path = format!("/LFES/Transporter[{}]", i + 1);
        ck.check_controller(&path, &h.controller);
        for (j, p) in h.methods_xport.iter().enumerate() {
            ck.check_port(format!("{path}/MethodxPort[{}]", j + 1), p);
        }
    }
    for (i, c) in raw.controllers.iter().enumerate() {
        for (j, r) in c.peer_recipients.iter().enumerate() {
            if !ck.controllers.contains(r.as_str()) {
                ck.error(format!("/LFES/Controller[{}]/PeerRecipient[{}]", i + 1, j + 1), format!("unknown controller {r}"));
            }
        }
    }
    for (i, s) in raw.services.iter().enumerate() {
        let places: BTreeSet<&str> = s.places.iter().map(String::as_str).collect();
        if places.len() != s.places.len() {
            ck.error(format!("/LFES/Service[{}]", i + 1), format!("service {} repeats a place name", s.name));
        }
        for (j, t) in s.transitions.iter().enumerate() {
            let path = format!("/LFES/Service[{}]/ServiceTransition[{}]", i + 1, j + 1);
            for p in t.preset.iter().chain(&t.postset) {
                if !places.contains(p.as_str()) {
                    ck.error(path.clone(), format!("unknown service place {p}"));
                }
            }
            if t.preset.is_empty() && t.postset.is_empty() {
                ck.error(path.clone(), format!("transition {} has neither preset nor postset", t.name));
            }
            if !ck.process_resolves(&t.method_link) {
                ck.error(path, format!("transition {} links to unknown process {}", t.name, t.method_link));
            }
        }
    }
    for (i, mp) in raw.abstractions.method_pairs.iter().enumerate() {
        let path = format!("/LFES/Abstractions[1]/MethodPair[{}]", i + 1);
        for pr in [&mp.first, &mp.second] {
            if !ck.process_resolves(pr) {
                ck.error(path.clone(), format!("method pair names unknown process {pr}"));
            }
        }
    }
    ck.out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"<LFES name="t">
  <Machine name="M1" controller="C1">
    <MethodxForm name="treat" operand="a" output="b"/>
    <MethodxPort name="store" origin="M1" dest="M1" ref="hold"/>
  </Machine>
  <IndBuffer name="B1"/>
  <Controller name="C1"/>
  <Service name="a">
    <ServicePlace name="p1"/>
    <ServicePlace name="p2"/>
    <ServiceTransition name="e1" preset="p1" postset="p2" methodLinkName="treat"/>
  </Service>
  <Abstractions>
    <MethodxPort name="keep" ref="hold" operand="a" output="a"/>
  </Abstractions>
</LFES>"#;

    fn diags(xml: &str) -> Vec<Diagnostic> {
        validate_raw(&parse_lfes(xml.as_bytes()).unwrap())
    }

    #[test]
    fn base_is_clean() {
        assert_eq!(diags(BASE), vec![]);
    }

    #[test]
    fn each_dangling_reference_is_reported() {
        let cases = [
            (r#"controller="C1""#, r#"controller="C9""#, "unknown controller C9"),
            (r#"dest="M1""#, r#"dest="B9""#, "unknown buffer B9"),
            (r#"ref="hold""#, r#"ref="drop""#, "unknown holding process drop"),
            (r#"postset="p2""#, r#"postset="p7""#, "unknown service place p7"),
            (r#"methodLinkName="treat""#, r#"methodLinkName="boil""#, "links to unknown process boil"),
        ];
        for (from, to, expect) in cases {
            let d = diags(&BASE.replacen(from, to, 1));
            assert_eq!(d.len(), 1, "{to}: {d:?}");
            assert_eq!(d[0].severity, Severity::Error);
            assert!(d[0].message.contains(expect), "{:?}", d[0]);
        }
    }

    #[test]
    fn transition_diagnostic_names_transition_and_path() {
        let d = diags(&BASE.replacen(r#"methodLinkName="treat""#, r#"methodLinkName="boil""#, 1));
        assert_eq!(d[0].path, "/LFES/Service[1]/ServiceTransition[1]");
        assert!(d[0].message.contains("e1"));
    }

    #[test]
    fn transporter_as_endpoint() {
        let xml = BASE.replacen(
            "<Controller",
            r#"<Transporter name="H1"><MethodxPort name="x" origin="H1" dest="B1" ref="hold"/></Transporter><Controller"#,
            1,
        );
        let d = diags(&xml);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("H1 is a transporter"));
    }

    #[test]
    fn duplicate_resources_name_both() {
        let d = diags(&BASE.replacen(r#"<IndBuffer name="B1"/>"#, r#"<IndBuffer name="M1"/>"#, 1));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "/LFES/IndBuffer[1]");
        assert!(d[0].message.contains("/LFES/Machine[1]"));
    }

    #[test]
    fn missing_ref_is_an_error() {
        let d = diags(&BASE.replacen(r#" ref="hold""#, "", 1));
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("no ref"));
    }

    #[test]
    fn abstract_link_with_ref() {
        let xml = BASE.replacen(r#"methodLinkName="treat""#, r#"methodLinkName="keep" methodLinkRef="hold""#, 1);
        assert!(diags(&xml).is_empty());
        let xml = BASE.replacen(r#"methodLinkName="treat""#, r#"methodLinkName="keep" methodLinkRef="carry""#, 1);
        assert_eq!(diags(&xml).len(), 1);
    }
}
