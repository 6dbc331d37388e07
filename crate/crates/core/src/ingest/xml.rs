use std::collections::BTreeMap;
use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (byte {offset})")]
    Encoding { offset: usize },
    #[error("malformed XML at {line}:{column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("{path} (line {line}): missing required attribute '{attr}'")]
    MissingAttribute { path: String, line: u32, attr: &'static str },
    #[error("{path} (line {line}): invalid {attr}={value:?}: {reason}")]
    InvalidValue { path: String, line: u32, attr: String, value: String, reason: String },
    #[error("{path} (line {line}): {message}")]
    Schema { path: String, line: u32, message: String },
}

/// Parses an LFES XML document.
pub fn parse_lfes(xml: &[u8]) -> Result<RawLfes, ParseError> {
    let text = std::str::from_utf8(xml).map_err(|e| ParseError::Encoding { offset: e.valid_up_to() })?;
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        ParseError::Xml { line: pos.row, column: pos.col, message: e.to_string() }
    })?;
    let root = doc.root_element();
    let cx = Cx { doc: &doc };
    if root.tag_name().name() != "LFES" {
        return Err(ParseError::Schema {
            path: format!("/{}", root.tag_name().name()),
            line: cx.line(root),
            message: "root element must be LFES".into(),
        });
    }
    cx.parse_root(root)
}

struct Cx<'a, 'input> {
    doc: &'a Document<'input>,
}

/// Attribute bag that hands out known attributes and leaves the rest as extras.
struct Attrs<'c> {
    path: &'c str,
    line: u32,
    map: BTreeMap<String, String>,
}

impl<'c> Attrs<'c> {
    fn take(&mut self, name: &str) -> Option<String> {
        self.map.remove(name)
    }

    fn required(&mut self, name: &'static str) -> Result<String, ParseError> {
        match self.take(name) {
            Some(v) if !v.trim().is_empty() => Ok(v),
            Some(v) => Err(self.invalid(name, &v, "must not be empty")),
            None => Err(ParseError::MissingAttribute { path: self.path.to_string(), line: self.line, attr: name }),
        }
    }

    fn invalid(&self, attr: &str, value: &str, reason: &str) -> ParseError {
        ParseError::InvalidValue {
            path: self.path.to_string(),
            line: self.line,
            attr: attr.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        }
    }

    fn status(&mut self) -> Result<Status, ParseError> {
        match self.take("status") {
            None => Ok(Status::Active),
            Some(v) => match v.trim() {
                "active" => Ok(Status::Active),
                "inactive" => Ok(Status::Inactive),
                _ => Err(self.invalid("status", &v, "expected 'active' or 'inactive'")),
            },
        }
    }

    fn real(&mut self, name: &str) -> Result<Option<f64>, ParseError> {
        let Some(v) = self.take(name) else { return Ok(None) };
        match v.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(self.invalid(name, &v, "expected a finite number")),
        }
    }

    fn duration(&mut self, name: &str) -> Result<Option<f64>, ParseError> {
        let raw = self.map.get(name).cloned();
        match self.real(name)? {
            Some(x) if x < 0.0 => Err(self.invalid(name, raw.as_deref().unwrap_or(""), "duration must be non-negative")),
            other => Ok(other),
        }
    }

    fn count(&mut self, name: &str) -> Result<Option<u64>, ParseError> {
        let Some(v) = self.take(name) else { return Ok(None) };
        v.trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| self.invalid(name, &v, "expected a non-negative integer"))
    }

    fn list(&mut self, name: &str) -> Vec<String> {
        self.take(name).map(|v| split_list(&v)).unwrap_or_default()
    }

    fn opt_text(&mut self, name: &str) -> Option<String> {
        self.take(name).filter(|v| !v.trim().is_empty())
    }

    fn finish(self) -> Extra {
        self.map
    }
}

/// Splits a comma-separated attribute value, trimming whitespace and dropping empties.
pub(crate) fn split_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

impl<'a, 'input> Cx<'a, 'input> {
    fn line(&self, node: Node) -> u32 {
        self.doc.text_pos_at(node.range().start).row
    }

    fn attrs<'c>(&self, node: Node, path: &'c str) -> Attrs<'c> {
        Attrs {
            path,
            line: self.line(node),
            map: node.attributes().map(|a| (a.name().to_string(), a.value().to_string())).collect(),
        }
    }

    fn schema(&self, node: Node, path: &str, message: impl Into<String>) -> ParseError {
        ParseError::Schema { path: path.to_string(), line: self.line(node), message: message.into() }
    }

    /// Element children with their paths (`parent/Tag[n]`, n counted per tag name).
    fn children<'n>(&self, node: Node<'n, 'input>, parent: &str) -> Result<Vec<(Node<'n, 'input>, String)>, ParseError> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut out = Vec::new();
        for child in node.children() {
            if child.is_text() {
                if child.text().is_some_and(|t| !t.trim().is_empty()) {
                    return Err(self.schema(child, parent, "unexpected text content"));
                }
                continue;
            }
            if !child.is_element() {
                continue;
            }
            let tag = child.tag_name().name().to_string();
            let n = seen.entry(tag.clone()).or_insert(0);
            *n += 1;
            out.push((child, format!("{parent}/{tag}[{n}]")));
        }
        Ok(out)
    }

    fn no_children(&self, node: Node, path: &str) -> Result<(), ParseError> {
        match self.children(node, path)?.first() {
            Some((c, p)) => Err(self.schema(*c, p, format!("unexpected element <{}>", c.tag_name().name()))),
            None => Ok(()),
        }
    }

    fn parse_root(&self, root: Node) -> Result<RawLfes, ParseError> {
        let path = "/LFES";
        let mut a = self.attrs(root, path);
        let mut out = RawLfes {
            name: a.take("name").unwrap_or_default(),
            system_type: a.take("type").unwrap_or_default(),
            data_state: DataState::Raw,
            ..Default::default()
        };
        if let Some(v) = a.take("dataState") {
            if v != "raw" && v != "full" {
                return Err(a.invalid("dataState", &v, "expected 'raw' or 'full'"));
            }
        }
        out.extra = a.finish();
        let mut seen_abstractions = false;
        for (child, p) in self.children(root, path)? {
            match child.tag_name().name() {
                "Operand" => {
                    let mut a = self.attrs(child, &p);
                    let name = a.required("name")?;
                    if !a.finish().is_empty() {
                        return Err(self.schema(child, &p, "Operand only takes a name"));
                    }
                    self.no_children(child, &p)?;
                    out.operands.push(name);
                }
                "Machine" => out.machines.push(self.machine(child, &p)?),
                "IndBuffer" => out.ind_buffers.push(self.ind_buffer(child, &p)?),
                "Transporter" => out.transporters.push(self.transporter(child, &p)?),
                "Controller" => out.controllers.push(self.controller(child, &p)?),
                "Service" => out.services.push(self.service(child, &p)?),
                "Abstractions" => {
                    if seen_abstractions {
                        return Err(self.schema(child, &p, "Abstractions may appear only once"));
                    }
                    seen_abstractions = true;
                    out.abstractions = self.abstractions(child, &p)?;
                }
                other => return Err(self.schema(child, &p, format!("unexpected element <{other}>"))),
            }
        }
        Ok(out)
    }

    fn machine(&self, node: Node, path: &str) -> Result<RawMachine, ParseError> {
        let mut a = self.attrs(node, path);
        let mut m = RawMachine {
            name: a.required("name")?,
            controller: a.opt_text("controller"),
            gps_x: a.real("gpsX")?,
            gps_y: a.real("gpsY")?,
            init_tokens: a.count("initTokens")?,
            init_operand: a.opt_text("initOperand"),
            ..Default::default()
        };
        m.extra = a.finish();
        for (child, p) in self.children(node, path)? {
            match child.tag_name().name() {
                "MethodxForm" => m.methods_xform.push(self.method_xform(child, &p)?),
                "MethodxPort" => m.methods_xport.push(self.method_xport(child, &p)?),
                other => return Err(self.schema(child, &p, format!("unexpected element <{other}> in Machine"))),
            }
        }
        Ok(m)
    }

    fn ind_buffer(&self, node: Node, path: &str) -> Result<RawIndBuffer, ParseError> {
        let mut a = self.attrs(node, path);
        let mut b = RawIndBuffer {
            name: a.required("name")?,
            controller: a.opt_text("controller"),
            gps_x: a.real("gpsX")?,
            gps_y: a.real("gpsY")?,
            init_tokens: a.count("initTokens")?,
            init_operand: a.opt_text("initOperand"),
            ..Default::default()
        };
        b.extra = a.finish();
        for (child, p) in self.children(node, path)? {
            match child.tag_name().name() {
                "MethodxPort" => b.methods_xport.push(self.method_xport(child, &p)?),
                other => return Err(self.schema(child, &p, format!("unexpected element <{other}> in IndBuffer"))),
            }
        }
        Ok(b)
    }

    fn transporter(&self, node: Node, path: &str) -> Result<RawTransporter, ParseError> {
        let mut a = self.attrs(node, path);
        let mut h = RawTransporter {
            name: a.required("name")?,
            controller: a.opt_text("controller"),
            ..Default::default()
        };
        h.extra = a.finish();
        for (child, p) in self.children(node, path)? {
            match child.tag_name().name() {
                "MethodxPort" => h.methods_xport.push(self.method_xport(child, &p)?),
                other => return Err(self.schema(child, &p, format!("unexpected element <{other}> in Transporter"))),
            }
        }
        if h.methods_xport.is_empty() {
            return Err(self.schema(node, path, "Transporter needs at least one MethodxPort"));
        }
        Ok(h)
    }

    fn method_xform(&self, node: Node, path: &str) -> Result<RawMethodxForm, ParseError> {
        let mut a = self.attrs(node, path);
        let f = RawMethodxForm {
            name: a.required("name")?,
            status: a.status()?,
            operand: a.list("operand"),
            output: a.list("output"),
            gps_offset_x: a.real("gpsOffSetX")?,
            gps_offset_y: a.real("gpsOffSetY")?,
            init_tokens: a.count("initTokens")?,
            dt: a.duration("dT")?,
            extra: BTreeMap::new(),
        };
        if f.operand.is_empty() || f.output.is_empty() {
            return Err(self.schema(node, path, "MethodxForm needs non-empty operand and output lists"));
        }
        self.no_children(node, path)?;
        Ok(RawMethodxForm { extra: a.finish(), ..f })
    }

    fn method_xport(&self, node: Node, path: &str) -> Result<RawMethodxPort, ParseError> {
        let mut a = self.attrs(node, path);
        let p = RawMethodxPort {
            name: a.required("name")?,
            status: a.status()?,
            origin: a.required("origin")?.trim().to_string(),
            dest: a.required("dest")?.trim().to_string(),
            reference: a.opt_text("ref"),
            operand: a.list("operand"),
            output: a.list("output"),
            gps_offset_x: a.real("gpsOffSetX")?,
            gps_offset_y: a.real("gpsOffSetY")?,
            init_tokens: a.count("initTokens")?,
            dt: a.duration("dT")?,
            extra: BTreeMap::new(),
        };
        self.no_children(node, path)?;
        Ok(RawMethodxPort { extra: a.finish(), ..p })
    }

    fn controller(&self, node: Node, path: &str) -> Result<RawController, ParseError> {
        let mut a = self.attrs(node, path);
        let mut c = RawController { name: a.required("name")?, status: a.status()?, ..Default::default() };
        c.extra = a.finish();
        for (child, p) in self.children(node, path)? {
            match child.tag_name().name() {
                "PeerRecipient" => {
                    let mut a = self.attrs(child, &p);
                    c.peer_recipients.push(a.required("name")?);
                    self.no_children(child, &p)?;
                }
                other => return Err(self.schema(child, &p, format!("unexpected element <{other}> in Controller"))),
            }
        }
        Ok(c)
    }

    fn service(&self, node: Node, path: &str) -> Result<RawService, ParseError> {
        let mut a = self.attrs(node, path);
        let mut s = RawService {
            name: a.required("name")?,
            status: a.status()?,
            operand: a.opt_text("operand"),
            ..Default::default()
        };
        s.extra = a.finish();
        for (child, p) in self.children(node, path)? {
            match child.tag_name().name() {
                "ServicePlace" => {
                    let mut a = self.attrs(child, &p);
                    s.places.push(a.required("name")?);
                    self.no_children(child, &p)?;
                }
                "ServiceTransition" => {
                    let mut a = self.attrs(child, &p);
                    let t = RawServiceTransition {
                        name: a.required("name")?,
                        preset: a.list("preset"),
                        postset: a.list("postset"),
                        method_link: ProcessRef { name: a.required("methodLinkName")?, reference: a.opt_text("methodLinkRef") },
                        extra: BTreeMap::new(),
                    };
                    self.no_children(child, &p)?;
                    s.transitions.push(RawServiceTransition { extra: a.finish(), ..t });
                }
                other => return Err(self.schema(child, &p, format!("unexpected element <{other}> in Service"))),
            }
        }
        Ok(s)
    }

    fn abstractions(&self, node: Node, path: &str) -> Result<RawAbstractions, ParseError> {
        let mut out = RawAbstractions::default();
        for (child, p) in self.children(node, path)? {
            let mut a = self.attrs(child, &p);
            match child.tag_name().name() {
                "MethodxPort" => {
                    let ap = RawAbstractPort {
                        name: a.required("name")?,
                        reference: a.required("ref")?,
                        operand: a.list("operand"),
                        output: a.list("output"),
                        extra: BTreeMap::new(),
                    };
                    self.no_children(child, &p)?;
                    out.methods_xport.push(RawAbstractPort { extra: a.finish(), ..ap });
                }
                "MethodPair" => {
                    let first = ProcessRef { name: a.required("process1")?, reference: a.opt_text("ref1") };
                    let second = ProcessRef { name: a.required("process2")?, reference: a.opt_text("ref2") };
                    self.no_children(child, &p)?;
                    out.method_pairs.push(RawMethodPair { first, second, extra: a.finish() });
                }
                other => return Err(self.schema(child, &p, format!("unexpected element <{other}> in Abstractions"))),
            }
        }
        Ok(out)
    }
}

fn escape(v: &str) -> String {
    let mut s = String::with_capacity(v.len());
    for ch in v.chars() {
        match ch {
            '&' => s.push_str("&amp;"),
            '<' => s.push_str("&lt;"),
            '>' => s.push_str("&gt;"),
            '"' => s.push_str("&quot;"),
            '\'' => s.push_str("&apos;"),
            '\n' => s.push_str("&#10;"),
            '\r' => s.push_str("&#13;"),
            '\t' => s.push_str("&#9;"),
            c => s.push(c),
        }
    }
    s
}

/// Ordered attribute writer for one element.
#[derive(Default)]
struct Tag(Vec<(String, String)>);

impl Tag {
    fn s(mut self, k: &str, v: &str) -> Self {
        self.0.push((k.into(), v.into()));
        self
    }
    fn opt(self, k: &str, v: &Option<String>) -> Self {
        match v {
            Some(v) => self.s(k, v),
            None => self,
        }
    }
    fn num<T: ToString>(self, k: &str, v: Option<T>) -> Self {
        match v {
            Some(v) => self.s(k, &v.to_string()),
            None => self,
        }
    }
    fn list(self, k: &str, v: &[String]) -> Self {
        if v.is_empty() {
            self
        } else {
            self.s(k, &v.join(","))
        }
    }
    fn extra(mut self, extra: &Extra) -> Self {
        self.0.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
        self
    }
    fn render(&self, out: &mut String, indent: usize, name: &str, close: bool) {
        let _ = write!(out, "{:indent$}<{name}", "");
        for (k, v) in &self.0 {
            let _ = write!(out, " {k}=\"{}\"", escape(v));
        }
        out.push_str(if close { "/>\n" } else { ">\n" });
    }
}

fn end(out: &mut String, indent: usize, name: &str) {
    let _ = writeln!(out, "{:indent$}</{name}>", "");
}

fn xform_tag(f: &RawMethodxForm) -> Tag {
    Tag::default()
        .s("name", &f.name)
        .s("status", f.status.as_str())
        .list("operand", &f.operand)
        .list("output", &f.output)
        .num("gpsOffSetX", f.gps_offset_x)
        .num("gpsOffSetY", f.gps_offset_y)
        .num("initTokens", f.init_tokens)
        .num("dT", f.dt)
        .extra(&f.extra)
}

fn xport_tag(p: &RawMethodxPort) -> Tag {
    Tag::default()
        .s("name", &p.name)
        .s("status", p.status.as_str())
        .s("origin", &p.origin)
        .s("dest", &p.dest)
        .opt("ref", &p.reference)
        .list("operand", &p.operand)
        .list("output", &p.output)
        .num("gpsOffSetX", p.gps_offset_x)
        .num("gpsOffSetY", p.gps_offset_y)
        .num("initTokens", p.init_tokens)
        .num("dT", p.dt)
        .extra(&p.extra)
}

fn element(out: &mut String, indent: usize, name: &str, tag: Tag, body: impl FnOnce(&mut String), has_body: bool) {
    if has_body {
        tag.render(out, indent, name, false);
        body(out);
        end(out, indent, name);
    } else {
        tag.render(out, indent, name, true);
    }
}

impl RawLfes {
    /// Serializes back to the XML grammar accepted by [`parse_lfes`].
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let state = match self.data_state {
            DataState::Raw => "raw",
            DataState::Full => "full",
        };
        Tag::default()
            .s("name", &self.name)
            .s("type", &self.system_type)
            .s("dataState", state)
            .extra(&self.extra)
            .render(&mut out, 0, "LFES", false);
        for o in &self.operands {
            Tag::default().s("name", o).render(&mut out, 2, "Operand", true);
        }
        for m in &self.machines {
            let tag = Tag::default()
                .s("name", &m.name)
                .opt("controller", &m.controller)
                .num("gpsX", m.gps_x)
                .num("gpsY", m.gps_y)
                .num("initTokens", m.init_tokens)
                .opt("initOperand", &m.init_operand)
                .extra(&m.extra);
            let has = !m.methods_xform.is_empty() || !m.methods_xport.is_empty();
            element(&mut out, 2, "Machine", tag, |o| {
                for f in &m.methods_xform {
                    xform_tag(f).render(o, 4, "MethodxForm", true);
                }
                for p in &m.methods_xport {
                    xport_tag(p).render(o, 4, "MethodxPort", true);
                }
            }, has);
        }
        for b in &self.ind_buffers {
            let tag = Tag::default()
                .s("name", &b.name)
                .opt("controller", &b.controller)
                .num("gpsX", b.gps_x)
                .num("gpsY", b.gps_y)
                .num("initTokens", b.init_tokens)
                .opt("initOperand", &b.init_operand)
                .extra(&b.extra);
            element(&mut out, 2, "IndBuffer", tag, |o| {
                for p in &b.methods_xport {
                    xport_tag(p).render(o, 4, "MethodxPort", true);
                }
            }, !b.methods_xport.is_empty());
        }
        for h in &self.transporters {
            let tag = Tag::default().s("name", &h.name).opt("controller", &h.controller).extra(&h.extra);
            element(&mut out, 2, "Transporter", tag, |o| {
                for p in &h.methods_xport {
                    xport_tag(p).render(o, 4, "MethodxPort", true);
                }
            }, !h.methods_xport.is_empty());
        }
        for c in &self.controllers {
            let tag = Tag::default().s("name", &c.name).s("status", c.status.as_str()).extra(&c.extra);
            element(&mut out, 2, "Controller", tag, |o| {
                for r in &c.peer_recipients {
                    Tag::default().s("name", r).render(o, 4, "PeerRecipient", true);
                }
            }, !c.peer_recipients.is_empty());
        }
        for s in &self.services {
            let tag = Tag::default()
                .s("name", &s.name)
                .s("status", s.status.as_str())
                .opt("operand", &s.operand)
                .extra(&s.extra);
            let has = !s.places.is_empty() || !s.transitions.is_empty();
            element(&mut out, 2, "Service", tag, |o| {
                for p in &s.places {
                    Tag::default().s("name", p).render(o, 4, "ServicePlace", true);
                }
                for t in &s.transitions {
                    Tag::default()
                        .s("name", &t.name)
                        .list("preset", &t.preset)
                        .list("postset", &t.postset)
                        .s("methodLinkName", &t.method_link.name)
                        .opt("methodLinkRef", &t.method_link.reference)
                        .extra(&t.extra)
                        .render(o, 4, "ServiceTransition", true);
                }
            }, has);
        }
        let abs = &self.abstractions;
        if !abs.methods_xport.is_empty() || !abs.method_pairs.is_empty() {
            out.push_str("  <Abstractions>\n");
            for a in &abs.methods_xport {
                Tag::default()
                    .s("name", &a.name)
                    .s("ref", &a.reference)
                    .list("operand", &a.operand)
                    .list("output", &a.output)
                    .extra(&a.extra)
                    .render(&mut out, 4, "MethodxPort", true);
            }
            for mp in &abs.method_pairs {
                Tag::default()
                    .s("process1", &mp.first.name)
                    .opt("ref1", &mp.first.reference)
                    .s("process2", &mp.second.name)
                    .opt("ref2", &mp.second.reference)
                    .extra(&mp.extra)
                    .render(&mut out, 4, "MethodPair", true);
            }
            out.push_str("  </Abstractions>\n");
        }
        out.push_str("</LFES>\n");
        out
    }
}
