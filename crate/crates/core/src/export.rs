//! On-disk form of an [`HfgtBundle`].
//!
//! * Boolean matrices: Matrix Market `coordinate pattern general`, 1-based.
//! * Signed matrices (the mode-3 unfolding of MRT): `coordinate integer general`.
//! * Third-order tensors: a `# {json}` header line giving dims and index
//!   formulas, then one `l y psi value` line per nonzero, 1-based.
//! * `manifest.json`: sizes, DOF counters, index conventions, labels and the
//!   list of every artifact with its shape and nonzero count.
//!
//! All output is assembled in memory in sorted order, so repeated builds of
//! the same input are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::hfgt::{HfgtBundle, HfgtOptions};
use crate::metamodel::SystemModel;
use crate::sparse::{SparseBoolMatrix, SparseBoolTensor3, SparseIntTensor3};

pub const MANIFEST_FORMAT: &str = "hfgt-export/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactInfo {
    pub path: String,
    pub kind: &'static str,
    pub shape: Vec<usize>,
    pub nnz: usize,
    pub description: String,
}

/// Every file of an export, keyed by relative path.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExportSet {
    pub files: BTreeMap<String, String>,
    pub artifacts: Vec<ArtifactInfo>,
}

impl ExportSet {
    fn matrix(&mut self, path: String, m: &SparseBoolMatrix, description: &str) {
        self.files.insert(path.clone(), matrix_market(m));
        self.artifacts.push(ArtifactInfo {
            path,
            kind: "matrix",
            shape: vec![m.rows(), m.cols()],
            nnz: m.nnz(),
            description: description.into(),
        });
    }

    fn bool_tensor(&mut self, path: String, t: &SparseBoolTensor3, axes: [&str; 3], description: &str) {
        let (a, b, c) = t.dims();
        let body = tensor_text(t.dims(), axes, "pattern", t.iter().map(|(i, j, k)| ((i, j, k), 1)));
        self.files.insert(path.clone(), body);
        self.artifacts.push(ArtifactInfo {
            path,
            kind: "tensor",
            shape: vec![a, b, c],
            nnz: t.nnz(),
            description: description.into(),
        });
    }

    fn int_tensor(&mut self, path: String, t: &SparseIntTensor3, axes: [&str; 3], description: &str) {
        let (a, b, c) = t.dims();
        self.files.insert(path.clone(), tensor_text(t.dims(), axes, "integer", t.iter()));
        self.artifacts.push(ArtifactInfo {
            path,
            kind: "tensor",
            shape: vec![a, b, c],
            nnz: t.nnz(),
            description: description.into(),
        });
        // mode-3 unfolding as an integer matrix: row = σB·l + y
        let rows = a * b;
        let mpath = self.artifacts.last().unwrap().path.replace(".tns", ".mtx");
        let mut out = String::from("%%MatrixMarket matrix coordinate integer general\n");
        let _ = writeln!(out, "{rows} {c} {}", t.nnz());
        for ((i, j, k), v) in t.iter() {
            let _ = writeln!(out, "{} {} {v}", b * i + j + 1, k + 1);
        }
        self.files.insert(mpath.clone(), out);
        self.artifacts.push(ArtifactInfo {
            path: mpath,
            kind: "matrix",
            shape: vec![rows, c],
            nnz: t.nnz(),
            description: format!("{description}, mode-3 unfolding (row = sigmaB*(l-1) + y)"),
        });
    }

    /// Writes every file below `dir`, creating directories as needed.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        for (rel, body) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, body)?;
        }
        Ok(())
    }
}

pub fn matrix_market(m: &SparseBoolMatrix) -> String {
    let mut out = String::with_capacity(64 + 12 * m.nnz());
    out.push_str("%%MatrixMarket matrix coordinate pattern general\n");
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), m.nnz());
    for (r, c) in m.iter() {
        let _ = writeln!(out, "{} {}", r + 1, c + 1);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct MatrixMarketError {
    pub line: usize,
    pub message: String,
}

/// Reads back a `coordinate pattern general` file as written by [`matrix_market`].
pub fn parse_matrix_market(text: &str) -> Result<SparseBoolMatrix, MatrixMarketError> {
    let err = |line: usize, message: &str| MatrixMarketError { line, message: message.into() };
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim()));
    match lines.next() {
        Some((_, h)) if h.eq_ignore_ascii_case("%%MatrixMarket matrix coordinate pattern general") => {}
        _ => return Err(err(1, "expected a coordinate pattern general header")),
    }
    let mut lines = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let nums = |n: usize, l: &str, want: usize| -> Result<Vec<usize>, MatrixMarketError> {
        let v: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(n, &e.to_string()))?;
        if v.len() != want {
            return Err(err(n, &format!("expected {want} integers")));
        }
        Ok(v)
    };
    let (n, size) = lines.next().ok_or_else(|| err(2, "missing size line"))?;
    let size = nums(n, size, 3)?;
    let (rows, cols, nnz) = (size[0], size[1], size[2]);
    if rows.checked_mul(cols).is_none() {
        return Err(err(n, "shape overflows"));
    }
    let mut m = SparseBoolMatrix::new(rows, cols);
    let mut seen = 0;
    for (n, l) in lines {
        let rc = nums(n, l, 2)?;
        if rc[0] == 0 || rc[1] == 0 || rc[0] > rows || rc[1] > cols {
            return Err(err(n, "entry outside the declared shape"));
        }
        m.insert(rc[0] - 1, rc[1] - 1);
        seen += 1;
    }
    if seen != nnz {
        return Err(err(n, &format!("declared {nnz} entries, found {seen}")));
    }
    Ok(m)
}

fn tensor_text(
    dims: (usize, usize, usize),
    axes: [&str; 3],
    field: &str,
    entries: impl Iterator<Item = ((usize, usize, usize), i32)>,
) -> String {
    let header = json!({
        "format": "coordinate",
        "field": field,
        "index_base": 1,
        "dims": [dims.0, dims.1, dims.2],
        "axes": axes,
        "columns": ["l", "y", "psi", "value"],
    });
    let mut out = format!("# {header}\n");
    for ((i, j, k), v) in entries {
        let _ = writeln!(out, "{} {} {} {v}", i + 1, j + 1, k + 1);
    }
    out
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Serializes the full bundle.
pub fn export_bundle(model: &SystemModel, bundle: &HfgtBundle, opts: &HfgtOptions) -> ExportSet {
    let mut set = ExportSet::default();
    let b = bundle;
    for (tag, c, what) in [
        ("M", &b.transformation, "transformation (transform processes x machines)"),
        ("H", &b.transport, "transport (origin/dest pairs x resources)"),
        ("Href", &b.refined, "refined transport (holding/origin/dest x resources)"),
        ("S", &b.system, "system (system processes x resources)"),
    ] {
        set.matrix(format!("J{tag}.mtx"), &c.j, &format!("knowledge base, {what}"));
        set.matrix(format!("K{tag}.mtx"), &c.k, &format!("constraints, {what}"));
        set.matrix(format!("A{tag}.mtx"), &c.a, &format!("concept, {what}"));
    }
    let hax = ["dest", "origin", "resource"];
    let hrefax = ["holding*sigmaB + dest", "origin", "resource"];
    for (tag, t, axes) in [("H", &b.transport_tensor, hax), ("Href", &b.refined_tensor, hrefax)] {
        set.bool_tensor(format!("J{tag}T.tns"), &t.j, axes, "knowledge base tensor");
        set.bool_tensor(format!("K{tag}T.tns"), &t.k, axes, "constraint tensor");
        set.bool_tensor(format!("A{tag}T.tns"), &t.a, axes, "concept tensor");
    }
    let oi = &b.operand_incidence;
    set.matrix("MLg_neg.mtx".into(), &oi.mlg_neg, "operands consumed per holding process");
    set.matrix("MLg_pos.mtx".into(), &oi.mlg_pos, "operands produced per holding process");
    set.matrix("MLP_neg.mtx".into(), &oi.mlp_neg, "operands consumed per system process");
    set.matrix("MLP_pos.mtx".into(), &oi.mlp_pos, "operands produced per system process");
    let max = ["operand", "buffer", "capability"];
    let inc = &b.incidence;
    set.bool_tensor("MRT_neg.tns".into(), &inc.neg, max, "negative incidence tensor");
    set.bool_tensor("MRT_pos.tns".into(), &inc.pos, max, "positive incidence tensor");
    set.int_tensor("MRT.tns".into(), &inc.signed, max, "signed incidence tensor");
    let pax = ["operand", "buffer", "realized capability"];
    set.bool_tensor("MRT_neg_proj.tns".into(), &inc.proj_neg, pax, "projected negative incidence tensor");
    set.bool_tensor("MRT_pos_proj.tns".into(), &inc.proj_pos, pax, "projected positive incidence tensor");
    set.int_tensor("MRT_proj.tns".into(), &inc.proj_signed, pax, "projected signed incidence tensor");
    set.matrix("AR.mtx".into(), &b.adjacency.ar, "hetero-functional adjacency over all capabilities");
    set.matrix("AR_proj.mtx".into(), &b.adjacency.ar_proj, "hetero-functional adjacency over realized capabilities");
    set.matrix("AQ.mtx".into(), &b.control.agency, "controller agency (controllers x resources)");
    set.matrix("AC.mtx".into(), &b.control.adjacency, "controller adjacency");
    set.matrix("SAM_partial.mtx".into(), &b.system_adjacency.partial, "realized capabilities then controllers");
    set.matrix("SAM.mtx".into(), &b.system_adjacency.full, "partial system adjacency plus service transitions");

    let mut service_meta = Vec::new();
    for (s, (net, f)) in b.services.iter().zip(&b.feasibility).enumerate() {
        let dir = format!("services/{:02}-{}", s + 1, slug(&net.name));
        for (name, m, what) in [
            ("Mneg", &net.mneg, "places x transitions, place feeds transition"),
            ("Mpos", &net.mpos, "places x transitions, transition feeds place"),
            ("dualAdjacency", &net.dual_adjacency, "transition adjacency"),
            ("rawLambda", &f.raw_lambda, "transitions x capabilities"),
            ("rawLambda_neg", &f.raw_lambda_neg, "transitions x capabilities consuming the operand"),
            ("rawLambda_pos", &f.raw_lambda_pos, "transitions x capabilities producing the operand"),
            ("Lambda", &f.lambda, "transitions x realized capabilities"),
            ("rawXformLambda", &f.raw_xform_lambda, "transitions x transform processes"),
            ("rawXformLambda_neg", &f.raw_xform_lambda_neg, "transitions x transform processes consuming the operand"),
            ("rawXformLambda_pos", &f.raw_xform_lambda_pos, "transitions x transform processes producing the operand"),
            ("xformLambda", &f.xform_lambda, "Lambda restricted to transform capabilities"),
            ("xportLambda", &f.xport_lambda, "transitions x holding processes"),
            ("xportLambda_neg", &f.xport_lambda_neg, "transitions x holding processes consuming the operand"),
            ("xportLambda_pos", &f.xport_lambda_pos, "transitions x holding processes producing the operand"),
        ] {
            set.matrix(format!("{dir}/{name}.mtx"), m, &format!("{}: {what}", net.name));
        }
        service_meta.push(json!({
            "name": net.name,
            "operand": net.operand,
            "directory": dir,
            "places": net.places,
            "transitions": net.transitions,
        }));
    }

    set.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = build_manifest(model, bundle, opts, &set.artifacts, service_meta);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    set.files.insert(MANIFEST_FILE.into(), text);
    set
}

/// The DOF counters in the order they are printed and stored.
pub fn dof_table(bundle: &HfgtBundle) -> Vec<(&'static str, usize)> {
    let d = &bundle.adjacency.dofr;
    vec![
        ("DOFM", bundle.dof.m),
        ("DOFH", bundle.dof.h),
        ("DOFHref", bundle.dof.href),
        ("DOFR1", d[0]),
        ("DOFR2", d[1]),
        ("DOFR3", d[2]),
        ("DOFR4", d[3]),
        ("DOFR5", d[4]),
        ("DOFR", bundle.adjacency.dofr_total),
        ("sigma(AS)", bundle.num_capabilities()),
    ]
}

fn build_manifest(
    model: &SystemModel,
    bundle: &HfgtBundle,
    opts: &HfgtOptions,
    artifacts: &[ArtifactInfo],
    services: Vec<serde_json::Value>,
) -> serde_json::Value {
    let ri = &model.resources;
    let pc = &model.catalog;
    let nr = ri.num_resources();
    let processes: Vec<String> = (0..pc.num_processes()).map(|i| pc.label(i, ri)).collect();
    let resources: Vec<&str> = ri.names().collect();
    let capability = |psi: usize| format!("{} @ {}", processes[psi / nr], resources[psi % nr]);
    let realized: Vec<String> = bundle.incidence.realized.iter().map(|&psi| capability(psi)).collect();
    let mut sam_nodes = realized.clone();
    sam_nodes.extend(bundle.control.names.iter().map(|q| format!("controller {q}")));
    for net in &bundle.services {
        sam_nodes.extend(net.transitions.iter().map(|t| format!("{} / {t}", net.name)));
    }
    let dof: serde_json::Map<String, serde_json::Value> =
        dof_table(bundle).into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    json!({
        "format": MANIFEST_FORMAT,
        "system": { "name": model.raw.name, "type": model.raw.system_type },
        "options": { "transpose_ac": opts.transpose_ac, "implicit_controllers": opts.implicit_controllers },
        "sizes": {
            "machines": ri.num_machines,
            "ind_buffers": ri.num_ind_buffers,
            "buffers": ri.num_buffers(),
            "transporters": ri.num_transporters,
            "resources": nr,
            "controllers": bundle.control.names.len(),
            "services": bundle.services.len(),
            "operands": model.operands.len(),
            "transform_processes": pc.num_transform(),
            "transport_processes": pc.num_transport(),
            "holding_processes": pc.num_holding(),
            "refined_transport_processes": pc.num_refined(),
            "system_processes": pc.num_processes(),
            "capabilities": pc.num_processes() * nr,
            "realized_capabilities": bundle.incidence.realized.len(),
        },
        "dof": dof,
        "conventions": {
            "index_base": 1,
            "resource_order": "machines, then independent buffers, then transporters; buffers are the first sigmaB resources",
            "transport_process": "index = sigmaB*(origin-1) + dest",
            "refined_transport_process": "index = sigmaB^2*(holding-1) + sigmaB*(origin-1) + dest",
            "system_process": "transform processes first, then refined transport processes offset by sigmaP_mu",
            "capability": "psi = sigmaR*(i-1) + v for system process i and resource v",
            "realized_capability": "ascending psi over entries of AS",
            "tensor_line": "l y psi value",
            "concept": "A = J and not K",
            "sam_blocks": "realized capabilities, controllers, then service transitions in service order",
        },
        "labels": {
            "resources": resources,
            "operands": model.operands,
            "processes": processes,
            "realized_capabilities": realized,
            "controllers": bundle.control.names,
            "sam_nodes": sam_nodes,
        },
        "services": services,
        "artifacts": artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_lfes;

    fn desk3_export() -> ExportSet {
        let m = SystemModel::build(parse_lfes(include_bytes!("../tests/fixtures/desk3.xml")).unwrap()).unwrap();
        let b = HfgtBundle::compute(&m, &HfgtOptions::default()).unwrap();
        export_bundle(&m, &b, &HfgtOptions::default())
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = SparseBoolMatrix::from_entries(3, 4, [(0, 0), (2, 3), (1, 2)]);
        let text = matrix_market(&m);
        assert_eq!(text, "%%MatrixMarket matrix coordinate pattern general\n3 4 3\n1 1\n2 3\n3 4\n");
        assert_eq!(parse_matrix_market(&text).unwrap(), m);
    }

    #[test]
    fn matrix_market_rejects_bad_input() {
        assert!(parse_matrix_market("").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n3 1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 x\n").is_err());
    }

    #[test]
    fn tensor_lines_are_one_based() {
        let mut t = SparseBoolTensor3::new((1, 3, 8));
        t.insert(0, 2, 7);
        let s = tensor_text(t.dims(), ["a", "b", "c"], "pattern", t.iter().map(|e| (e, 1)));
        let mut lines = s.lines();
        let header: serde_json::Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
        assert_eq!(header["dims"], json!([1, 3, 8]));
        assert_eq!(lines.next(), Some("1 3 8 1"));
    }

    #[test]
    fn desk3_manifest() {
        let set = desk3_export();
        let manifest: serde_json::Value = serde_json::from_str(&set.files[MANIFEST_FILE]).unwrap();
        assert_eq!(manifest["dof"]["DOFM"], 1);
        assert_eq!(manifest["dof"]["DOFH"], 3);
        assert_eq!(manifest["dof"]["DOFHref"], 3);
        assert_eq!(manifest["dof"]["sigma(AS)"], 4);
        let listed: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap()).collect();
        assert_eq!(listed.len(), set.files.len() - 1);
        for p in &listed {
            assert!(set.files.contains_key(*p), "{p}");
        }
        assert!(listed.contains(&"services/01-clean-water-delivery/dualAdjacency.mtx"));
        assert_eq!(manifest["labels"]["realized_capabilities"][0], "treat water @ M1");
    }

    #[test]
    fn export_is_deterministic() {
        assert_eq!(desk3_export(), desk3_export());
    }

    #[test]
    fn mrt_unfolding_is_integer() {
        let set = desk3_export();
        let text = &set.files["MRT.mtx"];
        assert!(text.starts_with("%%MatrixMarket matrix coordinate integer general\n"));
        assert!(text.lines().skip(2).any(|l| l.ends_with(" -1")));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Clean water: delivery!"), "clean-water-delivery");
    }
}
