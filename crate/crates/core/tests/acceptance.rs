//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{desk3_transport_events, fixture, load, oracle_dual_adjacency, GenSystem, DESK3};
use hfgt::hfgt::{matricize_refined, matricize_transport};
use hfgt::ingest::{parse_event_list, parse_lfes};
use hfgt::petrinet::{run_replay, ReplayOptions};
use hfgt::{HfgtBundle, HfgtOptions, SystemModel};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_bundle(seed: u64) -> Result<(GenSystem, SystemModel, HfgtBundle), String> {
    let g = GenSystem::random(seed);
    let xml = g.to_xml();
    let raw = parse_lfes(xml.as_bytes()).map_err(|e| format!("seed {seed}: parse: {e}"))?;
    let model = SystemModel::build(raw).map_err(|e| format!("seed {seed}: model: {e}"))?;
    let bundle = HfgtBundle::compute(&model, &HfgtOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
    Ok((g, model, bundle))
}

fn one_based(m: &hfgt::sparse::SparseBoolMatrix) -> Vec<[usize; 2]> {
    m.iter().map(|(r, c)| [r + 1, c + 1]).collect()
}

fn desk3_end_to_end() -> Outcome {
    let oracle: serde_json::Value = serde_json::from_str(&fixture("desk3_oracle.json")).unwrap();
    let start = Instant::now();
    let (m, b) = load(DESK3);
    let elapsed = start.elapsed();
    let ri = &m.resources;
    let pc = &m.catalog;
    let got = serde_json::json!({
        "sigma_M": ri.num_machines,
        "sigma_B_ind": ri.num_ind_buffers,
        "sigma_B": ri.num_buffers(),
        "sigma_H": ri.num_transporters,
        "sigma_R": ri.num_resources(),
        "sigma_P_mu": pc.num_transform(),
        "sigma_P_eta": pc.num_transport(),
        "sigma_P_gamma": pc.num_holding(),
        "sigma_P_eta_bar": pc.num_refined(),
        "DOFM": b.dof.m,
        "DOFH": b.dof.h,
        "DOFHref": b.dof.href,
        "sigma_AS": b.num_capabilities(),
        "AS": one_based(&b.system.a),
        "JH": one_based(&b.transport.j),
        "AHref_rows": b.refined.a.iter().map(|(r, _)| r + 1).collect::<Vec<_>>(),
        "AQ": one_based(&b.control.agency),
        "AC": one_based(&b.control.adjacency),
    });
    check(got == oracle, || format!("mismatch: got {got}"))?;
    check(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("exact match, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn concept_identity() -> Outcome {
    let mut checked = 0;
    for seed in 0..200 {
        let (g, m, b) = random_bundle(seed)?;
        check(m.resources.num_resources() <= 5 && m.operands.len() <= 3, || format!("seed {seed}: too large"))?;
        for (tag, c) in [("M", &b.transformation), ("H", &b.transport), ("Href", &b.refined), ("S", &b.system)] {
            check(c.a == c.j.and_not(&c.k), || format!("seed {seed}: A{tag} != J{tag} and not K{tag}"))?;
        }
        check(b.num_capabilities() == b.dof.m + b.dof.href, || format!("seed {seed}: sigma(AS) != DOFM + DOFHref"))?;
        let oracle = g.oracle_as();
        let got: BTreeSet<(usize, usize)> = b.system.a.iter().collect();
        check(got == oracle, || format!("seed {seed}: AS {got:?} != oracle {oracle:?}"))?;
        check(b.dof.m == g.oracle_dofm(), || format!("seed {seed}: DOFM"))?;
        checked += 1;
    }
    Ok(format!("{checked} random systems"))
}

fn duality_holds(m: &SystemModel, b: &HfgtBundle) -> bool {
    let nb = m.resources.num_buffers();
    let t = &b.transport_tensor;
    let r = &b.refined_tensor;
    matricize_transport(&t.j) == b.transport.j
        && matricize_transport(&t.k) == b.transport.k
        && matricize_transport(&t.a) == b.transport.a
        && matricize_refined(&r.j, nb) == b.refined.j
        && matricize_refined(&r.k, nb) == b.refined.k
        && matricize_refined(&r.a, nb) == b.refined.a
}

fn tensor_duality() -> Outcome {
    let mut n = 0;
    for name in ["desk3.xml", "ev_abstractions.xml", "two_operand.xml"] {
        let (m, b) = load(&fixture(name));
        check(duality_holds(&m, &b), || name.to_string())?;
        n += 1;
    }
    for seed in 0..200 {
        let (_, m, b) = random_bundle(seed)?;
        check(duality_holds(&m, &b), || format!("random seed {seed}"))?;
        n += 1;
    }
    Ok(format!("{n} systems (3 fixtures + 200 random)"))
}

fn ar_oracle() -> Outcome {
    let (mut compared, mut nonempty, mut paired) = (0, 0, 0);
    for seed in 0..400 {
        let (g, m, b) = random_bundle(seed)?;
        let nr = m.resources.num_resources();
        if m.catalog.num_processes() * nr > 200 {
            continue;
        }
        let got: BTreeSet<(usize, usize)> = b.adjacency.ar.iter().collect();
        let oracle = g.oracle_ar();
        check(got == oracle, || format!("seed {seed}: AR differs from brute force"))?;
        let d = b.adjacency.dofr;
        check(d[..4].iter().sum::<usize>() == got.len(), || format!("seed {seed}: DOFR1..4 do not sum to |AR|"))?;
        check(d[..4] == g.oracle_dofr(), || format!("seed {seed}: DOFR types {d:?}"))?;
        if g.method_pairs.is_empty() {
            check(d[4] == got.len(), || format!("seed {seed}: DOFR5 != |AR| without MethodPairs"))?;
        } else {
            check(d[4] <= got.len(), || format!("seed {seed}: DOFR5 > |AR|"))?;
        }
        compared += 1;
        nonempty += usize::from(!got.is_empty());
        paired += usize::from(!g.method_pairs.is_empty());
    }
    let (m, b) = load(DESK3);
    let treat = 0;
    let store = m.resources.num_resources();
    check(b.adjacency.ar.get(treat, store), || "DESK-3: treat@M1 -> store@M1 missing".into())?;
    check(compared >= 150, || format!("only {compared} systems within sigmaP*sigmaR <= 200"))?;
    check(nonempty * 2 >= compared, || format!("only {nonempty} of {compared} systems have a nonempty AR"))?;
    Ok(format!("{compared} random systems with sigmaP*sigmaR <= 200 ({nonempty} with nonempty AR, {paired} with MethodPairs)"))
}

fn service_suite() -> Outcome {
    let mut services = 0;
    let mut systems: Vec<(SystemModel, HfgtBundle)> = vec![load(DESK3)];
    for seed in 0..300 {
        let (_, m, b) = random_bundle(seed)?;
        if !b.services.is_empty() {
            systems.push((m, b));
        }
    }
    for (m, b) in &systems {
        let nr = m.resources.num_resources();
        for ((net, f), raw) in b.services.iter().zip(&b.feasibility).zip(&m.raw.services) {
            let got: BTreeSet<(usize, usize)> = net.dual_adjacency.iter().collect();
            check(got == oracle_dual_adjacency(raw), || format!("{}: dualAdjacency", net.name))?;
            for (_, col) in f.lambda.iter().chain(f.xform_lambda.iter()) {
                let psi = b.incidence.realized[col];
                check(b.system.a.get(psi / nr, psi % nr), || format!("{}: Lambda column {col}", net.name))?;
            }
            for (_, psi) in f.raw_lambda.iter().chain(f.raw_lambda_neg.iter()).chain(f.raw_lambda_pos.iter()) {
                check(b.system.a.get(psi / nr, psi % nr), || format!("{}: rawLambda column {psi}", net.name))?;
            }
            services += 1;
        }
    }
    check(services >= 50, || format!("only {services} services exercised"))?;
    Ok(format!("{services} services"))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hfgt")
}

fn replay_conservation() -> Outcome {
    let (mut model, bundle) = load(DESK3);
    let mut runs = 0;
    let mut events_total = 0;
    for seed in 0..50u64 {
        let (b1, b2) = if seed < 25 { (1, 0) } else { (seed % 4, (seed / 4) % 3) };
        model.raw.ind_buffers[0].init_tokens = Some(b1);
        model.raw.ind_buffers[1].init_tokens = Some(b2);
        let csv = desk3_transport_events(seed, b1, b2);
        let list = parse_event_list(csv.as_bytes()).map_err(|e| format!("seed {seed}: {e}"))?;
        events_total += list.rows.len();
        let (net, _) = run_replay(&model, &bundle, &list, &ReplayOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        let init = net.initial_tokens();
        check(init == b1 + b2, || format!("seed {seed}: initial tokens"))?;
        for c in 0..net.timeline.len() {
            let total: u64 = net.qb.iter().map(|r| r[c]).sum::<u64>() + net.qt.iter().map(|r| r[c]).sum::<u64>();
            check(total == init, || format!("seed {seed}: column {c} holds {total}, expected {init}"))?;
        }
        runs += 1;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let xml = dir.path().join("desk3.xml");
    std::fs::write(&xml, DESK3).unwrap();
    let bad_lists = [
        ("not realized", "idxToken,tStart,idxResource,idxProcess\n1,0,4,16\n1,3,4,2\n", "row 2"),
        ("unknown resource", "idxToken,tStart,idxResource,idxProcess\n1,0,7,16\n", "row 1"),
        ("empty origin", "idxToken,tStart,idxResource,idxProcess\n1,0,4,18\n", "B2"),
    ];
    for (what, csv, needle) in bad_lists {
        let ev = dir.path().join("events.csv");
        std::fs::write(&ev, csv).unwrap();
        let out = Command::new(bin())
            .args(["replay", xml.to_str().unwrap(), "--events", ev.to_str().unwrap(), "-o"])
            .arg(dir.path().join("out"))
            .output()
            .map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        check(out.status.code() == Some(3), || format!("{what}: exit {:?}", out.status.code()))?;
        check(stderr.contains(needle), || format!("{what}: stderr {stderr:?} lacks {needle:?}"))?;
    }
    Ok(format!("{runs} lists ({events_total} events) conserve tokens; {} infeasible lists exit 3", bad_lists.len()))
}

fn collect_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let xml = dir.path().join("desk3.xml");
    std::fs::write(&xml, DESK3).unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("run{k}"));
        let status = Command::new(bin())
            .args(["build", xml.to_str().unwrap(), "-o", out_dir.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?
            .status;
        check(status.success(), || format!("build exited {status}"))?;
        runs.push(collect_files(&out_dir));
    }
    check(!runs[0].is_empty(), || "no files written".into())?;
    check(runs[0] == runs[1], || "exports differ between runs".into())?;
    Ok(format!("{} files byte-identical", runs[0].len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("DESK-3 end-to-end counts", desk3_end_to_end),
        ("concept identity on random systems", concept_identity),
        ("tensor/matrix duality", tensor_duality),
        ("AR oracle equivalence and DOFR partition", ar_oracle),
        ("service suite", service_suite),
        ("replay conservation and infeasible exit code", replay_conservation),
        ("deterministic build", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
