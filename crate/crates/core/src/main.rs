use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hfgt::export::{dof_table, export_bundle};
use hfgt::ingest::{parse_event_list, parse_lfes, validate_raw, RawEventList};
use hfgt::metamodel::ModelError;
use hfgt::petrinet::{counts_csv, export_frames, run_replay, ReplayOptions, RunError};
use hfgt::{HfgtBundle, HfgtOptions, SystemModel};

/// Hetero-functional graph models of LFES XML systems.
#[derive(Parser)]
#[command(name = "hfgt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute every matrix and tensor and write them with a manifest.
    Build {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Replay a scheduled event list and write Qb.csv / Qt.csv.
    Replay {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        events: EventArgs,
        /// Output directory.
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Replay a scheduled event list and write hfgt-frames/1 JSON.
    Frames {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        events: EventArgs,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        pretty: bool,
    },
    /// Print sizes, DOF counters and diagnostics as JSON.
    Inspect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pretty: bool,
    },
}

#[derive(Args)]
struct Common {
    /// LFES XML file.
    input: PathBuf,
    /// Store controller adjacency as receiver → sender.
    #[arg(long)]
    transpose_ac: bool,
    /// Give every uncontrolled resource its own controller.
    #[arg(long)]
    implicit_controllers: bool,
}

#[derive(Args)]
struct EventArgs {
    /// Scheduled event list (CSV: idxToken,tStart,idxResource,idxProcess).
    #[arg(short, long)]
    events: PathBuf,
    /// Read idxProcess as a position in the resource's own method list.
    #[arg(long)]
    local_process_index: bool,
}

enum Failure {
    Io(String),
    Invalid(Vec<String>),
    Replay(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Replay(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(vec![e.to_string()])
}

fn load(common: &Common) -> Result<(SystemModel, HfgtBundle, HfgtOptions), Failure> {
    let bytes = std::fs::read(&common.input).map_err(io_err(&common.input))?;
    let raw = parse_lfes(&bytes).map_err(invalid)?;
    for d in validate_raw(&raw) {
        log::warn!("{d}");
    }
    let model = SystemModel::build(raw).map_err(|e| match e {
        ModelError::Invalid(diags) => Failure::Invalid(diags.iter().map(ToString::to_string).collect()),
        other => invalid(other),
    })?;
    let opts = HfgtOptions { transpose_ac: common.transpose_ac, implicit_controllers: common.implicit_controllers };
    let bundle = HfgtBundle::compute(&model, &opts).map_err(invalid)?;
    Ok((model, bundle, opts))
}

fn load_events(args: &EventArgs) -> Result<RawEventList, Failure> {
    let bytes = std::fs::read(&args.events).map_err(io_err(&args.events))?;
    parse_event_list(&bytes[..]).map_err(invalid)
}

fn replay_failure(e: RunError) -> Failure {
    match e {
        RunError::Petri(p) => invalid(p),
        RunError::Replay(r) => Failure::Replay(r.to_string()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build { common, output } => {
            let (model, bundle, opts) = load(&common)?;
            let set = export_bundle(&model, &bundle, &opts);
            set.write_to(&output).map_err(io_err(&output))?;
            println!("{}: {} artifacts written to {}", model.raw.name, set.artifacts.len(), output.display());
            for (name, value) in dof_table(&bundle) {
                println!("{name:<10} {value}");
            }
        }
        Command::Replay { common, events, output } => {
            let (model, bundle, _) = load(&common)?;
            let list = load_events(&events)?;
            let opts = ReplayOptions { local_process_index: events.local_process_index };
            let (net, _) = run_replay(&model, &bundle, &list, &opts).map_err(replay_failure)?;
            std::fs::create_dir_all(&output).map_err(io_err(&output))?;
            let qb = counts_csv(net.places.iter().map(|p| p.name.clone()), &net.timeline, &net.qb);
            let qt = counts_csv(net.transitions.iter().map(|t| t.name.clone()), &net.timeline, &net.qt);
            let (pb, pt) = (output.join("Qb.csv"), output.join("Qt.csv"));
            std::fs::write(&pb, qb).map_err(io_err(&pb))?;
            std::fs::write(&pt, qt).map_err(io_err(&pt))?;
            println!("{} events over {} timeline columns", list.rows.len(), net.timeline.len());
        }
        Command::Frames { common, events, output, pretty } => {
            let (model, bundle, _) = load(&common)?;
            let list = load_events(&events)?;
            let opts = ReplayOptions { local_process_index: events.local_process_index };
            let (net, mapped) = run_replay(&model, &bundle, &list, &opts).map_err(replay_failure)?;
            let doc = export_frames(&model.raw.name, &model, &net, &mapped).map_err(|e| Failure::Replay(e.to_string()))?;
            let mut text = if pretty { serde_json::to_string_pretty(&doc) } else { serde_json::to_string(&doc) }
                .expect("frames serialize");
            text.push('\n');
            match output {
                Some(path) => std::fs::write(&path, text).map_err(io_err(&path))?,
                None => print!("{text}"),
            }
        }
        Command::Inspect { common, pretty } => {
            let bytes = std::fs::read(&common.input).map_err(io_err(&common.input))?;
            let raw = parse_lfes(&bytes).map_err(invalid)?;
            let diagnostics = validate_raw(&raw);
            let (model, bundle, _) = load(&common)?;
            let ri = &model.resources;
            let dof: serde_json::Map<String, serde_json::Value> =
                dof_table(&bundle).into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            let summary = json!({
                "name": model.raw.name,
                "resources": ri.names().collect::<Vec<_>>(),
                "machines": ri.num_machines,
                "ind_buffers": ri.num_ind_buffers,
                "transporters": ri.num_transporters,
                "controllers": bundle.control.names,
                "operands": model.operands,
                "system_processes": model.catalog.num_processes(),
                "services": bundle.services.iter().map(|s| &s.name).collect::<Vec<_>>(),
                "dof": dof,
                "diagnostics": diagnostics,
            });
            let text = if pretty { serde_json::to_string_pretty(&summary) } else { serde_json::to_string(&summary) };
            println!("{}", text.expect("summary serializes"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HFGT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(m) => eprintln!("error: {m}"),
                Failure::Invalid(list) => {
                    for m in list {
                        eprintln!("{m}");
                    }
                }
                Failure::Replay(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
