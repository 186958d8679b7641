use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dctopo_core::bounds::{aspl_lower_bound, drop_threshold, hetero_throughput_bound, homog_throughput_bound};
use dctopo_core::flow::{decompose, formulate, max_concurrent_flow, AccessModel, FlowOptions, Formulation};
use dctopo_core::generators::gen_vl2_with_tors;
use dctopo_core::io::{read_topology, read_traffic, write_topology, write_traffic};
use dctopo_core::topology::{cut_capacity, validate};
use dctopo_core::traffic::all_to_all;
use dctopo_experiments::export::{export, Format, Record};
use dctopo_experiments::instance::{build, traffic_for};
use dctopo_experiments::presets::{preset, Params, Plan};
use dctopo_experiments::runner::{run_experiment, summarize, RunOptions};
use dctopo_experiments::spec::{ExperimentSpec, Family, Placement, TrafficKind};
use dctopo_experiments::vl2::{run_vl2_tasks, vl2_compare, Vl2Task};

#[derive(Parser)]
#[command(name = "dctopo", version, about = "Data-center topology throughput workbench")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Runs per sweep value (presets default to 20).
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Full-throughput tolerance.
    #[arg(long, global = true, default_value_t = 1e-4)]
    eps: f64,
    /// Output file; stdout when omitted where that makes sense.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Per-solve time limit in seconds.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Fill the seconds column (output is then not reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Preset parameter `key=value`; repeatable.
    #[arg(long = "param", global = true, value_parser = parse_param)]
    params: Vec<(String, String)>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Access {
    Capacitated,
    Unconstrained,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Paths,
    Compact,
    Explicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Permutation,
    AllToAll,
    Chunky,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a topology file.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Generate a traffic matrix file for a topology.
    Traffic {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Chunky percentage of ToRs.
        #[arg(long, default_value_t = 100.0)]
        percent: f64,
        /// Server-level all-to-all instead of switch-level.
        #[arg(long)]
        server_level: bool,
    },
    /// Solve for throughput and print a summary.
    Solve {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        traffic: PathBuf,
        #[arg(long, value_enum, default_value_t = Access::Capacitated)]
        access: Access,
        #[arg(long, value_enum, default_value_t = Form::Paths)]
        formulation: Form,
        /// Minimize total flow at optimal throughput.
        #[arg(long)]
        min_flow: bool,
        /// Write the per-commodity edge LP in LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
    },
    /// Closed-form bounds.
    Bound {
        #[command(subcommand)]
        which: BoundCmd,
    },
    /// Run a preset or a JSON experiment spec.
    Exp {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        preset: Option<String>,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Compare VL2 with rewired VL2 equipment.
    Vl2 {
        #[arg(long)]
        da: usize,
        #[arg(long)]
        di: usize,
        #[arg(long, value_enum, default_value_t = Kind::Permutation)]
        kind: Kind,
        #[arg(long, default_value_t = 100.0)]
        percent: f64,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    Rrg {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        servers_per_switch: usize,
    },
    TwoClass {
        #[arg(long)]
        n_large: usize,
        #[arg(long)]
        n_small: usize,
        #[arg(long)]
        ports_large: usize,
        #[arg(long)]
        ports_small: usize,
        #[arg(long)]
        servers: usize,
        /// Server share relative to port-proportional.
        #[arg(long, default_value_t = 1.0)]
        share: f64,
        /// Cross-cluster links relative to a random interconnect.
        #[arg(long)]
        cross: Option<f64>,
    },
    Powerlaw {
        #[arg(long)]
        switches: usize,
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long)]
        exponent: f64,
        #[arg(long)]
        servers: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    Overlay {
        #[arg(long)]
        n_large: usize,
        #[arg(long)]
        n_small: usize,
        #[arg(long)]
        ports_large: usize,
        #[arg(long)]
        ports_small: usize,
        #[arg(long)]
        large_servers: usize,
        #[arg(long)]
        small_servers: usize,
        #[arg(long)]
        high_ports: usize,
        #[arg(long)]
        high_speed: f64,
        #[arg(long, default_value_t = 1.0)]
        cross: f64,
    },
    Vl2 {
        #[arg(long)]
        da: usize,
        #[arg(long)]
        di: usize,
        #[arg(long)]
        tors: Option<usize>,
    },
    RewiredVl2 {
        #[arg(long)]
        da: usize,
        #[arg(long)]
        di: usize,
        #[arg(long)]
        tors: Option<usize>,
    },
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Lower bound on the ASPL of any N-node r-regular graph.
    Dstar {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u64,
    },
    /// Throughput bound for N switches of degree r and f flows.
    Homog {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        f: f64,
        #[arg(long)]
        aspl: Option<f64>,
    },
    /// Path and cut bounds for two clusters.
    Hetero {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        c_bar: f64,
        #[arg(long)]
        n1: f64,
        #[arg(long)]
        n2: f64,
        #[arg(long)]
        d: f64,
    },
    /// Cut capacity below which throughput drops under t_star.
    Drop {
        #[arg(long)]
        t_star: f64,
        #[arg(long)]
        n1: f64,
        #[arg(long)]
        n2: f64,
    },
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn kind_of(kind: Kind, percent: f64) -> TrafficKind {
    match kind {
        Kind::Permutation => TrafficKind::Permutation,
        Kind::AllToAll => TrafficKind::AllToAll,
        Kind::Chunky => TrafficKind::Chunky(percent),
    }
}

fn flow_options(access: Access, form: Form, g: &Global) -> FlowOptions {
    FlowOptions {
        formulation: match form {
            Form::Paths => Formulation::Paths,
            Form::Compact => Formulation::Compact,
            Form::Explicit => Formulation::Explicit,
        },
        access: match access {
            Access::Capacitated => AccessModel::Capacitated,
            Access::Unconstrained => AccessModel::Unconstrained,
        },
        time_limit: g.time_limit.map(Duration::from_secs_f64),
        min_total_flow: false,
    }
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn gen(family: GenFamily, g: &Global) -> Result<()> {
    let family = match family {
        GenFamily::Rrg { n, r, servers_per_switch } => Family::Rrg { switches: n, degree: r, servers_per_switch },
        GenFamily::TwoClass { n_large, n_small, ports_large, ports_small, servers, share, cross } => Family::TwoClass {
            n_large,
            n_small,
            ports_large,
            ports_small,
            placement: Placement::Share { total: servers, share },
            cross,
        },
        GenFamily::Powerlaw { switches, k_min, k_max, exponent, servers, beta } => {
            Family::PowerLaw { switches, k_min, k_max, exponent, servers, beta }
        }
        GenFamily::Overlay {
            n_large,
            n_small,
            ports_large,
            ports_small,
            large_servers,
            small_servers,
            high_ports,
            high_speed,
            cross,
        } => Family::Overlay {
            n_large,
            n_small,
            ports_large,
            ports_small,
            placement: Placement::PerSwitch { large: large_servers, small: small_servers },
            high_ports,
            high_speed,
            cross,
        },
        GenFamily::Vl2 { da, di, tors: Some(tors) } => {
            return write_topo(&gen_vl2_with_tors(da, di, tors)?, g);
        }
        GenFamily::Vl2 { da, di, tors: None } => Family::Vl2 { da, di },
        GenFamily::RewiredVl2 { da, di, tors } => Family::RewiredVl2 { da, di, tors },
    };
    write_topo(&build(&family, &TrafficKind::None, g.seed)?.topology, g)
}

fn write_topo(t: &dctopo_core::topology::Topology, g: &Global) -> Result<()> {
    let report = validate(t);
    if !report.ok {
        bail!("generated topology is invalid: {:?}", report);
    }
    match &g.out {
        Some(p) => write_topology(t, p)?,
        None => println!("{}", serde_json::to_string_pretty(t)?),
    }
    Ok(())
}

fn solve(
    topology: &Path,
    traffic: &Path,
    mut opts: FlowOptions,
    min_flow: bool,
    export_lp: Option<&Path>,
    g: &Global,
) -> Result<()> {
    let t = read_topology(topology)?;
    let tm = read_traffic(traffic)?;
    if let Some(p) = export_lp {
        let lp_opts = FlowOptions { formulation: Formulation::Explicit, ..opts.clone() };
        let model = formulate(&t, &tm, &lp_opts)?;
        let w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
        dctopo_lp::write_lp(&model.problem, w)?;
    }
    opts.min_total_flow = min_flow;
    let sol = max_concurrent_flow(&t, &tm, &opts)?;
    let mut summary = json!({
        "throughput": sol.throughput,
        "commodities": tm.len(),
        "iterations": sol.iterations,
    });
    if let Ok(rep) = decompose(&t, &tm, &sol) {
        summary["C"] = json!(rep.c);
        summary["U"] = json!(rep.u);
        summary["D_flows"] = json!(rep.d_flows);
        summary["AS"] = json!(rep.stretch);
        summary["f_effective"] = json!(rep.f_effective);
        summary["identity_residual"] = json!(rep.identity_residual);
    }
    if let Some(labels) = &t.cluster_of {
        summary["C_bar"] = json!(cut_capacity(&t, labels)?);
    }
    emit(&summary, g.out.as_deref())
}

fn bound(which: BoundCmd, g: &Global) -> Result<()> {
    let v = match which {
        BoundCmd::Dstar { n, r } => json!({ "d_star": aspl_lower_bound(n, r)? }),
        BoundCmd::Homog { n, r, f, aspl } => json!({ "bound": homog_throughput_bound(n, r, f, aspl)? }),
        BoundCmd::Hetero { c, c_bar, n1, n2, d } => serde_json::to_value(hetero_throughput_bound(c, c_bar, n1, n2, d)?)?,
        BoundCmd::Drop { t_star, n1, n2 } => {
            if !(t_star > 0.0) {
                bail!("t_star must be positive");
            }
            json!({ "c_bar_star": drop_threshold(t_star, n1, n2) })
        }
    };
    emit(&v, g.out.as_deref())
}

fn format(g: &Global) -> Format {
    match g.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Jsonl => Format::Jsonl,
    }
}

fn write_table<R: Record + serde::Serialize>(rows: &[R], path: &Path, g: &Global) -> Result<()> {
    export(rows, format(g), path).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}.summary.{ext}"))
}

fn exp(preset_name: Option<&str>, spec_path: Option<&Path>, g: &Global) -> Result<()> {
    let params: Params = g.params.iter().cloned().collect();
    let (label, plan) = match (preset_name, spec_path) {
        (Some(name), _) => (name.to_string(), preset(name, &params)?),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let spec: ExperimentSpec = serde_json::from_str(&text)?;
            (spec.name.clone(), Plan::Flow(vec![spec]))
        }
        (None, None) => bail!("exp needs --preset or --spec"),
    };
    let ext = match g.format {
        OutFormat::Csv => "csv",
        OutFormat::Jsonl => "jsonl",
    };
    let out = g.out.clone().unwrap_or_else(|| PathBuf::from(format!("{label}.{ext}")));
    match plan {
        Plan::Flow(mut specs) => {
            let opts = RunOptions { time_limit: g.time_limit.map(Duration::from_secs_f64), timing: g.timing };
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for s in &mut specs {
                if preset_name.is_some() {
                    s.seed = g.seed;
                }
                if let Some(r) = g.runs {
                    s.runs = r;
                }
                let part = run_experiment(s, &opts).map_err(|e| anyhow!(e))?;
                summary.extend(summarize(s, &part));
                rows.extend(part);
            }
            write_table(&rows, &out, g)?;
            write_table(&summary, &summary_path(&out), g)?;
        }
        Plan::Vl2(tasks) => {
            let rows = run_vl2(&tasks, g);
            write_table(&rows, &out, g)?;
            if let Some(r) = rows.iter().find(|r| r.status.starts_with("baseline violation")) {
                bail!("{}", r.status);
            }
        }
    }
    Ok(())
}

fn run_vl2(tasks: &[Vl2Task], g: &Global) -> Vec<dctopo_experiments::Vl2Row> {
    let opts = FlowOptions { time_limit: g.time_limit.map(Duration::from_secs_f64), ..FlowOptions::default() };
    run_vl2_tasks(tasks, g.runs.unwrap_or(20), g.eps, g.seed, &opts)
}

fn traffic(topology: &Path, kind: Kind, percent: f64, server_level: bool, g: &Global) -> Result<()> {
    let t = read_topology(topology)?;
    let tm = match kind {
        Kind::AllToAll if server_level => all_to_all(&t, false)?,
        _ => traffic_for(&t, &kind_of(kind, percent), g.seed)?.expect("a traffic kind was given"),
    };
    match &g.out {
        Some(p) => write_traffic(&tm, p)?,
        None => println!("{}", serde_json::to_string_pretty(&tm)?),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.cmd {
        Cmd::Gen { family } => gen(family, g),
        Cmd::Traffic { topology, kind, percent, server_level } => traffic(&topology, kind, percent, server_level, g),
        Cmd::Solve { topology, traffic, access, formulation, min_flow, export_lp } => {
            solve(&topology, &traffic, flow_options(access, formulation, g), min_flow, export_lp.as_deref(), g)
        }
        Cmd::Bound { which } => bound(which, g),
        Cmd::Exp { preset, spec } => exp(preset.as_deref(), spec.as_deref(), g),
        Cmd::Vl2 { da, di, kind, percent } => {
            let opts = flow_options(Access::Capacitated, Form::Paths, g);
            let c = vl2_compare(da, di, &kind_of(kind, percent), g.runs.unwrap_or(20), g.eps, g.seed, &opts)?;
            emit(&serde_json::to_value(c)?, g.out.as_deref())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        let _ = std::io::stderr().flush();
        std::process::exit(1);
    }
}
