//! Command-line front end for the harmonic influence experiments.
//!
//! Exit codes: 0 on success, 1 on internal failures (solver breakdowns,
//! write errors), 2 on user or input errors.

use clap::{Args, Parser, Subcommand};
use harmonic_influence::analysis::{
    community_artefact, compare_rankings, convergence_sweep, FamilyPoint,
};
use harmonic_influence::dynamic::run_change_experiment;
use harmonic_influence::exact::exact_influence_all;
use harmonic_influence::gen::{
    gen_erdos_renyi, gen_random_tree, generate_wheel, wheel_pair, WheelSpec,
};
use harmonic_influence::io::{
    fmt_sig12, load_communities, load_edge_list, load_graph, read_profile_csv, save_graph,
    write_profile_csv, write_trace_csv,
};
use harmonic_influence::mpa::{estimate_all, mpa_init, mpa_run, StopReason, StoppingConfig};
use harmonic_influence::{Error, WeightedFieldGraph};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "hinf",
    version,
    about = "Harmonic influence: exact solves and message passing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact influence of every node, written to exact.csv.
    Exact {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the message passing algorithm; writes estimates.csv, trace.csv
    /// and summary.json.
    Mpa {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        stopping: StoppingFlags,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Topology-change experiment: converge, change the network, continue,
    /// and compare against a fresh restart.
    Dynamic {
        /// Graph file (save format) used before the change.
        #[arg(long, conflicts_with = "wheel_pair")]
        before: Option<PathBuf>,
        /// Graph file (save format) used after the change.
        #[arg(long, conflicts_with = "wheel_pair", requires = "before")]
        after: Option<PathBuf>,
        /// Seeded wheel pair, e.g. n=50,p=0.01,q=0.25,seed=7.
        #[arg(long)]
        wheel_pair: Option<String>,
        #[arg(long, default_value_t = 0.040)]
        field_weight: f64,
        #[command(flatten)]
        stopping: StoppingFlags,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare an exact profile against an estimate; with community labels
    /// also writes the per-community artefact summary and a scatter CSV.
    Compare {
        #[arg(long)]
        exact: PathBuf,
        #[arg(long)]
        estimates: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Convergence-time sweep over a graph family.
    Sweep {
        /// er, wheel or tree.
        #[arg(long)]
        family: String,
        /// Node counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Peer edges per node for the er family, comma separated.
        #[arg(long = "m-over-n", value_delimiter = ',')]
        m_over_n: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        p: f64,
        #[arg(long, default_value_t = 0.25)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        hub: u32,
        /// Seeds per sweep point.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        /// First seed; runs use seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.040)]
        field_weight: f64,
        #[command(flatten)]
        stopping: StoppingFlags,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Generate a graph file.
    Gen {
        #[command(flatten)]
        source: GraphSource,
        /// Output path of the graph file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GraphSourceKind {
    /// SNAP-style `u v` edge list; the field node is attached to every node.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Weighted graph file in the save format (`n` header, `i j w` lines).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Seeded wheel, e.g. n=50,p=0.01,q=0.25,hub=1,seed=7.
    #[arg(long)]
    wheel: Option<String>,
    /// Seeded Erdos-Renyi peer graph, e.g. n=100,m=400,seed=1.
    #[arg(long)]
    er: Option<String>,
    /// Seeded uniform random tree, e.g. n=50,seed=1.
    #[arg(long)]
    tree: Option<String>,
}

#[derive(Args)]
struct GraphSource {
    #[command(flatten)]
    kind: GraphSourceKind,
    /// Weight of every field edge for generated or edge-list graphs.
    #[arg(long, default_value_t = 0.040)]
    field_weight: f64,
}

#[derive(Args)]
struct StoppingFlags {
    #[arg(long, default_value_t = 1e-10)]
    eps_w: f64,
    #[arg(long, default_value_t = 1e-9)]
    eps_h: f64,
    #[arg(long, default_value_t = 200_000)]
    max_rounds: u64,
}

impl StoppingFlags {
    fn config(&self) -> StoppingConfig {
        StoppingConfig {
            eps_w: self.eps_w,
            eps_h: self.eps_h,
            max_rounds: self.max_rounds,
        }
    }
}

struct Failure {
    message: String,
    code: i32,
}

impl Failure {
    fn user(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: 2,
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SolveFailure(_) | Error::NotAFixedPoint(_) => 1,
            _ => 2,
        };
        Failure {
            message: e.to_string(),
            code,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Exact { source, out } => cmd_exact(&source, &out),
        Command::Mpa {
            source,
            stopping,
            out,
        } => cmd_mpa(&source, &stopping, &out),
        Command::Dynamic {
            before,
            after,
            wheel_pair,
            field_weight,
            stopping,
            out,
        } => cmd_dynamic(
            before.as_deref(),
            after.as_deref(),
            wheel_pair.as_deref(),
            field_weight,
            &stopping,
            &out,
        ),
        Command::Compare {
            exact,
            estimates,
            labels,
            out,
        } => cmd_compare(&exact, &estimates, labels.as_deref(), &out),
        Command::Sweep {
            family,
            n,
            m_over_n,
            p,
            q,
            hub,
            seeds,
            seed,
            field_weight,
            stopping,
            out,
        } => cmd_sweep(
            &family,
            &n,
            &m_over_n,
            p,
            q,
            hub,
            seeds,
            seed,
            field_weight,
            &stopping,
            &out,
        ),
        Command::Gen { source, out } => cmd_gen(&source, &out),
    }
}

/// Parses `k=v,k=v` argument strings.
fn parse_kv(spec: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for part in spec.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Failure::user(format!("expected key=value, got `{part}`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn kv_get<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
    default: Option<T>,
) -> Result<T, Failure> {
    match map.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| Failure::user(format!("invalid value for `{key}`: `{raw}`"))),
        None => default.ok_or_else(|| Failure::user(format!("missing `{key}` in spec"))),
    }
}

/// Loads or generates the requested graph; returns it with a description
/// used in output headers.
fn resolve_graph(source: &GraphSource) -> Result<(WeightedFieldGraph, String), Failure> {
    let kind = &source.kind;
    let fw = source.field_weight;
    if let Some(path) = &kind.edges {
        let loaded = load_edge_list(path, fw)?;
        return Ok((
            loaded.graph,
            format!("edges={} field_weight={}", path.display(), fmt_sig12(fw)),
        ));
    }
    if let Some(path) = &kind.graph {
        return Ok((load_graph(path)?, format!("graph={}", path.display())));
    }
    if let Some(spec) = &kind.wheel {
        let kv = parse_kv(spec)?;
        let wheel = WheelSpec::new(
            kv_get(&kv, "n", None)?,
            kv_get(&kv, "p", Some(0.01))?,
            kv_get(&kv, "q", Some(0.25))?,
            kv_get(&kv, "hub", Some(1))?,
            fw,
            kv_get(&kv, "seed", Some(0))?,
        )?;
        let desc = format!(
            "wheel n={},p={},q={},hub={},seed={} field_weight={}",
            wheel.n,
            wheel.p,
            wheel.q,
            wheel.hub,
            wheel.seed,
            fmt_sig12(fw)
        );
        return Ok((generate_wheel(&wheel)?, desc));
    }
    if let Some(spec) = &kind.er {
        let kv = parse_kv(spec)?;
        let n: u32 = kv_get(&kv, "n", None)?;
        let m: usize = kv_get(&kv, "m", None)?;
        let seed: u64 = kv_get(&kv, "seed", Some(0))?;
        let desc = format!("er n={n},m={m},seed={seed} field_weight={}", fmt_sig12(fw));
        return Ok((gen_erdos_renyi(n, m, fw, seed)?, desc));
    }
    if let Some(spec) = &kind.tree {
        let kv = parse_kv(spec)?;
        let n: u32 = kv_get(&kv, "n", None)?;
        let seed: u64 = kv_get(&kv, "seed", Some(0))?;
        let desc = format!("tree n={n},seed={seed}");
        return Ok((gen_random_tree(n, 0.2, 5.0, seed)?, desc));
    }
    Err(Failure::user("no graph source given"))
}

fn ensure_out_dir(out: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(out).map_err(|e| {
        Failure::user(format!(
            "cannot create output directory {}: {e}",
            out.display()
        ))
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::internal(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, body + "\n")
        .map_err(|e| Failure::internal(format!("writing {}: {e}", path.display())))
}

fn stop_reason_str(reason: StopReason) -> &'static str {
    match reason {
        StopReason::Tolerance => "tolerance",
        StopReason::MaxRounds => "max_rounds",
    }
}

fn cmd_exact(source: &GraphSource, out: &Path) -> Result<(), Failure> {
    let (g, desc) = resolve_graph(source)?;
    ensure_out_dir(out)?;
    let profile = exact_influence_all(&g)?;
    let comments = vec![
        "hinf exact".to_string(),
        format!("source: {desc}"),
        format!("n: {} m: {}", g.n(), g.edge_count()),
        "kind: exact".to_string(),
    ];
    write_profile_csv(&profile, out.join("exact.csv"), &comments)
        .map_err(|e| Failure::internal(e.to_string()))?;
    println!("wrote {}", out.join("exact.csv").display());
    Ok(())
}

fn cmd_mpa(source: &GraphSource, stopping: &StoppingFlags, out: &Path) -> Result<(), Failure> {
    let (g, desc) = resolve_graph(source)?;
    ensure_out_dir(out)?;
    let cfg = stopping.config();
    let (state, trace) = mpa_run(&g, mpa_init(&g), &cfg)?;
    let estimates = estimate_all(&g, &state)?;

    let comments = vec![
        "hinf mpa".to_string(),
        format!("source: {desc}"),
        format!(
            "eps_w: {} eps_h: {} max_rounds: {}",
            fmt_sig12(cfg.eps_w),
            fmt_sig12(cfg.eps_h),
            cfg.max_rounds
        ),
        format!("kind: mpa-estimate round: {}", state.t()),
    ];
    write_profile_csv(&estimates, out.join("estimates.csv"), &comments)
        .map_err(|e| Failure::internal(e.to_string()))?;
    write_trace_csv(&trace, out.join("trace.csv"), &comments)
        .map_err(|e| Failure::internal(e.to_string()))?;

    let summary = serde_json::json!({
        "command": "mpa",
        "source": desc,
        "n": g.n(),
        "m": g.edge_count(),
        "eps_w": cfg.eps_w,
        "eps_h": cfg.eps_h,
        "max_rounds": cfg.max_rounds,
        "stop_round": trace.stop_round,
        "stop_reason": stop_reason_str(trace.stop_reason),
        "w_convergence_round": trace.w_convergence_round,
        "h_convergence_round": trace.h_convergence_round,
        "max_w_increase": trace.max_w_increase,
    });
    write_json(&out.join("summary.json"), &summary)?;
    println!(
        "stopped after {} rounds ({}); W converged at {}, H at {}",
        trace.stop_round,
        stop_reason_str(trace.stop_reason),
        trace.w_convergence_round,
        trace.h_convergence_round
    );
    Ok(())
}

fn cmd_dynamic(
    before: Option<&Path>,
    after: Option<&Path>,
    wheel_pair_spec: Option<&str>,
    field_weight: f64,
    stopping: &StoppingFlags,
    out: &Path,
) -> Result<(), Failure> {
    let (g_before, g_after, desc) = match (before, after, wheel_pair_spec) {
        (Some(b), Some(a), None) => (
            load_graph(b)?,
            load_graph(a)?,
            format!("before={} after={}", b.display(), a.display()),
        ),
        (None, None, Some(spec)) => {
            let kv = parse_kv(spec)?;
            let n: u32 = kv_get(&kv, "n", None)?;
            let p: f64 = kv_get(&kv, "p", Some(0.01))?;
            let q: f64 = kv_get(&kv, "q", Some(0.25))?;
            let seed: u64 = kv_get(&kv, "seed", Some(0))?;
            let (g3, g4) = wheel_pair(n, p, q, field_weight, seed)?;
            (
                g3,
                g4,
                format!(
                    "wheel_pair n={n},p={p},q={q},seed={seed} field_weight={}",
                    fmt_sig12(field_weight)
                ),
            )
        }
        _ => {
            return Err(Failure::user(
                "give either --before and --after, or --wheel-pair",
            ))
        }
    };
    ensure_out_dir(out)?;
    let cfg = stopping.config();
    let exp = run_change_experiment(&g_before, &g_after, &cfg)?;

    let comments = vec![
        "hinf dynamic".to_string(),
        format!("source: {desc}"),
        format!(
            "eps_w: {} eps_h: {} max_rounds: {}",
            fmt_sig12(cfg.eps_w),
            fmt_sig12(cfg.eps_h),
            cfg.max_rounds
        ),
    ];
    write_trace_csv(&exp.post_trace, out.join("change_trace.csv"), &comments)
        .map_err(|e| Failure::internal(e.to_string()))?;
    write_trace_csv(&exp.fresh_trace, out.join("fresh_trace.csv"), &comments)
        .map_err(|e| Failure::internal(e.to_string()))?;

    let report = serde_json::json!({
        "command": "dynamic",
        "source": desc,
        "eps_w": cfg.eps_w,
        "eps_h": cfg.eps_h,
        "max_rounds": cfg.max_rounds,
        "rounds_before_change": exp.before_trace.stop_round,
        "post_change_rounds": exp.report.post_change_rounds,
        "fresh_rounds": exp.report.fresh_rounds,
        "w_gap": exp.report.w_gap,
        "h_gap": exp.report.h_gap,
        "change_trace": "change_trace.csv",
        "fresh_trace": "fresh_trace.csv",
    });
    write_json(&out.join("report.json"), &report)?;
    println!(
        "post-change rounds {} vs fresh {}; w_gap {:.3e}, h_gap {:.3e}",
        exp.report.post_change_rounds, exp.report.fresh_rounds, exp.report.w_gap, exp.report.h_gap
    );
    Ok(())
}

fn cmd_compare(
    exact_path: &Path,
    estimates_path: &Path,
    labels_path: Option<&Path>,
    out: &Path,
) -> Result<(), Failure> {
    let exact = read_profile_csv(exact_path)?;
    let estimates = read_profile_csv(estimates_path)?;
    ensure_out_dir(out)?;
    let cmp = compare_rankings(&exact, &estimates)?;

    let mut comparison = serde_json::to_value(&cmp)
        .map_err(|e| Failure::internal(format!("serializing comparison: {e}")))?;
    comparison["exact_file"] = serde_json::json!(exact_path.display().to_string());
    comparison["estimates_file"] = serde_json::json!(estimates_path.display().to_string());
    write_json(&out.join("comparison.json"), &comparison)?;

    if let Some(labels_path) = labels_path {
        let labels = load_communities(labels_path, exact.n())?;
        let artefact = community_artefact(&exact, &estimates, &labels)?;
        let mut value = serde_json::to_value(&artefact)
            .map_err(|e| Failure::internal(format!("serializing artefact: {e}")))?;
        value["labels_file"] = serde_json::json!(labels_path.display().to_string());
        write_json(&out.join("artefact.json"), &value)?;

        let mut scatter = String::from("node,exact,estimate,community\n");
        for ((node, x), (_, y)) in exact.iter().zip(estimates.iter()) {
            let c = labels.get(node).unwrap();
            scatter.push_str(&format!("{node},{},{},{c}\n", fmt_sig12(x), fmt_sig12(y)));
        }
        std::fs::write(out.join("scatter.csv"), scatter)
            .map_err(|e| Failure::internal(e.to_string()))?;
    }
    println!(
        "tau {:.4}, rho {:.4}, top1 match: {}",
        cmp.kendall_tau, cmp.spearman_rho, cmp.top1_match
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    family: &str,
    ns: &[u32],
    m_over_n: &[f64],
    p: f64,
    q: f64,
    hub: u32,
    seeds: u64,
    first_seed: u64,
    field_weight: f64,
    stopping: &StoppingFlags,
    out: &Path,
) -> Result<(), Failure> {
    if seeds == 0 {
        return Err(Failure::user("--seeds must be at least 1"));
    }
    let mut points = Vec::new();
    match family {
        "er" => {
            if m_over_n.is_empty() {
                return Err(Failure::user("the er family needs --m-over-n"));
            }
            for &n in ns {
                for &r in m_over_n {
                    points.push(FamilyPoint::ErdosRenyi {
                        n,
                        m_peer: (r * n as f64).round() as usize,
                    });
                }
            }
        }
        "wheel" => {
            for &n in ns {
                points.push(FamilyPoint::Wheel { n, p, q, hub });
            }
        }
        "tree" => {
            for &n in ns {
                points.push(FamilyPoint::Tree { n });
            }
        }
        other => return Err(Failure::user(format!("unknown family `{other}`"))),
    }
    let seed_list: Vec<u64> = (0..seeds).map(|k| first_seed + k).collect();
    ensure_out_dir(out)?;
    let cfg = stopping.config();
    let table = convergence_sweep(&points, &seed_list, field_weight, &cfg)?;

    let mut csv = String::new();
    csv.push_str(&format!(
        "# hinf sweep family={family} seeds={seeds} seed={first_seed} field_weight={}\n",
        fmt_sig12(field_weight)
    ));
    csv.push_str(&format!(
        "# eps_w: {} eps_h: {} max_rounds: {}\n",
        fmt_sig12(cfg.eps_w),
        fmt_sig12(cfg.eps_h),
        cfg.max_rounds
    ));
    csv.push_str("family,n,m,m_over_n,seed,w_rounds,h_rounds,stop_round,wall_time_s\n");
    for row in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.3}\n",
            row.family,
            row.n,
            row.m,
            fmt_sig12(row.m_over_n),
            row.seed,
            row.w_rounds,
            row.h_rounds,
            row.stop_round,
            row.wall_time_s
        ));
    }
    std::fs::write(out.join("sweep.csv"), csv).map_err(|e| Failure::internal(e.to_string()))?;

    let fit = serde_json::json!({
        "command": "sweep",
        "family": family,
        "seeds": seeds,
        "first_seed": first_seed,
        "field_weight": field_weight,
        "slope": table.fit.slope,
        "intercept": table.fit.intercept,
        "r2": table.fit.r2,
        "points": table.fit.points,
    });
    write_json(&out.join("fit.json"), &fit)?;
    println!(
        "{} rows; H-rounds vs m/n: slope {:.2}, r2 {:.4}",
        table.rows.len(),
        table.fit.slope,
        table.fit.r2
    );
    Ok(())
}

fn cmd_gen(source: &GraphSource, out: &Path) -> Result<(), Failure> {
    let (g, desc) = resolve_graph(source)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_out_dir(parent)?;
        }
    }
    save_graph(&g, out, &[format!("hinf gen {desc}")])
        .map_err(|e| Failure::internal(e.to_string()))?;
    println!(
        "wrote {} ({} nodes, {} edges)",
        out.display(),
        g.n(),
        g.edge_count()
    );
    Ok(())
}
