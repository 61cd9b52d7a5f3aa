use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::{json, Value};

use qsurgery::archkit::{assemble, manifest, uniform_blocks, BlockMap};
use qsurgery::config::{derive_seed, Caps, RunConfig};
use qsurgery::extractor::{bridge_extractors, build_eac_tanner, build_extractor, check_extractor_desiderata};
use qsurgery::paulicode::{distance_bruteforce, fixtures, ldpc_profile, logical_basis, PauliOperator, StabilizerCode};
use qsurgery::pbc::{compile, estimate_runtime, verify_compilation, BlockPartition, CacheModel, Circuit, Compilation};
use qsurgery::simkit::{fault_search, protocol_oracle, run_protocol, Rounds, SeededBits, Tableau};
use qsurgery::surgery::{bridge_ported, build_measurement_graph, build_merged_code, check_desiderata, GraphBuild};
use qsurgery::{Error, Result, VERSION};

#[derive(Parser)]
#[command(name = "qsurgery", version, about = "QLDPC surgery construction, simulation and compilation")]
struct Cli {
    #[arg(long, global = true, env = "QSURGERY_SEED", default_value_t = 0)]
    seed: u64,
    /// Directory for artifacts; nothing is written when absent.
    #[arg(long, global = true, env = "QSURGERY_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "QSURGERY_FORMAT", value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Syndrome rounds per protocol stage (default: code distance).
    #[arg(long, global = true, env = "QSURGERY_ROUNDS")]
    rounds: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Extractor, EAC block and desiderata report for a code.
    BuildExtractor {
        code: String,
        #[arg(long, default_value = "1")]
        beta: String,
    },
    /// Measurement graph for one logical operator.
    BuildGraph {
        code: String,
        #[arg(long)]
        operator: String,
        #[arg(long, default_value = "1")]
        beta: String,
    },
    /// Merged code for one logical operator.
    Merge {
        code: String,
        #[arg(long)]
        operator: String,
        #[arg(long, default_value = "1")]
        beta: String,
    },
    /// Bridge between the extractors of two codes.
    Bridge {
        left: String,
        right: String,
        #[arg(long)]
        d: usize,
    },
    /// Uniform architecture on a line, a cycle or a block map file.
    Assemble {
        code: String,
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value = "line")]
        shape: String,
        #[arg(long)]
        blockmap: Option<String>,
        #[arg(long)]
        d: usize,
    },
    /// Schedule JSON with depth, magic count and runtime estimates.
    Compile {
        circuit: String,
        partition: String,
        blockmap: String,
        #[arg(long, default_value_t = 1)]
        t_magic: u64,
        #[arg(long, default_value_t = 1)]
        cache: usize,
    },
    /// Measurement layers of a compiled circuit.
    Schedule {
        circuit: String,
        partition: String,
        blockmap: String,
    },
    /// One seeded run of the measurement protocol.
    Simulate {
        code: String,
        #[arg(long)]
        operator: String,
        /// Extra operators fixed to +1 in the initial code state.
        #[arg(long)]
        fix: Vec<String>,
    },
    /// Exhaustive search for undetected logical faults.
    FaultSearch {
        code: String,
        #[arg(long)]
        operator: String,
        #[arg(long, default_value_t = 1)]
        max_weight: usize,
        /// Drop this vertex check before searching.
        #[arg(long)]
        drop_vertex_check: Option<usize>,
    },
    /// Oracle suites on a named fixture or a code file.
    Verify {
        target: String,
        #[arg(long)]
        operator: Option<String>,
        #[arg(long)]
        partition: Option<String>,
        #[arg(long)]
        blockmap: Option<String>,
    },
    /// Summary of an artifact file.
    Report { artifact: String },
}

struct Ctx {
    config: RunConfig,
    out: Option<PathBuf>,
    format: Format,
}

/// JSON result, optional DOT text and a one-paragraph summary.
struct Output {
    name: &'static str,
    result: Value,
    dot: Option<String>,
    summary: String,
    ok: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let caps = Caps::default().with_env_overrides();
    let ctx = Ctx {
        config: RunConfig {
            seed: cli.seed,
            caps,
            rounds_per_stage: cli.rounds,
            out_dir: cli.out.as_ref().map(|p| p.display().to_string()),
        },
        out: cli.out.clone(),
        format: cli.format,
    };
    let res = run(&ctx, &cli.command).and_then(|o| emit(&ctx, o));
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn envelope(ctx: &Ctx, name: &str, result: &Value) -> Value {
    json!({
        "tool": "qsurgery",
        "version": VERSION,
        "command": name,
        "seed": ctx.config.seed,
        "config": ctx.config,
        "result": result,
    })
}

fn emit(ctx: &Ctx, o: Output) -> Result<bool> {
    let doc = envelope(ctx, o.name, &o.result);
    let text = serde_json::to_string_pretty(&doc)?;
    if let Some(dir) = &ctx.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.json", o.name)), format!("{text}\n"))?;
        if let Some(d) = &o.dot {
            fs::write(dir.join(format!("{}.dot", o.name)), d)?;
        }
    }
    match ctx.format {
        Format::Json => println!("{text}"),
        Format::Dot => match &o.dot {
            Some(d) => print!("{d}"),
            None => return Err(Error::invalid(format!("{} has no DOT output", o.name))),
        },
        Format::Text => println!("{}", o.summary),
    }
    Ok(o.ok)
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))
}

/// A file path, or `fixture:<name>`.
fn load_code(spec: &str) -> Result<StabilizerCode> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        return fixtures::by_name(name).ok_or_else(|| Error::invalid(format!("unknown fixture '{name}'")));
    }
    StabilizerCode::from_text(&read(spec)?)
}

fn parse_beta(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::invalid(format!("bad ratio '{s}'"));
    let r = match s.split_once('/') {
        Some((a, b)) => Ratio::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => Ratio::from_integer(s.trim().parse().map_err(|_| bad())?),
    };
    if r == Ratio::from_integer(0) {
        return Err(bad());
    }
    Ok(r)
}

fn parse_operator(code: &StabilizerCode, s: &str) -> Result<PauliOperator> {
    let l: PauliOperator = s.parse()?;
    if l.n() != code.n() {
        return Err(Error::invalid(format!("operator has {} qubits, code has {}", l.n(), code.n())));
    }
    if !code.is_logical(&l) {
        return Err(Error::invalid(format!("{l} is not a nontrivial logical operator")));
    }
    Ok(l)
}

fn graph_caps(ctx: &Ctx, code: &StabilizerCode) -> Caps {
    let mut c = Caps::for_measurement_graph(ldpc_profile(code));
    c.exact_cheeger = ctx.config.caps.exact_cheeger;
    c.distance = ctx.config.caps.distance;
    c.sim_qubits = ctx.config.caps.sim_qubits;
    c.retries = ctx.config.caps.retries;
    c.with_env_overrides()
}

fn extractor_caps(ctx: &Ctx, code: &StabilizerCode) -> Caps {
    let mut c = Caps::for_extractor(ldpc_profile(code));
    c.exact_cheeger = ctx.config.caps.exact_cheeger;
    c.distance = ctx.config.caps.distance;
    c.sim_qubits = ctx.config.caps.sim_qubits;
    c.retries = ctx.config.caps.retries;
    c.with_env_overrides()
}

fn code_distance(code: &StabilizerCode, caps: &Caps) -> Result<usize> {
    match distance_bruteforce(code, caps.distance)? {
        qsurgery::paulicode::Distance::Exact(d) => Ok(d),
        _ => Err(Error::invalid("code encodes no logical qubit")),
    }
}

fn graph_for(ctx: &Ctx, code: &StabilizerCode, op: &str, beta: &str) -> Result<(PauliOperator, GraphBuild, Caps)> {
    let l = parse_operator(code, op)?;
    let caps = graph_caps(ctx, code);
    let g = build_measurement_graph(code, &l, parse_beta(beta)?, derive_seed(ctx.config.seed, "graph"), &caps)?;
    Ok((l, g, caps))
}

fn rounds_for(ctx: &Ctx, code: &StabilizerCode) -> Result<Rounds> {
    match ctx.config.rounds_per_stage {
        Some(r) => Ok(Rounds::uniform(r)),
        None => Ok(Rounds::uniform(code_distance(code, &ctx.config.caps)?)),
    }
}

fn load_compile_inputs(circuit: &str, partition: &str, blockmap: &str) -> Result<Compilation> {
    let c = Circuit::parse(&read(circuit)?)?;
    let p = BlockPartition::from_json(&read(partition)?)?;
    let m = BlockMap::from_json(&read(blockmap)?)?;
    compile(&c, &p, &m)
}

fn run(ctx: &Ctx, cmd: &Command) -> Result<Output> {
    let seed = ctx.config.seed;
    match cmd {
        Command::BuildExtractor { code, beta } => {
            let code = load_code(code)?;
            let caps = extractor_caps(ctx, &code);
            let x = build_extractor(&code, parse_beta(beta)?, derive_seed(seed, "extractor"), &caps)?;
            let d = code_distance(&code, &caps).unwrap_or(1);
            let report = check_extractor_desiderata(&x, &code, d, &caps);
            let block = build_eac_tanner(&code, &x)?;
            let summary = format!(
                "extractor: {} vertices, {} edges (bound {}), t = {}\nEAC block: {} data + {} check qubits\ndesiderata: {}",
                x.graph.num_vertices(),
                x.graph.num_edges(),
                x.edge_bound,
                x.t,
                block.data_qubits,
                block.check_qubits,
                verdict(report.pass(), &report.diagnostics)
            );
            Ok(Output {
                name: "build-extractor",
                result: json!({ "extractor": x, "block": block, "desiderata": report }),
                dot: Some(x.to_dot()),
                summary,
                ok: report.pass(),
            })
        }
        Command::BuildGraph { code, operator, beta } => {
            let code = load_code(code)?;
            let (l, g, caps) = graph_for(ctx, &code, operator, beta)?;
            let d = code_distance(&code, &caps).unwrap_or(1);
            let report = check_desiderata(&g.ported, &code, &l, d, &caps);
            let summary = format!(
                "graph: {} vertices, {} edges (bound {}), {} levels\ndesiderata: {}",
                g.ported.graph.num_vertices(),
                g.ported.graph.num_edges(),
                g.edge_bound,
                g.levels,
                verdict(report.pass(), &report.diagnostics)
            );
            let dot = g.ported.graph.to_dot("measurement", &|_| String::new(), &|_| String::new());
            Ok(Output { name: "build-graph", result: json!({ "graph": g, "desiderata": report }), dot: Some(dot), summary, ok: report.pass() })
        }
        Command::Merge { code, operator, beta } => {
            let code = load_code(code)?;
            let (l, g, caps) = graph_for(ctx, &code, operator, beta)?;
            let merged = build_merged_code(&code, &l, &g.ported)?;
            merged.verify()?;
            let mc = merged.code();
            let distance = distance_bruteforce(&mc, caps.distance).ok();
            let summary = format!(
                "merged code: n = {}, k = {} (base k = {}), {} checks, distance {:?}",
                mc.n(),
                mc.k(),
                code.k(),
                mc.generators().len(),
                distance
            );
            Ok(Output {
                name: "merge",
                result: json!({ "merged": merged, "n": mc.n(), "k": mc.k(), "distance": distance }),
                dot: None,
                summary,
                ok: true,
            })
        }
        Command::Bridge { left, right, d } => {
            let (c1, c2) = (load_code(left)?, load_code(right)?);
            let caps = extractor_caps(ctx, &c1.direct_sum(&c2));
            let x1 = build_extractor(&c1, Ratio::from_integer(1), derive_seed(seed, "extractor-left"), &caps)?;
            let x2 = build_extractor(&c2, Ratio::from_integer(1), derive_seed(seed, "extractor-right"), &caps)?;
            let (joined, bridge) = bridge_extractors(&x1, &x2, *d, derive_seed(seed, "bridge"), &caps)?;
            let (dq, cq) = bridge.qubits();
            let summary = format!(
                "bridge: {dq} edges, {cq} new cycles, congestion {} (bound {}), max length {} (bound {}), joined β {:?}",
                bridge.rho,
                bridge.rho_bound,
                bridge.max_length,
                bridge.length_bound,
                bridge.expansion.as_ref().map(|e| e.beta)
            );
            Ok(Output { name: "bridge", result: json!({ "bridge": bridge }), dot: Some(joined.to_dot()), summary, ok: true })
        }
        Command::Assemble { code, blocks, shape, blockmap, d } => {
            let code = load_code(code)?;
            let map = match blockmap {
                Some(f) => BlockMap::from_json(&read(f)?)?,
                None => match shape.as_str() {
                    "line" => BlockMap::line(*blocks),
                    "cycle" => BlockMap::cycle(*blocks),
                    s => return Err(Error::invalid(format!("unknown shape '{s}'"))),
                },
            };
            let caps = extractor_caps(ctx, &code);
            let bs = uniform_blocks(&code, map.num_blocks(), Ratio::from_integer(1), derive_seed(seed, "blocks"), &caps)?;
            let arch = assemble(bs, map, *d, derive_seed(seed, "assemble"), &caps)?;
            let p = &arch.params;
            let summary = format!(
                "architecture: {} blocks, {} bridges, {} qubits (formula {:?}), α = {}, workspace {}",
                p.blocks,
                arch.bridges.len(),
                p.total_qubits,
                p.formula_total,
                p.alpha,
                p.workspace
            );
            Ok(Output {
                name: "assemble",
                result: manifest(&arch, &Default::default()),
                dot: Some(arch.map.to_dot()),
                summary,
                ok: true,
            })
        }
        Command::Compile { circuit, partition, blockmap, t_magic, cache } => {
            let comp = load_compile_inputs(circuit, partition, blockmap)?;
            let s = &comp.schedule;
            let small = estimate_runtime(s, *t_magic, CacheModel::Small);
            let large = estimate_runtime(s, *t_magic, CacheModel::Large { capacity: *cache, prefilled: true });
            let summary = format!(
                "depth {} (bound {}), Λ = {}, magic {}, colour classes {}\nruntime: small cache {} cycles; large cache {} cycles ({} stalls)",
                s.depth,
                s.depth_bound,
                s.lambda,
                s.magic_count,
                s.classes.len(),
                small.total_cycles,
                large.total_cycles,
                large.stall_events
            );
            Ok(Output {
                name: "compile",
                result: json!({
                    "schedule": s,
                    "depth": s.depth,
                    "lambda": s.lambda,
                    "magic_count": s.magic_count,
                    "runtime": { "small_cache": small, "large_cache": large },
                    "warnings": comp.warnings,
                }),
                dot: None,
                summary,
                ok: true,
            })
        }
        Command::Schedule { circuit, partition, blockmap } => {
            let comp = load_compile_inputs(circuit, partition, blockmap)?;
            let s = &comp.schedule;
            let mut text = String::new();
            for (i, layer) in s.layers.iter().enumerate() {
                let items: Vec<String> = layer
                    .iter()
                    .map(|m| match (&m.axis, &m.ancilla) {
                        (Some(a), Some((r, p))) => format!("{a}⊗{p:?}[{r:?}]"),
                        (None, Some((r, p))) => format!("{p:?}[{r:?}]"),
                        _ => String::new(),
                    })
                    .collect();
                text.push_str(&format!("layer {i}: {}\n", items.join(", ")));
            }
            for (r, round) in s.final_rounds.iter().enumerate() {
                let items: Vec<String> = round.iter().map(|f| format!("{}", f.axis)).collect();
                text.push_str(&format!("final {r}: {}\n", items.join(", ")));
            }
            Ok(Output {
                name: "schedule",
                result: json!({ "layers": s.layers, "final_rounds": s.final_rounds }),
                dot: None,
                summary: text.trim_end().to_string(),
                ok: true,
            })
        }
        Command::Simulate { code, operator, fix } => {
            let code = load_code(code)?;
            let (l, g, _) = graph_for(ctx, &code, operator, "1")?;
            let merged = build_merged_code(&code, &l, &g.ported)?;
            let fixes: Vec<PauliOperator> = fix.iter().map(|s| s.parse()).collect::<Result<_>>()?;
            let initial = Tableau::code_state(&code, &fixes)?;
            let (trace, _) = run_protocol(&code, &merged, &initial, &mut SeededBits::new(derive_seed(seed, "simulate")))?;
            Ok(Output {
                name: "simulate",
                summary: format!("{}outcome {:+}", trace.to_text(), trace.sigma),
                result: json!({ "trace": trace }),
                dot: None,
                ok: true,
            })
        }
        Command::FaultSearch { code, operator, max_weight, drop_vertex_check } => {
            let code = load_code(code)?;
            let (l, g, _) = graph_for(ctx, &code, operator, "1")?;
            let mut merged = build_merged_code(&code, &l, &g.ported)?;
            if let Some(i) = drop_vertex_check {
                if *i >= merged.vertex_checks.len() {
                    return Err(Error::invalid(format!("no vertex check {i}")));
                }
                merged.vertex_checks.remove(*i);
            }
            let rounds = rounds_for(ctx, &code)?;
            let r = fault_search(&merged, rounds, *max_weight)?;
            let ok = r.violation.is_none();
            Ok(Output { name: "fault-search", summary: r.verdict(), result: json!({ "search": r }), dot: None, ok })
        }
        Command::Verify { target, operator, partition, blockmap } => verify(ctx, target, operator.as_deref(), partition.as_deref(), blockmap.as_deref()),
        Command::Report { artifact } => {
            let doc: Value = serde_json::from_str(&read(artifact)?).map_err(|e| Error::parse(e.line(), e.to_string()))?;
            let field = |k: &str| doc.get(k).cloned().unwrap_or(Value::Null);
            let keys: Vec<String> = doc
                .get("result")
                .and_then(|r| r.as_object())
                .map(|o| o.keys().cloned().collect())
                .unwrap_or_default();
            let summary = format!(
                "{} artifact from qsurgery {} (seed {})\nresult fields: {}",
                field("command"),
                field("version"),
                field("seed"),
                keys.join(", ")
            );
            Ok(Output { name: "report", result: json!({ "artifact": artifact, "fields": keys }), dot: None, summary, ok: true })
        }
    }
}

fn verdict(pass: bool, diagnostics: &[String]) -> String {
    if pass {
        "all pass".to_string()
    } else {
        format!("FAIL: {}", diagnostics.join("; "))
    }
}

/// Oracle suite on a merged code: protocol vs direct measurement.
fn oracle_suite(ctx: &Ctx, code: &StabilizerCode, l: &PauliOperator, merged: &qsurgery::surgery::MergedCode) -> Result<Value> {
    let cap = ctx.config.caps.sim_qubits.max(14);
    if merged.n_total() > cap {
        return Err(Error::CapExceeded(format!("{} qubits exceed the oracle cap {cap}", merged.n_total())));
    }
    let mut cases = Vec::new();
    let mut fixes: Vec<Vec<PauliOperator>> = vec![Vec::new()];
    for b in logical_basis(code) {
        if b.anticommutes_with(l) {
            fixes.push(vec![b]);
        } else if b.unsigned() != l.unsigned() {
            fixes.push(vec![b.clone()]);
            fixes.push(vec![b.negated()]);
        }
    }
    fixes.push(vec![l.clone()]);
    fixes.push(vec![l.negated()]);
    for f in fixes {
        let initial = Tableau::code_state(code, &f)?;
        let r = protocol_oracle(code, merged, &initial, cap)?;
        cases.push(json!({ "fixed": f, "ok": r.ok(), "report": r }));
    }
    Ok(Value::Array(cases))
}

fn all_ok(cases: &Value) -> bool {
    cases.as_array().is_some_and(|a| a.iter().all(|c| c["ok"] == Value::Bool(true)))
}

fn verify(ctx: &Ctx, target: &str, operator: Option<&str>, partition: Option<&str>, blockmap: Option<&str>) -> Result<Output> {
    let seed = ctx.config.seed;
    let (name, result, ok) = match target {
        "steane-logical-z" => {
            let code = fixtures::steane();
            let l: PauliOperator = "ZZZIIII".parse()?;
            let l = if code.is_logical(&l) { l } else { logical_z(&code)? };
            let caps = graph_caps(ctx, &code);
            let g = build_measurement_graph(&code, &l, Ratio::from_integer(1), derive_seed(seed, "graph"), &caps)?;
            let merged = build_merged_code(&code, &l, &g.ported)?;
            merged.verify()?;
            let cases = oracle_suite(ctx, &code, &l, &merged)?;
            let ok = all_ok(&cases);
            ("steane-logical-z", json!({ "operator": l, "qubits": merged.n_total(), "cases": cases }), ok)
        }
        "4_2_2-bridge-pair" => {
            let code = fixtures::four_two_two();
            let union = code.direct_sum(&code);
            let caps = graph_caps(ctx, &code);
            let l1 = logical_basis(&code)[0].clone();
            let side = |label: &str| build_measurement_graph(&code, &l1, Ratio::from_integer(1), derive_seed(seed, label), &caps);
            let (g1, g2) = (side("graph-left")?, side("graph-right")?);
            let joined = bridge_ported(&g1.ported, code.n(), &g2.ported, 2)?;
            let l = l1.tensor(&l1);
            let merged = build_merged_code(&union, &l, &joined)?;
            merged.verify()?;
            let cases = oracle_suite(ctx, &union, &l, &merged)?;
            let ok = all_ok(&cases);
            let bridge = json!({ "edges": 2, "new_cycles": 1, "congestion": joined.basis.rho, "max_length": joined.basis.max_length });
            ("4_2_2-bridge-pair", json!({ "operator": l, "bridge": bridge, "qubits": merged.n_total(), "cases": cases }), ok)
        }
        path => {
            if let (Some(p), Some(m)) = (partition, blockmap) {
                let comp = load_compile_inputs(path, p, m)?;
                let r = verify_compilation(&comp, ctx.config.caps.sim_qubits, derive_seed(seed, "verify"))?;
                let ok = r.ok;
                ("compilation", json!({ "report": r }), ok)
            } else {
                let code = load_code(path)?;
                let op = operator.ok_or_else(|| Error::invalid("verify on a code needs --operator"))?;
                let (l, g, _) = graph_for(ctx, &code, op, "1")?;
                let merged = build_merged_code(&code, &l, &g.ported)?;
                merged.verify()?;
                let cases = oracle_suite(ctx, &code, &l, &merged)?;
                let ok = all_ok(&cases);
                ("code", json!({ "operator": l, "qubits": merged.n_total(), "cases": cases }), ok)
            }
        }
    };
    let summary = format!("verify {name}: {}", if ok { "PASS" } else { "FAIL" });
    Ok(Output { name: "verify", result: json!({ "suite": name, "pass": ok, "details": result }), dot: None, summary, ok })
}

fn logical_z(code: &StabilizerCode) -> Result<PauliOperator> {
    logical_basis(code)
        .into_iter()
        .find(|p| p.support().iter().all(|&q| p.get(q) == qsurgery::paulicode::Pauli::Z))
        .ok_or_else(|| Error::invalid("no Z-type logical in the basis"))
}
