use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::rc::Rc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use typetwo::algebra::Q;
use typetwo::machine::{
    halting_stabilization, run_streams, run_symbolic, shipped, shipped_named, Domain, Exact, HaltingSim, Machine,
    Program, Signature,
};
use typetwo::problems::Problem;
use typetwo::reductions::{
    self, execute, expand, registry, structured_push_check, verify_manifest, witness_for, Agreement, Manifest, Status,
};
use typetwo::spaces::PointDescriptor;
use typetwo::stream::{render, take, UPStream};

mod corpus;

const DEFAULT_MANIFEST: &str = include_str!("../../../manifests/default.manifest");

#[derive(Parser)]
#[command(name = "typetwo", version, about = "Type-2 machines, problems and reduction witnesses")]
struct Cli {
    /// Seed for corpus sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Step budget; overrides manifest defaults.
    #[arg(long, global = true)]
    fuel: Option<u64>,
    /// Stream prefix length; overrides manifest defaults.
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a register machine program.
    RunMachine {
        /// Program file, or `shipped:NAME`.
        file: String,
        /// OF, RING, ADD1, ALG or LPO; taken from the shipped program when omitted.
        #[arg(long)]
        sig: Option<String>,
        /// Input literals: reals like `rat:3/4`, or streams like `01:1` for LPO.
        #[arg(long, num_args = 0.., value_delimiter = ' ')]
        inputs: Vec<String>,
        /// Print every step.
        #[arg(long)]
        trace: bool,
    },
    /// Print the halting stream of a shipped program on a real input.
    Halting {
        program: String,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 2000)]
        iterations: u64,
    },
    /// Answer a problem instance with its ideal oracle.
    Solve {
        problem: String,
        #[arg(long)]
        input: String,
        /// Also print this many symbols of the input and answer names.
        #[arg(long)]
        name_depth: Option<usize>,
    },
    /// Run one witness on one input and show every stage.
    Reduce {
        id: String,
        #[arg(long)]
        input: String,
    },
    /// Verify witnesses on a manifest.
    Verify {
        /// `all`, a witness id, or a group such as `R3`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Manifest file; the shipped manifest when omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Verify this many sampled inputs per witness instead of a manifest.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 4)]
        threads: usize,
        /// Append wall-clock time per entry.
        #[arg(long)]
        timing: bool,
    },
    /// Print a sampled manifest.
    Sample {
        #[arg(long, default_value_t = 30)]
        per_entry: usize,
    },
    /// List problems and witnesses.
    Catalog,
}

struct Fail {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail { code: 2, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let r = dispatch(&cli, &mut out);
    print!("{out}");
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut String) -> Result<u8, Fail> {
    let fuel = cli.fuel.unwrap_or(reductions::FUEL);
    let depth = cli.depth.unwrap_or(reductions::DEPTH);
    match &cli.cmd {
        Cmd::RunMachine { file, sig, inputs, trace } => run_machine(out, file, sig.as_deref(), inputs, fuel, *trace),
        Cmd::Halting { program, input, iterations } => halting(out, program, input, *iterations, fuel),
        Cmd::Solve { problem, input, name_depth } => solve(out, problem, input, *name_depth),
        Cmd::Reduce { id, input } => reduce(out, id, input, depth, fuel),
        Cmd::Verify { suite, manifest, sample, threads, timing } => {
            let m = match (manifest, sample) {
                (_, Some(n)) => sampled(cli.seed, *n),
                (Some(path), None) => {
                    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    Manifest::parse(&text).map_err(|e| usage(e.to_string()))?
                }
                (None, None) => Manifest::parse(DEFAULT_MANIFEST).map_err(|e| usage(e.to_string()))?,
            };
            let mut m = m.select(suite).map_err(|e| usage(e.to_string()))?;
            m.depth = cli.depth.unwrap_or(m.depth);
            m.fuel = cli.fuel.unwrap_or(m.fuel);
            Ok(verify(out, &m, *threads, *timing))
        }
        Cmd::Sample { per_entry } => {
            let m = sampled(cli.seed, *per_entry);
            writeln!(out, "# sampled with seed {} ({} per witness)", cli.seed, per_entry).unwrap();
            out.push_str(&manifest_text(&m));
            Ok(0)
        }
        Cmd::Catalog => {
            catalog(out);
            Ok(0)
        }
    }
}

fn sampled(seed: u64, per_entry: usize) -> Manifest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for id in registry() {
        for k in 0..per_entry {
            entries.push((id.to_string(), corpus::sample(id, k, &mut rng)));
        }
    }
    Manifest { depth: reductions::DEPTH, fuel: reductions::FUEL, entries }
}

fn manifest_text(m: &Manifest) -> String {
    let mut s = format!("depth {}\nfuel {}\n", m.depth, m.fuel);
    for (id, lit) in &m.entries {
        writeln!(s, "{id} {lit}").unwrap();
    }
    s
}

fn load_program(file: &str, sig: Option<&str>) -> Result<Program, Fail> {
    if let Some(name) = file.strip_prefix("shipped:") {
        let s = shipped_named(name).ok_or_else(|| usage(format!("no shipped program `{name}`")))?;
        return Ok((*s.program()).clone());
    }
    let sig = sig.ok_or_else(|| usage("--sig is required for program files"))?;
    let sig = Signature::by_name(sig).ok_or_else(|| usage(format!("unknown signature `{sig}`")))?;
    let text = std::fs::read_to_string(file).map_err(|e| usage(format!("{file}: {e}")))?;
    Program::parse(&text, sig).map_err(|e| usage(format!("{file}: {e}")))
}

fn run_machine(
    out: &mut String,
    file: &str,
    sig: Option<&str>,
    inputs: &[String],
    fuel: u64,
    trace: bool,
) -> Result<u8, Fail> {
    let p = load_program(file, sig)?;
    if p.signature().domain == Domain::Stream {
        let ins = inputs
            .iter()
            .map(|s| s.parse::<UPStream>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(e.to_string()))?;
        let (o, tests) = run_streams(&p, &ins, fuel);
        writeln!(out, "{o}").unwrap();
        writeln!(out, "lpo tests: {tests}").unwrap();
        return Ok(0);
    }
    let ins = inputs
        .iter()
        .map(|s| s.parse::<PointDescriptor>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let rats: Option<Vec<Q>> =
        ins.iter().map(|d| if let PointDescriptor::Rat(r) = d { Some(r.clone()) } else { None }).collect();
    match rats {
        Some(rats) => {
            let mut m = Machine::new(Rc::new(p.clone()), Exact::default(), rats);
            while m.stopped().is_none() && m.steps() < fuel {
                if trace {
                    let pc = m.config().pc;
                    let line = p.source_line(pc).map_or("-".to_string(), |l| l.to_string());
                    let instr = p.lines().get(pc).map_or(String::new(), |i| i.to_string());
                    writeln!(out, "{:>6}  line {:>3}  {}", m.steps(), line, instr).unwrap();
                }
                m.step().expect("exact runs never stall");
            }
            writeln!(out, "{}", m.outcome()).unwrap();
            writeln!(out, "steps: {}", m.steps()).unwrap();
        }
        None => {
            if trace {
                return Err(usage("--trace needs rational inputs"));
            }
            let (o, log) = run_symbolic(&p, &ins, fuel);
            writeln!(out, "{o}").unwrap();
            writeln!(out, "tests: {}", log.len()).unwrap();
        }
    }
    Ok(0)
}

fn halting(out: &mut String, program: &str, input: &str, iterations: u64, fuel: u64) -> Result<u8, Fail> {
    let s = shipped_named(program).ok_or_else(|| usage(format!("no shipped program `{program}`")))?;
    if s.sig.domain != Domain::Real {
        return Err(usage(format!("`{program}` does not run on reals")));
    }
    let x: PointDescriptor = input.parse().map_err(|e: typetwo::ParseError| usage(e.to_string()))?;
    let mut sim = HaltingSim::for_descriptors(s.program(), std::slice::from_ref(&x)).map_err(usage)?;
    let mut bits = String::new();
    for _ in 0..iterations {
        let it = sim.iterate().map_err(|_| usage("input name stalled"))?;
        bits.extend(it.bits().iter().map(|b| char::from(b'0' + b)));
    }
    let ones = bits.chars().filter(|&c| c == '1').count();
    let shown: String = bits.chars().take(200).collect();
    writeln!(out, "stream: {shown}{}", if bits.len() > 200 { "…" } else { "" }).unwrap();
    writeln!(out, "iterations: {iterations}, symbols: {}, ones: {ones}", bits.len()).unwrap();
    writeln!(out, "precision: {}", sim.current()).unwrap();
    match halting_stabilization(&s.program(), &x, iterations, fuel) {
        Some((t, _)) => writeln!(out, "all 0 from iteration {t}").unwrap(),
        None => writeln!(out, "no stabilization certified").unwrap(),
    }
    Ok(0)
}

fn solve(out: &mut String, problem: &str, input: &str, name_depth: Option<usize>) -> Result<u8, Fail> {
    let p = Problem::from_id(problem).ok_or_else(|| usage(format!("unknown problem `{problem}`")))?;
    let x = p.parse_instance(input).map_err(|e| usage(e.to_string()))?;
    let a = p.ideal(&x).map_err(|e| usage(format!("domain error: {e}")))?;
    writeln!(out, "{}", a.render()).unwrap();
    if let Some(n) = name_depth {
        let name = take(&x.name, n).map_err(|_| usage("input name diverged"))?;
        writeln!(out, "input name:  {}", render(&name)).unwrap();
        let name = take(&a.name(), n).map_err(|_| usage("answer name diverged"))?;
        writeln!(out, "answer name: {}", render(&name)).unwrap();
    }
    Ok(0)
}

fn reduce(out: &mut String, id: &str, input: &str, depth: usize, fuel: u64) -> Result<u8, Fail> {
    let w = witness_for(id).map_err(|e| usage(e.to_string()))?;
    let x = w.source.parse_instance(input).map_err(|e| usage(e.to_string()))?;
    writeln!(out, "{} {}", w.id, w.statement()).unwrap();
    let r = match execute(&w, &x, depth, fuel) {
        Ok(r) => r,
        Err(e) => {
            writeln!(out, "error: {e}").unwrap();
            return Ok(1);
        }
    };
    for (i, stage) in w.stages.iter().enumerate() {
        writeln!(out, "stage {i} → {}", stage.oracle.title()).unwrap();
        writeln!(out, "  H output:    {}", render(&r.pre_outputs[i])).unwrap();
        writeln!(out, "  pushed:      {}", r.pushed[i].label).unwrap();
        writeln!(out, "  oracle:      {}", r.answers[i].render()).unwrap();
    }
    writeln!(out, "K output:      {}", render(&r.post_output)).unwrap();
    let prefix = structured_push_check(&w, &x, depth);
    let verdict = w.source.validate(&x, &r.post_output);
    writeln!(out, "prefix:        {}", agreement(&prefix)).unwrap();
    writeln!(
        out,
        "validator:     {}",
        verdict.as_ref().map_or_else(|e| format!("rejected ({e})"), |_| "accepted".into())
    )
    .unwrap();
    writeln!(out, "queries:       H {} K {}", r.pre_queries, r.post_queries).unwrap();
    Ok(if verdict.is_ok() && prefix == Agreement::Agree { 0 } else { 1 })
}

fn agreement(a: &Agreement) -> String {
    match a {
        Agreement::Agree => "agree".into(),
        Agreement::Disagree { stage, position } => format!("disagree at stage {stage} position {position}"),
        Agreement::Inconclusive(s) => format!("inconclusive ({s})"),
    }
}

fn verify(out: &mut String, m: &Manifest, threads: usize, timing: bool) -> u8 {
    let reports = verify_manifest(m, threads);
    let mut table: BTreeMap<usize, (String, [usize; 3])> = BTreeMap::new();
    let order: Vec<&str> = registry().to_vec();
    for r in &reports {
        let status = r.status();
        write!(
            out,
            "{:<12} {:<12} prefix={:<12} sound={:<12} q={}/{} {}",
            r.id,
            status.tag(),
            r.prefix.tag(),
            r.soundness.tag(),
            r.pre_queries,
            r.post_queries,
            r.input
        )
        .unwrap();
        if timing {
            write!(out, " {}us", r.micros).unwrap();
        }
        if !status.detail().is_empty() {
            write!(out, "  # {}", status.detail()).unwrap();
        }
        out.push('\n');
        let base = r.id.split('/').next().unwrap_or(&r.id);
        let rank = order.iter().position(|&o| o == base).unwrap_or(usize::MAX) * 2 + usize::from(r.id.contains('/'));
        let row = table.entry(rank).or_insert_with(|| (r.id.clone(), [0; 3]));
        row.1[match status {
            Status::Pass => 0,
            Status::Fail(_) => 1,
            Status::Inconclusive(_) => 2,
        }] += 1;
    }
    writeln!(out, "\n{:<12} {:>6} {:>6} {:>13}", "witness", "pass", "fail", "inconclusive").unwrap();
    let mut total = [0; 3];
    for (id, c) in table.values() {
        writeln!(out, "{:<12} {:>6} {:>6} {:>13}", id, c[0], c[1], c[2]).unwrap();
        for k in 0..3 {
            total[k] += c[k];
        }
    }
    writeln!(out, "{:<12} {:>6} {:>6} {:>13}", "total", total[0], total[1], total[2]).unwrap();
    u8::from(total[1] > 0)
}

fn catalog(out: &mut String) {
    writeln!(out, "problems").unwrap();
    for p in Problem::ALL {
        writeln!(out, "  {:<14} {:<18} {}", p.id(), p.title(), p.about()).unwrap();
    }
    writeln!(out, "\nwitnesses").unwrap();
    for id in registry() {
        let w = reductions::get_witness(id).expect("registered");
        writeln!(out, "  {:<5} {:<34} {}", id, w.statement(), w.about).unwrap();
    }
    writeln!(out, "\ngroups").unwrap();
    for g in ["R3", "R4", "R7", "R12"] {
        let ids = expand(g).expect("group");
        writeln!(out, "  {:<5} {}", g, ids.join(" ")).unwrap();
    }
    writeln!(out, "\nshipped programs").unwrap();
    for (i, s) in shipped().iter().enumerate() {
        writeln!(out, "  {:>2} {:<15} {:<5} {}", i, s.name, s.sig.name, s.about).unwrap();
    }
}
