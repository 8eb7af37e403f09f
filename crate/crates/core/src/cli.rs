// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.


//! Command-line front end.
//!
//! Every subcommand writes one CSV table, preceded by a `#` block echoing the
//! resolved configuration, derived seeds and realized node sets. Options may
//! also come from a flat `key = value` file given with `--config`; flags take
//! precedence over the file.
//!
//! Exit status: 0 on success, 2 for configuration or I/O errors, 3 when the
//! requested quantity does not exist in the numeric regime (for example a
//! steady state under an infinite-mean law, which still writes the
//! equilibrium with `exists = false`).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::firstpassage::{kemeny, mfpt_matrix};
use crate::graph::{generate_graph_traced, load_edge_list, transition_matrix, validate, Graph, GraphModel, TransitionMatrix};
use crate::montecarlo::{dump_trajectories, estimate, SimConfig, Statistic};
use crate::propagator::{ness, propagate, RelocationVector};
use crate::renewal::ResetLaw;
use crate::rng::{derive_seed, stream_rng};
use crate::survival::{ergodicity_check, hitting_probability, kill, mfht, survival_series, KilledSystem};
use crate::Mean;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const MAX_DRAWS: u32 = 100;

#[derive(Parser, Debug)]
#[command(name = "resetwalk", version, about = "Random walks with renewal resetting on networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or load a graph; writes `i, degree`
    Graph(Opts),
    /// Occupation probabilities; writes `t, i, j, probability`
    Propagate(Opts),
    /// Steady state; writes `j, ness, exists`
    Ness(Opts),
    /// Mean first passage times under geometric resetting; writes `p, i, j, mfpt`
    MfptSweep(Opts),
    /// Kemeny constant; writes `p, kemeny, efficiency`
    KemenySweep(Opts),
    /// Sibuya mean first hitting times; writes `alpha, start, mfht, global_mfht, regime`
    MfhtSweep(Opts),
    /// Survival curves; writes `i, t, survival, fht_pdf`
    Survival(Opts),
    /// Monte Carlo estimates; writes `index, estimate, std_error, trials, censored`
    Simulate(Opts),
}

impl Command {
    fn parts(&self) -> (&'static str, &Opts) {
        match self {
            Command::Graph(o) => ("graph", o),
            Command::Propagate(o) => ("propagate", o),
            Command::Ness(o) => ("ness", o),
            Command::MfptSweep(o) => ("mfpt-sweep", o),
            Command::KemenySweep(o) => ("kemeny-sweep", o),
            Command::MfhtSweep(o) => ("mfht-sweep", o),
            Command::Survival(o) => ("survival", o),
            Command::Simulate(o) => ("simulate", o),
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct Opts {
    /// Flat `key = value` file; keys are the long flag names
    #[arg(long)]
    config: Option<PathBuf>,
    /// ws:N,m,pr | ba:N,m | cc:N | edgelist:PATH
    #[arg(long)]
    graph: Option<String>,
    /// Edge list file, shorthand for --graph edgelist:PATH
    #[arg(long)]
    edgelist: Option<String>,
    /// Base seed; graph, r-node, t-node and simulation seeds derive from it
    #[arg(long)]
    seed: Option<String>,
    /// geom:p | sibuya:a | finite:PATH | period:T | uniform:T
    #[arg(long)]
    law: Option<String>,
    /// uniform:frac | degree:frac | node:i | vec:PATH
    #[arg(long)]
    reloc: Option<String>,
    /// set:i,j,... | frac:x
    #[arg(long)]
    targets: Option<String>,
    /// Reset probabilities a:b:n
    #[arg(long)]
    pgrid: Option<String>,
    /// Sibuya indices a:b:n
    #[arg(long)]
    agrid: Option<String>,
    /// Output CSV (standard output when absent)
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// Start node(s), comma separated
    #[arg(long)]
    start: Option<String>,
    /// Start-target pairs i:j,i:j,...
    #[arg(long)]
    pairs: Option<String>,
    /// occupation:t | survival | mfht | mfpt:j | reset-rate
    #[arg(long)]
    statistic: Option<String>,
    /// Trajectory dump CSV
    #[arg(long)]
    dump: Option<String>,
    /// Number of trajectories in the dump
    #[arg(long)]
    dump_trials: Option<String>,
    /// Summary CSV `i, mfht, hitting_prob, regime` (survival)
    #[arg(long)]
    summary: Option<String>,
    /// Write the graph as an edge list
    #[arg(long)]
    emit_edgelist: Option<String>,
}

impl Opts {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("graph", &self.graph),
            ("edgelist", &self.edgelist),
            ("seed", &self.seed),
            ("law", &self.law),
            ("reloc", &self.reloc),
            ("targets", &self.targets),
            ("pgrid", &self.pgrid),
            ("agrid", &self.agrid),
            ("out", &self.out),
            ("trials", &self.trials),
            ("horizon", &self.horizon),
            ("start", &self.start),
            ("pairs", &self.pairs),
            ("statistic", &self.statistic),
            ("dump", &self.dump),
            ("dump-trials", &self.dump_trials),
            ("summary", &self.summary),
            ("emit-edgelist", &self.emit_edgelist),
        ]
    }
}

/// Parse the flat configuration format: `key = value` per line, `#` comments.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let known: Vec<&str> = Opts::default().flags().into_iter().map(|(k, _)| k).collect();
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse { line: idx + 1, message: "expected key = value".into() });
        };
        let key = key.trim().replace('_', "-");
        if !known.contains(&key.as_str()) {
            return Err(Error::Parse { line: idx + 1, message: format!("unknown key '{key}'") });
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DefectiveLimit
        | Error::SingularLimit { .. }
        | Error::SeriesCap { .. }
        | Error::Singular
        | Error::Inconclusive(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

/// Full precision, with `inf` for divergent values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_mean(m: &Mean) -> String {
    fmt_f64(m.as_f64())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(format!("cannot parse {what} from '{s}'")))
}

fn list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| num(x, what)).collect()
}

/// `a:b:n`, `n` evenly spaced points, strictly increasing inside (0, 1).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(format!("grid '{spec}' is not a:b:n")));
    }
    let (a, b, n): (f64, f64, usize) = (num(parts[0], "grid start")?, num(parts[1], "grid end")?, num(parts[2], "grid size")?);
    if n == 0 || !(a > 0.0 && b < 1.0) || (n > 1 && a >= b) || (n == 1 && a != b) {
        return Err(bad(format!("grid '{spec}' must be strictly increasing inside (0, 1)")));
    }
    Ok((0..n).map(|k| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect())
}

pub fn parse_law(spec: &str) -> Result<ResetLaw> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| bad(format!("law '{spec}' is not kind:value")))?;
    match kind {
        "geom" => ResetLaw::geometric(num(arg, "p")?),
        "sibuya" => ResetLaw::sibuya(num(arg, "alpha")?),
        "finite" => ResetLaw::finite_support_from_csv(&fs::read_to_string(arg)?),
        "period" => ResetLaw::deterministic(num(arg, "period")?),
        "uniform" => ResetLaw::uniform(num(arg, "horizon")?),
        _ => Err(bad(format!("unknown law '{kind}'"))),
    }
}

fn parse_model(spec: &str) -> Result<GraphModel> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| bad(format!("graph '{spec}' is not kind:params")))?;
    let p: Vec<&str> = arg.split(',').collect();
    let arity = |k: usize| if p.len() == k { Ok(()) } else { Err(bad(format!("graph '{spec}' needs {k} parameters"))) };
    match kind {
        "ws" => {
            arity(3)?;
            Ok(GraphModel::WattsStrogatz { n: num(p[0], "N")?, m: num(p[1], "m")?, rewire: num(p[2], "rewiring")? })
        }
        "ba" => {
            arity(2)?;
            Ok(GraphModel::BarabasiAlbert { n: num(p[0], "N")?, m: num(p[1], "m")? })
        }
        "cc" => {
            arity(1)?;
            Ok(GraphModel::Complete { n: num(p[0], "N")? })
        }
        _ => Err(bad(format!("unknown graph model '{kind}'"))),
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Table {
        Table { header: header.to_vec(), rows: Vec::new() }
    }
}

struct Context {
    values: BTreeMap<String, String>,
    provenance: Vec<String>,
    seed: u64,
}

impl Context {
    fn new(command: &str, opts: &Opts) -> Result<Context> {
        let mut values = match &opts.config {
            Some(path) => parse_config(&fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        for (k, v) in opts.flags() {
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        let mut ctx = Context {
            values,
            provenance: vec![format!("resetwalk {}", env!("CARGO_PKG_VERSION")), format!("command: {command}")],
            seed: 0,
        };
        ctx.seed = num(&ctx.get_or("seed", "0"), "seed")?;
        Ok(ctx)
    }

    fn get(&mut self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.note(format!("{key} = {v}"));
        }
        v
    }

    fn get_or(&mut self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.note(format!("{key} = {v}"));
        v
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.get(key).ok_or_else(|| bad(format!("--{key} is required")))
    }

    fn note(&mut self, line: String) {
        self.provenance.push(line);
    }

    fn graph(&mut self) -> Result<Graph> {
        let spec = match self.values.get("edgelist").cloned() {
            Some(path) => format!("edgelist:{path}"),
            None => self.values.get("graph").cloned().ok_or_else(|| bad("--graph is required"))?,
        };
        self.note(format!("graph = {spec}"));
        let g = if let Some(path) = spec.strip_prefix("edgelist:") {
            load_edge_list(&fs::read_to_string(path)?)?
        } else {
            let model = parse_model(&spec)?;
            let seed = derive_seed(self.seed, "graph");
            let (g, attempt) = generate_graph_traced(model, seed)?;
            self.note(format!("graph seed = {seed}, attempt = {attempt}"));
            g
        };
        self.note(format!("nodes = {}, edges = {}", g.n(), g.edges().len()));
        Ok(g)
    }

    /// Independent Bernoulli(frac) draw per node; redrawn on a fresh
    /// substream while the set is empty (or, for targets, the whole graph).
    fn bernoulli_nodes(&mut self, purpose: &str, n: usize, frac: f64, allow_all: bool) -> Result<Vec<usize>> {
        if !(frac > 0.0 && frac <= 1.0) {
            return Err(bad(format!("{purpose} fraction {frac} outside (0, 1]")));
        }
        if frac == 1.0 && allow_all {
            return Ok((0..n).collect());
        }
        let seed = derive_seed(self.seed, purpose);
        for attempt in 0..MAX_DRAWS {
            let mut rng = stream_rng(seed, u64::from(attempt));
            let nodes: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < frac).collect();
            if !nodes.is_empty() && (allow_all || nodes.len() < n) {
                self.note(format!("{purpose} seed = {seed}, attempt = {attempt}"));
                return Ok(nodes);
            }
        }
        Err(Error::RetryLimit { attempts: MAX_DRAWS })
    }

    fn law(&mut self) -> Result<ResetLaw> {
        parse_law(&self.require("law")?)
    }

    fn relocation(&mut self, w: &TransitionMatrix) -> Result<RelocationVector> {
        let spec = self.get_or("reloc", "uniform:1");
        let n = w.n();
        let (kind, arg) = spec.split_once(':').ok_or_else(|| bad(format!("relocation '{spec}' is not kind:value")))?;
        let rel = match kind {
            "uniform" | "degree" => {
                let nodes = self.bernoulli_nodes("r-nodes", n, num(arg, "fraction")?, true)?;
                self.note(format!("r-nodes = {}", join(&nodes)));
                if kind == "uniform" {
                    RelocationVector::uniform_over(n, &nodes)?
                } else {
                    RelocationVector::degree_proportional(w, &nodes)?
                }
            }
            "node" => RelocationVector::node(n, num(arg, "node")?)?,
            "vec" => {
                let text = fs::read_to_string(arg)?;
                let weights: Vec<f64> = text
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| num(s, "relocation weight"))
                    .collect::<Result<_>>()?;
                if weights.len() != n {
                    return Err(bad(format!("relocation vector has {} entries, graph has {n} nodes", weights.len())));
                }
                RelocationVector::from_weights(weights)?
            }
            _ => return Err(bad(format!("unknown relocation mode '{kind}'"))),
        };
        Ok(rel)
    }

    fn targets(&mut self, n: usize) -> Result<Vec<usize>> {
        let spec = self.require("targets")?;
        let (kind, arg) = spec.split_once(':').ok_or_else(|| bad(format!("targets '{spec}' is not kind:value")))?;
        let nodes = match kind {
            "set" => {
                let nodes: Vec<usize> = list(arg, "target")?;
                if let Some(b) = nodes.iter().find(|&&b| b >= n) {
                    return Err(bad(format!("target {b} out of range")));
                }
                nodes
            }
            "frac" => self.bernoulli_nodes("t-nodes", n, num(arg, "fraction")?, false)?,
            _ => return Err(bad(format!("unknown target mode '{kind}'"))),
        };
        self.note(format!("t-nodes = {}", join(&nodes)));
        Ok(nodes)
    }

    fn starts(&mut self, n: usize) -> Result<Vec<usize>> {
        let starts = match self.get("start") {
            Some(s) => list(&s, "start node")?,
            None => (0..n).collect(),
        };
        if let Some(i) = starts.iter().find(|&&i| i >= n) {
            return Err(bad(format!("start node {i} out of range")));
        }
        Ok(starts)
    }

    fn write(&mut self, table: &Table) -> Result<()> {
        let out = self.get("out");
        let mut buf = Vec::new();
        for line in &self.provenance {
            writeln!(buf, "# {line}")?;
        }
        {
            let mut wtr = csv::Writer::from_writer(&mut buf);
            wtr.write_record(&table.header)?;
            for row in &table.rows {
                wtr.write_record(row)?;
            }
            wtr.flush()?;
        }
        match out {
            Some(path) => fs::write(path, buf)?,
            None => std::io::stdout().write_all(&buf)?,
        }
        Ok(())
    }
}

fn join(nodes: &[usize]) -> String {
    nodes.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parse `argv` and run; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    let (name, opts) = command.parts();
    let mut ctx = Context::new(name, opts)?;
    let g = ctx.graph()?;
    let w = transition_matrix(&g);
    let n = w.n();
    let mut code = EXIT_OK;
    let table = match command {
        Command::Graph(_) => {
            let d = validate(&g);
            ctx.note(format!("connected = {}, bipartite = {}, aperiodic = {}", d.connected, d.bipartite, d.aperiodic));
            if let Some(path) = ctx.get("emit-edgelist") {
                fs::write(path, g.to_edge_list())?;
            }
            let mut t = Table::new(&["i", "degree"]);
            t.rows = (0..n).map(|i| vec![i.to_string(), g.degree(i).to_string()]).collect();
            t
        }
        Command::Propagate(_) => {
            let law = ctx.law()?;
            let rel = ctx.relocation(&w)?;
            let horizon: usize = num(&ctx.get_or("horizon", "100"), "horizon")?;
            let starts = ctx.starts(n)?;
            let series = propagate(&w, &rel, &law, horizon);
            let mut t = Table::new(&["t", "i", "j", "probability"]);
            for step in 0..=horizon {
                for &i in &starts {
                    for j in 0..n {
                        t.rows.push(vec![step.to_string(), i.to_string(), j.to_string(), fmt_f64(series.at(step)[(i, j)])]);
                    }
                }
            }
            t
        }
        Command::Ness(_) => {
            let law = ctx.law()?;
            let rel = ctx.relocation(&w)?;
            let res = ness(&w, &rel, &law)?;
            if !res.exists {
                ctx.note("no steady state: infinite mean inter-reset time; equilibrium written".into());
                code = EXIT_NUMERIC;
            }
            let mut t = Table::new(&["j", "ness", "exists"]);
            t.rows = (0..n).map(|j| vec![j.to_string(), fmt_f64(res.row[j]), res.exists.to_string()]).collect();
            t
        }
        Command::MfptSweep(_) => {
            let rel = ctx.relocation(&w)?;
            let grid = parse_grid(&ctx.get_or("pgrid", "0.01:0.99:99"))?;
            let pairs = parse_pairs(&ctx.get_or("pairs", &format!("0:{}", n - 1)), n)?;
            let mats: Vec<_> = grid.par_iter().map(|&p| mfpt_matrix(&w, &rel, p)).collect::<Result<_>>()?;
            let mut t = Table::new(&["p", "i", "j", "mfpt"]);
            for (p, m) in grid.iter().zip(&mats) {
                for &(i, j) in &pairs {
                    t.rows.push(vec![fmt_f64(*p), i.to_string(), j.to_string(), fmt_f64(m[(i, j)])]);
                }
            }
            t
        }
        Command::KemenySweep(_) => {
            let grid = parse_grid(&ctx.get_or("pgrid", "0.01:0.99:99"))?;
            let ks: Vec<_> = grid.par_iter().map(|&p| kemeny(&w, p)).collect::<Result<_>>()?;
            let mut t = Table::new(&["p", "kemeny", "efficiency"]);
            t.rows = grid.iter().zip(&ks).map(|(p, k)| vec![fmt_f64(*p), fmt_f64(k.kemeny), fmt_f64(k.efficiency)]).collect();
            t
        }
        Command::MfhtSweep(_) => {
            let rel = ctx.relocation(&w)?;
            let targets = ctx.targets(n)?;
            let grid = parse_grid(&ctx.get_or("agrid", "0.05:0.95:19"))?;
            let starts = ctx.starts(n)?;
            let ks = kill(&w, &rel, &targets)?;
            let results: Vec<_> = grid.par_iter().map(|&a| sweep_point(&ks, a)).collect::<Result<_>>()?;
            let mut t = Table::new(&["alpha", "start", "mfht", "global_mfht", "regime"]);
            for (a, (res, regime)) in grid.iter().zip(&results) {
                for &i in &starts {
                    t.rows.push(vec![fmt_f64(*a), i.to_string(), fmt_mean(&res.per_start[i]), fmt_mean(&res.global), regime.to_string()]);
                }
            }
            t
        }
        Command::Survival(_) => {
            let law = ctx.law()?;
            let rel = ctx.relocation(&w)?;
            let targets = ctx.targets(n)?;
            let horizon: usize = num(&ctx.get_or("horizon", "100"), "horizon")?;
            if horizon == 0 {
                return Err(bad("horizon must be >= 1"));
            }
            let starts = ctx.starts(n)?;
            let ks = kill(&w, &rel, &targets)?;
            let stats = survival_series(&ks, &law, horizon);
            if let Some(path) = ctx.get("summary") {
                let res = mfht(&ks, &law)?;
                let regime = ergodicity_check(&ks, &law).class.as_str();
                let hp = match hitting_probability(&ks, &law, horizon) {
                    Ok(hp) => {
                        ctx.note(format!("hitting regime = {}", hp.regime.as_str()));
                        hp.per_start
                    }
                    Err(Error::Inconclusive(msg)) => {
                        ctx.note(format!("hitting regime = inconclusive ({msg})"));
                        vec![f64::NAN; n]
                    }
                    Err(e) => return Err(e),
                };
                let mut s = Table::new(&["i", "mfht", "hitting_prob", "regime"]);
                s.rows = starts.iter().map(|&i| vec![i.to_string(), fmt_mean(&res.per_start[i]), fmt_f64(hp[i]), regime.to_string()]).collect();
                let mut sctx = Context { values: BTreeMap::from([("out".to_string(), path)]), provenance: ctx.provenance.clone(), seed: ctx.seed };
                sctx.write(&s)?;
            }
            let mut t = Table::new(&["i", "t", "survival", "fht_pdf"]);
            for &i in &starts {
                for step in 0..=horizon {
                    t.rows.push(vec![i.to_string(), step.to_string(), fmt_f64(stats.survival[(i, step)]), fmt_f64(stats.fht_pdf[(i, step)])]);
                }
            }
            t
        }
        Command::Simulate(_) => {
            let law = ctx.law()?;
            let rel = ctx.relocation(&w)?;
            let targets = if ctx.values.contains_key("targets") { Some(ctx.targets(n)?) } else { None };
            let start: usize = num(&ctx.get_or("start", "0"), "start node")?;
            let trials: usize = num(&ctx.get_or("trials", "10000"), "trials")?;
            let horizon: u64 = num(&ctx.get_or("horizon", "1000"), "horizon")?;
            let default_stat = if targets.is_some() { "mfht".to_string() } else { format!("occupation:{horizon}") };
            let statistic = parse_statistic(&ctx.get_or("statistic", &default_stat))?;
            let seed = derive_seed(ctx.seed, "mc");
            ctx.note(format!("mc seed = {seed}"));
            let cfg = SimConfig { start, horizon, trials, seed, law, relocation: rel, targets };
            if let Some(path) = ctx.get("dump") {
                let count: usize = num(&ctx.get_or("dump-trials", &trials.min(10).to_string()), "dump trials")?;
                dump_trajectories(&w, &cfg, count.min(trials), fs::File::create(path)?)?;
            }
            let est = estimate(&w, &cfg, &statistic)?;
            let mut t = Table::new(&["index", "estimate", "std_error", "trials", "censored"]);
            t.rows = (0..est.estimate.len())
                .map(|k| vec![k.to_string(), fmt_f64(est.estimate[k]), fmt_f64(est.std_error[k]), est.trials.to_string(), est.censored.to_string()])
                .collect();
            t
        }
    };
    ctx.write(&table)?;
    Ok(code)
}

fn sweep_point(ks: &KilledSystem, alpha: f64) -> Result<(crate::survival::MfhtResult, &'static str)> {
    let law = ResetLaw::sibuya(alpha)?;
    Ok((mfht(ks, &law)?, ergodicity_check(ks, &law).class.as_str()))
}

fn parse_pairs(spec: &str, n: usize) -> Result<Vec<(usize, usize)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (i, j) = s.split_once(':').ok_or_else(|| bad(format!("pair '{s}' is not i:j")))?;
            let (i, j): (usize, usize) = (num(i, "node")?, num(j, "node")?);
            if i >= n || j >= n {
                return Err(bad(format!("pair {i}:{j} out of range")));
            }
            Ok((i, j))
        })
        .collect()
}

pub fn parse_statistic(spec: &str) -> Result<Statistic> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "occupation" => Ok(Statistic::Occupation { t: num(arg, "time")? }),
        "survival" => Ok(Statistic::Survival),
        "mfht" => Ok(Statistic::Mfht),
        "mfpt" => Ok(Statistic::Mfpt { target: num(arg, "target")? }),
        "reset-rate" => Ok(Statistic::ResetRate),
        _ => Err(bad(format!("unknown statistic '{spec}'"))),
    }
}
