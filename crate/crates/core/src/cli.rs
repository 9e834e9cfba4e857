//! Command-line front end. [`run`] does all the work so it can be tested in-process.
//!
//! Exit codes: 0 ok, 1 usage, 2 invalid input, 3 solver failure, 4 failed verification.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::energy::{self, CompatReport};
use crate::error::Error;
use crate::ifs::{self, FractalSpec};
use crate::model::Model;
use crate::presets;
use crate::quasiuni::{self, QueReport};
use crate::spectral::{self, EigenOptions, SolverChoice, DENSE_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "fractal-spectra", version, about = "Graph approximations, spectra and error bounds for pcf self-similar fractals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in fractal: interval, sg, sg-dim-N, sg-level3, pentagasket5, pentagasket3
    #[arg(long)]
    preset: Option<String>,
    /// JSON fractal spec
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Export {
    Vertices,
    Edges,
    Energy,
    Gram,
    Measure,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structural constants of a fractal
    Info {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Output,
    },
    /// Export the generation-m graph, its matrices or vertex masses
    Graph {
        #[command(flatten)]
        source: Source,
        #[arg(long = "gen")]
        generation: usize,
        #[arg(long, value_enum, default_value = "vertices")]
        export: Export,
        #[command(flatten)]
        out: Output,
    },
    /// Smallest eigenvalues of the generation-m Laplacian
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long = "gen")]
        generation: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Also write the eigenvectors
        #[arg(long)]
        vectors: bool,
        #[arg(long, value_enum, default_value = "auto")]
        solver: SolverChoice,
        /// Residual target of the iterative solver
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Eigenvalues over a range of generations with the bound δ_m
    Convergence {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_enum, default_value = "auto")]
        solver: SolverChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Compatibility check and, with --que, the defect suite
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        que: bool,
        #[arg(long = "gen", default_value_t = 1)]
        generation: usize,
        /// Reference generation M (default m+3, capped by size)
        #[arg(long)]
        reference: Option<usize>,
        /// Compatibility tolerance
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Table of the bounds δ_m
    Delta {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[command(flatten)]
        out: Output,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    Verify(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    use Error::*;
    match e {
        NonContractive { .. } | NotSimilarity { .. } | DisconnectedBase | DisconnectedGraph | BadGlue { .. }
        | BadWeights { .. } | BadConductance(_) | BadMeasure(_) | MalformedSpec(_) | UnknownPreset(_)
        | NoGeometry | GlueGeometryMismatch { .. } | SingularInterior | NonUniqueFixedPoint(_) | Io(_) => {
            EXIT_VALIDATION
        }
        UnknownVertex(_) | GenerationMismatch { .. } | GenerationOrder { .. } | DimensionMismatch { .. }
        | TooManyEigenpairs { .. } | EmptyInterior => EXIT_USAGE,
        MassNotPD | ConvergenceFailure { .. } | DenseLimitExceeded { .. } | FactorUndefined { .. }
        | ClusterOverlap { .. } | Numerical(_) => EXIT_SOLVER,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_VERIFY
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_VALIDATION
        }
    }
}

fn load_spec(source: &Source) -> Result<FractalSpec, Error> {
    match (&source.preset, &source.file) {
        (Some(name), _) => presets::by_name(name),
        (None, Some(path)) => FractalSpec::from_file(path),
        (None, None) => unreachable!("clap enforces one source"),
    }
}

fn load(source: &Source) -> Result<Model, Error> {
    Model::new(load_spec(source)?)
}

/// Shortest representation that reads back to the same `f64`.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn emit(out: &Output, csv: impl FnOnce() -> String, json: impl FnOnce() -> Value, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = match out.format {
        Format::Csv => csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json()).expect("json value serializes");
            s.push('\n');
            s
        }
    };
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn options(k: u64, solver: SolverChoice, seed: u64) -> EigenOptions {
    EigenOptions::new(k as usize).solver(solver).seed(seed)
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Info { source, out } => {
            let spec = load_spec(&source)?;
            let info = ifs::validate_spec(&spec)?;
            let name = spec.name.clone().unwrap_or_else(|| "custom".into());
            let formula = format!("{}*{}^m+{}", num(info.vertex_count.alpha), info.n_maps, num(info.vertex_count.beta));
            emit(
                &out,
                || {
                    let mut s = String::from("key,value\n");
                    let renorm: Vec<String> = spec.renorm.iter().map(|r| num(*r)).collect();
                    let rows = [
                        ("name", name.clone()),
                        ("N", info.n_maps.to_string()),
                        ("N_0", info.n_boundary.to_string()),
                        ("N_1", info.max_cells_per_vertex.to_string()),
                        ("b", info.identified_per_step.to_string()),
                        ("r", renorm.join(";")),
                        ("tau_min", num(info.tau_min)),
                        ("tau_max", num(info.tau_max)),
                        ("d_resistance", num(info.d_resistance)),
                        ("d_euclidean", info.d_euclidean.map(num).unwrap_or_default()),
                        ("vertex_count", formula.clone()),
                    ];
                    for (k, v) in rows {
                        let _ = writeln!(s, "{k},{v}");
                    }
                    s
                },
                || {
                    let mut v = to_value(&info);
                    v["name"] = json!(name);
                    v["renorm"] = json!(spec.renorm);
                    v["vertex_count_formula"] = json!(formula);
                    v
                },
                stdout,
            )
        }
        Command::Graph { source, generation, export, out } => {
            let model = load(&source)?;
            graph_export(&model, generation, export, &out, stdout)
        }
        Command::Spectrum { source, generation, k, vectors, solver, tol, seed, out } => {
            let model = load(&source)?;
            let mut opts = options(k, solver, seed);
            opts.tol = tol;
            opts.want_vectors = vectors;
            let res = spectral::eigensolve(&model, generation, &opts)?;
            emit(
                &out,
                || {
                    let mut s = String::from("k,eigenvalue");
                    if let Some(v) = &res.eigenvectors {
                        for i in 0..v.nrows() {
                            let _ = write!(s, ",v{i}");
                        }
                    }
                    s.push('\n');
                    for (i, l) in res.eigenvalues.iter().enumerate() {
                        let _ = write!(s, "{},{}", i + 1, num(*l));
                        if let Some(v) = res.eigenvector(i) {
                            for x in v {
                                let _ = write!(s, ",{}", num(x));
                            }
                        }
                        s.push('\n');
                    }
                    s
                },
                || {
                    let vecs: Option<Vec<Vec<f64>>> = res
                        .eigenvectors
                        .as_ref()
                        .map(|_| (0..res.eigenvalues.len()).map(|i| res.eigenvector(i).unwrap()).collect());
                    json!({
                        "generation": generation,
                        "solver": res.solver,
                        "eigenvalues": res.eigenvalues,
                        "residuals": res.residuals,
                        "eigenvectors": vecs,
                    })
                },
                stdout,
            )
        }
        Command::Convergence { source, from, to, k, solver, seed, out } => {
            if from > to {
                return Err(Failure::Usage(format!("--from {from} exceeds --to {to}")));
            }
            let model = load(&source)?;
            let table = spectral::convergence_table(&model, from..=to, &options(k, solver, seed))?;
            emit(
                &out,
                || {
                    let mut s = String::from("m,vertices,delta_m");
                    for i in 1..=table.k {
                        let _ = write!(s, ",lambda_{i}");
                    }
                    s.push_str(",observed_ratio,theoretical_ratio\n");
                    for r in &table.rows {
                        let _ = write!(s, "{},{},{}", r.m, r.vertices, num(r.delta));
                        for i in 0..table.k {
                            s.push(',');
                            if let Some(l) = r.eigenvalues.get(i) {
                                s.push_str(&num(*l));
                            }
                        }
                        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
                        let _ = writeln!(s, ",{},{}", opt(r.observed_ratio), opt(r.theoretical_ratio));
                    }
                    s
                },
                || to_value(&table),
                stdout,
            )
        }
        Command::Verify { source, que, generation, reference, tol, seed, out } => {
            let model = load(&source)?;
            let compat = energy::check_compatibility(model.spec(), tol)?;
            let report = if que {
                let big_m = reference.unwrap_or_else(|| model.reference_generation(generation, DENSE_LIMIT));
                Some(quasiuni::que_report(&model, generation, big_m, seed)?)
            } else {
                None
            };
            let pass = compat.compatible && report.as_ref().is_none_or(|r| r.pass);
            emit(&out, || verify_csv(&compat, report.as_ref()), || {
                json!({ "compatibility": compat, "que": report, "pass": pass })
            }, stdout)?;
            if pass {
                Ok(())
            } else {
                let mut failed: Vec<&str> = Vec::new();
                if !compat.compatible {
                    failed.push("compatibility");
                }
                if let Some(r) = &report {
                    failed.extend(r.checks.iter().filter(|c| !c.pass).map(|c| c.name));
                }
                Err(Failure::Verify(failed.join(", ")))
            }
        }
        Command::Delta { source, from, to, out } => {
            if from > to {
                return Err(Failure::Usage(format!("--from {from} exceeds --to {to}")));
            }
            let model = load(&source)?;
            let rows = (from..=to).map(|m| quasiuni::delta_bound(&model, m)).collect::<Result<Vec<_>, _>>()?;
            emit(
                &out,
                || {
                    let mut s = String::from("m,general,corollary,symmetric\n");
                    for d in &rows {
                        let _ = writeln!(
                            s,
                            "{},{},{},{}",
                            d.m,
                            num(d.general),
                            num(d.corollary),
                            d.symmetric.map(num).unwrap_or_default()
                        );
                    }
                    s
                },
                || to_value(&rows),
                stdout,
            )
        }
    }
}

fn verify_csv(compat: &CompatReport, report: Option<&QueReport>) -> String {
    let mut s = String::from("check,measured,bound,pass\n");
    let _ = writeln!(s, "compatibility,{},{},{}", num(compat.residual), num(compat.tolerance), compat.compatible);
    if let Some(r) = report {
        for c in &r.checks {
            let _ = writeln!(s, "{},{},{},{}", c.name, num(c.measured), num(c.bound), c.pass);
        }
    }
    s
}

fn graph_export(model: &Model, m: usize, export: Export, out: &Output, stdout: &mut dyn Write) -> Result<(), Failure> {
    let g = model.graph(m);
    match export {
        Export::Vertices => {
            let coords = ifs::vertex_coordinates(model.spec(), &g).ok();
            let dim = coords.as_ref().map_or(0, |c| c.first().map_or(0, |x| x.len()));
            emit(
                out,
                || {
                    let mut s = String::from("vertex,address,cells");
                    for d in 0..dim {
                        let _ = write!(s, ",x{d}");
                    }
                    s.push('\n');
                    for v in 0..g.n_vertices() {
                        let _ = write!(s, "{},{},{}", v, g.address(v), g.cell_count(v));
                        if let Some(c) = &coords {
                            for x in &c[v] {
                                let _ = write!(s, ",{}", num(*x));
                            }
                        }
                        s.push('\n');
                    }
                    s
                },
                || {
                    let list: Vec<Value> = (0..g.n_vertices())
                        .map(|v| {
                            json!({
                                "vertex": v,
                                "address": g.address(v).to_string(),
                                "cells": g.cell_count(v),
                                "coordinates": coords.as_ref().map(|c| c[v].clone()),
                            })
                        })
                        .collect();
                    Value::Array(list)
                },
                stdout,
            )
        }
        Export::Edges => {
            let form = model.energy(m)?;
            emit(
                out,
                || {
                    let mut s = String::from("u,v,word,conductance\n");
                    for (e, t) in g.edges().iter().zip(form.conductances()) {
                        let _ = writeln!(s, "{},{},{},{}", e.u, e.v, e.word, num(*t));
                    }
                    s
                },
                || {
                    let list: Vec<Value> = g
                        .edges()
                        .iter()
                        .zip(form.conductances())
                        .map(|(e, t)| json!({ "u": e.u, "v": e.v, "word": e.word, "conductance": t }))
                        .collect();
                    Value::Array(list)
                },
                stdout,
            )
        }
        Export::Energy | Export::Gram => {
            let matrix = match export {
                Export::Energy => model.energy(m)?.matrix().clone(),
                _ => model.gram(m)?,
            };
            emit(
                out,
                || {
                    let mut s = String::from("row,col,value\n");
                    for (i, j, v) in matrix.triplets() {
                        let _ = writeln!(s, "{i},{j},{}", num(v));
                    }
                    s
                },
                || {
                    let list: Vec<Value> =
                        matrix.triplets().map(|(i, j, v)| json!({ "row": i, "col": j, "value": v })).collect();
                    Value::Array(list)
                },
                stdout,
            )
        }
        Export::Measure => {
            let mu = model.vertex_measure(m)?;
            emit(
                out,
                || {
                    let mut s = String::from("vertex,mass\n");
                    for (v, x) in mu.values.iter().enumerate() {
                        let _ = writeln!(s, "{v},{}", num(*x));
                    }
                    s
                },
                || to_value(&mu),
                stdout,
            )
        }
    }
}
