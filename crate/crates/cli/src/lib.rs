//! The `favres` command-line tool: argument parsing, configuration and the
//! commands, kept in a library so that tests can run them in-process.

pub mod config;
pub mod formats;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use favres_core::complexes::check_d_squared;
use favres_core::pseudo_rep::{
    check_pseudo_rep, evaluate, hecke_assignment, substitute, trace_of_rep,
    universal_ring_relations, CheckOptions, FiniteGroup, PseudoRep, Verdict,
};
use favres_core::resolution::{
    favorable_resolution, koszul_stratum_resolution, lower_dim_resolution, ResolutionOptions,
};
use favres_core::toy_model::{
    augmented, realize_complex, realize_term, verify_exactness, SweepMode, ToyComplex,
};
use favres_core::{Error, Params, Term, Weight, Zpm};
use serde::de::DeserializeOwned;

use config::{FileConfig, Overrides, RunConfig};
use formats::*;

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const DOMAIN: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const PRECONDITION: i32 = 4;
    pub const VERIFICATION: i32 = 5;
    pub const BUDGET: i32 = 6;
}

#[derive(Debug, Parser)]
#[command(
    name = "favres",
    version,
    about = "Favorable resolutions and their verification"
)]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for strand sweeps.
    #[arg(long, global = true, env = "FAVRES_JOBS")]
    pub jobs: Option<usize>,
    /// Write the JSON result here instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RingArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, visible_alias = "delta-threshold")]
    pub threshold: Option<i64>,
    /// Budget for every exponent search.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exactness,
    QuasiIso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Cells,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KoszulKind {
    Stratum,
    Lower,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a complex of favorable terms resolving the weight (k, w).
    Resolve {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        k: Vec<i64>,
        #[arg(long, allow_hyphen_values = true)]
        w: i64,
    },
    /// Check a complex (or a resolution) strand by strand in the toy model.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "quasi-iso")]
        mode: Mode,
        /// Sweep box, one bound per variable.
        #[arg(long = "box", value_delimiter = ',')]
        bx: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value = "cells")]
        sweep: Sweep,
    },
    /// Emit a single Koszul resolution.
    Koszul {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, value_enum)]
        kind: KoszulKind,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        k: Vec<i64>,
        #[arg(long, allow_hyphen_values = true)]
        w: i64,
        /// Vanishing orders M of the term.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
        /// Exponents N^(J) of a stratum resolution, zero off the support.
        #[arg(long, value_delimiter = ',')]
        exponents: Option<Vec<u64>>,
        /// The exponent N of a lower resolution.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Pseudo-representations of finite groups.
    Pseudorep {
        #[command(subcommand)]
        command: PseudorepCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum PseudorepCommand {
    /// Check a candidate τ against the pseudo-representation axioms.
    Check {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generators of the universal two-dimensional ring, optionally evaluated at τ.
    Relations {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        tau: Option<PathBuf>,
    },
    /// The trace of a matrix representation, checked.
    FromRep {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Pull a Hecke eigenvalue table back to τ and check it.
    Hecke {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit the table of a built-in group: s3, cyclic:N or dihedral:N.
    Group {
        #[arg(long)]
        name: String,
    },
}

/// What a command produced: a JSON document (possibly empty on error), a
/// message for standard error and the exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub json: String,
    pub message: String,
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

/// Exit status for a library error raised while computing (not while parsing).
pub fn code_of(e: &Error) -> i32 {
    match e {
        Error::BudgetExhausted { .. } => exit::BUDGET,
        Error::BoxTooSmall { .. } => exit::PRECONDITION,
        Error::MalformedComplex(_)
        | Error::InconsistentGrading(_)
        | Error::IllDefinedMonomialMap(_)
        | Error::Composability(_) => exit::PARSE,
        Error::Internal(_) => exit::INTERNAL,
        _ => exit::DOMAIN,
    }
}

fn domain(e: Error) -> Failure {
    Failure::new(code_of(&e), e.to_string())
}

/// Errors in the content of an input file count as malformed input.
fn malformed(e: Error) -> Failure {
    Failure::new(exit::PARSE, e.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(exit::PARSE, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(exit::PARSE, format!("{}: {e}", path.display())))
}

/// Cap the global worker pool. Later calls in the same process are ignored.
pub fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn overrides(cli: &Cli, ring: Option<&RingArgs>) -> Overrides {
    let ring = ring.cloned().unwrap_or_default();
    Overrides {
        p: ring.p,
        g: ring.g,
        m: ring.m,
        delta_threshold: ring.threshold,
        budget: ring.budget,
        box_bound: match &cli.command {
            Command::Verify { bx, .. } => bx.clone(),
            _ => None,
        },
        output: cli.output.clone(),
        seed: match &cli.command {
            Command::Pseudorep {
                command:
                    PseudorepCommand::Check { seed, .. }
                    | PseudorepCommand::FromRep { seed, .. }
                    | PseudorepCommand::Hecke { seed, .. },
            } => *seed,
            _ => None,
        },
        jobs: cli.jobs,
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(|e| Failure::new(exit::PARSE, e))?,
        None => FileConfig::default(),
    };
    let ring = match &cli.command {
        Command::Resolve { ring, .. } | Command::Koszul { ring, .. } => Some(ring),
        _ => None,
    };
    RunConfig::resolve(&file, &overrides(cli, ring)).map_err(|e| Failure::new(exit::DOMAIN, e))
}

/// Parameters for a command working on weights of length `len`.
fn params_for(cfg: &RunConfig, len: usize) -> Result<Params, Failure> {
    let p = cfg
        .p
        .ok_or_else(|| Failure::new(exit::DOMAIN, "p is required (--p or config)"))?;
    if let Some(g) = cfg.g.filter(|&g| g != len) {
        return Err(Failure::new(
            exit::DOMAIN,
            format!("g = {g} but k has {len} entries"),
        ));
    }
    Params::new(p, len, cfg.m, cfg.delta_threshold).map_err(domain)
}

/// Run a parsed command line. Does not touch the process state beyond
/// reading input files; writing the result is left to the caller.
pub fn run(cli: &Cli) -> Outcome {
    let cfg = match load_config(cli) {
        Ok(c) => c,
        Err(f) => {
            return Outcome {
                code: f.code,
                json: String::new(),
                message: f.message,
                output: None,
            }
        }
    };
    configure_jobs(cfg.jobs);
    let output = cfg.output.clone();
    match dispatch(cli, &cfg) {
        Ok((code, json, message)) => Outcome {
            code,
            json,
            message,
            output,
        },
        Err(f) => Outcome {
            code: f.code,
            json: String::new(),
            message: f.message,
            output: None,
        },
    }
}

type Produced = (i32, String, String);

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<Produced, Failure> {
    match &cli.command {
        Command::Resolve { k, w, .. } => cmd_resolve(cfg, k, *w),
        Command::Verify {
            input, mode, sweep, ..
        } => cmd_verify(cfg, input, *mode, *sweep),
        Command::Koszul {
            kind,
            k,
            w,
            orders,
            exponents,
            n,
            ..
        } => cmd_koszul(cfg, *kind, k, *w, orders, exponents.as_deref(), *n),
        Command::Pseudorep { command } => cmd_pseudorep(cfg, command),
    }
}

pub fn cmd_resolve(cfg: &RunConfig, k: &[i64], w: i64) -> Result<Produced, Failure> {
    let params = params_for(cfg, k.len())?;
    let wt = Weight::new(k.to_vec(), w);
    let opts = ResolutionOptions { budget: cfg.budget };
    let r = favorable_resolution(&params, &params.model(), &wt, opts).map_err(domain)?;
    let msg = format!(
        "{} terms in degrees {}..{}, {} iterations, all favorable: {}",
        r.metadata.terms,
        r.complex.lo,
        r.complex.end() - 1,
        r.metadata.iterations,
        r.metadata.all_favorable
    );
    Ok((exit::OK, to_json(&ResolutionDoc::from(&r)), msg))
}

/// The toy complex to check: the complex alone, or augmented by its source.
fn toy_for(doc: &serde_json::Value, mode: Mode) -> Result<ToyComplex, Failure> {
    let (complex_doc, with_source) = if doc.get("complex").is_some() {
        let r: ResolutionDoc = serde_json::from_value(doc.clone())
            .map_err(|e| Failure::new(exit::PARSE, e.to_string()))?;
        (r.complex.clone(), Some(r))
    } else {
        let c: ComplexDoc = serde_json::from_value(doc.clone())
            .map_err(|e| Failure::new(exit::PARSE, e.to_string()))?;
        (c, None)
    };
    let complex = complex_doc.to_complex().map_err(malformed)?;
    if let Some(v) = check_d_squared(&complex).first() {
        return Err(Failure::new(exit::PARSE, format!("not a complex: {v:?}")));
    }
    let tc = realize_complex(&complex).map_err(malformed)?;
    match mode {
        Mode::Exactness => Ok(tc),
        Mode::QuasiIso => {
            let r = with_source.ok_or_else(|| {
                Failure::new(
                    exit::PRECONDITION,
                    "quasi-iso mode needs a document with source and in_map",
                )
            })?;
            let source = r
                .source
                .to_term(&complex.params, complex.w)
                .map_err(malformed)?;
            let n0 = complex.terms_at(0).len();
            if let Some(e) = r.in_map.iter().find(|e| e.col != 0 || e.row >= n0) {
                return Err(Failure::new(
                    exit::PARSE,
                    format!("in-map entry {e:?} out of range"),
                ));
            }
            augmented(tc.ring, &realize_term(&source), &r.in_map, &tc).map_err(malformed)
        }
    }
}

pub fn cmd_verify(
    cfg: &RunConfig,
    input: &Path,
    mode: Mode,
    sweep: Sweep,
) -> Result<Produced, Failure> {
    let doc: serde_json::Value = read_json(input)?;
    let tc = toy_for(&doc, mode)?;
    let bx = cfg.box_bound.clone().unwrap_or_else(|| tc.required_box());
    let sweep_mode = match sweep {
        Sweep::Cells => SweepMode::Cells,
        Sweep::Exhaustive => SweepMode::Exhaustive,
    };
    let report = verify_exactness(&tc, &bx, sweep_mode).map_err(domain)?;
    let doc = ReportDoc::new(
        match mode {
            Mode::Exactness => "exactness",
            Mode::QuasiIso => "quasi-iso",
        },
        match sweep {
            Sweep::Cells => "cells",
            Sweep::Exhaustive => "exhaustive",
        },
        bx,
        report,
    );
    let code = if doc.exact {
        exit::OK
    } else {
        exit::VERIFICATION
    };
    let msg = format!(
        "{} strands checked, {} failures",
        doc.strands_checked,
        doc.failures.len()
    );
    Ok((code, to_json(&doc), msg))
}

pub fn cmd_koszul(
    cfg: &RunConfig,
    kind: KoszulKind,
    k: &[i64],
    w: i64,
    orders: &[u64],
    exponents: Option<&[u64]>,
    n: Option<u64>,
) -> Result<Produced, Failure> {
    let params = params_for(cfg, k.len())?;
    let t = Term::new(&params, Weight::new(k.to_vec(), w), orders.to_vec()).map_err(domain)?;
    let b = match kind {
        KoszulKind::Stratum => {
            let e =
                exponents.ok_or_else(|| Failure::new(exit::DOMAIN, "--exponents is required"))?;
            koszul_stratum_resolution(&params, &t, e)
        }
        KoszulKind::Lower => {
            let n = n.ok_or_else(|| Failure::new(exit::DOMAIN, "--n is required"))?;
            lower_dim_resolution(&params, &t, n)
        }
    }
    .map_err(domain)?;
    let counts: Vec<usize> = b.complex.terms.iter().map(Vec::len).collect();
    Ok((
        exit::OK,
        to_json(&ResolutionDoc::from(&b)),
        format!("summands per degree {counts:?}"),
    ))
}

fn named_values(group: &FiniteGroup, values: &BTreeMap<String, u64>) -> Result<Vec<u64>, Failure> {
    if let Some(name) = values.keys().find(|n| group.index_of(n).is_none()) {
        return Err(Failure::new(
            exit::DOMAIN,
            format!("{name} is not a group element"),
        ));
    }
    group
        .elements
        .iter()
        .map(|e| {
            values
                .get(e)
                .copied()
                .ok_or_else(|| Failure::new(exit::DOMAIN, format!("no value for {e}")))
        })
        .collect()
}

fn ring_of(p: u64, m: u32) -> Result<Zpm, Failure> {
    Zpm::new(p, m).map_err(domain)
}

fn verdict_doc(tau: &PseudoRep, verdict: Verdict) -> Produced {
    let names = &tau.group.elements;
    let witness = match &verdict {
        Verdict::FailsCondition { witness, .. } => Some(witness.clone()),
        Verdict::Valid {
            minimality_witness, ..
        } => minimality_witness.clone(),
        Verdict::NotMinimal { .. } => None,
    };
    let code = if verdict.is_valid() {
        exit::OK
    } else {
        exit::VERIFICATION
    };
    let doc = VerdictDoc {
        p: tau.ring.p(),
        m: tau.ring.m(),
        d: tau.d,
        values: names
            .iter()
            .cloned()
            .zip(tau.values.iter().copied())
            .collect(),
        witness: witness.map(|w| w.iter().map(|&i| names[i].clone()).collect()),
        verdict,
    };
    let msg = if code == exit::OK {
        "valid".to_string()
    } else {
        format!("{:?}", doc.verdict)
    };
    (code, to_json(&doc), msg)
}

fn check_options(cfg: &RunConfig) -> CheckOptions {
    CheckOptions {
        cap: cfg.cap,
        samples: cfg.samples,
        seed: cfg.seed,
    }
}

pub fn builtin_group(name: &str) -> Result<FiniteGroup, Failure> {
    let bad = || {
        Failure::new(
            exit::DOMAIN,
            format!("unknown group {name}; use s3, cyclic:N or dihedral:N"),
        )
    };
    let arg = |s: &str| s.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(bad);
    let g = match name.split_once(':') {
        None if name == "s3" => FiniteGroup::symmetric3(),
        Some(("cyclic", n)) => FiniteGroup::cyclic(arg(n)?),
        Some(("dihedral", n)) if arg(n)? >= 3 => FiniteGroup::dihedral(arg(n)?),
        _ => return Err(bad()),
    };
    g.map_err(domain)
}

pub fn cmd_pseudorep(cfg: &RunConfig, command: &PseudorepCommand) -> Result<Produced, Failure> {
    let load_group = |path: &Path| -> Result<FiniteGroup, Failure> {
        read_json::<GroupDoc>(path)?.to_group().map_err(malformed)
    };
    match command {
        PseudorepCommand::Check { group, tau, d, .. } => {
            let group = load_group(group)?;
            let doc: TauDoc = read_json(tau)?;
            let ring = ring_of(doc.p, doc.m)?;
            let values = named_values(&group, &doc.values)?
                .iter()
                .map(|&v| v % ring.modulus())
                .collect();
            let tau = PseudoRep {
                group,
                ring,
                values,
                d: *d,
            };
            let verdict = check_pseudo_rep(&tau, &check_options(cfg));
            Ok(verdict_doc(&tau, verdict))
        }
        PseudorepCommand::Relations { group, tau } => {
            let group = load_group(group)?;
            let names = &group.elements;
            let rels = universal_ring_relations(&group);
            let unit = BTreeMap::from([(group.identity, 2)]);
            let mut docs: Vec<RelationDoc> = rels
                .iter()
                .map(|r| relation_doc(r, &substitute(&r.poly, &unit), names))
                .collect();
            let mut all_zero = None;
            if let Some(path) = tau {
                let doc: TauDoc = read_json(path)?;
                let ring = ring_of(doc.p, doc.m)?;
                let values: Vec<u64> = named_values(&group, &doc.values)?
                    .iter()
                    .map(|&v| v % ring.modulus())
                    .collect();
                for (d, r) in docs.iter_mut().zip(&rels) {
                    d.residual = Some(evaluate(&r.poly, &ring, &values));
                }
                all_zero = Some(docs.iter().all(|d| d.residual == Some(0)));
            }
            let code = if all_zero == Some(false) {
                exit::VERIFICATION
            } else {
                exit::OK
            };
            let msg = format!("{} relations", docs.len());
            let out = RelationsDoc {
                elements: names.clone(),
                relations: docs,
                all_zero,
            };
            Ok((code, to_json(&out), msg))
        }
        PseudorepCommand::FromRep { group, rep, .. } => {
            let group = load_group(group)?;
            let doc: RepDoc = read_json(rep)?;
            let ring = ring_of(doc.p, doc.m)?;
            if let Some(name) = doc.matrices.keys().find(|n| group.index_of(n).is_none()) {
                return Err(Failure::new(
                    exit::DOMAIN,
                    format!("{name} is not a group element"),
                ));
            }
            let mats = group
                .elements
                .iter()
                .map(|e| {
                    doc.matrices
                        .get(e)
                        .cloned()
                        .ok_or_else(|| Failure::new(exit::DOMAIN, format!("no matrix for {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let tau = trace_of_rep(&group, ring, &mats).map_err(domain)?;
            let verdict = check_pseudo_rep(&tau, &check_options(cfg));
            Ok(verdict_doc(&tau, verdict))
        }
        PseudorepCommand::Hecke { group, table, .. } => {
            let group = load_group(group)?;
            let doc: HeckeDoc = read_json(table)?;
            let ring = ring_of(doc.p, doc.m)?;
            let labels = doc
                .labels
                .iter()
                .map(|(q, name)| {
                    group.index_of(name).map(|i| (q.clone(), i)).ok_or_else(|| {
                        Failure::new(exit::DOMAIN, format!("{name} is not a group element"))
                    })
                })
                .collect::<Result<BTreeMap<_, _>, _>>()?;
            let (tau, verdict) =
                hecke_assignment(&group, ring, &labels, &doc.eigenvalues, &check_options(cfg))
                    .map_err(domain)?;
            Ok(verdict_doc(&tau, verdict))
        }
        PseudorepCommand::Group { name } => {
            let g = builtin_group(name)?;
            Ok((
                exit::OK,
                to_json(&GroupDoc::from(&g)),
                format!("order {}", g.order()),
            ))
        }
    }
}
