//! Command-line front end: model construction, individual exact
//! computations, fuzz runs, and certificate verification.
//!
//! Exit codes: 0 success / certified; 1 verification failed, a not-lc
//! verdict, or a fuzz violation; 2 input or parse error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use blct_surf_core::kstab::{self, Certificate};
use blct_surf_core::lattice::{CurveRole, ModelParams, PointLabel, SurfaceModel};
use blct_surf_core::lc_local::{self, default_depth_cap, GermConfiguration, LocalData};
use blct_surf_core::positivity::{self, ZariskiOutcome};
use blct_surf_core::rat::Rat;
use blct_surf_core::vanishing::{self, FiberAxis};

#[derive(Parser)]
#[command(
    name = "blct-surf",
    version,
    about = "Exact positivity computations and stability certificates for blow-ups of a quadric surface"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report to this path instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct ModelArgs {
    /// Model file with keys r, blown, beta (overrides the inline flags).
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Number of blown-up points; r = 0 selects the unblown surface.
    #[arg(long)]
    r: Option<u32>,
    /// Boundary parameter as a reduced fraction p/q.
    #[arg(long)]
    beta: Option<String>,
    /// Explicit blown-up labels, e.g. `1,2,3,4,5,6,7` or `0,1,...,inf`.
    #[arg(long, value_delimiter = ',')]
    blown: Option<Vec<String>>,
    /// Blow up the tangent point labelled 0 (ignored when --blown is given).
    #[arg(long, default_value_t = false)]
    blow_zero: bool,
}

impl ModelArgs {
    fn params(&self) -> anyhow::Result<ModelParams> {
        let r = self
            .r
            .ok_or_else(|| anyhow::anyhow!("--r is required without --model-file"))?;
        let beta: Rat = self
            .beta
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("--beta is required without --model-file"))?
            .parse()?;
        if let Some(blown) = &self.blown {
            let mut set = BTreeSet::new();
            for label in blown {
                set.insert(label.parse::<PointLabel>()?);
            }
            Ok(ModelParams::new(r, set, beta)?)
        } else if self.blow_zero {
            Ok(ModelParams::with_zero(r, beta)?)
        } else {
            Ok(ModelParams::standard(r, beta)?)
        }
    }

    fn build(&self) -> anyhow::Result<SurfaceModel> {
        if let Some(path) = &self.model_file {
            let text = std::fs::read_to_string(path)?;
            return Ok(SurfaceModel::from_model_text(&text)?);
        }
        if self.r == Some(0) {
            let beta: Rat = self
                .beta
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--beta is required"))?
                .parse()?;
            return Ok(SurfaceModel::baseline(beta)?);
        }
        Ok(SurfaceModel::build(self.params()?)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Echo the parsed model with its curve catalog.
    Model {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Exact pairing of two classes given in the label algebra.
    Intersect {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Zariski decomposition of a class.
    Zariski {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Volume of a class.
    Vol {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Piecewise-quadratic volume profile along L - x Z.
    Profile {
        #[command(flatten)]
        model: ModelArgs,
        /// Ample base class; defaults to the log anticanonical class.
        #[arg(long, allow_hyphen_values = true)]
        l: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Vanishing-order bound along L - x Z.
    OrdBound {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        l: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Slack reserved for the finite-level error (default beta/10^6).
        #[arg(long)]
        margin: Option<String>,
    },
    /// Finite-level filtration sum for O(a,b) on the unblown surface.
    FiniteK {
        a: i64,
        b: i64,
        k: i64,
        #[arg(long, value_enum, default_value_t = Axis::First)]
        axis: Axis,
    },
    /// Evaluate the four local log-canonicity criteria on explicit data.
    LcCriteria {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        m: String,
        /// Local pairing (B.Omega)_p.
        #[arg(long)]
        bo: String,
        /// Local pairing (C.Omega)_p.
        #[arg(long)]
        co: String,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        transversal: bool,
    },
    /// Run the exact blow-up oracle on a germ file.
    LcOracle {
        #[arg(long)]
        germ: PathBuf,
        #[arg(long)]
        depth_cap: Option<usize>,
    },
    /// Fuzz the criteria against the oracle.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Verify the full certificate for one model.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Certificates over a rank range, in both blown-up-set variants.
    Sweep {
        #[arg(long, default_value_t = 7)]
        r_min: u32,
        #[arg(long, default_value_t = 12)]
        r_max: u32,
        /// Comma-separated beta list; default 1/(10 r) per rank.
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<String>>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    First,
    Second,
}

/// Positive thread cap from BLCT_SURF_THREADS, else the machine default.
fn thread_cap() -> usize {
    if let Ok(v) = std::env::var("BLCT_SURF_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(8)
}

struct Report {
    text: String,
    json: Value,
    exit: ExitCode,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report {
            text,
            json,
            exit: ExitCode::SUCCESS,
        }
    }

    fn failed(text: String, json: Value) -> Self {
        Report {
            text,
            json,
            exit: ExitCode::from(1),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            let body = match cli.format {
                Format::Table => report.text,
                Format::Json => {
                    let mut s =
                        serde_json::to_string_pretty(&report.json).expect("json serialization");
                    s.push('\n');
                    s
                }
            };
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, body) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{body}"),
            }
            report.exit
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn class_json(model: &SurfaceModel, d: &blct_surf_core::lattice::DivisorClass) -> Value {
    json!({
        "expr": model.class_to_string(d),
        "coeffs": d.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    })
}

fn model_json(model: &SurfaceModel) -> Value {
    json!({
        "r": model.r(),
        "blown": model.blown_order().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "beta": model.beta().to_string(),
    })
}

fn run(command: &Command) -> anyhow::Result<Report> {
    match command {
        Command::Model { model } => {
            let m = model.build()?;
            let mut text = m.to_model_text();
            for rec in m.catalog() {
                let _ = writeln!(
                    text,
                    "# curve {}: class {} self^2 {} tangency {} role {}",
                    rec.label,
                    m.class_to_string(&rec.cls),
                    rec.self_intersection,
                    rec.tangency_to_c,
                    match rec.role {
                        CurveRole::Negative => "negative",
                        CurveRole::NefTest => "nef-test",
                    }
                );
            }
            let catalog: Vec<Value> = m
                .catalog()
                .iter()
                .map(|rec| {
                    json!({
                        "label": rec.label.to_string(),
                        "class": class_json(&m, &rec.cls),
                        "self_intersection": rec.self_intersection.to_string(),
                        "tangency_to_c": rec.tangency_to_c,
                        "role": match rec.role {
                            CurveRole::Negative => "negative",
                            CurveRole::NefTest => "nef-test",
                        },
                    })
                })
                .collect();
            let json = json!({
                "schema": 1,
                "command": "model",
                "model": model_json(&m),
                "anticanonical_log": class_json(&m, m.neg_k_beta()),
                "catalog": catalog,
            });
            Ok(Report::ok(text, json))
        }
        Command::Intersect { model, a, b } => {
            let m = model.build()?;
            let ca = m.parse_class(a)?;
            let cb = m.parse_class(b)?;
            let v = m.intersect(&ca, &cb)?;
            let json = json!({
                "schema": 1,
                "command": "intersect",
                "model": model_json(&m),
                "a": class_json(&m, &ca),
                "b": class_json(&m, &cb),
                "value": v.to_string(),
            });
            Ok(Report::ok(format!("a.b = {v}\n"), json))
        }
        Command::Zariski { model, d } => {
            let m = model.build()?;
            let cd = m.parse_class(d)?;
            let outcome = positivity::zariski(&m, &cd)?;
            let mut text = format!("input = {}\n", m.class_to_string(&cd));
            let json_payload = match &outcome {
                ZariskiOutcome::Pseudoeffective(z) => {
                    let vol = m.intersect(&z.positive_part, &z.positive_part)?;
                    let _ = writeln!(text, "pseudoeffective = true");
                    let _ = writeln!(text, "P = {}", m.class_to_string(&z.positive_part));
                    for (label, coeff) in &z.negative_part {
                        let _ = writeln!(text, "N[{label}] = {coeff}");
                    }
                    let _ = writeln!(text, "vol = {vol}");
                    json!({
                        "pseudoeffective": true,
                        "positive_part": class_json(&m, &z.positive_part),
                        "negative_part": z.negative_part.iter()
                            .map(|(l, c)| (l.to_string(), c.to_string()))
                            .collect::<std::collections::BTreeMap<_, _>>(),
                        "vol": vol.to_string(),
                    })
                }
                ZariskiOutcome::NotPseudoeffective => {
                    let _ = writeln!(text, "pseudoeffective = false");
                    json!({ "pseudoeffective": false })
                }
            };
            let json = json!({
                "schema": 1,
                "command": "zariski",
                "model": model_json(&m),
                "input": class_json(&m, &cd),
                "result": json_payload,
            });
            Ok(Report::ok(text, json))
        }
        Command::Vol { model, d } => {
            let m = model.build()?;
            let cd = m.parse_class(d)?;
            let v = positivity::volume(&m, &cd)?;
            let json = json!({
                "schema": 1,
                "command": "vol",
                "model": model_json(&m),
                "input": class_json(&m, &cd),
                "value": v.to_string(),
            });
            Ok(Report::ok(format!("vol = {v}\n"), json))
        }
        Command::Profile { model, l, z } => {
            let m = model.build()?;
            let cl = match l {
                Some(expr) => m.parse_class(expr)?,
                None => m.neg_k_beta().clone(),
            };
            let cz = m.parse_class(z)?;
            let profile = vanishing::volume_profile(&m, &cl, &cz)?;
            let mut text = format!("sigma = {}\ntau = {}\n", profile.sigma, profile.tau);
            for seg in &profile.segments {
                let _ = writeln!(
                    text,
                    "segment [{}, {}] vol = {} + {}*x + {}*x^2",
                    seg.x_lo, seg.x_hi, seg.q0, seg.q1, seg.q2
                );
            }
            let _ = writeln!(text, "integral = {}", profile.integral());
            let json = json!({
                "schema": 1,
                "command": "profile",
                "model": model_json(&m),
                "l": class_json(&m, &cl),
                "z": class_json(&m, &cz),
                "profile": profile,
                "integral": profile.integral().to_string(),
            });
            Ok(Report::ok(text, json))
        }
        Command::OrdBound {
            model,
            l,
            z,
            margin,
        } => {
            let m = model.build()?;
            let cl = match l {
                Some(expr) => m.parse_class(expr)?,
                None => m.neg_k_beta().clone(),
            };
            let cz = m.parse_class(z)?;
            let margin = match margin {
                Some(s) => s.parse::<Rat>()?,
                None => m.beta() / 1_000_000,
            };
            let bound = vanishing::s_bound(&m, &cl, &cz, margin)?;
            let mut text = String::new();
            let _ = writeln!(text, "tau = {}", bound.tau);
            let _ = writeln!(text, "sigma = {}", bound.sigma);
            let _ = writeln!(text, "integral = {}", bound.integral);
            let _ = writeln!(text, "bound = {}", bound.bound);
            match &bound.asymptote {
                Some(a) => {
                    let _ = writeln!(text, "asymptote = {a}");
                }
                None => {
                    let _ = writeln!(text, "asymptote = none");
                }
            }
            let _ = writeln!(text, "margin = {}", bound.margin);
            let json = json!({
                "schema": 1,
                "command": "ord-bound",
                "model": model_json(&m),
                "l": class_json(&m, &cl),
                "z": class_json(&m, &cz),
                "ord_bound": bound,
            });
            Ok(Report::ok(text, json))
        }
        Command::FiniteK { a, b, k, axis } => {
            let axis = match axis {
                Axis::First => FiberAxis::First,
                Axis::Second => FiberAxis::Second,
            };
            let rec = vanishing::finite_k_ord(*a, *b, axis, *k)?;
            let summands: Vec<String> = rec.summands.iter().map(|v| v.to_string()).collect();
            let text = format!(
                "k = {}\nd_k = {}\ntau_k = {}\nsummands = {}\nord_value = {}\n",
                rec.k,
                rec.d_k,
                rec.tau_k,
                summands.join(","),
                rec.ord_value
            );
            let json = json!({
                "schema": 1,
                "command": "finite-k",
                "record": rec,
            });
            Ok(Report::ok(text, json))
        }
        Command::LcCriteria {
            a,
            b,
            m,
            bo,
            co,
            transversal,
        } => {
            let data = LocalData::new(
                a.parse()?,
                b.parse()?,
                m.parse()?,
                bo.parse()?,
                co.parse()?,
                *transversal,
            )?;
            let adj = lc_local::criterion_adjunction(&data);
            let mult = lc_local::criterion_mult_refined(&data);
            let two = lc_local::criterion_two_curves(&data);
            let clean = lc_local::criterion_two_curves_clean(&data);
            let mut text = String::new();
            let mut verdict_json = serde_json::Map::new();
            let push = |name: &str,
                        v: &lc_local::LcVerdict,
                        text: &mut String,
                        out: &mut serde_json::Map<String, Value>| {
                let _ = writeln!(text, "{name}: {v}");
                out.insert(name.to_string(), serde_json::to_value(v).unwrap());
            };
            push("adjunction", &adj, &mut text, &mut verdict_json);
            push("mult_refined", &mult, &mut text, &mut verdict_json);
            match &two {
                Ok(v) => push("two_curves", v, &mut text, &mut verdict_json),
                Err(e) => {
                    let _ = writeln!(text, "two_curves: rejected ({e})");
                    verdict_json.insert("two_curves".into(), json!({ "rejected": e.to_string() }));
                }
            }
            push("two_curves_clean", &clean, &mut text, &mut verdict_json);
            if !data.geometrically_consistent() {
                let _ = writeln!(
                    text,
                    "note: m exceeds a local pairing; no germ realizes this data"
                );
            }
            let json = json!({
                "schema": 1,
                "command": "lc-criteria",
                "data": data,
                "verdicts": Value::Object(verdict_json),
            });
            Ok(Report::ok(text, json))
        }
        Command::LcOracle { germ, depth_cap } => {
            let text_in = std::fs::read_to_string(germ)?;
            let cfg = GermConfiguration::from_germ_text(&text_in)?;
            let cap = depth_cap.unwrap_or_else(|| default_depth_cap(&cfg));
            let run = lc_local::oracle_is_lc(&cfg, cap)?;
            let mut text = format!("verdict = {}\n", run.verdict);
            let _ = writeln!(text, "blow_ups = {}", run.blow_ups);
            for (node, coeff) in &run.exceptional_coeffs {
                let _ = writeln!(text, "exceptional[{node}] = {coeff}");
            }
            let json = json!({
                "schema": 1,
                "command": "lc-oracle",
                "depth_cap": cap,
                "run": run,
            });
            if run.verdict.is_lc() {
                Ok(Report::ok(text, json))
            } else {
                Ok(Report::failed(text, json))
            }
        }
        Command::Fuzz { seed, trials } => {
            let report = lc_local::fuzz_criteria(*seed, *trials, thread_cap());
            let mut text = format!("{}\n", report.summary());
            for v in &report.violations {
                let _ = writeln!(
                    text,
                    "violation trial {} criterion {}:\n{}",
                    v.trial, v.criterion, v.germ
                );
            }
            let json = json!({
                "schema": 1,
                "command": "fuzz",
                "report": report,
            });
            if report.sound() {
                Ok(Report::ok(text, json))
            } else {
                Ok(Report::failed(text, json))
            }
        }
        Command::Verify { model } => {
            let params = if let Some(path) = &model.model_file {
                let text = std::fs::read_to_string(path)?;
                let m = SurfaceModel::from_model_text(&text)?;
                ModelParams::new(m.r(), m.params().blown.clone(), m.beta().clone())?
            } else {
                model.params()?
            };
            let cert = kstab::verify_theorem_main(params)?;
            let text = certificate_text(&cert);
            let json = serde_json::to_value(&cert)?;
            if cert.is_certified() {
                Ok(Report::ok(text, json))
            } else {
                Ok(Report::failed(text, json))
            }
        }
        Command::Sweep {
            r_min,
            r_max,
            betas,
        } => {
            let betas: Vec<Rat> = match betas {
                Some(list) => list
                    .iter()
                    .map(|s| s.parse::<Rat>())
                    .collect::<Result<_, _>>()?,
                None => Vec::new(),
            };
            let entries = sweep_parallel(*r_min..=*r_max, &betas, thread_cap());
            let mut text = String::new();
            let mut rows = Vec::new();
            let mut any_failed = false;
            let mut any_error = false;
            for e in &entries {
                match &e.result {
                    Ok(cert) => {
                        let _ = writeln!(
                            text,
                            "r={} beta={} blow_zero={}: {} (margin {})",
                            e.r, e.beta, e.blow_zero, cert.verdict, cert.margin
                        );
                        any_failed |= !cert.is_certified();
                        rows.push(json!({
                            "r": e.r,
                            "beta": e.beta.to_string(),
                            "blow_zero": e.blow_zero,
                            "verdict": cert.verdict.to_string(),
                            "margin": cert.margin.to_string(),
                        }));
                    }
                    Err(err) => {
                        let _ = writeln!(
                            text,
                            "r={} beta={} blow_zero={}: error ({err})",
                            e.r, e.beta, e.blow_zero
                        );
                        any_error = true;
                        rows.push(json!({
                            "r": e.r,
                            "beta": e.beta.to_string(),
                            "blow_zero": e.blow_zero,
                            "error": err.to_string(),
                        }));
                    }
                }
            }
            let json = json!({
                "schema": 1,
                "command": "sweep",
                "entries": rows,
            });
            if any_error {
                Err(anyhow::anyhow!("sweep had erroneous entries:\n{text}"))
            } else if any_failed {
                Ok(Report::failed(text, json))
            } else {
                Ok(Report::ok(text, json))
            }
        }
    }
}

fn certificate_text(cert: &Certificate) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "schema = {}", cert.schema);
    let _ = writeln!(text, "r = {}", cert.r);
    let _ = writeln!(text, "blown = {}", cert.blown.join(","));
    let _ = writeln!(text, "beta = {}", cert.beta);
    let _ = writeln!(text, "lambda = {}", cert.lambda);
    let _ = writeln!(text, "margin requirement = {}", cert.margin_requirement);
    let _ = writeln!(text, "ord bounds:");
    for (label, bound) in cert.ord_table.entries() {
        let asym = bound
            .asymptote
            .as_ref()
            .map(|a| a.to_string())
            .unwrap_or_else(|| "none".to_string());
        let _ = writeln!(
            text,
            "  {label}: bound {} (tau {}, sigma {}, asymptote {asym})",
            bound.bound, bound.tau, bound.sigma
        );
    }
    for claim in &cert.claims {
        let _ = writeln!(
            text,
            "claim {} ({}): {}",
            claim.claim_id,
            claim.locus,
            if claim.verdict { "PASS" } else { "FAIL" }
        );
        for check in &claim.checks {
            let _ = writeln!(
                text,
                "  {}: {} {} {} slack {} {}",
                check.paper_anchor,
                check.left,
                check.relation,
                check.right,
                check.slack,
                if check.pass { "pass" } else { "FAIL" }
            );
        }
    }
    let _ = writeln!(text, "margin = {}", cert.margin);
    let _ = writeln!(text, "verdict = {}", cert.verdict);
    text
}

fn sweep_parallel(
    ranks: std::ops::RangeInclusive<u32>,
    betas: &[Rat],
    threads: usize,
) -> Vec<kstab::SweepEntry> {
    let items = kstab::sweep_items(ranks, betas);
    if threads <= 1 || items.len() <= 1 {
        return items
            .into_iter()
            .map(|(r, beta, blow_zero)| run_sweep_item(r, beta, blow_zero))
            .collect();
    }
    let mut slots: Vec<Option<kstab::SweepEntry>> = Vec::new();
    slots.resize_with(items.len(), || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_mutex = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(items.len()) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if idx >= items.len() {
                    break;
                }
                let (r, beta, blow_zero) = items[idx].clone();
                let entry = run_sweep_item(r, beta, blow_zero);
                let mut guard = slots_mutex.lock().expect("sweep slots");
                guard[idx] = Some(entry);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("sweep slot filled"))
        .collect()
}

fn run_sweep_item(r: u32, beta: Rat, blow_zero: bool) -> kstab::SweepEntry {
    let params = if blow_zero {
        ModelParams::with_zero(r, beta.clone())
    } else {
        ModelParams::standard(r, beta.clone())
    };
    let result = params
        .map_err(kstab::KstabError::from)
        .and_then(kstab::verify_theorem_main);
    kstab::SweepEntry {
        r,
        beta,
        blow_zero,
        result,
    }
}
