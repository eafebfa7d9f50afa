//! curtain-kit command line: distances, chains, separation verdicts,
//! hyperbolicity probes, contraction and skewering checks, boundary probes,
//! SVG rendering and the deterministic property suites.

use clap::{Parser, Subcommand};
use curtain_kit::boundary::BoundaryRay;
use curtain_kit::cli::{self, SceneObject};
use curtain_kit::error::Error;
use curtain_kit::hyperbolicity::{self, MetricChoice};
use curtain_kit::metrics;
use curtain_kit::rankone;
use curtain_kit::sample;
use curtain_kit::spaces::{self, Space};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "curtain-kit", version, about = "Curtains and chains on model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Shared {
    /// Space descriptor file (JSON).
    #[arg(long)]
    space: PathBuf,
    /// Random seed for any sampled search.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Iteration budget for searches and verdicts.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Separation level.
    #[arg(long = "L", default_value_t = 0)]
    level: u32,
    /// Output format.
    #[arg(long, default_value = "json", value_parser = ["csv", "json"])]
    format: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ambient distance, ceiling metric and level-metric bounds.
    Dist {
        #[command(flatten)]
        shared: Shared,
        /// First point (JSON, model encoding).
        #[arg(long)]
        from: String,
        /// Second point (JSON, model encoding).
        #[arg(long)]
        to: String,
    },
    /// Chain of curtains dual to a segment realising the ceiling metric.
    Chain {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Separation verdict for a pair of curtains.
    Separate {
        #[command(flatten)]
        shared: Shared,
        /// First curtain: {"geodesic": {...}, "r": ...}.
        #[arg(long = "h")]
        h: String,
        #[arg(long = "k")]
        k: String,
    },
    /// Four-point delta over seeded samples.
    Delta {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 10.0)]
        scale: f64,
        /// Metric: d, dinf or dl.
        #[arg(long, default_value = "d", value_parser = ["d", "dinf", "dl"])]
        metric: String,
    },
    /// Contraction lower bound of a geodesic.
    Contract {
        #[command(flatten)]
        shared: Shared,
        /// Geodesic: {"from": P, "to": P, "kind": "segment"|"ray"|"line"}.
        #[arg(long)]
        geodesic: String,
    },
    /// Smallest power skewering a pair of curtains.
    Skewer {
        #[command(flatten)]
        shared: Shared,
        /// Isometry description (JSON).
        #[arg(long)]
        iso: String,
        #[arg(long = "h")]
        h: String,
        #[arg(long = "k")]
        k: String,
        #[arg(long, default_value_t = 8)]
        m_max: usize,
    },
    /// Boundary probes: angle, limit-set, separates, crossed-chain.
    Boundary {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, value_parser = ["angle", "limit-set", "separates", "crossed-chain"])]
        op: String,
        /// Primary ray: {"from": P, "to": P}.
        #[arg(long)]
        ray: String,
        /// Second ray for `angle`.
        #[arg(long)]
        ray2: Option<String>,
        /// Curtain for `limit-set` / `separates`.
        #[arg(long)]
        curtain: Option<String>,
        /// Target chain length for `crossed-chain`.
        #[arg(long, default_value_t = 5)]
        target: usize,
        #[arg(long, default_value_t = 300.0)]
        t_max: f64,
    },
    /// Renders a scene file to SVG.
    Render {
        #[command(flatten)]
        shared: Shared,
        /// Scene file: JSON list of {"geodesic": ...} / {"curtain": ...} /
        /// {"points": [...]} objects.
        #[arg(long)]
        objects: PathBuf,
    },
    /// Runs a registered property suite.
    Suite {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        name: String,
    },
    /// Lists the registered suites.
    Suites,
}

fn read_space(path: &PathBuf) -> Result<Space, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ValidationError(e.to_string()))?;
    cli::parse_space_descriptor(&text)
}

fn emit(shared: &Shared, text: &str) -> Result<(), Error> {
    match &shared.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::ValidationError(e.to_string()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn json_arg(text: &str) -> Result<serde_json::Value, Error> {
    serde_json::from_str(text).map_err(|e| Error::ParseError {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Dist { shared, from, to } => {
            let space = read_space(&shared.space)?;
            let x = cli::parse_point(&space, &json_arg(&from)?)?;
            let y = cli::parse_point(&space, &json_arg(&to)?)?;
            let d = spaces::distance(&space, &x, &y)?;
            let rep = metrics::estimate_dl(&space, &x, &y, shared.level, shared.budget)?;
            let out = serde_json::json!({
                "d": d,
                "d_inf": rep.d_inf,
                "level": shared.level,
                "lower": rep.lower,
                "upper": rep.upper,
                "witness_len": rep.witness_chain.len(),
                "budget_spent": rep.budget_spent,
                "seed": shared.seed,
            });
            let text = if shared.format == "csv" {
                format!(
                    "d,d_inf,level,lower,upper,witness_len,budget_spent,seed\n{},{},{},{},{},{},{},{}",
                    d, rep.d_inf, shared.level, rep.lower, rep.upper,
                    rep.witness_chain.len(), rep.budget_spent, shared.seed
                )
            } else {
                out.to_string()
            };
            emit(&shared, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Chain { shared, from, to } => {
            let space = read_space(&shared.space)?;
            let x = cli::parse_point(&space, &json_arg(&from)?)?;
            let y = cli::parse_point(&space, &json_arg(&to)?)?;
            let chain = curtain_kit::curtains::dual_chain(&space, &x, &y)?;
            let rs: Vec<f64> = chain.curtains.iter().map(|h| h.r).collect();
            let text = if shared.format == "csv" {
                let mut t = String::from("index,r\n");
                for (i, r) in rs.iter().enumerate() {
                    t.push_str(&format!("{i},{r}\n"));
                }
                t
            } else {
                serde_json::json!({
                    "count": chain.len(),
                    "d_inf": chain.len() + 1,
                    "poles": rs,
                })
                .to_string()
            };
            emit(&shared, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Separate { shared, h, k } => {
            let space = read_space(&shared.space)?;
            let hc = cli::parse_curtain(&space, &json_arg(&h)?)?;
            let kc = cli::parse_curtain(&space, &json_arg(&k)?)?;
            let verdict =
                curtain_kit::curtains::is_l_separated(&space, &hc, &kc, shared.level, shared.budget)?;
            let out = match verdict {
                curtain_kit::curtains::SeparationVerdict::Separated(c) => serde_json::json!({
                    "verdict": "separated",
                    "level": shared.level,
                    "certificate": {"level": c.level, "method": c.method, "gap": c.gap},
                }),
                curtain_kit::curtains::SeparationVerdict::NotSeparated(bridge) => {
                    serde_json::json!({
                        "verdict": "not-separated",
                        "level": shared.level,
                        "bridge_len": bridge.len(),
                        "bridge_poles": bridge.curtains.iter().map(|b| b.r).collect::<Vec<_>>(),
                    })
                }
                curtain_kit::curtains::SeparationVerdict::Unknown { budget_spent } => {
                    serde_json::json!({
                        "verdict": "unknown",
                        "level": shared.level,
                        "budget_spent": budget_spent,
                    })
                }
            };
            emit(&shared, &out.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Delta {
            shared,
            count,
            scale,
            metric,
        } => {
            let space = read_space(&shared.space)?;
            let mut rng = ChaCha8Rng::seed_from_u64(shared.seed);
            let points: Vec<_> = (0..count)
                .map(|_| sample::random_point(&space, &mut rng, scale))
                .collect();
            let choice = match metric.as_str() {
                "d" => MetricChoice::Ambient,
                "dinf" => MetricChoice::Ceiling,
                _ => MetricChoice::Level {
                    level: shared.level,
                    budget: shared.budget,
                },
            };
            let rep = hyperbolicity::four_point_delta(&space, &points, &choice)?;
            let out = serde_json::json!({
                "delta_hat": rep.delta_hat,
                "sample_size": rep.sample_size,
                "tuples": rep.tuples,
                "metric": metric,
                "level": rep.level,
                "seed": shared.seed,
            });
            emit(&shared, &out.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Contract { shared, geodesic } => {
            let space = read_space(&shared.space)?;
            let g = cli::parse_geodesic(&space, &json_arg(&geodesic)?)?;
            let cert = rankone::contraction_lower_bound(&space, &g, shared.budget)?;
            let out = match &cert {
                rankone::ContractionCertificate::LowerBoundWitness {
                    center,
                    radius,
                    projected_diameter,
                } => serde_json::json!({
                    "kind": "lower-bound-witness",
                    "center": cli::point_to_json(&space, center),
                    "radius": radius,
                    "projected_diameter": projected_diameter,
                    "seed": shared.seed,
                    "budget": shared.budget,
                }),
                rankone::ContractionCertificate::UpperBoundFromChain {
                    level,
                    spacing,
                    constant,
                } => serde_json::json!({
                    "kind": "upper-bound-from-chain",
                    "level": level, "spacing": spacing, "constant": constant,
                }),
            };
            emit(&shared, &out.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Skewer {
            shared,
            iso,
            h,
            k,
            m_max,
        } => {
            let space = read_space(&shared.space)?;
            let isometry = cli::parse_isometry(&space, &json_arg(&iso)?)?;
            let hc = cli::parse_curtain(&space, &json_arg(&h)?)?;
            let kc = cli::parse_curtain(&space, &json_arg(&k)?)?;
            let m = rankone::skewer_check(&space, &isometry, &hc, &kc, m_max)?;
            emit(&shared, &serde_json::json!({ "m": m }).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Boundary {
            shared,
            op,
            ray,
            ray2,
            curtain,
            target,
            t_max,
        } => {
            let space = read_space(&shared.space)?;
            let parse_ray = |text: &str| -> Result<BoundaryRay, Error> {
                let v = json_arg(text)?;
                let spec: cli::descriptor::GeodesicSpec =
                    serde_json::from_value(v).map_err(|e| Error::ValidationError(e.to_string()))?;
                let from = cli::parse_point(&space, &spec.from)?;
                let to = cli::parse_point(&space, &spec.to)?;
                BoundaryRay::new(&space, &from, &to)
            };
            let r1 = parse_ray(&ray)?;
            let out = match op.as_str() {
                "angle" => {
                    let r2 = parse_ray(&ray2.ok_or_else(|| {
                        Error::ValidationError("angle needs --ray2".into())
                    })?)?;
                    let a = curtain_kit::boundary::tits_angle_estimate(&space, &r1, &r2, t_max)?;
                    serde_json::json!({"angle": a, "t_max": t_max, "truncation": r1.truncation})
                }
                "limit-set" => {
                    let hc = cli::parse_curtain(
                        &space,
                        &json_arg(&curtain.ok_or_else(|| {
                            Error::ValidationError("limit-set needs --curtain".into())
                        })?)?,
                    )?;
                    let member =
                        curtain_kit::boundary::limit_set_membership(&space, &hc, &r1, shared.budget)?;
                    serde_json::json!({"member": member, "truncation": r1.truncation, "grid": 33})
                }
                "separates" => {
                    let hc = cli::parse_curtain(
                        &space,
                        &json_arg(&curtain.ok_or_else(|| {
                            Error::ValidationError("separates needs --curtain".into())
                        })?)?,
                    )?;
                    let sep = curtain_kit::boundary::separates_at_infinity(&space, &hc, &r1)?;
                    serde_json::json!({"separates": sep, "truncation": r1.truncation})
                }
                _ => {
                    let chain = curtain_kit::boundary::find_crossed_l_chain(
                        &space,
                        &r1,
                        shared.level,
                        target,
                        shared.budget,
                    )?;
                    serde_json::json!({
                        "found": chain.is_some(),
                        "len": chain.as_ref().map(|c| c.len()),
                        "poles": chain.map(|c| c.curtains.iter().map(|h| h.r).collect::<Vec<_>>()),
                        "truncation": r1.truncation,
                    })
                }
            };
            emit(&shared, &out.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { shared, objects } => {
            let space = read_space(&shared.space)?;
            let text = std::fs::read_to_string(&objects)
                .map_err(|e| Error::ValidationError(e.to_string()))?;
            let values: Vec<serde_json::Value> =
                serde_json::from_str(&text).map_err(|e| Error::ParseError {
                    line: e.line(),
                    column: e.column(),
                    msg: e.to_string(),
                })?;
            let mut scene = Vec::new();
            for v in &values {
                let obj = v
                    .as_object()
                    .ok_or_else(|| Error::ValidationError("scene entries are objects".into()))?;
                if let Some(gv) = obj.get("geodesic") {
                    scene.push(SceneObject::Geodesic(cli::parse_geodesic(&space, gv)?));
                } else if let Some(cv) = obj.get("curtain") {
                    scene.push(SceneObject::Curtain(cli::parse_curtain(&space, cv)?));
                } else if let Some(pv) = obj.get("points") {
                    let arr = pv
                        .as_array()
                        .ok_or_else(|| Error::ValidationError("points is an array".into()))?;
                    let pts = arr
                        .iter()
                        .map(|p| cli::parse_point(&space, p))
                        .collect::<Result<Vec<_>, _>>()?;
                    scene.push(SceneObject::Points(pts));
                } else if let Some(chv) = obj.get("chain") {
                    let arr = chv
                        .as_array()
                        .ok_or_else(|| Error::ValidationError("chain is an array".into()))?;
                    let curtains = arr
                        .iter()
                        .map(|c| cli::parse_curtain(&space, c))
                        .collect::<Result<Vec<_>, _>>()?;
                    scene.push(SceneObject::Chain(curtain_kit::curtains::Chain {
                        curtains,
                        status: curtain_kit::curtains::ChainStatus::Unverified,
                        level: None,
                    }));
                } else {
                    return Err(Error::ValidationError(format!("unknown scene entry: {v}")));
                }
            }
            let svg = cli::render_scene(&space, &scene)?;
            emit(&shared, &svg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite { shared, name } => {
            let space = read_space(&shared.space)?;
            let started = std::time::Instant::now();
            let report = cli::run_suite(&name, &space, shared.seed, shared.budget)?;
            // Runtime goes to stderr so reports stay byte-identical.
            eprintln!(
                "suite {} finished in {:.2?}: {} cases, {} violations",
                report.suite,
                started.elapsed(),
                report.cases,
                report.violations.len()
            );
            let text = if shared.format == "csv" {
                report.to_csv()
            } else {
                report.to_json()
            };
            emit(&shared, &text)?;
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Suites => {
            for name in cli::suite_names() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ParseError { .. } | Error::ValidationError(_) | Error::UnknownSuite(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
