use clap::{Parser, Subcommand, ValueEnum};
use coverage_kit::cli_io::{
    parse_scenario, render_capture_raster, render_coverage_map, render_power_diagram, render_regions, sha256_hex, sweep_csv,
    trace_csv, Model, RunManifest, ScenarioFile,
};
use coverage_kit::dynamic_coverage::{DynamicCoverage, UpdateReport};
use coverage_kit::geometry::Point2;
use coverage_kit::optimizer::{
    estimate_area, exhaustive_search_with_budget, nelder_mead_area, post_process, random_hill_climb,
    required_samples, uniform_power_sweep, Bounds, OptError, OptResult, RhcParams, SamplingPlan, DEFAULT_BUDGET,
};
use coverage_kit::power_diagram::SiteId;
use coverage_kit::protocol_coverage::{compute_coverage_map, coverage_area, ProtocolTransmitter};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "coverage-kit", version, about = "Interference-limited coverage maps")]
struct Cli {
    /// Where to write the run manifest. Defaults to a sibling of --out, or
    /// stderr when there is no --out.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Static protocol-model coverage map.
    BuildMap {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Bulk-load the scenario, then apply an insert/delete script.
    Dynamic {
        scenario: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Fraction of the window meeting the SINR threshold.
    EstimateArea {
        scenario: PathBuf,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search transmit powers for maximum estimated coverage.
    Optimize {
        method: Method,
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Power levels per transmitter (exhaustive).
        #[arg(long, default_value_t = 5)]
        levels: usize,
        /// Random restarts (nm).
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Largest number of level vectors exhaustive search may evaluate.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Try switching off the weakest transmitters afterwards.
        #[arg(long)]
        post_process: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Coverage with the same power on every transmitter.
    SweepPower {
        scenario: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        /// Defaults to the largest upper bound in the scenario.
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, default_value_t = 20)]
        levels: usize,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a scenario as SVG.
    Render {
        scenario: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        kind: Option<RenderKind>,
        /// Raster cells per side for capture maps.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Samples needed for a (1 ± ε) estimate with probability 1 − δ.
    SampleSize {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        c_lower: f64,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Rhc,
    Nm,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RenderKind {
    Diagram,
    Coverage,
    Capture,
}

#[derive(clap::Args, Serialize)]
struct SamplingArgs {
    /// Grid cells per side.
    #[arg(long, conflicts_with = "samples")]
    grid: Option<usize>,
    /// Uniform random samples, seeded by --sample-seed.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
}

impl SamplingArgs {
    fn plan(&self, sc: &ScenarioFile) -> SamplingPlan {
        match (self.grid, self.samples) {
            (Some(n), _) => SamplingPlan::grid(n),
            (None, Some(count)) => SamplingPlan::Random {
                count,
                seed: self.sample_seed,
            },
            (None, None) => sc.sampling.unwrap_or(SamplingPlan::grid(100)),
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
enum ScriptOp {
    Insert {
        x: f64,
        y: f64,
        tx_radius: f64,
        int_radius: f64,
    },
    Delete {
        site: usize,
    },
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<OptError> for Failure {
    fn from(e: OptError) -> Self {
        match e {
            OptError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    if let Some(p) = path {
        write(p, &(serde_json::to_string_pretty(value).map_err(input)? + "\n"))?;
    }
    Ok(())
}

fn load(path: &Path) -> Result<(Vec<u8>, ScenarioFile), Failure> {
    let bytes = read(path)?;
    let sc = parse_scenario(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((bytes, sc))
}

fn bounds_of(sc: &ScenarioFile) -> Result<Bounds, Failure> {
    sc.bounds
        .clone()
        .ok_or_else(|| Failure::Input("scenario has no power bounds".into()))
}

/// Appends post-processing evaluations to the search trace, keeping the
/// better of the two results.
fn merge(mut first: OptResult, second: OptResult) -> OptResult {
    let offset = first.evaluations;
    first.trace.extend(second.trace.iter().map(|&(k, a)| (k + offset, a)));
    first.evaluations += second.evaluations;
    if second.best_area > first.best_area {
        first.best_area = second.best_area;
        first.total_power = second.total_power;
        first.best_power = second.best_power;
    }
    first
}

struct Run {
    manifest: RunManifest,
    out: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<Run, Failure> {
    match &cli.command {
        Command::BuildMap { scenario, out, svg } => {
            let (bytes, sc) = load(scenario)?;
            let map = compute_coverage_map(&sc.protocol().map_err(input)?, sc.window).map_err(input)?;
            let area = coverage_area(&map);
            let hidden = map
                .diagram
                .as_ref()
                .map_or(0, |pd| pd.cells.iter().filter(|c| c.is_none()).count());
            write_json(
                out.as_deref(),
                &json!({ "coverage_area": area, "window_area": sc.window.area(), "hidden_sites": hidden, "map": map }),
            )?;
            if let Some(p) = svg {
                write(p, &render_coverage_map(&map))?;
            }
            println!(
                "coverage area {area} ({:.4} of window), {} transmitters, {hidden} hidden",
                area / sc.window.area(),
                map.transmitters.len()
            );
            Ok(Run {
                manifest: RunManifest::new("build-map", Some(&bytes), None, json!({ "svg": svg.is_some() })),
                out: out.clone(),
            })
        }
        Command::Dynamic {
            scenario,
            script,
            seed,
            out,
            svg,
        } => {
            let (bytes, sc) = load(scenario)?;
            let script_bytes = read(script)?;
            let ops: Vec<ScriptOp> = serde_json::from_slice(&script_bytes)
                .map_err(|e| Failure::Input(format!("{}: {e}", script.display())))?;
            let seed = seed.or(sc.seed).unwrap_or(0);
            let mut dc = DynamicCoverage::new(sc.window, seed).map_err(input)?;
            let initial = dc.bulk_insert(&sc.protocol().map_err(input)?).map_err(input)?;
            let mut reports: Vec<UpdateReport> = Vec::with_capacity(ops.len());
            for (k, op) in ops.iter().enumerate() {
                let r = match *op {
                    ScriptOp::Insert {
                        x,
                        y,
                        tx_radius,
                        int_radius,
                    } => dc.insert_transmitter(ProtocolTransmitter::new(Point2::new(x, y), tx_radius, int_radius)),
                    ScriptOp::Delete { site } => dc.delete_transmitter(SiteId(site)),
                };
                reports.push(r.map_err(|e| Failure::Input(format!("script step {k}: {e}")))?);
            }
            let area = dc.coverage_area();
            write_json(
                out.as_deref(),
                &json!({ "initial_sites": initial, "reports": reports, "coverage_area": area, "regions": dc.regions() }),
            )?;
            if let Some(p) = svg {
                let live: Vec<SiteId> = dc.site_ids();
                let cells: Vec<_> = live.iter().filter_map(|&s| dc.cell(s)).collect();
                let doc = render_regions(
                    sc.window,
                    &dc.transmitters(),
                    dc.regions().values().flatten(),
                    cells.iter(),
                );
                write(p, &doc)?;
            }
            let changes: usize = reports.iter().map(|r| r.structural_change).sum();
            println!(
                "{} updates applied, {} live sites, coverage area {area}, {changes} face changes",
                reports.len(),
                dc.site_ids().len()
            );
            let params = json!({ "script_sha256": sha256_hex(&script_bytes) });
            Ok(Run {
                manifest: RunManifest::new("dynamic", Some(&bytes), Some(seed), params),
                out: out.clone(),
            })
        }
        Command::EstimateArea { scenario, sampling, out } => {
            let (bytes, sc) = load(scenario)?;
            let s = sc.sinr().map_err(input)?;
            let plan = sampling.plan(&sc);
            plan.validate()?;
            let area = estimate_area(&s, &s.powers, &plan);
            write_json(out.as_deref(), &json!({ "area": area, "plan": plan, "powers": s.powers }))?;
            println!("estimated coverage {area}");
            Ok(Run {
                manifest: RunManifest::new("estimate-area", Some(&bytes), None, json!({ "plan": plan })),
                out: out.clone(),
            })
        }
        Command::Optimize {
            method,
            scenario,
            seed,
            sampling,
            levels,
            restarts,
            budget,
            max_iterations,
            post_process: post,
            out,
            trace,
        } => {
            let (bytes, sc) = load(scenario)?;
            let s = sc.sinr().map_err(input)?;
            let b = bounds_of(&sc)?;
            let plan = sampling.plan(&sc);
            let seed = seed.or(sc.seed).unwrap_or(0);
            let mut params = RhcParams::for_alpha(s.alpha);
            if let Some(m) = max_iterations {
                params.max_iterations = *m;
            }
            let mut result = match method {
                Method::Rhc => random_hill_climb(&s, &b, &params, &plan, seed)?,
                Method::Nm => nelder_mead_area(&s, &b, &plan, *restarts, seed)?,
                Method::Exhaustive => exhaustive_search_with_budget(&s, &b, *levels, &plan, *budget)?,
            };
            if *post {
                let pp = post_process(&s, &result.best_power, &b.p_min, &plan)?;
                result = merge(result, pp);
            }
            write_json(out.as_deref(), &result)?;
            if let Some(p) = trace {
                write(p, &trace_csv(&result))?;
            }
            println!(
                "best coverage {} at total power {} after {} evaluations",
                result.best_area, result.total_power, result.evaluations
            );
            let params = json!({
                "method": method, "plan": plan, "levels": levels, "restarts": restarts,
                "budget": budget, "rhc": params, "post_process": post,
            });
            Ok(Run {
                manifest: RunManifest::new("optimize", Some(&bytes), Some(seed), params),
                out: out.clone(),
            })
        }
        Command::SweepPower {
            scenario,
            lo,
            hi,
            levels,
            sampling,
            csv,
            out,
        } => {
            let (bytes, sc) = load(scenario)?;
            let s = sc.sinr().map_err(input)?;
            let hi = match hi {
                Some(h) => *h,
                None => bounds_of(&sc)?.p_max.values.iter().cloned().fold(0.0, f64::max),
            };
            let plan = sampling.plan(&sc);
            let rows = uniform_power_sweep(&s, *lo, hi, *levels, &plan)?;
            write_json(out.as_deref(), &rows)?;
            if let Some(p) = csv {
                write(p, &sweep_csv(&rows))?;
            }
            for (p, a) in &rows {
                println!("{p}\t{a}");
            }
            Ok(Run {
                manifest: RunManifest::new(
                    "sweep-power",
                    Some(&bytes),
                    None,
                    json!({ "lo": lo, "hi": hi, "levels": levels, "plan": plan }),
                ),
                out: out.clone(),
            })
        }
        Command::Render {
            scenario,
            svg,
            kind,
            resolution,
        } => {
            let (bytes, sc) = load(scenario)?;
            let kind = kind.unwrap_or(match sc.model {
                Model::Protocol => RenderKind::Coverage,
                Model::Sinr => RenderKind::Capture,
            });
            let doc = match kind {
                RenderKind::Capture => {
                    if *resolution == 0 {
                        return Err(Failure::Input("resolution must be positive".into()));
                    }
                    render_capture_raster(&sc.sinr().map_err(input)?, *resolution)
                }
                RenderKind::Coverage => {
                    render_coverage_map(&compute_coverage_map(&sc.protocol().map_err(input)?, sc.window).map_err(input)?)
                }
                RenderKind::Diagram => {
                    let map = compute_coverage_map(&sc.protocol().map_err(input)?, sc.window).map_err(input)?;
                    let pd = map
                        .diagram
                        .ok_or_else(|| Failure::Input("no transmitters to draw".into()))?;
                    render_power_diagram(&pd)
                }
            };
            write(svg, &doc)?;
            println!("wrote {}", svg.display());
            Ok(Run {
                manifest: RunManifest::new("render", Some(&bytes), None, json!({ "kind": kind, "resolution": resolution })),
                out: None,
            })
        }
        Command::SampleSize {
            epsilon,
            delta,
            c_lower,
        } => {
            let ok = |v: f64| v > 0.0 && v < 1.0;
            if !(ok(*epsilon) && ok(*delta) && *c_lower > 0.0 && *c_lower <= 1.0) {
                return Err(Failure::Input("need 0 < epsilon, delta < 1 and 0 < c-lower <= 1".into()));
            }
            println!("{}", required_samples(*epsilon, *delta, *c_lower));
            Ok(Run {
                manifest: RunManifest::new(
                    "sample-size",
                    None,
                    None,
                    json!({ "epsilon": epsilon, "delta": delta, "c_lower": c_lower }),
                ),
                out: None,
            })
        }
    }
}

fn manifest_path(cli: &Cli, out: Option<&Path>) -> Option<PathBuf> {
    cli.manifest.clone().or_else(|| {
        out.map(|o| {
            let stem = o.file_name().and_then(|n| n.to_str()).unwrap_or("result");
            let stem = stem.strip_suffix(".json").unwrap_or(stem);
            let stem = stem.strip_suffix(".result").unwrap_or(stem);
            o.with_file_name(format!("{stem}.manifest.json"))
        })
    })
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("COVERAGE_KIT_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Input(format!("COVERAGE_KIT_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(input)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = configure_threads().and_then(|_| run(&cli)).and_then(|mut r| {
        r.manifest.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        let text = serde_json::to_string_pretty(&r.manifest).map_err(input)?;
        match manifest_path(&cli, r.out.as_deref()) {
            Some(p) => write(&p, &(text + "\n")),
            None => {
                eprintln!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
