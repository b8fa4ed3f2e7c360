use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lorlen::boundary::{future_boundary_classes, Horizon};
use lorlen::causal::{check_axioms, AxiomOptions, Dump, StorageHint};
use lorlen::comparison::{certify_curvature_below, CertOptions, TriangleSampler};
use lorlen::geodesy::maximizer;
use lorlen::metric::MetricSpace;
use lorlen::product::{build_causal_structure, Mode, ProductEvent, ProductStructure, SampleSet, SprinkleConfig};
use lorlen::split::{self, line_fiber_events, pipeline_find_line, Expect, LineOptions, RunConfig, LINE_STEP};
use lorlen::{Error, RelationKind, Result, Status};

#[derive(Parser)]
#[command(name = "lorlen", version, about = "Synthetic Lorentzian geometry on finite samples")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a product space and write its causal structure.
    Sprinkle {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time separation of two events of a product space.
    Tau {
        /// Two events, e.g. "x=0.2,s=0;y=0.7,t=5".
        #[arg(long)]
        at: String,
        /// Base space as name:params, e.g. circle:1 or torus:1,1.
        #[arg(long, default_value = "circle:1", conflicts_with = "config")]
        sigma: String,
        /// Take the base space from a sprinkle config instead.
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Check the causal-structure axioms of a dump.
    Axioms {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        expect: ExpectArg,
    },
    /// Maximizer between two events, or a limit line from a window family.
    ///
    /// Without a family the verdict is whether the maximizer realizes τ.
    Line {
        #[arg(short, long)]
        config: PathBuf,
        /// Start event "x,t".
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// End event "x,t".
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Window half-lengths, e.g. 2,4,8; the family is centred between the endpoints.
        #[arg(long, value_delimiter = ',')]
        family: Vec<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        expect: ExpectArg,
    },
    /// Certification runs.
    Certify {
        #[command(subcommand)]
        what: Certify,
    },
    /// Future boundary classes of a dump.
    Boundary {
        #[arg(short, long)]
        input: PathBuf,
        /// Bulk margin: "auto" or a number.
        #[arg(long, default_value = "auto")]
        margin: String,
        /// Top slab width for dumps without a product space.
        #[arg(long)]
        top_width: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        expect: ExpectArg,
    },
    /// Run the splitting pipeline.
    Split {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract figure curves from a split report as CSV.
    Plotdata {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Certify {
    /// Timelike curvature bounded below by zero, by triangle comparison.
    Curvature {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long, default_value_t = 64)]
        triangles: usize,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Sampler::Auto)]
        sampler: Sampler,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        expect: ExpectArg,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Sampler {
    Auto,
    Patch,
    Straddle,
}

#[derive(Args)]
struct ExpectArg {
    /// Expected verdict; `fail` marks a negative control (exit code 2 when it fails).
    #[arg(long, value_enum, default_value_t = ExpectKind::Pass)]
    expect: ExpectKind,
}

#[derive(Copy, Clone, ValueEnum)]
enum ExpectKind {
    Pass,
    Fail,
}

impl ExpectArg {
    fn code(&self, status: Status) -> u8 {
        let e = match self.expect {
            ExpectKind::Pass => Expect::Pass,
            ExpectKind::Fail => Expect::Fail,
        };
        e.exit_code(status) as u8
    }
}

/// A dump written by `sprinkle`: the structure plus the config that made it.
#[derive(Serialize, Deserialize)]
struct ProductDump {
    #[serde(flatten)]
    dump: Dump,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    space: Option<SprinkleConfig>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_dump(path: &Path) -> Result<ProductDump> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Rebuilds the product structure of a dump that carries its config.
fn product_of(pd: &ProductDump) -> Result<Option<ProductStructure>> {
    let Some(cfg) = &pd.space else { return Ok(None) };
    let ps = cfg.space()?;
    let events = pd
        .dump
        .events
        .iter()
        .map(|e| match (&e.base, e.t) {
            (Some(b), Some(t)) => Ok(ProductEvent::new(ps.sigma().parse_point(b)?, t)),
            _ => Err(Error::input(format!("event {} has no base point or time", e.id))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(build_causal_structure(&ps, SampleSet::from_events(events), cfg.step_radius)?))
}

fn parse_event(ps: &lorlen::ProductSpace, s: &str) -> Result<ProductEvent> {
    let (x, t) = s.rsplit_once(',').ok_or_else(|| Error::input(format!("event must be \"x,t\": {s:?}")))?;
    let t = t.trim().parse::<f64>().map_err(|_| Error::input(format!("bad time in {s:?}")))?;
    Ok(ProductEvent::new(ps.sigma().parse_point(x)?, t))
}

/// Parses "x=0.2,s=0;y=0.7,t=5" into two (point label, time) pairs.
fn parse_at(s: &str) -> Result<[(String, f64); 2]> {
    let value = |kv: &str| kv.split_once('=').map_or(kv, |(_, v)| v).trim().to_string();
    let parts: Vec<&str> = s.split(';').collect();
    let [a, b] = parts.as_slice() else {
        return Err(Error::input(format!("--at needs two events separated by ';': {s:?}")));
    };
    let one = |e: &str| -> Result<(String, f64)> {
        let (x, t) = e.rsplit_once(',').ok_or_else(|| Error::input(format!("event must be \"x=..,t=..\": {e:?}")))?;
        let t = value(t).parse::<f64>().map_err(|_| Error::input(format!("bad time in {e:?}")))?;
        Ok((value(x), t))
    };
    Ok([one(a)?, one(b)?])
}

fn builtin(spec: &str) -> Result<MetricSpace> {
    let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
    let params = params
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::input(format!("bad parameter {p:?}"))))
        .collect::<Result<Vec<f64>>>()?;
    MetricSpace::builtin(name, &params)
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Sprinkle { config, output } => {
            let cfg = SprinkleConfig::read(&config)?;
            let (ps, samples) = cfg.sample()?;
            let st = build_causal_structure(&ps, samples, cfg.step_radius)?;
            let pd = ProductDump { dump: Dump::from_structure(st.cs()), space: Some(cfg) };
            write_json(Some(&output), &pd)?;
            eprintln!("{} events, {} causal pairs", st.len(), pd.dump.edges.len());
            Ok(0)
        }
        Cmd::Tau { at, sigma, config } => {
            let sigma = match config {
                Some(c) => MetricSpace::from_spec(SprinkleConfig::read(c)?.sigma)?,
                None => builtin(&sigma)?,
            };
            let [(x, s), (y, t)] = parse_at(&at)?;
            let (px, py) = (sigma.parse_point(&x)?, sigma.parse_point(&y)?);
            let d = sigma.dist(&px, &py);
            let r = lorlen::product::relate(t - s, d);
            let out = serde_json::json!({"tau": r.tau, "chron": r.chron, "causal": r.causal, "d": d});
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
        Cmd::Axioms { input, tol, output, expect } => {
            let pd = read_dump(&input)?;
            let cs = match product_of(&pd)? {
                Some(st) => st.cs().clone(),
                None => pd.dump.into_structure(StorageHint::Auto)?,
            };
            let r = check_axioms(&cs, &AxiomOptions::with_tol(tol));
            eprintln!(
                "axioms {:?}: {} pairs and {} triples checked, {} violations",
                r.status,
                r.pairs_checked,
                r.triples_checked,
                r.counts.values().sum::<u64>()
            );
            write_json(output.as_deref(), &r)?;
            Ok(expect.code(r.status))
        }
        Cmd::Line { config, from, to, family, tol, output, expect } => {
            let cfg = SprinkleConfig::read(&config)?;
            let (ps, mut samples) = cfg.sample()?;
            let (a, b) = (parse_event(&ps, &from)?, parse_event(&ps, &to)?);
            let center = 0.5 * (a.t + b.t);
            let mut extra = vec![a, b];
            if !family.is_empty() {
                if a.x != b.x {
                    return Err(Error::input("a window family needs both endpoints on one fiber"));
                }
                let fiber_step = matches!(cfg.mode, Mode::Poisson { .. }).then_some(LINE_STEP);
                extra.extend(line_fiber_events(&a.x, center, &family, fiber_step));
            }
            samples.extend(extra.into_iter().filter(|e| ps.contains(e)));
            let st = build_causal_structure(&ps, samples, cfg.step_radius)?;
            let (chain, status) = if family.is_empty() {
                let ids = st.ids_of(&[a, b])?;
                let m = maximizer(st.cs(), ids[0], ids[1], RelationKind::Chron)?;
                let tau = st.cs().tau(ids[0], ids[1]);
                let realizes = (tau - m.value).abs() <= tol * tau.max(1.0);
                eprintln!("maximizer value {} against τ {tau} over {} events, ties {}", m.value, m.chain.len(), m.tie_count);
                (m.chain, Status::from_pass(realizes))
            } else {
                let opts = LineOptions { center: Some(center), tol, ..LineOptions::default() };
                let r = pipeline_find_line(&st, &a.x, &family, &opts)?;
                for v in &r.values {
                    eprintln!("n = {}: value {}", v.n, v.value);
                }
                eprintln!(
                    "limit chain of {} events, dispersion {}, slope {:.4}, is_line {}",
                    r.chain().len(),
                    r.limit.max_dispersion,
                    r.slope,
                    r.check.is_line
                );
                let status = Status::from_pass(r.passed);
                (r.limit.chain, status)
            };
            write_json(output.as_deref(), &chain)?;
            Ok(expect.code(status))
        }
        Cmd::Certify { what: Certify::Curvature { config, triangles, grid, tol, seed, sampler, output, expect } } => {
            let ps = SprinkleConfig::read(&config)?.space()?;
            let sampler = match sampler {
                Sampler::Auto => TriangleSampler::Auto,
                Sampler::Patch => TriangleSampler::Patch { extent: None },
                Sampler::Straddle => TriangleSampler::Straddle,
            };
            let opts = CertOptions { triangles, grid, tol, seed, sampler, ..CertOptions::default() };
            let r = certify_curvature_below(&ps, &opts)?;
            eprintln!(
                "curvature {:?}: {} pairs over {} triangles, {} violations, worst slack {:.3e}",
                r.status, r.pairs, r.triangles, r.violation_count, r.worst_slack
            );
            write_json(output.as_deref(), &r)?;
            Ok(expect.code(r.status))
        }
        Cmd::Boundary { input, margin, top_width, output, expect } => {
            let pd = read_dump(&input)?;
            let margin = match margin.as_str() {
                "auto" => None,
                m => Some(m.parse::<f64>().map_err(|_| Error::input(format!("margin must be auto or a number: {m:?}")))?),
            };
            let classes = match product_of(&pd)? {
                Some(st) => future_boundary_classes(st.cs(), &Horizon::for_product(&st, margin)?)?,
                None => {
                    let margin = margin.ok_or_else(|| Error::input("--margin auto needs a dump written by sprinkle; pass a number"))?;
                    let cs = pd.dump.into_structure(StorageHint::Auto)?;
                    let times: Vec<f64> = cs.events().filter_map(|e| cs.time(e)).collect();
                    let (lo, hi) = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
                    let top = top_width.unwrap_or(0.1 * (hi - lo));
                    future_boundary_classes(&cs, &Horizon::by_time(&cs, hi, margin, top)?)?
                }
            };
            eprintln!("{} future boundary classes, bulk {}, top {}", classes.count, classes.bulk_size, classes.top_size);
            write_json(output.as_deref(), &classes)?;
            Ok(expect.code(Status::from_pass(classes.count == 1)))
        }
        Cmd::Split { config, output } => {
            let cfg = RunConfig::read(&config)?;
            let r = split::run_split(&cfg)?;
            for f in &r.failures {
                eprintln!("failed: {f}");
            }
            eprintln!("split {:?} (expected {:?})", r.status, r.expect);
            write_json(output.as_deref(), &r)?;
            Ok(r.exit_code as u8)
        }
        Cmd::Plotdata { input, output } => {
            let report: split::SplitReport = serde_json::from_str(&std::fs::read_to_string(&input)?)?;
            let csv = split::plotdata(&report)?;
            match output {
                Some(p) => std::fs::write(p, csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
    }
}
