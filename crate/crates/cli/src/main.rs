mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tropibayes::linalg::format_rat;
use tropibayes::models::{self, ModelJson, Method};
use tropibayes::sampler::{self, Sample, SampleBatch};
use tropibayes::{ModelSpec, SectorTable};

use output::{render, write_batch, Format};

#[derive(Parser)]
#[command(name = "tropibayes", version, about = "Tropical sector integration and sampling on positive toric varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Homogeneity, degrees, Newton polytope dimensions and convergence.
    Check {
        #[command(flatten)]
        io: Io,
    },
    /// Exact tropical integral and sector count.
    Trop {
        #[command(flatten)]
        io: Io,
        /// Include the per-sector table.
        #[arg(long)]
        sector_report: bool,
    },
    /// Estimate ∫ f/g Ω, or ∫ L_u f/g Ω when --u is given.
    Integrate {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        run: Run,
    },
    /// Marginal likelihood I_u.
    Ml {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        run: Run,
        /// Fold U!/(u_0!...u_m!) into the reported value.
        #[arg(long)]
        include_multinomial: bool,
    },
    /// Bayes factor of --model against --against for the data --u.
    Bf {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        run: Run,
        #[arg(long)]
        against: String,
    },
    /// Rejection samples from f/g (or L_u f/g) as a CSV batch.
    Sample {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        draw: Draw,
        /// Emit raw tropical draws instead of rejection samples.
        #[arg(long)]
        tropical: bool,
    },
    /// Rejection samples from the posterior L_u f/g as a CSV batch.
    Posterior {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        draw: Draw,
    },
}

#[derive(Args)]
struct Io {
    /// Model JSON file, or one of coin(m), pentagon-linear,
    /// pentagon-wachspress, pentagon-toric(c0,...,c5).
    #[arg(long)]
    model: String,
    /// Data counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    u: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mc,
    Cubature,
}

#[derive(Args)]
struct Run {
    #[arg(long, value_enum, default_value = "mc")]
    method: MethodArg,
    /// Monte Carlo sample size.
    #[arg(long = "N", default_value_t = 100_000)]
    n: usize,
    /// Gauss–Legendre nodes per axis.
    #[arg(long, default_value_t = 32)]
    nodes: usize,
    #[command(flatten)]
    par: Par,
}

#[derive(Args)]
struct Draw {
    /// Number of attempts.
    #[arg(long = "N", default_value_t = 10_000)]
    n: usize,
    #[command(flatten)]
    par: Par,
}

#[derive(Args)]
struct Par {
    /// Integer seed, or "random".
    #[arg(long, default_value = "0")]
    seed: String,
    #[arg(long, env = "TROPIBAYES_THREADS")]
    threads: Option<usize>,
}

impl Par {
    fn seed(&self) -> Result<u64> {
        if self.seed == "random" {
            Ok(rand::random())
        } else {
            self.seed.parse().map_err(|_| input(format!("invalid seed '{}'", self.seed)))
        }
    }

    fn threads(&self) -> Result<usize> {
        match self.threads {
            Some(0) => Err(input("--threads must be at least 1")),
            Some(t) => Ok(t),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }
}

impl Run {
    fn method(&self) -> Result<Method> {
        Ok(match self.method {
            MethodArg::Mc => {
                if self.n < 1 {
                    return Err(input("--N must be at least 1"));
                }
                Method::MonteCarlo { n: self.n, seed: self.par.seed()?, threads: self.par.threads()? }
            }
            MethodArg::Cubature => Method::Cubature { nodes: self.nodes },
        })
    }
}

/// Input problems that are not library errors; they map to exit code 2.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn read_model_json(name: &str) -> Result<Option<ModelJson>> {
    let path = Path::new(name);
    if !path.exists() && !name.ends_with(".json") {
        return Ok(None);
    }
    let text = fs::read_to_string(path).with_context(|| format!("cannot read model file {name}"))?;
    let j = serde_json::from_str(&text).map_err(|e| input(format!("{name}: {e}")))?;
    Ok(Some(j))
}

fn load_model(name: &str) -> Result<ModelSpec> {
    match read_model_json(name)? {
        Some(j) => ModelSpec::from_json(&j).with_context(|| format!("model {name}")),
        None => ModelSpec::builtin(name).with_context(|| format!("model {name}")),
    }
}

fn method_json(m: Method) -> Value {
    match m {
        Method::MonteCarlo { n, seed, threads } => json!({"method": "mc", "N": n, "seed": seed, "threads": threads}),
        Method::Cubature { nodes } => json!({"method": "cubature", "nodes": nodes}),
    }
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn table_for(model: &ModelSpec, u: Option<&[u32]>) -> Result<SectorTable> {
    Ok(match u {
        Some(u) => model.likelihood_table(u, None)?,
        None => model.prior_table()?,
    })
}

fn need_u(io: &Io) -> Result<&[u32]> {
    io.u.as_deref().ok_or_else(|| input("--u is required for this command"))
}

fn emit(io: &Io, v: &Value) -> Result<()> {
    let s = render(v, io.format)?;
    match &io.output {
        Some(p) => fs::write(p, s).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

/// Writes the batch to --output (or stdout) and the summary to stdout (or
/// stderr when the batch went to stdout).
fn emit_batch(io: &Io, batch: &SampleBatch, num_vars: usize, summary: &Value) -> Result<()> {
    let s = render(summary, io.format)?;
    match &io.output {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            write_batch(f, batch, num_vars)?;
            print!("{s}");
        }
        None => {
            write_batch(std::io::stdout().lock(), batch, num_vars)?;
            eprint!("{s}");
        }
    }
    Ok(())
}

fn tropical_batch(table: &SectorTable, n: usize, seed: u64, threads: usize) -> Result<SampleBatch> {
    let integrand = table.integrand();
    let toric = integrand.toric();
    let parts = sampler::run_blocks(n, seed, threads, |rng, _, count| {
        (0..count)
            .map(|_| {
                let (sector, y) = sampler::draw_tropical(table, rng);
                Sample { sector, log_x: toric.log_cox(&y), log_h: integrand.log_h(&y), accepted: true }
            })
            .collect::<Vec<_>>()
    })?;
    let (m1, m2) = table.h_bounds();
    Ok(SampleBatch {
        seed,
        samples: parts.into_iter().flatten().collect(),
        m1: format_rat(m1),
        m2: format_rat(m2),
        log_m1: tropibayes::linalg::ln_rat(m1),
        log_m2: tropibayes::linalg::ln_rat(m2),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Check { io } => {
            let (toric, coords, prior) = match read_model_json(&io.model)? {
                Some(j) => j.parts()?,
                None => {
                    let m = ModelSpec::builtin(&io.model)?;
                    (m.toric().clone(), m.coords().to_vec(), m.prior().clone())
                }
            };
            let r = models::check(&toric, &coords, &prior, io.u.as_deref())?;
            emit(&io, &serde_json::to_value(r)?)
        }
        Command::Trop { io, sector_report } => {
            let model = load_model(&io.model)?;
            let table = table_for(&model, io.u.as_deref())?;
            let (m1, m2) = table.h_bounds();
            if sector_report && io.format == Format::Csv {
                return emit(&io, &serde_json::to_value(table.report())?);
            }
            let mut v = json!({
                "trop_total": format_rat(table.trop_total()),
                "sectors": table.len(),
                "M1": format_rat(m1),
                "M2": format_rat(m2),
            });
            if sector_report {
                v["sector_report"] = serde_json::to_value(table.report())?;
            }
            emit(&io, &v)
        }
        Command::Integrate { io, run } => {
            let model = load_model(&io.model)?;
            let table = table_for(&model, io.u.as_deref())?;
            let method = run.method()?;
            let v = match method {
                Method::MonteCarlo { n, seed, threads } => {
                    serde_json::to_value(sampler::mc_estimate(&table, n, seed, threads)?)?
                }
                Method::Cubature { nodes } => serde_json::to_value(sampler::cubature_integral(&table, nodes)?)?,
            };
            emit(&io, &merge(method_json(method), v))
        }
        Command::Ml { io, run, include_multinomial } => {
            let model = load_model(&io.model)?;
            let u = need_u(&io)?;
            let method = run.method()?;
            let r = models::marginal_likelihood(&model, u, method)?;
            let mut v = serde_json::to_value(&r)?;
            v["multinomial_included"] = json!(include_multinomial);
            if include_multinomial {
                let lv = r.log_value_with_multinomial();
                v["log_value"] = json!(lv);
                v["value"] = if lv.exp().is_finite() { json!(lv.exp()) } else { Value::Null };
            }
            emit(&io, &merge(method_json(method), v))
        }
        Command::Bf { io, run, against } => {
            let m1 = load_model(&io.model)?;
            let m2 = load_model(&against)?;
            let u = need_u(&io)?;
            let method = run.method()?;
            let r = models::bayes_factor(&m1, &m2, u, method)?;
            emit(&io, &merge(method_json(method), serde_json::to_value(r)?))
        }
        Command::Sample { io, draw, tropical } => {
            let model = load_model(&io.model)?;
            let table = table_for(&model, io.u.as_deref())?;
            let (seed, threads) = (draw.par.seed()?, draw.par.threads()?);
            let batch = if tropical {
                tropical_batch(&table, draw.n, seed, threads)?
            } else {
                sampler::rejection_sample(&table, draw.n, seed, threads)?
            };
            let mut summary = serde_json::to_value(batch.summary())?;
            summary["tropical"] = json!(tropical);
            emit_batch(&io, &batch, model.toric().num_rays(), &summary)
        }
        Command::Posterior { io, draw } => {
            let model = load_model(&io.model)?;
            let u = need_u(&io)?;
            let (batch, summary) =
                models::posterior_sample(&model, u, draw.n, draw.par.seed()?, draw.par.threads()?)?;
            emit_batch(&io, &batch, model.toric().num_rays(), &serde_json::to_value(summary)?)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(t) = cause.downcast_ref::<tropibayes::Error>() {
            return if t.is_divergence() { 3 } else { 2 };
        }
    }
    if e.chain().any(|c| c.is::<InputError>() || c.is::<std::io::Error>()) {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

