use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use treedpp::dpp::{z_forest, z_tree, ConstrainedDPP};
use treedpp::io::{self, Bundle};
use treedpp::rational::{self, Rational};
use treedpp::reductions::{
    apreduce_md_to_zf, apreduce_md_to_zt, count_pm_via_zt, zt_via_zf, Direction, Family, OracleSpec, ReductionOutcome,
    SimulatedOracle,
};
use treedpp::verify::{run_suite, SuiteConfig};
use treedpp::{EnumCaps, Error, Graph, WeightedPSD};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

/// Exact constrained-DPP normalizers, counting reductions, and their checks.
#[derive(Parser)]
#[command(name = "treedpp", version)]
struct Cli {
    /// Cap on edges and vertices for enumerations (overrides DPP_MAX_ENUM).
    #[arg(long, global = true, value_name = "N")]
    max_edges: Option<usize>,
    /// Also print a decimal rendering with this many digits.
    #[arg(long, global = true, value_name = "K")]
    decimal: Option<usize>,
    /// Write a machine-readable report here.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Z_T: sum of det(A_S) over spanning trees S (bundle file).
    Zt { input: PathBuf },
    /// Z_F: sum of det(A_S) over forests S (bundle file).
    Zf { input: PathBuf },
    /// det(A + I), the unconstrained normalizer (matrix or bundle file).
    Znorm { input: PathBuf },
    /// Number of spanning trees by Kirchhoff (graph or bundle file).
    CountTrees { input: PathBuf },
    /// Number of perfect matchings by brute force (bipartite file).
    CountPm { input: PathBuf },
    /// Mixed discriminant by the permutation expansion (md file).
    MixedDisc { input: PathBuf },
    /// Exact samples from the constrained DPP in a bundle file, one JSON array per line.
    Sample {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Perfect-matching count read off Z_T of the gadget, checked against brute force.
    ReducePmZt { input: PathBuf },
    /// Z_T by interpolating an exact Z_F oracle, checked against direct Z_T.
    ReduceZtZf {
        input: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Estimate the mixed discriminant with one call to a Z_T oracle.
    ApreduceZt {
        input: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Estimate the mixed discriminant with one call to a Z_F oracle.
    ApreduceZf {
        input: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Run the property suite on seeded random instances.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance size.
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value = "1/2", value_name = "P/Q")]
    epsilon: String,
    #[arg(long, value_enum, default_value_t = OracleMode::Exact)]
    oracle: OracleMode,
    /// Oracle error magnitude; defaults to the tolerance the reduction asks for.
    #[arg(long, value_name = "P/Q")]
    noise: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DirectionArg::Up)]
    direction: DirectionArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Exact,
    Noisy,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Up,
    Down,
}

enum Failure {
    Input(String),
    Cap(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    caps_override: Option<usize>,
    decimal: Option<usize>,
    json: Option<PathBuf>,
}

impl Ctx {
    fn caps(&self, base: EnumCaps) -> EnumCaps {
        match self.caps_override {
            Some(cap) => base.with_graph_cap(cap),
            None => base,
        }
    }

    fn print_value(&self, command: &str, value: &Rational) -> Outcome {
        println!("{}", rational::format(value));
        if let Some(k) = self.decimal {
            println!("{}", rational::to_decimal(value, k));
        }
        self.write_json(&serde_json::json!({ "command": command, "value": rational::format(value) }))
    }

    fn write_json(&self, value: &serde_json::Value) -> Outcome {
        match &self.json {
            Some(path) => write_text(path, &serde_json::to_string_pretty(value).expect("json values serialize")),
            None => Ok(()),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_bundle_graph(path: &Path) -> Result<(WeightedPSD, Graph, Bundle), Failure> {
    let bundle = io::read_bundle(&read_text(path)?)?;
    let graph = bundle
        .graph
        .clone()
        .ok_or_else(|| Failure::Input("bundle has no graph".into()))?;
    Ok((bundle.matrix.clone(), graph, bundle))
}

/// A bundle file if it has a `matrix` key, otherwise a bare matrix file.
fn read_matrix_like(path: &Path) -> Result<WeightedPSD, Failure> {
    let text = read_text(path)?;
    match io::read_bundle(&text) {
        Ok(b) => Ok(b.matrix),
        Err(_) => Ok(io::read_matrix(&text)?),
    }
}

fn read_graph_like(path: &Path) -> Result<Graph, Failure> {
    let text = read_text(path)?;
    if let Ok(Bundle { graph: Some(g), .. }) = io::read_bundle(&text) {
        return Ok(g);
    }
    Ok(io::read_graph(&text)?)
}

fn parse_rational(text: &str, what: &str) -> Result<Rational, Failure> {
    rational::parse(text).map_err(|e| Failure::Input(format!("--{what}: {e}")))
}

fn oracle_spec(args: &OracleArgs) -> Result<OracleSpec, Failure> {
    let noise = args.noise.as_deref().map(|n| parse_rational(n, "noise")).transpose()?;
    Ok(match args.oracle {
        OracleMode::Exact => OracleSpec::Exact,
        OracleMode::Noisy => OracleSpec::Noisy { noise, seed: args.seed },
        OracleMode::Adversarial => OracleSpec::Adversarial {
            noise,
            direction: match args.direction {
                DirectionArg::Up => Direction::Up,
                DirectionArg::Down => Direction::Down,
            },
        },
    })
}

fn apreduce(ctx: &Ctx, input: &Path, args: &OracleArgs, family: Family) -> Outcome {
    let k = io::read_md(&read_text(input)?)?;
    let epsilon = parse_rational(&args.epsilon, "epsilon")?;
    let caps = ctx.caps(EnumCaps::gadget());
    let mut oracle = SimulatedOracle::new(family, oracle_spec(args)?, caps);
    let outcome = match family {
        Family::SpanningTree => apreduce_md_to_zt(&k, &epsilon, &mut oracle, &caps)?,
        Family::Forest => apreduce_md_to_zf(&k, &epsilon, &mut oracle, &caps)?,
    };
    if let Some(path) = &ctx.json {
        write_text(path, &io::write_report(&outcome))?;
    }
    match &outcome {
        ReductionOutcome::Zero => {
            println!("0");
            println!("no positive witness: D = 0");
            Ok(())
        }
        ReductionOutcome::Estimate(r) => {
            println!("{}", rational::format(&r.estimate));
            if let Some(d) = ctx.decimal {
                println!("{}", rational::to_decimal(&r.estimate, d));
            }
            println!("x: {} bits, y: {} bits", rational::bit_length(&r.x), rational::bit_length(&r.y));
            match &r.bounds_check {
                Some(b) if !b.pass => Err(Failure::Verify(format!(
                    "estimate outside [e^-eps D, e^eps D] for D = {}",
                    rational::format(&b.reference)
                ))),
                Some(b) => {
                    println!("within e^(+-{}) of D = {}", rational::format(&epsilon), rational::format(&b.reference));
                    Ok(())
                }
                None => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let env_cap = match std::env::var("DPP_MAX_ENUM") {
        Ok(v) => Some(
            v.parse::<usize>()
                .map_err(|_| Failure::Input(format!("DPP_MAX_ENUM: not a count: `{v}`")))?,
        ),
        Err(_) => None,
    };
    let ctx = Ctx {
        caps_override: cli.max_edges.or(env_cap),
        decimal: cli.decimal,
        json: cli.json,
    };
    match &cli.command {
        Command::Zt { input } => {
            let (a, g, _) = read_bundle_graph(input)?;
            ctx.print_value("zt", &z_tree(&a, &g, &ctx.caps(EnumCaps::default()))?)
        }
        Command::Zf { input } => {
            let (a, g, _) = read_bundle_graph(input)?;
            ctx.print_value("zf", &z_forest(&a, &g, &ctx.caps(EnumCaps::default()))?)
        }
        Command::Znorm { input } => ctx.print_value("znorm", &read_matrix_like(input)?.unconstrained_normalizer()),
        Command::CountTrees { input } => {
            ctx.print_value("count-trees", &read_graph_like(input)?.count_spanning_trees(None)?)
        }
        Command::CountPm { input } => {
            let b = io::read_bipartite(&read_text(input)?)?;
            let count = b.count_perfect_matchings(&ctx.caps(EnumCaps::default()))?;
            ctx.print_value("count-pm", &Rational::from_integer(count.into()))
        }
        Command::MixedDisc { input } => {
            let k = io::read_md(&read_text(input)?)?;
            ctx.print_value("mixed-disc", &k.mixed_discriminant(&ctx.caps(EnumCaps::default()))?)
        }
        Command::Sample { input, seed, count } => {
            let bundle = io::read_bundle(&read_text(input)?)?;
            let dpp = ConstrainedDPP::new(bundle.matrix, bundle.graph, bundle.constraint)?;
            let samples = dpp.sample_exact(*seed, *count, &ctx.caps(EnumCaps::default()))?;
            for s in &samples {
                println!("{}", serde_json::to_string(s).expect("labels serialize"));
            }
            ctx.write_json(&serde_json::json!({ "command": "sample", "seed": seed, "samples": samples }))
        }
        Command::ReducePmZt { input } => {
            let b = io::read_bipartite(&read_text(input)?)?;
            let caps = ctx.caps(EnumCaps::gadget());
            let via = count_pm_via_zt(&b, &caps)?;
            let brute = b.count_perfect_matchings(&caps)?;
            println!("{via}");
            ctx.write_json(&serde_json::json!({
                "command": "reduce-pm-zt", "via_zt": via.to_string(), "brute_force": brute.to_string(), "pass": via == brute,
            }))?;
            if via == brute {
                Ok(())
            } else {
                Err(Failure::Verify(format!("gadget gives {via}, brute force {brute}")))
            }
        }
        Command::ReduceZtZf { input, oracle } => {
            let (a, g, _) = read_bundle_graph(input)?;
            let caps = ctx.caps(EnumCaps::default());
            let mut o = SimulatedOracle::new(Family::Forest, oracle_spec(oracle)?, caps);
            let via = zt_via_zf(&a, &g, &mut o)?;
            let direct = z_tree(&a, &g, &caps)?;
            println!("{}", rational::format(&via));
            if let Some(k) = ctx.decimal {
                println!("{}", rational::to_decimal(&via, k));
            }
            ctx.write_json(&serde_json::json!({
                "command": "reduce-zt-zf",
                "via_zf": rational::format(&via),
                "direct": rational::format(&direct),
                "oracle_calls": o.calls().len(),
                "pass": via == direct,
            }))?;
            if via == direct {
                Ok(())
            } else {
                Err(Failure::Verify(format!("interpolated {via}, direct {direct}")))
            }
        }
        Command::ApreduceZt { input, oracle } => apreduce(&ctx, input, oracle, Family::SpanningTree),
        Command::ApreduceZf { input, oracle } => apreduce(&ctx, input, oracle, Family::Forest),
        Command::Verify { seed, n } => {
            let results = run_suite(&SuiteConfig::new(*seed, *n));
            for r in &results {
                match &r.failure {
                    None => println!("PASS {}", r.name),
                    Some(why) => println!("FAIL {}: {why}", r.name),
                }
            }
            let failed = results.iter().filter(|r| !r.passed()).count();
            ctx.write_json(&serde_json::json!({
                "command": "verify",
                "seed": seed,
                "n": n,
                "properties": results.iter().map(|r| serde_json::json!({
                    "name": r.name, "pass": r.passed(), "failure": r.failure,
                })).collect::<Vec<_>>(),
            }))?;
            if failed == 0 {
                println!("{} properties passed", results.len());
                Ok(())
            } else {
                Err(Failure::Verify(format!("{failed} of {} properties failed", results.len())))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg} (raise it with --max-edges or DPP_MAX_ENUM)");
            ExitCode::from(EXIT_CAP)
        }
    }
}
