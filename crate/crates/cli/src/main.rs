mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use interference::experiments::{run_experiment, ExperimentConfig, ExperimentOutput};
use interference::fock::{ModeOccupation, ParticleType};
use interference::numerics::ComplexMatrix;
use interference::permutations::{cycle_decompose, eigenstructure, Permutation, RootOfUnity};
use interference::scattering::{prob_partial, probability, DistinguishabilityMatrix};
use interference::suppression::{class_counts, verdict_table, write_verdicts_csv, EigenvalueDistribution};
use interference::unitaries::{build_unitary, UnitarySpec};
use interference::Error;

#[derive(Parser)]
#[command(name = "interference", version, about = "Suppression laws for many-particle interference in symmetric multiports")]
struct Cli {
    /// Worker threads for experiments (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print cycles, order and eigenvalues of a permutation.
    Decompose {
        #[arg(long)]
        permutation: String,
    },
    /// Build a unitary of the symmetry class of a permutation.
    Build {
        #[command(flatten)]
        unitary: UnitaryArgs,
        /// Output JSON file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verdict table for every output of an input state.
    Verdicts {
        #[command(flatten)]
        unitary: UnitaryArgs,
        #[arg(long = "input-state")]
        input_state: String,
        #[arg(long = "type", value_enum, default_value_t = TypeArg::Boson)]
        particle: TypeArg,
        /// Output CSV file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// One transition probability.
    Prob {
        /// Matrix JSON, or the output of `build`.
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long = "input-state")]
        input_state: String,
        #[arg(long = "output-state")]
        output_state: String,
        #[arg(long = "type", value_enum, default_value_t = TypeArg::Boson)]
        particle: TypeArg,
        /// Distinguishability matrix JSON, required for `--type partial`.
        #[arg(long)]
        dist: Option<PathBuf>,
        /// Particle statistics for `--type partial`.
        #[arg(long, value_enum, default_value_t = TypeArg::Boson)]
        statistics: TypeArg,
    },
    /// Run an experiment from a JSON config, writing CSV and metadata into a directory.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the number of bases of a mean-probability run.
        #[arg(long)]
        bases: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct UnitaryArgs {
    /// UnitarySpec JSON file.
    #[arg(long, conflicts_with = "permutation", required_unless_present = "permutation")]
    spec: Option<PathBuf>,
    #[arg(long)]
    permutation: Option<String>,
    /// Seed for random bases of the degenerate eigenspaces.
    #[arg(long)]
    seed: Option<u64>,
    /// Column order of the eigenbasis, 1-based and comma separated.
    #[arg(long = "column-order", value_delimiter = ',')]
    column_order: Option<Vec<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TypeArg {
    Boson,
    Fermion,
    Dist,
    Partial,
}

impl TypeArg {
    fn particle(self) -> Option<ParticleType> {
        match self {
            TypeArg::Boson => Some(ParticleType::Boson),
            TypeArg::Fermion => Some(ParticleType::Fermion),
            TypeArg::Dist => Some(ParticleType::Distinguishable),
            TypeArg::Partial => None,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: &[u8]) -> CliResult<()> {
    fs::write(path, data).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, data: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => write(p, data),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(data)
                .map_err(|e| usage(format!("stdout: {e}")))
        }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| usage(format!("{what}: {e}")))
}

fn parse_state(what: &str, s: &str) -> CliResult<ModeOccupation> {
    ModeOccupation::from_str(s).map_err(|e| usage(format!("{what}: {e}")))
}

/// What `build` writes and `prob` accepts.
#[derive(Serialize, Deserialize)]
struct BuiltUnitary {
    spec: UnitarySpec,
    eigenvalues: Vec<RootOfUnity>,
    matrix: ComplexMatrix,
}

impl UnitaryArgs {
    fn spec(&self) -> CliResult<UnitarySpec> {
        let mut spec = match (&self.spec, &self.permutation) {
            (Some(path), _) => parse_json::<UnitarySpec>("spec", &read(path)?)?,
            (None, Some(p)) => UnitarySpec::new(Permutation::from_str(p)?),
            (None, None) => return Err(usage("either --spec or --permutation is required")),
        };
        if let Some(seed) = self.seed {
            spec.rotation_seed = Some(seed);
        }
        if let Some(order) = &self.column_order {
            if order.contains(&0) {
                return Err(usage("--column-order is 1-based"));
            }
            spec.column_order = Some(order.iter().map(|c| c - 1).collect());
        }
        Ok(spec)
    }
}

fn cmd_decompose(permutation: &str) -> CliResult<()> {
    let p = Permutation::from_str(permutation)?;
    let cycles = cycle_decompose(&p);
    let es = eigenstructure(&p);
    let lengths: Vec<String> = cycles.lengths().iter().map(|l| l.to_string()).collect();
    println!("permutation: {p}");
    println!("modes: {}", p.len());
    println!("cycles: {} (lengths {})", cycles.len(), lengths.join(", "));
    println!("order: {}", cycles.order());
    let eig: Vec<String> = es.eigenvalues.iter().map(|l| l.to_string()).collect();
    println!("eigenvalues: {}", eig.join(" "));
    println!("multiset: {}", EigenvalueDistribution::new(es.eigenvalues.clone()));
    Ok(())
}

fn cmd_build(args: &UnitaryArgs, out: Option<&Path>) -> CliResult<()> {
    let built = build_unitary(&args.spec()?)?;
    let file = BuiltUnitary {
        spec: built.spec,
        eigenvalues: built.eigenvalues,
        matrix: built.matrix,
    };
    let mut json = serde_json::to_vec_pretty(&file).map_err(|e| usage(e.to_string()))?;
    json.push(b'\n');
    emit(out, &json)
}

fn cmd_verdicts(args: &UnitaryArgs, input: &str, t: TypeArg, out: Option<&Path>, svg_path: Option<&Path>) -> CliResult<()> {
    let t = t
        .particle()
        .ok_or_else(|| usage("verdict tables take --type boson, fermion or dist"))?;
    let spec = args.spec()?;
    let r = parse_state("--input-state", input)?;
    if r.modes() != spec.modes() {
        return Err(usage(format!(
            "--input-state has {} modes, the permutation acts on {}",
            r.modes(),
            spec.modes()
        )));
    }
    let u = build_unitary(&spec)?;
    let rows = verdict_table(&u, &r, t)?;
    let mut csv = Vec::new();
    write_verdicts_csv(&rows, &mut csv)?;
    emit(out, &csv)?;
    let [i, ii, iii, iv] = class_counts(&rows);
    eprintln!("{} outputs ({t}); classes I={i} II={ii} III={iii} IV={iv}", rows.len());
    if let Some(path) = svg_path {
        let title = format!("{t}, r = {r}, permutation {}", spec.permutation);
        write(path, svg::histogram(&rows, t, &title).as_bytes())?;
    }
    Ok(())
}

fn read_unitary(path: &Path) -> CliResult<ComplexMatrix> {
    let text = read(path)?;
    let value: serde_json::Value = parse_json("unitary", &text)?;
    if value.get("matrix").is_some() {
        Ok(parse_json::<BuiltUnitary>("unitary", &text)?.matrix)
    } else {
        parse_json("unitary", &text)
    }
}

/// Fifteen significant digits; values below the last digit of a unit probability print as zero.
fn format_probability(p: f64) -> String {
    if p.abs() < 1e-15 {
        return format!("{:.15}", 0.0);
    }
    if p.abs() >= 1e-5 {
        let decimals = (14 - p.abs().log10().floor() as i32).max(0) as usize;
        format!("{p:.decimals$}")
    } else {
        format!("{p:.14e}")
    }
}

fn cmd_prob(unitary: &Path, input: &str, output: &str, t: TypeArg, dist: Option<&Path>, statistics: TypeArg) -> CliResult<()> {
    let u = read_unitary(unitary)?;
    let r = parse_state("--input-state", input)?;
    let s = parse_state("--output-state", output)?;
    let p = match t.particle() {
        Some(t) => probability(t, &u, &r, &s)?,
        None => {
            let path = dist.ok_or_else(|| usage("--type partial needs --dist"))?;
            let dist: DistinguishabilityMatrix = parse_json("distinguishability matrix", &read(path)?)?;
            let stats = statistics
                .particle()
                .filter(|t| *t != ParticleType::Distinguishable)
                .ok_or_else(|| usage("--statistics must be boson or fermion"))?;
            prob_partial(&u, &r, &s, &dist, stats)?
        }
    };
    println!("{}", format_probability(p));
    Ok(())
}

fn cmd_experiment(config: &Path, out: &Path, seed: Option<u64>, bases: Option<usize>, svg_path: Option<&Path>) -> CliResult<()> {
    let mut cfg: ExperimentConfig = parse_json("config", &read(config)?)?;
    match &mut cfg {
        ExperimentConfig::MeanProbabilities(c) => {
            c.seed = seed.unwrap_or(c.seed);
            c.bases = bases.unwrap_or(c.bases);
        }
        ExperimentConfig::UnitaryRobustness(c) | ExperimentConfig::DistinguishabilityRobustness(c) => {
            c.seed = seed.unwrap_or(c.seed);
        }
        ExperimentConfig::FourierComparison(_) => {}
    }
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(usage(format!("invalid config:\n  {}", problems.join("\n  "))));
    }
    let (output, meta) = run_experiment(&cfg)?;
    fs::create_dir_all(out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    for (name, data) in output.csv_files()? {
        write(&out.join(name), &data)?;
    }
    let mut json = serde_json::to_vec_pretty(&meta).map_err(|e| usage(e.to_string()))?;
    json.push(b'\n');
    write(&out.join("metadata.json"), &json)?;
    for line in output.summary() {
        eprintln!("{line}");
    }
    if let Some(path) = svg_path {
        match &output {
            ExperimentOutput::Mean(tables) => {
                let t = &tables[0];
                let title = format!("{} mean probabilities over {} bases", t.particle, t.bases);
                write(path, svg::histogram(&t.rows, t.particle, &title).as_bytes())?;
            }
            _ => eprintln!("--svg applies to mean_probabilities runs only; skipped"),
        }
    }
    let failures = output.invariant_failures();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(failures.join("; ")))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| usage(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Decompose { permutation } => cmd_decompose(permutation),
        Command::Build { unitary, out } => cmd_build(unitary, out.as_deref()),
        Command::Verdicts {
            unitary,
            input_state,
            particle,
            out,
            svg,
        } => cmd_verdicts(unitary, input_state, *particle, out.as_deref(), svg.as_deref()),
        Command::Prob {
            unitary,
            input_state,
            output_state,
            particle,
            dist,
            statistics,
        } => cmd_prob(unitary, input_state, output_state, *particle, dist.as_deref(), *statistics),
        Command::Experiment {
            config,
            out,
            seed,
            bases,
            svg,
        } => cmd_experiment(config, out, *seed, *bases, svg.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("invariant check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
