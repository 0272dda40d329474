use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use regker::automata::DEFAULT_ENUMERATION_CAP;
use regker::verify::Suite;
use regker::{
    gram_matrix, kernel_value, predict, sample_dfa, serialize_dfa, train, Alphabet, Dataset,
    KernelParams, Mode, PerceptronModel, Scaling,
};

#[derive(Parser)]
#[command(name = "regker", version, about = "Universal regular-language kernel toolkit")]
struct Cli {
    /// Worker threads for Gram and Monte Carlo evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw DFAs uniformly at random and write one file per automaton.
    Sample {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        alphabet: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate K(x, y).
    Kernel {
        #[arg(long)]
        alphabet: String,
        #[command(flatten)]
        kernel: KernelArgs,
        x: String,
        y: String,
    },
    /// Write the Gram matrix of a dataset's strings as CSV plus a `.meta.json` sidecar.
    Gram {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        /// CSV path (default: `<dataset>.gram.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a kernel perceptron on a labeled dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        /// Model path (default: `<dataset>.model`).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Classify strings, one per line; prints `+1` or `-1` per input line.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Input file, or `-` for stdin.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run a verification suite and print a tab-separated pass/fail table.
    Verify {
        /// bounds | embedding | concentration | psd
        #[arg(long)]
        suite: Suite,
    },
}

#[derive(Args)]
struct KernelArgs {
    /// exact | mc
    #[arg(long, default_value = "exact")]
    mode: Mode,
    /// paper | normalized
    #[arg(long, default_value = "normalized")]
    scaling: Scaling,
    #[arg(long = "nmax", default_value_t = 3)]
    n_max: usize,
    #[arg(long = "eps", default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long = "delta", default_value_t = 0.05)]
    failure_prob: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated per-n weights for normalized scaling.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Largest number of transition tables exact mode may enumerate per n.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

impl KernelArgs {
    fn resolve(&self, alphabet: Alphabet) -> KernelParams {
        KernelParams {
            mode: self.mode,
            scaling: self.scaling,
            n_max: self.n_max,
            epsilon: self.epsilon,
            failure_prob: self.failure_prob,
            master_seed: resolve_seed(self.seed),
            alphabet,
            weights: self.weights.clone(),
            enumeration_cap: self.cap,
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl fmt::Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<regker::Error> for Failure {
    fn from(e: regker::Error) -> Self {
        Failure {
            code: if e.is_resource() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

/// Every run states its resolved configuration so the output can be replayed.
fn announce(command: &str, config: serde_json::Value) {
    eprintln!("# {command} {config}");
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_dataset(path: &Path) -> CliResult<Dataset> {
    Dataset::parse(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_sample(states: usize, symbols: &str, count: usize, seed: Option<u64>, out: &Path) -> CliResult {
    let alphabet = Alphabet::new(symbols)?;
    if states == 0 {
        return Err(Failure::input("--states must be at least 1"));
    }
    let seed = resolve_seed(seed);
    announce(
        "sample",
        json!({"states": states, "alphabet": symbols, "count": count, "seed": seed, "out": out}),
    );
    fs::create_dir_all(out)?;
    let width = count.saturating_sub(1).to_string().len().max(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let dfa = sample_dfa(states, &alphabet, &mut rng)?;
        let path = out.join(format!("dfa-{i:0width$}.dfa"));
        fs::write(&path, serialize_dfa(&dfa))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_kernel(symbols: &str, args: &KernelArgs, x: &str, y: &str) -> CliResult {
    let params = args.resolve(Alphabet::new(symbols)?);
    announce("kernel", json!({"params": params, "x": x, "y": y}));
    let value = kernel_value(x, y, &params)?;
    println!("{}", value.value);
    if let Some(c) = &value.certificate {
        println!(
            "certificate epsilon={} delta={} m={} master_seed={}",
            c.epsilon, c.failure_prob, c.samples, c.master_seed
        );
    }
    if value.truncated {
        eprintln!("note: sum truncated at n={} by --nmax", value.summed_to);
    }
    Ok(())
}

fn cmd_gram(dataset: &Path, args: &KernelArgs, out: Option<PathBuf>) -> CliResult {
    let data = load_dataset(dataset)?;
    let params = args.resolve(data.alphabet().clone());
    let out = out.unwrap_or_else(|| with_suffix(dataset, ".gram.csv"));
    let meta = with_suffix(&out, ".meta.json");
    announce("gram", json!({"params": params, "dataset": dataset, "out": out, "meta": meta}));
    let gram = gram_matrix(&data.strings(), &params)?;
    let mut w = BufWriter::new(fs::File::create(&out)?);
    gram.write_csv(&mut w)?;
    w.flush()?;
    fs::write(&meta, gram.metadata_json())?;
    println!("{}", out.display());
    println!("{}", meta.display());
    Ok(())
}

fn cmd_train(dataset: &Path, args: &KernelArgs, epochs: usize, model: Option<PathBuf>) -> CliResult {
    let data = load_dataset(dataset)?;
    let params = args.resolve(data.alphabet().clone());
    let model_path = model.unwrap_or_else(|| with_suffix(dataset, ".model"));
    announce(
        "train",
        json!({"params": params, "dataset": dataset, "epochs": epochs, "model": model_path}),
    );
    let gram = gram_matrix(&data.strings(), &params)?;
    let model = train(&gram, &data.labels(), epochs)?;
    for (i, m) in model.epoch_mistakes.iter().enumerate() {
        println!("epoch {} mistakes {m}", i + 1);
    }
    println!("converged {}", model.converged);
    println!("training_errors {}", model.training_errors);
    fs::write(&model_path, model.to_text())?;
    Ok(())
}

fn cmd_predict(model_path: &Path, input: &Path) -> CliResult {
    let model = PerceptronModel::parse(&read(model_path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", model_path.display())))?;
    announce("predict", json!({"model": model_path, "in": input, "params": model.params}));
    let text = if input == Path::new("-") {
        io::read_to_string(io::stdin())?
    } else {
        read(input)?
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for line in text.lines() {
        writeln!(out, "{}", predict(&model, line)?)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_verify(suite: Suite) -> CliResult {
    announce("verify", json!({"suite": suite.to_string()}));
    let report = suite.run()?;
    print!("{}", report.to_table());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: format!("{suite} suite failed"),
        })
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::input)?;
    }
    match cli.command {
        Command::Sample {
            states,
            alphabet,
            count,
            seed,
            out,
        } => cmd_sample(states, &alphabet, count, seed, &out),
        Command::Kernel { alphabet, kernel, x, y } => cmd_kernel(&alphabet, &kernel, &x, &y),
        Command::Gram { dataset, kernel, out } => cmd_gram(&dataset, &kernel, out),
        Command::Train {
            dataset,
            kernel,
            epochs,
            model,
        } => cmd_train(&dataset, &kernel, epochs, model),
        Command::Predict { model, input } => cmd_predict(&model, &input),
        Command::Verify { suite } => cmd_verify(suite),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
