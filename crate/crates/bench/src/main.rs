use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scws_core::sketch::{read_sketches, write_sketches};
use scws_core::vectorizer::{libsvm_header, write_libsvm};
use scws_core::{
    build_pool_with, estimate, read_libsvm, rescale_unit,
    sketch_corpus, vectorize, Dataset, Precision, SamplePool, Scheme, SketchConfig,
    DEFAULT_POOL_SEED, DEFAULT_POOL_SIZE,
};
use scws_bench::bias::{bias_curve, BiasConfig};
use scws_bench::knn::{reports_csv, run_knn, KnnConfig};
use scws_bench::output::{open_output, write_csv};
use scws_bench::sweep::{run_sweep, SweepTask};
use scws_bench::synthetic::{generate, synthetic_pair, PairSpec, SyntheticSpec};
use scws_bench::throughput::{run_bench, to_libsvm_text, BenchConfig};

#[derive(Parser)]
#[command(name = "scws-bench", version, about = "Weighted min-hash sketching experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a pool snapshot file
    Pool(PoolCmd),
    /// Sketch every row of a dataset into a binary sketch file
    Sketch(SketchCmd),
    /// Row-by-row similarity estimates between two sketch files
    Estimate(EstimateCmd),
    /// Emit b-bit one-hot LIBSVM features
    Vectorize(VectorizeCmd),
    /// Precision at kappa of sketch neighbors against exact neighbors
    Knn(KnnCmd),
    /// Mean estimation bias against sketch length
    Bias(BiasCmd),
    /// Hashing throughput and speedup over ICWS
    Bench(BenchCmd),
    /// SCWS quality across pool sizes
    PoolSweep(SweepCmd),
}

#[derive(Args)]
struct Input {
    /// LIBSVM input file
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Generated data: rows,dim,density,tail
    #[arg(long)]
    synthetic: Option<SyntheticSpec>,
    /// Seed for synthetic data
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// Divide each column by its maximum before sketching
    #[arg(long)]
    rescale: bool,
}

impl Input {
    fn name(&self) -> String {
        match (&self.input, &self.synthetic) {
            (Some(p), _) => p
                .file_stem()
                .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
            (None, Some(spec)) => spec.label(),
            (None, None) => "none".into(),
        }
    }

    fn load(&self) -> Result<Dataset> {
        let data = match (&self.input, &self.synthetic) {
            (Some(path), _) => read_dataset(path)?,
            (None, Some(spec)) => generate(spec, self.data_seed)?,
            (None, None) => bail!("one of --input or --synthetic is required"),
        };
        let data = data.without_empty_rows();
        ensure!(!data.is_empty(), "dataset has no nonempty rows");
        Ok(if self.rescale { rescale_unit(data)? } else { data })
    }
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_libsvm(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

#[derive(Args)]
struct PoolArgs {
    /// Pool size for SCWS
    #[arg(long, default_value_t = DEFAULT_POOL_SIZE)]
    pool_size: usize,
    /// Pool seed for SCWS
    #[arg(long, default_value_t = DEFAULT_POOL_SEED)]
    pool_seed: u64,
    /// Load the pool from a snapshot instead of generating it
    #[arg(long, conflicts_with_all = ["pool_size", "pool_seed"])]
    pool: Option<PathBuf>,
}

impl PoolArgs {
    fn load(&self) -> Result<Arc<SamplePool>> {
        let pool = match &self.pool {
            Some(path) => {
                let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                SamplePool::read_from(BufReader::new(file))
                    .with_context(|| format!("reading pool {}", path.display()))?
            }
            None => build_pool_with(self.pool_size, self.pool_seed, Precision::Single)?,
        };
        Ok(Arc::new(pool))
    }
}

#[derive(Args)]
struct SketchArgs {
    #[arg(long, default_value = "scws", value_parser = parse_scheme)]
    scheme: Scheme,
    /// Sketch length
    #[arg(long, default_value_t = 1024)]
    k: usize,
    /// Base seed for ICWS and ICWS-0bit
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    pool: PoolArgs,
}

impl SketchArgs {
    fn config(&self) -> Result<SketchConfig> {
        Ok(match self.scheme {
            Scheme::Icws => SketchConfig::icws(self.k, self.seed)?,
            Scheme::Icws0 => SketchConfig::icws0(self.k, self.seed)?,
            Scheme::Scws => SketchConfig::scws(self.k, self.pool.load()?)?,
        })
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolPrecision {
    Single,
    Double,
}

#[derive(Args)]
struct PoolCmd {
    #[arg(long, default_value_t = DEFAULT_POOL_SIZE)]
    pool_size: usize,
    #[arg(long, default_value_t = DEFAULT_POOL_SEED)]
    pool_seed: u64,
    #[arg(long, value_enum, default_value = "single")]
    precision: PoolPrecision,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SketchCmd {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    sketch: SketchArgs,
    /// Binary sketch file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateCmd {
    /// First sketch file
    a: PathBuf,
    /// Second sketch file, compared row by row with the first
    b: PathBuf,
    /// CSV output (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VectorizeCmd {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    sketch: SketchArgs,
    /// Bits kept per slot
    #[arg(long, default_value_t = 8)]
    b: u32,
    /// Scale values to 1/sqrt(K) so rows have unit norm
    #[arg(long)]
    normalize: bool,
    /// LIBSVM output (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KnnCmd {
    #[command(flatten)]
    input: Input,
    /// Schemes to evaluate, comma separated
    #[arg(long, value_delimiter = ',', default_value = "icws,icws0,scws", value_parser = parse_scheme)]
    scheme: Vec<Scheme>,
    /// Sketch lengths, comma separated
    #[arg(long, value_delimiter = ',', default_value = "64,512")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    kappa: usize,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    /// Query sampling seed, also the ICWS base seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    pool: PoolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    /// LIBSVM file holding the pair
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Rows of --input forming the pair
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0usize, 1])]
    rows: Vec<usize>,
    /// Generated pair: rows,dim,density,tail (the row count is ignored)
    #[arg(long)]
    synthetic: Option<SyntheticSpec>,
    /// Chance a generated second set keeps each feature of the first
    #[arg(long, default_value_t = 0.6)]
    overlap: f64,
    /// Log-normal sigma applied to the kept weights of a generated pair
    #[arg(long, default_value_t = 0.5)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
}

impl PairArgs {
    fn load(&self) -> Result<(String, scws_core::WeightedSet, scws_core::WeightedSet)> {
        match (&self.input, &self.synthetic) {
            (Some(path), _) => {
                let data = read_dataset(path)?;
                let get = |i: usize| {
                    data.rows
                        .get(i)
                        .cloned()
                        .with_context(|| format!("{} has no row {i}", path.display()))
                };
                let (a, b) = (get(self.rows[0])?, get(self.rows[1])?);
                let name = path.file_stem().map_or("pair".into(), |s| s.to_string_lossy().into_owned());
                Ok((name, a, b))
            }
            (None, Some(spec)) => {
                let pair = PairSpec::from_corpus(spec, self.overlap, self.jitter);
                let (a, b) = synthetic_pair(&pair, self.data_seed)?;
                Ok((format!("{}-o{}-j{}", spec.label(), self.overlap, self.jitter), a, b))
            }
            (None, None) => bail!("one of --input or --synthetic is required"),
        }
    }
}

#[derive(Args)]
struct BiasCmd {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, value_delimiter = ',', default_value = "icws,icws0,scws", value_parser = parse_scheme)]
    scheme: Vec<Scheme>,
    /// Largest sketch length; every shorter length is reported too
    #[arg(long, default_value_t = 1000)]
    k: usize,
    /// Repetitions with fresh randomness
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_POOL_SIZE)]
    pool_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCmd {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_delimiter = ',', default_value = "icws,icws0,scws", value_parser = parse_scheme)]
    scheme: Vec<Scheme>,
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 8)]
    b: u32,
    /// Runs per phase; the fastest is reported
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_POOL_SIZE)]
    pool_size: usize,
    #[arg(long, default_value_t = DEFAULT_POOL_SEED)]
    pool_seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Bias,
    Precision,
}

#[derive(Args)]
struct SweepCmd {
    #[arg(long, value_enum)]
    task: SweepKind,
    /// Pool sizes, comma separated
    #[arg(long, value_delimiter = ',', default_value = "32,512,4000,65536")]
    sizes: Vec<usize>,
    /// Pair for the bias task
    #[command(flatten)]
    pair: PairArgs,
    /// Corpus for the precision task
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Generated corpus for the precision task: rows,dim,density,tail
    #[arg(long, conflicts_with = "corpus")]
    synthetic_corpus: Option<SyntheticSpec>,
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 10)]
    kappa: usize,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_POOL_SEED)]
    pool_seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pool(cmd) => {
            let precision = match cmd.precision {
                PoolPrecision::Single => Precision::Single,
                PoolPrecision::Double => Precision::Double,
            };
            let pool = build_pool_with(cmd.pool_size, cmd.pool_seed, precision)?;
            let mut w = BufWriter::new(File::create(&cmd.out)?);
            pool.write_to(&mut w)?;
            w.flush()?;
        }
        Command::Sketch(cmd) => {
            let data = cmd.input.load()?;
            let sketches = sketch_corpus(&data.rows, &cmd.sketch.config()?)?;
            let mut w = BufWriter::new(File::create(&cmd.out)?);
            write_sketches(&mut w, &sketches)?;
            w.flush()?;
        }
        Command::Estimate(cmd) => {
            let load = |p: &Path| -> Result<_> {
                let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                read_sketches(BufReader::new(file)).with_context(|| format!("reading {}", p.display()))
            };
            let (a, b) = (load(&cmd.a)?, load(&cmd.b)?);
            ensure!(a.len() == b.len(), "sketch files hold {} and {} rows", a.len(), b.len());
            let mut w = open_output(cmd.out.as_deref())?;
            writeln!(w, "row,estimate")?;
            for (i, (x, y)) in a.iter().zip(&b).enumerate() {
                let e = estimate(x, y).with_context(|| format!("row {i}"))?;
                writeln!(w, "{i},{e}")?;
            }
            w.flush()?;
        }
        Command::Vectorize(cmd) => {
            let data = cmd.input.load()?;
            let sketches = sketch_corpus(&data.rows, &cmd.sketch.config()?)?;
            let rows = sketches
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let label = data.labels.as_ref().map_or(0, |l| l[i]);
                    Ok((label, vectorize(&s.to_zero_bit(), cmd.b)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let header = libsvm_header(&sketches[0], cmd.b);
            let mut w = open_output(cmd.out.as_deref())?;
            write_libsvm(&mut w, &header, &rows, cmd.normalize)?;
            w.flush()?;
        }
        Command::Knn(cmd) => {
            let data = cmd.input.load()?;
            let cfg = KnnConfig {
                schemes: cmd.scheme,
                ks: cmd.k,
                kappa: cmd.kappa,
                queries: cmd.queries,
                seed: cmd.seed,
            };
            let reports = run_knn(&cmd.input.name(), &data.rows, &cfg, cmd.pool.load()?)?;
            let mut w = open_output(cmd.out.as_deref())?;
            w.write_all(reports_csv(&reports).as_bytes())?;
            w.flush()?;
        }
        Command::Bias(cmd) => {
            let (name, s, o) = cmd.pair.load()?;
            let cfg = BiasConfig {
                schemes: cmd.scheme,
                k_max: cmd.k,
                reps: cmd.reps,
                seed: cmd.seed,
                pool_size: cmd.pool_size,
            };
            let curve = bias_curve(&name, &s, &o, &cfg)?;
            write_csv(open_output(cmd.out.as_deref())?, &curve)?;
        }
        Command::Bench(cmd) => {
            let text = match (&cmd.input.input, &cmd.input.synthetic) {
                (Some(path), _) => std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?,
                _ => to_libsvm_text(&cmd.input.load()?),
            };
            let cfg = BenchConfig {
                schemes: cmd.scheme,
                k: cmd.k,
                threads: cmd.threads,
                bits: cmd.b,
                seed: cmd.seed,
                pool_size: cmd.pool_size,
                pool_seed: cmd.pool_seed,
                repeats: cmd.repeats,
            };
            let rows = run_bench(&cmd.input.name(), &text, &cfg)?;
            write_csv(open_output(cmd.out.as_deref())?, &rows)?;
        }
        Command::PoolSweep(cmd) => {
            let rows = match cmd.task {
                SweepKind::Bias => {
                    let (name, s, o) = cmd.pair.load()?;
                    let task = SweepTask::Bias {
                        pair: &name,
                        s: &s,
                        o: &o,
                        k: cmd.k,
                        reps: cmd.reps,
                        seed: cmd.seed,
                    };
                    run_sweep(&task, &cmd.sizes)?
                }
                SweepKind::Precision => {
                    let (name, data) = match (&cmd.corpus, &cmd.synthetic_corpus) {
                        (Some(path), _) => (path.display().to_string(), read_dataset(path)?),
                        (None, Some(spec)) => (spec.label(), generate(spec, cmd.pair.data_seed)?),
                        (None, None) => bail!("precision sweep needs --corpus or --synthetic-corpus"),
                    };
                    let data = data.without_empty_rows();
                    let task = SweepTask::Precision {
                        dataset: &name,
                        corpus: &data.rows,
                        k: cmd.k,
                        kappa: cmd.kappa,
                        queries: cmd.queries,
                        seed: cmd.seed,
                        pool_seed: cmd.pool_seed,
                    };
                    run_sweep(&task, &cmd.sizes)?
                }
            };
            write_csv(open_output(cmd.out.as_deref())?, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
