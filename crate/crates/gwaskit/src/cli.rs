//! Command-line pipeline runner.
//!
//! Subcommands: `synth`, `discretize`, `project`, `mtd-score`, `approach1`
//! (projection + k-NN), `approach2` (feature selection + random forest),
//! `crossval`, and `roc`. Every command that takes `--seed` produces
//! byte-identical output files across runs and worker counts. Parameter
//! precedence is command-line flags, then `--config` file entries, then
//! built-in defaults. Exit codes: 0 success, 1 runtime failure, 2 usage
//! error.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::dataset::{self, Dataset, Label};
use crate::error::Error;
use crate::eval;
use crate::forest;
use crate::knn;
use crate::mtd;
use crate::projection;
use crate::seed;

pub const DEFAULT_TREES: usize = 500;
pub const DEFAULT_ALPHAS: [f64; 4] = [0.2, 0.3, 0.4, 0.5];
pub const DEFAULT_KS: [usize; 10] = [1, 3, 5, 7, 9, 11, 13, 15, 17, 19];
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_JL_C: f64 = 4.0;
pub const DEFAULT_GRID: usize = 101;
pub const DEFAULT_FOLDS: usize = 5;

const HOLDOUT_TAG: u64 = 0x484f_4c44;
const PROJECT_TAG: u64 = 0x50524f4a;
const FOREST_TAG: u64 = 0x464f_5253;
const FOLD_TAG: u64 = 0x464f_4c44;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses the process arguments, runs the selected command, and returns
/// the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "gwaskit",
    version,
    about = "High-dimensional genotype classification pipeline"
)]
struct Cli {
    /// Flat `key = value` defaults file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic labeled genotype matrix with planted signal.
    Synth(SynthArgs),
    /// Map a genotype matrix to its most-probable-genotype categorical form.
    Discretize(DiscretizeArgs),
    /// Project a matrix to a lower dimension with a seeded ±1 matrix.
    Project(ProjectArgs),
    /// Score every feature of a categorical matrix by class separation.
    MtdScore(MtdScoreArgs),
    /// Holdout: random projection then k-NN over a (k, norm) grid.
    Approach1(Approach1Args),
    /// Holdout: feature selection on the training split, then a forest per threshold.
    Approach2(Approach2Args),
    /// t-fold cross-validation of one classifier configuration.
    Crossval(CrossvalArgs),
    /// ROC curve and rectangle-rule area from a score file.
    Roc(RocArgs),
}

fn execute(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Synth(a) => cmd_synth(a.resolve(&file)?),
        Command::Discretize(a) => cmd_discretize(a.resolve(&file)?),
        Command::Project(a) => {
            let r = a.resolve(&file)?;
            with_workers(r.workers, || cmd_project(r))
        }
        Command::MtdScore(a) => cmd_mtd_score(a.resolve(&file)?),
        Command::Approach1(a) => {
            let r = a.resolve(&file)?;
            with_workers(r.workers, || cmd_approach1(r))
        }
        Command::Approach2(a) => {
            let r = a.resolve(&file)?;
            with_workers(r.workers, || cmd_approach2(r))
        }
        Command::Crossval(a) => {
            let r = a.resolve(&file)?;
            with_workers(r.workers, || cmd_crossval(r))
        }
        Command::Roc(a) => cmd_roc(a.resolve(&file)?),
    }
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    body: impl FnOnce() -> CliResult<T> + Send,
) -> CliResult<T> {
    match workers {
        None => body(),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| usage(format!("cannot build a {threads}-worker pool: {e}")))?;
            pool.install(body)
        }
    }
}

// ---------------------------------------------------------------------------
// Config file

#[derive(Default)]
struct FileConfig(HashMap<String, String>);

const KNOWN_KEYS: &[&str] = &[
    "n", "m", "informative", "effect", "balance", "seed", "out", "input", "input-kind",
    "train-rows", "mprime", "jl-c", "epsilon", "k", "norm", "workers", "blocks", "alpha",
    "trees", "z", "folds", "grid", "classifier", "scores",
];

impl FileConfig {
    fn load(path: &Path) -> CliResult<FileConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {} is not `key = value`", no + 1)))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(usage(format!("unknown config key `{key}`")));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| usage(format!("config key `{key}` = `{raw}`: {e}"))),
        }
    }

    fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|e| usage(format!("config key `{key}` item `{item}`: {e}")))
                })
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }
}

fn pick<T>(flag: Option<T>, file: CliResult<Option<T>>, default: T) -> CliResult<T> {
    Ok(flag.or(file?).unwrap_or(default))
}

fn pick_opt<T>(flag: Option<T>, file: CliResult<Option<T>>) -> CliResult<Option<T>> {
    Ok(flag.or(file?))
}

fn require<T>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| usage(format!("--{name} is required")))
}

// ---------------------------------------------------------------------------
// Shared argument enums

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputKind {
    Genotype,
    Categorical,
    Real,
}

impl FromStr for InputKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "genotype" => Ok(InputKind::Genotype),
            "categorical" => Ok(InputKind::Categorical),
            "real" => Ok(InputKind::Real),
            other => Err(format!("unknown input kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Classifier {
    Knn,
    Forest,
}

impl FromStr for Classifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(Classifier::Knn),
            "forest" => Ok(Classifier::Forest),
            other => Err(format!("unknown classifier `{other}`")),
        }
    }
}

fn parse_kind(raw: Option<String>, allowed: &[InputKind], default: InputKind) -> CliResult<InputKind> {
    let kind = match raw {
        None => default,
        Some(raw) => raw.parse().map_err(usage)?,
    };
    if !allowed.contains(&kind) {
        return Err(usage("input kind not supported by this command"));
    }
    Ok(kind)
}

// ---------------------------------------------------------------------------
// Output helpers

/// Ten significant digits in plain decimal notation.
fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.9}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (9 - exponent).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

fn metric(v: Option<f64>) -> String {
    v.map(sig10).unwrap_or_else(|| "NA".to_string())
}

fn create_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(Error::io(dir, e)))?;
    Ok(())
}

fn write_text(path: &Path, content: &str) -> CliResult<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(content.as_bytes())
        .map_err(|e| CliError::Runtime(Error::io(path, e)))
}

fn write_roc_csv(path: &Path, curve: &eval::RocCurve) -> CliResult<()> {
    let mut out = String::from("alpha,fpr,tpr\n");
    for p in curve.points() {
        out.push_str(&format!("{},{},{}\n", sig10(p.alpha), sig10(p.fpr), sig10(p.tpr)));
    }
    write_text(path, &out)
}

fn write_scores_csv(path: &Path, scores: &mtd::FeatureScores) -> CliResult<()> {
    let mut out = String::from("feature_name,score\n");
    for j in scores.ranking() {
        out.push_str(&format!(
            "{},{}\n",
            scores.feature_names()[j],
            sig10(scores.score_f64(j))
        ));
    }
    write_text(path, &out)
}

fn load_real_input(input: &Path, kind: InputKind) -> CliResult<dataset::RealDataset> {
    match kind {
        InputKind::Genotype => Ok(dataset::load_genotype_matrix(input)?.flatten()),
        InputKind::Real => Ok(dataset::load_real_matrix(input)?),
        InputKind::Categorical => Err(usage("categorical input has no real-valued form")),
    }
}

fn load_categorical_input(input: &Path, kind: InputKind) -> CliResult<dataset::CategoricalDataset> {
    match kind {
        InputKind::Genotype => Ok(dataset::discretize(&dataset::load_genotype_matrix(input)?)),
        InputKind::Categorical => Ok(dataset::load_categorical_matrix(input)?),
        InputKind::Real => Err(usage("real input has no categorical form")),
    }
}

// ---------------------------------------------------------------------------
// synth

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Number of features carrying planted class signal.
    #[arg(long)]
    informative: Option<usize>,
    #[arg(long)]
    effect: Option<f64>,
    /// Class-1 fraction of the generated labels.
    #[arg(long)]
    balance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for genotype.csv and truth.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct SynthParams {
    n: usize,
    m: usize,
    informative: usize,
    effect: f64,
    balance: f64,
    seed: u64,
    out: PathBuf,
}

impl SynthArgs {
    fn resolve(self, file: &FileConfig) -> CliResult<SynthParams> {
        let params = SynthParams {
            n: pick(self.n, file.get("n"), 200)?,
            m: pick(self.m, file.get("m"), 50)?,
            informative: pick(self.informative, file.get("informative"), 5)?,
            effect: pick(self.effect, file.get("effect"), 0.8)?,
            balance: pick(self.balance, file.get("balance"), 0.5)?,
            seed: pick(self.seed, file.get("seed"), 0)?,
            out: pick(self.out, file.get("out"), PathBuf::from("."))?,
        };
        if params.n < 2 {
            return Err(usage(format!("--n {} must be at least 2", params.n)));
        }
        if params.informative > params.m {
            return Err(usage(format!(
                "--informative {} exceeds --m {}",
                params.informative, params.m
            )));
        }
        if !(0.0..=1.0).contains(&params.effect) {
            return Err(usage(format!("--effect {} outside [0, 1]", params.effect)));
        }
        if !(params.balance > 0.0 && params.balance < 1.0) {
            return Err(usage(format!("--balance {} outside (0, 1)", params.balance)));
        }
        Ok(params)
    }
}

fn cmd_synth(params: SynthParams) -> CliResult<()> {
    let (data, truth) = dataset::synthesize_gwas(
        params.n,
        params.m,
        params.informative,
        params.effect,
        params.balance,
        params.seed,
    )?;
    create_out_dir(&params.out)?;
    dataset::write_genotype_matrix(params.out.join("genotype.csv"), &data)?;
    let mut sidecar = format!("effect,{}\n", truth.effect_size());
    sidecar.push_str("informative");
    for j in truth.informative_indices() {
        sidecar.push_str(&format!(",{j}"));
    }
    sidecar.push('\n');
    write_text(&params.out.join("truth.csv"), &sidecar)?;
    println!(
        "synth: wrote {} observations x {} features to {}",
        params.n,
        params.m,
        params.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// discretize

#[derive(Args, Debug)]
struct DiscretizeArgs {
    /// Genotype CSV to read.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Categorical CSV to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct DiscretizeParams {
    input: PathBuf,
    out: PathBuf,
}

impl DiscretizeArgs {
    fn resolve(self, file: &FileConfig) -> CliResult<DiscretizeParams> {
        Ok(DiscretizeParams {
            input: require(pick_opt(self.input, file.get("input"))?, "input")?,
            out: require(pick_opt(self.out, file.get("out"))?, "out")?,
        })
    }
}

fn cmd_discretize(params: DiscretizeParams) -> CliResult<()> {
    let raw = dataset::load_genotype_matrix(&params.input)?;
    let cat = dataset::discretize(&raw);
    dataset::write_categorical_matrix(&params.out, &cat)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// project

#[derive(Args, Debug)]
struct ProjectArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format: genotype (triples flatten to 3m columns) or real.
    #[arg(long)]
    input_kind: Option<String>,
    /// Target dimension; defaults to the recommended dimension for the
    /// dataset size at --epsilon and --jl-c.
    #[arg(long)]
    mprime: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    jl_c: Option<f64>,
    /// Column blocks for the parallel multiplication.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Real CSV to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also audit pairwise distortion and print a summary line.
    #[arg(long, default_value_t = false)]
    audit: bool,
}

struct ProjectParams {
    input: PathBuf,
    kind: InputKind,
    mprime: Option<usize>,
    seed: u64,
    epsilon: f64,
    jl_c: f64,
    blocks: Option<usize>,
    workers: Option<usize>,
    out: PathBuf,
    audit: bool,
}

impl ProjectArgs {
    fn resolve(self, file: &FileConfig) -> CliResult<ProjectParams> {
        let params = ProjectParams {
            input: require(pick_opt(self.input, file.get("input"))?, "input")?,
            kind: parse_kind(
                pick_opt(self.input_kind, file.get("input-kind"))?,
                &[InputKind::Genotype, InputKind::Real],
                InputKind::Genotype,
            )?,
            mprime: pick_opt(self.mprime, file.get("mprime"))?,
            seed: pick(self.seed, file.get("seed"), 0)?,
            epsilon: pick(self.epsilon, file.get("epsilon"), DEFAULT_EPSILON)?,
            jl_c: pick(self.jl_c, file.get("jl-c"), DEFAULT_JL_C)?,
            blocks: pick_opt(self.blocks, file.get("blocks"))?,
            workers: pick_opt(self.workers, file.get("workers"))?,
            out: require(pick_opt(self.out, file.get("out"))?, "out")?,
            audit: self.audit,
        };
        if !(params.epsilon > 0.0 && params.epsilon < 0.5) {
            return Err(usage(format!("--epsilon {} outside (0, 0.5)", params.epsilon)));
        }
        Ok(params)
    }
}

fn resolve_mprime(requested: Option<usize>, n: usize, m: usize, epsilon: f64, c: f64) -> CliResult<usize> {
    let m_prime = match requested {
        Some(v) => v,
        None => projection::recommended_dim(n.max(2), epsilon, c)?,
    };
    if m_prime == 0 {
        return Err(usage("--mprime must be at least 1"));
    }
    if m_prime >= m {
        eprintln!(
            "warning: target dimension {m_prime} is not below the input dimension {m}; projecting anyway"
        );
    }
    Ok(m_prime)
}

fn block_plan(m: usize, blocks: Option<usize>, master: u64) -> CliResult<projection::BlockPlan> {
    let z = blocks.unwrap_or(8).clamp(1, m);
    Ok(projection::BlockPlan::new(m, z, seed::derive(master, PROJECT_TAG))?)
}

fn cmd_project(params: ProjectParams) -> CliResult<()> {
    let data = load_real_input(&params.input, params.kind)?;
    let m = data.cols();
    let m_prime = resolve_mprime(params.mprime, data.rows(), m, params.epsilon, params.jl_c)?;
    let plan = block_plan(m, params.blocks, params.seed)?;
    let projected = projection::project_blocked(&data, m_prime, &plan)?;
    dataset::write_real_matrix(&params.out, &projected)?;
    if params.audit {
        let report = projection::distortion_audit(&data, &projected, params.epsilon)?;
        println!(
            "audit,{},{},{},{}",
            report.epsilon,
            report.pairs_within,
            report.pairs_checked,
            sig10(report.worst_ratio)
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mtd-score

#[derive(Args, Debug)]
struct MtdScoreArgs {
    /// Categorical CSV to score.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Score table CSV to write (feature_name,score by descending score).
    #[arg(long)]
    out: Option<PathBuf>,
}

struct MtdScoreParams {
    input: PathBuf,
    out: PathBuf,
}

impl MtdScoreArgs {
    fn resolve(self, file: &FileConfig) -> CliResult<MtdScoreParams> {
        Ok(MtdScoreParams {
            input: require(pick_opt(self.input, file.get("input"))?, "input")?,
            out: require(pick_opt(self.out, file.get("out"))?, "out")?,
        })
    }
}

fn cmd_mtd_score(params: MtdScoreParams) -> CliResult<()> {
    let data = dataset::load_categorical_matrix(&params.input)?;
    let scores = mtd::score_all(&data)?;
    write_scores_csv(&params.out, &scores)
}

// ---------------------------------------------------------------------------
// approach1

#[derive(Args, Debug)]
struct Approach1Args {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    input_kind: Option<String>,
    /// Rows assigned to the training split.
    #[arg(long)]
    train_rows: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mprime: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    jl_c: Option<f64>,
    /// Neighbour counts to evaluate (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Norms to evaluate: l1, l2, linf.
    #[arg(long, value_delimiter = ',')]
    norm: Option<Vec<String>>,
    /// ROC threshold grid size.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Report directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Approach1Params {
    input: PathBuf,
    kind: InputKind,
    train_rows: Option<usize>,
    seed: u64,
    mprime: Option<usize>,
    epsilon: f64,
    jl_c: f64,
    ks: Vec<usize>,
    norms: Vec<knn::Norm>,
    grid: usize,
    blocks: Option<usize>,
    workers: Option<usize>,
    out: PathBuf,
}

impl Approach1Args {
    fn resolve(self, file: &FileConfig) -> CliResult<Approach1Params> {
        let norms_raw = pick(
            self.norm,
            file.get_list("norm"),
            vec!["l1".to_string(), "l2".to_string()],
        )?;
        let norms = norms_raw
            .iter()
            .map(|s| knn::Norm::from_str(s).map_err(|e| usage(e.to_string())))
            .collect::<CliResult<Vec<_>>>()?;
        let params = Approach1Params {
            input: require(pick_opt(self.input, file.get("input"))?, "input")?,
            kind: parse_kind(
                pick_opt(self.input_kind, file.get("input-kind"))?,
                &[InputKind::Genotype, InputKind::Real],
                InputKind::Genotype,
            )?,
            train_rows: pick_opt(self.train_rows, file.get("train-rows"))?,
            seed: pick(self.seed, file.get("seed"), 0)?,
            mprime: pick_opt(self.mprime, file.get("mprime"))?,
            epsilon: pick(self.epsilon, file.get("epsilon"), DEFAULT_EPSILON)?,
            jl_c: pick(self.jl_c, file.get("jl-c"), DEFAULT_JL_C)?,
            ks: pick(self.k, file.get_list("k"), DEFAULT_KS.to_vec())?,
            norms,
            grid: pick(self.grid, file.get("grid"), DEFAULT_GRID)?,
            blocks: pick_opt(self.blocks, file.get("blocks"))?,
            workers: pick_opt(self.workers, file.get("workers"))?,
            out: require(pick_opt(self.out, file.get("out"))?, "out")?,
        };
        if params.ks.is_empty() || params.norms.is_empty() {
            return Err(usage("--k and --norm must be nonempty"));
        }
        if params.ks.contains(&0) {
            return Err(usage("--k entries must be at least 1"));
        }
        if params.grid < 2 {
            return Err(usage(format!("--grid {} must be at least 2", params.grid)));
        }
        if !(params.epsilon > 0.0 && params.epsilon < 0.5) {
            return Err(usage(format!("--epsilon {} outside (0, 0.5)", params.epsilon)));
        }
        if let Some(t) = params.train_rows {
            if t <= 1 {
                return Err(usage(format!("--train-rows {t} must exceed 1")));
            }
        }
        Ok(params)
    }
}

/// Training rows when the flag is omitted: three quarters, rounded up.
fn default_train_rows(n: usize) -> usize {
    (3 * n).div_ceil(4)
}

fn cmd_approach1(params: Approach1Params) -> CliResult<()> {
    let data = load_real_input(&params.input, params.kind)?;
    let n = data.rows();
    let train_rows = params.train_rows.unwrap_or_else(|| default_train_rows(n));
    let (train, test) = dataset::holdout_split(&data, train_rows, seed::derive(params.seed, HOLDOUT_TAG))?;

    let m = data.cols();
    let m_prime = resolve_mprime(params.mprime, n, m, params.epsilon, params.jl_c)?;
    let plan = block_plan(m, params.blocks, params.seed)?;
    let train_proj = projection::project_blocked(&train, m_prime, &plan)?;
    let test_proj = projection::project_blocked(&test, m_prime, &plan)?;

    create_out_dir(&params.out)?;
    let mut metrics = String::from("k,norm,accuracy,precision,recall,f_measure,auc\n");
    for &k in &params.ks {
        if k > train_proj.rows() {
            return Err(CliError::Runtime(Error::arg(format!(
                "k = {k} exceeds the {} training rows",
                train_proj.rows()
            ))));
        }
        for &norm in &params.norms {
            let model = knn::fit(train_proj.clone(), k, norm)?;
            let fractions = model.vote_fractions(&test_proj)?;
            let pred: Vec<Label> = fractions
                .iter()
                .map(|&f| if f > 0.5 { Label::Case } else { Label::Control })
                .collect();
            let matrix = eval::confusion(&pred, test_proj.labels())?;
            let curve = eval::roc_curve(&fractions, test_proj.labels(), params.grid)?;
            let area = eval::auc(&curve)?;
            write_roc_csv(&params.out.join(format!("roc_k{k}_{norm}.csv")), &curve)?;
            metrics.push_str(&format!(
                "{k},{norm},{},{},{},{},{}\n",
                metric(matrix.accuracy()),
                metric(matrix.precision()),
                metric(matrix.recall()),
                metric(matrix.f_measure()),
                sig10(area)
            ));
        }
    }
    write_text(&params.out.join("metrics.csv"), &metrics)
}

// ---------------------------------------------------------------------------
// approach2

#[derive(Args, Debug)]
struct Approach2Args {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    input_kind: Option<String>,
    #[arg(long)]
    train_rows: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Selection thresholds (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Trees per forest.
    #[arg(long)]
    trees: Option<usize>,
    /// Features sampled per node; defaults to ceil(sqrt(selected)).
    #[arg(long)]
    z: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Approach2Params {
    input: PathBuf,
    kind: InputKind,
    train_rows: Option<usize>,
    seed: u64,
    alphas: Vec<f64>,
    trees: usize,
    z: Option<usize>,
    grid: usize,
    workers: Option<usize>,
    out: PathBuf,
}

impl Approach2Args {
    fn resolve(self, file: &FileConfig) -> CliResult<Approach2Params> {
        let params = Approach2Params {
            input: require(pick_opt(self.input, file.get("input"))?, "input")?,
            kind: parse_kind(
                pick_opt(self.input_kind, file.get("input-kind"))?,
                &[InputKind::Genotype, InputKind::Categorical],
                InputKind::Genotype,
            )?,
            train_rows: pick_opt(self.train_rows, file.get("train-rows"))?,
            seed: pick(self.seed, file.get("seed"), 0)?,
            alphas: pick(self.alpha, file.get_list("alpha"), DEFAULT_ALPHAS.to_vec())?,
            trees: pick(self.trees, file.get("trees"), DEFAULT_TREES)?,
            z: pick_opt(self.z, file.get("z"))?,
            grid: pick(self.grid, file.get("grid"), DEFAULT_GRID)?,
            workers: pick_opt(self.workers, file.get("workers"))?,
            out: require(pick_opt(self.out, file.get("out"))?, "out")?,
        };
        if params.alphas.is_empty() {
            return Err(usage("--alpha must be nonempty"));
        }
        if params.alphas.iter().any(|a| *a < 0.0) {
            return Err(usage("--alpha entries must be non-negative"));
        }
        if params.trees == 0 {
            return Err(usage("--trees must be at least 1"));
        }
        if params.grid < 2 {
            return Err(usage(format!("--grid {} must be at least 2", params.grid)));
        }
        Ok(params)
    }
}

fn forest_vote_fractions(
    model: &forest::ForestModel,
    data: &dataset::CategoricalDataset,
) -> crate::Result<Vec<f64>> {
    use rayon::prelude::*;
    (0..data.rows())
        .into_par_iter()
        .map(|i| forest::vote_fraction_forest(model, forest::Row::Categorical(data.row_codes(i))))
        .collect()
}

fn cmd_approach2(params: Approach2Params) -> CliResult<()> {
    let data = load_categorical_input(&params.input, params.kind)?;
    let n = data.rows();
    let train_rows = params.train_rows.unwrap_or_else(|| default_train_rows(n));
    let (train, test) = dataset::holdout_split(&data, train_rows, seed::derive(params.seed, HOLDOUT_TAG))?;

    // Selection sees only the training split; scoring the full dataset
    // before the split would leak test labels into the feature choice.
    let scores = mtd::score_all(&train)?;
    create_out_dir(&params.out)?;
    write_scores_csv(&params.out.join("scores.csv"), &scores)?;

    let mut selected_table = String::from("alpha,selected\n");
    let mut metrics = String::from("alpha,selected,accuracy,precision,recall,f_measure,auc\n");
    for &alpha in &params.alphas {
        let keep = mtd::select_features(&scores, alpha)?;
        if keep.is_empty() {
            return Err(CliError::Runtime(Error::arg(format!(
                "no features selected at alpha = {alpha}; largest score is {}",
                scores
                    .ranking()
                    .first()
                    .map(|&j| sig10(scores.score_f64(j)))
                    .unwrap_or_else(|| "none".into())
            ))));
        }
        selected_table.push_str(&format!("{alpha},{}\n", keep.len()));

        let train_kept = mtd::reduce_columns(&train, &keep)?;
        let test_kept = mtd::reduce_columns(&test, &keep)?;
        let sample = forest::TrainSet::from_categorical(&train_kept)?;
        let feature_sample = match params.z {
            Some(z) => forest::FeatureSample::Count(z),
            None => forest::default_feature_sample(keep.len()),
        };
        let config = forest::TreeConfig::new(
            0.0,
            feature_sample,
            seed::derive(params.seed, FOREST_TAG),
        );
        let model = forest::fit_forest(&sample, params.trees, &config, true)?;

        let fractions = forest_vote_fractions(&model, &test_kept)?;
        let pred: Vec<Label> = fractions
            .iter()
            .map(|&f| if f >= 0.5 { Label::Case } else { Label::Control })
            .collect();
        let matrix = eval::confusion(&pred, test_kept.labels())?;
        let curve = eval::roc_curve(&fractions, test_kept.labels(), params.grid)?;
        let area = eval::auc(&curve)?;
        write_roc_csv(&params.out.join(format!("roc_alpha{alpha}.csv")), &curve)?;
        metrics.push_str(&format!(
            "{alpha},{},{},{},{},{},{}\n",
            keep.len(),
            metric(matrix.accuracy()),
            metric(matrix.precision()),
            metric(matrix.recall()),
            metric(matrix.f_measure()),
            sig10(area)
        ));
    }
    write_text(&params.out.join("selected.csv"), &selected_table)?;
    write_text(&params.out.join("metrics.csv"), &metrics)
}

// ---------------------------------------------------------------------------
// crossval

#[derive(Args, Debug)]
struct CrossvalArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    input_kind: Option<String>,
    /// knn or forest.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    z: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct CrossvalParams {
    input: PathBuf,
    kind: InputKind,
    classifier: Classifier,
    folds: usize,
    seed: u64,
    k: usize,
    norm: knn::Norm,
    trees: usize,
    z: Option<usize>,
    workers: Option<usize>,
    out: PathBuf,
}

impl CrossvalArgs {
    fn resolve(self, file: &FileConfig) -> CliResult<CrossvalParams> {
        let classifier = match pick_opt(self.classifier, file.get("classifier"))? {
            None => Classifier::Knn,
            Some(raw) => raw.parse::<Classifier>().map_err(usage)?,
        };
        let allowed: &[InputKind] = match classifier {
            Classifier::Knn => &[InputKind::Genotype, InputKind::Real],
            Classifier::Forest => &[InputKind::Genotype, InputKind::Categorical, InputKind::Real],
        };
        let norm_raw = pick(self.norm, file.get("norm"), "l2".to_string())?;
        let params = CrossvalParams {
            input: require(pick_opt(self.input, file.get("input"))?, "input")?,
            kind: parse_kind(pick_opt(self.input_kind, file.get("input-kind"))?, allowed, InputKind::Genotype)?,
            classifier,
            folds: pick(self.folds, file.get("folds"), DEFAULT_FOLDS)?,
            seed: pick(self.seed, file.get("seed"), 0)?,
            k: pick(self.k, file.get("k"), 9)?,
            norm: knn::Norm::from_str(&norm_raw).map_err(|e| usage(e.to_string()))?,
            trees: pick(self.trees, file.get("trees"), DEFAULT_TREES)?,
            z: pick_opt(self.z, file.get("z"))?,
            workers: pick_opt(self.workers, file.get("workers"))?,
            out: require(pick_opt(self.out, file.get("out"))?, "out")?,
        };
        if params.folds < 2 {
            return Err(usage(format!("--folds {} must be at least 2", params.folds)));
        }
        if params.k == 0 {
            return Err(usage("--k must be at least 1"));
        }
        if params.trees == 0 {
            return Err(usage("--trees must be at least 1"));
        }
        Ok(params)
    }
}

fn accuracy_of(pred: &[Label], truth: &[Label]) -> crate::Result<f64> {
    Ok(eval::confusion(pred, truth)?
        .accuracy()
        .expect("nonempty test fold"))
}

fn cmd_crossval(params: CrossvalParams) -> CliResult<()> {
    let report = match params.classifier {
        Classifier::Knn => {
            let data = load_real_input(&params.input, params.kind)?;
            let plan = eval::kfold_plan(data.rows(), params.folds, seed::derive(params.seed, FOLD_TAG))?;
            let trainer = |train: &dataset::RealDataset| knn::fit(train.clone(), params.k, params.norm);
            let scorer = |model: &knn::KnnModel, test: &dataset::RealDataset| {
                accuracy_of(&model.predict_batch(test)?, test.labels())
            };
            eval::cross_validate(&trainer, &scorer, &data, &plan)?
        }
        Classifier::Forest => {
            let config_seed = seed::derive(params.seed, FOREST_TAG);
            match params.kind {
                InputKind::Real => {
                    let data = load_real_input(&params.input, params.kind)?;
                    let plan =
                        eval::kfold_plan(data.rows(), params.folds, seed::derive(params.seed, FOLD_TAG))?;
                    let trainer = |train: &dataset::RealDataset| {
                        let sample = forest::TrainSet::from_real(train);
                        let fs = match params.z {
                            Some(z) => forest::FeatureSample::Count(z),
                            None => forest::default_feature_sample(train.cols()),
                        };
                        forest::fit_forest(
                            &sample,
                            params.trees,
                            &forest::TreeConfig::new(0.0, fs, config_seed),
                            true,
                        )
                    };
                    let scorer = |model: &forest::ForestModel, test: &dataset::RealDataset| {
                        let pred = (0..test.rows())
                            .map(|i| model.predict(forest::Row::Real(test.row(i))))
                            .collect::<crate::Result<Vec<_>>>()?;
                        accuracy_of(&pred, test.labels())
                    };
                    eval::cross_validate(&trainer, &scorer, &data, &plan)?
                }
                _ => {
                    let data = load_categorical_input(&params.input, params.kind)?;
                    let plan =
                        eval::kfold_plan(data.rows(), params.folds, seed::derive(params.seed, FOLD_TAG))?;
                    let trainer = |train: &dataset::CategoricalDataset| {
                        let sample = forest::TrainSet::from_categorical(train)?;
                        let fs = match params.z {
                            Some(z) => forest::FeatureSample::Count(z),
                            None => forest::default_feature_sample(train.cols()),
                        };
                        forest::fit_forest(
                            &sample,
                            params.trees,
                            &forest::TreeConfig::new(0.0, fs, config_seed),
                            true,
                        )
                    };
                    let scorer =
                        |model: &forest::ForestModel, test: &dataset::CategoricalDataset| {
                            let pred = (0..test.rows())
                                .map(|i| {
                                    model.predict(forest::Row::Categorical(test.row_codes(i)))
                                })
                                .collect::<crate::Result<Vec<_>>>()?;
                            accuracy_of(&pred, test.labels())
                        };
                    eval::cross_validate(&trainer, &scorer, &data, &plan)?
                }
            }
        }
    };

    create_out_dir(&params.out)?;
    let mut out = String::from("fold,accuracy\n");
    for (i, score) in report.per_fold.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", sig10(*score)));
    }
    out.push_str(&format!("mean,{}\n", sig10(report.mean)));
    // The fold plan tiles the rows by construction; record the check.
    out.push_str("coverage,ok\n");
    write_text(&params.out.join("crossval.csv"), &out)?;
    println!("crossval: mean accuracy {}", sig10(report.mean));
    Ok(())
}

// ---------------------------------------------------------------------------
// roc

#[derive(Args, Debug)]
struct RocArgs {
    /// CSV with header `score,label`, one observation per line.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct RocParams {
    scores: PathBuf,
    grid: usize,
    out: PathBuf,
}

impl RocArgs {
    fn resolve(self, file: &FileConfig) -> CliResult<RocParams> {
        let params = RocParams {
            scores: require(pick_opt(self.scores, file.get("scores"))?, "scores")?,
            grid: pick(self.grid, file.get("grid"), DEFAULT_GRID)?,
            out: require(pick_opt(self.out, file.get("out"))?, "out")?,
        };
        if params.grid < 2 {
            return Err(usage(format!("--grid {} must be at least 2", params.grid)));
        }
        Ok(params)
    }
}

fn cmd_roc(params: RocParams) -> CliResult<()> {
    let text = fs::read_to_string(&params.scores)
        .map_err(|e| CliError::Runtime(Error::io(&params.scores, e)))?;
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (no == 0 && line == "score,label") {
            continue;
        }
        let (s, l) = line
            .split_once(',')
            .ok_or_else(|| Error::format(&params.scores, no + 1, "expected `score,label`"))?;
        let score: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::format(&params.scores, no + 1, format!("bad score `{s}`")))?;
        let label: i64 = l
            .trim()
            .parse()
            .map_err(|_| Error::format(&params.scores, no + 1, format!("bad label `{l}`")))?;
        scores.push(score);
        truth.push(Label::from_int(label)?);
    }
    let curve = eval::roc_curve(&scores, &truth, params.grid)?;
    let area = eval::auc(&curve)?;
    create_out_dir(&params.out)?;
    write_roc_csv(&params.out.join("roc.csv"), &curve)?;
    println!("auc,{}", sig10(area));
    Ok(())
}
