//! Command-line front end: `encode`, `discover`, `bootstrap`, `simulate`, `summary`.
//!
//! Settings resolve as flag, then `--config` TOML value, then built-in default.
//! Worker threads for `bootstrap` come from `FCIKIT_THREADS`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_fci, filter_table, BootstrapTable};
use crate::citest::{CiTester, FisherTester, OracleTester};
use crate::dataset::Dataset;
use crate::fci::{fci, BackgroundKnowledge, FciOptions, FciReport};
use crate::graph::{arrow_style, to_dot, Pag, PagJson};
use crate::pipeline::{
    default_rules, drop_missing, encode_survey, group_summary, partition_groups, standardize, AnswerKey,
    EncodingRules, GroupKey, RawSurvey, CONTINUOUS,
};
use crate::sim::{random_sem, sample, SemJson};

pub const THREADS_ENV: &str = "FCIKIT_THREADS";
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_REPLICATES: usize = 100;
pub const DEFAULT_MIN_PROB: f64 = 0.2;
pub const DEFAULT_EXOGENOUS: [&str; 2] = ["Age", "Education"];

#[derive(Debug, Parser)]
#[command(name = "fcikit", version, about = "FCI causal discovery on survey and simulated data")]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a raw survey CSV into the eight group datasets.
    Encode(EncodeArgs),
    /// Run FCI once and write the PAG.
    Discover(DiscoverArgs),
    /// Run bootstrapped FCI and write the edge probability table.
    Bootstrap(BootstrapArgs),
    /// Draw a random SEM and sample data from it.
    Simulate(SimulateArgs),
    /// Per-group five-number summary of one column.
    Summary(SummaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Dot,
    Json,
    EdgeTable,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Encoding rules JSON; the built-in rules when omitted.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Answer key JSON for the literacy questions.
    #[arg(long)]
    pub key: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: PathBuf,
    /// Standardize continuous columns before grouping.
    #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
    pub standardize: bool,
}

#[derive(Debug, Args)]
pub struct FciArgs {
    /// Dataset CSV, or an `encode` output directory together with `--group`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `all` or a group number 1-8 when `--input` is a directory.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Largest conditioning-set size; unlimited when omitted.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Comma-separated exogenous variables; defaults to Age,Education.
    #[arg(long)]
    pub exogenous: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file, or directory for `--group all`.
    #[arg(long)]
    pub output: PathBuf,
    /// Run report path; defaults to `<output>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub common: FciArgs,
    /// Serialized SEM whose d-separations answer the independence queries.
    #[arg(long, conflicts_with = "input")]
    pub oracle: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub common: FciArgs,
    /// Number of replicates.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Entries at or below this probability are dropped.
    #[arg(long)]
    pub min_prob: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 6)]
    pub observed: usize,
    #[arg(long, default_value_t = 1)]
    pub latent: usize,
    #[arg(long, default_value_t = 2.0)]
    pub degree: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for `model.json` and `data.csv`.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    /// Encoded CSV containing the group dummies.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "Fin_Literacy")]
    pub column: String,
    #[arg(long)]
    pub output: PathBuf,
}

/// Values accepted in the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub depth: Option<usize>,
    pub bootstrap: Option<usize>,
    pub seed: Option<u64>,
    pub min_prob: Option<f64>,
    pub exogenous: Option<Vec<String>>,
    pub format: Option<Format>,
    pub rules: Option<PathBuf>,
    pub key: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved discovery settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub max_depth: Option<usize>,
    /// `None` means the default exogenous set, applied only where present.
    pub exogenous: Option<Vec<String>>,
    pub format: Format,
    pub replicates: usize,
    pub seed: u64,
    pub min_prob: f64,
}

impl RunConfig {
    pub fn resolve(common: &FciArgs, file: &FileConfig, default_format: Format) -> Result<Self> {
        let exogenous = match &common.exogenous {
            Some(s) => Some(s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()),
            None => file.exogenous.clone(),
        };
        let cfg = RunConfig {
            alpha: common.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA),
            max_depth: common.depth.or(file.depth),
            exogenous,
            format: common.format.or(file.format).unwrap_or(default_format),
            replicates: file.bootstrap.unwrap_or(DEFAULT_REPLICATES),
            seed: file.seed.unwrap_or(0),
            min_prob: file.min_prob.unwrap_or(DEFAULT_MIN_PROB),
        };
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", cfg.alpha);
        }
        Ok(cfg)
    }

    pub fn fci_options(&self) -> FciOptions {
        FciOptions { alpha: self.alpha, max_depth: self.max_depth, ..FciOptions::default() }
    }

    /// Background knowledge over `names`; default exogenous names that are
    /// absent are skipped with a warning, explicit ones are an error.
    pub fn background(&self, names: &[String]) -> Result<BackgroundKnowledge> {
        let chosen: Vec<String> = match &self.exogenous {
            Some(list) => {
                for n in list {
                    if !names.contains(n) {
                        bail!("exogenous variable {n} is not a column of the input");
                    }
                }
                list.clone()
            }
            None => DEFAULT_EXOGENOUS
                .iter()
                .filter(|n| {
                    let present = names.iter().any(|m| m == *n);
                    if !present {
                        log::warn!("default exogenous variable {n} not in input; skipped");
                    }
                    present
                })
                .map(|s| s.to_string())
                .collect(),
        };
        let refs: Vec<&str> = chosen.iter().map(String::as_str).collect();
        Ok(BackgroundKnowledge::from_names(names, &refs)?)
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            let t: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a count"))?;
            if t == 0 {
                bail!("{THREADS_ENV} must be at least 1");
            }
            Ok(Some(t))
        }
        _ => Ok(None),
    }
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Dataset::read_csv(f).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn report_path(output: &Path, explicit: &Option<PathBuf>) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = output.as_os_str().to_owned();
        s.push(".report.json");
        PathBuf::from(s)
    })
}

fn group_file(dir: &Path, key: GroupKey) -> PathBuf {
    dir.join(format!("group_{}.csv", key.number()))
}

/// `(label, dataset path)` pairs named by `--input`/`--group`.
fn inputs(common: &FciArgs) -> Result<Vec<(Option<GroupKey>, PathBuf)>> {
    let input = common.input.as_ref().context("--input is required")?;
    if !input.is_dir() {
        if common.group.is_some() {
            bail!("--group needs --input to be an encode output directory");
        }
        return Ok(vec![(None, input.clone())]);
    }
    match common.group.as_deref().unwrap_or("all") {
        "all" => Ok(GroupKey::all().map(|k| (Some(k), group_file(input, k))).collect()),
        g => {
            let key = g
                .parse()
                .ok()
                .and_then(GroupKey::from_number)
                .with_context(|| format!("--group must be `all` or 1-8, got {g}"))?;
            Ok(vec![(Some(key), group_file(input, key))])
        }
    }
}

fn output_for(common: &FciArgs, key: Option<GroupKey>, many: bool, ext: &str) -> PathBuf {
    match key {
        Some(k) if many => common.output.join(format!("group_{}.{ext}", k.number())),
        _ => common.output.clone(),
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Dot => "dot",
        Format::Json => "json",
        Format::EdgeTable => "csv",
    }
}

fn separator(path: &Path) -> char {
    if path.extension().is_some_and(|e| e == "tsv") {
        '\t'
    } else {
        ','
    }
}

fn render_pag(pag: &Pag, format: Format, path: &Path) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Dot => to_dot(pag).into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&PagJson::from(pag))?;
            s.push('\n');
            s.into_bytes()
        }
        Format::EdgeTable => {
            let sep = separator(path);
            let mut s = format!("edge{sep}prob\n");
            for r in pag.edge_records() {
                let _ = writeln!(s, "{}{sep}1.00", r.render());
            }
            s.into_bytes()
        }
    })
}

fn bootstrap_dot(table: &BootstrapTable) -> String {
    let mut out = String::from("digraph bootstrap {\n");
    for n in &table.nodes {
        let _ = writeln!(out, "  \"{n}\";");
    }
    for e in table.entries() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [dir=both, arrowtail={}, arrowhead={}, label=\"{:.2}\"];",
            e.edge.a,
            e.edge.b,
            arrow_style(e.edge.mark_a),
            arrow_style(e.edge.mark_b),
            e.probability
        );
    }
    out.push_str("}\n");
    out
}

fn load_rules(path: Option<&Path>) -> Result<EncodingRules> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading rules {}", p.display()))?;
            EncodingRules::from_json(&text).with_context(|| format!("parsing rules {}", p.display()))
        }
        None => Ok(default_rules()),
    }
}

#[derive(Debug, Serialize)]
struct EncodeReport {
    total: usize,
    dropped: usize,
    kept: usize,
    standardized: bool,
    groups: BTreeMap<String, usize>,
    key_rate_deviations: Vec<(String, f64, f64)>,
}

pub fn cmd_encode(args: &EncodeArgs, file: &FileConfig) -> Result<()> {
    let raw = RawSurvey::read_csv(fs::File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let rules = load_rules(args.rules.as_deref().or(file.rules.as_deref()))?;
    let key = match args.key.as_deref().or(file.key.as_deref()) {
        Some(p) => Some(AnswerKey::from_json(&fs::read_to_string(p).with_context(|| format!("reading key {}", p.display()))?)?),
        None => None,
    };
    let deviations = key.as_ref().map(|k| k.rate_deviations(&raw, 0.1)).unwrap_or_default();
    for (q, got, want) in &deviations {
        log::warn!("{q}: correct-answer rate {got:.3} differs from official {want:.3}; check the answer key");
    }
    let encoded = encode_survey(&raw, &rules, key.as_ref()).context("encoding survey")?;
    let (complete, drop) = drop_missing(&encoded)?;
    let mut buf = Vec::new();
    complete.write_csv(&mut buf)?;
    write_file(&args.output.join("encoded.csv"), &buf)?;

    let prepared = if args.standardize {
        let cols: Vec<&str> = CONTINUOUS.iter().copied().filter(|c| complete.column_index(c).is_some()).collect();
        standardize(&complete, &cols)?
    } else {
        complete
    };
    let groups = partition_groups(&prepared)?;
    let mut sizes = BTreeMap::new();
    for (k, d) in &groups {
        let mut buf = Vec::new();
        d.write_csv(&mut buf)?;
        write_file(&group_file(&args.output, *k), &buf)?;
        sizes.insert(format!("group_{}", k.number()), d.n_rows());
    }
    log::info!("encoded {} rows, kept {}", drop.total, drop.kept());
    write_json(
        &args.output.join("report.json"),
        &EncodeReport {
            total: drop.total,
            dropped: drop.dropped,
            kept: drop.kept(),
            standardized: args.standardize,
            groups: sizes,
            key_rate_deviations: deviations,
        },
    )
}

pub fn cmd_discover(args: &DiscoverArgs, file: &FileConfig) -> Result<()> {
    let cfg = RunConfig::resolve(&args.common, file, Format::Dot)?;
    let opts = cfg.fci_options();
    let jobs: Vec<(Option<GroupKey>, Box<dyn CiTester>, Vec<String>)> = match &args.oracle {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let model = serde_json::from_str::<SemJson>(&text)?.to_model()?;
            let t = OracleTester::new(model.dag().clone());
            let names = t.names().to_vec();
            vec![(None, Box::new(t), names)]
        }
        None => inputs(&args.common)?
            .into_iter()
            .map(|(k, p)| {
                let data = read_dataset(&p)?;
                let t = FisherTester::new(&data, cfg.alpha).with_context(|| format!("preparing tests for {}", p.display()))?;
                Ok((k, Box::new(t) as Box<dyn CiTester>, data.names().to_vec()))
            })
            .collect::<Result<_>>()?,
    };
    let many = jobs.len() > 1;
    for (key, tester, names) in jobs {
        let bk = cfg.background(&names)?;
        let out = fci(tester.as_ref(), &names, &opts, &bk).with_context(|| match key {
            Some(k) => format!("FCI on {k}"),
            None => "FCI".to_string(),
        })?;
        let path = output_for(&args.common, key, many, extension(cfg.format));
        write_file(&path, &render_pag(&out.pag, cfg.format, &path)?)?;
        let report: FciReport = out.report(&opts, &bk);
        write_json(&report_path(&path, if many { &None } else { &args.common.report }), &report)?;
        log::info!("{}: {} edges after {} tests", path.display(), out.pag.n_edges(), out.log.tests);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct BootstrapReport<'a> {
    config: &'a RunConfig,
    threads: Option<usize>,
    exogenous: Vec<String>,
    replicates: usize,
    entries: usize,
    retained: usize,
}

pub fn cmd_bootstrap(args: &BootstrapArgs, file: &FileConfig) -> Result<()> {
    let mut cfg = RunConfig::resolve(&args.common, file, Format::EdgeTable)?;
    if let Some(b) = args.bootstrap {
        cfg.replicates = b;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.min_prob {
        cfg.min_prob = m;
    }
    let threads = threads_from_env()?;
    let opts = cfg.fci_options();
    let jobs = inputs(&args.common)?;
    let many = jobs.len() > 1;
    for (key, path) in jobs {
        let data = read_dataset(&path)?;
        let bk = cfg.background(data.names())?;
        let table = bootstrap_fci(&data, &opts, &bk, cfg.replicates, cfg.seed, threads)
            .with_context(|| format!("bootstrap on {}", path.display()))?;
        let kept = filter_table(&table, cfg.min_prob)?;
        let out = output_for(&args.common, key, many, extension(cfg.format));
        let bytes = match cfg.format {
            Format::EdgeTable => {
                let mut buf = Vec::new();
                kept.write_edge_table(&mut buf, separator(&out))?;
                buf
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&kept.entries())?;
                s.push('\n');
                s.into_bytes()
            }
            Format::Dot => bootstrap_dot(&kept).into_bytes(),
        };
        write_file(&out, &bytes)?;
        write_json(
            &report_path(&out, if many { &None } else { &args.common.report }),
            &BootstrapReport {
                config: &cfg,
                threads,
                exogenous: bk.exogenous().iter().map(|&v| data.names()[v].clone()).collect(),
                replicates: table.replicates,
                entries: table.len(),
                retained: kept.len(),
            },
        )?;
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, file: &FileConfig) -> Result<()> {
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let model = random_sem(args.observed, args.latent, args.degree, seed)?;
    let data = sample(&model, args.samples, seed.wrapping_add(1))?;
    write_json(&args.output.join("model.json"), &SemJson::from(&model))?;
    let mut buf = Vec::new();
    data.write_csv(&mut buf)?;
    write_file(&args.output.join("data.csv"), &buf)
}

pub fn cmd_summary(args: &SummaryArgs) -> Result<()> {
    let data = read_dataset(&args.input)?;
    let groups = partition_groups(&data)?;
    let rows = group_summary(&args.column, &groups)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "n", "min", "q1", "median", "q3", "max", "mean"])?;
    let f = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.group.to_string(),
            r.n.to_string(),
            f(r.min),
            f(r.q1),
            f(r.median),
            f(r.q3),
            f(r.max),
            f(r.mean),
        ])?;
    }
    write_file(&args.output, &w.into_inner().map_err(|e| e.into_error())?)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Encode(a) => cmd_encode(a, &file),
        Command::Discover(a) => cmd_discover(a, &file),
        Command::Bootstrap(a) => cmd_bootstrap(a, &file),
        Command::Simulate(a) => cmd_simulate(a, &file),
        Command::Summary(a) => cmd_summary(a),
    }
}

/// Process entry: logging to stderr, exit status 1 on any error.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(ce) = e.downcast_ref::<clap::Error>() {
                let _ = ce.print();
                return if ce.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
            }
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
