//! The `ricci` command line: generate → curvature → hist → kernel → classify.

pub mod collection;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ricci_core::classify::cross_validate;
use ricci_core::curvature::{all_curvatures, sample_size, sampled_curvatures};
use ricci_core::graph::{generate_ba, generate_er, generate_ws, Graph};
use ricci_core::io::{write_edge_list, write_gram_csv, CurvatureFile};
use ricci_core::kernel::{gram_matrix, GramMatrix};
use ricci_core::rng::child_seed;

use collection::{ManifestRow, Member};
use config::{GlobalArgs, RunConfig, Workers};
use error::CliError;

pub const MANIFEST: &str = "manifest.csv";

#[derive(Debug, Parser)]
#[command(name = "ricci", about = "Ollivier-Ricci curvature graph kernels", disable_version_flag = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    /// Print the version and resolved configuration as JSON.
    #[arg(long, short = 'V', global = true)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write random graphs as edge lists and add them to a manifest.
    Generate(GenerateArgs),
    /// Curvature of every edge, or of a uniform edge sample.
    Curvature(CurvatureArgs),
    /// Curvature histogram of one graph or curvature file.
    Hist(HistArgs),
    /// Gram matrix of a collection.
    Kernel(KernelArgs),
    /// k-NN cross-validation on a labeled collection.
    Classify(ClassifyArgs),
    /// Edges drawn for the given --epsilon, --delta and --constant-c.
    SampleSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Er,
    Ba,
    Ws,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Er => "er",
            Model::Ba => "ba",
            Model::Ws => "ws",
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Node count.
    #[arg(long)]
    n: usize,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Edges per new node (ba).
    #[arg(long)]
    m: Option<usize>,
    /// Ring degree, even (ws).
    #[arg(long)]
    degree: Option<usize>,
    /// Rewiring probability (ws).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out_dir: PathBuf,
    /// Class label in the manifest; defaults to the model name.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Debug, Args)]
struct CurvatureArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(skip)]
struct HistArgs {
    /// Edge list to compute curvature from.
    #[arg(long, conflicts_with = "curvature", required_unless_present = "curvature")]
    graph: Option<PathBuf>,
    /// Curvature CSV written by `curvature`.
    #[arg(long)]
    curvature: Option<PathBuf>,
    /// Output JSON; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the weights as a gnuplot matrix.
    #[arg(long)]
    plot_matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(skip)]
struct CollectionArgs {
    /// Manifest CSV (`file,label,name`); repeat to merge.
    #[arg(long, conflicts_with = "tu", required_unless_present = "tu")]
    manifest: Vec<PathBuf>,
    /// Directory holding a TU benchmark dataset.
    #[arg(long, requires = "name")]
    tu: Option<PathBuf>,
    /// Dataset name inside --tu, e.g. MUTAG.
    #[arg(long)]
    name: Option<String>,
}

impl CollectionArgs {
    fn load(&self) -> Result<Vec<Member>, CliError> {
        match &self.tu {
            Some(dir) => collection::from_tu(dir, self.name.as_deref().unwrap_or_default()),
            None => collection::from_manifests(&self.manifest),
        }
    }
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[command(flatten)]
    collection: CollectionArgs,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also check the smallest eigenvalue.
    #[arg(long)]
    check_psd: bool,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    collection: CollectionArgs,
    /// Output JSON; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    if cli.version {
        #[derive(Serialize)]
        struct Version<'a> {
            name: &'a str,
            version: &'a str,
            config: &'a RunConfig,
        }
        let v = Version { name: "ricci", version: env!("CARGO_PKG_VERSION"), config: &cfg };
        return emit_json(stdout, &v);
    }
    if cli.global.config_dump {
        return emit_json(stdout, &cfg);
    }
    if let Workers::Count(n) = cfg.worker_count {
        // Fails only if a pool already exists, e.g. in repeated in-process runs.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        None => Err(CliError::Usage("no command given; see --help".into())),
        Some(Command::Generate(a)) => generate(&a, &cfg, stdout),
        Some(Command::Curvature(a)) => curvature(&a, &cfg, stdout),
        Some(Command::Hist(a)) => hist(&a, &cfg, stdout),
        Some(Command::Kernel(a)) => kernel(&a, &cfg, stdout, stderr),
        Some(Command::Classify(a)) => classify(&a, &cfg, stdout, stderr),
        Some(Command::SampleSize) => {
            let (Some(e), Some(d)) = (cfg.epsilon, cfg.delta) else {
                return Err(CliError::Usage("sample-size needs --epsilon and --delta".into()));
            };
            writeln!(stdout, "{}", sample_size(e, d, cfg.constant_c)?).map_err(|e| CliError::Data(e.to_string()))
        }
    }
}

fn emit_json<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(stdout, "{text}").map_err(|e| CliError::Data(e.to_string()))
}

/// Writes to `path`, or to stdout when no path is given.
fn write_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(p, e))
        }
        None => body(stdout).map_err(|e| CliError::Data(e.to_string())),
    }
}

fn require<T: Copy>(value: Option<T>, flag: &str, model: Model) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for model {}", model.name())))
}

fn generate(a: &GenerateArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let label = a.label.clone().unwrap_or_else(|| a.model.name().to_string());
    if label.is_empty() || label.contains(['/', '\\']) {
        return Err(CliError::Usage(format!("label `{label}` cannot be used in file names")));
    }
    let params = match a.model {
        Model::Er => format!("p={}", require(a.p, "p", a.model)?),
        Model::Ba => format!("m={}", require(a.m, "m", a.model)?),
        Model::Ws => format!("degree={} beta={}", require(a.degree, "degree", a.model)?, require(a.beta, "beta", a.model)?),
    };
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;

    let mut new_rows = Vec::with_capacity(a.count);
    for i in 0..a.count {
        let seed = child_seed(cfg.seed, i as u64);
        let g: Graph = match a.model {
            Model::Er => generate_er(a.n, a.p.unwrap(), seed)?,
            Model::Ba => generate_ba(a.n, a.m.unwrap(), seed)?,
            Model::Ws => generate_ws(a.n, a.degree.unwrap(), a.beta.unwrap(), seed)?,
        };
        let name = format!("{label}_{i:04}");
        let file = format!("{name}.edges");
        let header = [
            format!("model={} n={} {params} seed={seed} index={i}", a.model.name(), a.n),
            format!("nodes={} edges={}", g.node_count(), g.edge_count()),
        ];
        let path = a.out_dir.join(&file);
        write_output(Some(&path), stdout, |w| write_edge_list(w, &g, &header))?;
        new_rows.push(ManifestRow { file, label: label.clone(), name });
    }

    let manifest = a.out_dir.join(MANIFEST);
    let mut rows = if manifest.exists() { collection::read_manifest(&manifest)? } else { Vec::new() };
    rows.retain(|r| !new_rows.iter().any(|n| n.file == r.file));
    rows.extend(new_rows);
    collection::write_manifest(&manifest, &rows)
}

fn curvature(a: &CurvatureArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (g, ids) = collection::read_graph(&a.input)?;
    let cm = match cfg.sampling_plan()? {
        Some(plan) => sampled_curvatures(&g, cfg.alpha, &plan, cfg.seed)?,
        None => all_curvatures(&g, cfg.alpha)?,
    };
    let file = CurvatureFile::from_map(&cm, Some(&ids));
    write_output(a.out.as_deref(), stdout, |w| file.write(w))
}

fn hist(a: &HistArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let h = match (&a.graph, &a.curvature) {
        (Some(path), _) => collection::graph_histogram(&collection::read_graph(path)?.0, cfg)?,
        (None, Some(path)) => {
            let file = collection::read_curvature(path)?;
            if cfg.epsilon.is_some() {
                return Err(CliError::Usage("sampling flags do not apply to an existing curvature file".into()));
            }
            collection::curvature_histogram(&file, cfg)?
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let text = serde_json::to_string_pretty(&h).map_err(|e| CliError::Internal(e.to_string()))?;
    write_output(a.out.as_deref(), stdout, |w| writeln!(w, "{text}"))?;
    if let Some(p) = &a.plot_matrix {
        write_output(Some(p), stdout, |w| w.write_all(h.to_matrix_text().as_bytes()))?;
    }
    Ok(())
}

fn collection_gram(members: &[Member], cfg: &RunConfig, check_psd: bool, stderr: &mut dyn Write) -> Result<GramMatrix, CliError> {
    let hs = collection::histograms(members, cfg)?;
    let gm = gram_matrix(&hs, cfg.sigma())?.with_alpha(cfg.alpha);
    gm.check_invariants(check_psd)?;
    let _ = writeln!(stderr, "sigma = {}", gm.sigma());
    Ok(gm)
}

fn kernel(a: &KernelArgs, cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let members = a.collection.load()?;
    let gm = collection_gram(&members, cfg, a.check_psd, stderr)?;
    let names: Vec<String> = members.iter().map(|m| m.name.clone()).collect();
    write_output(a.out.as_deref(), stdout, |w| write_gram_csv(w, &gm, &names))
}

fn classify(a: &ClassifyArgs, cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let members = a.collection.load()?;
    let labels = collection::numeric_labels(&members);
    let gm = collection_gram(&members, cfg, false, stderr)?;
    let report = cross_validate(&gm, &labels, cfg.folds, cfg.k_neighbors, cfg.seed)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    write_output(a.out.as_deref(), stdout, |w| writeln!(w, "{text}"))
}
