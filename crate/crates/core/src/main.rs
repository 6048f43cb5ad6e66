use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use rbl_core::broadcast::{assign_bits, read_bits_file, write_bits_file, ObservedBits, Visibility};
use rbl_core::estimators::{Estimator, StructParams};
use rbl_core::harness::{emit_results, run_experiment, write_results, ExperimentConfig, OutputFormat};
use rbl_core::iso::root_likelihoods;
use rbl_core::moments::{lemma_bounds, Lemma, MomentQuery};
use rbl_core::rng::RngStream;
use rbl_core::structure::{centroids, structural_summary};
use rbl_core::tree::{Model, Tree};
use rbl_core::unrooted::{ShuffledView, UnrootedTree};
use rbl_core::Error;

#[derive(Parser)]
#[command(name = "rbl", version, about = "Root-bit reconstruction on random recursive trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Urrt,
    Pa,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Majority,
    Centroid,
    Bayes,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Grow a random tree and write its parent sequence.
    Gen {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Broadcast a random root bit down a tree.
    Broadcast {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write `?` for every vertex of degree above one.
        #[arg(long)]
        leaves_only: bool,
    },
    /// Centroids, balance values and the depth histogram.
    Stats {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Root likelihoods of the unlabeled shape.
    RootPosterior {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Guess the root bit from the unlabeled tree and the observed bits.
    Estimate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        bits: PathBuf,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        #[arg(long)]
        leaves_only: bool,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: u64,
    },
    /// Evaluate the moment bounds of one lemma.
    Moments {
        #[arg(long, value_parser = ["l8", "l9", "l10", "l12", "l14", "leaf", "pa1", "pa2"])]
        lemma: String,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        i: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Run a Monte Carlo risk experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let closed = e
                .chain()
                .filter_map(|c| c.downcast_ref::<std::io::Error>())
                .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe);
            if closed {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Config(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Gen {
            model,
            n,
            beta,
            seed,
            out,
        } => {
            let model = match (model, beta) {
                (ModelArg::Urrt, None) => Model::Urrt,
                (ModelArg::Urrt, Some(_)) => bail!("--beta only applies to --model pa"),
                (ModelArg::Pa, Some(beta)) => Model::Pa { beta },
                (ModelArg::Pa, None) => bail!("--model pa requires --beta"),
            };
            let tree = model.generate(n, &mut RngStream::new(seed, 0).rng())?;
            let beta = beta.map_or_else(|| "none".to_string(), |b| b.to_string());
            let header = format!("model={} n={n} beta={beta} seed={seed}", model.name());
            tree.write_parent_file(&out, &header)?;
        }
        Command::Broadcast {
            tree,
            q,
            seed,
            out,
            leaves_only,
        } => {
            let tree = Tree::read_parent_file(&tree)?;
            let mut bits = assign_bits(&tree, q, &mut RngStream::new(seed, 0).rng())?;
            if leaves_only {
                bits = bits.leaves_only(&tree);
            }
            write_bits_file(&bits, &out)?;
        }
        Command::Stats { tree } => {
            let tree = Tree::read_parent_file(&tree)?;
            print_stats(&tree)?;
        }
        Command::RootPosterior { tree, out } => {
            let tree = Tree::read_parent_file(&tree)?;
            let post = root_likelihoods(&UnrootedTree::from_tree(&tree));
            let mut w = csv::Writer::from_path(&out).with_context(|| format!("writing {}", out.display()))?;
            w.write_record(["v", "log_lambda", "posterior"])?;
            for (v, (l, p)) in post.log_lambda.iter().zip(&post.posterior).enumerate() {
                w.write_record([v.to_string(), l.to_string(), p.to_string()])?;
            }
            w.flush()?;
        }
        Command::Estimate {
            tree,
            bits,
            estimator,
            leaves_only,
            r,
            k,
            eps,
            seed,
        } => estimate(&tree, &bits, estimator, leaves_only, (r, k, eps), seed)?,
        Command::Moments { lemma, q, i, n, beta } => {
            let lemma = Lemma::from_id(&lemma)?;
            let bounds = lemma_bounds(lemma, MomentQuery { q, i, n, beta })?;
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["lemma", "quantity", "lower", "exact", "upper", "holds"])?;
            let cell = |x: Option<f64>| x.map_or_else(String::new, |x| x.to_string());
            for b in bounds {
                w.write_record([
                    b.source.to_string(),
                    b.quantity.to_string(),
                    cell(b.lower),
                    cell(b.exact),
                    cell(b.upper),
                    b.holds(1e-9).to_string(),
                ])?;
            }
            w.flush()?;
        }
        Command::Experiment {
            config,
            out,
            format,
            threads,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Ok(s) = std::env::var("RBL_SEED") {
                cfg.seed = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("RBL_SEED={s:?} is not an unsigned integer")))?;
            }
            let format = match format {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
            let results = run_experiment(&cfg, threads)?;
            match out {
                Some(path) => emit_results(&results, format, &path)?,
                None => write_results(&results, format, std::io::stdout().lock(), Path::new("<stdout>"))?,
            }
        }
    }
    Ok(())
}

fn print_stats(tree: &Tree) -> anyhow::Result<()> {
    let summary = structural_summary(tree);
    let mut out = std::io::stdout().lock();
    writeln!(out, "centroid")?;
    for c in centroids(tree) {
        writeln!(out, "{c}")?;
    }
    writeln!(out)?;
    writeln!(out, "v,depth,subtree_size,phi")?;
    for v in 0..tree.len() {
        writeln!(out, "{v},{},{},{}", summary.depth[v], summary.size_down[v], summary.phi[v])?;
    }
    writeln!(out)?;
    writeln!(out, "depth,count")?;
    let max = summary.depth.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; max + 1];
    for &d in &summary.depth {
        hist[d as usize] += 1;
    }
    for (d, c) in hist.iter().enumerate() {
        writeln!(out, "{d},{c}")?;
    }
    Ok(())
}

fn estimate(
    tree: &Path,
    bits: &Path,
    estimator: EstimatorArg,
    leaves_only: bool,
    (r, k, eps): (Option<u32>, Option<u32>, Option<f64>),
    seed: u64,
) -> anyhow::Result<()> {
    let tree = Tree::read_parent_file(tree)?;
    let raw = read_bits_file(bits)?;
    if raw.len() != tree.len() {
        bail!("bits file has {} vertices, tree has {}", raw.len(), tree.len());
    }
    let name = match estimator {
        EstimatorArg::Majority => "majority",
        EstimatorArg::Centroid => "centroid",
        EstimatorArg::Bayes => "bayes",
        EstimatorArg::Structured => "structured",
    };
    let params = match (r, k, eps) {
        (None, None, None) => StructParams::default(),
        (r, k, eps) => {
            let d = StructParams::default();
            let (r, k) = (r.unwrap_or(d.r), k.unwrap_or(d.k));
            match eps {
                Some(epsilon) => StructParams { r, k, epsilon },
                None => StructParams::with_default_epsilon(r, k),
            }
        }
    };
    let estimator = Estimator::from_name(name, Some(params))?;
    let masked = raw.iter().any(Option::is_none);
    let visibility = if leaves_only || masked {
        Visibility::LeavesOnly
    } else {
        Visibility::AllVertices
    };
    estimator.check_visibility(visibility)?;

    // the estimator only ever sees a relabeled copy
    let view = ShuffledView::new(&tree, &mut RngStream::new(seed, 1).rng());
    let mut relabeled = vec![None; tree.len()];
    for (v, &p) in view.perm.iter().enumerate() {
        relabeled[p as usize] = raw[v];
    }
    let mut observed = ObservedBits::new(&relabeled, Visibility::AllVertices);
    if visibility == Visibility::LeavesOnly {
        observed = observed.mask_to_leaves(&view.tree);
    }
    let prepared = estimator.prepare(&view.tree)?;
    let est = prepared.decide(&observed, &mut RngStream::new(seed, 2).rng())?;
    println!("estimator,estimate,used_randomness");
    println!("{},{},{}", est.estimator_id, est.value.value(), est.used_randomness);
    Ok(())
}
