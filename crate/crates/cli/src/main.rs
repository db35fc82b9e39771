//! `attrank`: rank knowledge-base entity attributes against entity-bearing
//! queries, train and evaluate rankers, and build test collections.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use config::{ParamArgs, PathArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "attrank", version, about)]
struct Cli {
    /// TOML config file; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankMethod {
    Bm25,
    Lm,
    Mlm,
    Mrf,
}

impl RankMethod {
    fn name(self) -> &'static str {
        match self {
            RankMethod::Bm25 => "bm25",
            RankMethod::Lm => "lm",
            RankMethod::Mlm => "mlm",
            RankMethod::Mrf => "mrf",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the (entity, attribute) document index and persist a snapshot
    Index {
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Snapshot output path
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Rank attributes per query and emit a run file
    Rank {
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Ranking method
        #[arg(long, value_enum)]
        method: RankMethod,
        /// Run file output (stdout when omitted)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Run tag (defaults to the method name)
        #[arg(long, value_name = "NAME")]
        tag: Option<String>,
        /// Use a persisted index snapshot instead of building from the KB
        /// (lexical methods only)
        #[arg(long, value_name = "PATH")]
        index: Option<PathBuf>,
        /// Parameter sweep: lambda over the 0.1-step simplex, mu over 0.25
        /// steps, reporting NDCG against the qrels (mrf only)
        #[arg(long)]
        sweep: bool,
        /// Emit document-level results (`entity::attribute` ids) without
        /// aggregating to attribute names (lexical methods only)
        #[arg(long)]
        doc_run: bool,
    },
    /// Cross-validate and train the linear model, writing a CAV1 model file
    Train {
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Model output path
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Also dump the training instances as `grade qid:Q 1:v .. 7:v`
        #[arg(long, value_name = "PATH")]
        dump_features: Option<PathBuf>,
    },
    /// Rank attributes with a trained model
    RankLtr {
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// CAV1 model file
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "NAME")]
        tag: Option<String>,
    },
    /// Score run files against the qrels
    Evaluate {
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Run files to evaluate
        #[arg(required = true, value_name = "RUN")]
        runs: Vec<PathBuf>,
        /// Add a pairwise significance matrix (paired two-tailed t-test on
        /// per-query NDCG)
        #[arg(long)]
        ttest: bool,
        /// Optional `qid<TAB>category` map for per-category means
        #[arg(long, value_name = "PATH")]
        categories: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Build per-query candidate attribute pools from relevant entities
    Pool {
        #[command(flatten)]
        paths: PathArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// `qid<TAB>entity` file of relevant entities per query
        #[arg(long, value_name = "PATH")]
        relevant: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Fleiss' kappa of an `item_id c0 c1 ..` rating-counts file
    Kappa {
        /// Rating counts, one item per line
        #[arg(value_name = "LABELS")]
        labels: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = run(Cli::parse()) {
        log::error!("{err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config_path = cli.config.as_deref();
    match &cli.command {
        Command::Index { paths, params, out } => {
            let config = RunConfig::resolve(config_path, paths, params)?;
            commands::cmd_index(&config, out)
        }
        Command::Rank {
            paths,
            params,
            method,
            out,
            tag,
            index,
            sweep,
            doc_run,
        } => {
            let config = RunConfig::resolve(config_path, paths, params)?;
            commands::cmd_rank(
                &config,
                &commands::RankArgs {
                    method: *method,
                    out: out.as_deref(),
                    tag: tag.as_deref(),
                    index: index.as_deref(),
                    sweep: *sweep,
                    doc_run: *doc_run,
                },
            )
        }
        Command::Train {
            paths,
            params,
            out,
            dump_features,
        } => {
            let config = RunConfig::resolve(config_path, paths, params)?;
            commands::cmd_train(&config, out, dump_features.as_deref())
        }
        Command::RankLtr {
            paths,
            params,
            model,
            out,
            tag,
        } => {
            let config = RunConfig::resolve(config_path, paths, params)?;
            commands::cmd_rank_ltr(&config, model, out.as_deref(), tag.as_deref())
        }
        Command::Evaluate {
            paths,
            params,
            runs,
            ttest,
            categories,
            out,
        } => {
            let config = RunConfig::resolve(config_path, paths, params)?;
            commands::cmd_evaluate(&config, runs, *ttest, categories.as_deref(), out.as_deref())
        }
        Command::Pool {
            paths,
            params,
            relevant,
            out,
        } => {
            let config = RunConfig::resolve(config_path, paths, params)?;
            commands::cmd_pool(&config, relevant, out.as_deref())
        }
        Command::Kappa { labels, out } => commands::cmd_kappa(labels, out.as_deref()),
    }
}
