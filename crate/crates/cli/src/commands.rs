//! The subcommand implementations. Diagnostics go to stderr via `log`;
//! data goes to stdout or the `--out` file.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;

use attrank::baselines;
use attrank::embedding::{self, WordVectorStore};
use attrank::eval;
use attrank::kb::{self, KnowledgeBase};
use attrank::lexsim::{self, Taxonomy};
use attrank::linker::{self, QueryAnnotation};
use attrank::ltr::{self, CaOptions};
use attrank::mrf;

use crate::config::RunConfig;
use crate::RankMethod;

pub fn out_writer(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn load_kb(config: &RunConfig) -> anyhow::Result<KnowledgeBase> {
    let path = config.require("kb")?;
    let kb = kb::load_kb(path)?;
    log::info!(
        "loaded KB {}: {} entities, {} pairs",
        path.display(),
        kb.entity_count(),
        kb.global_pair_count()
    );
    Ok(kb)
}

fn load_vectors(config: &RunConfig) -> anyhow::Result<WordVectorStore> {
    let path = config.require("vectors")?;
    let store = embedding::load_vectors(path)?;
    if store.duplicates_replaced() > 0 {
        log::warn!(
            "{}: {} duplicate tokens replaced (last row wins)",
            path.display(),
            store.duplicates_replaced()
        );
    }
    log::info!(
        "loaded {} vectors of dimension {}",
        store.len(),
        store.dimension()
    );
    Ok(store)
}

fn load_taxonomy(config: &RunConfig) -> anyhow::Result<Taxonomy> {
    let path = config.require("taxonomy")?;
    let tax = lexsim::load_taxonomy(path)?;
    log::info!("loaded taxonomy with {} synsets", tax.node_count());
    Ok(tax)
}

fn load_annotations(config: &RunConfig) -> anyhow::Result<Vec<QueryAnnotation>> {
    let path = config.require("annotations")?;
    let mut annotations = linker::load_annotations(path)?;
    if let Some(stoplist_path) = &config.stoplist {
        let stoplist = linker::load_stoplist(stoplist_path)?;
        log::info!("applying {}-token stoplist", stoplist.len());
        annotations = annotations
            .iter()
            .map(|a| a.without_stopwords(&stoplist))
            .collect();
    }
    log::info!("loaded {} annotated queries", annotations.len());
    Ok(annotations)
}

pub fn cmd_index(config: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let kb = load_kb(config)?;
    let index = baselines::build_index(&kb)?;
    baselines::save_index(&index, out)?;
    log::info!(
        "wrote index snapshot with {} documents to {}",
        index.doc_count(),
        out.display()
    );
    Ok(())
}

pub struct RankArgs<'a> {
    pub method: RankMethod,
    pub out: Option<&'a Path>,
    pub tag: Option<&'a str>,
    pub index: Option<&'a Path>,
    pub sweep: bool,
    pub doc_run: bool,
}

pub fn cmd_rank(config: &RunConfig, args: &RankArgs) -> anyhow::Result<()> {
    if args.sweep {
        anyhow::ensure!(
            args.method == RankMethod::Mrf,
            "--sweep only applies to --method mrf"
        );
        anyhow::ensure!(!args.doc_run, "--sweep and --doc-run conflict");
        return sweep_mrf(config, args.out);
    }
    let annotations = load_annotations(config)?;
    let tag = args.tag.unwrap_or(args.method.name());
    let mut run = eval::RunList::new(tag);

    match args.method {
        RankMethod::Mrf => {
            anyhow::ensure!(
                args.index.is_none(),
                "--index only applies to lexical methods"
            );
            let kb = load_kb(config)?;
            let store = load_vectors(config)?;
            config.mrf.validate()?;
            for ann in &annotations {
                let ranked = mrf::rank_attributes_mrf(&kb, &store, ann, &config.mrf, config.k)?;
                if !ranked.is_empty() {
                    run.set_ranking(&ann.query_id, ranked)?;
                }
            }
        }
        RankMethod::Bm25 | RankMethod::Lm | RankMethod::Mlm => {
            let index = match args.index {
                Some(path) => {
                    let index = baselines::load_index(path)?;
                    log::info!("loaded index snapshot with {} documents", index.doc_count());
                    index
                }
                None => baselines::build_index(&load_kb(config)?)?,
            };
            for ann in &annotations {
                let docs = rank_docs(&index, &ann.terms, config, args.method)?;
                if args.doc_run {
                    let ranked: Vec<(String, f64)> = docs
                        .iter()
                        .take(config.k)
                        .map(|sd| (sd.doc.to_string(), sd.score))
                        .collect();
                    if !ranked.is_empty() {
                        run.set_ranking(&ann.query_id, ranked)?;
                    }
                } else {
                    let linked = ann.linked_entities();
                    if linked.is_empty() {
                        log::warn!(
                            "query `{}` has no linked entities; emitting empty ranking",
                            ann.query_id
                        );
                        continue;
                    }
                    let ranked = baselines::aggregate_to_attributes(&docs, &linked, config.k);
                    if !ranked.is_empty() {
                        run.set_ranking(&ann.query_id, ranked)?;
                    }
                }
            }
        }
    }

    let mut out = out_writer(args.out)?;
    eval::write_run(&run, &mut out)?;
    out.flush()?;
    Ok(())
}

fn rank_docs(
    index: &baselines::InvertedIndex,
    terms: &[String],
    config: &RunConfig,
    method: RankMethod,
) -> anyhow::Result<Vec<baselines::ScoredDoc>> {
    Ok(match method {
        RankMethod::Bm25 => baselines::bm25_rank(index, terms, config.k1, config.b, usize::MAX)?,
        RankMethod::Lm => baselines::lm_rank(index, terms, config.mu, usize::MAX)?,
        RankMethod::Mlm => baselines::mlm_rank(
            index,
            terms,
            config.w_title,
            config.w_content,
            config.mu,
            usize::MAX,
        )?,
        RankMethod::Mrf => unreachable!("handled by caller"),
    })
}

/// Grid sweep: lambda over the 0.1-step simplex, mu1/mu2 over 0.25 steps,
/// scored by mean NDCG@k against the qrels. One line per point, best
/// first.
fn sweep_mrf(config: &RunConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let kb = load_kb(config)?;
    let store = load_vectors(config)?;
    let annotations = load_annotations(config)?;
    let qrels = eval::read_qrels(config.require("qrels")?)?;

    let mut rows: Vec<(f64, [f64; 5])> = Vec::new();
    for l1 in 0..=10u32 {
        for l2 in 0..=(10 - l1) {
            let l3 = 10 - l1 - l2;
            for m1 in 0..=4u32 {
                for m2 in 0..=4u32 {
                    let params = mrf::MrfParams {
                        lambda1: f64::from(l1) / 10.0,
                        lambda2: f64::from(l2) / 10.0,
                        lambda3: f64::from(l3) / 10.0,
                        mu1: f64::from(m1) * 0.25,
                        mu2: f64::from(m2) * 0.25,
                        epsilon: config.mrf.epsilon,
                    };
                    let mut run = eval::RunList::new("sweep");
                    for ann in &annotations {
                        let ranked = mrf::rank_attributes_mrf(&kb, &store, ann, &params, config.k)?;
                        if !ranked.is_empty() {
                            run.set_ranking(&ann.query_id, ranked)?;
                        }
                    }
                    let report = eval::compute_metrics(&run, &qrels, config.k)?;
                    rows.push((
                        report.mean.ndcg,
                        [
                            params.lambda1,
                            params.lambda2,
                            params.lambda3,
                            params.mu1,
                            params.mu2,
                        ],
                    ));
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.partial_cmp(&b.1).unwrap())
    });
    let mut out = out_writer(out)?;
    writeln!(out, "# lambda1 lambda2 lambda3 mu1 mu2 ndcg@{}", config.k)?;
    for (ndcg, p) in rows {
        writeln!(
            out,
            "{:.1} {:.1} {:.1} {:.2} {:.2} {ndcg:.6}",
            p[0], p[1], p[2], p[3], p[4]
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_train(
    config: &RunConfig,
    out: &Path,
    dump_features: Option<&Path>,
) -> anyhow::Result<()> {
    let kb = load_kb(config)?;
    let store = load_vectors(config)?;
    let tax = load_taxonomy(config)?;
    let annotations = load_annotations(config)?;
    let qrels = eval::read_qrels(config.require("qrels")?)?;
    config.mrf.validate()?;

    let instances = ltr::build_instances(&kb, &store, &tax, &annotations, &qrels, &config.mrf)?;
    log::info!("extracted {} training instances", instances.len());
    if let Some(path) = dump_features {
        let mut out = out_writer(Some(path))?;
        ltr::write_feature_dump(&instances, &mut out)?;
        out.flush()?;
    }

    let opts = CaOptions {
        restarts: config.restarts,
        seed: config.seed,
        metric_k: config.k,
        ..CaOptions::default()
    };
    let cv = ltr::cross_validate(&instances, config.folds, &opts, "ltr-cv")?;

    let mut stdout = BufWriter::new(std::io::stdout());
    writeln!(
        stdout,
        "# {}-fold cross-validation (restarts={}, seed={}, k={})",
        config.folds, config.restarts, config.seed, config.k
    )?;
    for fold in &cv.folds {
        writeln!(
            stdout,
            "fold {}: queries={} ndcg@{}={:.4} p@{}={:.4} mrr={:.4} map={:.4}",
            fold.fold,
            fold.test_queries.len(),
            config.k,
            fold.test_metrics.ndcg,
            config.k,
            fold.test_metrics.precision,
            fold.test_metrics.rr,
            fold.test_metrics.ap
        )?;
    }
    writeln!(
        stdout,
        "pooled: ndcg@{}={:.4} p@{}={:.4} mrr={:.4} map={:.4}",
        config.k,
        cv.pooled_metrics.ndcg,
        config.k,
        cv.pooled_metrics.precision,
        cv.pooled_metrics.rr,
        cv.pooled_metrics.ap
    )?;

    let mut model = ltr::ca_train(&instances, &opts)?;
    model.folds = Some(config.folds);
    writeln!(
        stdout,
        "final model: training ndcg@{}={:.4}",
        config.k, model.training_ndcg
    )?;
    stdout.flush()?;

    let mut writer = out_writer(Some(out))?;
    ltr::write_model(&model, &mut writer)?;
    writer.flush()?;
    log::info!("wrote model to {}", out.display());
    Ok(())
}

pub fn cmd_rank_ltr(
    config: &RunConfig,
    model_path: &Path,
    out: Option<&Path>,
    tag: Option<&str>,
) -> anyhow::Result<()> {
    let model = ltr::read_model(model_path)?;
    let kb = load_kb(config)?;
    let store = load_vectors(config)?;
    let tax = load_taxonomy(config)?;
    let annotations = load_annotations(config)?;
    config.mrf.validate()?;

    let mut run = eval::RunList::new(tag.unwrap_or("ltr"));
    for ann in &annotations {
        let ranked =
            ltr::rank_attributes_ltr(&kb, &store, &tax, ann, &model, &config.mrf, config.k)?;
        if !ranked.is_empty() {
            run.set_ranking(&ann.query_id, ranked)?;
        }
    }
    let mut out = out_writer(out)?;
    eval::write_run(&run, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn cmd_evaluate(
    config: &RunConfig,
    run_paths: &[PathBuf],
    ttest: bool,
    categories: Option<&Path>,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let qrels = eval::read_qrels(config.require("qrels")?)?;
    let mut names = Vec::new();
    let mut reports = Vec::new();
    for path in run_paths {
        let run = eval::read_run(path)?;
        let report = eval::compute_metrics(&run, &qrels, config.k)?;
        names.push(run.tag.clone());
        reports.push(report);
    }

    let mut out = out_writer(out)?;
    let k = config.k;
    writeln!(
        out,
        "{:<16} {:>8} {:>8} {:>8} {:>8}",
        "run",
        format!("NDCG@{k}"),
        format!("P@{k}"),
        "MRR",
        "MAP"
    )?;
    for (name, report) in names.iter().zip(&reports) {
        writeln!(
            out,
            "{:<16} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            name, report.mean.ndcg, report.mean.precision, report.mean.rr, report.mean.ap
        )?;
    }

    if ttest {
        writeln!(out)?;
        writeln!(
            out,
            "# paired two-tailed t-test p-values on NDCG@{k} (* = p < 0.05)"
        )?;
        write!(out, "{:<16}", "")?;
        for name in &names {
            write!(out, " {name:>12}")?;
        }
        writeln!(out)?;
        for (i, a) in reports.iter().enumerate() {
            write!(out, "{:<16}", names[i])?;
            for (j, b) in reports.iter().enumerate() {
                if i == j {
                    write!(out, " {:>12}", "-")?;
                    continue;
                }
                let per_a: Vec<f64> = a.per_query.values().map(|m| m.ndcg).collect();
                let per_b: Vec<f64> = b.per_query.values().map(|m| m.ndcg).collect();
                let t = eval::paired_t_test(&per_a, &per_b, 0.05)?;
                let marker = if t.significant { "*" } else { "" };
                write!(out, " {:>12}", format!("{:.4}{marker}", t.p))?;
            }
            writeln!(out)?;
        }
    }

    if let Some(path) = categories {
        let map = read_categories(path)?;
        let mut by_category: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for qid in qrels.query_ids() {
            if let Some(category) = map.get(qid) {
                by_category.entry(category).or_default().push(qid);
            }
        }
        for (category, qids) in by_category {
            writeln!(out)?;
            writeln!(out, "# category {category} ({} queries)", qids.len())?;
            for (name, report) in names.iter().zip(&reports) {
                let mut sum = eval::QueryMetrics::default();
                for qid in &qids {
                    let m = report.per_query[*qid];
                    sum.ndcg += m.ndcg;
                    sum.precision += m.precision;
                    sum.rr += m.rr;
                    sum.ap += m.ap;
                }
                let n = qids.len() as f64;
                writeln!(
                    out,
                    "{:<16} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                    name,
                    sum.ndcg / n,
                    sum.precision / n,
                    sum.rr / n,
                    sum.ap / n
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn read_categories(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let content =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (idx, line) in content.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((qid, category)) = line.split_once('\t') else {
            anyhow::bail!(
                "{}:{}: expected `qid<TAB>category`",
                path.display(),
                idx + 1
            );
        };
        map.insert(qid.to_string(), category.to_string());
    }
    Ok(map)
}

pub fn cmd_pool(
    config: &RunConfig,
    relevant_path: &Path,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let kb = load_kb(config)?;
    let annotations = load_annotations(config)?;
    let relevant = read_relevant_entities(relevant_path)?;
    let pools = eval::build_candidate_pool(&kb, &annotations, &relevant);
    let mut out = out_writer(out)?;
    for (qid, attrs) in &pools {
        for attr in attrs {
            writeln!(out, "{qid}\t{attr}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_relevant_entities(path: &Path) -> anyhow::Result<BTreeMap<String, BTreeSet<String>>> {
    let content =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (idx, line) in content.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((qid, entity)) = line.split_once('\t') else {
            anyhow::bail!("{}:{}: expected `qid<TAB>entity`", path.display(), idx + 1);
        };
        map.entry(qid.to_string())
            .or_default()
            .insert(entity.to_string());
    }
    Ok(map)
}

pub fn cmd_kappa(labels_path: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let content = std::fs::read_to_string(labels_path)
        .with_context(|| format!("reading {}", labels_path.display()))?;
    let mut counts: Vec<Vec<usize>> = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            anyhow::bail!(
                "{}:{}: expected `item_id c0 c1 ..` with at least 2 categories",
                labels_path.display(),
                idx + 1
            );
        }
        let row: Vec<usize> = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<usize>().map_err(|_| {
                    anyhow::anyhow!(
                        "{}:{}: `{f}` is not a count",
                        labels_path.display(),
                        idx + 1
                    )
                })
            })
            .collect::<anyhow::Result<_>>()?;
        counts.push(row);
    }
    let kappa = eval::fleiss_kappa(&counts)?;
    let mut out = out_writer(out)?;
    writeln!(out, "{kappa:.6}")?;
    out.flush()?;
    Ok(())
}
