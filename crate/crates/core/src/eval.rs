//! Graded-relevance evaluation: NDCG/P@k/MRR/MAP, paired t-test, Fleiss'
//! kappa, candidate-pool construction, and the run / qrels file formats.
//!
//! Qrels file: `qid 0 attribute grade`, whitespace-separated, grades in
//! {0, 1, 2}. Run file: `qid Q0 attribute rank score tag` with scores
//! serialized to 6 decimal places. Unjudged attributes count as grade 0;
//! NDCG uses exponential gain `2^g - 1` with `log2(rank + 1)` discounts.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::linker::QueryAnnotation;
use crate::text;

/// Graded judgments: (query, attribute) -> grade in {0, 1, 2}.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    grades: BTreeMap<String, BTreeMap<String, u8>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, qid: &str, attribute: &str, grade: u8) -> Result<()> {
        if grade > 2 {
            return Err(Error::Evaluation(format!(
                "grade {grade} for ({qid}, {attribute}) outside {{0, 1, 2}}"
            )));
        }
        self.grades
            .entry(qid.to_string())
            .or_default()
            .insert(attribute.to_string(), grade);
        Ok(())
    }

    pub fn grade(&self, qid: &str, attribute: &str) -> Option<u8> {
        self.grades.get(qid).and_then(|m| m.get(attribute)).copied()
    }

    pub fn contains_query(&self, qid: &str) -> bool {
        self.grades.contains_key(qid)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.grades.keys().map(String::as_str)
    }

    pub fn query_count(&self) -> usize {
        self.grades.len()
    }

    /// All judged grades of a query (used as the basis of the ideal
    /// ranking).
    pub fn judged_grades(&self, qid: &str) -> Vec<u8> {
        self.grades
            .get(qid)
            .map(|m| m.values().copied().collect())
            .unwrap_or_default()
    }
}

/// Per-query ranked attributes with scores, plus the run tag.
#[derive(Debug, Clone, PartialEq)]
pub struct RunList {
    pub tag: String,
    rankings: BTreeMap<String, Vec<(String, f64)>>,
}

impl RunList {
    pub fn new(tag: impl Into<String>) -> Self {
        RunList {
            tag: tag.into(),
            rankings: BTreeMap::new(),
        }
    }

    /// Store a query's ranking. Attributes must be unique and scores
    /// non-increasing.
    pub fn set_ranking(&mut self, qid: &str, ranked: Vec<(String, f64)>) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (attr, _) in &ranked {
            if !seen.insert(attr.as_str()) {
                return Err(Error::Evaluation(format!(
                    "duplicate attribute `{attr}` in ranking of `{qid}`"
                )));
            }
        }
        if ranked.windows(2).any(|w| w[0].1 < w[1].1) {
            return Err(Error::Evaluation(format!(
                "scores of `{qid}` are not non-increasing"
            )));
        }
        self.rankings.insert(qid.to_string(), ranked);
        Ok(())
    }

    pub fn ranking(&self, qid: &str) -> Option<&[(String, f64)]> {
        self.rankings.get(qid).map(Vec::as_slice)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.rankings.keys().map(String::as_str)
    }

    pub fn query_count(&self) -> usize {
        self.rankings.len()
    }
}

/// NDCG@k / P@k / MRR / MAP for one query (or their mean).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QueryMetrics {
    pub ndcg: f64,
    pub precision: f64,
    pub rr: f64,
    pub ap: f64,
}

/// Metric values per query plus the mean over all judged queries.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub k: usize,
    pub per_query: BTreeMap<String, QueryMetrics>,
    pub mean: QueryMetrics,
}

fn gain(grade: u8) -> f64 {
    (1u64 << grade) as f64 - 1.0
}

fn dcg(grades: impl Iterator<Item = u8>, k: usize) -> f64 {
    grades
        .take(k)
        .enumerate()
        .map(|(i, g)| gain(g) / ((i + 2) as f64).log2())
        .sum()
}

/// NDCG@k for a ranked grade list against the full judged grade set.
pub fn ndcg_from_grades(ranked: &[u8], judged: &[u8], k: usize) -> f64 {
    let mut ideal: Vec<u8> = judged.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(ideal.into_iter(), k);
    if idcg == 0.0 {
        return 0.0;
    }
    dcg(ranked.iter().copied(), k) / idcg
}

/// All four metrics from a ranked grade list. `judged` is every judged
/// grade of the query; relevance is binarized at grade >= 1 for P/MRR/MAP.
pub fn metrics_from_grades(ranked: &[u8], judged: &[u8], k: usize) -> QueryMetrics {
    let ndcg = ndcg_from_grades(ranked, judged, k);
    let precision = ranked.iter().take(k).filter(|&&g| g >= 1).count() as f64 / k as f64;
    let rr = ranked
        .iter()
        .position(|&g| g >= 1)
        .map_or(0.0, |pos| 1.0 / (pos + 1) as f64);
    let total_relevant = judged.iter().filter(|&&g| g >= 1).count();
    let ap = if total_relevant == 0 {
        0.0
    } else {
        let mut hits = 0usize;
        let mut sum = 0.0;
        for (i, &g) in ranked.iter().enumerate() {
            if g >= 1 {
                hits += 1;
                sum += hits as f64 / (i + 1) as f64;
            }
        }
        sum / total_relevant as f64
    };
    QueryMetrics {
        ndcg,
        precision,
        rr,
        ap,
    }
}

/// Evaluate a run against qrels. Every run query must be judged; judged
/// queries missing from the run score zero and still count in the mean.
pub fn compute_metrics(run: &RunList, qrels: &Qrels, k: usize) -> Result<MetricsReport> {
    if k == 0 {
        return Err(Error::Evaluation("k must be positive".into()));
    }
    for qid in run.query_ids() {
        if !qrels.contains_query(qid) {
            return Err(Error::Evaluation(format!(
                "run query `{qid}` does not appear in qrels"
            )));
        }
    }
    let mut per_query = BTreeMap::new();
    let mut sum = QueryMetrics::default();
    for qid in qrels.query_ids() {
        let judged = qrels.judged_grades(qid);
        let ranked: Vec<u8> = run
            .ranking(qid)
            .map(|r| {
                r.iter()
                    .map(|(attr, _)| qrels.grade(qid, attr).unwrap_or(0))
                    .collect()
            })
            .unwrap_or_default();
        let m = metrics_from_grades(&ranked, &judged, k);
        sum.ndcg += m.ndcg;
        sum.precision += m.precision;
        sum.rr += m.rr;
        sum.ap += m.ap;
        per_query.insert(qid.to_string(), m);
    }
    let n = per_query.len().max(1) as f64;
    Ok(MetricsReport {
        k,
        per_query,
        mean: QueryMetrics {
            ndcg: sum.ndcg / n,
            precision: sum.precision / n,
            rr: sum.rr / n,
            ap: sum.ap / n,
        },
    })
}

/// Two-tailed paired t-test result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub significant: bool,
}

/// Paired two-tailed t-test over per-query metric values. A constant zero
/// difference gives (t = 0, p = 1); a constant nonzero difference gives
/// t = +/-inf, p = 0.
pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Evaluation(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Evaluation("need at least 2 pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let t = if sd == 0.0 {
        if mean == 0.0 {
            0.0
        } else if mean > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        mean / (sd / (n as f64).sqrt())
    };
    let p = student_t_two_tailed_p(t, (n - 1) as f64);
    Ok(TTest {
        t,
        p,
        significant: p < alpha,
    })
}

/// Two-tailed p-value of Student's t with `dof` degrees of freedom:
/// `I_x(dof/2, 1/2)` with `x = dof / (dof + t^2)`.
pub fn student_t_two_tailed_p(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))
}

// Lanczos approximation (g = 7, 9 coefficients).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + 7.5;
        let mut a = COEF[0];
        for (i, &c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

/// Regularized incomplete beta function `I_x(a, b)` by the continued
/// fraction of the incomplete beta, converged to 1e-12.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

// Modified Lentz evaluation of the continued fraction for the incomplete
// beta (Numerical Recipes form).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TOLERANCE: f64 = 1e-12;
    const TINY: f64 = 1e-300;
    const MAX_ITER: usize = 500;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < TOLERANCE {
            break;
        }
    }
    h
}

/// Fleiss' kappa over an items x categories matrix of rating counts. Every
/// item must carry the same number of ratings (>= 2).
pub fn fleiss_kappa(counts: &[Vec<usize>]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::Evaluation("no items".into()));
    }
    let categories = counts[0].len();
    if categories == 0 {
        return Err(Error::Evaluation("no categories".into()));
    }
    let n: usize = counts[0].iter().sum();
    if n < 2 {
        return Err(Error::Evaluation(format!(
            "need at least 2 ratings per item, got {n}"
        )));
    }
    for (i, row) in counts.iter().enumerate() {
        if row.len() != categories {
            return Err(Error::Evaluation(format!(
                "item {i} has {} categories, expected {categories}",
                row.len()
            )));
        }
        let row_n: usize = row.iter().sum();
        if row_n != n {
            return Err(Error::Evaluation(format!(
                "item {i} has {row_n} ratings, expected {n}"
            )));
        }
    }
    let items = counts.len() as f64;
    let nf = n as f64;
    let mut p_bar = 0.0;
    let mut category_totals = vec![0.0f64; categories];
    for row in counts {
        let sq: f64 = row.iter().map(|&c| (c * c) as f64).sum();
        p_bar += (sq - nf) / (nf * (nf - 1.0));
        for (j, &c) in row.iter().enumerate() {
            category_totals[j] += c as f64;
        }
    }
    p_bar /= items;
    let pe_bar: f64 = category_totals
        .iter()
        .map(|&total| {
            let p = total / (items * nf);
            p * p
        })
        .sum();
    if (1.0 - pe_bar).abs() < 1e-15 {
        if (1.0 - p_bar).abs() < 1e-15 {
            return Ok(1.0);
        }
        return Err(Error::Evaluation(
            "expected agreement is 1 but observed agreement is not".into(),
        ));
    }
    Ok((p_bar - pe_bar) / (1.0 - pe_bar))
}

/// Candidate pools: for each query, the attributes of its linked entities
/// whose value names a relevant entity of the query. Value-to-entity
/// matching is exact after normalization (underscores and spaces unified).
pub fn build_candidate_pool(
    kb: &KnowledgeBase,
    annotations: &[QueryAnnotation],
    relevant_entities: &BTreeMap<String, std::collections::BTreeSet<String>>,
) -> BTreeMap<String, std::collections::BTreeSet<String>> {
    let mut pools = BTreeMap::new();
    for ann in annotations {
        let relevant_keys: std::collections::BTreeSet<String> = relevant_entities
            .get(&ann.query_id)
            .map(|set| set.iter().map(|id| text::normalized_key(id)).collect())
            .unwrap_or_default();
        let mut pool = std::collections::BTreeSet::new();
        if !relevant_keys.is_empty() {
            for entity in ann.linked_entities() {
                let Some(ent) = kb.entity(entity) else {
                    log::warn!("linked entity `{entity}` not in KB; skipped in pooling");
                    continue;
                };
                for pair in ent.pairs() {
                    if relevant_keys.contains(&text::normalized_key(&pair.value)) {
                        pool.insert(pair.attribute.clone());
                    }
                }
            }
        }
        pools.insert(ann.query_id.clone(), pool);
    }
    pools
}

/// Parse a qrels file (`qid 0 attribute grade`). Duplicate judgments are
/// rejected.
pub fn read_qrels(path: &Path) -> Result<Qrels> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut qrels = Qrels::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "expected `qid 0 attribute grade`, found {} fields",
                    fields.len()
                ),
            ));
        }
        let grade: u8 = fields[3]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "grade is not an integer"))?;
        if grade > 2 {
            return Err(Error::parse(
                path,
                lineno,
                format!("grade {grade} outside {{0, 1, 2}}"),
            ));
        }
        if qrels.grade(fields[0], fields[2]).is_some() {
            return Err(Error::parse(
                path,
                lineno,
                format!("duplicate judgment for ({}, {})", fields[0], fields[2]),
            ));
        }
        qrels.insert(fields[0], fields[2], grade).unwrap();
    }
    Ok(qrels)
}

pub fn write_qrels(qrels: &Qrels, out: &mut impl Write) -> std::io::Result<()> {
    for qid in qrels.query_ids() {
        for (attr, grade) in &qrels.grades[qid] {
            writeln!(out, "{qid} 0 {attr} {grade}")?;
        }
    }
    Ok(())
}

/// Parse a run file (`qid Q0 attribute rank score tag`). Ranks must be
/// 1..n per query in file order, attributes unique, scores non-increasing,
/// and the tag consistent.
pub fn read_run(path: &Path) -> Result<RunList> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut tag: Option<String> = None;
    let mut rankings: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "expected `qid Q0 attribute rank score tag`, found {} fields",
                    fields.len()
                ),
            ));
        }
        let rank: usize = fields[3]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "rank is not an integer"))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "score is not a number"))?;
        match &tag {
            None => tag = Some(fields[5].to_string()),
            Some(t) if t != fields[5] => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("mixed run tags `{t}` and `{}`", fields[5]),
                ));
            }
            _ => {}
        }
        let ranking = rankings.entry(fields[0].to_string()).or_default();
        if rank != ranking.len() + 1 {
            return Err(Error::parse(
                path,
                lineno,
                format!("rank {rank} out of order (expected {})", ranking.len() + 1),
            ));
        }
        ranking.push((fields[2].to_string(), score));
    }
    let mut run = RunList::new(tag.unwrap_or_else(|| "run".to_string()));
    for (qid, ranking) in rankings {
        run.set_ranking(&qid, ranking)
            .map_err(|e| Error::Evaluation(format!("{}: {e}", path.display())))?;
    }
    Ok(run)
}

/// Write a run file; scores at 6 decimal places.
pub fn write_run(run: &RunList, out: &mut impl Write) -> std::io::Result<()> {
    for qid in run.query_ids() {
        for (i, (attr, score)) in run.ranking(qid).unwrap().iter().enumerate() {
            writeln!(out, "{qid} Q0 {attr} {} {score:.6} {}", i + 1, run.tag)?;
        }
    }
    Ok(())
}
