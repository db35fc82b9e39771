//! Ranking implementations against independent brute-force scorers on
//! random small corpora.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use attrank::baselines::{self, Field};
use attrank::mrf::{self, MrfParams};
use attrank::text;

fn random_params(rng: &mut ChaCha8Rng) -> MrfParams {
    let a: f64 = rng.gen_range(0.0..1.0);
    let b: f64 = rng.gen_range(0.0..1.0);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    MrfParams::new(
        lo,
        hi - lo,
        1.0 - hi,
        rng.gen_range(0.0..=1.0),
        rng.gen_range(0.0..=1.0),
    )
    .unwrap()
}

#[test]
fn mrf_matches_brute_force_on_random_kbs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    for case in 0..80 {
        let kb = common::random_kb(&mut rng);
        let store = common::random_store(&mut rng);
        let ann = common::random_annotation(&mut rng, &kb, &format!("q{case}"));
        let params = random_params(&mut rng);

        let ranked = mrf::rank_attributes_mrf(&kb, &store, &ann, &params, usize::MAX).unwrap();
        let expected = common::bf_rank_attributes(&kb, &store, &ann, &params);
        assert_eq!(ranked.len(), expected.len(), "case {case}");
        for ((a, s), (ea, es)) in ranked.iter().zip(&expected) {
            assert_eq!(a, ea, "case {case}: order differs");
            assert!((s - es).abs() <= 1e-10, "case {case}: {a}: {s} vs {es}");
        }

        // candidate soundness: every attribute occurs in a linked entity
        for (a, _) in &ranked {
            let in_linked = ann.linked_entities().iter().any(|e| {
                kb.entity(e)
                    .map(|ent| ent.pairs().iter().any(|p| &p.attribute == a))
                    .unwrap_or(false)
            });
            assert!(in_linked, "case {case}: {a} not in any linked entity");
        }
    }
}

#[test]
fn bm25_matches_brute_force_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB25);
    for case in 0..80 {
        let kb = common::random_kb(&mut rng);
        let index = baselines::build_index(&kb).unwrap();
        let docs = common::raw_docs(&kb);
        let k1 = rng.gen_range(0.0..2.0);
        let b = rng.gen_range(0.0..=1.0);
        let query: Vec<String> = (0..rng.gen_range(1..=3))
            .map(|_| common::VALUE_POOL[rng.gen_range(0..common::VALUE_POOL.len())].to_string())
            .collect();

        let ranked = baselines::bm25_rank(&index, &query, k1, b, usize::MAX).unwrap();
        let expected = common::bf_bm25(&docs, &query, k1, b);
        assert_eq!(ranked.len(), expected.len(), "case {case}");
        for sd in &ranked {
            let key = (sd.doc.entity.clone(), sd.doc.attribute.clone());
            let es = expected
                .get(&key)
                .unwrap_or_else(|| panic!("case {case}: missing {key:?}"));
            assert_eq!(sd.score, *es, "case {case}: {key:?} differs");
        }
    }
}

#[test]
fn lm_and_mlm_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A);
    for case in 0..80 {
        let kb = common::random_kb(&mut rng);
        let index = baselines::build_index(&kb).unwrap();
        let docs = common::raw_docs(&kb);
        let mu = rng.gen_range(1.0..3000.0);
        let w_title = rng.gen_range(0.0..=1.0);
        let query: Vec<String> = (0..rng.gen_range(1..=3))
            .map(|_| {
                if rng.gen_bool(0.8) {
                    common::VALUE_POOL[rng.gen_range(0..common::VALUE_POOL.len())].to_string()
                } else {
                    "zzz".to_string() // zero collection frequency
                }
            })
            .collect();

        let ranked = baselines::lm_rank(&index, &query, mu, usize::MAX).unwrap();
        let expected = common::bf_lm(&docs, &query, mu);
        assert_eq!(ranked.len(), expected.len(), "case {case}");
        for sd in &ranked {
            let key = (sd.doc.entity.clone(), sd.doc.attribute.clone());
            let es = expected[&key];
            assert!(
                (sd.score - es).abs() <= 1e-10,
                "case {case}: lm {key:?}: {} vs {es}",
                sd.score
            );
        }

        let ranked =
            baselines::mlm_rank(&index, &query, w_title, 1.0 - w_title, mu, usize::MAX).unwrap();
        let expected = common::bf_mlm(&docs, &query, w_title, 1.0 - w_title, mu);
        assert_eq!(ranked.len(), expected.len(), "case {case}");
        for sd in &ranked {
            let key = (sd.doc.entity.clone(), sd.doc.attribute.clone());
            let es = expected[&key];
            assert!(
                (sd.score - es).abs() <= 1e-10,
                "case {case}: mlm {key:?}: {} vs {es}",
                sd.score
            );
        }
    }
}

#[test]
fn index_statistics_match_raw_documents() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1DE);
    for _ in 0..20 {
        let kb = common::random_kb(&mut rng);
        let index = baselines::build_index(&kb).unwrap();
        let docs = common::raw_docs(&kb);
        assert_eq!(index.doc_count(), docs.len());
        for (i, doc) in docs.iter().enumerate() {
            assert_eq!(index.docs()[i].entity, doc.entity);
            assert_eq!(index.docs()[i].attribute, doc.attribute);
            assert_eq!(index.field(Field::Title).doc_length(i), doc.title.len());
            assert_eq!(index.field(Field::Content).doc_length(i), doc.content.len());
            assert_eq!(
                index.field(Field::CatchAll).doc_length(i),
                doc.catchall.len()
            );
        }
        // collection term frequencies agree on a few probe tokens
        for probe in ["mary", "spouse", "place", "zzz"] {
            let cf: u64 = docs
                .iter()
                .map(|d| d.catchall.iter().filter(|t| *t == probe).count() as u64)
                .sum();
            assert_eq!(index.field(Field::CatchAll).collection_tf(probe), cf);
        }
    }
}

#[test]
fn mrf_run_emission_is_deterministic() {
    let kb = common::mini_kb();
    let store = attrank::embedding::WordVectorStore::from_vectors(
        2,
        vec![("spouse", vec![1.0, 0.0]), ("wife", vec![0.8, 0.6])],
    )
    .unwrap();
    let ann = common::annotation("q1", "the wife of lincoln", &[("Lincoln", 3, 4)]);
    let params = MrfParams::default();

    let mut bytes_a = Vec::new();
    let mut bytes_b = Vec::new();
    for bytes in [&mut bytes_a, &mut bytes_b] {
        let mut run = attrank::eval::RunList::new("mrf");
        let ranked = mrf::rank_attributes_mrf(&kb, &store, &ann, &params, 5).unwrap();
        run.set_ranking(&ann.query_id, ranked).unwrap();
        attrank::eval::write_run(&run, bytes).unwrap();
    }
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b);
}

#[test]
fn tokenizer_shared_by_index_and_oracle() {
    // a camelCase attribute name lands in the title field decomposed
    let kb = common::mini_kb();
    let index = baselines::build_index(&kb).unwrap();
    assert!(index.field(Field::Title).postings("death").is_some());
    assert!(index.field(Field::Title).postings("place").is_some());
    assert_eq!(text::tokenize("deathPlace"), ["death", "place"]);
}
