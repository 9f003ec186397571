mod common;

use caseforge_core::case_model::{DisorderType, GradeLevel, Severity};
use caseforge_core::knowledge_base::{split_ranges, ChunkOptions, MetadataFilter, VectorStore};
use caseforge_core::orchestrator::{largest_remainder, match_group_candidates, CompatibilityMatrix, GroupRequest};
use caseforge_core::persistence::{CaseFilter, CaseStore};
use caseforge_core::transcript::{
    compute_language_metrics, deidentify, detect_disfluencies, words, DisfluencyOptions, Transcript,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn pii_text() -> impl Strategy<Value = String> {
    let parts = prop::sample::select(vec![
        "call 555-123-4567",
        "Maria Lopez",
        "on March 3, 2025",
        "at 12 Elm Street",
        "write ana@example.com",
        "Dr. Smith",
        "[NAME]",
        "the boy said",
        "2024-05-01",
        "Ms. ",
        "ran",
        "Liam",
    ]);
    prop::collection::vec(parts, 0..12).prop_map(|v| v.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chunker_matches_reference(seed in 0u64..1000, size in 20usize..400, frac in 0.0f64..0.9, len in 0usize..6000) {
        let text = mixed_corpus(seed, len);
        let overlap = (size as f64 * frac) as usize;
        let got = split_ranges(&text, ChunkOptions { chunk_size: size, overlap }).unwrap();
        prop_assert_eq!(&got, &oracle_split(&text, size, overlap));
        for &(s, e) in &got {
            prop_assert!(text[s..e].chars().count() <= size);
        }
        if !text.is_empty() {
            prop_assert_eq!(got[0].0, 0);
            prop_assert_eq!(got.last().unwrap().1, text.len());
            for w in got.windows(2) {
                prop_assert!(w[1].0 <= w[0].1 && w[1].0 > w[0].0);
            }
        }
    }

    #[test]
    fn retrieval_matches_brute_force(seed in 0u64..500, n in 1usize..60, k in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chunks: Vec<_> = (0..n).map(|i| embedded(i % 7, i, unit_vector(8, &mut rng))).collect();
        let store = VectorStore::in_memory();
        store.index(chunks.clone()).unwrap();
        let q = unit_vector(8, &mut rng);
        let got: Vec<(String, usize)> = store
            .retrieve(&q, k, &MetadataFilter::default())
            .unwrap()
            .into_iter()
            .map(|r| (r.embedded_chunk.chunk.doc_id, r.embedded_chunk.chunk.chunk_index))
            .collect();
        prop_assert_eq!(got, brute_force_top_k(&chunks, &q, k));
    }

    #[test]
    fn deidentify_idempotent_and_disjoint(text in pii_text()) {
        let once = deidentify(&text);
        for w in once.log.windows(2) {
            prop_assert!(w[0].span.1 <= w[1].span.0);
        }
        for r in &once.log {
            prop_assert!(r.span.0 < r.span.1 && r.span.1 <= text.len());
        }
        let twice = deidentify(&once.text);
        prop_assert_eq!(&twice.text, &once.text);
        prop_assert!(twice.log.is_empty());
    }

    #[test]
    fn language_metric_bounds(utts in prop::collection::vec("[a-z]{1,6}( [a-z]{1,6}){0,8}[.!?]?", 1..8)) {
        let texts: Vec<&str> = utts.iter().map(String::as_str).collect();
        let m = compute_language_metrics(&Transcript::from_texts(&texts)).unwrap();
        prop_assert!(m.mlu_approx >= 1.0);
        prop_assert!(m.sentences >= m.utterances);
        prop_assert!(m.avg_sentence_length <= m.mlu_approx + 1e-12);
        prop_assert_eq!(m.words, texts.iter().map(|t| words(t).len()).sum::<usize>());
    }

    #[test]
    fn disfluency_counts_bounded(utts in prop::collection::vec("([a-z]-){0,3}[a-z]{1,5}( [a-z]{1,5}| \\[block\\]| \\(1\\.5s\\)){0,5}", 1..8)) {
        let texts: Vec<&str> = utts.iter().map(String::as_str).collect();
        let t = Transcript::from_texts(&texts);
        let c = detect_disfluencies(&t, &DisfluencyOptions { count_timestamp_gaps: false, ..DisfluencyOptions::default() });
        let tokens: usize = texts.iter().map(|t| t.split_whitespace().count()).sum();
        prop_assert!(c.sound_repetitions + c.syllable_repetitions + c.prolongations + c.blocks <= tokens);
    }

    #[test]
    fn apportionment_sums_and_stays_near_quota(ws in prop::collection::vec(0.0f64..1.0, 1..8), count in 0usize..200) {
        prop_assume!(ws.iter().sum::<f64>() > 1e-6);
        let alloc = largest_remainder(&ws, count);
        prop_assert_eq!(alloc.iter().sum::<usize>(), count);
        let total: f64 = ws.iter().sum();
        for (a, w) in alloc.iter().zip(&ws) {
            let quota = w / total * count as f64;
            prop_assert!((*a as f64 - quota).abs() < 1.0 + 1e-9, "{} vs quota {}", a, quota);
        }
    }

    #[test]
    fn store_search_equals_scan(seed in 0u64..200, d in prop::option::of(0usize..11), lo in 0usize..14, span in 0usize..14, s in prop::option::of(0usize..3)) {
        let records = synthetic_records(40, seed);
        let store = CaseStore::in_memory().unwrap();
        for r in &records {
            store.save_case(r).unwrap();
        }
        let f = CaseFilter {
            disorder: d.map(|i| DisorderType::ALL[i]),
            grade_min: GradeLevel::from_index(lo),
            grade_max: GradeLevel::from_index((lo + span).min(13)),
            severity: s.map(|i| [Severity::Mild, Severity::Moderate, Severity::Severe][i]),
            model_id: None,
        };
        let got: Vec<String> = store.search_cases(&f).unwrap().into_iter().map(|r| r.case_id).collect();
        let mut want: Vec<_> = records.iter().filter(|r| f.accepts(r)).collect();
        want.sort_by(|a, b| (a.created_at, &a.case_id).cmp(&(b.created_at, &b.case_id)));
        prop_assert_eq!(got, want.into_iter().map(|r| r.case_id.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn group_match_equals_reference(seed in 0u64..200, grade in 0usize..14, size in 2usize..=4, d in prop::collection::vec(0usize..11, 0..3), s in prop::option::of(0usize..3), tol in 0usize..3) {
        let records = synthetic_records(30, seed);
        let store = CaseStore::in_memory().unwrap();
        for r in &records {
            store.save_case(r).unwrap();
        }
        let disorders: Vec<DisorderType> = d.into_iter().map(|i| DisorderType::ALL[i]).collect();
        let mut req = GroupRequest::new(GradeLevel::from_index(grade).unwrap(), size, &disorders);
        req.severity = s.map(|i| [Severity::Mild, Severity::Moderate, Severity::Severe][i]);
        req.severity_tolerance = tol;
        let got = match_group_candidates(&store, &req, &CompatibilityMatrix::default()).unwrap();
        let ids: Vec<String> = got.candidates.iter().map(|r| r.case_id.clone()).collect();
        let want = group_oracle(&records, &req);
        prop_assert_eq!(got.shortfall, size.saturating_sub(want.len()));
        prop_assert_eq!(ids, want);
    }
}
