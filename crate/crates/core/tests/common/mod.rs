#![allow(dead_code)]

use std::cmp::Ordering;

use caseforge_core::case_model::{CaseFile, DisorderType, GradeLevel, Severity};
use caseforge_core::knowledge_base::{Chunk, Collection, DocumentMetadata, EmbeddedChunk};
use caseforge_core::orchestrator::{GroupRequest, MAX_GRADE_DISTANCE};
use caseforge_core::persistence::CaseRecord;
use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn aurora() -> CaseFile {
    CaseFile::from_json(include_str!("../fixtures/aurora.json")).unwrap()
}

pub fn sofia() -> CaseFile {
    CaseFile::from_json(include_str!("../fixtures/sofia.json")).unwrap()
}

// ---------------------------------------------------------------------------
// Chunking oracle. Works on a char vector and converts to byte offsets at the
// end, so it shares no code with the library splitter.

const SEPS: [&str; 4] = ["\n\n", "\n", ". ", " "];

fn find_all(chars: &[char], from: usize, to: usize, sep: &[char]) -> Vec<usize> {
    let mut hits = Vec::new();
    let mut i = from;
    while i + sep.len() <= to {
        if &chars[i..i + sep.len()] == sep {
            hits.push(i + sep.len());
            i += sep.len();
        } else {
            i += 1;
        }
    }
    hits
}

fn pieces_for(chars: &[char], from: usize, to: usize, level: usize) -> (Vec<(usize, usize)>, Option<usize>) {
    for (lvl, sep) in SEPS.iter().enumerate().skip(level) {
        let sep: Vec<char> = sep.chars().collect();
        let ends = find_all(chars, from, to, &sep);
        if ends.is_empty() {
            continue;
        }
        let mut out = Vec::new();
        let mut s = from;
        for e in ends {
            out.push((s, e));
            s = e;
        }
        if s < to {
            out.push((s, to));
        }
        return (out, Some(lvl + 1));
    }
    ((from..to).map(|i| (i, i + 1)).collect(), None)
}

fn merge_window(pieces: &[(usize, usize)], size: usize, overlap: usize, out: &mut Vec<(usize, usize)>) {
    let len = |p: &(usize, usize)| p.1 - p.0;
    let mut lo = 0;
    let mut total = 0;
    for hi in 0..pieces.len() {
        let n = len(&pieces[hi]);
        if lo < hi && total + n > size {
            out.push((pieces[lo].0, pieces[hi - 1].1));
            while total > overlap || (total > 0 && total + n > size) {
                total -= len(&pieces[lo]);
                lo += 1;
            }
        }
        total += n;
    }
    if lo < pieces.len() {
        out.push((pieces[lo].0, pieces[pieces.len() - 1].1));
    }
}

fn oracle_rec(chars: &[char], from: usize, to: usize, level: usize, size: usize, overlap: usize, out: &mut Vec<(usize, usize)>) {
    let (pieces, next) = pieces_for(chars, from, to, level);
    let mut run: Vec<(usize, usize)> = Vec::new();
    for p in pieces {
        if p.1 - p.0 < size {
            run.push(p);
        } else {
            merge_window(&run, size, overlap, out);
            run.clear();
            match next {
                Some(l) => oracle_rec(chars, p.0, p.1, l, size, overlap, out),
                None => out.push(p),
            }
        }
    }
    merge_window(&run, size, overlap, out);
}

/// Reference recursive splitter returning byte ranges.
pub fn oracle_split(text: &str, size: usize, overlap: usize) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut byte_at: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    byte_at.push(text.len());
    let mut out = Vec::new();
    if !chars.is_empty() {
        oracle_rec(&chars, 0, chars.len(), 0, size, overlap, &mut out);
    }
    out.into_iter().map(|(s, e)| (byte_at[s], byte_at[e])).collect()
}

/// Mixed-separator text of roughly `target` bytes. Includes long runs with no
/// separator and multibyte characters.
pub fn mixed_corpus(seed: u64, target: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = ["speech", "goal", "trial", "the", "student", "niño", "café", "produce", "sound", "r", "lisp", "señal"];
    let mut s = String::new();
    while s.len() < target {
        match rng.random_range(0..40) {
            0 => s.push_str("\n\n"),
            1 | 2 => s.push('\n'),
            3..=6 => s.push_str(". "),
            7 => {
                let n = rng.random_range(200..2600);
                for _ in 0..n {
                    s.push(*['a', 'é', 'z', '-', 'ß'].choose(&mut rng).unwrap());
                }
            }
            _ => {
                s.push_str(words.choose(&mut rng).unwrap());
                s.push(' ');
            }
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Retrieval helpers.

pub fn unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

pub fn embedded(doc: usize, index: usize, vector: Vec<f32>) -> EmbeddedChunk {
    let doc_id = format!("doc-{doc:03}");
    EmbeddedChunk {
        chunk: Chunk { doc_id: doc_id.clone(), chunk_index: index, text: format!("chunk {doc}/{index}"), char_span: (0, 11) },
        vector,
        metadata: DocumentMetadata { doc_id, collection: Collection::ALL[doc % 4], source_type: "synthetic".into(), date: None },
    }
}

fn dot64(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum()
}

/// Brute-force top-k ids ordered by similarity desc, then (doc_id, chunk_index).
pub fn brute_force_top_k(chunks: &[EmbeddedChunk], query: &[f32], k: usize) -> Vec<(String, usize)> {
    let qn = dot64(query, query).sqrt();
    let mut scored: Vec<(f64, &EmbeddedChunk)> = chunks
        .iter()
        .map(|c| (dot64(query, &c.vector) / (qn * dot64(&c.vector, &c.vector).sqrt()), c))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.chunk.doc_id.cmp(&b.1.chunk.doc_id))
            .then(a.1.chunk.chunk_index.cmp(&b.1.chunk.chunk_index))
    });
    scored.into_iter().take(k).map(|(_, c)| (c.chunk.doc_id.clone(), c.chunk.chunk_index)).collect()
}

// ---------------------------------------------------------------------------
// Synthetic stored cases.

pub fn base_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 1, 6, 8, 0, 0).unwrap()
}

/// `n` records with random grade, severity and one or two disorders. Several
/// share a timestamp so ordering falls back to the case id.
pub fn synthetic_records(n: usize, seed: u64) -> Vec<CaseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = aurora();
    let severities = [Severity::Mild, Severity::Moderate, Severity::Severe];
    (0..n)
        .map(|i| {
            let grade = GradeLevel::from_index(rng.random_range(0..GradeLevel::COUNT)).unwrap();
            let first = *DisorderType::ALL.choose(&mut rng).unwrap();
            let mut disorders = vec![first];
            if rng.random_bool(0.3) {
                let second = *DisorderType::ALL.choose(&mut rng).unwrap();
                if second != first {
                    disorders.push(second);
                }
            }
            let mut case = template.clone();
            case.name = format!("Student {i}");
            case.grade = grade.display_name();
            if rng.random_bool(0.1) {
                case.assessment_results.clear();
            } else {
                case.assessment_results[0].severity = severities.choose(&mut rng).unwrap().as_str().to_string();
            }
            CaseRecord {
                case_id: format!("case-{:04}", rng.random_range(0..10_000)) + &format!("-{i}"),
                case,
                disorders,
                provenance: None,
                created_at: base_time() + Duration::minutes(rng.random_range(0..(n as i64 / 3).max(1))),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Group matching oracle.

fn family(d: DisorderType) -> u8 {
    use DisorderType::*;
    match d {
        Articulation | Phonological | SpeechSoundGeneral => 0,
        ExpressiveLanguage | ReceptiveLanguage | LanguageGeneral => 1,
        PragmaticLanguage | SocialCommunication => 2,
        Fluency => 3,
        ChildhoodApraxia => 4,
        Voice => 5,
    }
}

fn pair_ok(a: DisorderType, b: DisorderType) -> bool {
    use DisorderType::*;
    let linked = |x, y| {
        matches!(
            (x, y),
            (Articulation, ExpressiveLanguage) | (Phonological, ExpressiveLanguage) | (Fluency, PragmaticLanguage)
        )
    };
    family(a) == family(b) || linked(a, b) || linked(b, a)
}

fn severity_steps(a: Severity, b: Severity) -> usize {
    let r = |s| match s {
        Severity::Mild => 0i32,
        Severity::Moderate => 1,
        Severity::Severe => 2,
    };
    (r(a) - r(b)).unsigned_abs() as usize
}

/// Eligible case ids in rank order, computed by a linear scan.
pub fn group_oracle(records: &[CaseRecord], req: &GroupRequest) -> Vec<String> {
    let target = req.target_grade.index() as i64;
    let mut hits: Vec<(usize, usize, DateTime<Utc>, String)> = Vec::new();
    for r in records {
        let Ok(grade) = r.case.grade.parse::<GradeLevel>() else { continue };
        let gd = (grade.index() as i64 - target).unsigned_abs() as usize;
        if gd > MAX_GRADE_DISTANCE {
            continue;
        }
        if !req.disorders.is_empty() && !r.disorders.iter().any(|&a| req.disorders.iter().any(|&b| pair_ok(a, b))) {
            continue;
        }
        let sd = match req.severity {
            None => 0,
            Some(want) => {
                let Some(have) = r.case.assessment_results.first().and_then(|a| Severity::parse(&a.severity)) else {
                    continue;
                };
                severity_steps(have, want)
            }
        };
        if sd > req.severity_tolerance {
            continue;
        }
        hits.push((gd, sd, r.created_at, r.case_id.clone()));
    }
    hits.sort();
    hits.into_iter().map(|h| h.3).collect()
}
