//! Disorder taxonomy and the standardized-assessment catalog.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::util::normalize_words;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderCategory {
    SpeechSound,
    Language,
    SocialCommunication,
    Fluency,
    MotorSpeech,
    Voice,
}

impl DisorderCategory {
    pub const ALL: [DisorderCategory; 6] = [
        DisorderCategory::SpeechSound,
        DisorderCategory::Language,
        DisorderCategory::SocialCommunication,
        DisorderCategory::Fluency,
        DisorderCategory::MotorSpeech,
        DisorderCategory::Voice,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            DisorderCategory::SpeechSound => "Speech Sound Disorders",
            DisorderCategory::Language => "Language Disorders",
            DisorderCategory::SocialCommunication => "Social Communication",
            DisorderCategory::Fluency => "Fluency",
            DisorderCategory::MotorSpeech => "Motor Speech",
            DisorderCategory::Voice => "Voice",
        }
    }
}

/// The eleven disorder types supported for case generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderType {
    Articulation,
    Phonological,
    SpeechSoundGeneral,
    ExpressiveLanguage,
    ReceptiveLanguage,
    LanguageGeneral,
    PragmaticLanguage,
    SocialCommunication,
    Fluency,
    ChildhoodApraxia,
    Voice,
}

impl DisorderType {
    pub const ALL: [DisorderType; 11] = [
        DisorderType::Articulation,
        DisorderType::Phonological,
        DisorderType::SpeechSoundGeneral,
        DisorderType::ExpressiveLanguage,
        DisorderType::ReceptiveLanguage,
        DisorderType::LanguageGeneral,
        DisorderType::PragmaticLanguage,
        DisorderType::SocialCommunication,
        DisorderType::Fluency,
        DisorderType::ChildhoodApraxia,
        DisorderType::Voice,
    ];

    pub fn category(self) -> DisorderCategory {
        use DisorderType::*;
        match self {
            Articulation | Phonological | SpeechSoundGeneral => DisorderCategory::SpeechSound,
            ExpressiveLanguage | ReceptiveLanguage | LanguageGeneral => DisorderCategory::Language,
            PragmaticLanguage | SocialCommunication => DisorderCategory::SocialCommunication,
            Fluency => DisorderCategory::Fluency,
            ChildhoodApraxia => DisorderCategory::MotorSpeech,
            Voice => DisorderCategory::Voice,
        }
    }

    /// Name as it appears in the disorder coverage table.
    pub fn display_name(self) -> &'static str {
        use DisorderType::*;
        match self {
            Articulation => "Articulation Disorders",
            Phonological => "Phonological Disorders",
            SpeechSoundGeneral => "Speech Sound Disorder (general/mixed)",
            ExpressiveLanguage => "Expressive Language Disorders",
            ReceptiveLanguage => "Receptive Language Disorders",
            LanguageGeneral => "Language Disorders (general/mixed)",
            PragmaticLanguage => "Pragmatic Language Disorders",
            SocialCommunication => "Social Communication Disorders",
            Fluency => "Fluency Disorders",
            ChildhoodApraxia => "Childhood Apraxia of Speech",
            Voice => "Voice Disorders",
        }
    }

    /// Lowercase keywords whose presence in free text signals the disorder.
    pub fn keywords(self) -> &'static [&'static str] {
        use DisorderType::*;
        match self {
            Articulation => &[
                "articulat", "speech sound", "sound", "phoneme", "lisp", "intelligib", "pronounc",
            ],
            Phonological => &[
                "phonolog", "process", "fronting", "stopping", "cluster reduction",
                "final consonant deletion", "speech sound", "sound pattern",
            ],
            SpeechSoundGeneral => &[
                "speech sound", "articulat", "phonolog", "sound", "phoneme", "intelligib",
            ],
            ExpressiveLanguage => &[
                "expressive", "sentence", "grammar", "grammatical", "vocabulary",
                "word retrieval", "morpholog", "syntax", "formulat", "narrative", "verb",
            ],
            ReceptiveLanguage => &[
                "receptive", "comprehen", "understand", "direction", "vocabulary", "listening",
            ],
            LanguageGeneral => &[
                "language", "expressive", "receptive", "comprehen", "vocabulary", "sentence",
                "grammar", "narrative",
            ],
            PragmaticLanguage => &[
                "pragmatic", "social", "conversation", "turn-taking", "turn taking", "topic",
                "eye contact",
            ],
            SocialCommunication => &[
                "social communication", "social", "pragmatic", "peer", "conversation", "nonverbal",
            ],
            Fluency => &[
                "fluency", "fluent", "stutter", "disfluen", "repetition", "prolongation", "block",
            ],
            ChildhoodApraxia => &[
                "apraxia", "motor speech", "motor planning", "sequenc", "syllable", "motor",
            ],
            Voice => &[
                "voice", "vocal", "hoarse", "pitch", "loudness", "resonance", "breath",
            ],
        }
    }

    /// True when `text` mentions the disorder through its keyword lexicon.
    pub fn mentioned_in(self, text: &str) -> bool {
        let lower = text.to_lowercase();
        self.keywords().iter().any(|k| lower.contains(k))
    }

    pub fn instruments(self) -> &'static [Instrument] {
        AssessmentCatalog::table().instruments_for(self)
    }
}

impl fmt::Display for DisorderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown disorder type: {0:?}")]
pub struct UnknownDisorder(pub String);

impl FromStr for DisorderType {
    type Err = UnknownDisorder;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = normalize_words(s);
        let stripped = norm
            .split(' ')
            .filter(|w| *w != "disorder" && *w != "disorders")
            .collect::<Vec<_>>()
            .join(" ");
        let stripped = stripped.as_str();
        use DisorderType::*;
        let found = match stripped {
            "articulation" | "artic" => Articulation,
            "phonological" | "phonology" => Phonological,
            "speech sound" | "speech sound general" | "speech sound general mixed"
            | "ssd" | "speech sound mixed" => SpeechSoundGeneral,
            "expressive language" | "expressive" => ExpressiveLanguage,
            "receptive language" | "receptive" => ReceptiveLanguage,
            "language" | "language general" | "language general mixed" | "language mixed"
            | "mixed receptive expressive language" | "receptive expressive language"
            | "mixed language" => LanguageGeneral,
            "pragmatic language" | "pragmatic" | "pragmatics" => PragmaticLanguage,
            "social communication" | "scd" => SocialCommunication,
            "fluency" | "stuttering" | "stutter" => Fluency,
            "childhood apraxia of speech" | "childhood apraxia" | "apraxia" | "cas"
            | "apraxia of speech" => ChildhoodApraxia,
            "voice" => Voice,
            _ => {
                // snake_case identifiers as used on the wire
                let snake = stripped.replace(' ', "_");
                return DisorderType::ALL
                    .into_iter()
                    .find(|d| {
                        serde_json::to_value(d)
                            .ok()
                            .and_then(|v| v.as_str().map(|x| x == snake))
                            .unwrap_or(false)
                    })
                    .ok_or_else(|| UnknownDisorder(s.to_string()));
            }
        };
        Ok(found)
    }
}

/// A standardized instrument from the catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instrument {
    pub acronym: &'static str,
    pub full_name: &'static str,
}

impl Instrument {
    fn pattern(&self) -> &'static Regex {
        static PATTERNS: OnceLock<Vec<(&'static str, Regex)>> = OnceLock::new();
        let all = PATTERNS.get_or_init(|| {
            INSTRUMENTS
                .iter()
                .map(|inst| (inst.acronym, instrument_regex(inst)))
                .collect()
        });
        &all.iter()
            .find(|(a, _)| *a == self.acronym)
            .expect("instrument registered")
            .1
    }

    /// True when a free-form instrument name refers to this instrument.
    /// Case, whitespace, hyphenation, parenthetical long names and edition
    /// suffixes are all tolerated.
    pub fn matches_name(&self, name: &str) -> bool {
        self.pattern().is_match(&normalize_words(name))
    }
}

fn split_edition(acronym: &str) -> (String, bool) {
    // "GFTA-3" -> ("gfta", true); "CAPE-V" -> ("cape v", false)
    let norm = normalize_words(acronym);
    match norm.rsplit_once(' ') {
        Some((base, ed)) if ed.chars().all(|c| c.is_ascii_digit()) => (base.to_string(), true),
        _ => (norm, false),
    }
}

fn instrument_regex(inst: &Instrument) -> Regex {
    let (base, _) = split_edition(inst.acronym);
    let acronym = regex::escape(&base).replace(' ', " ?");
    let long = normalize_words(inst.full_name);
    let long = long
        .rsplit_once(' ')
        .filter(|(_, ed)| ed.chars().all(|c| c.is_ascii_digit()))
        .map(|(b, _)| b.to_string())
        .unwrap_or(long);
    let edition = r"(?: ?(?:\d+|[ivx]+|fifth|fourth|third|second))?";
    Regex::new(&format!(
        r"(?:^| )(?:{acronym}{edition}|{long}{edition})(?: |$)",
        long = regex::escape(&long)
    ))
    .expect("valid instrument regex")
}

pub static INSTRUMENTS: [Instrument; 10] = [
    Instrument { acronym: "GFTA-3", full_name: "Goldman-Fristoe Test of Articulation-3" },
    Instrument { acronym: "KLPA-3", full_name: "Khan-Lewis Phonological Analysis-3" },
    Instrument { acronym: "CELF-5", full_name: "Clinical Evaluation of Language Fundamentals-5" },
    Instrument { acronym: "EVT-3", full_name: "Expressive Vocabulary Test-3" },
    Instrument { acronym: "PPVT-5", full_name: "Peabody Picture Vocabulary Test-5" },
    Instrument { acronym: "CASL-2", full_name: "Comprehensive Assessment of Spoken Language-2" },
    Instrument { acronym: "SSI-4", full_name: "Stuttering Severity Instrument-4" },
    Instrument { acronym: "VMPAC", full_name: "Verbal Motor Production Assessment for Children" },
    Instrument { acronym: "CAPE-V", full_name: "Consensus Auditory-Perceptual Evaluation of Voice" },
    Instrument { acronym: "PVOS", full_name: "Pediatric Voice Outcome Survey" },
];

fn inst(acronym: &str) -> &'static Instrument {
    INSTRUMENTS
        .iter()
        .find(|i| i.acronym == acronym)
        .expect("known acronym")
}

/// A catalog entry: an instrument plus the domain it assesses for a disorder.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub instrument: &'static Instrument,
    pub domain: &'static str,
}

/// Mapping from disorder type to the instruments listed for it.
#[derive(Debug)]
pub struct AssessmentCatalog {
    entries: Vec<(DisorderType, Vec<CatalogEntry>, Vec<Instrument>)>,
}

impl AssessmentCatalog {
    pub fn table() -> &'static AssessmentCatalog {
        static CATALOG: OnceLock<AssessmentCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| {
            use DisorderType::*;
            let rows: [(DisorderType, &[&str], &str); 11] = [
                (Articulation, &["GFTA-3"], "Consonant production in words"),
                (Phonological, &["KLPA-3"], "Phonological processes and error patterns"),
                (
                    SpeechSoundGeneral,
                    &["GFTA-3", "KLPA-3"],
                    "Combined articulation and phonological assessment",
                ),
                (
                    ExpressiveLanguage,
                    &["CELF-5", "EVT-3"],
                    "Sentence formulation, word structure, expressive vocabulary, word retrieval",
                ),
                (
                    ReceptiveLanguage,
                    &["CELF-5", "PPVT-5"],
                    "Sentence comprehension, semantic relationships, receptive vocabulary",
                ),
                (
                    LanguageGeneral,
                    &["CELF-5"],
                    "Overall receptive and expressive language performance",
                ),
                (
                    PragmaticLanguage,
                    &["CASL-2"],
                    "Pragmatic language skills and social language use",
                ),
                (
                    SocialCommunication,
                    &["CASL-2"],
                    "Social communication abilities and pragmatic competence",
                ),
                (
                    Fluency,
                    &["SSI-4"],
                    "Stuttering frequency, duration, and physical concomitants",
                ),
                (
                    ChildhoodApraxia,
                    &["VMPAC"],
                    "Motor speech control and speech motor planning",
                ),
                (
                    Voice,
                    &["CAPE-V", "PVOS"],
                    "Voice quality characteristics; voice-related quality of life",
                ),
            ];
            let entries = rows
                .into_iter()
                .map(|(d, acrs, domain)| {
                    let entries: Vec<CatalogEntry> = acrs
                        .iter()
                        .map(|a| CatalogEntry { instrument: inst(a), domain })
                        .collect();
                    let insts = acrs.iter().map(|a| inst(a).clone()).collect();
                    (d, entries, insts)
                })
                .collect();
            AssessmentCatalog { entries }
        })
    }

    pub fn entries_for(&self, disorder: DisorderType) -> &[CatalogEntry] {
        self.entries
            .iter()
            .find(|(d, _, _)| *d == disorder)
            .map(|(_, e, _)| e.as_slice())
            .unwrap_or(&[])
    }

    pub fn instruments_for(&self, disorder: DisorderType) -> &[Instrument] {
        self.entries
            .iter()
            .find(|(d, _, _)| *d == disorder)
            .map(|(_, _, i)| i.as_slice())
            .unwrap_or(&[])
    }

    /// Resolves a free-form instrument name to a catalog instrument.
    pub fn identify(&self, name: &str) -> Option<&'static Instrument> {
        INSTRUMENTS.iter().find(|i| i.matches_name(name))
    }
}

/// Outcome of matching an administered instrument against a disorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InstrumentCheck {
    pub matched: bool,
    /// Set when the name resolves to no catalog instrument at all.
    pub unknown_instrument: bool,
}

/// True iff the named instrument is listed for `disorder` in the catalog.
/// Unknown instruments return `matched = false` with the warning flag set.
pub fn check_assessment_match(disorder: DisorderType, assessment_name: &str) -> InstrumentCheck {
    let catalog = AssessmentCatalog::table();
    match catalog.identify(assessment_name) {
        None => InstrumentCheck { matched: false, unknown_instrument: true },
        Some(found) => InstrumentCheck {
            matched: catalog
                .instruments_for(disorder)
                .iter()
                .any(|i| i.acronym == found.acronym),
            unknown_instrument: false,
        },
    }
}
