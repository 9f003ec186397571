//! Deterministic case synthesis for the fixture provider.
//!
//! Builds a complete, internally consistent case file from the prompt
//! bindings, seeded by the request digest, so that offline pipelines have
//! realistic payloads to validate and score.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::case_model::{
    expected_percentile, AnnualGoal, AssessmentCatalog, AssessmentResult, CaseFile, DisorderType,
    GradeLevel, SessionNote, Severity,
};

/// `Key: value` fields recognised in a population description.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationFields {
    pub name: Option<String>,
    pub gender: Option<String>,
    pub severity: Option<Severity>,
    pub background: Option<String>,
    pub setting: Option<String>,
}

static FIELD: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?im)\b(name|gender|severity|cultural background|background|setting)\s*:\s*([^;\n]+)").unwrap()
});

impl PopulationFields {
    pub fn parse(spec: &str) -> Self {
        let mut out = PopulationFields::default();
        for c in FIELD.captures_iter(spec) {
            let value = c[2].trim().trim_end_matches('.').trim().to_string();
            if value.is_empty() {
                continue;
            }
            match c[1].to_ascii_lowercase().as_str() {
                "name" => out.name = Some(value),
                "gender" => out.gender = Some(value),
                "severity" => out.severity = Severity::parse(&value),
                "setting" => out.setting = Some(value),
                _ => out.background = Some(value),
            }
        }
        out
    }

    /// Inverse of [`PopulationFields::parse`], one field per line.
    pub fn render(&self) -> String {
        let mut lines = Vec::new();
        if let Some(v) = &self.name {
            lines.push(format!("Name: {v}"));
        }
        if let Some(v) = &self.gender {
            lines.push(format!("Gender: {v}"));
        }
        if let Some(v) = self.severity {
            lines.push(format!("Severity: {v}"));
        }
        if let Some(v) = &self.background {
            lines.push(format!("Cultural background: {v}"));
        }
        if let Some(v) = &self.setting {
            lines.push(format!("Setting: {v}"));
        }
        lines.join("\n")
    }
}

struct Profile {
    briefs: [&'static str; 3],
    behaviors: [&'static str; 3],
    conditions: [&'static str; 3],
    measure: &'static str,
    activities: [&'static str; 3],
    observation: &'static str,
    parent: &'static str,
    teacher: &'static str,
}

fn profile(d: DisorderType) -> Profile {
    use DisorderType::*;
    match d {
        Articulation => Profile {
            briefs: ["Vocalic /r/ production", "/s/ production", "Carryover of target sounds"],
            behaviors: [
                "correctly produce the /r/ sound in the initial, medial, and final positions of words",
                "correctly produce the /s/ sound in sentences during structured articulation activities",
                "use correct production of target sounds during conversational speech",
            ],
            conditions: ["minimal verbal or visual cues", "a visual cue for tongue placement", "a self-monitoring checklist"],
            measure: "SLP data collection",
            activities: [
                "Practiced target sound production in words using articulation picture cards and a mirror for visual feedback.",
                "Played a board game that required producing target sounds in short sentences.",
                "Read a short passage aloud and self-monitored target sound productions.",
            ],
            observation: "responded well to visual feedback and needed fewer placement cues as the session progressed",
            parent: "family members sometimes ask the student to repeat words, and the student has become reluctant to talk with unfamiliar adults",
            teacher: "sound errors are noticeable during oral reading, and the student hesitates to answer questions in front of classmates",
        },
        Phonological => Profile {
            briefs: ["Final consonant production", "Eliminating fronting", "Cluster production"],
            behaviors: [
                "produce final consonants in single words, eliminating the final consonant deletion process",
                "produce the velar sounds /k/ and /g/ in words without the fronting process",
                "produce initial /s/ clusters in words without cluster reduction",
            ],
            conditions: ["a picture model", "an auditory model and minimal pair pictures", "a visual cue card"],
            measure: "SLP probe data",
            activities: [
                "Completed a minimal pair sorting game contrasting words with and without final consonants.",
                "Played a fishing game with picture cards targeting velar sounds in the initial position.",
                "Practiced /s/ cluster words during a picture description task.",
            ],
            observation: "showed growing awareness of the sound pattern when minimal pairs were contrasted",
            parent: "speech is difficult for unfamiliar listeners to understand and the student becomes frustrated when not understood",
            teacher: "the student has trouble with rhyming and sound awareness activities and is often misunderstood by peers",
        },
        SpeechSoundGeneral => Profile {
            briefs: ["Target speech sound accuracy", "Speech intelligibility", "Self-monitoring of sounds"],
            behaviors: [
                "correctly produce target speech sounds in words during structured activities",
                "improve speech intelligibility by producing target phonemes in phrases",
                "self-correct speech sound errors during short conversations",
            ],
            conditions: ["verbal and visual cues", "a picture prompt", "a clinician reminder"],
            measure: "SLP data collection",
            activities: [
                "Practiced target sounds in words with picture cards and tactile cues.",
                "Produced target sounds in carrier phrases during a barrier game.",
                "Retold a short story while monitoring target speech sounds.",
            ],
            observation: "benefited from tactile cues and showed emerging self-correction",
            parent: "relatives have trouble understanding the student on the phone",
            teacher: "peers ask the student to repeat, and speech sound errors affect oral participation",
        },
        ExpressiveLanguage => Profile {
            briefs: ["Complete sentence formulation", "Regular past tense use", "Story retell"],
            behaviors: [
                "formulate grammatically complete sentences to describe pictures and events",
                "use regular past tense verbs correctly in sentences",
                "retell a narrative in sequence using complete sentences and grade-level vocabulary",
            ],
            conditions: ["a sentence starter", "a visual model", "a story map"],
            measure: "SLP data collection and language samples",
            activities: [
                "Described action pictures using sentence starters and a visual sentence frame.",
                "Played a past tense verb game describing what characters did yesterday.",
                "Retold a short picture book using a story map with beginning, middle, and end.",
            ],
            observation: "produced longer sentences when given a visual frame but omitted grammatical markers without it",
            parent: "the student struggles to explain what happened at school and often uses short sentences",
            teacher: "written and oral answers are brief, and the student has difficulty with vocabulary and sentence formulation",
        },
        ReceptiveLanguage => Profile {
            briefs: ["Following directions", "Wh-question comprehension", "Basic concept understanding"],
            behaviors: [
                "follow two-step directions containing basic concepts",
                "answer wh-questions to demonstrate comprehension of a short passage",
                "identify basic spatial and temporal concepts to show understanding of classroom language",
            ],
            conditions: ["a visual support", "a picture cue", "one repetition of the direction"],
            measure: "SLP data collection",
            activities: [
                "Followed two-step directions during a craft activity.",
                "Listened to a short passage and answered wh-questions with picture choices.",
                "Played a barrier game requiring understanding of spatial concepts.",
            ],
            observation: "needed repetition for directions containing temporal concepts",
            parent: "the student often does only part of what is asked at home",
            teacher: "the student misses steps in classroom directions and has difficulty with listening comprehension",
        },
        LanguageGeneral => Profile {
            briefs: ["Wh-question responses", "Narrative retell", "Vocabulary use"],
            behaviors: [
                "answer wh-questions about grade-level passages in complete sentences to show comprehension",
                "retell a narrative with a beginning, middle, and end using grade-level vocabulary",
                "define and use curriculum vocabulary words in sentences",
            ],
            conditions: ["a graphic organizer", "a story map", "a word web"],
            measure: "SLP data collection and work samples",
            activities: [
                "Read a short passage and answered wh-questions using a graphic organizer.",
                "Retold a story using a story map and picture sequence cards.",
                "Built word webs for science vocabulary and used each word in a sentence.",
            ],
            observation: "comprehension improved when vocabulary was pre-taught before reading",
            parent: "homework that involves reading and writing takes a long time, and the student has difficulty explaining ideas",
            teacher: "the student has difficulty following language-heavy lessons and producing organized oral and written responses",
        },
        PragmaticLanguage => Profile {
            briefs: ["Topic maintenance", "Turn-taking in conversation", "Appropriate social language"],
            behaviors: [
                "maintain a conversation topic for at least three turns with a peer",
                "use appropriate turn-taking during small group social activities",
                "use appropriate language and greetings during conversations with peers and teachers",
            ],
            conditions: ["a visual topic board", "a turn-taking cue card", "a visual cue"],
            measure: "SLP observation",
            activities: [
                "Role played joining a conversation with peers using a visual topic board.",
                "Played a cooperative game that required waiting and taking turns.",
                "Practiced greetings and conversation openers during a simulated lunch conversation.",
            ],
            observation: "shifted to preferred topics when unsure but returned to the topic with a visual reminder",
            parent: "the student has difficulty keeping friends and misreads social situations",
            teacher: "the student interrupts peers, changes topics abruptly, and has trouble with group work",
        },
        SocialCommunication => Profile {
            briefs: ["Initiating peer interaction", "Interpreting nonverbal cues", "Conversational repair"],
            behaviors: [
                "initiate social interactions with peers using appropriate greetings and nonverbal cues",
                "interpret peer facial expressions and tone of voice during conversation",
                "repair conversational breakdowns by rephrasing or asking for clarification",
            ],
            conditions: ["a social narrative", "a visual emotion chart", "a clinician prompt"],
            measure: "SLP observation",
            activities: [
                "Practiced initiating play with a peer after reviewing a social narrative.",
                "Identified emotions from photographs and video clips of peer interactions.",
                "Role played conversations that required asking for clarification.",
            ],
            observation: "engaged more readily with peers after rehearsing the interaction",
            parent: "the student prefers solitary activities and rarely starts conversations with peers",
            teacher: "the student has limited peer interaction and misses nonverbal social cues",
        },
        Fluency => Profile {
            briefs: ["Fluency strategy use", "Stuttering modification", "Communication confidence"],
            behaviors: [
                "use easy onset and light contact strategies to produce fluent speech during classroom discussions",
                "identify and modify moments of stuttering using pull-outs during conversation",
                "participate in class discussions using fluency strategies while reporting reduced speaking anxiety",
            ],
            conditions: ["a preparatory reminder", "a visual cue", "a pre-planned speaking opportunity"],
            measure: "speech sample analysis",
            activities: [
                "Practiced easy onsets while reading sentences aloud and during a short conversation.",
                "Identified moments of stuttering in recorded speech and practiced pull-outs.",
                "Rehearsed a short class presentation using fluency strategies.",
            ],
            observation: "blocks occurred mainly on initial plosives, and tension decreased with easy onsets",
            parent: "stuttering increases when the student is tired or anxious, and the student avoids ordering food or using the phone",
            teacher: "the student rarely volunteers, substitutes words, and shows visible tension during oral presentations",
        },
        ChildhoodApraxia => Profile {
            briefs: ["Syllable sequencing", "Consistent word production", "Multisyllabic words"],
            behaviors: [
                "accurately sequence consonant-vowel syllables using motor planning cues",
                "produce familiar words with consistent motor speech accuracy across repetitions",
                "sequence multisyllabic words in short phrases",
            ],
            conditions: ["tactile and visual cues", "a slowed model", "a rhythmic cue"],
            measure: "SLP data collection",
            activities: [
                "Practiced syllable sequences with tactile cues and a slowed rate.",
                "Repeated functional words across trials with integral stimulation.",
                "Produced multisyllabic words in carrier phrases using rhythmic tapping.",
            ],
            observation: "accuracy dropped as syllable length increased, and rhythmic cues improved sequencing",
            parent: "the student knows what to say but has trouble getting words out",
            teacher: "the student is hard to understand and becomes frustrated during oral tasks",
        },
        Voice => Profile {
            briefs: ["Easy voice use", "Reducing vocal strain", "Vocal hygiene"],
            behaviors: [
                "use an easy, non-strained voice during play and classroom activities",
                "reduce vocally abusive behaviors such as yelling and throat clearing",
                "demonstrate vocal hygiene strategies such as drinking water and using a quiet voice",
            ],
            conditions: ["a picture cue", "a visual reminder", "an adult model"],
            measure: "clinician observation",
            activities: [
                "Played with puppets practicing inside and outside voice with picture cues.",
                "Counted and replaced throat clearing with a hard swallow during play.",
                "Practiced easy voice during a pretend tea party with a stuffed animal.",
            ],
            observation: "used an easy voice more often when reminded with a picture cue",
            parent: "the child's voice is often hoarse, especially after loud play",
            teacher: "the student yells during play and has a hoarse, strained voice by the end of the day",
        },
    }
}

const FIRST_NAMES_F: [&str; 8] = ["Maya", "Sofia", "Amara", "Lena", "Priya", "Grace", "Isabel", "Nora"];
const FIRST_NAMES_M: [&str; 8] = ["Mateo", "Jordan", "Ethan", "Kofi", "Arjun", "Liam", "Diego", "Owen"];
const LAST_NAMES: [&str; 8] = ["Rivera", "Johnson", "Nguyen", "Patel", "Okafor", "Bennett", "Garcia", "Hughes"];

fn rng_from_digest(digest: &str) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    if let Ok(bytes) = hex::decode(digest) {
        for (i, b) in bytes.iter().take(32).enumerate() {
            seed[i] = *b;
        }
    } else {
        for (i, b) in digest.bytes().enumerate() {
            seed[i % 32] ^= b;
        }
    }
    ChaCha8Rng::from_seed(seed)
}

fn parse_disorders(text: &str) -> Vec<DisorderType> {
    let mut out: Vec<DisorderType> = text
        .split(',')
        .filter_map(|s| s.trim().parse().ok())
        .collect();
    out.dedup();
    if out.is_empty() {
        out.push(DisorderType::LanguageGeneral);
    }
    out
}

fn score_for(severity: Severity, rng: &mut ChaCha8Rng) -> i64 {
    match severity {
        Severity::Severe => rng.random_range(55..=69),
        Severity::Moderate => rng.random_range(70..=84),
        Severity::Mild => rng.random_range(86..=92),
    }
}

fn pronoun(gender: &str) -> (&'static str, &'static str) {
    match gender.to_ascii_lowercase().chars().next() {
        Some('f') => ("She", "her"),
        Some('m') => ("He", "his"),
        _ => ("They", "their"),
    }
}

/// Synthesizes a case from the four prompt bindings.
pub fn synthesize_case(bindings: &BTreeMap<String, String>, digest: &str) -> CaseFile {
    let mut rng = rng_from_digest(digest);
    let get = |k: &str| bindings.get(k).map(String::as_str).unwrap_or("");
    let disorders = parse_disorders(get("disorders"));
    let grade: GradeLevel = get("grade").parse().unwrap_or(GradeLevel::grade(2).unwrap());
    let fields = PopulationFields::parse(get("population_spec"));

    let gender = fields.gender.clone().unwrap_or_else(|| {
        if rng.random_bool(0.5) { "Female" } else { "Male" }.to_string()
    });
    let name = fields.name.clone().unwrap_or_else(|| {
        let pool = if gender.starts_with(['F', 'f']) { &FIRST_NAMES_F } else { &FIRST_NAMES_M };
        format!("{} {}", pool[rng.random_range(0..pool.len())], LAST_NAMES[rng.random_range(0..LAST_NAMES.len())])
    });
    let first = name.split_whitespace().next().unwrap_or("The student").to_string();
    let (subj, poss) = pronoun(&gender);
    let severity = fields.severity.unwrap_or_else(|| match rng.random_range(0..10) {
        0..=1 => Severity::Mild,
        2..=7 => Severity::Moderate,
        _ => Severity::Severe,
    });
    let (lo, _) = grade.age_range();
    let age = lo as i64 + rng.random_range(0..=1);

    let names: Vec<&str> = disorders.iter().map(|d| d.display_name()).collect();
    let profiles: Vec<Profile> = disorders.iter().map(|d| profile(*d)).collect();

    let mut background = format!(
        "Medical History: {name} is a {age}-year-old {grade_name} student referred for {list} \
         with {sev} needs. Birth and developmental history were unremarkable apart from the \
         communication concerns. Hearing and vision screenings were passed this school year.",
        grade_name = grade.display_name(),
        list = names.join(" and ").to_lowercase(),
        sev = severity.as_str().to_lowercase(),
    );
    if let Some(bg) = &fields.background {
        background.push_str(&format!(" Cultural and linguistic background: {bg}."));
    }
    let parent: Vec<&str> = profiles.iter().map(|p| p.parent).collect();
    let teacher: Vec<&str> = profiles.iter().map(|p| p.teacher).collect();
    background.push_str(&format!(
        "\n\nParent Concerns: The family reports that {}.\n\nTeacher Concerns: The classroom teacher reports that {}.",
        parent.join("; also, "),
        teacher.join("; in addition, ")
    ));

    let catalog = AssessmentCatalog::table();
    let assessment_results = disorders
        .iter()
        .map(|d| {
            let entry = &catalog.entries_for(*d)[0];
            let score = score_for(severity, &mut rng);
            let percentile = (expected_percentile(score).round() as i64).clamp(1, 99);
            AssessmentResult {
                assessment_name: format!("{} ({})", entry.instrument.full_name, entry.instrument.acronym),
                domain: entry.domain.to_string(),
                standard_score: Some(score),
                percentile: Some(percentile),
                severity: severity.as_str().to_string(),
            }
        })
        .collect();

    // three goals for one disorder, two per disorder otherwise
    let per = if disorders.len() == 1 { 3 } else { 2 };
    let mut annual_goals = Vec::new();
    for p in profiles.iter().take(2) {
        for i in 0..per {
            let n = annual_goals.len() as i64 + 1;
            let (achieved, total) = [(8, 10), (4, 5), (9, 10)][i % 3];
            annual_goals.push(AnnualGoal {
                goal_number: Some(n),
                goal_brief: p.briefs[i].to_string(),
                goal_annual: format!(
                    "Before or by the next annual ARD, {first} will {} given {} in {achieved} out of {total} trials as measured by {}.",
                    p.behaviors[i], p.conditions[i], p.measure
                ),
            });
        }
    }

    let start = NaiveDate::from_ymd_opt(2025, 1, 6).unwrap() + Duration::days(rng.random_range(0..21));
    let mut date = start;
    let group = fields.setting.as_deref().is_some_and(|s| s.to_ascii_lowercase().contains("group"));
    let mut session_notes = Vec::new();
    for i in 0..3 {
        let goal_index = i % annual_goals.len();
        let p = &profiles[(goal_index / per).min(profiles.len() - 1)];
        let a = p.activities[goal_index % per % 3];
        let correct = rng.random_range(3..=7) + i as u32;
        let pct = correct * 10;
        session_notes.push(SessionNote {
            date: date.format("%Y-%m-%d").to_string(),
            duration: "30 minutes".into(),
            setting: if group { "Group" } else { "Individual" }.into(),
            goal_addressed: format!("Goal {}", goal_index + 1),
            note: format!(
                "Activity: {a} Objective Data: {first} demonstrated the target skill in {correct}/10 trials ({pct}%) with moderate cues. \
                 Clinical Observation: {subj} {} {poss} participation was positive, and cues will be faded next session.",
                p.observation
            ),
        });
        date += Duration::days(rng.random_range(3..=7));
    }

    CaseFile {
        name,
        age: Some(age),
        grade: grade.display_name(),
        gender,
        background,
        assessment_results,
        annual_goals,
        session_notes,
    }
}
