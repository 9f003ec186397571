use std::fmt;
use std::marker::PhantomData;
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::pseudonym::{PseudonymGenerator, BACKGROUNDS};
use super::{GeneratedCase, GenerationRequest, Orchestrator, OrchestratorError, MAX_DISORDERS};
use crate::case_model::{DisorderType, GradeLevel, Severity};
use crate::llm_gateway::{ModelSpec, PopulationFields};

pub const MAX_BATCH: usize = 100;
const WEIGHT_TOLERANCE: f64 = 1e-6;
const GENDERS: [&str; 2] = ["Female", "Male"];

/// One outcome of a categorical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Weighted<T> {
    pub value: T,
    pub weight: f64,
}

impl<T> Weighted<T> {
    pub fn new(value: T, weight: f64) -> Self {
        Weighted { value, weight }
    }
}

/// Values that appear as JSON object keys in a distribution.
pub trait DistKey: Sized {
    fn to_key(&self) -> String;
    fn from_key(key: &str) -> Result<Self, String>;
}

impl DistKey for Vec<DisorderType> {
    fn to_key(&self) -> String {
        self.iter()
            .map(|d| serde_json::to_value(d).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
            .collect::<Vec<_>>()
            .join("+")
    }

    fn from_key(key: &str) -> Result<Self, String> {
        key.split('+').map(|p| p.trim().parse::<DisorderType>().map_err(|e| e.to_string())).collect()
    }
}

impl DistKey for GradeLevel {
    fn to_key(&self) -> String {
        self.display_name()
    }

    fn from_key(key: &str) -> Result<Self, String> {
        key.parse().map_err(|e: crate::case_model::UnknownGrade| e.to_string())
    }
}

impl DistKey for Severity {
    fn to_key(&self) -> String {
        self.as_str().to_string()
    }

    fn from_key(key: &str) -> Result<Self, String> {
        Severity::parse(key).ok_or_else(|| format!("unknown severity {key:?}"))
    }
}

impl DistKey for String {
    fn to_key(&self) -> String {
        self.clone()
    }

    fn from_key(key: &str) -> Result<Self, String> {
        Ok(key.to_string())
    }
}

/// Serializes as a `{key: weight}` object in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T>(pub Vec<Weighted<T>>);

impl<T> Default for Distribution<T> {
    fn default() -> Self {
        Distribution(Vec::new())
    }
}

impl<T> Distribution<T> {
    pub fn uniform(values: impl IntoIterator<Item = T>) -> Self {
        let values: Vec<T> = values.into_iter().collect();
        let w = 1.0 / values.len().max(1) as f64;
        Distribution(values.into_iter().map(|v| Weighted::new(v, w)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> Vec<T>
    where
        T: Clone,
    {
        self.0.iter().map(|w| w.value.clone()).collect()
    }

    fn check(&self, name: &str) -> Result<(), OrchestratorError> {
        if self.0.iter().any(|w| !(w.weight.is_finite() && w.weight >= 0.0)) {
            return Err(OrchestratorError::InvalidRequest(format!("{name}: weights must be non-negative")));
        }
        let sum: f64 = self.0.iter().map(|w| w.weight).sum();
        if !self.0.is_empty() && (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(OrchestratorError::InvalidRequest(format!("{name}: weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

impl<T: DistKey> Serialize for Distribution<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for w in &self.0 {
            map.serialize_entry(&w.value.to_key(), &w.weight)?;
        }
        map.end()
    }
}

impl<'de, T: DistKey> Deserialize<'de> for Distribution<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: DistKey> Visitor<'de> for V<T> {
            type Value = Distribution<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping values to weights")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, w)) = m.next_entry::<String, f64>()? {
                    out.push(Weighted::new(T::from_key(&k).map_err(de::Error::custom)?, w));
                }
                Ok(Distribution(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMethod {
    #[default]
    Manual,
    NaturalLanguage,
    Roster,
}

/// A fixed disorder-set and grade pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub disorders: Vec<DisorderType>,
    pub grade: GradeLevel,
}

impl Scenario {
    /// The seven evaluation scenarios, one per row of the test-case table.
    pub fn evaluation_set() -> Vec<Scenario> {
        use DisorderType::*;
        let g = |n| GradeLevel::grade(n).unwrap();
        let rows = [
            (vec![Articulation], g(2)),
            (vec![LanguageGeneral], g(4)),
            (vec![PragmaticLanguage], g(6)),
            (vec![Fluency], g(9)),
            (vec![Voice], GradeLevel::PRE_K),
            (vec![Phonological, ExpressiveLanguage], GradeLevel::KINDERGARTEN),
            (vec![PragmaticLanguage, ExpressiveLanguage], g(1)),
        ];
        rows.into_iter().map(|(disorders, grade)| Scenario { disorders, grade }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub count: usize,
    /// Weights over disorder sets of one or two types.
    #[serde(default)]
    pub disorders: Distribution<Vec<DisorderType>>,
    #[serde(default)]
    pub grades: Distribution<GradeLevel>,
    /// Empty leaves severity to the model.
    #[serde(default)]
    pub severities: Distribution<Severity>,
    /// Empty means uniform over the bundled backgrounds.
    #[serde(default)]
    pub backgrounds: Distribution<String>,
    /// Empty means uniform over Female and Male.
    #[serde(default)]
    pub genders: Distribution<String>,
    #[serde(default)]
    pub input_method: InputMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Explicit disorder and grade per case, cycled in order; replaces the
    /// disorder and grade distributions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<Scenario>>,
}

impl BatchSpec {
    pub fn new(count: usize) -> Self {
        BatchSpec {
            count,
            disorders: Distribution::default(),
            grades: Distribution::default(),
            severities: Distribution::default(),
            backgrounds: Distribution::default(),
            genders: Distribution::default(),
            input_method: InputMethod::Manual,
            seed: None,
            scenarios: None,
        }
    }

    pub fn from_scenarios(scenarios: Vec<Scenario>) -> Self {
        let mut spec = BatchSpec::new(scenarios.len());
        spec.scenarios = Some(scenarios);
        spec
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if !(1..=MAX_BATCH).contains(&self.count) {
            return Err(OrchestratorError::InvalidRequest(format!("count {} outside 1-{MAX_BATCH}", self.count)));
        }
        match &self.scenarios {
            Some(s) if s.is_empty() => return Err(OrchestratorError::InvalidRequest("empty scenario list".into())),
            Some(s) => {
                if let Some(bad) = s.iter().find(|s| s.disorders.is_empty() || s.disorders.len() > MAX_DISORDERS) {
                    return Err(OrchestratorError::InvalidRequest(format!(
                        "scenario has {} disorders",
                        bad.disorders.len()
                    )));
                }
            }
            None => {
                if self.disorders.is_empty() || self.grades.is_empty() {
                    return Err(OrchestratorError::InvalidRequest(
                        "disorder and grade distributions are required without scenarios".into(),
                    ));
                }
                if let Some(bad) = self.disorders.0.iter().find(|w| w.value.is_empty() || w.value.len() > MAX_DISORDERS)
                {
                    return Err(OrchestratorError::InvalidRequest(format!(
                        "disorder set {:?} must hold 1-{MAX_DISORDERS} types",
                        bad.value.to_key()
                    )));
                }
            }
        }
        self.disorders.check("disorders")?;
        self.grades.check("grades")?;
        self.severities.check("severities")?;
        self.backgrounds.check("backgrounds")?;
        self.genders.check("genders")
    }
}

/// Hamilton apportionment of `count` items over `weights`: floors first,
/// then one extra each to the largest fractional remainders, earlier
/// index first on ties.
pub fn largest_remainder(weights: &[f64], count: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * count as f64).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(count.saturating_sub(assigned)) {
        out[i] += 1;
    }
    out
}

/// Exact-count expansion of a distribution, then a seeded shuffle.
fn allocate<T: Clone>(dist: &Distribution<T>, count: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let weights: Vec<f64> = dist.0.iter().map(|w| w.weight).collect();
    let mut out = Vec::with_capacity(count);
    for (w, n) in dist.0.iter().zip(largest_remainder(&weights, count)) {
        out.extend(std::iter::repeat_n(w.value.clone(), n));
    }
    out.shuffle(rng);
    out
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Parameters for one case in a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CasePlan {
    pub index: usize,
    pub disorders: Vec<DisorderType>,
    pub grade: GradeLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<Severity>,
    pub background: String,
    pub gender: String,
    pub name: String,
    pub seed: u64,
}

impl CasePlan {
    pub fn population_spec(&self) -> String {
        PopulationFields {
            name: Some(self.name.clone()),
            gender: Some(self.gender.clone()),
            severity: self.severity,
            background: Some(self.background.clone()),
            setting: None,
        }
        .render()
    }

    pub fn request(&self, model: &ModelSpec) -> GenerationRequest {
        let mut req = GenerationRequest::new(&self.disorders, self.grade, &self.population_spec(), model.clone());
        req.seed = Some(self.seed);
        req
    }
}

/// Draws per-case parameters. Every dimension is apportioned exactly and
/// shuffled on its own RNG stream, so changing one distribution leaves the
/// others' assignment untouched.
pub fn plan_batch(spec: &BatchSpec, seed: u64) -> Result<(Vec<CasePlan>, Vec<String>), OrchestratorError> {
    spec.validate()?;
    let n = spec.count;
    let (disorders, grades): (Vec<Vec<DisorderType>>, Vec<GradeLevel>) = match &spec.scenarios {
        Some(s) => (0..n).map(|i| (s[i % s.len()].disorders.clone(), s[i % s.len()].grade)).unzip(),
        None => (allocate(&spec.disorders, n, &mut stream(seed, 1)), allocate(&spec.grades, n, &mut stream(seed, 2))),
    };
    let severities: Vec<Option<Severity>> = if spec.severities.is_empty() {
        vec![None; n]
    } else {
        allocate(&spec.severities, n, &mut stream(seed, 3)).into_iter().map(Some).collect()
    };
    let backgrounds = if spec.backgrounds.is_empty() {
        allocate(&Distribution::uniform(BACKGROUNDS.iter().map(|s| s.to_string())), n, &mut stream(seed, 4))
    } else {
        allocate(&spec.backgrounds, n, &mut stream(seed, 4))
    };
    let genders = if spec.genders.is_empty() {
        allocate(&Distribution::uniform(GENDERS.iter().map(|s| s.to_string())), n, &mut stream(seed, 5))
    } else {
        allocate(&spec.genders, n, &mut stream(seed, 5))
    };
    let mut names = PseudonymGenerator::new();
    let mut name_rng = stream(seed, 6);
    let plans = (0..n)
        .map(|i| CasePlan {
            index: i,
            disorders: disorders[i].clone(),
            grade: grades[i],
            severity: severities[i],
            name: names.next(&backgrounds[i], &genders[i], &mut name_rng),
            background: backgrounds[i].clone(),
            gender: genders[i].clone(),
            seed: seed.wrapping_add(i as u64),
        })
        .collect();
    Ok((plans, names.warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemFailure {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub index: usize,
    pub request: GenerationRequest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<GeneratedCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ItemFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchOutcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub plans: Vec<CasePlan>,
    pub items: Vec<BatchItem>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl BatchOutcome {
    pub fn cases(&self) -> impl Iterator<Item = &GeneratedCase> {
        self.items.iter().filter_map(|i| i.case.as_ref())
    }

    pub fn failures(&self) -> impl Iterator<Item = &BatchItem> {
        self.items.iter().filter(|i| i.error.is_some())
    }

    pub fn succeeded(&self) -> usize {
        self.cases().count()
    }
}

impl Orchestrator {
    /// Plans and generates a batch. A batch without a seed draws one and
    /// records it in the outcome.
    pub fn generate_batch(&self, spec: &BatchSpec, model: &ModelSpec) -> Result<BatchOutcome, OrchestratorError> {
        let seed = spec.seed.unwrap_or_else(rand::random);
        let (plans, warnings) = plan_batch(spec, seed)?;
        let requests: Vec<GenerationRequest> = plans.iter().map(|p| p.request(model)).collect();
        let mut outcome = self.generate_requests(&requests)?;
        outcome.seed = Some(seed);
        outcome.plans = plans;
        outcome.warnings.extend(warnings);
        Ok(outcome)
    }

    /// Runs independent requests on the bounded worker pool. Provenance
    /// times are drawn up front in request order.
    pub fn generate_requests(&self, requests: &[GenerationRequest]) -> Result<BatchOutcome, OrchestratorError> {
        let stamps: Vec<DateTime<Utc>> = requests.iter().map(|_| self.clock.now()).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.workers.clamp(1, requests.len().max(1));
        let mut results: Vec<(usize, Result<GeneratedCase, OrchestratorError>)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::SeqCst);
                            if i >= requests.len() {
                                break done;
                            }
                            done.push((i, self.generate_case_at(&requests[i], stamps[i])));
                        }
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("batch worker panicked")).collect()
        });
        results.sort_by_key(|(i, _)| *i);
        let items: Vec<BatchItem> = results
            .into_iter()
            .map(|(index, r)| {
                let request = requests[index].clone();
                match r {
                    Ok(case) => BatchItem { index, request, case: Some(case), error: None },
                    Err(e) => {
                        tracing::warn!(index, code = e.code(), "batch case failed: {e}");
                        let error = ItemFailure { code: e.code().to_string(), message: e.to_string() };
                        BatchItem { index, request, case: None, error: Some(error) }
                    }
                }
            })
            .collect();
        if !items.is_empty() && items.iter().all(|i| i.case.is_none()) {
            return Err(OrchestratorError::AllCasesFailed(items.len()));
        }
        Ok(BatchOutcome { seed: None, plans: Vec::new(), items, warnings: Vec::new() })
    }
}
