use std::collections::BTreeMap;
use std::io::Read;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PipelineError, VARIABLES};
use crate::dataset::Dataset;

/// Raw survey: one column per question id, one row per respondent, cells are answer codes.
///
/// Multi-select cells list the chosen codes separated by `;`. An empty cell is
/// an unanswered question.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSurvey {
    pub questions: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawSurvey {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, PipelineError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let questions: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec?.iter().map(|c| c.trim().to_string()).collect());
        }
        Ok(Self { questions, rows })
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), PipelineError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.questions)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, question: &str) -> Option<usize> {
        self.questions.iter().position(|q| q == question)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Dummy,
    MidpointMap,
    YearsMap,
    Likert,
    Count,
    Composite,
}

/// One summand of a rule.
///
/// `mapping` sends each answer code to a value, or to `null` for missing. A
/// multi-select term sums the mapped values of every chosen code. A keyed term
/// scores 1 for the answer key's correct code and 0 for any other answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub source: String,
    #[serde(default)]
    pub mapping: BTreeMap<String, Option<f64>>,
    #[serde(default)]
    pub multi_select: bool,
    #[serde(default)]
    pub keyed: bool,
}

/// How one analysis variable is computed: the sum of its terms, missing if any term is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingRule {
    pub name: String,
    pub kind: RuleKind,
    pub terms: Vec<Term>,
}

impl EncodingRule {
    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.source.as_str())
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let bad = |why: &str| Err(PipelineError::InvalidRule(self.name.clone(), why.to_string()));
        if self.terms.is_empty() {
            return bad("no terms");
        }
        let values = || self.terms.iter().flat_map(|t| t.mapping.values().flatten());
        match self.kind {
            RuleKind::Dummy if values().any(|v| *v != 0.0 && *v != 1.0) => bad("dummy values must be 0 or 1"),
            RuleKind::Likert if values().any(|v| !(1.0..=5.0).contains(v)) => bad("likert values must lie in 1..=5"),
            RuleKind::Dummy | RuleKind::MidpointMap | RuleKind::YearsMap | RuleKind::Likert
                if self.terms.len() != 1 || self.terms[0].multi_select || self.terms[0].keyed =>
            {
                bad("single-question rules take exactly one plain term")
            }
            _ if self.terms.iter().any(|t| !t.keyed && t.mapping.is_empty()) => bad("unkeyed term with empty mapping"),
            _ => Ok(()),
        }
    }
}

/// Rule list in output-column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingRules {
    pub rules: Vec<EncodingRule>,
}

impl EncodingRules {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn get(&self, name: &str) -> Option<&EncodingRule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

/// Correct answer code per keyed question, with optional published correct-answer rates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub answers: BTreeMap<String, String>,
    #[serde(default)]
    pub official_rates: BTreeMap<String, f64>,
}

impl AnswerKey {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Questions whose observed correct rate is more than `tolerance` away from
    /// the official rate, as `(question, observed, official)`.
    pub fn rate_deviations(&self, raw: &RawSurvey, tolerance: f64) -> Vec<(String, f64, f64)> {
        let mut out = Vec::new();
        for (q, &official) in &self.official_rates {
            let (Some(col), Some(correct)) = (raw.column(q), self.answers.get(q)) else {
                continue;
            };
            let answered: Vec<&String> = raw.rows.iter().map(|r| &r[col]).filter(|c| !c.is_empty()).collect();
            if answered.is_empty() {
                continue;
            }
            let rate = answered.iter().filter(|c| **c == correct).count() as f64 / answered.len() as f64;
            if (rate - official).abs() > tolerance {
                out.push((q.clone(), rate, official));
            }
        }
        out
    }
}

fn term_value(
    term: &Term,
    cell: &str,
    key: Option<&AnswerKey>,
) -> Result<Option<f64>, PipelineError> {
    if cell.is_empty() {
        return Ok(None);
    }
    if term.keyed {
        let correct = key
            .and_then(|k| k.answers.get(&term.source))
            .ok_or_else(|| PipelineError::MissingAnswerKey(term.source.clone()))?;
        return Ok(Some(if cell == correct { 1.0 } else { 0.0 }));
    }
    let lookup = |code: &str| {
        term.mapping
            .get(code)
            .copied()
            .ok_or_else(|| PipelineError::UnknownAnswerCode(term.source.clone(), code.to_string()))
    };
    if !term.multi_select {
        return lookup(cell);
    }
    let mut sum = 0.0;
    for code in cell.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        match lookup(code)? {
            Some(v) => sum += v,
            None => return Ok(None),
        }
    }
    Ok(Some(sum))
}

/// Applies `rules` to every respondent.
///
/// Every variable of the standard set must have a rule; output columns follow
/// rule order. Unanswered cells and codes mapped to `null` become missing.
pub fn encode_survey(raw: &RawSurvey, rules: &EncodingRules, key: Option<&AnswerKey>) -> Result<Dataset, PipelineError> {
    for v in VARIABLES {
        if rules.get(v).is_none() {
            return Err(PipelineError::MissingRule(v.to_string()));
        }
    }
    let mut columns = Vec::with_capacity(rules.rules.len());
    for rule in &rules.rules {
        rule.validate()?;
        let cols: Vec<usize> = rule
            .sources()
            .map(|q| raw.column(q).ok_or_else(|| PipelineError::MissingColumn(q.to_string())))
            .collect::<Result<_, _>>()?;
        let mut values = Vec::with_capacity(raw.n_rows());
        for (r, row) in raw.rows.iter().enumerate() {
            let mut acc = Some(0.0);
            for (term, &c) in rule.terms.iter().zip(&cols) {
                let cell = row.get(c).map(String::as_str).unwrap_or("");
                let v = term_value(term, cell, key).map_err(|e| e.at_row(r))?;
                acc = acc.zip(v).map(|(a, b)| a + b);
            }
            values.push(acc);
        }
        columns.push((rule.name.clone(), values));
    }
    Ok(Dataset::from_optional_columns(columns)?)
}

fn plain(name: &str, kind: RuleKind, source: &str, pairs: &[(&str, Option<f64>)]) -> EncodingRule {
    EncodingRule {
        name: name.into(),
        kind,
        terms: vec![Term {
            source: source.into(),
            mapping: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            multi_select: false,
            keyed: false,
        }],
    }
}

/// Adds each option under both its numeric code and its label.
fn coded(options: &[(&str, Option<f64>)]) -> Vec<(String, Option<f64>)> {
    options
        .iter()
        .enumerate()
        .flat_map(|(i, (label, v))| [((i + 1).to_string(), *v), (label.to_string(), *v)])
        .collect()
}

fn coded_rule(name: &str, kind: RuleKind, source: &str, options: &[(&str, Option<f64>)]) -> EncodingRule {
    let pairs = coded(options);
    let refs: Vec<(&str, Option<f64>)> = pairs.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    plain(name, kind, source, &refs)
}

pub const Q42: &[(&str, Option<f64>)] = &[("Male", Some(1.0)), ("Female", Some(0.0)), ("Prefer not to say", Some(0.0))];
pub const Q39: &[(&str, Option<f64>)] = &[
    ("Yes, and I did participate in the financial education", Some(1.0)),
    ("Yes, but I did not participate in the financial education", Some(0.0)),
    ("No", Some(0.0)),
    ("Don't know", Some(0.0)),
];
pub const Q40: &[(&str, Option<f64>)] = &[("Yes", Some(1.0)), ("No", Some(0.0)), ("Don't know", Some(0.0))];
pub const Q44: &[(&str, Option<f64>)] = &[
    ("Primary and secondary schools only", Some(9.0)),
    ("High school", Some(12.0)),
    ("Vocational school", Some(14.0)),
    ("Junior college", Some(14.0)),
    ("University", Some(16.0)),
    ("Graduate school", Some(18.0)),
    ("Other", None),
];
pub const Q51: &[(&str, Option<f64>)] = &[
    ("Don't have any financial assets", Some(0.0)),
    ("Less than 2.5 million yen", Some(125.0)),
    ("At least 2.5 million but less than 5 million yen", Some(375.0)),
    ("At least 5 million but less than 7.5 million yen", Some(625.0)),
    ("At least 7.5 million but less than 10 million yen", Some(875.0)),
    ("At least 10 million but less than 15 million yen", Some(1250.0)),
    ("At least 15 million yen", Some(1500.0)),
    ("Don't know/Prefer not to say", None),
];
pub const Q52: &[(&str, Option<f64>)] = &[
    ("Don't have any financial assets", Some(0.0)),
    ("Less than 2.5 million yen", Some(125.0)),
    ("At least 2.5 million but less than 5 million yen", Some(375.0)),
    ("At least 5 million but less than 7.5 million yen", Some(625.0)),
    ("At least 7.5 million but less than 10 million yen", Some(875.0)),
    ("At least 10 million but less than 20 million yen", Some(1500.0)),
    ("At least 20 million yen", Some(2000.0)),
    ("Don't know/Prefer not to say", None),
];
pub const Q34: &[(&str, Option<f64>)] = &[
    ("Stocks", Some(1.0)),
    ("Investment trusts", Some(1.0)),
    ("Foreign currency deposits/MMF", Some(1.0)),
    ("Bonds", Some(0.0)),
    ("Savings-type insurance", Some(0.0)),
    ("None of the above", Some(0.0)),
];
pub const Q7: &[(&str, Option<f64>)] = &[
    ("Living expenses for retirement", Some(1.0)),
    ("Children's education", Some(0.0)),
    ("Housing", Some(0.0)),
    ("Medical and nursing care", Some(0.0)),
    ("Other", Some(0.0)),
    ("None in particular", Some(0.0)),
];
pub const YES_NO: &[(&str, Option<f64>)] = &[("Yes", Some(1.0)), ("No", Some(0.0))];

/// Questions scored against the answer key for `Fin_Literacy`.
pub const LITERACY_QUESTIONS: [&str; 25] = [
    "Q4", "Q5", "Q12", "Q13", "Q14", "Q15", "Q16", "Q18", "Q19", "Q20", "Q21_1", "Q21_2", "Q21_3", "Q21_4", "Q22",
    "Q23", "Q25", "Q26", "Q28", "Q30", "Q31", "Q33", "Q36", "Q37", "Q38",
];

/// Number of answer options assumed for each keyed question by [`synthetic_survey`].
pub const LITERACY_OPTIONS: usize = 5;

fn age_options() -> Vec<(String, Option<f64>)> {
    let mut v = vec![("18-19".to_string(), Some(18.5))];
    for k in 0..12 {
        let lo = 20 + 5 * k;
        v.push((format!("{lo}-{}", lo + 4), Some(lo as f64 + 2.0)));
    }
    v
}

fn multi(source: &str, options: &[(&str, Option<f64>)]) -> Term {
    Term { source: source.into(), mapping: coded(options).into_iter().collect(), multi_select: true, keyed: false }
}

fn single(source: &str, options: &[(&str, Option<f64>)]) -> Term {
    Term { source: source.into(), mapping: coded(options).into_iter().collect(), multi_select: false, keyed: false }
}

/// Built-in rules for the thirteen standard variables.
///
/// Cells may carry either the 1-based option code or the option label.
pub fn default_rules() -> EncodingRules {
    let likert: Vec<(&str, Option<f64>)> =
        vec![("1", Some(1.0)), ("2", Some(2.0)), ("3", Some(3.0)), ("4", Some(4.0)), ("5", Some(5.0))];
    let mut confidence = likert.clone();
    confidence.push(("6", None));
    let ages = age_options();
    let age_refs: Vec<(&str, Option<f64>)> = ages.iter().map(|(k, v)| (k.as_str(), *v)).collect();

    EncodingRules {
        rules: vec![
            coded_rule("Male", RuleKind::Dummy, "Q42", Q42),
            coded_rule("Fin_Edu", RuleKind::Dummy, "Q39", Q39),
            coded_rule("Fin_Edu_Home", RuleKind::Dummy, "Q40", Q40),
            coded_rule("Age", RuleKind::MidpointMap, "Q43", &age_refs),
            coded_rule("Education", RuleKind::YearsMap, "Q44", Q44),
            coded_rule("Income", RuleKind::MidpointMap, "Q51", Q51),
            coded_rule("Asset_Amt", RuleKind::MidpointMap, "Q52", Q52),
            plain("Myopic_Bias", RuleKind::Likert, "Q1_10", &likert),
            plain("Herding_Bias", RuleKind::Likert, "Q1_3", &likert),
            plain("Confidence", RuleKind::Likert, "Q17", &confidence),
            EncodingRule { name: "Invest".into(), kind: RuleKind::Count, terms: vec![multi("Q34", Q34)] },
            EncodingRule {
                name: "Planning".into(),
                kind: RuleKind::Composite,
                terms: vec![multi("Q7", Q7), single("Q8_1", YES_NO), single("Q9_1", YES_NO), single("Q10_1", YES_NO)],
            },
            EncodingRule {
                name: "Fin_Literacy".into(),
                kind: RuleKind::Count,
                terms: LITERACY_QUESTIONS
                    .iter()
                    .map(|q| Term { source: q.to_string(), mapping: BTreeMap::new(), multi_select: false, keyed: true })
                    .collect(),
            },
        ],
    }
}

/// Question ids read by `rules`, deduplicated in first-use order.
pub fn required_questions(rules: &EncodingRules) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for q in rules.rules.iter().flat_map(|r| r.sources()) {
        if !out.iter().any(|o| o == q) {
            out.push(q.to_string());
        }
    }
    out
}

/// Random answer key over [`LITERACY_QUESTIONS`] with codes `1..=LITERACY_OPTIONS`.
pub fn synthetic_answer_key(seed: u64) -> AnswerKey {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AnswerKey {
        answers: LITERACY_QUESTIONS
            .iter()
            .map(|q| (q.to_string(), rng.random_range(1..=LITERACY_OPTIONS).to_string()))
            .collect(),
        official_rates: BTreeMap::new(),
    }
}

/// Uniformly random respondents answering every question the default rules
/// read, using numeric option codes. Each cell is left empty with
/// probability `missing_rate`.
pub fn synthetic_survey(n: usize, missing_rate: f64, seed: u64) -> RawSurvey {
    let rules = default_rules();
    let questions = required_questions(&rules);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::with_capacity(questions.len());
        for q in &questions {
            let term = rules.rules.iter().flat_map(|r| &r.terms).find(|t| &t.source == q).expect("question from rules");
            let codes: Vec<String> = if term.keyed {
                (1..=LITERACY_OPTIONS).map(|c| c.to_string()).collect()
            } else {
                let mut c: Vec<String> = term
                    .mapping
                    .keys()
                    .filter(|k| k.bytes().all(|b| b.is_ascii_digit()))
                    .cloned()
                    .collect();
                c.sort_by_key(|k| k.parse::<u32>().unwrap_or(0));
                c
            };
            let cell = if rng.random_bool(missing_rate) {
                String::new()
            } else if term.multi_select {
                let picked: Vec<&String> = codes.iter().filter(|_| rng.random_bool(0.3)).collect();
                if picked.is_empty() {
                    codes.choose(&mut rng).expect("nonempty").clone()
                } else {
                    picked.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(";")
                }
            } else {
                codes.choose(&mut rng).expect("nonempty").clone()
            };
            row.push(cell);
        }
        rows.push(row);
    }
    RawSurvey { questions, rows }
}
