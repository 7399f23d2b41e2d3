//! Survey encoding, missing-row removal, standardization and the eight-group split.

mod encode;
mod groups;
mod transform;

pub use encode::{
    default_rules, encode_survey, required_questions, synthetic_answer_key, synthetic_survey, AnswerKey, EncodingRule,
    EncodingRules, RawSurvey, RuleKind, Term, LITERACY_OPTIONS, LITERACY_QUESTIONS,
};
pub use groups::{group_summary, partition_groups, quantile, GroupKey, GroupSummary};
pub use transform::{drop_missing, standardize, DropReport};

use thiserror::Error;

use crate::dataset::DatasetError;

/// The thirteen analysis variables, in output order.
pub const VARIABLES: [&str; 13] = [
    "Male",
    "Fin_Edu",
    "Fin_Edu_Home",
    "Age",
    "Education",
    "Income",
    "Asset_Amt",
    "Myopic_Bias",
    "Herding_Bias",
    "Confidence",
    "Invest",
    "Planning",
    "Fin_Literacy",
];

/// Group-defining dummies.
pub const DUMMIES: [&str; 3] = ["Male", "Fin_Edu", "Fin_Edu_Home"];

/// Everything except the dummies.
pub const CONTINUOUS: [&str; 10] = [
    "Age",
    "Education",
    "Income",
    "Asset_Amt",
    "Myopic_Bias",
    "Herding_Bias",
    "Confidence",
    "Invest",
    "Planning",
    "Fin_Literacy",
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("question {0}: unknown answer code `{1}`")]
    UnknownAnswerCode(String, String),
    #[error("no encoding rule for variable {0}")]
    MissingRule(String),
    #[error("survey has no column for question {0}")]
    MissingColumn(String),
    #[error("answer key has no entry for question {0}")]
    MissingAnswerKey(String),
    #[error("rule {0}: {1}")]
    InvalidRule(String, String),
    #[error("row {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("every row was removed")]
    EmptyResult,
    #[error("column {0} is constant")]
    ConstantColumn(String),
    #[error("column {column} has non-binary value {value}")]
    NonBinaryDummy { column: String, value: f64 },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    pub(crate) fn at_row(self, row: usize) -> Self {
        PipelineError::AtRow { row, source: Box::new(self) }
    }
}
