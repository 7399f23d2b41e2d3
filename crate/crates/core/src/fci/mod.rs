//! The FCI algorithm: adjacency search, collider orientation, Possible-D-SEP
//! refinement and the final orientation rules, under background knowledge.

mod colliders;
mod pds;
mod rules;
mod skeleton;

pub use colliders::orient_colliders;
pub use pds::pds_refine;
pub use rules::{apply_orientation_rules, finalize_background};
pub use skeleton::skeleton_search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citest::{CiError, CiTester};
use crate::stats::CiResult;
use crate::graph::{GraphError, Mark, Pag, PagJson};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FciError {
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no sepset recorded for non-adjacent pair ({0}, {1})")]
    MissingSepset(String, String),
    #[error("tester covers {tester} variables but {names} names were given")]
    NameMismatch { tester: usize, names: usize },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("invalid background knowledge: {0}")]
    InvalidKnowledge(String),
}

/// Conditioning sets that separated removed pairs, keyed by `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap {
    sets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SepsetMap {
    fn key(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    pub fn insert(&mut self, a: usize, b: usize, mut set: Vec<usize>) {
        set.sort_unstable();
        self.sets.insert(Self::key(a, b), set);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.sets.get(&Self::key(a, b)).map(Vec::as_slice)
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.sets.contains_key(&Self::key(a, b))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<usize>)> {
        self.sets.iter()
    }
}

/// Exogeneity constraints: no arrowhead may point into an exogenous node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BackgroundKnowledge {
    exogenous: BTreeSet<usize>,
    required_directed: Vec<(usize, usize)>,
}

impl BackgroundKnowledge {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(n_vars: usize, exogenous: &[usize], required_directed: &[(usize, usize)]) -> Result<Self, FciError> {
        if let Some(v) = exogenous.iter().find(|&&v| v >= n_vars) {
            return Err(FciError::InvalidKnowledge(format!("exogenous index {v} out of range")));
        }
        let exo: BTreeSet<usize> = exogenous.iter().copied().collect();
        for &(from, to) in required_directed {
            if from >= n_vars || to >= n_vars || from == to {
                return Err(FciError::InvalidKnowledge(format!("bad required edge ({from}, {to})")));
            }
            if exo.contains(&to) {
                return Err(FciError::InvalidKnowledge(format!(
                    "required edge ({from}, {to}) points into exogenous node {to}"
                )));
            }
        }
        Ok(Self {
            exogenous: exo,
            required_directed: required_directed.to_vec(),
        })
    }

    /// Resolves exogenous variable names against `names`.
    pub fn from_names(names: &[String], exogenous: &[&str]) -> Result<Self, FciError> {
        let idx = exogenous
            .iter()
            .map(|e| {
                names
                    .iter()
                    .position(|n| n == e)
                    .ok_or_else(|| FciError::InvalidKnowledge(format!("unknown variable `{e}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(names.len(), &idx, &[])
    }

    pub fn exogenous(&self) -> &BTreeSet<usize> {
        &self.exogenous
    }

    pub fn required_directed(&self) -> &[(usize, usize)] {
        &self.required_directed
    }

    pub fn forbids_arrowhead_at(&self, v: usize) -> bool {
        self.exogenous.contains(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleSet {
    /// R1 to R4.
    Basic,
    /// R1 to R4 plus the tail rules R8 to R10 (no selection bias).
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FciOptions {
    pub alpha: f64,
    /// Largest conditioning set tried; `None` is unlimited.
    pub max_depth: Option<usize>,
    pub stable_skeleton: bool,
    pub rule_set: RuleSet,
}

impl Default for FciOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            max_depth: None,
            stable_skeleton: true,
            rule_set: RuleSet::Complete,
        }
    }
}

impl FciOptions {
    pub fn validate(&self) -> Result<(), FciError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(FciError::InvalidOptions(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Skeleton,
    PossibleDSep,
}

/// An edge deleted after a conditional-independence test succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedEdge {
    pub a: String,
    pub b: String,
    pub sepset: Vec<String>,
    pub phase: Phase,
    pub p_value: f64,
}

/// An orientation refused because it would put an arrowhead on an exogenous node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SuppressedOrientation {
    pub rule: String,
    /// Node that would have received the arrowhead.
    pub node: String,
    pub other: String,
    pub wanted: Mark,
}

/// Audit trail accumulated across the phases of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub tests: u64,
    pub removed: Vec<RemovedEdge>,
    pub suppressed: Vec<SuppressedOrientation>,
    pub warnings: Vec<String>,
}

impl RunLog {
    pub(crate) fn suppress(&mut self, pag: &Pag, rule: &str, node: usize, other: usize, wanted: Mark) {
        let entry = SuppressedOrientation {
            rule: rule.to_string(),
            node: pag.nodes()[node].clone(),
            other: pag.nodes()[other].clone(),
            wanted,
        };
        if !self.suppressed.contains(&entry) {
            log::debug!("suppressed {rule}: {wanted} at {} on edge to {}", entry.node, entry.other);
            self.suppressed.push(entry);
        }
    }

    pub(crate) fn warn(&mut self, msg: String) {
        if !self.warnings.contains(&msg) {
            log::warn!("{msg}");
            self.warnings.push(msg);
        }
    }
}

/// JSON run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FciReport {
    pub options: FciOptions,
    pub exogenous: Vec<String>,
    pub tests: u64,
    pub removed: Vec<RemovedEdge>,
    pub suppressed: Vec<SuppressedOrientation>,
    pub warnings: Vec<String>,
    pub pag: PagJson,
}

#[derive(Debug, Clone)]
pub struct FciOutput {
    pub pag: Pag,
    pub sepsets: SepsetMap,
    pub log: RunLog,
}

impl FciOutput {
    pub fn report(&self, opts: &FciOptions, bk: &BackgroundKnowledge) -> FciReport {
        FciReport {
            options: opts.clone(),
            exogenous: bk.exogenous().iter().map(|&v| self.pag.nodes()[v].clone()).collect(),
            tests: self.log.tests,
            removed: self.log.removed.clone(),
            suppressed: self.log.suppressed.clone(),
            warnings: self.log.warnings.clone(),
            pag: PagJson::from(&self.pag),
        }
    }
}

/// Tester seen through a relabelling: index `k` here is `to_outer[k]` in `inner`.
struct Reindexed<'a> {
    inner: &'a dyn CiTester,
    to_outer: Vec<usize>,
}

impl CiTester for Reindexed<'_> {
    fn n_vars(&self) -> usize {
        self.inner.n_vars()
    }

    fn is_independent(&self, i: usize, j: usize, cond: &[usize]) -> Result<CiResult, CiError> {
        let cond: Vec<usize> = cond.iter().map(|&c| self.to_outer[c]).collect();
        self.inner.is_independent(self.to_outer[i], self.to_outer[j], &cond)
    }

    fn query_count(&self) -> u64 {
        self.inner.query_count()
    }
}

/// Full FCI run: skeleton, colliders, Possible-D-SEP refinement, orientation rules.
///
/// The phases run with the variables sorted by name, so the output does not
/// depend on column order; graph and sepsets are returned in the caller's order.
pub fn fci(
    tester: &dyn CiTester,
    names: &[String],
    opts: &FciOptions,
    bk: &BackgroundKnowledge,
) -> Result<FciOutput, FciError> {
    opts.validate()?;
    check_universe(tester, names)?;
    let p = names.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    let mut pos = vec![0; p];
    for (k, &o) in order.iter().enumerate() {
        pos[o] = k;
    }
    let sorted: Vec<String> = order.iter().map(|&o| names[o].clone()).collect();
    let exo: Vec<usize> = bk.exogenous().iter().map(|&v| pos[v]).collect();
    let req: Vec<(usize, usize)> = bk.required_directed().iter().map(|&(a, b)| (pos[a], pos[b])).collect();
    let inner_bk = BackgroundKnowledge::new(p, &exo, &req)?;
    let inner = Reindexed { inner: tester, to_outer: order.clone() };

    let mut log = RunLog::default();
    let (mut pag, mut sepsets) = skeleton_search(&inner, &sorted, opts, &inner_bk, &mut log)?;
    orient_colliders(&mut pag, &sepsets, &inner_bk, &mut log)?;
    pds_refine(&mut pag, &mut sepsets, &inner, opts, &inner_bk, &mut log)?;
    apply_orientation_rules(&mut pag, &sepsets, &inner_bk, opts, &mut log)?;

    let mut outer_sepsets = SepsetMap::default();
    for (&(a, b), s) in sepsets.iter() {
        outer_sepsets.insert(order[a], order[b], s.iter().map(|&v| order[v]).collect());
    }
    Ok(FciOutput { pag: pag.permuted(&pos), sepsets: outer_sepsets, log })
}

pub(crate) fn check_universe(tester: &dyn CiTester, names: &[String]) -> Result<(), FciError> {
    if tester.n_vars() != names.len() {
        return Err(FciError::NameMismatch {
            tester: tester.n_vars(),
            names: names.len(),
        });
    }
    Ok(())
}
