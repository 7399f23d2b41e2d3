//! Linear-Gaussian structural equation models with latent confounders.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::graph::{Dag, GraphError};

pub const WEIGHT_MIN: f64 = 0.3;
pub const WEIGHT_MAX: f64 = 0.9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Ground-truth model: `x_v = sum_{u -> v} w_uv * x_u + e_v`, `e_v ~ N(0, sd_v^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemModel {
    dag: Dag,
    weights: BTreeMap<(usize, usize), f64>,
    noise_sd: Vec<f64>,
}

impl SemModel {
    pub fn new(dag: Dag, weights: BTreeMap<(usize, usize), f64>, noise_sd: Vec<f64>) -> Result<Self, SimError> {
        let edges = dag.edges();
        if weights.len() != edges.len() || edges.iter().any(|e| !weights.contains_key(e)) {
            return Err(SimError::InvalidParameter("weights must be keyed exactly by the DAG edges".into()));
        }
        if noise_sd.len() != dag.n_nodes() || noise_sd.iter().any(|s| !(*s > 0.0)) {
            return Err(SimError::InvalidParameter("noise sd must be positive for every node".into()));
        }
        Ok(Self { dag, weights, noise_sd })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        self.weights.get(&(from, to)).copied()
    }

    pub fn weights(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.weights
    }

    pub fn noise_sd(&self) -> &[f64] {
        &self.noise_sd
    }

    /// Names of the observed nodes, the columns produced by [`sample`].
    pub fn observed_names(&self) -> Vec<String> {
        self.dag.observed().into_iter().map(|v| self.dag.nodes()[v].clone()).collect()
    }

    /// Population covariance over all nodes, `(I - W)^-T D (I - W)^-1`, row-major.
    pub fn covariance(&self) -> Vec<f64> {
        let p = self.dag.n_nodes();
        let mut iw = DMatrix::<f64>::identity(p, p);
        for (&(a, b), &w) in &self.weights {
            iw[(a, b)] -= w;
        }
        let inv = iw.try_inverse().expect("I - W is unit triangular in topological order");
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(p, self.noise_sd.iter().map(|s| s * s)));
        let cov = inv.transpose() * d * &inv;
        (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| cov[(i, j)]).collect()
    }

    /// Population covariance restricted to the observed nodes.
    pub fn observed_covariance(&self) -> Vec<f64> {
        let p = self.dag.n_nodes();
        let full = self.covariance();
        let obs = self.dag.observed();
        obs.iter().flat_map(|&i| obs.iter().map(|&j| full[i * p + j]).collect::<Vec<_>>()).collect()
    }
}

/// Random model over `p_observed` nodes `X1..Xp` plus `q_latent` root
/// confounders `L1..Lq`.
///
/// Observed nodes follow a random topological order; each forward pair is an
/// edge with probability `expected_degree / (p + q - 1)`. Each latent picks
/// its observed children with the same probability and is topped up to two
/// children. Weights are uniform on `±[0.3, 0.9]`, noise sd is 1.
pub fn random_sem(p_observed: usize, q_latent: usize, expected_degree: f64, seed: u64) -> Result<SemModel, SimError> {
    if p_observed < 2 {
        return Err(SimError::InvalidParameter(format!("need at least 2 observed nodes, got {p_observed}")));
    }
    if !(expected_degree >= 0.0) || !expected_degree.is_finite() {
        return Err(SimError::InvalidParameter(format!("expected degree {expected_degree} is not a nonnegative number")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = p_observed + q_latent;
    let prob = (expected_degree / (total - 1) as f64).min(1.0);
    let weight = |rng: &mut ChaCha8Rng| {
        let m = rng.random_range(WEIGHT_MIN..=WEIGHT_MAX);
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    };

    let mut order: Vec<usize> = (0..p_observed).collect();
    order.shuffle(&mut rng);
    let mut weights = BTreeMap::new();
    for i in 0..p_observed {
        for j in (i + 1)..p_observed {
            if rng.random::<f64>() < prob {
                weights.insert((order[i], order[j]), weight(&mut rng));
            }
        }
    }
    for l in p_observed..total {
        let mut children: Vec<usize> = (0..p_observed).filter(|_| rng.random::<f64>() < prob).collect();
        if children.len() < 2 {
            let mut rest: Vec<usize> = (0..p_observed).filter(|v| !children.contains(v)).collect();
            rest.shuffle(&mut rng);
            children.extend(rest.into_iter().take(2 - children.len()));
        }
        for c in children {
            weights.insert((l, c), weight(&mut rng));
        }
    }

    let names: Vec<String> = (1..=p_observed)
        .map(|i| format!("X{i}"))
        .chain((1..=q_latent).map(|i| format!("L{i}")))
        .collect();
    let edges: Vec<(usize, usize)> = weights.keys().copied().collect();
    let latent: Vec<usize> = (p_observed..total).collect();
    let dag = Dag::new(names, &edges, &latent)?;
    SemModel::new(dag, weights, vec![1.0; total])
}

/// Ancestral sampling of `n` rows; latent columns are dropped.
pub fn sample(model: &SemModel, n: usize, seed: u64) -> Result<Dataset, SimError> {
    if n == 0 {
        return Err(SimError::InvalidParameter("sample size must be at least 1".into()));
    }
    let dag = &model.dag;
    let p = dag.n_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<Normal<f64>> = model
        .noise_sd
        .iter()
        .map(|&sd| Normal::new(0.0, sd).expect("positive sd"))
        .collect();
    let mut cols = vec![vec![0.0; n]; p];
    for r in 0..n {
        for &v in dag.topological_order() {
            let mut x = noise[v].sample(&mut rng);
            for &u in dag.parents(v) {
                x += model.weights[&(u, v)] * cols[u][r];
            }
            cols[v][r] = x;
        }
    }
    let columns = dag
        .observed()
        .into_iter()
        .map(|v| (dag.nodes()[v].clone(), std::mem::take(&mut cols[v])))
        .collect();
    Ok(Dataset::from_columns(columns).expect("names are unique and columns equal length"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub name: String,
    pub latent: bool,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdgeJson {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// Serialized form of a [`SemModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemJson {
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<WeightedEdgeJson>,
}

impl From<&SemModel> for SemJson {
    fn from(m: &SemModel) -> Self {
        let names = m.dag.nodes();
        SemJson {
            nodes: names
                .iter()
                .enumerate()
                .map(|(v, name)| NodeJson {
                    name: name.clone(),
                    latent: m.dag.is_latent(v),
                    noise_sd: m.noise_sd[v],
                })
                .collect(),
            edges: m
                .weights
                .iter()
                .map(|(&(a, b), &w)| WeightedEdgeJson {
                    from: names[a].clone(),
                    to: names[b].clone(),
                    weight: w,
                })
                .collect(),
        }
    }
}

impl SemJson {
    pub fn to_model(&self) -> Result<SemModel, SimError> {
        let names: Vec<String> = self.nodes.iter().map(|n| n.name.clone()).collect();
        let idx = |n: &str| names.iter().position(|m| m == n).ok_or_else(|| GraphError::UnknownNode(n.to_string()));
        let mut weights = BTreeMap::new();
        for e in &self.edges {
            weights.insert((idx(&e.from)?, idx(&e.to)?), e.weight);
        }
        let edges: Vec<(usize, usize)> = weights.keys().copied().collect();
        let latent: Vec<usize> = (0..names.len()).filter(|&v| self.nodes[v].latent).collect();
        let noise = self.nodes.iter().map(|n| n.noise_sd).collect();
        let dag = Dag::new(names, &edges, &latent)?;
        SemModel::new(dag, weights, noise)
    }
}
