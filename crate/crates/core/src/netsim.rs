//! Growth of citation networks by preferential attachment, optionally
//! weighted by node fitness.
//!
//! Growth starts from `m` fully connected seed nodes. Node `i` (0-based)
//! enters at time `t_i = i + 1`; each later node links to `m` distinct
//! existing nodes drawn with probability proportional to degree, or to
//! degree times fitness. The cumulative-weight index is rebuilt every step,
//! which costs O(N) per step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{BuildOptions, Corpus, RawAuthor, RawPaper};
use crate::distributions::{distribution, tail_fit, Binning, DistributionKind, TailFamily, TailFit};
use crate::inference::{ols_fit, DesignMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum FitnessDist {
    Constant,
    /// Uniform on (0, 1).
    Uniform,
    /// One fitness per node, in entry order.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    Degree,
    DegreeTimesFitness,
}

impl std::str::FromStr for Attachment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(Attachment::Degree),
            "degree_times_fitness" | "fitness" => Ok(Attachment::DegreeTimesFitness),
            other => Err(Error::Config(format!("unknown attachment rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_final: usize,
    pub m: usize,
    pub fitness: FitnessDist,
    pub attachment: Attachment,
    pub seed: u64,
    /// Network sizes at which every degree is recorded.
    pub snapshot_times: Vec<usize>,
}

impl SimConfig {
    pub fn new(n_final: usize, m: usize, seed: u64) -> Self {
        SimConfig {
            n_final,
            m,
            fitness: FitnessDist::Constant,
            attachment: Attachment::Degree,
            seed,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.n_final < self.m {
            return Err(Error::Config(format!(
                "n_final = {} is smaller than the {} seed nodes",
                self.n_final, self.m
            )));
        }
        if let FitnessDist::Custom(v) = &self.fitness {
            if v.len() != self.n_final {
                return Err(Error::Config(format!(
                    "{} custom fitness values for {} nodes",
                    v.len(),
                    self.n_final
                )));
            }
            if let Some(bad) = v.iter().find(|f| !f.is_finite() || **f < 0.0) {
                return Err(Error::Config(format!("fitness {bad} is not finite and nonnegative")));
            }
        }
        if let Some(t) = self.snapshot_times.iter().find(|&&t| t < self.m || t > self.n_final) {
            return Err(Error::Config(format!(
                "snapshot time {t} outside [{}, {}]",
                self.m, self.n_final
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimNode {
    pub entry_time: usize,
    pub fitness: f64,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: usize,
    /// Degrees of the nodes present at `time`.
    pub degrees: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimNetwork {
    pub config: SimConfig,
    pub nodes: Vec<SimNode>,
    /// `(source, target)` with the source always the newer node.
    pub edges: Vec<(usize, usize)>,
    pub snapshots: Vec<Snapshot>,
}

impl SimNetwork {
    pub fn degree_sum(&self) -> u64 {
        self.nodes.iter().map(|n| u64::from(n.degree)).sum()
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.nodes.len()];
        for &(_, t) in &self.edges {
            d[t] += 1;
        }
        d
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| f64::from(n.degree)).collect()
    }
}

/// Cumulative weights for drawing a node with probability proportional to
/// its weight.
#[derive(Debug, Clone)]
pub struct AttachmentIndex {
    cumulative: Vec<f64>,
}

impl AttachmentIndex {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        AttachmentIndex { cumulative }
    }

    fn weight(&self, i: usize) -> f64 {
        self.cumulative[i] - if i == 0 { 0.0 } else { self.cumulative[i - 1] }
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Uniform over all nodes when every weight is zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total();
        if total <= 0.0 {
            return rng.random_range(0..self.len());
        }
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.len() - 1)
    }

    /// `m` distinct nodes, drawn sequentially without replacement.
    pub fn sample_distinct<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<usize> {
        let n = self.len();
        if m >= n {
            return (0..n).collect();
        }
        let mut picked = Vec::with_capacity(m);
        let mut attempts = 0usize;
        while picked.len() < m {
            let c = self.sample(rng);
            if !picked.contains(&c) {
                picked.push(c);
                continue;
            }
            attempts += 1;
            if attempts > 64 * m {
                // Mass is concentrated on the picked nodes; draw the rest exactly.
                while picked.len() < m {
                    let rest = AttachmentIndex::new(
                        (0..n).map(|i| if picked.contains(&i) { 0.0 } else { self.weight(i) }),
                    );
                    let c = if rest.total() > 0.0 {
                        rest.sample(rng)
                    } else {
                        (0..n).find(|i| !picked.contains(i)).expect("m < n")
                    };
                    picked.push(c);
                }
            }
        }
        picked
    }
}

pub fn grow(config: &SimConfig) -> Result<SimNetwork> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_final;
    let m = config.m;
    let fitness: Vec<f64> = match &config.fitness {
        FitnessDist::Constant => vec![1.0; n],
        FitnessDist::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        FitnessDist::Custom(v) => v.clone(),
    };
    let mut degree = vec![0u32; n];
    let mut edges = Vec::with_capacity(m * (m.saturating_sub(1)) / 2 + m * (n - m));
    for i in 0..m {
        for j in 0..i {
            edges.push((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let mut snapshot_times = config.snapshot_times.clone();
    snapshot_times.sort_unstable();
    snapshot_times.dedup();
    let mut pending = snapshot_times.into_iter().peekable();
    let mut snapshots = Vec::new();
    let mut record = |t: usize, degree: &[u32], snapshots: &mut Vec<Snapshot>| {
        while pending.peek() == Some(&t) {
            pending.next();
            snapshots.push(Snapshot {
                time: t,
                degrees: degree[..t].to_vec(),
            });
        }
    };
    record(m, &degree, &mut snapshots);

    for new in m..n {
        let index = AttachmentIndex::new((0..new).map(|j| match config.attachment {
            Attachment::Degree => f64::from(degree[j]),
            Attachment::DegreeTimesFitness => f64::from(degree[j]) * fitness[j],
        }));
        for target in index.sample_distinct(m, &mut rng) {
            edges.push((new, target));
            degree[new] += 1;
            degree[target] += 1;
        }
        record(new + 1, &degree, &mut snapshots);
    }

    let nodes = (0..n)
        .map(|i| SimNode {
            entry_time: i + 1,
            fitness: fitness[i],
            degree: degree[i],
        })
        .collect();
    Ok(SimNetwork {
        config: config.clone(),
        nodes,
        edges,
        snapshots,
    })
}

/// Independent runs in parallel; results follow the order of `configs`.
pub fn grow_replicates(configs: &[SimConfig]) -> Result<Vec<SimNetwork>> {
    configs.par_iter().map(grow).collect()
}

/// Slope of `ln k_i` on `ln(t_final / t_i)` over `(t_i, k_i)` with `k_i > 0`.
pub fn estimate_beta_from(points: &[(f64, f64)], t_final: f64) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(_, k)| *k > 0.0)
        .map(|&(t, k)| ((t_final / t).ln(), k.ln()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} nodes with positive degree; need at least 3",
            x.len()
        )));
    }
    let fit = ols_fit(&DesignMatrix::builder(y).intercept("ln_m").column("beta", x).build()?)?;
    Ok(fit.coefficients[1])
}

/// Growth exponent from final degrees.
pub fn estimate_beta(network: &SimNetwork) -> Result<f64> {
    let pts: Vec<(f64, f64)> = network
        .nodes
        .iter()
        .map(|n| (n.entry_time as f64, f64::from(n.degree)))
        .collect();
    estimate_beta_from(&pts, network.nodes.len() as f64)
}

/// Growth exponent from the degrees recorded in one snapshot.
pub fn estimate_beta_at(snapshot: &Snapshot) -> Result<f64> {
    let pts: Vec<(f64, f64)> = snapshot
        .degrees
        .iter()
        .enumerate()
        .map(|(i, &k)| ((i + 1) as f64, f64::from(k)))
        .collect();
    estimate_beta_from(&pts, snapshot.time as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessStratum {
    pub mean_fitness: f64,
    pub nodes: usize,
    pub beta: f64,
}

/// Splits nodes into `strata` equal groups by fitness and estimates the
/// growth exponent within each, in increasing fitness order.
pub fn estimate_beta_by_fitness(network: &SimNetwork, strata: usize) -> Result<Vec<FitnessStratum>> {
    if strata == 0 {
        return Err(Error::Config("need at least one stratum".into()));
    }
    let mut order: Vec<usize> = (0..network.nodes.len()).collect();
    order.sort_by(|&a, &b| {
        network.nodes[a]
            .fitness
            .total_cmp(&network.nodes[b].fitness)
            .then(a.cmp(&b))
    });
    let t_final = network.nodes.len() as f64;
    let size = order.len() / strata;
    (0..strata)
        .map(|s| {
            let end = if s + 1 == strata { order.len() } else { (s + 1) * size };
            let group = &order[s * size..end];
            let pts: Vec<(f64, f64)> = group
                .iter()
                .map(|&i| {
                    let n = &network.nodes[i];
                    (n.entry_time as f64, f64::from(n.degree))
                })
                .collect();
            Ok(FitnessStratum {
                mean_fitness: group.iter().map(|&i| network.nodes[i].fitness).sum::<f64>() / group.len() as f64,
                nodes: group.len(),
                beta: estimate_beta_from(&pts, t_final)?,
            })
        })
        .collect()
}

/// Density exponent γ of the degree distribution `p(k) ~ k^-γ`, read off
/// the survival curve as `1 - slope` over degrees `>= m` whose survival
/// count is at least `min_survivors`.
pub fn degree_exponent(network: &SimNetwork, min_survivors: usize) -> Result<(f64, TailFit)> {
    let survival = distribution(&network.degrees(), DistributionKind::Cumulative, Binning::Unit)?
        .restricted(network.config.m as f64, f64::INFINITY)
        .with_min_support(min_survivors);
    let fit = tail_fit(&survival, TailFamily::PowerLaw)?;
    Ok((1.0 - fit.slope, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExportOptions {
    /// Publication years advanced per entry step.
    pub years_per_step: f64,
    pub start_year: i32,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            years_per_step: 0.01,
            start_year: 1970,
        }
    }
}

pub fn node_id(network: &SimNetwork, i: usize) -> String {
    let width = network.nodes.len().max(1).to_string().len();
    format!("n{i:0width$}")
}

/// Nodes become single-author papers in venue `sim`, edges references. The
/// collection year is one past the last publication year.
pub fn export_as_corpus(network: &SimNetwork, options: &ExportOptions) -> Result<Corpus> {
    if !(options.years_per_step >= 0.0 && options.years_per_step.is_finite()) {
        return Err(Error::Config("years_per_step must be finite and nonnegative".into()));
    }
    let year = |t: usize| options.start_year + ((t - 1) as f64 * options.years_per_step).floor() as i32;
    let mut refs: Vec<Vec<String>> = vec![Vec::new(); network.nodes.len()];
    for &(s, t) in &network.edges {
        refs[s].push(node_id(network, t));
    }
    let raw: Vec<RawPaper> = network
        .nodes
        .iter()
        .zip(refs)
        .enumerate()
        .map(|(i, (n, references))| RawPaper {
            paper_id: node_id(network, i),
            year: year(n.entry_time),
            venue: "sim".into(),
            authors: vec![RawAuthor {
                name: format!("Node {i}"),
                scholar_id: Some(format!("s{}", &node_id(network, i)[1..])),
            }],
            references,
        })
        .collect();
    let last = network.nodes.last().map_or(options.start_year, |n| year(n.entry_time));
    let opts = BuildOptions {
        strict_years: true,
        collection_year: Some(last + 1),
        ..BuildOptions::default()
    };
    Ok(Corpus::build(raw, &opts)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_network_is_forced() {
        let net = grow(&SimConfig::new(4, 3, 1)).unwrap();
        let d: Vec<u32> = net.nodes.iter().map(|n| n.degree).collect();
        assert_eq!(d, vec![3, 3, 3, 3]);
        assert_eq!(net.edges.len(), 6);
    }

    #[test]
    fn seed_only() {
        let net = grow(&SimConfig::new(3, 3, 1)).unwrap();
        assert_eq!(net.edges.len(), 3);
        let c = export_as_corpus(&net, &ExportOptions::default()).unwrap();
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn invalid_configs() {
        assert!(grow(&SimConfig::new(10, 0, 1)).is_err());
        assert!(grow(&SimConfig::new(2, 3, 1)).is_err());
        let mut c = SimConfig::new(5, 2, 1);
        c.fitness = FitnessDist::Custom(vec![1.0; 4]);
        assert!(grow(&c).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let mut c = SimConfig::new(500, 2, 7);
        c.fitness = FitnessDist::Uniform;
        c.attachment = Attachment::DegreeTimesFitness;
        assert_eq!(grow(&c).unwrap().edges, grow(&c).unwrap().edges);
        c.seed = 8;
        let other = grow(&c).unwrap();
        c.seed = 7;
        assert_ne!(grow(&c).unwrap().edges, other.edges);
    }

    #[test]
    fn handshake_after_every_step() {
        let mut c = SimConfig::new(300, 3, 2);
        c.snapshot_times = (3..=300).collect();
        let net = grow(&c).unwrap();
        for s in &net.snapshots {
            let sum: u64 = s.degrees.iter().map(|&d| u64::from(d)).sum();
            assert_eq!(sum, (3 * 2 + 2 * 3 * (s.time - 3)) as u64, "t = {}", s.time);
        }
        let mut out = vec![0usize; 300];
        for &(s, t) in &net.edges {
            assert!(s > t);
            out[s] += 1;
        }
        assert!(out[3..].iter().all(|&o| o == 3));
    }

    #[test]
    fn m_one_starts_from_isolated_seed() {
        let net = grow(&SimConfig::new(50, 1, 3)).unwrap();
        assert_eq!(net.edges.len(), 49);
        assert_eq!(net.degree_sum(), 98);
    }

    #[test]
    fn planted_power_growth() {
        let pts: Vec<(f64, f64)> = (1..=200).map(|t| (t as f64, 3.0 * (1000.0 / t as f64).sqrt())).collect();
        assert!((estimate_beta_from(&pts, 1000.0).unwrap() - 0.5).abs() < 1e-10);
        assert!(estimate_beta_from(&[(1.0, 1.0), (2.0, 0.0)], 3.0).is_err());
    }

    #[test]
    fn distinct_targets_even_when_mass_concentrates() {
        let idx = AttachmentIndex::new([1e12, 1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut got = idx.sample_distinct(3, &mut rng);
        got.sort_unstable();
        got.dedup();
        assert_eq!(got.len(), 3);
        assert!(got.contains(&0) && got.contains(&1));
    }

    #[test]
    fn export_preserves_in_degree() {
        let net = grow(&SimConfig::new(400, 2, 11)).unwrap();
        let c = export_as_corpus(&net, &ExportOptions::default()).unwrap();
        let indeg = net.in_degrees();
        for (i, k) in indeg.iter().enumerate() {
            assert_eq!(c.paper(&node_id(&net, i)).unwrap().citation_count, *k);
        }
        assert_eq!(c.scholars().len(), 400);
    }
}
