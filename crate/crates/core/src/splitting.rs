//! Label splittings and the exact search for a splitting within a label
//! budget that makes an LTS embeddable.
//!
//! Up to renaming, a splitting is a partition of each label's edge set into
//! blocks. The block holding the label's lowest-index edge keeps the
//! original name; the other blocks become `<label>#1`, `<label>#2`, ... in
//! order of their lowest edge index. The search enumerates these partitions
//! as restricted growth strings, label by label.
//!
//! Two facts keep the search small:
//!
//! * Refining a splitting never destroys embeddability (every effect of the
//!   coarser LTS lifts to the finer one with identical state values). So if a
//!   partial assignment fails even when all undecided labels are split into
//!   singletons, no completion can succeed.
//! * If the edges of one block, taken alone, close an undirected cycle with
//!   a nonzero net count, that label's effect is forced to zero and every
//!   non-loop edge in the block joins two inseparable states. A label whose
//!   full edge set has this shape needs at least two blocks.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::lts::{significant_lines, Lts, ParseError};
use crate::regions::RegionSystem;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("splitting covers {actual} edges, the LTS has {expected}")]
    EdgeCount { expected: usize, actual: usize },
    #[error("original label {0} is missing from the new alphabet")]
    MissingLabel(String),
    #[error("label {0} occurs twice in the new alphabet")]
    DuplicateLabel(String),
    #[error("label {0} has no preimage under rho")]
    UnmappedLabel(String),
    #[error("rho must be the identity on original label {0}")]
    RhoNotIdentity(String),
    #[error("new label {0} is not used by any edge")]
    UnusedLabel(String),
    #[error("edge {edge} relabelled to {new}, which rho maps to {mapped} instead of {original}")]
    RhoMismatch {
        edge: usize,
        new: String,
        mapped: String,
        original: String,
    },
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A relabelling of edges together with the map back to the original
/// alphabet. Original labels come first in `new_labels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSplitting {
    new_labels: Vec<String>,
    rho: Vec<usize>,
    edge_labels: Vec<usize>,
}

impl LabelSplitting {
    /// Builds and checks a splitting from names. `rho` maps each label of the
    /// new alphabet to an original label; `edge_relabel[i]` is the new label
    /// of edge `i`.
    pub fn new(
        lts: &Lts,
        new_labels: &[String],
        rho: &HashMap<String, String>,
        edge_relabel: &[String],
    ) -> Result<Self, SplitError> {
        if edge_relabel.len() != lts.edges().len() {
            return Err(SplitError::EdgeCount {
                expected: lts.edges().len(),
                actual: edge_relabel.len(),
            });
        }
        let mut seen = HashSet::new();
        for l in new_labels {
            if !seen.insert(l) {
                return Err(SplitError::DuplicateLabel(l.clone()));
            }
        }
        for l in lts.labels() {
            if !seen.contains(l) {
                return Err(SplitError::MissingLabel(l.clone()));
            }
        }
        let mut ordered: Vec<String> = lts.labels().to_vec();
        ordered.extend(
            new_labels
                .iter()
                .filter(|l| lts.label_id(l).is_none())
                .cloned(),
        );
        let index: HashMap<&str, usize> = ordered
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut rho_ids = Vec::with_capacity(ordered.len());
        for l in &ordered {
            let target = rho
                .get(l)
                .ok_or_else(|| SplitError::UnmappedLabel(l.clone()))?;
            let t = lts
                .label_id(target)
                .ok_or_else(|| SplitError::UnknownLabel(target.clone()))?;
            if lts.label_id(l).is_some_and(|own| own != t) {
                return Err(SplitError::RhoNotIdentity(l.clone()));
            }
            rho_ids.push(t);
        }
        let mut edge_labels = Vec::with_capacity(edge_relabel.len());
        for (i, (name, e)) in edge_relabel.iter().zip(lts.edges()).enumerate() {
            let &id = index
                .get(name.as_str())
                .ok_or_else(|| SplitError::UnknownLabel(name.clone()))?;
            if rho_ids[id] != e.label {
                return Err(SplitError::RhoMismatch {
                    edge: i,
                    new: name.clone(),
                    mapped: lts.label_name(rho_ids[id]).to_string(),
                    original: lts.label_name(e.label).to_string(),
                });
            }
            edge_labels.push(id);
        }
        for (id, l) in ordered.iter().enumerate().skip(lts.num_labels()) {
            if !edge_labels.contains(&id) {
                return Err(SplitError::UnusedLabel(l.clone()));
            }
        }
        Ok(LabelSplitting {
            new_labels: ordered,
            rho: rho_ids,
            edge_labels,
        })
    }

    pub fn identity(lts: &Lts) -> Self {
        LabelSplitting {
            new_labels: lts.labels().to_vec(),
            rho: (0..lts.num_labels()).collect(),
            edge_labels: lts.edges().iter().map(|e| e.label).collect(),
        }
    }

    /// Canonical splitting from a block index per edge. Block numbers only
    /// need to be consistent within a label; they are renumbered by lowest
    /// edge index.
    pub fn from_blocks(lts: &Lts, blocks: &[usize]) -> Self {
        assert_eq!(blocks.len(), lts.edges().len());
        let mut new_labels = lts.labels().to_vec();
        let mut rho: Vec<usize> = (0..lts.num_labels()).collect();
        let mut taken: HashSet<String> = new_labels.iter().cloned().collect();
        let mut block_label: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next_suffix = vec![1usize; lts.num_labels()];
        let mut named = vec![false; lts.num_labels()];
        let mut edge_labels = Vec::with_capacity(blocks.len());
        for (e, &b) in lts.edges().iter().zip(blocks) {
            let id = *block_label.entry((e.label, b)).or_insert_with(|| {
                if !named[e.label] {
                    named[e.label] = true;
                    return e.label;
                }
                let base = lts.label_name(e.label);
                let name = loop {
                    let candidate = format!("{base}#{}", next_suffix[e.label]);
                    next_suffix[e.label] += 1;
                    if !taken.contains(&candidate) {
                        break candidate;
                    }
                };
                taken.insert(name.clone());
                new_labels.push(name);
                rho.push(e.label);
                new_labels.len() - 1
            });
            edge_labels.push(id);
        }
        LabelSplitting {
            new_labels,
            rho,
            edge_labels,
        }
    }

    pub fn new_labels(&self) -> &[String] {
        &self.new_labels
    }

    /// `|Σ'|`
    pub fn label_count(&self) -> usize {
        self.new_labels.len()
    }

    /// New label index of edge `e`.
    pub fn edge_label(&self, e: usize) -> usize {
        self.edge_labels[e]
    }

    pub fn edge_label_name(&self, e: usize) -> &str {
        &self.new_labels[self.edge_labels[e]]
    }

    /// Original label index that new label `l` maps back to.
    pub fn rho(&self, l: usize) -> usize {
        self.rho[l]
    }

    pub fn same_label(&self, e: usize, f: usize) -> bool {
        self.edge_labels[e] == self.edge_labels[f]
    }

    /// No label was split. Split-off labels always sit after their origin.
    pub fn is_identity(&self) -> bool {
        self.rho.iter().enumerate().all(|(i, &r)| r == i)
    }

    /// Text form: `labels <count>` followed by one `split <edge> <label>`
    /// line per edge whose label changed.
    pub fn to_text(&self, lts: &Lts) -> String {
        let mut out = format!("labels {}\n", self.label_count());
        for (i, e) in lts.edges().iter().enumerate() {
            if self.edge_labels[i] != e.label {
                out.push_str(&format!("split {i} {}\n", self.edge_label_name(i)));
            }
        }
        out
    }

    /// Reads the text form back against the LTS it was produced for.
    pub fn parse(lts: &Lts, text: &str) -> Result<Self, SplitError> {
        let mut lines = significant_lines(text);
        let count: usize = match lines.next() {
            Some((n, tokens)) => match tokens.as_slice() {
                ["labels", c] => c
                    .parse()
                    .map_err(|_| ParseError::new(n, format!("bad label count `{c}`")))?,
                _ => return Err(ParseError::new(n, "expected `labels <count>`").into()),
            },
            None => return Err(ParseError::new(1, "empty splitting").into()),
        };
        let mut relabel: Vec<String> = lts
            .edges()
            .iter()
            .map(|e| lts.label_name(e.label).to_string())
            .collect();
        let mut new_labels: Vec<String> = lts.labels().to_vec();
        let mut rho: HashMap<String, String> =
            new_labels.iter().map(|l| (l.clone(), l.clone())).collect();
        for (n, tokens) in lines {
            let ["split", edge, label] = tokens.as_slice() else {
                return Err(ParseError::new(n, "expected `split <edge-index> <label>`").into());
            };
            let edge: usize = edge
                .parse()
                .ok()
                .filter(|&e| e < relabel.len())
                .ok_or_else(|| ParseError::new(n, format!("bad edge index `{edge}`")))?;
            let original = lts.label_name(lts.edges()[edge].label).to_string();
            if !rho.contains_key(*label) {
                new_labels.push(label.to_string());
                rho.insert(label.to_string(), original);
            }
            relabel[edge] = label.to_string();
        }
        let sp = LabelSplitting::new(lts, &new_labels, &rho, &relabel)?;
        if sp.label_count() != count {
            return Err(ParseError::new(
                1,
                format!(
                    "declared {count} labels, splitting uses {}",
                    sp.label_count()
                ),
            )
            .into());
        }
        Ok(sp)
    }
}

/// The relabelled LTS: same states, edges and initial state.
pub fn apply(lts: &Lts, sp: &LabelSplitting) -> Result<Lts, SplitError> {
    if sp.edge_labels.len() != lts.edges().len() {
        return Err(SplitError::EdgeCount {
            expected: lts.edges().len(),
            actual: sp.edge_labels.len(),
        });
    }
    for (i, e) in lts.edges().iter().enumerate() {
        let l = sp.edge_labels[i];
        if sp.rho[l] != e.label {
            return Err(SplitError::RhoMismatch {
                edge: i,
                new: sp.new_labels[l].clone(),
                mapped: lts.label_name(sp.rho[l]).to_string(),
                original: lts.label_name(e.label).to_string(),
            });
        }
    }
    Ok(lts.relabelled(sp.new_labels.clone(), &sp.edge_labels))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Abort after visiting this many partial assignments.
    pub node_budget: Option<u64>,
    /// Reject blocks whose edges alone force a zero effect, and count such
    /// labels as needing two blocks when bounding the budget.
    pub forced_split_rule: bool,
    /// At every node, test the most refined completion and prune if even
    /// that is not embeddable.
    pub relaxation_check: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_budget: None,
            forced_split_rule: true,
            relaxation_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitOutcome {
    Found(LabelSplitting),
    NotFound,
    BudgetExhausted,
}

impl SplitOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SplitOutcome::Found(_))
    }

    pub fn splitting(&self) -> Option<&LabelSplitting> {
        match self {
            SplitOutcome::Found(sp) => Some(sp),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptimizeOutcome {
    Optimal {
        labels: usize,
        splitting: LabelSplitting,
    },
    BudgetExhausted {
        at: usize,
    },
}

/// True iff the edges, taken alone, force a zero effect on their shared
/// label and one of them joins two distinct states.
pub fn forces_collapse(lts: &Lts, edges: &[usize]) -> bool {
    if !edges
        .iter()
        .any(|&e| lts.edges()[e].source != lts.edges()[e].target)
    {
        return false;
    }
    // potential p with p(target) = p(source) + 1 along every edge
    let mut adj: HashMap<usize, Vec<(usize, i64)>> = HashMap::new();
    for &e in edges {
        let edge = lts.edges()[e];
        if edge.source == edge.target {
            return true;
        }
        adj.entry(edge.source).or_default().push((edge.target, 1));
        adj.entry(edge.target).or_default().push((edge.source, -1));
    }
    let mut potential: HashMap<usize, i64> = HashMap::new();
    let starts: Vec<usize> = adj.keys().copied().collect();
    for start in starts {
        if potential.contains_key(&start) {
            continue;
        }
        potential.insert(start, 0);
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            let ps = potential[&s];
            for &(t, d) in &adj[&s] {
                match potential.get(&t) {
                    Some(&pt) if pt != ps + d => return true,
                    Some(_) => {}
                    None => {
                        potential.insert(t, ps + d);
                        stack.push(t);
                    }
                }
            }
        }
    }
    false
}

/// Restricted growth strings of a given length with at most `max_blocks`
/// distinct values, in lexicographic order.
struct GrowthStrings {
    current: Vec<usize>,
    max_blocks: usize,
    started: bool,
}

impl GrowthStrings {
    fn new(len: usize, max_blocks: usize) -> Self {
        GrowthStrings {
            current: vec![0; len],
            max_blocks,
            started: false,
        }
    }
}

impl Iterator for GrowthStrings {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.max_blocks == 0 {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        let n = self.current.len();
        for i in (1..n).rev() {
            let prefix_max = self.current[..i].iter().copied().max().unwrap_or(0);
            let v = self.current[i];
            if v <= prefix_max && v + 1 < self.max_blocks {
                self.current[i] = v + 1;
                for x in &mut self.current[i + 1..] {
                    *x = 0;
                }
                return Some(self.current.clone());
            }
        }
        None
    }
}

fn edges_by_label(lts: &Lts) -> Vec<Vec<usize>> {
    let mut by_label = vec![Vec::new(); lts.num_labels()];
    for (i, e) in lts.edges().iter().enumerate() {
        by_label[e.label].push(i);
    }
    by_label
}

pub fn is_embeddable(lts: &Lts) -> bool {
    RegionSystem::new(lts).is_embeddable().is_embeddable()
}

struct Search<'a> {
    lts: &'a Lts,
    q: usize,
    config: &'a SearchConfig,
    label_edges: Vec<Vec<usize>>,
    order: Vec<usize>,
    /// Minimum blocks needed by each label in `order`, suffix-summed.
    suffix_need: Vec<usize>,
    blocks: Vec<Option<usize>>,
    nodes: u64,
}

enum Step {
    Continue,
    Found(Vec<usize>),
    Exhausted,
}

impl<'a> Search<'a> {
    fn new(lts: &'a Lts, q: usize, config: &'a SearchConfig) -> Self {
        let label_edges = edges_by_label(lts);
        let mut order: Vec<usize> = (0..lts.num_labels())
            .filter(|&l| !label_edges[l].is_empty())
            .collect();
        order.sort_by_key(|&l| std::cmp::Reverse(label_edges[l].len()));
        let need: Vec<usize> = order
            .iter()
            .map(|&l| {
                if config.forced_split_rule && forces_collapse(lts, &label_edges[l]) {
                    2
                } else {
                    1
                }
            })
            .collect();
        let mut suffix_need = vec![0; order.len() + 1];
        for i in (0..order.len()).rev() {
            suffix_need[i] = suffix_need[i + 1] + need[i];
        }
        Search {
            lts,
            q,
            config,
            label_edges,
            order,
            suffix_need,
            blocks: vec![None; lts.edges().len()],
            nodes: 0,
        }
    }

    /// Labels without edges still belong to the alphabet.
    fn fixed_labels(&self) -> usize {
        self.lts.num_labels() - self.order.len()
    }

    /// Relabels assigned edges by block and every unassigned edge with a
    /// label of its own.
    fn refined_embeddable(&self) -> bool {
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_labels = Vec::with_capacity(self.blocks.len());
        for (i, e) in self.lts.edges().iter().enumerate() {
            let key = match self.blocks[i] {
                Some(b) => (e.label, b),
                None => (usize::MAX, i),
            };
            let next = ids.len();
            edge_labels.push(*ids.entry(key).or_insert(next));
        }
        let names = (0..ids.len()).map(|i| i.to_string()).collect();
        is_embeddable(&self.lts.relabelled(names, &edge_labels))
    }

    fn run(&mut self) -> SplitOutcome {
        if self.fixed_labels() + self.suffix_need[0] > self.q {
            return SplitOutcome::NotFound;
        }
        if self.order.is_empty() {
            return if is_embeddable(self.lts) {
                SplitOutcome::Found(LabelSplitting::identity(self.lts))
            } else {
                SplitOutcome::NotFound
            };
        }
        match self.descend(0, self.fixed_labels()) {
            Step::Found(blocks) => {
                SplitOutcome::Found(LabelSplitting::from_blocks(self.lts, &blocks))
            }
            Step::Continue => SplitOutcome::NotFound,
            Step::Exhausted => SplitOutcome::BudgetExhausted,
        }
    }

    fn descend(&mut self, depth: usize, used: usize) -> Step {
        let label = self.order[depth];
        let edges = self.label_edges[label].clone();
        let available = self.q - used - self.suffix_need[depth + 1];
        let leaf = depth + 1 == self.order.len();
        for rgs in GrowthStrings::new(edges.len(), available.min(edges.len())) {
            let count = rgs.iter().copied().max().map_or(0, |m| m + 1);
            if self.config.forced_split_rule {
                let collapses = (0..count).any(|b| {
                    let block: Vec<usize> = edges
                        .iter()
                        .zip(&rgs)
                        .filter(|(_, &x)| x == b)
                        .map(|(&e, _)| e)
                        .collect();
                    forces_collapse(self.lts, &block)
                });
                if collapses {
                    continue;
                }
            }
            self.nodes += 1;
            if self
                .config
                .node_budget
                .is_some_and(|budget| self.nodes > budget)
            {
                self.clear(&edges);
                return Step::Exhausted;
            }
            for (&e, &b) in edges.iter().zip(&rgs) {
                self.blocks[e] = Some(b);
            }
            if (leaf || self.config.relaxation_check) && !self.refined_embeddable() {
                continue;
            }
            if leaf {
                let blocks = self.blocks.iter().map(|b| b.expect("leaf")).collect();
                self.clear(&edges);
                return Step::Found(blocks);
            }
            match self.descend(depth + 1, used + count) {
                Step::Continue => {}
                done => {
                    self.clear(&edges);
                    return done;
                }
            }
        }
        self.clear(&edges);
        Step::Continue
    }

    fn clear(&mut self, edges: &[usize]) {
        for &e in edges {
            self.blocks[e] = None;
        }
    }
}

/// Is there a splitting with at most `q` labels making `lts` embeddable?
/// Exhaustive; never gives up.
pub fn decide(lts: &Lts, q: usize) -> SplitOutcome {
    decide_with(lts, q, &SearchConfig::default())
}

pub fn decide_with(lts: &Lts, q: usize, config: &SearchConfig) -> SplitOutcome {
    let outcome = Search::new(lts, q, config).run();
    if let SplitOutcome::Found(sp) = &outcome {
        debug_assert!(sp.label_count() <= q);
        debug_assert!(is_embeddable(
            &apply(lts, sp).expect("search builds valid splittings")
        ));
    }
    outcome
}

/// Smallest label count admitting an embeddable splitting, found by trying
/// `|Σ|, |Σ|+1, ...`.
pub fn optimize(lts: &Lts) -> (usize, LabelSplitting) {
    match optimize_with(lts, &SearchConfig::default()) {
        OptimizeOutcome::Optimal { labels, splitting } => (labels, splitting),
        OptimizeOutcome::BudgetExhausted { .. } => unreachable!("no node budget"),
    }
}

/// Like [`optimize`]; the node budget applies to each individual query.
pub fn optimize_with(lts: &Lts, config: &SearchConfig) -> OptimizeOutcome {
    let finest = lts.num_labels() + lts.edges().len();
    for q in lts.num_labels()..=finest {
        match decide_with(lts, q, config) {
            SplitOutcome::Found(splitting) => {
                return OptimizeOutcome::Optimal {
                    labels: splitting.label_count(),
                    splitting,
                }
            }
            SplitOutcome::BudgetExhausted => return OptimizeOutcome::BudgetExhausted { at: q },
            SplitOutcome::NotFound => {}
        }
    }
    unreachable!("splitting every edge apart is always embeddable")
}

impl fmt::Display for SplitOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitOutcome::Found(sp) => write!(f, "found ({} labels)", sp.label_count()),
            SplitOutcome::NotFound => write!(f, "not-found"),
            SplitOutcome::BudgetExhausted => write!(f, "budget-exhausted"),
        }
    }
}
