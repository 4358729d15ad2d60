//! Labelled transition systems, spanning trees, Parikh vectors and the
//! cycle base.
//!
//! States and labels are interned: an [`Lts`] keeps their names in
//! first-declaration order and edges refer to them by index. The label index
//! doubles as the Parikh coordinate.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::{Add, Sub};

use thiserror::Error;

use crate::linalg::{rat, RatMatrix, RatVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: usize,
    pub label: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    states: Vec<String>,
    labels: Vec<String>,
    edges: Vec<Edge>,
    initial: usize,
    state_ids: HashMap<String, usize>,
    label_ids: HashMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("initial state index {0} is not a declared state")]
    MissingInitial(usize),
    #[error("edge {edge} references an undeclared state or label")]
    DanglingReference { edge: usize },
    #[error("state {source_state} has more than one outgoing edge labelled {label}")]
    Nondeterministic { source_state: String, label: String },
    #[error("state {0} is not reachable from the initial state")]
    Unreachable(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("unknown state index {0}")]
    UnknownState(usize),
    #[error("unknown edge index {0}")]
    UnknownEdge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Incremental constructor that declares states and labels on first use.
#[derive(Clone, Debug)]
pub struct LtsBuilder {
    lts: Lts,
}

impl LtsBuilder {
    pub fn new(initial: &str) -> Self {
        let mut lts = Lts {
            states: Vec::new(),
            labels: Vec::new(),
            edges: Vec::new(),
            initial: 0,
            state_ids: HashMap::new(),
            label_ids: HashMap::new(),
        };
        lts.initial = lts.intern_state(initial);
        LtsBuilder { lts }
    }

    pub fn state(&mut self, name: &str) -> usize {
        self.lts.intern_state(name)
    }

    pub fn label(&mut self, name: &str) -> usize {
        self.lts.intern_label(name)
    }

    /// Adds an edge and returns its index.
    pub fn edge(&mut self, source: &str, label: &str, target: &str) -> usize {
        let source = self.lts.intern_state(source);
        let label = self.lts.intern_label(label);
        let target = self.lts.intern_state(target);
        self.lts.edges.push(Edge {
            source,
            label,
            target,
        });
        self.lts.edges.len() - 1
    }

    pub fn build(self) -> Lts {
        self.lts
    }
}

impl Lts {
    pub fn builder(initial: &str) -> LtsBuilder {
        LtsBuilder::new(initial)
    }

    /// Assembles an LTS without any checks; run [`Lts::validate`] afterwards.
    pub fn from_raw_parts(
        states: Vec<String>,
        labels: Vec<String>,
        edges: Vec<Edge>,
        initial: usize,
    ) -> Self {
        let state_ids = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let label_ids = labels
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Lts {
            states,
            labels,
            edges,
            initial,
            state_ids,
            label_ids,
        }
    }

    fn intern_state(&mut self, name: &str) -> usize {
        if let Some(&id) = self.state_ids.get(name) {
            return id;
        }
        self.states.push(name.to_string());
        self.state_ids
            .insert(name.to_string(), self.states.len() - 1);
        self.states.len() - 1
    }

    fn intern_label(&mut self, name: &str) -> usize {
        if let Some(&id) = self.label_ids.get(name) {
            return id;
        }
        self.labels.push(name.to_string());
        self.label_ids
            .insert(name.to_string(), self.labels.len() - 1);
        self.labels.len() - 1
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn label_name(&self, t: usize) -> &str {
        &self.labels[t]
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.state_ids.get(name).copied()
    }

    pub fn label_id(&self, name: &str) -> Option<usize> {
        self.label_ids.get(name).copied()
    }

    /// Index of the edge `source --label--> target`, looked up by name.
    pub fn find_edge(&self, source: &str, label: &str, target: &str) -> Option<usize> {
        let (s, t, l) = (
            self.state_id(source)?,
            self.state_id(target)?,
            self.label_id(label)?,
        );
        self.edges
            .iter()
            .position(|e| e.source == s && e.target == t && e.label == l)
    }

    /// Same graph with a new alphabet; `edge_labels[i]` indexes into `labels`.
    pub fn relabelled(&self, labels: Vec<String>, edge_labels: &[usize]) -> Lts {
        assert_eq!(edge_labels.len(), self.edges.len());
        let edges = self
            .edges
            .iter()
            .zip(edge_labels)
            .map(|(e, &label)| Edge { label, ..*e })
            .collect();
        Lts::from_raw_parts(self.states.clone(), labels, edges, self.initial)
    }

    /// Checks determinism and reachability. All violations are reported.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        if self.initial >= self.states.len() {
            violations.push(Violation::MissingInitial(self.initial));
        }
        let mut seen = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.source >= self.states.len()
                || e.target >= self.states.len()
                || e.label >= self.labels.len()
            {
                violations.push(Violation::DanglingReference { edge: i });
                continue;
            }
            if seen.insert((e.source, e.label), i).is_some() {
                let v = Violation::Nondeterministic {
                    source_state: self.states[e.source].clone(),
                    label: self.labels[e.label].clone(),
                };
                if !violations.contains(&v) {
                    violations.push(v);
                }
            }
        }
        if violations.is_empty() {
            let reached = self.reachable();
            violations.extend(
                reached
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| !**r)
                    .map(|(s, _)| Violation::Unreachable(self.states[s].clone())),
            );
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    fn reachable(&self) -> Vec<bool> {
        let out = self.outgoing();
        let mut reached = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        reached[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for &e in &out[s] {
                let t = self.edges[e].target;
                if !reached[t] {
                    reached[t] = true;
                    queue.push_back(t);
                }
            }
        }
        reached
    }

    /// Outgoing edge indices per state, in edge order.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.source].push(i);
        }
        out
    }

    /// Parses the line-based text format:
    ///
    /// ```text
    /// lts
    /// initial s0
    /// edge s0 a s1
    /// ```
    pub fn parse(text: &str) -> Result<Lts, ParseError> {
        Lts::parse_with_lines(text).map(|(lts, _)| lts)
    }

    /// Parses and then validates, reporting the first violation against
    /// the line of the offending edge.
    pub fn parse_valid(text: &str) -> Result<Lts, ParseError> {
        let (lts, lines) = Lts::parse_with_lines(text)?;
        let Err(violations) = lts.validate() else {
            return Ok(lts);
        };
        let violation = &violations[0];
        let line = match violation {
            Violation::Nondeterministic {
                source_state,
                label,
            } => {
                let mut matching = lts.edges.iter().enumerate().filter(|(_, e)| {
                    lts.states[e.source] == *source_state && lts.labels[e.label] == *label
                });
                matching.nth(1).map(|(i, _)| lines[i])
            }
            Violation::Unreachable(state) => lts
                .edges
                .iter()
                .position(|e| lts.states[e.source] == *state || lts.states[e.target] == *state)
                .map(|i| lines[i]),
            _ => None,
        };
        Err(ParseError::new(line.unwrap_or(1), violation.to_string()))
    }

    /// Also returns the line number of every edge.
    fn parse_with_lines(text: &str) -> Result<(Lts, Vec<usize>), ParseError> {
        let mut lines = significant_lines(text);
        match lines.next().as_ref().map(|(n, t)| (*n, t.as_slice())) {
            Some((_, ["lts"])) => {}
            Some((n, _)) => return Err(ParseError::new(n, "expected header `lts`")),
            None => return Err(ParseError::new(1, "empty input, expected header `lts`")),
        }
        let mut builder = match lines.next().as_ref().map(|(n, t)| (*n, t.as_slice())) {
            Some((_, ["initial", s])) => LtsBuilder::new(s),
            Some((n, _)) => return Err(ParseError::new(n, "expected `initial <state>`")),
            None => return Err(ParseError::new(1, "missing `initial <state>` line")),
        };
        let mut edge_lines = Vec::new();
        for (n, tokens) in lines {
            match tokens.as_slice() {
                ["edge", s, l, t] => {
                    builder.edge(s, l, t);
                    edge_lines.push(n);
                }
                ["edge", ..] => {
                    return Err(ParseError::new(
                        n,
                        "expected `edge <source> <label> <target>`",
                    ))
                }
                [kw, ..] => return Err(ParseError::new(n, format!("unknown keyword `{kw}`"))),
                [] => unreachable!(),
            }
        }
        Ok((builder.build(), edge_lines))
    }
}

/// Non-empty lines with comments stripped, tokenized, with 1-based line
/// numbers. A comment is a token starting with `#` and everything after it,
/// so split labels such as `a#1` survive.
pub(crate) fn significant_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let tokens: Vec<&str> = line
            .split_whitespace()
            .take_while(|t| !t.starts_with('#'))
            .collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

impl fmt::Display for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lts")?;
        writeln!(f, "initial {}", self.states[self.initial])?;
        for e in &self.edges {
            writeln!(
                f,
                "edge {} {} {}",
                self.states[e.source], self.labels[e.label], self.states[e.target]
            )?;
        }
        Ok(())
    }
}

/// Per-label occurrence counts; may be negative for chords.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParikhVector(pub Vec<i64>);

impl ParikhVector {
    pub fn zero(labels: usize) -> Self {
        ParikhVector(vec![0; labels])
    }

    pub fn unit(labels: usize, t: usize) -> Self {
        let mut v = Self::zero(labels);
        v.0[t] = 1;
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn dot(&self, effect: &[i64]) -> i64 {
        self.0.iter().zip(effect).map(|(a, b)| a * b).sum()
    }

    pub fn to_rational(&self) -> RatVector {
        RatVector(self.0.iter().map(|&x| rat(x)).collect())
    }
}

impl Add for &ParikhVector {
    type Output = ParikhVector;

    fn add(self, rhs: &ParikhVector) -> ParikhVector {
        ParikhVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ParikhVector {
    type Output = ParikhVector;

    fn sub(self, rhs: &ParikhVector) -> ParikhVector {
        ParikhVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Breadth-first spanning tree together with the Parikh vector of every
/// state's tree walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    parent: Vec<Option<usize>>,
    parikh: Vec<ParikhVector>,
    labels: usize,
}

impl SpanningTree {
    /// BFS from the initial state; each state's outgoing edges are visited in
    /// edge order. Requires a reachable LTS.
    pub fn new(lts: &Lts) -> Self {
        let n = lts.num_states();
        let labels = lts.num_labels();
        let out = lts.outgoing();
        let mut parent = vec![None; n];
        let mut parikh: Vec<Option<ParikhVector>> = vec![None; n];
        parikh[lts.initial()] = Some(ParikhVector::zero(labels));
        let mut queue = VecDeque::from([lts.initial()]);
        while let Some(s) = queue.pop_front() {
            for &ei in &out[s] {
                let e = lts.edges()[ei];
                if parikh[e.target].is_none() {
                    let mut p = parikh[s].clone().expect("visited");
                    p.0[e.label] += 1;
                    parikh[e.target] = Some(p);
                    parent[e.target] = Some(ei);
                    queue.push_back(e.target);
                }
            }
        }
        SpanningTree {
            parent,
            parikh: parikh
                .into_iter()
                .map(|p| p.expect("spanning tree requires a reachable LTS"))
                .collect(),
            labels,
        }
    }

    /// Tree edge entering `s`, `None` for the initial state.
    pub fn parent_edge(&self, s: usize) -> Option<usize> {
        self.parent[s]
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        let mut edges: Vec<usize> = self.parent.iter().flatten().copied().collect();
        edges.sort_unstable();
        edges
    }

    pub fn is_tree_edge(&self, e: usize, lts: &Lts) -> bool {
        self.parent[lts.edges()[e].target] == Some(e)
    }

    pub fn state_parikh(&self, s: usize) -> Result<&ParikhVector, LtsError> {
        self.parikh.get(s).ok_or(LtsError::UnknownState(s))
    }

    /// `P(source) + 1·label - P(target)`; zero on tree edges.
    pub fn edge_parikh(&self, lts: &Lts, e: usize) -> Result<ParikhVector, LtsError> {
        let edge = lts.edges().get(e).ok_or(LtsError::UnknownEdge(e))?;
        let mut v = &self.parikh[edge.source] - &self.parikh[edge.target];
        v.0[edge.label] += 1;
        Ok(v)
    }

    /// Chord edge indices in edge order.
    pub fn chords(&self, lts: &Lts) -> Vec<usize> {
        (0..lts.edges().len())
            .filter(|&e| !self.is_tree_edge(e, lts))
            .collect()
    }

    pub fn num_labels(&self) -> usize {
        self.labels
    }
}

/// Linearly independent rows spanning the Parikh vectors of all cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleBase {
    pub basis: RatMatrix,
}

impl CycleBase {
    /// Row-reduces the chord Parikh vectors and keeps the nonzero rows.
    pub fn new(lts: &Lts, tree: &SpanningTree) -> Self {
        let rows: Vec<RatVector> = tree
            .chords(lts)
            .into_iter()
            .map(|e| tree.edge_parikh(lts, e).expect("chord index").to_rational())
            .collect();
        let generator = RatMatrix::from_rows(lts.num_labels(), &rows).expect("label dimension");
        CycleBase {
            basis: generator.rref().reduced.nonzero_rows(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::in_span;

    #[test]
    fn fixtures_are_valid() {
        for lts in [
            fixtures::ab_interleavings(),
            fixtures::abc_embeddable(),
            fixtures::abc_reachability(),
        ] {
            assert_eq!(lts.validate(), Ok(()));
        }
        assert_eq!(Lts::builder("s0").build().validate(), Ok(()));
    }

    #[test]
    fn nondeterminism_is_reported() {
        let mut b = Lts::builder("s0");
        b.edge("s0", "a", "s1");
        b.edge("s0", "a", "s2");
        assert_eq!(
            b.build().validate(),
            Err(vec![Violation::Nondeterministic {
                source_state: "s0".into(),
                label: "a".into()
            }])
        );
    }

    #[test]
    fn unreachable_and_dangling_are_reported() {
        let mut b = Lts::builder("s0");
        b.edge("s1", "a", "s2");
        assert_eq!(
            b.build().validate(),
            Err(vec![
                Violation::Unreachable("s1".into()),
                Violation::Unreachable("s2".into())
            ])
        );
        let raw = Lts::from_raw_parts(
            vec!["s0".into()],
            vec!["a".into()],
            vec![Edge {
                source: 0,
                label: 0,
                target: 3,
            }],
            0,
        );
        assert_eq!(
            raw.validate(),
            Err(vec![Violation::DanglingReference { edge: 0 }])
        );
    }

    #[test]
    fn abc_embeddable_tree_is_all_non_c_edges() {
        let lts = fixtures::abc_embeddable();
        let tree = SpanningTree::new(&lts);
        let c = lts.label_id("c").unwrap();
        let non_c: Vec<usize> = (0..lts.edges().len())
            .filter(|&e| lts.edges()[e].label != c)
            .collect();
        assert_eq!(tree.tree_edges(), non_c);
    }

    #[test]
    fn abc_reachability_tree_prefers_earlier_edge() {
        let lts = fixtures::abc_reachability();
        let tree = SpanningTree::new(&lts);
        let s3 = lts.state_id("s3").unwrap();
        assert_eq!(tree.parent_edge(s3), lts.find_edge("s1", "b", "s3"));
        assert!(!tree.is_tree_edge(lts.find_edge("s2", "a", "s3").unwrap(), &lts));
    }

    #[test]
    fn chain_has_single_tree_edge() {
        let mut b = Lts::builder("s0");
        b.edge("s0", "a", "s1");
        let lts = b.build();
        let tree = SpanningTree::new(&lts);
        assert_eq!(tree.tree_edges(), vec![0]);
        assert!(tree.chords(&lts).is_empty());
    }

    #[test]
    fn state_parikh_vectors_of_abc_reachability() {
        let lts = fixtures::abc_reachability();
        let tree = SpanningTree::new(&lts);
        let p = |s: &str| tree.state_parikh(lts.state_id(s).unwrap()).unwrap().clone();
        // label order: a, b, c
        assert_eq!(p("s7"), ParikhVector(vec![1, 3, 0]));
        assert_eq!(p("s3"), ParikhVector(vec![1, 1, 0]));
        assert_eq!(p("s2"), ParikhVector(vec![0, 1, 0]));
        assert_eq!(p("s4"), ParikhVector(vec![0, 2, 0]));
        assert_eq!(p("s0"), ParikhVector(vec![0, 0, 0]));
        assert_eq!(tree.state_parikh(99), Err(LtsError::UnknownState(99)));
    }

    #[test]
    fn edge_parikh_vectors_of_abc_reachability() {
        let lts = fixtures::abc_reachability();
        let tree = SpanningTree::new(&lts);
        let e = |s, l, t| {
            tree.edge_parikh(&lts, lts.find_edge(s, l, t).unwrap())
                .unwrap()
        };
        assert!(e("s2", "a", "s3").is_zero());
        assert_eq!(e("s7", "c", "s4"), ParikhVector(vec![1, 1, 1]));
        assert_eq!(e("s5", "c", "s2"), ParikhVector(vec![1, 1, 1]));
        assert_eq!(e("s3", "c", "s0"), ParikhVector(vec![1, 1, 1]));
        for te in tree.tree_edges() {
            assert!(tree.edge_parikh(&lts, te).unwrap().is_zero());
        }
        assert_eq!(tree.edge_parikh(&lts, 100), Err(LtsError::UnknownEdge(100)));
    }

    #[test]
    fn cycle_bases_of_fixtures() {
        let ones = RatMatrix::from_ints(&[&[1, 1, 1]]);
        for lts in [fixtures::abc_reachability(), fixtures::abc_embeddable()] {
            let tree = SpanningTree::new(&lts);
            assert_eq!(CycleBase::new(&lts, &tree).basis, ones);
        }
        let lts = fixtures::ab_interleavings();
        let base = CycleBase::new(&lts, &SpanningTree::new(&lts));
        assert_eq!(base.rank(), 0);
        assert_eq!(base.basis.cols(), 2);
    }

    #[test]
    fn chords_lie_in_cycle_span() {
        let lts = fixtures::abc_reachability();
        let tree = SpanningTree::new(&lts);
        let base = CycleBase::new(&lts, &tree);
        for c in tree.chords(&lts) {
            let v = tree.edge_parikh(&lts, c).unwrap().to_rational();
            assert!(in_span(&base.basis, &v).unwrap());
        }
    }

    #[test]
    fn parse_and_print_round_trip() {
        let text = "lts # header\n\ninitial s0\nedge s0 a s1 # first\nedge s1 b s0\n";
        let lts = Lts::parse(text).unwrap();
        assert_eq!(lts.states(), ["s0", "s1"]);
        assert_eq!(lts.labels(), ["a", "b"]);
        assert_eq!(Lts::parse(&lts.to_string()).unwrap(), lts);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(Lts::parse("").unwrap_err().line, 1);
        assert_eq!(Lts::parse("net\n").unwrap_err().line, 1);
        assert_eq!(Lts::parse("lts\nedge a b c\n").unwrap_err().line, 2);
        let err = Lts::parse("lts\ninitial s0\nedge s0 a\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = Lts::parse("lts\n# c\ninitial s0\n\nfoo\n").unwrap_err();
        assert_eq!(err.line, 5);
    }

    #[test]
    fn validated_parse_points_at_the_offending_line() {
        let text = "lts\ninitial s0\nedge s0 a s1\n# note\nedge s0 a s2\n";
        let err = Lts::parse_valid(text).unwrap_err();
        assert_eq!(err.line, 5);
        let text = "lts\ninitial s0\nedge s0 a s1\nedge s2 b s1\n";
        let err = Lts::parse_valid(text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("s2"));
        assert!(Lts::parse_valid("lts\ninitial s0\nedge s0 a s1 # trailing\n").is_ok());
    }
}
