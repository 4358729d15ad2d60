//! Place/transition nets: firing, bounded reachability graphs, synthesis
//! from regions and embedding verification.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::lts::{significant_lines, Lts, LtsBuilder, ParseError, SpanningTree};
use crate::regions::{RegionError, RegionSystem};

pub const DEFAULT_STATE_BOUND: usize = 10_000;

/// Token count per place, in declared place order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Marking(pub Vec<u64>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<String>,
    /// `pre[p][t]`: tokens consumed from `p` by `t`.
    pre: Vec<Vec<u64>>,
    /// `post[p][t]`: tokens produced on `p` by `t`.
    post: Vec<Vec<u64>>,
    initial: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PetriError {
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("transition {transition} is not enabled: place {place} lacks tokens")]
    NotEnabled { transition: String, place: String },
    #[error("reachability graph exceeds {0} states")]
    BoundExceeded(usize),
    #[error("label {0} is not a transition of the net")]
    LabelNotTransition(String),
    #[error(transparent)]
    Region(#[from] RegionError),
}

impl PetriNet {
    pub fn new(transitions: Vec<String>) -> Self {
        PetriNet {
            places: Vec::new(),
            pre: Vec::new(),
            post: Vec::new(),
            initial: Vec::new(),
            transitions,
        }
    }

    /// Adds a place with its initial tokens and arc weights indexed by
    /// transition; returns the place index.
    pub fn add_place(&mut self, name: &str, tokens: u64, pre: Vec<u64>, post: Vec<u64>) -> usize {
        assert_eq!(pre.len(), self.transitions.len());
        assert_eq!(post.len(), self.transitions.len());
        self.places.push(name.to_string());
        self.initial.push(tokens);
        self.pre.push(pre);
        self.post.push(post);
        self.places.len() - 1
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[String] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> Marking {
        Marking(self.initial.clone())
    }

    pub fn transition_id(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t == name)
    }

    /// `W(p, t)`
    pub fn consumes(&self, p: usize, t: usize) -> u64 {
        self.pre[p][t]
    }

    /// `W(t, p)`
    pub fn produces(&self, p: usize, t: usize) -> u64 {
        self.post[p][t]
    }

    fn tid(&self, t: &str) -> Result<usize, PetriError> {
        self.transition_id(t)
            .ok_or_else(|| PetriError::UnknownTransition(t.to_string()))
    }

    fn blocking_place(&self, m: &Marking, t: usize) -> Option<usize> {
        (0..self.places.len()).find(|&p| m.0[p] < self.pre[p][t])
    }

    pub fn enabled(&self, m: &Marking, t: &str) -> Result<bool, PetriError> {
        let t = self.tid(t)?;
        Ok(self.blocking_place(m, t).is_none())
    }

    pub fn fire(&self, m: &Marking, t: &str) -> Result<Marking, PetriError> {
        self.fire_index(m, self.tid(t)?)
    }

    fn fire_index(&self, m: &Marking, t: usize) -> Result<Marking, PetriError> {
        if let Some(p) = self.blocking_place(m, t) {
            return Err(PetriError::NotEnabled {
                transition: self.transitions[t].clone(),
                place: self.places[p].clone(),
            });
        }
        Ok(Marking(
            (0..self.places.len())
                .map(|p| m.0[p] - self.pre[p][t] + self.post[p][t])
                .collect(),
        ))
    }

    /// Canonical state id of a marking: `p1:v1,p2:v2,...`, or `empty` for a
    /// net without places.
    pub fn marking_name(&self, m: &Marking) -> String {
        if self.places.is_empty() {
            return "empty".to_string();
        }
        self.places
            .iter()
            .zip(&m.0)
            .map(|(p, v)| format!("{p}:{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Breadth-first exploration of the reachable markings. States are named
    /// by [`PetriNet::marking_name`]; transitions are tried in declared order.
    pub fn reachability_graph(&self, max_states: usize) -> Result<Lts, PetriError> {
        let m0 = self.initial_marking();
        let mut builder = LtsBuilder::new(&self.marking_name(&m0));
        let mut index: HashMap<Marking, usize> = HashMap::from([(m0.clone(), 0)]);
        let mut queue = VecDeque::from([m0]);
        while let Some(m) = queue.pop_front() {
            let from = self.marking_name(&m);
            for t in 0..self.transitions.len() {
                let Ok(next) = self.fire_index(&m, t) else {
                    continue;
                };
                if !index.contains_key(&next) {
                    if index.len() == max_states {
                        return Err(PetriError::BoundExceeded(max_states));
                    }
                    index.insert(next.clone(), index.len());
                    queue.push_back(next.clone());
                }
                builder.edge(&from, &self.transitions[t], &self.marking_name(&next));
            }
        }
        Ok(builder.build())
    }

    /// Checks that the closed-form marking map embeds `lts` into the
    /// reachability graph, without enumerating that graph.
    pub fn verify_embedding(&self, lts: &Lts) -> Result<EmbeddingVerdict, PetriError> {
        let transition_of: Vec<usize> = lts
            .labels()
            .iter()
            .map(|l| {
                self.transition_id(l)
                    .ok_or_else(|| PetriError::LabelNotTransition(l.clone()))
            })
            .collect::<Result<_, _>>()?;
        let tree = SpanningTree::new(lts);
        let mut markings = Vec::with_capacity(lts.num_states());
        for s in 0..lts.num_states() {
            let parikh = tree.state_parikh(s).expect("state in range");
            let mut tokens = Vec::with_capacity(self.places.len());
            for p in 0..self.places.len() {
                let value = self.initial[p] as i64
                    + parikh
                        .0
                        .iter()
                        .zip(&transition_of)
                        .map(|(&n, &t)| n * (self.post[p][t] as i64 - self.pre[p][t] as i64))
                        .sum::<i64>();
                if value < 0 {
                    return Ok(EmbeddingVerdict::DoesNotEmbed(
                        EmbeddingFailure::NegativeMarking {
                            state: lts.state_name(s).to_string(),
                            place: self.places[p].clone(),
                        },
                    ));
                }
                tokens.push(value as u64);
            }
            markings.push(Marking(tokens));
        }
        let mut seen = HashMap::new();
        for (s, m) in markings.iter().enumerate() {
            if let Some(first) = seen.insert(m, s) {
                return Ok(EmbeddingVerdict::DoesNotEmbed(
                    EmbeddingFailure::NotInjective(
                        lts.state_name(first).to_string(),
                        lts.state_name(s).to_string(),
                    ),
                ));
            }
        }
        for (i, e) in lts.edges().iter().enumerate() {
            match self.fire_index(&markings[e.source], transition_of[e.label]) {
                Err(_) => {
                    return Ok(EmbeddingVerdict::DoesNotEmbed(
                        EmbeddingFailure::NotEnabled { edge: i },
                    ))
                }
                Ok(m) if m != markings[e.target] => {
                    return Ok(EmbeddingVerdict::DoesNotEmbed(
                        EmbeddingFailure::WrongTarget { edge: i },
                    ))
                }
                Ok(_) => {}
            }
        }
        Ok(EmbeddingVerdict::Embeds(MarkingMap { markings }))
    }

    /// Parses the line-based net format (`net`, `place`, `trans`, `arc`).
    pub fn parse(text: &str) -> Result<PetriNet, ParseError> {
        let mut lines = significant_lines(text);
        match lines.next().as_ref().map(|(n, t)| (*n, t.as_slice())) {
            Some((_, ["net"])) => {}
            Some((n, _)) => return Err(ParseError::new(n, "expected header `net`")),
            None => return Err(ParseError::new(1, "empty input, expected header `net`")),
        }
        let mut places: Vec<(String, u64)> = Vec::new();
        let mut transitions: Vec<String> = Vec::new();
        let mut arcs: Vec<(usize, String, String, u64)> = Vec::new();
        for (n, tokens) in lines {
            match tokens.as_slice() {
                ["place", id, tokens] => {
                    let tokens = tokens
                        .parse()
                        .map_err(|_| ParseError::new(n, format!("bad token count `{tokens}`")))?;
                    if places.iter().any(|(p, _)| p == id) {
                        return Err(ParseError::new(n, format!("duplicate place `{id}`")));
                    }
                    places.push((id.to_string(), tokens));
                }
                ["trans", id] => {
                    if transitions.iter().any(|t| t == id) {
                        return Err(ParseError::new(n, format!("duplicate transition `{id}`")));
                    }
                    transitions.push(id.to_string());
                }
                ["arc", from, to, w] => {
                    let w = w
                        .parse()
                        .map_err(|_| ParseError::new(n, format!("bad arc weight `{w}`")))?;
                    arcs.push((n, from.to_string(), to.to_string(), w));
                }
                [kw, ..] => {
                    return Err(ParseError::new(
                        n,
                        format!("malformed or unknown line starting with `{kw}`"),
                    ))
                }
                [] => unreachable!(),
            }
        }
        for (p, _) in &places {
            if transitions.contains(p) {
                return Err(ParseError::new(
                    1,
                    format!("`{p}` is declared both as place and transition"),
                ));
            }
        }
        let mut net = PetriNet::new(transitions);
        let nt = net.transitions.len();
        for (p, tokens) in places {
            net.add_place(&p, tokens, vec![0; nt], vec![0; nt]);
        }
        let place_id = |name: &str| net.places.iter().position(|p| p == name);
        let mut updates = Vec::new();
        for (n, from, to, w) in arcs {
            let (p, t, input) =
                match (place_id(&from), net.transition_id(&to)) {
                    (Some(p), Some(t)) => (p, t, true),
                    _ => match (net.transition_id(&from), place_id(&to)) {
                        (Some(t), Some(p)) => (p, t, false),
                        _ => return Err(ParseError::new(
                            n,
                            format!(
                                "arc `{from} -> {to}` must join a declared place and transition"
                            ),
                        )),
                    },
                };
            if updates
                .iter()
                .any(|&(q, u, i, _)| (q, u, i) == (p, t, input))
            {
                return Err(ParseError::new(
                    n,
                    format!("duplicate arc `{from} -> {to}`"),
                ));
            }
            updates.push((p, t, input, w));
        }
        for (p, t, input, w) in updates {
            if input {
                net.pre[p][t] = w;
            } else {
                net.post[p][t] = w;
            }
        }
        Ok(net)
    }
}

impl fmt::Display for PetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "net")?;
        for (p, tokens) in self.places.iter().zip(&self.initial) {
            writeln!(f, "place {p} {tokens}")?;
        }
        for t in &self.transitions {
            writeln!(f, "trans {t}")?;
        }
        for (pi, p) in self.places.iter().enumerate() {
            for (ti, t) in self.transitions.iter().enumerate() {
                if self.pre[pi][ti] > 0 {
                    writeln!(f, "arc {p} {t} {}", self.pre[pi][ti])?;
                }
                if self.post[pi][ti] > 0 {
                    writeln!(f, "arc {t} {p} {}", self.post[pi][ti])?;
                }
            }
        }
        Ok(())
    }
}

/// Marking assigned to each LTS state, indexed by state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkingMap {
    pub markings: Vec<Marking>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingFailure {
    NegativeMarking { state: String, place: String },
    NotInjective(String, String),
    NotEnabled { edge: usize },
    WrongTarget { edge: usize },
}

impl fmt::Display for EmbeddingFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbeddingFailure::NegativeMarking { state, place } => {
                write!(f, "negative-marking {state} {place}")
            }
            EmbeddingFailure::NotInjective(s, t) => write!(f, "not-injective {s} {t}"),
            EmbeddingFailure::NotEnabled { edge } => write!(f, "not-enabled edge {edge}"),
            EmbeddingFailure::WrongTarget { edge } => write!(f, "wrong-target edge {edge}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingVerdict {
    Embeds(MarkingMap),
    DoesNotEmbed(EmbeddingFailure),
}

impl EmbeddingVerdict {
    pub fn embeds(&self) -> bool {
        matches!(self, EmbeddingVerdict::Embeds(_))
    }
}

/// One place per separating region, transitions named after the labels.
pub fn synthesize(lts: &Lts) -> Result<PetriNet, PetriError> {
    let regions = RegionSystem::new(lts).separating_regions()?;
    let mut net = PetriNet::new(lts.labels().to_vec());
    for (i, r) in regions.into_iter().enumerate() {
        net.add_place(&format!("p{}", i + 1), r.r[lts.initial()], r.b, r.f);
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn m(v: &[u64]) -> Marking {
        Marking(v.to_vec())
    }

    #[test]
    fn enabledness_on_abc_net() {
        let net = fixtures::abc_net();
        let m0 = net.initial_marking();
        assert_eq!(m0, m(&[5, 1, 0, 0]));
        assert_eq!(net.enabled(&m0, "a"), Ok(true));
        assert_eq!(net.enabled(&m0, "c"), Ok(false));
        assert_eq!(
            net.enabled(&m0, "z"),
            Err(PetriError::UnknownTransition("z".into()))
        );
        let free = PetriNet::new(vec!["t".into()]);
        assert_eq!(free.enabled(&m(&[]), "t"), Ok(true));
    }

    #[test]
    fn firing_on_abc_net() {
        let net = fixtures::abc_net();
        let m0 = net.initial_marking();
        assert_eq!(net.fire(&m0, "a"), Ok(m(&[3, 0, 1, 0])));
        assert_eq!(net.fire(&m0, "b"), Ok(m(&[4, 1, 0, 1])));
        assert_eq!(
            net.fire(&m0, "c"),
            Err(PetriError::NotEnabled {
                transition: "c".into(),
                place: "p3".into()
            })
        );
    }

    #[test]
    fn abc_reachability_graph_has_eight_states() {
        let net = fixtures::abc_net();
        let rg = net.reachability_graph(100).unwrap();
        assert_eq!(rg.num_states(), 8);
        assert_eq!(rg.edges().len(), fixtures::abc_reachability().edges().len());
        assert_eq!(rg.validate(), Ok(()));
        assert_eq!(rg.state_name(0), "p1:5,p2:1,p3:0,p4:0");
    }

    #[test]
    fn placeless_net_has_single_self_loop() {
        let net = PetriNet::new(vec!["t".into()]);
        let rg = net.reachability_graph(10).unwrap();
        assert_eq!(rg.num_states(), 1);
        assert_eq!(rg.edges().len(), 1);
        assert_eq!(rg.edges()[0].source, rg.edges()[0].target);
    }

    #[test]
    fn unbounded_counter_exceeds_bound() {
        let mut net = PetriNet::new(vec!["t".into()]);
        net.add_place("p", 0, vec![0], vec![1]);
        assert_eq!(net.reachability_graph(3), Err(PetriError::BoundExceeded(3)));
    }

    #[test]
    fn abc_net_embeds_both_lts() {
        let net = fixtures::abc_net();
        assert!(net
            .verify_embedding(&fixtures::abc_reachability())
            .unwrap()
            .embeds());
        assert!(net
            .verify_embedding(&fixtures::abc_embeddable())
            .unwrap()
            .embeds());
    }

    #[test]
    fn placeless_net_does_not_embed_two_states() {
        let mut b = Lts::builder("s0");
        b.edge("s0", "a", "s1");
        let lts = b.build();
        let net = PetriNet::new(vec!["a".into()]);
        assert_eq!(
            net.verify_embedding(&lts).unwrap(),
            EmbeddingVerdict::DoesNotEmbed(EmbeddingFailure::NotInjective(
                "s0".into(),
                "s1".into()
            ))
        );
        let net = PetriNet::new(vec!["b".into()]);
        assert_eq!(
            net.verify_embedding(&lts),
            Err(PetriError::LabelNotTransition("a".into()))
        );
    }

    #[test]
    fn verify_reports_disabled_edges() {
        let mut b = Lts::builder("s0");
        b.edge("s0", "a", "s1");
        b.edge("s1", "a", "s0");
        let lts = b.build();
        // the marking map is injective, but firing a again from s1 does not
        // return to the marking of s0
        let mut net = PetriNet::new(vec!["a".into()]);
        net.add_place("p", 0, vec![0], vec![1]);
        assert_eq!(
            net.verify_embedding(&lts).unwrap(),
            EmbeddingVerdict::DoesNotEmbed(EmbeddingFailure::WrongTarget { edge: 1 })
        );
    }

    #[test]
    fn synthesis_examples() {
        let lts = fixtures::abc_reachability();
        let net = synthesize(&lts).unwrap();
        assert_eq!(net.places().len(), 2);
        assert_eq!(net.transitions(), ["a", "b", "c"]);
        assert!(net.verify_embedding(&lts).unwrap().embeds());

        assert!(matches!(
            synthesize(&fixtures::ab_interleavings()),
            Err(PetriError::Region(RegionError::NotEmbeddable(_, _)))
        ));

        let single = Lts::builder("s0").build();
        let net = synthesize(&single).unwrap();
        assert!(net.places().is_empty());
        assert_eq!(net.reachability_graph(10).unwrap().num_states(), 1);
    }

    #[test]
    fn marking_map_matches_reachability_graph() {
        let net = fixtures::abc_net();
        let EmbeddingVerdict::Embeds(map) =
            net.verify_embedding(&fixtures::abc_reachability()).unwrap()
        else {
            panic!("the reachability fixture must embed");
        };
        let mut from_map: Vec<String> = map.markings.iter().map(|m| net.marking_name(m)).collect();
        let mut from_rg = net.reachability_graph(100).unwrap().states().to_vec();
        from_map.sort();
        from_rg.sort();
        assert_eq!(from_map, from_rg);
    }

    #[test]
    fn net_text_round_trip() {
        let net = fixtures::abc_net();
        assert_eq!(PetriNet::parse(&net.to_string()).unwrap(), net);
    }

    #[test]
    fn net_parse_errors() {
        assert_eq!(PetriNet::parse("lts\n").unwrap_err().line, 1);
        let err = PetriNet::parse("net\nplace p 1\ntrans t\narc p q 1\n").unwrap_err();
        assert_eq!(err.line, 4);
        let err = PetriNet::parse("net\nplace p x\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = PetriNet::parse("net\nplace p 1\ntrans t\narc p t 1\narc p t 2\n").unwrap_err();
        assert_eq!(err.line, 5);
        assert!(PetriNet::parse("net\nplace x 1\ntrans x\n").is_err());
    }
}
