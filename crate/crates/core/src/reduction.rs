//! Subset-sum instances encoded as LTSs whose splittability within a fixed
//! label budget is equivalent to solvability of the instance.
//!
//! The gadget has six strands hanging off `s0`, entered by `h1`..`h6`:
//!
//! * `h1` doubles: `u_i` spans two consecutive `u_{i-1}` edges.
//! * `h2` fixes `o` to the unit word of `X = 1 + 2b + 2Σc`, and `O` to
//!   `-(n+1)` times that.
//! * `h3` and `h4` fix `alpha` to `Σc` and `beta` to `2b`.
//! * `h5` offers, per item, a `g_i` edge forwards and backwards across the
//!   unit word of `c_i`; one of the two must be split off.
//! * `h6` ties it together: `o alpha (o g_1) ... (o g_n) O` runs parallel to
//!   `beta`, so the `g_i` on it must total `2b - Σc`.

use std::fmt;

use thiserror::Error;

use crate::lts::{significant_lines, Lts, LtsBuilder, ParseError};
use crate::splitting::LabelSplitting;

/// Largest item count the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("{x} does not fit in {bits} bits")]
    TooLarge { x: u64, bits: u32 },
    #[error("{n} items is too many for exhaustive search (limit {BRUTE_FORCE_LIMIT})")]
    TooManyItems { n: usize },
    #[error("splitting does not have the expected shape: {0}")]
    Shape(String),
    #[error("extracted indices sum to {sum}, target is {b}")]
    NotASolution { sum: u64, b: u64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSumInstance {
    b: u64,
    c: Vec<u64>,
}

impl SubsetSumInstance {
    /// All values must be positive and at least one item is required.
    pub fn new(b: u64, c: Vec<u64>) -> Result<Self, ReductionError> {
        if b == 0 {
            return Err(ReductionError::InvalidInstance("b must be positive".into()));
        }
        if c.is_empty() {
            return Err(ReductionError::InvalidInstance(
                "at least one item is needed".into(),
            ));
        }
        if let Some(i) = c.iter().position(|&x| x == 0) {
            return Err(ReductionError::InvalidInstance(format!(
                "item {} is zero",
                i + 1
            )));
        }
        let total = c
            .iter()
            .try_fold(b, |acc, &x| acc.checked_add(x))
            .and_then(|s| s.checked_mul(2))
            .and_then(|s| s.checked_add(1));
        if total.is_none_or(|x| x >= 1 << 62) {
            return Err(ReductionError::InvalidInstance("values too large".into()));
        }
        Ok(SubsetSumInstance { b, c })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn c(&self) -> &[u64] {
        &self.c
    }

    pub fn sum_c(&self) -> u64 {
        self.c.iter().sum()
    }

    /// Reads `subsetsum <b> <c1> ... <cn>`.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let mut lines = significant_lines(text);
        let (n, tokens) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, "empty input, expected `subsetsum <b> <c1> ...`"))?;
        if let Some((extra, _)) = lines.next() {
            return Err(ParseError::new(extra, "unexpected content after instance").into());
        }
        let ["subsetsum", values @ ..] = tokens.as_slice() else {
            return Err(ParseError::new(n, "expected `subsetsum <b> <c1> ...`").into());
        };
        let values: Vec<u64> = values
            .iter()
            .map(|v| {
                v.parse()
                    .map_err(|_| ParseError::new(n, format!("bad number `{v}`")))
            })
            .collect::<Result<_, _>>()?;
        let Some((&b, c)) = values.split_first() else {
            return Err(ParseError::new(n, "missing target value").into());
        };
        SubsetSumInstance::new(b, c.to_vec())
    }
}

impl fmt::Display for SubsetSumInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "subsetsum {}", self.b)?;
        for x in &self.c {
            write!(f, " {x}")?;
        }
        Ok(())
    }
}

/// 1-based item indices, ascending.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexSet(pub Vec<usize>);

impl IndexSet {
    pub fn sum(&self, inst: &SubsetSumInstance) -> u64 {
        self.0.iter().map(|&i| inst.c[i - 1]).sum()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, i) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionParams {
    pub k: u32,
    pub q: usize,
    pub big_x: u64,
}

pub fn params(inst: &SubsetSumInstance) -> ReductionParams {
    let big_x = 1 + 2 * inst.b + 2 * inst.sum_c();
    let k = big_x.ilog2();
    ReductionParams {
        k,
        q: 2 * inst.n() + k as usize + 11,
        big_x,
    }
}

/// `u_i` for every set bit `i` of `x`, highest first.
pub fn unit_word(x: u64, k: u32) -> Result<Vec<String>, ReductionError> {
    if k < 63 && x >> (k + 1) != 0 {
        return Err(ReductionError::TooLarge { x, bits: k + 1 });
    }
    Ok((0..=k.min(63))
        .rev()
        .filter(|&i| x >> i & 1 == 1)
        .map(|i| format!("u{i}"))
        .collect())
}

/// The gadget LTS plus the positions of the three `g_i` edges per item.
#[derive(Clone, Debug)]
pub struct Gadget {
    pub lts: Lts,
    pub params: ReductionParams,
    /// `start_i -g_i-> start_{i+1}` in strand 5, indexed by item (0-based).
    pub lower_gamma: Vec<usize>,
    /// `start_{i+1} -g_i-> start_i` in strand 5.
    pub upper_gamma: Vec<usize>,
    /// The `g_i` edge of strand 6.
    pub h6_gamma: Vec<usize>,
}

struct StrandBuilder<'a> {
    builder: &'a mut LtsBuilder,
    strand: usize,
    next: usize,
}

impl StrandBuilder<'_> {
    fn fresh(&mut self) -> String {
        let name = format!("h{}.{}", self.strand, self.next);
        self.next += 1;
        name
    }

    /// Walks `word` from `from`, ending in `to` if given, otherwise in a new
    /// state. Returns the final state.
    fn path(&mut self, from: &str, word: &[String], to: Option<&str>) -> String {
        assert!(!word.is_empty(), "strand words are never empty");
        let mut at = from.to_string();
        for (i, label) in word.iter().enumerate() {
            let next = match to {
                Some(t) if i + 1 == word.len() => t.to_string(),
                _ => self.fresh(),
            };
            self.builder.edge(&at, label, &next);
            at = next;
        }
        at
    }
}

fn gamma(i: usize) -> String {
    format!("g{}", i + 1)
}

pub fn build_gadget(inst: &SubsetSumInstance) -> Gadget {
    let p = params(inst);
    let k = p.k;
    let word = |x: u64| unit_word(x, k).expect("all strand values are below 2^(k+1)");
    let mut builder = Lts::builder("s0");
    let entries: Vec<String> = (1..=6).map(|i| format!("h{i}.0")).collect();
    for (i, entry) in entries.iter().enumerate() {
        builder.edge("s0", &format!("h{}", i + 1), entry);
    }

    // h1: t_i -u_{i-1}-> t'_i -u_{i-1}-> t_{i+1} and t_i -u_i-> t_{i+1}
    {
        let entry = entries[0].clone();
        let mut s = StrandBuilder {
            builder: &mut builder,
            strand: 1,
            next: 1,
        };
        let mut t = entry;
        for i in 1..=k {
            let lower = format!("u{}", i - 1);
            let end = s.path(&t, &[lower.clone(), lower], None);
            s.builder.edge(&t, &format!("u{i}"), &end);
            t = end;
        }
    }

    // h2: u(X) and o from entry to anchor, then o^(n+1) O around the anchor
    {
        let entry = entries[1].clone();
        let mut s = StrandBuilder {
            builder: &mut builder,
            strand: 2,
            next: 1,
        };
        let anchor = s.path(&entry, &word(p.big_x), None);
        s.builder.edge(&entry, "o", &anchor);
        let mut cycle = vec!["o".to_string(); inst.n() + 1];
        cycle.push("O".to_string());
        s.path(&anchor, &cycle, Some(&anchor));
    }

    // h3, h4: a unit word with a parallel chord
    for (i, x, chord) in [(3, inst.sum_c(), "alpha"), (4, 2 * inst.b, "beta")] {
        let entry = entries[i - 1].clone();
        let mut s = StrandBuilder {
            builder: &mut builder,
            strand: i,
            next: 1,
        };
        let end = s.path(&entry, &word(x), None);
        s.builder.edge(&entry, chord, &end);
    }

    // h5: per item, u(c_i) with g_i alongside in both directions
    let mut lower_gamma = Vec::with_capacity(inst.n());
    let mut upper_gamma = Vec::with_capacity(inst.n());
    {
        let entry = entries[4].clone();
        let mut s = StrandBuilder {
            builder: &mut builder,
            strand: 5,
            next: 1,
        };
        let mut start = entry;
        for (i, &c) in inst.c.iter().enumerate() {
            let end = s.path(&start, &word(c), None);
            lower_gamma.push(s.builder.edge(&start, &gamma(i), &end));
            upper_gamma.push(s.builder.edge(&end, &gamma(i), &start));
            start = end;
        }
    }

    // h6: o alpha (o g_1) ... (o g_n) O, with beta across
    let mut h6_gamma = Vec::with_capacity(inst.n());
    {
        let entry = entries[5].clone();
        let mut s = StrandBuilder {
            builder: &mut builder,
            strand: 6,
            next: 1,
        };
        let mut at = s.path(&entry, &["o".into(), "alpha".into()], None);
        for i in 0..inst.n() {
            at = s.path(&at, &["o".into()], None);
            let to = s.fresh();
            h6_gamma.push(s.builder.edge(&at, &gamma(i), &to));
            at = to;
        }
        let end = s.path(&at, &["O".into()], None);
        s.builder.edge(&entry, "beta", &end);
    }

    Gadget {
        lts: builder.build(),
        params: p,
        lower_gamma,
        upper_gamma,
        h6_gamma,
    }
}

pub fn build_lts(inst: &SubsetSumInstance) -> Lts {
    build_gadget(inst).lts
}

impl Gadget {
    /// The splitting that answers `indices`: item `i` in the set gets its
    /// backward `g_i` split off, every other item its forward one.
    pub fn splitting_for(&self, indices: &IndexSet) -> LabelSplitting {
        let mut blocks = vec![0; self.lts.edges().len()];
        for i in 0..self.lower_gamma.len() {
            if indices.contains(i + 1) {
                blocks[self.upper_gamma[i]] = 1;
            } else {
                blocks[self.lower_gamma[i]] = 1;
            }
        }
        LabelSplitting::from_blocks(&self.lts, &blocks)
    }

    /// Reads the index set off a splitting of the gadget: `i` is chosen when
    /// the backward `g_i` edge no longer shares a label with the strand-6
    /// one. Fails unless each `g_i` triple is split into exactly two labels
    /// and the result actually solves the instance.
    pub fn extract_solution(
        &self,
        inst: &SubsetSumInstance,
        sp: &LabelSplitting,
    ) -> Result<IndexSet, ReductionError> {
        let mut chosen = Vec::new();
        for i in 0..inst.n() {
            let (lo, up, h6) = (self.lower_gamma[i], self.upper_gamma[i], self.h6_gamma[i]);
            let with_lower = sp.same_label(lo, h6);
            let with_upper = sp.same_label(up, h6);
            if with_lower == with_upper {
                return Err(ReductionError::Shape(format!(
                    "the strand-6 {} edge must share its label with exactly one strand-5 edge",
                    gamma(i)
                )));
            }
            if with_lower {
                chosen.push(i + 1);
            }
        }
        let set = IndexSet(chosen);
        let sum = set.sum(inst);
        if sum != inst.b {
            return Err(ReductionError::NotASolution { sum, b: inst.b });
        }
        Ok(set)
    }
}

/// Lexicographically smallest index set summing to `b`, by exhaustive search.
pub fn subset_sum_brute(inst: &SubsetSumInstance) -> Result<Option<IndexSet>, ReductionError> {
    if inst.n() > BRUTE_FORCE_LIMIT {
        return Err(ReductionError::TooManyItems { n: inst.n() });
    }
    fn go(c: &[u64], from: usize, remaining: u64, picked: &mut Vec<usize>) -> bool {
        if remaining == 0 {
            return true;
        }
        for i in from..c.len() {
            if c[i] <= remaining {
                picked.push(i + 1);
                if go(c, i + 1, remaining - c[i], picked) {
                    return true;
                }
                picked.pop();
            }
        }
        false
    }
    let mut picked = Vec::new();
    Ok(go(&inst.c, 0, inst.b, &mut picked).then_some(IndexSet(picked)))
}
