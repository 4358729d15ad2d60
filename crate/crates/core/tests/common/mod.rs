//! Seeded random LTSs for property and acceptance tests.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use splitsynth::Lts;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A deterministic LTS in which every state is reachable: a random spanning
/// tree grown from `s0`, plus random extra edges. Only labels that occur on
/// some edge end up in the alphabet.
pub fn random_lts(rng: &mut StdRng, max_states: usize, max_labels: usize, max_edges: usize) -> Lts {
    assert!(max_states >= 1 && max_labels >= 1);
    let states = rng.gen_range(1..=max_states);
    let labels = rng.gen_range(1..=max_labels);
    let mut used = vec![vec![false; labels]; states];
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut present = 1;
    while present < states && edges.len() < max_edges {
        let open: Vec<usize> = (0..present)
            .filter(|&s| used[s].iter().any(|u| !u))
            .collect();
        let Some(&parent) = open.choose(rng) else {
            break;
        };
        let free: Vec<usize> = (0..labels).filter(|&l| !used[parent][l]).collect();
        let label = *free.choose(rng).unwrap();
        used[parent][label] = true;
        edges.push((parent, label, present));
        present += 1;
    }
    let extra = rng.gen_range(0..=max_edges.saturating_sub(edges.len()));
    for _ in 0..extra {
        let s = rng.gen_range(0..present);
        let free: Vec<usize> = (0..labels).filter(|&l| !used[s][l]).collect();
        let Some(&label) = free.choose(rng) else {
            continue;
        };
        used[s][label] = true;
        edges.push((s, label, rng.gen_range(0..present)));
    }
    edges.shuffle(rng);
    let mut builder = Lts::builder("s0");
    for (s, l, t) in edges {
        builder.edge(
            &format!("s{s}"),
            &format!("{}", (b'a' + l as u8) as char),
            &format!("s{t}"),
        );
    }
    let lts = builder.build();
    debug_assert_eq!(lts.validate(), Ok(()));
    lts
}
