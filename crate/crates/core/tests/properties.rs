mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::Rng;

use splitsynth::linalg::in_span;
use splitsynth::lts::{CycleBase, ParikhVector, SpanningTree};
use splitsynth::petri::{EmbeddingVerdict, Marking, PetriError, PetriNet};
use splitsynth::regions::{EffectVector, Region, RegionSystem};
use splitsynth::splitting::{self, LabelSplitting, SplitOutcome};
use splitsynth::{synthesize, Lts};

fn lts_from_seed(seed: u64) -> Lts {
    common::random_lts(&mut common::rng(seed), 8, 4, 14)
}

fn separated_pairs(region: &Region) -> HashSet<(usize, usize)> {
    let n = region.r.len();
    (0..n)
        .flat_map(|s| (0..n).map(move |t| (s, t)))
        .filter(|&(s, t)| region.separates(s, t))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_edges_have_zero_parikh_and_chords_lie_in_the_cycle_base(seed in any::<u64>()) {
        let lts = lts_from_seed(seed);
        let tree = SpanningTree::new(&lts);
        let base = CycleBase::new(&lts, &tree);
        for e in tree.tree_edges() {
            prop_assert!(tree.edge_parikh(&lts, e).unwrap().is_zero());
        }
        for e in tree.chords(&lts) {
            let v = tree.edge_parikh(&lts, e).unwrap().to_rational();
            prop_assert!(in_span(&base.basis, &v).unwrap());
        }
        let again = SpanningTree::new(&lts);
        for s in 0..lts.num_states() {
            prop_assert_eq!(tree.parent_edge(s), again.parent_edge(s));
        }
    }

    #[test]
    fn walk_residues_lie_in_the_cycle_base(seed in any::<u64>(), walk_seed in any::<u64>()) {
        let lts = lts_from_seed(seed);
        let tree = SpanningTree::new(&lts);
        let base = CycleBase::new(&lts, &tree);
        let out = lts.outgoing();
        let mut rng = common::rng(walk_seed);
        let start = rng.gen_range(0..lts.num_states());
        let mut at = start;
        let mut walk = ParikhVector::zero(lts.num_labels());
        for _ in 0..rng.gen_range(0..=10) {
            if out[at].is_empty() {
                break;
            }
            let e = lts.edges()[out[at][rng.gen_range(0..out[at].len())]];
            walk = &walk + &ParikhVector::unit(lts.num_labels(), e.label);
            at = e.target;
        }
        let residue = &(tree.state_parikh(start).unwrap() + &walk) - tree.state_parikh(at).unwrap();
        prop_assert!(in_span(&base.basis, &residue.to_rational()).unwrap());
    }

    #[test]
    fn separation_criteria_agree(seed in any::<u64>()) {
        let lts = lts_from_seed(seed);
        let system = RegionSystem::new(&lts);
        for s in 0..lts.num_states() {
            for t in 0..lts.num_states() {
                if s == t {
                    continue;
                }
                let differ = system.state_signature(s).unwrap() != system.state_signature(t).unwrap();
                let in_cycle_span = system.parikh_difference_in_cycle_span(s, t).unwrap();
                let witness = system.ssp_solvable(s, t).unwrap();
                prop_assert_eq!(differ, !in_cycle_span);
                prop_assert_eq!(differ, witness.is_some());
                if let Some(e) = witness {
                    let region = system.region_from_effect(&e).unwrap();
                    prop_assert_eq!(region.check(&lts), Ok(()));
                    prop_assert!(region.separates(s, t));
                }
            }
        }
    }

    #[test]
    fn regions_from_random_effects_are_sound(seed in any::<u64>(), coeff_seed in any::<u64>()) {
        let lts = lts_from_seed(seed);
        let system = RegionSystem::new(&lts);
        let mut rng = common::rng(coeff_seed);
        let mut e = vec![0i64; lts.num_labels()];
        for basis in system.effect_space() {
            let c: i64 = rng.gen_range(-2..=2);
            for (x, &b) in e.iter_mut().zip(&basis.0) {
                *x += c * b;
            }
        }
        let region = system.region_from_effect(&EffectVector(e.clone())).unwrap();
        prop_assert_eq!(region.check(&lts), Ok(()));
        prop_assert_eq!(region.effect(), EffectVector(e));
        prop_assert!(region.r.contains(&0) || region.r.is_empty());

        let shift = rng.gen_range(1..5u64);
        let shifted = Region {
            r: region.r.iter().map(|v| v + shift).collect(),
            b: region.b.clone(),
            f: region.f.clone(),
        };
        prop_assert_eq!(shifted.check(&lts), Ok(()));
        prop_assert_eq!(separated_pairs(&region), separated_pairs(&shifted));
    }

    #[test]
    fn synthesized_nets_embed_their_lts(seed in any::<u64>()) {
        let lts = lts_from_seed(seed);
        let embeddable = RegionSystem::new(&lts).is_embeddable().is_embeddable();
        match synthesize(&lts) {
            Ok(net) => {
                prop_assert!(embeddable);
                let verdict = net.verify_embedding(&lts).unwrap();
                prop_assert!(verdict.embeds(), "{:?}", verdict);
                prop_assert_eq!(PetriNet::parse(&net.to_string()).unwrap(), net);
            }
            Err(_) => prop_assert!(!embeddable),
        }
    }

    #[test]
    fn reachability_graphs_replay_through_fire(
        places in 0usize..3,
        transitions in 1usize..4,
        weights in proptest::collection::vec(0u64..3, 18),
        tokens in proptest::collection::vec(0u64..3, 3),
    ) {
        let names: Vec<String> = (0..transitions).map(|t| format!("t{t}")).collect();
        let mut net = PetriNet::new(names.clone());
        for p in 0..places {
            let pre = (0..transitions).map(|t| weights[p * 6 + t]).collect();
            let post = (0..transitions).map(|t| weights[p * 6 + 3 + t]).collect();
            net.add_place(&format!("p{p}"), tokens[p], pre, post);
        }
        match net.reachability_graph(300) {
            Ok(rg) => {
                prop_assert_eq!(rg.validate(), Ok(()));
                prop_assert_eq!(Lts::parse(&rg.to_string()).unwrap(), rg.clone());
                let marking = |name: &str| -> Marking {
                    if places == 0 {
                        return Marking(vec![]);
                    }
                    Marking(name.split(',').map(|kv| kv.split(':').nth(1).unwrap().parse().unwrap()).collect())
                };
                prop_assert_eq!(marking(rg.state_name(rg.initial())), net.initial_marking());
                for e in rg.edges() {
                    let fired = net.fire(&marking(rg.state_name(e.source)), rg.label_name(e.label)).unwrap();
                    prop_assert_eq!(fired, marking(rg.state_name(e.target)));
                }
                let verdict = net.verify_embedding(&rg).unwrap();
                prop_assert!(matches!(verdict, EmbeddingVerdict::Embeds(_)));
            }
            Err(e) => prop_assert_eq!(e, PetriError::BoundExceeded(300)),
        }
    }

    #[test]
    fn lts_text_round_trips(seed in any::<u64>()) {
        let lts = lts_from_seed(seed);
        prop_assert_eq!(Lts::parse(&lts.to_string()).unwrap(), lts.clone());
        prop_assert_eq!(Lts::parse_valid(&lts.to_string()).unwrap(), lts);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_is_sound_and_monotone(seed in any::<u64>()) {
        let lts = common::random_lts(&mut common::rng(seed), 6, 3, 8);
        let mut found_before = false;
        for q in lts.num_labels()..=lts.num_labels() + lts.edges().len() {
            let outcome = splitting::decide(&lts, q);
            if found_before {
                prop_assert!(outcome.is_found(), "found below {} but not at it", q);
            }
            if let SplitOutcome::Found(sp) = &outcome {
                prop_assert!(sp.label_count() <= q);
                let split = splitting::apply(&lts, sp).unwrap();
                prop_assert_eq!(split.validate(), Ok(()));
                prop_assert!(RegionSystem::new(&split).is_embeddable().is_embeddable());
                prop_assert_eq!(&LabelSplitting::parse(&lts, &sp.to_text(&lts)).unwrap(), sp);
                found_before = true;
            }
        }
        prop_assert!(found_before, "splitting every edge apart always works");
    }

    #[test]
    fn applied_splittings_stay_deterministic(seed in any::<u64>(), block_seed in any::<u64>()) {
        let lts = lts_from_seed(seed);
        let mut rng = common::rng(block_seed);
        let blocks: Vec<usize> = (0..lts.edges().len()).map(|_| rng.gen_range(0..3)).collect();
        let sp = LabelSplitting::from_blocks(&lts, &blocks);
        let split = splitting::apply(&lts, &sp).unwrap();
        prop_assert_eq!(split.validate(), Ok(()));
        prop_assert_eq!(split.edges().len(), lts.edges().len());
        for (i, e) in split.edges().iter().enumerate() {
            prop_assert_eq!(e.source, lts.edges()[i].source);
            prop_assert_eq!(e.target, lts.edges()[i].target);
            prop_assert_eq!(sp.rho(e.label), lts.edges()[i].label);
        }
        // refining never loses embeddability
        if RegionSystem::new(&lts).is_embeddable().is_embeddable() {
            prop_assert!(RegionSystem::new(&split).is_embeddable().is_embeddable());
        }
    }
}

#[test]
fn abc_marking_map_is_the_reachability_graph() {
    let net = splitsynth::fixtures::abc_net();
    let lts = splitsynth::fixtures::abc_reachability();
    let EmbeddingVerdict::Embeds(map) = net.verify_embedding(&lts).unwrap() else {
        panic!("middle LTS embeds");
    };
    let rg = net.reachability_graph(100).unwrap();
    let from_map: HashSet<String> = map.markings.iter().map(|m| net.marking_name(m)).collect();
    let from_rg: HashSet<String> = rg.states().iter().cloned().collect();
    assert_eq!(from_map, from_rg);
    assert_eq!(from_rg.len(), 8);
}

#[test]
fn random_generator_respects_limits() {
    let mut rng = common::rng(7);
    for _ in 0..200 {
        let lts = common::random_lts(&mut rng, 8, 3, 8);
        assert!(lts.num_states() <= 8);
        assert!(lts.num_labels() <= 3);
        assert!(lts.edges().len() <= 8);
        assert_eq!(lts.validate(), Ok(()));
    }
}
