use num_bigint::BigInt;
use rauzy_core::graph::{self, RauzyPath};
use rauzy_core::rational::Rational;
use rauzy_core::{sampling, Mat3, Perm3, SpecialSystem, StepOutcome};

fn perm(p: [u8; 3]) -> Perm3 {
    Perm3::new(p).unwrap()
}

#[test]
fn six_connected_states_with_three_arrows_each() {
    let g = graph::build_graph();
    assert_eq!(g.states.len(), 6);
    assert!(g.has_edge(perm([1, 2, 3]), perm([2, 1, 3])));
    assert!(!g.has_edge(perm([1, 2, 3]), perm([3, 2, 1])));
    assert!(g.is_strongly_connected());
    for &s in &g.states {
        assert_eq!(g.successors(s).len(), 3);
    }
}

#[test]
fn enumeration_is_sorted_and_counts_match_out_degrees() {
    let g = graph::build_graph();
    let start = perm([1, 2, 3]);
    assert_eq!(graph::enumerate_paths(&g, start, 0).count(), 1);
    assert_eq!(graph::enumerate_paths(&g, start, 1).count(), g.successors(start).len());
    for len in 2..=7 {
        let paths: Vec<RauzyPath> = graph::enumerate_paths(&g, start, len).collect();
        assert_eq!(paths.len(), 3usize.pow(len as u32));
        let keys: Vec<Vec<Perm3>> = paths.iter().map(|p| p.steps.iter().map(|s| s.to).collect()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "strictly increasing, hence duplicate-free");
        assert!(paths.iter().all(|p| p.validate().is_ok()));
    }
}

/// Brute force over every start and length with a fresh product per path,
/// against the incremental exhaustive walk.
#[test]
fn completeness_check_agrees_with_brute_force() {
    let g = graph::build_graph();
    let max_len = 8;
    let mut complete = 0u64;
    for &s in &g.states {
        for len in 0..=max_len {
            for p in graph::enumerate_paths(&g, s, len) {
                if graph::is_complete(&p) {
                    complete += 1;
                    assert!(graph::is_positive(&p).unwrap(), "{p:?}");
                }
            }
        }
    }
    let report = graph::check_complete_paths_positive(&g, max_len);
    assert!(report.violations.is_empty());
    assert_eq!(report.complete_paths, complete);
}

#[test]
fn iterated_steps_follow_graph_and_invert_lengths() {
    let g = graph::build_graph();
    let mut rng = sampling::block_rng(2, 0);
    for _ in 0..200 {
        let Ok(start) = SpecialSystem::from_lengths(sampling::lattice_simplex(&mut rng, 1 << 40)) else { continue };
        let mut s = start.clone();
        let mut m = Mat3::<BigInt>::identity();
        let mut scale = Rational::from_integer(1.into());
        let mut states = vec![s.order()];
        for _ in 0..30 {
            let StepOutcome::Continue(step) = s.rauzy_step() else { break };
            m = m.mul(&step.length_matrix.to_bigint());
            scale *= &step.scale;
            s = step.system;
            states.push(s.order());
        }
        for w in states.windows(2) {
            assert!(g.has_edge(w[0], w[1]));
        }
        // Rank coordinates: old = M · (unnormalized current).
        let cur = s.ranked().map(|x| x * &scale);
        let back: [Rational; 3] =
            std::array::from_fn(|i| (0..3).map(|j| Rational::from_integer(m.0[i][j].clone()) * &cur[j]).sum());
        assert_eq!(back, start.ranked());
        let path = RauzyPath::from_states(&states).unwrap();
        let det = graph::cocycle_of(&path).unwrap().to_bigint().det();
        assert!(det == BigInt::from(1) || det == BigInt::from(-1));
    }
}

#[test]
fn paths_serialize_as_step_lists() {
    let p = RauzyPath::from_states(&[perm([1, 2, 3]), perm([2, 1, 3])]).unwrap();
    let v = serde_json::to_value(&p).unwrap();
    let step = &v["steps"][0];
    for key in ["winner", "n", "from", "to"] {
        assert!(step.get(key).is_some(), "missing {key} in {v}");
    }
    let back: RauzyPath = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
}
