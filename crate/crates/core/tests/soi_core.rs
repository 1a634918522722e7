use num_bigint::BigInt;
use proptest::prelude::*;
use rauzy_core::markov::{self, Branch, ChartPoint, MarkovCell};
use rauzy_core::rational::{self, ratio, Rational};
use rauzy_core::sampling;
use rauzy_core::system::ReductionOutcome;
use rauzy_core::verify;
use rauzy_core::{AcceleratedOutcome, SpecialSystem, StepOutcome, ThinClass};

fn system_from(x: i64, y: i64, d: i64) -> Option<SpecialSystem> {
    let den = BigInt::from(d);
    let l = [x, y - x, d - y].map(|p| Rational::new(BigInt::from(p), den.clone()));
    SpecialSystem::from_lengths(l).ok()
}

fn arb_system() -> impl Strategy<Value = SpecialSystem> {
    (2i64..1_000_000_000)
        .prop_flat_map(|d| (1..d, 1..d, Just(d)))
        .prop_filter_map("distinct cut points", |(x, y, d)| {
            let (x, y) = if x < y { (x, y) } else { (y, x) };
            if x == y {
                None
            } else {
                system_from(x, y, d)
            }
        })
}

fn apply(m: &rauzy_core::StepMatrix, v: &[Rational; 3]) -> [Rational; 3] {
    std::array::from_fn(|i| (0..3).map(|j| Rational::from_integer(BigInt::from(m.0[i][j])) * &v[j]).sum())
}

proptest! {
    #[test]
    fn step_matrix_maps_new_lengths_back(s in arb_system()) {
        let old = s.ranked();
        prop_assert_eq!(s.has_hole(), old[0] < ratio(1, 2));
        match s.rauzy_step() {
            StepOutcome::Continue(step) => {
                let new = step.system.ranked().map(|x| x * &step.scale);
                prop_assert_eq!(apply(&step.length_matrix, &new), old);
                prop_assert_eq!(step.system.lengths().as_array().iter().sum::<Rational>(), rational::one());
                prop_assert!(step.length_matrix.to_bigint().det() == BigInt::from(1) || step.length_matrix.to_bigint().det() == BigInt::from(-1));
            }
            StepOutcome::Hole => prop_assert!(s.has_hole()),
            StepOutcome::TieEncountered => {}
        }
    }

    #[test]
    fn accelerated_matrix_is_product_of_elementary(s in arb_system()) {
        if let AcceleratedOutcome::Continue(step) = s.accelerated_step() {
            let product = step.elementary.iter().fold(rauzy_core::StepMatrix::identity(), |acc, m| acc.mul(m));
            prop_assert_eq!(&product, &step.matrix);
            prop_assert_eq!(step.elementary.len() as u64, step.n);
            let new = step.system.ranked().map(|x| x * &step.scale);
            prop_assert_eq!(apply(&step.matrix, &new), s.ranked());
        }
    }
}

#[test]
fn step_equals_transmission_then_reduction() {
    let mut rng = sampling::block_rng(11, 0);
    let mut compared = 0;
    for _ in 0..1000 {
        let Ok(s) = SpecialSystem::from_lengths(sampling::lattice_simplex(&mut rng, 1_000_003)) else { continue };
        let pairs = s.to_interval_pairs().transmission_right().unwrap();
        let reduced = pairs.reduction_right().unwrap();
        match (s.rauzy_step(), reduced) {
            (StepOutcome::Continue(step), ReductionOutcome::Reduced(r)) => {
                assert_eq!(r.to_special().unwrap(), step.system);
                compared += 1;
            }
            (StepOutcome::Hole, ReductionOutcome::Hole) => {}
            (StepOutcome::Hole, ReductionOutcome::Reduced(r)) => {
                // The cut keeps a negative-length pair; the reduced bases no longer fit.
                assert!(r.to_special().is_err());
            }
            (a, b) => panic!("{s:?}: {a:?} vs {b:?}"),
        }
    }
    assert!(compared > 300);
}

/// Closed-form cell classification against the iterated induction.
#[test]
fn closed_form_counter_matches_iteration() {
    let mut rng = sampling::block_rng(5, 0);
    let mut cells = 0;
    for _ in 0..100_000 {
        let l = sampling::lattice_simplex(&mut rng, 1 << 30);
        let Ok(s) = SpecialSystem::from_lengths(l.clone()) else { continue };
        let p = ChartPoint::from_exact_lengths(l);
        match (s.accelerated_step(), markov::cell_of(&p)) {
            (AcceleratedOutcome::Continue(step), Ok(cell)) => {
                assert_eq!(step.n, cell.n);
                let branch = if step.relative_order == rauzy_core::Perm3::CYCLE { Branch::Cycle } else { Branch::Swap };
                assert_eq!(branch, cell.branch);
                assert_eq!(step.matrix, cell.matrix());
                cells += 1;
            }
            (AcceleratedOutcome::HoleAfter { k: 0 }, Err(markov::ChartError::Hole)) => {}
            (AcceleratedOutcome::HoleAfter { k }, Err(markov::ChartError::HoleAfter(j))) => assert_eq!(k, j),
            (AcceleratedOutcome::TieEncountered, Err(markov::ChartError::TieEncountered)) => {}
            (a, b) => panic!("{s:?}: {a:?} vs {b:?}"),
        }
    }
    assert!(cells > 50_000);
}

/// Depth-50 classification of (3/5, 1/4, 3/20), replayed with elementary
/// steps: a generalized iteration ends when the leading letter changes.
#[test]
fn classify_matches_elementary_replay() {
    let s = SpecialSystem::new(ratio(3, 5), ratio(1, 4), ratio(3, 20)).unwrap();
    let mut current = s.clone();
    let mut k = 1u64;
    let expected = loop {
        let leader = current.order().first();
        match current.rauzy_step() {
            StepOutcome::Continue(step) => {
                current = step.system;
                if current.order().first() != leader {
                    if k == 50 {
                        break ThinClass::Survived { iters: 50 };
                    }
                    k += 1;
                }
            }
            StepOutcome::Hole => break ThinClass::HoleAt { k },
            StepOutcome::TieEncountered => break ThinClass::TieAt { k },
        }
    };
    assert_eq!(s.classify_thin(50), expected);
}

/// `M^k (6,3,2)` for the one-step cyclic cell follows that cell for `k + 1`
/// generalized iterations, then lands on `(3,2,1)/6`, where `a = b + c`.
#[test]
fn perron_approximants_survive_to_their_depth() {
    let cell = MarkovCell::new(1, Branch::Cycle);
    let fixed = verify::perron_point(cell, 500);
    for k in [5u64, 20, 40] {
        let l = verify::perron_approximant(cell, k);
        let s = SpecialSystem::from_lengths(l.clone()).unwrap();
        assert_eq!(s.classify_thin(k + 1), ThinClass::Survived { iters: k + 1 });
        assert_eq!(s.classify_thin(k + 2), ThinClass::TieAt { k: k + 2 });
        let mut p = ChartPoint::from_exact_lengths(l);
        for _ in 0..=k {
            let (q, c) = markov::apply_t(&p).unwrap();
            assert_eq!(c, cell);
            p = q;
        }
        if k == 40 {
            let q = ChartPoint::from_exact_lengths(verify::perron_approximant(cell, k));
            assert!(q.dist(&fixed) < 1e-12);
        }
    }
}
