use rauzy_core::markov::{self, Branch, ChartError, ChartPoint, MarkovCell};
use rauzy_core::rational::{self, Rational};
use rauzy_core::{sampling, verify, AcceleratedOutcome, SpecialSystem};

/// T through the chart formulas against one accelerated induction step on
/// the same exact lengths, relabelled by size.
#[test]
fn apply_t_matches_accelerated_step() {
    let mut rng = sampling::block_rng(21, 0);
    let mut compared = 0;
    while compared < 10_000 {
        let l = sampling::lattice_simplex(&mut rng, 1 << 40);
        let Ok(s) = SpecialSystem::from_lengths(l.clone()) else { continue };
        let p = ChartPoint::from_exact_lengths(l);
        match (s.accelerated_step(), markov::apply_t(&p)) {
            (AcceleratedOutcome::Continue(step), Ok((q, cell))) => {
                let [a, b, _] = step.system.ranked();
                let e = q.exact.as_ref().unwrap();
                assert_eq!((&e.a, &e.b), (&a, &b));
                assert_eq!(cell.n, step.n);
                compared += 1;
            }
            (AcceleratedOutcome::HoleAfter { .. }, Err(e)) => assert!(e.is_hole()),
            (a, b) => panic!("{a:?} vs {b:?}"),
        }
    }
}

/// Float and exact paths agree to 1e-12 once the point is clear of cell walls.
#[test]
fn float_path_agrees_with_exact_path() {
    let mut rng = sampling::block_rng(22, 0);
    let mut compared = 0;
    for _ in 0..20_000 {
        let l = sampling::lattice_simplex(&mut rng, 1 << 50);
        let exact = ChartPoint::from_exact_lengths(l);
        let float = ChartPoint::new(exact.a, exact.b);
        let Ok((qe, ce)) = markov::apply_t(&exact) else { continue };
        let s = 1.0 - float.a;
        let x = float.a - ce.n as f64 * s;
        let margin = (x - float.b).abs().min((x - float.c()).abs()).min((float.a - (ce.n + 1) as f64 * s).abs());
        if margin < 1e-9 {
            continue;
        }
        let (qf, cf) = markov::apply_t(&float).unwrap();
        assert_eq!(ce, cf);
        assert!(qe.dist(&qf) < 1e-12 * (ce.n as f64).powi(2).max(1.0), "{qe:?} {qf:?}");
        compared += 1;
    }
    assert!(compared > 10_000, "{compared}");
}

#[test]
fn cells_map_onto_the_whole_chart() {
    let corners = [[1.0, 0.0], [0.5, 0.5], [1.0 / 3.0, 1.0 / 3.0]];
    let mut rng = sampling::block_rng(23, 0);
    for cell in [MarkovCell::new(1, Branch::Swap), MarkovCell::new(3, Branch::Cycle), MarkovCell::new(40, Branch::Swap)] {
        let mut nearest = [f64::INFINITY; 3];
        for _ in 0..20_000 {
            let p = verify::sample_in_cell(&mut rng, cell);
            let Ok((q, c)) = markov::apply_t(&p) else { continue };
            assert_eq!(c, cell);
            assert!(q.is_valid(), "{q:?}");
            for (k, v) in corners.iter().enumerate() {
                nearest[k] = nearest[k].min(q.dist(&ChartPoint::new(v[0], v[1])));
            }
        }
        assert!(nearest.iter().all(|&d| d < 0.03), "{cell}: {nearest:?}");
    }
}

#[test]
fn inverse_branches_of_distinct_cells_are_disjoint() {
    let mut rng = sampling::block_rng(24, 0);
    for _ in 0..2000 {
        let l = sampling::uniform_chamber(&mut rng);
        let p = ChartPoint::new(l[0], l[1]);
        let cells: Vec<MarkovCell> = (1..=6).flat_map(|n| [MarkovCell::new(n, Branch::Swap), MarkovCell::new(n, Branch::Cycle)]).collect();
        for &c in &cells {
            let pre = markov::inverse_branch(c, &p);
            if let Ok(got) = markov::cell_of(&pre) {
                assert_eq!(got, c);
            }
        }
    }
}

/// Exact shadows of chaos-game points survive ten accelerated steps.
#[test]
fn chaos_points_have_long_exact_futures() {
    let pts = markov::chaos_game_exact(100, 64, 9, None);
    let floats = markov::chaos_game(100, 64, 9, None, 1);
    for (p, f) in pts.iter().zip(&floats) {
        assert!(p.dist(f) < 1e-12);
        let mut q = p.clone();
        for _ in 0..10 {
            match markov::apply_t(&q) {
                Ok((next, _)) => q = next,
                Err(e) => panic!("{e:?} at {q:?}"),
            }
        }
    }
}

#[test]
fn expansion_bounds_on_uniform_points() {
    let lower = (4.0f64 / 3.0).powi(3);
    let mut rng = sampling::block_rng(25, 0);
    let mut checked = 0;
    while checked < 100_000 {
        let l = sampling::uniform_chamber(&mut rng);
        let p = ChartPoint::new(l[0], l[1]);
        match markov::cell_of(&p) {
            Ok(c) if c.n <= 100 => {
                let j = markov::jacobian(&p).unwrap();
                assert!(lower < j && j < ((c.n + 1) as f64).powi(3));
                checked += 1;
            }
            Ok(_) | Err(ChartError::Hole) | Err(ChartError::HoleAfter(_)) | Err(ChartError::TieEncountered) => {}
            Err(e) => panic!("{e:?}"),
        }
    }
}

#[test]
fn exact_vertices_of_first_cells() {
    let r = rational::ratio;
    let v: Vec<[Rational; 2]> = markov::cell_vertices(1).to_vec();
    assert_eq!(v, vec![[r(2, 3), r(1, 3)], [r(1, 2), r(1, 2)], [r(3, 5), r(1, 5)]]);
    let v: Vec<[Rational; 2]> = markov::cell_vertices(2).to_vec();
    assert_eq!(v, vec![[r(3, 4), r(1, 4)], [r(2, 3), r(1, 3)], [r(5, 7), r(1, 7)]]);
}
