use rauzy_core::graph::{PathStep, RauzyPath};
use rauzy_core::markov::{self, ChartPoint};
use rauzy_core::measure::{self, WeightVector};
use rauzy_core::rational::{int, ratio};
use rauzy_core::{dimension, sampling, suspension, Letter, Perm3};

fn one_win_of_letter_one() -> RauzyPath {
    RauzyPath {
        start: Perm3::IDENTITY,
        steps: vec![PathStep { winner: Letter::new(1).unwrap(), n: 1, from: Perm3::IDENTITY, to: Perm3::IDENTITY }],
    }
}

/// `ν_q` of the cone `λ₁ > λ₂ + λ₃`, by rejection sampling on the level set.
fn cone_frequency(q: [f64; 3], samples: usize, seed: u64) -> f64 {
    let mut rng = sampling::block_rng(seed, 0);
    let hits = (0..samples)
        .filter(|_| {
            let l = measure::sample_nu(&mut rng, q);
            l[0] > l[1] + l[2]
        })
        .count();
    hits as f64 / samples as f64
}

#[test]
fn single_step_probabilities_match_sampling() {
    let path = one_win_of_letter_one();
    let q1 = WeightVector::ones();
    let q2 = WeightVector::new([int(1), int(2), int(3)]).unwrap();
    assert_eq!(measure::path_probability(&q1, &path).unwrap(), ratio(1, 4));
    assert_eq!(measure::path_probability(&q2, &path).unwrap(), ratio(1, 2));
    assert!((cone_frequency([1.0, 1.0, 1.0], 400_000, 1) - 0.25).abs() < 0.01);
    assert!((cone_frequency([1.0, 2.0, 3.0], 400_000, 2) - 0.5).abs() < 0.01);
}

#[test]
fn depth_one_survivor_mass_by_sampling() {
    let mut rng = sampling::block_rng(3, 0);
    let n = 400_000;
    let kept = (0..n).filter(|_| sampling::uniform_chamber(&mut rng)[0] > 0.5).count();
    assert!((kept as f64 / n as f64 - 0.75).abs() < 0.005);
}

/// Survivor masses against direct simulation: a point lies in `X_d` when its
/// first `d − 1` steps are cells and the next point has `a > 1/2`.
#[test]
fn survivor_brackets_match_simulation() {
    let brackets = dimension::survivor_masses(4, 64, 1e-9, 1).unwrap();
    let n = 400_000usize;
    let mut counts = [0usize; 5];
    let mut rng = sampling::block_rng(4, 0);
    for _ in 0..n {
        let l = sampling::uniform_chamber(&mut rng);
        let mut p = ChartPoint::new(l[0], l[1]);
        for count in counts.iter_mut().skip(1) {
            if p.a <= 0.5 {
                break;
            }
            *count += 1;
            match markov::apply_t(&p) {
                Ok((q, _)) => p = q,
                Err(_) => break,
            }
        }
    }
    for d in 1..=4 {
        let f = counts[d] as f64 / n as f64;
        let m = brackets[d].midpoint();
        let sigma = (m * (1.0 - m) / n as f64).sqrt();
        assert!((f - m).abs() < 5.0 * sigma + brackets[d].upper - brackets[d].lower, "depth {d}: {f} vs {m}");
    }
}

#[test]
fn kerckhoff_bound_at_full_size() {
    for t in [2.0, 5.0, 10.0, 100.0] {
        let e = measure::mc_kerckhoff(t, [1.0, 1.0, 1.0], 1_000_000, 11, 1);
        assert!(e.passes, "{e:?}");
        assert!(e.frequency <= 1.0 / t + 3.0 * e.sigma);
    }
}

#[test]
fn balance_has_a_witness() {
    let grid: Vec<f64> = suspension::log_grid(1.01, 1e4, 25);
    let r = measure::mc_balance(&grid, [1.0, 1.0, 1.0], 20_000, 5, 1, 10_000);
    assert!(r.probabilities.windows(2).all(|w| w[0] <= w[1]));
    assert!(r.probabilities[0] < 0.05);
    let c = r.witness().expect("some C with P > 1/C");
    assert!(c <= 1e4);
}

#[test]
fn roof_tail_shape() {
    let lp = suspension::Loop::default_loop();
    let tc = suspension::roof_tail(&lp, 100_000, &suspension::default_tail_grid(), 3, 1, 10_000);
    assert!(tc.probabilities.windows(2).all(|w| w[0] >= w[1]));
    assert!(tc.probabilities.iter().all(|&p| (0.0..=1.0).contains(&p)));
    assert!(tc.fitted_exponent > 0.0 && tc.fit_residual < 0.1, "{tc:?}");
    assert!(tc.moment_drift < 0.01, "{}", tc.moment_drift);
    assert_eq!(tc.returns + tc.holes + tc.ties + tc.no_returns, tc.samples);
}

#[test]
fn roof_of_worked_step() {
    let lambda = [ratio(7, 10), ratio(9, 50), ratio(3, 25)];
    let p = ChartPoint::exact(lambda[0].clone(), lambda[1].clone());
    let (_, cell) = markov::apply_t(&p).unwrap();
    let path = suspension::cells_to_path(Perm3::IDENTITY, &[cell]);
    let r = suspension::roof(&lambda, &path).unwrap();
    assert!((r - 0.916_290_731_874_155).abs() < 1e-12);
    assert!(((3.0 * r).exp() - markov::jacobian(&p).unwrap()).abs() < 1e-9);
    assert_eq!(suspension::roof(&lambda, &RauzyPath::empty(Perm3::IDENTITY)).unwrap(), 0.0);
}

#[test]
fn returns_along_a_random_loop_prefix() {
    let lp = suspension::Loop::default_loop();
    let v = lp.vertices();
    let mut rng = sampling::block_rng(6, 0);
    let mut returns = 0;
    for _ in 0..20_000 {
        let [a, b] = sampling::uniform_triangle(&mut rng, v);
        if let suspension::ReturnOutcome::Returned(rec, q) = suspension::first_return(&ChartPoint::new(a, b), &lp, 10_000) {
            let mut p = ChartPoint::new(a, b);
            for &c in &rec.cells {
                let (next, got) = markov::apply_t(&p).unwrap();
                assert_eq!(got, c);
                p = next;
            }
            assert!(p.dist(&q) < 1e-10);
            assert!(rec.roof_value > 0.0);
            returns += 1;
        }
    }
    assert!(returns > 0);
}
