//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`) once its assertions hold. Everything is
//! seeded, so the suite is deterministic.

use elodyn::chain::{expected_step, init_chain, run_chain, step_chain, ChainConfig, ChainState};
use elodyn::game::{
    payoff_from_advantage, tree_selection, uniform_selection, AdvantageMatrix, PayoffMatrix,
    SigmoidLink,
};
use elodyn::hodge::{div, grad, hodge_decompose, is_stacm, rot, RatingVector, SkewMatrix};
use elodyn::intransitivity::{measure_intransitivity, IntransitivityClass};
use elodyn::matrix::SquareMatrix;
use elodyn::rps::{ground_truth_curve, run_experiment, Family};
use elodyn::solver::{
    enumerate_spanning_trees, random_connected_selection, solve_final_score,
    solve_final_score_from, stability_residual, tree_final_score,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN3: f64 = 1.0986122886681098;

fn link() -> SigmoidLink {
    SigmoidLink::Logistic
}

fn random_skew(m: usize, scale: f64, rng: &mut ChaCha8Rng) -> SkewMatrix {
    let mut mat = SquareMatrix::zeros(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = rng.gen_range(-scale..scale);
            mat.set(i, j, v);
            mat.set(j, i, -v);
        }
    }
    SkewMatrix::new(mat).unwrap()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[test]
fn criterion_01_hodge_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..100 {
        let m = rng.gen_range(2..=8);
        let a = random_skew(m, 5.0, &mut rng);
        let (s, c) = hodge_decompose(&a);
        let reconstruction = s.add(&c).as_matrix().max_abs_diff(a.as_matrix());
        assert!(reconstruction <= 1e-10, "case {case}: reconstruction {reconstruction:e}");
        let ip = s.as_matrix().inner_product(c.as_matrix());
        let scale = a.frobenius_norm().powi(2).max(1.0);
        assert!(ip.abs() <= 1e-10 * scale, "case {case}: inner product {ip:e}");
        let via_projector = a.sub(&grad(&div(a.as_matrix())));
        let rot_gap = rot(&a).as_matrix().max_abs_diff(via_projector.as_matrix());
        assert!(rot_gap <= 1e-12, "case {case}: rot mismatch {rot_gap:e}");
    }
    println!("criterion 01 PASS - hodge decomposition reconstructs, parts orthogonal, rot matches projector (100 random skew matrices)");
}

#[test]
fn criterion_02_two_player_final_score() {
    let p = PayoffMatrix::two_player(0.75).unwrap();
    let q = uniform_selection(2).unwrap();
    let rep = solve_final_score(&p, &q, link(), 1e-12, 100).unwrap();
    let gap = rep.solution.get(0) - rep.solution.get(1);
    assert!((gap - LN3).abs() <= 1e-10, "gap {gap} vs ln 3");
    println!("criterion 02 PASS - two-player final score gap = ln 3 within 1e-10");
}

#[test]
fn criterion_03_transitive_payoff_ignores_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..20 {
        let m = rng.gen_range(3..=6);
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let expected = RatingVector::centered(v.clone()).unwrap();
        let payoff =
            payoff_from_advantage(&AdvantageMatrix::new(grad(&v)), link()).unwrap();
        let q = random_connected_selection(m, &mut rng);
        let rep = solve_final_score(&payoff, &q, link(), 1e-12, 100).unwrap();
        let dist = rep.solution.euclidean_distance(&expected);
        assert!(dist <= 1e-8, "case {case}: distance {dist:e}");
    }
    println!("criterion 03 PASS - additively transitive payoffs solve to v - mean(v) for 20 random connected selections (1e-8)");
}

/// 3-player pure-cycle payoff: A_01 = A_12 = A_20 = ln 3.
fn cyclic_payoff() -> PayoffMatrix {
    PayoffMatrix::from_rows(&[
        vec![0.5, 0.75, 0.25],
        vec![0.25, 0.5, 0.75],
        vec![0.75, 0.25, 0.5],
    ])
    .unwrap()
}

#[test]
fn criterion_04_selection_dependence_witness() {
    let p = cyclic_payoff();
    let path_edges = [(0, 1), (1, 2)];
    let star_edges = [(0, 1), (0, 2)];
    let path = tree_final_score(&p, &path_edges, link()).unwrap();
    let star = tree_final_score(&p, &star_edges, link()).unwrap();
    for (k, expect) in [LN3, 0.0, -LN3].iter().enumerate() {
        assert!((path.get(k) - expect).abs() <= 1e-10, "path[{k}]");
    }
    for (k, expect) in [0.0, -LN3, LN3].iter().enumerate() {
        assert!((star.get(k) - expect).abs() <= 1e-10, "star[{k}]");
    }
    let dist = path.euclidean_distance(&star);
    assert!(dist > 1.5, "distance {dist}");
    for (r, edges) in [(&path, &path_edges), (&star, &star_edges)] {
        let q = tree_selection(edges.as_slice(), 3).unwrap();
        let res = stability_residual(r, &p, &q, link());
        assert!(inf_norm(&res) <= 1e-10, "residual for {edges:?}");
    }
    println!("criterion 04 PASS - path and star trees give (ln3, 0, -ln3) and (0, -ln3, ln3), distance > 1.5, both stable (1e-10)");
}

#[test]
fn criterion_05_tree_vs_newton_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let a = random_skew(4, 1.5, &mut rng);
    assert!(!is_stacm(&a, 1e-9), "payoff must be non-transitive");
    let p = payoff_from_advantage(&AdvantageMatrix::new(a), link()).unwrap();
    let trees = enumerate_spanning_trees(4);
    assert_eq!(trees.len(), 16);
    for edges in &trees {
        let closed = tree_final_score(&p, edges, link()).unwrap();
        let q = tree_selection(edges, 4).unwrap();
        let newton = solve_final_score(&p, &q, link(), 1e-12, 100).unwrap();
        let dist = closed.euclidean_distance(&newton.solution);
        assert!(dist <= 1e-8, "tree {edges:?}: distance {dist:e}");
    }
    println!("criterion 05 PASS - closed form and Newton agree on all 16 spanning trees of K4 (1e-8)");
}

#[test]
fn criterion_06_uniqueness_probe() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for instance in 0..5 {
        let m = 5;
        let a = random_skew(m, 2.0, &mut rng);
        let p = payoff_from_advantage(&AdvantageMatrix::new(a), link()).unwrap();
        let q = random_connected_selection(m, &mut rng);
        let mut solutions = Vec::new();
        for start_idx in 0..50 {
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let start = RatingVector::centered(raw).unwrap();
            let rep = solve_final_score_from(&p, &q, link(), &start, 1e-12, 100)
                .unwrap_or_else(|e| panic!("instance {instance} start {start_idx}: {e}"));
            solutions.push(rep.solution);
        }
        for (i, si) in solutions.iter().enumerate() {
            for sj in &solutions[i + 1..] {
                let dist = si.euclidean_distance(sj);
                assert!(dist < 1e-6, "instance {instance}: solutions differ by {dist:e}");
            }
        }
    }
    println!("criterion 06 PASS - Newton converges to one point from 50 random starts on 5 random (P, Q) instances (1e-6)");
}

#[test]
fn criterion_07_conservation_and_bounded_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let a = random_skew(6, 1.0, &mut rng);
    let p = payoff_from_advantage(&AdvantageMatrix::new(a), link()).unwrap();
    let config = ChainConfig::new(p, uniform_selection(6).unwrap(), 0.1, link(), 7070).unwrap();
    let bound = 2.0_f64.sqrt() * config.gain + 1e-12;
    let mut chain_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = init_chain(&config);
    for step in 0..100_000u32 {
        let (next, _) = step_chain(&state, &config, &mut chain_rng);
        let displacement: f64 = next
            .ratings
            .values()
            .iter()
            .zip(state.ratings.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(displacement <= bound, "step {step}: displacement {displacement}");
        let sum: f64 = next.ratings.values().iter().sum();
        assert!(sum.abs() <= 1e-6, "step {step}: sum {sum:e}");
        state = next;
    }
    println!("criterion 07 PASS - 1e5 steps keep |sum r| <= 1e-6 and displacement <= sqrt(2)*eta");
}

#[test]
fn criterion_08_long_run_concentration() {
    let config = ChainConfig::new(
        PayoffMatrix::two_player(0.75).unwrap(),
        uniform_selection(2).unwrap(),
        0.02,
        link(),
        808,
    )
    .unwrap();
    let traj = run_chain(&config, 200_000, 1);
    let gaps: Vec<f64> = traj.states[100_001..]
        .iter()
        .map(|s| s.ratings.get(0) - s.ratings.get(1))
        .collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!((mean - LN3).abs() < 0.1, "time-averaged gap {mean} vs ln 3");
    println!("criterion 08 PASS - 2e5-step chain time-average of the gap sits within 0.1 of ln 3");
}

#[test]
fn criterion_09_measure_anchors() {
    let zero = measure_intransitivity(&AdvantageMatrix::new(SkewMatrix::zeros(3)));
    assert_eq!(zero.measure, 1.0);
    assert_eq!(zero.classification, IntransitivityClass::Balanced);

    let cyclic = AdvantageMatrix::from_rows(&[
        vec![0.0, 1.0, -1.0],
        vec![-1.0, 0.0, 1.0],
        vec![1.0, -1.0, 0.0],
    ])
    .unwrap();
    let c = measure_intransitivity(&cyclic);
    assert!((c.measure - (1.0 + 6.0_f64.sqrt())).abs() <= 1e-12, "I(C) = {}", c.measure);

    for v in [vec![1.0, 0.0, -1.0], vec![0.3, -0.2, 0.5, -0.6], vec![2.0, 1.0]] {
        let report = measure_intransitivity(&AdvantageMatrix::new(grad(&v)));
        assert!(report.measure < 1.0, "I(grad({v:?})) = {}", report.measure);
    }
    println!("criterion 09 PASS - I(zero) == 1 exactly, I(cyclic) == 1 + sqrt(6) (1e-12), I(grad v) < 1");
}

fn t_grid() -> Vec<f64> {
    (0..20).map(|k| k as f64 * 0.05).collect()
}

#[test]
fn criterion_10_rock_scissors_curve() {
    let curve = ground_truth_curve(Family::RockScissors, &t_grid()).unwrap();
    assert_eq!(curve[0].1, 1.0, "I(0) is the boundary value 1");
    for (t, i) in &curve[1..] {
        assert!(*i < 1.0, "I({t}) = {i} must stay below 1");
    }
    let (t_min, _) = curve[1..]
        .iter()
        .fold((f64::NAN, f64::INFINITY), |(bt, bi), &(t, i)| {
            if i < bi {
                (t, i)
            } else {
                (bt, bi)
            }
        });
    assert!(
        (0.8 - 1e-9..=0.95 + 1e-9).contains(&t_min),
        "grid minimum at t = {t_min}"
    );
    println!("criterion 10 PASS - rock-scissors truth curve stays below 1 with its grid minimum at t = {t_min:.2}");
}

#[test]
fn criterion_11_rock_paper_scissors_curve() {
    let curve = ground_truth_curve(Family::RockPaperScissors, &t_grid()).unwrap();
    for window in curve.windows(2) {
        assert!(
            window[0].1 < window[1].1,
            "curve must increase: I({}) = {} vs I({}) = {}",
            window[0].0,
            window[0].1,
            window[1].0,
            window[1].1
        );
    }
    for (t, i) in &curve[1..] {
        assert!(*i > 1.0, "I({t}) = {i} must exceed 1");
    }
    let tail = ground_truth_curve(Family::RockPaperScissors, &[0.9, 0.99]).unwrap();
    assert!(
        tail[1].1 > tail[0].1,
        "I(0.99) = {} must exceed I(0.9) = {}",
        tail[1].1,
        tail[0].1
    );
    println!("criterion 11 PASS - rock-paper-scissors truth curve is strictly increasing, above 1, and keeps growing towards t = 1");
}

#[test]
fn criterion_12_convergence_bands() {
    let schedule = [100u64, 1000, 10_000];
    for family in [Family::RockScissors, Family::RockPaperScissors] {
        let rows = run_experiment(family, &[0.5], &schedule, 10, 1212).unwrap();
        let mut means = Vec::new();
        for &n in &schedule {
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.games_per_pair == n)
                .map(|r| (r.i_hat - r.i_truth).abs())
                .collect();
            assert_eq!(errs.len(), 10);
            means.push(errs.iter().sum::<f64>() / errs.len() as f64);
        }
        assert!(
            means[0] >= means[1] && means[1] >= means[2],
            "{family}: mean errors must be non-increasing: {means:?}"
        );
        if family == Family::RockScissors {
            assert!(
                means[2] < 0.15,
                "{family}: mean error at 1e4 games/pair is {}",
                means[2]
            );
        }
        println!(
            "criterion 12 PASS ({family}) - mean |I_hat - I| over 10 trials shrinks across games-per-pair 100/1000/10000: {means:?}"
        );
    }
}

#[test]
fn criterion_13_monte_carlo_step_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1313);
    let a = random_skew(4, 1.0, &mut rng);
    let p = payoff_from_advantage(&AdvantageMatrix::new(a), link()).unwrap();
    let config = ChainConfig::new(p, uniform_selection(4).unwrap(), 0.1, link(), 13).unwrap();
    let start = ChainState {
        step: 0,
        ratings: RatingVector::centered(vec![0.4, -0.1, 0.3, -0.6]).unwrap(),
    };
    let n = 1_000_000u32;
    let mut sample_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sums = vec![0.0; 4];
    let mut sq_sums = vec![0.0; 4];
    for _ in 0..n {
        let (next, _) = step_chain(&start, &config, &mut sample_rng);
        for (k, v) in next.ratings.values().iter().enumerate() {
            sums[k] += v;
            sq_sums[k] += v * v;
        }
    }
    let expected = expected_step(&start.ratings, &config);
    for k in 0..4 {
        let mean = sums[k] / n as f64;
        let var = (sq_sums[k] / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - expected.get(k)).abs() <= 3.0 * se,
            "coordinate {k}: mean {mean} vs expected {} (3se = {:e})",
            expected.get(k),
            3.0 * se
        );
    }
    println!("criterion 13 PASS - mean of 1e6 sampled steps matches expected_step within 3 standard errors per coordinate");
}
