//! End-to-end acceptance gate. Each test covers one numbered criterion and
//! prints a single pass/fail line with its runtime against the budget.
//! Run `cargo test --test acceptance -- --test-threads=1 --nocapture` to see
//! every line; the suite fails if any criterion fails or overruns.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use incompat::channels::{random_channel, Channel};
use incompat::classify::{
    certify_n_ibc, classify_channel, clone_bound, eb_threshold, projective_threshold,
    rank1_threshold, refute_n_ibc, Evidence, Status,
};
use incompat::compat::{joint_measurability, white_noise_robustness, SolverOptions, Verdict};
use incompat::constructions::{
    cloning_joint, hsm_projective, hsm_rank1, mixture_joint, random_povm, random_state,
    specker_observables, spin_direction_check,
};
use incompat::linalg::{self, CMatrix};
use incompat::observables::{depolarize, noisy_spin, postprocess, trine, Observable, PostProcessing};

fn conclude(id: &str, started: Instant, budget_s: u64, pass: bool, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "criterion {id}: {} ({detail}; {elapsed:.2}s of {budget_s}s budget)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(
        elapsed < budget_s as f64,
        "criterion {id} took {elapsed:.2}s, budget {budget_s}s"
    );
}

fn unit_direction(rng: &mut ChaCha12Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-6 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

#[test]
fn criterion_01_planar_triple_robustness() {
    let started = Instant::now();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_incompat"))
        .args(["robustness", "--builtin", "xyz"])
        .output()
        .expect("binary runs");
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).expect("JSON output");
    let t_star = report["t_star"].as_f64().expect("t_star field");
    let target = 1.0 / 3.0f64.sqrt();
    let diff = (t_star - target).abs();
    conclude(
        "01",
        started,
        30,
        diff <= 1e-3,
        &format!("orthogonal sharp triple t* = {t_star:.6}, |t* - 3^(-1/2)| = {diff:.2e}"),
    );
}

#[test]
fn criterion_02_qubit_pairs_match_the_closed_form() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE01);
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut dirs = [[0.0; 3]; 2];
        let mut vecs = [[0.0; 3]; 2];
        let mut lens = [0.0; 2];
        for s in 0..2 {
            dirs[s] = unit_direction(&mut rng);
            lens[s] = 0.2 + 0.8 * rng.random::<f64>();
            for c in 0..3 {
                vecs[s][c] = lens[s] * dirs[s][c];
            }
        }
        let a = noisy_spin(dirs[0], lens[0]).unwrap();
        let b = noisy_spin(dirs[1], lens[1]).unwrap();
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (v0, v1) in vecs[0].iter().zip(&vecs[1]) {
            plus += (v0 + v1).powi(2);
            minus += (v0 - v1).powi(2);
        }
        let analytic = (2.0 / (plus.sqrt() + minus.sqrt())).min(1.0);
        let solved = white_noise_robustness(&[a, b], &opts, 4e-4).unwrap();
        assert!(solved.converged, "pair search did not converge");
        worst = worst.max((solved.t_star - analytic).abs());
    }
    conclude(
        "02",
        started,
        300,
        worst <= 1e-3,
        &format!("200 unbiased qubit pairs, worst |t*_solver - t*_analytic| = {worst:.2e}"),
    );
}

#[test]
fn criterion_03_cloning_marginals_are_exact() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE03);
    let mut worst_marginal = 0.0f64;
    let mut worst_eig = 0.0f64;
    for (d, n) in [(2usize, 2usize), (2, 3), (3, 2)] {
        let t = clone_bound(d, n);
        for _ in 0..20 {
            let set: Vec<Observable> = (0..n)
                .map(|_| {
                    let outcomes = 2 + (rng.random::<f64>() * 2.0) as usize;
                    random_povm(d, outcomes, &mut rng).unwrap()
                })
                .collect();
            let (joint, t_built) = cloning_joint(&set).unwrap();
            assert_eq!(t_built, t);
            let targets: Vec<Observable> =
                set.iter().map(|o| depolarize(o, t).unwrap()).collect();
            worst_marginal = worst_marginal.max(joint.marginal_defect(&targets).unwrap());
            for cell in joint.cells() {
                worst_eig = worst_eig.min(linalg::min_eigenvalue(cell));
            }
        }
    }
    conclude(
        "03",
        started,
        60,
        worst_marginal <= 1e-10 && worst_eig >= -1e-10,
        &format!(
            "60 symmetrized-product joints, worst marginal defect {worst_marginal:.2e}, \
             min cell eigenvalue {worst_eig:.2e}"
        ),
    );
}

#[test]
fn criterion_04_mixture_joints_at_the_edge() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE04);
    let mut worst_marginal = 0.0f64;
    let mut worst_eig = 0.0f64;
    for n in [2usize, 3, 4] {
        let t = 1.0 / n as f64;
        let theta = random_channel(2, 3, &mut rng).unwrap();
        let eta = random_state(2, &mut rng);
        let set: Vec<Observable> = (0..n)
            .map(|_| {
                let outcomes = 2 + (rng.random::<f64>() * 2.0) as usize;
                random_povm(2, outcomes, &mut rng).unwrap()
            })
            .collect();
        let joint = mixture_joint(&set, &theta, &eta, t).unwrap();
        let targets: Vec<Observable> = set
            .iter()
            .map(|o| {
                let effects: Vec<CMatrix> = o
                    .effects()
                    .iter()
                    .map(|e| {
                        let mapped = theta.apply(e).unwrap().scale(t);
                        let weight = (&eta * e).trace_re() * (1.0 - t);
                        &mapped + &CMatrix::identity(2).scale(weight)
                    })
                    .collect();
                Observable::with_tol(2, o.labels().to_vec(), effects, 1e-7).unwrap()
            })
            .collect();
        worst_marginal = worst_marginal.max(joint.marginal_defect(&targets).unwrap());
        for cell in joint.cells() {
            worst_eig = worst_eig.min(linalg::min_eigenvalue(cell));
        }
    }
    conclude(
        "04",
        started,
        60,
        worst_marginal <= 1e-12 && worst_eig >= -1e-10,
        &format!(
            "mixture joints at t = 1/n for n = 2, 3, 4: worst marginal defect \
             {worst_marginal:.2e}, min cell eigenvalue {worst_eig:.2e}"
        ),
    );
}

#[test]
fn criterion_05_hollow_triangle_and_order_five() {
    let started = Instant::now();
    let opts = SolverOptions::default();
    let triple = specker_observables(3, 0.6).unwrap();
    let mut pairs_ok = true;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let verdict = joint_measurability(
                &[triple[i].clone(), triple[j].clone()],
                &opts,
            )
            .unwrap()
            .verdict;
            pairs_ok &= verdict == Verdict::Compatible;
        }
    }
    let triple_verdict = joint_measurability(&triple, &opts).unwrap().verdict;
    let five_hot = joint_measurability(&specker_observables(5, 0.46).unwrap(), &opts)
        .unwrap()
        .verdict;
    let five_cold = joint_measurability(&specker_observables(5, 0.43).unwrap(), &opts)
        .unwrap()
        .verdict;
    let pass = pairs_ok
        && triple_verdict == Verdict::Incompatible
        && five_hot == Verdict::Incompatible
        && five_cold == Verdict::Compatible;
    conclude(
        "05",
        started,
        600,
        pass,
        &format!(
            "order 3 at t = 0.6: pairs compatible = {pairs_ok}, triple = {triple_verdict}; \
             order 5: t = 0.46 {five_hot}, t = 0.43 {five_cold}"
        ),
    );
}

#[test]
fn criterion_06_entanglement_vs_incompatibility_breaking() {
    let started = Instant::now();
    let opts = SolverOptions::default();
    let channel = Channel::white_noise(2, 0.4).unwrap();
    let report = classify_channel(&channel, &[2, 3], &opts).unwrap();
    let ebc_refuted = report.ebc.status == Status::Refuted;
    let pt_eig = match &report.ebc.evidence {
        Evidence::ChoiSpectrum { min_pt_eigenvalue } => *min_pt_eigenvalue,
        _ => f64::NAN,
    };
    let ibc_certified = report.ibc.status == Status::Certified;
    let mut gap_ok = true;
    for d in 2..=10 {
        gap_ok &= rank1_threshold(d) > eb_threshold(d);
    }
    let pass = ebc_refuted && pt_eig < -1e-6 && ibc_certified && gap_ok;
    conclude(
        "06",
        started,
        10,
        pass,
        &format!(
            "white noise t = 0.4: entanglement breaking {} (min PT eigenvalue {pt_eig:.4}), \
             incompatibility breaking {}; t_0(d) > 1/(1+d) for d = 2..10: {gap_ok}",
            report.ebc.status, report.ibc.status
        ),
    );
}

#[test]
fn criterion_07_two_breaking_without_three_breaking() {
    let started = Instant::now();
    let opts = SolverOptions::default();
    let channel = Channel::white_noise(2, 0.6).unwrap();
    let two = certify_n_ibc(&channel, 2).unwrap();
    let xyz: Vec<Observable> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .into_iter()
        .map(|v| noisy_spin(v, 1.0).unwrap())
        .collect();
    let three = refute_n_ibc(&channel, 3, &[xyz], &opts).unwrap();
    let witnessed = matches!(three.evidence, Evidence::Witness { .. });
    let pass = two.status == Status::Certified
        && three.status == Status::Refuted
        && witnessed;
    conclude(
        "07",
        started,
        60,
        pass,
        &format!(
            "white noise t = 0.6: 2-breaking {}, 3-breaking {} via sharp axis triple",
            two.status, three.status
        ),
    );
}

#[test]
fn criterion_08_hidden_state_models_hit_their_noise_levels() {
    let started = Instant::now();
    let samples = 1_000_000u64;
    let mut details = Vec::new();
    let mut pass = true;
    for d in [2usize, 3] {
        let basis = Observable::projective_from_basis(&CMatrix::identity(d)).unwrap();
        let target = depolarize(&basis, projective_threshold(d)).unwrap();
        let est = hsm_projective(&basis, samples, 7).unwrap();
        let dev = est.max_deviation(&target).unwrap();
        let sigma = est.max_sigma_deviation(&target).unwrap();
        pass &= dev <= 5e-3 && sigma <= 3.0;
        details.push(format!("projective d = {d}: dev {dev:.2e}, {sigma:.2} sigma"));
    }
    let target = depolarize(&trine(), rank1_threshold(2)).unwrap();
    let est = hsm_rank1(&trine(), samples, 7).unwrap();
    let dev = est.max_deviation(&target).unwrap();
    let sigma = est.max_sigma_deviation(&target).unwrap();
    pass &= dev <= 5e-3 && sigma <= 3.0;
    details.push(format!("rank-1 trine: dev {dev:.2e}, {sigma:.2} sigma"));
    conclude("08", started, 300, pass, &details.join("; "));
}

#[test]
fn criterion_09_spin_direction_closed_form() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE09);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let n_hat = unit_direction(&mut rng);
        let est = spin_direction_check(n_hat, 1_000_000, 7).unwrap();
        let target = noisy_spin(n_hat, 0.5).unwrap();
        worst = worst.max(est.max_deviation(&target).unwrap());
    }
    conclude(
        "09",
        started,
        60,
        worst <= 5e-3,
        &format!("5 random directions, worst deviation from (I ± n/2)/2 is {worst:.2e}"),
    );
}

#[test]
fn criterion_10_threshold_closed_forms() {
    let started = Instant::now();
    let mut pass = true;
    for d in 2..=6usize {
        for n in 2..=10usize {
            let clone = (n + d) as f64 / (n * (d + 1)) as f64;
            pass &= (clone_bound(d, n) - clone).abs() <= 1e-15;
        }
        let harmonic: f64 = (1..=d).map(|k| 1.0 / k as f64).sum();
        let projective = (harmonic - 1.0) / (d - 1) as f64;
        pass &= (projective_threshold(d) - projective).abs() <= 1e-15;
        let rank1 = (3 * d - 1) as f64 * ((d - 1) as f64).powi(d as i32 - 1)
            / ((d + 1) as f64 * (d as f64).powi(d as i32));
        pass &= (rank1_threshold(d) - rank1).abs() <= 1e-15;
        pass &= (eb_threshold(d) - 1.0 / (1 + d) as f64).abs() <= 1e-15;
    }
    pass &= (clone_bound(2, 2) - 2.0 / 3.0).abs() <= 1e-15;
    pass &= (projective_threshold(2) - 0.5).abs() <= 1e-15;
    pass &= (rank1_threshold(2) - 5.0 / 12.0).abs() <= 1e-15;
    pass &= (rank1_threshold(3) - 8.0 / 27.0).abs() <= 1e-15;
    pass &= (clone_bound(3, 2) - 0.625).abs() <= 1e-15;
    let crossing = (clone_bound(2, 8) - rank1_threshold(2)).abs();
    pass &= crossing <= 1e-12;
    conclude(
        "10",
        started,
        1,
        pass,
        &format!(
            "closed forms match for d = 2..6, n = 2..10; qubit cloning bound at n = 8 \
             meets the rank-1 level within {crossing:.1e}"
        ),
    );
}

#[test]
fn criterion_11_structural_invariants() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE11);
    let opts = SolverOptions::default();

    let channels: Vec<Channel> = (0..20)
        .map(|_| random_channel(2, 3, &mut rng).unwrap())
        .collect();
    let mut preserved = true;
    for i in 0..100 {
        let n = 2 + i % 2;
        let t = 0.95 * clone_bound(2, n);
        let set: Vec<Observable> = (0..n)
            .map(|_| depolarize(&random_povm(2, 2, &mut rng).unwrap(), t).unwrap())
            .collect();
        let image: Vec<Observable> = set
            .iter()
            .map(|o| channels[i % 20].apply_observable(o).unwrap())
            .collect();
        let verdict = joint_measurability(&image, &opts).unwrap().verdict;
        preserved &= verdict == Verdict::Compatible;
    }

    let mut composition = 0.0f64;
    for _ in 0..25 {
        let obs = random_povm(2, 3, &mut rng).unwrap();
        let mid: Vec<i64> = vec![10, 11];
        let fin: Vec<i64> = vec![20, 21, 22];
        let inner = random_kernel(obs.labels(), &mid, &mut rng);
        let outer = random_kernel(&mid, &fin, &mut rng);
        let sequential = postprocess(&postprocess(&obs, &inner).unwrap(), &outer).unwrap();
        let composed = postprocess(&obs, &outer.compose(&inner).unwrap()).unwrap();
        for (a, b) in sequential.effects().iter().zip(composed.effects()) {
            composition = composition.max(linalg::max_abs_diff(a, b));
        }
    }

    let mut consistent = true;
    for _ in 0..50 {
        let ch = random_channel(2, 2, &mut rng).unwrap();
        let report = classify_channel(&ch, &[2, 3], &opts).unwrap();
        consistent &= incompat::classify::check_report_consistency(&report).is_ok();
    }

    let mut mean = CMatrix::zeros(2);
    let rho = random_state(2, &mut rng);
    let draws = 4000;
    for _ in 0..draws {
        let u = linalg::haar_unitary(2, &mut rng);
        mean = &mean + &(&(&u * &rho) * &u.adjoint());
    }
    mean = mean.scale(1.0 / draws as f64);
    let haar_gap = linalg::max_abs_diff(&mean, &CMatrix::identity(2).scale(0.5));

    let pass = preserved && composition <= 1e-12 && consistent && haar_gap <= 3e-2;
    conclude(
        "11",
        started,
        600,
        pass,
        &format!(
            "channel images of compatible sets stay compatible: {preserved}; \
             postprocessing composition defect {composition:.2e}; \
             50 classification reports consistent: {consistent}; \
             Haar first moment off by {haar_gap:.2e}"
        ),
    );
}

fn random_kernel(sources: &[i64], targets: &[i64], rng: &mut ChaCha12Rng) -> PostProcessing {
    let mut kernel = vec![vec![0.0; sources.len()]; targets.len()];
    for g in 0..sources.len() {
        let mut col: Vec<f64> = (0..targets.len()).map(|_| rng.random::<f64>()).collect();
        let sum: f64 = col.iter().sum();
        for w in &mut col {
            *w /= sum;
        }
        for (row, w) in kernel.iter_mut().zip(col) {
            row[g] = w;
        }
    }
    PostProcessing::new(sources.to_vec(), targets.to_vec(), kernel).unwrap()
}
