//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use awgn_feedback::decoder::group_weights;
use awgn_feedback::exponents::{
    self, k4_small_noise_closed_form, tail_bound, tau2_window, tau3_lower, ExponentParams,
};
use awgn_feedback::harness::run_trials;
use awgn_feedback::protocol::{rank, select_group, BaselineScheme};
use awgn_feedback::{
    build_phase2, ChannelParams, Decoder, ExactDecoder, GroupSelection, MixtureConfig, MixtureDecoder, NoiseStream,
    OneSwitchScheme, RunConfig, Scheme, SessionNoise, Substream,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn q(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for k in 2..=4usize {
        for _ in 0..20 {
            let n1 = rng.gen_range(6..=24usize);
            let m = rng.gen_range(k..=(n1 - 3 + k).min(n1 - 1));
            let a2 = rng.gen_range(0.1..10.0);
            let mut labels: Vec<usize> = (0..m).collect();
            for i in (1..m).rev() {
                labels.swap(i, rng.gen_range(0..=i));
            }
            let sel = GroupSelection::new(&labels[..k]).unwrap();
            let code = build_phase2(&sel, m, n1, a2).unwrap();
            let d_k = 2.0 * a2 * k as f64 / (k as f64 - 1.0);
            let d_0 = 2.0 * a2;
            for i in 0..m {
                for j in (i + 1)..m {
                    let want = if sel.contains(i) && sel.contains(j) { d_k } else { d_0 };
                    let got = code.code().squared_distance(i, j);
                    worst = worst.max((got - want).abs() / want);
                    checked += 1;
                }
            }
        }
    }
    Outcome::new(worst <= 1e-9, format!("{checked} pairs over 60 configs, max relative error {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..10 {
        let a = 0.1 + 0.5 * i as f64;
        for j in 0..10 {
            let sigma2 = 0.1 * j as f64;
            let p = ExponentParams { beta: 0.5, tau2: 0.15, tau3: 0.05, sigma2, a };
            let r = exponents::overall(&p).unwrap();
            worst = worst.max((r.overall_per_n - a * (1.0 - sigma2) / 3.0).abs());
        }
    }
    let a = 2.0;
    let r = exponents::overall(&ExponentParams { beta: 0.5, tau2: 0.15, tau3: 0.05, sigma2: 0.0, a }).unwrap();
    let ratio = r.overall_per_n / exponents::exponent_no_feedback(a);
    let pass = worst <= 1e-12 && (ratio - 4.0 / 3.0).abs() <= 1e-12;
    Outcome::new(pass, format!("100 grid points, max |overall - A(1-s2)/3| {worst:.2e}; gain ratio {ratio:.15}"))
}

fn criterion_3() -> Outcome {
    const SLACK: f64 = 1e-9;
    let (lo2, hi2) = tau2_window();
    let betas: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
    let tau2s: Vec<f64> = (0..5).map(|i| lo2 + (hi2 - lo2) * i as f64 / 4.0).collect();
    let tau3s = [tau3_lower(), 0.1, 0.3, 0.6];
    let sigma2s = [0.001, 0.01, 0.1, 0.5, 1.0];
    let mut points = Vec::new();
    for &beta in &betas {
        for &tau2 in &tau2s {
            for &tau3 in &tau3s {
                for &sigma2 in &sigma2s {
                    points.push(ExponentParams { beta, tau2, tau3, sigma2, a: 1.0 });
                }
            }
        }
    }
    let reports: Vec<_> = points.par_iter().map(|p| exponents::verify(p).unwrap()).collect();
    let (mut v2, mut v3, mut v4, mut small, mut gap_fail) = (0, 0, 0, 0, 0);
    let mut worst_k4 = 0.0f64;
    let mut worst_gap = 0.0f64;
    for r in &reports {
        let n = r.numeric.unwrap();
        v2 += usize::from(!n.s2.dominates(SLACK));
        v3 += usize::from(!n.s3.dominates(SLACK));
        if !n.k4.dominates(SLACK) {
            v4 += 1;
            worst_k4 = worst_k4.max(n.k4.bound - n.k4.solution.value);
        }
        if r.params.sigma2 <= 0.01 {
            small += 1;
            let c = k4_small_noise_closed_form(r.params.beta, r.params.tau2);
            let gap = (n.k4.solution.value - c).abs() / c;
            worst_gap = worst_gap.max(gap);
            gap_fail += usize::from(gap >= 0.01);
        }
    }
    let pass = v2 == 0 && v3 == 0 && v4 == 0 && gap_fail == 0;
    Outcome::new(
        pass,
        format!(
            "{} points: S2 violations {v2}, S3 violations {v3}, k=4 violations {v4} (worst shortfall {worst_k4:.4}); \
             small-noise k=4 gap >= 1% at {gap_fail}/{small} points (worst {:.2}%)",
            reports.len(),
            100.0 * worst_gap
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = RunConfig {
        params: ChannelParams { a: 1.0, n: 16, m: 2, sigma: 0.0, ..Default::default() },
        scheme: Scheme::BaselineNoFeedback,
        trials: 1_000_000,
        seed: 2024,
        ..Default::default()
    };
    let stats = run_trials(&cfg).unwrap();
    let (lo, hi) = stats.interval(0.99).unwrap();
    let target = q(8f64.sqrt());
    Outcome::new(
        lo <= target && target <= hi,
        format!("p_hat {:.4e}, 99% CI [{lo:.4e}, {hi:.4e}], Q(sqrt 8) {target:.4e}", stats.row.p_hat),
    )
}

fn criterion_5() -> Outcome {
    let params = ChannelParams { a: 1.5, n: 16, m: 4, sigma: 0.5, ..Default::default() };
    let scheme = OneSwitchScheme::new(params).unwrap();
    let exact = ExactDecoder::from_config(&MixtureConfig::default()).unwrap();
    let mix1 = MixtureDecoder::new(MixtureConfig { num_samples: 4096, ..Default::default() });
    let mix2 = MixtureDecoder::new(MixtureConfig { num_samples: 8192, ..Default::default() });
    let trials = 10_000u64;
    let seed = 55;
    let (a1, a2) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let msg = NoiseStream::new(seed, t, Substream::Message).uniform_index(4);
            let mut noise = SessionNoise::seeded(seed, t);
            let tr = scheme.run_session(msg, &mut noise, &exact).unwrap();
            let mut rng = NoiseStream::new(seed, t, Substream::Decoder);
            let d1 = mix1.decode(&scheme, &tr.y_prime, &tr.y_double_prime, &mut rng).unwrap();
            let mut rng = NoiseStream::new(seed, t, Substream::Decoder);
            let d2 = mix2.decode(&scheme, &tr.y_prime, &tr.y_double_prime, &mut rng).unwrap();
            (u64::from(d1 == tr.decision), u64::from(d2 == tr.decision))
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let (f1, f2) = (a1 as f64 / trials as f64, a2 as f64 / trials as f64);
    Outcome::new(
        f1 >= 0.99 && f2 >= f1,
        format!("agreement with the quadrature oracle: 4096 samples {:.2}%, 8192 samples {:.2}%", 100.0 * f1, 100.0 * f2),
    )
}

fn criterion_6() -> Outcome {
    let params = ChannelParams { a: 1.5, n: 16, m: 4, sigma: 0.1, beta: 0.5, tau2: 0.15, tau3: 0.05 };
    let run = |scheme| {
        run_trials(&RunConfig { params, scheme, trials: 1_000_000, seed: 606, ..Default::default() }).unwrap()
    };
    let fb = run(Scheme::FeedbackOneSwitch);
    let base = run(Scheme::BaselineNoFeedback);
    let (f, b) = (&fb.row, &base.row);
    Outcome::new(
        f.ci_high < b.ci_low,
        format!(
            "feedback p_hat {:.3e} [{:.3e}, {:.3e}] vs baseline {:.3e} [{:.3e}, {:.3e}]",
            f.p_hat, f.ci_low, f.ci_high, b.p_hat, b.ci_low, b.ci_high
        ),
    )
}

fn criterion_7() -> Outcome {
    let params = ChannelParams { a: 1.5, n: 16, m: 4, sigma: 0.0, ..Default::default() };
    let scheme = OneSwitchScheme::new(params).unwrap();
    let exact = ExactDecoder::from_config(&MixtureConfig::default()).unwrap();
    let mix = MixtureDecoder::new(MixtureConfig::default());
    let trials = 10_000u64;
    let (mut same_rank, mut same_decision, mut binary) = (0u64, 0u64, 0u64);
    for t in 0..trials {
        let msg = NoiseStream::new(7, t, Substream::Message).uniform_index(4);
        let mut noise = SessionNoise::seeded(7, t);
        let tr = scheme.run_session(msg, &mut noise, &mix).unwrap();
        let tx = rank(scheme.phase1(), &tr.z_prime).unwrap();
        let rx = rank(scheme.phase1(), &tr.y_prime).unwrap();
        same_rank += u64::from(tx.order == rx.order);
        let mut rng = NoiseStream::new(7, t, Substream::Decoder);
        let d = exact.decode(&scheme, &tr.y_prime, &tr.y_double_prime, &mut rng).unwrap();
        same_decision += u64::from(d == tr.decision);
        let mut all_binary = true;
        for other in (0..4).filter(|&j| j != msg) {
            let w = group_weights(&scheme, &tr.y_prime, msg, other, 64, &mut rng).unwrap();
            all_binary &= [w.p0, w.p2, w.p3, w.p4].iter().all(|&p| p == 0.0 || p == 1.0);
        }
        binary += u64::from(all_binary);
    }
    Outcome::new(
        same_rank == trials && same_decision == trials && binary == trials,
        format!(
            "{trials} trials: rankings coincide {same_rank}, decisions equal {same_decision}, 0/1 weights {binary}"
        ),
    )
}

fn record(name: &str, result: Result<(), String>, failures: &mut Vec<String>) {
    if let Err(e) = result {
        failures.push(format!("{name}: {e}"));
    }
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn selection_case() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    (2usize..=7).prop_flat_map(|m| (prop::collection::vec(-3.0f64..3.0, m), 0.0f64..1.0, 0.0f64..1.0))
}

fn scheme_for(m: usize, tau2: f64, tau3: f64) -> OneSwitchScheme {
    OneSwitchScheme::new(ChannelParams { m, n: 16, a: 1.5, tau2, tau3, ..Default::default() }).unwrap()
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();

    let r = run(2000, selection_case(), |(u, tau2, tau3)| {
        let m = u.len();
        let s = scheme_for(m, tau2, tau3);
        let mut obs = vec![0.0; 8];
        obs[..m].copy_from_slice(&u);
        let sel = s.select(&obs);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
        prop_assert!(sel.k() >= 2 && sel.k() <= m.min(4));
        prop_assert_eq!(sel.members(), &order[..sel.k()]);
        let g = |i: usize| u[order[i]] - u[order[i + 1]];
        let expect = if m == 2 || g(1) >= s.t2() {
            2
        } else if m == 3 || g(2) >= s.t3() {
            3
        } else {
            4
        };
        prop_assert_eq!(sel.k(), expect);
        if sel.k() == 2 {
            prop_assert_eq!(scheme_for(m, tau2 * 0.5, tau3).select(&obs).k(), 2);
        }
        if sel.k() <= 3 {
            prop_assert!(scheme_for(m, tau2, tau3 * 0.5).select(&obs).k() <= 3);
        }
        let near = |gap: f64, t: f64| (gap - t).abs() < 1e-9;
        if !(m > 2 && near(g(1), s.t2())) && !(m > 3 && near(g(2), s.t3())) {
            let by_distance = select_group(&rank(s.phase1(), &obs).unwrap(), s.params().a1(), tau2, tau3);
            prop_assert_eq!(by_distance, sel);
        }
        Ok(())
    });
    record("selection rule", r, &mut failures);

    let r = run(500, (prop::collection::vec(-4.0f64..4.0, 8), 0.01f64..1.0, 0usize..4, 1usize..4, any::<u64>()), |(y1, sigma, a, off, seed)| {
        let s = OneSwitchScheme::new(ChannelParams { sigma, ..Default::default() }).unwrap();
        let b = (a + off) % 4;
        let mut rng = NoiseStream::new(seed, 0, Substream::Decoder);
        let w = group_weights(&s, &y1, a, b, 200, &mut rng).unwrap();
        prop_assert!((w.total() - 1.0).abs() < 1e-12);
        prop_assert!([w.p0, w.p2, w.p3, w.p4].iter().all(|&p| (0.0..=1.0).contains(&p)));
        Ok(())
    });
    record("sampled pair weights", r, &mut failures);

    let oracle = ExactDecoder::new(8).unwrap();
    let r = run(50, (prop::collection::vec(-3.0f64..3.0, 8), 0.05f64..1.5), |(y1, sigma)| {
        let s = OneSwitchScheme::new(ChannelParams { sigma, ..Default::default() }).unwrap();
        let total: f64 = oracle.event_probabilities(&s, &y1).unwrap().iter().map(|e| e.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-6, "total {}", total);
        Ok(())
    });
    record("oracle event probabilities", r, &mut failures);

    let mut tail_bad = 0;
    for i in 0..=1000 {
        let z = -5.0 + 0.01 * i as f64;
        if tail_bound(z) < q(z) {
            tail_bad += 1;
        }
    }
    if tail_bad > 0 {
        failures.push(format!("tail bound below the Gaussian tail at {tail_bad} points"));
    }

    let params = (1.0f64..8.0, 0.0f64..1.0, 0.1f64..2.0, 0.0f64..0.3, 0.0f64..0.3, 2usize..=7, prop::sample::select(vec![16usize, 18, 20, 24]));
    let r = run(400, (params, any::<u64>(), any::<usize>()), |((a, sigma, beta, tau2, tau3, m, n), seed, msg)| {
        let p = ChannelParams { a, sigma, beta, tau2, tau3, m, n };
        let mut noise = SessionNoise::seeded(seed, 0);
        let t = OneSwitchScheme::new(p).unwrap().run_session(msg % m, &mut noise, &MixtureDecoder::new(MixtureConfig { num_samples: 16, ..Default::default() })).unwrap();
        let total = p.total_energy();
        prop_assert!((t.energy() - total).abs() <= 1e-9 * total, "energy {} vs {}", t.energy(), total);
        let e1: f64 = t.x[..p.n1()].iter().map(|v| v * v).sum();
        prop_assert!((e1 - p.a1()).abs() <= 1e-9 * total);
        let b = BaselineScheme::new(p).unwrap().run(msg % m, &mut SessionNoise::seeded(seed, 1)).unwrap();
        prop_assert!((b.energy() - total).abs() <= 1e-9 * total);
        Ok(())
    });
    record("energy audit", r, &mut failures);

    let detail = if failures.is_empty() {
        "selection rule, pair weights, oracle probabilities, tail bound (1001 points), energy audit".to_string()
    } else {
        failures.join("; ")
    };
    Outcome::new(failures.is_empty(), detail)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("code geometry", criterion_1),
        ("exponent assembly", criterion_2),
        ("infimum dominance", criterion_3),
        ("baseline calibration", criterion_4),
        ("decoder oracle equivalence", criterion_5),
        ("feedback benefit", criterion_6),
        ("degenerate reductions", criterion_7),
        ("invariant suites", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|s| s == &id || name.contains(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{verdict} [{id}] {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
