//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its verdict line whether it passes or not; exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relay_aloha::analytic::{
    ancillary_h, check_consistency, consistency_grid, end_to_end_closed_form, end_to_end_series,
    end_to_end_zero_erasure_limit, optimal_load, uplink_throughput, Method, SystemConfig,
};
use relay_aloha::config::ModelConfig;
use relay_aloha::numerics::{gamma_p_series, gamma_q_continued_fraction, ks_statistic};
use relay_aloha::rf::RfChannelParams;
use relay_aloha::sim::{simulate, simulate_serial, SimConfig};
use relay_aloha::sweep::{emit_csv, reference_trends, run_sweep, Engines, SweepParam, SweepSpec, TrendStatus};
use relay_aloha::vlc::{VlcChannel, VlcChannelParams, VlcSnrModel, VlcSnrParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_series_vs_closed_form() -> Outcome {
    let r = check_consistency(&consistency_grid(), 1e-12).unwrap();
    outcome(
        r.max_abs_diff <= 1e-9 && r.points == 864,
        format!("{} points, {} fallbacks, max |diff| {:.2e}", r.points, r.fallbacks, r.max_abs_diff),
    )
}

fn c2_classical_limit() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=1000 {
        let g = i as f64 / 100.0;
        let cfg = SystemConfig::new(g, 1, 1.0, 0.0, 0.0).unwrap();
        let exact = g * (-g).exp();
        worst = worst
            .max((end_to_end_closed_form(&cfg).unwrap().value - exact).abs())
            .max((end_to_end_series(&cfg, 1e-14).unwrap().value - exact).abs());
    }
    let opt = optimal_load(&SystemConfig::new(1.0, 1, 1.0, 0.0, 0.0).unwrap(), 0.0, 10.0).unwrap();
    let peak_err = (opt.s_max - (-1f64).exp()).abs();
    outcome(
        worst <= 1e-12 && (opt.g_opt - 1.0).abs() < 1e-4 && peak_err <= 1e-12,
        format!("max |S - G e^-G| {worst:.2e}, G_opt {:.8}, S_max {:.9}", opt.g_opt, opt.s_max),
    )
}

fn c3_simulation_vs_analysis() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rf = RfChannelParams::new(2.0, 10.0).unwrap();
    let (mut e2e_ok, mut up_ok) = (0, 0);
    let mut worst_z: f64 = 0.0;
    for i in 0..20 {
        let cfg = SystemConfig::new(
            rng.random_range(0.1..=8.0),
            rng.random_range(1..=6),
            rng.random_range(0.3..=1.0),
            rng.random_range(0.05..0.95),
            rng.random_range(0.0..0.9),
        )
        .unwrap();
        let report = simulate(&SimConfig::iid(cfg, rf, 1_000_000, 1000 + i)).unwrap();
        let z = report.end_to_end.z_score(end_to_end_closed_form(&cfg).unwrap().value);
        worst_z = worst_z.max(z);
        e2e_ok += usize::from(z < 3.0);
        up_ok += usize::from(report.uplink.z_score(uplink_throughput(cfg.load_g, cfg.eps_vlc)) < 3.0);
    }
    outcome(
        e2e_ok >= 19 && up_ok >= 19,
        format!("end-to-end within 3 sigma {e2e_ok}/20 (max z {worst_z:.2}), uplink {up_ok}/20"),
    )
}

fn c4_vlc_distribution() -> Outcome {
    let channel = VlcChannel::new(VlcChannelParams::reference_optics(45f64.to_radians(), 2.5)).unwrap();
    let model = VlcSnrModel::new(channel, VlcSnrParams::reference_receiver(1.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut xs: Vec<f64> = (0..100_000).map(|_| model.sample_user_snr(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let d = ks_statistic(&xs, |g| model.cdf(g).unwrap());
    outcome(d < 0.01, format!("KS {d:.5} at 1e5 draws"))
}

fn c5_nakagami() -> Outcome {
    let rayleigh = RfChannelParams::new(1.0, 10.0).unwrap();
    let cdf_err = (rayleigh.cdf(10.0).unwrap() - (1.0 - (-1f64).exp())).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ks: f64 = 0.0;
    for m1 in [0.5, 1.0, 2.0, 3.5] {
        let rf = RfChannelParams::new(m1, 10.0).unwrap();
        let mut xs: Vec<f64> = (0..100_000).map(|_| rf.sample_snr(&mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        worst_ks = worst_ks.max(ks_statistic(&xs, |g| rf.cdf(g).unwrap()));
    }
    // series for P, continued fraction for Q: two independent routes, drawn
    // where the continued fraction is defined (x >= a)
    let mut worst_sum: f64 = 0.0;
    for _ in 0..2000 {
        let a = rng.random_range(0.1..20.0);
        let x = a + rng.random_range(0.0..40.0);
        let p = gamma_p_series(a, x).unwrap();
        let q = gamma_q_continued_fraction(a, x).unwrap();
        worst_sum = worst_sum.max((p + q - 1.0).abs());
    }
    outcome(
        cdf_err <= 1e-10 && worst_ks < 0.01 && worst_sum <= 1e-10,
        format!("CDF err {cdf_err:.1e}, max KS {worst_ks:.5}, max |P+Q-1| {worst_sum:.1e}"),
    )
}

fn c6_h_fixtures() -> Outcome {
    let e = std::f64::consts::E;
    let e1 = (ancillary_h(1, 1.0) - e).abs();
    let e2 = (ancillary_h(2, 1.0) - 2.0 * e).abs();
    let zeros = (1..=20).all(|m| ancillary_h(m, 0.0) == 0.0);
    outcome(
        e1 <= 1e-12 && e2 <= 1e-12 && zeros,
        format!("|H1(1)-e| {e1:.1e}, |H2(1)-2e| {e2:.1e}, H_m(0)=0 for m=1..20: {zeros}"),
    )
}

fn c7_trends() -> Outcome {
    let report = reference_trends(&ModelConfig::default()).unwrap();
    let pass = report.verdicts.len() == 4 && report.verdicts.iter().all(|v| v.status == TrendStatus::Pass);
    let summary = report
        .verdicts
        .iter()
        .map(|v| format!("{:?}={:?}", v.id, v.status))
        .collect::<Vec<_>>()
        .join(" ");
    if !pass {
        eprintln!("{report}");
    }
    outcome(pass, summary)
}

fn c8_zero_erasure_limit() -> Outcome {
    // pinned at G = 0.5, delta = 1, eps_rf = 0.3; see the README
    let mut worst: f64 = 0.0;
    let mut worst_engines: f64 = 0.0;
    let mut fallbacks_ok = true;
    for k in 1..=6 {
        let at = |eps: f64| SystemConfig::new(0.5, k, 1.0, eps, 0.3).unwrap();
        let r = end_to_end_closed_form(&at(1e-6)).unwrap();
        worst = worst.max((r.value - end_to_end_zero_erasure_limit(&at(0.0))).abs());
        for eps in [1e-6, 1e-7, 1e-8, 1e-9] {
            let c = end_to_end_closed_form(&at(eps)).unwrap();
            let s = end_to_end_series(&at(eps), 1e-14).unwrap();
            worst_engines = worst_engines.max((c.value - s.value).abs());
            fallbacks_ok &= eps >= 1e-6 || c.method == Method::Fallback;
        }
    }
    // not asserted: away from the pinned point the true slope of S in
    // eps_vlc can push the gap past 1e-6
    let mut unpinned: f64 = 0.0;
    for k in 1..=6 {
        for g in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let at = |eps: f64| SystemConfig::new(g, k, 1.0, eps, 0.0).unwrap();
            let gap = end_to_end_closed_form(&at(1e-6)).unwrap().value - end_to_end_zero_erasure_limit(&at(0.0));
            unpinned = unpinned.max(gap.abs());
        }
    }
    outcome(
        worst < 1e-6 && worst_engines < 1e-12 && fallbacks_ok,
        format!(
            "max |S(1e-6) - S(0)| {worst:.2e}, closed vs series below the floor {worst_engines:.1e}; \
             unpinned worst {unpinned:.2e} (informational)"
        ),
    )
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut base = ModelConfig::default();
    base.sim.slots = 100_000;
    base.sim.seed = 99;
    let spec = SweepSpec {
        param: SweepParam::LoadG,
        values: vec![0.5, 1.0, 2.0, 4.0],
        group: Some((SweepParam::NumRelays, vec![1.0, 3.0])),
        base,
        engines: Engines::ALL,
    };
    let files: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("run{i}.csv"));
            emit_csv(&run_sweep(&spec).unwrap(), &path).unwrap();
            std::fs::read(&path).unwrap()
        })
        .collect();
    let csv_same = files[0] == files[1];

    let bin = env!("CARGO_BIN_EXE_relay-aloha");
    let cli: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            std::process::Command::new(bin)
                .args(["sweep", "--param", "K", "--values", "1,2,4", "--engines", "all", "--slots", "50000", "--seed", "3"])
                .output()
                .unwrap()
                .stdout
        })
        .collect();
    let cli_same = cli[0] == cli[1] && !cli[0].is_empty();

    let sys = SystemConfig::new(1.7, 4, 0.8, 0.4, 0.2).unwrap();
    let sim = SimConfig::iid(sys, RfChannelParams::new(2.0, 10.0).unwrap(), 300_000, 8);
    let par_same = simulate(&sim).unwrap() == simulate_serial(&sim).unwrap();
    outcome(
        csv_same && cli_same && par_same,
        format!("library CSV identical: {csv_same}, CLI CSV identical: {cli_same}, parallel == serial: {par_same}"),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("series/closed-form equivalence", Duration::from_secs(5), c1_series_vs_closed_form),
        ("classical slotted ALOHA limit", Duration::from_secs(1), c2_classical_limit),
        ("simulation vs analysis", Duration::from_secs(120), c3_simulation_vs_analysis),
        ("optical SNR distribution", Duration::from_secs(5), c4_vlc_distribution),
        ("Nakagami kernel", Duration::from_secs(10), c5_nakagami),
        ("H_m fixtures", Duration::from_secs(1), c6_h_fixtures),
        ("trend reproduction", Duration::from_secs(30), c7_trends),
        ("zero optical erasure limit", Duration::from_secs(1), c8_zero_erasure_limit),
        ("determinism", Duration::from_secs(60), c9_determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check);
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        failures += usize::from(!pass);
        println!(
            "criterion {} {}: {name} [{detail}] ({:.2} s, budget {} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
