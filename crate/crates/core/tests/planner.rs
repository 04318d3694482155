mod common;

use common::{run_checked, task, InvariantWatch};
use tlrrt::bench::Mode;
use tlrrt::bias::BiasParams;
use tlrrt::product::{plan_cost, verify_plan, PlanFile};
use tlrrt::rrt::RrtParams;
use tlrrt::scenario;

fn params(n: usize, eta: f64, stop: bool) -> RrtParams {
    RrtParams {
        n_max_pre: n,
        n_max_suf: n,
        eta,
        stop_at_first: stop,
        ..RrtParams::default()
    }
}

#[test]
fn case1_plans_are_sound_in_both_modes() {
    let t = task(&scenario::case1(0.15));
    for (mode, seed) in [(Mode::Unbiased, 1), (Mode::Biased, 2), (Mode::Biased, 3)] {
        let mut w = InvariantWatch::new(&t.ws, &t.pruned);
        let c = run_checked(&t, mode, &params(1000, 0.25, false), &BiasParams::default(), seed, Some(&mut w));
        let plan = c.report.plan.as_ref().expect("case1 plan");
        assert!(c.verified && c.satisfies, "{mode:?} seed {seed}");
        assert!(w.checks > 0 && w.violations.is_empty(), "{:?}", w.violations);
        assert!((plan_cost(plan, 0.2) - plan.cost).abs() < 1e-9);
    }
}

#[test]
fn case2_plans_are_sound_in_both_modes() {
    let t = task(&scenario::case2(0.25));
    for mode in [Mode::Unbiased, Mode::Biased] {
        let mut w = InvariantWatch::new(&t.ws, &t.pruned);
        let c = run_checked(&t, mode, &params(4000, 0.5, true), &BiasParams::default(), 5, Some(&mut w));
        assert!(c.report.plan.is_some(), "{mode:?}");
        assert!(c.sound());
        assert!(w.violations.is_empty(), "{:?}", w.violations);
    }
}

#[test]
fn scatter_plans_are_sound() {
    let mut found = 0;
    for seed in 0..4 {
        let t = task(&scenario::scatter(2, 1, 4, 0.15));
        let mut w = InvariantWatch::new(&t.ws, &t.pruned);
        let c = run_checked(&t, Mode::Biased, &params(1000, 0.5, true), &BiasParams::default(), seed, Some(&mut w));
        assert!(c.sound(), "seed {seed}");
        assert!(w.violations.is_empty(), "{:?}", w.violations);
        found += c.report.plan.is_some() as usize;
    }
    assert!(found > 0);
}

#[test]
fn same_seed_same_plan_file() {
    let t = task(&scenario::case2(0.25));
    let p = params(2000, 0.5, true);
    for mode in [Mode::Unbiased, Mode::Biased] {
        let run = || {
            let r = tlrrt::bench::plan_with(mode, &t.ws, &t.pruned, &t.start, &p, &BiasParams::default(), 9, None).unwrap();
            PlanFile {
                seed: 9,
                params: serde_json::to_value(&p).unwrap(),
                plan: r.plan,
            }
            .to_json()
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn plan_file_round_trip_still_verifies() {
    let t = task(&scenario::case1(0.15));
    let r = tlrrt::bench::plan_with(Mode::Biased, &t.ws, &t.pruned, &t.start, &params(600, 0.25, false), &BiasParams::default(), 4, None).unwrap();
    let f = PlanFile {
        seed: 4,
        params: serde_json::Value::Null,
        plan: r.plan,
    };
    let back = PlanFile::from_json(&f.to_json()).unwrap();
    assert_eq!(back, f);
    verify_plan(back.plan.as_ref().unwrap(), &t.nba, &t.ws).unwrap();
}

#[test]
fn corrupted_plans_are_rejected() {
    let t = task(&scenario::case1(0.15));
    let r = tlrrt::bench::plan_with(Mode::Biased, &t.ws, &t.pruned, &t.start, &params(600, 0.25, false), &BiasParams::default(), 4, None).unwrap();
    let plan = r.plan.unwrap();
    let mut bad = plan.clone();
    // Inside the first obstacle.
    bad.prefix[1][0] = tlrrt::geometry::Point::new(0.38, 0.45);
    assert_eq!(verify_plan(&bad, &t.nba, &t.ws).unwrap_err().kind(), "segment not free");
    let mut short = plan.clone();
    short.prefix.truncate(1);
    short.prefix_q.truncate(1);
    assert!(verify_plan(&short, &t.nba, &t.ws).is_err());
    assert!(!common::plan_satisfies(&t.ws, &t.formula, &short));
}
