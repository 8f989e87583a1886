use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vote_walk::model::{full_report, EnvironmentParams, GroupSpec, VotingRule};
use vote_walk::optimize::{
    objective_value, optimal_t2, solve_society_system, stationarity_check, t2_plus, t2_society,
    Objective,
};

const AND: VotingRule = VotingRule::UnanimousAcceptance;
const OR: VotingRule = VotingRule::UnanimousRejection;

struct Draw {
    env: EnvironmentParams,
    g1: GroupSpec,
    g2_size: u64,
}

fn draw(rng: &mut ChaCha8Rng) -> Draw {
    Draw {
        env: EnvironmentParams::new(rng.gen_range(-2.0..2.0), rng.gen_range(1.0..20.0)).unwrap(),
        g1: GroupSpec::new(rng.gen_range(1..=1000), rng.gen_range(-3.0..3.0)).unwrap(),
        g2_size: rng.gen_range(1..=1000),
    }
}

#[test]
fn optima_have_opposite_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10_000 {
        let d = draw(&mut rng);
        for rule in [AND, OR] {
            let plus = t2_plus(d.env, d.g1, d.g2_size, rule).unwrap().threshold;
            let zero = t2_society(d.env, d.g1, d.g2_size, rule).unwrap().threshold;
            assert!(plus * zero <= 0.0);
            assert_eq!(plus == 0.0, zero == 0.0);
        }
    }
}

#[test]
fn closed_form_optima_are_stationary() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..500 {
        let d = draw(&mut rng);
        let g2 = GroupSpec::new(d.g2_size, 0.0).unwrap();
        for rule in [AND, OR] {
            for objective in [Objective::GroupAdvantage, Objective::SocietyTotal] {
                let opt = optimal_t2(d.env, d.g1, d.g2_size, rule, objective).unwrap();
                let at = objective_value(
                    d.env,
                    d.g1,
                    g2.with_threshold(opt.threshold).unwrap(),
                    rule,
                    objective,
                )
                .unwrap();
                assert!((at - opt.objective_value).abs() <= 1e-10);
                let slope =
                    stationarity_check(d.env, d.g1, g2, rule, objective, opt.threshold).unwrap();
                assert!(
                    slope.abs() <= 1e-6 * (1.0 + opt.objective_value.abs()),
                    "{rule} {objective} slope {slope}"
                );
            }
        }
    }
}

#[test]
fn max_advantage_fades_as_group_one_withdraws() {
    let env = EnvironmentParams::new(0.5, 10.0).unwrap();
    let best = |t1: f64, rule| {
        t2_plus(env, GroupSpec::new(200, t1).unwrap(), 300, rule)
            .unwrap()
            .objective_value
    };

    // G1∧G2: non-increasing in t1, vanishing as t1 → ∞
    let mut prev = f64::INFINITY;
    for k in 0..=200 {
        let t1 = -10.0 + 0.1 * k as f64;
        let v = best(t1, AND);
        assert!(v <= prev + 1e-15, "t1={t1}");
        assert!(v >= 0.0);
        prev = v;
    }
    assert!(best(10.0, AND) < 1e-12);

    // G1∨G2: vanishing as t1 → −∞
    let mut prev = f64::INFINITY;
    for k in 0..=200 {
        let t1 = 10.0 - 0.1 * k as f64;
        let v = best(t1, OR);
        assert!(v <= prev + 1e-15, "t1={t1}");
        prev = v;
    }
    assert!(best(-10.0, OR) < 1e-12);
}

fn society(env: EnvironmentParams, n: [u64; 2], rule: VotingRule, t1: f64, t2: f64) -> f64 {
    full_report(
        env,
        GroupSpec::new(n[0], t1).unwrap(),
        GroupSpec::new(n[1], t2).unwrap(),
        rule,
    )
    .unwrap()
    .society
}

#[test]
fn system_solution_is_local_maximum() {
    let cases = [
        (0.0, 10.0, [300, 300]),
        (0.2, 10.0, [100, 500]),
        (-1.5, 4.0, [20, 35]),
        (0.3, 2.0, [1, 7]),
    ];
    for (mu, sigma, n) in cases {
        let env = EnvironmentParams::new(mu, sigma).unwrap();
        for rule in [AND, OR] {
            let s = solve_society_system(env, n[0], n[1], rule).unwrap();
            assert!(s.residual <= 1e-10);
            let f = |a: f64, b: f64| society(env, n, rule, a, b);
            assert!((f(s.t1, s.t2) - s.society_value).abs() <= 1e-10);
            let h = 1e-3;
            let f0 = f(s.t1, s.t2);
            let e = 1e-6;
            let gx = (f(s.t1 + e, s.t2) - f(s.t1 - e, s.t2)) / (2.0 * e);
            let gy = (f(s.t1, s.t2 + e) - f(s.t1, s.t2 - e)) / (2.0 * e);
            let hxx = (f(s.t1 + h, s.t2) - 2.0 * f0 + f(s.t1 - h, s.t2)) / (h * h);
            let hyy = (f(s.t1, s.t2 + h) - 2.0 * f0 + f(s.t1, s.t2 - h)) / (h * h);
            let hxy = (f(s.t1 + h, s.t2 + h) - f(s.t1 + h, s.t2 - h) - f(s.t1 - h, s.t2 + h)
                + f(s.t1 - h, s.t2 - h))
                / (4.0 * h * h);
            let slack = 1e-6 * (1.0 + f0.abs());
            assert!(
                gx.abs() <= slack && gy.abs() <= slack,
                "mu={mu} {rule}: gradient {gx} {gy}"
            );
            let trace = hxx + hyy;
            let det = hxx * hyy - hxy * hxy;
            let top = 0.5 * trace + (0.25 * trace * trace - det).max(0.0).sqrt();
            assert!(
                top < -1e-4,
                "mu={mu} {rule}: Hessian not negative definite ({hxx}, {hxy}, {hyy})"
            );
        }
    }
}

#[test]
fn system_covers_extreme_environments() {
    for &mu in &[-40.0, -25.0, -5.0, 5.0, 25.0, 40.0] {
        let env = EnvironmentParams::new(mu, 10.0).unwrap();
        for (n1, n2) in [(300, 300), (50, 800), (1, 1)] {
            for rule in [AND, OR] {
                let s = solve_society_system(env, n1, n2, rule).unwrap();
                assert!(
                    s.residual <= 1e-10,
                    "mu={mu} {n1}/{n2} {rule}: residual {}",
                    s.residual
                );
                assert!(s.t1.is_finite() && s.t2.is_finite());
            }
        }
    }
}
