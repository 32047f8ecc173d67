//! Property tests over randomly drawn small scenarios.

use coustic::allocation::{feasibility_check, greedy_allocate};
use coustic::density::{rank, DensityVariant};
use coustic::economics::{settle, truthfulness_probe, CostModel};
use coustic::mechanism::{run_cda, Mechanism, MechanismConfig};
use coustic::model::{load_scenario, save_scenario, DeviceBid, Scenario, TaskBid, EPS};
use coustic::oracle::{exhaustive_welfare, welfare, OracleLimits};
use proptest::prelude::*;

#[derive(Debug, Clone, Copy)]
struct Shape {
    max_tasks: usize,
    max_devices: usize,
    max_types: usize,
    max_capacity: u32,
    valuation: (f64, f64),
    cost: (f64, f64),
}

const GENERAL: Shape = Shape {
    max_tasks: 6,
    max_devices: 6,
    max_types: 3,
    max_capacity: 5,
    valuation: (1.0, 30.0),
    cost: (0.1, 5.0),
};

/// Valuations far above any possible total cost, so budgets never bind.
const RICH: Shape = Shape {
    valuation: (100.0, 200.0),
    cost: (0.1, 1.0),
    ..GENERAL
};

const TINY: Shape = Shape {
    max_tasks: 4,
    max_devices: 4,
    max_types: 3,
    max_capacity: 3,
    valuation: (1.0, 30.0),
    cost: (0.1, 8.0),
};

fn scenario(shape: Shape) -> impl Strategy<Value = Scenario> {
    (
        1..=shape.max_tasks,
        1..=shape.max_devices,
        1..=shape.max_types,
        0.0..0.05f64,
        0.0..0.5f64,
    )
        .prop_flat_map(move |(m, n, k, alpha, beta)| {
            let quantities = prop::collection::vec(0.0..20.0f64, k).prop_map(|mut v| {
                // keep at least one positive component
                v[0] += 1.0;
                v
            });
            let tasks = prop::collection::vec(
                (quantities.clone(), shape.valuation.0..shape.valuation.1),
                m,
            );
            let devices = prop::collection::vec(
                (
                    quantities,
                    1..=shape.max_capacity,
                    shape.cost.0..shape.cost.1,
                ),
                n,
            );
            (tasks, devices).prop_map(move |(tasks, devices)| Scenario {
                resource_types: k,
                alpha,
                beta,
                tasks: tasks
                    .into_iter()
                    .enumerate()
                    .map(|(i, (demand, valuation))| TaskBid {
                        id: format!("T{i}"),
                        demand,
                        valuation,
                    })
                    .collect(),
                devices: devices
                    .into_iter()
                    .enumerate()
                    .map(|(j, (supply, capacity, cost))| DeviceBid {
                        id: format!("D{j}"),
                        supply,
                        capacity,
                        cost,
                    })
                    .collect(),
            })
        })
}

fn power_of_two() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.25, 0.5, 2.0, 4.0, 8.0])
}

fn task_orders(s: &Scenario) -> (Vec<usize>, Vec<usize>) {
    let r = rank(s, DensityVariant::Table).unwrap();
    (r.task_order, r.device_order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn save_load_round_trip(s in scenario(GENERAL)) {
        let text = save_scenario(&s).unwrap();
        prop_assert_eq!(load_scenario(&text).unwrap(), s);
    }

    #[test]
    fn ranking_ignores_column_scale(s in scenario(GENERAL), f in power_of_two(), col in 0usize..3) {
        let before = task_orders(&s);
        let col = col % s.resource_types;

        let mut v = s.clone();
        v.tasks.iter_mut().for_each(|t| t.valuation *= f);
        prop_assert_eq!(task_orders(&v), before.clone());

        let mut d = s.clone();
        d.tasks.iter_mut().for_each(|t| t.demand[col] *= f);
        d.devices.iter_mut().for_each(|x| x.supply[col] *= f);
        prop_assert_eq!(task_orders(&d), before.clone());

        let mut c = s.clone();
        c.devices.iter_mut().for_each(|x| x.cost *= f);
        prop_assert_eq!(task_orders(&c), before);
    }

    #[test]
    fn densities_are_bounded(s in scenario(GENERAL)) {
        for variant in [DensityVariant::Table] {
            let r = rank(&s, variant).unwrap();
            let bound = ((s.resource_types + 1) as f64).sqrt() + EPS;
            for &d in r.task_density.iter().chain(&r.device_density) {
                prop_assert!(d > 0.0 && d <= bound);
            }
            for w in r.task_order.windows(2) {
                prop_assert!(r.task_density[w[0]] >= r.task_density[w[1]]);
            }
            for w in r.device_order.windows(2) {
                prop_assert!(r.device_density[w[0]] <= r.device_density[w[1]]);
            }
        }
    }

    #[test]
    fn raising_valuation_never_moves_task_later(
        s in scenario(GENERAL), pick in 0usize..6, f in 1.0..3.0f64,
    ) {
        let i = pick % s.num_tasks();
        let pos = |s: &Scenario| task_orders(s).0.iter().position(|&x| x == i).unwrap();
        let before = pos(&s);
        let mut up = s.clone();
        up.tasks[i].valuation *= f;
        prop_assert!(pos(&up) <= before);
    }

    #[test]
    fn raising_cost_never_moves_device_earlier(
        s in scenario(GENERAL), pick in 0usize..6, f in 1.0..3.0f64,
    ) {
        let j = pick % s.num_devices();
        let pos = |s: &Scenario| task_orders(s).1.iter().position(|&x| x == j).unwrap();
        let before = pos(&s);
        let mut up = s.clone();
        up.devices[j].cost *= f;
        prop_assert!(pos(&up) >= before);
    }

    #[test]
    fn greedy_is_feasible_budget_safe_and_deterministic(s in scenario(GENERAL)) {
        for cost_model in [CostModel::Units, CostModel::Fanout] {
            let r = rank(&s, DensityVariant::Table).unwrap();
            let (x, trace) = greedy_allocate(&s, &r, cost_model);
            prop_assert!(feasibility_check(&s, &x).is_ok());
            prop_assert!(trace.pair_visits <= s.num_tasks() * s.num_devices());
            for i in x.winning_tasks() {
                let t = &s.tasks[i];
                let spent: f64 = x.row(i).map(|j| s.devices[j].cost).sum();
                let e = cost_model.cost(t, x.row_sum(i), s.alpha, s.beta);
                prop_assert!(spent <= t.valuation - e + EPS);
            }
            let (again, trace2) = greedy_allocate(&s, &r, cost_model);
            prop_assert_eq!(&again, &x);
            prop_assert_eq!(trace2, trace);
        }
    }

    #[test]
    fn midpoint_pricing_conserves_money(s in scenario(GENERAL)) {
        let o = run_cda(&s, &MechanismConfig::default()).unwrap().outcome;
        prop_assert!(o.auctioneer_surplus.abs() <= 1e-9);
        for (i, j) in o.allocation.pairs() {
            let floor = s.devices[j].cost / s.devices[j].bundle_units();
            prop_assert!(o.prices.get(i, j) >= floor - EPS);
        }
        for j in 0..s.num_devices() {
            let sold = o.allocation.column_sum(j) as f64;
            prop_assert!(o.seller_revenues[j] >= sold * s.devices[j].cost - 1e-9);
            prop_assert!(o.seller_utilities[j] >= -1e-9);
        }
        let m = o.metrics;
        prop_assert!((m.average_utility * (s.num_tasks() + s.num_devices()) as f64
            - m.total_utility).abs() <= 1e-9);
    }

    #[test]
    fn other_mechanisms_balance_budget(s in scenario(GENERAL), seed in any::<u64>()) {
        let cfg = MechanismConfig { seed, ..MechanismConfig::default() };
        for mech in [Mechanism::Da, Mechanism::Random, Mechanism::Matching] {
            let o = mech.outcome(&s, &cfg).unwrap();
            prop_assert!(o.auctioneer_surplus >= -EPS);
        }
        let o = Mechanism::Random.outcome(&s, &cfg).unwrap();
        prop_assert!(feasibility_check(&s, &o.allocation).is_ok());
    }

    #[test]
    fn identity_misreport_is_noop(s in scenario(GENERAL), pick in 0usize..12) {
        let ids: Vec<String> = s.tasks.iter().map(|t| t.id.clone())
            .chain(s.devices.iter().map(|d| d.id.clone())).collect();
        let agent = &ids[pick % ids.len()];
        let cfg = MechanismConfig::default();
        let p = truthfulness_probe(&s, agent, &[1.0], Mechanism::Cda, &cfg).unwrap();
        prop_assert_eq!(p[0].truthful_utility, p[0].misreport_utility);
        prop_assert_eq!(p[0].won_truthful, p[0].won_misreport);
    }

    /// With budgets that never bind, a losing task that lowers its bid only
    /// moves later in the order and sees less capacity, so it keeps losing.
    #[test]
    fn losing_buyer_keeps_losing_when_budgets_are_slack(
        s in scenario(RICH), f in prop::sample::select(vec![0.5, 0.75, 0.9]),
    ) {
        let cfg = MechanismConfig::default();
        let base = run_cda(&s, &cfg).unwrap().outcome;
        let vmax = s.tasks.iter().map(|t| t.valuation).fold(0.0, f64::max);
        for i in 0..s.num_tasks() {
            if base.allocation.is_winner(i) || s.tasks[i].valuation >= vmax {
                continue;
            }
            let p = truthfulness_probe(&s, &s.tasks[i].id, &[f], Mechanism::Cda, &cfg).unwrap();
            prop_assert!(!p[0].won_misreport);
            prop_assert_eq!(p[0].misreport_utility, 0.0);
            prop_assert!(!p[0].profitable);
        }
    }

    /// With slack budgets a device nobody used was either never reached with
    /// unmet demand or only taken by tasks that lost anyway; raising its cost
    /// only pushes it later.
    #[test]
    fn idle_seller_stays_idle_when_budgets_are_slack(
        s in scenario(RICH), f in prop::sample::select(vec![1.1, 1.25, 1.5]),
    ) {
        let cfg = MechanismConfig::default();
        let base = run_cda(&s, &cfg).unwrap().outcome;
        for j in 0..s.num_devices() {
            // a new cost maximum would rescale every other device's density
            let others = s.devices.iter().enumerate().filter(|&(k, _)| k != j);
            let cmax = others.map(|(_, d)| d.cost).fold(0.0, f64::max);
            if base.allocation.column_sum(j) > 0 || s.devices[j].cost * f >= cmax {
                continue;
            }
            let p = truthfulness_probe(&s, &s.devices[j].id, &[f], Mechanism::Cda, &cfg).unwrap();
            prop_assert!(!p[0].won_misreport);
            prop_assert!(!p[0].profitable);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_dominates_greedy(s in scenario(TINY)) {
        for cost_model in [CostModel::Units, CostModel::Fanout] {
            let exact = exhaustive_welfare(&s, OracleLimits::default(), cost_model).unwrap();
            prop_assert!(exact.exhausted);
            prop_assert!(feasibility_check(&s, &exact.best_allocation).is_ok());
            prop_assert!(exact.best_welfare >= 0.0);
            let r = rank(&s, DensityVariant::Table).unwrap();
            let (x, _) = greedy_allocate(&s, &r, cost_model);
            prop_assert!(welfare(&s, &x, cost_model) <= exact.best_welfare + 1e-9);
            // price-free welfare equals total utility under shared-matrix pricing
            let o = settle(&s, x, cost_model);
            prop_assert!((o.metrics.total_utility - welfare(&s, &o.allocation, cost_model)).abs() < 1e-9);
        }
    }
}

/// Known gap in loser monotonicity: when the budget binds, a lower bid can
/// make the scan skip an expensive thin device and afford two cheap wide
/// ones, turning a loser into a winner with positive true utility.
#[test]
fn underbidding_loser_can_win_when_budget_binds() {
    let device = |id: &str, supply, cost| DeviceBid {
        id: id.into(),
        supply: vec![supply],
        capacity: 1,
        cost,
    };
    let s = Scenario {
        resource_types: 1,
        alpha: 0.0,
        beta: 0.0,
        tasks: vec![TaskBid {
            id: "T1".into(),
            demand: vec![15.0],
            valuation: 10.0,
        }],
        devices: vec![
            device("X", 1.0, 9.0),
            device("Y", 10.0, 2.0),
            device("Z", 10.0, 2.0),
        ],
    };
    let cfg = MechanismConfig::default();
    let order = rank(&s, DensityVariant::Table).unwrap().device_order;
    assert_eq!(order, vec![0, 1, 2]);

    let p = truthfulness_probe(&s, "T1", &[0.9], Mechanism::Cda, &cfg).unwrap();
    assert!(!p[0].won_truthful);
    assert!(p[0].won_misreport);
    // 20 units at (9/20 + 2/10) / 2 each
    assert!((p[0].misreport_utility - (10.0 - 6.5)).abs() < 1e-9);
    assert!(p[0].profitable);
}

/// Same gap on the seller side: an idle device taken by a task that later
/// rolled back raises its cost, the task skips a mid-priced device and now
/// reaches a cheap wide one with budget left.
#[test]
fn overbidding_idle_seller_can_trade_when_budget_binds() {
    let device = |id: &str, supply, cost| DeviceBid {
        id: id.into(),
        supply: vec![supply],
        capacity: 1,
        cost,
    };
    let s = Scenario {
        resource_types: 1,
        alpha: 0.0,
        beta: 0.0,
        tasks: vec![TaskBid {
            id: "T1".into(),
            demand: vec![15.0],
            valuation: 2.0,
        }],
        devices: vec![
            device("A", 1.0, 0.9),
            device("C", 10.0, 1.05),
            device("E", 15.0, 0.1),
            device("M", 1.0, 5.0),
        ],
    };
    let cfg = MechanismConfig::default();
    assert_eq!(
        rank(&s, DensityVariant::Table).unwrap().device_order,
        vec![0, 1, 2, 3]
    );

    let p = truthfulness_probe(&s, "A", &[1.25], Mechanism::Cda, &cfg).unwrap();
    assert!(!p[0].won_truthful);
    assert!(p[0].won_misreport);
    // price clamps to the reported 1.125 per unit on one unit
    assert!((p[0].misreport_utility - (1.125 - 0.9)).abs() < 1e-9);
    assert!(p[0].profitable);
}
