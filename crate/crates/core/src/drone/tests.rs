use super::*;
use crate::belief::BeliefParams;
use crate::heli::HeliPolicyParams;
use crate::region::{FuelParams, WindModelParams};
use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(w: usize, h: usize) -> RegionGrid {
    RegionGrid::uniform(w, h, 30.0, FuelParams::default(), ZoneId(0)).unwrap()
}

fn state(pos: ZoneId, battery_min: f64, belief: BeliefState) -> DroneState {
    DroneState {
        position: pos,
        battery_min,
        wind: WindState::calm(),
        belief,
    }
}

const WIND: WindModelParams = WindModelParams {
    mu_u: 0.0,
    sigma_u: 0.3,
    sigma_phi: 0.2,
};

fn model<'a>(
    g: &'a RegionGrid,
    reach: &'a ReachGraph,
    bp: &'a BeliefParams,
    hp: &'a HeliPolicyParams,
) -> LookaheadModel<'a> {
    LookaheadModel {
        grid: g,
        reach,
        belief: bp,
        heli: hp,
        wind: &WIND,
        c_fail: 1e4,
    }
}

/// Every path of `horizon` moves from `start`.
fn all_paths(reach: &ReachGraph, g: &RegionGrid, start: ZoneId, horizon: usize) -> Vec<Vec<ZoneId>> {
    let mut paths = vec![Vec::new()];
    for _ in 0..horizon {
        let mut next = Vec::new();
        for p in &paths {
            let from = p.last().copied().unwrap_or(start);
            for z in reach.reach(g, from) {
                let mut q = p.clone();
                q.push(z);
                next.push(q);
            }
        }
        paths = next;
    }
    paths
}

#[test]
fn return_home_trigger() {
    let g = grid(40, 1);
    let far = ZoneId(36);
    assert_abs_diff_eq!(g.distance(far, ZoneId(0)), 1080.0);
    let b = BeliefState::healthy(vec![0.0; 40]);
    assert!(!pfa_return_home(&state(far, 40.0, b.clone()), 360.0, 10.0, &g));
    assert!(pfa_return_home(&state(far, 30.0, b.clone()), 360.0, 10.0, &g));
    assert!(!pfa_return_home(&state(ZoneId(0), 0.0, b.clone()), 360.0, 10.0, &g));
    assert!(pfa_return_home(&state(ZoneId(1), 10.0, b), 360.0, 10.0, &g));
}

#[test]
fn interval_estimation_examples() {
    let f = FuelParams {
        r: 2.0,
        ..FuelParams::default()
    };
    let g = RegionGrid::uniform(3, 1, 30.0, f, ZoneId(0)).unwrap();
    let mut b = BeliefState::healthy(vec![0.5; 3]);
    b.pq = vec![0.0, 1.0, 0.5];
    b.ph = vec![1.0, 0.0, 0.5];
    let m = interval_estimation_map(&b, 0.75, &g);
    assert_abs_diff_eq!(m[0], 0.0);
    assert_abs_diff_eq!(m[1], 200.0);
    assert_abs_diff_eq!(m[2], 107.5, epsilon = 1e-12);
}

#[test]
fn pfa_cfa_goes_home_when_triggered() {
    let g = grid(10, 1);
    let reach = ReachGraph::new(&g, 60.0, ZoneId(0));
    let mut b = BeliefState::healthy(vec![0.0; 10]);
    b.pq[9] = 0.5;
    b.ph[9] = 0.5;
    let p = DronePolicyParams {
        d_max_m: 60.0,
        ..DronePolicyParams::default()
    };
    let s = state(ZoneId(2), 10.0, b);
    assert_eq!(pfa_cfa_decide(&s, &p, &reach, &g), ZoneId(0));
}

#[test]
fn pfa_cfa_hot_zone_in_reach() {
    let g = grid(9, 9);
    let reach = ReachGraph::new(&g, 360.0, ZoneId(0));
    let mut b = BeliefState::healthy(vec![0.0; 81]);
    b.pq[40] = 0.5;
    b.ph[40] = 0.5;
    let p = DronePolicyParams {
        rho_obs_m: 10.0,
        ..DronePolicyParams::default()
    };
    let s = state(ZoneId(0), 120.0, b);
    assert_eq!(pfa_cfa_decide(&s, &p, &reach, &g), ZoneId(40));
}

#[test]
fn pfa_cfa_projects_onto_reach() {
    let g = grid(12, 12);
    let reach = ReachGraph::new(&g, 90.0, ZoneId(0));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let hot = ZoneId(rng.random_range(0..144));
        let mut b = BeliefState::healthy(vec![0.0; 144]);
        b.pq[hot.0] = 0.3;
        b.ph[hot.0] = 0.7;
        let p = DronePolicyParams {
            d_max_m: 90.0,
            rho_obs_m: 10.0,
            ..DronePolicyParams::default()
        };
        let pos = ZoneId(rng.random_range(0..144));
        let s = state(pos, 1e4, b);
        let got = pfa_cfa_decide(&s, &p, &reach, &g);
        let oracle = g
            .zones()
            .filter(|z| g.distance(pos, *z) <= 90.0 + 1e-9)
            .min_by(|a, b| g.distance(*a, hot).total_cmp(&g.distance(*b, hot)).then(a.0.cmp(&b.0)))
            .unwrap();
        assert_eq!(got, oracle);
    }
}

#[test]
fn chain_dp_matches_enumeration() {
    let g = grid(5, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..40 {
        let reach = ReachGraph::new(&g, 45.0, ZoneId(0));
        let node: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..25).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let pair = (i % 2 == 0).then(|| {
            (0..3)
                .map(|_| (0..25).map(|_| rng.random_range(0.0..0.5)).collect())
                .collect()
        });
        let p = LookaheadProblem {
            node_reward: node,
            pair_weight: pair,
            obs_disk: Disk::new(35.0, 30.0),
            start: ZoneId(rng.random_range(0..25)),
            home: ZoneId(0),
            battery_steps: 10,
            c_fail: 0.0,
        };
        let sol = solve_chain_dp(&p, &reach, &g).unwrap();
        let mut best: Option<(Vec<ZoneId>, f64)> = None;
        for path in all_paths(&reach, &g, p.start, 3) {
            let v = p.evaluate(&path, &g);
            if best.as_ref().is_none_or(|(_, b)| v > *b + 1e-12) {
                best = Some((path, v));
            }
        }
        let (path, v) = best.unwrap();
        assert_abs_diff_eq!(sol.value, v, epsilon = 1e-9);
        assert_eq!(sol.path[0], path[0]);
    }
}

#[test]
fn chain_dp_monotone_in_node_reward() {
    let g = grid(4, 4);
    let reach = ReachGraph::new(&g, 30.0, ZoneId(0));
    let mut p = LookaheadProblem {
        node_reward: vec![vec![0.3; 16], vec![0.1; 16]],
        pair_weight: None,
        obs_disk: Disk::new(30.0, 30.0),
        start: ZoneId(5),
        home: ZoneId(0),
        battery_steps: 5,
        c_fail: 0.0,
    };
    let before = solve_chain_dp(&p, &reach, &g).unwrap().value;
    p.node_reward[1][15] += 5.0;
    assert!(solve_chain_dp(&p, &reach, &g).unwrap().value >= before);
}

fn fire_belief(n: usize, hot: &[usize]) -> BeliefState {
    let mut b = BeliefState::healthy(vec![0.0; n]);
    for &i in hot {
        b.pk[i] = 1.0;
        b.pq[i] = 0.3;
        b.ph[i] = 0.6;
        b.pd[i] = 0.1;
    }
    b
}

#[test]
fn ie_with_zero_theta_has_no_pairwise_terms() {
    let g = grid(6, 6);
    let reach = ReachGraph::new(&g, 60.0, ZoneId(0));
    let (bp, hp) = (BeliefParams::default(), HeliPolicyParams::default());
    let m = model(&g, &reach, &bp, &hp);
    let p = DronePolicyParams {
        theta_ie: vec![0.0],
        ..DronePolicyParams::default()
    };
    let lp = build_lookahead_ie(&state(ZoneId(0), 120.0, fire_belief(36, &[14])), &p, &m);
    assert!(lp.pair_weight.is_none());
}

#[test]
fn ie_identical_consecutive_penalty() {
    let g = grid(6, 6);
    let reach = ReachGraph::new(&g, 60.0, ZoneId(0));
    let (bp, hp) = (BeliefParams::default(), HeliPolicyParams::default());
    let m = model(&g, &reach, &bp, &hp);
    let p = DronePolicyParams {
        theta_ie: vec![0.5, 1.5],
        rho_obs_m: 40.0,
        ..DronePolicyParams::default()
    };
    let s = state(ZoneId(0), 120.0, fire_belief(36, &[14, 15]));
    let lp = build_lookahead_ie(&s, &p, &m);
    let maps = lookahead::ie_stage_maps(&s, lp.horizon(), &m);
    let pre = lp.prefixes(&g);
    let z = ZoneId(14);
    for k in 0..lp.horizon() {
        let theta = p.theta_ie_at(k);
        let direct: f64 = lp.obs_disk.zones(&g, z).iter().map(|c| theta * maps[k].1[c.0]).sum();
        assert_abs_diff_eq!(lp.penalty(&pre, &g, k, z, z), direct, epsilon = 1e-9);
        // disjoint footprints
        assert_eq!(lp.penalty(&pre, &g, k, ZoneId(0), ZoneId(35)), 0.0);
    }
}

#[test]
fn ts_without_fire_only_carries_failure_terms() {
    let g = grid(6, 6);
    let reach = ReachGraph::new(&g, 60.0, ZoneId(0));
    let (bp, hp) = (BeliefParams::default(), HeliPolicyParams::default());
    let m = model(&g, &reach, &bp, &hp);
    let p = DronePolicyParams {
        variant: DroneVariant::TsDla,
        m_scenarios: 1,
        ..DronePolicyParams::default()
    };
    let s = state(ZoneId(0), 30.0, BeliefState::healthy(vec![0.0; 36]));
    let lp = build_lookahead_ts(&s, &p, &m, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(lp.horizon(), 3);
    for (k, row) in lp.node_reward.iter().enumerate() {
        for z in g.zones() {
            let expect = if reach.hops_home(z) > 2 - k { -m.c_fail } else { 0.0 };
            assert_eq!(row[z.0], expect);
        }
    }
}

#[test]
fn no_fire_drifts_home() {
    let g = grid(8, 8);
    let reach = ReachGraph::new(&g, 60.0, ZoneId(0));
    let (bp, hp) = (BeliefParams::default(), HeliPolicyParams::default());
    let m = model(&g, &reach, &bp, &hp);
    let s = state(ZoneId(63), 60.0, BeliefState::healthy(vec![0.0; 64]));
    let p = DronePolicyParams::default();
    let next = ie_dla_decide(&s, &p, &m).unwrap();
    assert!(g.distance(next, ZoneId(0)) < g.distance(ZoneId(63), ZoneId(0)));
}

#[test]
fn distant_hotspot_attracts() {
    let g = grid(10, 10);
    let reach = ReachGraph::new(&g, 60.0, ZoneId(0));
    let (bp, hp) = (BeliefParams::default(), HeliPolicyParams::default());
    let m = model(&g, &reach, &bp, &hp);
    let hot = ZoneId(5 * 10 + 6);
    let s = state(ZoneId(0), 120.0, fire_belief(100, &[hot.0]));
    let p = DronePolicyParams {
        rho_obs_m: 40.0,
        ..DronePolicyParams::default()
    };
    let next = ie_dla_decide(&s, &p, &m).unwrap();
    assert!(g.distance(next, hot) < g.distance(ZoneId(0), hot));
}

#[test]
fn ts_is_reproducible() {
    let g = grid(8, 8);
    let reach = ReachGraph::new(&g, 60.0, ZoneId(0));
    let (bp, hp) = (BeliefParams::default(), HeliPolicyParams::default());
    let m = model(&g, &reach, &bp, &hp);
    let mut b = fire_belief(64, &[27, 28]);
    b.pk[19] = 0.4;
    let s = state(ZoneId(0), 120.0, b);
    let p = DronePolicyParams {
        variant: DroneVariant::TsDla,
        m_scenarios: 8,
        ..DronePolicyParams::default()
    };
    let a = ts_dla_decide(&s, &p, &m, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let b = ts_dla_decide(&s, &p, &m, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert_eq!(a, b);
    assert!(reach.can_reach(&g, s.position, a));
}
