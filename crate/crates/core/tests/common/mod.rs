#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use range_consensus::engine::generate_scenario;
use range_consensus::oracle::{hull_contains, HullQuery};
use range_consensus::{diameter, has_directed_spanning_tree, Scenario, SimulationTrace};

pub const GEOM_SLACK: f64 = 1e-9;
pub const CONTROL_SLACK: f64 = 1e-12;

/// Seeded spanning-tree scenario with `N` in 3..=8, `T` anywhere below `1/N`
/// and a random control bound.
pub fn random_scenario(seed: u64) -> Scenario<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0fc0_ffee);
    let n = rng.gen_range(3..=8);
    let mut s = generate_scenario(n, seed).expect("generator");
    s.params.t = rng.gen_range(0.2..0.95) / n as f64;
    s.params.gamma = rng.gen_range(0.3..2.0);
    s
}

/// Per-step invariants of the bounded law under an edge-preserving policy.
/// Returns a description of every violation.
pub fn step_violations(trace: &SimulationTrace<f64>, gamma: f64, t: f64, check_edges: bool) -> Vec<String> {
    let mut bad = Vec::new();
    let recs = &trace.records;
    for k in 0..recs.len() {
        let now = &recs[k];
        for (i, u) in now.controls.iter().enumerate() {
            if u.norm() > gamma + CONTROL_SLACK {
                bad.push(format!("k={k} agent {i}: |u| = {} > gamma", u.norm()));
            }
        }
        if check_edges && !has_directed_spanning_tree(&now.topology) {
            bad.push(format!("k={k}: no directed spanning tree"));
        }
        let Some(next) = recs.get(k + 1) else { continue };
        if check_edges {
            for &(a, b) in now.topology.edges() {
                let d = next.positions[a.0].dist(next.positions[b.0]);
                if d > next.radii[a.0] + GEOM_SLACK {
                    bad.push(format!("k={k}: edge {a}->{b} lost ({d} > {})", next.radii[a.0]));
                }
            }
        }
        let n = now.positions.len();
        for i in 0..n {
            let budget = (now.controls[i].norm() + gamma) * t;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let before = now.positions[i].dist(now.positions[j]);
                let after = next.positions[i].dist(next.positions[j]);
                if after > before + budget + GEOM_SLACK {
                    bad.push(format!("k={k}: pair ({i},{j}) grew {} > {budget}", after - before));
                }
            }
            let q = HullQuery { point: next.positions[i], vertices: now.positions.clone() };
            if !hull_contains(&q, GEOM_SLACK) {
                bad.push(format!("k={k}: agent {i} left the hull"));
            }
        }
        if diameter(&next.positions) > diameter(&now.positions) + GEOM_SLACK {
            bad.push(format!("k={k}: diameter increased"));
        }
    }
    bad
}
