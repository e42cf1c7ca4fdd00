//! Exact min-cost flow on bipartite transportation instances: integer
//! supplies/demands and integer edge costs, successive shortest paths with
//! Dijkstra over Johnson-reduced costs. Everything is integer arithmetic,
//! so the optimum is exact and deterministic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: u64,
    cost: i64,
}

pub struct MinCostFlow {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl MinCostFlow {
    pub fn new(n: usize) -> Self {
        MinCostFlow { n, edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: u64, cost: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, edge_id: usize) -> u64 {
        // Flow pushed forward equals residual capacity of the twin edge.
        self.edges[edge_id ^ 1].cap
    }

    /// Sends `amount` units from `s` to `t`; returns the total cost, or
    /// `None` if that much flow cannot be routed. Costs must be such that
    /// no negative-reduced-cost cycles arise (true for nonnegative costs).
    pub fn send(&mut self, s: usize, t: usize, amount: u64) -> Option<i128> {
        let mut potential = vec![0i64; self.n];
        let mut total_cost: i128 = 0;
        let mut remaining = amount;
        while remaining > 0 {
            // Dijkstra on reduced costs.
            let mut dist = vec![i64::MAX; self.n];
            let mut prev_edge = vec![usize::MAX; self.n];
            let mut heap: BinaryHeap<Reverse<(i64, usize)>> = BinaryHeap::new();
            dist[s] = 0;
            heap.push(Reverse((0, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &eid in &self.adj[u] {
                    let e = &self.edges[eid];
                    if e.cap == 0 {
                        continue;
                    }
                    let nd = d + e.cost + potential[u] - potential[e.to];
                    if nd < dist[e.to] {
                        dist[e.to] = nd;
                        prev_edge[e.to] = eid;
                        heap.push(Reverse((nd, e.to)));
                    }
                }
            }
            if dist[t] == i64::MAX {
                return None;
            }
            for v in 0..self.n {
                if dist[v] != i64::MAX {
                    potential[v] += dist[v];
                }
            }
            // Bottleneck along the shortest path.
            let mut push = remaining;
            let mut v = t;
            while v != s {
                let eid = prev_edge[v];
                push = push.min(self.edges[eid].cap);
                v = self.edges[eid ^ 1].to;
            }
            // Augment.
            let mut v = t;
            while v != s {
                let eid = prev_edge[v];
                self.edges[eid].cap -= push;
                self.edges[eid ^ 1].cap += push;
                total_cost += push as i128 * self.edges[eid].cost as i128;
                v = self.edges[eid ^ 1].to;
            }
            remaining -= push;
        }
        Some(total_cost)
    }
}

/// Solves the transportation problem: ships all supply to meet all demand
/// (sums must be equal) minimizing total cost. Returns the positive flows
/// as `(source, sink, amount)` triples plus the exact total cost.
pub fn transport(
    supplies: &[u64],
    demands: &[u64],
    cost: impl Fn(usize, usize) -> i64,
) -> (Vec<(usize, usize, u64)>, i128) {
    let m = supplies.len();
    let n = demands.len();
    let total: u64 = supplies.iter().sum();
    debug_assert_eq!(total, demands.iter().sum::<u64>());

    let s = m + n;
    let t = m + n + 1;
    let mut mcf = MinCostFlow::new(m + n + 2);
    let mut pair_edges = Vec::with_capacity(m * n);
    for (i, &sup) in supplies.iter().enumerate() {
        if sup > 0 {
            mcf.add_edge(s, i, sup, 0);
        }
    }
    for (j, &dem) in demands.iter().enumerate() {
        if dem > 0 {
            mcf.add_edge(m + j, t, dem, 0);
        }
    }
    for i in 0..m {
        if supplies[i] == 0 {
            continue;
        }
        for j in 0..n {
            if demands[j] == 0 {
                continue;
            }
            let c = cost(i, j);
            debug_assert!(c >= 0);
            pair_edges.push((i, j, mcf.add_edge(i, m + j, u64::MAX / 4, c)));
        }
    }
    let total_cost = mcf
        .send(s, t, total)
        .expect("complete bipartite transportation is always feasible");
    let flows = pair_edges
        .into_iter()
        .filter_map(|(i, j, eid)| {
            let f = mcf.flow_on(eid);
            (f > 0).then_some((i, j, f))
        })
        .collect();
    (flows, total_cost)
}

/// Rounds probability masses to integers summing exactly to `denom`
/// (largest-remainder apportionment).
pub fn scale_masses(masses: &[f64], denom: u64) -> Vec<u64> {
    let mut scaled: Vec<u64> = Vec::with_capacity(masses.len());
    let mut fractions: Vec<(f64, usize)> = Vec::with_capacity(masses.len());
    let mut sum = 0u64;
    for (i, &m) in masses.iter().enumerate() {
        let exact = m * denom as f64;
        let floor = exact.floor().max(0.0) as u64;
        scaled.push(floor);
        sum += floor;
        fractions.push((exact - floor as f64, i));
    }
    // Hand out the missing units to the largest fractional parts; ties
    // break by index for determinism.
    let missing = denom.saturating_sub(sum);
    fractions.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for k in 0..missing as usize {
        let (_, idx) = fractions[k % fractions.len()];
        scaled[idx] += 1;
    }
    // Rounding up could in principle overshoot if the masses sum above 1;
    // trim from the smallest fractions.
    let mut excess = sum.saturating_sub(denom);
    if excess > 0 {
        for &(_, idx) in fractions.iter().rev() {
            if excess == 0 {
                break;
            }
            let take = scaled[idx].min(excess);
            scaled[idx] -= take;
            excess -= take;
        }
    }
    debug_assert_eq!(scaled.iter().sum::<u64>(), denom);
    scaled
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transport_small_instance() {
        // Two sources (3, 7), two sinks (5, 5); costs favor the diagonal.
        let (flows, cost) = transport(&[3, 7], &[5, 5], |i, j| if i == j { 1 } else { 10 });
        // Optimal: 3 via (0,0), 5 via (1,1), 2 via (1,0).
        assert_eq!(cost, 3 + 5 + 20);
        let mut sorted = flows.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![(0, 0, 3), (1, 0, 2), (1, 1, 5)]);
    }

    #[test]
    fn transport_conserves_mass() {
        let supplies = [10u64, 20, 5];
        let demands = [7u64, 13, 15];
        let (flows, _) = transport(&supplies, &demands, |i, j| ((i + 2) * (j + 1)) as i64 % 7);
        let mut out = [0u64; 3];
        let mut inn = [0u64; 3];
        for (i, j, f) in flows {
            out[i] += f;
            inn[j] += f;
        }
        assert_eq!(out, supplies);
        assert_eq!(inn, demands);
    }

    #[test]
    fn scale_masses_sums_exactly() {
        let denom = 1u64 << 40;
        for masses in [
            vec![0.5, 0.5],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.7, 0.1, 0.1, 0.1],
            vec![1e-12, 1.0 - 1e-12],
        ] {
            let scaled = scale_masses(&masses, denom);
            assert_eq!(scaled.iter().sum::<u64>(), denom);
            for (&s, &m) in scaled.iter().zip(&masses) {
                assert!((s as f64 / denom as f64 - m).abs() < (masses.len() as f64 + 1.0) / denom as f64);
            }
        }
    }
}
