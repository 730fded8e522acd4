//! Exact transportation LP by the primal network simplex method.
//!
//! Sources are grid atoms, sinks are sites, every source-sink pair is an
//! uncapacitated arc. The basis is a spanning tree on the `S + T` nodes,
//! started from the north-west corner rule in the given order (callers sort
//! both sides along a common direction) and improved with block-search
//! pricing.
//!
//! The tree is rooted at a sink, so every source hangs below a sink and its
//! potential follows from that arc: only the `T` sink potentials are stored.
//! At most `T - 1` sources have more than one basic arc, so root paths are
//! short and a pivot costs `O(block + T * depth)` rather than the size of
//! the re-hung subtree.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Point2;

const NONE: usize = usize::MAX;

/// Relative supply/demand mismatch accepted as balanced.
pub const LP_BALANCE_TOL: f64 = 1e-9;

/// An optimal plan: total cost and the arcs carrying flow.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    pub cost: f64,
    /// `(source, sink, amount)` for every basic arc with positive flow.
    pub arcs: Vec<(usize, usize, f64)>,
    /// Optimal dual values of the sinks, up to a common constant.
    pub sink_potentials: Vec<f64>,
    pub pivots: usize,
}

impl TransportPlan {
    pub fn sink_totals(&self, sinks: usize) -> Vec<f64> {
        let mut b = vec![0.0; sinks];
        for &(_, t, f) in &self.arcs {
            b[t] += f;
        }
        b
    }
}

struct Tree {
    s: usize,
    t: usize,
    parent: Vec<usize>,
    /// Flow on the arc between a node and its parent.
    flow: Vec<f64>,
    /// Sink potentials `v_t`; a source's `u_s` is `c(s, parent) - v_parent`.
    v: Vec<f64>,
    mark: Vec<usize>,
    stamp: usize,
}

impl Tree {
    fn cost_between(&self, cost: &[f64], a: usize, b: usize) -> f64 {
        let (src, snk) = if a < self.s { (a, b - self.s) } else { (b, a - self.s) };
        cost[src * self.t + snk]
    }

    fn u(&self, cost: &[f64], src: usize) -> f64 {
        let p = self.parent[src] - self.s;
        cost[src * self.t + p] - self.v[p]
    }
}

/// Minimum of `sum c_st x_st` subject to `sum_t x_st = supply_s`,
/// `sum_s x_st = demand_t`, `x >= 0`, with `cost` row-major `S x T`.
pub fn transport_simplex(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    solve(supply, demand, cost, None)
}

/// As [`transport_simplex`], starting from the assignment
/// `s -> argmin_t (c_st - v_t)` for guessed sink potentials `v`.
pub fn transport_simplex_warm(
    supply: &[f64],
    demand: &[f64],
    cost: &[f64],
    sink_potentials: &[f64],
) -> Result<TransportPlan> {
    assert_eq!(sink_potentials.len(), demand.len(), "one potential per sink");
    solve(supply, demand, cost, Some(sink_potentials))
}

fn solve(supply: &[f64], demand: &[f64], cost: &[f64], warm: Option<&[f64]>) -> Result<TransportPlan> {
    let (s_n, t_n) = (supply.len(), demand.len());
    assert_eq!(cost.len(), s_n * t_n, "cost matrix shape");
    let (sa, sb): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if s_n == 0
        || t_n == 0
        || supply.iter().chain(demand).any(|v| !(*v >= 0.0))
        || (sa - sb).abs() > LP_BALANCE_TOL * sa.max(sb)
    {
        return Err(Error::Infeasible { supply: sa, demand: sb });
    }
    let order: Vec<usize> = match warm {
        None => (0..s_n).collect(),
        Some(v) => {
            let label = |s: usize| {
                (0..t_n)
                    .map(|t| (cost[s * t_n + t] - v[t], t))
                    .fold((f64::INFINITY, 0), |m, x| if x.0 < m.0 { x } else { m })
                    .1
            };
            let mut keyed: Vec<(usize, usize)> = (0..s_n).map(|s| (label(s), s)).collect();
            keyed.sort_unstable();
            keyed.into_iter().map(|(_, s)| s).collect()
        }
    };
    let sorted: Vec<f64> = order.iter().map(|&s| supply[s]).collect();
    let start: Vec<(usize, usize, f64)> = north_west_corner(&sorted, demand)
        .into_iter()
        .map(|(i, j, f)| (order[i], j, f))
        .collect();
    let mut tree = build_tree(s_n, t_n, &start, cost);

    let n_arcs = s_n * t_n;
    let cmax = cost.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-12 * cmax.max(f64::MIN_POSITIVE);
    let block = (libm::sqrt(n_arcs as f64) as usize).max(16).min(n_arcs);
    let max_pivots = 50 * (s_n + t_n) * t_n.max(8) + 10_000;
    let mut next = 0usize;
    let mut pivots = 0usize;
    while let Some((es, et, r)) = price(&tree, cost, &mut next, block, tol) {
        pivot(&mut tree, es, s_n + et, r);
        pivots += 1;
        if pivots > max_pivots {
            log::warn!("network simplex stopped after {pivots} pivots");
            break;
        }
    }

    let mut plan_cost = 0.0;
    let mut arcs = Vec::new();
    for n in 0..s_n + t_n {
        let p = tree.parent[n];
        if p == NONE {
            continue;
        }
        let f = tree.flow[n];
        plan_cost += f * tree.cost_between(cost, n, p);
        if f > 0.0 {
            let (a, b) = if n < s_n { (n, p - s_n) } else { (p, n - s_n) };
            arcs.push((a, b, f));
        }
    }
    Ok(TransportPlan {
        cost: plan_cost,
        arcs,
        sink_potentials: tree.v,
        pivots,
    })
}

/// Pairwise squared distances, row-major over `from x to`.
pub fn squared_distance_costs(from: &[Point2], to: &[Point2]) -> Vec<f64> {
    from.iter()
        .flat_map(|x| to.iter().map(move |p| (*x - *p).norm_sq()))
        .collect()
}

fn north_west_corner(supply: &[f64], demand: &[f64]) -> Vec<(usize, usize, f64)> {
    let (s_n, t_n) = (supply.len(), demand.len());
    let mut arcs = Vec::with_capacity(s_n + t_n - 1);
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (supply[0], demand[0]);
    loop {
        if i == s_n - 1 && j == t_n - 1 {
            arcs.push((i, j, ra.max(0.0)));
            break;
        }
        if j == t_n - 1 || (i < s_n - 1 && ra < rb) {
            arcs.push((i, j, ra.max(0.0)));
            rb = (rb - ra).max(0.0);
            i += 1;
            ra = supply[i];
        } else {
            arcs.push((i, j, rb.max(0.0)));
            ra = (ra - rb).max(0.0);
            j += 1;
            rb = demand[j];
        }
    }
    arcs
}

fn build_tree(s_n: usize, t_n: usize, arcs: &[(usize, usize, f64)], cost: &[f64]) -> Tree {
    let n = s_n + t_n;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, f) in arcs {
        adj[a].push((s_n + b, f));
        adj[s_n + b].push((a, f));
    }
    let mut tree = Tree {
        s: s_n,
        t: t_n,
        parent: vec![NONE; n],
        flow: vec![0.0; n],
        v: vec![0.0; t_n],
        mark: vec![0; n],
        stamp: 0,
    };
    // Potentials of all nodes during the sweep; sources are dropped after.
    let mut pot = vec![0.0; n];
    let mut seen = vec![false; n];
    let root = s_n;
    seen[root] = true;
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        for &(y, f) in &adj[x] {
            if seen[y] {
                continue;
            }
            seen[y] = true;
            tree.parent[y] = x;
            tree.flow[y] = f;
            pot[y] = tree.cost_between(cost, x, y) - pot[x];
            stack.push(y);
        }
    }
    debug_assert!(seen.iter().all(|&x| x), "initial basis spans all nodes");
    tree.v.copy_from_slice(&pot[s_n..]);
    tree
}

/// Most negative reduced cost `c_st - u_s - v_t` in the first block that
/// has one, scanning cyclically from `next`.
fn price(tree: &Tree, cost: &[f64], next: &mut usize, block: usize, tol: f64) -> Option<(usize, usize, f64)> {
    let n_arcs = cost.len();
    let t_n = tree.t;
    let mut best: Option<(usize, f64)> = None;
    let mut scanned = 0;
    let mut e = *next;
    let mut s = e / t_n;
    let mut us = tree.u(cost, s);
    while scanned < n_arcs {
        let t = e - s * t_n;
        let r = cost[e] - us - tree.v[t];
        if r < -tol && best.is_none_or(|(_, b)| r < b) {
            best = Some((e, r));
        }
        scanned += 1;
        e += 1;
        if e == n_arcs {
            e = 0;
        }
        if e % t_n == 0 {
            s = e / t_n;
            us = tree.u(cost, s);
        }
        if scanned % block == 0 && best.is_some() {
            break;
        }
    }
    *next = e;
    best.map(|(e, r)| (e / t_n, e % t_n, r))
}

fn pivot(tree: &mut Tree, src: usize, snk: usize, r: f64) {
    // Root paths of both ends up to their meeting point.
    tree.stamp += 1;
    let stamp = tree.stamp;
    let mut up_src = Vec::new();
    let mut x = src;
    while x != NONE {
        tree.mark[x] = stamp;
        up_src.push(x);
        x = tree.parent[x];
    }
    let mut up_snk = Vec::new();
    let mut y = snk;
    while tree.mark[y] != stamp {
        up_snk.push(y);
        y = tree.parent[y];
    }
    let meet = y;
    let cut = up_src.iter().position(|&n| n == meet).expect("common ancestor");
    up_src.truncate(cut);

    // Pushing along src -> snk and back through the tree: edges (named by
    // their lower end) shrink when traversed against source -> sink.
    let shrinks_src_side = |n: usize| n < tree.s;
    let shrinks_snk_side = |n: usize| n >= tree.s;
    let mut delta = f64::INFINITY;
    let mut leave = NONE;
    let mut leave_on_src_side = false;
    for &n in &up_src {
        if shrinks_src_side(n) && tree.flow[n] < delta {
            delta = tree.flow[n];
            leave = n;
            leave_on_src_side = true;
        }
    }
    for &n in &up_snk {
        if shrinks_snk_side(n) && tree.flow[n] < delta {
            delta = tree.flow[n];
            leave = n;
            leave_on_src_side = false;
        }
    }
    debug_assert!(leave != NONE, "cycle has a shrinking edge");
    for &n in &up_src {
        tree.flow[n] += if shrinks_src_side(n) { -delta } else { delta };
    }
    for &n in &up_snk {
        tree.flow[n] += if shrinks_snk_side(n) { -delta } else { delta };
    }
    tree.flow[leave] = 0.0;

    // Re-hang the part below the leaving edge from the entering arc.
    let (a, b, path) = if leave_on_src_side {
        (src, snk, &up_src)
    } else {
        (snk, src, &up_snk)
    };
    let end = path.iter().position(|&n| n == leave).expect("leaving edge on path");
    for i in (0..end).rev() {
        let (lo, hi) = (path[i], path[i + 1]);
        tree.parent[hi] = lo;
        tree.flow[hi] = tree.flow[lo];
    }
    tree.parent[a] = b;
    tree.flow[a] = delta;

    // Sinks below `a` shift so the entering arc prices to zero; the sources
    // there follow through their parent arcs.
    let dv = if a == src { -r } else { r };
    tree.stamp += 1;
    let inside = tree.stamp;
    tree.stamp += 1;
    let outside = tree.stamp;
    tree.mark[a] = inside;
    let s_n = tree.s;
    let mut chain = Vec::new();
    for t in 0..tree.t {
        let mut z = s_n + t;
        chain.clear();
        let verdict = loop {
            if tree.mark[z] == inside || tree.mark[z] == outside {
                break tree.mark[z];
            }
            chain.push(z);
            let p = tree.parent[z];
            if p == NONE {
                break outside;
            }
            z = p;
        };
        for &c in &chain {
            tree.mark[c] = verdict;
        }
        if verdict == inside {
            tree.v[t] += dv;
        }
    }
}
