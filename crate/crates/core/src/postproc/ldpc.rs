//! LDPC parity-check matrices (progressive edge growth or random socket
//! matching, regular or irregular) with layered syndrome-based sum-product
//! decoding for key reconciliation.

use std::collections::VecDeque;

use bitvec::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::primitives::RandomStream;

/// Sparse binary parity-check matrix stored as check-major edge lists.
#[derive(Debug, Clone)]
pub struct ParityCheckMatrix {
    n: usize,
    m: usize,
    /// `check_start[c]..check_start[c + 1]` indexes the edges of check `c`.
    check_start: Vec<usize>,
    /// Variable index of each edge.
    edge_var: Vec<u32>,
    /// Edge indices touching each variable.
    var_edges: Vec<Vec<u32>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check variable lists.
    pub fn from_rows(n: usize, rows: &[Vec<u32>]) -> Self {
        let m = rows.len();
        let mut check_start = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); n];
        check_start.push(0);
        for row in rows {
            for &v in row {
                assert!((v as usize) < n, "variable {v} out of range");
                var_edges[v as usize].push(edge_var.len() as u32);
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        Self {
            n,
            m,
            check_start,
            edge_var,
            var_edges,
        }
    }

    /// Progressive edge growth: every variable gets `var_degree` checks, each
    /// chosen as far as possible from the variable's current neighbourhood,
    /// ties broken by lowest check degree and then by the seeded stream.
    pub fn progressive_edge_growth(n: usize, m: usize, var_degree: usize, seed: u64) -> Self {
        Self::progressive_edge_growth_with_degrees(m, &vec![var_degree; n], seed)
    }

    /// PEG construction for an arbitrary variable-degree sequence. Variables
    /// are connected in the given order; callers usually sort by degree.
    pub fn progressive_edge_growth_with_degrees(m: usize, degrees: &[usize], seed: u64) -> Self {
        let n = degrees.len();
        assert!(degrees.iter().all(|&d| d >= 1 && d <= m));
        let mut rng = RandomStream::new(seed);
        let mut check_adj: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut var_adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut check_seen = vec![u32::MAX; m];
        let mut var_seen = vec![u32::MAX; n];
        let mut stamp = 0u32;
        let mut candidates: Vec<u32> = Vec::with_capacity(m);

        for v in 0..n {
            for k in 0..degrees[v] {
                candidates.clear();
                if k == 0 {
                    candidates.extend(0..m as u32);
                } else {
                    stamp += 1;
                    // BFS over the current graph rooted at v, tracking the set of
                    // reached checks level by level.
                    let mut reached = 0usize;
                    let mut frontier: VecDeque<u32> = VecDeque::new();
                    var_seen[v] = stamp;
                    for &c in &var_adj[v] {
                        if check_seen[c as usize] != stamp {
                            check_seen[c as usize] = stamp;
                            reached += 1;
                            frontier.push_back(c);
                        }
                    }
                    let mut last_unreached: Vec<u32> = (0..m as u32)
                        .filter(|&c| check_seen[c as usize] != stamp)
                        .collect();
                    loop {
                        let mut next: VecDeque<u32> = VecDeque::new();
                        for &c in &frontier {
                            for &u in &check_adj[c as usize] {
                                if var_seen[u as usize] == stamp {
                                    continue;
                                }
                                var_seen[u as usize] = stamp;
                                for &c2 in &var_adj[u as usize] {
                                    if check_seen[c2 as usize] != stamp {
                                        check_seen[c2 as usize] = stamp;
                                        reached += 1;
                                        next.push_back(c2);
                                    }
                                }
                            }
                        }
                        if next.is_empty() || reached == m {
                            if reached < m {
                                last_unreached = (0..m as u32)
                                    .filter(|&c| check_seen[c as usize] != stamp)
                                    .collect();
                            }
                            break;
                        }
                        last_unreached.retain(|&c| check_seen[c as usize] != stamp);
                        if last_unreached.is_empty() {
                            break;
                        }
                        frontier = next;
                    }
                    // `last_unreached` holds the checks not reached before the
                    // final expansion (or still unreached).
                    candidates.extend(
                        last_unreached
                            .into_iter()
                            .filter(|c| !var_adj[v].contains(c)),
                    );
                    if candidates.is_empty() {
                        candidates.extend((0..m as u32).filter(|c| !var_adj[v].contains(c)));
                    }
                }
                let min_deg = candidates
                    .iter()
                    .map(|&c| check_adj[c as usize].len())
                    .min()
                    .expect("non-empty candidate set");
                candidates.retain(|&c| check_adj[c as usize].len() == min_deg);
                let &chosen = candidates
                    .choose(&mut rng)
                    .expect("non-empty candidate set");
                check_adj[chosen as usize].push(v as u32);
                var_adj[v].push(chosen);
            }
        }
        for row in &mut check_adj {
            row.sort_unstable();
        }
        Self::from_rows(n, &check_adj)
    }

    /// Random socket matching with near-uniform check degrees. Degree-2
    /// variables are laid out as a zigzag chain over shuffled checks so they
    /// form no cycles among themselves. Remaining edges are redrawn a bounded
    /// number of times to avoid repeated edges and length-4 cycles. Linear
    /// time, for blocks where PEG is too slow.
    pub fn random_with_degrees(m: usize, degrees: &[usize], seed: u64) -> Self {
        const RETRIES: usize = 32;
        let n = degrees.len();
        assert!(degrees.iter().all(|&d| d >= 1 && d <= m));
        let edges: usize = degrees.iter().sum();
        let mut rng = RandomStream::new(seed);
        let mut check_adj: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut free: Vec<usize> = (0..m)
            .map(|c| edges / m + usize::from(c < edges % m))
            .collect();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(degrees[v]));
        let chain: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&v| degrees[v] == 2)
            .take(m.saturating_sub(1))
            .collect();
        if !chain.is_empty() {
            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(&mut rng);
            for (i, &v) in chain.iter().enumerate() {
                for c in [perm[i], perm[i + 1]] {
                    check_adj[c].push(v as u32);
                    free[c] = free[c].saturating_sub(1);
                }
            }
            let mut in_chain = vec![false; n];
            for &v in &chain {
                in_chain[v] = true;
            }
            order.retain(|&v| !in_chain[v]);
        }
        let mut sockets: Vec<u32> = free
            .iter()
            .enumerate()
            .flat_map(|(c, &k)| std::iter::repeat_n(c as u32, k))
            .collect();

        let mut near = vec![u32::MAX; n];
        let mut chosen: Vec<u32> = Vec::new();
        for v in order {
            chosen.clear();
            near[v] = v as u32;
            for _ in 0..degrees[v] {
                let mut pick = None;
                for attempt in (0..=RETRIES).take_while(|_| !sockets.is_empty()) {
                    let slot = rng.random_range(0..sockets.len());
                    let c = sockets[slot];
                    if chosen.contains(&c) {
                        continue;
                    }
                    let closes_square = check_adj[c as usize]
                        .iter()
                        .any(|&u| near[u as usize] == v as u32);
                    if !closes_square || attempt == RETRIES {
                        pick = Some(slot);
                        break;
                    }
                }
                let slot = pick.or_else(|| sockets.iter().position(|c| !chosen.contains(c)));
                let c = match slot {
                    Some(slot) => sockets.swap_remove(slot),
                    // No free socket on an unused check: overfill a fresh one.
                    None => loop {
                        let c = rng.random_range(0..m as u32);
                        if !chosen.contains(&c) {
                            break c;
                        }
                    },
                };
                for &u in &check_adj[c as usize] {
                    near[u as usize] = v as u32;
                }
                check_adj[c as usize].push(v as u32);
                chosen.push(c);
            }
        }
        for row in &mut check_adj {
            row.sort_unstable();
        }
        Self::from_rows(n, &check_adj)
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn syndrome_len(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    pub fn row(&self, check: usize) -> &[u32] {
        &self.edge_var[self.check_start[check]..self.check_start[check + 1]]
    }

    pub fn var_degree(&self, var: usize) -> usize {
        self.var_edges[var].len()
    }

    /// H·x over GF(2).
    pub fn syndrome(&self, bits: &BitSlice<u64, Lsb0>) -> BitVec<u64, Lsb0> {
        assert_eq!(bits.len(), self.n);
        (0..self.m)
            .map(|c| {
                self.row(c)
                    .iter()
                    .fold(false, |acc, &v| acc ^ bits[v as usize])
            })
            .collect()
    }

    /// Length of the shortest cycle through any edge, capped at `limit`.
    pub fn girth(&self, limit: usize) -> usize {
        let mut best = limit;
        let mut var_depth = vec![usize::MAX; self.n];
        let mut check_depth = vec![usize::MAX; self.m];
        let mut var_parent = vec![u32::MAX; self.n];
        let mut check_parent = vec![u32::MAX; self.m];
        let check_of_edge: Vec<u32> = (0..self.m)
            .flat_map(|c| std::iter::repeat_n(c as u32, self.row(c).len()))
            .collect();
        for root in 0..self.n {
            var_depth.iter_mut().for_each(|d| *d = usize::MAX);
            check_depth.iter_mut().for_each(|d| *d = usize::MAX);
            var_depth[root] = 0;
            let mut queue = VecDeque::from([(root as u32, true)]);
            while let Some((node, is_var)) = queue.pop_front() {
                if is_var {
                    let d = var_depth[node as usize];
                    if 2 * d + 1 >= best {
                        break;
                    }
                    for &e in &self.var_edges[node as usize] {
                        let c = check_of_edge[e as usize];
                        if c == var_parent[node as usize] && node as usize != root {
                            continue;
                        }
                        if check_depth[c as usize] == usize::MAX {
                            check_depth[c as usize] = d + 1;
                            check_parent[c as usize] = node;
                            queue.push_back((c, false));
                        } else {
                            best = best.min(d + 1 + check_depth[c as usize]);
                        }
                    }
                } else {
                    let d = check_depth[node as usize];
                    for &u in self.row(node as usize) {
                        if u == check_parent[node as usize] {
                            continue;
                        }
                        if var_depth[u as usize] == usize::MAX {
                            var_depth[u as usize] = d + 1;
                            var_parent[u as usize] = node;
                            queue.push_back((u, true));
                        } else {
                            best = best.min(d + 1 + var_depth[u as usize]);
                        }
                    }
                }
            }
        }
        best
    }
}

/// Outcome of one syndrome decoding attempt.
#[derive(Debug, Clone)]
pub struct SyndromeDecoding {
    pub bits: BitVec<u64, Lsb0>,
    pub iterations: usize,
    pub converged: bool,
}

const LLR_CLAMP: f64 = 40.0;

/// Sum-product decoding of `received` towards the word whose syndrome is
/// `target`, assuming a binary symmetric channel with crossover `crossover`.
pub fn decode_syndrome(
    h: &ParityCheckMatrix,
    received: &BitSlice<u64, Lsb0>,
    target: &BitSlice<u64, Lsb0>,
    crossover: f64,
    max_iterations: usize,
) -> SyndromeDecoding {
    assert_eq!(received.len(), h.n);
    assert_eq!(target.len(), h.m);
    let p = crossover.clamp(1e-6, 0.5 - 1e-9);
    let channel = ((1.0 - p) / p).ln();
    let prior: Vec<f64> = received
        .iter()
        .map(|b| if *b { -channel } else { channel })
        .collect();

    let mut hard: BitVec<u64, Lsb0> = received.to_bitvec();
    if h.syndrome(&hard) == *target {
        return SyndromeDecoding {
            bits: hard,
            iterations: 0,
            converged: true,
        };
    }

    // Layered (check-serial) schedule: each check reads the freshest
    // variable totals and writes them back immediately.
    let mut total = prior.clone();
    let mut c2v = vec![0.0_f64; h.edge_count()];
    let mut v2c: Vec<f64> = Vec::new();
    let mut tanhs: Vec<f64> = Vec::new();
    let mut suffix: Vec<f64> = Vec::new();

    for iteration in 1..=max_iterations {
        for c in 0..h.m {
            let (lo, hi) = (h.check_start[c], h.check_start[c + 1]);
            let deg = hi - lo;
            v2c.clear();
            v2c.extend((lo..hi).map(|e| total[h.edge_var[e] as usize] - c2v[e]));
            tanhs.clear();
            tanhs.extend(v2c.iter().map(|&x| (0.5 * x).tanh()));
            suffix.clear();
            suffix.resize(deg + 1, 1.0);
            for i in (0..deg).rev() {
                suffix[i] = suffix[i + 1] * tanhs[i];
            }
            let sign = if target[c] { -1.0 } else { 1.0 };
            let mut prefix = 1.0;
            for i in 0..deg {
                let t = (prefix * suffix[i + 1]).clamp(-0.999_999_999_999, 0.999_999_999_999);
                let msg = (sign * 2.0 * t.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
                c2v[lo + i] = msg;
                total[h.edge_var[lo + i] as usize] = v2c[i] + msg;
                prefix *= tanhs[i];
            }
        }
        for (v, &t) in total.iter().enumerate() {
            hard.set(v, t < 0.0);
        }
        if h.syndrome(&hard) == *target {
            return SyndromeDecoding {
                bits: hard,
                iterations: iteration,
                converged: true,
            };
        }
    }
    SyndromeDecoding {
        bits: hard,
        iterations: max_iterations,
        converged: false,
    }
}
