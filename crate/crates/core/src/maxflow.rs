//! Minimum s-t cut on sparse graphs with real capacities (Dinic's algorithm).
//!
//! Terminals are implicit: every node carries a capacity from the source and a
//! capacity to the sink. Arcs between nodes are added in pairs with their
//! reverse capacity. All scans follow insertion order, so a given network
//! always yields the same flow and the same cut.

use std::collections::VecDeque;

#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    source_cap: Vec<f64>,
    sink_cap: Vec<f64>,
    /// `(from, to, capacity, reverse capacity)`.
    arcs: Vec<(usize, usize, f64, f64)>,
}

/// Maximum flow value and the source side of the minimum cut.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub value: f64,
    /// `true` when the node is reachable from the source in the final residual graph.
    pub source_side: Vec<bool>,
}

impl MaxFlow {
    pub fn on_sink_side(&self, node: usize) -> bool {
        !self.source_side[node]
    }
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        Self {
            source_cap: vec![0.0; node_count],
            sink_cap: vec![0.0; node_count],
            arcs: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.source_cap.len()
    }

    /// Adds to the terminal capacities of `node`.
    pub fn add_terminal(&mut self, node: usize, source: f64, sink: f64) {
        debug_assert!(source >= 0.0 && sink >= 0.0);
        self.source_cap[node] += source;
        self.sink_cap[node] += sink;
    }

    /// Adds arc `from -> to` with `capacity` and its reverse with `reverse_capacity`.
    pub fn add_edge(&mut self, from: usize, to: usize, capacity: f64, reverse_capacity: f64) {
        debug_assert!(capacity >= 0.0 && reverse_capacity >= 0.0);
        debug_assert!(from != to);
        self.arcs.push((from, to, capacity, reverse_capacity));
    }

    pub fn max_flow(&self) -> MaxFlow {
        Dinic::build(self).run()
    }
}

struct Dinic {
    n: usize,
    source: usize,
    sink: usize,
    head: Vec<usize>,
    /// Arc ids grouped by tail node (CSR order).
    adj: Vec<usize>,
    to: Vec<usize>,
    residual: Vec<f64>,
    level: Vec<u32>,
    cursor: Vec<usize>,
    eps: f64,
    value: f64,
}

const UNSEEN: u32 = u32::MAX;

impl Dinic {
    fn build(net: &FlowNetwork) -> Self {
        let n = net.node_count() + 2;
        let source = n - 2;
        let sink = n - 1;
        let mut tail = Vec::new();
        let mut to = Vec::new();
        let mut residual = Vec::new();
        let mut push_pair = |u: usize, v: usize, c: f64, rc: f64| {
            tail.push(u);
            to.push(v);
            residual.push(c);
            tail.push(v);
            to.push(u);
            residual.push(rc);
        };

        let mut value = 0.0;
        let mut scale: f64 = 0.0;
        for &(u, v, c, rc) in &net.arcs {
            push_pair(u, v, c, rc);
            scale = scale.max(c).max(rc);
        }
        for v in 0..net.node_count() {
            // Flow that can go straight from source to sink through `v`.
            let direct = net.source_cap[v].min(net.sink_cap[v]);
            value += direct;
            let s = net.source_cap[v] - direct;
            let t = net.sink_cap[v] - direct;
            scale = scale.max(s).max(t);
            if s > 0.0 {
                push_pair(source, v, s, 0.0);
            }
            if t > 0.0 {
                push_pair(v, sink, t, 0.0);
            }
        }

        let mut head = vec![0usize; n + 1];
        for &u in &tail {
            head[u + 1] += 1;
        }
        for i in 0..n {
            head[i + 1] += head[i];
        }
        let mut fill = head.clone();
        let mut adj = vec![0usize; tail.len()];
        for (a, &u) in tail.iter().enumerate() {
            adj[fill[u]] = a;
            fill[u] += 1;
        }

        Self {
            n,
            source,
            sink,
            head,
            adj,
            to,
            residual,
            level: vec![UNSEEN; n],
            cursor: vec![0; n],
            eps: scale * f64::EPSILON,
            value,
        }
    }

    fn bfs(&mut self) -> bool {
        self.level.iter_mut().for_each(|l| *l = UNSEEN);
        let mut queue = VecDeque::new();
        self.level[self.source] = 0;
        queue.push_back(self.source);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[self.head[u]..self.head[u + 1]] {
                let v = self.to[a];
                if self.residual[a] > self.eps && self.level[v] == UNSEEN {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[self.sink] != UNSEEN
    }

    /// Finds one augmenting path in the level graph and pushes its bottleneck.
    /// Returns 0 when the level graph is exhausted.
    fn augment(&mut self, path: &mut Vec<usize>) -> f64 {
        path.clear();
        let mut u = self.source;
        loop {
            if u == self.sink {
                let bottleneck = path
                    .iter()
                    .map(|&a| self.residual[a])
                    .fold(f64::INFINITY, f64::min);
                for &a in path.iter() {
                    self.residual[a] -= bottleneck;
                    self.residual[a ^ 1] += bottleneck;
                }
                return bottleneck;
            }
            let mut advanced = false;
            while self.cursor[u] < self.head[u + 1] {
                let a = self.adj[self.cursor[u]];
                let v = self.to[a];
                if self.residual[a] > self.eps && self.level[v] == self.level[u] + 1 {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                self.cursor[u] += 1;
            }
            if !advanced {
                // Dead end: drop `u` from the level graph and retreat.
                self.level[u] = UNSEEN;
                match path.pop() {
                    None => return 0.0,
                    Some(a) => {
                        u = self.to[a ^ 1];
                        self.cursor[u] += 1;
                    }
                }
            }
        }
    }

    fn run(mut self) -> MaxFlow {
        let mut path = Vec::new();
        while self.bfs() {
            self.cursor.copy_from_slice(&self.head[..self.n]);
            loop {
                let f = self.augment(&mut path);
                if f <= 0.0 {
                    break;
                }
                self.value += f;
            }
        }
        // The final BFS left `level` set exactly on the source-reachable nodes.
        let source_side = (0..self.n - 2).map(|v| self.level[v] != UNSEEN).collect();
        MaxFlow {
            value: self.value,
            source_side,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_goes_to_sink_side() {
        let mut net = FlowNetwork::new(1);
        net.add_terminal(0, 3.0, 5.0);
        let r = net.max_flow();
        assert_eq!(r.value, 3.0);
        // Cutting the source arc (3) beats cutting the sink arc (5).
        assert!(r.on_sink_side(0));
    }

    #[test]
    fn two_node_cut() {
        let mut net = FlowNetwork::new(2);
        net.add_terminal(0, 4.0, 0.0);
        net.add_terminal(1, 0.0, 4.0);
        net.add_edge(0, 1, 1.0, 1.0);
        let r = net.max_flow();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.source_side, vec![true, false]);
    }

    #[test]
    fn empty_network() {
        let mut net = FlowNetwork::new(3);
        net.add_edge(0, 1, 0.0, 0.0);
        let r = net.max_flow();
        assert_eq!(r.value, 0.0);
        // Nothing leaves the source, so no node is reachable from it.
        assert_eq!(r.source_side, vec![false; 3]);
    }

    #[test]
    fn long_chain_needs_no_recursion() {
        let n = 200_000;
        let mut net = FlowNetwork::new(n);
        net.add_terminal(0, 2.0, 0.0);
        net.add_terminal(n - 1, 0.0, 1.5);
        for v in 0..n - 1 {
            net.add_edge(v, v + 1, 7.0, 0.0);
        }
        assert_eq!(net.max_flow().value, 1.5);
    }
}
