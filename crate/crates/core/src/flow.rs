//! Dinic's maximum flow over an arbitrary [`Scalar`], with minimum-cut
//! extraction.

use std::collections::VecDeque;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Edge<T> {
    to: usize,
    residual: T,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork<T: Scalar> {
    adj: Vec<Vec<usize>>,
    // edge 2k is forward, 2k+1 its reverse
    edges: Vec<Edge<T>>,
    eps: T,
}

impl<T: Scalar> FlowNetwork<T> {
    pub fn new(nodes: usize) -> Self {
        let eps = T::eq_tol() * T::from_ratio(1, 100);
        Self { adj: vec![Vec::new(); nodes], edges: Vec::new(), eps }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: T) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, residual: cap });
        self.edges.push(Edge { to: from, residual: T::zero() });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently pushed along forward edge `id`.
    pub fn flow_on(&self, id: usize) -> &T {
        &self.edges[id + 1].residual
    }

    fn bfs(&self, s: usize, level: &mut [i32]) {
        level.iter_mut().for_each(|l| *l = -1);
        let mut queue = VecDeque::from([s]);
        level[s] = 0;
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if level[edge.to] < 0 && edge.residual > self.eps {
                    level[edge.to] = level[u] + 1;
                    queue.push_back(edge.to);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, limit: T, level: &[i32], iter: &mut [usize]) -> T {
        if u == t {
            return limit;
        }
        while iter[u] < self.adj[u].len() {
            let e = self.adj[u][iter[u]];
            let (to, res) = {
                let edge = &self.edges[e];
                (edge.to, edge.residual.clone())
            };
            if res > self.eps && level[to] == level[u] + 1 {
                let push = if res < limit { res } else { limit.clone() };
                let got = self.dfs(to, t, push, level, iter);
                if got > self.eps {
                    self.edges[e].residual -= &got;
                    self.edges[e ^ 1].residual += &got;
                    return got;
                }
            }
            iter[u] += 1;
        }
        T::zero()
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> T {
        let n = self.adj.len();
        let mut total = T::zero();
        let mut level = vec![-1; n];
        let mut iter = vec![0; n];
        let big = {
            // any bound above the total source capacity
            let mut b = T::one();
            for &e in &self.adj[s] {
                b += &self.edges[e].residual;
            }
            b
        };
        loop {
            self.bfs(s, &mut level);
            if level[t] < 0 {
                return total;
            }
            iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, big.clone(), &level, &mut iter);
                if !(f > self.eps) {
                    break;
                }
                total += &f;
            }
        }
    }

    /// Nodes reachable from `s` in the residual graph. After [`max_flow`](Self::max_flow)
    /// this is the source side of the unique inclusion-minimal minimum cut.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut level = vec![-1; self.adj.len()];
        self.bfs(s, &mut level);
        level.into_iter().map(|l| l >= 0).collect()
    }
}
