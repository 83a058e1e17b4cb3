//! The frozen Erdős–Rényi graph `F_p(n, m)`, coupled edge for edge with the
//! classical multigraph `G(n, m)`.
//!
//! At step `m` a uniform ordered pair of vertices (loops allowed) and a
//! uniform `U_m` are drawn. An edge between two trees merges them; an edge
//! inside a tree closes a cycle and freezes the component; an edge with both
//! endpoints frozen is discarded; an edge between a tree and a frozen
//! component is kept iff `U_m ≤ p`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{below, counter_word, unit_open_closed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeSample {
    /// Endpoint in `1..=n`.
    pub a: u32,
    /// Endpoint in `1..=n`.
    pub b: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Tree,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComponentRecord {
    /// Smallest vertex id (1-based) in the component.
    pub root: u32,
    pub size: u32,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransitionKind {
    TreeTreeMerge,
    TreeCycleFreeze,
    FrozenFrozenDiscard,
    TreeFrozenKept,
    TreeFrozenDiscarded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub frozen_sizes: Vec<u32>,
    pub standard_sizes: Vec<u32>,
    pub frozen_mass_rescaled: f64,
    pub discarded: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalObservables {
    pub surplus_vertices: u64,
    pub classical_sizes: Vec<u32>,
}

/// Union–find by size with path halving.
#[derive(Debug, Clone)]
struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    #[inline]
    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let gp = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = gp;
            v = gp;
        }
        v
    }

    /// Union of two distinct roots; returns `(new root, absorbed root)`.
    #[inline]
    fn union(&mut self, a: u32, b: u32) -> (u32, u32) {
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        (big, small)
    }
}

/// Per-size histogram difference between the trees of `F` and the
/// surplus-free components of `G`, with a count of sizes that disagree.
#[derive(Debug, Clone)]
struct ForestDiff {
    diff: Vec<i64>,
    mismatched: usize,
}

impl ForestDiff {
    #[inline]
    fn bump(&mut self, size: u32, delta: i64) {
        let d = &mut self.diff[size as usize];
        let was = *d != 0;
        *d += delta;
        let is = *d != 0;
        match (was, is) {
            (false, true) => self.mismatched += 1,
            (true, false) => self.mismatched -= 1,
            _ => {}
        }
    }
}

#[derive(Debug, Clone)]
pub struct GraphState {
    n: u32,
    p: f64,
    seed: u64,
    m: u64,
    dsu: Dsu,
    frozen: Vec<bool>,
    kept_edges: Vec<u64>,
    min_id: Vec<u32>,
    frozen_vertices: u64,
    discarded: u64,
    tree_hist: Vec<u32>,
    classical: Dsu,
    surplus: Vec<u64>,
    surplus_vertices: u64,
    forest_diff: ForestDiff,
}

/// Edges examined by critical time `t`: `⌊n/2 + (t/2)n^{2/3}⌋ ∨ 0`.
pub fn window_edges(n: u64, t: f64) -> Result<u64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite, got {t}")));
    }
    let c = (n as f64).cbrt();
    let m = (n as f64 / 2.0 + t / 2.0 * c * c).floor();
    Ok(if m <= 0.0 { 0 } else { m as u64 })
}

impl GraphState {
    pub fn new(n: u32, p: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("graph needs n >= 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("p must lie in [0, 1], got {p}")));
        }
        let nu = n as usize;
        let mut tree_hist = vec![0; nu + 1];
        tree_hist[1] = n;
        Ok(GraphState {
            n,
            p,
            seed,
            m: 0,
            dsu: Dsu::new(nu),
            frozen: vec![false; nu],
            kept_edges: vec![0; nu],
            min_id: (0..n).collect(),
            frozen_vertices: 0,
            discarded: 0,
            tree_hist,
            classical: Dsu::new(nu),
            surplus: vec![0; nu],
            surplus_vertices: 0,
            forest_diff: ForestDiff {
                diff: vec![0; nu + 1],
                mismatched: 0,
            },
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    /// Edges examined so far.
    pub fn m(&self) -> u64 {
        self.m
    }
    pub fn frozen_vertices(&self) -> u64 {
        self.frozen_vertices
    }
    pub fn discarded(&self) -> u64 {
        self.discarded
    }
    pub fn kept(&self) -> u64 {
        self.m - self.discarded
    }

    /// The `(edge, U)` pair of step `m` (0-based) for this seed.
    pub fn sample(&self, m: u64) -> (EdgeSample, f64) {
        let n = self.n as u64;
        let a = below(counter_word(self.seed, m, 0), n) as u32 + 1;
        let b = below(counter_word(self.seed, m, 1), n) as u32 + 1;
        let u = unit_open_closed(counter_word(self.seed, m, 2));
        (EdgeSample { a, b }, u)
    }

    /// Draw the next edge from the stream and apply it.
    pub fn apply_edge(&mut self) -> TransitionKind {
        let (e, u) = self.sample(self.m);
        self.apply_sample(e, u)
    }

    /// Apply a given edge and uniform as the next step.
    pub fn apply_sample(&mut self, e: EdgeSample, u: f64) -> TransitionKind {
        assert!(
            e.a >= 1 && e.a <= self.n && e.b >= 1 && e.b <= self.n,
            "vertex out of range"
        );
        let (a, b) = (e.a - 1, e.b - 1);
        self.m += 1;
        self.step_classical(a, b);

        let ra = self.dsu.find(a);
        let rb = self.dsu.find(b);
        let fa = self.frozen[ra as usize];
        let fb = self.frozen[rb as usize];
        if fa && fb {
            self.discarded += 1;
            return TransitionKind::FrozenFrozenDiscard;
        }
        if ra == rb {
            let s = self.dsu.size[ra as usize];
            self.remove_tree(s);
            self.frozen[ra as usize] = true;
            self.kept_edges[ra as usize] += 1;
            self.frozen_vertices += s as u64;
            return TransitionKind::TreeCycleFreeze;
        }
        if !fa && !fb {
            let (sa, sb) = (self.dsu.size[ra as usize], self.dsu.size[rb as usize]);
            self.remove_tree(sa);
            self.remove_tree(sb);
            let r = self.join(ra, rb);
            self.add_tree(self.dsu.size[r as usize]);
            return TransitionKind::TreeTreeMerge;
        }
        if u <= self.p {
            let tree = if fa { rb } else { ra };
            let s = self.dsu.size[tree as usize];
            self.remove_tree(s);
            let r = self.join(ra, rb);
            self.frozen[r as usize] = true;
            self.frozen_vertices += s as u64;
            TransitionKind::TreeFrozenKept
        } else {
            self.discarded += 1;
            TransitionKind::TreeFrozenDiscarded
        }
    }

    fn join(&mut self, ra: u32, rb: u32) -> u32 {
        let (r, gone) = self.dsu.union(ra, rb);
        self.kept_edges[r as usize] += self.kept_edges[gone as usize] + 1;
        self.min_id[r as usize] = self.min_id[r as usize].min(self.min_id[gone as usize]);
        r
    }

    fn remove_tree(&mut self, size: u32) {
        self.tree_hist[size as usize] -= 1;
        self.forest_diff.bump(size, -1);
    }

    fn add_tree(&mut self, size: u32) {
        self.tree_hist[size as usize] += 1;
        self.forest_diff.bump(size, 1);
    }

    fn step_classical(&mut self, a: u32, b: u32) {
        let ra = self.classical.find(a);
        let rb = self.classical.find(b);
        if ra == rb {
            let r = ra as usize;
            if self.surplus[r] == 0 {
                let s = self.classical.size[r];
                self.surplus_vertices += s as u64;
                self.forest_diff.bump(s, 1);
            }
            self.surplus[r] += 1;
            return;
        }
        let (sa, sb) = (
            self.classical.size[ra as usize],
            self.classical.size[rb as usize],
        );
        let (xa, xb) = (self.surplus[ra as usize], self.surplus[rb as usize]);
        for (s, x) in [(sa, xa), (sb, xb)] {
            if x == 0 {
                self.forest_diff.bump(s, 1);
            }
        }
        let (r, _) = self.classical.union(ra, rb);
        let x = xa + xb;
        self.surplus[r as usize] = x;
        let s = sa + sb;
        if x == 0 {
            self.forest_diff.bump(s, -1);
        } else {
            // Vertices of a surplus-free side join a component with surplus.
            if xa == 0 {
                self.surplus_vertices += sa as u64;
            }
            if xb == 0 {
                self.surplus_vertices += sb as u64;
            }
        }
    }

    /// Advance to critical time `t`, i.e. to `window_edges(n, t)` edges.
    pub fn run_to_time(&mut self, t: f64) -> Result<()> {
        let target = window_edges(self.n as u64, t)?;
        self.run_to_edges(target)
    }

    pub fn run_to_edges(&mut self, target: u64) -> Result<()> {
        if target < self.m {
            return Err(Error::Ordering(format!(
                "cannot rewind from m = {} to m = {target}",
                self.m
            )));
        }
        while self.m < target {
            self.apply_edge();
        }
        Ok(())
    }

    /// All components, ordered by smallest vertex id.
    pub fn components(&mut self) -> Vec<ComponentRecord> {
        let mut out = Vec::new();
        for v in 0..self.n {
            if self.dsu.find(v) == v {
                out.push(ComponentRecord {
                    root: self.min_id[v as usize] + 1,
                    size: self.dsu.size[v as usize],
                    status: if self.frozen[v as usize] {
                        Status::Frozen
                    } else {
                        Status::Tree
                    },
                });
            }
        }
        out.sort_by_key(|c| c.root);
        out
    }

    pub fn observables(&mut self) -> Observables {
        let comps = self.components();
        let mut frozen_sizes: Vec<u32> = comps
            .iter()
            .filter(|c| c.status == Status::Frozen)
            .map(|c| c.size)
            .collect();
        let mut standard_sizes: Vec<u32> = comps
            .iter()
            .filter(|c| c.status == Status::Tree)
            .map(|c| c.size)
            .collect();
        frozen_sizes.sort_unstable_by(|a, b| b.cmp(a));
        standard_sizes.sort_unstable_by(|a, b| b.cmp(a));
        Observables {
            frozen_sizes,
            standard_sizes,
            frozen_mass_rescaled: self.frozen_mass_rescaled(),
            discarded: self.discarded,
        }
    }

    /// `n^{-2/3}` times the number of frozen vertices.
    pub fn frozen_mass_rescaled(&self) -> f64 {
        let c = (self.n as f64).cbrt();
        self.frozen_vertices as f64 / (c * c)
    }

    pub fn largest_standard(&self) -> u32 {
        (1..self.tree_hist.len())
            .rev()
            .find(|&s| self.tree_hist[s] > 0)
            .unwrap_or(0) as u32
    }

    pub fn largest_frozen(&mut self) -> u32 {
        let mut best = 0;
        for v in 0..self.n {
            if self.frozen[v as usize] && self.dsu.find(v) == v {
                best = best.max(self.dsu.size[v as usize]);
            }
        }
        best
    }

    pub fn coupled_classical_observables(&mut self) -> ClassicalObservables {
        let mut sizes = Vec::new();
        for v in 0..self.n {
            if self.classical.find(v) == v {
                sizes.push(self.classical.size[v as usize]);
            }
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        ClassicalObservables {
            surplus_vertices: self.surplus_vertices,
            classical_sizes: sizes,
        }
    }

    pub fn surplus_vertices(&self) -> u64 {
        self.surplus_vertices
    }

    /// True iff the multiset of tree sizes of `F` equals the multiset of
    /// surplus-free component sizes of `G`. O(1).
    pub fn forests_coincide(&self) -> bool {
        self.forest_diff.mismatched == 0
    }

    /// Full structural audit, O(n): partition, kept-edge bookkeeping
    /// (trees have `size − 1` edges, frozen components `size`), counters.
    pub fn check_invariants(&mut self) -> std::result::Result<(), String> {
        let mut total = 0u64;
        let mut frozen = 0u64;
        let mut kept = 0u64;
        let mut hist = vec![0u32; self.n as usize + 1];
        for v in 0..self.n {
            if self.dsu.find(v) != v {
                continue;
            }
            let s = self.dsu.size[v as usize] as u64;
            let e = self.kept_edges[v as usize];
            total += s;
            kept += e;
            if self.frozen[v as usize] {
                frozen += s;
                if e != s {
                    return Err(format!("frozen component of size {s} has {e} edges"));
                }
            } else {
                hist[s as usize] += 1;
                if e + 1 != s {
                    return Err(format!("tree of size {s} has {e} edges"));
                }
            }
        }
        if total != self.n as u64 {
            return Err(format!("sizes sum to {total}, expected {}", self.n));
        }
        if frozen != self.frozen_vertices {
            return Err(format!("frozen count {} != {frozen}", self.frozen_vertices));
        }
        if kept + self.discarded != self.m {
            return Err(format!(
                "kept {kept} + discarded {} != m {}",
                self.discarded, self.m
            ));
        }
        if hist != self.tree_hist {
            return Err("tree histogram out of sync".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: u32, b: u32) -> EdgeSample {
        EdgeSample { a, b }
    }

    #[test]
    fn initial_state() {
        let mut g = GraphState::new(5, 0.5, 42).unwrap();
        let obs = g.observables();
        assert_eq!(obs.frozen_sizes, Vec::<u32>::new());
        assert_eq!(obs.standard_sizes, vec![1; 5]);
        assert_eq!(obs.frozen_mass_rescaled, 0.0);
        assert_eq!(g.frozen_vertices(), 0);
        assert_eq!(g.coupled_classical_observables().surplus_vertices, 0);
        let mut one = GraphState::new(1, 0.0, 7).unwrap();
        assert_eq!(
            one.components(),
            vec![ComponentRecord {
                root: 1,
                size: 1,
                status: Status::Tree
            }]
        );
    }

    #[test]
    fn config_errors() {
        assert!(matches!(GraphState::new(0, 0.5, 1), Err(Error::Config(_))));
        assert!(matches!(GraphState::new(3, 1.5, 1), Err(Error::Config(_))));
        assert!(matches!(GraphState::new(3, -0.1, 1), Err(Error::Config(_))));
    }

    #[test]
    fn transition_rules() {
        let mut g = GraphState::new(6, 0.5, 1).unwrap();
        assert_eq!(g.apply_sample(e(1, 2), 0.9), TransitionKind::TreeTreeMerge);
        assert_eq!(
            g.components()[0],
            ComponentRecord {
                root: 1,
                size: 2,
                status: Status::Tree
            }
        );
        assert_eq!(
            g.apply_sample(e(3, 3), 0.9),
            TransitionKind::TreeCycleFreeze
        );
        assert_eq!(g.apply_sample(e(4, 5), 0.9), TransitionKind::TreeTreeMerge);
        assert_eq!(
            g.apply_sample(e(5, 4), 0.9),
            TransitionKind::TreeCycleFreeze
        );
        assert_eq!(
            g.apply_sample(e(3, 4), 0.1),
            TransitionKind::FrozenFrozenDiscard
        );
        assert_eq!(
            g.apply_sample(e(4, 4), 0.1),
            TransitionKind::FrozenFrozenDiscard
        );
        assert_eq!(
            g.apply_sample(e(1, 3), 0.9),
            TransitionKind::TreeFrozenDiscarded
        );
        assert_eq!(g.apply_sample(e(2, 3), 0.5), TransitionKind::TreeFrozenKept);
        assert_eq!(g.frozen_vertices(), 5);
        assert_eq!(g.discarded(), 3);
        g.check_invariants().unwrap();
        let obs = g.observables();
        assert_eq!(obs.frozen_sizes, vec![3, 2]);
        assert_eq!(obs.standard_sizes, vec![1]);
    }

    #[test]
    fn window_arithmetic() {
        assert_eq!(window_edges(1000, 0.0).unwrap(), 500);
        assert_eq!(window_edges(1000, 2.0).unwrap(), 600);
        assert_eq!(window_edges(1000, -20.0).unwrap(), 0);
        let mut g = GraphState::new(1000, 0.5, 3).unwrap();
        g.run_to_time(2.0).unwrap();
        assert_eq!(g.m(), 600);
        assert!(matches!(g.run_to_time(0.0), Err(Error::Ordering(_))));
    }

    #[test]
    fn deterministic_trajectories() {
        let run = |seed| {
            let mut g = GraphState::new(300, 0.5, seed).unwrap();
            (0..600).map(|_| g.apply_edge()).collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }
}
