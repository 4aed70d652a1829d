//! Tree decompositions: heuristic construction, validation and nice form.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::AtomTable;
use crate::graphs::{Tag, TaggedGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    #[default]
    MinFill,
    MinDegree,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "min-fill" => Ok(Heuristic::MinFill),
            "min-degree" => Ok(Heuristic::MinDegree),
            other => Err(format!("unknown heuristic `{other}`")),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::MinFill => "min-fill",
            Heuristic::MinDegree => "min-degree",
        })
    }
}

/// A rooted tree of bags over graph vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<BTreeSet<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl TreeDecomposition {
    /// Builds a decomposition from bags and parent pointers. Exactly one node
    /// must lack a parent and the pointers must form a tree.
    pub fn from_parents(bags: Vec<BTreeSet<usize>>, parent: Vec<Option<usize>>) -> Result<Self> {
        if bags.is_empty() || bags.len() != parent.len() {
            return Err(Error::InvalidInput("malformed decomposition".into()));
        }
        let roots: Vec<usize> = (0..bags.len()).filter(|&t| parent[t].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "expected one root, found {}",
                roots.len()
            )));
        }
        let mut children = vec![Vec::new(); bags.len()];
        for (t, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= bags.len() {
                    return Err(Error::InvalidInput(format!("parent {p} out of range")));
                }
                children[p].push(t);
            }
        }
        let td = Self {
            bags,
            parent,
            children,
            root: roots[0],
        };
        if td.post_order().len() != td.len() {
            return Err(Error::InvalidInput(
                "parent pointers contain a cycle".into(),
            ));
        }
        Ok(td)
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn bag(&self, t: usize) -> &BTreeSet<usize> {
        &self.bags[t]
    }

    pub fn parent(&self, t: usize) -> Option<usize> {
        self.parent[t]
    }

    pub fn children(&self, t: usize) -> &[usize] {
        &self.children[t]
    }

    /// Largest bag size minus one, and 0 when every bag is empty.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(BTreeSet::len)
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Nodes reachable from the root, children before parents.
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root, false)];
        let mut seen = vec![false; self.len()];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                order.push(t);
                continue;
            }
            if std::mem::replace(&mut seen[t], true) {
                continue;
            }
            stack.push((t, true));
            for &c in self.children[t].iter().rev() {
                stack.push((c, false));
            }
        }
        order
    }

    /// Depth of the tree in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.len()];
        let mut best = 0;
        for t in self.post_order().into_iter().rev() {
            if let Some(p) = self.parent[t] {
                depth[t] = depth[p] + 1;
                best = best.max(depth[t]);
            }
        }
        best
    }

    pub fn to_dot(&self, graph: &TaggedGraph, table: &AtomTable) -> String {
        let mut out = String::from("graph TD {\n  node [shape=box];\n");
        for t in 0..self.len() {
            let label = bag_label(graph, table, &self.bags[t]);
            let _ = writeln!(out, "  n{t} [label=\"{label}\"];");
        }
        for t in 0..self.len() {
            for &c in &self.children[t] {
                let _ = writeln!(out, "  n{t} -- n{c};");
            }
        }
        out.push_str("}\n");
        out
    }
}

fn bag_label(graph: &TaggedGraph, table: &AtomTable, bag: &BTreeSet<usize>) -> String {
    let names: Vec<String> = bag
        .iter()
        .map(|&v| {
            let vertex = graph.vertex(v);
            let tag = if vertex.tag == Tag::A { "a" } else { "e" };
            format!("{}^{tag}", table.name(vertex.atom))
        })
        .collect();
    format!("{{{}}}", names.join(", "))
}

/// Checks vertex coverage, edge coverage and connectedness of occurrences.
pub fn validate_td(graph: &TaggedGraph, td: &TreeDecomposition) -> bool {
    if td.post_order().len() != td.len() {
        return false;
    }
    if td.bags.iter().flatten().any(|&v| v >= graph.len()) {
        return false;
    }
    for v in 0..graph.len() {
        let holders: Vec<usize> = (0..td.len()).filter(|&t| td.bags[t].contains(&v)).collect();
        if holders.is_empty() {
            return false;
        }
        // Nodes holding v are connected iff exactly one of them has its
        // parent outside the set.
        let tops = holders
            .iter()
            .filter(|&&t| td.parent[t].is_none_or(|p| !td.bags[p].contains(&v)))
            .count();
        if tops != 1 {
            return false;
        }
    }
    graph
        .edges()
        .iter()
        .all(|&(u, v)| td.bags.iter().any(|b| b.contains(&u) && b.contains(&v)))
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let n: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &x) in n.iter().enumerate() {
        for &y in &n[i + 1..] {
            if !adj[x].contains(&y) {
                missing += 1;
            }
        }
    }
    missing
}

/// Bucket elimination along a greedy ordering; ties are broken by a
/// seed-derived random key per vertex.
pub fn build_td(graph: &TaggedGraph, heuristic: Heuristic, seed: u64) -> TreeDecomposition {
    let n = graph.len();
    if n == 0 {
        return TreeDecomposition::from_parents(vec![BTreeSet::new()], vec![None]).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<u64> = (0..n).map(|_| rng.gen()).collect();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| graph.neighbors(v).clone()).collect();
    let score = |adj: &[BTreeSet<usize>], v: usize| match heuristic {
        Heuristic::MinFill => fill_in(adj, v),
        Heuristic::MinDegree => adj[v].len(),
    };
    let mut scores: Vec<usize> = (0..n).map(|v| score(&adj, v)).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut bags = Vec::with_capacity(n);

    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (scores[v], keys[v]))
            .expect("a live vertex");
        let neighbours: Vec<usize> = adj[v].iter().copied().collect();
        let mut bag: BTreeSet<usize> = adj[v].clone();
        bag.insert(v);
        bags.push(bag);
        order.push(v);
        alive[v] = false;
        for (i, &x) in neighbours.iter().enumerate() {
            adj[x].remove(&v);
            for &y in &neighbours[i + 1..] {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        adj[v].clear();
        let mut touched: BTreeSet<usize> = neighbours.iter().copied().collect();
        if heuristic == Heuristic::MinFill {
            for &x in &neighbours {
                touched.extend(adj[x].iter().copied());
            }
        }
        for x in touched {
            scores[x] = score(&adj, x);
        }
    }

    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut roots = Vec::new();
    for (i, bag) in bags.iter().enumerate() {
        let v = order[i];
        match bag.iter().filter(|&&u| u != v).map(|&u| position[u]).min() {
            Some(p) => parent[i] = Some(p),
            None => roots.push(i),
        }
    }
    for pair in roots.windows(2) {
        parent[pair[0]] = Some(pair[1]);
    }
    TreeDecomposition::from_parents(bags, parent).expect("elimination yields a tree")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Introduce(usize),
    Remove(usize),
    Join,
}

/// A decomposition whose nodes are leaves with empty bags, introduce and
/// remove nodes changing one vertex, and binary joins; the root bag is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTd {
    td: TreeDecomposition,
    kinds: Vec<NodeKind>,
}

#[derive(Default)]
struct NiceBuilder {
    bags: Vec<BTreeSet<usize>>,
    parent: Vec<Option<usize>>,
    kinds: Vec<NodeKind>,
}

impl NiceBuilder {
    fn add(&mut self, kind: NodeKind, bag: BTreeSet<usize>, children: &[usize]) -> usize {
        let id = self.bags.len();
        self.bags.push(bag);
        self.parent.push(None);
        self.kinds.push(kind);
        for &c in children {
            self.parent[c] = Some(id);
        }
        id
    }

    /// Moves from the top of a subtree with bag `from` to bag `to`.
    fn transition(
        &mut self,
        mut top: usize,
        from: &BTreeSet<usize>,
        to: &BTreeSet<usize>,
    ) -> usize {
        let mut bag = from.clone();
        for &v in from.difference(to) {
            bag.remove(&v);
            top = self.add(NodeKind::Remove(v), bag.clone(), &[top]);
        }
        for &v in to.difference(from) {
            bag.insert(v);
            top = self.add(NodeKind::Introduce(v), bag.clone(), &[top]);
        }
        top
    }
}

/// Nice form of `td` with the same width. Children get smaller ids than
/// their parents.
pub fn make_nice(td: &TreeDecomposition) -> NiceTd {
    let empty = BTreeSet::new();
    let mut b = NiceBuilder::default();
    let mut top = vec![usize::MAX; td.len()];
    for t in td.post_order() {
        let bag = td.bag(t);
        let branches: Vec<usize> = if td.children(t).is_empty() {
            let leaf = b.add(NodeKind::Leaf, BTreeSet::new(), &[]);
            vec![b.transition(leaf, &empty, bag)]
        } else {
            td.children(t)
                .iter()
                .map(|&c| b.transition(top[c], td.bag(c), bag))
                .collect()
        };
        let mut acc = branches[0];
        for &other in &branches[1..] {
            acc = b.add(NodeKind::Join, bag.clone(), &[acc, other]);
        }
        top[t] = acc;
    }
    b.transition(top[td.root()], td.bag(td.root()), &empty);
    let td =
        TreeDecomposition::from_parents(b.bags, b.parent).expect("nice construction yields a tree");
    NiceTd { td, kinds: b.kinds }
}

impl NiceTd {
    /// Builds a nice decomposition from explicit nodes, checking niceness.
    pub fn from_nodes(nodes: Vec<(NodeKind, BTreeSet<usize>, Option<usize>)>) -> Result<Self> {
        let (kinds, rest): (Vec<NodeKind>, Vec<_>) =
            nodes.into_iter().map(|(k, b, p)| (k, (b, p))).unzip();
        let (bags, parent) = rest.into_iter().unzip();
        let nice = Self {
            td: TreeDecomposition::from_parents(bags, parent)?,
            kinds,
        };
        nice.check().map_err(Error::InvalidInput)?;
        Ok(nice)
    }

    pub fn td(&self) -> &TreeDecomposition {
        &self.td
    }

    pub fn kind(&self, t: usize) -> NodeKind {
        self.kinds[t]
    }

    pub fn width(&self) -> usize {
        self.td.width()
    }

    pub fn len(&self) -> usize {
        self.td.len()
    }

    pub fn is_empty(&self) -> bool {
        self.td.is_empty()
    }

    /// Verifies the local shape of every node.
    pub fn check(&self) -> std::result::Result<(), String> {
        let td = &self.td;
        if !td.bag(td.root()).is_empty() {
            return Err("root bag is not empty".into());
        }
        for t in 0..td.len() {
            let bag = td.bag(t);
            let ch = td.children(t);
            let ok = match self.kinds[t] {
                NodeKind::Leaf => ch.is_empty() && bag.is_empty(),
                NodeKind::Introduce(v) => {
                    ch.len() == 1 && {
                        let mut expected = td.bag(ch[0]).clone();
                        expected.insert(v) && &expected == bag
                    }
                }
                NodeKind::Remove(v) => {
                    ch.len() == 1 && {
                        let mut expected = td.bag(ch[0]).clone();
                        expected.remove(&v) && &expected == bag
                    }
                }
                NodeKind::Join => ch.len() == 2 && ch.iter().all(|&c| td.bag(c) == bag),
            };
            if !ok {
                return Err(format!(
                    "node {t} is not a well-formed {:?} node",
                    self.kinds[t]
                ));
            }
        }
        Ok(())
    }

    pub fn stats(&self) -> TdStats {
        let mut s = TdStats {
            width: self.width(),
            nodes: self.len(),
            ..TdStats::default()
        };
        for kind in &self.kinds {
            match kind {
                NodeKind::Leaf => s.leaf += 1,
                NodeKind::Introduce(_) => s.introduce += 1,
                NodeKind::Remove(_) => s.remove += 1,
                NodeKind::Join => s.join += 1,
            }
        }
        s
    }

    pub fn to_dot(&self, graph: &TaggedGraph, table: &AtomTable) -> String {
        let mut out = String::from("graph NiceTD {\n  node [shape=box];\n");
        for t in 0..self.len() {
            let kind = match self.kinds[t] {
                NodeKind::Leaf => "leaf".to_owned(),
                NodeKind::Introduce(v) => format!("intr {}", bag_label(graph, table, &[v].into())),
                NodeKind::Remove(v) => format!("rem {}", bag_label(graph, table, &[v].into())),
                NodeKind::Join => "join".to_owned(),
            };
            let label = bag_label(graph, table, self.td.bag(t));
            let _ = writeln!(out, "  n{t} [label=\"t{t} {kind}\\n{label}\"];");
        }
        for t in 0..self.len() {
            for &c in self.td.children(t) {
                let _ = writeln!(out, "  n{t} -- n{c};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Summary figures of a nice decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TdStats {
    pub width: usize,
    pub nodes: usize,
    pub leaf: usize,
    pub introduce: usize,
    pub remove: usize,
    pub join: usize,
}

impl fmt::Display for TdStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width\t{}", self.width)?;
        writeln!(f, "nodes\t{}", self.nodes)?;
        writeln!(f, "leaf\t{}", self.leaf)?;
        writeln!(f, "intr\t{}", self.introduce)?;
        writeln!(f, "rem\t{}", self.remove)?;
        write!(f, "join\t{}", self.join)
    }
}
