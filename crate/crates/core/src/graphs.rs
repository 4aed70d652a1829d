//! Graph representations of programs and the abstraction machinery used by
//! nested dynamic programming.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::atoms::{Atom, AtomTable};
use crate::decomp::TreeDecomposition;
use crate::program::{BodyElement, Program, Rule};
use crate::{Error, Result};

/// `a` marks an objective occurrence, `e` an epistemic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    A,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub atom: Atom,
    pub tag: Tag,
}

impl Vertex {
    pub fn a(atom: Atom) -> Self {
        Self { atom, tag: Tag::A }
    }

    pub fn e(atom: Atom) -> Self {
        Self { atom, tag: Tag::E }
    }
}

/// Simple undirected graph over tagged atom vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaggedGraph {
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl TaggedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// A graph on the given vertices, kept in the given order.
    pub fn with_vertices(vertices: impl IntoIterator<Item = Vertex>) -> Self {
        let mut g = Self::new();
        for v in vertices {
            g.add_vertex(v);
        }
        g
    }

    /// Untagged test graph on `n` vertices `Atom(0..n)` with the given edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::with_vertices((0..n as u32).map(|i| Vertex::a(Atom(i))));
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_vertex(&mut self, v: Vertex) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(v);
        self.index.insert(v, i);
        self.adjacency.push(BTreeSet::new());
        i
    }

    /// Adds `{u, v}` unless it is a self-loop.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adjacency[u].insert(v);
            self.adjacency[v].insert(u);
        }
    }

    fn add_clique(&mut self, members: &[usize]) {
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                self.add_edge(u, v);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vertex {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn neighbors(&self, i: usize) -> &BTreeSet<usize> {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(&v)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, n)| n.range(u + 1..).map(move |&v| (u, v)))
            .collect()
    }

    /// Edges as atom pairs, for graphs with one vertex per atom.
    pub fn atom_edges(&self) -> Vec<(Atom, Atom)> {
        self.edges()
            .into_iter()
            .map(|(u, v)| (self.vertices[u].atom, self.vertices[v].atom))
            .collect()
    }

    pub fn atoms_of<'a>(&self, vertices: impl IntoIterator<Item = &'a usize>) -> BTreeSet<Atom> {
        vertices
            .into_iter()
            .map(|&i| self.vertices[i].atom)
            .collect()
    }

    pub fn is_simple_and_symmetric(&self) -> bool {
        self.adjacency
            .iter()
            .enumerate()
            .all(|(u, n)| !n.contains(&u) && n.iter().all(|&v| self.adjacency[v].contains(&u)))
    }

    pub fn to_dot(&self, table: &AtomTable) -> String {
        let mut out = String::from("graph G {\n  node [shape=circle];\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let (suffix, style) = match v.tag {
                Tag::A => ("a", ", style=filled"),
                Tag::E => ("e", ""),
            };
            let _ = writeln!(
                out,
                "  v{i} [label=\"{}^{suffix}\"{style}];",
                table.name(v.atom)
            );
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  v{u} -- v{v};");
        }
        out.push_str("}\n");
        out
    }
}

fn occurrences(rule: &Rule) -> Vec<Vertex> {
    let mut occ: BTreeSet<Vertex> = rule.head.iter().map(|&a| Vertex::a(a)).collect();
    for elem in &rule.body {
        occ.insert(match *elem {
            BodyElement::Objective(lit) => Vertex::a(lit.atom),
            BodyElement::Epistemic { inner, .. } => Vertex::e(inner.atom),
        });
    }
    occ.into_iter().collect()
}

/// Primal graph: `a^a` for every atom, `a^e` for epistemic atoms, a clique on
/// the occurrences of each rule and the edge `{a^a, a^e}`.
pub fn primal_graph(program: &Program) -> TaggedGraph {
    let eats = program.epistemic_atoms();
    let mut vertices: BTreeSet<Vertex> = program.atoms().into_iter().map(Vertex::a).collect();
    vertices.extend(eats.iter().map(|&a| Vertex::e(a)));
    let mut g = TaggedGraph::with_vertices(vertices);
    for rule in &program.rules {
        let members: Vec<usize> = occurrences(rule)
            .into_iter()
            .map(|v| g.index_of(v).expect("vertex of a rule occurrence"))
            .collect();
        g.add_clique(&members);
    }
    for &a in &eats {
        let (u, v) = (
            g.index_of(Vertex::a(a)).unwrap(),
            g.index_of(Vertex::e(a)).unwrap(),
        );
        g.add_edge(u, v);
    }
    g
}

/// Epistemic atoms, adjacent when they share a purely epistemic rule.
pub fn epistemic_primal_graph(program: &Program) -> TaggedGraph {
    let mut g = TaggedGraph::with_vertices(program.epistemic_atoms().into_iter().map(Vertex::e));
    for rule in program.rules.iter().filter(|r| r.is_purely_epistemic()) {
        let members: Vec<usize> = rule
            .epistemic_atoms()
            .into_iter()
            .map(|a| g.index_of(Vertex::e(a)).unwrap())
            .collect();
        g.add_clique(&members);
    }
    g
}

/// A connected component of the primal graph after removing `A^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Atoms with a vertex in the component.
    pub atoms: BTreeSet<Atom>,
    /// Atoms of `A` whose `e`-vertex is adjacent to the component.
    pub neighbours: BTreeSet<Atom>,
}

/// Components of `primal − A^e`, ordered by their first vertex.
pub fn components(primal: &TaggedGraph, abstraction: &BTreeSet<Atom>) -> Vec<Component> {
    let removed = |v: Vertex| v.tag == Tag::E && abstraction.contains(&v.atom);
    let mut seen = vec![false; primal.len()];
    let mut out = Vec::new();
    for start in 0..primal.len() {
        if seen[start] || removed(primal.vertex(start)) {
            continue;
        }
        let mut comp = Component {
            atoms: BTreeSet::new(),
            neighbours: BTreeSet::new(),
        };
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            comp.atoms.insert(primal.vertex(u).atom);
            for &v in primal.neighbors(u) {
                let vertex = primal.vertex(v);
                if removed(vertex) {
                    comp.neighbours.insert(vertex.atom);
                } else if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Nested primal graph over `abstraction`, built from an existing primal
/// graph. Two atoms of `A` are adjacent when their `e`-vertices are adjacent
/// or connected through vertices outside `A^e`.
pub fn nested_from_primal(primal: &TaggedGraph, abstraction: &BTreeSet<Atom>) -> TaggedGraph {
    let mut g = TaggedGraph::with_vertices(abstraction.iter().map(|&a| Vertex::e(a)));
    for comp in components(primal, abstraction) {
        let members: Vec<usize> = comp
            .neighbours
            .iter()
            .map(|&a| g.index_of(Vertex::e(a)).unwrap())
            .collect();
        g.add_clique(&members);
    }
    for (u, v) in primal.edges() {
        let (x, y) = (primal.vertex(u), primal.vertex(v));
        if let (Some(i), Some(j)) = (g.index_of(x), g.index_of(y)) {
            g.add_edge(i, j);
        }
    }
    g
}

pub fn nested_primal_graph(program: &Program, abstraction: &BTreeSet<Atom>) -> Result<TaggedGraph> {
    let eats = program.epistemic_atoms();
    if let Some(a) = abstraction.iter().find(|a| !eats.contains(a)) {
        return Err(Error::InvalidInput(format!(
            "abstraction atom `{}` is not epistemic",
            program.table().name(*a)
        )));
    }
    Ok(nested_from_primal(&primal_graph(program), abstraction))
}

/// Components of `primal − A^e` together with their owning decomposition
/// nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatAssignment {
    pub components: Vec<Component>,
    /// Owning node of each component.
    pub owner: Vec<usize>,
    /// Union of the components owned by each node.
    pub nested_bag_atoms: Vec<BTreeSet<Atom>>,
}

impl CompatAssignment {
    pub fn owns_any(&self, node: usize) -> bool {
        self.owner.contains(&node)
    }
}

/// Atoms of the vertices in the bag of `node`.
pub fn bag_atoms(graph: &TaggedGraph, td: &TreeDecomposition, node: usize) -> BTreeSet<Atom> {
    graph.atoms_of(td.bag(node))
}

/// Assigns every component to the first node in post-order whose bag holds
/// all of its neighbours in `A`. `graph` is the nested primal graph that `td`
/// decomposes.
pub fn assign_compatible_sets(
    primal: &TaggedGraph,
    abstraction: &BTreeSet<Atom>,
    graph: &TaggedGraph,
    td: &TreeDecomposition,
) -> Result<CompatAssignment> {
    let comps = components(primal, abstraction);
    let order = td.post_order();
    let bags: Vec<BTreeSet<Atom>> = (0..td.len()).map(|t| bag_atoms(graph, td, t)).collect();
    let mut owner = Vec::with_capacity(comps.len());
    let mut nested_bag_atoms = vec![BTreeSet::new(); td.len()];
    for comp in &comps {
        let t = order
            .iter()
            .copied()
            .find(|&t| comp.neighbours.is_subset(&bags[t]))
            .ok_or_else(|| {
                Error::InvalidInput("decomposition has no bag covering a component".into())
            })?;
        owner.push(t);
        nested_bag_atoms[t].extend(comp.atoms.iter().copied());
    }
    Ok(CompatAssignment {
        components: comps,
        owner,
        nested_bag_atoms,
    })
}

/// Rule indices of the epistemic bag program `Π_t` and the nested bag program
/// `Π_t^A` of one node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BagPrograms {
    pub epistemic: Vec<usize>,
    pub nested: Vec<usize>,
}

/// `Π_t` holds the purely epistemic rules over the bag. `Π_t^A` holds the
/// rules whose objective atoms lie in `A_t` and whose epistemic atoms lie in
/// `A_t` or the bag.
pub fn bag_programs(
    program: &Program,
    bag: &BTreeSet<Atom>,
    nested_atoms: &BTreeSet<Atom>,
) -> BagPrograms {
    let mut out = BagPrograms::default();
    for (i, rule) in program.rules.iter().enumerate() {
        let eats = rule.epistemic_atoms();
        if rule.is_purely_epistemic() && eats.is_subset(bag) {
            out.epistemic.push(i);
        }
        if rule.objective_atoms().is_subset(nested_atoms)
            && eats
                .iter()
                .all(|a| nested_atoms.contains(a) || bag.contains(a))
        {
            out.nested.push(i);
        }
    }
    out
}
