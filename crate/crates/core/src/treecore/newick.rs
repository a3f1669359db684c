//! Newick reading and writing.
//!
//! A leading bracket comment `[&metric=dist]` or `[&metric=prob]` says
//! whether branch annotations are distances (`-ln` closeness) or mutation
//! probabilities. Other comments are skipped.

use std::fmt::Write as _;

use super::{EvoNode, LeafId, RootedEvoTree, TopoEdge, WeightedTopology};
use crate::error::{invalid, Error, Result};
use crate::fmt_real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Dist,
    Prob,
}

impl Metric {
    fn tag(self) -> &'static str {
        match self {
            Metric::Dist => "[&metric=dist]",
            Metric::Prob => "[&metric=prob]",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewickNode {
    pub name: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// A parsed Newick tree, before it is interpreted as a topology or a
/// rooted evolutionary tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NewickTree {
    pub nodes: Vec<NewickNode>,
    pub root: usize,
    pub metric: Option<Metric>,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Newick { offset, message: message.into() }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    metric: Option<Metric>,
}

impl Parser<'_> {
    fn skip_blank(&mut self) -> Result<()> {
        loop {
            match self.src.get(self.pos) {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => self.comment()?,
                _ => return Ok(()),
            }
        }
    }

    fn comment(&mut self) -> Result<()> {
        let start = self.pos;
        let end = self.src[start..]
            .iter()
            .position(|&c| c == b']')
            .map(|i| start + i)
            .ok_or_else(|| syntax(start, "unterminated comment"))?;
        let body = std::str::from_utf8(&self.src[start + 1..end])
            .map_err(|_| syntax(start, "comment is not UTF-8"))?;
        if let Some(meta) = body.strip_prefix('&') {
            for pair in meta.split(',') {
                let mut kv = pair.splitn(2, '=');
                if kv.next().map(str::trim) == Some("metric") {
                    self.metric = match kv.next().map(str::trim) {
                        Some("dist") => Some(Metric::Dist),
                        Some("prob") => Some(Metric::Prob),
                        other => {
                            return Err(syntax(start, format!("unknown metric {other:?}")));
                        }
                    };
                }
            }
        }
        self.pos = end + 1;
        Ok(())
    }

    fn label(&mut self) -> Result<Option<String>> {
        self.skip_blank()?;
        if self.src.get(self.pos) == Some(&b'\'') {
            let start = self.pos;
            self.pos += 1;
            let mut out = Vec::new();
            loop {
                match self.src.get(self.pos) {
                    None => return Err(syntax(start, "unterminated quoted label")),
                    Some(b'\'') if self.src.get(self.pos + 1) == Some(&b'\'') => {
                        out.push(b'\'');
                        self.pos += 2;
                    }
                    Some(b'\'') => {
                        self.pos += 1;
                        break;
                    }
                    Some(&c) => {
                        out.push(c);
                        self.pos += 1;
                    }
                }
            }
            return String::from_utf8(out).map(Some).map_err(|_| syntax(start, "label is not UTF-8"));
        }
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_whitespace() || b"()[]':;,".contains(&c) {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let s = std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| syntax(start, "label is not UTF-8"))?;
        Ok(Some(s.to_string()))
    }

    fn length(&mut self) -> Result<Option<f64>> {
        self.skip_blank()?;
        if self.src.get(self.pos) != Some(&b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_blank()?;
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if !(c.is_ascii_digit() || b"+-.eE".contains(&c)) {
                break;
            }
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Some)
            .map_err(|_| syntax(start, format!("bad branch length {text:?}")))
    }
}

/// Parses one semicolon-terminated Newick tree.
pub fn parse_newick(text: &str) -> Result<NewickTree> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, metric: None };
    let mut nodes: Vec<NewickNode> = Vec::new();
    // Open internal nodes with the offset of their '('.
    let mut open: Vec<(usize, usize)> = Vec::new();

    let new_node = |nodes: &mut Vec<NewickNode>, parent: Option<usize>| {
        let id = nodes.len();
        nodes.push(NewickNode { name: None, length: None, children: vec![], parent });
        if let Some(par) = parent {
            nodes[par].children.push(id);
        }
        id
    };

    'subtree: loop {
        p.skip_blank()?;
        let parent = open.last().map(|&(id, _)| id);
        if !nodes.is_empty() && parent.is_none() {
            return Err(syntax(p.pos, "text after the root subtree"));
        }
        if p.src.get(p.pos) == Some(&b'(') {
            let id = new_node(&mut nodes, parent);
            open.push((id, p.pos));
            p.pos += 1;
            continue 'subtree;
        }
        let id = new_node(&mut nodes, parent);
        nodes[id].name = p.label()?;
        nodes[id].length = p.length()?;

        loop {
            p.skip_blank()?;
            match p.src.get(p.pos) {
                Some(b',') => {
                    if open.is_empty() {
                        return Err(syntax(p.pos, "',' outside parentheses"));
                    }
                    p.pos += 1;
                    continue 'subtree;
                }
                Some(b')') => {
                    let Some((closed, _)) = open.pop() else {
                        return Err(syntax(p.pos, "unbalanced ')'"));
                    };
                    p.pos += 1;
                    nodes[closed].name = p.label()?;
                    nodes[closed].length = p.length()?;
                }
                Some(b';') => {
                    if let Some(&(_, at)) = open.last() {
                        return Err(syntax(at, "unclosed parenthesis"));
                    }
                    p.pos += 1;
                    p.skip_blank()?;
                    if p.pos != p.src.len() {
                        return Err(syntax(p.pos, "trailing text after ';'"));
                    }
                    return Ok(NewickTree { nodes, root: 0, metric: p.metric });
                }
                None => {
                    if let Some(&(_, at)) = open.last() {
                        return Err(syntax(at, "unclosed parenthesis"));
                    }
                    return Err(syntax(p.pos, "missing ';'"));
                }
                Some(&c) => {
                    return Err(syntax(p.pos, format!("unexpected character {:?}", c as char)));
                }
            }
        }
    }
}

impl NewickTree {
    fn leaves(&self) -> Result<Vec<(usize, String)>> {
        // Preorder keeps leaf ids in reading order.
        let mut out = vec![];
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            let node = &self.nodes[u];
            if node.children.is_empty() {
                let name = node.name.clone().ok_or_else(|| invalid("leaf without a name"))?;
                out.push((u, name));
            }
            stack.extend(node.children.iter().rev());
        }
        Ok(out)
    }

    /// Interprets the tree as an unrooted topology with distance lengths.
    /// A bifurcating root and any other degree-2 node are suppressed, their
    /// two edges merged with lengths summed.
    pub fn to_topology(&self) -> Result<WeightedTopology> {
        if self.metric == Some(Metric::Prob) {
            return Err(invalid(
                "tree carries mutation probabilities; read it as a rooted tree instead",
            ));
        }
        let leaves = self.leaves()?;
        let count = self.nodes.len();
        let mut leaf_of = vec![None; count];
        let mut names = Vec::with_capacity(leaves.len());
        for (i, (node, name)) in leaves.into_iter().enumerate() {
            leaf_of[node] = Some(LeafId(i));
            names.push(name);
        }

        // Undirected adjacency with lengths; contract unlabeled degree <= 2.
        let mut adj: Vec<Vec<(usize, Option<f64>)>> = vec![vec![]; count];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(par) = node.parent {
                adj[i].push((par, node.length));
                adj[par].push((i, node.length));
            }
        }
        let mut alive = vec![true; count];
        let mut queue: Vec<usize> = (0..count).filter(|&u| leaf_of[u].is_none()).collect();
        while let Some(u) = queue.pop() {
            if !alive[u] || leaf_of[u].is_some() {
                continue;
            }
            match adj[u].len() {
                1 => {
                    let (v, _) = adj[u][0];
                    adj[v].retain(|&(w, _)| w != u);
                    adj[u].clear();
                    alive[u] = false;
                    queue.push(v);
                }
                2 => {
                    let (a, la) = adj[u][0];
                    let (b, lb) = adj[u][1];
                    let merged = la.zip(lb).map(|(x, y)| x + y);
                    for (x, y) in [(a, b), (b, a)] {
                        for slot in adj[x].iter_mut() {
                            if slot.0 == u {
                                *slot = (y, merged);
                            }
                        }
                    }
                    adj[u].clear();
                    alive[u] = false;
                }
                _ => {}
            }
        }

        let mut index = vec![usize::MAX; count];
        let mut node_leaf = vec![];
        for u in (0..count).filter(|&u| alive[u]) {
            index[u] = node_leaf.len();
            node_leaf.push(leaf_of[u]);
        }
        let mut edges = vec![];
        for u in (0..count).filter(|&u| alive[u]) {
            for &(v, length) in &adj[u] {
                if u < v {
                    edges.push(TopoEdge { a: index[u], b: index[v], length, weight: None });
                }
            }
        }
        WeightedTopology::from_edges(names, node_leaf, edges)
    }

    /// Interprets the tree as a rooted binary evolutionary tree for an
    /// alphabet of size `m`. Lengths are probabilities unless the metric
    /// comment says `dist`, in which case they are converted.
    pub fn to_rooted(&self, m: usize) -> Result<RootedEvoTree> {
        if m < 2 {
            return Err(invalid("alphabet size must be at least 2"));
        }
        let alpha = m as f64 / (m as f64 - 1.0);
        let leaves = self.leaves()?;
        let mut leaf_of = vec![None; self.nodes.len()];
        let mut names = Vec::with_capacity(leaves.len());
        for (i, (node, name)) in leaves.into_iter().enumerate() {
            leaf_of[node] = Some(LeafId(i));
            names.push(name);
        }
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let prob = match (node.parent, node.length) {
                    (None, _) => 0.0,
                    (Some(_), None) => return Err(invalid(format!("edge above node {i} has no length"))),
                    (Some(_), Some(len)) => match self.metric {
                        Some(Metric::Dist) => (1.0 - (-len).exp()) / alpha,
                        _ => len,
                    },
                };
                Ok(EvoNode {
                    parent: node.parent,
                    children: node.children.clone(),
                    leaf: leaf_of[i],
                    mutation_prob: prob,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RootedEvoTree::from_nodes(nodes, self.root, names, m)
    }
}

fn quote(name: &str) -> String {
    if name.bytes().any(|c| c.is_ascii_whitespace() || b"()[]':;,".contains(&c)) {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_string()
    }
}

/// Iterative writer over a child-list view of a tree.
fn write_tree(
    metric: Metric,
    root: usize,
    children: impl Fn(usize) -> Vec<usize>,
    label: impl Fn(usize) -> Option<String>,
    length: impl Fn(usize) -> Option<f64>,
) -> String {
    enum Step {
        Enter(usize, bool),
        Exit(usize),
    }
    let mut out = String::from(metric.tag());
    let mut stack = vec![Step::Enter(root, true)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Enter(u, first) => {
                if !first {
                    out.push(',');
                }
                let kids = children(u);
                if kids.is_empty() {
                    out.push_str(&label(u).unwrap_or_default());
                    if let Some(len) = length(u) {
                        let _ = write!(out, ":{}", fmt_real(len));
                    }
                } else {
                    out.push('(');
                    stack.push(Step::Exit(u));
                    for (i, &k) in kids.iter().enumerate().rev() {
                        stack.push(Step::Enter(k, i == 0));
                    }
                }
            }
            Step::Exit(u) => {
                out.push(')');
                if let Some(len) = length(u) {
                    let _ = write!(out, ":{}", fmt_real(len));
                }
            }
        }
    }
    out.push(';');
    out
}

impl WeightedTopology {
    pub fn from_newick(text: &str) -> Result<Self> {
        parse_newick(text)?.to_topology()
    }

    /// Newick text with distance lengths, rooted at the internal node next
    /// to leaf 0 (so the outermost group is a trifurcation).
    pub fn to_newick(&self) -> String {
        let root = self.neighbors(self.leaf_node(LeafId(0)))[0].0;
        // Parent pointers (as edge ids) from the chosen root.
        let mut parent = vec![(usize::MAX, usize::MAX); self.node_count()];
        let mut stack = vec![root];
        parent[root] = (root, usize::MAX);
        while let Some(u) = stack.pop() {
            for &(v, e) in self.neighbors(u) {
                if parent[v].0 == usize::MAX {
                    parent[v] = (u, e);
                    stack.push(v);
                }
            }
        }
        write_tree(
            Metric::Dist,
            root,
            |u| {
                self.neighbors(u)
                    .iter()
                    .filter(|&&(v, _)| v != parent[u].0)
                    .map(|&(v, _)| v)
                    .collect()
            },
            |u| self.leaf_of(u).map(|l| quote(self.name(l))),
            |u| if u == root { None } else { self.edges()[parent[u].1].length },
        )
    }
}

impl RootedEvoTree {
    pub fn from_newick(text: &str, m: usize) -> Result<Self> {
        parse_newick(text)?.to_rooted(m)
    }

    /// Newick text with mutation probabilities as branch annotations.
    pub fn to_newick(&self) -> String {
        write_tree(
            Metric::Prob,
            self.root(),
            |u| self.nodes()[u].children.clone(),
            |u| self.nodes()[u].leaf.map(|l| quote(self.name(l))),
            |u| if u == self.root() { None } else { Some(self.nodes()[u].mutation_prob) },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{gen_tree, EdgeProbSampler, EvoModel, TreeShape};
    use crate::treecore::{bipartitions, rf_distance, suppress_root};

    #[test]
    fn parses_four_leaf_rooted_text_as_quartet() {
        let t = WeightedTopology::from_newick("(A:0.1,B:0.1,(C:0.1,D:0.1):0.1);").unwrap();
        assert_eq!(t.n_leaves(), 4);
        assert_eq!(bipartitions(&t).len(), 1);
        t.validate().unwrap();
    }

    #[test]
    fn unclosed_parenthesis_reports_its_offset() {
        match parse_newick("(A,(B);") {
            Err(Error::Newick { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
        match parse_newick("(A,(B,C);") {
            Err(Error::Newick { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
        match parse_newick("(A,B));") {
            Err(Error::Newick { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_newick("(A,B)"), Err(Error::Newick { offset: 5, .. })));
    }

    #[test]
    fn duplicate_leaf_names_are_rejected() {
        let err = WeightedTopology::from_newick("(A,B,(A,C));").unwrap_err();
        assert!(matches!(err, Error::DuplicateLeaf(ref n) if n == "A"));
    }

    #[test]
    fn metric_comment_is_read() {
        let t = parse_newick("[&metric=prob]((A:0.1,B:0.1):0.1,C:0.2);").unwrap();
        assert_eq!(t.metric, Some(Metric::Prob));
        assert!(t.to_topology().is_err());
        let rooted = t.to_rooted(4).unwrap();
        assert_eq!(rooted.n_leaves(), 3);
        assert!(parse_newick("[&metric=bogus](A,B,C);").is_err());
    }

    #[test]
    fn quoted_labels_round_trip() {
        let t = WeightedTopology::from_newick("('a b':1,'it''s':2,c:3);").unwrap();
        assert_eq!(t.names(), &["a b", "it's", "c"]);
        let again = WeightedTopology::from_newick(&t.to_newick()).unwrap();
        assert_eq!(again.names(), t.names());
    }

    #[test]
    fn random_fifty_leaf_round_trip() {
        let model = EvoModel::new(4, 0.05, 0.1).unwrap();
        let rooted =
            gen_tree(50, TreeShape::Uniform, &model, EdgeProbSampler::default_for(&model), 11)
                .unwrap();
        let topo = suppress_root(&rooted);
        let text = topo.to_newick();
        assert!(text.starts_with("[&metric=dist]("));
        let back = WeightedTopology::from_newick(&text).unwrap();
        assert_eq!(rf_distance(&topo, &back).unwrap(), 0);
        assert_eq!(crate::treecore::max_length_error(&back, &topo).unwrap(), 0.0);

        let rooted_back = RootedEvoTree::from_newick(&rooted.to_newick(), 4).unwrap();
        let sorted = |t: &RootedEvoTree| {
            let mut v = t.names().to_vec();
            v.sort();
            v
        };
        assert_eq!(sorted(&rooted_back), sorted(&rooted));
        let a = suppress_root(&rooted_back);
        assert_eq!(rf_distance(&a, &topo).unwrap(), 0);
        assert_eq!(crate::treecore::max_length_error(&a, &topo).unwrap(), 0.0);
    }

    #[test]
    fn deep_caterpillar_does_not_recurse() {
        let model = EvoModel::new(4, 0.05, 0.1).unwrap();
        let rooted =
            gen_tree(5000, TreeShape::Caterpillar, &model, EdgeProbSampler::default_for(&model), 1)
                .unwrap();
        let back = RootedEvoTree::from_newick(&rooted.to_newick(), 4).unwrap();
        assert_eq!(back.n_leaves(), 5000);
    }
}
