//! WAN graph model and the plain-text edge-list format.
//!
//! ```text
//! # comment
//! nodes 3
//! 0 1 1.0
//! 1 2 1.0
//! 0 2 1.0
//! ```
//!
//! Links are undirected and both directions share one capacity pool. Link ids
//! follow the order of appearance in the file, starting at 0.

use std::collections::{HashSet, VecDeque};
use std::fmt::{self, Write as _};
use std::io::BufRead;

use thiserror::Error;

/// Dense node index in `[0, node_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Dense link index in `[0, link_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub endpoints: (NodeId, NodeId),
    /// Bytes per unit time, shared by both directions.
    pub capacity: f64,
}

impl Link {
    /// The endpoint opposite `node`, if `node` is one of the endpoints.
    pub fn other(&self, node: NodeId) -> Option<NodeId> {
        match self.endpoints {
            (a, b) if a == node => Some(b),
            (a, b) if b == node => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing `nodes <N>` header")]
    MissingHeader,
    #[error("link {link}: self-loop on node {node}")]
    SelfLoop { link: usize, node: usize },
    #[error("link {link}: duplicate edge between nodes {u} and {v} (first seen as link {first})")]
    DuplicateEdge {
        link: usize,
        first: usize,
        u: usize,
        v: usize,
    },
    #[error("link {link}: node {node} out of range for {node_count} nodes")]
    NodeOutOfRange {
        link: usize,
        node: usize,
        node_count: usize,
    },
    #[error("link {link}: capacity must be positive and finite, got {capacity}")]
    BadCapacity { link: usize, capacity: f64 },
    #[error("capacity must be positive and finite, got {0}")]
    BadUniformCapacity(f64),
    #[error("graph is disconnected: node {unreachable} is unreachable from node 0")]
    Disconnected { unreachable: usize },
    #[error("topology needs at least one node")]
    Empty,
    #[error("io error: {0}")]
    Io(String),
}

/// Immutable, validated, connected WAN graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    links: Vec<Link>,
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
}

impl Topology {
    /// Builds and validates a topology from `(u, v, capacity)` triples.
    pub fn from_links(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        let mut links = Vec::new();
        let mut adjacency = vec![Vec::new(); node_count];
        let mut seen = std::collections::HashMap::new();
        for (idx, (u, v, capacity)) in edges.into_iter().enumerate() {
            for node in [u, v] {
                if node >= node_count {
                    return Err(TopologyError::NodeOutOfRange {
                        link: idx,
                        node,
                        node_count,
                    });
                }
            }
            if u == v {
                return Err(TopologyError::SelfLoop { link: idx, node: u });
            }
            if !(capacity > 0.0 && capacity.is_finite()) {
                return Err(TopologyError::BadCapacity {
                    link: idx,
                    capacity,
                });
            }
            let key = (u.min(v), u.max(v));
            if let Some(&first) = seen.get(&key) {
                return Err(TopologyError::DuplicateEdge {
                    link: idx,
                    first,
                    u,
                    v,
                });
            }
            seen.insert(key, idx);
            let id = LinkId(idx);
            adjacency[u].push((NodeId(v), id));
            adjacency[v].push((NodeId(u), id));
            links.push(Link {
                id,
                endpoints: (NodeId(u), NodeId(v)),
                capacity,
            });
        }
        let topo = Topology { links, adjacency };
        if let Some(unreachable) = topo.first_unreachable() {
            return Err(TopologyError::Disconnected { unreachable });
        }
        Ok(topo)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn capacity(&self, id: LinkId) -> f64 {
        self.links[id.0].capacity
    }

    /// `(neighbor, link)` pairs incident to `node`, in link-id order.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[node.0]
    }

    pub fn adjacency(&self) -> &[Vec<(NodeId, LinkId)>] {
        &self.adjacency
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.0].len()
    }

    /// Link joining `a` and `b`, if any.
    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.adjacency[a.0]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, l)| l)
    }

    /// Same graph with every capacity replaced by `capacity`.
    pub fn with_uniform_capacity(&self, capacity: f64) -> Result<Self, TopologyError> {
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(TopologyError::BadUniformCapacity(capacity));
        }
        let mut out = self.clone();
        for link in &mut out.links {
            link.capacity = capacity;
        }
        Ok(out)
    }

    /// Serializes to the edge-list format accepted by [`load_topology`].
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count());
        for link in &self.links {
            // `{}` on f64 prints the shortest string that round-trips.
            let _ = writeln!(
                out,
                "{} {} {}",
                link.endpoints.0, link.endpoints.1, link.capacity
            );
        }
        out
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &(m, _) in &self.adjacency[n] {
                if !seen[m.0] {
                    seen[m.0] = true;
                    queue.push_back(m.0);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// Parses and validates a topology from the edge-list text format.
pub fn load_topology<R: BufRead>(source: R) -> Result<Topology, TopologyError> {
    let mut node_count = None;
    let mut edges = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| TopologyError::Io(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |msg: String| TopologyError::Parse { line: lineno, msg };
        match node_count {
            None => {
                if fields.len() != 2 || fields[0] != "nodes" {
                    return Err(parse_err(format!("expected `nodes <N>`, got `{line}`")));
                }
                let n = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad node count `{}`: {e}", fields[1])))?;
                node_count = Some(n);
            }
            Some(_) => {
                if fields.len() != 3 {
                    return Err(parse_err(format!(
                        "expected `<u> <v> <capacity>`, got `{line}`"
                    )));
                }
                let u = fields[0]
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad node `{}`: {e}", fields[0])))?;
                let v = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad node `{}`: {e}", fields[1])))?;
                let c = fields[2]
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("bad capacity `{}`: {e}", fields[2])))?;
                edges.push((u, v, c));
            }
        }
    }
    let node_count = node_count.ok_or(TopologyError::MissingHeader)?;
    Topology::from_links(node_count, edges)
}

/// Loads a topology file from disk.
pub fn load_topology_file(path: impl AsRef<std::path::Path>) -> Result<Topology, TopologyError> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| TopologyError::Io(format!("{}: {e}", path.as_ref().display())))?;
    load_topology(std::io::BufReader::new(file))
}

/// Set of undirected edges as sorted endpoint pairs; handy for comparisons.
pub fn edge_set(topology: &Topology) -> HashSet<(usize, usize)> {
    topology
        .links()
        .iter()
        .map(|l| {
            let (a, b) = (l.endpoints.0 .0, l.endpoints.1 .0);
            (a.min(b), a.max(b))
        })
        .collect()
}
