use crate::cache::Policy;
use crate::{Error, NodeId, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    /// Capacity in content-size units. Ignored for the publisher.
    pub capacity: u64,
    pub policy: Policy,
    /// Next hop toward the publisher; `None` only for the publisher itself.
    pub parent: Option<NodeId>,
}

/// A tree of cache nodes rooted at the publisher.
#[derive(Clone, Debug)]
pub struct Topology {
    nodes: Vec<NodeSpec>,
    publisher: NodeId,
    depth: Vec<u32>,
    children: Vec<Vec<NodeId>>,
}

impl Topology {
    /// Validates that exactly one node (the publisher) has no parent and that
    /// every parent chain reaches it.
    pub fn new(nodes: Vec<NodeSpec>) -> Result<Self> {
        let roots: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].parent.is_none()).collect();
        let publisher = match roots.as_slice() {
            [p] => NodeId(*p as u32),
            [] => return Err(Error::config("topology", "no publisher (a node without parent)")),
            _ => return Err(Error::config("topology", "more than one node without parent")),
        };
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                if p.index() >= nodes.len() {
                    return Err(Error::config(
                        format!("topology.nodes[{i}].parent"),
                        format!("node `{}` has a dangling parent", n.name),
                    ));
                }
                children[p.index()].push(NodeId(i as u32));
            }
        }
        let mut depth = vec![0u32; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            let mut d = 0;
            let mut cur = i;
            while let Some(p) = nodes[cur].parent {
                d += 1;
                if d > nodes.len() as u32 {
                    return Err(Error::config(
                        format!("topology.nodes[{i}].parent"),
                        format!("node `{}` is on a parent cycle", n.name),
                    ));
                }
                cur = p.index();
            }
            depth[i] = d;
        }
        for (i, n) in nodes.iter().enumerate() {
            if NodeId(i as u32) != publisher && n.capacity == 0 {
                return Err(Error::config(
                    format!("topology.nodes[{i}].capacity"),
                    format!("node `{}` must have positive capacity", n.name),
                ));
            }
        }
        Ok(Self {
            nodes,
            publisher,
            depth,
            children,
        })
    }

    /// Publisher plus a chain of caches; `capacities[0]` sits next to the
    /// publisher and the last entry is the leaf.
    pub fn chain(capacities: &[u64], policy: Policy) -> Result<Self> {
        let mut nodes = vec![NodeSpec {
            name: "publisher".into(),
            capacity: 0,
            policy,
            parent: None,
        }];
        for (i, &cap) in capacities.iter().enumerate() {
            nodes.push(NodeSpec {
                name: format!("cache{}", i + 1),
                capacity: cap,
                policy,
                parent: Some(NodeId(i as u32)),
            });
        }
        Self::new(nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &NodeSpec {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Cache nodes, i.e. every node but the publisher.
    pub fn cache_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(move |&n| n != self.publisher)
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(|i| NodeId(i as u32))
    }

    pub fn publisher(&self) -> NodeId {
        self.publisher
    }

    pub fn is_publisher(&self, id: NodeId) -> bool {
        id == self.publisher
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id.index()]
    }

    /// Hops to the publisher (0 for the publisher).
    pub fn depth(&self, id: NodeId) -> u32 {
        self.depth[id.index()]
    }

    /// The first `hops` nodes on the way up from `origin`.
    pub fn path_up(&self, origin: NodeId, hops: u32) -> Vec<NodeId> {
        let mut path = Vec::with_capacity(hops as usize);
        let mut cur = origin;
        for _ in 0..hops {
            path.push(cur);
            match self.parent(cur) {
                Some(p) => cur = p,
                None => break,
            }
        }
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str, parent: Option<u32>) -> NodeSpec {
        NodeSpec {
            name: name.into(),
            capacity: 4,
            policy: Policy::Lru,
            parent: parent.map(NodeId),
        }
    }

    #[test]
    fn chain_depths_and_paths() {
        let t = Topology::chain(&[10, 5, 2], Policy::Lru).unwrap();
        assert_eq!(t.publisher(), NodeId(0));
        assert_eq!(t.depth(NodeId(3)), 3);
        assert_eq!(t.path_up(NodeId(3), 2), vec![NodeId(3), NodeId(2)]);
        assert_eq!(t.children(NodeId(1)), &[NodeId(2)]);
        assert_eq!(t.cache_ids().count(), 3);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Topology::new(vec![spec("a", Some(1)), spec("b", Some(0))]).is_err());
        assert!(Topology::new(vec![spec("a", None), spec("b", None)]).is_err());
        assert!(Topology::new(vec![spec("a", None), spec("b", Some(7))]).is_err());
        let cyc = vec![spec("p", None), spec("a", Some(2)), spec("b", Some(1))];
        assert!(Topology::new(cyc).is_err());
    }
}
