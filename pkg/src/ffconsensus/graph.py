"""Directed communication topology and measurement selectors.

Node 0 is the leader, nodes 1..N are followers.  ``weights[i, j]`` is the
weight a_ij with which follower ``i`` receives information from node ``j``;
an edge j -> i exists iff the weight is nonzero.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, NoSpanningTreeError, TopologyShapeError


@dataclass(frozen=True)
class Topology:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 2:
            raise ContractError(f"weight matrix must be square with at least 2 nodes, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ContractError("weight matrix has non-finite entries")
        if np.any(w < 0):
            raise ContractError("edge weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ContractError("self-loops are not allowed")
        if np.any(w[0] != 0):
            raise ContractError("the leader (node 0) cannot have in-edges")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(cls, node_count, edges):
        """Build from ``(source, target, weight)`` triples."""
        w = np.zeros((node_count, node_count))
        for edge in edges:
            src, dst = int(edge[0]), int(edge[1])
            weight = float(edge[2]) if len(edge) > 2 else 1.0
            if not (0 <= src < node_count and 0 <= dst < node_count):
                raise ContractError(f"edge {src}->{dst} references a node outside 0..{node_count - 1}")
            w[dst, src] = weight
        return cls(w)

    @property
    def node_count(self):
        return self.weights.shape[0]

    @property
    def follower_count(self):
        return self.node_count - 1

    def neighbors(self, i):
        """In-neighbors of node ``i`` (the nodes it receives from)."""
        return [j for j in range(self.node_count) if self.weights[i, j] != 0]

    def edges(self):
        return [
            (j, i, float(self.weights[i, j]))
            for i in range(self.node_count)
            for j in range(self.node_count)
            if self.weights[i, j] != 0
        ]

    def __eq__(self, other):
        return isinstance(other, Topology) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True)
class ParentMap:
    """``parent[i - 1]`` is the node follower ``i`` listens to."""

    parent: tuple

    @property
    def follower_count(self):
        return len(self.parent)

    def of(self, i):
        return self.parent[i - 1]

    def pairs(self):
        return [(i, self.of(i)) for i in range(1, self.follower_count + 1)]

    def topological_order(self):
        """Followers ordered so that every parent precedes its children."""
        depth = {0: 0}

        def _depth(i):
            if i not in depth:
                depth[i] = _depth(self.of(i)) + 1
            return depth[i]

        return sorted(range(1, self.follower_count + 1), key=lambda i: (_depth(i), i))

    def children(self, j):
        return [i for i, p in self.pairs() if p == j]


def validate_spanning_tree(t: Topology) -> ParentMap:
    """Check that every follower has exactly one in-neighbor and that the
    parent links form a tree rooted at the leader."""
    parents = []
    for i in range(1, t.node_count):
        nbrs = t.neighbors(i)
        if len(nbrs) != 1:
            raise TopologyShapeError(
                f"follower {i} has {len(nbrs)} in-neighbors {nbrs}; exactly one is required"
            )
        parents.append(nbrs[0])
    for i in range(1, t.node_count):
        seen = {i}
        node = i
        while node != 0:
            node = parents[node - 1]
            if node in seen:
                raise NoSpanningTreeError(f"parent chain from follower {i} contains a cycle through node {node}")
            seen.add(node)
    return ParentMap(tuple(parents))


def build_selectors(pm: ParentMap, block_dim: int) -> list:
    """Selector H_i picking follower i's own block e_{i,parent(i)} of the stacked error."""
    n_agents = pm.follower_count
    out = []
    for i in range(n_agents):
        h = np.zeros((block_dim, n_agents * block_dim))
        h[:, i * block_dim:(i + 1) * block_dim] = np.eye(block_dim)
        out.append(h)
    return out
