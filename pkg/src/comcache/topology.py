"""Cache network topology: nodes, capacities, local links, shared server link.

Nodes are dense ids 0..K-1.  Links are undirected, each with a per-step
bandwidth budget (files per step) and a normalized transfer cost in [0, 1).
Fetching from the central server always costs ``SERVER_COST`` = 1.0, the
normalization maximum.  A link with bandwidth 0 still appears in adjacency but
can never serve; the learning layer scopes neighborhoods to usable links.

Topologies are immutable after construction and safe to share across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SERVER_COST = 1.0


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    a: int
    b: int
    bandwidth: int
    cost: float


@dataclass(frozen=True)
class Topology:
    node_count: int
    capacities: tuple[int, ...]
    links: tuple[Link, ...]
    grid_shape: tuple[int, int] | None = None
    # Derived lookups, filled in __post_init__.
    _adj: dict = field(default_factory=dict, repr=False, compare=False)
    _usable: dict = field(default_factory=dict, repr=False, compare=False)
    _link_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        k = self.node_count
        if k < 1:
            raise TopologyError("node_count must be >= 1")
        if len(self.capacities) != k:
            raise TopologyError("one capacity per node required")
        for m in self.capacities:
            if m < 1:
                raise TopologyError("capacities must be >= 1")
        adj = {i: set() for i in range(k)}
        seen = set()
        for idx, ln in enumerate(self.links):
            i, j = ln.a, ln.b
            if i == j:
                raise TopologyError(f"self-link on node {i}")
            if not (0 <= i < k and 0 <= j < k):
                raise TopologyError(f"link ({i},{j}) out of range")
            if ln.bandwidth < 0:
                raise TopologyError("bandwidth must be >= 0")
            if not (0.0 <= ln.cost < SERVER_COST):
                raise TopologyError(
                    f"link cost {ln.cost} must lie in [0, {SERVER_COST})"
                )
            key = (min(i, j), max(i, j))
            if key in seen:
                raise TopologyError(f"duplicate link {key}")
            seen.add(key)
            adj[i].add(j)
            adj[j].add(i)
            self._link_index[key] = idx
        for i in range(k):
            self._adj[i] = tuple(sorted(adj[i]))
            usable = [j for j in adj[i] if self.link(i, j).bandwidth > 0]
            # Serve order: cheapest link first, then lowest neighbor id.
            usable.sort(key=lambda j: (self.link(i, j).cost, j))
            self._usable[i] = tuple(usable)

    def neighbors(self, i: int) -> tuple[int, ...]:
        """All one-hop neighbors of node i, ascending by id."""
        self._check(i)
        return self._adj[i]

    def usable_neighbors(self, i: int) -> tuple[int, ...]:
        """Neighbors reachable over links with bandwidth > 0, ascending by id."""
        self._check(i)
        return tuple(sorted(self._usable[i]))

    def serve_order(self, i: int) -> tuple[int, ...]:
        """Usable neighbors of i ordered cheapest link first, ties by id."""
        self._check(i)
        return self._usable[i]

    def link(self, i: int, j: int) -> Link:
        idx = self._link_index.get((min(i, j), max(i, j)))
        if idx is None:
            raise TopologyError(f"no link between {i} and {j}")
        return self.links[idx]

    def link_id(self, i: int, j: int) -> int:
        return self._link_index[(min(i, j), max(i, j))]

    def _check(self, i: int):
        if not (0 <= i < self.node_count):
            raise TopologyError(f"node id {i} out of range")

    def to_dict(self) -> dict:
        if self.grid_shape is not None:
            rows, cols = self.grid_shape
            ln = self.links[0] if self.links else None
            return {
                "grid": {
                    "rows": rows,
                    "cols": cols,
                    "capacity": self.capacities[0],
                    "bw": ln.bandwidth if ln else 0,
                    "link_cost": ln.cost if ln else 0.0,
                }
            }
        return {
            "nodes": [{"id": i, "capacity": m} for i, m in enumerate(self.capacities)],
            "links": [
                {"a": ln.a, "b": ln.b, "bw": ln.bandwidth, "cost": ln.cost}
                for ln in self.links
            ],
        }


def build(capacities, links, grid_shape=None) -> Topology:
    """General constructor: heterogeneous capacities and arbitrary link lists."""
    return Topology(
        node_count=len(capacities),
        capacities=tuple(int(m) for m in capacities),
        links=tuple(Link(int(a), int(b), int(bw), float(c)) for a, b, bw, c in links),
        grid_shape=grid_shape,
    )


def build_grid(rows: int, cols: int, capacity: int, bw: int, link_cost: float) -> Topology:
    """Rectangular grid; each node links to its up/down/left/right neighbors.

    Node ids are row-major 0..rows*cols-1.  Corners get degree 2, edges 3,
    interior 4 (degenerate 1-wide grids correspondingly less).
    """
    if rows < 1 or cols < 1:
        raise TopologyError("grid dimensions must be >= 1")
    if not (0.0 <= link_cost < SERVER_COST):
        raise TopologyError("link_cost must lie in [0, 1)")
    if capacity < 1:
        raise TopologyError("capacity must be >= 1")
    if bw < 0:
        raise TopologyError("bw must be >= 0")
    links = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                links.append((i, i + 1, bw, link_cost))
            if r + 1 < rows:
                links.append((i, i + cols, bw, link_cost))
    return build([capacity] * (rows * cols), links, grid_shape=(rows, cols))


def tile_blocks(rows: int, cols: int, block: int = 2) -> list[tuple[int, ...]]:
    """Row-major tiling of a rows x cols grid into block x block node groups.

    Odd remainders produce smaller edge blocks rather than failing, so every
    node lands in exactly one block.
    """
    blocks = []
    for r0 in range(0, rows, block):
        for c0 in range(0, cols, block):
            members = []
            for r in range(r0, min(r0 + block, rows)):
                for c in range(c0, min(c0 + block, cols)):
                    members.append(r * cols + c)
            blocks.append(tuple(members))
    return blocks
