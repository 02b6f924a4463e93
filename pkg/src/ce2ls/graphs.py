"""Directed and mixed causal graphs with separation and adjustment machinery.

Two immutable graph types are provided: :class:`Dag` (directed edges only)
and :class:`Mag` (directed plus bidirected edges, no directed or almost
directed cycles). On top of them sit the queries the rest of the package is
built from: d-/m-separation, edge visibility, generalized back-door paths,
the forbidden set, the generalized adjustment criterion (GAC), brute-force
enumeration of minimal adjustment sets, and latent projection of a DAG onto
its observed margin.

All graphs are immutable after construction and every query is pure, so
instances can be shared freely across threads. Node order is lexicographic
wherever output is serialized.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Tuple

from .exceptions import CapacityError, GraphError, ParseError

TAIL = 0
HEAD = 1

# Adjacency entry: (neighbour, mark at this node, mark at neighbour).
_Marks = Tuple[str, int, int]

# Brute-force subset enumeration over more nodes than this is refused.
MAX_ENUMERATION_UNIVERSE = 20


def _check_nodes(nodes: Iterable[str]) -> Tuple[str, ...]:
    nodes = tuple(nodes)
    if len(set(nodes)) != len(nodes):
        raise GraphError("node names must be unique")
    for v in nodes:
        if not isinstance(v, str) or not v:
            raise GraphError(f"bad node name: {v!r}")
    return nodes


class _GraphBase:
    """Shared adjacency/ancestry machinery for Dag and Mag."""

    nodes: Tuple[str, ...]

    def __contains__(self, v: str) -> bool:
        return v in self._node_set

    def _require(self, *names: str) -> None:
        for v in names:
            if v not in self._node_set:
                raise GraphError(f"unknown node: {v!r}")

    def marks(self, v: str) -> Tuple[_Marks, ...]:
        """Edges at `v` as (neighbour, mark at v, mark at neighbour)."""
        self._require(v)
        return self._marks[v]

    def parents(self, v: str) -> frozenset:
        self._require(v)
        return self._parents[v]

    def children(self, v: str) -> frozenset:
        self._require(v)
        return self._children[v]

    def adjacent(self, v: str) -> frozenset:
        self._require(v)
        return frozenset(u for u, _, _ in self._marks[v])

    def is_adjacent(self, u: str, v: str) -> bool:
        self._require(u, v)
        return v in self.adjacent(u)

    def ancestors(self, v: str) -> frozenset:
        """Transitive closure over directed edges only; excludes `v` itself."""
        self._require(v)
        out = set()
        stack = [v]
        while stack:
            for p in self._parents[stack.pop()]:
                if p not in out:
                    out.add(p)
                    stack.append(p)
        out.discard(v)
        return frozenset(out)

    def descendants(self, v: str) -> frozenset:
        """Transitive closure over directed edges only; excludes `v` itself."""
        self._require(v)
        out = set()
        stack = [v]
        while stack:
            for c in self._children[stack.pop()]:
                if c not in out:
                    out.add(c)
                    stack.append(c)
        out.discard(v)
        return frozenset(out)

    def _finish(self, directed, bidirected) -> None:
        """Build sorted adjacency-with-marks maps. Called once by __init__."""
        marks = {v: [] for v in self.nodes}
        parents = {v: set() for v in self.nodes}
        children = {v: set() for v in self.nodes}
        for a, b in directed:
            marks[a].append((b, TAIL, HEAD))
            marks[b].append((a, HEAD, TAIL))
            children[a].add(b)
            parents[b].add(a)
        for a, b in bidirected:
            marks[a].append((b, HEAD, HEAD))
            marks[b].append((a, HEAD, HEAD))
        self._marks = {v: tuple(sorted(marks[v])) for v in self.nodes}
        self._parents = {v: frozenset(parents[v]) for v in self.nodes}
        self._children = {v: frozenset(children[v]) for v in self.nodes}
        self._node_set = frozenset(self.nodes)


def _assert_acyclic(nodes, children, kind="directed"):
    # Kahn's algorithm; leftovers mean a cycle among directed edges. The
    # frontier is kept sorted so the returned topological order is canonical
    # (set iteration order would vary with string hash randomization).
    indeg = {v: 0 for v in nodes}
    for v in nodes:
        for c in children[v]:
            indeg[c] += 1
    frontier = sorted(v for v in nodes if indeg[v] == 0)
    heapq.heapify(frontier)
    order = []
    while frontier:
        v = heapq.heappop(frontier)
        order.append(v)
        for c in sorted(children[v]):
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(frontier, c)
    if len(order) != len(nodes):
        raise GraphError(f"graph contains a {kind} cycle")
    return order


class Dag(_GraphBase):
    """Directed acyclic graph over named nodes.

    Parameters
    ----------
    nodes : iterable of str
        Node names, order preserved for display; must be unique.
    edges : iterable of (tail, head) pairs
        Directed edges. Self-loops and cycles are rejected at construction.
    """

    def __init__(self, nodes: Iterable[str], edges: Iterable[Tuple[str, str]]):
        self.nodes = _check_nodes(nodes)
        node_set = set(self.nodes)
        seen = set()
        for a, b in edges:
            if a not in node_set or b not in node_set:
                raise GraphError(f"edge ({a!r}, {b!r}) uses unknown node")
            if a == b:
                raise GraphError(f"self-loop at {a!r}")
            if (a, b) in seen or (b, a) in seen:
                raise GraphError(f"duplicate or two-way edge between {a!r} and {b!r}")
            seen.add((a, b))
        self.edges = frozenset(seen)
        children = {v: set() for v in self.nodes}
        for a, b in self.edges:
            children[a].add(b)
        self._topo = tuple(_assert_acyclic(self.nodes, children))
        self._finish(self.edges, ())

    @property
    def directed_edges(self) -> frozenset:
        return self.edges

    def topological_order(self) -> Tuple[str, ...]:
        return self._topo

    def __repr__(self):
        return f"Dag({len(self.nodes)} nodes, {len(self.edges)} edges)"


class Mag(_GraphBase):
    """Mixed graph with directed and bidirected edges, ancestral by construction.

    Construction rejects directed cycles, almost directed cycles (a
    bidirected edge between a node and one of its ancestors), multi-edges and
    self-loops. Maximality is not enforced here: latent projection guarantees
    it, and hand-built graphs can be checked with :meth:`is_maximal`.
    """

    def __init__(
        self,
        nodes: Iterable[str],
        directed_edges: Iterable[Tuple[str, str]],
        bidirected_edges: Iterable[Tuple[str, str]],
    ):
        self.nodes = _check_nodes(nodes)
        node_set = set(self.nodes)
        directed = set()
        pairs = set()
        for a, b in directed_edges:
            if a not in node_set or b not in node_set:
                raise GraphError(f"edge ({a!r}, {b!r}) uses unknown node")
            if a == b:
                raise GraphError(f"self-loop at {a!r}")
            key = frozenset((a, b))
            if key in pairs:
                raise GraphError(f"multiple edges between {a!r} and {b!r}")
            pairs.add(key)
            directed.add((a, b))
        bidirected = set()
        for a, b in bidirected_edges:
            if a not in node_set or b not in node_set:
                raise GraphError(f"edge ({a!r}, {b!r}) uses unknown node")
            if a == b:
                raise GraphError(f"self-loop at {a!r}")
            key = frozenset((a, b))
            if key in pairs:
                raise GraphError(f"multiple edges between {a!r} and {b!r}")
            pairs.add(key)
            bidirected.add(key)
        self.directed_edges = frozenset(directed)
        self.bidirected_edges = frozenset(bidirected)

        children = {v: set() for v in self.nodes}
        for a, b in directed:
            children[a].add(b)
        _assert_acyclic(self.nodes, children)
        self._finish(directed, [tuple(sorted(e)) for e in bidirected])
        for e in self.bidirected_edges:
            a, b = sorted(e)
            if a in self.ancestors(b) or b in self.ancestors(a):
                raise GraphError(
                    f"almost directed cycle: {a} <-> {b} with one an ancestor of the other"
                )

    def spouses(self, v: str) -> frozenset:
        self._require(v)
        return frozenset(u for u, mv, mu in self._marks[v] if mv == HEAD and mu == HEAD)

    def is_maximal(self) -> bool:
        """True if every non-adjacent pair can be m-separated by some set.

        Equivalent check: no primitive inducing path (an inducing path
        relative to the empty latent set) joins a non-adjacent pair.
        """
        for x, y in itertools.combinations(sorted(self.nodes), 2):
            if self.is_adjacent(x, y):
                continue
            if _has_inducing_path(self, x, y, frozenset()):
                return False
        return True

    def __repr__(self):
        return (
            f"Mag({len(self.nodes)} nodes, {len(self.directed_edges)} directed, "
            f"{len(self.bidirected_edges)} bidirected)"
        )


@dataclass(frozen=True)
class Path:
    """A simple path: nodes plus, per step, the marks at both ends of the edge.

    ``marks[i]`` is the pair (mark at nodes[i], mark at nodes[i+1]) with
    values TAIL or HEAD, so ``A -> B`` is (TAIL, HEAD) and ``A <-> B`` is
    (HEAD, HEAD).
    """

    nodes: Tuple[str, ...]
    marks: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if len(self.nodes) < 2 or len(set(self.nodes)) != len(self.nodes):
            raise GraphError("a path needs at least one edge and distinct nodes")
        if len(self.marks) != len(self.nodes) - 1:
            raise GraphError("marks must cover every step")

    def __len__(self) -> int:
        return len(self.marks)

    def __str__(self) -> str:
        sym = {(TAIL, HEAD): " -> ", (HEAD, TAIL): " <- ", (HEAD, HEAD): " <-> "}
        out = [self.nodes[0]]
        for step, pair in enumerate(self.marks):
            out.append(sym[pair])
            out.append(self.nodes[step + 1])
        return "".join(out)


def _iter_simple_paths(graph: _GraphBase, x: str, y: str):
    """Yield every simple path from x to y as (nodes, marks) tuples.

    Exhaustive DFS with a visited set; fine for the graph sizes this package
    targets (tests cap at 20 nodes).
    """
    stack = [(x, (x,), ())]
    while stack:
        v, nodes, marks = stack.pop()
        for u, mv, mu in graph.marks(v):
            if u in nodes:
                continue
            step = marks + ((mv, mu),)
            if u == y:
                yield nodes + (u,), step
            else:
                stack.append((u, nodes + (u,), step))


def _ancestors_of_set(graph: _GraphBase, zs: frozenset) -> frozenset:
    out = set(zs)
    stack = list(zs)
    while stack:
        for p in graph.parents(stack.pop()):
            if p not in out:
                out.add(p)
                stack.append(p)
    return frozenset(out)


def _path_blocked(nodes, marks, z: frozenset, anz: frozenset) -> bool:
    """Blocking test for one explicit path.

    A non-collider blocks when it is in z; a collider blocks unless it or one
    of its descendants is in z (anz = z plus ancestors of z).
    """
    for i in range(1, len(nodes) - 1):
        v = nodes[i]
        collider = marks[i - 1][1] == HEAD and marks[i][0] == HEAD
        if collider:
            if v not in anz:
                return True
        elif v in z:
            return True
    return False


def _m_connected(graph: _GraphBase, x: str, y: str, z: frozenset) -> bool:
    """Reachability form of m-connection, shared by DAG and MAG queries.

    Walk states are (node, mark of the arriving edge at that node); a walk
    may pass a collider only when the collider has itself or a descendant in
    z, and a non-collider only when it is outside z. An m-connecting walk
    exists iff an m-connecting path does, so this matches the path-based
    definition (the test suite cross-checks against explicit enumeration).
    """
    anz = _ancestors_of_set(graph, z)
    stack = []
    visited = set()
    for u, _, mu in graph.marks(x):
        if u == y:
            return True
        state = (u, mu)
        if state not in visited:
            visited.add(state)
            stack.append(state)
    while stack:
        v, m_in = stack.pop()
        for u, mv, mu in graph.marks(v):
            collider = m_in == HEAD and mv == HEAD
            if collider:
                if v not in anz:
                    continue
            elif v in z:
                continue
            if u == y:
                return True
            state = (u, mu)
            if state not in visited:
                visited.add(state)
                stack.append(state)
    return False


def _check_sep_args(graph, x, y, z):
    graph._require(x, y, *z)
    if x == y:
        raise GraphError("separation query needs two distinct nodes")
    if x in z or y in z:
        raise GraphError("conditioning set must not contain the query nodes")


def m_separated(mag: Mag, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """True iff every path between x and y in the MAG is m-blocked by z."""
    z = frozenset(z)
    _check_sep_args(mag, x, y, z)
    return not _m_connected(mag, x, y, z)


def d_separated(dag: Dag, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """d-separation in a DAG; same blocking rules restricted to directed edges."""
    z = frozenset(z)
    _check_sep_args(dag, x, y, z)
    return not _m_connected(dag, x, y, z)


def is_visible(mag: Mag, a: str, b: str) -> bool:
    """Whether the directed edge a -> b is visible.

    The edge is visible when some node c not adjacent to b either has an
    edge into a, or reaches a through a chain of bidirected edges whose every
    node is a parent of b, with c's edge pointing into the chain. A visible
    edge certifies the absence of hidden confounding between a and b.
    """
    mag._require(a, b)
    if (a, b) not in mag.directed_edges:
        raise GraphError(f"{a} -> {b} is not a directed edge of the graph")
    adj_b = mag.adjacent(b)

    # Nodes reachable from `a` by bidirected chains lying inside parents(b);
    # an arrowhead into any of them (or into `a` itself) from outside Adj(b)
    # certifies visibility.
    pa_b = mag.parents(b)
    chain = {a}
    frontier = [a]
    while frontier:
        v = frontier.pop()
        for u in mag.spouses(v):
            if u in pa_b and u not in chain:
                chain.add(u)
                frontier.append(u)
    for v in sorted(chain):
        for c, mv, _ in mag.marks(v):
            if mv == HEAD and c != b and c not in adj_b and c not in chain:
                return True
    return False


def is_amenable(mag: Mag, w: str, y: str) -> bool:
    """Adjustment amenability for a single treatment: the edge w -> y is visible."""
    mag._require(w, y)
    if (w, y) not in mag.directed_edges:
        return False
    return is_visible(mag, w, y)


def generalized_backdoor_paths(mag: Mag, w: str, y: str) -> List[Path]:
    """All paths from w to y that do not start with a visible edge out of w.

    Sorted by (length, node sequence) so output is reproducible.
    """
    mag._require(w, y)
    if w == y:
        raise GraphError("treatment and outcome must differ")
    visible_out = {
        c for c in mag.children(w) if is_visible(mag, w, c)
    }
    out = []
    for nodes, marks in _iter_simple_paths(mag, w, y):
        first_is_directed_out = marks[0] == (TAIL, HEAD)
        if first_is_directed_out and nodes[1] in visible_out:
            continue
        out.append(Path(nodes, marks))
    out.sort(key=lambda p: (len(p.nodes), p.nodes))
    return out


class ForbiddenSetResult(NamedTuple):
    nodes: frozenset
    has_causal_path: bool


def forbidden_set(mag: Mag, w: str, y: str) -> ForbiddenSetResult:
    """Descendants of w on causal paths from w to y (w excluded, y included).

    When no causal path exists the set is empty and ``has_causal_path`` is
    False rather than an error, because the search may probe pairs before
    identifiability is known.
    """
    mag._require(w, y)
    if w == y:
        raise GraphError("treatment and outcome must differ")
    de_w = mag.descendants(w)
    if y not in de_w:
        return ForbiddenSetResult(frozenset(), False)
    on_path = de_w & (mag.ancestors(y) | {y})
    on_path -= {w}
    return ForbiddenSetResult(frozenset(on_path), True)


def satisfies_gac(mag: Mag, w: str, y: str, z: Iterable[str]) -> bool:
    """Generalized adjustment criterion for z relative to (w, y).

    Requires (i) amenability, (ii) z disjoint from the forbidden set, and
    (iii) every generalized back-door path m-blocked by z.
    """
    z = frozenset(z)
    mag._require(w, y, *z)
    if w in z or y in z:
        raise GraphError("adjustment set must not contain treatment or outcome")
    if not is_amenable(mag, w, y):
        return False
    forb = forbidden_set(mag, w, y)
    if z & forb.nodes:
        return False
    anz = _ancestors_of_set(mag, z)
    for path in generalized_backdoor_paths(mag, w, y):
        if not _path_blocked(path.nodes, path.marks, z, anz):
            return False
    return True


def enumerate_minimal_gac_sets(
    mag: Mag, w: str, y: str, universe: Iterable[str]
) -> frozenset:
    """Brute-force the minimal GAC sets inside `universe`, smallest first.

    Serves as the independent oracle for the local search: every returned set
    satisfies the GAC and none of its proper subsets does. Refuses universes
    over 20 nodes.
    """
    universe = sorted(set(universe))
    mag._require(w, y, *universe)
    if w in universe or y in universe:
        raise GraphError("universe must exclude treatment and outcome")
    if len(universe) > MAX_ENUMERATION_UNIVERSE:
        raise CapacityError(
            f"universe of {len(universe)} nodes exceeds the cap of "
            f"{MAX_ENUMERATION_UNIVERSE} for exhaustive enumeration"
        )
    if not is_amenable(mag, w, y):
        return frozenset()
    paths = generalized_backdoor_paths(mag, w, y)
    forb = forbidden_set(mag, w, y).nodes

    def ok(z: frozenset) -> bool:
        if z & forb:
            return False
        anz = _ancestors_of_set(mag, z)
        return all(_path_blocked(p.nodes, p.marks, z, anz) for p in paths)

    minimal = []
    for k in range(len(universe) + 1):
        for combo in itertools.combinations(universe, k):
            z = frozenset(combo)
            if any(m <= z for m in minimal):
                continue
            if ok(z):
                minimal.append(z)
    return frozenset(minimal)


def _has_inducing_path(graph: _GraphBase, a: str, b: str, latents: frozenset) -> bool:
    """Inducing path between a and b relative to `latents`.

    Every non-endpoint must be latent or a collider, and every collider must
    be an ancestor of a or b.
    """
    anc_ab = graph.ancestors(a) | graph.ancestors(b) | {a, b}
    for nodes, marks in _iter_simple_paths(graph, a, b):
        good = True
        for i in range(1, len(nodes) - 1):
            v = nodes[i]
            collider = marks[i - 1][1] == HEAD and marks[i][0] == HEAD
            if collider:
                if v not in anc_ab:
                    good = False
                    break
            elif v not in latents:
                good = False
                break
        if good:
            return True
    return False


def latent_project(dag: Dag, latents: Iterable[str]) -> Mag:
    """Project a DAG onto its observed margin, producing the corresponding MAG.

    Observed nodes a, b are joined iff some inducing path relative to the
    latent set connects them; the edge is a -> b when a is an ancestor of b
    in the DAG and a <-> b when neither is an ancestor of the other. With an
    empty latent set the DAG is reinterpreted as a MAG with the same edges.
    """
    latents = frozenset(latents)
    dag._require(*latents)
    observed = [v for v in dag.nodes if v not in latents]
    if len(observed) < 1:
        raise GraphError("projection would remove every node")
    directed = []
    bidirected = []
    for a, b in itertools.combinations(sorted(observed), 2):
        if not _has_inducing_path(dag, a, b, latents):
            continue
        if a in dag.ancestors(b):
            directed.append((a, b))
        elif b in dag.ancestors(a):
            directed.append((b, a))
        else:
            bidirected.append((a, b))
    return Mag(observed, directed, bidirected)


# ---------------------------------------------------------------------------
# Plain-text graph format: one edge per line (`A -> B`, `A <-> B`), optional
# `node C` lines for isolated nodes, `#` comments.
# ---------------------------------------------------------------------------

def parse_graph_text(text: str):
    """Parse the edge-list format into a Dag or Mag.

    Returns a Dag when only directed edges appear, otherwise a Mag. Unknown
    line shapes raise ParseError with the line number.
    """
    nodes = []
    seen = set()

    def note(v):
        if v not in seen:
            seen.add(v)
            nodes.append(v)

    directed = []
    bidirected = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node":
            if len(parts) != 2:
                raise ParseError("expected `node NAME`", line_no)
            note(parts[1])
        elif len(parts) == 3 and parts[1] == "->":
            note(parts[0])
            note(parts[2])
            directed.append((parts[0], parts[2]))
        elif len(parts) == 3 and parts[1] == "<->":
            note(parts[0])
            note(parts[2])
            bidirected.append((parts[0], parts[2]))
        else:
            raise ParseError(f"cannot parse graph line: {raw.strip()!r}", line_no)
    nodes = sorted(nodes)
    try:
        if bidirected:
            return Mag(nodes, directed, bidirected)
        return Dag(nodes, directed)
    except GraphError as exc:
        raise ParseError(str(exc)) from exc


def graph_to_text(graph) -> str:
    """Serialize a Dag or Mag back to the edge-list format, sorted."""
    lines = []
    if isinstance(graph, Mag):
        directed = sorted(graph.directed_edges)
        bidirected = sorted(tuple(sorted(e)) for e in graph.bidirected_edges)
    else:
        directed = sorted(graph.edges)
        bidirected = []
    linked = set()
    for a, b in directed:
        lines.append(f"{a} -> {b}")
        linked.update((a, b))
    for a, b in bidirected:
        lines.append(f"{a} <-> {b}")
        linked.update((a, b))
    for v in sorted(set(graph.nodes) - linked):
        lines.append(f"node {v}")
    return "\n".join(lines) + "\n"
