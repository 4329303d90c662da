"""Causal diagrams: DAGs, d-separation, adjustment criteria, templates.

All graph values are immutable after construction.  Node names are
nonempty ASCII identifiers.
"""

from __future__ import annotations

import json
from collections import deque
from typing import Iterable, Mapping

from .errors import (
    CycleError,
    GraphError,
    OverlapError,
    UnknownNodeError,
    UnknownTemplate,
)

__all__ = [
    "Dag",
    "build_dag",
    "template",
    "TEMPLATE_IDS",
    "d_separated",
    "open_trail",
    "mutilate",
    "satisfies_backdoor",
    "satisfies_frontdoor",
    "dag_to_json",
    "dag_from_json",
]


def _valid_name(name) -> bool:
    return isinstance(name, str) and name.isascii() and name.isidentifier()


class Dag:
    """Directed acyclic graph over named variables.

    ``latent`` flags nodes as unobserved.  It is advisory metadata here:
    graphical queries ignore it, adjustment code in :mod:`identify`
    refuses latent adjustment sets.
    """

    __slots__ = ("nodes", "edges", "latent", "_parents", "_children", "_order")

    def __init__(self, nodes, edges, latent=()):
        nodes = tuple(nodes)
        if len(set(nodes)) != len(nodes):
            raise GraphError("duplicate node names")
        for n in nodes:
            if not _valid_name(n):
                raise GraphError(f"invalid node name: {n!r}")
        node_set = set(nodes)
        edge_list = [tuple(e) for e in edges]
        if len(set(edge_list)) != len(edge_list):
            raise GraphError("duplicate edges")
        for a, b in edge_list:
            if a not in node_set or b not in node_set:
                raise UnknownNodeError(f"edge ({a}, {b}) references undeclared node")
            if a == b:
                raise CycleError([a, a])
        latent = frozenset(latent)
        if not latent <= node_set:
            raise UnknownNodeError("latent set references undeclared node")

        parents = {n: [] for n in nodes}
        children = {n: [] for n in nodes}
        for a, b in edge_list:
            parents[b].append(a)
            children[a].append(b)

        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", frozenset(edge_list))
        object.__setattr__(self, "latent", latent)
        object.__setattr__(self, "_parents", {n: tuple(ps) for n, ps in parents.items()})
        object.__setattr__(self, "_children", {n: tuple(cs) for n, cs in children.items()})
        object.__setattr__(self, "_order", self._toposort())

    def __setattr__(self, name, value):
        raise AttributeError("Dag is immutable")

    def _toposort(self):
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        queue = deque(n for n in self.nodes if indeg[n] == 0)
        order = []
        while queue:
            n = queue.popleft()
            order.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(order) != len(self.nodes):
            cyc = [n for n in self.nodes if indeg[n] > 0]
            raise CycleError(cyc)
        return tuple(order)

    # -- basic queries ---------------------------------------------------

    @property
    def topological_order(self) -> tuple:
        return self._order

    def _check(self, v):
        if v not in self._parents:
            raise UnknownNodeError(f"unknown node: {v!r}")

    def parents(self, v) -> frozenset:
        self._check(v)
        return frozenset(self._parents[v])

    def children(self, v) -> frozenset:
        self._check(v)
        return frozenset(self._children[v])

    def _reach(self, v, step):
        self._check(v)
        seen = set()
        stack = list(step[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(step[u])
        return frozenset(seen)

    def ancestors(self, v) -> frozenset:
        """Strict ancestors of ``v`` (``v`` excluded)."""
        return self._reach(v, self._parents)

    def descendants(self, v) -> frozenset:
        """Strict descendants of ``v`` (``v`` excluded)."""
        return self._reach(v, self._children)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return (
            set(self.nodes) == set(other.nodes)
            and self.edges == other.edges
            and self.latent == other.latent
        )

    def __hash__(self):
        return hash((frozenset(self.nodes), self.edges, self.latent))

    def __repr__(self):
        return f"Dag(nodes={list(self.nodes)}, edges={sorted(self.edges)}, latent={sorted(self.latent)})"


def build_dag(nodes: Iterable[str], edges: Iterable, latent: Iterable[str] = ()) -> Dag:
    """Validate and construct a :class:`Dag`."""
    return Dag(nodes, edges, latent)


def _check_sets(dag: Dag, *sets, disjoint=True):
    node_set = set(dag.nodes)
    for s in sets:
        for v in s:
            if v not in node_set:
                raise UnknownNodeError(f"unknown node: {v!r}")
    if disjoint:
        for i, a in enumerate(sets):
            for b in sets[i + 1 :]:
                inter = set(a) & set(b)
                if inter:
                    raise OverlapError(f"sets overlap on {sorted(inter)}")


def d_separated(dag: Dag, X, Y, Z) -> bool:
    """True iff ``Z`` blocks every trail between ``X`` and ``Y``.

    Reachability-based (Bayes-ball style), linear in the edge count.
    """
    X, Y, Z = frozenset(X), frozenset(Y), frozenset(Z)
    if not X or not Y:
        raise OverlapError("X and Y must be nonempty")
    _check_sets(dag, X, Y, Z)

    # Z together with its ancestors: colliders are open exactly there.
    anc_z = set(Z)
    for z in Z:
        anc_z |= dag.ancestors(z)

    # States: (node, direction). "up" = leaving through any edge,
    # "down" = arrived along an edge into the node.
    visited = set()
    frontier = deque((x, "up") for x in X)
    while frontier:
        v, d = frontier.popleft()
        if (v, d) in visited:
            continue
        visited.add((v, d))
        if v in Y:
            return False
        if d == "up":
            if v not in Z:
                for p in dag.parents(v):
                    frontier.append((p, "up"))
                for c in dag.children(v):
                    frontier.append((c, "down"))
        else:
            if v not in Z:
                for c in dag.children(v):
                    frontier.append((c, "down"))
            if v in anc_z:
                for p in dag.parents(v):
                    frontier.append((p, "up"))
    return True


def open_trail(dag: Dag, X, Y, Z):
    """Exhaustive search for an open trail from ``X`` to ``Y`` given ``Z``.

    Returns the trail as a node list, or ``None`` when the sets are
    d-separated.  Exponential; used for witnesses and as a test oracle
    for :func:`d_separated`.
    """
    X, Y, Z = frozenset(X), frozenset(Y), frozenset(Z)
    if not X or not Y:
        raise OverlapError("X and Y must be nonempty")
    _check_sets(dag, X, Y, Z)

    anc_z = set(Z)
    for z in Z:
        anc_z |= dag.ancestors(z)

    def explore(trail, arrows):
        # arrows[i] is True when the edge between trail[i] and trail[i+1]
        # points forward (at trail[i+1]).
        v = trail[-1]
        if v in Y:
            return list(trail)
        for u in sorted(dag.parents(v) | dag.children(v)):
            if u in trail:
                continue
            forward = u in dag.children(v)
            if len(trail) >= 2:
                prev_into_v = arrows[-1]
                next_into_v = not forward
                if prev_into_v and next_into_v:  # v is a collider
                    if v not in anc_z:
                        continue
                elif v in Z:
                    continue
            res = explore(trail + [u], arrows + [forward])
            if res is not None:
                return res
        return None

    for x in sorted(X):
        res = explore([x], [])
        if res is not None and len(res) > 1:
            return res
        # single-node trail means x in Y, impossible given disjointness
    return None


def mutilate(dag: Dag, do_set) -> Dag:
    """Copy of ``dag`` with every edge into a member of ``do_set`` removed."""
    do_set = frozenset(do_set)
    _check_sets(dag, do_set)
    edges = [(a, b) for (a, b) in dag.edges if b not in do_set]
    return Dag(dag.nodes, edges, dag.latent)


def _drop_out_edges(dag: Dag, sources) -> Dag:
    sources = frozenset(sources)
    edges = [(a, b) for (a, b) in dag.edges if a not in sources]
    return Dag(dag.nodes, edges, dag.latent)


def satisfies_backdoor(dag: Dag, x: str, y: str, Z) -> bool:
    """Pearl's back-door criterion for adjustment set ``Z`` on (x, y)."""
    Z = frozenset(Z)
    _check_sets(dag, {x}, {y}, Z)
    if Z & dag.descendants(x):
        return False
    # Removing x's outgoing edges leaves exactly the trails that start
    # with an edge into x.
    return d_separated(_drop_out_edges(dag, {x}), {x}, {y}, Z)


def open_backdoor_trail(dag: Dag, x: str, y: str, Z):
    """Witness trail for a back-door criterion failure, or ``None``."""
    Z = frozenset(Z)
    bad = Z & dag.descendants(x)
    if bad:
        return sorted(bad)
    return open_trail(_drop_out_edges(dag, {x}), {x}, {y}, Z)


def _directed_paths_intercepted(dag: Dag, x: str, y: str, M) -> bool:
    """True iff every directed path x -> ... -> y passes through M."""
    M = frozenset(M)
    seen = set()
    stack = [x]
    while stack:
        v = stack.pop()
        for c in dag.children(v):
            if c == y:
                return False
            if c in M or c in seen:
                continue
            seen.add(c)
            stack.append(c)
    return True


def satisfies_frontdoor(dag: Dag, x: str, y: str, M) -> bool:
    """Pearl's front-door criterion for mediator set ``M`` on (x, y).

    (a) M intercepts every directed path from x to y; (b) no open
    back-door trail from x to M given the empty set; (c) every back-door
    trail from M to y is blocked by {x}.
    """
    M = frozenset(M)
    if not M:
        return False
    _check_sets(dag, {x}, {y}, M)
    if not _directed_paths_intercepted(dag, x, y, M):
        return False
    if not d_separated(_drop_out_edges(dag, {x}), {x}, M, frozenset()):
        return False
    return d_separated(_drop_out_edges(dag, M), M, {y}, {x})


def frontdoor_failure(dag: Dag, x: str, y: str, M):
    """Description of the first failed front-door condition, or ``None``."""
    M = frozenset(M)
    if not M:
        return "empty mediator set"
    if not _directed_paths_intercepted(dag, x, y, M):
        return f"a directed path from {x} to {y} bypasses the mediators"
    trail = open_trail(_drop_out_edges(dag, {x}), {x}, M, frozenset())
    if trail is not None:
        return f"open back-door trail from {x} to mediators: " + " - ".join(trail)
    trail = open_trail(_drop_out_edges(dag, M), M, {y}, {x})
    if trail is not None:
        return f"back-door trail from mediators to {y} not blocked by {x}: " + " - ".join(trail)
    return None


# -- built-in diagram templates -----------------------------------------
#
# Canonical edge sets for the chain, confounder, mediator and road-risk
# diagrams.  Fig4Chain and Fig6Canonical take a chain depth >= 1.

TEMPLATE_IDS = (
    "Fig1a",
    "Fig1b",
    "Fig1c",
    "Fig1d",
    "Fig2a",
    "Fig2b",
    "Fig2c",
    "Fig3",
    "Fig4Chain",
    "Fig6Canonical",
)

_FIXED_TEMPLATES = {
    "Fig1a": (("Y_h", "Y_f"), [("Y_h", "Y_f")], ()),
    "Fig1b": (("Y_h", "X_c", "Y_f"), [("Y_h", "Y_f"), ("X_c", "Y_f")], ()),
    "Fig1c": (("Y_h", "X_c", "Y_f"), [("X_c", "Y_h"), ("X_c", "Y_f")], ()),
    "Fig1d": (("Y_h", "X_c", "Y_f"), [("Y_h", "X_c"), ("X_c", "Y_f")], ()),
    "Fig2a": (
        ("Y_h", "X_c", "Y_f", "U"),
        [("Y_h", "X_c"), ("X_c", "Y_f"), ("U", "Y_h"), ("U", "X_c")],
        ("U",),
    ),
    "Fig2b": (
        ("Y_h", "X_c", "Y_f", "U"),
        [("Y_h", "X_c"), ("X_c", "Y_f"), ("U", "X_c"), ("U", "Y_f")],
        ("U",),
    ),
    "Fig2c": (
        ("Y_h", "X_c", "Y_f", "U"),
        [("Y_h", "X_c"), ("X_c", "Y_f"), ("U", "Y_h"), ("U", "Y_f")],
        ("U",),
    ),
    "Fig3": (
        ("Y_h", "X_c", "Z", "Y_f", "U"),
        [("Y_h", "X_c"), ("X_c", "Z"), ("Z", "Y_f"), ("U", "X_c"), ("U", "Y_f")],
        ("U",),
    ),
}


def _fig4_chain(depth: int) -> Dag:
    states = [f"S_{i}" for i in range(depth + 2)]
    traffic = [f"T_{i}" for i in range(depth + 2)]
    nodes = ["D"] + traffic + states
    edges = []
    for i in range(depth + 2):
        edges.append((traffic[i], states[i]))
    for i in range(depth + 1):
        edges.append((states[i], states[i + 1]))
        edges.append(("D", states[i + 1]))
    return Dag(nodes, edges)


def _fig6_canonical(depth: int) -> Dag:
    states = [f"S_{i}" for i in range(depth + 1)]
    nodes = ["Y_h", "J_o", "U", "D"] + states + ["Y_f"]
    edges = [("Y_h", "J_o"), ("J_o", "D"), ("U", "D"), ("U", "Y_f")]
    for s in states:
        edges.append(("D", s))
    for i in range(depth):
        edges.append((states[i], states[i + 1]))
    edges.append((states[-1], "Y_f"))
    return Dag(nodes, edges, ("U",))


def template(name: str, depth: int | None = None) -> Dag:
    """Return a built-in diagram by id.

    ``Fig4Chain`` and ``Fig6Canonical`` require ``depth >= 1`` (also
    accepted inline, e.g. ``"Fig6Canonical(2)"``).
    """
    if "(" in name and name.endswith(")"):
        base, arg = name[:-1].split("(", 1)
        try:
            inline = int(arg)
        except ValueError:
            raise UnknownTemplate(f"bad template argument: {name!r}") from None
        if depth is not None and depth != inline:
            raise UnknownTemplate("conflicting depth arguments")
        name, depth = base, inline
    if name in _FIXED_TEMPLATES:
        nodes, edges, latent = _FIXED_TEMPLATES[name]
        return Dag(nodes, edges, latent)
    if name in ("Fig4Chain", "Fig6Canonical"):
        if depth is None or depth < 1:
            raise UnknownTemplate(f"{name} requires depth >= 1")
        return _fig4_chain(depth) if name == "Fig4Chain" else _fig6_canonical(depth)
    raise UnknownTemplate(f"unknown template: {name!r}")


# -- JSON ---------------------------------------------------------------


def dag_to_json(dag: Dag) -> dict:
    return {
        "nodes": list(dag.nodes),
        "edges": [list(e) for e in sorted(dag.edges)],
        "latent": sorted(dag.latent),
    }


def dag_from_json(doc: Mapping) -> Dag:
    try:
        return Dag(doc["nodes"], [tuple(e) for e in doc["edges"]], doc.get("latent", ()))
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph document: {exc}") from exc


def dag_dumps(dag: Dag) -> str:
    return json.dumps(dag_to_json(dag), indent=2, sort_keys=True)


def dag_loads(text: str) -> Dag:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from exc
    return dag_from_json(doc)
