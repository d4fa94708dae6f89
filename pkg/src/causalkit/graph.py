"""Directed and partially directed graphs over a fixed categorical variable scheme.

Graphs are immutable values: every mutation returns a new graph and the
input is left untouched.  A graph only makes sense relative to one
VariableScheme; edges are stored as (parent index, child index) pairs into
the scheme's variable order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CycleError, ShapeError, UnknownVariable


@dataclass(frozen=True)
class VariableScheme:
    """Ordered list of named categorical variables with ordered state labels."""

    variables: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        names = [name for name, _ in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        for name, states in self.variables:
            if not name:
                raise ValueError("variable names must be nonempty")
            if len(states) < 2:
                raise ValueError(f"variable {name!r} needs at least 2 states")
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(names)})

    @classmethod
    def of(cls, variables) -> "VariableScheme":
        return cls(tuple((name, tuple(states)) for name, states in variables))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def states(self, name_or_index) -> tuple[str, ...]:
        if isinstance(name_or_index, str):
            name_or_index = self.index(name_or_index)
        return self.variables[name_or_index][1]

    def cardinality(self, name_or_index) -> int:
        return len(self.states(name_or_index))

    def cardinalities(self) -> tuple[int, ...]:
        return tuple(len(states) for _, states in self.variables)

    def state_index(self, variable, label: str) -> int:
        states = self.states(variable)
        try:
            return states.index(label)
        except ValueError:
            raise UnknownVariable(
                f"variable {variable!r} has no state {label!r}"
            ) from None


def is_acyclic(adjacency) -> bool:
    """True iff the 0/1 adjacency matrix describes a cycle-free digraph.

    A nonzero diagonal entry (self-loop) counts as a cycle.
    """
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"adjacency must be square, got shape {a.shape}")
    n = a.shape[0]
    indegree = a.sum(axis=0).astype(int)
    frontier = [v for v in range(n) if indegree[v] == 0 and not a[v, v]]
    if a.diagonal().any():
        return False
    seen = 0
    while frontier:
        u = frontier.pop()
        seen += 1
        for v in np.flatnonzero(a[u]):
            indegree[v] -= 1
            if indegree[v] == 0:
                frontier.append(int(v))
    return seen == n


@dataclass(frozen=True)
class Dag:
    """Acyclic digraph over a scheme.  Immutable; use add/remove for new values."""

    scheme: VariableScheme
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise CycleError(f"self-loop on {self.scheme.names[u]}")
        if not is_acyclic(self.adjacency()):
            raise CycleError("edge set contains a directed cycle")

    @classmethod
    def from_names(cls, scheme: VariableScheme, edges) -> "Dag":
        pairs = frozenset(
            (scheme.index(u), scheme.index(v)) for u, v in edges
        )
        return cls(scheme, pairs)

    def adjacency(self) -> np.ndarray:
        n = len(self.scheme)
        a = np.zeros((n, n), dtype=np.int8)
        for u, v in self.edges:
            a[u, v] = 1
        return a

    def parents(self, variable) -> tuple[int, ...]:
        v = self._resolve(variable)
        return tuple(sorted(u for u, w in self.edges if w == v))

    def children(self, variable) -> tuple[int, ...]:
        u = self._resolve(variable)
        return tuple(sorted(w for s, w in self.edges if s == u))

    def _resolve(self, variable) -> int:
        return self.scheme.index(variable) if isinstance(variable, str) else variable

    def add(self, parent, child) -> "Dag":
        u, v = self._resolve(parent), self._resolve(child)
        if u == v:
            raise CycleError(f"self-loop on {self.scheme.names[u]}")
        if self._reaches(v, u):
            raise CycleError(
                f"adding {self.scheme.names[u]} -> {self.scheme.names[v]} "
                "would create a directed cycle"
            )
        return Dag(self.scheme, self.edges | {(u, v)})

    def remove(self, parent, child) -> "Dag":
        u, v = self._resolve(parent), self._resolve(child)
        return Dag(self.scheme, self.edges - {(u, v)})

    def _reaches(self, start: int, goal: int) -> bool:
        # DFS from start following directed edges; used as the cycle gate.
        stack, seen = [start], set()
        succ = {}
        for a, b in self.edges:
            succ.setdefault(a, []).append(b)
        while stack:
            u = stack.pop()
            if u == goal:
                return True
            if u in seen:
                continue
            seen.add(u)
            stack.extend(succ.get(u, ()))
        return False

    def topological_order(self) -> list[int]:
        """Kahn's algorithm; ties broken by scheme index for determinism."""
        n = len(self.scheme)
        indegree = [0] * n
        for _, v in self.edges:
            indegree[v] += 1
        order = []
        ready = sorted(v for v in range(n) if indegree[v] == 0)
        while ready:
            u = ready.pop(0)
            order.append(u)
            changed = False
            for v in self.children(u):
                indegree[v] -= 1
                if indegree[v] == 0:
                    ready.append(v)
                    changed = True
            if changed:
                ready.sort()
        return order


def mutate_edge(graph: Dag, action: str, parent: str, child: str) -> Dag:
    """Value-semantics edge mutation: returns a new Dag, input unmodified."""
    if action == "add":
        return graph.add(parent, child)
    if action == "remove":
        return graph.remove(parent, child)
    raise ValueError(f"action must be 'add' or 'remove', got {action!r}")


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph: disjoint directed and undirected edge sets."""

    scheme: VariableScheme
    directed: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    undirected: frozenset[frozenset[int]] = field(default_factory=frozenset)

    def __post_init__(self):
        und = frozenset(frozenset(e) for e in self.undirected)
        object.__setattr__(self, "undirected", und)
        for u, v in self.directed:
            if u == v:
                raise CycleError(f"self-loop on {self.scheme.names[u]}")
            if frozenset((u, v)) in und:
                raise ValueError("edge appears both directed and undirected")
        seen = set()
        for u, v in self.directed:
            pair = frozenset((u, v))
            if pair in seen:
                raise ValueError("both orientations of one pair present")
            seen.add(pair)

    @classmethod
    def from_names(cls, scheme, directed=(), undirected=()) -> "Pdag":
        d = frozenset((scheme.index(u), scheme.index(v)) for u, v in directed)
        u = frozenset(
            frozenset((scheme.index(a), scheme.index(b))) for a, b in undirected
        )
        return cls(scheme, d, u)

    def adjacent(self, u: int, v: int) -> bool:
        return (
            (u, v) in self.directed
            or (v, u) in self.directed
            or frozenset((u, v)) in self.undirected
        )

    def skeleton_pairs(self) -> set[frozenset[int]]:
        pairs = {frozenset(e) for e in self.directed}
        pairs |= set(self.undirected)
        return pairs


def topological_order(dag: Dag) -> list[str]:
    return [dag.scheme.names[i] for i in dag.topological_order()]


def _undirected_pairs_sorted(pdag: Pdag) -> list[tuple[int, int]]:
    return sorted(tuple(sorted(e)) for e in pdag.undirected)


def serialize_graph(graph, format: str = "json") -> str:
    """Render a Dag or Pdag as graphviz DOT or as round-trippable JSON."""
    scheme = graph.scheme
    directed = sorted(graph.edges if isinstance(graph, Dag) else graph.directed)
    undirected = [] if isinstance(graph, Dag) else _undirected_pairs_sorted(graph)
    if format == "dot":
        lines = ["digraph G {"]
        for name in scheme.names:
            lines.append(f'  "{name}";')
        for u, v in directed:
            lines.append(f'  "{scheme.names[u]}" -> "{scheme.names[v]}";')
        for u, v in undirected:
            lines.append(f'  "{scheme.names[u]}" -> "{scheme.names[v]}" [dir=none];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    if format == "json":
        payload = {
            "variables": [
                {"name": name, "states": list(states)}
                for name, states in scheme.variables
            ],
            "directed": [list(e) for e in directed],
            "undirected": [list(e) for e in undirected],
        }
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown format {format!r}")


def parse_graph_json(text: str, scheme: VariableScheme | None = None):
    """Inverse of serialize_graph(json).  Returns a Dag when no undirected edges."""
    payload = json.loads(text)
    if scheme is None:
        scheme = VariableScheme.of(
            (v["name"], v["states"]) for v in payload["variables"]
        )
    directed = frozenset((u, v) for u, v in payload["directed"])
    undirected = payload.get("undirected", [])
    if undirected:
        return Pdag(
            scheme, directed, frozenset(frozenset(e) for e in undirected)
        )
    return Dag(scheme, directed)
