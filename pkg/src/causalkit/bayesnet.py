"""Bayesian-network parameterization and exact inference.

Factors carry an ordered variable-index scope and a dense value table with
one axis per scope variable.  variable_elimination is the production path;
brute_force_query enumerates the full joint and exists as its oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import CategoricalDataset, contingency_counts
from .errors import (
    CardinalityMismatch,
    StateSpaceTooLarge,
    UnknownVariable,
    UnparameterizedNetwork,
    ZeroEvidenceProbability,
)
from .graph import Dag, VariableScheme, parse_graph_json, serialize_graph


@dataclass(frozen=True)
class Cpd:
    """Row-stochastic table P(child state j | parent configuration i).

    Configuration indexing is row-major over the parent order, matching
    CountTable.
    """

    child: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        if table.ndim != 2:
            raise CardinalityMismatch("CPD table must be 2-D")
        if (table < 0).any() or np.abs(table.sum(axis=1) - 1.0).max() > 1e-9:
            raise CardinalityMismatch(f"CPD rows for {self.child} not normalized")


@dataclass(frozen=True)
class Factor:
    """Nonnegative dense table over an ordered subset of scheme variables."""

    scheme: VariableScheme
    variables: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        expected = tuple(self.scheme.cardinality(v) for v in self.variables)
        if values.shape != expected:
            raise CardinalityMismatch(
                f"factor shape {values.shape} != cardinalities {expected}"
            )


@dataclass(frozen=True)
class BayesianNetwork:
    dag: Dag
    cpds: dict[str, Cpd]

    def __post_init__(self):
        scheme = self.dag.scheme
        for idx, name in enumerate(scheme.names):
            if name not in self.cpds:
                raise UnparameterizedNetwork(f"missing CPD for {name}")
            cpd = self.cpds[name]
            expected = tuple(scheme.names[p] for p in self.dag.parents(idx))
            if cpd.parents != expected:
                raise UnparameterizedNetwork(
                    f"CPD parents for {name} are {cpd.parents}, dag says {expected}"
                )
            cards = [scheme.cardinality(p) for p in expected]
            shape = (int(np.prod(cards)) if cards else 1, scheme.cardinality(name))
            if cpd.table.shape != shape:
                raise UnparameterizedNetwork(
                    f"CPD for {name} has shape {cpd.table.shape}, expected {shape}"
                )

    @property
    def scheme(self) -> VariableScheme:
        return self.dag.scheme

    def to_json(self) -> str:
        payload = {
            "dag": json.loads(serialize_graph(self.dag, "json")),
            "cpds": {
                name: {"parents": list(c.parents), "table": c.table.tolist()}
                for name, c in self.cpds.items()
            },
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BayesianNetwork":
        payload = json.loads(text)
        dag = parse_graph_json(json.dumps(payload["dag"]))
        cpds = {
            name: Cpd(name, tuple(spec["parents"]), np.array(spec["table"]))
            for name, spec in payload["cpds"].items()
        }
        return cls(dag, cpds)


def fit_cpds(
    dag: Dag, data: CategoricalDataset, prior_ess: float
) -> BayesianNetwork:
    """Dirichlet posterior-mean CPDs with BDeu-consistent pseudocounts.

    P(j|i) = (n_ij + a/(N_i*N_j)) / (n_i + a/N_i); parent configurations
    never observed get the uniform distribution.
    """
    if prior_ess <= 0:
        raise ValueError("prior_ess must be positive")
    cpds = {}
    for idx, name in enumerate(dag.scheme.names):
        parents = tuple(dag.scheme.names[p] for p in dag.parents(idx))
        counts = contingency_counts(data, name, parents)
        a_i = prior_ess / counts.n_configs
        a_ij = a_i / counts.child_card
        table = (counts.n_ij + a_ij) / (counts.n_i + a_i)[:, None]
        cpds[name] = Cpd(name, parents, table)
    return BayesianNetwork(dag, cpds)


def cpd_to_factor(net: BayesianNetwork, name: str) -> Factor:
    scheme = net.scheme
    cpd = net.cpds[name]
    scope = tuple(scheme.index(p) for p in cpd.parents) + (scheme.index(name),)
    shape = tuple(scheme.cardinality(v) for v in scope)
    return Factor(scheme, scope, cpd.table.reshape(shape))


def factor_product(a: Factor, b: Factor) -> Factor:
    """Pointwise product on aligned assignments; scope is the ordered union."""
    if a.scheme != b.scheme:
        raise CardinalityMismatch("factors built over different schemes")
    scope = tuple(sorted(set(a.variables) | set(b.variables)))
    va = _broadcast(a, scope)
    vb = _broadcast(b, scope)
    return Factor(a.scheme, scope, va * vb)


def _broadcast(f: Factor, scope: tuple[int, ...]) -> np.ndarray:
    # Permute f's axes into scope order, then insert singleton axes.
    order = sorted(range(len(f.variables)), key=lambda i: scope.index(f.variables[i]))
    values = np.transpose(f.values, order)
    shape = [
        f.scheme.cardinality(v) if v in f.variables else 1 for v in scope
    ]
    return values.reshape(shape)


def factor_marginalize(f: Factor, out) -> Factor:
    """Sum out one variable; total mass is preserved."""
    idx = f.scheme.index(out) if isinstance(out, str) else out
    if idx not in f.variables:
        raise UnknownVariable(f"variable {out!r} not in factor scope")
    axis = f.variables.index(idx)
    scope = tuple(v for v in f.variables if v != idx)
    return Factor(f.scheme, scope, f.values.sum(axis=axis))


def factor_reduce(f: Factor, variable: int, state: int) -> Factor:
    """Slice the factor at variable=state and drop it from the scope."""
    axis = f.variables.index(variable)
    scope = tuple(v for v in f.variables if v != variable)
    return Factor(f.scheme, scope, np.take(f.values, state, axis=axis))


def _unit_factor(scheme: VariableScheme) -> Factor:
    return Factor(scheme, (), np.array(1.0))


def _min_fill_order(scopes: list[set[int]], to_eliminate: set[int]) -> list[int]:
    """Min-fill elimination ordering with variable-index tie-break."""
    adjacency: dict[int, set[int]] = {}
    for scope in scopes:
        for v in scope:
            adjacency.setdefault(v, set()).update(scope - {v})
    remaining = set(to_eliminate)
    order = []
    while remaining:
        best, best_fill = None, None
        for v in sorted(remaining):
            neighbors = adjacency.get(v, set()) - {v}
            fill = sum(
                1
                for a in neighbors
                for b in neighbors
                if a < b and b not in adjacency.get(a, set())
            )
            if best_fill is None or fill < best_fill:
                best, best_fill = v, fill
        order.append(best)
        remaining.discard(best)
        neighbors = adjacency.get(best, set()) - {best}
        for a in neighbors:
            adjacency.setdefault(a, set()).update(neighbors - {a})
            adjacency[a].discard(best)
        adjacency.pop(best, None)
    return order


def variable_elimination(
    net: BayesianNetwork,
    query,
    evidence: dict | None = None,
    order: list[int] | None = None,
) -> Factor:
    """Normalized posterior P(query | evidence) by sum-product elimination."""
    scheme = net.scheme
    query_idx = tuple(
        scheme.index(q) if isinstance(q, str) else q for q in query
    )
    ev = _resolve_evidence(scheme, evidence)
    if set(query_idx) & set(ev):
        raise ValueError("query and evidence overlap")

    factors = [cpd_to_factor(net, name) for name in scheme.names]
    reduced = []
    for f in factors:
        for var, state in ev.items():
            if var in f.variables:
                f = factor_reduce(f, var, state)
        reduced.append(f)

    keep = set(query_idx)
    to_eliminate = {
        v for f in reduced for v in f.variables if v not in keep
    }
    if order is None:
        order = _min_fill_order([set(f.variables) for f in reduced], to_eliminate)
    else:
        order = [v for v in order if v in to_eliminate]

    factors = reduced
    for var in order:
        bucket = [f for f in factors if var in f.variables]
        rest = [f for f in factors if var not in f.variables]
        if not bucket:
            continue
        product = bucket[0]
        for f in bucket[1:]:
            product = factor_product(product, f)
        factors = rest + [factor_marginalize(product, var)]

    result = _unit_factor(scheme)
    for f in factors:
        result = factor_product(result, f)
    # Reorder scope to the requested query order.
    if result.variables:
        perm = [result.variables.index(q) for q in query_idx]
        values = np.transpose(result.values, perm)
    else:
        values = result.values
    total = values.sum()
    if total <= 0:
        raise ZeroEvidenceProbability("evidence has probability zero")
    return Factor(scheme, query_idx, values / total)


def brute_force_query(
    net: BayesianNetwork, query, evidence: dict | None = None
) -> Factor:
    """Oracle: materialize the full joint, condition, and marginalize."""
    scheme = net.scheme
    cards = scheme.cardinalities()
    if int(np.prod(cards)) > 2**24:
        raise StateSpaceTooLarge(f"joint has {np.prod(cards)} entries")
    query_idx = tuple(
        scheme.index(q) if isinstance(q, str) else q for q in query
    )
    ev = _resolve_evidence(scheme, evidence)

    joint = np.ones(cards)
    all_vars = tuple(range(len(scheme)))
    for name in scheme.names:
        f = cpd_to_factor(net, name)
        axes = [
            cards[v] if v in f.variables else 1 for v in all_vars
        ]
        order = sorted(
            range(len(f.variables)), key=lambda i: f.variables[i]
        )
        joint = joint * np.transpose(f.values, order).reshape(axes)

    # Condition on evidence by slicing, then sum out everything but the query.
    index = [slice(None)] * len(all_vars)
    for var, state in ev.items():
        index[var] = state
    conditioned = joint[tuple(index)]
    kept = [v for v in all_vars if v not in ev]
    sum_axes = tuple(i for i, v in enumerate(kept) if v not in query_idx)
    marginal = conditioned.sum(axis=sum_axes)
    remaining = [v for v in kept if v in query_idx]
    if query_idx:
        marginal = np.transpose(
            marginal, [remaining.index(q) for q in query_idx]
        )
    total = marginal.sum()
    if total <= 0:
        raise ZeroEvidenceProbability("evidence has probability zero")
    return Factor(scheme, query_idx, marginal / total)


def _resolve_evidence(scheme: VariableScheme, evidence) -> dict[int, int]:
    ev = {}
    for key, value in (evidence or {}).items():
        var = scheme.index(key) if isinstance(key, str) else key
        state = (
            scheme.state_index(var, value) if isinstance(value, str) else int(value)
        )
        if not 0 <= state < scheme.cardinality(var):
            raise UnknownVariable(
                f"state {value!r} out of range for {scheme.names[var]}"
            )
        ev[var] = state
    return ev
