"""Synthetic data generation.

Two generators: ancestral sampling from any fully parameterized network, and
an independent-marginals cohort generator matching the published summary
table.  Both use the Philox counter-based RNG so results are reproducible
across platforms for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bayesnet import BayesianNetwork, Cpd
from .data import CategoricalDataset
from .errors import MarginalMismatch, UnparameterizedNetwork
from .graph import Dag, VariableScheme
from . import nsclc


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class CohortSpec:
    n: int
    marginals: dict[str, tuple[float, ...]]
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise MarginalMismatch("n must be >= 1")
        for name, vec in self.marginals.items():
            if abs(sum(vec) - 1.0) > 1e-9:
                raise MarginalMismatch(f"marginals for {name} sum to {sum(vec)}")

    @staticmethod
    def nsclc_default(n: int = nsclc.COHORT_SIZE, seed: int = 0) -> "CohortSpec":
        return CohortSpec(n, dict(nsclc.COHORT_MARGINALS), seed)


def sample_from_network(
    net: BayesianNetwork, n: int, seed: int
) -> CategoricalDataset:
    """Draw n rows by ancestral sampling in topological order."""
    scheme = net.scheme
    for name in scheme.names:
        if name not in net.cpds:
            raise UnparameterizedNetwork(f"missing CPD for {name}")
    rng = _rng(seed)
    rows = np.zeros((n, len(scheme)), dtype=np.int64)
    for idx in net.dag.topological_order():
        name = scheme.names[idx]
        cpd = net.cpds[name]
        if cpd.parents:
            config = np.zeros(n, dtype=np.int64)
            for p in cpd.parents:
                config = config * scheme.cardinality(p) + rows[:, scheme.index(p)]
            probs = cpd.table[config]
        else:
            probs = np.broadcast_to(cpd.table[0], (n, cpd.table.shape[1]))
        u = rng.random(n)
        rows[:, idx] = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
    return CategoricalDataset(scheme, rows)


def generate_cohort(
    spec: CohortSpec, scheme: VariableScheme = nsclc.SCHEME
) -> CategoricalDataset:
    """Independent draws per variable from the marginal targets."""
    rng = _rng(spec.seed)
    rows = np.zeros((spec.n, len(scheme)), dtype=np.int64)
    for idx, name in enumerate(scheme.names):
        if name not in spec.marginals:
            raise MarginalMismatch(f"no marginal target for {name}")
        vec = np.asarray(spec.marginals[name], dtype=float)
        if vec.size != scheme.cardinality(name):
            raise MarginalMismatch(
                f"{name}: {vec.size} probabilities for "
                f"{scheme.cardinality(name)} states"
            )
        u = rng.random(spec.n)
        rows[:, idx] = (vec.cumsum() < u[:, None]).sum(axis=1)
    return CategoricalDataset(scheme, rows)


def random_network(dag: Dag, seed: int, concentration: float = 1.0) -> BayesianNetwork:
    """Random parameterization of a structure: Dirichlet rows per CPD."""
    rng = _rng(seed)
    scheme = dag.scheme
    cpds = {}
    for idx, name in enumerate(scheme.names):
        parents = tuple(scheme.names[p] for p in dag.parents(idx))
        n_configs = int(
            np.prod([scheme.cardinality(p) for p in parents])
        ) if parents else 1
        card = scheme.cardinality(name)
        table = rng.dirichlet([concentration] * card, size=n_configs)
        cpds[name] = Cpd(name, parents, table)
    return BayesianNetwork(dag, cpds)


def reference_network(seed: int = 7) -> BayesianNetwork:
    """Correlated NSCLC ground truth: the final refined structure with a
    seeded random parameterization.  Used wherever tests need a joint
    distribution rather than independent marginals."""
    return random_network(nsclc.v5_dag(), seed=seed, concentration=2.0)
