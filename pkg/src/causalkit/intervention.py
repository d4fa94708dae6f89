"""do-operator graph surgery and Average Treatment Effect estimation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .bayesnet import BayesianNetwork, Cpd, variable_elimination
from .errors import UnknownState, UnknownVariable
from .graph import Dag

TREATMENT_ROWS = ("Chemotherapy", "Targeted Therapy", "Immunotherapy")
MUTATION_COLUMNS = ("KRAS", "EGFR", "FGFR1", "ALK", "MET", "PIK3CA", "BRAF", "RET")


@dataclass(frozen=True)
class InterventionQuery:
    treatment: str
    treated_state: str
    control_state: str
    outcome: str
    outcome_values: dict[str, float]
    evidence: dict[str, str] = field(default_factory=dict)

    def validate(self, net: BayesianNetwork):
        scheme = net.scheme
        if self.outcome == self.treatment:
            raise UnknownVariable("outcome must differ from treatment")
        if self.treatment in self.evidence:
            raise UnknownVariable("treatment cannot also be evidence")
        for state in self.treated_state, self.control_state:
            scheme.state_index(self.treatment, state)
        missing = set(scheme.states(self.outcome)) - set(self.outcome_values)
        if missing:
            raise UnknownState(f"outcome_values missing states {sorted(missing)}")


def apply_do(net: BayesianNetwork, node: str, state: str) -> BayesianNetwork:
    """Graph surgery for do(node=state): sever incoming edges, point-mass CPD."""
    scheme = net.scheme
    idx = scheme.index(node)
    state_idx = scheme.state_index(node, state)
    dag = Dag(
        scheme,
        frozenset(e for e in net.dag.edges if e[1] != idx),
    )
    point = np.zeros((1, scheme.cardinality(node)))
    point[0, state_idx] = 1.0
    cpds = dict(net.cpds)
    cpds[node] = Cpd(node, (), point)
    return BayesianNetwork(dag, cpds)


def _expected_outcome(net, q: InterventionQuery, arm_state: str, infer) -> float:
    mutilated = apply_do(net, q.treatment, arm_state)
    posterior = infer(mutilated, (q.outcome,), dict(q.evidence))
    values = np.array(
        [q.outcome_values[s] for s in net.scheme.states(q.outcome)]
    )
    return float(posterior.values @ values)


def ate(net: BayesianNetwork, q: InterventionQuery, infer=variable_elimination) -> float:
    """E[v(outcome) | do(treated), evidence] - same under do(control).

    Evidence is conditioned after surgery on each mutilated network; both
    arms share identical evidence.  `infer` is swappable for the brute-force
    oracle in tests.
    """
    q.validate(net)
    if q.treated_state == q.control_state:
        return 0.0
    treated = _expected_outcome(net, q, q.treated_state, infer)
    control = _expected_outcome(net, q, q.control_state, infer)
    return treated - control


@dataclass(frozen=True)
class AteGrid:
    treatments: tuple[str, ...]
    mutations: tuple[str, ...]
    cells: np.ndarray  # rows = treatments, columns = mutations

    def to_text(self) -> str:
        header = ["Treatment Category"] + list(self.mutations)
        rows = [header]
        for t, row in zip(self.treatments, self.cells):
            rows.append([t] + [f"{v:.6f}" for v in row])
        widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
        return (
            "\n".join(
                "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                for row in rows
            )
            + "\n"
        )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["Treatment Category"] + list(self.mutations))
        for t, row in zip(self.treatments, self.cells):
            writer.writerow([t] + [f"{v:.6f}" for v in row])
        return out.getvalue()


def ate_grid(
    net: BayesianNetwork,
    treatments=TREATMENT_ROWS,
    mutations=MUTATION_COLUMNS,
    treatment_variable: str = "TREATMENTPLAN",
    control_state: str = "Unknown",
    outcome: str = "SURVIVALMONTHS",
    outcome_values: dict[str, float] | None = None,
    mutated_state: str | None = None,
) -> AteGrid:
    """ATE per (treatment state, mutation gene), evidence = gene present.

    Default outcome valuation is the indicator of the most favorable
    survival bin.
    """
    scheme = net.scheme
    if outcome_values is None:
        states = scheme.states(outcome)
        outcome_values = {s: 0.0 for s in states}
        outcome_values[states[-1]] = 1.0
    cells = np.zeros((len(treatments), len(mutations)))
    for i, t in enumerate(treatments):
        for j, gene in enumerate(mutations):
            present = (
                mutated_state
                if mutated_state is not None
                else scheme.states(gene)[-1]
            )
            q = InterventionQuery(
                treatment=treatment_variable,
                treated_state=t,
                control_state=control_state,
                outcome=outcome,
                outcome_values=outcome_values,
                evidence={gene: present},
            )
            cells[i, j] = ate(net, q)
    return AteGrid(tuple(treatments), tuple(mutations), cells)
