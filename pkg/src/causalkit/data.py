"""Dataset ingestion, contingency counting, and descriptive analytics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateParent,
    EmptyDataset,
    EmptyInput,
    SchemaMismatch,
)
from .graph import VariableScheme


@dataclass(frozen=True)
class DiscretizationSpec:
    """Bin edges for numeric columns, keyed by variable name.

    A variable with edges (a, b) maps values v < a to state 0, a <= v < b to
    state 1, and v >= b to state 2; in general len(edges) + 1 bins, which must
    equal the variable's cardinality.
    """

    bins: dict[str, tuple[float, ...]] = field(default_factory=dict)

    @staticmethod
    def default() -> "DiscretizationSpec":
        return DiscretizationSpec(
            {"AGE": (65.0, 75.0), "SURVIVALMONTHS": (12.0, 36.0)}
        )


@dataclass(frozen=True)
class CategoricalDataset:
    """Row-major table of state indices conforming to a scheme."""

    scheme: VariableScheme
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[1] != len(self.scheme):
            raise SchemaMismatch(
                f"rows have shape {rows.shape}, expected (N, {len(self.scheme)})"
            )
        cards = np.array(self.scheme.cardinalities())
        if rows.size and ((rows < 0) | (rows >= cards)).any():
            raise SchemaMismatch("state index out of range for its variable")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def column(self, variable) -> np.ndarray:
        idx = (
            self.scheme.index(variable) if isinstance(variable, str) else variable
        )
        return self.rows[:, idx]


@dataclass(frozen=True)
class CountTable:
    """Counts n_ij of child states per parent configuration.

    Parent configurations enumerate the Cartesian product of parent state
    spaces in row-major order over the stated parent order.
    """

    child: str
    parents: tuple[str, ...]
    n_ij: np.ndarray
    child_card: int
    parent_cards: tuple[int, ...]

    @property
    def n_i(self) -> np.ndarray:
        return self.n_ij.sum(axis=1)

    @property
    def n(self) -> int:
        return int(self.n_ij.sum())

    @property
    def n_configs(self) -> int:
        return self.n_ij.shape[0]


def load_csv(
    source,
    scheme: VariableScheme,
    discretization: DiscretizationSpec | None = None,
    delimiter: str = ",",
):
    """Parse a CSV byte/text stream into a CategoricalDataset.

    Rows with missing values in any scheme column are dropped; the drop count
    is returned alongside the dataset.
    """
    discretization = discretization or DiscretizationSpec()
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    source = io.StringIO(source)
    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset("no header row") from None
    header = [h.strip() for h in header]
    unknown = [h for h in header if h not in scheme.names]
    if unknown:
        raise SchemaMismatch(f"unknown columns: {unknown}")
    missing = [name for name in scheme.names if name not in header]
    if missing:
        raise SchemaMismatch(f"missing columns: {missing}")
    col_of = {name: header.index(name) for name in scheme.names}

    encoded, dropped = [], 0
    for raw in reader:
        if not raw:
            continue
        row = []
        ok = True
        for name in scheme.names:
            cell = raw[col_of[name]].strip()
            if cell == "" or cell.upper() in ("NA", "NAN"):
                ok = False
                break
            row.append(_encode_cell(cell, name, scheme, discretization))
        if ok:
            encoded.append(row)
        else:
            dropped += 1
    if not encoded:
        raise EmptyDataset("all rows dropped or input empty")
    return CategoricalDataset(scheme, np.array(encoded, dtype=np.int64)), dropped


def _encode_cell(cell, name, scheme, discretization):
    if name in discretization.bins:
        try:
            value = float(cell)
        except ValueError:
            # Fall through: a pre-binned label is also accepted.
            value = None
        if value is not None:
            edges = discretization.bins[name]
            state = int(np.searchsorted(edges, value, side="right"))
            if state >= scheme.cardinality(name):
                raise SchemaMismatch(
                    f"{name}: bin spec yields {state}, cardinality "
                    f"{scheme.cardinality(name)}"
                )
            return state
    states = scheme.states(name)
    if cell in states:
        return states.index(cell)
    raise SchemaMismatch(f"{name}: unmapped state label {cell!r}")


def write_csv(data: CategoricalDataset, delimiter: str = ",") -> str:
    """Inverse of load_csv on encoded datasets (state labels, no numerics)."""
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(data.scheme.names)
    states = [data.scheme.states(i) for i in range(len(data.scheme))]
    for row in data.rows:
        writer.writerow([states[j][row[j]] for j in range(len(row))])
    return out.getvalue()


def contingency_counts(
    data: CategoricalDataset, child: str, parents
) -> CountTable:
    """Tally child states against every parent configuration."""
    parents = tuple(parents)
    if len(set(parents)) != len(parents) or child in parents:
        raise DuplicateParent(f"bad parent set for {child}: {parents}")
    child_card = data.scheme.cardinality(child)
    parent_cards = tuple(data.scheme.cardinality(p) for p in parents)
    n_configs = int(np.prod(parent_cards)) if parents else 1

    child_col = data.column(child)
    if parents:
        config = np.zeros(data.n, dtype=np.int64)
        for p, card in zip(parents, parent_cards):
            config = config * card + data.column(p)
    else:
        config = np.zeros(data.n, dtype=np.int64)
    flat = config * child_card + child_col
    counts = np.bincount(flat, minlength=n_configs * child_card)
    n_ij = counts.reshape(n_configs, child_card)
    return CountTable(child, parents, n_ij, child_card, parent_cards)


def correlation_matrix(data: CategoricalDataset):
    """Pearson correlation over the integer state encodings.

    Cells involving a constant column are undefined; they are set to NaN and
    listed in the returned report rather than raising.
    """
    if data.n < 2:
        raise EmptyDataset("need at least 2 rows for correlation")
    x = data.rows.astype(float)
    std = x.std(axis=0)
    constant = np.flatnonzero(std == 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(x, rowvar=False)
    for i in constant:
        corr[i, :] = np.nan
        corr[:, i] = np.nan
    report = [data.scheme.names[i] for i in constant]
    return corr, report


def kaplan_meier(times, events):
    """Product-limit survival estimator.

    Returns a step function as a list of (event time, survival probability);
    censored subjects shrink the risk set without adding steps.
    """
    times = np.asarray(times, dtype=float)
    events = np.asarray(events, dtype=bool)
    if times.size == 0:
        raise EmptyInput("no subjects")
    if times.shape != events.shape:
        raise EmptyInput("times and events lengths differ")
    if (times < 0).any():
        raise EmptyInput("negative time")

    order = np.argsort(times, kind="stable")
    times, events = times[order], events[order]
    survival = 1.0
    steps = []
    i, n = 0, times.size
    at_risk = n
    while i < n:
        t = times[i]
        deaths = 0
        removed = 0
        while i < n and times[i] == t:
            deaths += int(events[i])
            removed += 1
            i += 1
        if deaths:
            survival *= 1.0 - deaths / at_risk
            steps.append((float(t), survival))
        at_risk -= removed
    return steps
