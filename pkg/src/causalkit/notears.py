"""Score-based structure learning via continuous optimization.

Minimizes a least-squares reconstruction loss with an l1 penalty subject to
the smooth acyclicity constraint h(W) = tr(e^{W∘W}) - d = 0, handled by an
augmented Lagrangian with an L-BFGS-B inner solver.  The matrix exponential
uses scipy's scaling-and-squaring Pade implementation (expm).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.optimize as sopt

from .data import CategoricalDataset
from .errors import ShapeError
from .graph import Dag, VariableScheme, is_acyclic

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightedAdjacency:
    scheme: VariableScheme
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "w", w)
        d = len(self.scheme)
        if w.shape != (d, d):
            raise ShapeError(f"W has shape {w.shape}, expected ({d}, {d})")
        if not np.isfinite(w).all():
            raise ShapeError("W has non-finite entries")


@dataclass(frozen=True)
class NotearsConfig:
    max_iter: int = 100
    h_tol: float = 1e-8
    w_threshold: float = 0.5
    l1_penalty: float = 0.1
    rho_init: float = 1.0
    rho_max: float = 1e16
    alpha_init: float = 0.0

    def __post_init__(self):
        if min(self.max_iter, self.h_tol, self.w_threshold, self.rho_init,
               self.rho_max) <= 0 or self.l1_penalty < 0:
            raise ValueError("config values must be positive")
        if self.h_tol >= 1:
            raise ValueError("h_tol must be < 1")


@dataclass(frozen=True)
class NotearsResult:
    raw: WeightedAdjacency
    dag: Dag
    h_final: float
    converged: bool
    repaired_edges: tuple[tuple[int, int], ...] = ()


def acyclicity_h(w: np.ndarray):
    """h(W) = tr(e^{W∘W}) - d and its gradient (e^{W∘W})^T ∘ 2W."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ShapeError(f"W must be square, got {w.shape}")
    e = sla.expm(w * w)
    h = float(np.trace(e)) - w.shape[0]
    grad = e.T * 2.0 * w
    return h, grad


def objective_and_grad(w: np.ndarray, x: np.ndarray, l1: float):
    """Least-squares loss 0.5/N ||X - XW||_F^2 + l1 ||W||_1 and the
    gradient of its smooth part."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.ndim != 2 or w.shape != (x.shape[1], x.shape[1]):
        raise ShapeError(f"incompatible shapes X{x.shape}, W{w.shape}")
    n = x.shape[0]
    residual = x - x @ w
    loss = 0.5 / n * float((residual ** 2).sum()) + l1 * float(np.abs(w).sum())
    grad = -1.0 / n * x.T @ residual
    return loss, grad


def standardize(matrix: np.ndarray, scale: bool = False) -> np.ndarray:
    """Center columns (constant columns become all-zero); with scale=True
    also divide by the standard deviation.

    Centering without rescaling keeps regression weights in the data's
    units; equalizing variances would make edge direction unidentifiable
    for the least-squares loss.
    """
    x = np.asarray(matrix, dtype=float)
    out = x - x.mean(axis=0)
    if scale:
        std = x.std(axis=0)
        out = out / np.where(std == 0, 1.0, std)
        out[:, std == 0] = 0.0
    return out


def _solve_subproblem(w0, x, l1, rho, alpha, d):
    """Inner minimization of loss + (rho/2) h^2 + alpha h, with |W| split
    into positive and negative parts so L-BFGS-B handles the l1 term."""

    def func(theta):
        w = (theta[: d * d] - theta[d * d:]).reshape(d, d)
        loss, grad_smooth = objective_and_grad(w, x, 0.0)
        h, grad_h = acyclicity_h(w)
        value = loss + 0.5 * rho * h * h + alpha * h + l1 * theta.sum()
        grad_w = grad_smooth + (rho * h + alpha) * grad_h
        grad = np.concatenate([grad_w.ravel() + l1, -grad_w.ravel() + l1])
        return value, grad

    theta0 = np.concatenate([np.maximum(w0, 0).ravel(), np.maximum(-w0, 0).ravel()])
    bounds = [(0, 0) if i == j else (0, None) for _ in range(2) for i in range(d) for j in range(d)]
    result = sopt.minimize(
        func,
        theta0,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={"gtol": 1e-6},
    )
    theta = result.x
    return (theta[: d * d] - theta[d * d:]).reshape(d, d)


def notears_fit(
    data, config: NotearsConfig = NotearsConfig(), scheme: VariableScheme | None = None
) -> NotearsResult:
    """Fit the weighted adjacency and threshold it to a Dag.

    `data` is a CategoricalDataset (encoded to standardized state indices)
    or a raw numeric matrix with an explicit scheme.
    """
    if isinstance(data, CategoricalDataset):
        scheme = data.scheme
        x = standardize(data.rows)
    else:
        if scheme is None:
            raise ShapeError("raw matrix input requires a scheme")
        x = standardize(data)
    d = len(scheme)

    w = np.zeros((d, d))
    rho, alpha = config.rho_init, config.alpha_init
    h = np.inf
    for _ in range(config.max_iter):
        h_prev = h
        while rho < config.rho_max:
            w_new = _solve_subproblem(w, x, config.l1_penalty, rho, alpha, d)
            h_new, _ = acyclicity_h(w_new)
            if h_new > 0.25 * h_prev:
                rho *= 10.0
            else:
                break
        w, h = w_new, h_new
        alpha += rho * h
        if h <= config.h_tol or rho >= config.rho_max:
            break
    converged = h <= config.h_tol
    if not converged:
        log.warning("did not reach h <= %g (final h = %g)", config.h_tol, h)

    thresholded = np.where(np.abs(w) >= config.w_threshold, w, 0.0)
    np.fill_diagonal(thresholded, 0.0)
    repaired = []
    while not is_acyclic((thresholded != 0).astype(int)):
        # Drop the weakest surviving edge on some cycle until acyclic.
        u, v = _weakest_cycle_edge(thresholded)
        repaired.append((u, v))
        thresholded[u, v] = 0.0
    if repaired:
        log.warning("removed %d cycle edges after thresholding", len(repaired))
    edges = frozenset(
        (int(u), int(v)) for u, v in zip(*np.nonzero(thresholded))
    )
    return NotearsResult(
        raw=WeightedAdjacency(scheme, w),
        dag=Dag(scheme, edges),
        h_final=h,
        converged=converged,
        repaired_edges=tuple(repaired),
    )


def _weakest_cycle_edge(w: np.ndarray):
    """Smallest-|weight| edge among those participating in a cycle."""
    support = w != 0
    d = w.shape[0]
    reach = support | np.eye(d, dtype=bool)
    for _ in range(d):
        reach = reach | (reach @ reach)
    candidates = [
        (abs(w[u, v]), u, v)
        for u, v in zip(*np.nonzero(support))
        if reach[v, u]
    ]
    _, u, v = min(candidates)
    return int(u), int(v)
