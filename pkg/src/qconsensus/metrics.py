"""Trajectory-level verdicts for the consensus and disagreement results."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .graph import Connectivity, Graph, SpectralSummary, connectivity_class, is_weight_balanced, spectral_summary
from .integrator import Trajectory


class HypothesisViolation(ValueError):
    """The graph does not satisfy the assumptions a check relies on."""


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    max_violation: float
    slack: float


@dataclass(frozen=True)
class BoundReport:
    normalized_tail_dist: float
    bound: float
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class LyapunovReport:
    ok: bool
    worst_excess: float
    slack: float


@dataclass(frozen=True)
class CellVisit:
    cell: Tuple[int, ...]
    enter: float
    exit: Optional[float]


def trajectory_fields(g: Graph, traj: Trajectory) -> np.ndarray:
    """Field value at every recorded sample, shape ``(samples, n)``."""
    return traj.q_states @ g.weights.T - traj.states * g.out_degrees


def _is_uniform_complete(g: Graph) -> bool:
    off = g.weights[~np.eye(g.n, dtype=bool)]
    return bool(off.size and off.min() > 0 and np.all(off == off[0]))


def _require_balanced_connected(g: Graph):
    if not is_weight_balanced(g, 1e-12):
        raise HypothesisViolation("graph is not weight-balanced")
    if connectivity_class(g) < Connectivity.WEAKLY_CONNECTED:
        raise HypothesisViolation("graph is not weakly connected")


def check_order_preservation(traj: Trajectory, g: Graph) -> CheckResult:
    """Largest reversal ``(x_i - x_j)^+`` over pairs ordered ``x_i <= x_j`` at t = 0.

    Pairs tied at t = 0 are counted in both orders, so this also measures
    departure from the invariant manifolds ``x_i = x_j``. Passing requires the
    violation to stay within ``n * h``.
    """
    if not _is_uniform_complete(g):
        raise HypothesisViolation("order preservation needs a complete graph with uniform weights")
    x0 = traj.states[0]
    ordered = x0[:, None] <= x0[None, :]
    np.fill_diagonal(ordered, False)
    worst = 0.0
    for start in range(0, len(traj), 512):
        block = traj.states[start:start + 512]
        diffs = block[:, :, None] - block[:, None, :]
        worst = max(worst, float(diffs[:, ordered].max(initial=0.0)))
    slack = g.n * traj.step
    return CheckResult(worst <= slack, worst, slack)


def check_m_bound(g: Graph, traj: Trajectory, tail_fraction: float = 0.2, tol: float = 1e-6,
                  summary: Optional[SpectralSummary] = None) -> BoundReport:
    """Tail-averaged ``||x - x_a 1|| / sqrt(N)`` against ``||A|| / (2 lambda_*)``."""
    _require_balanced_connected(g)
    if not 0 < tail_fraction < 1:
        raise ValueError("tail_fraction must lie in (0, 1)")
    summary = summary or spectral_summary(g)
    bound = summary.normalized_bound
    if bound is None:
        raise HypothesisViolation("lambda_* is undefined for this graph")
    tail = traj.tail(tail_fraction).states
    dist = np.linalg.norm(tail - tail.mean(axis=1, keepdims=True), axis=1) / math.sqrt(g.n)
    value = float(dist.mean())
    return BoundReport(value, bound, value <= bound + tol, bound - value)


def lyapunov_decay_check(g: Graph, traj: Trajectory, tol: float = 1e-6,
                         summary: Optional[SpectralSummary] = None) -> LyapunovReport:
    """Discrete decay of ``V = ||x - x_a 1||^2 / 2`` between samples.

    Each increment per unit time must stay below
    ``||y|| (-lambda_* ||y|| + ||A|| sqrt(N) / 2)`` evaluated at the earlier
    sample, up to ``tol`` plus the Euler remainder ``2 dt F^2`` with ``F`` the
    largest Euclidean field norm along the run.
    """
    _require_balanced_connected(g)
    summary = summary or spectral_summary(g)
    if summary.lambda_star is None:
        raise HypothesisViolation("lambda_* is undefined for this graph")
    if len(traj) < 2:
        return LyapunovReport(True, 0.0, 0.0)
    y = traj.states - traj.states.mean(axis=1, keepdims=True)
    ynorm = np.linalg.norm(y, axis=1)
    v = 0.5 * ynorm ** 2
    rate = np.diff(v) / traj.dt
    c = summary.a_norm * math.sqrt(g.n) / 2.0
    allowed = ynorm[:-1] * (-summary.lambda_star * ynorm[:-1] + c)
    excess = float((rate - allowed).max())
    f_sup = float(np.linalg.norm(trajectory_fields(g, traj), axis=1).max())
    slack = 2.0 * traj.dt * f_sup ** 2
    return LyapunovReport(excess <= tol + slack, excess, slack)


def cell_dwell_report(traj: Trajectory) -> List[CellVisit]:
    """Run-length encoding of the visited cells with entry and exit times."""
    q = traj.q_states
    if len(q) == 0:
        return []
    change = np.flatnonzero(np.any(q[1:] != q[:-1], axis=1)) + 1
    starts = np.concatenate(([0], change))
    visits = []
    for pos, s in enumerate(starts):
        exit_time = float(traj.times[starts[pos + 1]]) if pos + 1 < len(starts) else None
        visits.append(CellVisit(tuple(int(v) for v in q[s]), float(traj.times[s]), exit_time))
    return visits


def check_boundedness(g: Graph, traj: Trajectory) -> CheckResult:
    """Extremes stay inside ``[min(min x(0), q_m(0)), max(max x(0), q_M(0))]`` up to ``h F``."""
    x0, q0 = traj.states[0], traj.q_states[0]
    lo = min(float(x0.min()), float(q0.min()))
    hi = max(float(x0.max()), float(q0.max()))
    worst = max(lo - float(traj.states.min()), float(traj.states.max()) - hi, 0.0)
    slack = traj.step * float(np.abs(trajectory_fields(g, traj)).max())
    return CheckResult(worst <= slack, worst, slack)


@dataclass(frozen=True)
class LevelReport:
    ok: bool
    max_violation: float
    slack: float
    settle_time: float
    final_levels: Tuple[int, int]


def check_level_monotonicity(g: Graph, traj: Trajectory) -> LevelReport:
    """Smallest level nondecreasing, largest nonincreasing, up to ``h F`` past a boundary.

    A drop of the smallest level is measured by how far the new minimum lies
    below the lower edge ``q_m - 1/2`` of the previous smallest cell; a rise of
    the largest level symmetrically.
    """
    q_min = traj.q_states.min(axis=1)
    q_max = traj.q_states.max(axis=1)
    x_min = traj.states.min(axis=1)
    x_max = traj.states.max(axis=1)
    worst = 0.0
    drop = np.flatnonzero(q_min[1:] < q_min[:-1])
    if drop.size:
        worst = max(worst, float(np.max(q_min[drop] - 0.5 - x_min[drop + 1])))
    rise = np.flatnonzero(q_max[1:] > q_max[:-1])
    if rise.size:
        worst = max(worst, float(np.max(x_max[rise + 1] - q_max[rise] - 0.5)))
    worst = max(worst, 0.0)
    slack = traj.step * float(np.abs(trajectory_fields(g, traj)).max())
    moves = np.flatnonzero((q_min[1:] != q_min[:-1]) | (q_max[1:] != q_max[:-1]))
    settle = float(traj.times[moves[-1] + 1]) if moves.size else 0.0
    return LevelReport(worst <= slack, worst, slack, settle, (int(q_min[-1]), int(q_max[-1])))


def is_integer_consensus(x, tol: float = 1e-6) -> bool:
    x = np.asarray(x, dtype=float)
    h = round(float(x.mean()))
    return bool(np.all(np.abs(x - h) <= tol))
