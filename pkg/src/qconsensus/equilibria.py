"""
Classification and enumeration of equilibria.

Three nested classes are distinguished: Carathéodory (the field vanishes),
extended (some cell field ``A k - D x`` vanishes at a point of the closed
cell), and Krasowskii (zero lies in the convex hull of the sector limits).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .dynamics import field
from .graph import Graph, make_graph
from .quantize import (DEFAULT_TOL, SECTOR_CAP, KrasowskiiHull, SectorCapExceeded,
                       krasowskii_vertices)

CARATHEODORY = "caratheodory"
EXTENDED = "extended"
KRASOWSKII = "krasowskii"

ENUMERATION_BUDGET = 10_000_000
_CHUNK = 1 << 16


@dataclass
class EquilibriumRecord:
    point: np.ndarray
    witness_cells: List[Tuple[int, ...]] = dc_field(default_factory=list)
    classes: frozenset = frozenset()
    certificate: Optional[np.ndarray] = None

    @property
    def spread(self) -> float:
        return float(self.point.max() - self.point.min())

    def is_(self, cls: str) -> bool:
        return cls in self.classes


@dataclass(frozen=True)
class MinNormResult:
    point: np.ndarray
    weights: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.point))


def min_norm_point(vertices, tol: float = 1e-12, max_iter: int = 10_000) -> MinNormResult:
    """Point of minimum Euclidean norm in the convex hull of the rows of ``vertices``.

    Wolfe's active-set algorithm: grow a corral of affinely independent
    vertices, and whenever the affine minimizer leaves the simplex, step back
    to its boundary and drop the vertices whose weight hits zero.
    """
    p = np.asarray(vertices, dtype=float)
    if p.ndim != 2 or p.shape[0] == 0:
        raise ValueError("need a non-empty (m, n) array of vertices")
    m = p.shape[0]
    sq = np.sum(p * p, axis=1)
    scale = max(float(sq.max()), 1.0)
    eps = 1e-14

    start = int(np.argmin(sq))
    corral = [start]
    lam = np.array([1.0])
    x = p[start].copy()

    for _ in range(max_iter):
        if x @ x <= tol * tol:
            break
        j = int(np.argmin(p @ x))
        if x @ x - p[j] @ x <= tol * scale or j in corral:
            break
        corral.append(j)
        lam = np.append(lam, 0.0)
        while True:
            mu = _affine_min_norm(p[corral])
            if np.all(mu > eps):
                lam = mu
                break
            neg = mu <= eps
            ratios = lam[neg] / (lam[neg] - mu[neg])
            theta = float(np.min(ratios))
            lam = lam + theta * (mu - lam)
            keep = lam > eps
            # theta is attained by at least one vertex; make sure it leaves.
            keep[np.flatnonzero(neg)[np.argmin(ratios)]] = False
            corral = [c for c, k in zip(corral, keep) if k]
            lam = np.clip(lam[keep], 0.0, None)
            lam = lam / lam.sum()
        x = lam @ p[corral]

    weights = np.zeros(m)
    weights[corral] = lam
    return MinNormResult(x, weights)


def _affine_min_norm(s):
    """Weights ``mu`` (summing to one) minimizing ``||mu @ s||``."""
    k = s.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = s @ s.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def zero_in_hull(hull, tol: float = DEFAULT_TOL) -> bool:
    """Whether some convex combination of the hull vertices has norm <= tol."""
    return hull_certificate(hull, tol) is not None


def hull_certificate(hull, tol: float = DEFAULT_TOL) -> Optional[np.ndarray]:
    """Convex weights putting the origin within ``tol`` of the hull, or None."""
    vertices = hull.vertices if isinstance(hull, KrasowskiiHull) else np.asarray(hull, dtype=float)
    res = min_norm_point(vertices)
    return res.weights if res.norm <= tol else None


def solve_cell_fixed_point(g: Graph, k) -> np.ndarray:
    """Zero of the affine cell field: ``x_i = (A k)_i / d_i``."""
    d = g.out_degrees
    if np.any(d <= 0):
        raise ValueError("every agent needs a positive out-degree for a cell fixed point")
    return g.weights @ np.asarray(k, dtype=float) / d


def classify_point(g: Graph, x, tol: float = DEFAULT_TOL, cap: int = SECTOR_CAP) -> EquilibriumRecord:
    """Classify ``x`` as an equilibrium of each kind it qualifies for.

    The sector limits at ``x`` are exactly the cell fields of the ``2^M``
    cells whose closure contains ``x``, so extended witnesses are the hull
    vertices that vanish.
    """
    x = np.asarray(x, dtype=float)
    hull = krasowskii_vertices(g, x, tol, cap)
    classes = set()
    if np.max(np.abs(field(g, x))) <= tol:
        classes.add(CARATHEODORY)

    zero_rows = np.flatnonzero(np.max(np.abs(hull.vertices), axis=1) <= tol)
    witnesses = sorted(tuple(int(v) for v in k) for k in hull.cells()[zero_rows])
    if witnesses:
        classes.add(EXTENDED)
        certificate = np.zeros(len(hull.vertices))
        certificate[zero_rows[0]] = 1.0
    else:
        certificate = hull_certificate(hull, tol)
    if certificate is not None:
        classes.add(KRASOWSKII)
    return EquilibriumRecord(x.copy(), witnesses, frozenset(classes), certificate)


def _record_from_witnesses(g: Graph, x, cells, tol: float = DEFAULT_TOL) -> EquilibriumRecord:
    """Record for a point already known to be extended, without enumerating its sectors."""
    try:
        rec = classify_point(g, x, tol)
    except SectorCapExceeded:
        classes = {EXTENDED, KRASOWSKII}
        if np.max(np.abs(field(g, x))) <= tol:
            classes.add(CARATHEODORY)
        rec = EquilibriumRecord(np.array(x, dtype=float), [], frozenset(classes))
    rec.witness_cells = sorted(set(rec.witness_cells) | {tuple(int(v) for v in k) for k in cells})
    rec.classes = rec.classes | {EXTENDED, KRASOWSKII}
    return rec


def _box_cells(k_lo, k_hi):
    lo = np.asarray(k_lo, dtype=np.int64)
    hi = np.asarray(k_hi, dtype=np.int64)
    sizes = hi - lo + 1
    total = int(np.prod(sizes))
    # Lexicographic order: last coordinate varies fastest.
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        cells = np.empty((idx.size, lo.size), dtype=np.int64)
        rem = idx
        for c in range(lo.size - 1, -1, -1):
            cells[:, c] = lo[c] + rem % sizes[c]
            rem = rem // sizes[c]
        yield cells


def box_volume(k_lo, k_hi) -> int:
    lo = np.asarray(k_lo, dtype=np.int64)
    hi = np.asarray(k_hi, dtype=np.int64)
    if lo.shape != hi.shape or np.any(hi < lo):
        raise ValueError("need k_lo <= k_hi componentwise, same length")
    return int(np.prod([int(v) for v in hi - lo + 1]))


def enumerate_extended_equilibria(g: Graph, k_lo, k_hi, budget: int = ENUMERATION_BUDGET,
                                  tol: float = DEFAULT_TOL) -> List[EquilibriumRecord]:
    """Every extended equilibrium whose witness cell lies in the box ``[k_lo, k_hi]``."""
    k_lo = np.broadcast_to(np.asarray(k_lo, dtype=np.int64), (g.n,))
    k_hi = np.broadcast_to(np.asarray(k_hi, dtype=np.int64), (g.n,))
    volume = box_volume(k_lo, k_hi)
    if volume > budget:
        raise ValueError(f"box holds {volume} cells, over the budget of {budget}")
    return extended_equilibria_from_cells(g, _box_cells(k_lo, k_hi), tol)


def extended_equilibria_from_cells(g: Graph, cell_chunks: Iterable[np.ndarray],
                                   tol: float = DEFAULT_TOL) -> List[EquilibriumRecord]:
    """Keep the cells whose affine fixed point lies in the closed cell, then classify.

    The membership test ``|(A k)_i - d_i k_i| <= d_i / 2`` is done before
    dividing by ``d_i``, so integer weights give an exact decision.
    """
    d = g.out_degrees
    if np.any(d <= 0):
        raise ValueError("every agent needs a positive out-degree")
    a = np.array(g.weights)
    found = {}
    for cells in cell_chunks:
        cells = np.atleast_2d(cells)
        ak = cells.astype(float) @ a.T
        ok = np.all(np.abs(ak - d * cells) <= 0.5 * d * (1.0 + 1e-12), axis=1)
        for k, num in zip(cells[ok], ak[ok]):
            x = num / d
            key = tuple(np.round(x / 1e-9).astype(np.int64))
            found.setdefault(key, (x, []))[1].append(tuple(int(v) for v in k))

    records = [_record_from_witnesses(g, x, cells, tol) for x, cells in found.values()]
    records.sort(key=lambda r: r.witness_cells[0])
    return records


def monotone_path_cells(n: int, k_max: int) -> Iterable[np.ndarray]:
    """Nondecreasing integer cells with ``k_1 = 0`` and entries in ``[0, k_max]``."""
    chunk = []
    for tail in itertools.combinations_with_replacement(range(k_max + 1), n - 1):
        chunk.append((0,) + tail)
        if len(chunk) == _CHUNK:
            yield np.array(chunk, dtype=np.int64)
            chunk = []
    if chunk:
        yield np.array(chunk, dtype=np.int64)


def path_spread_bound(n: int) -> float:
    """Largest possible spread of an extended equilibrium on the n-path."""
    return (n - 2) ** 2 / 4


def path_extremal_spread(n: int) -> float:
    return (n - 2) ** 2 / 4 if n % 2 == 0 else (n - 1) * (n - 3) / 4


def path_extremal_cell(n: int) -> np.ndarray:
    if n < 3:
        raise ValueError("the extremal construction needs n >= 3")
    k = np.zeros(n, dtype=np.int64)
    for i in range(2, n + 1):
        step = i - 2 if i <= (n + 2) / 2 else n - i
        k[i - 1] = k[i - 2] + step
    return k


def path_extremal_equilibrium(n: int) -> EquilibriumRecord:
    """Extended equilibrium of the n-path whose spread attains the bound (odd n: just below)."""
    k = path_extremal_cell(n)
    g = make_graph("path", n=n)
    x = solve_cell_fixed_point(g, k)
    if not np.all(np.abs(x - k) <= 0.5):
        raise AssertionError("extremal cell failed its own membership test")
    return _record_from_witnesses(g, x, [k])


def path_growth_constants() -> dict:
    """Leading N^2 coefficients of the tube radius and of the extremal equilibrium distance."""
    return {"bound_coefficient": 2 / math.pi ** 2, "extremal_coefficient": 1 / math.sqrt(120)}
