"""
Uniform quantizer, cell lattice and the Krasowskii regularization of the field.

Each state lies in exactly one half-open cell ``S_k = {k_i - 1/2 <= x_i < k_i + 1/2}``
and ``q_vec`` returns that ``k``. On the boundary hyperplanes ``x_i = k_i + 1/2``
the field jumps; a sector mask selects, for each boundary coordinate, whether
it is approached from below (bit 0, level ``k_i``) or above (bit 1, level ``k_i + 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .graph import Graph

DEFAULT_TOL = 1e-9
SECTOR_CAP = 16
# Sign threshold for H(t) = [t >= 0]; absorbs rounding in components that vanish exactly.
SIGN_TOL = 1e-12


class SectorCapExceeded(ValueError):
    """More boundary coordinates than the enumeration cap allows."""


def q_scalar(s: float) -> int:
    """``floor(s + 1/2)``; half-integers round up."""
    s = float(s)
    if not math.isfinite(s):
        raise ValueError(f"cannot quantize non-finite value {s}")
    k = math.floor(s)
    # s - floor(s) is exact in binary floating point, unlike s + 0.5.
    return k + 1 if s - k >= 0.5 else k


def q_vec(x) -> np.ndarray:
    """Componentwise quantizer; equivalently the index of the cell containing ``x``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot quantize a state with non-finite components")
    if x.size and np.max(np.abs(x)) >= 2.0 ** 62:
        raise ValueError("state components exceed the integer level range (2**62)")
    k = np.floor(x)
    return (k + (x - k >= 0.5)).astype(np.int64)


def in_cell(x, k) -> bool:
    """Membership of ``x`` in the half-open cell ``S_k``."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k)
    return bool(np.all((k - 0.5 <= x) & (x < k + 0.5)))


def boundary_set(x, tol: float = DEFAULT_TOL) -> Tuple[int, ...]:
    """Indices (0-based) of components within ``tol`` of a half-integer."""
    if not 0 < tol < 0.25:
        raise ValueError("tol must lie in (0, 1/4)")
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    return tuple(int(i) for i in np.flatnonzero(np.abs(frac - 0.5) <= tol))


@dataclass(frozen=True)
class SectorMask:
    bits: Tuple[int, ...]
    active: Tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("sector bits must be 0 or 1")
        if any(self.bits[i] for i in range(len(self.bits)) if i not in self.active):
            raise ValueError("bits outside the active set must be 0")

    def active_bits(self) -> Tuple[int, ...]:
        return tuple(self.bits[i] for i in self.active)


@dataclass(frozen=True)
class KrasowskiiHull:
    """Vertices ``f_B(x)`` whose convex hull is ``K f(x)``.

    Row ``r`` of ``vertices`` is the limit from the sector whose active bits
    are ``patterns[r]``.
    """

    base_point: np.ndarray
    active: Tuple[int, ...]
    patterns: np.ndarray
    vertices: np.ndarray

    def mask(self, row: int) -> SectorMask:
        return mask_from_bits(self.base_point.size, self.active, self.patterns[row])

    @property
    def masks(self) -> List[SectorMask]:
        return [self.mask(r) for r in range(len(self.vertices))]

    def cells(self) -> np.ndarray:
        """Cells adjacent to the base point, aligned with ``vertices``."""
        cells = np.repeat(_lower_levels(self.base_point, self.active)[None, :],
                          len(self.patterns), axis=0).astype(np.int64)
        cells[:, list(self.active)] += self.patterns
        return cells


def _lower_levels(x, active):
    """Quantized levels with every active coordinate taken from below (``x_j - 1/2``)."""
    levels = q_vec(x).astype(float)
    for j in active:
        levels[j] = round(x[j] - 0.5)
    return levels


def mask_from_bits(n: int, active, active_bits) -> SectorMask:
    bits = [0] * n
    for j, b in zip(active, active_bits):
        bits[j] = int(b)
    return SectorMask(tuple(bits), tuple(active))


def sector_field_limit(g: Graph, x, mask: SectorMask, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Limit of the field at ``x`` from the sector selected by ``mask``."""
    x = np.asarray(x, dtype=float)
    if len(mask.bits) != g.n or x.shape != (g.n,):
        raise ValueError("mask, state and graph sizes disagree")
    if tuple(mask.active) != boundary_set(x, tol):
        raise ValueError("mask.active does not match the boundary set of x")
    levels = _lower_levels(x, mask.active) + np.asarray(mask.bits, dtype=float)
    return g.weights @ levels - g.out_degrees * x


def _check_cap(active, cap):
    if len(active) > cap:
        raise SectorCapExceeded(
            f"{len(active)} boundary coordinates exceed the sector cap {cap} "
            f"({2 ** len(active)} sectors)")


def _all_bit_patterns(m: int) -> np.ndarray:
    # Row r holds the binary digits of r, most significant first.
    rows = np.arange(1 << m, dtype=np.int64)[:, None]
    return (rows >> np.arange(m - 1, -1, -1, dtype=np.int64)) & 1


def krasowskii_vertices(g: Graph, x, tol: float = DEFAULT_TOL, cap: int = SECTOR_CAP) -> KrasowskiiHull:
    """Enumerate the ``2^M`` sector limits of the field at ``x``.

    Masks are produced in binary counting order over the active indices,
    first active index most significant.
    """
    x = np.asarray(x, dtype=float)
    active = boundary_set(x, tol)
    _check_cap(active, cap)
    patterns = _all_bit_patterns(len(active))
    base = g.weights @ _lower_levels(x, active) - g.out_degrees * x
    vertices = base[None, :] + patterns @ g.weights[:, list(active)].T
    return KrasowskiiHull(x.copy(), active, patterns, vertices)


def _points_inward(values, bits):
    return np.all((values >= -SIGN_TOL) == (bits == 1), axis=-1)


def feasible_entry_sectors(g: Graph, x, tol: float = DEFAULT_TOL, cap: int = SECTOR_CAP) -> List[SectorMask]:
    """All masks ``B`` whose limit field points into sector ``B``.

    The condition is ``H((f_B)_i) = B_i`` on every boundary coordinate, with
    ``H(t) = 1`` for ``t >= 0``. Off the discontinuity set the single empty
    mask is returned.
    """
    hull = krasowskii_vertices(g, x, tol, cap)
    active = list(hull.active)
    if not active:
        return hull.masks
    ok = _points_inward(hull.vertices[:, active], hull.patterns)
    return [hull.mask(r) for r in np.flatnonzero(ok)]


def constructive_entry_sector(g: Graph, x, tol: float = DEFAULT_TOL) -> SectorMask:
    """One inward-pointing sector found by forward pinning.

    Starting from the all-below sector, every boundary coordinate whose limit
    component is nonnegative is pinned to 1. Components of ``f_B`` only grow
    as bits are raised (weights are nonnegative), so pinned bits stay valid
    and the loop ends after at most ``M`` passes.
    """
    x = np.asarray(x, dtype=float)
    active = boundary_set(x, tol)
    if not active:
        return mask_from_bits(g.n, (), ())
    cols = list(active)
    base = g.weights @ _lower_levels(x, active) - g.out_degrees * x
    sub = g.weights[np.ix_(cols, cols)]
    bits = np.zeros(len(cols))
    for _ in range(len(cols) + 1):
        comp = base[cols] + sub @ bits
        forced = (comp >= -SIGN_TOL) & (bits == 0)
        if not forced.any():
            break
        bits[forced] = 1.0
    return mask_from_bits(g.n, active, bits.astype(int))
