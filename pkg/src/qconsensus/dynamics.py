"""Quantized consensus vector field ``x' = -D x + A q(x)`` and consensus statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .quantize import q_vec


def field(g: Graph, x, linear: bool = False) -> np.ndarray:
    """Evaluate the vector field at ``x``.

    With ``linear=True`` the unquantized consensus field ``-L x`` is returned
    instead, for contrast runs.
    """
    x = np.asarray(x, dtype=float)
    if linear:
        return -(g.laplacian @ x)
    return g.weights @ q_vec(x) - g.out_degrees * x


def field_laplacian_form(g: Graph, x) -> np.ndarray:
    """``-L x + A (q(x) - x)``: consensus flow plus quantization disturbance."""
    x = np.asarray(x, dtype=float)
    return -(g.laplacian @ x) + g.weights @ (q_vec(x) - x)


def field_centered_form(g: Graph, x) -> np.ndarray:
    """``-L (x - x_a 1) + A (q(x) - x)`` with ``x_a`` the mean opinion."""
    x = np.asarray(x, dtype=float)
    return -(g.laplacian @ (x - x.mean())) + g.weights @ (q_vec(x) - x)


def field_cell(g: Graph, x, k) -> np.ndarray:
    """Affine field of cell ``k``: ``A k - D x``. Agrees with ``field`` on ``S_k``."""
    x = np.asarray(x, dtype=float)
    return g.weights @ np.asarray(k, dtype=float) - g.out_degrees * x


@dataclass(frozen=True)
class ConsensusStats:
    mean: float
    spread: float
    dist: float
    normalized_dist: float


def consensus_stats(x) -> ConsensusStats:
    x = np.asarray(x, dtype=float)
    mean = float(x.mean())
    dist = float(np.linalg.norm(x - mean))
    return ConsensusStats(mean, float(x.max() - x.min()), dist, dist / math.sqrt(x.size))
