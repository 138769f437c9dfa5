"""
Weighted directed communication graphs and their spectral quantities.

A graph is stored as a dense adjacency matrix ``weights`` with
``weights[i, j] = a_ij``: agent ``i`` listens to agent ``j`` with that weight.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction or edge-list input."""


class Connectivity(enum.IntEnum):
    """Connectivity classes, ordered from weakest to strongest."""

    DISCONNECTED = 0
    WEAKLY_CONNECTED = 1
    CONNECTED = 2
    STRONGLY_CONNECTED = 3

    @property
    def label(self) -> str:
        return self.name.lower()


GRAPH_KINDS = ("complete", "complete_bipartite", "path", "cycle",
               "random_geometric", "random_directed")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable weighted digraph with nonnegative weights and no self-loops."""

    weights: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise GraphError(f"adjacency must be square, got shape {w.shape}")
        if w.shape[0] < 2:
            raise GraphError("a graph needs at least 2 nodes")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise GraphError("weights must be finite and nonnegative")
        if np.any(np.diag(w) != 0):
            raise GraphError("self-loops are not allowed (a_ii must be 0)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def out_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    @property
    def in_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    @property
    def laplacian(self) -> np.ndarray:
        return np.diag(self.out_degrees) - self.weights

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.weights, self.weights.T))

    def __repr__(self):
        return f"Graph(kind={self.kind!r}, n={self.n}, edges={int(np.count_nonzero(self.weights))})"


@dataclass(frozen=True)
class SpectralSummary:
    out_degrees: np.ndarray
    in_degrees: np.ndarray
    sym_eigenvalues: np.ndarray
    lambda_star: Optional[float]
    a_norm: float
    m_radius: Optional[float]

    @property
    def normalized_bound(self) -> Optional[float]:
        """Radius of the limit tube in units of distance per sqrt(N): ||A|| / (2 lambda_*)."""
        if self.lambda_star is None:
            return None
        return self.a_norm / (2.0 * self.lambda_star)


def make_graph(kind: str, seed: int = 0, **params) -> Graph:
    """
    Build one of the standard graph families with unit weights.

    Parameters
    ----------
    kind : str
        ``complete``, ``path`` and ``cycle`` take ``n``; ``complete_bipartite``
        takes ``p`` and ``q``; ``random_geometric`` takes ``n`` and ``radius``;
        ``random_directed`` takes ``n`` and ``probability``.
    seed : int
        Seed for the random families (``numpy.random.default_rng``).
    """
    if kind not in GRAPH_KINDS:
        raise GraphError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")

    if kind == "complete_bipartite":
        p, q = _int_param(params, "p", 1), _int_param(params, "q", 1)
        n = p + q
        if n < 2:
            raise GraphError("complete_bipartite needs p + q >= 2")
        w = np.zeros((n, n))
        w[:p, p:] = 1.0
        w[p:, :p] = 1.0
        return Graph(w, kind, {"p": p, "q": q})

    n = _int_param(params, "n", 2)
    if kind == "complete":
        w = np.ones((n, n)) - np.eye(n)
        return Graph(w, kind, {"n": n})
    if kind == "path":
        w = np.diag(np.ones(n - 1), 1)
        return Graph(w + w.T, kind, {"n": n})
    if kind == "cycle":
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        w = np.zeros((n, n))
        idx = np.arange(n)
        w[idx, (idx + 1) % n] = 1.0
        w[(idx + 1) % n, idx] = 1.0
        return Graph(w, kind, {"n": n})

    if seed < 0:
        raise GraphError("seed must be a nonnegative integer")
    rng = np.random.default_rng(seed)
    if kind == "random_geometric":
        radius = float(params.get("radius", 0.2))
        if not radius > 0:
            raise GraphError("radius must be positive")
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        w = (dist <= radius).astype(float)
        np.fill_diagonal(w, 0.0)
        return Graph(w, kind, {"n": n, "radius": radius, "seed": seed})

    # random_directed
    prob = float(params.get("probability", 0.1))
    if not 0.0 <= prob <= 1.0:
        raise GraphError("probability must lie in [0, 1]")
    w = (rng.uniform(size=(n, n)) < prob).astype(float)
    np.fill_diagonal(w, 0.0)
    return Graph(w, kind, {"n": n, "probability": prob, "seed": seed})


def _int_param(params, name, minimum):
    if name not in params:
        raise GraphError(f"missing graph parameter {name!r}")
    value = params[name]
    if int(value) != value or value < minimum:
        raise GraphError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def load_edge_list(text) -> Graph:
    """Parse an ``i j w`` edge list (1-based ids, ``#`` comments) into a Graph.

    ``text`` may be a string or an iterable of lines (e.g. an open file).
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    edges = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'i j w', got {raw!r}")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphError(f"line {lineno}: cannot parse {raw!r}") from None
        if i < 1 or j < 1:
            raise GraphError(f"line {lineno}: node ids are 1-based")
        if i == j:
            raise GraphError(f"line {lineno}: self-loop on node {i}")
        if not (w > 0 and math.isfinite(w)):
            raise GraphError(f"line {lineno}: weight must be positive, got {w}")
        if (i, j) in edges and edges[(i, j)] != w:
            raise GraphError(f"line {lineno}: edge {i} {j} repeated with a different weight")
        edges[(i, j)] = w
    if not edges:
        raise GraphError("edge list contains no edges")
    n = max(max(i, j) for i, j in edges)
    weights = np.zeros((n, n))
    for (i, j), w in edges.items():
        weights[i - 1, j - 1] = w
    return Graph(weights, "edge_list", {"n": n})


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps visit pairs ``(p, q)`` in row order and stop once the Frobenius
    norm of the off-diagonal part drops below ``tol``.

    Returns
    -------
    eigenvalues : numpy.ndarray
        Ascending.
    eigenvectors : numpy.ndarray
        Columns matching ``eigenvalues``.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh needs a square matrix")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("jacobi_eigh needs a symmetric matrix")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)

    for _ in range(max_sweeps):
        if _off_norm(a) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                # Below this the rotation angle underflows and the update is a no-op.
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _off_norm(a) >= tol:
            raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _off_norm(a):
    off = a[~np.eye(a.shape[0], dtype=bool)]
    return math.sqrt(float(off @ off))


def spectral_summary(g: Graph, tol: float = 1e-9) -> SpectralSummary:
    """Degrees, lambda_* of Sym(L), spectral norm of A and the limit-tube radius."""
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    lap = g.laplacian
    sym_eigs, _ = jacobi_eigh(0.5 * (lap + lap.T), tol=tol)
    nonzero = sym_eigs[np.abs(sym_eigs) > tol]
    lambda_star = float(nonzero.min()) if nonzero.size else None

    gram_eigs, _ = jacobi_eigh(g.weights.T @ g.weights, tol=tol)
    a_norm = math.sqrt(max(float(gram_eigs[-1]), 0.0))

    m_radius = None
    if lambda_star is not None and lambda_star > 0:
        m_radius = a_norm * math.sqrt(g.n) / (2.0 * lambda_star)
    return SpectralSummary(
        out_degrees=g.out_degrees,
        in_degrees=g.in_degrees,
        sym_eigenvalues=sym_eigs,
        lambda_star=lambda_star,
        a_norm=a_norm,
        m_radius=m_radius,
    )


def is_weight_balanced(g: Graph, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(g.out_degrees - g.in_degrees)) <= tol)


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = np.flatnonzero(adj[frontier].any(axis=0) & ~seen)
        seen[nxt] = True
        frontier = nxt.tolist()
    return seen


def connectivity_class(g: Graph) -> Connectivity:
    """Strongest connectivity notion satisfied by ``g``.

    An edge ``i -> j`` exists when ``a_ij > 0``. "Connected" means some node
    is reachable from every node.
    """
    adj = g.weights > 0
    n = g.n
    reach = np.array([_reachable(adj, i) for i in range(n)])
    if reach.all():
        return Connectivity.STRONGLY_CONNECTED
    if reach.all(axis=0).any():
        return Connectivity.CONNECTED
    if _reachable(adj | adj.T, 0).all():
        return Connectivity.WEAKLY_CONNECTED
    return Connectivity.DISCONNECTED
