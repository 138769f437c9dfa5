"""
Fixed-step explicit Euler integration of the quantized field.

No event location or sliding-mode handling is attempted: each step uses the
field of the cell containing the current state, so runs approximate
Carathéodory solutions.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .graph import Graph
from .quantize import q_vec


class DivergenceError(RuntimeError):
    def __init__(self, time, message="state became non-finite"):
        super().__init__(f"{message} at t={time:g}")
        self.time = time


@dataclass(frozen=True)
class SimConfig:
    step: float = 0.01
    horizon: float = 60.0
    record_stride: int = 1
    stop_tol: float = 1e-10
    stop_window: float = 1.0
    linear: bool = False

    def __post_init__(self):
        if not self.step > 0 or not self.horizon > 0:
            raise ValueError("step and horizon must be positive")
        if self.step > self.horizon:
            raise ValueError("step must not exceed horizon")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if self.stop_window < self.step:
            raise ValueError("stop_window must be at least one step")


@dataclass(frozen=True)
class Limit:
    state: np.ndarray
    at_time: float


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    q_states: np.ndarray
    step: float
    record_stride: int = 1
    converged: Optional[Limit] = None
    meta: dict = dc_field(default_factory=dict)

    def __len__(self):
        return self.times.size

    @property
    def dt(self) -> float:
        """Time between consecutive samples."""
        return self.step * self.record_stride

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def tail(self, fraction: float) -> "Trajectory":
        """Trailing ``fraction`` of the samples (at least two when available)."""
        if not 0 < fraction <= 1:
            raise ValueError("fraction must lie in (0, 1]")
        count = max(int(math.ceil(fraction * len(self))), min(2, len(self)))
        return Trajectory(self.times[-count:], self.states[-count:], self.q_states[-count:],
                          self.step, self.record_stride, self.converged, dict(self.meta))


def check_step(g: Graph, h: float) -> None:
    """Reject steps with ``h * max_i d_i >= 1``, where Euler stops contracting inside a cell."""
    dmax = float(g.out_degrees.max())
    if dmax > 0 and h * dmax >= 1.0:
        raise ValueError(f"step {h} too large: h * max degree = {h * dmax:g} >= 1")


def euler_step(g: Graph, x, h: float, linear: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not h > 0:
        raise ValueError("step must be positive")
    if linear:
        f = -(g.laplacian @ x)
    else:
        f = g.weights @ q_vec(x) - g.out_degrees * x
    out = x + h * f
    if not np.all(np.isfinite(out)):
        raise DivergenceError(float("nan"))
    return out


def random_initial_state(n: int, lo: float = 0.0, hi: float = 30.0, seed: int = 0) -> np.ndarray:
    """Uniform draw on ``[lo, hi]^n`` from a PCG64 generator."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    return np.random.default_rng(seed).uniform(lo, hi, size=n)


def simulate(g: Graph, x0, cfg: SimConfig = SimConfig()) -> Trajectory:
    """Integrate from ``x0`` until ``cfg.horizon`` or until the run settles.

    The run is declared converged, at a recorded sample, when the summed
    per-step motion (infinity norm) over the trailing ``stop_window`` is below
    ``stop_tol`` and the field there has infinity norm below
    ``stop_tol / stop_window``. A state with exactly zero field converges at once.
    """
    x = np.array(x0, dtype=float)
    if x.shape != (g.n,):
        raise ValueError(f"initial state has shape {x.shape}, graph has {g.n} nodes")
    if not np.all(np.isfinite(x)):
        raise ValueError("initial state must be finite")
    h = cfg.step
    check_step(g, h)

    a = np.array(g.weights)
    d = g.out_degrees
    lap = g.laplacian
    linear = cfg.linear

    def rhs(y):
        if linear:
            return -(lap @ y)
        k = np.floor(y)
        return a @ (k + (y - k >= 0.5)) - d * y

    n_steps = int(math.floor(cfg.horizon / h + 1e-9))
    stride = cfg.record_stride
    window_steps = int(math.ceil(cfg.stop_window / h - 1e-9))
    field_tol = cfg.stop_tol / cfg.stop_window

    n_rec = n_steps // stride + 1
    states = np.empty((n_rec, g.n))
    states[0] = x
    rec = 1
    recent = deque(maxlen=window_steps)
    run_sum = 0.0
    converged = None

    f = rhs(x)
    stop_reason = "horizon"
    if not np.any(f):
        converged = Limit(x.copy(), 0.0)
        stop_reason = "zero_field"
        n_steps = 0

    for s in range(1, n_steps + 1):
        x_new = x + h * f
        if not np.all(np.isfinite(x_new)):
            raise DivergenceError(s * h)
        inc = float(np.max(np.abs(x_new - x)))
        if len(recent) == window_steps:
            run_sum -= recent[0]
        recent.append(inc)
        run_sum += inc
        x = x_new
        f = rhs(x)
        if s % stride:
            continue
        states[rec] = x
        rec += 1
        fnorm = float(np.max(np.abs(f)))
        if fnorm == 0.0:
            converged, stop_reason = Limit(x.copy(), s * h), "zero_field"
            break
        if (len(recent) == window_steps and run_sum < cfg.stop_tol
                and math.fsum(recent) < cfg.stop_tol and fnorm < field_tol):
            converged, stop_reason = Limit(x.copy(), s * h), "stagnation"
            break

    states = states[:rec]
    times = np.arange(rec) * (h * stride)
    meta = {
        "step": h,
        "horizon": cfg.horizon,
        "record_stride": stride,
        "stop_tol": cfg.stop_tol,
        "stop_window": cfg.stop_window,
        "stop_reason": stop_reason,
        "linear": linear,
    }
    return Trajectory(times, states, q_vec(states), h, stride, converged, meta)


def detect_limit(traj: Trajectory, tol: float, window: float) -> Optional[np.ndarray]:
    """A-posteriori version of the stop rule on recorded samples.

    The field at the end is estimated by the last sample difference over ``dt``.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    w = int(round(window / traj.dt))
    if w < 1 or w + 1 > len(traj):
        raise ValueError("window longer than the trajectory")
    tail = traj.states[-(w + 1):]
    final = tail[-1]
    motion = float(np.max(np.abs(tail - final)))
    rate = float(np.max(np.abs(tail[-1] - tail[-2]))) / traj.dt
    if motion < tol and rate < tol / window:
        return final.copy()
    return None


def chattering_score(traj: Trajectory, window: float) -> float:
    """Peak rate (changes per unit time) of quantization-level switches over sliding windows."""
    if len(traj) < 2:
        raise ValueError("need at least two samples")
    changes = np.count_nonzero(np.diff(traj.q_states, axis=0), axis=1)
    w = max(int(round(window / traj.dt)), 1)
    if w >= changes.size:
        return float(changes.sum()) / window
    csum = np.concatenate(([0], np.cumsum(changes)))
    return float((csum[w:] - csum[:-w]).max()) / window
