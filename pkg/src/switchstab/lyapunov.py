"""Grid dynamic programming for control-Lyapunov functions of planar systems.

Homogeneous functions on R^2 are stored by their values on unit directions
``theta_k = pi k / n`` (antipodal directions identified) and read back by
piecewise-linear interpolation in angle.  For a mode ``A`` and direction
``theta`` the image is evaluated through homogeneity,
``V(A z) = |A z| * V(angle(A z))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import LambdaNotCertifiable, MethodInapplicable, NotCertifiable
from .linalg import MatrixSet

OVERFLOW = 1e12
RATIO_RTOL = 1e-9


@dataclass(frozen=True)
class AngularGrid:
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("an angular grid needs at least 8 nodes")

    @property
    def spacing(self) -> float:
        return math.pi / self.n

    @property
    def angles(self) -> np.ndarray:
        return self.spacing * np.arange(self.n)

    @property
    def midpoints(self) -> np.ndarray:
        return self.angles + 0.5 * self.spacing


def interpolate(values: np.ndarray, angles) -> np.ndarray:
    """Piecewise-linear periodic (period pi) interpolation of node values."""
    n = len(values)
    u = (np.asarray(angles, dtype=float) % math.pi) * (n / math.pi)
    k = np.floor(u).astype(np.int64)
    frac = u - k
    k %= n
    return (1.0 - frac) * values[k] + frac * values[(k + 1) % n]


def _images(matrix_set: MatrixSet, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stretch factors ``|A z|`` and image angles for every mode, shape ``(m, len(angles))``."""
    z = np.vstack([np.cos(angles), np.sin(angles)])
    y = matrix_set.matrices @ z
    return np.hypot(y[:, 0], y[:, 1]), np.arctan2(y[:, 1], y[:, 0])


def _require_planar(matrix_set: MatrixSet) -> None:
    if matrix_set.dim != 2:
        raise MethodInapplicable("Lyapunov grid computations are implemented for d = 2 only")


@dataclass
class ValueTable:
    grid: AngularGrid
    values: np.ndarray
    lam: float
    kind: str
    residual: float
    iterations: int = 0
    tol: float | None = None

    @property
    def converged(self) -> bool:
        return self.tol is None or self.residual <= self.tol

    def __call__(self, angles) -> np.ndarray:
        return interpolate(self.values, angles)

    def evaluate(self, x) -> np.ndarray:
        """``V(x) = |x| * W(angle(x))`` for vectors stacked along the last axis."""
        x = np.asarray(x, dtype=float)
        return np.hypot(x[..., 0], x[..., 1]) * self(np.arctan2(x[..., 1], x[..., 0]))

    def bounds(self) -> tuple[float, float]:
        """Constants ``m, M`` with ``m|x| <= V(x) <= M|x|`` (interpolation is a convex combination)."""
        return float(self.values.min()), float(self.values.max())

    def interpolation_error(self) -> float:
        """Second-difference estimate of the linear interpolation error."""
        w = self.values
        return float(np.max(np.abs(np.roll(w, -1) - 2 * w + np.roll(w, 1))) / 8.0)


def _profiles(matrix_set: MatrixSet, grid: AngularGrid):
    """Yield g_0, g_1, ... with g_{t+1}(z) = min_A |A z| g_t(angle(A z))."""
    r, phi = _images(matrix_set, grid.angles)
    g = np.ones(grid.n)
    while True:
        yield g
        g = np.min(r * interpolate(g, phi), axis=0)


def min_product_profile(matrix_set: MatrixSet, t: int, grid: AngularGrid) -> np.ndarray:
    """Grid approximation of ``min |A z|`` over products ``A`` of length ``t``."""
    _require_planar(matrix_set)
    if t < 0:
        raise ValueError("t must be nonnegative")
    for k, g in enumerate(_profiles(matrix_set, grid)):
        if k == t:
            return g


def v_lambda(matrix_set: MatrixSet, lam: float, T: int, grid: AngularGrid) -> ValueTable:
    """Truncated sup-inf value ``max_{t <= T} g_t / lam^t``."""
    _require_planar(matrix_set)
    if lam <= 0 or T < 1:
        raise ValueError("need lam > 0 and T >= 1")
    values = np.ones(grid.n)
    increment = 0.0
    for t, g in enumerate(_profiles(matrix_set, grid)):
        if t == 0:
            continue
        scaled = g / lam**t
        if np.max(scaled) > OVERFLOW:
            raise LambdaNotCertifiable(f"lambda {lam} not certifiable: g_t / lam^t exceeded {OVERFLOW:g} at t={t}")
        increment = float(np.max(np.clip(scaled - values, 0.0, None)))
        values = np.maximum(values, scaled)
        if t == T:
            break
    return ValueTable(grid, values, lam, "v_lambda", increment, iterations=T)


def bellman(values: np.ndarray, matrix_set: MatrixSet, lam: float, grid: AngularGrid, images=None) -> np.ndarray:
    """``(T W)(z) = max(1, min_A |A z| / lam * W(angle(A z)))``."""
    r, phi = images if images is not None else _images(matrix_set, grid.angles)
    return np.maximum(1.0, np.min(r / lam * interpolate(values, phi), axis=0))


def v_hat(
    matrix_set: MatrixSet,
    lam: float,
    grid: AngularGrid,
    max_iter: int = 100_000,
    tol: float = 1e-9,
) -> ValueTable:
    """Inf-sup value by monotone fixed-point iteration from ``W = 1``.

    Stops when the sup-norm increment drops to ``tol``; the returned table
    carries that increment as ``residual``.  Raises
    :class:`LambdaNotCertifiable` once values pass ``1e12``.
    """
    _require_planar(matrix_set)
    if lam <= 0:
        raise ValueError("lam must be positive")
    images = _images(matrix_set, grid.angles)
    w = np.ones(grid.n)
    increment = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        new = bellman(w, matrix_set, lam, grid, images)
        increment = float(np.max(np.abs(new - w)))
        w = new
        if np.max(w) > OVERFLOW:
            raise LambdaNotCertifiable(f"lambda {lam} not certifiable: value iteration diverged after {it} sweeps")
        if increment <= tol:
            break
    return ValueTable(grid, w, lam, "v_hat", increment, iterations=it, tol=tol)


def _ratio(table: ValueTable, matrix_set: MatrixSet, angles: np.ndarray) -> np.ndarray:
    r, phi = _images(matrix_set, angles)
    return r * table(phi) / table(angles)


def decrease_ratio(table: ValueTable, matrix_set: MatrixSet, angles=None) -> np.ndarray:
    """``min_A V(A z) / V(z)``, one value per grid cell.

    By default the ratio is probed at the cell midpoints: at the nodes
    themselves a converged fixed point satisfies the Bellman equation
    exactly, so only off-node points exercise the interpolated function.
    Pass ``table.grid.angles`` to evaluate at the nodes.
    """
    _require_planar(matrix_set)
    angles = table.grid.midpoints if angles is None else np.asarray(angles, dtype=float)
    return np.min(_ratio(table, matrix_set, angles), axis=0)


def exceedance_fraction(ratio: np.ndarray, lam: float, rtol: float = RATIO_RTOL) -> float:
    """Fraction of entries with ``ratio > lam`` beyond round-off."""
    return float(np.mean(ratio > lam * (1.0 + rtol)))


@dataclass
class FeedbackPartition:
    """Piecewise-constant 0-homogeneous feedback on directions modulo pi."""

    starts: np.ndarray
    ends: np.ndarray
    modes: np.ndarray
    mu: float
    requested_mu: float = field(default=math.nan)

    @property
    def arcs(self) -> list[tuple[float, float, int]]:
        return [(float(a), float(b), int(m)) for a, b, m in zip(self.starts, self.ends, self.modes)]

    def mode_at(self, angle: float) -> int:
        a = float(angle) % math.pi
        k = int(np.searchsorted(self.starts, a, side="right")) - 1
        return int(self.modes[max(k, 0)])

    def __call__(self, x) -> int:
        return self.mode_at(math.atan2(x[1], x[0]))


def extract_feedback(table: ValueTable, matrix_set: MatrixSet, mu: float) -> FeedbackPartition:
    """Argmin-mode feedback read off a value table, certified on arc samples.

    Raises :class:`NotCertifiable` when some node ratio exceeds ``mu``.
    The returned ``mu`` is the largest ratio seen at nodes, arc endpoints
    and arc midpoints under the assigned modes (it may exceed the request
    by interpolation slack between nodes).
    """
    _require_planar(matrix_set)
    nodes = table.grid.angles
    per_mode = _ratio(table, matrix_set, nodes)
    choice = np.argmin(per_mode, axis=0)
    node_ratio = per_mode[choice, np.arange(len(nodes))]
    limit = mu * (1.0 + RATIO_RTOL) + table.residual
    if np.any(node_ratio > limit):
        worst = float(node_ratio.max())
        raise NotCertifiable(f"not certifiable at mu={mu}: node ratio reaches {worst:.6g}")

    half = 0.5 * table.grid.spacing
    starts, ends, modes = [0.0], [], [int(choice[0])]
    for k in range(1, len(nodes)):
        if choice[k] != modes[-1]:
            ends.append(nodes[k] - half)
            starts.append(nodes[k] - half)
            modes.append(int(choice[k]))
    ends.append(math.pi)
    starts, ends, modes = np.array(starts), np.array(ends), np.array(modes)

    certified = float(node_ratio.max())
    for a, b, m in zip(starts, ends, modes):
        probe = np.array([a, 0.5 * (a + b), b])
        certified = max(certified, float(np.max(_ratio(table, matrix_set, probe)[m])))
    return FeedbackPartition(starts, ends, modes, certified, requested_mu=mu)


def closed_loop_simulate(
    feedback: FeedbackPartition | Callable[[np.ndarray], int],
    matrix_set: MatrixSet,
    x0,
    steps: int,
) -> np.ndarray:
    """States ``x_0 .. x_steps`` of ``x_{k+1} = A_{sigma(x_k)} x_k``."""
    x = np.asarray(x0, dtype=float)
    if not np.any(x):
        raise ValueError("x0 must be nonzero")
    out = np.empty((steps + 1, x.size))
    out[0] = x
    for k in range(steps):
        if not np.any(x):
            out[k + 1:] = 0.0
            break
        x = matrix_set[feedback(x)] @ x
        out[k + 1] = x
    return out
